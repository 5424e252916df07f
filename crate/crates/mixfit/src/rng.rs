//! Counter-based random streams with explicit 64-bit state.
//!
//! Every sampler in this crate draws from a [`RandomStream`] so that results
//! are bit-reproducible across platforms and thread counts. The generator is
//! a SplitMix64 walk; substreams are derived by avalanche-mixing the parent
//! seed with substream labels.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 avalanche finalizer.
#[inline]
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with two labels (e.g. sample size and replication
/// index) into an independent substream seed.
pub fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    let mut z = avalanche(master.wrapping_add(GOLDEN));
    z = avalanche(z ^ a.wrapping_mul(0xd6e8_feb8_6659_fd93));
    avalanche(z ^ b.wrapping_mul(0xa076_1d64_78bd_642f))
}

/// A deterministic stream of pseudo-random numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomStream {
    state: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream { state: seed }
    }

    /// Derive an independent substream labeled `index`.
    pub fn substream(&self, index: u64) -> Self {
        RandomStream {
            state: mix_seed(self.state, 0x73_75_62, index),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        avalanche(self.state)
    }

    /// Uniform draw in (0, 1); never returns exactly 0 or 1.
    pub fn uniform(&mut self) -> f64 {
        let u = (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        if u <= 0.0 {
            5.0e-324
        } else {
            u
        }
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw via Box-Muller (cosine branch).
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Flat Dirichlet draw on the simplex of dimension `k`.
    pub fn simplex(&mut self, k: usize) -> Vec<f64> {
        let mut w: Vec<f64> = (0..k).map(|_| -self.uniform().ln()).collect();
        let total: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= total;
        }
        w
    }
}
