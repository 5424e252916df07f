//! Randomized property suites cutting across modules.

mod support;

use mixfit::family::KernelFamily;
use mixfit::fit::{fit, OptimizerOptions};
use mixfit::measure::{wasserstein, MixingMeasure};
use mixfit::objective::{ks_objective, PhiSpec};
use mixfit::rng::RandomStream;
use support::{oracle_wasserstein, random_measure};

#[test]
fn wasserstein_matches_oracle_on_random_pairs() {
    let mut rng = RandomStream::new(2024);
    for trial in 0..100 {
        let q = 1 + (trial % 2);
        let k_g = 1 + (rng.next_u64() % 4) as usize;
        let g = random_measure(&mut rng, k_g, q);
        let k_h = 1 + (rng.next_u64() % 4) as usize;
        let h = random_measure(&mut rng, k_h, q);
        for ell in [1.0, 2.0] {
            let fast = wasserstein(&g, &h, ell).unwrap();
            let slow = oracle_wasserstein(&g, &h, ell);
            assert!(
                (fast - slow).abs() < 1e-8,
                "trial {trial}, ell {ell}: simplex {fast} vs oracle {slow}"
            );
        }
    }
}

#[test]
fn wasserstein_metric_axioms() {
    let mut rng = RandomStream::new(7);
    for trial in 0..60 {
        let k_g = 1 + (rng.next_u64() % 3) as usize;
        let g = random_measure(&mut rng, k_g, 1);
        let k_h = 1 + (rng.next_u64() % 3) as usize;
        let h = random_measure(&mut rng, k_h, 1);
        let k_f = 1 + (rng.next_u64() % 3) as usize;
        let f = random_measure(&mut rng, k_f, 1);
        for ell in [1.0, 2.0] {
            let gh = wasserstein(&g, &h, ell).unwrap();
            let hg = wasserstein(&h, &g, ell).unwrap();
            let gg = wasserstein(&g, &g, ell).unwrap();
            let gf = wasserstein(&g, &f, ell).unwrap();
            let fh = wasserstein(&f, &h, ell).unwrap();
            assert!(gg.abs() < 1e-9, "trial {trial}: W(G,G) = {gg}");
            assert!((gh - hg).abs() < 1e-9, "trial {trial}: asymmetric {gh} vs {hg}");
            assert!(gh >= 0.0);
            assert!(
                gh <= gf + fh + 1e-9,
                "trial {trial}, ell {ell}: triangle violated {gh} > {gf} + {fh}"
            );
        }
    }
}

#[test]
fn wasserstein_monotone_in_ell() {
    let mut rng = RandomStream::new(99);
    for trial in 0..60 {
        let k_g = 1 + (rng.next_u64() % 3) as usize;
        let g = random_measure(&mut rng, k_g, 1);
        let k_h = 1 + (rng.next_u64() % 3) as usize;
        let h = random_measure(&mut rng, k_h, 1);
        let mut prev = 0.0;
        for ell in [1.0, 1.5, 2.0, 3.0] {
            let w = wasserstein(&g, &h, ell).unwrap();
            assert!(
                w >= prev - 1e-9,
                "trial {trial}: W_ell not increasing, {prev} then {w} at ell {ell}"
            );
            prev = w;
        }
    }
}

#[test]
fn scaled_moments_scale_by_epsilon_power() {
    let mut rng = RandomStream::new(5);
    for _ in 0..40 {
        let g = random_measure(&mut rng, 2, 1);
        let theta = rng.uniform_in(-1.0, 1.0);
        let eps = rng.uniform_in(0.1, 4.0);
        let base = g.shift_scale(&[theta], 1.0).unwrap().scalar_moments(4, 0.0);
        let scaled = g.shift_scale(&[theta], eps).unwrap().scalar_moments(4, 0.0);
        for (j, (&b, &s)) in base.iter().zip(&scaled).enumerate() {
            let expect = eps.powi(j as i32 + 1) * b;
            assert!(
                (s - expect).abs() <= 1e-9 * (1.0 + expect.abs()),
                "order {}: {s} vs {expect}",
                j + 1
            );
        }
    }
}

#[test]
fn empirical_ks_decays_with_n() {
    // mean KS statistic of the empirical measure to its own source shrinks
    // roughly like n^{-1/2}
    let fam = KernelFamily::gaussian(1.0);
    let g = MixingMeasure::new(vec![vec![-1.0], vec![1.0]], vec![0.5, 0.5], None).unwrap();
    let mean_ks = |n: usize| -> f64 {
        let mut total = 0.0;
        for r in 0..30u64 {
            let data = fam.sample_mixture(&g, n, 1000 + r).unwrap();
            total += ks_objective(&fam, &g, &data).unwrap();
        }
        total / 30.0
    };
    let at_100 = mean_ks(100);
    let at_1600 = mean_ks(1600);
    let ratio = at_100 / at_1600;
    // two 4x steps: expect about 4x shrinkage
    assert!(
        (2.5..6.0).contains(&ratio),
        "KS decay ratio {ratio} (means {at_100} vs {at_1600})"
    );
}

#[test]
fn one_atom_ks_fit_matches_grid_oracle() {
    let fam = KernelFamily::gaussian(1.0);
    let truth = MixingMeasure::dirac(vec![0.8]);
    let data = fam.sample_mixture(&truth, 400, 314).unwrap();
    let opts = OptimizerOptions { restarts: 3, max_iterations: 400, ..Default::default() };
    let res = fit(&fam, &PhiSpec::Ks, &data, 1, None, &opts).unwrap();
    // 1e-4-step grid search over the atom location
    let mut grid_best = f64::INFINITY;
    let mut theta = -2.0;
    while theta <= 3.0 {
        let g = MixingMeasure::dirac(vec![theta]);
        grid_best = grid_best.min(ks_objective(&fam, &g, &data).unwrap());
        theta += 1e-4;
    }
    assert!(
        res.objective <= grid_best + 1e-3,
        "optimizer {} vs grid oracle {grid_best}",
        res.objective
    );
}
