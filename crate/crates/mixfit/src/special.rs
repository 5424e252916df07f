//! Special functions used by the kernel family CDFs.
//!
//! `erf` is evaluated by a power series for small arguments and a continued
//! fraction for the tail; the regularized incomplete gamma uses the standard
//! series / Lentz continued-fraction split around `x = a + 1`. No external
//! special-function dependency is used, which keeps results identical across
//! platforms.

use std::f64::consts::PI;

const SQRT_PI: f64 = 1.772453850905516_f64;

/// Error function, absolute error below 1e-14 on the whole line.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let ax = x.abs();
    if ax < 2.0 {
        // erf(x) = 2x e^{-x^2}/sqrt(pi) * sum_n (2x^2)^n / (2n+1)!!
        let x2 = x * x;
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        let mut n = 0u32;
        while term.abs() > 1e-17 * sum.abs() && n < 200 {
            n += 1;
            term *= 2.0 * x2 / (2.0 * n as f64 + 1.0);
            sum += term;
        }
        2.0 * x * (-x2).exp() / SQRT_PI * sum
    } else if x > 0.0 {
        1.0 - erfc_tail(ax)
    } else {
        erfc_tail(ax) - 1.0
    }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x >= 2.0 {
        erfc_tail(x)
    } else if x <= -2.0 {
        2.0 - erfc_tail(-x)
    } else {
        1.0 - erf(x)
    }
}

// Legendre continued fraction for erfc, valid for x >= 2:
// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_tail(x: f64) -> f64 {
    debug_assert!(x >= 2.0);
    if x > 27.0 {
        return 0.0; // below 1e-300
    }
    // modified Lentz
    let tiny = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..300 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (SQRT_PI * f)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Natural log of the gamma function, via Stirling's series after shifting
/// the argument above 10 with the recurrence.
pub fn ln_gamma(mut x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument");
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// Regularized lower incomplete gamma P(a, x), absolute error below 1e-12.
pub fn reg_gamma_lower(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn reg_gamma_upper(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // midpoint-rule oracle for erf, fine grid
    fn erf_quadrature(x: f64) -> f64 {
        let n = 200_000;
        let h = x / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) * h;
            sum += (-t * t).exp();
        }
        2.0 / SQRT_PI * sum * h
    }

    #[test]
    fn erf_known_values() {
        assert_abs_diff_eq!(erf(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(erf(1.0), 0.8427007929497149, epsilon = 1e-14);
        assert_abs_diff_eq!(erf(-1.0), -0.8427007929497149, epsilon = 1e-14);
        assert_abs_diff_eq!(erf(2.0), 0.9953222650189527, epsilon = 1e-14);
        assert_abs_diff_eq!(erf(3.5), 0.9999992569016276, epsilon = 1e-14);
    }

    #[test]
    fn erf_matches_quadrature() {
        for &x in &[0.1, 0.5, 1.3, 1.999, 2.001, 2.7] {
            assert_abs_diff_eq!(erf(x), erf_quadrature(x), epsilon = 1e-9);
        }
    }

    #[test]
    fn erfc_complements_erf() {
        for i in -40..=40 {
            let x = i as f64 * 0.17;
            assert_abs_diff_eq!(erf(x) + erfc(x), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn erfc_deep_tail() {
        // erfc(5) = 1.5374597944280351e-12
        assert_abs_diff_eq!(erfc(5.0), 1.5374597944280351e-12, epsilon = 1e-24);
    }

    #[test]
    fn normal_cdf_symmetry() {
        assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            normal_cdf(1.96),
            1.0 - normal_cdf(-1.96),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(normal_cdf(1.0), 0.8413447460685429, epsilon = 1e-13);
    }

    #[test]
    fn ln_gamma_factorials() {
        let mut f = 1.0f64;
        for n in 1..15u32 {
            assert_abs_diff_eq!(
                ln_gamma(n as f64),
                f.ln(),
                epsilon = 1e-12 * (1.0 + f.ln().abs())
            );
            f *= n as f64;
        }
        // Gamma(1/2) = sqrt(pi)
        assert_abs_diff_eq!(ln_gamma(0.5), SQRT_PI.ln(), epsilon = 1e-13);
    }

    #[test]
    fn incomplete_gamma_exponential_case() {
        // P(1, x) = 1 - e^{-x}
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            assert_abs_diff_eq!(
                reg_gamma_lower(1.0, x),
                1.0 - (-x as f64).exp(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn incomplete_gamma_complementarity() {
        for &a in &[0.3, 0.5, 1.0, 2.5, 7.0, 30.0] {
            for &x in &[0.01, 0.5, 1.0, 3.0, 10.0, 50.0] {
                let p = reg_gamma_lower(a, x);
                let q = reg_gamma_upper(a, x);
                assert!((p + q - 1.0).abs() < 1e-12);
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    #[test]
    fn erf_as_incomplete_gamma() {
        // erf(x) = P(1/2, x^2) for x > 0
        for &x in &[0.2, 0.8, 1.5, 2.5, 4.0] {
            assert_abs_diff_eq!(erf(x), reg_gamma_lower(0.5, x * x), epsilon = 1e-12);
        }
    }
}
