//! Regularized incomplete beta function I_x(a, b).

use statrs::function::gamma::ln_gamma;

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// ln B(a, b).
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
///
/// Evaluated by the continued fraction of DLMF 8.17.22 with the modified
/// Lentz algorithm, switching to I_{1-x}(b, a) past the mean so the fraction
/// converges quickly.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_b = ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        beta_reg_cf(a, b, x, ln_b)
    } else {
        1.0 - beta_reg_cf(b, a, 1.0 - x, ln_b)
    }
}

/// Same as [`beta_reg`] with a precomputed ln B(a, b), valid only on the
/// fast side of the fraction: x < (a + 1) / (a + b + 2).
pub(crate) fn beta_reg_cf(a: f64, b: f64, x: f64, ln_b: f64) -> f64 {
    let ln_prefix = a * x.ln() + b * (1.0 - x).ln() - ln_b;
    let prefix = ln_prefix.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        // even step
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        // odd step
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;

        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    prefix * h
}
