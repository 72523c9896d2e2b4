//! Beta distribution primitives on top of the regularized incomplete beta.

use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};

pub(super) fn cdf(alpha: f64, beta: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    // closed forms where one parameter is 1
    if alpha == 1.0 {
        return -(beta * (-x).ln_1p()).exp_m1();
    }
    if beta == 1.0 {
        return x.powf(alpha);
    }
    beta_reg(alpha, beta, x)
}

fn log_term(exponent: f64, base: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else {
        exponent * base.ln()
    }
}

pub(super) fn pdf(alpha: f64, beta: f64, x: f64) -> f64 {
    let log_f = log_term(alpha - 1.0, x) + log_term(beta - 1.0, 1.0 - x) - ln_beta(alpha, beta);
    log_f.exp()
}

pub(super) fn inv_cdf(alpha: f64, beta: f64, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if q >= 1.0 {
        return 1.0;
    }
    if alpha == 1.0 {
        return -(((1.0 - q).ln()) / beta).exp_m1();
    }
    if beta == 1.0 {
        return q.powf(1.0 / alpha);
    }
    // Newton polish of the AS 109 estimate; bisection when it misbehaves.
    let mut x = inv_beta_reg(alpha, beta, q).clamp(0.0, 1.0);
    for _ in 0..8 {
        let err = cdf(alpha, beta, x) - q;
        if err.abs() <= 1e-14 {
            return x;
        }
        let f = pdf(alpha, beta, x);
        if !(f > 0.0 && f.is_finite()) {
            break;
        }
        let next = x - err / f;
        if !(0.0..=1.0).contains(&next) {
            break;
        }
        x = next;
    }
    if (cdf(alpha, beta, x) - q).abs() <= 1e-12 {
        return x;
    }
    super::bisect_quantile(|y| cdf(alpha, beta, y), q)
}
