//! Incomplete Gamma functions.
//!
//! The regularized lower function `P(a, x)` is summed as a power series for
//! `x < a + 1` and the regularized upper function `Q(a, x)` by a modified Lentz
//! continued fraction otherwise.

use super::gamma::ln_gamma_sign;
use crate::{Error, Result};

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

fn check(func: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::domain(func, format!("shape must be positive, got a = {a}")));
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(Error::domain(func, format!("argument must be non-negative, got x = {x}")));
    }
    Ok(())
}

/// `x^a e^{-x} / Γ(a)`, the common prefactor.
fn prefactor(a: f64, x: f64) -> f64 {
    let (lg, _) = ln_gamma_sign(a).expect("a > 0");
    (a * x.ln() - x - lg).exp()
}

fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * prefactor(a, x));
        }
    }
    Err(Error::numeric(
        "incomplete gamma series",
        format!("no convergence after {MAX_ITER} terms (a = {a}, x = {x})"),
    ))
}

fn upper_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h * prefactor(a, x));
        }
    }
    Err(Error::numeric(
        "incomplete gamma continued fraction",
        format!("no convergence after {MAX_ITER} iterations (a = {a}, x = {x})"),
    ))
}

/// Regularized lower incomplete Gamma `P(a, x) = γ(a, x)/Γ(a)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check("gamma_p", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < a + 1.0 {
        lower_series(a, x)
    } else {
        Ok(1.0 - upper_fraction(a, x)?)
    }
}

/// Regularized upper incomplete Gamma `Q(a, x) = Γ(a, x)/Γ(a)`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check("gamma_q", a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < a + 1.0 {
        Ok(1.0 - lower_series(a, x)?)
    } else {
        upper_fraction(a, x)
    }
}

/// Upper incomplete Gamma `Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt`.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    check("upper_incomplete_gamma", a, x)?;
    let (lg, _) = ln_gamma_sign(a)?;
    Ok(gamma_q(a, x)? * lg.exp())
}
