//! Derivative and root-finding helpers shared by the analysis modules.

use crate::error::{Error, Result};

/// Adaptive central first derivative with one Richardson extrapolation.
///
/// Shrinks the step until the extrapolation error estimate drops below
/// `max(rel_tol |D|, abs_tol)`. When the estimate stops improving the
/// evaluation has hit its cancellation noise floor and the best estimate
/// so far is returned; `StepUnderflow` is raised only if the step shrinks
/// past `min_step` without ever producing a usable estimate.
pub fn central_derivative<F>(
    f: F,
    x: f64,
    h0: f64,
    rel_tol: f64,
    abs_tol: f64,
    min_step: f64,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let central = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let mut h = h0;
    let mut best: Option<(f64, f64)> = None; // (err, value)
    loop {
        let d_h = central(h)?;
        let d_h2 = central(h / 2.0)?;
        let richardson = (4.0 * d_h2 - d_h) / 3.0;
        let err = (d_h2 - d_h).abs() / 3.0;
        if err <= (rel_tol * richardson.abs()).max(abs_tol) {
            return Ok(richardson);
        }
        match best {
            Some((best_err, best_val)) if err >= best_err => {
                // noise floor reached; the previous estimate was the best
                return Ok(best_val);
            }
            _ => best = Some((err, richardson)),
        }
        h /= 4.0;
        if h < min_step {
            return Err(Error::StepUnderflow { step: h });
        }
    }
}

/// Five-point-stencil second derivative at fixed step.
pub fn second_derivative<F>(f: F, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(
        (-f(x + 2.0 * h)? + 16.0 * f(x + h)? - 30.0 * f(x)? + 16.0 * f(x - h)?
            - f(x - 2.0 * h)?)
            / (12.0 * h * h),
    )
}

/// Bisection on a bracketing interval, to relative tolerance on `x`.
///
/// `f(lo)` and `f(hi)` must have opposite signs.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Domain(format!(
            "bisection bracket [{lo}, {hi}] does not straddle a sign change"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= rel_tol * mid.abs().max(f64::MIN_POSITIVE) {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Logarithmically spaced grid between `lo` and `hi` (both positive).
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (points - 1) as f64).exp())
        .collect()
}
