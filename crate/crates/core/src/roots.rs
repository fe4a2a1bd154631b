//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Stopping rules for the bracketed solvers.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { f_tol: 1e-12, x_tol: 1e-15, max_iter: 200 }
    }
}

fn check_bracket(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<()> {
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    Ok(())
}

/// Secant iteration safeguarded by bisection.
///
/// A secant step is taken from the two most recent iterates; it is rejected in
/// favour of bisection whenever it leaves the current bracket or the bracket
/// failed to halve over the previous two steps.
pub fn secant_bisect<F>(mut f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    check_bracket(a, b, fa, fb)?;

    // Most recent iterate pair for the secant.
    let (mut x0, mut f0, mut x1, mut f1) = (a, fa, b, fb);
    let mut widths = [b - a; 2];
    let mut last_abs = fa.abs().min(fb.abs());

    for _ in 0..opts.max_iter {
        let width = b - a;
        let mut x = if f1 != f0 { x1 - f1 * (x1 - x0) / (f1 - f0) } else { f64::NAN };
        let stalled = width > 0.5 * widths[0];
        if !(x > a && x < b) || stalled {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        last_abs = fx.abs();
        if fx.abs() < opts.f_tol || width < opts.x_tol * (1.0 + x.abs()) {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        x0 = x1;
        f0 = f1;
        x1 = x;
        f1 = fx;
        widths = [widths[1], b - a];
    }
    Err(Error::Convergence { iterations: opts.max_iter, residual: last_abs })
}

/// Newton iteration with a known derivative, kept inside a sign-changing
/// bracket; any step leaving the bracket is replaced by bisection.
pub fn newton_bisect<F>(f: F, lo: f64, hi: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    newton_bisect_from(f, lo, hi, 0.5 * (lo + hi), opts)
}

/// [`newton_bisect`] started from `guess`; a guess outside the bracket is
/// replaced by the midpoint.
pub fn newton_bisect_from<F>(mut f: F, lo: f64, hi: f64, guess: f64, opts: RootOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let (fa, _) = f(a)?;
    let (fb, _) = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    check_bracket(a, b, fa, fb)?;
    let rising = fb > 0.0;

    let mut x = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
    let mut last_abs = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let (fx, dfx) = f(x)?;
        last_abs = fx.abs();
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == rising {
            b = x;
        } else {
            a = x;
        }
        let mut next = x - fx / dfx;
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - x).abs();
        x = next;
        if fx.abs() < opts.f_tol || step < opts.x_tol * (1.0 + x.abs()) || b - a < opts.x_tol * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    Err(Error::Convergence { iterations: opts.max_iter, residual: last_abs })
}
