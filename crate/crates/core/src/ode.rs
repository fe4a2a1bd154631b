//! Classical fourth-order Runge–Kutta for second-order scalar ODEs written as
//! a first-order system in `(y, y')`.

use crate::error::{Error, Result};

pub type State = [f64; 2];

/// Integrates `y'' = accel(s, y, y')` on `n_steps` equal steps from `s0` to
/// `s1` and returns the state at every node (`n_steps + 1` entries).
pub fn rk4_trajectory<F>(accel: F, s0: f64, s1: f64, y0: State, n_steps: usize) -> Result<Vec<State>>
where
    F: Fn(f64, State) -> f64,
{
    let h = (s1 - s0) / n_steps as f64;
    let rhs = |s: f64, y: State| -> State { [y[1], accel(s, y)] };
    let mut out = Vec::with_capacity(n_steps + 1);
    let mut y = y0;
    out.push(y);
    for i in 0..n_steps {
        let s = s0 + h * i as f64;
        let k1 = rhs(s, y);
        let k2 = rhs(s + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(s + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(s + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for j in 0..2 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if !(y[0].is_finite() && y[1].is_finite()) {
            return Err(Error::IntegrationFailure { at: s + h });
        }
        out.push(y);
    }
    Ok(out)
}
