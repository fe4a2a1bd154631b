//! Exact similarity solutions of
//!
//! ```text
//! u_t + u_xxx + λ (t+a)^μ u⁻⁴ u_x = 0
//! ```
//!
//! of the form `u = (t+a)^m Ψ(x/(t+a)^n)`. Removing the explicit time
//! dependence forces `m = −1/3`, `n = 1/3`, `μ = −2`, and `Ψ` is the Ermakov
//! superposition solution from [`crate::ermakov`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ermakov::{ErmakovParams, PsiValues};
use crate::error::{Error, Result};
use crate::report::{GridSpec, Method, ResidualAccumulator, ResidualReport};

pub const M_EXPONENT: f64 = -1.0 / 3.0;
pub const N_EXPONENT: f64 = 1.0 / 3.0;
pub const MU_EXPONENT: f64 = -2.0;

/// Step used by the finite-difference residual unless overridden.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySolution {
    pub params: ErmakovParams,
    /// Time offset; `t + a > 0` on the whole time axis `t >= 0`.
    pub a: f64,
    pub m: f64,
    pub n: f64,
    pub mu: f64,
}

/// `u` and the derivatives entering the evolution equation at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UDerivatives {
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub u_xxx: f64,
    pub u_t: f64,
}

impl SimilaritySolution {
    pub fn new(params: ErmakovParams, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("time offset a must be positive, got {a}")));
        }
        Ok(SimilaritySolution { params, a, m: M_EXPONENT, n: N_EXPONENT, mu: MU_EXPONENT })
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    fn tau(&self, t: f64) -> Result<f64> {
        let tau = t + self.a;
        if !(tau > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("t = {t} gives t + a = {tau} <= 0")));
        }
        Ok(tau)
    }

    /// Similarity variable `ξ = x (t+a)^{-1/3}`.
    pub fn xi(&self, x: f64, t: f64) -> Result<f64> {
        Ok(x / self.tau(t)?.cbrt())
    }

    pub fn psi_at(&self, x: f64, t: f64) -> Result<PsiValues> {
        self.params.psi(self.xi(x, t)?)
    }

    /// `u(x, t) = (t+a)^{-1/3} Ψ(x/(t+a)^{1/3})`. Defined for `t > −a`.
    pub fn eval_u(&self, x: f64, t: f64) -> Result<f64> {
        let s = 1.0 / self.tau(t)?.cbrt();
        Ok(s * self.params.psi(x * s)?.psi)
    }

    /// Analytic derivatives by the chain rule through `Ψ … Ψ'''`.
    pub fn derivatives(&self, x: f64, t: f64) -> Result<UDerivatives> {
        let s = 1.0 / self.tau(t)?.cbrt();
        let xi = x * s;
        let p = self.params.psi(xi)?;
        let s2 = s * s;
        let s4 = s2 * s2;
        Ok(UDerivatives {
            u: s * p.psi,
            u_x: s2 * p.dpsi,
            u_xx: s2 * s * p.d2psi,
            u_xxx: s4 * p.d3psi,
            u_t: -s4 * (p.psi + xi * p.dpsi) / 3.0,
        })
    }

    /// Flux of the conservation form `u_t + ∂_x[u_xx − (λ/3)(t+a)⁻² u⁻³] = 0`.
    pub fn flux(&self, x: f64, t: f64) -> Result<f64> {
        let tau = self.tau(t)?;
        let d = self.derivatives(x, t)?;
        Ok(d.u_xx - self.lambda() / 3.0 / (tau * tau) / (d.u * d.u * d.u))
    }
}

/// Knobs for the residual evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    pub fd_step: f64,
    /// Multiplies λ in the evaluated equation (1.0 for the true equation).
    pub lambda_scale: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions { fd_step: DEFAULT_FD_STEP, lambda_scale: 1.0 }
    }
}

/// The analytic and finite-difference residual reports of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    pub analytic: ResidualReport,
    pub finite_difference: ResidualReport,
}

const PDE_IDENTITY: &str = "u_t + u_xxx + lambda (t+a)^-2 u^-4 u_x = 0";

/// Both residual evaluations of the evolution equation on a grid.
pub fn pde_residual(sol: &SimilaritySolution, grid: &GridSpec) -> Result<PdeResidual> {
    pde_residual_with(sol, grid, ResidualOptions::default())
}

pub fn pde_residual_with(sol: &SimilaritySolution, grid: &GridSpec, opts: ResidualOptions) -> Result<PdeResidual> {
    grid.validate()?;
    if grid.x0 < 0.0 || grid.t0 < 0.0 {
        return Err(Error::Domain(format!(
            "residual grid must lie in x >= 0, t >= 0; got x0 = {}, t0 = {}",
            grid.x0, grid.t0
        )));
    }
    let pts = grid.points();
    Ok(PdeResidual {
        analytic: analytic_residual_at(sol, &pts, opts.lambda_scale)?,
        finite_difference: fd_residual_at(sol, &pts, opts)?,
    })
}

/// Analytic defect of the evolution equation at one point, with the sum of
/// the magnitudes of its terms as scale.
pub fn analytic_defect(sol: &SimilaritySolution, x: f64, t: f64, lambda_scale: f64) -> Result<(f64, f64)> {
    let d = sol.derivatives(x, t)?;
    let tau = t + sol.a;
    let nonlinear = sol.lambda() * lambda_scale / (tau * tau) * d.u_x / d.u.powi(4);
    Ok((d.u_t + d.u_xxx + nonlinear, d.u_t.abs() + d.u_xxx.abs() + nonlinear.abs()))
}

/// Analytic residual on an arbitrary point set.
pub fn analytic_residual_at(sol: &SimilaritySolution, pts: &[(f64, f64)], lambda_scale: f64) -> Result<ResidualReport> {
    let mut acc = ResidualAccumulator::new(PDE_IDENTITY, Method::Analytic);
    for &(x, t) in pts {
        let (r, scale) = analytic_defect(sol, x, t, lambda_scale)?;
        acc.push(r, scale);
    }
    Ok(acc.finish(format!("lambda_scale = {lambda_scale}")))
}

/// Central-difference derivatives of `eval_u`: second order in `u_t`, `u_x`,
/// and the 5-point second-order stencil for `u_xxx`.
pub fn fd_derivatives(sol: &SimilaritySolution, x: f64, t: f64, h: f64) -> Result<UDerivatives> {
    let u = |x: f64, t: f64| sol.eval_u(x, t);
    let (um2, um1, u0, up1, up2) = (u(x - 2.0 * h, t)?, u(x - h, t)?, u(x, t)?, u(x + h, t)?, u(x + 2.0 * h, t)?);
    Ok(UDerivatives {
        u: u0,
        u_x: (up1 - um1) / (2.0 * h),
        u_xx: (up1 - 2.0 * u0 + um1) / (h * h),
        u_xxx: (up2 - 2.0 * up1 + 2.0 * um1 - um2) / (2.0 * h * h * h),
        u_t: (u(x, t + h)? - u(x, t - h)?) / (2.0 * h),
    })
}

pub fn fd_residual_at(sol: &SimilaritySolution, pts: &[(f64, f64)], opts: ResidualOptions) -> Result<ResidualReport> {
    let lambda = sol.lambda() * opts.lambda_scale;
    let mut acc = ResidualAccumulator::new(PDE_IDENTITY, Method::FiniteDifference);
    for &(x, t) in pts {
        let d = fd_derivatives(sol, x, t, opts.fd_step)?;
        let tau = t + sol.a;
        let nonlinear = lambda / (tau * tau) * d.u_x / d.u.powi(4);
        let r = d.u_t + d.u_xxx + nonlinear;
        acc.push(r, d.u_t.abs() + d.u_xxx.abs() + nonlinear.abs());
    }
    Ok(acc.finish(format!("step = {}, lambda_scale = {}", opts.fd_step, opts.lambda_scale)))
}

/// One linear condition `coeffs · (m, n, μ) = rhs` on the ansatz exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCondition {
    pub description: String,
    pub coeffs: [f64; 3],
    pub rhs: f64,
}

/// The exponent conditions, their determinant and unique solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentForcing {
    pub conditions: Vec<ExponentCondition>,
    pub determinant: f64,
    pub m: f64,
    pub n: f64,
    pub mu: f64,
}

impl ExponentForcing {
    /// Each condition's exponent evaluated at the solution (all zero).
    pub fn closure(&self) -> Vec<f64> {
        let v = [self.m, self.n, self.mu];
        self.conditions
            .iter()
            .map(|c| c.coeffs.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() - c.rhs)
            .collect()
    }
}

impl fmt::Display for ExponentForcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<52} {:>6} {:>6} {:>6} {:>6}", "condition", "m", "n", "mu", "rhs")?;
        for c in &self.conditions {
            writeln!(
                f,
                "{:<52} {:>6} {:>6} {:>6} {:>6}",
                c.description, c.coeffs[0], c.coeffs[1], c.coeffs[2], c.rhs
            )?;
        }
        writeln!(f, "determinant = {}", self.determinant)?;
        write!(f, "m = {:.6}, n = {:.6}, mu = {:.6}", self.m, self.n, self.mu)
    }
}

fn det3(a: [[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// Inserting the ansatz leaves
///
/// ```text
/// (t+a)^{m-1} [ mΨ − nξΨ' + (t+a)^{1−3n} Ψ''' + λ (t+a)^{μ−4m−n+1} Ψ⁻⁴Ψ' ].
/// ```
///
/// Time drops out when both inner exponents vanish, and the first two terms
/// combine into the exact derivative `−n(ξΨ)'` when `m + n = 0`. Solves the
/// resulting 3×3 system by Cramer's rule.
pub fn exponent_forcing_check() -> ExponentForcing {
    let conditions = vec![
        ExponentCondition {
            description: "dispersive term exponent 1 - 3n = 0".into(),
            coeffs: [0.0, -3.0, 0.0],
            rhs: -1.0,
        },
        ExponentCondition {
            description: "m psi - n xi psi' exact derivative: m + n = 0".into(),
            coeffs: [1.0, 1.0, 0.0],
            rhs: 0.0,
        },
        ExponentCondition {
            description: "nonlinear term exponent mu - 4m - n + 1 = 0".into(),
            coeffs: [-4.0, -1.0, 1.0],
            rhs: -1.0,
        },
    ];
    let a = [conditions[0].coeffs, conditions[1].coeffs, conditions[2].coeffs];
    let b = [conditions[0].rhs, conditions[1].rhs, conditions[2].rhs];
    let det = det3(a);
    let solve_col = |col: usize| {
        let mut m = a;
        for (row, rhs) in m.iter_mut().zip(b) {
            row[col] = rhs;
        }
        det3(m) / det
    };
    ExponentForcing { m: solve_col(0), n: solve_col(1), mu: solve_col(2), determinant: det, conditions }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol() -> SimilaritySolution {
        SimilaritySolution::new(ErmakovParams::new(1.0, 1.0, 0.2).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn origin_at_time_zero_is_psi_of_zero() {
        let s = sol();
        assert_eq!(s.eval_u(0.0, 0.0).unwrap(), s.params.psi(0.0).unwrap().psi);
    }

    #[test]
    fn direct_ansatz_arithmetic() {
        let s = sol();
        let c = 3f64.powf(-1.0 / 3.0);
        let expect = c * s.params.psi(0.5 * c).unwrap().psi;
        assert!((s.eval_u(0.5, 2.0).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn scaling_self_similarity() {
        let s = sol();
        let k = 2f64;
        for (x, t) in [(0.1, 0.0), (0.7, 1.3), (1.9, 6.0)] {
            let lhs = s.eval_u(k.cbrt() * x, k * (t + s.a) - s.a).unwrap() * k.cbrt();
            assert!((lhs - s.eval_u(x, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_offset() {
        let p = ErmakovParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(SimilaritySolution::new(p, 0.0).is_err());
        assert!(sol().eval_u(0.0, -1.0).is_err());
    }

    #[test]
    fn residuals_small_on_grid() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 10.0, 50, 50).unwrap();
        let r = pde_residual(&sol(), &g).unwrap();
        assert!(r.analytic.max_abs < 1e-9, "{:?}", r.analytic);
        assert!(r.finite_difference.max_abs < 1e-5, "{:?}", r.finite_difference);
    }

    #[test]
    fn perturbed_lambda_is_detected() {
        let g = GridSpec::new(0.0, 1.0, 0.0, 10.0, 20, 20).unwrap();
        let opts = ResidualOptions { lambda_scale: 1.0 + 1e-3, ..Default::default() };
        let r = pde_residual_with(&sol(), &g, opts).unwrap();
        assert!(r.analytic.max_abs > 1e-6, "{:?}", r.analytic);
    }

    #[test]
    fn grid_outside_domain() {
        let g = GridSpec::new(-1.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        assert!(matches!(pde_residual(&sol(), &g), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_point_set() {
        let r = analytic_residual_at(&sol(), &[], 1.0).unwrap();
        assert!(r.empty && r.n_points == 0 && !r.mean_abs.is_nan());
    }

    #[test]
    fn flux_derivative_balances_time_derivative() {
        let s = sol();
        let h = 1e-5;
        for (x, t) in [(0.2, 0.0), (0.9, 3.0), (1.5, 9.0)] {
            let dflux = (s.flux(x + h, t).unwrap() - s.flux(x - h, t).unwrap()) / (2.0 * h);
            let ut = s.derivatives(x, t).unwrap().u_t;
            assert!((dflux + ut).abs() < 1e-8, "({x}, {t}): {dflux} vs {}", -ut);
        }
    }

    #[test]
    fn finite_differences_track_analytic_derivatives() {
        let s = sol();
        let (x, t) = (0.6, 2.0);
        let a = s.derivatives(x, t).unwrap();
        let err = |h: f64| {
            let f = fd_derivatives(&s, x, t, h).unwrap();
            [(f.u_t - a.u_t).abs(), (f.u_x - a.u_x).abs(), (f.u_xxx - a.u_xxx).abs()]
        };
        let (e1, e2) = (err(4e-2), err(2e-2));
        for k in 0..3 {
            let order = (e1[k] / e2[k]).log2();
            assert!(order > 1.9, "component {k}: order {order}");
        }
    }

    #[test]
    fn exponents_are_forced() {
        let f = exponent_forcing_check();
        assert!((f.m + 1.0 / 3.0).abs() < 1e-15);
        assert!((f.n - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.mu + 2.0).abs() < 1e-15);
        assert!(f.determinant.abs() > 0.5);
        assert!(f.closure().iter().all(|c| c.abs() < 1e-15));
        assert!(f.to_string().contains("mu = -2.000000"));
    }
}
