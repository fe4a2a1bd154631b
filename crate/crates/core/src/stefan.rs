//! Stefan-type moving boundary problems on `0 < x < S(t)` with the similarity
//! front `S(t) = γ (t+a)^{1/3}`.
//!
//! Conditions, with `F = u_xx − (λ/3)(t+a)⁻² u⁻³` the flux of the
//! conservation form:
//!
//! ```text
//! (I)   F(S(t), t) = L_m S^i Ṡ
//! (II)  u(S(t), t) = P_m S^j
//! (III) F(0, t)    = H_0 (t+a)^k
//! ```
//!
//! On the similarity solution each side reduces to a power of `t+a`, which
//! forces `i = j = k = −1` and leaves `Ψ''(γ) − (λ/3)Ψ⁻³(γ) = L_m/3`,
//! `Ψ(γ) = P_m/γ`, `Ψ''(0) − (λ/3)Ψ⁻³(0) = H_0`. With the reduced ODE these
//! give `L_m = P_m = γΨ(γ)` and `H_0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{GridSpec, Method, ResidualAccumulator, ResidualReport};
use crate::roots::{secant_bisect, RootOptions};
use crate::similarity::SimilaritySolution;

/// Smallest admissible front coefficient.
pub const MIN_GAMMA: f64 = 1e-6;

/// Tolerance of the `L_m = P_m` and `H_0 = 0` cross-checks in `forward_solve`.
pub const CONSISTENCY_TOL: f64 = 1e-10;

pub const BOUNDARY_EXPONENT: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StefanProblem {
    pub sol: SimilaritySolution,
    pub gamma: f64,
    #[serde(rename = "L_m")]
    pub l_m: f64,
    #[serde(rename = "P_m")]
    pub p_m: f64,
    #[serde(rename = "H_0")]
    pub h_0: f64,
    pub i: f64,
    pub j: f64,
    pub k: f64,
    #[serde(rename = "S_0")]
    pub s_0: f64,
}

/// Front position and speed at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontPoint {
    pub s: f64,
    pub s_dot: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= MIN_GAMMA) || !gamma.is_finite() {
        return Err(Error::Domain(format!("front coefficient gamma must be >= {MIN_GAMMA}, got {gamma}")));
    }
    Ok(())
}

/// `Ψ''(ξ) − (λ/3)Ψ⁻³(ξ)` from the analytic superposition derivatives.
fn reduced_flux(sol: &SimilaritySolution, xi: f64) -> Result<f64> {
    let p = sol.params.psi(xi)?;
    Ok(p.d2psi - sol.lambda() / 3.0 / (p.psi * p.psi * p.psi))
}

/// `P_m` produced by front coefficient `gamma`: `γΨ(γ)`.
pub fn front_value(sol: &SimilaritySolution, gamma: f64) -> Result<f64> {
    Ok(gamma * sol.params.psi(gamma)?.psi)
}

impl StefanProblem {
    /// Reads `L_m`, `P_m`, `H_0` off the similarity solution for front
    /// coefficient `gamma`, cross-checking `L_m = P_m` and `H_0 = 0`.
    pub fn forward_solve(sol: &SimilaritySolution, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let l_m = 3.0 * reduced_flux(sol, gamma)?;
        let p_m = front_value(sol, gamma)?;
        let h_0 = reduced_flux(sol, 0.0)?;

        let lp_defect = (l_m - p_m).abs() / p_m.abs();
        if !(lp_defect < CONSISTENCY_TOL) {
            return Err(Error::InternalConsistency { relation: "L_m = P_m", defect: lp_defect });
        }
        if !(h_0.abs() < CONSISTENCY_TOL) {
            return Err(Error::InternalConsistency { relation: "H_0 = 0", defect: h_0.abs() });
        }
        Ok(StefanProblem {
            sol: *sol,
            gamma,
            l_m,
            p_m,
            h_0,
            i: BOUNDARY_EXPONENT,
            j: BOUNDARY_EXPONENT,
            k: BOUNDARY_EXPONENT,
            s_0: gamma * sol.a.cbrt(),
        })
    }

    pub fn a(&self) -> f64 {
        self.sol.a
    }

    /// `S(t) = γ(t+a)^{1/3}` and `Ṡ = (γ/3)(t+a)^{-2/3}`.
    pub fn front(&self, t: f64) -> Result<FrontPoint> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("front time must be >= 0, got {t}")));
        }
        let c = (t + self.a()).cbrt();
        Ok(FrontPoint { s: self.gamma * c, s_dot: self.gamma / (3.0 * c * c) })
    }

    /// Boundary constants implied at time `t` if the exponents were `(i, j, k)`:
    /// `F(S,t)/(S^i Ṡ)`, `u(S,t)/S^j`, `F(0,t)/(t+a)^k`. They are constant in
    /// time only for the forced exponents.
    pub fn implied_constants(&self, i: f64, j: f64, k: f64, t: f64) -> Result<[f64; 3]> {
        let f = self.front(t)?;
        let tau = t + self.a();
        Ok([
            self.sol.flux(f.s, t)? / (f.s.powf(i) * f.s_dot),
            self.sol.eval_u(f.s, t)? / f.s.powf(j),
            self.sol.flux(0.0, t)? / tau.powf(k),
        ])
    }

    /// `nx × nt` points strictly inside `0 < x < S(t)`, `t ∈ [t0, t1]`.
    pub fn interior_points(&self, nx: usize, nt: usize, t0: f64, t1: f64) -> Result<Vec<(f64, f64)>> {
        let mut pts = Vec::with_capacity(nx * nt);
        for jt in 0..nt {
            let t = if nt == 1 { t0 } else { t0 + (t1 - t0) * jt as f64 / (nt - 1) as f64 };
            let s = self.front(t)?.s;
            for ix in 0..nx {
                pts.push((s * (ix + 1) as f64 / (nx + 1) as f64, t));
            }
        }
        Ok(pts)
    }

    /// Errors unless the rectangle lies in the physical domain
    /// (`x0 >= 0`, `t0 >= 0`, `x1 <= S(t0)`).
    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        grid.validate()?;
        if grid.x0 < 0.0 || grid.t0 < 0.0 {
            return Err(Error::Domain("grid must lie in x >= 0, t >= 0".into()));
        }
        let s = self.front(grid.t0)?.s;
        if grid.x1 > s * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("grid x1 = {} exceeds the front S(t0) = {s}", grid.x1)));
        }
        Ok(())
    }
}

/// Finds `γ` with `γΨ(γ) = p_m_target` inside `bracket`.
pub fn inverse_solve(sol: &SimilaritySolution, p_m_target: f64, bracket: (f64, f64)) -> Result<f64> {
    let (lo, hi) = bracket;
    check_gamma(lo.min(hi))?;
    check_gamma(lo.max(hi))?;
    let opts = RootOptions { f_tol: 1e-14 * p_m_target.abs().max(1.0), x_tol: 1e-16, max_iter: 200 };
    secant_bisect(|g| Ok(front_value(sol, g)? - p_m_target), lo, hi, opts)
}

/// Splits `[lo, hi]` into `n` cells and returns the first cell on which
/// `γΨ(γ) − p_m_target` changes sign.
pub fn scan_bracket(sol: &SimilaritySolution, p_m_target: f64, lo: f64, hi: f64, n: usize) -> Result<(f64, f64)> {
    check_gamma(lo)?;
    check_gamma(hi)?;
    let n = n.max(1);
    let g = |x: f64| front_value(sol, x).map(|v| v - p_m_target);
    let mut a = lo;
    let mut ga = g(a)?;
    for i in 1..=n {
        let b = lo + (hi - lo) * i as f64 / n as f64;
        let gb = g(b)?;
        if ga == 0.0 || ga.signum() != gb.signum() {
            return Ok((a, b));
        }
        a = b;
        ga = gb;
    }
    Err(Error::Bracketing { lo, hi, f_lo: g(lo)?, f_hi: g(hi)? })
}

/// Residual reports for the three boundary conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryResiduals {
    pub moving_flux: ResidualReport,
    pub moving_value: ResidualReport,
    pub fixed_flux: ResidualReport,
}

impl BoundaryResiduals {
    pub fn max_abs(&self) -> f64 {
        self.moving_flux.max_abs.max(self.moving_value.max_abs).max(self.fixed_flux.max_abs)
    }

    pub fn reports(&self) -> [&ResidualReport; 3] {
        [&self.moving_flux, &self.moving_value, &self.fixed_flux]
    }
}

/// Per-time defects of conditions (I)–(III) on `u` itself.
pub fn boundary_defects(problem: &StefanProblem, t: f64) -> Result<[f64; 3]> {
    let f = problem.front(t)?;
    let tau = t + problem.a();
    let sol = &problem.sol;
    Ok([
        sol.flux(f.s, t)? - problem.l_m * f.s.powf(problem.i) * f.s_dot,
        sol.eval_u(f.s, t)? - problem.p_m * f.s.powf(problem.j),
        sol.flux(0.0, t)? - problem.h_0 * tau.powf(problem.k),
    ])
}

pub fn boundary_residuals(problem: &StefanProblem, times: &[f64]) -> Result<BoundaryResiduals> {
    let mut acc = [
        ResidualAccumulator::new("u_xx - (lambda/3)(t+a)^-2 u^-3 = L_m S^i S' at x = S(t)", Method::Analytic),
        ResidualAccumulator::new("u = P_m S^j at x = S(t)", Method::Analytic),
        ResidualAccumulator::new("u_xx - (lambda/3)(t+a)^-2 u^-3 = H_0 (t+a)^k at x = 0", Method::Analytic),
    ];
    for &t in times {
        let d = boundary_defects(problem, t)?;
        let f = problem.front(t)?;
        let scales = [
            (problem.l_m * f.s.powf(problem.i) * f.s_dot).abs(),
            (problem.p_m * f.s.powf(problem.j)).abs(),
            0.0,
        ];
        for ((a, r), s) in acc.iter_mut().zip(d).zip(scales) {
            a.push(r, s);
        }
    }
    let [i, ii, iii] = acc;
    Ok(BoundaryResiduals { moving_flux: i.finish(""), moving_value: ii.finish(""), fixed_flux: iii.finish("") })
}
