//! The Ermakov superposition solution of the reduced similarity ODE.
//!
//! With the similarity variable `ξ` and the integration constant fixed to
//! zero, the reduced equation
//!
//! ```text
//! Ψ'' − (ξ/3) Ψ − (λ/3) Ψ⁻³ = 0
//! ```
//!
//! becomes, under `ξ = ε z` with `ε³ = −3/2`, the Ermakov equation
//!
//! ```text
//! Ψ_zz + (z/2) Ψ = k* Ψ⁻³,    k* = ε² λ / 3,
//! ```
//!
//! whose general solution is `Ψ = √(c₁Ω₁² + 2c₂Ω₁Ω₂ + c₃Ω₂²)` for a basis
//! `Ω₁, Ω₂` of `Ω_zz + (z/2)Ω = 0` with Wronskian `W` and
//! `c₁c₃ − c₂² = k*/W²`. The basis used here is `Ω₁ = Ai(σz)`,
//! `Ω₂ = Bi(σz)` with `σ³ = −1/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::rk4_trajectory;
use crate::specialfn::airy_scaled;

/// Real root of `ε³ = −3/2`.
pub fn epsilon() -> f64 {
    -(1.5f64.cbrt())
}

/// Airy argument scale `σ = −2^{-1/3}` (so that `σ³ = −1/2`).
pub fn airy_sigma() -> f64 {
    -(0.5f64.cbrt())
}

/// Wronskian `Ω₁Ω₂' − Ω₁'Ω₂ = σ/π` of the fixed basis.
pub fn basis_wronskian() -> f64 {
    airy_sigma() / PI
}

/// Coefficient multiplying `ξ` in the Airy arguments, `σ/ε = 3^{-1/3}`.
pub fn xi_argument_scale() -> f64 {
    airy_sigma() / epsilon()
}

/// The literal alternative scale `−2^{1/3}/ε`; it does not satisfy the basis
/// ODE and is reported only for comparison.
pub fn literal_alternative_scale() -> f64 {
    -(2f64.cbrt()) / epsilon()
}

/// Constants of one superposition solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmakovParams {
    pub lambda: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub kstar: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub wronskian: f64,
    /// Integration constant of the reduction; always zero on the Airy route.
    pub zeta: f64,
}

/// Basis values `Ω₁, Ω₂` and their z-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBasis {
    pub omega1: f64,
    pub omega2: f64,
    pub d_omega1: f64,
    pub d_omega2: f64,
}

impl OmegaBasis {
    pub fn wronskian(&self) -> f64 {
        self.omega1 * self.d_omega2 - self.d_omega1 * self.omega2
    }
}

/// `Ψ` and its first three derivatives with respect to one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiValues {
    pub psi: f64,
    pub dpsi: f64,
    pub d2psi: f64,
    pub d3psi: f64,
}

/// `(Ω₁(z), Ω₂(z), Ω₁'(z), Ω₂'(z))` with `Ω₁ = Ai(σz)`, `Ω₂ = Bi(σz)`.
pub fn omega_basis(z: f64) -> Result<OmegaBasis> {
    let v = airy_scaled(z, airy_sigma())?;
    Ok(OmegaBasis { omega1: v.ai, omega2: v.bi, d_omega1: v.aip, d_omega2: v.bip })
}

impl ErmakovParams {
    /// Builds a consistent parameter set from `λ > 0`, `c₁ > 0` and `c₂`,
    /// solving the Wronskian constraint for `c₃`.
    pub fn new(lambda: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(lambda.is_finite() && c1.is_finite() && c2.is_finite()) {
            return Err(Error::Domain("ermakov parameters must be finite".into()));
        }
        if lambda <= 0.0 {
            return Err(Error::UnsupportedRegime(format!(
                "lambda = {lambda}: only lambda > 0 (k* > 0, positive-definite quadratic form) is supported"
            )));
        }
        if c1 <= 0.0 {
            return Err(Error::Domain(format!("c1 must be positive, got {c1}")));
        }
        let eps = epsilon();
        let kstar = eps * eps * lambda / 3.0;
        let w = basis_wronskian();
        let c3 = (c2 * c2 + kstar / (w * w)) / c1;
        Ok(ErmakovParams {
            lambda,
            c1,
            c2,
            c3,
            kstar,
            epsilon: eps,
            sigma: airy_sigma(),
            wronskian: w,
            zeta: 0.0,
        })
    }

    /// Assembles parameters without validation. Used to reach the degenerate
    /// `k* = 0` superposition, which `new` rejects.
    #[doc(hidden)]
    pub fn from_raw(lambda: f64, c1: f64, c2: f64, c3: f64) -> Self {
        let eps = epsilon();
        ErmakovParams {
            lambda,
            c1,
            c2,
            c3,
            kstar: eps * eps * lambda / 3.0,
            epsilon: eps,
            sigma: airy_sigma(),
            wronskian: basis_wronskian(),
            zeta: 0.0,
        }
    }

    /// Relative defect of `c₁c₃ − c₂² = k*/W²`.
    pub fn constraint_defect(&self) -> f64 {
        let lhs = self.c1 * self.c3 - self.c2 * self.c2;
        let rhs = self.kstar / (self.wronskian * self.wronskian);
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
    }

    /// `Ψ` and its derivatives with respect to `z`.
    pub fn psi_z(&self, z: f64) -> Result<PsiValues> {
        let b = omega_basis(z)?;
        let (o1, o2, d1, d2) = (b.omega1, b.omega2, b.d_omega1, b.d_omega2);
        let q = self.c1 * o1 * o1 + 2.0 * self.c2 * o1 * o2 + self.c3 * o2 * o2;
        if !(q > 0.0) {
            return Err(Error::InternalInvariant(format!(
                "superposition quadratic form is {q:e} at z = {z}"
            )));
        }
        let dq = 2.0 * (self.c1 * o1 * d1 + self.c2 * (d1 * o2 + o1 * d2) + self.c3 * o2 * d2);
        let dd = self.c1 * d1 * d1 + 2.0 * self.c2 * d1 * d2 + self.c3 * d2 * d2;
        // Ω'' = −(z/2)Ω collapses the higher derivatives of Q onto Q, Q', D.
        let d2q = 2.0 * dd - z * q;
        let d3q = -2.0 * z * dq - q;

        let psi = q.sqrt();
        let psi3 = psi * q;
        let psi5 = psi3 * q;
        Ok(PsiValues {
            psi,
            dpsi: dq / (2.0 * psi),
            d2psi: d2q / (2.0 * psi) - dq * dq / (4.0 * psi3),
            d3psi: d3q / (2.0 * psi) - 3.0 * dq * d2q / (4.0 * psi3) + 3.0 * dq * dq * dq / (8.0 * psi5),
        })
    }

    /// `Ψ(ξ)` and its ξ-derivatives, evaluated through `z = ξ/ε`.
    pub fn psi(&self, xi: f64) -> Result<PsiValues> {
        let e = self.epsilon;
        let v = self.psi_z(xi / e)?;
        Ok(PsiValues {
            psi: v.psi,
            dpsi: v.dpsi / e,
            d2psi: v.d2psi / (e * e),
            d3psi: v.d3psi / (e * e * e),
        })
    }

    /// `Ψ_zz + (z/2)Ψ − k*Ψ⁻³` from the analytic derivatives.
    pub fn ermakov_residual(&self, z: f64) -> Result<f64> {
        let v = self.psi_z(z)?;
        Ok(v.d2psi + 0.5 * z * v.psi - self.kstar / (v.psi * v.psi * v.psi))
    }

    /// `Ψ'' − (ξ/3)Ψ − (λ/3)Ψ⁻³ − ζ` in the similarity variable.
    pub fn reduction_residual(&self, xi: f64) -> Result<f64> {
        let v = self.psi(xi)?;
        Ok(v.d2psi - xi / 3.0 * v.psi - self.lambda / 3.0 / (v.psi * v.psi * v.psi) - self.zeta)
    }
}

/// Outcome of the ODE-integration cross-check of `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Max |Richardson-extrapolated RK4 − Ψ| over the coarse nodes.
    pub max_deviation: f64,
    /// Max deviation of plain RK4 with `n_steps` steps.
    pub rk4_deviation: f64,
    /// Same with `2·n_steps` steps.
    pub rk4_half_step_deviation: f64,
    /// `log2(rk4_deviation / rk4_half_step_deviation)`.
    pub observed_order: f64,
}

/// Integrates the Ermakov equation with RK4 from the data `(Ψ, Ψ')` at `xi0`
/// to `xi1` and compares against the closed-form superposition.
pub fn integrate_oracle(params: &ErmakovParams, xi0: f64, xi1: f64, n_steps: usize) -> Result<OracleReport> {
    if n_steps < 100 {
        return Err(Error::Precondition(format!("integrate_oracle needs n_steps >= 100, got {n_steps}")));
    }
    if xi0 == xi1 {
        return Ok(OracleReport {
            max_deviation: 0.0,
            rk4_deviation: 0.0,
            rk4_half_step_deviation: 0.0,
            observed_order: f64::NAN,
        });
    }
    let eps = params.epsilon;
    let (z0, z1) = (xi0 / eps, xi1 / eps);
    let start = params.psi_z(z0)?;
    let kstar = params.kstar;
    let accel = |z: f64, y: [f64; 2]| -0.5 * z * y[0] + kstar / (y[0] * y[0] * y[0]);

    let coarse = rk4_trajectory(accel, z0, z1, [start.psi, start.dpsi], n_steps)?;
    let fine = rk4_trajectory(accel, z0, z1, [start.psi, start.dpsi], 2 * n_steps)?;

    let h = (z1 - z0) / n_steps as f64;
    let mut max_dev: f64 = 0.0;
    let mut max_coarse: f64 = 0.0;
    for (i, c) in coarse.iter().enumerate() {
        let exact = params.psi_z(z0 + h * i as f64)?.psi;
        let f = fine[2 * i][0];
        let extrapolated = f + (f - c[0]) / 15.0;
        max_dev = max_dev.max((extrapolated - exact).abs());
        max_coarse = max_coarse.max((c[0] - exact).abs());
    }
    let hf = h / 2.0;
    let mut max_fine: f64 = 0.0;
    for (i, f) in fine.iter().enumerate() {
        let exact = params.psi_z(z0 + hf * i as f64)?.psi;
        max_fine = max_fine.max((f[0] - exact).abs());
    }
    Ok(OracleReport {
        max_deviation: max_dev,
        rk4_deviation: max_coarse,
        rk4_half_step_deviation: max_fine,
        observed_order: (max_coarse / max_fine).log2(),
    })
}

/// Observed convergence order of plain RK4 on the Ermakov equation.
///
/// Runs `n_base·2^k` steps for `k = 0..levels`, measures the RMS deviation
/// from the closed form on the `n_base + 1` nodes shared by every level, and
/// returns the least-squares slope of `log(rms)` against `log(h)`.
pub fn convergence_order(params: &ErmakovParams, xi0: f64, xi1: f64, n_base: usize, levels: usize) -> Result<f64> {
    if levels < 2 || n_base < 2 || xi0 == xi1 {
        return Err(Error::Precondition(
            "convergence_order needs two levels, two steps and a non-empty interval".into(),
        ));
    }
    let eps = params.epsilon;
    let (z0, z1) = (xi0 / eps, xi1 / eps);
    let start = params.psi_z(z0)?;
    let kstar = params.kstar;
    let accel = |z: f64, y: [f64; 2]| -0.5 * z * y[0] + kstar / (y[0] * y[0] * y[0]);
    let h = (z1 - z0) / n_base as f64;
    let exact = (0..=n_base)
        .map(|i| params.psi_z(z0 + h * i as f64).map(|v| v.psi))
        .collect::<Result<Vec<_>>>()?;

    let mut pts = Vec::with_capacity(levels);
    for k in 0..levels {
        let stride = 1usize << k;
        let traj = rk4_trajectory(accel, z0, z1, [start.psi, start.dpsi], n_base * stride)?;
        let sq: f64 = exact
            .iter()
            .enumerate()
            .map(|(i, e)| (traj[i * stride][0] - e).powi(2))
            .sum();
        let rms = (sq / exact.len() as f64).sqrt();
        pts.push(((h / stride as f64).abs().ln(), rms.ln()));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ErmakovParams {
        ErmakovParams::new(1.3, 0.8, 0.25).unwrap()
    }

    #[test]
    fn epsilon_cubes_to_minus_three_halves() {
        let e = epsilon();
        assert!((e * e * e + 1.5).abs() < 1e-15);
        let s = airy_sigma();
        assert!((s * s * s + 0.5).abs() < 1e-15);
        assert!((xi_argument_scale() - 3f64.powf(-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn c3_with_zero_c2() {
        let p = ErmakovParams::new(2.0, 1.0, 0.0).unwrap();
        assert!((p.c3 - p.kstar / (p.wronskian * p.wronskian)).abs() < 1e-14 * p.c3);
    }

    #[test]
    fn unit_kstar_gives_pi_squared_c3() {
        let e = epsilon();
        let p = ErmakovParams::new(3.0 / (e * e), 1.0, 0.0).unwrap();
        assert!((p.kstar - 1.0).abs() < 1e-15);
        assert!((p.wronskian + 2f64.powf(-1.0 / 3.0) / PI).abs() < 1e-16);
        // π²·2^{2/3}, 40-digit value.
        assert!((p.c3 - 15.667_020_408_799_22).abs() < 1e-13);
    }

    #[test]
    fn rejects_excluded_regimes() {
        assert!(matches!(ErmakovParams::new(0.0, 1.0, 0.0), Err(Error::UnsupportedRegime(_))));
        assert!(matches!(ErmakovParams::new(-1.0, 1.0, 0.0), Err(Error::UnsupportedRegime(_))));
        assert!(matches!(ErmakovParams::new(1.0, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn constraint_closes_to_rounding() {
        assert!(params().constraint_defect() < 1e-14);
    }

    #[test]
    fn basis_at_origin_and_wronskian() {
        let b = omega_basis(0.0).unwrap();
        let s = airy_sigma();
        assert_eq!(b.omega1, 0.3550280538878172);
        assert_eq!(b.d_omega1, s * -0.2588194037928068);
        for z in [-2.0, 0.0, 3.0] {
            assert!((omega_basis(z).unwrap().wronskian() - s / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_solves_linear_equation() {
        let (z, h) = (1.3, 1e-4);
        let f = |z| omega_basis(z).unwrap().omega1;
        let d2 = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
        assert!((d2 + z / 2.0 * f(z)).abs() < 1e-6);
    }

    #[test]
    fn residuals_vanish() {
        let p = params();
        for i in 0..=60 {
            let z = -3.0 + 0.1 * i as f64;
            assert!(p.ermakov_residual(z).unwrap().abs() < 1e-9);
            assert!(p.reduction_residual(p.epsilon * z).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let p = params();
        let h = 1e-5;
        for xi in [-2.0, -0.4, 0.0, 0.7, 2.5] {
            let v = p.psi(xi).unwrap();
            let at = |x: f64| p.psi(x).unwrap();
            let d1 = (at(xi + h).psi - at(xi - h).psi) / (2.0 * h);
            let d2 = (at(xi + h).dpsi - at(xi - h).dpsi) / (2.0 * h);
            let d3 = (at(xi + h).d2psi - at(xi - h).d2psi) / (2.0 * h);
            assert!((d1 - v.dpsi).abs() < 1e-6);
            assert!((d2 - v.d2psi).abs() < 1e-6);
            assert!((d3 - v.d3psi).abs() < 1e-6);
        }
    }

    #[test]
    fn third_derivative_agrees_with_differentiated_reduction() {
        // Differentiating Ψ'' = (ξ/3)Ψ + (λ/3)Ψ⁻³ gives Ψ''' = (Ψ + ξΨ')/3 − λΨ⁻⁴Ψ'.
        let p = params();
        for xi in [-1.5, 0.0, 0.9, 2.0] {
            let v = p.psi(xi).unwrap();
            let expect = (v.psi + xi * v.dpsi) / 3.0 - p.lambda * v.dpsi / v.psi.powi(4);
            assert!((v.d3psi - expect).abs() < 1e-11);
        }
    }

    #[test]
    fn degenerate_kstar_zero_is_linear() {
        // c2² = c1 c3 makes Ψ = |√c1 Ω₁ + √c3 Ω₂|, a solution of the linear equation.
        let p = ErmakovParams::from_raw(0.0, 1.0, 0.5, 0.25);
        for z in [-1.0, 0.0, 1.0, 2.0] {
            let v = p.psi_z(z).unwrap();
            let b = omega_basis(z).unwrap();
            assert!((v.psi - (b.omega1 + 0.5 * b.omega2).abs()).abs() < 1e-14);
            assert!((v.d2psi + 0.5 * z * v.psi).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_preconditions() {
        let p = params();
        assert!(matches!(integrate_oracle(&p, 0.0, 1.0, 50), Err(Error::Precondition(_))));
        assert_eq!(integrate_oracle(&p, 0.5, 0.5, 100).unwrap().max_deviation, 0.0);
    }

    #[test]
    fn oracle_converges_at_fourth_order() {
        let p = params();
        let r = integrate_oracle(&p, 0.0, 1.0, 10_000).unwrap();
        assert!(r.max_deviation < 1e-8, "{r:?}");
        let order = convergence_order(&p, -3.0, 3.0, 400, 4).unwrap();
        assert!(order > 3.8 && order < 5.2, "order = {order}");
    }
}
