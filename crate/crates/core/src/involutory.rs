//! Involutory temporal modulations
//!
//! ```text
//! T*:  dt* = ρ⁻²(t) dt,   x* = x,   u* = ρ⁻¹(t) u,   ρ* = ρ⁻¹
//! ```
//!
//! with `t*(0) = 0`. The dual modulation is expressed in the image time,
//! `ρ*(t*) = 1/ρ(t(t*))`, so applying `T*` with `ρ` and then with `ρ*`
//! returns `(t, u)` unchanged.
//!
//! Pushing a solution of `u_t + u_xxx + λ(t+a)⁻²u⁻⁴u_x = 0` forward gives,
//! by the chain rule `u = ρu*`, `∂_t = ρ⁻²∂_{t*}`,
//!
//! ```text
//! u*_{t*} + ρ² u*_xxx + λ(t+a)⁻² ρ⁻² u*⁻⁴ u*_x + ρρ′ u* = 0.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::report::{GridSpec, Method, ResidualAccumulator, ResidualReport};
use crate::roots::{newton_bisect_from, RootOptions};
use crate::similarity::SimilaritySolution;

/// Panels of the precomputed `t*` table for the closed-form families.
pub const TABLE_PANELS: usize = 64;

/// Default finite-difference step of [`modulated_residual`].
pub const DEFAULT_FD_STEP: f64 = 1e-3;

const RANGE_SLACK: f64 = 1e-12;

/// Named families of positive modulation functions `ρ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum RhoFamily {
    Constant { value: f64 },
    /// `ρ = (t+a)^exponent`.
    Power { exponent: f64, a: f64 },
    /// Cubic Hermite interpolation of `(t, ρ)` samples with central-difference
    /// node slopes.
    Tabulated { t: Vec<f64>, rho: Vec<f64> },
}

impl RhoFamily {
    fn validate(&self) -> Result<()> {
        match self {
            RhoFamily::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                Err(Error::Domain(format!("constant rho must be positive, got {value}")))
            }
            RhoFamily::Power { exponent, a } if !(*a > 0.0 && a.is_finite() && exponent.is_finite()) => {
                Err(Error::Domain(format!("power rho needs a > 0 and a finite exponent, got a = {a}, p = {exponent}")))
            }
            RhoFamily::Tabulated { t, rho } => {
                if t.len() < 2 || t.len() != rho.len() {
                    return Err(Error::Domain("tabulated rho needs at least two (t, rho) pairs of equal length".into()));
                }
                if t[0] != 0.0 || t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Domain("tabulated rho times must start at 0 and increase strictly".into()));
                }
                if rho.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::Domain("tabulated rho values must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        match self {
            RhoFamily::Constant { value } => (*value, 0.0),
            RhoFamily::Power { exponent, a } => {
                let r = (t + a).powf(*exponent);
                (r, exponent * r / (t + a))
            }
            RhoFamily::Tabulated { t: ts, rho } => hermite(ts, rho, t),
        }
    }
}

fn node_slope(ts: &[f64], ys: &[f64], i: usize) -> f64 {
    let n = ts.len();
    let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
    (ys[r] - ys[l]) / (ts[r] - ts[l])
}

fn hermite(ts: &[f64], ys: &[f64], t: f64) -> (f64, f64) {
    let i = match ts.partition_point(|&v| v <= t) {
        0 => 0,
        k => (k - 1).min(ts.len() - 2),
    };
    let h = ts[i + 1] - ts[i];
    let s = (t - ts[i]) / h;
    let (m0, m1) = (node_slope(ts, ys, i) * h, node_slope(ts, ys, i + 1) * h);
    let (y0, y1) = (ys[i], ys[i + 1]);
    let s2 = s * s;
    let s3 = s2 * s;
    let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * m1;
    let slope = (6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * y1 + (3.0 * s2 - 2.0 * s) * m1;
    (value, slope / h)
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Family(RhoFamily),
    Dual(Box<Modulation>),
}

/// A modulation on the working interval `[0, t_max]` with its precomputed
/// monotone map `t ↦ t*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulation {
    source: Source,
    t_max: f64,
    knots: Vec<f64>,
    t_star_knots: Vec<f64>,
}

impl Modulation {
    pub fn new(family: RhoFamily, t_max: f64) -> Result<Self> {
        family.validate()?;
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::Domain(format!("modulation interval end must be positive, got {t_max}")));
        }
        let knots = match &family {
            RhoFamily::Tabulated { t, .. } => {
                let last = *t.last().expect("validated");
                if t_max > last {
                    return Err(Error::Domain(format!("t_max = {t_max} exceeds the rho table end {last}")));
                }
                let per_cell = TABLE_PANELS.div_ceil(t.len() - 1);
                let mut k: Vec<f64> = t
                    .windows(2)
                    .flat_map(|w| (0..per_cell).map(move |m| w[0] + (w[1] - w[0]) * m as f64 / per_cell as f64))
                    .filter(|&v| v < t_max)
                    .collect();
                k.push(t_max);
                k
            }
            _ => uniform_knots(t_max),
        };
        Self::with_knots(Source::Family(family), t_max, knots)
    }

    fn with_knots(source: Source, t_max: f64, knots: Vec<f64>) -> Result<Self> {
        let mut m = Modulation { source, t_max, knots, t_star_knots: Vec::new() };
        let table = if let Some(RhoFamily::Constant { value }) = m.family() {
            m.knots.iter().map(|k| k / (value * value)).collect()
        } else {
            let mut acc = 0.0;
            let mut table = vec![0.0];
            for w in m.knots.windows(2) {
                acc += m.integrate_weight(w[0], w[1])?;
                table.push(acc);
            }
            table
        };
        if table.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InternalInvariant("t* table is not strictly increasing".into()));
        }
        m.t_star_knots = table;
        Ok(m)
    }

    pub fn constant(value: f64, t_max: f64) -> Result<Self> {
        Self::new(RhoFamily::Constant { value }, t_max)
    }

    pub fn power(exponent: f64, a: f64, t_max: f64) -> Result<Self> {
        Self::new(RhoFamily::Power { exponent, a }, t_max)
    }

    /// The modulation `ρ*(s) = 1/ρ(t(s))` on `s ∈ [0, t*(t_max)]`.
    pub fn dual(&self) -> Result<Self> {
        if let Some(RhoFamily::Constant { value }) = self.family() {
            return Self::constant(1.0 / value, self.t_star_max());
        }
        let s_max = self.t_star_max();
        Self::with_knots(Source::Dual(Box::new(self.clone())), s_max, uniform_knots(s_max))
    }

    pub fn family(&self) -> Option<&RhoFamily> {
        match &self.source {
            Source::Family(f) => Some(f),
            Source::Dual(_) => None,
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn t_star_max(&self) -> f64 {
        *self.t_star_knots.last().expect("table has the origin")
    }

    fn check_t(&self, t: f64) -> Result<f64> {
        let slack = RANGE_SLACK * (1.0 + self.t_max);
        if !(t >= -slack && t <= self.t_max + slack) {
            return Err(Error::Domain(format!("t = {t} outside the modulation interval [0, {}]", self.t_max)));
        }
        Ok(t.clamp(0.0, self.t_max))
    }

    /// `(ρ(t), ρ′(t))`.
    pub fn rho_and_slope(&self, t: f64) -> Result<(f64, f64)> {
        let t = self.check_t(t)?;
        Ok(match &self.source {
            Source::Family(f) => f.eval(t),
            Source::Dual(inner) => {
                let tt = inner.t_of_t_star(t)?;
                let (r, dr) = inner.rho_and_slope(tt)?;
                (1.0 / r, -dr)
            }
        })
    }

    pub fn rho(&self, t: f64) -> Result<f64> {
        Ok(self.rho_and_slope(t)?.0)
    }

    fn weight(&self, t: f64) -> Result<f64> {
        let r = self.rho(t)?;
        Ok(1.0 / (r * r))
    }

    fn integrate_weight(&self, a: f64, b: f64) -> Result<f64> {
        GaussLegendre::panel_rule().integrate(|t| self.weight(t), a, b, 1)
    }

    fn knot_index(&self, t: f64) -> usize {
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            k => (k - 1).min(self.knots.len() - 2),
        }
    }

    /// `t*(t) = ∫₀ᵗ ρ⁻²`.
    pub fn t_star_of_t(&self, t: f64) -> Result<f64> {
        let t = self.check_t(t)?;
        if let Some(RhoFamily::Constant { value }) = self.family() {
            return Ok(t / (value * value));
        }
        let i = self.knot_index(t);
        Ok(self.t_star_knots[i] + self.integrate_weight(self.knots[i], t)?)
    }

    /// Inverse of [`Modulation::t_star_of_t`].
    pub fn t_of_t_star(&self, t_star: f64) -> Result<f64> {
        let s_max = self.t_star_max();
        let slack = RANGE_SLACK * (1.0 + s_max);
        if !(t_star >= -slack && t_star <= s_max + slack) {
            return Err(Error::Domain(format!("t* = {t_star} outside the image interval [0, {s_max}]")));
        }
        let t_star = t_star.clamp(0.0, s_max);
        if let Some(RhoFamily::Constant { value }) = self.family() {
            return Ok((t_star * value * value).min(self.t_max));
        }
        let i = match self.t_star_knots.partition_point(|&k| k <= t_star) {
            0 => 0,
            k => (k - 1).min(self.knots.len() - 2),
        };
        let (lo, hi) = (self.knots[i], self.knots[i + 1]);
        let base = self.t_star_knots[i];
        let gap = t_star - base;
        if gap <= 0.0 {
            return Ok(lo);
        }
        if gap >= self.integrate_weight(lo, hi)? {
            return Ok(hi);
        }
        let guess = lo + gap / self.weight(lo)?;
        let opts = RootOptions { f_tol: 0.0, x_tol: 1e-16, max_iter: 100 };
        newton_bisect_from(|t| Ok((self.integrate_weight(lo, t)? - gap, self.weight(t)?)), lo, hi, guess, opts)
            .map_err(|e| Error::InternalInvariant(format!("t* inversion failed at {t_star}: {e}")))
    }

    /// Closed-form `t*(t)` where one exists.
    pub fn closed_form_t_star(&self, t: f64) -> Option<f64> {
        match self.family()? {
            RhoFamily::Constant { value } => Some(t / (value * value)),
            RhoFamily::Power { exponent, a } => {
                let q = 1.0 - 2.0 * exponent;
                if q == 0.0 {
                    Some(((t + a) / a).ln())
                } else {
                    Some(((t + a).powf(q) - a.powf(q)) / q)
                }
            }
            RhoFamily::Tabulated { .. } => None,
        }
    }
}

fn uniform_knots(t_max: f64) -> Vec<f64> {
    (0..=TABLE_PANELS).map(|i| t_max * i as f64 / TABLE_PANELS as f64).collect()
}

/// `u*(x, t*) = u(x, t)/ρ(t)` with `t = t(t*)`.
pub fn push_forward<F>(u: F, modulation: &Modulation, x: f64, t_star: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let t = modulation.t_of_t_star(t_star)?;
    Ok(u(x, t)? / modulation.rho(t)?)
}

/// Largest discrepancies after applying `T*` with `ρ` and then with `ρ*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub t_error: f64,
    pub u_error: f64,
    pub rho_error: f64,
    pub n_points: usize,
}

impl InvolutionReport {
    pub fn max_error(&self) -> f64 {
        self.t_error.max(self.u_error).max(self.rho_error)
    }
}

/// Round trip `T**` over the `(x, t)` grid for the field `u`.
pub fn involution_check<F>(modulation: &Modulation, grid: &GridSpec, u: F) -> Result<InvolutionReport>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    grid.validate()?;
    let dual = modulation.dual()?;
    let mut rep = InvolutionReport { t_error: 0.0, u_error: 0.0, rho_error: 0.0, n_points: 0 };
    for (x, t) in grid.points() {
        let u0 = u(x, t)?;
        let t_star = modulation.t_star_of_t(t)?;
        let u_star = u0 / modulation.rho(t)?;
        let rho_star = dual.rho(t_star)?;
        let t_back = dual.t_star_of_t(t_star)?;
        let u_back = u_star / rho_star;
        rep.t_error = rep.t_error.max((t_back - t).abs());
        rep.u_error = rep.u_error.max((u_back - u0).abs());
        rep.rho_error = rep.rho_error.max((rho_star * modulation.rho(t)? - 1.0).abs());
        rep.n_points += 1;
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatedOptions {
    pub fd_step: f64,
    /// Whether the `ρρ′u*` term is kept; dropping it is the ablation check.
    pub include_rho_term: bool,
}

impl Default for ModulatedOptions {
    fn default() -> Self {
        ModulatedOptions { fd_step: DEFAULT_FD_STEP, include_rho_term: true }
    }
}

pub fn modulated_residual(sol: &SimilaritySolution, modulation: &Modulation, grid: &GridSpec) -> Result<ResidualReport> {
    modulated_residual_with(sol, modulation, grid, ModulatedOptions::default())
}

/// Finite-difference residual of the modulated equation on an `(x, t*)` grid.
pub fn modulated_residual_with(
    sol: &SimilaritySolution,
    modulation: &Modulation,
    grid: &GridSpec,
    opts: ModulatedOptions,
) -> Result<ResidualReport> {
    grid.validate()?;
    let h = opts.fd_step;
    if !(h > 0.0) {
        return Err(Error::Precondition(format!("finite-difference step must be positive, got {h}")));
    }
    if grid.t0 - h < 0.0 || grid.t1 + h > modulation.t_star_max() {
        return Err(Error::Domain(format!(
            "t* stencil [{}, {}] leaves the image interval [0, {}]",
            grid.t0 - h,
            grid.t1 + h,
            modulation.t_star_max()
        )));
    }
    let lambda = sol.lambda();
    let name = if opts.include_rho_term {
        "u*_t* + rho^2 u*_xxx + lambda (t+a)^-2 rho^-2 u*^-4 u*_x + rho rho' u* = 0"
    } else {
        "u*_t* + rho^2 u*_xxx + lambda (t+a)^-2 rho^-2 u*^-4 u*_x = 0 (rho rho' u* dropped)"
    };
    let mut acc = ResidualAccumulator::new(name, Method::FiniteDifference);
    for (x, ts) in grid.points() {
        let t = modulation.t_of_t_star(ts)?;
        let (rho, drho) = modulation.rho_and_slope(t)?;
        let tau = t + sol.a;
        let at = |xx: f64| Ok::<f64, Error>(sol.eval_u(xx, t)? / rho);
        let (um2, um1, u0, up1, up2) = (at(x - 2.0 * h)?, at(x - h)?, at(x)?, at(x + h)?, at(x + 2.0 * h)?);
        let u_x = (up1 - um1) / (2.0 * h);
        let u_xxx = (up2 - 2.0 * up1 + 2.0 * um1 - um2) / (2.0 * h * h * h);
        let u_t = (push_forward(|x, t| sol.eval_u(x, t), modulation, x, ts + h)?
            - push_forward(|x, t| sol.eval_u(x, t), modulation, x, ts - h)?)
            / (2.0 * h);
        let dispersion = rho * rho * u_xxx;
        let nonlinear = lambda / (tau * tau) / (rho * rho) * u_x / u0.powi(4);
        let damping = if opts.include_rho_term { rho * drho * u0 } else { 0.0 };
        acc.push(u_t + dispersion + nonlinear + damping, u_t.abs() + dispersion.abs() + nonlinear.abs() + (rho * drho * u0).abs());
    }
    Ok(acc.finish(format!("step = {h}")))
}
