//! Reciprocal transformation of the Stefan problem.
//!
//! ```text
//! dx* = u dx + [−u_xx + (λ/3) u⁻³ (t+a)⁻²] dt,   t* = t,   u* = 1/u
//! ```
//!
//! The one-form is closed because the equation is a conservation law, so
//! `x*` is well defined up to a constant. The gauge fixes `x*(0, 0) = 0`. Under
//! the map the solution satisfies
//!
//! ```text
//! u*_{t*} = ∂_{x*}[ ∂_{x*}( (1/u*) ∂_{x*}(1/u*) ) − (λ/3) u*⁴ (t*+a)⁻² ]
//! ```
//!
//! and the moving front `x = S(t)` maps to
//! `S*(t*) = (γ/3)[Ψ(γ) − L_m/γ] ln(t*+a) + const`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, PANEL_ORDER};
use crate::report::{GridSpec, Method, ResidualAccumulator, ResidualReport};
use crate::roots::{newton_bisect_from, RootOptions};
use crate::stefan::StefanProblem;

pub const MIN_QUAD_NODES: usize = PANEL_ORDER;

/// Default node count for `x*` quadratures.
pub const DEFAULT_QUAD_NODES: usize = 64;

/// Relative slack allowed when a point sits on the front up to roundoff.
const FRONT_SLACK: f64 = 1e-12;

fn check_nodes(n_quad: usize) -> Result<()> {
    if n_quad < MIN_QUAD_NODES {
        return Err(Error::Precondition(format!("n_quad must be >= {MIN_QUAD_NODES}, got {n_quad}")));
    }
    Ok(())
}

fn check_in_domain(problem: &StefanProblem, x: f64, t: f64) -> Result<()> {
    let s = problem.front(t)?.s;
    if !(x >= 0.0) || x > s * (1.0 + FRONT_SLACK) {
        return Err(Error::Domain(format!("x = {x} outside [0, S(t)] = [0, {s}] at t = {t}")));
    }
    Ok(())
}

/// Nodes for a sub-interval of `[0, S(t)]` of length `len`, keeping the panel
/// density of `n_quad` nodes over the whole slice.
fn nodes_for(len: f64, s: f64, n_quad: usize) -> usize {
    let panels = (n_quad / PANEL_ORDER).max(1) as f64 * (len / s);
    PANEL_ORDER * (panels.ceil() as usize).max(1)
}

/// `x*(x, t) = ∫₀ˣ u(x′, t) dx′`; the origin's image is pinned to zero.
pub fn x_star(problem: &StefanProblem, x: f64, t: f64, n_quad: usize) -> Result<f64> {
    check_nodes(n_quad)?;
    check_in_domain(problem, x, t)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    integrate(|xp| problem.sol.eval_u(xp, t), 0.0, x, n_quad)
}

/// `∫_{t0}^{t1} [−u_xx + (λ/3)u⁻³(t+a)⁻²](x, t) dt`, the time leg of the one-form.
pub fn dt_leg(problem: &StefanProblem, x: f64, t0: f64, t1: f64, n_quad: usize) -> Result<f64> {
    check_nodes(n_quad)?;
    check_in_domain(problem, x, t0.min(t1))?;
    integrate(|t| Ok(-problem.sol.flux(x, t)?), t0, t1, n_quad)
}

/// `x*(x1, t1) − x*(0, t0)` along two rectangular paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCheck {
    pub x_first: f64,
    pub t_first: f64,
    pub discrepancy: f64,
}

pub fn path_independence(problem: &StefanProblem, x1: f64, t0: f64, t1: f64, n_quad: usize) -> Result<PathCheck> {
    let x_first = x_star(problem, x1, t0, n_quad)? + dt_leg(problem, x1, t0, t1, n_quad)?;
    let t_first = dt_leg(problem, 0.0, t0, t1, n_quad)? + x_star(problem, x1, t1, n_quad)?;
    Ok(PathCheck { x_first, t_first, discrepancy: (x_first - t_first).abs() })
}

/// Motion of the left image boundary, `x*(0, t1) − x*(0, t0)`.
pub fn origin_drift(problem: &StefanProblem, t0: f64, t1: f64, n_quad: usize) -> Result<f64> {
    dt_leg(problem, 0.0, t0, t1, n_quad)
}

/// `(γ/3)[Ψ(γ) − L_m/γ]`, the coefficient of `ln(t*+a)` in `S*`.
pub fn s_star_coefficient(problem: &StefanProblem) -> Result<f64> {
    let psi = problem.sol.params.psi(problem.gamma)?.psi;
    Ok(problem.gamma / 3.0 * (psi - problem.l_m / problem.gamma))
}

/// Image of the front by direct quadrature, `x*(S(t), t)`.
pub fn front_image_quadrature(problem: &StefanProblem, t: f64, n_quad: usize) -> Result<f64> {
    x_star(problem, problem.front(t)?.s, t, n_quad)
}

/// Image of the front transported along `x = S(t)`:
/// `x*(S₀, 0) + ∫₀ᵗ [u Ṡ − u_xx + (λ/3)u⁻³(t+a)⁻²](S(t′), t′) dt′`.
pub fn front_image_transport(problem: &StefanProblem, t: f64, n_quad: usize) -> Result<f64> {
    let start = front_image_quadrature(problem, 0.0, n_quad)?;
    let drift = integrate(
        |tp| {
            let f = problem.front(tp)?;
            Ok(problem.sol.eval_u(f.s, tp)? * f.s_dot - problem.sol.flux(f.s, tp)?)
        },
        0.0,
        t,
        n_quad,
    )?;
    Ok(start + drift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSample {
    pub x: f64,
    pub t: f64,
    pub x_star: f64,
    pub u_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReciprocalImage {
    pub problem: StefanProblem,
    pub x_star_origin: f64,
    #[serde(skip)]
    pub samples: Vec<ImageSample>,
    pub s_star_coeff: f64,
    pub s_star_const: f64,
}

impl ReciprocalImage {
    /// Samples the image on a physical grid inside `0 ≤ x ≤ S(t)`.
    pub fn build(problem: &StefanProblem, grid: &GridSpec, n_quad: usize) -> Result<Self> {
        check_nodes(n_quad)?;
        problem.check_grid(grid)?;
        let mut samples = Vec::with_capacity(grid.nx * grid.nt);
        for (x, t) in grid.points() {
            samples.push(ImageSample { x, t, x_star: x_star(problem, x, t, n_quad)?, u_star: 1.0 / problem.sol.eval_u(x, t)? });
        }
        let s_star_coeff = s_star_coefficient(problem)?;
        let s_star_const = front_image_quadrature(problem, 0.0, n_quad)? - s_star_coeff * problem.a().ln();
        Ok(ReciprocalImage { problem: *problem, x_star_origin: 0.0, samples, s_star_coeff, s_star_const })
    }

    /// `S*(t*) = coeff·ln(t*+a) + const`.
    pub fn s_star(&self, t_star: f64) -> Result<f64> {
        if !(t_star >= 0.0) {
            return Err(Error::Domain(format!("t* must be >= 0, got {t_star}")));
        }
        Ok(self.s_star_coeff * (t_star + self.problem.a()).ln() + self.s_star_const)
    }

    /// `S*(0) = coeff·ln a + const`.
    pub fn s_star_initial(&self) -> f64 {
        self.s_star_coeff * self.problem.a().ln() + self.s_star_const
    }
}

/// Solves `x*(x, t) = target` for each increasing target on one time slice,
/// marching from the origin so each step integrates only a short segment.
pub fn invert_slice(problem: &StefanProblem, t: f64, targets: &[f64], n_quad: usize) -> Result<Vec<f64>> {
    check_nodes(n_quad)?;
    let s = problem.front(t)?.s;
    let u = |x: f64| problem.sol.eval_u(x, t);
    let segment = |a: f64, b: f64| integrate(&u, a, b, nodes_for((b - a).abs(), s, n_quad));
    let opts = RootOptions { f_tol: 0.0, x_tol: 1e-16, max_iter: 100 };

    let (mut x_prev, mut xs_prev) = (0.0, 0.0);
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        if target < xs_prev {
            return Err(Error::Precondition("inversion targets must be increasing and >= 0".into()));
        }
        if target == xs_prev {
            out.push(x_prev);
            continue;
        }
        let gap = target - xs_prev;
        let guess = x_prev + gap / u(x_prev)?;
        let mut hi = (x_prev + 2.0 * (guess - x_prev)).min(s);
        while segment(x_prev, hi)? < gap {
            if hi >= s {
                return Err(Error::Domain(format!("x* = {target} lies beyond the image of the front at t = {t}")));
            }
            hi = (x_prev + 2.0 * (hi - x_prev)).min(s);
        }
        let x = newton_bisect_from(|x| Ok((segment(x_prev, x)? - gap, u(x)?)), x_prev, hi, guess, opts)
            .map_err(|e| Error::InternalInvariant(format!("monotone inversion failed at x* = {target}, t = {t}: {e}")))?;
        out.push(x);
        xs_prev += segment(x_prev, x)?;
        x_prev = x;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatibilityOptions {
    /// Added to λ in the flux only; nonzero values exercise the sensitivity check.
    pub lambda_shift: f64,
}

impl Default for CompatibilityOptions {
    fn default() -> Self {
        CompatibilityOptions { lambda_shift: 0.0 }
    }
}

/// `u*` tabulated on an `(x*, t*)` lattice whose steps are the grid spacings,
/// padded by the stencil half-widths (two nodes in `x*`, one in `t*`).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageLattice {
    pub grid: GridSpec,
    a: f64,
    lambda: f64,
    ts: Vec<f64>,
    u_star: Vec<Vec<f64>>,
}

impl ImageLattice {
    pub fn tabulate(problem: &StefanProblem, grid: &GridSpec, n_quad: usize) -> Result<Self> {
        check_nodes(n_quad)?;
        grid.validate()?;
        if grid.nx < 2 || grid.nt < 2 {
            return Err(Error::Precondition("compatibility lattice needs at least 2 nodes per axis".into()));
        }
        let (h, k) = (grid.dx(), grid.dt());
        let xs: Vec<f64> = (-2..grid.nx as i64 + 2).map(|i| grid.x0 + i as f64 * h).collect();
        let ts: Vec<f64> = (-1..grid.nt as i64 + 1).map(|j| grid.t0 + j as f64 * k).collect();
        if xs[0] <= 0.0 || ts[0] < 0.0 {
            return Err(Error::Domain("lattice stencil leaves the image domain at x* = 0 or t* = 0".into()));
        }
        let edge = front_image_quadrature(problem, ts[0], n_quad)?.min(front_image_quadrature(problem, ts[ts.len() - 1], n_quad)?);
        if xs[xs.len() - 1] >= edge {
            return Err(Error::Domain(format!("lattice stencil reaches x* = {} beyond the image front {edge}", xs[xs.len() - 1])));
        }

        let mut u_star = Vec::with_capacity(ts.len());
        for &t in &ts {
            let row = invert_slice(problem, t, &xs, n_quad)?;
            u_star.push(row.iter().map(|&x| problem.sol.eval_u(x, t).map(|u| 1.0 / u)).collect::<Result<Vec<_>>>()?);
        }
        Ok(ImageLattice { grid: *grid, a: problem.a(), lambda: problem.sol.lambda(), ts, u_star })
    }

    /// `u*` at grid node `(i, j)`.
    pub fn u_star(&self, i: usize, j: usize) -> f64 {
        self.u_star[j + 1][i + 2]
    }

    /// Finite-difference residual of the image equation at the grid nodes.
    pub fn residual(&self, opts: CompatibilityOptions) -> ResidualReport {
        let (h, k) = (self.grid.dx(), self.grid.dt());
        let lambda = self.lambda + opts.lambda_shift;
        let mut acc =
            ResidualAccumulator::new("u*_t* = d/dx*[ d/dx*((1/u*) d/dx*(1/u*)) - (lambda/3) u*^4 (t*+a)^-2 ]", Method::FiniteDifference);
        for j in 1..=self.grid.nt {
            let tau = self.ts[j] + self.a;
            let row = &self.u_star[j];
            let w2 = |i: usize| 1.0 / (row[i] * row[i]);
            let q = |i: usize| row[i].powi(4);
            for i in 2..self.grid.nx + 2 {
                let ut = (self.u_star[j + 1][i] - self.u_star[j - 1][i]) / (2.0 * k);
                let third = 0.5 * (-w2(i - 2) + 2.0 * w2(i - 1) - 2.0 * w2(i + 1) + w2(i + 2)) / (2.0 * h * h * h);
                let sink = lambda / 3.0 / (tau * tau) * (q(i + 1) - q(i - 1)) / (2.0 * h);
                acc.push(ut - third + sink, ut.abs() + third.abs() + sink.abs());
            }
        }
        acc.finish(format!("lattice steps dx* = {h}, dt* = {k}"))
    }
}

/// Finite-difference residual of the image equation on an `(x*, t*)` lattice
/// whose steps are the grid spacings.
pub fn compatibility_residual(problem: &StefanProblem, grid: &GridSpec, n_quad: usize) -> Result<ResidualReport> {
    compatibility_residual_with(problem, grid, n_quad, CompatibilityOptions::default())
}

pub fn compatibility_residual_with(
    problem: &StefanProblem,
    grid: &GridSpec,
    n_quad: usize,
    opts: CompatibilityOptions,
) -> Result<ResidualReport> {
    Ok(ImageLattice::tabulate(problem, grid, n_quad)?.residual(opts))
}
