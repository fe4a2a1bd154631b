use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use ermakov_core::ermakov::{airy_sigma, epsilon, literal_alternative_scale, xi_argument_scale, ErmakovParams};
use ermakov_core::involutory::{involution_check, InvolutionReport, ModulatedOptions, Modulation, RhoFamily};
use ermakov_core::reciprocal::{
    compatibility_residual, front_image_quadrature, front_image_transport, origin_drift, path_independence, PathCheck,
    ReciprocalImage,
};
use ermakov_core::report::{GridSpec, ResidualReport};
use ermakov_core::similarity::{analytic_defect, pde_residual_with, ResidualOptions, SimilaritySolution};
use ermakov_core::specialfn::airy;
use ermakov_core::stefan::{boundary_residuals, front_value, inverse_solve, scan_bracket, BoundaryResiduals, StefanProblem};
use serde::Serialize;

use crate::config::{Emit, FrontSpec, LatticeConfig, RunConfig, Tolerances};
use crate::error::CliError;
use crate::output::{csv_string, read_csv, write_csv, write_json};
use crate::svg::{heatmap, line_plot, Series};

/// One named pass/fail comparison of a measured maximum against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub identity: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn below(&mut self, identity: impl Into<String>, value: f64, tolerance: f64) {
        let passed = value.abs() < tolerance;
        self.0.push(Check { identity: identity.into(), value, tolerance, passed });
    }

    fn at_least(&mut self, identity: impl Into<String>, value: f64, bound: f64) {
        self.0.push(Check { identity: identity.into(), value, tolerance: bound, passed: value >= bound });
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|c| c.passed)
    }

    fn into_result(self) -> Result<(), CliError> {
        let failed: Vec<String> = self
            .0
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} = {:e} (tolerance {:e})", c.identity, c.value, c.tolerance))
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Breach(failed))
        }
    }
}

pub fn cmd_airy(zs: &[f64]) -> Result<String, CliError> {
    let mut rows = Vec::with_capacity(zs.len());
    for &z in zs {
        let v = airy(z)?;
        rows.push(vec![z, v.ai, v.aip, v.bi, v.bip, v.wronskian() - std::f64::consts::FRAC_1_PI]);
    }
    Ok(csv_string(&["z", "ai", "aip", "bi", "bip", "wronskian_defect"], rows))
}

/// How `γ` was obtained when the front was given through `P_m`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseInfo {
    #[serde(rename = "P_m_target")]
    pub p_m_target: f64,
    pub gamma: f64,
    pub bracket: (f64, f64),
    pub defect: f64,
}

fn solution(cfg: &RunConfig) -> Result<SimilaritySolution, CliError> {
    Ok(SimilaritySolution::new(ErmakovParams::new(cfg.lambda, cfg.c1, cfg.c2)?, cfg.a)?)
}

fn resolve_problem(cfg: &RunConfig) -> Result<(StefanProblem, Option<InverseInfo>), CliError> {
    let sol = solution(cfg)?;
    match cfg.front {
        FrontSpec::Gamma(g) => Ok((StefanProblem::forward_solve(&sol, g)?, None)),
        FrontSpec::Pm(p) => {
            let s = cfg.gamma_search;
            let bracket = scan_bracket(&sol, p, s.lo, s.hi, s.cells)?;
            let gamma = inverse_solve(&sol, p, bracket)?;
            let defect = front_value(&sol, gamma)? - p;
            Ok((StefanProblem::forward_solve(&sol, gamma)?, Some(InverseInfo { p_m_target: p, gamma, bracket, defect })))
        }
    }
}

#[derive(Serialize)]
struct AiryArgument {
    /// `ξ ↦ σz` with `z = ξ/ε` gives the Airy argument `ξ·3^{-1/3}`.
    xi_scale: f64,
    /// The alternative scale `−2^{1/3}/ε`, recorded for comparison only.
    literal_alternative_scale: f64,
    sigma: f64,
    epsilon: f64,
}

#[derive(Serialize)]
struct ProblemDoc<'a> {
    problem: &'a StefanProblem,
    front_input: FrontSpec,
    inverse: Option<InverseInfo>,
    airy_argument: AiryArgument,
}

fn problem_doc(problem: &StefanProblem, front_input: FrontSpec, inverse: Option<InverseInfo>) -> ProblemDoc<'_> {
    ProblemDoc {
        problem,
        front_input,
        inverse,
        airy_argument: AiryArgument {
            xi_scale: xi_argument_scale(),
            literal_alternative_scale: literal_alternative_scale(),
            sigma: airy_sigma(),
            epsilon: epsilon(),
        },
    }
}

#[derive(Serialize)]
struct ResidualsDoc<'a> {
    pde_analytic: &'a ResidualReport,
    pde_finite_difference: &'a ResidualReport,
    boundary: &'a BoundaryResiduals,
    tolerances: &'a Tolerances,
    checks: Vec<Check>,
    passed: bool,
}

fn prepare_output(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(&cfg.output_dir)
}

/// Up to `k` evenly spread distinct values of a sorted list.
fn pick<T: Copy>(values: &[T], k: usize) -> Vec<T> {
    if values.len() <= k {
        return values.to_vec();
    }
    (0..k).map(|i| values[i * (values.len() - 1) / (k - 1)]).collect()
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let (problem, inverse) = resolve_problem(cfg)?;
    problem.check_grid(&cfg.grid)?;
    let sol = problem.sol;
    let pde = pde_residual_with(&sol, &cfg.grid, ResidualOptions { fd_step: cfg.fd_step, lambda_scale: 1.0 })?;
    let boundary = boundary_residuals(&problem, &cfg.grid.ts())?;

    let tol = &cfg.tolerances;
    let mut checks = Checks::default();
    checks.below(format!("analytic residual of {}", pde.analytic.identity_name), pde.analytic.max_abs, tol.analytic);
    checks.below(
        format!("finite-difference residual of {}", pde.finite_difference.identity_name),
        pde.finite_difference.max_abs,
        tol.finite_difference,
    );
    for r in boundary.reports() {
        checks.below(format!("boundary condition {}", r.identity_name), r.max_abs, tol.boundary);
    }

    let out = prepare_output(cfg)?;
    let mut rows = Vec::with_capacity(cfg.grid.nx * cfg.grid.nt);
    for (x, t) in cfg.grid.points() {
        rows.push(vec![x, t, sol.eval_u(x, t)?, analytic_defect(&sol, x, t, 1.0)?.0]);
    }
    if cfg.emits(Emit::Csv) {
        write_csv(&out.join("solution.csv"), &["x", "t", "u", "residual"], rows.iter().cloned())?;
    }
    if cfg.emits(Emit::Json) {
        write_json(&out.join("problem.json"), &problem_doc(&problem, cfg.front, inverse))?;
        let passed = checks.passed();
        write_json(
            &out.join("residuals.json"),
            &ResidualsDoc {
                pde_analytic: &pde.analytic,
                pde_finite_difference: &pde.finite_difference,
                boundary: &boundary,
                tolerances: tol,
                checks: checks.0.clone(),
                passed,
            },
        )?;
    }
    if cfg.emits(Emit::Svg) {
        fs::write(out.join("profile.svg"), profile_svg(&rows, 2, "u(x, t)", "u"))?;
        let cells: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[0], r[1], r[3])).collect();
        fs::write(out.join("residual_heatmap.svg"), heatmap("analytic residual, log10 |r|", "x", "t", &cells))?;
    }
    checks.into_result()
}

#[derive(Serialize)]
struct InverseDoc<'a> {
    #[serde(flatten)]
    info: InverseInfo,
    problem: &'a StefanProblem,
}

pub fn cmd_inverse(cfg: &RunConfig) -> Result<String, CliError> {
    if !matches!(cfg.front, FrontSpec::Pm(_)) {
        return Err(CliError::Config("inverse needs the front given by P_m (--pm or \"P_m\" in the config)".into()));
    }
    let (problem, inverse) = resolve_problem(cfg)?;
    let info = inverse.expect("front given by P_m");
    if cfg.emits(Emit::Json) {
        let out = prepare_output(cfg)?;
        write_json(&out.join("problem.json"), &problem_doc(&problem, cfg.front, inverse))?;
    }
    crate::output::json_string(&InverseDoc { info, problem: &problem })
}

/// Default image lattice: 40 × 40 nodes at step 1e-2, centred in the image
/// strip and starting one step after the grid's first time.
fn auto_lattice(problem: &StefanProblem, grid: &GridSpec, n_quad: usize) -> Result<LatticeConfig, CliError> {
    let n = 40;
    let edge = front_image_quadrature(problem, grid.t0, n_quad)?;
    let step = 1e-2f64.min(edge / (n as f64 + 8.0));
    Ok(LatticeConfig { x_star0: 0.5 * edge - 0.5 * step * (n - 1) as f64, t_star0: grid.t0 + step, step, n })
}

#[derive(Serialize)]
struct ReciprocalDoc<'a> {
    x_star_origin: f64,
    s_star_coeff: f64,
    s_star_const: f64,
    s_star_initial: f64,
    s_star_note: &'static str,
    origin_drift: f64,
    path_independence: Vec<PathCheck>,
    front_max_deviation: f64,
    lattice: LatticeConfig,
    compatibility: &'a ResidualReport,
    checks: Vec<Check>,
    passed: bool,
}

pub fn cmd_reciprocal(cfg: &RunConfig) -> Result<(), CliError> {
    let (problem, _) = resolve_problem(cfg)?;
    problem.check_grid(&cfg.grid)?;
    let n = cfg.quadrature;
    let g = &cfg.grid;
    let image = ReciprocalImage::build(&problem, g, n)?;

    let paths = [0.5 * g.x1, g.x1]
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| path_independence(&problem, x, g.t0, g.t1, n))
        .collect::<Result<Vec<_>, _>>()?;
    let drift = origin_drift(&problem, g.t0, g.t1, n)?;

    let mut front_rows = Vec::with_capacity(g.nt);
    let mut front_dev: f64 = 0.0;
    for t in g.ts() {
        let model = image.s_star(t)?;
        let quad = front_image_quadrature(&problem, t, n)?;
        let transport = front_image_transport(&problem, t, n)?;
        front_dev = front_dev.max((quad - model).abs()).max((transport - model).abs());
        front_rows.push(vec![t, problem.front(t)?.s, model, quad, transport]);
    }

    let lattice = match cfg.lattice {
        Some(l) => l,
        None => auto_lattice(&problem, g, n)?,
    };
    let span = lattice.step * (lattice.n.max(2) - 1) as f64;
    let lattice_grid = GridSpec::new(lattice.x_star0, lattice.x_star0 + span, lattice.t_star0, lattice.t_star0 + span, lattice.n, lattice.n)
        .map_err(|e| CliError::Config(format!("lattice: {e}")))?;
    let compat = compatibility_residual(&problem, &lattice_grid, n)?;

    let tol = &cfg.tolerances;
    let mut checks = Checks::default();
    for p in &paths {
        checks.below("path independence of dx*", p.discrepancy, tol.path_independence);
    }
    checks.below("left image boundary drift", drift, tol.origin_drift);
    checks.below("image front: quadrature vs logarithmic law", front_dev, tol.path_independence);
    checks.below("coefficient of ln(t*+a) in S*", image.s_star_coeff, tol.s_star_coeff);
    checks.below(format!("finite-difference residual of {}", compat.identity_name), compat.max_abs, tol.compatibility);

    let out = prepare_output(cfg)?;
    if cfg.emits(Emit::Csv) {
        write_csv(&out.join("reciprocal.csv"), &["x", "t", "x_star", "u_star"], image.samples.iter().map(|s| vec![s.x, s.t, s.x_star, s.u_star]))?;
        write_csv(&out.join("front.csv"), &["t", "S", "S_star", "S_star_quadrature", "S_star_transport"], front_rows.iter().cloned())?;
    }
    if cfg.emits(Emit::Json) {
        let passed = checks.passed();
        write_json(
            &out.join("reciprocal.json"),
            &ReciprocalDoc {
                x_star_origin: image.x_star_origin,
                s_star_coeff: image.s_star_coeff,
                s_star_const: image.s_star_const,
                s_star_initial: image.s_star_initial(),
                s_star_note: "the ln(t*+a) coefficient vanishes when L_m = gamma Psi(gamma); the image front is then stationary",
                origin_drift: drift,
                path_independence: paths.clone(),
                front_max_deviation: front_dev,
                lattice,
                compatibility: &compat,
                checks: checks.0.clone(),
                passed,
            },
        )?;
    }
    if cfg.emits(Emit::Svg) {
        fs::write(out.join("front.svg"), front_svg(&["t", "S", "S_star"], &front_rows))?;
    }
    checks.into_result()
}

#[derive(Debug, Clone, Default, Args)]
pub struct RhoArgs {
    /// Modulation family; overrides the config's `modulation`.
    #[arg(long, value_enum)]
    pub family: Option<RhoKind>,
    /// Value of a constant modulation.
    #[arg(long)]
    pub value: Option<f64>,
    /// Exponent p of the power modulation (t+a)^p.
    #[arg(long, allow_negative_numbers = true)]
    pub exponent: Option<f64>,
    /// Shift a of the power modulation.
    #[arg(long)]
    pub rho_a: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhoKind {
    Constant,
    Power,
}

impl RhoArgs {
    pub fn family(&self, fallback: &RhoFamily) -> Result<RhoFamily, CliError> {
        match self.family {
            None if self.value.is_some() || self.exponent.is_some() || self.rho_a.is_some() => {
                Err(CliError::Config("--value, --exponent and --rho-a need --family".into()))
            }
            None => Ok(fallback.clone()),
            Some(RhoKind::Constant) => {
                let value = self.value.ok_or_else(|| CliError::Config("--family constant needs --value".into()))?;
                Ok(RhoFamily::Constant { value })
            }
            Some(RhoKind::Power) => {
                let exponent = self.exponent.ok_or_else(|| CliError::Config("--family power needs --exponent".into()))?;
                Ok(RhoFamily::Power { exponent, a: self.rho_a.unwrap_or(1.0) })
            }
        }
    }
}

#[derive(Serialize)]
struct InvolutionDoc<'a> {
    modulation: &'a RhoFamily,
    t_max: f64,
    t_star_max: f64,
    involution: InvolutionReport,
    modulated: &'a ResidualReport,
    ablated: &'a ResidualReport,
    ablation_ratio: f64,
    checks: Vec<Check>,
    passed: bool,
}

pub fn cmd_modulate(cfg: &RunConfig, family: RhoFamily) -> Result<(), CliError> {
    let (problem, _) = resolve_problem(cfg)?;
    problem.check_grid(&cfg.grid)?;
    let sol = problem.sol;
    let g = &cfg.grid;
    if g.t0 != 0.0 {
        return Err(CliError::Config("modulate needs a grid starting at t = 0, where t*(0) = 0".into()));
    }
    let m = Modulation::new(family.clone(), g.t1).map_err(|e| CliError::Config(format!("modulation: {e}")))?;
    let involution = involution_check(&m, g, |x, t| sol.eval_u(x, t))?;

    let h = cfg.fd_step;
    let image_grid = GridSpec::new(g.x0, g.x1, h, m.t_star_max() - h, g.nx, g.nt)
        .map_err(|e| CliError::Config(format!("modulated grid: {e}")))?;
    let opts = ModulatedOptions { fd_step: h, include_rho_term: true };
    let modulated = ermakov_core::involutory::modulated_residual_with(&sol, &m, &image_grid, opts)?;
    let ablated = ermakov_core::involutory::modulated_residual_with(&sol, &m, &image_grid, ModulatedOptions { include_rho_term: false, ..opts })?;
    let ratio = ablated.max_abs / modulated.max_abs;

    let tol = &cfg.tolerances;
    let mut checks = Checks::default();
    checks.below("T** = I round trip", involution.max_error(), tol.involution);
    checks.below(format!("finite-difference residual of {}", modulated.identity_name), modulated.max_abs, tol.modulated);
    if !matches!(family, RhoFamily::Constant { .. }) {
        checks.at_least("ablation ratio without the rho rho' u* term", ratio, 10.0);
    }

    let out = prepare_output(cfg)?;
    let mut rows = Vec::with_capacity(image_grid.nx * image_grid.nt);
    for (x, ts) in image_grid.points() {
        let t = m.t_of_t_star(ts)?;
        rows.push(vec![x, ts, t, sol.eval_u(x, t)? / m.rho(t)?]);
    }
    if cfg.emits(Emit::Csv) {
        write_csv(&out.join("modulated.csv"), &["x", "t_star", "t", "u_star"], rows.iter().cloned())?;
    }
    if cfg.emits(Emit::Json) {
        let passed = checks.passed();
        write_json(
            &out.join("involution.json"),
            &InvolutionDoc {
                modulation: &family,
                t_max: m.t_max(),
                t_star_max: m.t_star_max(),
                involution,
                modulated: &modulated,
                ablated: &ablated,
                ablation_ratio: ratio,
                checks: checks.0.clone(),
                passed,
            },
        )?;
    }
    if cfg.emits(Emit::Svg) {
        let profile_rows: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[1], r[3]]).collect();
        fs::write(out.join("modulated.svg"), profile_svg(&profile_rows, 2, "u*(x, t*)", "u*"))?;
    }
    checks.into_result()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Value column against x at a few times.
    Profile,
    /// Every column against the first.
    Front,
    /// log10 of a column's magnitude over (x, t).
    Heatmap,
}

/// Rows of `(x, t, …)`; plots column `col` against x for up to five times.
fn profile_svg(rows: &[Vec<f64>], col: usize, title: &str, ylabel: &str) -> String {
    let mut times: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let series: Vec<Series> = pick(&times, 5)
        .into_iter()
        .map(|t| Series {
            label: format!("t = {t:.3}"),
            points: rows.iter().filter(|r| r[1] == t).map(|r| (r[0], r[col])).collect(),
        })
        .collect();
    line_plot(title, "x", ylabel, &series)
}

fn front_svg(header: &[&str], rows: &[Vec<f64>]) -> String {
    let series: Vec<Series> = (1..header.len())
        .map(|c| Series { label: header[c].to_string(), points: rows.iter().map(|r| (r[0], r[c])).collect() })
        .collect();
    line_plot("moving boundaries", header[0], "position", &series)
}

fn column(header: &[String], name: &str) -> Result<usize, CliError> {
    header.iter().position(|h| h == name).ok_or_else(|| CliError::Config(format!("column {name:?} not found in {header:?}")))
}

pub fn cmd_plot(input: &Path, kind: PlotKind, out: Option<PathBuf>, value: Option<String>) -> Result<PathBuf, CliError> {
    let (header, rows) = read_csv(input)?;
    if rows.is_empty() {
        return Err(CliError::Config(format!("{} has no data rows", input.display())));
    }
    let time_col = |h: &[String]| column(h, "t_star").or_else(|_| column(h, "t"));
    let svg = match kind {
        PlotKind::Profile => {
            let (x, t) = (column(&header, "x")?, time_col(&header)?);
            let name = value.unwrap_or_else(|| if header.iter().any(|h| h == "u_star") { "u_star".into() } else { "u".into() });
            let v = column(&header, &name)?;
            let picked: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[x], r[t], r[v]]).collect();
            profile_svg(&picked, 2, &name, &name)
        }
        PlotKind::Front => {
            let names: Vec<&str> = header.iter().map(String::as_str).collect();
            front_svg(&names, &rows)
        }
        PlotKind::Heatmap => {
            let (x, t) = (column(&header, "x")?, time_col(&header)?);
            let name = value.unwrap_or_else(|| "residual".into());
            let v = column(&header, &name)?;
            let cells: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r[x], r[t], r[v])).collect();
            heatmap(&format!("log10 |{name}|"), "x", &header[t], &cells)
        }
    };
    let path = out.unwrap_or_else(|| input.with_extension("svg"));
    fs::write(&path, svg)?;
    Ok(path)
}
