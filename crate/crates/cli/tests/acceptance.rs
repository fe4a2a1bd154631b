//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any failure.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ermakov_core::ermakov::{convergence_order, integrate_oracle, ErmakovParams};
use ermakov_core::involutory::{involution_check, modulated_residual_with, ModulatedOptions, Modulation};
use ermakov_core::reciprocal::{
    front_image_quadrature, origin_drift, path_independence, s_star_coefficient, CompatibilityOptions, ImageLattice,
};
use ermakov_core::report::GridSpec;
use ermakov_core::similarity::{analytic_residual_at, fd_residual_at, ResidualOptions, SimilaritySolution};
use ermakov_core::specialfn::{airy, branch_mismatch, Z_SWITCH};
use ermakov_core::stefan::{boundary_residuals, front_value, inverse_solve, scan_bracket, StefanProblem, MIN_GAMMA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<Vec<String>, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: String, notes: &mut Vec<String>) -> Result<(), String> {
    if ok {
        notes.push(msg);
        Ok(())
    } else {
        Err(msg)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn draw(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    (rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0), rng.gen_range(-2.0..2.0))
}

fn airy_foundation() -> Outcome {
    let mut notes = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let z = -20.0 + 40.0 * i as f64 / 999.0;
        worst = worst.max((airy(z).map_err(err)?.wronskian() - 1.0 / PI).abs());
    }
    ensure(worst < 1e-11, format!("max Wronskian defect {worst:.2e} < 1e-11"), &mut notes)?;
    let branch = branch_mismatch(Z_SWITCH).map_err(err)?.max(branch_mismatch(-Z_SWITCH).map_err(err)?);
    ensure(branch < 1e-11, format!("branch mismatch at |z| = {Z_SWITCH}: {branch:.2e} < 1e-11"), &mut notes)?;
    Ok(notes)
}

fn ermakov_superposition() -> Outcome {
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_oracle, mut min_order): (f64, f64, f64) = (0.0, 0.0, f64::INFINITY);
    for k in 0..100 {
        let (lambda, c1, c2) = draw(&mut rng);
        let p = ErmakovParams::new(lambda, c1, c2).map_err(err)?;
        for i in 0..=200 {
            let z = -3.0 + 6.0 * i as f64 / 200.0;
            worst = worst.max(p.ermakov_residual(z).map_err(err)?.abs());
        }
        if k < 10 {
            worst_oracle = worst_oracle.max(integrate_oracle(&p, -3.0, 3.0, 10_000).map_err(err)?.max_deviation);
            min_order = min_order.min(convergence_order(&p, -3.0, 3.0, 400, 4).map_err(err)?);
        }
    }
    ensure(worst < 1e-9, format!("max Ermakov residual {worst:.2e} < 1e-9 over 100 draws"), &mut notes)?;
    ensure(worst_oracle < 1e-8, format!("RK4 oracle deviation at 1e4 steps {worst_oracle:.2e} < 1e-8"), &mut notes)?;
    ensure(min_order >= 3.8, format!("min observed order {min_order:.2} >= 3.8"), &mut notes)?;
    Ok(notes)
}

fn default_solution() -> SimilaritySolution {
    SimilaritySolution::new(ErmakovParams::new(1.0, 1.0, 0.0).unwrap(), 1.0).unwrap()
}

fn exact_pde_solution() -> Outcome {
    let mut notes = Vec::new();
    let sol = default_solution();
    let problem = StefanProblem::forward_solve(&sol, 1.0).map_err(err)?;
    let pts = problem.interior_points(50, 50, 0.0, 10.0).map_err(err)?;
    let analytic = analytic_residual_at(&sol, &pts, 1.0).map_err(err)?;
    ensure(analytic.max_abs < 1e-9, format!("analytic residual {:.2e} < 1e-9 on 50x50", analytic.max_abs), &mut notes)?;
    let fd = |h: f64| fd_residual_at(&sol, &pts, ResidualOptions { fd_step: h, lambda_scale: 1.0 }).map(|r| r.max_abs);
    let (e1, e2) = (fd(4e-2).map_err(err)?, fd(2e-2).map_err(err)?);
    let order = (e1 / e2).log2();
    ensure((1.8..2.3).contains(&order), format!("FD residual {e1:.2e} -> {e2:.2e}, order {order:.2}"), &mut notes)?;
    let perturbed = analytic_residual_at(&sol, &pts, 1.0 + 1e-3).map_err(err)?.max_abs;
    ensure(perturbed > 1e-6, format!("lambda*(1+1e-3) residual {perturbed:.2e} fails the 1e-9 gate"), &mut notes)?;
    Ok(notes)
}

fn stefan_problem() -> Outcome {
    let mut notes = Vec::new();
    let sol = default_solution();
    let problem = StefanProblem::forward_solve(&sol, 1.0).map_err(err)?;
    let times: Vec<f64> = (0..20).map(|i| 10.0 * i as f64 / 19.0).collect();
    let b = boundary_residuals(&problem, &times).map_err(err)?.max_abs();
    ensure(b < 1e-9, format!("boundary residuals (I)-(III) {b:.2e} < 1e-9 at 20 times"), &mut notes)?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut lp, mut h0, mut trip): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let (lambda, c1, c2) = draw(&mut rng);
        let gamma = rng.gen_range(0.1..3.0);
        let s = SimilaritySolution::new(ErmakovParams::new(lambda, c1, c2).map_err(err)?, rng.gen_range(0.5..2.0)).map_err(err)?;
        let p = StefanProblem::forward_solve(&s, gamma).map_err(err)?;
        lp = lp.max((p.l_m - p.p_m).abs() / p.p_m.abs());
        h0 = h0.max(p.h_0.abs());
        let target = front_value(&s, gamma).map_err(err)?;
        let bracket = scan_bracket(&s, target, MIN_GAMMA, 6.0, 120).map_err(err)?;
        trip = trip.max((inverse_solve(&s, target, bracket).map_err(err)? - gamma).abs());
    }
    ensure(lp < 1e-10, format!("max |L_m - P_m|/|P_m| {lp:.2e} < 1e-10"), &mut notes)?;
    ensure(h0 < 1e-10, format!("max |H_0| {h0:.2e} < 1e-10"), &mut notes)?;
    ensure(trip < 1e-10, format!("gamma round trip {trip:.2e} < 1e-10"), &mut notes)?;
    Ok(notes)
}

fn reciprocal_transformation() -> Outcome {
    let mut notes = Vec::new();
    let sol = default_solution();
    let p = StefanProblem::forward_solve(&sol, 1.0).map_err(err)?;
    let mut path: f64 = 0.0;
    for (x1, t0, t1) in [(0.25, 0.0, 10.0), (0.5, 0.0, 3.0), (1.0, 0.0, 10.0), (0.9, 2.0, 7.0)] {
        path = path.max(path_independence(&p, x1, t0, t1, 64).map_err(err)?.discrepancy);
    }
    ensure(path < 1e-8, format!("path independence {path:.2e} < 1e-8"), &mut notes)?;
    let drift = origin_drift(&p, 0.0, 10.0, 64).map_err(err)?.abs();
    ensure(drift < 1e-10, format!("left image boundary drift {drift:.2e} < 1e-10"), &mut notes)?;

    let edge = front_image_quadrature(&p, 0.0, 64).map_err(err)?;
    let x0 = 0.5 * edge - 0.195;
    let coarse_grid = GridSpec::new(x0, x0 + 0.39, 1.0, 1.39, 40, 40).map_err(err)?;
    let fine_grid = GridSpec::new(x0, x0 + 0.39, 1.0, 1.39, 79, 79).map_err(err)?;
    let coarse = ImageLattice::tabulate(&p, &coarse_grid, 64).map_err(err)?;
    let base = coarse.residual(CompatibilityOptions::default()).max_abs;
    let fine = ImageLattice::tabulate(&p, &fine_grid, 64).map_err(err)?.residual(CompatibilityOptions::default()).max_abs;
    let order = (base / fine).log2();
    ensure(base < 1e-4, format!("image-equation residual {base:.2e} < 1e-4 at step 1e-2"), &mut notes)?;
    ensure((1.8..2.3).contains(&order), format!("step 1e-2 -> 5e-3: {base:.2e} -> {fine:.2e}, order {order:.2}"), &mut notes)?;
    let shifted = coarse.residual(CompatibilityOptions { lambda_shift: 1e-2 }).max_abs;
    ensure(shifted >= 10.0 * base, format!("lambda + 1e-2 raises it {:.0}x", shifted / base), &mut notes)?;
    let coeff = s_star_coefficient(&p).map_err(err)?;
    ensure(
        coeff.abs() < 1e-10,
        format!("|s_star_coeff| = {:.2e}: the ln(t*+a) law degenerates to a stationary front", coeff.abs()),
        &mut notes,
    )?;
    Ok(notes)
}

fn involutory_family() -> Outcome {
    let mut notes = Vec::new();
    let sol = default_solution();
    let grid = GridSpec::new(0.0, 1.0, 0.0, 10.0, 20, 20).map_err(err)?;
    let field = |x: f64, t: f64| sol.eval_u(x, t);
    let constant = involution_check(&Modulation::constant(2.0, 10.0).map_err(err)?, &grid, field).map_err(err)?.max_error();
    let power_mod = Modulation::power(0.5, 1.0, 10.0).map_err(err)?;
    let power = involution_check(&power_mod, &grid, field).map_err(err)?.max_error();
    ensure(constant < 1e-10 && power < 1e-10, format!("T** = I error: constant {constant:.2e}, power {power:.2e}"), &mut notes)?;

    let g = GridSpec::new(0.1, 1.0, 0.1, 2.0, 30, 30).map_err(err)?;
    let res = |h: f64, keep: bool| {
        modulated_residual_with(&sol, &power_mod, &g, ModulatedOptions { fd_step: h, include_rho_term: keep }).map(|r| r.max_abs)
    };
    let at_1e3 = res(1e-3, true).map_err(err)?;
    ensure(at_1e3 < 1e-4, format!("modulated residual {at_1e3:.2e} < 1e-4 at step 1e-3"), &mut notes)?;
    let (e1, e2) = (res(4e-2, true).map_err(err)?, res(2e-2, true).map_err(err)?);
    let order = (e1 / e2).log2();
    ensure((1.8..2.3).contains(&order), format!("step 4e-2 -> 2e-2: order {order:.2}"), &mut notes)?;
    let ablated = res(1e-3, false).map_err(err)?;
    ensure(ablated >= 10.0 * at_1e3, format!("dropping rho rho' u* raises it {:.1e}x", ablated / at_1e3), &mut notes)?;
    Ok(notes)
}

fn cli_contract() -> Outcome {
    let mut notes = Vec::new();
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = root.join("../../configs/default.json");
    let dir = tempfile::tempdir().map_err(err)?;
    let status = Command::new(env!("CARGO_BIN_EXE_ermakov"))
        .args(["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .map_err(err)?
        .status;
    ensure(status.code() == Some(0), format!("solve on the default config exits {:?}", status.code()), &mut notes)?;
    for f in ["problem.json", "residuals.json"] {
        let same = fs::read(dir.path().join(f)).map_err(err)? == fs::read(root.join("tests/golden").join(f)).map_err(err)?;
        ensure(same, format!("{f} byte-identical to golden"), &mut notes)?;
    }
    let bad = Command::new(env!("CARGO_BIN_EXE_ermakov"))
        .args(["solve", "--config", cfg.to_str().unwrap(), "--lambda", "-1", "--out", dir.path().to_str().unwrap()])
        .output()
        .map_err(err)?
        .status;
    ensure(bad.code() == Some(2), format!("lambda = -1 exits {:?}", bad.code()), &mut notes)?;
    Ok(notes)
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, name: "Airy foundation", limit: Duration::from_secs(1), run: airy_foundation },
        Criterion { id: 2, name: "Ermakov superposition", limit: Duration::from_secs(5), run: ermakov_superposition },
        Criterion { id: 3, name: "Exact PDE solution", limit: Duration::from_secs(5), run: exact_pde_solution },
        Criterion { id: 4, name: "Stefan problem", limit: Duration::from_secs(5), run: stefan_problem },
        Criterion { id: 5, name: "Reciprocal transformation", limit: Duration::from_secs(10), run: reciprocal_transformation },
        Criterion { id: 6, name: "Involutory family", limit: Duration::from_secs(5), run: involutory_family },
        Criterion { id: 7, name: "CLI contract", limit: Duration::from_secs(2), run: cli_contract },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let within = elapsed <= c.limit;
        let (ok, detail) = match outcome {
            Ok(notes) if within => (true, notes.join("; ")),
            Ok(notes) => (false, format!("{}; runtime over {:?}", notes.join("; "), c.limit)),
            Err(msg) => (false, msg),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] criterion {} {} ({:.2} s): {}",
            if ok { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
