//! Airy functions Ai, Bi and their first derivatives on the real line.
//!
//! For `|z| <= Z_SWITCH` the Maclaurin pair
//!
//! ```text
//! f(z) = 1 + z³/3! + 1·4 z⁶/6! + ...      (f(0) = 1, f'(0) = 0)
//! g(z) = z + 2 z⁴/4! + 2·5 z⁷/7! + ...    (g(0) = 0, g'(0) = 1)
//! Ai = Ai(0) f + Ai'(0) g,   Bi = Bi(0) f + Bi'(0) g
//! ```
//!
//! is summed in double-double arithmetic. Near `z = 8` the two terms of
//! `Ai(0) f + Ai'(0) g` cancel over thirteen decimal orders, so both the
//! series terms and the combination are carried at ~32 digits.
//!
//! Beyond the switch radius the standard Poincaré expansions in
//! `ζ = (2/3)|z|^{3/2}` are used, truncated at their smallest term. For
//! negative arguments they take the phase form in `χ = ζ + π/4`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};

/// Radius at which evaluation switches from the Maclaurin series to the
/// asymptotic expansions. At 8 the truncated asymptotic error `~exp(-2ζ)`
/// is below 1e-13 and the double-double series is still cheap.
pub const Z_SWITCH: f64 = 8.0;

/// Largest positive argument for which Bi and Bi' stay finite is ≈104.2;
/// the precondition bound on |z|.
pub const Z_MAX: f64 = 105.0;

const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const AIP0: Dd = Dd::new(-0.2588194037928068, 2.522243111610832e-17);
const BI0: Dd = Dd::new(0.6149266274460007, 5.0899207794891416e-17);
const BIP0: Dd = Dd::new(0.4482883573538264, -2.5363237774417305e-17);

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

const MAX_SERIES_TERMS: usize = 400;
const MAX_ASYMPTOTIC_TERMS: usize = 60;

/// Ai, Ai', Bi, Bi' at one argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryValues {
    pub ai: f64,
    pub aip: f64,
    pub bi: f64,
    pub bip: f64,
}

impl AiryValues {
    /// `ai·bip − aip·bi`; equals 1/π for the unscaled pair.
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bip - self.aip * self.bi
    }
}

/// Evaluates Ai, Ai', Bi, Bi' at `z`.
pub fn airy(z: f64) -> Result<AiryValues> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("airy argument must be finite, got {z}")));
    }
    let values = if z.abs() <= Z_SWITCH {
        airy_series(z)
    } else if z > 0.0 {
        airy_asymptotic_positive(z)
    } else {
        airy_asymptotic_negative(z)
    };
    if !values.bi.is_finite() {
        return Err(Error::Overflow { function: "Bi", z });
    }
    if !values.bip.is_finite() {
        return Err(Error::Overflow { function: "Bi'", z });
    }
    Ok(values)
}

/// Largest relative disagreement between the Maclaurin and asymptotic
/// branches at `z`. For `z < 0` errors are measured against the moduli
/// `√(Ai² + Bi²)` and `√(Ai′² + Bi′²)`, which do not vanish; for `z > 0`
/// against each function's own magnitude.
pub fn branch_mismatch(z: f64) -> Result<f64> {
    if !z.is_finite() || z == 0.0 {
        return Err(Error::Domain(format!("branch comparison needs a finite nonzero z, got {z}")));
    }
    let s = airy_series(z);
    let a = if z > 0.0 { airy_asymptotic_positive(z) } else { airy_asymptotic_negative(z) };
    let (m, n) = (s.ai.hypot(s.bi), s.aip.hypot(s.bip));
    let scales = if z < 0.0 { [m, n, m, n] } else { [s.ai.abs(), s.aip.abs(), s.bi.abs(), s.bip.abs()] };
    Ok([(s.ai, a.ai), (s.aip, a.aip), (s.bi, a.bi), (s.bip, a.bip)]
        .iter()
        .zip(scales)
        .map(|(&(x, y), sc)| ((x - y) / sc).abs())
        .fold(0.0, f64::max))
}

/// Evaluates `F(σz)` and `d/dz F(σz) = σ F'(σz)` for `F ∈ {Ai, Bi}`.
///
/// The Wronskian of the returned pair is `σ/π`.
pub fn airy_scaled(z: f64, sigma: f64) -> Result<AiryValues> {
    let v = airy(sigma * z)?;
    Ok(AiryValues {
        ai: v.ai,
        aip: sigma * v.aip,
        bi: v.bi,
        bip: sigma * v.bip,
    })
}

pub(crate) fn airy_series(z: f64) -> AiryValues {
    let zd = Dd::from_f64(z);
    let z2 = zd * zd;
    let z3 = z2 * zd;

    // f, f', g, g' partial sums and their current terms.
    let mut f_term = Dd::ONE;
    let mut g_term = zd;
    let mut f = Dd::ONE;
    let mut fp = Dd::ZERO;
    let mut g = zd;
    let mut gp = Dd::ONE;

    for k in 1..MAX_SERIES_TERMS {
        let k3 = 3.0 * k as f64;
        let fp_term = (f_term * z2).div_f64(k3 - 1.0);
        let gp_term = (g_term * z2).div_f64(k3);
        f_term = (f_term * z3).div_f64(k3 * (k3 - 1.0));
        g_term = (g_term * z3).div_f64((k3 + 1.0) * k3);
        f = f + f_term;
        fp = fp + fp_term;
        g = g + g_term;
        gp = gp + gp_term;

        let largest_term = f_term
            .abs_hi()
            .max(g_term.abs_hi())
            .max(fp_term.abs_hi())
            .max(gp_term.abs_hi());
        let scale = f.abs_hi().max(g.abs_hi()).max(fp.abs_hi()).max(gp.abs_hi()).max(1.0);
        if largest_term <= 1e-34 * scale {
            break;
        }
    }

    AiryValues {
        ai: (AI0 * f + AIP0 * g).to_f64(),
        aip: (AI0 * fp + AIP0 * gp).to_f64(),
        bi: (BI0 * f + BIP0 * g).to_f64(),
        bip: (BI0 * fp + BIP0 * gp).to_f64(),
    }
}

/// Coefficients `u_k`, `v_k` of the Airy asymptotic expansions, up to `n` terms.
fn asymptotic_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    u.push(1.0);
    v.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Sums `Σ_j s_j c[i_j] ζ^{-i_j}` with `i_j = first + stride·j` and
/// `s_j = (−1)^j` when `alternate`, stopping before the terms start to grow.
fn truncated_sum(coeffs: &[f64], zeta: f64, first: usize, stride: usize, alternate: bool) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut j = 0usize;
    loop {
        let idx = first + stride * j;
        if idx >= coeffs.len() {
            break;
        }
        let sign = if alternate && j % 2 == 1 { -1.0 } else { 1.0 };
        let term = coeffs[idx] * zeta.powi(-(idx as i32));
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        prev = term.abs();
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        j += 1;
    }
    sum
}

pub(crate) fn airy_asymptotic_positive(z: f64) -> AiryValues {
    let (u, v) = asymptotic_coefficients(MAX_ASYMPTOTIC_TERMS);
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let z14 = z.sqrt().sqrt();

    // Alternating sums for the decaying solution, plain sums for the growing one.
    let su_alt = truncated_sum(&u, zeta, 0, 1, true);
    let sv_alt = truncated_sum(&v, zeta, 0, 1, true);
    let su = truncated_sum(&u, zeta, 0, 1, false);
    let sv = truncated_sum(&v, zeta, 0, 1, false);

    let decay = (-zeta).exp() * FRAC_1_SQRT_PI / 2.0;
    // exp(ζ)/√π combined in log form so that Bi stays finite up to the true overflow.
    let grow_ai = (zeta - z14.ln()).exp() * FRAC_1_SQRT_PI;
    let grow_aip = (zeta + z14.ln()).exp() * FRAC_1_SQRT_PI;

    AiryValues {
        ai: decay / z14 * su_alt,
        aip: -decay * z14 * sv_alt,
        bi: grow_ai * su,
        bip: grow_aip * sv,
    }
}

pub(crate) fn airy_asymptotic_negative(z: f64) -> AiryValues {
    let (u, v) = asymptotic_coefficients(MAX_ASYMPTOTIC_TERMS);
    let x = -z;
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let x14 = x.sqrt().sqrt();
    let chi = zeta + PI / 4.0;
    let (s, c) = chi.sin_cos();

    let pu = truncated_sum(&u, zeta, 0, 2, true);
    let qu = truncated_sum(&u, zeta, 1, 2, true);
    let pv = truncated_sum(&v, zeta, 0, 2, true);
    let qv = truncated_sum(&v, zeta, 1, 2, true);

    let amp = FRAC_1_SQRT_PI / x14;
    let amp_d = FRAC_1_SQRT_PI * x14;
    AiryValues {
        ai: amp * (s * pu - c * qu),
        aip: -amp_d * (c * pv + s * qv),
        bi: amp * (c * pu + s * qu),
        bip: amp_d * (s * pv - c * qv),
    }
}
