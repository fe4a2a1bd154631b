//! Evaluation grids, residual summaries and fixed-precision number formatting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular tensor grid `[x0, x1] × [t0, t1]` with `nx × nt` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub t0: f64,
    pub t1: f64,
    pub nx: usize,
    pub nt: usize,
}

impl GridSpec {
    pub fn new(x0: f64, x1: f64, t0: f64, t1: f64, nx: usize, nt: usize) -> Result<Self> {
        let g = GridSpec { x0, x1, t0, t1, nx, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.t0, self.t1].iter().all(|v| v.is_finite());
        if !finite || !(self.x0 < self.x1) || !(self.t0 < self.t1) || self.nx < 2 || self.nt < 2 {
            return Err(Error::Domain(format!(
                "grid needs x0 < x1, t0 < t1, nx >= 2, nt >= 2; got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / (self.nt - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x0 + self.dx() * i as f64).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..self.nt).map(|j| self.t0 + self.dt() * j as f64).collect()
    }

    /// Nodes ordered by time, then space.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let xs = self.xs();
        self.ts().into_iter().flat_map(|t| xs.iter().map(move |&x| (x, t))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Analytic,
    FiniteDifference,
    Quadrature,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::FiniteDifference => "finite-difference",
            Method::Quadrature => "quadrature",
        })
    }
}

/// Max/mean absolute defect of one identity over a point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity_name: String,
    pub n_points: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Max of |defect| / (sum of |terms|) where a term scale is available.
    pub max_rel: f64,
    pub method: Method,
    pub empty: bool,
    pub notes: String,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_abs < tol
    }
}

/// Running accumulator for a [`ResidualReport`].
#[derive(Debug, Clone)]
pub struct ResidualAccumulator {
    name: String,
    method: Method,
    n: usize,
    max_abs: f64,
    sum_abs: f64,
    max_rel: f64,
}

impl ResidualAccumulator {
    pub fn new(name: impl Into<String>, method: Method) -> Self {
        ResidualAccumulator { name: name.into(), method, n: 0, max_abs: 0.0, sum_abs: 0.0, max_rel: 0.0 }
    }

    /// Records one defect; `scale` is the magnitude it should be compared to.
    pub fn push(&mut self, defect: f64, scale: f64) {
        let a = defect.abs();
        self.n += 1;
        self.max_abs = self.max_abs.max(a);
        self.sum_abs += a;
        if scale > 0.0 {
            self.max_rel = self.max_rel.max(a / scale);
        }
    }

    pub fn finish(self, notes: impl Into<String>) -> ResidualReport {
        let empty = self.n == 0;
        let mut notes = notes.into();
        if empty {
            if !notes.is_empty() {
                notes.push_str("; ");
            }
            notes.push_str("empty");
        }
        ResidualReport {
            identity_name: self.name,
            n_points: self.n,
            max_abs: self.max_abs,
            mean_abs: if empty { 0.0 } else { self.sum_abs / self.n as f64 },
            max_rel: self.max_rel,
            method: self.method,
            empty,
            notes,
        }
    }
}

/// Formats a float with 17 significant digits in scientific notation.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
