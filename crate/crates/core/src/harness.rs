//! Convergence sweeps: errors at the final time against a same-grid RK4
//! reference, observed orders, least-squares slopes and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{norm_h2, Field, Grid};
use crate::integrators::{integrate, rk4_reference_solve, MethodId};
use crate::problems::Problem;

/// Largest accepted H2 distance between the reference and its step-doubled twin.
pub const REFERENCE_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_GRID_POINTS: usize = 500;
pub const DEFAULT_K_RANGE: (u32, u32) = (4, 10);

/// Discrete H2 norm of `u_num - u_ref`.
pub fn compute_error(g: &Grid, u_num: &Field, u_ref: &Field) -> Result<f64> {
    g.check(u_num)?;
    g.check(u_ref)?;
    norm_h2(g, &u_num.sub(u_ref)?)
}

/// Step sizes `t_final / 2^k` for `k` in `a..=b`, largest first.
pub fn taus_from_k_range(t_final: f64, a: u32, b: u32) -> Vec<f64> {
    (a..=b).map(|k| t_final / 2f64.powi(k as i32)).collect()
}

/// Smallest power of two `N` with `t_final / N <= h^2 / 8`.
pub fn default_reference_steps(g: &Grid, t_final: f64) -> usize {
    let limit = g.h() * g.h() / 8.0;
    let mut steps = 1usize;
    while t_final / steps as f64 > limit {
        steps *= 2;
    }
    steps
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub problem: Problem,
    pub methods: Vec<MethodId>,
    /// Strictly decreasing, each tiling `[0, t_final]`.
    pub taus: Vec<f64>,
    pub grid_points: usize,
    /// RK4 steps of the reference; `None` selects [`default_reference_steps`].
    pub reference_steps: Option<usize>,
}

impl SweepSpec {
    /// Default sweep: `n = 500`, `tau = t_final / 2^k` for `k = 4..=10`.
    pub fn new(problem: Problem, methods: Vec<MethodId>) -> Self {
        let taus = taus_from_k_range(problem.t_final, DEFAULT_K_RANGE.0, DEFAULT_K_RANGE.1);
        SweepSpec {
            problem,
            methods,
            taus,
            grid_points: DEFAULT_GRID_POINTS,
            reference_steps: None,
        }
    }

    pub fn with_k_range(mut self, a: u32, b: u32) -> Self {
        self.taus = taus_from_k_range(self.problem.t_final, a, b);
        self
    }

    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid_points = n;
        self
    }

    pub fn validate(&self) -> Result<Grid> {
        let g = self.problem.grid(self.grid_points)?;
        if self.taus.is_empty() {
            return Err(Error::InvalidArgument("empty step size list".into()));
        }
        if self.taus.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("step sizes must be strictly decreasing".into()));
        }
        for &tau in &self.taus {
            crate::integrators::tiling_steps(self.problem.t_final, tau)?;
        }
        if self.reference_steps == Some(0) {
            return Err(Error::InvalidArgument("reference needs at least one step".into()));
        }
        Ok(g)
    }
}

/// One (method, tau) entry. `error` is `None` when the integration failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub tau: f64,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSeries {
    pub method: MethodId,
    pub cells: Vec<Cell>,
}

impl MethodSeries {
    /// `(tau, error)` for every successful cell.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.cells.iter().filter_map(|c| c.error.map(|e| (c.tau, e))).collect()
    }

    /// Order between each cell and its predecessor; `None` for the first cell
    /// and wherever either error is missing or non-positive.
    pub fn observed_orders(&self) -> Vec<Option<f64>> {
        let mut out = vec![None];
        for w in self.cells.windows(2) {
            out.push(match (w[0].error, w[1].error) {
                (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / (w[0].tau / w[1].tau).ln()),
                _ => None,
            });
        }
        out.truncate(self.cells.len());
        out
    }

    pub fn fitted_slope(&self) -> Result<f64> {
        fit_order(&self.pairs())
    }

    pub fn error_at(&self, tau: f64) -> Option<f64> {
        self.cells.iter().find(|c| c.tau == tau).and_then(|c| c.error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCertificate {
    pub steps: usize,
    /// H2 distance between the `steps` and `2 * steps` RK4 solutions.
    pub delta_h2: f64,
}

impl ReferenceCertificate {
    pub fn trusted(&self) -> bool {
        self.delta_h2 <= REFERENCE_TOLERANCE
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub series: Vec<MethodSeries>,
    pub certificate: Option<ReferenceCertificate>,
    /// Emitted as `#` comment lines ahead of the data.
    pub provenance: Vec<(String, String)>,
}

impl ConvergenceReport {
    pub fn series(&self, method: MethodId) -> Option<&MethodSeries> {
        self.series.iter().find(|s| s.method == method)
    }

    pub fn trusted(&self) -> bool {
        self.certificate.is_none_or(|c| c.trusted())
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<ConvergenceReport> {
    let g = spec.validate()?;
    let prob = &spec.problem;
    let ref_steps = spec
        .reference_steps
        .unwrap_or_else(|| default_reference_steps(&g, prob.t_final));

    let (reference, doubled) = rayon::join(
        || rk4_reference_solve(&g, prob, ref_steps),
        || rk4_reference_solve(&g, prob, 2 * ref_steps),
    );
    let reference = reference?;
    let certificate = ReferenceCertificate {
        steps: ref_steps,
        delta_h2: compute_error(&g, &reference, &doubled?)?,
    };

    let jobs: Vec<(MethodId, f64)> = spec
        .methods
        .iter()
        .flat_map(|&m| spec.taus.iter().map(move |&tau| (m, tau)))
        .collect();
    let cells: Vec<Cell> = jobs
        .par_iter()
        .map(|&(method, tau)| {
            let outcome = integrate(&g, prob, method, tau)
                .and_then(|r| compute_error(&g, &r.final_state, &reference));
            match outcome {
                Ok(e) if e.is_finite() => Cell { tau, error: Some(e), failure: None },
                Ok(e) => Cell { tau, error: None, failure: Some(format!("non-finite error {e}")) },
                Err(err) => Cell { tau, error: None, failure: Some(err.to_string()) },
            }
        })
        .collect();

    let mut cells = cells.into_iter();
    let series = spec
        .methods
        .iter()
        .map(|&method| MethodSeries {
            method,
            cells: cells.by_ref().take(spec.taus.len()).collect(),
        })
        .collect();

    let provenance = vec![
        ("problem".to_string(), prob.id.clone()),
        ("t_final".to_string(), prob.t_final.to_string()),
        ("grid_points".to_string(), spec.grid_points.to_string()),
        (
            "taus".to_string(),
            spec.taus.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "),
        ),
        ("reference".to_string(), "rk4 on the same grid".to_string()),
        ("reference_steps".to_string(), ref_steps.to_string()),
        ("reference_delta_h2".to_string(), certificate.delta_h2.to_string()),
        ("reference_trusted".to_string(), certificate.trusted().to_string()),
    ];

    Ok(ConvergenceReport {
        problem: prob.id.clone(),
        series,
        certificate: Some(certificate),
        provenance,
    })
}

/// Least-squares slope of `ln(error)` against `ln(tau)`. Non-positive or
/// non-finite errors are skipped.
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(t, e)| *e > 0.0 && e.is_finite() && *t > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::UndefinedOrder);
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (sxx, sxy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x * x, b + x * y));
    let denom = m * sxx - sx * sx;
    if denom.abs() <= f64::EPSILON * m * sxx {
        return Err(Error::UndefinedOrder);
    }
    Ok((m * sxy - sx * sy) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Dat,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "dat" => Ok(ReportFormat::Dat),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}` (valid: csv, dat)"))),
        }
    }
}

pub const CSV_HEADER: &str = "problem,method,tau,error_h2,observed_order";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn render_report(report: &ConvergenceReport, format: ReportFormat) -> String {
    let mut out = String::new();
    for (k, v) in &report.provenance {
        let _ = writeln!(out, "# {k} = {v}");
    }
    match format {
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for s in &report.series {
                for (cell, order) in s.cells.iter().zip(s.observed_orders()) {
                    let err = cell.error.map_or_else(|| "NaN".to_string(), |e| e.to_string());
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        report.problem,
                        s.method,
                        cell.tau,
                        err,
                        fmt_opt(order)
                    );
                }
            }
        }
        ReportFormat::Dat => {
            for (i, s) in report.series.iter().enumerate() {
                if i > 0 {
                    out.push_str("\n\n");
                }
                let slope = s.fitted_slope().ok();
                let _ = writeln!(out, "# method = {} (fitted slope {})", s.method, fmt_opt(slope));
                out.push_str("# tau error_h2\n");
                for (tau, e) in s.pairs() {
                    let _ = writeln!(out, "{tau} {e}");
                }
            }
        }
    }
    out
}

pub fn write_report(report: &ConvergenceReport, path: &Path, format: ReportFormat) -> Result<()> {
    fs::write(path, render_report(report, format)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
