//! Convergence study front end: configuration, the N-sweep over point
//! counts, eigenvalue matching against the exact circle oracle, rate fitting,
//! and report/CSV emission.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactcircle::{exact_circle_eigenvalues, CircleMeasureProblem};
use crate::green::{MagneticSystem, SpectralWindow, DEFAULT_DELTA_FACTOR};
use crate::pointop::{
    coupling_alpha_for_circle, schur_holmgren_bound, scan_gap_for_eigenvalues, EigenvalueRecord,
    PointConfiguration,
};

/// Grid resolution of the per-window branch scan.
pub const SCAN_GRID_POINTS: usize = 400;

/// Errors below `10 * tol` are dominated by root-finding noise and are
/// excluded from the rate fit.
pub const FIT_NOISE_FACTOR: f64 = 10.0;

fn default_b() -> f64 {
    1.0
}
fn default_r() -> f64 {
    2.0
}
fn default_gamma() -> f64 {
    1.0
}
fn default_n_list() -> Vec<usize> {
    vec![20, 40, 80, 160, 320]
}
fn default_l_range() -> i64 {
    8
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Study configuration; every field is optional in the JSON document and
/// falls back to the defaults of the reference experiment
/// (`B = 1`, `R = 2`, `γ = 1`, `N ∈ {20, 40, 80, 160, 320}`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    #[serde(rename = "B", default = "default_b")]
    pub b: f64,
    #[serde(rename = "R", default = "default_r")]
    pub r: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    /// Window endpoints `[z_lo, z_hi]`; when absent, the gap below the lowest
    /// Landau level and the first two gaps above it are used.
    #[serde(default)]
    pub windows: Option<Vec<(f64, f64)>>,
    /// Root bracket tolerance; default `1e-8 |B|`.
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_l_range")]
    pub l_range: i64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            b: default_b(),
            r: default_r(),
            gamma: default_gamma(),
            n_list: default_n_list(),
            windows: None,
            tol: None,
            l_range: default_l_range(),
            output_dir: default_output_dir(),
        }
    }
}

impl StudyConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn resolved_tol(&self) -> f64 {
        self.tol.unwrap_or(1e-8 * self.b.abs())
    }

    pub fn system(&self) -> Result<MagneticSystem> {
        MagneticSystem::new(self.b)
    }

    pub fn resolved_windows(&self, sys: &MagneticSystem) -> Result<Vec<SpectralWindow>> {
        match &self.windows {
            Some(list) => list
                .iter()
                .map(|&(lo, hi)| {
                    SpectralWindow::new(lo, hi, DEFAULT_DELTA_FACTOR * sys.b_abs(), sys)
                })
                .collect(),
            None => (0..3).map(|g| SpectralWindow::gap(g, sys)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b != 0.0 && self.r > 0.0 && self.gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "need B != 0, R > 0, gamma > 0; got B = {}, R = {}, gamma = {}",
                self.b, self.r, self.gamma
            )));
        }
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "n_list must be non-empty and strictly increasing, got {:?}",
                self.n_list
            )));
        }
        if self.l_range < 1 {
            return Err(Error::InvalidConfig(format!(
                "l_range must be >= 1, got {}",
                self.l_range
            )));
        }
        let sys = self.system().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.resolved_windows(&sys)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(())
    }
}

/// One approximate eigenvalue paired with its exact partner (when found).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchedRecord {
    pub record: EigenvalueRecord,
    /// Index into the window's exact eigenvalue list; absent when no exact
    /// partner lies within half the window width.
    pub exact_index: Option<usize>,
    pub abs_error: Option<f64>,
}

/// Least-squares fit of `|z_N - z*| ≈ c N^{-a}` on log-log axes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateFit {
    pub exact_index: usize,
    pub exact_z: f64,
    pub branch: i64,
    pub c: f64,
    pub a: f64,
    /// Sum of squared residuals of the log-log fit.
    pub residual: f64,
    pub points_used: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchurDiagnostic {
    pub n: usize,
    pub alpha: f64,
    pub schur_bound: f64,
    pub margin: f64,
    pub hypothesis_satisfied: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerN {
    pub n: usize,
    pub matched: Vec<MatchedRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowReport {
    pub window: (f64, f64),
    pub exact: Vec<EigenvalueRecord>,
    pub per_n: Vec<PerN>,
    pub fits: Vec<RateFit>,
    pub schur: Vec<SchurDiagnostic>,
    pub warnings: Vec<String>,
}

/// Full study output. Wall-clock timings are collected separately (see
/// [`ConvergenceReport::timings`]) and excluded from serialization so that
/// identical configurations produce byte-identical reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub windows: Vec<WindowReport>,
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

/// Run the full convergence study: exact oracle once per window, branch scan
/// per `(N, window)`, nearest-z matching, and rate fits.
pub fn run_convergence_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let sys = config.system()?;
    let windows = config.resolved_windows(&sys)?;
    let tol = config.resolved_tol();
    let alpha = coupling_alpha_for_circle(config.r, config.gamma)?;
    let prob = CircleMeasureProblem::with_default_order(sys, config.r, config.gamma)?;

    let mut timings = Vec::new();
    let mut window_reports = Vec::new();
    for (wi, window) in windows.iter().enumerate() {
        let t0 = Instant::now();
        let exact = exact_circle_eigenvalues(&prob, window, config.l_range, tol)?;
        timings.push((format!("exact_w{wi}"), t0.elapsed().as_secs_f64()));

        let t1 = Instant::now();
        // The N-sweep is independent per N; results are merged in list order.
        let scans: Vec<_> = config
            .n_list
            .par_iter()
            .map(|&n| {
                let conf = PointConfiguration::equidistant_circle(config.r, n, alpha)?;
                let outcome =
                    scan_gap_for_eigenvalues(&conf, &sys, window, SCAN_GRID_POINTS, tol)?;
                let probe = 0.5 * (window.z_lo + window.z_hi);
                let bound = schur_holmgren_bound(&conf, &sys, probe)?;
                Ok::<_, Error>((n, outcome, bound))
            })
            .collect::<Result<_>>()?;
        timings.push((format!("sweep_w{wi}"), t1.elapsed().as_secs_f64()));

        let mut warnings = Vec::new();
        let mut per_n = Vec::new();
        let mut schur = Vec::new();
        let half_width = window.width() / 2.0;
        for (n, outcome, bound) in scans {
            warnings.extend(outcome.warnings.iter().map(|w| format!("N={n}: {w}")));
            let matched = outcome
                .records
                .iter()
                .map(|rec| {
                    // A circulant branch label k is the angular momentum
                    // l = k (k <= N/2) or l = k - N, so branch identity is
                    // the primary pairing; nearest-z is the fallback for
                    // records without an exact partner on the same mode.
                    let l = if rec.branch >= 0 && rec.branch > n as i64 / 2 {
                        rec.branch - n as i64
                    } else {
                        rec.branch
                    };
                    let nearest = exact
                        .iter()
                        .enumerate()
                        .filter(|(_, e)| e.branch == l)
                        .min_by(|(_, a), (_, b)| {
                            (a.z - rec.z)
                                .abs()
                                .partial_cmp(&(b.z - rec.z).abs())
                                .unwrap()
                        })
                        .or_else(|| {
                            exact
                                .iter()
                                .enumerate()
                                .min_by(|(_, a), (_, b)| {
                                    (a.z - rec.z)
                                        .abs()
                                        .partial_cmp(&(b.z - rec.z).abs())
                                        .unwrap()
                                })
                        })
                        .filter(|(_, e)| (e.z - rec.z).abs() <= half_width);
                    match nearest {
                        Some((idx, e)) => MatchedRecord {
                            record: *rec,
                            exact_index: Some(idx),
                            abs_error: Some((e.z - rec.z).abs()),
                        },
                        None => {
                            warnings.push(format!(
                                "N={n}: eigenvalue at z = {} has no exact partner within half the window width",
                                rec.z
                            ));
                            MatchedRecord {
                                record: *rec,
                                exact_index: None,
                                abs_error: None,
                            }
                        }
                    }
                })
                .collect();
            per_n.push(PerN { n, matched });
            schur.push(SchurDiagnostic {
                n,
                alpha,
                schur_bound: bound,
                margin: alpha - bound,
                hypothesis_satisfied: bound < alpha,
            });
        }

        let fits = fit_rates(&exact, &per_n, tol);
        window_reports.push(WindowReport {
            window: (window.z_lo, window.z_hi),
            exact,
            per_n,
            fits,
            schur,
            warnings,
        });
    }

    Ok(ConvergenceReport {
        config: config.clone(),
        windows: window_reports,
        timings,
    })
}

fn fit_rates(exact: &[EigenvalueRecord], per_n: &[PerN], tol: f64) -> Vec<RateFit> {
    let mut fits = Vec::new();
    for (idx, e) in exact.iter().enumerate() {
        let mut points: Vec<(f64, f64)> = Vec::new();
        for pn in per_n {
            // Best-matching approximate record for this exact eigenvalue.
            let best = pn
                .matched
                .iter()
                .filter(|m| m.exact_index == Some(idx))
                .min_by(|a, b| {
                    a.abs_error
                        .partial_cmp(&b.abs_error)
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            if let Some(m) = best {
                let err = m.abs_error.unwrap();
                if err > FIT_NOISE_FACTOR * tol {
                    points.push(((pn.n as f64).ln(), err.ln()));
                }
            }
        }
        if points.len() < 3 {
            continue;
        }
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        let residual: f64 = points
            .iter()
            .map(|p| {
                let d = p.1 - (slope * p.0 + intercept);
                d * d
            })
            .sum();
        fits.push(RateFit {
            exact_index: idx,
            exact_z: e.z,
            branch: e.branch,
            c: intercept.exp(),
            a: -slope,
            residual,
            points_used: points.len(),
        });
    }
    fits
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// Figure-style CSV for one window: columns
/// `N,eigenvalue_rank,z_approx,z_exact,abs_error`.
pub fn emit_figure_data(report: &ConvergenceReport, window_index: usize) -> Result<String> {
    let wr = report
        .windows
        .get(window_index)
        .ok_or_else(|| Error::InvalidArgument(format!("window index {window_index} out of range")))?;
    let mut out = String::from("N,eigenvalue_rank,z_approx,z_exact,abs_error\n");
    for pn in &wr.per_n {
        for (rank, m) in pn.matched.iter().enumerate() {
            let z_exact = m
                .exact_index
                .map(|i| fmt(wr.exact[i].z))
                .unwrap_or_default();
            let abs_error = m.abs_error.map(fmt).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                pn.n,
                rank,
                fmt(m.record.z),
                z_exact,
                abs_error
            ));
        }
    }
    Ok(out)
}

/// Standalone Schur-Holmgren diagnostic table at a probe energy.
pub fn diagnostics(config: &StudyConfig, z_probe: f64) -> Result<Vec<SchurDiagnostic>> {
    config.validate()?;
    let sys = config.system()?;
    let windows = config.resolved_windows(&sys)?;
    if !windows.iter().any(|w| w.contains(z_probe)) {
        return Err(Error::InvalidArgument(format!(
            "probe energy {z_probe} lies in none of the configured windows"
        )));
    }
    let alpha = coupling_alpha_for_circle(config.r, config.gamma)?;
    config
        .n_list
        .iter()
        .map(|&n| {
            let conf = PointConfiguration::equidistant_circle(config.r, n, alpha)?;
            let bound = schur_holmgren_bound(&conf, &sys, z_probe)?;
            Ok(SchurDiagnostic {
                n,
                alpha,
                schur_bound: bound,
                margin: alpha - bound,
                hypothesis_satisfied: bound < alpha,
            })
        })
        .collect()
}

pub fn diagnostics_csv(rows: &[SchurDiagnostic]) -> String {
    let mut out = String::from("N,alpha,schur_bound,margin,hypothesis2_satisfied\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt(r.alpha),
            fmt(r.schur_bound),
            fmt(r.margin),
            r.hypothesis_satisfied
        ));
    }
    out
}

fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(contents).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)
}

/// Write `report.json`, one `figure_w<k>.csv` per window, and
/// `diagnostics.csv` into the output directory.
pub fn write_report(report: &ConvergenceReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidArgument(format!("report serialization failed: {e}")))?;
    write_atomic(&dir.join("report.json"), json.as_bytes())?;
    for wi in 0..report.windows.len() {
        let csv = emit_figure_data(report, wi)?;
        write_atomic(&dir.join(format!("figure_w{wi}.csv")), csv.as_bytes())?;
    }
    let mut diag_out = String::from("window_index,N,alpha,schur_bound,margin,hypothesis2_satisfied\n");
    for (wi, wr) in report.windows.iter().enumerate() {
        for r in &wr.schur {
            diag_out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                wi,
                r.n,
                fmt(r.alpha),
                fmt(r.schur_bound),
                fmt(r.margin),
                r.hypothesis_satisfied
            ));
        }
    }
    write_atomic(&dir.join("diagnostics.csv"), diag_out.as_bytes())
}
