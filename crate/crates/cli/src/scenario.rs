//! Sweep execution and file output.
//!
//! Combinations run concurrently; every file is rendered in memory and
//! written from the calling thread in combination order, so the output does
//! not depend on scheduling. `manifest.json` goes last.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use backflow_core::analysis::{analyze, Analysis, ScanOptions, Window};
use backflow_core::eigen::{max_backflow_with, nystrom_spectrum, KernelSpec, QuadratureSpec, RefinementOptions};
use backflow_core::{CkModel, ClModel, Dynamics, Environment};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, EigenConfig, EigenMode, Kind, ScenarioConfig};

pub const SERIES_HEADER: &str = "t,P,j,neg_current";
pub const SUMMARY_HEADER: &str =
    "gamma,kT,g,beta,beta_prime,first_interval_start,first_interval_end,first_interval_duration,first_interval_gain";
pub const EIGEN_SUMMARY_HEADER: &str = "xi,lambda_max,n_used,convergence_estimate,u_max,lambda_max_raw";
pub const SPECTRUM_HEADER: &str = "index,lambda";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: backflow_core::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use backflow_core::Error as E;
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { source, .. } => match source {
                E::InvalidParameter { .. } | E::DegenerateSuperposition { .. } | E::NegativeTime { .. } | E::InvalidSeries(_) => 2,
                _ => 3,
            },
            RunError::Io { .. } | RunError::Pool(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub files: Vec<String>,
    pub config: ScenarioConfig,
}

/// `{:.16e}` keeps 17 significant digits, enough to round-trip any f64.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Short form for file names: shortest round-trip decimal.
fn tag(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, Copy)]
struct Combo {
    gamma: f64,
    kt: f64,
    g: f64,
}

impl Combo {
    fn file_stem(&self, kind: Kind) -> String {
        let mut s = format!("{}_gamma{}", kind.name(), tag(self.gamma));
        if kind.is_cl() {
            s += &format!("_kT{}", tag(self.kt));
        }
        if kind.is_forced() {
            s += &format!("_g{}", tag(self.g));
        }
        s
    }
}

fn combos(config: &ScenarioConfig) -> Vec<Combo> {
    let mut out = Vec::new();
    for &gamma in &config.gamma {
        for &kt in &config.kt {
            for &g in &config.g {
                out.push(Combo { gamma, kt, g });
            }
        }
    }
    out
}

fn run_combo(config: &ScenarioConfig, combo: Combo) -> Result<Analysis, RunError> {
    let numerical = |source| RunError::Numerical { context: format!("{} at {}", config.kind, combo.file_stem(config.kind)), source };
    let c = config.physical_constants();
    let sup = config.superposition();
    let env = Environment::new(combo.gamma, combo.kt, combo.g).map_err(numerical)?;
    let model: Box<dyn Dynamics> = if config.kind.is_cl() {
        Box::new(ClModel::new(c, env, sup))
    } else {
        Box::new(CkModel::new(c, env, sup))
    };
    let t = config.time;
    let window = Window::new(t.t_lo, t.t_hi, config.allow_negative_time).map_err(numerical)?;
    let opts = ScanOptions { step: t.step, ..ScanOptions::default() };
    analyze(model.as_ref(), window, &opts).map_err(numerical)
}

fn series_csv(a: &Analysis) -> String {
    let mut s = String::with_capacity(a.current.len() * 96);
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for ((t, p), j) in a.prob_left.times().iter().zip(a.prob_left.values()).zip(a.current.values()) {
        let neg = if *j < 0.0 { -j } else { 0.0 };
        let _ = writeln!(s, "{},{},{},{}", fmt_num(*t), fmt_num(*p), fmt_num(*j), fmt_num(neg));
    }
    s
}

fn summary_row(combo: Combo, a: &Analysis) -> String {
    let first = a.first_interval();
    let f = |g: fn(&backflow_core::analysis::BackflowInterval) -> f64| first.map_or(f64::NAN, g);
    [
        combo.gamma,
        combo.kt,
        combo.g,
        a.beta,
        a.beta_prime,
        f(|i| i.t_start),
        f(|i| i.t_end),
        f(|i| i.duration()),
        f(|i| i.gain),
    ]
    .iter()
    .map(|v| fmt_num(*v))
    .collect::<Vec<_>>()
    .join(",")
}

struct EigenRow {
    xi: f64,
    lambda_max: f64,
    n_used: usize,
    convergence_estimate: f64,
    u_max: f64,
    lambda_max_raw: f64,
    lambdas: Vec<f64>,
}

fn run_eigen(kind: Kind, eigen: &EigenConfig, xi: f64) -> Result<EigenRow, RunError> {
    let spec = if kind == Kind::EigenFree { KernelSpec::free() } else { KernelSpec::forced(xi) };
    let numerical = |source| RunError::Numerical { context: format!("{kind} at xi = {xi}"), source };
    match eigen.mode {
        EigenMode::Refine { tolerance, start_n, max_n } => {
            let opts = RefinementOptions { start_n, max_n, rule: eigen.rule };
            let est = max_backflow_with(spec, tolerance, &opts).map_err(numerical)?;
            Ok(EigenRow {
                xi,
                lambda_max: est.lambda_max,
                n_used: est.spectrum.n_used,
                convergence_estimate: est.convergence_estimate,
                u_max: est.spectrum.u_max,
                lambda_max_raw: est.lambda_max_raw,
                lambdas: est.spectrum.lambdas,
            })
        }
        EigenMode::Fixed { n, u_max } => {
            let quad = QuadratureSpec::new(n, u_max, eigen.rule).map_err(numerical)?;
            let s = nystrom_spectrum(spec, quad).map_err(numerical)?;
            Ok(EigenRow {
                xi,
                lambda_max: s.lambda_max,
                n_used: s.n_used,
                convergence_estimate: s.convergence_estimate,
                u_max: s.u_max,
                lambda_max_raw: s.lambda_max,
                lambdas: s.lambdas,
            })
        }
    }
}

struct Writer<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl Writer<'_> {
    fn write(&mut self, name: String, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(&name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        self.files.push(name);
        Ok(())
    }
}

/// Runs every combination of the sweep and writes the output files into
/// `out_dir` (created if needed). `jobs = None` uses rayon's default pool.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path, jobs: Option<usize>) -> Result<Manifest, RunError> {
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io { path: out_dir.to_path_buf(), source })?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = jobs {
            b = b.num_threads(n.max(1));
        }
        b.build().map_err(|e| RunError::Pool(e.to_string()))?
    };
    let mut w = Writer { dir: out_dir, files: Vec::new() };
    let mut warnings = String::new();
    let kind = config.kind;

    if let Some(eigen) = &config.eigen {
        let rows: Vec<EigenRow> =
            pool.install(|| eigen.xi.par_iter().map(|&xi| run_eigen(kind, eigen, xi)).collect::<Result<_, _>>())?;
        let mut summary = format!("{EIGEN_SUMMARY_HEADER}\n");
        for row in &rows {
            let mut spectrum = format!("{SPECTRUM_HEADER}\n");
            for (i, l) in row.lambdas.iter().enumerate() {
                let _ = writeln!(spectrum, "{i},{}", fmt_num(*l));
            }
            let name = if kind == Kind::EigenFree {
                format!("spectrum_{kind}.csv")
            } else {
                format!("spectrum_{kind}_xi{}.csv", tag(row.xi))
            };
            w.write(name, &spectrum)?;
            let _ = writeln!(
                summary,
                "{},{},{},{},{},{}",
                fmt_num(row.xi),
                fmt_num(row.lambda_max),
                row.n_used,
                fmt_num(row.convergence_estimate),
                fmt_num(row.u_max),
                fmt_num(row.lambda_max_raw)
            );
        }
        w.write(format!("summary_{kind}.csv"), &summary)?;
    } else {
        let combos = combos(config);
        let results: Vec<Analysis> =
            pool.install(|| combos.par_iter().map(|&c| run_combo(config, c)).collect::<Result<_, _>>())?;
        let mut summary = format!("{SUMMARY_HEADER}\n");
        for (combo, a) in combos.iter().zip(&results) {
            let name = format!("series_{}.csv", combo.file_stem(kind));
            for warning in &a.warnings {
                let _ = writeln!(warnings, "{name}: {warning}");
            }
            if a.intervals.is_empty() {
                let _ = writeln!(warnings, "{name}: no backflow interval in the window");
            }
            w.write(name, &series_csv(a))?;
            summary.push_str(&summary_row(*combo, a));
            summary.push('\n');
        }
        w.write(format!("summary_{kind}.csv"), &summary)?;
    }
    w.write("warnings.txt".to_string(), &warnings)?;

    let mut manifest = Manifest { files: w.files.clone(), config: config.clone() };
    manifest.files.push("manifest.json".to_string());
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    w.write("manifest.json".to_string(), &json)?;
    Ok(manifest)
}

/// Parses a CSV written by [`run_scenario`] back into its header and rows.
pub fn read_csv(text: &str) -> Option<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next()?.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for line in lines {
        let row: Vec<f64> = line.split(',').map(|x| x.parse::<f64>()).collect::<Result<_, _>>().ok()?;
        if row.len() != header.len() {
            return None;
        }
        rows.push(row);
    }
    Some((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 1.0 / 3.0, 7.72e-10, -1.234_567_890_123_456_7e300, f64::MIN_POSITIVE] {
            let s = fmt_num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(fmt_num(f64::NAN), "NaN");
        assert!("NaN".parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn stems_name_only_relevant_parameters() {
        let c = Combo { gamma: 0.1, kt: 2.0, g: 0.0 };
        assert_eq!(c.file_stem(Kind::CkFree), "ck-free_gamma0.1");
        assert_eq!(c.file_stem(Kind::ClFree), "cl-free_gamma0.1_kT2");
        assert_eq!(c.file_stem(Kind::ClForce), "cl-force_gamma0.1_kT2_g0");
    }
}
