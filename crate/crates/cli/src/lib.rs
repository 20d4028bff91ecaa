//! Library side of the `blowup` command: configuration, subcommand bodies,
//! and file output. `main.rs` only parses flags and maps errors to exit codes.

pub mod config;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use blowup_core::concavity::{concavity_bound, extremal_ode_blowup, ConcavitySetup, OracleOutcome};
use blowup_core::simulate::{assess, render_verdict, run_scenario, Record, ScenarioRun, SimSeries};
use blowup_core::Error as CoreError;

use config::{key_kind, KeyKind, RunConfig, Value};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numerical(_) => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Precondition(m) => CliError::Precondition(m),
            CoreError::Invalid(m) | CoreError::DomainMismatch(m) => CliError::Config(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

pub const CSV_HEADER: &str =
    "t,norm_u_sq,norm_ut_sq,grad_sq,boundary_sq,potential,u_dot_ut,energy,cum_damping,cum_forcing";

/// One row per record, 17 significant digits.
pub fn series_csv(series: &SimSeries) -> String {
    let mut out = String::with_capacity(series.records.len() * 240 + 100);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &series.records {
        let row: Vec<String> = r.to_array().iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_series_csv(text: &str) -> Result<Vec<Record>, CliError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(CliError::Config("series.csv: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Config(format!("series.csv row {}: {e}", i + 2)))?;
            let arr: [f64; 10] = vals.try_into().map_err(|_| {
                CliError::Config(format!("series.csv row {}: expected 10 fields", i + 2))
            })?;
            Ok(Record::from_array(arr))
        })
        .collect()
}

/// Criteria pipeline only; returns the text written to stdout and the verdict file.
pub fn check(cfg: &RunConfig) -> Result<String, CliError> {
    let scenario = cfg.to_scenario()?;
    let a = assess(&scenario)?;
    let mut out = String::new();
    if let Some(s) = a.scale {
        let _ = writeln!(out, "scale = {s:.16e}");
    }
    let c = &a.constants;
    let _ = writeln!(out, "d0 = {:.16e}", c.d0);
    for (eps, fine, _) in &c.c_eps {
        let _ = writeln!(out, "C({eps}) = {fine:.16e}");
    }
    if let (Some(m), Some(r)) = (a.m, a.m_residual) {
        let _ = writeln!(out, "m = {m:.16e}");
        let _ = writeln!(out, "m_residual = {r:.3e}");
    }
    render_verdict(&a.verdict, &mut out);
    for n in &a.notes {
        let _ = writeln!(out, "note = {n}");
    }
    Ok(out)
}

pub fn check_to_file(cfg: &RunConfig, verdict_path: &Path) -> Result<String, CliError> {
    let text = check(cfg)?;
    write_file(verdict_path, &text)?;
    Ok(text)
}

pub fn bound(setup: &ConcavitySetup) -> Result<String, CliError> {
    let b = concavity_bound(setup)?;
    let mut out = String::new();
    let _ = writeln!(out, "lemma = {:?}", b.lemma);
    let _ = writeln!(out, "gamma1 = {:.16e}", b.gamma1);
    let _ = writeln!(out, "gamma2 = {:.16e}", b.gamma2);
    let _ = writeln!(out, "premise = {}", b.premise_ok);
    if b.premise_ok {
        let _ = writeln!(out, "T = {:.16e}", b.t_bound);
    } else {
        let _ = writeln!(out, "no bound: premise fails");
    }
    Ok(out)
}

/// Extremal-ODE blow-up interval against the closed-form bound.
pub fn oracle(setup: &ConcavitySetup, threshold: f64) -> Result<String, CliError> {
    let b = concavity_bound(setup)?;
    let outcome = extremal_ode_blowup(setup, threshold, 1e-3)?;
    let mut out = String::new();
    match (b.premise_ok, outcome) {
        (true, OracleOutcome::BlowUp { t_lo, t_hi, .. }) => {
            let pass = t_hi <= b.t_bound * 1.001;
            let _ = writeln!(out, "interval = [{t_lo:.16e}, {t_hi:.16e}]");
            let _ = writeln!(out, "T = {:.16e}", b.t_bound);
            let _ = writeln!(out, "{}", if pass { "PASS" } else { "FAIL" });
        }
        (true, OracleOutcome::NoBlowUp { t, reason, .. }) => {
            let _ = writeln!(out, "T = {:.16e}", b.t_bound);
            let _ = writeln!(
                out,
                "oracle found no blow-up ({reason:?}) up to t = {t:.6e}"
            );
            let _ = writeln!(out, "FAIL");
        }
        (false, OracleOutcome::NoBlowUp { .. }) => {
            let _ = writeln!(out, "no blow-up predicted; oracle confirms boundedness");
        }
        (false, OracleOutcome::BlowUp { t_lo, t_hi, .. }) => {
            let _ = writeln!(
                out,
                "no blow-up predicted; oracle found blow-up in [{t_lo:.16e}, {t_hi:.16e}]"
            );
        }
    }
    Ok(out)
}

fn write_run(run: &ScenarioRun, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_file(&dir.join("series.csv"), &series_csv(&run.series))?;
    write_file(&dir.join("report.txt"), &run.report.to_string())
}

fn run_summary(run: &ScenarioRun) -> String {
    let r = &run.report;
    let mut out = String::new();
    let _ = writeln!(out, "satisfied = {}", r.verdict.satisfied);
    match r.verdict.t_bound() {
        Some(t) => {
            let _ = writeln!(out, "bound = {t:.16e}");
        }
        None => {
            let _ = writeln!(out, "bound = none");
        }
    }
    let _ = writeln!(out, "status = {}", r.blowup.status.as_str());
    if let Some((lo, hi)) = r.blowup.t_interval {
        let _ = writeln!(out, "t_interval = [{lo:.16e}, {hi:.16e}]");
    }
    let _ = writeln!(out, "comparison = {}", r.comparison.as_str());
    let _ = writeln!(out, "message = {}", r.message);
    out
}

/// Runs the scenario and writes `series.csv` and `report.txt` into `out`.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<(ScenarioRun, String), CliError> {
    let scenario = cfg.to_scenario()?;
    let run = run_scenario(&scenario)?;
    write_run(&run, out)?;
    let summary = run_summary(&run);
    Ok((run, summary))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarySpec {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl VarySpec {
    /// `key=lo:hi:n`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("--vary expects key=lo:hi:n, got `{text}`"));
        let (key, range) = text.split_once('=').ok_or_else(bad)?;
        let key = key.trim();
        match key_kind(key) {
            None => return Err(CliError::Config(format!("--vary: unknown key `{key}`"))),
            Some(KeyKind::Real | KeyKind::RealOrAuto | KeyKind::Count) => {}
            Some(_) => return Err(CliError::Config(format!("--vary: `{key}` is not numeric"))),
        }
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(bad());
        }
        Ok(Self {
            key: key.to_string(),
            lo,
            hi,
            n,
        })
    }

    pub fn is_log(&self) -> bool {
        self.lo > 0.0 && self.hi / self.lo > 100.0
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let f = i as f64 / last;
                if self.is_log() {
                    (self.lo.ln() + f * (self.hi / self.lo).ln()).exp()
                } else {
                    self.lo + f * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

pub const SUMMARY_HEADER: &str = "index,key,value,satisfied,bound,status,t_lo,t_hi,comparison";

/// One scenario per point, run concurrently; `summary.csv` rows in point order.
pub fn sweep(cfg: &RunConfig, vary: &VarySpec, out: &Path) -> Result<String, CliError> {
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let kind = key_kind(&vary.key).expect("validated by VarySpec::parse");
    let rows: Vec<Result<String, CliError>> = vary
        .values()
        .into_par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut point = cfg.clone();
            let value = match kind {
                KeyKind::Count => Value::Count(x.round().max(0.0) as usize),
                _ => Value::Real(x),
            };
            point.set(&vary.key, value.clone());
            let prefix = format!("{i},{},{}", vary.key, value);
            let result = point
                .to_scenario()
                .and_then(|s| run_scenario(&s).map_err(CliError::from));
            match result {
                Ok(run) => {
                    write_run(&run, &out.join(format!("point_{i:03}")))?;
                    let r = &run.report;
                    let (lo, hi) = r
                        .blowup
                        .t_interval
                        .map_or(("".to_string(), "".to_string()), |(a, b)| {
                            (format!("{a:.16e}"), format!("{b:.16e}"))
                        });
                    let bound = r
                        .verdict
                        .t_bound()
                        .map_or("".to_string(), |t| format!("{t:.16e}"));
                    Ok(format!(
                        "{prefix},{},{bound},{},{lo},{hi},{}",
                        r.verdict.satisfied,
                        r.blowup.status.as_str(),
                        r.comparison.as_str()
                    ))
                }
                Err(CliError::Io(m)) => Err(CliError::Io(m)),
                Err(e) => {
                    let msg = e.to_string().replace(',', ";");
                    Ok(format!("{prefix},,,error: {msg},,,"))
                }
            }
        })
        .collect();
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for row in rows {
        summary.push_str(&row?);
        summary.push('\n');
    }
    write_file(&out.join("summary.csv"), &summary)?;
    Ok(summary)
}
