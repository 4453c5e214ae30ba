use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{Caps, Format};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeTag {
    Exact,
    Sampled,
}

impl From<chslab_core::Mode> for ModeTag {
    fn from(m: chslab_core::Mode) -> Self {
        match m {
            chslab_core::Mode::Exact => ModeTag::Exact,
            chslab_core::Mode::Sampled { .. } => ModeTag::Sampled,
        }
    }
}

/// How a check's value is compared with its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|value - reference| <= tolerance`
    Eq,
    /// `value <= reference + tolerance`
    Le,
    /// `value >= reference - tolerance`
    Ge,
    /// `value < reference`
    Lt,
    /// `|value - reference| <= tolerance * stderr`
    WithinSigma,
    /// Recorded only.
    Info,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "==",
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::WithinSigma => "~",
            Relation::Info => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub mode: ModeTag,
    pub reference: Option<f64>,
    pub reference_mode: Option<ModeTag>,
    pub relation: Relation,
    pub tolerance: Option<f64>,
    pub stderr: Option<f64>,
    pub verdict: Verdict,
    pub runtime_ms: f64,
    /// Error kind when the underlying operation failed.
    pub error: Option<String>,
}

/// Verdict from the recorded fields alone.
pub fn judge(
    relation: Relation,
    value: Option<f64>,
    reference: Option<f64>,
    tolerance: Option<f64>,
    stderr: Option<f64>,
) -> Verdict {
    let tol = tolerance.unwrap_or(0.0);
    let ok = match (relation, value, reference) {
        (Relation::Info, _, _) => return Verdict::Info,
        (_, Some(v), Some(r)) if v.is_finite() && r.is_finite() => match relation {
            Relation::Eq => (v - r).abs() <= tol,
            Relation::Le => v <= r + tol,
            Relation::Ge => v >= r - tol,
            Relation::Lt => v < r,
            Relation::WithinSigma => (v - r).abs() <= tol * stderr.unwrap_or(0.0),
            Relation::Info => unreachable!(),
        },
        _ => false,
    };
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Collects checks for one run, timing each against the previous one.
pub struct Recorder<'a> {
    checks: Vec<Check>,
    last: Instant,
    overrides: &'a BTreeMap<String, f64>,
}

impl<'a> Recorder<'a> {
    pub fn new(overrides: &'a BTreeMap<String, f64>) -> Self {
        Recorder {
            checks: Vec::new(),
            last: Instant::now(),
            overrides,
        }
    }

    fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.overrides.get(name).copied().unwrap_or(default)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        name: &str,
        value: Option<f64>,
        mode: ModeTag,
        reference: Option<(f64, ModeTag)>,
        relation: Relation,
        tolerance: Option<f64>,
        stderr: Option<f64>,
        error: Option<String>,
    ) {
        let now = Instant::now();
        let runtime_ms = now.duration_since(self.last).as_secs_f64() * 1e3;
        self.last = now;
        let verdict = if error.is_some() {
            Verdict::Fail
        } else {
            judge(relation, value, reference.map(|r| r.0), tolerance, stderr)
        };
        self.checks.push(Check {
            name: name.to_string(),
            value,
            mode,
            reference: reference.map(|r| r.0),
            reference_mode: reference.map(|r| r.1),
            relation,
            tolerance,
            stderr,
            verdict,
            runtime_ms,
            error,
        });
    }

    /// `value` equals an exactly known `reference` within a tolerance.
    pub fn eq(&mut self, name: &str, value: f64, mode: ModeTag, reference: f64, default_tol: f64) {
        let tol = self.tolerance(name, default_tol);
        self.push(
            name,
            Some(value),
            mode,
            Some((reference, ModeTag::Exact)),
            Relation::Eq,
            Some(tol),
            None,
            None,
        );
    }

    /// `value <= bound + tol`, with the bound computed exactly.
    pub fn le(&mut self, name: &str, value: f64, mode: ModeTag, bound: f64, default_tol: f64) {
        let tol = self.tolerance(name, default_tol);
        self.push(
            name,
            Some(value),
            mode,
            Some((bound, ModeTag::Exact)),
            Relation::Le,
            Some(tol),
            None,
            None,
        );
    }

    pub fn ge(&mut self, name: &str, value: f64, mode: ModeTag, bound: f64, default_tol: f64) {
        let tol = self.tolerance(name, default_tol);
        self.push(
            name,
            Some(value),
            mode,
            Some((bound, ModeTag::Exact)),
            Relation::Ge,
            Some(tol),
            None,
            None,
        );
    }

    pub fn lt(&mut self, name: &str, value: f64, mode: ModeTag, reference: f64) {
        self.push(
            name,
            Some(value),
            mode,
            Some((reference, ModeTag::Exact)),
            Relation::Lt,
            None,
            None,
            None,
        );
    }

    /// Sampled `estimate` within `k` standard errors of an exact reference.
    pub fn within_sigma(
        &mut self,
        name: &str,
        estimate: f64,
        stderr: f64,
        reference: f64,
        default_k: f64,
    ) {
        let k = self.tolerance(name, default_k);
        self.push(
            name,
            Some(estimate),
            ModeTag::Sampled,
            Some((reference, ModeTag::Exact)),
            Relation::WithinSigma,
            Some(k),
            Some(stderr),
            None,
        );
    }

    pub fn info(&mut self, name: &str, value: f64, mode: ModeTag) {
        self.push(
            name,
            Some(value),
            mode,
            None,
            Relation::Info,
            None,
            None,
            None,
        );
    }

    pub fn error(&mut self, name: &str, kind: &str) {
        self.push(
            name,
            None,
            ModeTag::Exact,
            None,
            Relation::Info,
            None,
            None,
            Some(kind.to_string()),
        );
    }

    pub fn finish(self) -> Vec<Check> {
        self.checks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub experiment: String,
    pub params: BTreeMap<String, u64>,
    pub seed: u64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionStamp {
    pub package: String,
    pub rustc: String,
}

impl VersionStamp {
    pub fn current() -> Self {
        VersionStamp {
            package: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            rustc: env!("CHSLAB_RUSTC_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Experiment name, or `suite:<name>`.
    pub name: String,
    pub seed: u64,
    pub caps: Caps,
    pub version: VersionStamp,
    pub runs: Vec<Run>,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    run: usize,
    experiment: &'a str,
    seed: u64,
    check: &'a str,
    value: Option<f64>,
    mode: ModeTag,
    relation: Relation,
    reference: Option<f64>,
    reference_mode: Option<ModeTag>,
    tolerance: Option<f64>,
    stderr: Option<f64>,
    verdict: Verdict,
    runtime_ms: f64,
    error: Option<&'a str>,
}

impl Report {
    pub fn new(name: String, seed: u64, caps: Caps, runs: Vec<Run>) -> Self {
        let passed = runs
            .iter()
            .flat_map(|r| &r.checks)
            .all(|c| c.verdict != Verdict::Fail);
        Report {
            name,
            seed,
            caps,
            version: VersionStamp::current(),
            runs,
            passed,
        }
    }

    pub fn checks(&self) -> impl Iterator<Item = (&Run, &Check)> {
        self.runs
            .iter()
            .flat_map(|r| r.checks.iter().map(move |c| (r, c)))
    }

    pub fn failures(&self) -> usize {
        self.checks()
            .filter(|(_, c)| c.verdict == Verdict::Fail)
            .count()
    }

    /// The report with every timing zeroed, for comparing reruns.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for run in &mut r.runs {
            for c in &mut run.checks {
                c.runtime_ms = 0.0;
            }
        }
        r
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (i, run) in self.runs.iter().enumerate() {
            for c in &run.checks {
                w.serialize(CsvRow {
                    run: i,
                    experiment: &run.experiment,
                    seed: run.seed,
                    check: &c.name,
                    value: c.value,
                    mode: c.mode,
                    relation: c.relation,
                    reference: c.reference,
                    reference_mode: c.reference_mode,
                    tolerance: c.tolerance,
                    stderr: c.stderr,
                    verdict: c.verdict,
                    runtime_ms: c.runtime_ms,
                    error: c.error.as_deref(),
                })
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let text = match format {
            Format::Json => self.to_json()?,
            Format::Csv => self.to_csv()?,
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        }
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn summary_table(&self) -> String {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<24} {:<34} {:>14}    {:>14}  {:<7} verdict",
            "experiment", "check", "value", "reference", "mode"
        );
        for (run, c) in self.checks() {
            let verdict = match (&c.error, c.verdict) {
                (Some(kind), _) => format!("FAIL ({kind})"),
                (None, Verdict::Pass) => "pass".into(),
                (None, Verdict::Fail) => "FAIL".into(),
                (None, Verdict::Info) => "info".into(),
            };
            let mode = match c.mode {
                ModeTag::Exact => "exact",
                ModeTag::Sampled => "sampled",
            };
            let _ = writeln!(
                out,
                "{:<24} {:<34} {:>14} {:>2} {:>14}  {:<7} {}",
                run.experiment,
                c.name,
                fmt(c.value),
                c.relation.symbol(),
                fmt(c.reference),
                mode,
                verdict
            );
        }
        let total = self
            .checks()
            .filter(|(_, c)| c.verdict != Verdict::Info)
            .count();
        let _ = writeln!(
            out,
            "{}: {} of {} checks passed",
            self.name,
            total - self.failures(),
            total
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_follow_relations() {
        assert_eq!(
            judge(
                Relation::Eq,
                Some(1.0),
                Some(1.0 + 1e-13),
                Some(1e-12),
                None
            ),
            Verdict::Pass
        );
        assert_eq!(
            judge(Relation::Eq, Some(1.0), Some(1.1), Some(1e-12), None),
            Verdict::Fail
        );
        assert_eq!(
            judge(Relation::Le, Some(2.0), Some(1.0), Some(1e-9), None),
            Verdict::Fail
        );
        assert_eq!(
            judge(Relation::Ge, Some(2.0), Some(1.0), Some(0.0), None),
            Verdict::Pass
        );
        assert_eq!(
            judge(Relation::Lt, Some(1.0), Some(1.0), None, None),
            Verdict::Fail
        );
        assert_eq!(
            judge(
                Relation::WithinSigma,
                Some(0.16),
                Some(0.15),
                Some(4.0),
                Some(0.003)
            ),
            Verdict::Pass
        );
        assert_eq!(
            judge(
                Relation::WithinSigma,
                Some(0.2),
                Some(0.15),
                Some(4.0),
                Some(0.003)
            ),
            Verdict::Fail
        );
        assert_eq!(
            judge(Relation::Le, Some(f64::NAN), Some(1.0), Some(0.0), None),
            Verdict::Fail
        );
        assert_eq!(judge(Relation::Info, None, None, None, None), Verdict::Info);
    }

    #[test]
    fn overrides_replace_default_tolerance() {
        let mut o = BTreeMap::new();
        o.insert("x".to_string(), 0.5);
        let mut r = Recorder::new(&o);
        r.eq("x", 1.0, ModeTag::Exact, 1.4, 1e-12);
        r.eq("y", 1.0, ModeTag::Exact, 1.4, 1e-12);
        let checks = r.finish();
        assert_eq!(checks[0].verdict, Verdict::Pass);
        assert_eq!(checks[0].tolerance, Some(0.5));
        assert_eq!(checks[1].verdict, Verdict::Fail);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let o = BTreeMap::new();
        let mut r = Recorder::new(&o);
        r.le("bound", 0.1, ModeTag::Exact, 0.2, 1e-9);
        r.error("broken", "NotPSD");
        let run = Run {
            experiment: "demo".into(),
            params: BTreeMap::from([("d".to_string(), 4)]),
            seed: 1,
            checks: r.finish(),
        };
        let rep = Report::new("demo".into(), 1, Caps::default(), vec![run]);
        assert!(!rep.passed);
        assert_eq!(rep.failures(), 1);
        let back: Report = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
        let csv = rep.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().contains("NotPSD"));
        assert!(rep.summary_table().contains("FAIL (NotPSD)"));
    }
}
