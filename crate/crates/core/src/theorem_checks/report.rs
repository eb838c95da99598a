//! Suite reports: JSON and CSV serialization and summaries recomputed from
//! the result list.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::parallel::HypothesisNorms;
use super::{CheckResult, Status, SuiteError, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    /// Catalog id (`pointwise:2`) or the path of a DSL file.
    pub target: String,
    /// SHA-256 of the DSL source for custom immersions.
    pub source_hash: Option<String>,
    pub k: Option<usize>,
    pub points: usize,
    pub seed: u64,
    pub margin: f64,
    pub fd_step: f64,
    pub tolerances: Tolerances,
    pub mutation: Option<String>,
    /// Spanning fields were built by projecting coordinate fields, so the
    /// integrability and Codazzi families rest on finite differences of
    /// projectors rather than exact frame programs.
    pub projected_fields: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub pass: usize,
    pub fail: usize,
    pub hypothesis_not_met: usize,
    pub ambiguous: usize,
}

impl StatusCounts {
    fn add(&mut self, s: Status) {
        match s {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::HypothesisNotMet => self.hypothesis_not_met += 1,
            Status::Ambiguous => self.ambiguous += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.pass + self.fail + self.hypothesis_not_met + self.ambiguous
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub max_residual: f64,
    pub tolerance: f64,
    pub counts: StatusCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: BTreeMap<String, CheckSummary>,
    pub totals: StatusCounts,
}

/// Mean and population standard deviation of one slant angle across points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleStat {
    pub distribution: String,
    pub samples: usize,
    pub mean: f64,
    pub stddev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    /// Sample-wide maxima of ‖∇T‖, ‖∇N‖, ‖∇t‖, ‖∇n‖.
    pub hypotheses: HypothesisNorms,
    pub nabla_t_parallel: bool,
    pub nabla_n_parallel: bool,
    pub angles: Vec<AngleStat>,
    /// Points whose slant clustering was flagged ambiguous.
    pub ambiguous_points: Vec<usize>,
    /// Points where some derivative fell back to one-sided differences.
    pub one_sided_points: Vec<usize>,
    /// Points whose coordinate basis was ill-conditioned.
    pub ill_conditioned_points: Vec<usize>,
    /// Points where the geometry could not be built, with the reason.
    pub errors: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: ReportConfig,
    pub results: Vec<CheckResult>,
    pub summary: Summary,
    /// Multiplicity pattern of the slant clusters ("2,2,2,1") → point count.
    pub histogram: BTreeMap<String, usize>,
    pub evidence: Evidence,
}

impl SuiteReport {
    pub fn has_failures(&self) -> bool {
        self.summary.totals.fail > 0
    }

    /// Every sampled point had an ambiguous slant clustering.
    pub fn all_ambiguous(&self) -> bool {
        self.config.points > 0 && self.evidence.ambiguous_points.len() == self.config.points
    }

    /// Results of one check, in point order.
    pub fn check(&self, id: &str) -> Vec<&CheckResult> {
        self.results.iter().filter(|r| r.check_id == id).collect()
    }

    /// Suggested process exit code: 0 iff nothing failed and some point was
    /// unambiguous.
    pub fn exit_code(&self) -> i32 {
        if self.has_failures() || self.all_ambiguous() {
            1
        } else {
            0
        }
    }

    /// Human-readable per-check table.
    pub fn render_summary(&self) -> String {
        let mut s = String::new();
        let width = self.summary.checks.keys().map(|k| k.len()).max().unwrap_or(5).max(5);
        s.push_str(&format!(
            "{:<width$}  {:>11}  {:>9}  {:>5}  {:>5}  {:>5}  {:>5}\n",
            "check", "max resid", "tol", "pass", "fail", "hyp", "amb"
        ));
        for (id, c) in &self.summary.checks {
            s.push_str(&format!(
                "{:<width$}  {:>11.3e}  {:>9.1e}  {:>5}  {:>5}  {:>5}  {:>5}\n",
                id,
                c.max_residual,
                c.tolerance,
                c.counts.pass,
                c.counts.fail,
                c.counts.hypothesis_not_met,
                c.counts.ambiguous
            ));
        }
        let t = &self.summary.totals;
        s.push_str(&format!(
            "total: {} results, {} pass, {} fail, {} hypothesis-not-met, {} ambiguous\n",
            t.total(),
            t.pass,
            t.fail,
            t.hypothesis_not_met,
            t.ambiguous
        ));
        s
    }
}

/// Recomputes the summary from a result list.
pub fn summarize(results: &[CheckResult]) -> Summary {
    let mut checks: BTreeMap<String, CheckSummary> = BTreeMap::new();
    let mut totals = StatusCounts::default();
    for r in results {
        let entry = checks.entry(r.check_id.clone()).or_insert(CheckSummary {
            max_residual: 0.0,
            tolerance: r.tolerance,
            counts: StatusCounts::default(),
        });
        entry.max_residual = entry.max_residual.max(r.residual);
        entry.tolerance = entry.tolerance.max(r.tolerance);
        entry.counts.add(r.status);
        totals.add(r.status);
    }
    Summary { checks, totals }
}

pub fn write_json(report: &SuiteReport, out: &mut impl Write) -> Result<(), SuiteError> {
    serde_json::to_writer_pretty(&mut *out, report).map_err(|e| SuiteError::Report(e.to_string()))?;
    out.write_all(b"\n").map_err(|e| SuiteError::Report(e.to_string()))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check_id: &'a str,
    point_index: usize,
    residual: f64,
    tolerance: f64,
    status: Status,
}

pub fn write_csv(report: &SuiteReport, out: &mut impl Write) -> Result<(), SuiteError> {
    let mut w = csv::Writer::from_writer(out);
    for r in &report.results {
        w.serialize(CsvRow {
            check_id: &r.check_id,
            point_index: r.point_index,
            residual: r.residual,
            tolerance: r.tolerance,
            status: r.status,
        })
        .map_err(|e| SuiteError::Report(e.to_string()))?;
    }
    w.flush().map_err(|e| SuiteError::Report(e.to_string()))
}

/// Loads a JSON report written by [`write_json`].
pub fn read_report(path: &Path) -> Result<SuiteReport, SuiteError> {
    let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| SuiteError::Report(format!("{}: {e}", path.display())))
}

/// Mean and population standard deviation.
pub(crate) fn angle_stat(distribution: String, values: &[f64]) -> AngleStat {
    let n = values.len();
    let mean = if n == 0 {
        0.0
    } else {
        values.iter().sum::<f64>() / n as f64
    };
    let var = if n == 0 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
    };
    AngleStat {
        distribution,
        samples: n,
        mean,
        stddev: var.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theorem_checks::PointRef;

    fn result(id: &str, i: usize, r: f64, status: Status) -> CheckResult {
        let p = PointRef { index: i, params: &[0.0] };
        CheckResult::with_status(id, &p, r, 1e-8, status)
    }

    #[test]
    fn summary_counts() {
        let rs = vec![
            result("a", 0, 1e-9, Status::Pass),
            result("a", 1, 1e-3, Status::Fail),
            result("b", 0, 0.5, Status::HypothesisNotMet),
        ];
        let s = summarize(&rs);
        assert_eq!(s.checks["a"].max_residual, 1e-3);
        assert_eq!(s.checks["a"].counts.fail, 1);
        assert_eq!(s.totals.total(), 3);
        assert_eq!(s.totals.hypothesis_not_met, 1);
    }

    #[test]
    fn stats() {
        let st = angle_stat("D2".into(), &[1.0, 1.0, 1.0]);
        assert_eq!((st.mean, st.stddev), (1.0, 0.0));
        let st = angle_stat("D2".into(), &[0.0, 2.0]);
        assert_eq!((st.mean, st.stddev), (1.0, 1.0));
    }
}
