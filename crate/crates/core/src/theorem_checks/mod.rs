//! Pointwise verification of the structure identities of pointwise slant
//! submanifolds, aggregated into a deterministic report.
//!
//! Every check produces one [`CheckResult`] per sampled point: the max-abs
//! residual over its argument samples, compared against the tolerance of its
//! class. Checks whose statement is conditional on a hypothesis (integrability,
//! parallel T or N, constant angles) report `hypothesis-not-met` when the
//! measured hypothesis fails instead of pass/fail.

mod algebraic;
mod codazzi;
mod fields;
mod integrability;
mod kahler;
mod parallel;
mod report;
mod sampling;
mod suite;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use algebraic::{check_algebraic, check_gauss_weingarten, check_slant};
pub use codazzi::check_codazzi_expansion;
pub use fields::{DistributionSlot, SpanningField};
pub(crate) use fields::cluster_labels;
pub use integrability::check_integrability;
pub use kahler::check_kahler_identities;
pub use parallel::{check_parallel_conditionals, hypothesis_norms, HypothesisNorms};
pub use report::{
    read_report, summarize, write_csv, write_json, AngleStat, CheckSummary, Evidence,
    ReportConfig, StatusCounts, SuiteReport, Summary,
};
pub use sampling::sample_points;
pub use suite::{analyze_point, run_suite, PointContext, SuiteConfig, SuiteTarget};

use crate::ambient::AmbientError;
use crate::catalog::CatalogError;
use crate::expr_dsl::ParseError;
use crate::tangent_geometry::GeometryError;

/// Number of random argument vectors per algebraic identity.
pub const RANDOM_ARGUMENTS: usize = 20;
/// Boundary margin applied to every domain predicate when sampling.
pub const DEFAULT_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    HypothesisNotMet,
    Ambiguous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::HypothesisNotMet => "hypothesis-not-met",
            Status::Ambiguous => "ambiguous",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_id: String,
    pub point_index: usize,
    pub point: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub status: Status,
}

impl CheckResult {
    /// Pass iff `residual <= tolerance`. Non-finite residuals fail and are
    /// stored as `f64::MAX` so the report stays valid JSON.
    pub fn judged(id: impl Into<String>, point: &PointRef, residual: f64, tolerance: f64) -> Self {
        let (residual, status) = if !residual.is_finite() {
            (f64::MAX, Status::Fail)
        } else if residual <= tolerance {
            (residual, Status::Pass)
        } else {
            (residual, Status::Fail)
        };
        CheckResult {
            check_id: id.into(),
            point_index: point.index,
            point: point.params.to_vec(),
            residual,
            tolerance,
            status,
        }
    }

    /// A result with a fixed status (hypothesis-not-met, ambiguous).
    pub fn with_status(
        id: impl Into<String>,
        point: &PointRef,
        residual: f64,
        tolerance: f64,
        status: Status,
    ) -> Self {
        CheckResult {
            check_id: id.into(),
            point_index: point.index,
            point: point.params.to_vec(),
            residual: if residual.is_finite() { residual } else { f64::MAX },
            tolerance,
            status,
        }
    }

    /// Judged when `hypothesis` holds, otherwise hypothesis-not-met.
    pub fn gated(
        id: impl Into<String>,
        point: &PointRef,
        residual: f64,
        tolerance: f64,
        hypothesis: bool,
    ) -> Self {
        if hypothesis {
            Self::judged(id, point, residual, tolerance)
        } else {
            Self::with_status(id, point, residual, tolerance, Status::HypothesisNotMet)
        }
    }

    /// Judged unless the slant clustering was ambiguous.
    pub fn unless_ambiguous(
        id: impl Into<String>,
        point: &PointRef,
        residual: f64,
        tolerance: f64,
        ambiguous: bool,
    ) -> Self {
        if ambiguous {
            Self::with_status(id, point, residual, tolerance, Status::Ambiguous)
        } else {
            Self::judged(id, point, residual, tolerance)
        }
    }
}

/// Index and coordinates of a sampled point.
#[derive(Debug, Clone, Copy)]
pub struct PointRef<'a> {
    pub index: usize,
    pub params: &'a [f64],
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("sampling: {0}")]
    Sampling(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("report: {0}")]
    Report(String),
}

/// Tolerance classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ToleranceClass {
    /// Identities evaluated from exact jets and linear algebra.
    Algebraic,
    /// One finite-difference layer.
    Derivative,
    /// Two finite-difference layers.
    SecondDerivative,
    /// Threshold under which a measured hypothesis counts as satisfied.
    Hypothesis,
    /// Eigenvalue clustering.
    Cluster,
    /// Round-off-only identities.
    Exact,
}

impl ToleranceClass {
    pub const ALL: [ToleranceClass; 6] = [
        ToleranceClass::Algebraic,
        ToleranceClass::Derivative,
        ToleranceClass::SecondDerivative,
        ToleranceClass::Hypothesis,
        ToleranceClass::Cluster,
        ToleranceClass::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ToleranceClass::Algebraic => "algebraic",
            ToleranceClass::Derivative => "derivative",
            ToleranceClass::SecondDerivative => "second_derivative",
            ToleranceClass::Hypothesis => "hypothesis",
            ToleranceClass::Cluster => "cluster",
            ToleranceClass::Exact => "exact",
        }
    }
}

impl FromStr for ToleranceClass {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ToleranceClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ToleranceClass::ALL.iter().map(|c| c.name()).collect();
                SuiteError::Config(format!(
                    "unknown tolerance class `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub algebraic: f64,
    pub derivative: f64,
    pub second_derivative: f64,
    pub hypothesis: f64,
    pub cluster: f64,
    pub exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-8,
            derivative: 1e-6,
            second_derivative: 1e-5,
            hypothesis: 1e-6,
            cluster: 1e-6,
            exact: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn get(&self, class: ToleranceClass) -> f64 {
        match class {
            ToleranceClass::Algebraic => self.algebraic,
            ToleranceClass::Derivative => self.derivative,
            ToleranceClass::SecondDerivative => self.second_derivative,
            ToleranceClass::Hypothesis => self.hypothesis,
            ToleranceClass::Cluster => self.cluster,
            ToleranceClass::Exact => self.exact,
        }
    }

    pub fn set(&mut self, class: ToleranceClass, value: f64) -> Result<(), SuiteError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(SuiteError::Config(format!(
                "tolerance for {} must be positive, got {value}",
                class.name()
            )));
        }
        let slot = match class {
            ToleranceClass::Algebraic => &mut self.algebraic,
            ToleranceClass::Derivative => &mut self.derivative,
            ToleranceClass::SecondDerivative => &mut self.second_derivative,
            ToleranceClass::Hypothesis => &mut self.hypothesis,
            ToleranceClass::Cluster => &mut self.cluster,
            ToleranceClass::Exact => &mut self.exact,
        };
        *slot = value;
        Ok(())
    }

    /// Parses and applies `class=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), SuiteError> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| SuiteError::Config(format!("expected class=value, got `{spec}`")))?;
        let class: ToleranceClass = name.trim().parse()?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| SuiteError::Config(format!("invalid tolerance value `{value}`")))?;
        self.set(class, value)
    }
}

/// Deliberate corruptions used to confirm that checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Flip the sign of φ at entry (1, 0), breaking φ² = −I.
    PhiSignFlip,
    /// Omit t·h(X, Y) from the right-hand side of the ∇T identity.
    DropShapeTerm,
    /// Swap the distributions assigned to the second and third frame fields.
    MisassignedFrame,
    /// Omit the −Σ X(cos²θᵢ)PᵢY term of the ∇T² expansion.
    DropAngleDerivativeTerm,
    /// Replace h by h + g(X, e)g(Y, e)ν in the parallel-tensor checks.
    PerturbSecondFundamentalForm,
}

impl Mutation {
    pub const ALL: [Mutation; 5] = [
        Mutation::PhiSignFlip,
        Mutation::DropShapeTerm,
        Mutation::MisassignedFrame,
        Mutation::DropAngleDerivativeTerm,
        Mutation::PerturbSecondFundamentalForm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::PhiSignFlip => "phi-sign-flip",
            Mutation::DropShapeTerm => "drop-shape-term",
            Mutation::MisassignedFrame => "misassigned-frame",
            Mutation::DropAngleDerivativeTerm => "drop-angle-derivative-term",
            Mutation::PerturbSecondFundamentalForm => "perturb-second-fundamental-form",
        }
    }

    /// The check expected to fail under this mutation.
    pub fn targeted_check(self) -> &'static str {
        match self {
            Mutation::PhiSignFlip => "algebraic.T_squared",
            Mutation::DropShapeTerm => "kahler.nabla_T",
            Mutation::MisassignedFrame => "integrability.D0.proof_ii",
            Mutation::DropAngleDerivativeTerm => "codazzi.expansion",
            Mutation::PerturbSecondFundamentalForm => "parallel.nabla_N.prop_1",
        }
    }
}

impl FromStr for Mutation {
    type Err = SuiteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| SuiteError::Config(format!("unknown mutation `{s}`")))
    }
}

/// Deterministic per-point generator for random arguments.
pub fn argument_rng(seed: u64, point_index: usize) -> ChaCha8Rng {
    let mix = 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(point_index as u64 + 1);
    ChaCha8Rng::seed_from_u64(seed ^ mix)
}

/// A Gaussian vector normalized to unit length (zero-length for n = 0).
pub fn random_unit(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if n == 0 {
            return v;
        }
        if norm > 1e-3 {
            return v / norm;
        }
    }
}

/// Max-abs entry, 0 for empty vectors.
pub(crate) fn amax(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        t.apply_override("derivative=1e-4").unwrap();
        assert_eq!(t.derivative, 1e-4);
        assert!(t.apply_override("derivative=-1").is_err());
        assert!(t.apply_override("bogus=1").is_err());
        assert!(t.apply_override("derivative").is_err());
    }

    #[test]
    fn judging() {
        let p = PointRef { index: 3, params: &[0.1] };
        assert_eq!(CheckResult::judged("a", &p, 1e-9, 1e-8).status, Status::Pass);
        assert_eq!(CheckResult::judged("a", &p, 1e-7, 1e-8).status, Status::Fail);
        let nan = CheckResult::judged("a", &p, f64::NAN, 1e-8);
        assert_eq!((nan.status, nan.residual), (Status::Fail, f64::MAX));
        assert_eq!(
            CheckResult::gated("a", &p, 1.0, 1e-8, false).status,
            Status::HypothesisNotMet
        );
    }

    #[test]
    fn mutation_names_round_trip() {
        for m in Mutation::ALL {
            assert_eq!(m.name().parse::<Mutation>().unwrap(), m);
        }
        assert_eq!(
            serde_json::to_string(&Status::HypothesisNotMet).unwrap(),
            "\"hypothesis-not-met\""
        );
    }
}
