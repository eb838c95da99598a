//! Suite configuration, per-point analysis and aggregation.

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::codazzi::check_codazzi_expansion;
use super::fields::{build_slots, DistributionSlot};
use super::integrability::{check_frame_brackets, check_integrability};
use super::kahler::check_kahler_identities;
use super::parallel::{check_parallel_conditionals, hypothesis_norms, regate, HypothesisNorms};
use super::report::{angle_stat, summarize, Evidence, ReportConfig, SuiteReport};
use super::sampling::sample_points;
use super::{
    argument_rng, check_algebraic, check_gauss_weingarten, check_slant, CheckResult, Mutation,
    PointRef, SuiteError, ToleranceClass, Tolerances, DEFAULT_MARGIN,
};
use crate::ambient::{load_phi_matrix, standard_structure, HermitianStructure};
use crate::catalog::{CatalogId, ExampleFixture};
use crate::connection_geometry::{CovariantData, Immersion, DEFAULT_FD_STEP};
use crate::expr_dsl::{parse_immersion, AmbientSpec, ExpressionProgram};
use crate::tangent_geometry::GeometryError;

/// What the suite runs on.
#[derive(Debug, Clone)]
pub enum SuiteTarget {
    Catalog(ExampleFixture),
    Custom {
        /// Path or other label shown in the report.
        label: String,
        source_hash: String,
        immersion: Immersion,
    },
}

impl SuiteTarget {
    /// A catalog fixture from an id such as `kslant:3`; `default_k` applies
    /// when the id carries no k.
    pub fn catalog(id: &str, default_k: usize) -> Result<Self, SuiteError> {
        let id: CatalogId = id.parse()?;
        Ok(SuiteTarget::Catalog(id.build(default_k)?))
    }

    /// An immersion from DSL source. `base_dir` resolves relative
    /// `ambient matrix` paths.
    pub fn from_source(label: &str, source: &str, base_dir: &Path) -> Result<Self, SuiteError> {
        let program = parse_immersion(source)?;
        let ambient = resolve_ambient(&program, base_dir)?;
        let immersion = Immersion::new(program, ambient)?;
        Ok(SuiteTarget::Custom {
            label: label.to_string(),
            source_hash: hex::encode(Sha256::digest(source.as_bytes())),
            immersion,
        })
    }

    pub fn from_dsl_file(path: &Path) -> Result<Self, SuiteError> {
        let source = std::fs::read_to_string(path).map_err(|source| SuiteError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_source(&path.display().to_string(), &source, base)
    }

    pub fn label(&self) -> String {
        match self {
            SuiteTarget::Catalog(fx) => fx.id(),
            SuiteTarget::Custom { label, .. } => label.clone(),
        }
    }

    pub fn immersion(&self) -> Immersion {
        match self {
            SuiteTarget::Catalog(fx) => fx.to_immersion(),
            SuiteTarget::Custom { immersion, .. } => immersion.clone(),
        }
    }

    pub fn fixture(&self) -> Option<&ExampleFixture> {
        match self {
            SuiteTarget::Catalog(fx) => Some(fx),
            SuiteTarget::Custom { .. } => None,
        }
    }
}

/// The ambient structure named by the program header, defaulting to the
/// standard structure of matching dimension.
pub(crate) fn resolve_ambient(
    program: &ExpressionProgram,
    base_dir: &Path,
) -> Result<HermitianStructure, SuiteError> {
    let n = program.output_dim();
    match &program.ambient {
        Some(AmbientSpec::Standard(m)) => Ok(standard_structure(*m)),
        Some(AmbientSpec::Matrix(p)) => Ok(load_phi_matrix(&base_dir.join(p))?),
        None if n.is_multiple_of(2) && n > 0 => Ok(standard_structure(n / 2)),
        None => Err(SuiteError::Config(format!(
            "immersion has {n} outputs; an almost Hermitian ambient needs an even dimension"
        ))),
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub target: SuiteTarget,
    pub points: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub fd_step: f64,
    pub margin: f64,
    pub mutation: Option<Mutation>,
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
}

impl SuiteConfig {
    pub fn new(target: SuiteTarget) -> Self {
        SuiteConfig {
            target,
            points: 50,
            seed: 7,
            tolerances: Tolerances::default(),
            fd_step: DEFAULT_FD_STEP,
            margin: DEFAULT_MARGIN,
            mutation: None,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.points == 0 {
            return Err(SuiteError::Config("at least one point is required".into()));
        }
        if !(self.fd_step > 1e-8 && self.fd_step < 1e-2) {
            return Err(SuiteError::Config(format!(
                "fd step must lie in (1e-8, 1e-2), got {}",
                self.fd_step
            )));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return Err(SuiteError::Config("margin must be nonnegative".into()));
        }
        if self.workers == Some(0) {
            return Err(SuiteError::Config("worker count must be positive".into()));
        }
        Ok(())
    }
}

/// Everything the checks need at one sampled point.
pub struct PointContext<'a> {
    pub index: usize,
    pub cov: CovariantData,
    pub config: &'a SuiteConfig,
    pub fixture: Option<&'a ExampleFixture>,
    pub slots: Vec<DistributionSlot>,
}

impl<'a> PointContext<'a> {
    pub fn new(
        config: &'a SuiteConfig,
        fixture: Option<&'a ExampleFixture>,
        immersion: &Immersion,
        index: usize,
        params: &[f64],
    ) -> Result<Self, GeometryError> {
        let cov = immersion.covariant_data(params, config.tolerances.cluster, config.fd_step)?;
        let slots = build_slots(&cov, fixture)?;
        Ok(PointContext {
            index,
            cov,
            config,
            fixture,
            slots,
        })
    }

    pub fn point(&self) -> PointRef<'_> {
        PointRef {
            index: self.index,
            params: &self.cov.base.params,
        }
    }

    pub fn tol(&self, class: ToleranceClass) -> f64 {
        self.config.tolerances.get(class)
    }

    pub fn mutation(&self) -> Option<Mutation> {
        self.config.mutation
    }

    /// Independent random stream `stream` for this point.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let seed = self
            .config
            .seed
            .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
        argument_rng(seed, self.index)
    }
}

/// Per-point output of [`analyze_point`].
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub results: Vec<CheckResult>,
    pub norms: HypothesisNorms,
    pub multiplicities: Vec<usize>,
    /// (distribution label, θ) for every matched slot.
    pub angles: Vec<(usize, f64)>,
    pub ambiguous: bool,
    pub one_sided: bool,
    pub ill_conditioned: bool,
}

/// Runs every check at one point. Parallel-family statuses are provisional
/// until the sample-wide hypothesis norms are known.
pub fn analyze_point(ctx: &PointContext) -> PointOutcome {
    let mut results = check_algebraic(ctx);
    results.extend(check_slant(ctx));
    results.extend(check_gauss_weingarten(ctx));
    results.extend(check_kahler_identities(ctx));
    results.extend(check_frame_brackets(ctx));
    for slot in &ctx.slots {
        results.extend(check_integrability(ctx, slot));
    }
    results.extend(check_codazzi_expansion(ctx));
    results.extend(check_parallel_conditionals(ctx));

    let g = &ctx.cov.base;
    let angles = ctx
        .slots
        .iter()
        .filter_map(|s| s.cluster.map(|c| (s.label, g.decomposition.clusters[c].angle)))
        .collect();
    PointOutcome {
        results,
        norms: hypothesis_norms(&ctx.cov),
        multiplicities: g.decomposition.multiplicities(),
        angles,
        ambiguous: g.decomposition.ambiguous,
        one_sided: ctx.cov.one_sided(),
        ill_conditioned: g.christoffels.ill_conditioned,
    }
}

/// Samples points, runs all checks and aggregates a report. Deterministic
/// for a fixed configuration regardless of the worker count.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    config.validate()?;
    let mut fixture = config.target.fixture().cloned();
    if config.mutation == Some(Mutation::MisassignedFrame) {
        if let Some(fx) = fixture.as_mut() {
            if fx.expected_assignment.len() > 2 {
                fx.expected_assignment.swap(1, 2);
            }
        }
    }
    let mut immersion = config.target.immersion();
    if config.mutation == Some(Mutation::PhiSignFlip) {
        immersion.ambient = immersion.ambient.with_flipped_entry(1, 0);
    }

    let program = &immersion.program;
    let points = sample_points(
        &program.domain,
        program.arity,
        config.points,
        config.seed,
        config.margin,
    )?;

    let work = |(i, x): (usize, &Vec<f64>)| -> Result<PointOutcome, String> {
        let ctx = PointContext::new(config, fixture.as_ref(), &immersion, i, x).map_err(|e| e.to_string())?;
        Ok(analyze_point(&ctx))
    };
    let outcomes: Vec<Result<PointOutcome, String>> = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SuiteError::Config(e.to_string()))?
            .install(|| points.par_iter().enumerate().map(work).collect()),
        None => points.par_iter().enumerate().map(work).collect(),
    };

    let mut norms = HypothesisNorms::default();
    for o in outcomes.iter().flatten() {
        norms = norms.max(o.norms);
    }
    let hyp_tol = config.tolerances.hypothesis;

    let mut results = Vec::new();
    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    let mut angles: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut evidence = Evidence {
        hypotheses: norms,
        nabla_t_parallel: norms.nabla_t <= hyp_tol,
        nabla_n_parallel: norms.nabla_n <= hyp_tol,
        angles: Vec::new(),
        ambiguous_points: Vec::new(),
        one_sided_points: Vec::new(),
        ill_conditioned_points: Vec::new(),
        errors: Vec::new(),
    };
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                for mut r in o.results {
                    regate(&mut r, &norms, hyp_tol);
                    results.push(r);
                }
                let pattern: Vec<String> = o.multiplicities.iter().map(|m| m.to_string()).collect();
                *histogram.entry(pattern.join(",")).or_default() += 1;
                for (label, theta) in o.angles {
                    angles.entry(label).or_default().push(theta);
                }
                if o.ambiguous {
                    evidence.ambiguous_points.push(i);
                }
                if o.one_sided {
                    evidence.one_sided_points.push(i);
                }
                if o.ill_conditioned {
                    evidence.ill_conditioned_points.push(i);
                }
            }
            Err(msg) => {
                let p = PointRef {
                    index: i,
                    params: &points[i],
                };
                results.push(CheckResult::judged("geometry.construct", &p, f64::INFINITY, 0.0));
                evidence.errors.push((i, msg));
            }
        }
    }
    results.sort_by(|a, b| {
        a.check_id
            .cmp(&b.check_id)
            .then(a.point_index.cmp(&b.point_index))
    });
    evidence.angles = angles
        .into_iter()
        .map(|(label, v)| angle_stat(format!("D{label}"), &v))
        .collect();

    let (target, source_hash, k) = match &config.target {
        SuiteTarget::Catalog(fx) => (fx.id(), None, Some(fx.k)),
        SuiteTarget::Custom { label, source_hash, .. } => (label.clone(), Some(source_hash.clone()), None),
    };
    Ok(SuiteReport {
        config: ReportConfig {
            target,
            source_hash,
            k,
            points: config.points,
            seed: config.seed,
            margin: config.margin,
            fd_step: config.fd_step,
            tolerances: config.tolerances,
            mutation: config.mutation.map(|m| m.name().to_string()),
            projected_fields: fixture.is_none(),
        },
        summary: summarize(&results),
        results,
        histogram,
        evidence,
    })
}
