use std::path::Path;

use proptest::prelude::*;

use slantlab::theorem_checks::{
    run_suite, sample_points, summarize, Status, SuiteConfig, SuiteTarget,
};

fn config(id: &str, points: usize) -> SuiteConfig {
    let mut cfg = SuiteConfig::new(SuiteTarget::catalog(id, 2).unwrap());
    cfg.points = points;
    cfg
}

#[test]
fn results_are_sorted_and_summarized() {
    let r = run_suite(&config("pointwise:2", 4)).unwrap();
    assert!(r
        .results
        .windows(2)
        .all(|w| (&w[0].check_id, w[0].point_index) <= (&w[1].check_id, w[1].point_index)));
    assert_eq!(r.summary, summarize(&r.results));
    assert_eq!(r.histogram.get("2,2,1"), Some(&4));
    assert!(r.evidence.errors.is_empty());
}

#[test]
fn parallel_family_is_gated_on_the_whole_sample() {
    // The example immersions have ∇T ≠ 0, so none of their consequences may be asserted.
    let r = run_suite(&config("kslant:2", 4)).unwrap();
    assert!(!r.evidence.nabla_t_parallel && !r.evidence.nabla_n_parallel);
    for res in r.results.iter().filter(|x| x.check_id.starts_with("parallel.")) {
        assert!(matches!(res.status, Status::HypothesisNotMet | Status::Ambiguous), "{res:?}");
    }
    // The complex plane has ∇T = ∇N = 0 and every consequence holds.
    let r = run_suite(&config("geodesic", 4)).unwrap();
    assert!(r.evidence.nabla_t_parallel && r.evidence.nabla_n_parallel);
    let parallel: Vec<_> = r.results.iter().filter(|x| x.check_id.starts_with("parallel.")).collect();
    assert!(!parallel.is_empty());
    assert!(parallel.iter().all(|x| x.status == Status::Pass));
}

#[test]
fn worker_count_is_invisible() {
    let mut a = config("pointwise:3", 5);
    a.workers = Some(1);
    let mut b = a.clone();
    b.workers = Some(4);
    assert_eq!(run_suite(&a).unwrap(), run_suite(&b).unwrap());
}

#[test]
fn custom_targets_report_their_hash() {
    let src = "dim 2 -> 4\ndomain norm < 1\nx1\n0.6*x2\n0\n0.8*x2\n";
    let target = SuiteTarget::from_source("plane", src, Path::new(".")).unwrap();
    let mut cfg = SuiteConfig::new(target);
    cfg.points = 3;
    let r = run_suite(&cfg).unwrap();
    assert_eq!(r.exit_code(), 0);
    assert!(r.config.projected_fields);
    // sha256sum of the source text.
    assert_eq!(
        r.config.source_hash.as_deref(),
        Some("c2c3ba078b66b7fead9443f7191dd0eac5990bcab89d2ba6825fa39baf2a445b")
    );
    assert_eq!(r.evidence.angles.len(), 1);
    assert!((r.evidence.angles[0].mean - 0.6f64.acos()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn samples_respect_the_domain(seed in any::<u64>(), count in 1usize..40) {
        let fx = slantlab::catalog::pointwise_example(2).unwrap();
        let pts = sample_points(&fx.domain, 5, count, seed, 0.05).unwrap();
        prop_assert_eq!(pts.len(), count);
        for p in &pts {
            prop_assert!(fx.domain.iter().all(|d| d.admits(p, 0.05)));
        }
        prop_assert_eq!(pts, sample_points(&fx.domain, 5, count, seed, 0.05).unwrap());
    }
}

#[test]
fn json_reports_round_trip_exactly() {
    let r = run_suite(&config("pointwise:2", 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    slantlab::theorem_checks::write_json(&r, &mut std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(slantlab::theorem_checks::read_report(&path).unwrap(), r);
}
