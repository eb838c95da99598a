//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use slantlab::catalog::{frame_vector, pointwise_example, ExampleFixture};
use slantlab::cli::run_cli;
use slantlab::connection_geometry::{Immersion, PointGeometry};
use slantlab::theorem_checks::{
    run_suite, sample_points, Mutation, Status, SuiteConfig, SuiteReport, SuiteTarget,
    DEFAULT_MARGIN, RANDOM_ARGUMENTS,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

static REPORTS: Mutex<Option<HashMap<String, SuiteReport>>> = Mutex::new(None);

/// Unmutated suite run, cached across criteria.
fn report(id: &str, points: usize) -> SuiteReport {
    let key = format!("{id}/{points}");
    let mut guard = REPORTS.lock().unwrap();
    let cache = guard.get_or_insert_with(HashMap::new);
    cache
        .entry(key)
        .or_insert_with(|| {
            let mut cfg = SuiteConfig::new(SuiteTarget::catalog(id, 2).unwrap());
            cfg.points = points;
            cfg.seed = 7;
            run_suite(&cfg).unwrap()
        })
        .clone()
}

const FIXTURES: [&str; 2] = ["pointwise:2", "kslant:3"];

fn max_residual(r: &SuiteReport, id: &str) -> Result<f64, String> {
    r.summary
        .checks
        .get(id)
        .map(|c| c.max_residual)
        .ok_or_else(|| format!("{}: no results for {id}", r.config.target))
}

/// Every result of `id` passed and stayed within `tol`.
fn all_pass(r: &SuiteReport, id: &str, tol: f64) -> Result<f64, String> {
    let c = r
        .summary
        .checks
        .get(id)
        .ok_or_else(|| format!("{}: no results for {id}", r.config.target))?;
    ensure(c.counts.pass == c.counts.total() && c.max_residual <= tol, || {
        format!(
            "{}: {id} max residual {:.3e} (tol {tol:.0e}), counts {:?}",
            r.config.target, c.max_residual, c.counts
        )
    })?;
    Ok(c.max_residual)
}

fn checks_matching<'a>(r: &'a SuiteReport, prefix: &str, suffix: &str) -> Vec<&'a String> {
    r.summary
        .checks
        .keys()
        .filter(|k| k.starts_with(prefix) && k.ends_with(suffix))
        .collect()
}

/// θ of the cluster that contains the catalog frame field `a`.
fn angle_of_frame(g: &PointGeometry, fx: &ExampleFixture, a: usize) -> f64 {
    let v = frame_vector(fx.kind, fx.k, a, &g.params);
    let vt = g.frame.tan_basis.transpose() * &v;
    let clusters = &g.decomposition.clusters;
    let best = clusters
        .iter()
        .max_by(|p, q| (&p.projector * &vt).norm().total_cmp(&(&q.projector * &vt).norm()))
        .unwrap();
    best.angle
}

fn samples(fx: &ExampleFixture, count: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_points(&fx.domain, fx.dim(), count, seed, DEFAULT_MARGIN).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in [2, 3] {
        let fx = pointwise_example(k).unwrap();
        let imm = fx.to_immersion();
        for x in samples(&fx, 100, 101) {
            let g = imm.geometry(&x, 1e-6).map_err(|e| e.to_string())?;
            for i in 2..=k {
                // y_j sits at parameter index j + 1.
                let (a, b) = (x[2 * i - 1], x[2 * i]);
                let c = 2.0 + ((i - 1) * (i - 1)) as f64;
                let expected = (2.0 / ((c + a * a) * (c + b * b)).sqrt()).acos();
                let measured = angle_of_frame(&g, &fx, fx.frames_of(i)[0]);
                worst = worst.max((measured - expected).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-8, || format!("max angle error {worst:.3e}"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("max |θ − θ_formula| = {worst:.2e} over k = 2, 3 in {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let fx = slantlab::catalog::kslant_example(3).unwrap();
    let imm = fx.to_immersion();
    let expected = [(1, FRAC_PI_2), (2, FRAC_PI_3), (3, (2.0f64 / 7.0).acos())];
    let mut per: Vec<Vec<f64>> = vec![Vec::new(); 3];
    let mut worst = 0.0f64;
    for x in samples(&fx, 100, 202) {
        let g = imm.geometry(&x, 1e-6).map_err(|e| e.to_string())?;
        for (slot, (i, want)) in expected.iter().enumerate() {
            let th = angle_of_frame(&g, &fx, fx.frames_of(*i)[0]);
            worst = worst.max((th - want).abs());
            per[slot].push(th);
        }
    }
    let stddev = per
        .iter()
        .map(|v| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|t| (t - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        })
        .fold(0.0f64, f64::max);
    ensure(worst <= 1e-8, || format!("max angle error {worst:.3e}"))?;
    ensure(stddev <= 1e-9, || format!("angle stddev {stddev:.3e}"))?;
    Ok(format!("max error {worst:.2e}, max stddev {stddev:.2e} over 100 points"))
}

const ALGEBRAIC: [&str; 7] = [
    "algebraic.TT_metric",
    "algebraic.NN_metric",
    "algebraic.T_skew",
    "algebraic.n_skew",
    "algebraic.T_squared",
    "algebraic.n_squared",
    "algebraic.tN_adjoint",
];

fn criterion_3() -> Outcome {
    ensure(RANDOM_ARGUMENTS == 20, || "argument count changed".into())?;
    let mut worst = 0.0f64;
    for id in FIXTURES {
        let r = report(id, 50);
        for check in ALGEBRAIC {
            worst = worst.max(all_pass(&r, check, 1e-8)?);
        }
    }
    Ok(format!("7 identities x 50 points x 2 fixtures, max residual {worst:.2e}"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for id in FIXTURES {
        let r = report(id, 50);
        for check in ["kahler.nabla_T", "kahler.nabla_N", "kahler.nabla_t", "kahler.nabla_n"] {
            worst = worst.max(all_pass(&r, check, 1e-6)?);
        }
    }
    let geo = report("geodesic", 50);
    let h = geo.evidence.hypotheses;
    let norm = h.nabla_t.max(h.nabla_n).max(h.nabla_small_t).max(h.nabla_small_n);
    ensure(norm <= 1e-9, || format!("geodesic fixture: {h:?}"))?;
    Ok(format!("lemma residual {worst:.2e}; geodesic tensor norms ≤ {norm:.2e}"))
}

/// Normal part of the central-difference Hessian, projected with a tangent
/// space also taken from central differences.
fn fd_second_fundamental_form(imm: &Immersion, x: &[f64]) -> Vec<Vec<DVector<f64>>> {
    let d = x.len();
    let f = |y: &[f64]| imm.program.eval_values(y).unwrap();
    let shifted = |pairs: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(a, s) in pairs {
            y[a] += s;
        }
        f(&y)
    };
    let h = 1e-4;
    let n = imm.program.output_dim();
    let mut jac = DMatrix::zeros(n, d);
    for a in 0..d {
        let col = (shifted(&[(a, h)]) - shifted(&[(a, -h)])) / (2.0 * h);
        jac.set_column(a, &col);
    }
    let gram = jac.transpose() * &jac;
    let proj = &jac * gram.try_inverse().unwrap() * jac.transpose();
    let perp = DMatrix::identity(n, n) - proj;
    let f0 = f(x);
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    let hess = if a == b {
                        (shifted(&[(a, h)]) - &f0 * 2.0 + shifted(&[(a, -h)])) / (h * h)
                    } else {
                        (shifted(&[(a, h), (b, h)]) - shifted(&[(a, h), (b, -h)])
                            - shifted(&[(a, -h), (b, h)])
                            + shifted(&[(a, -h), (b, -h)]))
                            / (4.0 * h * h)
                    };
                    &perp * hess
                })
                .collect()
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut oracle_gap = 0.0f64;
    let mut duality = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for id in FIXTURES {
        let fx = slantlab::catalog::CatalogId::build(&id.parse().unwrap(), 2).unwrap();
        let imm = fx.to_immersion();
        for x in samples(&fx, 10, 55) {
            let g = imm.geometry(&x, 1e-6).map_err(|e| e.to_string())?;
            let oracle = fd_second_fundamental_form(&imm, &x);
            for (a, row) in oracle.iter().enumerate() {
                for (b, h_ab) in row.iter().enumerate() {
                    let ours = g.h(&g.coord_field(a), &g.coord_field(b));
                    oracle_gap = oracle_gap.max((ours - h_ab).amax());
                }
            }
            let e = &g.frame.tan_basis;
            let nb = &g.frame.nor_basis;
            for _ in 0..20 {
                let xv = e * DVector::from_fn(e.ncols(), |_, _| rng.random_range(-1.0..1.0));
                let yv = e * DVector::from_fn(e.ncols(), |_, _| rng.random_range(-1.0..1.0));
                let v = nb * DVector::from_fn(nb.ncols(), |_, _| rng.random_range(-1.0..1.0));
                let lhs = g.h(&xv, &yv).dot(&v);
                let rhs = g.shape(&v, &xv).dot(&yv);
                duality = duality.max((lhs - rhs).abs());
            }
        }
        let r = report(id, 50);
        duality = duality.max(all_pass(&r, "weingarten.shape_duality", 1e-10)?);
    }
    ensure(oracle_gap <= 1e-6, || format!("h vs finite differences {oracle_gap:.3e}"))?;
    ensure(duality <= 1e-10, || format!("duality residual {duality:.3e}"))?;
    Ok(format!("h vs FD oracle {oracle_gap:.2e}; g(h(X,Y),V) − g(A_V X,Y) {duality:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut brackets = 0.0f64;
    let mut cond = 0.0f64;
    for id in FIXTURES {
        let r = report(id, 50);
        brackets = brackets.max(max_residual(&r, "integrability.frame_brackets")?);
        cond = cond.max(all_pass(&r, "integrability.D0.cond_ii", 1e-6)?);
        let iii = checks_matching(&r, "integrability.D", ".cond_iii");
        let proofs = checks_matching(&r, "integrability.D", ".proof_iii");
        ensure(iii.len() == r.config.k.unwrap() + 1, || format!("{id}: cond_iii for {iii:?}"))?;
        for check in iii.iter().chain(&proofs) {
            cond = cond.max(all_pass(&r, check, 1e-6)?);
        }
    }
    ensure(brackets <= 1e-12, || format!("frame bracket {brackets:.3e}"))?;
    Ok(format!("frame brackets {brackets:.2e}; conditions (ii), (iii) and proof identity ≤ {cond:.2e}"))
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for id in FIXTURES {
        worst = worst.max(all_pass(&report(id, 25), "codazzi.expansion", 1e-5)?);
    }
    // (y₂, y₃) = (1, 0) lies outside the unit-ball domain; the immersion is
    // smooth there, so the derivative is taken directly.
    let fx = pointwise_example(2).unwrap();
    let imm = fx.to_immersion();
    let x = [0.3, 0.4, 0.1, 1.0, 0.0];
    let cov = imm.covariant_data(&x, 1e-6, 1e-5).map_err(|e| e.to_string())?;
    let grad = cov.cos2_gradient().ok_or("cluster tables unavailable")?;
    let c = cov.base.decomposition.nearest_cluster(1.0 / 3.0).ok_or("no cluster near 1/3")?;
    let derivative = grad[3][c];
    ensure((derivative + 1.0 / 6.0).abs() <= 1e-4, || {
        format!("∂cos²θ₂/∂y₂ = {derivative:.8}")
    })?;
    Ok(format!("expansion residual {worst:.2e}; ∂cos²θ₂/∂y₂ = {derivative:.8}"))
}

fn criterion_8() -> Outcome {
    let mut lines = Vec::new();
    for m in Mutation::ALL {
        let target = match m {
            Mutation::PerturbSecondFundamentalForm => "geodesic",
            _ => "pointwise:2",
        };
        let mut cfg = SuiteConfig::new(SuiteTarget::catalog(target, 2).unwrap());
        cfg.points = 20;
        cfg.mutation = Some(m);
        let r = run_suite(&cfg).map_err(|e| e.to_string())?;
        let check = m.targeted_check();
        let hits = r.check(check);
        let fails = hits.iter().filter(|h| h.status == Status::Fail).count();
        let passes = hits.iter().filter(|h| h.status == Status::Pass).count();
        ensure(fails > 0 && passes == 0, || {
            format!("{}: {check} failed {fails}, passed {passes}", m.name())
        })?;
        lines.push(format!("{} → {check} {fails}/{}", m.name(), hits.len()));
    }
    Ok(lines.join("; "))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.json"));
        let code = run_cli([
            "slantlab",
            "verify",
            "pointwise:2",
            "--points",
            "50",
            "--seed",
            "7",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap(),
        ]);
        ensure(code == 0, || format!("verify exited {code}"))?;
        bytes.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(bytes[0] == bytes[1], || "reports differ".into())?;
    Ok(format!("two runs, {} identical bytes", bytes[0].len()))
}

fn criterion_10() -> Outcome {
    let mut cfg = SuiteConfig::new(SuiteTarget::catalog("pointwise:3", 2).unwrap());
    cfg.points = 200;
    let start = Instant::now();
    let r = run_suite(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(!r.has_failures(), || format!("{} failed results", r.summary.totals.fail))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} results in {elapsed:.2?}", r.results.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("slant functions of the pointwise example", criterion_1),
        ("constant angles of the k-slant example", criterion_2),
        ("algebraic identities", criterion_3),
        ("Kähler derivative identities", criterion_4),
        ("Gauss and Weingarten consistency", criterion_5),
        ("integrability evidence", criterion_6),
        ("Codazzi expansion and slant derivative", criterion_7),
        ("mutation sensitivity", criterion_8),
        ("determinism", criterion_9),
        ("k = 3 suite at 200 points", criterion_10),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", n + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
