//! Pointwise algebraic identities: the block structure of φ, the slant
//! decomposition, and the Gauss/Weingarten splitting.

use nalgebra::DMatrix;

use super::fields::cluster_basis;
use super::{amax, random_unit, CheckResult, PointContext, ToleranceClass, RANDOM_ARGUMENTS};
use crate::tangent_geometry::slant_angle;

/// Skew-adjointness of T and n, adjointness of N and t, the operator squares
/// of T and n, and the two metric identities for TX and NX.
pub fn check_algebraic(ctx: &PointContext) -> Vec<CheckResult> {
    let g = &ctx.cov.base;
    let split = &g.split;
    let dec = &g.decomposition;
    let (d, r) = (g.dim(), g.frame.codim());
    let mut rng = ctx.rng(0);
    let tol = ctx.tol(ToleranceClass::Algebraic);

    // Σ cos²θᵢ Pᵢ and the matching normal-side operator, with H weighted by 1.
    let mut t2_model = DMatrix::zeros(d, d);
    let mut n2_model = dec.h_projector.clone();
    let mut sin2_model = DMatrix::zeros(d, d);
    for c in &dec.clusters {
        t2_model += &c.projector * c.cos2;
        sin2_model += &c.projector * (1.0 - c.cos2);
        if let Some(q) = &c.normal_projector {
            n2_model += q * c.cos2;
        }
    }
    let t = &split.tan_tan;
    let big_n = &split.tan_nor;
    let small_t = &split.nor_tan;
    let n = &split.nor_nor;
    let t2 = t * t;
    let n2 = n * n;

    let mut res = [0.0f64; 7];
    for _ in 0..RANDOM_ARGUMENTS {
        let x = random_unit(&mut rng, d);
        let y = random_unit(&mut rng, d);
        let v = random_unit(&mut rng, r);
        let w = random_unit(&mut rng, r);
        res[0] = res[0].max(((t * &x).dot(&y) + x.dot(&(t * &y))).abs());
        res[1] = res[1].max(((big_n * &x).dot(&v) + x.dot(&(small_t * &v))).abs());
        res[2] = res[2].max(((n * &v).dot(&w) + v.dot(&(n * &w))).abs());
        res[3] = res[3].max(amax(&(&t2 * &x + &t2_model * &x)));
        res[4] = res[4].max(amax(&(&n2 * &v + &n2_model * &v)));
        let px_py: f64 = dec
            .clusters
            .iter()
            .map(|c| c.cos2 * (&c.projector * &x).dot(&(&c.projector * &y)))
            .sum();
        res[5] = res[5].max(((t * &x).dot(&(t * &y)) - px_py).abs());
        let nx_ny = (big_n * &x).dot(&(big_n * &y));
        res[6] = res[6].max((nx_ny - x.dot(&(&sin2_model * &y))).abs());
    }
    let p = ctx.point();
    let amb = dec.ambiguous;
    vec![
        CheckResult::judged("algebraic.T_skew", &p, res[0], tol),
        CheckResult::judged("algebraic.tN_adjoint", &p, res[1], tol),
        CheckResult::judged("algebraic.n_skew", &p, res[2], tol),
        CheckResult::unless_ambiguous("algebraic.T_squared", &p, res[3], tol, amb),
        CheckResult::unless_ambiguous("algebraic.n_squared", &p, res[4], tol, amb),
        CheckResult::unless_ambiguous("algebraic.TT_metric", &p, res[5], tol, amb),
        CheckResult::unless_ambiguous("algebraic.NN_metric", &p, res[6], tol, amb),
    ]
}

/// Slant-angle checks: every vector of a cluster has the cluster's angle; on
/// catalog fixtures the angles match the closed forms and the clusters span
/// the expected frame fields.
pub fn check_slant(ctx: &PointContext) -> Vec<CheckResult> {
    let g = &ctx.cov.base;
    let dec = &g.decomposition;
    let tol = ctx.tol(ToleranceClass::Algebraic);
    let p = ctx.point();
    let mut rng = ctx.rng(1);
    let mut out = Vec::new();

    let mut constancy = 0.0f64;
    for c in &dec.clusters {
        for _ in 0..RANDOM_ARGUMENTS {
            let coeffs = random_unit(&mut rng, c.multiplicity);
            let v = &c.basis * coeffs;
            let angle = slant_angle(&g.split, &v).unwrap_or(f64::NAN);
            constancy = constancy.max((angle - c.angle).abs());
        }
    }
    out.push(CheckResult::unless_ambiguous(
        "slant.angle_constancy",
        &p,
        constancy,
        tol,
        dec.ambiguous,
    ));

    if let Some(fx) = ctx.fixture {
        let matched = ctx.slots.iter().all(|s| s.cluster.is_some());
        let mut theta_err = 0.0f64;
        let mut span_err = 0.0f64;
        if matched {
            for slot in &ctx.slots {
                let ci = slot.cluster.expect("checked above");
                let expected = fx.expected_theta_at(slot.label, &g.params).unwrap_or(f64::NAN);
                theta_err = theta_err.max((dec.clusters[ci].angle - expected).abs());
                let basis = cluster_basis(g, ci);
                for f in &slot.fields {
                    let v = &f.value / f.value.norm();
                    let inside = &basis * (basis.transpose() * &v);
                    span_err = span_err.max((v - inside).norm());
                }
            }
        } else {
            theta_err = f64::INFINITY;
            span_err = f64::INFINITY;
        }
        out.push(CheckResult::unless_ambiguous(
            "slant.expected_theta",
            &p,
            theta_err,
            tol,
            dec.ambiguous,
        ));
        out.push(CheckResult::unless_ambiguous(
            "slant.assignment",
            &p,
            span_err,
            tol,
            dec.ambiguous,
        ));
    }
    out
}

/// ∂²f = J·Γ + h (exact split), g(h(X,Y),V) = g(A_V X, Y) on random
/// arguments, and the tangential Weingarten formula P·D_X V = −A_V X for the
/// normal fields V_j = P⊥·e_j.
pub fn check_gauss_weingarten(ctx: &PointContext) -> Vec<CheckResult> {
    let cov = &ctx.cov;
    let g = &cov.base;
    let (d, n) = (g.dim(), g.ambient_dim());
    let p = ctx.point();
    let exact = ctx.tol(ToleranceClass::Exact);

    let mut split = 0.0f64;
    for a in 0..d {
        for b in a..d {
            let total = g.jet.second_derivative(a, b);
            let recomposed = &g.jet.jacobian * g.christoffels.vector(a, b) + g.sff.ambient(&g.frame, a, b);
            split = split.max(amax(&(total - recomposed)) / (1.0 + amax(&g.jet.second_derivative(a, b))));
        }
    }

    let mut rng = ctx.rng(2);
    let mut duality = 0.0f64;
    let e = &g.frame.tan_basis;
    let f = &g.frame.nor_basis;
    for _ in 0..RANDOM_ARGUMENTS {
        let x = e * random_unit(&mut rng, d);
        let y = e * random_unit(&mut rng, d);
        let v = f * random_unit(&mut rng, g.frame.codim());
        let lhs = g.h(&x, &y).dot(&v);
        let rhs = g.shape(&v, &x).dot(&y);
        duality = duality.max((lhs - rhs).abs());
    }

    let mut weingarten = 0.0f64;
    for a in 0..d {
        let tangential = &g.tan_proj * (-cov.d_tan_proj(a));
        let x = g.coord_field(a);
        for j in 0..n {
            let v = g.nor_proj.column(j).into_owned();
            let expected = -g.shape(&v, &x);
            weingarten = weingarten.max(amax(&(tangential.column(j) - expected)));
        }
    }
    vec![
        CheckResult::judged("gauss.split", &p, split, exact),
        CheckResult::judged("weingarten.shape_duality", &p, duality, exact),
        CheckResult::judged(
            "weingarten.derivative",
            &p,
            weingarten,
            ctx.tol(ToleranceClass::Derivative),
        ),
    ]
}
