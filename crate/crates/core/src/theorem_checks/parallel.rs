//! Consequences of ∇T = 0 and ∇N = 0, asserted only when the measured
//! hypothesis holds over the whole sample.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::fields::{cluster_basis, nabla};
use super::{amax, CheckResult, Mutation, PointContext, Status, ToleranceClass};
use crate::connection_geometry::{CovariantData, PointGeometry, TensorField};
use crate::tangent_geometry::ClusterKind;

/// Max-abs norms of ∇T, ∇N, ∇t, ∇n over orthonormal arguments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HypothesisNorms {
    pub nabla_t: f64,
    pub nabla_n: f64,
    pub nabla_small_t: f64,
    pub nabla_small_n: f64,
}

impl HypothesisNorms {
    /// Componentwise maximum.
    pub fn max(self, other: HypothesisNorms) -> HypothesisNorms {
        HypothesisNorms {
            nabla_t: self.nabla_t.max(other.nabla_t),
            nabla_n: self.nabla_n.max(other.nabla_n),
            nabla_small_t: self.nabla_small_t.max(other.nabla_small_t),
            nabla_small_n: self.nabla_small_n.max(other.nabla_small_n),
        }
    }
}

pub fn hypothesis_norms(cov: &CovariantData) -> HypothesisNorms {
    let g = &cov.base;
    let e = &g.frame.tan_basis;
    let f = &g.frame.nor_basis;
    let mut out = HypothesisNorms::default();
    for i in 0..e.ncols() {
        let x = e.column(i).into_owned();
        for j in 0..e.ncols() {
            let y = e.column(j).into_owned();
            let dt = cov.covariant_tensor_derivative(TensorField::BigT, &x, &y);
            let dn = cov.covariant_tensor_derivative(TensorField::BigN, &x, &y);
            out.nabla_t = out.nabla_t.max(amax(&dt));
            out.nabla_n = out.nabla_n.max(amax(&dn));
        }
        for a in 0..f.ncols() {
            let v = f.column(a).into_owned();
            let dt = cov.covariant_tensor_derivative(TensorField::SmallT, &x, &v);
            let dn = cov.covariant_tensor_derivative(TensorField::SmallN, &x, &v);
            out.nabla_small_t = out.nabla_small_t.max(amax(&dt));
            out.nabla_small_n = out.nabla_small_n.max(amax(&dn));
        }
    }
    out
}

/// Which hypothesis a parallel-family check depends on.
pub(crate) fn family_of(check_id: &str) -> Option<bool> {
    if check_id.starts_with("parallel.nabla_T.") {
        Some(true)
    } else if check_id.starts_with("parallel.nabla_N.") {
        Some(false)
    } else {
        None
    }
}

/// Re-gates a parallel-family result against the sample-wide hypothesis
/// norms: pass/fail become hypothesis-not-met when the hypothesis fails.
pub(crate) fn regate(result: &mut CheckResult, norms: &HypothesisNorms, hyp_tol: f64) {
    let Some(is_t) = family_of(&result.check_id) else {
        return;
    };
    let holds = if is_t {
        norms.nabla_t <= hyp_tol
    } else {
        norms.nabla_n <= hyp_tol
    };
    if !holds && matches!(result.status, Status::Pass | Status::Fail) {
        result.status = Status::HypothesisNotMet;
    }
}

fn columns(m: &DMatrix<f64>) -> Vec<DVector<f64>> {
    m.column_iter().map(|c| c.into_owned()).collect()
}

/// Residuals of every consequence of ∇T = 0 and ∇N = 0 at the point, judged
/// as if the hypotheses held; [`regate`] applies the sample-wide gate.
pub fn check_parallel_conditionals(ctx: &PointContext) -> Vec<CheckResult> {
    let cov = &ctx.cov;
    let g = &cov.base;
    let p = ctx.point();
    let tol = ctx.tol(ToleranceClass::Derivative);
    let dec = &g.decomposition;
    let e = columns(&g.frame.tan_basis);
    let f = columns(&g.frame.nor_basis);
    let h = |x: &DVector<f64>, y: &DVector<f64>| perturbed_h(ctx, g, x, y);
    let t = |x: &DVector<f64>| &g.t_amb * x;
    let n2 = &g.small_n_amb * &g.small_n_amb;

    let mut shape_symmetry = 0.0f64;
    let mut prop = [0.0f64; 3];
    for x in &e {
        for y in &e {
            let lhs = g.shape(&(&g.big_n_amb * y), x) - g.shape(&(&g.big_n_amb * x), y);
            shape_symmetry = shape_symmetry.max(amax(&lhs));
            prop[0] = prop[0].max(amax(&(h(&t(x), y) - h(x, &t(y)))));
        }
        for v in &f {
            let av = g.shape_ambient(v);
            let av_tx = &av * t(x);
            prop[1] = prop[1].max(amax(&(t(&(&av * x)) + &av_tx)));
            prop[2] = prop[2].max(amax(&(g.shape(&(&g.small_n_amb * v), x) + &av_tx)));
        }
    }

    let d0 = dec.clusters.iter().position(|c| c.kind == ClusterKind::Invariant);
    let bases: Vec<DMatrix<f64>> = (0..dec.clusters.len()).map(|i| cluster_basis(g, i)).collect();
    let mut n2h_d0 = 0.0f64;
    let mut mixed = 0.0f64;
    let mut n2h_di = 0.0f64;
    let mut t2_shape = 0.0f64;
    if let Some(c0) = d0 {
        let b0 = columns(&bases[c0]);
        for x in &b0 {
            for y in &b0 {
                let hxy = h(x, y);
                n2h_d0 = n2h_d0.max(amax(&(&n2 * &hxy + &hxy)));
            }
        }
        for (i, bi) in bases.iter().enumerate() {
            if i == c0 {
                continue;
            }
            let bi = columns(bi);
            for x in &b0 {
                for y in &bi {
                    mixed = mixed.max(amax(&h(x, y)));
                }
            }
        }
    }
    let t2 = &g.t_amb * &g.t_amb;
    for (i, bi) in bases.iter().enumerate() {
        let c = dec.clusters[i].cos2;
        let bi = columns(bi);
        for x in &bi {
            for y in &bi {
                let hxy = h(x, y);
                n2h_di = n2h_di.max(amax(&(&n2 * &hxy + &hxy * c)));
            }
            for v in &f {
                let ax = g.shape(v, x);
                t2_shape = t2_shape.max(amax(&(&t2 * &ax + &ax * c)));
            }
        }
    }

    // D₀ and its complement closed under ∇ (spanning fields of each slot).
    let mut complete = 0.0f64;
    if let Some(c0) = d0 {
        let p0 = &g.cluster_proj[c0];
        let rest = &g.tan_proj - p0;
        for slot in &ctx.slots {
            let proj = if slot.cluster == Some(c0) { &rest } else { p0 };
            for y in &slot.fields {
                for x in &e {
                    complete = complete.max(amax(&(proj * nabla(cov, x, y))));
                }
            }
        }
    }

    let amb = dec.ambiguous;
    vec![
        CheckResult::judged("parallel.nabla_T.shape_symmetry", &p, shape_symmetry, tol),
        CheckResult::unless_ambiguous("parallel.nabla_T.n2h_D0", &p, n2h_d0, tol, amb),
        CheckResult::unless_ambiguous("parallel.nabla_T.complete_integrability", &p, complete, tol, amb),
        CheckResult::judged("parallel.nabla_N.prop_1", &p, prop[0], tol),
        CheckResult::judged("parallel.nabla_N.prop_2", &p, prop[1], tol),
        CheckResult::judged("parallel.nabla_N.prop_3", &p, prop[2], tol),
        CheckResult::unless_ambiguous("parallel.nabla_N.mixed_geodesic", &p, mixed, tol, amb),
        CheckResult::unless_ambiguous("parallel.nabla_N.n2h_Di", &p, n2h_di, tol, amb),
        CheckResult::unless_ambiguous("parallel.nabla_N.T2_shape", &p, t2_shape, tol, amb),
    ]
}

/// h, or h + g(X,e)g(Y,e)ν under the second-fundamental-form mutation, with
/// e and ν the first tangent and normal frame vectors.
fn perturbed_h(ctx: &PointContext, g: &PointGeometry, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let mut out = g.h(x, y);
    if ctx.mutation() == Some(Mutation::PerturbSecondFundamentalForm) && g.frame.codim() > 0 {
        let e = g.frame.tan_basis.column(0);
        let nu = g.frame.nor_basis.column(0);
        out.axpy(x.dot(&e) * y.dot(&e), &nu.into_owned(), 1.0);
    }
    out
}
