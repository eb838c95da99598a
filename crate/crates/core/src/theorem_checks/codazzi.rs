//! The expansion of ∇T² in terms of the slant functions and the projectors,
//! and its consequences for constant angles and Codazzi symmetry.

use nalgebra::DVector;

use super::fields::{bracket, components};
use super::{amax, CheckResult, Mutation, PointContext, Status, ToleranceClass};
use crate::catalog::FixtureKind;
use crate::connection_geometry::TensorField;

/// (∇_X T²)Y = −Σ X(cos²θᵢ)PᵢY + Σᵢⱼ (cos²θᵢ − cos²θⱼ) Pᵢ(∇_X PⱼY) for
/// coordinate X, Y, plus the derivative of the slant functions and the
/// per-distribution symmetry identities.
pub fn check_codazzi_expansion(ctx: &PointContext) -> Vec<CheckResult> {
    let cov = &ctx.cov;
    let g = &cov.base;
    let p = ctx.point();
    let tol2 = ctx.tol(ToleranceClass::SecondDerivative);
    let tol1 = ctx.tol(ToleranceClass::Derivative);
    let kind = ctx.fixture.map(|f| f.kind);
    let mut out = Vec::new();

    let gradient = match cov.cos2_gradient() {
        Some(gr) if !g.decomposition.ambiguous => gr,
        _ => {
            let mut ids = vec!["codazzi.expansion".to_string()];
            match kind {
                Some(FixtureKind::Pointwise) => ids.push("codazzi.slant_derivative".into()),
                Some(_) => ids.push("codazzi.angle_constancy".into()),
                None => {}
            }
            for slot in &ctx.slots {
                ids.push(format!("codazzi.D{}.symmetry", slot.label));
                ids.push(format!("codazzi.D{}.codazzi_tensor", slot.label));
            }
            return ids
                .into_iter()
                .map(|id| CheckResult::with_status(id, &p, f64::INFINITY, tol2, Status::Ambiguous))
                .collect();
        }
    };

    let d = g.dim();
    let clusters = &g.decomposition.clusters;
    let drop_angle = ctx.mutation() == Some(Mutation::DropAngleDerivativeTerm);
    let mut expansion = 0.0f64;
    for (a, grad_a) in gradient.iter().enumerate() {
        for b in 0..d {
            let lhs = cov.nabla_t2_coord(a, b);
            let y = g.coord_field(b);
            let mut rhs = DVector::zeros(g.ambient_dim());
            for (i, ci) in clusters.iter().enumerate() {
                if !drop_angle {
                    rhs.axpy(-grad_a[i], &(&g.cluster_proj[i] * &y), 1.0);
                }
                for (j, cj) in clusters.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let inner = cov.nabla_cluster_coord(a, j, b).expect("cluster tables present");
                    rhs.axpy(ci.cos2 - cj.cos2, &(&g.cluster_proj[i] * inner), 1.0);
                }
            }
            expansion = expansion.max(amax(&(lhs - rhs)));
        }
    }
    out.push(CheckResult::judged("codazzi.expansion", &p, expansion, tol2));

    match (kind, ctx.fixture) {
        (Some(FixtureKind::Pointwise), Some(fx)) => {
            let mut worst = 0.0f64;
            for slot in &ctx.slots {
                let Some(ci) = slot.cluster else {
                    worst = f64::INFINITY;
                    continue;
                };
                for (a, row) in gradient.iter().enumerate() {
                    let expected = fx
                        .expected_cos2_derivative(slot.label, &g.params, a)
                        .unwrap_or(f64::NAN);
                    worst = worst.max((row[ci] - expected).abs());
                }
            }
            out.push(CheckResult::judged("codazzi.slant_derivative", &p, worst, tol2));
        }
        (Some(_), _) => {
            let worst = gradient
                .iter()
                .flat_map(|row| row.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
            out.push(CheckResult::judged("codazzi.angle_constancy", &p, worst, tol1));
        }
        _ => {}
    }

    for slot in &ctx.slots {
        let sym_id = format!("codazzi.D{}.symmetry", slot.label);
        let tensor_id = format!("codazzi.D{}.codazzi_tensor", slot.label);
        let Some(ci) = slot.cluster else {
            out.push(CheckResult::judged(sym_id, &p, f64::INFINITY, tol2));
            out.push(CheckResult::judged(tensor_id, &p, f64::INFINITY, tol2));
            continue;
        };
        let directional = |v: &DVector<f64>| {
            let xi = components(cov, v);
            (0..d).map(|a| xi[a] * gradient[a][ci]).sum::<f64>()
        };
        let out_of_slot = &g.tan_proj - &g.cluster_proj[ci];
        let mut symmetry = 0.0f64;
        let mut asymmetry = 0.0f64;
        let mut angle_variation = 0.0f64;
        let mut closure = 0.0f64;
        for x in &slot.fields {
            angle_variation = angle_variation.max(directional(&x.value).abs());
        }
        for (a, x) in slot.fields.iter().enumerate() {
            for y in &slot.fields[a + 1..] {
                let lhs = cov.covariant_tensor_derivative(TensorField::TSquared, &x.value, &y.value)
                    - cov.covariant_tensor_derivative(TensorField::TSquared, &y.value, &x.value);
                let br = bracket(cov, x, y);
                closure = closure.max(amax(&(&out_of_slot * &br)));
                let mut rhs = &x.value * directional(&y.value) - &y.value * directional(&x.value);
                for (j, cj) in clusters.iter().enumerate() {
                    if j != ci {
                        rhs.axpy(cj.cos2 - clusters[ci].cos2, &(&g.cluster_proj[j] * &br), 1.0);
                    }
                }
                symmetry = symmetry.max(amax(&(&lhs - rhs)));
                asymmetry = asymmetry.max(amax(&lhs));
            }
        }
        let hypothesis = angle_variation <= ctx.tol(ToleranceClass::Hypothesis) && closure <= tol1;
        out.push(CheckResult::judged(sym_id, &p, symmetry, tol2));
        out.push(CheckResult::gated(tensor_id, &p, asymmetry, tol2, hypothesis));
    }
    out
}
