//! Integrability of the distributions Dᵢ: bracket closure, the three
//! characterizing conditions, and the two identities behind them.

use super::fields::{bracket, nabla, nabla_of_t, DistributionSlot};
use super::{amax, CheckResult, PointContext, Status, ToleranceClass};
use crate::connection_geometry::lie_bracket;

/// Runs every integrability family for the distribution in `slot`.
pub fn check_integrability(ctx: &PointContext, slot: &DistributionSlot) -> Vec<CheckResult> {
    let cov = &ctx.cov;
    let g = &cov.base;
    let p = ctx.point();
    let tol = ctx.tol(ToleranceClass::Derivative);
    let id = |name: &str| format!("integrability.D{}.{name}", slot.label);
    let is_d0 = slot.label == 0;
    let mut names = vec!["bracket_closure", "cond_i", "cond_iii", "proof_iii"];
    if is_d0 {
        names.extend(["cond_ii", "proof_ii"]);
    }

    let Some(ci) = slot.cluster.filter(|_| !slot.fields.is_empty()) else {
        let status = if g.decomposition.ambiguous {
            Status::Ambiguous
        } else {
            Status::Fail
        };
        return names
            .iter()
            .map(|n| CheckResult::with_status(id(n), &p, f64::INFINITY, tol, status))
            .collect();
    };
    let out_of_slot = &g.tan_proj - &g.cluster_proj[ci];
    let d0_complement = g
        .decomposition
        .clusters
        .iter()
        .position(|c| c.kind == crate::tangent_geometry::ClusterKind::Invariant)
        .map(|c0| &g.tan_proj - &g.cluster_proj[c0])
        .unwrap_or_else(|| g.tan_proj.clone());

    let mut closure = 0.0f64;
    let mut cond_ii = 0.0f64;
    let mut proof_ii = 0.0f64;
    let mut cond_iii = 0.0f64;
    let mut proof_iii = 0.0f64;
    for (a, x) in slot.fields.iter().enumerate() {
        for y in &slot.fields[a + 1..] {
            let br = bracket(cov, x, y);
            closure = closure.max(amax(&(&out_of_slot * &br)));

            let expr = nabla_of_t(cov, &x.value, y) - nabla_of_t(cov, &y.value, x)
                + g.shape(&(&g.big_n_amb * &x.value), &y.value)
                - g.shape(&(&g.big_n_amb * &y.value), &x.value);
            cond_iii = cond_iii.max(amax(&(&out_of_slot * &expr)));
            proof_iii = proof_iii.max(amax(&(&g.t_amb * &br - &expr)));

            if is_d0 {
                let lhs = g.h(&x.value, &(&g.t_amb * &y.value)) - g.h(&(&g.t_amb * &x.value), &y.value);
                cond_ii = cond_ii.max(amax(&lhs));
                let predicted = &g.big_n_amb * (&d0_complement * &br);
                proof_ii = proof_ii.max(amax(&(lhs - predicted)));
            }
        }
    }
    let integrable = closure <= tol;

    let mut cond_i = 0.0f64;
    for other in ctx.slots.iter().filter(|s| s.label != slot.label) {
        for z in &other.fields {
            for (a, x) in slot.fields.iter().enumerate() {
                for y in &slot.fields[a..] {
                    let r = x.value.dot(&nabla(cov, &y.value, z)) - y.value.dot(&nabla(cov, &x.value, z));
                    cond_i = cond_i.max(r.abs());
                }
            }
        }
    }

    let closure_status = if integrable {
        Status::Pass
    } else {
        Status::HypothesisNotMet
    };
    let mut out = vec![
        CheckResult::with_status(id("bracket_closure"), &p, closure, tol, closure_status),
        CheckResult::gated(id("cond_i"), &p, cond_i, tol, integrable),
        CheckResult::gated(id("cond_iii"), &p, cond_iii, tol, integrable),
        CheckResult::judged(id("proof_iii"), &p, proof_iii, tol),
    ];
    if is_d0 {
        out.push(CheckResult::gated(id("cond_ii"), &p, cond_ii, tol, integrable));
        out.push(CheckResult::judged(id("proof_ii"), &p, proof_ii, tol));
    }
    out
}

/// Lie brackets of every pair of catalog frame fields, from exact jets.
pub(crate) fn check_frame_brackets(ctx: &PointContext) -> Option<CheckResult> {
    let fx = ctx.fixture?;
    let params = &ctx.cov.base.params;
    let mut worst = 0.0f64;
    for (a, x) in fx.frames.iter().enumerate() {
        for y in &fx.frames[a + 1..] {
            if worst.is_nan() {
                break;
            }
            worst = match lie_bracket(x, y, params) {
                Ok(b) => worst.max(amax(&b)),
                Err(_) => f64::NAN,
            };
        }
    }
    Some(CheckResult::judged(
        "integrability.frame_brackets",
        &ctx.point(),
        worst,
        ctx.tol(ToleranceClass::Exact),
    ))
}
