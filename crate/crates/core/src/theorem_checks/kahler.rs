//! Covariant derivatives of T, N, t, n against their expressions in h and
//! the shape operators, valid for any submanifold of a Kähler manifold.

use nalgebra::DVector;

use super::{amax, CheckResult, Mutation, PointContext, ToleranceClass};

/// The four identities
/// (∇_X T)Y = A_{NY}X + t h(X,Y),  (∇_X N)Y = −h(X,TY) + n h(X,Y),
/// (∇_X t)V = A_{nV}X − T(A_V X),  (∇_X n)V = −h(X,tV) − N(A_V X),
/// with X, Y coordinate fields and V = P⊥·e_j.
pub fn check_kahler_identities(ctx: &PointContext) -> Vec<CheckResult> {
    let cov = &ctx.cov;
    let g = &cov.base;
    let (d, n) = (g.dim(), g.ambient_dim());
    let drop_shape = ctx.mutation() == Some(Mutation::DropShapeTerm);
    let mut res = [0.0f64; 4];
    for a in 0..d {
        let x = g.coord_field(a);
        for b in 0..d {
            let y = g.coord_field(b);
            let hxy = g.h(&x, &y);
            let mut rhs_t = g.shape(&(&g.big_n_amb * &y), &x);
            if !drop_shape {
                rhs_t += &g.small_t_amb * &hxy;
            }
            res[0] = res[0].max(amax(&(cov.nabla_big_t_coord(a, b) - rhs_t)));
            let rhs_n = -g.h(&x, &(&g.t_amb * &y)) + &g.small_n_amb * &hxy;
            res[1] = res[1].max(amax(&(cov.nabla_big_n_coord(a, b) - rhs_n)));
        }
        let lhs_t = cov.nabla_small_t_basis(a);
        let lhs_n = cov.nabla_small_n_basis(a);
        for j in 0..n {
            let v: DVector<f64> = g.nor_proj.column(j).into_owned();
            let av_x = g.shape(&v, &x);
            let rhs_t = g.shape(&(&g.small_n_amb * &v), &x) - &g.t_amb * &av_x;
            res[2] = res[2].max(amax(&(lhs_t.column(j) - rhs_t)));
            let rhs_n = -g.h(&x, &(&g.small_t_amb * &v)) - &g.big_n_amb * &av_x;
            res[3] = res[3].max(amax(&(lhs_n.column(j) - rhs_n)));
        }
    }
    let p = ctx.point();
    let tol = ctx.tol(ToleranceClass::Derivative);
    ["kahler.nabla_T", "kahler.nabla_N", "kahler.nabla_t", "kahler.nabla_n"]
        .iter()
        .zip(res)
        .map(|(id, r)| CheckResult::judged(*id, &p, r, tol))
        .collect()
}
