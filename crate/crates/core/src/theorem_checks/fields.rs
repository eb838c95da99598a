//! Tangent vector fields spanning each distribution near a point, with their
//! ambient derivatives, plus the connection operations built on them.

use nalgebra::{DMatrix, DVector};

use crate::catalog::ExampleFixture;
use crate::connection_geometry::{match_clusters, CovariantData, PointGeometry, VectorFieldOnM};
use crate::tangent_geometry::{ClusterKind, GeometryError, SlantDecomposition};

/// A tangent field known at the base point through its ambient value and its
/// ambient derivatives D_a along every coordinate direction.
#[derive(Debug, Clone)]
pub struct SpanningField {
    pub value: DVector<f64>,
    /// `derivatives[a]` = D_{∂ₐ} of the field, as an ambient vector.
    pub derivatives: Vec<DVector<f64>>,
    /// Derivatives come from exact jets rather than finite differences.
    pub exact: bool,
    /// Coefficient program, when the field is given by one.
    pub program: Option<VectorFieldOnM>,
}

impl SpanningField {
    /// X = J·c(x): D_a X = Σ_b c^b ∂a∂b f + J·∂ₐc, all from exact jets.
    pub fn from_program(field: &VectorFieldOnM, g: &PointGeometry) -> Result<Self, GeometryError> {
        let c = field.coefficients.eval_jet1(&g.params)?;
        let d = g.dim();
        let j = &g.jet.jacobian;
        let derivatives = (0..d)
            .map(|a| {
                let mut v = j * c.jacobian.column(a);
                for b in 0..d {
                    v.axpy(c.value[b], &g.jet.second_derivative(a, b), 1.0);
                }
                v
            })
            .collect();
        Ok(SpanningField {
            value: j * &c.value,
            derivatives,
            exact: true,
            program: Some(field.clone()),
        })
    }

    /// Pᵢ·∂_c, differentiated on the stencil with clusters matched by
    /// eigenvalue. `None` if the clusters cannot be matched.
    pub fn projected(cov: &CovariantData, cluster: usize, coord: usize) -> Option<Self> {
        let base = &cov.base;
        let dec = &base.decomposition;
        let derivatives = (0..base.dim())
            .map(|a| {
                cov.field_derivative(a, |g| {
                    let m = match_clusters(dec, &g.decomposition)?;
                    let v = &g.cluster_proj[m[cluster]] * g.jet.jacobian.column(coord);
                    Some(DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
                })
                .map(|f| f.value.column(0).into_owned())
            })
            .collect::<Option<Vec<_>>>()?;
        Some(SpanningField {
            value: &base.cluster_proj[cluster] * base.jet.jacobian.column(coord),
            derivatives,
            exact: false,
            program: None,
        })
    }
}

/// One distribution Dᵢ at a point: its label, the matching eigenvalue
/// cluster and a set of spanning fields.
#[derive(Debug, Clone)]
pub struct DistributionSlot {
    /// i in Dᵢ (0 is reserved for the invariant distribution).
    pub label: usize,
    /// Index into the point's slant clusters; `None` when no cluster matches.
    pub cluster: Option<usize>,
    pub fields: Vec<SpanningField>,
}

/// Builds one slot per distribution. Catalog fixtures use their frame fields
/// and expected assignment; other immersions use projected coordinate fields,
/// choosing the coordinates whose projections are best conditioned.
pub fn build_slots(
    cov: &CovariantData,
    fixture: Option<&ExampleFixture>,
) -> Result<Vec<DistributionSlot>, GeometryError> {
    let g = &cov.base;
    let dec = &g.decomposition;
    match fixture {
        Some(fx) => {
            let n = fx.distribution_count();
            let mut clusters = vec![None; n];
            if dec.clusters.len() == n {
                let mut used = vec![false; n];
                let mut ok = true;
                for (i, slot) in clusters.iter_mut().enumerate() {
                    let expected = fx
                        .expected_cos2_at(i, &g.params)
                        .map_err(|e| GeometryError::Dimension(e.to_string()))?;
                    match dec.nearest_cluster(expected) {
                        Some(c) if !used[c] && dec.clusters[c].multiplicity == fx.frames_of(i).len() => {
                            used[c] = true;
                            *slot = Some(c);
                        }
                        _ => ok = false,
                    }
                }
                if !ok {
                    clusters = vec![None; n];
                }
            }
            (0..n)
                .map(|i| {
                    let fields = fx
                        .frames_of(i)
                        .into_iter()
                        .map(|a| SpanningField::from_program(&fx.frames[a], g))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(DistributionSlot {
                        label: i,
                        cluster: clusters[i],
                        fields,
                    })
                })
                .collect()
        }
        None => {
            let labels = cluster_labels(dec);
            Ok(dec
                .clusters
                .iter()
                .enumerate()
                .map(|(ci, c)| {
                    let coords = pick_coordinates(&(&g.cluster_proj[ci] * &g.jet.jacobian), c.multiplicity);
                    let fields = coords
                        .into_iter()
                        .map(|coord| SpanningField::projected(cov, ci, coord))
                        .collect::<Option<Vec<_>>>()
                        .unwrap_or_default();
                    DistributionSlot {
                        label: labels[ci],
                        cluster: Some(ci),
                        fields,
                    }
                })
                .collect())
        }
    }
}

/// Distribution indices for clusters with no fixture to consult: D0 for the
/// invariant cluster, D1 for the anti-invariant one, D2, D3, … for slant
/// clusters in order of decreasing cos²θ.
pub(crate) fn cluster_labels(dec: &SlantDecomposition) -> Vec<usize> {
    let mut next = 2;
    dec.clusters
        .iter()
        .map(|c| match c.kind {
            ClusterKind::Invariant => 0,
            ClusterKind::AntiInvariant => 1,
            _ => {
                next += 1;
                next - 1
            }
        })
        .collect()
}

/// Greedy column selection: repeatedly take the column with the largest
/// component orthogonal to those already chosen.
fn pick_coordinates(m: &DMatrix<f64>, count: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(count);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for _ in 0..count.min(m.ncols()) {
        let mut best = (0, -1.0, DVector::zeros(m.nrows()));
        for c in (0..m.ncols()).filter(|c| !chosen.contains(c)) {
            let mut r = m.column(c).into_owned();
            for q in &basis {
                let p = q.dot(&r);
                r.axpy(-p, q, 1.0);
            }
            let norm = r.norm();
            if norm > best.1 {
                best = (c, norm, r);
            }
        }
        chosen.push(best.0);
        if best.1 > 0.0 {
            basis.push(best.2 / best.1);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Coordinate components of a tangent vector.
pub(crate) fn components(cov: &CovariantData, v: &DVector<f64>) -> DVector<f64> {
    cov.base.frame.coord_components(v)
}

/// D_X Y (ambient derivative of Y along X).
pub(crate) fn ambient_derivative(cov: &CovariantData, x: &DVector<f64>, y: &SpanningField) -> DVector<f64> {
    let xi = components(cov, x);
    let mut out = DVector::zeros(cov.base.ambient_dim());
    for (a, d) in y.derivatives.iter().enumerate() {
        out.axpy(xi[a], d, 1.0);
    }
    out
}

/// ∇_X Y = P·D_X Y.
pub(crate) fn nabla(cov: &CovariantData, x: &DVector<f64>, y: &SpanningField) -> DVector<f64> {
    &cov.base.tan_proj * ambient_derivative(cov, x, y)
}

/// [X, Y] = D_X Y − D_Y X.
pub(crate) fn bracket(cov: &CovariantData, x: &SpanningField, y: &SpanningField) -> DVector<f64> {
    ambient_derivative(cov, &x.value, y) - ambient_derivative(cov, &y.value, x)
}

/// ∇_X (TY) = P·(D_X(PφP)·Y + PφP·D_X Y).
pub(crate) fn nabla_of_t(cov: &CovariantData, x: &DVector<f64>, y: &SpanningField) -> DVector<f64> {
    let g = &cov.base;
    let xi = components(cov, x);
    let mut out = DVector::zeros(g.ambient_dim());
    for (a, d) in y.derivatives.iter().enumerate() {
        if xi[a] == 0.0 {
            continue;
        }
        let v = cov.d_big_t(a) * &y.value + &g.t_amb * d;
        out.axpy(xi[a], &v, 1.0);
    }
    &g.tan_proj * out
}

/// Orthonormal basis of the cluster as ambient vectors (columns).
pub(crate) fn cluster_basis(g: &PointGeometry, cluster: usize) -> DMatrix<f64> {
    &g.frame.tan_basis * &g.decomposition.clusters[cluster].basis
}
