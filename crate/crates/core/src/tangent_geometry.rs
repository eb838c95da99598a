//! Pointwise first-order geometry: orthonormal tangent and normal frames, the
//! block decomposition of φ, the spectrum of −T² and the slant decomposition
//! of the tangent space.
//!
//! All vectors and matrices live in metric-orthonormal ambient coordinates
//! (see [`HermitianStructure::phi_orthonormal`]). Block operators are
//! expressed in the orthonormal frames of a [`PointFrame`]:
//!
//! | block     | maps              | size              |
//! |-----------|-------------------|-------------------|
//! | `tan_tan` | tangent → tangent | d × d             |
//! | `tan_nor` | tangent → normal  | (2m − d) × d      |
//! | `nor_tan` | normal → tangent  | d × (2m − d)      |
//! | `nor_nor` | normal → normal   | (2m − d) × (2m − d) |
//!
//! so that φX = TX + NX with T = `tan_tan`, N = `tan_nor`, and
//! φV = tV + nV with t = `nor_tan`, n = `nor_nor`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::HermitianStructure;
use crate::expr_dsl::{EvalError, Jet2};

/// Smallest admissible singular value of the Jacobian.
pub const RANK_TOL: f64 = 1e-8;
/// Default width for merging eigenvalues of −T² into one cluster.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
/// Eigenvalues of −T² outside `[-SPECTRUM_GUARD, 1 + SPECTRUM_GUARD]` indicate corruption.
pub const SPECTRUM_GUARD: f64 = 1e-6;
/// Clusters closer than this multiple of the cluster tolerance are ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 10.0;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("immersion is degenerate: smallest singular value {sigma:e} <= {RANK_TOL:e}")]
    Degenerate { sigma: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigenvalue {value} of -T^2 lies outside [0, 1]: frame or structure is corrupted")]
    SpectrumOutOfRange { value: f64 },
    #[error("slant angle of the zero vector is undefined")]
    ZeroVector,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// Orthonormal tangent and normal frames at one point of the immersion.
#[derive(Debug, Clone)]
pub struct PointFrame {
    pub params: Vec<f64>,
    pub ambient_point: DVector<f64>,
    /// Jacobian columns (pushforwards of the coordinate fields), 2m × d.
    pub coord_basis: DMatrix<f64>,
    /// Gram–Schmidt orthonormalization of `coord_basis`, 2m × d.
    pub tan_basis: DMatrix<f64>,
    /// Orthonormal completion, 2m × (2m − d).
    pub nor_basis: DMatrix<f64>,
    pub tan_projector: DMatrix<f64>,
    /// Upper-triangular R with `coord_basis = tan_basis · R`.
    pub coord_to_tan: DMatrix<f64>,
    /// Smallest singular value of the Jacobian.
    pub min_singular_value: f64,
    /// Spectral condition number of the Jacobian.
    pub condition_number: f64,
}

impl PointFrame {
    pub fn dim(&self) -> usize {
        self.tan_basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.tan_basis.nrows()
    }

    pub fn codim(&self) -> usize {
        self.nor_basis.ncols()
    }

    pub fn nor_projector(&self) -> DMatrix<f64> {
        &self.nor_basis * self.nor_basis.transpose()
    }

    /// Coordinate components ξ with X = Σ ξᵃ ∂ₐ for a tangent ambient vector X.
    pub fn coord_components(&self, x: &DVector<f64>) -> DVector<f64> {
        let y = self.tan_basis.transpose() * x;
        self.solve_upper(&y)
    }

    /// Solves R·ξ = y for the triangular factor R.
    pub fn solve_upper(&self, y: &DVector<f64>) -> DVector<f64> {
        self.coord_to_tan
            .solve_upper_triangular(y)
            .expect("R has a nonzero diagonal for full-rank frames")
    }
}

/// Modified Gram–Schmidt with one reorthogonalization pass against `basis`
/// (whose first `filled` columns are orthonormal). Returns the coefficients
/// and the residual vector.
fn orthogonalize(basis: &DMatrix<f64>, filled: usize, v: &mut DVector<f64>) -> DVector<f64> {
    let mut coeffs = DVector::zeros(filled);
    for _ in 0..2 {
        for i in 0..filled {
            let q = basis.column(i);
            let r = q.dot(v);
            coeffs[i] += r;
            v.axpy(-r, &q, 1.0);
        }
    }
    coeffs
}

/// Greedily extends the orthonormal columns of `start` to an orthonormal
/// basis of R^n, always adding the standard basis vector with the largest
/// residual. Returns only the new columns.
pub(crate) fn complete_basis(start: &DMatrix<f64>) -> DMatrix<f64> {
    let n = start.nrows();
    let have = start.ncols();
    let mut full = DMatrix::zeros(n, n);
    full.columns_mut(0, have).copy_from(start);
    let mut filled = have;
    let mut used = vec![false; n];
    while filled < n {
        let mut best: Option<(usize, f64, DVector<f64>)> = None;
        for (j, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut v = DVector::zeros(n);
            v[j] = 1.0;
            orthogonalize(&full, filled, &mut v);
            let norm = v.norm();
            if best.as_ref().is_none_or(|(_, b, _)| norm > *b) {
                best = Some((j, norm, v));
            }
        }
        let (j, norm, v) = best.expect("a candidate always remains");
        used[j] = true;
        full.set_column(filled, &(v / norm));
        filled += 1;
    }
    full.columns(have, n - have).into_owned()
}

/// Orthonormalizes the columns of `m` in order (they must be independent).
pub(crate) fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = DMatrix::zeros(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        orthogonalize(&q, j, &mut v);
        let norm = v.norm();
        q.set_column(j, &(v / norm));
    }
    q
}

/// Builds orthonormal frames at a point. The jet must already be expressed in
/// metric-orthonormal ambient coordinates.
pub fn build_frame(
    params: &[f64],
    jet: &Jet2,
    ambient: &HermitianStructure,
) -> Result<PointFrame, GeometryError> {
    let j = &jet.jacobian;
    let (n, d) = j.shape();
    if n != ambient.dim() {
        return Err(GeometryError::Dimension(format!(
            "immersion has {n} outputs, ambient dimension is {}",
            ambient.dim()
        )));
    }
    if d == 0 || d > n {
        return Err(GeometryError::Dimension(format!(
            "cannot immerse {d} parameters into R^{n}"
        )));
    }
    let sv = j.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if smin.is_nan() || smin <= RANK_TOL {
        return Err(GeometryError::Degenerate { sigma: smin });
    }

    let mut tan = DMatrix::zeros(n, d);
    let mut r = DMatrix::zeros(d, d);
    for c in 0..d {
        let mut v = j.column(c).into_owned();
        let coeffs = orthogonalize(&tan, c, &mut v);
        let norm = v.norm();
        r.view_mut((0, c), (c, 1)).copy_from(&coeffs);
        r[(c, c)] = norm;
        tan.set_column(c, &(v / norm));
    }
    let nor = complete_basis(&tan);
    let tan_projector = &tan * tan.transpose();

    Ok(PointFrame {
        params: params.to_vec(),
        ambient_point: jet.value.clone(),
        coord_basis: j.clone(),
        tan_basis: tan,
        nor_basis: nor,
        tan_projector,
        coord_to_tan: r,
        min_singular_value: smin,
        condition_number: smax / smin,
    })
}

/// The four blocks of φ relative to TM ⊕ T⊥M.
#[derive(Debug, Clone)]
pub struct PhiSplit {
    /// T
    pub tan_tan: DMatrix<f64>,
    /// N
    pub tan_nor: DMatrix<f64>,
    /// t
    pub nor_tan: DMatrix<f64>,
    /// n
    pub nor_nor: DMatrix<f64>,
}

impl PhiSplit {
    /// Reassembles `[[T, t], [N, n]]`.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        let d = self.tan_tan.nrows();
        let c = self.nor_nor.nrows();
        let mut m = DMatrix::zeros(d + c, d + c);
        m.view_mut((0, 0), (d, d)).copy_from(&self.tan_tan);
        m.view_mut((0, d), (d, c)).copy_from(&self.nor_tan);
        m.view_mut((d, 0), (c, d)).copy_from(&self.tan_nor);
        m.view_mut((d, d), (c, c)).copy_from(&self.nor_nor);
        m
    }
}

pub fn split_phi(frame: &PointFrame, ambient: &HermitianStructure) -> Result<PhiSplit, GeometryError> {
    if frame.ambient_dim() != ambient.dim() {
        return Err(GeometryError::Dimension(format!(
            "frame lives in R^{}, ambient is R^{}",
            frame.ambient_dim(),
            ambient.dim()
        )));
    }
    let phi = ambient.phi_orthonormal();
    let e = &frame.tan_basis;
    let f = &frame.nor_basis;
    let phi_e = phi * e;
    let phi_f = phi * f;
    Ok(PhiSplit {
        tan_tan: e.transpose() * &phi_e,
        tan_nor: f.transpose() * &phi_e,
        nor_tan: e.transpose() * &phi_f,
        nor_nor: f.transpose() * &phi_f,
    })
}

/// Eigenpairs of −T² = TᵀT, sorted by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct WirtingerSpectrum {
    /// Clamped into [0, 1].
    pub eigenvalues: Vec<f64>,
    /// Column `i` is the unit eigenvector of `eigenvalues[i]` (tangent frame coordinates).
    pub eigenvectors: DMatrix<f64>,
}

impl WirtingerSpectrum {
    /// Index ranges of eigenvalues merged by single linkage with gap `tol`.
    fn groups(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.eigenvalues.len() {
            if i == self.eigenvalues.len() || self.eigenvalues[i - 1] - self.eigenvalues[i] > tol {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// (mean eigenvalue, multiplicity) per cluster, descending.
    pub fn clusters(&self, tol: f64) -> Vec<(f64, usize)> {
        self.groups(tol)
            .into_iter()
            .map(|r| {
                let len = r.len();
                let mean = self.eigenvalues[r].iter().sum::<f64>() / len as f64;
                (mean, len)
            })
            .collect()
    }

    /// Whether every cluster with a nonzero eigenvalue has even multiplicity,
    /// as required for the square of a skew operator.
    pub fn is_paired(&self, tol: f64) -> bool {
        self.clusters(tol)
            .iter()
            .all(|&(value, mult)| value <= tol || mult % 2 == 0)
    }
}

/// Eigen-decomposition of the symmetric positive semidefinite matrix TᵀT.
pub fn wirtinger_spectrum(split: &PhiSplit) -> Result<WirtingerSpectrum, GeometryError> {
    let t = &split.tan_tan;
    let d = t.nrows();
    let mut s = t.transpose() * t;
    // exact symmetry before the eigen-solver
    s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut values = Vec::with_capacity(d);
    let mut vectors = DMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        let v = eig.eigenvalues[i];
        if !(-SPECTRUM_GUARD..=1.0 + SPECTRUM_GUARD).contains(&v) {
            return Err(GeometryError::SpectrumOutOfRange { value: v });
        }
        values.push(v.clamp(0.0, 1.0));
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(WirtingerSpectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterKind {
    /// Eigenvalue 1: φ-invariant, θ = 0.
    Invariant,
    /// Eigenvalue 0: θ = π/2.
    AntiInvariant,
    /// θ strictly between 0 and π/2.
    Slant,
}

/// One eigenvalue cluster of −T², i.e. one distribution Dᵢ at the point.
#[derive(Debug, Clone)]
pub struct SlantCluster {
    /// cos²θ, the mean eigenvalue of the cluster.
    pub cos2: f64,
    pub multiplicity: usize,
    /// θ in radians, computed as atan2(‖N·V‖, ‖T·V‖) over the cluster basis V.
    pub angle: f64,
    pub kind: ClusterKind,
    /// Orthonormal basis of Dᵢ in tangent-frame coordinates, d × multiplicity.
    pub basis: DMatrix<f64>,
    /// Pᵢ, d × d.
    pub projector: DMatrix<f64>,
    /// Orthonormal basis of N(Dᵢ) in normal-frame coordinates; `None` for D₀.
    pub normal_basis: Option<DMatrix<f64>>,
    /// Qᵢ; `None` for D₀.
    pub normal_projector: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone)]
pub struct SlantDecomposition {
    /// Ordered by decreasing cos²θ.
    pub clusters: Vec<SlantCluster>,
    /// Orthonormal basis of the φ-invariant normal complement H (normal-frame coordinates).
    pub h_basis: DMatrix<f64>,
    /// Q₀, projector onto H.
    pub h_projector: DMatrix<f64>,
    /// Two clusters closer than `AMBIGUITY_FACTOR × cluster_tol`.
    pub ambiguous: bool,
    /// Whether nonzero eigenvalues came in pairs.
    pub paired: bool,
    pub cluster_tol: f64,
}

impl SlantDecomposition {
    /// Multiplicities in cluster order.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }

    pub fn angles(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.angle).collect()
    }

    /// Index of the cluster whose cos²θ is closest to `cos2`.
    pub fn nearest_cluster(&self, cos2: f64) -> Option<usize> {
        self.clusters
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1.cos2 - cos2)
                    .abs()
                    .partial_cmp(&(b.1.cos2 - cos2).abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
    }

    /// The smallest gap between consecutive cluster eigenvalues (∞ for one cluster).
    pub fn min_gap(&self) -> f64 {
        self.clusters
            .windows(2)
            .map(|w| w[0].cos2 - w[1].cos2)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Groups the spectrum of −T² into distributions and builds Pᵢ, Qᵢ and Q₀.
pub fn detect_distributions(
    split: &PhiSplit,
    spectrum: &WirtingerSpectrum,
    cluster_tol: f64,
) -> SlantDecomposition {
    assert!(cluster_tol > 0.0, "cluster tolerance must be positive");
    let groups = spectrum.groups(cluster_tol);
    let codim = split.nor_nor.nrows();

    let mut ambiguous = false;
    for w in groups.windows(2) {
        let gap = spectrum.eigenvalues[w[0].end - 1] - spectrum.eigenvalues[w[1].start];
        if gap < AMBIGUITY_FACTOR * cluster_tol {
            ambiguous = true;
        }
    }

    let mut clusters = Vec::with_capacity(groups.len());
    let mut normal_cols: Vec<DMatrix<f64>> = Vec::new();
    for r in groups {
        let mult = r.len();
        let cos2 = spectrum.eigenvalues[r.clone()].iter().sum::<f64>() / mult as f64;
        let basis = orthonormalize(&spectrum.eigenvectors.columns(r.start, mult).into_owned());
        let projector = &basis * basis.transpose();
        let tv = &split.tan_tan * &basis;
        let nv = &split.tan_nor * &basis;
        let angle = nv.norm().atan2(tv.norm());
        let kind = if (1.0 - cos2) <= cluster_tol {
            ClusterKind::Invariant
        } else if cos2 <= cluster_tol {
            ClusterKind::AntiInvariant
        } else {
            ClusterKind::Slant
        };
        let (normal_basis, normal_projector) = if kind == ClusterKind::Invariant || codim == 0 {
            (None, None)
        } else {
            let u = orthonormalize(&nv);
            let q = &u * u.transpose();
            normal_cols.push(u.clone());
            (Some(u), Some(q))
        };
        clusters.push(SlantCluster {
            cos2,
            multiplicity: mult,
            angle,
            kind,
            basis,
            projector,
            normal_basis,
            normal_projector,
        });
    }

    let used: usize = normal_cols.iter().map(|m| m.ncols()).sum();
    let mut start = DMatrix::zeros(codim, used);
    let mut col = 0;
    for m in &normal_cols {
        start.columns_mut(col, m.ncols()).copy_from(m);
        col += m.ncols();
    }
    let h_basis = if used <= codim {
        complete_basis(&orthonormalize(&start))
    } else {
        DMatrix::zeros(codim, 0)
    };
    let h_projector = &h_basis * h_basis.transpose();

    SlantDecomposition {
        clusters,
        h_basis,
        h_projector,
        ambiguous,
        paired: spectrum.is_paired(cluster_tol),
        cluster_tol,
    }
}

/// Angle between φX and the tangent space for a tangent vector given in
/// tangent-frame coordinates; equals arccos(‖TX‖/‖X‖).
pub fn slant_angle(split: &PhiSplit, x: &DVector<f64>) -> Result<f64, GeometryError> {
    if x.norm() == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let tx = (&split.tan_tan * x).norm();
    let nx = (&split.tan_nor * x).norm();
    Ok(nx.atan2(tx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::standard_structure;
    use crate::expr_dsl::parse_immersion;

    fn frame_of(src: &str, x: &[f64], m: usize) -> (PointFrame, PhiSplit) {
        let p = parse_immersion(src).unwrap();
        let jet = p.eval_jet2(x).unwrap();
        let amb = standard_structure(m);
        let f = build_frame(x, &jet, &amb).unwrap();
        let s = split_phi(&f, &amb).unwrap();
        (f, s)
    }

    #[test]
    fn line_in_plane() {
        let (f, s) = frame_of("dim 1 -> 2\nx1\n0\n", &[1.0], 1);
        assert_eq!(f.tan_basis.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0]);
        assert_eq!(f.nor_basis.column(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert_eq!(s.tan_tan[(0, 0)], 0.0);
        assert!(s.tan_nor.norm() > 0.5);
        let spec = wirtinger_spectrum(&s).unwrap();
        assert_eq!(spec.clusters(DEFAULT_CLUSTER_TOL), vec![(0.0, 1)]);
    }

    #[test]
    fn degenerate_jacobian() {
        let p = parse_immersion("dim 1 -> 2\nx1^2\n0\n").unwrap();
        let jet = p.eval_jet2(&[0.0]).unwrap();
        let err = build_frame(&[0.0], &jet, &standard_structure(1)).unwrap_err();
        assert!(matches!(err, GeometryError::Degenerate { sigma } if sigma == 0.0));
    }

    #[test]
    fn invariant_plane() {
        let (f, s) = frame_of("dim 2 -> 4\nx1\nx2\n0\n0\n", &[0.2, 0.3], 2);
        assert!(s.tan_nor.amax() == 0.0 && s.nor_tan.amax() == 0.0);
        assert!((&s.tan_tan * &s.tan_tan + DMatrix::identity(2, 2)).amax() < 1e-15);
        let spec = wirtinger_spectrum(&s).unwrap();
        assert_eq!(spec.clusters(DEFAULT_CLUSTER_TOL), vec![(1.0, 2)]);
        let dec = detect_distributions(&s, &spec, DEFAULT_CLUSTER_TOL);
        assert_eq!(dec.clusters.len(), 1);
        assert_eq!(dec.clusters[0].kind, ClusterKind::Invariant);
        assert!((&dec.h_projector - DMatrix::identity(2, 2)).amax() < 1e-15);
        assert_eq!(f.codim(), 2);
    }

    #[test]
    fn frame_invariants_on_curved_surface() {
        let (f, s) = frame_of(
            "dim 2 -> 4\nx1*cos(x2)\nx1*sin(x2)\nx2\n0.5*x1^2\n",
            &[0.7, 0.4],
            2,
        );
        let d = f.dim();
        let e = &f.tan_basis;
        let n = &f.nor_basis;
        assert!((e.transpose() * e - DMatrix::identity(d, d)).amax() < 1e-12);
        assert!((n.transpose() * n - DMatrix::identity(2, 2)).amax() < 1e-12);
        assert!((e.transpose() * n).amax() < 1e-12);
        let p = &f.tan_projector;
        assert!((p * p - p).amax() < 1e-12);
        assert!((p.trace() - 2.0).abs() < 1e-12);
        assert!((p * &f.coord_basis - &f.coord_basis).amax() < 1e-12);
        assert!((&f.tan_basis * &f.coord_to_tan - &f.coord_basis).amax() < 1e-12);
        // T skew, N = -tᵀ
        assert!((&s.tan_tan + s.tan_tan.transpose()).amax() < 1e-12);
        assert!((&s.tan_nor + s.nor_tan.transpose()).amax() < 1e-12);
        assert!((&s.nor_nor + s.nor_nor.transpose()).amax() < 1e-12);
        let full = DMatrix::from_fn(4, 4, |r, c| if c < 2 { e[(r, c)] } else { n[(r, c - 2)] });
        let amb = standard_structure(2);
        let conj = full.transpose() * amb.phi() * &full;
        assert!((conj - s.block_matrix()).amax() < 1e-12);
    }

    #[test]
    fn slant_angle_zero_vector() {
        let (_, s) = frame_of("dim 1 -> 2\nx1\n0\n", &[1.0], 1);
        assert!(matches!(
            slant_angle(&s, &DVector::zeros(1)),
            Err(GeometryError::ZeroVector)
        ));
        let a = slant_angle(&s, &DVector::from_element(1, 2.0)).unwrap();
        assert_eq!(a, std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn ambiguity_flag() {
        // Two slant planes with cos² = 0.25 and 0.25 + 5e-6 are flagged.
        let spectrum = WirtingerSpectrum {
            eigenvalues: vec![0.25 + 5e-6, 0.25 + 5e-6, 0.25, 0.25],
            eigenvectors: DMatrix::identity(4, 4),
        };
        let split = PhiSplit {
            tan_tan: DMatrix::zeros(4, 4),
            tan_nor: DMatrix::identity(4, 4),
            nor_tan: DMatrix::identity(4, 4),
            nor_nor: DMatrix::zeros(4, 4),
        };
        let dec = detect_distributions(&split, &spectrum, DEFAULT_CLUSTER_TOL);
        assert_eq!(dec.multiplicities(), vec![2, 2]);
        assert!(dec.ambiguous);
        let dec = detect_distributions(&split, &spectrum, 1e-7);
        assert!(!dec.ambiguous);
        assert!(spectrum.is_paired(DEFAULT_CLUSTER_TOL));
    }

    #[test]
    fn unpaired_spectrum() {
        let spectrum = WirtingerSpectrum {
            eigenvalues: vec![0.5, 0.5, 0.5],
            eigenvectors: DMatrix::identity(3, 3),
        };
        assert!(!spectrum.is_paired(DEFAULT_CLUSTER_TOL));
    }

    #[test]
    fn complete_basis_is_orthonormal() {
        let start = orthonormalize(&DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]));
        let rest = complete_basis(&start);
        assert_eq!(rest.ncols(), 2);
        let mut all = DMatrix::zeros(4, 4);
        all.columns_mut(0, 2).copy_from(&start);
        all.columns_mut(2, 2).copy_from(&rest);
        assert!((all.transpose() * &all - DMatrix::identity(4, 4)).amax() < 1e-14);
    }
}
