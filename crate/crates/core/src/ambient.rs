//! Constant almost Hermitian structures on flat space.
//!
//! Coordinates are interleaved `(u₁, v₁, …, u_m, v_m)`. Because the metric
//! and φ are constant in these coordinates, the ambient Levi-Civita
//! connection is the plain coordinate derivative and ∇̄φ = 0 holds
//! identically, so every structure accepted here is Kähler.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Max-abs residual accepted for φ² = −I and φᵀgφ = g.
pub const STRUCTURE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum AmbientError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("ambient dimension must be even and positive, got {0}")]
    OddDimension(usize),
    #[error("metric is not symmetric positive definite")]
    MetricNotPositive,
    #[error("structure residuals too large: phi^2 + I = {phi_square:e}, isometry = {isometry:e}")]
    Invalid { phi_square: f64, isometry: f64 },
    #[error("matrix file: {0}")]
    Format(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Max-abs residuals of the two structure identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureResiduals {
    /// ‖φ² + I‖_max
    pub phi_square: f64,
    /// ‖φᵀ·g·φ − g‖_max
    pub isometry: f64,
}

impl StructureResiduals {
    pub fn max(&self) -> f64 {
        self.phi_square.max(self.isometry)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianStructure {
    dim: usize,
    metric: DMatrix<f64>,
    phi: DMatrix<f64>,
    /// Lᵀ for the Cholesky factor g = L·Lᵀ; `None` for the identity metric.
    whitening: Option<DMatrix<f64>>,
    /// φ in g-orthonormal coordinates.
    phi_orthonormal: DMatrix<f64>,
}

/// The standard structure on R^{2m}: φ(∂/∂uᵢ) = −∂/∂vᵢ, φ(∂/∂vᵢ) = ∂/∂uᵢ.
pub fn standard_structure(m: usize) -> HermitianStructure {
    assert!(m >= 1, "complex dimension must be positive");
    let n = 2 * m;
    let mut phi = DMatrix::zeros(n, n);
    for i in 0..m {
        let (u, v) = (2 * i, 2 * i + 1);
        phi[(v, u)] = -1.0;
        phi[(u, v)] = 1.0;
    }
    HermitianStructure {
        dim: n,
        metric: DMatrix::identity(n, n),
        phi_orthonormal: phi.clone(),
        phi,
        whitening: None,
    }
}

/// Residuals of φ² = −I and φᵀgφ = g.
pub fn validate_structure(s: &HermitianStructure) -> Result<StructureResiduals, AmbientError> {
    residuals(&s.metric, &s.phi)
}

fn residuals(metric: &DMatrix<f64>, phi: &DMatrix<f64>) -> Result<StructureResiduals, AmbientError> {
    let n = phi.nrows();
    if phi.ncols() != n || metric.shape() != (n, n) {
        return Err(AmbientError::Dimension(format!(
            "phi is {}x{}, metric is {}x{}",
            phi.nrows(),
            phi.ncols(),
            metric.nrows(),
            metric.ncols()
        )));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let sq = phi * phi + &id;
    let iso = phi.transpose() * metric * phi - metric;
    Ok(StructureResiduals {
        phi_square: sq.amax(),
        isometry: iso.amax(),
    })
}

impl HermitianStructure {
    /// Validated structure with an arbitrary constant metric and φ.
    pub fn new(metric: DMatrix<f64>, phi: DMatrix<f64>) -> Result<Self, AmbientError> {
        let s = Self::new_unchecked(metric, phi)?;
        let r = validate_structure(&s)?;
        if r.max() > STRUCTURE_TOL {
            return Err(AmbientError::Invalid {
                phi_square: r.phi_square,
                isometry: r.isometry,
            });
        }
        Ok(s)
    }

    /// Validated structure with the identity metric.
    pub fn from_phi(phi: DMatrix<f64>) -> Result<Self, AmbientError> {
        let n = phi.nrows();
        Self::new(DMatrix::identity(n, n), phi)
    }

    /// Builds a structure without checking the Hermitian identities. Only the
    /// shape and positivity of the metric are enforced; used to construct
    /// corrupted fixtures.
    pub fn new_unchecked(metric: DMatrix<f64>, phi: DMatrix<f64>) -> Result<Self, AmbientError> {
        let n = phi.nrows();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(AmbientError::OddDimension(n));
        }
        residuals(&metric, &phi)?;
        let is_identity = metric == DMatrix::identity(n, n);
        let (whitening, phi_orthonormal) = if is_identity {
            (None, phi.clone())
        } else {
            if (&metric - metric.transpose()).amax() > STRUCTURE_TOL {
                return Err(AmbientError::MetricNotPositive);
            }
            let chol = metric
                .clone()
                .cholesky()
                .ok_or(AmbientError::MetricNotPositive)?;
            let lt = chol.l().transpose();
            let lt_inv = lt
                .clone()
                .try_inverse()
                .ok_or(AmbientError::MetricNotPositive)?;
            let phi_o = &lt * &phi * lt_inv;
            (Some(lt), phi_o)
        };
        Ok(HermitianStructure {
            dim: n,
            metric,
            phi,
            whitening,
            phi_orthonormal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn complex_dim(&self) -> usize {
        self.dim / 2
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// φ expressed in metric-orthonormal coordinates (equal to `phi` for the
    /// identity metric). The geometry modules work exclusively in these
    /// coordinates.
    pub fn phi_orthonormal(&self) -> &DMatrix<f64> {
        &self.phi_orthonormal
    }

    /// Map from coordinates to metric-orthonormal coordinates, if not the identity.
    pub fn whitening(&self) -> Option<&DMatrix<f64>> {
        self.whitening.as_ref()
    }

    /// g(a, b).
    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * &self.metric * b)[(0, 0)]
    }

    /// φ·v.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.phi * v
    }

    /// Returns a copy with one entry of φ sign-flipped (no validation).
    pub fn with_flipped_entry(&self, row: usize, col: usize) -> Self {
        let mut phi = self.phi.clone();
        phi[(row, col)] = -phi[(row, col)];
        Self::new_unchecked(self.metric.clone(), phi).expect("shape unchanged")
    }
}

/// Parses a whitespace-separated square matrix, row-major.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>, AmbientError> {
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| AmbientError::Format(format!("invalid entry `{t}`")))
        })
        .collect::<Result<_, _>>()?;
    let n = (values.len() as f64).sqrt().round() as usize;
    if n * n != values.len() || n == 0 {
        return Err(AmbientError::Format(format!(
            "{} entries do not form a square matrix",
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(n, n, &values))
}

/// Loads and validates a φ matrix file (identity metric).
pub fn load_phi_matrix(path: &Path) -> Result<HermitianStructure, AmbientError> {
    let text = std::fs::read_to_string(path).map_err(|source| AmbientError::Io {
        path: path.display().to_string(),
        source,
    })?;
    HermitianStructure::from_phi(parse_matrix(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn standard_m1() {
        let s = standard_structure(1);
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(s.apply(&e1), -&e2);
        assert_eq!(s.apply(&e2), e1);
    }

    #[test]
    fn standard_is_valid() {
        for m in 1..5 {
            let r = validate_structure(&standard_structure(m)).unwrap();
            assert_eq!((r.phi_square, r.isometry), (0.0, 0.0));
        }
    }

    #[test]
    fn isometry_m3() {
        let s = standard_structure(3);
        let mut v = DVector::zeros(6);
        v[0] = 1.0;
        let pv = s.apply(&v);
        assert_eq!(s.inner(&pv, &pv), 1.0);
    }

    #[test]
    fn identity_phi_rejected() {
        let r = residuals(&DMatrix::identity(2, 2), &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(r.phi_square, 2.0);
        assert!(HermitianStructure::from_phi(DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn sign_flip_detected() {
        let s = standard_structure(2).with_flipped_entry(1, 0);
        let r = validate_structure(&s).unwrap();
        assert!(r.phi_square > 0.5);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            residuals(&DMatrix::identity(4, 4), &DMatrix::identity(2, 2)),
            Err(AmbientError::Dimension(_))
        ));
        assert!(matches!(
            HermitianStructure::new_unchecked(DMatrix::identity(3, 3), DMatrix::identity(3, 3)),
            Err(AmbientError::OddDimension(3))
        ));
    }

    #[test]
    fn matrix_file_round_trip() {
        let m = parse_matrix("0 1\n-1 0\n").unwrap();
        let s = HermitianStructure::from_phi(m).unwrap();
        assert_eq!(s, standard_structure(1));
        assert!(parse_matrix("1 2 3").is_err());
        assert!(parse_matrix("1 x 3 4").is_err());
    }

    #[test]
    fn non_identity_metric_whitened() {
        // g = diag(4, 4): φ must still be the standard rotation.
        let metric = DMatrix::from_diagonal_element(2, 2, 4.0);
        let s = HermitianStructure::new(metric, standard_structure(1).phi().clone()).unwrap();
        let w = s.whitening().unwrap();
        assert!((w - DMatrix::from_diagonal_element(2, 2, 2.0)).amax() < 1e-15);
        assert!((s.phi_orthonormal() - standard_structure(1).phi()).amax() < 1e-15);
    }

    proptest! {
        #[test]
        fn skew_and_isometric(m in 1usize..5, seed in proptest::collection::vec(-3.0f64..3.0, 8)) {
            let s = standard_structure(m);
            let v = DVector::from_fn(2 * m, |i, _| seed[i % seed.len()] * (i as f64 + 1.0).sin());
            let pv = s.apply(&v);
            prop_assert!(s.inner(&pv, &v).abs() <= 1e-12);
            prop_assert!((pv.norm() - v.norm()).abs() <= 1e-12);
        }
    }
}
