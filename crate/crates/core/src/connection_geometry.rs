//! Second-order geometry at a point: second fundamental form, Christoffel
//! symbols, shape operators, Lie brackets and covariant derivatives of the
//! tensor fields T, N, t, n and T².
//!
//! Everything fixed by the 2-jet of the immersion (frames, h, Γ) is exact up
//! to round-off. Derivatives of frame-dependent operator fields are taken by
//! central differences with one Richardson step, always on the
//! ambient-coordinate representation of the field (never on frame
//! coefficients, which are not smooth in general) and projected afterwards.

use nalgebra::{DMatrix, DVector};

use crate::ambient::HermitianStructure;
use crate::expr_dsl::{EvalError, ExpressionProgram, Jet2};
use crate::tangent_geometry::{
    build_frame, detect_distributions, split_phi, wirtinger_spectrum, GeometryError, PhiSplit,
    PointFrame, SlantDecomposition, WirtingerSpectrum,
};

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Coordinate bases with a larger condition number carry a warning.
pub const CONDITION_WARNING: f64 = 1e8;

/// h in the coordinate frame: `components[α][(a, b)]` is the α-th normal-frame
/// coordinate of h(∂ₐ, ∂_b).
#[derive(Debug, Clone)]
pub struct SecondFundamentalForm {
    pub components: Vec<DMatrix<f64>>,
}

impl SecondFundamentalForm {
    /// The same form in the orthonormal tangent frame: R⁻ᵀ·hα·R⁻¹.
    pub fn in_tangent_frame(&self, frame: &PointFrame) -> Vec<DMatrix<f64>> {
        let r_inv = frame
            .coord_to_tan
            .clone()
            .try_inverse()
            .expect("R is invertible for full-rank frames");
        self.components
            .iter()
            .map(|h| r_inv.transpose() * h * &r_inv)
            .collect()
    }

    /// h(∂ₐ, ∂_b) as an ambient vector.
    pub fn ambient(&self, frame: &PointFrame, a: usize, b: usize) -> DVector<f64> {
        let coords = DVector::from_iterator(
            self.components.len(),
            self.components.iter().map(|h| h[(a, b)]),
        );
        &frame.nor_basis * coords
    }
}

/// Normal-frame coordinates of the normal projection of ∂²f/∂xₐ∂x_b.
pub fn second_fundamental_form(jet: &Jet2, frame: &PointFrame) -> SecondFundamentalForm {
    let d = frame.dim();
    let f = &frame.nor_basis;
    let mut components = vec![DMatrix::zeros(d, d); frame.codim()];
    for a in 0..d {
        for b in a..d {
            let second = jet.second_derivative(a, b);
            let normal = f.transpose() * second;
            for (alpha, h) in components.iter_mut().enumerate() {
                h[(a, b)] = normal[alpha];
                h[(b, a)] = normal[alpha];
            }
        }
    }
    SecondFundamentalForm { components }
}

/// Christoffel symbols of the induced connection in the coordinate frame.
#[derive(Debug, Clone)]
pub struct Christoffels {
    /// `symbols[c][(a, b)] = Γᶜ_ab`.
    pub symbols: Vec<DMatrix<f64>>,
    pub condition_number: f64,
    /// Set when the coordinate basis condition number exceeds [`CONDITION_WARNING`].
    pub ill_conditioned: bool,
}

impl Christoffels {
    /// Γ(·)_ab as a coordinate vector.
    pub fn vector(&self, a: usize, b: usize) -> DVector<f64> {
        DVector::from_iterator(self.symbols.len(), self.symbols.iter().map(|g| g[(a, b)]))
    }
}

/// Solves the least-squares system coord_basis·Γ(·)_ab = ∂²f/∂xₐ∂x_b.
pub fn tangential_connection(jet: &Jet2, frame: &PointFrame) -> Christoffels {
    let d = frame.dim();
    let mut symbols = vec![DMatrix::zeros(d, d); d];
    for a in 0..d {
        for b in a..d {
            let gamma = frame.coord_components(&jet.second_derivative(a, b));
            for (c, g) in symbols.iter_mut().enumerate() {
                g[(a, b)] = gamma[c];
                g[(b, a)] = gamma[c];
            }
        }
    }
    Christoffels {
        symbols,
        condition_number: frame.condition_number,
        ill_conditioned: frame.condition_number > CONDITION_WARNING,
    }
}

/// A_V in the orthonormal tangent frame, for V given in normal-frame coordinates.
pub fn shape_operator(
    sff: &SecondFundamentalForm,
    frame: &PointFrame,
    v: &DVector<f64>,
) -> DMatrix<f64> {
    let d = frame.dim();
    let mut a = DMatrix::zeros(d, d);
    for (h, &va) in sff.in_tangent_frame(frame).iter().zip(v.iter()) {
        a += h * va;
    }
    a
}

/// A vector field on M in the coordinate frame, X = Σ Xᵃ(x) ∂ₐ. The
/// coefficient program has `d` parameters and `d` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldOnM {
    pub coefficients: ExpressionProgram,
}

impl VectorFieldOnM {
    pub fn new(coefficients: ExpressionProgram) -> Result<Self, GeometryError> {
        if coefficients.output_dim() != coefficients.arity {
            return Err(GeometryError::Dimension(format!(
                "vector field has {} coefficients over {} parameters",
                coefficients.output_dim(),
                coefficients.arity
            )));
        }
        Ok(VectorFieldOnM { coefficients })
    }

    /// Parses one coefficient expression per coordinate.
    pub fn from_sources(sources: &[&str]) -> Result<Self, GeometryError> {
        let d = sources.len();
        let doc = format!("dim {d} -> {d}\n{}\n", sources.join("\n"));
        let program = crate::expr_dsl::parse_immersion(&doc).map_err(|e| {
            GeometryError::Dimension(format!("invalid vector field coefficients: {e}"))
        })?;
        Self::new(program)
    }

    /// The coordinate field ∂ₐ on a `d`-dimensional parameter space.
    pub fn coordinate(a: usize, d: usize) -> Self {
        let sources: Vec<&str> = (0..d).map(|i| if i == a { "1" } else { "0" }).collect();
        Self::from_sources(&sources).expect("constant coefficients always parse")
    }

    pub fn dim(&self) -> usize {
        self.coefficients.arity
    }

    pub fn eval(&self, x: &[f64]) -> Result<DVector<f64>, EvalError> {
        self.coefficients.eval_values(x)
    }
}

/// [X, Y]ᶜ = Σₐ (Xᵃ ∂ₐYᶜ − Yᵃ ∂ₐXᶜ), exact from first-order jets.
pub fn lie_bracket(
    x_field: &VectorFieldOnM,
    y_field: &VectorFieldOnM,
    at: &[f64],
) -> Result<DVector<f64>, GeometryError> {
    if x_field.dim() != y_field.dim() || at.len() != x_field.dim() {
        return Err(GeometryError::Dimension(
            "vector fields and point must share the parameter dimension".into(),
        ));
    }
    let jx = x_field.coefficients.eval_jet1(at)?;
    let jy = y_field.coefficients.eval_jet1(at)?;
    Ok(&jy.jacobian * &jx.value - &jx.jacobian * &jy.value)
}

/// Result of a finite-difference derivative.
#[derive(Debug, Clone)]
pub struct FieldDerivative {
    pub value: DMatrix<f64>,
    /// Max-abs difference between the step-h and step-h/2 estimates.
    pub richardson_gap: f64,
    /// A stencil point failed and a one-sided formula was used.
    pub one_sided: bool,
}

/// Samples at x + h, x − h, x + h/2, x − h/2 in that order.
const STENCIL_OFFSETS: [f64; 4] = [1.0, -1.0, 0.5, -0.5];

fn richardson(
    base: Option<&DMatrix<f64>>,
    samples: [Option<&DMatrix<f64>>; 4],
    h: f64,
) -> Option<FieldDerivative> {
    match samples {
        [Some(p), Some(m), Some(p2), Some(m2)] => {
            let d_h = (p - m) / (2.0 * h);
            let d_h2 = (p2 - m2) / h;
            let gap = (&d_h2 - &d_h).amax();
            Some(FieldDerivative {
                value: (d_h2 * 4.0 - d_h) / 3.0,
                richardson_gap: gap,
                one_sided: false,
            })
        }
        [Some(p), _, Some(p2), _] => one_sided(base?, p, p2, h),
        [_, Some(m), _, Some(m2)] => one_sided(base?, m, m2, -h),
        _ => None,
    }
}

fn one_sided(
    base: &DMatrix<f64>,
    far: &DMatrix<f64>,
    near: &DMatrix<f64>,
    h: f64,
) -> Option<FieldDerivative> {
    let d_h = (far - base) / h;
    let d_h2 = (near - base) / (h / 2.0);
    let gap = (&d_h2 - &d_h).amax();
    Some(FieldDerivative {
        value: d_h2 * 2.0 - d_h,
        richardson_gap: gap,
        one_sided: true,
    })
}

/// Derivative along ∂ₐ of an ambient-valued field of the parameters, by
/// central differences with one Richardson extrapolation (steps h and h/2).
/// Falls back to one-sided differences when a stencil point cannot be
/// evaluated.
pub fn ambient_field_derivative<F>(
    field: F,
    direction: usize,
    x: &[f64],
    step: f64,
) -> Result<FieldDerivative, GeometryError>
where
    F: Fn(&[f64]) -> Option<DMatrix<f64>>,
{
    if direction >= x.len() {
        return Err(GeometryError::Dimension(format!(
            "direction {direction} out of range for {} parameters",
            x.len()
        )));
    }
    let eval_at = |offset: f64| {
        let mut y = x.to_vec();
        y[direction] += offset * step;
        field(&y)
    };
    let samples: Vec<Option<DMatrix<f64>>> = STENCIL_OFFSETS.iter().map(|&o| eval_at(o)).collect();
    let base = field(x);
    richardson(
        base.as_ref(),
        [
            samples[0].as_ref(),
            samples[1].as_ref(),
            samples[2].as_ref(),
            samples[3].as_ref(),
        ],
        step,
    )
    .ok_or_else(|| GeometryError::Dimension("field could not be evaluated around the point".into()))
}

/// An immersion together with its ambient structure.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub program: ExpressionProgram,
    pub ambient: HermitianStructure,
}

impl Immersion {
    pub fn new(program: ExpressionProgram, ambient: HermitianStructure) -> Result<Self, GeometryError> {
        if program.output_dim() != ambient.dim() {
            return Err(GeometryError::Dimension(format!(
                "immersion has {} outputs, ambient dimension is {}",
                program.output_dim(),
                ambient.dim()
            )));
        }
        Ok(Immersion { program, ambient })
    }

    pub fn dim(&self) -> usize {
        self.program.arity
    }

    /// The 2-jet in metric-orthonormal ambient coordinates.
    pub fn jet(&self, x: &[f64]) -> Result<Jet2, GeometryError> {
        let jet = self.program.eval_jet2(x)?;
        Ok(match self.ambient.whitening() {
            Some(w) => jet.transformed(w),
            None => jet,
        })
    }

    pub fn geometry(&self, x: &[f64], cluster_tol: f64) -> Result<PointGeometry, GeometryError> {
        PointGeometry::new(self, x, cluster_tol)
    }

    pub fn covariant_data(
        &self,
        x: &[f64],
        cluster_tol: f64,
        fd_step: f64,
    ) -> Result<CovariantData, GeometryError> {
        CovariantData::new(self, x, cluster_tol, fd_step)
    }
}

/// Everything known at one point from the 2-jet, plus ambient-coordinate
/// versions of the block operators.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub params: Vec<f64>,
    pub jet: Jet2,
    pub frame: PointFrame,
    pub split: PhiSplit,
    pub spectrum: WirtingerSpectrum,
    pub decomposition: SlantDecomposition,
    pub sff: SecondFundamentalForm,
    pub christoffels: Christoffels,
    /// φ in orthonormal ambient coordinates.
    pub phi: DMatrix<f64>,
    /// Tangent projector P.
    pub tan_proj: DMatrix<f64>,
    /// Normal projector I − P.
    pub nor_proj: DMatrix<f64>,
    /// P·φ·P (T on tangent vectors).
    pub t_amb: DMatrix<f64>,
    /// (I − P)·φ·P (N on tangent vectors).
    pub big_n_amb: DMatrix<f64>,
    /// P·φ·(I − P) (t on normal vectors).
    pub small_t_amb: DMatrix<f64>,
    /// (I − P)·φ·(I − P) (n on normal vectors).
    pub small_n_amb: DMatrix<f64>,
    /// Ambient projectors onto each Dᵢ, in cluster order.
    pub cluster_proj: Vec<DMatrix<f64>>,
    /// hα in the orthonormal tangent frame.
    h_tangent: Vec<DMatrix<f64>>,
}

impl PointGeometry {
    pub fn new(imm: &Immersion, x: &[f64], cluster_tol: f64) -> Result<Self, GeometryError> {
        let jet = imm.jet(x)?;
        let frame = build_frame(x, &jet, &imm.ambient)?;
        let split = split_phi(&frame, &imm.ambient)?;
        let spectrum = wirtinger_spectrum(&split)?;
        let decomposition = detect_distributions(&split, &spectrum, cluster_tol);
        let sff = second_fundamental_form(&jet, &frame);
        let christoffels = tangential_connection(&jet, &frame);
        let phi = imm.ambient.phi_orthonormal().clone();
        let tan_proj = frame.tan_projector.clone();
        let n = frame.ambient_dim();
        let nor_proj = DMatrix::identity(n, n) - &tan_proj;
        let t_amb = &tan_proj * &phi * &tan_proj;
        let big_n_amb = &nor_proj * &phi * &tan_proj;
        let small_t_amb = &tan_proj * &phi * &nor_proj;
        let small_n_amb = &nor_proj * &phi * &nor_proj;
        let e = &frame.tan_basis;
        let cluster_proj = decomposition
            .clusters
            .iter()
            .map(|c| e * &c.projector * e.transpose())
            .collect();
        let h_tangent = sff.in_tangent_frame(&frame);
        Ok(PointGeometry {
            params: x.to_vec(),
            jet,
            frame,
            split,
            spectrum,
            decomposition,
            sff,
            christoffels,
            phi,
            tan_proj,
            nor_proj,
            t_amb,
            big_n_amb,
            small_t_amb,
            small_n_amb,
            cluster_proj,
            h_tangent,
        })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.ambient_dim()
    }

    /// ∂ₐ as an ambient vector.
    pub fn coord_field(&self, a: usize) -> DVector<f64> {
        self.jet.jacobian.column(a).into_owned()
    }

    /// ∇_{∂ₐ}∂_b = P·∂²f/∂xₐ∂x_b.
    pub fn nabla_coord(&self, a: usize, b: usize) -> DVector<f64> {
        &self.tan_proj * self.jet.second_derivative(a, b)
    }

    /// h(X, Y) for tangent ambient vectors.
    pub fn h(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let e = &self.frame.tan_basis;
        let xt = e.transpose() * x;
        let yt = e.transpose() * y;
        let coords = DVector::from_iterator(
            self.h_tangent.len(),
            self.h_tangent.iter().map(|h| (xt.transpose() * h * &yt)[(0, 0)]),
        );
        &self.frame.nor_basis * coords
    }

    /// A_V as an ambient operator (2m × 2m, acting on tangent vectors).
    pub fn shape_ambient(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let vn = self.frame.nor_basis.transpose() * v;
        let a = shape_operator_from_tangent(&self.h_tangent, &vn);
        let e = &self.frame.tan_basis;
        e * a * e.transpose()
    }

    /// A_V X for a normal vector V and tangent vector X.
    pub fn shape(&self, v: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
        self.shape_ambient(v) * x
    }

    /// T²·J as a 2m × d matrix.
    pub fn t2_jacobian(&self) -> DMatrix<f64> {
        &self.t_amb * (&self.t_amb * &self.jet.jacobian)
    }
}

fn shape_operator_from_tangent(h_tangent: &[DMatrix<f64>], v: &DVector<f64>) -> DMatrix<f64> {
    let d = h_tangent.first().map_or(0, |h| h.nrows());
    let mut a = DMatrix::zeros(d, d);
    for (h, &va) in h_tangent.iter().zip(v.iter()) {
        a += h * va;
    }
    a
}

/// Index map from `base` clusters to `other` clusters, when the two
/// decompositions have the same shape and every base cluster is closest to its
/// counterpart. `None` signals a crossing or rank change.
pub fn match_clusters(base: &SlantDecomposition, other: &SlantDecomposition) -> Option<Vec<usize>> {
    if base.ambiguous
        || other.ambiguous
        || base.clusters.len() != other.clusters.len()
        || base.multiplicities() != other.multiplicities()
    {
        return None;
    }
    let guard = base.min_gap() / 2.0;
    let mut out = Vec::with_capacity(base.clusters.len());
    for (i, c) in base.clusters.iter().enumerate() {
        let j = other.nearest_cluster(c.cos2)?;
        if j != i || (other.clusters[j].cos2 - c.cos2).abs() >= guard {
            return None;
        }
        out.push(j);
    }
    Some(out)
}

/// Which operator field a covariant derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorField {
    /// T: tangent → tangent.
    BigT,
    /// N: tangent → normal.
    BigN,
    /// t: normal → tangent.
    SmallT,
    /// n: normal → normal.
    SmallN,
    /// T²: tangent → tangent.
    TSquared,
}

/// Base-point geometry plus the finite-difference stencil around it and the
/// derivative tables used by the covariant-derivative operators.
#[derive(Debug, Clone)]
pub struct CovariantData {
    pub base: PointGeometry,
    pub fd_step: f64,
    stencil: Vec<[Option<PointGeometry>; 4]>,
    /// D_a(T·J), D_a(N·J), D_a(P φ P⊥), D_a(P⊥ φ P⊥), D_a P, D_a(T²·J).
    d_t_jac: Vec<FieldDerivative>,
    d_n_jac: Vec<FieldDerivative>,
    d_t_nor: Vec<FieldDerivative>,
    d_n_nor: Vec<FieldDerivative>,
    d_tan_proj: Vec<FieldDerivative>,
    d_t2_jac: Vec<FieldDerivative>,
    /// D_a(P φ P).
    d_t_amb: Vec<FieldDerivative>,
    /// `[a][j]`: D_a(P_j·J); `None` if cluster matching failed on the stencil.
    d_cluster_jac: Option<Vec<Vec<FieldDerivative>>>,
    /// `[a][j]`: ∂ₐ cos²θ_j.
    d_cos2: Option<Vec<Vec<f64>>>,
}

impl CovariantData {
    pub fn new(
        imm: &Immersion,
        x: &[f64],
        cluster_tol: f64,
        fd_step: f64,
    ) -> Result<Self, GeometryError> {
        let base = PointGeometry::new(imm, x, cluster_tol)?;
        let d = base.dim();
        let stencil: Vec<[Option<PointGeometry>; 4]> = (0..d)
            .map(|a| {
                STENCIL_OFFSETS.map(|o| {
                    let mut y = x.to_vec();
                    y[a] += o * fd_step;
                    PointGeometry::new(imm, &y, cluster_tol).ok()
                })
            })
            .collect();
        let mut data = CovariantData {
            base,
            fd_step,
            stencil,
            d_t_jac: Vec::new(),
            d_n_jac: Vec::new(),
            d_t_nor: Vec::new(),
            d_n_nor: Vec::new(),
            d_tan_proj: Vec::new(),
            d_t2_jac: Vec::new(),
            d_t_amb: Vec::new(),
            d_cluster_jac: None,
            d_cos2: None,
        };
        let need = |r: Option<FieldDerivative>| {
            r.ok_or_else(|| {
                GeometryError::Dimension("stencil evaluation failed in every direction".into())
            })
        };
        for a in 0..d {
            let t_jac = need(data.field_derivative(a, |g| Some(&g.t_amb * &g.jet.jacobian)))?;
            let n_jac = need(data.field_derivative(a, |g| Some(&g.big_n_amb * &g.jet.jacobian)))?;
            let t_nor = need(data.field_derivative(a, |g| Some(g.small_t_amb.clone())))?;
            let n_nor = need(data.field_derivative(a, |g| Some(g.small_n_amb.clone())))?;
            let tan = need(data.field_derivative(a, |g| Some(g.tan_proj.clone())))?;
            let t2 = need(data.field_derivative(a, |g| Some(g.t2_jacobian())))?;
            let t_amb = need(data.field_derivative(a, |g| Some(g.t_amb.clone())))?;
            data.d_t_amb.push(t_amb);
            data.d_t_jac.push(t_jac);
            data.d_n_jac.push(n_jac);
            data.d_t_nor.push(t_nor);
            data.d_n_nor.push(n_nor);
            data.d_tan_proj.push(tan);
            data.d_t2_jac.push(t2);
        }
        data.build_cluster_tables();
        Ok(data)
    }

    fn build_cluster_tables(&mut self) {
        let d = self.base.dim();
        let nclusters = self.base.decomposition.clusters.len();
        let mut jac = Vec::with_capacity(d);
        let mut cos2 = Vec::with_capacity(d);
        for a in 0..d {
            let mut row_jac = Vec::with_capacity(nclusters);
            let mut row_cos = Vec::with_capacity(nclusters);
            for j in 0..nclusters {
                let base = &self.base.decomposition;
                let proj = self.field_derivative(a, |g| {
                    let m = match_clusters(base, &g.decomposition)?;
                    Some(&g.cluster_proj[m[j]] * &g.jet.jacobian)
                });
                let c = self.field_derivative(a, |g| {
                    let m = match_clusters(base, &g.decomposition)?;
                    Some(DMatrix::from_element(1, 1, g.decomposition.clusters[m[j]].cos2))
                });
                match (proj, c) {
                    (Some(p), Some(c)) if !self.base.decomposition.ambiguous => {
                        row_jac.push(p);
                        row_cos.push(c.value[(0, 0)]);
                    }
                    _ => return,
                }
            }
            jac.push(row_jac);
            cos2.push(row_cos);
        }
        self.d_cluster_jac = Some(jac);
        self.d_cos2 = Some(cos2);
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Geometry at the stencil point `x + offset·h·eₐ`, offsets in {h, −h, h/2, −h/2}.
    pub fn stencil_point(&self, a: usize, sample: usize) -> Option<&PointGeometry> {
        self.stencil.get(a)?.get(sample)?.as_ref()
    }

    /// Derivative along ∂ₐ of an ambient-coordinate field evaluated on the
    /// cached stencil geometries.
    pub fn field_derivative<F>(&self, a: usize, field: F) -> Option<FieldDerivative>
    where
        F: Fn(&PointGeometry) -> Option<DMatrix<f64>>,
    {
        let row = self.stencil.get(a)?;
        let samples: Vec<Option<DMatrix<f64>>> =
            row.iter().map(|g| g.as_ref().and_then(&field)).collect();
        let base = field(&self.base);
        richardson(
            base.as_ref(),
            [
                samples[0].as_ref(),
                samples[1].as_ref(),
                samples[2].as_ref(),
                samples[3].as_ref(),
            ],
            self.fd_step,
        )
    }

    /// Whether any tabulated derivative needed a one-sided formula.
    pub fn one_sided(&self) -> bool {
        [
            &self.d_t_jac,
            &self.d_n_jac,
            &self.d_t_nor,
            &self.d_n_nor,
            &self.d_tan_proj,
            &self.d_t2_jac,
            &self.d_t_amb,
        ]
        .iter()
        .any(|v| v.iter().any(|f| f.one_sided))
    }

    /// Cluster-dependent tables are available (no crossing on the stencil).
    pub fn clusters_matched(&self) -> bool {
        self.d_cluster_jac.is_some()
    }

    /// ∂ₐ cos²θ_j for every direction `a` and cluster `j`.
    pub fn cos2_gradient(&self) -> Option<&Vec<Vec<f64>>> {
        self.d_cos2.as_ref()
    }

    /// D_a P.
    pub fn d_tan_proj(&self, a: usize) -> &DMatrix<f64> {
        &self.d_tan_proj[a].value
    }

    /// D_a(P φ P), the ambient derivative of T as an operator field.
    pub fn d_big_t(&self, a: usize) -> &DMatrix<f64> {
        &self.d_t_amb[a].value
    }

    /// Largest Richardson gap over all tabulated derivatives.
    pub fn max_richardson_gap(&self) -> f64 {
        [
            &self.d_t_jac,
            &self.d_n_jac,
            &self.d_t_nor,
            &self.d_n_nor,
            &self.d_tan_proj,
            &self.d_t2_jac,
            &self.d_t_amb,
        ]
        .iter()
        .flat_map(|v| v.iter().map(|f| f.richardson_gap))
        .fold(0.0, f64::max)
    }

    /// D_a(P⊥) = −D_a P.
    fn d_nor_proj(&self, a: usize) -> DMatrix<f64> {
        -&self.d_tan_proj[a].value
    }

    /// ∇⊥_{∂ₐ} V_j for the normal field V_j = P⊥·e_j, as the matrix whose
    /// column j is that vector.
    pub fn nabla_perp_basis(&self, a: usize) -> DMatrix<f64> {
        &self.base.nor_proj * self.d_nor_proj(a)
    }

    /// (∇_{∂ₐ}T)∂_b.
    pub fn nabla_big_t_coord(&self, a: usize, b: usize) -> DVector<f64> {
        let g = &self.base;
        let outer = &g.tan_proj * self.d_t_jac[a].value.column(b);
        outer - &g.t_amb * g.nabla_coord(a, b)
    }

    /// (∇_{∂ₐ}N)∂_b.
    pub fn nabla_big_n_coord(&self, a: usize, b: usize) -> DVector<f64> {
        let g = &self.base;
        let outer = &g.nor_proj * self.d_n_jac[a].value.column(b);
        outer - &g.big_n_amb * g.nabla_coord(a, b)
    }

    /// (∇_{∂ₐ}t)V_j for V_j = P⊥·e_j; column j.
    pub fn nabla_small_t_basis(&self, a: usize) -> DMatrix<f64> {
        let g = &self.base;
        let outer = &g.tan_proj * &self.d_t_nor[a].value;
        outer - &g.small_t_amb * self.nabla_perp_basis(a)
    }

    /// (∇_{∂ₐ}n)V_j for V_j = P⊥·e_j; column j.
    pub fn nabla_small_n_basis(&self, a: usize) -> DMatrix<f64> {
        let g = &self.base;
        let outer = &g.nor_proj * &self.d_n_nor[a].value;
        outer - &g.small_n_amb * self.nabla_perp_basis(a)
    }

    /// (∇_{∂ₐ}T²)∂_b.
    pub fn nabla_t2_coord(&self, a: usize, b: usize) -> DVector<f64> {
        let g = &self.base;
        let outer = &g.tan_proj * self.d_t2_jac[a].value.column(b);
        let t2 = &g.t_amb * &g.t_amb;
        outer - t2 * g.nabla_coord(a, b)
    }

    /// ∇_{∂ₐ}(P_j ∂_b) for cluster j, when cluster tables are available.
    pub fn nabla_cluster_coord(&self, a: usize, j: usize, b: usize) -> Option<DVector<f64>> {
        let table = self.d_cluster_jac.as_ref()?;
        Some(&self.base.tan_proj * table[a][j].value.column(b))
    }

    /// Covariant derivative of one of T, N, t, n, T² along the tangent vector
    /// `x`, applied to `arg` (tangent for T, N, T²; normal for t, n). Both are
    /// ambient vectors at the base point; the result is contracted from the
    /// coordinate tables, which is valid because the derivative is tensorial.
    pub fn covariant_tensor_derivative(
        &self,
        which: TensorField,
        x: &DVector<f64>,
        arg: &DVector<f64>,
    ) -> DVector<f64> {
        let g = &self.base;
        let d = g.dim();
        let xi = g.frame.coord_components(x);
        let mut out = DVector::zeros(g.ambient_dim());
        match which {
            TensorField::BigT | TensorField::BigN | TensorField::TSquared => {
                let eta = g.frame.coord_components(arg);
                for a in 0..d {
                    for b in 0..d {
                        let w = xi[a] * eta[b];
                        if w == 0.0 {
                            continue;
                        }
                        let v = match which {
                            TensorField::BigT => self.nabla_big_t_coord(a, b),
                            TensorField::BigN => self.nabla_big_n_coord(a, b),
                            _ => self.nabla_t2_coord(a, b),
                        };
                        out.axpy(w, &v, 1.0);
                    }
                }
            }
            TensorField::SmallT | TensorField::SmallN => {
                let v = &g.nor_proj * arg;
                for a in 0..d {
                    if xi[a] == 0.0 {
                        continue;
                    }
                    let table = if which == TensorField::SmallT {
                        self.nabla_small_t_basis(a)
                    } else {
                        self.nabla_small_n_basis(a)
                    };
                    out.axpy(xi[a], &(table * &v), 1.0);
                }
            }
        }
        out
    }

    /// ∇_X Y for coordinate fields X = ∂ₐ and a field Y given by its
    /// ambient-coordinate values on the stencil.
    pub fn nabla_field<F>(&self, a: usize, field: F) -> Option<DVector<f64>>
    where
        F: Fn(&PointGeometry) -> Option<DVector<f64>>,
    {
        let d = self.field_derivative(a, |g| field(g).map(|v| DMatrix::from_column_slice(v.len(), 1, v.as_slice())))?;
        Some(&self.base.tan_proj * d.value.column(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::standard_structure;
    use crate::expr_dsl::parse_immersion;
    use crate::tangent_geometry::DEFAULT_CLUSTER_TOL;

    fn immersion(src: &str, m: usize) -> Immersion {
        Immersion::new(parse_immersion(src).unwrap(), standard_structure(m)).unwrap()
    }

    #[test]
    fn linear_immersion_is_totally_geodesic() {
        let imm = immersion("dim 2 -> 4\nx1+x2\nx2\n2*x1\n-x2\n", 2);
        let g = imm.geometry(&[0.3, -0.2], DEFAULT_CLUSTER_TOL).unwrap();
        assert!(g.sff.components.iter().all(|h| h.amax() == 0.0));
        assert!(g.christoffels.symbols.iter().all(|h| h.amax() == 0.0));
        let v = g.frame.nor_basis.column(0).into_owned();
        assert_eq!(shape_operator(&g.sff, &g.frame, &DVector::from_element(2, 1.0)).amax(), 0.0);
        assert_eq!(g.shape_ambient(&v).amax(), 0.0);
    }

    #[test]
    fn unit_circle_curvature() {
        let imm = immersion("dim 1 -> 2\ncos(x1)\nsin(x1)\n", 1);
        for &x in &[0.0, 0.7, 2.5] {
            let g = imm.geometry(&[x], DEFAULT_CLUSTER_TOL).unwrap();
            assert_eq!(g.sff.components.len(), 1);
            assert!((g.sff.components[0][(0, 0)].abs() - 1.0).abs() < 1e-14);
            // inward normal
            let inward = DVector::from_vec(vec![-x.cos(), -x.sin()]);
            let vn = g.frame.nor_basis.transpose() * &inward;
            let a = shape_operator(&g.sff, &g.frame, &vn);
            assert!((a[(0, 0)] - 1.0).abs() < 1e-14);
            assert!(g.christoffels.vector(0, 0).amax() < 1e-15);
        }
    }

    #[test]
    fn parabola_vertex_christoffel() {
        let imm = immersion("dim 1 -> 2\nx1\n0.5*x1^2\n", 1);
        let g = imm.geometry(&[0.0], DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(g.christoffels.symbols[0][(0, 0)], 0.0);
        assert!(!g.christoffels.ill_conditioned);
    }

    #[test]
    fn brackets() {
        let d1 = VectorFieldOnM::coordinate(0, 2);
        let d2 = VectorFieldOnM::coordinate(1, 2);
        assert_eq!(lie_bracket(&d1, &d2, &[0.4, 0.1]).unwrap().amax(), 0.0);
        let y = VectorFieldOnM::from_sources(&["0", "x1"]).unwrap();
        let b = lie_bracket(&d1, &y, &[0.4, 0.1]).unwrap();
        assert_eq!(b.as_slice(), &[0.0, 1.0]);
        assert!(VectorFieldOnM::from_sources(&["x3", "0"]).is_err());
    }

    #[test]
    fn fd_of_constant_and_position() {
        let c = ambient_field_derivative(|_| Some(DMatrix::from_element(2, 1, 3.0)), 0, &[0.1, 0.2], 1e-5).unwrap();
        assert_eq!(c.value.amax(), 0.0);
        let p = parse_immersion("dim 2 -> 3\nx1*x2\nsin(x1)\nx2^3\n").unwrap();
        let x = [0.3, 0.8];
        for a in 0..2 {
            let d = ambient_field_derivative(
                |y| p.eval_values(y).ok().map(|v| DMatrix::from_column_slice(3, 1, v.as_slice())),
                a,
                &x,
                1e-5,
            )
            .unwrap();
            let j = p.eval_jet1(&x).unwrap().jacobian;
            assert!((d.value.column(0) - j.column(a)).amax() < 1e-9, "direction {a}");
            assert!(!d.one_sided);
        }
    }

    #[test]
    fn fd_one_sided_fallback() {
        // sqrt(x1) is undefined left of 0, so at x1 = 1e-6 only the forward stencil works.
        let field = |y: &[f64]| {
            (y[0] >= 0.0).then(|| DMatrix::from_element(1, 1, (y[0] + 1.0).sqrt()))
        };
        let d = ambient_field_derivative(field, 0, &[1e-6], 1e-5).unwrap();
        assert!(d.one_sided);
        assert!((d.value[(0, 0)] - 0.5 / (1.0f64 + 1e-6).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn weingarten_matches_shape_operator() {
        let imm = immersion("dim 2 -> 4\nx1*cos(x2)\nx1*sin(x2)\nx2\n0.5*x1^2\n", 2);
        let x = [0.7, 0.4];
        let cov = imm.covariant_data(&x, DEFAULT_CLUSTER_TOL, DEFAULT_FD_STEP).unwrap();
        let g = &cov.base;
        for j in 0..4 {
            let mut c = DVector::zeros(4);
            c[j] = 1.0;
            let v = &g.nor_proj * &c;
            for a in 0..2 {
                let tangential = cov
                    .nabla_field(a, |h| Some(&h.nor_proj * &c))
                    .unwrap();
                let expected = -g.shape(&v, &g.coord_field(a));
                assert!((tangential - expected).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn gauss_split_is_exact() {
        let imm = immersion("dim 2 -> 4\nx1*cos(x2)\nx1*sin(x2)\nx2\n0.5*x1^2\n", 2);
        let g = imm.geometry(&[0.7, 0.4], DEFAULT_CLUSTER_TOL).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let tangential = &g.jet.jacobian * g.christoffels.vector(a, b);
                let normal = g.sff.ambient(&g.frame, a, b);
                let total = g.jet.second_derivative(a, b);
                assert!((tangential + normal - total).amax() < 1e-12);
            }
        }
    }
}
