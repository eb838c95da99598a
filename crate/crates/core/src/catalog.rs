//! Built-in example submanifolds of R^{6k} with known slant data.
//!
//! Parameters are ordered `(x₁, x₂, y₁, …, y_{2k−1})`, so in the DSL `yⱼ` is
//! `x_{j+2}` and jacobian column `a` is the frame field X_{a+1}.

use std::fmt;
use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use nalgebra::DVector;
use thiserror::Error;

use crate::ambient::{standard_structure, HermitianStructure};
use crate::connection_geometry::{Immersion, VectorFieldOnM};
use crate::expr_dsl::{parse_immersion, DomainPredicate, ExpressionProgram};

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
    #[error("distribution index {i} out of range for k = {k}")]
    IndexOutOfRange { i: usize, k: usize },
    #[error("unknown catalog id `{0}` (expected pointwise:<k>, kslant:<k> or geodesic)")]
    UnknownId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FixtureKind {
    /// Slant functions vary from point to point.
    Pointwise,
    /// Constant slant angles.
    KSlant,
    /// A complex-linear 4-plane in R⁶: φ-invariant and totally geodesic.
    Geodesic,
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FixtureKind::Pointwise => "pointwise",
            FixtureKind::KSlant => "kslant",
            FixtureKind::Geodesic => "geodesic",
        })
    }
}

/// A catalog address such as `pointwise:3`. `k` is `None` when omitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogId {
    pub kind: FixtureKind,
    pub k: Option<usize>,
}

impl CatalogId {
    pub fn build(&self, default_k: usize) -> Result<ExampleFixture, CatalogError> {
        let k = self.k.unwrap_or(default_k);
        match self.kind {
            FixtureKind::Pointwise => pointwise_example(k),
            FixtureKind::KSlant => kslant_example(k),
            FixtureKind::Geodesic => Ok(geodesic_fixture()),
        }
    }
}

impl FromStr for CatalogId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || CatalogError::UnknownId(s.to_string());
        let (name, k) = match s.split_once(':') {
            Some((n, k)) => (n, Some(k.parse::<usize>().map_err(|_| unknown())?)),
            None => (s, None),
        };
        let kind = match name {
            "pointwise" => FixtureKind::Pointwise,
            "kslant" => FixtureKind::KSlant,
            "geodesic" if k.is_none() => FixtureKind::Geodesic,
            _ => return Err(unknown()),
        };
        Ok(CatalogId { kind, k })
    }
}

/// Inventory lines for the CLI `list` command.
pub fn inventory() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "pointwise:<k>",
            "pointwise k-slant submanifold of R^{6k}, k >= 2, 2k+1 parameters",
        ),
        (
            "kslant:<k>",
            "k-slant submanifold of R^{6k} with constant angles arccos(2/(3+(i-1)^2))",
        ),
        ("geodesic", "complex-linear 4-plane in R^6 (invariant, totally geodesic)"),
    ]
}

#[derive(Debug, Clone)]
pub struct ExampleFixture {
    pub kind: FixtureKind,
    /// Number of slant distributions D₁…D_k (0 for the geodesic plane).
    pub k: usize,
    pub immersion: ExpressionProgram,
    /// One coordinate field per parameter.
    pub frames: Vec<VectorFieldOnM>,
    /// `expected_assignment[a]` is the distribution index of frame field `a`.
    pub expected_assignment: Vec<usize>,
    pub domain: Vec<DomainPredicate>,
}

impl ExampleFixture {
    pub fn id(&self) -> String {
        match self.kind {
            FixtureKind::Geodesic => "geodesic".to_string(),
            kind => format!("{kind}:{}", self.k),
        }
    }

    pub fn dim(&self) -> usize {
        self.immersion.arity
    }

    pub fn ambient(&self) -> HermitianStructure {
        standard_structure(self.immersion.output_dim() / 2)
    }

    pub fn to_immersion(&self) -> Immersion {
        Immersion::new(self.immersion.clone(), self.ambient())
            .expect("catalog output dimension matches its ambient")
    }

    /// Number of distributions D₀…D_k.
    pub fn distribution_count(&self) -> usize {
        match self.kind {
            FixtureKind::Geodesic => 1,
            _ => self.k + 1,
        }
    }

    /// Frame indices assigned to distribution `i`.
    pub fn frames_of(&self, i: usize) -> Vec<usize> {
        self.expected_assignment
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == i)
            .map(|(a, _)| a)
            .collect()
    }

    /// Expected θᵢ at the parameter point `params`.
    pub fn expected_theta_at(&self, i: usize, params: &[f64]) -> Result<f64, CatalogError> {
        Ok(self.expected_cos2_at(i, params)?.sqrt().acos())
    }

    /// Expected cos²θᵢ at `params`.
    pub fn expected_cos2_at(&self, i: usize, params: &[f64]) -> Result<f64, CatalogError> {
        if self.kind == FixtureKind::Geodesic {
            return if i == 0 {
                Ok(1.0)
            } else {
                Err(CatalogError::IndexOutOfRange { i, k: 0 })
            };
        }
        expected_cos2(self.kind, self.k, i, y_pair(params, i))
    }

    /// ∂ₐ of the expected cos²θᵢ (zero for constant angles).
    pub fn expected_cos2_derivative(
        &self,
        i: usize,
        params: &[f64],
        a: usize,
    ) -> Result<f64, CatalogError> {
        self.expected_cos2_at(i, params)?;
        if self.kind != FixtureKind::Pointwise || i < 2 {
            return Ok(0.0);
        }
        let c = 2.0 + ((i - 1) * (i - 1)) as f64;
        let (ia, ib) = (2 * i - 1, 2 * i);
        let (ya, yb) = (params[ia], params[ib]);
        let (fa, fb) = (c + ya * ya, c + yb * yb);
        Ok(if a == ia {
            -8.0 * ya / (fa * fa * fb)
        } else if a == ib {
            -8.0 * yb / (fa * fb * fb)
        } else {
            0.0
        })
    }
}

/// (y_{2i−2}, y_{2i−1}) from a parameter vector; zeros for i < 2.
fn y_pair(params: &[f64], i: usize) -> (f64, f64) {
    if i < 2 {
        (0.0, 0.0)
    } else {
        (params[2 * i - 1], params[2 * i])
    }
}

/// Closed-form cos²θᵢ.
pub fn expected_cos2(
    kind: FixtureKind,
    k: usize,
    i: usize,
    y_pair: (f64, f64),
) -> Result<f64, CatalogError> {
    if i > k || kind == FixtureKind::Geodesic && i > 0 {
        return Err(CatalogError::IndexOutOfRange { i, k });
    }
    Ok(match i {
        0 => 1.0,
        1 => 0.0,
        _ => {
            let c = ((i - 1) * (i - 1)) as f64;
            match kind {
                FixtureKind::Pointwise => {
                    let (a, b) = y_pair;
                    4.0 / ((2.0 + c + a * a) * (2.0 + c + b * b))
                }
                _ => {
                    let r = 2.0 / (3.0 + c);
                    r * r
                }
            }
        }
    })
}

/// Closed-form θᵢ: 0 for D₀, π/2 for D₁, the slant formula for i ≥ 2.
pub fn expected_theta(
    kind: FixtureKind,
    k: usize,
    i: usize,
    y_pair: (f64, f64),
) -> Result<f64, CatalogError> {
    if i == 1 && k >= 1 {
        return Ok(FRAC_PI_2);
    }
    let cos2 = expected_cos2(kind, k, i, y_pair)?;
    Ok(match kind {
        FixtureKind::Pointwise => cos2.sqrt().acos(),
        _ if i == 0 => 0.0,
        _ => {
            let c = ((i - 1) * (i - 1)) as f64;
            (2.0 / (3.0 + c)).acos()
        }
    })
}

pub fn pointwise_example(k: usize) -> Result<ExampleFixture, CatalogError> {
    build(FixtureKind::Pointwise, k)
}

pub fn kslant_example(k: usize) -> Result<ExampleFixture, CatalogError> {
    build(FixtureKind::KSlant, k)
}

fn build(kind: FixtureKind, k: usize) -> Result<ExampleFixture, CatalogError> {
    if k < 2 {
        return Err(CatalogError::KTooSmall(k));
    }
    let d = 2 * k + 1;
    let mut src = format!(
        "dim {d} -> {}\ndomain norm < 1, x1 > 0, x2 > 0\nambient standard {}\n",
        6 * k,
        3 * k
    );
    src.push_str("x1*cos(x3)\nx2*cos(x3)\nx1*sin(x3)\nx2*sin(x3)\nx1\nx2\n");
    for i in 2..=k {
        let a = format!("x{}", 2 * i);
        let b = format!("x{}", 2 * i + 1);
        let scaled = |v: &str| {
            if i == 2 {
                v.to_string()
            } else {
                format!("{}*{v}", i - 1)
            }
        };
        let curved = |v: &str| match kind {
            FixtureKind::Pointwise => format!("0.5*{v}^2"),
            _ => v.to_string(),
        };
        for line in [
            scaled(&a),
            curved(&a),
            format!("{a}+{b}"),
            format!("{a}-{b}"),
            scaled(&b),
            curved(&b),
        ] {
            src.push_str(&line);
            src.push('\n');
        }
    }
    let immersion = parse_immersion(&src).expect("catalog source is well formed");
    let mut expected_assignment = vec![0, 0, 1];
    for i in 2..=k {
        expected_assignment.extend([i, i]);
    }
    Ok(ExampleFixture {
        kind,
        k,
        domain: immersion.domain.clone(),
        frames: (0..d).map(|a| VectorFieldOnM::coordinate(a, d)).collect(),
        immersion,
        expected_assignment,
    })
}

/// The complex-linear plane (x₁, x₂, x₃, x₄, x₁+x₃, x₂+x₄) in R⁶.
pub fn geodesic_fixture() -> ExampleFixture {
    let immersion = parse_immersion("dim 4 -> 6\nambient standard 3\nx1\nx2\nx3\nx4\nx1+x3\nx2+x4\n")
        .expect("catalog source is well formed");
    ExampleFixture {
        kind: FixtureKind::Geodesic,
        k: 0,
        domain: Vec::new(),
        frames: (0..4).map(|a| VectorFieldOnM::coordinate(a, 4)).collect(),
        immersion,
        expected_assignment: vec![0; 4],
    }
}

/// The frame vector X_{a+1} of the pointwise or k-slant example written out
/// coordinate by coordinate, independent of the immersion program.
pub fn frame_vector(kind: FixtureKind, k: usize, a: usize, params: &[f64]) -> DVector<f64> {
    let mut v = DVector::zeros(6 * k);
    let u = |j: usize| 2 * (j - 1);
    let w = |j: usize| 2 * (j - 1) + 1;
    let (x1, x2, y1) = (params[0], params[1], params[2]);
    let (s, c) = y1.sin_cos();
    match a {
        0 => {
            v[u(1)] = c;
            v[u(2)] = s;
            v[u(3)] = 1.0;
        }
        1 => {
            v[w(1)] = c;
            v[w(2)] = s;
            v[w(3)] = 1.0;
        }
        2 => {
            v[u(1)] = -x1 * s;
            v[w(1)] = -x2 * s;
            v[u(2)] = x1 * c;
            v[w(2)] = x2 * c;
        }
        _ => {
            let i = a.div_ceil(2);
            let coef = (i - 1) as f64;
            let y = |j: usize| match kind {
                FixtureKind::Pointwise => params[j + 1],
                _ => 1.0,
            };
            if a % 2 == 1 {
                v[u(3 * i - 2)] = coef;
                v[w(3 * i - 2)] = y(2 * i - 2);
                v[u(3 * i - 1)] = 1.0;
                v[w(3 * i - 1)] = 1.0;
            } else {
                v[u(3 * i - 1)] = 1.0;
                v[w(3 * i - 1)] = -1.0;
                v[u(3 * i)] = coef;
                v[w(3 * i)] = y(2 * i - 1);
            }
        }
    }
    v
}
