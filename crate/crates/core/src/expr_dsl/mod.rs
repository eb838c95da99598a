//! Immersion definitions as small expression programs, evaluated to exact
//! second-order jets.
//!
//! A DSL document looks like
//!
//! ```text
//! # comment
//! dim 2 -> 4
//! domain norm < 1, x1 > 0
//! ambient standard 2
//! x1*cos(x2)
//! x1*sin(x2)
//! x2
//! 0.5*x1^2
//! ```
//!
//! The header line is `dim <d> -> <n>`; `domain` and `ambient` lines are
//! optional; exactly `n` expression lines follow. Sources without a `dim`
//! header are read as one expression per line with the arity inferred from the
//! highest variable index.

mod jet;
mod parser;

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use parser::{parse_expression, BinOp, Expr, Func};

use jet::{eval, packed, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("line {line}: {message}")]
    Document { line: usize, message: String },
    #[error("empty source")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DomainViolation {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative number")]
    SqrtOfNegative,
    #[error("square root is not differentiable at zero")]
    SqrtAtZero,
    #[error("non-finite value")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("output {output}: {violation}")]
    Domain {
        output: usize,
        violation: DomainViolation,
    },
    #[error("expected {expected} parameters, got {got}")]
    Arity { expected: usize, got: usize },
}

/// A parameter-domain constraint from the `domain` header line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainPredicate {
    /// Euclidean norm of the parameter vector strictly below the bound.
    NormBelow(f64),
    /// Zero-based parameter strictly above the bound.
    Above { var: usize, bound: f64 },
    /// Zero-based parameter strictly below the bound.
    Below { var: usize, bound: f64 },
}

impl DomainPredicate {
    /// Whether `x` satisfies the predicate with at least `margin` to spare.
    pub fn admits(&self, x: &[f64], margin: f64) -> bool {
        match *self {
            DomainPredicate::NormBelow(c) => {
                x.iter().map(|v| v * v).sum::<f64>().sqrt() < c - margin
            }
            DomainPredicate::Above { var, bound } => x[var] > bound + margin,
            DomainPredicate::Below { var, bound } => x[var] < bound - margin,
        }
    }

    fn max_var(&self) -> usize {
        match *self {
            DomainPredicate::NormBelow(_) => 0,
            DomainPredicate::Above { var, .. } | DomainPredicate::Below { var, .. } => var + 1,
        }
    }
}

impl fmt::Display for DomainPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainPredicate::NormBelow(c) => write!(f, "norm < {c}"),
            DomainPredicate::Above { var, bound } => write!(f, "x{} > {bound}", var + 1),
            DomainPredicate::Below { var, bound } => write!(f, "x{} < {bound}", var + 1),
        }
    }
}

/// Ambient structure requested by an `ambient` header line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AmbientSpec {
    Standard(usize),
    /// Path to a whitespace-separated, row-major φ matrix.
    Matrix(String),
}

/// A parsed vector-valued immersion over `arity` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionProgram {
    pub arity: usize,
    pub outputs: Vec<Expr>,
    pub source: String,
    pub domain: Vec<DomainPredicate>,
    pub ambient: Option<AmbientSpec>,
    /// Outputs containing division, negative powers or square roots.
    pub guarded_outputs: Vec<usize>,
}

/// Value, Jacobian and Hessian of a program at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: DVector<f64>,
    /// `outputs × arity`.
    pub jacobian: DMatrix<f64>,
    /// One symmetric `arity × arity` matrix per output.
    pub hessian: Vec<DMatrix<f64>>,
}

impl Jet2 {
    pub fn arity(&self) -> usize {
        self.jacobian.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.value.len()
    }

    /// The ambient vector ∂²f/∂xₐ∂x_b.
    pub fn second_derivative(&self, a: usize, b: usize) -> DVector<f64> {
        DVector::from_iterator(self.hessian.len(), self.hessian.iter().map(|h| h[(a, b)]))
    }

    /// Applies a linear map to every output (used for metric whitening).
    pub fn transformed(&self, map: &DMatrix<f64>) -> Jet2 {
        let n = map.nrows();
        let d = self.arity();
        let mut hessian = vec![DMatrix::zeros(d, d); n];
        for (r, out) in hessian.iter_mut().enumerate() {
            for (c, h) in self.hessian.iter().enumerate() {
                let w = map[(r, c)];
                if w != 0.0 {
                    *out += h * w;
                }
            }
        }
        Jet2 {
            value: map * &self.value,
            jacobian: map * &self.jacobian,
            hessian,
        }
    }
}

/// First-order jet of a program: values and Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet1 {
    pub value: DVector<f64>,
    pub jacobian: DMatrix<f64>,
}

impl ExpressionProgram {
    /// Number of outputs (the ambient dimension for immersions).
    pub fn output_dim(&self) -> usize {
        self.outputs.len()
    }

    /// Builds a program from already-parsed trees.
    pub fn from_exprs(arity: usize, outputs: Vec<Expr>) -> Self {
        let source = outputs
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("\n");
        let guarded_outputs = guarded(&outputs);
        ExpressionProgram {
            arity,
            outputs,
            source,
            domain: Vec::new(),
            ambient: None,
            guarded_outputs,
        }
    }

    /// Whether `x` satisfies every domain predicate with the given margin.
    pub fn admits(&self, x: &[f64], margin: f64) -> bool {
        self.domain.iter().all(|p| p.admits(x, margin))
    }

    /// Re-serializes the program as a DSL document.
    pub fn to_document(&self) -> String {
        let mut s = format!("dim {} -> {}\n", self.arity, self.outputs.len());
        if !self.domain.is_empty() {
            let preds: Vec<String> = self.domain.iter().map(|p| p.to_string()).collect();
            s.push_str(&format!("domain {}\n", preds.join(", ")));
        }
        match &self.ambient {
            Some(AmbientSpec::Standard(m)) => s.push_str(&format!("ambient standard {m}\n")),
            Some(AmbientSpec::Matrix(p)) => s.push_str(&format!("ambient matrix {p}\n")),
            None => {}
        }
        for e in &self.outputs {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }

    fn check_arity(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.arity {
            return Err(EvalError::Arity {
                expected: self.arity,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn eval_shape(&self, x: &[f64], order: u8) -> Result<Vec<jet::Jet>, EvalError> {
        self.check_arity(x)?;
        let shape = Shape {
            n: self.arity,
            order,
        };
        self.outputs
            .iter()
            .enumerate()
            .map(|(output, e)| eval(e, x, shape).map_err(|violation| EvalError::Domain { output, violation }))
            .collect()
    }

    /// Plain values.
    pub fn eval_values(&self, x: &[f64]) -> Result<DVector<f64>, EvalError> {
        let jets = self.eval_shape(x, 0)?;
        Ok(DVector::from_iterator(jets.len(), jets.iter().map(|j| j.v)))
    }

    /// Values and Jacobian.
    pub fn eval_jet1(&self, x: &[f64]) -> Result<Jet1, EvalError> {
        let jets = self.eval_shape(x, 1)?;
        let n = jets.len();
        let d = self.arity;
        Ok(Jet1 {
            value: DVector::from_iterator(n, jets.iter().map(|j| j.v)),
            jacobian: DMatrix::from_fn(n, d, |r, c| jets[r].g[c]),
        })
    }

    /// Values, Jacobian and Hessian, exact up to round-off.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<Jet2, EvalError> {
        let jets = self.eval_shape(x, 2)?;
        let n = jets.len();
        let d = self.arity;
        Ok(Jet2 {
            value: DVector::from_iterator(n, jets.iter().map(|j| j.v)),
            jacobian: DMatrix::from_fn(n, d, |r, c| jets[r].g[c]),
            hessian: jets
                .iter()
                .map(|j| DMatrix::from_fn(d, d, |a, b| j.h[packed(a, b, d)]))
                .collect(),
        })
    }
}

/// Free-function form of [`ExpressionProgram::eval_jet2`].
pub fn eval_jet2(prog: &ExpressionProgram, x: &[f64]) -> Result<Jet2, EvalError> {
    prog.eval_jet2(x)
}

fn guarded(outputs: &[Expr]) -> Vec<usize> {
    outputs
        .iter()
        .enumerate()
        .filter(|(_, e)| e.has_guarded_ops())
        .map(|(i, _)| i)
        .collect()
}

/// Parses either a full DSL document (with `dim` header) or bare expression lines.
pub fn parse_immersion(source: &str) -> Result<ExpressionProgram, ParseError> {
    let lines = significant_lines(source);
    let Some(&(first_line, _, first)) = lines.first() else {
        return Err(ParseError::Empty);
    };

    let mut declared: Option<(usize, usize)> = None;
    let mut domain = Vec::new();
    let mut ambient = None;
    let mut rest = &lines[..];

    if let Some(header) = first.strip_prefix("dim") {
        declared = Some(parse_dim(header, first_line)?);
        rest = &lines[1..];
        while let Some(&(line, _, text)) = rest.first() {
            if let Some(preds) = keyword(text, "domain") {
                domain = parse_domain(preds, line)?;
            } else if let Some(spec) = keyword(text, "ambient") {
                ambient = Some(parse_ambient(spec, line)?);
            } else {
                break;
            }
            rest = &rest[1..];
        }
    }

    let mut outputs = Vec::with_capacity(rest.len());
    for &(_, off, text) in rest {
        outputs.push(parser::parse_expression_at(text, off)?);
    }
    let used = outputs
        .iter()
        .map(Expr::max_var)
        .chain(domain.iter().map(DomainPredicate::max_var))
        .max()
        .unwrap_or(0);

    let arity = match declared {
        Some((d, n)) => {
            if outputs.len() != n {
                return Err(ParseError::Document {
                    line: first_line,
                    message: format!("header declares {n} outputs, found {}", outputs.len()),
                });
            }
            if used > d {
                return Err(ParseError::Document {
                    line: first_line,
                    message: format!("variable x{used} exceeds declared dimension {d}"),
                });
            }
            d
        }
        None => {
            if outputs.is_empty() {
                return Err(ParseError::Empty);
            }
            used
        }
    };
    if arity == 0 {
        return Err(ParseError::Document {
            line: first_line,
            message: "program has no parameters".into(),
        });
    }

    let guarded_outputs = guarded(&outputs);
    Ok(ExpressionProgram {
        arity,
        outputs,
        source: source.to_string(),
        domain,
        ambient,
        guarded_outputs,
    })
}

/// Non-empty, non-comment lines as (1-based line number, byte offset, trimmed text).
fn significant_lines(source: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, raw) in source.split_inclusive('\n').enumerate() {
        let line = raw.trim_end_matches(['\n', '\r']);
        let content = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        let lead = content.len() - content.trim_start().len();
        let text = content.trim();
        if !text.is_empty() {
            out.push((i + 1, offset + lead, text));
        }
        offset += raw.len();
    }
    out
}

fn keyword<'a>(text: &'a str, word: &str) -> Option<&'a str> {
    let rest = text.strip_prefix(word)?;
    if rest.is_empty() || rest.starts_with(char::is_whitespace) {
        Some(rest.trim())
    } else {
        None
    }
}

fn doc_err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Document {
        line,
        message: message.into(),
    }
}

fn parse_dim(header: &str, line: usize) -> Result<(usize, usize), ParseError> {
    let (d, n) = header
        .split_once("->")
        .ok_or_else(|| doc_err(line, "expected `dim <d> -> <n>`"))?;
    let d: usize = d
        .trim()
        .parse()
        .map_err(|_| doc_err(line, "invalid parameter count"))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| doc_err(line, "invalid output count"))?;
    if d == 0 || n == 0 {
        return Err(doc_err(line, "dimensions must be positive"));
    }
    Ok((d, n))
}

fn parse_number(text: &str, line: usize) -> Result<f64, ParseError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| doc_err(line, format!("invalid number `{}`", text.trim())))
}

fn parse_domain(preds: &str, line: usize) -> Result<Vec<DomainPredicate>, ParseError> {
    preds
        .split(',')
        .map(|p| {
            let p = p.trim();
            let (lhs, op, rhs) = if let Some((l, r)) = p.split_once('<') {
                (l.trim(), '<', r)
            } else if let Some((l, r)) = p.split_once('>') {
                (l.trim(), '>', r)
            } else {
                return Err(doc_err(line, format!("invalid predicate `{p}`")));
            };
            let bound = parse_number(rhs, line)?;
            if lhs == "norm" {
                if op != '<' {
                    return Err(doc_err(line, "only `norm < c` is supported"));
                }
                return Ok(DomainPredicate::NormBelow(bound));
            }
            let var = lhs
                .strip_prefix('x')
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| doc_err(line, format!("unknown predicate subject `{lhs}`")))?
                - 1;
            Ok(if op == '>' {
                DomainPredicate::Above { var, bound }
            } else {
                DomainPredicate::Below { var, bound }
            })
        })
        .collect()
}

fn parse_ambient(spec: &str, line: usize) -> Result<AmbientSpec, ParseError> {
    let mut parts = spec.splitn(2, char::is_whitespace);
    match (parts.next(), parts.next().map(str::trim)) {
        (Some("standard"), Some(m)) => m
            .parse::<usize>()
            .ok()
            .filter(|&m| m >= 1)
            .map(AmbientSpec::Standard)
            .ok_or_else(|| doc_err(line, "invalid complex dimension")),
        (Some("matrix"), Some(path)) if !path.is_empty() => {
            Ok(AmbientSpec::Matrix(path.to_string()))
        }
        _ => Err(doc_err(
            line,
            "expected `ambient standard <m>` or `ambient matrix <path>`",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_expression_infers_arity() {
        let p = parse_immersion("x1*cos(x2)").unwrap();
        assert_eq!(p.arity, 2);
        assert_eq!(p.outputs.len(), 1);
        assert!(p.guarded_outputs.is_empty());
    }

    #[test]
    fn document_with_header() {
        let src = "# unit circle\ndim 1 -> 2\ndomain x1 > -3, x1 < 3\ncos(x1)\nsin(x1)\n";
        let p = parse_immersion(src).unwrap();
        assert_eq!(p.arity, 1);
        assert_eq!(p.domain.len(), 2);
        assert!(p.admits(&[0.0], 0.05));
        assert!(!p.admits(&[2.99], 0.05));
        let again = parse_immersion(&p.to_document()).unwrap();
        assert_eq!(again.outputs, p.outputs);
        assert_eq!(again.domain, p.domain);
    }

    #[test]
    fn declared_arity_wins() {
        let p = parse_immersion("dim 3 -> 2\nx1\nx2\n").unwrap();
        assert_eq!(p.arity, 3);
    }

    #[test]
    fn output_count_mismatch() {
        let err = parse_immersion("dim 1 -> 2\nx1\n").unwrap_err();
        assert!(matches!(err, ParseError::Document { line: 1, .. }));
    }

    #[test]
    fn variable_out_of_range() {
        assert!(parse_immersion("dim 1 -> 2\nx1\nx2\n").is_err());
    }

    #[test]
    fn offsets_are_document_relative() {
        let src = "dim 1 -> 2\nx1\ncos(\n";
        match parse_immersion(src).unwrap_err() {
            ParseError::Syntax { offset, .. } => assert_eq!(offset, src.len() - 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ambient_line() {
        let p = parse_immersion("dim 1 -> 2\nambient standard 1\nx1\n0\n").unwrap();
        assert_eq!(p.ambient, Some(AmbientSpec::Standard(1)));
        let p = parse_immersion("dim 1 -> 2\nambient matrix phi.txt\nx1\n0\n").unwrap();
        assert_eq!(p.ambient, Some(AmbientSpec::Matrix("phi.txt".into())));
        assert!(parse_immersion("dim 1 -> 2\nambient fancy\nx1\n0\n").is_err());
    }

    #[test]
    fn empty_source() {
        assert_eq!(parse_immersion("  \n# nothing\n"), Err(ParseError::Empty));
    }

    #[test]
    fn division_flagged_and_reported() {
        let p = parse_immersion("x1\n1/x1\n").unwrap();
        assert_eq!(p.guarded_outputs, vec![1]);
        let err = p.eval_jet2(&[0.0]).unwrap_err();
        assert_eq!(
            err,
            EvalError::Domain {
                output: 1,
                violation: DomainViolation::DivisionByZero
            }
        );
    }

    #[test]
    fn jacobian_of_constant_row_is_zero() {
        let p = parse_immersion("x1*x2\n3.5\n").unwrap();
        let j = p.eval_jet2(&[0.3, -0.7]).unwrap();
        assert_eq!(j.jacobian.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0]);
        assert_eq!(j.hessian[0][(0, 1)], 1.0);
        assert_eq!(j.hessian[0][(1, 0)], 1.0);
    }

    #[test]
    fn jet_orders_agree() {
        let p = parse_immersion("exp(x1)*sin(x2)\nx1/x2\n").unwrap();
        let x = [0.4, 1.3];
        let j2 = p.eval_jet2(&x).unwrap();
        let j1 = p.eval_jet1(&x).unwrap();
        assert_eq!(j1.value, j2.value);
        assert_eq!(j1.jacobian, j2.jacobian);
        assert_eq!(p.eval_values(&x).unwrap(), j2.value);
    }

    #[test]
    fn arity_mismatch() {
        let p = parse_immersion("x1+x2").unwrap();
        assert!(matches!(p.eval_jet2(&[1.0]), Err(EvalError::Arity { .. })));
    }
}
