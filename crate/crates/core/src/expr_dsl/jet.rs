//! Truncated second-order forward-mode values.
//!
//! A `Jet` carries a value, its gradient with respect to `n` inputs and the
//! upper triangle of its Hessian in packed row-major order. Order-one jets keep
//! an empty Hessian buffer, order-zero jets an empty gradient as well.

use super::parser::{BinOp, Expr, Func};
use super::DomainViolation;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Jet {
    pub v: f64,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// Offset of entry `(i, j)`, `i <= j`, in a packed upper triangle of size `n`.
#[inline]
pub(crate) fn packed(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * n - i + 1) / 2 + (j - i)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Shape {
    pub n: usize,
    pub order: u8,
}

impl Shape {
    fn grad_len(self) -> usize {
        if self.order >= 1 {
            self.n
        } else {
            0
        }
    }

    fn hess_len(self) -> usize {
        if self.order >= 2 {
            self.n * (self.n + 1) / 2
        } else {
            0
        }
    }
}

impl Jet {
    fn constant(v: f64, s: Shape) -> Self {
        Jet {
            v,
            g: vec![0.0; s.grad_len()],
            h: vec![0.0; s.hess_len()],
        }
    }

    fn variable(i: usize, v: f64, s: Shape) -> Self {
        let mut j = Jet::constant(v, s);
        if s.order >= 1 {
            j.g[i] = 1.0;
        }
        j
    }

    fn neg(mut self) -> Self {
        self.v = -self.v;
        self.g.iter_mut().for_each(|x| *x = -*x);
        self.h.iter_mut().for_each(|x| *x = -*x);
        self
    }

    fn add(mut self, other: &Jet, sign: f64) -> Self {
        self.v += sign * other.v;
        for (a, b) in self.g.iter_mut().zip(&other.g) {
            *a += sign * b;
        }
        for (a, b) in self.h.iter_mut().zip(&other.h) {
            *a += sign * b;
        }
        self
    }

    fn mul(&self, other: &Jet) -> Self {
        let n = self.g.len();
        let mut h = Vec::with_capacity(self.h.len());
        if !self.h.is_empty() {
            for i in 0..n {
                for j in i..n {
                    let k = h.len();
                    h.push(
                        self.v * other.h[k]
                            + other.v * self.h[k]
                            + self.g[i] * other.g[j]
                            + other.g[i] * self.g[j],
                    );
                }
            }
        }
        Jet {
            v: self.v * other.v,
            g: self
                .g
                .iter()
                .zip(&other.g)
                .map(|(a, b)| self.v * b + other.v * a)
                .collect(),
            h,
        }
    }

    /// Composes with a scalar function given its value and first two derivatives.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.g.len();
        let mut h = Vec::with_capacity(self.h.len());
        if !self.h.is_empty() {
            for i in 0..n {
                for j in i..n {
                    let k = h.len();
                    h.push(f1 * self.h[k] + f2 * self.g[i] * self.g[j]);
                }
            }
        }
        Jet {
            v: f0,
            g: self.g.iter().map(|a| f1 * a).collect(),
            h,
        }
    }

    fn recip(&self) -> Result<Self, DomainViolation> {
        let x = self.v;
        if x == 0.0 {
            return Err(DomainViolation::DivisionByZero);
        }
        let r = 1.0 / x;
        Ok(self.chain(r, -r * r, 2.0 * r * r * r))
    }

    fn powi(&self, n: i32) -> Result<Self, DomainViolation> {
        let x = self.v;
        if n == 0 {
            return Ok(self.chain(1.0, 0.0, 0.0));
        }
        if n < 0 && x == 0.0 {
            return Err(DomainViolation::DivisionByZero);
        }
        let nf = f64::from(n);
        let f1 = nf * x.powi(n - 1);
        let f2 = if n == 1 {
            0.0
        } else {
            nf * (nf - 1.0) * x.powi(n - 2)
        };
        Ok(self.chain(x.powi(n), f1, f2))
    }

    fn call(&self, func: Func) -> Result<Self, DomainViolation> {
        let x = self.v;
        Ok(match func {
            Func::Sin => {
                let (s, c) = x.sin_cos();
                self.chain(s, c, -s)
            }
            Func::Cos => {
                let (s, c) = x.sin_cos();
                self.chain(c, -s, -c)
            }
            Func::Exp => {
                let e = x.exp();
                self.chain(e, e, e)
            }
            Func::Sqrt => {
                if x < 0.0 {
                    return Err(DomainViolation::SqrtOfNegative);
                }
                if x == 0.0 && !self.g.is_empty() {
                    return Err(DomainViolation::SqrtAtZero);
                }
                let r = x.sqrt();
                if self.g.is_empty() {
                    Jet::constant(r, Shape { n: 0, order: 0 })
                } else {
                    self.chain(r, 0.5 / r, -0.25 / (r * x))
                }
            }
        })
    }
}

pub(crate) fn eval(expr: &Expr, x: &[f64], s: Shape) -> Result<Jet, DomainViolation> {
    let out = match expr {
        Expr::Const(c) => Jet::constant(*c, s),
        Expr::Var(i) => Jet::variable(*i, x[*i], s),
        Expr::Neg(a) => eval(a, x, s)?.neg(),
        Expr::Binary(op, a, b) => {
            let a = eval(a, x, s)?;
            let b = eval(b, x, s)?;
            match op {
                BinOp::Add => a.add(&b, 1.0),
                BinOp::Sub => a.add(&b, -1.0),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.mul(&b.recip()?),
            }
        }
        Expr::Pow(a, n) => eval(a, x, s)?.powi(*n)?,
        Expr::Call(f, a) => eval(a, x, s)?.call(*f)?,
    };
    if !out.v.is_finite() {
        return Err(DomainViolation::NonFinite);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr_dsl::parse_expression;

    fn jet2(src: &str, x: &[f64]) -> Jet {
        let e = parse_expression(src).unwrap();
        eval(&e, x, Shape { n: x.len(), order: 2 }).unwrap()
    }

    #[test]
    fn packed_offsets() {
        let n = 3;
        let mut seen = Vec::new();
        for i in 0..n {
            for j in i..n {
                seen.push(packed(i, j, n));
            }
        }
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
        assert_eq!(packed(2, 0, n), packed(0, 2, n));
    }

    #[test]
    fn square() {
        let j = jet2("x1^2", &[3.0]);
        assert_eq!((j.v, j.g[0], j.h[0]), (9.0, 6.0, 2.0));
    }

    #[test]
    fn sine_at_zero() {
        let j = jet2("sin(x1)", &[0.0]);
        assert_eq!((j.v, j.g[0], j.h[0]), (0.0, 1.0, 0.0));
    }

    #[test]
    fn mixed_product() {
        // f = x1 * x2^3 -> f_12 = 3 x2^2
        let j = jet2("x1*x2^3", &[2.0, 1.5]);
        assert_eq!(j.v, 2.0 * 1.5f64.powi(3));
        assert_eq!(j.g, vec![1.5f64.powi(3), 3.0 * 2.0 * 1.5 * 1.5]);
        assert_eq!(j.h, vec![0.0, 3.0 * 1.5 * 1.5, 6.0 * 2.0 * 1.5]);
    }

    #[test]
    fn quotient_and_sqrt() {
        let j = jet2("1/x1", &[2.0]);
        assert_eq!((j.v, j.g[0], j.h[0]), (0.5, -0.25, 0.25));
        let j = jet2("sqrt(x1)", &[4.0]);
        assert_eq!((j.v, j.g[0], j.h[0]), (2.0, 0.25, -1.0 / 32.0));
    }

    #[test]
    fn domain_errors() {
        let e = parse_expression("1/(x1-1)").unwrap();
        let s = Shape { n: 1, order: 2 };
        assert_eq!(eval(&e, &[1.0], s), Err(DomainViolation::DivisionByZero));
        let e = parse_expression("sqrt(x1)").unwrap();
        assert_eq!(eval(&e, &[-1.0], s), Err(DomainViolation::SqrtOfNegative));
        let e = parse_expression("x1^-1").unwrap();
        assert_eq!(eval(&e, &[0.0], s), Err(DomainViolation::DivisionByZero));
    }

    #[test]
    fn powi_at_zero_is_finite() {
        let j = jet2("x1^1 + x1^2", &[0.0]);
        assert_eq!((j.v, j.g[0], j.h[0]), (0.0, 1.0, 2.0));
    }
}
