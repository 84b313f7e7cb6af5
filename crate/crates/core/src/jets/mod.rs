//! Second-order forward-mode jets.
//!
//! A [`Jet2`] carries the value of a scalar field together with its gradient
//! and (symmetric) Hessian with respect to the model coordinates. Every
//! operation applies the chain and product rules truncated at order two, so
//! composing jets of the frame coefficients yields exact first and second
//! partials of anything built from them.
//!
//! [`Jet1`] is the first-order truncation. Quantities that already consume one
//! derivative of the inputs (Christoffel symbols, covariant derivatives, the
//! functions alpha and beta) are carried as `Jet1` so that only genuinely
//! known derivatives are ever propagated.

mod linalg;
mod matrix;

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, Neg, Sub};

pub use linalg::{least_squares, symmetric_eigenvalues, LeastSquares};
pub use matrix::{JetMatrix, LinalgError};

/// Largest supported manifold dimension (n <= 3).
pub const MAX_DIM: usize = 7;
const MAX_TRI: usize = MAX_DIM * (MAX_DIM + 1) / 2;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    if i >= j {
        i * (i + 1) / 2 + j
    } else {
        j * (j + 1) / 2 + i
    }
}

/// Domain violations raised by jet arithmetic.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JetError {
    #[error("division by zero (denominator value {value})")]
    DivisionByZero { value: f64 },
    #[error("logarithm of non-positive value {value}")]
    LogDomain { value: f64 },
    #[error("negative integer power of zero (value {value}, exponent {exponent})")]
    PowDomain { value: f64, exponent: i32 },
    #[error("operation {op} expects {expected} argument(s), got {got}")]
    Arity {
        op: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Scalar types the dense linear algebra is generic over.
pub trait Field:
    Copy + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn value(&self) -> f64;
    /// A constant with the same dimension as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn recip(self) -> Result<Self, JetError>;
    fn scale(self, c: f64) -> Self;
}

impl Field for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn recip(self) -> Result<Self, JetError> {
        if self == 0.0 {
            Err(JetError::DivisionByZero { value: self })
        } else {
            Ok(1.0 / self)
        }
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Value, gradient and Hessian of a scalar field at one point.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet2 {
    dim: u8,
    value: f64,
    grad: [f64; MAX_DIM],
    hess: [f64; MAX_TRI],
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dim();
        f.debug_struct("Jet2")
            .field("value", &self.value)
            .field("grad", &self.grad())
            .field("hess", &&self.hess[..d * (d + 1) / 2])
            .finish()
    }
}

impl Jet2 {
    pub fn constant(dim: usize, value: f64) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "jet dimension {dim} out of range"
        );
        Jet2 {
            dim: dim as u8,
            value,
            grad: [0.0; MAX_DIM],
            hess: [0.0; MAX_TRI],
        }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        assert!(index < dim, "coordinate index {index} >= dimension {dim}");
        let mut j = Jet2::constant(dim, value);
        j.grad[index] = 1.0;
        j
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim()]
    }

    #[inline]
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim() && j < self.dim());
        self.hess[tri(i, j)]
    }

    /// First partial along coordinate `k`, as a first-order jet.
    pub fn partial(&self, k: usize) -> Jet1 {
        let d = self.dim();
        assert!(k < d);
        let mut out = Jet1::constant(d, self.grad[k]);
        for i in 0..d {
            out.grad[i] = self.hess[tri(k, i)];
        }
        out
    }

    pub fn truncate(&self) -> Jet1 {
        let mut out = Jet1::constant(self.dim(), self.value);
        out.grad = self.grad;
        out
    }

    #[inline]
    fn check_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "jet dimension mismatch");
    }

    /// Applies a scalar function given its value and first two derivatives at `self.value`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let d = self.dim();
        let mut out = Jet2::constant(d, f0);
        for i in 0..d {
            out.grad[i] = f1 * self.grad[i];
            for j in 0..=i {
                let t = tri(i, j);
                out.hess[t] = f1 * self.hess[t] + f2 * self.grad[i] * self.grad[j];
            }
        }
        out
    }

    pub fn exp(self) -> Self {
        let e = libm::exp(self.value);
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Result<Self, JetError> {
        let v = self.value;
        if !(v > 0.0) {
            return Err(JetError::LogDomain { value: v });
        }
        Ok(self.chain(libm::log(v), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sin(self) -> Self {
        let (s, c) = (libm::sin(self.value), libm::cos(self.value));
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = (libm::sin(self.value), libm::cos(self.value));
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (libm::sinh(self.value), libm::cosh(self.value));
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (libm::sinh(self.value), libm::cosh(self.value));
        self.chain(c, s, c)
    }

    pub fn recip(self) -> Result<Self, JetError> {
        let v = self.value;
        if v == 0.0 {
            return Err(JetError::DivisionByZero { value: v });
        }
        let r = 1.0 / v;
        Ok(self.chain(r, -r * r, 2.0 * r * r * r))
    }

    pub fn checked_div(self, rhs: Self) -> Result<Self, JetError> {
        Ok(self * rhs.recip()?)
    }

    pub fn powi(self, exponent: i32) -> Result<Self, JetError> {
        let v = self.value;
        if exponent == 0 {
            return Ok(Jet2::constant(self.dim(), 1.0));
        }
        if exponent < 0 && v == 0.0 {
            return Err(JetError::PowDomain { value: v, exponent });
        }
        let n = exponent as f64;
        let f0 = libm::pow(v, n);
        let f1 = n * libm::pow(v, n - 1.0);
        let f2 = if exponent == 1 {
            0.0
        } else {
            n * (n - 1.0) * libm::pow(v, n - 2.0)
        };
        Ok(self.chain(f0, f1, f2))
    }

    pub fn is_finite(&self) -> bool {
        let d = self.dim();
        self.value.is_finite()
            && self.grad().iter().all(|x| x.is_finite())
            && self.hess[..d * (d + 1) / 2].iter().all(|x| x.is_finite())
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(mut self, rhs: Jet2) -> Jet2 {
        self.check_dim(&rhs);
        let d = self.dim();
        self.value += rhs.value;
        for i in 0..d {
            self.grad[i] += rhs.grad[i];
        }
        for t in 0..d * (d + 1) / 2 {
            self.hess[t] += rhs.hess[t];
        }
        self
    }
}

impl AddAssign for Jet2 {
    fn add_assign(&mut self, rhs: Jet2) {
        *self = *self + rhs;
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        self + (-rhs)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, rhs: Jet2) -> Jet2 {
        self.check_dim(&rhs);
        let d = self.dim();
        let (u, v) = (self.value, rhs.value);
        let mut out = Jet2::constant(d, u * v);
        for i in 0..d {
            out.grad[i] = u * rhs.grad[i] + v * self.grad[i];
            for j in 0..=i {
                let t = tri(i, j);
                out.hess[t] = u * rhs.hess[t]
                    + v * self.hess[t]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        out
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(mut self, c: f64) -> Jet2 {
        self.value += c;
        self
    }
}

impl Sum for Jet2 {
    fn sum<I: Iterator<Item = Jet2>>(mut iter: I) -> Jet2 {
        let first = iter.next().expect("sum of an empty jet iterator");
        iter.fold(first, |acc, x| acc + x)
    }
}

impl Field for Jet2 {
    fn value(&self) -> f64 {
        self.value
    }
    fn constant_like(&self, c: f64) -> Self {
        Jet2::constant(self.dim(), c)
    }
    fn recip(self) -> Result<Self, JetError> {
        Jet2::recip(self)
    }
    fn scale(mut self, c: f64) -> Self {
        let d = self.dim();
        self.value *= c;
        for i in 0..d {
            self.grad[i] *= c;
        }
        for t in 0..d * (d + 1) / 2 {
            self.hess[t] *= c;
        }
        self
    }
}

/// Value and gradient of a scalar field at one point.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet1 {
    dim: u8,
    value: f64,
    grad: [f64; MAX_DIM],
}

impl fmt::Debug for Jet1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet1")
            .field("value", &self.value)
            .field("grad", &self.grad())
            .finish()
    }
}

impl Jet1 {
    pub fn constant(dim: usize, value: f64) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "jet dimension {dim} out of range"
        );
        Jet1 {
            dim: dim as u8,
            value,
            grad: [0.0; MAX_DIM],
        }
    }

    pub fn variable(dim: usize, index: usize, value: f64) -> Self {
        assert!(index < dim);
        let mut j = Jet1::constant(dim, value);
        j.grad[index] = 1.0;
        j
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn grad(&self) -> &[f64] {
        &self.grad[..self.dim()]
    }

    /// Directional derivative `v(f)` for a tangent vector with coordinate components `v`.
    pub fn along(&self, v: &[f64]) -> f64 {
        self.grad().iter().zip(v).map(|(g, x)| g * x).sum()
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(mut self, rhs: Jet1) -> Jet1 {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        self.value += rhs.value;
        for i in 0..self.dim() {
            self.grad[i] += rhs.grad[i];
        }
        self
    }
}

impl AddAssign for Jet1 {
    fn add_assign(&mut self, rhs: Jet1) {
        *self = *self + rhs;
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, rhs: Jet1) -> Jet1 {
        self + (-rhs)
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, rhs: Jet1) -> Jet1 {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let mut out = Jet1::constant(self.dim(), self.value * rhs.value);
        for i in 0..self.dim() {
            out.grad[i] = self.value * rhs.grad[i] + rhs.value * self.grad[i];
        }
        out
    }
}

impl Mul<f64> for Jet1 {
    type Output = Jet1;
    fn mul(self, c: f64) -> Jet1 {
        self.scale(c)
    }
}

impl Add<f64> for Jet1 {
    type Output = Jet1;
    fn add(mut self, c: f64) -> Jet1 {
        self.value += c;
        self
    }
}

impl Sum for Jet1 {
    fn sum<I: Iterator<Item = Jet1>>(mut iter: I) -> Jet1 {
        let first = iter.next().expect("sum of an empty jet iterator");
        iter.fold(first, |acc, x| acc + x)
    }
}

impl Field for Jet1 {
    fn value(&self) -> f64 {
        self.value
    }
    fn constant_like(&self, c: f64) -> Self {
        Jet1::constant(self.dim(), c)
    }
    fn recip(self) -> Result<Self, JetError> {
        let v = self.value;
        if v == 0.0 {
            return Err(JetError::DivisionByZero { value: v });
        }
        let r = 1.0 / v;
        let mut out = Jet1::constant(self.dim(), r);
        for i in 0..self.dim() {
            out.grad[i] = -r * r * self.grad[i];
        }
        Ok(out)
    }
    fn scale(mut self, c: f64) -> Self {
        self.value *= c;
        for i in 0..self.dim() {
            self.grad[i] *= c;
        }
        self
    }
}

/// Elementary operations accepted by [`jet_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Powi(i32),
}

impl JetOp {
    pub fn name(&self) -> &'static str {
        match self {
            JetOp::Add => "add",
            JetOp::Sub => "sub",
            JetOp::Mul => "mul",
            JetOp::Div => "div",
            JetOp::Neg => "neg",
            JetOp::Exp => "exp",
            JetOp::Log => "log",
            JetOp::Sin => "sin",
            JetOp::Cos => "cos",
            JetOp::Sinh => "sinh",
            JetOp::Cosh => "cosh",
            JetOp::Powi(_) => "powi",
        }
    }

    fn arity(&self) -> usize {
        match self {
            JetOp::Add | JetOp::Sub | JetOp::Mul | JetOp::Div => 2,
            _ => 1,
        }
    }
}

/// Applies `op` to `args`, propagating value, gradient and Hessian.
pub fn jet_apply(op: JetOp, args: &[Jet2]) -> Result<Jet2, JetError> {
    if args.len() != op.arity() {
        return Err(JetError::Arity {
            op: op.name(),
            expected: op.arity(),
            got: args.len(),
        });
    }
    let a = args[0];
    Ok(match op {
        JetOp::Add => a + args[1],
        JetOp::Sub => a - args[1],
        JetOp::Mul => a * args[1],
        JetOp::Div => a.checked_div(args[1])?,
        JetOp::Neg => -a,
        JetOp::Exp => a.exp(),
        JetOp::Log => a.ln()?,
        JetOp::Sin => a.sin(),
        JetOp::Cos => a.cos(),
        JetOp::Sinh => a.sinh(),
        JetOp::Cosh => a.cosh(),
        JetOp::Powi(n) => a.powi(n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::vec::Vec;

    fn z3(v: [f64; 3]) -> [Jet2; 3] {
        [
            Jet2::variable(3, 0, v[0]),
            Jet2::variable(3, 1, v[1]),
            Jet2::variable(3, 2, v[2]),
        ]
    }

    #[test]
    fn exp_of_two_z_at_origin() {
        let [_, _, z] = z3([0.0; 3]);
        let f = (z * 2.0).exp();
        assert_eq!(f.value(), 1.0);
        assert_eq!(f.grad(), &[0.0, 0.0, 2.0]);
        assert_eq!(f.hess(2, 2), 4.0);
        assert_eq!(f.hess(0, 2), 0.0);
    }

    #[test]
    fn y_exp_z_at_origin() {
        let [_, y, z] = z3([0.0; 3]);
        let f = jet_apply(JetOp::Mul, &[y, z.exp()]).unwrap();
        assert_eq!(f.value(), 0.0);
        assert_eq!(f.grad(), &[0.0, 1.0, 0.0]);
        assert_eq!(f.hess(1, 2), 1.0);
        assert_eq!(f.hess(2, 1), 1.0);
        assert_eq!(f.hess(2, 2), 0.0);
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let [x, y, z] = z3([0.3, -0.2, 0.7]);
        let f = (x * y).exp() + z.sin() * x;
        let one = Jet2::constant(3, 1.0);
        assert_eq!(f * one, f);
    }

    #[test]
    fn domain_errors_carry_the_value() {
        let [x, _, _] = z3([0.0, 0.0, 0.0]);
        assert_eq!(
            jet_apply(JetOp::Div, &[x, x]),
            Err(JetError::DivisionByZero { value: 0.0 })
        );
        assert_eq!(
            jet_apply(JetOp::Log, &[x - Jet2::constant(3, 1.0)]),
            Err(JetError::LogDomain { value: -1.0 })
        );
        assert!(matches!(
            jet_apply(JetOp::Powi(-2), &[x]),
            Err(JetError::PowDomain { .. })
        ));
        assert!(matches!(
            jet_apply(JetOp::Exp, &[x, x]),
            Err(JetError::Arity {
                expected: 1,
                got: 2,
                ..
            })
        ));
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn mixing_dimensions_is_a_contract_violation() {
        let _ = Jet2::variable(3, 0, 1.0) + Jet2::variable(2, 0, 1.0);
    }

    #[test]
    fn partial_extracts_hessian_row() {
        let [x, y, _] = z3([0.5, 2.0, 0.0]);
        let f = x * x * y; // grad (2xy, x^2, 0); hess xx = 2y, xy = 2x
        let fx = f.partial(0);
        assert!((fx.value() - 2.0).abs() < 1e-15);
        assert!((fx.grad()[0] - 4.0).abs() < 1e-15);
        assert!((fx.grad()[1] - 1.0).abs() < 1e-15);
    }

    // Polynomial of degree <= 3 encoded as (coefficient, exponents) monomials.
    type Poly = Vec<(f64, [u32; 3])>;

    fn poly_value(p: &Poly, x: [f64; 3]) -> f64 {
        p.iter()
            .map(|(c, e)| {
                c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32)
            })
            .sum()
    }

    fn poly_jet(p: &Poly, x: [f64; 3]) -> Jet2 {
        let v = z3(x);
        p.iter()
            .map(|(c, e)| {
                let mut m = Jet2::constant(3, *c);
                for k in 0..3 {
                    if e[k] > 0 {
                        m = m * v[k].powi(e[k] as i32).unwrap();
                    }
                }
                m
            })
            .sum()
    }

    fn poly_strategy() -> impl Strategy<Value = Poly> {
        prop::collection::vec(
            (
                -2.0f64..2.0,
                (0u32..=3, 0u32..=3, 0u32..=3)
                    .prop_filter("degree <= 3", |(a, b, c)| a + b + c <= 3)
                    .prop_map(|(a, b, c)| [a, b, c]),
            ),
            1..6,
        )
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn product_matches_central_differences(
            p in poly_strategy(),
            q in poly_strategy(),
            x in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let h = 1e-4;
            let f = |pt: [f64; 3]| poly_value(&p, pt) * poly_value(&q, pt);
            let jet = poly_jet(&p, x) * poly_jet(&q, x);
            prop_assert!(close(jet.value(), f(x), 1e-12));
            for i in 0..3 {
                let mut xp = x; xp[i] += h;
                let mut xm = x; xm[i] -= h;
                let fd = (f(xp) - f(xm)) / (2.0 * h);
                prop_assert!(close(jet.grad()[i], fd, 1e-5), "grad {} {} {}", i, jet.grad()[i], fd);
                for j in 0..3 {
                    let shift = |s: f64, t: f64| { let mut y = x; y[i] += s; y[j] += t; f(y) };
                    let fd2 = (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) / (4.0 * h * h);
                    prop_assert!(close(jet.hess(i, j), fd2, 1e-5), "hess {} {} {} {}", i, j, jet.hess(i, j), fd2);
                }
            }
        }

        #[test]
        fn hessian_stays_symmetric_and_finite(
            ops in prop::collection::vec(0usize..8, 1..24),
            x in prop::array::uniform3(-0.9f64..0.9),
        ) {
            let v = z3(x);
            let mut acc = v[0];
            for (k, op) in ops.iter().enumerate() {
                let other = v[k % 3];
                acc = match op {
                    0 => acc + other,
                    1 => acc * other,
                    2 => acc.sin(),
                    3 => acc.cos(),
                    4 => (acc * 0.1).exp(),
                    5 => acc - other * 0.5,
                    6 => (acc * 0.2).sinh(),
                    _ => (acc * 0.2).cosh(),
                };
            }
            prop_assert!(acc.is_finite());
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(acc.hess(i, j), acc.hess(j, i));
                }
            }
        }
    }
}
