use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use super::{Field, Jet2};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { condition: f64 },
    #[error("design matrix is rank deficient: column {column} depends on the preceding columns")]
    RankDeficient { column: usize },
    #[error("shape mismatch: {0}")]
    Shape(&'static str),
}

/// Dense row-major matrix over jets (or plain `f64`).
#[derive(Debug, Clone, PartialEq)]
pub struct JetMatrix<S = Jet2> {
    rows: usize,
    cols: usize,
    entries: Vec<S>,
}

impl<S: Field> JetMatrix<S> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        JetMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn values(&self) -> JetMatrix<f64> {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Field::value).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        JetMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> JetMatrix<T> {
        JetMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        JetMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = self[(r, 0)] * rhs[(0, c)];
            for k in 1..self.cols {
                acc = acc + self[(r, k)] * rhs[(k, c)];
            }
            acc
        })
    }

    /// Infinity-norm condition estimate of the value part.
    pub fn condition_estimate(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let values = self.values();
        match gauss_jordan(&values.entries, self.rows) {
            Ok(inv) => inf_norm(&values.entries, self.rows) * inf_norm(&inv, self.rows),
            Err(()) => f64::INFINITY,
        }
    }

    /// Inverse with jet propagation. Fails when the condition estimate of
    /// the value part exceeds `cond_bound`.
    pub fn inverse(&self, cond_bound: f64) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::Shape("inverse requires a square matrix"));
        }
        let condition = self.condition_estimate();
        if !(condition <= cond_bound) {
            return Err(LinalgError::Singular { condition });
        }
        let entries = gauss_jordan(&self.entries, self.rows)
            .map_err(|()| LinalgError::Singular { condition })?;
        Ok(JetMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }
}

impl<S> Index<(usize, usize)> for JetMatrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        debug_assert!(r < self.rows && c < self.cols);
        &self.entries[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for JetMatrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.entries[r * self.cols + c]
    }
}

fn inf_norm(a: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|r| a[r * n..(r + 1) * n].iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Jordan elimination with partial pivoting on the value part.
fn gauss_jordan<S: Field>(a: &[S], n: usize) -> Result<Vec<S>, ()> {
    let mut m: Vec<S> = a.to_vec();
    let zero = a[0].constant_like(0.0);
    let one = a[0].constant_like(1.0);
    let mut inv: Vec<S> = (0..n * n)
        .map(|k| if k / n == k % n { one } else { zero })
        .collect();
    let scale = a.iter().map(|x| x.value().abs()).fold(0.0, f64::max);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                m[i * n + col]
                    .value()
                    .abs()
                    .total_cmp(&m[j * n + col].value().abs())
            })
            .unwrap();
        if !(m[pivot_row * n + col].value().abs() > scale * 1e-300) {
            return Err(());
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
                inv.swap(col * n + k, pivot_row * n + k);
            }
        }
        let p = m[col * n + col].recip().map_err(|_| ())?;
        for k in 0..n {
            m[col * n + k] = m[col * n + k] * p;
            inv[col * n + k] = inv[col * n + k] * p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * n + col];
            if f.value() == 0.0 && f == f.constant_like(0.0) {
                continue;
            }
            for k in 0..n {
                m[r * n + k] = m[r * n + k] - f * m[col * n + k];
                inv[r * n + k] = inv[r * n + k] - f * inv[col * n + k];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zjet(z: f64) -> Jet2 {
        Jet2::variable(3, 2, z)
    }

    fn max_defect_from_identity(m: &JetMatrix<Jet2>) -> f64 {
        let n = m.rows();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let e = m[(r, c)];
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((e.value() - target).abs());
                for i in 0..3 {
                    worst = worst.max(e.grad()[i].abs());
                    for j in 0..3 {
                        worst = worst.max(e.hess(i, j).abs());
                    }
                }
            }
        }
        worst
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = JetMatrix::from_fn(3, 3, |r, c| {
            Jet2::constant(3, if r == c { 1.0 } else { 0.0 })
        });
        let inv = id.inverse(1e12).unwrap();
        assert_eq!(inv, id);
    }

    #[test]
    fn diagonal_exponential_matrix() {
        let z = 0.3;
        let ez = zjet(z).exp();
        let m = JetMatrix::from_fn(3, 3, |r, c| match (r, c) {
            (0, 0) | (1, 1) => ez,
            (2, 2) => Jet2::constant(3, 1.0),
            _ => Jet2::constant(3, 0.0),
        });
        let inv = m.inverse(1e12).unwrap();
        let expected = libm::exp(-z);
        for k in 0..2 {
            assert!((inv[(k, k)].value() - expected).abs() < 1e-15);
            assert!((inv[(k, k)].grad()[2] + expected).abs() < 1e-15);
            assert!((inv[(k, k)].hess(2, 2) - expected).abs() < 1e-14);
        }
        assert_eq!(inv[(2, 2)].value(), 1.0);
        assert!(max_defect_from_identity(&m.matmul(&inv)) < 1e-10);
    }

    #[test]
    fn singular_matrix_reports_condition() {
        let m = JetMatrix::from_fn(2, 2, |_, _| 1.0f64);
        match m.inverse(1e12) {
            Err(LinalgError::Singular { condition }) => assert!(condition.is_infinite()),
            other => panic!("{other:?}"),
        }
        let near = JetMatrix::from_fn(
            2,
            2,
            |r, c| if r == 1 && c == 1 { 1.0 + 1e-9 } else { 1.0f64 },
        );
        assert!(matches!(
            near.inverse(1e6),
            Err(LinalgError::Singular { .. })
        ));
    }

    fn random_jet_matrix(seed: &[f64]) -> JetMatrix<Jet2> {
        let x = [
            Jet2::variable(3, 0, 0.1),
            Jet2::variable(3, 1, -0.2),
            Jet2::variable(3, 2, 0.3),
        ];
        JetMatrix::from_fn(3, 3, |r, c| {
            let s = seed[r * 3 + c];
            let diag = if r == c { 3.0 } else { 0.0 };
            (x[(r + c) % 3] * s).sin() + x[c] * x[r] * s + diag
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn double_inverse_is_identity(seed in prop::collection::vec(-1.0f64..1.0, 9)) {
            let m = random_jet_matrix(&seed);
            let inv = m.inverse(1e12).unwrap();
            prop_assert!(max_defect_from_identity(&m.matmul(&inv)) < 1e-10);
            let back = inv.inverse(1e12).unwrap();
            for (a, b) in back.entries().iter().zip(m.entries()) {
                prop_assert!((a.value() - b.value()).abs() < 1e-9);
                for i in 0..3 {
                    prop_assert!((a.grad()[i] - b.grad()[i]).abs() < 1e-9);
                    for j in 0..3 {
                        prop_assert!((a.hess(i, j) - b.hess(i, j)).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
