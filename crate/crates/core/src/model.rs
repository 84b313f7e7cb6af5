//! Structure tensors `(g, phi, xi, eta)` of an almost paracontact metric
//! manifold, assembled as second-order jets at one point.

use alloc::vec;
use alloc::vec::Vec;

use crate::dsl::{EvalError, ModelSpec};
use crate::jets::{symmetric_eigenvalues, Jet2, JetMatrix, LinalgError};

/// Frames whose condition estimate exceeds this bound are rejected.
pub const FRAME_COND_BOUND: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelEvalError {
    #[error("frame is singular at {point:?} (condition estimate {condition:e})")]
    SingularFrame { condition: f64, point: Vec<f64> },
    #[error("metric is singular at {point:?} (condition estimate {condition:e})")]
    SingularMetric { condition: f64, point: Vec<f64> },
    #[error("point has {got} coordinates, model dimension is {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// All structure tensors at one point, in coordinate components.
#[derive(Debug, Clone)]
pub struct PointStructure {
    pub n: usize,
    pub dim: usize,
    pub point: Vec<f64>,
    /// `frame[(i, a)] = E_i^a`.
    pub frame: JetMatrix<Jet2>,
    /// `coframe[(i, a)] = theta^i_a`, dual to the frame.
    pub coframe: JetMatrix<Jet2>,
    pub g_dn: JetMatrix<Jet2>,
    pub g_up: JetMatrix<Jet2>,
    /// `phi[(a, b)] = phi^a_b`.
    pub phi: JetMatrix<Jet2>,
    pub xi: Vec<Jet2>,
    pub eta: Vec<Jet2>,
    pub epsilon: Vec<f64>,
    /// `phi E_i = sum_j phi_frame[j][i] E_j`.
    pub phi_frame: Vec<Vec<f64>>,
    pub xi_index: usize,
}

/// Evaluates the frame expressions as jets: `E[(i, a)] = E_i^a`.
pub fn frame_jets(spec: &ModelSpec, point: &[f64]) -> Result<JetMatrix<Jet2>, ModelEvalError> {
    let d = spec.dim();
    if point.len() != d {
        return Err(ModelEvalError::Dimension {
            expected: d,
            got: point.len(),
        });
    }
    let mut entries = Vec::with_capacity(d * d);
    for row in &spec.frame {
        for e in row {
            entries.push(e.eval_jet(point)?);
        }
    }
    Ok(JetMatrix::from_fn(d, d, |i, a| entries[i * d + a]))
}

/// Builds the structure tensors of `spec` at `point`.
pub fn assemble(spec: &ModelSpec, point: &[f64]) -> Result<PointStructure, ModelEvalError> {
    let d = spec.dim();
    let frame = frame_jets(spec, point)?;
    let inv = frame.inverse(FRAME_COND_BOUND).map_err(|e| match e {
        LinalgError::Singular { condition } => ModelEvalError::SingularFrame {
            condition,
            point: point.to_vec(),
        },
        _ => ModelEvalError::SingularFrame {
            condition: f64::INFINITY,
            point: point.to_vec(),
        },
    })?;
    // (E^T)^{-1} = (E^{-1})^T gives theta^i_a.
    let coframe = inv.transpose();
    let epsilon: Vec<f64> = spec.epsilon.iter().map(|e| *e as f64).collect();
    let zero = Jet2::constant(d, 0.0);

    let g_dn = JetMatrix::from_fn(d, d, |a, b| {
        (0..d).fold(zero, |acc, i| {
            acc + coframe[(i, a)] * coframe[(i, b)] * epsilon[i]
        })
    });
    let g_up = g_dn
        .inverse(FRAME_COND_BOUND * FRAME_COND_BOUND)
        .map_err(|e| {
            let condition = match e {
                LinalgError::Singular { condition } => condition,
                _ => f64::INFINITY,
            };
            ModelEvalError::SingularMetric {
                condition,
                point: point.to_vec(),
            }
        })?;

    let phi_frame: Vec<Vec<f64>> = spec
        .phi_frame
        .iter()
        .map(|r| r.iter().map(|v| *v as f64).collect())
        .collect();
    let phi = JetMatrix::from_fn(d, d, |a, b| {
        let mut acc = zero;
        for j in 0..d {
            for i in 0..d {
                let f = phi_frame[j][i];
                if f != 0.0 {
                    acc += frame[(j, a)] * coframe[(i, b)] * f;
                }
            }
        }
        acc
    });

    let x = spec.xi_index;
    let xi: Vec<Jet2> = (0..d).map(|a| frame[(x, a)]).collect();
    let eta: Vec<Jet2> = (0..d)
        .map(|a| (0..d).fold(zero, |acc, b| acc + g_dn[(a, b)] * xi[b]))
        .collect();

    Ok(PointStructure {
        n: spec.n,
        dim: d,
        point: point.to_vec(),
        frame,
        coframe,
        g_dn,
        g_up,
        phi,
        xi,
        eta,
        epsilon,
        phi_frame,
        xi_index: x,
    })
}

impl PointStructure {
    #[inline]
    pub fn g(&self, a: usize, b: usize) -> f64 {
        self.g_dn[(a, b)].value()
    }

    #[inline]
    pub fn ginv(&self, a: usize, b: usize) -> f64 {
        self.g_up[(a, b)].value()
    }

    #[inline]
    pub fn phi_v(&self, a: usize, b: usize) -> f64 {
        self.phi[(a, b)].value()
    }

    #[inline]
    pub fn xi_v(&self, a: usize) -> f64 {
        self.xi[a].value()
    }

    #[inline]
    pub fn eta_v(&self, a: usize) -> f64 {
        self.eta[a].value()
    }

    /// `E_i^a` at value level.
    #[inline]
    pub fn e(&self, i: usize, a: usize) -> f64 {
        self.frame[(i, a)].value()
    }

    /// `theta^i_a` at value level.
    #[inline]
    pub fn theta(&self, i: usize, a: usize) -> f64 {
        self.coframe[(i, a)].value()
    }

    /// `g(X, Y)` for coordinate-component vectors.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += self.g(a, b) * x[a] * y[b];
            }
        }
        s
    }

    /// `phi X` for a coordinate-component vector.
    pub fn apply_phi(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|a| (0..d).map(|b| self.phi_v(a, b) * x[b]).sum())
            .collect()
    }

    /// `eta(X)`.
    pub fn eta_of(&self, x: &[f64]) -> f64 {
        (0..self.dim).map(|a| self.eta_v(a) * x[a]).sum()
    }

    /// Coordinate components of the frame field `E_i`.
    pub fn frame_vector(&self, i: usize) -> Vec<f64> {
        (0..self.dim).map(|a| self.e(i, a)).collect()
    }

    /// Frame components `theta^k(V)` of a coordinate vector.
    pub fn to_frame(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|k| (0..d).map(|a| self.theta(k, a) * v[a]).sum())
            .collect()
    }

    /// The inverse metric by the frame formula `sum_i eps_i E_i (x) E_i`.
    pub fn g_up_from_frame(&self) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..d {
                out[a * d + b] = (0..d)
                    .map(|i| self.epsilon[i] * self.e(i, a) * self.e(i, b))
                    .sum();
            }
        }
        out
    }

    /// Number of positive and negative metric eigenvalues (threshold 1e-8).
    pub fn signature(&self) -> (usize, usize) {
        let d = self.dim;
        let vals: Vec<f64> = (0..d * d).map(|k| self.g(k / d, k % d)).collect();
        let ev = symmetric_eigenvalues(&vals, d);
        (
            ev.iter().filter(|v| **v > 1e-8).count(),
            ev.iter().filter(|v| **v < -1e-8).count(),
        )
    }
}

/// Max-norm residuals of the almost paracontact metric axioms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompatibilityReport {
    /// `phi xi = 0`.
    pub phi_xi: f64,
    /// `eta o phi = 0`.
    pub eta_phi: f64,
    /// `eta(xi) = 1`.
    pub eta_xi: f64,
    /// `phi^2 = id - eta (x) xi`.
    pub phi_squared: f64,
    /// `g(phi X, phi Y) = -g(X, Y) + eta(X) eta(Y)`.
    pub metric: f64,
}

impl CompatibilityReport {
    /// Worst of the four almost paracontact axioms.
    pub fn structure(&self) -> f64 {
        self.phi_xi
            .max(self.eta_phi)
            .max(self.eta_xi)
            .max(self.phi_squared)
    }

    pub fn max(&self) -> f64 {
        self.structure().max(self.metric)
    }
}

/// Residuals of the compatibility axioms on the coordinate basis.
pub fn check_compatibility(ps: &PointStructure) -> CompatibilityReport {
    let d = ps.dim;
    let mut r = CompatibilityReport::default();
    for a in 0..d {
        let phi_xi: f64 = (0..d).map(|b| ps.phi_v(a, b) * ps.xi_v(b)).sum();
        r.phi_xi = r.phi_xi.max(phi_xi.abs());
        let eta_phi: f64 = (0..d).map(|b| ps.eta_v(b) * ps.phi_v(b, a)).sum();
        r.eta_phi = r.eta_phi.max(eta_phi.abs());
    }
    let eta_xi: f64 = (0..d).map(|a| ps.eta_v(a) * ps.xi_v(a)).sum();
    r.eta_xi = (eta_xi - 1.0).abs();
    for a in 0..d {
        for b in 0..d {
            let sq: f64 = (0..d).map(|c| ps.phi_v(a, c) * ps.phi_v(c, b)).sum();
            let id = if a == b { 1.0 } else { 0.0 };
            r.phi_squared = r
                .phi_squared
                .max((sq - id + ps.eta_v(b) * ps.xi_v(a)).abs());
            let mut gpp = 0.0;
            for c in 0..d {
                for e in 0..d {
                    gpp += ps.g(c, e) * ps.phi_v(c, a) * ps.phi_v(e, b);
                }
            }
            r.metric = r
                .metric
                .max((gpp + ps.g(a, b) - ps.eta_v(a) * ps.eta_v(b)).abs());
        }
    }
    r
}

/// A tensor of valence `(r, s)` at one point, stored row-major with the
/// contravariant indices first.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorAtPoint {
    pub valence: (usize, usize),
    pub dim: usize,
    pub components: Vec<f64>,
    pub point: Vec<f64>,
}

impl TensorAtPoint {
    pub fn zeros(valence: (usize, usize), dim: usize, point: &[f64]) -> Self {
        let rank = valence.0 + valence.1;
        TensorAtPoint {
            valence,
            dim,
            components: vec![0.0; dim.pow(rank as u32)],
            point: point.to_vec(),
        }
    }

    /// Fills every component from its multi-index.
    pub fn from_fn(
        valence: (usize, usize),
        dim: usize,
        point: &[f64],
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        let mut t = TensorAtPoint::zeros(valence, dim, point);
        let rank = t.rank();
        let mut idx = vec![0usize; rank];
        for k in 0..t.components.len() {
            t.decode(k, &mut idx);
            t.components[k] = f(&idx);
        }
        t
    }

    pub fn rank(&self) -> usize {
        self.valence.0 + self.valence.1
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    /// Writes the multi-index of flat position `k` into `idx`.
    pub fn decode(&self, mut k: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = k % self.dim;
            k /= self.dim;
        }
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let k = self.offset(idx);
        self.components[k] = v;
    }

    pub fn max_norm(&self) -> f64 {
        max_abs(&self.components)
    }

    /// Max-norm of the componentwise difference.
    pub fn distance(&self, other: &TensorAtPoint) -> f64 {
        assert_eq!(self.valence, other.valence, "valence mismatch");
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Max-norm of a slice (0 for an empty slice); NaN propagates as infinity.
pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m: f64, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}
