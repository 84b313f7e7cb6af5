//! The Levi-Civita connection, computed from coordinate Christoffel symbols
//! and, independently, from the Koszul formula on the frame; covariant
//! derivatives; and the functions `(alpha, beta)` of the structure.

use alloc::vec;
use alloc::vec::Vec;

use crate::dsl::ModelSpec;
use crate::jets::{Jet1, JetMatrix};
use crate::model::{
    frame_jets, max_abs, ModelEvalError, PointStructure, TensorAtPoint, FRAME_COND_BOUND,
};

/// Christoffel symbols with their first derivatives.
#[derive(Debug, Clone)]
pub struct ChristoffelData {
    pub dim: usize,
    /// `gamma[(c * d + a) * d + b] = Gamma^c_ab`, with first derivatives.
    pub gamma: Vec<Jet1>,
}

impl ChristoffelData {
    #[inline]
    fn idx(&self, c: usize, a: usize, b: usize) -> usize {
        (c * self.dim + a) * self.dim + b
    }

    /// `Gamma^c_ab`.
    #[inline]
    pub fn gamma(&self, c: usize, a: usize, b: usize) -> f64 {
        self.gamma[self.idx(c, a, b)].value()
    }

    /// `d_e Gamma^c_ab`.
    #[inline]
    pub fn dgamma(&self, e: usize, c: usize, a: usize, b: usize) -> f64 {
        self.gamma[self.idx(c, a, b)].grad()[e]
    }

    #[inline]
    pub fn gamma_jet(&self, c: usize, a: usize, b: usize) -> Jet1 {
        self.gamma[self.idx(c, a, b)]
    }

    /// All `Gamma^c_ab` values in storage order.
    pub fn values(&self) -> Vec<f64> {
        self.gamma.iter().map(|j| j.value()).collect()
    }
}

/// `Gamma^c_ab = 1/2 g^{ce} (d_a g_eb + d_b g_ae - d_e g_ab)`.
pub fn christoffel(ps: &PointStructure) -> ChristoffelData {
    let d = ps.dim;
    let dg = |e: usize, a: usize, b: usize| ps.g_dn[(a, b)].partial(e);
    let zero = Jet1::constant(d, 0.0);
    let mut gamma = vec![zero; d * d * d];
    for c in 0..d {
        for a in 0..d {
            for b in a..d {
                let mut acc = zero;
                for e in 0..d {
                    let lower = dg(a, e, b) + dg(b, a, e) - dg(e, a, b);
                    acc += ps.g_up[(c, e)].truncate() * lower;
                }
                let v = acc * 0.5;
                gamma[(c * d + a) * d + b] = v;
                gamma[(c * d + b) * d + a] = v;
            }
        }
    }
    ChristoffelData { dim: d, gamma }
}

/// Frame connection coefficients and brackets:
/// `nabla_{E_i} E_j = sum_k omega[k][i][j] E_k`, `[E_i, E_j] = sum_k bracket[k][i][j] E_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConnection {
    pub dim: usize,
    pub omega: Vec<f64>,
    pub bracket: Vec<f64>,
}

impl FrameConnection {
    #[inline]
    pub fn omega(&self, k: usize, i: usize, j: usize) -> f64 {
        self.omega[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn bracket(&self, k: usize, i: usize, j: usize) -> f64 {
        self.bracket[(k * self.dim + i) * self.dim + j]
    }

    /// Frame components of `nabla_{E_i} E_j`.
    pub fn nabla(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.omega(k, i, j)).collect()
    }

    /// Frame components of `[E_i, E_j]`.
    pub fn bracket_vector(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.bracket(k, i, j)).collect()
    }

    /// Max-norm of the coefficient difference.
    pub fn distance(&self, other: &FrameConnection) -> f64 {
        self.omega
            .iter()
            .zip(&other.omega)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// The connection from the Koszul formula on the frame, using only the
/// frame brackets and the constant frame metric:
/// `2 g(nabla_i E_j, E_k) = eps_k c^k_ij - eps_j c^j_ik - eps_i c^i_jk`.
pub fn frame_connection_koszul(
    spec: &ModelSpec,
    point: &[f64],
) -> Result<FrameConnection, ModelEvalError> {
    let d = spec.dim();
    let frame = frame_jets(spec, point)?;
    let values = frame.values();
    let inv = values
        .inverse(FRAME_COND_BOUND)
        .map_err(|_| ModelEvalError::SingularFrame {
            condition: values.condition_estimate(),
            point: point.to_vec(),
        })?;
    // theta^k_a = inv[(a, k)]
    let eps: Vec<f64> = spec.epsilon.iter().map(|e| *e as f64).collect();
    let mut bracket = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                let mut v = 0.0;
                for b in 0..d {
                    v += frame[(i, b)].value() * frame[(j, a)].grad()[b]
                        - frame[(j, b)].value() * frame[(i, a)].grad()[b];
                }
                for k in 0..d {
                    bracket[(k * d + i) * d + j] += inv[(a, k)] * v;
                }
            }
        }
    }
    let c = |k: usize, i: usize, j: usize| bracket[(k * d + i) * d + j];
    let mut omega = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let g_ijk = 0.5 * (eps[k] * c(k, i, j) - eps[j] * c(j, i, k) - eps[i] * c(i, j, k));
                omega[(k * d + i) * d + j] = eps[k] * g_ijk;
            }
        }
    }
    Ok(FrameConnection {
        dim: d,
        omega,
        bracket,
    })
}

/// Frame coefficients of the Christoffel connection,
/// `omega^k_ij = theta^k_c E_i^a (d_a E_j^c + Gamma^c_ab E_j^b)`; brackets
/// are recovered from torsion-freeness.
pub fn frame_connection_from_christoffel(
    ps: &PointStructure,
    ch: &ChristoffelData,
) -> FrameConnection {
    let d = ps.dim;
    let mut omega = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let mut v = vec![0.0; d];
            for (c, vc) in v.iter_mut().enumerate() {
                for a in 0..d {
                    let mut t = ps.frame[(j, c)].grad()[a];
                    for b in 0..d {
                        t += ch.gamma(c, a, b) * ps.e(j, b);
                    }
                    *vc += ps.e(i, a) * t;
                }
            }
            let f = ps.to_frame(&v);
            for k in 0..d {
                omega[(k * d + i) * d + j] = f[k];
            }
        }
    }
    let mut bracket = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                bracket[(k * d + i) * d + j] =
                    omega[(k * d + i) * d + j] - omega[(k * d + j) * d + i];
            }
        }
    }
    FrameConnection {
        dim: d,
        omega,
        bracket,
    }
}

/// Tensor field components carrying first derivatives; the input to
/// [`covariant_derivative`]. Layout as in [`TensorAtPoint`].
#[derive(Debug, Clone)]
pub struct JetTensor {
    pub valence: (usize, usize),
    pub dim: usize,
    pub components: Vec<Jet1>,
    pub point: Vec<f64>,
}

impl JetTensor {
    pub fn vector(v: &[crate::jets::Jet2], point: &[f64]) -> Self {
        JetTensor {
            valence: (1, 0),
            dim: v.len(),
            components: v.iter().map(|j| j.truncate()).collect(),
            point: point.to_vec(),
        }
    }

    pub fn covector(v: &[crate::jets::Jet2], point: &[f64]) -> Self {
        JetTensor {
            valence: (0, 1),
            ..JetTensor::vector(v, point)
        }
    }

    /// A rank-2 tensor from a matrix of jets, `valence` being `(1, 1)`,
    /// `(0, 2)` or `(2, 0)`.
    pub fn matrix(
        valence: (usize, usize),
        m: &JetMatrix<crate::jets::Jet2>,
        point: &[f64],
    ) -> Self {
        assert_eq!(valence.0 + valence.1, 2, "matrix tensors have rank 2");
        JetTensor {
            valence,
            dim: m.rows(),
            components: m.entries().iter().map(|j| j.truncate()).collect(),
            point: point.to_vec(),
        }
    }

    pub fn values(&self) -> TensorAtPoint {
        TensorAtPoint {
            valence: self.valence,
            dim: self.dim,
            components: self.components.iter().map(|j| j.value()).collect(),
            point: self.point.clone(),
        }
    }
}

/// `nabla T` with the derivative slot inserted as the first covariant
/// index: components `[upper..., e, lower...] = (nabla_e T)^{upper}_{lower}`.
pub fn covariant_derivative(ch: &ChristoffelData, t: &JetTensor) -> TensorAtPoint {
    let d = t.dim;
    let (r, s) = t.valence;
    let pos = |idx: &[usize]| idx.iter().fold(0, |acc, &i| acc * d + i);
    TensorAtPoint::from_fn((r, s + 1), d, &t.point, |idx| {
        let e = idx[r];
        let mut base: Vec<usize> = Vec::with_capacity(r + s);
        base.extend_from_slice(&idx[..r]);
        base.extend_from_slice(&idx[r + 1..]);
        let mut v = t.components[pos(&base)].grad()[e];
        let mut tmp = base.clone();
        for k in 0..r {
            let a = base[k];
            for f in 0..d {
                tmp[k] = f;
                v += ch.gamma(a, e, f) * t.components[pos(&tmp)].value();
            }
            tmp[k] = a;
        }
        for k in r..r + s {
            let b = base[k];
            for f in 0..d {
                tmp[k] = f;
                v -= ch.gamma(f, e, b) * t.components[pos(&tmp)].value();
            }
            tmp[k] = b;
        }
        v
    })
}

/// The functions of the structure, recovered from `nabla xi`, with their
/// differentials.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
    /// `d alpha` (covector components).
    pub d_alpha: Vec<f64>,
    pub d_beta: Vec<f64>,
    /// `grad alpha^a = g^{ab} d_b alpha`.
    pub grad_alpha: Vec<f64>,
    pub grad_beta: Vec<f64>,
    /// `xi(alpha)`.
    pub xi_alpha: f64,
    pub xi_beta: f64,
    /// Max-norm of `nabla xi + alpha phi + beta (id - eta (x) xi)`.
    pub residual: f64,
}

/// `(nabla xi)^c_a = d_a xi^c + Gamma^c_ab xi^b` with first derivatives,
/// stored at `[c * d + a]`.
pub fn nabla_xi_jets(ps: &PointStructure, ch: &ChristoffelData) -> Vec<Jet1> {
    let d = ps.dim;
    let mut out = Vec::with_capacity(d * d);
    for c in 0..d {
        for a in 0..d {
            let mut v = ps.xi[c].partial(a);
            for b in 0..d {
                v += ch.gamma_jet(c, a, b) * ps.xi[b].truncate();
            }
            out.push(v);
        }
    }
    out
}

/// `(alpha, beta)` as jets:
/// `beta = -(1/2n) sum_i eps_i g(nabla_{E_i} xi, E_i)`,
/// `alpha = (1/2n) sum_i eps_i g(nabla_{E_i} xi, phi E_i)`.
pub fn alpha_beta_jets(ps: &PointStructure, nabla_xi: &[Jet1]) -> (Jet1, Jet1) {
    let d = ps.dim;
    let zero = Jet1::constant(d, 0.0);
    let g = |a: usize, b: usize| ps.g_dn[(a, b)].truncate();
    let mut alpha = zero;
    let mut beta = zero;
    for i in 0..d {
        let e: Vec<Jet1> = (0..d).map(|a| ps.frame[(i, a)].truncate()).collect();
        let phi_e: Vec<Jet1> = (0..d)
            .map(|a| (0..d).fold(zero, |acc, b| acc + ps.phi[(a, b)].truncate() * e[b]))
            .collect();
        // (nabla_{E_i} xi)^c
        let nx: Vec<Jet1> = (0..d)
            .map(|c| (0..d).fold(zero, |acc, a| acc + nabla_xi[c * d + a] * e[a]))
            .collect();
        let mut ge = zero;
        let mut gpe = zero;
        for c in 0..d {
            for b in 0..d {
                let gcb = g(c, b);
                ge += nx[c] * gcb * e[b];
                gpe += nx[c] * gcb * phi_e[b];
            }
        }
        beta += ge * ps.epsilon[i];
        alpha += gpe * ps.epsilon[i];
    }
    let k = 1.0 / (2.0 * ps.n as f64);
    (alpha * k, beta * (-k))
}

/// Extracts `(alpha, beta)` with their gradients and the residual of
/// `nabla_X xi = -alpha phi X - beta (X - eta(X) xi)`.
pub fn extract_alpha_beta(ps: &PointStructure, ch: &ChristoffelData) -> AlphaBeta {
    let d = ps.dim;
    let nabla_xi = nabla_xi_jets(ps, ch);
    let (a, b) = alpha_beta_jets(ps, &nabla_xi);
    let raise = |w: &[f64]| -> Vec<f64> {
        (0..d)
            .map(|i| (0..d).map(|j| ps.ginv(i, j) * w[j]).sum())
            .collect()
    };
    let d_alpha = a.grad().to_vec();
    let d_beta = b.grad().to_vec();
    let xi: Vec<f64> = (0..d).map(|i| ps.xi_v(i)).collect();
    let mut defect = Vec::with_capacity(d * d);
    for c in 0..d {
        for x in 0..d {
            let id = if c == x { 1.0 } else { 0.0 };
            let rhs = -a.value() * ps.phi_v(c, x) - b.value() * (id - ps.eta_v(x) * xi[c]);
            defect.push(nabla_xi[c * d + x].value() - rhs);
        }
    }
    AlphaBeta {
        alpha: a.value(),
        beta: b.value(),
        grad_alpha: raise(&d_alpha),
        grad_beta: raise(&d_beta),
        xi_alpha: a.along(&xi),
        xi_beta: b.along(&xi),
        d_alpha,
        d_beta,
        residual: max_abs(&defect),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtin;
    use crate::model::assemble;

    fn e25() -> ModelSpec {
        builtin("example25").unwrap()
    }

    #[test]
    fn flat_connection_vanishes() {
        let spec = builtin("flat3").unwrap();
        let p = [0.2, 0.4, -0.1];
        let ps = assemble(&spec, &p).unwrap();
        let ch = christoffel(&ps);
        assert!(ch
            .gamma
            .iter()
            .all(|g| g.value() == 0.0 && g.grad().iter().all(|v| *v == 0.0)));
        let k = frame_connection_koszul(&spec, &p).unwrap();
        assert!(k.omega.iter().all(|v| *v == 0.0));
        let ab = extract_alpha_beta(&ps, &ch);
        assert_eq!((ab.alpha, ab.beta, ab.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn example25_connection_at_origin() {
        let spec = e25();
        let ps = assemble(&spec, &[0.0; 3]).unwrap();
        let ch = christoffel(&ps);
        let w = frame_connection_from_christoffel(&ps, &ch);
        // nabla_{E1} E1 = E3, nabla_{E3} E3 = 0
        assert!(max_abs(&sub(&w.nabla(0, 0), &[0.0, 0.0, 1.0])) < 1e-14);
        assert!(max_abs(&w.nabla(2, 2)) < 1e-14);
    }

    fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    #[test]
    fn koszul_table_entries() {
        let spec = e25();
        let (y, z) = (0.3, -0.4);
        let k = frame_connection_koszul(&spec, &[0.1, y, z]).unwrap();
        let h = 0.5 * libm::exp(2.0 * z);
        let yez = y * libm::exp(z);
        // nabla_{E2} E3 = -1/2 e^{2z} E1 - E2
        assert!(max_abs(&sub(&k.nabla(1, 2), &[-h, -1.0, 0.0])) < 1e-14);
        // nabla_{E2} E1 = -y e^z E2 + 1/2 e^{2z} E3
        assert!(max_abs(&sub(&k.nabla(1, 0), &[0.0, -yez, h])) < 1e-14);
        // [E2, E3] = -E2, [E1, E3] = -E1
        assert!(max_abs(&sub(&k.bracket_vector(1, 2), &[0.0, -1.0, 0.0])) < 1e-14);
        assert!(max_abs(&sub(&k.bracket_vector(0, 2), &[-1.0, 0.0, 0.0])) < 1e-14);
        // [E1, E2] = y e^z E2 - e^{2z} E3
        assert!(max_abs(&sub(&k.bracket_vector(0, 1), &[0.0, yez, -2.0 * h])) < 1e-14);
    }

    #[test]
    fn christoffel_route_matches_koszul() {
        let spec = e25();
        for p in crate::sampling::sample_points(&spec, 100, 42).unwrap() {
            let ps = assemble(&spec, &p).unwrap();
            let ch = christoffel(&ps);
            let a = frame_connection_from_christoffel(&ps, &ch);
            let b = frame_connection_koszul(&spec, &p).unwrap();
            assert!(a.distance(&b) < 1e-8, "{p:?}: {}", a.distance(&b));
            let dbr = max_abs(&sub(&a.bracket, &b.bracket));
            assert!(dbr < 1e-8);
        }
    }

    #[test]
    fn metric_compatibility_and_symmetry() {
        let spec = e25();
        for p in crate::sampling::sample_points(&spec, 20, 7).unwrap() {
            let ps = assemble(&spec, &p).unwrap();
            let ch = christoffel(&ps);
            let ng = covariant_derivative(&ch, &JetTensor::matrix((0, 2), &ps.g_dn, &p));
            assert!(ng.max_norm() < 1e-9, "{}", ng.max_norm());
            for c in 0..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        assert_eq!(ch.gamma_jet(c, a, b), ch.gamma_jet(c, b, a));
                    }
                }
            }
            // inverse metric by jet inversion vs the frame formula
            let fr = ps.g_up_from_frame();
            for a in 0..3 {
                for b in 0..3 {
                    assert!((ps.ginv(a, b) - fr[a * 3 + b]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn nabla_eta_slots() {
        let spec = e25();
        let ps = assemble(&spec, &[0.0; 3]).unwrap();
        let ch = christoffel(&ps);
        let ne = covariant_derivative(&ch, &JetTensor::covector(&ps.eta, &ps.point));
        // frame = identity at the origin, so coordinate slots are frame slots
        assert!((ne.get(&[0, 0]) + 1.0).abs() < 1e-14);
        assert!((ne.get(&[1, 0]) + 0.5).abs() < 1e-14);
        assert!(ne.get(&[2, 0]).abs() < 1e-14);
    }

    #[test]
    fn alpha_beta_of_example25() {
        let spec = e25();
        for (p, alpha) in [
            ([0.0; 3], 0.5),
            ([0.0, 0.0, 0.5], 0.5 * core::f64::consts::E),
        ] {
            let ps = assemble(&spec, &p).unwrap();
            let ab = extract_alpha_beta(&ps, &christoffel(&ps));
            assert!((ab.alpha - alpha).abs() < 1e-14, "{}", ab.alpha);
            assert!((ab.beta - 1.0).abs() < 1e-14);
            assert!(ab.residual < 1e-9);
            // xi(alpha) = e^{2z}, xi(beta) = 0
            assert!((ab.xi_alpha - 2.0 * alpha).abs() < 1e-13);
            assert!(ab.xi_beta.abs() < 1e-13);
        }
    }
}
