//! Riemann curvature, Ricci tensor, scalar curvature, Ricci operator,
//! xi-sectional curvature, and an independent finite-difference oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::connection::ChristoffelData;
use crate::dsl::ModelSpec;
use crate::jets::JetMatrix;
use crate::model::{ModelEvalError, PointStructure, FRAME_COND_BOUND};

/// Curvature at one point. Index conventions:
/// `riem_ud[d][a][b][c] = (R(d_a, d_b) d_c)^d` with
/// `R(X, Y) Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`;
/// `riem_dn[a][b][c][w] = R(d_a, d_b, d_c, d_w) = g(R(d_a, d_b) d_c, d_w)`;
/// `Ric(Y, Z) = trace(X -> R(X, Y) Z)`; `Ric(X, Y) = g(QX, Y)` with
/// `q_ud[c][a] = Q^c_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub dim: usize,
    pub riem_ud: Vec<f64>,
    pub riem_dn: Vec<f64>,
    pub ric: Vec<f64>,
    pub scal: f64,
    pub q_ud: Vec<f64>,
}

#[inline]
fn at4(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

impl CurvatureData {
    #[inline]
    pub fn r_ud(&self, d: usize, a: usize, b: usize, c: usize) -> f64 {
        self.riem_ud[at4(self.dim, d, a, b, c)]
    }

    #[inline]
    pub fn r_dn(&self, a: usize, b: usize, c: usize, w: usize) -> f64 {
        self.riem_dn[at4(self.dim, a, b, c, w)]
    }

    #[inline]
    pub fn ric(&self, a: usize, b: usize) -> f64 {
        self.ric[a * self.dim + b]
    }

    #[inline]
    pub fn q(&self, c: usize, a: usize) -> f64 {
        self.q_ud[c * self.dim + a]
    }

    /// `R(X, Y) Z` for coordinate-component vectors.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (d, o) in out.iter_mut().enumerate() {
            for a in 0..n {
                if x[a] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    if y[b] == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        *o += self.r_ud(d, a, b, c) * x[a] * y[b] * z[c];
                    }
                }
            }
        }
        out
    }

    /// `Ric(X, Y)`.
    pub fn ric_of(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += self.ric(a, b) * x[a] * y[b];
            }
        }
        s
    }

    /// `QX`.
    pub fn apply_q(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|c| (0..n).map(|a| self.q(c, a) * x[a]).sum())
            .collect()
    }

    /// Largest violations of the algebraic symmetries of `R(X, Y, Z, W)`:
    /// `[skew in XY, skew in ZW, pair exchange, first Bianchi]`.
    pub fn symmetry_defects(&self) -> [f64; 4] {
        let n = self.dim;
        let mut out = [0.0f64; 4];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for w in 0..n {
                        let r = self.r_dn(a, b, c, w);
                        out[0] = out[0].max((r + self.r_dn(b, a, c, w)).abs());
                        out[1] = out[1].max((r + self.r_dn(a, b, w, c)).abs());
                        out[2] = out[2].max((r - self.r_dn(c, w, a, b)).abs());
                        let bianchi =
                            self.r_ud(w, a, b, c) + self.r_ud(w, b, c, a) + self.r_ud(w, c, a, b);
                        out[3] = out[3].max(bianchi.abs());
                    }
                }
            }
        }
        out
    }
}

/// The Riemann tensor from `d Gamma + Gamma Gamma`, in both index positions.
pub fn riemann(ps: &PointStructure, ch: &ChristoffelData) -> (Vec<f64>, Vec<f64>) {
    let n = ps.dim;
    let gamma = ch.values();
    let ud = riemann_from_gamma(n, &gamma, |e, c, a, b| ch.dgamma(e, c, a, b));
    let dn = lower_riemann(n, &ud, |a, b| ps.g(a, b));
    (ud, dn)
}

fn riemann_from_gamma(
    n: usize,
    gamma: &[f64],
    dgamma: impl Fn(usize, usize, usize, usize) -> f64,
) -> Vec<f64> {
    let g = |c: usize, a: usize, b: usize| gamma[(c * n + a) * n + b];
    let mut ud = vec![0.0; n * n * n * n];
    for d in 0..n {
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut v = dgamma(a, d, b, c) - dgamma(b, d, a, c);
                    for e in 0..n {
                        v += g(d, a, e) * g(e, b, c) - g(d, b, e) * g(e, a, c);
                    }
                    ud[at4(n, d, a, b, c)] = v;
                }
            }
        }
    }
    ud
}

fn lower_riemann(n: usize, ud: &[f64], g: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut dn = vec![0.0; n * n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for w in 0..n {
                    dn[at4(n, a, b, c, w)] = (0..n).map(|d| g(d, w) * ud[at4(n, d, a, b, c)]).sum();
                }
            }
        }
    }
    dn
}

/// Completes the curvature data with `Ric`, `scal` and `Q`.
pub fn ricci_scalar_q(ps: &PointStructure, riem_ud: Vec<f64>, riem_dn: Vec<f64>) -> CurvatureData {
    let n = ps.dim;
    let mut ric = vec![0.0; n * n];
    for b in 0..n {
        for c in 0..n {
            ric[b * n + c] = (0..n).map(|a| riem_ud[at4(n, a, a, b, c)]).sum();
        }
    }
    let mut scal = 0.0;
    let mut q_ud = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            scal += ps.ginv(a, b) * ric[a * n + b];
        }
        for c in 0..n {
            q_ud[c * n + a] = (0..n).map(|b| ps.ginv(c, b) * ric[a * n + b]).sum();
        }
    }
    CurvatureData {
        dim: n,
        riem_ud,
        riem_dn,
        ric,
        scal,
        q_ud,
    }
}

/// Riemann, Ricci, scalar curvature and Ricci operator at one point.
pub fn curvature(ps: &PointStructure, ch: &ChristoffelData) -> CurvatureData {
    let (ud, dn) = riemann(ps, ch);
    ricci_scalar_q(ps, ud, dn)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SectionalError {
    #[error("vector is isotropic (g(X, X) = {norm})")]
    Isotropic { norm: f64 },
    #[error("vector is not orthogonal to xi (g(X, xi) = {inner})")]
    NotOrthogonal { inner: f64 },
    #[error("vector is not normalized (g(X, X) = {norm}, expected +1 or -1)")]
    NotNormalized { norm: f64 },
}

/// `K(xi, X)`: `eps_X` times the sectional curvature of the plane spanned
/// by `xi` and the unit vector `X` orthogonal to `xi`, `eps_X = g(X, X)`.
/// For such `X` this equals `R(X, xi, xi, X)`.
pub fn xi_sectional(
    ps: &PointStructure,
    cd: &CurvatureData,
    x: &[f64],
) -> Result<f64, SectionalError> {
    let n = ps.dim;
    let xi: Vec<f64> = (0..n).map(|a| ps.xi_v(a)).collect();
    let norm = ps.inner(x, x);
    if norm.abs() <= 1e-8 {
        return Err(SectionalError::Isotropic { norm });
    }
    let inner = ps.inner(x, &xi);
    if inner.abs() >= 1e-8 {
        return Err(SectionalError::NotOrthogonal { inner });
    }
    if (norm.abs() - 1.0).abs() > 1e-8 {
        return Err(SectionalError::NotNormalized { norm });
    }
    let eps = norm.signum();
    let rxi = cd.apply(x, &xi, &xi);
    let r = ps.inner(&rxi, x);
    let plane = norm * ps.inner(&xi, &xi) - inner * inner;
    Ok(eps * r / plane)
}

/// Christoffel symbols and Riemann tensor by central differences of the
/// value-level metric, independent of the jet pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct FdOracle {
    pub h: f64,
    /// Same layout as [`ChristoffelData::values`].
    pub gamma: Vec<f64>,
    /// Same layout as [`CurvatureData::riem_ud`].
    pub riem_ud: Vec<f64>,
}

fn metric_values(spec: &ModelSpec, p: &[f64]) -> Result<Vec<f64>, ModelEvalError> {
    let n = spec.dim();
    let e = spec.frame_values(p)?;
    let inv: JetMatrix<f64> =
        e.inverse(FRAME_COND_BOUND)
            .map_err(|_| ModelEvalError::SingularFrame {
                condition: e.condition_estimate(),
                point: p.to_vec(),
            })?;
    let mut g = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            // theta^i_a = inv[(a, i)]
            g[a * n + b] = (0..n)
                .map(|i| spec.epsilon[i] as f64 * inv[(a, i)] * inv[(b, i)])
                .sum();
        }
    }
    Ok(g)
}

fn shifted(p: &[f64], k: usize, delta: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[k] += delta;
    q
}

fn gamma_fd(spec: &ModelSpec, p: &[f64], h: f64) -> Result<Vec<f64>, ModelEvalError> {
    let n = spec.dim();
    let g = metric_values(spec, p)?;
    let gm = JetMatrix::from_fn(n, n, |a, b| g[a * n + b]);
    let ginv = gm
        .inverse(FRAME_COND_BOUND * FRAME_COND_BOUND)
        .map_err(|_| ModelEvalError::SingularMetric {
            condition: gm.condition_estimate(),
            point: p.to_vec(),
        })?;
    let mut dg = vec![0.0; n * n * n];
    for e in 0..n {
        let plus = metric_values(spec, &shifted(p, e, h))?;
        let minus = metric_values(spec, &shifted(p, e, -h))?;
        for k in 0..n * n {
            dg[e * n * n + k] = (plus[k] - minus[k]) / (2.0 * h);
        }
    }
    let d = |e: usize, a: usize, b: usize| dg[e * n * n + a * n + b];
    let mut gamma = vec![0.0; n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                gamma[(c * n + a) * n + b] = 0.5
                    * (0..n)
                        .map(|e| ginv[(c, e)] * (d(a, e, b) + d(b, a, e) - d(e, a, b)))
                        .sum::<f64>();
            }
        }
    }
    Ok(gamma)
}

/// Finite-difference oracle with step `h`; the point must lie at least `h`
/// inside the model's domain of validity.
pub fn fd_oracle(spec: &ModelSpec, point: &[f64], h: f64) -> Result<FdOracle, ModelEvalError> {
    let n = spec.dim();
    let gamma = gamma_fd(spec, point, h)?;
    let mut dgamma = vec![0.0; n * n * n * n];
    for e in 0..n {
        let plus = gamma_fd(spec, &shifted(point, e, h), h)?;
        let minus = gamma_fd(spec, &shifted(point, e, -h), h)?;
        for k in 0..n * n * n {
            dgamma[e * n * n * n + k] = (plus[k] - minus[k]) / (2.0 * h);
        }
    }
    let riem_ud = riemann_from_gamma(n, &gamma, |e, c, a, b| {
        dgamma[e * n * n * n + (c * n + a) * n + b]
    });
    Ok(FdOracle { h, gamma, riem_ud })
}
