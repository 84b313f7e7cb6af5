//! Derived curvature tensors (Weyl projective, Weyl conformal, concircular,
//! projective Ricci, pseudo-projective, PC-Bochner) and the action of an
//! endomorphism-valued form as a derivation on tensors.
//!
//! Valence (1, 3) tensors use the layout of the Riemann tensor:
//! `[d, a, b, c] = (T(d_a, d_b) d_c)^d`.

use alloc::vec::Vec;

use crate::curvature::CurvatureData;
use crate::model::{PointStructure, TensorAtPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Projective,
    Conformal,
    Concircular,
    ProjectiveRicci,
    PseudoProjective,
    PcBochner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyTensor {
    pub kind: FamilyKind,
    pub components: TensorAtPoint,
    /// `(a, b)` of the pseudo-projective tensor.
    pub params: Option<(f64, f64)>,
    /// `k = -(scal - 2n) / (2n + 2)` of the PC-Bochner tensor.
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FamilyError {
    #[error("pseudo-projective constants must be nonzero (a = {a}, b = {b})")]
    ZeroParameter { a: f64, b: f64 },
    #[error("operator must have valence (1, m + 1), got {0:?}")]
    OperatorValence((usize, usize)),
    #[error("dimension mismatch: operator {operator}, tensor {tensor}")]
    Dimension { operator: usize, tensor: usize },
}

#[inline]
fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn family_13(
    kind: FamilyKind,
    ps: &PointStructure,
    cd: &CurvatureData,
    f: impl Fn(usize, usize, usize, usize) -> f64,
) -> FamilyTensor {
    let _ = ps;
    FamilyTensor {
        kind,
        components: TensorAtPoint::from_fn((1, 3), cd.dim, &ps.point, |i| {
            f(i[0], i[1], i[2], i[3])
        }),
        params: None,
        k: None,
    }
}

/// `(g(Y, Z) X - g(X, Z) Y)^d` on coordinate slots.
#[inline]
fn g_wedge(ps: &PointStructure, d: usize, a: usize, b: usize, c: usize) -> f64 {
    ps.g(b, c) * delta(d, a) - ps.g(a, c) * delta(d, b)
}

/// `(Ric(Y, Z) X - Ric(X, Z) Y)^d`.
#[inline]
fn ric_wedge(cd: &CurvatureData, d: usize, a: usize, b: usize, c: usize) -> f64 {
    cd.ric(b, c) * delta(d, a) - cd.ric(a, c) * delta(d, b)
}

/// `P(X, Y) Z = R(X, Y) Z - 1/2n (Ric(Y, Z) X - Ric(X, Z) Y)`.
pub fn projective(ps: &PointStructure, cd: &CurvatureData) -> FamilyTensor {
    let k = 1.0 / (2.0 * ps.n as f64);
    family_13(FamilyKind::Projective, ps, cd, |d, a, b, c| {
        cd.r_ud(d, a, b, c) - k * ric_wedge(cd, d, a, b, c)
    })
}

/// `C(X, Y) Z = R(X, Y) Z - 1/(2n-1) (g(Y,Z) QX - g(X,Z) QY + Ric(Y,Z) X - Ric(X,Z) Y)
///  + scal/(2n(2n-1)) (g(Y,Z) X - g(X,Z) Y)`.
pub fn conformal(ps: &PointStructure, cd: &CurvatureData) -> FamilyTensor {
    let n = ps.n as f64;
    let k1 = 1.0 / (2.0 * n - 1.0);
    let k2 = cd.scal / (2.0 * n * (2.0 * n - 1.0));
    family_13(FamilyKind::Conformal, ps, cd, |d, a, b, c| {
        let q = ps.g(b, c) * cd.q(d, a) - ps.g(a, c) * cd.q(d, b);
        cd.r_ud(d, a, b, c) - k1 * (q + ric_wedge(cd, d, a, b, c)) + k2 * g_wedge(ps, d, a, b, c)
    })
}

/// `C̄(X, Y) Z = R(X, Y) Z - scal/(2n(2n+1)) (g(Y, Z) X - g(X, Z) Y)`.
pub fn concircular(ps: &PointStructure, cd: &CurvatureData) -> FamilyTensor {
    let n = ps.n as f64;
    let k = cd.scal / (2.0 * n * (2.0 * n + 1.0));
    family_13(FamilyKind::Concircular, ps, cd, |d, a, b, c| {
        cd.r_ud(d, a, b, c) - k * g_wedge(ps, d, a, b, c)
    })
}

/// `P̃(X, Y) = (2n+1)/2n Ric(X, Y) - scal/2n g(X, Y)`.
pub fn projective_ricci(ps: &PointStructure, cd: &CurvatureData) -> FamilyTensor {
    let n = ps.n as f64;
    FamilyTensor {
        kind: FamilyKind::ProjectiveRicci,
        components: TensorAtPoint::from_fn((0, 2), cd.dim, &ps.point, |i| {
            (2.0 * n + 1.0) / (2.0 * n) * cd.ric(i[0], i[1])
                - cd.scal / (2.0 * n) * ps.g(i[0], i[1])
        }),
        params: None,
        k: None,
    }
}

/// `P̄(X, Y) Z = a R(X, Y) Z + b (Ric(Y, Z) X - Ric(X, Z) Y)
///  - (a + 2nb) scal/(2n(2n+1)) (g(Y, Z) X - g(X, Z) Y)`.
pub fn pseudo_projective(
    ps: &PointStructure,
    cd: &CurvatureData,
    a: f64,
    b: f64,
) -> Result<FamilyTensor, FamilyError> {
    if a == 0.0 || b == 0.0 {
        return Err(FamilyError::ZeroParameter { a, b });
    }
    let n = ps.n as f64;
    let k = (a + 2.0 * n * b) * cd.scal / (2.0 * n * (2.0 * n + 1.0));
    let mut t = family_13(FamilyKind::PseudoProjective, ps, cd, |d, x, y, z| {
        a * cd.r_ud(d, x, y, z) + b * ric_wedge(cd, d, x, y, z) - k * g_wedge(ps, d, x, y, z)
    });
    t.params = Some((a, b));
    Ok(t)
}

/// The PC-Bochner tensor in (0, 4) form, slots `(X, Y, Z, W)`, with
/// `k = -(scal - 2n)/(2n + 2)`.
pub fn pc_bochner(ps: &PointStructure, cd: &CurvatureData) -> FamilyTensor {
    let d = ps.dim;
    let n = ps.n as f64;
    let k = -(cd.scal - 2.0 * n) / (2.0 * n + 2.0);
    let c0 = 1.0 / (2.0 * n + 4.0);
    let c_gg = (k - 4.0) / (2.0 * n + 4.0);
    let c_pp = (k + 2.0 * n) / (2.0 * n + 4.0);
    let c_ee = k / (2.0 * n + 4.0);
    // g(X_a, phi X_b) and Ric(phi X_a, X_b)
    let mut gp = Vec::with_capacity(d * d);
    let mut rp = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            gp.push((0..d).map(|e| ps.g(a, e) * ps.phi_v(e, b)).sum::<f64>());
            rp.push((0..d).map(|e| ps.phi_v(e, a) * cd.ric(e, b)).sum::<f64>());
        }
    }
    let gp = |a: usize, b: usize| gp[a * d + b];
    let rp = |a: usize, b: usize| rp[a * d + b];
    let g = |a: usize, b: usize| ps.g(a, b);
    let ric = |a: usize, b: usize| cd.ric(a, b);
    let eta = |a: usize| ps.eta_v(a);
    let components = TensorAtPoint::from_fn((0, 4), d, &ps.point, |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        let ric_terms = ric(x, z) * g(y, w) - ric(y, z) * g(x, w) + ric(y, w) * g(x, z)
            - ric(x, w) * g(y, z)
            + rp(x, z) * gp(y, w)
            - rp(y, z) * gp(x, w)
            + rp(y, w) * gp(x, z)
            - rp(x, w) * gp(y, z)
            + 2.0 * rp(x, y) * gp(z, w)
            + 2.0 * rp(z, w) * gp(x, y)
            - ric(x, z) * eta(y) * eta(w)
            + ric(y, z) * eta(x) * eta(w)
            - ric(y, w) * eta(x) * eta(z)
            + ric(x, w) * eta(y) * eta(z);
        let gg = g(x, z) * g(y, w) - g(y, z) * g(x, w);
        let pp = gp(y, w) * gp(x, z) - gp(x, w) * gp(y, z) + 2.0 * gp(x, y) * gp(z, w);
        let ee = g(x, z) * eta(y) * eta(w) - g(y, z) * eta(x) * eta(w) + g(y, w) * eta(x) * eta(z)
            - g(x, w) * eta(y) * eta(z);
        cd.r_dn(x, y, z, w) + c0 * ric_terms + c_gg * gg - c_pp * pp - c_ee * ee
    });
    FamilyTensor {
        kind: FamilyKind::PcBochner,
        components,
        params: None,
        k: Some(k),
    }
}

/// The Riemann tensor as a (1, 3) [`TensorAtPoint`].
pub fn riemann_tensor(ps: &PointStructure, cd: &CurvatureData) -> TensorAtPoint {
    TensorAtPoint {
        valence: (1, 3),
        dim: cd.dim,
        components: cd.riem_ud.clone(),
        point: ps.point.clone(),
    }
}

/// The Ricci tensor as a (0, 2) [`TensorAtPoint`].
pub fn ricci_tensor(ps: &PointStructure, cd: &CurvatureData) -> TensorAtPoint {
    TensorAtPoint {
        valence: (0, 2),
        dim: cd.dim,
        components: cd.ric.clone(),
        point: ps.point.clone(),
    }
}

/// The metric as a (0, 2) [`TensorAtPoint`].
pub fn metric_tensor(ps: &PointStructure) -> TensorAtPoint {
    TensorAtPoint::from_fn((0, 2), ps.dim, &ps.point, |i| ps.g(i[0], i[1]))
}

/// Action of an endomorphism-valued `m`-form `K` (valence `(1, m + 1)`,
/// layout `[e, x_1..x_m, f] = (K(x_1..x_m) d_f)^e`) as a derivation on `T`:
/// `(K(x)·T)^{u}_{l} = sum_k K(x) acting on the k-th upper index
///  - sum_k T with K(x) applied to the k-th lower argument`.
/// The result has valence `(r, s + m)` with layout `[u..., x..., l...]`.
pub fn derivation_action_by(
    op: &TensorAtPoint,
    t: &TensorAtPoint,
) -> Result<TensorAtPoint, FamilyError> {
    if op.valence.0 != 1 || op.valence.1 < 1 {
        return Err(FamilyError::OperatorValence(op.valence));
    }
    if op.dim != t.dim {
        return Err(FamilyError::Dimension {
            operator: op.dim,
            tensor: t.dim,
        });
    }
    let d = t.dim;
    let m = op.valence.1 - 1;
    let (r, s) = t.valence;
    let mut base = Vec::with_capacity(r + s);
    let mut opi = Vec::with_capacity(m + 2);
    Ok(TensorAtPoint::from_fn((r, s + m), d, &t.point, |idx| {
        base.clear();
        base.extend_from_slice(&idx[..r]);
        base.extend_from_slice(&idx[r + m..]);
        let form = &idx[r..r + m];
        let mut v = 0.0;
        for k in 0..r + s {
            let orig = base[k];
            for f in 0..d {
                opi.clear();
                if k < r {
                    // K acting on the output: K^{u_k}_{x f} T^{..f..}
                    opi.push(orig);
                    opi.extend_from_slice(form);
                    opi.push(f);
                } else {
                    // -K^f_{x l_k} T_{..f..}
                    opi.push(f);
                    opi.extend_from_slice(form);
                    opi.push(orig);
                }
                let kv = op.get(&opi);
                if kv == 0.0 {
                    continue;
                }
                base[k] = f;
                let tv = t.get(&base);
                base[k] = orig;
                if k < r {
                    v += kv * tv;
                } else {
                    v -= kv * tv;
                }
            }
        }
        v
    }))
}

/// `R(X, Y)·T` for all coordinate `X, Y`: valence `(r, s + 2)`, layout
/// `[u..., x, y, l...]`.
pub fn derivation_action(
    ps: &PointStructure,
    cd: &CurvatureData,
    t: &TensorAtPoint,
) -> Result<TensorAtPoint, FamilyError> {
    derivation_action_by(&riemann_tensor(ps, cd), t)
}

/// The endomorphisms `Z -> B(xi, Y) Z` with `g(B(xi, Y) Z, W) = B(xi, Y, Z, W)`:
/// valence (1, 2), layout `[e, y, z]`.
pub fn bochner_xi_operator(ps: &PointStructure, b: &FamilyTensor) -> TensorAtPoint {
    let d = ps.dim;
    TensorAtPoint::from_fn((1, 2), d, &ps.point, |i| {
        let (e, y, z) = (i[0], i[1], i[2]);
        let mut v = 0.0;
        for w in 0..d {
            let gw = ps.ginv(e, w);
            if gw == 0.0 {
                continue;
            }
            for a in 0..d {
                v += gw * ps.xi_v(a) * b.components.get(&[a, y, z, w]);
            }
        }
        v
    })
}
