//! Paracontact invariants: Nijenhuis torsion and normality, `d eta` by two
//! routes, Lie derivatives along `xi`, and the trans-para-Sasakian defects.

use alloc::vec;
use alloc::vec::Vec;

use crate::connection::{covariant_derivative, AlphaBeta, ChristoffelData, JetTensor};
use crate::jets::Jet1;
use crate::model::{max_abs, PointStructure, TensorAtPoint};

/// Tolerance at which the condition `phi(grad alpha) = -(2n - 1) grad beta`
/// is considered satisfied.
pub const STANDING_ASSUMPTION_TOL: f64 = 1e-6;

/// All first-order invariants of the structure at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureInvariants {
    /// `N^c_ab = N(d_a, d_b)^c`.
    pub nijenhuis: TensorAtPoint,
    /// `d eta_ab = d eta(d_a, d_b)`.
    pub deta: TensorAtPoint,
    pub lie_g: TensorAtPoint,
    pub lie_phi: TensorAtPoint,
    pub lie_eta: TensorAtPoint,
    /// `N - 2 d eta (x) xi`, valence (1, 2).
    pub normality_defect: TensorAtPoint,
    /// Max-norm difference between the bracket and coordinate routes for `d eta`.
    pub deta_route_gap: f64,
}

/// `d_e phi^a_b`.
#[inline]
fn dphi(ps: &PointStructure, e: usize, a: usize, b: usize) -> f64 {
    ps.phi[(a, b)].grad()[e]
}

/// Nijenhuis torsion on the coordinate basis,
/// `N(X, Y) = phi^2[X, Y] + [phi X, phi Y] - phi[phi X, Y] - phi[X, phi Y]`,
/// and the normality defect `N - 2 d eta (x) xi`.
pub fn nijenhuis_normality(
    ps: &PointStructure,
    deta: &TensorAtPoint,
) -> (TensorAtPoint, TensorAtPoint) {
    let d = ps.dim;
    let n = TensorAtPoint::from_fn((1, 2), d, &ps.point, |i| {
        let (c, a, b) = (i[0], i[1], i[2]);
        let mut v = 0.0;
        for e in 0..d {
            v += ps.phi_v(e, a) * dphi(ps, e, c, b) - ps.phi_v(e, b) * dphi(ps, e, c, a);
            v += ps.phi_v(c, e) * (dphi(ps, b, e, a) - dphi(ps, a, e, b));
        }
        v
    });
    let defect = TensorAtPoint::from_fn((1, 2), d, &ps.point, |i| {
        n.get(i) - 2.0 * deta.get(&[i[1], i[2]]) * ps.xi_v(i[0])
    });
    (n, defect)
}

/// Lie bracket of jet vector fields at value level:
/// `[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a`.
pub fn bracket(x: &[Jet1], y: &[Jet1]) -> Vec<f64> {
    let d = x.len();
    (0..d)
        .map(|a| {
            (0..d)
                .map(|b| x[b].value() * y[a].grad()[b] - y[b].value() * x[a].grad()[b])
                .sum()
        })
        .collect()
}

/// Nijenhuis torsion on frame fields with every bracket realized as a
/// commutator of jet vector fields; `out[(k * d + i) * d + j]` is the
/// `E_k` component of `N(E_i, E_j)`.
pub fn nijenhuis_on_frame(ps: &PointStructure) -> Vec<f64> {
    let d = ps.dim;
    let field = |i: usize| -> Vec<Jet1> { (0..d).map(|a| ps.frame[(i, a)].truncate()).collect() };
    let phi_field = |i: usize| -> Vec<Jet1> {
        let zero = Jet1::constant(d, 0.0);
        (0..d)
            .map(|a| {
                (0..d).fold(zero, |acc, j| {
                    let f = ps.phi_frame[j][i];
                    if f == 0.0 {
                        acc
                    } else {
                        acc + ps.frame[(j, a)].truncate() * f
                    }
                })
            })
            .collect()
    };
    let mut out = vec![0.0; d * d * d];
    for i in 0..d {
        for j in 0..d {
            let (x, y, px, py) = (field(i), field(j), phi_field(i), phi_field(j));
            let xy = bracket(&x, &y);
            let pp = bracket(&px, &py);
            let pxy = bracket(&px, &y);
            let xpy = bracket(&x, &py);
            let phi2 = ps.apply_phi(&ps.apply_phi(&xy));
            let a = ps.apply_phi(&pxy);
            let b = ps.apply_phi(&xpy);
            let v: Vec<f64> = (0..d).map(|c| phi2[c] + pp[c] - a[c] - b[c]).collect();
            let f = ps.to_frame(&v);
            for k in 0..d {
                out[(k * d + i) * d + j] = f[k];
            }
        }
    }
    out
}

/// `d eta` by the coordinate curl and by the bracket formula
/// `1/2 (X eta(Y) - Y eta(X) - eta([X, Y]))` on the frame; returns the
/// coordinate-route tensor and the max difference between the routes.
pub fn exterior_deta(ps: &PointStructure) -> (TensorAtPoint, f64) {
    let d = ps.dim;
    let coord = TensorAtPoint::from_fn((0, 2), d, &ps.point, |i| {
        let (a, b) = (i[0], i[1]);
        0.5 * (ps.eta[b].grad()[a] - ps.eta[a].grad()[b])
    });
    let field = |i: usize| -> Vec<Jet1> { (0..d).map(|a| ps.frame[(i, a)].truncate()).collect() };
    let zero = Jet1::constant(d, 0.0);
    // eta(E_j) as a jet
    let eta_e: Vec<Jet1> = (0..d)
        .map(|j| {
            (0..d).fold(zero, |acc, a| {
                acc + ps.eta[a].truncate() * ps.frame[(j, a)].truncate()
            })
        })
        .collect();
    let mut frame_deta = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let (x, y) = (field(i), field(j));
            let xy = bracket(&x, &y);
            let xv: Vec<f64> = x.iter().map(|v| v.value()).collect();
            let yv: Vec<f64> = y.iter().map(|v| v.value()).collect();
            frame_deta[i * d + j] =
                0.5 * (eta_e[j].along(&xv) - eta_e[i].along(&yv) - ps.eta_of(&xy));
        }
    }
    let mut gap: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let mut v = 0.0;
            for i in 0..d {
                for j in 0..d {
                    v += ps.theta(i, a) * ps.theta(j, b) * frame_deta[i * d + j];
                }
            }
            gap = gap.max((v - coord.get(&[a, b])).abs());
        }
    }
    (coord, gap)
}

/// Lie derivatives of `g`, `phi` and `eta` along `xi`.
pub fn lie_derivatives(ps: &PointStructure) -> (TensorAtPoint, TensorAtPoint, TensorAtPoint) {
    let d = ps.dim;
    let dxi = |e: usize, a: usize| ps.xi[a].grad()[e];
    let along = |f: &crate::jets::Jet2| -> f64 { (0..d).map(|e| ps.xi_v(e) * f.grad()[e]).sum() };
    let lie_g = TensorAtPoint::from_fn((0, 2), d, &ps.point, |i| {
        let (a, b) = (i[0], i[1]);
        along(&ps.g_dn[(a, b)])
            + (0..d)
                .map(|e| ps.g(e, b) * dxi(a, e) + ps.g(a, e) * dxi(b, e))
                .sum::<f64>()
    });
    let lie_phi = TensorAtPoint::from_fn((1, 1), d, &ps.point, |i| {
        let (a, b) = (i[0], i[1]);
        along(&ps.phi[(a, b)])
            + (0..d)
                .map(|e| ps.phi_v(a, e) * dxi(b, e) - ps.phi_v(e, b) * dxi(e, a))
                .sum::<f64>()
    });
    let lie_eta = TensorAtPoint::from_fn((0, 1), d, &ps.point, |i| {
        let a = i[0];
        along(&ps.eta[a]) + (0..d).map(|e| ps.eta_v(e) * dxi(a, e)).sum::<f64>()
    });
    (lie_g, lie_phi, lie_eta)
}

/// All first-order invariants at once.
pub fn structure_invariants(ps: &PointStructure) -> StructureInvariants {
    let (deta, deta_route_gap) = exterior_deta(ps);
    let (nijenhuis, normality_defect) = nijenhuis_normality(ps, &deta);
    let (lie_g, lie_phi, lie_eta) = lie_derivatives(ps);
    StructureInvariants {
        nijenhuis,
        deta,
        lie_g,
        lie_phi,
        lie_eta,
        normality_defect,
        deta_route_gap,
    }
}

/// `nabla phi` with components `[a, e, b] = (nabla_e phi)^a_b`.
pub fn nabla_phi(ps: &PointStructure, ch: &ChristoffelData) -> TensorAtPoint {
    covariant_derivative(ch, &JetTensor::matrix((1, 1), &ps.phi, &ps.point))
}

/// `nabla eta` with components `[e, b] = (nabla_e eta)_b`.
pub fn nabla_eta(ps: &PointStructure, ch: &ChristoffelData) -> TensorAtPoint {
    covariant_derivative(ch, &JetTensor::covector(&ps.eta, &ps.point))
}

/// `g(X, phi Y)` on the coordinate basis, `[a * d + b]`.
pub fn phi_form(ps: &PointStructure) -> Vec<f64> {
    let d = ps.dim;
    let mut out = vec![0.0; d * d];
    for a in 0..d {
        for b in 0..d {
            out[a * d + b] = (0..d).map(|e| ps.g(a, e) * ps.phi_v(e, b)).sum();
        }
    }
    out
}

/// Defect of `(nabla_X phi) Y = alpha(-g(X, Y) xi + eta(Y) X) + beta(g(X, phi Y) xi + eta(Y) phi X)`
/// for given `(alpha, beta)`, over coordinate pairs.
pub fn phi_derivative_defect(
    ps: &PointStructure,
    nphi: &TensorAtPoint,
    alpha: f64,
    beta: f64,
) -> f64 {
    let d = ps.dim;
    let gp = phi_form(ps);
    let mut worst: f64 = 0.0;
    for c in 0..d {
        for x in 0..d {
            for y in 0..d {
                let id = if c == x { 1.0 } else { 0.0 };
                let rhs = alpha * (-ps.g(x, y) * ps.xi_v(c) + ps.eta_v(y) * id)
                    + beta * (gp[x * d + y] * ps.xi_v(c) + ps.eta_v(y) * ps.phi_v(c, x));
                worst = worst.max((nphi.get(&[c, x, y]) - rhs).abs());
            }
        }
    }
    worst
}

/// Max-norm defect of the trans-para-Sasakian condition with the extracted
/// `(alpha, beta)`.
pub fn tps_residual(ps: &PointStructure, ch: &ChristoffelData, ab: &AlphaBeta) -> f64 {
    phi_derivative_defect(ps, &nabla_phi(ps, ch), ab.alpha, ab.beta)
}

/// Derived scalar checks on `(alpha, beta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaBetaCalculus {
    pub xi_alpha: f64,
    pub xi_beta: f64,
    pub two_alpha_beta: f64,
    /// `|2 alpha beta - xi(alpha)|`.
    pub identity_residual: f64,
    /// `phi(grad alpha) + (2n - 1) grad beta`.
    pub standing_vector: Vec<f64>,
    pub standing_residual: f64,
    pub standing_met: bool,
}

pub fn alpha_beta_calculus(ps: &PointStructure, ab: &AlphaBeta) -> AlphaBetaCalculus {
    let d = ps.dim;
    let pga = ps.apply_phi(&ab.grad_alpha);
    let k = (2 * ps.n - 1) as f64;
    let standing_vector: Vec<f64> = (0..d).map(|a| pga[a] + k * ab.grad_beta[a]).collect();
    let standing_residual = max_abs(&standing_vector);
    let two_alpha_beta = 2.0 * ab.alpha * ab.beta;
    AlphaBetaCalculus {
        xi_alpha: ab.xi_alpha,
        xi_beta: ab.xi_beta,
        two_alpha_beta,
        identity_residual: (two_alpha_beta - ab.xi_alpha).abs(),
        standing_vector,
        standing_residual,
        standing_met: standing_residual <= STANDING_ASSUMPTION_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{christoffel, extract_alpha_beta};
    use crate::dsl::{builtin, parse_expr, parse_model, EXAMPLE25_SOURCE};
    use crate::model::assemble;

    #[test]
    fn flat_invariants_vanish() {
        let spec = builtin("flat3").unwrap();
        let ps = assemble(&spec, &[0.1, 0.2, 0.3]).unwrap();
        let inv = structure_invariants(&ps);
        for t in [
            &inv.nijenhuis,
            &inv.deta,
            &inv.lie_g,
            &inv.lie_phi,
            &inv.lie_eta,
            &inv.normality_defect,
        ] {
            assert_eq!(t.max_norm(), 0.0);
        }
        let ch = christoffel(&ps);
        let ab = extract_alpha_beta(&ps, &ch);
        assert_eq!(tps_residual(&ps, &ch, &ab), 0.0);
        let calc = alpha_beta_calculus(&ps, &ab);
        assert!(calc.standing_met && calc.identity_residual == 0.0);
    }

    #[test]
    fn deta_at_origin() {
        let spec = builtin("example25").unwrap();
        let ps = assemble(&spec, &[0.0; 3]).unwrap();
        let (deta, gap) = exterior_deta(&ps);
        assert!((deta.get(&[0, 1]) - 0.5).abs() < 1e-14);
        assert!(deta.get(&[2, 0]).abs() < 1e-14);
        assert!(gap < 1e-12);
        for a in 0..3 {
            assert_eq!(deta.get(&[a, a]), 0.0);
        }
    }

    #[test]
    fn example25_invariants() {
        let spec = builtin("example25").unwrap();
        for p in crate::sampling::sample_points(&spec, 50, 42).unwrap() {
            let ps = assemble(&spec, &p).unwrap();
            let inv = structure_invariants(&ps);
            assert!(
                inv.normality_defect.max_norm() < 1e-6,
                "{}",
                inv.normality_defect.max_norm()
            );
            assert!(inv.deta_route_gap < 1e-9);
            assert!(inv.lie_phi.max_norm() < 1e-7 && inv.lie_eta.max_norm() < 1e-7);
            // N(X, Y) = -N(Y, X), and the frame route agrees
            let d = 3;
            let nf = nijenhuis_on_frame(&ps);
            for c in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        assert!(
                            (inv.nijenhuis.get(&[c, a, b]) + inv.nijenhuis.get(&[c, b, a])).abs()
                                < 1e-9
                        );
                    }
                }
            }
            for k in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let mut v = 0.0;
                        for a in 0..d {
                            for b in 0..d {
                                for c in 0..d {
                                    v += ps.theta(k, c)
                                        * inv.nijenhuis.get(&[c, a, b])
                                        * ps.e(i, a)
                                        * ps.e(j, b);
                                }
                            }
                        }
                        assert!((v - nf[(k * d + i) * d + j]).abs() < 1e-9);
                    }
                }
            }
            let ch = christoffel(&ps);
            let ab = extract_alpha_beta(&ps, &ch);
            assert!(tps_residual(&ps, &ch, &ab) < 1e-7);
            // (L_xi g)(E1, E1) = -2 beta
            let e1 = ps.frame_vector(0);
            let mut l = 0.0;
            for a in 0..d {
                for b in 0..d {
                    l += inv.lie_g.get(&[a, b]) * e1[a] * e1[b];
                }
            }
            assert!((l + 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbed_frame_is_not_trans_para_sasakian() {
        let mut spec = parse_model(EXAMPLE25_SOURCE).unwrap();
        spec.frame[1][1] = parse_expr("exp(z) + 0.1*x", &["x", "y", "z"]).unwrap();
        let ps = assemble(&spec, &[0.5, 0.3, 0.2]).unwrap();
        let ch = christoffel(&ps);
        let ab = extract_alpha_beta(&ps, &ch);
        assert!(tps_residual(&ps, &ch, &ab) > 1e-2);
    }

    #[test]
    fn alpha_beta_identities_on_example25() {
        let spec = builtin("example25").unwrap();
        let p = [0.2, 0.6, -0.3];
        let ps = assemble(&spec, &p).unwrap();
        let ab = extract_alpha_beta(&ps, &christoffel(&ps));
        let calc = alpha_beta_calculus(&ps, &ab);
        let e2z = libm::exp(2.0 * p[2]);
        assert!((calc.xi_alpha - e2z).abs() < 1e-12);
        assert!(calc.xi_beta.abs() < 1e-12);
        assert!(calc.identity_residual < 1e-9);
        // phi grad alpha = y e^{3z} E2
        let expected = 0.6 * libm::exp(3.0 * p[2]) * libm::exp(p[2]);
        assert!((calc.standing_vector[1] - expected).abs() < 1e-12);
        assert!(!calc.standing_met);
    }
}
