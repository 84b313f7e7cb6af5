//! The claim harness: every identity of the trans-para-Sasakian calculus as
//! a residual over sample points, every theorem as a hypothesis-gated
//! conditional, an Einstein / eta-Einstein fit, and the report that bundles
//! them.
//!
//! All residuals are max-norms over coordinate-basis slots at a point, then
//! aggregated over points.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::connection::{
    christoffel, extract_alpha_beta, frame_connection_from_christoffel, frame_connection_koszul,
    AlphaBeta,
};
use crate::curvature::{curvature, fd_oracle, xi_sectional, CurvatureData};
use crate::curvfamily::{
    bochner_xi_operator, concircular, conformal, derivation_action, derivation_action_by,
    pc_bochner, projective, projective_ricci, pseudo_projective, ricci_tensor, FamilyError,
};
use crate::dsl::{EvalError, ExpectationKind, ModelError, ModelSpec};
use crate::jets::{least_squares, LinalgError};
use crate::model::{assemble, check_compatibility, ModelEvalError, PointStructure};
use crate::paracontact::{
    alpha_beta_calculus, nabla_eta, nabla_phi, phi_derivative_defect, phi_form,
    structure_invariants, tps_residual,
};
use crate::sampling::{sample_points, SamplingError};

/// Identity claims, in report order.
pub const CLAIM_CATALOG: [&str; 17] = [
    "eq-2.1",
    "eq-2.2",
    "eq-2.3",
    "def-2.2",
    "eq-2.4",
    "eq-2.5",
    "eq-2.6",
    "eq-2.7",
    "eq-2.8",
    "eq-2.9",
    "normality",
    "eq-3.10",
    "eq-3.11",
    "eq-3.12",
    "eq-3.14",
    "eq-3.15",
    "prop-3.2",
];

/// Conditional results, in report order.
pub const THEOREM_CATALOG: [&str; 11] = [
    "cor-3.5", "thm-3.6", "thm-3.7", "thm-3.8", "thm-3.9", "thm-3.10", "thm-3.11", "thm-3.12",
    "thm-3.13", "thm-3.14", "thm-3.15",
];

/// Agreement required between the Koszul frame connection and the
/// coordinate Christoffel route.
pub const KOSZUL_TOL: f64 = 1e-8;
/// Agreement required between finite-difference and jet Christoffel symbols.
pub const FD_GAMMA_TOL: f64 = 1e-5;
/// Finite-difference step of the oracle (the halving check also uses `h/2`).
pub const FD_STEP: f64 = 1e-4;
/// Accepted range for the ratio of Christoffel defects at `h` and `h/2`.
pub const FD_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
/// Below this Christoffel defect the finite differences are exact up to
/// round-off and the halving ratio carries no information.
pub const FD_RATIO_FLOOR: f64 = 1e-9;
/// Number of sample points (besides the box centre) on which the
/// finite-difference oracle is evaluated.
pub const FD_POINTS: usize = 4;
/// Relative agreement required between a stated reference value and
/// its recomputation.
pub const EXPECTATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Model(#[from] ModelEvalError),
    #[error(transparent)]
    Validation(#[from] ModelError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("reference value could not be evaluated: {0}")]
    Expectation(#[from] EvalError),
    #[error("unknown claim `{id}`; known claims: {catalog}")]
    UnknownClaim { id: String, catalog: String },
    #[error("unknown theorem `{id}`; known theorems: {catalog}")]
    UnknownTheorem { id: String, catalog: String },
    #[error("Einstein fit needs at least 2 sample points, got {0}")]
    InsufficientSamples(usize),
    #[error("Einstein fit is degenerate: {0}")]
    DegenerateFit(LinalgError),
    #[error("at least one sample point is required")]
    NoPoints,
}

/// Residual tolerances; every claim and theorem uses one of these levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Algebraic identities and exact scalar relations.
    pub algebraic: f64,
    /// Identities involving first derivatives of the structure.
    pub first_order: f64,
    /// Curvature-level identities, theorem hypotheses and conclusions.
    pub curvature: f64,
    /// Finite-difference Riemann oracle.
    pub fd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-9,
            first_order: 1e-7,
            curvature: 1e-6,
            fd: 1e-3,
        }
    }
}

impl Tolerances {
    /// Tolerance level of a catalogued claim.
    pub fn for_claim(&self, id: &str) -> f64 {
        match id {
            "eq-2.1" | "eq-2.2" | "eq-3.12" => self.algebraic,
            "normality" | "eq-3.10" | "eq-3.11" | "eq-3.14" | "eq-3.15" | "prop-3.2" => {
                self.curvature
            }
            _ => self.first_order,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClaimStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimResult {
    pub claim_id: String,
    pub points_tested: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub status: ClaimStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremStatus {
    #[serde(rename = "verified")]
    Verified,
    #[serde(rename = "vacuous")]
    Vacuous,
    #[serde(rename = "refuted-at-tolerance")]
    RefutedAtTolerance,
}

impl TheoremStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TheoremStatus::Verified => "verified",
            TheoremStatus::Vacuous => "vacuous",
            TheoremStatus::RefutedAtTolerance => "refuted-at-tolerance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremResult {
    pub theorem_id: String,
    pub hypothesis_residual: f64,
    pub hypothesis_met: bool,
    pub conclusion_residual: f64,
    pub standing_assumption_met: bool,
    pub status: TheoremStatus,
    /// The result depends on `phi(grad alpha) = -(2n - 1) grad beta`, which
    /// fails on this model, so a refutation does not count as a failure.
    pub conditional: bool,
    /// Residual of an alternative form of the conclusion, where one exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EinsteinVerdict {
    #[serde(rename = "einstein")]
    Einstein,
    #[serde(rename = "eta-einstein")]
    EtaEinstein,
    #[serde(rename = "neither")]
    Neither,
}

impl EinsteinVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            EinsteinVerdict::Einstein => "einstein",
            EinsteinVerdict::EtaEinstein => "eta-einstein",
            EinsteinVerdict::Neither => "neither",
        }
    }
}

/// Pooled fit `Ric_ab = lambda g_ab + mu eta_a eta_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinsteinFit {
    pub lambda: f64,
    pub mu: f64,
    pub fit_residual: f64,
    pub verdict: EinsteinVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaBetaSummary {
    pub point: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub xi_alpha: f64,
    pub xi_beta: f64,
}

/// Comparison of one stated reference value against the recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationCheck {
    pub label: String,
    pub expected_source: String,
    /// Worst relative deviation over the box centre and the sample points.
    pub max_deviation: f64,
    /// Recomputed value at the box centre.
    pub computed_at_center: Vec<f64>,
    pub flagged: bool,
}

/// Independent-oracle agreement.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSummary {
    /// Max distance between Koszul and Christoffel frame connections.
    pub koszul_gap: f64,
    pub fd_points: usize,
    pub fd_gamma_defect: f64,
    pub fd_gamma_defect_half: f64,
    pub fd_riemann_defect: f64,
    /// `fd_gamma_defect / fd_gamma_defect_half`, NaN when both vanish.
    pub fd_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub model: String,
    pub seed: u64,
    pub points: usize,
    pub tolerances: Tolerances,
    pub claims: Vec<ClaimResult>,
    pub theorems: Vec<TheoremResult>,
    pub einstein_fit: EinsteinFit,
    pub alpha_beta_summary: AlphaBetaSummary,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub standing_residual: f64,
    #[serde(skip)]
    pub expectations: Vec<ExpectationCheck>,
    #[serde(skip)]
    pub oracles: OracleSummary,
}

impl Report {
    /// All claims pass, no unconditional theorem is refuted, and the
    /// independent oracles agree.
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.status == ClaimStatus::Pass)
            && self
                .theorems
                .iter()
                .all(|t| t.conditional || t.status != TheoremStatus::RefutedAtTolerance)
            && self.oracles.passed
    }

    pub fn claim(&self, id: &str) -> Option<&ClaimResult> {
        self.claims.iter().find(|c| c.claim_id == id)
    }

    pub fn theorem(&self, id: &str) -> Option<&TheoremResult> {
        self.theorems.iter().find(|t| t.theorem_id == id)
    }

    pub fn flagged_expectations(&self) -> impl Iterator<Item = &ExpectationCheck> {
        self.expectations.iter().filter(|e| e.flagged)
    }
}

/// Run parameters of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub points: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            points: 100,
            seed: 42,
            tolerances: Tolerances::default(),
        }
    }
}

/// Everything the suite needs from one sample point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointAnalysis {
    pub point: Vec<f64>,
    /// Residuals in [`CLAIM_CATALOG`] order.
    pub claims: Vec<f64>,
    /// Hypothesis residuals in [`THEOREM_CATALOG`] order.
    pub hypotheses: Vec<f64>,
    /// Conclusion residuals in [`THEOREM_CATALOG`] order.
    pub conclusions: Vec<f64>,
    /// Defects of the two sides of the eq-2.3 equivalence: paracontact
    /// metric and normal, and the `nabla phi` formula.
    pub para_sasakian: [f64; 2],
    /// `|scal - 2n(2n - 1)(alpha^2 + beta^2)|`.
    pub alternate_3_11: f64,
    pub standing_residual: f64,
    pub alpha: f64,
    pub beta: f64,
    pub xi_alpha: f64,
    pub xi_beta: f64,
    /// Rows `([g_ab, eta_a eta_b], Ric_ab)` for `a <= b`.
    pub fit_rows: Vec<([f64; 2], f64)>,
    pub koszul_gap: f64,
    /// Relative deviation of each model expectation, in file order.
    pub expectation_deviation: Vec<f64>,
    /// Recomputed value of each model expectation.
    pub expectation_values: Vec<Vec<f64>>,
}

/// Max with NaN counted as infinite.
fn worst(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m: f64, v| {
        if v.is_nan() {
            f64::INFINITY
        } else {
            m.max(v.abs())
        }
    })
}

#[inline]
fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |a| (0..d).map(move |b| (a, b)))
}

/// Jet-level defect of `d eta = g(., phi .)` (values and first derivatives).
fn contact_form_defect(ps: &PointStructure) -> f64 {
    let d = ps.dim;
    let mut out: f64 = 0.0;
    for (a, b) in pairs(d) {
        let deta = 0.5 * (ps.eta[b].grad()[a] - ps.eta[a].grad()[b]);
        let mut gp = ps.g_dn[(a, 0)].truncate() * ps.phi[(0, b)].truncate();
        for e in 1..d {
            gp += ps.g_dn[(a, e)].truncate() * ps.phi[(e, b)].truncate();
        }
        out = out.max((deta - gp.value()).abs());
        for c in 0..d {
            let ddeta = 0.5 * (ps.eta[b].hess(a, c) - ps.eta[a].hess(b, c));
            out = out.max((ddeta - gp.grad()[c]).abs());
        }
    }
    out
}

fn expectation_value(
    kind: &ExpectationKind,
    ps: &PointStructure,
    ab: &AlphaBeta,
    koszul: &crate::connection::FrameConnection,
    chris: &crate::connection::FrameConnection,
    neta: &crate::model::TensorAtPoint,
) -> Vec<f64> {
    let d = ps.dim;
    match *kind {
        ExpectationKind::Bracket(i, j) => koszul.bracket_vector(i, j),
        ExpectationKind::Nabla(i, j) => koszul.nabla(i, j),
        ExpectationKind::NablaXi(i) => chris.nabla(i, ps.xi_index),
        ExpectationKind::NablaEta(i, j) => {
            vec![pairs(d)
                .map(|(e, b)| ps.e(i, e) * ps.e(j, b) * neta.get(&[e, b]))
                .sum()]
        }
        ExpectationKind::Alpha => vec![ab.alpha],
        ExpectationKind::Beta => vec![ab.beta],
    }
}

/// Evaluates every claim residual, theorem hypothesis and conclusion, and
/// oracle comparison at one point.
pub fn analyze_point(spec: &ModelSpec, point: &[f64]) -> Result<PointAnalysis, VerifyError> {
    let ps = assemble(spec, point)?;
    let ch = christoffel(&ps);
    let cd = curvature(&ps, &ch);
    let ab = extract_alpha_beta(&ps, &ch);
    let calc = alpha_beta_calculus(&ps, &ab);
    let inv = structure_invariants(&ps);
    let compat = check_compatibility(&ps);
    let nphi = nabla_phi(&ps, &ch);
    let neta = nabla_eta(&ps, &ch);
    let gp = phi_form(&ps);

    let d = ps.dim;
    let n = ps.n as f64;
    let (alpha, beta) = (ab.alpha, ab.beta);
    let s = alpha * alpha + beta * beta;
    let g = |a: usize, b: usize| ps.g(a, b);
    let eta = |a: usize| ps.eta_v(a);
    let xi = |a: usize| ps.xi_v(a);
    let phi = |a: usize, b: usize| ps.phi_v(a, b);
    let phi2 = |a: usize, b: usize| (0..d).map(|e| phi(a, e) * phi(e, b)).sum::<f64>();
    let gpf = |a: usize, b: usize| gp[a * d + b];

    // eq-2.3 holds iff the structure is para-Sasakian: paracontact metric
    // (d eta = g(., phi .)) and normal.
    let para_sasakian_a = contact_form_defect(&ps).max(inv.normality_defect.max_norm());
    let para_sasakian_b = phi_derivative_defect(&ps, &nphi, 1.0, 0.0);

    let eq25 = worst(pairs(d).map(|(e, b)| {
        neta.get(&[e, b]) - (alpha * gpf(e, b) - beta * (g(e, b) - eta(e) * eta(b)))
    }));
    let eq26 = worst(pairs(d).map(|(a, b)| inv.deta.get(&[a, b]) - alpha * gpf(a, b)));
    let eq27 = worst(
        pairs(d).map(|(a, b)| inv.lie_g.get(&[a, b]) + 2.0 * beta * (g(a, b) - eta(a) * eta(b))),
    );

    let da = &ab.d_alpha;
    let db = &ab.d_beta;
    let mut eq310: f64 = 0.0;
    for (a, b) in pairs(d) {
        for c in 0..d {
            let lhs: f64 = (0..d).map(|e| cd.r_ud(c, a, b, e) * xi(e)).sum();
            let rhs = -s * (eta(b) * delta(c, a) - eta(a) * delta(c, b))
                - 2.0 * alpha * beta * (eta(b) * phi(c, a) - eta(a) * phi(c, b))
                - da[a] * phi(c, b)
                + da[b] * phi(c, a)
                + db[b] * phi2(c, a)
                - db[a] * phi2(c, b);
            eq310 = worst([eq310, lhs - rhs]);
        }
    }
    let k311 = s - ab.xi_beta;
    let mut eq311: f64 = 0.0;
    for (c, a) in pairs(d) {
        let lhs: f64 = pairs(d)
            .map(|(e, f)| cd.r_ud(c, e, a, f) * xi(e) * xi(f))
            .sum();
        eq311 = worst([eq311, lhs - k311 * (delta(c, a) - eta(a) * xi(c))]);
    }
    let k314 = 2.0 * n * s - ab.xi_beta;
    let ric_xi: Vec<f64> = (0..d)
        .map(|a| (0..d).map(|b| cd.ric(a, b) * xi(b)).sum())
        .collect();
    let eq314 = worst((0..d).map(|a| {
        let phi_x_alpha: f64 = (0..d).map(|e| phi(e, a) * da[e]).sum();
        ric_xi[a] - (-k314 * eta(a) + (2.0 * n - 1.0) * db[a] - phi_x_alpha)
    }));
    let q_xi: Vec<f64> = (0..d)
        .map(|c| (0..d).map(|a| cd.q(c, a) * xi(a)).sum())
        .collect();
    let phi_grad_alpha = ps.apply_phi(&ab.grad_alpha);
    let eq315 = worst((0..d).map(|c| {
        q_xi[c] - (-k314 * xi(c) + (2.0 * n - 1.0) * ab.grad_beta[c] + phi_grad_alpha[c])
    }));
    let prop32 = worst((0..d).filter(|&i| i != ps.xi_index).map(|i| {
        let x = ps.frame_vector(i);
        match xi_sectional(&ps, &cd, &x) {
            Ok(k) => k + ps.epsilon[i] * k311,
            Err(_) => f64::NAN,
        }
    }));

    let claims = vec![
        compat.structure(),
        compat.metric,
        // resolved against the tolerance in `claim_value`
        f64::NAN,
        tps_residual(&ps, &ch, &ab),
        ab.residual,
        eq25,
        eq26,
        eq27,
        inv.lie_phi.max_norm(),
        inv.lie_eta.max_norm(),
        inv.normality_defect.max_norm(),
        eq310,
        eq311,
        calc.identity_residual,
        eq314,
        eq315,
        prop32,
    ];

    // Theorem hypotheses.
    let pt = projective(&ps, &cd);
    let ct = conformal(&ps, &cd);
    let cbar = concircular(&ps, &cd);
    let ptilde = projective_ricci(&ps, &cd);
    let (pa, pb) = spec.pp_params;
    let pbar = pseudo_projective(&ps, &cd, pa, pb)?;
    let bt = pc_bochner(&ps, &cd);
    let ric_t = ricci_tensor(&ps, &cd);
    let b_xi_ric = derivation_action_by(&bochner_xi_operator(&ps, &bt), &ric_t)?;
    let hypotheses = vec![
        calc.standing_residual,
        pt.components.max_norm(),
        derivation_action(&ps, &cd, &pt.components)?.max_norm(),
        ct.components.max_norm(),
        derivation_action(&ps, &cd, &ct.components)?.max_norm(),
        derivation_action(&ps, &cd, &cbar.components)?.max_norm(),
        derivation_action(&ps, &cd, &ptilde.components)?.max_norm(),
        pbar.components.max_norm(),
        derivation_action(&ps, &cd, &pbar.components)?.max_norm(),
        bt.components.max_norm(),
        b_xi_ric.max_norm(),
    ];

    // Theorem conclusions.
    let einstein = worst(pairs(d).map(|(a, b)| cd.ric(a, b) + 2.0 * n * s * g(a, b)));
    let scal_a = (cd.scal + 2.0 * n * (2.0 * n + 1.0) * s).abs();
    let scal_b = (cd.scal + 2.0 * n * (2.0 * n - 1.0) * s).abs();
    let einstein_a = einstein.max(scal_a);
    let eta_einstein = worst(pairs(d).map(|(a, b)| {
        let lam = s + cd.scal / (2.0 * n);
        let mu = (2.0 * n + 1.0) * s + cd.scal / (2.0 * n);
        cd.ric(a, b) - (lam * g(a, b) - mu * eta(a) * eta(b))
    }));
    let cor35 = worst(
        core::iter::once(ab.xi_beta)
            .chain((0..d).map(|a| ric_xi[a] + 2.0 * n * s * eta(a)))
            .chain((0..d).map(|c| q_xi[c] + 2.0 * n * s * xi(c))),
    );
    let conclusions = vec![
        cor35,
        einstein,
        einstein_a,
        eta_einstein,
        eta_einstein,
        einstein.max(scal_b),
        einstein_a,
        einstein_a,
        einstein_a,
        (s - 1.0).abs(),
        (s - 1.0).abs() * einstein,
    ];

    let fit_rows = (0..d)
        .flat_map(|a| (a..d).map(move |b| (a, b)))
        .map(|(a, b)| ([g(a, b), eta(a) * eta(b)], cd.ric(a, b)))
        .collect();

    let koszul = frame_connection_koszul(spec, point)?;
    let chris = frame_connection_from_christoffel(&ps, &ch);
    let koszul_gap = koszul.distance(&chris);
    let mut expectation_deviation = Vec::with_capacity(spec.expectations.len());
    let mut expectation_values = Vec::with_capacity(spec.expectations.len());
    for ex in &spec.expectations {
        let value = expectation_value(&ex.kind, &ps, &ab, &koszul, &chris, &neta);
        let mut dev: f64 = 0.0;
        if value.len() != ex.components.len() {
            dev = f64::INFINITY;
        } else {
            for (v, e) in value.iter().zip(&ex.components) {
                let expected = e.eval_value(point)?;
                dev = worst([dev, (v - expected) / (1.0 + expected.abs())]);
            }
        }
        expectation_deviation.push(dev);
        expectation_values.push(value);
    }

    Ok(PointAnalysis {
        point: point.to_vec(),
        claims,
        hypotheses,
        conclusions,
        para_sasakian: [para_sasakian_a, para_sasakian_b],
        alternate_3_11: (cd.scal - 2.0 * n * (2.0 * n - 1.0) * s).abs(),
        standing_residual: calc.standing_residual,
        alpha,
        beta,
        xi_alpha: ab.xi_alpha,
        xi_beta: ab.xi_beta,
        fit_rows,
        koszul_gap,
        expectation_deviation,
        expectation_values,
    })
}

fn claim_index(id: &str) -> Result<usize, VerifyError> {
    CLAIM_CATALOG
        .iter()
        .position(|c| *c == id)
        .ok_or_else(|| VerifyError::UnknownClaim {
            id: id.to_string(),
            catalog: CLAIM_CATALOG.join(", "),
        })
}

fn theorem_index(id: &str) -> Result<usize, VerifyError> {
    THEOREM_CATALOG
        .iter()
        .position(|c| *c == id)
        .ok_or_else(|| VerifyError::UnknownTheorem {
            id: id.to_string(),
            catalog: THEOREM_CATALOG.join(", "),
        })
}

/// Residual of claim `idx` at one analysed point. The eq-2.3 claim is an
/// equivalence: it is violated only when exactly one side holds.
fn claim_value(a: &PointAnalysis, idx: usize, tol: f64) -> f64 {
    if CLAIM_CATALOG[idx] == "eq-2.3" {
        let [lhs, rhs] = a.para_sasakian;
        if (lhs <= tol) == (rhs <= tol) {
            0.0
        } else {
            lhs.max(rhs)
        }
    } else {
        a.claims[idx]
    }
}

fn aggregate_claim(idx: usize, analyses: &[PointAnalysis], tol: &Tolerances) -> ClaimResult {
    let id = CLAIM_CATALOG[idx];
    let level = tol.for_claim(id);
    let values: Vec<f64> = analyses
        .iter()
        .map(|a| claim_value(a, idx, level))
        .collect();
    let max_residual = worst(values.iter().copied());
    let mean_residual = if values.is_empty() {
        0.0
    } else {
        values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64
    };
    let tolerance = level;
    ClaimResult {
        claim_id: id.to_string(),
        points_tested: values.len(),
        max_residual,
        mean_residual,
        tolerance,
        status: if max_residual <= tolerance {
            ClaimStatus::Pass
        } else {
            ClaimStatus::Fail
        },
    }
}

/// Status of a conditional result from its aggregated residuals.
pub fn theorem_status(
    hypothesis_residual: f64,
    conclusion_residual: f64,
    tol: f64,
) -> TheoremStatus {
    if !(hypothesis_residual <= tol) {
        TheoremStatus::Vacuous
    } else if conclusion_residual <= tol {
        TheoremStatus::Verified
    } else {
        TheoremStatus::RefutedAtTolerance
    }
}

fn aggregate_theorem(
    idx: usize,
    analyses: &[PointAnalysis],
    tol: &Tolerances,
    standing_met: bool,
) -> TheoremResult {
    let id = THEOREM_CATALOG[idx];
    let tol = tol.curvature;
    let hypothesis_residual = worst(analyses.iter().map(|a| a.hypotheses[idx]));
    let conclusion_residual = worst(analyses.iter().map(|a| a.conclusions[idx]));
    TheoremResult {
        theorem_id: id.to_string(),
        hypothesis_residual,
        hypothesis_met: hypothesis_residual <= tol,
        conclusion_residual,
        standing_assumption_met: standing_met,
        status: theorem_status(hypothesis_residual, conclusion_residual, tol),
        // The corollary's hypothesis is the standing assumption itself.
        conditional: id != "cor-3.5" && !standing_met,
        alternate_residual: (id == "thm-3.11")
            .then(|| worst(analyses.iter().map(|a| a.alternate_3_11))),
    }
}

/// Max-norm of `phi(grad alpha) + (2n - 1) grad beta` across the points and
/// whether it is within `tol`.
pub fn standing_assumption_check(analyses: &[PointAnalysis], tol: f64) -> (bool, f64) {
    let r = worst(analyses.iter().map(|a| a.standing_residual));
    (r <= tol, r)
}

/// Pooled least-squares fit of `Ric = lambda g + mu eta (x) eta` from
/// `([g_ab, eta_a eta_b], Ric_ab)` rows.
pub fn classify_einstein_rows(
    rows: &[([f64; 2], f64)],
    tol: f64,
) -> Result<EinsteinFit, VerifyError> {
    let design: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r.to_vec()).collect();
    let target: Vec<f64> = rows.iter().map(|(_, t)| *t).collect();
    let ls = least_squares(&design, &target).map_err(VerifyError::DegenerateFit)?;
    let (lambda, mu) = (ls.coefficients[0], ls.coefficients[1]);
    let verdict = if ls.residual <= tol && mu.abs() <= tol {
        EinsteinVerdict::Einstein
    } else if ls.residual <= tol {
        EinsteinVerdict::EtaEinstein
    } else {
        EinsteinVerdict::Neither
    };
    Ok(EinsteinFit {
        lambda,
        mu,
        fit_residual: ls.residual,
        verdict,
    })
}

/// Einstein / eta-Einstein classification over sampled curvature data.
pub fn classify_einstein(
    samples: &[(PointStructure, CurvatureData)],
    tol: f64,
) -> Result<EinsteinFit, VerifyError> {
    if samples.len() < 2 {
        return Err(VerifyError::InsufficientSamples(samples.len()));
    }
    let mut rows = Vec::new();
    for (ps, cd) in samples {
        for a in 0..ps.dim {
            for b in a..ps.dim {
                rows.push(([ps.g(a, b), ps.eta_v(a) * ps.eta_v(b)], cd.ric(a, b)));
            }
        }
    }
    classify_einstein_rows(&rows, tol)
}

fn analyze_all(spec: &ModelSpec, points: &[Vec<f64>]) -> Result<Vec<PointAnalysis>, VerifyError> {
    points.iter().map(|p| analyze_point(spec, p)).collect()
}

/// One identity claim over the given points.
pub fn run_claim(
    claim_id: &str,
    spec: &ModelSpec,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<ClaimResult, VerifyError> {
    let idx = claim_index(claim_id)?;
    Ok(aggregate_claim(idx, &analyze_all(spec, points)?, tol))
}

/// One conditional result over the given points.
pub fn run_theorem(
    theorem_id: &str,
    spec: &ModelSpec,
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> Result<TheoremResult, VerifyError> {
    let idx = theorem_index(theorem_id)?;
    let analyses = analyze_all(spec, points)?;
    let (met, _) =
        standing_assumption_check(&analyses, crate::paracontact::STANDING_ASSUMPTION_TOL);
    Ok(aggregate_theorem(idx, &analyses, tol, met))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    worst(a.iter().zip(b).map(|(x, y)| x - y))
}

/// Finite-difference oracle comparison on the given points.
pub fn fd_comparison(
    spec: &ModelSpec,
    points: &[Vec<f64>],
) -> Result<(f64, f64, f64), VerifyError> {
    let (mut dg, mut dg_half, mut dr) = (0.0f64, 0.0f64, 0.0f64);
    for p in points {
        let ps = assemble(spec, p)?;
        let ch = christoffel(&ps);
        let cd = curvature(&ps, &ch);
        let gamma = ch.values();
        let fd = fd_oracle(spec, p, FD_STEP)?;
        let fd_half = fd_oracle(spec, p, FD_STEP / 2.0)?;
        dg = worst([dg, max_abs_diff(&gamma, &fd.gamma)]);
        dg_half = worst([dg_half, max_abs_diff(&gamma, &fd_half.gamma)]);
        dr = worst([dr, max_abs_diff(&cd.riem_ud, &fd.riem_ud)]);
    }
    Ok((dg, dg_half, dr))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{}", x)).collect();
    format!("({})", parts.join(", "))
}

/// Builds the report from per-point analyses (in sample order).
pub fn assemble_report(
    spec: &ModelSpec,
    config: &SuiteConfig,
    analyses: &[PointAnalysis],
) -> Result<Report, VerifyError> {
    if analyses.is_empty() {
        return Err(VerifyError::NoPoints);
    }
    let tol = &config.tolerances;
    let center = spec.box_center();
    let center_analysis = analyze_point(spec, &center)?;

    let claims: Vec<ClaimResult> = (0..CLAIM_CATALOG.len())
        .map(|i| aggregate_claim(i, analyses, tol))
        .collect();
    let (standing_met, standing_residual) =
        standing_assumption_check(analyses, crate::paracontact::STANDING_ASSUMPTION_TOL);
    let theorems: Vec<TheoremResult> = (0..THEOREM_CATALOG.len())
        .map(|i| aggregate_theorem(i, analyses, tol, standing_met))
        .collect();

    let rows: Vec<([f64; 2], f64)> = analyses
        .iter()
        .flat_map(|a| a.fit_rows.iter().copied())
        .collect();
    let einstein_fit = if analyses.len() < 2 {
        return Err(VerifyError::InsufficientSamples(analyses.len()));
    } else {
        classify_einstein_rows(&rows, tol.curvature)?
    };

    let mut notes = Vec::new();

    // Stated reference values.
    let mut expectations = Vec::new();
    for (k, ex) in spec.expectations.iter().enumerate() {
        let max_deviation = worst(
            core::iter::once(center_analysis.expectation_deviation[k])
                .chain(analyses.iter().map(|a| a.expectation_deviation[k])),
        );
        let check = ExpectationCheck {
            label: ex.kind.to_string(),
            expected_source: ex.source.clone(),
            max_deviation,
            computed_at_center: center_analysis.expectation_values[k].clone(),
            flagged: !(max_deviation <= EXPECTATION_TOL),
        };
        if check.flagged {
            notes.push(format!(
                "discrepancy: {} reference as {}, recomputed {} at box centre {} (max relative deviation {:e})",
                check.label,
                check.expected_source,
                fmt_vec(&check.computed_at_center),
                fmt_vec(&center),
                check.max_deviation
            ));
        }
        expectations.push(check);
    }
    let matched = expectations.iter().filter(|e| !e.flagged).count();
    notes.push(format!(
        "reference values: {} of {} match within {:e}",
        matched,
        expectations.len(),
        EXPECTATION_TOL
    ));

    // Independent oracles.
    let koszul_gap = worst(
        core::iter::once(center_analysis.koszul_gap).chain(analyses.iter().map(|a| a.koszul_gap)),
    );
    notes.push(format!(
        "oracle: Koszul frame connection vs Christoffel route max gap {:e} (tolerance {:e})",
        koszul_gap, KOSZUL_TOL
    ));
    let mut fd_points = vec![center.clone()];
    fd_points.extend(analyses.iter().take(FD_POINTS).map(|a| a.point.clone()));
    let (fd_gamma, fd_gamma_half, fd_riem) = fd_comparison(spec, &fd_points)?;
    let fd_ratio = fd_gamma / fd_gamma_half;
    // A ratio is only meaningful when truncation error dominates round-off.
    let ratio_ok =
        fd_gamma <= FD_RATIO_FLOOR || (FD_RATIO_RANGE.0..=FD_RATIO_RANGE.1).contains(&fd_ratio);
    notes.push(format!(
        "oracle: finite differences at {} points, h = {:e}: Christoffel defect {:e} (tolerance {:e}), \
         Riemann defect {:e} (tolerance {:e}), defect ratio h/(h/2) = {}",
        fd_points.len(),
        FD_STEP,
        fd_gamma,
        FD_GAMMA_TOL,
        fd_riem,
        tol.fd,
        fd_ratio
    ));
    let oracles = OracleSummary {
        koszul_gap,
        fd_points: fd_points.len(),
        fd_gamma_defect: fd_gamma,
        fd_gamma_defect_half: fd_gamma_half,
        fd_riemann_defect: fd_riem,
        fd_ratio,
        passed: koszul_gap <= KOSZUL_TOL
            && fd_gamma <= FD_GAMMA_TOL
            && fd_riem <= tol.fd
            && ratio_ok,
    };

    notes.push(format!(
        "standing assumption phi(grad alpha) = -(2n-1) grad beta: max residual {:e}, {}",
        standing_residual,
        if standing_met {
            "satisfied"
        } else {
            "not satisfied"
        }
    ));
    if let Some(t) = theorems.iter().find(|t| t.theorem_id == "thm-3.11") {
        notes.push(format!(
            "thm-3.11: alternate conclusion scal = 2n(2n-1)(alpha^2+beta^2) has residual {:e}",
            t.alternate_residual.unwrap_or(f64::NAN)
        ));
    }
    notes.push(
        "thm-3.10: stated scal = -2n(2n-1)(alpha^2+beta^2) differs from the Einstein value -2n(2n+1)(alpha^2+beta^2); \
         the statement is checked"
            .to_string(),
    );
    for t in theorems
        .iter()
        .filter(|t| t.conditional && t.status == TheoremStatus::RefutedAtTolerance)
    {
        notes.push(format!(
            "{}: refuted at tolerance, but conditional on the standing assumption, which fails here",
            t.theorem_id
        ));
    }

    Ok(Report {
        model: spec.name.clone(),
        seed: config.seed,
        points: analyses.len(),
        tolerances: *tol,
        claims,
        theorems,
        einstein_fit,
        alpha_beta_summary: AlphaBetaSummary {
            point: center,
            alpha: center_analysis.alpha,
            beta: center_analysis.beta,
            xi_alpha: center_analysis.xi_alpha,
            xi_beta: center_analysis.xi_beta,
        },
        notes,
        standing_residual,
        expectations,
        oracles,
    })
}

/// Sample points of a suite run.
pub fn suite_points(spec: &ModelSpec, config: &SuiteConfig) -> Result<Vec<Vec<f64>>, VerifyError> {
    spec.validate()?;
    if config.points == 0 {
        return Err(VerifyError::NoPoints);
    }
    Ok(sample_points(spec, config.points, config.seed)?)
}

/// The full suite, evaluated sequentially.
pub fn run_suite(spec: &ModelSpec, config: &SuiteConfig) -> Result<Report, VerifyError> {
    let points = suite_points(spec, config)?;
    let analyses = analyze_all(spec, &points)?;
    assemble_report(spec, config, &analyses)
}
