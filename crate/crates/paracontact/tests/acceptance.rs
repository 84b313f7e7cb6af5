//! Acceptance criteria. Each criterion is a function returning a one-line
//! outcome; `acceptance_summary` prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Individual tests exist for each criterion
//! so a failure is reported by name.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the table.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::Command;
use std::time::{Duration, Instant};

use paracontact::{render_json, run_verify};
use paracontact_core::connection::{christoffel, extract_alpha_beta};
use paracontact_core::curvature::{curvature, xi_sectional};
use paracontact_core::curvfamily::{
    concircular, conformal, pc_bochner, projective, pseudo_projective, riemann_tensor,
};
use paracontact_core::dsl::{builtin, ExpectationKind, ModelSpec};
use paracontact_core::model::assemble;
use paracontact_core::sampling::sample_points;
use paracontact_core::verify::{
    analyze_point, fd_comparison, run_claim, run_suite, EinsteinVerdict, Report, SuiteConfig,
    TheoremStatus, Tolerances, FD_STEP,
};

const POINTS: usize = 100;
const SEED: u64 = 42;

// Pinned tolerances.
const ALPHA_BETA_REL_TOL: f64 = 1e-7;
const TPS_TOL: f64 = 1e-7;
const KOSZUL_TOL: f64 = 1e-8;
const COMPAT_TOL: f64 = 1e-9;
const FIRST_ORDER_TOL: f64 = 1e-7;
const NORMALITY_TOL: f64 = 1e-6;
const CURVATURE_TOL: f64 = 1e-6;
const EXACT_TOL: f64 = 1e-9;
const SECTIONAL_TOL: f64 = 1e-6;
const WEYL_TOL: f64 = 1e-6;
const FAMILY_TOL: f64 = 1e-10;
const BOCHNER_TOL: f64 = 1e-12;
const FD_GAMMA_TOL: f64 = 1e-5;
const FD_RIEMANN_TOL: f64 = 1e-3;
const FD_RATIO: (f64, f64) = (3.5, 4.5);
const REFERENCE_TOL: f64 = 1e-12;
const RECONSTRUCTION_BUDGET: Duration = Duration::from_secs(1);
const SUITE_BUDGET: Duration = Duration::from_secs(10);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn example25() -> ModelSpec {
    builtin("example25").unwrap()
}

fn flat3() -> ModelSpec {
    builtin("flat3").unwrap()
}

fn points(spec: &ModelSpec) -> Vec<Vec<f64>> {
    sample_points(spec, POINTS, SEED).unwrap()
}

fn config() -> SuiteConfig {
    SuiteConfig {
        points: POINTS,
        seed: SEED,
        tolerances: Tolerances::default(),
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn claim_max(id: &str, spec: &ModelSpec, pts: &[Vec<f64>]) -> f64 {
    run_claim(id, spec, pts, &Tolerances::default())
        .unwrap()
        .max_residual
}

fn criterion_1() -> Outcome {
    let spec = example25();
    let pts = points(&spec);
    let start = Instant::now();
    let (mut rel, mut tps): (f64, f64) = (0.0, 0.0);
    for p in &pts {
        let ps = assemble(&spec, p).unwrap();
        let ch = christoffel(&ps);
        let ab = extract_alpha_beta(&ps, &ch);
        let alpha = 0.5 * (2.0 * p[2]).exp();
        rel = rel
            .max(((ab.alpha - alpha) / alpha).abs())
            .max((ab.beta - 1.0).abs());
        tps = tps.max(ab.residual);
    }
    let elapsed = start.elapsed();
    check(
        rel < ALPHA_BETA_REL_TOL && tps < TPS_TOL && elapsed < RECONSTRUCTION_BUDGET,
        format!("(alpha, beta) rel err {rel:.2e}, eq-2.4 residual {tps:.2e}, {elapsed:?}"),
    )
}

fn criterion_2() -> Outcome {
    let spec = example25();
    let pts = points(&spec);
    let mut gap: f64 = 0.0;
    for p in &pts {
        gap = gap.max(analyze_point(&spec, p).unwrap().koszul_gap);
    }
    let report = run_suite(&spec, &config()).unwrap();
    let flagged: Vec<&str> = report
        .flagged_expectations()
        .map(|e| e.label.as_str())
        .collect();
    // every other printed bracket / connection entry matches at the origin
    let origin = [0.0; 3];
    let centre = analyze_point(&spec, &origin).unwrap();
    let mut table_entries = 0;
    let mut origin_mismatch = Vec::new();
    for (k, ex) in spec.expectations.iter().enumerate() {
        let is_table = matches!(
            ex.kind,
            ExpectationKind::Bracket(..)
                | ExpectationKind::Nabla(..)
                | ExpectationKind::NablaXi(..)
        );
        if !is_table || flagged.contains(&ex.kind.to_string().as_str()) {
            continue;
        }
        table_entries += 1;
        for (v, e) in centre.expectation_values[k].iter().zip(&ex.components) {
            if (v - e.eval_value(&origin).unwrap()).abs() > REFERENCE_TOL {
                origin_mismatch.push(ex.kind.to_string());
            }
        }
    }
    check(
        gap < KOSZUL_TOL && flagged == ["[E1, E3]", "nabla_E1 xi"] && origin_mismatch.is_empty(),
        format!(
            "Koszul gap {gap:.2e}; flagged {flagged:?}; {table_entries} other table entries, mismatches {origin_mismatch:?}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in [example25(), flat3()] {
        let pts = points(&spec);
        worst = worst
            .max(claim_max("eq-2.1", &spec, &pts))
            .max(claim_max("eq-2.2", &spec, &pts));
    }
    check(
        worst < COMPAT_TOL,
        format!("eq-2.1, eq-2.2 max residual {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let spec = example25();
    let pts = points(&spec);
    let r: Vec<(&str, f64)> = ["eq-2.5", "eq-2.6", "eq-2.7", "eq-2.8", "eq-2.9"]
        .iter()
        .map(|id| (*id, claim_max(id, &spec, &pts)))
        .collect();
    let detail: Vec<String> = r.iter().map(|(id, v)| format!("{id} {v:.2e}")).collect();
    check(
        r.iter().all(|(_, v)| *v < FIRST_ORDER_TOL),
        detail.join(", "),
    )
}

fn criterion_5() -> Outcome {
    let spec = example25();
    let v = claim_max("normality", &spec, &points(&spec));
    check(v < NORMALITY_TOL, format!("|N - 2 d eta (x) xi| = {v:.2e}"))
}

fn criterion_6() -> Outcome {
    let spec = example25();
    let pts = points(&spec);
    let r310 = claim_max("eq-3.10", &spec, &pts);
    let r311 = claim_max("eq-3.11", &spec, &pts);
    let r312 = claim_max("eq-3.12", &spec, &pts);
    let r314 = claim_max("eq-3.14", &spec, &pts);
    check(
        r310 < CURVATURE_TOL && r311 < CURVATURE_TOL && r312 < EXACT_TOL && r314 < CURVATURE_TOL,
        format!("eq-3.10 {r310:.2e}, eq-3.11 {r311:.2e}, eq-3.12 {r312:.2e}, eq-3.14 {r314:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let spec = example25();
    let mut worst: f64 = 0.0;
    for p in points(&spec) {
        let ps = assemble(&spec, &p).unwrap();
        let ch = christoffel(&ps);
        let cd = curvature(&ps, &ch);
        let ab = extract_alpha_beta(&ps, &ch);
        let k = xi_sectional(&ps, &cd, &ps.frame_vector(0)).unwrap();
        let expected = -(ab.alpha * ab.alpha + ab.beta * ab.beta - ab.xi_beta);
        worst = worst.max((k - expected).abs());
    }
    let ps = assemble(&spec, &[0.0; 3]).unwrap();
    let cd = curvature(&ps, &christoffel(&ps));
    let k1 = xi_sectional(&ps, &cd, &ps.frame_vector(0)).unwrap();
    let k2 = xi_sectional(&ps, &cd, &ps.frame_vector(1)).unwrap();
    check(
        worst < SECTIONAL_TOL
            && (k1 + 1.25).abs() < SECTIONAL_TOL
            && (k2 - 1.25).abs() < SECTIONAL_TOL,
        format!(
            "max |K(xi,E1) + (a^2+b^2-xi b)| {worst:.2e}; origin K(xi,E1) = {k1}, K(xi,E2) = {k2}"
        ),
    )
}

fn criterion_8() -> Outcome {
    let spec = example25();
    let mut worst: f64 = 0.0;
    for p in points(&spec) {
        let ps = assemble(&spec, &p).unwrap();
        let cd = curvature(&ps, &christoffel(&ps));
        worst = worst.max(conformal(&ps, &cd).components.max_norm());
    }
    check(worst < WEYL_TOL, format!("|C| max {worst:.2e}"))
}

fn criterion_9() -> Outcome {
    let spec = example25();
    let mut pp_gap: f64 = 0.0;
    let mut concircular_gap: f64 = 0.0;
    for p in points(&spec) {
        let ps = assemble(&spec, &p).unwrap();
        let mut cd = curvature(&ps, &christoffel(&ps));
        let n = ps.n as f64;
        let pr = projective(&ps, &cd);
        let pp = pseudo_projective(&ps, &cd, 1.0, -1.0 / (2.0 * n)).unwrap();
        pp_gap = pp_gap.max(pr.components.distance(&pp.components));
        // with scal = 0 the concircular tensor reduces to R
        cd.scal = 0.0;
        concircular_gap = concircular_gap.max(
            concircular(&ps, &cd)
                .components
                .distance(&riemann_tensor(&ps, &cd)),
        );
    }
    let flat = flat3();
    for p in points(&flat) {
        let ps = assemble(&flat, &p).unwrap();
        let cd = curvature(&ps, &christoffel(&ps));
        concircular_gap = concircular_gap.max(
            concircular(&ps, &cd)
                .components
                .distance(&riemann_tensor(&ps, &cd)),
        );
    }
    let ps = assemble(&flat, &[0.0; 3]).unwrap();
    let cd = curvature(&ps, &christoffel(&ps));
    let b = pc_bochner(&ps, &cd).components.get(&[0, 1, 1, 0]);
    check(
        pp_gap < FAMILY_TOL && concircular_gap < FAMILY_TOL && (b - 2.0 / 3.0).abs() < BOCHNER_TOL,
        format!("|Pbar(1,-1/2n) - P| {pp_gap:.2e}; |Cbar - R| at scal = 0 {concircular_gap:.2e}; B(e1,e2,e2,e1) = {b}"),
    )
}

/// thm-3.14 and thm-3.15 never assert a conclusion from an unmet hypothesis.
fn bochner_gating(report: &Report, tol: f64) -> Result<(), String> {
    for id in ["thm-3.14", "thm-3.15"] {
        let t = report.theorem(id).unwrap();
        if !(t.hypothesis_residual <= tol) && t.status != TheoremStatus::Vacuous {
            return Err(format!(
                "{} on {} asserted with hypothesis {:.2e}",
                id, report.model, t.hypothesis_residual
            ));
        }
    }
    let b = report.theorem("thm-3.14").unwrap();
    if b.hypothesis_residual > tol && b.status != TheoremStatus::Vacuous {
        return Err(format!(
            "thm-3.14 on {} not vacuous with |B| = {:.2e}",
            report.model, b.hypothesis_residual
        ));
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let tol = Tolerances::default().curvature;
    let flat = run_suite(&flat3(), &config()).unwrap();
    let not_verified: Vec<&str> = [
        "thm-3.6", "thm-3.7", "thm-3.8", "thm-3.9", "thm-3.10", "thm-3.11", "thm-3.12", "thm-3.13",
    ]
    .into_iter()
    .filter(|id| flat.theorem(id).unwrap().status != TheoremStatus::Verified)
    .collect();
    let fit = flat.einstein_fit;
    let ps = assemble(&flat3(), &[0.0; 3]).unwrap();
    let scal = curvature(&ps, &christoffel(&ps)).scal;
    let (a, b) = (flat.alpha_beta_summary.alpha, flat.alpha_beta_summary.beta);
    let s = a * a + b * b;
    let scal_ok = (scal + 6.0 * s).abs() <= tol && (scal + 2.0 * s).abs() <= tol;
    let e25 = run_suite(&example25(), &config()).unwrap();
    let gating = bochner_gating(&flat, tol).and_then(|_| bochner_gating(&e25, tol));
    let t314 = flat.theorem("thm-3.14").unwrap();
    check(
        not_verified.is_empty()
            && fit.verdict == EinsteinVerdict::Einstein
            && fit.lambda == 0.0
            && fit.mu == 0.0
            && scal_ok
            && t314.status == TheoremStatus::Vacuous
            && gating.is_ok(),
        format!(
            "flat3: 3.6-3.13 not verified {not_verified:?}; fit ({}, {}) {}; scal {scal}; thm-3.14 {} with |B| {:.3}; \
             thm-3.15 {}; {}",
            fit.lambda,
            fit.mu,
            fit.verdict.as_str(),
            t314.status.as_str(),
            t314.hypothesis_residual,
            flat.theorem("thm-3.15").unwrap().status.as_str(),
            gating.err().unwrap_or_else(|| "gating respected".into())
        ),
    )
}

fn criterion_11() -> Outcome {
    let spec = example25();
    let pts: Vec<Vec<f64>> = points(&spec).into_iter().take(10).collect();
    let (dg, dg_half, dr) = fd_comparison(&spec, &pts).unwrap();
    let ratio = dg / dg_half;
    check(
        dg < FD_GAMMA_TOL && dr < FD_RIEMANN_TOL && (FD_RATIO.0..=FD_RATIO.1).contains(&ratio),
        format!("h = {FD_STEP:e}: Gamma defect {dg:.2e}, Riemann defect {dr:.2e}, halving ratio {ratio:.3}"),
    )
}

fn criterion_12() -> Outcome {
    let start = Instant::now();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let o = Command::new(env!("CARGO_BIN_EXE_paracontact"))
            .args(["verify", "--builtin", "example25", "--format", "json"])
            .output()
            .unwrap();
        outputs.push(o.stdout);
    }
    let a = render_json(&run_verify(&example25(), &config()).unwrap());
    let b = render_json(&run_verify(&example25(), &config()).unwrap());
    let flat = render_json(&run_verify(&flat3(), &config()).unwrap());
    let elapsed = start.elapsed();
    check(
        outputs[0] == outputs[1]
            && !outputs[0].is_empty()
            && a == b
            && a.as_bytes() == outputs[0]
            && !flat.is_empty()
            && elapsed < SUITE_BUDGET,
        format!(
            "byte-identical reports ({} bytes); suite runs took {elapsed:?}",
            outputs[0].len()
        ),
    )
}

const CRITERIA: [Criterion; 12] = [
    ("example25 reconstruction", criterion_1),
    ("connection oracle agreement", criterion_2),
    ("compatibility suite", criterion_3),
    ("first-order structure identities", criterion_4),
    ("normality", criterion_5),
    ("curvature identities", criterion_6),
    ("xi-sectional curvature", criterion_7),
    ("dimension-3 Weyl check", criterion_8),
    ("family-tensor algebra", criterion_9),
    ("theorem harness on flat3", criterion_10),
    ("oracle independence", criterion_11),
    ("determinism and runtime", criterion_12),
];

#[test]
fn acceptance_summary() {
    let mut failed = Vec::new();
    for (k, (name, f)) in CRITERIA.iter().enumerate() {
        let outcome = f();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:>2} {tag} {name}: {detail}", k + 1);
        if outcome.is_err() {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

macro_rules! criterion_tests {
    ($($name:ident => $f:ident),* $(,)?) => {
        $(
            #[test]
            fn $name() {
                if let Err(detail) = $f() {
                    panic!("{detail}");
                }
            }
        )*
    };
}

criterion_tests! {
    c01_example_reconstruction => criterion_1,
    c02_connection_oracle => criterion_2,
    c03_compatibility => criterion_3,
    c04_first_order_identities => criterion_4,
    c05_normality => criterion_5,
    c06_curvature_identities => criterion_6,
    c07_xi_sectional => criterion_7,
    c08_weyl_dimension_three => criterion_8,
    c09_family_algebra => criterion_9,
    c10_theorem_harness => criterion_10,
    c11_oracle_independence => criterion_11,
    c12_determinism => criterion_12,
}
