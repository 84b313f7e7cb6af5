//! Model loading, parallel verification runs, report rendering and single
//! tensor queries on top of [`paracontact_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use paracontact_core::connection::{christoffel, extract_alpha_beta};
use paracontact_core::curvature::curvature;
use paracontact_core::curvfamily::{
    concircular, conformal, metric_tensor, pc_bochner, projective, projective_ricci,
    pseudo_projective, ricci_tensor, riemann_tensor, FamilyError,
};
use paracontact_core::dsl::{builtin, parse_model, ModelError, ModelSpec, BUILTIN_NAMES};
use paracontact_core::model::{assemble, ModelEvalError, TensorAtPoint};
use paracontact_core::verify::{
    analyze_point, assemble_report, suite_points, Report, SuiteConfig, VerifyError,
};
use rayon::prelude::*;

pub use paracontact_core::verify::Tolerances;

/// Names accepted by [`tensor_query`].
pub const TENSOR_NAMES: [&str; 13] = [
    "g",
    "phi",
    "gamma",
    "riemann",
    "ricci",
    "scal",
    "P",
    "C",
    "concircular",
    "Ptilde",
    "Pbar",
    "B",
    "alphabeta",
];

/// Where a model comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Builtin(String),
    Path(PathBuf),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("unknown built-in model `{name}`; available: {}", BUILTIN_NAMES.join(", "))]
    UnknownBuiltin { name: String },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: ModelError },
    #[error("unknown tensor `{name}`; available: {}", TENSOR_NAMES.join(", "))]
    UnknownTensor { name: String },
    #[error("point {point:?} has {got} coordinates, the model needs {expected}")]
    PointDimension {
        point: Vec<f64>,
        got: usize,
        expected: usize,
    },
    #[error("point {point:?} lies outside the sample box {sample_box:?}")]
    OutsideBox {
        point: Vec<f64>,
        sample_box: Vec<(f64, f64)>,
    },
    #[error(transparent)]
    Eval(#[from] ModelEvalError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Loads and validates a model.
pub fn load_model(source: &ModelSource) -> Result<ModelSpec, CliError> {
    match source {
        ModelSource::Builtin(name) => {
            builtin(name).ok_or_else(|| CliError::UnknownBuiltin { name: name.clone() })
        }
        ModelSource::Path(path) => load_model_file(path),
    }
}

fn load_model_file(path: &Path) -> Result<ModelSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// The full suite with per-point analyses evaluated in parallel; results
/// are collected in sample order, so the report is identical to the
/// sequential [`paracontact_core::verify::run_suite`].
pub fn run_verify(spec: &ModelSpec, config: &SuiteConfig) -> Result<Report, VerifyError> {
    let points = suite_points(spec, config)?;
    let analyses = points
        .par_iter()
        .map(|p| analyze_point(spec, p))
        .collect::<Result<Vec<_>, _>>()?;
    assemble_report(spec, config, &analyses)
}

/// Formats a real with 12 significant digits; integral values keep a
/// trailing `.0`.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let mut s = format!("{rounded}");
    if !s.contains(['.', 'e']) {
        s.push_str(".0");
    }
    s
}

fn format_residual(v: f64) -> String {
    format!("{v:.3e}")
}

/// JSON rendering of a report (stable key order).
pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Human-readable rendering of a report.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let t = &report.tolerances;
    let _ = writeln!(
        out,
        "model {} (seed {}, {} points)",
        report.model, report.seed, report.points
    );
    let _ = writeln!(
        out,
        "tolerances: algebraic {:e}, first-order {:e}, curvature {:e}, finite-difference {:e}",
        t.algebraic, t.first_order, t.curvature, t.fd
    );
    let _ = writeln!(out, "\nclaims:");
    for c in &report.claims {
        let _ = writeln!(
            out,
            "  {:<10} {:<4}  max {}  mean {}  tol {:e}",
            c.claim_id,
            if c.status == paracontact_core::verify::ClaimStatus::Pass {
                "pass"
            } else {
                "FAIL"
            },
            format_residual(c.max_residual),
            format_residual(c.mean_residual),
            c.tolerance
        );
    }
    let _ = writeln!(out, "\ntheorems:");
    for th in &report.theorems {
        let _ = write!(
            out,
            "  {:<9} {:<21} hypothesis {}  conclusion {}",
            th.theorem_id,
            th.status.as_str(),
            format_residual(th.hypothesis_residual),
            format_residual(th.conclusion_residual)
        );
        if th.conditional {
            out.push_str("  (conditional)");
        }
        out.push('\n');
    }
    let f = &report.einstein_fit;
    let _ = writeln!(
        out,
        "\nEinstein fit: Ric = {} g + {} eta(x)eta, residual {}, verdict {}",
        format_number(f.lambda),
        format_number(f.mu),
        format_residual(f.fit_residual),
        f.verdict.as_str()
    );
    let ab = &report.alpha_beta_summary;
    let _ = writeln!(
        out,
        "at {:?}: alpha = {}, beta = {}, xi(alpha) = {}, xi(beta) = {}",
        ab.point,
        format_number(ab.alpha),
        format_number(ab.beta),
        format_number(ab.xi_alpha),
        format_number(ab.xi_beta)
    );
    let _ = writeln!(out, "\nnotes:");
    for n in &report.notes {
        let _ = writeln!(out, "  - {n}");
    }
    let _ = writeln!(
        out,
        "\nresult: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    out
}

fn push_tensor(out: &mut String, label: &str, t: &TensorAtPoint) {
    let rank = t.rank();
    let mut idx = vec![0; rank];
    for k in 0..t.components.len() {
        t.decode(k, &mut idx);
        let labels: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(
            out,
            "{label}[{}] = {}",
            labels.join(","),
            format_number(t.components[k])
        );
    }
}

/// Prints the components of one tensor at a point, row-major with 1-based
/// coordinate indices.
pub fn tensor_query(spec: &ModelSpec, name: &str, at: &[f64]) -> Result<String, CliError> {
    if !TENSOR_NAMES.contains(&name) {
        return Err(CliError::UnknownTensor {
            name: name.to_string(),
        });
    }
    if at.len() != spec.dim() {
        return Err(CliError::PointDimension {
            point: at.to_vec(),
            got: at.len(),
            expected: spec.dim(),
        });
    }
    if !spec.contains(at) {
        return Err(CliError::OutsideBox {
            point: at.to_vec(),
            sample_box: spec.sample_box.clone(),
        });
    }
    let ps = assemble(spec, at)?;
    let ch = christoffel(&ps);
    let cd = curvature(&ps, &ch);
    let d = ps.dim;
    let mut out = String::new();
    match name {
        "g" => push_tensor(&mut out, "g", &metric_tensor(&ps)),
        "phi" => push_tensor(
            &mut out,
            "phi",
            &TensorAtPoint::from_fn((1, 1), d, at, |i| ps.phi_v(i[0], i[1])),
        ),
        "gamma" => push_tensor(
            &mut out,
            "Gamma",
            &TensorAtPoint {
                valence: (1, 2),
                dim: d,
                components: ch.values(),
                point: at.to_vec(),
            },
        ),
        "riemann" => push_tensor(&mut out, "R", &riemann_tensor(&ps, &cd)),
        "ricci" => push_tensor(&mut out, "Ric", &ricci_tensor(&ps, &cd)),
        "scal" => {
            let _ = writeln!(out, "scal = {}", format_number(cd.scal));
        }
        "P" => push_tensor(&mut out, "P", &projective(&ps, &cd).components),
        "C" => push_tensor(&mut out, "C", &conformal(&ps, &cd).components),
        "concircular" => push_tensor(&mut out, "Cbar", &concircular(&ps, &cd).components),
        "Ptilde" => push_tensor(&mut out, "Ptilde", &projective_ricci(&ps, &cd).components),
        "Pbar" => {
            let (a, b) = spec.pp_params;
            push_tensor(
                &mut out,
                "Pbar",
                &pseudo_projective(&ps, &cd, a, b)?.components,
            )
        }
        "B" => push_tensor(&mut out, "B", &pc_bochner(&ps, &cd).components),
        "alphabeta" => {
            let ab = extract_alpha_beta(&ps, &ch);
            let _ = writeln!(
                out,
                "alpha = {}, beta = {}",
                format_number(ab.alpha),
                format_number(ab.beta)
            );
        }
        _ => unreachable!("checked against TENSOR_NAMES"),
    }
    Ok(out)
}
