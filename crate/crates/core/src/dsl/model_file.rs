use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::expr::{parse_expr, ExprError, ScalarExpr, FUNCTIONS};
use crate::jets::{JetMatrix, MAX_DIM};

/// Condition-number bound for the frame at the sample-box centre.
pub const CENTER_COND_BOUND: f64 = 1e6;

/// A stated reference value to be cross-checked against the recomputed
/// geometry. Frame indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpectationKind {
    /// `[E_i, E_j]` in frame components.
    Bracket(usize, usize),
    /// `nabla_{E_i} E_j` in frame components.
    Nabla(usize, usize),
    /// `nabla_{E_i} xi` in frame components.
    NablaXi(usize),
    /// `(nabla_{E_i} eta) E_j`.
    NablaEta(usize, usize),
    Alpha,
    Beta,
}

impl fmt::Display for ExpectationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpectationKind::Bracket(i, j) => write!(f, "[E{}, E{}]", i + 1, j + 1),
            ExpectationKind::Nabla(i, j) => write!(f, "nabla_E{} E{}", i + 1, j + 1),
            ExpectationKind::NablaXi(i) => write!(f, "nabla_E{} xi", i + 1),
            ExpectationKind::NablaEta(i, j) => write!(f, "(nabla_E{} eta) E{}", i + 1, j + 1),
            ExpectationKind::Alpha => f.write_str("alpha"),
            ExpectationKind::Beta => f.write_str("beta"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub kind: ExpectationKind,
    /// Frame components for vector kinds, a single entry for scalar kinds.
    pub components: Vec<ScalarExpr>,
    /// Right-hand side as written in the model file.
    pub source: String,
}

/// A manifold of dimension `2n + 1` given by a pseudo-orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub n: usize,
    pub coords: Vec<String>,
    /// `frame[i][a]`: component of `E_i` along coordinate `a`.
    pub frame: Vec<Vec<ScalarExpr>>,
    /// `g(E_i, E_j) = epsilon[i] * delta_ij`.
    pub epsilon: Vec<i8>,
    /// `phi E_i = sum_j phi_frame[j][i] E_j`.
    pub phi_frame: Vec<Vec<i32>>,
    /// 0-based index of the frame field that is xi.
    pub xi_index: usize,
    pub pp_params: (f64, f64),
    pub sample_box: Vec<(f64, f64)>,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Expr { line: usize, source: ExprError },
    #[error("invalid {field}: {rule}")]
    Validation { field: &'static str, rule: String },
}

fn invalid(field: &'static str, rule: impl Into<String>) -> ModelError {
    ModelError::Validation {
        field,
        rule: rule.into(),
    }
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn coord_names(&self) -> Vec<&str> {
        self.coords.iter().map(String::as_str).collect()
    }

    pub fn box_center(&self) -> Vec<f64> {
        self.sample_box
            .iter()
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.sample_box)
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Value-level frame matrix at `point` (rows are frame fields).
    pub fn frame_values(&self, point: &[f64]) -> Result<JetMatrix<f64>, super::EvalError> {
        let d = self.dim();
        let mut vals = Vec::with_capacity(d * d);
        for row in &self.frame {
            for e in row {
                vals.push(e.eval_value(point)?);
            }
        }
        Ok(JetMatrix::from_fn(d, d, |r, c| vals[r * d + c]))
    }

    /// Checks every structural invariant of the model.
    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n;
        if n < 1 {
            return Err(invalid("n", "n must be at least 1"));
        }
        let d = 2 * n + 1;
        if d > MAX_DIM {
            return Err(invalid(
                "n",
                format!("dimension {d} exceeds the supported maximum {MAX_DIM}"),
            ));
        }
        if self.coords.len() != d {
            return Err(invalid(
                "coords",
                format!(
                    "expected {d} coordinates for n = {n}, found {}",
                    self.coords.len()
                ),
            ));
        }
        for (k, c) in self.coords.iter().enumerate() {
            if self.coords[..k].contains(c) {
                return Err(invalid("coords", format!("duplicate coordinate `{c}`")));
            }
            if FUNCTIONS.contains(&c.as_str()) {
                return Err(invalid(
                    "coords",
                    format!("coordinate `{c}` shadows a function name"),
                ));
            }
        }
        if self.frame.len() != d {
            return Err(invalid(
                "frame",
                format!("expected {d} frame fields, found {}", self.frame.len()),
            ));
        }
        for (i, row) in self.frame.iter().enumerate() {
            if row.len() != d {
                return Err(invalid(
                    "frame",
                    format!("E{} has {} components, expected {d}", i + 1, row.len()),
                ));
            }
            if row
                .iter()
                .any(|e| e.max_coordinate().is_some_and(|k| k >= d))
            {
                return Err(invalid(
                    "frame",
                    format!("E{} references an unknown coordinate", i + 1),
                ));
            }
        }
        if self.epsilon.len() != d || self.epsilon.iter().any(|e| *e != 1 && *e != -1) {
            return Err(invalid(
                "epsilon",
                format!("expected {d} entries, each +1 or -1"),
            ));
        }
        let plus = self.epsilon.iter().filter(|e| **e == 1).count();
        if plus != n + 1 {
            return Err(invalid(
                "epsilon",
                format!(
                    "signature must be ({},{}), found ({},{})",
                    n + 1,
                    n,
                    plus,
                    d - plus
                ),
            ));
        }
        if self.xi_index >= d {
            return Err(invalid("xi", format!("xi must be one of E1..E{d}")));
        }
        if self.epsilon[self.xi_index] != 1 {
            return Err(invalid(
                "xi",
                "epsilon of xi must be +1 (xi is a unit spacelike field)",
            ));
        }
        let f = &self.phi_frame;
        if f.len() != d || f.iter().any(|r| r.len() != d) {
            return Err(invalid(
                "phi",
                format!("phi must act on all {d} frame fields"),
            ));
        }
        let x = self.xi_index;
        if (0..d).any(|j| f[j][x] != 0) {
            return Err(invalid("phi", "phi xi = 0 violated"));
        }
        if (0..d).any(|i| f[x][i] != 0) {
            return Err(invalid("phi", "eta o phi = 0 violated"));
        }
        for r in 0..d {
            for c in 0..d {
                let sq: i64 = (0..d).map(|k| f[r][k] as i64 * f[k][c] as i64).sum();
                let target = if r == c && r != x { 1 } else { 0 };
                if sq != target {
                    return Err(invalid("phi", "phi^2 = id - eta (x) xi violated"));
                }
            }
        }
        let (a, b) = self.pp_params;
        if a == 0.0 || b == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(invalid(
                "pp_params",
                "pseudo-projective constants a and b must be nonzero",
            ));
        }
        if self.sample_box.len() != d || self.sample_box.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(invalid(
                "box",
                "every coordinate needs an interval with lower < upper",
            ));
        }
        for e in &self.expectations {
            let idx = match e.kind {
                ExpectationKind::Bracket(i, j)
                | ExpectationKind::Nabla(i, j)
                | ExpectationKind::NablaEta(i, j) => i.max(j),
                ExpectationKind::NablaXi(i) => i,
                ExpectationKind::Alpha | ExpectationKind::Beta => 0,
            };
            let width = match e.kind {
                ExpectationKind::Bracket(..)
                | ExpectationKind::Nabla(..)
                | ExpectationKind::NablaXi(_) => d,
                _ => 1,
            };
            if idx >= d || e.components.len() != width {
                return Err(invalid(
                    "expect",
                    format!("malformed expectation for {}", e.kind),
                ));
            }
        }
        let center = self.box_center();
        let cond = self
            .frame_values(&center)
            .map_err(|err| invalid("frame", format!("cannot evaluate at the box centre: {err}")))?
            .condition_estimate();
        if !(cond <= CENTER_COND_BOUND) {
            return Err(invalid(
                "frame",
                format!("frame is not invertible at the box centre (condition estimate {cond:e})"),
            ));
        }
        Ok(())
    }
}

struct Builder {
    name: Option<String>,
    n: Option<usize>,
    coords: Option<Vec<String>>,
    frame: Vec<Option<Vec<ScalarExpr>>>,
    epsilon: Option<Vec<i8>>,
    phi: Vec<Option<Vec<i32>>>,
    xi: Option<usize>,
    pp: Option<(f64, f64)>,
    boxes: Vec<Option<(f64, f64)>>,
    expectations: Vec<Expectation>,
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

/// Splits `(a, b, c)` at top-level commas.
fn tuple_items(text: &str, line: usize, open: char, close: char) -> Result<Vec<&str>, ModelError> {
    let t = text.trim();
    if !(t.starts_with(open) && t.ends_with(close)) || t.len() < 2 {
        return Err(syntax(
            line,
            format!("expected a list in `{open}...{close}`, found `{t}`"),
        ));
    }
    let inner = &t[1..t.len() - 1];
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(inner[start..k].trim());
                start = k + 1;
            }
            _ => {}
        }
    }
    items.push(inner[start..].trim());
    if items.iter().any(|s| s.is_empty()) {
        return Err(syntax(line, "empty list entry"));
    }
    Ok(items)
}

fn frame_ref(word: &str, line: usize) -> Result<usize, ModelError> {
    word.strip_prefix('E')
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|k| *k >= 1 && *k <= MAX_DIM)
        .map(|k| k - 1)
        .ok_or_else(|| {
            syntax(
                line,
                format!("expected a frame field E1..E{MAX_DIM}, found `{word}`"),
            )
        })
}

fn constant(text: &str, line: usize) -> Result<f64, ModelError> {
    let e = parse_expr(text, &[]).map_err(|source| ModelError::Expr { line, source })?;
    e.eval_value(&[])
        .map_err(|err| syntax(line, format!("cannot evaluate constant `{text}`: {err}")))
}

/// Signed sum of frame fields, e.g. `E2`, `-E1`, `2*E1 - E3`, or `0`.
fn frame_combination(text: &str, d: usize, line: usize) -> Result<Vec<i32>, ModelError> {
    let mut coeffs = vec![0i32; d];
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Ok(coeffs);
    }
    let mut rest = compact.as_str();
    if rest.is_empty() {
        return Err(syntax(line, "empty phi image"));
    }
    while !rest.is_empty() {
        let sign = if let Some(r) = rest.strip_prefix('-') {
            rest = r;
            -1
        } else {
            rest = rest.strip_prefix('+').unwrap_or(rest);
            1
        };
        let end = rest[1..]
            .find(['+', '-'])
            .map(|k| k + 1)
            .unwrap_or(rest.len());
        let term = &rest[..end];
        rest = &rest[end..];
        let (mult, field) = match term.split_once('*') {
            Some((m, f)) => (
                m.parse::<i32>()
                    .map_err(|_| syntax(line, format!("bad coefficient `{m}`")))?,
                f,
            ),
            None => (1, term),
        };
        let k = frame_ref(field, line)?;
        if k >= d {
            return Err(syntax(line, format!("frame field `{field}` out of range")));
        }
        coeffs[k] += sign * mult;
    }
    Ok(coeffs)
}

impl Builder {
    fn dim(&self, line: usize) -> Result<usize, ModelError> {
        self.coords
            .as_ref()
            .map(Vec::len)
            .ok_or_else(|| syntax(line, "`coords` must be declared first"))
    }

    fn exprs(&self, text: &str, line: usize) -> Result<Vec<ScalarExpr>, ModelError> {
        let names: Vec<&str> = self
            .coords
            .as_ref()
            .unwrap()
            .iter()
            .map(String::as_str)
            .collect();
        tuple_items(text, line, '(', ')')?
            .into_iter()
            .map(|s| parse_expr(s, &names).map_err(|source| ModelError::Expr { line, source }))
            .collect()
    }

    fn expr(&self, text: &str, line: usize) -> Result<ScalarExpr, ModelError> {
        let names: Vec<&str> = self
            .coords
            .as_ref()
            .unwrap()
            .iter()
            .map(String::as_str)
            .collect();
        parse_expr(text.trim(), &names).map_err(|source| ModelError::Expr { line, source })
    }

    fn statement(&mut self, stmt: &str, line: usize) -> Result<(), ModelError> {
        let (keyword, rest) = stmt.split_once(char::is_whitespace).unwrap_or((stmt, ""));
        let rest = rest.trim();
        let assignment = |rest: &str| -> Result<String, ModelError> {
            rest.strip_prefix('=')
                .map(|r| r.trim().to_string())
                .ok_or_else(|| syntax(line, format!("expected `=` after `{keyword}`")))
        };
        match keyword {
            "model" => {
                let name = rest
                    .strip_prefix('"')
                    .and_then(|r| r.strip_suffix('"'))
                    .ok_or_else(|| syntax(line, "model name must be quoted"))?;
                self.name = Some(name.to_string());
            }
            "n" | "n=" => {
                let value = if keyword == "n=" {
                    rest.to_string()
                } else {
                    assignment(rest)?
                };
                let n = value.parse::<usize>().map_err(|_| {
                    syntax(
                        line,
                        format!("n must be a positive integer, found `{value}`"),
                    )
                })?;
                self.n = Some(n);
            }
            "coords" => {
                let value = assignment(rest)?;
                let names: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                for n in &names {
                    let ok = n
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                        && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                    if !ok {
                        return Err(syntax(line, format!("invalid coordinate name `{n}`")));
                    }
                }
                if names.len() > MAX_DIM {
                    return Err(syntax(
                        line,
                        format!("at most {MAX_DIM} coordinates are supported"),
                    ));
                }
                self.frame = vec![None; names.len()];
                self.phi = vec![None; names.len()];
                self.boxes = vec![None; names.len()];
                self.coords = Some(names);
            }
            "frame" => {
                let d = self.dim(line)?;
                let (field, value) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `frame Ek = (...)`"))?;
                let k = frame_ref(field.trim(), line)?;
                if k >= d {
                    return Err(syntax(line, format!("frame field E{} out of range", k + 1)));
                }
                if self.frame[k].is_some() {
                    return Err(syntax(line, format!("E{} defined twice", k + 1)));
                }
                self.frame[k] = Some(self.exprs(value, line)?);
            }
            "epsilon" => {
                let value = assignment(rest)?;
                let signs = tuple_items(&value, line, '(', ')')?
                    .into_iter()
                    .map(|s| match s {
                        "+1" | "1" | "+" => Ok(1i8),
                        "-1" | "-" => Ok(-1i8),
                        other => Err(syntax(
                            line,
                            format!("epsilon entries must be +1 or -1, found `{other}`"),
                        )),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                self.epsilon = Some(signs);
            }
            "phi" => {
                let d = self.dim(line)?;
                let (field, value) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `phi Ek = ...`"))?;
                let k = frame_ref(field.trim(), line)?;
                if k >= d {
                    return Err(syntax(line, format!("frame field E{} out of range", k + 1)));
                }
                self.phi[k] = Some(frame_combination(value, d, line)?);
            }
            "xi" => {
                let value = assignment(rest)?;
                self.xi = Some(frame_ref(&value, line)?);
            }
            "pp_params" => {
                let value = assignment(rest)?;
                let items = tuple_items(&value, line, '(', ')')?;
                if items.len() != 2 {
                    return Err(syntax(line, "pp_params takes exactly two constants"));
                }
                self.pp = Some((constant(items[0], line)?, constant(items[1], line)?));
            }
            "box" => {
                self.dim(line)?;
                let (coord, interval) = rest
                    .split_once(" in ")
                    .ok_or_else(|| syntax(line, "expected `box <coord> in [lo, hi]`"))?;
                let coord = coord.trim();
                let k = self
                    .coords
                    .as_ref()
                    .unwrap()
                    .iter()
                    .position(|c| c == coord)
                    .ok_or_else(|| syntax(line, format!("unknown coordinate `{coord}` in box")))?;
                let items = tuple_items(interval, line, '[', ']')?;
                if items.len() != 2 {
                    return Err(syntax(line, "box interval takes exactly two bounds"));
                }
                self.boxes[k] = Some((constant(items[0], line)?, constant(items[1], line)?));
            }
            "expect" => {
                self.dim(line)?;
                let (lhs, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| syntax(line, "expected `expect <kind> ... = <value>`"))?;
                let words: Vec<&str> = lhs.split_whitespace().collect();
                let kind = match words.as_slice() {
                    ["bracket", a, b] => {
                        ExpectationKind::Bracket(frame_ref(a, line)?, frame_ref(b, line)?)
                    }
                    ["nabla", a, b] => {
                        ExpectationKind::Nabla(frame_ref(a, line)?, frame_ref(b, line)?)
                    }
                    ["nabla_xi", a] => ExpectationKind::NablaXi(frame_ref(a, line)?),
                    ["nabla_eta", a, b] => {
                        ExpectationKind::NablaEta(frame_ref(a, line)?, frame_ref(b, line)?)
                    }
                    ["alpha"] => ExpectationKind::Alpha,
                    ["beta"] => ExpectationKind::Beta,
                    _ => {
                        return Err(syntax(
                            line,
                            format!("unknown expectation `{}`", lhs.trim()),
                        ))
                    }
                };
                let components = match kind {
                    ExpectationKind::Bracket(..)
                    | ExpectationKind::Nabla(..)
                    | ExpectationKind::NablaXi(_) => self.exprs(rhs, line)?,
                    _ => vec![self.expr(rhs, line)?],
                };
                self.expectations.push(Expectation {
                    kind,
                    components,
                    source: rhs.trim().to_string(),
                });
            }
            other => return Err(syntax(line, format!("unknown statement `{other}`"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<ModelSpec, ModelError> {
        let name = self
            .name
            .ok_or_else(|| invalid("model", "missing `model \"<name>\"`"))?;
        let n = self.n.ok_or_else(|| invalid("n", "missing `n = <int>`"))?;
        let coords = self
            .coords
            .ok_or_else(|| invalid("coords", "missing `coords = ...`"))?;
        let d = coords.len();
        let frame = self
            .frame
            .into_iter()
            .enumerate()
            .map(|(k, row)| {
                row.ok_or_else(|| invalid("frame", format!("missing frame field E{}", k + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let epsilon = self
            .epsilon
            .ok_or_else(|| invalid("epsilon", "missing `epsilon = (...)`"))?;
        let mut phi_frame = vec![vec![0i32; d]; d];
        for (i, image) in self.phi.into_iter().enumerate() {
            let image =
                image.ok_or_else(|| invalid("phi", format!("missing `phi E{} = ...`", i + 1)))?;
            for j in 0..d {
                phi_frame[j][i] = image[j];
            }
        }
        let xi_index = self.xi.ok_or_else(|| invalid("xi", "missing `xi = Ek`"))?;
        let spec = ModelSpec {
            name,
            n,
            coords,
            frame,
            epsilon,
            phi_frame,
            xi_index,
            pp_params: self.pp.unwrap_or((1.0, 1.0)),
            sample_box: self
                .boxes
                .into_iter()
                .map(|b| b.unwrap_or((-1.0, 1.0)))
                .collect(),
            expectations: self.expectations,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses and validates a model file.
pub fn parse_model(source: &str) -> Result<ModelSpec, ModelError> {
    let mut b = Builder {
        name: None,
        n: None,
        coords: None,
        frame: Vec::new(),
        epsilon: None,
        phi: Vec::new(),
        xi: None,
        pp: None,
        boxes: Vec::new(),
        expectations: Vec::new(),
    };
    for (k, raw) in source.lines().enumerate() {
        let line = k + 1;
        let text = raw.split('#').next().unwrap_or("");
        for stmt in text.split(';') {
            let stmt = stmt.trim();
            if !stmt.is_empty() {
                b.statement(stmt, line)?;
            }
        }
    }
    b.finish()
}
