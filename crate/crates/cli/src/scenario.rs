//! Scenario files: a small sectioned key-value format with the versioned
//! header line `fracguide-scenario v1`.
//!
//! ```text
//! fracguide-scenario v1
//!
//! [dynamics]
//! builtin = paper          # or an explicit separable-affine block:
//! # drift = x2 ; -sin(x1) + cos(t)
//! # b = 0.3 0 ; 0 0.5
//! # c = 0.4 0 ; 0 0.2
//! # lambda_g = 1.0
//! # c_g = 2.9
//!
//! [order]
//! alpha = 0.5
//!
//! [horizon]
//! t = 5.0
//!
//! [sets]
//! p = ball 1.0 2           # or: finite (1, 0) (0, 1) (-1, 0)
//! q = ball 1.0 2
//!
//! [initial]
//! x0 = -1 0
//! y0 = 0 1
//!
//! [partition]
//! step = 0.0005            # or: nodes = 0 0.1 0.25 ... T
//!
//! [policies]
//! disturbance = random     # random | adversarial
//! guide_u = random
//! seed = 42
//! bound_eps = 0.1
//!
//! [output]
//! csv = run.csv
//! meta = run.meta
//! ```
//!
//! With `builtin = paper` every other section is optional and overrides the
//! bundled scenario; with an explicit dynamics block the order, horizon,
//! sets, initial and partition sections are mandatory.

use crate::expr::{parse_expr, Expr};
use fracguide::{
    paper_example, ActionSet, AimPolicy, AimingConfig, FracOrder, GameDynamics, Matrix, Policy,
    TimeGrid,
};
use std::fmt;

pub const SCENARIO_HEADER: &str = "fracguide-scenario v1";

/// Line-anchored scenario failure (`line == 0` for semantic errors that have
/// no single source line).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "scenario line {}: {}", self.line, self.message)
        } else {
            write!(f, "scenario: {}", self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DynamicsSpec {
    Builtin(String),
    Separable {
        drift: Vec<String>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        lambda_g: f64,
        c_g: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetSpec {
    Ball { radius: f64, dim: usize },
    Finite(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSpec {
    Step(f64),
    Nodes(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicySpec {
    Random,
    Adversarial,
}

/// Declarative scenario document; `None` fields fall back to the builtin
/// defaults (when a builtin is named) or are mandatory (explicit dynamics).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioDoc {
    pub dynamics: Option<DynamicsSpec>,
    pub alpha: Option<f64>,
    pub horizon: Option<f64>,
    pub p: Option<SetSpec>,
    pub q: Option<SetSpec>,
    pub x0: Option<Vec<f64>>,
    pub y0: Option<Vec<f64>>,
    pub partition: Option<PartitionSpec>,
    pub disturbance: Option<PolicySpec>,
    pub guide_u: Option<PolicySpec>,
    pub seed: Option<u64>,
    pub bound_eps: Option<f64>,
    pub csv_path: Option<String>,
    pub meta_path: Option<String>,
}

fn parse_f64(line: usize, text: &str, what: &str) -> Result<f64, ScenarioError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| err(line, format!("{what}: malformed number '{}'", text.trim())))
}

fn parse_vector(line: usize, text: &str, what: &str) -> Result<Vec<f64>, ScenarioError> {
    let vals: Result<Vec<f64>, _> = text
        .split_whitespace()
        .map(|tok| tok.parse::<f64>())
        .collect();
    match vals {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(err(
            line,
            format!("{what}: expected whitespace-separated numbers"),
        )),
    }
}

fn parse_matrix(line: usize, text: &str, what: &str) -> Result<Vec<Vec<f64>>, ScenarioError> {
    let rows: Result<Vec<Vec<f64>>, ScenarioError> = text
        .split(';')
        .map(|row| parse_vector(line, row, what))
        .collect();
    let rows = rows?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(err(line, format!("{what}: rows have different lengths")));
    }
    Ok(rows)
}

fn parse_set(line: usize, text: &str, what: &str) -> Result<SetSpec, ScenarioError> {
    let trimmed = text.trim();
    if let Some(rest) = trimmed.strip_prefix("ball") {
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(err(line, format!("{what}: expected 'ball <radius> <dim>'")));
        }
        let radius = parse_f64(line, parts[0], what)?;
        let dim = parts[1]
            .parse::<usize>()
            .map_err(|_| err(line, format!("{what}: malformed dimension '{}'", parts[1])))?;
        return Ok(SetSpec::Ball { radius, dim });
    }
    if let Some(rest) = trimmed.strip_prefix("finite") {
        let mut points = Vec::new();
        let mut remainder = rest.trim();
        while !remainder.is_empty() {
            let Some(open) = remainder.find('(') else {
                return Err(err(line, format!("{what}: expected '(' in point list")));
            };
            let Some(close) = remainder[open..].find(')') else {
                return Err(err(line, format!("{what}: unclosed '(' in point list")));
            };
            let inner = &remainder[open + 1..open + close];
            let coords: Result<Vec<f64>, _> = inner
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| {
                        err(
                            line,
                            format!("{what}: malformed coordinate '{}'", tok.trim()),
                        )
                    })
                })
                .collect();
            points.push(coords?);
            remainder = remainder[open + close + 1..].trim();
        }
        if points.is_empty() {
            return Err(err(
                line,
                format!("{what}: finite set needs at least one point"),
            ));
        }
        return Ok(SetSpec::Finite(points));
    }
    Err(err(
        line,
        format!("{what}: expected 'ball ...' or 'finite ...'"),
    ))
}

fn parse_policy(line: usize, text: &str, what: &str) -> Result<PolicySpec, ScenarioError> {
    match text.trim() {
        "random" => Ok(PolicySpec::Random),
        "adversarial" => Ok(PolicySpec::Adversarial),
        other => Err(err(line, format!("{what}: unknown policy '{other}'"))),
    }
}

/// Parse a scenario document from text.
pub fn parse_scenario(text: &str) -> Result<ScenarioDoc, ScenarioError> {
    let mut doc = ScenarioDoc::default();
    let mut section: Option<String> = None;
    let mut header_seen = false;
    // Explicit dynamics accumulates across keys.
    let mut drift: Option<Vec<String>> = None;
    let mut b: Option<Vec<Vec<f64>>> = None;
    let mut c: Option<Vec<Vec<f64>>> = None;
    let mut lambda_g: Option<f64> = None;
    let mut c_g: Option<f64> = None;
    let mut builtin: Option<String> = None;
    let mut dynamics_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            if line == SCENARIO_HEADER {
                header_seen = true;
                continue;
            }
            return Err(err(lineno, format!("expected header '{SCENARIO_HEADER}'")));
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            match name {
                "dynamics" | "order" | "horizon" | "sets" | "initial" | "partition"
                | "policies" | "output" => section = Some(name.to_string()),
                other => return Err(err(lineno, format!("unknown section '[{other}]'"))),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(lineno, "expected 'key = value' or '[section]'"));
        };
        let key = key.trim();
        let value = value.trim();
        let section_name = section
            .as_deref()
            .ok_or_else(|| err(lineno, "key outside any [section]"))?;
        let dup = |present: bool| -> Result<(), ScenarioError> {
            if present {
                Err(err(lineno, format!("duplicate key '{key}'")))
            } else {
                Ok(())
            }
        };
        match (section_name, key) {
            ("dynamics", "builtin") => {
                dup(builtin.is_some())?;
                builtin = Some(value.to_string());
                dynamics_line = lineno;
            }
            ("dynamics", "drift") => {
                dup(drift.is_some())?;
                let components: Vec<String> =
                    value.split(';').map(|s| s.trim().to_string()).collect();
                if components.iter().any(String::is_empty) {
                    return Err(err(lineno, "drift: empty component"));
                }
                drift = Some(components);
                dynamics_line = lineno;
            }
            ("dynamics", "b") => {
                dup(b.is_some())?;
                b = Some(parse_matrix(lineno, value, "b")?);
            }
            ("dynamics", "c") => {
                dup(c.is_some())?;
                c = Some(parse_matrix(lineno, value, "c")?);
            }
            ("dynamics", "lambda_g") => {
                dup(lambda_g.is_some())?;
                lambda_g = Some(parse_f64(lineno, value, "lambda_g")?);
            }
            ("dynamics", "c_g") => {
                dup(c_g.is_some())?;
                c_g = Some(parse_f64(lineno, value, "c_g")?);
            }
            ("order", "alpha") => {
                dup(doc.alpha.is_some())?;
                doc.alpha = Some(parse_f64(lineno, value, "alpha")?);
            }
            ("horizon", "t") => {
                dup(doc.horizon.is_some())?;
                doc.horizon = Some(parse_f64(lineno, value, "horizon t")?);
            }
            ("sets", "p") => {
                dup(doc.p.is_some())?;
                doc.p = Some(parse_set(lineno, value, "p")?);
            }
            ("sets", "q") => {
                dup(doc.q.is_some())?;
                doc.q = Some(parse_set(lineno, value, "q")?);
            }
            ("initial", "x0") => {
                dup(doc.x0.is_some())?;
                doc.x0 = Some(parse_vector(lineno, value, "x0")?);
            }
            ("initial", "y0") => {
                dup(doc.y0.is_some())?;
                doc.y0 = Some(parse_vector(lineno, value, "y0")?);
            }
            ("partition", "step") => {
                dup(doc.partition.is_some())?;
                doc.partition = Some(PartitionSpec::Step(parse_f64(lineno, value, "step")?));
            }
            ("partition", "nodes") => {
                dup(doc.partition.is_some())?;
                doc.partition = Some(PartitionSpec::Nodes(parse_vector(lineno, value, "nodes")?));
            }
            ("policies", "disturbance") => {
                dup(doc.disturbance.is_some())?;
                doc.disturbance = Some(parse_policy(lineno, value, "disturbance")?);
            }
            ("policies", "guide_u") => {
                dup(doc.guide_u.is_some())?;
                doc.guide_u = Some(parse_policy(lineno, value, "guide_u")?);
            }
            ("policies", "seed") => {
                dup(doc.seed.is_some())?;
                doc.seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| err(lineno, format!("seed: malformed integer '{value}'")))?,
                );
            }
            ("policies", "bound_eps") => {
                dup(doc.bound_eps.is_some())?;
                doc.bound_eps = Some(parse_f64(lineno, value, "bound_eps")?);
            }
            ("output", "csv") => {
                dup(doc.csv_path.is_some())?;
                doc.csv_path = Some(value.to_string());
            }
            ("output", "meta") => {
                dup(doc.meta_path.is_some())?;
                doc.meta_path = Some(value.to_string());
            }
            (section_name, key) => {
                return Err(err(
                    lineno,
                    format!("unknown key '{key}' in section '[{section_name}]'"),
                ))
            }
        }
    }
    if !header_seen {
        return Err(err(0, format!("missing header '{SCENARIO_HEADER}'")));
    }

    doc.dynamics = match (builtin, drift, b, c, lambda_g, c_g) {
        (Some(name), None, None, None, None, None) => Some(DynamicsSpec::Builtin(name)),
        (None, Some(drift), Some(b), Some(c), Some(lambda_g), Some(c_g)) => {
            Some(DynamicsSpec::Separable {
                drift,
                b,
                c,
                lambda_g,
                c_g,
            })
        }
        (None, None, None, None, None, None) => None,
        (Some(_), _, _, _, _, _) => {
            return Err(err(
                dynamics_line,
                "builtin dynamics cannot be mixed with an explicit drift/b/c block",
            ))
        }
        _ => {
            return Err(err(
                dynamics_line,
                "explicit dynamics need all of: drift, b, c, lambda_g, c_g",
            ))
        }
    };
    Ok(doc)
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_matrix(m: &[Vec<f64>]) -> String {
    m.iter().map(|r| fmt_vec(r)).collect::<Vec<_>>().join(" ; ")
}

fn fmt_set(s: &SetSpec) -> String {
    match s {
        SetSpec::Ball { radius, dim } => format!("ball {radius} {dim}"),
        SetSpec::Finite(points) => {
            let body = points
                .iter()
                .map(|p| {
                    format!(
                        "({})",
                        p.iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })
                .collect::<Vec<_>>()
                .join(" ");
            format!("finite {body}")
        }
    }
}

/// Serialize a document in the canonical form accepted by
/// [`parse_scenario`]; parsing the output reproduces the document.
pub fn serialize_scenario(doc: &ScenarioDoc) -> String {
    let mut out = String::new();
    out.push_str(SCENARIO_HEADER);
    out.push('\n');
    if let Some(dynamics) = &doc.dynamics {
        out.push_str("\n[dynamics]\n");
        match dynamics {
            DynamicsSpec::Builtin(name) => out.push_str(&format!("builtin = {name}\n")),
            DynamicsSpec::Separable {
                drift,
                b,
                c,
                lambda_g,
                c_g,
            } => {
                out.push_str(&format!("drift = {}\n", drift.join(" ; ")));
                out.push_str(&format!("b = {}\n", fmt_matrix(b)));
                out.push_str(&format!("c = {}\n", fmt_matrix(c)));
                out.push_str(&format!("lambda_g = {lambda_g}\n"));
                out.push_str(&format!("c_g = {c_g}\n"));
            }
        }
    }
    if let Some(alpha) = doc.alpha {
        out.push_str(&format!("\n[order]\nalpha = {alpha}\n"));
    }
    if let Some(t) = doc.horizon {
        out.push_str(&format!("\n[horizon]\nt = {t}\n"));
    }
    if doc.p.is_some() || doc.q.is_some() {
        out.push_str("\n[sets]\n");
        if let Some(p) = &doc.p {
            out.push_str(&format!("p = {}\n", fmt_set(p)));
        }
        if let Some(q) = &doc.q {
            out.push_str(&format!("q = {}\n", fmt_set(q)));
        }
    }
    if doc.x0.is_some() || doc.y0.is_some() {
        out.push_str("\n[initial]\n");
        if let Some(x0) = &doc.x0 {
            out.push_str(&format!("x0 = {}\n", fmt_vec(x0)));
        }
        if let Some(y0) = &doc.y0 {
            out.push_str(&format!("y0 = {}\n", fmt_vec(y0)));
        }
    }
    if let Some(partition) = &doc.partition {
        out.push_str("\n[partition]\n");
        match partition {
            PartitionSpec::Step(s) => out.push_str(&format!("step = {s}\n")),
            PartitionSpec::Nodes(nodes) => out.push_str(&format!("nodes = {}\n", fmt_vec(nodes))),
        }
    }
    let policy_name = |p: PolicySpec| match p {
        PolicySpec::Random => "random",
        PolicySpec::Adversarial => "adversarial",
    };
    if doc.disturbance.is_some()
        || doc.guide_u.is_some()
        || doc.seed.is_some()
        || doc.bound_eps.is_some()
    {
        out.push_str("\n[policies]\n");
        if let Some(p) = doc.disturbance {
            out.push_str(&format!("disturbance = {}\n", policy_name(p)));
        }
        if let Some(p) = doc.guide_u {
            out.push_str(&format!("guide_u = {}\n", policy_name(p)));
        }
        if let Some(seed) = doc.seed {
            out.push_str(&format!("seed = {seed}\n"));
        }
        if let Some(eps) = doc.bound_eps {
            out.push_str(&format!("bound_eps = {eps}\n"));
        }
    }
    if doc.csv_path.is_some() || doc.meta_path.is_some() {
        out.push_str("\n[output]\n");
        if let Some(p) = &doc.csv_path {
            out.push_str(&format!("csv = {p}\n"));
        }
        if let Some(p) = &doc.meta_path {
            out.push_str(&format!("meta = {p}\n"));
        }
    }
    out
}

fn build_set(spec: &SetSpec) -> Result<ActionSet, ScenarioError> {
    match spec {
        SetSpec::Ball { radius, dim } => ActionSet::ball(*radius, *dim),
        SetSpec::Finite(points) => ActionSet::finite(points.clone()),
    }
    .map_err(|e| err(0, e.to_string()))
}

fn build_dynamics(spec: &DynamicsSpec) -> Result<GameDynamics, ScenarioError> {
    match spec {
        DynamicsSpec::Builtin(name) => {
            if name == "paper" {
                Ok(paper_example().dynamics)
            } else {
                Err(err(
                    0,
                    format!("unknown builtin scenario '{name}' (available: paper)"),
                ))
            }
        }
        DynamicsSpec::Separable {
            drift,
            b,
            c,
            lambda_g,
            c_g,
        } => {
            let exprs: Vec<Expr> = drift
                .iter()
                .enumerate()
                .map(|(i, src)| {
                    parse_expr(src).map_err(|e| err(0, format!("drift component {}: {e}", i + 1)))
                })
                .collect::<Result<_, _>>()?;
            let n = exprs.len();
            for (i, e) in exprs.iter().enumerate() {
                if let Some(max_idx) = e.max_state_index() {
                    if max_idx >= n {
                        return Err(err(
                            0,
                            format!(
                                "drift component {} references x{} but the state has {} components",
                                i + 1,
                                max_idx + 1,
                                n
                            ),
                        ));
                    }
                }
            }
            let b = Matrix::from_rows(b).map_err(|e| err(0, e.to_string()))?;
            let c = Matrix::from_rows(c).map_err(|e| err(0, e.to_string()))?;
            if b.rows() != n || c.rows() != n {
                return Err(err(
                    0,
                    format!(
                        "b and c must have {} rows to match the drift, got {} and {}",
                        n,
                        b.rows(),
                        c.rows()
                    ),
                ));
            }
            GameDynamics::separable_affine(
                move |t: f64, x: &[f64]| exprs.iter().map(|e| e.eval(t, x)).collect(),
                b,
                c,
                *lambda_g,
                *c_g,
            )
            .map_err(|e| err(0, e.to_string()))
        }
    }
}

fn policy_from_spec(spec: PolicySpec) -> Policy {
    match spec {
        PolicySpec::Random => Policy::SeededRandom,
        PolicySpec::Adversarial => Policy::AdversarialExtremal,
    }
}

impl ScenarioDoc {
    /// Resolve the document into a runnable config. Builtin-based documents
    /// treat every present field as an override; explicit documents must
    /// carry order, horizon, sets, initial values and partition.
    pub fn to_config(&self) -> Result<AimingConfig, ScenarioError> {
        let dynamics_spec = self
            .dynamics
            .as_ref()
            .ok_or_else(|| err(0, "missing [dynamics] section"))?;
        let is_builtin = matches!(dynamics_spec, DynamicsSpec::Builtin(_));
        let mut config = if is_builtin {
            let mut base = paper_example();
            base.dynamics = build_dynamics(dynamics_spec)?;
            base
        } else {
            let require = |name: &str, present: bool| -> Result<(), ScenarioError> {
                if present {
                    Ok(())
                } else {
                    Err(err(0, format!("explicit dynamics require {name}")))
                }
            };
            require("[order] alpha", self.alpha.is_some())?;
            require("[horizon] t", self.horizon.is_some())?;
            require("[sets] p and q", self.p.is_some() && self.q.is_some())?;
            require(
                "[initial] x0 and y0",
                self.x0.is_some() && self.y0.is_some(),
            )?;
            require("[partition]", self.partition.is_some())?;
            let horizon = self.horizon.expect("checked above");
            AimingConfig {
                dynamics: build_dynamics(dynamics_spec)?,
                alpha: FracOrder::new(self.alpha.expect("checked above"))
                    .map_err(|e| err(0, e.to_string()))?,
                horizon,
                p: build_set(self.p.as_ref().expect("checked above"))?,
                q: build_set(self.q.as_ref().expect("checked above"))?,
                x0: self.x0.clone().expect("checked above"),
                y0: self.y0.clone().expect("checked above"),
                partition: TimeGrid::uniform(horizon, 1).map_err(|e| err(0, e.to_string()))?,
                disturbance_policy: Policy::SeededRandom,
                guide_u_policy: Policy::SeededRandom,
                system_u_policy: AimPolicy::Extremal,
                guide_v_policy: AimPolicy::Extremal,
                seed: 42,
                bound_eps: 0.1,
            }
        };

        if let Some(alpha) = self.alpha {
            config.alpha = FracOrder::new(alpha).map_err(|e| err(0, e.to_string()))?;
        }
        if let Some(horizon) = self.horizon {
            if is_builtin && self.partition.is_none() && horizon != config.horizon {
                return Err(err(
                    0,
                    "overriding the builtin horizon requires a [partition] section",
                ));
            }
            config.horizon = horizon;
        }
        if let Some(p) = &self.p {
            config.p = build_set(p)?;
        }
        if let Some(q) = &self.q {
            config.q = build_set(q)?;
        }
        if let Some(x0) = &self.x0 {
            config.x0 = x0.clone();
        }
        if let Some(y0) = &self.y0 {
            config.y0 = y0.clone();
        }
        if let Some(partition) = &self.partition {
            config.partition = match partition {
                PartitionSpec::Step(step) => TimeGrid::uniform_with_step(config.horizon, *step)
                    .map_err(|e| err(0, e.to_string()))?,
                PartitionSpec::Nodes(nodes) => {
                    let grid =
                        TimeGrid::from_nodes(nodes.clone()).map_err(|e| err(0, e.to_string()))?;
                    if grid.horizon() != config.horizon {
                        return Err(err(
                            0,
                            format!(
                                "partition ends at {} but the horizon is {}",
                                grid.horizon(),
                                config.horizon
                            ),
                        ));
                    }
                    grid
                }
            };
        }
        if let Some(p) = self.disturbance {
            config.disturbance_policy = policy_from_spec(p);
        }
        if let Some(p) = self.guide_u {
            config.guide_u_policy = policy_from_spec(p);
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(eps) = self.bound_eps {
            config.bound_eps = eps;
        }
        Ok(config)
    }

    /// The bundled scenario as a document (used by `--builtin paper`).
    pub fn builtin_paper() -> Self {
        Self {
            dynamics: Some(DynamicsSpec::Builtin("paper".into())),
            ..Self::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_doc() -> ScenarioDoc {
        ScenarioDoc {
            dynamics: Some(DynamicsSpec::Separable {
                drift: vec!["x2".into(), "-sin(x1) + cos(t)".into()],
                b: vec![vec![0.3, 0.0], vec![0.0, 0.5]],
                c: vec![vec![0.4, 0.0], vec![0.0, 0.2]],
                lambda_g: 1.0,
                c_g: 2.9,
            }),
            alpha: Some(0.5),
            horizon: Some(5.0),
            p: Some(SetSpec::Ball {
                radius: 1.0,
                dim: 2,
            }),
            q: Some(SetSpec::Finite(vec![vec![1.0, 0.0], vec![-1.0, 0.5]])),
            x0: Some(vec![-1.0, 0.0]),
            y0: Some(vec![0.0, 1.0]),
            partition: Some(PartitionSpec::Step(0.05)),
            disturbance: Some(PolicySpec::Random),
            guide_u: Some(PolicySpec::Adversarial),
            seed: Some(7),
            bound_eps: Some(0.25),
            csv_path: Some("out.csv".into()),
            meta_path: Some("out.meta".into()),
        }
    }

    #[test]
    fn round_trip_explicit_document() {
        let doc = explicit_doc();
        let text = serialize_scenario(&doc);
        let reparsed = parse_scenario(&text).unwrap();
        assert_eq!(doc, reparsed);
    }

    #[test]
    fn round_trip_builtin_with_overrides() {
        let doc = ScenarioDoc {
            dynamics: Some(DynamicsSpec::Builtin("paper".into())),
            seed: Some(11),
            partition: Some(PartitionSpec::Step(0.01)),
            ..ScenarioDoc::default()
        };
        let text = serialize_scenario(&doc);
        assert_eq!(parse_scenario(&text).unwrap(), doc);
        let config = doc.to_config().unwrap();
        assert_eq!(config.seed, 11);
        assert_eq!(config.partition.len(), 501);
        assert_eq!(config.horizon, 5.0);
    }

    #[test]
    fn explicit_document_builds_matching_config() {
        let config = explicit_doc().to_config().unwrap();
        assert_eq!(config.alpha.value(), 0.5);
        assert_eq!(config.horizon, 5.0);
        assert_eq!(config.partition.len(), 101);
        assert_eq!(config.x0, vec![-1.0, 0.0]);
        assert_eq!(config.seed, 7);
        // Drift compiled from expressions: g(0, (pi/2, 3), 0, 0) = (3, -1 + 1).
        let g = config.dynamics.eval(
            std::f64::consts::FRAC_PI_2 * 0.0,
            &[std::f64::consts::FRAC_PI_2, 3.0],
            &[0.0, 0.0],
            &[0.0, 0.0],
        );
        assert!((g[0] - 3.0).abs() < 1e-15);
        assert!((g[1] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn header_is_mandatory_and_line_anchored() {
        let e = parse_scenario("[dynamics]\nbuiltin = paper\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_scenario("").unwrap_err();
        assert_eq!(e.line, 0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "fracguide-scenario v1\n[order]\nalpha = not-a-number\n";
        let e = parse_scenario(text).unwrap_err();
        assert_eq!(e.line, 3);

        let text = "fracguide-scenario v1\n[order]\nalpha = 0.5\nalpha = 0.6\n";
        let e = parse_scenario(text).unwrap_err();
        assert_eq!(e.line, 4);

        let text = "fracguide-scenario v1\n[nope]\n";
        let e = parse_scenario(text).unwrap_err();
        assert_eq!(e.line, 2);

        let text = "fracguide-scenario v1\nalpha = 0.5\n";
        let e = parse_scenario(text).unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn incomplete_explicit_dynamics_is_rejected() {
        let text = "fracguide-scenario v1\n[dynamics]\ndrift = x1\n";
        assert!(parse_scenario(text).is_err());
        let text = "fracguide-scenario v1\n[dynamics]\nbuiltin = paper\ndrift = x1\nb = 1\nc = 1\nlambda_g = 1\nc_g = 1\n";
        assert!(parse_scenario(text).is_err());
    }

    #[test]
    fn semantic_errors_from_to_config() {
        // Unknown builtin.
        let doc = ScenarioDoc {
            dynamics: Some(DynamicsSpec::Builtin("unknown".into())),
            ..ScenarioDoc::default()
        };
        assert!(doc.to_config().is_err());

        // State symbol out of range.
        let mut doc = explicit_doc();
        if let Some(DynamicsSpec::Separable { drift, .. }) = doc.dynamics.as_mut() {
            drift[0] = "x3".into();
        }
        let e = doc.to_config().unwrap_err();
        assert!(
            e.message.contains("x3"),
            "unexpected message: {}",
            e.message
        );

        // Horizon override without partition.
        let doc = ScenarioDoc {
            dynamics: Some(DynamicsSpec::Builtin("paper".into())),
            horizon: Some(3.0),
            ..ScenarioDoc::default()
        };
        assert!(doc.to_config().is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text =
            "\n# leading comment\nfracguide-scenario v1\n\n[policies]\nseed = 5 # trailing\n";
        let doc = parse_scenario(text).unwrap();
        assert_eq!(doc.seed, Some(5));
    }
}
