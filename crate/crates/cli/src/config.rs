//! Scenario files: flat `key = value` pairs under `[section]` headers.
//!
//! ```text
//! [scenario]
//! kind = cl-free
//!
//! [environment]
//! gamma = [0.1, 0.5]
//! kT = [1, 2, 5, 10]
//! ```
//!
//! Every key is optional except `kind`; missing keys take the reference
//! values (`ħ = m = 1`, `σ_p = 0.05`, `p₀a = 1.4`, `p₀b = 0.3`, `α = 1.9`,
//! `θ = π`, window `[0, 50]` with step `0.01`). Angles accept `pi`, `k*pi`,
//! `pi/j` and `k*pi/j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use backflow_core::eigen::Rule;
use backflow_core::{GaussianSuperposition, PhysicalConstants};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", self.render())]
pub struct ConfigError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column, message: message.into() }
    }

    fn render(&self) -> String {
        if self.line == 0 {
            self.message.clone()
        } else {
            format!("line {}, column {}: {}", self.line, self.column, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CkFree,
    CkForce,
    ClFree,
    ClForce,
    EigenFree,
    EigenForce,
}

impl Kind {
    pub const ALL: [Kind; 6] = [Kind::CkFree, Kind::CkForce, Kind::ClFree, Kind::ClForce, Kind::EigenFree, Kind::EigenForce];

    pub fn name(self) -> &'static str {
        match self {
            Kind::CkFree => "ck-free",
            Kind::CkForce => "ck-force",
            Kind::ClFree => "cl-free",
            Kind::ClForce => "cl-force",
            Kind::EigenFree => "eigen-free",
            Kind::EigenForce => "eigen-force",
        }
    }

    pub fn is_eigen(self) -> bool {
        matches!(self, Kind::EigenFree | Kind::EigenForce)
    }

    pub fn is_cl(self) -> bool {
        matches!(self, Kind::ClFree | Kind::ClForce)
    }

    pub fn is_forced(self) -> bool {
        matches!(self, Kind::CkForce | Kind::ClForce | Kind::EigenForce)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_lo: f64,
    pub t_hi: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EigenMode {
    /// Cutoff refinement until the extrapolated value settles.
    Refine { tolerance: f64, start_n: usize, max_n: usize },
    /// One discretization.
    Fixed { n: usize, u_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenConfig {
    pub mode: EigenMode,
    #[serde(serialize_with = "serialize_rule")]
    pub rule: Rule,
    pub xi: Vec<f64>,
}

fn serialize_rule<S: serde::Serializer>(rule: &Rule, s: S) -> Result<S::Ok, S::Error> {
    match rule {
        Rule::Global => s.serialize_str("global"),
        Rule::Panels { order } => s.serialize_str(&format!("panels:{order}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateEcho {
    pub sigma_p: f64,
    pub p0a: f64,
    pub p0b: f64,
    pub alpha: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsEcho {
    pub m: f64,
    pub hbar: f64,
    pub epsilon: f64,
}

/// A validated scenario. Sweep lists hold at least one value; lists that
/// do not apply to the kind hold a single `0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub constants: ConstantsEcho,
    pub state: StateEcho,
    pub gamma: Vec<f64>,
    #[serde(rename = "kT")]
    pub kt: Vec<f64>,
    pub g: Vec<f64>,
    pub time: TimeGrid,
    pub allow_negative_time: bool,
    pub eigen: Option<EigenConfig>,
}

impl ScenarioConfig {
    pub fn physical_constants(&self) -> PhysicalConstants {
        let c = self.constants;
        PhysicalConstants::new(c.m, c.hbar, c.epsilon).expect("validated at parse time")
    }

    pub fn superposition(&self) -> GaussianSuperposition {
        let s = self.state;
        GaussianSuperposition::from_parts(s.sigma_p, s.p0a, s.p0b, s.alpha, s.theta).expect("validated at parse time")
    }

    /// Configuration for an eigenvalue run with default refinement.
    pub fn eigen(kind: Kind, xi: Vec<f64>, mode: EigenMode) -> Self {
        assert!(kind.is_eigen());
        Self {
            kind,
            constants: ConstantsEcho { m: 1.0, hbar: 1.0, epsilon: 1.0 },
            state: default_state(),
            gamma: vec![0.0],
            kt: vec![0.0],
            g: vec![0.0],
            time: default_time(),
            allow_negative_time: false,
            eigen: Some(EigenConfig { mode, rule: Rule::Global, xi }),
        }
    }
}

fn default_state() -> StateEcho {
    StateEcho { sigma_p: 0.05, p0a: 1.4, p0b: 0.3, alpha: 1.9, theta: PI }
}

fn default_time() -> TimeGrid {
    TimeGrid { t_lo: 0.0, t_hi: 50.0, step: 1e-2 }
}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("scenario", &["kind", "m", "hbar", "epsilon", "allow_negative_time"]),
    ("state", &["sigma_p", "p0a", "p0b", "alpha", "theta"]),
    ("environment", &["gamma", "kT", "g"]),
    ("time", &["t_lo", "t_hi", "step"]),
    ("quadrature", &["tolerance", "start_n", "max_n", "n", "u_max", "rule", "panel_order", "xi"]),
];

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value_column: usize,
    raw: String,
}

impl Entry {
    fn err(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::at(self.line, self.value_column, message)
    }
}

type Table = BTreeMap<(String, String), Entry>;

fn tokenize(text: &str) -> Result<Table, ConfigError> {
    let mut table = Table::new();
    let mut section: Option<String> = None;
    for (idx, full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = match full.find(['#', ';']) {
            Some(p) => &full[..p],
            None => full,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len() + 1;
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return Err(ConfigError::at(line_no, indent, "section header is missing `]`"));
            };
            let name = name.trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                let known: Vec<&str> = SECTIONS.iter().map(|(s, _)| *s).collect();
                return Err(ConfigError::at(
                    line_no,
                    indent + 1,
                    format!("unknown section `[{name}]` (expected one of {})", known.join(", ")),
                ));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(ConfigError::at(line_no, indent, "expected `key = value` or `[section]`"));
        };
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim();
        let Some(sec) = &section else {
            return Err(ConfigError::at(line_no, indent, format!("key `{key}` appears before any [section] header")));
        };
        let allowed = SECTIONS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::at(
                line_no,
                indent,
                format!("unknown key `{key}` in [{sec}] (expected one of {})", allowed.join(", ")),
            ));
        }
        if value.is_empty() {
            return Err(ConfigError::at(line_no, eq + 2, format!("key `{key}` has no value")));
        }
        let value_column = eq + 2 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
        let entry = Entry { line: line_no, value_column, raw: value.to_string() };
        if let Some(prev) = table.insert((sec.clone(), key.to_string()), entry) {
            return Err(ConfigError::at(line_no, indent, format!("key `{key}` already set on line {}", prev.line)));
        }
    }
    Ok(table)
}

/// A real number, `pi`, or a product/quotient of a number and `pi`.
fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim().parse::<f64>().ok().filter(|d| *d != 0.0)?)),
        None => (body, None),
    };
    let factor = if num == "pi" {
        1.0
    } else {
        let k = num.strip_suffix("pi")?.trim().strip_suffix('*')?.trim();
        k.parse::<f64>().ok()?
    };
    let mut v = factor * PI / den.unwrap_or(1.0);
    if neg {
        v = -v;
    }
    v.is_finite().then_some(v)
}

struct Reader {
    table: Table,
}

impl Reader {
    fn entry(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.table.get(&(sec.to_string(), key.to_string()))
    }

    fn has(&self, sec: &str, key: &str) -> bool {
        self.entry(sec, key).is_some()
    }

    fn number(&self, sec: &str, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.entry(sec, key) {
            None => Ok(default),
            Some(e) => parse_number(&e.raw).ok_or_else(|| e.err(format!("`{key}`: expected a number, got `{}`", e.raw))),
        }
    }

    fn integer(&self, sec: &str, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.entry(sec, key) {
            None => Ok(default),
            Some(e) => e.raw.parse::<usize>().map_err(|_| e.err(format!("`{key}`: expected a non-negative integer, got `{}`", e.raw))),
        }
    }

    fn list(&self, sec: &str, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let Some(e) = self.entry(sec, key) else {
            return Ok(default.to_vec());
        };
        let body = match (e.raw.strip_prefix('['), e.raw.ends_with(']')) {
            (Some(rest), true) => &rest[..rest.len() - 1],
            (None, false) => e.raw.as_str(),
            _ => return Err(e.err(format!("`{key}`: unbalanced brackets in `{}`", e.raw))),
        };
        let mut out = Vec::new();
        for item in body.split(',') {
            let item = item.trim();
            let v = parse_number(item).ok_or_else(|| e.err(format!("`{key}`: `{item}` is not a number")))?;
            out.push(v);
        }
        if out.is_empty() {
            return Err(e.err(format!("`{key}`: the list is empty")));
        }
        Ok(out)
    }

    fn boolean(&self, sec: &str, key: &str) -> Result<bool, ConfigError> {
        match self.entry(sec, key).map(|e| (e, e.raw.as_str())) {
            None => Ok(false),
            Some((_, "true")) => Ok(true),
            Some((_, "false")) => Ok(false),
            Some((e, other)) => Err(e.err(format!("`{key}`: expected true or false, got `{other}`"))),
        }
    }

    /// Error tied to the first of `keys` present in `sec`.
    fn fail(&self, sec: &str, keys: &[&str], message: String) -> ConfigError {
        keys.iter()
            .find_map(|k| self.entry(sec, k))
            .map(|e| ConfigError::at(e.line, e.value_column, message.clone()))
            .unwrap_or_else(|| ConfigError::at(0, 0, message))
    }
}

fn check_range(r: &Reader, sec: &str, key: &str, v: f64, ok: bool, what: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(r.fail(sec, &[key], format!("`{key}` = {v}: {what}")))
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let r = Reader { table: tokenize(text)? };

    let kind = match r.entry("scenario", "kind") {
        None => return Err(ConfigError::at(0, 0, "missing required key `kind` in [scenario]")),
        Some(e) => Kind::ALL.into_iter().find(|k| k.name() == e.raw).ok_or_else(|| {
            let names: Vec<&str> = Kind::ALL.iter().map(|k| k.name()).collect();
            e.err(format!("`kind`: unknown kind `{}` (expected one of {})", e.raw, names.join(", ")))
        })?,
    };

    let constants = ConstantsEcho {
        m: r.number("scenario", "m", 1.0)?,
        hbar: r.number("scenario", "hbar", 1.0)?,
        epsilon: r.number("scenario", "epsilon", 1.0)?,
    };
    check_range(&r, "scenario", "m", constants.m, constants.m > 0.0, "must be > 0")?;
    check_range(&r, "scenario", "hbar", constants.hbar, constants.hbar > 0.0, "must be > 0")?;
    check_range(&r, "scenario", "epsilon", constants.epsilon, (0.0..=1.0).contains(&constants.epsilon), "must lie in [0, 1]")?;
    let allow_negative_time = r.boolean("scenario", "allow_negative_time")?;

    if kind.is_eigen() {
        for sec in ["state", "time", "environment"] {
            if let Some(((_, key), e)) = r.table.iter().find(|((s, _), _)| s == sec) {
                return Err(e.err(format!("[{sec}] `{key}` is not used by kind {kind}")));
            }
        }
        for key in ["m", "hbar", "epsilon"] {
            if r.has("scenario", key) {
                return Err(r.fail("scenario", &[key], format!("`{key}` is not used by kind {kind}: the kernel is parameter free")));
            }
        }
    } else if let Some(((_, key), e)) = r.table.iter().find(|((s, _), _)| s == "quadrature") {
        return Err(e.err(format!("[quadrature] `{key}` is only used by eigen kinds")));
    }

    let def = default_state();
    let state = StateEcho {
        sigma_p: r.number("state", "sigma_p", def.sigma_p)?,
        p0a: r.number("state", "p0a", def.p0a)?,
        p0b: r.number("state", "p0b", def.p0b)?,
        alpha: r.number("state", "alpha", def.alpha)?,
        theta: r.number("state", "theta", def.theta)?,
    };
    check_range(&r, "state", "sigma_p", state.sigma_p, state.sigma_p > 0.0, "must be > 0")?;
    check_range(&r, "state", "alpha", state.alpha, state.alpha >= 0.0, "must be >= 0")?;
    if !kind.is_eigen() {
        if let Err(e) = GaussianSuperposition::from_parts(state.sigma_p, state.p0a, state.p0b, state.alpha, state.theta) {
            return Err(r.fail("state", &["alpha", "theta", "p0a", "p0b"], format!("invalid state: {e}")));
        }
    }

    let (gamma_default, kt_default, g_default): (&[f64], &[f64], &[f64]) = match kind {
        Kind::CkFree => (&[0.0, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4], &[0.0], &[0.0]),
        Kind::CkForce => (&[0.0, 0.1], &[0.0], &[0.0, 0.1, 0.2, 0.3]),
        Kind::ClFree => (&[0.1, 0.5], &[1.0, 2.0, 5.0, 10.0], &[0.0]),
        Kind::ClForce => (&[0.1], &[1.0, 10.0], &[0.0, 0.01, 0.02, 0.03]),
        Kind::EigenFree | Kind::EigenForce => (&[0.0], &[0.0], &[0.0]),
    };
    if !kind.is_cl() && r.has("environment", "kT") {
        return Err(r.fail("environment", &["kT"], format!("`kT` is not used by kind {kind}")));
    }
    if !kind.is_forced() && r.has("environment", "g") {
        return Err(r.fail("environment", &["g"], format!("`g` is not used by kind {kind}; use the -force variant")));
    }
    let gamma = r.list("environment", "gamma", gamma_default)?;
    let kt = r.list("environment", "kT", kt_default)?;
    let g = r.list("environment", "g", g_default)?;
    for v in &gamma {
        check_range(&r, "environment", "gamma", *v, *v >= 0.0, "must be >= 0")?;
    }
    for v in &kt {
        check_range(&r, "environment", "kT", *v, *v >= 0.0, "must be >= 0")?;
    }

    let dt = default_time();
    let time = TimeGrid {
        t_lo: r.number("time", "t_lo", dt.t_lo)?,
        t_hi: r.number("time", "t_hi", dt.t_hi)?,
        step: r.number("time", "step", dt.step)?,
    };
    check_range(&r, "time", "step", time.step, time.step > 0.0, "must be > 0")?;
    if time.t_hi <= time.t_lo {
        return Err(r.fail("time", &["t_hi", "t_lo"], format!("`t_hi` = {} must exceed `t_lo` = {}", time.t_hi, time.t_lo)));
    }
    if (time.t_hi - time.t_lo) / time.step > 1e7 {
        return Err(r.fail("time", &["step"], format!("`step` = {} gives more than 1e7 samples", time.step)));
    }
    if allow_negative_time && kind != Kind::CkFree {
        return Err(r.fail(
            "scenario",
            &["allow_negative_time"],
            format!("`allow_negative_time` is only supported for kind ck-free, not {kind}"),
        ));
    }
    if time.t_lo < 0.0 && !allow_negative_time {
        return Err(r.fail("time", &["t_lo"], format!("`t_lo` = {} is negative; set allow_negative_time = true (ck-free only)", time.t_lo)));
    }

    let eigen = if kind.is_eigen() { Some(parse_eigen(&r, kind)?) } else { None };

    Ok(ScenarioConfig { kind, constants, state, gamma, kt, g, time, allow_negative_time, eigen })
}

fn parse_eigen(r: &Reader, kind: Kind) -> Result<EigenConfig, ConfigError> {
    let q = "quadrature";
    let fixed = r.has(q, "n") || r.has(q, "u_max");
    let refine_keys = ["tolerance", "start_n", "max_n"];
    if fixed {
        if let Some(k) = refine_keys.iter().find(|k| r.has(q, k)) {
            return Err(r.fail(q, &[k], format!("`{k}` conflicts with a fixed discretization (`n`/`u_max`)")));
        }
    }
    let mode = if fixed {
        let n = r.integer(q, "n", 400)?;
        let u_max = r.number(q, "u_max", (n as f64).sqrt())?;
        check_range(r, q, "n", n as f64, n >= 8, "need at least 8 nodes")?;
        check_range(r, q, "u_max", u_max, u_max > 0.0, "must be > 0")?;
        EigenMode::Fixed { n, u_max }
    } else {
        let tolerance = r.number(q, "tolerance", 1e-4)?;
        let start_n = r.integer(q, "start_n", 64)?;
        let max_n = r.integer(q, "max_n", 4096)?;
        check_range(r, q, "tolerance", tolerance, tolerance > 0.0, "must be > 0")?;
        check_range(r, q, "start_n", start_n as f64, start_n >= 8, "need at least 8 nodes")?;
        check_range(r, q, "max_n", max_n as f64, max_n >= start_n, "must be >= start_n")?;
        EigenMode::Refine { tolerance, start_n, max_n }
    };
    let rule = match r.entry(q, "rule").map(|e| (e, e.raw.as_str())) {
        None | Some((_, "global")) => {
            if r.has(q, "panel_order") {
                return Err(r.fail(q, &["panel_order"], "`panel_order` needs rule = panels".to_string()));
            }
            Rule::Global
        }
        Some((_, "panels")) => {
            let order = r.integer(q, "panel_order", 16)?;
            check_range(r, q, "panel_order", order as f64, order >= 1, "must be >= 1")?;
            Rule::Panels { order }
        }
        Some((e, other)) => return Err(e.err(format!("`rule`: expected global or panels, got `{other}`"))),
    };
    if let (Rule::Panels { order }, EigenMode::Fixed { n, .. }) = (rule, mode) {
        if n % order != 0 {
            return Err(r.fail(q, &["panel_order", "n"], format!("`panel_order` = {order} must divide `n` = {n}")));
        }
    }
    if let (Rule::Panels { order }, EigenMode::Refine { start_n, .. }) = (rule, mode) {
        if start_n % order != 0 {
            return Err(r.fail(q, &["panel_order", "start_n"], format!("`panel_order` = {order} must divide `start_n` = {start_n}")));
        }
    }
    let xi = match kind {
        Kind::EigenFree => {
            if r.has(q, "xi") {
                return Err(r.fail(q, &["xi"], "`xi` is not used by kind eigen-free".to_string()));
            }
            vec![0.0]
        }
        _ => r.list(q, "xi", &[-1.0, -0.5, 0.0, 0.5, 1.0])?,
    };
    Ok(EigenConfig { mode, rule, xi })
}
