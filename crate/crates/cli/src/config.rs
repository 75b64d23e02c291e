//! Flat TOML experiment configs.
//!
//! Every key is top level. Grids are a number, a list of numbers, or a
//! `"start:stop:step"` string with an inclusive stop. Validation collects
//! every violation together with the line it occurs on.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::ops::Range;

use qscissor::sensitivity::{LossLayout, LossLocation, DEFAULT_BOOTSTRAP, DEFAULT_LOSS_RANGE};
use qscissor::HeraldPattern;
use serde::Serialize;
use toml::{Spanned, Value};

pub const SCHEMA_VERSION: i64 = 1;
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Scissor,
    GainSweep,
    Fringes,
    Negativity,
    Hom,
    Sobol,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Scissor,
        Experiment::GainSweep,
        Experiment::Fringes,
        Experiment::Negativity,
        Experiment::Hom,
        Experiment::Sobol,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Scissor => "scissor",
            Experiment::GainSweep => "gain-sweep",
            Experiment::Fringes => "fringes",
            Experiment::Negativity => "negativity",
            Experiment::Hom => "hom",
            Experiment::Sobol => "sobol",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self, Experiment::Sobol)
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::Scissor => &["g", "input", "input_imag", "patterns", "cutoff"],
            Experiment::GainSweep => &["tau", "g"],
            Experiment::Fringes => &["sigma", "g", "patterns", "phi"],
            Experiment::Negativity => &["sigma", "g"],
            Experiment::Hom => &["theta"],
            Experiment::Sobol => &["g", "tau", "n_base", "seed", "loss_min", "loss_max", "bootstrap", "layout"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn valid_names() -> String {
    Experiment::ALL.iter().map(|e| e.name()).collect::<Vec<_>>().join(", ")
}

const COMMON_KEYS: [&str; 3] = ["schema_version", "experiment", "output"];

/// One violated constraint. `line` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub source_name: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.source_name.is_empty() {
            f.write_str("invalid arguments")?;
            for d in &self.diagnostics {
                write!(f, "\n  {d}")?;
            }
            return Ok(());
        }
        write!(f, "invalid config {}", self.source_name)?;
        for d in &self.diagnostics {
            match d.line {
                Some(l) => write!(f, "\n  {}:{l}: {}", self.source_name, d.message)?,
                None => write!(f, "\n  {}: {}", self.source_name, d.message)?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScissorParams {
    pub g: Vec<f64>,
    pub input: Vec<f64>,
    pub input_imag: Vec<f64>,
    pub patterns: Vec<String>,
    pub cutoff: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GainSweepParams {
    pub tau: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FringeParams {
    pub sigma: f64,
    pub g: f64,
    pub patterns: Vec<String>,
    pub phi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegativityParams {
    pub sigma: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomParams {
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SobolParams {
    pub g: Vec<f64>,
    pub tau: f64,
    pub n_base: usize,
    pub seed: Option<u64>,
    pub loss_min: f64,
    pub loss_max: f64,
    pub bootstrap: usize,
    pub layout: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    Scissor(ScissorParams),
    GainSweep(GainSweepParams),
    Fringes(FringeParams),
    Negativity(NegativityParams),
    Hom(HomParams),
    Sobol(SobolParams),
}

/// A fully resolved config with every default filled in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: i64,
    pub experiment: Experiment,
    pub output: String,
    pub params: Params,
}

fn line_of(text: &str, span: &Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()
}

fn range_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

struct Reader<'a> {
    text: &'a str,
    table: BTreeMap<String, Spanned<Value>>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Reader<'a> {
    fn error(&mut self, key: &str, message: impl Into<String>) {
        let line = self.table.get(key).map(|v| line_of(self.text, &v.span()));
        self.diagnostics.push(Diagnostic {
            line,
            message: message.into(),
        });
    }

    fn value(&self, key: &str) -> Option<&Value> {
        self.table.get(key).map(|v| v.get_ref())
    }

    fn number(&mut self, key: &str, default: Option<f64>) -> Option<f64> {
        match self.value(key) {
            None => {
                if default.is_none() {
                    self.error(key, format!("missing required key `{key}`"));
                }
                default
            }
            Some(Value::Float(x)) if x.is_finite() => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(other) => {
                let shown = other.to_string();
                self.error(key, format!("`{key}` must be a finite number, got {shown}"));
                None
            }
        }
    }

    fn integer(&mut self, key: &str, default: Option<i64>) -> Option<i64> {
        match self.value(key) {
            None => {
                if default.is_none() {
                    self.error(key, format!("missing required key `{key}`"));
                }
                default
            }
            Some(Value::Integer(i)) => Some(*i),
            Some(other) => {
                let shown = other.to_string();
                self.error(key, format!("`{key}` must be an integer, got {shown}"));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.value(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                let shown = other.to_string();
                self.error(key, format!("`{key}` must be a string, got {shown}"));
                None
            }
        }
    }

    fn strings(&mut self, key: &str, default: Vec<String>) -> Option<Vec<String>> {
        match self.value(key) {
            None => Some(default),
            Some(Value::Array(items)) if items.iter().all(Value::is_str) => {
                Some(items.iter().map(|v| v.as_str().unwrap().to_string()).collect())
            }
            Some(_) => {
                self.error(key, format!("`{key}` must be a list of strings"));
                None
            }
        }
    }

    fn numbers(&mut self, key: &str) -> Option<Vec<f64>> {
        match self.value(key)? {
            Value::Array(items) => {
                let parsed: Option<Vec<f64>> = items
                    .iter()
                    .map(|v| match v {
                        Value::Float(x) if x.is_finite() => Some(*x),
                        Value::Integer(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect();
                if parsed.is_none() {
                    self.error(key, format!("`{key}` must be a list of finite numbers"));
                }
                parsed
            }
            _ => {
                self.error(key, format!("`{key}` must be a list of numbers"));
                None
            }
        }
    }

    /// A number, a list, or `"start:stop:step"`.
    fn grid(&mut self, key: &str, default: Vec<f64>) -> Option<Vec<f64>> {
        let grid = match self.value(key) {
            None => return Some(default),
            Some(Value::Float(_)) | Some(Value::Integer(_)) => vec![self.number(key, None)?],
            Some(Value::Array(_)) => self.numbers(key)?,
            Some(Value::String(s)) => {
                let s = s.clone();
                let parts: Vec<Option<f64>> = s.split(':').map(|p| p.trim().parse::<f64>().ok()).collect();
                match parts.as_slice() {
                    [Some(a), Some(b), Some(c)] if a.is_finite() && b.is_finite() && c.is_finite() => {
                        let (a, b, c) = (*a, *b, *c);
                        if !(c > 0.0) || b < a {
                            self.error(key, format!("`{key}` range {s:?} needs step > 0 and stop >= start"));
                            return None;
                        }
                        if (b - a) / c > MAX_GRID_POINTS as f64 {
                            self.error(key, format!("`{key}` range {s:?} has more than {MAX_GRID_POINTS} points"));
                            return None;
                        }
                        range_grid(a, b, c)
                    }
                    _ => {
                        self.error(key, format!("`{key}` = {s:?} is not of the form \"start:stop:step\""));
                        return None;
                    }
                }
            }
            Some(other) => {
                let shown = other.to_string();
                self.error(key, format!("`{key}` must be a number, a list or \"start:stop:step\", got {shown}"));
                return None;
            }
        };
        if grid.is_empty() {
            self.error(key, format!("`{key}` is empty"));
            return None;
        }
        Some(grid)
    }

    fn check_each(&mut self, key: &str, values: &[f64], ok: impl Fn(f64) -> bool, range: &str) -> bool {
        if let Some(bad) = values.iter().find(|&&v| !ok(v)) {
            self.error(key, format!("`{key}` = {bad} is outside {range}"));
            false
        } else {
            true
        }
    }

    fn increasing(&mut self, key: &str, values: &[f64]) -> bool {
        if values.windows(2).any(|w| w[1] <= w[0]) {
            self.error(key, format!("`{key}` must be strictly increasing"));
            false
        } else {
            true
        }
    }
}

fn default_patterns() -> Vec<String> {
    HeraldPattern::success_patterns().iter().map(|p| p.compact()).collect()
}

fn check_patterns(r: &mut Reader, key: &str, patterns: &[String]) -> bool {
    let mut ok = !patterns.is_empty();
    if !ok {
        r.error(key, format!("`{key}` is empty"));
    }
    for p in patterns {
        match p.parse::<HeraldPattern>() {
            Ok(h) if h.is_success() && h.total() == 2 => {}
            _ => {
                r.error(key, format!("`{key}` entry {p:?} is not one of 110, 101, 011"));
                ok = false;
            }
        }
    }
    ok
}

/// Parses and validates `text`. `requested` is the experiment named on the
/// command line; it must agree with an `experiment` key when both are given.
pub fn parse_config(text: &str, source_name: &str, requested: Option<Experiment>) -> Result<ExperimentConfig, ConfigError> {
    let fail = |diagnostics| ConfigError {
        source_name: source_name.to_string(),
        diagnostics,
    };
    let table: BTreeMap<String, Spanned<Value>> = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, &s));
        fail(vec![Diagnostic {
            line,
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut r = Reader {
        text,
        table,
        diagnostics: Vec::new(),
    };

    match r.integer("schema_version", None) {
        Some(SCHEMA_VERSION) | None => {}
        Some(v) => r.error("schema_version", format!("unsupported schema_version {v}; this build reads {SCHEMA_VERSION}")),
    }

    let named = match r.string("experiment") {
        Some(name) => match Experiment::from_name(&name) {
            Some(e) => Some(e),
            None => {
                r.error("experiment", format!("unknown experiment {name:?}; valid names: {}", valid_names()));
                return Err(fail(r.diagnostics));
            }
        },
        None => None,
    };
    let experiment = match (requested, named) {
        (Some(a), Some(b)) if a != b => {
            r.error("experiment", format!("config is for experiment {b} but {a} was requested"));
            return Err(fail(r.diagnostics));
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            r.diagnostics.push(Diagnostic {
                line: None,
                message: format!("no experiment given; set `experiment` to one of: {}", valid_names()),
            });
            return Err(fail(r.diagnostics));
        }
    };

    let unknown: Vec<String> = r
        .table
        .keys()
        .filter(|k| !COMMON_KEYS.contains(&k.as_str()) && !experiment.keys().contains(&k.as_str()))
        .cloned()
        .collect();
    for key in unknown {
        let valid: Vec<&str> = COMMON_KEYS.iter().chain(experiment.keys()).copied().collect();
        let message = match r.value(&key) {
            Some(Value::Table(_)) => format!("tables are not supported; `{key}` must be a top-level key"),
            _ => format!("unknown key `{key}` for experiment {experiment}; valid keys: {}", valid.join(", ")),
        };
        r.error(&key, message);
    }

    let output = r.string("output").unwrap_or_else(|| experiment.name().to_string());
    if output.is_empty() || output.contains(['/', '\\']) || output.starts_with('.') {
        r.error("output", format!("`output` = {output:?} must be a plain file stem"));
    }

    let params = match experiment {
        Experiment::Scissor => {
            let g = r.grid("g", vec![0.5, 1.0, 2.0, 3.0]);
            let input = r.numbers("input");
            if r.value("input").is_none() {
                r.error("input", "missing required key `input` (real amplitudes c_0, c_1, ...)");
            }
            let input_imag = if r.value("input_imag").is_some() { r.numbers("input_imag") } else { Some(Vec::new()) };
            let patterns = r.strings("patterns", default_patterns());
            let cutoff = r.integer("cutoff", Some(qscissor::fock::DEFAULT_CUTOFF as i64));
            let mut ok = true;
            if let Some(g) = &g {
                ok &= r.check_each("g", g, |x| x >= 0.0, "[0, inf)");
            }
            if let Some(c) = cutoff {
                if !(2..=8).contains(&c) {
                    r.error("cutoff", format!("`cutoff` = {c} is outside [2, 8]"));
                    ok = false;
                }
            }
            if let (Some(input), Some(imag), Some(c)) = (&input, &input_imag, cutoff) {
                if input.is_empty() || input.len() as i64 > c + 1 {
                    r.error("input", format!("`input` needs between 1 and cutoff + 1 = {} amplitudes", c + 1));
                    ok = false;
                }
                if imag.len() > input.len() {
                    r.error("input_imag", "`input_imag` is longer than `input`");
                    ok = false;
                }
                let norm: f64 = input.iter().chain(imag.iter()).map(|x| x * x).sum();
                if norm == 0.0 {
                    r.error("input", "`input` has zero norm");
                    ok = false;
                }
            }
            if let Some(p) = &patterns {
                ok &= check_patterns(&mut r, "patterns", p);
            }
            match (ok, g, input, input_imag, patterns, cutoff) {
                (true, Some(g), Some(input), Some(input_imag), Some(patterns), Some(cutoff)) => Some(Params::Scissor(ScissorParams {
                    g,
                    input,
                    input_imag,
                    patterns,
                    cutoff: cutoff as u32,
                })),
                _ => None,
            }
        }
        Experiment::GainSweep => {
            let tau = r.grid("tau", vec![0.05, 0.1]);
            let g = r.grid("g", range_grid(0.0, 6.0, 0.1));
            let mut ok = true;
            if let Some(t) = &tau {
                ok &= r.check_each("tau", t, |x| x > 0.0 && x <= 1.0, "(0, 1]");
            }
            if let Some(g) = &g {
                ok &= r.check_each("g", g, |x| x >= 0.0, "[0, inf)");
            }
            match (ok, tau, g) {
                (true, Some(tau), Some(g)) => Some(Params::GainSweep(GainSweepParams { tau, g })),
                _ => None,
            }
        }
        Experiment::Fringes => {
            let sigma = r.number("sigma", Some(0.1));
            let g = r.number("g", Some(3.0));
            let patterns = r.strings("patterns", default_patterns());
            let phi = r.grid("phi", linspace(0.0, TAU, 97));
            let mut ok = true;
            if let Some(s) = sigma {
                ok &= r.check_each("sigma", &[s], |x| x > 0.0 && x < 1.0, "(0, 1)");
            }
            if let Some(g) = g {
                ok &= r.check_each("g", &[g], |x| x >= 0.0, "[0, inf)");
            }
            if let Some(p) = &patterns {
                ok &= check_patterns(&mut r, "patterns", p);
            }
            if let Some(phi) = &phi {
                ok &= r.increasing("phi", phi);
                if phi.len() < 4 {
                    r.error("phi", format!("`phi` needs at least 4 points for the visibility fit, got {}", phi.len()));
                    ok = false;
                }
            }
            match (ok, sigma, g, patterns, phi) {
                (true, Some(sigma), Some(g), Some(patterns), Some(phi)) => Some(Params::Fringes(FringeParams { sigma, g, patterns, phi })),
                _ => None,
            }
        }
        Experiment::Negativity => {
            let sigma = r.grid("sigma", vec![0.1, 0.2, 0.5]);
            let g = r.grid("g", range_grid(0.0, 6.0, 0.05));
            let mut ok = true;
            if let Some(s) = &sigma {
                ok &= r.check_each("sigma", s, |x| x > 0.0 && x < 1.0, "(0, 1)");
            }
            if let Some(g) = &g {
                ok &= r.check_each("g", g, |x| x >= 0.0, "[0, inf)");
            }
            match (ok, sigma, g) {
                (true, Some(sigma), Some(g)) => Some(Params::Negativity(NegativityParams { sigma, g })),
                _ => None,
            }
        }
        Experiment::Hom => {
            let theta = r.grid("theta", linspace(0.0, FRAC_PI_2, 201));
            theta.map(|theta| Params::Hom(HomParams { theta }))
        }
        Experiment::Sobol => {
            let g = r.grid("g", vec![0.5, 1.0, 2.0, 3.0, 4.0, 6.0]);
            let tau = r.number("tau", Some(0.05));
            let n_base = r.integer("n_base", Some(3840));
            let seed = r.integer("seed", Some(-1));
            let loss_min = r.number("loss_min", Some(DEFAULT_LOSS_RANGE.0));
            let loss_max = r.number("loss_max", Some(DEFAULT_LOSS_RANGE.1));
            let bootstrap = r.integer("bootstrap", Some(DEFAULT_BOOTSTRAP as i64));
            let default_layout: Vec<String> = LossLayout::default().sites().iter().map(|s| s.to_string()).collect();
            let layout = r.strings("layout", default_layout);
            let mut ok = true;
            if let Some(g) = &g {
                ok &= r.check_each("g", g, |x| x >= 0.0, "[0, inf)");
            }
            if let Some(t) = tau {
                ok &= r.check_each("tau", &[t], |x| x > 0.0 && x <= 1.0, "(0, 1]");
            }
            if let Some(n) = n_base {
                if n < 2 {
                    r.error("n_base", format!("`n_base` = {n} must be at least 2"));
                    ok = false;
                }
            }
            if let Some(s) = seed {
                if r.value("seed").is_some() && s < 0 {
                    r.error("seed", format!("`seed` = {s} must be a non-negative integer"));
                    ok = false;
                }
            }
            if let Some(b) = bootstrap {
                if b < 2 {
                    r.error("bootstrap", format!("`bootstrap` = {b} must be at least 2"));
                    ok = false;
                }
            }
            if let Some(lo) = loss_min {
                ok &= r.check_each("loss_min", &[lo], |x| (0.0..1.0).contains(&x), "[0, 1)");
            }
            if let Some(hi) = loss_max {
                ok &= r.check_each("loss_max", &[hi], |x| (0.0..1.0).contains(&x), "[0, 1)");
            }
            if let (Some(lo), Some(hi)) = (loss_min, loss_max) {
                if lo > hi {
                    r.error("loss_max", format!("`loss_max` = {hi} is below `loss_min` = {lo}"));
                    ok = false;
                }
            }
            if let Some(sites) = &layout {
                if sites.is_empty() {
                    r.error("layout", "`layout` is empty");
                    ok = false;
                }
                for s in sites {
                    if let Err(e) = s.parse::<LossLocation>() {
                        r.error("layout", e.to_string());
                        ok = false;
                    }
                }
            }
            match (ok, g, tau, n_base, seed, loss_min, loss_max, bootstrap, layout) {
                (true, Some(g), Some(tau), Some(n_base), Some(seed), Some(loss_min), Some(loss_max), Some(bootstrap), Some(layout)) => {
                    Some(Params::Sobol(SobolParams {
                        g,
                        tau,
                        n_base: n_base as usize,
                        seed: (seed >= 0).then_some(seed as u64),
                        loss_min,
                        loss_max,
                        bootstrap: bootstrap as usize,
                        layout,
                    }))
                }
                _ => None,
            }
        }
    };

    match params {
        Some(params) if r.diagnostics.is_empty() => Ok(ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            output,
            params,
        }),
        _ => {
            let mut d = r.diagnostics;
            d.sort_by_key(|d| d.line.unwrap_or(usize::MAX));
            Err(fail(d))
        }
    }
}

impl ExperimentConfig {
    /// Applies a command-line seed. Returns a warning when the experiment
    /// ignores seeds.
    pub fn apply_seed(&mut self, seed: Option<u64>) -> Option<String> {
        match (&mut self.params, seed) {
            (Params::Sobol(p), Some(s)) => {
                p.seed = Some(s);
                None
            }
            (_, Some(_)) => Some(format!("warning: experiment {} is deterministic; --seed is ignored", self.experiment)),
            _ => None,
        }
    }

    /// Stochastic experiments need a seed from the file or the command line.
    pub fn missing_seed(&self) -> Option<ConfigError> {
        match &self.params {
            Params::Sobol(p) if p.seed.is_none() => Some(ConfigError {
                source_name: String::new(),
                diagnostics: vec![Diagnostic {
                    line: None,
                    message: "experiment sobol needs a seed: set `seed` in the config or pass --seed".into(),
                }],
            }),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        parse_config(text, "t.toml", None)
    }

    #[test]
    fn grids() {
        let c = parse("schema_version = 1\nexperiment = \"gain-sweep\"\ntau = [0.05, 0.1]\ng = \"0:1:0.25\"\n").unwrap();
        match c.params {
            Params::GainSweep(p) => {
                assert_eq!(p.tau, vec![0.05, 0.1]);
                assert_eq!(p.g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
            }
            _ => panic!(),
        }
        let c = parse("schema_version = 1\nexperiment = \"gain-sweep\"\ng = 2\n").unwrap();
        assert!(matches!(c.params, Params::GainSweep(GainSweepParams { ref g, .. }) if g == &vec![2.0]));
    }

    #[test]
    fn reports_every_violation_with_lines() {
        let err = parse("schema_version = 1\nexperiment = \"gain-sweep\"\ntau = 1.2\nfoo = 3\ng = \"1:0:0.1\"\n").unwrap_err();
        let lines: Vec<Option<usize>> = err.diagnostics.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![Some(3), Some(4), Some(5)]);
        assert!(err.diagnostics[0].message.contains("tau") && err.diagnostics[0].message.contains("(0, 1]"));
        assert!(err.diagnostics[1].message.contains("unknown key `foo`"));
    }

    #[test]
    fn unknown_experiment_lists_names() {
        let err = parse("schema_version = 1\nexperiment = \"teleport\"\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t.toml:2:") && msg.contains("gain-sweep") && msg.contains("sobol"));
    }

    #[test]
    fn schema_version_is_required() {
        let err = parse("experiment = \"hom\"\n").unwrap_err();
        assert!(err.to_string().contains("schema_version"));
        assert!(parse("schema_version = 2\nexperiment = \"hom\"\n").is_err());
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse("schema_version = 1\nexperiment = \"hom\"\ntheta = [0.1,\n").unwrap_err();
        assert!(err.diagnostics[0].line.is_some());
    }

    #[test]
    fn experiment_mismatch() {
        let err = parse_config("schema_version = 1\nexperiment = \"hom\"\n", "t", Some(Experiment::Sobol)).unwrap_err();
        assert!(err.to_string().contains("requested"));
    }

    #[test]
    fn sobol_seed_handling() {
        let mut c = parse("schema_version = 1\nexperiment = \"sobol\"\n").unwrap();
        assert!(c.missing_seed().is_some());
        assert!(c.apply_seed(Some(5)).is_none());
        assert!(c.missing_seed().is_none());
        let mut h = parse("schema_version = 1\nexperiment = \"hom\"\n").unwrap();
        assert!(h.apply_seed(Some(5)).unwrap().contains("ignored"));
        assert!(parse("schema_version = 1\nexperiment = \"sobol\"\nseed = -3\n").is_err());
        assert!(parse("schema_version = 1\nexperiment = \"sobol\"\nlayout = [\"detector-7\"]\n").is_err());
    }

    #[test]
    fn scissor_requires_input() {
        let err = parse("schema_version = 1\nexperiment = \"scissor\"\npatterns = [\"200\"]\n").unwrap_err();
        assert_eq!(err.diagnostics.len(), 2);
        let ok = parse("schema_version = 1\nexperiment = \"scissor\"\ninput = [0.6, 0.0, 0.8]\n").unwrap();
        assert!(matches!(ok.params, Params::Scissor(ScissorParams { cutoff: 4, .. })));
    }
}
