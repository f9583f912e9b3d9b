//! Run configuration: a TOML document walked by hand so that every problem
//! is reported at once, each with the dotted path of the offending key.
//!
//! See `docs/config.md` in the repository for the full schema.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use super::metrics::Metric;
use crate::estimators::{EstimatorConfig, Schedule};
use crate::optimizers::{
    AdaNstormConfig, BaselineConfig, Generator, Method, NstormConfig, PlConfig, YInit,
};
use crate::oracle::OracleCapabilities;
use crate::problems::NoiseScales;
use crate::{Error, Result};

/// One validation problem, located by a dotted key path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Every issue found in one document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

impl From<ConfigErrors> for Error {
    fn from(e: ConfigErrors) -> Self {
        Error::Config(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReturnsSource {
    Csv(PathBuf),
    Synthetic {
        periods: usize,
        assets: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSource<G> {
    File(PathBuf),
    Generated(G),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MdpGen {
    pub states: usize,
    pub features: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AucGen {
    pub samples: usize,
    pub dim: usize,
    pub imratio: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSpec {
    Toy {
        noise: NoiseScales,
    },
    LinQuad {
        dx: usize,
        dg: usize,
        dy: usize,
        seed: u64,
        noise: NoiseScales,
    },
    Portfolio {
        returns: ReturnsSource,
        lambda_risk: f64,
        sqrt_floor: f64,
        batch: usize,
    },
    PolicyEval {
        source: InstanceSource<MdpGen>,
        discount: f64,
        beta_reg: f64,
    },
    Auc {
        source: InstanceSource<AucGen>,
        alpha: f64,
        batch: usize,
        second_order: bool,
    },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Toy { .. } => "toy",
            ProblemSpec::LinQuad { .. } => "linquad",
            ProblemSpec::Portfolio { .. } => "portfolio",
            ProblemSpec::PolicyEval { .. } => "policy_eval",
            ProblemSpec::Auc { .. } => "auc",
        }
    }

    /// Capabilities declared by the problem kind.
    pub fn capabilities(&self) -> OracleCapabilities {
        match self {
            ProblemSpec::Portfolio { .. } => OracleCapabilities {
                has_exact_inner: true,
                has_exact_outer: true,
                ..OracleCapabilities::default()
            },
            _ => OracleCapabilities::FULL,
        }
    }

    /// Problems whose dual lives on a simplex project by default.
    pub fn default_projection(&self) -> bool {
        matches!(
            self,
            ProblemSpec::Portfolio { .. } | ProblemSpec::PolicyEval { .. }
        )
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        match self {
            ProblemSpec::Portfolio {
                returns: ReturnsSource::Csv(p),
                ..
            }
            | ProblemSpec::PolicyEval {
                source: InstanceSource::File(p),
                ..
            }
            | ProblemSpec::Auc {
                source: InstanceSource::File(p),
                ..
            } => fix(p),
            _ => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum XInit {
    /// The projection of the origin onto the feasible set.
    Origin,
    /// Standard Gaussian entries times `scale`, drawn from `seed`; shared by
    /// all run seeds so every method starts from the same point.
    Gaussian {
        scale: f64,
        seed: u64,
    },
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitSpec {
    pub x: XInit,
    /// `None` picks the exact maximizer when available, else inner ascent.
    pub y: Option<YInit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub iterations: u64,
    pub seeds: Vec<u64>,
    pub log_every: u64,
    pub metrics: Vec<Metric>,
    pub output: Option<PathBuf>,
    pub problem: ProblemSpec,
    pub method: Method,
    pub init: InitSpec,
}

/// A base document plus Cartesian axes of dotted-path overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub base: Table,
    pub axes: Vec<(String, Vec<Value>)>,
    /// Directory that relative data paths are resolved against.
    pub base_dir: Option<PathBuf>,
}

struct Walker {
    issues: Vec<ConfigIssue>,
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

impl Walker {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, t: &Table, prefix: &str, allowed: &[&str]) {
        for key in t.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issue(join(prefix, key), "unknown key");
            }
        }
    }

    fn mismatch(&mut self, path: String, want: &str, got: &Value) {
        self.issue(path, format!("expected {want}, found {}", type_name(got)));
    }

    fn float(&mut self, t: &Table, prefix: &str, key: &str) -> Option<f64> {
        match t.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.mismatch(join(prefix, key), "number", other);
                None
            }
        }
    }

    fn float_or(&mut self, t: &Table, prefix: &str, key: &str, default: f64) -> f64 {
        self.float(t, prefix, key).unwrap_or(default)
    }

    fn uint(&mut self, t: &Table, prefix: &str, key: &str) -> Option<u64> {
        match t.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            Value::Integer(i) => {
                self.issue(join(prefix, key), format!("must be non-negative, got {i}"));
                None
            }
            other => {
                self.mismatch(join(prefix, key), "integer", other);
                None
            }
        }
    }

    fn uint_or(&mut self, t: &Table, prefix: &str, key: &str, default: u64) -> u64 {
        self.uint(t, prefix, key).unwrap_or(default)
    }

    fn positive(&mut self, t: &Table, prefix: &str, key: &str, default: u64) -> u64 {
        let v = self.uint_or(t, prefix, key, default);
        if v == 0 {
            self.issue(join(prefix, key), "must be positive");
        }
        v
    }

    fn boolean(&mut self, t: &Table, prefix: &str, key: &str) -> Option<bool> {
        match t.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.mismatch(join(prefix, key), "boolean", other);
                None
            }
        }
    }

    fn string<'a>(&mut self, t: &'a Table, prefix: &str, key: &str) -> Option<&'a str> {
        match t.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.mismatch(join(prefix, key), "string", other);
                None
            }
        }
    }

    fn float_list(&mut self, v: &Value, path: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = v else {
            self.mismatch(path.to_string(), "array of numbers", v);
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match item {
                Value::Float(f) => out.push(*f),
                Value::Integer(n) => out.push(*n as f64),
                other => {
                    self.mismatch(format!("{path}[{i}]"), "number", other);
                    return None;
                }
            }
        }
        Some(out)
    }

    fn section<'a>(&mut self, root: &'a Table, key: &str, required: bool) -> Option<&'a Table> {
        match root.get(key) {
            Some(Value::Table(t)) => Some(t),
            Some(other) => {
                self.mismatch(key.to_string(), "table", other);
                None
            }
            None => {
                if required {
                    self.issue(key, "missing section");
                }
                None
            }
        }
    }

    fn noise(&mut self, t: &Table, prefix: &str) -> NoiseScales {
        let sigma = self.float_or(t, prefix, "noise", 0.0);
        let scales = NoiseScales {
            value: self.float_or(t, prefix, "noise_value", sigma),
            jacobian: self.float_or(t, prefix, "noise_jacobian", sigma),
            gradient: self.float_or(t, prefix, "noise_gradient", sigma),
        };
        if let Err(e) = scales.validate() {
            self.issue(join(prefix, "noise"), e.to_string());
        }
        scales
    }

    fn problem(&mut self, t: &Table) -> Option<ProblemSpec> {
        const P: &str = "problem";
        let kind = match self.string(t, P, "kind") {
            Some(k) => k,
            None => {
                if !t.contains_key("kind") {
                    self.issue("problem.kind", "missing key");
                }
                return None;
            }
        };
        let noise_keys = [
            "kind",
            "noise",
            "noise_value",
            "noise_jacobian",
            "noise_gradient",
        ];
        match kind {
            "toy" => {
                self.unknown_keys(t, P, &noise_keys);
                Some(ProblemSpec::Toy {
                    noise: self.noise(t, P),
                })
            }
            "linquad" => {
                let mut allowed = noise_keys.to_vec();
                allowed.extend(["dx", "dg", "dy", "seed"]);
                self.unknown_keys(t, P, &allowed);
                Some(ProblemSpec::LinQuad {
                    dx: self.positive(t, P, "dx", 10) as usize,
                    dg: self.positive(t, P, "dg", 10) as usize,
                    dy: self.positive(t, P, "dy", 10) as usize,
                    seed: self.uint_or(t, P, "seed", 0),
                    noise: self.noise(t, P),
                })
            }
            "portfolio" => {
                self.unknown_keys(
                    t,
                    P,
                    &[
                        "kind",
                        "returns_csv",
                        "periods",
                        "assets",
                        "data_seed",
                        "lambda_risk",
                        "sqrt_floor",
                        "batch",
                    ],
                );
                let returns = match self.string(t, P, "returns_csv") {
                    Some(path) => {
                        for k in ["periods", "assets", "data_seed"] {
                            if t.contains_key(k) {
                                self.issue(join(P, k), "conflicts with problem.returns_csv");
                            }
                        }
                        ReturnsSource::Csv(PathBuf::from(path))
                    }
                    None => ReturnsSource::Synthetic {
                        periods: self.positive(t, P, "periods", 500) as usize,
                        assets: self.positive(t, P, "assets", 10) as usize,
                        seed: self.uint_or(t, P, "data_seed", 0),
                    },
                };
                Some(ProblemSpec::Portfolio {
                    returns,
                    lambda_risk: self.float_or(t, P, "lambda_risk", 0.5),
                    sqrt_floor: self.float_or(t, P, "sqrt_floor", 1e-12),
                    batch: self.positive(t, P, "batch", 10) as usize,
                })
            }
            "policy_eval" => {
                self.unknown_keys(
                    t,
                    P,
                    &[
                        "kind", "instance", "states", "features", "seed", "discount", "beta_reg",
                    ],
                );
                let source = match self.string(t, P, "instance") {
                    Some(path) => {
                        for k in ["states", "features", "seed"] {
                            if t.contains_key(k) {
                                self.issue(join(P, k), "conflicts with problem.instance");
                            }
                        }
                        InstanceSource::File(PathBuf::from(path))
                    }
                    None => InstanceSource::Generated(MdpGen {
                        states: self.positive(t, P, "states", 50) as usize,
                        features: self.positive(t, P, "features", 10) as usize,
                        seed: self.uint_or(t, P, "seed", 0),
                    }),
                };
                Some(ProblemSpec::PolicyEval {
                    source,
                    discount: self.float_or(t, P, "discount", 0.9),
                    beta_reg: self.float_or(t, P, "beta_reg", 0.1),
                })
            }
            "auc" => {
                self.unknown_keys(
                    t,
                    P,
                    &[
                        "kind",
                        "instance",
                        "samples",
                        "dim",
                        "imratio",
                        "seed",
                        "alpha",
                        "batch",
                        "second_order",
                    ],
                );
                let source = match self.string(t, P, "instance") {
                    Some(path) => {
                        for k in ["samples", "dim", "imratio", "seed"] {
                            if t.contains_key(k) {
                                self.issue(join(P, k), "conflicts with problem.instance");
                            }
                        }
                        InstanceSource::File(PathBuf::from(path))
                    }
                    None => InstanceSource::Generated(AucGen {
                        samples: self.positive(t, P, "samples", 1000) as usize,
                        dim: self.positive(t, P, "dim", 10) as usize,
                        imratio: self.float_or(t, P, "imratio", 0.1),
                        seed: self.uint_or(t, P, "seed", 0),
                    }),
                };
                Some(ProblemSpec::Auc {
                    source,
                    alpha: self.float_or(t, P, "alpha", 0.1),
                    batch: self.positive(t, P, "batch", 32) as usize,
                    second_order: self.boolean(t, P, "second_order").unwrap_or(false),
                })
            }
            other => {
                self.issue(
                    "problem.kind",
                    format!("unknown problem `{other}` (expected toy, linquad, portfolio, policy_eval or auc)"),
                );
                None
            }
        }
    }

    fn method(&mut self, t: &Table, problem: Option<&ProblemSpec>) -> Option<Method> {
        const M: &str = "method";
        let common = ["kind", "gamma", "m", "c1", "c2", "project_feasible"];
        let storm = ["jacobian_radius", "project_initial"];
        let kind = match self.string(t, M, "kind") {
            Some(k) => k,
            None => {
                if !t.contains_key("kind") {
                    self.issue("method.kind", "missing key");
                }
                return None;
            }
        };
        let mut allowed: Vec<&str> = common.to_vec();
        match kind {
            "nstorm" => allowed.extend(storm),
            "nstorm_pl" => {
                allowed.extend(storm);
                allowed.push("lambda");
            }
            "ada_nstorm" => {
                allowed.extend(storm);
                allowed.extend([
                    "lambda",
                    "tau",
                    "rho",
                    "generator",
                    "bound_low",
                    "bound_high",
                ]);
            }
            "scgda" | "sgda" => {}
            other => {
                self.issue(
                    "method.kind",
                    format!("unknown method `{other}` (expected nstorm, nstorm_pl, ada_nstorm, scgda or sgda)"),
                );
                return None;
            }
        }
        self.unknown_keys(t, M, &allowed);

        let gamma = self.float_or(t, M, "gamma", 0.1);
        let m = self.float_or(t, M, "m", 8.0);
        let c1 = self.float_or(t, M, "c1", 1.0);
        let c2 = self.float_or(t, M, "c2", 1.0);
        let schedule = match Schedule::new(m, c1, c2) {
            Ok(s) => Some(s),
            Err(e) => {
                self.issue("method.m", e.to_string());
                None
            }
        };
        let project_feasible = self
            .boolean(t, M, "project_feasible")
            .unwrap_or_else(|| problem.is_some_and(ProblemSpec::default_projection));
        let estimator = schedule.map(|schedule| EstimatorConfig {
            schedule,
            jacobian_radius: self.float_or(t, M, "jacobian_radius", 100.0),
            project_initial: self.boolean(t, M, "project_initial").unwrap_or(false),
        });
        let lambda = self.float_or(t, M, "lambda", 1.0);
        let method = match kind {
            "nstorm" => Method::Nstorm(NstormConfig {
                gamma,
                estimator: estimator?,
                project_feasible,
            }),
            "nstorm_pl" => Method::NstormPl(PlConfig {
                gamma,
                lambda,
                estimator: estimator?,
                project_feasible,
            }),
            "ada_nstorm" => {
                let generator = match self.string(t, M, "generator").unwrap_or("adam") {
                    "adam" => Generator::Adam,
                    "amsgrad" => Generator::AmsGrad,
                    "adabelief" => Generator::AdaBelief,
                    "adabound" => Generator::AdaBound {
                        low: self.float_or(t, M, "bound_low", 0.0),
                        high: self.float_or(t, M, "bound_high", 1.0),
                    },
                    other => {
                        self.issue(
                            "method.generator",
                            format!("unknown generator `{other}` (expected adam, amsgrad, adabelief or adabound)"),
                        );
                        return None;
                    }
                };
                if !matches!(generator, Generator::AdaBound { .. }) {
                    for k in ["bound_low", "bound_high"] {
                        if t.contains_key(k) {
                            self.issue(join(M, k), "only used by the adabound generator");
                        }
                    }
                }
                Method::AdaNstorm(AdaNstormConfig {
                    gamma,
                    lambda,
                    tau: self.float_or(t, M, "tau", 0.9),
                    rho: self.float_or(t, M, "rho", 0.1),
                    generator,
                    estimator: estimator?,
                    project_feasible,
                })
            }
            _ => {
                let cfg = BaselineConfig {
                    gamma,
                    schedule: schedule?,
                    project_feasible,
                };
                if kind == "scgda" {
                    Method::Scgda(cfg)
                } else {
                    Method::Sgda(cfg)
                }
            }
        };
        if let Err(e) = method.validate() {
            self.issue("method", e.to_string());
        }
        Some(method)
    }

    fn init(&mut self, t: Option<&Table>) -> InitSpec {
        const I: &str = "init";
        let Some(t) = t else {
            return InitSpec {
                x: XInit::Origin,
                y: None,
            };
        };
        self.unknown_keys(
            t,
            I,
            &["x", "x_scale", "x_seed", "y", "ascent_steps", "ascent_step"],
        );
        let x = match t.get("x") {
            None => XInit::Origin,
            Some(Value::String(s)) if s == "origin" => XInit::Origin,
            Some(Value::String(s)) if s == "gaussian" => XInit::Gaussian {
                scale: self.float_or(t, I, "x_scale", 1.0),
                seed: self.uint_or(t, I, "x_seed", 0),
            },
            Some(Value::String(s)) => {
                self.issue(
                    "init.x",
                    format!("unknown x init `{s}` (expected origin, gaussian or an array)"),
                );
                XInit::Origin
            }
            Some(v) => self
                .float_list(v, "init.x")
                .map_or(XInit::Origin, XInit::Given),
        };
        let ascent = |w: &mut Walker| YInit::InnerAscent {
            steps: w.uint_or(t, I, "ascent_steps", 100) as usize,
            step_size: w.float(t, I, "ascent_step"),
        };
        let y = match t.get("y") {
            None if t.contains_key("ascent_steps") || t.contains_key("ascent_step") => {
                Some(ascent(self))
            }
            None => None,
            Some(Value::String(s)) if s == "exact" => Some(YInit::ExactYStar),
            Some(Value::String(s)) if s == "ascent" => Some(ascent(self)),
            Some(Value::String(s)) => {
                self.issue(
                    "init.y",
                    format!("unknown y init `{s}` (expected exact, ascent or an array)"),
                );
                None
            }
            Some(v) => self.float_list(v, "init.y").map(|y| YInit::Given { y }),
        };
        InitSpec { x, y }
    }
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> std::result::Result<RunConfig, ConfigErrors> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigIssue {
            path: String::new(),
            message: format!("malformed TOML: {}", e.message()),
        }])
    })?;
    config_from_table(&table)
}

/// Reads a configuration file; relative data paths are taken relative to
/// the file's directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg =
        parse_config(&text).map_err(|e| Error::Config(format!("{}:\n{e}", path.display())))?;
    if let Some(dir) = path.parent() {
        cfg.problem.resolve_paths(dir);
    }
    Ok(cfg)
}

pub fn config_from_table(root: &Table) -> std::result::Result<RunConfig, ConfigErrors> {
    let mut w = Walker { issues: Vec::new() };
    w.unknown_keys(
        root,
        "",
        &[
            "name",
            "iterations",
            "seeds",
            "log_every",
            "metrics",
            "output",
            "problem",
            "method",
            "init",
            "sweep",
        ],
    );
    let name = w.string(root, "", "name").unwrap_or("run").to_string();
    let iterations = w.positive(root, "", "iterations", 1000);
    let log_every = w.positive(root, "", "log_every", 100);
    let seeds = match root.get("seeds") {
        None => vec![0],
        Some(Value::Array(items)) => {
            let mut seeds = Vec::new();
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::Integer(s) if *s >= 0 => seeds.push(*s as u64),
                    other => w.mismatch(format!("seeds[{i}]"), "non-negative integer", other),
                }
            }
            seeds
        }
        Some(Value::Table(t)) => {
            w.unknown_keys(t, "seeds", &["base", "count"]);
            let base = w.uint_or(t, "seeds", "base", 0);
            let count = w.positive(t, "seeds", "count", 1);
            (0..count).map(|i| base + i).collect()
        }
        Some(other) => {
            w.mismatch("seeds".into(), "array or {base, count} table", other);
            vec![]
        }
    };
    if seeds.is_empty() {
        w.issue("seeds", "at least one seed is required");
    }
    let unique: BTreeSet<_> = seeds.iter().collect();
    if unique.len() != seeds.len() {
        w.issue("seeds", "seeds must be distinct");
    }
    let mut metrics = Vec::new();
    match root.get("metrics") {
        None => metrics.push(Metric::VNorm),
        Some(Value::Array(items)) => {
            for (i, item) in items.iter().enumerate() {
                match item {
                    Value::String(s) => match Metric::parse(s) {
                        Some(m) if metrics.contains(&m) => {
                            w.issue(format!("metrics[{i}]"), format!("duplicate `{s}`"))
                        }
                        Some(m) => metrics.push(m),
                        None => w.issue(
                            format!("metrics[{i}]"),
                            format!(
                                "unknown metric `{s}` (expected one of {})",
                                Metric::ALL_NAMES.join(", ")
                            ),
                        ),
                    },
                    other => w.mismatch(format!("metrics[{i}]"), "string", other),
                }
            }
        }
        Some(other) => w.mismatch("metrics".into(), "array of strings", other),
    }
    metrics.sort();
    let output = w.string(root, "", "output").map(PathBuf::from);

    let problem = w.section(root, "problem", true).and_then(|t| w.problem(t));
    let method = w
        .section(root, "method", true)
        .and_then(|t| w.method(t, problem.as_ref()));
    let init_table = w.section(root, "init", false);
    let init = w.init(init_table);

    if let Some(p) = &problem {
        let caps = p.capabilities();
        for m in &metrics {
            for (needed, has) in m.requirements(&caps) {
                if !has {
                    w.issue(
                        format!("metrics.{}", m.name()),
                        format!("capability {needed} missing"),
                    );
                }
            }
        }
        if init.y == Some(YInit::ExactYStar) && !caps.has_y_star {
            w.issue("init.y", "capability y_star missing");
        }
    }
    if !w.issues.is_empty() {
        return Err(ConfigErrors(w.issues));
    }
    Ok(RunConfig {
        name,
        iterations,
        seeds,
        log_every,
        metrics,
        output,
        problem: problem.expect("validated"),
        method: method.expect("validated"),
        init,
    })
}

fn set_path(root: &mut Table, path: &str, value: Value) -> std::result::Result<(), String> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().ok_or("empty path")?;
    let mut cur = root;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(format!("`{p}` is not a table")),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl SweepSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigErrors> {
        let mut base: Table = text.parse().map_err(|e: toml::de::Error| {
            ConfigErrors(vec![ConfigIssue {
                path: String::new(),
                message: format!("malformed TOML: {}", e.message()),
            }])
        })?;
        let mut issues = Vec::new();
        let mut axes = Vec::new();
        match base.remove("sweep") {
            None => {}
            Some(Value::Table(t)) => {
                for (key, v) in t {
                    match v {
                        Value::Array(values) if !values.is_empty() => axes.push((key, values)),
                        _ => issues.push(ConfigIssue {
                            path: format!("sweep.{key}"),
                            message: "expected a non-empty array of values".into(),
                        }),
                    }
                }
            }
            Some(other) => issues.push(ConfigIssue {
                path: "sweep".into(),
                message: format!("expected table, found {}", type_name(&other)),
            }),
        }
        let spec = SweepSpec {
            base,
            axes,
            base_dir: None,
        };
        if let Err(e) = config_from_table(&spec.base) {
            issues.extend(e.0);
        }
        if issues.is_empty() {
            // every point must validate too, which also checks the axis paths
            for point in spec.points_raw() {
                match point {
                    Ok((labels, table)) => {
                        if let Err(e) = config_from_table(&table) {
                            let at = labels
                                .iter()
                                .map(|(k, v)| format!("{k}={v}"))
                                .collect::<Vec<_>>()
                                .join(", ");
                            issues.extend(e.0.into_iter().map(|i| ConfigIssue {
                                path: i.path,
                                message: format!("{} (sweep point {at})", i.message),
                            }));
                        }
                    }
                    Err(e) => issues.push(e),
                }
            }
        }
        if issues.is_empty() {
            Ok(spec)
        } else {
            issues.dedup();
            Err(ConfigErrors(issues))
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec =
            Self::parse(&text).map_err(|e| Error::Config(format!("{}:\n{e}", path.display())))?;
        spec.base_dir = path.parent().map(Path::to_path_buf);
        Ok(spec)
    }

    fn points_raw(&self) -> Vec<std::result::Result<(Vec<(String, String)>, Table), ConfigIssue>> {
        let mut combos: Vec<Vec<usize>> = vec![vec![]];
        for (_, values) in &self.axes {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (0..values.len()).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        combos
            .into_iter()
            .map(|combo| {
                let mut table = self.base.clone();
                let mut labels = Vec::new();
                for ((path, values), &i) in self.axes.iter().zip(&combo) {
                    set_path(&mut table, path, values[i].clone()).map_err(|message| {
                        ConfigIssue {
                            path: format!("sweep.{path}"),
                            message,
                        }
                    })?;
                    labels.push((path.clone(), values[i].to_string()));
                }
                Ok((labels, table))
            })
            .collect()
    }

    /// Every Cartesian point as `(axis labels, config)`, in axis order.
    pub fn points(&self) -> Result<Vec<(Vec<(String, String)>, RunConfig)>> {
        self.points_raw()
            .into_iter()
            .map(|p| {
                let (labels, table) = p.map_err(|i| Error::Config(i.to_string()))?;
                let mut cfg = config_from_table(&table)?;
                if let Some(dir) = &self.base_dir {
                    cfg.problem.resolve_paths(dir);
                }
                Ok((labels, cfg))
            })
            .collect()
    }
}
