//! Per-command parameter tables, config files and flag overrides.

use std::collections::BTreeMap;

use serde_json::{Number, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Float,
    Int,
    FloatList,
    Bool,
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub kind: Kind,
    /// Default in the same textual form a flag would take.
    pub default: &'static str,
    pub help: &'static str,
}

const fn p(name: &'static str, kind: Kind, default: &'static str, help: &'static str) -> ParamDef {
    ParamDef {
        name,
        kind,
        default,
        help,
    }
}

use Kind::*;

const COUNTEREXAMPLE: [ParamDef; 3] = [
    p("amplitude", Float, "1", "amplitude A of the exponent"),
    p("alpha", Float, "4", "power α > 2; the sector half-angle is π/(2α)"),
    p("shift", Float, "1", "vertex shift along y₁"),
];

pub fn table(command: &str) -> Option<Vec<ParamDef>> {
    let t = match command {
        "alpha-curve" => vec![
            p("eps-min", Float, "0.05", "smallest ε"),
            p("eps-max", Float, "0.55", "largest ε"),
            p("steps", Int, "50", "number of ε values"),
            p("tol", Float, "1e-12", "bisection tolerance"),
        ],
        "psd-scan" => vec![
            p("eps", Float, "0.5", "cone parameter ε = cos(θ/2)"),
            p("alpha", Float, "1.85", "weight exponent α"),
            p("n", Int, "3", "space dimension"),
            p("points", Int, "10000", "sample points per parameter pair"),
            p(
                "random-pairs",
                Int,
                "0",
                "if positive, scan this many random admissible (α, ε) pairs instead",
            ),
            p("dump-points", Bool, "false", "write the sampled points as CSV"),
        ],
        "a3-scan" => vec![
            p("eps", Float, "0.5", "cone parameter ε"),
            p("alpha", Float, "1.85", "weight exponent α"),
            p("a", Float, "1", "Carleman parameter a"),
            p("n", Int, "2", "space dimension"),
            p("points", Int, "10000", "sample points"),
            p(
                "sampling",
                Choice(&["uniform", "near-boundary"]),
                "uniform",
                "sampling scheme",
            ),
        ],
        "check-carleman" => vec![
            p(
                "prop",
                Choice(&["23", "21"]),
                "23",
                "23: cone weight, 21: Gaussian weight",
            ),
            p("eps", Float, "0.5", "cone parameter ε"),
            p("alpha", Float, "1.85", "weight exponent α"),
            p("n", Int, "2", "space dimension"),
            p("a-sweep", FloatList, "5,10,20,50,100", "values of a"),
            p("bumps", Int, "20", "plain bumps in the suite"),
            p("modulated", Int, "5", "modulated bumps in the suite"),
            p("rel-tol", Float, "1e-6", "quadrature relative tolerance"),
            p("max-evals", Int, "40000000", "quadrature evaluation cap per integral"),
            p(
                "refine-check",
                Bool,
                "false",
                "repeat the sweep with a ten times tighter tolerance",
            ),
        ],
        "check-identity" => vec![
            p("eps", Float, "0.5", "cone parameter ε"),
            p("alpha", Float, "1.85", "weight exponent α"),
            p("a", Float, "10", "Carleman parameter a"),
            p("n", Int, "2", "space dimension"),
            p("bumps", Int, "5", "plain bumps"),
            p("modulated", Int, "5", "modulated bumps"),
            p("rel-tol", Float, "1e-6", "quadrature relative tolerance"),
            p("max-evals", Int, "40000000", "quadrature evaluation cap"),
        ],
        "counterexample" => {
            let mut v = COUNTEREXAMPLE.to_vec();
            v.extend([
                p("points", Int, "100", "in-sector points for the residual order"),
                p("h", Float, "2e-3", "finite-difference step (and half of it)"),
                p("decay-points", Int, "20", "points for the s → 0 profile"),
                p("margin", Float, "0.05", "angular margin for the sector scans"),
                p(
                    "radius-cap",
                    Float,
                    "4",
                    "radius of the scan region; doubled for the growth check",
                ),
                p("scan-points", Int, "20000", "samples per scan"),
                p("slice-s", Float, "0.5", "time of the CSV slice"),
                p("slice-n", Int, "41", "slice grid points per axis"),
                p("slice-radius", Float, "2", "half-width of the slice around the vertex"),
            ]);
            v
        }
        "crosscheck" => {
            let mut v = COUNTEREXAMPLE.to_vec();
            v.extend([
                p("margin", Float, "0.05", "angular margin inside the sector"),
                p("r-in", Float, "0.2", "inner radius"),
                p("r-out", Float, "1", "outer radius"),
                p("s0", Float, "0.8", "final backward time"),
                p("s1", Float, "1", "initial backward time"),
                p("nr", Int, "16", "radial cells on the coarsest grid"),
                p("nw", Int, "16", "angular cells on the coarsest grid"),
                p("dt", Float, "0.0125", "time step on the coarsest grid"),
                p("levels", Int, "3", "grid levels, each halving all steps"),
            ]);
            v
        }
        "decay" => vec![
            p("n", Int, "1", "space dimension"),
            p("radii", FloatList, "4,8", "ball radii R"),
            p("m", Float, "1", "boundary value M"),
            p("cells-per-unit", Int, "100", "radial cells per unit length"),
            p("dt-over-r2", Float, "1.25e-4", "time step as a multiple of R²"),
            p("window-lo", Float, "0.0125", "window start as a multiple of R²"),
            p("window-hi", Float, "0.0625", "window end as a multiple of R²"),
        ],
        "control" => vec![
            p(
                "theta-deg",
                FloatList,
                "60,90,120,150",
                "sector opening angles in degrees",
            ),
            p("r-in", Float, "0.5", "inner radius"),
            p("r-out", Float, "1.5", "outer radius"),
            p("nr", Int, "16", "radial cells"),
            p("nw", Int, "16", "angular cells"),
            p("t-end", Float, "0.1", "control horizon"),
            p("dt", Float, "0.002", "time step"),
            p("level", Int, "3", "finest dyadic level of the control basis"),
            p("bound", Float, "1", "bound on every control coefficient"),
            p("max-iter", Int, "20000", "projected-gradient iteration cap"),
            p("tikhonov", Float, "1e-12", "Tikhonov regularization"),
        ],
        "g-check" => vec![
            p("beta", Float, "0.003", "decay rate β"),
            p("rho", Float, "10", "radius ρ > 2"),
            p("grid", Int, "20000", "grid intervals on (0, 2]"),
        ],
        _ => return None,
    };
    Some(t)
}

pub const COMMANDS: [&str; 10] = [
    "alpha-curve",
    "psd-scan",
    "a3-scan",
    "check-carleman",
    "check-identity",
    "counterexample",
    "crosscheck",
    "decay",
    "control",
    "g-check",
];

/// Keys every command accepts besides its own table.
pub const COMMON_KEYS: [&str; 1] = ["seed"];

pub const DEFAULT_SEED: u64 = 7;

/// Parses textual input for one parameter into a JSON value.
pub fn parse_text(def: &ParamDef, text: &str) -> Result<Value, String> {
    let text = text.trim();
    let float = |s: &str| -> Result<Value, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
        Number::from_f64(v)
            .map(Value::Number)
            .ok_or_else(|| format!("`{s}` is not finite"))
    };
    match def.kind {
        Float => float(text),
        Int => text
            .parse::<u64>()
            .map(|v| Value::Number(v.into()))
            .map_err(|_| format!("`{text}` is not a nonnegative integer")),
        FloatList => text
            .split(',')
            .map(float)
            .collect::<Result<Vec<_>, _>>()
            .map(Value::Array),
        Bool => text
            .parse::<bool>()
            .map(Value::Bool)
            .map_err(|_| format!("`{text}` is not true or false")),
        Choice(options) => options
            .iter()
            .find(|o| **o == text)
            .map(|o| Value::String((*o).to_string()))
            .ok_or_else(|| format!("`{text}` is not one of {}", options.join(", "))),
    }
}

/// Checks a JSON value against a parameter kind, normalizing integers given
/// as floats and choices given as numbers.
fn check_json(def: &ParamDef, v: &Value) -> Result<Value, String> {
    match (def.kind, v) {
        (Float, Value::Number(_)) => Ok(v.clone()),
        (Int, Value::Number(n)) if n.as_u64().is_some() => Ok(v.clone()),
        (FloatList, Value::Array(items)) if items.iter().all(Value::is_number) => Ok(v.clone()),
        (Bool, Value::Bool(_)) => Ok(v.clone()),
        (Choice(_), Value::String(s)) => parse_text(def, s),
        (Choice(_), Value::Number(n)) => parse_text(def, &n.to_string()),
        (_, Value::String(s)) => parse_text(def, s),
        _ => Err(format!("{v} has the wrong type")),
    }
}

/// Fully resolved parameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub command: String,
    pub values: BTreeMap<String, Value>,
    pub seed: u64,
}

impl Params {
    pub fn defaults(command: &str) -> CliResult<Self> {
        let defs = table(command).ok_or_else(|| CliError::Usage(format!("unknown command `{command}`")))?;
        let mut values = BTreeMap::new();
        for d in &defs {
            let v = parse_text(d, d.default).expect("defaults parse");
            values.insert(d.name.to_string(), v);
        }
        Ok(Self {
            command: command.to_string(),
            values,
            seed: DEFAULT_SEED,
        })
    }

    fn def(&self, key: &str) -> CliResult<ParamDef> {
        table(&self.command)
            .and_then(|t| t.into_iter().find(|d| d.name == key))
            .ok_or_else(|| CliError::UnknownKey {
                command: self.command.clone(),
                key: key.to_string(),
            })
    }

    pub fn set_text(&mut self, key: &str, text: &str) -> CliResult<()> {
        let key = normalize(key);
        if key == "seed" {
            self.seed = text.trim().parse().map_err(|_| CliError::Value {
                key,
                message: format!("`{text}` is not a nonnegative integer"),
            })?;
            return Ok(());
        }
        let def = self.def(&key)?;
        let v = parse_text(&def, text).map_err(|message| CliError::Value {
            key: key.clone(),
            message,
        })?;
        self.values.insert(key, v);
        Ok(())
    }

    fn set_json(&mut self, key: &str, v: &Value) -> CliResult<()> {
        let key = normalize(key);
        if key == "seed" {
            self.seed = v.as_u64().ok_or_else(|| CliError::Value {
                key,
                message: format!("{v} is not a nonnegative integer"),
            })?;
            return Ok(());
        }
        let def = self.def(&key)?;
        let v = check_json(&def, v).map_err(|message| CliError::Value {
            key: key.clone(),
            message,
        })?;
        self.values.insert(key, v);
        Ok(())
    }

    /// Applies a config file: a JSON object, or `key = value` lines with `#`
    /// comments and blank lines.
    pub fn apply_config(&mut self, text: &str) -> CliResult<()> {
        if text.trim_start().starts_with('{') {
            let obj: serde_json::Map<String, Value> = serde_json::from_str(text).map_err(|e| CliError::ConfigLine {
                line: e.line(),
                message: e.to_string(),
            })?;
            for (k, v) in &obj {
                self.set_json(k, v)?;
            }
            return Ok(());
        }
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::ConfigLine {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set_text(k.trim(), v).map_err(|e| match e {
                CliError::UnknownKey { .. } | CliError::Value { .. } => CliError::ConfigLine {
                    line: i + 1,
                    message: e.to_string(),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn f64(&self, key: &str) -> f64 {
        self.values[key].as_f64().expect("validated float")
    }

    pub fn usize(&self, key: &str) -> usize {
        self.values[key].as_u64().expect("validated integer") as usize
    }

    pub fn bool(&self, key: &str) -> bool {
        self.values[key].as_bool().expect("validated bool")
    }

    pub fn str(&self, key: &str) -> &str {
        self.values[key].as_str().expect("validated choice")
    }

    pub fn list(&self, key: &str) -> Vec<f64> {
        self.values[key]
            .as_array()
            .expect("validated list")
            .iter()
            .map(|v| v.as_f64().expect("validated float"))
            .collect()
    }

    /// Resolved configuration as echoed in the manifest.
    pub fn to_json(&self) -> Value {
        let mut m: serde_json::Map<String, Value> = self.values.clone().into_iter().collect();
        m.insert("seed".into(), Value::Number(self.seed.into()));
        Value::Object(m)
    }
}

/// Config keys may use `_` in place of `-`.
fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}
