//! Run configuration: a flat `key = value` file, `DBARG_*` environment
//! variables and command-line flags, merged in that order (later wins).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use dbarg_core::PsiSpec;
use thiserror::Error;

/// Every key accepted by the config file, the environment and the flags.
pub const KEYS: &[&str] = &[
    "family",
    "command",
    "q",
    "sigma",
    "lambda-minus",
    "lambda-plus",
    "const",
    "coeffs",
    "a",
    "mu",
    "dim",
    "offset",
    "tol",
    "out",
    "csv",
    "x-min",
    "x-max",
    "points",
    "n-max",
    "u-min",
    "u-max",
];

pub const ENV_PREFIX: &str = "DBARG_";

/// Where a value came from, for error messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    File { path: PathBuf, line: usize },
    Env(String),
    Flag(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File { path, line } => write!(f, "{}:{}", path.display(), line),
            Source::Env(var) => write!(f, "environment variable {var}"),
            Source::Flag(name) => write!(f, "flag --{name}"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("{path}:{line}: expected `key = value`, found `{text}`")]
    Syntax { path: PathBuf, line: usize, text: String },
    #[error("unknown key `{key}` ({origin})")]
    UnknownKey { key: String, origin: Source },
    #[error("duplicate key `{key}` ({origin})")]
    Duplicate { key: String, origin: Source },
    #[error("invalid value `{value}` for `{key}` ({origin}): {reason}")]
    Value {
        key: String,
        value: String,
        origin: Source,
        reason: String,
    },
    #[error("missing `{0}`")]
    Missing(&'static str),
    #[error("`{key}` does not apply to family {family}")]
    Inapplicable { key: String, family: String },
    #[error("invalid psi: {0}")]
    Psi(String),
    #[error("invalid grid: {0}")]
    Grid(String),
}

/// Normalize `lambda_minus`, `LAMBDA-MINUS`, … to the canonical key.
fn canonical(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

fn known(key: &str) -> bool {
    KEYS.contains(&key)
}

/// Raw values keyed by canonical key, each with its origin.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Layer {
    values: BTreeMap<String, (String, Source)>,
}

impl Layer {
    pub fn parse_file(path: &Path) -> Result<Layer, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Layer::parse_str(&text, path)
    }

    pub fn parse_str(text: &str, path: &Path) -> Result<Layer, ConfigError> {
        let mut layer = Layer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('[') {
                // blank, comment or an INI section header (sections carry no meaning)
                continue;
            }
            let source = Source::File {
                path: path.to_path_buf(),
                line: i + 1,
            };
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    path: path.to_path_buf(),
                    line: i + 1,
                    text: raw.trim().to_string(),
                });
            };
            let key = canonical(k);
            if !known(&key) {
                return Err(ConfigError::UnknownKey { key, origin: source });
            }
            if layer.values.contains_key(&key) {
                return Err(ConfigError::Duplicate { key, origin: source });
            }
            layer.values.insert(key, (unquote(v.trim()).to_string(), source));
        }
        Ok(layer)
    }

    /// `DBARG_Q=1.2` → `q = 1.2`. Variables without the prefix are ignored.
    pub fn from_env<I: IntoIterator<Item = (String, String)>>(vars: I) -> Result<Layer, ConfigError> {
        let mut layer = Layer::default();
        for (var, value) in vars {
            let Some(rest) = var.strip_prefix(ENV_PREFIX) else { continue };
            let key = canonical(rest);
            let source = Source::Env(var.clone());
            if !known(&key) {
                return Err(ConfigError::UnknownKey { key, origin: source });
            }
            layer.values.insert(key, (value, source));
        }
        Ok(layer)
    }

    pub fn set_flag(&mut self, key: &str, value: Option<&str>) {
        if let Some(v) = value {
            debug_assert!(known(key), "{key}");
            self.values.insert(key.to_string(), (v.to_string(), Source::Flag(key.to_string())));
        }
    }

    /// `self` overridden by `other`.
    pub fn overlay(mut self, other: Layer) -> Layer {
        self.values.extend(other.values);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    fn parsed<T, F>(&self, key: &str, parse: F) -> Result<Option<T>, ConfigError>
    where
        F: Fn(&str) -> Result<T, String>,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, source)) => parse(v).map(Some).map_err(|reason| ConfigError::Value {
                key: key.to_string(),
                value: v.clone(),
                origin: source.clone(),
                reason,
            }),
        }
    }
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v)
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.trim().parse().map_err(|_| "not a number".to_string())?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

/// `[0, 0, 0, 1]` or `0,0,0,1`.
fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    let inner = v.trim();
    let inner = inner.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(inner);
    if inner.trim().is_empty() {
        return Err("empty list".into());
    }
    inner.split(',').map(parse_f64).collect()
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.trim().parse().map_err(|_| "not a non-negative integer".to_string())
}

fn parse_i64(v: &str) -> Result<i64, String> {
    v.trim().parse().map_err(|_| "not an integer".to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Command {
    Classify,
    Domain,
    Weight,
    Verify,
    Kernel,
    Export,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Domain => "domain",
            Command::Weight => "weight",
            Command::Verify => "verify",
            Command::Kernel => "kernel",
            Command::Export => "export",
        }
    }

    fn parse(v: &str) -> Result<Command, String> {
        <Command as clap::ValueEnum>::from_str(v.trim(), true).map_err(|_| {
            "expected one of classify, domain, weight, verify, kernel, export".to_string()
        })
    }
}

/// Families selectable by name, with the keys each one takes.
const FAMILIES: &[(&str, &[&str])] = &[
    ("affine", &["sigma"]),
    ("qlinear", &["lambda-minus", "lambda-plus", "const", "q"]),
    ("qinverse", &["lambda-minus", "q"]),
    ("shiftexp", &["a", "q"]),
    ("qosc", &["sigma", "q"]),
    ("qosc1", &["sigma", "q"]),
    ("explog", &["coeffs"]),
    ("qbracket", &["q"]),
    ("qparen", &["q"]),
    ("poly", &["coeffs"]),
];

const PSI_KEYS: &[&str] = &["q", "sigma", "lambda-minus", "lambda-plus", "const", "coeffs", "a"];

/// Validated configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub family: String,
    /// Family parameters in the order the family lists them.
    pub params: Vec<(String, ParamValue)>,
    pub psi: PsiSpec,
    pub dim: usize,
    /// Lowest basis index of truncated matrices; only used when the spectrum
    /// has no edge to pin the window.
    pub offset: Option<i64>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub n_max: i64,
    pub u_min: f64,
    pub u_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Scalar(f64),
    List(Vec<f64>),
}

impl RunConfig {
    /// Validate the merged layer. `command` overrides the `command` key.
    pub fn from_layer(layer: &Layer, command: Option<Command>) -> Result<RunConfig, ConfigError> {
        let command = match command {
            Some(c) => c,
            None => layer.parsed("command", Command::parse)?.ok_or(ConfigError::Missing("command"))?,
        };
        let family = layer.get("family").ok_or(ConfigError::Missing("family"))?.trim().to_ascii_lowercase();
        let Some((_, wanted)) = FAMILIES.iter().find(|(name, _)| *name == family) else {
            let names: Vec<&str> = FAMILIES.iter().map(|(n, _)| *n).collect();
            return Err(ConfigError::Value {
                key: "family".into(),
                value: family.clone(),
                origin: layer.values["family"].1.clone(),
                reason: format!("expected one of {}", names.join(", ")),
            });
        };
        if let Some(stray) = layer.keys().find(|k| PSI_KEYS.contains(k) && !wanted.contains(k)) {
            return Err(ConfigError::Inapplicable {
                key: stray.to_string(),
                family,
            });
        }
        let mut params = Vec::new();
        for &key in *wanted {
            let value = if key == "coeffs" {
                layer.parsed(key, parse_list)?.map(ParamValue::List)
            } else {
                layer.parsed(key, parse_f64)?.map(ParamValue::Scalar)
            };
            // the additive constant of qlinear defaults to 0
            let value = match (value, key) {
                (Some(v), _) => v,
                (None, "const" | "lambda-minus" | "lambda-plus") if family == "qlinear" => ParamValue::Scalar(0.0),
                (None, _) => return Err(ConfigError::Missing(static_key(key))),
            };
            params.push((key.to_string(), value));
        }
        let mu = layer.parsed("mu", parse_f64)?.unwrap_or(0.0);
        let psi = build_psi(&family, &params, mu).map_err(|e| ConfigError::Psi(e.to_string()))?;

        let positive = |key: &'static str, default: f64| -> Result<f64, ConfigError> {
            let v = layer.parsed(key, parse_f64)?.unwrap_or(default);
            if v > 0.0 {
                Ok(v)
            } else {
                Err(ConfigError::Value {
                    key: key.into(),
                    value: v.to_string(),
                    origin: layer.values[key].1.clone(),
                    reason: "must be positive".into(),
                })
            }
        };
        let dim = layer.parsed("dim", parse_usize)?.unwrap_or(30);
        if dim == 0 {
            return Err(ConfigError::Value {
                key: "dim".into(),
                value: "0".into(),
                origin: layer.values["dim"].1.clone(),
                reason: "must be at least 1".into(),
            });
        }
        let tol = match layer.get("tol") {
            None => None,
            Some(_) => Some(positive("tol", 1.0)?),
        };
        let x_min = positive("x-min", 1e-6)?;
        let x_max = positive("x-max", 1e3)?;
        if !(x_max > x_min) {
            return Err(ConfigError::Grid(format!("x-max ({x_max}) must exceed x-min ({x_min})")));
        }
        let points = layer.parsed("points", parse_usize)?.unwrap_or(501).max(2);
        let n_max = layer.parsed("n-max", parse_i64)?.unwrap_or(10);
        if n_max < 0 {
            return Err(ConfigError::Value {
                key: "n-max".into(),
                value: n_max.to_string(),
                origin: layer.values["n-max"].1.clone(),
                reason: "must be non-negative".into(),
            });
        }
        let u_min = layer.parsed("u-min", parse_f64)?.unwrap_or(0.0);
        let u_max = layer.parsed("u-max", parse_f64)?.unwrap_or(4.0);
        if !(u_max > u_min) {
            return Err(ConfigError::Grid(format!("u-max ({u_max}) must exceed u-min ({u_min})")));
        }
        Ok(RunConfig {
            command,
            family,
            params,
            psi,
            dim,
            offset: layer.parsed("offset", parse_i64)?,
            tol,
            out: layer.get("out").map(PathBuf::from),
            csv: layer.get("csv").map(PathBuf::from),
            x_min,
            x_max,
            points,
            n_max,
            u_min,
            u_max,
        })
    }

    pub fn scalar(&self, key: &str) -> Option<f64> {
        self.params.iter().find_map(|(k, v)| match v {
            ParamValue::Scalar(x) if k == key => Some(*x),
            _ => None,
        })
    }
}

fn static_key(key: &str) -> &'static str {
    KEYS.iter().copied().find(|k| *k == key).unwrap_or("parameter")
}

fn build_psi(family: &str, params: &[(String, ParamValue)], mu: f64) -> dbarg_core::Result<PsiSpec> {
    let s = |i: usize| match &params[i].1 {
        ParamValue::Scalar(x) => *x,
        ParamValue::List(_) => unreachable!("scalar parameter"),
    };
    let list = || match &params[0].1 {
        ParamValue::List(v) => v.clone(),
        ParamValue::Scalar(_) => unreachable!("list parameter"),
    };
    let psi = match family {
        "affine" => PsiSpec::affine(s(0)),
        "qlinear" => PsiSpec::qlinear(s(0), s(1), s(2), s(3)),
        "qinverse" => PsiSpec::q_inverse_power(s(0), s(1)),
        "shiftexp" => PsiSpec::shifted_exponential(s(0), s(1)),
        "qosc" => PsiSpec::q_oscillator(s(0), s(1)),
        "qosc1" => PsiSpec::q_oscillator_unit(s(0), s(1)),
        "explog" => PsiSpec::exp_poly(list()),
        "qbracket" => PsiSpec::q_bracket(s(0)),
        "qparen" => PsiSpec::q_paren(s(0)),
        "poly" => PsiSpec::poly(list()),
        _ => unreachable!("family checked by caller"),
    }?;
    psi.with_mu(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> Result<Layer, ConfigError> {
        Layer::parse_str(text, Path::new("run.cfg"))
    }

    #[test]
    fn parses_flat_file_with_comments() {
        let l = file("# run\nfamily = qbracket\nq=1.2 # deformation\n\n[extra]\ncommand = verify\n").unwrap();
        let cfg = RunConfig::from_layer(&l, None).unwrap();
        assert_eq!(cfg.command, Command::Verify);
        assert_eq!(cfg.scalar("q"), Some(1.2));
        assert_eq!((cfg.dim, cfg.points, cfg.n_max), (30, 501, 10));
    }

    #[test]
    fn unknown_key_names_key_and_line() {
        let err = file("family=qbracket\nqq=1.2\n").unwrap_err();
        assert_eq!(err.to_string(), "unknown key `qq` (run.cfg:2)");
        let err = file("family qbracket\n").unwrap_err();
        assert!(err.to_string().starts_with("run.cfg:1:"));
    }

    #[test]
    fn precedence_file_env_flag() {
        let f = file("family=qbracket\nq=1.1\ncommand=classify\n").unwrap();
        let e = Layer::from_env([("DBARG_Q".to_string(), "1.2".to_string()), ("HOME".into(), "/".into())]).unwrap();
        let merged = f.clone().overlay(e.clone());
        assert_eq!(RunConfig::from_layer(&merged, None).unwrap().scalar("q"), Some(1.2));
        let mut flags = Layer::default();
        flags.set_flag("q", Some("1.3"));
        let merged = f.overlay(e).overlay(flags);
        assert_eq!(RunConfig::from_layer(&merged, None).unwrap().scalar("q"), Some(1.3));
    }

    #[test]
    fn unknown_env_var_rejected() {
        let err = Layer::from_env([("DBARG_FOO".to_string(), "1".to_string())]).unwrap_err();
        assert!(err.to_string().contains("DBARG_FOO"));
    }

    #[test]
    fn validation_errors() {
        let l = file("family=qlinear\nq=1\nlambda-plus=1\ncommand=classify\n").unwrap();
        let err = RunConfig::from_layer(&l, None).unwrap_err();
        assert!(err.to_string().contains("q ≠ 1 required"), "{err}");
        let l = file("family=qbracket\nq=1.2\nsigma=1\ncommand=classify\n").unwrap();
        assert!(matches!(RunConfig::from_layer(&l, None), Err(ConfigError::Inapplicable { .. })));
        let l = file("family=qbracket\ncommand=classify\n").unwrap();
        assert_eq!(RunConfig::from_layer(&l, None), Err(ConfigError::Missing("q")));
        let l = file("family=qbracket\nq=abc\ncommand=classify\n").unwrap();
        assert!(RunConfig::from_layer(&l, None).unwrap_err().to_string().contains("run.cfg:2"));
    }

    #[test]
    fn coefficient_lists() {
        assert_eq!(parse_list("[0, 0,0,1]").unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(parse_list("1.5,2").unwrap(), vec![1.5, 2.0]);
        assert!(parse_list("[]").is_err());
        let l = file("family=explog\ncoeffs=[0,0,0,1]\n").unwrap();
        let cfg = RunConfig::from_layer(&l, Some(Command::Weight)).unwrap();
        assert_eq!(cfg.params[0].1, ParamValue::List(vec![0.0, 0.0, 0.0, 1.0]));
    }
}
