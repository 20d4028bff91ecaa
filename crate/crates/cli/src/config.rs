//! Plain-text run configuration: one `key = value` per line, `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use blowup_core::criteria::Theorem;
use blowup_core::model::{NonlinearitySpec, SpatialDomain};
use blowup_core::simulate::{
    ForcingConfig, InitConfig, InitKind, IntegrationOptions, ProfileShape, ScaleChoice,
    ScenarioConfig, VelocityKind,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyKind {
    Real,
    Count,
    Choice(&'static [&'static str]),
    RealOrAuto,
    Path,
}

pub const KEYS: &[(&str, KeyKind)] = &[
    ("scenario.theorem", KeyKind::Choice(&["1", "2"])),
    ("problem.b", KeyKind::Real),
    ("problem.gamma", KeyKind::Real),
    ("nonlinearity.kind", KeyKind::Choice(&["power", "zero"])),
    ("nonlinearity.p", KeyKind::Real),
    ("nonlinearity.alpha", KeyKind::Real),
    ("forcing.kind", KeyKind::Choice(&["none", "exp"])),
    ("forcing.amplitude", KeyKind::Real),
    ("forcing.lambda", KeyKind::Real),
    (
        "forcing.profile",
        KeyKind::Choice(&["constant", "sine", "robin"]),
    ),
    ("domain.kind", KeyKind::Choice(&["interval", "rectangle"])),
    ("domain.length", KeyKind::Real),
    ("domain.length_y", KeyKind::Real),
    ("grid.n", KeyKind::Count),
    ("grid.n_y", KeyKind::Count),
    ("init.kind", KeyKind::Choice(&["remark", "file", "zero"])),
    (
        "init.profile",
        KeyKind::Choice(&["constant", "sine", "robin"]),
    ),
    ("init.scale", KeyKind::RealOrAuto),
    ("init.profile_file", KeyKind::Path),
    (
        "init.velocity",
        KeyKind::Choice(&["remark", "growth", "zero"]),
    ),
    ("time.dt", KeyKind::Real),
    ("time.t_max", KeyKind::Real),
    ("time.record_every", KeyKind::Count),
    ("detect.threshold", KeyKind::Real),
    ("detect.node_escape", KeyKind::Real),
    ("theorem2.c0", KeyKind::Real),
    ("report.tolerance", KeyKind::Real),
];

pub fn key_kind(key: &str) -> Option<KeyKind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Real(f64),
    Count(usize),
    Word(String),
    Auto,
    Path(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Real(x) => write!(f, "{x:e}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Word(w) => f.write_str(w),
            Value::Auto => f.write_str("auto"),
            Value::Path(p) => f.write_str(p),
        }
    }
}

fn parse_real(text: &str) -> Option<f64> {
    let ok = !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
    if !ok {
        return None;
    }
    text.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses `text` as a value for `key`.
pub fn parse_value(key: &str, text: &str) -> Result<Value, String> {
    let kind = key_kind(key).ok_or_else(|| format!("unknown key `{key}`"))?;
    match kind {
        KeyKind::Real => parse_real(text)
            .map(Value::Real)
            .ok_or_else(|| format!("`{key}` expects a decimal number, got `{text}`")),
        KeyKind::Count => text
            .parse::<usize>()
            .map(Value::Count)
            .map_err(|_| format!("`{key}` expects a non-negative integer, got `{text}`")),
        KeyKind::Choice(choices) => {
            if choices.contains(&text) {
                Ok(Value::Word(text.to_string()))
            } else {
                Err(format!(
                    "`{key}` expects one of {}, got `{text}`",
                    choices.join("|")
                ))
            }
        }
        KeyKind::RealOrAuto => {
            if text == "auto" {
                Ok(Value::Auto)
            } else {
                parse_real(text)
                    .map(Value::Real)
                    .ok_or_else(|| format!("`{key}` expects a number or `auto`, got `{text}`"))
            }
        }
        KeyKind::Path => {
            if text.is_empty() {
                Err(format!("`{key}` expects a path"))
            } else {
                Ok(Value::Path(text.to_string()))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub entries: BTreeMap<String, Value>,
    /// Directory that relative paths are resolved against.
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| CliError::Config(format!("line {line_no}: {m}"));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed = parse_value(key, value).map_err(err)?;
            if entries.insert(key.to_string(), parsed).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self {
            entries,
            base_dir: None,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Sorted `key = value` lines; parses back to the same entries.
    pub fn to_canonical(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.entries.insert(key.to_string(), value);
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        Ok(match self.get(key) {
            None => None,
            Some(Value::Real(x)) => Some(*x),
            Some(other) => {
                return Err(CliError::Config(format!(
                    "`{key}` is not a number: {other}"
                )))
            }
        })
    }

    fn req_real(&self, key: &str) -> Result<f64, CliError> {
        self.real(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    fn count(&self, key: &str) -> Option<usize> {
        match self.get(key) {
            Some(Value::Count(n)) => Some(*n),
            _ => None,
        }
    }

    fn word(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Word(w)) => Some(w),
            _ => None,
        }
    }

    fn require(&self, key: &str) -> Result<(), CliError> {
        if self.entries.contains_key(key) {
            Ok(())
        } else {
            Err(CliError::Config(format!("missing required key `{key}`")))
        }
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let path = PathBuf::from(p);
        match &self.base_dir {
            Some(base) if path.is_relative() => base.join(path),
            _ => path,
        }
    }

    /// Builds the scenario, reading the profile file if one is named.
    pub fn to_scenario(&self) -> Result<ScenarioConfig, CliError> {
        for key in [
            "scenario.theorem",
            "problem.b",
            "problem.gamma",
            "domain.length",
            "grid.n",
            "init.kind",
            "time.dt",
            "time.t_max",
        ] {
            self.require(key)?;
        }
        let theorem = match self.word("scenario.theorem") {
            Some("2") => Theorem::Two,
            _ => Theorem::One,
        };
        let n = self.count("grid.n").unwrap_or(0);
        let length = self.req_real("domain.length")?;
        let domain = match self.word("domain.kind").unwrap_or("interval") {
            "rectangle" => {
                let ly = self.req_real("domain.length_y")?;
                SpatialDomain::rectangle(length, ly, n, self.count("grid.n_y").unwrap_or(n))
            }
            _ => SpatialDomain::interval(length, n),
        };

        let nonlinearity = match self.word("nonlinearity.kind").unwrap_or("power") {
            "zero" => NonlinearitySpec::zero(self.real("nonlinearity.alpha")?.unwrap_or(1.0)),
            _ => {
                let p = self.req_real("nonlinearity.p")?;
                let mut nl = NonlinearitySpec::power(p);
                if let Some(a) = self.real("nonlinearity.alpha")? {
                    nl.alpha = a;
                }
                nl
            }
        };

        let shape = |key: &str| match self.word(key).unwrap_or("constant") {
            "sine" => ProfileShape::Sine,
            "robin" => ProfileShape::RobinMode,
            _ => ProfileShape::Constant,
        };
        let forcing = match self.word("forcing.kind").unwrap_or("none") {
            "exp" => ForcingConfig::ExpDecay {
                amplitude: self.req_real("forcing.amplitude")?,
                lambda: self.req_real("forcing.lambda")?,
                profile: shape("forcing.profile"),
            },
            _ => ForcingConfig::None,
        };

        let kind = self.word("init.kind").unwrap_or("remark");
        let profile = if kind == "file" {
            let Some(Value::Path(p)) = self.get("init.profile_file") else {
                return Err(CliError::Config(
                    "init.kind = file needs `init.profile_file`".into(),
                ));
            };
            let path = self.resolve(p);
            let values = read_profile(&path)?;
            if values.len() != domain.node_count() {
                return Err(CliError::Config(format!(
                    "{}: {} values, expected {} (grid.n + 1 per axis)",
                    path.display(),
                    values.len(),
                    domain.node_count()
                )));
            }
            ProfileShape::Values(values)
        } else {
            shape("init.profile")
        };
        let scale = match self.get("init.scale") {
            Some(Value::Real(s)) => ScaleChoice::Fixed(*s),
            Some(Value::Auto) => ScaleChoice::Auto,
            Some(_) => unreachable!("init.scale is parsed as a number or auto"),
            None if kind == "zero" => ScaleChoice::Fixed(1.0),
            None => return Err(CliError::Config("missing required key `init.scale`".into())),
        };
        let velocity = self.word("init.velocity").map(|v| match v {
            "growth" => VelocityKind::Growth,
            "zero" => VelocityKind::Zero,
            _ => VelocityKind::Remark,
        });
        let init = InitConfig {
            kind: if kind == "zero" {
                InitKind::Zero
            } else {
                InitKind::Profile
            },
            profile,
            scale,
            velocity,
        };

        let defaults = IntegrationOptions::default();
        let integration = IntegrationOptions {
            dt: self.req_real("time.dt")?,
            t_max: self.req_real("time.t_max")?,
            record_every: self
                .count("time.record_every")
                .unwrap_or(defaults.record_every),
            threshold: self.real("detect.threshold")?.unwrap_or(defaults.threshold),
            node_escape: self
                .real("detect.node_escape")?
                .unwrap_or(defaults.node_escape),
            ..defaults
        };
        if !(integration.dt > 0.0) || !(integration.t_max > 0.0) {
            return Err(CliError::Config(
                "time.dt and time.t_max must be positive".into(),
            ));
        }
        if integration.record_every == 0 {
            return Err(CliError::Config(
                "time.record_every must be at least 1".into(),
            ));
        }
        if !(integration.threshold > 0.0 && integration.node_escape > 0.0) {
            return Err(CliError::Config(
                "detect.threshold and detect.node_escape must be positive".into(),
            ));
        }

        Ok(ScenarioConfig {
            theorem,
            b: self.req_real("problem.b")?,
            gamma: self.req_real("problem.gamma")?,
            domain,
            nonlinearity,
            forcing,
            init,
            integration,
            theorem2_c0: self.real("theorem2.c0")?.unwrap_or(1.0),
            tolerance_report: self.real("report.tolerance")?.unwrap_or(0.0),
        })
    }
}

/// Single-column decimal node values; blank lines and `#` comments skipped.
pub fn read_profile(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v = parse_real(line).ok_or_else(|| {
            CliError::Config(format!(
                "{}: line {}: bad value `{line}`",
                path.display(),
                idx + 1
            ))
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Theorem-1 preset as a config file.
pub const THEOREM1_PRESET: &str = "\
scenario.theorem = 1
problem.b = 0.1
problem.gamma = 1
nonlinearity.kind = power
nonlinearity.p = 2
forcing.kind = none
domain.kind = interval
domain.length = 1
grid.n = 100
init.kind = remark
init.profile = constant
init.scale = auto
time.dt = 1e-3
time.t_max = 5
time.record_every = 1
detect.threshold = 1e8
";

/// Theorem-2 preset as a config file.
pub const THEOREM2_PRESET: &str = "\
scenario.theorem = 2
problem.b = -0.2
problem.gamma = 1
nonlinearity.kind = power
nonlinearity.p = 2
forcing.kind = none
domain.kind = interval
domain.length = 1
grid.n = 100
init.kind = remark
init.profile = constant
init.scale = auto
init.velocity = growth
time.dt = 1e-3
time.t_max = 5
time.record_every = 1
detect.threshold = 1e8
theorem2.c0 = 1
";
