use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha1::{Digest, Sha1};

use super::CliError;

/// The experiment recipes the orchestrator can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    EdEntropy,
    EdNormdiff,
    RcDecay,
    RcCriticalScan,
    FkCrosscheck,
    FkAm,
    MixingDiag,
    BoundsReport,
    DisorderSweep,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::EdEntropy,
        Experiment::EdNormdiff,
        Experiment::RcDecay,
        Experiment::RcCriticalScan,
        Experiment::FkCrosscheck,
        Experiment::FkAm,
        Experiment::MixingDiag,
        Experiment::BoundsReport,
        Experiment::DisorderSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::EdEntropy => "ed-entropy",
            Experiment::EdNormdiff => "ed-normdiff",
            Experiment::RcDecay => "rc-decay",
            Experiment::RcCriticalScan => "rc-critical-scan",
            Experiment::FkCrosscheck => "fk-crosscheck",
            Experiment::FkAm => "fk-am",
            Experiment::MixingDiag => "mixing-diag",
            Experiment::BoundsReport => "bounds-report",
            Experiment::DisorderSweep => "disorder-sweep",
        }
    }

    /// Keys this experiment accepts, in header order, with their defaults.
    fn keys(self) -> Vec<(&'static str, Fallback)> {
        use Fallback::*;
        let coupling = [("theta", Coupling), ("lambda", Coupling), ("delta", Coupling)];
        let monte_carlo = [
            ("n_samples", Literal("1000")),
            ("n_burnin", Literal("100")),
            ("n_chains", Literal("1")),
            ("thinning", Literal("1")),
        ];
        let mut keys: Vec<(&'static str, Fallback)> = Vec::new();
        match self {
            Experiment::EdEntropy => {
                keys.extend(coupling);
                keys.extend([("m", Required), ("L", Required)]);
            }
            Experiment::EdNormdiff => {
                keys.extend(coupling);
                keys.extend([("m", Required), ("L", Required), ("n_ref", Required)]);
            }
            Experiment::RcDecay => {
                keys.extend(coupling);
                keys.extend([("q", Literal("1")), ("m", Required), ("beta", Beta)]);
                keys.extend(monte_carlo);
            }
            Experiment::RcCriticalScan => {
                keys.extend([("thetas", Literal("0.5,1,1.5")), ("delta", Literal("1")), ("q", Literal("1"))]);
                keys.extend([("m", Required), ("beta", Beta)]);
                keys.extend(monte_carlo);
            }
            Experiment::FkCrosscheck => {
                keys.extend(coupling);
                keys.extend([("m", Required), ("L", Literal("0")), ("beta", Beta)]);
                keys.extend(monte_carlo);
            }
            Experiment::FkAm => {
                keys.extend(coupling);
                keys.extend([("m", Required), ("L", Literal("0")), ("beta", Beta)]);
                keys.extend(monte_carlo);
            }
            Experiment::MixingDiag => {
                keys.extend(coupling);
                keys.extend([
                    ("q", Literal("2")),
                    ("m", Required),
                    ("L", Literal("0")),
                    ("beta", Beta),
                    ("geometry", Literal("parallelogram")),
                    ("k", Literal("1")),
                ]);
                keys.extend(monte_carlo);
            }
            Experiment::BoundsReport => {
                keys.extend(coupling);
                keys.extend([("gamma", Absent), ("C", Literal("1"))]);
            }
            Experiment::DisorderSweep => {
                keys.extend([
                    ("theta", Required),
                    ("delta_min", Literal("1")),
                    ("delta_max", Literal("2")),
                    ("draws", Literal("5")),
                    ("q", Literal("1")),
                    ("m", Required),
                    ("beta", Beta),
                ]);
                keys.extend(monte_carlo);
            }
        }
        keys.extend([("seed", Literal("0")), ("output", Absent)]);
        keys
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fallback {
    Required,
    /// May be left out; it then does not appear in the resolved spec.
    Absent,
    Literal(&'static str),
    /// Resolved together from `theta`, `lambda` and `delta`.
    Coupling,
    /// `6 · max(1/δ, 1/λ)`, maximised over every coupling of the run.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Float,
    Int,
    IntList,
    FloatList,
    Word(&'static [&'static str]),
    Text,
}

fn kind_of(key: &str) -> Option<Kind> {
    Some(match key {
        "theta" | "lambda" | "delta" | "beta" | "q" | "gamma" | "C" | "delta_min" | "delta_max" => Kind::Float,
        "n_ref" | "n_samples" | "n_burnin" | "n_chains" | "thinning" | "seed" | "k" | "draws" => Kind::Int,
        "m" | "L" => Kind::IntList,
        "thetas" => Kind::FloatList,
        "geometry" => Kind::Word(&["equator", "parallelogram"]),
        "experiment" => Kind::Word(&[
            "ed-entropy",
            "ed-normdiff",
            "rc-decay",
            "rc-critical-scan",
            "fk-crosscheck",
            "fk-am",
            "mixing-diag",
            "bounds-report",
            "disorder-sweep",
        ]),
        "output" => Kind::Text,
        _ => return None,
    })
}

/// A typed configuration value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    IntList(Vec<u64>),
    FloatList(Vec<f64>),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
        }
        match self {
            Value::Float(x) => write!(f, "{x}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::IntList(v) => f.write_str(&join(v)),
            Value::FloatList(v) => f.write_str(&join(v)),
            Value::Text(s) => f.write_str(s),
        }
    }
}

fn parse_float(key: &str, s: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Config(format!("`{key}` expects a finite number, got `{s}`")))
}

fn parse_int(key: &str, s: &str) -> Result<u64, CliError> {
    s.parse::<u64>()
        .map_err(|_| CliError::Config(format!("`{key}` expects a non-negative integer, got `{s}`")))
}

/// Comma-separated items, each an integer `n` or an inclusive range `a..b`.
fn parse_int_list(key: &str, s: &str) -> Result<Vec<u64>, CliError> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (parse_int(key, a.trim())?, parse_int(key, b.trim())?);
                if a > b {
                    return Err(CliError::Config(format!("`{key}`: empty range `{item}`")));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_int(key, item)?),
        }
    }
    Ok(out)
}

impl Value {
    fn parse(key: &str, kind: Kind, s: &str) -> Result<Value, CliError> {
        Ok(match kind {
            Kind::Float => Value::Float(parse_float(key, s)?),
            Kind::Int => Value::Int(parse_int(key, s)?),
            Kind::IntList => Value::IntList(parse_int_list(key, s)?),
            Kind::FloatList => Value::FloatList(
                s.split(',').map(|x| parse_float(key, x.trim())).collect::<Result<_, _>>()?,
            ),
            Kind::Word(options) => {
                if !options.contains(&s) {
                    return Err(CliError::Config(format!(
                        "`{key}` must be one of {}, got `{s}`",
                        options.join(", ")
                    )));
                }
                Value::Text(s.to_string())
            }
            Kind::Text => {
                if s.is_empty() {
                    return Err(CliError::Config(format!("`{key}` must not be empty")));
                }
                Value::Text(s.to_string())
            }
        })
    }
}

/// Raw `key = value` pairs in file order, with duplicates and unknown keys rejected.
pub fn parse_entries(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if kind_of(key).is_none() {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", i + 1)));
        }
        if entries.iter().any(|(k, _)| k == key) {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
        }
        entries.push((key.to_string(), value.to_string()));
    }
    Ok(entries)
}

/// A fully resolved experiment: every key it uses, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    values: Vec<(&'static str, Value)>,
}

impl ExperimentSpec {
    /// Resolve raw entries for `experiment`. Later entries override earlier ones,
    /// which lets command-line settings override a configuration file.
    pub fn resolve(experiment: Experiment, entries: &[(String, String)]) -> Result<Self, CliError> {
        let keys = experiment.keys();
        let mut given: Vec<(&'static str, Value)> = Vec::new();
        for (key, raw) in entries {
            let kind = kind_of(key).ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
            if key == "experiment" {
                if raw != experiment.name() {
                    return Err(CliError::Config(format!(
                        "configuration is for `{raw}` but `{experiment}` was requested"
                    )));
                }
                continue;
            }
            let name = keys
                .iter()
                .map(|(k, _)| *k)
                .find(|k| k == key)
                .ok_or_else(|| CliError::Config(format!("key `{key}` is not used by `{experiment}`")))?;
            let value = Value::parse(key, kind, raw)?;
            given.retain(|(k, _)| *k != name);
            given.push((name, value));
        }
        let lookup = |k: &str| given.iter().find(|(n, _)| *n == k).map(|(_, v)| v.clone());
        let mut values = Vec::new();
        let coupling = if keys.iter().any(|(_, d)| *d == Fallback::Coupling) {
            Some(resolve_coupling(
                lookup("theta").map(float),
                lookup("lambda").map(float),
                lookup("delta").map(float),
            )?)
        } else {
            None
        };
        for (key, default) in &keys {
            let value = if *default == Fallback::Coupling {
                let (theta, lambda, delta) = coupling.expect("coupling keys resolved");
                Some(Value::Float(match *key {
                    "theta" => theta,
                    "lambda" => lambda,
                    _ => delta,
                }))
            } else {
                match (lookup(key), default) {
                    (Some(v), _) => Some(v),
                    (None, Fallback::Required) => {
                        return Err(CliError::Config(format!("`{experiment}` requires `{key}`")));
                    }
                    (None, Fallback::Literal(text)) => {
                        let v = Value::parse(key, kind_of(key).expect("known key"), text)?;
                        log::info!("default {key} = {v}");
                        Some(v)
                    }
                    (None, _) => None,
                }
            };
            if let Some(v) = value {
                values.push((*key, v));
            }
        }
        let mut spec = ExperimentSpec { experiment, values };
        if keys.iter().any(|(k, d)| *k == "beta" && *d == Fallback::Beta) && spec.get("beta").is_none() {
            let beta = spec
                .couplings()
                .iter()
                .map(|&(l, d)| crate::fkising::default_beta(l, d))
                .fold(0.0, f64::max);
            log::info!("default beta = {beta}");
            let at = spec.values.iter().position(|(k, _)| *k == "m").map_or(spec.values.len(), |i| i + 1);
            spec.values.insert(at, ("beta", Value::Float(beta)));
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Parse and resolve a configuration text.
    pub fn from_text(experiment: Experiment, text: &str) -> Result<Self, CliError> {
        Self::resolve(experiment, &parse_entries(text)?)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Some(Value::Float(x)) => *x,
            other => panic!("`{key}` is not a resolved number: {other:?}"),
        }
    }

    pub fn float_opt(&self, key: &str) -> Option<f64> {
        self.get(key).map(|_| self.float(key))
    }

    pub fn int(&self, key: &str) -> u64 {
        match self.get(key) {
            Some(Value::Int(n)) => *n,
            other => panic!("`{key}` is not a resolved integer: {other:?}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn ints(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            Some(Value::IntList(v)) => v.iter().map(|&n| n as usize).collect(),
            other => panic!("`{key}` is not a resolved list: {other:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            Some(Value::FloatList(v)) => v.clone(),
            other => panic!("`{key}` is not a resolved list: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("seed")
    }

    /// `(λ, δ)` for every coupling the run touches.
    pub fn couplings(&self) -> Vec<(f64, f64)> {
        match self.experiment {
            Experiment::RcCriticalScan => {
                let delta = self.float("delta");
                self.floats("thetas").iter().map(|t| (t * delta, delta)).collect()
            }
            Experiment::DisorderSweep => {
                let theta = self.float("theta");
                vec![(theta * self.float("delta_min"), self.float("delta_min"))]
            }
            _ => vec![(self.float("lambda"), self.float("delta"))],
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        for (key, value) in &self.values {
            match (*key, value) {
                ("theta" | "lambda" | "delta" | "beta" | "gamma" | "C" | "delta_min", Value::Float(x)) if *x <= 0.0 => {
                    return bad(format!("`{key}` must be positive, got {x}"));
                }
                ("thetas", Value::FloatList(v)) if v.iter().any(|x| *x <= 0.0) => {
                    return bad("`thetas` must all be positive".into());
                }
                ("q", Value::Float(q)) if *q < 1.0 => return bad(format!("`q` must be at least 1, got {q}")),
                ("n_samples" | "n_chains" | "thinning" | "draws", Value::Int(0)) => {
                    return bad(format!("`{key}` must be positive"));
                }
                _ => {}
            }
        }
        if let (Some(lo), Some(hi)) = (self.float_opt("delta_min"), self.float_opt("delta_max")) {
            if hi < lo {
                return bad(format!("`delta_max` {hi} is below `delta_min` {lo}"));
            }
        }
        if self.experiment == Experiment::FkCrosscheck {
            for key in ["m", "L"] {
                if self.ints(key).len() != 1 {
                    return bad(format!("`fk-crosscheck` takes a single `{key}`"));
                }
            }
        }
        Ok(())
    }

    /// One `key = value` line per resolved key, preceded by the experiment.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("experiment = {}\n", self.experiment);
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// Git blob hash of [`canonical_text`](Self::canonical_text).
    pub fn content_hash(&self) -> String {
        let text = self.canonical_text();
        let mut h = Sha1::new();
        h.update(format!("blob {}\0", text.len()).as_bytes());
        h.update(text.as_bytes());
        format!("{:x}", h.finalize())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &Value)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }
}

fn float(v: Value) -> f64 {
    match v {
        Value::Float(x) => x,
        _ => unreachable!("coupling keys are numbers"),
    }
}

/// `(θ, λ, δ)` from any consistent subset. `θ` alone means `λ = θ, δ = 1`.
pub fn resolve_coupling(theta: Option<f64>, lambda: Option<f64>, delta: Option<f64>) -> Result<(f64, f64, f64), CliError> {
    for (name, v) in [("theta", theta), ("lambda", lambda), ("delta", delta)] {
        if let Some(x) = v {
            if x <= 0.0 {
                return Err(CliError::Config(format!("`{name}` must be positive, got {x}")));
            }
        }
    }
    let (lambda, delta) = match (theta, lambda, delta) {
        (Some(t), None, None) => (t, 1.0),
        (Some(t), None, Some(d)) => (t * d, d),
        (Some(t), Some(l), None) => (l, l / t),
        (Some(t), Some(l), Some(d)) => {
            if ((l / d) - t).abs() > 1e-12 * t {
                return Err(CliError::Config(format!(
                    "theta = {t} is inconsistent with lambda / delta = {}",
                    l / d
                )));
            }
            (l, d)
        }
        (None, Some(l), Some(d)) => (l, d),
        (None, Some(l), None) => (l, 1.0),
        (None, None, _) => return Err(CliError::Config("one of `theta` or `lambda` is required".into())),
    };
    Ok((lambda / delta, lambda, delta))
}

/// Read and parse a configuration file.
pub fn parse_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_entries(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_with_delta_resolves_lambda() {
        let s = ExperimentSpec::from_text(Experiment::EdEntropy, "theta = 0.5\ndelta = 1\nm = 1\nL = 1\n").unwrap();
        assert_eq!(s.float("lambda"), 0.5);
        let s = ExperimentSpec::from_text(Experiment::EdEntropy, "theta = 0.5\ndelta = 2\nm = 1\nL = 1").unwrap();
        assert_eq!((s.float("lambda"), s.float("delta")), (1.0, 2.0));
    }

    #[test]
    fn inconsistent_coupling_is_an_error() {
        let e = ExperimentSpec::from_text(Experiment::EdEntropy, "theta = 0.5\nlambda = 1\ndelta = 1\nm = 1\nL = 1");
        assert!(matches!(e, Err(CliError::Config(_))));
        assert!(resolve_coupling(None, None, Some(1.0)).is_err());
        assert_eq!(resolve_coupling(Some(2.0), Some(1.0), None).unwrap(), (2.0, 1.0, 0.5));
    }

    #[test]
    fn seed_defaults_to_zero_and_is_echoed() {
        let s = ExperimentSpec::from_text(Experiment::EdEntropy, "theta = 0.3\nm = 4\nL = 1..8").unwrap();
        assert_eq!(s.seed(), 0);
        assert!(s.canonical_text().contains("seed = 0\n"));
        assert_eq!(s.ints("L"), (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn malformed_configs_are_rejected() {
        let cases = [
            "theta = 0.3\nm = 4\nL = 1\nbogus = 1",
            "theta = 0.3\ntheta = 0.3\nm = 4\nL = 1",
            "theta = abc\nm = 4\nL = 1",
            "theta = 0.3\nm = 4.5\nL = 1",
            "theta = 0.3\nm = 4\nL = 1\nn_samples = 10",
            "theta = 0.3\nL = 1",
            "theta = 0.3 m = 4",
            "theta = -1\nm = 4\nL = 1",
            "experiment = fk-am\ntheta = 0.3\nm = 4\nL = 1",
        ];
        for c in cases {
            assert!(matches!(ExperimentSpec::from_text(Experiment::EdEntropy, c), Err(CliError::Config(_))), "{c}");
        }
    }

    #[test]
    fn comments_and_ranges() {
        let s = ExperimentSpec::from_text(
            Experiment::RcDecay,
            "# decay run\ntheta = 0.5 # subcritical\nm = 4,8..10\nn_samples = 20\n",
        )
        .unwrap();
        assert_eq!(s.ints("m"), vec![4, 8, 9, 10]);
        assert_eq!(s.float("q"), 1.0);
        assert_eq!(s.float("beta"), 12.0);
        assert_eq!(s.usize("n_samples"), 20);
    }

    #[test]
    fn hash_is_a_git_blob_hash() {
        let s = ExperimentSpec::from_text(Experiment::BoundsReport, "lambda = 1\ndelta = 1").unwrap();
        let text = s.canonical_text();
        let mut h = Sha1::new();
        h.update(format!("blob {}\0{text}", text.len()));
        assert_eq!(s.content_hash(), format!("{:x}", h.finalize()));
        assert_eq!(s.content_hash().len(), 40);
        // the empty blob has a well-known hash
        let mut e = Sha1::new();
        e.update(b"blob 0\0");
        assert_eq!(format!("{:x}", e.finalize()), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    }

    #[test]
    fn later_entries_override() {
        let mut entries = parse_entries("theta = 0.3\nm = 4\nL = 1\n").unwrap();
        entries.push(("m".into(), "2".into()));
        let s = ExperimentSpec::resolve(Experiment::EdEntropy, &entries).unwrap();
        assert_eq!(s.ints("m"), vec![2]);
    }
}
