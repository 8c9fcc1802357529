//! Run configuration: a line-based `key = value` document with one
//! `[command]` section, plus `--key value` overrides from the command line.
//!
//! ```text
//! [verify]
//! lemma = rw_interval
//! n = 5
//! lambda = 0.25
//! n_runs = 20000
//! seed = 42
//! ```
//!
//! Configs are committed as reproducibility artifacts, so parsing is strict:
//! unknown keys, keys a command does not use, and out-of-range values are all
//! rejected with the offending line and column.

use std::fmt;

use thiserror::Error;

use crate::experiments::CiMethod;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Build,
    Simulate,
    Estimate,
    Verify,
    Sweep,
    Oracle,
    Schedule,
}

impl Command {
    pub fn parse(name: &str) -> Option<Command> {
        Some(match name {
            "build" => Command::Build,
            "simulate" => Command::Simulate,
            "estimate" => Command::Estimate,
            "verify" => Command::Verify,
            "sweep" => Command::Sweep,
            "oracle" => Command::Oracle,
            "schedule" => Command::Schedule,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Command::Build => "build",
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
            Command::Schedule => "schedule",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphFamily {
    Interval,
    Star,
    SvTree,
    /// Half of the hub tree on the `line_vertex(1)` side of the cut edge.
    SvPlus,
    /// Half of the hub tree on the `line_vertex(0)` side of the cut edge.
    SvMinus,
}

impl GraphFamily {
    pub fn parse(name: &str) -> Option<GraphFamily> {
        Some(match name {
            "interval" => GraphFamily::Interval,
            "star" => GraphFamily::Star,
            "sv_tree" => GraphFamily::SvTree,
            "sv_plus" => GraphFamily::SvPlus,
            "sv_minus" => GraphFamily::SvMinus,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphFamily::Interval => "interval",
            GraphFamily::Star => "star",
            GraphFamily::SvTree => "sv_tree",
            GraphFamily::SvPlus => "sv_plus",
            GraphFamily::SvMinus => "sv_minus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lemma {
    RwInterval,
    StarExtinction,
    TreeExtinction,
    PathTransmission,
}

impl Lemma {
    pub fn parse(name: &str) -> Option<Lemma> {
        Some(match name {
            "rw_interval" => Lemma::RwInterval,
            "star_extinction" => Lemma::StarExtinction,
            "tree_extinction" => Lemma::TreeExtinction,
            "path_transmission" => Lemma::PathTransmission,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Lemma::RwInterval => "rw_interval",
            Lemma::StarExtinction => "star_extinction",
            Lemma::TreeExtinction => "tree_extinction",
            Lemma::PathTransmission => "path_transmission",
        }
    }
}

/// Initial configuration selector.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum InitSpec {
    #[default]
    Full,
    /// Explicit vertex ids.
    Vertices(Vec<u32>),
}

/// Where a key-value pair came from, for error messages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    /// 1-based document line; 0 means the pair came from a command-line flag.
    pub line: usize,
    /// 1-based column of the offending token on that line.
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "command line")
        } else {
            write!(f, "line {} column {}", self.line, self.column)
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{location}: unknown key `{key}`{}", hint.as_deref().map(|h| format!(" ({h})")).unwrap_or_default())]
    UnknownKey {
        location: Location,
        key: String,
        hint: Option<String>,
    },
    #[error("{location}: bad value for `{key}`: {message}")]
    TypeMismatch {
        location: Location,
        key: String,
        message: String,
    },
    #[error("{location}: command `{command}` requires `{key}`")]
    MissingRequired {
        location: Location,
        command: String,
        key: String,
    },
}

impl ConfigError {
    fn unknown(location: Location, key: &str, hint: Option<String>) -> ConfigError {
        ConfigError::UnknownKey {
            location,
            key: key.to_string(),
            hint,
        }
    }

    fn mismatch(location: Location, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::TypeMismatch {
            location,
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// One `key = value` assignment with its document position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub key: String,
    pub value: String,
    pub key_location: Location,
    pub value_location: Location,
}

impl Pair {
    /// A pair coming from a `--key value` flag rather than a document.
    pub fn from_flag(key: &str, value: &str) -> Pair {
        let loc = Location { line: 0, column: 0 };
        Pair {
            key: key.to_string(),
            value: value.to_string(),
            key_location: loc,
            value_location: loc,
        }
    }
}

/// A parsed document: the section command and its assignments, unvalidated.
#[derive(Clone, Debug, PartialEq)]
pub struct Document {
    pub command: Command,
    pub section_location: Location,
    pub pairs: Vec<Pair>,
}

/// Parses the raw document structure without interpreting any values.
pub fn parse_document(text: &str) -> Result<Document, ConfigError> {
    let mut command: Option<(Command, Location)> = None;
    let mut pairs = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let column = raw.len() - raw.trim_start().len() + 1;
        let location = Location { line: line_no, column };

        if let Some(inner) = trimmed.strip_prefix('[') {
            let name = inner.strip_suffix(']').ok_or_else(|| {
                ConfigError::mismatch(location, "command", "unterminated `[section]` header")
            })?;
            let cmd = Command::parse(name).ok_or_else(|| {
                ConfigError::unknown(
                    location,
                    name,
                    Some("expected one of build, simulate, estimate, verify, sweep, oracle, schedule".into()),
                )
            })?;
            if command.is_some() {
                return Err(ConfigError::mismatch(
                    location,
                    "command",
                    "a document holds exactly one `[command]` section",
                ));
            }
            command = Some((cmd, location));
            continue;
        }

        let Some(eq) = trimmed.find('=') else {
            return Err(ConfigError::mismatch(
                location,
                trimmed.split_whitespace().next().unwrap_or(""),
                "expected `key = value`",
            ));
        };
        let key = trimmed[..eq].trim();
        let value = trimmed[eq + 1..].trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::mismatch(location, key, "expected `key = value`"));
        }
        if command.is_none() {
            return Err(ConfigError::mismatch(
                location,
                key,
                "assignments must follow a `[command]` section",
            ));
        }
        let after_eq = &trimmed[eq + 1..];
        let value_column = column + eq + 1 + (after_eq.len() - after_eq.trim_start().len());
        pairs.push(Pair {
            key: key.to_string(),
            value: value.to_string(),
            key_location: location,
            value_location: Location { line: line_no, column: value_column },
        });
    }

    let (command, section_location) = command.ok_or_else(|| ConfigError::MissingRequired {
        location: Location { line: 1, column: 1 },
        command: "<none>".into(),
        key: "[command] section".into(),
    })?;
    Ok(Document {
        command,
        section_location,
        pairs,
    })
}

/// A fully validated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub lemma: Option<Lemma>,
    pub graph: Option<GraphFamily>,
    /// Interval length or star vertex count.
    pub n: Option<usize>,
    /// Extra line vertices on each side of an interval.
    pub pad: usize,
    /// Depth of the hub-tree families.
    pub i_max: Option<usize>,
    pub lambda: Option<f64>,
    /// Rate grid for `sweep`; falls back to `lambda` alone.
    pub lambdas: Vec<f64>,
    /// Evaluation times for `sweep`, `oracle` and tree extinction.
    pub times: Vec<f64>,
    /// Source activation window for path transmission.
    pub t: Option<f64>,
    /// Path length (edges) for path transmission.
    pub len: Option<usize>,
    /// Schedule depth.
    pub i: Option<usize>,
    pub horizon: Option<f64>,
    pub n_runs: u64,
    pub seed: u64,
    pub init: InitSpec,
    pub trace: bool,
    pub ci: CiMethod,
    /// Output path prefix; stdout when absent.
    pub out: Option<String>,
    pub threads: usize,
    pub budget: Option<u64>,
}

/// Keys every command accepts.
const COMMON_KEYS: &[&str] = &["seed", "out", "threads"];

fn allowed_keys(command: Command) -> &'static [&'static str] {
    match command {
        Command::Build => &["graph", "n", "pad", "i_max"],
        Command::Simulate => &["graph", "n", "pad", "i_max", "lambda", "horizon", "init", "trace", "budget"],
        Command::Estimate => &["graph", "n", "pad", "i_max", "lambda", "horizon", "init", "n_runs", "ci", "budget"],
        Command::Verify => &["lemma", "graph", "n", "pad", "i_max", "lambda", "times", "t", "len", "n_runs"],
        Command::Sweep => &["graph", "n", "pad", "i_max", "lambda", "lambdas", "times", "init", "n_runs"],
        Command::Oracle => &["graph", "n", "pad", "i_max", "lambda", "times", "init"],
        Command::Schedule => &["i", "lambda"],
    }
}

fn key_known_anywhere(key: &str) -> bool {
    const ALL: &[&str] = &[
        "graph", "n", "pad", "i_max", "lambda", "lambdas", "times", "t", "len", "i",
        "horizon", "init", "trace", "n_runs", "ci", "lemma", "budget",
    ];
    ALL.contains(&key) || COMMON_KEYS.contains(&key)
}

/// Validates `pairs` against `command` and fills documented defaults.
///
/// Later pairs override earlier ones, which is how command-line flags win
/// over the document.
pub fn build_config(
    command: Command,
    section_location: Location,
    pairs: &[Pair],
) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig {
        command,
        lemma: None,
        graph: None,
        n: None,
        pad: 0,
        i_max: None,
        lambda: None,
        lambdas: Vec::new(),
        times: Vec::new(),
        t: None,
        len: None,
        i: None,
        horizon: None,
        n_runs: 1_000,
        seed: 0,
        init: InitSpec::Full,
        trace: false,
        ci: CiMethod::Wilson,
        out: None,
        threads: env_threads(),
        budget: None,
    };
    let mut seen_seed = false;

    for pair in pairs {
        let key = pair.key.as_str();
        if !allowed_keys(command).contains(&key) && !COMMON_KEYS.contains(&key) {
            let hint = if key_known_anywhere(key) {
                Some(format!("not used by `{}`", command.name()))
            } else {
                None
            };
            return Err(ConfigError::unknown(pair.key_location, key, hint));
        }
        apply_pair(&mut cfg, pair)?;
        if key == "seed" {
            seen_seed = true;
        }
    }

    finalize(&cfg, section_location, seen_seed)?;
    Ok(cfg)
}

/// Parses and validates a complete document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc = parse_document(text)?;
    build_config(doc.command, doc.section_location, &doc.pairs)
}

fn apply_pair(cfg: &mut RunConfig, pair: &Pair) -> Result<(), ConfigError> {
    let loc = pair.value_location;
    let key = pair.key.as_str();
    let value = pair.value.as_str();
    match key {
        "graph" => {
            cfg.graph = Some(GraphFamily::parse(value).ok_or_else(|| {
                ConfigError::mismatch(
                    loc,
                    key,
                    format!("`{value}` is not one of interval, star, sv_tree, sv_plus, sv_minus"),
                )
            })?);
        }
        "lemma" => {
            cfg.lemma = Some(Lemma::parse(value).ok_or_else(|| {
                ConfigError::mismatch(
                    loc,
                    key,
                    format!(
                        "`{value}` is not one of rw_interval, star_extinction, tree_extinction, path_transmission"
                    ),
                )
            })?);
        }
        "n" => cfg.n = Some(parse_int_min(loc, key, value, 1)? as usize),
        "pad" => cfg.pad = parse_int_min(loc, key, value, 0)? as usize,
        "i_max" => cfg.i_max = Some(parse_int_min(loc, key, value, 1)? as usize),
        "len" => cfg.len = Some(parse_int_min(loc, key, value, 1)? as usize),
        "i" => cfg.i = Some(parse_int_min(loc, key, value, 2)? as usize),
        "n_runs" => cfg.n_runs = parse_int_min(loc, key, value, 1)?,
        "seed" => cfg.seed = parse_u64(loc, key, value)?,
        "threads" => cfg.threads = parse_int_min(loc, key, value, 0)? as usize,
        "budget" => cfg.budget = Some(parse_int_min(loc, key, value, 1)?),
        "lambda" => cfg.lambda = Some(parse_rate(loc, key, value)?),
        "horizon" => {
            let h = parse_float(loc, key, value)?;
            if !(h > 0.0) {
                return Err(ConfigError::mismatch(loc, key, format!("{h} is not positive")));
            }
            cfg.horizon = Some(h);
        }
        "t" => {
            let t = parse_float(loc, key, value)?;
            if t < 0.0 {
                return Err(ConfigError::mismatch(loc, key, format!("{t} is negative")));
            }
            cfg.t = Some(t);
        }
        "lambdas" => {
            cfg.lambdas = split_list(value)
                .map(|v| parse_rate(loc, key, v))
                .collect::<Result<_, _>>()?;
        }
        "times" => {
            cfg.times = split_list(value)
                .map(|v| {
                    let t = parse_float(loc, key, v)?;
                    if t < 0.0 {
                        return Err(ConfigError::mismatch(loc, key, format!("{t} is negative")));
                    }
                    Ok(t)
                })
                .collect::<Result<_, _>>()?;
        }
        "init" => {
            cfg.init = if value == "full" {
                InitSpec::Full
            } else {
                let ids = split_list(value)
                    .map(|v| {
                        v.parse::<u32>().map_err(|_| {
                            ConfigError::mismatch(loc, key, format!("`{v}` is not `full` or a vertex id"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                InitSpec::Vertices(ids)
            };
        }
        "trace" => {
            cfg.trace = match value {
                "true" => true,
                "false" => false,
                other => {
                    return Err(ConfigError::mismatch(loc, key, format!("`{other}` is not true or false")))
                }
            };
        }
        "ci" => {
            cfg.ci = match value {
                "wilson" => CiMethod::Wilson,
                "clopper_pearson" => CiMethod::ClopperPearson,
                other => {
                    return Err(ConfigError::mismatch(
                        loc,
                        key,
                        format!("`{other}` is not wilson or clopper_pearson"),
                    ))
                }
            };
        }
        "out" => cfg.out = Some(value.to_string()),
        _ => unreachable!("key `{key}` passed the allow-list"),
    }
    Ok(())
}

fn finalize(cfg: &RunConfig, section: Location, seen_seed: bool) -> Result<(), ConfigError> {
    let missing = |key: &str| ConfigError::MissingRequired {
        location: section,
        command: cfg.command.name().into(),
        key: key.into(),
    };
    let needs_graph = || -> Result<(), ConfigError> {
        match cfg.graph {
            None => Err(missing("graph")),
            Some(GraphFamily::Interval) | Some(GraphFamily::Star) if cfg.n.is_none() => {
                Err(missing("n"))
            }
            Some(GraphFamily::SvTree) | Some(GraphFamily::SvPlus) | Some(GraphFamily::SvMinus)
                if cfg.i_max.is_none() =>
            {
                Err(missing("i_max"))
            }
            _ => Ok(()),
        }
    };
    let needs_seed = || -> Result<(), ConfigError> {
        if seen_seed {
            Ok(())
        } else {
            Err(missing("seed"))
        }
    };
    let needs_lambda = || -> Result<(), ConfigError> {
        if cfg.lambda.is_none() {
            Err(missing("lambda"))
        } else {
            Ok(())
        }
    };

    match cfg.command {
        Command::Build => needs_graph()?,
        Command::Simulate => {
            needs_graph()?;
            needs_lambda()?;
            needs_seed()?;
            if cfg.horizon.is_none() && cfg.budget.is_none() {
                return Err(missing("horizon (or budget)"));
            }
        }
        Command::Estimate => {
            needs_graph()?;
            needs_lambda()?;
            needs_seed()?;
            if cfg.horizon.is_none() {
                return Err(missing("horizon"));
            }
        }
        Command::Verify => {
            needs_seed()?;
            needs_lambda()?;
            match cfg.lemma {
                None => return Err(missing("lemma")),
                Some(Lemma::RwInterval) | Some(Lemma::StarExtinction) => {
                    if cfg.n.is_none() {
                        return Err(missing("n"));
                    }
                }
                Some(Lemma::TreeExtinction) => {
                    needs_graph()?;
                    if cfg.times.is_empty() {
                        return Err(missing("times"));
                    }
                }
                Some(Lemma::PathTransmission) => {
                    if cfg.len.is_none() {
                        return Err(missing("len"));
                    }
                    if cfg.t.is_none() {
                        return Err(missing("t"));
                    }
                }
            }
        }
        Command::Sweep => {
            needs_graph()?;
            needs_seed()?;
            if cfg.lambdas.is_empty() && cfg.lambda.is_none() {
                return Err(missing("lambdas"));
            }
            if cfg.times.is_empty() {
                return Err(missing("times"));
            }
        }
        Command::Oracle => {
            needs_graph()?;
            needs_lambda()?;
            if cfg.times.is_empty() {
                return Err(missing("times"));
            }
        }
        Command::Schedule => {
            needs_lambda()?;
            if cfg.i.is_none() {
                return Err(missing("i"));
            }
            let lambda = cfg.lambda.unwrap();
            if lambda <= 0.0 || lambda >= 1.0 {
                return Err(ConfigError::mismatch(
                    section,
                    "lambda",
                    format!("schedule needs a rate strictly between 0 and 1, got {lambda}"),
                ));
            }
            if cfg.i.unwrap() % 2 != 0 {
                return Err(ConfigError::mismatch(
                    section,
                    "i",
                    format!("schedule depth must be even, got {}", cfg.i.unwrap()),
                ));
            }
        }
    }
    Ok(())
}

impl RunConfig {
    /// The rates a sweep runs over.
    pub fn lambda_grid(&self) -> Vec<f64> {
        if self.lambdas.is_empty() {
            self.lambda.into_iter().collect()
        } else {
            self.lambdas.clone()
        }
    }

    /// Sorted `key = value` pairs of everything that shapes the numbers.
    ///
    /// `out` and `threads` are deliberately absent: results are
    /// parallelism-invariant and the echo must be too, so that reruns at any
    /// thread count reproduce output files byte for byte.
    pub fn echo_pairs(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = vec![
            ("command".into(), self.command.name().into()),
            ("seed".into(), self.seed.to_string()),
        ];
        if let Some(lemma) = self.lemma {
            pairs.push(("lemma".into(), lemma.name().into()));
        }
        if let Some(graph) = self.graph {
            pairs.push(("graph".into(), graph.name().into()));
        }
        if let Some(n) = self.n {
            pairs.push(("n".into(), n.to_string()));
        }
        if self.pad != 0 {
            pairs.push(("pad".into(), self.pad.to_string()));
        }
        if let Some(i_max) = self.i_max {
            pairs.push(("i_max".into(), i_max.to_string()));
        }
        if let Some(lambda) = self.lambda {
            pairs.push(("lambda".into(), format!("{lambda}")));
        }
        if !self.lambdas.is_empty() {
            pairs.push(("lambdas".into(), join_floats(&self.lambdas)));
        }
        if !self.times.is_empty() {
            pairs.push(("times".into(), join_floats(&self.times)));
        }
        if let Some(t) = self.t {
            pairs.push(("t".into(), format!("{t}")));
        }
        if let Some(len) = self.len {
            pairs.push(("len".into(), len.to_string()));
        }
        if let Some(i) = self.i {
            pairs.push(("i".into(), i.to_string()));
        }
        if let Some(h) = self.horizon {
            pairs.push(("horizon".into(), format!("{h}")));
        }
        if uses_runs(self.command) {
            pairs.push(("n_runs".into(), self.n_runs.to_string()));
        }
        match &self.init {
            InitSpec::Full => {}
            InitSpec::Vertices(ids) => {
                let list: Vec<String> = ids.iter().map(|v| v.to_string()).collect();
                pairs.push(("init".into(), list.join(",")));
            }
        }
        if self.trace {
            pairs.push(("trace".into(), "true".into()));
        }
        if self.ci == CiMethod::ClopperPearson {
            pairs.push(("ci".into(), "clopper_pearson".into()));
        }
        if let Some(budget) = self.budget {
            pairs.push(("budget".into(), budget.to_string()));
        }
        pairs.sort();
        pairs
    }
}

fn uses_runs(command: Command) -> bool {
    matches!(command, Command::Estimate | Command::Verify | Command::Sweep)
}

fn join_floats(xs: &[f64]) -> String {
    let list: Vec<String> = xs.iter().map(|x| format!("{x}")).collect();
    list.join(",")
}

fn env_threads() -> usize {
    std::env::var("CONTACT_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|v| !v.is_empty())
}

fn parse_float(loc: Location, key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value
        .parse()
        .map_err(|_| ConfigError::mismatch(loc, key, format!("`{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(ConfigError::mismatch(loc, key, format!("{x} is not finite")));
    }
    Ok(x)
}

fn parse_rate(loc: Location, key: &str, value: &str) -> Result<f64, ConfigError> {
    let x = parse_float(loc, key, value)?;
    if x < 0.0 {
        return Err(ConfigError::mismatch(loc, key, format!("rate {x} is negative")));
    }
    Ok(x)
}

fn parse_u64(loc: Location, key: &str, value: &str) -> Result<u64, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::mismatch(loc, key, format!("`{value}` is not a 64-bit unsigned integer")))
}

fn parse_int_min(loc: Location, key: &str, value: &str, min: u64) -> Result<u64, ConfigError> {
    let x = parse_u64(loc, key, value)?;
    if x < min {
        return Err(ConfigError::mismatch(loc, key, format!("{x} is below the minimum {min}")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_doc_fills_defaults() {
        let cfg = parse_config(
            "[simulate]\ngraph = star\nn = 10\nlambda = 0.25\nseed = 7\nhorizon = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.command, Command::Simulate);
        assert_eq!(cfg.graph, Some(GraphFamily::Star));
        assert_eq!(cfg.n, Some(10));
        assert_eq!(cfg.lambda, Some(0.25));
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.pad, 0);
        assert_eq!(cfg.n_runs, 1_000);
        assert_eq!(cfg.init, InitSpec::Full);
        assert_eq!(cfg.ci, CiMethod::Wilson);
        assert!(!cfg.trace);
        assert!(cfg.out.is_none());
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let cfg = parse_config(
            "# a comment\n\n[schedule]\n  i   =  4\nlambda=0.25\n\n# trailing\n",
        )
        .unwrap();
        assert_eq!(cfg.command, Command::Schedule);
        assert_eq!(cfg.i, Some(4));
    }

    #[test]
    fn negative_rate_is_a_range_error_at_its_line() {
        let err = parse_config("[simulate]\ngraph = star\nn = 5\nlambda = -0.1\nseed = 1\nhorizon = 2\n")
            .unwrap_err();
        match err {
            ConfigError::TypeMismatch { location, ref key, .. } => {
                assert_eq!(location.line, 4);
                assert_eq!(key, "lambda");
            }
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(err.to_string().contains("line 4"));
    }

    #[test]
    fn unknown_and_misplaced_keys_are_rejected() {
        let err = parse_config("[schedule]\ni = 4\nlambda = 0.25\nlambada = 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { .. }), "{err:?}");

        let err = parse_config("[schedule]\ni = 4\nlambda = 0.25\nhorizon = 5\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { ref hint, .. } => {
                assert_eq!(hint.as_deref(), Some("not used by `schedule`"));
            }
            other => panic!("expected unknown-key error, got {other:?}"),
        }
    }

    #[test]
    fn missing_required_names_the_command_and_key() {
        let err = parse_config("[verify]\nlemma = rw_interval\nlambda = 0.25\nseed = 1\n").unwrap_err();
        match err {
            ConfigError::MissingRequired { ref command, ref key, .. } => {
                assert_eq!(command, "verify");
                assert_eq!(key, "n");
            }
            other => panic!("expected missing-required error, got {other:?}"),
        }
    }

    #[test]
    fn document_structure_errors_carry_positions() {
        for (text, want_line) in [
            ("lambda = 0.25\n", 1),
            ("[schedule\ni = 4\n", 1),
            ("[schedule]\n[build]\n", 2),
            ("[schedule]\ni 4\n", 2),
        ] {
            match parse_document(text).unwrap_err() {
                ConfigError::TypeMismatch { location, .. } => assert_eq!(location.line, want_line),
                other => panic!("expected structural error for {text:?}, got {other:?}"),
            }
        }
        assert!(matches!(
            parse_document("[juggle]\n").unwrap_err(),
            ConfigError::UnknownKey { .. }
        ));
        assert!(matches!(
            parse_document("# nothing\n").unwrap_err(),
            ConfigError::MissingRequired { .. }
        ));
    }

    #[test]
    fn later_pairs_override_earlier_ones() {
        let doc = parse_document("[schedule]\ni = 4\nlambda = 0.25\n").unwrap();
        let mut pairs = doc.pairs.clone();
        pairs.push(Pair::from_flag("lambda", "0.125"));
        let cfg = build_config(doc.command, doc.section_location, &pairs).unwrap();
        assert_eq!(cfg.lambda, Some(0.125));
    }

    #[test]
    fn grids_parse_as_comma_lists() {
        let cfg = parse_config(
            "[sweep]\ngraph = star\nn = 50\nlambdas = 0.1, 0.2, 0.3\ntimes = 1, 2.5, 4\nseed = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.lambdas, vec![0.1, 0.2, 0.3]);
        assert_eq!(cfg.times, vec![1.0, 2.5, 4.0]);
        assert_eq!(cfg.lambda_grid(), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn sv_config_carries_depth() {
        let cfg = parse_config("[build]\ngraph = sv_tree\ni_max = 4\n").unwrap();
        assert_eq!(cfg.graph, Some(GraphFamily::SvTree));
        assert_eq!(cfg.i_max, Some(4));
    }

    #[test]
    fn schedule_rejects_odd_depth_and_unit_rate() {
        assert!(matches!(
            parse_config("[schedule]\ni = 3\nlambda = 0.25\n").unwrap_err(),
            ConfigError::TypeMismatch { .. }
        ));
        assert!(matches!(
            parse_config("[schedule]\ni = 4\nlambda = 1\n").unwrap_err(),
            ConfigError::TypeMismatch { .. }
        ));
    }

    #[test]
    fn echo_is_sorted_and_omits_execution_keys() {
        let doc = parse_document(
            "[estimate]\ngraph = interval\nn = 4\nlambda = 0.5\nseed = 9\nhorizon = 3\n",
        )
        .unwrap();
        let mut pairs = doc.pairs.clone();
        pairs.push(Pair::from_flag("threads", "4"));
        pairs.push(Pair::from_flag("out", "/tmp/x"));
        let cfg = build_config(doc.command, doc.section_location, &pairs).unwrap();
        let echo = cfg.echo_pairs();
        let keys: Vec<&str> = echo.iter().map(|(k, _)| k.as_str()).collect();
        assert_eq!(
            keys,
            ["command", "graph", "horizon", "lambda", "n", "n_runs", "seed"]
        );
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn init_accepts_full_or_vertex_lists() {
        let cfg = parse_config(
            "[oracle]\ngraph = interval\nn = 3\nlambda = 0.25\ntimes = 1\ninit = 0,2\n",
        )
        .unwrap();
        assert_eq!(cfg.init, InitSpec::Vertices(vec![0, 2]));
    }
}
