//! Run configuration: command-line specs and the TOML config file.
//!
//! ```toml
//! [graph]
//! rgg = { n = 100, radius = 20.0, seed = 7 }   # or: file = "field.graph"
//!
//! [faults]
//! random = { count = 1, seed = 3 }            # or: ids = [4, 17]
//!
//! [run]
//! trials = 50
//! trace_level = "summary"                     # off | summary | full
//! exec = "parallel"                           # sequential | parallel
//! allow_irreparable = false
//! max_rounds = 200
//!
//! [output]
//! report = "report.json"
//! csv = "trials.csv"
//! trace = "trace.tsv"
//! ```
//!
//! Flags given on the command line override the file.

use aggtree::sim::{ExecMode, TraceLevel};
use aggtree::topology::{NodeId, RggParams, DEFAULT_SIDE};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("invalid {what} `{value}`: {reason}")]
    BadSpec {
        what: &'static str,
        value: String,
        reason: String,
    },
    #[error("config file: {0}")]
    File(String),
    #[error("no graph source: pass --graph or --rgg")]
    MissingGraph,
    #[error("no failure set: pass --fail or --fail-random")]
    MissingFaults,
    #[error("--graph and --rgg are mutually exclusive")]
    ConflictingGraph,
    #[error("--fail and --fail-random are mutually exclusive")]
    ConflictingFaults,
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("graph file {path}: {reason}")]
    BadGraph { path: PathBuf, reason: String },
    #[error("failure set: {0}")]
    BadFaults(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    File(PathBuf),
    Rgg(RggParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultSpec {
    Ids(Vec<NodeId>),
    /// `count` distinct nodes drawn so that the reduced graph stays
    /// connected, if such a draw is found.
    Random { count: usize, seed: u64 },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Single,
    Sweep,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub faults: FaultSpec,
    pub trials: usize,
    pub trace_level: TraceLevel,
    /// Execution mode and output paths never change results and are left
    /// out of reports, so reports compare byte for byte across them.
    #[serde(skip)]
    pub exec: ExecMode,
    pub allow_irreparable: bool,
    pub max_rounds: Option<usize>,
    #[serde(skip)]
    pub report: Option<PathBuf>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[serde(skip)]
    pub trace: Option<PathBuf>,
}

impl RunConfig {
    pub fn mode(&self) -> Mode {
        if self.trials > 1 {
            Mode::Sweep
        } else {
            Mode::Single
        }
    }
}

fn bad(what: &'static str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadSpec {
        what,
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn fields<'a>(what: &'static str, s: &'a str, n: usize) -> Result<Vec<&'a str>, ConfigError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(bad(what, s, format!("expected {n} comma-separated fields")));
    }
    Ok(parts)
}

/// `n,radius,seed`, e.g. `100,20,7`.
pub fn parse_rgg_spec(s: &str) -> Result<RggParams, ConfigError> {
    const WHAT: &str = "--rgg";
    let f = fields(WHAT, s, 3)?;
    let n: usize = f[0].parse().map_err(|_| bad(WHAT, s, "node count is not an integer"))?;
    let radius: f64 = f[1].parse().map_err(|_| bad(WHAT, s, "radius is not a number"))?;
    let seed: u64 = f[2].parse().map_err(|_| bad(WHAT, s, "seed is not an integer"))?;
    let params = RggParams::new(n, radius, seed);
    check_rgg(&params).map_err(|r| bad(WHAT, s, r))?;
    Ok(params)
}

fn check_rgg(p: &RggParams) -> Result<(), String> {
    if p.n < 2 {
        return Err("need at least 2 nodes".into());
    }
    if p.n > u32::MAX as usize {
        return Err("too many nodes".into());
    }
    if !(p.radius.is_finite() && p.radius >= 0.0) {
        return Err("radius must be a finite non-negative number".into());
    }
    if !(p.side.is_finite() && p.side > 0.0) {
        return Err("side must be a finite positive number".into());
    }
    Ok(())
}

/// Comma-separated node ids, e.g. `4,17`.
pub fn parse_fail_list(s: &str) -> Result<Vec<NodeId>, ConfigError> {
    const WHAT: &str = "--fail";
    let ids = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map(NodeId)
                .map_err(|_| bad(WHAT, s, format!("`{}` is not a node id", p.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ids)
}

/// `count,seed`, e.g. `2,11`.
pub fn parse_fail_random(s: &str) -> Result<FaultSpec, ConfigError> {
    const WHAT: &str = "--fail-random";
    let f = fields(WHAT, s, 2)?;
    let count: usize = f[0].parse().map_err(|_| bad(WHAT, s, "count is not an integer"))?;
    let seed: u64 = f[1].parse().map_err(|_| bad(WHAT, s, "seed is not an integer"))?;
    if count == 0 {
        return Err(bad(WHAT, s, "count must be at least 1"));
    }
    Ok(FaultSpec::Random { count, seed })
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub graph: GraphSection,
    #[serde(default)]
    pub faults: FaultSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    pub file: Option<PathBuf>,
    pub rgg: Option<RggTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RggTable {
    pub n: usize,
    pub radius: f64,
    pub seed: u64,
    #[serde(default = "default_side")]
    pub side: f64,
}

fn default_side() -> f64 {
    DEFAULT_SIDE
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    pub ids: Option<Vec<u32>>,
    pub random: Option<RandomFaults>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFaults {
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub trials: Option<usize>,
    pub trace_level: Option<String>,
    pub exec: Option<String>,
    pub allow_irreparable: Option<bool>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

pub fn parse_config_file(text: &str) -> Result<FileConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::File(e.message().to_string()))
}

/// Values collected from command-line flags, before merging with a file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub graph: Option<PathBuf>,
    pub rgg: Option<String>,
    pub fail: Option<String>,
    pub fail_random: Option<String>,
    pub trials: Option<usize>,
    pub trace_level: Option<String>,
    pub exec: Option<String>,
    pub allow_irreparable: bool,
    pub max_rounds: Option<usize>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

pub fn parse_exec(s: &str) -> Result<ExecMode, ConfigError> {
    match s {
        "seq" | "sequential" => Ok(ExecMode::Sequential),
        "par" | "parallel" => Ok(ExecMode::Parallel),
        _ => Err(bad("exec mode", s, "expected sequential or parallel")),
    }
}

pub fn parse_trace_level(s: &str) -> Result<TraceLevel, ConfigError> {
    s.parse()
        .map_err(|_| bad("trace level", s, "expected off, summary or full"))
}

/// Merges flags over an optional file. A flag of either kind for the graph
/// (or the failure set) replaces both file keys for it.
pub fn resolve(file: Option<FileConfig>, flags: Overrides) -> Result<RunConfig, ConfigError> {
    let file = file.unwrap_or_default();

    let graph = match (flags.graph, flags.rgg) {
        (Some(_), Some(_)) => return Err(ConfigError::ConflictingGraph),
        (Some(path), None) => GraphSource::File(path),
        (None, Some(spec)) => GraphSource::Rgg(parse_rgg_spec(&spec)?),
        (None, None) => match (file.graph.file, file.graph.rgg) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingGraph),
            (Some(path), None) => GraphSource::File(path),
            (None, Some(t)) => {
                let p = RggParams {
                    n: t.n,
                    radius: t.radius,
                    seed: t.seed,
                    side: t.side,
                };
                check_rgg(&p).map_err(|r| bad("[graph.rgg]", &format!("{p:?}"), r))?;
                GraphSource::Rgg(p)
            }
            (None, None) => return Err(ConfigError::MissingGraph),
        },
    };

    let faults = match (flags.fail, flags.fail_random) {
        (Some(_), Some(_)) => return Err(ConfigError::ConflictingFaults),
        (Some(list), None) => FaultSpec::Ids(parse_fail_list(&list)?),
        (None, Some(spec)) => parse_fail_random(&spec)?,
        (None, None) => match (file.faults.ids, file.faults.random) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingFaults),
            (Some(ids), None) => FaultSpec::Ids(ids.into_iter().map(NodeId).collect()),
            (None, Some(r)) if r.count == 0 => {
                return Err(bad("[faults.random]", "count = 0", "count must be at least 1"))
            }
            (None, Some(r)) => FaultSpec::Random {
                count: r.count,
                seed: r.seed,
            },
            (None, None) => return Err(ConfigError::MissingFaults),
        },
    };

    let trials = flags.trials.or(file.run.trials).unwrap_or(1);
    if trials == 0 {
        return Err(ConfigError::NoTrials);
    }
    let trace = flags.trace.or(file.output.trace);
    let trace_level = match flags.trace_level.or(file.run.trace_level) {
        Some(s) => parse_trace_level(&s)?,
        None if trace.is_some() => TraceLevel::Full,
        None => TraceLevel::default(),
    };
    let exec = match flags.exec.or(file.run.exec) {
        Some(s) => parse_exec(&s)?,
        None => ExecMode::default(),
    };
    let max_rounds = flags.max_rounds.or(file.run.max_rounds);
    if max_rounds == Some(0) {
        return Err(bad("max rounds", "0", "must be at least 1"));
    }

    Ok(RunConfig {
        graph,
        faults,
        trials,
        trace_level,
        exec,
        allow_irreparable: flags.allow_irreparable || file.run.allow_irreparable.unwrap_or(false),
        max_rounds,
        report: flags.report.or(file.output.report),
        csv: flags.csv.or(file.output.csv),
        trace,
    })
}
