//! Scenario construction and trial execution.

use crate::config::{ConfigError, FaultSpec, GraphSource, RunConfig};
use crate::report::{RunReport, TrialReport};
use aggtree::sim::{run_with_mode, Scenario, SimError, TraceRecord};
use aggtree::topology::{is_connected, parse_dump, remove_nodes, CommGraph, NodeId, RggParams};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

/// Draws tried before a random failure set is accepted as disconnecting.
pub const FAULT_DRAW_ATTEMPTS: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("trial {trial}: {source}")]
    Sim { trial: usize, source: SimError },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Sim { .. } => 2,
        }
    }
}

pub fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Seed used by trial `t` for a base seed. Trial 0 uses the base itself.
pub fn trial_seed(base: u64, t: usize) -> u64 {
    base.wrapping_add(t as u64)
}

/// A fully specified trial, ready to run.
#[derive(Clone, Debug)]
pub struct Trial {
    pub index: usize,
    pub graph_seed: Option<u64>,
    pub fault_seed: Option<u64>,
    pub scenario: Scenario,
    /// No admissible failure set was found; the trial runs on a
    /// disconnecting one.
    pub irreparable_by_design: bool,
}

pub fn load_graph(path: &Path) -> Result<CommGraph, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_dump(&text).map_err(|e| {
        ConfigError::BadGraph {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
        .into()
    })
}

/// Picks `count` distinct nodes whose removal keeps `g` connected, trying
/// up to [`FAULT_DRAW_ATTEMPTS`] draws. Returns the last draw and `false`
/// when none qualifies.
pub fn draw_faults(
    g: &CommGraph,
    count: usize,
    seed: u64,
) -> Result<(BTreeSet<NodeId>, bool), ConfigError> {
    let ids: Vec<NodeId> = g.node_ids().collect();
    if count >= ids.len() {
        return Err(ConfigError::BadFaults(format!(
            "cannot fail {count} of {} nodes",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = BTreeSet::new();
    for _ in 0..FAULT_DRAW_ATTEMPTS {
        last = ids.choose_multiple(&mut rng, count).copied().collect();
        let reduced = remove_nodes(g, &last).expect("drawn from the graph");
        if is_connected(&reduced) {
            return Ok((last, true));
        }
    }
    Ok((last, false))
}

fn explicit_faults(g: &CommGraph, ids: &[NodeId]) -> Result<BTreeSet<NodeId>, ConfigError> {
    let set: BTreeSet<NodeId> = ids.iter().copied().collect();
    if let Some(bad) = set.iter().find(|v| !g.contains_node(**v)) {
        return Err(ConfigError::BadFaults(format!("unknown node id {bad}")));
    }
    if set.len() >= g.node_count() {
        return Err(ConfigError::BadFaults("every node would fail".into()));
    }
    Ok(set)
}

/// Builds every trial of a run. Graph files are read once.
pub fn build_trials(cfg: &RunConfig) -> Result<Vec<Trial>, CliError> {
    let file_graph = match &cfg.graph {
        GraphSource::File(path) => Some(load_graph(path)?),
        GraphSource::Rgg(_) => None,
    };
    (0..cfg.trials)
        .map(|t| {
            let (graph, graph_seed) = match (&cfg.graph, &file_graph) {
                (_, Some(g)) => (g.clone(), None),
                (GraphSource::Rgg(p), None) => {
                    let seed = trial_seed(p.seed, t);
                    (RggParams { seed, ..*p }.generate(), Some(seed))
                }
                (GraphSource::File(_), None) => unreachable!("file graphs are preloaded"),
            };
            let (faulty, fault_seed, admissible) = match &cfg.faults {
                FaultSpec::Ids(ids) => (explicit_faults(&graph, ids)?, None, true),
                FaultSpec::Random { count, seed } => {
                    let seed = trial_seed(*seed, t);
                    let (set, ok) = draw_faults(&graph, *count, seed)?;
                    (set, Some(seed), ok)
                }
            };
            let mut scenario = Scenario::new(graph, faulty)
                .map_err(|e| ConfigError::BadFaults(e.to_string()))?
                .with_trace_level(cfg.trace_level);
            if let Some(r) = cfg.max_rounds {
                scenario = scenario.with_max_rounds(r);
            }
            Ok(Trial {
                index: t,
                graph_seed,
                fault_seed,
                scenario,
                irreparable_by_design: !admissible,
            })
        })
        .collect()
}

/// A finished run: the report plus the raw traces per trial.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub traces: Vec<Vec<TraceRecord>>,
}

impl Outcome {
    pub fn all_pass(&self) -> bool {
        self.report.summary.all_pass
    }

    /// 0 when every trial passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            2
        }
    }
}

/// Runs every trial; a single trial is a sweep of one. Trials execute in
/// parallel and results keep trial order.
pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let trials = build_trials(cfg)?;
    let results: Vec<(TrialReport, Vec<TraceRecord>)> = trials
        .into_par_iter()
        .map(|trial| {
            let mut res =
                run_with_mode(&trial.scenario, cfg.exec).map_err(|source| CliError::Sim {
                    trial: trial.index,
                    source,
                })?;
            let trace = std::mem::take(&mut res.trace);
            Ok((TrialReport::new(&trial, &res, cfg.allow_irreparable), trace))
        })
        .collect::<Result<_, CliError>>()?;
    let (reports, traces): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(Outcome {
        report: RunReport::new(cfg.clone(), reports),
        traces,
    })
}
