//! JSON report, CSV rows and trace files.

use crate::config::{Mode, RunConfig};
use crate::run::{io_err, CliError, Outcome, Trial};
use aggtree::protocol::MessageKind;
use aggtree::sim::{MergeRecord, RoundReport, SimResult, Status};
use aggtree::topology::NodeId;
use aggtree::verify::{check_message_bounds, BoundsCheck, Verdicts};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const CSV_HEADER: &str = "trial,n,edges,k,rounds,status,msgs_find,msgs_test,msgs_accept,\
msgs_reject,msgs_report,msgs_inform,msgs_merge_req,msgs_internal,msgs_merge,msgs_commit,\
msgs_ignore,msgs_modify,mst_ok,acyclic_ok,bounds_ok";

fn by_name(counts: &BTreeMap<MessageKind, usize>) -> BTreeMap<&'static str, usize> {
    MessageKind::ALL
        .iter()
        .map(|k| (k.name(), counts.get(k).copied().unwrap_or(0)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundSummary {
    pub round: usize,
    pub clusters_before: usize,
    pub clusters_after: usize,
    pub cluster_sizes: Vec<usize>,
    pub messages: BTreeMap<&'static str, usize>,
    pub merges: Vec<MergeRecord>,
    pub phase_steps: [usize; 4],
    pub acyclic: bool,
}

impl From<&RoundReport> for RoundSummary {
    fn from(r: &RoundReport) -> Self {
        Self {
            round: r.round,
            clusters_before: r.clusters_before,
            clusters_after: r.clusters_after,
            cluster_sizes: r.cluster_sizes.clone(),
            messages: by_name(&r.messages_by_kind),
            merges: r.merges.clone(),
            phase_steps: r.phase_steps,
            acyclic: r.acyclic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub graph_seed: Option<u64>,
    pub fault_seed: Option<u64>,
    /// Nodes before the failures.
    pub n: usize,
    pub live_nodes: usize,
    /// Links of the reduced graph.
    pub edges: usize,
    pub faulty: Vec<NodeId>,
    pub irreparable_by_design: bool,
    pub status: Status,
    pub k: usize,
    pub rounds: usize,
    pub final_clusters: usize,
    pub tree_weight: f64,
    pub messages: BTreeMap<&'static str, usize>,
    pub per_round: Vec<RoundSummary>,
    pub verdicts: Verdicts,
    pub bounds: BoundsCheck,
    pub pass: bool,
}

impl TrialReport {
    pub fn new(trial: &Trial, res: &SimResult, allow_irreparable: bool) -> Self {
        let bounds = check_message_bounds(
            &res.reports,
            res.rounds_used,
            res.reduced_edges,
            res.initial_clusters,
        )
        .expect("one report per round");
        let irreparable_ok = allow_irreparable || trial.irreparable_by_design;
        let pass = res.verdicts.all_pass(res.status)
            && (res.status != Status::Irreparable || irreparable_ok);
        Self {
            trial: trial.index,
            graph_seed: trial.graph_seed,
            fault_seed: trial.fault_seed,
            n: trial.scenario.graph().node_count(),
            live_nodes: res.live_nodes,
            edges: res.reduced_edges,
            faulty: trial.scenario.faulty().iter().copied().collect(),
            irreparable_by_design: trial.irreparable_by_design,
            status: res.status,
            k: res.initial_clusters,
            rounds: res.rounds_used,
            final_clusters: res.final_clusters,
            tree_weight: res.final_tree.total_weight(),
            messages: by_name(&res.messages_by_kind()),
            per_round: res.reports.iter().map(RoundSummary::from).collect(),
            verdicts: res.verdicts.clone(),
            bounds,
            pass,
        }
    }

    pub fn csv_row(&self) -> CsvRow {
        let m = |k: MessageKind| self.messages[k.name()];
        let v = &self.verdicts;
        CsvRow {
            trial: self.trial,
            n: self.n,
            edges: self.edges,
            k: self.k,
            rounds: self.rounds,
            status: self.status.as_str(),
            msgs_find: m(MessageKind::Find),
            msgs_test: m(MessageKind::Test),
            msgs_accept: m(MessageKind::Accept),
            msgs_reject: m(MessageKind::Reject),
            msgs_report: m(MessageKind::Report),
            msgs_inform: m(MessageKind::Inform),
            msgs_merge_req: m(MessageKind::MergeReq),
            msgs_internal: m(MessageKind::Internal),
            msgs_merge: m(MessageKind::Merge),
            msgs_commit: m(MessageKind::Commit),
            msgs_ignore: m(MessageKind::Ignore),
            msgs_modify: m(MessageKind::Modify),
            mst_ok: v.mst_equivalent,
            acyclic_ok: v.acyclic && v.every_round_acyclic,
            bounds_ok: v.message_bound_ok,
        }
    }
}

/// One CSV line; field order is the header order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub trial: usize,
    pub n: usize,
    pub edges: usize,
    pub k: usize,
    pub rounds: usize,
    pub status: &'static str,
    pub msgs_find: usize,
    pub msgs_test: usize,
    pub msgs_accept: usize,
    pub msgs_reject: usize,
    pub msgs_report: usize,
    pub msgs_inform: usize,
    pub msgs_merge_req: usize,
    pub msgs_internal: usize,
    pub msgs_merge: usize,
    pub msgs_commit: usize,
    pub msgs_ignore: usize,
    pub msgs_modify: usize,
    pub mst_ok: bool,
    pub acyclic_ok: bool,
    pub bounds_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub passed: usize,
    pub reconstructed: usize,
    pub irreparable: usize,
    pub round_limit: usize,
    pub max_rounds: usize,
    pub all_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub mode: Mode,
    pub config: RunConfig,
    pub summary: Summary,
    pub trials: Vec<TrialReport>,
}

impl RunReport {
    pub fn new(config: RunConfig, trials: Vec<TrialReport>) -> Self {
        let count = |s: Status| trials.iter().filter(|t| t.status == s).count();
        let passed = trials.iter().filter(|t| t.pass).count();
        let summary = Summary {
            trials: trials.len(),
            passed,
            reconstructed: count(Status::Reconstructed),
            irreparable: count(Status::Irreparable),
            round_limit: count(Status::RoundLimit),
            max_rounds: trials.iter().map(|t| t.rounds).max().unwrap_or(0),
            all_pass: passed == trials.len(),
        };
        Self {
            mode: config.mode(),
            config,
            summary,
            trials,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.trials {
            w.serialize(t.csv_row()).expect("row serializes");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii rows")
    }
}

/// Trace lines of every trial. Sweeps mark each trial with a
/// `# trial <index>` comment line.
pub fn render_trace(outcome: &Outcome) -> String {
    let sweep = outcome.report.mode == Mode::Sweep;
    let mut out = String::new();
    for (t, records) in outcome.traces.iter().enumerate() {
        if sweep {
            let _ = writeln!(out, "# trial {t}");
        }
        for r in records {
            let _ = writeln!(out, "{r}");
        }
    }
    out
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(io_err(path))
}

/// Writes every output path named in the configuration.
pub fn write_outputs(outcome: &Outcome) -> Result<(), CliError> {
    let cfg = &outcome.report.config;
    if let Some(p) = &cfg.report {
        write(p, &outcome.report.to_json())?;
    }
    if let Some(p) = &cfg.csv {
        write(p, &outcome.report.to_csv())?;
    }
    if let Some(p) = &cfg.trace {
        write(p, &render_trace(outcome))?;
    }
    Ok(())
}
