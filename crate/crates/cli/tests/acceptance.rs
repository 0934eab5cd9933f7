//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use aggtree::protocol::MessageKind;
use aggtree::sim::{
    inject_faults, run, run_with_mode, ExecMode, Scenario, SimResult, Status, TraceLevel,
};
use aggtree::topology::{
    generate_rgg, is_connected, oracle_msf, oracle_mst, remove_nodes, AggregationTree, CommGraph,
    NodeId, Position,
};
use common::{admissible, n, radius_for};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

const SIZES: [usize; 4] = [20, 50, 100, 200];
const SINGLE_TRIALS: u64 = 500;
const MULTI_TRIALS: u64 = 120;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

struct Corpus {
    single: Vec<(Scenario, SimResult)>,
    multi: Vec<(Scenario, SimResult)>,
}

fn corpus() -> Corpus {
    let build = |seeds: std::ops::Range<u64>, multi: bool| -> Vec<(Scenario, SimResult)> {
        seeds
            .into_par_iter()
            .map(|seed| {
                let size = SIZES[seed as usize % SIZES.len()];
                let m = if multi { 2 + seed as usize % 2 } else { 1 };
                let s = admissible(size, m, seed, true).with_trace_level(TraceLevel::Full);
                let r = run(&s).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
                (s, r)
            })
            .collect()
    };
    Corpus {
        single: build(0..SINGLE_TRIALS, false),
        multi: build(10_000..10_000 + MULTI_TRIALS, true),
    }
}

fn matches_oracle(s: &Scenario, r: &SimResult) -> bool {
    let reduced = remove_nodes(s.graph(), s.faulty()).unwrap();
    let oracle = AggregationTree::from_edges(oracle_mst(&reduced).unwrap());
    r.status == Status::Reconstructed && r.final_tree == oracle && r.verdicts.weight_delta == 0.0
}

fn c1(c: &Corpus) -> Verdict {
    let bad: Vec<usize> = c
        .single
        .iter()
        .enumerate()
        .filter(|(_, (s, r))| !matches_oracle(s, r))
        .map(|(i, _)| i)
        .collect();
    verdict(
        bad.is_empty(),
        format!(
            "{} single-failure RGG trials (n in {SIZES:?}), {} differ from the oracle MST",
            c.single.len(),
            bad.len()
        ),
    )
}

fn c2(c: &Corpus) -> Verdict {
    let rounds: usize = c.single.iter().map(|(_, r)| r.reports.len()).sum();
    let cyclic = c
        .single
        .iter()
        .flat_map(|(_, r)| &r.reports)
        .filter(|rep| !rep.acyclic)
        .count();
    let chain = run(&common::three_chain()).unwrap();
    let chain_ok = chain.reports.len() == 1
        && chain.reports[0].acyclic
        && chain.reports[0].merges.len() == 2
        && chain.verdicts.all_pass(chain.status);
    verdict(
        cyclic == 0 && chain_ok,
        format!("{rounds} rounds checked, {cyclic} cyclic; three-cluster chain ok: {chain_ok}"),
    )
}

fn c3() -> Verdict {
    let r = run(&common::star_of_relays()).unwrap();
    verdict(
        r.rounds_used == 1 && r.status == Status::Reconstructed && r.verdicts.all_pass(r.status),
        format!("k = {}, rounds = {}", r.initial_clusters, r.rounds_used),
    )
}

fn c4(c: &Corpus) -> Verdict {
    let r = run(&common::bridged_line(&[1.0, 10.0, 2.0, 20.0, 3.0, 11.0, 4.0])).unwrap();
    let halving: Vec<usize> = r.reports.iter().map(|x| x.clusters_after).collect();
    let ladder_ok = r.initial_clusters == 8 && r.rounds_used == 3 && halving == [4, 2, 1];
    let over = c
        .single
        .iter()
        .chain(&c.multi)
        .filter(|(_, r)| r.rounds_used > r.initial_clusters.saturating_sub(1))
        .count();
    verdict(
        ladder_ok && over == 0,
        format!(
            "ladder k = 8: rounds = {}, clusters {:?}; trials above k-1 rounds: {over}",
            r.rounds_used, halving
        ),
    )
}

fn c5(c: &Corpus) -> Verdict {
    let mut hand: Vec<SimResult> = [
        common::star_of_relays(),
        common::three_chain(),
        common::bridged_line(&[1.0, 10.0, 2.0, 20.0, 3.0, 11.0, 4.0]),
    ]
    .into_iter()
    .map(|s| run(&s.with_trace_level(TraceLevel::Full)).unwrap())
    .collect();
    hand.extend(c.single.iter().chain(&c.multi).map(|(_, r)| r.clone()));
    let traced = hand
        .iter()
        .all(|r| r.trace.len() == r.messages_by_kind().values().sum::<usize>());
    let failing = hand.iter().filter(|r| !r.verdicts.message_bound_ok).count();
    let worst = hand
        .iter()
        .flat_map(|r| {
            r.reports.iter().map(|rep| {
                let rej = aggtree::verify::reject_messages(rep);
                let used = rep.total_messages() - rej - rep.count(MessageKind::Ignore);
                used as f64 / (6 * rep.cluster_sizes.iter().sum::<usize>()) as f64
            })
        })
        .fold(0.0, f64::max);
    verdict(
        traced && failing == 0,
        format!(
            "{} traced trials, {failing} over a bound; worst round used {:.0}% of 6*sum(n_i)",
            hand.len(),
            worst * 100.0
        ),
    )
}

fn c6(c: &Corpus) -> Verdict {
    let mut over = 0;
    let mut wrong = 0;
    for (s, r) in &c.multi {
        let (_, clusters) = inject_faults(s).unwrap();
        let degree_sum: usize = s.faulty().iter().map(|f| s.initial_tree().degree(*f)).sum();
        if clusters.len() > degree_sum {
            over += 1;
        }
        if !matches_oracle(s, r) {
            wrong += 1;
        }
    }
    verdict(
        over == 0 && wrong == 0 && c.multi.len() >= 100,
        format!(
            "{} trials with 2-3 failures; {over} exceed sum of degrees, {wrong} differ from the oracle",
            c.multi.len()
        ),
    )
}

fn c7() -> Verdict {
    let mut leaf_ok = 0;
    let mut leaf_total = 0;
    let mut cut_ok = 0;
    let mut cut_total = 0;
    for seed in 0..40u64 {
        let size = SIZES[seed as usize % SIZES.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = loop {
            let g = generate_rgg(size, radius_for(size), rng.gen());
            if is_connected(&g) {
                break g;
            }
        };
        let tree = AggregationTree::from_edges(oracle_mst(&g).unwrap());
        let ids: Vec<NodeId> = g.node_ids().collect();

        let leaves: Vec<NodeId> = ids.iter().copied().filter(|v| tree.degree(*v) == 1).collect();
        let leaf = *leaves.choose(&mut rng).unwrap();
        let r = run(&Scenario::new(g.clone(), [leaf]).unwrap()).unwrap();
        leaf_total += 1;
        if r.initial_clusters == 1
            && r.merge_count() == 0
            && r.rounds_used == 0
            && r.verdicts.all_pass(r.status)
        {
            leaf_ok += 1;
        }

        let cut = ids.iter().copied().find(|v| {
            tree.degree(*v) >= 2 && !is_connected(&remove_nodes(&g, &BTreeSet::from([*v])).unwrap())
        });
        if let Some(v) = cut {
            cut_total += 1;
            let reduced = remove_nodes(&g, &BTreeSet::from([v])).unwrap();
            let r = run(&Scenario::new(g, [v]).unwrap()).unwrap();
            let forest = AggregationTree::from_edges(oracle_msf(&reduced));
            if r.status == Status::Irreparable
                && !r.verdicts.spanning
                && r.final_tree == forest
                && r.final_clusters == reduced.components().len()
            {
                cut_ok += 1;
            }
        }
    }
    let hand = run(&Scenario::new(
        common::line(&[(0, 0.0), (1, 1.0), (2, 2.0)], 1.5),
        [n(1)],
    )
    .unwrap())
    .unwrap();
    let hand_ok = hand.status == Status::Irreparable && hand.final_tree.is_empty();
    verdict(
        leaf_ok == leaf_total && cut_ok == cut_total && cut_total > 0 && hand_ok,
        format!(
            "leaf failures {leaf_ok}/{leaf_total} with 0 merges; cut-vertex failures {cut_ok}/{cut_total} irreparable with the minimum forest"
        ),
    )
}

fn cli_outputs(dir: &std::path::Path, exec: &str) -> Vec<Vec<u8>> {
    let names = ["r.json", "c.csv", "t.tsv"];
    let status = Command::new(env!("CARGO_BIN_EXE_aggtree"))
        .args([
            "--rgg",
            "80,22,31",
            "--fail-random",
            "2,5",
            "--trials",
            "8",
            "--exec",
            exec,
            "--quiet",
        ])
        .arg("--report")
        .arg(dir.join(names[0]))
        .arg("--csv")
        .arg(dir.join(names[1]))
        .arg("--trace")
        .arg(dir.join(names[2]))
        .status()
        .expect("binary runs");
    assert!(matches!(status.code(), Some(0 | 2)));
    names.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

fn c8() -> Verdict {
    let render = |r: &SimResult| {
        let trace: String = r.trace.iter().map(|t| format!("{t}\n")).collect();
        (trace, format!("{:?}", r.reports), format!("{:?}", r.final_tree))
    };
    let mut core_ok = true;
    for seed in 0..24u64 {
        let s = admissible(SIZES[seed as usize % 4], 1 + seed as usize % 3, 500 + seed, true)
            .with_trace_level(TraceLevel::Full);
        let a = render(&run_with_mode(&s, ExecMode::Sequential).unwrap());
        let b = render(&run_with_mode(&s, ExecMode::Sequential).unwrap());
        let p = render(&run_with_mode(&s, ExecMode::Parallel).unwrap());
        core_ok &= a == b && a == p;
    }
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let first = cli_outputs(dirs[0].path(), "sequential");
    let again = cli_outputs(dirs[1].path(), "sequential");
    let par = cli_outputs(dirs[2].path(), "parallel");
    let cli_ok = first == again && first == par && first.iter().all(|b| !b.is_empty());
    verdict(
        core_ok && cli_ok,
        format!("24 scenarios x (twice, parallel) identical: {core_ok}; CLI report/CSV/trace bytes identical: {cli_ok}"),
    )
}

/// All labelled trees on `k` vertices as edge lists, by Prüfer decoding.
fn labelled_trees(k: usize) -> Vec<Vec<(usize, usize)>> {
    if k == 2 {
        return vec![vec![(0, 1)]];
    }
    let mut out = Vec::new();
    let total = k.pow(k as u32 - 2);
    for code in 0..total {
        let mut seq = Vec::with_capacity(k - 2);
        let mut c = code;
        for _ in 0..k - 2 {
            seq.push(c % k);
            c /= k;
        }
        let mut degree = vec![1; k];
        for &s in &seq {
            degree[s] += 1;
        }
        let mut edges = Vec::with_capacity(k - 1);
        for &s in &seq {
            let leaf = (0..k).find(|&v| degree[v] == 1).unwrap();
            edges.push((leaf.min(s), leaf.max(s)));
            degree[leaf] -= 1;
            degree[s] -= 1;
        }
        let rest: Vec<usize> = (0..k).filter(|&v| degree[v] == 1).collect();
        edges.push((rest[0], rest[1]));
        out.push(edges);
    }
    out
}

fn pair_bit(k: usize, a: usize, b: usize) -> u32 {
    // Index of pair (a, b), a < b, in row-major order over the upper triangle.
    let idx = a * k - a * (a + 1) / 2 + (b - a - 1);
    1 << idx
}

/// Minimum spanning tree by exhaustive search: among all spanning trees,
/// the one whose edges, sorted by (weight, lo, hi), are lexicographically
/// smallest. With a strict edge order this is also the lightest tree.
fn brute_force(
    mask: u32,
    trees: &[(u32, Vec<(usize, usize)>)],
    w: &dyn Fn(usize, usize) -> f64,
) -> Option<(Vec<(u64, usize, usize)>, f64)> {
    let key = |a: usize, b: usize| (w(a, b).to_bits(), a, b);
    trees
        .iter()
        .filter(|(tm, _)| tm & !mask == 0)
        .map(|(_, edges)| {
            let mut ks: Vec<(u64, usize, usize)> = edges.iter().map(|&(a, b)| key(a, b)).collect();
            // Positive finite f64 bit patterns order like the values.
            ks.sort();
            let total: f64 = edges.iter().map(|&(a, b)| w(a, b)).sum();
            (ks, total)
        })
        .min_by(|x, y| x.0.cmp(&y.0))
        .map(|(ks, _)| {
            let lightest = trees
                .iter()
                .filter(|(tm, _)| tm & !mask == 0)
                .map(|(_, e)| e.iter().map(|&(a, b)| w(a, b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            (ks, lightest)
        })
}

fn c9() -> Verdict {
    let mut graphs = 0usize;
    let mut mismatches = 0usize;
    for k in 2..=6usize {
        let pairs = k * (k - 1) / 2;
        let trees: Vec<(u32, Vec<(usize, usize)>)> = labelled_trees(k)
            .into_iter()
            .map(|e| (e.iter().map(|&(a, b)| pair_bit(k, a, b)).fold(0, |m, b| m | b), e))
            .collect();
        let (checked, bad) = (0u32..1 << pairs)
            .into_par_iter()
            .map(|mask| {
                // Distinct points on a 4x4 grid so equal weights are common.
                let mut rng = ChaCha8Rng::seed_from_u64(((k as u64) << 32) | mask as u64);
                let mut cells: Vec<(u32, u32)> =
                    (0..4).flat_map(|x| (0..4).map(move |y| (x, y))).collect();
                cells.shuffle(&mut rng);
                let pos: Vec<Position> = cells[..k]
                    .iter()
                    .map(|&(x, y)| Position::new(x as f64, y as f64))
                    .collect();
                let mut g = CommGraph::with_nodes(
                    pos.iter().enumerate().map(|(i, p)| (NodeId(i as u32), *p)),
                )
                .unwrap();
                for a in 0..k {
                    for b in a + 1..k {
                        if mask & pair_bit(k, a, b) != 0 {
                            g.insert_edge(NodeId(a as u32), NodeId(b as u32)).unwrap();
                        }
                    }
                }
                let w = |a: usize, b: usize| pos[a].distance(&pos[b]);
                match (brute_force(mask, &trees, &w), oracle_mst(&g)) {
                    (None, Err(_)) => (0, 0),
                    (Some((best, lightest)), Ok(edges)) => {
                        let got: Vec<(u64, usize, usize)> = edges
                            .iter()
                            .map(|e| (e.weight.to_bits(), e.lo.0 as usize, e.hi.0 as usize))
                            .collect();
                        let total: f64 = edges.iter().map(|e| e.weight).sum();
                        let same = got == best && (total - lightest).abs() <= 1e-9;
                        (1, usize::from(!same))
                    }
                    _ => (1, 1),
                }
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        graphs += checked;
        mismatches += bad;
    }
    verdict(
        mismatches == 0 && graphs > 0,
        format!("{graphs} connected labelled graphs on 2..=6 nodes, {mismatches} mismatches"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let c = corpus();
    let results = [
        ("1 oracle-equal reconstruction", c1(&c)),
        ("2 acyclic after every round", c2(&c)),
        ("3 best case in one round", c3()),
        ("4 pairwise halving", c4(&c)),
        ("5 message bounds", c5(&c)),
        ("6 multiple failures", c6(&c)),
        ("7 degenerate cases", c7()),
        ("8 determinism", c8()),
        ("9 oracle vs exhaustive search", c9()),
    ];
    let mut all = true;
    for (name, v) in &results {
        all &= v.pass;
        println!(
            "criterion {name}: {} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance finished in {:.1}s", start.elapsed().as_secs_f64());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
