use aggtree_cli::{main_with, Overrides};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulate repair of an MST aggregation tree after node failures.
///
/// Exit status: 0 all verdicts pass, 2 verification failure, 3 bad
/// configuration, 4 I/O error.
#[derive(Parser, Debug)]
#[command(name = "aggtree", version)]
struct Cli {
    /// TOML config file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph dump file (`node <id> <x> <y>` / `edge <lo> <hi> <weight>`).
    #[arg(long, conflicts_with = "rgg")]
    graph: Option<PathBuf>,
    /// Random geometric graph on a 100 m square: `n,radius,seed`.
    #[arg(long, value_name = "N,RADIUS,SEED")]
    rgg: Option<String>,
    /// Failing node ids: `id,id,...`.
    #[arg(long, value_name = "IDS", conflicts_with = "fail_random")]
    fail: Option<String>,
    /// Random failures keeping the graph connected: `count,seed`.
    #[arg(long, value_name = "M,SEED")]
    fail_random: Option<String>,
    /// Number of trials; trial t uses seeds `seed + t`.
    #[arg(long)]
    trials: Option<usize>,
    /// off, summary or full. Defaults to full when --trace is given.
    #[arg(long)]
    trace_level: Option<String>,
    /// Message delivery within a step: sequential or parallel.
    #[arg(long)]
    exec: Option<String>,
    /// Count an irreparable outcome as a pass.
    #[arg(long)]
    allow_irreparable: bool,
    /// Super-round limit per trial (default: node count).
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Write the message trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write one CSV row per trial here.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, short)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    let flags = Overrides {
        graph: cli.graph,
        rgg: cli.rgg,
        fail: cli.fail,
        fail_random: cli.fail_random,
        trials: cli.trials,
        trace_level: cli.trace_level,
        exec: cli.exec,
        allow_irreparable: cli.allow_irreparable,
        max_rounds: cli.max_rounds,
        report: cli.report,
        csv: cli.csv,
        trace: cli.trace,
    };
    match main_with(cli.config.as_deref(), flags) {
        Ok((outcome, code)) => {
            if !cli.quiet || code != 0 {
                let s = &outcome.report.summary;
                eprintln!(
                    "{} trial(s): {} passed, {} reconstructed, {} irreparable, {} hit the round limit, max rounds {}",
                    s.trials, s.passed, s.reconstructed, s.irreparable, s.round_limit, s.max_rounds
                );
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
