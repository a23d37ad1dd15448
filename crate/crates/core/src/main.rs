//! Command-line front end: run experiment specs, compare result files,
//! and describe the available sources and checkers.

use clap::{Parser, Subcommand};
use padiclab::experiments::{self, ExperimentSpec, RunStatus};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "padiclab",
    about = "Exact p-adic / word-combinatorial laboratory",
    long_about = "Runs reproducible experiments: word complexity, factor graphs, \
prefix-matrix dynamics mod p^k, badly-approximable scans and the exclusion \
theorem checkers. All verdict arithmetic is exact.\n\n\
Defaults: precision k = 6, scan bound B = 50, prefix window = 16384."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment spec file and write JSON/CSV results.
    ///
    /// Exit codes: 0 success, 1 hypothesis-failure verdicts present,
    /// 2 precision-limited results present, 3 error.
    Run {
        /// Path to the spec file (`key = value` lines).
        spec: PathBuf,
        /// Output directory for the result files.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Structurally compare two result JSON files.
    ///
    /// Exit codes: 0 identical, 1 divergent, 3 error.
    Compare { left: PathBuf, right: PathBuf },
    /// Describe the word-source specification schema.
    ListSources,
    /// Describe a checker's parameters (all checkers when omitted).
    DescribeChecker { name: Option<String> },
}

type CmdResult<T> = Result<T, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { spec, out } => match cmd_run(&spec, &out) {
            Ok(status) => ExitCode::from(status.exit_code() as u8),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Command::Compare { left, right } => match cmd_compare(&left, &right) {
            Ok(identical) => ExitCode::from(if identical { 0 } else { 1 }),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Command::ListSources => {
            print!("{SOURCES_HELP}");
            ExitCode::SUCCESS
        }
        Command::DescribeChecker { name } => {
            describe_checker(name.as_deref());
            ExitCode::SUCCESS
        }
    }
}

fn cmd_run(spec_path: &PathBuf, out: &PathBuf) -> CmdResult<RunStatus> {
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| format!("cannot read {}: {e}", spec_path.display()))?;
    let spec = ExperimentSpec::parse(&text).map_err(|e| e.to_string())?;
    let record = experiments::run(&spec).map_err(|e| e.to_string())?;
    let paths = record.write(out).map_err(|e| e.to_string())?;
    let status = record.status();
    println!("spec {} ({})", spec.name, record.spec_hash);
    for o in &record.outputs {
        println!(
            "  {:<16} status {}",
            o.checker,
            match o.status {
                RunStatus::Success => "ok",
                RunStatus::HypothesisFailures => "hypothesis-failed",
                RunStatus::PrecisionLimited => "precision-limited",
                RunStatus::Error => "error",
            }
        );
    }
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(status)
}

fn cmd_compare(left: &PathBuf, right: &PathBuf) -> CmdResult<bool> {
    let a: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(left).map_err(|e| format!("{}: {e}", left.display()))?,
    )
    .map_err(|e| format!("{}: {e}", left.display()))?;
    let b: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(right).map_err(|e| format!("{}: {e}", right.display()))?,
    )
    .map_err(|e| format!("{}: {e}", right.display()))?;
    let report = experiments::compare(&a, &b).map_err(|e| e.to_string())?;
    if report.identical {
        println!("identical");
    } else {
        println!("{} differences", report.differences.len());
        for d in report.differences.iter().take(50) {
            println!("  {d}");
        }
        if !report.epsilon_pairs.is_empty() {
            println!("epsilon values at diverging paths:");
            for (path, x, y) in &report.epsilon_pairs {
                println!("  {path}: {x} vs {y}");
            }
        }
    }
    Ok(report.identical)
}

const SOURCES_HELP: &str = "\
Word sources (spec keys shared with experiment files):

  kind = periodic
    period = 12                 # digit string or comma list

  kind = morphic
    seed = 1                    # single letter; rule(seed) must start with it
    rule.1 = 12                 # one rule per letter
    rule.2 = 21
    coding.1 = 1                # optional letter-to-letter coding

  kind = sturmian
    slope = 2/5                 # rational, or (a+b*sqrt(D))/c
    slope = (-1+1*sqrt(5))/2
    intercept = 0               # optional rational

  kind = concat
    seeds = 12                  # single-letter seeds, not all equal
    program = X1                # concatenation of placeholders X1..Xm

  kind = explicit
    letters = 121121            # finite word, for tests

Common options: alphabet = N (override), shift = m (start at T^m w).
";

fn describe_checker(name: Option<&str>) {
    let all = [
        (
            "complexity",
            "Factor complexity table n -> P(w, n) with exactness flags.\n\
             params: complexity.n_max (12), window (16384)",
        ),
        (
            "factor-graph",
            "Bipartite factor graphs G_n: vertices are length-n factors, edges are\n\
             length-2n factors; reports edge counts (cross-checked against P(w,2n))\n\
             and connected components.\n\
             params: graph.n_min (1), graph.n_max (8), window (16384)",
        ),
        (
            "uk-sets",
            "Prefix-matrix sets U_k over shifts: sizes, collection size, saturation\n\
             certificates and the equal-cardinality law.\n\
             params: precision (k list), shift_max (100), window (scan budget)",
        ),
        (
            "lmad-periodic",
            "Periodic-word certificate: badly-approximable floors for the two\n\
             eigenvector points (plus their shift images) and exclusion epsilons\n\
             for sampled non-eigenvector points.\n\
             params: lmad.bounds (10,50,100), lmad.samples (20), lmad.seed (1);\n\
             source must be periodic",
        ),
        (
            "concat-scheme",
            "Concatenation-scheme pipeline: reduced matrix recursion, pure-periodicity\n\
             detection, backward-uniqueness evidence, exclusion verdict.\n\
             params: concat.n_max (4096); source must be a concat scheme",
        ),
        (
            "lem1-dichotomy",
            "Real-side convergent inequality and the paired lower-bound dichotomy\n\
             over a box of (a, b) and convergent indices.\n\
             params: lem1.subject (golden | sqrt2m1), lem1.n_max (40),\n\
             lem1.ab_max (5), lem1.epsilon (1/3)",
        ),
        (
            "pbad",
            "Exhaustive badly-approximable scan on a point of P1(Q_p).\n\
             params: pbad.point = a,b  or  pbad.eigenvector_of = <word>;\n\
             pbad.bounds (50)",
        ),
        (
            "th-main",
            "Main exclusion checker for A = A_w: verifies the precision inequality\n\
             and the orbit condition, then reports the exact epsilon.\n\
             params: thmain.word, thmain.point = a,b, thmain.m (max | integer),\n\
             thmain.evidence (periodic | uk-stabilizer | scan), precision (k sweep)",
        ),
        (
            "th-da",
            "Unipotent exclusion checker for A = D_a, including the delta = 0\n\
             unconditional branch.\n\
             params: thda.a, thda.point = a,b, thda.m, thda.evidence",
        ),
    ];
    match name {
        None => {
            for (n, d) in all {
                println!("{n}\n{}\n", indent(d));
            }
        }
        Some(wanted) => match all.iter().find(|(n, _)| *n == wanted) {
            Some((n, d)) => println!("{n}\n{}", indent(d)),
            None => {
                eprintln!("unknown checker `{wanted}`; available:");
                for (n, _) in all {
                    eprintln!("  {n}");
                }
            }
        },
    }
}

fn indent(text: &str) -> String {
    text.lines()
        .map(|l| format!("  {l}"))
        .collect::<Vec<_>>()
        .join("\n")
}
