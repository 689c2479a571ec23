mod commands;
mod report;

use apcert::subsetsum_ap::Profile;
use clap::{Parser, Subcommand};
use commands::Stop;
use report::{Args, RunReport, Status};
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "apcert", version, about = "Certified arithmetic progressions in sumsets and subset sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// Input set: whitespace-separated integers, `#` starts a comment.
    #[arg(long)]
    input: String,
    /// Seed for every random choice; falls back to APCERT_SEED, then 0.
    #[arg(long, env = "APCERT_SEED", default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this path.
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
}

#[derive(clap::Args, Clone)]
struct Queries {
    /// Query and verify every term of the progression.
    #[arg(long)]
    verify_all: bool,
    /// Query and verify N terms chosen with the seed.
    #[arg(long, value_name = "N", conflicts_with = "verify_all")]
    sample: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Progression inside the k-fold sumset kA.
    ApSumset {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        queries: Queries,
        /// Length scale; defaults to max(A).
        #[arg(long)]
        m: Option<i128>,
        /// Number of summands; defaults to ⌈(m+1)/|A|⌉.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Progression of subset sums with element-disjoint certificates.
    ApSubsetsum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        queries: Queries,
        #[arg(long)]
        ell: i128,
        #[arg(long, default_value = "tuned")]
        profile: Profile,
    },
    /// Nonnegative multipliers x with Σ a_i·x_i = target.
    Unbounded {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: i128,
    },
    /// Decide and solve subset sum on a dense set.
    Dense {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: i128,
        #[arg(long, default_value = "tuned")]
        profile: Profile,
    },
    /// Replay the certificates of a saved JSON report against an input set.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        report: String,
    },
}

fn args(common: &Common) -> Args {
    Args {
        input: common.input.clone(),
        ..Args::default()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let (mut report, common, result) = match cli.command {
        Command::ApSumset { common, queries, m, k } => {
            let a = Args {
                m,
                k,
                verify_all: queries.verify_all,
                sample: queries.sample,
                ..args(&common)
            };
            let mut r = commands::new_report("ap-sumset", a, common.seed);
            let res = commands::ap_sumset(&mut r);
            (r, common, res)
        }
        Command::ApSubsetsum {
            common,
            queries,
            ell,
            profile,
        } => {
            let a = Args {
                ell: Some(ell),
                verify_all: queries.verify_all,
                sample: queries.sample,
                ..args(&common)
            };
            let mut r = commands::new_report("ap-subsetsum", a, common.seed);
            r.profile = Some(profile.name().to_string());
            let res = commands::ap_subsetsum(&mut r, &profile);
            (r, common, res)
        }
        Command::Unbounded { common, target } => {
            let a = Args {
                target: Some(target),
                ..args(&common)
            };
            let mut r = commands::new_report("unbounded", a, common.seed);
            let res = commands::unbounded(&mut r);
            (r, common, res)
        }
        Command::Dense { common, target, profile } => {
            let a = Args {
                target: Some(target),
                ..args(&common)
            };
            let mut r = commands::new_report("dense", a, common.seed);
            r.profile = Some(profile.name().to_string());
            let res = commands::dense(&mut r, &profile);
            (r, common, res)
        }
        Command::Verify { common, report } => {
            let mut r = commands::new_report("verify", args(&common), common.seed);
            let res = commands::verify(&mut r, &report);
            (r, common, res)
        }
    };
    if let Err(Stop {
        status,
        message,
        partial,
    }) = result
    {
        report.status = status;
        report.error = Some(message);
        report.partial_ap = partial.map(Into::into);
    }
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &common.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write {path}: {e}");
            return ExitCode::from(Status::Precondition.exit_code() as u8);
        }
    }
    let text = if common.json { format!("{json}\n") } else { human(&report) };
    // a closed pipe downstream is not an error of ours
    let _ = std::io::stdout().write_all(text.as_bytes());
    eprintln!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    ExitCode::from(report.status.exit_code() as u8)
}

fn human(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command: {}", r.command);
    if let Some(p) = &r.profile {
        let _ = writeln!(out, "profile: {p}");
    }
    let _ = writeln!(out, "seed: {}", r.seed);
    let _ = writeln!(out, "input size: {}", r.input_size);
    if let Some(ap) = &r.ap {
        let _ = writeln!(out, "progression (s, d, ℓ) = ({}, {}, {})", ap.start, ap.diff, ap.length);
    }
    if let Some(ap) = &r.partial_ap {
        let _ = writeln!(out, "partial progression (s, d, ℓ) = ({}, {}, {})", ap.start, ap.diff, ap.length);
    }
    if r.fold_budget > 0 {
        let _ = writeln!(out, "summand budget: {}", r.fold_budget);
    }
    if let Some(d) = r.decision {
        let _ = writeln!(out, "decision: {}", if d { "yes" } else { "no" });
    }
    for c in &r.certificates {
        if c.index.is_none() {
            let parts: Vec<String> = c.parts.iter().map(|(v, n)| if *n == 1 { v.to_string() } else { format!("{v}×{n}") }).collect();
            let _ = writeln!(out, "solution for {}: {}", c.target, parts.join(" + "));
        }
    }
    if let Some(x) = &r.x {
        let terms: Vec<String> = x.iter().map(|(a, c)| format!("{a}·{c}")).collect();
        let _ = writeln!(out, "multipliers: {}", terms.join(" + "));
    }
    for (k, v) in &r.details {
        let _ = writeln!(out, "{k}: {v}");
    }
    let v = &r.verification;
    if v.checked > 0 {
        let _ = writeln!(out, "certificates: {}/{} verified", v.passed, v.checked);
        for f in v.failures.iter().take(10) {
            let _ = writeln!(out, "  failed {}: {}", f.target, f.reason);
        }
    }
    match &r.error {
        Some(e) => writeln!(out, "status: {} ({e})", r.status.name()),
        None => writeln!(out, "status: {}", r.status.name()),
    }
    .expect("writing to a String");
    out
}
