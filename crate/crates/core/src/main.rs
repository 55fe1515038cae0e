use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bundle_degrees::cohomology::{
    admissible_witness, degree_set_closed_form, verify_only_obstruction, Space,
};
use bundle_degrees::degree::{mc_degree, preimage_degree, EngineConfig};
use bundle_degrees::manifold::Seed;
use bundle_degrees::maps::{resolve_map, GVariant};
use bundle_degrees::properties::PropertyConfig;
use bundle_degrees::report::{Record, Report};
use bundle_degrees::theorem::{self, TheoremConfig};

#[derive(Parser)]
#[command(
    name = "bundle-degrees",
    version,
    about = "Mapping degrees between S3xS5 and SU(3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Preimage,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    /// Evaluate the g-membership property with one entry of g altered.
    GEntry,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the report here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Budget {
    #[arg(long, default_value_t = 5)]
    targets: usize,
    #[arg(long, default_value_t = 5000)]
    starts: usize,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
}

impl Budget {
    fn engine(&self, workers: usize) -> EngineConfig {
        EngineConfig {
            num_targets: self.targets,
            num_starts: self.starts,
            mc_samples: self.samples,
            workers,
            ..EngineConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Degree of a catalog map.
    Degree {
        #[arg(long)]
        map: String,
        #[arg(long, value_enum, default_value_t = EngineArg::Preimage)]
        engine: EngineArg,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        common: Common,
    },
    /// Whether a degree is admissible, or the closed-form degree set.
    Oracle {
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        degree: Option<i64>,
        #[arg(long)]
        set: bool,
        #[arg(long, default_value_t = 1000)]
        range: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every acceptance criterion, one record each, plus an overall verdict.
    VerifyTheorem {
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        range: i64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Run only these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Randomized property suites.
    Selftest {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum)]
        inject_fault: Option<FaultArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(report: &Report, out: Option<&PathBuf>) -> ExitCode {
    if let Some(path) = out {
        if let Err(e) = report.write_to_path(path) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn print_all(report: &Report) {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let _ = report.write(&mut lock);
    let _ = lock.flush();
}

fn cmd_degree(map: &str, engine: EngineArg, budget: &Budget, common: &Common) -> Report {
    let start = Instant::now();
    let cfg = budget.engine(common.workers);
    let seed = Seed(common.seed);
    let mut rec = Record::new("degree");
    let result = resolve_map(map).and_then(|phi| match engine {
        EngineArg::Preimage => preimage_degree(&phi, &cfg, seed),
        EngineArg::Mc => mc_degree(&phi, cfg.mc_samples, seed, cfg.workers),
    });
    let pass = match result {
        Ok(r) => {
            rec.push_degree(&r);
            r.agreement
        }
        Err(e) => {
            rec.push("map", map).push("error", e);
            false
        }
    };
    rec.push_config(seed, &cfg);
    let mut report = Report::default();
    report.push(rec.finish(start.elapsed().as_millis(), pass));
    report
}

fn cmd_oracle(source: &str, target: &str, degree: Option<i64>, set: bool, range: i64) -> Report {
    let start = Instant::now();
    let mut rec = Record::new("oracle");
    rec.push("source", source).push("target", target);
    let pass = match (Space::parse(source), Space::parse(target)) {
        (Ok(s), Ok(t)) => {
            let mut ok = true;
            if let Some(d) = degree {
                let w = admissible_witness(s, t, d);
                rec.push("degree", d).push("admissible", w.is_some());
                if let Some((k, l)) = w {
                    rec.push("kappa", k).push("lambda", l);
                }
            }
            if set || degree.is_none() {
                let verified = verify_only_obstruction(s, t, range);
                rec.push("set", degree_set_closed_form(s, t))
                    .push("range", range)
                    .push("range_verified", verified);
                ok &= verified;
            }
            ok
        }
        (Err(e), _) | (_, Err(e)) => {
            rec.push("error", e);
            false
        }
    };
    let mut report = Report::default();
    report.push(rec.finish(start.elapsed().as_millis(), pass));
    report
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Degree {
            map,
            engine,
            budget,
            common,
        } => {
            let report = cmd_degree(&map, engine, &budget, &common);
            print_all(&report);
            emit(&report, common.out.as_ref())
        }
        Command::Oracle {
            source,
            target,
            degree,
            set,
            range,
            out,
        } => {
            let report = cmd_oracle(&source, &target, degree, set, range);
            print_all(&report);
            emit(&report, out.as_ref())
        }
        Command::VerifyTheorem {
            budget,
            common,
            range,
            trials,
            only,
        } => {
            let cfg = TheoremConfig {
                engine: budget.engine(common.workers),
                seed: Seed(common.seed),
                range_bound: range,
                trials,
            };
            let report = theorem::verify_theorem_with(&cfg, &only, |r| {
                println!("{r}");
                let _ = io::stdout().flush();
            });
            emit(&report, common.out.as_ref())
        }
        Command::Selftest {
            trials,
            seed,
            inject_fault,
            out,
        } => {
            let cfg = PropertyConfig {
                trials,
                seed: Seed(seed),
                g_variant: match inject_fault {
                    Some(FaultArg::GEntry) => GVariant::CorruptedEntry,
                    None => GVariant::Normalized,
                },
            };
            let report = theorem::selftest(&cfg);
            print_all(&report);
            emit(&report, out.as_ref())
        }
    }
}
