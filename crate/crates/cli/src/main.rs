use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use renarea::variation::Mutation;
use renarea_cli::{output_dir, run_case, run_sweep, run_validation_suite, Axis, CaseSpec, CliError, Profile, SuiteOptions, EXIT_NUMERIC, OUT_ENV};

#[derive(Parser)]
#[command(name = "renarea", version, about = "Renormalized area of minimal surfaces in hyperbolic 3-space")]
struct Cli {
    /// Worker threads for sweeps and the validation suite.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Seed for randomized checks; overrides the case file seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case file and write its report bundle.
    Run {
        #[arg(long)]
        case: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a case template over a parameter axis.
    Sweep {
        #[arg(long)]
        template: PathBuf,
        /// name=start:stop:n, with name a dotted field of the template.
        #[arg(long)]
        axis: Axis,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Run the validation suite.
    Validate {
        #[arg(long, default_value = "default")]
        profile: String,
        #[arg(long, default_value = "validation")]
        out: PathBuf,
        /// Deliberately corrupt a formula to check that the suite notices.
        #[arg(long, value_enum, hide = true, default_value = "none")]
        mutation: MutationArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    None,
    FlipFirstVariationSign,
}

fn out_root() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).map(PathBuf::from)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let root = out_root();
    match cli.command {
        Command::Run { case, out } => {
            let mut spec = CaseSpec::load(&case)?;
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let dir = out.or_else(|| spec.out.clone()).unwrap_or_else(|| PathBuf::from(&spec.name));
            let dir = output_dir(root.as_deref(), &dir);
            let run = run_case(&spec);
            run.bundle.write(&dir)?;
            let rep = &run.report;
            if let Some(r) = &rep.renarea {
                println!("{}: renormalized area {:.10} (Hadamard {:.10}, discrepancy {:.2e})", rep.case, r.value(), r.hadamard.renarea, r.discrepancy);
            }
            println!("bundle written to {}", dir.display());
            run.into_result().map(|_| ())
        }
        Command::Sweep { template, axis, out } => {
            let text = std::fs::read_to_string(&template).map_err(|e| CliError::Spec(format!("{}: {e}", template.display())))?;
            let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Spec(e.to_string()))?;
            if let Some(seed) = cli.seed {
                value["seed"] = seed.into();
            }
            resolve_template_paths(&mut value, template.parent().unwrap_or(Path::new(".")));
            let run = run_sweep(&value, &axis, cli.workers)?;
            let dir = output_dir(root.as_deref(), &out);
            run.bundle.write(&dir)?;
            println!("{} points, {} failed; table written to {}", run.summary.points, run.summary.failures, dir.join("sweep.csv").display());
            if let Some((a, b)) = run.summary.existence_bracket {
                println!("existence changes between {} = {a} and {b}", axis.name);
            }
            Ok(())
        }
        Command::Validate { profile, out, mutation } => {
            let opts = SuiteOptions {
                profile: Profile::named(&profile)?,
                seed: cli.seed.unwrap_or(0),
                workers: cli.workers,
                mutation: match mutation {
                    MutationArg::None => Mutation::None,
                    MutationArg::FlipFirstVariationSign => Mutation::FlipFirstVariationSign,
                },
            };
            let run = run_validation_suite(&opts)?;
            let dir = output_dir(root.as_deref(), &out);
            run.bundle.write(&dir)?;
            print!("{}", run.summary.table());
            if run.summary.ok() {
                Ok(())
            } else {
                Err(CliError::Validation(format!("{} of {} checks failed", run.summary.failed, run.summary.checks.len())))
            }
        }
    }
}

/// Curve file paths in a template are relative to the template.
fn resolve_template_paths(value: &mut serde_json::Value, dir: &Path) {
    if let Some(p) = value.pointer_mut("/curve/path") {
        if let Some(s) = p.as_str() {
            if Path::new(s).is_relative() {
                *p = dir.join(s).to_string_lossy().into_owned().into();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            ExitCode::from(if code == 0 { EXIT_NUMERIC } else { code } as u8)
        }
    }
}
