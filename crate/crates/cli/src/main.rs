mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome, RunConfig};

#[derive(Parser)]
#[command(name = "nclab", version, about = "Exact relative-noncontextuality toolkit")]
struct Cli {
    /// Map verdicts to exit codes: noncontextual 0, contextual 1, error 2.
    #[arg(long, global = true)]
    exit_verdict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    /// Data table JSON.
    #[arg(long)]
    table: PathBuf,
    /// Scenario JSON (preparations and effects).
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Args)]
struct Caps {
    /// Dual-cone ray cap.
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    max_rays: u64,
    /// Linear-program row cap.
    #[arg(long, default_value_t = 200_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_lp_rows: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Prep,
    Effect,
}

#[derive(Subcommand)]
enum Command {
    /// Check a table, and optionally a scenario and a reference, for well-formedness.
    Validate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Compare two densities under a reference.
    Indist {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, value_enum, default_value = "prep")]
        side: SideArg,
        /// Density as inline JSON, e.g. '{"P1":"1/2","P2":"1/2"}'.
        #[arg(long)]
        d1: String,
        #[arg(long)]
        d2: String,
    },
    /// Decide relative noncontextuality.
    Decide {
        #[command(flatten)]
        inputs: Inputs,
        /// Reference JSON; defaults to the scenario itself.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Write the verified certificate here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Run the linear program even for unfaithful references.
        #[arg(long)]
        no_shortcut: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Compare two references in the indistinguishability preorder.
    Preorder {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Build the noncontextuality graph of a reference family.
    Graph {
        #[command(flatten)]
        inputs: Inputs,
        /// Explicit reference list JSON.
        #[arg(long, conflicts_with = "enumerate", required_unless_present = "enumerate")]
        refs: Option<PathBuf>,
        /// Power-set enumeration policy JSON.
        #[arg(long)]
        enumerate: Option<PathBuf>,
        #[arg(long)]
        faithful_only: bool,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Worker threads; 0 picks the number of cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Verdict cache directory (default: $NCLAB_CACHE, else .nclab-cache).
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[arg(long, conflicts_with = "cache_dir")]
        no_cache: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Cross-check the operational verdict against the quantum fragment.
    Quantum {
        #[command(flatten)]
        inputs: Inputs,
        /// Quantum model JSON; defaults to the diagonal model.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Write the model that was used here.
        #[arg(long)]
        emit_model: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate {
            table,
            scenario,
            reference,
        } => commands::cmd_validate(&table, scenario.as_deref(), reference.as_deref()),
        Command::Indist {
            table,
            reference,
            side,
            d1,
            d2,
        } => commands::cmd_indist(&table, &reference, matches!(side, SideArg::Prep), &d1, &d2),
        Command::Decide {
            inputs,
            reference,
            certificate,
            no_shortcut,
            caps,
        } => {
            let config = RunConfig {
                max_rays: caps.max_rays as usize,
                max_lp_rows: caps.max_lp_rows as usize,
                faithfulness_shortcut: !no_shortcut,
                ..RunConfig::default()
            };
            commands::cmd_decide(
                &inputs.table,
                &inputs.scenario,
                reference.as_deref(),
                certificate.as_deref(),
                &config,
            )
        }
        Command::Preorder { inputs, a, b } => {
            commands::cmd_preorder(&inputs.table, &inputs.scenario, &a, &b)
        }
        Command::Graph {
            inputs,
            refs,
            enumerate,
            faithful_only,
            dot,
            json,
            threads,
            cache_dir,
            no_cache,
            caps,
        } => {
            let config = RunConfig {
                max_rays: caps.max_rays as usize,
                max_lp_rows: caps.max_lp_rows as usize,
                faithful_only,
                threads,
                cache_dir,
                use_cache: !no_cache,
                ..RunConfig::default()
            };
            let family = match (refs, enumerate) {
                (Some(r), _) => commands::Family::Explicit(r),
                (None, Some(e)) => commands::Family::Enumerate(e),
                (None, None) => unreachable!("clap requires one of --refs and --enumerate"),
            };
            commands::cmd_graph(
                &inputs.table,
                &inputs.scenario,
                &family,
                dot.as_deref(),
                json.as_deref(),
                &config,
            )
        }
        Command::Quantum {
            inputs,
            model,
            emit_model,
        } => commands::cmd_quantum(&inputs.table, &inputs.scenario, model.as_deref(), emit_model.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exit_verdict = cli.exit_verdict;
    match run(cli.command) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.report).expect("report serializes"));
            match (exit_verdict, outcome.noncontextual) {
                (true, Some(false)) => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(err) => {
            println!("{}", serde_json::to_string_pretty(&err.report()).expect("report serializes"));
            ExitCode::from(if exit_verdict { 2 } else { 1 })
        }
    }
}
