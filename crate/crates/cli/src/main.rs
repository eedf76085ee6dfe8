//! `surface-ac`: run, sweep and inspect modified Allen-Cahn simulations.
//!
//! Exit codes: 0 success, 1 usage, 2 input error, 3 numerical failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "surface-ac",
    version,
    about = "Modified Allen-Cahn patterns on triangulated surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write PLY, field, trace and report files.
    #[command(allow_negative_numbers = true)]
    Run(SimArgs),
    /// Run the same setup for several values of b and tabulate the patterns.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        /// Comma-separated values of b, e.g. "-0.5,-0.2,0,0.2,0.5".
        #[arg(long, allow_hyphen_values = true)]
        b_list: Option<String>,
    },
    /// Integrate a stationary 1D profile and report its first integral.
    #[command(allow_negative_numbers = true)]
    Oned(OnedArgs),
    /// Print mesh diagnostics. Exits with 2 if the mesh has defects.
    Validate {
        /// Mesh file (OBJ or OFF) or builtin spec.
        #[arg(long)]
        mesh: String,
        /// Print JSON instead of key = value lines.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Localized,
}

#[derive(Args, Debug, Clone, Default)]
struct SimArgs {
    /// Mesh file (OBJ or OFF) or builtin: icosphere:<level>[:<radius>],
    /// torus:<nx>:<ny>[:<major>:<minor>], tetrahedron.
    #[arg(long)]
    mesh: Option<String>,
    /// Flat key = value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Center vertex for localized initial data.
    #[arg(long)]
    center: Option<usize>,
    /// Radius in edge hops for localized initial data.
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Value outside the localized region.
    #[arg(long)]
    background: Option<f64>,
    /// Any other config key, as KEY=VALUE. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug, Clone, Default)]
struct OnedArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    b: Option<f64>,
    /// u at the left end of the window.
    #[arg(long)]
    u0: Option<f64>,
    /// u' at the left end of the window.
    #[arg(long)]
    du0: Option<f64>,
    #[arg(long)]
    x_start: Option<f64>,
    #[arg(long)]
    x_end: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(sim) => commands::run(&sim),
        Command::Sweep { sim, b_list } => commands::sweep(&sim, b_list.as_deref()),
        Command::Oned(args) => commands::oned(&args),
        Command::Validate { mesh, json } => commands::validate(&mesh, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.kind.code())
        }
    }
}
