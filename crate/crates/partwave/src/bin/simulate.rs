use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use partwave::cli::{self, EvalFlags, EvalWhat, Figure};

/// Partial-wave simulator: figure-reproduction pipelines and ad-hoc
/// evaluation of packets, coefficients, densities and spin fields.
#[derive(Parser)]
#[command(name = "simulate", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (key=value lines, '#' comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value overrides applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Radial motion of the 8 lowest weighted partial waves over half a period.
    Fig1(RunArgs),
    /// The 16 lowest weighted partial-wave profiles at t = 0.
    Fig2(RunArgs),
    /// Six density frames on the plane containing the trajectory axis.
    Fig3(RunArgs),
    /// Six cut planes perpendicular to the trajectory axis.
    Fig4(RunArgs),
    /// The fig3 frames plus a vortex-ring metrics summary.
    Fig5(RunArgs),
    /// Spin-component decomposition perpendicular to the trajectory (N = 4).
    Fig6(RunArgs),
    /// Ad-hoc evaluation: packet | partialwave | coeffs | density | spin | norm.
    Eval {
        /// packet | partialwave | coeffs | density | spin | norm
        what: String,
        #[command(flatten)]
        run: RunArgs,
        /// Degree l (partialwave).
        #[arg(long)]
        l: Option<u32>,
        /// Order m (partialwave).
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i32>,
        /// Evaluation time.
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// Grid: plane:<axis>:<offset>:<n>[:<extent>] | cut:... | radial:<n>[:<rmax>] | line:<axis>:<n>[:<extent>]
        #[arg(long)]
        grid: Option<String>,
        /// Spin projection axis: x | y | z | ax,ay,az.
        #[arg(long)]
        axis: Option<String>,
        /// Fixed truncation degree (coeffs).
        #[arg(long)]
        lmax: Option<u32>,
    },
}

fn run(command: Command) -> partwave::Result<()> {
    match command {
        Command::Fig1(args) => run_fig(Figure::Fig1, args),
        Command::Fig2(args) => run_fig(Figure::Fig2, args),
        Command::Fig3(args) => run_fig(Figure::Fig3, args),
        Command::Fig4(args) => run_fig(Figure::Fig4, args),
        Command::Fig5(args) => run_fig(Figure::Fig5, args),
        Command::Fig6(args) => run_fig(Figure::Fig6, args),
        Command::Eval {
            what,
            run,
            l,
            m,
            t,
            grid,
            axis,
            lmax,
        } => {
            let what: EvalWhat = what.parse()?;
            let mut parsed = cli::load_config(run.config.as_deref(), &run.overrides)?;
            if let Some(out) = run.out {
                parsed.out = Some(out);
            }
            let flags = EvalFlags {
                l,
                m,
                t,
                grid,
                axis,
                lmax,
            };
            cli::run_eval(what, &parsed, &flags)?;
            Ok(())
        }
    }
}

fn run_fig(fig: Figure, args: RunArgs) -> partwave::Result<()> {
    let mut parsed = cli::load_config(args.config.as_deref(), &args.overrides)?;
    if let Some(out) = args.out {
        parsed.out = Some(out);
    }
    cli::run_figure(fig, &parsed)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("simulate: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
