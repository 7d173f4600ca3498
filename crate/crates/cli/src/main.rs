use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kpzpf::coalesce::{CoalescenceRule, SpawnPoint};
use kpzpf::fgn::HurstIndex;
use kpzpf::harness::{
    compare, emit_plot_data, run_experiment, symmetry_table, DataBank, ExperimentSpec, FieldSelection, HarnessError,
    Model, PValueTable, PlotKind, Statistic,
};
use kpzpf::lpp::{Boundary, Geometry};

#[derive(Parser)]
#[command(name = "kpzpf", version, about = "Coalescing fBM and LPP point fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicas of one model and write a data bank.
    Simulate(SimulateArgs),
    /// K-S p-values of one statistic between every pair of banks.
    Compare(CompareArgs),
    /// Upper-vs-lower K-S p-values of each bank.
    Symmetry(SymmetryArgs),
    /// CSV plot data from one bank.
    Plotdata(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Cfbm,
    Lpp,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Coinflip,
    Regenerate,
    Polya,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpawnArg {
    Midpoint,
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Anchored,
    AxisRoots,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "coinflip")]
    rule: RuleArg,
    /// Urn exponent for `--rule polya`; `inf` lets the heavier particle win.
    #[arg(long, default_value = "1", value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0 / 3.0)]
    hurst: f64,
    /// Horizon; defaults to 256, or 1024 (cfbm) / 4096 (lpp) with --full-scale.
    #[arg(long)]
    n: Option<usize>,
    /// Defaults to 100, or 500 with --full-scale.
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    full_scale: bool,
    /// Start half-width (cfbm) or terminal half-width (anchored lpp).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "midpoint")]
    spawn: SpawnArg,
    #[arg(long, value_enum, default_value = "anchored")]
    geometry: GeometryArg,
    /// Stationary boundary density for lpp; `none` for i.i.d. Exp(1) axes.
    #[arg(long, default_value = "0.5")]
    rho: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Delta0,
    Jump,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Upper,
    Lower,
    Both,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long, num_args = 1.., required = true)]
    banks: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "delta0")]
    stat: StatArg,
    /// Jump distance for `--stat jump`.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "both")]
    field: FieldArg,
    /// Text table; the CSV goes next to it with a `.csv` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SymmetryArgs {
    #[arg(long, num_args = 1.., required = true)]
    banks: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    Survivors,
    Gaps,
}

#[derive(clap::Args)]
struct PlotArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long, value_enum)]
    what: PlotArg,
    #[arg(long)]
    out: PathBuf,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn build_spec(args: &SimulateArgs) -> Result<ExperimentSpec, CliError> {
    let model = match args.model {
        ModelArg::Cfbm => {
            let rule = match args.rule {
                RuleArg::Coinflip => CoalescenceRule::CoinFlip,
                RuleArg::Regenerate => CoalescenceRule::Regenerate,
                RuleArg::Polya => CoalescenceRule::polya(args.alpha).map_err(|e| CliError::Usage(e.to_string()))?,
            };
            let hurst = HurstIndex::new(args.hurst).map_err(|e| CliError::Usage(e.to_string()))?;
            let spawn = match args.spawn {
                SpawnArg::Midpoint => SpawnPoint::Midpoint,
                SpawnArg::Left => SpawnPoint::Left,
                SpawnArg::Right => SpawnPoint::Right,
            };
            Model::CfBm { rule, hurst, spawn }
        }
        ModelArg::Lpp => {
            let boundary = match args.rho.as_str() {
                "none" => Boundary::None,
                rho => Boundary::Stationary {
                    rho: rho
                        .parse()
                        .map_err(|_| CliError::Usage(format!("--rho: expected a number or `none`, got `{rho}`")))?,
                },
            };
            let geometry = match args.geometry {
                GeometryArg::Anchored => Geometry::Anchored,
                GeometryArg::AxisRoots => Geometry::AxisRoots,
            };
            Model::Lpp { boundary, geometry }
        }
    };
    let (n, replicas) = match (args.full_scale, args.model) {
        (false, _) => (256, 100),
        (true, ModelArg::Cfbm) => (1024, 500),
        (true, ModelArg::Lpp) => (4096, 500),
    };
    let mut spec = ExperimentSpec::new(model, args.n.unwrap_or(n), args.replicas.unwrap_or(replicas), args.seed);
    spec.k = args.k;
    Ok(spec)
}

fn load_banks(paths: &[PathBuf]) -> Result<Vec<DataBank>, CliError> {
    Ok(paths.iter().map(DataBank::load).collect::<Result<_, _>>()?)
}

fn emit_table(table: &PValueTable, out: &Path) -> Result<(), CliError> {
    if out.extension().is_some_and(|e| e == "csv") {
        return Err(CliError::Usage("--out names the text table; the CSV is written beside it".into()));
    }
    let text = table.render_text();
    print!("{text}");
    write(out, &text)?;
    write(&out.with_extension("csv"), &table.to_csv())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let spec = build_spec(&args)?;
            let bank = run_experiment(&spec)?;
            bank.save(&args.out)?;
            let skipped = bank.skipped().count();
            eprintln!(
                "{}: {} replicas at n={}, {} skipped -> {}",
                bank.header().label(),
                spec.replicas,
                spec.n,
                skipped,
                args.out.display()
            );
        }
        Command::Compare(args) => {
            let statistic = match args.stat {
                StatArg::Delta0 => Statistic::Delta0,
                StatArg::Jump => Statistic::Jump(args.k),
            };
            let field = match args.field {
                FieldArg::Upper => FieldSelection::Upper,
                FieldArg::Lower => FieldSelection::Lower,
                FieldArg::Both => FieldSelection::Both,
            };
            let table = compare(&load_banks(&args.banks)?, statistic, field)?;
            emit_table(&table, &args.out)?;
        }
        Command::Symmetry(args) => {
            let table = symmetry_table(&load_banks(&args.banks)?)?;
            emit_table(&table, &args.out)?;
        }
        Command::Plotdata(args) => {
            let kind = match args.what {
                PlotArg::Survivors => PlotKind::Survivors,
                PlotArg::Gaps => PlotKind::Gaps,
            };
            write(&args.out, &emit_plot_data(&DataBank::load(&args.bank)?, kind))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kpzpf: {e}");
            ExitCode::FAILURE
        }
    }
}
