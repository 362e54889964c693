use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use mparray::array::GridSpec;
use mparray::bench::{self, parse_on_off, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "mparray", version, about = "Multi-program compiler for neutral-atom arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its report.
    Compile(CompileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pairwise,
    Grouped,
    #[value(alias = "multi-resource")]
    Multi,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pairwise => Mode::Pairwise,
            ModeArg::Grouped => Mode::Grouped,
            ModeArg::Multi => Mode::Multi,
        }
    }
}

#[derive(clap::Args)]
struct CompileArgs {
    /// TOML or JSON file with the same keys as these flags; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Circuit files or directories.
    #[arg(long, num_args = 1..)]
    circuits: Vec<PathBuf>,
    #[arg(long)]
    arrays: Option<usize>,
    #[arg(long)]
    wmax: Option<usize>,
    /// XxY or XxY:RxC (AOD rows x columns).
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Seconds per compilation task.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, value_parser = parse_on_off)]
    strict_exclusivity: Option<bool>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV report path; the JSON report goes next to it. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero timing fields for byte-identical reports.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, value_parser = parse_on_off)]
    start_offsets: Option<bool>,
}

impl CompileArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => {
                let Some(mode) = self.mode else {
                    bail!("--mode is required without --config");
                };
                let Some(grid) = self.grid else {
                    bail!("--grid is required without --config");
                };
                ExperimentConfig::new(mode.into(), self.circuits.clone(), grid)
            }
        };
        if let Some(m) = self.mode {
            cfg.mode = m.into();
        }
        if !self.circuits.is_empty() {
            cfg.circuits = self.circuits;
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v;
                }
            )*};
        }
        set!(arrays, time_limit, window, strict_exclusivity, jobs, seed, start_offsets);
        if self.wmax.is_some() {
            cfg.wmax = self.wmax;
        }
        if self.out.is_some() {
            cfg.out = self.out;
        }
        cfg.deterministic |= self.deterministic;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn compile(args: CompileArgs) -> Result<i32> {
    let cfg = args.into_config()?;
    let circuits = bench::load_workload(&cfg)?;
    info!("loaded {} circuits", circuits.len());
    let report = bench::run(&cfg, &circuits)?;
    match &cfg.out {
        Some(path) => report
            .write(path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{}", report.to_csv()?),
    }
    if !report.is_complete() {
        eprintln!(
            "incomplete: {} row(s) did not finish{}",
            report.pairs.iter().filter(|r| r.status != bench::RowStatus::Ok).count()
                + report
                    .circuits
                    .iter()
                    .filter(|r| r.order.is_some() && r.status != bench::RowStatus::Ok)
                    .count(),
            if report.has_timeouts() { " (time limit reached)" } else { "" }
        );
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Compile(args) => compile(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
