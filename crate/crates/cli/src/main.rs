use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ultratight::harness::{compare, run, Fidelity, MetricsReport, RunConfig, METRICS_JSON};
use ultratight::loops::Architecture;
use ultratight::scenario::preset::{figure_eight_desk, static_desk, PRESETS};
use ultratight::scenario::ScenarioConfig;
use ultratight::Error;

const COMPARISON_CSV: &str = "comparison.csv";
const PLOT_JSON: &str = "plot.json";

#[derive(Parser)]
#[command(name = "ultratight", version, about = "GNSS tracking-loop laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario with one tracking architecture.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = parse::<Architecture>)]
        arch: Architecture,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "sample", value_parser = parse::<Fidelity>)]
        fidelity: Fidelity,
        /// Also write the synthesized IF stream (sample fidelity only).
        #[arg(long)]
        raw_iq: bool,
    },
    /// Merge metrics reports into one comparison table.
    Compare {
        #[arg(long)]
        out: PathBuf,
        /// metrics.json files or run directories holding one.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Scenario files.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Write a preset scenario as TOML.
    Gen {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: PathBuf,
        /// C/N0 the schedule degrades to, dB-Hz.
        #[arg(long, default_value_t = 30.0)]
        cn0: f64,
    },
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// 2 for anything the user can fix in the inputs, 3 for aborts mid-run.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Malformed(_) | Error::Mismatch(_) | Error::InvalidParameter(_) | Error::InvalidPrn(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { config, arch, seed, out, fidelity, raw_iq } => {
            let scenario = ScenarioConfig::from_file(&config)?;
            let cfg = RunConfig { out_dir: Some(out.clone()), fidelity, raw_iq, ..RunConfig::new(scenario, arch, seed) };
            let output = run(&cfg)?;
            let r = &output.report;
            let pos = r.position_rmse.map_or("n/a".to_string(), |p| format!("{p:.3} m"));
            println!("{} {arch} seed {seed}: position RMSE {pos}, report in {}", r.scenario, out.display());
            Ok(())
        }
        Command::Compare { out, reports } => {
            let reports = reports.iter().map(|p| load_report(p)).collect::<Result<Vec<_>, _>>()?;
            let table = compare(&reports)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join(COMPARISON_CSV), table.to_csv())?;
            std::fs::write(out.join(PLOT_JSON), table.plot_json())?;
            println!("{} columns, {} rows written to {}", table.columns.len(), table.rows.len(), out.display());
            Ok(())
        }
        Command::Scenario { command: ScenarioCommand::Gen { preset, out, cn0 } } => {
            let sc = match preset.as_str() {
                "figure-eight" => figure_eight_desk(cn0),
                "static" => static_desk(cn0),
                other => return Err(Error::Config(format!("unknown preset {other:?}; known: {}", PRESETS.join(", ")))),
            };
            sc.validate()?;
            std::fs::write(&out, sc.to_toml_string()?)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn load_report(path: &Path) -> Result<MetricsReport, Error> {
    let file = if path.is_dir() { path.join(METRICS_JSON) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&file).map_err(|e| Error::Config(format!("{}: {e}", file.display())))?;
    MetricsReport::from_json(&text)
}
