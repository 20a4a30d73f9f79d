use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bhsim::runner::{self, ExperimentConfig, RunOptions};
use bhsim::Error;

/// Lattice-boson dynamics runner: propagates coupled condensates and
/// records filling levels, density-matrix purities and interference
/// contrast as plot-ready time series.
#[derive(Parser)]
#[command(name = "bhsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Directory for time-series and manifest files.
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Worker thread count; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the integrator step size.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the propagation end time.
    #[arg(long)]
    t_final: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a named preset experiment.
    Preset {
        name: String,
        /// Dotted-path config overrides, e.g. --set plan.dt=5e-4
        /// or --set particles.total=10. Applied before --dt/--t-final.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Run ring presets at the full N = 70 (about 1.4 GB and hours of
        /// compute; the default desk scale is N = 30).
        #[arg(long)]
        full_scale: bool,
        /// Print the resolved config as TOML and exit without running.
        #[arg(long)]
        print_config: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Check a config file and report findings, the basis dimension, the
    /// memory estimate and the step count.
    Validate { config: PathBuf },
    /// List the available presets.
    Presets,
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml(&text)
}

fn apply_common(config: &mut ExperimentConfig, common: &CommonOpts) {
    if let Some(dt) = common.dt {
        config.plan.dt = dt;
    }
    if let Some(t_final) = common.t_final {
        config.plan.t_final = t_final;
    }
}

fn execute(config: &ExperimentConfig, common: &CommonOpts) -> Result<(), Error> {
    let options = RunOptions { output_dir: common.output_dir.clone(), workers: common.workers };
    let report = runner::run(config, &options)?;
    for run in &report.runs {
        println!("{}: {} samples -> {}", run.label, run.series.len(), run.data_path.display());
    }
    Ok(())
}

fn main_inner() -> Result<(), Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, common } => {
            let mut config = load_config(&config)?;
            apply_common(&mut config, &common);
            execute(&config, &common)
        }
        Command::Preset { name, set, full_scale, print_config, common } => {
            let mut config = runner::preset(&name)?;
            if full_scale {
                if config.lattice.topology != runner::Topology::Ring {
                    return Err(Error::Usage("--full-scale applies to ring presets only".into()));
                }
                config.particles.total = 70;
                config.particles.split = Some(vec![35, 35]);
            }
            for assignment in &set {
                config.apply_override(assignment)?;
            }
            apply_common(&mut config, &common);
            if print_config {
                print!("{}", config.to_toml());
                return Ok(());
            }
            execute(&config, &common)
        }
        Command::Validate { config } => {
            let config = load_config(&config)?;
            let report = runner::validate(&config);
            println!("dimension: {}", report.dimension);
            println!(
                "memory estimate: {:.1} MB (5 state buffers x 16 bytes per amplitude)",
                report.memory_estimate_bytes as f64 / 1e6
            );
            println!("steps: {}", report.steps_estimate);
            if report.findings.is_empty() {
                println!("findings: none");
            } else {
                for finding in &report.findings {
                    println!("finding: {finding}");
                }
            }
            Ok(())
        }
        Command::Presets => {
            for name in runner::PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
