use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hexfwi::io::{read_model, write_image, write_profiles, Palette, RunConfig};
use hexfwi::pipeline::{initial_model, plan_stages, run_forward, run_gradcheck, run_invert};
use hexfwi::{initial_frequency, Result};

const CONFIG_HELP: &str = "\
CONFIG FILE (JSON, or TOML when the name ends in .toml; relative paths are
resolved against the config file's directory)

  model              true model header (.json with sibling .bin); reference grid for inversions
  data_dir           dataset directory written by `forward`, read by `invert`
  output_dir         checkpoints, summary.csv, history.jsonl and final model
  schedule           frequencies in Hz, strictly increasing
  geometry.sources   {count, spacing, first_offset, depth?} or [[x, z], ...]
  geometry.receivers same form; depth defaults to one model row below the origin
  solver             points_per_wavelength (8.5), pml_wavelengths (1.0), pml_amplitude (1.79),
                     pml_exponent (2), shape_parameter (0.0, 1/m), node_budget (5000000)
  optimizer          kind = {method = \"lbfgs\", memory = 10} or
                     {method = \"barzilai-borwein\", variant = \"bb1\" | \"bb2\"};
                     initial_step (0.01), armijo (1e-4), max_backtracks (30)
  velocity_bounds    optional [c_min, c_max] applied to every iterate
  stop               tol_g (1e-7), tol_j (1e-12), maxiter (800)
  initial_model      {kind = \"file\", path} or {kind = \"linear\", c_top, c_bottom, shallow_depth?};
                     defaults to linear between the model's min and max velocity
  sizing_reference   optional {min, mean} velocities that size grids (default: from the model
                     for `forward`, from the dataset manifest for `invert`)
  noise              optional {snr_db}
  seed               RNG seed for noise and gradcheck directions (0)
  gradcheck          frequency_hz (2.0), directions (10), steps ([1e-2 .. 1e-6])

EXIT CODES
  0 success, 2 validation or input error, 3 numerical failure";

#[derive(Parser)]
#[command(name = "hexfwi", version, about = "Frequency-domain FWI on hexagonal RBF-FD grids", after_long_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file.
    #[arg(long, short)]
    config: PathBuf,
    /// Override the frequency schedule (comma separated Hz).
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<f64>>,
    /// RNG seed for noise and gradcheck directions.
    #[arg(long)]
    seed: Option<u64>,
    /// Dataset directory.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Checkpoint and result directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Iteration cap per frequency.
    #[arg(long)]
    maxiter: Option<usize>,
    /// Grid points per minimum wavelength.
    #[arg(long)]
    points_per_wavelength: Option<f64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(RunConfig, String)> {
        let (mut config, text) = RunConfig::load(&self.config)?;
        if let Some(s) = &self.schedule {
            config.schedule = s.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(d) = &self.data_dir {
            config.data_dir = d.clone();
        }
        if let Some(d) = &self.output_dir {
            config.output_dir = d.clone();
        }
        if let Some(n) = self.maxiter {
            config.stop.maxiter = n;
        }
        if let Some(ng) = self.points_per_wavelength {
            config.solver.points_per_wavelength = ng;
        }
        Ok((config, text))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate observed data for every scheduled frequency.
    Forward(ConfigArgs),
    /// Run the multi-scale inversion.
    Invert {
        #[command(flatten)]
        config: ConfigArgs,
        /// Skip stages that already have a complete checkpoint.
        #[arg(long)]
        resume: bool,
        /// Print per-stage grid sizes and memory estimates without solving.
        #[arg(long)]
        dry_run: bool,
    },
    /// Print spacing, node counts and PML thickness per frequency.
    GridInfo(ConfigArgs),
    /// Render a model as PGM (gray) or PPM (jet).
    Image {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Palette::Gray)]
        palette: Palette,
        #[arg(long, requires = "clip_max")]
        clip_min: Option<f64>,
        #[arg(long, requires = "clip_min")]
        clip_max: Option<f64>,
    },
    /// Write vertical profiles at the given x positions to CSV.
    Profiles {
        #[arg(long)]
        model: PathBuf,
        /// Horizontal positions in metres (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare adjoint and finite-difference directional derivatives.
    Gradcheck {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        frequency: Option<f64>,
        #[arg(long)]
        directions: Option<usize>,
    },
}

fn print_plans(config: &RunConfig) -> Result<()> {
    println!("frequency_hz,spacing_m,pml_thickness_m,rows,cols,nodes,inner_nodes,estimated_factor_mib");
    for p in plan_stages(config)? {
        println!(
            "{},{:.4},{:.2},{},{},{},{},{:.1}",
            p.frequency_hz,
            p.spacing,
            p.pml_thickness,
            p.rows,
            p.cols,
            p.nodes,
            p.inner_nodes,
            p.estimated_factor_bytes as f64 / (1024.0 * 1024.0)
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Forward(args) => {
            let (config, text) = args.load()?;
            let manifest = run_forward(&config, &text, &args.config)?;
            for e in &manifest.files {
                println!("{}", config.data_dir.join(&e.file).display());
            }
        }
        Command::Invert { config: args, resume, dry_run } => {
            let (config, text) = args.load()?;
            if dry_run {
                return print_plans(&config);
            }
            let reference = read_model(&config.model)?;
            let m0 = initial_model(&config, &reference)?;
            let f0 = initial_frequency(&m0.slowness_squared(), reference.depth())? / (2.0 * PI);
            if config.schedule.first().is_some_and(|f| *f > f0) {
                eprintln!("warning: schedule starts at {} Hz, above the suggested {f0:.3} Hz", config.schedule[0]);
            }
            let result = run_invert(&config, &text, &args.config, resume, &mut |r| {
                eprintln!("{} Hz  k={}  misfit={:.6e}  |g|={:.3e}", r.frequency_hz, r.k, r.misfit, r.grad_norm);
            })?;
            for s in &result.stages {
                let reason = s.summary.stop_reason.map(|r| format!("{r:?}")).unwrap_or_else(|| "-".into());
                println!(
                    "{} Hz: {} iterations, misfit {:.4e} -> {:.4e}, stop {reason}",
                    s.frequency_hz, s.summary.iterations, s.summary.initial_misfit, s.summary.final_misfit
                );
            }
        }
        Command::GridInfo(args) => print_plans(&args.load()?.0)?,
        Command::Image { model, out, palette, clip_min, clip_max } => {
            let clip = clip_min.zip(clip_max);
            write_image(&out, &read_model(&model)?, palette, clip)?;
        }
        Command::Profiles { model, x, out } => {
            for p in write_profiles(&out, &read_model(&model)?, &x)? {
                println!("requested x={} sampled x={} (column {})", p.requested_x, p.x, p.column);
            }
        }
        Command::Gradcheck { config: args, frequency, directions } => {
            let (mut config, _) = args.load()?;
            if let Some(f) = frequency {
                config.gradcheck.frequency_hz = f;
            }
            if let Some(n) = directions {
                config.gradcheck.directions = n;
            }
            let report = run_gradcheck(&config)?;
            println!("direction,step,finite_difference,adjoint,relative_error");
            for (i, rows) in report.directions.iter().enumerate() {
                for r in rows {
                    println!("{i},{:e},{:.12e},{:.12e},{:.3e}", r.step, r.finite_difference, r.adjoint, r.relative_error);
                }
            }
            let worst = report.best_errors().into_iter().fold(0.0, f64::max);
            println!("worst best-step relative error: {worst:.3e}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_numerical() { 3 } else { 2 };
            let report = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}
