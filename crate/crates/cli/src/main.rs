use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use surfwave::analysis::{
    kspace_peak_speed, kspace_transform_with, phase_delay_speed_with, Diagnostics, Method,
    SpeedEstimate,
};
use surfwave::dispersion::fit_voigt;
use surfwave::dispersion::io::{read_points, write_fit};
use surfwave::experiments::{
    compare_levels_with, dispersion_svg, emit_outputs, read_sweep_csv, run_sweep,
    write_comparison_csv, write_summary_csv, ComparisonReport, SweepConfig,
};
use surfwave::solver::{
    build_model, read_record_csv, simulate, stable_time_step, write_record_csv, Excitation,
    PhantomGeometry,
};

#[derive(Parser, Debug)]
#[command(
    name = "surfwave",
    version,
    about = "Surface wave speed workbench for the layered sponge phantom"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML sweep config; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base noise seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one model and excitation and write the surface wavefield CSV.
    Simulate {
        /// Excitation frequency, Hz.
        #[arg(long, default_value_t = 100.0)]
        frequency: f64,
        /// Gel thickness, mm.
        #[arg(long, default_value_t = 0.0)]
        gel_mm: f64,
    },
    /// Estimate surface wave speed from a wavefield CSV by both methods.
    Analyze {
        wavefield: PathBuf,
        /// Excitation frequency, Hz.
        #[arg(long)]
        frequency: f64,
    },
    /// Fit Voigt parameters to a dispersion CSV.
    Fit {
        points: PathBuf,
        /// Density, kg/m^3.
        #[arg(long, default_value_t = 1500.0)]
        rho: f64,
    },
    /// Run the full gel thickness x frequency study.
    Sweep,
    /// Rebuild the comparison, summary and plot from a sweep CSV.
    Report {
        sweep: PathBuf,
        /// Estimator to compare (phase_gradient or kspace); defaults to the config.
        #[arg(long)]
        method: Option<String>,
    },
}

type Res<T> = Result<T, String>;

fn load_config(g: &Global) -> Res<SweepConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            SweepConfig::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => SweepConfig::default(),
    };
    if let Some(out) = &g.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = g.seed {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn describe_estimate(e: &SpeedEstimate) -> String {
    let ci = e
        .ci_halfwidth
        .map(|c| format!(" +/- {c:.3}"))
        .unwrap_or_default();
    let diag = match e.diagnostics {
        Diagnostics::PhaseGradient { slope, r_squared } => {
            format!("slope {slope:.2} rad/m, r^2 {r_squared:.4}")
        }
        Diagnostics::Kspace { f_peak, k_peak } => format!("f_p {f_peak} Hz, k_p {k_peak:.3} 1/m"),
    };
    format!("{:<15} {:.3} m/s{ci}  ({diag})", e.method.tag(), e.speed)
}

fn cmd_simulate(g: &Global, frequency: f64, gel_mm: f64) -> Res<()> {
    let cfg = load_config(g)?;
    let geometry = PhantomGeometry {
        gel_thickness: gel_mm / 1000.0,
        ..cfg.geometry
    };
    let model =
        build_model(&geometry, &cfg.pad, &cfg.gel, &cfg.sponge).map_err(|e| e.to_string())?;
    let excitation = Excitation {
        frequency,
        ..cfg.excitation
    };
    let record = simulate(&model, &excitation, &cfg.solver).map_err(|e| e.to_string())?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join("wavefield.csv");
    let file = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    write_record_csv(file, &record).map_err(|e| e.to_string())?;
    let summary = dir.join("model_summary.txt");
    let dt = stable_time_step(&model, cfg.solver.cfl);
    fs::write(&summary, model.summary(dt)).map_err(|e| format!("{}: {e}", summary.display()))?;
    if !g.quiet {
        println!(
            "wrote {} ({} positions, {} frames)",
            path.display(),
            record.positions.len(),
            record.frames()
        );
        println!("wrote {}", summary.display());
    }
    Ok(())
}

fn cmd_analyze(g: &Global, wavefield: &Path, frequency: f64) -> Res<()> {
    let cfg = load_config(g)?;
    let file = fs::File::open(wavefield).map_err(|e| format!("{}: {e}", wavefield.display()))?;
    let record = read_record_csv(file).map_err(|e| format!("{}: {e}", wavefield.display()))?;
    let estimates = [
        phase_delay_speed_with(&record, frequency, &cfg.phase),
        kspace_transform_with(&record, &cfg.kspace).and_then(|m| kspace_peak_speed(&m, frequency)),
    ];
    let mut failed = false;
    for (method, e) in Method::ALL.iter().zip(estimates) {
        match e {
            Ok(e) => println!("{}", describe_estimate(&e)),
            Err(err) => {
                failed = true;
                println!("{:<15} failed: {err}", method.tag());
            }
        }
    }
    if failed {
        Err("at least one estimator failed".into())
    } else {
        Ok(())
    }
}

fn cmd_fit(g: &Global, points: &Path, rho: f64) -> Res<()> {
    let file = fs::File::open(points).map_err(|e| format!("{}: {e}", points.display()))?;
    let pts = read_points(file).map_err(|e| format!("{}: {e}", points.display()))?;
    let fit = fit_voigt(&pts, rho).map_err(|e| e.to_string())?;
    println!("mu1 = {:.2} Pa", fit.material.mu1);
    println!("mu2 = {:.4} Pa*s", fit.material.mu2);
    println!(
        "rms residual = {:.3e} m/s over {} points",
        fit.rms_residual, fit.n_points
    );
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let path = dir.join("fit.csv");
        let file = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_fit(file, &fit).map_err(|e| e.to_string())?;
        if !g.quiet {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn print_report(report: &ComparisonReport) {
    println!("method {}", report.method.tag());
    println!(
        "{:>8} {:>8} {:>10} {:>9} {:>9}",
        "f_hz", "gel_mm", "mean_mps", "change_%", "p"
    );
    for c in &report.cells {
        let cmp = report
            .comparisons
            .iter()
            .find(|k| k.gel_level == c.gel_level && k.frequency == c.frequency);
        let change = match cmp {
            Some(k) => format!("{:+.1}", k.percent_change),
            None if c.gel_level == 0.0 => "base".into(),
            None => "n/a".into(),
        };
        let p = cmp
            .and_then(|k| k.test)
            .map(|t| format!("{:.3}{}", t.p_value, if t.significant { "*" } else { "" }))
            .unwrap_or_default();
        println!(
            "{:>8} {:>8} {:>10.3} {:>9} {:>9}",
            c.frequency,
            (c.gel_level * 1e9).round() / 1e6,
            c.summary.mean,
            change,
            p
        );
    }
}

fn cmd_sweep(g: &Global) -> Res<()> {
    let cfg = load_config(g)?;
    if !g.quiet {
        println!(
            "sweeping {} levels x {} frequencies x {} repetitions",
            cfg.gel_levels.len(),
            cfg.frequencies.len(),
            cfg.repetitions
        );
    }
    let result = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let report = compare_levels_with(&result, cfg.comparison_method, cfg.variance_model)
        .map_err(|e| e.to_string())?;
    let files = emit_outputs(&result, &report, &cfg).map_err(|e| e.to_string())?;
    if !g.quiet {
        print_report(&report);
        if result.failures() > 0 {
            println!(
                "{} of {} rows failed; see sweep.csv",
                result.failures(),
                result.rows.len()
            );
        }
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn cmd_report(g: &Global, sweep: &Path, method: Option<&str>) -> Res<()> {
    let mut cfg = load_config(g)?;
    if let Some(tag) = method {
        cfg.comparison_method =
            Method::from_tag(tag).ok_or_else(|| format!("unknown method '{tag}'"))?;
    }
    if g.out.is_none() {
        cfg.output_dir = sweep.parent().map(Path::to_path_buf).unwrap_or_default();
    }
    let result = read_sweep_csv(sweep).map_err(|e| e.to_string())?;
    let report = compare_levels_with(&result, cfg.comparison_method, cfg.variance_model)
        .map_err(|e| e.to_string())?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join("comparison.csv");
    let file = fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    write_comparison_csv(file, &report).map_err(|e| format!("{}: {e}", path.display()))?;
    let summary = dir.join("summary.csv");
    let file = fs::File::create(&summary).map_err(|e| format!("{}: {e}", summary.display()))?;
    write_summary_csv(file, &report).map_err(|e| format!("{}: {e}", summary.display()))?;
    let svg = dir.join("dispersion.svg");
    fs::write(&svg, dispersion_svg(&report)).map_err(|e| format!("{}: {e}", svg.display()))?;
    if !g.quiet {
        print_report(&report);
        for p in [&path, &summary, &svg] {
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let outcome = match &cli.command {
        Command::Simulate { frequency, gel_mm } => cmd_simulate(g, *frequency, *gel_mm),
        Command::Analyze {
            wavefield,
            frequency,
        } => cmd_analyze(g, wavefield, *frequency),
        Command::Fit { points, rho } => cmd_fit(g, points, *rho),
        Command::Sweep => cmd_sweep(g),
        Command::Report { sweep, method } => cmd_report(g, sweep, method.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
