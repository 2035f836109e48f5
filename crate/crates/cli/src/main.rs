//! Command-line front end: scenario simulation, diameter sweeps, stored-run
//! re-verification, proximity constants and an analytic selftest.
//!
//! Exit codes: 0 success, 1 internal/io failure, 2 scenario or argument
//! parse error, 3 numeric abort (non-finite state), 4 inequality violation
//! beyond tolerance.

use clap::{Parser, Subcommand};
use fracguide::{
    deviation_report_from_trajectories, deviation_vs_diameter, run_aiming, theorem_constants,
    AimingConfig, FracError, FracOrder, L1_TOLERANCE_COEFF,
};
use fracguide_cli::report::{self, fmt_num, render_metadata, render_trajectory_csv, write_text};
use fracguide_cli::scenario::{self, parse_scenario, ScenarioDoc};
use fracguide_cli::selftest;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracguide",
    version,
    about = "Simulator for conflict-controlled fractional-order systems with a guide"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one aiming simulation; write the trajectory CSV and a metadata
    /// summary.
    Simulate {
        /// Scenario file (omit when using --builtin).
        scenario: Option<PathBuf>,
        /// Bundled scenario name (currently: paper).
        #[arg(long)]
        builtin: Option<String>,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the partition with a uniform step.
        #[arg(long)]
        step: Option<f64>,
        /// Trajectory CSV path (default trajectory.csv, or the scenario's
        /// `[output]` csv).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Metadata path (default: CSV path with extension .meta).
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Re-run one scenario across partition diameters; write a
    /// diameter/deviation table.
    Sweep {
        scenario: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        /// Comma-separated diameters, descending (e.g. 0.01,0.005,0.001).
        #[arg(long, value_delimiter = ',', required = true)]
        diameters: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output table path (default sweep.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify the quadratic deviation inequality on a stored run.
    CheckLyapunov {
        /// Trajectory CSV produced by `simulate`.
        csv: PathBuf,
        /// Fractional order of the stored run.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Tolerance coefficient (node tolerance is coeff * h^(1-alpha)).
        #[arg(long, default_value_t = L1_TOLERANCE_COEFF, allow_negative_numbers = true)]
        coeff: f64,
    },
    /// Print the proximity constants K, eta, delta for a scenario.
    Constants {
        scenario: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        /// Target proximity epsilon.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Initial-ball radius containing x0 and y0.
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        /// Measured Hölder modulus (default: structural diagnostic).
        #[arg(long)]
        holder: Option<f64>,
    },
    /// Run the built-in analytic oracle battery.
    Selftest,
}

/// Failure paired with its process exit code.
enum CliError {
    /// Scenario/argument problems -> exit 2.
    Parse(String),
    /// Non-finite states and numeric range aborts -> exit 3.
    Numeric(String),
    /// Inequality violation beyond tolerance -> exit 4.
    Violation(String),
    /// IO and internal failures -> exit 1.
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Violation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m)
            | CliError::Numeric(m)
            | CliError::Violation(m)
            | CliError::Other(m) => m,
        }
    }
}

impl From<FracError> for CliError {
    fn from(e: FracError) -> Self {
        match e {
            FracError::NonFinite { .. }
            | FracError::MittagLefflerOverflow { .. }
            | FracError::MittagLefflerPrecision { .. }
            | FracError::MittagLefflerEnvelope { .. } => CliError::Numeric(e.to_string()),
            other => CliError::Parse(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

/// Load the scenario document from a file or the builtin registry.
fn load_doc(
    scenario: Option<&Path>,
    builtin: Option<&str>,
) -> Result<(ScenarioDoc, String), CliError> {
    match (scenario, builtin) {
        (Some(_), Some(_)) => Err(CliError::Parse(
            "give either a scenario file or --builtin, not both".into(),
        )),
        (None, None) => Err(CliError::Parse(
            "missing scenario: pass a file path or --builtin paper".into(),
        )),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Parse(format!("cannot read scenario '{}': {e}", path.display()))
            })?;
            let doc = parse_scenario(&text).map_err(|e| CliError::Parse(e.to_string()))?;
            Ok((doc, format!("file:{}", path.display())))
        }
        (None, Some(name)) => {
            if name == "paper" {
                Ok((ScenarioDoc::builtin_paper(), "builtin:paper".into()))
            } else {
                Err(CliError::Parse(format!(
                    "unknown builtin scenario '{name}' (available: paper)"
                )))
            }
        }
    }
}

fn build_config(
    doc: &ScenarioDoc,
    seed: Option<u64>,
    step: Option<f64>,
) -> Result<AimingConfig, CliError> {
    let mut doc = doc.clone();
    if let Some(seed) = seed {
        doc.seed = Some(seed);
    }
    if let Some(step) = step {
        doc.partition = Some(scenario::PartitionSpec::Step(step));
    }
    doc.to_config().map_err(|e| CliError::Parse(e.to_string()))
}

fn simulate(
    scenario: Option<&Path>,
    builtin: Option<&str>,
    seed: Option<u64>,
    step: Option<f64>,
    csv: Option<PathBuf>,
    meta: Option<PathBuf>,
) -> Result<(), CliError> {
    let (doc, origin) = load_doc(scenario, builtin)?;
    let config = build_config(&doc, seed, step)?;
    let result = run_aiming(&config)?;

    let csv_path = csv
        .or_else(|| doc.csv_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
    let meta_path = meta
        .or_else(|| doc.meta_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| csv_path.with_extension("meta"));

    write_text(&csv_path, &render_trajectory_csv(&result))?;

    let mut entries: Vec<(String, String)> = vec![
        ("scenario".into(), origin),
        ("alpha".into(), config.alpha.value().to_string()),
        ("horizon".into(), config.horizon.to_string()),
        ("partition_nodes".into(), config.partition.len().to_string()),
        (
            "partition_diameter".into(),
            fmt_num(config.partition.diameter()),
        ),
        ("seed".into(), result.seed.to_string()),
        ("deviation_sup".into(), fmt_num(result.deviation_sup)),
        ("bound_eps".into(), fmt_num(result.bound_eps)),
        (
            "k_constant".into(),
            result.k_constant.map_or("unavailable".into(), fmt_num),
        ),
        (
            "bound_rhs".into(),
            result.bound_rhs.map_or("unavailable".into(), fmt_num),
        ),
        ("csv".into(), csv_path.display().to_string()),
    ];

    // Verify the deviation inequality on the produced run (uniform
    // partitions only; the L1 estimator needs a constant step).
    let mut violation: Option<String> = None;
    if let Some(h) = config.partition.spacing() {
        let tol = L1_TOLERANCE_COEFF * h.powf(1.0 - config.alpha.value());
        let report =
            deviation_report_from_trajectories(&result.x_traj, &result.y_traj, config.alpha, tol)?;
        entries.push((
            "lyapunov_max_violation".into(),
            fmt_num(report.max_violation),
        ));
        entries.push(("lyapunov_tolerance".into(), fmt_num(report.tolerance_used)));
        if report.is_violated() {
            violation = Some(format!(
                "deviation inequality violated: {} above tolerance {}",
                fmt_num(report.max_violation),
                fmt_num(report.tolerance_used)
            ));
        }
    } else {
        entries.push((
            "lyapunov_max_violation".into(),
            "skipped (non-uniform)".into(),
        ));
    }

    write_text(&meta_path, &render_metadata(&entries))?;
    println!(
        "simulate: {} nodes, deviation_sup = {}, csv = {}, meta = {}",
        config.partition.len(),
        fmt_num(result.deviation_sup),
        csv_path.display(),
        meta_path.display()
    );
    match violation {
        Some(msg) => Err(CliError::Violation(msg)),
        None => Ok(()),
    }
}

fn sweep(
    scenario: Option<&Path>,
    builtin: Option<&str>,
    diameters: &[f64],
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let (doc, origin) = load_doc(scenario, builtin)?;
    let config = build_config(&doc, seed, None)?;
    let points = deviation_vs_diameter(&config, diameters)?;
    let mut table = String::from("diameter,deviation_sup\n");
    for p in &points {
        table.push_str(&format!(
            "{},{}\n",
            fmt_num(p.diameter),
            fmt_num(p.deviation_sup)
        ));
    }
    let out_path = out.unwrap_or_else(|| PathBuf::from("sweep.csv"));
    write_text(&out_path, &table)?;
    println!(
        "sweep: {} ({} diameters) -> {}",
        origin,
        points.len(),
        out_path.display()
    );
    for p in &points {
        println!(
            "  diameter {} -> deviation_sup {}",
            fmt_num(p.diameter),
            fmt_num(p.deviation_sup)
        );
    }
    Ok(())
}

fn check_lyapunov(csv: &Path, alpha: f64, coeff: f64) -> Result<(), CliError> {
    let text = std::fs::read_to_string(csv)
        .map_err(|e| CliError::Parse(format!("cannot read csv '{}': {e}", csv.display())))?;
    let stored = report::parse_trajectory_csv(&text).map_err(CliError::Parse)?;
    let alpha = FracOrder::new(alpha)?;
    let h = stored
        .x_traj
        .grid()
        .spacing()
        .ok_or_else(|| CliError::Parse("stored run is not on a uniform partition".into()))?;
    let tol = coeff * h.powf(1.0 - alpha.value());
    let report = deviation_report_from_trajectories(&stored.x_traj, &stored.y_traj, alpha, tol)?;
    println!(
        "check-lyapunov: {} nodes, max_violation = {}, tolerance = {}",
        stored.x_traj.node_count(),
        fmt_num(report.max_violation),
        fmt_num(report.tolerance_used)
    );
    if report.is_violated() {
        Err(CliError::Violation(format!(
            "inequality violated: {} above tolerance {}",
            fmt_num(report.max_violation),
            fmt_num(report.tolerance_used)
        )))
    } else {
        Ok(())
    }
}

fn constants(
    scenario: Option<&Path>,
    builtin: Option<&str>,
    eps: f64,
    r0: f64,
    holder: Option<f64>,
) -> Result<(), CliError> {
    let (doc, origin) = load_doc(scenario, builtin)?;
    let config = build_config(&doc, None, None)?;
    let constants = theorem_constants(
        &config.dynamics,
        config.alpha,
        config.horizon,
        r0,
        eps,
        holder,
    )?;
    println!("scenario = {origin}");
    println!("eps = {}", fmt_num(eps));
    println!("r0 = {}", fmt_num(r0));
    println!("k = {}", fmt_num(constants.k));
    println!("eta = {}", fmt_num(constants.eta));
    println!("delta2 = {}", fmt_num(constants.delta2));
    match constants.delta1 {
        Some(d1) => println!("delta1 = {}", fmt_num(d1)),
        None => println!("delta1 = not computable (declare a time-modulus to enable)"),
    }
    println!("delta = {}", fmt_num(constants.delta()));
    Ok(())
}

fn real_main() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            scenario,
            builtin,
            seed,
            step,
            csv,
            meta,
        } => simulate(
            scenario.as_deref(),
            builtin.as_deref(),
            seed,
            step,
            csv,
            meta,
        ),
        Command::Sweep {
            scenario,
            builtin,
            diameters,
            seed,
            out,
        } => sweep(
            scenario.as_deref(),
            builtin.as_deref(),
            &diameters,
            seed,
            out,
        ),
        Command::CheckLyapunov { csv, alpha, coeff } => check_lyapunov(&csv, alpha, coeff),
        Command::Constants {
            scenario,
            builtin,
            eps,
            r0,
            holder,
        } => constants(scenario.as_deref(), builtin.as_deref(), eps, r0, holder),
        Command::Selftest => selftest::run().map_err(CliError::Other),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
