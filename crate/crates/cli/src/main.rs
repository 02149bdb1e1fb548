//! `parity`: sweep, solve, fidelity, compare and estimate from JSON device files.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 evaluation error, 4 no solution.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use parity_core::cascade::compare_schemes;
use parity_core::config::{CascadeConfig, ChiSetting, DeviceConfig, SolutionFile, SCHEMA_VERSION};
use parity_core::device::{DevicePhases, ParityDevice, ReflectionPhase};
use parity_core::eraser::{eraser_residuals, solve_eraser, EraserSolution};
use parity_core::estimates::{kappa_from_coupling, measurement_time, peak_power, purcell_t1};
use parity_core::fidelity::{eraser_quality, FidelityBranch, ProbePulse};
use parity_core::units::{format_sig, hz_to_rad, AngularFrequency};
use parity_core::Error;
use serde_json::json;

const SIG: usize = 12;

#[derive(Parser)]
#[command(
    name = "parity",
    version,
    about = "Reflection-phase design for direct multi-qubit parity measurement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-weight unwrapped reflection phase over the analysis band (CSV).
    Sweep(SweepArgs),
    /// Find the probe frequency and dispersive shift satisfying the eraser conditions.
    Solve(SolveArgs),
    /// Recompute eraser residuals for a stored solution.
    Verify(VerifyArgs),
    /// Overlaps of reflected pulses for every pair of Hamming weights.
    Fidelity(FidelityArgs),
    /// Compare the parallel multi-mode scheme with a tuned cavity cascade.
    Compare(CompareArgs),
    /// Purcell T1, measurement time, probe power and coupling-limited linewidth.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Solution whose χ and mode frequencies are used; otherwise a numeric
    /// `chi_MHz` from the config, or a fresh solve.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 601)]
    points: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Residual tolerance in rad (≥ 1e-9).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct PulseArgs {
    /// Mean photon number of the probe pulse.
    #[arg(long = "alpha-sq", default_value_t = 5.0)]
    alpha_sq: f64,
    /// Pulse duration T = 1/W in μs.
    #[arg(long = "T-us", default_value_t = 1.0)]
    t_us: f64,
}

#[derive(Args)]
struct FidelityArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    #[command(flatten)]
    pulse: PulseArgs,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    cascade: PathBuf,
    /// Parallel-scheme solution; solved from the config when absent.
    #[arg(long)]
    solution: Option<PathBuf>,
    #[command(flatten)]
    pulse: PulseArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Qubit-cavity detuning Δ/2π, GHz.
    #[arg(long = "delta-GHz", default_value_t = 5.0)]
    delta_ghz: f64,
    /// Cavity loss rate κ/2π, MHz.
    #[arg(long = "kappa-MHz", default_value_t = 5.0)]
    kappa_mhz: f64,
    /// Dispersive shift χ/2π, MHz.
    #[arg(long = "chi-MHz", default_value_t = 5.77)]
    chi_mhz: f64,
    #[arg(long = "alpha-sq", default_value_t = 5.0)]
    alpha_sq: f64,
    #[arg(long = "T-us", default_value_t = 1.0)]
    t_us: f64,
    /// Probe frequency, GHz.
    #[arg(long = "fp-GHz", default_value_t = 9.804)]
    fp_ghz: f64,
    /// Measurement time safety factor in T = factor/χ.
    #[arg(long, default_value_t = 10.0)]
    safety: f64,
    /// Coupling capacitance for the linewidth estimate, fF.
    #[arg(long = "C-couple-fF", default_value_t = 10.0)]
    c_couple_ff: f64,
    #[arg(long = "Z0-ohms", default_value_t = 50.0)]
    z0_ohms: f64,
    /// Resonator frequency for the linewidth estimate, GHz.
    #[arg(long = "fr-GHz", default_value_t = 10.0)]
    fr_ghz: f64,
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Error tagged with its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn config(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: 2,
            err: err.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoSolution { .. } | Error::WindingInfeasible { .. } => 4,
            _ => 3,
        };
        Self {
            code,
            err: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Self { code: 3, err }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::config)
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::from)
}

fn load_config(path: &Path) -> CliResult<(DeviceConfig, ParityDevice)> {
    let text = read(path)?;
    let cfg = DeviceConfig::from_json(&text).map_err(|e| {
        Failure::config(anyhow::Error::new(e).context(format!("in {}", path.display())))
    })?;
    let dev = cfg.device().map_err(|e| {
        Failure::config(anyhow::Error::new(e).context(format!("in {}", path.display())))
    })?;
    Ok((cfg, dev))
}

fn load_solution(path: &Path) -> CliResult<EraserSolution> {
    let text = read(path)?;
    SolutionFile::from_json(&text)
        .and_then(|f| f.to_solution())
        .map_err(|e| {
            Failure::config(anyhow::Error::new(e).context(format!("in {}", path.display())))
        })
}

fn solve(cfg: &DeviceConfig, dev: &ParityDevice, tol: Option<f64>) -> CliResult<EraserSolution> {
    let mut opts = cfg.search_options().map_err(Failure::config)?;
    if let Some(t) = tol {
        opts.tol = t;
        opts.validate().map_err(Failure::config)?;
    }
    let band = cfg.search_band(dev).map_err(Failure::config)?;
    Ok(solve_eraser(dev, cfg.free_parameters(), band, &opts)?)
}

fn summary(sol: &EraserSolution) -> String {
    let res = sol
        .residuals
        .iter()
        .map(|r| format!("{r:.3e}"))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "f_p= {} GHz chi= {} MHz dtheta= {} deg residuals= [{}]{}",
        format_sig(sol.omega_p.hz() * 1e-9, 10),
        format_sig(sol.chi / std::f64::consts::TAU * 1e-6, 8),
        format_sig(sol.delta_theta.to_degrees(), 8),
        res,
        if sol.low_contrast {
            " (low contrast)"
        } else {
            ""
        }
    )
}

fn cmd_solve(a: &SolveArgs) -> CliResult {
    let (cfg, dev) = load_config(&a.config)?;
    let sol = solve(&cfg, &dev, a.tol)?;
    let text = SolutionFile::from_solution(&sol).to_json();
    match &a.out {
        Some(p) => write(p, &text)?,
        None => println!("{text}"),
    }
    println!("{}", summary(&sol));
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    let (_, template) = load_config(&a.config)?;
    let sol = load_solution(&a.solution)?;
    let dev = sol.device(&template)?;
    let res = eraser_residuals(&dev, sol.omega_p)?;
    let same =
        res.len() == sol.residuals.len() && res.iter().zip(&sol.residuals).all(|(a, b)| a == b);
    let within = res.iter().all(|r| r.abs() < sol.tolerance);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "residuals_rad": res,
            "identical_to_stored": same,
            "within_tolerance": within,
        }))
        .expect("plain data")
    );
    if within {
        Ok(())
    } else {
        Err(Error::NoSolution {
            best_f_hz: sol.omega_p.hz(),
            best_chi_hz: sol.chi / std::f64::consts::TAU,
            best_norm: res.iter().map(|r| r * r).sum::<f64>().sqrt(),
        }
        .into())
    }
}

/// Device whose phases are swept: solution values if given, else a numeric χ, else a fresh solve.
fn swept_device(
    cfg: &DeviceConfig,
    dev: &ParityDevice,
    solution: Option<&Path>,
) -> CliResult<ParityDevice> {
    if let Some(p) = solution {
        return Ok(load_solution(p)?.device(dev)?);
    }
    match cfg.chi_mhz {
        ChiSetting::Value(_) => Ok(dev.clone()),
        ChiSetting::Keyword(_) => {
            let sol = solve(cfg, dev, None)?;
            eprintln!("{}", summary(&sol));
            Ok(sol.device(dev)?)
        }
    }
}

fn cmd_sweep(a: &SweepArgs) -> CliResult {
    if a.points < 2 {
        return Err(Failure::config(anyhow::anyhow!(
            "--points must be at least 2"
        )));
    }
    let (cfg, template) = load_config(&a.config)?;
    let dev = swept_device(&cfg, &template, a.solution.as_deref())?;
    let phases = DevicePhases::new(&dev)?;
    let n = dev.qubits();
    let band = dev.band();
    let (lo, hi) = (band.lo.value(), band.hi.value());
    let mut out = String::from("f_GHz");
    for w in 0..=n {
        let _ = write!(out, ",theta_wt{w}_deg");
    }
    out.push('\n');
    for i in 0..a.points {
        let w = if i + 1 == a.points {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (a.points - 1) as f64
        };
        out.push_str(&format_sig(w / std::f64::consts::TAU * 1e-9, SIG));
        for wt in 0..=n {
            let t = phases.theta_weight(wt, w)?;
            out.push(',');
            out.push_str(&format_sig(t.to_degrees(), SIG));
        }
        out.push('\n');
    }
    match &a.out {
        Some(p) => write(p, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn pulse_for(omega_p: AngularFrequency, p: &PulseArgs) -> CliResult<ProbePulse> {
    ProbePulse::from_photons(p.alpha_sq, omega_p, p.t_us * 1e-6).map_err(Failure::config)
}

fn branch_name(b: FidelityBranch) -> &'static str {
    match b {
        FidelityBranch::SameParityLinear => "same-parity-linear",
        FidelityBranch::SameParityQuadratic => "same-parity-quadratic",
        FidelityBranch::EvenOdd => "even-odd",
    }
}

fn cmd_fidelity(a: &FidelityArgs) -> CliResult {
    let (_, template) = load_config(&a.config)?;
    let sol = load_solution(&a.solution)?;
    let pulse = pulse_for(sol.omega_p, &a.pulse)?;
    let reports = eraser_quality(&template, &sol, &pulse)?;

    let mut csv = String::from("state_a,state_b,weight_a,weight_b,branch,F_numeric,F_closed\n");
    let mut rows = Vec::new();
    for r in &reports {
        let closed = r.f_closed.map(|c| format_sig(c, SIG)).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.pair.0,
            r.pair.1,
            r.pair.0.weight(),
            r.pair.1.weight(),
            branch_name(r.branch),
            format_sig(r.f_numeric, SIG),
            closed
        );
        rows.push(json!({
            "state_a": r.pair.0.to_string(),
            "state_b": r.pair.1.to_string(),
            "branch": branch_name(r.branch),
            "F_numeric": r.f_numeric,
            "F_closed": r.f_closed,
        }));
    }
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "alpha_sq": a.pulse.alpha_sq,
        "T_us": a.pulse.t_us,
        "f_p_Hz": sol.omega_p.hz(),
        "reports": rows,
    });
    let text = serde_json::to_string_pretty(&doc).expect("plain data");
    if let Some(p) = &a.out_csv {
        write(p, &csv)?;
    }
    match &a.out_json {
        Some(p) => write(p, &text)?,
        None => println!("{text}"),
    }
    if a.out_csv.is_none() && a.out_json.is_some() {
        print!("{csv}");
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> CliResult {
    let (cfg, template) = load_config(&a.config)?;
    let ccfg_text = read(&a.cascade)?;
    let ccfg = CascadeConfig::from_json(&ccfg_text).map_err(|e| {
        Failure::config(anyhow::Error::new(e).context(format!("in {}", a.cascade.display())))
    })?;
    if ccfg.n_qubits != cfg.n_qubits {
        return Err(Failure::config(anyhow::anyhow!(
            "cascade has {} qubits but the device has {}",
            ccfg.n_qubits,
            cfg.n_qubits
        )));
    }
    let sol = match &a.solution {
        Some(p) => load_solution(p)?,
        None => solve(&cfg, &template, None)?,
    };
    let cascade = ccfg.tune()?;
    let cmp = compare_schemes(
        &template,
        &sol,
        &cascade,
        a.pulse.alpha_sq,
        a.pulse.t_us * 1e-6,
    )?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "units": {"omega_p": "rad/s", "chi": "rad/s", "b": "s", "b2": "s^2", "phases": "rad"},
        "alpha_sq": a.pulse.alpha_sq,
        "T_us": a.pulse.t_us,
        "comparison": cmp,
    });
    let text = serde_json::to_string_pretty(&doc).expect("plain data");
    match &a.out {
        Some(p) => write(p, &text)?,
        None => println!("{text}"),
    }
    println!(
        "resonators: parallel {} cascade {}; |b| parallel {:.3e} s cascade {:.3e} s; b' cascade {:.3e} s^2",
        cmp.parallel.resonators, cmp.cascade.resonators, cmp.parallel.b, cmp.cascade.b, cmp.cascade.b2
    );
    Ok(())
}

fn cmd_estimate(a: &EstimateArgs) -> CliResult {
    let delta = hz_to_rad(a.delta_ghz * 1e9);
    let kappa = hz_to_rad(a.kappa_mhz * 1e6);
    let chi = hz_to_rad(a.chi_mhz * 1e6);
    let t1 = purcell_t1(delta, kappa, chi).map_err(Failure::config)?;
    let tm = measurement_time(chi, a.safety).map_err(Failure::config)?;
    let wp = AngularFrequency::from_ghz(a.fp_ghz).map_err(Failure::config)?;
    let p = peak_power(a.alpha_sq, wp, a.t_us * 1e-6).map_err(Failure::config)?;
    let wr = AngularFrequency::from_ghz(a.fr_ghz).map_err(Failure::config)?;
    let kc = kappa_from_coupling(a.c_couple_ff * 1e-15, a.z0_ohms, wr).map_err(Failure::config)?;

    println!("{:<34} {:>16} {:>16}", "quantity", "cyclic", "angular");
    println!(
        "{:<34} {:>16} {:>16}",
        "Purcell T1 [us]",
        format_sig(t1.cyclic * 1e6, 6),
        format_sig(t1.angular * 1e6, 6)
    );
    println!(
        "{:<34} {:>16} {:>16}",
        format!("measurement time {}/chi [us]", a.safety),
        format_sig(tm.cyclic * 1e6, 6),
        format_sig(tm.angular * 1e6, 6)
    );
    println!("{:<34} {:>16}", "peak power [W]", format_sig(p.watts, 6));
    println!("{:<34} {:>16}", "peak power [dBm]", format_sig(p.dbm, 6));
    println!(
        "{:<34} {:>16}",
        "kappa/2pi from coupling [MHz]",
        format_sig(kc / std::f64::consts::TAU * 1e-6, 6)
    );
    println!("cyclic: quoted MHz/GHz read as ordinary frequencies; angular: read as rad/s");

    if let Some(path) = &a.json {
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "inputs": {
                "delta_GHz": a.delta_ghz, "kappa_MHz": a.kappa_mhz, "chi_MHz": a.chi_mhz,
                "alpha_sq": a.alpha_sq, "T_us": a.t_us, "fp_GHz": a.fp_ghz, "safety_factor": a.safety,
            },
            "purcell_t1_s": {"cyclic": t1.cyclic, "angular": t1.angular},
            "measurement_time_s": {"cyclic": tm.cyclic, "angular": tm.angular},
            "peak_power": {"watts": p.watts, "dBm": p.dbm},
            "kappa_from_coupling_rad_s": kc,
        });
        write(
            path,
            &serde_json::to_string_pretty(&doc).expect("plain data"),
        )?;
    }
    Ok(())
}

fn configure_threads() -> CliResult {
    if let Ok(v) = std::env::var("PARITY_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::config(anyhow::anyhow!(
                "PARITY_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(anyhow::Error::new(e)))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    configure_threads()?;
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Estimate(a) => cmd_estimate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
