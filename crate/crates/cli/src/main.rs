//! Command-line front end. Every subcommand except `protect` builds a run
//! manifest from its flags, so flags and manifest keys share names and
//! validation. Comma-separated values on sweepable flags fan out into one
//! run and one output file per combination.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zenosim::manifest::{
    manifests_from_entries, parse_entries, push_entry, render, run_all, Entry, RunError,
    RunManifest,
};
use zenosim::protect::{protect_run, ErrorModel, ProtectParams};
use zenosim::qmat::C64;

#[derive(Parser)]
#[command(name = "zenosim", version, about = "Quantum Zeno and decoupling simulations of a coupled two-spin system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free induction decay in nmr mode.
    Fid {
        #[command(flatten)]
        nmr: NmrArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Zeno sequence: free evolution alternating with measurements.
    Zeno {
        #[command(flatten)]
        nmr: NmrArgs,
        /// entangler, ideal or literal.
        #[arg(long)]
        measurement: Option<String>,
        /// Entangler sign: plus or minus (list allowed).
        #[arg(long)]
        sign: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// XY-4 dynamical decoupling.
    Xy4 {
        #[command(flatten)]
        nmr: NmrArgs,
        /// Spin receiving the pulses: S or E.
        #[arg(long)]
        target: Option<String>,
        /// Free time between pulses in ms (list allowed).
        #[arg(long)]
        interval_ms: Option<String>,
        /// Sample after each cycle (block) or after each step (step).
        #[arg(long)]
        acquisition: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Theory-mode run in coupling periods: flip dephasing and ideal measurements.
    Theory {
        /// Flip rate per coupling period (list allowed).
        #[arg(long)]
        p_e: Option<String>,
        #[arg(long)]
        dt_ms: Option<String>,
        /// Time between measurements (list allowed).
        #[arg(long)]
        tau_xy_ms: Option<String>,
        #[arg(long)]
        n_reps: Option<String>,
        /// Measurement: ideal, literal, or none for free decay.
        #[arg(long, default_value = "ideal")]
        measurement: String,
        /// fixed_y or random.
        #[arg(long)]
        noise_axis: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        time_axis: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Parity-protected logical qubit under repeated even-parity projection.
    Protect(ProtectArgs),
    /// Execute a manifest file; flags override its keys.
    Run {
        file: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct NmrArgs {
    #[arg(long)]
    j_hz: Option<String>,
    /// E flip time constant; inf disables flips.
    #[arg(long)]
    t_d_ms: Option<String>,
    /// S longitudinal relaxation time; inf disables it.
    #[arg(long)]
    t1s_ms: Option<String>,
    #[arg(long)]
    dt_ms: Option<String>,
    #[arg(long)]
    tau_xy_ms: Option<String>,
    #[arg(long)]
    tau_z_ms: Option<String>,
    #[arg(long)]
    n_reps: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    pulse_tau_ms: Option<String>,
    /// plus or zero.
    #[arg(long)]
    initial: Option<String>,
    /// elapsed, cycle or fitted.
    #[arg(long)]
    time_axis: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Check trace, Hermiticity and positivity after every step.
    #[arg(long)]
    validate: bool,
    /// Fit the signal envelope and report T2.
    #[arg(long)]
    fit: bool,
    /// Trace file; without it the trace goes to stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct ProtectArgs {
    /// Real part of the |0⟩_L amplitude.
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    /// Real part of the |1⟩_L amplitude.
    #[arg(long, default_value_t = 0.8)]
    beta: f64,
    /// Error-growth rate Γ.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Total time T.
    #[arg(long, default_value_t = 1.0)]
    total_t: f64,
    /// Number of parity measurements (comma-separated list allowed).
    #[arg(long, default_value = "10")]
    n_meas: String,
    #[arg(long, value_enum, default_value = "first-order")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    FirstOrder,
    IndependentFlips,
}

fn push(entries: &mut Vec<Entry>, key: &str, value: &Option<String>) -> Result<(), RunError> {
    if let Some(v) = value {
        push_entry(entries, Entry::new(key, v.clone()))?;
    }
    Ok(())
}

impl NmrArgs {
    fn entries(&self, entries: &mut Vec<Entry>) -> Result<(), RunError> {
        for (key, value) in [
            ("j_hz", &self.j_hz),
            ("t_d_ms", &self.t_d_ms),
            ("t1s_ms", &self.t1s_ms),
            ("dt_ms", &self.dt_ms),
            ("tau_xy_ms", &self.tau_xy_ms),
            ("tau_z_ms", &self.tau_z_ms),
            ("n_reps", &self.n_reps),
            ("alpha", &self.alpha),
            ("pulse_tau_ms", &self.pulse_tau_ms),
            ("initial", &self.initial),
            ("time_axis", &self.time_axis),
        ] {
            push(entries, key, value)?;
        }
        Ok(())
    }
}

impl OutputArgs {
    /// Output flags replace any value already present.
    fn apply(&self, entries: &mut Vec<Entry>) -> Result<(), RunError> {
        let mut set = |key: &str, value: String| {
            entries.retain(|e| e.key != key);
            entries.push(Entry::new(key, value));
        };
        if self.validate {
            set("validate", "true".into());
        }
        if self.fit {
            set("fit", "true".into());
        }
        if let Some(path) = &self.output {
            let abs = std::path::absolute(path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            set("output", abs.to_string_lossy().into_owned());
        }
        if let Some(f) = self.format {
            set("format", format_name(f).into());
        }
        Ok(())
    }
}

fn format_name(f: FormatArg) -> &'static str {
    match f {
        FormatArg::Csv => "csv",
        FormatArg::Json => "json",
    }
}

fn build(command: &Command) -> Result<(Vec<Entry>, PathBuf, &OutputArgs), RunError> {
    let mut e = Vec::new();
    let here = PathBuf::new();
    let out = match command {
        Command::Fid { nmr, out } => {
            push(&mut e, "experiment", &Some("fid".into()))?;
            nmr.entries(&mut e)?;
            out
        }
        Command::Zeno {
            nmr,
            measurement,
            sign,
            out,
        } => {
            push(&mut e, "experiment", &Some("zeno".into()))?;
            nmr.entries(&mut e)?;
            push(&mut e, "measurement", measurement)?;
            push(&mut e, "sign", sign)?;
            out
        }
        Command::Xy4 {
            nmr,
            target,
            interval_ms,
            acquisition,
            out,
        } => {
            push(&mut e, "experiment", &Some("xy4".into()))?;
            nmr.entries(&mut e)?;
            push(&mut e, "xy4_target", target)?;
            push(&mut e, "xy4_interval_ms", interval_ms)?;
            push(&mut e, "acquisition", acquisition)?;
            out
        }
        Command::Theory {
            p_e,
            dt_ms,
            tau_xy_ms,
            n_reps,
            measurement,
            noise_axis,
            seed,
            time_axis,
            out,
        } => {
            push(&mut e, "mode", &Some("theory".into()))?;
            if measurement == "none" {
                push(&mut e, "experiment", &Some("fid".into()))?;
            } else {
                push(&mut e, "experiment", &Some("zeno".into()))?;
                push(&mut e, "measurement", &Some(measurement.clone()))?;
            }
            for (key, value) in [
                ("p_e", p_e),
                ("dt_ms", dt_ms),
                ("tau_xy_ms", tau_xy_ms),
                ("n_reps", n_reps),
                ("noise_axis", noise_axis),
                ("seed", seed),
                ("time_axis", time_axis),
            ] {
                push(&mut e, key, value)?;
            }
            out
        }
        Command::Run { file, out } => {
            let text = std::fs::read_to_string(file).map_err(|source| RunError::Io {
                path: file.clone(),
                source,
            })?;
            e = parse_entries(&text)?;
            let base = file.parent().map(Path::to_path_buf).unwrap_or_default();
            return Ok((e, base, out));
        }
        Command::Protect(_) => unreachable!("protect does not use manifests"),
    };
    Ok((e, here, out))
}

/// Runs every manifest the command describes. Per-run failures are printed
/// as they occur; the exit code comes from the first one.
fn run_manifests(command: &Command) -> Result<(), (i32, String)> {
    let fail = |e: RunError| (e.exit_code(), e.to_string());
    let (mut entries, base, out) = build(command).map_err(fail)?;
    out.apply(&mut entries).map_err(fail)?;
    let manifests: Vec<RunManifest> = manifests_from_entries(&entries, &base).map_err(fail)?;
    let mut first_err = None;
    for (m, result) in manifests.iter().zip(run_all(&manifests)) {
        match result {
            Ok(summary) => {
                if m.output.is_none() {
                    let bytes = render(&summary.trace, m.format)
                        .map_err(|e| (4, format!("<stdout>: {e}")))?;
                    std::io::stdout()
                        .write_all(&bytes)
                        .map_err(|e| (4, format!("<stdout>: {e}")))?;
                    for line in summary.report() {
                        eprintln!("{line}");
                    }
                } else {
                    for line in summary.report() {
                        println!("{line}");
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {}{e}", label_prefix(&m.label));
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), |e| Err((e.exit_code(), String::new())))
}

fn label_prefix(label: &str) -> String {
    if label.is_empty() {
        String::new()
    } else {
        format!("[{label}] ")
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| format!("--{flag}: cannot parse '{}'", s.trim()))
        })
        .collect()
}

fn run_protect(args: &ProtectArgs) -> Result<(), (i32, String)> {
    let ns: Vec<u32> = parse_list("n-meas", &args.n_meas).map_err(|e| (2, e))?;
    let model = match args.model {
        ModelArg::FirstOrder => ErrorModel::FirstOrder,
        ModelArg::IndependentFlips => ErrorModel::IndependentFlips,
    };
    let mut rows = Vec::new();
    for n in ns {
        let mut p = ProtectParams::new(
            C64::new(args.alpha, 0.0),
            C64::new(args.beta, 0.0),
            args.gamma,
            args.total_t,
            n,
        );
        p.model = model;
        p.validate().map_err(|e| (2, format!("n_meas = {n}: {e}")))?;
        let o = protect_run(&p).map_err(|e| (3, format!("n_meas = {n}: {e}")))?;
        rows.push((n, o.survival, p.predicted_survival(), o.final_fidelity));
    }
    let text = match args.format {
        FormatArg::Csv => {
            let mut s = String::from("n_meas,survival,predicted_survival,fidelity\n");
            for (n, surv, pred, fid) in &rows {
                s.push_str(&format!("{n},{surv},{pred},{fid}\n"));
            }
            s
        }
        FormatArg::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|(n, surv, pred, fid)| {
                    format!(
                        "  {{\"n_meas\": {n}, \"survival\": {surv}, \"predicted_survival\": {pred}, \"fidelity\": {fid}}}"
                    )
                })
                .collect();
            format!("[\n{}\n]\n", items.join(",\n"))
        }
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Protect(args) => run_protect(args),
        other => run_manifests(other),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code as u8)
        }
    }
}
