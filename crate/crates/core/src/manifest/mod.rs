//! Run manifests: a flat `key = value` description of one experiment, or of
//! a sweep when list-valued keys hold comma-separated values.
//!
//! ```text
//! # Zeno run with the M+ entangler
//! mode = nmr
//! experiment = zeno
//! tau_xy_ms = 0.3
//! tau_z_ms = 0.8
//! sign = plus
//! output = zeno.csv
//! ```
//!
//! Relative `sequence` and `output` paths resolve against the manifest's
//! directory. Unknown and repeated keys are errors.

pub mod emit;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::channels::{FlipNoise, MeasurementSpec, Sign, Spin, SpinSystemParams};
use crate::experiments::{
    fit_envelope, run_fid, run_xy4_sampled, run_zeno, sweep, Acquisition, Envelope,
    ExperimentConfig, ExperimentError, FitError, InitialState, SignalTrace, TimeAxis,
};
use crate::seq::{compile_sequence, execute, parse_sequence, ChannelProgram, CompileError};

pub use emit::{read_csv, render, to_json, write_atomic, write_csv, EmitError, Format};

/// Every key a manifest may set.
pub const KEYS: [&str; 27] = [
    "mode",
    "experiment",
    "j_hz",
    "t_d_ms",
    "t1s_ms",
    "p_e",
    "noise_axis",
    "seed",
    "dt_ms",
    "tau_xy_ms",
    "tau_z_ms",
    "n_reps",
    "alpha",
    "pulse_tau_ms",
    "initial",
    "measurement",
    "sign",
    "xy4_target",
    "xy4_interval_ms",
    "acquisition",
    "sequence",
    "time_axis",
    "validate",
    "output",
    "format",
    "fit",
    "label",
];

/// Keys that may hold a comma-separated list of values.
pub const SWEEP_KEYS: [&str; 13] = [
    "j_hz",
    "t_d_ms",
    "t1s_ms",
    "p_e",
    "seed",
    "dt_ms",
    "tau_xy_ms",
    "tau_z_ms",
    "n_reps",
    "alpha",
    "pulse_tau_ms",
    "sign",
    "xy4_interval_ms",
];

const NMR_ONLY: [&str; 9] = [
    "j_hz",
    "t_d_ms",
    "t1s_ms",
    "tau_z_ms",
    "pulse_tau_ms",
    "alpha",
    "sign",
    "xy4_target",
    "xy4_interval_ms",
];
const THEORY_ONLY: [&str; 3] = ["p_e", "noise_axis", "seed"];

/// Flip rate used in theory mode when `p_e` is not given.
pub const DEFAULT_P_E: f64 = 0.05;
/// XY-4 pulse spacing used when `xy4_interval_ms` is not given.
pub const DEFAULT_XY4_INTERVAL_MS: f64 = 0.2;

/// One `key = value` line. `line` is 0 for entries that did not come from
/// a file, such as command-line flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

impl Entry {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            value: value.into(),
            line: 0,
        }
    }
}

/// A bad manifest entry. `key` is empty when the line has no key at all.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ManifestError {
    pub key: String,
    pub line: usize,
    pub message: String,
}

impl ManifestError {
    fn at(e: &Entry, message: impl Into<String>) -> Self {
        Self {
            key: e.key.clone(),
            line: e.line,
            message: message.into(),
        }
    }

    fn key(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            line: 0,
            message: message.into(),
        }
    }
}

impl fmt::Display for ManifestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: ", self.line)?;
        }
        if !self.key.is_empty() {
            write!(f, "key '{}': ", self.key)?;
        }
        f.write_str(&self.message)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("manifest: {0}")]
    Manifest(#[from] ManifestError),
    #[error("{}: {error}", path.display())]
    Sequence { path: PathBuf, error: CompileError },
    #[error("invalid configuration: {0}")]
    Config(ExperimentError),
    #[error("simulation failed: {0}")]
    Simulation(ExperimentError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Emit { path: PathBuf, source: EmitError },
}

impl RunError {
    /// 2 for parse and validation errors, 3 for simulation errors, 4 for IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Manifest(_) | RunError::Sequence { .. } | RunError::Config(_) => 2,
            RunError::Simulation(_) => 3,
            RunError::Io { .. } | RunError::Emit { .. } => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Experiment {
    Fid,
    Zeno(MeasurementSpec),
    Xy4 {
        target: Spin,
        interval_ms: f64,
        acquisition: Acquisition,
    },
    Sequence {
        path: PathBuf,
        program: ChannelProgram,
    },
}

#[derive(Clone, Debug)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub experiment: Experiment,
    /// `None` means the caller decides where the trace goes.
    pub output: Option<PathBuf>,
    pub format: Format,
    pub fit: bool,
    /// Identifies one member of a sweep; empty for single runs.
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub label: String,
    pub trace: SignalTrace,
    pub fit: Option<Result<Envelope, FitError>>,
    pub output: Option<PathBuf>,
}

impl RunSummary {
    /// Human-readable lines describing the run.
    pub fn report(&self) -> Vec<String> {
        let prefix = if self.label.is_empty() {
            String::new()
        } else {
            format!("[{}] ", self.label)
        };
        let mut lines = vec![format!(
            "{prefix}{}: {} points, last t = {} ms",
            self.trace.experiment,
            self.trace.points.len(),
            self.trace.points.last().map_or(0.0, |p| p.t_ms)
        )];
        match &self.fit {
            Some(Ok(Envelope::Decay {
                t2_ms,
                amplitude,
                residual,
                points_used,
            })) => lines.push(format!(
                "{prefix}fitted T2 = {t2_ms:.4} ms (amplitude {amplitude:.4}, rms residual {residual:.2e}, {points_used} points)"
            )),
            Some(Ok(Envelope::NoDecay { amplitude })) => lines.push(format!(
                "{prefix}no decay detected (amplitude {amplitude:.4})"
            )),
            Some(Err(e)) => lines.push(format!("{prefix}fit failed: {e}")),
            None => {}
        }
        if let Some(path) = &self.output {
            lines.push(format!("{prefix}wrote {}", path.display()));
        }
        lines
    }
}

/// Splits manifest text into entries, rejecting malformed lines, unknown
/// keys and repeated keys.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ManifestError> {
    let mut out: Vec<Entry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ManifestError {
                key: String::new(),
                line,
                message: format!("expected 'key = value', found '{content}'"),
            });
        };
        let entry = Entry {
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line,
        };
        if entry.key.is_empty() {
            return Err(ManifestError::at(&entry, "missing key before '='"));
        }
        push_entry(&mut out, entry)?;
    }
    Ok(out)
}

/// Appends with the same checks as [`parse_entries`].
pub fn push_entry(entries: &mut Vec<Entry>, entry: Entry) -> Result<(), ManifestError> {
    if !KEYS.contains(&entry.key.as_str()) {
        return Err(ManifestError::at(&entry, "unknown key"));
    }
    if entry.value.is_empty() {
        return Err(ManifestError::at(&entry, "missing value"));
    }
    if let Some(first) = entries.iter().find(|e| e.key == entry.key) {
        let msg = if first.line > 0 {
            format!("repeated; first set on line {}", first.line)
        } else {
            "repeated".to_string()
        };
        return Err(ManifestError::at(&entry, msg));
    }
    entries.push(entry);
    Ok(())
}

/// Entries for one run of a sweep, with the `(key, value)` choices that
/// distinguish it from the other runs.
pub type SweepPoint = (Vec<Entry>, Vec<(String, String)>);

/// One entry list per point of the Cartesian product of all list values.
pub fn expand_sweeps(entries: &[Entry]) -> Result<Vec<SweepPoint>, ManifestError> {
    let mut combos: Vec<SweepPoint> = vec![(Vec::new(), Vec::new())];
    for e in entries {
        if !e.value.contains(',') {
            for (list, _) in &mut combos {
                list.push(e.clone());
            }
            continue;
        }
        if !SWEEP_KEYS.contains(&e.key.as_str()) {
            return Err(ManifestError::at(e, "does not accept a list of values"));
        }
        let values: Vec<&str> = e.value.split(',').map(str::trim).collect();
        if values.iter().any(|v| v.is_empty()) {
            return Err(ManifestError::at(e, "empty item in value list"));
        }
        combos = combos
            .into_iter()
            .flat_map(|(list, varying)| {
                values.iter().map(move |v| {
                    let mut list = list.clone();
                    let mut varying = varying.clone();
                    list.push(Entry {
                        value: v.to_string(),
                        ..e.clone()
                    });
                    varying.push((e.key.clone(), v.to_string()));
                    (list, varying)
                })
            })
            .collect();
    }
    Ok(combos)
}

/// Parses manifest text and expands sweeps into individual runs.
pub fn load_manifest_str(text: &str, base_dir: &Path) -> Result<Vec<RunManifest>, RunError> {
    let entries = parse_entries(text)?;
    manifests_from_entries(&entries, base_dir)
}

pub fn load_manifest_file(path: &Path) -> Result<Vec<RunManifest>, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    load_manifest_str(&text, base)
}

/// Builds every run described by `entries`. Members of a sweep write to
/// the output path with the swept values appended to the file stem.
pub fn manifests_from_entries(
    entries: &[Entry],
    base_dir: &Path,
) -> Result<Vec<RunManifest>, RunError> {
    let combos = expand_sweeps(entries)?;
    let sweeping = combos.len() > 1;
    combos
        .into_iter()
        .map(|(list, varying)| {
            let mut m = RunManifest::from_entries(&list, base_dir)?;
            if sweeping {
                let Some(out) = &m.output else {
                    return Err(ManifestError::key(
                        "output",
                        "a sweep writes one file per run and needs an output path",
                    )
                    .into());
                };
                m.output = Some(sweep_output(out, &varying));
                let label = varying
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                m.label = if m.label.is_empty() {
                    label
                } else {
                    format!("{} {label}", m.label)
                };
            }
            Ok(m)
        })
        .collect()
}

/// `dir/trace.csv` with `[(tau_xy_ms, 0.3)]` becomes `dir/trace_tau_xy_ms0.3.csv`.
pub fn sweep_output(path: &Path, varying: &[(String, String)]) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut name = stem;
    for (k, v) in varying {
        name.push_str(&format!("_{k}{v}"));
    }
    if let Some(ext) = path.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    path.with_file_name(name)
}

struct Lookup<'a> {
    entries: &'a [Entry],
}

impl<'a> Lookup<'a> {
    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>, ManifestError> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        options
            .iter()
            .find(|(name, _)| *name == e.value)
            .map(|(_, v)| Some(*v))
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                ManifestError::at(e, format!("expected one of {}, found '{}'", names.join(", "), e.value))
            })
    }

    fn float(&self, key: &str, allow_inf: bool) -> Result<Option<f64>, ManifestError> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        let v: f64 = e
            .value
            .parse()
            .map_err(|_| ManifestError::at(e, format!("expected a number, found '{}'", e.value)))?;
        if v.is_nan() || (v.is_infinite() && !(allow_inf && v > 0.0)) {
            return Err(ManifestError::at(e, format!("must be finite, found '{}'", e.value)));
        }
        Ok(Some(v))
    }

    fn non_negative(&self, key: &str, allow_inf: bool) -> Result<Option<f64>, ManifestError> {
        let v = self.float(key, allow_inf)?;
        if let Some(x) = v {
            if x < 0.0 {
                return Err(ManifestError::at(self.get(key).unwrap(), format!("must be non-negative, found {x}")));
            }
        }
        Ok(v)
    }

    fn positive(&self, key: &str, allow_inf: bool) -> Result<Option<f64>, ManifestError> {
        let v = self.float(key, allow_inf)?;
        if let Some(x) = v {
            if x <= 0.0 {
                return Err(ManifestError::at(self.get(key).unwrap(), format!("must be positive, found {x}")));
            }
        }
        Ok(v)
    }

    fn uint(&self, key: &str) -> Result<Option<u64>, ManifestError> {
        let Some(e) = self.get(key) else {
            return Ok(None);
        };
        e.value.parse().map(Some).map_err(|_| {
            ManifestError::at(e, format!("expected a non-negative integer, found '{}'", e.value))
        })
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, ManifestError> {
        self.choice(
            key,
            &[("true", true), ("false", false), ("yes", true), ("no", false), ("1", true), ("0", false)],
        )
    }

    /// Rejects any of `keys` that is present.
    fn forbid(&self, keys: &[&str], why: &str) -> Result<(), ManifestError> {
        match keys.iter().find_map(|k| self.get(k)) {
            Some(e) => Err(ManifestError::at(e, why.to_string())),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Fid,
    Zeno,
    Xy4,
    Sequence,
}

#[derive(Clone, Copy, PartialEq)]
enum MeasureKind {
    Entangler,
    Ideal,
    Literal,
}

impl RunManifest {
    /// Builds a single run. List values are rejected; see [`expand_sweeps`].
    pub fn from_entries(entries: &[Entry], base_dir: &Path) -> Result<Self, RunError> {
        if let Some(e) = entries.iter().find(|e| e.value.contains(',')) {
            return Err(ManifestError::at(e, "list values need sweep expansion").into());
        }
        let l = Lookup { entries };
        let theory = l
            .choice("mode", &[("theory", true), ("nmr", false)])?
            .unwrap_or(false);
        if theory {
            l.forbid(&NMR_ONLY, "only applies in nmr mode")?;
        } else {
            l.forbid(&THEORY_ONLY, "only applies in theory mode")?;
        }
        let kind = l
            .choice(
                "experiment",
                &[("fid", Kind::Fid), ("zeno", Kind::Zeno), ("xy4", Kind::Xy4), ("sequence", Kind::Sequence)],
            )?
            .unwrap_or(Kind::Fid);
        if kind != Kind::Zeno {
            l.forbid(&["measurement", "sign"], "only applies to experiment = zeno")?;
        }
        if kind != Kind::Xy4 {
            l.forbid(&["xy4_target", "xy4_interval_ms", "acquisition"], "only applies to experiment = xy4")?;
        }
        if kind != Kind::Sequence {
            l.forbid(&["sequence"], "only applies to experiment = sequence")?;
        }

        let mut config = if theory {
            let p_e = l.non_negative("p_e", false)?.unwrap_or(DEFAULT_P_E);
            let mut c = ExperimentConfig::theory(p_e).map_err(RunError::Config)?;
            let random = l
                .choice("noise_axis", &[("fixed_y", false), ("random", true)])?
                .unwrap_or(false);
            match (random, l.uint("seed")?) {
                (true, seed) => c.noise = FlipNoise::random_theta(p_e, seed.unwrap_or(0)),
                (false, Some(_)) => {
                    l.forbid(&["seed"], "only applies with noise_axis = random")?;
                }
                (false, None) => {}
            }
            c
        } else {
            let base = SpinSystemParams::chloroform();
            let j_hz = l.positive("j_hz", false)?.unwrap_or(base.j_hz);
            let t_d = l.positive("t_d_ms", true)?.unwrap_or(base.t_d_ms);
            let t1s = l.positive("t1s_ms", true)?.unwrap_or(base.t1s_ms);
            let params = SpinSystemParams::new(j_hz, t_d, t1s)
                .map_err(|e| RunError::Config(e.into()))?;
            let mut c = ExperimentConfig::nmr(params);
            if let Some(v) = l.non_negative("tau_z_ms", false)? {
                c.tau_z_ms = v;
            }
            if let Some(v) = l.non_negative("pulse_tau_ms", false)? {
                c.pulse_tau_ms = v;
            }
            if let Some(v) = l.float("alpha", false)? {
                c.alpha = v;
            }
            c
        };
        if let Some(v) = l.positive("dt_ms", false)? {
            config.dt_ms = v;
        }
        if let Some(v) = l.non_negative("tau_xy_ms", false)? {
            config.tau_xy_ms = v;
        }
        if let Some(v) = l.uint("n_reps")? {
            if v == 0 {
                return Err(ManifestError::at(l.get("n_reps").unwrap(), "must be at least 1").into());
            }
            config.n_reps = v as usize;
        }
        if let Some(init) = l.choice(
            "initial",
            &[("plus", 0u8), ("zero", 1u8)],
        )? {
            config.initial = if init == 0 {
                InitialState::PseudopurePlus
            } else {
                InitialState::PseudopureZero
            };
        }
        if let Some(axis) = l.choice(
            "time_axis",
            &[("elapsed", TimeAxis::Elapsed), ("cycle", TimeAxis::CycleTxy), ("fitted", TimeAxis::Fitted)],
        )? {
            config.time_axis = axis;
        }
        if let Some(v) = l.boolean("validate")? {
            config.validate = v;
        }
        config.validate().map_err(RunError::Config)?;

        let experiment = match kind {
            Kind::Fid => Experiment::Fid,
            Kind::Zeno => {
                let default = if theory { MeasureKind::Ideal } else { MeasureKind::Entangler };
                let mk = l
                    .choice(
                        "measurement",
                        &[("entangler", MeasureKind::Entangler), ("ideal", MeasureKind::Ideal), ("literal", MeasureKind::Literal)],
                    )?
                    .unwrap_or(default);
                let sign = l
                    .choice("sign", &[("plus", Sign::Plus), ("minus", Sign::Minus)])?
                    .unwrap_or(Sign::Plus);
                Experiment::Zeno(match mk {
                    MeasureKind::Entangler if theory => {
                        return Err(ManifestError::at(
                            l.get("measurement").unwrap(),
                            "theory mode has only ideal measurements",
                        )
                        .into())
                    }
                    MeasureKind::Entangler => MeasurementSpec::entangler(sign, config.tau_z_ms),
                    MeasureKind::Ideal => MeasurementSpec::ideal_x(),
                    MeasureKind::Literal => MeasurementSpec::ideal_literal(),
                })
            }
            Kind::Xy4 => {
                if theory {
                    return Err(ManifestError::key("experiment", "xy4 needs pulses, which theory mode lacks").into());
                }
                Experiment::Xy4 {
                    target: l
                        .choice("xy4_target", &[("S", Spin::S), ("E", Spin::E)])?
                        .unwrap_or(Spin::E),
                    interval_ms: l
                        .non_negative("xy4_interval_ms", false)?
                        .unwrap_or(DEFAULT_XY4_INTERVAL_MS),
                    acquisition: l
                        .choice("acquisition", &[("block", Acquisition::PerBlock), ("step", Acquisition::PerStep)])?
                        .unwrap_or(Acquisition::PerBlock),
                }
            }
            Kind::Sequence => {
                let Some(e) = l.get("sequence") else {
                    return Err(ManifestError::key("sequence", "experiment = sequence needs a sequence file").into());
                };
                let path = base_dir.join(&e.value);
                let text = std::fs::read_to_string(&path).map_err(|source| RunError::Io {
                    path: path.clone(),
                    source,
                })?;
                let program = parse_sequence(&text)
                    .map_err(CompileError::from)
                    .and_then(|p| compile_sequence(&p, &config))
                    .map_err(|error| RunError::Sequence {
                        path: path.clone(),
                        error,
                    })?;
                Experiment::Sequence { path, program }
            }
        };

        let output = l.get("output").map(|e| base_dir.join(&e.value));
        let inferred = match output.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext == "json" => Format::Json,
            _ => Format::Csv,
        };
        let format = l
            .choice("format", &[("csv", Format::Csv), ("json", Format::Json)])?
            .unwrap_or(inferred);
        Ok(Self {
            config,
            experiment,
            output,
            format,
            fit: l.boolean("fit")?.unwrap_or(false),
            label: l.get("label").map(|e| e.value.clone()).unwrap_or_default(),
        })
    }

    pub fn simulate(&self) -> Result<SignalTrace, ExperimentError> {
        match &self.experiment {
            Experiment::Fid => run_fid(&self.config),
            Experiment::Zeno(spec) => run_zeno(&self.config, spec),
            Experiment::Xy4 {
                target,
                interval_ms,
                acquisition,
            } => run_xy4_sampled(&self.config, *target, *interval_ms, *acquisition),
            Experiment::Sequence { program, .. } => execute(program, &self.config),
        }
    }
}

/// Simulates, fits when requested, and writes the trace if an output path
/// is set.
pub fn run_manifest(manifest: &RunManifest) -> Result<RunSummary, RunError> {
    let trace = manifest.simulate().map_err(RunError::Simulation)?;
    let fit = manifest.fit.then(|| fit_envelope(&trace));
    if let Some(path) = &manifest.output {
        let bytes = render(&trace, manifest.format).map_err(|source| RunError::Emit {
            path: path.clone(),
            source,
        })?;
        write_atomic(path, &bytes).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(RunSummary {
        label: manifest.label.clone(),
        trace,
        fit,
        output: manifest.output.clone(),
    })
}

/// Runs independent manifests in parallel; results keep the input order.
pub fn run_all(manifests: &[RunManifest]) -> Vec<Result<RunSummary, RunError>> {
    sweep(manifests, run_manifest)
}
