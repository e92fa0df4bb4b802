//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Every tolerance is a named constant.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zenosim::channels::{
    dephasing_step, entangler_closed_form, entangler_measurement, evolve_step,
    ideal_measurement, pulse_step, relax_step, Axis, ControlRole, FlipNoise, MeasurementSpec,
    Pulse, Sign, Spin, SpinSystemParams,
};
use zenosim::experiments::fit::linear_fit;
use zenosim::experiments::{
    fit_envelope, run_fid, run_xy4, run_zeno, ExperimentConfig, SignalTrace,
};
use zenosim::protect::{
    error_step, parity_dephase, parity_dephase_via_ancilla, parity_project,
    parity_project_via_ancilla, protect_run, ErrorModel, ProtectParams,
};
use zenosim::qmat::{ad, DensityMatrix, C64};
use zenosim::seq::{compile_sequence, execute, parse_sequence};
use zenosim::theory::{zeno_survival, NoiseModel};

use common::random_input;

const C1_ZERO_TARGET_MS: f64 = 2.33;
const C1_ZERO_TOL_MS: f64 = 0.05;
const C1_T2_RANGE_MS: (f64, f64) = (14.5, 19.5);
const C1_RUNTIME_S: f64 = 1.0;
const C2_RUNTIME_S: f64 = 1.0;
const C3_SLOPE_TARGET: f64 = 2.0;
const C3_SLOPE_TOL: f64 = 0.15;
/// First quarter of a coupling period, starting one tenth in so the
/// deficit is well above rounding.
const C3_WINDOW: (f64, f64) = (0.025, 0.25);
const C4_TOL: f64 = 1e-9;
const C5_TOL: f64 = 1e-9;
const C5_STATES: usize = 100;
const C5_TAU_Z_MS: [f64; 6] = [0.8, 1.0, 1.2, 1.5, 2.0, 2.5];
const C6_GAP: f64 = 0.02;
const C6_CYCLES: usize = 50;
const C6_DOMINANCE_SLACK: f64 = 1e-12;
const C7_FACTOR: f64 = 4.0;
const C8_TRACE_TOL: f64 = 1e-10;
const C8_POSITIVITY_TOL: f64 = 1e-9;
const C8_INPUTS_PER_OP: usize = 1000;
const C9_AGREEMENT: f64 = 0.01;
const C9_N_MAX: u32 = 4096;
const C9_N_AGREE_FROM: u32 = 64;
const C10_TOL: f64 = 1e-12;
const C10_STATES: usize = 100;
const C11_TOL: f64 = 1e-12;
const C11_MIN_CORPUS: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn nmr() -> ExperimentConfig {
    ExperimentConfig::nmr(SpinSystemParams::chloroform())
}

/// FID at dt = 0.1 ms sampled every step for 60 ms.
fn nmr_fid() -> SignalTrace {
    let cfg = ExperimentConfig {
        tau_xy_ms: 0.1,
        n_reps: 600,
        ..nmr()
    };
    run_fid(&cfg).expect("fid runs")
}

fn max_sample_diff(a: &SignalTrace, b: &SignalTrace) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| (p.s_x - q.s_x).abs().max((p.s_y - q.s_y).abs()))
        .fold(0.0, f64::max)
}

fn c1_fid_reproduction() -> Outcome {
    let start = Instant::now();
    let trace = nmr_fid();
    let fit = fit_envelope(&trace);
    let secs = start.elapsed().as_secs_f64();
    let zero = trace.first_zero_sx().unwrap_or(f64::NAN);
    let t2 = fit.as_ref().map(|e| e.t2_or_inf()).unwrap_or(f64::NAN);
    let zero_ok = (zero - C1_ZERO_TARGET_MS).abs() <= C1_ZERO_TOL_MS;
    let t2_ok = t2 >= C1_T2_RANGE_MS.0 && t2 <= C1_T2_RANGE_MS.1;
    let time_ok = secs < C1_RUNTIME_S;
    outcome(
        zero_ok && t2_ok && time_ok,
        format!(
            "first zero {zero:.4} ms (target {C1_ZERO_TARGET_MS} ± {C1_ZERO_TOL_MS}: {}), \
             fitted T2 {t2:.3} ms (target [{}, {}]: {}), runtime {secs:.3} s (< {C1_RUNTIME_S}: {})",
            ok(zero_ok),
            C1_T2_RANGE_MS.0,
            C1_T2_RANGE_MS.1,
            ok(t2_ok),
            ok(time_ok)
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "miss"
    }
}

fn theory_zeno(tau_xy: f64) -> SignalTrace {
    let cfg = ExperimentConfig {
        tau_xy_ms: tau_xy,
        n_reps: (10.0 / tau_xy).round() as usize,
        ..ExperimentConfig::theory(0.05).unwrap()
    };
    run_zeno(&cfg, &MeasurementSpec::ideal_x()).expect("theory zeno runs")
}

fn c2_zeno_ordering() -> Outcome {
    let start = Instant::now();
    let fine = theory_zeno(1.0 / 160.0);
    let coarse = theory_zeno(1.0 / 40.0);
    let sparse = theory_zeno(1.0 / 10.0);
    let fid = run_fid(&ExperimentConfig::theory(0.05).unwrap()).expect("theory fid runs");
    let secs = start.elapsed().as_secs_f64();
    let at10 = |t: &SignalTrace| *t.at(10.0, 1e-9).expect("sample at t = 10");
    let (f_fine, f_coarse) = (at10(&fine).fidelity, at10(&coarse).fidelity);
    let envelope = at10(&fid).magnitude;
    let sparse_sx = at10(&sparse).s_x;
    let order = f_fine > f_coarse;
    let below = sparse_sx < envelope;
    let time_ok = secs < C2_RUNTIME_S;
    outcome(
        order && below && time_ok,
        format!(
            "F(1/160) = {f_fine:.5} > F(1/40) = {f_coarse:.5}: {}; s_x(1/10) = {sparse_sx:.5} < FID envelope {envelope:.5}: {}; runtime {secs:.3} s (< {C2_RUNTIME_S}: {})",
            ok(order),
            ok(below),
            ok(time_ok)
        ),
    )
}

fn c3_quadratic_onset() -> Outcome {
    let run = |pe: f64| {
        let cfg = ExperimentConfig {
            tau_xy_ms: 1.0 / 1600.0,
            n_reps: 400,
            ..ExperimentConfig::theory(pe).unwrap()
        };
        run_fid(&cfg).expect("theory fid runs")
    };
    let clean = run(0.0);
    let noisy = run(0.05);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (a, b) in clean.points.iter().zip(&noisy.points) {
        if a.t_ms < C3_WINDOW.0 - 1e-12 || a.t_ms > C3_WINDOW.1 + 1e-12 {
            continue;
        }
        // deficit of the complex signal s_x + i s_y
        let d = Complex64::new(a.s_x - b.s_x, a.s_y - b.s_y).norm();
        xs.push(a.t_ms.ln());
        ys.push(d.ln());
    }
    let slope = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    outcome(
        (slope - C3_SLOPE_TARGET).abs() <= C3_SLOPE_TOL,
        format!(
            "log-log slope {slope:.4} over t ∈ [{}, {}] ({} points), target {C3_SLOPE_TARGET} ± {C3_SLOPE_TOL}",
            C3_WINDOW.0,
            C3_WINDOW.1,
            xs.len()
        ),
    )
}

fn c4_identity_measurement() -> Outcome {
    let cfg = ExperimentConfig {
        tau_xy_ms: 0.3,
        tau_z_ms: 0.0,
        pulse_tau_ms: 0.0,
        n_reps: 200,
        ..nmr()
    };
    let fid = run_fid(&cfg).expect("fid runs");
    let zeno = run_zeno(&cfg, &MeasurementSpec::entangler(Sign::Minus, 0.0)).expect("zeno runs");
    let mut shared = 0;
    let mut worst: f64 = 0.0;
    for p in &zeno.points {
        if let Some(q) = fid.at(p.t_ms, 1e-12) {
            shared += 1;
            worst = worst.max((p.s_x - q.s_x).abs()).max((p.s_y - q.s_y).abs());
        }
    }
    outcome(
        shared == zeno.points.len() && worst <= C4_TOL,
        format!(
            "max |Δs| = {worst:.3e} over {shared} shared times (tol {C4_TOL:e}, ideal pulses)"
        ),
    )
}

fn c5_closed_form_entangler() -> Outcome {
    let params = SpinSystemParams::new(215.0, f64::INFINITY, f64::INFINITY).unwrap();
    let noise = FlipNoise::none();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let states: Vec<DensityMatrix> =
        (0..C5_STATES).map(|i| random_input(&mut rng, 4, i)).collect();
    let deviation = |pulse_tau: f64| {
        let mut worst: f64 = 0.0;
        for &tau_z in &C5_TAU_Z_MS {
            for sign in [Sign::Plus, Sign::Minus] {
                let spec = MeasurementSpec::entangler(sign, tau_z);
                let u = entangler_closed_form(sign, &params, tau_z);
                for rho in &states {
                    let sim = entangler_measurement(rho, &params, &noise, &spec, 0.1, pulse_tau)
                        .expect("entangler runs");
                    let exact = ad(&u, rho).unwrap();
                    worst = worst.max(sim.matrix().max_abs_diff(exact.matrix()).unwrap());
                }
            }
        }
        worst
    };
    let ideal = deviation(0.0);
    let finite = deviation(0.058);
    outcome(
        ideal <= C5_TOL,
        format!(
            "max entry deviation {ideal:.3e} over {} states × {} τ_z × 2 signs (tol {C5_TOL:e}, ideal pulses); \
             info: with 58 μs pulses the deviation is {finite:.3e}",
            C5_STATES,
            C5_TAU_Z_MS.len()
        ),
    )
}

fn c6_mplus_vs_no_relaxation() -> Outcome {
    let cfg = ExperimentConfig {
        tau_xy_ms: 0.3,
        tau_z_ms: 2.0,
        n_reps: C6_CYCLES,
        ..nmr()
    };
    let cfg_inf = ExperimentConfig {
        params: cfg.params.without_relaxation(),
        ..cfg.clone()
    };
    let plus_spec = MeasurementSpec::entangler(Sign::Plus, 2.0);
    let plus = run_zeno(&cfg, &plus_spec).expect("zeno runs");
    let inf = run_zeno(&cfg_inf, &plus_spec).expect("zeno runs");
    let minus = run_zeno(&cfg, &MeasurementSpec::entangler(Sign::Minus, 2.0)).expect("zeno runs");
    let (mut gap, mut at): (f64, f64) = (0.0, 0.0);
    for (p, q) in plus.points.iter().zip(&inf.points) {
        let g = (p.magnitude - q.magnitude).abs() / q.magnitude;
        if g > gap {
            (gap, at) = (g, p.t_ms);
        }
    }
    let dominated = plus
        .points
        .iter()
        .zip(&minus.points)
        .all(|(p, m)| p.magnitude >= m.magnitude - C6_DOMINANCE_SLACK);
    let gap_ok = gap <= C6_GAP;
    outcome(
        gap_ok && dominated,
        format!(
            "max relative |s| gap M+ vs T1s = ∞ is {:.2}% at t = {at:.3} ms (limit {}%: {}); |M+| ≥ |M−| pointwise: {}",
            gap * 100.0,
            C6_GAP * 100.0,
            ok(gap_ok),
            ok(dominated)
        ),
    )
}

fn c7_decoupling() -> Outcome {
    let bare = fit_envelope(&nmr_fid()).map(|e| e.t2_or_inf());
    let cfg = ExperimentConfig {
        n_reps: 500,
        ..nmr()
    };
    let xy4 = run_xy4(&cfg, Spin::E, 0.2)
        .ok()
        .and_then(|t| fit_envelope(&t).ok())
        .map(|e| e.t2_or_inf());
    match (bare, xy4) {
        (Ok(b), Some(x)) => {
            let factor = x / b;
            outcome(
                factor >= C7_FACTOR,
                format!("T2 with XY-4 on E at 0.2 ms = {x:.2} ms, without = {b:.3} ms, factor {factor:.2} (≥ {C7_FACTOR})"),
            )
        }
        other => outcome(false, format!("fit failed: {other:?}")),
    }
}

struct Cptp {
    checked: usize,
    worst_trace: f64,
    worst_eig: f64,
}

impl Cptp {
    fn check(&mut self, rho: &DensityMatrix) {
        self.checked += 1;
        self.worst_trace = self.worst_trace.max((rho.trace() - 1.0).abs());
        self.worst_eig = self.worst_eig.min(rho.min_eigenvalue());
    }
}

fn random_params(rng: &mut ChaCha8Rng) -> SpinSystemParams {
    let j = rng.random_range(50.0..500.0);
    let td = if rng.random_bool(0.1) {
        f64::INFINITY
    } else {
        rng.random_range(0.5..50.0)
    };
    let t1 = if rng.random_bool(0.1) {
        f64::INFINITY
    } else {
        rng.random_range(0.5..1000.0)
    };
    SpinSystemParams::new(j, td, t1).unwrap()
}

fn c8_cptp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ops: Vec<(&str, Cptp)> = Vec::new();
    let n = C8_INPUTS_PER_OP;
    let mut run = |name: &'static str, f: &mut dyn FnMut(&mut ChaCha8Rng, usize) -> DensityMatrix| {
        let mut c = Cptp { checked: 0, worst_trace: 0.0, worst_eig: 0.0 };
        for i in 0..n {
            c.check(&f(&mut rng, i));
        }
        ops.push((name, c));
    };
    run("dephasing_step", &mut |rng, i| {
        let p_e = rng.random_range(0.0..5.0);
        let mut noise = if i % 3 == 0 {
            FlipNoise::random_theta(p_e, i as u64)
        } else {
            FlipNoise::fixed_y(p_e)
        };
        let params = SpinSystemParams::theory(p_e).unwrap();
        let dt = rng.random_range(1e-4..0.1);
        let rho = random_input(rng, 4, i);
        dephasing_step(&rho, &params, &mut noise, dt).unwrap()
    });
    run("relax_step", &mut |rng, i| {
        let params = random_params(rng);
        let dt = rng.random_range(1e-3..0.5);
        relax_step(&random_input(rng, 4, i), &params, dt).unwrap()
    });
    run("evolve_step", &mut |rng, i| {
        let params = random_params(rng);
        let noise = FlipNoise::from_params(&params);
        let dt = rng.random_range(1e-3..0.25);
        evolve_step(&random_input(rng, 4, i), &params, &noise, dt).unwrap()
    });
    run("pulse_step", &mut |rng, i| {
        let params = random_params(rng);
        let noise = FlipNoise::from_params(&params);
        let target = if rng.random_bool(0.5) { Spin::S } else { Spin::E };
        let axis = if rng.random_bool(0.5) { Axis::X } else { Axis::Y };
        let pulse = Pulse::new(target, axis, rng.random_range(-2.0 * PI..2.0 * PI));
        let tau = rng.random_range(0.0..0.2);
        pulse_step(&random_input(rng, 4, i), &params, &noise, &pulse, tau).unwrap()
    });
    run("ideal_measurement", &mut |rng, i| {
        let spec = match i % 3 {
            0 => MeasurementSpec::ideal_x(),
            1 => MeasurementSpec::ideal_literal(),
            _ => MeasurementSpec::Ideal {
                control: ControlRole::SystemControls,
                pointer: random_input(rng, 2, i),
            },
        };
        let dim = if i % 2 == 0 { 4 } else { 8 };
        ideal_measurement(&random_input(rng, dim, i / 2), &spec).unwrap()
    });
    run("entangler_measurement", &mut |rng, i| {
        let params = random_params(rng);
        let noise = FlipNoise::from_params(&params);
        let sign = if i % 2 == 0 { Sign::Plus } else { Sign::Minus };
        let tau_z = 0.1 * rng.random_range(0..30) as f64;
        let spec = MeasurementSpec::entangler(sign, tau_z);
        entangler_measurement(&random_input(rng, 4, i), &params, &noise, &spec, 0.1, 0.058)
            .unwrap()
    });
    run("protect::error_step", &mut |rng, i| {
        let model = if i % 2 == 0 { ErrorModel::FirstOrder } else { ErrorModel::IndependentFlips };
        let eps = rng.random_range(0.0..=1.0);
        error_step(&random_input(rng, 4, i), eps, model).unwrap()
    });
    run("protect::parity_dephase", &mut |rng, i| {
        parity_dephase(&random_input(rng, 4, i)).unwrap()
    });
    run("protect::parity_dephase_via_ancilla", &mut |rng, i| {
        parity_dephase_via_ancilla(&random_input(rng, 4, i)).unwrap()
    });
    let worst_trace = ops.iter().map(|(_, c)| c.worst_trace).fold(0.0, f64::max);
    let worst_eig = ops.iter().map(|(_, c)| c.worst_eig).fold(0.0, f64::min);
    let total: usize = ops.iter().map(|(_, c)| c.checked).sum();
    let failing: Vec<&str> = ops
        .iter()
        .filter(|(_, c)| c.worst_trace > C8_TRACE_TOL || c.worst_eig < -C8_POSITIVITY_TOL)
        .map(|(n, _)| *n)
        .collect();
    outcome(
        failing.is_empty() && ops.iter().all(|(_, c)| c.checked >= C8_INPUTS_PER_OP),
        format!(
            "{} operations × {n} inputs ({total} maps): worst |Tr − 1| = {worst_trace:.2e} (tol {C8_TRACE_TOL:e}), \
             min eigenvalue {worst_eig:.2e} (tol −{C8_POSITIVITY_TOL:e}){}",
            ops.len(),
            if failing.is_empty() { String::new() } else { format!("; failing: {}", failing.join(", ")) }
        ),
    )
}

fn c9_zeno_scaling() -> Outcome {
    let model = NoiseModel::static_field(1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    let mut previous = f64::NEG_INFINITY;
    for n in 1..=C9_N_MAX {
        let s = zeno_survival(&model, 1.0, n).expect("survival defined at λT = 1");
        if s.exact <= previous {
            monotone = false;
        }
        previous = s.exact;
        if n >= C9_N_AGREE_FROM {
            worst = worst.max(s.gap() / s.exact);
        }
    }
    outcome(
        worst <= C9_AGREEMENT && monotone,
        format!(
            "max relative exact/approx gap for N ∈ [{C9_N_AGREE_FROM}, {C9_N_MAX}] is {worst:.3e} (limit {C9_AGREEMENT}); strictly increasing on [1, {C9_N_MAX}]: {}",
            ok(monotone)
        ),
    )
}

fn c10_protection() -> Outcome {
    let mut surv_err: f64 = 0.0;
    let mut fid_err: f64 = 0.0;
    let mut example = f64::NAN;
    for (gamma, total, n) in [(1.0, 1.0, 10), (1.0, 1.0, 2), (0.5, 2.0, 7), (2.0, 1.0, 40), (1.0, 3.0, 100)] {
        let p = ProtectParams::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8), gamma, total, n);
        let out = protect_run(&p).expect("protect runs");
        let oracle = (1.0 - (gamma * total / n as f64).powi(2)).powi(n as i32);
        if (gamma, total, n) == (1.0, 1.0, 10) {
            example = out.survival;
        }
        surv_err = surv_err.max((out.survival - oracle).abs());
        fid_err = fid_err.max((out.final_fidelity - 1.0).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut anc_err: f64 = 0.0;
    for i in 0..C10_STATES {
        let rho = random_input(&mut rng, 4, i);
        let direct = parity_project(&rho).unwrap();
        let circuit = parity_project_via_ancilla(&rho).unwrap();
        anc_err = anc_err
            .max(direct.even.max_abs_diff(&circuit.even).unwrap())
            .max((direct.survival - circuit.survival).abs());
    }
    outcome(
        surv_err <= C10_TOL && fid_err <= C10_TOL && anc_err <= C10_TOL,
        format!(
            "survival vs (1 − Γ²(T/N)²)^N max error {surv_err:.2e} (Γ=T=1, N=10 gives {example:.5}); \
             |F − 1| ≤ {fid_err:.2e}; ancilla vs direct projector {anc_err:.2e} over {C10_STATES} states (tol {C10_TOL:e})"
        ),
    )
}

fn c11_dsl() -> Outcome {
    let cfg = ExperimentConfig {
        tau_xy_ms: 0.3,
        tau_z_ms: 0.8,
        n_reps: 50,
        ..nmr()
    };
    let run_text = |text: &str| {
        let program = parse_sequence(text).expect("parses");
        let compiled = compile_sequence(&program, &cfg).expect("compiles");
        execute(&compiled, &cfg).expect("executes")
    };
    let explicit = run_text("repeat 50 { delay 0.3ms pulse S y 90 delay 0.8ms pulse S y -90 acquire }");
    let harness_minus = run_zeno(&cfg, &MeasurementSpec::entangler(Sign::Minus, 0.8)).unwrap();
    let named = run_text("repeat 50 { delay 0.3ms measure Mplus acquire }");
    let harness_plus = run_zeno(&cfg, &MeasurementSpec::entangler(Sign::Plus, 0.8)).unwrap();
    let d_explicit = max_sample_diff(&explicit, &harness_minus);
    let d_named = max_sample_diff(&named, &harness_plus);
    let lengths = explicit.points.len() == harness_minus.points.len()
        && named.points.len() == harness_plus.points.len();
    let same_times = explicit.times() == harness_minus.times() && named.times() == harness_plus.times();

    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "seq"))
        .collect();
    files.sort();
    let mut broken = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        let fixed = parse_sequence(&text).ok().and_then(|first| {
            let printed = first.to_string();
            let second = parse_sequence(&printed).ok()?;
            (first == second && second.to_string() == printed).then_some(())
        });
        if fixed.is_none() {
            broken.push(f.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    outcome(
        lengths && same_times && d_explicit <= C11_TOL && d_named <= C11_TOL && broken.is_empty() && files.len() >= C11_MIN_CORPUS,
        format!(
            "explicit M− sequence vs run_zeno max |Δs| = {d_explicit:.1e}, named M+ (τ_xy 0.3, τ_z 0.8) = {d_named:.1e} (tol {C11_TOL:e}); \
             round trip fixed point on {}/{} corpus files",
            files.len() - broken.len(),
            files.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("FID reproduction", c1_fid_reproduction),
        ("Zeno ordering", c2_zeno_ordering),
        ("quadratic onset", c3_quadratic_onset),
        ("identity measurement", c4_identity_measurement),
        ("closed-form entangler", c5_closed_form_entangler),
        ("M+ vs T1s = ∞", c6_mplus_vs_no_relaxation),
        ("decoupling", c7_decoupling),
        ("CPTP suite", c8_cptp),
        ("Zeno scaling law", c9_zeno_scaling),
        ("protection scheme", c10_protection),
        ("DSL equivalence", c11_dsl),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if o.pass {
            passed += 1;
        }
        println!(
            "{} criterion {:>2} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
