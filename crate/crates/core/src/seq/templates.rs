//! Source text for the standard experiments, parameterized by a config.

use crate::channels::{Sign, Spin};
use crate::experiments::ExperimentConfig;

/// `τ_xy` blocks with a sample after each.
pub fn fid(config: &ExperimentConfig) -> String {
    format!(
        "repeat {} {{\n  delay {}ms\n  acquire\n}}\n",
        config.n_reps, config.tau_xy_ms
    )
}

/// Zeno cycle using a named measurement (`Mplus`, `Mminus`, `Mideal`).
pub fn zeno_named(config: &ExperimentConfig, measurement: &str) -> String {
    format!(
        "repeat {} {{\n  delay {}ms\n  measure {measurement}\n  acquire\n}}\n",
        config.n_reps, config.tau_xy_ms
    )
}

/// Zeno cycle with the entangler spelled out as pulse, delay, inverse pulse.
pub fn zeno_explicit(config: &ExperimentConfig, sign: Sign) -> String {
    let open = match sign {
        Sign::Plus => -90,
        Sign::Minus => 90,
    };
    format!(
        "repeat {} {{\n  delay {}ms\n  pulse S y {open}\n  delay {}ms\n  pulse S y {}\n  acquire\n}}\n",
        config.n_reps, config.tau_xy_ms, config.tau_z_ms, -open
    )
}

/// XY-4 cycles on `target`, sampled after each cycle.
pub fn xy4(config: &ExperimentConfig, target: Spin, interval_ms: f64) -> String {
    let spin = match target {
        Spin::S => "S",
        Spin::E => "E",
    };
    let mut body = String::new();
    for axis in ["x", "y", "x", "y"] {
        body.push_str(&format!("  delay {interval_ms}ms\n  pulse {spin} {axis} 180\n"));
    }
    format!("repeat {} {{\n{body}  acquire\n}}\n", config.n_reps)
}
