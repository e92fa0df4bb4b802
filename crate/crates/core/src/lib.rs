//! Density-matrix simulation of quantum Zeno experiments on a coupled
//! two-spin NMR system, with a pulse-sequence language and run manifests.

pub mod channels;
pub mod experiments;
pub mod manifest;
pub mod protect;
pub mod qmat;
pub mod seq;
pub mod theory;

#[cfg(test)]
mod testutil;

pub use channels::{
    ChannelError, FlipNoise, MeasurementSpec, Pulse, Sign, Spin, SpinSystemParams,
};
pub use experiments::{ExperimentConfig, ExperimentError, Mode, SignalPoint, SignalTrace};
pub use qmat::{DenseMatrix, DensityMatrix, QmatError};
