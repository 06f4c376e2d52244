//! Skorokhod embedding of a centered measure by a Gaussian-tilted,
//! measure-valued flow, with a Monte Carlo harness that checks the
//! embedding's distributional claims.

pub mod cli;
pub mod error;
pub mod flow;
pub mod io;
pub mod measure;
pub mod tilt;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{make_measure, Hull, Measure, MeasureOptions, MeasureSpec};
pub use tilt::{
    solve_c, tilt_derivatives, tilted_density, tilted_measure, tilted_moments, TiltDerivatives,
    TiltFamily, TiltParams, TiltedMeasure, TiltedMoments,
};
pub use flow::{run_ensemble, simulate_path, step, PathResult, PathState, Scheme, SimConfig, StopReason};
pub use verify::{CheckReport, EnsembleSummary};
