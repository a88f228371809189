//! Early classification of multivariate time series with interval forests:
//! one model per prefix length, accuracy-over-time curves, per-series
//! probability trajectories and partial dependence explanations.

pub mod artifacts;
pub mod data;
pub mod drcif;
pub mod early;
pub mod error;
pub mod explain;
pub mod features;
pub mod io;
pub mod preprocess;
pub mod rng;
pub mod synth;

pub use data::*;
pub use drcif::DrCifModel;
pub use early::{ConfusionMatrix, CurvePoint, LooResult, TemporalMatrix, WindowGrid, WindowSweep};
pub use error::{Error, Result};
pub use explain::PdpSurface;
