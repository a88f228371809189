//! Command-line entry points and the HTTP API for sweeps, confusion
//! matrices, probability heatmaps and partial dependence surfaces.

pub mod api;
pub mod commands;
pub mod dataset;
