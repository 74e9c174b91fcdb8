//! Parameter inference for the thinned Cox model.
//!
//! The intensity is fitted per branch first; `(σ², β)` then come from
//! minimum contrast on `K̂` or `ĝ`, or from the second-order composite
//! likelihood. [`simulation_study`] runs seeded replicate experiments.

mod cl2;
mod min_contrast;
mod study;

use serde::{Deserialize, Serialize};

use crate::sim::{retention_mean, IntensityModel};

pub use cl2::{
    cl2_fit, cl2_score, mc_double_integral, pair_integral, smooth_weight, Cl2Config, Cl2Fit,
    Cl2Objective, Cl2Problem, DistanceSample, SearchStrategy, WeightKind,
};
pub use min_contrast::{
    min_contrast, two_step_fit, ContrastFit, ContrastTarget, MinContrastConfig,
};
pub use study::{
    simulation_study, Estimator, RunSummary, SimulationDesign, StudyRow, StudyRun, StudyTable,
};

/// Outcome of the two-step procedure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub method: String,
    /// Intensity of the observed process.
    pub rho: IntensityModel,
    pub sigma2: f64,
    pub beta: f64,
    pub k: u32,
    /// Intensity of the driving process, `(1 + σ²)^{k/2} ρ`.
    pub rho_y: IntensityModel,
    /// Contrast or score norm at the optimum.
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Set when a grid search ended on the grid boundary.
    #[serde(default)]
    pub on_boundary: bool,
}

/// Driving intensity from a fitted observed intensity.
pub fn driving_intensity(rho: &IntensityModel, sigma2: f64, k: u32) -> IntensityModel {
    rho.scaled(1.0 / retention_mean(sigma2, k))
}
