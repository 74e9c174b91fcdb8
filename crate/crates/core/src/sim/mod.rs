//! Stochastic generators on linear networks.
//!
//! - [`simulate_poisson`]: inhomogeneous Poisson process with a constant
//!   intensity per branch label.
//! - [`sample_grf`]: Gaussian fields with exponential correlation in the
//!   shortest-path metric.
//! - [`retention_field`]: the thinning probabilities `Π`.
//! - [`simulate_cox`]: the thinned Cox process, exactly at the Poisson
//!   points or via a lattice discretisation of `Π`.
//! - [`matern_thin`]: Matérn type-I hard-core thinning.

mod cox;
mod grf;
mod matern;
mod poisson;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{Branch, LinearNetwork, NetworkPoint};

pub use cox::{simulate_cox, simulate_cox_with, CoxMode, CoxRealization};
pub use grf::{
    cholesky_with_jitter, retention_field, sample_field, sample_grf, Correlation, Exponential,
    GrfSample,
};
pub use matern::matern_thin;
pub use poisson::{simulate_poisson, simulate_poisson_with};

/// Anything that assigns an intensity (points/µm) to network locations.
pub trait Intensity: Sync {
    fn at(&self, net: &LinearNetwork, p: &NetworkPoint) -> f64;

    /// `inf_{u ∈ L} ρ(u)`.
    fn infimum(&self, net: &LinearNetwork) -> f64;

    /// `∫_L ρ(u) du / |L|`.
    fn mean(&self, net: &LinearNetwork) -> f64;
}

/// Constant intensity on the main branch and on the side branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityModel {
    pub main: f64,
    pub side: f64,
}

impl IntensityModel {
    pub fn new(main: f64, side: f64) -> Result<Self> {
        if !(main >= 0.0 && side >= 0.0) || !main.is_finite() || !side.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "intensities must be finite and nonnegative, got ({main}, {side})"
            )));
        }
        Ok(Self { main, side })
    }

    pub fn homogeneous(rho: f64) -> Self {
        Self {
            main: rho,
            side: rho,
        }
    }

    pub fn on(&self, branch: Branch) -> f64 {
        match branch {
            Branch::Main => self.main,
            Branch::Side => self.side,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            main: self.main * factor,
            side: self.side * factor,
        }
    }

    /// `ρ_m |L_m| + ρ_s |L_s|`.
    pub fn expected_count(&self, net: &LinearNetwork) -> f64 {
        self.main * net.branch_length(Branch::Main) + self.side * net.branch_length(Branch::Side)
    }
}

impl Intensity for IntensityModel {
    fn at(&self, net: &LinearNetwork, p: &NetworkPoint) -> f64 {
        self.on(net.branch_of(p))
    }

    fn infimum(&self, net: &LinearNetwork) -> f64 {
        [Branch::Main, Branch::Side]
            .into_iter()
            .filter(|&b| net.branch_length(b) > 0.0)
            .map(|b| self.on(b))
            .fold(f64::INFINITY, f64::min)
    }

    fn mean(&self, net: &LinearNetwork) -> f64 {
        self.expected_count(net) / net.total_length()
    }
}

/// Parameters of the thinned Cox process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxModel {
    /// Intensity of the driving Poisson process `Y`.
    pub rho_y: IntensityModel,
    pub sigma2: f64,
    /// Inverse correlation range (1/µm).
    pub beta: f64,
    /// Number of Gaussian fields.
    pub k: u32,
}

impl CoxModel {
    pub fn new(rho_y: IntensityModel, sigma2: f64, beta: f64, k: u32) -> Result<Self> {
        let m = Self {
            rho_y,
            sigma2,
            beta,
            k,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        IntensityModel::new(self.rho_y.main, self.rho_y.side)?;
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Ok(())
    }

    /// `E Π(u) = (1 + σ²)^{-k/2}`.
    pub fn mean_retention(&self) -> f64 {
        retention_mean(self.sigma2, self.k)
    }

    /// Intensity of the thinned process `X`.
    pub fn x_intensity(&self) -> IntensityModel {
        self.rho_y.scaled(self.mean_retention())
    }
}

/// `(1 + σ²)^{-k/2}`.
pub fn retention_mean(sigma2: f64, k: u32) -> f64 {
    (1.0 + sigma2).powf(-0.5 * k as f64)
}
