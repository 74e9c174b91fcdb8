use std::sync::Arc;

use rand::Rng;

use super::grf::{retention_from_values, sample_field, Exponential};
use super::poisson::simulate_poisson_with;
use super::CoxModel;
use crate::error::{Error, Result};
use crate::network::{Lattice, LinearNetwork, NetworkPoint, PointPattern};
use crate::rng;

/// How the retention field is realised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoxMode {
    /// Field evaluated jointly at the points of the driving process.
    Exact,
    /// Field on a lattice with the given spacing; each candidate uses its
    /// nearest lattice site.
    Grid { spacing: f64 },
}

/// One realisation of the Cox process.
#[derive(Debug, Clone)]
pub struct CoxRealization {
    pub pattern: PointPattern,
    /// The driving Poisson pattern before thinning.
    pub driving: PointPattern,
    /// `Π` at each driving point.
    pub candidate_pi: Vec<f64>,
    /// Lattice sites and `Π` values (grid mode only).
    pub pi_grid: Option<(Vec<NetworkPoint>, Vec<f64>)>,
}

/// Simulates the thinned Cox process, deterministic in `seed`.
pub fn simulate_cox(
    net: &Arc<LinearNetwork>,
    model: &CoxModel,
    mode: CoxMode,
    seed: u64,
) -> Result<CoxRealization> {
    simulate_cox_with(net, model, mode, &mut rng::rng(seed))
}

/// As [`simulate_cox`] with a caller-supplied generator.
///
/// A candidate `u` of the driving process is retained when `Π(u) ≥ R(u)`
/// with `R(u)` uniform on `[0, 1)`, drawn in candidate order after the
/// field.
pub fn simulate_cox_with<R: Rng + ?Sized>(
    net: &Arc<LinearNetwork>,
    model: &CoxModel,
    mode: CoxMode,
    rng: &mut R,
) -> Result<CoxRealization> {
    model.validate()?;
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    let corr = Exponential { beta: model.beta };
    let k = model.k as usize;
    let (driving, candidate_pi, pi_grid) = match mode {
        CoxMode::Exact => {
            let y = simulate_poisson_with(net, &model.rho_y, rng);
            let z = sample_field(net, y.points(), &corr, k, rng)?;
            let pi = retention_from_values(&z, y.len(), model.sigma2);
            (y, pi, None)
        }
        CoxMode::Grid { spacing } => {
            if !(spacing > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "grid spacing must be positive, got {spacing}"
                )));
            }
            let lat = Lattice::new(net, spacing)?;
            let z = sample_field(net, lat.points(), &corr, k, rng)?;
            let grid_pi = retention_from_values(&z, lat.len(), model.sigma2);
            let y = simulate_poisson_with(net, &model.rho_y, rng);
            let pi = y
                .points()
                .iter()
                .map(|p| grid_pi[lat.nearest_site(p)])
                .collect();
            (y, pi, Some((lat.points().to_vec(), grid_pi)))
        }
    };
    let keep: Vec<bool> = candidate_pi
        .iter()
        .map(|&pi| pi >= rng.random::<f64>())
        .collect();
    let pattern = driving.filter(|i, _| keep[i]);
    Ok(CoxRealization {
        pattern,
        driving,
        candidate_pi,
        pi_grid,
    })
}
