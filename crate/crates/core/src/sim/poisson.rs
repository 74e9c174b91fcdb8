use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::IntensityModel;
use crate::network::{LinearNetwork, PointPattern};
use crate::rng;

/// Poisson process with intensity `ρ_m` on main edges and `ρ_s` on side
/// edges, deterministic in `seed`.
pub fn simulate_poisson(
    net: &Arc<LinearNetwork>,
    intensity: &IntensityModel,
    seed: u64,
) -> PointPattern {
    simulate_poisson_with(net, intensity, &mut rng::rng(seed))
}

/// As [`simulate_poisson`], drawing from a caller-supplied generator.
///
/// The total count is `Poisson(Σ_e ρ_e ℓ_e)`; given the count, each point
/// picks an edge with probability `∝ ρ_e ℓ_e` and a uniform offset.
pub fn simulate_poisson_with<R: Rng + ?Sized>(
    net: &Arc<LinearNetwork>,
    intensity: &IntensityModel,
    rng: &mut R,
) -> PointPattern {
    let weights: Vec<f64> = net
        .edges()
        .iter()
        .map(|e| intensity.on(e.branch) * e.length)
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return PointPattern::empty(Arc::clone(net));
    }
    let n = Poisson::new(total)
        .expect("positive finite mean")
        .sample(rng) as usize;
    let choose = WeightedIndex::new(&weights).expect("positive total weight");
    let points = (0..n)
        .map(|_| {
            let edge = choose.sample(rng);
            let len = net.edge(edge).length;
            let offset = rng.random::<f64>() * len;
            net.point(edge, offset).expect("offset within edge")
        })
        .collect();
    PointPattern::new(Arc::clone(net), points).expect("points generated on the network")
}
