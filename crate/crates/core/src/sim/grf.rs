//! Gaussian random fields on networks and the retention field.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::network::{LinearNetwork, NetworkPoint};
use crate::rng;

/// Isotropic correlation function of the shortest-path distance.
pub trait Correlation: Sync {
    fn correlation(&self, d: f64) -> f64;
}

/// `c(d) = exp(-β d)`, valid on every tree for every `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub beta: f64,
}

impl Correlation for Exponential {
    fn correlation(&self, d: f64) -> f64 {
        (-self.beta * d).exp()
    }
}

/// Jointly sampled values of `k` independent fields at a set of sites.
#[derive(Debug, Clone)]
pub struct GrfSample {
    pub sites: Vec<NetworkPoint>,
    /// `values[j][i]` is field `j` at site `i`.
    pub values: Vec<Vec<f64>>,
    pub beta: f64,
    pub seed: u64,
}

impl GrfSample {
    pub fn k(&self) -> usize {
        self.values.len()
    }
}

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Lower Cholesky factor of `cov`, adding diagonal jitter if needed.
///
/// Jitter starts at `1e-10 · mean diagonal` and grows tenfold up to
/// `1e-4 · mean diagonal`. Returns the factor and the jitter used.
pub fn cholesky_with_jitter(cov: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if let Some(ch) = cov.clone().cholesky() {
        return Ok((ch.unpack(), 0.0));
    }
    let n = cov.nrows();
    let mean_diag = (0..n).map(|i| cov[(i, i)]).sum::<f64>() / n.max(1) as f64;
    let mut rel = JITTER_START;
    while rel <= JITTER_MAX * (1.0 + 1e-9) {
        let jitter = rel * mean_diag;
        let mut m = cov.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            log::debug!("cholesky needed jitter {jitter:e}");
            return Ok((ch.unpack(), jitter));
        }
        rel *= 10.0;
    }
    Err(Error::NotPositiveDefinite {
        jitter: JITTER_MAX * mean_diag,
    })
}

/// `k` independent zero-mean unit-variance fields at `sites` with the given
/// correlation, drawn from `rng`.
///
/// Coincident sites share one value, so the factorisation only sees
/// distinct locations.
pub fn sample_field<R: Rng + ?Sized>(
    net: &LinearNetwork,
    sites: &[NetworkPoint],
    corr: &dyn Correlation,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    if let Some(p) = sites.iter().find(|p| !net.contains(p)) {
        return Err(Error::PointOffNetwork(format!("{p:?}")));
    }
    if sites.is_empty() {
        return Ok(vec![Vec::new(); k]);
    }
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| sites[a].cmp_position(&sites[b]));
    let mut unique: Vec<NetworkPoint> = Vec::new();
    let mut slot = vec![0usize; sites.len()];
    for &i in &order {
        if unique.last() != Some(&sites[i]) {
            unique.push(sites[i]);
        }
        slot[i] = unique.len() - 1;
    }
    let n = unique.len();
    let cov = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else {
            corr.correlation(net.distance(&unique[i], &unique[j]))
        }
    });
    let (lower, _) = cholesky_with_jitter(&cov)?;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let field = &lower * z;
        out.push(slot.iter().map(|&s| field[s]).collect());
    }
    Ok(out)
}

/// `k` fields with correlation `exp(-β d_L)` at `sites`, deterministic in
/// `seed`.
pub fn sample_grf(
    net: &LinearNetwork,
    sites: &[NetworkPoint],
    beta: f64,
    k: usize,
    seed: u64,
) -> Result<GrfSample> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let values = sample_field(net, sites, &Exponential { beta }, k, &mut rng::rng(seed))?;
    Ok(GrfSample {
        sites: sites.to_vec(),
        values,
        beta,
        seed,
    })
}

/// `Π = exp(-σ²/2 · Σ_j Z_j²)` at every site.
pub fn retention_field(grf: &GrfSample, sigma2: f64) -> Vec<f64> {
    retention_from_values(&grf.values, grf.sites.len(), sigma2)
}

pub(crate) fn retention_from_values(values: &[Vec<f64>], n: usize, sigma2: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let ss: f64 = values.iter().map(|z| z[i] * z[i]).sum();
            (-0.5 * sigma2 * ss).exp()
        })
        .collect()
}
