//! Geometrically corrected `K̂` and `ĝ`.

use rayon::prelude::*;

use super::{check_grid, CurveKind, CurveMeta, SummaryCurve};
use crate::error::{Error, Result};
use crate::network::{PointPattern, SphereProfile};
use crate::sim::Intensity;

/// Smoothing kernel for `ĝ`, scaled to support `[-b, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Epanechnikov,
    Uniform,
}

impl Kernel {
    pub fn eval(self, x: f64, b: f64) -> f64 {
        let z = x / b;
        if z.abs() > 1.0 {
            return 0.0;
        }
        match self {
            Kernel::Epanechnikov => 0.75 * (1.0 - z * z) / b,
            Kernel::Uniform => 0.5 / b,
        }
    }
}

/// Default bandwidth `0.15 / √(mean ρ̃)`.
pub fn default_bandwidth(mean_intensity: f64) -> f64 {
    0.15 / mean_intensity.sqrt()
}

/// All ordered pairs of a pattern with their distances and weights
/// `1 / (ρ̃(u) ρ̃(v) m(u, d))`, sorted by distance.
#[derive(Debug, Clone)]
pub struct PairTable {
    dists: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total_length: f64,
    intensity_mean: f64,
}

impl PairTable {
    pub fn new(pattern: &PointPattern, intensity: &dyn Intensity) -> Result<Self> {
        let net = pattern.network();
        let pts = pattern.points();
        let rho: Vec<f64> = pts.iter().map(|p| intensity.at(net, p)).collect();
        if let Some(bad) = rho.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "intensity must be positive at every data point, got {bad}"
            )));
        }
        let rows: Vec<Result<Vec<(f64, f64)>>> = (0..pts.len())
            .into_par_iter()
            .map(|i| {
                let profile = SphereProfile::new(net, &pts[i])?;
                let mut row = Vec::with_capacity(pts.len().saturating_sub(1));
                for j in (0..pts.len()).filter(|&j| j != i) {
                    let d = net.distance(&pts[i], &pts[j]);
                    let m = profile.count(d);
                    if m == 0 {
                        return Err(Error::Numerical(format!(
                            "zero sphere count at distance {d}"
                        )));
                    }
                    row.push((d, 1.0 / (rho[i] * rho[j] * m as f64)));
                }
                Ok(row)
            })
            .collect();
        if !net.is_tree() {
            return Err(Error::NotATree);
        }
        let mut pairs = Vec::new();
        for row in rows {
            pairs.extend(row?);
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let dists: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            dists,
            weights,
            cumulative,
            total_length: net.total_length(),
            intensity_mean: intensity.mean(net),
        })
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    pub fn intensity_mean(&self) -> f64 {
        self.intensity_mean
    }

    /// `K̂(r)`.
    pub fn k_at(&self, r: f64) -> f64 {
        let n = self.dists.partition_point(|&d| d <= r);
        if n == 0 {
            0.0
        } else {
            self.cumulative[n - 1] / self.total_length
        }
    }

    pub fn k_curve(&self, r: &[f64]) -> Result<SummaryCurve> {
        check_grid(r)?;
        let values = r.iter().map(|&x| Some(self.k_at(x))).collect();
        Ok(SummaryCurve::new(
            CurveKind::K,
            r.to_vec(),
            values,
            CurveMeta {
                intensity_mean: Some(self.intensity_mean),
                ..Default::default()
            },
        ))
    }

    /// `ĝ` on the grid, with reflection at zero:
    /// `ĝ(r) = |L|⁻¹ Σ w [κ(r - d) + κ(r + d)]`.
    pub fn g_curve(&self, r: &[f64], bandwidth: f64, kernel: Kernel) -> Result<SummaryCurve> {
        check_grid(r)?;
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let mut acc = vec![0.0; r.len()];
        for (&d, &w) in self.dists.iter().zip(&self.weights) {
            let lo = r.partition_point(|&x| x < d - bandwidth);
            let hi = r.partition_point(|&x| x <= d + bandwidth);
            for i in lo..hi {
                acc[i] += w * kernel.eval(r[i] - d, bandwidth);
            }
            if d < bandwidth {
                let hi = r.partition_point(|&x| x <= bandwidth - d);
                for i in 0..hi {
                    acc[i] += w * kernel.eval(r[i] + d, bandwidth);
                }
            }
        }
        let values = acc
            .into_iter()
            .map(|a| Some(a / self.total_length))
            .collect();
        Ok(SummaryCurve::new(
            CurveKind::PairCorrelation,
            r.to_vec(),
            values,
            CurveMeta {
                intensity_mean: Some(self.intensity_mean),
                bandwidth: Some(bandwidth),
                ..Default::default()
            },
        ))
    }
}

/// `K̂(r) = |L|⁻¹ Σ_{u≠v} 1{d(u,v) ≤ r} / (ρ̃(u) ρ̃(v) m(u, d(u,v)))`.
pub fn k_hat(pattern: &PointPattern, intensity: &dyn Intensity, r: &[f64]) -> Result<SummaryCurve> {
    PairTable::new(pattern, intensity)?.k_curve(r)
}

/// Kernel estimate of the pair correlation function. `bandwidth` defaults
/// to [`default_bandwidth`] of the mean of `intensity`.
pub fn g_hat(
    pattern: &PointPattern,
    intensity: &dyn Intensity,
    r: &[f64],
    bandwidth: Option<f64>,
    kernel: Kernel,
) -> Result<SummaryCurve> {
    let table = PairTable::new(pattern, intensity)?;
    let b = bandwidth.unwrap_or_else(|| default_bandwidth(table.intensity_mean()));
    table.g_curve(r, b, kernel)
}
