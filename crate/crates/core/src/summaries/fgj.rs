//! Inhomogeneous empty-space, nearest-neighbour and J statistics with
//! border correction on the eroded network.

use rayon::prelude::*;

use super::{check_grid, plug_in_intensity, CurveKind, CurveMeta, SummaryCurve};
use crate::error::{Error, Result};
use crate::network::{Lattice, LinearNetwork, NetworkPoint, PointPattern};
use crate::sim::{Intensity, IntensityModel};

/// Where the intensity used for reweighting comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntensitySource {
    Known(IntensityModel),
    /// Per-branch maximum likelihood fit to the pattern itself.
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgjConfig {
    pub intensity: IntensitySource,
    /// Spacing of the lattice `H` used for `F̂`.
    pub lattice_spacing: f64,
    /// Cells with `r` below this are reported as undefined.
    pub r_min: f64,
}

impl Default for FgjConfig {
    fn default() -> Self {
        Self {
            intensity: IntensitySource::PlugIn,
            lattice_spacing: 0.5,
            r_min: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FgjCurves {
    pub f: SummaryCurve,
    pub g: SummaryCurve,
    pub j: SummaryCurve,
}

/// Per reference point: thinning factors `1 - ρ̄/ρ̃(u)` of the data points
/// sorted by distance, as prefix products.
struct Neighbourhood {
    dists: Vec<f64>,
    products: Vec<f64>,
    leaf: f64,
}

impl Neighbourhood {
    fn new(
        net: &LinearNetwork,
        v: &NetworkPoint,
        skip: Option<usize>,
        data: &[NetworkPoint],
        factors: &[f64],
    ) -> Self {
        let mut pairs: Vec<(f64, f64)> = data
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != skip)
            .map(|(i, u)| (net.distance(u, v), factors[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut acc = 1.0;
        let products = pairs
            .iter()
            .map(|p| {
                acc *= p.1;
                acc
            })
            .collect();
        Self {
            dists: pairs.into_iter().map(|p| p.0).collect(),
            products,
            leaf: net.leaf_distance(v),
        }
    }

    /// Adds this point's contribution to the numerator and denominator of
    /// every grid cell where it lies in `L ⊖ r`.
    fn accumulate(&self, r: &[f64], num: &mut [f64], den: &mut [f64]) {
        let mut k = 0;
        for (i, &x) in r.iter().enumerate() {
            if self.leaf <= x {
                break;
            }
            while k < self.dists.len() && self.dists[k] <= x {
                k += 1;
            }
            num[i] += if k == 0 { 1.0 } else { self.products[k - 1] };
            den[i] += 1.0;
        }
    }
}

fn sum_contributions(parts: Vec<Neighbourhood>, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut num = vec![0.0; r.len()];
    let mut den = vec![0.0; r.len()];
    for p in &parts {
        p.accumulate(r, &mut num, &mut den);
    }
    (num, den)
}

/// `F̂`, `Ĝ` and `Ĵ` on the grid `r`.
pub fn fgj_hat(pattern: &PointPattern, config: &FgjConfig, r: &[f64]) -> Result<FgjCurves> {
    check_grid(r)?;
    let net = pattern.network();
    let model = match config.intensity {
        IntensitySource::Known(m) => m,
        IntensitySource::PlugIn => plug_in_intensity(pattern),
    };
    let data = pattern.points();
    let rho: Vec<f64> = data.iter().map(|p| model.at(net, p)).collect();
    if rho.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(
            "intensity must be positive at every data point".into(),
        ));
    }
    let rho_bar = model.infimum(net);
    if !(rho_bar > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lower intensity bound must be positive, got {rho_bar}"
        )));
    }
    let factors: Vec<f64> = rho.iter().map(|&x| 1.0 - rho_bar / x).collect();
    let lattice = Lattice::new(net, config.lattice_spacing)?;

    let f_parts: Vec<Neighbourhood> = lattice
        .points()
        .par_iter()
        .map(|v| Neighbourhood::new(net, v, None, data, &factors))
        .collect();
    let g_parts: Vec<Neighbourhood> = (0..data.len())
        .into_par_iter()
        .map(|i| Neighbourhood::new(net, &data[i], Some(i), data, &factors))
        .collect();
    let (f_num, f_den) = sum_contributions(f_parts, r);
    let (g_num, g_den) = sum_contributions(g_parts, r);

    let mut f_vals = Vec::with_capacity(r.len());
    let mut g_vals = Vec::with_capacity(r.len());
    let mut j_vals = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        let keep = r[i] >= config.r_min;
        let f = (keep && f_den[i] > 0.0).then(|| 1.0 - f_num[i] / f_den[i]);
        let g = (keep && g_den[i] > 0.0).then(|| 1.0 - g_num[i] / g_den[i]);
        let j = match (f, g) {
            (Some(f), Some(g)) if f < 1.0 => Some((1.0 - g) / (1.0 - f)),
            _ => None,
        };
        f_vals.push(f);
        g_vals.push(g);
        j_vals.push(j);
    }
    let meta = CurveMeta {
        intensity_mean: Some(model.mean(net)),
        bandwidth: None,
        lattice_spacing: Some(config.lattice_spacing),
    };
    Ok(FgjCurves {
        f: SummaryCurve::new(CurveKind::F, r.to_vec(), f_vals, meta.clone()),
        g: SummaryCurve::new(CurveKind::G, r.to_vec(), g_vals, meta.clone()),
        j: SummaryCurve::new(CurveKind::J, r.to_vec(), j_vals, meta),
    })
}
