//! Global rank envelope tests.
//!
//! The extreme rank of curve `j` is the smallest, over defined cells, of
//! `min(#{i: Tᵢ ≤ Tⱼ}, #{i: Tᵢ ≥ Tⱼ})` counted over all `s + 1` curves.
//! Ties share ranks. Cells undefined for any curve are left out of every
//! rank.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{LinearNetwork, PointPattern};
use crate::rng::derive_seed;
use crate::sim::{simulate_cox, simulate_poisson, CoxMode, CoxModel, IntensityModel};
use crate::summaries::{
    default_rgrid, fgj_hat, k_hat, CurveKind, FgjConfig, IntensitySource, SummaryCurve,
};

/// A curve over a concatenation of labelled segments.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelledCurve {
    pub labels: Vec<CurveKind>,
    pub r: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl LabelledCurve {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn same_cells(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.r.len() == other.r.len()
            && self
                .r
                .iter()
                .zip(&other.r)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl From<&SummaryCurve> for LabelledCurve {
    fn from(c: &SummaryCurve) -> Self {
        Self {
            labels: vec![c.kind; c.len()],
            r: c.r.clone(),
            values: c.values.clone(),
        }
    }
}

/// Concatenates curves, dropping cells with `r < r_min`.
pub fn concat_test_function(curves: &[&SummaryCurve], r_min: f64) -> Result<LabelledCurve> {
    let mut out = LabelledCurve {
        labels: Vec::new(),
        r: Vec::new(),
        values: Vec::new(),
    };
    for c in curves {
        for i in (0..c.len()).filter(|&i| c.r[i] >= r_min) {
            out.labels.push(c.kind);
            out.r.push(c.r[i]);
            out.values.push(c.values[i]);
        }
    }
    if out.values.iter().all(Option::is_none) {
        return Err(Error::NoDefinedCells("concatenated test function".into()));
    }
    Ok(out)
}

/// Data curve plus simulated curves on a shared grid.
#[derive(Debug, Clone)]
pub struct CurveSet {
    pub data: LabelledCurve,
    pub sims: Vec<LabelledCurve>,
}

impl CurveSet {
    pub fn new(data: LabelledCurve, sims: Vec<LabelledCurve>) -> Result<Self> {
        if sims.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one simulated curve".into(),
            ));
        }
        if let Some(i) = sims.iter().position(|s| !s.same_cells(&data)) {
            return Err(Error::InvalidParameter(format!(
                "simulated curve {i} does not share the data grid"
            )));
        }
        Ok(Self { data, sims })
    }

    /// Cells defined for every curve.
    pub fn mask(&self) -> Vec<bool> {
        (0..self.data.len())
            .map(|c| {
                self.data.values[c].is_some() && self.sims.iter().all(|s| s.values[c].is_some())
            })
            .collect()
    }

    fn curve(&self, j: usize) -> &LabelledCurve {
        if j == 0 {
            &self.data
        } else {
            &self.sims[j - 1]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub alpha: f64,
    pub p_liberal: f64,
    pub p_conservative: f64,
    /// Extreme ranks, data first.
    pub ranks: Vec<usize>,
    pub critical_rank: usize,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
}

impl EnvelopeResult {
    pub fn rejects(&self) -> bool {
        self.p_conservative <= self.alpha
    }
}

/// Global rank envelope at level `alpha`.
pub fn rank_envelope(set: &CurveSet, alpha: f64) -> Result<EnvelopeResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let s = set.sims.len();
    let n = s + 1;
    if (s as f64) < 1.0 / alpha - 1.0 {
        log::warn!("{s} simulations are too few to resolve level {alpha}");
    }
    let mask = set.mask();
    if !mask.iter().any(|&m| m) {
        return Err(Error::NoDefinedCells("every cell is masked".into()));
    }
    let mut ranks = vec![usize::MAX; n];
    let mut column = Vec::with_capacity(n);
    for cell in (0..mask.len()).filter(|&c| mask[c]) {
        column.clear();
        column.extend((0..n).map(|j| set.curve(j).values[cell].unwrap()));
        let mut sorted = column.clone();
        sorted.sort_by(f64::total_cmp);
        for (j, &v) in column.iter().enumerate() {
            let le = sorted.partition_point(|&x| x <= v);
            let ge = n - sorted.partition_point(|&x| x < v);
            ranks[j] = ranks[j].min(le.min(ge));
        }
    }
    let r0 = ranks[0];
    let p_conservative = ranks.iter().filter(|&&r| r <= r0).count() as f64 / n as f64;
    let p_liberal = (ranks.iter().filter(|&&r| r < r0).count() + 1) as f64 / n as f64;

    let budget = alpha * n as f64 + 1e-9;
    let below = |k: usize| ranks.iter().filter(|&&r| r < k).count() as f64;
    let mut k_alpha = 1;
    while k_alpha <= n && below(k_alpha + 1) <= budget {
        k_alpha += 1;
    }

    let kept: Vec<&LabelledCurve> = (1..n)
        .filter(|&j| ranks[j] >= k_alpha)
        .map(|j| set.curve(j))
        .collect();
    let bound = |pick: fn(f64, f64) -> f64| -> Vec<Option<f64>> {
        (0..mask.len())
            .map(|c| {
                if !mask[c] || kept.is_empty() {
                    return None;
                }
                kept.iter().map(|k| k.values[c].unwrap()).reduce(pick)
            })
            .collect()
    };
    Ok(EnvelopeResult {
        alpha,
        p_liberal,
        p_conservative,
        ranks,
        critical_rank: k_alpha,
        lower: bound(f64::min),
        upper: bound(f64::max),
    })
}

/// Null model for an envelope test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NullModel {
    Poisson(IntensityModel),
    Cox { model: CoxModel, mode: CoxMode },
}

impl NullModel {
    /// Intensity of the observed process under the model.
    pub fn intensity(&self) -> IntensityModel {
        match self {
            NullModel::Poisson(m) => *m,
            NullModel::Cox { model, .. } => model.x_intensity(),
        }
    }

    fn simulate(&self, net: &Arc<LinearNetwork>, seed: u64) -> Result<PointPattern> {
        match self {
            NullModel::Poisson(m) => Ok(simulate_poisson(net, m, seed)),
            NullModel::Cox { model, mode } => Ok(simulate_cox(net, model, *mode, seed)?.pattern),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestFunction {
    /// `K̂(r) - r`.
    K,
    /// `F̂`, `Ĝ` and `Ĵ` concatenated.
    Fgj,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub test: TestFunction,
    pub sims: usize,
    pub alpha: f64,
    /// Cells with `r` below this are dropped.
    pub r_min: f64,
    /// r-grid; the default grid of the network when unset.
    pub rgrid: Option<Vec<f64>>,
    /// Lattice spacing for `F̂`.
    pub lattice_spacing: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            test: TestFunction::K,
            sims: 2499,
            alpha: 0.05,
            r_min: 0.0,
            rgrid: None,
            lattice_spacing: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub curves: CurveSet,
    pub result: EnvelopeResult,
}

/// Test curve of a pattern. Every curve uses the model intensity, so the
/// data and the replicates are reweighted the same way.
fn test_curve(
    pattern: &PointPattern,
    rho: &IntensityModel,
    cfg: &PipelineConfig,
    r: &[f64],
) -> Result<LabelledCurve> {
    match cfg.test {
        TestFunction::K => {
            let mut k = k_hat(pattern, rho, r)?;
            for (v, &x) in k.values.iter_mut().zip(r) {
                *v = v.map(|k| k - x);
            }
            let kept: Vec<usize> = (0..r.len()).filter(|&i| r[i] >= cfg.r_min).collect();
            Ok(LabelledCurve {
                labels: vec![CurveKind::K; kept.len()],
                r: kept.iter().map(|&i| r[i]).collect(),
                values: kept.iter().map(|&i| k.values[i]).collect(),
            })
        }
        TestFunction::Fgj => {
            let fgj = fgj_hat(
                pattern,
                &FgjConfig {
                    intensity: IntensitySource::Known(*rho),
                    lattice_spacing: cfg.lattice_spacing,
                    r_min: cfg.r_min,
                },
                r,
            )?;
            let mut out = LabelledCurve {
                labels: Vec::new(),
                r: Vec::new(),
                values: Vec::new(),
            };
            for c in [&fgj.f, &fgj.g, &fgj.j] {
                for i in (0..c.len()).filter(|&i| c.r[i] >= cfg.r_min) {
                    out.labels.push(c.kind);
                    out.r.push(c.r[i]);
                    out.values.push(c.values[i]);
                }
            }
            Ok(out)
        }
    }
}

/// Simulates `cfg.sims` replicates from `model`, computes the test curve
/// for the data and every replicate, and ranks them.
pub fn envelope_pipeline(
    pattern: &PointPattern,
    model: &NullModel,
    cfg: &PipelineConfig,
) -> Result<PipelineOutput> {
    if cfg.sims == 0 {
        return Err(Error::InvalidParameter(
            "need at least one simulation".into(),
        ));
    }
    let net = pattern.network();
    let r = cfg
        .rgrid
        .clone()
        .unwrap_or_else(|| default_rgrid(net.total_length()));
    let rho = model.intensity();
    let data = test_curve(pattern, &rho, cfg, &r)?;
    let sims: Vec<LabelledCurve> = (0..cfg.sims)
        .into_par_iter()
        .map(|i| {
            let x = model.simulate(net, derive_seed(cfg.seed, i as u64))?;
            test_curve(&x, &rho, cfg, &r)
        })
        .collect::<Result<_>>()?;
    let curves = CurveSet::new(data, sims)?;
    let result = rank_envelope(&curves, cfg.alpha)?;
    Ok(PipelineOutput { curves, result })
}
