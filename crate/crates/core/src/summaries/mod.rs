//! Summary functions of point patterns on networks.
//!
//! Theoretical curves (`g₀`, `K`) for the thinned Cox model, intensity
//! estimators, the geometrically corrected `K̂`/`ĝ`, and the empirical
//! `F̂`/`Ĝ`/`Ĵ` statistics.

mod fgj;
mod intensity;
mod second_order;
mod theory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fgj::{fgj_hat, FgjConfig, FgjCurves, IntensitySource};
pub use intensity::{fit_intensity_mle, kernel_intensity, plug_in_intensity, KernelIntensity};
pub use second_order::{default_bandwidth, g_hat, k_hat, Kernel, PairTable};
pub use theory::{g0, g0_gradient, g0_theoretical, k_closed_form, k_function, k_theoretical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    K,
    #[serde(rename = "g")]
    PairCorrelation,
    F,
    G,
    J,
    #[serde(rename = "intensity")]
    Intensity,
}

impl CurveKind {
    pub fn label(self) -> &'static str {
        match self {
            CurveKind::K => "K",
            CurveKind::PairCorrelation => "g",
            CurveKind::F => "F",
            CurveKind::G => "G",
            CurveKind::J => "J",
            CurveKind::Intensity => "intensity",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "K" => CurveKind::K,
            "g" => CurveKind::PairCorrelation,
            "F" => CurveKind::F,
            "G" => CurveKind::G,
            "J" => CurveKind::J,
            "intensity" => CurveKind::Intensity,
            other => return Err(Error::Parse(format!("unknown curve kind {other:?}"))),
        })
    }
}

/// Settings that produced a curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    /// Mean of the intensity `ρ̃` used for reweighting.
    pub intensity_mean: Option<f64>,
    pub bandwidth: Option<f64>,
    pub lattice_spacing: Option<f64>,
}

/// Values of a summary function on a strictly increasing grid. `None`
/// marks cells where the function is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCurve {
    pub kind: CurveKind,
    pub r: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub meta: CurveMeta,
}

impl SummaryCurve {
    pub fn new(kind: CurveKind, r: Vec<f64>, values: Vec<Option<f64>>, meta: CurveMeta) -> Self {
        debug_assert_eq!(r.len(), values.len());
        Self {
            kind,
            r,
            values,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Value at cell `i`, panicking on undefined cells.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i].expect("cell is defined")
    }

    /// Defined values as plain numbers, `NaN` elsewhere.
    pub fn dense(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
    }
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Default r-grid: 512 points from 0 to `0.2·|L|`.
pub fn default_rgrid(total_length: f64) -> Vec<f64> {
    linspace(0.0, 0.2 * total_length, 512)
}

/// Parses `"lo:hi:n"`.
pub fn parse_rgrid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Parse(format!("r-grid must look like lo:hi:n, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    let grid = linspace(lo, hi, n);
    check_grid(&grid)?;
    Ok(grid)
}

/// Nonempty, nonnegative and strictly increasing.
pub fn check_grid(r: &[f64]) -> Result<()> {
    if r.is_empty() {
        return Err(Error::InvalidParameter("empty r-grid".into()));
    }
    if r[0] < 0.0 || r.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "r-grid must be finite and nonnegative".into(),
        ));
    }
    if r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "r-grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}
