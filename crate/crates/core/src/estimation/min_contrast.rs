//! Minimum contrast estimation of `(σ², β)`.

use serde::{Deserialize, Serialize};

use super::{driving_intensity, FitResult};
use crate::error::{Error, Result};
use crate::network::PointPattern;
use crate::optim::NelderMead;
use crate::summaries::{
    default_bandwidth, g0, k_function, linspace, plug_in_intensity, Kernel, PairTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContrastTarget {
    K,
    G0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinContrastConfig {
    pub target: ContrastTarget,
    pub r_l: f64,
    /// Upper limit; `0.1·|L|` when unset.
    pub r_u: Option<f64>,
    pub p: f64,
    /// Start values `(σ²₀, β₀)`.
    pub start: (f64, f64),
    pub optimizer: NelderMead,
    /// Minimum number of grid points on `[r_l, r_u]`.
    pub grid_points: usize,
    /// Bandwidth for `ĝ`; the default rule when unset.
    pub bandwidth: Option<f64>,
    pub kernel: Kernel,
}

impl Default for MinContrastConfig {
    fn default() -> Self {
        Self {
            target: ContrastTarget::G0,
            r_l: 0.0,
            r_u: None,
            p: 1.0,
            start: (0.5, 0.5),
            optimizer: NelderMead::default(),
            grid_points: 512,
            bandwidth: None,
            kernel: Kernel::Epanechnikov,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContrastFit {
    pub sigma2: f64,
    pub beta: f64,
    /// Contrast at the optimum.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Bandwidth used for `ĝ`, if any.
    pub bandwidth: Option<f64>,
    pub r_l: f64,
    pub r_u: f64,
}

/// Trapezoid contrast `∫ (T̂^p - T^p)²` over the grid.
fn contrast(r: &[f64], empirical_p: &[f64], model_p: impl Fn(f64) -> f64) -> f64 {
    let mut prev = None;
    let mut total = 0.0;
    for (&x, &e) in r.iter().zip(empirical_p) {
        let d = e - model_p(x);
        let sq = d * d;
        if let Some((px, psq)) = prev {
            total += 0.5 * (x - px) * (sq + psq);
        }
        prev = Some((x, sq));
    }
    total
}

/// Minimises `∫_{r_l}^{r_u} (T̂(r)^p - T_{σ²,β}(r)^p)² dr` in
/// `(log σ², log β)` with the plug-in intensity.
pub fn min_contrast(
    pattern: &PointPattern,
    k: u32,
    cfg: &MinContrastConfig,
) -> Result<ContrastFit> {
    if pattern.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot fit an empty pattern".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let rho = plug_in_intensity(pattern);
    let table = PairTable::new(pattern, &rho)?;
    let r_u = cfg.r_u.unwrap_or(0.1 * pattern.network().total_length());
    let bandwidth = match cfg.target {
        ContrastTarget::G0 => Some(
            cfg.bandwidth
                .unwrap_or_else(|| default_bandwidth(table.intensity_mean())),
        ),
        ContrastTarget::K => None,
    };
    let mut n = cfg.grid_points.max(2);
    if let Some(b) = bandwidth {
        n = n.max(((r_u - cfg.r_l) / (0.25 * b)).ceil() as usize + 1);
    }
    let r = linspace(cfg.r_l, r_u, n);
    let empirical = match cfg.target {
        ContrastTarget::K => table.k_curve(&r)?,
        ContrastTarget::G0 => table.g_curve(&r, bandwidth.unwrap(), cfg.kernel)?,
    };
    let fit = fit_curve(&r, &empirical.dense(), cfg, k)?;
    Ok(ContrastFit { bandwidth, ..fit })
}

fn check_config(r: &[f64], cfg: &MinContrastConfig) -> Result<()> {
    if !(cfg.p > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "p must be positive, got {}",
            cfg.p
        )));
    }
    if !(cfg.r_l >= 0.0 && r.last().copied().unwrap_or(0.0) > cfg.r_l) {
        return Err(Error::InvalidParameter(format!(
            "need 0 <= r_l < r_u, got r_l = {}",
            cfg.r_l
        )));
    }
    if !(cfg.start.0 > 0.0 && cfg.start.1 > 0.0) {
        return Err(Error::InvalidParameter(
            "start values must be positive".into(),
        ));
    }
    Ok(())
}

/// Fits `(σ², β)` to a given empirical curve on `r`; `NaN` cells are
/// skipped.
pub(crate) fn fit_curve(
    r: &[f64],
    empirical: &[f64],
    cfg: &MinContrastConfig,
    k: u32,
) -> Result<ContrastFit> {
    check_config(r, cfg)?;
    let (r, emp_p): (Vec<f64>, Vec<f64>) = r
        .iter()
        .zip(empirical)
        .filter(|(_, v)| v.is_finite())
        .map(|(&x, &v)| (x, v.max(0.0).powf(cfg.p)))
        .unzip();
    if r.len() < 2 {
        return Err(Error::NoDefinedCells("contrast curve".into()));
    }
    let p = cfg.p;
    let target = cfg.target;
    let objective = |x: &[f64]| {
        let (s2, b) = (x[0].exp(), x[1].exp());
        match target {
            ContrastTarget::K => contrast(&r, &emp_p, |t| k_function(t, s2, b, k).powf(p)),
            ContrastTarget::G0 => contrast(&r, &emp_p, |t| g0(t, s2, b, k).powf(p)),
        }
    };
    let x0 = [cfg.start.0.ln(), cfg.start.1.ln()];
    let m = cfg.optimizer.minimize(objective, &x0);
    let (sigma2, beta) = (m.x[0].exp(), m.x[1].exp());
    if !m.value.is_finite()
        || !(sigma2 > 0.0 && sigma2.is_finite() && beta > 0.0 && beta.is_finite())
    {
        return Err(Error::NonConvergence(format!(
            "minimum contrast ended at sigma2 = {sigma2}, beta = {beta}, value = {}",
            m.value
        )));
    }
    Ok(ContrastFit {
        sigma2,
        beta,
        value: m.value,
        iterations: m.iterations,
        converged: m.converged,
        bandwidth: None,
        r_l: r[0],
        r_u: *r.last().unwrap(),
    })
}

/// Plug-in intensity followed by [`min_contrast`].
pub fn two_step_fit(pattern: &PointPattern, k: u32, cfg: &MinContrastConfig) -> Result<FitResult> {
    let rho = plug_in_intensity(pattern);
    let fit = min_contrast(pattern, k, cfg)?;
    let method = match cfg.target {
        ContrastTarget::K => "mce-k",
        ContrastTarget::G0 => "mce-g",
    };
    Ok(FitResult {
        method: method.into(),
        rho,
        sigma2: fit.sigma2,
        beta: fit.beta,
        k,
        rho_y: driving_intensity(&rho, fit.sigma2, k),
        objective: fit.value,
        converged: fit.converged,
        iterations: fit.iterations,
        on_boundary: false,
    })
}
