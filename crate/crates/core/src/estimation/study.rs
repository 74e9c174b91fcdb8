//! Seeded replicate experiments: simulate from the Cox model, refit.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cl2::{fit_problem, Cl2Problem};
use super::min_contrast::min_contrast;
use super::{Cl2Config, ContrastTarget, MinContrastConfig, SearchStrategy, WeightKind};
use crate::error::{Error, Result};
use crate::network::LinearNetwork;
use crate::rng::derive_seed;
use crate::sim::{simulate_cox, CoxMode, CoxModel, IntensityModel};
use crate::summaries::{default_bandwidth, plug_in_intensity};

/// Estimates above these are counted as truncated.
const SIGMA2_CAP: f64 = 15.0;
const BETA_CAP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    #[serde(rename = "mce-g")]
    MceG,
    #[serde(rename = "mce-k")]
    MceK,
    #[serde(rename = "cl2-indicator")]
    Cl2Indicator,
    #[serde(rename = "cl2-smooth")]
    Cl2Smooth,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::MceG => "mce-g",
            Estimator::MceK => "mce-k",
            Estimator::Cl2Indicator => "cl2-indicator",
            Estimator::Cl2Smooth => "cl2-smooth",
        }
    }
}

fn default_methods() -> Vec<Estimator> {
    vec![Estimator::MceG, Estimator::MceK]
}
fn default_k() -> u32 {
    1
}
fn default_p_g() -> f64 {
    1.0
}
fn default_p_k() -> f64 {
    0.25
}
fn default_start() -> (f64, f64) {
    (0.5, 0.5)
}
fn default_eps() -> f64 {
    0.05
}
fn default_samples() -> usize {
    1000
}

/// One row of a study design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyRun {
    pub id: u32,
    pub sigma2: f64,
    pub beta: f64,
    /// Driving intensity `(ρ_{Y,m}, ρ_{Y,s})`.
    pub rho_y: (f64, f64),
    #[serde(default = "default_k")]
    pub k: u32,
    #[serde(default = "default_methods")]
    pub methods: Vec<Estimator>,
    /// Contrast exponent for MCE-g.
    #[serde(default = "default_p_g")]
    pub p_g: f64,
    /// Contrast exponent for MCE-K.
    #[serde(default = "default_p_k")]
    pub p_k: f64,
    #[serde(default)]
    pub r_l: f64,
    /// When set, `r_l` is this multiple of the `ĝ` bandwidth.
    #[serde(default)]
    pub r_l_bandwidths: Option<f64>,
    pub r_u: f64,
    #[serde(default = "default_start")]
    pub start: (f64, f64),
    /// Grid spacing of the retention field; exact mode when unset.
    #[serde(default)]
    pub grid_spacing: Option<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_samples")]
    pub cl2_samples: usize,
}

impl StudyRun {
    /// A run with the reference tuning: `p = 1 (0.25)`, `r_l = 0`,
    /// start `(0.5, 0.5)`.
    pub fn new(id: u32, sigma2: f64, beta: f64, rho_y: (f64, f64), r_u: f64) -> Self {
        Self {
            id,
            sigma2,
            beta,
            rho_y,
            k: 1,
            methods: default_methods(),
            p_g: 1.0,
            p_k: 0.25,
            r_l: 0.0,
            r_l_bandwidths: None,
            r_u,
            start: (0.5, 0.5),
            grid_spacing: None,
            eps: 0.05,
            cl2_samples: 1000,
        }
    }

    fn model(&self) -> Result<CoxModel> {
        CoxModel::new(
            IntensityModel::new(self.rho_y.0, self.rho_y.1)?,
            self.sigma2,
            self.beta,
            self.k,
        )
    }
}

/// A list of runs, read from TOML:
///
/// ```toml
/// [[run]]
/// id = 1
/// sigma2 = 5.0
/// beta = 0.1
/// rho_y = [0.8, 1.2]
/// r_u = 30.0
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationDesign {
    #[serde(rename = "run", default)]
    pub runs: Vec<StudyRun>,
}

impl SimulationDesign {
    pub fn from_toml(text: &str) -> Result<Self> {
        let d: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        for r in &d.runs {
            r.model()?;
            if r.methods.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "run {} has no methods",
                    r.id
                )));
            }
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub run: u32,
    pub replicate: usize,
    pub method: Estimator,
    /// `NaN` when the fit failed.
    pub sigma2_hat: f64,
    pub beta_hat: f64,
    pub converged: bool,
}

/// Per run and method: failures, truncation counts and medians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: u32,
    pub method: Estimator,
    pub replicates: usize,
    pub failures: usize,
    pub sigma2_above_cap: usize,
    pub beta_above_cap: usize,
    pub median_sigma2: f64,
    pub median_beta: f64,
    pub iqr_sigma2: f64,
    pub iqr_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    pub summaries: Vec<RunSummary>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn summarise(run: u32, method: Estimator, rows: &[&StudyRow]) -> RunSummary {
    let ok: Vec<&&StudyRow> = rows.iter().filter(|r| r.sigma2_hat.is_finite()).collect();
    let mut s: Vec<f64> = ok.iter().map(|r| r.sigma2_hat).collect();
    let mut b: Vec<f64> = ok.iter().map(|r| r.beta_hat).collect();
    s.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    RunSummary {
        run,
        method,
        replicates: rows.len(),
        failures: rows.len() - ok.len(),
        sigma2_above_cap: s.iter().filter(|&&v| v > SIGMA2_CAP).count(),
        beta_above_cap: b.iter().filter(|&&v| v > BETA_CAP).count(),
        median_sigma2: quantile(&s, 0.5),
        median_beta: quantile(&b, 0.5),
        iqr_sigma2: quantile(&s, 0.75) - quantile(&s, 0.25),
        iqr_beta: quantile(&b, 0.75) - quantile(&b, 0.25),
    }
}

fn fit_one(
    run: &StudyRun,
    method: Estimator,
    pattern: &crate::PointPattern,
    seed: u64,
) -> Result<(f64, f64, bool)> {
    match method {
        Estimator::MceG | Estimator::MceK => {
            let (target, p) = match method {
                Estimator::MceG => (ContrastTarget::G0, run.p_g),
                _ => (ContrastTarget::K, run.p_k),
            };
            let r_l = match run.r_l_bandwidths {
                Some(m) => {
                    let rho = plug_in_intensity(pattern);
                    use crate::sim::Intensity;
                    m * default_bandwidth(rho.mean(pattern.network()))
                }
                None => run.r_l,
            };
            let cfg = MinContrastConfig {
                target,
                p,
                r_l,
                r_u: Some(run.r_u),
                start: run.start,
                ..Default::default()
            };
            let f = min_contrast(pattern, run.k, &cfg)?;
            Ok((f.sigma2, f.beta, f.converged))
        }
        Estimator::Cl2Indicator | Estimator::Cl2Smooth => {
            let weight = match method {
                Estimator::Cl2Indicator => WeightKind::AdaptiveIndicator { eps: run.eps },
                _ => WeightKind::AdaptiveSmooth { eps: run.eps },
            };
            let cfg = Cl2Config {
                weight,
                samples: run.cl2_samples,
                seed,
                search: SearchStrategy::DerivativeFree { start: run.start },
                ..Default::default()
            };
            let problem = Cl2Problem::new(pattern, run.k, &cfg)?;
            let f = fit_problem(&problem, &cfg)?;
            Ok((f.sigma2, f.beta, f.converged))
        }
    }
}

/// Runs every design row for `replicates` replicates. Replicate `i` of run
/// `id` uses a seed derived from `(seed, id, i)` only, so the table does
/// not depend on the thread count. Failed fits are kept as `NaN` rows.
pub fn simulation_study(
    net: &Arc<LinearNetwork>,
    design: &SimulationDesign,
    replicates: usize,
    seed: u64,
) -> Result<StudyTable> {
    let mut table = StudyTable::default();
    for run in &design.runs {
        let model = run.model()?;
        let mode = match run.grid_spacing {
            Some(spacing) => CoxMode::Grid { spacing },
            None => CoxMode::Exact,
        };
        let run_seed = derive_seed(seed, run.id as u64);
        let rows: Vec<Result<Vec<StudyRow>>> = (0..replicates)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = derive_seed(run_seed, rep as u64);
                let sim = simulate_cox(net, &model, mode, rep_seed)?;
                Ok(run
                    .methods
                    .iter()
                    .map(|&method| {
                        let fit = fit_one(run, method, &sim.pattern, derive_seed(rep_seed, 1));
                        let (s, b, c) = match fit {
                            Ok(v) => v,
                            Err(e) => {
                                log::debug!(
                                    "run {} replicate {rep} {}: {e}",
                                    run.id,
                                    method.name()
                                );
                                (f64::NAN, f64::NAN, false)
                            }
                        };
                        StudyRow {
                            run: run.id,
                            replicate: rep,
                            method,
                            sigma2_hat: s,
                            beta_hat: b,
                            converged: c,
                        }
                    })
                    .collect())
            })
            .collect();
        let start = table.rows.len();
        for r in rows {
            table.rows.extend(r?);
        }
        for &method in &run.methods {
            let mine: Vec<&StudyRow> = table.rows[start..]
                .iter()
                .filter(|r| r.method == method)
                .collect();
            table.summaries.push(summarise(run.id, method, &mine));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::test_nets::*;

    #[test]
    fn parses_design() {
        let d = SimulationDesign::from_toml(
            r#"
            [[run]]
            id = 1
            sigma2 = 5.0
            beta = 0.1
            rho_y = [0.8, 1.2]
            r_u = 30.0

            [[run]]
            id = 13
            sigma2 = 5.0
            beta = 0.1
            rho_y = [0.8, 1.2]
            r_l_bandwidths = 2.0
            r_u = 30.0
            methods = ["mce-g", "cl2-smooth"]
            "#,
        )
        .unwrap();
        assert_eq!(d.runs.len(), 2);
        assert_eq!(d.runs[0], StudyRun::new(1, 5.0, 0.1, (0.8, 1.2), 30.0));
        assert_eq!(
            d.runs[1].methods,
            vec![Estimator::MceG, Estimator::Cl2Smooth]
        );
        assert!(SimulationDesign::from_toml(
            "[[run]]\nid = 1\nsigma2 = -1.0\nbeta = 0.1\nrho_y = [1.0, 1.0]\nr_u = 3.0"
        )
        .is_err());
        assert!(SimulationDesign::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn zero_replicates_is_empty() {
        let net = Arc::new(y_tree());
        let d = SimulationDesign {
            runs: vec![StudyRun::new(1, 5.0, 0.1, (1.0, 1.0), 3.0)],
        };
        let t = simulation_study(&net, &d, 0, 1).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.summaries[0].replicates, 0);
    }

    #[test]
    fn deterministic_in_seed() {
        let net = Arc::new(segment(80.0));
        let d = SimulationDesign {
            runs: vec![StudyRun::new(1, 2.0, 0.2, (1.0, 1.0), 8.0)],
        };
        let a = simulation_study(&net, &d, 4, 9).unwrap();
        let b = simulation_study(&net, &d, 4, 9).unwrap();
        assert_eq!(a.rows.len(), 8);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.sigma2_hat.to_bits(), y.sigma2_hat.to_bits());
            assert_eq!(x.beta_hat.to_bits(), y.beta_hat.to_bits());
        }
    }

    #[test]
    fn quantiles() {
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert!(quantile(&[], 0.5).is_nan());
    }
}
