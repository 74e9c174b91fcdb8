//! Second-order composite likelihood with Monte Carlo integration of the
//! double integral over the network.

use rand::Rng;
use rayon::prelude::*;

use super::{driving_intensity, FitResult};
use crate::error::{Error, Result};
use crate::network::{LinearNetwork, PointPattern};
use crate::optim::NelderMead;
use crate::rng;
use crate::sim::{Intensity, IntensityModel};
use crate::summaries::{g0, g0_gradient, plug_in_intensity};

/// Pair weight `w(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// `1{d ≤ r₀}`.
    Fixed { r0: f64 },
    /// `1{|g - 1| / M > ε}` with `M = |g₀(0) - 1|`.
    AdaptiveIndicator { eps: f64 },
    /// `exp(1 / (h² - 1))` for `|h| < 1`, `h = εM / (g - 1)`.
    AdaptiveSmooth { eps: f64 },
}

/// The smooth bump `exp(1 / (h² - 1))` on `(-1, 1)`, zero elsewhere.
pub fn smooth_weight(h: f64) -> f64 {
    if h.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (h * h - 1.0)).exp()
    }
}

impl WeightKind {
    fn validate(&self) -> Result<()> {
        match *self {
            WeightKind::Fixed { r0 } if !(r0 > 0.0) => Err(Error::InvalidParameter(format!(
                "r0 must be positive, got {r0}"
            ))),
            WeightKind::AdaptiveIndicator { eps } | WeightKind::AdaptiveSmooth { eps }
                if !(eps > 0.0 && eps < 1.0) =>
            {
                Err(Error::InvalidParameter(format!(
                    "epsilon must lie in (0, 1), got {eps}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Weight at distance `d` given `g(d)` and `M`.
    pub fn eval(&self, d: f64, g: f64, m: f64) -> f64 {
        match *self {
            WeightKind::Fixed { r0 } => (d <= r0) as u8 as f64,
            WeightKind::AdaptiveIndicator { eps } => ((g - 1.0).abs() > eps * m) as u8 as f64,
            WeightKind::AdaptiveSmooth { eps } => {
                if g == 1.0 {
                    0.0
                } else {
                    smooth_weight(eps * m / (g - 1.0))
                }
            }
        }
    }

    /// Distance beyond which the weight vanishes.
    fn support(&self, sigma2: f64, beta: f64, k: u32) -> f64 {
        match *self {
            WeightKind::Fixed { r0 } => r0,
            WeightKind::AdaptiveIndicator { eps } | WeightKind::AdaptiveSmooth { eps } => {
                // g(d) - 1 = εM  ⇔  α e^{-2βd} = 1 - (1 + εM)^{-2/k}
                let a = sigma2 / (1.0 + sigma2);
                let alpha = a * a;
                let m = g0(0.0, sigma2, beta, k) - 1.0;
                let target = 1.0 - (1.0 + eps * m).powf(-2.0 / k as f64);
                if !(target > 0.0) || !(alpha > 0.0) {
                    return 0.0;
                }
                (alpha / target).ln().max(0.0) / (2.0 * beta)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchStrategy {
    /// Minimise the score norm over an `n × n` grid on the given bounds.
    Grid {
        n: usize,
        sigma2: (f64, f64),
        beta: (f64, f64),
    },
    /// Nelder–Mead on the score norm in log-parameters.
    DerivativeFree { start: (f64, f64) },
}

/// What the search optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Cl2Objective {
    /// Minimise the length of the score.
    #[default]
    ScoreNorm,
    /// Maximise the log composite likelihood. Only sensible with a fixed
    /// weight: adaptive supports shrink to nothing as `β` grows.
    Likelihood,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cl2Config {
    pub weight: WeightKind,
    /// Monte Carlo samples per pair of segments.
    pub samples: usize,
    pub seed: u64,
    pub search: SearchStrategy,
    pub objective: Cl2Objective,
    pub optimizer: NelderMead,
}

impl Default for Cl2Config {
    fn default() -> Self {
        Self {
            weight: WeightKind::AdaptiveIndicator { eps: 0.05 },
            samples: 1000,
            seed: 0,
            search: SearchStrategy::DerivativeFree { start: (0.5, 0.5) },
            objective: Cl2Objective::ScoreNorm,
            optimizer: NelderMead::default(),
        }
    }
}

/// Weighted distance samples approximating `∫_L ∫_L ρ(u) ρ(v) f₀(d(u, v))`
/// on a tree, sorted by distance.
#[derive(Debug, Clone)]
pub struct DistanceSample {
    dists: Vec<f64>,
    weights: Vec<f64>,
}

impl DistanceSample {
    /// `edge_factor[i]` multiplies everything on edge `i` (the intensity).
    pub fn new(
        net: &LinearNetwork,
        edge_factor: &[f64],
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if !net.is_tree() {
            return Err(Error::NotATree);
        }
        if samples == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be at least 1".into(),
            ));
        }
        let edges = net.edges();
        let mut rng = rng::rng(seed);
        let n = samples as f64;
        let mut pairs: Vec<(f64, f64)> =
            Vec::with_capacity(edges.len() * (edges.len() + 1) / 2 * samples);
        for i in 0..edges.len() {
            let li = edges[i].length;
            for j in i..edges.len() {
                let lj = edges[j].length;
                let mut w = edge_factor[i] * edge_factor[j] * li * lj / n;
                if w == 0.0 {
                    continue;
                }
                if i == j {
                    for _ in 0..samples {
                        let x: f64 = rng.random::<f64>() * li;
                        let y: f64 = rng.random::<f64>() * li;
                        pairs.push(((x - y).abs(), w));
                    }
                } else {
                    w *= 2.0;
                    let (a, b) = (&edges[i], &edges[j]);
                    let gap = [
                        (a.from, b.from),
                        (a.from, b.to),
                        (a.to, b.from),
                        (a.to, b.to),
                    ]
                    .iter()
                    .map(|&(p, q)| net.vertex_distance(p, q))
                    .fold(f64::INFINITY, f64::min);
                    for _ in 0..samples {
                        let x: f64 = rng.random::<f64>() * li;
                        let y: f64 = rng.random::<f64>() * lj;
                        pairs.push((gap + x + y, w));
                    }
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            dists: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    /// `Σ w_s f₀(d_s)`.
    pub fn integrate(&self, f0: impl Fn(f64) -> f64) -> f64 {
        self.integrate_below(f64::INFINITY, f0)
    }

    /// As [`integrate`](Self::integrate) for an `f₀` vanishing beyond `cutoff`.
    pub fn integrate_below(&self, cutoff: f64, f0: impl Fn(f64) -> f64) -> f64 {
        let end = self.dists.partition_point(|&d| d <= cutoff);
        self.dists[..end]
            .iter()
            .zip(&self.weights[..end])
            .map(|(&d, &w)| w * f0(d))
            .sum()
    }
}

/// Monte Carlo estimate of `∫_L ∫_L f₀(d_L(u, v)) du dv` on a tree.
pub fn mc_double_integral(
    net: &LinearNetwork,
    f0: impl Fn(f64) -> f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let ones = vec![1.0; net.num_edges()];
    Ok(DistanceSample::new(net, &ones, samples, seed)?.integrate(f0))
}

/// Monte Carlo estimate of one segment-pair term: `∫₀^{a}∫₀^{b} f₀(gap + x + y)`
/// for distinct segments, or `∫₀^{a}∫₀^{a} f₀(|x - y|)` when `gap` is `None`.
pub fn pair_integral(
    a: f64,
    b: f64,
    gap: Option<f64>,
    f0: impl Fn(f64) -> f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let mut rng = rng::rng(seed);
    let mut sum = 0.0;
    for _ in 0..samples {
        let x: f64 = rng.random::<f64>() * a;
        match gap {
            Some(g) => {
                let y: f64 = rng.random::<f64>() * b;
                sum += f0(g + x + y);
            }
            None => {
                let y: f64 = rng.random::<f64>() * a;
                sum += f0((x - y).abs());
            }
        }
    }
    let area = if gap.is_some() { a * b } else { a * a };
    area * sum / samples as f64
}

/// Data and Monte Carlo sample for repeated score evaluations. The sample
/// is drawn once, so the score and the likelihood are smooth in the
/// parameters.
#[derive(Debug, Clone)]
pub struct Cl2Problem {
    k: u32,
    weight: WeightKind,
    /// Unordered data pairs: distance and `log(ρ̂(u) ρ̂(v))`.
    pairs: Vec<(f64, f64)>,
    sample: DistanceSample,
    rho: IntensityModel,
}

impl Cl2Problem {
    pub fn new(pattern: &PointPattern, k: u32, cfg: &Cl2Config) -> Result<Self> {
        cfg.weight.validate()?;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let net = pattern.network();
        let rho = plug_in_intensity(pattern);
        let pts = pattern.points();
        let log_rho: Vec<f64> = pts.iter().map(|p| rho.at(net, p).ln()).collect();
        let mut pairs = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                pairs.push((net.distance(&pts[i], &pts[j]), log_rho[i] + log_rho[j]));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let factor: Vec<f64> = net.edges().iter().map(|e| rho.on(e.branch)).collect();
        let sample = DistanceSample::new(net, &factor, cfg.samples, cfg.seed)?;
        Ok(Self {
            k,
            weight: cfg.weight,
            pairs,
            sample,
            rho,
        })
    }

    pub fn intensity(&self) -> IntensityModel {
        self.rho
    }

    /// `∇CL(σ², β)`.
    pub fn score(&self, sigma2: f64, beta: f64) -> Result<[f64; 2]> {
        let k = self.k;
        let m = g0(0.0, sigma2, beta, k) - 1.0;
        let cutoff = self.weight.support(sigma2, beta, k);
        let end = self.pairs.partition_point(|p| p.0 <= cutoff);
        let mut informative = false;
        let mut s = [0.0; 2];
        for &(d, _) in &self.pairs[..end] {
            let (g, ds, db) = g0_gradient(d, sigma2, beta, k);
            let w = self.weight.eval(d, g, m);
            if w > 0.0 {
                informative = true;
                s[0] += 2.0 * w * ds / g;
                s[1] += 2.0 * w * db / g;
            }
        }
        if !informative {
            return Err(Error::InvalidParameter(
                "weight vanishes on every data pair".into(),
            ));
        }
        let weight = self.weight;
        let i0 = self.sample.integrate_below(cutoff, |d| {
            let (g, ds, _) = g0_gradient(d, sigma2, beta, k);
            weight.eval(d, g, m) * ds
        });
        let i1 = self.sample.integrate_below(cutoff, |d| {
            let (g, _, db) = g0_gradient(d, sigma2, beta, k);
            weight.eval(d, g, m) * db
        });
        Ok([s[0] - i0, s[1] - i1])
    }

    /// Log composite likelihood `CL(σ², β)`.
    pub fn log_likelihood(&self, sigma2: f64, beta: f64) -> f64 {
        let k = self.k;
        let m = g0(0.0, sigma2, beta, k) - 1.0;
        let cutoff = self.weight.support(sigma2, beta, k);
        let end = self.pairs.partition_point(|p| p.0 <= cutoff);
        let mut total = 0.0;
        for &(d, log_rr) in &self.pairs[..end] {
            let g = g0(d, sigma2, beta, k);
            total += 2.0 * self.weight.eval(d, g, m) * (log_rr + g.ln());
        }
        let weight = self.weight;
        total
            - self.sample.integrate_below(cutoff, |d| {
                let g = g0(d, sigma2, beta, k);
                weight.eval(d, g, m) * g
            })
    }

    fn score_norm(&self, sigma2: f64, beta: f64) -> f64 {
        match self.score(sigma2, beta) {
            Ok([a, b]) => a.hypot(b),
            Err(_) => f64::INFINITY,
        }
    }

    fn objective(&self, objective: Cl2Objective, sigma2: f64, beta: f64) -> f64 {
        match objective {
            Cl2Objective::ScoreNorm => self.score_norm(sigma2, beta),
            Cl2Objective::Likelihood => {
                let v = -self.log_likelihood(sigma2, beta);
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// Score of the composite likelihood at `(σ², β)`.
pub fn cl2_score(
    pattern: &PointPattern,
    sigma2: f64,
    beta: f64,
    k: u32,
    cfg: &Cl2Config,
) -> Result<[f64; 2]> {
    Cl2Problem::new(pattern, k, cfg)?.score(sigma2, beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cl2Fit {
    pub sigma2: f64,
    pub beta: f64,
    pub score_norm: f64,
    /// Grid search only: the minimum sits on the edge of the grid.
    pub on_boundary: bool,
    pub converged: bool,
    pub evaluations: usize,
}

impl Cl2Fit {
    pub fn into_result(self, rho: IntensityModel, k: u32) -> FitResult {
        FitResult {
            method: "cl2".into(),
            rho,
            sigma2: self.sigma2,
            beta: self.beta,
            k,
            rho_y: driving_intensity(&rho, self.sigma2, k),
            objective: self.score_norm,
            converged: self.converged,
            iterations: self.evaluations,
            on_boundary: self.on_boundary,
        }
    }
}

/// Estimates `(σ², β)` by minimising the length of the score, or by
/// maximising the composite likelihood (see [`Cl2Objective`]).
pub fn cl2_fit(pattern: &PointPattern, k: u32, cfg: &Cl2Config) -> Result<Cl2Fit> {
    let problem = Cl2Problem::new(pattern, k, cfg)?;
    fit_problem(&problem, cfg)
}

pub(crate) fn fit_problem(problem: &Cl2Problem, cfg: &Cl2Config) -> Result<Cl2Fit> {
    match cfg.search {
        SearchStrategy::Grid { n, sigma2, beta } => {
            if n < 2 || !(sigma2.0 > 0.0 && sigma2.1 > sigma2.0 && beta.0 > 0.0 && beta.1 > beta.0)
            {
                return Err(Error::InvalidParameter(
                    "grid needs n >= 2 and positive increasing bounds".into(),
                ));
            }
            let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let norms: Vec<f64> = (0..n * n)
                .into_par_iter()
                .map(|c| {
                    problem.objective(
                        cfg.objective,
                        at(sigma2.0, sigma2.1, c / n),
                        at(beta.0, beta.1, c % n),
                    )
                })
                .collect();
            let (best, &value) = norms
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            if !value.is_finite() {
                return Err(Error::NonConvergence(
                    "objective undefined on the whole grid".into(),
                ));
            }
            let (i, j) = (best / n, best % n);
            let edge = |x: usize| x == 0 || x == n - 1;
            let (s2, b) = (at(sigma2.0, sigma2.1, i), at(beta.0, beta.1, j));
            Ok(Cl2Fit {
                sigma2: s2,
                beta: b,
                score_norm: problem.score_norm(s2, b),
                on_boundary: edge(i) || edge(j),
                converged: true,
                evaluations: n * n,
            })
        }
        SearchStrategy::DerivativeFree { start } => {
            if !(start.0 > 0.0 && start.1 > 0.0) {
                return Err(Error::InvalidParameter(
                    "start values must be positive".into(),
                ));
            }
            let m = cfg.optimizer.minimize(
                |x| problem.objective(cfg.objective, x[0].exp(), x[1].exp()),
                &[start.0.ln(), start.1.ln()],
            );
            if !m.value.is_finite() {
                return Err(Error::NonConvergence(
                    "composite likelihood objective undefined along the search".into(),
                ));
            }
            let (s2, b) = (m.x[0].exp(), m.x[1].exp());
            Ok(Cl2Fit {
                sigma2: s2,
                beta: b,
                score_norm: problem.score_norm(s2, b),
                on_boundary: false,
                converged: m.converged,
                evaluations: m.iterations,
            })
        }
    }
}
