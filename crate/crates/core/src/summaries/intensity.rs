//! Intensity estimators: per-branch maximum likelihood and a diffusion
//! (heat kernel) smoother.

use super::{CurveKind, CurveMeta, SummaryCurve};
use crate::error::{Error, Result};
use crate::network::{Branch, PointPattern};
use crate::sim::IntensityModel;

/// `ρ̂_b = N_b / |L_b|` for the main and side branches.
pub fn fit_intensity_mle(pattern: &PointPattern) -> Result<IntensityModel> {
    let net = pattern.network();
    let mut rates = [0.0; 2];
    for (slot, branch) in [Branch::Main, Branch::Side].into_iter().enumerate() {
        let len = net.branch_length(branch);
        if len <= 0.0 {
            return Err(Error::ZeroMeasureBranch(branch.as_str()));
        }
        rates[slot] = pattern.count_on(branch) as f64 / len;
    }
    IntensityModel::new(rates[0], rates[1])
}

/// Like [`fit_intensity_mle`], but a branch of zero length borrows the rate
/// of the other one. Used wherever only values at network points matter.
pub fn plug_in_intensity(pattern: &PointPattern) -> IntensityModel {
    let net = pattern.network();
    let rate = |b: Branch| {
        let len = net.branch_length(b);
        (len > 0.0).then(|| pattern.count_on(b) as f64 / len)
    };
    match (rate(Branch::Main), rate(Branch::Side)) {
        (Some(m), Some(s)) => IntensityModel { main: m, side: s },
        (Some(m), None) => IntensityModel::homogeneous(m),
        (None, Some(s)) => IntensityModel::homogeneous(s),
        (None, None) => IntensityModel::homogeneous(0.0),
    }
}

/// Heat-kernel intensity estimate, one curve per edge with `r` holding the
/// node offsets.
#[derive(Debug, Clone)]
pub struct KernelIntensity {
    pub bandwidth: f64,
    pub spacing: f64,
    pub edges: Vec<SummaryCurve>,
}

impl KernelIntensity {
    /// `∫_L ρ̂` by the trapezoid rule on each edge.
    pub fn integral(&self) -> f64 {
        self.edges
            .iter()
            .map(|c| {
                c.r.windows(2)
                    .zip(c.values.windows(2))
                    .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0].unwrap() + v[1].unwrap()))
                    .sum::<f64>()
            })
            .sum()
    }
}

const TIME_STEPS: usize = 400;

/// Diffuses unit masses at the data points for time `b²/2` with a lumped
/// finite-element heat equation (implicit Euler, conjugate gradients).
/// Mass is conserved exactly; on a long segment the result approaches a
/// sum of Gaussians with standard deviation `b`.
pub fn kernel_intensity(
    pattern: &PointPattern,
    bandwidth: f64,
    spacing: Option<f64>,
) -> Result<KernelIntensity> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    let spacing = spacing.unwrap_or(bandwidth / 10.0);
    if !(spacing > 0.0) || spacing >= bandwidth {
        return Err(Error::InvalidParameter(format!(
            "grid spacing {spacing} must be positive and below the bandwidth {bandwidth}"
        )));
    }
    let net = pattern.network();
    let nv = net.num_vertices();

    // node numbering: vertices first, then interior nodes edge by edge
    let mut edge_nodes: Vec<Vec<usize>> = Vec::with_capacity(net.num_edges());
    let mut offsets: Vec<Vec<f64>> = Vec::with_capacity(net.num_edges());
    let mut next = nv;
    for e in net.edges() {
        let cells = (e.length / spacing).ceil().max(1.0) as usize;
        let h = e.length / cells as f64;
        let mut nodes = vec![e.from];
        nodes.extend(next..next + cells - 1);
        nodes.push(e.to);
        next += cells - 1;
        edge_nodes.push(nodes);
        offsets.push((0..=cells).map(|i| i as f64 * h).collect());
    }
    let n = next;

    let mut mass = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut links: Vec<(usize, usize, f64)> = Vec::new();
    for (nodes, off) in edge_nodes.iter().zip(&offsets) {
        for c in 0..nodes.len() - 1 {
            let h = off[c + 1] - off[c];
            let (a, b) = (nodes[c], nodes[c + 1]);
            mass[a] += 0.5 * h;
            mass[b] += 0.5 * h;
            diag[a] += 1.0 / h;
            diag[b] += 1.0 / h;
            links.push((a, b, 1.0 / h));
        }
    }

    let mut load = vec![0.0; n];
    for p in pattern.points() {
        let nodes = &edge_nodes[p.edge];
        let off = &offsets[p.edge];
        let cells = nodes.len() - 1;
        let h = off[1];
        let c = ((p.offset / h).floor() as usize).min(cells - 1);
        let t = ((p.offset - off[c]) / h).clamp(0.0, 1.0);
        load[nodes[c]] += 1.0 - t;
        load[nodes[c + 1]] += t;
    }
    let mut u: Vec<f64> = load.iter().zip(&mass).map(|(l, m)| l / m).collect();

    let dt = 0.5 * bandwidth * bandwidth / TIME_STEPS as f64;
    // A = M + dt K
    let a_diag: Vec<f64> = mass.iter().zip(&diag).map(|(m, d)| m + dt * d).collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        for i in 0..x.len() {
            out[i] = a_diag[i] * x[i];
        }
        for &(a, b, w) in &links {
            out[a] -= dt * w * x[b];
            out[b] -= dt * w * x[a];
        }
    };
    let mut rhs = vec![0.0; n];
    for _ in 0..TIME_STEPS {
        for i in 0..n {
            rhs[i] = mass[i] * u[i];
        }
        conjugate_gradient(&apply, &a_diag, &rhs, &mut u)?;
    }

    let edges = edge_nodes
        .iter()
        .zip(offsets)
        .map(|(nodes, off)| {
            let values = nodes.iter().map(|&i| Some(u[i])).collect();
            SummaryCurve::new(
                CurveKind::Intensity,
                off,
                values,
                CurveMeta {
                    bandwidth: Some(bandwidth),
                    lattice_spacing: Some(spacing),
                    ..Default::default()
                },
            )
        })
        .collect();
    Ok(KernelIntensity {
        bandwidth,
        spacing,
        edges,
    })
}

/// Jacobi-preconditioned CG for a symmetric positive definite operator,
/// warm-started from `x`.
fn conjugate_gradient(
    apply: &impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
) -> Result<()> {
    let n = b.len();
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let norm_b = b
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..10 * n + 100 {
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= 1e-13 * norm_b {
            return Ok(());
        }
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence(
        "conjugate gradient in kernel intensity".into(),
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::network::test_nets::*;

    fn pattern(net: crate::LinearNetwork, pts: &[(usize, f64)]) -> PointPattern {
        let net = Arc::new(net);
        let pts = pts.iter().map(|&(e, o)| net.point(e, o).unwrap()).collect();
        PointPattern::new(net, pts).unwrap()
    }

    #[test]
    fn mle_per_branch() {
        let net = crate::LinearNetwork::new(
            vertices(3),
            vec![
                spec(0, 0, 1, 10.0, Branch::Main),
                spec(1, 1, 2, 20.0, Branch::Side),
            ],
        )
        .unwrap();
        let x = pattern(net, &[(0, 1.0), (0, 2.0), (1, 3.0)]);
        let m = fit_intensity_mle(&x).unwrap();
        assert_eq!(m.main, 0.2);
        assert_eq!(m.side, 0.05);
    }

    #[test]
    fn mle_rejects_missing_branch() {
        let x = pattern(segment(10.0), &[(0, 1.0)]);
        assert!(matches!(
            fit_intensity_mle(&x),
            Err(Error::ZeroMeasureBranch(_))
        ));
        assert_eq!(plug_in_intensity(&x).side, 0.1);
    }

    #[test]
    fn gaussian_on_long_segment() {
        let b = 10.0;
        let x = pattern(segment(200.0), &[(0, 100.0)]);
        let est = kernel_intensity(&x, b, None).unwrap();
        let curve = &est.edges[0];
        let peak = 1.0 / (b * (2.0 * std::f64::consts::PI).sqrt());
        let worst = curve
            .r
            .iter()
            .zip(&curve.values)
            .map(|(&t, v)| {
                let z = (t - 100.0) / b;
                (v.unwrap() - peak * (-0.5 * z * z).exp()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 0.02 * peak, "sup error {worst} vs peak {peak}");
        assert!((est.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mass_conserved_on_tree() {
        let x = pattern(y_tree(), &[(0, 0.2), (1, 3.9), (2, 2.5), (2, 0.0)]);
        let est = kernel_intensity(&x, 2.0, None).unwrap();
        assert!((est.integral() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_coarse_grid() {
        let x = pattern(segment(10.0), &[(0, 1.0)]);
        assert!(kernel_intensity(&x, 1.0, Some(1.0)).is_err());
        assert!(kernel_intensity(&x, 0.0, None).is_err());
    }
}
