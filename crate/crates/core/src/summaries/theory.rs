//! Pair correlation and K-function of the thinned Cox process with
//! exponential correlation.
//!
//! With `α = (1 + 1/σ²)^{-2}` the pair correlation is
//! `g₀(t) = (1 - α e^{-2βt})^{-k/2}` and `K(r) = ∫₀ʳ g₀`. For `k ≤ 5` the
//! integral has closed forms, written here in terms of
//! `s = √(1 - α e^{-2βr})` and `s₁ = √(1 - α)` so that nothing overflows
//! for large `βr`.

use crate::quad;
use crate::sim::CoxModel;

fn alpha(sigma2: f64) -> f64 {
    let a = sigma2 / (1.0 + sigma2);
    a * a
}

/// `g₀(t)` for parameters `(σ², β, k)`.
pub fn g0(t: f64, sigma2: f64, beta: f64, k: u32) -> f64 {
    let x = alpha(sigma2) * (-2.0 * beta * t).exp();
    (-0.5 * k as f64 * (-x).ln_1p()).exp()
}

/// `g₀(t)` and its partial derivatives with respect to `σ²` and `β`.
pub fn g0_gradient(t: f64, sigma2: f64, beta: f64, k: u32) -> (f64, f64, f64) {
    let a = sigma2 / (1.0 + sigma2);
    let al = a * a;
    let u = (-2.0 * beta * t).exp();
    let q = 1.0 - al * u;
    let g = (-0.5 * k as f64 * q.ln()).exp();
    let kf = k as f64;
    let dalpha = 2.0 * a / ((1.0 + sigma2) * (1.0 + sigma2));
    let dlog_sigma2 = 0.5 * kf * u * dalpha / q;
    let dlog_beta = -kf * t * al * u / q;
    (g, g * dlog_sigma2, g * dlog_beta)
}

pub fn g0_theoretical(t: f64, model: &CoxModel) -> f64 {
    g0(t, model.sigma2, model.beta, model.k)
}

/// `K(r) = ∫₀ʳ g₀(t) dt`: closed form for `k ≤ 5`, quadrature otherwise
/// or when `βr` is so small that the closed form cancels badly.
pub fn k_function(r: f64, sigma2: f64, beta: f64, k: u32) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    match k_closed_form(r, sigma2, beta, k) {
        Some(v) if beta * r >= 1e-4 => v,
        _ => quad::integrate(|t| g0(t, sigma2, beta, k), 0.0, r, 1e-14, 1e-13),
    }
}

/// Closed form of `K(r)` for `1 ≤ k ≤ 5`.
pub fn k_closed_form(r: f64, sigma2: f64, beta: f64, k: u32) -> Option<f64> {
    if !(1..=5).contains(&k) {
        return None;
    }
    let al = alpha(sigma2);
    let u = (-2.0 * beta * r).exp();
    let s = (1.0 - al * u).sqrt();
    let s1 = (1.0 - al).sqrt();
    let log_ratio = ((1.0 + s) / (1.0 + s1)).ln();
    let correction = match k {
        1 => log_ratio,
        2 => 0.5 * ((1.0 - al * u) / (1.0 - al)).ln(),
        3 => log_ratio + 1.0 / s1 - 1.0 / s,
        4 => {
            let q = 1.0 - al * u;
            0.5 * ((q / (1.0 - al)).ln() + al / (1.0 - al) - al * u / q)
        }
        _ => log_ratio + (al * u - 4.0 / 3.0) / (s * s * s) + (4.0 / 3.0 - al) / (s1 * s1 * s1),
    };
    Some(r + correction / beta)
}

pub fn k_theoretical(r: f64, model: &CoxModel) -> f64 {
    k_function(r, model.sigma2, model.beta, model.k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g0_values() {
        assert!((g0(0.0, 1.0, 0.5, 1) - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let expected = (4.0 / (4.0 - (-1.0f64).exp())).sqrt();
        assert!((g0(1.0, 1.0, 0.5, 1) - expected).abs() < 1e-12);
        assert!((expected - 1.049422).abs() < 1e-6);
        assert!((g0(3.0, 1e-12, 0.5, 3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_value_k2() {
        let v = k_function(1.0, 1.0, 1.0, 2);
        let expected = 0.5 * ((1.0f64.exp().powi(2) - 0.25) / 0.75).ln();
        assert!((v - expected).abs() < 1e-13);
        // independent adaptive quadrature of g₀ over [0, 1]
        assert!((v - 1.126_631_320_517_445_6).abs() < 1e-12);
    }

    #[test]
    fn k_is_zero_at_origin_and_at_least_r() {
        for k in 1..=7 {
            assert_eq!(k_function(0.0, 2.0, 0.3, k), 0.0);
            let mut last = 0.0;
            for i in 1..50 {
                let r = i as f64;
                let v = k_function(r, 2.0, 0.3, k);
                assert!(v >= r && v > last);
                last = v;
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        for &(t, s2, b, k) in &[(0.5, 1.0, 0.3, 1), (3.0, 5.0, 0.1, 2), (10.0, 0.4, 0.05, 3)] {
            let (_, ds, db) = g0_gradient(t, s2, b, k);
            let h = 1e-6;
            let fs = (g0(t, s2 + h, b, k) - g0(t, s2 - h, b, k)) / (2.0 * h);
            let fb = (g0(t, s2, b + h, k) - g0(t, s2, b - h, k)) / (2.0 * h);
            assert!((ds - fs).abs() <= 1e-6 * fs.abs().max(1e-3));
            assert!((db - fb).abs() <= 1e-6 * fb.abs().max(1e-3));
        }
    }
}
