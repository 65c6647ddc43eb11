//! Quadrature: Gauss-Legendre rules for the Duhamel integral and composite
//! panel integration for weight masses.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence, Chebyshev initial guesses;
/// accurate to machine precision for the node counts used here (n ≤ 128).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and P'_n(x) by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // ascending order; cos runs descending
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadRule {
    GaussLegendre,
    UniformTrapezoid,
}

/// Time quadrature on `[0, T]` for Duhamel integrals.
///
/// Gauss nodes are strictly interior; trapezoid includes the endpoints. Both
/// have weights summing to `T`. Inner integrals over `[0, t]` reuse the same
/// rule, affinely rescaled.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    pub t_final: f64,
    pub n_nodes: usize,
    pub rule: QuadRule,
    base_nodes: Vec<f64>,
    base_weights: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_final: f64, n_nodes: usize, rule: QuadRule) -> Result<Self> {
        if t_final <= 0.0 || !t_final.is_finite() {
            return Err(Error::Domain(format!("final time must be positive, got {t_final}")));
        }
        if n_nodes < 2 {
            return Err(Error::Domain("need at least two time nodes".into()));
        }
        let (base_nodes, base_weights) = match rule {
            QuadRule::GaussLegendre => gauss_legendre(n_nodes),
            QuadRule::UniformTrapezoid => {
                let mut xs = Vec::with_capacity(n_nodes);
                let mut ws = Vec::with_capacity(n_nodes);
                let step = 2.0 / (n_nodes - 1) as f64;
                for i in 0..n_nodes {
                    xs.push(-1.0 + step * i as f64);
                    let w = if i == 0 || i == n_nodes - 1 { 0.5 } else { 1.0 };
                    ws.push(w * step);
                }
                (xs, ws)
            }
        };
        Ok(TimeGrid { t_final, n_nodes, rule, base_nodes, base_weights })
    }

    /// Nodes/weights mapped onto `[0, upper]`.
    pub fn scaled(&self, upper: f64) -> Vec<(f64, f64)> {
        let half = upper / 2.0;
        self.base_nodes
            .iter()
            .zip(self.base_weights.iter())
            .map(|(&x, &w)| (half * (x + 1.0), half * w))
            .collect()
    }

    /// Nodes/weights on `[0, t_final]`.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        self.scaled(self.t_final)
    }
}

/// Composite Gauss-Legendre integration of `f` over `[a, b]` with `panels`
/// equal panels and a fixed 16-point rule per panel.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (xs, ws) = gauss_legendre(16);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let half = width / 2.0;
        let mid = lo + half;
        let mut acc = 0.0;
        for (&x, &w) in xs.iter().zip(ws.iter()) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Stable `sin(x)/x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫₀ᵀ e^{itΦ} dt`, evaluated in closed form as `(e^{iTΦ} − 1)/(iΦ)` through
/// cancellation-free trigonometric identities; the `Φ → 0` limit is `T`.
pub fn oscillatory_time_integral(t_final: f64, phi: f64) -> num_complex::Complex64 {
    if phi.abs() < 1e-13 {
        return num_complex::Complex64::new(t_final, 0.0);
    }
    let x = t_final * phi;
    let re = t_final * sinc(x);
    let half = x / 2.0;
    let s = sinc(half);
    let im = t_final * half * s * s;
    num_complex::Complex64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(5);
        // degree 9 is exact for n = 5
        let val: f64 = xs.iter().zip(ws.iter()).map(|(&x, &w)| w * x.powi(8)).sum();
        assert_abs_diff_eq!(val, 2.0 / 9.0, epsilon = 1e-14);
        let total: f64 = ws.iter().sum();
        assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn time_grid_weights_sum_to_t() {
        for rule in [QuadRule::GaussLegendre, QuadRule::UniformTrapezoid] {
            let tg = TimeGrid::new(0.37, 16, rule).unwrap();
            let sum: f64 = tg.nodes().iter().map(|&(_, w)| w).sum();
            assert_abs_diff_eq!(sum, 0.37, epsilon = 1e-14);
            if rule == QuadRule::GaussLegendre {
                assert!(tg.nodes().iter().all(|&(t, _)| t > 0.0 && t < 0.37));
            }
        }
    }

    #[test]
    fn oscillatory_integral_matches_quadrature() {
        let t = 0.013;
        for phi in [0.0, 1e-14, 3.0, 250.0, -4411.7] {
            let exact = oscillatory_time_integral(t, phi);
            let re = integrate_1d(|s| (s * phi).cos(), 0.0, t, 64);
            let im = integrate_1d(|s| (s * phi).sin(), 0.0, t, 64);
            assert_abs_diff_eq!(exact.re, re, epsilon = 1e-12);
            assert_abs_diff_eq!(exact.im, im, epsilon = 1e-12);
        }
    }
}
