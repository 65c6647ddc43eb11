//! Resonant frequency triples for the dispersion `|ξ|^α`, their planar normal
//! form, the exponent classification `E_d`, and the cone geometry that keeps
//! Fourier supports away from the origin.
//!
//! A triple `(v₁, v₂, v₃)` is resonant when `v₁ + v₂ = v₃` and
//! `|v₁|^α + |v₂|^α = |v₃|^α`; such triples make the cubic interaction
//! time-linear instead of oscillatory. `E_d` collects the `α ≥ 1` admitting a
//! resonant triple whose first two legs subtend an angle below `2π/3`
//! (equivalently `2 v₁·v₂ > −|v₁||v₂|`): `E₁ = {1}` and `E_d = [1, ∞)` for
//! `d ≥ 2`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::CubeUnion;

/// Relative tolerance for the defining identity `|v₁|^α + |v₂|^α = |v₃|^α`.
pub const RESONANCE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResonantTriple {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub v3: Vec<f64>,
    pub alpha: f64,
    /// Construction angle for the planar family, when applicable.
    pub theta: Option<f64>,
    pub sign: Option<i8>,
    /// Residual `|v₁|^α + |v₂|^α − |v₃|^α` (absolute).
    pub residual: f64,
    /// A zero leg (endpoint of the family); unusable as a support center.
    pub degenerate: bool,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

impl ResonantTriple {
    fn build(v1: Vec<f64>, v2: Vec<f64>, alpha: f64, theta: Option<f64>, sign: Option<i8>) -> Result<Self> {
        let v3: Vec<f64> = v1.iter().zip(v2.iter()).map(|(a, b)| a + b).collect();
        let residual = norm(&v1).powf(alpha) + norm(&v2).powf(alpha) - norm(&v3).powf(alpha);
        let scale = norm(&v3).powf(alpha).max(f64::MIN_POSITIVE);
        if residual.abs() > RESONANCE_RTOL * scale {
            return Err(Error::Degenerate(format!(
                "constructed triple misses the resonance identity: residual {residual:.3e}"
            )));
        }
        let degenerate = norm(&v1) == 0.0 || norm(&v2) == 0.0 || norm(&v3) == 0.0;
        Ok(ResonantTriple { v1, v2, v3, alpha, theta, sign, residual, degenerate })
    }

    /// `2 v₁·v₂ + |v₁||v₂|`; positive means the `E_d` angle condition holds.
    pub fn margin(&self) -> f64 {
        angle_margin(&self.v1, &self.v2)
    }

    pub fn scaled(&self, factor: f64) -> ResonantTriple {
        let mul = |v: &[f64]| v.iter().map(|x| x * factor).collect::<Vec<_>>();
        ResonantTriple {
            v1: mul(&self.v1),
            v2: mul(&self.v2),
            v3: mul(&self.v3),
            residual: self.residual * factor.powf(self.alpha),
            ..self.clone()
        }
    }
}

/// `2 v₁·v₂ + |v₁||v₂|`.
pub fn angle_margin(v1: &[f64], v2: &[f64]) -> f64 {
    2.0 * dot(v1, v2) + norm(v1) * norm(v2)
}

/// One-dimensional triples `(aN, (1−a)N, N)`. The identity
/// `|a|^α + |1−a|^α = 1` holds for every `a ∈ [0,1]` at `α = 1`, and only for
/// the endpoints `a ∈ {0, 1}` otherwise (strict convexity/concavity of
/// `t ↦ t^α`).
pub fn resonant_1d(alpha: f64, a_param: f64, n: f64) -> Result<ResonantTriple> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(0.0..=1.0).contains(&a_param) {
        return Err(Error::Domain(format!("a must lie in [0,1], got {a_param}")));
    }
    let residual = a_param.abs().powf(alpha) + (1.0 - a_param).abs().powf(alpha) - 1.0;
    let endpoint = a_param == 0.0 || a_param == 1.0;
    if alpha != 1.0 && !endpoint && residual.abs() > RESONANCE_RTOL {
        return Err(Error::NonResonant { alpha, a_param, residual });
    }
    ResonantTriple::build(vec![a_param * n], vec![(1.0 - a_param) * n], alpha, None, None)
}

/// Planar resonant family for `d ≥ 2`, `α ≥ 1`, parametrized by
/// `θ ∈ [0, π/2)` and a mirror sign; embedded in the first two coordinates.
///
/// With `c = cos^{2/α}θ` and `s = sin^{2/α}θ`:
/// `v₁ = (c, 0, …)` and
/// `v₂ = ((1 + c² − s²)/(2c) − c, ± √(2(c² + s²) − (c² − s²)² − 1)/(2c), 0, …)`.
/// Two admissibility inequalities bound the implied direction cosine to
/// `[−1, 1]`; the first fails exactly when `α < 1`.
pub fn resonant_family(d: usize, alpha: f64, theta: f64, sign: i8) -> Result<ResonantTriple> {
    if d < 2 {
        return Err(Error::Domain("the planar family needs d >= 2".into()));
    }
    if alpha < 1.0 {
        return Err(Error::Domain(format!(
            "alpha = {alpha} < 1: the radicand can go negative, no planar family exists"
        )));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, pi/2)")));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::Domain("sign must be +1 or -1".into()));
    }
    let c2 = theta.cos().powf(2.0 / alpha); // cos^{2/α}θ
    let s2 = theta.sin().powf(2.0 / alpha);
    let c4 = c2 * c2;
    let s4 = s2 * s2;
    // Admissibility of the implied direction cosine, reported by name.
    let cos_r = (1.0 + c4 - s4) / (2.0 * c2);
    let admissible_lower = 1.0 + c2 - (1.0 - c2).powi(2) / s4.max(f64::MIN_POSITIVE); // diagnostic only
    let cond_alpha_ge_1 = c2 + s2 >= 1.0 - 1e-12; // ⇔ cos_r ≤ 1
    let cond_sin_bound = s2 <= 1.0 + c2 + 1e-12; // ⇔ cos_r ≥ −1
    if !(cond_alpha_ge_1 && cond_sin_bound) || cos_r.abs() > 1.0 + 1e-9 {
        return Err(Error::Domain(format!(
            "family admissibility failed at alpha = {alpha}, theta = {theta}: \
             cos r = {cos_r:.6}, unit-sum condition {cond_alpha_ge_1}, \
             sine bound {cond_sin_bound} (aux {admissible_lower:.3})"
        )));
    }
    let radicand = 2.0 * (c4 + s4) - (c4 - s4).powi(2) - 1.0;
    if radicand < -1e-12 {
        return Err(Error::Domain(format!("negative radicand {radicand:.3e} in the planar family")));
    }
    let root = radicand.max(0.0).sqrt();
    let mut v1 = vec![0.0; d];
    v1[0] = c2;
    let mut v2 = vec![0.0; d];
    v2[0] = (1.0 + c4 - s4) / (2.0 * c2) - c2;
    v2[1] = sign as f64 * root / (2.0 * c2);
    ResonantTriple::build(v1, v2, alpha, Some(theta), Some(sign))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdClassification {
    pub member: bool,
    pub witness: Option<ResonantTriple>,
    pub margin: Option<f64>,
    pub reason: String,
}

/// Membership of `α` in `E_d`: `E₁ = {1}`, `E_d = [1, ∞)` for `d ≥ 2`, always
/// with a verifying witness when a member.
pub fn classify_ed(d: usize, alpha: f64) -> Result<EdClassification> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if alpha < 1.0 {
        return Ok(EdClassification {
            member: false,
            witness: None,
            margin: None,
            reason: format!(
                "alpha = {alpha} < 1: |v1+v2|^a <= (|v1|+|v2|)^a < |v1|^a + |v2|^a forbids nonzero resonant legs"
            ),
        });
    }
    if d == 1 {
        if alpha == 1.0 {
            let w = resonant_1d(1.0, 0.5, 2.0)?; // (1, 1, 2)
            let margin = w.margin();
            return Ok(EdClassification {
                member: true,
                margin: Some(margin),
                witness: Some(w),
                reason: "collinear same-sign triples satisfy the angle condition at alpha = 1".into(),
            });
        }
        return Ok(EdClassification {
            member: false,
            witness: None,
            margin: None,
            reason: format!(
                "on the line only endpoint triples (N,0,N) exist for alpha = {alpha} != 1, \
                 and a zero leg gives margin 0 (not strict)"
            ),
        });
    }
    let w = resonant_family(d, alpha, std::f64::consts::FRAC_PI_4, 1)?;
    let margin = w.margin();
    debug_assert!(margin > 0.0);
    Ok(EdClassification {
        member: true,
        margin: Some(margin),
        witness: Some(w),
        reason: format!("theta = pi/4 planar triple has margin 1 - 2^(-2/alpha) = {margin:.6}"),
    })
}

/// Closed cone with apex at the origin containing a cube union, with opening
/// angle at most `2π/3` (half-angle `≤ π/3`), so any two support points `ξ, η`
/// satisfy `2ξ·η ≥ −|ξ||η|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cone {
    pub axis: Vec<f64>,
    pub half_angle: f64,
    pub a_omega: f64,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 {
        return None;
    }
    Some(v.iter().map(|x| x / n).collect())
}

fn angle_to(axis: &[f64], v: &[f64]) -> f64 {
    let n = norm(v);
    if n == 0.0 {
        return 0.0;
    }
    (dot(axis, v) / n).clamp(-1.0, 1.0).acos()
}

/// Finds a cone of half-angle `≤ π/3` containing `Ω`, or reports the worst
/// offending vertex.
///
/// The axis is chosen by a small candidate search (vertex directions, their
/// pairwise bisectors, and the mean direction) minimizing the maximal vertex
/// angle; a plain mean of centers is not reliable when one center carries a
/// much larger radius than the rest.
pub fn cone_check(omega: &CubeUnion) -> Result<Cone> {
    let a_omega = omega.a_omega();
    if !(a_omega > 0.0) {
        return Err(Error::Domain("cone check needs dist(0, support) > 0".into()));
    }
    let vertices = omega.vertices();
    let dirs: Vec<Vec<f64>> = vertices.iter().filter_map(|v| unit(v)).collect();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for c in omega.centers() {
        if let Some(u) = unit(c) {
            candidates.push(u);
        }
    }
    candidates.extend(dirs.iter().cloned());
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let sum: Vec<f64> = dirs[i].iter().zip(dirs[j].iter()).map(|(a, b)| a + b).collect();
            if let Some(u) = unit(&sum) {
                candidates.push(u);
            }
        }
    }
    let mean: Vec<f64> = (0..omega.dim())
        .map(|a| dirs.iter().map(|d| d[a]).sum::<f64>())
        .collect();
    if let Some(u) = unit(&mean) {
        candidates.push(u);
    }
    let mut best_axis = None;
    let mut best_half = f64::INFINITY;
    for axis in &candidates {
        let worst = vertices.iter().map(|v| angle_to(axis, v)).fold(0.0, f64::max);
        if worst < best_half {
            best_half = worst;
            best_axis = Some(axis.clone());
        }
    }
    let axis = best_axis.ok_or_else(|| Error::Domain("no usable axis direction".into()))?;
    if best_half > std::f64::consts::FRAC_PI_3 + 1e-12 {
        let worst = vertices
            .iter()
            .max_by(|a, b| angle_to(&axis, a).total_cmp(&angle_to(&axis, b)))
            .cloned()
            .unwrap_or_default();
        return Err(Error::ConeCheck { angle: angle_to(&axis, &worst), vertex: worst });
    }
    Ok(Cone { axis, half_angle: best_half, a_omega })
}

/// Randomized check of `a(A₁ + ⋯ + A_k) ≥ a(Ω)`: draws `samples` k-tuples of
/// points uniformly from the cubes and returns the minimal norm of the sum.
pub fn sumset_distance_probe(omega: &CubeUnion, k: usize, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = omega.dim();
    let half = omega.side() / 2.0;
    let centers = omega.centers();
    let mut best = f64::INFINITY;
    let mut sum = vec![0.0; d];
    for _ in 0..samples {
        sum.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..k {
            let c = &centers[rng.gen_range(0..centers.len())];
            for a in 0..d {
                sum[a] += c[a] + (rng.gen::<f64>() - 0.5) * 2.0 * half;
            }
        }
        best = best.min(norm(&sum));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_dimensional_triples() {
        let t = resonant_1d(1.0, 0.5, 2.0).unwrap();
        assert_eq!((t.v1[0], t.v2[0], t.v3[0]), (1.0, 1.0, 2.0));
        assert!(!t.degenerate);

        let t = resonant_1d(2.0, 0.0, 5.0).unwrap();
        assert_eq!((t.v1[0], t.v2[0], t.v3[0]), (0.0, 5.0, 5.0));
        assert_eq!(t.residual, 0.0);
        assert!(t.degenerate);

        match resonant_1d(2.0, 0.5, 1.0) {
            Err(Error::NonResonant { residual, .. }) => {
                assert_abs_diff_eq!(residual, -0.5, epsilon = 1e-15)
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn interior_rejection_has_signed_residual_on_a_grid() {
        // strictly negative residuals for alpha > 1, strictly positive for
        // alpha < 1, across an interior grid of a-parameters
        for (alpha, expect_negative) in [(2.0, true), (0.5, false)] {
            for i in 1..1000 {
                let a = i as f64 / 1000.0;
                match resonant_1d(alpha, a, 1.0) {
                    Err(Error::NonResonant { residual, .. }) => {
                        assert!(residual != 0.0);
                        assert_eq!(residual < 0.0, expect_negative, "alpha={alpha} a={a}");
                    }
                    Ok(t) => panic!("unexpected acceptance at alpha={alpha}, a={a}: {t:?}"),
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn planar_family_at_quarter_pi_alpha_two() {
        let t = resonant_family(2, 2.0, std::f64::consts::FRAC_PI_4, 1).unwrap();
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(t.v1[0], r, epsilon = 1e-14);
        assert_abs_diff_eq!(t.v2[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.v2[1], r, epsilon = 1e-14);
        assert_abs_diff_eq!(t.v3[0], r, epsilon = 1e-14);
        assert_abs_diff_eq!(t.v3[1], r, epsilon = 1e-14);
        assert!(t.residual.abs() < 1e-14);
    }

    #[test]
    fn planar_family_theta_zero_is_degenerate() {
        let t = resonant_family(3, 2.0, 0.0, 1).unwrap();
        assert!(t.degenerate);
        assert_abs_diff_eq!(t.v1[0], 1.0, epsilon = 1e-15);
        assert!(norm(&t.v2) < 1e-12);
    }

    #[test]
    fn planar_family_rejects_bad_domains() {
        assert!(resonant_family(1, 2.0, 0.3, 1).is_err());
        assert!(resonant_family(2, 0.9, 0.3, 1).is_err());
        assert!(resonant_family(2, 2.0, std::f64::consts::FRAC_PI_2, 1).is_err());
    }

    #[test]
    fn margin_closed_form_and_mirror_symmetry() {
        for alpha in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0] {
            let plus = resonant_family(2, alpha, std::f64::consts::FRAC_PI_4, 1).unwrap();
            let minus = resonant_family(2, alpha, std::f64::consts::FRAC_PI_4, -1).unwrap();
            let expect = 1.0 - 2f64.powf(-2.0 / alpha);
            assert_abs_diff_eq!(plus.margin(), expect, epsilon = 1e-12);
            assert_abs_diff_eq!(minus.margin(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn margin_simple_vectors() {
        assert_abs_diff_eq!(angle_margin(&[1.0, 0.0], &[0.0, 1.0]), 1.0, epsilon = 1e-15);
        // antiparallel unit vectors: 2·(−1) + 1 = −1 < 0
        assert_abs_diff_eq!(angle_margin(&[1.0, 0.0], &[-1.0, 0.0]), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn ed_classification() {
        assert!(classify_ed(1, 1.0).unwrap().member);
        assert!(!classify_ed(1, 2.0).unwrap().member);
        assert!(!classify_ed(3, 0.5).unwrap().member);
        let c = classify_ed(3, 1.7).unwrap();
        assert!(c.member);
        let expect = 1.0 - 2f64.powf(-2.0 / 1.7);
        assert_abs_diff_eq!(c.margin.unwrap(), expect, epsilon = 1e-12);
        let w = c.witness.unwrap();
        assert!(w.residual.abs() <= RESONANCE_RTOL);
    }

    #[test]
    fn cone_check_collinear_and_antipodal() {
        let good = CubeUnion::new(1.0, vec![vec![8.0], vec![16.0]]).unwrap();
        let cone = cone_check(&good).unwrap();
        assert_abs_diff_eq!(cone.half_angle, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cone.a_omega, 7.5, epsilon = 1e-14);

        let bad = CubeUnion::new(1.0, vec![vec![8.0], vec![-8.0]]).unwrap();
        assert!(matches!(cone_check(&bad), Err(Error::ConeCheck { .. })));
    }

    #[test]
    fn cone_check_resonant_support() {
        // Σ = {N v1, 2N v1, N v2, N v3} at theta = pi/4, alpha = 2
        let t = resonant_family(2, 2.0, std::f64::consts::FRAC_PI_4, 1).unwrap();
        for n in [8.0, 64.0] {
            let centers = vec![
                t.v1.iter().map(|x| x * n).collect::<Vec<_>>(),
                t.v1.iter().map(|x| x * 2.0 * n).collect(),
                t.v2.iter().map(|x| x * n).collect(),
                t.v3.iter().map(|x| x * n).collect(),
            ];
            let omega = CubeUnion::new(1.0, centers).unwrap();
            let cone = cone_check(&omega).expect("resonant support fits a pi/3 cone");
            assert!(cone.half_angle <= std::f64::consts::FRAC_PI_3);
        }
    }

    #[test]
    fn sumset_probe_collinear() {
        let omega = CubeUnion::new(1.0, vec![vec![8.0], vec![16.0]]).unwrap();
        let a = omega.a_omega();
        // k = 1 reproduces a(Ω) (approached from above by sampling)
        let one = sumset_distance_probe(&omega, 1, 20_000, 7);
        assert!(one >= a * (1.0 - 1e-12));
        assert!(one < a + 0.05);
        // k = 2: minimum near 2N − 1 = 15
        let two = sumset_distance_probe(&omega, 2, 20_000, 7);
        assert!(two >= 15.0 - 1e-9 && two < 15.2);
    }
}
