//! Standalone oracle suite: the extremal trilinear recursion bound in exact
//! rationals, the two-sided cube-convolution bounds, weight-mass ratio
//! stability, and the sumset distance probe.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use std::fmt;

use nilab_core::error::Result;
use nilab_core::lattice::{convolve, cube_node_lists, indicator, CubeUnion, FreqLattice, MAX_DIM};
use nilab_core::norms::{weight_mass, Exponent};
use nilab_core::resonance::{classify_ed, cone_check, sumset_distance_probe};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {} — {}",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.details
            )?;
        }
        writeln!(f, "verify: {}", if self.all_passed() { "all checks passed" } else { "FAILURES" })
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Extremal sequence of the trilinear recursion, `b₁ = 1`,
/// `b_k = C Σ_{k₁+k₂+k₃=k} b_{k₁} b_{k₂} b_{k₃}` with `C = 2`, checked in
/// exact rationals against the closed bound `b_k ≤ b₁ C₀^{k−1}`,
/// `C₀ = (π²/2)√C b₁`. Even entries vanish (no admissible splits).
fn check_extremal_sequence(k_max: usize) -> CheckResult {
    let c = big(2);
    let mut b = vec![BigRational::from_integer(BigInt::from(0)); k_max + 1];
    b[1] = big(1);
    for k in 2..=k_max {
        let mut total = BigRational::from_integer(BigInt::from(0));
        for k1 in 1..=k - 2 {
            for k2 in 1..=k - 1 - k1 {
                let k3 = k - k1 - k2;
                total += &b[k1] * &b[k2] * &b[k3];
            }
        }
        b[k] = &c * total;
    }
    // rational lower bound on C₀² = π⁴/2 ≈ 48.7045455170…
    let c0_sq_lower = BigRational::new(BigInt::from(4_870_454_551i64), BigInt::from(100_000_000i64));
    let mut worst_margin = f64::INFINITY;
    for k in 1..=k_max {
        if k % 2 == 0 {
            if b[k] != big(0) {
                return CheckResult {
                    name: "trilinear_recursion_bound".into(),
                    passed: false,
                    details: format!("even entry b_{k} nonzero"),
                };
            }
            continue;
        }
        // b_k ≤ C₀^{k−1}  ⇐  b_k² ≤ (C₀²)^{k−1}, checked with the rational
        // lower bound of C₀² (sound direction for a pass)
        let lhs = &b[k] * &b[k];
        let mut rhs = big(1);
        for _ in 0..k - 1 {
            rhs *= &c0_sq_lower;
        }
        if lhs > rhs {
            return CheckResult {
                name: "trilinear_recursion_bound".into(),
                passed: false,
                details: format!("b_{k}² exceeds the C₀ bound"),
            };
        }
        if k > 1 {
            use num_traits::ToPrimitive;
            let ratio = (rhs / lhs).to_f64().unwrap_or(f64::INFINITY);
            worst_margin = worst_margin.min(ratio);
        }
    }
    CheckResult {
        name: "trilinear_recursion_bound".into(),
        passed: true,
        details: format!(
            "b_k = C Σ b b b with C = 2 satisfies b_k ≤ C₀^(k-1) up to k = {k_max} \
             (exact rationals; tightest ratio (C₀²)^(k-1)/b_k² = {worst_margin:.3e})"
        ),
    }
}

/// Two-sided cube-convolution bounds on the lattice: peak exactly `A^d`
/// (attained at the one-cell-shifted discrete center), minimum over the inner
/// cube exactly `2^{−d} A^d`, and identical zero outside `η₁+η₂+2Q_A`.
fn check_cube_convolution(dim: usize) -> Result<CheckResult> {
    let a_side: f64 = 2.0;
    let m = 4u32;
    let h = a_side / m as f64;
    let eta1: f64 = 1.0;
    let eta2: f64 = -3.0;
    let radius = 4.0 * a_side + eta1.abs() + eta2.abs();
    let lat = FreqLattice::new(dim, h, 2 * ((radius / h) as usize) + 1)?;
    let c1 = CubeUnion::new(a_side, vec![vec![eta1; dim]])?;
    let c2 = CubeUnion::new(a_side, vec![vec![eta2; dim]])?;
    let f = indicator(&c1, 1.0, &lat)?;
    let g = indicator(&c2, 1.0, &lat)?;
    let conv = convolve(&f, &g)?;
    let ad = a_side.powi(dim as i32);
    let peak = conv.max_abs();
    let center_sum = eta1 + eta2;
    let inner = CubeUnion::new(a_side, vec![vec![center_sum; dim]])?;
    let outer = CubeUnion::new(2.0 * a_side, vec![vec![center_sum; dim]])?;
    let inner_nodes = cube_node_lists(&inner, &lat)?.remove(0);
    let mut inner_min = f64::INFINITY;
    for flat in inner_nodes {
        inner_min = inner_min.min(conv.values()[flat].re);
    }
    let mut outside_max: f64 = 0.0;
    let mut coords = [0.0; MAX_DIM];
    for flat in 0..lat.len() {
        lat.coords(flat, &mut coords[..dim]);
        if !outer.contains(&coords[..dim]) {
            outside_max = outside_max.max(conv.values()[flat].norm());
        }
    }
    let c_lower = inner_min / ad;
    let expect_c = 0.5f64.powi(dim as i32);
    let passed = (peak - ad).abs() <= 1e-10 * ad
        && (c_lower - expect_c).abs() <= 1e-10
        && outside_max <= 1e-10 * ad;
    Ok(CheckResult {
        name: format!("cube_convolution_bounds_d{dim}"),
        passed,
        details: format!(
            "peak = {peak:.12} (A^d = {ad}), measured c_d = {c_lower:.12} (expected {expect_c}), \
             max outside the doubled cube = {outside_max:.3e}"
        ),
    })
}

/// Self-convolution center value: `χ_{Q_A} ∗ χ_{Q_A}` attains `A^d` at the
/// discrete center, exactly.
fn check_cube_self_overlap() -> Result<CheckResult> {
    let a_side = 2.0;
    let lat = FreqLattice::new(1, 0.5, 33)?;
    let q = indicator(&CubeUnion::new(a_side, vec![vec![0.0]])?, 1.0, &lat)?;
    let conv = convolve(&q, &q)?;
    let peak = conv.max_abs();
    let passed = (peak - a_side).abs() <= 1e-12 * a_side;
    Ok(CheckResult {
        name: "cube_self_overlap".into(),
        passed,
        details: format!("peak of χ_Q ∗ χ_Q = {peak:.14} vs A^d = {a_side}"),
    })
}

/// Weight-mass quadrature against the closed form across `A ∈ {4,…,256}` in
/// the three regimes of `s`.
fn check_weight_mass_regimes() -> Result<CheckResult> {
    let mut details = String::new();
    let mut passed = true;
    for (label, s) in [("constant", -1.0), ("logarithmic", -0.5), ("power", -0.25)] {
        let mut ratios = Vec::new();
        let mut a = 4.0;
        while a <= 256.0 {
            let (quad, closed) = weight_mass(1, a, Exponent::Finite(2.0), s)?;
            ratios.push(quad / closed);
            a *= 2.0;
        }
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let stable = hi / lo < 2.0;
        passed &= stable;
        details.push_str(&format!("{label}: ratio band [{lo:.4}, {hi:.4}]; "));
    }
    Ok(CheckResult { name: "weight_mass_regimes".into(), passed, details })
}

/// Sumset distance probe: random k-tuples from `Ω` never sum below `a(Ω)`.
fn check_sumset_probe(seed: u64) -> Result<CheckResult> {
    let mut details = String::new();
    let mut passed = true;
    // collinear support on the line
    let collinear = CubeUnion::new(1.0, vec![vec![8.0], vec![16.0]])?;
    cone_check(&collinear)?;
    let a = collinear.a_omega();
    for k in 1..=3 {
        let min = sumset_distance_probe(&collinear, k, 100_000, seed ^ k as u64);
        let ok = min >= a * (1.0 - 1e-12);
        passed &= ok;
        details.push_str(&format!("line k={k}: min {min:.6} vs a(Ω) {a:.6}; "));
    }
    // resonant support in the plane
    let ed = classify_ed(2, 2.0)?;
    let w = ed.witness.expect("2 ∈ E_2");
    let n = 8.0;
    let centers = vec![
        w.v1.iter().map(|x| x * n).collect::<Vec<_>>(),
        w.v1.iter().map(|x| x * 2.0 * n).collect(),
        w.v2.iter().map(|x| x * n).collect(),
        w.v3.iter().map(|x| x * n).collect(),
    ];
    let resonant = CubeUnion::new(1.0, centers)?;
    cone_check(&resonant)?;
    let a = resonant.a_omega();
    for k in 1..=3 {
        let min = sumset_distance_probe(&resonant, k, 100_000, seed ^ (0xbeef + k as u64));
        let ok = min >= a * (1.0 - 1e-12);
        passed &= ok;
        details.push_str(&format!("plane k={k}: min {min:.6} vs a(Ω) {a:.6}; "));
    }
    Ok(CheckResult { name: "sumset_distance_probe".into(), passed, details })
}

/// Run the whole lemma-oracle suite.
pub fn verify_lemma_suite(seed: u64) -> Result<VerifyReport> {
    let mut checks = vec![check_extremal_sequence(30)];
    checks.push(check_cube_self_overlap()?);
    checks.push(check_cube_convolution(1)?);
    checks.push(check_cube_convolution(2)?);
    checks.push(check_weight_mass_regimes()?);
    checks.push(check_sumset_probe(seed)?);
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let report = verify_lemma_suite(42).unwrap();
        assert!(report.all_passed(), "{report}");
    }
}
