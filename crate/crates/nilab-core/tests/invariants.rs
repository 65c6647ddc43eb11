//! Cross-module invariants: convolution algebra, phase isometries, data-norm
//! scaling, and iterate growth/support behavior.

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use nilab_core::lattice::{
    conj_reflect, convolve, fractional_phase, indicator, CubeUnion, FreqLattice, GridFn,
};
use nilab_core::norms::{fl_norm, mod_norm, sequence_weight_mass, Exponent};
use nilab_core::picard::{support_measure, truncated_solution, ModelParams, PicardStack};
use nilab_core::quad::{QuadRule, TimeGrid};

fn grid_from_seeds(lat: &FreqLattice, seeds: &[(usize, f64, f64)]) -> GridFn {
    let mut g = GridFn::zeros(lat.clone());
    for &(at, re, im) in seeds {
        g.values_mut()[at % lat.len()] = Complex64::new(re, im);
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_commutes(
        seeds_a in proptest::collection::vec((0usize..33, -2.0f64..2.0, -2.0f64..2.0), 1..6),
        seeds_b in proptest::collection::vec((0usize..33, -2.0f64..2.0, -2.0f64..2.0), 1..6),
    ) {
        let lat = FreqLattice::new(1, 0.5, 33).unwrap();
        let a = grid_from_seeds(&lat, &seeds_a);
        let b = grid_from_seeds(&lat, &seeds_b);
        let ab = convolve(&a, &b).unwrap();
        let ba = convolve(&b, &a).unwrap();
        let scale = ab.max_abs().max(1e-30);
        for (x, y) in ab.values().iter().zip(ba.values().iter()) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn convolution_associates_on_padded_lattices(
        seeds_a in proptest::collection::vec((0usize..9, -2.0f64..2.0, -2.0f64..2.0), 1..4),
        seeds_b in proptest::collection::vec((0usize..9, -2.0f64..2.0, -2.0f64..2.0), 1..4),
        seeds_c in proptest::collection::vec((0usize..9, -2.0f64..2.0, -2.0f64..2.0), 1..4),
    ) {
        // supports concentrated near the center so restriction loses nothing
        let lat = FreqLattice::new(1, 0.5, 65).unwrap();
        let center = lat.len() / 2 - 4;
        let shift = |s: &[(usize, f64, f64)]| -> Vec<(usize, f64, f64)> {
            s.iter().map(|&(i, re, im)| (center + i, re, im)).collect()
        };
        let a = grid_from_seeds(&lat, &shift(&seeds_a));
        let b = grid_from_seeds(&lat, &shift(&seeds_b));
        let c = grid_from_seeds(&lat, &shift(&seeds_c));
        let left = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let right = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        let scale = left.max_abs().max(right.max_abs()).max(1e-30);
        for (x, y) in left.values().iter().zip(right.values().iter()) {
            prop_assert!((x - y).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn phase_multiplier_preserves_lattice_norms(
        seeds in proptest::collection::vec((0usize..65, -3.0f64..3.0, -3.0f64..3.0), 1..12),
        t in -2.0f64..2.0,
        alpha in 0.3f64..4.0,
        s in -2.0f64..1.0,
    ) {
        let lat = FreqLattice::new(1, 0.25, 65).unwrap();
        let f = grid_from_seeds(&lat, &seeds);
        let phase = fractional_phase(&lat, alpha, t).unwrap();
        let rotated = phase.pointwise_mul(&f).unwrap();
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Finite(3.5), Exponent::Infinity] {
            let before = fl_norm(&f, p, s).unwrap();
            let after = fl_norm(&rotated, p, s).unwrap();
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1e-300));
        }
        for q in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity] {
            let before = mod_norm(&f, q, s).unwrap();
            let after = mod_norm(&rotated, q, s).unwrap();
            prop_assert!((before - after).abs() <= 1e-12 * before.max(1e-300));
        }
    }

    #[test]
    fn conj_reflect_preserves_absolute_norms(
        seeds in proptest::collection::vec((0usize..65, -3.0f64..3.0, -3.0f64..3.0), 1..12),
    ) {
        let lat = FreqLattice::new(1, 0.25, 65).unwrap();
        let f = grid_from_seeds(&lat, &seeds);
        let r = conj_reflect(&f);
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0)] {
            let a = fl_norm(&f, p, 0.0).unwrap();
            let b = fl_norm(&r, p, 0.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }
}

/// Data-norm scaling `‖ψ₀‖_{FL^p_s} ∼ R A^{d/p} N^s` across an N sweep.
#[test]
fn indicator_norm_scaling_band() {
    let a_side = 1.0;
    let m = 4usize;
    let h = a_side / m as f64;
    for (p, s) in [(1.0, -0.5), (2.0, -1.0), (2.0, -0.25)] {
        let mut ratios = Vec::new();
        for n in [8.0, 16.0, 32.0, 64.0, 128.0] {
            let radius = 2.0 * n + 2.0;
            let m_axis = 2 * ((radius / h) as usize) + 1;
            let lat = FreqLattice::new(1, h, m_axis).unwrap();
            let omega = CubeUnion::new(a_side, vec![vec![n], vec![2.0 * n]]).unwrap();
            let r_amp = 0.7;
            let f = indicator(&omega, r_amp, &lat).unwrap();
            let norm = fl_norm(&f, Exponent::Finite(p), s).unwrap();
            ratios.push(norm / (r_amp * a_side.powf(1.0 / p) * n.powf(s)));
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(
            hi / lo < 1.6,
            "scaling band too wide at p={p}, s={s}: {ratios:?}"
        );
    }
}

/// Modulation data bound `‖ψ₀‖_{M^{2,1}_s} ≲ R A^{d/2} N^s` across the sweep.
#[test]
fn indicator_mod_norm_bounded() {
    let a_side = 2.0;
    let h = 0.25;
    let s = -1.0;
    let mut ratios = Vec::new();
    for n in [8.0, 16.0, 32.0, 64.0] {
        let radius = 2.0 * n + 3.0;
        let m_axis = 2 * ((radius / h) as usize) + 1;
        let lat = FreqLattice::new(1, h, m_axis).unwrap();
        let omega = CubeUnion::new(a_side, vec![vec![n], vec![2.0 * n]]).unwrap();
        let f = indicator(&omega, 1.0, &lat).unwrap();
        let norm = mod_norm(&f, Exponent::Finite(1.0), s).unwrap();
        ratios.push(norm / (a_side.powf(0.5) * n.powf(s)));
    }
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi < 4.0 && hi / lo < 2.0, "modulation data ratios {ratios:?}");
}

/// Discrete analogue of the weight-mass equivalence: the lattice sum over
/// integer points tracks `f^q_s(A)` in all three regimes.
#[test]
fn sequence_mass_regime_bands() {
    for (s, q) in [(-2.0, 1.0), (-1.0, 1.0), (-0.5, 2.0), (-0.25, 2.0)] {
        let mut ratios = Vec::new();
        let mut a = 4.0;
        while a <= 256.0 {
            let seq = sequence_weight_mass(1, a, Exponent::Finite(q), s).unwrap();
            let closed = nilab_core::norms::closed_form_weight_mass(1, a, Exponent::Finite(q), s);
            ratios.push(seq / closed);
            a *= 2.0;
        }
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 2.0, "s={s} q={q}: {ratios:?}");
    }
}

fn build_stack(gamma: f64, n: f64, t: f64, nt: usize) -> (PicardStack, CubeUnion) {
    let h = 0.25;
    let radius = 5.2 * (2.0 * n + 0.5) + 1.0;
    let m_axis = 2 * ((radius / h) as usize) + 1;
    let lat = FreqLattice::new(1, h, m_axis).unwrap();
    let omega = CubeUnion::new(1.0, vec![vec![n], vec![2.0 * n]]).unwrap();
    let psi0 = indicator(&omega, 1.0, &lat).unwrap();
    let params = ModelParams::new(1, gamma, 2.0, -1.0).unwrap();
    let tg = TimeGrid::new(t, nt, QuadRule::GaussLegendre).unwrap();
    (PicardStack::new(params, psi0, tg).unwrap(), omega)
}

/// Geometric decay of iterate norms and internal consistency of truncation:
/// the K = 5 vs K = 7 difference sits below the K = 5 tail majorant.
#[test]
fn truncation_tail_self_consistency() {
    let n = 8.0;
    let t = 0.01 / (n * n);
    let (stack, _) = build_stack(1.0, n, t, 24);
    let k5 = truncated_solution(&stack, 5, 0.5).unwrap();
    let k7 = truncated_solution(&stack, 7, 0.5).unwrap();
    let mut diff = GridFn::zeros(stack.lattice().clone());
    diff.accumulate(&k7.psi, Complex64::new(1.0, 0.0));
    diff.accumulate(&k5.psi, Complex64::new(-1.0, 0.0));
    let moved = fl_norm(&diff, Exponent::Finite(1.0), 0.0).unwrap();
    assert!(
        moved <= k5.tail_majorant * (1.0 + 1e-9),
        "ΔK = {moved} vs tail {t}",
        t = k5.tail_majorant
    );
    // measured two-step growth stays under the calibrated geometric factor
    let b = fl_norm(stack.data(), Exponent::Finite(1.0), 0.0).unwrap();
    let gap = stack.params.gamma - 1.0;
    let a_fac = if gap == 0.0 { 1.0 } else { k7.a_support.powf(gap) };
    for w in k7.norms_fl1.windows(2) {
        let (_, lo) = w[0];
        let (_, hi) = w[1];
        if lo > 0.0 {
            assert!(hi / lo <= k7.calibrated_c * t * a_fac * b * b * (1.0 + 1e-9));
        }
    }
}

/// Support sizes: `|supp F U_k| ≤ C^k A^d` with `C` independent of `N`.
#[test]
fn iterate_support_growth() {
    let mut u3_sizes = Vec::new();
    let mut u5_sizes = Vec::new();
    for n in [8.0, 16.0] {
        let t = 0.01 / (n * n);
        let (stack, omega) = build_stack(1.0, n, t, 16);
        let u3 = stack.evaluate(3, t).unwrap();
        let u5 = stack.evaluate(5, t).unwrap();
        let a_d = omega.side();
        u3_sizes.push(support_measure(&u3, 1e-6).unwrap() / a_d);
        u5_sizes.push(support_measure(&u5, 1e-6).unwrap() / a_d);
    }
    for (k, sizes) in [(3, &u3_sizes), (5, &u5_sizes)] {
        let hi = sizes.iter().cloned().fold(0.0f64, f64::max);
        let lo = sizes.iter().cloned().fold(f64::INFINITY, f64::min);
        // bounded by C^k cubes and stable in N
        assert!(hi <= 30f64.powi(k), "k={k}: {sizes:?}");
        assert!(hi / lo < 1.5, "k={k} drifts with N: {sizes:?}");
    }
}

/// `U₁` norm equals the data norm in both scales at several times.
#[test]
fn propagator_isometry_on_indicator_data() {
    let (stack, _) = build_stack(0.5, 8.0, 1e-3, 8);
    for space_s in [-1.0, 0.0] {
        let base_fl = fl_norm(stack.data(), Exponent::Finite(2.0), space_s).unwrap();
        let base_mod = mod_norm(stack.data(), Exponent::Finite(1.0), space_s).unwrap();
        for t in [1e-4, 5e-4, 1e-3] {
            let u1 = stack.evaluate(1, t).unwrap();
            assert_abs_diff_eq!(
                fl_norm(&u1, Exponent::Finite(2.0), space_s).unwrap(),
                base_fl,
                epsilon = 1e-12 * base_fl
            );
            assert_abs_diff_eq!(
                mod_norm(&u1, Exponent::Finite(1.0), space_s).unwrap(),
                base_mod,
                epsilon = 1e-12 * base_mod
            );
        }
    }
}

/// Measured iterate norms against the parameter part of their bound: the
/// ratio column stays in a fixed band across the sweep for k = 1, 3, 5.
#[test]
fn uk_bound_ratios_stable_across_sweep() {
    use nilab_core::norms::{weight_mass, NormSpec, Space};
    use nilab_core::picard::{uk_bound_report, UkScale};

    let (p, s) = (2.0, -1.0);
    let spec = NormSpec { space: Space::FourierLebesgue, index: Exponent::Finite(p), s };
    let mut per_k: std::collections::BTreeMap<u32, Vec<f64>> = Default::default();
    for n in [8.0, 16.0, 32.0] {
        let t = 0.01 / (n * n);
        let (stack, omega) = build_stack(1.0, n, t, 16);
        let (mass, _) = weight_mass(1, omega.side(), Exponent::Finite(p), s).unwrap();
        let scale = UkScale { n_scale: n, a_side: omega.side(), amplitude: 1.0, weight_mass: mass };
        let rows = uk_bound_report(&stack, &spec, &scale, 5).unwrap();
        for row in rows {
            assert!(row.ratio.is_finite() && row.ratio > 0.0);
            per_k.entry(row.k).or_default().push(row.ratio);
        }
        // the first iterate norm coincides with the data norm exactly
        let u1 = stack.evaluate(1, t).unwrap();
        let base = spec.norm_of(stack.data()).unwrap();
        assert_abs_diff_eq!(spec.norm_of(&u1).unwrap(), base, epsilon = 1e-12 * base);
    }
    for (k, ratios) in per_k {
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi / lo < 3.0, "k = {k} ratios drift: {ratios:?}");
        assert!(hi < 10.0, "k = {k} ratios out of scale: {ratios:?}");
    }
}
