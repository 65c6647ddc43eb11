//! Fourier-Lebesgue norms `‖⟨·⟩^s F f‖_{L^p}`, modulation norms `M^{2,q}_s`
//! via a frequency-uniform partition of unity, and the weight-mass
//! asymptotics `f^p_s(A)` of `‖⟨·⟩^s‖_{L^p(Q_A)}`.
//!
//! All lattice quadrature uses the cell weight `h^d`; `p = ∞` and `q = ∞` are
//! suprema without quadrature weight. Modulation norms are evaluated entirely
//! on the Fourier side: `‖□_n f‖_{L²} = ‖σ_n F f‖_{L²}` by unitarity of the
//! transform, so phase multipliers drop out exactly.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{GridFn, MAX_DIM};
use crate::quad::integrate_1d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    #[serde(rename = "FL")]
    FourierLebesgue,
    #[serde(rename = "MOD")]
    Modulation,
}

/// Lebesgue exponent `p ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    #[serde(rename = "inf")]
    Infinity,
}

impl Exponent {
    pub fn validate(self) -> Result<Self> {
        match self {
            Exponent::Finite(p) if p >= 1.0 && p.is_finite() => Ok(self),
            Exponent::Infinity => Ok(self),
            Exponent::Finite(p) => Err(Error::Domain(format!("exponent {p} below 1"))),
        }
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }
}

/// Which norm a measurement runs in: `FL^p_s` or `M^{2,q}_s`.
///
/// The modulation inner Lebesgue exponent is fixed to 2; `□_n f` in other
/// `L^p` would need physical-space transforms and is out of scope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub space: Space,
    pub index: Exponent,
    pub s: f64,
}

impl NormSpec {
    pub fn new(space: Space, index: Exponent, s: f64) -> Result<Self> {
        index.validate()?;
        Ok(NormSpec { space, index, s })
    }

    pub fn norm_of(&self, f: &GridFn) -> Result<f64> {
        match self.space {
            Space::FourierLebesgue => fl_norm(f, self.index, self.s),
            Space::Modulation => mod_norm(f, self.index, self.s),
        }
    }

    /// Norm restricted to low frequencies: `Q_side` for Fourier-Lebesgue,
    /// `|n| ≤ side/2` cube indices for modulation.
    pub fn low_freq_norm_of(&self, f: &GridFn, side: f64) -> Result<f64> {
        match self.space {
            Space::FourierLebesgue => low_freq_fl_norm(f, self.index, self.s, side),
            Space::Modulation => low_freq_mod_norm(f, self.index, self.s, side / 2.0),
        }
    }
}

fn bracket(norm_sq: f64) -> f64 {
    (1.0 + norm_sq).sqrt()
}

/// `‖f‖_{FL^p_s} = (h^d Σ_ξ ⟨ξ⟩^{ps} |f(ξ)|^p)^{1/p}`, max for `p = ∞`.
pub fn fl_norm(f: &GridFn, p: Exponent, s: f64) -> Result<f64> {
    p.validate()?;
    let lat = f.lattice();
    match p {
        Exponent::Infinity => {
            let mut best: f64 = 0.0;
            for (flat, v) in f.values().iter().enumerate() {
                let r = lat.norm_of(flat);
                best = best.max(bracket(r * r).powf(s) * v.norm());
            }
            Ok(best)
        }
        Exponent::Finite(p) => {
            let mut acc = 0.0;
            for (flat, v) in f.values().iter().enumerate() {
                let a = v.norm();
                if a == 0.0 {
                    continue;
                }
                let r = lat.norm_of(flat);
                acc += bracket(r * r).powf(p * s) * a.powf(p);
            }
            Ok((acc * lat.cell_volume()).powf(1.0 / p))
        }
    }
}

/// Fourier-Lebesgue norm restricted to the cube `Q_side = [−side/2, side/2)^d`.
pub fn low_freq_fl_norm(f: &GridFn, p: Exponent, s: f64, side: f64) -> Result<f64> {
    p.validate()?;
    let lat = f.lattice();
    let d = lat.dim();
    let half = side / 2.0;
    let tol = 1e-9 * lat.spacing();
    let mut coords = [0.0; MAX_DIM];
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for (flat, v) in f.values().iter().enumerate() {
        lat.coords(flat, &mut coords[..d]);
        if coords[..d].iter().any(|&x| x < -half - tol || x >= half - tol) {
            continue;
        }
        let a = v.norm();
        let r = lat.norm_of(flat);
        match p {
            Exponent::Infinity => best = best.max(bracket(r * r).powf(s) * a),
            Exponent::Finite(p) => {
                if a > 0.0 {
                    acc += bracket(r * r).powf(p * s) * a.powf(p);
                }
            }
        }
    }
    Ok(match p {
        Exponent::Infinity => best,
        Exponent::Finite(p) => (acc * lat.cell_volume()).powf(1.0 / p),
    })
}

/// Frequency-uniform partition of unity `σ_n = ρ_n / Σ_ℓ ρ_ℓ`.
///
/// The window is the tensor bump `ρ(ξ) = Π_j φ(ξ_j)` with `φ = 1` on
/// `|t| ≤ 1/2`, `φ = 0` on `|t| ≥ 3/4`, and `exp(1 − 1/(1−u²))`,
/// `u = 4|t| − 2`, in between. Support inside `|ξ|_∞ ≤ 3/4` makes `σ_0 ≡ 1`
/// on `Q_{1/2}`, and `Σ_n σ_n ≡ 1` holds exactly by the normalization.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformPartition;

impl UniformPartition {
    pub fn new() -> Self {
        UniformPartition
    }

    /// One-dimensional window factor `φ(t)`.
    pub fn window(t: f64) -> f64 {
        let a = t.abs();
        if a <= 0.5 {
            1.0
        } else if a >= 0.75 {
            0.0
        } else {
            let u = 4.0 * a - 2.0;
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    /// `Σ_k φ(t − k)` (at most two nonzero terms).
    fn axis_denominator(t: f64) -> f64 {
        let k0 = t.floor() as i64;
        let mut total = 0.0;
        for k in k0 - 1..=k0 + 1 {
            total += Self::window(t - k as f64);
        }
        total
    }

    /// `σ_n(ξ)` for `n ∈ Z^d`.
    pub fn sigma(&self, n: &[i64], xi: &[f64]) -> f64 {
        let mut value = 1.0;
        for (&nj, &tj) in n.iter().zip(xi.iter()) {
            let num = Self::window(tj - nj as f64);
            if num == 0.0 {
                return 0.0;
            }
            value *= num / Self::axis_denominator(tj);
        }
        value
    }
}

/// `‖f‖_{M^{2,q}_s}` on the Fourier side: the `ℓ^q` norm over `n ∈ Z^d` of
/// `(1 + |n|)^s (h^d Σ_ξ σ_n(ξ)² |f(ξ)|²)^{1/2}`.
pub fn mod_norm(f: &GridFn, q: Exponent, s: f64) -> Result<f64> {
    mod_pieces_norm(f, q, s, None)
}

/// Modulation norm restricted to cubes with `|n| ≤ radius`.
pub fn low_freq_mod_norm(f: &GridFn, q: Exponent, s: f64, radius: f64) -> Result<f64> {
    mod_pieces_norm(f, q, s, Some(radius))
}

fn mod_pieces_norm(f: &GridFn, q: Exponent, s: f64, radius: Option<f64>) -> Result<f64> {
    q.validate()?;
    let lat = f.lattice();
    let d = lat.dim();
    let part = UniformPartition::new();
    let mut coords = [0.0; MAX_DIM];
    // piece masses Σ σ_n² |f|² h^d, keyed by the cube index n
    let mut pieces: HashMap<[i64; MAX_DIM], f64> = HashMap::new();
    let hd = lat.cell_volume();
    for (flat, v) in f.values().iter().enumerate() {
        let a2 = v.norm_sqr();
        if a2 == 0.0 {
            continue;
        }
        lat.coords(flat, &mut coords[..d]);
        // candidate n per axis: integers with |ξ_j − n_j| < 3/4
        let mut cands: [[i64; 2]; MAX_DIM] = [[0; 2]; MAX_DIM];
        let mut counts = [0usize; MAX_DIM];
        for a in 0..d {
            let lo = (coords[a] - 0.75).ceil() as i64;
            let hi = (coords[a] + 0.75).floor() as i64;
            let mut cnt = 0;
            for n in lo..=hi {
                if UniformPartition::window(coords[a] - n as f64) > 0.0 && cnt < 2 {
                    cands[a][cnt] = n;
                    cnt += 1;
                }
            }
            counts[a] = cnt;
        }
        let combos: usize = counts[..d].iter().product();
        for c in 0..combos {
            let mut rest = c;
            let mut n = [0i64; MAX_DIM];
            for a in 0..d {
                n[a] = cands[a][rest % counts[a]];
                rest /= counts[a];
            }
            let sig = part.sigma(&n[..d], &coords[..d]);
            if sig > 0.0 {
                *pieces.entry(n).or_insert(0.0) += sig * sig * a2 * hd;
            }
        }
    }
    let mut keys: Vec<_> = pieces.keys().cloned().collect();
    keys.sort_unstable();
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    for n in keys {
        let mass = pieces[&n];
        let norm_n: f64 = n[..d].iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        if let Some(r) = radius {
            if norm_n > r + 1e-12 {
                continue;
            }
        }
        let term = (1.0 + norm_n).powf(s) * mass.sqrt();
        match q {
            Exponent::Infinity => best = best.max(term),
            Exponent::Finite(q) => acc += term.powf(q),
        }
    }
    Ok(match q {
        Exponent::Infinity => best,
        Exponent::Finite(q) => acc.powf(1.0 / q),
    })
}

/// Fraction of the largest sample sitting within one cell of the lattice
/// boundary; a nonzero value means norms are truncation-affected.
pub fn boundary_mass_fraction(f: &GridFn) -> f64 {
    let lat = f.lattice();
    let half = lat.half();
    let d = lat.dim();
    let mut idx = [0i64; MAX_DIM];
    let mut edge: f64 = 0.0;
    let mut global: f64 = 0.0;
    for (flat, v) in f.values().iter().enumerate() {
        let a = v.norm();
        global = global.max(a);
        lat.signed_index(flat, &mut idx[..d]);
        if idx[..d].iter().any(|&j| j.abs() >= half) {
            edge = edge.max(a);
        }
    }
    if global == 0.0 {
        0.0
    } else {
        edge / global
    }
}

/// Closed-form regime value `f^p_s(A)`: `1` for `s < −d/p`, `(log A)^{1/p}`
/// at `s = −d/p`, `A^{d/p+s}` for `s > −d/p`; `1` for `p = ∞`.
pub fn closed_form_weight_mass(dim: usize, a_side: f64, p: Exponent, s: f64) -> f64 {
    let d = dim as f64;
    match p {
        Exponent::Infinity => 1.0,
        Exponent::Finite(p) => {
            let critical = -d / p;
            if s < critical {
                1.0
            } else if s == critical {
                a_side.ln().powf(1.0 / p)
            } else {
                a_side.powf(d / p + s)
            }
        }
    }
}

/// `(quadrature of ‖⟨·⟩^s‖_{L^p(Q_A)}, closed-form f^p_s(A))`.
///
/// Direct tensor quadrature; feasible sizes are guarded per dimension.
pub fn weight_mass(dim: usize, a_side: f64, p: Exponent, s: f64) -> Result<(f64, f64)> {
    if a_side < 1.0 {
        return Err(Error::Domain(format!("cube side must be at least 1, got {a_side}")));
    }
    if s >= 0.0 {
        return Err(Error::Domain(format!("weight mass regimes need s < 0, got {s}")));
    }
    let p_val = match p.validate()? {
        Exponent::Finite(v) => v,
        Exponent::Infinity => {
            // sup of ⟨·⟩^s over Q_A is at the origin
            return Ok((1.0, 1.0));
        }
    };
    let half = a_side / 2.0;
    let panels = ((a_side * 4.0) as usize).clamp(32, 4096);
    let quad = match dim {
        1 => 2.0 * integrate_1d(|x| bracket(x * x).powf(p_val * s), 0.0, half, panels),
        2 => {
            if a_side > 64.0 {
                return Err(Error::Config("2d weight-mass quadrature capped at A = 64".into()));
            }
            let inner_panels = panels.min(512);
            4.0 * integrate_1d(
                |x| {
                    integrate_1d(
                        |y| bracket(x * x + y * y).powf(p_val * s),
                        0.0,
                        half,
                        inner_panels,
                    )
                },
                0.0,
                half,
                inner_panels,
            )
        }
        3 => {
            if a_side > 8.0 {
                return Err(Error::Config("3d weight-mass quadrature capped at A = 8".into()));
            }
            8.0 * integrate_1d(
                |x| {
                    integrate_1d(
                        |y| {
                            integrate_1d(
                                |z| bracket(x * x + y * y + z * z).powf(p_val * s),
                                0.0,
                                half,
                                64,
                            )
                        },
                        0.0,
                        half,
                        64,
                    )
                },
                0.0,
                half,
                64,
            )
        }
        _ => return Err(Error::Domain(format!("weight mass implemented for d ≤ 3, got {dim}"))),
    };
    Ok((quad.powf(1.0 / p_val), closed_form_weight_mass(dim, a_side, p, s)))
}

/// Discrete analogue `‖(1+|n|)^s‖_{ℓ^q(0 ≤ |n| ≤ A)}` over integer points.
pub fn sequence_weight_mass(dim: usize, a_side: f64, q: Exponent, s: f64) -> Result<f64> {
    if a_side < 0.0 {
        return Err(Error::Domain("radius must be nonnegative".into()));
    }
    q.validate()?;
    if dim > 3 {
        return Err(Error::Domain("sequence weight mass implemented for d ≤ 3".into()));
    }
    let r = a_side.floor() as i64;
    let r_sq = a_side * a_side;
    let mut acc = 0.0;
    let mut best: f64 = 0.0;
    let mut visit = |n_sq: f64| {
        let term = (1.0 + n_sq.sqrt()).powf(s);
        match q {
            Exponent::Infinity => best = best.max(term),
            Exponent::Finite(q) => acc += term.powf(q),
        }
    };
    match dim {
        1 => {
            for i in -r..=r {
                visit((i * i) as f64);
            }
        }
        2 => {
            for i in -r..=r {
                for j in -r..=r {
                    let sq = (i * i + j * j) as f64;
                    if sq <= r_sq {
                        visit(sq);
                    }
                }
            }
        }
        _ => {
            for i in -r..=r {
                for j in -r..=r {
                    for k in -r..=r {
                        let sq = (i * i + j * j + k * k) as f64;
                        if sq <= r_sq {
                            visit(sq);
                        }
                    }
                }
            }
        }
    }
    Ok(match q {
        Exponent::Infinity => best,
        Exponent::Finite(q) => acc.powf(1.0 / q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{indicator, CubeUnion, FreqLattice};
    use approx::assert_abs_diff_eq;

    #[test]
    fn partition_of_unity_sums_to_one() {
        let part = UniformPartition::new();
        for &t in &[0.0, 0.1, 0.49999, 0.5, 0.62, 0.75, 1.3, -2.71] {
            for &u in &[0.0, 0.33, -0.74] {
                let xi = [t, u];
                let mut total = 0.0;
                for n0 in -4..=4 {
                    for n1 in -4..=4 {
                        total += part.sigma(&[n0, n1], &xi);
                    }
                }
                assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fl_norm_weighted_indicator_matches_arctan() {
        // d=1, p=2, s=−1, f = χ_{Q_4}: ‖f‖ = (2 arctan 2)^{1/2} ≈ 1.4881
        let lat = FreqLattice::new(1, 1.0 / 32.0, 513).unwrap();
        let f = indicator(&CubeUnion::new(4.0, vec![vec![0.0]]).unwrap(), 1.0, &lat).unwrap();
        let n = fl_norm(&f, Exponent::Finite(2.0), -1.0).unwrap();
        assert_abs_diff_eq!(n, (2.0 * 2f64.atan()).sqrt(), epsilon = 2e-3);
    }

    #[test]
    fn fl_norm_rejects_small_p_and_is_monotone_in_s() {
        let lat = FreqLattice::new(1, 0.25, 65).unwrap();
        let f = indicator(&CubeUnion::new(2.0, vec![vec![3.0]]).unwrap(), 1.0, &lat).unwrap();
        assert!(fl_norm(&f, Exponent::Finite(0.5), 0.0).is_err());
        let mut prev = 0.0;
        for s in [-2.0, -1.0, 0.0, 0.5, 1.0] {
            let n = fl_norm(&f, Exponent::Finite(2.0), s).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn mod_norm_of_small_centered_indicator_is_exact() {
        // f = χ_{[-1/4,1/4)}: only n = 0 contributes under this window and
        // σ_0 ≡ 1 there, so the norm is the square root of the cube mass.
        let lat = FreqLattice::new(1, 1.0 / 8.0, 129).unwrap();
        let f = indicator(&CubeUnion::new(0.5, vec![vec![0.0]]).unwrap(), 1.0, &lat).unwrap();
        for q in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity] {
            let n = mod_norm(&f, q, -0.7).unwrap();
            assert_abs_diff_eq!(n, 0.5f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn weight_mass_closed_forms() {
        // constant regime
        let (_, cf) = weight_mass(1, 16.0, Exponent::Finite(2.0), -2.0).unwrap();
        assert_eq!(cf, 1.0);
        // logarithmic regime at s = −d/p
        let (_, cf) = weight_mass(1, 16.0, Exponent::Finite(2.0), -0.5).unwrap();
        assert_abs_diff_eq!(cf, 16f64.ln().sqrt(), epsilon = 1e-14);
        // power regime
        let (_, cf) = weight_mass(1, 64.0, Exponent::Finite(2.0), -0.25).unwrap();
        assert_abs_diff_eq!(cf, 64f64.powf(0.25), epsilon = 1e-12);
        assert!(weight_mass(1, 0.5, Exponent::Finite(2.0), -1.0).is_err());
    }

    #[test]
    fn weight_mass_quadrature_tracks_closed_form() {
        // d=1, p=2, s=−1/4: quadrature / A^{d/p+s} stays in a fixed band as A doubles
        let mut ratios = Vec::new();
        let mut a = 8.0;
        while a <= 128.0 {
            let (quad, cf) = weight_mass(1, a, Exponent::Finite(2.0), -0.25).unwrap();
            ratios.push(quad / cf);
            a *= 2.0;
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(hi / lo < 1.5, "ratios {ratios:?}");
    }

    #[test]
    fn sequence_weight_mass_values() {
        // single term at the origin
        assert_abs_diff_eq!(
            sequence_weight_mass(1, 0.9, Exponent::Finite(3.0), -1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // d=1, q=1, s=−1, A=8: 1 + 2 Σ_{n=1..8} 1/(1+n)
        let expect = 1.0 + 2.0 * (2..=9).map(|k| 1.0 / k as f64).sum::<f64>();
        assert_abs_diff_eq!(
            sequence_weight_mass(1, 8.0, Exponent::Finite(1.0), -1.0).unwrap(),
            expect,
            epsilon = 1e-13
        );
        // s < −d/q: bounded uniformly in A by the convergent series
        // (1 + 2(ζ(2.5) − 1) ≈ 1.683)
        let big = sequence_weight_mass(1, 4096.0, Exponent::Finite(1.0), -2.5).unwrap();
        let bigger = sequence_weight_mass(1, 16384.0, Exponent::Finite(1.0), -2.5).unwrap();
        assert!(big < 1.7 && bigger < 1.7 && (bigger - big).abs() < 1e-3);
    }
}
