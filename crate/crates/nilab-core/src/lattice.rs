//! Centered frequency lattices, grid functions, cube unions, and the Fourier
//! multipliers shared by every other module.
//!
//! A lattice has an odd number `M` of points per axis at spacing `h`, so the
//! origin is always a node and the covered box is `[−Mh/2, Mh/2)^d`. Grid
//! functions carry complex Fourier-side densities; any quadrature over the
//! lattice uses the cell weight `h^d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::c_alpha;
use crate::error::{Error, Result};
use crate::fftconv::ConvEngine;

/// Practical dimension cap for the dense grids used here.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqLattice {
    dim: usize,
    spacing: f64,
    points_per_axis: usize,
}

impl FreqLattice {
    pub fn new(dim: usize, spacing: f64, points_per_axis: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Domain(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Domain(format!("lattice spacing must be positive, got {spacing}")));
        }
        if points_per_axis % 2 == 0 {
            return Err(Error::Config(format!(
                "points per axis must be odd so the origin is a node, got {points_per_axis}"
            )));
        }
        let len = (points_per_axis as u128).pow(dim as u32);
        if len > (1 << 27) {
            return Err(Error::Config(format!(
                "lattice too large: {points_per_axis}^{dim} = {len} nodes"
            )));
        }
        Ok(FreqLattice { dim, spacing, points_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Signed axis index range is `-half ..= half`.
    pub fn half(&self) -> i64 {
        ((self.points_per_axis - 1) / 2) as i64
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Half-width of the covered box `[−Mh/2, Mh/2)^d`.
    pub fn box_radius(&self) -> f64 {
        self.points_per_axis as f64 * self.spacing / 2.0
    }

    /// Signed per-axis indices of a flat node id (row-major).
    pub fn signed_index(&self, flat: usize, out: &mut [i64]) {
        debug_assert_eq!(out.len(), self.dim);
        let mut rest = flat;
        let half = self.half();
        for a in (0..self.dim).rev() {
            out[a] = (rest % self.points_per_axis) as i64 - half;
            rest /= self.points_per_axis;
        }
    }

    pub fn coords(&self, flat: usize, out: &mut [f64]) {
        let mut idx = [0i64; MAX_DIM];
        self.signed_index(flat, &mut idx[..self.dim]);
        for a in 0..self.dim {
            out[a] = idx[a] as f64 * self.spacing;
        }
    }

    /// Flat id from signed per-axis indices; `None` when outside the lattice.
    pub fn flat_from_signed(&self, idx: &[i64]) -> Option<usize> {
        let half = self.half();
        let mut flat = 0usize;
        for &j in idx {
            if j < -half || j > half {
                return None;
            }
            flat = flat * self.points_per_axis + (j + half) as usize;
        }
        Some(flat)
    }

    pub fn norm_of(&self, flat: usize) -> f64 {
        let mut idx = [0i64; MAX_DIM];
        self.signed_index(flat, &mut idx[..self.dim]);
        let mut sq = 0.0;
        for &j in &idx[..self.dim] {
            let x = j as f64 * self.spacing;
            sq += x * x;
        }
        sq.sqrt()
    }
}

/// Complex samples of a Fourier-side density on a [`FreqLattice`].
#[derive(Debug, Clone)]
pub struct GridFn {
    lattice: FreqLattice,
    values: Vec<Complex64>,
}

impl GridFn {
    pub fn zeros(lattice: FreqLattice) -> Self {
        let len = lattice.len();
        GridFn { lattice, values: vec![Complex64::default(); len] }
    }

    pub fn from_values(lattice: FreqLattice, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), lattice.len(), "value vector must have M^d entries");
        GridFn { lattice, values }
    }

    pub fn lattice(&self) -> &FreqLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product, consuming neither operand.
    pub fn pointwise_mul(&self, other: &GridFn) -> Result<GridFn> {
        same_lattice(self, other)?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a * b)
            .collect();
        Ok(GridFn::from_values(self.lattice.clone(), values))
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    pub fn accumulate(&mut self, other: &GridFn, weight: Complex64) {
        debug_assert_eq!(self.values.len(), other.values.len());
        for (a, b) in self.values.iter_mut().zip(other.values.iter()) {
            *a += weight * b;
        }
    }
}

fn same_lattice(f: &GridFn, g: &GridFn) -> Result<()> {
    if f.lattice != g.lattice {
        return Err(Error::Config("grid functions live on different lattices".into()));
    }
    Ok(())
}

/// `Ω = ∪_{η∈Σ} (η + Q_A)` with the half-open cube `Q_A = [−A/2, A/2)^d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubeUnion {
    side: f64,
    centers: Vec<Vec<f64>>,
}

impl CubeUnion {
    pub fn new(side: f64, centers: Vec<Vec<f64>>) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::Domain(format!("cube side must be positive, got {side}")));
        }
        if centers.is_empty() {
            return Err(Error::Domain("cube union needs at least one center".into()));
        }
        let dim = centers[0].len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Domain(format!("center dimension {dim} outside 1..={MAX_DIM}")));
        }
        if centers.iter().any(|c| c.len() != dim) {
            return Err(Error::Config("centers of mixed dimension".into()));
        }
        Ok(CubeUnion { side, centers })
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn dim(&self) -> usize {
        self.centers[0].len()
    }

    /// Index of the cube containing `point` (half-open convention), if any.
    pub fn containing_cube(&self, point: &[f64]) -> Option<usize> {
        let half = self.side / 2.0;
        let tol = 1e-9 * self.side;
        'cubes: for (i, c) in self.centers.iter().enumerate() {
            for (x, ctr) in point.iter().zip(c.iter()) {
                let lo = ctr - half;
                let hi = ctr + half;
                if *x < lo - tol || *x >= hi - tol {
                    continue 'cubes;
                }
            }
            return Some(i);
        }
        None
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.containing_cube(point).is_some()
    }

    /// `a(Ω) = dist(0, Ω)`, exact from the cube geometry (infimum over the
    /// closure, which agrees with the half-open infimum).
    pub fn a_omega(&self) -> f64 {
        let half = self.side / 2.0;
        let mut best = f64::INFINITY;
        for c in &self.centers {
            let mut sq = 0.0;
            for &x in c {
                let gap = (x.abs() - half).max(0.0);
                sq += gap * gap;
            }
            best = best.min(sq.sqrt());
        }
        best
    }

    /// All `2^d` corner points of every cube.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let half = self.side / 2.0;
        let mut out = Vec::with_capacity(self.centers.len() << d);
        for c in &self.centers {
            for mask in 0..(1usize << d) {
                let mut v = c.clone();
                for (a, x) in v.iter_mut().enumerate() {
                    *x += if mask >> a & 1 == 1 { half } else { -half };
                }
                out.push(v);
            }
        }
        out
    }

    /// Largest coordinate magnitude over all cube closures; sizes lattices.
    pub fn max_coord(&self) -> f64 {
        let half = self.side / 2.0;
        self.centers
            .iter()
            .flat_map(|c| c.iter())
            .map(|x| x.abs() + half)
            .fold(0.0, f64::max)
    }

    /// Pairwise disjointness of the cubes (sufficient check on the closures
    /// up to a relative tolerance).
    pub fn cubes_disjoint(&self) -> bool {
        let n = self.centers.len();
        for i in 0..n {
            for j in i + 1..n {
                let overlap = self.centers[i]
                    .iter()
                    .zip(self.centers[j].iter())
                    .all(|(a, b)| (a - b).abs() < self.side * (1.0 - 1e-12));
                if overlap {
                    return false;
                }
            }
        }
        true
    }
}

/// Fourier-side indicator data `R χ_Ω` sampled on the lattice.
///
/// Requires `h | A` so cube boundaries align with cells, and every cube inside
/// the covered box.
pub fn indicator(omega: &CubeUnion, amplitude: f64, lattice: &FreqLattice) -> Result<GridFn> {
    if omega.dim() != lattice.dim() {
        return Err(Error::Config(format!(
            "cube union dimension {} vs lattice dimension {}",
            omega.dim(),
            lattice.dim()
        )));
    }
    let cells = omega.side() / lattice.spacing();
    if (cells - cells.round()).abs() > 1e-9 * cells.max(1.0) {
        return Err(Error::Config(format!(
            "lattice spacing {} does not divide the cube side {}",
            lattice.spacing(),
            omega.side()
        )));
    }
    let box_r = lattice.box_radius();
    if omega.max_coord() > box_r + 1e-9 * box_r {
        return Err(Error::Range(format!(
            "cube union reaches {} but the lattice box is [{}, {})",
            omega.max_coord(),
            -box_r,
            box_r
        )));
    }
    let mut grid = GridFn::zeros(lattice.clone());
    let mut coords = [0.0; MAX_DIM];
    let d = lattice.dim();
    for flat in 0..lattice.len() {
        lattice.coords(flat, &mut coords[..d]);
        if omega.contains(&coords[..d]) {
            grid.values_mut()[flat] = Complex64::new(amplitude, 0.0);
        }
    }
    Ok(grid)
}

/// Flat node ids inside each cube of `Ω`.
pub fn cube_node_lists(omega: &CubeUnion, lattice: &FreqLattice) -> Result<Vec<Vec<usize>>> {
    if omega.dim() != lattice.dim() {
        return Err(Error::Config("dimension mismatch".into()));
    }
    let d = lattice.dim();
    let mut lists = vec![Vec::new(); omega.centers().len()];
    let mut coords = [0.0; MAX_DIM];
    for flat in 0..lattice.len() {
        lattice.coords(flat, &mut coords[..d]);
        if let Some(c) = omega.containing_cube(&coords[..d]) {
            lists[c].push(flat);
        }
    }
    Ok(lists)
}

/// Lattice convolution `(f ∗ g)(ξ) = h^d Σ_η f(η) g(ξ−η)` without periodic
/// wrap-around, restricted back to the original box.
pub fn convolve(f: &GridFn, g: &GridFn) -> Result<GridFn> {
    same_lattice(f, g)?;
    Ok(ConvEngine::new(f.lattice()).convolve(f, g))
}

/// `conj_reflect(f)(ξ) = conj(f(−ξ))`; the Fourier transform of the complex
/// conjugate. Origin-centered lattices are closed under `ξ ↦ −ξ`.
pub fn conj_reflect(f: &GridFn) -> GridFn {
    let lat = f.lattice().clone();
    let d = lat.dim();
    let mut out = GridFn::zeros(lat.clone());
    let mut idx = [0i64; MAX_DIM];
    for flat in 0..lat.len() {
        lat.signed_index(flat, &mut idx[..d]);
        for j in idx[..d].iter_mut() {
            *j = -*j;
        }
        let mirror = lat.flat_from_signed(&idx[..d]).expect("mirror node is on the lattice");
        out.values_mut()[mirror] = f.values()[flat].conj();
    }
    out
}

/// Value of the Riesz symbol `|ξ|^{γ−d}` with the origin cell regularized.
///
/// For `γ = d` the symbol is the constant 1. At the origin node the value is
/// the average of the (locally integrable) symbol over the cell `Q_h`: exact
/// in one dimension, a 5^d midpoint-of-radius rule for `d ≥ 2` (the central
/// sample is taken at radius `h/4` instead of 0).
pub fn riesz_symbol_value(h: f64, dim: usize, gamma: f64, coords: &[f64]) -> f64 {
    if gamma == dim as f64 {
        return 1.0;
    }
    let exp = gamma - dim as f64;
    let norm_sq: f64 = coords.iter().map(|x| x * x).sum();
    if norm_sq > (1e-12 * h) * (1e-12 * h) {
        return norm_sq.sqrt().powf(exp);
    }
    if dim == 1 {
        // (1/h) ∫_{-h/2}^{h/2} |ξ|^{γ-1} dξ = 2^{1-γ} h^{γ-1} / γ
        return 2f64.powf(1.0 - gamma) * h.powf(gamma - 1.0) / gamma;
    }
    let offsets = [-0.4, -0.2, 0.0, 0.2, 0.4];
    let mut total = 0.0;
    let count = 5usize.pow(dim as u32);
    for k in 0..count {
        let mut rest = k;
        let mut sq = 0.0;
        for _ in 0..dim {
            let o = offsets[rest % 5] * h;
            sq += o * o;
            rest /= 5;
        }
        let r = sq.sqrt().max(h / 4.0);
        total += r.powf(exp);
    }
    total / count as f64
}

/// Riesz potential multiplier `|ξ|^{γ−d}` on the lattice, `0 < γ ≤ d`.
pub fn riesz_multiplier(lattice: &FreqLattice, gamma: f64) -> Result<GridFn> {
    let d = lattice.dim() as f64;
    if !(gamma > 0.0 && gamma <= d) {
        return Err(Error::Domain(format!("gamma = {gamma} outside (0, {d}]")));
    }
    let mut grid = GridFn::zeros(lattice.clone());
    let mut coords = [0.0; MAX_DIM];
    let dim = lattice.dim();
    for flat in 0..lattice.len() {
        lattice.coords(flat, &mut coords[..dim]);
        let v = riesz_symbol_value(lattice.spacing(), dim, gamma, &coords[..dim]);
        grid.values_mut()[flat] = Complex64::new(v, 0.0);
    }
    Ok(grid)
}

/// Free-propagator multiplier `e^{i c_α t |ξ|^α}`, `c_α = (2π)^α`.
pub fn fractional_phase(lattice: &FreqLattice, alpha: f64, t: f64) -> Result<GridFn> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let c = c_alpha(alpha);
    let mut grid = GridFn::zeros(lattice.clone());
    for flat in 0..lattice.len() {
        let r = lattice.norm_of(flat);
        let phase = c * t * r.powf(alpha);
        grid.values_mut()[flat] = Complex64::from_polar(1.0, phase);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lat1d(h: f64, m: usize) -> FreqLattice {
        FreqLattice::new(1, h, m).unwrap()
    }

    #[test]
    fn origin_is_a_node_and_indices_round_trip() {
        let lat = FreqLattice::new(2, 0.25, 9).unwrap();
        let origin = lat.flat_from_signed(&[0, 0]).unwrap();
        assert_eq!(lat.norm_of(origin), 0.0);
        let mut idx = [0i64; 2];
        for flat in 0..lat.len() {
            lat.signed_index(flat, &mut idx);
            assert_eq!(lat.flat_from_signed(&idx), Some(flat));
        }
    }

    #[test]
    fn indicator_center_and_outside() {
        let lat = lat1d(0.25, 129);
        let omega = CubeUnion::new(1.0, vec![vec![4.0]]).unwrap();
        let grid = indicator(&omega, 1.0, &lat).unwrap();
        let at = |x: f64| grid.values()[lat.flat_from_signed(&[(x / 0.25) as i64]).unwrap()];
        assert_eq!(at(4.0).re, 1.0);
        assert_eq!(at(0.0).re, 0.0);
        // half-open: left face included, right face excluded
        assert_eq!(at(3.5).re, 1.0);
        assert_eq!(at(4.5).re, 0.0);
    }

    #[test]
    fn indicator_rejects_unaligned_spacing_and_out_of_box() {
        let lat = lat1d(0.3, 65);
        let omega = CubeUnion::new(1.0, vec![vec![2.0]]).unwrap();
        assert!(matches!(indicator(&omega, 1.0, &lat), Err(Error::Config(_))));
        let lat = lat1d(0.25, 33);
        let omega = CubeUnion::new(1.0, vec![vec![40.0]]).unwrap();
        assert!(matches!(indicator(&omega, 1.0, &lat), Err(Error::Range(_))));
    }

    #[test]
    fn indicator_quadrature_mass_two_cubes() {
        // Σ = {N e1, 2N e1}, N = 8, A = 1: mass h Σ values = R · 2 A^d,
        // exactly on an aligned lattice.
        let lat = lat1d(0.25, 257);
        let omega = CubeUnion::new(1.0, vec![vec![8.0], vec![16.0]]).unwrap();
        let grid = indicator(&omega, 1.0, &lat).unwrap();
        let mass: f64 = grid.values().iter().map(|v| v.re).sum::<f64>() * 0.25;
        assert_abs_diff_eq!(mass, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn convolution_of_unit_cubes_is_a_tent() {
        // d = 1, A = 1: the continuum profile is max(0, 1 − |ξ − η1 − η2|).
        // Half-open cube sampling shifts the discrete tent by exactly one
        // cell, so the node values match the shifted tent to rounding and the
        // continuum tent to O(h).
        let h = 0.25;
        let lat = lat1d(h, 129);
        let a = indicator(&CubeUnion::new(1.0, vec![vec![2.0]]).unwrap(), 1.0, &lat).unwrap();
        let b = indicator(&CubeUnion::new(1.0, vec![vec![-3.0]]).unwrap(), 1.0, &lat).unwrap();
        let conv = convolve(&a, &b).unwrap();
        let mut coords = [0.0];
        for flat in 0..lat.len() {
            lat.coords(flat, &mut coords);
            let discrete = (1.0 - (coords[0] + 1.0 + h).abs()).max(0.0);
            let continuum = (1.0 - (coords[0] + 1.0).abs()).max(0.0);
            assert_abs_diff_eq!(conv.values()[flat].re, discrete, epsilon = 1e-10);
            assert!((conv.values()[flat].re - continuum).abs() <= h + 1e-10);
            assert_abs_diff_eq!(conv.values()[flat].im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn convolution_self_overlap_attains_side_volume() {
        // overlap volume A^d is attained exactly at the discrete center
        // (one cell off the continuum one); the peak equals A^d to rounding
        let lat = FreqLattice::new(2, 0.5, 17).unwrap();
        let q = indicator(&CubeUnion::new(2.0, vec![vec![0.0, 0.0]]).unwrap(), 1.0, &lat).unwrap();
        let conv = convolve(&q, &q).unwrap();
        let peak = conv.max_abs();
        assert_abs_diff_eq!(peak, 4.0, epsilon = 1e-10);
        let shifted = lat.flat_from_signed(&[-1, -1]).unwrap();
        assert_abs_diff_eq!(conv.values()[shifted].re, 4.0, epsilon = 1e-10);
        // value at the continuum center is one cell down the slope per axis
        let origin = lat.flat_from_signed(&[0, 0]).unwrap();
        assert_abs_diff_eq!(conv.values()[origin].re, (2.0f64 - 0.5).powi(2), epsilon = 1e-10);
    }

    #[test]
    fn conj_reflect_involution_and_spike() {
        let lat = lat1d(0.5, 33);
        let mut f = GridFn::zeros(lat.clone());
        let at = lat.flat_from_signed(&[6]).unwrap();
        f.values_mut()[at] = Complex64::new(1.0, 1.0);
        let r = conj_reflect(&f);
        let mirrored = lat.flat_from_signed(&[-6]).unwrap();
        assert_eq!(r.values()[mirrored], Complex64::new(1.0, -1.0));
        let rr = conj_reflect(&r);
        for (x, y) in rr.values().iter().zip(f.values().iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn riesz_multiplier_values() {
        let lat = lat1d(1.0, 17);
        // gamma = d: constant 1
        let unit = riesz_multiplier(&lat, 1.0).unwrap();
        assert!(unit.values().iter().all(|v| v.re == 1.0));
        // gamma = 1/2: |4|^{-1/2} = 1/2 away from 0, cell average 2√2 at 0
        let half = riesz_multiplier(&lat, 0.5).unwrap();
        let at4 = lat.flat_from_signed(&[4]).unwrap();
        assert_abs_diff_eq!(half.values()[at4].re, 0.5, epsilon = 1e-14);
        let origin = lat.flat_from_signed(&[0]).unwrap();
        assert_abs_diff_eq!(half.values()[origin].re, 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert!(riesz_multiplier(&lat, 1.5).is_err());
        // finite, positive, radially nonincreasing for gamma < d
        let mut prev = f64::INFINITY;
        for j in 0..=8 {
            let v = half.values()[lat.flat_from_signed(&[j]).unwrap()].re;
            assert!(v.is_finite() && v > 0.0 && v <= prev);
            prev = v;
        }
    }

    #[test]
    fn fractional_phase_values() {
        let lat = lat1d(1.0, 9);
        let still = fractional_phase(&lat, 2.0, 0.0).unwrap();
        assert!(still.values().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() == 0.0));
        let moving = fractional_phase(&lat, 2.0, 1.0).unwrap();
        for v in moving.values() {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-14);
        }
        let at1 = lat.flat_from_signed(&[1]).unwrap();
        let expect = Complex64::from_polar(1.0, (2.0 * std::f64::consts::PI).powi(2));
        assert_abs_diff_eq!((moving.values()[at1] - expect).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn a_omega_from_cube_geometry() {
        let omega = CubeUnion::new(1.0, vec![vec![8.0], vec![16.0]]).unwrap();
        assert_abs_diff_eq!(omega.a_omega(), 7.5, epsilon = 1e-15);
        let through_origin = CubeUnion::new(2.0, vec![vec![0.5, 0.0]]).unwrap();
        assert_eq!(through_origin.a_omega(), 0.0);
    }
}
