//! Zero-padded FFT convolution on centered lattices.
//!
//! Lattice convolutions here are *linear*, never periodic: each axis is
//! zero-padded to at least `3M − 2` points before the transform-based product,
//! so even a triple convolution (support three times the data support) cannot
//! wrap around. Results are restricted back to the original lattice box.
//!
//! Padded buffers use the wrap-index convention: the centered axis index
//! `j ∈ [−(M−1)/2, (M−1)/2]` is stored at `j mod P`. Circular convolution then
//! places `j₁ + j₂` exactly at `(j₁ + j₂) mod P`, which is alias-free as long
//! as accumulated supports stay inside `(−P/2, P/2)`.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::lattice::{FreqLattice, GridFn};

type PlanMap = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLAN_CACHE: RefCell<PlanMap> = RefCell::new(HashMap::new());
}

fn plan(len: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLAN_CACHE.with(|cache| {
        cache
            .borrow_mut()
            .entry((len, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(len)
                } else {
                    planner.plan_fft_inverse(len)
                }
            })
            .clone()
    })
}

/// In-place FFT along every axis of a flat row-major array with cubic shape
/// `p^dim`. `rustfft` transforms are unnormalized; callers account for the
/// `1/p^dim` of each inverse pass.
fn fft_all_axes(buf: &mut [Complex64], dim: usize, p: usize, direction: FftDirection) {
    let fft = plan(p, direction == FftDirection::Forward);
    let total = buf.len();
    debug_assert_eq!(total, p.pow(dim as u32));
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::default(); p];
    for axis in 0..dim {
        // stride between consecutive entries along `axis`, row-major
        let stride = p.pow((dim - 1 - axis) as u32);
        let lines = total / p;
        for l in 0..lines {
            // Decompose the line id into (outer block, inner offset).
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * stride * p + inner;
            if stride == 1 {
                let row = &mut buf[base..base + p];
                fft.process_with_scratch(row, &mut scratch);
            } else {
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = buf[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, slot) in line.iter().enumerate() {
                    buf[base + k * stride] = *slot;
                }
            }
        }
    }
}

/// Convolution workspace tied to a lattice: padded cubic grid of side `p`
/// with `p ≥ 3M − 2` a power of two.
pub struct ConvEngine {
    dim: usize,
    m: usize,
    half: i64,
    p: usize,
    padded_len: usize,
}

impl ConvEngine {
    pub fn new(lattice: &FreqLattice) -> Self {
        let m = lattice.points_per_axis();
        let p = (3 * m - 2).next_power_of_two();
        ConvEngine {
            dim: lattice.dim(),
            m,
            half: ((m - 1) / 2) as i64,
            p,
            padded_len: p.pow(lattice.dim() as u32),
        }
    }

    pub fn padded_side(&self) -> usize {
        self.p
    }

    pub fn padded_len(&self) -> usize {
        self.padded_len
    }

    fn wrap(&self, j: i64) -> usize {
        if j < 0 {
            (j + self.p as i64) as usize
        } else {
            j as usize
        }
    }

    /// Centered axis index of a padded slot, in `(−P/2, P/2]`.
    fn unwrap_index(&self, u: usize) -> i64 {
        if u <= self.p / 2 {
            u as i64
        } else {
            u as i64 - self.p as i64
        }
    }

    fn pad(&self, values: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::default());
        let mut idx = vec![0i64; self.dim];
        for (flat, &v) in values.iter().enumerate() {
            self.decompose(flat, &mut idx);
            let mut padded = 0usize;
            for &j in idx.iter() {
                padded = padded * self.p + self.wrap(j);
            }
            out[padded] = v;
        }
    }

    /// Same as [`pad`], but stores the conjugate reflection `conj(f(−ξ))`.
    fn pad_conj_reflect(&self, values: &[Complex64], out: &mut [Complex64]) {
        out.fill(Complex64::default());
        let mut idx = vec![0i64; self.dim];
        for (flat, &v) in values.iter().enumerate() {
            self.decompose(flat, &mut idx);
            let mut padded = 0usize;
            for &j in idx.iter() {
                padded = padded * self.p + self.wrap(-j);
            }
            out[padded] = v.conj();
        }
    }

    fn decompose(&self, flat: usize, idx: &mut [i64]) {
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            idx[a] = (rest % self.m) as i64 - self.half;
            rest /= self.m;
        }
    }

    fn extract(&self, buf: &[Complex64], scale: f64) -> Vec<Complex64> {
        let len = self.m.pow(self.dim as u32);
        let mut values = vec![Complex64::default(); len];
        let mut idx = vec![0i64; self.dim];
        for (flat, v) in values.iter_mut().enumerate() {
            self.decompose(flat, &mut idx);
            let mut padded = 0usize;
            for &j in idx.iter() {
                padded = padded * self.p + self.wrap(j);
            }
            *v = buf[padded] * scale;
        }
        values
    }

    /// Evaluate a radial-symbol closure on every padded slot (centered
    /// coordinates `h·j`, `j ∈ (−P/2, P/2]`).
    pub fn padded_symbol(&self, h: f64, mut symbol: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.padded_len];
        let mut coords = vec![0.0; self.dim];
        for (u, slot) in out.iter_mut().enumerate() {
            let mut rest = u;
            for a in (0..self.dim).rev() {
                coords[a] = self.unwrap_index(rest % self.p) as f64 * h;
                rest /= self.p;
            }
            *slot = symbol(&coords);
        }
        out
    }

    /// Single lattice convolution `(f ∗ g)(ξ) = h^d Σ_η f(η) g(ξ−η)`.
    pub fn convolve(&self, f: &GridFn, g: &GridFn) -> GridFn {
        let hd = f.lattice().cell_volume();
        let mut a = vec![Complex64::default(); self.padded_len];
        let mut b = vec![Complex64::default(); self.padded_len];
        self.pad(f.values(), &mut a);
        self.pad(g.values(), &mut b);
        fft_all_axes(&mut a, self.dim, self.p, FftDirection::Forward);
        fft_all_axes(&mut b, self.dim, self.p, FftDirection::Forward);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= *y;
        }
        fft_all_axes(&mut a, self.dim, self.p, FftDirection::Inverse);
        let scale = hd / self.padded_len as f64;
        GridFn::from_values(f.lattice().clone(), self.extract(&a, scale))
    }

    /// Fused trilinear pipeline on the padded grid:
    /// `out = (multiplier ⊙ (f ∗ conj_reflect(g))) ∗ h`, with the intermediate
    /// kept unrestricted so the final restriction is the only truncation.
    pub fn trilinear(
        &self,
        f: &GridFn,
        g: &GridFn,
        h: &GridFn,
        multiplier: Option<&[f64]>,
    ) -> GridFn {
        let hd = f.lattice().cell_volume();
        let mut a = vec![Complex64::default(); self.padded_len];
        let mut b = vec![Complex64::default(); self.padded_len];
        self.pad(f.values(), &mut a);
        self.pad_conj_reflect(g.values(), &mut b);
        fft_all_axes(&mut a, self.dim, self.p, FftDirection::Forward);
        fft_all_axes(&mut b, self.dim, self.p, FftDirection::Forward);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= *y;
        }
        fft_all_axes(&mut a, self.dim, self.p, FftDirection::Inverse);
        // a now holds P^d · (f ∗ ĝ) up to the h^d quadrature weight; fold the
        // normalization in while applying the symbol.
        let inner_scale = hd / self.padded_len as f64;
        match multiplier {
            Some(sym) => {
                for (x, &s) in a.iter_mut().zip(sym.iter()) {
                    *x *= s * inner_scale;
                }
            }
            None => {
                for x in a.iter_mut() {
                    *x *= inner_scale;
                }
            }
        }
        self.pad(h.values(), &mut b);
        fft_all_axes(&mut a, self.dim, self.p, FftDirection::Forward);
        fft_all_axes(&mut b, self.dim, self.p, FftDirection::Forward);
        for (x, y) in a.iter_mut().zip(b.iter()) {
            *x *= *y;
        }
        fft_all_axes(&mut a, self.dim, self.p, FftDirection::Inverse);
        let scale = hd / self.padded_len as f64;
        GridFn::from_values(f.lattice().clone(), self.extract(&a, scale))
    }
}
