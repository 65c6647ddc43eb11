//! Frequency-lattice numerics for norm-inflation experiments with the
//! fractional Hartree / cubic NLS family
//!
//! ```text
//! i ∂_t ψ − (−Δ)^{α/2} ψ = μ (K ∗ |ψ|²) ψ,      F K = |·|^{γ−d},  0 < γ ≤ d,
//! ```
//!
//! where everything is computed on the Fourier side. The crate provides
//!
//! * [`lattice`] — centered frequency lattices, complex grid functions,
//!   zero-padded lattice convolution, and the Fourier multipliers (fractional
//!   phase `e^{i c_α t |ξ|^α}` with `c_α = (2π)^α`, Riesz symbol `|ξ|^{γ−d}`),
//! * [`norms`] — Fourier-Lebesgue norms `‖⟨·⟩^s F f‖_{L^p}`, modulation norms
//!   via a frequency-uniform partition of unity, and the weight-mass
//!   asymptotics `f^p_s(A)`,
//! * [`picard`] — the trilinear Hartree operator, Picard iterates `U_k` of the
//!   Duhamel power series, a brute-force oracle for `U_3`, and the resonant /
//!   non-resonant splitting of `U_3`,
//! * [`resonance`] — resonant frequency triples `v_1 + v_2 = v_3`,
//!   `|v_1|^α + |v_2|^α = |v_3|^α`, the dispersion-exponent classification
//!   `E_d`, and cone geometry for Fourier supports,
//! * [`regimes`] — critical indices, the piecewise inflation classifiers, and
//!   constructive exponent certificates checked in exact rational arithmetic.
//!
//! The Fourier convention is `F f(w) = ∫ f(t) e^{−2πi t·w} dt` throughout,
//! which fixes `c_α = (2π)^α`.

pub mod error;
pub mod fftconv;
pub mod lattice;
pub mod norms;
pub mod picard;
pub mod quad;
pub mod rational;
pub mod regimes;
pub mod resonance;

pub use error::{Error, Result};
pub use lattice::{CubeUnion, FreqLattice, GridFn};
pub use norms::{NormSpec, Space, UniformPartition};
pub use picard::{ModelParams, PicardStack};
pub use regimes::{ExponentCertificate, RegimePoint, Scheme, Verdict};
pub use resonance::ResonantTriple;

/// Dispersion constant `c_α = (2π)^α` of the free propagator
/// `F U(t)ψ₀ = e^{i c_α t |ξ|^α} F ψ₀`.
pub fn c_alpha(alpha: f64) -> f64 {
    (2.0 * std::f64::consts::PI).powf(alpha)
}
