//! Error taxonomy shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent setup: mismatched lattices, spacing not dividing the cube
    /// side, bad sweep, oversized grids.
    #[error("configuration error: {0}")]
    Config(String),

    /// Geometry falls outside the lattice box.
    #[error("range error: {0}")]
    Range(String),

    /// Parameter outside the admissible domain (γ ∉ (0,d], p < 1, α ≤ 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Brute-force oracle refused: tuple count above the configured budget.
    #[error("oracle budget exceeded: {needed} tuples > budget {budget}")]
    OracleBudget { needed: u128, budget: u128 },

    /// Power-series smallness precondition fails, so the truncated solution is
    /// not certified convergent.
    #[error(
        "series not certified convergent: T a^(gamma-d) |psi0|_FL1^2 = {value:.6e} exceeds threshold {threshold}"
    )]
    NotContractive { value: f64, threshold: f64 },

    /// The support union does not fit in any admissible cone.
    #[error("cone check failed: vertex {vertex:?} at angle {angle:.6} rad from the best axis (limit pi/3)")]
    ConeCheck { vertex: Vec<f64>, angle: f64 },

    /// 1D resonance equation |a|^α + |1−a|^α = 1 rejects this interior `a`.
    #[error("non-resonant parameter a = {a_param} at alpha = {alpha}: residual {residual:.6e}")]
    NonResonant { alpha: f64, a_param: f64, residual: f64 },

    /// Requested construction only exists in degenerate (zero-component) form.
    #[error("degenerate construction: {0}")]
    Degenerate(String),

    /// The resonant subset A0 of center triples is empty.
    #[error("{context}: no resonant center triple (A0 empty) at alpha = {alpha}")]
    EmptyResonantSet { context: &'static str, alpha: f64 },

    /// No exponent tuple satisfies the scheme's strict inequality system.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
