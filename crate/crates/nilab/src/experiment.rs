//! End-to-end inflation experiments: build `ψ₀`, run the Picard stack across
//! an `N`-sweep, measure the norms of the record schema, flag the dominance
//! conditions, and fit the growth trend.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use nilab_core::error::{Error, Result};
use nilab_core::lattice::{indicator, CubeUnion, FreqLattice};
use nilab_core::norms::{Exponent, NormSpec};
use nilab_core::picard::{truncated_solution, ModelParams, PicardStack};
use nilab_core::quad::{QuadRule, TimeGrid};
use nilab_core::rational::Rat;
use nilab_core::regimes::{
    certificate_critical, certificate_for_scheme, certificate_infinite_loss, certificate_ni,
    verify_certificate, ExponentCertificate, RegimePoint, Scheme,
};

use crate::config::{ExperimentConfig, ExponentRules};
use crate::gridio;
use crate::sigma::build_sigma;

pub const CSV_HEADER: &str =
    "N,A,R,T,norm_psi0,norm_U1,norm_U3,norm_U3_lowfreq,tail_bound,norm_psiK,ratio,dom_u1,dom_tail";

#[derive(Debug, Clone, Serialize)]
pub struct InflationRecord {
    pub n: f64,
    pub a_side: f64,
    pub amplitude: f64,
    pub t_time: f64,
    pub norm_psi0: f64,
    pub norm_u1: f64,
    pub norm_u3: f64,
    pub norm_u3_lowfreq: f64,
    pub tail_bound: f64,
    pub norm_psik: f64,
    pub ratio: f64,
    pub dom_u1: bool,
    pub dom_tail: bool,
    /// Series certified convergent and all norms measured.
    pub valid: bool,
    pub note: String,
    /// Measured `Σ_{5 ≤ k ≤ K} ‖U_k(T)‖` in the record norm, cross-checking
    /// the analytic tail bound.
    pub tail_measured: f64,
    /// `(σ, ‖U₃(T)‖)` with the norm restricted to `Q_1` at regularity σ.
    pub sigma_lowfreq: Vec<(f64, f64)>,
}

impl InflationRecord {
    fn invalid(n: f64, a_side: f64, amplitude: f64, t_time: f64, note: String) -> Self {
        InflationRecord {
            n,
            a_side,
            amplitude,
            t_time,
            norm_psi0: f64::NAN,
            norm_u1: f64::NAN,
            norm_u3: f64::NAN,
            norm_u3_lowfreq: f64::NAN,
            tail_bound: f64::NAN,
            norm_psik: f64::NAN,
            ratio: f64::NAN,
            dom_u1: false,
            dom_tail: false,
            valid: false,
            note,
            tail_measured: f64::NAN,
            sigma_lowfreq: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub records: Vec<InflationRecord>,
    pub csv: String,
    /// Least-squares slope of `log₂ ratio` against `log₂ N` over valid rows.
    pub slope_measured: Option<f64>,
    /// Slope predicted by the certificate exponents.
    pub slope_predicted: Option<f64>,
    pub certificate: Option<ExponentCertificate>,
    pub certificate_note: Option<String>,
    pub dominance_factor: f64,
    /// Measured `‖U₃‖/‖U₁‖` and `‖U₃‖/tail` per valid record.
    pub measured_dominance: Vec<(f64, f64, f64)>,
}

/// Sizes `A`, `R`, `T` at scale `N` from the certificate exponents.
fn derived_scales(
    cert: &ExponentCertificate,
    point: &RegimePoint,
    n: f64,
    window_const: f64,
) -> (f64, f64, f64) {
    let d = point.d as f64;
    let alpha = point.alpha.to_f64();
    let a = cert.a_f64();
    let r = cert.r_f64();
    let eps = cert.epsilon_f64();
    match cert.scheme {
        Scheme::NicriLog => {
            let log_n = n.ln();
            let a_tilde = cert.a_tilde.as_ref().map(|x| x.to_f64()).unwrap_or(0.0);
            let a_side = (n.powf(a / d) / log_n.powf(a_tilde / d)).max(1.0);
            let t = window_const * n.powf(-alpha) / log_n.powf(eps);
            (a_side, 1.0, t)
        }
        Scheme::Ilr2 => (1.0, n.powf(r), window_const * n.powf(1.0 - alpha - eps)),
        Scheme::Ilr0 => (1.0, n.powf(r), window_const * n.powf(-alpha - eps)),
        _ => (
            n.powf(a / d).max(1.0),
            n.powf(r),
            window_const * n.powf(-alpha - eps),
        ),
    }
}

fn resolve_certificate(
    cfg: &ExperimentConfig,
    point: &RegimePoint,
) -> Result<(ExponentCertificate, Option<String>)> {
    match &cfg.exponents {
        ExponentRules::Auto(which) => {
            let cert = match which.trim() {
                "auto" => certificate_ni(point)
                    .or_else(|_| certificate_critical(point))
                    .or_else(|_| certificate_infinite_loss(point))?,
                name => {
                    let scheme = match name {
                        "theorem_ni" => Scheme::TheoremNi,
                        "ni1_case1" => Scheme::Ni1Case1,
                        "ni1_case2" => Scheme::Ni1Case2,
                        "nicri_log" => Scheme::NicriLog,
                        "ilr0" => Scheme::Ilr0,
                        "ilr2" => Scheme::Ilr2,
                        other => {
                            return Err(Error::Config(format!("unknown exponent rule '{other}'")))
                        }
                    };
                    certificate_for_scheme(point, scheme)?
                }
            };
            Ok((cert, None))
        }
        ExponentRules::Explicit { scheme, a, r, epsilon } => {
            let mut cert = ExponentCertificate {
                scheme: *scheme,
                a: a.as_rat()?,
                r: r.as_rat()?,
                epsilon: epsilon.as_rat()?,
                delta: None,
                theta: None,
                a_tilde: if *scheme == Scheme::NicriLog { Some(Rat::ratio(1, 16)) } else { None },
                inequalities: Vec::new(),
                near_boundary: false,
            };
            let note = match verify_certificate(point, &cert) {
                Ok(records) => {
                    cert.inequalities = records;
                    None
                }
                Err(e) => Some(format!("explicit exponents do not verify: {e}")),
            };
            Ok((cert, note))
        }
    }
}

fn lattice_for(omega: &CubeUnion, m_cells: u32, k_truncation: u32) -> Result<FreqLattice> {
    let h = omega.side() / m_cells as f64;
    let radius = k_truncation as f64 * omega.max_coord() + 4.0 * h;
    let half_nodes = (radius / h).ceil() as usize;
    FreqLattice::new(omega.dim(), h, 2 * half_nodes + 1)
}

fn spec_of(point: &RegimePoint) -> NormSpec {
    let index = match &point.index {
        nilab_core::regimes::RIndex::Finite(p) => Exponent::Finite(p.to_f64()),
        nilab_core::regimes::RIndex::Infinity => Exponent::Infinity,
    };
    NormSpec { space: point.space, index, s: point.s.to_f64() }
}

fn run_single(
    cfg: &ExperimentConfig,
    point: &RegimePoint,
    cert: &ExponentCertificate,
    n: f64,
) -> InflationRecord {
    let (a_side, amplitude, t_time) = derived_scales(cert, point, n, cfg.window_const);
    let fail = |note: String| InflationRecord::invalid(n, a_side, amplitude, t_time, note);
    let d = point.d as usize;
    let alpha = point.alpha.to_f64();
    let built = match build_sigma(cfg.sigma, n, d, alpha, a_side) {
        Ok(b) => b,
        Err(e) => return fail(format!("support construction failed: {e}")),
    };
    let omega = match CubeUnion::new(a_side, built.centers.clone()) {
        Ok(o) => o,
        Err(e) => return fail(format!("bad cube union: {e}")),
    };
    let lattice = match lattice_for(&omega, cfg.m, cfg.k_truncation) {
        Ok(l) => l,
        Err(e) => return fail(format!("lattice sizing failed: {e}")),
    };
    let psi0 = match indicator(&omega, amplitude, &lattice) {
        Ok(g) => g,
        Err(e) => return fail(format!("indicator data failed: {e}")),
    };
    let params = match ModelParams::new(d, point.gamma.to_f64(), alpha, cfg.mu) {
        Ok(p) => p,
        Err(e) => return fail(format!("bad model: {e}")),
    };
    let tg = match TimeGrid::new(t_time, cfg.nt, QuadRule::GaussLegendre) {
        Ok(t) => t,
        Err(e) => return fail(format!("bad time grid: {e}")),
    };
    let stack = match PicardStack::new(params, psi0, tg) {
        Ok(s) => s,
        Err(e) => return fail(format!("stack construction failed: {e}")),
    };
    let spec = spec_of(point);
    let norm_psi0 = match spec.norm_of(stack.data()) {
        Ok(v) => v,
        Err(e) => return fail(format!("data norm failed: {e}")),
    };
    let truncated = match truncated_solution(&stack, cfg.k_truncation, cfg.smallness_threshold) {
        Ok(t) => t,
        Err(e) => {
            let mut rec = fail(format!("{e}"));
            rec.norm_psi0 = norm_psi0;
            return rec;
        }
    };
    let measure = |k: u32| -> Result<f64> {
        let u = stack.evaluate(k, t_time)?;
        spec.norm_of(&u)
    };
    let output = (|| -> Result<InflationRecord> {
        let norm_u1 = measure(1)?;
        let u3 = stack.evaluate(3, t_time)?;
        let norm_u3 = spec.norm_of(&u3)?;
        let norm_u3_lowfreq = spec.low_freq_norm_of(&u3, a_side)?;
        let norm_psik = spec.norm_of(&truncated.psi)?;
        let mut tail_measured = 0.0;
        let mut k = 5;
        while k <= cfg.k_truncation {
            tail_measured += measure(k)?;
            k += 2;
        }
        let mut sigma_lowfreq = Vec::new();
        for &sg in &cfg.sigma_probe {
            let v = nilab_core::norms::low_freq_fl_norm(&u3, spec.index, sg, 1.0)?;
            sigma_lowfreq.push((sg, v));
        }
        if let Some(dir) = &cfg.snapshot_dir {
            gridio::save_stack_snapshots(dir, &stack, cfg.k_truncation, n)?;
        }
        let tail_bound = truncated.tail_majorant;
        let ratio = norm_psik / norm_psi0;
        Ok(InflationRecord {
            n,
            a_side,
            amplitude,
            t_time,
            norm_psi0,
            norm_u1,
            norm_u3,
            norm_u3_lowfreq,
            tail_bound,
            norm_psik,
            ratio,
            dom_u1: norm_u3 >= cfg.dominance_factor * norm_u1,
            dom_tail: norm_u3 >= cfg.dominance_factor * tail_bound,
            valid: true,
            note: String::new(),
            tail_measured,
            sigma_lowfreq,
        })
    })();
    match output {
        Ok(rec) => rec,
        Err(e) => {
            let mut rec = fail(format!("measurement failed: {e}"));
            rec.norm_psi0 = norm_psi0;
            rec
        }
    }
}

fn fmt_cell(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x}")
    }
}

pub fn records_to_csv(records: &[InflationRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_cell(r.n),
            fmt_cell(r.a_side),
            fmt_cell(r.amplitude),
            fmt_cell(r.t_time),
            fmt_cell(r.norm_psi0),
            fmt_cell(r.norm_u1),
            fmt_cell(r.norm_u3),
            fmt_cell(r.norm_u3_lowfreq),
            fmt_cell(r.tail_bound),
            fmt_cell(r.norm_psik),
            fmt_cell(r.ratio),
            r.dom_u1 as u8,
            r.dom_tail as u8,
        );
    }
    out
}

/// Least-squares slope of `log₂ y` against `log₂ x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|&(x, y)| (x.log2(), y.log2()))
        .collect();
    if data.len() < 2 {
        return None;
    }
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|(x, _)| x).sum();
    let sy: f64 = data.iter().map(|(_, y)| y).sum();
    let sxx: f64 = data.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Run the whole sweep. Per-`N` experiments are independent and computed in
/// parallel; records are assembled in sweep order.
pub fn run_inflation(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let point = cfg.point.to_point()?;
    let (cert, certificate_note) = resolve_certificate(cfg, &point)?;
    let records: Vec<InflationRecord> = cfg
        .sweep
        .par_iter()
        .map(|&n| run_single(cfg, &point, &cert, n))
        .collect();
    let csv = records_to_csv(&records);
    let slope_measured = log_log_slope(
        &records
            .iter()
            .filter(|r| r.valid)
            .map(|r| (r.n, r.ratio))
            .collect::<Vec<_>>(),
    );
    let slope_predicted = Some(cert.predicted_ratio_slope(&point));
    let measured_dominance = records
        .iter()
        .filter(|r| r.valid)
        .map(|r| (r.n, r.norm_u3 / r.norm_u1, r.norm_u3 / r.tail_bound))
        .collect();
    if let Some(path) = &cfg.out {
        std::fs::write(path, &csv)?;
    }
    Ok(RunSummary {
        records,
        csv,
        slope_measured,
        slope_predicted,
        certificate: Some(cert),
        certificate_note,
        dominance_factor: cfg.dominance_factor,
        measured_dominance,
    })
}
