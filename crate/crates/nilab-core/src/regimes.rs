//! Critical indices, piecewise inflation classifiers, and constructive
//! exponent certificates.
//!
//! A classification answers "does inflation occur at `(d, γ, α, p|q, s)`"
//! through the closed-form piecewise thresholds; a certificate *constructs*
//! the exponent tuple `(a, r, ε)` behind the answer — the sizes
//! `A = N^{a/d}`, `R = N^r`, `T = N^{−α−ε}` (or the log-corrected / shifted
//! variants) — and verifies the scheme's strict inequality system in exact
//! rational arithmetic. All comparisons are exact: finite floats convert
//! bit-exactly to rationals, and `p = ∞` is carried symbolically.
//!
//! Scheme names are short for their construction: `theorem_ni` is the main
//! power-data construction, `ni1_case1/2` the dual-critical variants that use
//! the constant weight-mass regime, `nicri_log` the log-corrected critical
//! line `s = −d/p`, and `ilr0`/`ilr2` the infinite-loss constructions (cube
//! side fixed to one, without and with resonant support).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{Exponent, Space};
use crate::rational::Rat;

/// Lebesgue index carried exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RIndex {
    Finite(Rat),
    Infinity,
}

impl RIndex {
    pub fn from_exponent(e: Exponent) -> Result<Self> {
        match e.validate()? {
            Exponent::Finite(p) => Ok(RIndex::Finite(Rat::from_f64(p))),
            Exponent::Infinity => Ok(RIndex::Infinity),
        }
    }

    pub fn reciprocal(&self) -> Rat {
        match self {
            RIndex::Finite(p) => Rat::from_int(1) / p.clone(),
            RIndex::Infinity => Rat::zero(),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, RIndex::Finite(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RIndex::Finite(p) => p.to_f64(),
            RIndex::Infinity => f64::INFINITY,
        }
    }
}

/// A query point `(d, γ, α, p or q, s)` in one of the two scales.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimePoint {
    pub d: u32,
    pub gamma: Rat,
    pub alpha: Rat,
    pub space: Space,
    pub index: RIndex,
    pub s: Rat,
}

impl RegimePoint {
    pub fn new(d: u32, gamma: f64, alpha: f64, space: Space, index: Exponent, s: f64) -> Result<Self> {
        Self::new_rational(
            d,
            Rat::from_f64(gamma),
            Rat::from_f64(alpha),
            space,
            RIndex::from_exponent(index)?,
            Rat::from_f64(s),
        )
    }

    pub fn new_rational(
        d: u32,
        gamma: Rat,
        alpha: Rat,
        space: Space,
        index: RIndex,
        s: Rat,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        let dr = Rat::from_int(d as i64);
        if !gamma.is_positive() || gamma > dr {
            return Err(Error::Domain(format!("gamma = {gamma} outside (0, d]")));
        }
        if !alpha.is_positive() {
            return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
        }
        if let RIndex::Finite(p) = &index {
            if *p < Rat::from_int(1) {
                return Err(Error::Domain(format!("index = {p} below 1")));
            }
        }
        Ok(RegimePoint { d, gamma, alpha, space, index, s })
    }

    fn dr(&self) -> Rat {
        Rat::from_int(self.d as i64)
    }

    /// `x = d − γ + α`.
    fn x(&self) -> Rat {
        &(&self.dr() - &self.gamma) + &self.alpha
    }

    /// `1/p` resp. `1/q` (0 at ∞).
    fn inv_idx(&self) -> Rat {
        self.index.reciprocal()
    }

    /// Data-norm weight: `1/p` for Fourier-Lebesgue, `min(1/2, 1/q)` for
    /// modulation (0 at ∞ in the FL scale).
    fn w1(&self) -> Rat {
        match self.space {
            Space::FourierLebesgue => self.inv_idx(),
            Space::Modulation => self.inv_idx().min(Rat::ratio(1, 2)),
        }
    }

    /// `1/p_eff` with `p_eff = p` (FL) resp. `max(2, q)` (modulation); zero
    /// encodes `p_eff = ∞`.
    fn inv_p_eff(&self) -> Rat {
        match self.space {
            Space::FourierLebesgue => self.inv_idx(),
            Space::Modulation => self.inv_idx().min(Rat::ratio(1, 2)),
        }
    }

    fn p_eff_finite(&self) -> bool {
        match self.space {
            Space::FourierLebesgue => self.index.is_finite(),
            Space::Modulation => self.index.is_finite(),
        }
    }

    /// Scaling-critical index of the matching scale (`s_c` resp. `m_c`).
    pub fn critical(&self) -> Rat {
        let one = Rat::from_int(1);
        &(&self.dr() * &(&one - &self.w1())) - &(self.x() / Rat::from_int(2))
    }
}

/// `s_c = d(1 − 1/p) − (d − γ + α)/2`.
pub fn critical_fl(d: u32, gamma: f64, alpha: f64, p: Exponent) -> Result<f64> {
    let pt = RegimePoint::new(d, gamma, alpha, Space::FourierLebesgue, p, 0.0)?;
    Ok(pt.critical().to_f64())
}

/// `m_c = d/2 − (d−γ+α)/2` for `1 ≤ q ≤ 2`, `d(1 − 1/q) − (d−γ+α)/2` for
/// `2 ≤ q ≤ ∞` (continuous at `q = 2`).
pub fn critical_mod(d: u32, gamma: f64, alpha: f64, q: Exponent) -> Result<f64> {
    let pt = RegimePoint::new(d, gamma, alpha, Space::Modulation, q, 0.0)?;
    Ok(pt.critical().to_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TheoremNi,
    Ni1Case1,
    Ni1Case2,
    NicriLog,
    Ilr0,
    Ilr2,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::TheoremNi,
        Scheme::Ni1Case1,
        Scheme::Ni1Case2,
        Scheme::NicriLog,
        Scheme::Ilr0,
        Scheme::Ilr2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::TheoremNi => "theorem_ni",
            Scheme::Ni1Case1 => "ni1_case1",
            Scheme::Ni1Case2 => "ni1_case2",
            Scheme::NicriLog => "nicri_log",
            Scheme::Ilr0 => "ilr0",
            Scheme::Ilr2 => "ilr2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NormInflation,
    NormInflationInfiniteLoss,
    OutsideKnownRegion,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Which closed-form classifier produced the verdict.
    pub theorem: Option<String>,
    /// Binding `s`-threshold of the piecewise classifier (for reporting).
    pub threshold: Option<f64>,
    /// Constructive schemes whose gate condition holds at this point.
    pub schemes: Vec<Scheme>,
    /// Within 1e−6 of some branch boundary; floating callers should not trust
    /// the sign of the comparison.
    pub near_boundary: bool,
}

/// Exact membership of `α` in `E_d` (`E₁ = {1}`, `E_d = [1,∞)` for `d ≥ 2`).
fn ed_member(d: u32, alpha: &Rat) -> bool {
    let one = Rat::from_int(1);
    if d == 1 {
        *alpha == one
    } else {
        *alpha >= one
    }
}

/// Gate condition of a constructive scheme, decided exactly.
pub fn scheme_applies(pt: &RegimePoint, scheme: Scheme) -> bool {
    let zero = Rat::zero();
    let d = pt.dr();
    let x = pt.x();
    let three = Rat::from_int(3);
    match scheme {
        Scheme::TheoremNi => pt.s < zero && pt.s < pt.critical(),
        Scheme::Ni1Case1 => {
            let dual = -(&d * &pt.inv_idx());
            if pt.p_eff_finite() {
                pt.s < dual && pt.s < -(&x / &three)
            } else {
                // p_eff = ∞ variant: cube side grows like the full dimension
                let two_d = Rat::from_int(2 * pt.d as i64);
                let extra = if x > two_d { pt.s < -(&(&x - &two_d) / &three) } else { true };
                pt.s < dual && extra
            }
        }
        Scheme::Ni1Case2 => {
            if !pt.p_eff_finite() {
                return false;
            }
            let inv = pt.inv_p_eff();
            // p_eff ≥ 3/2 ⇔ 1/p_eff ≤ 2/3
            if inv > Rat::ratio(2, 3) {
                return false;
            }
            let dual = -(&d * &pt.inv_idx());
            let half_inv = inv / Rat::from_int(2);
            pt.s < dual && pt.s < -(&x * &half_inv)
        }
        Scheme::NicriLog => {
            let dual = -(&d * &pt.inv_idx());
            if pt.s != dual {
                return false;
            }
            let bound = &pt.gamma + &d;
            if pt.index.is_finite() {
                pt.alpha <= bound
            } else {
                pt.alpha < bound
            }
        }
        Scheme::Ilr0 => pt.s < -(&x / &three),
        Scheme::Ilr2 => {
            ed_member(pt.d, &pt.alpha) && pt.s < -(&(&x - &Rat::from_int(1)) / &three)
        }
    }
}

pub fn applicable_schemes(pt: &RegimePoint) -> Vec<Scheme> {
    Scheme::ALL.iter().copied().filter(|&s| scheme_applies(pt, s)).collect()
}

/// Piecewise inflation threshold of the closed-form classifier; `None` when
/// only the boundary corner applies.
fn piecewise_threshold(pt: &RegimePoint) -> Rat {
    let zero = Rat::zero();
    let two_d = Rat::from_int(2 * pt.d as i64);
    let half = Rat::ratio(1, 2);
    let inv = pt.inv_idx();
    let x = pt.x();
    let first_branch_edge = match pt.space {
        // 2d(1/2 − 1/p) + γ
        Space::FourierLebesgue => &(&two_d * &(&half - &inv)) + &pt.gamma,
        // 2d·max(0, 1/2 − 1/q) + γ
        Space::Modulation => {
            let gap = (&half - &inv).max(zero.clone());
            &(&two_d * &gap) + &pt.gamma
        }
    };
    let second_edge = &pt.gamma + &pt.dr();
    if pt.alpha <= first_branch_edge {
        zero
    } else if pt.alpha <= second_edge {
        pt.critical()
    } else {
        match pt.space {
            Space::FourierLebesgue => {
                let third = Rat::ratio(1, 3);
                let lim = third.min(inv / Rat::from_int(2));
                pt.critical().max(-(&x * &lim))
            }
            Space::Modulation => {
                let quarter = Rat::ratio(1, 4);
                let lim = quarter.min(inv / Rat::from_int(2));
                -(&x * &lim)
            }
        }
    }
}

// The boundary inclusions (the corner `α = γ + d`, `s = s_c = −d/p` for
// finite index, and the whole line `s = −d/p` with `α ≤ γ + d`, strict at
// `p = ∞`) are exactly the gate of the log-corrected critical scheme.

fn infinite_loss_holds(pt: &RegimePoint) -> bool {
    scheme_applies(pt, Scheme::Ilr0) || scheme_applies(pt, Scheme::Ilr2)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-6
}

fn classify(pt: &RegimePoint) -> Classification {
    let threshold = piecewise_threshold(pt);
    let ni = pt.s < threshold || scheme_applies(pt, Scheme::NicriLog);
    let ilr = infinite_loss_holds(pt);
    let (tag_ni, tag_ilr) = match pt.space {
        Space::FourierLebesgue => ("fl-ni", "fl-infinite-loss"),
        Space::Modulation => ("mod-ni", "mod-infinite-loss"),
    };
    let s = pt.s.to_f64();
    let x = pt.x().to_f64();
    let near_boundary = near(s, threshold.to_f64())
        || near(s, -x / 3.0)
        || near(s, -(x - 1.0) / 3.0)
        || near(s, pt.critical().to_f64());
    let schemes = applicable_schemes(pt);
    if ilr {
        Classification {
            verdict: Verdict::NormInflationInfiniteLoss,
            theorem: Some(tag_ilr.to_string()),
            threshold: Some(threshold.to_f64()),
            schemes,
            near_boundary,
        }
    } else if ni {
        Classification {
            verdict: Verdict::NormInflation,
            theorem: Some(tag_ni.to_string()),
            threshold: Some(threshold.to_f64()),
            schemes,
            near_boundary,
        }
    } else {
        Classification {
            verdict: Verdict::OutsideKnownRegion,
            theorem: None,
            threshold: Some(threshold.to_f64()),
            schemes,
            near_boundary,
        }
    }
}

pub fn classify_fl(pt: &RegimePoint) -> Result<Classification> {
    if pt.space != Space::FourierLebesgue {
        return Err(Error::Config("classify_fl expects a Fourier-Lebesgue point".into()));
    }
    Ok(classify(pt))
}

pub fn classify_mod(pt: &RegimePoint) -> Result<Classification> {
    if pt.space != Space::Modulation {
        return Err(Error::Config("classify_mod expects a modulation point".into()));
    }
    Ok(classify(pt))
}

pub fn classify_point(pt: &RegimePoint) -> Classification {
    classify(pt)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IneqRecord {
    pub name: String,
    /// Positive slack of the inequality (or |ε−1| for the exclusion).
    pub margin: f64,
    /// Exact rational slack.
    pub exact: String,
    pub strict: bool,
}

/// Feasible exponent tuple witnessing a scheme's inequality system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentCertificate {
    pub scheme: Scheme,
    /// Cube-side exponent: `A = N^{a/d}` (log-corrected for `nicri_log`).
    pub a: Rat,
    /// Amplitude exponent: `R = N^r`.
    pub r: Rat,
    /// Time exponent: `T = N^{−α−ε}`, or `N^{1−α−ε}` for `ilr2`, or
    /// `N^{−α} (log N)^{−ε}` for `nicri_log`.
    pub epsilon: Rat,
    pub delta: Option<Rat>,
    pub theta: Option<Rat>,
    /// Log-correction exponent of the critical-line scheme.
    pub a_tilde: Option<Rat>,
    pub inequalities: Vec<IneqRecord>,
    pub near_boundary: bool,
}

impl ExponentCertificate {
    pub fn a_f64(&self) -> f64 {
        self.a.to_f64()
    }

    pub fn r_f64(&self) -> f64 {
        self.r.to_f64()
    }

    pub fn epsilon_f64(&self) -> f64 {
        self.epsilon.to_f64()
    }

    /// Predicted `log N` slope of the inflation ratio `‖ψ_K‖/‖ψ₀‖`: the gap
    /// between the third-iterate growth exponent and the data exponent.
    pub fn predicted_ratio_slope(&self, pt: &RegimePoint) -> f64 {
        let d = pt.d as f64;
        let gamma = pt.gamma.to_f64();
        let alpha = pt.alpha.to_f64();
        let s = pt.s.to_f64();
        let w1 = pt.w1().to_f64();
        let a = self.a_f64();
        let r = self.r_f64();
        let eps = self.epsilon_f64();
        match self.scheme {
            Scheme::TheoremNi => {
                let grow = -alpha - eps + gamma - d + 3.0 * r + 2.0 * a + a * (w1 + s / d);
                let data = r + a * w1 + s;
                grow - data
            }
            Scheme::Ni1Case1 | Scheme::Ni1Case2 => {
                let grow = -alpha - eps + gamma - d + 3.0 * r + 2.0 * a;
                let data = r + a * w1 + s;
                grow - data
            }
            Scheme::NicriLog => (d - a) * pt.inv_idx().to_f64(),
            Scheme::Ilr0 => {
                let grow = -alpha - eps + gamma - d + 3.0 * r;
                grow - (r + s)
            }
            Scheme::Ilr2 => {
                let grow = 1.0 - alpha - eps + gamma - d + 3.0 * r;
                grow - (r + s)
            }
        }
    }
}

fn record(name: &str, slack: Rat, strict: bool) -> IneqRecord {
    IneqRecord { name: name.into(), margin: slack.to_f64(), exact: slack.to_string(), strict }
}

fn all_positive(records: &[IneqRecord]) -> bool {
    records.iter().all(|r| if r.strict { r.margin > 0.0 } else { r.margin >= 0.0 })
}

/// Re-derive and re-check a certificate's inequality list in exact rational
/// arithmetic. Returns the regenerated records; errs if any slack fails.
pub fn verify_certificate(pt: &RegimePoint, cert: &ExponentCertificate) -> Result<Vec<IneqRecord>> {
    let records = inequality_records(pt, cert)?;
    for rec in &records {
        let exact: Rat = rec
            .exact
            .parse::<num_rational::BigRational>()
            .map(Rat)
            .map_err(|e| Error::Config(format!("bad exact margin: {e}")))?;
        let ok = if rec.strict { exact.is_positive() } else { !exact.is_negative() };
        if !ok {
            return Err(Error::Infeasible(format!(
                "certificate inequality '{}' has nonpositive slack {}",
                rec.name, rec.exact
            )));
        }
    }
    Ok(records)
}

/// Exact slack list of a certificate's scheme at its exponents.
fn inequality_records(pt: &RegimePoint, cert: &ExponentCertificate) -> Result<Vec<IneqRecord>> {
    let d = pt.dr();
    let gamma = pt.gamma.clone();
    let alpha = pt.alpha.clone();
    let s = pt.s.clone();
    let w1 = pt.w1();
    let a = cert.a.clone();
    let r = cert.r.clone();
    let eps = cert.epsilon.clone();
    let base = &(&gamma - &alpha) - &d; // γ − α − d
    let mut out = Vec::new();
    match cert.scheme {
        Scheme::TheoremNi | Scheme::Ni1Case1 | Scheme::Ni1Case2 => {
            // data norm vanishes: r + a w1 + s < 0
            let i1 = &(&r + &(&a * &w1)) + &s;
            out.push(record("data_norm_vanishes", -i1, true));
            // series contracts: −α−ε+γ−d+2r+2a < 0
            let two = Rat::from_int(2);
            let i2 = &(&base - &eps) + &(&two * &(&r + &a));
            out.push(record("series_contracts", -i2, true));
            // time window: −α−ε+γ−d ≤ 0
            let i3 = &base - &eps;
            out.push(record("time_window", -i3, false));
            // third iterate grows: −α−ε+γ−d+3r+2a[+a(w1+s/d)] > 0
            let mut i4 = &(&base - &eps) + &(&(&Rat::from_int(3) * &r) + &(&two * &a));
            if cert.scheme == Scheme::TheoremNi {
                i4 = &i4 + &(&a * &(&w1 + &(&s / &d)));
            } else {
                // constant weight-mass regime needs s strictly below −d/p_idx
                let dual = -(&d * &pt.inv_idx());
                out.push(record("below_dual_critical", &dual - &s, true));
            }
            out.push(record("third_iterate_grows", i4, true));
            // dispersive time scale: ε > 0
            out.push(record("time_shorter_than_dispersion", eps.clone(), true));
        }
        Scheme::NicriLog => {
            let dual = -(&d * &pt.inv_idx());
            out.push(record("on_dual_critical_line", &s - &dual, false));
            out.push(record("dual_line_is_symmetric", &dual - &s, false));
            // a = (α + d − γ)/2 must satisfy a ≤ d (strictly for p = ∞)
            let slack = &d - &a;
            out.push(record("cube_fits_growth", slack, !pt.index.is_finite()));
            let a_tilde = cert.a_tilde.clone().ok_or_else(|| {
                Error::Config("nicri_log certificate needs a log-correction exponent".into())
            })?;
            if pt.index.is_finite() {
                // (log N)^{1/p − ε − 2ã} → ∞
                let lhs = &(&pt.inv_idx() - &eps) - &(&Rat::from_int(2) * &a_tilde);
                out.push(record("log_growth", lhs, true));
                out.push(record("log_correction_positive", a_tilde, true));
            } else {
                let lhs = -(&eps + &(&Rat::from_int(2) * &a_tilde));
                out.push(record("log_growth", lhs, true));
                out.push(record("log_correction_negative", -a_tilde, true));
            }
            out.push(record("time_shorter_than_dispersion", eps.clone(), true));
        }
        Scheme::Ilr0 | Scheme::Ilr2 => {
            let shift = if cert.scheme == Scheme::Ilr2 { Rat::from_int(1) } else { Rat::zero() };
            let i1 = &r + &s;
            out.push(record("data_norm_vanishes", -i1, true));
            let two = Rat::from_int(2);
            let b = &(&shift + &base) - &eps; // [1]−α−ε+γ−d
            let i2 = &b + &(&two * &r);
            out.push(record("series_contracts", -i2, true));
            out.push(record("time_window", -b.clone(), false));
            let i4 = &b + &(&Rat::from_int(3) * &r);
            out.push(record("third_iterate_grows", i4, true));
            out.push(record("time_shorter_than_dispersion", eps.clone(), true));
            if cert.scheme == Scheme::Ilr2 {
                let gap = &eps - &Rat::from_int(1);
                out.push(record("epsilon_avoids_unit", gap.abs(), true));
                if !ed_member(pt.d, &pt.alpha) {
                    return Err(Error::Infeasible(format!(
                        "ilr2 requires alpha in E_d; alpha = {} is not admissible in d = {}",
                        pt.alpha, pt.d
                    )));
                }
            }
            // cube side is pinned to one
            out.push(record("unit_cube", -cert.a.clone(), false));
        }
    }
    Ok(out)
}

const REFINE_MAX: u32 = 60;

fn finish(pt: &RegimePoint, mut cert: ExponentCertificate) -> Result<ExponentCertificate> {
    let records = inequality_records(pt, &cert)?;
    if !all_positive(&records) {
        return Err(Error::Infeasible(format!(
            "constructed {} exponents violate their own system",
            cert.scheme.name()
        )));
    }
    cert.near_boundary = records.iter().any(|r| r.margin.abs() < 1e-6);
    cert.inequalities = records;
    verify_certificate(pt, &cert)?;
    Ok(cert)
}

/// Midpoint of the admissible `ε` interval `(max(0, lo), hi)`, or `None` when
/// empty.
fn epsilon_midpoint(lo: Rat, hi: Rat) -> Option<Rat> {
    let floor = lo.max(Rat::zero());
    if hi <= floor {
        return None;
    }
    Some(&(&floor + &hi) / &Rat::from_int(2))
}

fn build_theorem_ni(pt: &RegimePoint) -> Result<ExponentCertificate> {
    if !scheme_applies(pt, Scheme::TheoremNi) {
        return Err(Error::Infeasible(format!(
            "theorem_ni needs s < min(critical, 0) = min({}, 0); s = {}",
            pt.critical(),
            pt.s
        )));
    }
    let d = pt.dr();
    let w1 = pt.w1();
    let s = pt.s.clone();
    let base = &(&pt.gamma - &pt.alpha) - &d;
    for j in 1..=REFINE_MAX {
        let delta = &Rat::from_int(1) - &Rat::pow2_neg(j);
        let theta = Rat::pow2_neg(j);
        let a = &delta * &d;
        let lower = -(&a * &(&w1 + &(&s / &d)));
        let upper = -(&(&a * &w1) + &s);
        let r = &(&theta * &lower) + &(&(&Rat::from_int(1) - &theta) * &upper);
        let two = Rat::from_int(2);
        let lo = &base + &(&two * &(&r + &a));
        let hi = &lo + &(&r + &(&a * &(&w1 + &(&s / &d))));
        if let Some(eps) = epsilon_midpoint(lo, hi) {
            let cert = ExponentCertificate {
                scheme: Scheme::TheoremNi,
                a,
                r,
                epsilon: eps,
                delta: Some(delta),
                theta: Some(theta),
                a_tilde: None,
                inequalities: Vec::new(),
                near_boundary: false,
            };
            if let Ok(done) = finish(pt, cert) {
                return Ok(done);
            }
        }
    }
    Err(Error::Infeasible("theorem_ni refinement grid exhausted".into()))
}

fn build_ni1_case1(pt: &RegimePoint) -> Result<ExponentCertificate> {
    if !scheme_applies(pt, Scheme::Ni1Case1) {
        return Err(Error::Infeasible(format!(
            "ni1_case1 needs s below the dual critical line and the one-third threshold; s = {}",
            pt.s
        )));
    }
    let d = pt.dr();
    let s = pt.s.clone();
    let base = &(&pt.gamma - &pt.alpha) - &d;
    for j in 1..=REFINE_MAX {
        let (a, r, delta, theta);
        if pt.p_eff_finite() {
            let p_eff = Rat::from_int(1) / pt.inv_p_eff();
            let dl = Rat::pow2_neg(j);
            let th = Rat::pow2_neg(j);
            a = &(&p_eff * &(-s.clone())) * &dl;
            r = &(&(-s.clone()) * &(&Rat::from_int(1) - &dl)) - &th;
            delta = Some(dl);
            theta = Some(th);
        } else {
            // sup-index variant: grow the cube like the full dimension
            let dl = &Rat::from_int(1) - &Rat::pow2_neg(j);
            let th = Rat::pow2_neg(j);
            a = &dl * &d;
            r = &(-s.clone()) - &th;
            delta = Some(dl);
            theta = Some(th);
        }
        if !r.is_positive() {
            continue;
        }
        let two = Rat::from_int(2);
        let lo = &base + &(&two * &(&r + &a));
        let hi = &lo + &r;
        if let Some(eps) = epsilon_midpoint(lo, hi) {
            let cert = ExponentCertificate {
                scheme: Scheme::Ni1Case1,
                a,
                r,
                epsilon: eps,
                delta,
                theta,
                a_tilde: None,
                inequalities: Vec::new(),
                near_boundary: false,
            };
            if let Ok(done) = finish(pt, cert) {
                return Ok(done);
            }
        }
    }
    Err(Error::Infeasible("ni1_case1 refinement grid exhausted".into()))
}

fn build_ni1_case2(pt: &RegimePoint) -> Result<ExponentCertificate> {
    if !scheme_applies(pt, Scheme::Ni1Case2) {
        return Err(Error::Infeasible(format!(
            "ni1_case2 needs 3/2 ≤ p_eff < ∞, s below the dual critical line and below \
             −(d−γ+α)/(2 p_eff); s = {}",
            pt.s
        )));
    }
    let s = pt.s.clone();
    let p_eff = Rat::from_int(1) / pt.inv_p_eff();
    let base = &(&pt.gamma - &pt.alpha) - &pt.dr();
    let theta = Rat::ratio(1, 2);
    for j in 1..=REFINE_MAX {
        let delta = Rat::pow2_neg(j);
        let a = &p_eff * &(&(-s.clone()) - &delta);
        if !a.is_positive() {
            continue;
        }
        let r = &theta * &delta;
        let two = Rat::from_int(2);
        let lo = &base + &(&two * &(&r + &a));
        let hi = &lo + &r;
        if let Some(eps) = epsilon_midpoint(lo, hi) {
            let cert = ExponentCertificate {
                scheme: Scheme::Ni1Case2,
                a,
                r,
                epsilon: eps,
                delta: Some(delta),
                theta: Some(theta.clone()),
                a_tilde: None,
                inequalities: Vec::new(),
                near_boundary: false,
            };
            if let Ok(done) = finish(pt, cert) {
                return Ok(done);
            }
        }
    }
    Err(Error::Infeasible("ni1_case2 refinement grid exhausted".into()))
}

fn build_nicri(pt: &RegimePoint) -> Result<ExponentCertificate> {
    if !scheme_applies(pt, Scheme::NicriLog) {
        let bound = &pt.gamma + &pt.dr();
        return Err(Error::Infeasible(format!(
            "nicri_log needs s = −d/p exactly and alpha {} d + γ = {bound} (got alpha = {})",
            if pt.index.is_finite() { "≤" } else { "<" },
            pt.alpha
        )));
    }
    let a = &(&(&pt.alpha + &pt.dr()) - &pt.gamma) / &Rat::from_int(2);
    let (a_tilde, eps) = if pt.index.is_finite() {
        let inv = pt.inv_idx();
        (&inv / &Rat::from_int(8), &inv / &Rat::from_int(4))
    } else {
        (Rat::ratio(-1, 4), Rat::ratio(1, 8))
    };
    let cert = ExponentCertificate {
        scheme: Scheme::NicriLog,
        a,
        r: Rat::zero(), // R = 1
        epsilon: eps,
        delta: None,
        theta: None,
        a_tilde: Some(a_tilde),
        inequalities: Vec::new(),
        near_boundary: false,
    };
    finish(pt, cert)
}

fn build_ilr(pt: &RegimePoint, scheme: Scheme) -> Result<ExponentCertificate> {
    if !scheme_applies(pt, scheme) {
        let x = pt.x();
        let t0 = -(&x / &Rat::from_int(3));
        let t2 = -(&(&x - &Rat::from_int(1)) / &Rat::from_int(3));
        return Err(Error::Infeasible(format!(
            "{} infeasible at s = {}: thresholds are s < {} (any alpha) and s < {} (alpha in E_d; \
             member here: {})",
            scheme.name(),
            pt.s,
            t0,
            t2,
            ed_member(pt.d, &pt.alpha),
        )));
    }
    let shift = if scheme == Scheme::Ilr2 { Rat::from_int(1) } else { Rat::zero() };
    let base = &(&(&pt.gamma - &pt.alpha) - &pt.dr()) + &shift;
    for j in 1..=REFINE_MAX {
        let theta = Rat::pow2_neg(j);
        let r = &(-pt.s.clone()) - &theta;
        if !r.is_positive() {
            continue;
        }
        let lo = &base + &(&Rat::from_int(2) * &r);
        let hi = &base + &(&Rat::from_int(3) * &r);
        let Some(mut eps) = epsilon_midpoint(lo.clone(), hi.clone()) else { continue };
        if scheme == Scheme::Ilr2 && eps == Rat::from_int(1) {
            // nudge inside the interval, away from the excluded value
            let floor = lo.max(Rat::zero());
            eps = &floor + &(&(&hi - &floor) * &Rat::ratio(3, 4));
            if eps == Rat::from_int(1) {
                continue;
            }
        }
        let cert = ExponentCertificate {
            scheme,
            a: Rat::zero(), // A = 1
            r,
            epsilon: eps,
            delta: None,
            theta: Some(theta),
            a_tilde: None,
            inequalities: Vec::new(),
            near_boundary: false,
        };
        if let Ok(done) = finish(pt, cert) {
            return Ok(done);
        }
    }
    Err(Error::Infeasible(format!("{} refinement grid exhausted", scheme.name())))
}

/// Build a certificate of a specific scheme.
pub fn certificate_for_scheme(pt: &RegimePoint, scheme: Scheme) -> Result<ExponentCertificate> {
    match scheme {
        Scheme::TheoremNi => build_theorem_ni(pt),
        Scheme::Ni1Case1 => build_ni1_case1(pt),
        Scheme::Ni1Case2 => build_ni1_case2(pt),
        Scheme::NicriLog => build_nicri(pt),
        Scheme::Ilr0 => build_ilr(pt, Scheme::Ilr0),
        Scheme::Ilr2 => build_ilr(pt, Scheme::Ilr2),
    }
}

/// Norm-inflation certificate: the main construction where it applies, the
/// dual-critical variants otherwise. `s ≥ 0` is immediately infeasible.
pub fn certificate_ni(pt: &RegimePoint) -> Result<ExponentCertificate> {
    if !pt.s.is_negative() {
        return Err(Error::Infeasible(format!(
            "the power-data construction needs s < 0, got s = {}",
            pt.s
        )));
    }
    build_theorem_ni(pt)
        .or_else(|_| build_ni1_case2(pt))
        .or_else(|_| build_ni1_case1(pt))
}

/// Certificate on the critical line `s = −d/p`.
pub fn certificate_critical(pt: &RegimePoint) -> Result<ExponentCertificate> {
    build_nicri(pt)
}

/// Infinite-loss certificate: the resonant-support scheme when the `E_d` gate
/// opens, the plain unit-cube scheme otherwise.
pub fn certificate_infinite_loss(pt: &RegimePoint) -> Result<ExponentCertificate> {
    match build_ilr(pt, Scheme::Ilr2) {
        Ok(c) => Ok(c),
        Err(first) => build_ilr(pt, Scheme::Ilr0).map_err(|second| {
            Error::Infeasible(format!("{first}; {second}"))
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionRow {
    pub alpha: f64,
    pub s: f64,
    pub verdict: Verdict,
    pub theorem: String,
    pub cert: String,
}

/// Breakpoint metadata of the region figures: vertical lines in `α`, the
/// included corner, and the two infinite-loss lines `s = c0 + c1 α`.
#[derive(Debug, Clone, Serialize)]
pub struct Breakpoints {
    pub alpha_first_branch: f64,
    pub alpha_second_branch: f64,
    pub corner: Option<(f64, f64)>,
    pub ilr_line: (f64, f64),
    pub ilr_line_resonant: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionGrid {
    pub rows: Vec<RegionRow>,
    pub breakpoints: Breakpoints,
}

/// Tabulate the classifier on an `(α, s)` grid with fixed `(d, γ, index)`.
pub fn region_grid(
    d: u32,
    gamma: f64,
    space: Space,
    index: Exponent,
    alphas: &[f64],
    ss: &[f64],
) -> Result<RegionGrid> {
    let template = RegimePoint::new(d, gamma, 1.0, space, index, 0.0)?;
    let df = d as f64;
    let inv = template.inv_idx().to_f64();
    let alpha_first = match space {
        Space::FourierLebesgue => 2.0 * df * (0.5 - inv) + gamma,
        Space::Modulation => 2.0 * df * (0.5 - inv).max(0.0) + gamma,
    };
    let alpha_second = gamma + df;
    let corner = if template.index.is_finite() {
        Some((gamma + df, -df * inv))
    } else {
        None
    };
    let breakpoints = Breakpoints {
        alpha_first_branch: alpha_first,
        alpha_second_branch: alpha_second,
        corner,
        ilr_line: (-(df - gamma) / 3.0, -1.0 / 3.0),
        ilr_line_resonant: (-(df - gamma - 1.0) / 3.0, -1.0 / 3.0),
    };
    let mut rows = Vec::with_capacity(alphas.len() * ss.len());
    for &alpha in alphas {
        for &s in ss {
            let pt = RegimePoint::new(d, gamma, alpha, space, index, s)?;
            let cls = classify(&pt);
            let cert = match cls.verdict {
                Verdict::OutsideKnownRegion => "-".to_string(),
                Verdict::NormInflationInfiniteLoss => match certificate_infinite_loss(&pt) {
                    Ok(c) => format!(
                        "{}(a={:.4},r={:.4},eps={:.4})",
                        c.scheme.name(),
                        c.a_f64(),
                        c.r_f64(),
                        c.epsilon_f64()
                    ),
                    Err(_) => "-".to_string(),
                },
                Verdict::NormInflation => {
                    let built = certificate_ni(&pt).or_else(|_| certificate_critical(&pt));
                    match built {
                        Ok(c) => format!(
                            "{}(a={:.4},r={:.4},eps={:.4})",
                            c.scheme.name(),
                            c.a_f64(),
                            c.r_f64(),
                            c.epsilon_f64()
                        ),
                        Err(_) => "-".to_string(),
                    }
                }
            };
            rows.push(RegionRow {
                alpha,
                s,
                verdict: cls.verdict,
                theorem: cls.theorem.unwrap_or_else(|| "none".into()),
                cert,
            });
        }
    }
    Ok(RegionGrid { rows, breakpoints })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flpt(d: u32, gamma: f64, alpha: f64, p: f64, s: f64) -> RegimePoint {
        RegimePoint::new(d, gamma, alpha, Space::FourierLebesgue, Exponent::Finite(p), s).unwrap()
    }

    #[test]
    fn critical_indices() {
        assert_eq!(critical_fl(3, 2.0, 2.0, Exponent::Finite(2.0)).unwrap(), 0.0);
        assert_eq!(critical_fl(1, 1.0, 2.0, Exponent::Finite(2.0)).unwrap(), -0.5);
        assert_eq!(critical_fl(2, 1.0, 3.0, Exponent::Finite(1.0)).unwrap(), -2.0);
        // q = 2 joins both branches; matches FL at p = 2
        assert_eq!(critical_mod(2, 1.0, 3.0, Exponent::Finite(2.0)).unwrap(), -1.0);
        assert_eq!(critical_mod(1, 1.0, 2.0, Exponent::Finite(1.0)).unwrap(), -0.5);
        assert_eq!(critical_mod(2, 1.0, 2.0, Exponent::Infinity).unwrap(), 0.5);
    }

    #[test]
    fn classify_fl_examples() {
        // middle branch: s below s_c = −1/2
        let c = classify_fl(&flpt(1, 1.0, 2.0, 2.0, -0.6)).unwrap();
        assert_eq!(c.verdict, Verdict::NormInflation);
        assert_eq!(c.theorem.as_deref(), Some("fl-ni"));
        // infinite loss at alpha = d = 1
        let c = classify_fl(&flpt(1, 1.0, 1.0, 2.0, -0.01)).unwrap();
        assert_eq!(c.verdict, Verdict::NormInflationInfiniteLoss);
        // s = 0 is outside every region
        let c = classify_fl(&flpt(1, 1.0, 2.0, 2.0, 0.0)).unwrap();
        assert_eq!(c.verdict, Verdict::OutsideKnownRegion);
        // boundary corner (α = γ + d, s = s_c = −d/p) is included for finite p
        let c = classify_fl(&flpt(1, 1.0, 2.0, 2.0, -0.5)).unwrap();
        assert_eq!(c.verdict, Verdict::NormInflation);
        assert!(c.schemes.contains(&Scheme::NicriLog));
    }

    #[test]
    fn classify_mod_examples() {
        // first branch (α ≤ γ at q = 1) gives NI; at α = d = 1 the
        // infinite-loss classifier also fires and wins as the stronger verdict
        let pt = RegimePoint::new(1, 1.0, 1.0, Space::Modulation, Exponent::Finite(1.0), -0.1)
            .unwrap();
        let c = classify_mod(&pt).unwrap();
        assert_eq!(c.verdict, Verdict::NormInflationInfiniteLoss);
        let pt = RegimePoint::new(1, 1.0, 0.9, Space::Modulation, Exponent::Finite(1.0), -0.1)
            .unwrap();
        let c = classify_mod(&pt).unwrap();
        assert_eq!(c.verdict, Verdict::NormInflation);
        // third branch with min(1/4, 1/(2q)) = 1/8
        let pt = RegimePoint::new(2, 1.0, 5.0, Space::Modulation, Exponent::Finite(4.0), -0.76)
            .unwrap();
        let c = classify_mod(&pt).unwrap();
        assert!(matches!(
            c.verdict,
            Verdict::NormInflation | Verdict::NormInflationInfiniteLoss
        ));
        let pt = RegimePoint::new(2, 1.0, 5.0, Space::Modulation, Exponent::Finite(4.0), -0.74)
            .unwrap();
        let c = classify_mod(&pt).unwrap();
        assert_eq!(c.verdict, Verdict::OutsideKnownRegion);
    }

    #[test]
    fn downward_closed_in_s() {
        for s in [-0.51, -0.7, -1.3, -4.0] {
            let c = classify_fl(&flpt(1, 1.0, 2.0, 2.0, s)).unwrap();
            assert_ne!(c.verdict, Verdict::OutsideKnownRegion, "s = {s}");
        }
    }

    #[test]
    fn theorem_ni_certificate_and_reverification() {
        let pt = flpt(1, 1.0, 2.0, 2.0, -1.0);
        let cert = certificate_ni(&pt).unwrap();
        assert_eq!(cert.scheme, Scheme::TheoremNi);
        let records = verify_certificate(&pt, &cert).unwrap();
        assert!(records.iter().all(|r| r.margin > 0.0 || !r.strict));
        // the headline exponent inequality from the construction
        let d = 1.0;
        let grow = -2.0 - cert.epsilon_f64() + 1.0 - d
            + 3.0 * cert.r_f64()
            + 2.0 * cert.a_f64()
            + cert.a_f64() * (0.5 - 1.0 / d);
        assert!(grow > 0.0);
    }

    #[test]
    fn certificate_rejects_critical_s() {
        // s = s_c exactly: the main scheme must refuse
        let pt = flpt(1, 1.0, 2.0, 2.0, -0.5);
        assert!(build_theorem_ni(&pt).is_err());
        // but the log-corrected critical certificate exists (α ≤ d + γ)
        let cert = certificate_critical(&pt).unwrap();
        assert_eq!(cert.scheme, Scheme::NicriLog);
        assert_eq!(cert.a, Rat::from_int(1));
    }

    #[test]
    fn nicri_feasibility_boundary() {
        // a = (α+d−γ)/2 ≤ d ⇔ α ≤ d + γ
        let ok = flpt(1, 1.0, 2.0, 2.0, -0.5);
        assert!(certificate_critical(&ok).is_ok());
        let too_dispersive = flpt(1, 1.0, 3.0, 2.0, -0.5);
        assert!(certificate_critical(&too_dispersive).is_err());
        // p = ∞ needs strict inequality
        let pt = RegimePoint::new(1, 1.0, 2.0, Space::FourierLebesgue, Exponent::Infinity, 0.0)
            .unwrap();
        assert!(certificate_critical(&pt).is_err());
        let pt = RegimePoint::new(1, 1.0, 1.5, Space::FourierLebesgue, Exponent::Infinity, 0.0)
            .unwrap();
        assert!(certificate_critical(&pt).is_ok());
    }

    #[test]
    fn infinite_loss_certificates() {
        // ilr2 feasible: s < −(d−γ+α−1)/3 = −1/2 and α ∈ E_2
        let pt = RegimePoint::new(2, 1.0, 1.5, Space::FourierLebesgue, Exponent::Finite(2.0), -0.6)
            .unwrap();
        let cert = certificate_infinite_loss(&pt).unwrap();
        assert_eq!(cert.scheme, Scheme::Ilr2);
        // d = 1, α = 2 ∉ E_1 and −0.6 > −2/3: infeasible
        let pt = flpt(1, 1.0, 2.0, 2.0, -0.6);
        assert!(certificate_infinite_loss(&pt).is_err());
        // −0.7 < −2/3: plain scheme feasible
        let pt = flpt(1, 1.0, 2.0, 2.0, -0.7);
        let cert = certificate_infinite_loss(&pt).unwrap();
        assert_eq!(cert.scheme, Scheme::Ilr0);
    }

    #[test]
    fn scheme_gate_matches_construction_on_a_small_grid() {
        let ss = [-2.0, -1.0, -0.75, -0.5, -0.25, 0.0];
        let alphas = [0.5, 1.0, 2.0, 3.5];
        let ps = [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinity];
        for space in [Space::FourierLebesgue, Space::Modulation] {
            for &alpha in &alphas {
                for &s in &ss {
                    for &p in &ps {
                        let pt = RegimePoint::new(1, 1.0, alpha, space, p, s).unwrap();
                        for scheme in Scheme::ALL {
                            let applies = scheme_applies(&pt, scheme);
                            let built = certificate_for_scheme(&pt, scheme).is_ok();
                            assert_eq!(
                                applies, built,
                                "scheme {scheme:?} at alpha={alpha}, s={s}, p={p:?}, {space:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn region_grid_breakpoints() {
        let grid = region_grid(
            1,
            1.0,
            Space::FourierLebesgue,
            Exponent::Finite(2.0),
            &[0.5, 1.0, 2.0, 3.0],
            &[-1.0, -0.5, 0.0],
        )
        .unwrap();
        assert_eq!(grid.breakpoints.alpha_first_branch, 1.0);
        assert_eq!(grid.breakpoints.alpha_second_branch, 2.0);
        assert_eq!(grid.breakpoints.corner, Some((2.0, -0.5)));
        let corner_row = grid
            .rows
            .iter()
            .find(|r| r.alpha == 2.0 && r.s == -0.5)
            .unwrap();
        assert_eq!(corner_row.verdict, Verdict::NormInflation);
    }
}
