//! Support-center construction: `Σ = {N e₁, 2N e₁}` (collinear) or the
//! resonant `Σ = {N v₁, 2N v₁, N v₂, N v₃}` built from the planar triple at
//! `θ = π/4`, gated on membership of `α` in `E_d`.

use nilab_core::error::{Error, Result};
use nilab_core::lattice::CubeUnion;
use nilab_core::resonance::{classify_ed, cone_check, Cone, ResonantTriple};

use crate::config::SigmaKind;

pub struct SigmaBuild {
    pub centers: Vec<Vec<f64>>,
    /// Witness triple behind the resonant construction.
    pub triple: Option<ResonantTriple>,
    pub cone: Cone,
}

/// Builds the center list and checks the cone condition for `Ω` at side `A`.
pub fn build_sigma(kind: SigmaKind, n: f64, d: usize, alpha: f64, a_side: f64) -> Result<SigmaBuild> {
    if !(n > 0.0) {
        return Err(Error::Domain(format!("frequency scale must be positive, got {n}")));
    }
    let (centers, triple) = match kind {
        SigmaKind::Collinear => {
            let mut e1 = vec![0.0; d];
            e1[0] = n;
            let mut e2 = vec![0.0; d];
            e2[0] = 2.0 * n;
            (vec![e1, e2], None)
        }
        SigmaKind::Resonant => {
            let ed = classify_ed(d, alpha)?;
            if !ed.member {
                return Err(Error::Domain(format!(
                    "resonant support needs alpha in E_d: {}",
                    ed.reason
                )));
            }
            let witness = ed.witness.expect("members carry a witness");
            if witness.degenerate {
                return Err(Error::Degenerate(
                    "witness triple has a zero leg; unusable as support centers".into(),
                ));
            }
            let scaled = witness.scaled(n);
            let centers = vec![
                scaled.v1.clone(),
                scaled.v1.iter().map(|x| 2.0 * x).collect(),
                scaled.v2.clone(),
                scaled.v3.clone(),
            ];
            (centers, Some(scaled))
        }
    };
    let omega = CubeUnion::new(a_side, centers.clone())?;
    if !omega.cubes_disjoint() {
        return Err(Error::Config(format!(
            "support cubes overlap at N = {n}, A = {a_side}; increase N or shrink A"
        )));
    }
    let cone = cone_check(&omega)?;
    Ok(SigmaBuild { centers, triple, cone })
}
