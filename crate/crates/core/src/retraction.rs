//! Lipschitz retractions used as building blocks by the catalog.

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod exact;

pub use exact::{iota_mu_q_exact, ExactIotaMuQ};

use crate::domain::NormConfig;
use crate::scalar::Scalar;
use crate::seq::{NormKind, SeqError, SeqVec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetractionError {
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("invalid parameter `{param}`: {constraint}")]
    InvalidParameter { param: String, constraint: String },
    #[error(transparent)]
    Seq(#[from] SeqError),
}

fn l1<S: Scalar>(x: &SeqVec<S>) -> Result<S, RetractionError> {
    Ok(x.norm(NormKind::l1())?)
}

// Relative slack for the boundary tests on ‖x‖₁, so that points pushed to the
// sphere by an earlier step are not rejected over rounding.
fn slack<S: Scalar>(r: S) -> S {
    r * S::lit(1e-12)
}

/// `x` if `‖x‖ <= r`, otherwise `r x / ‖x‖`.
pub fn radial_retract<S: Scalar>(
    x: &SeqVec<S>,
    r: S,
    norm: NormKind<S>,
) -> Result<SeqVec<S>, RetractionError> {
    let n = x.norm(norm)?;
    if n <= r {
        Ok(x.clone())
    } else {
        Ok(x.scale(r / n))
    }
}

pub fn abs_retract<S: Scalar>(x: &SeqVec<S>) -> SeqVec<S> {
    x.map(|t| t.abs())
}

pub fn positive_part<S: Scalar>(x: &SeqVec<S>) -> SeqVec<S> {
    x.map(|t| t.max(S::zero()))
}

/// Coordinatewise `min(t, r)` on the positive cone.
pub fn clamp_retract<S: Scalar>(x: &SeqVec<S>, r: S) -> Result<SeqVec<S>, RetractionError> {
    if x.tail() < S::zero() {
        return Err(RetractionError::DomainViolation("clamp: negative tail".into()));
    }
    if let Some(&(i, _)) = x.entries().iter().find(|e| e.1 < S::zero()) {
        return Err(RetractionError::DomainViolation(format!("clamp: t_{i} < 0")));
    }
    Ok(x.map(|t| t.min(r)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IotaMuQ<S> {
    pub iota: usize,
    pub mu: S,
    pub q: SeqVec<S>,
}

/// `ι(x)`, `μ(x)` and `Q(x)` for `r/2 <= ‖x‖₁ < r`.
///
/// `ι` is the first index whose ℓ₁ suffix mass drops below `r - ‖x‖₁`; `Q`
/// keeps the coordinates after `ι` and the part of `t_ι` needed to make
/// `‖Q(x)‖₁ = r - ‖x‖₁`.
pub fn iota_mu_q<S: Scalar>(x: &SeqVec<S>, r: S) -> Result<IotaMuQ<S>, RetractionError> {
    let n = l1(x)?;
    if !(n >= r / S::two() && n < r) {
        return Err(RetractionError::DomainViolation(format!(
            "iota_mu_q needs r/2 <= ‖x‖₁ < r, got ‖x‖₁ = {n}, r = {r}"
        )));
    }
    Ok(iota_mu_q_unchecked(x, r, n))
}

fn iota_mu_q_unchecked<S: Scalar>(x: &SeqVec<S>, r: S, n: S) -> IotaMuQ<S> {
    let gap = r - n;
    let entries = x.entries();
    // suffix[m] = sum of |t| over entries[m..]
    let mut suffix = vec![S::zero(); entries.len() + 1];
    for m in (0..entries.len()).rev() {
        suffix[m] = suffix[m + 1] + entries[m].1.abs();
    }
    // The suffix mass after index j only changes at support indices, so ι is
    // either 1 or the support index at which it first drops below the gap.
    let (iota, after, t_iota) = if suffix[0] < gap {
        let t1 = x.at(1);
        let after = if entries.first().map(|e| e.0) == Some(1) { suffix[1] } else { suffix[0] };
        (1, after, t1)
    } else {
        let m = (0..entries.len())
            .find(|&m| suffix[m + 1] < gap)
            .expect("suffix mass reaches 0 < gap");
        (entries[m].0, suffix[m + 1], entries[m].1)
    };
    let lead = gap - after;
    let mu = if t_iota == S::zero() { S::one() } else { lead / t_iota.abs() };
    let mut q: Vec<(usize, S)> = vec![(iota, lead.copysign(t_iota))];
    q.extend(entries.iter().filter(|e| e.0 > iota).copied());
    let q = SeqVec::from_entries(q, S::zero()).expect("ascending indices");
    IotaMuQ { iota, mu, q }
}

/// `Q` on the closure of `{r/2 <= ‖x‖₁ < r}`: 0 on the sphere.
pub fn q_map<S: Scalar>(x: &SeqVec<S>, r: S) -> Result<SeqVec<S>, RetractionError> {
    let n = l1(x)?;
    if n >= r {
        return Ok(SeqVec::zero());
    }
    iota_mu_q(x, r).map(|v| v.q)
}

/// Retraction of the ℓ₁ ball of radius `r` onto its sphere.
pub fn l1_sphere_retract<S: Scalar>(x: &SeqVec<S>, r: S) -> Result<SeqVec<S>, RetractionError> {
    let n = l1(x)?;
    if n > r + slack(r) {
        return Err(RetractionError::DomainViolation(format!(
            "l1_sphere_retract needs ‖x‖₁ <= r, got ‖x‖₁ = {n}, r = {r}"
        )));
    }
    if n <= r / S::two() {
        return Ok(sphere_inner_branch(x, r, n));
    }
    Ok(sphere_outer_branch(x, r, n))
}

fn sphere_inner_branch<S: Scalar>(x: &SeqVec<S>, r: S, n: S) -> SeqVec<S> {
    let e1 = SeqVec::from_entries([(1, r - S::two() * n)], S::zero()).expect("index 1");
    SeqVec::axpy(S::one(), &e1, S::two(), &x.shift_right())
}

fn sphere_outer_branch<S: Scalar>(x: &SeqVec<S>, r: S, n: S) -> SeqVec<S> {
    if n >= r {
        return x.clone();
    }
    let q = iota_mu_q_unchecked(x, r, n).q;
    SeqVec::axpy(S::one(), &x.sub(&q), S::two(), &q.shift_right())
}

/// Both branch formulas of the sphere retraction, for consistency checks near
/// `‖x‖₁ = r/2`. Returns `(inner, outer)`.
pub fn l1_sphere_branches<S: Scalar>(
    x: &SeqVec<S>,
    r: S,
) -> Result<(SeqVec<S>, SeqVec<S>), RetractionError> {
    let n = l1(x)?;
    Ok((sphere_inner_branch(x, r, n), sphere_outer_branch(x, r, n)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RetractionTag {
    pub name: &'static str,
    pub claimed_lipschitz: f64,
    pub source: &'static str,
    pub target: &'static str,
}

pub const RADIAL_TAG: RetractionTag =
    RetractionTag { name: "radial", claimed_lipschitz: 2.0, source: "X", target: "B_X(r)" };
pub const ABS_TAG: RetractionTag =
    RetractionTag { name: "abs", claimed_lipschitz: 1.0, source: "X", target: "positive cone" };
pub const POSITIVE_PART_TAG: RetractionTag = RetractionTag {
    name: "positive_part",
    claimed_lipschitz: 1.0,
    source: "X",
    target: "positive cone",
};
pub const CLAMP_TAG: RetractionTag = RetractionTag {
    name: "clamp",
    claimed_lipschitz: 1.0,
    source: "positive cone",
    target: "coefficient box [0, r]",
};
pub const Q_TAG: RetractionTag = RetractionTag {
    name: "q",
    claimed_lipschitz: 3.0,
    source: "r/2 <= ‖x‖₁ <= r",
    target: "B_l1(r)",
};
pub const L1_SPHERE_TAG: RetractionTag =
    RetractionTag { name: "l1_sphere", claimed_lipschitz: 8.0, source: "B_l1(r)", target: "S_l1(r)" };

/// A retraction addressed by name, as in configs:
/// `{"kind": "radial", "r": 0.5, "norm": "sup"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RetractionSpec {
    Radial {
        r: f64,
        #[serde(default = "default_norm")]
        norm: NormConfig,
    },
    Abs,
    PositivePart,
    Clamp {
        r: f64,
    },
    L1Sphere {
        r: f64,
    },
}

fn default_norm() -> NormConfig {
    NormConfig::Sup
}

impl RetractionSpec {
    pub fn tag(&self) -> RetractionTag {
        match self {
            RetractionSpec::Radial { .. } => RADIAL_TAG,
            RetractionSpec::Abs => ABS_TAG,
            RetractionSpec::PositivePart => POSITIVE_PART_TAG,
            RetractionSpec::Clamp { .. } => CLAMP_TAG,
            RetractionSpec::L1Sphere { .. } => L1_SPHERE_TAG,
        }
    }

    pub fn validate(&self) -> Result<(), RetractionError> {
        let r = match self {
            RetractionSpec::Radial { r, norm } => {
                norm.build().map_err(|_| RetractionError::InvalidParameter {
                    param: "norm".into(),
                    constraint: "p must be >= 1".into(),
                })?;
                *r
            }
            RetractionSpec::Clamp { r } | RetractionSpec::L1Sphere { r } => *r,
            _ => return Ok(()),
        };
        if r > 0.0 && r.is_finite() {
            Ok(())
        } else {
            Err(RetractionError::InvalidParameter { param: "r".into(), constraint: "r > 0".into() })
        }
    }

    pub fn apply<S: Scalar>(&self, x: &SeqVec<S>) -> Result<SeqVec<S>, RetractionError> {
        match *self {
            RetractionSpec::Radial { r, norm } => {
                let norm = match norm {
                    NormConfig::Sup => NormKind::Sup,
                    NormConfig::Lp(p) => NormKind::Lp(S::lit(p)),
                    NormConfig::MaxPosNegL1 => NormKind::MaxPosNegL1,
                };
                radial_retract(x, S::lit(r), norm)
            }
            RetractionSpec::Abs => Ok(abs_retract(x)),
            RetractionSpec::PositivePart => Ok(positive_part(x)),
            RetractionSpec::Clamp { r } => clamp_retract(x, S::lit(r)),
            RetractionSpec::L1Sphere { r } => l1_sphere_retract(x, S::lit(r)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(d: &[f64]) -> SeqVec<f64> {
        SeqVec::from_dense(d, 0.0)
    }

    #[test]
    fn radial_examples() {
        let e1 = v(&[1.0]);
        assert_eq!(radial_retract(&e1, 0.5, NormKind::l2()).unwrap(), v(&[0.5]));
        let x = v(&[0.1, -0.2]);
        assert_eq!(radial_retract(&x, 0.5, NormKind::l2()).unwrap(), x);
        assert!(radial_retract(&SeqVec::constant(1.0), 0.5, NormKind::l2()).is_err());
    }

    #[test]
    fn coordinatewise_examples() {
        assert_eq!(abs_retract(&v(&[1.0, -1.0])), v(&[1.0, 1.0]));
        assert_eq!(positive_part(&v(&[-1.0, 2.0])), v(&[0.0, 2.0]));
        let r = 0.25;
        assert_eq!(clamp_retract(&v(&[2.0 * r, r / 2.0]), r).unwrap(), v(&[r, r / 2.0]));
        assert!(matches!(
            clamp_retract(&v(&[0.1, -0.1]), r),
            Err(RetractionError::DomainViolation(_))
        ));
    }

    #[test]
    fn iota_mu_q_worked_example() {
        let x = v(&[0.6, 0.3]);
        let out = iota_mu_q(&x, 1.0).unwrap();
        assert_eq!(out.iota, 2);
        assert!((out.mu - 1.0 / 3.0).abs() <= 1e-15);
        assert!(out.q.sup_dist(&SeqVec::from_entries([(2, 0.1)], 0.0).unwrap()) <= 1e-15);
        assert_eq!(q_map(&v(&[0.5, -0.5]), 1.0).unwrap(), SeqVec::zero());
        assert!(iota_mu_q(&v(&[0.1]), 1.0).is_err());
        assert!(iota_mu_q(&v(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn q_mass_matches_gap() {
        let x = v(&[0.2, -0.1, 0.0, 0.15, 0.05]);
        let out = iota_mu_q(&x, 0.9).unwrap();
        let gap = 0.9 - 0.5;
        assert!((out.q.norm(NormKind::l1()).unwrap() - gap).abs() < 1e-15);
        assert!(out.mu > 0.0 && out.mu <= 1.0);
    }

    #[test]
    fn sphere_examples() {
        let r = 0.5;
        assert_eq!(l1_sphere_retract(&SeqVec::zero(), r).unwrap(), v(&[r]));
        let half = v(&[0.1, -0.15]);
        let y = l1_sphere_retract(&half, r).unwrap();
        assert!((y.norm(NormKind::l1()).unwrap() - r).abs() <= 1e-15);
        let on = v(&[0.2, -0.3]);
        assert_eq!(l1_sphere_retract(&on, r).unwrap(), on);
        assert!(l1_sphere_retract(&v(&[0.6]), r).is_err());
        let mid = v(&[0.3, 0.1]);
        let y = l1_sphere_retract(&mid, r).unwrap();
        assert!((y.norm(NormKind::l1()).unwrap() - r).abs() <= 1e-15);
    }

    #[test]
    fn spec_by_name() {
        let s: RetractionSpec = serde_json::from_str(r#"{"kind": "l1_sphere", "r": 0.5}"#).unwrap();
        assert_eq!(s.tag().claimed_lipschitz, 8.0);
        assert_eq!(s.apply(&SeqVec::<f64>::zero()).unwrap(), v(&[0.5]));
        let s: RetractionSpec =
            serde_json::from_str(r#"{"kind": "radial", "r": 0.5, "norm": {"lp": 2}}"#).unwrap();
        assert_eq!(s.apply(&v(&[1.0])).unwrap(), v(&[0.5]));
        assert!(serde_json::from_str::<RetractionSpec>(r#"{"kind": "clamp", "r": 1, "s": 2}"#).is_err());
        assert!(RetractionSpec::Clamp { r: -1.0 }.validate().is_err());
    }
}
