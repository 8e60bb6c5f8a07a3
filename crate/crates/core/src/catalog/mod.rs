//! Map constructions with their claimed constants.

mod combinators;
mod maps;
pub mod registry;
pub mod scalar_orbit;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::domain::{DomainError, DomainSpec};
use crate::retraction::RetractionError;
use crate::scalar::Scalar;
use crate::seq::{NormKind, SeqError, SeqVec};

pub use combinators::{holderize, lambda_scale, lift_to_ball, retraction_map, LiftVariant};
pub use maps::{
    affine_cube, affine_cube_with_horizon, affine_mixing, baseline_c, c0_family,
    c0_family_with_breadth, deficiency, goebel_kirk, hyperconvex, l1_ball_composite,
    l1_ball_radius, norming, prus, renormed_l1, shift_simplex,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("invalid parameter `{param}`: {constraint}")]
    InvalidParameter { param: String, constraint: String },
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

impl From<RetractionError> for CatalogError {
    fn from(e: RetractionError) -> Self {
        match e {
            RetractionError::DomainViolation(m) => CatalogError::DomainViolation(m),
            RetractionError::InvalidParameter { param, constraint } => {
                CatalogError::InvalidParameter { param, constraint }
            }
            RetractionError::Seq(s) => CatalogError::Seq(s),
        }
    }
}

impl From<DomainError> for CatalogError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::InvalidParameter { param, constraint } => {
                CatalogError::InvalidParameter { param, constraint }
            }
            other => CatalogError::InvalidParameter { param: "domain".into(), constraint: other.to_string() },
        }
    }
}

pub(crate) fn invalid(param: &str, constraint: &str) -> CatalogError {
    CatalogError::InvalidParameter { param: param.into(), constraint: constraint.into() }
}

pub(crate) fn require(ok: bool, param: &str, constraint: &str) -> Result<(), CatalogError> {
    if ok {
        Ok(())
    } else {
        Err(invalid(param, constraint))
    }
}

pub(crate) fn in_open_unit<S: Scalar>(v: S, param: &str) -> Result<(), CatalogError> {
    require(v > S::zero() && v < S::one(), param, &format!("{param} must lie in (0,1)"))
}

/// A rule `n ↦ s_n` for a null sequence in (0,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceRule {
    /// `s_n = ratio^n`
    Geometric(f64),
    /// `s_n = 1/(n+1)`
    Harmonic,
}

impl SequenceRule {
    pub fn value<S: Scalar>(&self, n: usize) -> S {
        match *self {
            SequenceRule::Geometric(q) => S::lit(q).powi(n as i32),
            SequenceRule::Harmonic => S::one() / S::lit((n + 1) as f64),
        }
    }

    pub fn validate(&self, param: &str) -> Result<(), CatalogError> {
        match *self {
            SequenceRule::Geometric(q) => require(
                q > 0.0 && q < 1.0,
                param,
                "geometric ratio must lie in (0,1) so the sequence is a null sequence in (0,1)",
            ),
            SequenceRule::Harmonic => Ok(()),
        }
    }
}

impl fmt::Display for SequenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceRule::Geometric(q) => write!(f, "{q}^n"),
            SequenceRule::Harmonic => write!(f, "1/(n+1)"),
        }
    }
}

/// Iterate constants for asymptotically Hölder maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaRule {
    /// `κ_n = 2 ∏_{i=2}^n (1 - 1/i²)`
    GoebelKirk,
}

impl KappaRule {
    pub fn kappa<S: Scalar>(&self, n: usize) -> S {
        match self {
            KappaRule::GoebelKirk => (2..=n).fold(S::two(), |k, i| {
                let i = S::lit(i as f64);
                k * (S::one() - (i * i).recip())
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FixedPointSet<S> {
    Empty,
    Singleton(SeqVec<S>),
    Unknown,
}

impl<S: Scalar> fmt::Display for FixedPointSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixedPointSet::Empty => write!(f, "empty"),
            FixedPointSet::Singleton(z) => write!(f, "singleton {z}"),
            FixedPointSet::Unknown => write!(f, "unknown"),
        }
    }
}

/// Constants a construction is claimed to satisfy.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimProfile<S> {
    pub alpha: S,
    /// `L` in `‖Tx - Ty‖ <= L ‖x - y‖^α`.
    pub holder_constant: S,
    /// The Hölder bound holds for every iterate.
    pub uniform: bool,
    /// The Hölder bound is measured and shown but never fails a run.
    pub holder_report_only: bool,
    pub asymptotic_kappa: Option<KappaRule>,
    pub displacement_bound: Option<S>,
    pub displacement_formula: Option<String>,
    pub fixed_point_set: FixedPointSet<S>,
    /// Plain Lipschitz constant, when one is claimed alongside the Hölder one.
    pub classical_lipschitz: Option<S>,
    /// `c` in `c ‖x - y‖ <= ‖Tx - Ty‖`; always report-only.
    pub lower_lipschitz: Option<S>,
    /// Known defect of the finite representation of the fixed point.
    pub truncation_residual: S,
    pub affine: bool,
    pub isometry: bool,
    /// `λ` in `‖F^n x - F^{n+1} x‖ <= λ^n`.
    pub displacement_decay: Option<S>,
    /// Recorded negative claim: the map is not Lipschitz.
    pub not_lipschitz: bool,
}

impl<S: Scalar> ClaimProfile<S> {
    pub fn holder(alpha: S, holder_constant: S) -> Self {
        ClaimProfile {
            alpha,
            holder_constant,
            uniform: false,
            holder_report_only: false,
            asymptotic_kappa: None,
            displacement_bound: None,
            displacement_formula: None,
            fixed_point_set: FixedPointSet::Empty,
            classical_lipschitz: None,
            lower_lipschitz: None,
            truncation_residual: S::zero(),
            affine: false,
            isometry: false,
            displacement_decay: None,
            not_lipschitz: false,
        }
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        require(self.alpha > S::zero(), "alpha", "alpha > 0")?;
        require(self.holder_constant > S::zero(), "holder_constant", "holder constant > 0")?;
        require(
            !(self.asymptotic_kappa.is_some() && self.uniform),
            "asymptotic_kappa",
            "an asymptotic profile excludes a uniform claim",
        )
    }

    /// Bound on `‖T^n x - T^n y‖ / ‖x - y‖^α` from the asymptotic profile.
    pub fn asymptotic_bound(&self, n: usize) -> Option<S> {
        self.asymptotic_kappa
            .map(|k| k.kappa::<S>(n) * S::two().powf(S::one() - self.alpha))
    }

    pub fn summary(&self) -> String {
        let mut parts = vec![format!("alpha={}", self.alpha), format!("L={}", self.holder_constant)];
        if self.uniform {
            parts.push("uniform".into());
        }
        if self.holder_report_only {
            parts.push("holder report-only".into());
        }
        if let Some(k) = self.asymptotic_kappa {
            parts.push(match k {
                KappaRule::GoebelKirk => "kappa_n=2*prod_{i=2}^n (1-1/i^2)".into(),
            });
        }
        if let Some(c) = self.classical_lipschitz {
            parts.push(format!("lipschitz={c}"));
        }
        if let Some(d) = self.displacement_bound {
            parts.push(format!("d(T,K)<={d}"));
        }
        if let Some(f) = &self.displacement_formula {
            parts.push(format!("d(T,K)<={f}"));
        }
        if let Some(l) = self.displacement_decay {
            parts.push(format!("|F^n x - F^(n+1) x|<={l}^n"));
        }
        if self.affine {
            parts.push("affine".into());
        }
        if self.isometry {
            parts.push("isometry".into());
        }
        if self.not_lipschitz {
            parts.push("not lipschitz".into());
        }
        parts.push(format!("fixed points: {}", self.fixed_point_set));
        parts.join(", ")
    }
}

type ApplyFn<S> = dyn Fn(&SeqVec<S>) -> Result<SeqVec<S>, CatalogError> + Send + Sync;
type OracleFn<S> = dyn Fn(&SeqVec<S>, usize) -> Result<SeqVec<S>, CatalogError> + Send + Sync;

/// A construction: evaluation rule, domain, norm and claims.
#[derive(Clone)]
pub struct MapInstance<S> {
    pub name: String,
    pub params: Map<String, Value>,
    pub domain: DomainSpec<S>,
    pub norm: NormKind<S>,
    pub claims: ClaimProfile<S>,
    pub formula: String,
    apply: Arc<ApplyFn<S>>,
    oracle: Option<Arc<OracleFn<S>>>,
}

impl<S: Scalar> fmt::Debug for MapInstance<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapInstance")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("norm", &self.norm)
            .field("claims", &self.claims)
            .field("oracle", &self.oracle.is_some())
            .finish()
    }
}

impl<S: Scalar> MapInstance<S> {
    pub(crate) fn new(
        name: &str,
        domain: DomainSpec<S>,
        norm: NormKind<S>,
        claims: ClaimProfile<S>,
        formula: impl Into<String>,
        apply: impl Fn(&SeqVec<S>) -> Result<SeqVec<S>, CatalogError> + Send + Sync + 'static,
    ) -> Result<Self, CatalogError> {
        claims.validate()?;
        Ok(MapInstance {
            name: name.into(),
            params: Map::new(),
            domain,
            norm,
            claims,
            formula: formula.into(),
            apply: Arc::new(apply),
            oracle: None,
        })
    }

    pub(crate) fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }

    pub(crate) fn scalar_param(self, key: &str, v: S) -> Self {
        self.param(key, v.as_f64())
    }

    pub(crate) fn with_oracle(
        mut self,
        oracle: impl Fn(&SeqVec<S>, usize) -> Result<SeqVec<S>, CatalogError> + Send + Sync + 'static,
    ) -> Self {
        self.oracle = Some(Arc::new(oracle));
        self
    }

    pub fn apply(&self, x: &SeqVec<S>) -> Result<SeqVec<S>, CatalogError> {
        (self.apply)(x)
    }

    /// `T^n x` by repeated application; `n = 0` returns `x`.
    pub fn iterate(&self, x: &SeqVec<S>, n: usize) -> Result<SeqVec<S>, CatalogError> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    pub fn has_oracle(&self) -> bool {
        self.oracle.is_some()
    }

    /// Closed-form `T^n x`, when one is known.
    pub fn oracle(&self, x: &SeqVec<S>, n: usize) -> Option<Result<SeqVec<S>, CatalogError>> {
        self.oracle.as_ref().map(|o| o(x, n))
    }

    pub fn with_domain(mut self, domain: DomainSpec<S>) -> Self {
        self.domain = domain;
        self
    }

    pub fn dist(&self, x: &SeqVec<S>, y: &SeqVec<S>) -> Result<S, CatalogError> {
        Ok(x.dist(y, self.norm)?)
    }
}
