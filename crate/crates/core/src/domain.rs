//! Convex sets the constructions live on: membership, sampling and a few
//! named points per set.
//!
//! Infinite-dimensional sets are sampled on their first `breadth` coordinates.
//! `SigmaBand` is the one set whose members cannot have finite support (every
//! coordinate is bounded below by `q^i > 0`); it is represented with explicit
//! coordinates up to `breadth`, tail 0, and its floor constraints are checked
//! only on indices `<= breadth`.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::rng::rng_from;
use crate::scalar::Scalar;
use crate::seq::{NormKind, SeqVec};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_BREADTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("invalid parameter `{param}`: {constraint}")]
    InvalidParameter { param: String, constraint: String },
    #[error("invalid budget: breadth must be at least 1")]
    InvalidBudget,
    #[error("unknown domain kind `{0}`")]
    UnknownKind(String),
    #[error("domain config: {0}")]
    Config(String),
}

fn invalid(param: &str, constraint: &str) -> DomainError {
    DomainError::InvalidParameter { param: param.into(), constraint: constraint.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<S> {
    Ball { r: S, norm: NormKind<S> },
    PositiveBall { r: S, norm: NormKind<S> },
    /// `t_i >= 0`, `sum t_i = mass`, inside l_p.
    Simplex { p: S, mass: S },
    /// `t_i >= 0`, `sum t_i <= mass_cap`.
    SubSimplex { mass_cap: S },
    /// `0 <= t_n <= r` in c0.
    CoefficientBox { r: S },
    /// `t_1 = 1 - delta`, `q^i <= t_i <= 1 - delta` in c0.
    SigmaBand { delta: S, q: S },
    /// `0 <= t_n <= cap` in c.
    CInterval { cap: S },
}

impl<S: Scalar> DomainKind<S> {
    pub fn name(&self) -> &'static str {
        match self {
            DomainKind::Ball { .. } => "Ball",
            DomainKind::PositiveBall { .. } => "PositiveBall",
            DomainKind::Simplex { .. } => "Simplex",
            DomainKind::SubSimplex { .. } => "SubSimplex",
            DomainKind::CoefficientBox { .. } => "CoefficientBox",
            DomainKind::SigmaBand { .. } => "SigmaBand",
            DomainKind::CInterval { .. } => "CInterval",
        }
    }
}

/// A constraint that a vector failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub index: Option<usize>,
    /// How far past the tolerance the constraint was missed.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<S> {
    pub kind: DomainKind<S>,
    pub tol: S,
    pub breadth: usize,
}

fn positive<S: Scalar>(name: &str, v: S) -> Result<(), DomainError> {
    if v > S::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be a finite number > 0"))
    }
}

impl<S: Scalar> DomainSpec<S> {
    pub fn new(kind: DomainKind<S>) -> Result<Self, DomainError> {
        match &kind {
            DomainKind::Ball { r, norm } | DomainKind::PositiveBall { r, norm } => {
                positive("r", *r)?;
                if let NormKind::Lp(p) = norm {
                    NormKind::lp(*p).map_err(|_| invalid("norm", "p must be >= 1"))?;
                }
            }
            DomainKind::Simplex { p, mass } => {
                NormKind::lp(*p).map_err(|_| invalid("p", "p must be >= 1"))?;
                positive("mass", *mass)?;
            }
            DomainKind::SubSimplex { mass_cap } => positive("mass_cap", *mass_cap)?,
            DomainKind::CoefficientBox { r } => positive("r", *r)?,
            DomainKind::SigmaBand { delta, q } => {
                if !(*delta > S::zero() && *delta < S::one()) {
                    return Err(invalid("delta", "delta must lie in (0,1)"));
                }
                if !(*q > S::zero() && *q < S::one() - *delta) {
                    return Err(invalid("q", "sigma_1 = q must satisfy 0 < q < 1 - delta"));
                }
            }
            DomainKind::CInterval { cap } => positive("cap", *cap)?,
        }
        Ok(DomainSpec { kind, tol: S::lit(DEFAULT_TOL), breadth: DEFAULT_BREADTH })
    }

    pub fn with_tol(mut self, tol: S) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_breadth(mut self, breadth: usize) -> Self {
        self.breadth = breadth.max(1);
        self
    }

    pub fn ball(r: S, norm: NormKind<S>) -> Result<Self, DomainError> {
        Self::new(DomainKind::Ball { r, norm })
    }

    /// The norm the set is naturally measured in.
    pub fn ambient_norm(&self) -> NormKind<S> {
        match self.kind {
            DomainKind::Ball { norm, .. } | DomainKind::PositiveBall { norm, .. } => norm,
            DomainKind::Simplex { p, .. } => NormKind::Lp(p),
            DomainKind::SubSimplex { .. } => NormKind::MaxPosNegL1,
            _ => NormKind::Sup,
        }
    }

    /// `q^i`, the floor of a `SigmaBand` at coordinate `i`.
    pub fn sigma(q: S, i: usize) -> S {
        q.powi(i as i32)
    }

    /// `Ok(())` when `x` is a member; otherwise the first violated constraint.
    pub fn check(&self, x: &SeqVec<S>) -> Result<(), Violation> {
        let tol = self.tol;
        let fail = |constraint: String, index: Option<usize>, excess: S| {
            Err(Violation { constraint, index, excess: excess.as_f64() })
        };
        let zero_tail = |what: &str| -> Result<(), Violation> {
            if x.tail() != S::zero() {
                return fail(format!("{what}: tail must be 0"), None, x.tail().abs());
            }
            Ok(())
        };
        let floor = |lo: S| -> Result<(), Violation> {
            if x.tail() < lo - tol {
                return fail(format!("tail >= {lo}"), None, lo - x.tail());
            }
            for &(i, v) in x.entries() {
                if v < lo - tol {
                    return fail(format!("t_{i} >= {lo}"), Some(i), lo - v);
                }
            }
            Ok(())
        };
        let ceiling = |hi: S| -> Result<(), Violation> {
            if x.tail() > hi + tol {
                return fail(format!("tail <= {hi}"), None, x.tail() - hi);
            }
            for &(i, v) in x.entries() {
                if v > hi + tol {
                    return fail(format!("t_{i} <= {hi}"), Some(i), v - hi);
                }
            }
            Ok(())
        };
        match self.kind {
            DomainKind::Ball { r, norm } | DomainKind::PositiveBall { r, norm } => {
                if norm.requires_zero_tail() {
                    zero_tail("ball")?;
                }
                if matches!(self.kind, DomainKind::PositiveBall { .. }) {
                    floor(S::zero())?;
                }
                let n = x.norm(norm).expect("tail checked");
                if n > r + tol {
                    return fail(format!("‖x‖_{norm} <= {r}"), None, n - r);
                }
            }
            DomainKind::Simplex { mass, .. } => {
                zero_tail("simplex")?;
                floor(S::zero())?;
                let s = x.support_sum();
                if (s - mass).abs() > tol {
                    return fail(format!("sum t_i = {mass}"), None, (s - mass).abs());
                }
            }
            DomainKind::SubSimplex { mass_cap } => {
                zero_tail("sub-simplex")?;
                floor(S::zero())?;
                let s = x.support_sum();
                if s > mass_cap + tol {
                    return fail(format!("sum t_i <= {mass_cap}"), None, s - mass_cap);
                }
            }
            DomainKind::CoefficientBox { r } => {
                zero_tail("coefficient box")?;
                floor(S::zero())?;
                ceiling(r)?;
            }
            DomainKind::SigmaBand { delta, q } => {
                zero_tail("sigma band")?;
                let top = S::one() - delta;
                let t1 = x.at(1);
                if (t1 - top).abs() > tol {
                    return fail(format!("t_1 = {top}"), Some(1), (t1 - top).abs());
                }
                for i in 2..=self.breadth {
                    let (t, s) = (x.at(i), Self::sigma(q, i));
                    if t < s - tol {
                        return fail(format!("t_{i} >= sigma_{i} = {s}"), Some(i), s - t);
                    }
                    if t > top + tol {
                        return fail(format!("t_{i} <= {top}"), Some(i), t - top);
                    }
                }
                // Beyond the breadth only the box [0, 1 - delta] is checked.
                for &(i, t) in x.entries().iter().filter(|e| e.0 > self.breadth) {
                    if t < -tol || t > top + tol {
                        return fail(format!("0 <= t_{i} <= {top}"), Some(i), t.abs());
                    }
                }
            }
            DomainKind::CInterval { cap } => {
                floor(S::zero())?;
                ceiling(cap)?;
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &SeqVec<S>) -> bool {
        self.check(x).is_ok()
    }

    /// A deterministic member of the set supported on `1..=breadth` (plus a
    /// tail where the set allows one).
    pub fn sample(&self, seed: u64, breadth: usize) -> Result<SeqVec<S>, DomainError> {
        if breadth < 1 {
            return Err(DomainError::InvalidBudget);
        }
        let mut rng = rng_from(seed);
        Ok(self.sample_with(&mut rng, breadth))
    }

    fn sample_with(&self, rng: &mut ChaCha8Rng, breadth: usize) -> SeqVec<S> {
        let f = |v: f64| S::lit(v);
        match self.kind {
            DomainKind::Ball { r, norm } | DomainKind::PositiveBall { r, norm } => {
                let positive = matches!(self.kind, DomainKind::PositiveBall { .. });
                let sign = |v: f64| if positive { v.abs() } else { v };
                let support = random_support(rng, breadth);
                let entries: Vec<_> = support
                    .iter()
                    .map(|&i| (i, f(sign(rng.random_range(-1.0..=1.0)))))
                    .collect();
                let tail = if matches!(norm, NormKind::Sup) && rng.random_bool(0.25) {
                    f(sign(rng.random_range(-1.0..=1.0)))
                } else {
                    S::zero()
                };
                let dir = SeqVec::from_entries(entries, tail).expect("valid support");
                let n = dir.norm(norm).expect("tail matches norm");
                if n == S::zero() {
                    return SeqVec::zero();
                }
                let radius = if rng.random_bool(0.125) { r } else { r * f(rng.random::<f64>()) };
                let x = dir.scale(radius / n);
                let m = x.norm(norm).expect("tail matches norm");
                if m > r {
                    x.scale(r / m)
                } else {
                    x
                }
            }
            DomainKind::Simplex { mass, .. } => simplex_point(rng, breadth, mass),
            DomainKind::SubSimplex { mass_cap } => {
                let mass = match rng.random_range(0..16) {
                    0 => return SeqVec::zero(),
                    1 | 2 => mass_cap,
                    _ => mass_cap * f(rng.random::<f64>()),
                };
                if mass == S::zero() {
                    return SeqVec::zero();
                }
                simplex_point(rng, breadth, mass)
            }
            DomainKind::CoefficientBox { r } => {
                let support = random_support(rng, breadth);
                let entries: Vec<_> =
                    support.iter().map(|&i| (i, box_value(rng, r))).collect();
                SeqVec::from_entries(entries, S::zero()).expect("valid support")
            }
            DomainKind::SigmaBand { delta, q } => {
                let top = S::one() - delta;
                let mut values = vec![top];
                for i in 2..=breadth {
                    let lo = Self::sigma(q, i);
                    let u = f(rng.random::<f64>());
                    let t = if rng.random_bool(0.5) {
                        lo + u * (top - lo)
                    } else {
                        (lo.ln() + u * (top.ln() - lo.ln())).exp()
                    };
                    values.push(t.max(lo).min(top));
                }
                SeqVec::from_dense(&values, S::zero())
            }
            DomainKind::CInterval { cap } => {
                let tail = box_value(rng, cap);
                let support = random_support(rng, breadth);
                let entries: Vec<_> =
                    support.iter().map(|&i| (i, box_value(rng, cap))).collect();
                SeqVec::from_entries(entries, tail).expect("valid support")
            }
        }
    }

    /// A small deterministic set of members: vertices, barycentres and named
    /// witnesses. Order is stable; the first point is used as the default
    /// starting point for orbits.
    pub fn canonical_points(&self) -> Vec<SeqVec<S>> {
        let e = |i: usize, v: S| SeqVec::from_entries([(i, v)], S::zero()).expect("index >= 1");
        let b = self.breadth;
        match self.kind {
            DomainKind::Ball { r, norm } => {
                let mut pts = vec![SeqVec::zero(), e(1, r), e(1, -r), e(2, r)];
                match norm {
                    NormKind::Sup => pts.push(SeqVec::constant(r)),
                    NormKind::Lp(p) => {
                        let c = r * S::two().powf(-p.recip());
                        pts.push(SeqVec::from_dense(&[c, -c], S::zero()));
                    }
                    NormKind::MaxPosNegL1 => {
                        pts.push(SeqVec::from_dense(&[r, -r], S::zero()));
                    }
                }
                pts
            }
            DomainKind::PositiveBall { r, .. } => vec![SeqVec::zero(), e(1, r), e(2, r)],
            DomainKind::Simplex { mass, .. } => {
                let h = mass / S::two();
                let spread = mass / S::lit(b as f64);
                vec![
                    e(1, mass),
                    e(2, mass),
                    SeqVec::from_dense(&[h, h], S::zero()),
                    SeqVec::from_dense(&vec![spread; b], S::zero()),
                ]
            }
            DomainKind::SubSimplex { mass_cap } => {
                let h = mass_cap / S::two();
                vec![SeqVec::zero(), e(1, mass_cap), SeqVec::from_dense(&[h, h], S::zero())]
            }
            DomainKind::CoefficientBox { r } => {
                vec![SeqVec::zero(), e(1, r), SeqVec::from_dense(&vec![r; b], S::zero())]
            }
            DomainKind::SigmaBand { delta, q } => {
                let top = S::one() - delta;
                let witness: Vec<S> = (1..=b).map(|i| top.powi(i as i32)).collect();
                let floor: Vec<S> =
                    (1..=b).map(|i| if i == 1 { top } else { Self::sigma(q, i) }).collect();
                vec![
                    SeqVec::from_dense(&witness, S::zero()),
                    SeqVec::from_dense(&floor, S::zero()),
                    SeqVec::from_dense(&vec![top; b], S::zero()),
                ]
            }
            DomainKind::CInterval { cap } => vec![
                SeqVec::zero(),
                SeqVec::constant(cap),
                e(1, cap),
                SeqVec::from_entries([(1, S::zero())], cap).expect("index >= 1"),
            ],
        }
    }

    /// Upper bound on `‖x‖` over the set, measured in `norm`, when one is known.
    pub fn norm_bound(&self, norm: NormKind<S>) -> Option<S> {
        match self.kind {
            DomainKind::Ball { r, norm: k } | DomainKind::PositiveBall { r, norm: k } => {
                (k == norm).then_some(r)
            }
            DomainKind::Simplex { mass, .. } => Some(mass),
            DomainKind::SubSimplex { mass_cap } => Some(mass_cap),
            DomainKind::CoefficientBox { r } => matches!(norm, NormKind::Sup).then_some(r),
            DomainKind::SigmaBand { delta, .. } => {
                matches!(norm, NormKind::Sup).then_some(S::one() - delta)
            }
            DomainKind::CInterval { cap } => matches!(norm, NormKind::Sup).then_some(cap),
        }
    }

    /// Upper bound on the diameter of the set in `norm`, when one is known.
    pub fn diameter(&self, norm: NormKind<S>) -> Option<S> {
        // For nonnegative x, y: |t - s|^p <= t^p + s^p, so the positive part of
        // a ball of radius m has diameter at most 2^(1/p) m.
        let positive_diam = |m: S| match norm {
            NormKind::Lp(p) => m * S::two().powf(p.recip()),
            NormKind::Sup | NormKind::MaxPosNegL1 => m,
        };
        match self.kind {
            DomainKind::Ball { r, norm: k } => (k == norm).then_some(S::two() * r),
            DomainKind::PositiveBall { r, norm: k } => (k == norm).then(|| positive_diam(r)),
            DomainKind::Simplex { mass, .. } => Some(positive_diam(mass)),
            DomainKind::SubSimplex { mass_cap } => Some(positive_diam(mass_cap)),
            DomainKind::CoefficientBox { r } => matches!(norm, NormKind::Sup).then_some(r),
            DomainKind::SigmaBand { delta, .. } => {
                matches!(norm, NormKind::Sup).then_some(S::one() - delta)
            }
            DomainKind::CInterval { cap } => matches!(norm, NormKind::Sup).then_some(cap),
        }
    }

    /// Convex sets containing 0 are star-shaped about 0.
    pub fn is_star_shaped(&self) -> bool {
        self.contains(&SeqVec::zero())
    }
}

fn random_support(rng: &mut ChaCha8Rng, breadth: usize) -> Vec<usize> {
    let k = rng.random_range(1..=breadth);
    let mut idx: Vec<usize> = index::sample(rng, breadth, k).into_iter().map(|i| i + 1).collect();
    idx.sort_unstable();
    idx
}

// Uniform on [0, cap] with extra mass on the two endpoints.
fn box_value<S: Scalar>(rng: &mut ChaCha8Rng, cap: S) -> S {
    match rng.random_range(0..16) {
        0 => S::zero(),
        1 => cap,
        _ => cap * S::lit(rng.random::<f64>()),
    }
}

// Exponential spacings over a random support, rescaled to the exact mass.
fn simplex_point<S: Scalar>(rng: &mut ChaCha8Rng, breadth: usize, mass: S) -> SeqVec<S> {
    let support = random_support(rng, breadth);
    let weights: Vec<f64> = support.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut values: Vec<S> = weights.iter().map(|w| mass * S::lit(w / total)).collect();
    let sum = values.iter().fold(S::zero(), |s, &v| s + v);
    // Put the rounding residue on the largest coordinate.
    if let Some(k) = (0..values.len()).max_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap()) {
        values[k] = (values[k] + (mass - sum)).max(S::zero());
    }
    SeqVec::from_entries(support.into_iter().zip(values).collect::<Vec<_>>(), S::zero())
        .expect("valid support")
}

/// Norm selector as it appears in config files: `"sup"`, `{"lp": p}` or
/// `"max_pos_neg_l1"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormConfig {
    Sup,
    Lp(f64),
    MaxPosNegL1,
}

impl NormConfig {
    pub fn build(self) -> Result<NormKind<f64>, DomainError> {
        match self {
            NormConfig::Sup => Ok(NormKind::Sup),
            NormConfig::Lp(p) => NormKind::lp(p).map_err(|_| invalid("norm", "p must be >= 1")),
            NormConfig::MaxPosNegL1 => Ok(NormKind::MaxPosNegL1),
        }
    }

    pub fn from_kind<S: Scalar>(k: NormKind<S>) -> Self {
        match k {
            NormKind::Sup => NormConfig::Sup,
            NormKind::Lp(p) => NormConfig::Lp(p.as_f64()),
            NormKind::MaxPosNegL1 => NormConfig::MaxPosNegL1,
        }
    }
}

/// `{"kind": "...", "params": {...}, "tol": 1e-12, "breadth": 64}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breadth: Option<usize>,
}

impl DomainConfig {
    pub fn build(&self) -> Result<DomainSpec<f64>, DomainError> {
        let allowed: &[&str] = match self.kind.as_str() {
            "Ball" | "PositiveBall" => &["r", "norm"],
            "Simplex" => &["p", "mass"],
            "SubSimplex" => &["mass_cap"],
            "CoefficientBox" => &["r"],
            "SigmaBand" => &["delta", "q"],
            "CInterval" => &["cap"],
            other => return Err(DomainError::UnknownKind(other.into())),
        };
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(DomainError::Config(format!(
                "unknown parameter `{k}` for {} (expected {:?})",
                self.kind, allowed
            )));
        }
        let num = |name: &str| -> Result<f64, DomainError> {
            self.params
                .get(name)
                .ok_or_else(|| DomainError::Config(format!("missing parameter `{name}`")))?
                .as_f64()
                .ok_or_else(|| DomainError::Config(format!("parameter `{name}` must be a number")))
        };
        let norm = || -> Result<NormKind<f64>, DomainError> {
            let v = self
                .params
                .get("norm")
                .ok_or_else(|| DomainError::Config("missing parameter `norm`".into()))?;
            serde_json::from_value::<NormConfig>(v.clone())
                .map_err(|e| DomainError::Config(format!("bad norm: {e}")))?
                .build()
        };
        let kind = match self.kind.as_str() {
            "Ball" => DomainKind::Ball { r: num("r")?, norm: norm()? },
            "PositiveBall" => DomainKind::PositiveBall { r: num("r")?, norm: norm()? },
            "Simplex" => DomainKind::Simplex { p: num("p")?, mass: num("mass")? },
            "SubSimplex" => DomainKind::SubSimplex { mass_cap: num("mass_cap")? },
            "CoefficientBox" => DomainKind::CoefficientBox { r: num("r")? },
            "SigmaBand" => DomainKind::SigmaBand { delta: num("delta")?, q: num("q")? },
            "CInterval" => DomainKind::CInterval { cap: num("cap")? },
            _ => unreachable!("kind matched above"),
        };
        let mut spec = DomainSpec::new(kind)?;
        if let Some(tol) = self.tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(invalid("tol", "tolerance must be >= 0"));
            }
            spec.tol = tol;
        }
        if let Some(b) = self.breadth {
            if b < 1 {
                return Err(DomainError::InvalidBudget);
            }
            spec.breadth = b;
        }
        Ok(spec)
    }

    pub fn from_spec<S: Scalar>(spec: &DomainSpec<S>) -> Self {
        let mut params = Map::new();
        let mut put = |k: &str, v: S| {
            params.insert(k.into(), Value::from(v.as_f64()));
        };
        let mut norm_cfg = None;
        match spec.kind {
            DomainKind::Ball { r, norm } | DomainKind::PositiveBall { r, norm } => {
                put("r", r);
                norm_cfg = Some(NormConfig::from_kind(norm));
            }
            DomainKind::Simplex { p, mass } => {
                put("p", p);
                put("mass", mass);
            }
            DomainKind::SubSimplex { mass_cap } => put("mass_cap", mass_cap),
            DomainKind::CoefficientBox { r } => put("r", r),
            DomainKind::SigmaBand { delta, q } => {
                put("delta", delta);
                put("q", q);
            }
            DomainKind::CInterval { cap } => put("cap", cap),
        }
        if let Some(n) = norm_cfg {
            params.insert("norm".into(), serde_json::to_value(n).expect("serializable"));
        }
        DomainConfig {
            kind: spec.kind.name().into(),
            params,
            tol: Some(spec.tol.as_f64()),
            breadth: Some(spec.breadth),
        }
    }
}
