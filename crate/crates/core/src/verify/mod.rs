//! Measurement engine: sampled Hölder ratios, invariance, orbits,
//! displacement estimates and oracle comparisons.
//!
//! Every sampled quantity is one-sided. A sup of ratios over samples is a
//! lower bound on the true constant; a min of `‖x - Tx‖` over witnesses is an
//! upper bound on `d(T, K)`. Work items draw from seed streams keyed by their
//! index and are merged in index order, so results do not depend on the
//! number of worker threads.

mod report;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogError, FixedPointSet, MapInstance};
use crate::domain::{DomainSpec, Violation};
use crate::rng::{derive_seed, rng_from, stream};
use crate::scalar::Scalar;
use crate::seq::{SeqError, SeqVec};

pub use report::{run_check, CheckKind, CheckRecord, CheckRequest, Verdict};

/// Pairs closer than this are skipped when estimating ratios.
pub const DEGENERATE_CUTOFF: f64 = 1e-13;
/// Relative slack allowed on claimed constants.
pub const RELATIVE_SLACK: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-12;
pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const LAMBDA_SCHEDULE: [f64; 4] = [0.5, 0.9, 0.99, 0.999];
pub const LAMBDA_STEP_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("insufficient samples: every sampled pair was degenerate")]
    InsufficientSamples,
    #[error("invalid check: {0}")]
    InvalidCheck(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid parameter `{param}`: {constraint}")]
    InvalidParameter { param: String, constraint: String },
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error(transparent)]
    Map(#[from] CatalogError),
}

fn need(ok: bool, param: &str, constraint: &str) -> Result<(), VerifyError> {
    if ok {
        Ok(())
    } else {
        Err(VerifyError::InvalidParameter { param: param.into(), constraint: constraint.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Canonical pairs first, then a mix of independent, nearby and
    /// canonical-vs-random pairs.
    Mixed,
    /// Independent samples only.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// Deterministic pair number `i` for a domain.
pub fn sample_pair<S: Scalar>(
    domain: &DomainSpec<S>,
    canon: &[SeqVec<S>],
    seed: u64,
    i: usize,
    mode: PairMode,
) -> (SeqVec<S>, SeqVec<S>) {
    let b = domain.breadth;
    let draw = |s: u64, idx: usize| domain.sample(derive_seed(seed, s, idx as u64), b).expect("breadth >= 1");
    if mode == PairMode::Independent {
        return (draw(stream::PAIR_LEFT, i), draw(stream::PAIR_RIGHT, i));
    }
    let k = canon.len();
    let canonical_pairs = k * k.saturating_sub(1) / 2;
    if i < canonical_pairs {
        let (mut a, mut rest) = (0, i);
        while rest >= k - 1 - a {
            rest -= k - 1 - a;
            a += 1;
        }
        return (canon[a].clone(), canon[a + 1 + rest].clone());
    }
    let mut rng = rng_from(derive_seed(seed, stream::PAIR_MIX, i as u64));
    let x = draw(stream::PAIR_LEFT, i);
    match rng.random_range(0..10) {
        0..=5 => (x, draw(stream::PAIR_RIGHT, i)),
        6..=8 => {
            let z = draw(stream::PAIR_RIGHT, i);
            let t = S::lit(10f64.powf(-6.0 * rng.random::<f64>()));
            let y = SeqVec::axpy(S::one() - t, &x, t, &z);
            (x, y)
        }
        _ => {
            let c = if k == 0 { draw(stream::PAIR_RIGHT, i) } else { canon[rng.random_range(0..k)].clone() };
            (x, c)
        }
    }
}

/// Point number `i`: canonical points first, then samples.
pub fn sample_point<S: Scalar>(domain: &DomainSpec<S>, canon: &[SeqVec<S>], seed: u64, i: usize) -> SeqVec<S> {
    if i < canon.len() {
        return canon[i].clone();
    }
    domain.sample(derive_seed(seed, stream::POINT, i as u64), domain.breadth).expect("breadth >= 1")
}

/// Index of the extreme value, earliest index winning ties. NaN counts as the
/// most extreme value so that it is never hidden.
fn pick<S: Scalar>(values: &[Option<S>], extreme: Extreme) -> Option<(usize, S)> {
    let mut best: Option<(usize, S)> = None;
    for (i, v) in values.iter().enumerate() {
        let Some(v) = *v else { continue };
        let better = match best {
            None => true,
            Some((_, b)) if b.is_nan() => false,
            Some(_) if v.is_nan() => true,
            Some((_, b)) => match extreme {
                Extreme::Max => v > b,
                Extreme::Min => v < b,
            },
        };
        if better {
            best = Some((i, v));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioOptions {
    pub pairs: usize,
    pub seed: u64,
    pub iterate: usize,
    /// Exponent on the denominator; the map's α when `None`.
    pub exponent: Option<f64>,
    pub mode: PairMode,
    pub extreme: Extreme,
}

impl RatioOptions {
    pub fn holder(pairs: usize, seed: u64, iterate: usize) -> Self {
        RatioOptions { pairs, seed, iterate, exponent: None, mode: PairMode::Mixed, extreme: Extreme::Max }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioEstimate<S> {
    pub value: S,
    pub witness: (SeqVec<S>, SeqVec<S>),
    pub evaluated: usize,
    pub skipped: usize,
}

/// Extreme of `‖T^n x - T^n y‖ / ‖x - y‖^e` over sampled pairs.
pub fn estimate_ratio<S: Scalar>(map: &MapInstance<S>, opts: RatioOptions) -> Result<RatioEstimate<S>, VerifyError> {
    need(opts.pairs >= 1, "pairs", "pairs >= 1")?;
    need(opts.iterate >= 1, "iterate", "iterate >= 1")?;
    let canon = map.domain.canonical_points();
    let e = opts.exponent.map(S::lit).unwrap_or(map.claims.alpha);
    let cutoff = S::lit(DEGENERATE_CUTOFF);
    let ratios: Vec<Option<S>> = (0..opts.pairs)
        .into_par_iter()
        .map(|i| {
            let (x, y) = sample_pair(&map.domain, &canon, opts.seed, i, opts.mode);
            let d = map.dist(&x, &y)?;
            if d < cutoff {
                return Ok(None);
            }
            let fx = map.iterate(&x, opts.iterate)?;
            let fy = map.iterate(&y, opts.iterate)?;
            Ok(Some(map.dist(&fx, &fy)? / d.powf(e)))
        })
        .collect::<Result<Vec<_>, CatalogError>>()?;
    let skipped = ratios.iter().filter(|r| r.is_none()).count();
    let (i, value) = pick(&ratios, opts.extreme).ok_or(VerifyError::InsufficientSamples)?;
    Ok(RatioEstimate {
        value,
        witness: sample_pair(&map.domain, &canon, opts.seed, i, opts.mode),
        evaluated: opts.pairs - skipped,
        skipped,
    })
}

/// Sup over sampled pairs of `‖T^n x - T^n y‖ / ‖x - y‖^α`.
pub fn estimate_holder_ratio<S: Scalar>(
    map: &MapInstance<S>,
    pairs: usize,
    seed: u64,
    iterate: usize,
) -> Result<RatioEstimate<S>, VerifyError> {
    estimate_ratio(map, RatioOptions::holder(pairs, seed, iterate))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceWitness<S> {
    pub x: SeqVec<S>,
    pub image: Option<SeqVec<S>>,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceOutcome<S> {
    pub checked: usize,
    pub failures: usize,
    /// The first failing point, in evaluation order.
    pub witness: Option<InvarianceWitness<S>>,
}

/// Applies the map to every canonical point and `samples` sampled points and
/// checks membership of the images.
pub fn check_invariance<S: Scalar>(
    map: &MapInstance<S>,
    samples: usize,
    seed: u64,
) -> Result<InvarianceOutcome<S>, VerifyError> {
    need(samples >= 1, "samples", "samples >= 1")?;
    let canon = map.domain.canonical_points();
    let total = canon.len() + samples;
    let outcomes: Vec<Option<InvarianceWitness<S>>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = sample_point(&map.domain, &canon, seed, i);
            match map.apply(&x) {
                Ok(y) => map.domain.check(&y).err().map(|violation| InvarianceWitness {
                    x,
                    image: Some(y),
                    violation,
                }),
                Err(e) => Some(InvarianceWitness {
                    x,
                    image: None,
                    violation: Violation { constraint: format!("map failed: {e}"), index: None, excess: f64::NAN },
                }),
            }
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_some()).count();
    Ok(InvarianceOutcome { checked: total, failures, witness: outcomes.into_iter().flatten().next() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace<S> {
    pub points: Vec<SeqVec<S>>,
    /// `‖T^k x0 - T^{k+1} x0‖`
    pub displacements: Vec<S>,
    pub max_norm: S,
}

pub fn orbit<S: Scalar>(map: &MapInstance<S>, x0: &SeqVec<S>, n: usize) -> Result<OrbitTrace<S>, VerifyError> {
    if let Err(v) = map.domain.check(x0) {
        return Err(VerifyError::DomainViolation(format!("orbit start {x0}: {}", v.constraint)));
    }
    let mut points = vec![x0.clone()];
    let mut displacements = Vec::with_capacity(n);
    for _ in 0..n {
        let last = points.last().expect("nonempty");
        let next = map.apply(last)?;
        displacements.push(map.dist(last, &next)?);
        points.push(next);
    }
    let mut max_norm = S::zero();
    for p in &points {
        max_norm = max_norm.max(p.norm(map.norm).map_err(CatalogError::from)?);
    }
    Ok(OrbitTrace { points, displacements, max_norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisplacementStrategy {
    SampleMin,
    OrbitMin,
    LambdaScaling,
    CesaroAffine,
}

impl DisplacementStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            DisplacementStrategy::SampleMin => "sample_min",
            DisplacementStrategy::OrbitMin => "orbit_min",
            DisplacementStrategy::LambdaScaling => "lambda_scaling",
            DisplacementStrategy::CesaroAffine => "cesaro_affine",
        }
    }
}

/// One `λ` of the scaling schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStep<S> {
    pub lambda: S,
    pub steps: usize,
    /// Min of `‖y - Ty‖` over `y = F_λ^k x0`, `k <= steps`.
    pub measured: S,
    /// `λ^steps`
    pub decay: S,
    /// `λ^steps + L ((1-λ) R)^α` with `R` a bound on `‖y‖` over the domain.
    pub chain: Option<S>,
    /// Max over `k` of `‖F_λ^k x0 - F_λ^{k+1} x0‖ / λ^k`.
    pub decay_ratio: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementEstimate<S> {
    pub upper: S,
    pub witness: SeqVec<S>,
    pub evaluated: usize,
    pub lambda_steps: Vec<LambdaStep<S>>,
}

fn displacement<S: Scalar>(map: &MapInstance<S>, x: &SeqVec<S>) -> Result<S, VerifyError> {
    let y = map.apply(x)?;
    Ok(map.dist(x, &y)?)
}

/// Upper estimate of `d(T, K) = inf ‖x - Tx‖`.
pub fn estimate_displacement<S: Scalar>(
    map: &MapInstance<S>,
    strategy: DisplacementStrategy,
    budget: usize,
    seed: u64,
) -> Result<DisplacementEstimate<S>, VerifyError> {
    need(budget >= 1, "budget", "budget >= 1")?;
    let canon = map.domain.canonical_points();
    match strategy {
        DisplacementStrategy::SampleMin => {
            let total = canon.len() + budget;
            let values: Vec<Option<S>> = (0..total)
                .into_par_iter()
                .map(|i| displacement(map, &sample_point(&map.domain, &canon, seed, i)).map(Some))
                .collect::<Result<_, _>>()?;
            let (i, upper) = pick(&values, Extreme::Min).expect("at least one point");
            Ok(DisplacementEstimate {
                upper,
                witness: sample_point(&map.domain, &canon, seed, i),
                evaluated: total,
                lambda_steps: vec![],
            })
        }
        DisplacementStrategy::OrbitMin => {
            let starts: Vec<SeqVec<S>> = if canon.is_empty() {
                vec![sample_point(&map.domain, &canon, seed, 0)]
            } else {
                canon.clone()
            };
            // Maps that move mass to ever larger indices can outrun the index
            // type; such orbits end where they become unrepresentable.
            let traces: Vec<Vec<(S, SeqVec<S>)>> = starts
                .par_iter()
                .map(|x0| {
                    let mut out = Vec::with_capacity(budget);
                    let mut x = x0.clone();
                    for _ in 0..budget {
                        let y = match map.apply(&x) {
                            Err(CatalogError::Seq(SeqError::IndexOverflow)) => break,
                            r => r?,
                        };
                        out.push((map.dist(&x, &y)?, x));
                        x = y;
                    }
                    Ok(out)
                })
                .collect::<Result<_, CatalogError>>()?;
            let mut best: Option<(S, SeqVec<S>)> = None;
            for (d, x) in traces.iter().flatten() {
                if best.as_ref().is_none_or(|(b, _)| d < b) {
                    best = Some((*d, x.clone()));
                }
            }
            let evaluated = traces.iter().map(Vec::len).sum();
            let (upper, witness) = best.ok_or(VerifyError::InsufficientSamples)?;
            Ok(DisplacementEstimate { upper, witness, evaluated, lambda_steps: vec![] })
        }
        DisplacementStrategy::LambdaScaling => lambda_scaling(map, &canon, budget),
        DisplacementStrategy::CesaroAffine => cesaro(map, &canon, budget),
    }
}

fn lambda_scaling<S: Scalar>(
    map: &MapInstance<S>,
    canon: &[SeqVec<S>],
    budget: usize,
) -> Result<DisplacementEstimate<S>, VerifyError> {
    if !map.domain.is_star_shaped() {
        return Err(VerifyError::InvalidStrategy(format!(
            "lambda_scaling needs a domain star-shaped about 0; {} is not",
            map.domain.kind.name()
        )));
    }
    let x0 = canon.first().cloned().unwrap_or_else(SeqVec::zero);
    let alpha = map.claims.alpha;
    let radius = map.domain.norm_bound(map.norm);
    let mut best: Option<(S, SeqVec<S>)> = None;
    let mut steps = Vec::new();
    let mut evaluated = 0;
    for &l in LAMBDA_SCHEDULE.iter() {
        let lambda = S::lit(l);
        let target = S::one() - lambda;
        let wanted = (target.ln() / lambda.ln()).ceil().to_usize().unwrap_or(LAMBDA_STEP_CAP);
        let n = wanted.clamp(1, LAMBDA_STEP_CAP.min(budget));
        let mut y = x0.clone();
        let mut measured = S::infinity();
        let mut decay_ratio = S::zero();
        for k in 0..=n {
            let d = displacement(map, &y)?;
            evaluated += 1;
            if d < measured {
                measured = d;
            }
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, y.clone()));
            }
            if k == n {
                break;
            }
            let next = map.apply(&y.scale(lambda))?;
            let step = map.dist(&y, &next)?;
            decay_ratio = decay_ratio.max(step / lambda.powi(k as i32));
            y = next;
        }
        let decay = lambda.powi(n as i32);
        let chain = radius.map(|r| decay + map.claims.holder_constant * (target * r).powf(alpha));
        steps.push(LambdaStep { lambda, steps: n, measured, decay, chain, decay_ratio });
    }
    let (upper, witness) = best.expect("schedule is nonempty");
    Ok(DisplacementEstimate { upper, witness, evaluated, lambda_steps: steps })
}

fn cesaro<S: Scalar>(
    map: &MapInstance<S>,
    canon: &[SeqVec<S>],
    budget: usize,
) -> Result<DisplacementEstimate<S>, VerifyError> {
    if !map.claims.affine {
        return Err(VerifyError::InvalidStrategy(format!(
            "cesaro_affine needs an affine map; {} is not claimed affine",
            map.name
        )));
    }
    let x0 = canon.first().cloned().unwrap_or_else(SeqVec::zero);
    let mut sum = SeqVec::zero();
    let mut term = x0;
    let mut best: Option<(S, SeqVec<S>)> = None;
    for n in 1..=budget {
        sum = sum.add(&term);
        let count = S::lit(n as f64);
        let avg = sum.map(|v| v / count);
        let d = displacement(map, &avg)?;
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, avg));
        }
        if n < budget {
            term = map.apply(&term)?;
        }
    }
    let (upper, witness) = best.expect("budget >= 1");
    Ok(DisplacementEstimate { upper, witness, evaluated: budget, lambda_steps: vec![] })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint<S> {
    pub n: usize,
    pub measured: RatioEstimate<S>,
    pub bound: S,
}

impl<S: Scalar> ProfilePoint<S> {
    pub fn holds(&self) -> bool {
        self.measured.value <= self.bound * (S::one() + S::lit(RELATIVE_SLACK))
    }
}

/// Hölder ratio of `T^n` for each `n`, against the claimed constant.
pub fn check_uniform_profile<S: Scalar>(
    map: &MapInstance<S>,
    n_list: &[usize],
    pairs: usize,
    seed: u64,
) -> Result<Vec<ProfilePoint<S>>, VerifyError> {
    if !map.claims.uniform {
        return Err(VerifyError::InvalidCheck(format!("{} makes no uniform claim", map.name)));
    }
    n_list
        .iter()
        .map(|&n| {
            Ok(ProfilePoint {
                n,
                measured: estimate_holder_ratio(map, pairs, seed, n)?,
                bound: map.claims.holder_constant,
            })
        })
        .collect()
}

/// Hölder ratio of `T^n` for `n = 1..=n_max`, against the asymptotic profile.
pub fn check_asymptotic_profile<S: Scalar>(
    map: &MapInstance<S>,
    n_max: usize,
    pairs: usize,
    seed: u64,
) -> Result<Vec<ProfilePoint<S>>, VerifyError> {
    if map.claims.asymptotic_kappa.is_none() {
        return Err(VerifyError::InvalidCheck(format!("{} has no asymptotic profile", map.name)));
    }
    (1..=n_max)
        .map(|n| {
            Ok(ProfilePoint {
                n,
                measured: estimate_holder_ratio(map, pairs, seed, n)?,
                bound: map.claims.asymptotic_bound(n).expect("profile present"),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxFixedOutcome<S> {
    pub checked: usize,
    pub in_set: usize,
    /// Max of `‖Tx - T²x‖` over points with `‖x - Tx‖ <= δ`.
    pub worst: S,
    pub witness: Option<SeqVec<S>>,
    pub passed: bool,
}

/// For sampled `x` with `‖x - Tx‖ <= δ`, checks `‖Tx - T²x‖ <= δ`.
pub fn approx_fixed_set_check<S: Scalar>(
    map: &MapInstance<S>,
    delta: S,
    samples: usize,
    seed: u64,
) -> Result<ApproxFixedOutcome<S>, VerifyError> {
    need(delta >= S::one(), "delta", "delta >= 1")?;
    need(samples >= 1, "samples", "samples >= 1")?;
    let canon = map.domain.canonical_points();
    let total = canon.len() + samples;
    let values: Vec<Option<S>> = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = sample_point(&map.domain, &canon, seed, i);
            let tx = map.apply(&x)?;
            if map.dist(&x, &tx)? > delta {
                return Ok(None);
            }
            let ttx = map.apply(&tx)?;
            Ok(Some(map.dist(&tx, &ttx)?))
        })
        .collect::<Result<_, CatalogError>>()?;
    let in_set = values.iter().filter(|v| v.is_some()).count();
    let worst = pick(&values, Extreme::Max);
    let passed = worst.is_none_or(|(_, w)| w <= delta);
    Ok(ApproxFixedOutcome {
        checked: total,
        in_set,
        worst: worst.map(|w| w.1).unwrap_or(S::zero()),
        witness: worst.map(|(i, _)| sample_point(&map.domain, &canon, seed, i)),
        passed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome<S> {
    pub max_deviation: S,
    pub worst_n: usize,
    pub passed: bool,
}

/// Max over `n <= n_max` of `‖T^n x0 - oracle(x0, n)‖`.
pub fn oracle_compare<S: Scalar>(
    map: &MapInstance<S>,
    x0: &SeqVec<S>,
    n_max: usize,
) -> Result<OracleOutcome<S>, VerifyError> {
    if !map.has_oracle() {
        return Err(VerifyError::InvalidCheck(format!("{} has no iterate oracle", map.name)));
    }
    if let Err(v) = map.domain.check(x0) {
        return Err(VerifyError::DomainViolation(format!("oracle start {x0}: {}", v.constraint)));
    }
    let mut y = x0.clone();
    let mut max_deviation = S::zero();
    let mut worst_n = 0;
    for n in 1..=n_max {
        y = map.apply(&y)?;
        let o = map.oracle(x0, n).expect("oracle present")?;
        let d = y.sup_dist(&o);
        if !max_deviation.is_nan() && (d.is_nan() || d > max_deviation) {
            max_deviation = d;
            worst_n = n;
        }
    }
    Ok(OracleOutcome { max_deviation, worst_n, passed: max_deviation <= S::lit(ORACLE_TOL) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointEvidence<S> {
    /// `‖z - Tz‖` for a claimed fixed point, or the smallest sampled
    /// displacement otherwise.
    pub value: S,
    pub bound: Option<S>,
    pub witness: SeqVec<S>,
}

pub fn fixed_point_evidence<S: Scalar>(
    map: &MapInstance<S>,
    samples: usize,
    seed: u64,
) -> Result<FixedPointEvidence<S>, VerifyError> {
    match &map.claims.fixed_point_set {
        FixedPointSet::Singleton(z) => Ok(FixedPointEvidence {
            value: displacement(map, z)?,
            bound: Some(S::lit(FIXED_POINT_TOL) + map.claims.truncation_residual),
            witness: z.clone(),
        }),
        FixedPointSet::Empty | FixedPointSet::Unknown => {
            let est = estimate_displacement(map, DisplacementStrategy::SampleMin, samples, seed)?;
            Ok(FixedPointEvidence { value: est.upper, bound: None, witness: est.witness })
        }
    }
}
