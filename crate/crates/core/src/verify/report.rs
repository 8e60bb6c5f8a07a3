//! Check requests as they appear in configs, and the records they produce.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    HolderRatio,
    Invariance,
    Orbit,
    Displacement,
    UniformProfile,
    AsymptoticProfile,
    OracleCompare,
    ApproxFixedSet,
    FixedPoint,
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::HolderRatio => "holder_ratio",
            CheckKind::Invariance => "invariance",
            CheckKind::Orbit => "orbit",
            CheckKind::Displacement => "displacement",
            CheckKind::UniformProfile => "uniform_profile",
            CheckKind::AsymptoticProfile => "asymptotic_profile",
            CheckKind::OracleCompare => "oracle_compare",
            CheckKind::ApproxFixedSet => "approx_fixed_set",
            CheckKind::FixedPoint => "fixed_point",
        }
    }
}

/// One check as written in a config. Unset fields take per-kind defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRequest {
    pub kind: CheckKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterate: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<DisplacementStrategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Start point as a sequence literal, e.g. `"{1:0.5; tail:0.25}"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<String>,
    /// Displacement target; the check passes iff the estimate is at most this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Relative slack on claimed constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl CheckRequest {
    pub fn new(kind: CheckKind) -> Self {
        CheckRequest {
            kind,
            label: None,
            pairs: None,
            samples: None,
            iterate: None,
            n_list: None,
            n_max: None,
            strategy: None,
            budget: None,
            delta: None,
            x0: None,
            target: None,
            seed: None,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        for (name, v) in [("pairs", self.pairs), ("samples", self.samples), ("budget", self.budget)] {
            need(v.is_none_or(|v| v >= 1), name, &format!("{name} >= 1"))?;
        }
        if let Some(l) = &self.n_list {
            need(!l.is_empty() && l.iter().all(|&n| n >= 1), "n_list", "a nonempty list of n >= 1")?;
        }
        if let Some(t) = self.tolerance {
            need(t.is_finite() && t >= 0.0, "tolerance", "tolerance >= 0")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub kind: String,
    pub label: String,
    pub claimed: Value,
    pub measured: Value,
    /// How the measurement relates to the true quantity.
    pub direction: String,
    pub verdict: Verdict,
    /// Whether the measurement met the claim, also for report-only records.
    pub within_claim: Option<bool>,
    pub witness: Option<Value>,
    #[serde(default)]
    pub details: Map<String, Value>,
    pub runtime_ms: u64,
}

const LOWER: &str = "lower bound: sampled sup of ratios; the true constant can only be larger";
const UPPER: &str = "upper bound: min over witnesses; the true infimum can only be smaller";
const SAMPLED: &str = "sampled: a pass is evidence over the evaluated points, not a proof";
const EXACT: &str = "exact up to floating point";

fn num<S: Scalar>(v: S) -> Value {
    json!(v.as_f64())
}

fn lit<S: Scalar>(x: &SeqVec<S>) -> Value {
    json!(x.to_string())
}

fn pair<S: Scalar>(p: &(SeqVec<S>, SeqVec<S>)) -> Value {
    json!({"x": p.0.to_string(), "y": p.1.to_string()})
}

struct Draft {
    kind: &'static str,
    claimed: Value,
    measured: Value,
    direction: &'static str,
    within: Option<bool>,
    report_only: bool,
    witness: Option<Value>,
    details: Map<String, Value>,
}

impl Draft {
    fn new(kind: &'static str, direction: &'static str) -> Self {
        Draft {
            kind,
            claimed: Value::Null,
            measured: Value::Null,
            direction,
            within: None,
            report_only: false,
            witness: None,
            details: Map::new(),
        }
    }

    fn detail(mut self, k: &str, v: Value) -> Self {
        self.details.insert(k.into(), v);
        self
    }

    fn finish(self, label: &str, started: Instant) -> CheckRecord {
        let verdict = match (self.report_only, self.within) {
            (true, _) | (false, None) => Verdict::ReportOnly,
            (false, Some(true)) => Verdict::Pass,
            (false, Some(false)) => Verdict::Fail,
        };
        let label = if label == self.kind || label.is_empty() {
            self.kind.to_string()
        } else {
            format!("{label}/{}", self.kind)
        };
        CheckRecord {
            kind: self.kind.into(),
            label,
            claimed: self.claimed,
            measured: self.measured,
            direction: self.direction.into(),
            verdict,
            within_claim: self.within,
            witness: self.witness,
            details: self.details,
            runtime_ms: started.elapsed().as_millis() as u64,
        }
    }
}

fn start_point<S: Scalar>(map: &MapInstance<S>, req: &CheckRequest) -> Result<Option<SeqVec<S>>, VerifyError> {
    req.x0
        .as_deref()
        .map(|s| {
            s.parse::<SeqVec<S>>().map_err(|e| VerifyError::InvalidParameter {
                param: "x0".into(),
                constraint: format!("a sequence literal: {e}"),
            })
        })
        .transpose()
        .map(|x| x.or_else(|| map.domain.canonical_points().into_iter().next()))
}

/// Runs one check against a map. Configuration problems come back as
/// errors; failures encountered while measuring become failing records.
pub fn run_check<S: Scalar>(
    map: &MapInstance<S>,
    req: &CheckRequest,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<CheckRecord>, VerifyError> {
    req.validate()?;
    let started = Instant::now();
    let label = req.label.clone().unwrap_or_else(|| req.kind.name().to_string());
    let seed = req.seed.unwrap_or(seed);
    let slack = S::one() + S::lit(req.tolerance.unwrap_or(tolerance));
    match measure(map, req, seed, slack) {
        Ok(drafts) => Ok(drafts.into_iter().map(|d| d.finish(&label, started)).collect()),
        Err(e @ (VerifyError::InvalidCheck(_) | VerifyError::InvalidStrategy(_) | VerifyError::InvalidParameter { .. })) => {
            Err(e)
        }
        Err(e) => {
            let mut d = Draft::new(req.kind.name(), SAMPLED);
            d.within = Some(false);
            d.measured = json!(e.to_string());
            d.witness = Some(json!({"error": e.to_string()}));
            Ok(vec![d.finish(&label, started)])
        }
    }
}

fn measure<S: Scalar>(
    map: &MapInstance<S>,
    req: &CheckRequest,
    seed: u64,
    slack: S,
) -> Result<Vec<Draft>, VerifyError> {
    let pairs = req.pairs.unwrap_or(10_000);
    let samples = req.samples.unwrap_or(10_000);
    let c = &map.claims;
    match req.kind {
        CheckKind::HolderRatio => {
            let n = req.iterate.unwrap_or(1);
            need(n >= 1, "iterate", "iterate >= 1")?;
            let est = estimate_holder_ratio(map, pairs, seed, n)?;
            let (bound, report_only) = if n == 1 || c.uniform {
                (Some(c.holder_constant), c.holder_report_only)
            } else if let Some(b) = c.asymptotic_bound(n) {
                (Some(b), c.holder_report_only)
            } else {
                (None, true)
            };
            let mut d = Draft::new("holder_ratio", LOWER)
                .detail("alpha", num(c.alpha))
                .detail("iterate", json!(n))
                .detail("evaluated", json!(est.evaluated))
                .detail("skipped", json!(est.skipped));
            d.claimed = bound.map(num).unwrap_or(Value::Null);
            d.measured = num(est.value);
            d.within = bound.map(|b| est.value <= b * slack);
            d.report_only = report_only;
            d.witness = Some(pair(&est.witness));
            let mut out = vec![d];
            if let Some(l) = c.classical_lipschitz {
                let opts = RatioOptions { exponent: Some(1.0), ..RatioOptions::holder(pairs, seed, 1) };
                let est = estimate_ratio(map, opts)?;
                let mut d = Draft::new("classical_lipschitz", LOWER);
                d.claimed = num(l);
                d.measured = num(est.value);
                d.within = Some(est.value <= l * slack);
                d.witness = Some(pair(&est.witness));
                out.push(d);
            }
            if let Some(l) = c.lower_lipschitz {
                let opts = RatioOptions {
                    exponent: Some(1.0),
                    extreme: Extreme::Min,
                    ..RatioOptions::holder(pairs, seed, 1)
                };
                let est = estimate_ratio(map, opts)?;
                let mut d = Draft::new(
                    "lower_lipschitz",
                    "upper bound: sampled inf of ratios; the true lower constant can only be smaller",
                );
                d.claimed = num(l);
                d.measured = num(est.value);
                d.within = Some(est.value >= l / slack);
                d.report_only = true;
                d.witness = Some(pair(&est.witness));
                out.push(d);
            }
            if c.isometry {
                let base = RatioOptions {
                    exponent: Some(1.0),
                    mode: PairMode::Independent,
                    ..RatioOptions::holder(pairs, seed, 1)
                };
                let hi = estimate_ratio(map, base)?;
                let lo = estimate_ratio(map, RatioOptions { extreme: Extreme::Min, ..base })?;
                let (dev_hi, dev_lo) = (hi.value - S::one(), S::one() - lo.value);
                let worst = if dev_hi >= dev_lo { &hi } else { &lo };
                let dev = dev_hi.max(dev_lo);
                let mut d = Draft::new("isometry", SAMPLED)
                    .detail("max_ratio", num(hi.value))
                    .detail("min_ratio", num(lo.value));
                d.claimed = json!(1.0);
                d.measured = num(dev);
                d.within = Some(dev <= S::lit(ORACLE_TOL));
                d.witness = Some(pair(&worst.witness));
                out.push(d);
            }
            Ok(out)
        }
        CheckKind::Invariance => {
            let out = check_invariance(map, samples, seed)?;
            let mut d = Draft::new("invariance", SAMPLED).detail("checked", json!(out.checked));
            d.claimed = json!(format!("T maps {} into itself", map.domain.kind.name()));
            d.measured = json!({"failures": out.failures});
            d.within = Some(out.failures == 0);
            d.witness = out.witness.map(|w| {
                json!({
                    "x": w.x.to_string(),
                    "image": w.image.map(|y| y.to_string()),
                    "constraint": w.violation.constraint,
                    "index": w.violation.index,
                    "excess": w.violation.excess,
                })
            });
            Ok(vec![d])
        }
        CheckKind::Orbit => {
            let n = req.n_max.unwrap_or(30);
            let mut starts: Vec<SeqVec<S>> = start_point(map, req)?.into_iter().collect();
            if req.x0.is_none() {
                if let Some(k) = req.samples {
                    let canon = map.domain.canonical_points();
                    starts.extend((0..k).map(|i| sample_point(&map.domain, &canon, seed, i + canon.len())));
                }
            }
            let traces: Vec<OrbitTrace<S>> = starts.par_iter().map(|x| orbit(map, x, n)).collect::<Result<_, _>>()?;
            let first = &traces[0];
            let mut d = Draft::new("orbit", SAMPLED)
                .detail("n", json!(n))
                .detail("starts", json!(starts.len()))
                .detail("displacements", json!(first.displacements.iter().map(|&v| num(v)).collect::<Vec<_>>()));
            let max_norm = traces.iter().map(|t| t.max_norm).fold(S::zero(), S::max);
            d.measured = json!({
                "max_norm": num(max_norm),
                "last_displacement": first.displacements.last().map(|&v| num(v)),
            });
            d.witness = Some(lit(&starts[0]));
            if let Some(l) = c.displacement_decay {
                d.claimed = json!(format!("|T^k x - T^(k+1) x| <= {}^k", l.as_f64()));
                let mut worst: Option<(S, usize, usize)> = None;
                for (s, t) in traces.iter().enumerate() {
                    for (k, &v) in t.displacements.iter().enumerate() {
                        let excess = v - l.powi(k as i32);
                        if worst.is_none_or(|w| excess > w.0) {
                            worst = Some((excess, s, k));
                        }
                    }
                }
                if let Some((excess, s, k)) = worst {
                    d = d.detail("max_excess", num(excess)).detail("worst_step", json!(k));
                    d.within = Some(excess <= S::lit(ORACLE_TOL));
                    d.witness = Some(lit(&starts[s]));
                } else {
                    d.within = Some(true);
                }
            }
            Ok(vec![d])
        }
        CheckKind::Displacement => {
            let strategy = req.strategy.unwrap_or(DisplacementStrategy::SampleMin);
            let budget = req.budget.unwrap_or(match strategy {
                DisplacementStrategy::LambdaScaling => LAMBDA_STEP_CAP,
                _ => 1000,
            });
            let est = estimate_displacement(map, strategy, budget, seed)?;
            let mut d = Draft::new("displacement", UPPER)
                .detail("strategy", json!(strategy.name()))
                .detail("budget", json!(budget))
                .detail("evaluated", json!(est.evaluated));
            if !est.lambda_steps.is_empty() {
                let steps: Vec<Value> = est
                    .lambda_steps
                    .iter()
                    .map(|s| {
                        json!({
                            "lambda": num(s.lambda),
                            "steps": s.steps,
                            "measured": num(s.measured),
                            "decay": num(s.decay),
                            "chain_bound": s.chain.map(num),
                            "decay_ratio": num(s.decay_ratio),
                        })
                    })
                    .collect();
                d = d.detail("lambda_steps", json!(steps));
            }
            if let Some(f) = &c.displacement_formula {
                d = d.detail("formula", json!(f));
            }
            d.measured = num(est.upper);
            d.witness = Some(lit(&est.witness));
            if let Some(t) = req.target {
                d.claimed = json!(t);
                d.within = Some(est.upper <= S::lit(t));
            } else if let Some(b) = c.displacement_bound {
                d.claimed = num(b);
                d.within = Some(est.upper <= b + S::lit(ORACLE_TOL));
                // A zero infimum is only ever approached.
                d.report_only = b <= S::zero();
            }
            Ok(vec![d])
        }
        CheckKind::UniformProfile | CheckKind::AsymptoticProfile => {
            let points = if req.kind == CheckKind::UniformProfile {
                let n_list = req.n_list.clone().unwrap_or_else(|| vec![1, 2, 5, 10, 20]);
                check_uniform_profile(map, &n_list, pairs, seed)?
            } else {
                check_asymptotic_profile(map, req.n_max.unwrap_or(20), pairs, seed)?
            };
            let rows: Vec<Value> = points
                .iter()
                .map(|p| json!({"n": p.n, "measured": num(p.measured.value), "bound": num(p.bound)}))
                .collect();
            let worst = points
                .iter()
                .max_by(|a, b| (a.measured.value / a.bound).partial_cmp(&(b.measured.value / b.bound)).unwrap_or(std::cmp::Ordering::Less))
                .expect("nonempty profile");
            let kind = req.kind.name();
            let mut d = Draft::new(if kind == "uniform_profile" { "uniform_profile" } else { "asymptotic_profile" }, LOWER)
                .detail("profile", json!(rows))
                .detail("worst_n", json!(worst.n));
            d.claimed = num(worst.bound);
            d.measured = num(worst.measured.value);
            d.within = Some(points.iter().all(|p| p.measured.value <= p.bound * slack));
            d.report_only = c.holder_report_only;
            d.witness = Some(pair(&worst.measured.witness));
            Ok(vec![d])
        }
        CheckKind::OracleCompare => {
            let n_max = req.n_max.unwrap_or(50);
            let mut starts: Vec<SeqVec<S>> = start_point(map, req)?.into_iter().collect();
            if req.x0.is_none() {
                let canon = map.domain.canonical_points();
                let k = req.samples.unwrap_or(100);
                starts = canon.clone();
                starts.extend((0..k).map(|i| sample_point(&map.domain, &canon, seed, i + canon.len())));
            }
            let outs: Vec<OracleOutcome<S>> =
                starts.par_iter().map(|x| oracle_compare(map, x, n_max)).collect::<Result<_, _>>()?;
            let mut worst = 0;
            for (i, o) in outs.iter().enumerate() {
                let (d, w) = (o.max_deviation, outs[worst].max_deviation);
                if !w.is_nan() && (d.is_nan() || d > w) {
                    worst = i;
                }
            }
            let mut d = Draft::new("oracle_compare", EXACT)
                .detail("n_max", json!(n_max))
                .detail("starts", json!(starts.len()))
                .detail("worst_n", json!(outs[worst].worst_n));
            d.claimed = json!(ORACLE_TOL);
            d.measured = num(outs[worst].max_deviation);
            d.within = Some(outs.iter().all(|o| o.passed));
            d.witness = Some(lit(&starts[worst]));
            Ok(vec![d])
        }
        CheckKind::ApproxFixedSet => {
            let delta = S::lit(req.delta.unwrap_or(1.0));
            let out = approx_fixed_set_check(map, delta, samples, seed)?;
            let mut d = Draft::new("approx_fixed_set", SAMPLED)
                .detail("checked", json!(out.checked))
                .detail("in_set", json!(out.in_set));
            d.claimed = num(delta);
            d.measured = num(out.worst);
            d.within = Some(out.passed);
            d.witness = out.witness.as_ref().map(lit);
            Ok(vec![d])
        }
        CheckKind::FixedPoint => {
            let ev = fixed_point_evidence(map, samples, seed)?;
            let mut d = Draft::new("fixed_point", if ev.bound.is_some() { EXACT } else { UPPER });
            d.claimed = match &c.fixed_point_set {
                FixedPointSet::Singleton(z) => json!({"singleton": z.to_string()}),
                FixedPointSet::Empty => json!("empty"),
                FixedPointSet::Unknown => json!("unknown"),
            };
            d.measured = num(ev.value);
            d.within = ev.bound.map(|b| ev.value <= b);
            d.witness = Some(lit(&ev.witness));
            Ok(vec![d])
        }
    }
}
