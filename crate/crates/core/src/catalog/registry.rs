//! Name-addressable catalog: parameter schemas, defaults and construction
//! from JSON parameter objects.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::{
    affine_cube_with_horizon, affine_mixing, baseline_c, c0_family_with_breadth, deficiency,
    goebel_kirk, holderize, hyperconvex, l1_ball_composite, lambda_scale, lift_to_ball, norming,
    prus, renormed_l1, retraction_map, shift_simplex, CatalogError, LiftVariant, MapInstance,
    SequenceRule,
};
use crate::retraction::RetractionSpec;

/// `{"name": "hyperconvex", "params": {"N": 4, "alpha": 0.5}}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub name: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl MapSpec {
    pub fn named(name: &str) -> Self {
        MapSpec { name: name.into(), params: Map::new() }
    }

    pub fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.params.insert(key.into(), v.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown construction `{name}`{}", suggest(.suggestions))]
    UnknownName { name: String, suggestions: Vec<String> },
    #[error("bad parameters for `{name}`: {message}")]
    Params { name: String, message: String },
    #[error("`{name}`: {source}")]
    Catalog { name: String, source: CatalogError },
}

fn suggest(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (did you mean {}?)", s.join(", "))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: Value,
    pub constraint: &'static str,
}

fn p(name: &'static str, kind: &'static str, default: Value, constraint: &'static str) -> ParamSpec {
    ParamSpec { name, kind, default, constraint }
}

type Builder = fn(&Params, usize) -> Result<MapInstance<f64>, RegistryError>;

#[derive(Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub formula: &'static str,
    pub params: Vec<ParamSpec>,
    pub notes: &'static [&'static str],
    build: Builder,
}

impl CatalogEntry {
    pub fn defaults(&self) -> Map<String, Value> {
        self.params.iter().map(|p| (p.name.to_string(), p.default.clone())).collect()
    }
}

/// Parameter values with defaults applied.
pub struct Params {
    name: &'static str,
    values: Map<String, Value>,
}

impl Params {
    fn err(&self, message: String) -> RegistryError {
        RegistryError::Params { name: self.name.into(), message }
    }

    fn get(&self, key: &str) -> &Value {
        self.values.get(key).unwrap_or(&Value::Null)
    }

    fn num(&self, key: &str) -> Result<f64, RegistryError> {
        self.get(key).as_f64().ok_or_else(|| self.err(format!("`{key}` must be a number")))
    }

    fn int(&self, key: &str) -> Result<u64, RegistryError> {
        self.get(key)
            .as_u64()
            .ok_or_else(|| self.err(format!("`{key}` must be a nonnegative integer")))
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self, key: &str) -> Result<T, RegistryError> {
        serde_json::from_value(self.get(key).clone())
            .map_err(|e| self.err(format!("`{key}`: {e}")))
    }

    fn catalog(&self, r: Result<MapInstance<f64>, CatalogError>) -> Result<MapInstance<f64>, RegistryError> {
        r.map_err(|source| RegistryError::Catalog { name: self.name.into(), source })
    }

    fn inner(&self, breadth: usize) -> Result<MapInstance<f64>, RegistryError> {
        let spec: MapSpec = self.parse("inner")?;
        build_map(&spec, breadth)
    }
}

const RULE: &str = "\"harmonic\" or {\"geometric\": q} with 0<q<1";

pub fn entries() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "prus",
            formula: "T(x) = (|1 - |lim x|^a|, |t1|^a, |t2|^a, ...) on the unit ball of c",
            params: vec![p("alpha", "number", json!(0.5), "0 < alpha < 1")],
            notes: &["the limit functional is the ordinary limit; only eventually constant sequences are modelled"],
            build: |p, _| p.catalog(prus(p.num("alpha")?)),
        },
        CatalogEntry {
            name: "norming",
            formula: "T(x) = ((1 + t1^2)/2)^a e1 on the unit ball of l2; closed-form iterates for a = 1/2",
            params: vec![p("alpha", "number", json!(0.5), "0 < alpha < 1")],
            notes: &[],
            build: |p, _| p.catalog(norming(p.num("alpha")?)),
        },
        CatalogEntry {
            name: "baseline_c",
            formula: "F(t) = (1, 0, |t1|, |t2|, ...) on the unit ball of c",
            params: vec![],
            notes: &[],
            build: |p, _| p.catalog(baseline_c()),
        },
        CatalogEntry {
            name: "shift_simplex",
            formula: "right shift on {t >= 0, sum t = lambda^(p/(1-a))/2} in lp",
            params: vec![
                p("p", "number", json!(1.0), "p >= 1"),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
                p("lambda", "number", json!(0.5), "0 < lambda < 1"),
            ],
            notes: &[],
            build: |p, _| p.catalog(shift_simplex(p.num("p")?, p.num("alpha")?, p.num("lambda")?)),
        },
        CatalogEntry {
            name: "affine_mixing",
            formula: "T(t)_1 = (1-g1) t1, T(t)_n = (1-g_n) t_n + g_(n-1) t_(n-1) on {t >= 0, sum t = (lambda/L)^(1/(1-a))/2} in l1",
            params: vec![
                p("L", "number", json!(2.0), "L > 1"),
                p("lambda", "number", json!(0.75), "1/L < lambda <= 1"),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
                p("gamma", "sequence rule", json!({"geometric": 0.5}), RULE),
            ],
            notes: &["the lower bound |Tx - Ty| >= |x - y|/L is measured and reported only; how it depends on the mixing weights is not settled"],
            build: |p, _| {
                let gamma: SequenceRule = p.parse("gamma")?;
                p.catalog(affine_mixing(p.num("L")?, p.num("lambda")?, p.num("alpha")?, gamma))
            },
        },
        CatalogEntry {
            name: "deficiency",
            formula: "T(x) = (lambda - |x|) e1 + sum t_i e_(2i) on the lp ball of radius lambda = (1/2)(1/2)^((2-a)/(1-a))",
            params: vec![
                p("p", "number", json!(2.0), "p >= 1"),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
            ],
            notes: &[],
            build: |p, _| p.catalog(deficiency(p.num("p")?, p.num("alpha")?)),
        },
        CatalogEntry {
            name: "goebel_kirk",
            formula: "T(x) = F(x+), F(t) = (0, t1^a, A2 t2, A3 t3, ...), A_i = 1 - 1/i^2, on the unit ball of l2; kappa_n = 2 prod_{i=2}^n A_i",
            params: vec![p("alpha", "number", json!(0.5), "0 < alpha < 1")],
            notes: &["F does not map the positive part of the l2 unit ball into itself when alpha < 1: x = (1/2, 0, 0, sqrt(3)/2) gives |F(x)|^2 > 1, so invariance checks fail"],
            build: |p, _| p.catalog(goebel_kirk(p.num("alpha")?)),
        },
        CatalogEntry {
            name: "hyperconvex",
            formula: "F(x) = (1/N, t2 t1^a, t1, t2, ...) on {x in c : 0 <= t_n <= 1/N}; closed-form iterates",
            params: vec![
                p("N", "integer", json!(4), "2 <= N^alpha"),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
            ],
            notes: &[],
            build: |p, _| {
                let n = p.int("N")?;
                let n = u32::try_from(n).map_err(|_| p.err("`N` is too large".into()))?;
                p.catalog(hyperconvex(n, p.num("alpha")?))
            },
        },
        CatalogEntry {
            name: "c0_family",
            formula: "T_a(x) = (1-delta) e1 + sum (1-delta) t_i^a e_(i+1) on {t1 = 1-delta, q^i <= t_i <= 1-delta} in c0; d(T,K) <= (1-delta)(1-a)/(e a)",
            params: vec![
                p("delta", "number", json!(0.5), "0 < delta < 1"),
                p("q", "number", json!(0.25), "0 < q < 1 - delta"),
                p("alpha", "number", json!(0.9), "0 < alpha <= 1"),
            ],
            notes: &[
                "members of the band are represented up to the breadth; deeper coordinates are not constrained from below",
                "for alpha = 1 the fixed point sum (1-delta)^i e_i is truncated at the breadth, with residual (1-delta)^(breadth+1)",
            ],
            build: |p, b| p.catalog(c0_family_with_breadth(p.num("delta")?, p.num("q")?, p.num("alpha")?, b)),
        },
        CatalogEntry {
            name: "affine_cube",
            formula: "F(x) = sum (1-b_n) t_n e_n + r sum b_n e_n on {0 <= t_n <= r} in c0",
            params: vec![
                p("r", "number", json!(0.125), "(2r)^(1-alpha) <= lambda"),
                p("beta", "sequence rule", json!("harmonic"), RULE),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
                p("lambda", "number", json!(0.5), "0 < lambda <= 1"),
                p("horizon", "integer", Value::Null, "horizon >= 1; defaults to the breadth"),
            ],
            notes: &[
                "implemented on the positive cone of c0 only",
                "coordinates past the horizon are passed through unchanged, so the finite model fixes r(e1 + ... + e_H); the defect is r b_(H+1)",
            ],
            build: |p, b| {
                let horizon = match p.get("horizon") {
                    Value::Null => b,
                    _ => p.int("horizon")? as usize,
                };
                let beta: SequenceRule = p.parse("beta")?;
                p.catalog(affine_cube_with_horizon(p.num("r")?, beta, p.num("alpha")?, p.num("lambda")?, horizon))
            },
        },
        CatalogEntry {
            name: "renormed_l1",
            formula: "T(x) = (1 - sum t_i, t1, t2, ...) after x -> x+, on {t >= 0, sum t <= 1} with |x| = max(|x+|_1, |x-|_1)",
            params: vec![p("alpha", "number", json!(0.5), "0 < alpha < 1")],
            notes: &[],
            build: |p, _| p.catalog(renormed_l1(p.num("alpha")?)),
        },
        CatalogEntry {
            name: "l1_ball_composite",
            formula: "T = shift . abs . sphere_r . radial_r on the unit ball of l1, r = (lambda/8^sqrt(a))^(1/(1-sqrt(a)))/4",
            params: vec![
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
                p("lambda", "number", json!(0.5), "0 < lambda < 1"),
            ],
            notes: &["the iterate bound |T^n x - T^n y| <= |x - y|^a is measured and reported, not enforced"],
            build: |p, _| p.catalog(l1_ball_composite(p.num("alpha")?, p.num("lambda")?)),
        },
        CatalogEntry {
            name: "lambda_scale",
            formula: "F_l(x) = F(l x); for hyperconvex F, |F_l^n x - F_l^(n+1) x| <= l^n",
            params: vec![
                p("inner", "map", json!({"name": "hyperconvex"}), "domain star-shaped about 0"),
                p("lambda", "number", json!(0.9), "0 < lambda < 1"),
            ],
            notes: &[],
            build: |p, b| {
                let inner = p.inner(b)?;
                p.catalog(lambda_scale(inner, p.num("lambda")?))
            },
        },
        CatalogEntry {
            name: "holderize",
            formula: "T_e(x) = c(x) x + (1 - c(x)) T(x), c(x) = e|x|^a/(4(1+|x|^a)); (e + diam^(1-a))-Hölder",
            params: vec![
                p("inner", "map", json!({"name": "baseline_c"}), "nonexpansive, domain inside the unit ball"),
                p("epsilon", "number", json!(0.5), "0 < epsilon < 1"),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
            ],
            notes: &[],
            build: |p, b| {
                let inner = p.inner(b)?;
                p.catalog(holderize(inner, p.num("epsilon")?, p.num("alpha")?))
            },
        },
        CatalogEntry {
            name: "lift_to_ball",
            formula: "T(x) = r F(R(x)/r) with R the radial retraction onto the r-ball",
            params: vec![
                p("inner", "map", json!({"name": "baseline_c"}), "defined on the unit ball of its norm"),
                p("r", "number", json!(0.0625), "2 L r^(1-alpha) <= lambda, or r^(1-alpha) 2^(1-alpha) |P| <= lambda"),
                p("alpha", "number", json!(0.5), "0 < alpha < 1"),
                p("lambda", "number", json!(0.5), "0 < lambda <= 1"),
                p("variant", "lift variant", json!("lipschitz"), "\"lipschitz\" or {\"complemented\": {\"projection_norm\": P}}"),
            ],
            notes: &["for the complemented variant the Hölder bound only follows from the smallness condition when alpha <= 1/2; above that it is report-only"],
            build: |p, b| {
                let inner = p.inner(b)?;
                let variant: LiftVariant = p.parse("variant")?;
                p.catalog(lift_to_ball(inner, p.num("r")?, p.num("alpha")?, p.num("lambda")?, variant))
            },
        },
        CatalogEntry {
            name: "retraction",
            formula: "named retraction: radial (2-Lipschitz), abs, positive_part, clamp (1-Lipschitz), l1_sphere (8-Lipschitz)",
            params: vec![
                p("kind", "string", json!("l1_sphere"), "radial | abs | positive_part | clamp | l1_sphere"),
                p("r", "number", json!(0.5), "r > 0 (radial, clamp, l1_sphere)"),
                p("norm", "norm", json!("sup"), "radial only: \"sup\", {\"lp\": p} or \"max_pos_neg_l1\""),
            ],
            notes: &[],
            build: |p, _| {
                let kind = p.get("kind").as_str().ok_or_else(|| p.err("`kind` must be a string".into()))?;
                let mut obj = Map::new();
                obj.insert("kind".into(), json!(kind));
                if matches!(kind, "radial" | "clamp" | "l1_sphere") {
                    obj.insert("r".into(), p.get("r").clone());
                }
                if kind == "radial" {
                    obj.insert("norm".into(), p.get("norm").clone());
                }
                let spec: RetractionSpec =
                    serde_json::from_value(Value::Object(obj)).map_err(|e| p.err(e.to_string()))?;
                p.catalog(retraction_map(spec))
            },
        },
    ]
}

pub fn names() -> Vec<&'static str> {
    entries().iter().map(|e| e.name).collect()
}

pub fn lookup(name: &str) -> Result<CatalogEntry, RegistryError> {
    let all = entries();
    if let Some(e) = all.iter().find(|e| e.name == name) {
        return Ok(e.clone());
    }
    let mut scored: Vec<(f64, &str)> = all
        .iter()
        .map(|e| (strsim::jaro_winkler(name, e.name), e.name))
        .filter(|(s, _)| *s >= 0.7)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    Err(RegistryError::UnknownName {
        name: name.into(),
        suggestions: scored.into_iter().take(3).map(|(_, n)| n.to_string()).collect(),
    })
}

/// Builds a map from its spec; `breadth` sets the sampling breadth of the
/// domain (and the horizon of maps that have one).
pub fn build_map(spec: &MapSpec, breadth: usize) -> Result<MapInstance<f64>, RegistryError> {
    let entry = lookup(&spec.name)?;
    let mut values = entry.defaults();
    for (k, v) in &spec.params {
        if !values.contains_key(k) {
            let known: Vec<&str> = entry.params.iter().map(|p| p.name).collect();
            return Err(RegistryError::Params {
                name: entry.name.into(),
                message: format!("unknown parameter `{k}` (expected one of {known:?})"),
            });
        }
        values.insert(k.clone(), v.clone());
    }
    let params = Params { name: entry.name, values };
    let mut map = (entry.build)(&params, breadth)?;
    if !matches!(entry.name, "affine_cube" | "c0_family") {
        map.domain.breadth = breadth;
    }
    Ok(map)
}
