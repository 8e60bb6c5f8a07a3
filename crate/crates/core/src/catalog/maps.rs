use std::collections::BTreeMap;

use super::{
    in_open_unit, require, CatalogError, ClaimProfile, FixedPointSet, KappaRule, MapInstance,
    SequenceRule,
};
use crate::domain::{DomainKind, DomainSpec, DEFAULT_BREADTH};
use crate::retraction::{abs_retract, l1_sphere_retract, positive_part, radial_retract};
use crate::scalar::Scalar;
use crate::seq::{NormKind, SeqVec};

fn e1<S: Scalar>(v: S) -> SeqVec<S> {
    SeqVec::from_entries([(1, v)], S::zero()).expect("index 1")
}

fn lp_exponent<S: Scalar>(p: S) -> Result<NormKind<S>, CatalogError> {
    NormKind::lp(p).map_err(|_| super::invalid("p", "p must be >= 1"))
}

/// Self-map of the sup-norm unit ball with no fixed point.
pub fn prus<S: Scalar>(alpha: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    let domain = DomainSpec::ball(S::one(), NormKind::Sup)?;
    let claims = ClaimProfile::holder(alpha, S::one());
    let map = MapInstance::new(
        "prus",
        domain,
        NormKind::Sup,
        claims,
        "T(x) = (|1 - |lim x|^a|, |t1|^a, |t2|^a, ...)",
        move |x| {
            let first = (S::one() - x.tail_limit().abs().powf(alpha)).abs();
            Ok(x.map(|t| t.abs().powf(alpha)).prepend(&[first]))
        },
    )?;
    Ok(map.scalar_param("alpha", alpha))
}

/// `T(x) = ((1 + t1²)/2)^α e1` on the ℓ₂ unit ball.
pub fn norming<S: Scalar>(alpha: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    let domain = DomainSpec::ball(S::one(), NormKind::l2())?;
    let mut claims = ClaimProfile::holder(alpha, S::one());
    claims.classical_lipschitz = Some(alpha * S::two().powf(S::one() - alpha));
    claims.fixed_point_set = FixedPointSet::Singleton(e1(S::one()));
    let map = MapInstance::new(
        "norming",
        domain,
        NormKind::l2(),
        claims,
        "T(x) = ((1 + t1^2)/2)^a e1",
        move |x| {
            let phi = x.at(1);
            Ok(e1(((S::one() + phi * phi) / S::two()).powf(alpha)))
        },
    )?
    .scalar_param("alpha", alpha);
    if alpha != S::lit(0.5) {
        return Ok(map);
    }
    Ok(map.with_oracle(|x, n| {
        if n == 0 {
            return Ok(x.clone());
        }
        let mut geometric = S::zero();
        let mut w = S::one();
        for _ in 0..n {
            w = w / S::two();
            geometric = geometric + w;
        }
        let phi = x.at(1);
        Ok(e1((geometric + phi * phi * w).sqrt()))
    }))
}

/// `F(t) = (1, 0, |t1|, |t2|, ...)` on the sup-norm unit ball.
pub fn baseline_c<S: Scalar>() -> Result<MapInstance<S>, CatalogError> {
    let domain = DomainSpec::ball(S::one(), NormKind::Sup)?;
    let mut claims = ClaimProfile::holder(S::one(), S::one());
    claims.uniform = true;
    MapInstance::new(
        "baseline_c",
        domain,
        NormKind::Sup,
        claims,
        "F(t) = (1, 0, |t1|, |t2|, ...)",
        |x| Ok(x.map(|t| t.abs()).prepend(&[S::one(), S::zero()])),
    )
}

/// Right shift on the ℓp simplex of mass `λ^{p/(1-α)}/2`.
pub fn shift_simplex<S: Scalar>(p: S, alpha: S, lambda: S) -> Result<MapInstance<S>, CatalogError> {
    let norm = lp_exponent(p)?;
    in_open_unit(alpha, "alpha")?;
    in_open_unit(lambda, "lambda")?;
    let mass = lambda.powf(p / (S::one() - alpha)) / S::two();
    let domain = DomainSpec::new(DomainKind::Simplex { p, mass })?;
    let mut claims = ClaimProfile::holder(alpha, lambda);
    claims.uniform = true;
    claims.affine = true;
    claims.displacement_bound = Some(S::zero());
    let map = MapInstance::new(
        "shift_simplex",
        domain,
        norm,
        claims,
        "F(t1, t2, ...) = (0, t1, t2, ...) on {t >= 0, sum t = lambda^(p/(1-a))/2}",
        |x| Ok(x.shift_right()),
    )?;
    Ok(map.scalar_param("p", p).scalar_param("alpha", alpha).scalar_param("lambda", lambda))
}

/// Affine mixing map on the ℓ₁ simplex of mass `(λ/L)^{1/(1-α)}/2`.
pub fn affine_mixing<S: Scalar>(
    l: S,
    lambda: S,
    alpha: S,
    gamma: SequenceRule,
) -> Result<MapInstance<S>, CatalogError> {
    require(l > S::one(), "L", "L > 1")?;
    require(
        lambda > l.recip() && lambda <= S::one(),
        "lambda",
        "lambda must lie in (1/L, 1]",
    )?;
    in_open_unit(alpha, "alpha")?;
    gamma.validate("gamma")?;
    let mass = (lambda / l).powf((S::one() - alpha).recip()) / S::two();
    let domain = DomainSpec::new(DomainKind::Simplex { p: S::one(), mass })?;
    let mut claims = ClaimProfile::holder(alpha, lambda);
    claims.affine = true;
    claims.lower_lipschitz = Some(l.recip());
    let map = MapInstance::new(
        "affine_mixing",
        domain,
        NormKind::l1(),
        claims,
        "T(t)_1 = (1-g1) t1, T(t)_n = (1-g_n) t_n + g_(n-1) t_(n-1)",
        move |x| {
            let mut out: BTreeMap<usize, S> = BTreeMap::new();
            for &(i, t) in x.entries() {
                let g: S = gamma.value(i);
                let here = out.entry(i).or_insert(S::zero());
                *here = *here + (S::one() - g) * t;
                let next = i.checked_add(1).ok_or(crate::seq::SeqError::IndexOverflow)?;
                let there = out.entry(next).or_insert(S::zero());
                *there = *there + g * t;
            }
            Ok(SeqVec::from_entries(out, x.tail())?)
        },
    )?;
    Ok(map
        .scalar_param("L", l)
        .scalar_param("lambda", lambda)
        .scalar_param("alpha", alpha)
        .param("gamma", serde_json::to_value(gamma).expect("serializable")))
}

/// `T(x) = (λ - ‖x‖) e1 + Σ t_i e_{2i}` on the ℓp ball of radius λ.
pub fn deficiency<S: Scalar>(p: S, alpha: S) -> Result<MapInstance<S>, CatalogError> {
    let norm = lp_exponent(p)?;
    in_open_unit(alpha, "alpha")?;
    let half = S::lit(0.5);
    // Largest λ with (2λ)^(1-α) 2^(2-α) <= 1.
    let exponent = (S::two() - alpha) / (S::one() - alpha);
    let lambda = half * half.powf(exponent);
    let domain = DomainSpec::ball(lambda, norm)?;
    let mut claims = ClaimProfile::holder(alpha, S::one());
    claims.displacement_bound = Some(half.powf(exponent));
    claims.displacement_formula = Some("(1/2)^((2-a)/(1-a))".into());
    let map = MapInstance::new(
        "deficiency",
        domain,
        norm,
        claims,
        "T(x) = (lambda - |x|) e1 + sum t_i e_(2i)",
        move |x| {
            let n = x.norm(norm)?;
            let spread = x.spread(2)?;
            Ok(SeqVec::axpy(S::one(), &spread, lambda - n, &e1(S::one())))
        },
    )?;
    Ok(map.scalar_param("p", p).scalar_param("alpha", alpha).scalar_param("lambda", lambda))
}

/// `F(t) = (0, t1^α, A2 t2, A3 t3, ...)` with `A_i = 1 - 1/i²`, composed with
/// the positive part.
pub fn goebel_kirk<S: Scalar>(alpha: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    let domain = DomainSpec::ball(S::one(), NormKind::l2())?;
    let mut claims = ClaimProfile::holder(alpha, S::two());
    claims.asymptotic_kappa = Some(KappaRule::GoebelKirk);
    claims.fixed_point_set = FixedPointSet::Singleton(SeqVec::zero());
    claims.not_lipschitz = true;
    let map = MapInstance::new(
        "goebel_kirk",
        domain,
        NormKind::l2(),
        claims,
        "T(x) = F(x+), F(t) = (0, t1^a, A2 t2, A3 t3, ...), A_i = 1 - 1/i^2",
        move |x| {
            let y = positive_part(x);
            let mut out = vec![(2, y.at(1).powf(alpha))];
            for &(i, t) in y.entries().iter().filter(|e| e.0 >= 2) {
                let ii = S::lit(i as f64);
                let next = i.checked_add(1).ok_or(crate::seq::SeqError::IndexOverflow)?;
                out.push((next, (S::one() - (ii * ii).recip()) * t));
            }
            Ok(SeqVec::from_entries(out, y.tail())?)
        },
    )?;
    Ok(map.scalar_param("alpha", alpha))
}

/// `F(x) = (1/N, t2 t1^α, t1, t2, ...)` on `{x ∈ c : 0 <= t_n <= 1/N}`.
pub fn hyperconvex<S: Scalar>(n: u32, alpha: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    require(n >= 1, "N", "N must be a positive integer")?;
    let big_n = S::lit(n as f64);
    require(big_n.powf(alpha) >= S::two(), "N", "N and alpha must satisfy 2 <= N^alpha")?;
    let cap = big_n.recip();
    let domain = DomainSpec::new(DomainKind::CInterval { cap })?;
    let mut claims = ClaimProfile::holder(alpha, S::one());
    claims.uniform = true;
    claims.displacement_bound = Some(S::zero());
    let map = MapInstance::new(
        "hyperconvex",
        domain,
        NormKind::Sup,
        claims,
        "F(x) = (1/N, t2 t1^a, t1, t2, t3, ...)",
        move |x| {
            let (t1, t2) = (x.at(1), x.at(2));
            Ok(x.prepend(&[cap, t2 * t1.powf(alpha)]))
        },
    )?
    .param("N", n)
    .scalar_param("alpha", alpha);
    Ok(map.with_oracle(move |x, m| {
        if m == 0 {
            return Ok(x.clone());
        }
        // F^(k+1)(x) = (1/N, t2 (t1/N^k)^a, 1/N, t2 (t1/N^(k-1))^a, ..., 1/N, t2 t1^a, t1, t2, ...)
        let (t1, t2) = (x.at(1), x.at(2));
        let mut head = Vec::with_capacity(2 * m);
        for k in (0..m).rev() {
            head.push(cap);
            head.push(t2 * (t1 / big_n.powi(k as i32)).powf(alpha));
        }
        Ok(x.prepend(&head))
    }))
}

/// Family `T_α(x) = (1-δ) e1 + Σ (1-δ) t_i^α e_{i+1}` on the σ-band.
pub fn c0_family<S: Scalar>(delta: S, q: S, alpha: S) -> Result<MapInstance<S>, CatalogError> {
    c0_family_with_breadth(delta, q, alpha, DEFAULT_BREADTH)
}

pub fn c0_family_with_breadth<S: Scalar>(
    delta: S,
    q: S,
    alpha: S,
    breadth: usize,
) -> Result<MapInstance<S>, CatalogError> {
    require(alpha > S::zero() && alpha <= S::one(), "alpha", "alpha must lie in (0,1]")?;
    let domain = DomainSpec::new(DomainKind::SigmaBand { delta, q })?.with_breadth(breadth);
    let top = S::one() - delta;
    let mut claims = ClaimProfile::holder(alpha, S::one());
    if alpha < S::one() {
        let e = S::one().exp();
        claims.displacement_bound = Some(top * (S::one() - alpha) / (e * alpha));
        claims.displacement_formula = Some("(1-delta)(1-a)/(e a)".into());
    } else {
        let z: Vec<S> = (1..=domain.breadth).map(|i| top.powi(i as i32)).collect();
        claims.fixed_point_set = FixedPointSet::Singleton(SeqVec::from_dense(&z, S::zero()));
        claims.truncation_residual = top.powi(domain.breadth as i32 + 1);
        claims.displacement_bound = Some(S::zero());
    }
    let map = MapInstance::new(
        "c0_family",
        domain,
        NormKind::Sup,
        claims,
        "T_a(x) = (1-delta) e1 + sum (1-delta) t_i^a e_(i+1)",
        move |x| Ok(x.map(|t| top * t.abs().powf(alpha)).prepend(&[top])),
    )?;
    Ok(map.scalar_param("delta", delta).scalar_param("q", q).scalar_param("alpha", alpha))
}

/// `F(x) = Σ (1-β_n) t_n e_n + r Σ β_n e_n` on the c₀ coefficient box `[0, r]`.
pub fn affine_cube<S: Scalar>(
    r: S,
    beta: SequenceRule,
    alpha: S,
    lambda: S,
) -> Result<MapInstance<S>, CatalogError> {
    affine_cube_with_horizon(r, beta, alpha, lambda, DEFAULT_BREADTH)
}

/// As [`affine_cube`], acting on coordinates `1..=horizon` only; later
/// coordinates are passed through, which keeps every image finitely
/// supported.
pub fn affine_cube_with_horizon<S: Scalar>(
    r: S,
    beta: SequenceRule,
    alpha: S,
    lambda: S,
    horizon: usize,
) -> Result<MapInstance<S>, CatalogError> {
    require(r > S::zero(), "r", "r > 0")?;
    in_open_unit(alpha, "alpha")?;
    require(lambda > S::zero() && lambda <= S::one(), "lambda", "lambda must lie in (0,1]")?;
    beta.validate("beta")?;
    require(
        (S::two() * r).powf(S::one() - alpha) <= lambda,
        "r",
        "r, alpha and lambda must satisfy (2r)^(1-alpha) <= lambda",
    )?;
    require(horizon >= 1, "horizon", "horizon >= 1")?;
    let domain = DomainSpec::new(DomainKind::CoefficientBox { r })?.with_breadth(horizon);
    let mut claims = ClaimProfile::holder(alpha, lambda);
    claims.uniform = true;
    claims.affine = true;
    claims.displacement_bound = Some(S::zero());
    claims.truncation_residual = r * beta.value::<S>(horizon + 1);
    let map = MapInstance::new(
        "affine_cube",
        domain,
        NormKind::Sup,
        claims,
        "F(x) = sum (1-b_n) t_n e_n + r sum b_n e_n",
        move |x| {
            let mut out: Vec<(usize, S)> = (1..=horizon)
                .map(|n| {
                    let t = x.at(n);
                    (n, t + beta.value::<S>(n) * (r - t))
                })
                .collect();
            out.extend(x.entries().iter().filter(|e| e.0 > horizon).copied());
            Ok(SeqVec::from_entries(out, x.tail())?)
        },
    )?;
    Ok(map
        .scalar_param("r", r)
        .param("beta", serde_json::to_value(beta).expect("serializable"))
        .scalar_param("alpha", alpha)
        .scalar_param("lambda", lambda)
        .param("horizon", horizon))
}

/// `T(x) = (1 - Σ t_i, t1, t2, ...)` after the positive part, under
/// `max(‖x⁺‖₁, ‖x⁻‖₁)`.
pub fn renormed_l1<S: Scalar>(alpha: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    let domain = DomainSpec::new(DomainKind::SubSimplex { mass_cap: S::one() })?;
    let mut claims = ClaimProfile::holder(alpha, S::one());
    claims.uniform = true;
    claims.isometry = true;
    let map = MapInstance::new(
        "renormed_l1",
        domain,
        NormKind::MaxPosNegL1,
        claims,
        "T(x) = (1 - sum t_i, t1, t2, ...) after t -> t+",
        |x| {
            let y = positive_part(x);
            Ok(y.prepend(&[S::one() - y.support_sum()]))
        },
    )?;
    Ok(map.scalar_param("alpha", alpha))
}

/// `r = (λ / 8^θ)^{1/(1-θ)} / 4` with `θ = √α`.
pub fn l1_ball_radius<S: Scalar>(alpha: S, lambda: S) -> S {
    let theta = alpha.sqrt();
    (lambda / S::lit(8.0).powf(theta)).powf((S::one() - theta).recip()) / S::lit(4.0)
}

/// Shift ∘ abs ∘ sphere retraction ∘ radial retraction on the ℓ₁ unit ball.
pub fn l1_ball_composite<S: Scalar>(alpha: S, lambda: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    in_open_unit(lambda, "lambda")?;
    let r = l1_ball_radius(alpha, lambda);
    let domain = DomainSpec::ball(S::one(), NormKind::l1())?;
    let mut claims = ClaimProfile::holder(alpha, S::one());
    claims.uniform = true;
    claims.holder_report_only = true;
    claims.displacement_bound = Some(S::zero());
    let map = MapInstance::new(
        "l1_ball_composite",
        domain,
        NormKind::l1(),
        claims,
        "T = shift . abs . sphere_r . radial_r, r = (lambda/8^sqrt(a))^(1/(1-sqrt(a)))/4",
        move |x| {
            let g = radial_retract(x, r, NormKind::l1())?;
            let s = l1_sphere_retract(&g, r)?;
            Ok(abs_retract(&s).shift_right())
        },
    )?;
    Ok(map.scalar_param("alpha", alpha).scalar_param("lambda", lambda).scalar_param("r", r))
}
