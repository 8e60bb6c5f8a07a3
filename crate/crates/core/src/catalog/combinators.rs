use serde::{Deserialize, Serialize};

use super::{in_open_unit, require, CatalogError, ClaimProfile, FixedPointSet, MapInstance};
use crate::domain::{DomainKind, DomainSpec};
use crate::retraction::{radial_retract, RetractionSpec};
use crate::scalar::Scalar;
use crate::seq::{NormKind, SeqVec};

/// `F_λ(x) = F(λx)`.
pub fn lambda_scale<S: Scalar>(f: MapInstance<S>, lambda: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(lambda, "lambda")?;
    if !f.domain.is_star_shaped() {
        return Err(CatalogError::InvalidComposition(format!(
            "lambda_scale needs a domain star-shaped about 0; {} is not",
            f.domain.kind.name()
        )));
    }
    let alpha = f.claims.alpha;
    let mut claims = ClaimProfile::holder(alpha, f.claims.holder_constant * lambda.powf(alpha));
    claims.fixed_point_set = FixedPointSet::Unknown;
    if f.name == "hyperconvex" {
        claims.displacement_decay = Some(lambda);
    }
    let inner_name = f.name.clone();
    let (domain, norm) = (f.domain.clone(), f.norm);
    let inner = f.clone();
    let map = MapInstance::new(
        "lambda_scale",
        domain,
        norm,
        claims,
        format!("F_l(x) = F(l x), F = {inner_name}"),
        move |x| inner.apply(&x.scale(lambda)),
    )?;
    Ok(map.scalar_param("lambda", lambda).param("inner", inner_name))
}

/// `T_ε(x) = c(x) x + (1 - c(x)) T(x)` with `c(x) = ε‖x‖^α / (4(1 + ‖x‖^α))`.
pub fn holderize<S: Scalar>(t: MapInstance<S>, epsilon: S, alpha: S) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(epsilon, "epsilon")?;
    in_open_unit(alpha, "alpha")?;
    let nonexpansive = (t.claims.alpha == S::one() && t.claims.holder_constant <= S::one())
        || t.claims.classical_lipschitz.is_some_and(|l| l <= S::one());
    if !nonexpansive {
        return Err(CatalogError::InvalidComposition(format!(
            "holderize needs a nonexpansive map; {} is not claimed nonexpansive",
            t.name
        )));
    }
    if !t.domain.norm_bound(t.norm).is_some_and(|b| b <= S::one()) {
        return Err(CatalogError::InvalidComposition(format!(
            "holderize needs a domain inside the unit ball; {} is not",
            t.domain.kind.name()
        )));
    }
    let diam = t.domain.diameter(t.norm).unwrap_or(S::two());
    let mut claims = ClaimProfile::holder(alpha, epsilon + diam.powf(S::one() - alpha));
    claims.fixed_point_set = t.claims.fixed_point_set.clone();
    claims.displacement_bound = t.claims.displacement_bound;
    claims.truncation_residual = t.claims.truncation_residual;
    let inner_name = t.name.clone();
    let (domain, norm) = (t.domain.clone(), t.norm);
    let inner = t.clone();
    let map = MapInstance::new(
        "holderize",
        domain,
        norm,
        claims,
        format!("T_e(x) = c(x) x + (1 - c(x)) T(x), c(x) = e|x|^a / (4(1 + |x|^a)), T = {inner_name}"),
        move |x| {
            let na = x.norm(norm)?.powf(alpha);
            let c = epsilon * na / (S::lit(4.0) * (S::one() + na));
            let tx = inner.apply(x)?;
            Ok(SeqVec::axpy(c, x, S::one() - c, &tx))
        },
    )?;
    Ok(map
        .scalar_param("epsilon", epsilon)
        .scalar_param("alpha", alpha)
        .param("inner", inner_name))
}

/// Which smallness condition fixes the radius of [`lift_to_ball`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LiftVariant {
    /// Inner map `L`-Lipschitz on the unit ball: `2 L r^(1-α) <= λ`.
    Lipschitz,
    /// Inner map uniformly α-Hölder nonexpansive on a complemented copy with
    /// projection norm `‖P‖`: `r^(1-α) 2^(1-α) ‖P‖ <= λ`.
    Complemented { projection_norm: f64 },
}

/// `x ↦ r F(R(x)/r)` with `R` the radial retraction onto the `r`-ball.
pub fn lift_to_ball<S: Scalar>(
    f: MapInstance<S>,
    r: S,
    alpha: S,
    lambda: S,
    variant: LiftVariant,
) -> Result<MapInstance<S>, CatalogError> {
    in_open_unit(alpha, "alpha")?;
    require(lambda > S::zero() && lambda <= S::one(), "lambda", "lambda must lie in (0,1]")?;
    require(r > S::zero() && r <= S::one(), "r", "r must lie in (0,1]")?;
    let norm = f.norm;
    let unit_ball = DomainSpec::ball(S::one(), norm)?;
    if !matches!(f.domain.kind, DomainKind::Ball { r, norm: k } if r == S::one() && k == norm) {
        return Err(CatalogError::InvalidComposition(format!(
            "lift_to_ball needs a map on the unit ball of its norm; {} lives on {}",
            f.name,
            f.domain.kind.name()
        )));
    }
    let one = S::one();
    let report_only = match variant {
        LiftVariant::Lipschitz => {
            if f.claims.alpha != one {
                return Err(CatalogError::InvalidComposition(format!(
                    "the lipschitz lift needs a Lipschitz map; {} is only claimed {}-Hölder",
                    f.name, f.claims.alpha
                )));
            }
            let l = f.claims.holder_constant.max(one);
            require(
                S::two() * l * r.powf(one - alpha) <= lambda,
                "r",
                "r must satisfy 2 L r^(1-alpha) <= lambda",
            )?;
            false
        }
        LiftVariant::Complemented { projection_norm } => {
            let p = S::lit(projection_norm);
            require(p >= one, "projection_norm", "a projection has norm >= 1")?;
            if !(f.claims.uniform && f.claims.alpha == alpha && f.claims.holder_constant <= one) {
                return Err(CatalogError::InvalidComposition(format!(
                    "the complemented lift needs a uniformly {alpha}-Hölder nonexpansive map; {} is not",
                    f.name
                )));
            }
            require(
                (r * S::two()).powf(one - alpha) * p <= lambda,
                "r",
                "r must satisfy r^(1-alpha) 2^(1-alpha) |P| <= lambda",
            )?;
            // The bound follows from the chain only when 2^a <= 2^(1-a).
            alpha > S::lit(0.5)
        }
    };
    let mut claims = ClaimProfile::holder(alpha, lambda);
    claims.uniform = f.claims.uniform;
    claims.holder_report_only = report_only;
    claims.fixed_point_set = match f.claims.fixed_point_set {
        FixedPointSet::Empty => FixedPointSet::Empty,
        _ => FixedPointSet::Unknown,
    };
    claims.displacement_bound = f.claims.displacement_bound.map(|d| d * r);
    let inner_name = f.name.clone();
    let inner = f.clone();
    let map = MapInstance::new(
        "lift_to_ball",
        unit_ball,
        norm,
        claims,
        format!("T(x) = r F(R(x)/r), R radial retraction onto the r-ball, F = {inner_name}"),
        move |x| {
            let y = radial_retract(x, r, norm)?.scale(r.recip());
            Ok(inner.apply(&y)?.scale(r))
        },
    )?;
    Ok(map
        .scalar_param("r", r)
        .scalar_param("alpha", alpha)
        .scalar_param("lambda", lambda)
        .param("variant", serde_json::to_value(variant).expect("serializable"))
        .param("inner", inner_name))
}

/// A named retraction viewed as a map on a convenient convex domain, with its
/// claimed Lipschitz constant.
pub fn retraction_map<S: Scalar>(spec: RetractionSpec) -> Result<MapInstance<S>, CatalogError> {
    spec.validate()?;
    let tag = spec.tag();
    let (domain, norm) = match spec {
        RetractionSpec::Radial { norm, .. } => {
            let norm = match norm.build()? {
                NormKind::Lp(p) => NormKind::Lp(S::lit(p)),
                NormKind::Sup => NormKind::Sup,
                NormKind::MaxPosNegL1 => NormKind::MaxPosNegL1,
            };
            (DomainSpec::ball(S::one(), norm)?, norm)
        }
        RetractionSpec::Abs => (DomainSpec::ball(S::one(), NormKind::l1())?, NormKind::l1()),
        RetractionSpec::PositivePart => (DomainSpec::ball(S::one(), NormKind::l2())?, NormKind::l2()),
        RetractionSpec::Clamp { r } => (
            DomainSpec::new(DomainKind::PositiveBall { r: S::lit(2.0 * r), norm: NormKind::Sup })?,
            NormKind::Sup,
        ),
        RetractionSpec::L1Sphere { r } => (DomainSpec::ball(S::lit(r), NormKind::l1())?, NormKind::l1()),
    };
    let mut claims = ClaimProfile::holder(S::one(), S::lit(tag.claimed_lipschitz));
    claims.fixed_point_set = FixedPointSet::Unknown;
    let map = MapInstance::new(
        "retraction",
        domain,
        norm,
        claims,
        format!("{} retraction: {} -> {}", tag.name, tag.source, tag.target),
        move |x| Ok(spec.apply(x)?),
    )?;
    let mut map = map.param("kind", tag.name);
    if let RetractionSpec::Radial { r, .. } | RetractionSpec::Clamp { r } | RetractionSpec::L1Sphere { r } = spec {
        map = map.param("r", r);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{baseline_c, c0_family, hyperconvex, prus, shift_simplex};

    #[test]
    fn lambda_scale_examples() {
        let f = lambda_scale(hyperconvex(4, 0.5).unwrap(), 0.5).unwrap();
        assert_eq!(f.claims.displacement_decay, Some(0.5));
        let x = SeqVec::zero();
        assert_eq!(x.sup_dist(&f.apply(&x).unwrap()), 0.25);
        let s = shift_simplex(1.0, 0.5, 0.5).unwrap();
        assert!(matches!(lambda_scale(s, 0.5), Err(CatalogError::InvalidComposition(_))));
    }

    #[test]
    fn holderize_examples() {
        let t = holderize(baseline_c().unwrap(), 0.5, 0.5).unwrap();
        assert_eq!(t.apply(&SeqVec::zero()).unwrap(), baseline_c().unwrap().apply(&SeqVec::zero()).unwrap());
        assert!((t.claims.holder_constant - (0.5 + 2f64.sqrt())).abs() < 1e-15);
        assert!(holderize(prus(0.5).unwrap(), 0.5, 0.5).is_err());
        let c = c0_family(0.5, 0.25, 1.0).unwrap();
        assert!(holderize(c, 0.1, 0.5).is_ok());
    }

    #[test]
    fn lift_examples() {
        let lift = lift_to_ball(baseline_c().unwrap(), 1.0 / 16.0, 0.5, 0.5, LiftVariant::Lipschitz).unwrap();
        assert_eq!(lift.apply(&SeqVec::zero()).unwrap(), SeqVec::from_dense(&[1.0 / 16.0], 0.0));
        let err = lift_to_ball(baseline_c::<f64>().unwrap(), 0.1, 0.5, 0.5, LiftVariant::Lipschitz)
            .unwrap_err();
        assert!(err.to_string().contains("2 L r^(1-alpha) <= lambda"));
        let cpl = LiftVariant::Complemented { projection_norm: 1.0 };
        assert!(lift_to_ball(baseline_c::<f64>().unwrap(), 0.01, 0.5, 0.5, cpl).is_err());
    }

    #[test]
    fn retraction_maps() {
        let m = retraction_map::<f64>(RetractionSpec::L1Sphere { r: 0.5 }).unwrap();
        assert_eq!(m.claims.holder_constant, 8.0);
        assert_eq!(m.apply(&SeqVec::zero()).unwrap(), SeqVec::from_dense(&[0.5], 0.0));
    }
}
