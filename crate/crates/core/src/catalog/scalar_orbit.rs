//! One-dimensional model for iteration of Hölder maps with exponent above 1.

use serde::Serialize;

use super::{require, CatalogError};
use crate::scalar::Scalar;

/// Threshold below which a displacement counts as converged.
pub const CONVERGED_BELOW: f64 = 1e-15;

/// `T(t) = coef * t^exponent` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerRule {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerRule {
    /// `T(t) = t²/2`.
    pub const HALF_SQUARE: PowerRule = PowerRule { coef: 0.5, exponent: 2.0 };

    pub fn eval<S: Scalar>(&self, t: S) -> S {
        S::lit(self.coef) * t.powf(S::lit(self.exponent))
    }

    /// The fixed point the orbit converges to (0 for these rules).
    pub fn limit<S: Scalar>(&self) -> S {
        S::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalarOrbit<S> {
    /// `x_0, ..., x_n`
    pub points: Vec<S>,
    /// `ρ_k = |x_{k+1} - x_k|`
    pub displacements: Vec<S>,
    /// `|x_k - x*|` for the limit `x*`
    pub limit_distances: Vec<S>,
    /// First `k` with `ρ_k < 1e-15`.
    pub converged_at: Option<usize>,
    /// First `k` with `|x_k - x*| < 1e-15`.
    pub limit_reached_at: Option<usize>,
}

/// Iterates `rule` from `x0` for `n` steps.
///
/// Requires `alpha > 1`, `L ∈ (0,1)` and `|T(x0) - x0| <= 1`.
pub fn banach_alpha_gt1_iterate<S: Scalar>(
    rule: PowerRule,
    x0: S,
    l: S,
    alpha: S,
    n: usize,
) -> Result<ScalarOrbit<S>, CatalogError> {
    require(alpha > S::one(), "alpha", "alpha > 1")?;
    require(l > S::zero() && l < S::one(), "L", "L must lie in (0,1)")?;
    require(x0 >= S::zero() && x0 <= S::one(), "x0", "x0 must lie in [0,1]")?;
    require((rule.eval(x0) - x0).abs() <= S::one(), "x0", "|T(x0) - x0| <= 1")?;
    let mut points = vec![x0];
    for _ in 0..n {
        let last = *points.last().expect("nonempty");
        points.push(rule.eval(last));
    }
    let displacements: Vec<S> = points.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let limit = rule.limit::<S>();
    let limit_distances: Vec<S> = points.iter().map(|&p| (p - limit).abs()).collect();
    let eps = S::lit(CONVERGED_BELOW);
    Ok(ScalarOrbit {
        converged_at: displacements.iter().position(|&r| r < eps),
        limit_reached_at: limit_distances.iter().position(|&r| r < eps),
        points,
        displacements,
        limit_distances,
    })
}

/// Upper bound on `|f(x) - f(y)|` for an `L`-Lipschitz `α`-Hölder map with
/// `α > 1`, obtained by splitting the segment `[x, y]` of length `dist` into
/// `pieces` equal parts: `L · pieces · (dist / pieces)^α`. It tends to 0 as
/// `pieces` grows, so such a map is constant on convex sets.
pub fn chain_bound<S: Scalar>(l: S, alpha: S, dist: S, pieces: u64) -> S {
    let m = S::lit(pieces as f64);
    l * m * (dist / m).powf(alpha)
}
