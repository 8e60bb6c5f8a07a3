//! Eventually-constant real sequences and their norms.
//!
//! A [`SeqVec`] stores a finite, strictly increasing list of `(index, value)`
//! pairs together with a tail value that every coordinate beyond the stored
//! ones takes. Indices are 1-based. Entries equal to the tail are dropped on
//! construction (exact comparison), so two vectors are equal as values iff
//! they are structurally equal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeqError {
    #[error("invalid index {0}: coordinates are numbered from 1")]
    InvalidIndex(usize),
    #[error("duplicate index {0}")]
    DuplicateIndex(usize),
    #[error("vector with tail {tail} is not an element of the space normed by {norm}")]
    NotInSpace { tail: f64, norm: String },
    #[error("p-norm requires p >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("index overflow while relabelling coordinates")]
    IndexOverflow,
    #[error("cannot parse vector literal: {0}")]
    Parse(String),
}

/// Which norm is in force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind<S> {
    /// `max(|tail|, max |t_i|)`.
    Sup,
    /// `(sum |t_i|^p)^(1/p)`; only tail-zero vectors are in the space.
    Lp(S),
    /// `max(||x+||_1, ||x-||_1)`, an equivalent renorming of l1.
    MaxPosNegL1,
}

impl<S: Scalar> NormKind<S> {
    pub fn lp(p: S) -> Result<Self, SeqError> {
        if p >= S::one() && p.is_finite() {
            Ok(NormKind::Lp(p))
        } else {
            Err(SeqError::InvalidExponent(p.as_f64()))
        }
    }

    pub fn l1() -> Self {
        NormKind::Lp(S::one())
    }

    pub fn l2() -> Self {
        NormKind::Lp(S::two())
    }

    pub fn requires_zero_tail(&self) -> bool {
        !matches!(self, NormKind::Sup)
    }
}

impl<S: Scalar> fmt::Display for NormKind<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormKind::Sup => write!(f, "sup"),
            NormKind::Lp(p) => write!(f, "l{p}"),
            NormKind::MaxPosNegL1 => write!(f, "max_pos_neg_l1"),
        }
    }
}

/// An eventually-constant real sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqVec<S> {
    support: Vec<(usize, S)>,
    tail: S,
}

impl<S: Scalar> Default for SeqVec<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: Scalar> SeqVec<S> {
    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    /// The constant sequence `(t, t, t, ...)`.
    pub fn constant(tail: S) -> Self {
        SeqVec { support: Vec::new(), tail }
    }

    /// The unit vector `e_i`.
    pub fn basis(i: usize) -> Result<Self, SeqError> {
        Self::from_entries([(i, S::one())], S::zero())
    }

    /// Builds a vector from arbitrary-order entries; indices must be unique and >= 1.
    pub fn from_entries<I>(entries: I, tail: S) -> Result<Self, SeqError>
    where
        I: IntoIterator<Item = (usize, S)>,
    {
        let mut support: Vec<(usize, S)> = entries.into_iter().collect();
        support.sort_by_key(|&(i, _)| i);
        for w in support.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(SeqError::DuplicateIndex(w[0].0));
            }
        }
        if let Some(&(i, _)) = support.first() {
            if i == 0 {
                return Err(SeqError::InvalidIndex(0));
            }
        }
        Ok(Self::from_sorted(support, tail))
    }

    /// `(values[0], values[1], ..., tail, tail, ...)`.
    pub fn from_dense(values: &[S], tail: S) -> Self {
        Self::from_sorted(
            values.iter().enumerate().map(|(k, &v)| (k + 1, v)).collect(),
            tail,
        )
    }

    // Entries must already be strictly increasing with indices >= 1.
    fn from_sorted(mut support: Vec<(usize, S)>, tail: S) -> Self {
        support.retain(|&(_, v)| v != tail);
        SeqVec { support, tail }
    }

    pub fn tail(&self) -> S {
        self.tail
    }

    /// Stored `(index, value)` pairs, strictly increasing in index.
    pub fn entries(&self) -> &[(usize, S)] {
        &self.support
    }

    /// Largest stored index, or 0 for a constant sequence.
    pub fn last_index(&self) -> usize {
        self.support.last().map_or(0, |&(i, _)| i)
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty() && self.tail == S::zero()
    }

    pub fn coordinate(&self, i: usize) -> Result<S, SeqError> {
        if i == 0 {
            return Err(SeqError::InvalidIndex(0));
        }
        Ok(self.at(i))
    }

    /// Coordinate lookup for an index known to be >= 1.
    pub fn at(&self, i: usize) -> S {
        match self.support.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(k) => self.support[k].1,
            Err(_) => self.tail,
        }
    }

    /// The first `n` coordinates as a dense vector.
    pub fn dense_prefix(&self, n: usize) -> Vec<S> {
        (1..=n).map(|i| self.at(i)).collect()
    }

    pub fn norm(&self, kind: NormKind<S>) -> Result<S, SeqError> {
        if kind.requires_zero_tail() && self.tail != S::zero() {
            return Err(SeqError::NotInSpace { tail: self.tail.as_f64(), norm: kind.to_string() });
        }
        let values = self.support.iter().map(|&(_, v)| v);
        Ok(match kind {
            NormKind::Sup => values.fold(self.tail.abs(), |m, v| m.max(v.abs())),
            NormKind::Lp(p) if p == S::one() => values.fold(S::zero(), |s, v| s + v.abs()),
            NormKind::Lp(p) if p == S::two() => values.fold(S::zero(), |s, v| s + v * v).sqrt(),
            NormKind::Lp(p) => values.fold(S::zero(), |s, v| s + v.abs().powf(p)).powf(p.recip()),
            NormKind::MaxPosNegL1 => {
                let (pos, neg) = values.fold((S::zero(), S::zero()), |(pos, neg), v| {
                    if v > S::zero() {
                        (pos + v, neg)
                    } else {
                        (pos, neg - v)
                    }
                });
                pos.max(neg)
            }
        })
    }

    /// `a*x + b*y`, canonicalized.
    pub fn axpy(a: S, x: &Self, b: S, y: &Self) -> Self {
        let (xs, ys) = (&x.support, &y.support);
        let mut out = Vec::with_capacity(xs.len() + ys.len());
        let (mut i, mut j) = (0, 0);
        while i < xs.len() || j < ys.len() {
            let xi = xs.get(i).map_or(usize::MAX, |e| e.0);
            let yj = ys.get(j).map_or(usize::MAX, |e| e.0);
            let (idx, xv, yv) = if xi < yj {
                i += 1;
                (xi, xs[i - 1].1, y.tail)
            } else if yj < xi {
                j += 1;
                (yj, x.tail, ys[j - 1].1)
            } else {
                i += 1;
                j += 1;
                (xi, xs[i - 1].1, ys[j - 1].1)
            };
            out.push((idx, a * xv + b * yv));
        }
        Self::from_sorted(out, a * x.tail + b * y.tail)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::axpy(S::one(), self, S::one(), other)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::axpy(S::one(), self, -S::one(), other)
    }

    pub fn scale(&self, a: S) -> Self {
        self.map(|v| a * v)
    }

    /// Applies `f` to every coordinate, including the tail.
    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self::from_sorted(self.support.iter().map(|&(i, v)| (i, f(v))).collect(), f(self.tail))
    }

    /// `‖x - y‖` in the given norm.
    pub fn dist(&self, other: &Self, kind: NormKind<S>) -> Result<S, SeqError> {
        self.sub(other).norm(kind)
    }

    /// Sup-norm distance; defined for every pair.
    pub fn sup_dist(&self, other: &Self) -> S {
        self.sub(other).norm(NormKind::Sup).expect("sup norm is total")
    }

    /// `(head[0], ..., head[k-1], x_1, x_2, ...)`: a right shift by `head.len()`
    /// with the vacated leading coordinates filled from `head`.
    pub fn prepend(&self, head: &[S]) -> Self {
        let k = head.len();
        let mut out = Vec::with_capacity(k + self.support.len());
        out.extend(head.iter().enumerate().map(|(n, &v)| (n + 1, v)));
        // Coordinates of x that were equal to the tail and now land in
        // positions k+1.. stay implicit; only explicit ones move.
        out.extend(self.support.iter().map(|&(i, v)| (i + k, v)));
        Self::from_sorted(out, self.tail)
    }

    /// The right shift `S(x) = (0, x_1, x_2, ...)`.
    pub fn shift_right(&self) -> Self {
        self.prepend(&[S::zero()])
    }

    /// Moves coordinate `i` to position `factor * i` (other positions take the
    /// tail value, which must be zero for this to be linear).
    pub fn spread(&self, factor: usize) -> Result<Self, SeqError> {
        let support = self
            .support
            .iter()
            .map(|&(i, v)| i.checked_mul(factor).map(|j| (j, v)).ok_or(SeqError::IndexOverflow))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_sorted(support, self.tail))
    }

    /// The limit of the sequence; every Banach limit agrees with it here.
    pub fn tail_limit(&self) -> S {
        self.tail
    }

    /// Coefficients in the basis `{e_0 = (1,1,...), e_1, e_2, ...}` of c.
    pub fn c_basis_coefficients(&self) -> (S, Self) {
        let coeffs = self.support.iter().map(|&(i, v)| (i, v - self.tail)).collect();
        (self.tail, Self::from_sorted(coeffs, S::zero()))
    }

    /// Inverse of [`SeqVec::c_basis_coefficients`].
    pub fn from_c_basis(e0: S, coeffs: &Self) -> Self {
        Self::axpy(S::one(), &Self::constant(e0), S::one(), coeffs)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.tail >= S::zero() && self.support.iter().all(|&(_, v)| v >= S::zero())
    }

    /// Sum of the stored values (the coefficient sum for tail-zero vectors).
    pub fn support_sum(&self) -> S {
        self.support.iter().fold(S::zero(), |s, &(_, v)| s + v)
    }

    pub fn min_coordinate(&self) -> S {
        self.support.iter().fold(self.tail, |m, &(_, v)| m.min(v))
    }

    pub fn max_coordinate(&self) -> S {
        self.support.iter().fold(self.tail, |m, &(_, v)| m.max(v))
    }

    /// Converts to another scalar type.
    pub fn cast<T: Scalar>(&self) -> SeqVec<T> {
        SeqVec::from_sorted(
            self.support.iter().map(|&(i, v)| (i, T::lit(v.as_f64()))).collect(),
            T::lit(self.tail.as_f64()),
        )
    }
}

impl<S: Scalar> fmt::Display for SeqVec<S> {
    /// `{i1:v1, i2:v2; tail:t}`; the tail clause is omitted when the tail is 0.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, (i, v)) in self.support.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{v}")?;
        }
        if self.tail != S::zero() {
            if self.support.is_empty() {
                write!(f, "tail:{}", self.tail)?;
            } else {
                write!(f, "; tail:{}", self.tail)?;
            }
        }
        write!(f, "}}")
    }
}

fn parse_scalar<S: Scalar>(s: &str) -> Result<S, SeqError> {
    S::from_str_radix(s.trim(), 10).map_err(|_| SeqError::Parse(format!("bad number `{}`", s.trim())))
}

impl<S: Scalar> FromStr for SeqVec<S> {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|b| b.strip_suffix('}'))
            .ok_or_else(|| SeqError::Parse("literal must be enclosed in braces".into()))?;
        let (entries_part, tail_part) = match body.split_once(';') {
            Some((e, t)) => (e, Some(t)),
            None if body.trim_start().starts_with("tail") => ("", Some(body)),
            None => (body, None),
        };
        let tail = match tail_part {
            Some(t) => {
                let v = t
                    .trim()
                    .strip_prefix("tail")
                    .and_then(|r| r.trim_start().strip_prefix(':'))
                    .ok_or_else(|| SeqError::Parse(format!("bad tail clause `{}`", t.trim())))?;
                parse_scalar(v)?
            }
            None => S::zero(),
        };
        let mut entries = Vec::new();
        let mut last = 0usize;
        for item in entries_part.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (i, v) = item
                .split_once(':')
                .ok_or_else(|| SeqError::Parse(format!("entry `{item}` is not index:value")))?;
            let i: usize =
                i.trim().parse().map_err(|_| SeqError::Parse(format!("bad index `{}`", i.trim())))?;
            if i == 0 {
                return Err(SeqError::InvalidIndex(0));
            }
            if i <= last {
                return Err(SeqError::Parse(format!("indices must be ascending (at {i})")));
            }
            last = i;
            entries.push((i, parse_scalar(v)?));
        }
        Ok(Self::from_sorted(entries, tail))
    }
}

impl<S: Scalar> Serialize for SeqVec<S> {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        serializer.collect_str(self)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for SeqVec<S> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type V = SeqVec<f64>;

    fn v(s: &str) -> V {
        s.parse().unwrap()
    }

    #[test]
    fn coordinate_rules() {
        assert_eq!(v("{1:0.5}").coordinate(1).unwrap(), 0.5);
        assert_eq!(v("{1:0.5; tail:0.25}").coordinate(7).unwrap(), 0.25);
        assert_eq!(v("{2:1}").coordinate(1).unwrap(), 0.0);
        assert_eq!(v("{2:1}").coordinate(0), Err(SeqError::InvalidIndex(0)));
    }

    #[test]
    fn norms() {
        assert_eq!(V::from_dense(&[1.0, -1.0], 0.0).norm(NormKind::MaxPosNegL1).unwrap(), 1.0);
        assert_eq!(V::from_dense(&[0.6, 0.3], 0.0).norm(NormKind::l1()).unwrap(), 0.6 + 0.3);
        assert_eq!(v("{1:0.9; tail:0.25}").norm(NormKind::Sup).unwrap(), 0.9);
        assert_eq!(v("{1:3, 2:4}").norm(NormKind::l2()).unwrap(), 5.0);
        let p3 = V::from_dense(&[1.0, 1.0], 0.0).norm(NormKind::Lp(3.0)).unwrap();
        assert!((p3 - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(matches!(
            v("{tail:1}").norm(NormKind::l1()),
            Err(SeqError::NotInSpace { .. })
        ));
        assert!(NormKind::lp(0.5).is_err());
    }

    #[test]
    fn axpy_examples() {
        let e1 = V::basis(1).unwrap();
        let e2 = V::basis(2).unwrap();
        assert!(V::axpy(1.0, &e1, -1.0, &e1).is_zero());
        assert_eq!(V::axpy(0.5, &e1, 0.5, &e2), V::from_dense(&[0.5, 0.5], 0.0));
        let y = V::from_entries([(1, 0.0)], 1.0).unwrap();
        let d = V::axpy(1.0, &V::constant(1.0), -1.0, &y);
        assert_eq!(d, V::basis(1).unwrap());
        assert_eq!(d.tail(), 0.0);
    }

    #[test]
    fn canonical_form_drops_tail_entries() {
        let x = V::from_entries([(1, 0.25), (3, 0.5)], 0.25).unwrap();
        assert_eq!(x.entries(), &[(3, 0.5)]);
        assert_eq!(x, v("{3:0.5; tail:0.25}"));
    }

    #[test]
    fn tail_limit_and_c_basis() {
        let ones = V::from_dense(&[1.0; 5], 0.0);
        assert_eq!(ones.tail_limit(), 0.0);
        assert_eq!(v("{1:0.3; tail:0.25}").tail_limit(), 0.25);

        let (e0, c) = V::constant(1.0).c_basis_coefficients();
        assert_eq!((e0, c.is_zero()), (1.0, true));
        let (e0, c) = V::basis(1).unwrap().c_basis_coefficients();
        assert_eq!((e0, c), (0.0, V::basis(1).unwrap()));
        let x = V::from_entries([(1, 0.0)], 1.0).unwrap();
        let (e0, c) = x.c_basis_coefficients();
        assert_eq!((e0, c.clone()), (1.0, V::from_dense(&[-1.0], 0.0)));
        assert_eq!(V::from_c_basis(e0, &c), x);
    }

    #[test]
    fn shifts() {
        let x = v("{1:0.5, 3:2; tail:0.25}");
        assert_eq!(x.shift_right(), v("{1:0, 2:0.5, 4:2; tail:0.25}"));
        assert_eq!(x.prepend(&[1.0, 0.25]), v("{1:1, 3:0.5, 5:2; tail:0.25}"));
        assert_eq!(v("{1:1, 2:3}").spread(2).unwrap(), v("{2:1, 4:3}"));
        assert_eq!(
            V::from_entries([(usize::MAX / 2 + 1, 1.0)], 0.0).unwrap().spread(2),
            Err(SeqError::IndexOverflow)
        );
    }

    #[test]
    fn literal_grammar() {
        assert_eq!(v("{}"), V::zero());
        assert_eq!(v("{tail:1}"), V::constant(1.0));
        assert_eq!(v("{; tail: 1}"), V::constant(1.0));
        assert_eq!(v("{ 1 : 0.5 , 2:-1e-3 }").at(2), -1e-3);
        assert!("{2:1, 1:0}".parse::<V>().is_err());
        assert!("{0:1}".parse::<V>().is_err());
        assert!("1:1".parse::<V>().is_err());
        assert!("{1:x}".parse::<V>().is_err());
        assert_eq!(v("{1:0.5, 3:2; tail:0.25}").to_string(), "{1:0.5, 3:2; tail:0.25}");
        assert_eq!(V::constant(-2.0).to_string(), "{tail:-2}");
    }

    #[test]
    fn f32_kernel() {
        let x: SeqVec<f32> = "{1:0.5, 2:0.25}".parse().unwrap();
        assert_eq!(x.norm(NormKind::l1()).unwrap(), 0.75f32);
        assert_eq!(x.cast::<f64>().at(2), 0.25);
    }
}
