//! `ι`, `μ` and `Q` in exact rational arithmetic.
//!
//! Same algorithm as the floating point version, for finitely supported
//! sequences with rational coordinates.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::RetractionError;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactIotaMuQ {
    pub iota: usize,
    pub mu: BigRational,
    /// Support of `Q(x)` in increasing index order.
    pub q: Vec<(usize, BigRational)>,
}

/// `x` is given by its nonzero entries, 1-based and strictly increasing.
pub fn iota_mu_q_exact(x: &[(usize, BigRational)], r: &BigRational) -> Result<ExactIotaMuQ, RetractionError> {
    if x.windows(2).any(|w| w[0].0 >= w[1].0) || x.first().is_some_and(|e| e.0 == 0) {
        return Err(RetractionError::InvalidParameter {
            param: "x".into(),
            constraint: "entries must have strictly increasing indices >= 1".into(),
        });
    }
    let entries: Vec<&(usize, BigRational)> = x.iter().filter(|e| !e.1.is_zero()).collect();
    let n: BigRational = entries.iter().map(|e| e.1.abs()).sum();
    let two = BigRational::from_integer(2.into());
    if !(n >= r / &two && &n < r) {
        return Err(RetractionError::DomainViolation(format!(
            "iota_mu_q needs r/2 <= ‖x‖₁ < r, got ‖x‖₁ = {n}, r = {r}"
        )));
    }
    let gap = r - &n;
    let mut suffix = vec![BigRational::zero(); entries.len() + 1];
    for m in (0..entries.len()).rev() {
        suffix[m] = &suffix[m + 1] + entries[m].1.abs();
    }
    let (iota, after, t_iota) = if suffix[0] < gap {
        match entries.first() {
            Some(e) if e.0 == 1 => (1, suffix[1].clone(), e.1.clone()),
            _ => (1, suffix[0].clone(), BigRational::zero()),
        }
    } else {
        let m = (0..entries.len()).find(|&m| suffix[m + 1] < gap).expect("suffix mass reaches 0 < gap");
        (entries[m].0, suffix[m + 1].clone(), entries[m].1.clone())
    };
    let lead = &gap - after;
    let mu = if t_iota.is_zero() { BigRational::from_integer(1.into()) } else { &lead / t_iota.abs() };
    let lead = if t_iota.is_negative() { -lead } else { lead };
    let mut q = Vec::new();
    if !lead.is_zero() {
        q.push((iota, lead));
    }
    q.extend(entries.iter().filter(|e| e.0 > iota).map(|e| (e.0, e.1.clone())));
    Ok(ExactIotaMuQ { iota, mu, q })
}
