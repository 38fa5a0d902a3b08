//! Exponential sums: complete sums over `W^q(Y)`, their CRT factorization,
//! (sieved, weighted) Weyl sums, major and minor arc audits, and the
//! moment sum of the normalized `S(t)`.

mod complete;
mod moment;
mod weyl;

pub use complete::*;
pub use moment::*;
pub use weyl::*;

use crate::arith;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Pairwise sums below this length are summed left to right.
const PAIRWISE_LEAF: usize = 16;

/// `a/q` with `gcd(a, q) = 1` and `0 <= a < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RationalPoint {
    pub a: u64,
    pub q: u64,
}

impl RationalPoint {
    pub fn new(a: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::domain("q must be positive"));
        }
        let a = a.rem_euclid(q as i64) as u64;
        if arith::gcd(a, q) != 1 {
            return Err(Error::domain(format!("gcd({a}, {q}) != 1")));
        }
        Ok(RationalPoint { a, q })
    }

    pub fn omega(&self) -> usize {
        arith::omega(self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMethod {
    Direct,
    Crt,
    Wheel,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpSumResult {
    #[serde(serialize_with = "crate::bigjson::complex")]
    pub value: Complex64,
    pub n_terms: u64,
    pub method: SumMethod,
    pub est_abs_error: f64,
}

impl ExpSumResult {
    fn checked(value: Complex64, n_terms: u64, method: SumMethod, weight: f64) -> Self {
        let est_abs_error = n_terms as f64 * weight * 2f64.powi(-46);
        debug_assert!(value.norm() <= n_terms as f64 * weight * (1.0 + 1e-9) + 1e-9);
        ExpSumResult { value, n_terms, method, est_abs_error }
    }
}

/// `e(x) = exp(2 pi i x)` for a phase already reduced to `[0, 1)`.
#[inline]
pub fn e(phase: f64) -> Complex64 {
    let (s, c) = (TAU * phase).sin_cos();
    Complex64::new(c, s)
}

/// Fixed-shape pairwise summation; the result depends only on the order of
/// `v`.
pub fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    if v.len() <= PAIRWISE_LEAF {
        return v.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn pairwise_sum_f64(v: &[f64]) -> f64 {
    if v.len() <= PAIRWISE_LEAF {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_f64(&v[..mid]) + pairwise_sum_f64(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_point_normalizes() {
        assert_eq!(RationalPoint::new(-1, 7).unwrap(), RationalPoint { a: 6, q: 7 });
        assert_eq!(RationalPoint::new(5, 1).unwrap(), RationalPoint { a: 0, q: 1 });
        assert!(RationalPoint::new(3, 9).is_err());
        assert!(RationalPoint::new(0, 0).is_err());
    }

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<Complex64> = (0..1000).map(|i| e(i as f64 / 1000.0)).collect();
        assert!(pairwise_sum(&v).norm() < 1e-12);
    }
}
