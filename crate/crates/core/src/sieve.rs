//! Derivative-root sieve. For each prime `p <= Y`, `gamma(p)` is the least
//! power with `g'` not identically zero mod `p^gamma`, and `W(Y)` keeps the
//! `n` with `g'(n)` nonzero mod every `p^gamma(p)`.

use crate::arith;
use crate::error::{Error, Result};
use crate::padic;
use crate::poly::IntPolynomial;
use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Wheel moduli above this fall back to a direct scan.
pub const WHEEL_LIMIT: u64 = 1_000_000_000;
const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Serialize)]
pub struct PrimeEntry {
    pub gamma: u32,
    /// `p^gamma`.
    pub modulus: u64,
    pub j: usize,
    pub roots: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SieveProfile {
    #[serde(serialize_with = "crate::bigjson::poly")]
    pub g: IntPolynomial,
    #[serde(rename = "Y")]
    pub y: f64,
    pub table: BTreeMap<u64, PrimeEntry>,
}

/// `gamma(p)`, `j(p)` and the roots of `g'` mod `p^gamma`.
///
/// `g'` vanishes identically mod `p^e` iff `p^e` divides each forward
/// difference `Delta^i g'(0)`, since the binomial polynomials are a basis of
/// the integer-valued ones.
pub fn gamma_j(g: &IntPolynomial, p: u64) -> Result<PrimeEntry> {
    if g.deg() < 2 {
        return Err(Error::domain("sieve needs deg(g) >= 2"));
    }
    if !arith::is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let gp = g.derivative();
    let min_v = forward_differences(&gp)
        .iter()
        .filter_map(|v| arith::valuation(v, p))
        .min()
        .expect("g' is nonzero");
    let gamma = min_v + 1;
    let modulus = arith::checked_pow(p, gamma)
        .filter(|&m| m <= 1u64 << 40)
        .ok_or_else(|| Error::Resource(format!("p^gamma too large at p={p}")))?;
    let roots = padic::roots_mod(&gp, modulus);
    Ok(PrimeEntry { gamma, modulus, j: roots.len(), roots })
}

fn forward_differences(f: &IntPolynomial) -> Vec<BigInt> {
    let mut vals: Vec<BigInt> = (0..=f.deg() as i64).map(|x| f.eval_i64(x)).collect();
    let mut out = Vec::with_capacity(vals.len());
    while !vals.is_empty() {
        out.push(vals[0].clone());
        vals = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
    }
    out
}

impl SieveProfile {
    pub fn new(g: IntPolynomial, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::domain("Y must be a positive real"));
        }
        if g.deg() < 2 {
            return Err(Error::domain("sieve needs deg(g) >= 2"));
        }
        let mut table = BTreeMap::new();
        for p in arith::primes_up_to(y.floor() as u64) {
            table.insert(p, gamma_j(&g, p)?);
        }
        Ok(SieveProfile { g, y, table })
    }

    pub fn k(&self) -> usize {
        self.g.deg()
    }

    /// `M = prod p^gamma(p)`, if it fits in a `u64`.
    pub fn wheel_modulus(&self) -> Option<u64> {
        self.table.values().try_fold(1u64, |acc, e| acc.checked_mul(e.modulus))
    }

    fn avoids(e: &PrimeEntry, n: i128) -> bool {
        let r = n.rem_euclid(e.modulus as i128) as u64;
        e.roots.binary_search(&r).is_err()
    }

    pub fn w_member(&self, n: u64) -> bool {
        self.table.values().all(|e| Self::avoids(e, n as i128))
    }

    /// Membership in `W^q(Y)`: only primes with `p^gamma(p) | q` are tested.
    pub fn wq_member(&self, q: u64, s: i64) -> bool {
        self.table.values().filter(|e| q % e.modulus == 0).all(|e| Self::avoids(e, s as i128))
    }

    /// Number of classes mod `M` in `W(Y)`, by CRT.
    pub fn classes_in_period(&self) -> u128 {
        self.table.values().map(|e| (e.modulus - e.j as u64) as u128).product()
    }

    /// Sieve `[lo, hi]` and return the surviving flags.
    pub(crate) fn sieve_block(&self, lo: u64, hi: u64) -> Vec<bool> {
        let len = (hi - lo + 1) as usize;
        let mut keep = vec![true; len];
        for e in self.table.values() {
            let m = e.modulus;
            let base = lo % m;
            for &r in &e.roots {
                let mut i = ((r + m - base) % m) as usize;
                while i < len {
                    keep[i] = false;
                    i += m as usize;
                }
            }
        }
        keep
    }

    /// Count of `[1, x] ∩ W(Y)` by a block sieve, blocks in parallel.
    pub fn scan_count(&self, x: u64) -> u64 {
        let blocks = x.div_ceil(BLOCK);
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK + 1;
                let hi = (lo + BLOCK - 1).min(x);
                self.sieve_block(lo, hi).iter().filter(|&&k| k).count() as u64
            })
            .sum()
    }

    pub fn scan_list(&self, x: u64) -> Vec<u64> {
        let blocks = x.div_ceil(BLOCK);
        let parts: Vec<Vec<u64>> = (0..blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK + 1;
                let hi = (lo + BLOCK - 1).min(x);
                let keep = self.sieve_block(lo, hi);
                (lo..=hi).zip(keep).filter_map(|(n, k)| k.then_some(n)).collect()
            })
            .collect();
        parts.concat()
    }

    /// Exact `|[1, X] ∩ W(Y)|`. With a wheel modulus `M <= 10^9` the full
    /// periods are counted by CRT and only `X mod M` is scanned.
    pub fn enumerate_w(&self, x: u64, want_list: bool) -> WCount {
        let list = want_list.then(|| self.scan_list(x));
        match self.wheel_modulus().filter(|&m| m <= WHEEL_LIMIT) {
            Some(m) => {
                let full = (x / m) as u128 * self.classes_in_period();
                let count = full as u64 + self.scan_count(x % m);
                WCount { count, method: "wheel", modulus: Some(m), list }
            }
            None => WCount { count: self.scan_count(x), method: "scan", modulus: None, list },
        }
    }

    /// `prod_{p<=Y} (1 - j(p)/p^gamma(p))`.
    pub fn density(&self) -> f64 {
        self.table.values().map(|e| 1.0 - e.j as f64 / e.modulus as f64).product()
    }

    pub fn brun_compare(&self, x: u64) -> BrunComparison {
        let exact = self.enumerate_w(x, false).count;
        let main = x as f64 * self.density();
        BrunComparison {
            x,
            exact,
            main,
            relative_error: (exact as f64 - main).abs() / x as f64,
            error_bound: self.table.values().map(|e| 1.0 + e.j as f64).product(),
            outside_regime: (x as f64) < self.y * self.y,
        }
    }

    /// The product against `(log Y)^(1-k)`.
    pub fn product_lower_check(&self) -> Result<ProductCheck> {
        if self.y < 2.0 {
            return Err(Error::domain("product check needs Y >= 2"));
        }
        let product = self.density();
        let floor_value = self.y.ln().powi(1 - self.k() as i32);
        Ok(ProductCheck { y: self.y, product, floor_value, ratio: product / floor_value })
    }

    /// `p^(gamma-1)` divides `k! gcd(coefficients of g')` at every prime.
    pub fn idzero_check(&self) -> bool {
        let gp = self.g.derivative();
        let mut c = BigInt::zero();
        for a in gp.coeffs() {
            c = num_integer::Integer::gcd(&c, a);
        }
        let kf: BigInt = (1..=self.k() as u64).map(BigInt::from).product();
        let target = kf * c;
        self.table.iter().all(|(&p, e)| (&target % BigInt::from(p).pow(e.gamma - 1)).is_zero())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WCount {
    pub count: u64,
    pub method: &'static str,
    pub modulus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BrunComparison {
    #[serde(rename = "X")]
    pub x: u64,
    pub exact: u64,
    pub main: f64,
    pub relative_error: f64,
    /// `prod (1 + j(p))`, which bounds `|exact - main|` for every `X`.
    pub error_bound: f64,
    /// `X < Y^2`.
    pub outside_regime: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductCheck {
    #[serde(rename = "Y")]
    pub y: f64,
    pub product: f64,
    pub floor_value: f64,
    pub ratio: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    #[test]
    fn gamma_j_examples() {
        let e = gamma_j(&p("x^3"), 3).unwrap();
        assert_eq!((e.gamma, e.roots.clone()), (2, vec![0, 3, 6]));
        let e = gamma_j(&p("x^3"), 2).unwrap();
        assert_eq!((e.gamma, e.roots.clone()), (1, vec![0]));
        let e = gamma_j(&p("x^2"), 5).unwrap();
        assert_eq!((e.gamma, e.j), (1, 1));
        let e = gamma_j(&p("x^2"), 2).unwrap();
        assert_eq!((e.gamma, e.roots.clone()), (2, vec![0, 2]));
        // x^3 - x: g' = 3x^2 - 1, fine at 2 and 3
        assert_eq!(gamma_j(&p("x^3-x"), 3).unwrap().gamma, 1);
        // g' = 2x + 2 (x^2 + 2x) vs x^p - x style: 2(x^2+x)/... use x^2+x: g' = 2x+1
        assert_eq!(gamma_j(&p("x^2+x"), 2).unwrap().roots, Vec::<u64>::new());
    }

    #[test]
    fn membership_examples() {
        let sq = SieveProfile::new(p("x^2"), 10.0).unwrap();
        // 7 <= Y hits the root 0 mod 7
        assert!(!sq.w_member(7));
        assert!(sq.w_member(11));
        assert!(!sq.w_member(6));
        assert!(sq.wq_member(1, 0));
        assert!(sq.wq_member(4, 1));
        assert!(!sq.wq_member(4, 2));
        assert!(!sq.wq_member(3, 0));
        let cube = SieveProfile::new(p("x^3"), 3.0).unwrap();
        assert!(!cube.w_member(4));
    }

    #[test]
    fn counting_examples() {
        let sq = SieveProfile::new(p("x^2"), 3.0).unwrap();
        let w = sq.enumerate_w(12, true);
        assert_eq!(w.count, 4);
        assert_eq!(w.list.unwrap(), vec![1, 5, 7, 11]);
        let b = sq.brun_compare(12);
        assert_eq!((b.exact, b.main), (4, 4.0));
        let empty = SieveProfile::new(p("x^2"), 1.5).unwrap();
        assert_eq!(empty.enumerate_w(100, false).count, 100);
        let cube = SieveProfile::new(p("x^3"), 3.0).unwrap();
        let brute = (1..=20u64).filter(|&n| (3 * n * n) % 2 != 0 && (3 * n * n) % 9 != 0).count() as u64;
        assert_eq!(cube.enumerate_w(20, false).count, brute);
    }

    #[test]
    fn product_examples() {
        let sq = SieveProfile::new(p("x^2"), 2.0).unwrap();
        let c = sq.product_lower_check().unwrap();
        assert_eq!(c.product, 0.5);
        assert!((c.floor_value - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!((c.ratio - 0.5 * 2f64.ln()).abs() < 1e-12);
    }
}
