//! Roots modulo prime powers, Hensel lifting and p-adic root certificates.
//!
//! A [`RootCert`] certifies a simple root of one square-free factor `P` of
//! `h = c * prod P_i^i`; the root then has multiplicity `i` in `h`. Working
//! with the square-free decomposition makes the multiplicity exact: a p-adic
//! root of `h` of multiplicity `i` is a simple root of `P_i`, and simple roots
//! always have a strong Hensel witness at finite precision.

use crate::arith::{self, big_mod};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Above this many residues per level we stop enumerating roots.
const ROOT_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootCert {
    pub p: u64,
    /// `j`: `p^j | P(z)`.
    pub precision: u32,
    /// `z` in `[0, p^j)`.
    #[serde(serialize_with = "crate::bigjson::big")]
    pub residue: BigInt,
    /// Multiplicity of the certified root in `h`.
    pub multiplicity: u32,
    /// `v = v_p(P'(z))`, with `j >= 2v + 1`.
    pub hensel_valuation: u32,
    /// Square-free factor `P` of which the root is simple.
    #[serde(serialize_with = "crate::bigjson::poly")]
    pub factor: IntPolynomial,
}

impl RootCert {
    /// Re-check the certificate against `h` from scratch.
    pub fn verify(&self, h: &IntPolynomial) -> bool {
        let pj = BigInt::from(self.p).pow(self.precision);
        let fz = self.factor.evaluate(&self.residue);
        let hz = h.evaluate(&self.residue);
        let dz = self.factor.derivative().evaluate(&self.residue);
        let v = match arith::valuation(&dz, self.p) {
            Some(v) => v,
            None => return false,
        };
        (&fz % &pj).is_zero()
            && (&hz % &pj).is_zero()
            && v == self.hensel_valuation
            && self.precision >= 2 * v + 1
            && self.multiplicity >= 1
            && self.multiplicity as usize <= h.deg()
            && h
                .squarefree_decomposition()
                .iter()
                .any(|(f, m)| *f == self.factor && *m == self.multiplicity as usize)
    }

    /// The certified p-adic root modulo `p^e`.
    ///
    /// The witness pins the root only modulo `p^(j-v)`, so the residue is read
    /// off a lift to precision `e + v`; this keeps residues for different `e`
    /// mutually consistent.
    pub fn root_mod(&self, e: u32) -> Result<BigInt> {
        let target = self.precision.max(e + self.hensel_valuation);
        let lifted = hensel_lift(&self.factor, self.p, &self.residue, target)?;
        Ok(lifted.mod_floor(&BigInt::from(self.p).pow(e)))
    }
}

/// All `r` in `[0, q)` with `q | p(r)`. The zero polynomial returns every
/// residue.
pub fn roots_mod(p: &IntPolynomial, q: u64) -> Vec<u64> {
    assert!(q >= 1, "modulus must be positive");
    if q == 1 {
        return vec![0];
    }
    if q <= 1_000_000 {
        let mp = p.reduce_mod(q);
        return (0..q).filter(|&r| mp.eval(r) == 0).collect();
    }
    let mut acc: Vec<u64> = vec![0];
    let mut modulus = 1u64;
    for (pr, e) in arith::factorize(q) {
        let local = roots_mod_prime_power(p, pr, e)
            .into_iter()
            .map(|r| r.to_u64().unwrap())
            .collect::<Vec<_>>();
        let pe = arith::checked_pow(pr, e).unwrap();
        let mut next = Vec::with_capacity(acc.len() * local.len());
        for &a in &acc {
            for &b in &local {
                next.push(arith::crt_pair(a, modulus, b, pe).0);
            }
        }
        acc = next;
        modulus *= pe;
    }
    acc.sort_unstable();
    acc
}

/// Roots modulo `p^e` by lifting level by level.
pub fn roots_mod_prime_power(f: &IntPolynomial, p: u64, e: u32) -> Vec<BigInt> {
    let mut level = roots_mod_prime(f, p);
    for i in 1..e {
        level = lift_level(f, p, i, &level);
    }
    level.sort();
    level
}

fn roots_mod_prime(f: &IntPolynomial, p: u64) -> Vec<BigInt> {
    let mp = f.reduce_mod(p);
    (0..p).filter(|&r| mp.eval(r) == 0).map(BigInt::from).collect()
}

/// Roots mod `p^(i+1)` from roots mod `p^i`, `i >= 1`. Uses
/// `f(r + t p^i) = f(r) + t p^i f'(r)  (mod p^(i+1))`.
fn lift_level(f: &IntPolynomial, p: u64, i: u32, roots: &[BigInt]) -> Vec<BigInt> {
    let pb = BigInt::from(p);
    let pi = pb.pow(i);
    let df = f.derivative();
    let mut out = Vec::new();
    for r in roots {
        let a = big_mod(&(f.evaluate(r) / &pi), p);
        let b = big_mod(&df.evaluate(r), p);
        if b != 0 {
            let t = arith::mul_mod(p - a % p, arith::inv_mod(b, p).unwrap(), p) % p;
            out.push(r + &pi * t);
        } else if a == 0 {
            for t in 0..p {
                out.push(r + &pi * t);
            }
        }
        if out.len() > ROOT_CAP {
            break;
        }
    }
    out
}

/// Lift `n` to a root of `g` modulo `p^j_target`.
///
/// With `v = v_p(g'(n))` this needs `g(n) = 0 mod p^(2v+1)` and
/// `j_target >= 2v + 1`; the result agrees with `n` modulo `p^(v+1)`.
pub fn hensel_lift(g: &IntPolynomial, p: u64, n: &BigInt, j_target: u32) -> Result<BigInt> {
    let dg = g.derivative();
    let v = arith::valuation(&dg.evaluate(n), p).ok_or_else(|| Error::HenselCondition {
        p,
        reason: format!("g'({n}) = 0"),
    })?;
    let pb = BigInt::from(p);
    let start = 2 * v + 1;
    if j_target < start {
        return Err(Error::HenselCondition {
            p,
            reason: format!("target precision {j_target} < 2v+1 = {start}"),
        });
    }
    let mut m = n.clone();
    if !(g.evaluate(&m) % pb.pow(start)).is_zero() {
        return Err(Error::HenselCondition {
            p,
            reason: format!("g({n}) is not divisible by {p}^{start}"),
        });
    }
    let pv = pb.pow(v);
    let mut i = start;
    while i < j_target {
        let gm = g.evaluate(&m) / pb.pow(i);
        let a = big_mod(&gm, p);
        if a != 0 {
            let u = big_mod(&(dg.evaluate(&m) / &pv), p);
            let s = arith::mul_mod(p - a, arith::inv_mod(u, p).unwrap(), p);
            m += pb.pow(i - v) * s;
        }
        i += 1;
    }
    Ok(m.mod_floor(&pb.pow(j_target)))
}

/// Deterministic root choice at `p`: the smallest precision `j <= depth`
/// where some square-free factor has a strong Hensel witness; among those,
/// minimal multiplicity, then smallest residue.
pub fn choose_root(h: &IntPolynomial, p: u64, depth: u32) -> Result<RootCert> {
    let factors = h.squarefree_decomposition();
    let mut levels: Vec<Vec<BigInt>> = factors.iter().map(|(f, _)| roots_mod_prime(f, p)).collect();
    for j in 1..=depth {
        if j > 1 {
            for (lv, (f, _)) in levels.iter_mut().zip(&factors) {
                *lv = lift_level(f, p, j - 1, lv);
            }
        }
        let mut best: Option<RootCert> = None;
        for ((f, m), roots) in factors.iter().zip(&levels) {
            let df = f.derivative();
            for z in roots {
                let Some(v) = arith::valuation(&df.evaluate(z), p) else { continue };
                if j < 2 * v + 1 {
                    continue;
                }
                let cand = RootCert {
                    p,
                    precision: j,
                    residue: z.clone(),
                    multiplicity: *m as u32,
                    hensel_valuation: v,
                    factor: f.clone(),
                };
                let better = match &best {
                    None => true,
                    Some(b) => (cand.multiplicity, &cand.residue) < (b.multiplicity, &b.residue),
                };
                if better {
                    best = Some(cand);
                }
            }
        }
        if let Some(c) = best {
            return Ok(c);
        }
    }
    Err(Error::NoRootToDepth { p, depth })
}

/// Certificate for an exact integer root `z` of `h` at the prime `p`.
pub fn integer_root_cert(h: &IntPolynomial, z: &BigInt, p: u64) -> Option<RootCert> {
    let m = h.root_multiplicity(z);
    if m == 0 || m == usize::MAX {
        return None;
    }
    Some(RootCert {
        p,
        precision: 1,
        residue: z.mod_floor(&BigInt::from(p)),
        multiplicity: m as u32,
        hensel_valuation: 0,
        factor: IntPolynomial::new(vec![-z.clone(), BigInt::one()]),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status")]
pub enum IntersectivityVerdict {
    Intersective {
        certs: BTreeMap<u64, RootCert>,
        large_primes: LargePrimeRecord,
    },
    NotIntersective {
        witness_p: u64,
        witness_j: u32,
    },
    Unknown {
        unresolved: Vec<u64>,
        certs: BTreeMap<u64, RootCert>,
    },
}

/// What is known about primes above the tested bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LargePrimeRecord {
    pub prime_bound: u64,
    /// Set when every prime has a root for a structural reason (a rational
    /// root whose denominator the prime does not divide).
    pub proved_by: Option<String>,
    /// Primes above the bound where simple-root lifting may fail; these were
    /// tested like the small primes.
    pub exceptional_primes: Vec<u64>,
    /// Part of the exceptional modulus left unfactored by trial division.
    pub unfactored: Option<String>,
    /// Untested assumption covering the remaining primes, if any.
    pub assumption: Option<String>,
}

impl IntersectivityVerdict {
    pub fn is_intersective(&self) -> bool {
        matches!(self, IntersectivityVerdict::Intersective { .. })
    }
}

struct PrimeScan {
    p: u64,
    cert: Option<RootCert>,
    empty_at: Option<u32>,
}

fn scan_prime(h: &IntPolynomial, p: u64, depth: u32, int_root: Option<&BigInt>) -> PrimeScan {
    let cert = choose_root(h, p, depth).ok().or_else(|| int_root.and_then(|z| integer_root_cert(h, z, p)));
    if cert.is_some() {
        return PrimeScan { p, cert, empty_at: None };
    }
    let mut level = roots_mod_prime(h, p);
    for j in 1..=depth {
        if j > 1 {
            level = lift_level(h, p, j - 1, &level);
        }
        if level.is_empty() {
            return PrimeScan { p, cert: None, empty_at: Some(j) };
        }
        if level.len() > ROOT_CAP {
            break;
        }
    }
    PrimeScan { p, cert: None, empty_at: None }
}

/// Bounded intersectivity decision: primes `<= prime_bound` are searched to
/// precision `depth`; larger primes are covered by a recorded argument.
///
/// A failing prime is reported as the witness `(p, j)` with the smallest
/// `j`, then the smallest `p`.
pub fn is_intersective(h: &IntPolynomial, prime_bound: u64, depth: u32) -> Result<IntersectivityVerdict> {
    if h.is_zero() {
        return Err(Error::domain("zero polynomial"));
    }
    let rational = h.rational_roots(1_000_000_000_000);
    let int_root = rational.iter().find(|r| r.is_integer()).map(|r| r.to_integer());
    let primes = arith::primes_up_to(prime_bound);
    let scans: Vec<PrimeScan> = primes
        .par_iter()
        .map(|&p| scan_prime(h, p, depth, int_root.as_ref()))
        .collect();
    if let Some(v) = not_intersective(&scans) {
        return Ok(v);
    }

    // Primes above the bound. A root of the radical modulo p is simple, hence
    // lifts, unless p divides content * lc(rad) * disc(rad).
    let rad = h.radical();
    let mut bad = h.full_content() * rad.leading();
    if rad.deg() >= 2 {
        bad *= rad.classical_discriminant()?;
    }
    let mut proved_by = None;
    if let Some(z) = &int_root {
        proved_by = Some(format!("integer root {z}"));
        bad = BigInt::one();
    } else if !rational.is_empty() {
        let g = rational.iter().fold(BigInt::zero(), |g, r| g.gcd(r.denom()));
        proved_by = Some(format!("rational roots with denominator gcd {g}"));
        bad = g;
    }
    let (bad_primes, unfactored) = trial_factor(&bad.abs(), 1_000_000);
    let exceptional: Vec<u64> = bad_primes.into_iter().filter(|&p| p > prime_bound).collect();
    let extra: Vec<PrimeScan> = exceptional
        .par_iter()
        .map(|&p| scan_prime(h, p, depth, int_root.as_ref()))
        .collect();
    if let Some(v) = not_intersective(&extra) {
        return Ok(v);
    }
    let mut certs = BTreeMap::new();
    let mut unresolved = Vec::new();
    for s in scans.into_iter().chain(extra) {
        match s.cert {
            Some(c) => {
                certs.insert(s.p, c);
            }
            None => unresolved.push(s.p),
        }
    }
    if !unresolved.is_empty() {
        return Ok(IntersectivityVerdict::Unknown { unresolved, certs });
    }
    let assumption = if proved_by.is_some() && unfactored.is_none() {
        None
    } else {
        Some(format!(
            "every prime p > {prime_bound} not dividing {} has a root of h modulo p",
            bad.abs()
        ))
    };
    Ok(IntersectivityVerdict::Intersective {
        certs,
        large_primes: LargePrimeRecord {
            prime_bound,
            proved_by,
            exceptional_primes: exceptional,
            unfactored: unfactored.map(|u| u.to_string()),
            assumption,
        },
    })
}

fn not_intersective(scans: &[PrimeScan]) -> Option<IntersectivityVerdict> {
    scans
        .iter()
        .filter_map(|s| s.empty_at.map(|j| (j, s.p)))
        .min()
        .map(|(j, p)| IntersectivityVerdict::NotIntersective { witness_p: p, witness_j: j })
}

/// Prime divisors below `limit` and the leftover cofactor (if > 1).
fn trial_factor(n: &BigInt, limit: u64) -> (Vec<u64>, Option<BigInt>) {
    let mut n = n.clone();
    let mut out = Vec::new();
    if n.is_zero() {
        return (out, None);
    }
    let mut d = 2u64;
    while d <= limit {
        let db = BigInt::from(d);
        if &db * &db > n {
            break;
        }
        if (&n % &db).is_zero() {
            out.push(d);
            while (&n % &db).is_zero() {
                n /= &db;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        match n.to_u64() {
            Some(small) if small <= limit.saturating_mul(limit) => {
                out.push(small);
                (out, None)
            }
            _ => (out, Some(n)),
        }
    } else {
        (out, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    /// Brute-force roots, independent of the lifting code.
    fn brute(f: &IntPolynomial, q: u64) -> Vec<u64> {
        (0..q)
            .filter(|&r| (f.eval_i64(r as i64) % BigInt::from(q)).is_zero())
            .collect()
    }

    #[test]
    fn roots_mod_examples() {
        assert_eq!(roots_mod(&p("x^2-1"), 8), vec![1, 3, 5, 7]);
        assert!(roots_mod(&p("x^2+1"), 3).is_empty());
        assert_eq!(roots_mod(&p("x"), 5), vec![0]);
        assert_eq!(roots_mod(&IntPolynomial::zero(), 4), vec![0, 1, 2, 3]);
    }

    #[test]
    fn prime_power_lifting_matches_brute_force() {
        for s in ["x^2-1", "x^2", "x^3-19", "(x^3-19)*(x^2+x+1)", "x^2+7", "4x^2+4x+1"] {
            let f = p(s);
            for (pr, e) in [(2u64, 5u32), (3, 4), (5, 3), (7, 2)] {
                let q = pr.pow(e);
                let got: Vec<u64> = roots_mod_prime_power(&f, pr, e).iter().map(|r| r.to_u64().unwrap()).collect();
                assert_eq!(got, brute(&f, q), "{s} mod {pr}^{e}");
            }
        }
    }

    #[test]
    fn hensel_examples() {
        let b = BigInt::from;
        assert_eq!(hensel_lift(&p("x^2-2"), 7, &b(3), 2).unwrap(), b(10));
        assert!(matches!(hensel_lift(&p("x^2"), 5, &b(0), 3), Err(Error::HenselCondition { .. })));
        assert_eq!(hensel_lift(&p("x-7"), 3, &b(1), 4).unwrap(), b(7));
        // exhaustive confirmation of the first example modulo 49
        assert_eq!(brute(&p("x^2-2"), 49), vec![10, 39]);
    }

    #[test]
    fn choose_root_examples() {
        let c = choose_root(&p("x^2"), 5, 8).unwrap();
        assert_eq!((c.residue.clone(), c.multiplicity), (BigInt::from(0), 2));
        let c = choose_root(&p("x^2-3x+2"), 7, 8).unwrap();
        assert_eq!((c.residue.clone(), c.multiplicity), (BigInt::from(1), 1));
        let h = p("(x^3-19)*(x^2+x+1)");
        let c = choose_root(&h, 3, 8).unwrap();
        assert!(c.verify(&h));
        assert_eq!(c.multiplicity, 1);
        // the lift at 3 comes from the cube root of 19: v_3(h') = 2
        assert_eq!((c.precision, c.hensel_valuation), (5, 2));
        let z = c.root_mod(2).unwrap().to_u64().unwrap();
        assert!(brute(&h, 9).contains(&z));
        assert_eq!(z % 3, 1);
    }

    #[test]
    fn verdicts() {
        assert!(is_intersective(&p("x^2"), 100, 6).unwrap().is_intersective());
        assert_eq!(
            is_intersective(&p("x^2+1"), 100, 6).unwrap(),
            IntersectivityVerdict::NotIntersective { witness_p: 3, witness_j: 1 }
        );
        assert!(brute(&p("x^2+1"), 3).is_empty());
        let h = p("(x^3-19)*(x^2+x+1)");
        match is_intersective(&h, 100, 6).unwrap() {
            IntersectivityVerdict::Intersective { certs, large_primes } => {
                assert_eq!(certs.len(), 25);
                assert!(certs.values().all(|c| c.verify(&h)));
                assert!(large_primes.assumption.is_some());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rational_roots_prove_large_primes() {
        // roots 1/2 and 1/3: every prime misses one of the denominators
        match is_intersective(&p("(2x-1)*(3x-1)"), 50, 6).unwrap() {
            IntersectivityVerdict::Intersective { large_primes, .. } => {
                assert!(large_primes.proved_by.is_some());
                assert!(large_primes.assumption.is_none());
            }
            other => panic!("{other:?}"),
        }
        // only root 1/2: fails at 2
        assert_eq!(
            is_intersective(&p("2x-1"), 50, 6).unwrap(),
            IntersectivityVerdict::NotIntersective { witness_p: 2, witness_j: 1 }
        );
    }
}
