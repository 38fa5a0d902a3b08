//! Auxiliary polynomial families `h_d(x) = h(r_d + d x) / lambda(d)`.
//!
//! A family fixes one p-adic root `z_p` of `h` per prime (via [`RootCert`]).
//! `lambda` is completely multiplicative with `lambda(p) = p^m`, `m` the
//! multiplicity of `z_p`, and `r_d` is the CRT merge of the `z_p` modulo the
//! prime powers of `d`, taken in `(-d, 0]`.

use crate::arith;
use crate::error::{Error, Result};
use crate::padic::{self, RootCert};
use crate::poly::IntPolynomial;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::RwLock;

#[derive(Debug, Clone)]
enum RootSource {
    /// `choose_root` at the given depth, computed on first use.
    Chosen(u32),
    /// A fixed integer root, used at every prime.
    Integer(BigInt),
    /// Only the supplied certificates.
    Fixed,
}

#[derive(Default)]
struct Memo {
    factors: HashMap<u64, Vec<(u64, u32)>>,
    residues: HashMap<(u64, u32), BigInt>,
    r: HashMap<u64, BigInt>,
    lambda: HashMap<u64, BigInt>,
}

pub struct AuxiliaryFamily {
    base: IntPolynomial,
    source: RootSource,
    certs: RwLock<BTreeMap<u64, RootCert>>,
    memo: RwLock<Memo>,
}

impl std::fmt::Debug for AuxiliaryFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AuxiliaryFamily").field("base", &self.base).field("source", &self.source).finish()
    }
}

impl AuxiliaryFamily {
    fn check_base(base: &IntPolynomial) -> Result<()> {
        if base.deg() < 1 || !base.leading().is_positive() {
            return Err(Error::domain("family base needs degree >= 1 and positive leading coefficient"));
        }
        Ok(())
    }

    fn build(base: IntPolynomial, source: RootSource, certs: BTreeMap<u64, RootCert>) -> Self {
        AuxiliaryFamily { base, source, certs: RwLock::new(certs), memo: RwLock::new(Memo::default()) }
    }

    /// Roots chosen by [`padic::choose_root`] at `depth`, on demand.
    pub fn new(base: IntPolynomial, depth: u32) -> Result<Self> {
        Self::check_base(&base)?;
        Ok(Self::build(base, RootSource::Chosen(depth), BTreeMap::new()))
    }

    /// Use the integer root `z` at every prime.
    pub fn with_integer_root(base: IntPolynomial, z: BigInt) -> Result<Self> {
        Self::check_base(&base)?;
        if !base.evaluate(&z).is_zero() {
            return Err(Error::domain(format!("{z} is not a root")));
        }
        Ok(Self::build(base, RootSource::Integer(z), BTreeMap::new()))
    }

    /// Only the given certificates; other primes are a configuration error.
    pub fn with_certs(base: IntPolynomial, certs: BTreeMap<u64, RootCert>) -> Result<Self> {
        Self::check_base(&base)?;
        for c in certs.values() {
            if !c.verify(&base) {
                return Err(Error::domain(format!("certificate at {} does not verify", c.p)));
            }
        }
        Ok(Self::build(base, RootSource::Fixed, certs))
    }

    pub fn base(&self) -> &IntPolynomial {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.base.deg()
    }

    pub fn cert(&self, p: u64) -> Result<RootCert> {
        if let Some(c) = self.certs.read().unwrap().get(&p) {
            return Ok(c.clone());
        }
        let c = match &self.source {
            RootSource::Chosen(depth) => padic::choose_root(&self.base, p, *depth)?,
            RootSource::Integer(z) => padic::integer_root_cert(&self.base, z, p).ok_or(Error::MissingCertificate(p))?,
            RootSource::Fixed => return Err(Error::MissingCertificate(p)),
        };
        self.certs.write().unwrap().insert(p, c.clone());
        Ok(c)
    }

    pub fn certs(&self) -> BTreeMap<u64, RootCert> {
        self.certs.read().unwrap().clone()
    }

    fn factor(&self, d: u64) -> Vec<(u64, u32)> {
        if let Some(f) = self.memo.read().unwrap().factors.get(&d) {
            return f.clone();
        }
        let f = arith::factorize(d);
        self.memo.write().unwrap().factors.insert(d, f.clone());
        f
    }

    /// `z_p mod p^e`.
    fn residue(&self, p: u64, e: u32) -> Result<BigInt> {
        if let Some(r) = self.memo.read().unwrap().residues.get(&(p, e)) {
            return Ok(r.clone());
        }
        let r = self.cert(p)?.root_mod(e)?;
        self.memo.write().unwrap().residues.insert((p, e), r.clone());
        Ok(r)
    }

    pub fn multiplicity(&self, p: u64) -> Result<u32> {
        Ok(self.cert(p)?.multiplicity)
    }

    pub fn lambda(&self, d: u64) -> Result<BigInt> {
        if d == 0 {
            return Err(Error::domain("d must be positive"));
        }
        if let Some(l) = self.memo.read().unwrap().lambda.get(&d) {
            return Ok(l.clone());
        }
        let mut l = BigInt::one();
        for (p, e) in self.factor(d) {
            l *= BigInt::from(p).pow(self.multiplicity(p)? * e);
        }
        self.memo.write().unwrap().lambda.insert(d, l.clone());
        Ok(l)
    }

    /// `r_d` in `(-d, 0]` with `r_d = z_p mod p^e` for every `p^e || d`.
    pub fn r_of(&self, d: u64) -> Result<BigInt> {
        if d == 0 {
            return Err(Error::domain("d must be positive"));
        }
        if let Some(r) = self.memo.read().unwrap().r.get(&d) {
            return Ok(r.clone());
        }
        let mut acc = BigInt::zero();
        let mut modulus = BigInt::one();
        for (p, e) in self.factor(d) {
            let pe = BigInt::from(p).pow(e);
            let z = self.residue(p, e)?;
            // acc + modulus * t = z mod pe
            let inv = arith::inv_mod(arith::big_mod(&modulus, p.pow(e)), p.pow(e)).unwrap();
            let t = ((&z - &acc).mod_floor(&pe) * BigInt::from(inv)).mod_floor(&pe);
            acc += &modulus * t;
            modulus *= pe;
        }
        let r = if acc.is_zero() { acc } else { acc - BigInt::from(d) };
        self.memo.write().unwrap().r.insert(d, r.clone());
        Ok(r)
    }

    /// `h_d`, with the leading coefficient identity and the coefficient
    /// bound `|c| <= 2^k d^k max|a_i| / lambda(d)` checked.
    pub fn aux_poly(&self, d: u64) -> Result<IntPolynomial> {
        let r = self.r_of(d)?;
        let lam = self.lambda(d)?;
        let db = BigInt::from(d);
        let hd = self.base.shift_scale(&r, &db, &lam)?;
        let k = self.k() as u32;
        let dk = db.pow(k);
        if hd.leading() * &lam != &dk * self.base.leading() {
            return Err(Error::domain(format!("leading coefficient identity fails at d={d}")));
        }
        let cap = BigInt::from(2).pow(k) * &dk * self.base.max_abs_coeff();
        if hd.coeffs().iter().any(|c| c.abs() * &lam > cap) {
            return Err(Error::domain(format!("coefficient bound fails at d={d}")));
        }
        Ok(hd)
    }

    /// Audit `cont(h_d) <= |Delta(h)|^((k-1)/2) cont(h)` for `d <= d_max`,
    /// compared exactly after squaring.
    pub fn content_bound_audit(&self, d_max: u64) -> Result<ContentAudit> {
        let k = self.k();
        if k < 2 {
            return Err(Error::domain("content audit needs degree >= 2"));
        }
        let delta = self.base.discriminant_abs()?;
        let cont = self.base.content()?;
        let rhs_sq = delta.pow((k - 1) as u32) * &cont * &cont;
        let log_bound = big_ln(&delta) * (k - 1) as f64 / 2.0 + big_ln(&cont);
        let mut max_content = BigInt::zero();
        let mut worst_d = 1;
        for d in 1..=d_max {
            let hd = self.aux_poly(d)?;
            let c = hd.content()?;
            if &c * &c > rhs_sq {
                return Err(Error::ContentBoundViolation { d, content: c.to_string(), bound_sq: rhs_sq.to_string() });
            }
            if c > max_content {
                max_content = c;
                worst_d = d;
            }
        }
        Ok(ContentAudit {
            d_max,
            delta_abs: delta,
            base_content: cont,
            bound: log_bound.exp(),
            max_content: max_content.clone(),
            worst_d,
            max_ratio: (big_ln(&max_content) - log_bound).exp(),
        })
    }
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Serialize)]
pub struct ContentAudit {
    pub d_max: u64,
    #[serde(serialize_with = "crate::bigjson::big")]
    pub delta_abs: BigInt,
    #[serde(serialize_with = "crate::bigjson::big")]
    pub base_content: BigInt,
    /// `|Delta|^((k-1)/2) cont(h)`, as a float.
    pub bound: f64,
    #[serde(serialize_with = "crate::bigjson::big")]
    pub max_content: BigInt,
    pub worst_d: u64,
    /// `max_d cont(h_d) / bound`.
    pub max_ratio: f64,
}

/// `I(p) ∩ [1, bound]`: positive values of `p` on `n >= 1` (absolute values
/// of the negative ones when the leading coefficient is negative), sorted.
pub fn image_elements(p: &IntPolynomial, bound: u64) -> Result<Vec<u64>> {
    Ok(image_with_preimages(p, bound)?.into_iter().map(|(v, _)| v).collect())
}

/// `(value, smallest n)` pairs for [`image_elements`].
pub fn image_with_preimages(p: &IntPolynomial, bound: u64) -> Result<Vec<(u64, u64)>> {
    if p.deg() < 1 {
        return Err(Error::domain("image_elements needs a non-constant polynomial"));
    }
    let g = if p.leading().is_negative() { -p } else { p.clone() };
    let k = g.deg() as u32;
    let ak = g.leading();
    let lower: BigInt = g.coeffs()[..k as usize].iter().map(|c| c.abs()).sum();
    // beyond m + ceil(R) + 1 every value exceeds the bound
    let m: BigInt = num_integer::Roots::nth_root(&(BigInt::from(bound) / &ak), k);
    let r: BigInt = Integer::div_ceil(&lower, &ak);
    let cutoff = (m + r + 2u32)
        .to_u64()
        .ok_or_else(|| Error::Resource("image cutoff too large".into()))?;
    let mut seen: BTreeMap<u64, u64> = BTreeMap::new();
    for n in 1..=cutoff {
        let v = match g.eval_i128(n as i128) {
            Some(v) => v,
            None => match g.eval_i64(n as i64).to_i128() {
                Some(v) => v,
                None => continue,
            },
        };
        if v >= 1 && v <= bound as i128 {
            seen.entry(v as u64).or_insert(n);
        }
    }
    Ok(seen.into_iter().collect())
}

/// Outcome of one truncated inheritance check.
#[derive(Debug, Clone, Serialize)]
pub struct InheritanceOutcome {
    /// `Lambda(q)`, the composition of the family lambdas at `q`.
    #[serde(serialize_with = "crate::bigjson::big")]
    pub lambda_q: BigInt,
    /// `A' = {a >= 1 : x + Lambda(q) a in A}`.
    pub a_prime: Vec<u64>,
    /// A pair of `A'` whose difference lies in the inherited forbidden set.
    pub premise: Option<(u64, u64)>,
    /// The predicted pair of `A`, `x + Lambda(q) a`, and whether its
    /// difference lies in the original forbidden set.
    pub conclusion: Option<(i128, i128)>,
    pub holds: bool,
}

/// Single-polynomial inheritance: if `A'` has a difference in
/// `I(h_{qd}) ∩ [1, bound]` then `A` has one in `I(h_d) ∩ [1, lambda(q) bound]`.
pub fn inheritance_check(a: &[u64], x: i64, q: u64, fam: &AuxiliaryFamily, d: u64, bound: u64) -> Result<InheritanceOutcome> {
    inheritance_check_multi(a, x, q, &[(fam, d)], bound)
}

/// Several families: `Lambda = lambda_1 ∘ ... ∘ lambda_l`, and family `i` is
/// inherited at `lambda~_i(q) d_i` where `lambda~_i` omits `lambda_i`.
pub fn inheritance_check_multi(
    a: &[u64],
    x: i64,
    q: u64,
    members: &[(&AuxiliaryFamily, u64)],
    bound: u64,
) -> Result<InheritanceOutcome> {
    if members.is_empty() {
        return Err(Error::domain("no families"));
    }
    let compose = |skip: Option<usize>| -> Result<u64> {
        let mut v = q;
        for (i, (fam, _)) in members.iter().enumerate().rev() {
            if Some(i) == skip {
                continue;
            }
            v = fam.lambda(v)?.to_u64().ok_or_else(|| Error::Resource("lambda(q) overflow".into()))?;
        }
        Ok(v)
    };
    let lam = compose(None)?;
    let set: BTreeSet<i128> = a.iter().map(|&v| v as i128).collect();
    let a_prime: Vec<u64> = {
        let mut v: Vec<u64> = set
            .iter()
            .filter_map(|&y| {
                let t = y - x as i128;
                (t > 0 && t % lam as i128 == 0).then(|| (t / lam as i128) as u64)
            })
            .collect();
        v.sort_unstable();
        v
    };
    let mut inherited = Vec::new();
    for (i, (fam, d)) in members.iter().enumerate() {
        let scale = compose(Some(i))?;
        inherited.push(image_elements(&fam.aux_poly(scale * d)?, bound)?);
    }
    let forbidden_prime = sumset(&inherited, bound);
    let ap: BTreeSet<u64> = a_prime.iter().copied().collect();
    let premise = a_prime
        .iter()
        .flat_map(|&lo| forbidden_prime.iter().map(move |&f| (lo + f, lo)))
        .find(|(hi, _)| ap.contains(hi));
    let Some((hi, lo)) = premise else {
        return Ok(InheritanceOutcome { lambda_q: BigInt::from(lam), a_prime, premise: None, conclusion: None, holds: true });
    };
    let big_bound = lam.checked_mul(bound).ok_or_else(|| Error::Resource("Lambda(q) bound overflow".into()))?;
    let mut original = Vec::new();
    for (fam, d) in members {
        original.push(image_elements(&fam.aux_poly(*d)?, big_bound)?);
    }
    let forbidden = sumset(&original, big_bound);
    let (ahi, alo) = (x as i128 + (lam as i128) * hi as i128, x as i128 + (lam as i128) * lo as i128);
    let diff = (ahi - alo) as u64;
    let holds = set.contains(&ahi) && set.contains(&alo) && forbidden.binary_search(&diff).is_ok();
    Ok(InheritanceOutcome {
        lambda_q: BigInt::from(lam),
        a_prime,
        premise: Some((hi, lo)),
        conclusion: Some((ahi, alo)),
        holds,
    })
}

/// Sorted sumset of the given sorted lists, truncated at `bound`.
pub fn sumset(lists: &[Vec<u64>], bound: u64) -> Vec<u64> {
    let mut acc: BTreeSet<u64> = lists[0].iter().copied().filter(|&v| v <= bound).collect();
    for l in &lists[1..] {
        let mut next = BTreeSet::new();
        for &s in &acc {
            for &t in l {
                if s + t > bound {
                    break;
                }
                next.insert(s + t);
            }
        }
        acc = next;
    }
    acc.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }
    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn lambda_and_r_examples() {
        let sq = AuxiliaryFamily::new(p("x^2"), 8).unwrap();
        assert_eq!(sq.lambda(12).unwrap(), b(144));
        assert_eq!(sq.lambda(1).unwrap(), b(1));
        assert_eq!(sq.r_of(7).unwrap(), b(0));
        assert_eq!(sq.aux_poly(3).unwrap(), p("x^2"));
        let two = AuxiliaryFamily::with_integer_root(p("(x-1)(x-2)"), b(1)).unwrap();
        assert_eq!(two.lambda(30).unwrap(), b(30));
        assert_eq!(two.r_of(6).unwrap(), b(-5));
        assert_eq!(two.aux_poly(2).unwrap(), p("2x^2-5x+3"));
    }

    #[test]
    fn quintic_family() {
        let h = p("(x^3-19)*(x^2+x+1)");
        let fam = AuxiliaryFamily::new(h.clone(), 8).unwrap();
        let r9 = fam.r_of(9).unwrap();
        assert!(r9 <= b(0) && r9 > b(-9));
        let res = r9.mod_floor(&b(9)).to_u64().unwrap();
        assert!(padic::roots_mod(&h, 9).contains(&res));
        let h5 = fam.aux_poly(5).unwrap();
        assert_eq!(h5.leading() * fam.lambda(5).unwrap(), b(5i64.pow(5)));
        assert_eq!(fam.lambda(5).unwrap(), b(5));
    }

    #[test]
    fn image_examples() {
        assert_eq!(image_elements(&p("x^2"), 20).unwrap(), vec![1, 4, 9, 16]);
        assert_eq!(image_elements(&p("-x^2"), 20).unwrap(), vec![1, 4, 9, 16]);
        assert_eq!(image_elements(&p("2x^2-5x+3"), 30).unwrap(), vec![1, 6, 15, 28]);
        assert!(image_elements(&p("3"), 5).is_err());
    }

    #[test]
    fn content_audits() {
        let sq = AuxiliaryFamily::new(p("x^2"), 8).unwrap();
        let r = sq.content_bound_audit(100).unwrap();
        assert_eq!(r.max_content, b(1));
        assert_eq!(r.bound, 1.0);
        let two = AuxiliaryFamily::new(p("(x-1)(x-2)"), 8).unwrap();
        let r = two.content_bound_audit(100).unwrap();
        assert_eq!((r.delta_abs.clone(), r.max_content.clone()), (b(1), b(1)));
    }

    #[test]
    fn inheritance_examples() {
        let sq = AuxiliaryFamily::new(p("x^2"), 8).unwrap();
        let out = inheritance_check(&[1, 2], 0, 1, &sq, 1, 10).unwrap();
        assert!(out.holds && out.premise.is_some());

        // planted: A' = {1, 1 + h_{qd}(n)} lifted through x + lambda(q) a
        let fam = AuxiliaryFamily::with_integer_root(p("(x-1)(x-2)"), b(1)).unwrap();
        let (q, d, n, x) = (3u64, 2u64, 4i64, 5i64);
        let v = fam.aux_poly(q * d).unwrap().eval_i64(n).to_u64().unwrap();
        let lam = fam.lambda(q).unwrap().to_i64().unwrap();
        let a: Vec<u64> = [1, 1 + v as i64].iter().map(|&t| (x + lam * t) as u64).collect();
        let out = inheritance_check(&a, x, q, &fam, d, v).unwrap();
        assert!(out.holds);
        let (hi, lo) = out.conclusion.unwrap();
        assert_eq!((hi - lo) as u64, lam as u64 * v);
        // the identity behind it: h_d(s + q n) = lambda(q) h_{qd}(n)
        let s = (fam.r_of(q * d).unwrap() - fam.r_of(d).unwrap()) / b(d as i64);
        assert_eq!(fam.aux_poly(d).unwrap().evaluate(&(s + b(q as i64 * n))), b(lam * v as i64));
    }
}
