//! Exact integer polynomials.
//!
//! `IntPolynomial` stores `a_0..a_k` with the leading coefficient nonzero; the
//! zero polynomial has no coefficients and no degree. All arithmetic is exact.

mod parse;
mod qpoly;

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use qpoly::QPoly;
use serde::Serialize;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

/// JSON form: `{"coeffs":[...],"degree":k}`; degree is `null` for zero.
#[derive(Serialize)]
pub struct PolyJson {
    #[serde(serialize_with = "crate::bigjson::big_vec")]
    pub coeffs: Vec<BigInt>,
    pub degree: Option<usize>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    /// `c x^k`
    pub fn monomial(c: i64, k: usize) -> Self {
        let mut v = vec![BigInt::zero(); k + 1];
        v[k] = BigInt::from(c);
        Self::new(v)
    }

    pub fn parse(s: &str) -> Result<Self> {
        parse::parse(s)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree, with the zero polynomial and constants reported as 0.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson { coeffs: self.coeffs.clone(), degree: self.degree() }
    }

    pub fn evaluate(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.evaluate(&BigInt::from(x))
    }

    /// Horner in `i128`, `None` on overflow.
    pub fn eval_i128(&self, x: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c.to_i128()?)?;
        }
        Some(acc)
    }

    /// Coefficients reduced into `[0, m)`.
    pub fn reduce_mod(&self, m: u64) -> ModPoly {
        ModPoly {
            m,
            c: self.coeffs.iter().map(|c| crate::arith::big_mod(c, m)).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.derivative();
        }
        p
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut r = Self::from_i64(&[1]);
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    /// gcd of the non-constant coefficients, `cont(h) = gcd(a_1..a_k)`.
    pub fn content(&self) -> Result<BigInt> {
        if self.deg() < 1 {
            return Err(Error::domain("content needs degree >= 1"));
        }
        Ok(self.coeffs[1..].iter().fold(BigInt::zero(), |g, c| g.gcd(c)))
    }

    /// gcd of all coefficients.
    pub fn full_content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide by the full content and make the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.full_content();
        if self.leading().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    /// `p(r + d x)`.
    pub fn compose_linear(&self, r: &BigInt, d: &BigInt) -> Self {
        let lin = IntPolynomial::new(vec![r.clone(), d.clone()]);
        let mut acc = IntPolynomial::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &IntPolynomial::new(vec![c.clone()]);
        }
        acc
    }

    /// `p(r + d x) / lam`, failing if some coefficient is not divisible.
    pub fn shift_scale(&self, r: &BigInt, d: &BigInt, lam: &BigInt) -> Result<Self> {
        if !d.is_positive() || !lam.is_positive() {
            return Err(Error::domain("shift_scale needs d, lam > 0"));
        }
        let comp = self.compose_linear(r, d);
        let mut out = Vec::with_capacity(comp.coeffs.len());
        for (i, c) in comp.coeffs.iter().enumerate() {
            let (q, rem) = c.div_rem(lam);
            if !rem.is_zero() {
                return Err(Error::Integrality {
                    index: i,
                    coefficient: c.to_string(),
                    lam: lam.to_string(),
                });
            }
            out.push(q);
        }
        Ok(Self::new(out))
    }

    /// Square-free decomposition `p = c * prod P_i^i` with each `P_i` a
    /// primitive integer polynomial with positive leading coefficient.
    /// Returns the list of `(P_i, i)`; constant factors are dropped.
    pub fn squarefree_decomposition(&self) -> Vec<(IntPolynomial, usize)> {
        if self.deg() == 0 {
            return Vec::new();
        }
        QPoly::squarefree_decomposition(&QPoly::from_ints(&self.coeffs))
            .into_iter()
            .map(|(q, i)| (rational_to_primitive(&q), i))
            .collect()
    }

    /// Product of the distinct irreducible-over-Q parts, primitive.
    pub fn radical(&self) -> IntPolynomial {
        self.squarefree_decomposition()
            .iter()
            .fold(IntPolynomial::from_i64(&[1]), |acc, (f, _)| &acc * f)
    }

    /// Classical discriminant `(-1)^(k(k-1)/2) Res(p, p') / a_k`.
    pub fn classical_discriminant(&self) -> Result<BigInt> {
        let k = self.deg();
        if k < 1 {
            return Err(Error::domain("discriminant needs degree >= 1"));
        }
        let f = QPoly::from_ints(&self.coeffs);
        let mut r = QPoly::resultant(&f, &f.derivative()) / BigRational::from_integer(self.leading());
        if (k * (k - 1) / 2) % 2 == 1 {
            r = -r;
        }
        Ok(r.to_integer())
    }

    /// `|Delta(p)| = |a|^(2k-2) prod_{i != i'} |alpha_i - alpha_i'|^(e_i e_i')`
    /// over the distinct complex roots `alpha_i` with multiplicities `e_i`.
    ///
    /// With `p = a prod P_j^j` (monic square-free `P_j`), the product splits as
    /// `prod_j |disc P_j|^(j^2) * prod_{j<l} |Res(P_j, P_l)|^(2jl)`.
    pub fn discriminant_abs(&self) -> Result<BigInt> {
        let k = self.deg();
        if k < 2 {
            return Err(Error::domain("discriminant_abs needs degree >= 2"));
        }
        let parts = QPoly::squarefree_decomposition(&QPoly::from_ints(&self.coeffs));
        let a = BigRational::from_integer(self.leading().abs());
        let mut acc = qpoly::pow(&a, 2 * k - 2);
        for (idx, (pj, j)) in parts.iter().enumerate() {
            let disc = qpoly::abs(QPoly::resultant(pj, &pj.derivative()));
            acc *= qpoly::pow(&disc, j * j);
            for (pl, l) in parts.iter().skip(idx + 1) {
                let res = qpoly::abs(QPoly::resultant(pj, pl));
                acc *= qpoly::pow(&res, 2 * j * l);
            }
        }
        if !acc.is_integer() {
            return Err(Error::domain(format!("non-integral discriminant {acc}")));
        }
        Ok(acc.to_integer())
    }

    /// Rational roots (each once), found by the rational root test on the
    /// radical. Skipped (empty) when the end coefficients exceed `limit`.
    pub fn rational_roots(&self, limit: u64) -> Vec<BigRational> {
        let mut out = Vec::new();
        if self.deg() == 0 {
            return out;
        }
        let rad = self.radical();
        let lead = rad.leading().abs();
        let tail_index = rad.coeffs.iter().position(|c| !c.is_zero()).unwrap();
        if tail_index > 0 {
            out.push(BigRational::zero());
        }
        let tail = rad.coeffs[tail_index].abs();
        let (Some(l), Some(t)) = (lead.to_u64(), tail.to_u64()) else {
            return out;
        };
        if l > limit || t > limit {
            return out;
        }
        let dl = divisors(l);
        let dt = divisors(t);
        for &v in &dl {
            for &u in &dt {
                if crate::arith::gcd(u, v) != 1 {
                    continue;
                }
                for s in [1i64, -1] {
                    let num = BigInt::from(u) * s;
                    // rad(u/v) = 0  <=>  sum c_i u^i v^(k-i) = 0
                    let k = rad.deg();
                    let mut acc = BigInt::zero();
                    for (i, c) in rad.coeffs.iter().enumerate() {
                        acc += c * num.pow(i as u32) * BigInt::from(v).pow((k - i) as u32);
                    }
                    if acc.is_zero() {
                        out.push(BigRational::new(num, BigInt::from(v)));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Integer roots, each once.
    pub fn integer_roots(&self, limit: u64) -> Vec<BigInt> {
        self.rational_roots(limit)
            .into_iter()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
            .collect()
    }

    /// Multiplicity of the integer `z` as a root (0 if not a root).
    pub fn root_multiplicity(&self, z: &BigInt) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut m = 0;
        let mut p = self.clone();
        while !p.is_zero() && p.evaluate(z).is_zero() {
            m += 1;
            p = p.derivative();
        }
        m
    }

    /// Exact check of the preimage proposition at `x`:
    /// `count = |{n >= 1 : 0 < p(n) < x} symdiff [1, floor((x/a_k)^(1/k))]|`
    /// and `bound = 3 floor(R) + 2` with `R = (|a_0| + ... + |a_{k-1}|)/a_k`.
    pub fn preimage_symdiff(&self, x: &BigRational) -> Result<PreimageReport> {
        let k = self.deg();
        let ak = self.leading();
        if self.is_zero() || k == 0 || !ak.is_positive() {
            return Err(Error::domain("preimage_symdiff needs a non-constant polynomial with positive leading coefficient"));
        }
        if !x.is_positive() {
            return Err(Error::domain("x must be positive"));
        }
        let lower: BigInt = self.coeffs[..k].iter().map(|c| c.abs()).sum();
        let r_floor: BigInt = lower.div_floor(&ak);
        let r_ceil: BigInt = lower.div_ceil(&ak);
        let bound: BigInt = &r_floor * 3 + 2;
        // m = max{m >= 0 : a_k m^k <= x}
        let t: BigInt = (x / BigRational::from_integer(ak.clone())).floor().to_integer();
        let m: BigInt = Roots::nth_root(&t, k as u32);
        // past m + ceil(R) + 1 every value exceeds x: p(n) >= a_k n^(k-1)(n - R)
        let cutoff: BigInt = &m + &r_ceil + 2;
        let cutoff_u = cutoff
            .to_u64()
            .ok_or_else(|| Error::Resource("preimage cutoff too large".into()))?;
        let m_u = m.to_u64().unwrap();
        let mut count = 0u64;
        let fast = x.numer().to_i128().zip(x.denom().to_i128());
        for n in 1..=cutoff_u {
            let in_pre = match (fast, self.eval_i128(n as i128)) {
                (Some((num, den)), Some(v)) => match v.checked_mul(den) {
                    Some(vd) => v > 0 && vd < num,
                    None => self.in_preimage_big(n, x),
                },
                _ => self.in_preimage_big(n, x),
            };
            if in_pre != (n <= m_u) {
                count += 1;
            }
        }
        Ok(PreimageReport { count, bound: bound.to_u64().unwrap_or(u64::MAX), interval_end: m_u, cutoff: cutoff_u })
    }

    fn in_preimage_big(&self, n: u64, x: &BigRational) -> bool {
        let v = self.evaluate(&BigInt::from(n));
        v.is_positive() && BigRational::from_integer(v) < *x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PreimageReport {
    pub count: u64,
    pub bound: u64,
    /// `floor((x/a_k)^(1/k))`
    pub interval_end: u64,
    /// Last `n` enumerated.
    pub cutoff: u64,
}

/// Coefficients reduced modulo `m`, for fast residue evaluation.
#[derive(Clone, Debug)]
pub struct ModPoly {
    pub m: u64,
    pub c: Vec<u64>,
}

impl ModPoly {
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let m = self.m as u128;
        let x = x as u128 % m;
        let mut acc: u128 = 0;
        for &c in self.c.iter().rev() {
            acc = (acc * x + c as u128) % m;
        }
        acc as u64
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&c| c == 0)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in crate::arith::factorize(n) {
        let cur = out.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            out.extend(cur.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

fn rational_to_primitive(q: &QPoly) -> IntPolynomial {
    let den = q.c.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = q.c.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    IntPolynomial::new(ints).primitive_part()
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, o: &IntPolynomial) -> IntPolynomial {
        let n = self.coeffs.len().max(o.coeffs.len());
        IntPolynomial::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, o: &IntPolynomial) -> IntPolynomial {
        if self.is_zero() || o.is_zero() {
            return IntPolynomial::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPolynomial::new(out)
    }
}

impl FromStr for IntPolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse::parse(s)
    }
}

impl fmt::Display for IntPolynomial {
    /// Human form accepted back by the parser, highest power first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let unit = a.is_one();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !unit {
                        write!(f, "{a}*")?;
                    }
                    if i == 1 {
                        write!(f, "x")?;
                    } else {
                        write!(f, "x^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
