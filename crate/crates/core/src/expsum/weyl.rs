use super::{complete_sum, e, pairwise_sum, ExpSumResult, RationalPoint, Restriction, SumMethod};
use crate::error::{Error, Result};
use crate::poly::{IntPolynomial, ModPoly};
use crate::sieve::SieveProfile;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::TAU;

/// Largest `X` a Weyl sum accepts.
pub const WEYL_X_LIMIT: u64 = 100_000_000;
pub const DEFAULT_BLOCK: u64 = 1 << 14;

/// The frequency of a Weyl sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// `a/q`, phases reduced exactly mod `q`.
    Rational { a: i64, q: u64 },
    /// A double, taken as the exact dyadic rational it represents.
    Real(f64),
    /// `a/q + beta`.
    Shifted { a: i64, q: u64, beta: f64 },
}

/// Exact `frac(v x)` for integer `v` and a double `x`, up to the final
/// rounding to a double.
#[derive(Debug, Clone)]
struct DyadicPhase {
    m: i64,
    /// `x = m / 2^s`; zero when `x` is an integer.
    s: u32,
    mp: Option<ModPoly>,
}

impl DyadicPhase {
    fn new(g: &IntPolynomial, x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain("frequency must be finite"));
        }
        let (m, e) = crate::arith::dyadic_parts(x);
        let s = if e >= 0 || m == 0 { 0 } else { (-e) as u32 };
        let mp = (s > 0 && s <= 63).then(|| g.reduce_mod(1u64 << s));
        Ok(DyadicPhase { m, s, mp })
    }

    fn of_residue(&self, r: u128) -> f64 {
        let modulus = 1u128 << self.s;
        let mut t = r * self.m.unsigned_abs() as u128 % modulus;
        if self.m < 0 {
            t = (modulus - t) % modulus;
        }
        t as f64 / modulus as f64
    }

    fn of_big(&self, v: &BigInt) -> f64 {
        if self.s == 0 {
            return 0.0;
        }
        if self.s <= 63 {
            return self.of_residue(v.mod_floor(&BigInt::from(1u64 << self.s)).to_u128().unwrap());
        }
        let modulus = BigInt::from(1) << self.s;
        let t = (v * self.m).mod_floor(&modulus);
        let shift = self.s - 64;
        (t >> shift).to_f64().unwrap() / 2f64.powi(64)
    }

    fn at(&self, g: &IntPolynomial, n: u64) -> f64 {
        match &self.mp {
            _ if self.s == 0 => 0.0,
            Some(mp) => self.of_residue(mp.eval(n) as u128),
            None => self.of_big(&g.eval_i64(n as i64)),
        }
    }
}

struct PhaseFn<'a> {
    g: &'a IntPolynomial,
    rational: Option<(ModPoly, u64)>,
    dyadic: Option<DyadicPhase>,
}

impl<'a> PhaseFn<'a> {
    fn new(g: &'a IntPolynomial, alpha: Alpha) -> Result<Self> {
        let rational = |a: i64, q: u64| -> Result<(ModPoly, u64)> {
            if q == 0 {
                return Err(Error::domain("q must be positive"));
            }
            Ok((g.reduce_mod(q), a.rem_euclid(q as i64) as u64))
        };
        Ok(match alpha {
            Alpha::Rational { a, q } => PhaseFn { g, rational: Some(rational(a, q)?), dyadic: None },
            Alpha::Real(x) => PhaseFn { g, rational: None, dyadic: Some(DyadicPhase::new(g, x)?) },
            Alpha::Shifted { a, q, beta } => {
                PhaseFn { g, rational: Some(rational(a, q)?), dyadic: Some(DyadicPhase::new(g, beta)?) }
            }
        })
    }

    fn at(&self, n: u64) -> f64 {
        let mut ph = 0.0;
        if let Some((mp, a)) = &self.rational {
            let q = mp.m as u128;
            ph += (mp.eval(n) as u128 * *a as u128 % q) as f64 / q as f64;
        }
        if let Some(d) = &self.dyadic {
            ph += d.at(self.g, n);
        }
        ph - ph.floor()
    }
}

fn weight_at(gp: &IntPolynomial, n: u64) -> f64 {
    match gp.eval_i128(n as i128) {
        Some(v) => v as f64,
        None => gp.eval_i64(n as i64).to_f64().unwrap_or(f64::INFINITY),
    }
}

/// `sum_{n <= X} w(n) e(g(n) alpha)` over `n` in `W(Y)` when a profile is
/// given, with `w = g'` when weighted and `1` otherwise.
pub fn weyl_sum(g: &IntPolynomial, alpha: Alpha, x: u64, sieve: Option<&SieveProfile>, weighted: bool) -> Result<ExpSumResult> {
    weyl_sum_with_block(g, alpha, x, sieve, weighted, DEFAULT_BLOCK)
}

/// As [`weyl_sum`] with an explicit block size. Blocks are summed pairwise
/// and merged in index order, so the result does not depend on the thread
/// count.
pub fn weyl_sum_with_block(
    g: &IntPolynomial,
    alpha: Alpha,
    x: u64,
    sieve: Option<&SieveProfile>,
    weighted: bool,
    block: u64,
) -> Result<ExpSumResult> {
    if x > WEYL_X_LIMIT {
        return Err(Error::Resource(format!("X = {x} above {WEYL_X_LIMIT}")));
    }
    if block == 0 {
        return Err(Error::domain("block size must be positive"));
    }
    let phase = PhaseFn::new(g, alpha)?;
    let gp = g.derivative();
    let blocks = x.div_ceil(block);
    let parts: Vec<(Complex64, u64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * block + 1;
            let hi = (lo + block - 1).min(x);
            let keep = sieve.map(|s| s.sieve_block(lo, hi));
            let mut terms = Vec::with_capacity((hi - lo + 1) as usize);
            let mut wmax = 0f64;
            for n in lo..=hi {
                if keep.as_ref().is_some_and(|k| !k[(n - lo) as usize]) {
                    continue;
                }
                let w = if weighted { weight_at(&gp, n) } else { 1.0 };
                wmax = wmax.max(w.abs());
                terms.push(e(phase.at(n)) * w);
            }
            (pairwise_sum(&terms), terms.len() as u64, wmax)
        })
        .collect();
    let sums: Vec<Complex64> = parts.iter().map(|p| p.0).collect();
    let n_terms = parts.iter().map(|p| p.1).sum();
    let wmax = parts.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(ExpSumResult::checked(pairwise_sum(&sums), n_terms, SumMethod::Direct, wmax.max(1.0)))
}

/// Rational-frequency Weyl sum by residue classes: the exact integer weight
/// of each class `g(n) a mod q`, times its root of unity.
pub fn weyl_sum_by_classes(
    g: &IntPolynomial,
    a: i64,
    q: u64,
    x: u64,
    sieve: Option<&SieveProfile>,
    weighted: bool,
) -> Result<ExpSumResult> {
    if x > WEYL_X_LIMIT || q > super::COMPLETE_Q_LIMIT {
        return Err(Error::Resource("weyl_sum_by_classes size limit".into()));
    }
    let pt = RationalPoint::new(a, q)?;
    let mp = g.reduce_mod(q);
    let gp = g.derivative();
    let mut class_weight = vec![0i128; q as usize];
    let mut n_terms = 0u64;
    let mut wmax = 1f64;
    for n in 1..=x {
        if sieve.is_some_and(|s| !s.w_member(n)) {
            continue;
        }
        let c = (mp.eval(n) as u128 * pt.a as u128 % q as u128) as usize;
        let w = if weighted { gp.eval_i128(n as i128).ok_or_else(|| Error::Resource("weight overflow".into()))? } else { 1 };
        wmax = wmax.max(w.abs() as f64);
        class_weight[c] += w;
        n_terms += 1;
    }
    let terms: Vec<Complex64> = class_weight
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0)
        .map(|(c, &w)| e(c as f64 / q as f64) * w as f64)
        .collect();
    Ok(ExpSumResult::checked(pairwise_sum(&terms), n_terms, SumMethod::Wheel, wmax))
}

#[derive(Debug, Clone, Serialize)]
pub struct MajorArc {
    #[serde(serialize_with = "crate::bigjson::complex")]
    pub main: Complex64,
    #[serde(serialize_with = "crate::bigjson::complex")]
    pub actual: Complex64,
    pub abs_err: f64,
    pub rel_err: f64,
    #[serde(serialize_with = "crate::bigjson::complex")]
    pub prefactor: Complex64,
    #[serde(serialize_with = "crate::bigjson::complex")]
    pub integral: Complex64,
    /// `min(|g(X) - g(0)|, 1/|beta|)`.
    pub vdc_bound: f64,
    pub vdc_ok: bool,
    /// `X >= q Y^2`.
    pub regime_ok: bool,
}

/// Main term `(1/q) prod_{p^gamma not | q} (1 - j/p^gamma) S_q(a) * I(beta)`
/// against the sieved weighted Weyl sum at `a/q + beta`, where
/// `I(beta) = int_0^X g'(x) e(g(x) beta) dx` in closed form.
pub fn major_arc_asymptotic(g: &IntPolynomial, pt: RationalPoint, beta: f64, x: u64, profile: &SieveProfile) -> Result<MajorArc> {
    let q = pt.q;
    let local: f64 = profile
        .table
        .values()
        .filter(|e| q % e.modulus != 0)
        .map(|e| 1.0 - e.j as f64 / e.modulus as f64)
        .product();
    let cs = complete_sum(g, pt, Restriction::Wq(profile))?;
    let prefactor = cs.value * (local / q as f64);
    let gx = g.eval_i64(x as i64);
    let g0 = g.eval_i64(0);
    let range = (&gx - &g0).to_f64().unwrap();
    let integral = if beta == 0.0 {
        Complex64::new(range, 0.0)
    } else {
        let d = DyadicPhase::new(g, beta)?;
        (e(d.of_big(&gx)) - e(d.of_big(&g0))) / Complex64::new(0.0, TAU * beta)
    };
    let vdc_bound = if beta == 0.0 { range.abs() } else { range.abs().min(1.0 / beta.abs()) };
    let main = prefactor * integral;
    let actual = weyl_sum(g, Alpha::Shifted { a: pt.a as i64, q, beta }, x, Some(profile), true)?.value;
    let abs_err = (main - actual).norm();
    Ok(MajorArc {
        main,
        actual,
        abs_err,
        rel_err: if main.norm() > 0.0 { abs_err / main.norm() } else { f64::INFINITY },
        prefactor,
        integral,
        vdc_bound,
        vdc_ok: integral.norm() <= vdc_bound * (1.0 + 1e-12),
        regime_ok: x as f64 >= q as f64 * profile.y * profile.y,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinorBound {
    /// Right-hand side with implied constant 1.
    pub bound: f64,
    pub actual_abs: f64,
    pub ratio: f64,
    /// `q = 1`, or the bound is no better than `X`.
    pub uninformative: bool,
}

fn positive_leading(g: &IntPolynomial) -> Result<f64> {
    if g.deg() < 1 || !g.leading().is_positive() {
        return Err(Error::domain("needs a positive leading coefficient"));
    }
    Ok(g.leading().to_f64().unwrap())
}

/// `(a_k log^{k^2}(a_k q X) (1/q + Z/X + q Z^k / (a_k X^k)))^(2^-k)`.
fn weyl_factor(ak: f64, k: usize, q: f64, x: f64, z: f64) -> f64 {
    let lg = (ak * q * x).ln();
    let inner = ak.ln() + (k * k) as f64 * lg.ln() + (1.0 / q + z / x + q * z.powi(k as i32) / (ak * x.powi(k as i32))).ln();
    (inner / 2f64.powi(k as i32)).exp()
}

/// Weyl's inequality at `alpha = a/q` against the unsieved sum.
pub fn weyl_minor_bound(g: &IntPolynomial, pt: RationalPoint, x: u64) -> Result<MinorBound> {
    let ak = positive_leading(g)?;
    let xf = x as f64;
    let bound = xf * weyl_factor(ak, g.deg(), pt.q as f64, xf, 1.0);
    let actual_abs = weyl_sum(g, Alpha::Rational { a: pt.a as i64, q: pt.q }, x, None, false)?.value.norm();
    Ok(MinorBound { bound, actual_abs, ratio: actual_abs / bound, uninformative: pt.q == 1 || bound >= xf })
}

/// The sieved minor arc estimate
/// `cont^5 (log Y)^{ek} X (e^{-log Z / log Y} + weyl_factor)` against the
/// sieved unweighted sum.
pub fn sieved_minor_audit(g: &IntPolynomial, pt: RationalPoint, x: u64, y: f64, z: f64) -> Result<MinorBound> {
    if x < 2 || y < 2.0 || z < 2.0 {
        return Err(Error::domain("X, Y, Z must be at least 2"));
    }
    let ak = positive_leading(g)?;
    let k = g.deg();
    let cont = g.content()?.abs().to_f64().unwrap();
    let xf = x as f64;
    let bound = cont.powi(5)
        * y.ln().powf(std::f64::consts::E * k as f64)
        * xf
        * ((-z.ln() / y.ln()).exp() + weyl_factor(ak, k, pt.q as f64, xf, z));
    let profile = SieveProfile::new(g.clone(), y)?;
    let actual_abs = weyl_sum(g, Alpha::Rational { a: pt.a as i64, q: pt.q }, x, Some(&profile), false)?.value.norm();
    Ok(MinorBound { bound, actual_abs, ratio: actual_abs / bound, uninformative: pt.q == 1 || bound >= xf })
}

/// Exact phase check used by tests: `frac(v x)` via rationals.
#[cfg(test)]
fn frac_oracle(v: i64, x: f64) -> f64 {
    use num_rational::BigRational;
    use num_traits::FromPrimitive;
    let r = BigRational::from_f64(x).unwrap() * BigRational::from_integer(v.into());
    let f = &r - r.floor();
    f.to_f64().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    #[test]
    fn dyadic_phase_is_exact() {
        let g = p("x^3");
        for &x in &[1.0 / 3.0, -0.7, 1e-9, 0.5, 3.0, std::f64::consts::PI, 1e-300] {
            let d = DyadicPhase::new(&g, x).unwrap();
            for n in [1u64, 7, 1000, 123_457] {
                let v = g.eval_i64(n as i64);
                let want = frac_oracle(v.to_i64().unwrap(), x);
                let got = d.at(&g, n);
                assert!((got - want).abs() < 1e-15 || (got - want).abs() > 1.0 - 1e-15, "x={x} n={n}");
            }
        }
        assert_eq!(crate::arith::dyadic_parts(0.75), (3, -2));
        assert_eq!(crate::arith::dyadic_parts(-6.0), (-3, 1));
        assert!(crate::arith::ratio_lt(1, 3, 0.3333333333333334));
        assert!(!crate::arith::ratio_lt(1, 4, 0.25));
    }

    #[test]
    fn weyl_examples() {
        let sq = p("x^2");
        let s = weyl_sum(&sq, Alpha::Real(0.0), 100, None, false).unwrap();
        assert_eq!(s.value, Complex64::new(100.0, 0.0));
        let s = weyl_sum(&sq, Alpha::Rational { a: 1, q: 4 }, 4, None, false).unwrap();
        assert!((s.value - Complex64::new(2.0, 2.0)).norm() < 1e-12);
        let s = weyl_sum(&sq, Alpha::Real(0.25), 4, None, false).unwrap();
        assert!((s.value - Complex64::new(2.0, 2.0)).norm() < 1e-12);
        assert!(weyl_sum(&sq, Alpha::Real(0.1), WEYL_X_LIMIT + 1, None, false).is_err());
    }

    #[test]
    fn class_route_agrees() {
        let g = p("2x^2-5x+3");
        let prof = SieveProfile::new(g.clone(), 10.0).unwrap();
        for (a, q) in [(1, 3), (2, 7), (5, 12), (1, 1)] {
            for weighted in [false, true] {
                let d = weyl_sum(&g, Alpha::Rational { a, q }, 5000, Some(&prof), weighted).unwrap();
                let c = weyl_sum_by_classes(&g, a, q, 5000, Some(&prof), weighted).unwrap();
                let scale = if weighted { 2e4 } else { 1.0 };
                assert!((d.value - c.value).norm() <= 1e-9 * 5000.0 * scale);
                assert_eq!(d.n_terms, c.n_terms);
            }
        }
    }

    #[test]
    fn block_size_changes_nothing_material() {
        let g = p("x^3+x");
        let a = weyl_sum_with_block(&g, Alpha::Real(0.123), 20_000, None, false, 1000).unwrap();
        let b = weyl_sum_with_block(&g, Alpha::Real(0.123), 20_000, None, false, 7).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
    }

    #[test]
    fn major_arc_examples() {
        let sq = p("x^2");
        let prof = SieveProfile::new(sq.clone(), 10.0).unwrap();
        let m = major_arc_asymptotic(&sq, RationalPoint::new(1, 3).unwrap(), 0.0, 10_000, &prof).unwrap();
        assert!(m.rel_err <= 0.01, "{}", m.rel_err);
        assert!(m.vdc_ok && m.regime_ok);
        let m = major_arc_asymptotic(&sq, RationalPoint::new(0, 1).unwrap(), 2.5, 1000, &prof).unwrap();
        assert!(m.integral.norm() <= 1.0 / 2.5);
        assert!(m.vdc_ok);
    }

    #[test]
    fn minor_bounds() {
        let sq = p("x^2");
        let r = weyl_minor_bound(&sq, RationalPoint::new(1, 1).unwrap(), 100).unwrap();
        assert!(r.uninformative);
        let r = weyl_minor_bound(&sq, RationalPoint::new(1, 9973).unwrap(), 10_000).unwrap();
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let r = sieved_minor_audit(&sq, RationalPoint::new(1, 499).unwrap(), 100_000, 20.0, 1000.0).unwrap();
        assert!(r.ratio.is_finite());
        let r = sieved_minor_audit(&sq, RationalPoint::new(1, 499).unwrap(), 10_000, 20.0, 10.0).unwrap();
        assert!(r.bound >= 10_000.0 * (-1f64).exp());
    }
}
