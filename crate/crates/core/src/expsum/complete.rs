use super::{e, pairwise_sum, ExpSumResult, RationalPoint, SumMethod};
use crate::arith;
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::sieve::SieveProfile;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// Largest modulus a complete sum will tabulate.
pub const COMPLETE_Q_LIMIT: u64 = 1 << 26;

/// Which residues `s mod q` a complete sum keeps.
#[derive(Debug, Clone, Copy)]
pub enum Restriction<'a> {
    None,
    /// `W^q(Y)`: primes with `p^gamma(p) | q`.
    Wq(&'a SieveProfile),
    /// Every prime of the profile.
    W(&'a SieveProfile),
}

/// `sum_{s in [0,q)} e(g(s) a / q)`, restricted as asked. Phases are exact
/// residues `g(s) a mod q`; each class is weighted by its count.
pub fn complete_sum(g: &IntPolynomial, pt: RationalPoint, restriction: Restriction) -> Result<ExpSumResult> {
    let q = pt.q;
    if q > COMPLETE_Q_LIMIT {
        return Err(Error::Resource(format!("q = {q} above {COMPLETE_Q_LIMIT}")));
    }
    let entries: Vec<_> = match restriction {
        Restriction::None => vec![],
        Restriction::Wq(p) => p.table.values().filter(|e| q % e.modulus == 0).collect(),
        Restriction::W(p) => p.table.values().collect(),
    };
    let mp = g.reduce_mod(q);
    let mut counts = vec![0u64; q as usize];
    let mut n_terms = 0;
    for s in 0..q {
        if entries.iter().any(|e| e.roots.binary_search(&(s % e.modulus)).is_ok()) {
            continue;
        }
        let c = (mp.eval(s) as u128 * pt.a as u128 % q as u128) as usize;
        counts[c] += 1;
        n_terms += 1;
    }
    let terms: Vec<Complex64> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(c, &n)| e(c as f64 / q as f64) * n as f64)
        .collect();
    Ok(ExpSumResult::checked(pairwise_sum(&terms), n_terms, SumMethod::Direct, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    /// `p <= Y`, `gamma(p) > 1`, `j < 2 gamma(p)`.
    Q1,
    /// `p <= Y`, `gamma(p) = 1`, `j = 1`.
    Q2,
    /// `p <= Y`, `j >= 2 gamma(p)`.
    Q3,
    /// `p > Y`.
    Q4,
}

impl ClassTag {
    pub fn name(&self) -> &'static str {
        match self {
            ClassTag::Q1 => "q1",
            ClassTag::Q2 => "q2",
            ClassTag::Q3 => "q3",
            ClassTag::Q4 => "q4",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrtPart {
    pub point: RationalPoint,
    pub p: u64,
    pub j: u32,
    pub tag: ClassTag,
}

/// Split `a/q` into `sum a_i / p_i^j_i mod 1`, one part per prime power,
/// each tagged by its class.
pub fn crt_split(pt: RationalPoint, profile: &SieveProfile) -> Vec<CrtPart> {
    let q = pt.q;
    arith::factorize(q)
        .into_iter()
        .map(|(p, j)| {
            let qi = p.pow(j);
            let rest = q / qi;
            let inv = arith::inv_mod(rest % qi, qi).expect("coprime cofactor");
            let ai = (pt.a as u128 * inv as u128 % qi as u128) as u64;
            let tag = match profile.table.get(&p) {
                None => ClassTag::Q4,
                Some(e) if j >= 2 * e.gamma => ClassTag::Q3,
                Some(e) if e.gamma == 1 => ClassTag::Q2,
                Some(_) => ClassTag::Q1,
            };
            CrtPart { point: RationalPoint { a: ai, q: qi }, p, j, tag }
        })
        .collect()
}

/// `sum a_i (q / q_i) = a mod q`, i.e. the parts add up to `a/q` mod 1.
pub fn crt_consistent(pt: RationalPoint, parts: &[CrtPart]) -> bool {
    let q = pt.q as u128;
    let total: u128 = parts.iter().map(|c| c.point.a as u128 * (q / c.point.q as u128) % q).sum();
    total % q == pt.a as u128 % q && parts.iter().map(|c| c.point.q as u128).product::<u128>() == q
}

/// The complete sum as a product over the CRT parts.
pub fn complete_sum_crt(g: &IntPolynomial, pt: RationalPoint, profile: &SieveProfile, restricted: bool) -> Result<ExpSumResult> {
    let mut value = Complex64::new(1.0, 0.0);
    let mut n_terms = 1u64;
    for part in crt_split(pt, profile) {
        let r = if restricted { Restriction::Wq(profile) } else { Restriction::None };
        let s = complete_sum(g, part.point, r)?;
        value *= s.value;
        n_terms *= s.n_terms;
    }
    Ok(ExpSumResult::checked(value, n_terms, SumMethod::Crt, 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRow {
    pub q: u64,
    pub a: u64,
    pub abs_sum: f64,
    pub ratio_sqrt: f64,
    pub omega_q: usize,
    pub class_tags: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    pub q: u64,
    pub max_ratio: f64,
    pub omega_q: usize,
    /// `(max_ratio / gcd(cont, q)^3)^(1/omega(q))`, absent for `q = 1`.
    pub fitted_c: Option<f64>,
    /// `q <= Y`, squarefree, `cont(g) = 1`: ratio must be at most `k^omega(q)`.
    pub weil_checked: bool,
    pub weil_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SqrtAudit {
    pub rows: Vec<AuditRow>,
    pub per_q: Vec<AuditSummary>,
    pub fitted_c_max: f64,
    pub all_finite: bool,
    pub weil_violations: Vec<u64>,
}

impl SqrtAudit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,a,abs_sum,ratio_sqrt,omega_q,class_tags\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{:.12e},{:.12e},{},{}\n", r.q, r.a, r.abs_sum, r.ratio_sqrt, r.omega_q, r.class_tags));
        }
        out
    }
}

/// Up to `samples` residues coprime to `q`: all of them when there are few
/// enough, else a seeded random choice.
pub fn sample_coprime(q: u64, samples: usize, seed: u64) -> Vec<u64> {
    let all: Vec<u64> = if q <= 4 * samples as u64 + 4 {
        (0..q).filter(|&a| arith::gcd(a, q) == 1).collect()
    } else {
        vec![]
    };
    if !all.is_empty() && all.len() <= samples {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ q.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = BTreeSet::new();
    while out.len() < samples {
        let a = rng.gen_range(1..q);
        if arith::gcd(a, q) == 1 {
            out.insert(a);
        }
    }
    out.into_iter().collect()
}

/// `|S_restricted(a/q)| / sqrt(q)` for `q <= q_max` and sampled `a`.
pub fn sqrt_cancel_audit(g: &IntPolynomial, q_max: u64, profile: &SieveProfile, samples: usize, seed: u64) -> Result<SqrtAudit> {
    if g.deg() < 2 {
        return Err(Error::domain("audit needs deg(g) >= 2"));
    }
    let k = g.deg() as f64;
    let cont = g.content()?;
    let unit_content = cont == 1.into() || cont == (-1).into();
    let mut rows = Vec::new();
    let mut per_q = Vec::new();
    for q in 1..=q_max {
        let tags: BTreeSet<&str> = crt_split(RationalPoint { a: if q == 1 { 0 } else { 1 }, q }, profile)
            .iter()
            .map(|c| c.tag.name())
            .collect();
        let tags = tags.into_iter().collect::<Vec<_>>().join(";");
        let omega = arith::omega(q);
        let mut max_ratio = 0f64;
        for a in sample_coprime(q, samples, seed) {
            let pt = RationalPoint { a, q };
            let s = complete_sum(g, pt, Restriction::Wq(profile))?;
            let abs = s.value.norm();
            let ratio = abs / (q as f64).sqrt();
            max_ratio = max_ratio.max(ratio);
            rows.push(AuditRow { q, a, abs_sum: abs, ratio_sqrt: ratio, omega_q: omega, class_tags: tags.clone() });
        }
        let gc = arith::gcd(arith::big_mod(&cont, q), q) as f64;
        let fitted_c = (omega > 0).then(|| (max_ratio / gc.powi(3)).powf(1.0 / omega as f64));
        let weil_checked = (q as f64) <= profile.y && arith::is_squarefree(q) && unit_content;
        let weil_ok = !weil_checked || max_ratio <= k.powi(omega as i32) * (1.0 + 1e-9);
        per_q.push(AuditSummary { q, max_ratio, omega_q: omega, fitted_c, weil_checked, weil_ok });
    }
    let fitted_c_max = per_q.iter().filter_map(|s| s.fitted_c).fold(0.0, f64::max);
    Ok(SqrtAudit {
        all_finite: rows.iter().all(|r| r.ratio_sqrt.is_finite()),
        weil_violations: per_q.iter().filter(|s| !s.weil_ok).map(|s| s.q).collect(),
        rows,
        per_q,
        fitted_c_max,
    })
}
