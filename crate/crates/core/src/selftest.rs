//! The acceptance checks, runnable from the CLI and the integration tests.
//!
//! Reports contain no timings, so a given `(quick, seed)` always serializes
//! to the same bytes whatever the thread count.

use crate::arith;
use crate::auxiliary::AuxiliaryFamily;
use crate::circle::{self, ArcParams, IncrementOutcome};
use crate::error::Result;
use crate::expsum::{complete_sum, complete_sum_crt, crt_split, sample_coprime, major_arc_asymptotic, RationalPoint, Restriction};
use crate::padic::{is_intersective, IntersectivityVerdict};
use crate::poly::IntPolynomial;
use crate::setlab::{self, DiffFreeInstance, SearchMode};
use crate::sieve::SieveProfile;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub const CRITERIA: u32 = 13;
pub const DEFAULT_SEED: u64 = 20240101;

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    /// Smaller trial counts and sizes.
    pub quick: bool,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { quick: false, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub mode: &'static str,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub criteria: Vec<CriterionReport>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub fn run(opts: SelftestOptions) -> SelftestReport {
    run_only(opts, &(1..=CRITERIA).collect::<Vec<_>>())
}

/// The listed criteria, in the order given.
pub fn run_only(opts: SelftestOptions, ids: &[u32]) -> SelftestReport {
    let criteria: Vec<CriterionReport> = ids.iter().map(|&id| criterion(id, opts)).collect();
    let passed = criteria.iter().filter(|c| c.pass).count();
    SelftestReport {
        mode: if opts.quick { "quick" } else { "full" },
        seed: opts.seed,
        passed,
        failed: criteria.len() - passed,
        criteria,
    }
}

pub fn criterion_name(id: u32) -> &'static str {
    match id {
        1 => "intersectivity_verdicts",
        2 => "gauss_magnitude",
        3 => "exact_vanishing",
        4 => "crt_factorization",
        5 => "content_bound_audit",
        6 => "preimage_symdiff",
        7 => "brun_sieve",
        8 => "major_arc_asymptotic",
        9 => "arc_machinery",
        10 => "density_increment",
        11 => "set_verify_oracle",
        12 => "modular_search",
        13 => "trivial_construction",
        _ => "unknown",
    }
}

/// One criterion; errors become failures carrying the message.
pub fn criterion(id: u32, opts: SelftestOptions) -> CriterionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let out = match id {
        1 => c1(),
        2 => c2(opts),
        3 => c3(opts),
        4 => c4(opts, &mut rng),
        5 => c5(opts),
        6 => c6(opts, &mut rng),
        7 => c7(opts, &mut rng),
        8 => c8(),
        9 => c9(opts, &mut rng),
        10 => c10(),
        11 => c11(opts, &mut rng),
        12 => c12(opts),
        13 => c13(),
        _ => Err(crate::Error::domain(format!("no criterion {id}"))),
    };
    let (pass, detail) = out.unwrap_or_else(|e| (false, json!({ "error": e.to_string() })));
    CriterionReport { id, name: criterion_name(id), pass, detail }
}

type Outcome = Result<(bool, Value)>;

fn poly(s: &str) -> IntPolynomial {
    IntPolynomial::parse(s).expect("built-in polynomial")
}

fn quintic() -> IntPolynomial {
    poly("(x^3-19)*(x^2+x+1)")
}

fn status(v: &IntersectivityVerdict) -> Value {
    match v {
        IntersectivityVerdict::Intersective { .. } => json!({ "status": "Intersective" }),
        IntersectivityVerdict::NotIntersective { witness_p, witness_j } => {
            json!({ "status": "NotIntersective", "witness_p": witness_p, "witness_j": witness_j })
        }
        IntersectivityVerdict::Unknown { unresolved, .. } => json!({ "status": "Unknown", "unresolved": unresolved }),
    }
}

fn c1() -> Outcome {
    let sq = is_intersective(&poly("x^2"), 100, 6)?;
    let plus = is_intersective(&poly("x^2+1"), 100, 6)?;
    let q = is_intersective(&quintic(), 100, 6)?;
    let witness_ok = matches!(plus, IntersectivityVerdict::NotIntersective { witness_p: 3, .. });
    let pass = sq.is_intersective() && witness_ok && q.is_intersective();
    Ok((pass, json!({ "x^2": status(&sq), "x^2+1": status(&plus), "(x^3-19)(x^2+x+1)": status(&q) })))
}

fn c2(opts: SelftestOptions) -> Outcome {
    let limit = if opts.quick { 200 } else { 2000 };
    let g = poly("x^2");
    let primes: Vec<u64> = arith::primes_up_to(limit - 1).into_iter().filter(|&p| p > 2).collect();
    let errs: Vec<f64> = primes
        .par_iter()
        .map(|&p| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for a in sample_coprime(p, 10, opts.seed) {
                let s = complete_sum(&g, RationalPoint::new(a as i64, p)?, Restriction::None)?;
                let r = (p as f64).sqrt();
                worst = worst.max((s.value.norm() - r).abs() / r);
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let max_rel = errs.iter().cloned().fold(0.0, f64::max);
    Ok((max_rel <= 1e-6, json!({ "primes": primes.len(), "samples_per_prime": 10, "max_rel_err": max_rel })))
}

fn c3(opts: SelftestOptions) -> Outcome {
    let gens = ["x^2", "x^3", "2x^2-5x+3", "(x^3-19)*(x^2+x+1)"];
    let mut rows = Vec::new();
    let mut pass = true;
    for s in gens {
        let g = poly(s);
        let profile = SieveProfile::new(g.clone(), 20.0)?;
        let mut worst: f64 = 0.0;
        let mut checks = 0;
        for p in arith::primes_up_to(13) {
            let gamma = profile.table[&p].gamma;
            for j in 2 * gamma..=2 * gamma + 2 {
                let q = p.pow(j);
                for b in sample_coprime(q, 5, opts.seed) {
                    let v = complete_sum(&g, RationalPoint::new(b as i64, q)?, Restriction::Wq(&profile))?;
                    let scaled = v.value.norm() / q as f64;
                    worst = worst.max(scaled);
                    pass &= scaled <= 1e-9;
                    checks += 1;
                }
            }
        }
        rows.push(json!({ "g": s, "checks": checks, "max_abs_over_q": worst }));
    }
    Ok((pass, json!({ "Y": 20, "rows": rows })))
}

fn random_poly(rng: &mut ChaCha8Rng, deg: usize, c: i64, positive_lead: bool) -> IntPolynomial {
    let mut v: Vec<i64> = (0..deg).map(|_| rng.gen_range(-c..=c)).collect();
    let lead = if positive_lead {
        rng.gen_range(1..=c)
    } else {
        let x = rng.gen_range(1..=c);
        if rng.gen_bool(0.5) { x } else { -x }
    };
    v.push(lead);
    IntPolynomial::from_i64(&v)
}

fn c4(opts: SelftestOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let trials = if opts.quick { 100 } else { 500 };
    let cases: Vec<(IntPolynomial, u64, u64)> = (0..trials)
        .map(|_| {
            let deg = rng.gen_range(2..=4);
            let g = random_poly(rng, deg, 20, false);
            let q = rng.gen_range(2..=10_000u64);
            let a = loop {
                let a = rng.gen_range(1..q);
                if arith::gcd(a, q) == 1 {
                    break a;
                }
            };
            (g, a, q)
        })
        .collect();
    let errs: Vec<(f64, bool)> = cases
        .par_iter()
        .map(|(g, a, q)| -> Result<(f64, bool)> {
            let profile = SieveProfile::new(g.clone(), 20.0)?;
            let pt = RationalPoint::new(*a as i64, *q)?;
            let direct = complete_sum(g, pt, Restriction::None)?.value;
            let product = complete_sum_crt(g, pt, &profile, false)?.value;
            let consistent = crate::expsum::crt_consistent(pt, &crt_split(pt, &profile));
            Ok(((direct - product).norm() / *q as f64, consistent))
        })
        .collect::<Result<_>>()?;
    let max_err = errs.iter().map(|e| e.0).fold(0.0, f64::max);
    let consistent = errs.iter().all(|e| e.1);
    Ok((max_err <= 1e-9 && consistent, json!({ "trials": trials, "max_abs_err_over_q": max_err, "crt_consistent": consistent })))
}

fn c5(opts: SelftestOptions) -> Outcome {
    let d_max = if opts.quick { 100 } else { 500 };
    let fams = [
        ("x^2", AuxiliaryFamily::new(poly("x^2"), 8)?),
        ("(x-1)(x-2)", AuxiliaryFamily::with_integer_root(poly("(x-1)(x-2)"), BigInt::from(1))?),
        ("(x^3-19)(x^2+x+1)", AuxiliaryFamily::new(quintic(), 8)?),
    ];
    let mut rows = Vec::new();
    for (name, fam) in &fams {
        let r = fam.content_bound_audit(d_max)?;
        rows.push(json!({
            "family": name,
            "delta_abs": r.delta_abs.to_string(),
            "max_content": r.max_content.to_string(),
            "worst_d": r.worst_d,
            "max_ratio": r.max_ratio,
        }));
    }
    Ok((true, json!({ "d_max": d_max, "families": rows })))
}

fn c6(opts: SelftestOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let trials = if opts.quick { 200 } else { 1000 };
    let cases: Vec<(IntPolynomial, u64)> = (0..trials)
        .map(|_| {
            let deg = rng.gen_range(1..=5);
            (random_poly(rng, deg, 50, true), rng.gen_range(1..=1_000_000u64))
        })
        .collect();
    let reports: Vec<(u64, u64)> = cases
        .par_iter()
        .map(|(g, x)| g.preimage_symdiff(&BigRational::from_integer(BigInt::from(*x))).map(|r| (r.count, r.bound)))
        .collect::<Result<_>>()?;
    let violations = reports.iter().filter(|(c, b)| c > b).count();
    let max_count = reports.iter().map(|r| r.0).max().unwrap_or(0);
    let tight = reports.iter().filter(|(c, b)| c == b).count();
    Ok((violations == 0, json!({ "trials": trials, "violations": violations, "max_count": max_count, "at_bound": tight })))
}

fn c7(opts: SelftestOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let (x, probes) = if opts.quick { (1_000_000, 1000) } else { (10_000_000, 10_000) };
    let profile = SieveProfile::new(poly("x^2"), 20.0)?;
    let b = profile.brun_compare(x);
    let m = profile.wheel_modulus().expect("small wheel");
    let mismatches = (0..probes)
        .filter(|_| {
            let n = rng.gen_range(0..1u64 << 40);
            profile.w_member(n) != profile.w_member(n + m)
        })
        .count();
    let pass = b.relative_error <= 1e-3 && mismatches == 0;
    Ok((pass, json!({ "brun": b, "M": m, "probes": probes, "periodicity_mismatches": mismatches })))
}

fn c8() -> Outcome {
    let g = poly("x^2");
    let profile = SieveProfile::new(g.clone(), 10.0)?;
    let mut rows = Vec::new();
    let mut pass = true;
    for (a, q) in [(0, 1), (1, 3), (2, 5)] {
        let pt = RationalPoint::new(a, q)?;
        let lo = major_arc_asymptotic(&g, pt, 0.0, 1_000, &profile)?;
        let hi = major_arc_asymptotic(&g, pt, 0.0, 100_000, &profile)?;
        pass &= hi.rel_err < lo.rel_err && hi.rel_err <= 0.05;
        rows.push(json!({ "a": a, "q": q, "rel_err_1e3": lo.rel_err, "rel_err_1e5": hi.rel_err }));
    }
    Ok((pass, json!({ "Y": 10, "rows": rows })))
}

fn c9(opts: SelftestOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let trials = if opts.quick { 200 } else { 1000 };
    let mut params = Vec::new();
    while params.len() < trials {
        let n = rng.gen_range(16..=20_000u64);
        let q_max = rng.gen_range(1..=((n / 2) as f64).sqrt() as u64);
        let k = rng.gen_range(0.05..=(n as f64 / (2.0 * (q_max * q_max) as f64)));
        let p = ArcParams::new(n, k, q_max)?;
        if p.disjoint() {
            params.push(p);
        }
    }
    let overlaps: usize = params
        .par_iter()
        .map(|p| circle::major_label_counts(p).iter().filter(|&&c| c > 1).count())
        .sum();
    let max_n = if opts.quick { 1 << 16 } else { 1 << 20 };
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::new();
    for n in [1000u64, 65_536, 99_991, max_n] {
        let a: Vec<u64> = (1..=n).filter(|_| rng.gen_bool(0.3)).collect();
        let fd = circle::dft_indicator(&a, n)?;
        let expect = a.len() as f64 / n as f64;
        worst = worst.max((fd.mass() - expect).abs() / expect);
        sizes.push(n);
    }
    let pass = overlaps == 0 && worst <= 1e-8;
    Ok((pass, json!({ "trials": trials, "double_major": overlaps, "plancherel_sizes": sizes, "plancherel_max_rel_err": worst })))
}

fn c10() -> Outcome {
    let l = 10_000u64;
    let b: Vec<u64> = (1..=l).filter(|x| x % 7 == 0).collect();
    let theta = 0.5;
    let out = circle::extract_progression(&b, l, 7, 1.0, theta)?;
    let sigma = b.len() as f64 / l as f64;
    let pass = match &out {
        IncrementOutcome::Progression(p) => {
            let recount = circle::count_in_progression(&b, p.start, p.step, p.length);
            p.verified
                && recount == p.count
                && p.length > 0
                && recount as f64 / p.length as f64 >= (1.0 / 7.0) * (1.0 + theta / 16.0)
        }
        IncrementOutcome::NoIncrement { .. } => false,
    };
    Ok((pass, json!({ "sigma": sigma, "outcome": out })))
}

fn random_generator(rng: &mut ChaCha8Rng) -> IntPolynomial {
    match rng.gen_range(0..4) {
        0 => IntPolynomial::monomial(1, rng.gen_range(2..=3)),
        1 => random_poly(rng, 1, 6, true),
        _ => {
            let deg = rng.gen_range(2..=3);
            random_poly(rng, deg, 6, true)
        }
    }
}

fn c11(opts: SelftestOptions, rng: &mut ChaCha8Rng) -> Outcome {
    let trials = if opts.quick { 100 } else { 500 };
    let cases: Vec<(u64, Vec<IntPolynomial>, Vec<u64>)> = (0..trials)
        .map(|_| {
            let n = rng.gen_range(2..=200u64);
            let gens: Vec<IntPolynomial> = (0..rng.gen_range(1..=3)).map(|_| random_generator(rng)).collect();
            let size = rng.gen_range(1..=8.min(n) as usize);
            let a: Vec<u64> = (0..size).map(|_| rng.gen_range(1..=n)).collect();
            (n, gens, a)
        })
        .collect();
    let results: Vec<(bool, bool)> = cases
        .par_iter()
        .map(|(n, gens, a)| -> Result<(bool, bool)> {
            let inst = DiffFreeInstance::new(*n, gens.clone(), a.clone())?;
            let fast = inst.verify();
            let brute = setlab::verify_brute(gens, *n, &inst.a);
            let witness_ok = match &fast {
                setlab::Verdict::Ok => true,
                setlab::Verdict::Violation { diff, decomposition, a, a_prime } => {
                    decomposition.len() == gens.len()
                        && decomposition.iter().map(|t| t.value).sum::<u64>() == *diff
                        && decomposition.iter().all(|t| {
                            let v = gens[t.generator].eval_i64(t.n as i64);
                            v == BigInt::from(t.value) || v == -BigInt::from(t.value)
                        })
                        && a - a_prime == *diff
                }
            };
            Ok((fast.is_ok() == brute.is_none() && witness_ok, fast.is_ok()))
        })
        .collect::<Result<_>>()?;
    let agree = results.iter().filter(|r| r.0).count();
    let ok_sets = results.iter().filter(|r| r.1).count();
    Ok((agree == trials, json!({ "trials": trials, "agree": agree, "ok_sets": ok_sets, "violating_sets": trials - ok_sets })))
}

fn c12(opts: SelftestOptions) -> Outcome {
    let small = setlab::modular_search(5, 2, SearchMode::Exhaustive)?;
    let c = setlab::ruzsa_exponent(205, 12, 2);
    let budget = if opts.quick { 1_000_000 } else { 1_000_000_000 };
    let big = setlab::modular_search(205, 2, SearchMode::BranchBound { budget })?;
    let pass = small.size == 2 && small.optimal && (c - 0.7334).abs() <= 1e-4 && big.size >= 10 && big.verified;
    Ok((
        pass,
        json!({
            "q5": { "size": small.size, "best": small.best, "optimal": small.optimal },
            "exponent_205_12": c,
            "q205": {
                "budget": budget,
                "size": big.size,
                "best": big.best,
                "optimal": big.optimal,
                "nodes": big.nodes,
                "upper_bound": big.upper_bound,
                "verified": big.verified,
                "exponent": big.exponent,
            },
        }),
    ))
}

fn c13() -> Outcome {
    let mut rows = Vec::new();
    let mut pass = true;
    for n in [100u64, 10_000, 1_000_000] {
        for k in [2u32, 3] {
            let t = setlab::trivial_multiples(n, k)?;
            let ok = t.verify().is_ok();
            pass &= ok;
            rows.push(json!({ "N": n, "k": k, "p": t.a[0], "size": t.a.len(), "ok": ok }));
        }
    }
    Ok((pass, json!({ "rows": rows })))
}
