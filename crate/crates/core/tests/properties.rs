use ilab_core::arith;
use ilab_core::auxiliary::AuxiliaryFamily;
use ilab_core::circle::{self, IncrementOutcome};
use ilab_core::expsum::{complete_sum, weyl_sum, weyl_sum_by_classes, Alpha, RationalPoint, Restriction};
use ilab_core::padic::{self, IntersectivityVerdict};
use ilab_core::setlab::{self, ModularInstance, SearchMode};
use ilab_core::sieve::SieveProfile;
use ilab_core::IntPolynomial;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::OnceLock;

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Smallest `b >= max(a, 1)` coprime to `q`.
fn coprime_from(a: u64, q: u64) -> u64 {
    let mut b = a.max(1);
    while arith::gcd(b % q, q) != 1 {
        b += 1;
    }
    b
}

fn coeffs(max_deg: usize, c: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-c..=c, 1..=max_deg + 1).prop_filter("nonzero lead", |v| *v.last().unwrap() != 0)
}

fn nonlinear(max_deg: usize, c: i64) -> impl Strategy<Value = IntPolynomial> {
    prop::collection::vec(-c..=c, 3..=max_deg + 1)
        .prop_filter("nonzero lead", |v| *v.last().unwrap() != 0)
        .prop_map(|v| IntPolynomial::from_i64(&v))
}

fn small_prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47])
}

fn quintic_family() -> &'static AuxiliaryFamily {
    static F: OnceLock<AuxiliaryFamily> = OnceLock::new();
    F.get_or_init(|| AuxiliaryFamily::new(IntPolynomial::parse("(x^3-19)*(x^2+x+1)").unwrap(), 8).unwrap())
}

// ---- polynomials

proptest! {
    #[test]
    fn evaluation_routes_agree(c in coeffs(8, 1000), x in -10_000i64..10_000) {
        let p = IntPolynomial::from_i64(&c);
        let xb = big(x);
        let by_powers: BigInt = c.iter().enumerate().map(|(i, &a)| big(a) * xb.pow(i as u32)).sum();
        prop_assert_eq!(p.evaluate(&xb), by_powers);
    }

    #[test]
    fn content_scales(c in coeffs(6, 100), s in -50i64..50) {
        prop_assume!(s != 0 && c.len() >= 2);
        let p = IntPolynomial::from_i64(&c);
        prop_assert_eq!(p.scale(&big(s)).content().unwrap(), p.content().unwrap() * big(s.abs()));
    }

    #[test]
    fn shift_scale_by_one(c in coeffs(6, 100), r in -100i64..100, d in 1i64..50, x in -100i64..100) {
        let p = IntPolynomial::from_i64(&c);
        let h = p.shift_scale(&big(r), &big(d), &big(1)).unwrap();
        prop_assert_eq!(h.evaluate(&big(x)), p.evaluate(&big(r + d * x)));
    }

    #[test]
    fn discriminant_zero_iff_repeated(roots in prop::collection::btree_set(-20i64..20, 1..5), rep in prop::option::of(-20i64..20)) {
        let mut p = IntPolynomial::from_i64(&[1]);
        for &r in &roots {
            p = &p * &IntPolynomial::from_i64(&[-r, 1]);
        }
        if let Some(r) = rep {
            p = &p * &IntPolynomial::from_i64(&[r * r, -2 * r, 1]);
        }
        prop_assume!(p.deg() >= 2);
        let disc = p.classical_discriminant().unwrap();
        prop_assert_eq!(disc.is_zero(), rep.is_some());
        let repeated = p.squarefree_decomposition().iter().any(|(_, m)| *m >= 2);
        prop_assert_eq!(repeated, rep.is_some());
        prop_assert!(!p.discriminant_abs().unwrap().is_zero());
    }
}

// ---- p-adic

proptest! {
    #[test]
    fn chosen_roots_reverify(c in coeffs(3, 30), z in -50i64..50, p in small_prime()) {
        let h = &IntPolynomial::from_i64(&c) * &IntPolynomial::from_i64(&[-z, 1]);
        prop_assume!(!h.is_zero());
        // z is a simple root of the radical; its factor's derivative has
        // valuation at most v, so precision 2v + 1 always suffices
        let v = arith::valuation(&h.radical().derivative().evaluate(&big(z)), p).unwrap();
        let cert = padic::choose_root(&h, p, 2 * v + 1).unwrap();
        prop_assert!(cert.verify(&h));
        prop_assert!(cert.precision <= 2 * v + 1);
    }

    #[test]
    fn hensel_lift_is_root_at_every_level(c in coeffs(4, 30), z in -50i64..50, p in small_prime(), extra in 0u32..5) {
        let g0 = IntPolynomial::from_i64(&c);
        prop_assume!(g0.deg() >= 1);
        let g = &g0 - &IntPolynomial::new(vec![g0.evaluate(&big(z))]);
        let dz = g.derivative().evaluate(&big(z));
        prop_assume!(!dz.is_zero());
        let v = arith::valuation(&dz, p).unwrap();
        let pb = big(p as i64);
        let n = big(z).mod_floor(&pb.pow(2 * v + 1));
        let target = 2 * v + 1 + extra;
        let m = padic::hensel_lift(&g, p, &n, target).unwrap();
        for j in 2 * v + 1..=target {
            prop_assert!((g.evaluate(&m) % pb.pow(j)).is_zero());
        }
    }

    #[test]
    fn roots_mod_crt(c in coeffs(4, 30), q1 in 1u64..40, q2 in 1u64..40) {
        let q2 = coprime_from(q2, q1);
        let p = IntPolynomial::from_i64(&c);
        let mut merged: Vec<u64> = padic::roots_mod(&p, q1)
            .iter()
            .flat_map(|&r1| padic::roots_mod(&p, q2).into_iter().map(move |r2| arith::crt_pair(r1, q1, r2, q2).0))
            .collect();
        merged.sort_unstable();
        prop_assert_eq!(padic::roots_mod(&p, q1 * q2), merged);
    }

    #[test]
    fn not_intersective_is_self_certifying(c in coeffs(4, 20)) {
        let h = IntPolynomial::from_i64(&c);
        prop_assume!(h.deg() >= 1);
        if let IntersectivityVerdict::NotIntersective { witness_p, witness_j } = padic::is_intersective(&h, 30, 4).unwrap() {
            prop_assert!(padic::roots_mod(&h, witness_p.pow(witness_j)).is_empty());
        }
    }
}

// ---- auxiliary families

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn r_congruence(q in 1u64..=100, d in 1u64..=100) {
        let fam = quintic_family();
        let diff = fam.r_of(q * d).unwrap() - fam.r_of(d).unwrap();
        prop_assert!((diff % big(d as i64)).is_zero());
    }

    #[test]
    fn lambda_multiplicative(d1 in 1u64..=300, d2 in 1u64..=300) {
        let fam = quintic_family();
        prop_assert_eq!(fam.lambda(d1 * d2).unwrap(), fam.lambda(d1).unwrap() * fam.lambda(d2).unwrap());
    }

    #[test]
    fn leading_identity(d in 1u64..=1000) {
        let fam = quintic_family();
        let hd = fam.aux_poly(d).unwrap();
        let k = fam.k() as u32;
        prop_assert_eq!(hd.leading() * fam.lambda(d).unwrap(), big(d as i64).pow(k) * fam.base().leading());
    }

    #[test]
    fn square_family_is_constant(d in 1u64..=1000) {
        let fam = AuxiliaryFamily::new(IntPolynomial::monomial(1, 2), 8).unwrap();
        prop_assert_eq!(fam.aux_poly(d).unwrap(), IntPolynomial::monomial(1, 2));
    }
}

#[test]
fn aux_poly_at_one_is_base() {
    let fam = AuxiliaryFamily::new(IntPolynomial::parse("x^3+2x^2").unwrap(), 8).unwrap();
    assert_eq!(fam.r_of(1).unwrap(), big(0));
    assert_eq!(fam.lambda(1).unwrap(), big(1));
    assert_eq!(&fam.aux_poly(1).unwrap(), fam.base());
}

// ---- sieve

fn profile() -> impl Strategy<Value = SieveProfile> {
    (nonlinear(3, 10), 2.0f64..14.0).prop_map(|(g, y)| SieveProfile::new(g, y).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w_member_periodic(s in profile(), n in 0u64..1 << 40) {
        if let Some(m) = s.wheel_modulus() {
            prop_assert_eq!(s.w_member(n), s.w_member(n + m));
        }
    }

    #[test]
    fn wheel_count_matches_scan(s in profile(), x in 1u64..=100_000) {
        prop_assert_eq!(s.enumerate_w(x, false).count, s.scan_count(x));
        prop_assert_eq!(s.scan_count(x), (1..=x).filter(|&n| s.w_member(n)).count() as u64);
    }

    #[test]
    fn idzero_and_root_counts(s in profile()) {
        prop_assert!(s.idzero_check());
        for e in s.table.values() {
            if e.gamma == 1 {
                prop_assert!(e.j as usize <= s.k() - 1);
            }
        }
    }
}

// ---- exponential sums

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn conjugation_symmetry(g in nonlinear(4, 20), q in 2u64..3000, a in 1u64..3000) {
        let a = coprime_from(a, q) as i64;
        let s = complete_sum(&g, RationalPoint::new(a, q).unwrap(), Restriction::None).unwrap();
        let t = complete_sum(&g, RationalPoint::new(-a, q).unwrap(), Restriction::None).unwrap();
        prop_assert!((s.value - t.value.conj()).norm() <= 1e-9 * q as f64);
        prop_assert!(s.value.norm() <= s.n_terms as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn weyl_rational_matches_classes(g in nonlinear(3, 10), q in 1u64..500, a in 0u64..500, x in 1u64..20_000, sieved in any::<bool>(), weighted in any::<bool>()) {
        let a = coprime_from(a, q) as i64;
        let prof = SieveProfile::new(g.clone(), 10.0).unwrap();
        let sieve = if sieved { Some(&prof) } else { None };
        let direct = weyl_sum(&g, Alpha::Rational { a, q }, x, sieve, weighted).unwrap();
        let classes = weyl_sum_by_classes(&g, a, q, x, sieve, weighted).unwrap();
        let scale = if weighted { g.derivative().eval_i128(x as i128).unwrap().abs().max(1) as f64 } else { 1.0 };
        prop_assert!((direct.value - classes.value).norm() <= 1e-9 * x as f64 * scale);
        prop_assert_eq!(direct.n_terms, classes.n_terms);
        prop_assert!(direct.value.norm() <= direct.n_terms as f64 * scale * (1.0 + 1e-9));
    }
}

// ---- circle

fn subset(n: u64) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(1..=n, 1..=(n as usize / 2).max(1)).prop_map(|s| s.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inverse_round_trip((n, a) in (2u64..5000).prop_flat_map(|n| (Just(n), subset(n)))) {
        let fd = circle::dft_indicator(&a, n).unwrap();
        let back = fd.invert();
        let mut want = vec![0.0; n as usize];
        for &x in &a {
            want[(x % n) as usize] = 1.0;
        }
        let err = back.iter().zip(&want).map(|(z, w)| (z - w).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-9);
    }

    #[test]
    fn arc_mass_translation_invariant((n, a) in (50u64..3000).prop_flat_map(|n| (Just(n), subset(n))), s in 0u64..3000, q in 1u64..6, k in 0.5f64..4.0) {
        let shifted: Vec<u64> = a.iter().map(|&x| (x + s - 1) % n + 1).collect();
        let m0 = circle::arc_mass(&circle::dft_indicator(&a, n).unwrap(), q, k);
        let m1 = circle::arc_mass(&circle::dft_indicator(&shifted, n).unwrap(), q, k);
        prop_assert!((m0 - m1).abs() <= 1e-9);
    }

    #[test]
    fn progressions_self_verify((l, b) in (200u64..3000).prop_flat_map(|l| (Just(l), subset(l))), q in 1u64..8, k in 0.5f64..3.0, theta in 0.05f64..1.0) {
        if let IncrementOutcome::Progression(p) = circle::extract_progression(&b, l, q, k, theta).unwrap() {
            prop_assert!(p.verified);
            prop_assert_eq!(circle::count_in_progression(&b, p.start, p.step, p.length), p.count);
            prop_assert!(p.count as f64 >= p.target_density * p.length as f64 - 1e-9);
            prop_assert!(p.start + p.step as i64 >= 1 && p.start + (p.length * p.step) as i64 <= l as i64);
        }
    }
}

// ---- difference-free sets

fn generators() -> impl Strategy<Value = Vec<IntPolynomial>> {
    let g = prop_oneof![
        (2usize..=3).prop_map(|k| IntPolynomial::monomial(1, k)),
        (-5i64..5, 1i64..4).prop_map(|(c, a)| IntPolynomial::from_i64(&[c, a])),
        (prop::collection::vec(-5i64..5, 2..=3), 1i64..4).prop_map(|(mut v, a)| {
            v.push(a);
            IntPolynomial::from_i64(&v)
        }),
    ];
    prop::collection::vec(g, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verify_matches_brute(n in 2u64..=200, gens in generators(), a in prop::collection::vec(1u64..=200, 1..10)) {
        let a: Vec<u64> = a.into_iter().filter(|&x| x <= n).collect();
        prop_assume!(!a.is_empty());
        let inst = setlab::DiffFreeInstance::new(n, gens.clone(), a).unwrap();
        prop_assert_eq!(inst.verify().is_ok(), setlab::verify_brute(&gens, n, &inst.a).is_none());
    }

    #[test]
    fn greedy_verifies(n in 1u64..=2000, gens in generators()) {
        let g = setlab::greedy(n, gens.clone()).unwrap();
        prop_assert!(g.verify().is_ok());
        prop_assert!(setlab::verify_brute(&gens, n, &g.a).is_none());
    }

    #[test]
    fn modular_max_affine_invariant(q in 2u64..=20, k in 2u32..=3, u in 1u64..20, v in 0u64..20) {
        let u = coprime_from(u % q, q);
        let inst = ModularInstance::new(q, k).unwrap();
        let mapped_d: Vec<u64> = {
            let mut m: Vec<u64> = inst.d.iter().map(|&x| arith::pow_mod(u, k as u64, q) * x % q).collect();
            m.sort_unstable();
            m
        };
        prop_assert_eq!(&mapped_d, &inst.d);
        let r = setlab::modular_search(q, k, SearchMode::Exhaustive).unwrap();
        let uk = arith::pow_mod(u, k as u64, q);
        let image: Vec<u64> = r.best.iter().map(|&b| (uk * b + v) % q).collect();
        prop_assert!(inst.verify(&image).is_none());
        prop_assert_eq!(setlab::modular_search(q, k, SearchMode::BranchBound { budget: u64::MAX }).unwrap().size, image.len());
    }

    #[test]
    fn lifts_always_verify(qi in 0usize..6, k in 2u32..=3, n in 10u64..20_000) {
        let q = [2u64, 3, 5, 6, 10, 15][qi];
        let best = setlab::modular_search(q, k, SearchMode::Exhaustive).unwrap().best;
        match setlab::ruzsa_lift(&best, q, k, n) {
            Ok(r) => {
                prop_assert!(r.instance.verify().is_ok());
                if n <= 5000 {
                    prop_assert!(setlab::verify_brute(&r.instance.generators, n, &r.instance.a).is_none());
                }
            }
            Err(e) => prop_assert!(false, "lift rejected: {e}"),
        }
    }
}

#[test]
fn exhaustive_max_monotone() {
    let gens = vec![IntPolynomial::monomial(1, 2)];
    let sizes: Vec<usize> = (1..=30).map(|n| setlab::exhaustive_max(n, gens.clone()).unwrap().a.len()).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    let two = vec![IntPolynomial::monomial(1, 2), IntPolynomial::monomial(1, 2)];
    let sizes2: Vec<usize> = (2..=20).map(|n| setlab::exhaustive_max(n, two.clone()).unwrap().a.len()).collect();
    assert!(sizes2.windows(2).all(|w| w[0] <= w[1]), "{sizes2:?}");
}
