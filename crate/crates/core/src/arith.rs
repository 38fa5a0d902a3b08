//! Machine-word number theory used throughout: primes, factorization,
//! modular arithmetic and CRT.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Primes `<= n` by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, smallest prime first.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> usize {
    factorize(n).len()
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// Combine `x = r1 mod m1` and `x = r2 mod m2` for coprime moduli.
pub fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> (u64, u64) {
    let m = m1 as u128 * m2 as u128;
    assert!(m <= u64::MAX as u128, "CRT modulus overflow");
    let inv = inv_mod(m1 % m2, m2).expect("CRT moduli must be coprime");
    // x = r1 + m1 * t with t = (r2 - r1) / m1 mod m2
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128) as u64;
    let t = mul_mod(diff, inv, m2);
    let x = (r1 as u128 + m1 as u128 * t as u128) % m;
    (x as u64, m as u64)
}

/// `p`-adic valuation of a nonzero big integer; `None` for zero.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        y = q;
    }
}

pub fn valuation_u64(mut x: u64, p: u64) -> Option<u32> {
    if x == 0 {
        return None;
    }
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    Some(v)
}

/// `p^e` if it fits in a `u64`.
pub fn checked_pow(p: u64, e: u32) -> Option<u64> {
    let mut r = 1u64;
    for _ in 0..e {
        r = r.checked_mul(p)?;
    }
    Some(r)
}

/// Least non-negative residue of a big integer.
pub fn big_mod(x: &BigInt, m: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(m));
    r.try_into().expect("residue fits")
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// `x = m 2^e` with `m` odd (or zero), exactly.
pub fn dyadic_parts(x: f64) -> (i64, i32) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mut m, mut e) = if exp == 0 { (frac, -1074) } else { (frac | (1 << 52), exp - 1075) };
    let tz = m.trailing_zeros();
    m >>= tz;
    e += tz as i32;
    (if x < 0.0 { -m } else { m }, e)
}

/// Exact comparison of `num / den` with a finite double `x`.
pub fn ratio_cmp(num: u128, den: u128, x: f64) -> std::cmp::Ordering {
    let (m, e) = dyadic_parts(x);
    let (mut lhs, mut rhs) = (BigInt::from(num), BigInt::from(m) * BigInt::from(den));
    if e < 0 {
        lhs <<= (-e) as usize;
    } else {
        rhs <<= e as usize;
    }
    lhs.cmp(&rhs)
}

/// Exact `num / den < x`.
pub fn ratio_lt(num: u128, den: u128, x: f64) -> bool {
    ratio_cmp(num, den, x).is_lt()
}
