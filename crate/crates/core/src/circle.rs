//! Discrete circle method over `Z_N`: the normalized DFT
//! `F^(t) = (1/N) sum_x F(x) e(-xt/N)`, major and minor arcs, arc masses, and
//! the L^2 density increment that turns arc mass into a denser progression.
//!
//! Arcs use the circular distance: `t` is in `M_{a,q}(N,K)` when
//! `||t/N - a/q|| < K/N`, decided in exact arithmetic.

use crate::arith;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

pub const DFT_N_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone)]
pub struct FourierData {
    pub n: u64,
    pub values: Vec<Complex64>,
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 || n > DFT_N_LIMIT {
        return Err(Error::Resource(format!("N = {n} outside [1, {DFT_N_LIMIT}]")));
    }
    Ok(())
}

/// Indicator of `a` as a vector over `Z_N`, with `N` stored at index 0.
fn indicator(a: &[u64], n: u64) -> Result<Vec<Complex64>> {
    let mut v = vec![Complex64::new(0.0, 0.0); n as usize];
    for &x in a {
        if x == 0 || x > n {
            return Err(Error::domain(format!("element {x} outside [1, {n}]")));
        }
        v[(x % n) as usize] = Complex64::new(1.0, 0.0);
    }
    Ok(v)
}

fn forward(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.len();
    FftPlanner::new().plan_fft_forward(n).process(&mut v);
    v
}

fn inverse(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = v.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut v);
    v
}

pub fn dft_indicator(a: &[u64], n: u64) -> Result<FourierData> {
    check_n(n)?;
    dft_function(indicator(a, n)?)
}

/// Normalized DFT of an arbitrary function on `Z_N`.
pub fn dft_function(f: Vec<Complex64>) -> Result<FourierData> {
    let n = f.len() as u64;
    check_n(n)?;
    let scale = 1.0 / n as f64;
    let values = forward(f).into_iter().map(|z| z * scale).collect();
    Ok(FourierData { n, values })
}

impl FourierData {
    /// `sum_t |F^(t)|^2`.
    pub fn mass(&self) -> f64 {
        crate::expsum::pairwise_sum_f64(&self.values.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())
    }

    /// `F(x) = sum_t F^(t) e(xt/N)`.
    pub fn invert(&self) -> Vec<Complex64> {
        inverse(self.values.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum ArcLabel {
    Zero,
    Major { a: u64, q: u64 },
    Minor,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArcParams {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "Q")]
    pub q_max: u64,
}

impl ArcParams {
    pub fn new(n: u64, k: f64, q_max: u64) -> Result<Self> {
        if n == 0 || !(k > 0.0) || !k.is_finite() || q_max == 0 {
            return Err(Error::domain("need N >= 1, K > 0, Q >= 1"));
        }
        Ok(ArcParams { n, k, q_max })
    }

    /// `2 K Q^2 < N`, under which distinct fractions have disjoint arcs.
    pub fn disjoint(&self) -> bool {
        arith::ratio_cmp(self.n as u128, 2 * (self.q_max as u128).pow(2), self.k).is_gt()
    }
}

/// `||t/N - a/q|| < K/N`, exactly.
pub fn in_arc(t: u64, a: u64, q: u64, n: u64, k: f64) -> bool {
    let nq = n as u128 * q as u128;
    let r = ((t as u128 % n as u128) * q as u128 + nq - (a as u128 % q as u128) * n as u128) % nq;
    let dist = r.min(nq - r);
    arith::ratio_lt(dist, q as u128, k)
}

/// Integers `t` with `|t - aN/q| < K + 1`, reduced mod `N` (every `t` once).
fn window(a: u64, q: u64, n: u64, k: f64) -> Box<dyn Iterator<Item = u64>> {
    if 2.0 * k + 3.0 >= n as f64 {
        return Box::new(0..n);
    }
    let c = a as f64 * n as f64 / q as f64;
    let lo = (c - k).floor() as i64 - 1;
    let hi = (c + k).ceil() as i64 + 1;
    Box::new((lo..=hi).map(move |t| t.rem_euclid(n as i64) as u64))
}

/// Members of `M_{a,q}(N,K)` other than 0, sorted.
pub fn arc_members(a: u64, q: u64, n: u64, k: f64) -> Vec<u64> {
    let mut v: Vec<u64> = window(a, q, n, k).filter(|&t| t != 0 && in_arc(t, a, q, n, k)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `M_q(N,K)`: the union over reduced `a/q`, without 0.
pub fn arc_set(q: u64, n: u64, k: f64) -> Vec<u64> {
    let mut v: Vec<u64> = (0..q).filter(|&a| arith::gcd(a, q) == 1).flat_map(|a| arc_members(a, q, n, k)).collect();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn classify(t: u64, p: &ArcParams) -> ArcLabel {
    let t = t % p.n;
    if t == 0 {
        return ArcLabel::Zero;
    }
    for q in 1..=p.q_max {
        // the nearest numerators are the only candidates unless K is large
        let c = t as f64 * q as f64 / p.n as f64;
        let span = p.k * q as f64 / p.n as f64;
        let (lo, hi) = ((c - span).floor() as i64 - 1, (c + span).ceil() as i64 + 1);
        let cands: Vec<u64> = if hi - lo >= q as i64 {
            (0..q).collect()
        } else {
            let mut v: Vec<u64> = (lo..=hi).map(|a| a.rem_euclid(q as i64) as u64).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        for a in cands {
            if arith::gcd(a, q) == 1 && in_arc(t, a, q, p.n, p.k) {
                return ArcLabel::Major { a, q };
            }
        }
    }
    ArcLabel::Minor
}

/// Number of `(a, q)` with `q <= Q` whose arc contains each `t`.
pub fn major_label_counts(p: &ArcParams) -> Vec<u32> {
    let mut counts = vec![0u32; p.n as usize];
    for q in 1..=p.q_max {
        for t in arc_set_by_fraction(q, p) {
            counts[t as usize] += 1;
        }
    }
    counts
}

fn arc_set_by_fraction(q: u64, p: &ArcParams) -> Vec<u64> {
    (0..q).filter(|&a| arith::gcd(a, q) == 1).flat_map(|a| arc_members(a, q, p.n, p.k)).collect()
}

/// `sum_{t in M_q(N,K)} |F^(t)|^2`.
pub fn arc_mass(fd: &FourierData, q: u64, k: f64) -> f64 {
    arc_set(q, fd.n, k).iter().map(|&t| fd.values[t as usize].norm_sqr()).sum()
}

/// Mass on `M'_q(N,K)`, the union of `M_r(N,K)` over `r | q`.
pub fn arc_mass_divisors(fd: &FourierData, q: u64, k: f64) -> f64 {
    let mut ts: Vec<u64> = (1..=q).filter(|r| q % r == 0).flat_map(|r| arc_set(r, fd.n, k)).collect();
    ts.sort_unstable();
    ts.dedup();
    ts.iter().map(|&t| fd.values[t as usize].norm_sqr()).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct Progression {
    /// Elements are `start + l step` for `1 <= l <= length`.
    pub start: i64,
    pub step: u64,
    pub length: u64,
    pub count: u64,
    pub density: f64,
    pub sigma: f64,
    /// `sigma (1 + theta/16)`.
    pub target_density: f64,
    /// `X = floor(min(theta, 1/K) L / 16q)`.
    pub x_param: u64,
    /// Least length the construction promises: `X`, or `ceil(sigma X / 2)`
    /// after a wrap split.
    pub length_floor: u64,
    /// `wrap_free`, `split` or `bounded`.
    pub branch: &'static str,
    pub mass: f64,
    pub needed_mass: f64,
    pub max_round_err: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum IncrementOutcome {
    Progression(Progression),
    NoIncrement { reason: String, mass: f64, needed_mass: f64 },
}

/// Count `|B ∩ P|` directly for a sorted `B`.
pub fn count_in_progression(b: &[u64], start: i64, step: u64, length: u64) -> u64 {
    (1..=length as i64)
        .filter(|&l| {
            let v = start + l * step as i64;
            v >= 1 && b.binary_search(&(v as u64)).is_ok()
        })
        .count() as u64
}

/// The L^2 density increment: from mass `>= theta sigma^2` on `M'_q(L,K)`,
/// a progression of step `q` on which `B` has density `>= sigma (1 + theta/16)`.
pub fn extract_progression(b: &[u64], l: u64, q: u64, k: f64, theta: f64) -> Result<IncrementOutcome> {
    if !(theta > 0.0 && theta <= 1.0) || !(k > 0.0) || q == 0 {
        return Err(Error::domain("need 0 < theta <= 1, K > 0, q >= 1"));
    }
    let mut b = b.to_vec();
    b.sort_unstable();
    b.dedup();
    if b.is_empty() {
        return Err(Error::domain("B is empty"));
    }
    let size = b.len() as u64;
    let sigma = size as f64 / l as f64;
    let fd = dft_indicator(&b, l)?;
    let mass = arc_mass_divisors(&fd, q, k);
    let needed_mass = theta * sigma * sigma;
    if mass < needed_mass {
        return Ok(IncrementOutcome::NoIncrement { reason: "arc mass below theta sigma^2".into(), mass, needed_mass });
    }
    let x = (theta.min(1.0 / k) * l as f64 / (16.0 * q as f64)).floor() as u64;
    if x == 0 {
        return Ok(IncrementOutcome::NoIncrement { reason: "X = 0".into(), mass, needed_mass });
    }

    // c(x) = |B ∩ (P + x)| with P = {q, 2q, ..., Xq} in Z_L, by correlation
    let mut pv = vec![Complex64::new(0.0, 0.0); l as usize];
    for i in 1..=x {
        pv[((i * q) % l) as usize] = Complex64::new(1.0, 0.0);
    }
    let fb = forward(indicator(&b, l)?);
    let fp = forward(pv);
    let prod: Vec<Complex64> = fb.iter().zip(&fp).map(|(u, v)| u * v.conj()).collect();
    let raw = inverse(prod);
    let mut max_round_err = 0f64;
    let counts: Vec<u64> = raw
        .iter()
        .map(|z| {
            let v = z.re / l as f64;
            let r = v.round();
            max_round_err = max_round_err.max((v - r).abs());
            r.max(0.0) as u64
        })
        .collect();
    if max_round_err > 0.25 {
        return Err(Error::Resource(format!("convolution rounding error {max_round_err}")));
    }
    let target_density = sigma * (1.0 + theta / 16.0);
    let make = |start: i64, length: u64, floor: u64, branch: &'static str| {
        let count = count_in_progression(&b, start, q, length);
        let density = count as f64 / length as f64;
        let inside = start + q as i64 >= 1 && start + (length * q) as i64 <= l as i64;
        Progression {
            start,
            step: q,
            length,
            count,
            density,
            sigma,
            target_density,
            x_param: x,
            length_floor: floor,
            branch,
            mass,
            needed_mass,
            max_round_err,
            verified: inside && length >= floor && density >= target_density,
        }
    };

    // some translate beats twice the expected count
    let (best_x, best) = counts.iter().enumerate().fold((0usize, 0u64), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    if best as u128 * l as u128 > 2 * size as u128 * x as u128 {
        let x0 = best_x as i64;
        if x0 + (x * q) as i64 <= l as i64 {
            return Ok(IncrementOutcome::Progression(make(x0, x, x, "wrap_free")));
        }
        let l1 = (l as i64 - x0) / q as i64;
        let l1 = l1 as u64; // terms before the wrap
        let floor = (sigma * x as f64 / 2.0).ceil() as u64;
        let p1 = (l1 > 0).then(|| make(x0, l1, floor, "split"));
        let p2 = (l1 < x).then(|| make(x0 + (l1 * q) as i64 - l as i64, x - l1, floor, "split"));
        let excess = |p: &Progression| p.count as f64 - sigma * p.length as f64;
        let pick = match (p1, p2) {
            (Some(a), Some(c)) => {
                if excess(&c) > excess(&a) {
                    c
                } else {
                    a
                }
            }
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!("X >= 1"),
        };
        return Ok(IncrementOutcome::Progression(pick));
    }

    // bounded case: some x in E (no wrap) reaches sigma (1 + theta/16) X
    let e_best = counts
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as u64) + x * q < l)
        .fold(None::<(usize, u64)>, |acc, (i, &c)| match acc {
            Some((_, bc)) if bc >= c => acc,
            _ => Some((i, c)),
        });
    if let Some((i, c)) = e_best {
        if c as f64 >= target_density * x as f64 {
            return Ok(IncrementOutcome::Progression(make(i as i64, x, x, "bounded")));
        }
    }
    Ok(IncrementOutcome::NoIncrement { reason: "no translate in E reaches the target".into(), mass, needed_mass })
}

#[cfg(test)]
mod tests {
    use super::*;

    // direct O(N^2) transform, F^(t) = N^-1 sum_x f(x) e(-xt/N)
    fn dft_direct(a: &[u64], n: u64) -> Vec<Complex64> {
        (0..n)
            .map(|t| {
                let s: Complex64 = a
                    .iter()
                    .map(|&x| Complex64::from_polar(1.0, -std::f64::consts::TAU * ((x * t) % n) as f64 / n as f64))
                    .sum();
                s / n as f64
            })
            .collect()
    }

    #[test]
    fn dft_matches_direct() {
        for n in [1u64, 2, 97, 120, 210, 256] {
            let a: Vec<u64> = (1..=n).filter(|x| (x * x + 3 * x) % 7 < 3).collect();
            let fd = dft_indicator(&a, n).unwrap();
            let want = dft_direct(&a, n);
            for (t, (got, w)) in fd.values.iter().zip(&want).enumerate() {
                assert!((got - w).norm() < 1e-12, "N={n} t={t}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn dft_examples() {
        let n = 64;
        let full: Vec<u64> = (1..=n).collect();
        let fd = dft_indicator(&full, n).unwrap();
        assert!((fd.values[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(fd.values[1..].iter().all(|z| z.norm() < 1e-9));
        let fd = dft_indicator(&[17], n).unwrap();
        assert!(fd.values.iter().all(|z| (z.norm() - 1.0 / 64.0).abs() < 1e-12));
        let m5: Vec<u64> = (1..=20).map(|i| 5 * i).collect();
        let fd = dft_indicator(&m5, 100).unwrap();
        for t in 0..100 {
            let want = if t % 20 == 0 { 0.2 } else { 0.0 };
            assert!((fd.values[t].norm() - want).abs() < 1e-9);
        }
        assert!((fd.mass() - 0.2).abs() < 1e-12);
        let back = fd.invert();
        assert!(back.iter().enumerate().all(|(x, z)| (z.re - if x % 5 == 0 { 1.0 } else { 0.0 }).abs() < 1e-9));
    }

    #[test]
    fn classify_examples() {
        let p = ArcParams::new(1000, 5.0, 9).unwrap();
        assert_eq!(classify(0, &p), ArcLabel::Zero);
        assert_eq!(classify(333, &p), ArcLabel::Major { a: 1, q: 3 });
        let p = ArcParams::new(1000, 2.0, 3).unwrap();
        assert_eq!(classify(387, &p), ArcLabel::Minor);
        // strict inequality at the boundary: |t/N - 0| = K/N is out
        let p = ArcParams::new(100, 3.0, 1).unwrap();
        assert_eq!(classify(2, &p), ArcLabel::Major { a: 0, q: 1 });
        assert_eq!(classify(3, &p), ArcLabel::Minor);
        assert_eq!(classify(98, &p), ArcLabel::Major { a: 0, q: 1 });
    }

    #[test]
    fn arc_mass_examples() {
        let full: Vec<u64> = (1..=100).collect();
        let fd = dft_indicator(&full, 100).unwrap();
        assert!(arc_mass(&fd, 3, 2.0) < 1e-12);
        let m5: Vec<u64> = (1..=20).map(|i| 5 * i).collect();
        let fd = dft_indicator(&m5, 100).unwrap();
        assert!((arc_mass(&fd, 5, 1.0) - 0.16).abs() < 1e-9);
    }

    #[test]
    fn increment_examples() {
        let b: Vec<u64> = (1..=10_000 / 7).map(|i| 7 * i).collect();
        match extract_progression(&b, 10_000, 7, 1.0, 0.5).unwrap() {
            IncrementOutcome::Progression(p) => {
                assert!(p.verified);
                assert_eq!(p.density, 1.0);
                assert_eq!(p.step, 7);
            }
            other => panic!("{other:?}"),
        }
        let l = 4000;
        let half: Vec<u64> = (1..=l / 2).collect();
        match extract_progression(&half, l, 1, 2.0, 0.25).unwrap() {
            IncrementOutcome::Progression(p) => {
                assert!(p.verified);
                assert!(p.density >= 0.5 * (1.0 + 0.25 / 16.0));
            }
            other => panic!("{other:?}"),
        }
        // with K = 1 the arc around 0 holds no nonzero frequency
        assert!(matches!(extract_progression(&half, l, 1, 1.0, 0.25).unwrap(), IncrementOutcome::NoIncrement { .. }));
    }

    #[test]
    fn split_branch_picks_a_valid_piece() {
        // multiples of 3 at both ends of [1, L]: the best translate wraps
        let l = 2001u64;
        let b: Vec<u64> = (1..=l).filter(|&v| v % 3 == 0 && (v <= 60 || v > l - 60)).collect();
        match extract_progression(&b, l, 3, 1.0, 1.0).unwrap() {
            IncrementOutcome::Progression(p) => {
                assert_eq!(p.branch, "split");
                // x = 1938 ties x = 1941 and wins; its wrapped piece {3, ..., 60} has the larger excess
                assert_eq!((p.start, p.length, p.count), (0, 20, 20));
                assert!(p.verified, "{p:?}");
            }
            other => panic!("{other:?}"),
        }
    }
}
