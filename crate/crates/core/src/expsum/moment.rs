use super::pairwise_sum_f64;
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use crate::sieve::SieveProfile;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive};
use rustfft::FftPlanner;
use serde::Serialize;

pub const MOMENT_L_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, Serialize)]
pub struct MomentResult {
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "M")]
    pub big_m: u64,
    pub m: u32,
    pub w: f64,
    pub n_used: u64,
    pub value: f64,
}

/// The point masses `F[r] = sum g'(n)` over sieved `n <= M` with
/// `g(n) = r mod L`, and `M = floor((L / 3 b)^(1/k))`.
fn point_masses(g: &IntPolynomial, l: u64, profile: &SieveProfile) -> Result<(Vec<i128>, u64, u64)> {
    if l == 0 || l > MOMENT_L_LIMIT {
        return Err(Error::Resource(format!("L = {l} outside [1, {MOMENT_L_LIMIT}]")));
    }
    let b = g.leading();
    if g.deg() < 1 || !b.is_positive() {
        return Err(Error::domain("needs a positive leading coefficient"));
    }
    let big_m: BigInt = num_integer::Roots::nth_root(&(BigInt::from(l) / (b * 3)), g.deg() as u32);
    let big_m = big_m.to_u64().unwrap();
    let mp = g.reduce_mod(l);
    let gp = g.derivative();
    let mut f = vec![0i128; l as usize];
    let mut used = 0;
    for n in 1..=big_m {
        if !profile.w_member(n) {
            continue;
        }
        let w = gp.eval_i128(n as i128).ok_or_else(|| Error::Resource("weight overflow".into()))?;
        f[mp.eval(n) as usize] += w;
        used += 1;
    }
    Ok((f, big_m, used))
}

/// `S(t) = (1/wL) sum_{n <= M, n in W(Y)} g'(n) e(g(n) t / L)` for all `t`,
/// by one inverse DFT of the point masses.
pub fn s_values(g: &IntPolynomial, l: u64, profile: &SieveProfile) -> Result<(Vec<Complex64>, u64, u64)> {
    let (f, big_m, used) = point_masses(g, l, profile)?;
    let scale = 1.0 / (profile.density() * l as f64);
    let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v as f64, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(l as usize).process(&mut buf);
    for z in buf.iter_mut() {
        *z *= scale;
    }
    Ok((buf, big_m, used))
}

/// `sum_t |S(t)|^m` for even `m`.
pub fn moment_sum(g: &IntPolynomial, l: u64, m: u32, profile: &SieveProfile) -> Result<MomentResult> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::domain("m must be a positive even integer"));
    }
    let (s, big_m, used) = s_values(g, l, profile)?;
    let powers: Vec<f64> = s.iter().map(|z| z.norm_sqr().powi(m as i32 / 2)).collect();
    Ok(MomentResult { l, big_m, m, w: profile.density(), n_used: used, value: pairwise_sum_f64(&powers) })
}

/// The second moment two ways: through the DFT, and as
/// `L sum_r F[r]^2 / (wL)^2` from exact integer point masses.
pub fn plancherel_check(g: &IntPolynomial, l: u64, profile: &SieveProfile) -> Result<(f64, f64)> {
    let via_fft = moment_sum(g, l, 2, profile)?.value;
    let (f, _, _) = point_masses(g, l, profile)?;
    let energy: BigInt = f.iter().map(|&v| BigInt::from(v) * v).sum();
    let wl = profile.density() * l as f64;
    Ok((via_fft, energy.to_f64().unwrap() * l as f64 / (wl * wl)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    #[test]
    fn plancherel_two_routes() {
        let g = p("x^2");
        let prof = SieveProfile::new(g.clone(), 10.0).unwrap();
        for l in [3000u64, 3001, 4096] {
            let (a, b) = plancherel_check(&g, l, &prof).unwrap();
            assert!((a - b).abs() <= 1e-6 * b, "L={l}: {a} vs {b}");
        }
    }

    #[test]
    fn single_term_case() {
        let g = p("x^2");
        let prof = SieveProfile::new(g.clone(), 1.0).unwrap();
        // L < 12 gives M = 1
        let r = moment_sum(&g, 10, 4, &prof).unwrap();
        assert_eq!(r.big_m, 1);
        let want = 10.0 * (2.0 / 10.0f64).powi(4);
        assert!((r.value - want).abs() < 1e-12);
        assert!(moment_sum(&g, 10, 3, &prof).is_err());
    }

    #[test]
    fn direct_s_matches_dft() {
        let g = p("2x^2-5x+3");
        let prof = SieveProfile::new(g.clone(), 7.0).unwrap();
        let l = 997;
        let (s, big_m, _) = s_values(&g, l, &prof).unwrap();
        let w = prof.density();
        for t in [0u64, 1, 5, 500] {
            let direct: Complex64 = (1..=big_m)
                .filter(|&n| prof.w_member(n))
                .map(|n| {
                    let r = g.eval_i64(n as i64);
                    let ph = crate::arith::big_mod(&(r * t), l) as f64 / l as f64;
                    super::super::e(ph) * (4.0 * n as f64 - 5.0)
                })
                .sum::<Complex64>()
                / (w * l as f64);
            assert!((direct - s[t as usize]).norm() < 1e-9);
        }
    }
}
