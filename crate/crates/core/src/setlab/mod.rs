//! Difference-free sets: `A ⊆ [1, N]` with no difference `a - a'` in the
//! sumset `F = I(g_1) + ... + I(g_l)` of positive polynomial images.
//! Verification, greedy and trivial constructions, exact searches, the
//! modular lift, and density tables.

mod bitset;
mod clique;
mod modular;

pub use bitset::Bitset;
pub use clique::{max_clique, CliqueResult};
pub use modular::*;

use crate::auxiliary::image_with_preimages;
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

/// Largest `N` for which forbidden sets are built.
pub const SET_N_LIMIT: u64 = 1 << 28;
pub const EXHAUSTIVE_N_LIMIT: u64 = 40;

#[derive(Debug, Clone)]
pub struct DiffFreeInstance {
    pub n: u64,
    pub generators: Vec<IntPolynomial>,
    /// Sorted elements of `A`.
    pub a: Vec<u64>,
    /// `F ∩ [1, N-1]`, sorted.
    pub forbidden: Vec<u64>,
    images: Vec<Vec<(u64, u64)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Term {
    pub generator: usize,
    pub n: u64,
    pub value: u64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status")]
pub enum Verdict {
    Ok,
    Violation { a: u64, a_prime: u64, diff: u64, decomposition: Vec<Term> },
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    #[serde(rename = "N")]
    pub n: u64,
    pub generators: Vec<String>,
    pub size: usize,
    pub density: f64,
    pub forbidden_count: usize,
}

/// `F ∩ [1, n-1]` and each generator's `(value, n)` list.
fn forbidden_set(gens: &[IntPolynomial], n: u64) -> Result<(Vec<u64>, Vec<Vec<(u64, u64)>>)> {
    if gens.is_empty() {
        return Err(Error::domain("at least one generator is needed"));
    }
    if n == 0 || n > SET_N_LIMIT {
        return Err(Error::Resource(format!("N = {n} outside [1, {SET_N_LIMIT}]")));
    }
    let top = n - 1;
    let images = gens.iter().map(|g| image_with_preimages(g, top)).collect::<Result<Vec<_>>>()?;
    let width = n as usize;
    let mut acc = Bitset::from_indices(width, images[0].iter().map(|&(v, _)| v as usize));
    for img in &images[1..] {
        let mut next = Bitset::new(width);
        for &(v, _) in img {
            next.or_shifted_from(&acc, v as usize);
        }
        acc = next;
    }
    Ok((acc.iter().map(|v| v as u64).collect(), images))
}

impl DiffFreeInstance {
    pub fn new(n: u64, generators: Vec<IntPolynomial>, a: Vec<u64>) -> Result<Self> {
        let mut a = a;
        a.sort_unstable();
        a.dedup();
        if let Some(&bad) = a.iter().find(|&&x| x == 0 || x > n) {
            return Err(Error::domain(format!("element {bad} outside [1, {n}]")));
        }
        let (forbidden, images) = forbidden_set(&generators, n)?;
        Ok(DiffFreeInstance { n, generators, a, forbidden, images })
    }

    fn with_set(&self, a: Vec<u64>) -> Self {
        DiffFreeInstance { a, ..self.clone() }
    }

    pub fn density(&self) -> f64 {
        self.a.len() as f64 / self.n as f64
    }

    pub fn summary(&self) -> InstanceSummary {
        InstanceSummary {
            n: self.n,
            generators: self.generators.iter().map(|g| g.to_string()).collect(),
            size: self.a.len(),
            density: self.density(),
            forbidden_count: self.forbidden.len(),
        }
    }

    pub fn bitset(&self) -> Bitset {
        Bitset::from_indices(self.n as usize + 1, self.a.iter().map(|&x| x as usize))
    }

    /// Check every difference by shift-AND, one forbidden gap at a time;
    /// the smallest offending gap is reported.
    pub fn verify(&self) -> Verdict {
        let bits = self.bitset();
        for &f in &self.forbidden {
            if let Some(lo) = bits.first_pair_with_gap(f as usize) {
                let lo = lo as u64;
                return Verdict::Violation { a: lo + f, a_prime: lo, diff: f, decomposition: self.decompose(f) };
            }
        }
        Verdict::Ok
    }

    /// Generator values `g_i(n_i)` summing to `f`, if `f ∈ F`.
    pub fn decompose(&self, f: u64) -> Vec<Term> {
        fn go(images: &[Vec<(u64, u64)>], i: usize, rest: u64, out: &mut Vec<Term>) -> bool {
            if i + 1 == images.len() {
                return match images[i].binary_search_by_key(&rest, |&(v, _)| v) {
                    Ok(j) => {
                        out.push(Term { generator: i, n: images[i][j].1, value: rest });
                        true
                    }
                    Err(_) => false,
                };
            }
            for &(v, n) in &images[i] {
                if v >= rest {
                    break;
                }
                out.push(Term { generator: i, n, value: v });
                if go(images, i + 1, rest - v, out) {
                    return true;
                }
                out.pop();
            }
            false
        }
        let mut out = Vec::new();
        go(&self.images, 0, f, &mut out);
        out
    }
}

/// `d ∈ F` for `1 <= d < n`, by nested loops over directly evaluated
/// generator values. Shares nothing with [`DiffFreeInstance`].
pub fn brute_forbidden_table(gens: &[IntPolynomial], n: u64) -> Vec<bool> {
    let top = n.saturating_sub(1) as i128;
    let lists: Vec<Vec<i128>> = gens
        .iter()
        .map(|g| {
            let sign = if g.leading().is_negative() { -1 } else { 1 };
            let r: i128 = g.coeffs().iter().map(|c| c.abs().to_i128().unwrap_or(i128::MAX / 4)).sum();
            let cutoff = top + r + 2;
            let mut v: Vec<i128> = (1..=cutoff)
                .filter_map(|m| g.eval_i128(m).map(|y| y * sign))
                .filter(|&y| y >= 1 && y <= top)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut table = vec![false; n as usize];
    fn rec(lists: &[Vec<i128>], i: usize, partial: i128, top: i128, table: &mut [bool]) {
        if i == lists.len() {
            table[partial as usize] = true;
            return;
        }
        for &v in &lists[i] {
            if partial + v > top {
                break;
            }
            rec(lists, i + 1, partial + v, top, table);
        }
    }
    rec(&lists, 0, 0, top, &mut table);
    table
}

/// Quadratic double loop over pairs against [`brute_forbidden_table`];
/// returns the first offending `(a, a')` with `a > a'`.
pub fn verify_brute(gens: &[IntPolynomial], n: u64, a: &[u64]) -> Option<(u64, u64)> {
    let table = brute_forbidden_table(gens, n);
    for (i, &x) in a.iter().enumerate() {
        for &y in &a[..i] {
            let (hi, lo) = if x > y { (x, y) } else { (y, x) };
            if hi != lo && table[(hi - lo) as usize] {
                return Some((hi, lo));
            }
        }
    }
    None
}

/// Scan `1..=N`, keeping `n` when no kept `a` has `n - a ∈ F`.
pub fn greedy(n: u64, gens: Vec<IntPolynomial>) -> Result<DiffFreeInstance> {
    let inst = DiffFreeInstance::new(n, gens, vec![])?;
    let mut blocked = Bitset::new(n as usize + 1);
    let mut a = Vec::new();
    for x in 1..=n {
        if blocked.get(x as usize) {
            continue;
        }
        a.push(x);
        for &f in &inst.forbidden {
            if x + f > n {
                break;
            }
            blocked.set((x + f) as usize);
        }
    }
    Ok(inst.with_set(a))
}

/// `A = {xp : 1 <= x <= p^(k-1)}` for the largest prime `p <= N^(1/k)`,
/// which has `p >= N^(1/k) / 2`.
pub fn trivial_multiples(n: u64, k: u32) -> Result<DiffFreeInstance> {
    if k == 0 || (k < 64 && n < 1u64 << k) {
        return Err(Error::domain(format!("need N >= 2^k, got N={n}, k={k}")));
    }
    let root = num_integer::Roots::nth_root(&n, k);
    let p = (2..=root).rev().find(|&p| crate::arith::is_prime(p)).expect("2 <= N^(1/k)");
    assert!((2 * p as u128).pow(k) >= n as u128, "Bertrand");
    let a: Vec<u64> = (1..=p.pow(k - 1)).map(|x| x * p).collect();
    DiffFreeInstance::new(n, vec![IntPolynomial::monomial(1, k as usize)], a)
}

/// Largest difference-free subset of `[1, N]`, exactly (`N <= 40`).
pub fn exhaustive_max(n: u64, gens: Vec<IntPolynomial>) -> Result<DiffFreeInstance> {
    if n > EXHAUSTIVE_N_LIMIT {
        return Err(Error::domain(format!("exhaustive search needs N <= {EXHAUSTIVE_N_LIMIT}")));
    }
    let inst = DiffFreeInstance::new(n, gens, vec![])?;
    let size = n as usize;
    let bad = Bitset::from_indices(size, inst.forbidden.iter().map(|&f| f as usize));
    // compatible pairs: nonzero difference outside F
    let adj: Vec<Bitset> = (0..size)
        .map(|i| Bitset::from_indices(size, (0..size).filter(|&j| j != i && !bad.get(i.abs_diff(j)))))
        .collect();
    let r = max_clique(&adj, &[], Bitset::from_indices(size, 0..size), u64::MAX);
    Ok(inst.with_set(r.best.iter().map(|&i| i as u64 + 1).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableMethod {
    Greedy,
    Trivial,
    Exhaustive,
}

impl TableMethod {
    pub fn name(&self) -> &'static str {
        match self {
            TableMethod::Greedy => "greedy",
            TableMethod::Trivial => "trivial",
            TableMethod::Exhaustive => "exhaustive",
        }
    }
}

impl std::str::FromStr for TableMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(TableMethod::Greedy),
            "trivial" => Ok(TableMethod::Trivial),
            "exhaustive" => Ok(TableMethod::Exhaustive),
            _ => Err(Error::Parse(format!("unknown method {s}"))),
        }
    }
}

/// `(log N)^(-log log log log N)`, shape only; NaN where undefined.
pub fn fs_bound_shape(n: f64) -> f64 {
    let l = n.ln();
    let llll = l.ln().ln().ln();
    if l.ln().ln() <= 0.0 || !llll.is_finite() {
        return f64::NAN;
    }
    l.powf(-llll)
}

/// `exp(-(log N)^(1/2))`, shape only.
pub fn exp_bound_shape(n: f64) -> f64 {
    (-n.ln().sqrt()).exp()
}

fn fmt_shape(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.6e}")
    }
}

/// CSV rows `N,method,size,density,fs_bound_shape,exp_bound_shape`. The
/// trivial method uses `x^k` with `k` the degree of the first generator.
/// Methods that do not apply at some `N` are skipped.
pub fn density_table(ns: &[u64], gens: &[IntPolynomial], methods: &[TableMethod]) -> Result<String> {
    let mut out = String::from("N,method,size,density,fs_bound_shape,exp_bound_shape\n");
    for &n in ns {
        for m in methods {
            let inst = match m {
                TableMethod::Greedy => greedy(n, gens.to_vec())?,
                TableMethod::Trivial => {
                    let k = gens.first().map(|g| g.deg() as u32).unwrap_or(2);
                    if k == 0 || (k < 64 && n < 1 << k) {
                        continue;
                    }
                    trivial_multiples(n, k)?
                }
                TableMethod::Exhaustive => {
                    if n > EXHAUSTIVE_N_LIMIT {
                        continue;
                    }
                    exhaustive_max(n, gens.to_vec())?
                }
            };
            out.push_str(&format!(
                "{},{},{},{:.6e},{},{}\n",
                n,
                m.name(),
                inst.a.len(),
                inst.density(),
                fmt_shape(fs_bound_shape(n as f64)),
                fmt_shape(exp_bound_shape(n as f64))
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        IntPolynomial::parse(s).unwrap()
    }

    #[test]
    fn verify_examples() {
        let i = DiffFreeInstance::new(10, vec![p("x^2")], vec![1, 2]).unwrap();
        match i.verify() {
            Verdict::Violation { a, a_prime, diff, decomposition } => {
                assert_eq!((a, a_prime, diff), (2, 1, 1));
                assert_eq!((decomposition[0].n, decomposition[0].value), (1, 1));
            }
            Verdict::Ok => panic!(),
        }
        let i = DiffFreeInstance::new(20, vec![p("x^2")], vec![1, 3, 6, 8]).unwrap();
        assert!(i.verify().is_ok());
        let i = DiffFreeInstance::new(50, vec![p("x^2"), p("x^3")], vec![1, 40]).unwrap();
        // 39 is not a square plus a cube; the brute check must agree
        assert_eq!(i.verify().is_ok(), verify_brute(&i.generators, 50, &i.a).is_none());
        let i = DiffFreeInstance::new(50, vec![p("x^2"), p("x^3")], vec![3, 20]).unwrap();
        // 17 = 9 + 8
        match i.verify() {
            Verdict::Violation { diff, decomposition, .. } => {
                assert_eq!(diff, 17);
                assert_eq!(decomposition.iter().map(|t| t.value).sum::<u64>(), 17);
            }
            Verdict::Ok => panic!(),
        }
    }

    #[test]
    fn greedy_examples() {
        let g = greedy(25, vec![p("x^2")]).unwrap();
        // recorded from a direct simulation
        assert_eq!(g.a, vec![1, 3, 6, 8, 11, 13, 16, 18, 21, 23]);
        assert!(g.verify().is_ok());
        let lin = greedy(50, vec![p("x-3")]).unwrap();
        assert_eq!(lin.a, vec![1]);
    }

    #[test]
    fn trivial_examples() {
        let t = trivial_multiples(100, 2).unwrap();
        assert_eq!(t.a, (1..=7).map(|x| 7 * x).collect::<Vec<_>>());
        assert!(t.verify().is_ok());
        let t = trivial_multiples(8, 3).unwrap();
        assert_eq!(t.a, vec![2, 4, 6, 8]);
        assert!(t.verify().is_ok());
        assert!(trivial_multiples(7, 3).is_err());
    }

    #[test]
    fn exhaustive_examples() {
        assert_eq!(exhaustive_max(3, vec![p("x^2")]).unwrap().a.len(), 2);
        let e = exhaustive_max(10, vec![p("x^2")]).unwrap();
        assert!(e.verify().is_ok());
        // oracle: every subset of [1,10]
        let table = brute_forbidden_table(&[p("x^2")], 10);
        let best = (0u32..1 << 10)
            .filter(|&m| {
                let s: Vec<u64> = (0..10).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect();
                s.iter().all(|&x| s.iter().all(|&y| x <= y || !table[(x - y) as usize]))
            })
            .map(|m| m.count_ones())
            .max()
            .unwrap();
        assert_eq!(e.a.len() as u32, best);
        assert!(exhaustive_max(41, vec![p("x^2")]).is_err());
    }

    #[test]
    fn table_format() {
        let csv = density_table(&[10, 100], &[p("x^2")], &[TableMethod::Greedy, TableMethod::Trivial, TableMethod::Exhaustive]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "N,method,size,density,fs_bound_shape,exp_bound_shape");
        assert!(lines[1].starts_with("10,greedy,"));
        assert!(lines[1].contains(",nan,"));
        assert_eq!(lines.len(), 1 + 3 + 2);
    }
}
