//! Sets `B ⊆ Z/q` with no nonzero difference a k-th power residue, and the
//! base-q digit lift into `[1, N]`.

use super::bitset::Bitset;
use super::clique::max_clique_seeded;
use super::{DiffFreeInstance, Verdict};
use crate::arith::{gcd, is_squarefree, pow_mod};
use crate::error::{Error, Result};
use crate::poly::IntPolynomial;
use serde::Serialize;

pub const EXHAUSTIVE_Q_LIMIT: u64 = 32;

#[derive(Debug, Clone, Serialize)]
pub struct ModularInstance {
    pub q: u64,
    pub k: u32,
    /// Nonzero values of `x^k mod q`.
    #[serde(rename = "D")]
    pub d: Vec<u64>,
    pub symmetric: bool,
    /// `D ∪ -D`, which the searches use.
    pub d_sym: Vec<u64>,
}

impl ModularInstance {
    pub fn new(q: u64, k: u32) -> Result<Self> {
        if q == 0 || k == 0 {
            return Err(Error::domain("q and k must be positive"));
        }
        if q > 1 << 24 {
            return Err(Error::Resource(format!("q = {q} too large")));
        }
        let mut mark = vec![false; q as usize];
        for x in 0..q {
            mark[pow_mod(x, k as u64, q) as usize] = true;
        }
        mark[0] = false;
        let d: Vec<u64> = (0..q).filter(|&r| mark[r as usize]).collect();
        let symmetric = d.iter().all(|&r| mark[(q - r) as usize]);
        let d_sym: Vec<u64> = (1..q).filter(|&r| mark[r as usize] || mark[(q - r) as usize]).collect();
        Ok(ModularInstance { q, k, d, symmetric, d_sym })
    }

    fn forbidden_bits(&self) -> Bitset {
        Bitset::from_indices(self.q as usize, self.d_sym.iter().map(|&r| r as usize))
    }

    /// First pair `(b, b')` of `B` with `b - b' mod q` in `D ∪ -D`.
    pub fn verify(&self, b: &[u64]) -> Option<(u64, u64)> {
        let bad = self.forbidden_bits();
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[..i] {
                let diff = (x % self.q + self.q - y % self.q) % self.q;
                if diff == 0 || bad.get(diff as usize) {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    BranchBound { budget: u64 },
}

#[derive(Debug, Clone, Serialize)]
pub struct ModularSearch {
    pub q: u64,
    pub k: u32,
    pub best: Vec<u64>,
    pub size: usize,
    pub optimal: bool,
    pub nodes: u64,
    /// Colouring bound on the maximum size.
    pub upper_bound: usize,
    pub verified: bool,
    pub exponent: f64,
}

/// `c = (k - 1 + log|B| / log q) / k`.
pub fn ruzsa_exponent(q: u64, b_size: usize, k: u32) -> f64 {
    (k as f64 - 1.0 + (b_size as f64).ln() / (q as f64).ln()) / k as f64
}

/// Maximum `B` in the Cayley graph complement of `(Z/q, D ∪ -D)`.
///
/// Translations let 0 be fixed. Multiplication by a unit `w^k` fixes 0 and
/// preserves `D`, so the second element is taken as the least member of
/// its orbit; one seeded clique search runs per orbit representative, with
/// a shared node budget.
pub fn modular_search(q: u64, k: u32, mode: SearchMode) -> Result<ModularSearch> {
    let budget = match mode {
        SearchMode::Exhaustive if q > EXHAUSTIVE_Q_LIMIT => {
            return Err(Error::domain(format!("exhaustive mode needs q <= {EXHAUSTIVE_Q_LIMIT}")));
        }
        SearchMode::Exhaustive => u64::MAX,
        SearchMode::BranchBound { budget } => budget,
    };
    let inst = ModularInstance::new(q, k)?;
    let n = q as usize;
    let bad = inst.forbidden_bits();
    let adj: Vec<Bitset> = (0..n)
        .map(|i| Bitset::from_indices(n, (0..n).filter(|&j| j != i && !bad.get((j + n - i) % n))))
        .collect();
    let cand0 = adj[0].clone();
    let mults: Vec<u64> = {
        let mut m: Vec<u64> = (1..q).filter(|&w| gcd(w, q) == 1).map(|w| pow_mod(w, k as u64, q)).collect();
        m.sort_unstable();
        m.dedup();
        m
    };
    let reps: Vec<usize> = cand0
        .iter()
        .filter(|&v| mults.iter().all(|&u| (u * v as u64 % q) as usize >= v))
        .collect();

    let root = super::clique::max_clique(&adj, &[0], Bitset::new(n), 0);
    let mut best = root.best;
    let upper_bound = 1 + colour_bound(&adj, &cand0);
    let mut nodes = 0u64;
    let mut optimal = true;
    for &v in &reps {
        if best.len() >= upper_bound {
            break;
        }
        let left = budget.saturating_sub(nodes);
        if left == 0 {
            optimal = false;
            break;
        }
        let cand = cand0.and(&adj[v]);
        let r = max_clique_seeded(&adj, &[0, v], cand, left, best);
        nodes += r.nodes;
        best = r.best;
        if !r.optimal {
            optimal = false;
            break;
        }
    }
    let best: Vec<u64> = best.into_iter().map(|x| x as u64).collect();
    let verified = inst.verify(&best).is_none();
    assert!(verified, "clique search returned an invalid set");
    Ok(ModularSearch {
        q,
        k,
        size: best.len(),
        exponent: ruzsa_exponent(q, best.len().max(1), k),
        best,
        optimal,
        nodes,
        upper_bound,
        verified,
    })
}

fn colour_bound(adj: &[Bitset], p: &Bitset) -> usize {
    let mut left = p.clone();
    let mut k = 0;
    while !left.is_empty() {
        k += 1;
        let mut q = left.clone();
        while let Some(v) = q.first() {
            q.clear(v);
            q.and_not_assign(&adj[v]);
            left.clear(v);
        }
    }
    k
}

#[derive(Debug, Clone, Serialize)]
pub struct RuzsaLift {
    pub q: u64,
    pub k: u32,
    /// `B` translated so that it contains 0, reduced into `[0, q)`.
    pub digits: Vec<u64>,
    pub exponent: f64,
    pub size: usize,
    #[serde(rename = "N")]
    pub n: u64,
    /// `log |A| / log N`.
    pub observed_exponent: f64,
    #[serde(skip)]
    pub instance: DiffFreeInstance,
}

/// `A = {m + 1 : 0 <= m < N}` restricted so the base-q digits of `m` at
/// positions `0, k, 2k, ...` lie in `B` (translated to contain 0); the other
/// digits are free. The result is always re-verified against `x^k`.
pub fn ruzsa_lift(b: &[u64], q: u64, k: u32, n: u64) -> Result<RuzsaLift> {
    if q < 2 || !is_squarefree(q) {
        return Err(Error::domain(format!("q = {q} must be squarefree and at least 2")));
    }
    if b.is_empty() {
        return Err(Error::domain("B is empty"));
    }
    let inst = ModularInstance::new(q, k)?;
    if let Some((x, y)) = inst.verify(b) {
        return Err(Error::ConstructionRejected { a: x, b: y, diff: (x + q - y % q) % q });
    }
    let shift = b[0] % q;
    let mut digits: Vec<u64> = b.iter().map(|&x| (x % q + q - shift) % q).collect();
    digits.sort_unstable();
    let allowed = Bitset::from_indices(q as usize, digits.iter().map(|&d| d as usize));
    let a: Vec<u64> = (0..n)
        .filter(|&m| {
            let (mut m, mut pos) = (m, 0u32);
            while m > 0 {
                if pos % k == 0 && !allowed.get((m % q) as usize) {
                    return false;
                }
                m /= q;
                pos += 1;
            }
            true
        })
        .map(|m| m + 1)
        .collect();
    let instance = DiffFreeInstance::new(n, vec![IntPolynomial::monomial(1, k as usize)], a)?;
    if let Verdict::Violation { a, a_prime, diff, .. } = instance.verify() {
        return Err(Error::ConstructionRejected { a, b: a_prime, diff });
    }
    let size = instance.a.len();
    Ok(RuzsaLift {
        q,
        k,
        digits,
        exponent: ruzsa_exponent(q, b.len(), k),
        size,
        n,
        observed_exponent: (size as f64).ln() / (n as f64).ln(),
        instance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residues() {
        let i = ModularInstance::new(5, 2).unwrap();
        assert_eq!(i.d, vec![1, 4]);
        assert!(i.symmetric);
        let i = ModularInstance::new(205, 2).unwrap();
        assert_eq!(i.d.len(), 62);
        assert!(i.symmetric);
        let i = ModularInstance::new(7, 3).unwrap();
        assert_eq!(i.d, vec![1, 6]);
        let i = ModularInstance::new(7, 2).unwrap();
        assert!(!i.symmetric);
        assert_eq!(i.d_sym, (1..7).collect::<Vec<_>>());
    }

    #[test]
    fn small_searches() {
        let r = modular_search(5, 2, SearchMode::Exhaustive).unwrap();
        assert_eq!((r.size, r.optimal), (2, true));
        let r = modular_search(2, 2, SearchMode::Exhaustive).unwrap();
        assert_eq!(r.size, 1);
        assert!(modular_search(33, 2, SearchMode::Exhaustive).is_err());
        // subset oracle for every q <= 16
        for q in 1..=16u64 {
            let inst = ModularInstance::new(q, 2).unwrap();
            let best = (1u32..1 << q)
                .filter(|&m| {
                    let b: Vec<u64> = (0..q).filter(|i| m >> i & 1 == 1).collect();
                    inst.verify(&b).is_none()
                })
                .map(|m| m.count_ones() as usize)
                .max()
                .unwrap();
            assert_eq!(modular_search(q, 2, SearchMode::Exhaustive).unwrap().size, best, "q={q}");
        }
    }

    #[test]
    fn exponents() {
        assert!((ruzsa_exponent(205, 12, 2) - 0.7334).abs() < 1e-4);
        assert!((ruzsa_exponent(5, 2, 2) - 0.7153).abs() < 1e-4);
    }

    #[test]
    fn lifts() {
        let r = ruzsa_lift(&[0], 2, 2, 100).unwrap();
        assert!(r.instance.verify().is_ok());
        assert_eq!(r.size, 8);
        let r = ruzsa_lift(&[0, 2], 5, 2, 10_000).unwrap();
        assert!(r.instance.verify().is_ok());
        assert!(r.size > 100);
        assert!(matches!(ruzsa_lift(&[0, 1], 5, 2, 100), Err(Error::ConstructionRejected { .. })));
    }
}
