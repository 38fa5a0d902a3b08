//! Maximum clique by branch and bound with greedy-colouring bounds (the
//! MCQ scheme). Independent sets are cliques of the complement graph.

use super::bitset::Bitset;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CliqueResult {
    pub best: Vec<usize>,
    /// The search finished inside the budget, so `best` is maximum.
    pub optimal: bool,
    pub nodes: u64,
    /// Colouring bound at the root.
    pub upper_bound: usize,
}

struct Search<'a> {
    adj: &'a [Bitset],
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl Search<'_> {
    /// Vertices of `p` in colour order, with the colour of each.
    fn colour_sort(&self, p: &Bitset) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::with_capacity(p.count());
        let mut colours = Vec::with_capacity(order.capacity());
        let mut left = p.clone();
        let mut k = 0;
        while !left.is_empty() {
            k += 1;
            let mut q = left.clone();
            while let Some(v) = q.first() {
                q.clear(v);
                q.and_not_assign(&self.adj[v]);
                left.clear(v);
                order.push(v);
                colours.push(k);
            }
        }
        (order, colours)
    }

    fn expand(&mut self, c: &mut Vec<usize>, mut p: Bitset) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        let (order, colours) = self.colour_sort(&p);
        for i in (0..order.len()).rev() {
            if c.len() + colours[i] <= self.best.len() {
                return;
            }
            let v = order[i];
            c.push(v);
            let np = p.and(&self.adj[v]);
            if np.is_empty() {
                if c.len() > self.best.len() {
                    self.best = c.clone();
                }
            } else {
                self.expand(c, np);
            }
            c.pop();
            p.clear(v);
            if self.aborted {
                return;
            }
        }
    }
}

/// Largest clique containing `fixed` (all of it), searched over `candidates`.
pub fn max_clique(adj: &[Bitset], fixed: &[usize], candidates: Bitset, budget: u64) -> CliqueResult {
    max_clique_seeded(adj, fixed, candidates, budget, fixed.to_vec())
}

/// As [`max_clique`], but only cliques larger than `incumbent` are kept;
/// `incumbent` is returned when none is found.
pub fn max_clique_seeded(
    adj: &[Bitset],
    fixed: &[usize],
    candidates: Bitset,
    budget: u64,
    incumbent: Vec<usize>,
) -> CliqueResult {
    let best = if fixed.len() > incumbent.len() { fixed.to_vec() } else { incumbent };
    let mut s = Search { adj, best, nodes: 0, budget, aborted: false };
    let upper_bound = fixed.len() + s.colour_sort(&candidates).1.last().copied().unwrap_or(0);
    let mut c = fixed.to_vec();
    if !candidates.is_empty() {
        s.expand(&mut c, candidates);
    }
    let mut best = s.best;
    best.sort_unstable();
    CliqueResult { best, optimal: !s.aborted, nodes: s.nodes, upper_bound }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_graphs() {
        // 5-cycle: max clique 2
        let n = 5;
        let adj: Vec<Bitset> = (0..n).map(|i| Bitset::from_indices(n, [(i + 1) % n, (i + n - 1) % n])).collect();
        let all = Bitset::from_indices(n, 0..n);
        let r = max_clique(&adj, &[], all, u64::MAX);
        assert_eq!(r.best.len(), 2);
        assert!(r.optimal);
        // K4 plus a pendant vertex
        let edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)];
        let mut adj = vec![Bitset::new(5); 5];
        for (a, b) in edges {
            adj[a].set(b);
            adj[b].set(a);
        }
        let r = max_clique(&adj, &[], Bitset::from_indices(5, 0..5), u64::MAX);
        assert_eq!(r.best, vec![0, 1, 2, 3]);
    }
}
