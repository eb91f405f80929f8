//! Exact searches on finite spaces: maximal `ε`-separated sets and minimal
//! closed-ball covers, by branch and bound with a node budget.

use super::{check_eps, check_scale, Count, MmSpace};
use crate::error::Result;

pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub nodes: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            nodes: DEFAULT_NODE_BUDGET,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for i in 0..n {
            b.set(i);
        }
        b
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|&w| w != 0)
            .map(|w| w * 64 + self.0[w].trailing_zeros() as usize)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let t = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(w * 64 + t)
                }
            })
        })
    }
}

/// Support points with their "within `radius`" relation as bitsets.
fn neighbourhoods<S: MmSpace + ?Sized>(space: &S, support: &[usize], radius: f64) -> Vec<Bits> {
    let m = support.len();
    (0..m)
        .map(|a| {
            let mut b = Bits::empty(m);
            for c in 0..m {
                if space.dist(support[a], support[c]) <= radius {
                    b.set(c);
                }
            }
            b
        })
        .collect()
}

/// `ξ_ε`: the largest number of support points with pairwise distances
/// strictly greater than `ε`, under the default node budget.
pub fn xi_epsilon<S: MmSpace + ?Sized>(space: &S, eps: f64) -> Result<Count> {
    xi_epsilon_with_budget(space, eps, SearchBudget::default())
}

pub fn xi_epsilon_with_budget<S: MmSpace + ?Sized>(space: &S, eps: f64, budget: SearchBudget) -> Result<Count> {
    check_eps(eps)?;
    check_scale(space, eps, "xi_epsilon")?;
    let support = space.support();
    let near = neighbourhoods(space, &support, eps);
    if let Some(classes) = clique_classes(&near) {
        return Ok(Count::Exact { value: classes });
    }
    let greedy = greedy_separated(&near);
    let cover_half = greedy_cover(&neighbourhoods(space, &support, eps / 2.0));
    let mut search = MaxSeparated {
        near: &near,
        best: greedy,
        nodes: 0,
        budget: budget.nodes,
        aborted: false,
    };
    search.expand(Bits::full(support.len()), 0);
    if search.aborted {
        Ok(Count::Bounds {
            lower: search.best,
            upper: cover_half.max(search.best),
        })
    } else {
        Ok(Count::Exact { value: search.best })
    }
}

/// When "within `ε`" is transitive on the support (always so for
/// ultrametrics) the separated sets pick one point per class.
fn clique_classes(near: &[Bits]) -> Option<usize> {
    let m = near.len();
    let mut seen = Bits::empty(m);
    let mut classes = 0;
    for a in 0..m {
        if seen.get(a) {
            continue;
        }
        classes += 1;
        for c in near[a].ones() {
            if near[c] != near[a] {
                return None;
            }
            seen.set(c);
        }
    }
    Some(classes)
}

fn greedy_separated(near: &[Bits]) -> usize {
    let mut order: Vec<usize> = (0..near.len()).collect();
    order.sort_by_key(|&a| near[a].count());
    let mut blocked = Bits::empty(near.len());
    let mut size = 0;
    for a in order {
        if !blocked.get(a) {
            size += 1;
            for c in near[a].ones() {
                blocked.set(c);
            }
        }
    }
    size
}

fn greedy_cover(near: &[Bits]) -> usize {
    let mut uncovered = Bits::full(near.len());
    let mut size = 0;
    while !uncovered.is_empty() {
        let best = (0..near.len())
            .max_by_key(|&c| (near[c].and(&uncovered).count(), std::cmp::Reverse(c)))
            .expect("non-empty");
        uncovered = uncovered.and_not(&near[best]);
        size += 1;
    }
    size
}

struct MaxSeparated<'a> {
    near: &'a [Bits],
    best: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl MaxSeparated<'_> {
    /// Greedy partition of `cand` into sets of pairwise-near points; a
    /// separated set takes at most one point from each.
    fn clique_bound(&self, cand: &Bits) -> usize {
        let mut rest = cand.clone();
        let mut cliques = 0;
        while let Some(v) = rest.first() {
            cliques += 1;
            let mut pool = rest.and(&self.near[v]);
            rest.clear(v);
            pool.clear(v);
            while let Some(u) = pool.first() {
                rest.clear(u);
                pool.clear(u);
                pool = pool.and(&self.near[u]);
            }
        }
        cliques
    }

    fn expand(&mut self, cand: Bits, size: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if cand.is_empty() {
            self.best = self.best.max(size);
            return;
        }
        if size + cand.count() <= self.best || size + self.clique_bound(&cand) <= self.best {
            return;
        }
        let v = cand
            .ones()
            .max_by_key(|&v| (self.near[v].and(&cand).count(), std::cmp::Reverse(v)))
            .expect("non-empty");
        let conflicts = self.near[v].and(&cand).count() - 1;
        self.expand(cand.and_not(&self.near[v]), size + 1);
        if conflicts > 0 {
            let mut without = cand;
            without.clear(v);
            self.expand(without, size);
        }
    }
}

/// `N_ε`: the fewest closed `ε`-balls centred at support points that cover
/// the support.
pub fn covering_number<S: MmSpace + ?Sized>(space: &S, eps: f64) -> Result<Count> {
    covering_number_with_budget(space, eps, SearchBudget::default())
}

pub fn covering_number_with_budget<S: MmSpace + ?Sized>(space: &S, eps: f64, budget: SearchBudget) -> Result<Count> {
    check_eps(eps)?;
    check_scale(space, eps, "covering_number")?;
    let support = space.support();
    let near = neighbourhoods(space, &support, eps);
    let mut search = MinCover {
        near: &near,
        best: greedy_cover(&near),
        nodes: 0,
        budget: budget.nodes,
        aborted: false,
    };
    search.expand(Bits::full(support.len()), 0);
    if search.aborted {
        Ok(Count::Bounds {
            lower: 1,
            upper: search.best,
        })
    } else {
        Ok(Count::Exact { value: search.best })
    }
}

struct MinCover<'a> {
    near: &'a [Bits],
    best: usize,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl MinCover<'_> {
    fn expand(&mut self, uncovered: Bits, size: usize) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if uncovered.is_empty() {
            self.best = self.best.min(size);
            return;
        }
        let widest = self.near.iter().map(|b| b.and(&uncovered).count()).max().unwrap_or(1).max(1);
        if size + uncovered.count().div_ceil(widest) >= self.best {
            return;
        }
        // Branch on the centres able to cover the hardest point.
        let u = uncovered
            .ones()
            .min_by_key(|&u| (self.near[u].count(), u))
            .expect("non-empty");
        let mut centres: Vec<usize> = self.near[u].ones().collect();
        centres.sort_by_key(|&c| std::cmp::Reverse(self.near[c].and(&uncovered).count()));
        for c in centres {
            self.expand(uncovered.and_not(&self.near[c]), size + 1);
        }
    }
}
