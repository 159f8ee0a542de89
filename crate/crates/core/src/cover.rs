//! Unweighted set cover: greedy approximation and exact branch and bound.

use fixedbitset::FixedBitSet;

/// A set-cover instance over elements `0..universe`. Set ids are indices
/// into the `sets` vector supplied by the caller.
#[derive(Debug, Clone)]
pub struct SetCover {
    universe: usize,
    sets: Vec<FixedBitSet>,
}

/// Outcome of the exact search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactCover {
    /// A provably minimum cover.
    Optimal(Vec<usize>),
    /// The node budget ran out; the best cover found so far plus a lower
    /// bound on the optimum.
    BudgetExceeded { best: Vec<usize>, lower_bound: usize },
    Uncoverable,
}

impl SetCover {
    pub fn new(universe: usize, sets: Vec<FixedBitSet>) -> Self {
        let sets = sets
            .into_iter()
            .map(|mut s| {
                s.grow(universe);
                s
            })
            .collect();
        SetCover { universe, sets }
    }

    /// Builds an instance from explicit element lists.
    pub fn from_lists(universe: usize, lists: &[Vec<usize>]) -> Self {
        let sets = lists
            .iter()
            .map(|l| {
                let mut b = FixedBitSet::with_capacity(universe);
                l.iter().for_each(|&e| b.insert(e));
                b
            })
            .collect();
        SetCover { universe, sets }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(|s| s.count_ones(..)).max().unwrap_or(0)
    }

    pub fn is_coverable(&self) -> bool {
        let mut all = FixedBitSet::with_capacity(self.universe);
        self.sets.iter().for_each(|s| all.union_with(s));
        all.count_ones(..) == self.universe
    }

    /// Repeatedly takes the set covering the most uncovered elements, ties to
    /// the smallest set id. `None` if some element is in no set.
    pub fn greedy(&self) -> Option<Vec<usize>> {
        if !self.is_coverable() {
            return None;
        }
        let mut uncovered = FixedBitSet::with_capacity(self.universe);
        uncovered.insert_range(..);
        let mut chosen = Vec::new();
        while uncovered.count_ones(..) > 0 {
            let (best, gain) = self
                .sets
                .iter()
                .enumerate()
                .map(|(i, s)| (i, s.intersection(&uncovered).count()))
                .fold((usize::MAX, 0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            debug_assert!(gain > 0);
            uncovered.difference_with(&self.sets[best]);
            chosen.push(best);
        }
        Some(chosen)
    }

    /// Minimum cover by depth-first branch and bound, seeded with the greedy
    /// solution. `node_budget` bounds the number of search nodes expanded.
    pub fn exact(&self, node_budget: u64) -> ExactCover {
        let Some(greedy) = self.greedy() else {
            return ExactCover::Uncoverable;
        };
        if greedy.len() <= 1 {
            return ExactCover::Optimal(greedy);
        }
        let mut search = Search {
            inst: self,
            best: greedy,
            expanded: 0,
            budget: node_budget,
            exhausted: false,
            max_size: self.max_set_size(),
        };
        let mut uncovered = FixedBitSet::with_capacity(self.universe);
        uncovered.insert_range(..);
        let mut chosen = Vec::new();
        search.dfs(&mut chosen, &uncovered);
        if search.exhausted {
            let lower_bound = self.universe.div_ceil(search.max_size.max(1));
            ExactCover::BudgetExceeded {
                best: search.best,
                lower_bound,
            }
        } else {
            ExactCover::Optimal(search.best)
        }
    }
}

struct Search<'a> {
    inst: &'a SetCover,
    best: Vec<usize>,
    expanded: u64,
    budget: u64,
    exhausted: bool,
    max_size: usize,
}

impl Search<'_> {
    fn dfs(&mut self, chosen: &mut Vec<usize>, uncovered: &FixedBitSet) {
        let remaining = uncovered.count_ones(..);
        if remaining == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        let needed = remaining.div_ceil(self.max_size);
        if chosen.len() + needed >= self.best.len() {
            return;
        }
        if self.expanded >= self.budget {
            self.exhausted = true;
            return;
        }
        self.expanded += 1;

        // Branch on the uncovered element with the fewest covering sets.
        let sets = &self.inst.sets;
        let pivot = uncovered
            .ones()
            .min_by_key(|&e| sets.iter().filter(|s| s.contains(e)).count())
            .expect("remaining > 0");
        let mut options: Vec<(usize, usize)> = sets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(pivot))
            .map(|(i, s)| (i, s.intersection(uncovered).count()))
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (i, _) in options {
            let mut next = uncovered.clone();
            next.difference_with(&sets[i]);
            chosen.push(i);
            self.dfs(chosen, &next);
            chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// H(d) = 1 + 1/2 + ... + 1/d, with H(0) = 0.
pub fn harmonic(d: usize) -> f64 {
    (1..=d).map(|i| 1.0 / i as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Smallest cover by trying every subset of sets in order of size.
    fn brute_force(inst: &SetCover) -> Option<usize> {
        let m = inst.sets.len();
        (0..1u32 << m)
            .filter(|mask| {
                let mut cov = FixedBitSet::with_capacity(inst.universe);
                (0..m).filter(|i| mask >> i & 1 == 1).for_each(|i| cov.union_with(&inst.sets[i]));
                cov.count_ones(..) == inst.universe
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
    }

    #[test]
    fn greedy_gap_instance() {
        // elements p1..p4 as 0..3; w1 = {p2, p3}, w2 = {p1, p2}, w3 = {p3, p4}
        let inst = SetCover::from_lists(4, &[vec![1, 2], vec![0, 1], vec![2, 3]]);
        assert_eq!(inst.greedy().unwrap(), vec![0, 1, 2]);
        assert_eq!(inst.exact(1_000), ExactCover::Optimal(vec![1, 2]));
        assert_eq!(brute_force(&inst), Some(2));
        assert_eq!(inst.max_set_size(), 2);
        assert!((harmonic(2) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn uncoverable_and_empty() {
        let inst = SetCover::from_lists(3, &[vec![0], vec![1]]);
        assert!(!inst.is_coverable());
        assert_eq!(inst.greedy(), None);
        assert_eq!(inst.exact(10), ExactCover::Uncoverable);

        let empty = SetCover::from_lists(0, &[]);
        assert_eq!(empty.greedy(), Some(vec![]));
        assert_eq!(empty.exact(10), ExactCover::Optimal(vec![]));
    }

    #[test]
    fn zero_budget_reports_bound() {
        let inst = SetCover::from_lists(4, &[vec![1, 2], vec![0, 1], vec![2, 3]]);
        match inst.exact(0) {
            ExactCover::BudgetExceeded { best, lower_bound } => {
                assert_eq!(best.len(), 3);
                assert_eq!(lower_bound, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn exact_matches_brute_force_and_greedy_bound(
            universe in 1usize..8,
            raw in proptest::collection::vec(proptest::collection::vec(0usize..8, 0..5), 1..9),
        ) {
            let lists: Vec<Vec<usize>> = raw
                .into_iter()
                .map(|l| l.into_iter().filter(|&e| e < universe).collect())
                .collect();
            let inst = SetCover::from_lists(universe, &lists);
            let brute = brute_force(&inst);
            match inst.exact(1_000_000) {
                ExactCover::Optimal(c) => {
                    proptest::prop_assert_eq!(Some(c.len()), brute);
                    let g = inst.greedy().unwrap().len();
                    proptest::prop_assert!(c.len() <= g);
                    let h = harmonic(inst.max_set_size());
                    proptest::prop_assert!(g as f64 <= h * c.len() as f64 + 1e-9);
                }
                ExactCover::Uncoverable => proptest::prop_assert_eq!(brute, None),
                ExactCover::BudgetExceeded { .. } => proptest::prop_assert!(false),
            }
        }
    }
}
