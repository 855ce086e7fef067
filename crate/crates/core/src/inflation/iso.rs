//! Type-preserving isomorphisms between observer subsets of inflations.
//! Two subsets match when, after dropping the other observers and orphan
//! sources, their graphs agree up to relabeling copies; their marginals then
//! coincide in any model.

use super::{component_masks, Inflation};

/// Source copy of each base source at each observer copy.
fn source_table(inf: &Inflation) -> Vec<Vec<Option<usize>>> {
    let m = inf.base().source_count();
    (0..inf.observer_count())
        .map(|o| {
            let mut row = vec![None; m];
            for &s in inf.sources_of(o) {
                row[inf.source_copies()[s].base] = Some(s);
            }
            row
        })
        .collect()
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Observer subset of one inflation, prepared for matching.
#[derive(Debug, Clone)]
pub struct SubgraphKey {
    pub observers: Vec<usize>,
    base: Vec<usize>,
    /// `shared[i][j]`: bitmask over base sources that observers `i` and `j`
    /// receive from the same copy.
    shared: Vec<Vec<u64>>,
    invariant: Vec<usize>,
}

impl SubgraphKey {
    pub fn new(inf: &Inflation, mask: u32) -> Self {
        let table = source_table(inf);
        let observers = bits(mask);
        let base: Vec<usize> = observers.iter().map(|&o| inf.base_observer(o)).collect();
        let k = observers.len();
        let mut shared = vec![vec![0u64; k]; k];
        for i in 0..k {
            for j in 0..k {
                for (t, (a, b)) in table[observers[i]]
                    .iter()
                    .zip(&table[observers[j]])
                    .enumerate()
                {
                    if a.is_some() && a == b {
                        shared[i][j] |= 1 << t;
                    }
                }
            }
        }
        let mut invariant = base.clone();
        invariant.sort_unstable();
        let mut degrees: Vec<usize> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j {
                            0
                        } else {
                            shared[i][j].count_ones() as usize
                        }
                    })
                    .sum::<usize>()
                    * 64
                    + base[i]
            })
            .collect();
        degrees.sort_unstable();
        invariant.push(usize::MAX);
        invariant.extend(degrees);
        SubgraphKey {
            observers,
            base,
            shared,
            invariant,
        }
    }

    /// Cheap isomorphism invariant.
    pub fn invariant(&self) -> &[usize] {
        &self.invariant
    }

    /// A bijection `i ↦ map[i]` from positions of `self` to positions of
    /// `other` that preserves base types and source sharing.
    pub fn isomorphism(&self, other: &SubgraphKey) -> Option<Vec<usize>> {
        if self.invariant != other.invariant {
            return None;
        }
        let k = self.observers.len();
        let mut map = vec![usize::MAX; k];
        let mut used = vec![false; k];
        fn extend(
            a: &SubgraphKey,
            b: &SubgraphKey,
            i: usize,
            map: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            if i == map.len() {
                return true;
            }
            for c in 0..map.len() {
                if used[c] || a.base[i] != b.base[c] || a.shared[i][i] != b.shared[c][c] {
                    continue;
                }
                if (0..i).any(|p| a.shared[i][p] != b.shared[c][map[p]]) {
                    continue;
                }
                map[i] = c;
                used[c] = true;
                if extend(a, b, i + 1, map, used) {
                    return true;
                }
                used[c] = false;
            }
            map[i] = usize::MAX;
            false
        }
        extend(self, other, 0, &mut map, &mut used).then_some(map)
    }
}

/// Connected observer subsets of an inflation, as masks.
pub fn connected_subsets(inf: &Inflation) -> Vec<u32> {
    let n = inf.observer_count();
    assert!(n < 32, "observer count fits a mask");
    let adjacent = inf.adjacency();
    (1..(1u32 << n))
        .filter(|&m| component_masks(&adjacent, m).len() == 1)
        .collect()
}
