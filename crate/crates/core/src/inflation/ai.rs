//! AI-expressible observer subsets: subsets whose induced components each
//! project injectively (on observers and on sources) onto the base scenario.

use std::collections::HashSet;

use crate::scenario::{Monomial, Valuation};

use super::Inflation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Observer copies, increasing.
    pub members: Vec<usize>,
    /// Base observer of each member.
    pub base: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AiSet {
    pub mask: u32,
    /// Observer copies, increasing.
    pub observers: Vec<usize>,
    pub components: Vec<Component>,
}

impl AiSet {
    pub fn len(&self) -> usize {
        self.observers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observers.is_empty()
    }

    /// Base monomial identified with the valuation `outcomes` (one outcome per
    /// entry of `observers`).
    pub fn monomial(&self, outcomes: &[usize]) -> Monomial {
        let factors = self
            .components
            .iter()
            .map(|c| {
                Valuation::new(c.members.iter().zip(&c.base).map(|(m, &b)| {
                    let k = self.observers.binary_search(m).expect("member of set");
                    (b, outcomes[k])
                }))
                .expect("component is nonempty and injective")
            })
            .collect();
        Monomial::new(factors).expect("set is nonempty")
    }
}

/// All AI-expressible subsets of an inflation, plus the maximal ones.
#[derive(Debug, Clone)]
pub struct AiStructure {
    all: Vec<u32>,
    lookup: HashSet<u32>,
    maximal: Vec<AiSet>,
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

impl AiStructure {
    pub fn new(inf: &Inflation) -> Self {
        let n = inf.observer_count();
        let adjacent = inf.adjacency();
        let is_ai = |mask: u32| components(inf, &adjacent, mask).is_some();
        // downward closed: grow sets by increasing element
        let mut all = Vec::new();
        let mut stack: Vec<(u32, usize)> = (0..n).map(|i| (1u32 << i, i)).collect();
        while let Some((mask, last)) = stack.pop() {
            if !is_ai(mask) {
                continue;
            }
            all.push(mask);
            for next in last + 1..n {
                stack.push((mask | 1 << next, next));
            }
        }
        all.sort_unstable();
        let lookup: HashSet<u32> = all.iter().copied().collect();
        let maximal = all
            .iter()
            .copied()
            .filter(|&m| (0..n).all(|i| m >> i & 1 == 1 || !lookup.contains(&(m | 1 << i))))
            .map(|m| AiSet {
                mask: m,
                observers: bits(m),
                components: components(inf, &adjacent, m).expect("AI set"),
            })
            .collect();
        AiStructure {
            all,
            lookup,
            maximal,
        }
    }

    /// Every AI-expressible mask, increasing.
    pub fn all(&self) -> &[u32] {
        &self.all
    }

    pub fn maximal(&self) -> &[AiSet] {
        &self.maximal
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.lookup.contains(&mask)
    }

    /// The decomposition of an AI-expressible mask.
    pub fn set(&self, inf: &Inflation, mask: u32) -> Option<AiSet> {
        if !self.contains(mask) {
            return None;
        }
        let adjacent = inf.adjacency();
        Some(AiSet {
            mask,
            observers: bits(mask),
            components: components(inf, &adjacent, mask)?,
        })
    }
}

/// Connected components of `mask` under an adjacency given as neighbour masks.
pub fn component_masks(adjacent: &[u32], mask: u32) -> Vec<u32> {
    let mut rest = mask;
    let mut out = Vec::new();
    while rest != 0 {
        let mut comp = 1u32 << rest.trailing_zeros();
        let mut frontier = comp;
        while frontier != 0 {
            let i = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let new = adjacent[i] & mask & !comp;
            comp |= new;
            frontier |= new;
        }
        rest &= !comp;
        out.push(comp);
    }
    out
}

/// Connected components of `mask`, or `None` when some component does not
/// project injectively onto the base scenario.
fn components(inf: &Inflation, adjacent: &[u32], mask: u32) -> Option<Vec<Component>> {
    let mut out = Vec::new();
    for comp in component_masks(adjacent, mask) {
        let members = bits(comp);
        let base: Vec<usize> = members.iter().map(|&o| inf.base_observer(o)).collect();
        let mut seen_obs = Vec::new();
        let mut seen_src: Vec<(usize, usize)> = Vec::new();
        for (&o, &b) in members.iter().zip(&base) {
            if seen_obs.contains(&b) {
                return None;
            }
            seen_obs.push(b);
            for &s in inf.sources_of(o) {
                let sc = &inf.source_copies()[s];
                match seen_src.iter().find(|(bs, _)| *bs == sc.base) {
                    Some(&(_, copy)) if copy != s => return None,
                    Some(_) => {}
                    None => seen_src.push((sc.base, s)),
                }
            }
        }
        out.push(Component { members, base });
    }
    Some(out)
}
