//! Relabeling groups, their action on patterns and distributions, and orbit
//! enumeration with lexicographically minimal representatives.
//!
//! A relabeling `g = (σ, π)` sends the outcome `x_j` of observer `j` to the
//! outcome `π_j(x_j)` of observer `σ(j)`.

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::scenario::{Distribution, Pattern, Scenario, Shape};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error("expected {expected} joint outcomes, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("joint space of {joint} outcomes exceeds the enumeration cap of {cap}")]
    EnumerationCap { joint: usize, cap: usize },
    #[error("relabeling does not belong to the scenario group")]
    NotInGroup,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relabeling {
    /// `sigma[j]` is the observer receiving observer `j`'s outcome.
    pub sigma: Vec<usize>,
    /// `pi[j][x]` is the new label of outcome `x` of observer `j`.
    pub pi: Vec<Vec<usize>>,
}

impl Relabeling {
    pub fn identity(outcomes: &[usize]) -> Self {
        Relabeling {
            sigma: (0..outcomes.len()).collect(),
            pi: outcomes.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Relabeling) -> Relabeling {
        let sigma = other.sigma.iter().map(|&k| self.sigma[k]).collect();
        let pi = other
            .pi
            .iter()
            .enumerate()
            .map(|(j, pj)| pj.iter().map(|&x| self.pi[other.sigma[j]][x]).collect())
            .collect();
        Relabeling { sigma, pi }
    }

    pub fn inverse(&self) -> Relabeling {
        let n = self.sigma.len();
        let mut sigma = vec![0; n];
        let mut pi = vec![Vec::new(); n];
        for j in 0..n {
            let k = self.sigma[j];
            sigma[k] = j;
            let mut inv = vec![0; self.pi[j].len()];
            for (x, &y) in self.pi[j].iter().enumerate() {
                inv[y] = x;
            }
            pi[k] = inv;
        }
        Relabeling { sigma, pi }
    }

    /// Image of a joint index.
    pub fn apply_index(&self, shape: &Shape, index: usize) -> usize {
        let mut digits = vec![0; shape.arity()];
        for (j, (&s, pj)) in self.sigma.iter().zip(&self.pi).enumerate() {
            digits[s] = pj[shape.digit(index, j)];
        }
        shape.encode(&digits)
    }

    pub fn index_permutation(&self, shape: &Shape) -> Vec<u32> {
        (0..shape.len())
            .map(|i| self.apply_index(shape, i) as u32)
            .collect()
    }

    pub fn act_pattern(&self, p: &Pattern) -> Pattern {
        let shape = p.shape();
        Pattern::from_support(
            shape.clone(),
            p.support().into_iter().map(|i| self.apply_index(shape, i)),
        )
    }

    pub fn act_distribution(&self, p: &Distribution) -> Distribution {
        let shape = p.shape();
        let mut values = p.values().to_vec();
        for (i, v) in p.values().iter().enumerate() {
            values[self.apply_index(shape, i)] = v.clone();
        }
        Distribution::new(shape.clone(), values).expect("permutation preserves normalization")
    }
}

/// Observer permutations that extend to an automorphism of the scenario graph
/// and preserve outcome counts.
pub fn observer_automorphisms(scenario: &Scenario) -> Vec<Vec<usize>> {
    let n = scenario.observer_count();
    let mut signature: Vec<Vec<usize>> = (0..scenario.source_count())
        .map(|s| scenario.observers_of(s).to_vec())
        .collect();
    signature.sort();
    // observer degree and outcome count must be preserved
    let profile = |j: usize| (scenario.sources_of(j).len(), scenario.outcomes()[j]);
    let mut out = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn rec(
        j: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
        scenario: &Scenario,
        signature: &[Vec<usize>],
        profile: &dyn Fn(usize) -> (usize, usize),
    ) {
        let n = perm.len();
        if j == n {
            let mut mapped: Vec<Vec<usize>> = (0..scenario.source_count())
                .map(|s| {
                    let mut v: Vec<usize> =
                        scenario.observers_of(s).iter().map(|&o| perm[o]).collect();
                    v.sort_unstable();
                    v
                })
                .collect();
            mapped.sort();
            if mapped == signature {
                out.push(perm.clone());
            }
            return;
        }
        for k in 0..n {
            if used[k] || profile(k) != profile(j) {
                continue;
            }
            // observers sharing a source must stay sharing one
            if (0..j).any(|i| scenario.share_source(i, j) != scenario.share_source(perm[i], k)) {
                continue;
            }
            used[k] = true;
            perm[j] = k;
            rec(j + 1, perm, used, out, scenario, signature, profile);
            used[k] = false;
        }
        perm[j] = usize::MAX;
    }
    rec(
        0, &mut perm, &mut used, &mut out, scenario, &signature, &profile,
    );
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub representative: Pattern,
    pub size: usize,
    pub members: Option<Vec<Pattern>>,
}

/// The full relabeling group of a scenario, with every element's joint-index
/// permutation precomputed.
#[derive(Debug, Clone)]
pub struct RelabelingGroup {
    shape: Shape,
    elements: Vec<Relabeling>,
    perms: Vec<Vec<u32>>,
    observer_order: usize,
}

impl RelabelingGroup {
    pub fn new(scenario: &Scenario) -> Self {
        let outcomes = scenario.outcomes();
        let autos = observer_automorphisms(scenario);
        // all tuples of outcome permutations
        let mut outcome_perms: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for &n in outcomes {
            let ps = permutations(n);
            outcome_perms = outcome_perms
                .into_iter()
                .flat_map(|prefix| {
                    ps.iter().map(move |p| {
                        let mut v = prefix.clone();
                        v.push(p.clone());
                        v
                    })
                })
                .collect();
        }
        let mut elements = Vec::with_capacity(autos.len() * outcome_perms.len());
        for sigma in &autos {
            for pi in &outcome_perms {
                elements.push(Relabeling {
                    sigma: sigma.clone(),
                    pi: pi.clone(),
                });
            }
        }
        let shape = scenario.shape().clone();
        let perms = elements
            .iter()
            .map(|g| g.index_permutation(&shape))
            .collect();
        RelabelingGroup {
            shape,
            elements,
            perms,
            observer_order: autos.len(),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn observer_order(&self) -> usize {
        self.observer_order
    }

    pub fn elements(&self) -> &[Relabeling] {
        &self.elements
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn position(&self, g: &Relabeling) -> Option<usize> {
        self.elements.iter().position(|h| h == g)
    }

    fn check(&self, len: usize) -> Result<(), SymmetryError> {
        if len != self.shape.len() {
            return Err(SymmetryError::DimensionMismatch {
                expected: self.shape.len(),
                found: len,
            });
        }
        Ok(())
    }

    pub fn act_pattern(&self, g: usize, p: &Pattern) -> Result<Pattern, SymmetryError> {
        self.check(p.len())?;
        let perm = &self.perms[g];
        Ok(Pattern::from_support(
            self.shape.clone(),
            p.support().into_iter().map(|i| perm[i] as usize),
        ))
    }

    pub fn act_distribution(
        &self,
        g: usize,
        p: &Distribution,
    ) -> Result<Distribution, SymmetryError> {
        self.check(p.len())?;
        Ok(self.elements[g].act_distribution(p))
    }

    /// Orbit of a pattern under the full group, with its members.
    pub fn orbit_of(&self, p: &Pattern) -> Result<Orbit, SymmetryError> {
        self.check(p.len())?;
        let mut members: Vec<Pattern> = (0..self.order())
            .map(|g| self.act_pattern(g, p))
            .collect::<Result<_, _>>()?;
        members.sort_by_key(|m| m.to_bitstring());
        members.dedup();
        Ok(Orbit {
            representative: members[0].clone(),
            size: members.len(),
            members: Some(members),
        })
    }

    /// Lexicographically smallest bitstring in the orbit.
    pub fn canonical(&self, p: &Pattern) -> Result<Pattern, SymmetryError> {
        Ok(self.orbit_of(p)?.representative)
    }

    /// Group elements fixing `p`.
    pub fn stabilizer(&self, p: &Pattern) -> Result<Vec<usize>, SymmetryError> {
        self.check(p.len())?;
        let mut out = Vec::new();
        for g in 0..self.order() {
            if &self.act_pattern(g, p)? == p {
                out.push(g);
            }
        }
        Ok(out)
    }

    /// Per-element byte lookup tables mapping pattern codes to image codes.
    fn code_tables(&self) -> Vec<Vec<[u64; 256]>> {
        let n = self.shape.len();
        let chunks = n.div_ceil(8);
        self.perms
            .iter()
            .map(|perm| {
                (0..chunks)
                    .map(|k| {
                        let mut t = [0u64; 256];
                        for (byte, slot) in t.iter_mut().enumerate() {
                            let mut img = 0u64;
                            for b in 0..8 {
                                let bit = 8 * k + b;
                                if bit < n && byte >> b & 1 == 1 {
                                    let joint = n - 1 - bit;
                                    img |= 1 << (n - 1 - perm[joint] as usize);
                                }
                            }
                            *slot = img;
                        }
                        t
                    })
                    .collect()
            })
            .collect()
    }

    /// Partitions all normalized patterns into orbits, in increasing order of
    /// representative.
    pub fn partition_into_orbits(
        &self,
        cap_bits: usize,
        with_members: bool,
    ) -> Result<Vec<Orbit>, SymmetryError> {
        let n = self.shape.len();
        if n > cap_bits.min(32) {
            return Err(SymmetryError::EnumerationCap {
                joint: n,
                cap: cap_bits,
            });
        }
        let tables = self.code_tables();
        let total = 1u64 << n;
        let mut visited = FixedBitSet::with_capacity(total as usize);
        let mut orbits = Vec::new();
        let mut images: Vec<u64> = Vec::with_capacity(self.order());
        for c in 1..total {
            if visited.contains(c as usize) {
                continue;
            }
            images.clear();
            for t in &tables {
                let mut img = 0u64;
                let mut rest = c;
                let mut k = 0;
                while rest != 0 {
                    img |= t[k][(rest & 0xff) as usize];
                    rest >>= 8;
                    k += 1;
                }
                images.push(img);
            }
            images.sort_unstable();
            images.dedup();
            for &img in &images {
                visited.insert(img as usize);
            }
            orbits.push(Orbit {
                representative: Pattern::from_code(self.shape.clone(), c),
                size: images.len(),
                members: with_members.then(|| {
                    images
                        .iter()
                        .map(|&m| Pattern::from_code(self.shape.clone(), m))
                        .collect()
                }),
            });
        }
        Ok(orbits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn automorphism_orders() {
        assert_eq!(observer_automorphisms(&Scenario::triangle()).len(), 6);
        assert_eq!(observer_automorphisms(&Scenario::square()).len(), 8);
        let path =
            Scenario::new("path", vec!["s".into()], vec![("A".into(), 2)], [(0, 0)]).unwrap();
        assert_eq!(observer_automorphisms(&path).len(), 1);
    }

    #[test]
    fn ghz_orbit() {
        let tri = Scenario::triangle();
        let g = RelabelingGroup::new(&tri);
        assert_eq!(g.order(), 48);
        let ghz = Pattern::parse(tri.shape(), "[000]+[111]").unwrap();
        let orbit = g.orbit_of(&ghz).unwrap();
        assert_eq!(orbit.size, 4);
        let lits: Vec<String> = orbit
            .members
            .unwrap()
            .iter()
            .map(|m| m.to_literal())
            .collect();
        assert!(lits.contains(&"[001]+[110]".to_string()));
    }

    #[test]
    fn flip_observer_c() {
        let tri = Scenario::triangle();
        let mut g = Relabeling::identity(tri.outcomes());
        g.pi[2] = vec![1, 0];
        let ghz = Pattern::parse(tri.shape(), "[000]+[111]").unwrap();
        assert_eq!(g.act_pattern(&ghz).to_literal(), "[001]+[110]");
        let mut all = Relabeling::identity(tri.outcomes());
        for pj in &mut all.pi {
            *pj = vec![1, 0];
        }
        assert_eq!(all.act_pattern(&ghz), ghz);
    }

    #[test]
    fn trivial_orbits() {
        let tri = Scenario::triangle();
        let g = RelabelingGroup::new(&tri);
        assert_eq!(
            g.orbit_of(&Pattern::full(tri.shape().clone()))
                .unwrap()
                .size,
            1
        );
        assert_eq!(
            g.orbit_of(&Pattern::empty(tri.shape().clone()))
                .unwrap()
                .size,
            1
        );
    }

    #[test]
    fn triangle_partition() {
        let tri = Scenario::triangle();
        let g = RelabelingGroup::new(&tri);
        let orbits = g.partition_into_orbits(24, false).unwrap();
        assert_eq!(orbits.len(), 21);
        assert_eq!(orbits.iter().map(|o| o.size).sum::<usize>(), 255);
        for o in &orbits {
            assert_eq!(g.canonical(&o.representative).unwrap(), o.representative);
        }
    }

    #[test]
    fn square_partition() {
        let g = RelabelingGroup::new(&Scenario::square());
        assert_eq!(g.order(), 128);
        let orbits = g.partition_into_orbits(24, false).unwrap();
        assert_eq!(orbits.len(), 804);
        assert_eq!(orbits.iter().map(|o| o.size).sum::<usize>(), 65535);
        assert!(orbits.iter().all(|o| 128 % o.size == 0));
    }

    #[test]
    fn inverse_and_composition() {
        let g = RelabelingGroup::new(&Scenario::square());
        let e = Relabeling::identity(&[2; 4]);
        for a in g.elements().iter().step_by(7) {
            assert_eq!(a.compose(&a.inverse()), e);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let g = RelabelingGroup::new(&Scenario::triangle());
        let p = Pattern::full(Shape::new(vec![2, 2]));
        assert!(matches!(
            g.act_pattern(0, &p),
            Err(SymmetryError::DimensionMismatch { .. })
        ));
    }
}
