//! Inflation compatibility as satisfiability: one variable per joint outcome
//! of each inflation, clauses from the AI-expressible marginals,
//! factorization of marginals over disconnected observer groups, and
//! equalities between marginals of matching subgraphs.

use std::collections::HashMap;

use crate::inflation::{
    component_masks, connected_subsets, AiStructure, Inflation, InflationValuation, SubgraphKey,
};
use crate::possibility::Refuter;
use crate::scenario::{Pattern, Projector};

use super::cnf::{CnfInstance, Lit};

/// Largest inflation for which factorization constraints and subgraph
/// equalities are enumerated.
pub const INDEPENDENCE_MAX_OBSERVERS: usize = 20;

/// `P_K = ∏ P_C` over the connected components `C` of `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub set: u32,
    pub components: Vec<u32>,
}

/// Observer groups whose marginals must factorize. A group qualifies when it
/// has several components, one of them is not AI-expressible (otherwise
/// the marginal constraints already fix it), and it cannot be enlarged
/// without merging components; smaller groups follow by marginalization.
pub fn factorizations(inf: &Inflation, ai: &AiStructure) -> Vec<Factorization> {
    let n = inf.observer_count();
    if n > INDEPENDENCE_MAX_OBSERVERS {
        return Vec::new();
    }
    let adjacent = inf.adjacency();
    let full = (1u32 << n) - 1;
    let mut out = Vec::new();
    for set in 1..=full {
        if ai.contains(set) {
            continue;
        }
        let comps = component_masks(&adjacent, set);
        if comps.len() < 2 {
            continue;
        }
        let closed = (0..n)
            .filter(|&o| set >> o & 1 == 0)
            .all(|o| comps.iter().filter(|&&c| adjacent[o] & c != 0).count() >= 2);
        if closed {
            out.push(Factorization {
                set,
                components: comps,
            });
        }
    }
    out
}

/// Marginal equality `P_X = P_Y` between connected observer subsets of two
/// family members (possibly the same one).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphEquality {
    pub left: (usize, u32),
    pub right: (usize, u32),
    /// Position in `right` of each observer of `left`, both increasing.
    pub map: Vec<usize>,
}

/// Groups the connected, non-AI subsets of all members into isomorphism
/// classes and links every subset to its class representative.
pub fn subgraph_equalities(members: &[(&Inflation, &AiStructure)]) -> Vec<SubgraphEquality> {
    let mut classes: HashMap<Vec<usize>, Vec<((usize, u32), SubgraphKey)>> = HashMap::new();
    let mut out = Vec::new();
    for (i, (inf, ai)) in members.iter().enumerate() {
        if inf.observer_count() > INDEPENDENCE_MAX_OBSERVERS {
            continue;
        }
        for mask in connected_subsets(inf) {
            if ai.contains(mask) {
                continue;
            }
            let key = SubgraphKey::new(inf, mask);
            let reps = classes.entry(key.invariant().to_vec()).or_default();
            match reps
                .iter()
                .find_map(|(id, rep)| key.isomorphism(rep).map(|m| (*id, m)))
            {
                Some((rep, map)) => out.push(SubgraphEquality {
                    left: (i, mask),
                    right: rep,
                    map,
                }),
                None => reps.push(((i, mask), key)),
            }
        }
    }
    out
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncodingOptions {
    pub factorization: bool,
    pub subgraph_equalities: bool,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        EncodingOptions {
            factorization: true,
            subgraph_equalities: true,
        }
    }
}

impl EncodingOptions {
    /// AI-expressible marginal constraints only.
    pub fn marginals_only() -> Self {
        EncodingOptions {
            factorization: false,
            subgraph_equalities: false,
        }
    }
}

struct Member {
    refuter: Refuter,
    projectors: Vec<Projector>,
    /// Variable of joint outcome `j` is `offset + j + 1`.
    offset: Lit,
}

/// Reusable encoder for a family of inflations of one scenario, tested
/// jointly. The pattern-independent part is built once.
pub struct InflationEncoder {
    members: Vec<Member>,
    base: CnfInstance,
    factorizations: usize,
    equalities: usize,
}

/// Tseitin variables for marginals, created on demand.
struct Marginals<'a> {
    infs: Vec<&'a Inflation>,
    offsets: Vec<Lit>,
    vars: HashMap<(usize, u32), Vec<Lit>>,
}

impl Marginals<'_> {
    fn get(&mut self, cnf: &mut CnfInstance, member: usize, mask: u32) -> &[Lit] {
        if !self.vars.contains_key(&(member, mask)) {
            let inf = self.infs[member];
            let shape = inf.shape();
            let obs = bits(mask);
            let proj = Projector::new(shape, &obs);
            let sub = shape.project_shape(&obs);
            let prefix = if self.infs.len() > 1 {
                format!("{}:", inf.name())
            } else {
                String::new()
            };
            let vars: Vec<Lit> = (0..sub.len())
                .map(|k| {
                    let name = InflationValuation {
                        observers: obs.clone(),
                        outcomes: sub.decode(k),
                    }
                    .render(inf);
                    cnf.new_named_var(format!("{prefix}{name}"))
                })
                .collect();
            let mut parts = vec![Vec::new(); sub.len()];
            for j in 0..inf.joint_len() {
                let k = proj.project(j);
                let x = self.offsets[member] + j as Lit + 1;
                cnf.add_clause([-x, vars[k]]);
                parts[k].push(x);
            }
            for (k, xs) in parts.into_iter().enumerate() {
                cnf.add_clause(std::iter::once(-vars[k]).chain(xs));
            }
            self.vars.insert((member, mask), vars);
        }
        &self.vars[&(member, mask)]
    }
}

impl InflationEncoder {
    /// A single inflation with factorization constraints, or with the
    /// AI-expressible marginals only.
    pub fn new(inf: &Inflation, independence: bool) -> Self {
        let options = EncodingOptions {
            factorization: independence,
            subgraph_equalities: independence,
        };
        Self::family(std::slice::from_ref(inf), options)
    }

    pub fn family(infs: &[Inflation], options: EncodingOptions) -> Self {
        assert!(!infs.is_empty(), "family has a member");
        let mut cnf = CnfInstance::new();
        let mut members = Vec::new();
        for inf in infs {
            let offset = cnf.num_vars() as Lit;
            let shape = inf.shape();
            for j in 0..inf.joint_len() {
                let label = if infs.len() > 1 {
                    format!("{}:P({})", inf.name(), shape.label(j))
                } else {
                    format!("P({})", shape.label(j))
                };
                cnf.new_named_var(label);
            }
            let refuter = Refuter::new(inf);
            let projectors = refuter
                .ai()
                .maximal()
                .iter()
                .map(|s| Projector::new(shape, &s.observers))
                .collect();
            members.push(Member {
                refuter,
                projectors,
                offset,
            });
        }
        let mut marginals = Marginals {
            infs: infs.iter().collect(),
            offsets: members.iter().map(|m| m.offset).collect(),
            vars: HashMap::new(),
        };
        let mut n_fact = 0;
        if options.factorization {
            for (i, inf) in infs.iter().enumerate() {
                let facts = factorizations(inf, members[i].refuter.ai());
                n_fact += facts.len();
                for f in &facts {
                    encode_factorization(&mut cnf, &mut marginals, i, f);
                }
            }
        }
        let mut n_eq = 0;
        if options.subgraph_equalities {
            let pairs: Vec<(&Inflation, &AiStructure)> = infs
                .iter()
                .zip(&members)
                .map(|(inf, m)| (inf, m.refuter.ai()))
                .collect();
            let eqs = subgraph_equalities(&pairs);
            n_eq = eqs.len();
            for e in &eqs {
                encode_equality(&mut cnf, &mut marginals, e);
            }
        }
        InflationEncoder {
            members,
            base: cnf,
            factorizations: n_fact,
            equalities: n_eq,
        }
    }

    /// The last member; the family tests a pattern against all of them.
    pub fn inflation(&self) -> &Inflation {
        self.members.last().expect("nonempty").refuter.inflation()
    }

    pub fn factorization_count(&self) -> usize {
        self.factorizations
    }

    pub fn equality_count(&self) -> usize {
        self.equalities
    }

    /// The instance for one pattern: ⊘ marginals become negative units on
    /// their index sets, ✓ marginals become positive clauses.
    pub fn encode(&self, pattern: &Pattern) -> CnfInstance {
        let mut cnf = self.base.clone();
        for m in &self.members {
            let n_joint = m.refuter.inflation().joint_len();
            let rhs = m.refuter.right_hand_sides(pattern);
            for (ok, proj) in rhs.iter().zip(&m.projectors) {
                let mut parts = vec![Vec::new(); ok.len()];
                for j in 0..n_joint {
                    parts[proj.project(j)].push(m.offset + j as Lit + 1);
                }
                for (k, xs) in parts.into_iter().enumerate() {
                    if ok.contains(k) {
                        cnf.add_clause(xs);
                    } else {
                        for x in xs {
                            cnf.add_clause([-x]);
                        }
                    }
                }
            }
        }
        cnf
    }
}

fn encode_factorization(
    cnf: &mut CnfInstance,
    marginals: &mut Marginals,
    member: usize,
    f: &Factorization,
) {
    let comp_vars: Vec<Vec<Lit>> = f
        .components
        .iter()
        .map(|&c| marginals.get(cnf, member, c).to_vec())
        .collect();
    let inf = marginals.infs[member];
    let shape = inf.shape();
    let obs = bits(f.set);
    let proj = Projector::new(shape, &obs);
    let sub = shape.project_shape(&obs);
    let comp_proj: Vec<Projector> = f
        .components
        .iter()
        .map(|&c| {
            let pos: Vec<usize> = bits(c)
                .iter()
                .map(|o| obs.binary_search(o).expect("component inside set"))
                .collect();
            Projector::new(&sub, &pos)
        })
        .collect();
    let offset = marginals.offsets[member];
    let mut parts = vec![Vec::new(); sub.len()];
    for j in 0..inf.joint_len() {
        parts[proj.project(j)].push(offset + j as Lit + 1);
    }
    // ∏ P_C(c) → P_K(k); the converse holds for any marginals
    for (k, xs) in parts.into_iter().enumerate() {
        let lits = comp_vars
            .iter()
            .zip(&comp_proj)
            .map(|(vars, p)| -vars[p.project(k)])
            .chain(xs);
        cnf.add_clause(lits);
    }
}

fn encode_equality(cnf: &mut CnfInstance, marginals: &mut Marginals, e: &SubgraphEquality) {
    let left = marginals.get(cnf, e.left.0, e.left.1).to_vec();
    let right = marginals.get(cnf, e.right.0, e.right.1).to_vec();
    let lshape = marginals.infs[e.left.0]
        .shape()
        .project_shape(&bits(e.left.1));
    let rshape = marginals.infs[e.right.0]
        .shape()
        .project_shape(&bits(e.right.1));
    for (k, &l) in left.iter().enumerate() {
        let digits = lshape.decode(k);
        let mut image = vec![0; digits.len()];
        for (i, &d) in digits.iter().enumerate() {
            image[e.map[i]] = d;
        }
        let r = right[rshape.encode(&image)];
        cnf.add_clause([-l, r]);
        cnf.add_clause([l, -r]);
    }
}

/// Encodes one inflation test, with factorization constraints and
/// subgraph equalities.
pub fn encode_inflation(inf: &Inflation, pattern: &Pattern) -> CnfInstance {
    InflationEncoder::new(inf, true).encode(pattern)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{solve, Budget, SolveResult};
    use crate::scenario::Scenario;

    #[test]
    fn cut_ghz_unsat() {
        let tri = Scenario::triangle();
        let cut = Inflation::named(&tri, "cut").unwrap();
        let ghz = Pattern::parse(tri.shape(), "[000]+[111]").unwrap();
        let cnf = encode_inflation(&cut, &ghz);
        assert_eq!(cnf.num_vars(), 8);
        assert_eq!(solve(&cnf, Budget::unlimited()), SolveResult::Unsat);
        let full = Pattern::full(tri.shape().clone());
        assert!(solve(&encode_inflation(&cut, &full), Budget::unlimited()).is_sat());
    }

    #[test]
    fn cut_has_no_factorizations() {
        let tri = Scenario::triangle();
        let cut = Inflation::named(&tri, "cut").unwrap();
        let ai = AiStructure::new(&cut);
        assert!(factorizations(&cut, &ai).is_empty());
    }

    #[test]
    fn square_ring_factorizations() {
        let sq = Scenario::square();
        let ring = Inflation::named(&sq, "ring:12").unwrap();
        let ai = AiStructure::new(&ring);
        let f = factorizations(&ring, &ai);
        assert!(!f.is_empty());
        let adjacent = ring.adjacency();
        for x in &f {
            assert!(x.components.len() >= 2);
            assert!(x.components.iter().any(|&c| !ai.contains(c)));
            assert_eq!(component_masks(&adjacent, x.set), x.components);
        }
    }

    #[test]
    fn ring_family_links_paths() {
        let sq = Scenario::square();
        let r8 = Inflation::named(&sq, "ring:8").unwrap();
        let r12 = Inflation::named(&sq, "ring:12").unwrap();
        let (a8, a12) = (AiStructure::new(&r8), AiStructure::new(&r12));
        let eqs = subgraph_equalities(&[(&r8, &a8), (&r12, &a12)]);
        // every 12-ring arc of 4 to 7 observers matches an 8-ring arc
        let linked = eqs
            .iter()
            .filter(|e| e.left.0 == 1 && e.right.0 == 0)
            .count();
        assert_eq!(linked, 12 * 4);
    }
}
