//! Ring, cut, spiral and web generators.

use crate::scenario::Scenario;

use super::{Flavor, Inflation, InflationError, ObserverCopy, SourceCopy};

/// For a scenario whose graph is a single cycle (every observer sees two
/// sources, every source feeds two observers), the observers in cycle order
/// starting at observer 0 and heading to its smaller-index neighbour, with
/// `sources[i]` linking `observers[i]` and `observers[i + 1]`.
pub fn cycle_order(s: &Scenario) -> Option<(Vec<usize>, Vec<usize>)> {
    let m = s.observer_count();
    if m < 2 || s.source_count() != m {
        return None;
    }
    if (0..m).any(|o| s.sources_of(o).len() != 2) || (0..m).any(|x| s.observers_of(x).len() != 2) {
        return None;
    }
    let other = |src: usize, o: usize| {
        let v = s.observers_of(src);
        if v[0] == o {
            v[1]
        } else {
            v[0]
        }
    };
    let first = s
        .sources_of(0)
        .iter()
        .copied()
        .min_by_key(|&src| other(src, 0))?;
    let mut observers = vec![0];
    let mut sources = vec![first];
    let mut cur = other(first, 0);
    let mut via = first;
    while cur != 0 {
        if observers.contains(&cur) {
            return None;
        }
        observers.push(cur);
        let next = *s.sources_of(cur).iter().find(|&&x| x != via)?;
        sources.push(next);
        via = next;
        cur = other(next, cur);
    }
    (observers.len() == m).then_some((observers, sources))
}

fn shape_error(inflation: &str, expected: &str) -> InflationError {
    InflationError::WrongShape {
        inflation: inflation.into(),
        expected: expected.into(),
    }
}

fn src(base: usize, copy: usize) -> SourceCopy {
    SourceCopy { base, copy }
}

fn obs(base: usize, copy: usize) -> ObserverCopy {
    ObserverCopy {
        base,
        copy: vec![copy],
    }
}

/// The ring of `length` observer copies obtained by unrolling a cyclic
/// scenario `length / m` times.
pub fn make_ring(s: &Scenario, length: usize) -> Result<Inflation, InflationError> {
    let (os, ss) = cycle_order(s).ok_or_else(|| shape_error("ring", "cyclic"))?;
    let m = os.len();
    if length % m != 0 || length < 2 * m {
        return Err(InflationError::InvalidLength { length, period: m });
    }
    let n = length / m;
    let mut edges = Vec::new();
    for k in 1..=n {
        for i in 0..m {
            let me = obs(os[i], k);
            edges.push((src(ss[i], k), me.clone()));
            let prev = if i > 0 {
                src(ss[i - 1], k)
            } else {
                src(ss[m - 1], if k == 1 { n } else { k - 1 })
            };
            edges.push((prev, me));
        }
    }
    Inflation::new(format!("ring:{length}"), s, Flavor::Nonsignaling, &edges)
}

/// One copy of every observer, with the cycle cut open at the source
/// closing the cycle (the source shared by the first and last observer).
pub fn make_cut(s: &Scenario) -> Result<Inflation, InflationError> {
    let (os, ss) = cycle_order(s).ok_or_else(|| shape_error("cut", "cyclic"))?;
    let m = os.len();
    let mut edges = Vec::new();
    for i in 0..m {
        let me = obs(os[i], 1);
        edges.push((src(ss[i], 1), me.clone()));
        let prev = if i > 0 {
            src(ss[i - 1], 1)
        } else {
            src(ss[m - 1], 2)
        };
        edges.push((prev, me));
    }
    Inflation::new("cut", s, Flavor::Nonsignaling, &edges)
}

/// Six-observer fanout inflation of the triangle: a full copy of the
/// triangle plus a second copy of each observer that keeps its first
/// incoming source and takes a fresh copy of the other.
pub fn make_spiral(s: &Scenario) -> Result<Inflation, InflationError> {
    let (os, ss) = cycle_order(s)
        .filter(|(o, _)| o.len() == 3)
        .ok_or_else(|| shape_error("spiral", "triangle"))?;
    let m = 3;
    let mut edges = Vec::new();
    for i in 0..m {
        let prev = ss[(i + m - 1) % m];
        let first = obs(os[i], 1);
        edges.push((src(ss[i], 1), first.clone()));
        edges.push((src(prev, 1), first));
        let second = obs(os[i], 2);
        edges.push((src(ss[i], 2), second.clone()));
        edges.push((src(prev, 1), second));
    }
    Inflation::new("spiral", s, Flavor::Fanout, &edges)
}

/// `n` copies of every source and one observer copy per tuple of incident
/// source-copy indices.
pub fn make_web(s: &Scenario, n: usize) -> Result<Inflation, InflationError> {
    if n == 0 {
        return Err(InflationError::ZeroCopies);
    }
    let count: usize = (0..s.observer_count())
        .map(|o| n.saturating_pow(s.sources_of(o).len() as u32))
        .sum();
    if count > super::MAX_OBSERVER_COPIES {
        return Err(InflationError::SizeCap {
            count,
            cap: super::MAX_OBSERVER_COPIES,
        });
    }
    let mut edges = Vec::new();
    for o in 0..s.observer_count() {
        let incident = s.sources_of(o);
        let total = n.pow(incident.len() as u32);
        for t in 0..total {
            let mut tuple = vec![0; incident.len()];
            let mut rest = t;
            for slot in tuple.iter_mut().rev() {
                *slot = rest % n + 1;
                rest /= n;
            }
            let me = ObserverCopy {
                base: o,
                copy: tuple.clone(),
            };
            for (&x, &k) in incident.iter().zip(&tuple) {
                edges.push((src(x, k), me.clone()));
            }
        }
    }
    let flavor = if n == 1 {
        Flavor::Nonsignaling
    } else {
        Flavor::Fanout
    };
    Inflation::new(format!("web:{n}"), s, flavor, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inflation::Violation;

    fn wiring(inf: &Inflation) -> String {
        inf.to_string()
    }

    #[test]
    fn triangle_cycle() {
        let (o, s) = cycle_order(&Scenario::triangle()).unwrap();
        assert_eq!(o, vec![0, 1, 2]);
        // gamma, alpha, beta
        assert_eq!(s, vec![2, 0, 1]);
    }

    #[test]
    fn six_ring() {
        let r = make_ring(&Scenario::triangle(), 6).unwrap();
        assert_eq!(r.joint_len(), 64);
        assert_eq!(
            wiring(&r),
            "ring:6: A1(beta2,gamma1) A2(beta1,gamma2) B1(alpha1,gamma1) B2(alpha2,gamma2) C1(alpha1,beta1) C2(alpha2,beta2)"
        );
        assert!(r.validate().is_empty());
    }

    #[test]
    fn ring_lengths() {
        let t = Scenario::triangle();
        assert!(matches!(
            make_ring(&t, 5),
            Err(InflationError::InvalidLength { .. })
        ));
        assert!(matches!(
            make_ring(&t, 3),
            Err(InflationError::InvalidLength { .. })
        ));
        let sq = make_ring(&Scenario::square(), 8).unwrap();
        assert_eq!(sq.observer_count(), 8);
        assert!(sq.validate().is_empty());
    }

    #[test]
    fn cut_inflation() {
        let c = make_cut(&Scenario::triangle()).unwrap();
        assert_eq!(
            wiring(&c),
            "cut: A1(beta2,gamma1) B1(alpha1,gamma1) C1(alpha1,beta1)"
        );
        assert!(c.validate().is_empty());
        assert!(matches!(
            make_cut(&Scenario::square()).map(|c| c.observer_count()),
            Ok(4)
        ));
    }

    #[test]
    fn spiral_inflation() {
        let sp = make_spiral(&Scenario::triangle()).unwrap();
        assert_eq!(
            wiring(&sp),
            "spiral: A1(beta1,gamma1) A2(beta1,gamma2) B1(alpha1,gamma1) B2(alpha2,gamma1) C1(alpha1,beta1) C2(alpha1,beta2)"
        );
        assert!(sp.violations(Flavor::Fanout).is_empty());
        let dup = sp.violations(Flavor::Nonsignaling);
        assert_eq!(dup.len(), 3);
        assert!(dup
            .iter()
            .all(|v| matches!(v, Violation::Duplication { .. })));
        assert!(make_spiral(&Scenario::square()).is_err());
    }

    #[test]
    fn web_inflation() {
        let w = make_web(&Scenario::triangle(), 2).unwrap();
        assert_eq!(w.observer_count(), 12);
        assert!(w.validate().is_empty());
        let sq = make_web(&Scenario::square(), 2).unwrap();
        assert_eq!(sq.observer_count(), 16);
        let one = make_web(&Scenario::square(), 1).unwrap();
        assert_eq!(
            one.as_scenario().unwrap().edges(),
            Scenario::square().edges()
        );
        assert!(make_web(&Scenario::square(), 3).is_err());
    }

    #[test]
    fn missing_source_copy() {
        let t = Scenario::triangle();
        let r = make_ring(&t, 6).unwrap();
        // drop A1's beta edge
        let mut edges = Vec::new();
        for &(s, o) in r.edges() {
            let (sc, oc) = (r.source_copies()[s].clone(), r.observer_copies()[o].clone());
            if !(oc.base == 0 && oc.copy == vec![1] && sc.base == 1) {
                edges.push((sc, oc));
            }
        }
        let broken = Inflation::new("broken", &t, Flavor::Nonsignaling, &edges).unwrap();
        let v = broken.validate();
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::MissingSource { .. })));
    }
}
