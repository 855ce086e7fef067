//! Conflict-driven clause learning: two watched literals, activity-based
//! branching with phase saving, first-UIP learning with clause
//! minimization, Luby restarts and learnt-clause reduction.

use std::time::{Duration, Instant};

use super::cnf::CnfInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Self {
        Budget {
            max_conflicts: Some(n),
            max_time: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// `model[v - 1]` is the value of variable `v`.
    Sat(Vec<bool>),
    Unsat,
    /// The budget ran out before a verdict.
    Budget,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveResult::Unsat)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learnt: u64,
}

/// Internal literal: `2 * var + sign`, sign 1 meaning negated.
type L = u32;

#[inline]
fn var(l: L) -> usize {
    (l >> 1) as usize
}

#[inline]
fn neg(l: L) -> L {
    l ^ 1
}

fn from_dimacs(l: i32) -> L {
    let v = l.unsigned_abs() - 1;
    2 * v + u32::from(l < 0)
}

const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct Clause {
    lits: Vec<L>,
    learnt: bool,
    activity: f64,
    lbd: u32,
    deleted: bool,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: L,
}

/// Binary max-heap over variables keyed by activity.
#[derive(Debug, Clone, Default)]
struct VarHeap {
    heap: Vec<u32>,
    index: Vec<u32>,
}

impl VarHeap {
    const ABSENT: u32 = u32::MAX;

    fn with_vars(n: usize) -> Self {
        VarHeap {
            heap: Vec::with_capacity(n),
            index: vec![Self::ABSENT; n],
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.index[v] != Self::ABSENT
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let p = (i - 1) / 2;
            if act[self.heap[p] as usize] >= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[p];
            self.index[self.heap[i] as usize] = i as u32;
            i = p;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as u32;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r] as usize] > act[self.heap[l] as usize] {
                r
            } else {
                l
            };
            if act[self.heap[c] as usize] <= act[v as usize] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.index[self.heap[i] as usize] = i as u32;
            i = c;
        }
        self.heap[i] = v;
        self.index[v as usize] = i as u32;
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v as u32);
        let i = self.heap.len() - 1;
        self.index[v] = i as u32;
        self.up(i, act);
    }

    fn bumped(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            self.up(self.index[v] as usize, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("nonempty");
        self.index[top as usize] = Self::ABSENT;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.index[last as usize] = 0;
            self.down(0, act);
        }
        Some(top as usize)
    }
}

fn luby(mut i: u64) -> u64 {
    // i is 1-based
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<L>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    stats: Stats,
    num_learnt: usize,
}

impl Solver {
    pub fn new(cnf: &CnfInstance) -> Self {
        let n = cnf.num_vars() as usize;
        let mut s = Solver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::with_vars(n),
            polarity: vec![true; n],
            seen: vec![false; n],
            ok: true,
            stats: Stats::default(),
            num_learnt: 0,
        };
        for v in 0..n {
            s.heap.insert(v, &s.activity);
        }
        for c in cnf.clauses() {
            let lits: Vec<L> = c.iter().map(|&l| from_dimacs(l)).collect();
            if !s.add_clause(lits) {
                s.ok = false;
                break;
            }
        }
        s
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    #[inline]
    fn value(&self, l: L) -> u8 {
        let a = self.assigns[var(l)];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l & 1) as u8
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds an original clause at level 0; false if it makes the instance
    /// unsatisfiable.
    fn add_clause(&mut self, mut lits: Vec<L>) -> bool {
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] == neg(w[1])) {
            return true;
        }
        lits.retain(|&l| self.value(l) != 0);
        if lits.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        match lits.len() {
            0 => false,
            1 => {
                self.enqueue(lits[0], NO_REASON);
                self.propagate() == NO_REASON
            }
            _ => {
                self.attach(lits, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<L>, learnt: bool, lbd: u32) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watcher {
            clause: cref,
            blocker: lits[1],
        });
        self.watches[lits[1] as usize].push(Watcher {
            clause: cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            activity: 0.0,
            lbd,
            deleted: false,
        });
        if learnt {
            self.num_learnt += 1;
        }
        cref
    }

    #[inline]
    fn enqueue(&mut self, l: L, reason: u32) {
        let v = var(l);
        self.assigns[v] = (l & 1) as u8 ^ 1;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns the conflicting clause or `NO_REASON`.
    fn propagate(&mut self) -> u32 {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = NO_REASON;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.clause as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[cref].lits[0];
                let nw = Watcher {
                    clause: w.clause,
                    blocker: first,
                };
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                // look for a new literal to watch
                let len = self.clauses[cref].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[cref].lits[k];
                    if self.value(l) != 0 {
                        self.clauses[cref].lits.swap(1, k);
                        self.watches[l as usize].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == 0 {
                    conflict = w.clause;
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.clause);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict != NO_REASON {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        NO_REASON
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, c: usize) {
        self.clauses[c].activity += self.cla_inc;
        if self.clauses[c].activity > 1e20 {
            for cl in &mut self.clauses {
                cl.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis; returns the learnt clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<L>, u32) {
        let mut learnt: Vec<L> = vec![0];
        let mut path = 0;
        let mut p: Option<L> = None;
        let mut idx = self.trail.len();
        loop {
            let c = confl as usize;
            if self.clauses[c].learnt {
                self.bump_clause(c);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[c].lits.len() {
                let q = self.clauses[c].lits[k];
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            confl = self.reason[var(pl)];
            self.seen[var(pl)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            // the reason clause has pl at position 0
            let c = confl as usize;
            if self.clauses[c].lits[0] != pl {
                let pos = self.clauses[c]
                    .lits
                    .iter()
                    .position(|&x| x == pl)
                    .expect("implied literal in its reason");
                self.clauses[c].lits.swap(0, pos);
            }
        }
        learnt[0] = neg(p.expect("conflict has a UIP"));
        // recursive-free minimization: drop literals implied by the rest
        let mut kept = vec![learnt[0]];
        for &q in &learnt[1..] {
            let r = self.reason[var(q)];
            let redundant = r != NO_REASON
                && self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|&x| self.seen[var(x)] || self.level[var(x)] == 0);
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &learnt {
            self.seen[var(q)] = false;
        }
        let mut learnt = kept;
        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for k in 2..learnt.len() {
                if self.level[var(learnt[k])] > self.level[var(learnt[max_i])] {
                    max_i = k;
                }
            }
            learnt.swap(1, max_i);
            self.level[var(learnt[1])]
        };
        (learnt, bt)
    }

    fn lbd(&self, lits: &[L]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|&l| self.level[var(l)]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = var(l);
            self.polarity[v] = l & 1 == 0;
            self.assigns[v] = UNDEF;
            self.reason[v] = NO_REASON;
            self.heap.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn locked(&self, c: usize) -> bool {
        let l0 = self.clauses[c].lits[0];
        self.value(l0) == 1 && self.reason[var(l0)] == c as u32
    }

    /// Deletes about half of the learnt clauses, keeping low-LBD and
    /// active ones.
    fn reduce_db(&mut self) {
        let mut cands: Vec<usize> = (0..self.clauses.len())
            .filter(|&c| {
                let cl = &self.clauses[c];
                cl.learnt && !cl.deleted && cl.lbd > 2 && cl.lits.len() > 2
            })
            .filter(|&c| !self.locked(c))
            .collect();
        cands.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a], &self.clauses[b]);
            cb.lbd.cmp(&ca.lbd).then(
                ca.activity
                    .partial_cmp(&cb.activity)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
        });
        let remove = cands.len() / 2;
        for &c in &cands[..remove] {
            self.clauses[c].deleted = true;
            self.clauses[c].lits = Vec::new();
            self.num_learnt -= 1;
        }
        for ws in &mut self.watches {
            let clauses = &self.clauses;
            ws.retain(|w| !clauses[w.clause as usize].deleted);
        }
    }

    fn pick_branch(&mut self) -> Option<L> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(2 * v as u32 + u32::from(!self.polarity[v]));
            }
        }
        None
    }

    pub fn solve(&mut self, budget: Budget) -> SolveResult {
        if !self.ok {
            return SolveResult::Unsat;
        }
        let start = Instant::now();
        let mut restart = 1u64;
        let mut max_learnt = (self.clauses.len() / 3).max(2000) as f64;
        loop {
            let limit = 100 * luby(restart);
            restart += 1;
            let mut conflicts_here = 0;
            loop {
                let confl = self.propagate();
                if confl != NO_REASON {
                    self.stats.conflicts += 1;
                    conflicts_here += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return SolveResult::Unsat;
                    }
                    let (learnt, bt) = self.analyze(confl);
                    self.cancel_until(bt);
                    if learnt.len() == 1 {
                        self.enqueue(learnt[0], NO_REASON);
                    } else {
                        let lbd = self.lbd(&learnt);
                        let first = learnt[0];
                        let cref = self.attach(learnt, true, lbd);
                        self.bump_clause(cref as usize);
                        self.enqueue(first, cref);
                    }
                    self.stats.learnt += 1;
                    self.var_inc /= 0.95;
                    self.cla_inc /= 0.999;
                    if let Some(m) = budget.max_conflicts {
                        if self.stats.conflicts >= m {
                            self.cancel_until(0);
                            return SolveResult::Budget;
                        }
                    }
                    if let Some(t) = budget.max_time {
                        if self.stats.conflicts % 256 == 0 && start.elapsed() > t {
                            self.cancel_until(0);
                            return SolveResult::Budget;
                        }
                    }
                } else {
                    if conflicts_here >= limit {
                        self.stats.restarts += 1;
                        self.cancel_until(0);
                        break;
                    }
                    if self.num_learnt as f64 >= max_learnt + self.trail.len() as f64 {
                        self.reduce_db();
                        max_learnt *= 1.1;
                    }
                    match self.pick_branch() {
                        None => {
                            let model: Vec<bool> = self.assigns.iter().map(|&a| a == 1).collect();
                            self.cancel_until(0);
                            return SolveResult::Sat(model);
                        }
                        Some(l) => {
                            self.stats.decisions += 1;
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(l, NO_REASON);
                        }
                    }
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }
}

/// Solves an instance and checks any model against every clause.
pub fn solve(cnf: &CnfInstance, budget: Budget) -> SolveResult {
    if cnf.is_trivially_unsat() {
        return SolveResult::Unsat;
    }
    let mut s = Solver::new(cnf);
    let res = s.solve(budget);
    if let SolveResult::Sat(model) = &res {
        assert!(cnf.satisfied_by(model), "solver produced a non-model");
    }
    res
}
