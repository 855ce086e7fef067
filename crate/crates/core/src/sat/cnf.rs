//! CNF instances with signed DIMACS-style literals and variable annotations.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

/// Literal in DIMACS convention: `v` or `-v` for variable `v ≥ 1`.
pub type Lit = i32;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CnfInstance {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    names: BTreeMap<u32, String>,
    /// Set when an empty clause was added on purpose.
    trivially_unsat: bool,
}

impl CnfInstance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vars(num_vars: u32) -> Self {
        CnfInstance {
            num_vars,
            ..Self::default()
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn names(&self) -> &BTreeMap<u32, String> {
        &self.names
    }

    pub fn name(&self, var: u32) -> Option<&str> {
        self.names.get(&var).map(String::as_str)
    }

    pub fn is_trivially_unsat(&self) -> bool {
        self.trivially_unsat
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    pub fn new_named_var(&mut self, name: impl Into<String>) -> Lit {
        let v = self.new_var();
        self.names.insert(v as u32, name.into());
        v
    }

    pub fn set_name(&mut self, var: u32, name: impl Into<String>) {
        self.names.insert(var, name.into());
    }

    /// Adds a clause. Literals must reference declared variables; an empty
    /// clause marks the instance as unsatisfiable.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = Lit>) {
        let clause: Vec<Lit> = lits.into_iter().collect();
        for &l in &clause {
            assert!(
                l != 0 && l.unsigned_abs() <= self.num_vars,
                "literal {l} references an undeclared variable"
            );
        }
        if clause.is_empty() {
            self.trivially_unsat = true;
        }
        self.clauses.push(clause);
    }

    /// Whether an assignment (`model[v - 1]` for variable `v`) satisfies
    /// every clause.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        model.len() >= self.num_vars as usize
            && self.clauses.iter().all(|c| {
                c.iter()
                    .any(|&l| model[(l.unsigned_abs() - 1) as usize] == (l > 0))
            })
    }

    /// SHA-256 over the variable count and the clause list.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.num_vars.to_le_bytes());
        for c in &self.clauses {
            for &l in c {
                h.update(l.to_le_bytes());
            }
            h.update(0i32.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn satisfaction_check() {
        let mut cnf = CnfInstance::with_vars(2);
        cnf.add_clause([1, -2]);
        assert!(cnf.satisfied_by(&[true, true]));
        assert!(!cnf.satisfied_by(&[false, true]));
    }

    #[test]
    fn hash_depends_on_clauses() {
        let mut a = CnfInstance::with_vars(2);
        a.add_clause([1, 2]);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.add_clause([-1]);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    #[should_panic]
    fn undeclared_literal() {
        CnfInstance::with_vars(1).add_clause([2]);
    }
}
