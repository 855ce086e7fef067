//! DIMACS CNF text, with variable names carried in `c var` comment lines.

use std::fmt::Write;

use super::cnf::{CnfInstance, Lit};
use super::SatError;

pub fn export_dimacs(cnf: &CnfInstance) -> String {
    let mut out = String::new();
    for (v, name) in cnf.names() {
        writeln!(out, "c var {v} {name}").expect("write to string");
    }
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.num_clauses()).expect("write to string");
    for c in cnf.clauses() {
        for l in c {
            write!(out, "{l} ").expect("write to string");
        }
        out.push_str("0\n");
    }
    out
}

pub fn import_dimacs(text: &str) -> Result<CnfInstance, SatError> {
    let err = |line: usize, message: &str| SatError::Dimacs {
        line: line + 1,
        message: message.to_string(),
    };
    let mut header: Option<(u32, usize)> = None;
    let mut names = Vec::new();
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if let Some(named) = rest.trim_start().strip_prefix("var ") {
                let (v, name) = named
                    .split_once(' ')
                    .ok_or_else(|| err(i, "malformed var comment"))?;
                let v: u32 = v.parse().map_err(|_| err(i, "bad variable in comment"))?;
                names.push((v, name.to_string()));
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || parts[0] != "cnf" || header.is_some() {
                return Err(err(i, "bad problem line"));
            }
            let v = parts[1].parse().map_err(|_| err(i, "bad variable count"))?;
            let c = parts[2].parse().map_err(|_| err(i, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        let (nv, _) = header.ok_or_else(|| err(i, "clause before problem line"))?;
        for tok in line.split_whitespace() {
            let l: Lit = tok.parse().map_err(|_| err(i, "bad literal"))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if l.unsigned_abs() > nv {
                return Err(err(i, "literal exceeds variable count"));
            } else {
                current.push(l);
            }
        }
    }
    let (nv, nc) = header.ok_or_else(|| err(0, "missing problem line"))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != nc {
        return Err(SatError::Dimacs {
            line: text.lines().count(),
            message: format!("expected {nc} clauses, found {}", clauses.len()),
        });
    }
    let mut cnf = CnfInstance::with_vars(nv);
    for (v, name) in names {
        if v == 0 || v > nv {
            return Err(err(0, "named variable out of range"));
        }
        cnf.set_name(v, name);
    }
    for c in clauses {
        cnf.add_clause(c);
    }
    Ok(cnf)
}
