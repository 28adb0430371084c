//! Tseitin encoding of constrained circuits into DIMACS CNF.
//!
//! Variable `g + 1` stands for gate `g`. An AND gate `g = and(l1..ln)`
//! contributes `(-g | li)` for each child and `(g | -l1 | .. | -ln)`; each
//! constraint becomes a unit clause.

use crate::circuit::{ConstrainedCircuit, Literal};
use std::fmt::Write;

/// A CNF clause as signed DIMACS variables.
pub type Clause = Vec<i64>;

fn dimacs_var(gate: usize) -> i64 {
    gate as i64 + 1
}

fn dimacs_lit(lit: Literal) -> i64 {
    let v = dimacs_var(lit.gate());
    if lit.is_complemented() {
        -v
    } else {
        v
    }
}

/// Clauses of the Tseitin encoding, in gate order followed by the units.
pub fn tseitin_clauses(cc: &ConstrainedCircuit) -> Vec<Clause> {
    let c = cc.circuit();
    let mut clauses = Vec::new();
    for g in 0..c.num_gates() {
        if c.is_input(g) {
            continue;
        }
        let out = dimacs_var(g);
        let mut long = Vec::with_capacity(c.fanin(g).len() + 1);
        long.push(out);
        for &l in c.fanin(g) {
            clauses.push(vec![-out, dimacs_lit(l)]);
            long.push(-dimacs_lit(l));
        }
        clauses.push(long);
    }
    for (g, v) in cc.constraints() {
        clauses.push(vec![if v { dimacs_var(g) } else { -dimacs_var(g) }]);
    }
    clauses
}

/// Equisatisfiable DIMACS text for a constrained circuit.
pub fn export_dimacs(cc: &ConstrainedCircuit) -> String {
    let clauses = tseitin_clauses(cc);
    let mut s = String::new();
    writeln!(s, "p cnf {} {}", cc.circuit().num_gates(), clauses.len()).unwrap();
    for clause in &clauses {
        for lit in clause {
            write!(s, "{lit} ").unwrap();
        }
        s.push_str("0\n");
    }
    s
}
