use super::{Atom, Clause, ConstraintAtom, Head, LinExpr, Program, Sort};
use std::fmt::Write;

pub(crate) fn write_linexpr(out: &mut String, e: &LinExpr) {
    let mut first = true;
    for (v, k) in e.coeffs() {
        let (neg, mag) = (*k < 0, k.unsigned_abs());
        match (first, neg) {
            (true, true) => out.push('-'),
            (true, false) => {}
            (false, true) => out.push_str(" - "),
            (false, false) => out.push_str(" + "),
        }
        if mag != 1 {
            let _ = write!(out, "{mag}*");
        }
        out.push_str(v.name());
        first = false;
    }
    let c = e.constant_value();
    if first {
        let _ = write!(out, "{c}");
    } else if c > 0 {
        let _ = write!(out, " + {c}");
    } else if c < 0 {
        let _ = write!(out, " - {}", c.unsigned_abs());
    }
}

pub(crate) fn write_atom(out: &mut String, a: &Atom) {
    out.push_str(a.pred.name());
    if !a.args.is_empty() {
        out.push('(');
        for (i, v) in a.args.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(v.name());
        }
        out.push(')');
    }
}

pub(crate) fn write_constraint_atom(out: &mut String, a: &ConstraintAtom) {
    match a {
        ConstraintAtom::Lin { lhs, rel, rhs } => {
            write_linexpr(out, lhs);
            let _ = write!(out, " {} ", rel.symbol());
            write_linexpr(out, rhs);
        }
        ConstraintAtom::Read { arr, idx, val } => {
            let _ = write!(out, "read({arr},{idx},{val})");
        }
        ConstraintAtom::Write { arr, idx, val, out: o } => {
            let _ = write!(out, "write({arr},{idx},{val},{o})");
        }
        ConstraintAtom::ArrEq { lhs, rhs } => {
            let _ = write!(out, "{lhs} = {rhs}");
        }
    }
}

pub fn print_clause(c: &Clause) -> String {
    let mut out = String::new();
    match &c.head {
        Head::False => out.push_str("false"),
        Head::Atom(a) => write_atom(&mut out, a),
    }
    let mut first = true;
    let mut sep = |out: &mut String| {
        out.push_str(if first { " :- " } else { ", " });
        first = false;
    };
    for a in c.constraint.atoms() {
        sep(&mut out);
        write_constraint_atom(&mut out, a);
    }
    for b in &c.body {
        sep(&mut out);
        write_atom(&mut out, b);
    }
    out.push('.');
    out
}

/// One clause per line, preceded by sort declarations for predicates that
/// have array arguments or no clause occurrence.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    let used = p.predicates();
    for (pred, sorts) in p.signatures() {
        if sorts.contains(&Sort::IntArray) || !used.contains(pred) {
            let _ = write!(out, ":- sorts {pred}");
            if !sorts.is_empty() {
                let names: Vec<String> = sorts.iter().map(|s| s.to_string()).collect();
                let _ = write!(out, "({})", names.join(", "));
            }
            out.push_str(".\n");
        }
    }
    for c in p.clauses() {
        out.push_str(&print_clause(c));
        out.push('\n');
    }
    out
}
