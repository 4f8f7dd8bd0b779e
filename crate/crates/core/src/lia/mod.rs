//! Decision services for conjunctions of linear integer atoms.
//!
//! Everything rests on Fourier-Motzkin elimination over the rationals with
//! integer tightening of each row (`x < y` becomes `x + 1 =< y`, rows are
//! divided by their coefficient gcd). Rational unsatisfiability proves
//! integer unsatisfiability; satisfiability is only reported once an
//! integer point has been rebuilt and checked. Array atoms are dropped
//! before every query.

mod fm;

use crate::chc::{Atom, Constraint, ConstraintAtom, LinExpr, Rel, Var};
use crate::exec::Exec;
use fm::{Kind, Outcome, System};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Nested disequality splits per query.
pub const NE_SPLIT_DEPTH: usize = 6;
/// Leaves explored when refuting a negated disjunction.
pub const DNF_CAP: usize = 1 << 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Proved,
    Disproved,
    Unknown,
}

impl Verdict {
    /// Conjunction of two verdicts: Disproved wins over Unknown.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Disproved, _) | (_, Disproved) => Disproved,
            (Unknown, _) | (_, Unknown) => Unknown,
            _ => Proved,
        }
    }

    pub fn is_proved(self) -> bool {
        self == Verdict::Proved
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "proved",
            Verdict::Disproved => "disproved",
            Verdict::Unknown => "unknown",
        })
    }
}

/// `exists X1..Xm (c1 \/ ... \/ cn)` with n >= 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuantDisj {
    pub exists: Vec<Var>,
    pub disjuncts: Vec<Constraint>,
}

impl QuantDisj {
    /// An empty disjunct list is read as false.
    pub fn new(exists: Vec<Var>, disjuncts: Vec<Constraint>) -> QuantDisj {
        if disjuncts.is_empty() {
            return QuantDisj { exists: Vec::new(), disjuncts: vec![Constraint::falsity()] };
        }
        QuantDisj { exists, disjuncts }
    }

    pub fn conj(c: Constraint) -> QuantDisj {
        QuantDisj { exists: Vec::new(), disjuncts: vec![c] }
    }

    pub fn truth() -> QuantDisj {
        QuantDisj::conj(Constraint::truth())
    }

    pub fn falsum() -> QuantDisj {
        QuantDisj::conj(Constraint::falsity())
    }

    pub fn is_truth(&self) -> bool {
        self.disjuncts.iter().any(|d| d.is_true())
    }

    /// Syntactically false: every disjunct holds a variable-free false atom.
    pub fn is_falsum(&self) -> bool {
        self.disjuncts.iter().all(|d| {
            d.atoms().iter().any(|a| a.vars().is_empty() && a.eval(&|_| None) == Some(false))
        })
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.disjuncts.iter().flat_map(|d| d.vars()).collect();
        for v in &self.exists {
            out.remove(v);
        }
        out
    }

    /// Renames free variables by `f`, freshening existentials that would be
    /// captured or that clash with `avoid`.
    pub fn rename(&self, f: &dyn Fn(&Var) -> Var, avoid: &BTreeSet<String>) -> QuantDisj {
        let mut taken: BTreeSet<String> = avoid.clone();
        for v in self.free_vars() {
            taken.insert(f(&v).name().to_string());
        }
        let mut ex_map: BTreeMap<Var, Var> = BTreeMap::new();
        let mut exists = Vec::new();
        for v in &self.exists {
            let n = if taken.contains(v.name()) {
                crate::chc::fresh_name(v.name(), &|s| taken.contains(s))
            } else {
                v.name().to_string()
            };
            taken.insert(n.clone());
            let nv = v.renamed(&n);
            ex_map.insert(v.clone(), nv.clone());
            exists.push(nv);
        }
        let g = |v: &Var| ex_map.get(v).cloned().unwrap_or_else(|| f(v));
        QuantDisj { exists, disjuncts: self.disjuncts.iter().map(|d| d.rename(&g)).collect() }
    }

    /// Existentials renamed away from `avoid`.
    pub fn freshen(&self, avoid: &BTreeSet<String>) -> QuantDisj {
        self.rename(&|v| v.clone(), avoid)
    }

    /// Truth at an integer point; `None` when existentials or array atoms
    /// prevent direct evaluation, or a free variable is unbound.
    pub fn holds_at(&self, env: &dyn Fn(&Var) -> Option<i64>) -> Option<bool> {
        let mut any = false;
        for d in &self.disjuncts {
            let ex: Vec<&Var> = self.exists.iter().filter(|v| d.vars().contains(v)).collect();
            if !ex.is_empty() {
                return None;
            }
            any |= d.eval(env)?;
        }
        Some(any)
    }
}

impl fmt::Display for QuantDisj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.exists.is_empty() {
            f.write_str("exists")?;
            for v in &self.exists {
                write!(f, " {v}")?;
            }
            f.write_str(". ")?;
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" \\/ ")?;
            }
            if d.is_true() {
                f.write_str("true")?;
                continue;
            }
            f.write_str("(")?;
            for (j, a) in d.atoms().iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                let mut s = String::new();
                crate::chc::write_constraint_atom(&mut s, a);
                f.write_str(&s)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Linear part of `c` as rows; the flag says whether array atoms were
/// dropped.
fn system_of(c: &Constraint) -> (System, bool) {
    let mut sys = System::default();
    let mut dropped = false;
    for a in c.atoms() {
        match a {
            ConstraintAtom::Lin { lhs, rel, rhs } => {
                for (k, r) in fm::rows_of(lhs, *rel, rhs) {
                    sys.push(k, r);
                }
            }
            _ => dropped = true,
        }
    }
    (sys, dropped)
}

fn holds(sys: &System, env: &BTreeMap<Var, i128>) -> bool {
    sys.eqs.iter().all(|r| r.eval(env) == Some(0))
        && sys.les.iter().all(|r| r.eval(env).is_some_and(|x| x <= 0))
        && sys.nes.iter().all(|r| r.eval(env).is_some_and(|x| x != 0))
}

enum Sat {
    Yes(BTreeMap<Var, i128>),
    No,
    Unknown,
}

fn solve(sys: &System, depth: usize) -> Sat {
    let base = System { eqs: sys.eqs.clone(), les: sys.les.clone(), nes: Vec::new() };
    let witness = match fm::decide(&base) {
        Outcome::Unsat => return Sat::No,
        Outcome::GaveUp => return Sat::Unknown,
        Outcome::Open { witness } => witness,
    };
    let split_at = match &witness {
        Some(w) if holds(sys, w) => {
            let mut w = w.clone();
            for v in sys.vars() {
                w.entry(v).or_insert(0);
            }
            return Sat::Yes(w);
        }
        Some(w) => sys.nes.iter().position(|r| r.eval(w) == Some(0)),
        None => (!sys.nes.is_empty()).then_some(0),
    };
    let Some(i) = split_at else { return Sat::Unknown };
    if depth == 0 {
        return Sat::Unknown;
    }
    let ne = &sys.nes[i];
    let mut unknown = false;
    for side in [ne.offset(1), ne.negated().offset(1)] {
        let mut branch = sys.clone();
        branch.nes.remove(i);
        branch.les.push(side);
        match solve(&branch, depth - 1) {
            Sat::Yes(w) => return Sat::Yes(w),
            Sat::No => {}
            Sat::Unknown => unknown = true,
        }
    }
    if unknown {
        Sat::Unknown
    } else {
        Sat::No
    }
}

/// Satisfiability of `c` over the integers, with a witness when Proved.
pub fn check_sat(c: &Constraint) -> (Verdict, Option<BTreeMap<Var, i64>>) {
    let (sys, dropped) = system_of(c);
    match solve(&sys, NE_SPLIT_DEPTH) {
        Sat::No => (Verdict::Disproved, None),
        Sat::Unknown => (Verdict::Unknown, None),
        // the dropped read/write atoms might contradict the point
        Sat::Yes(_) if dropped => (Verdict::Unknown, None),
        Sat::Yes(w) => {
            let w: Option<BTreeMap<Var, i64>> =
                w.into_iter().map(|(v, x)| i64::try_from(x).ok().map(|x| (v, x))).collect();
            match w {
                Some(w) => (Verdict::Proved, Some(w)),
                None => (Verdict::Unknown, None),
            }
        }
    }
}

pub fn is_satisfiable(c: &Constraint) -> Verdict {
    check_sat(c).0
}

fn le(lhs: LinExpr, rhs: LinExpr) -> ConstraintAtom {
    ConstraintAtom::lin(lhs, Rel::Le, rhs)
}

/// Integer complement of a linear atom as a disjunction; non-linear atoms
/// have no complement here and yield an empty list.
pub fn negate_linatom(a: &ConstraintAtom) -> Vec<ConstraintAtom> {
    let ConstraintAtom::Lin { lhs, rel, rhs } = a else { return Vec::new() };
    let (l, r) = (lhs.clone(), rhs.clone());
    match rel {
        Rel::Le => vec![ConstraintAtom::lin(l, Rel::Ge, r.offset(1))],
        Rel::Lt => vec![ConstraintAtom::lin(l, Rel::Ge, r)],
        Rel::Ge => vec![le(l, r.offset(-1))],
        Rel::Gt => vec![le(l, r)],
        Rel::Eq => vec![le(l.clone(), r.offset(-1)), ConstraintAtom::lin(l, Rel::Ge, r.offset(1))],
        Rel::Ne => vec![ConstraintAtom::lin(l, Rel::Eq, r)],
    }
}

/// Whether every integer solution of `d` satisfies `x = y`.
pub fn entails_equality(d: &Constraint, x: &Var, y: &Var) -> Verdict {
    if x == y {
        return Verdict::Proved;
    }
    let (vx, vy) = (LinExpr::var(x), LinExpr::var(y));
    let below = is_satisfiable(&d.with(le(vx.clone(), vy.offset(-1))));
    let above = is_satisfiable(&d.with(le(vy, vx.offset(-1))));
    match (below, above) {
        (Verdict::Disproved, Verdict::Disproved) => Verdict::Proved,
        (Verdict::Proved, _) | (_, Verdict::Proved) => Verdict::Disproved,
        _ => Verdict::Unknown,
    }
}

/// The pairs `(x, y)`, `x` from `a` and `y` from `b`, with `d |= x = y`.
pub fn eq_set(d: &Constraint, a: &Atom, b: &Atom) -> BTreeSet<(Var, Var)> {
    eq_set_with(Exec::default(), d, a, b)
}

pub fn eq_set_with(exec: Exec, d: &Constraint, a: &Atom, b: &Atom) -> BTreeSet<(Var, Var)> {
    let ints = |at: &Atom| -> Vec<Var> { at.vars().into_iter().filter(|v| v.sort() == crate::chc::Sort::Int).collect() };
    let (xs, ys) = (ints(a), ints(b));
    // one integer point rules out most pairs without further queries
    let point = check_sat(d).1;
    let mut pairs = Vec::new();
    for x in &xs {
        for y in &ys {
            let differs = point.as_ref().is_some_and(|p| p.get(x).unwrap_or(&0) != p.get(y).unwrap_or(&0));
            if !differs {
                pairs.push((x.clone(), y.clone()));
            }
        }
    }
    let verdicts = exec.map(&pairs, |(x, y)| entails_equality(d, x, y));
    pairs.into_iter().zip(verdicts).filter(|(_, v)| v.is_proved()).map(|(p, _)| p).collect()
}

/// Eliminates the variables of `c` outside `keep`. The result is implied by
/// `c`; the flag tells whether it is also equivalent over the integers to
/// the existential closure.
pub fn project_exact(c: &Constraint, keep: &BTreeSet<Var>) -> (QuantDisj, bool) {
    if c.vars().iter().all(|v| keep.contains(v)) {
        return (QuantDisj::conj(c.clone()), true);
    }
    let mut sys = System::default();
    let mut arrays = Vec::new();
    let mut exact = true;
    for a in c.atoms() {
        match a {
            ConstraintAtom::Lin { lhs, rel, rhs } => {
                for (k, r) in fm::rows_of(lhs, *rel, rhs) {
                    sys.push(k, r);
                }
            }
            other if other.vars().iter().all(|v| keep.contains(v)) => arrays.push(other.clone()),
            _ => exact = false,
        }
    }
    match fm::eliminate(&sys, keep) {
        None => (QuantDisj::truth(), false),
        Some(None) => (QuantDisj::falsum(), exact),
        Some(Some(p)) => {
            let rest = System { eqs: p.eqs.clone(), les: p.les.clone(), nes: p.nes.clone() };
            if matches!(solve(&rest, NE_SPLIT_DEPTH), Sat::No) {
                return (QuantDisj::falsum(), exact);
            }
            let mut atoms: Vec<ConstraintAtom> = Vec::new();
            atoms.extend(p.eqs.iter().map(|r| r.to_atom(Kind::Eq)));
            atoms.extend(p.les.iter().map(|r| r.to_atom(Kind::Le)));
            atoms.extend(p.nes.iter().map(|r| r.to_atom(Kind::Ne)));
            atoms.extend(arrays);
            (QuantDisj::conj(Constraint::new(atoms)), exact && p.exact)
        }
    }
}

pub fn project(c: &Constraint, keep: &BTreeSet<Var>) -> QuantDisj {
    project_exact(c, keep).0
}

fn names(vars: impl IntoIterator<Item = Var>) -> BTreeSet<String> {
    vars.into_iter().map(|v| v.name().to_string()).collect()
}

/// Validity of `a -> rhs`, the free variables of `a` read universally.
pub fn implies(a: &Constraint, rhs: &QuantDisj) -> Verdict {
    let rhs = rhs.freshen(&names(a.vars()));
    match is_satisfiable(a) {
        Verdict::Disproved => return Verdict::Proved,
        _ if rhs.is_truth() => return Verdict::Proved,
        _ => {}
    }
    let mut exact = true;
    let mut negs: Vec<Vec<ConstraintAtom>> = Vec::new();
    for d in &rhs.disjuncts {
        let keep: BTreeSet<Var> = d.vars().into_iter().filter(|v| !rhs.exists.contains(v)).collect();
        let (p, ex) = project_exact(d, &keep);
        exact &= ex;
        let p = &p.disjuncts[0];
        if p.atoms().iter().any(|x| !x.is_lin()) {
            exact = false;
        }
        let alts: Vec<ConstraintAtom> = p.atoms().iter().flat_map(negate_linatom).collect();
        if p.atoms().iter().filter(|x| x.is_lin()).count() == 0 {
            // the disjunct projects to true
            if ex && !p.has_arrays() {
                return Verdict::Proved;
            }
            return Verdict::Unknown;
        }
        if alts.iter().any(|x| x.vars().is_empty() && x.eval(&|_| None) == Some(true)) {
            continue;
        }
        negs.push(alts);
    }
    let mut leaves = 0usize;
    let mut unknown = false;
    let v = refute(a, &negs, &mut leaves, &mut unknown);
    match v {
        Verdict::Disproved => Verdict::Disproved,
        _ if unknown || !exact || leaves > DNF_CAP => Verdict::Unknown,
        v => v,
    }
}

/// Depth-first search for a point of `acc` falsifying every remaining
/// disjunct. Proved means no such point exists.
fn refute(acc: &Constraint, negs: &[Vec<ConstraintAtom>], leaves: &mut usize, unknown: &mut bool) -> Verdict {
    if *leaves > DNF_CAP {
        *unknown = true;
        return Verdict::Unknown;
    }
    match is_satisfiable(acc) {
        Verdict::Disproved => {
            *leaves += 1;
            return Verdict::Proved;
        }
        Verdict::Proved if negs.is_empty() => return Verdict::Disproved,
        Verdict::Unknown if negs.is_empty() => {
            *unknown = true;
            return Verdict::Unknown;
        }
        _ => {}
    }
    for alt in &negs[0] {
        if refute(&acc.with(alt.clone()), &negs[1..], leaves, unknown) == Verdict::Disproved {
            return Verdict::Disproved;
        }
    }
    if *unknown {
        Verdict::Unknown
    } else {
        Verdict::Proved
    }
}

/// `c |= d`. Array atoms of `d` must occur verbatim in `c`.
pub fn entails(c: &Constraint, d: &Constraint) -> Verdict {
    let lin: Constraint = d.atoms().iter().filter(|a| a.is_lin()).cloned().collect();
    let arrays_ok = d.atoms().iter().filter(|a| !a.is_lin()).all(|a| c.atoms().contains(a));
    let v = implies(c, &QuantDisj::conj(lin));
    match (v, arrays_ok) {
        (Verdict::Proved, false) => Verdict::Unknown,
        (v, _) => v,
    }
}

/// Validity of `lhs <-> rhs` over the integers.
pub fn equiv_quant_disj(lhs: &QuantDisj, rhs: &QuantDisj) -> Verdict {
    let one_way = |l: &QuantDisj, r: &QuantDisj| -> Verdict {
        let mut all: BTreeSet<Var> = r.free_vars();
        all.extend(r.exists.iter().cloned());
        let l = l.freshen(&names(all));
        l.disjuncts.iter().fold(Verdict::Proved, |acc, d| {
            if acc == Verdict::Disproved {
                return acc;
            }
            acc.and(implies(d, r))
        })
    };
    one_way(lhs, rhs).and(one_way(rhs, lhs))
}

#[cfg(test)]
mod tests;
