//! Syntax of constrained Horn clauses over linear integer arithmetic.
//!
//! A clause is `H :- c, A1, ..., An` where `c` is a conjunction of linear
//! atoms (plus opaque array read/write atoms) and every atom argument is a
//! variable. Surface terms inside atoms are normalized away by the parser.

mod parse;
mod print;
mod subst;

pub use parse::parse_program;
pub use print::{print_clause, print_program};
pub(crate) use print::{write_atom as write_atom_to, write_constraint_atom};
pub use subst::{apply_subst, predicate_partition, rename_apart, reachable_preds, Subst};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Sort of a variable or predicate argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    IntArray,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("int"),
            Sort::IntArray => f.write_str("array"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    name: Arc<str>,
    sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var { name: Arc::from(name), sort }
    }

    pub fn int(name: &str) -> Var {
        Var::new(name, Sort::Int)
    }

    pub fn array(name: &str) -> Var {
        Var::new(name, Sort::IntArray)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sort(&self) -> Sort {
        self.sort
    }

    /// Same sort, different name.
    pub fn renamed(&self, name: &str) -> Var {
        Var::new(name, self.sort)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred(Arc<str>);

impl Pred {
    pub fn new(name: &str) -> Pred {
        Pred(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `sum(coeff * var) + constant`, zero coefficients never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    coeffs: BTreeMap<Var, i64>,
    constant: i64,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn constant(k: i64) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), constant: k }
    }

    pub fn var(v: &Var) -> LinExpr {
        LinExpr::term(v, 1)
    }

    pub fn term(v: &Var, k: i64) -> LinExpr {
        let mut e = LinExpr::zero();
        e.add_term(v, k);
        e
    }

    pub fn add_term(&mut self, v: &Var, k: i64) {
        if k == 0 {
            return;
        }
        let c = self.coeffs.entry(v.clone()).or_insert(0);
        *c += k;
        if *c == 0 {
            self.coeffs.remove(v);
        }
    }

    pub fn add_constant(&mut self, k: i64) {
        self.constant += k;
    }

    pub fn plus(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (v, k) in &other.coeffs {
            out.add_term(v, *k);
        }
        out.constant += other.constant;
        out
    }

    pub fn minus(&self, other: &LinExpr) -> LinExpr {
        self.plus(&other.scaled(-1))
    }

    pub fn scaled(&self, k: i64) -> LinExpr {
        if k == 0 {
            return LinExpr::zero();
        }
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn offset(&self, k: i64) -> LinExpr {
        let mut out = self.clone();
        out.constant += k;
        out
    }

    pub fn coeffs(&self) -> &BTreeMap<Var, i64> {
        &self.coeffs
    }

    pub fn coeff(&self, v: &Var) -> i64 {
        self.coeffs.get(v).copied().unwrap_or(0)
    }

    pub fn constant_value(&self) -> i64 {
        self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The single variable of `1*X + 0`, if that is the whole expression.
    pub fn as_var(&self) -> Option<&Var> {
        if self.constant != 0 || self.coeffs.len() != 1 {
            return None;
        }
        let (v, k) = self.coeffs.iter().next()?;
        (*k == 1).then_some(v)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<i64>) -> Option<i64> {
        let mut acc = self.constant;
        for (v, k) in &self.coeffs {
            acc = acc.checked_add(k.checked_mul(env(v)?)?)?;
        }
        Some(acc)
    }

    pub fn rename(&self, f: &dyn Fn(&Var) -> Var) -> LinExpr {
        let mut out = LinExpr::constant(self.constant);
        for (v, k) in &self.coeffs {
            out.add_term(&f(v), *k);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    Ne,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "=<",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Ne => "=\\=",
        }
    }

    pub fn holds(self, l: i64, r: i64) -> bool {
        match self {
            Rel::Eq => l == r,
            Rel::Le => l <= r,
            Rel::Lt => l < r,
            Rel::Ge => l >= r,
            Rel::Gt => l > r,
            Rel::Ne => l != r,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintAtom {
    Lin { lhs: LinExpr, rel: Rel, rhs: LinExpr },
    /// `val = arr[idx]`
    Read { arr: Var, idx: Var, val: Var },
    /// `out = arr[idx := val]`
    Write { arr: Var, idx: Var, val: Var, out: Var },
    /// Equality of two array variables.
    ArrEq { lhs: Var, rhs: Var },
}

impl ConstraintAtom {
    pub fn lin(lhs: LinExpr, rel: Rel, rhs: LinExpr) -> ConstraintAtom {
        ConstraintAtom::Lin { lhs, rel, rhs }
    }

    /// `x = y` for two variables of the same sort.
    pub fn var_eq(x: &Var, y: &Var) -> ConstraintAtom {
        match x.sort() {
            Sort::Int => ConstraintAtom::lin(LinExpr::var(x), Rel::Eq, LinExpr::var(y)),
            Sort::IntArray => ConstraintAtom::ArrEq { lhs: x.clone(), rhs: y.clone() },
        }
    }

    pub fn is_lin(&self) -> bool {
        matches!(self, ConstraintAtom::Lin { .. })
    }

    pub fn vars(&self) -> Vec<Var> {
        match self {
            ConstraintAtom::Lin { lhs, rhs, .. } => {
                let mut out: Vec<Var> = lhs.vars().cloned().collect();
                for v in rhs.vars() {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                out
            }
            ConstraintAtom::Read { arr, idx, val } => vec![arr.clone(), idx.clone(), val.clone()],
            ConstraintAtom::Write { arr, idx, val, out } => {
                vec![arr.clone(), idx.clone(), val.clone(), out.clone()]
            }
            ConstraintAtom::ArrEq { lhs, rhs } => vec![lhs.clone(), rhs.clone()],
        }
    }

    pub fn rename(&self, f: &dyn Fn(&Var) -> Var) -> ConstraintAtom {
        match self {
            ConstraintAtom::Lin { lhs, rel, rhs } => {
                ConstraintAtom::lin(lhs.rename(f), *rel, rhs.rename(f))
            }
            ConstraintAtom::Read { arr, idx, val } => {
                ConstraintAtom::Read { arr: f(arr), idx: f(idx), val: f(val) }
            }
            ConstraintAtom::Write { arr, idx, val, out } => {
                ConstraintAtom::Write { arr: f(arr), idx: f(idx), val: f(val), out: f(out) }
            }
            ConstraintAtom::ArrEq { lhs, rhs } => ConstraintAtom::ArrEq { lhs: f(lhs), rhs: f(rhs) },
        }
    }

    /// Truth value under an integer valuation; `None` for array atoms or
    /// unbound variables.
    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<i64>) -> Option<bool> {
        match self {
            ConstraintAtom::Lin { lhs, rel, rhs } => Some(rel.holds(lhs.eval(env)?, rhs.eval(env)?)),
            _ => None,
        }
    }
}

/// Conjunction of constraint atoms; the empty conjunction is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    atoms: Vec<ConstraintAtom>,
}

impl Constraint {
    pub fn new(atoms: Vec<ConstraintAtom>) -> Constraint {
        Constraint { atoms }
    }

    pub fn truth() -> Constraint {
        Constraint::default()
    }

    /// The canonical unsatisfiable conjunction `1 =< 0`.
    pub fn falsity() -> Constraint {
        Constraint::new(vec![ConstraintAtom::lin(
            LinExpr::constant(1),
            Rel::Le,
            LinExpr::constant(0),
        )])
    }

    pub fn atoms(&self) -> &[ConstraintAtom] {
        &self.atoms
    }

    pub fn into_atoms(self) -> Vec<ConstraintAtom> {
        self.atoms
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn push(&mut self, a: ConstraintAtom) {
        self.atoms.push(a);
    }

    pub fn and(&self, other: &Constraint) -> Constraint {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Constraint { atoms }
    }

    pub fn with(&self, a: ConstraintAtom) -> Constraint {
        let mut out = self.clone();
        out.push(a);
        out
    }

    pub fn has_arrays(&self) -> bool {
        self.atoms.iter().any(|a| !a.is_lin())
    }

    /// Variables in order of first occurrence.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for a in &self.atoms {
            for v in a.vars() {
                if seen.insert(v.clone()) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn rename(&self, f: &dyn Fn(&Var) -> Var) -> Constraint {
        Constraint { atoms: self.atoms.iter().map(|a| a.rename(f)).collect() }
    }

    /// Truth value under a total integer valuation; `None` if an array atom
    /// is present or a variable is unbound.
    pub fn eval(&self, env: &dyn Fn(&Var) -> Option<i64>) -> Option<bool> {
        let mut all = true;
        for a in &self.atoms {
            all &= a.eval(env)?;
        }
        Some(all)
    }
}

impl FromIterator<ConstraintAtom> for Constraint {
    fn from_iter<T: IntoIterator<Item = ConstraintAtom>>(iter: T) -> Self {
        Constraint { atoms: iter.into_iter().collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Var>) -> Atom {
        Atom { pred: Pred::new(pred), args }
    }

    pub fn rename(&self, f: &dyn Fn(&Var) -> Var) -> Atom {
        Atom { pred: self.pred.clone(), args: self.args.iter().map(f).collect() }
    }

    /// Distinct argument variables in order.
    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for a in &self.args {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    False,
    Atom(Atom),
}

impl Head {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Head::False => None,
            Head::Atom(a) => Some(a),
        }
    }

    pub fn pred(&self) -> Option<&Pred> {
        self.atom().map(|a| &a.pred)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseId(pub u64);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub id: ClauseId,
    pub head: Head,
    pub constraint: Constraint,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn new(id: ClauseId, head: Head, constraint: Constraint, body: Vec<Atom>) -> Clause {
        Clause { id, head, constraint, body }
    }

    pub fn is_goal(&self) -> bool {
        matches!(self.head, Head::False)
    }

    pub fn is_linear(&self) -> bool {
        self.body.len() <= 1
    }

    /// Variables in order of first occurrence: head, constraint, body.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut add = |v: &Var| {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        };
        if let Head::Atom(h) = &self.head {
            h.args.iter().for_each(&mut add);
        }
        for a in self.constraint.atoms() {
            a.vars().iter().for_each(&mut add);
        }
        for b in &self.body {
            b.args.iter().for_each(&mut add);
        }
        out
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        self.vars().into_iter().collect()
    }

    pub fn rename(&self, f: &dyn Fn(&Var) -> Var) -> Clause {
        Clause {
            id: self.id,
            head: match &self.head {
                Head::False => Head::False,
                Head::Atom(a) => Head::Atom(a.rename(f)),
            },
            constraint: self.constraint.rename(f),
            body: self.body.iter().map(|a| a.rename(f)).collect(),
        }
    }

    /// Clause equality ignoring ids.
    pub fn same_shape(&self, other: &Clause) -> bool {
        self.head == other.head && self.constraint == other.constraint && self.body == other.body
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_clause(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChcError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("sort mismatch for {what}: {expected} vs {found}")]
    SortMismatch { what: String, expected: Sort, found: Sort },
    #[error("predicate {pred} used with arity {found}, expected {expected}")]
    ArityClash { pred: Pred, expected: usize, found: usize },
    #[error("no clause with id {0}")]
    UnknownClause(ClauseId),
    #[error("duplicate clause id {0}")]
    DuplicateId(ClauseId),
    #[error("predicates {0} occur on both sides of the partition")]
    Overlap(Pred),
    #[error("predicate {0} does not occur in the program")]
    UnknownPred(Pred),
}

/// A set of clauses with predicate signatures and a monotone id counter.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    clauses: Vec<Clause>,
    signatures: BTreeMap<Pred, Vec<Sort>>,
    next_id: u64,
}

impl Program {
    pub fn new() -> Program {
        Program { clauses: Vec::new(), signatures: BTreeMap::new(), next_id: 1 }
    }

    /// Builds a program keeping the given ids; signatures are taken from use.
    pub fn from_clauses(clauses: Vec<Clause>) -> Result<Program, ChcError> {
        let mut p = Program::new();
        for c in clauses {
            p.insert(c)?;
        }
        Ok(p)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn signatures(&self) -> &BTreeMap<Pred, Vec<Sort>> {
        &self.signatures
    }

    pub fn signature(&self, p: &Pred) -> Option<&[Sort]> {
        self.signatures.get(p).map(|s| s.as_slice())
    }

    pub fn get(&self, id: ClauseId) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.id == id)
    }

    pub fn position(&self, id: ClauseId) -> Option<usize> {
        self.clauses.iter().position(|c| c.id == id)
    }

    pub fn contains(&self, id: ClauseId) -> bool {
        self.position(id).is_some()
    }

    pub fn ids(&self) -> Vec<ClauseId> {
        self.clauses.iter().map(|c| c.id).collect()
    }

    /// Next id that `mint_id` would return.
    pub fn peek_id(&self) -> ClauseId {
        ClauseId(self.next_id)
    }

    pub fn mint_id(&mut self) -> ClauseId {
        let id = ClauseId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Makes sure ids minted later are larger than `id`.
    pub fn reserve_ids(&mut self, id: ClauseId) {
        self.next_id = self.next_id.max(id.0 + 1);
    }

    pub fn declare(&mut self, pred: &Pred, sorts: Vec<Sort>) -> Result<(), ChcError> {
        match self.signatures.get(pred) {
            Some(old) => check_signature(pred, old, &sorts),
            None => {
                self.signatures.insert(pred.clone(), sorts);
                Ok(())
            }
        }
    }

    fn check_atom(&mut self, a: &Atom) -> Result<(), ChcError> {
        let sorts: Vec<Sort> = a.args.iter().map(|v| v.sort()).collect();
        self.declare(&a.pred, sorts)
    }

    fn check_clause(&mut self, c: &Clause) -> Result<(), ChcError> {
        if let Head::Atom(h) = &c.head {
            self.check_atom(h)?;
        }
        for b in &c.body {
            self.check_atom(b)?;
        }
        Ok(())
    }

    /// Appends a clause keeping its id.
    pub fn insert(&mut self, c: Clause) -> Result<(), ChcError> {
        if self.contains(c.id) {
            return Err(ChcError::DuplicateId(c.id));
        }
        self.check_clause(&c)?;
        self.reserve_ids(c.id);
        self.clauses.push(c);
        Ok(())
    }

    /// Appends a clause under a freshly minted id.
    pub fn add(&mut self, mut c: Clause) -> Result<ClauseId, ChcError> {
        self.check_clause(&c)?;
        c.id = self.mint_id();
        let id = c.id;
        self.clauses.push(c);
        Ok(id)
    }

    /// Replaces clause `id` in place by `new` (fresh ids), returning them.
    pub fn replace(&mut self, id: ClauseId, new: Vec<Clause>) -> Result<Vec<ClauseId>, ChcError> {
        let pos = self.position(id).ok_or(ChcError::UnknownClause(id))?;
        for c in &new {
            self.check_clause(c)?;
        }
        let mut ids = Vec::new();
        let mut fresh = Vec::new();
        for mut c in new {
            c.id = self.mint_id();
            ids.push(c.id);
            fresh.push(c);
        }
        self.clauses.splice(pos..=pos, fresh);
        Ok(ids)
    }

    pub fn remove(&mut self, id: ClauseId) -> Option<Clause> {
        let pos = self.position(id)?;
        Some(self.clauses.remove(pos))
    }

    /// Predicates in head or body position, in signature order.
    pub fn predicates(&self) -> BTreeSet<Pred> {
        let mut out = BTreeSet::new();
        for c in &self.clauses {
            if let Some(p) = c.head.pred() {
                out.insert(p.clone());
            }
            for b in &c.body {
                out.insert(b.pred.clone());
            }
        }
        out
    }

    pub fn clauses_of<'a>(&'a self, p: &'a Pred) -> impl Iterator<Item = &'a Clause> + 'a {
        self.clauses.iter().filter(move |c| c.head.pred() == Some(p))
    }

    pub fn goals(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.is_goal())
    }

    /// The definite clauses, keeping ids and signatures.
    pub fn definite_part(&self) -> Program {
        let mut p = self.clone();
        p.clauses.retain(|c| !c.is_goal());
        p
    }

    /// Subprogram made of the given clauses (by id), keeping signatures.
    pub fn restrict(&self, keep: &dyn Fn(&Clause) -> bool) -> Program {
        let mut p = self.clone();
        p.clauses.retain(|c| keep(c));
        p
    }

    /// Clause-wise equality ignoring ids.
    pub fn same_clauses(&self, other: &Program) -> bool {
        self.clauses.len() == other.clauses.len()
            && self.clauses.iter().zip(&other.clauses).all(|(a, b)| a.same_shape(b))
    }

    pub fn has_arrays(&self) -> bool {
        self.signatures.values().any(|s| s.contains(&Sort::IntArray))
            || self.clauses.iter().any(|c| c.constraint.has_arrays())
    }
}

fn check_signature(pred: &Pred, old: &[Sort], new: &[Sort]) -> Result<(), ChcError> {
    if old.len() != new.len() {
        return Err(ChcError::ArityClash { pred: pred.clone(), expected: old.len(), found: new.len() });
    }
    for (i, (a, b)) in old.iter().zip(new).enumerate() {
        if a != b {
            return Err(ChcError::SortMismatch {
                what: format!("argument {} of {}", i + 1, pred),
                expected: *a,
                found: *b,
            });
        }
    }
    Ok(())
}

/// A name not in `taken`, derived from `base`.
pub fn fresh_name(base: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let stem = match base.rfind('_') {
        Some(i) if i > 0 && base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() => {
            &base[..i]
        }
        _ => base,
    };
    (1..)
        .map(|k| format!("{stem}_{k}"))
        .find(|n| !taken(n))
        .expect("unbounded counter")
}
