use super::{fresh_name, Atom, ChcError, Clause, ClauseId, Constraint, Pred, Program, Var};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Variable-to-variable substitution; unmapped variables stay put.
pub type Subst = BTreeMap<Var, Var>;

pub trait Substitutable: Sized {
    fn rename_with(&self, f: &dyn Fn(&Var) -> Var) -> Self;
}

impl Substitutable for Clause {
    fn rename_with(&self, f: &dyn Fn(&Var) -> Var) -> Self {
        self.rename(f)
    }
}

impl Substitutable for Atom {
    fn rename_with(&self, f: &dyn Fn(&Var) -> Var) -> Self {
        self.rename(f)
    }
}

impl Substitutable for Vec<Atom> {
    fn rename_with(&self, f: &dyn Fn(&Var) -> Var) -> Self {
        self.iter().map(|a| a.rename(f)).collect()
    }
}

impl Substitutable for Constraint {
    fn rename_with(&self, f: &dyn Fn(&Var) -> Var) -> Self {
        self.rename(f)
    }
}

/// Simultaneous substitution.
pub fn apply_subst<T: Substitutable>(target: &T, theta: &Subst) -> Result<T, ChcError> {
    for (from, to) in theta {
        if from.sort() != to.sort() {
            return Err(ChcError::SortMismatch {
                what: format!("substitution {from} -> {to}"),
                expected: from.sort(),
                found: to.sort(),
            });
        }
    }
    Ok(target.rename_with(&|v| theta.get(v).cloned().unwrap_or_else(|| v.clone())))
}

/// Variant of `c` sharing no variable name with `avoid`.
pub fn rename_apart(c: &Clause, avoid: &BTreeSet<Var>) -> Clause {
    let avoid_names: BTreeSet<&str> = avoid.iter().map(|v| v.name()).collect();
    let vars = c.vars();
    let mut taken: BTreeSet<String> = vars.iter().map(|v| v.name().to_string()).collect();
    taken.extend(avoid_names.iter().map(|s| s.to_string()));
    let mut theta = Subst::new();
    for v in vars {
        if avoid_names.contains(v.name()) {
            let n = fresh_name(v.name(), &|s| taken.contains(s));
            taken.insert(n.clone());
            theta.insert(v.clone(), v.renamed(&n));
        }
    }
    if theta.is_empty() {
        return c.clone();
    }
    c.rename(&|v| theta.get(v).cloned().unwrap_or_else(|| v.clone()))
}

/// Predicates reachable from `q` through head-to-body edges, `q` included.
pub fn reachable_preds(p: &Program, q: &Pred) -> BTreeSet<Pred> {
    let mut edges: BTreeMap<&Pred, BTreeSet<&Pred>> = BTreeMap::new();
    for c in p.clauses() {
        if let Some(h) = c.head.pred() {
            edges.entry(h).or_default().extend(c.body.iter().map(|b| &b.pred));
        }
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([q.clone()]);
    while let Some(x) = queue.pop_front() {
        if !seen.insert(x.clone()) {
            continue;
        }
        if let Some(next) = edges.get(&x) {
            queue.extend(next.iter().map(|p| (*p).clone()));
        }
    }
    seen
}

/// Splits off the clauses defining the predicates reachable from `q` and
/// from `r`; the two cones must be disjoint.
pub fn predicate_partition(p: &Program, q: &Pred, r: &Pred) -> Result<(Program, Program), ChcError> {
    let preds = p.predicates();
    for x in [q, r] {
        if !preds.contains(x) {
            return Err(ChcError::UnknownPred(x.clone()));
        }
    }
    let qs = reachable_preds(p, q);
    let rs = reachable_preds(p, r);
    if let Some(shared) = qs.intersection(&rs).next() {
        return Err(ChcError::Overlap(shared.clone()));
    }
    let pick = |set: &BTreeSet<Pred>| -> Result<Program, ChcError> {
        let mut out = Program::new();
        for c in p.clauses() {
            if c.head.pred().is_some_and(|h| set.contains(h)) {
                out.insert(c.clone())?;
            }
        }
        for x in set {
            if let Some(s) = p.signature(x) {
                out.declare(x, s.to_vec())?;
            }
        }
        out.reserve_ids(ClauseId(p.peek_id().0.saturating_sub(1)));
        Ok(out)
    };
    Ok((pick(&qs)?, pick(&rs)?))
}
