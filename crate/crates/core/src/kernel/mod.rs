//! The definition, unfolding, folding and constraint replacement rules as
//! checked transitions over a [`TransformationState`].
//!
//! Every successful application appends a [`TraceStep`]; failed
//! applications leave the state untouched.

mod trace;

pub use trace::{check_all_defs_unfolded, classify_sequence, parse_trace, render_step, Classification};

use crate::chc::{
    apply_subst, fresh_name, Atom, ChcError, Clause, ClauseId, Constraint, ConstraintAtom, Head, Pred, Program,
    Subst, Var,
};
use crate::lia::{self, QuantDisj, Verdict};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Definition,
    Unfolding,
    Folding,
    ConstraintReplacement,
}

impl Rule {
    pub fn tag(self) -> &'static str {
        match self {
            Rule::Definition => "DEFINE",
            Rule::Unfolding => "UNFOLD",
            Rule::Folding => "FOLD",
            Rule::ConstraintReplacement => "REPLACE",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Which constraints definitions may carry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AClass {
    /// Any conjunction of linear atoms.
    #[default]
    Lia,
    /// Atoms over at most two variables with unit coefficients, and of
    /// opposite sign when there are two (`X > 0`, `X = 0`, `X > Y`, ...).
    TwoVar,
}

impl AClass {
    pub fn admits(self, c: &Constraint) -> Result<(), String> {
        for a in c.atoms() {
            let ConstraintAtom::Lin { lhs, rhs, .. } = a else {
                return Err(format!("array atom {} outside the linear class", show_atom(a)));
            };
            if self == AClass::TwoVar {
                let d = lhs.minus(rhs);
                let ks: Vec<i64> = d.coeffs().values().copied().collect();
                let ok = ks.iter().all(|k| k.abs() == 1) && (ks.len() < 2 || (ks.len() == 2 && ks[0] == -ks[1]));
                if !ok {
                    return Err(format!("{} is not a two-variable comparison", show_atom(a)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelConfig {
    pub a_class: AClass,
    /// Drop fold-constraint atoms entailed by the rest and the definition.
    pub simplify_fold: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { a_class: AClass::Lia, simplify_fold: false }
    }
}

/// One rule application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: Rule,
    /// The rewritten clause (fold: the clause then the definition; replace:
    /// the whole group).
    pub inputs: Vec<ClauseId>,
    pub positions: Vec<usize>,
    pub def: Option<ClauseId>,
    pub subst: Subst,
    pub outputs: Vec<ClauseId>,
    pub added: Vec<Clause>,
    pub removed: Vec<Clause>,
    /// Clauses whose heads matched the unfolded atom.
    pub used: Vec<Clause>,
    pub self_unfolding: bool,
    pub reversible_folding: bool,
}

impl TraceStep {
    fn new(rule: Rule) -> TraceStep {
        TraceStep {
            rule,
            inputs: Vec::new(),
            positions: Vec::new(),
            def: None,
            subst: Subst::new(),
            outputs: Vec::new(),
            added: Vec::new(),
            removed: Vec::new(),
            used: Vec::new(),
            self_unfolding: false,
            reversible_folding: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("predicate {0} is not fresh")]
    FreshnessViolation(Pred),
    #[error("constraint outside the definition class: {0}")]
    ConstraintClassViolation(String),
    #[error("body predicate {0} does not occur in the initial program")]
    NonP0Predicate(Pred),
    #[error("bad definition head: {0}")]
    HeadVarViolation(String),
    #[error("no clause {0} in the current program")]
    NoSuchClause(ClauseId),
    #[error("clause {clause} has no body atom at position {pos}")]
    BadPosition { clause: ClauseId, pos: usize },
    #[error("clause {0} is not a definition")]
    NotADefinition(ClauseId),
    #[error("definition body does not match: {0}")]
    MatchFailure(String),
    #[error("constraint does not entail {atom} ({verdict})")]
    EntailmentFailure { atom: String, verdict: Verdict },
    #[error("variable condition violated: {0}")]
    VarConditionViolation(String),
    #[error("replacement group differs in head or body: {0}")]
    ShapeMismatch(String),
    #[error("constraint equivalence not proved ({0})")]
    EquivalenceNotProved(Verdict),
    #[error(transparent)]
    Chc(#[from] ChcError),
}

fn show_atom(a: &ConstraintAtom) -> String {
    let mut s = String::new();
    crate::chc::write_constraint_atom(&mut s, a);
    s
}

/// `P_i`, `Defs_i` and the steps that led there.
#[derive(Clone, Debug)]
pub struct TransformationState {
    current: Program,
    defs: Program,
    trace: Vec<TraceStep>,
    log: Vec<String>,
    p0_preds: BTreeSet<Pred>,
    seen_preds: BTreeSet<Pred>,
    config: KernelConfig,
}

/// Result of a dry-run fold.
#[derive(Clone, Debug)]
pub struct FoldPlan {
    pub clause: Clause,
    pub theta: Subst,
}

impl TransformationState {
    pub fn new(p0: Program, config: KernelConfig) -> TransformationState {
        let preds = p0.predicates();
        let mut seen = preds.clone();
        seen.extend(p0.signatures().keys().cloned());
        TransformationState {
            defs: Program::new(),
            current: p0,
            trace: Vec::new(),
            log: Vec::new(),
            p0_preds: preds,
            seen_preds: seen,
            config,
        }
    }

    pub fn current(&self) -> &Program {
        &self.current
    }

    pub fn defs(&self) -> &Program {
        &self.defs
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    pub fn config(&self) -> KernelConfig {
        self.config
    }

    /// Trace lines plus strategy notes, in order.
    pub fn log(&self) -> &[String] {
        &self.log
    }

    pub fn note(&mut self, line: String) {
        self.log.push(line);
    }

    /// Starts a new sequence on the current program: its predicates become
    /// the initial ones. Definitions and history are kept.
    pub fn begin_round(&mut self) {
        self.p0_preds = self.current.predicates();
    }

    pub fn p0_preds(&self) -> &BTreeSet<Pred> {
        &self.p0_preds
    }

    /// A predicate name derived from `base` never used in this sequence.
    pub fn fresh_pred(&self, base: &str) -> Pred {
        let taken = |s: &str| self.seen_preds.contains(&Pred::new(s));
        let name = (1..).map(|k| format!("{base}{k}")).find(|n| !taken(n)).expect("unbounded");
        Pred::new(&name)
    }

    fn record(&mut self, step: TraceStep) {
        for c in &step.added {
            if let Some(p) = c.head.pred() {
                self.seen_preds.insert(p.clone());
            }
            self.seen_preds.extend(c.body.iter().map(|b| b.pred.clone()));
        }
        self.log.push(render_step(self.trace.len() + 1, &step));
        self.trace.push(step);
    }

    fn clause(&self, id: ClauseId) -> Result<&Clause, KernelError> {
        self.current.get(id).ok_or(KernelError::NoSuchClause(id))
    }

    /// Introduces `d` as a new definition and returns its id.
    pub fn apply_definition(&mut self, d: Clause) -> Result<ClauseId, KernelError> {
        let Head::Atom(head) = &d.head else {
            return Err(KernelError::HeadVarViolation("a definition needs a head atom".into()));
        };
        let fresh = !self.seen_preds.contains(&head.pred)
            && !self.current.predicates().contains(&head.pred)
            && !self.defs.predicates().contains(&head.pred);
        if !fresh {
            return Err(KernelError::FreshnessViolation(head.pred.clone()));
        }
        self.config.a_class.admits(&d.constraint).map_err(KernelError::ConstraintClassViolation)?;
        if d.body.is_empty() {
            return Err(KernelError::NonP0Predicate(head.pred.clone()));
        }
        if let Some(b) = d.body.iter().find(|b| !self.p0_preds.contains(&b.pred)) {
            return Err(KernelError::NonP0Predicate(b.pred.clone()));
        }
        let body_vars: BTreeSet<Var> = d.constraint.vars().into_iter().chain(d.body.iter().flat_map(|b| b.vars())).collect();
        let mut seen = BTreeSet::new();
        for x in &head.args {
            if !seen.insert(x) {
                return Err(KernelError::HeadVarViolation(format!("{x} repeated in the head")));
            }
            if !body_vars.contains(x) {
                return Err(KernelError::HeadVarViolation(format!("{x} does not occur in the body")));
            }
        }
        let mut current = self.current.clone();
        let id = current.add(d.clone())?;
        let mut d = d;
        d.id = id;
        let mut defs = self.defs.clone();
        defs.insert(d.clone())?;
        self.current = current;
        self.defs = defs;
        let mut step = TraceStep::new(Rule::Definition);
        step.outputs = vec![id];
        step.added = vec![d];
        self.record(step);
        Ok(id)
    }

    /// The clauses that unfolding atom `pos` of `clause` would produce, and
    /// the clauses used.
    pub fn unfold_results(&self, clause: ClauseId, pos: usize) -> Result<(Vec<Clause>, Vec<Clause>), KernelError> {
        let c = self.clause(clause)?;
        let atom = c.body.get(pos).ok_or(KernelError::BadPosition { clause, pos })?;
        let used: Vec<Clause> = self.current.clauses_of(&atom.pred).cloned().collect();
        let c_names: BTreeSet<String> = c.vars().iter().map(|v| v.name().to_string()).collect();
        let mut out = Vec::new();
        for m in &used {
            let head = m.head.atom().expect("clauses_of yields definite clauses");
            let mut theta: BTreeMap<Var, Var> = BTreeMap::new();
            for (h, x) in head.args.iter().zip(&atom.args) {
                theta.insert(h.clone(), x.clone());
            }
            let mut taken = c_names.clone();
            taken.extend(m.vars().iter().map(|v| v.name().to_string()));
            for v in m.vars() {
                if theta.contains_key(&v) {
                    continue;
                }
                let name = if c_names.contains(v.name()) {
                    let n = fresh_name(v.name(), &|s| taken.contains(s));
                    taken.insert(n.clone());
                    n
                } else {
                    v.name().to_string()
                };
                theta.insert(v.clone(), v.renamed(&name));
            }
            let cj = apply_subst(&m.constraint, &theta)?;
            let mut body = c.body[..pos].to_vec();
            body.extend(apply_subst(&m.body, &theta)?);
            body.extend_from_slice(&c.body[pos + 1..]);
            out.push(Clause::new(c.id, c.head.clone(), c.constraint.and(&cj), body));
        }
        Ok((out, used))
    }

    /// Unfolds body atom `pos` of `clause`; returns the ids of the results
    /// in the order of the clauses used.
    pub fn apply_unfold(&mut self, clause: ClauseId, pos: usize) -> Result<Vec<ClauseId>, KernelError> {
        let (results, used) = self.unfold_results(clause, pos)?;
        let c = self.clause(clause)?.clone();
        let mut current = self.current.clone();
        let ids = current.replace(clause, results)?;
        let mut step = TraceStep::new(Rule::Unfolding);
        step.inputs = vec![clause];
        step.positions = vec![pos];
        step.outputs = ids.clone();
        step.added = ids.iter().map(|id| current.get(*id).expect("just added").clone()).collect();
        step.self_unfolding = c.head.pred() == Some(&c.body[pos].pred);
        step.removed = vec![c];
        step.used = used;
        self.current = current;
        self.record(step);
        Ok(ids)
    }

    /// Checks every folding condition without changing the state.
    pub fn check_fold(&self, clause: ClauseId, positions: &[usize], def: ClauseId, theta: &Subst) -> Result<FoldPlan, KernelError> {
        let c = self.clause(clause)?;
        let d = self.defs.get(def).ok_or(KernelError::NotADefinition(def))?;
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != positions.len() || positions.is_empty() {
            return Err(KernelError::MatchFailure("positions must be distinct and non-empty".into()));
        }
        if let Some(&p) = positions.iter().find(|&&p| p >= c.body.len()) {
            return Err(KernelError::BadPosition { clause, pos: p });
        }
        let k = d.head.atom().expect("definitions have heads");
        // (i) the selected atoms are an instance of the definition body
        if d.body.len() != positions.len() {
            return Err(KernelError::MatchFailure(format!("definition body has {} atoms, {} selected", d.body.len(), positions.len())));
        }
        for v in d.body.iter().flat_map(|b| b.args.iter()) {
            if !theta.contains_key(v) {
                return Err(KernelError::MatchFailure(format!("substitution does not bind {v}")));
            }
        }
        let b_theta = apply_subst(&d.body, theta)?;
        for (bt, &p) in b_theta.iter().zip(positions) {
            if bt != &c.body[p] {
                return Err(KernelError::MatchFailure(format!("{} vs {}", show(bt), show(&c.body[p]))));
            }
        }
        // bind the remaining definition variables to fresh names
        let mut theta = theta.clone();
        let mut taken: BTreeSet<String> = c.vars().iter().map(|v| v.name().to_string()).collect();
        taken.extend(theta.values().map(|v| v.name().to_string()));
        for v in d.vars() {
            if !theta.contains_key(&v) {
                let n = if taken.contains(v.name()) { fresh_name(v.name(), &|s| taken.contains(s)) } else { v.name().to_string() };
                taken.insert(n.clone());
                theta.insert(v.clone(), v.renamed(&n));
            }
        }
        let d_theta = apply_subst(&d.constraint, &theta)?;
        // (ii) with e := c this is c |= d theta
        for a in d_theta.atoms() {
            let v = lia::entails(&c.constraint, &Constraint::new(vec![a.clone()]));
            if v != Verdict::Proved {
                return Err(KernelError::EntailmentFailure { atom: show_atom(a), verdict: v });
            }
        }
        let k_vars: BTreeSet<Var> = k.args.iter().cloned().collect();
        let existential: Vec<Var> = d
            .constraint
            .vars()
            .into_iter()
            .chain(d.body.iter().flat_map(|b| b.vars()))
            .filter(|v| !k_vars.contains(v))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let images: BTreeSet<Var> = existential.iter().map(|v| theta[v].clone()).collect();
        // e: c minus atoms on existential images that the rest restores
        let mut e: Vec<ConstraintAtom> = c.constraint.atoms().to_vec();
        let mut i = 0;
        while i < e.len() {
            let on_image = e[i].vars().iter().any(|v| images.contains(v));
            if on_image || self.config.simplify_fold {
                let rest: Constraint = e.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a.clone()).collect();
                if lia::entails(&rest.and(&d_theta), &Constraint::new(vec![e[i].clone()])) == Verdict::Proved {
                    e.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        let e = Constraint::new(e);
        // (iii.1) existential images are absent from H, e, G1, G2
        let mut outside: BTreeSet<Var> = BTreeSet::new();
        if let Head::Atom(h) = &c.head {
            outside.extend(h.args.iter().cloned());
        }
        outside.extend(e.vars());
        for (j, b) in c.body.iter().enumerate() {
            if !positions.contains(&j) {
                outside.extend(b.args.iter().cloned());
            }
        }
        for x in &existential {
            let img = &theta[x];
            if outside.contains(img) {
                return Err(KernelError::VarConditionViolation(format!("{x} maps to {img}, which occurs outside the folded atoms")));
            }
            // (iii.2) and no other variable shares that image
            if let Some(y) = d.vars().into_iter().find(|y| y != x && &theta[y] == img) {
                return Err(KernelError::VarConditionViolation(format!("{x} and {y} both map to {img}")));
            }
        }
        let k_theta = apply_subst(k, &theta)?;
        let min = *sorted.first().expect("non-empty");
        let mut body = Vec::new();
        for (j, b) in c.body.iter().enumerate() {
            if j == min {
                body.push(k_theta.clone());
            }
            if !positions.contains(&j) {
                body.push(b.clone());
            }
        }
        Ok(FoldPlan { clause: Clause::new(c.id, c.head.clone(), e, body), theta })
    }

    /// Folds the atoms at `positions` of `clause` with definition `def`.
    pub fn apply_fold(&mut self, clause: ClauseId, positions: &[usize], def: ClauseId, theta: &Subst) -> Result<ClauseId, KernelError> {
        let plan = self.check_fold(clause, positions, def, theta)?;
        let old = self.clause(clause)?.clone();
        let mut current = self.current.clone();
        let ids = current.replace(clause, vec![plan.clause])?;
        let mut step = TraceStep::new(Rule::Folding);
        step.inputs = vec![clause, def];
        step.positions = positions.to_vec();
        step.def = Some(def);
        step.subst = plan.theta;
        step.outputs = ids.clone();
        step.added = vec![current.get(ids[0]).expect("just added").clone()];
        step.removed = vec![old];
        step.reversible_folding = self.current.contains(def) && def != clause;
        self.current = current;
        self.record(step);
        Ok(ids[0])
    }

    /// Replaces the constraints of a group of clauses sharing head and body.
    /// An empty `new_constraints` deletes the group.
    pub fn apply_replace(&mut self, group: &[ClauseId], new_constraints: Vec<Constraint>) -> Result<Vec<ClauseId>, KernelError> {
        let Some(&first_id) = group.first() else {
            return Err(KernelError::ShapeMismatch("empty group".into()));
        };
        let first = self.clause(first_id)?.clone();
        let mut olds = vec![first.clone()];
        let mut lhs = vec![first.constraint.clone()];
        for &id in &group[1..] {
            let c = self.clause(id)?;
            let rho = shape_renaming(c, &first).ok_or_else(|| KernelError::ShapeMismatch(format!("{} vs {}", first.id, id)))?;
            lhs.push(c.constraint.rename(&|v| rho.get(v).cloned().unwrap_or_else(|| v.clone())));
            olds.push(c.clone());
        }
        let hg: BTreeSet<Var> = {
            let mut s: BTreeSet<Var> = first.head.atom().map(|h| h.args.iter().cloned().collect()).unwrap_or_default();
            s.extend(first.body.iter().flat_map(|b| b.args.iter().cloned()));
            s
        };
        let ex = |cs: &[Constraint]| -> Vec<Var> {
            cs.iter().flat_map(|c| c.vars()).filter(|v| !hg.contains(v)).collect::<BTreeSet<_>>().into_iter().collect()
        };
        let l = QuantDisj::new(ex(&lhs), lhs.clone());
        let r = QuantDisj::new(ex(&new_constraints), new_constraints.clone());
        let v = lia::equiv_quant_disj(&l, &r);
        if v != Verdict::Proved {
            return Err(KernelError::EquivalenceNotProved(v));
        }
        let mut current = self.current.clone();
        let news: Vec<Clause> = new_constraints
            .into_iter()
            .map(|d| Clause::new(first.id, first.head.clone(), d, first.body.clone()))
            .collect();
        let ids = current.replace(first_id, news)?;
        for &id in &group[1..] {
            current.remove(id);
        }
        let mut step = TraceStep::new(Rule::ConstraintReplacement);
        step.inputs = group.to_vec();
        step.outputs = ids.clone();
        step.added = ids.iter().map(|id| current.get(*id).expect("just added").clone()).collect();
        step.removed = olds;
        self.current = current;
        self.record(step);
        Ok(ids)
    }

    /// Deletes a clause whose constraint is unsatisfiable.
    pub fn delete_unsat(&mut self, clause: ClauseId) -> Result<(), KernelError> {
        self.apply_replace(&[clause], Vec::new()).map(|_| ())
    }
}

fn show(a: &Atom) -> String {
    let mut s = String::new();
    crate::chc::write_atom_to(&mut s, a);
    s
}

/// A renaming of `c`'s head and body variables onto those of `target`,
/// extended to its other variables by freshening against `target`.
fn shape_renaming(c: &Clause, target: &Clause) -> Option<BTreeMap<Var, Var>> {
    let mut rho: BTreeMap<Var, Var> = BTreeMap::new();
    let mut bind = |a: &Atom, b: &Atom| -> bool {
        if a.pred != b.pred || a.args.len() != b.args.len() {
            return false;
        }
        for (x, y) in a.args.iter().zip(&b.args) {
            match rho.get(x) {
                Some(z) if z != y => return false,
                Some(_) => {}
                None => {
                    if rho.values().any(|z| z == y) {
                        return false;
                    }
                    rho.insert(x.clone(), y.clone());
                }
            }
        }
        true
    };
    match (&c.head, &target.head) {
        (Head::False, Head::False) => {}
        (Head::Atom(a), Head::Atom(b)) => {
            if !bind(a, b) {
                return None;
            }
        }
        _ => return None,
    }
    if c.body.len() != target.body.len() {
        return None;
    }
    for (a, b) in c.body.iter().zip(&target.body) {
        if !bind(a, b) {
            return None;
        }
    }
    let mut taken: BTreeSet<String> = target.vars().iter().map(|v| v.name().to_string()).collect();
    taken.extend(rho.values().map(|v| v.name().to_string()));
    for v in c.vars() {
        if !rho.contains_key(&v) {
            let n = if taken.contains(v.name()) { fresh_name(v.name(), &|s| taken.contains(s)) } else { v.name().to_string() };
            taken.insert(n.clone());
            rho.insert(v.clone(), v.renamed(&n));
        }
    }
    Some(rho)
}

