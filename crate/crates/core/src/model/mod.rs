//! Symbolic interpretations: checking them against programs, checking
//! tightness on definitions, and carrying them across rule applications.

use crate::chc::{fresh_name, Atom, Clause, ClauseId, Constraint, ConstraintAtom, Head, Pred, Program, Var};
use crate::exec::Exec;
use crate::lia::{self, QuantDisj, Verdict, DNF_CAP};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("{pred}: expected {expected} arguments, found {found}")]
    Arity { pred: Pred, expected: usize, found: usize },
    #[error("{pred}: variable {var} is not a parameter")]
    StrayVariable { pred: Pred, var: Var },
    #[error("{pred}: parameters must be distinct variables")]
    RepeatedParameter { pred: Pred },
    #[error("{0} is already interpreted")]
    AlreadyDefined(Pred),
    #[error("unfolding {0} inside a clause for {0} cannot be inverted")]
    SelfUnfolding(Pred),
    #[error("clause has no body atom at position {0}")]
    BadPosition(usize),
    #[error("{0} is a goal, not a definition")]
    NotADefinition(ClauseId),
    #[error("more than {DNF_CAP} disjuncts")]
    TooManyDisjuncts,
}

/// Maps each predicate to a formula over its own parameter list. Missing
/// predicates read as true.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolicInterpretation {
    entries: BTreeMap<Pred, (Vec<Var>, QuantDisj)>,
}

impl SymbolicInterpretation {
    pub fn new() -> SymbolicInterpretation {
        SymbolicInterpretation::default()
    }

    /// Sets (or overwrites) the formula of `pred`.
    pub fn insert(&mut self, pred: Pred, params: Vec<Var>, formula: QuantDisj) -> Result<(), ModelError> {
        if params.iter().collect::<BTreeSet<_>>().len() != params.len() {
            return Err(ModelError::RepeatedParameter { pred });
        }
        if let Some(v) = formula.free_vars().into_iter().find(|v| !params.contains(v)) {
            return Err(ModelError::StrayVariable { pred, var: v });
        }
        self.entries.insert(pred, (params, formula));
        Ok(())
    }

    pub fn get(&self, pred: &Pred) -> Option<(&[Var], &QuantDisj)> {
        self.entries.get(pred).map(|(p, f)| (p.as_slice(), f))
    }

    pub fn contains(&self, pred: &Pred) -> bool {
        self.entries.contains_key(pred)
    }

    pub fn preds(&self) -> impl Iterator<Item = &Pred> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The formula of `atom`'s predicate over `atom`'s arguments, with
    /// existentials kept clear of `avoid`. `None` when uninterpreted.
    pub fn instantiate(&self, atom: &Atom, avoid: &BTreeSet<String>) -> Result<Option<QuantDisj>, ModelError> {
        let Some((params, f)) = self.entries.get(&atom.pred) else {
            return Ok(None);
        };
        if params.len() != atom.args.len() {
            return Err(ModelError::Arity { pred: atom.pred.clone(), expected: params.len(), found: atom.args.len() });
        }
        let map: BTreeMap<&Var, &Var> = params.iter().zip(&atom.args).collect();
        Ok(Some(f.rename(&|v| map.get(v).map(|x| (*x).clone()).unwrap_or_else(|| v.clone()), avoid)))
    }
}

impl fmt::Display for SymbolicInterpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, (params, q)) in &self.entries {
            let ps: Vec<String> = params.iter().map(|v| v.to_string()).collect();
            writeln!(f, "{p}({}) := {q}", ps.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelReport {
    pub clauses: Vec<(ClauseId, Verdict)>,
    pub overall: Verdict,
    /// Predicates read as true because the interpretation skips them.
    pub undefined: BTreeSet<Pred>,
}

impl ModelReport {
    pub fn failing(&self) -> impl Iterator<Item = &(ClauseId, Verdict)> {
        self.clauses.iter().filter(|(_, v)| !v.is_proved())
    }
}

fn names_of(vars: impl IntoIterator<Item = Var>) -> BTreeSet<String> {
    vars.into_iter().map(|v| v.name().to_string()).collect()
}

/// Existentials and disjuncts of an expanded body.
type Dnf = (Vec<Var>, Vec<Constraint>);

/// `c /\ Σ(B1) /\ ... /\ Σ(Bn)` as existentials plus a disjunct list, or
/// `None` when the product would exceed the disjunct cap.
fn body_dnf(
    sigma: &SymbolicInterpretation,
    c: &Constraint,
    body: &[Atom],
    avoid: &mut BTreeSet<String>,
    undefined: &mut BTreeSet<Pred>,
) -> Result<Option<Dnf>, ModelError> {
    let mut exists = Vec::new();
    let mut acc = vec![c.clone()];
    for b in body {
        let Some(f) = sigma.instantiate(b, avoid)? else {
            undefined.insert(b.pred.clone());
            continue;
        };
        avoid.extend(names_of(f.exists.iter().cloned()));
        exists.extend(f.exists.iter().cloned());
        if acc.len() * f.disjuncts.len() > DNF_CAP {
            return Ok(None);
        }
        acc = acc.iter().flat_map(|a| f.disjuncts.iter().map(move |d| a.and(d))).collect();
        acc.retain(|d| lia::is_satisfiable(d) != Verdict::Disproved);
    }
    Ok(Some((exists, acc)))
}

fn head_formula(
    sigma: &SymbolicInterpretation,
    head: &Head,
    avoid: &BTreeSet<String>,
    undefined: &mut BTreeSet<Pred>,
) -> Result<QuantDisj, ModelError> {
    match head {
        Head::False => Ok(QuantDisj::falsum()),
        Head::Atom(h) => match sigma.instantiate(h, avoid)? {
            Some(f) => Ok(f),
            None => {
                undefined.insert(h.pred.clone());
                Ok(QuantDisj::truth())
            }
        },
    }
}

fn check_clause(sigma: &SymbolicInterpretation, c: &Clause, undefined: &mut BTreeSet<Pred>) -> Result<Verdict, ModelError> {
    let mut avoid = names_of(c.vars());
    let Some((_, disjuncts)) = body_dnf(sigma, &c.constraint, &c.body, &mut avoid, undefined)? else {
        return Ok(Verdict::Unknown);
    };
    let rhs = head_formula(sigma, &c.head, &avoid, undefined)?;
    let mut v = Verdict::Proved;
    for d in &disjuncts {
        v = v.and(lia::implies(d, &rhs));
        if v == Verdict::Disproved {
            break;
        }
    }
    Ok(v)
}

/// Validity of every clause of `p` under `sigma`.
pub fn check_model(p: &Program, sigma: &SymbolicInterpretation) -> Result<ModelReport, ModelError> {
    check_model_with(Exec::default(), p, sigma)
}

pub fn check_model_with(exec: Exec, p: &Program, sigma: &SymbolicInterpretation) -> Result<ModelReport, ModelError> {
    let results = exec.map(p.clauses(), |c| {
        let mut undefined = BTreeSet::new();
        check_clause(sigma, c, &mut undefined).map(|v| (c.id, v, undefined))
    });
    let mut report = ModelReport { clauses: Vec::new(), overall: Verdict::Proved, undefined: BTreeSet::new() };
    for r in results {
        let (id, v, undefined) = r?;
        report.overall = report.overall.and(v);
        report.clauses.push((id, v));
        report.undefined.extend(undefined);
    }
    Ok(report)
}

/// For every `A <- c, G` in `defs`: `Σ(A) <-> exists X (c /\ Σ(G))`, with X
/// the variables not occurring in A.
pub fn check_tight(defs: &Program, sigma: &SymbolicInterpretation) -> Result<Verdict, ModelError> {
    let mut overall = Verdict::Proved;
    for d in defs.clauses() {
        let mut undefined = BTreeSet::new();
        let mut avoid = names_of(d.vars());
        let Some((mut exists, disjuncts)) = body_dnf(sigma, &d.constraint, &d.body, &mut avoid, &mut undefined)? else {
            overall = overall.and(Verdict::Unknown);
            continue;
        };
        let head_vars: BTreeSet<Var> = d.head.atom().map(|h| h.args.iter().cloned().collect()).unwrap_or_default();
        exists.extend(d.vars().into_iter().filter(|v| !head_vars.contains(v)));
        let body = QuantDisj::new(exists, disjuncts);
        let head = head_formula(sigma, &d.head, &avoid, &mut undefined)?;
        overall = overall.and(lia::equiv_quant_disj(&head, &body));
        if overall == Verdict::Disproved {
            break;
        }
    }
    Ok(overall)
}

/// Distinct parameters for `head`: repeated arguments are replaced by
/// fresh variables equated to the first occurrence.
fn head_params(head: &Atom, taken: &mut BTreeSet<String>) -> (Vec<Var>, Vec<ConstraintAtom>) {
    let mut params: Vec<Var> = Vec::new();
    let mut eqs = Vec::new();
    for a in &head.args {
        if params.contains(a) {
            let n = fresh_name(a.name(), &|s| taken.contains(s));
            taken.insert(n.clone());
            let p = a.renamed(&n);
            eqs.push(ConstraintAtom::var_eq(&p, a));
            params.push(p);
        } else {
            params.push(a.clone());
        }
    }
    (params, eqs)
}

/// Projects each disjunct onto `keep` when that is exact, keeping the
/// existential otherwise, and drops unsatisfiable disjuncts.
fn close_over(keep: &BTreeSet<Var>, disjuncts: Vec<Constraint>) -> QuantDisj {
    let mut out_exists: BTreeSet<Var> = BTreeSet::new();
    let mut out = Vec::new();
    for d in disjuncts {
        if lia::is_satisfiable(&d) == Verdict::Disproved {
            continue;
        }
        let (p, exact) = lia::project_exact(&d, keep);
        if exact {
            out.extend(p.disjuncts.into_iter().filter(|x| lia::is_satisfiable(x) != Verdict::Disproved));
        } else {
            out_exists.extend(d.vars().into_iter().filter(|v| !keep.contains(v)));
            out.push(d);
        }
    }
    QuantDisj::new(out_exists.into_iter().collect(), out)
}

/// Extends `sigma` at the head predicate of the definition `d` by
/// `exists Y (c /\ Σ(G))`, Y being every variable outside the head.
pub fn transport_definition(sigma: &SymbolicInterpretation, d: &Clause) -> Result<SymbolicInterpretation, ModelError> {
    let Head::Atom(head) = &d.head else {
        return Err(ModelError::NotADefinition(d.id));
    };
    if sigma.contains(&head.pred) {
        return Err(ModelError::AlreadyDefined(head.pred.clone()));
    }
    let mut avoid = names_of(d.vars());
    let mut undefined = BTreeSet::new();
    let (params, eqs) = head_params(head, &mut avoid);
    let constraint = eqs.into_iter().fold(d.constraint.clone(), |c, a| c.with(a));
    let (_, disjuncts) = body_dnf(sigma, &constraint, &d.body, &mut avoid, &mut undefined)?.ok_or(ModelError::TooManyDisjuncts)?;
    let formula = close_over(&params.iter().cloned().collect(), disjuncts);
    let mut out = sigma.clone();
    out.insert(head.pred.clone(), params, formula)?;
    Ok(out)
}

/// Inverts one unfolding of the atom at `pos` of `unfolded` using the
/// clauses `matching` of its predicate p: Σ(p) becomes the disjunction over
/// the matching clauses of `exists Y (c_j /\ Σ(B_j))`. With no matching
/// clause, Σ(p) is false.
pub fn transport_unfold_inverse(
    sigma_after: &SymbolicInterpretation,
    unfolded: &Clause,
    pos: usize,
    matching: &[Clause],
) -> Result<SymbolicInterpretation, ModelError> {
    let atom = unfolded.body.get(pos).ok_or(ModelError::BadPosition(pos))?;
    let p = atom.pred.clone();
    if unfolded.head.pred() == Some(&p) {
        return Err(ModelError::SelfUnfolding(p));
    }
    let params: Vec<Var> = match sigma_after.get(&p) {
        Some((ps, _)) => ps.to_vec(),
        None => (1..=atom.args.len()).map(|i| atom.args[i - 1].renamed(&format!("V{i}"))).collect(),
    };
    if params.len() != atom.args.len() {
        return Err(ModelError::Arity { pred: p, expected: params.len(), found: atom.args.len() });
    }
    let keep: BTreeSet<Var> = params.iter().cloned().collect();
    let mut disjuncts = Vec::new();
    for m in matching {
        let Some(h) = m.head.atom() else { continue };
        if h.pred != p || h.args.len() != params.len() {
            return Err(ModelError::Arity { pred: p, expected: params.len(), found: h.args.len() });
        }
        let m = crate::chc::rename_apart(m, &keep);
        let h = m.head.atom().expect("definite");
        let mut avoid = names_of(m.vars().into_iter().chain(params.iter().cloned()));
        let c = params.iter().zip(&h.args).fold(m.constraint.clone(), |c, (x, y)| c.with(ConstraintAtom::var_eq(x, y)));
        let mut undefined = BTreeSet::new();
        let (_, ds) = body_dnf(sigma_after, &c, &m.body, &mut avoid, &mut undefined)?.ok_or(ModelError::TooManyDisjuncts)?;
        disjuncts.extend(ds);
    }
    let formula = close_over(&keep, disjuncts);
    let mut out = sigma_after.clone();
    out.insert(p, params, formula)?;
    Ok(out)
}
