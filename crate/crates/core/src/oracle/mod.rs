//! Ground evaluation of programs inside a finite box: the atoms derivable
//! by trees of bounded height, and the search for a violated goal.

use crate::chc::{Clause, ClauseId, ConstraintAtom, LinExpr, Pred, Program, Var};
use crate::exec::Exec;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    /// Maximal height of a derivation tree.
    pub depth: usize,
    pub lo: i64,
    pub hi: i64,
}

impl OracleBudget {
    pub fn new(depth: usize, lo: i64, hi: i64) -> Result<OracleBudget, OracleError> {
        if depth == 0 || lo > hi {
            return Err(OracleError::BadBudget { depth, lo, hi });
        }
        Ok(OracleBudget { depth, lo, hi })
    }

    pub fn doubled(self) -> OracleBudget {
        OracleBudget { depth: self.depth * 2, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("array constraints cannot be grounded")]
    ArrayUnsupported,
    #[error("invalid budget: depth {depth}, box [{lo},{hi}]")]
    BadBudget { depth: usize, lo: i64, hi: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAtom {
    pub pred: Pred,
    pub args: Vec<i64>,
}

impl GroundAtom {
    pub fn new(pred: &str, args: &[i64]) -> GroundAtom {
        GroundAtom { pred: Pred::new(pred), args: args.to_vec() }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, "{}({})", self.pred, args.join(","))
    }
}

type Env = BTreeMap<Var, i64>;
type Facts = BTreeMap<Pred, BTreeSet<Vec<i64>>>;

fn value(e: &LinExpr, env: &Env) -> Option<i64> {
    e.eval(&|v| env.get(v).copied())
}

/// Extends `env` to every variable of `atoms` inside the box, calling `emit`
/// on each complete valuation satisfying all atoms. Equalities with a single
/// unknown are solved before anything is enumerated.
fn solve(atoms: &[ConstraintAtom], vars: &[Var], env: &mut Env, b: OracleBudget, emit: &mut dyn FnMut(&Env)) {
    let mut added: Vec<Var> = Vec::new();
    let ok = loop {
        let mut progress = false;
        let mut failed = false;
        for a in atoms {
            let ConstraintAtom::Lin { lhs, rel, rhs } = a else { continue };
            match (value(lhs, env), value(rhs, env)) {
                (Some(l), Some(r)) => {
                    if !rel.holds(l, r) {
                        failed = true;
                        break;
                    }
                }
                _ if *rel == crate::chc::Rel::Eq => {
                    let d = lhs.minus(rhs);
                    let open: Vec<(&Var, i64)> = d.coeffs().iter().filter(|(v, _)| !env.contains_key(*v)).map(|(v, k)| (v, *k)).collect();
                    if let [(x, k)] = open[..] {
                        let rest: i64 = d.coeffs().iter().filter(|(v, _)| env.contains_key(*v)).map(|(v, c)| c * env[v]).sum::<i64>()
                            + d.constant_value();
                        if rest % k != 0 {
                            failed = true;
                            break;
                        }
                        let val = -rest / k;
                        if val < b.lo || val > b.hi {
                            failed = true;
                            break;
                        }
                        env.insert(x.clone(), val);
                        added.push(x.clone());
                        progress = true;
                    }
                }
                _ => {}
            }
        }
        if failed {
            break false;
        }
        if !progress {
            break true;
        }
    };
    if ok {
        match vars.iter().find(|v| !env.contains_key(*v)) {
            None => emit(env),
            Some(x) => {
                for val in b.lo..=b.hi {
                    env.insert(x.clone(), val);
                    solve(atoms, vars, env, b, emit);
                    env.remove(x);
                }
            }
        }
    }
    for v in added {
        env.remove(&v);
    }
}

/// Binds the body atoms of `c` against fact sets (one per body position)
/// and solves the constraint for every consistent combination.
fn join(c: &Clause, sources: &[&Facts], b: OracleBudget, emit: &mut dyn FnMut(&Env)) {
    struct Join<'a> {
        c: &'a Clause,
        sources: &'a [&'a Facts],
        vars: Vec<Var>,
        empty: BTreeSet<Vec<i64>>,
        b: OracleBudget,
    }
    fn go(j: &Join<'_>, i: usize, env: &mut Env, emit: &mut dyn FnMut(&Env)) {
        if i == j.c.body.len() {
            solve(j.c.constraint.atoms(), &j.vars, env, j.b, emit);
            return;
        }
        let atom = &j.c.body[i];
        for tuple in j.sources[i].get(&atom.pred).unwrap_or(&j.empty) {
            let mut bound = Vec::new();
            let mut ok = true;
            for (v, &x) in atom.args.iter().zip(tuple) {
                match env.get(v) {
                    Some(&y) if y != x => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        env.insert(v.clone(), x);
                        bound.push(v.clone());
                    }
                }
            }
            if ok {
                go(j, i + 1, env, emit);
            }
            for v in bound {
                env.remove(&v);
            }
        }
    }
    let j = Join { c, sources, vars: c.vars(), empty: BTreeSet::new(), b };
    go(&j, 0, &mut Env::new(), emit);
}

fn head_tuple(c: &Clause, env: &Env) -> Option<(Pred, Vec<i64>)> {
    let h = c.head.atom()?;
    Some((h.pred.clone(), h.args.iter().map(|v| env[v]).collect()))
}

fn insert(facts: &mut Facts, pred: Pred, tuple: Vec<i64>) -> bool {
    facts.entry(pred).or_default().insert(tuple)
}

fn union(a: &Facts, b: &Facts) -> Facts {
    let mut out = a.clone();
    for (p, ts) in b {
        out.entry(p.clone()).or_default().extend(ts.iter().cloned());
    }
    out
}

fn evaluate(exec: Exec, p: &Program, b: OracleBudget) -> Result<Facts, OracleError> {
    if p.has_arrays() {
        return Err(OracleError::ArrayUnsupported);
    }
    let definite: Vec<&Clause> = p.clauses().iter().filter(|c| !c.is_goal()).collect();
    let mut all = Facts::new();
    let mut delta = Facts::new();
    for round in 1..=b.depth {
        // a tree of height `round` has a child of height `round - 1`
        let old: Facts = all.iter().map(|(p, ts)| (p.clone(), ts.iter().filter(|t| !delta.get(p).is_some_and(|d| d.contains(*t))).cloned().collect())).collect();
        let tasks: Vec<(&Clause, usize)> = definite
            .iter()
            .flat_map(|c| {
                if round == 1 {
                    if c.body.is_empty() { vec![(*c, 0)] } else { vec![] }
                } else {
                    (0..c.body.len()).map(|i| (*c, i)).collect()
                }
            })
            .collect();
        let found = exec.map(&tasks, |&(c, pivot)| {
            let mut out: Vec<(Pred, Vec<i64>)> = Vec::new();
            let sources: Vec<&Facts> = (0..c.body.len())
                .map(|j| match j.cmp(&pivot) {
                    std::cmp::Ordering::Less => &old,
                    std::cmp::Ordering::Equal => &delta,
                    std::cmp::Ordering::Greater => &all,
                })
                .collect();
            join(c, &sources, b, &mut |env| out.extend(head_tuple(c, env)));
            out
        });
        let mut next = Facts::new();
        for (pred, t) in found.into_iter().flatten() {
            if !all.get(&pred).is_some_and(|s| s.contains(&t)) {
                insert(&mut next, pred, t);
            }
        }
        if next.is_empty() {
            break;
        }
        all = union(&all, &next);
        delta = next;
    }
    Ok(all)
}

/// Ground atoms with arguments in the box derivable by trees of height at
/// most `b.depth` whose every variable takes a value in the box.
pub fn bounded_lm(p: &Program, b: OracleBudget) -> Result<BTreeSet<GroundAtom>, OracleError> {
    bounded_lm_with(Exec::default(), p, b)
}

pub fn bounded_lm_with(exec: Exec, p: &Program, b: OracleBudget) -> Result<BTreeSet<GroundAtom>, OracleError> {
    let facts = evaluate(exec, p, b)?;
    Ok(facts
        .into_iter()
        .flat_map(|(pred, ts)| ts.into_iter().map(move |args| GroundAtom { pred: pred.clone(), args }))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// A goal whose constraint and body hold at `valuation`.
    Found { goal: ClauseId, valuation: BTreeMap<Var, i64> },
    NotWithinBudget,
}

impl Derivation {
    pub fn is_found(&self) -> bool {
        matches!(self, Derivation::Found { .. })
    }
}

pub fn false_derivable(p: &Program, b: OracleBudget) -> Result<Derivation, OracleError> {
    false_derivable_with(Exec::default(), p, b)
}

pub fn false_derivable_with(exec: Exec, p: &Program, b: OracleBudget) -> Result<Derivation, OracleError> {
    let facts = evaluate(exec, p, b)?;
    for g in p.goals() {
        let sources = vec![&facts; g.body.len()];
        let mut hit: Option<Env> = None;
        join(g, &sources, b, &mut |env| {
            if hit.is_none() {
                hit = Some(env.clone());
            }
        });
        if let Some(valuation) = hit {
            return Ok(Derivation::Found { goal: g.id, valuation });
        }
    }
    Ok(Derivation::NotWithinBudget)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    /// Found for the first and second program at the given budget.
    pub base: (bool, bool),
    /// The same with the depth doubled.
    pub doubled: (bool, bool),
}

impl ProbeReport {
    pub fn agree(&self) -> bool {
        self.base.0 == self.base.1
    }

    /// A false derivation within the budget on either side is matched on
    /// the other side within twice the depth.
    pub fn consistent(&self) -> bool {
        (!self.base.0 || self.doubled.1) && (!self.base.1 || self.doubled.0)
    }
}

pub fn equisat_probe(p0: &Program, pn: &Program, b: OracleBudget) -> Result<ProbeReport, OracleError> {
    let run = |p: &Program, b| false_derivable(p, b).map(|d| d.is_found());
    Ok(ProbeReport { base: (run(p0, b)?, run(pn, b)?), doubled: (run(p0, b.doubled())?, run(pn, b.doubled())?) })
}
