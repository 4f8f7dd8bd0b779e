//! The predicate pairing strategy: unfold a clause whose body mixes atoms
//! of two predicate-disjoint programs, then repeatedly pair one atom of
//! each side into a new predicate (reusing an earlier definition when one
//! folds) until no body mixes the two sides.

use crate::chc::{
    predicate_partition, reachable_preds, Atom, Clause, ClauseId, Constraint, ConstraintAtom, Head, Pred, Program,
    Subst, Var,
};
use crate::exec::Exec;
use crate::kernel::{classify_sequence, AClass, Classification, KernelConfig, KernelError, TransformationState};
use crate::lia::{self, Verdict};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    /// First pair in body order (Q-atom first, then R-atom).
    #[default]
    Leftmost,
    /// Smallest pair by printed atoms.
    Lexicographic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairingConfig {
    pub max_defs: usize,
    pub tie_break: TieBreak,
    pub iterate: bool,
    pub a_classifier: AClass,
    pub exec: Exec,
}

impl Default for PairingConfig {
    fn default() -> Self {
        PairingConfig { max_defs: 64, tie_break: TieBreak::Leftmost, iterate: false, a_classifier: AClass::Lia, exec: Exec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PairingError {
    #[error("input clause has the wrong shape: {0}")]
    InputShape(String),
    #[error("more than {0} definitions needed")]
    CapExceeded(usize),
    #[error("clause {0} has no pair of atoms from two distinct programs")]
    NoMixedPair(ClauseId),
    #[error("atoms share predicate {0} in their dependency cones")]
    PartitionOverlap(Pred),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

impl From<crate::chc::ChcError> for PairingError {
    fn from(e: crate::chc::ChcError) -> Self {
        match e {
            crate::chc::ChcError::Overlap(p) => PairingError::PartitionOverlap(p),
            e => PairingError::Kernel(KernelError::Chc(e)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PairingResult {
    pub transf: Program,
    pub defs: Program,
    pub state: TransformationState,
    pub report: Classification,
    /// Goals skipped because their atoms' cones overlap.
    pub overlaps: Vec<(ClauseId, Pred)>,
}

/// A chosen pair of body positions and its entailed equalities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairChoice {
    pub pos_a: usize,
    pub pos_b: usize,
    pub eq: BTreeSet<(Var, Var)>,
}

fn show(a: &Atom) -> String {
    let mut s = String::new();
    crate::chc::write_atom_to(&mut s, a);
    s
}

/// The (Q-atom, R-atom) pair of `e` with the most entailed equalities.
pub fn select_pair(
    e: &Clause,
    q_preds: &BTreeSet<Pred>,
    r_preds: &BTreeSet<Pred>,
    tie: TieBreak,
    exec: Exec,
) -> Result<PairChoice, PairingError> {
    let qs: Vec<usize> = (0..e.body.len()).filter(|&i| q_preds.contains(&e.body[i].pred)).collect();
    let rs: Vec<usize> = (0..e.body.len()).filter(|&i| r_preds.contains(&e.body[i].pred)).collect();
    let pairs: Vec<(usize, usize)> = qs.iter().flat_map(|&i| rs.iter().map(move |&j| (i, j))).collect();
    if pairs.is_empty() {
        return Err(PairingError::NoMixedPair(e.id));
    }
    let eqs = exec.map(&pairs, |&(i, j)| lia::eq_set(&e.constraint, &e.body[i], &e.body[j]));
    let mut best = 0;
    for k in 1..pairs.len() {
        let (n, m) = (eqs[k].len(), eqs[best].len());
        let better = match tie {
            TieBreak::Leftmost => n > m,
            TieBreak::Lexicographic => {
                let key = |x: usize| (show(&e.body[pairs[x].0]), show(&e.body[pairs[x].1]));
                n > m || (n == m && key(k) < key(best))
            }
        };
        if better {
            best = k;
        }
    }
    let (pos_a, pos_b) = pairs[best];
    Ok(PairChoice { pos_a, pos_b, eq: eqs[best].clone() })
}

/// Binds the argument variables of `pattern` onto those of `target`.
fn match_atom(pattern: &Atom, target: &Atom, theta: &mut Subst) -> bool {
    if pattern.pred != target.pred || pattern.args.len() != target.args.len() {
        return false;
    }
    for (x, y) in pattern.args.iter().zip(&target.args) {
        match theta.get(x) {
            Some(z) if z != y => return false,
            Some(_) => {}
            None => {
                theta.insert(x.clone(), y.clone());
            }
        }
    }
    true
}

/// Most recently introduced definition that folds the atoms at `pos_a`
/// and `pos_b` of `clause`.
pub fn find_matching_def(state: &TransformationState, clause: ClauseId, pos_a: usize, pos_b: usize) -> Option<(ClauseId, Subst)> {
    let c = state.current().get(clause)?;
    let (a, b) = (c.body.get(pos_a)?, c.body.get(pos_b)?);
    for d in state.defs().clauses().iter().rev() {
        if d.body.len() != 2 {
            continue;
        }
        let mut theta = Subst::new();
        if !match_atom(&d.body[0], a, &mut theta) || !match_atom(&d.body[1], b, &mut theta) {
            continue;
        }
        if state.check_fold(clause, &[pos_a, pos_b], d.id, &theta).is_ok() {
            return Some((d.id, theta));
        }
    }
    None
}

struct Run<'a> {
    state: &'a mut TransformationState,
    q: BTreeSet<Pred>,
    r: BTreeSet<Pred>,
    cfg: PairingConfig,
    introduced: usize,
}

impl Run<'_> {
    fn first(&self, c: &Clause, side: &BTreeSet<Pred>) -> Option<usize> {
        c.body.iter().position(|b| side.contains(&b.pred))
    }

    fn mixed(&self, c: &Clause) -> bool {
        self.first(c, &self.q).is_some() && self.first(c, &self.r).is_some()
    }

    /// Unfolds the first Q-atom and then, in every result, the first R-atom.
    /// Drops results with unsatisfiable constraints.
    fn unfold_pair(&mut self, id: ClauseId, at: Option<(usize, usize)>) -> Result<Vec<ClauseId>, PairingError> {
        let c = self.state.current().get(id).expect("queued clause is live").clone();
        let (pq, pr) = match at {
            Some(p) => p,
            None => match (self.first(&c, &self.q), self.first(&c, &self.r)) {
                (Some(pq), Some(pr)) => (pq, pr),
                _ => return Ok(vec![id]),
            },
        };
        let used: Vec<usize> = self.state.current().clauses_of(&c.body[pq].pred).map(|m| m.body.len()).collect();
        let after_q = self.state.apply_unfold(id, pq)?;
        let mut out = Vec::new();
        for (cid, width) in after_q.into_iter().zip(used) {
            let pos = if pr > pq { pr + width - 1 } else { pr };
            out.extend(self.state.apply_unfold(cid, pos)?);
        }
        let mut live = Vec::new();
        for cid in out {
            let c = self.state.current().get(cid).expect("fresh clause");
            if lia::is_satisfiable(&c.constraint) == Verdict::Disproved {
                self.state.delete_unsat(cid)?;
            } else {
                live.push(cid);
            }
        }
        Ok(live)
    }

    fn define(&mut self, e: &Clause, choice: &PairChoice) -> Result<(ClauseId, Subst), PairingError> {
        if self.introduced >= self.cfg.max_defs {
            return Err(PairingError::CapExceeded(self.cfg.max_defs));
        }
        let (a, b) = (&e.body[choice.pos_a], &e.body[choice.pos_b]);
        let mut args: Vec<Var> = a.vars();
        for v in b.vars() {
            if !args.contains(&v) {
                args.push(v);
            }
        }
        let eqs: Constraint = choice.eq.iter().filter(|(x, y)| x != y).map(|(x, y)| ConstraintAtom::var_eq(x, y)).collect();
        let pred = self.state.fresh_pred("new");
        let d = Clause::new(ClauseId(0), Head::Atom(Atom { pred, args }), eqs, vec![a.clone(), b.clone()]);
        let (d, theta) = self.canonical(d);
        let id = self.state.apply_definition(d)?;
        self.introduced += 1;
        Ok((id, theta))
    }

    /// Renames a definition over the head variables of the first clauses
    /// defining its two body predicates, when those are pairwise distinct.
    /// Returns the folding substitution back onto the original names.
    fn canonical(&self, d: Clause) -> (Clause, Subst) {
        let ident: Subst = d.vars().into_iter().map(|v| (v.clone(), v)).collect();
        let mut names: Vec<Var> = Vec::new();
        for atom in &d.body {
            let head = self.state.current().clauses_of(&atom.pred).next().and_then(|c| c.head.atom().cloned());
            match head {
                Some(h) => names.extend(h.args),
                None => return (d, ident),
            }
        }
        let args: Vec<Var> = d.body.iter().flat_map(|a| a.args.iter().cloned()).collect();
        let distinct = |xs: &[Var]| xs.iter().collect::<BTreeSet<_>>().len() == xs.len();
        if !distinct(&args) || !distinct(&names) || args.iter().zip(&names).any(|(x, y)| x.sort() != y.sort()) {
            return (d, ident);
        }
        let to: BTreeMap<Var, Var> = args.iter().cloned().zip(names.iter().cloned()).collect();
        let renamed = d.rename(&|v| to.get(v).cloned().unwrap_or_else(|| v.clone()));
        let back: Subst = to.into_iter().map(|(x, y)| (y, x)).collect();
        (renamed, back)
    }

    /// `at` fixes the atoms unfolded in `c_init`; otherwise the first
    /// atom of each side is taken.
    fn run(&mut self, c_init: ClauseId, at: Option<(usize, usize)>) -> Result<(), PairingError> {
        let mut incls = VecDeque::from([(c_init, at)]);
        while let Some((c, at)) = incls.pop_front() {
            for mut e in self.unfold_pair(c, at)? {
                loop {
                    let clause = self.state.current().get(e).expect("live clause").clone();
                    if !self.mixed(&clause) {
                        break;
                    }
                    let choice = select_pair(&clause, &self.q, &self.r, self.cfg.tie_break, self.cfg.exec)?;
                    self.state.note(format!(
                        "PAIR clause={} chosen=({},{}) eq={}",
                        e,
                        show(&clause.body[choice.pos_a]),
                        show(&clause.body[choice.pos_b]),
                        choice.eq.len()
                    ));
                    let positions = [choice.pos_a, choice.pos_b];
                    e = match find_matching_def(self.state, e, choice.pos_a, choice.pos_b) {
                        Some((def, theta)) => self.state.apply_fold(e, &positions, def, &theta)?,
                        None => {
                            let (def, theta) = self.define(&clause, &choice)?;
                            let folded = self.state.apply_fold(e, &positions, def, &theta)?;
                            incls.push_back((def, None));
                            folded
                        }
                    };
                }
            }
        }
        Ok(())
    }
}

fn check_program(p: &Program, preds: &BTreeSet<Pred>) -> Result<(), PairingError> {
    for c in p.clauses() {
        if !c.head.pred().is_some_and(|h| preds.contains(h)) {
            return Err(PairingError::InputShape(format!("clause {} does not define a predicate of its side", c.id)));
        }
    }
    Ok(())
}

/// Runs the strategy on `c_init` (a goal with at least one atom of each
/// side) against the predicate-disjoint programs `q_prog` and `r_prog`.
pub fn predicate_pairing(c_init: &Clause, q_prog: &Program, r_prog: &Program, cfg: &PairingConfig) -> Result<PairingResult, PairingError> {
    let q: BTreeSet<Pred> = q_prog.predicates().into_iter().chain(q_prog.signatures().keys().cloned()).collect();
    let r: BTreeSet<Pred> = r_prog.predicates().into_iter().chain(r_prog.signatures().keys().cloned()).collect();
    if let Some(p) = q.intersection(&r).next() {
        return Err(PairingError::PartitionOverlap(p.clone()));
    }
    check_program(q_prog, &q)?;
    check_program(r_prog, &r)?;
    if !c_init.is_goal() {
        return Err(PairingError::InputShape("the initial clause must be a goal".into()));
    }
    let has = |side: &BTreeSet<Pred>| c_init.body.iter().any(|b| side.contains(&b.pred));
    if !has(&q) || !has(&r) {
        return Err(PairingError::InputShape("the initial clause needs an atom from each program".into()));
    }
    let mut p0 = Program::new();
    for c in q_prog.clauses().iter().chain(r_prog.clauses()) {
        p0.insert(c.clone())?;
    }
    for (pred, sorts) in q_prog.signatures().iter().chain(r_prog.signatures()) {
        p0.declare(pred, sorts.clone())?;
    }
    let init_id = if p0.contains(c_init.id) { p0.add(c_init.clone())? } else {
        p0.insert(c_init.clone())?;
        c_init.id
    };
    let mut state = TransformationState::new(p0, KernelConfig { a_class: cfg.a_classifier, ..KernelConfig::default() });
    Run { state: &mut state, q, r, cfg: *cfg, introduced: 0 }.run(init_id, None)?;
    Ok(finish(state, Vec::new()))
}

fn finish(state: TransformationState, overlaps: Vec<(ClauseId, Pred)>) -> PairingResult {
    PairingResult {
        transf: state.current().clone(),
        defs: state.defs().clone(),
        report: classify_sequence(state.trace()),
        state,
        overlaps,
    }
}

/// Predicates reachable from `pred`, including signature-only ones.
fn cone(p: &Program, pred: &Pred) -> BTreeSet<Pred> {
    reachable_preds(p, pred)
}

/// Eq-maximal pair of atoms of `goal` with disjoint cones, or the shared
/// predicate of the first overlapping pair when none is disjoint.
fn pick_disjoint_pair(p: &Program, goal: &Clause, exec: Exec) -> Result<Option<(usize, usize)>, Pred> {
    let mut cands = Vec::new();
    let mut overlap = None;
    for i in 0..goal.body.len() {
        for j in i + 1..goal.body.len() {
            let (ci, cj) = (cone(p, &goal.body[i].pred), cone(p, &goal.body[j].pred));
            match ci.intersection(&cj).next() {
                None => cands.push((i, j)),
                Some(s) => {
                    overlap.get_or_insert_with(|| s.clone());
                }
            }
        }
    }
    if cands.is_empty() {
        return match overlap {
            Some(s) => Err(s),
            None => Ok(None),
        };
    }
    let sizes = exec.map(&cands, |&(i, j)| lia::eq_set(&goal.constraint, &goal.body[i], &goal.body[j]).len());
    let mut best = 0;
    for k in 1..cands.len() {
        if sizes[k] > sizes[best] {
            best = k;
        }
    }
    Ok(Some(cands[best]))
}

/// Repeats the strategy on goal clauses whose bodies hold atoms with
/// disjoint predicate cones, pairing the Eq-maximal such atoms each round.
/// Goals listed in `goals` whose atoms all overlap are reported in
/// `overlaps`; if nothing could be paired at all that is an error.
pub fn iterate_pairing(p: &Program, goals: &[ClauseId], cfg: &PairingConfig) -> Result<PairingResult, PairingError> {
    let mut state = TransformationState::new(p.clone(), KernelConfig { a_class: cfg.a_classifier, ..KernelConfig::default() });
    let mut overlaps = Vec::new();
    let mut introduced = 0;
    let mut rounds = 0;
    let mut first_round = true;
    loop {
        let current = state.current().clone();
        let mut target = None;
        for g in current.goals() {
            if g.body.len() < 2 {
                continue;
            }
            match pick_disjoint_pair(&current, g, cfg.exec) {
                Ok(Some(pair)) => {
                    target = Some((g.clone(), pair));
                    break;
                }
                Ok(None) => {}
                Err(shared) => {
                    if first_round && goals.contains(&g.id) {
                        overlaps.push((g.id, shared));
                    }
                }
            }
        }
        first_round = false;
        let Some((goal, (i, j))) = target else { break };
        rounds += 1;
        if rounds > cfg.max_defs.max(1) * 4 {
            return Err(PairingError::CapExceeded(cfg.max_defs));
        }
        let q = cone(&current, &goal.body[i].pred);
        let r = cone(&current, &goal.body[j].pred);
        state.begin_round();
        state.note(format!("ROUND {rounds} clause={} q={} r={}", goal.id, goal.body[i].pred, goal.body[j].pred));
        let mut run = Run { state: &mut state, q, r, cfg: *cfg, introduced };
        run.run(goal.id, Some((i, j)))?;
        introduced = run.introduced;
        if !cfg.iterate {
            break;
        }
    }
    if rounds == 0 {
        if let Some((_, shared)) = overlaps.first() {
            return Err(PairingError::PartitionOverlap(shared.clone()));
        }
    }
    Ok(finish(state, overlaps))
}

/// Copies, under fresh names `p_k`, the cone of every goal atom that
/// overlaps the cone of an earlier atom, and points the atom at the copy.
/// Returns the new program and the id of the rewritten goal.
pub fn duplicate_for_self_pairing(p: &Program, goal: ClauseId) -> Result<(Program, ClauseId), PairingError> {
    let g = p.get(goal).ok_or(PairingError::InputShape(format!("no clause {goal}")))?.clone();
    let mut out = p.clone();
    let mut new_goal = g.clone();
    let mut used: BTreeSet<Pred> = p.predicates();
    used.extend(p.signatures().keys().cloned());
    let mut earlier: BTreeSet<Pred> = BTreeSet::new();
    for (k, atom) in g.body.iter().enumerate() {
        let cone_k = cone(&out, &atom.pred);
        if cone_k.is_disjoint(&earlier) {
            earlier.extend(cone_k);
            continue;
        }
        let mut map: BTreeMap<Pred, Pred> = BTreeMap::new();
        for pr in &cone_k {
            let name = (k + 1..)
                .map(|n| format!("{}_{n}", pr.name()))
                .find(|n| !used.contains(&Pred::new(n)))
                .expect("unbounded");
            let np = Pred::new(&name);
            used.insert(np.clone());
            map.insert(pr.clone(), np);
        }
        let ren = |a: &Atom| Atom { pred: map.get(&a.pred).cloned().unwrap_or_else(|| a.pred.clone()), args: a.args.clone() };
        let copies: Vec<Clause> = p
            .clauses()
            .iter()
            .filter(|c| c.head.pred().is_some_and(|h| cone_k.contains(h)))
            .map(|c| {
                let head = match &c.head {
                    Head::Atom(h) => Head::Atom(ren(h)),
                    Head::False => Head::False,
                };
                Clause::new(c.id, head, c.constraint.clone(), c.body.iter().map(&ren).collect())
            })
            .collect();
        for (pr, np) in &map {
            if let Some(s) = p.signature(pr) {
                out.declare(np, s.to_vec())?;
            }
        }
        for c in copies {
            out.add(c)?;
        }
        new_goal.body[k] = ren(atom);
        earlier.extend(map.values().cloned());
    }
    let id = out.replace(goal, vec![new_goal])?[0];
    Ok((out, id))
}

/// Splits `p` around the two atoms of its unique goal and runs the
/// strategy, as the command-line `transform` does for a single query.
pub fn pair_goal(p: &Program, goal: ClauseId, cfg: &PairingConfig) -> Result<PairingResult, PairingError> {
    let g = p.get(goal).ok_or(PairingError::InputShape(format!("no clause {goal}")))?;
    if g.body.len() < 2 {
        return Err(PairingError::InputShape(format!("goal {goal} has fewer than two atoms")));
    }
    if cfg.iterate || g.body.len() > 2 {
        return iterate_pairing(p, &[goal], cfg);
    }
    let (q, r) = predicate_partition(p, &g.body[0].pred, &g.body[1].pred)?;
    let mut res = predicate_pairing(g, &q, &r, cfg)?;
    // clauses outside both cones ride along untouched
    let inside: BTreeSet<ClauseId> = q.ids().into_iter().chain(r.ids()).chain([goal]).collect();
    for c in p.clauses() {
        if !inside.contains(&c.id) {
            res.transf.add(c.clone())?;
        }
    }
    Ok(res)
}
