//! Integer rows and Fourier-Motzkin elimination.
//!
//! A row is `sum(a_i * x_i) + k` compared with zero. Every elimination step
//! is recorded so that a candidate integer point can be rebuilt backwards.

use crate::chc::{LinExpr, Rel, Var};
use std::collections::{BTreeMap, BTreeSet};

/// Rows beyond this many abort elimination (the caller reports Unknown).
const MAX_ROWS: usize = 4000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Row {
    pub coeffs: BTreeMap<Var, i128>,
    pub k: i128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Kind {
    /// `row = 0`
    Eq,
    /// `row <= 0`
    Le,
    /// `row != 0`
    Ne,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn ceil_div(n: i128, d: i128) -> i128 {
    -((-n).div_euclid(d))
}

fn floor_div(n: i128, d: i128) -> i128 {
    n.div_euclid(d)
}

impl Row {
    pub fn from_expr(e: &LinExpr) -> Row {
        Row {
            coeffs: e.coeffs().iter().map(|(v, k)| (v.clone(), *k as i128)).collect(),
            k: e.constant_value() as i128,
        }
    }

    pub fn coeff(&self, v: &Var) -> i128 {
        self.coeffs.get(v).copied().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn negated(&self) -> Row {
        Row { coeffs: self.coeffs.iter().map(|(v, k)| (v.clone(), -k)).collect(), k: -self.k }
    }

    pub fn offset(&self, d: i128) -> Row {
        Row { coeffs: self.coeffs.clone(), k: self.k + d }
    }

    /// `a * self + b * other`, or None on overflow.
    pub fn combine(&self, a: i128, other: &Row, b: i128) -> Option<Row> {
        let mut coeffs = BTreeMap::new();
        for (v, x) in &self.coeffs {
            coeffs.insert(v.clone(), x.checked_mul(a)?);
        }
        for (v, y) in &other.coeffs {
            let e = coeffs.entry(v.clone()).or_insert(0);
            *e = e.checked_add(y.checked_mul(b)?)?;
        }
        coeffs.retain(|_, x| *x != 0);
        let k = self.k.checked_mul(a)?.checked_add(other.k.checked_mul(b)?)?;
        Some(Row { coeffs, k })
    }

    pub fn eval(&self, env: &BTreeMap<Var, i128>) -> Option<i128> {
        let mut acc = self.k;
        for (v, a) in &self.coeffs {
            acc = acc.checked_add(a.checked_mul(*env.get(v).unwrap_or(&0))?)?;
        }
        Some(acc)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.coeffs.keys()
    }

    /// Divides by the coefficient gcd. `None` means the row is unsatisfiable
    /// on its own.
    pub fn normalize(mut self, kind: Kind) -> Option<Row> {
        if self.coeffs.is_empty() {
            let ok = match kind {
                Kind::Eq => self.k == 0,
                Kind::Le => self.k <= 0,
                Kind::Ne => self.k != 0,
            };
            return ok.then_some(self);
        }
        let g = self.coeffs.values().fold(0, |g, a| gcd(g, *a));
        if g > 1 {
            match kind {
                Kind::Eq | Kind::Ne if self.k % g != 0 => {
                    // an equality without integer solutions, or a trivially
                    // true disequality
                    return match kind {
                        Kind::Eq => None,
                        _ => Some(Row { coeffs: BTreeMap::new(), k: 1 }),
                    };
                }
                Kind::Eq | Kind::Ne => self.k /= g,
                Kind::Le => self.k = ceil_div(self.k, g),
            }
            for a in self.coeffs.values_mut() {
                *a /= g;
            }
        }
        Some(self)
    }

    pub fn to_atom(&self, kind: Kind) -> crate::chc::ConstraintAtom {
        use crate::chc::ConstraintAtom;
        let mut pos = LinExpr::zero();
        let mut neg = LinExpr::zero();
        for (v, a) in &self.coeffs {
            let a = *a as i64;
            if a > 0 {
                pos.add_term(v, a);
            } else {
                neg.add_term(v, -a);
            }
        }
        let k = self.k as i64;
        let rel = match kind {
            Kind::Eq => Rel::Eq,
            Kind::Le => Rel::Le,
            Kind::Ne => Rel::Ne,
        };
        if pos.is_constant() && !neg.is_constant() {
            // -neg + k (rel) 0  ~>  neg (rel') k
            let rel = match rel {
                Rel::Le => Rel::Ge,
                r => r,
            };
            return ConstraintAtom::lin(neg, rel, LinExpr::constant(k));
        }
        ConstraintAtom::lin(pos, rel, neg.offset(-k))
    }
}

/// Turns `lhs rel rhs` into rows; strict relations are tightened.
pub(crate) fn rows_of(lhs: &LinExpr, rel: Rel, rhs: &LinExpr) -> Vec<(Kind, Row)> {
    let d = Row::from_expr(&lhs.minus(rhs));
    match rel {
        Rel::Eq => vec![(Kind::Eq, d)],
        Rel::Le => vec![(Kind::Le, d)],
        Rel::Lt => vec![(Kind::Le, d.offset(1))],
        Rel::Ge => vec![(Kind::Le, d.negated())],
        Rel::Gt => vec![(Kind::Le, d.negated().offset(1))],
        Rel::Ne => vec![(Kind::Ne, d)],
    }
}

#[derive(Clone, Debug)]
enum Step {
    /// `row = 0` solved for `var`.
    Eq { var: Var, row: Row },
    /// All bounds on `var` at elimination time.
    Bounds { var: Var, rows: Vec<Row> },
}

#[derive(Debug)]
pub(crate) enum Outcome {
    /// No rational solution after integer tightening.
    Unsat,
    /// Elimination finished; `witness` is an integer point of the
    /// equalities and inequalities when one was found.
    Open { witness: Option<BTreeMap<Var, i128>> },
    /// Row blow-up or arithmetic overflow.
    GaveUp,
}

/// A conjunction of rows under elimination.
#[derive(Clone, Debug, Default)]
pub(crate) struct System {
    pub eqs: Vec<Row>,
    pub les: Vec<Row>,
    pub nes: Vec<Row>,
}

impl System {
    pub fn push(&mut self, kind: Kind, row: Row) {
        match kind {
            Kind::Eq => self.eqs.push(row),
            Kind::Le => self.les.push(row),
            Kind::Ne => self.nes.push(row),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.eqs
            .iter()
            .chain(&self.les)
            .chain(&self.nes)
            .flat_map(|r| r.vars().cloned())
            .collect()
    }
}

/// Solves an equality row for `var` and substitutes it into `row`.
fn subst_eq(row: &Row, var: &Var, eq: &Row) -> Option<Row> {
    let b = row.coeff(var);
    if b == 0 {
        return Some(row.clone());
    }
    let a = eq.coeff(var);
    row.combine(a.abs(), eq, -a.signum() * b)
}

/// Normalizes and deduplicates rows, keeping the tightest constant per
/// coefficient vector. `None` on a contradictory row.
fn tidy_les(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut best: BTreeMap<BTreeMap<Var, i128>, i128> = BTreeMap::new();
    for r in rows {
        let r = r.normalize(Kind::Le)?;
        if r.is_constant() {
            continue;
        }
        let e = best.entry(r.coeffs).or_insert(r.k);
        *e = (*e).max(r.k);
    }
    Some(best.into_iter().map(|(coeffs, k)| Row { coeffs, k }).collect())
}

fn tidy_eqs(rows: Vec<Row>) -> Option<Vec<Row>> {
    let mut out: Vec<Row> = Vec::new();
    for r in rows {
        let r = r.normalize(Kind::Eq)?;
        if r.is_constant() {
            continue;
        }
        let canon = if r.coeffs.values().next().is_some_and(|a| *a < 0) { r.negated() } else { r };
        if !out.contains(&canon) {
            out.push(canon);
        }
    }
    Some(out)
}

/// Picks the equality variable to solve: unit coefficients first, then the
/// smallest magnitude; among those, variables accepted by `allowed`.
fn pick_eq(eqs: &[Row], allowed: &dyn Fn(&Var) -> bool) -> Option<(usize, Var)> {
    let mut best: Option<(i128, usize, Var)> = None;
    for (i, r) in eqs.iter().enumerate() {
        for (v, a) in &r.coeffs {
            if !allowed(v) {
                continue;
            }
            if best.as_ref().is_none_or(|(m, _, _)| a.abs() < *m) {
                best = Some((a.abs(), i, v.clone()));
            }
        }
    }
    best.map(|(_, i, v)| (i, v))
}

/// Cheapest variable for a Fourier-Motzkin step.
fn pick_fm(les: &[Row], allowed: &dyn Fn(&Var) -> bool) -> Option<Var> {
    let mut counts: BTreeMap<&Var, (usize, usize)> = BTreeMap::new();
    for r in les {
        for (v, a) in &r.coeffs {
            if allowed(v) {
                let e = counts.entry(v).or_default();
                if *a > 0 {
                    e.0 += 1
                } else {
                    e.1 += 1
                }
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(_, (p, n))| (p * n) as i64 - (*p + *n) as i64)
        .map(|(v, _)| v.clone())
}

/// Integer exactness of eliminating `var`: all its lower bounds or all its
/// upper bounds have unit coefficient.
fn fm_exact(les: &[Row], var: &Var) -> bool {
    let mut lower_unit = true;
    let mut upper_unit = true;
    for r in les {
        let a = r.coeff(var);
        if a > 1 {
            upper_unit = false;
        }
        if a < -1 {
            lower_unit = false;
        }
    }
    lower_unit || upper_unit
}

fn fm_step(les: Vec<Row>, var: &Var) -> Option<(Vec<Row>, Vec<Row>)> {
    let (with, mut rest): (Vec<Row>, Vec<Row>) = les.into_iter().partition(|r| r.coeff(var) != 0);
    let ups: Vec<&Row> = with.iter().filter(|r| r.coeff(var) > 0).collect();
    let lows: Vec<&Row> = with.iter().filter(|r| r.coeff(var) < 0).collect();
    for u in &ups {
        for l in &lows {
            let (a, b) = (u.coeff(var), -l.coeff(var));
            let g = gcd(a, b);
            rest.push(u.combine(b / g, l, a / g)?);
        }
    }
    Some((rest, with))
}

/// Eliminates every variable; ne-rows are ignored here.
pub(crate) fn decide(sys: &System) -> Outcome {
    let Some(mut eqs) = tidy_eqs(sys.eqs.clone()) else { return Outcome::Unsat };
    let Some(mut les) = tidy_les(sys.les.clone()) else { return Outcome::Unsat };
    let mut steps = Vec::new();
    while let Some((i, var)) = pick_eq(&eqs, &|_| true) {
        let eq = eqs.swap_remove(i);
        let mut next_eqs = Vec::new();
        for r in &eqs {
            match subst_eq(r, &var, &eq) {
                Some(r) => next_eqs.push(r),
                None => return Outcome::GaveUp,
            }
        }
        let mut next_les = Vec::new();
        for r in &les {
            match subst_eq(r, &var, &eq) {
                Some(r) => next_les.push(r),
                None => return Outcome::GaveUp,
            }
        }
        steps.push(Step::Eq { var, row: eq });
        let Some(e) = tidy_eqs(next_eqs) else { return Outcome::Unsat };
        let Some(l) = tidy_les(next_les) else { return Outcome::Unsat };
        eqs = e;
        les = l;
    }
    while let Some(var) = pick_fm(&les, &|_| true) {
        let Some((next, used)) = fm_step(les, &var) else { return Outcome::GaveUp };
        steps.push(Step::Bounds { var, rows: used });
        let Some(l) = tidy_les(next) else { return Outcome::Unsat };
        if l.len() > MAX_ROWS {
            return Outcome::GaveUp;
        }
        les = l;
    }
    Outcome::Open { witness: rebuild(&steps) }
}

/// Walks the elimination backwards choosing integer values, preferring
/// those closest to zero.
fn rebuild(steps: &[Step]) -> Option<BTreeMap<Var, i128>> {
    let mut env = BTreeMap::new();
    for step in steps.iter().rev() {
        match step {
            Step::Eq { var, row } => {
                let a = row.coeff(var);
                let mut rest = row.clone();
                rest.coeffs.remove(var);
                let r = rest.eval(&env)?;
                if r % a != 0 {
                    return None;
                }
                env.insert(var.clone(), -r / a);
            }
            Step::Bounds { var, rows } => {
                let (mut lo, mut hi) = (i128::MIN, i128::MAX);
                for row in rows {
                    let a = row.coeff(var);
                    let mut rest = row.clone();
                    rest.coeffs.remove(var);
                    let r = rest.eval(&env)?;
                    if a > 0 {
                        hi = hi.min(floor_div(-r, a));
                    } else {
                        lo = lo.max(ceil_div(r, -a));
                    }
                }
                if lo > hi {
                    return None;
                }
                env.insert(var.clone(), 0i128.clamp(lo, hi));
            }
        }
    }
    Some(env)
}

/// Result of eliminating a set of variables.
pub(crate) struct Projected {
    pub eqs: Vec<Row>,
    pub les: Vec<Row>,
    pub nes: Vec<Row>,
    pub exact: bool,
}

/// Eliminates the variables outside `keep`. `None` means unsatisfiable.
pub(crate) fn eliminate(sys: &System, keep: &BTreeSet<Var>) -> Option<Option<Projected>> {
    let gone = |v: &Var| !keep.contains(v);
    let mut exact = true;
    let Some(mut eqs) = tidy_eqs(sys.eqs.clone()) else { return Some(None) };
    let Some(mut les) = tidy_les(sys.les.clone()) else { return Some(None) };
    let mut nes = sys.nes.clone();
    while let Some((i, var)) = pick_eq(&eqs, &gone) {
        let eq = eqs.swap_remove(i);
        if eq.coeff(&var).abs() != 1 {
            exact = false;
        }
        let sub = |rows: &[Row]| -> Option<Vec<Row>> { rows.iter().map(|r| subst_eq(r, &var, &eq)).collect() };
        let (e, l, n) = (sub(&eqs)?, sub(&les)?, sub(&nes)?);
        let Some(e) = tidy_eqs(e) else { return Some(None) };
        let Some(l) = tidy_les(l) else { return Some(None) };
        eqs = e;
        les = l;
        nes = n;
    }
    while let Some(var) = pick_fm(&les, &gone) {
        if !fm_exact(&les, &var) {
            exact = false;
        }
        let (next, _) = fm_step(les, &var)?;
        let Some(l) = tidy_les(next) else { return Some(None) };
        if l.len() > MAX_ROWS {
            return None;
        }
        les = l;
    }
    let mut kept_nes = Vec::new();
    for r in nes {
        if r.vars().any(gone) {
            exact = false;
            continue;
        }
        match r.normalize(Kind::Ne) {
            None => return Some(None),
            Some(r) if r.is_constant() => {}
            Some(r) => {
                if !kept_nes.contains(&r) {
                    kept_nes.push(r)
                }
            }
        }
    }
    // variables left only in inequalities eliminated above; any that are
    // still present sit in equalities without another solvable variable
    if eqs.iter().chain(&les).any(|r| r.vars().any(gone)) {
        exact = false;
        eqs.retain(|r| !r.vars().any(gone));
    }
    Some(Some(Projected { eqs, les, nes: kept_nes, exact }))
}
