//! Random generators shared by the property suites and the acceptance
//! harness.
#![allow(dead_code)]

use hornpair::chc::{Constraint, ConstraintAtom, LinExpr, Rel, Var};
use rand::rngs::StdRng;
use rand::Rng;
use std::collections::BTreeMap;

pub const RELS: [Rel; 6] = [Rel::Eq, Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt, Rel::Ne];

pub fn vars(n: usize) -> Vec<Var> {
    (0..n).map(|i| Var::int(&format!("X{i}"))).collect()
}

fn random_expr(rng: &mut StdRng, vs: &[Var]) -> LinExpr {
    let mut e = LinExpr::constant(rng.gen_range(-6..=6));
    let terms = rng.gen_range(1..=2);
    for _ in 0..terms {
        let v = &vs[rng.gen_range(0..vs.len())];
        e.add_term(v, rng.gen_range(-3..=3));
    }
    e
}

/// Up to four atoms over the given variables; coefficients in [-3,3].
pub fn random_conj(rng: &mut StdRng, vs: &[Var]) -> Constraint {
    let n = rng.gen_range(1..=4);
    (0..n)
        .map(|_| {
            let rel = RELS[rng.gen_range(0..RELS.len())];
            let lhs = random_expr(rng, vs);
            let rhs = if rng.gen_bool(0.5) { LinExpr::var(&vs[rng.gen_range(0..vs.len())]) } else { LinExpr::zero() };
            ConstraintAtom::lin(lhs, rel, rhs)
        })
        .collect()
}

/// Every point of `[lo,hi]^vs`, in lexicographic order.
pub fn box_points(vs: &[Var], lo: i64, hi: i64) -> Vec<BTreeMap<Var, i64>> {
    let mut out = vec![BTreeMap::new()];
    for v in vs {
        let mut next = Vec::new();
        for p in &out {
            for x in lo..=hi {
                let mut q = p.clone();
                q.insert(v.clone(), x);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

pub mod corpus {
    pub const SUM_UPTO: &str = include_str!("../../corpus/sum_upto.chc");
    pub const SUM_UPTO_MODEL: &str = include_str!("../../corpus/sum_upto.model");
    pub const SUM_SQUARE: &str = include_str!("../../corpus/sum_square.chc");
    pub const SUM_SQUARE_P4: &str = include_str!("../../corpus/sum_square_p4.chc");
    pub const SUM_SQUARE_P4_MODEL: &str = include_str!("../../corpus/sum_square_p4.model");
    pub const TIGHT_DEFS: &str = include_str!("../../corpus/tight_defs.chc");
    pub const TIGHT_SIGMA1: &str = include_str!("../../corpus/tight_sigma1.model");
    pub const TIGHT_SIGMA2: &str = include_str!("../../corpus/tight_sigma2.model");
    pub const ACKERMANN: &str = include_str!("../../corpus/ackermann.chc");
    pub const ACKERMANN_TRANSF: &str = include_str!("../../corpus/ackermann_transf.chc");
    pub const HL: &str = include_str!("../../corpus/hl.chc");
    pub const HL1: &str = include_str!("../../corpus/hl1.chc");
    pub const COUNTER: &str = include_str!("../../corpus/counter.chc");
    pub const COUNTER_MODEL: &str = include_str!("../../corpus/counter.model");

    /// Every corpus program, by file stem.
    pub const ALL: [(&str, &str); 14] = [
        ("sum_upto", SUM_UPTO),
        ("sum_square", SUM_SQUARE),
        ("sum_square_p4", SUM_SQUARE_P4),
        ("tight_defs", TIGHT_DEFS),
        ("ackermann", ACKERMANN),
        ("ackermann_transf", ACKERMANN_TRANSF),
        ("fib_monotonic", include_str!("../../corpus/fib_monotonic.chc")),
        ("fib_injective", include_str!("../../corpus/fib_injective.chc")),
        ("fib_fundep", include_str!("../../corpus/fib_fundep.chc")),
        ("hl", HL),
        ("hl1", HL1),
        ("loop_unswitching", include_str!("../../corpus/loop_unswitching.chc")),
        ("array_loop", include_str!("../../corpus/array_loop.chc")),
        ("loop_pipelining", include_str!("../../corpus/loop_pipelining.chc")),
    ];
}

use hornpair::chc::{parse_program, ClauseId, Program};
use hornpair::kernel::{AClass, KernelConfig, TransformationState};

fn only_clause(text: &str) -> hornpair::chc::Clause {
    parse_program(text).unwrap().clauses()[0].clone()
}

fn constraint(text: &str) -> Constraint {
    only_clause(&format!("false :- {text}.")).constraint
}

fn subst(pairs: &[(&str, &str)]) -> hornpair::chc::Subst {
    pairs.iter().map(|(a, b)| (Var::int(a), Var::int(b))).collect()
}

/// The hand derivation on the sum/square clauses: define su_sq, unfold
/// su and sq, clean up with constraint replacement, fold the goal and the
/// recursive clause. The unfolded su clause names its counter X1 where
/// the hand derivation writes M1. Returns the final state, the input
/// program and the ids of the folded goal and folded recursive clause.
pub fn sum_square_script() -> (TransformationState, Program, ClauseId, ClauseId) {
    let p0 = parse_program(corpus::SUM_SQUARE).unwrap();
    let cfg = KernelConfig { a_class: AClass::TwoVar, ..KernelConfig::default() };
    let mut s = TransformationState::new(p0.clone(), cfg);
    let def = s
        .apply_definition(only_clause("su_sq(M,R0,Sum,N,S0,Sqr) :- M = Y, su(M,R0,Sum), sq(N,Y,S0,Sqr)."))
        .unwrap();
    let halves = s.apply_unfold(def, 0).unwrap();
    let base = s.apply_unfold(halves[0], 0).unwrap();
    let rec = s.apply_unfold(halves[1], 1).unwrap();
    // base/base, base/rec, rec/base, rec/rec
    let (c8, c9, c10, c11) = (base[0], base[1], rec[0], rec[1]);
    s.delete_unsat(c9).unwrap();
    s.delete_unsat(c10).unwrap();
    s.apply_replace(&[c8], vec![constraint("M =< 0, Sum = R0, Sqr = S0")]).unwrap();
    let c13 = s
        .apply_replace(&[c11], vec![constraint("M > 0, X1 = M - 1, R1 = R0 + M, S1 = S0 + N, X1 = Y1")])
        .unwrap()[0];
    let goal = p0.goals().next().unwrap().id;
    let ident = subst(&[("M", "M"), ("R0", "R0"), ("Sum", "Sum"), ("N", "N"), ("Y", "Y"), ("S0", "S0"), ("Sqr", "Sqr")]);
    let c14 = s.apply_fold(goal, &[0, 1], def, &ident).unwrap();
    let theta = subst(&[("M", "X1"), ("R0", "R1"), ("Sum", "Sum"), ("N", "N"), ("Y", "Y1"), ("S0", "S1"), ("Sqr", "Sqr")]);
    let c15 = s.apply_fold(c13, &[0, 1], def, &theta).unwrap();
    (s, p0, c14, c15)
}

use hornpair::chc::{Atom, Clause, Head};
use hornpair::lia::{equiv_quant_disj, QuantDisj, Verdict};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// The clause as a formula over its argument positions: every variable
/// is existential and `P<i>` names the i-th argument slot.
fn slot_formula(head: Option<&Atom>, body: &[&Atom], c: &Constraint) -> QuantDisj {
    let mut k = c.clone();
    let mut slot = 0;
    for a in head.into_iter().chain(body.iter().copied()) {
        for v in &a.args {
            let p = Var::new(&format!("P{slot}"), v.sort());
            k.push(ConstraintAtom::var_eq(&p, v));
            slot += 1;
        }
    }
    let exists: Vec<Var> = c
        .vars()
        .into_iter()
        .chain(head.into_iter().chain(body.iter().copied()).flat_map(|a| a.args.clone()))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    QuantDisj::new(exists, vec![k])
}

/// Same head predicate, same body predicates up to order, and logically
/// equivalent constraints over the argument slots.
pub fn equivalent_clauses(a: &Clause, b: &Clause) -> bool {
    if a.head.pred() != b.head.pred() || a.body.len() != b.body.len() || a.body.len() > 5 {
        return false;
    }
    let ha = match &a.head {
        Head::Atom(h) => Some(h),
        Head::False => None,
    };
    let hb = match &b.head {
        Head::Atom(h) => Some(h),
        Head::False => None,
    };
    let fa = slot_formula(ha, &a.body.iter().collect::<Vec<_>>(), &a.constraint);
    permutations(b.body.len()).into_iter().any(|perm| {
        let body: Vec<&Atom> = perm.iter().map(|&i| &b.body[i]).collect();
        if body.iter().zip(&a.body).any(|(x, y)| x.pred != y.pred) {
            return false;
        }
        equiv_quant_disj(&fa, &slot_formula(hb, &body, &b.constraint)) == Verdict::Proved
    })
}

/// A one-to-one matching of clauses up to `equivalent_clauses`, or the
/// first clause of `got` without a partner.
pub fn equivalent_programs(got: &Program, want: &Program) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{} clauses, expected {}:\n{}", got.len(), want.len(), hornpair::chc::print_program(got)));
    }
    let mut free: Vec<&Clause> = want.clauses().iter().collect();
    for c in got.clauses() {
        match free.iter().position(|w| equivalent_clauses(c, w)) {
            Some(i) => {
                free.remove(i);
            }
            None => return Err(format!("no counterpart for {c}")),
        }
    }
    Ok(())
}

/// A random definite program over `p0..p{n-1}` (arity 1 or 2), with
/// small constraints so ground evaluation stays cheap. The first clause of
/// each predicate has an empty body.
pub fn random_definite(rng: &mut StdRng) -> Program {
    let n = rng.gen_range(1..=3);
    let arity: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=2)).collect();
    let vs = vars(4);
    let mut clauses = Vec::new();
    for p in 0..n {
        for k in 0..rng.gen_range(1..=3) {
            let head = Atom::new(&format!("p{p}"), vs[..arity[p]].to_vec());
            let body: Vec<Atom> = if k == 0 {
                Vec::new()
            } else {
                (0..rng.gen_range(1..=2))
                    .map(|_| {
                        let q = rng.gen_range(0..n);
                        Atom::new(&format!("p{q}"), (0..arity[q]).map(|_| vs[rng.gen_range(0..vs.len())].clone()).collect())
                    })
                    .collect()
            };
            let id = ClauseId(clauses.len() as u64 + 1);
            clauses.push(Clause::new(id, Head::Atom(head), random_conj(rng, &vs[..3]), body));
        }
    }
    Program::from_clauses(clauses).unwrap()
}
