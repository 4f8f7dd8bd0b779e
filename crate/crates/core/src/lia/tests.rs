use super::*;
use crate::chc::parse_program;

fn cons(text: &str) -> Constraint {
    let p = parse_program(&format!("false :- {text}.")).unwrap();
    p.clauses()[0].constraint.clone()
}

fn v(name: &str) -> Var {
    Var::int(name)
}

fn keep(names: &[&str]) -> BTreeSet<Var> {
    names.iter().map(|n| v(n)).collect()
}

#[test]
fn unsat_after_unfolding_su_sq() {
    assert_eq!(is_satisfiable(&cons("M = Y, M =< 0, Y > 0")), Verdict::Disproved);
}

#[test]
fn truth_is_satisfiable() {
    assert_eq!(is_satisfiable(&Constraint::truth()), Verdict::Proved);
}

#[test]
fn strict_bounds_are_tightened() {
    // no integer strictly between 0 and 1
    assert_eq!(is_satisfiable(&cons("X > 0, X < 1")), Verdict::Disproved);
    assert_eq!(is_satisfiable(&cons("X > 0, X < 2")), Verdict::Proved);
}

#[test]
fn gcd_makes_parity_gaps_visible() {
    assert_eq!(is_satisfiable(&cons("2*X = 2*Y + 1")), Verdict::Disproved);
    assert_eq!(is_satisfiable(&cons("2*X >= 1, 2*X =< 1")), Verdict::Disproved);
}

#[test]
fn witness_satisfies_constraint() {
    let c = cons("X >= 3, Y = X + 2, Z =< Y - 7, Z =\\= -2");
    let (verdict, w) = check_sat(&c);
    assert_eq!(verdict, Verdict::Proved);
    let w = w.unwrap();
    assert_eq!(c.eval(&|x| w.get(x).copied()), Some(true));
}

#[test]
fn disequalities_are_split() {
    assert_eq!(is_satisfiable(&cons("X >= 0, X =< 1, X =\\= 0, X =\\= 1")), Verdict::Disproved);
    assert_eq!(is_satisfiable(&cons("X >= 0, X =< 2, X =\\= 0, X =\\= 1")), Verdict::Proved);
}

#[test]
fn array_atoms_block_sat_claims() {
    let p = parse_program("false :- read(A,I,V), V > 0.").unwrap();
    let c = &p.clauses()[0].constraint;
    assert_eq!(is_satisfiable(c), Verdict::Unknown);
    let p = parse_program("false :- read(A,I,V), V > 0, V < 0.").unwrap();
    assert_eq!(is_satisfiable(&p.clauses()[0].constraint), Verdict::Disproved);
}

#[test]
fn equality_from_definition_body() {
    let d = cons("M1 = M2, N1 = N2");
    assert_eq!(entails_equality(&d, &v("M1"), &v("M2")), Verdict::Proved);
}

#[test]
fn equality_of_two_zeros() {
    let d = cons("R0 = 0, S0 = 0");
    assert_eq!(entails_equality(&d, &v("R0"), &v("S0")), Verdict::Proved);
}

#[test]
fn unconstrained_pair_is_not_equal() {
    let d = cons("M1 > 0");
    assert_eq!(entails_equality(&d, &v("M1"), &v("M2")), Verdict::Disproved);
}

fn unfolded_ackermann_body() -> Constraint {
    // constraint of the goal after unfolding both top-level atoms and the
    // recursive ack clauses
    cons(
        "A1 =\\= A2, M1 >= 0, M1 = M2, N1 >= 0, N1 = N2, A2 = A3 + 1, \
         M1 > 0, N1 > 0, X1 = M1 - 1, Y1 = N1 - 1, \
         M2 > 0, N2 =\\= 0, X2 = M2 - 1, Y2 = N2 - 1, Z2 = Z3 - 1",
    )
}

#[test]
fn eq_set_pairs_recursive_calls() {
    let d = unfolded_ackermann_body();
    let a = Atom::new("ack1", vec![v("M1"), v("Y1"), v("Z1")]);
    let b = Atom::new("ack2", vec![v("M2"), v("Y2"), v("Z2")]);
    let got = eq_set(&d, &a, &b);
    let want: BTreeSet<(Var, Var)> = [(v("M1"), v("M2")), (v("Y1"), v("Y2"))].into_iter().collect();
    assert_eq!(got, want);
}

#[test]
fn eq_set_of_unrelated_calls_is_empty() {
    let d = unfolded_ackermann_body();
    let a = Atom::new("ack1", vec![v("M1"), v("Y1"), v("Z1")]);
    let b = Atom::new("ack2", vec![v("X2"), v("Z3"), v("A2")]);
    assert!(eq_set(&d, &a, &b).is_empty());
}

#[test]
fn eq_set_under_truth_is_empty() {
    let a = Atom::new("p", vec![v("X")]);
    let b = Atom::new("q", vec![v("Y")]);
    assert!(eq_set(&Constraint::truth(), &a, &b).is_empty());
}

#[test]
fn eq_set_includes_shared_variables() {
    let a = Atom::new("p", vec![v("X")]);
    let b = Atom::new("q", vec![v("X"), v("Y")]);
    let got = eq_set(&Constraint::truth(), &a, &b);
    assert!(got.contains(&(v("X"), v("X"))));
    assert_eq!(got.len(), 1);
}

#[test]
fn project_successor() {
    let (q, exact) = project_exact(&cons("X = Y + 1, Y >= 0"), &keep(&["X"]));
    assert!(exact);
    assert!(q.exists.is_empty());
    assert_eq!(equiv_quant_disj(&q, &QuantDisj::conj(cons("X >= 1"))), Verdict::Proved);
}

#[test]
fn project_keeping_everything_is_identity() {
    let c = cons("X = Y + 1, Y >= 0");
    let q = project(&c, &keep(&["X", "Y"]));
    assert_eq!(q, QuantDisj::conj(c));
}

#[test]
fn project_drops_folded_equality() {
    let q = project(&cons("M = N, N = Y"), &keep(&["M", "N"]));
    assert_eq!(q.disjuncts.len(), 1);
    assert_eq!(crate::chc::print_clause(&crate::chc::Clause::new(
        crate::chc::ClauseId(1),
        crate::chc::Head::False,
        q.disjuncts[0].clone(),
        vec![],
    )), "false :- M = N.");
}

#[test]
fn project_of_parity_is_inexact() {
    let (q, exact) = project_exact(&cons("X = 2*Y"), &keep(&["X"]));
    assert!(!exact);
    // still implied by the input
    assert_eq!(implies(&cons("X = 2*Y"), &q), Verdict::Proved);
}

#[test]
fn project_unsat_is_false() {
    let q = project(&cons("X = Y, Y > 0, Y < 1"), &keep(&["X"]));
    assert!(q.is_falsum());
}

#[test]
fn clause_eight_constraint_is_replaceable() {
    let lhs = QuantDisj::new(vec![v("Y")], vec![cons("M = Y, M =< 0, Sum = R0, Sqr = S0")]);
    let rhs = QuantDisj::conj(cons("M =< 0, Sum = R0, Sqr = S0"));
    assert_eq!(equiv_quant_disj(&lhs, &rhs), Verdict::Proved);
}

#[test]
fn equivalence_is_reflexive() {
    let c = QuantDisj::conj(cons("X > Y, Z = X + Y, Z =\\= 4"));
    assert_eq!(equiv_quant_disj(&c, &c), Verdict::Proved);
}

#[test]
fn strict_and_non_strict_agree_on_integers() {
    let a = QuantDisj::conj(cons("X > 0"));
    let b = QuantDisj::conj(cons("X >= 1"));
    assert_eq!(equiv_quant_disj(&a, &b), Verdict::Proved);
    let c = QuantDisj::conj(cons("X >= 0"));
    assert_eq!(equiv_quant_disj(&a, &c), Verdict::Disproved);
}

#[test]
fn disjunctions_are_compared_as_sets_of_points() {
    let a = QuantDisj::new(vec![], vec![cons("X =< 0"), cons("X >= 1")]);
    assert_eq!(equiv_quant_disj(&a, &QuantDisj::truth()), Verdict::Proved);
    let b = QuantDisj::new(vec![], vec![cons("X =< 0"), cons("X >= 2")]);
    assert_eq!(equiv_quant_disj(&b, &QuantDisj::truth()), Verdict::Disproved);
}

#[test]
fn negations() {
    let show = |atoms: Vec<ConstraintAtom>| -> Vec<String> {
        atoms
            .iter()
            .map(|a| {
                let mut s = String::new();
                crate::chc::write_constraint_atom(&mut s, a);
                s
            })
            .collect()
    };
    let one = |t: &str| cons(t).atoms()[0].clone();
    assert_eq!(show(negate_linatom(&one("X =< Y"))), ["X >= Y + 1"]);
    assert_eq!(show(negate_linatom(&one("X = Y"))), ["X =< Y - 1", "X >= Y + 1"]);
    assert_eq!(show(negate_linatom(&one("X > 0"))), ["X =< 0"]);
    assert_eq!(show(negate_linatom(&one("X =\\= Y"))), ["X = Y"]);
}

#[test]
fn entails_checks_array_atoms_verbatim() {
    let p = parse_program("false :- read(A,I,V), V > 0.").unwrap();
    let c = &p.clauses()[0].constraint;
    assert_eq!(entails(c, c), Verdict::Proved);
    let d = parse_program("false :- read(A,J,V).").unwrap();
    assert_eq!(entails(c, &d.clauses()[0].constraint), Verdict::Unknown);
}
