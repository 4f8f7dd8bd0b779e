mod common;

use common::corpus;
use hornpair::chc::{
    apply_subst, parse_program, predicate_partition, print_clause, print_program, rename_apart, Atom, ChcError, Clause, ClauseId,
    ConstraintAtom, Pred, Rel, Sort, Subst, Var,
};
use std::collections::BTreeSet;

fn clause(text: &str) -> Clause {
    parse_program(text).unwrap().clauses()[0].clone()
}

fn ids(xs: &[u64]) -> Vec<ClauseId> {
    xs.iter().map(|&i| ClauseId(i)).collect()
}

#[test]
fn goal_clause_shape() {
    let c = clause("false :- M > Sum, M >= 0, R = 0, su(M,R,Sum).");
    assert!(c.is_goal() && c.is_linear());
    assert_eq!(c.constraint.len(), 3);
    assert_eq!(c.body, vec![Atom::new("su", vec![Var::int("M"), Var::int("R"), Var::int("Sum")])]);
}

#[test]
fn empty_constraint_is_true() {
    let c = clause("p(X) :- q(X).");
    assert!(!c.is_goal());
    assert!(c.constraint.is_true());
    assert_eq!(c.body.len(), 1);
}

#[test]
fn literal_arguments_become_equalities() {
    let c = clause("p(0).");
    let h = c.head.atom().unwrap();
    assert_eq!(h.args.len(), 1);
    let x = h.args[0].clone();
    match c.constraint.atoms() {
        [ConstraintAtom::Lin { lhs, rel: Rel::Eq, rhs }] => {
            let d = lhs.minus(rhs);
            assert_eq!(d.coeffs().len(), 1);
            assert_eq!(d.constant_value(), 0);
            assert!(d.coeff(&x) != 0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn head_arguments_are_distinct_variables_after_parsing() {
    for (name, text) in corpus::ALL {
        for c in parse_program(text).unwrap().clauses() {
            if let Some(h) = c.head.atom() {
                let set: BTreeSet<&Var> = h.args.iter().collect();
                assert_eq!(set.len(), h.args.len(), "{name}: {c}");
            }
        }
    }
    let c = clause("p(X,X,Y+1).");
    let h = c.head.atom().unwrap();
    assert_eq!(h.args.iter().collect::<BTreeSet<_>>().len(), 3);
}

#[test]
fn syntax_errors_have_positions() {
    match parse_program("p(X) :- X = 0.\nq(X) :- X >.").unwrap_err() {
        ChcError::Syntax { line, .. } => assert_eq!(line, 2),
        e => panic!("{e:?}"),
    }
    assert!(matches!(parse_program("p(X) :- X = 0"), Err(ChcError::Syntax { .. })));
    assert!(matches!(parse_program("P(X)."), Err(ChcError::Syntax { .. })));
}

#[test]
fn arity_and_sort_clashes() {
    assert!(matches!(parse_program("p(X).\np(X,Y)."), Err(ChcError::ArityClash { .. })));
    let sorted = ":- sorts p(array).\np(A) :- X = A + 1.";
    assert!(matches!(parse_program(sorted), Err(ChcError::SortMismatch { .. })));
}

#[test]
fn printing_known_clauses() {
    assert_eq!(print_program(&parse_program("").unwrap()), "");
    let p = parse_program(corpus::SUM_UPTO).unwrap();
    let printed: Vec<String> = p.clauses().iter().map(print_clause).collect();
    assert!(printed.contains(&"su(X,R,Sum) :- X =< 0, Sum = R.".to_string()), "{printed:?}");
    let ack = parse_program(corpus::ACKERMANN).unwrap();
    let c4 = print_clause(&ack.clauses()[3]);
    assert!(c4.ends_with("ack1(M1,Y1,Z1), ack1(X1,Z1,A1)."), "{c4}");
}

#[test]
fn corpus_round_trips() {
    for (name, text) in corpus::ALL {
        let p = parse_program(text).unwrap();
        let once = print_program(&p);
        let q = parse_program(&once).unwrap();
        assert!(p.same_clauses(&q), "{name}");
        assert_eq!(print_program(&q), once, "{name}");
    }
}

#[test]
fn rename_apart_avoids_and_preserves_shape() {
    let c = clause("p(X) :- X > 0, Y = X - 1, p(Y).");
    assert_eq!(rename_apart(&c, &BTreeSet::new()), c);
    let avoid: BTreeSet<Var> = [Var::int("X")].into();
    let r = rename_apart(&c, &avoid);
    assert!(r.var_set().is_disjoint(&avoid));
    assert!(r.vars().contains(&Var::int("Y")));
    let rels = |c: &Clause| {
        c.constraint.atoms().iter().map(|a| match a {
            ConstraintAtom::Lin { rel, .. } => *rel,
            _ => Rel::Eq,
        }).collect::<Vec<_>>()
    };
    assert_eq!(rels(&r), rels(&c));
    assert_eq!(r.body[0].pred, c.body[0].pred);
    // the fold example: definition renamed apart from the clause it folds
    let ex = parse_program(corpus::SUM_SQUARE).unwrap();
    let d = clause("su_sq(M,R0,Sum,N,S0,Sqr) :- M = Y, su(M,R0,Sum), sq(N,Y,S0,Sqr).");
    for c in ex.clauses() {
        assert!(rename_apart(&d, &c.var_set()).var_set().is_disjoint(&c.var_set()));
    }
}

#[test]
fn substitution_cases() {
    let a = Atom::new("ack1", vec![Var::int("M1"), Var::int("N1"), Var::int("A1")]);
    let id: Subst = a.args.iter().map(|v| (v.clone(), v.clone())).collect();
    assert_eq!(apply_subst(&vec![a.clone()], &id).unwrap(), vec![a.clone()]);
    let theta: Subst = [(Var::int("N1"), Var::int("Y1"))].into();
    let got = apply_subst(&vec![a.clone()], &theta).unwrap();
    assert_eq!(got[0], Atom::new("ack1", vec![Var::int("M1"), Var::int("Y1"), Var::int("A1")]));
    let bad: Subst = [(Var::int("N1"), Var::new("B", Sort::IntArray))].into();
    assert!(matches!(apply_subst(&vec![a], &bad), Err(ChcError::SortMismatch { .. })));
}

#[test]
fn disjoint_substitutions_compose_as_their_union() {
    let c = clause("p(X,Y) :- X + 2*Y >= Z, W = 1, q(Z,W), q(X,Y).");
    let names = ["X", "Y", "Z", "W"];
    let targets = ["A", "X", "Z"];
    let mut checked = 0;
    // each variable goes to the first map, the second, or neither
    for sides in 0..81u32 {
        for images in 0..81u32 {
            let (mut s1, mut s2) = (Subst::new(), Subst::new());
            for (i, n) in names.iter().enumerate() {
                let image = Var::int(targets[(images / 3u32.pow(i as u32) % 3) as usize]);
                match sides / 3u32.pow(i as u32) % 3 {
                    0 => s1.insert(Var::int(n), image),
                    1 => s2.insert(Var::int(n), image),
                    _ => None,
                };
            }
            // the first map's images must not be rewritten again
            if s1.values().any(|v| s2.contains_key(v)) {
                continue;
            }
            let union: Subst = s1.iter().chain(&s2).map(|(k, v)| (k.clone(), v.clone())).collect();
            let stepwise = apply_subst(&apply_subst(&c, &s1).unwrap(), &s2).unwrap();
            assert_eq!(stepwise, apply_subst(&c, &union).unwrap(), "{s1:?} then {s2:?}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn partitions() {
    let ack = parse_program(corpus::ACKERMANN).unwrap();
    let (q, r) = predicate_partition(&ack, &Pred::new("ackermann1"), &Pred::new("ackermann2")).unwrap();
    assert_eq!(q.ids(), ids(&[1, 2, 3, 4]));
    assert_eq!(r.ids(), ids(&[5, 6, 7, 8]));
    assert!(matches!(predicate_partition(&ack, &Pred::new("ack1"), &Pred::new("ack1")), Err(ChcError::Overlap(_))));
    let ss = parse_program(corpus::SUM_SQUARE).unwrap();
    let (q, r) = predicate_partition(&ss, &Pred::new("su"), &Pred::new("sq")).unwrap();
    let heads = |p: &hornpair::chc::Program| p.clauses().iter().map(|c| c.head.pred().unwrap().name().to_string()).collect::<BTreeSet<_>>();
    assert_eq!(heads(&q), ["su".to_string()].into());
    assert_eq!(heads(&r), ["sq".to_string()].into());
    assert_eq!(q.len() + r.len(), 4);
}
