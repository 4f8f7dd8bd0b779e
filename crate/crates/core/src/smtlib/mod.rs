//! SMT-LIB text: HORN-logic emission of programs, and reading/writing of
//! `define-fun` models.

mod sexp;

use crate::chc::{Atom, Clause, Constraint, ConstraintAtom, Head, LinExpr, Pred, Program, Rel, Sort, Var};
use crate::lia::{negate_linatom, QuantDisj};
use crate::model::{ModelError, SymbolicInterpretation};
use sexp::Sexp;
use std::collections::BTreeMap;
use std::fmt::Write;

pub use sexp::{parse_sexps, SexpError};

fn sort_str(s: Sort) -> &'static str {
    match s {
        Sort::Int => "Int",
        Sort::IntArray => "(Array Int Int)",
    }
}

fn num(k: i64) -> String {
    if k < 0 {
        format!("(- {})", k.unsigned_abs())
    } else {
        k.to_string()
    }
}

fn term(e: &LinExpr) -> String {
    let mut parts: Vec<String> = e
        .coeffs()
        .iter()
        .map(|(v, &k)| match k {
            1 => v.name().to_string(),
            -1 => format!("(- {})", v.name()),
            k => format!("(* {} {})", num(k), v.name()),
        })
        .collect();
    let c = e.constant_value();
    if c != 0 || parts.is_empty() {
        parts.push(num(c));
    }
    if parts.len() == 1 {
        parts.pop().expect("one part")
    } else {
        format!("(+ {})", parts.join(" "))
    }
}

fn rel_str(r: Rel) -> &'static str {
    match r {
        Rel::Eq | Rel::Ne => "=",
        Rel::Le => "<=",
        Rel::Lt => "<",
        Rel::Ge => ">=",
        Rel::Gt => ">",
    }
}

fn constraint_atom(a: &ConstraintAtom) -> String {
    match a {
        ConstraintAtom::Lin { lhs, rel: Rel::Ne, rhs } => format!("(not (= {} {}))", term(lhs), term(rhs)),
        ConstraintAtom::Lin { lhs, rel, rhs } => format!("({} {} {})", rel_str(*rel), term(lhs), term(rhs)),
        ConstraintAtom::Read { arr, idx, val } => format!("(= (select {arr} {idx}) {val})"),
        ConstraintAtom::Write { arr, idx, val, out } => format!("(= (store {arr} {idx} {val}) {out})"),
        ConstraintAtom::ArrEq { lhs, rhs } => format!("(= {lhs} {rhs})"),
    }
}

fn atom(a: &Atom) -> String {
    if a.args.is_empty() {
        return a.pred.name().to_string();
    }
    let args: Vec<&str> = a.args.iter().map(|v| v.name()).collect();
    format!("({} {})", a.pred.name(), args.join(" "))
}

fn conj(parts: Vec<String>) -> String {
    match parts.len() {
        0 => "true".to_string(),
        1 => parts.into_iter().next().expect("one part"),
        _ => format!("(and {})", parts.join(" ")),
    }
}

fn clause(c: &Clause) -> String {
    let mut parts: Vec<String> = c.constraint.atoms().iter().map(constraint_atom).collect();
    parts.extend(c.body.iter().map(atom));
    let head = match &c.head {
        Head::False => "false".to_string(),
        Head::Atom(h) => atom(h),
    };
    let body = format!("(=> {} {head})", conj(parts));
    let vars = c.vars();
    if vars.is_empty() {
        return format!("(assert {body})");
    }
    let binders: String = vars.iter().map(|v| format!("({} {})", v.name(), sort_str(v.sort()))).collect();
    format!("(assert (forall ({binders}) {body}))")
}

/// The program in SMT-LIB HORN logic, one assertion per clause in program
/// order. Output is a function of the program alone.
pub fn emit_smtlib(p: &Program) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    for (pred, sorts) in p.signatures() {
        let s: Vec<&str> = sorts.iter().map(|s| sort_str(*s)).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) Bool)", pred.name(), s.join(" "));
    }
    for c in p.clauses() {
        out.push_str(&clause(c));
        out.push('\n');
    }
    out
}

fn constraint_text(c: &Constraint) -> String {
    if c.atoms().iter().any(|a| a.vars().is_empty() && a.eval(&|_| None) == Some(false)) {
        return "false".to_string();
    }
    conj(c.atoms().iter().map(constraint_atom).collect())
}

/// A formula in the model syntax.
pub fn formula_text(q: &QuantDisj) -> String {
    let ds: Vec<String> = q.disjuncts.iter().map(constraint_text).collect();
    let body = if ds.len() == 1 { ds.into_iter().next().expect("one") } else { format!("(or {})", ds.join(" ")) };
    if q.exists.is_empty() {
        return body;
    }
    let binders: String = q.exists.iter().map(|v| format!("({} {})", v.name(), sort_str(v.sort()))).collect();
    format!("(exists ({binders}) {body})")
}

/// One `define-fun` per interpreted predicate.
pub fn print_model(sigma: &SymbolicInterpretation) -> String {
    let mut out = String::new();
    for p in sigma.preds() {
        let (params, f) = sigma.get(p).expect("listed");
        let binders: Vec<String> = params.iter().map(|v| format!("({} {})", v.name(), sort_str(v.sort()))).collect();
        let _ = writeln!(out, "(define-fun {} ({}) Bool {})", p.name(), binders.join(" "), formula_text(f));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelParseError {
    #[error(transparent)]
    Syntax(#[from] SexpError),
    #[error("offset {pos}: unsupported construct {what}")]
    Unsupported { what: String, pos: usize },
    #[error("offset {pos}: {msg}")]
    Sort { msg: String, pos: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn unsupported(what: impl Into<String>, e: &Sexp) -> ModelParseError {
    ModelParseError::Unsupported { what: what.into(), pos: e.pos() }
}

type Scope = BTreeMap<String, Var>;
type Lets = BTreeMap<String, Sexp>;

struct Reader {
    /// Every name bound so far in the current definition.
    used: std::collections::BTreeSet<String>,
}

/// A formula as existentials plus a disjunct list.
type Dnf = (Vec<Var>, Vec<Constraint>);

impl Reader {
    fn sort(&self, e: &Sexp) -> Result<Sort, ModelParseError> {
        match e {
            Sexp::Atom(s, _) if s == "Int" => Ok(Sort::Int),
            Sexp::List(xs, _)
                if xs.len() == 3 && xs[0].is_sym("Array") && xs[1].is_sym("Int") && xs[2].is_sym("Int") =>
            {
                Ok(Sort::IntArray)
            }
            other => Err(ModelParseError::Sort { msg: format!("unsupported sort {other}"), pos: other.pos() }),
        }
    }

    fn binders(&self, e: &Sexp) -> Result<Vec<Var>, ModelParseError> {
        let Sexp::List(bs, _) = e else { return Err(unsupported("binder list", e)) };
        bs.iter()
            .map(|b| match b {
                Sexp::List(xs, _) if xs.len() == 2 => match &xs[0] {
                    Sexp::Atom(n, _) => Ok(Var::new(n, self.sort(&xs[1])?)),
                    other => Err(unsupported("binder name", other)),
                },
                other => Err(unsupported("binder", other)),
            })
            .collect()
    }

    fn var(&self, name: &str, e: &Sexp, scope: &Scope) -> Result<Var, ModelParseError> {
        scope.get(name).cloned().ok_or_else(|| unsupported(format!("unbound symbol {name}"), e))
    }

    fn term(&self, e: &Sexp, scope: &Scope, lets: &Lets) -> Result<LinExpr, ModelParseError> {
        match e {
            Sexp::Atom(s, _) => {
                if let Ok(k) = s.parse::<i64>() {
                    return Ok(LinExpr::constant(k));
                }
                if let Some(t) = lets.get(s) {
                    return self.term(t, scope, lets);
                }
                let v = self.var(s, e, scope)?;
                if v.sort() != Sort::Int {
                    return Err(ModelParseError::Sort { msg: format!("{s} is an array"), pos: e.pos() });
                }
                Ok(LinExpr::var(&v))
            }
            Sexp::List(xs, _) if !xs.is_empty() => {
                let args = xs[1..].iter().map(|x| self.term(x, scope, lets)).collect::<Result<Vec<_>, _>>()?;
                let head = xs[0].sym().unwrap_or("");
                match (head, args.len()) {
                    ("+", _) => Ok(args.iter().fold(LinExpr::zero(), |a, b| a.plus(b))),
                    ("-", 1) => Ok(args[0].scaled(-1)),
                    ("-", n) if n >= 2 => Ok(args[1..].iter().fold(args[0].clone(), |a, b| a.minus(b))),
                    ("*", _) => {
                        let mut acc = LinExpr::constant(1);
                        for a in &args {
                            if a.is_constant() {
                                acc = acc.scaled(a.constant_value());
                            } else if acc.is_constant() {
                                acc = a.scaled(acc.constant_value());
                            } else {
                                return Err(unsupported("non-linear product", e));
                            }
                        }
                        Ok(acc)
                    }
                    _ => Err(unsupported(format!("term {head}"), e)),
                }
            }
            _ => Err(unsupported("empty term", e)),
        }
    }

    fn lin(&self, rel: Rel, e: &Sexp, args: &[Sexp], scope: &Scope, lets: &Lets) -> Result<Vec<ConstraintAtom>, ModelParseError> {
        if args.len() < 2 {
            return Err(unsupported("comparison arity", e));
        }
        let ts = args.iter().map(|a| self.term(a, scope, lets)).collect::<Result<Vec<_>, _>>()?;
        Ok(ts.windows(2).map(|w| ConstraintAtom::lin(w[0].clone(), rel, w[1].clone())).collect())
    }

    fn and(a: Dnf, b: Dnf) -> Dnf {
        let mut ex = a.0;
        ex.extend(b.0);
        let ds = a.1.iter().flat_map(|x| b.1.iter().map(move |y| x.and(y))).collect();
        (ex, ds)
    }

    fn or(a: Dnf, b: Dnf) -> Dnf {
        let mut ex = a.0;
        ex.extend(b.0);
        let mut ds = a.1;
        ds.extend(b.1);
        (ex, ds)
    }

    fn unit(atoms: Vec<ConstraintAtom>) -> Dnf {
        (Vec::new(), vec![Constraint::new(atoms)])
    }

    fn dnf_atoms(atoms: Vec<ConstraintAtom>, neg: bool) -> Dnf {
        if !neg {
            return Reader::unit(atoms);
        }
        // not (a1 /\ ... /\ an) = (not a1) \/ ... \/ (not an)
        let ds = atoms.iter().flat_map(negate_linatom).map(|a| Constraint::new(vec![a])).collect();
        (Vec::new(), ds)
    }

    fn array_eq(&self, e: &Sexp, args: &[Sexp], scope: &Scope) -> Result<Option<ConstraintAtom>, ModelParseError> {
        let arr = |x: &Sexp| -> Option<Var> { x.sym().and_then(|s| scope.get(s)).filter(|v| v.sort() == Sort::IntArray).cloned() };
        let int = |x: &Sexp| -> Result<Var, ModelParseError> {
            let s = x.sym().ok_or_else(|| unsupported("array operand", x))?;
            self.var(s, x, scope)
        };
        if args.len() != 2 {
            return Ok(None);
        }
        if let (Some(a), Some(b)) = (arr(&args[0]), arr(&args[1])) {
            return Ok(Some(ConstraintAtom::ArrEq { lhs: a, rhs: b }));
        }
        let (l, r) = (&args[0], &args[1]);
        if let Sexp::List(xs, _) = l {
            if xs.len() == 3 && xs[0].is_sym("select") {
                let arr = arr(&xs[1]).ok_or_else(|| unsupported("select on a non-array", e))?;
                return Ok(Some(ConstraintAtom::Read { arr, idx: int(&xs[2])?, val: int(r)? }));
            }
            if xs.len() == 4 && xs[0].is_sym("store") {
                let a = arr(&xs[1]).ok_or_else(|| unsupported("store on a non-array", e))?;
                let out = arr(r).ok_or_else(|| unsupported("store result", e))?;
                return Ok(Some(ConstraintAtom::Write { arr: a, idx: int(&xs[2])?, val: int(&xs[3])?, out }));
            }
        }
        Ok(None)
    }

    fn formula(&mut self, e: &Sexp, neg: bool, scope: &Scope, lets: &Lets) -> Result<Dnf, ModelParseError> {
        match e {
            Sexp::Atom(s, _) => match (s.as_str(), neg) {
                ("true", false) | ("false", true) => Ok(Reader::unit(Vec::new())),
                ("true", true) | ("false", false) => Ok((Vec::new(), Vec::new())),
                (s, _) => match lets.get(s) {
                    Some(b) => {
                        let b = b.clone();
                        self.formula(&b, neg, scope, lets)
                    }
                    None => Err(unsupported(format!("boolean symbol {s}"), e)),
                },
            },
            Sexp::List(xs, _) if !xs.is_empty() => {
                let head = xs[0].sym().ok_or_else(|| unsupported("application head", e))?;
                let args = &xs[1..];
                match head {
                    "not" if args.len() == 1 => self.formula(&args[0], !neg, scope, lets),
                    "and" | "or" => {
                        // under negation and/or swap
                        let conj = (head == "and") != neg;
                        let mut acc = if conj { Reader::unit(Vec::new()) } else { (Vec::new(), Vec::new()) };
                        for a in args {
                            let d = self.formula(a, neg, scope, lets)?;
                            acc = if conj { Reader::and(acc, d) } else { Reader::or(acc, d) };
                            if acc.1.len() > crate::lia::DNF_CAP {
                                return Err(unsupported("formula too large for disjunctive form", e));
                            }
                        }
                        Ok(acc)
                    }
                    "=>" if args.len() == 2 => {
                        let a = self.formula(&args[0], !neg, scope, lets)?;
                        let b = self.formula(&args[1], neg, scope, lets)?;
                        Ok(if neg { Reader::and(a, b) } else { Reader::or(a, b) })
                    }
                    "exists" if args.len() == 2 => {
                        if neg {
                            return Err(unsupported("exists under negation", e));
                        }
                        let bound = self.binders(&args[0])?;
                        let mut inner = scope.clone();
                        let mut fresh = Vec::new();
                        for v in bound {
                            let n = crate::chc::fresh_name(v.name(), &|s| self.used.contains(s));
                            let n = if self.used.contains(v.name()) { n } else { v.name().to_string() };
                            self.used.insert(n.clone());
                            let nv = v.renamed(&n);
                            inner.insert(v.name().to_string(), nv.clone());
                            fresh.push(nv);
                        }
                        let mut lets = lets.clone();
                        for v in &fresh {
                            lets.remove(v.name());
                        }
                        let (mut ex, ds) = self.formula(&args[1], false, &inner, &lets)?;
                        ex.extend(fresh);
                        Ok((ex, ds))
                    }
                    "let" if args.len() == 2 => {
                        let Sexp::List(bs, _) = &args[0] else { return Err(unsupported("let bindings", e)) };
                        let mut inner = lets.clone();
                        for b in bs {
                            match b {
                                Sexp::List(kv, _) if kv.len() == 2 => {
                                    let name = kv[0].sym().ok_or_else(|| unsupported("let name", b))?;
                                    inner.insert(name.to_string(), kv[1].clone());
                                }
                                other => return Err(unsupported("let binding", other)),
                            }
                        }
                        self.formula(&args[1], neg, scope, &inner)
                    }
                    "=" => {
                        if let Some(a) = self.array_eq(e, args, scope)? {
                            if neg {
                                return Err(unsupported("negated array equality", e));
                            }
                            return Ok(Reader::unit(vec![a]));
                        }
                        Ok(Reader::dnf_atoms(self.lin(Rel::Eq, e, args, scope, lets)?, neg))
                    }
                    "distinct" => {
                        let ts = args.iter().map(|a| self.term(a, scope, lets)).collect::<Result<Vec<_>, _>>()?;
                        let mut atoms = Vec::new();
                        for i in 0..ts.len() {
                            for j in i + 1..ts.len() {
                                atoms.push(ConstraintAtom::lin(ts[i].clone(), Rel::Ne, ts[j].clone()));
                            }
                        }
                        Ok(Reader::dnf_atoms(atoms, neg))
                    }
                    "<=" | "<" | ">=" | ">" => {
                        let rel = match head {
                            "<=" => Rel::Le,
                            "<" => Rel::Lt,
                            ">=" => Rel::Ge,
                            _ => Rel::Gt,
                        };
                        Ok(Reader::dnf_atoms(self.lin(rel, e, args, scope, lets)?, neg))
                    }
                    other => Err(unsupported(other.to_string(), e)),
                }
            }
            _ => Err(unsupported("empty application", e)),
        }
    }

    fn define_fun(&mut self, e: &Sexp, out: &mut SymbolicInterpretation) -> Result<(), ModelParseError> {
        let Sexp::List(xs, _) = e else { return Err(unsupported("top-level atom", e)) };
        if xs.len() != 5 || !xs[0].is_sym("define-fun") {
            return Err(unsupported("expected define-fun", e));
        }
        let name = xs[1].sym().ok_or_else(|| unsupported("function name", &xs[1]))?;
        if !xs[3].is_sym("Bool") {
            return Err(ModelParseError::Sort { msg: format!("{name} does not return Bool"), pos: xs[3].pos() });
        }
        let params = self.binders(&xs[2])?;
        let scope: Scope = params.iter().map(|v| (v.name().to_string(), v.clone())).collect();
        self.used = scope.keys().cloned().collect();
        let (ex, ds) = self.formula(&xs[4], false, &scope, &Lets::new())?;
        out.insert(Pred::new(name), params, QuantDisj::new(ex, ds))?;
        Ok(())
    }
}

/// Reads `define-fun` forms, optionally preceded by `sat` and wrapped in a
/// `(model ...)` or bare list, as solvers print them.
pub fn parse_model(text: &str) -> Result<SymbolicInterpretation, ModelParseError> {
    let mut forms = parse_sexps(text)?;
    if forms.first().is_some_and(|f| f.is_sym("sat")) {
        forms.remove(0);
    }
    let mut flat = Vec::new();
    for f in forms {
        match f {
            Sexp::List(xs, _) if xs.first().is_some_and(|h| h.is_sym("model")) => flat.extend(xs.into_iter().skip(1)),
            Sexp::List(xs, _) if xs.first().is_some_and(|h| matches!(h, Sexp::List(..))) => flat.extend(xs),
            Sexp::List(xs, p) if xs.is_empty() => return Err(ModelParseError::Unsupported { what: "empty form".into(), pos: p }),
            f => flat.push(f),
        }
    }
    let mut out = SymbolicInterpretation::new();
    let mut r = Reader { used: Default::default() };
    for f in &flat {
        r.define_fun(f, &mut out)?;
    }
    Ok(out)
}
