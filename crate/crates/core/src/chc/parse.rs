//! Surface syntax reader.
//!
//! ```text
//! clause := head (":-" item ("," item)*)? "."
//! head   := atom | "false"
//! item   := atom | linatom | read(V,V,V) | write(V,V,V,V) | "true"
//! ```
//! plus the directive `:- sorts p(int, array).`

use super::{Atom, ChcError, Clause, ClauseId, Constraint, ConstraintAtom, Head, LinExpr, Pred, Program, Rel, Sort, Var};
use std::collections::{BTreeMap, BTreeSet, HashMap};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Plus,
    Minus,
    Star,
    Rel(Rel),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ChcError {
    ChcError::Syntax { line, col, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<Token>, ChcError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let adv = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            adv(1, &mut i, &mut col);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let rest = |k: usize| chars.get(i + k).copied();
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let first = word.chars().next().unwrap_or('_');
            let tok = if first.is_ascii_uppercase() || first == '_' { Tok::Var(word) } else { Tok::Ident(word) };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            col += i - start;
            let n = digits.parse::<i64>().map_err(|_| syntax(tl, tc, "integer literal out of range"))?;
            out.push(Token { tok: Tok::Int(n), line: tl, col: tc });
            continue;
        } else {
            match (c, rest(1), rest(2)) {
                (':', Some('-'), _) => (Tok::Neck, 2),
                ('=', Some('\\'), Some('=')) => (Tok::Rel(Rel::Ne), 3),
                ('=', Some('<'), _) => (Tok::Rel(Rel::Le), 2),
                ('>', Some('='), _) => (Tok::Rel(Rel::Ge), 2),
                ('=', _, _) => (Tok::Rel(Rel::Eq), 1),
                ('<', _, _) => (Tok::Rel(Rel::Lt), 1),
                ('>', _, _) => (Tok::Rel(Rel::Gt), 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                (',', _, _) => (Tok::Comma, 1),
                ('.', _, _) => (Tok::Dot, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('-', _, _) => (Tok::Minus, 1),
                ('*', _, _) => (Tok::Star, 1),
                _ => return Err(syntax(tl, tc, format!("unexpected character '{c}'"))),
            }
        };
        out.push(Token { tok: tok.0, line: tl, col: tc });
        adv(tok.1, &mut i, &mut col);
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq)]
struct RawLin {
    coeffs: BTreeMap<String, i64>,
    constant: i64,
}

impl RawLin {
    fn var(name: &str) -> RawLin {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), 1);
        RawLin { coeffs, constant: 0 }
    }

    fn add(mut self, other: RawLin, sign: i64) -> RawLin {
        for (v, k) in other.coeffs {
            let e = self.coeffs.entry(v.clone()).or_insert(0);
            *e += sign * k;
            if *e == 0 {
                self.coeffs.remove(&v);
            }
        }
        self.constant += sign * other.constant;
        self
    }

    fn scale(self, k: i64) -> RawLin {
        if k == 0 {
            return RawLin::default();
        }
        RawLin {
            coeffs: self.coeffs.into_iter().map(|(v, c)| (v, c * k)).collect(),
            constant: self.constant * k,
        }
    }

    fn as_var(&self) -> Option<&str> {
        if self.constant != 0 || self.coeffs.len() != 1 {
            return None;
        }
        let (v, k) = self.coeffs.iter().next()?;
        (*k == 1).then_some(v.as_str())
    }
}

#[derive(Clone, Debug)]
struct RawAtom {
    pred: String,
    args: Vec<RawLin>,
}

#[derive(Clone, Debug)]
enum RawItem {
    Atom(RawAtom),
    Lin(RawLin, Rel, RawLin),
    Read([String; 3]),
    Write([String; 4]),
}

struct RawClause {
    head: Option<RawAtom>,
    items: Vec<RawItem>,
    line: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

const ANON: &str = "\u{1}anon";

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ChcError> {
        let t = self.peek();
        Err(syntax(t.line, t.col, msg))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ChcError> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn var_name(&mut self, name: String) -> String {
        if name == "_" {
            self.anon += 1;
            format!("{ANON}{}", self.anon)
        } else {
            name
        }
    }

    fn expect_var(&mut self) -> Result<String, ChcError> {
        match self.peek().tok.clone() {
            Tok::Var(v) => {
                self.next();
                Ok(self.var_name(v))
            }
            _ => self.err("expected a variable"),
        }
    }

    fn linexpr(&mut self) -> Result<RawLin, ChcError> {
        let mut acc = match self.peek().tok {
            Tok::Minus => {
                self.next();
                self.product()?.scale(-1)
            }
            Tok::Plus => {
                self.next();
                self.product()?
            }
            _ => self.product()?,
        };
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = acc.add(self.product()?, 1);
                }
                Tok::Minus => {
                    self.next();
                    acc = acc.add(self.product()?, -1);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<RawLin, ChcError> {
        let mut acc = self.factor()?;
        while self.peek().tok == Tok::Star {
            let t = self.next();
            let rhs = self.factor()?;
            acc = if acc.coeffs.is_empty() {
                rhs.scale(acc.constant)
            } else if rhs.coeffs.is_empty() {
                acc.scale(rhs.constant)
            } else {
                return Err(syntax(t.line, t.col, "nonlinear product"));
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RawLin, ChcError> {
        match self.peek().tok.clone() {
            Tok::Int(n) => {
                self.next();
                Ok(RawLin { coeffs: BTreeMap::new(), constant: n })
            }
            Tok::Var(v) => {
                self.next();
                let name = self.var_name(v);
                Ok(RawLin::var(&name))
            }
            Tok::Minus => {
                self.next();
                Ok(self.factor()?.scale(-1))
            }
            Tok::LParen => {
                self.next();
                let e = self.linexpr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            _ => self.err("expected a term"),
        }
    }

    fn atom(&mut self) -> Result<RawAtom, ChcError> {
        let t = self.next();
        let Tok::Ident(pred) = t.tok else {
            return Err(syntax(t.line, t.col, "expected a predicate"));
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            if self.peek().tok != Tok::RParen {
                loop {
                    args.push(self.linexpr()?);
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "')'")?;
        }
        Ok(RawAtom { pred, args })
    }

    fn array_args<const N: usize>(&mut self) -> Result<[String; N], ChcError> {
        self.expect(Tok::LParen, "'('")?;
        let mut out: Vec<String> = Vec::new();
        for i in 0..N {
            if i > 0 {
                self.expect(Tok::Comma, "','")?;
            }
            out.push(self.expect_var()?);
        }
        self.expect(Tok::RParen, "')'")?;
        Ok(out.try_into().expect("length checked"))
    }

    fn item(&mut self) -> Result<Option<RawItem>, ChcError> {
        if let Tok::Ident(name) = self.peek().tok.clone() {
            match name.as_str() {
                "true" => {
                    self.next();
                    return Ok(None);
                }
                "read" if *self.peek2() == Tok::LParen => {
                    self.next();
                    return Ok(Some(RawItem::Read(self.array_args::<3>()?)));
                }
                "write" if *self.peek2() == Tok::LParen => {
                    self.next();
                    return Ok(Some(RawItem::Write(self.array_args::<4>()?)));
                }
                "false" => return self.err("'false' is only allowed as a head"),
                _ => return Ok(Some(RawItem::Atom(self.atom()?))),
            }
        }
        let lhs = self.linexpr()?;
        let rel = match self.next() {
            Token { tok: Tok::Rel(r), .. } => r,
            t => return Err(syntax(t.line, t.col, "expected a relation")),
        };
        let rhs = self.linexpr()?;
        Ok(Some(RawItem::Lin(lhs, rel, rhs)))
    }

    fn sorts_directive(&mut self, decls: &mut Vec<(String, Vec<Sort>, usize, usize)>) -> Result<(), ChcError> {
        loop {
            let a = self.peek().clone();
            let Tok::Ident(pred) = a.tok.clone() else {
                return self.err("expected a predicate in sorts declaration");
            };
            self.next();
            let mut sorts = Vec::new();
            if self.peek().tok == Tok::LParen {
                self.next();
                loop {
                    let t = self.next();
                    match &t.tok {
                        Tok::Ident(s) if s == "int" => sorts.push(Sort::Int),
                        Tok::Ident(s) if s == "array" => sorts.push(Sort::IntArray),
                        _ => return Err(syntax(t.line, t.col, "expected 'int' or 'array'")),
                    }
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen, "')'")?;
            }
            decls.push((pred, sorts, a.line, a.col));
            if self.peek().tok == Tok::Comma {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::Dot, "'.'")
    }

    fn statement(&mut self, decls: &mut Vec<(String, Vec<Sort>, usize, usize)>) -> Result<Option<RawClause>, ChcError> {
        let start = self.peek().clone();
        if start.tok == Tok::Neck {
            self.next();
            match self.next().tok {
                Tok::Ident(d) if d == "sorts" => {}
                _ => return Err(syntax(start.line, start.col, "unknown directive")),
            }
            self.sorts_directive(decls)?;
            return Ok(None);
        }
        let head = match &start.tok {
            Tok::Ident(n) if n == "false" => {
                self.next();
                None
            }
            Tok::Ident(_) => Some(self.atom()?),
            _ => return self.err("expected a clause head"),
        };
        let mut items = Vec::new();
        if self.peek().tok == Tok::Neck {
            self.next();
            loop {
                if let Some(it) = self.item()? {
                    items.push(it);
                }
                if self.peek().tok == Tok::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::Dot, "',' or '.'")?;
        Ok(Some(RawClause { head, items, line: start.line }))
    }
}

/// Replaces non-variable atom arguments and repeated head variables by fresh
/// variables constrained by equalities.
fn normalize(raw: RawClause) -> RawClause {
    let mut names: BTreeSet<String> = BTreeSet::new();
    let note = |e: &RawLin, names: &mut BTreeSet<String>| {
        for v in e.coeffs.keys() {
            if !v.starts_with(ANON) {
                names.insert(v.clone());
            }
        }
    };
    if let Some(h) = &raw.head {
        h.args.iter().for_each(|a| note(a, &mut names));
    }
    for it in &raw.items {
        match it {
            RawItem::Atom(a) => a.args.iter().for_each(|x| note(x, &mut names)),
            RawItem::Lin(l, _, r) => {
                note(l, &mut names);
                note(r, &mut names);
            }
            RawItem::Read(vs) => vs.iter().for_each(|v| note(&RawLin::var(v), &mut names)),
            RawItem::Write(vs) => vs.iter().for_each(|v| note(&RawLin::var(v), &mut names)),
        }
    }
    let mut counter = 0usize;
    let mut fresh = |names: &mut BTreeSet<String>| loop {
        counter += 1;
        let n = format!("V{counter}");
        if names.insert(n.clone()) {
            return n;
        }
    };
    let mut anon_map: HashMap<String, String> = HashMap::new();
    let mut eqs = Vec::new();

    let mut head = raw.head;
    if let Some(h) = &mut head {
        let mut seen = BTreeSet::new();
        for arg in &mut h.args {
            match arg.as_var().map(str::to_string) {
                Some(v) if v.starts_with(ANON) => *arg = RawLin::var(&fresh(&mut names)),
                Some(v) if seen.insert(v.clone()) => {}
                _ => {
                    let f = fresh(&mut names);
                    eqs.push(RawItem::Lin(RawLin::var(&f), Rel::Eq, arg.clone()));
                    *arg = RawLin::var(&f);
                }
            }
        }
    }
    let mut body_eqs = Vec::new();
    let mut items = Vec::new();
    for it in raw.items {
        match it {
            RawItem::Atom(mut a) => {
                for arg in &mut a.args {
                    match arg.as_var() {
                        Some(_) => {}
                        None => {
                            let f = fresh(&mut names);
                            body_eqs.push(RawItem::Lin(RawLin::var(&f), Rel::Eq, arg.clone()));
                            *arg = RawLin::var(&f);
                        }
                    }
                }
                items.push(RawItem::Atom(a));
            }
            other => items.push(other),
        }
    }
    let mut all: Vec<RawItem> = eqs.into_iter().chain(body_eqs).chain(items).collect();
    // anonymous variables become fresh names, one per occurrence
    let mut rename = |v: &str, names: &mut BTreeSet<String>| -> String {
        if v.starts_with(ANON) {
            anon_map.entry(v.to_string()).or_insert_with(|| fresh(names)).clone()
        } else {
            v.to_string()
        }
    };
    let mut fix_lin = |e: &mut RawLin, names: &mut BTreeSet<String>| {
        let old = std::mem::take(&mut e.coeffs);
        for (v, k) in old {
            *e.coeffs.entry(rename(&v, names)).or_insert(0) += k;
        }
    };
    if let Some(h) = &mut head {
        h.args.iter_mut().for_each(|a| fix_lin(a, &mut names));
    }
    for it in &mut all {
        match it {
            RawItem::Atom(a) => a.args.iter_mut().for_each(|x| fix_lin(x, &mut names)),
            RawItem::Lin(l, _, r) => {
                fix_lin(l, &mut names);
                fix_lin(r, &mut names);
            }
            RawItem::Read(vs) => vs.iter_mut().for_each(|v| {
                let mut e = RawLin::var(v);
                fix_lin(&mut e, &mut names);
                *v = e.as_var().unwrap_or_default().to_string();
            }),
            RawItem::Write(vs) => vs.iter_mut().for_each(|v| {
                let mut e = RawLin::var(v);
                fix_lin(&mut e, &mut names);
                *v = e.as_var().unwrap_or_default().to_string();
            }),
        }
    }
    RawClause { head, items: all, line: raw.line }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Pos(String, usize),
    Var(usize, String),
}

struct Unifier {
    index: HashMap<Key, usize>,
    parent: Vec<usize>,
    sort: Vec<Option<Sort>>,
    label: Vec<String>,
}

impl Unifier {
    fn node(&mut self, k: Key) -> usize {
        if let Some(&i) = self.index.get(&k) {
            return i;
        }
        let i = self.parent.len();
        self.label.push(match &k {
            Key::Pos(p, n) => format!("argument {} of {}", n + 1, p),
            Key::Var(_, v) => format!("variable {v}"),
        });
        self.parent.push(i);
        self.sort.push(None);
        self.index.insert(k, i);
        i
    }

    fn find(&mut self, i: usize) -> usize {
        let mut r = i;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut j = i;
        while self.parent[j] != r {
            let n = self.parent[j];
            self.parent[j] = r;
            j = n;
        }
        r
    }

    fn fix(&mut self, i: usize, s: Sort) -> Result<(), ChcError> {
        let r = self.find(i);
        match self.sort[r] {
            Some(old) if old != s => Err(ChcError::SortMismatch { what: self.label[i].clone(), expected: old, found: s }),
            _ => {
                self.sort[r] = Some(s);
                Ok(())
            }
        }
    }

    fn union(&mut self, a: usize, b: usize) -> Result<(), ChcError> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        match (self.sort[ra], self.sort[rb]) {
            (Some(x), Some(y)) if x != y => {
                return Err(ChcError::SortMismatch { what: self.label[b].clone(), expected: x, found: y })
            }
            (None, s) => self.sort[ra] = s,
            _ => {}
        }
        self.parent[rb] = ra;
        Ok(())
    }

    fn sort_of(&mut self, i: usize) -> Sort {
        let r = self.find(i);
        self.sort[r].unwrap_or(Sort::Int)
    }
}

/// Parses a program; clause ids are 1, 2, ... in textual order.
pub fn parse_program(text: &str) -> Result<Program, ChcError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0, anon: 0 };
    let mut decls = Vec::new();
    let mut raws = Vec::new();
    while parser.peek().tok != Tok::Eof {
        if let Some(c) = parser.statement(&mut decls)? {
            raws.push(normalize(c));
        }
    }

    let mut u = Unifier { index: HashMap::new(), parent: Vec::new(), sort: Vec::new(), label: Vec::new() };
    let mut arity: BTreeMap<String, usize> = BTreeMap::new();
    let mut check_arity = |pred: &str, n: usize| -> Result<(), ChcError> {
        match arity.get(pred) {
            Some(&m) if m != n => Err(ChcError::ArityClash { pred: Pred::new(pred), expected: m, found: n }),
            _ => {
                arity.insert(pred.to_string(), n);
                Ok(())
            }
        }
    };
    let mut declared: Vec<String> = Vec::new();
    for (pred, sorts, _, _) in &decls {
        check_arity(pred, sorts.len())?;
        for (i, s) in sorts.iter().enumerate() {
            let n = u.node(Key::Pos(pred.clone(), i));
            u.fix(n, *s)?;
        }
        declared.push(pred.clone());
    }
    for (ci, c) in raws.iter().enumerate() {
        let atoms = c.head.iter().chain(c.items.iter().filter_map(|it| match it {
            RawItem::Atom(a) => Some(a),
            _ => None,
        }));
        for a in atoms {
            check_arity(&a.pred, a.args.len())?;
            for (i, arg) in a.args.iter().enumerate() {
                let v = arg.as_var().expect("normalized").to_string();
                let pn = u.node(Key::Pos(a.pred.clone(), i));
                let vn = u.node(Key::Var(ci, v));
                u.union(pn, vn)?;
            }
        }
        for it in &c.items {
            match it {
                RawItem::Lin(l, Rel::Eq, r) if l.as_var().is_some() && r.as_var().is_some() => {
                    let a = u.node(Key::Var(ci, l.as_var().unwrap_or_default().to_string()));
                    let b = u.node(Key::Var(ci, r.as_var().unwrap_or_default().to_string()));
                    u.union(a, b)?;
                }
                RawItem::Lin(l, _, r) => {
                    for v in l.coeffs.keys().chain(r.coeffs.keys()) {
                        let n = u.node(Key::Var(ci, v.clone()));
                        u.fix(n, Sort::Int)?;
                    }
                }
                RawItem::Read([a, i, v]) => {
                    let n = u.node(Key::Var(ci, a.clone()));
                    u.fix(n, Sort::IntArray)?;
                    for x in [i, v] {
                        let n = u.node(Key::Var(ci, x.clone()));
                        u.fix(n, Sort::Int)?;
                    }
                }
                RawItem::Write([a, i, v, o]) => {
                    for x in [a, o] {
                        let n = u.node(Key::Var(ci, x.clone()));
                        u.fix(n, Sort::IntArray)?;
                    }
                    for x in [i, v] {
                        let n = u.node(Key::Var(ci, x.clone()));
                        u.fix(n, Sort::Int)?;
                    }
                }
                RawItem::Atom(_) => {}
            }
        }
    }

    let mut program = Program::new();
    for pred in &declared {
        let n = arity[pred];
        let sorts = (0..n).map(|i| {
            let k = u.node(Key::Pos(pred.clone(), i));
            u.sort_of(k)
        });
        program.declare(&Pred::new(pred), sorts.collect())?;
    }
    for (ci, raw) in raws.into_iter().enumerate() {
        let mut var = |name: &str| -> Var {
            let k = u.node(Key::Var(ci, name.to_string()));
            Var::new(name, u.sort_of(k))
        };
        let atom = |a: &RawAtom, var: &mut dyn FnMut(&str) -> Var| Atom {
            pred: Pred::new(&a.pred),
            args: a.args.iter().map(|x| var(x.as_var().expect("normalized"))).collect(),
        };
        let head = match &raw.head {
            None => Head::False,
            Some(h) => Head::Atom(atom(h, &mut var)),
        };
        let mut constraint = Constraint::truth();
        let mut body = Vec::new();
        let lin = |e: &RawLin, var: &mut dyn FnMut(&str) -> Var| {
            let mut out = LinExpr::constant(e.constant);
            for (v, k) in &e.coeffs {
                out.add_term(&var(v), *k);
            }
            out
        };
        for it in &raw.items {
            match it {
                RawItem::Atom(a) => body.push(atom(a, &mut var)),
                RawItem::Lin(l, rel, r) => {
                    if let (Rel::Eq, Some(x), Some(y)) = (rel, l.as_var(), r.as_var()) {
                        let (x, y) = (var(x), var(y));
                        if x.sort() == Sort::IntArray {
                            constraint.push(ConstraintAtom::ArrEq { lhs: x, rhs: y });
                            continue;
                        }
                    }
                    constraint.push(ConstraintAtom::lin(lin(l, &mut var), *rel, lin(r, &mut var)));
                }
                RawItem::Read([a, i, v]) => {
                    constraint.push(ConstraintAtom::Read { arr: var(a), idx: var(i), val: var(v) })
                }
                RawItem::Write([a, i, v, o]) => constraint.push(ConstraintAtom::Write {
                    arr: var(a),
                    idx: var(i),
                    val: var(v),
                    out: var(o),
                }),
            }
        }
        let id = ClauseId(ci as u64 + 1);
        program
            .insert(Clause::new(id, head, constraint, body))
            .map_err(|e| match e {
                ChcError::SortMismatch { what, expected, found } => ChcError::SortMismatch {
                    what: format!("{what} (clause at line {})", raw.line),
                    expected,
                    found,
                },
                other => other,
            })?;
    }
    Ok(program)
}
