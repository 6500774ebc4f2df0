//! Sorted terms over booleans, bitvectors, arrays and strings.
//!
//! Constructors fold applications whose arguments are literals, so terms
//! built from concrete values stay concrete.

use std::fmt;
use std::rc::Rc;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Bool,
    /// Mathematical integers; only used around string conversions.
    Int,
    BitVec(u32),
    String,
    Array(Box<Sort>, Box<Sort>),
}

impl Sort {
    pub fn array(index: Sort, elem: Sort) -> Sort {
        Sort::Array(Box::new(index), Box::new(elem))
    }

    pub fn width(&self) -> u32 {
        match self {
            Sort::BitVec(w) => *w,
            other => panic!("{other} is not a bitvector sort"),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
            Sort::String => write!(f, "String"),
            Sort::Array(i, e) => write!(f, "(Array {i} {e})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Not,
    And,
    Or,
    Implies,
    Ite,
    Eq,
    Distinct,
    BvAdd,
    BvSub,
    BvMul,
    BvSdiv,
    BvSrem,
    BvNeg,
    BvSlt,
    BvSle,
    Concat,
    Extract(u32, u32),
    SignExtend(u32),
    ZeroExtend(u32),
    Select,
    Store,
    ConstArray,
    StrConcat,
    StrLen,
    StrFromInt,
    StrFromCode,
    Bv2Nat,
    Int2Bv(u32),
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Const { name: String, sort: Sort },
    Bool(bool),
    /// Bit pattern of a `width`-bit vector.
    Bv { width: u32, bits: u64 },
    Int(i64),
    Str(String),
    App { op: Op, args: Vec<Term>, sort: Sort },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Term(Rc<Node>);

fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Two's complement reading of a bit pattern.
pub fn to_signed(bits: u64, width: u32) -> i64 {
    if width >= 64 {
        bits as i64
    } else {
        let shift = 64 - width;
        ((bits << shift) as i64) >> shift
    }
}

impl Term {
    fn new(node: Node) -> Term {
        Term(Rc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(name: impl Into<String>, sort: Sort) -> Term {
        Term::new(Node::Const {
            name: name.into(),
            sort,
        })
    }

    pub fn bool(b: bool) -> Term {
        Term::new(Node::Bool(b))
    }

    /// Bitvector literal from a signed value, truncated to `width` bits.
    pub fn bv(value: i64, width: u32) -> Term {
        Term::new(Node::Bv {
            width,
            bits: (value as u64) & mask(width),
        })
    }

    pub fn int(value: i64) -> Term {
        Term::new(Node::Int(value))
    }

    pub fn string(s: impl Into<String>) -> Term {
        Term::new(Node::Str(s.into()))
    }

    pub fn sort(&self) -> Sort {
        match self.node() {
            Node::Const { sort, .. } | Node::App { sort, .. } => sort.clone(),
            Node::Bool(_) => Sort::Bool,
            Node::Bv { width, .. } => Sort::BitVec(*width),
            Node::Int(_) => Sort::Int,
            Node::Str(_) => Sort::String,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.node() {
            Node::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Signed value of a bitvector literal.
    pub fn as_bv(&self) -> Option<i64> {
        match self.node() {
            Node::Bv { width, bits } => Some(to_signed(*bits, *width)),
            _ => None,
        }
    }

    fn as_bits(&self) -> Option<(u32, u64)> {
        match self.node() {
            Node::Bv { width, bits } => Some((*width, *bits)),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self.node() {
            Node::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn const_name(&self) -> Option<&str> {
        match self.node() {
            Node::Const { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self.node(),
            Node::Bool(_) | Node::Bv { .. } | Node::Int(_) | Node::Str(_)
        )
    }

    pub fn app(&self) -> Option<(&Op, &[Term])> {
        match self.node() {
            Node::App { op, args, .. } => Some((op, args)),
            _ => None,
        }
    }

    fn mk(op: Op, args: Vec<Term>, sort: Sort) -> Term {
        Term::new(Node::App { op, args, sort })
    }

    /// Every constant name occurring in the term, in first-occurrence order.
    pub fn constants(&self, out: &mut Vec<(String, Sort)>) {
        let mut seen = std::collections::HashSet::new();
        fn go(t: &Term, seen: &mut std::collections::HashSet<String>, out: &mut Vec<(String, Sort)>) {
            match t.node() {
                Node::Const { name, sort } => {
                    if seen.insert(name.clone()) {
                        out.push((name.clone(), sort.clone()));
                    }
                }
                Node::App { args, .. } => args.iter().for_each(|a| go(a, seen, out)),
                _ => {}
            }
        }
        for (n, _) in out.iter() {
            seen.insert(n.clone());
        }
        go(self, &mut seen, out);
    }

    /// Replace constants by terms.
    pub fn substitute(&self, f: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self.node() {
            Node::Const { name, .. } => f(name).unwrap_or_else(|| self.clone()),
            Node::App { op, args, sort } => {
                let args: Vec<Term> = args.iter().map(|a| a.substitute(f)).collect();
                Term::mk(op.clone(), args, sort.clone())
            }
            _ => self.clone(),
        }
    }
}

// ---- boolean structure ----

pub fn not(a: Term) -> Term {
    if let Some(b) = a.as_bool() {
        return Term::bool(!b);
    }
    if let Some((Op::Not, args)) = a.app() {
        return args[0].clone();
    }
    Term::mk(Op::Not, vec![a], Sort::Bool)
}

fn connective(op: Op, args: Vec<Term>, unit: bool) -> Term {
    let mut out = Vec::with_capacity(args.len());
    for a in args {
        assert_eq!(a.sort(), Sort::Bool, "ill-sorted {op:?} operand");
        match a.as_bool() {
            Some(b) if b == unit => {}
            Some(_) => return Term::bool(!unit),
            None => match a.app() {
                Some((o, inner)) if *o == op => out.extend(inner.iter().cloned()),
                _ => out.push(a),
            },
        }
    }
    match out.len() {
        0 => Term::bool(unit),
        1 => out.pop().unwrap(),
        _ => Term::mk(op, out, Sort::Bool),
    }
}

pub fn and(args: Vec<Term>) -> Term {
    connective(Op::And, args, true)
}

pub fn or(args: Vec<Term>) -> Term {
    connective(Op::Or, args, false)
}

pub fn and2(a: Term, b: Term) -> Term {
    and(vec![a, b])
}

pub fn or2(a: Term, b: Term) -> Term {
    or(vec![a, b])
}

pub fn implies(a: Term, b: Term) -> Term {
    match (a.as_bool(), b.as_bool()) {
        (Some(true), _) => b,
        (Some(false), _) | (_, Some(true)) => Term::bool(true),
        (_, Some(false)) => not(a),
        _ => Term::mk(Op::Implies, vec![a, b], Sort::Bool),
    }
}

pub fn ite(c: Term, a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), b.sort(), "ill-sorted ite");
    match c.as_bool() {
        Some(true) => a,
        Some(false) => b,
        None if a == b => a,
        None => {
            let sort = a.sort();
            Term::mk(Op::Ite, vec![c, a, b], sort)
        }
    }
}

pub fn eq(a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), b.sort(), "ill-sorted equality");
    if a == b {
        return Term::bool(true);
    }
    if a.is_literal() && b.is_literal() {
        return Term::bool(false);
    }
    Term::mk(Op::Eq, vec![a, b], Sort::Bool)
}

pub fn distinct(args: Vec<Term>) -> Term {
    if args.len() < 2 {
        return Term::bool(true);
    }
    if args.iter().all(Term::is_literal) {
        let all = args.iter().enumerate().all(|(i, a)| args[i + 1..].iter().all(|b| a != b));
        return Term::bool(all);
    }
    Term::mk(Op::Distinct, args, Sort::Bool)
}

// ---- bitvectors ----

fn bv_binary(op: Op, a: Term, b: Term) -> Term {
    let sort = a.sort();
    assert_eq!(sort, b.sort(), "ill-sorted {op:?}");
    let w = sort.width();
    if let (Some(x), Some(y)) = (a.as_bv(), b.as_bv()) {
        let (x, y) = (x as i128, y as i128);
        let r = match op {
            Op::BvAdd => Some(x + y),
            Op::BvSub => Some(x - y),
            Op::BvMul => Some(x.wrapping_mul(y)),
            Op::BvSdiv if y != 0 => Some(x / y),
            Op::BvSrem if y != 0 => Some(x % y),
            _ => None,
        };
        if let Some(r) = r {
            return Term::bv(r as i64, w);
        }
    }
    match (&op, a.as_bv(), b.as_bv()) {
        (Op::BvAdd, Some(0), _) => return b,
        (Op::BvAdd | Op::BvSub, _, Some(0)) => return a,
        (Op::BvMul, Some(1), _) => return b,
        (Op::BvMul | Op::BvSdiv, _, Some(1)) => return a,
        _ => {}
    }
    Term::mk(op, vec![a, b], sort)
}

pub fn bvadd(a: Term, b: Term) -> Term {
    bv_binary(Op::BvAdd, a, b)
}

pub fn bvsub(a: Term, b: Term) -> Term {
    bv_binary(Op::BvSub, a, b)
}

pub fn bvmul(a: Term, b: Term) -> Term {
    bv_binary(Op::BvMul, a, b)
}

pub fn bvsdiv(a: Term, b: Term) -> Term {
    bv_binary(Op::BvSdiv, a, b)
}

pub fn bvsrem(a: Term, b: Term) -> Term {
    bv_binary(Op::BvSrem, a, b)
}

pub fn bvneg(a: Term) -> Term {
    let sort = a.sort();
    if let Some(x) = a.as_bv() {
        return Term::bv(x.wrapping_neg(), sort.width());
    }
    Term::mk(Op::BvNeg, vec![a], sort)
}

fn bv_compare(op: Op, a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), b.sort(), "ill-sorted {op:?}");
    if let (Some(x), Some(y)) = (a.as_bv(), b.as_bv()) {
        return Term::bool(match op {
            Op::BvSlt => x < y,
            _ => x <= y,
        });
    }
    if a == b {
        return Term::bool(op == Op::BvSle);
    }
    Term::mk(op, vec![a, b], Sort::Bool)
}

pub fn bvslt(a: Term, b: Term) -> Term {
    bv_compare(Op::BvSlt, a, b)
}

pub fn bvsle(a: Term, b: Term) -> Term {
    bv_compare(Op::BvSle, a, b)
}

pub fn bvsgt(a: Term, b: Term) -> Term {
    bv_compare(Op::BvSlt, b, a)
}

pub fn bvsge(a: Term, b: Term) -> Term {
    bv_compare(Op::BvSle, b, a)
}

/// `hi` bits followed by `lo` bits.
pub fn concat(hi: Term, lo: Term) -> Term {
    let (wh, wl) = (hi.sort().width(), lo.sort().width());
    if let (Some((_, x)), Some((_, y))) = (hi.as_bits(), lo.as_bits()) {
        return Term::new(Node::Bv {
            width: wh + wl,
            bits: (x << wl) | y,
        });
    }
    Term::mk(Op::Concat, vec![hi, lo], Sort::BitVec(wh + wl))
}

pub fn extract(hi: u32, lo: u32, a: Term) -> Term {
    let w = a.sort().width();
    assert!(hi < w && lo <= hi, "bad extract");
    if lo == 0 && hi + 1 == w {
        return a;
    }
    let width = hi - lo + 1;
    if let Some((_, bits)) = a.as_bits() {
        return Term::new(Node::Bv {
            width,
            bits: (bits >> lo) & mask(width),
        });
    }
    if let Some((Op::Concat, args)) = a.app() {
        let lw = args[1].sort().width();
        if hi < lw {
            return extract(hi, lo, args[1].clone());
        }
        if lo >= lw {
            return extract(hi - lw, lo - lw, args[0].clone());
        }
    }
    Term::mk(Op::Extract(hi, lo), vec![a], Sort::BitVec(width))
}

pub fn sign_extend(by: u32, a: Term) -> Term {
    if by == 0 {
        return a;
    }
    let w = a.sort().width();
    if let Some(x) = a.as_bv() {
        return Term::bv(x, w + by);
    }
    Term::mk(Op::SignExtend(by), vec![a], Sort::BitVec(w + by))
}

pub fn zero_extend(by: u32, a: Term) -> Term {
    if by == 0 {
        return a;
    }
    let w = a.sort().width();
    if let Some((_, bits)) = a.as_bits() {
        return Term::new(Node::Bv { width: w + by, bits });
    }
    Term::mk(Op::ZeroExtend(by), vec![a], Sort::BitVec(w + by))
}

// ---- arrays ----

pub fn select(arr: Term, idx: Term) -> Term {
    let Sort::Array(i, e) = arr.sort() else {
        panic!("select on non-array");
    };
    assert_eq!(*i, idx.sort(), "ill-sorted select");
    if let Some((Op::ConstArray, args)) = arr.app() {
        return args[0].clone();
    }
    Term::mk(Op::Select, vec![arr, idx], *e)
}

pub fn store(arr: Term, idx: Term, val: Term) -> Term {
    let sort = arr.sort();
    let Sort::Array(i, e) = &sort else {
        panic!("store on non-array");
    };
    assert_eq!(**i, idx.sort(), "ill-sorted store index");
    assert_eq!(**e, val.sort(), "ill-sorted store value");
    Term::mk(Op::Store, vec![arr, idx, val], sort)
}

pub fn const_array(index: Sort, val: Term) -> Term {
    let sort = Sort::array(index, val.sort());
    Term::mk(Op::ConstArray, vec![val], sort)
}

// ---- strings ----

pub fn str_concat(a: Term, b: Term) -> Term {
    assert_eq!(a.sort(), Sort::String);
    assert_eq!(b.sort(), Sort::String);
    if let (Some(x), Some(y)) = (a.as_str(), b.as_str()) {
        return Term::string(format!("{x}{y}"));
    }
    if a.as_str() == Some("") {
        return b;
    }
    if b.as_str() == Some("") {
        return a;
    }
    Term::mk(Op::StrConcat, vec![a, b], Sort::String)
}

/// Length in characters as an integer term.
pub fn str_len(a: Term) -> Term {
    if let Some(s) = a.as_str() {
        return Term::int(s.encode_utf16().count() as i64);
    }
    Term::mk(Op::StrLen, vec![a], Sort::Int)
}

pub fn str_from_int(a: Term) -> Term {
    if let Node::Int(v) = a.node() {
        if *v >= 0 {
            return Term::string(v.to_string());
        }
    }
    Term::mk(Op::StrFromInt, vec![a], Sort::String)
}

pub fn str_from_code(a: Term) -> Term {
    if let Node::Int(v) = a.node() {
        if let Some(c) = u32::try_from(*v).ok().and_then(char::from_u32) {
            return Term::string(c.to_string());
        }
    }
    Term::mk(Op::StrFromCode, vec![a], Sort::String)
}

/// Unsigned value of a bitvector as an integer.
pub fn bv2nat(a: Term) -> Term {
    if let Some((_, bits)) = a.as_bits() {
        if bits <= i64::MAX as u64 {
            return Term::int(bits as i64);
        }
    }
    Term::mk(Op::Bv2Nat, vec![a], Sort::Int)
}

pub fn int2bv(width: u32, a: Term) -> Term {
    if let Node::Int(v) = a.node() {
        return Term::bv(*v, width);
    }
    Term::mk(Op::Int2Bv(width), vec![a], Sort::BitVec(width))
}

// ---- text ----

/// Symbol text, quoted with `|..|` unless it is a plain identifier.
pub fn symbol(name: &str) -> String {
    let plain = !name.is_empty()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.starts_with(|c: char| c.is_ascii_digit());
    if plain {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

/// SMT-LIB string literal.
pub fn string_literal(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\"\""),
            '\\' => out.push_str("\\u{5c}"),
            ' '..='~' => out.push(c),
            _ => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
        }
    }
    out.push('"');
    out
}

fn op_name(op: &Op, sort: &Sort) -> String {
    match op {
        Op::Not => "not".into(),
        Op::And => "and".into(),
        Op::Or => "or".into(),
        Op::Implies => "=>".into(),
        Op::Ite => "ite".into(),
        Op::Eq => "=".into(),
        Op::Distinct => "distinct".into(),
        Op::BvAdd => "bvadd".into(),
        Op::BvSub => "bvsub".into(),
        Op::BvMul => "bvmul".into(),
        Op::BvSdiv => "bvsdiv".into(),
        Op::BvSrem => "bvsrem".into(),
        Op::BvNeg => "bvneg".into(),
        Op::BvSlt => "bvslt".into(),
        Op::BvSle => "bvsle".into(),
        Op::Concat => "concat".into(),
        Op::Extract(h, l) => format!("(_ extract {h} {l})"),
        Op::SignExtend(n) => format!("(_ sign_extend {n})"),
        Op::ZeroExtend(n) => format!("(_ zero_extend {n})"),
        Op::Select => "select".into(),
        Op::Store => "store".into(),
        Op::ConstArray => format!("(as const {sort})"),
        Op::StrConcat => "str.++".into(),
        Op::StrLen => "str.len".into(),
        Op::StrFromInt => "str.from_int".into(),
        Op::StrFromCode => "str.from_code".into(),
        Op::Bv2Nat => "bv2nat".into(),
        Op::Int2Bv(w) => format!("(_ int2bv {w})"),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const { name, .. } => write!(f, "{}", symbol(name)),
            Node::Bool(b) => write!(f, "{b}"),
            Node::Bv { width, bits } => {
                if width % 4 == 0 {
                    write!(f, "#x{:0w$x}", bits, w = (*width / 4) as usize)
                } else {
                    write!(f, "#b{:0w$b}", bits, w = *width as usize)
                }
            }
            Node::Int(v) if *v < 0 => write!(f, "(- {})", v.unsigned_abs()),
            Node::Int(v) => write!(f, "{v}"),
            Node::Str(s) => write!(f, "{}", string_literal(s)),
            Node::App { op, args, sort } => {
                write!(f, "({}", op_name(op, sort))?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Term {
    /// Multi-line rendering with one argument per line below the operator,
    /// used for human-readable dumps.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        self.pretty_into(0, &mut out);
        out
    }

    fn pretty_into(&self, indent: usize, out: &mut String) {
        let flat = self.to_string();
        match self.node() {
            Node::App { op, args, sort } if flat.len() + indent > 60 => {
                out.push_str(&format!("({}", op_name(op, sort)));
                for a in args {
                    out.push('\n');
                    out.push_str(&" ".repeat(indent + 1));
                    a.pretty_into(indent + 1, out);
                }
                out.push(')');
            }
            _ => out.push_str(&flat),
        }
    }
}
