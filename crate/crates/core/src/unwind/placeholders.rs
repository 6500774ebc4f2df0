//! Solver constants standing for placeholder values.

use serde::Serialize;

use crate::frontend::ast::{Literal, Placeholder, PlaceholderKind, ValueSpec};
use crate::smt::model::{Model, ModelValue};
use crate::smt::term::*;
use crate::value::Value;

/// Length and element constants of one array row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowVars {
    pub len: String,
    pub elems: Vec<String>,
}

/// Constants encoding one placeholder. Scalars use `value`; arrays use
/// `rows` (one row for 1-D arrays) and 2-D arrays additionally `value` as
/// the outer length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceholderVars {
    pub id: usize,
    pub kind: PlaceholderKind,
    pub value: String,
    pub rows: Vec<RowVars>,
}

pub fn scalar_sort(kind: PlaceholderKind) -> Sort {
    match kind {
        PlaceholderKind::Int => Sort::BitVec(32),
        PlaceholderKind::Char => Sort::BitVec(16),
        PlaceholderKind::Boolean => Sort::Bool,
        PlaceholderKind::String | PlaceholderKind::StringArray => Sort::String,
        PlaceholderKind::IntArray | PlaceholderKind::Int2DArray => Sort::BitVec(32),
    }
}

fn literal_term(lit: &Literal, sort: &Sort) -> Term {
    match lit {
        Literal::Bool(b) => Term::bool(*b),
        Literal::Int(v) => Term::bv(*v, sort.width()),
        Literal::Char(c) => Term::bv(*c as i64, sort.width()),
        Literal::Str(s) => Term::string(s.clone()),
    }
}

/// Membership of `c` in `spec`. Characters compare as unsigned values.
pub fn spec_constraint(c: &Term, spec: &ValueSpec) -> Term {
    let sort = c.sort();
    match spec {
        ValueSpec::Any => Term::bool(true),
        ValueSpec::Range(lo, hi) => {
            let (c, w) = match sort {
                Sort::BitVec(16) => (zero_extend(16, c.clone()), 32),
                Sort::BitVec(w) => (c.clone(), w),
                _ => unreachable!("range over non-integral sort"),
            };
            and2(bvsle(Term::bv(*lo, w), c.clone()), bvsle(c, Term::bv(*hi, w)))
        }
        ValueSpec::List(items) => or(items.iter().map(|l| eq(c.clone(), literal_term(l, &sort))).collect()),
    }
}

impl PlaceholderVars {
    /// Names and sorts of the constants, plus their domain constraints.
    pub fn create(p: &Placeholder) -> (PlaceholderVars, Vec<(String, Sort)>, Vec<Term>) {
        let base = format!("__ph{}", p.id);
        let mut decls = Vec::new();
        let mut cons = Vec::new();
        let mut declare = |name: String, sort: Sort, spec: Option<&ValueSpec>| {
            let t = Term::constant(name.clone(), sort.clone());
            if let Some(s) = spec {
                cons.push(spec_constraint(&t, s));
            }
            decls.push((name.clone(), sort));
            name
        };
        let elem_sort = scalar_sort(p.kind);
        let mut rows = Vec::new();
        let value = match p.kind {
            PlaceholderKind::Int | PlaceholderKind::Char | PlaceholderKind::Boolean | PlaceholderKind::String => {
                declare(base.clone(), elem_sort, Some(&p.values))
            }
            PlaceholderKind::IntArray | PlaceholderKind::StringArray => {
                let len = declare(format!("{base}_len"), Sort::BitVec(32), p.length.as_ref());
                let elems = (0..p.max_length().unwrap_or(0))
                    .map(|i| declare(format!("{base}_{i}"), elem_sort.clone(), Some(&p.values)))
                    .collect();
                rows.push(RowVars {
                    len: len.clone(),
                    elems,
                });
                len
            }
            PlaceholderKind::Int2DArray => {
                let len = declare(format!("{base}_len"), Sort::BitVec(32), p.length.as_ref());
                for r in 0..p.max_length().unwrap_or(0) {
                    let rl = declare(format!("{base}_{r}_len"), Sort::BitVec(32), p.inner_length.as_ref());
                    let elems = (0..p.max_inner_length().unwrap_or(0))
                        .map(|i| declare(format!("{base}_{r}_{i}"), elem_sort.clone(), Some(&p.values)))
                        .collect();
                    rows.push(RowVars { len: rl, elems });
                }
                len
            }
        };
        (
            PlaceholderVars {
                id: p.id,
                kind: p.kind,
                value,
                rows,
            },
            decls,
            cons,
        )
    }

    pub fn is_array(&self) -> bool {
        !matches!(
            self.kind,
            PlaceholderKind::Int | PlaceholderKind::Char | PlaceholderKind::Boolean | PlaceholderKind::String
        )
    }

    /// Every constant whose value is needed to decode the placeholder.
    pub fn constants(&self) -> Vec<String> {
        let mut out = vec![self.value.clone()];
        for (i, r) in self.rows.iter().enumerate() {
            if self.kind == PlaceholderKind::Int2DArray || i > 0 {
                out.push(r.len.clone());
            }
            out.extend(r.elems.iter().cloned());
        }
        out
    }

    /// Rebuild the Java value from solver output.
    pub fn decode(&self, m: &Model) -> Result<Value, String> {
        let get = |n: &str| m.get(n).ok_or_else(|| format!("model lacks a value for {n}"));
        let int = |v: &ModelValue| v.as_signed().ok_or_else(|| format!("expected a bitvector, got {v:?}"));
        let len = |n: &str| -> Result<usize, String> {
            let v = int(get(n)?)?;
            usize::try_from(v).map_err(|_| format!("negative length {v}"))
        };
        Ok(match self.kind {
            PlaceholderKind::Int => Value::Int(int(get(&self.value)?)?),
            PlaceholderKind::Char => Value::Char(get(&self.value)?.as_unsigned().ok_or("bad char")? as u16),
            PlaceholderKind::Boolean => Value::Bool(get(&self.value)?.as_bool().ok_or("bad boolean")?),
            PlaceholderKind::String => Value::Str(get(&self.value)?.as_str().ok_or("bad string")?.to_string()),
            PlaceholderKind::IntArray => {
                let n = len(&self.value)?;
                let row = &self.rows[0];
                let xs = row.elems.iter().take(n).map(|e| int(get(e)?)).collect::<Result<_, _>>()?;
                Value::IntArray(xs)
            }
            PlaceholderKind::StringArray => {
                let n = len(&self.value)?;
                let xs = self.rows[0]
                    .elems
                    .iter()
                    .take(n)
                    .map(|e| Ok(get(e)?.as_str().ok_or("bad string")?.to_string()))
                    .collect::<Result<_, String>>()?;
                Value::StringArray(xs)
            }
            PlaceholderKind::Int2DArray => {
                let n = len(&self.value)?;
                let mut rows = Vec::new();
                for r in self.rows.iter().take(n) {
                    let k = len(&r.len)?;
                    rows.push(r.elems.iter().take(k).map(|e| int(get(e)?)).collect::<Result<_, _>>()?);
                }
                Value::IntArray2D(rows)
            }
        })
    }

    /// Formula stating that the placeholder takes value `v`.
    pub fn equals(&self, v: &Value) -> Term {
        let c = |n: &str, s: Sort| Term::constant(n, s);
        let bv = |n: &str| c(n, Sort::BitVec(32));
        match (self.kind, v) {
            (PlaceholderKind::Int, Value::Int(x)) => eq(bv(&self.value), Term::bv(*x, 32)),
            (PlaceholderKind::Char, Value::Char(x)) => eq(c(&self.value, Sort::BitVec(16)), Term::bv(*x as i64, 16)),
            (PlaceholderKind::Boolean, Value::Bool(b)) => eq(c(&self.value, Sort::Bool), Term::bool(*b)),
            (PlaceholderKind::String, Value::Str(s)) => eq(c(&self.value, Sort::String), Term::string(s.clone())),
            (PlaceholderKind::IntArray, Value::IntArray(xs)) => {
                let mut v = vec![eq(bv(&self.value), Term::bv(xs.len() as i64, 32))];
                for (n, x) in self.rows[0].elems.iter().zip(xs) {
                    v.push(eq(bv(n), Term::bv(*x, 32)));
                }
                and(v)
            }
            (PlaceholderKind::StringArray, Value::StringArray(xs)) => {
                let mut v = vec![eq(bv(&self.value), Term::bv(xs.len() as i64, 32))];
                for (n, x) in self.rows[0].elems.iter().zip(xs) {
                    v.push(eq(c(n, Sort::String), Term::string(x.clone())));
                }
                and(v)
            }
            (PlaceholderKind::Int2DArray, Value::IntArray2D(rows)) => {
                let mut v = vec![eq(bv(&self.value), Term::bv(rows.len() as i64, 32))];
                for (r, xs) in self.rows.iter().zip(rows) {
                    v.push(eq(bv(&r.len), Term::bv(xs.len() as i64, 32)));
                    for (n, x) in r.elems.iter().zip(xs) {
                        v.push(eq(bv(n), Term::bv(*x, 32)));
                    }
                }
                and(v)
            }
            (k, v) => panic!("value {v:?} does not fit a {k:?} placeholder"),
        }
    }
}

/// Clause excluding a valuation of the given placeholders.
pub fn blocking_clause(vars: &[&PlaceholderVars], values: &[&Value]) -> Term {
    not(and(vars.iter().zip(values).map(|(p, v)| p.equals(v)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load;

    #[test]
    fn array_constants_and_decoding() {
        let ast = load("int[] a = INTARRAY(list(2, 3), range(-5, 5));").unwrap();
        let (vars, decls, cons) = PlaceholderVars::create(&ast.placeholders[0]);
        assert_eq!(decls.len(), 4);
        assert_eq!(cons.len(), 4);
        assert_eq!(vars.constants(), ["__ph0_len", "__ph0_0", "__ph0_1", "__ph0_2"]);
        let mut m = Model::new();
        m.insert("__ph0_len".into(), ModelValue::Bv { width: 32, bits: 2 });
        for (i, v) in [4u64, 0xffff_fffe, 1].iter().enumerate() {
            m.insert(format!("__ph0_{i}"), ModelValue::Bv { width: 32, bits: *v });
        }
        let v = vars.decode(&m).unwrap();
        assert_eq!(v, Value::IntArray(vec![4, -2]));
        assert_eq!(
            blocking_clause(&[&vars], &[&v]).to_string(),
            "(not (and (= __ph0_len #x00000002) (= __ph0_0 #x00000004) (= __ph0_1 #xfffffffe)))"
        );
    }

    #[test]
    fn char_ranges_are_unsigned() {
        let c = Term::constant("c", Sort::BitVec(16));
        let t = spec_constraint(&c, &ValueSpec::Range(97, 65535));
        assert!(t.to_string().contains("(_ zero_extend 16)"), "{t}");
    }
}
