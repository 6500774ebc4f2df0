//! Values reported by the solver.

use std::collections::BTreeMap;

use serde::Serialize;

use super::sexp::Sexp;
use super::term::{to_signed, Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "sort", content = "value", rename_all = "snake_case")]
pub enum ModelValue {
    Bool(bool),
    Bv { width: u32, bits: u64 },
    Int(i64),
    Str(String),
}

impl ModelValue {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ModelValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Two's complement value of a bitvector.
    pub fn as_signed(&self) -> Option<i64> {
        match self {
            ModelValue::Bv { width, bits } => Some(to_signed(*bits, *width)),
            ModelValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_unsigned(&self) -> Option<u64> {
        match self {
            ModelValue::Bv { bits, .. } => Some(*bits),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ModelValue::Str(s) => Some(s),
            _ => None,
        }
    }

    /// The value as a literal term.
    pub fn to_term(&self) -> Term {
        match self {
            ModelValue::Bool(b) => Term::bool(*b),
            ModelValue::Bv { width, bits } => Term::bv(*bits as i64, *width),
            ModelValue::Int(v) => Term::int(*v),
            ModelValue::Str(s) => Term::string(s.clone()),
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            ModelValue::Bool(_) => Sort::Bool,
            ModelValue::Bv { width, .. } => Sort::BitVec(*width),
            ModelValue::Int(_) => Sort::Int,
            ModelValue::Str(_) => Sort::String,
        }
    }
}

/// Assignment of solver values to constant names.
pub type Model = BTreeMap<String, ModelValue>;

pub fn parse_value(s: &Sexp) -> Result<ModelValue, String> {
    match s {
        Sexp::Str(text) => Ok(ModelValue::Str(text.clone())),
        Sexp::Atom(a) => {
            if a == "true" || a == "false" {
                return Ok(ModelValue::Bool(a == "true"));
            }
            if let Some(hex) = a.strip_prefix("#x") {
                let bits = u64::from_str_radix(hex, 16).map_err(|e| format!("{a}: {e}"))?;
                return Ok(ModelValue::Bv {
                    width: 4 * hex.len() as u32,
                    bits,
                });
            }
            if let Some(bin) = a.strip_prefix("#b") {
                let bits = u64::from_str_radix(bin, 2).map_err(|e| format!("{a}: {e}"))?;
                return Ok(ModelValue::Bv {
                    width: bin.len() as u32,
                    bits,
                });
            }
            a.parse::<i64>()
                .map(ModelValue::Int)
                .map_err(|_| format!("unsupported value '{a}'"))
        }
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(minus), inner] if minus == "-" => match parse_value(inner)? {
                ModelValue::Int(v) => Ok(ModelValue::Int(-v)),
                _ => Err(format!("unsupported value '{s}'")),
            },
            [Sexp::Atom(us), Sexp::Atom(bv), Sexp::Atom(w)] if us == "_" && bv.starts_with("bv") => {
                let bits: u64 = bv[2..].parse().map_err(|_| format!("bad numeral '{s}'"))?;
                let width: u32 = w.parse().map_err(|_| format!("bad width '{s}'"))?;
                Ok(ModelValue::Bv { width, bits })
            }
            _ => Err(format!("unsupported value '{s}'")),
        },
    }
}
