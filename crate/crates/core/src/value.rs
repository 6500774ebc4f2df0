//! Concrete placeholder values and their Java literal syntax.

use serde::Serialize;

use crate::frontend::ast::{JType, PlaceholderKind};

/// A value chosen for a placeholder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Bool(bool),
    Int(i64),
    Char(u16),
    Str(String),
    IntArray(Vec<i64>),
    #[serde(rename = "int_array_2d")]
    IntArray2D(Vec<Vec<i64>>),
    StringArray(Vec<String>),
}

impl Value {
    pub fn kind_matches(&self, kind: PlaceholderKind) -> bool {
        matches!(
            (self, kind),
            (Value::Bool(_), PlaceholderKind::Boolean)
                | (Value::Int(_), PlaceholderKind::Int)
                | (Value::Char(_), PlaceholderKind::Char)
                | (Value::Str(_), PlaceholderKind::String)
                | (Value::IntArray(_), PlaceholderKind::IntArray)
                | (Value::IntArray2D(_), PlaceholderKind::Int2DArray)
                | (Value::StringArray(_), PlaceholderKind::StringArray)
        )
    }

    /// Java source text for the value, e.g. `new int[] { 1, 2 }`.
    pub fn to_java(&self) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Int(v) => v.to_string(),
            Value::Char(c) => char_literal(*c),
            Value::Str(s) => string_literal(s),
            Value::IntArray(xs) => array_literal("int[]", xs.iter().map(|x| x.to_string())),
            Value::IntArray2D(rows) => array_literal(
                "int[][]",
                rows.iter().map(|r| brace_list(r.iter().map(|x| x.to_string()))),
            ),
            Value::StringArray(xs) => array_literal("String[]", xs.iter().map(|s| string_literal(s))),
        }
    }

    /// Plain text as `System.out.print` would show it (arrays as lists).
    pub fn display(&self) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Int(v) => v.to_string(),
            Value::Char(c) => char::from_u32(*c as u32).map(String::from).unwrap_or_default(),
            Value::Str(s) => s.clone(),
            Value::IntArray(xs) => format!(
                "[{}]",
                xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
            ),
            Value::IntArray2D(rows) => format!(
                "[{}]",
                rows.iter()
                    .map(|r| Value::IntArray(r.clone()).display())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            Value::StringArray(xs) => format!("[{}]", xs.join(", ")),
        }
    }

    pub fn java_type(&self) -> JType {
        match self {
            Value::Bool(_) => JType::Boolean,
            Value::Int(_) => JType::Int,
            Value::Char(_) => JType::Char,
            Value::Str(_) => JType::String,
            Value::IntArray(_) => JType::IntArray,
            Value::IntArray2D(_) => JType::IntArray2D,
            Value::StringArray(_) => JType::StringArray,
        }
    }
}

fn brace_list(items: impl Iterator<Item = String>) -> String {
    let items: Vec<String> = items.collect();
    if items.is_empty() {
        "{}".into()
    } else {
        format!("{{ {} }}", items.join(", "))
    }
}

fn array_literal(ty: &str, items: impl Iterator<Item = String>) -> String {
    format!("new {ty} {}", brace_list(items))
}

fn escape_unit(c: u16, quote: char, out: &mut String) {
    match char::from_u32(c as u32) {
        Some('\n') => out.push_str("\\n"),
        Some('\t') => out.push_str("\\t"),
        Some('\r') => out.push_str("\\r"),
        Some('\u{8}') => out.push_str("\\b"),
        Some('\u{c}') => out.push_str("\\f"),
        Some('\\') => out.push_str("\\\\"),
        Some(ch) if ch == quote => {
            out.push('\\');
            out.push(ch);
        }
        Some(ch) if (' '..='~').contains(&ch) => out.push(ch),
        _ => out.push_str(&format!("\\u{c:04x}")),
    }
}

/// Java character literal with escapes.
pub fn char_literal(c: u16) -> String {
    let mut s = String::from("'");
    escape_unit(c, '\'', &mut s);
    s.push('\'');
    s
}

/// Java string literal with escapes.
pub fn string_literal(text: &str) -> String {
    let mut s = String::from("\"");
    for unit in text.encode_utf16() {
        escape_unit(unit, '"', &mut s);
    }
    s.push('"');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_rendering() {
        assert_eq!(
            Value::IntArray(vec![23, 8, 43, 67, 59]).to_java(),
            "new int[] { 23, 8, 43, 67, 59 }"
        );
        assert_eq!(Value::IntArray(vec![-1]).to_java(), "new int[] { -1 }");
        assert_eq!(
            Value::IntArray2D(vec![vec![1, 2], vec![]]).to_java(),
            "new int[][] { { 1, 2 }, {} }"
        );
        assert_eq!(
            Value::StringArray(vec!["a\"b".into()]).to_java(),
            "new String[] { \"a\\\"b\" }"
        );
    }

    #[test]
    fn char_escapes() {
        assert_eq!(char_literal('a' as u16), "'a'");
        assert_eq!(char_literal('\'' as u16), "'\\''");
        assert_eq!(char_literal(0xe9), "'\\u00e9'");
        assert_eq!(string_literal("x\ny"), "\"x\\ny\"");
    }
}
