//! S-expression reader for solver responses.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    /// Symbol or numeral; quoted symbols are stored without the bars.
    Atom(String),
    /// String literal, already unescaped.
    Str(String),
    List(Vec<Sexp>),
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => write!(f, "{a}"),
            Sexp::Str(s) => write!(f, "{}", super::term::string_literal(s)),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            _ => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            _ => None,
        }
    }
}

/// Parse every complete expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    loop {
        skip_ws(&chars, &mut pos);
        if pos >= chars.len() {
            return Ok(out);
        }
        out.push(parse_one(&chars, &mut pos)?);
    }
}

/// Whether `text` holds at least one complete expression (balanced
/// parentheses outside of string literals and quoted symbols).
pub fn is_complete(text: &str) -> bool {
    let mut depth = 0i64;
    let mut in_str = false;
    let mut in_bar = false;
    let mut seen = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if in_str {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                } else {
                    in_str = false;
                }
            }
            continue;
        }
        if in_bar {
            in_bar = c != '|';
            continue;
        }
        match c {
            '"' => in_str = true,
            '|' => in_bar = true,
            '(' => {
                depth += 1;
                seen = true;
            }
            ')' => depth -= 1,
            c if !c.is_whitespace() => seen = true,
            _ => {}
        }
    }
    seen && depth == 0 && !in_str && !in_bar
}

fn skip_ws(chars: &[char], pos: &mut usize) {
    while *pos < chars.len() {
        if chars[*pos].is_whitespace() {
            *pos += 1;
        } else if chars[*pos] == ';' {
            while *pos < chars.len() && chars[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
}

fn parse_one(chars: &[char], pos: &mut usize) -> Result<Sexp, String> {
    skip_ws(chars, pos);
    let Some(&c) = chars.get(*pos) else {
        return Err("unexpected end of input".into());
    };
    match c {
        '(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(chars, pos);
                match chars.get(*pos) {
                    None => return Err("unbalanced parenthesis".into()),
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_one(chars, pos)?),
                }
            }
        }
        ')' => Err("unexpected ')'".into()),
        '"' => {
            *pos += 1;
            let mut raw = String::new();
            loop {
                match chars.get(*pos) {
                    None => return Err("unterminated string literal".into()),
                    Some('"') if chars.get(*pos + 1) == Some(&'"') => {
                        raw.push('"');
                        *pos += 2;
                    }
                    Some('"') => {
                        *pos += 1;
                        break;
                    }
                    Some(&ch) => {
                        raw.push(ch);
                        *pos += 1;
                    }
                }
            }
            Ok(Sexp::Str(unescape(&raw)))
        }
        '|' => {
            *pos += 1;
            let start = *pos;
            while *pos < chars.len() && chars[*pos] != '|' {
                *pos += 1;
            }
            if *pos >= chars.len() {
                return Err("unterminated quoted symbol".into());
            }
            let s: String = chars[start..*pos].iter().collect();
            *pos += 1;
            Ok(Sexp::Atom(s))
        }
        _ => {
            let start = *pos;
            while *pos < chars.len()
                && !chars[*pos].is_whitespace()
                && !matches!(chars[*pos], '(' | ')' | '"' | '|' | ';')
            {
                *pos += 1;
            }
            Ok(Sexp::Atom(chars[start..*pos].iter().collect()))
        }
    }
}

/// Resolve `\u{h..}` and `\uhhhh` escapes of SMT-LIB string literals.
fn unescape(raw: &str) -> String {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '\\' && chars.get(i + 1) == Some(&'u') {
            if chars.get(i + 2) == Some(&'{') {
                if let Some(end) = chars[i + 3..].iter().position(|&c| c == '}') {
                    let hex: String = chars[i + 3..i + 3 + end].iter().collect();
                    if let Some(c) = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                        out.push(c);
                        i += 4 + end;
                        continue;
                    }
                }
            } else if i + 6 <= chars.len() {
                let hex: String = chars[i + 2..i + 6].iter().collect();
                if let Some(c) = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                    out.push(c);
                    i += 6;
                    continue;
                }
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn get_value_response() {
        let text = "((|x@0@0| #xfffffffd)\n (s \"a\"\"b\\u{e9}-3\")\n ((select h #x00000004) #x00000000))";
        assert!(is_complete(text));
        assert!(!is_complete("((|x@0@0| #xff"));
        let v = parse_all(text).unwrap();
        let pairs = v[0].list().unwrap();
        assert_eq!(pairs[0].list().unwrap()[0], Sexp::Atom("x@0@0".into()));
        assert_eq!(pairs[1].list().unwrap()[1], Sexp::Str("a\"bé-3".into()));
        assert_eq!(pairs[2].list().unwrap()[0].to_string(), "(select h #x00000004)");
    }

    #[test]
    fn string_escapes_round_trip() {
        for s in ["", "plain", "q\"uote", "back\\slash", "\u{1}\n\t", "ü€"] {
            let lit = crate::smt::term::string_literal(s);
            assert_eq!(parse_all(&lit).unwrap(), vec![Sexp::Str(s.to_string())]);
        }
    }
}
