use super::ast::Span;
use super::FrontendError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Integer literal; `long` when suffixed with `L`.
    Int { value: u64, long: bool },
    Char(u16),
    Str(String),
    /// `@MAIN`, `@REC`.
    Annotation(String),
    Punct(&'static str),
    Eof,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const PUNCTS: &[&str] = &[
    "++", "--", "+=", "-=", "*=", "/=", "%=", "==", "!=", "<=", ">=", "&&", "||", "+", "-", "*",
    "/", "%", "<", ">", "=", "!", "?", ":", ";", ",", ".", "(", ")", "{", "}", "[", "]",
];

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.chars.get(self.pos + n).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span::new(self.line, self.col)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        chars: src.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        _src: src,
    };
    let mut out = Vec::new();
    loop {
        skip_trivia(&mut cur)?;
        let span = cur.span();
        let Some(c) = cur.peek() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            lex_number(&mut cur, span)?
        } else if c == '\'' {
            cur.bump();
            let ch = lex_char_body(&mut cur, '\'', span)?;
            if cur.bump() != Some('\'') {
                return Err(FrontendError::lex(span, "unterminated character literal"));
            }
            let mut units = [0u16; 2];
            let enc = ch.encode_utf16(&mut units);
            if enc.len() != 1 {
                return Err(FrontendError::lex(span, "character literal outside the BMP"));
            }
            Tok::Char(enc[0])
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            loop {
                match cur.peek() {
                    None | Some('\n') => {
                        return Err(FrontendError::lex(span, "unterminated string literal"))
                    }
                    Some('"') => {
                        cur.bump();
                        break;
                    }
                    _ => s.push(lex_char_body(&mut cur, '"', span)?),
                }
            }
            Tok::Str(s)
        } else if c == '@' {
            cur.bump();
            let mut s = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            if s.is_empty() {
                return Err(FrontendError::lex(span, "expected annotation name after '@'"));
            }
            Tok::Annotation(s)
        } else {
            let rest: String = cur.chars[cur.pos..cur.chars.len().min(cur.pos + 2)]
                .iter()
                .collect();
            let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
                return Err(FrontendError::lex(span, format!("unexpected character '{c}'")));
            };
            for _ in 0..p.len() {
                cur.bump();
            }
            Tok::Punct(p)
        };
        out.push(Token { tok, span });
    }
}

fn skip_trivia(cur: &mut Cursor) -> Result<(), FrontendError> {
    loop {
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                cur.bump();
            }
            Some('/') if cur.peek_at(1) == Some('/') => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            Some('/') if cur.peek_at(1) == Some('*') => {
                let span = cur.span();
                cur.bump();
                cur.bump();
                loop {
                    match cur.bump() {
                        None => return Err(FrontendError::lex(span, "unterminated comment")),
                        Some('*') if cur.peek() == Some('/') => {
                            cur.bump();
                            break;
                        }
                        _ => {}
                    }
                }
            }
            _ => return Ok(()),
        }
    }
}

fn lex_number(cur: &mut Cursor, span: Span) -> Result<Tok, FrontendError> {
    let mut digits = String::new();
    let hex = cur.peek() == Some('0') && matches!(cur.peek_at(1), Some('x') | Some('X'));
    if hex {
        cur.bump();
        cur.bump();
    }
    while let Some(c) = cur.peek() {
        if c.is_ascii_hexdigit() && (hex || c.is_ascii_digit()) || c == '_' {
            if c != '_' {
                digits.push(c);
            }
            cur.bump();
        } else {
            break;
        }
    }
    if matches!(cur.peek(), Some('.') ) && cur.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
        return Err(FrontendError::unsupported(span, "floating-point literals"));
    }
    let long = matches!(cur.peek(), Some('L') | Some('l'));
    if long {
        cur.bump();
    }
    if matches!(cur.peek(), Some('f') | Some('F') | Some('d') | Some('D')) {
        return Err(FrontendError::unsupported(span, "floating-point literals"));
    }
    let radix = if hex { 16 } else { 10 };
    let value = u64::from_str_radix(&digits, radix)
        .map_err(|_| FrontendError::lex(span, "malformed integer literal"))?;
    let limit = if long { 1u64 << 63 } else { 1u64 << 31 };
    if !hex && value > limit {
        return Err(FrontendError::lex(span, "integer literal out of range"));
    }
    if hex && value > if long { u64::MAX } else { u32::MAX as u64 } {
        return Err(FrontendError::lex(span, "integer literal out of range"));
    }
    Ok(Tok::Int { value, long })
}

fn lex_char_body(cur: &mut Cursor, quote: char, span: Span) -> Result<char, FrontendError> {
    match cur.bump() {
        None => Err(FrontendError::lex(span, "unterminated literal")),
        Some('\\') => {
            let esc = cur
                .bump()
                .ok_or_else(|| FrontendError::lex(span, "unterminated escape"))?;
            Ok(match esc {
                'n' => '\n',
                't' => '\t',
                'r' => '\r',
                'b' => '\u{8}',
                'f' => '\u{c}',
                '0' => '\0',
                '\\' => '\\',
                '\'' => '\'',
                '"' => '"',
                'u' => {
                    while cur.peek() == Some('u') {
                        cur.bump();
                    }
                    let mut hex = String::new();
                    for _ in 0..4 {
                        hex.push(
                            cur.bump()
                                .ok_or_else(|| FrontendError::lex(span, "short unicode escape"))?,
                        );
                    }
                    let code = u32::from_str_radix(&hex, 16)
                        .map_err(|_| FrontendError::lex(span, "malformed unicode escape"))?;
                    char::from_u32(code)
                        .ok_or_else(|| FrontendError::lex(span, "invalid unicode escape"))?
                }
                other => {
                    return Err(FrontendError::lex(
                        span,
                        format!("unknown escape sequence '\\{other}'"),
                    ))
                }
            })
        }
        Some(c) if c == quote => Err(FrontendError::lex(span, "empty character literal")),
        Some(c) => Ok(c),
    }
}
