//! Skeleton front end: lexing, parsing, type checking and printing.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod typecheck;

use std::fmt;

use ast::{SkeletonAst, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrontendErrorKind {
    Lex,
    Syntax,
    Unsupported,
    MisplacedAnnotation,
    TypeMismatch,
    Unresolved,
    UseBeforeAssignment,
    Semantic,
}

impl fmt::Display for FrontendErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrontendErrorKind::Lex => "lexical error",
            FrontendErrorKind::Syntax => "syntax error",
            FrontendErrorKind::Unsupported => "unsupported construct",
            FrontendErrorKind::MisplacedAnnotation => "misplaced annotation",
            FrontendErrorKind::TypeMismatch => "type mismatch",
            FrontendErrorKind::Unresolved => "unresolved identifier",
            FrontendErrorKind::UseBeforeAssignment => "use before assignment",
            FrontendErrorKind::Semantic => "error",
        })
    }
}

/// A diagnostic with its source position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {kind}: {message}")]
pub struct FrontendError {
    pub kind: FrontendErrorKind,
    pub span: Span,
    pub message: String,
}

impl FrontendError {
    pub fn new(kind: FrontendErrorKind, span: Span, message: impl Into<String>) -> Self {
        FrontendError {
            kind,
            span,
            message: message.into(),
        }
    }

    pub fn lex(span: Span, message: impl Into<String>) -> Self {
        Self::new(FrontendErrorKind::Lex, span, message)
    }

    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        Self::new(FrontendErrorKind::Syntax, span, message)
    }

    pub fn unsupported(span: Span, what: impl Into<String>) -> Self {
        Self::new(FrontendErrorKind::Unsupported, span, what)
    }

    pub fn misplaced(span: Span, message: impl Into<String>) -> Self {
        Self::new(FrontendErrorKind::MisplacedAnnotation, span, message)
    }

    pub fn type_error(span: Span, message: impl Into<String>) -> Self {
        Self::new(FrontendErrorKind::TypeMismatch, span, message)
    }

    pub fn unresolved(span: Span, name: &str) -> Self {
        Self::new(FrontendErrorKind::Unresolved, span, format!("cannot find '{name}'"))
    }

    pub fn semantic(span: Span, message: impl Into<String>) -> Self {
        Self::new(FrontendErrorKind::Semantic, span, message)
    }

    /// `file:line:col: kind: message`.
    pub fn with_file(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

/// Parse skeleton source text.
pub fn parse_skeleton(source: &str) -> Result<SkeletonAst, FrontendError> {
    parser::parse(source)
}

/// Resolve names and attach a static type to every expression.
pub fn typecheck(ast: SkeletonAst) -> Result<SkeletonAst, FrontendError> {
    typecheck::check(ast)
}

/// Parse and type check.
pub fn load(source: &str) -> Result<SkeletonAst, FrontendError> {
    typecheck(parse_skeleton(source)?)
}

/// Parse and type check a rendered instance whose entry is `entry`.
pub fn load_instance(source: &str, entry: &str) -> Result<SkeletonAst, FrontendError> {
    typecheck(parser::parse_with_entry(source, Some(entry))?)
}
