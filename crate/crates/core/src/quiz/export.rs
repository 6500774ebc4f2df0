//! Writing question pools as JSON, Moodle GIFT or plain files.

use std::fmt::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{QuestionBundle, QuestionSpec};
use crate::pipeline::PipelineOptions;

/// Identifier of the JSON document layout; bump on incompatible changes.
pub const SCHEMA_ID: &str = "tracegen-quiz/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Gift,
    Plain,
}

impl FromStr for Format {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, ExportError> {
        match s {
            "json" => Ok(Format::Json),
            "gift" => Ok(Format::Gift),
            "plain" => Ok(Format::Plain),
            other => Err(ExportError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExportError {
    #[error("unsupported format '{0}' (expected json, gift or plain)")]
    UnsupportedFormat(String),
    #[error("nothing to export")]
    Empty,
}

/// A file to write, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportFile {
    pub name: String,
    pub contents: String,
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'static str,
    generator: Generator<'a>,
    questions: &'a [QuestionBundle],
}

#[derive(Serialize)]
struct Generator<'a> {
    name: &'static str,
    version: &'static str,
    skeleton: &'a str,
    kind: String,
    seed: u64,
    optimize: bool,
    hole: Option<usize>,
}

pub fn export(
    bundles: &[QuestionBundle],
    format: Format,
    qs: &QuestionSpec,
    opts: &PipelineOptions,
) -> Result<Vec<ExportFile>, ExportError> {
    if bundles.is_empty() {
        return Err(ExportError::Empty);
    }
    Ok(match format {
        Format::Json => {
            let doc = Document {
                schema: SCHEMA_ID,
                generator: Generator {
                    name: "tracegen",
                    version: env!("CARGO_PKG_VERSION"),
                    skeleton: &qs.skeleton,
                    kind: qs.kind.to_string(),
                    seed: qs.seed,
                    optimize: opts.optimize,
                    hole: qs.hole,
                },
                questions: bundles,
            };
            let mut text = serde_json::to_string_pretty(&doc).expect("bundles serialize");
            text.push('\n');
            vec![ExportFile {
                name: "quiz.json".into(),
                contents: text,
            }]
        }
        Format::Gift => vec![ExportFile {
            name: "quiz.gift".into(),
            contents: gift(bundles, qs),
        }],
        Format::Plain => plain(bundles),
    })
}

/// Escape GIFT control characters; newlines become `\n`.
fn gift_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '~' | '=' | '#' | '{' | '}' | ':' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            '\r' => {}
            _ => out.push(c),
        }
    }
    out
}

fn html_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn answer_text(s: &str) -> &str {
    if s.is_empty() {
        "(no output)"
    } else {
        s
    }
}

/// Moodle accepts a fixed list of partial-credit percentages; 100/k for
/// small k is among them when written with five decimals.
fn weight(k: usize) -> String {
    let w = 100.0 / k as f64;
    let s = format!("{w:.5}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn gift(bundles: &[QuestionBundle], qs: &QuestionSpec) -> String {
    let mut out = String::new();
    writeln!(out, "// generated by tracegen from {}", qs.skeleton.replace('\n', " ")).unwrap();
    for (i, b) in bundles.iter().enumerate() {
        out.push('\n');
        let title = format!("{} {}", qs.skeleton, i + 1);
        let text = format!(
            "<p>{}</p><pre>{}</pre>",
            html_escape(&b.prompt),
            html_escape(b.source.trim_end())
        );
        write!(out, "::{}::[html]{}", gift_escape(&title), gift_escape(&text)).unwrap();
        if !b.is_multiple_choice() {
            out.push_str(" {");
            for a in &b.correct {
                write!(out, "={} ", gift_escape(answer_text(a))).unwrap();
            }
            out.push_str("}\n");
            continue;
        }
        let mut options: Vec<(bool, &String)> = b.correct.iter().map(|a| (true, a)).collect();
        options.extend(b.distractors.iter().map(|a| (false, a)));
        let mut rng = ChaCha8Rng::seed_from_u64(qs.seed.wrapping_add(i as u64));
        options.shuffle(&mut rng);
        out.push_str(" {\n");
        let k = b.correct.len();
        for (ok, a) in options {
            let a = gift_escape(answer_text(a));
            match (ok, k) {
                (true, 1) => writeln!(out, "\t={a}"),
                (true, _) => writeln!(out, "\t~%{}%{a}", weight(k)),
                (false, 1) => writeln!(out, "\t~{a}"),
                (false, _) => writeln!(out, "\t~%-100%{a}"),
            }
            .unwrap();
        }
        out.push_str("}\n");
    }
    out
}

fn plain(bundles: &[QuestionBundle]) -> Vec<ExportFile> {
    let mut files = Vec::new();
    let mut key = String::new();
    for (i, b) in bundles.iter().enumerate() {
        let name = format!("instance_{:02}.java", i + 1);
        writeln!(key, "{name}: {}", b.prompt).unwrap();
        for a in &b.correct {
            writeln!(key, "  correct: {}", answer_text(a).replace('\n', "\\n")).unwrap();
        }
        for a in &b.distractors {
            writeln!(key, "  wrong: {}", answer_text(a).replace('\n', "\\n")).unwrap();
        }
        files.push(ExportFile {
            name,
            contents: b.source.clone(),
        });
    }
    files.push(ExportFile {
        name: "answers.txt".into(),
        contents: key,
    });
    files
}
