//! Question pools built on top of the generation pipeline.

mod export;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::frontend::ast::{ExprKind, SkeletonAst, StmtKind};
use crate::frontend::printer::print_instance;
use crate::instance::ExecTrace;
use crate::pipeline::{
    generate_hole_pool, generate_pool, two_runs, Candidate, PipelineError, PipelineOptions, Prepared, Shortfall,
};
use crate::value::Value;

pub use export::{export, ExportError, ExportFile, Format, SCHEMA_ID};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionKind {
    /// What does the program print?
    Output,
    /// What does the entry function return?
    ReturnValue,
    /// Which value belongs in place of `??`?
    HoleFill,
    /// For which of these placeholder choices does the property hold?
    WhichFragment,
}

impl fmt::Display for QuestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuestionKind::Output => "output",
            QuestionKind::ReturnValue => "return-value",
            QuestionKind::HoleFill => "hole-fill",
            QuestionKind::WhichFragment => "which-fragment",
        })
    }
}

impl FromStr for QuestionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "output" => QuestionKind::Output,
            "return-value" => QuestionKind::ReturnValue,
            "hole-fill" => QuestionKind::HoleFill,
            "which-fragment" => QuestionKind::WhichFragment,
            other => return Err(format!("unknown question kind '{other}'")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuestionSpec {
    pub kind: QuestionKind,
    /// Name of the skeleton, recorded in exports.
    pub skeleton: String,
    pub n: usize,
    /// Placeholder ordinal of the hole; defaults to the `HOLE(...)` one.
    pub hole: Option<usize>,
    /// Upper limit on wrong answers per question.
    pub distractors: usize,
    /// Seeds the solver and the order of multiple-choice options.
    pub seed: u64,
    /// Replaces the default question text.
    pub prompt: Option<String>,
}

impl QuestionSpec {
    pub fn new(kind: QuestionKind, skeleton: impl Into<String>, n: usize) -> Self {
        QuestionSpec {
            kind,
            skeleton: skeleton.into(),
            n,
            hole: None,
            distractors: 3,
            seed: 0,
            prompt: None,
        }
    }

    fn default_prompt(&self, entry: &str) -> String {
        match self.kind {
            QuestionKind::Output => "What does the following program print?".into(),
            QuestionKind::ReturnValue => format!("What value does {entry}() return?"),
            QuestionKind::HoleFill => {
                "Which value must be inserted instead of ?? so that the program behaves as required?".into()
            }
            QuestionKind::WhichFragment => {
                "For which of the following choices of the missing values does the program behave as required?"
                    .into()
            }
        }
    }
}

/// One interpreter run backing a question.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceRecord {
    pub role: Role,
    pub valuation: BTreeMap<usize, Value>,
    pub rendered_source: String,
    pub trace: ExecTrace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// The program the question shows.
    Shown,
    Correct,
    Wrong,
}

impl InstanceRecord {
    fn new(role: Role, c: &Candidate) -> Self {
        InstanceRecord {
            role,
            valuation: c.bundle.valuation.clone(),
            rendered_source: c.bundle.rendered_source.clone(),
            trace: c.bundle.trace.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuestionBundle {
    pub kind: QuestionKind,
    pub prompt: String,
    /// Program text shown to the student.
    pub source: String,
    pub correct: Vec<String>,
    pub distractors: Vec<String>,
    pub instances: Vec<InstanceRecord>,
}

impl QuestionBundle {
    /// Multiple choice when wrong options exist, short answer otherwise.
    pub fn is_multiple_choice(&self) -> bool {
        !self.distractors.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QuizError {
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("hole-fill questions need a hole: mark a placeholder with HOLE(...) or pass its ordinal")]
    NoHole,
    #[error("the entry function returns nothing")]
    NoReturnValue,
    #[error("the program prints nothing; choose another question kind")]
    NothingPrinted,
    #[error("the skeleton has no placeholders to vary")]
    NoPlaceholders,
    #[error("no instance could be generated: {0}")]
    Empty(String),
}

#[derive(Clone, Debug)]
pub struct PoolOutcome {
    pub bundles: Vec<QuestionBundle>,
    /// Set when fewer than the requested questions were produced.
    pub shortfall: Option<Shortfall>,
    /// Solver models that failed verification and were skipped.
    pub rejected: usize,
    pub transcript: String,
}

/// Generate up to `qs.n` questions. Returns an error when none could be
/// produced; a partial pool carries its shortfall.
pub fn generate(prepared: &Prepared, opts: &PipelineOptions, qs: &QuestionSpec) -> Result<PoolOutcome, QuizError> {
    let ast = &prepared.skeleton;
    let prompt = qs.prompt.clone().unwrap_or_else(|| qs.default_prompt(&ast.entry));
    let out = match qs.kind {
        QuestionKind::Output | QuestionKind::ReturnValue => {
            if qs.kind == QuestionKind::ReturnValue && ast.entry_function().ret.is_none() {
                return Err(QuizError::NoReturnValue);
            }
            let pool = generate_pool(prepared, opts, qs.n)?;
            let bundles = pool
                .instances
                .iter()
                .map(|c| {
                    let t = &c.bundle.trace;
                    let answer = match qs.kind {
                        QuestionKind::Output => t.output.clone(),
                        _ => t.return_value.as_ref().map(Value::display).unwrap_or_default(),
                    };
                    QuestionBundle {
                        kind: qs.kind,
                        prompt: prompt.clone(),
                        source: c.bundle.rendered_source.clone(),
                        correct: vec![answer],
                        distractors: Vec::new(),
                        instances: vec![InstanceRecord::new(Role::Shown, c)],
                    }
                })
                .collect::<Vec<_>>();
            if qs.kind == QuestionKind::Output && !bundles.is_empty() && bundles.iter().all(|b| b.correct[0].is_empty()) {
                return Err(QuizError::NothingPrinted);
            }
            PoolOutcome {
                bundles,
                shortfall: pool.shortfall,
                rejected: pool.rejected.len(),
                transcript: pool.transcript,
            }
        }
        QuestionKind::HoleFill => {
            let hole = crate::pipeline::resolve_hole(ast, qs.hole)?.ok_or(QuizError::NoHole)?;
            let pool = generate_hole_pool(prepared, opts, hole, qs.n, qs.distractors.max(1))?;
            let bundles = pool
                .questions
                .iter()
                .map(|q| {
                    let mut instances = vec![InstanceRecord::new(Role::Shown, &q.instance)];
                    instances.extend(q.correct.iter().map(|c| InstanceRecord::new(Role::Correct, c)));
                    instances.extend(q.wrong.iter().map(|c| InstanceRecord::new(Role::Wrong, c)));
                    QuestionBundle {
                        kind: qs.kind,
                        prompt: prompt.clone(),
                        source: q.instance.bundle.hole_rendered_source.clone().unwrap_or_default(),
                        correct: q.correct_values().iter().map(|v| v.to_java()).collect(),
                        distractors: q.wrong_values().iter().take(qs.distractors).map(|v| v.to_java()).collect(),
                        instances,
                    }
                })
                .collect();
            PoolOutcome {
                bundles,
                shortfall: pool.shortfall,
                rejected: 0,
                transcript: pool.transcript,
            }
        }
        QuestionKind::WhichFragment => which_fragment(prepared, opts, qs, prompt)?,
    };
    if out.bundles.is_empty() {
        let why = out.shortfall.as_ref().map_or("no models".to_string(), |s| s.to_string());
        return Err(QuizError::Empty(why));
    }
    Ok(out)
}

/// Correct options per which-fragment question.
const FRAGMENT_CORRECT: usize = 2;

fn which_fragment(
    prepared: &Prepared,
    opts: &PipelineOptions,
    qs: &QuestionSpec,
    prompt: String,
) -> Result<PoolOutcome, QuizError> {
    let ast = &prepared.skeleton;
    if ast.placeholders.is_empty() {
        return Err(QuizError::NoPlaceholders);
    }
    let keys: Vec<usize> = ast.placeholders.iter().map(|p| p.id).collect();
    let caps = (qs.n * FRAGMENT_CORRECT, qs.n * qs.distractors);
    let (correct, wrong, transcript) = two_runs(prepared, opts, &BTreeMap::new(), &keys, None, caps)?;
    let labels = placeholder_labels(ast);
    let describe = |c: &Candidate| {
        c.bundle
            .valuation
            .iter()
            .map(|(id, v)| format!("{} = {}", labels[id], v.to_java()))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let source = print_instance(ast, &BTreeMap::new(), None);
    let mut bundles = Vec::new();
    let mut wrong_chunks = wrong.chunks(qs.distractors.max(1));
    for chunk in correct.chunks(FRAGMENT_CORRECT) {
        let w = wrong_chunks.next().unwrap_or(&[]);
        let mut instances: Vec<_> = chunk.iter().map(|c| InstanceRecord::new(Role::Correct, c)).collect();
        instances.extend(w.iter().map(|c| InstanceRecord::new(Role::Wrong, c)));
        bundles.push(QuestionBundle {
            kind: qs.kind,
            prompt: prompt.clone(),
            source: source.clone(),
            correct: chunk.iter().map(describe).collect(),
            distractors: w.iter().map(describe).collect(),
            instances,
        });
        if bundles.len() == qs.n {
            break;
        }
    }
    let shortfall = (bundles.len() < qs.n).then_some(Shortfall::Exhausted);
    Ok(PoolOutcome {
        bundles,
        shortfall,
        rejected: 0,
        transcript,
    })
}

/// Variable names for placeholders that directly initialise a declaration,
/// `#k` (1-based, in source order) for the rest.
pub fn placeholder_labels(ast: &SkeletonAst) -> BTreeMap<usize, String> {
    let mut labels: BTreeMap<usize, String> = ast
        .placeholders
        .iter()
        .map(|p| (p.id, format!("#{}", p.id + 1)))
        .collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut named = Vec::new();
    ast.walk_stmts(&mut |s| {
        if let StmtKind::VarDecl {
            name,
            init: Some(e), ..
        } = &s.kind
        {
            if let ExprKind::Placeholder(id) = e.kind {
                *counts.entry(name.clone()).or_default() += 1;
                named.push((id, name.clone()));
            }
        }
    });
    // a name declared twice would be ambiguous
    for (id, name) in named {
        if counts[&name] == 1 {
            labels.insert(id, name);
        }
    }
    labels
}
