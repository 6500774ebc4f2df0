//! End-to-end generation: skeleton to unwound problem, then an enumeration
//! of solver models, each rendered and checked by the reference interpreter.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::frontend::ast::{JType, NodeId, SkeletonAst};
use crate::frontend::{load, FrontendError};
use crate::instance::{
    render_instance, verify_instance, verify_negated, Expectation, InstanceBundle, InterpConfig, RenderError,
    Verdict,
};
use crate::normalize::normalize;
use crate::optimize::{optimize, OptimizeReport};
use crate::smt::term::{bvadd, select, symbol, Term};
use crate::smt::{emit_problem, CheckResult, EmitError, Model, ModelValue, Session, SolverConfig, SolverError};
use crate::unwind::{
    blocking_clause, default_target, unwind, BranchEncoding, HeapKind, PlaceholderVars, TargetMode, UnwindError,
    UnwindOptions, UnwindSpec,
};
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineOptions {
    /// Run the optimizer and constant propagation before solving.
    pub optimize: bool,
    pub encoding: BranchEncoding,
    pub solver: SolverConfig,
    pub interp: InterpConfig,
    /// Rejected models tolerated per enumeration before it gives up.
    pub max_rejections: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            optimize: true,
            encoding: BranchEncoding::default(),
            solver: SolverConfig {
                path: crate::smt::solver::default_solver_path(),
                ..SolverConfig::default()
            },
            interp: InterpConfig::default(),
            max_rejections: 20,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Unwind(#[from] UnwindError),
    #[error(transparent)]
    Emit(#[from] EmitError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot decode model: {0}")]
    Decode(String),
    #[error("no placeholder with ordinal {0}")]
    NoSuchPlaceholder(usize),
    #[error("the skeleton has no ASSERT to use as the target")]
    NoTarget,
}

/// A skeleton taken through every stage before solving.
#[derive(Clone, Debug)]
pub struct Prepared {
    /// The skeleton as parsed; rendering and verification use this.
    pub skeleton: SkeletonAst,
    pub normalized: SkeletonAst,
    /// The tree that was unwound (optimized or normalized).
    pub unwound: SkeletonAst,
    pub report: Option<OptimizeReport>,
    /// The last top-level `ASSERT` of the entry function.
    pub target: Option<NodeId>,
    pub spec: UnwindSpec,
}

pub fn prepare_source(source: &str, opts: &PipelineOptions) -> Result<Prepared, PipelineError> {
    prepare(load(source)?, opts)
}

pub fn prepare(skeleton: SkeletonAst, opts: &PipelineOptions) -> Result<Prepared, PipelineError> {
    let normalized = normalize(&skeleton);
    let (unwound, report) = if opts.optimize {
        let (a, r) = optimize(&normalized);
        (a, Some(r))
    } else {
        (normalized.clone(), None)
    };
    let target = default_target(&skeleton);
    let spec = unwind(
        &unwound,
        &UnwindOptions {
            propagate: opts.optimize,
            encoding: opts.encoding,
            capabilities: opts.solver.capabilities,
            target,
        },
    )?;
    Ok(Prepared {
        skeleton,
        normalized,
        unwound,
        report,
        target,
        spec,
    })
}

impl Prepared {
    /// SMT-LIB text of the problem, ending in `check-sat`.
    pub fn smt(&self, mode: TargetMode, cfg: &SolverConfig) -> Result<String, EmitError> {
        let mut text = emit_problem(&self.spec.problem(mode), cfg)?;
        text.push_str("(check-sat)\n");
        Ok(text)
    }

    fn vars(&self, id: usize) -> Result<&PlaceholderVars, PipelineError> {
        self.spec
            .placeholders
            .iter()
            .find(|p| p.id == id)
            .ok_or(PipelineError::NoSuchPlaceholder(id))
    }

    /// Whether the final output and return value are fixed by the run.
    /// Invariant loops leave variables unconstrained, so values computed
    /// after them are only known from the interpreter.
    fn determined(&self) -> bool {
        self.spec.havocked.is_empty()
    }
}

/// One model that was rendered and checked.
#[derive(Clone, Debug, Serialize)]
pub struct Candidate {
    pub bundle: InstanceBundle,
    pub expectation: Expectation,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub enum Next {
    Accepted(Box<Candidate>),
    /// No further models exist.
    Exhausted,
    Unknown(String),
    /// Too many models failed verification.
    GaveUp,
}

/// Enumerates distinct models of a prepared skeleton over one solver
/// session, blocking each model's values on the key placeholders.
pub struct Enumerator<'p> {
    prepared: &'p Prepared,
    opts: &'p PipelineOptions,
    session: Session,
    mode: TargetMode,
    keys: Vec<usize>,
    hole: Option<usize>,
    /// Models that failed verification, with the reason.
    pub rejected: Vec<Candidate>,
}

impl<'p> Enumerator<'p> {
    /// Start a session for `mode`. `fixed` pins placeholders to values;
    /// `keys` are the placeholders a blocking clause ranges over.
    pub fn start(
        prepared: &'p Prepared,
        opts: &'p PipelineOptions,
        mode: TargetMode,
        fixed: &BTreeMap<usize, Value>,
        keys: Vec<usize>,
        hole: Option<usize>,
    ) -> Result<Self, PipelineError> {
        if mode == TargetMode::Negate && prepared.target.is_none() {
            return Err(PipelineError::NoTarget);
        }
        let mut session = Session::start(&opts.solver)?;
        session.send(&emit_problem(&prepared.spec.problem(mode), &opts.solver)?)?;
        for (id, v) in fixed {
            session.send(&format!("(assert {})", prepared.vars(*id)?.equals(v)))?;
        }
        Ok(Enumerator {
            prepared,
            opts,
            session,
            mode,
            keys,
            hole,
            rejected: Vec::new(),
        })
    }

    /// Everything sent to the solver so far.
    pub fn transcript(&self) -> &str {
        self.session.transcript()
    }

    pub fn next_candidate(&mut self) -> Result<Next, PipelineError> {
        loop {
            match self.session.check_sat()? {
                CheckResult::Sat => {}
                CheckResult::Unsat => return Ok(Next::Exhausted),
                CheckResult::Unknown(r) => return Ok(Next::Unknown(r)),
            }
            let valuation = self.valuation()?;
            let expectation = self.expectation()?;
            let keys: Vec<&PlaceholderVars> = self
                .keys
                .iter()
                .map(|k| self.prepared.vars(*k))
                .collect::<Result<_, _>>()?;
            let key_values: Vec<&Value> = self.keys.iter().map(|k| &valuation[k]).collect();
            self.session
                .send(&format!("(assert {})", blocking_clause(&keys, &key_values)))?;

            let ast = &self.prepared.skeleton;
            let bundle = render_instance(ast, &valuation, self.hole, &self.opts.interp)?;
            let verdict = match (self.mode, self.prepared.target) {
                (TargetMode::Negate, Some(t)) => verify_negated(ast, &bundle, &expectation, t, &self.opts.interp),
                _ => verify_instance(ast, &bundle, &expectation, &self.opts.interp),
            };
            let c = Candidate {
                bundle,
                expectation,
                verdict,
            };
            if c.verdict.is_accepted() {
                return Ok(Next::Accepted(Box::new(c)));
            }
            log::warn!("model rejected: {:?}", c.verdict);
            self.rejected.push(c);
            if self.rejected.len() >= self.opts.max_rejections {
                return Ok(Next::GaveUp);
            }
        }
    }

    fn values(&mut self, names: &[String]) -> Result<Model, PipelineError> {
        let quoted: Vec<String> = names.iter().map(|n| symbol(n)).collect();
        let vals = self.session.get_values(&quoted)?;
        Ok(names.iter().cloned().zip(vals).collect())
    }

    fn valuation(&mut self) -> Result<BTreeMap<usize, Value>, PipelineError> {
        let names: Vec<String> = self.prepared.spec.placeholders.iter().flat_map(|p| p.constants()).collect();
        let model = self.values(&names)?;
        self.prepared
            .spec
            .placeholders
            .iter()
            .map(|p| Ok((p.id, p.decode(&model).map_err(PipelineError::Decode)?)))
            .collect()
    }

    fn expectation(&mut self) -> Result<Expectation, PipelineError> {
        let spec = &self.prepared.spec;
        if !self.prepared.determined() {
            return Ok(Expectation::default());
        }
        let out = self.term_values(std::slice::from_ref(&spec.out_constant))?;
        let output = Some(out[0].as_str().ok_or_else(|| PipelineError::Decode("output is not a string".into()))?.to_string());
        let return_value = match (&spec.return_value, spec.return_type) {
            (Some(t), Some(ty)) => Some(self.read_value(t.clone(), ty)?),
            _ => None,
        };
        Ok(Expectation { output, return_value })
    }

    fn term_values(&mut self, terms: &[Term]) -> Result<Vec<ModelValue>, PipelineError> {
        let text: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
        Ok(self.session.get_values(&text)?)
    }

    fn final_heap(&self, k: HeapKind) -> Result<Term, PipelineError> {
        self.prepared
            .spec
            .final_heaps
            .iter()
            .find(|(h, _)| *h == k)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| PipelineError::Decode(format!("no heap for {k:?}")))
    }

    /// Elements of the array with handle value `handle` in heap `k`.
    fn read_extent(&mut self, k: HeapKind, handle: &ModelValue) -> Result<Vec<ModelValue>, PipelineError> {
        let bits = handle
            .as_unsigned()
            .ok_or_else(|| PipelineError::Decode(format!("bad array handle {handle:?}")))?;
        let (base, len) = ((bits >> 32) as i64, (bits & 0xffff_ffff) as i64);
        let heap = self.final_heap(k)?;
        let cells: Vec<Term> = (0..len)
            .map(|i| select(heap.clone(), bvadd(Term::bv(base, 32), Term::bv(i, 32))))
            .collect();
        self.term_values(&cells)
    }

    fn read_value(&mut self, t: Term, ty: JType) -> Result<Value, PipelineError> {
        let v = self.term_values(&[t])?.remove(0);
        let bad = |v: &ModelValue| PipelineError::Decode(format!("{v:?} is not a {ty}"));
        let int = |v: &ModelValue| v.as_signed().ok_or_else(|| bad(v));
        Ok(match ty {
            JType::Boolean => Value::Bool(v.as_bool().ok_or_else(|| bad(&v))?),
            JType::Char => Value::Char(v.as_unsigned().ok_or_else(|| bad(&v))? as u16),
            JType::Byte | JType::Short | JType::Int | JType::Long => Value::Int(int(&v)?),
            JType::String => Value::Str(v.as_str().ok_or_else(|| bad(&v))?.to_string()),
            JType::IntArray => Value::IntArray(
                self.read_extent(HeapKind::Int, &v)?
                    .iter()
                    .map(int)
                    .collect::<Result<_, _>>()?,
            ),
            JType::StringArray => Value::StringArray(
                self.read_extent(HeapKind::Str, &v)?
                    .iter()
                    .map(|s| s.as_str().map(str::to_string).ok_or_else(|| bad(s)))
                    .collect::<Result<_, _>>()?,
            ),
            JType::IntArray2D => {
                let mut rows = Vec::new();
                for r in self.read_extent(HeapKind::Rows, &v)? {
                    rows.push(
                        self.read_extent(HeapKind::Int, &r)?
                            .iter()
                            .map(int)
                            .collect::<Result<_, _>>()?,
                    );
                }
                Value::IntArray2D(rows)
            }
        })
    }
}

/// Why enumeration stopped before the requested count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", content = "detail", rename_all = "snake_case")]
pub enum Shortfall {
    Exhausted,
    Unknown(String),
    TooManyRejections,
}

impl std::fmt::Display for Shortfall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shortfall::Exhausted => write!(f, "no further models exist"),
            Shortfall::Unknown(r) => write!(f, "solver gave up: {r}"),
            Shortfall::TooManyRejections => write!(f, "too many models failed verification"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Pool {
    pub instances: Vec<Candidate>,
    pub rejected: Vec<Candidate>,
    pub shortfall: Option<Shortfall>,
    pub transcript: String,
}

/// Up to `n` verified instances with pairwise distinct placeholder values.
pub fn generate_pool(prepared: &Prepared, opts: &PipelineOptions, n: usize) -> Result<Pool, PipelineError> {
    let keys = prepared.skeleton.placeholders.iter().map(|p| p.id).collect();
    let mut e = Enumerator::start(prepared, opts, TargetMode::Require, &BTreeMap::new(), keys, None)?;
    let (instances, shortfall) = collect(&mut e, n)?;
    Ok(Pool {
        instances,
        shortfall,
        transcript: e.transcript().to_string(),
        rejected: e.rejected,
    })
}

fn collect(e: &mut Enumerator<'_>, n: usize) -> Result<(Vec<Candidate>, Option<Shortfall>), PipelineError> {
    let mut out = Vec::new();
    while out.len() < n {
        match e.next_candidate()? {
            Next::Accepted(c) => out.push(*c),
            Next::Exhausted => return Ok((out, Some(Shortfall::Exhausted))),
            Next::Unknown(r) => return Ok((out, Some(Shortfall::Unknown(r)))),
            Next::GaveUp => return Ok((out, Some(Shortfall::TooManyRejections))),
        }
    }
    Ok((out, None))
}

/// A hole question built around one instance: the other placeholders keep
/// the instance's values while the hole varies.
#[derive(Clone, Debug, Serialize)]
pub struct HoleQuestion {
    pub hole: usize,
    pub instance: Candidate,
    /// Runs for hole values under which every assertion holds.
    pub correct: Vec<Candidate>,
    /// Runs for hole values under which the target fails and all other
    /// assertions hold.
    pub wrong: Vec<Candidate>,
}

impl HoleQuestion {
    pub fn correct_values(&self) -> Vec<&Value> {
        self.correct.iter().map(|c| &c.bundle.valuation[&self.hole]).collect()
    }

    pub fn wrong_values(&self) -> Vec<&Value> {
        self.wrong.iter().map(|c| &c.bundle.valuation[&self.hole]).collect()
    }
}

#[derive(Clone, Debug)]
pub struct HolePool {
    pub questions: Vec<HoleQuestion>,
    pub shortfall: Option<Shortfall>,
    pub transcript: String,
}

/// Runs with the target kept and with it negated, each with `fixed`
/// pinned and blocking on `keys`. Every run is confirmed by the interpreter.
pub fn two_runs(
    prepared: &Prepared,
    opts: &PipelineOptions,
    fixed: &BTreeMap<usize, Value>,
    keys: &[usize],
    hole: Option<usize>,
    caps: (usize, usize),
) -> Result<(Vec<Candidate>, Vec<Candidate>, String), PipelineError> {
    let mut transcript = String::new();
    let mut sets = Vec::new();
    for (mode, cap) in [(TargetMode::Require, caps.0), (TargetMode::Negate, caps.1)] {
        let mut e = Enumerator::start(prepared, opts, mode, fixed, keys.to_vec(), hole)?;
        let (found, _) = collect(&mut e, cap)?;
        transcript.push_str(e.transcript());
        sets.push(found);
    }
    let wrong = sets.pop().unwrap_or_default();
    let correct = sets.pop().unwrap_or_default();
    Ok((correct, wrong, transcript))
}

/// Correct and wrong hole values for the instance `base`: the first run
/// keeps the target, the second negates it.
pub fn hole_answers(
    prepared: &Prepared,
    opts: &PipelineOptions,
    base: &BTreeMap<usize, Value>,
    hole: usize,
    cap: usize,
) -> Result<(Vec<Candidate>, Vec<Candidate>, String), PipelineError> {
    prepared.vars(hole)?;
    let mut fixed = base.clone();
    fixed.remove(&hole);
    let (correct, wrong, transcript) = two_runs(prepared, opts, &fixed, &[hole], Some(hole), (cap, cap))?;
    // the program is deterministic, so a value cannot land in both sets
    debug_assert!(correct
        .iter()
        .all(|c| wrong.iter().all(|w| w.bundle.valuation[&hole] != c.bundle.valuation[&hole])));
    Ok((correct, wrong, transcript))
}

/// Up to `n` hole questions. Each base instance differs from the previous
/// ones outside the hole. Bases without wrong answers are skipped while
/// `max_rejections` allows, since they make poor multiple-choice items.
pub fn generate_hole_pool(
    prepared: &Prepared,
    opts: &PipelineOptions,
    hole: usize,
    n: usize,
    cap: usize,
) -> Result<HolePool, PipelineError> {
    if prepared.target.is_none() {
        return Err(PipelineError::NoTarget);
    }
    prepared.vars(hole)?;
    let keys: Vec<usize> = prepared
        .skeleton
        .placeholders
        .iter()
        .map(|p| p.id)
        .filter(|id| *id != hole)
        .collect();
    let mut e = Enumerator::start(prepared, opts, TargetMode::Require, &BTreeMap::new(), keys, Some(hole))?;
    let mut questions = Vec::new();
    let mut fallback = Vec::new();
    let mut transcript = String::new();
    let shortfall = loop {
        if questions.len() >= n {
            break None;
        }
        let base = match e.next_candidate()? {
            Next::Accepted(c) => *c,
            Next::Exhausted => break Some(Shortfall::Exhausted),
            Next::Unknown(r) => break Some(Shortfall::Unknown(r)),
            Next::GaveUp => break Some(Shortfall::TooManyRejections),
        };
        let (correct, wrong, t) = hole_answers(prepared, opts, &base.bundle.valuation, hole, cap)?;
        transcript.push_str(&t);
        let q = HoleQuestion {
            hole,
            instance: base,
            correct,
            wrong,
        };
        if q.correct.is_empty() {
            continue;
        }
        if q.wrong.is_empty() && fallback.len() < opts.max_rejections {
            fallback.push(q);
            continue;
        }
        questions.push(q);
    };
    // fill up with questions that lack wrong answers rather than fail
    let missing = n.saturating_sub(questions.len());
    questions.extend(fallback.into_iter().take(missing));
    let shortfall = if questions.len() >= n { None } else { shortfall };
    transcript.insert_str(0, e.transcript());
    Ok(HolePool {
        questions,
        shortfall,
        transcript,
    })
}

/// Placeholder ordinal of the hole: the explicit choice, or the one marked
/// `HOLE(...)` in the skeleton.
pub fn resolve_hole(ast: &SkeletonAst, explicit: Option<usize>) -> Result<Option<usize>, PipelineError> {
    match explicit {
        Some(i) if i < ast.placeholders.len() => Ok(Some(i)),
        Some(i) => Err(PipelineError::NoSuchPlaceholder(i)),
        None => Ok(ast.hole().map(|p| p.id)),
    }
}

/// Satisfiability of the prepared problem, for checks that need no model.
pub fn check(prepared: &Prepared, opts: &PipelineOptions) -> Result<CheckResult, PipelineError> {
    let mut s = Session::start(&opts.solver)?;
    s.send(&emit_problem(&prepared.spec.problem(TargetMode::Require), &opts.solver)?)?;
    Ok(s.check_sat()?)
}
