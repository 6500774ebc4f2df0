//! Random tiny skeletons and a brute-force oracle over their placeholders.
#![allow(dead_code)]

pub mod arith;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracegen_core::frontend::load;
use tracegen_core::instance::{render_instance, verify_instance, Expectation, InterpConfig};
use tracegen_core::pipeline::{check, generate_pool, prepare, PipelineOptions};
use tracegen_core::smt::CheckResult;
use tracegen_core::value::Value;

/// Values one placeholder can take.
#[derive(Clone, Debug)]
pub enum Domain {
    Int(i64, i64),
    Bool,
    Array { len: usize, lo: i64, hi: i64 },
}

impl Domain {
    fn values(&self) -> Vec<Value> {
        match *self {
            Domain::Int(lo, hi) => (lo..=hi).map(Value::Int).collect(),
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Array { len, lo, hi } => {
                let mut out = vec![Vec::new()];
                for _ in 0..len {
                    out = out
                        .into_iter()
                        .flat_map(|v: Vec<i64>| {
                            (lo..=hi).map(move |x| {
                                let mut v = v.clone();
                                v.push(x);
                                v
                            })
                        })
                        .collect();
                }
                out.into_iter().map(Value::IntArray).collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Case {
    pub source: String,
    /// In placeholder order.
    pub domains: Vec<Domain>,
}

struct Gen {
    rng: ChaCha8Rng,
    ints: Vec<String>,
    fresh: usize,
    helper: Option<&'static str>,
}

const OPS: [&str; 5] = ["+", "-", "*", "/", "%"];
const CMPS: [&str; 6] = ["<", "<=", ">", ">=", "==", "!="];

impl Gen {
    fn leaf(&mut self) -> String {
        if self.rng.gen_bool(0.7) {
            self.ints.choose(&mut self.rng).unwrap().clone()
        } else {
            self.rng.gen_range(-3..=3).to_string()
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return self.leaf();
        }
        if let Some(h) = self.helper {
            if self.rng.gen_bool(0.15) {
                return match h {
                    "rec" => format!("sum({})", self.leaf()),
                    _ => format!("mix({}, {})", self.leaf(), self.leaf()),
                };
            }
        }
        let op = OPS.choose(&mut self.rng).unwrap();
        let (a, b) = (self.expr(depth - 1), self.expr(depth - 1));
        format!("({a} {op} {b})")
    }

    fn cond(&mut self, bools: &[String]) -> String {
        let cmp = CMPS.choose(&mut self.rng).unwrap();
        let shape = self.rng.gen_range(0..4);
        let short_circuit = shape < 2 && !bools.is_empty();
        // calls may not sit on the right of && or ||
        let helper = self.helper;
        if short_circuit {
            self.helper = None;
        }
        let c = format!("{} {cmp} {}", self.expr(1), self.expr(1));
        self.helper = helper;
        match (shape, bools.first()) {
            (0, Some(q)) => format!("{q} && {c}"),
            (1, Some(q)) => format!("!{q} || {c}"),
            (2, _) => format!("!({c})"),
            _ => c,
        }
    }

    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }
}

/// A skeleton with at most two functions, placeholder ranges of width at
/// most 4, loop bounds at most 3 and arrays of at most 3 elements.
pub fn tiny_skeleton(seed: u64) -> Case {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        ints: Vec::new(),
        fresh: 0,
        helper: None,
    };
    let mut domains = Vec::new();
    let mut body = Vec::new();
    for k in 0..g.rng.gen_range(1..=3) {
        let lo = g.rng.gen_range(-4..=4);
        let hi = lo + g.rng.gen_range(0..=3);
        body.push(format!("int p{k} = INT(range({lo}, {hi}));"));
        domains.push(Domain::Int(lo, hi));
        g.ints.push(format!("p{k}"));
    }
    let mut bools = Vec::new();
    if g.rng.gen_bool(0.3) {
        body.push("boolean q = BOOLEAN();".into());
        domains.push(Domain::Bool);
        bools.push("q".to_string());
    }
    let array = g.rng.gen_bool(0.3).then(|| {
        let len = g.rng.gen_range(1..=3);
        let lo = g.rng.gen_range(-2..=2);
        let hi = lo + g.rng.gen_range(0..=1);
        body.push(format!("int[] arr = INTARRAY(list({len}), range({lo}, {hi}));"));
        domains.push(Domain::Array { len, lo, hi });
    });
    let helper_src = match g.rng.gen_range(0..4) {
        0 => {
            g.helper = Some("rec");
            Some("@REC(2)\nstatic int sum(int n) {\n  if (n <= 0) return 0;\n  return n + sum(n - 1);\n}\n")
        }
        1 => {
            g.helper = Some("mix");
            Some("static int mix(int a, int b) {\n  if (a < b) return b - a;\n  return a * 2 + b;\n}\n")
        }
        _ => None,
    };
    for _ in 0..g.rng.gen_range(1..=4) {
        match g.rng.gen_range(0..5) {
            0 | 1 => {
                let v = g.var();
                let e = g.expr(2);
                body.push(format!("int {v} = {e};"));
                g.ints.push(v);
            }
            2 => {
                let v = g.var();
                let c = g.cond(&bools);
                let (a, b) = (g.expr(1), g.expr(1));
                body.push(format!("int {v} = 0;\nif ({c}) {{\n  {v} = {a};\n}} else {{\n  {v} = {b};\n}}"));
                g.ints.push(v);
            }
            3 => {
                let (acc, i) = (g.var(), g.var());
                let limit = g.leaf();
                let bound = g.rng.gen_range(1..=3);
                let step = g.expr(1);
                body.push(format!(
                    "int {acc} = 0;\nint {i} = 0;\nLOOP(range(0, {bound}));\nwhile ({i} < {limit}) {{\n  {acc} = {acc} + {step};\n  {i}++;\n}}"
                ));
                g.ints.push(acc);
            }
            _ if array.is_some() => {
                let acc = g.var();
                let j = g.var();
                body.push(format!(
                    "int {acc} = 0;\nLOOP(range(0, 3));\nfor (int {j} = 0; {j} < arr.length; {j}++) {{\n  if (arr[{j}] > {acc}) {acc} = arr[{j}];\n}}"
                ));
                g.ints.push(acc);
            }
            _ => {
                let c = g.cond(&bools);
                body.push(format!("ASSERT({c});"));
            }
        }
    }
    let c = g.cond(&bools);
    body.push(format!("ASSERT({c});"));
    let body = body.join("\n");
    let source = match helper_src {
        Some(h) => {
            let indented: Vec<String> = body.lines().map(|l| format!("  {l}")).collect();
            format!("@MAIN\nstatic void start() {{\n{}\n}}\n\n{h}", indented.join("\n"))
        }
        None => body,
    };
    Case { source, domains }
}

/// Every combination of placeholder values, in order.
pub fn assignments(domains: &[Domain]) -> Vec<BTreeMap<usize, Value>> {
    let mut out = vec![BTreeMap::new()];
    for (id, d) in domains.iter().enumerate() {
        let vals = d.values();
        out = out
            .into_iter()
            .flat_map(|m| {
                vals.iter().map(move |v| {
                    let mut m = m.clone();
                    m.insert(id, v.clone());
                    m
                })
            })
            .collect();
    }
    out
}

#[derive(Debug, PartialEq, Eq)]
pub enum Mismatch {
    /// Brute force found a valid assignment the solver missed, or the reverse.
    Satisfiability { solver: String, witness: Option<BTreeMap<usize, Value>> },
    /// A solver model failed interpreter verification.
    Rejected(String),
}

/// Compare the solver against exhaustive interpretation. `None` on agreement.
pub fn compare(case: &Case, optimize: bool) -> Option<Mismatch> {
    let ast = load(&case.source).unwrap_or_else(|e| panic!("{e}\n{}", case.source));
    assert_eq!(ast.placeholders.len(), case.domains.len(), "{}", case.source);
    let cfg = InterpConfig::default();
    let witness = assignments(&case.domains).into_iter().find(|vals| {
        let b = render_instance(&ast, vals, None, &cfg).unwrap();
        verify_instance(&ast, &b, &Expectation::default(), &cfg).is_accepted()
    });
    let opts = PipelineOptions {
        optimize,
        max_rejections: 0,
        ..PipelineOptions::default()
    };
    let p = prepare(ast, &opts).unwrap_or_else(|e| panic!("{e}\n{}", case.source));
    let status = check(&p, &opts).unwrap();
    let agree = match status {
        CheckResult::Sat => witness.is_some(),
        CheckResult::Unsat => witness.is_none(),
        CheckResult::Unknown(_) => false,
    };
    if !agree {
        return Some(Mismatch::Satisfiability {
            solver: format!("{status:?}"),
            witness,
        });
    }
    if status == CheckResult::Sat {
        let pool = generate_pool(&p, &opts, 1).unwrap();
        if let Some(r) = pool.rejected.first() {
            return Some(Mismatch::Rejected(format!("{:?}: {:?}", r.bundle.valuation, r.verdict)));
        }
        if pool.instances.len() != 1 {
            return Some(Mismatch::Rejected(format!("no instance: {:?}", pool.shortfall)));
        }
    }
    None
}
