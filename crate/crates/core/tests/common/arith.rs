//! Java int arithmetic checked three ways: exact math, the solver and the
//! reference interpreter.

use std::collections::BTreeMap;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracegen_core::pipeline::{generate_pool, prepare_source, PipelineOptions};
use tracegen_core::value::Value;

pub const OPS: [&str; 5] = ["+", "-", "*", "/", "%"];

/// Exact result reduced to the low 32 bits, which is how the language
/// defines int overflow; quotients truncate towards zero.
pub fn exact(op: &str, a: i32, b: i32) -> i32 {
    let (a, b) = (a as i128, b as i128);
    let r = match op {
        "+" => a + b,
        "-" => a - b,
        "*" => a * b,
        "/" => a / b,
        "%" => a % b,
        _ => unreachable!(),
    };
    (r & 0xffff_ffff) as u32 as i32
}

/// Operand pairs: fixed corner cases first, then a mix of extremes, small
/// signed values and uniform draws.
pub fn pairs(seed: u64, n: usize) -> Vec<(i32, i32)> {
    let mut out = vec![
        (i32::MIN, -1),
        (i32::MIN, 1),
        (i32::MAX, -1),
        (i32::MAX, 1),
        (i32::MAX, i32::MAX),
        (i32::MIN, i32::MIN),
        (i32::MIN, i32::MAX),
        (-7, 2),
        (7, -2),
        (-7, -2),
        (7, 2),
        (0, -3),
        (-1, i32::MIN),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| -> i32 {
        match rng.gen_range(0..4) {
            0 => *[i32::MIN, i32::MIN + 1, -1, 0, 1, i32::MAX - 1, i32::MAX]
                .get(rng.gen_range(0..7))
                .unwrap(),
            1 => rng.gen_range(-20..=20),
            2 => rng.gen_range(-70_000..=70_000),
            _ => rng.gen(),
        }
    };
    while out.len() < n {
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        out.push((a, b));
    }
    out.truncate(n);
    out
}

/// One skeleton asking the solver for every result of a batch of pairs.
fn batch_skeleton(batch: &[(i32, i32)]) -> String {
    let mut s = String::new();
    for (i, (a, b)) in batch.iter().enumerate() {
        writeln!(s, "int a{i} = INT(list({a}));").unwrap();
        writeln!(s, "int b{i} = INT(list({b}));").unwrap();
        for (k, op) in OPS.iter().enumerate() {
            // division by zero throws, so there is nothing to compare
            if b == &0 && (*op == "/" || *op == "%") {
                continue;
            }
            writeln!(s, "int r{i}_{k} = INT(range({}, {}));", i32::MIN, i32::MAX).unwrap();
            writeln!(s, "ASSERT(r{i}_{k} == a{i} {op} b{i});").unwrap();
        }
    }
    s
}

#[derive(Debug)]
pub struct ArithMismatch {
    pub a: i32,
    pub b: i32,
    pub op: &'static str,
    pub expected: i32,
    pub solver: Option<i64>,
}

/// Check `pairs` in batches; returns every disagreement and the number of
/// (pair, operator) combinations compared.
pub fn check_pairs(pairs: &[(i32, i32)], batch: usize) -> (Vec<ArithMismatch>, usize) {
    let opts = PipelineOptions {
        // keep the optimizer from folding the arithmetic before the solver sees it
        optimize: false,
        max_rejections: 0,
        ..PipelineOptions::default()
    };
    let mut bad = Vec::new();
    let mut compared = 0;
    for chunk in pairs.chunks(batch) {
        let src = batch_skeleton(chunk);
        let p = prepare_source(&src, &opts).unwrap();
        let pool = generate_pool(&p, &opts, 1).unwrap();
        // the interpreter re-checked every ASSERT(r == a op b) on the model
        let vals: BTreeMap<usize, Value> = match pool.instances.first() {
            Some(c) => c.bundle.valuation.clone(),
            None => {
                panic!("no verified model: {:?} {:?}", pool.shortfall, pool.rejected.first().map(|r| &r.verdict))
            }
        };
        let mut id = 0;
        for &(a, b) in chunk {
            id += 2;
            for op in OPS {
                if b == 0 && (op == "/" || op == "%") {
                    continue;
                }
                let got = match vals.get(&id) {
                    Some(Value::Int(v)) => Some(*v),
                    _ => None,
                };
                let expected = exact(op, a, b);
                compared += 1;
                if got != Some(expected as i64) {
                    bad.push(ArithMismatch {
                        a,
                        b,
                        op,
                        expected,
                        solver: got,
                    });
                }
                id += 1;
            }
        }
    }
    (bad, compared)
}
