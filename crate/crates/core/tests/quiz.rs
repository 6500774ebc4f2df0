use std::collections::BTreeSet;

use tracegen_core::pipeline::{prepare_source, PipelineOptions};
use tracegen_core::quiz::*;

fn fixture(name: &str) -> String {
    let path = format!("{}/fixtures/{name}.java", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

fn pool(src: &str, qs: &QuestionSpec) -> (PoolOutcome, PipelineOptions) {
    let opts = PipelineOptions::default();
    let p = prepare_source(src, &opts).unwrap();
    (generate(&p, &opts, qs).unwrap(), opts)
}

/// A GIFT question as Moodle's importer would see it.
#[derive(Debug)]
struct Gift {
    title: Option<String>,
    html: bool,
    text: String,
    answers: Vec<(bool, Option<String>, String)>,
}

fn unescape(s: &str) -> String {
    let mut out = String::new();
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c == '\\' {
            match it.next() {
                Some('n') => out.push('\n'),
                Some(o) => out.push(o),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Split at unescaped occurrences of any of `marks`, keeping the mark.
fn split_unescaped(s: &str, marks: &[char]) -> Vec<String> {
    let mut parts = vec![String::new()];
    let mut escaped = false;
    for c in s.chars() {
        if !escaped && marks.contains(&c) {
            parts.push(String::new());
        }
        escaped = !escaped && c == '\\';
        parts.last_mut().unwrap().push(c);
    }
    parts
}

fn find_unescaped(s: &str, target: char) -> Option<usize> {
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if !escaped && c == target {
            return Some(i);
        }
        escaped = !escaped && c == '\\';
    }
    None
}

fn parse_gift(doc: &str) -> Vec<Gift> {
    let mut blocks = vec![String::new()];
    for line in doc.lines() {
        if line.trim_start().starts_with("//") {
            continue;
        }
        if line.trim().is_empty() {
            blocks.push(String::new());
        } else {
            let b = blocks.last_mut().unwrap();
            b.push_str(line);
            b.push('\n');
        }
    }
    blocks
        .into_iter()
        .filter(|b| !b.trim().is_empty())
        .map(|b| {
            let mut rest = b.trim().to_string();
            let mut title = None;
            if let Some(after) = rest.strip_prefix("::") {
                // the first "::" not preceded by an escape closes the title
                let e = {
                    let mut k = 0;
                    loop {
                        let pos = k + after[k..].find("::").unwrap();
                        if pos > 0 && after.as_bytes()[pos - 1] == b'\\' {
                            k = pos + 1;
                        } else {
                            break pos;
                        }
                    }
                };
                title = Some(unescape(&after[..e]));
                rest = after[e + 2..].to_string();
            }
            let html = rest.starts_with("[html]");
            if html {
                rest = rest["[html]".len()..].to_string();
            }
            let open = find_unescaped(&rest, '{').expect("answer block");
            let close = open + find_unescaped(&rest[open..], '}').expect("answer block end");
            let text = unescape(rest[..open].trim());
            let body = &rest[open + 1..close];
            let answers = split_unescaped(body, &['=', '~'])
                .into_iter()
                .filter(|p| p.starts_with('=') || p.starts_with('~'))
                .map(|p| {
                    let correct = p.starts_with('=');
                    let mut a = p[1..].trim();
                    let mut weight = None;
                    if let Some(w) = a.strip_prefix('%') {
                        let end = w.find('%').unwrap();
                        weight = Some(w[..end].to_string());
                        a = &w[end + 1..];
                    }
                    (correct, weight, unescape(a.trim()))
                })
                .collect();
            Gift {
                title,
                html,
                text,
                answers,
            }
        })
        .collect()
}

fn credited(g: &Gift) -> BTreeSet<String> {
    g.answers
        .iter()
        .filter(|(c, w, _)| *c || w.as_deref().is_some_and(|w| !w.starts_with('-')))
        .map(|a| a.2.clone())
        .collect()
}

fn uncredited(g: &Gift) -> BTreeSet<String> {
    g.answers
        .iter()
        .filter(|(c, w, _)| !*c && w.as_deref().is_none_or(|w| w.starts_with('-')))
        .map(|a| a.2.clone())
        .collect()
}

#[test]
fn plain_export_writes_one_file_per_question_and_a_key() {
    let mut qs = QuestionSpec::new(QuestionKind::ReturnValue, "minmax", 2);
    qs.seed = 3;
    let (out, opts) = pool(&fixture("minmax_rec5"), &qs);
    assert_eq!(out.bundles.len(), 2);
    let files = export(&out.bundles, Format::Plain, &qs, &opts).unwrap();
    let names: Vec<_> = files.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, ["instance_01.java", "instance_02.java", "answers.txt"]);
    assert_eq!(files[0].contents, out.bundles[0].source);
    assert!(!files[0].contents.contains("INT"));
    let key = &files[2].contents;
    for b in &out.bundles {
        assert!(key.contains(&format!("correct: {}", b.correct[0])));
    }
}

#[test]
fn hole_question_round_trips_through_gift() {
    let mut qs = QuestionSpec::new(QuestionKind::HoleFill, "divergence", 1);
    qs.seed = 11;
    let (out, opts) = pool(&fixture("branch_divergence"), &qs);
    let b = &out.bundles[0];
    assert!(b.is_multiple_choice());
    let files = export(&out.bundles, Format::Gift, &qs, &opts).unwrap();
    assert_eq!(files.len(), 1);
    let parsed = parse_gift(&files[0].contents);
    assert_eq!(parsed.len(), 1);
    let g = &parsed[0];
    assert_eq!(g.title.as_deref(), Some("divergence 1"));
    assert!(g.html);
    assert!(g.text.contains("??"));
    assert!(g.text.contains("i &lt; limit"));
    assert_eq!(credited(g), b.correct.iter().cloned().collect());
    assert_eq!(uncredited(g), b.distractors.iter().cloned().collect());
    assert!(credited(g).is_disjoint(&uncredited(g)));

    // same seed, same file; the option order follows the seed
    assert_eq!(export(&out.bundles, Format::Gift, &qs, &opts).unwrap(), files);
    let orders: BTreeSet<Vec<String>> = (0..16)
        .map(|s| {
            let qs = QuestionSpec { seed: s, ..qs.clone() };
            let f = export(&out.bundles, Format::Gift, &qs, &opts).unwrap();
            parse_gift(&f[0].contents)[0].answers.iter().map(|a| a.2.clone()).collect()
        })
        .collect();
    assert!(orders.len() > 1);
}

#[test]
fn output_question_is_short_answer_in_gift() {
    let qs = QuestionSpec::new(QuestionKind::Output, "fill", 1);
    let (out, opts) = pool(&fixture("invariant_fill"), &qs);
    assert_eq!(out.bundles[0].correct, ["true"]);
    let files = export(&out.bundles, Format::Gift, &qs, &opts).unwrap();
    let g = &parse_gift(&files[0].contents)[0];
    assert_eq!(g.answers, [(true, None, "true".to_string())]);
}

#[test]
fn gift_survives_special_characters() {
    let src = "String s = STRING(list(\"a=b\", \"{x}\", \"c:d~e#\"));\nSystem.out.print(s);";
    let qs = QuestionSpec {
        prompt: Some("Output of {this}: program?".into()),
        ..QuestionSpec::new(QuestionKind::Output, "specials", 3)
    };
    let (out, opts) = pool(src, &qs);
    assert_eq!(out.bundles.len(), 3);
    let files = export(&out.bundles, Format::Gift, &qs, &opts).unwrap();
    let parsed = parse_gift(&files[0].contents);
    assert_eq!(parsed.len(), 3);
    let mut got = BTreeSet::new();
    for (g, b) in parsed.iter().zip(&out.bundles) {
        assert!(g.text.starts_with("<p>Output of {this}: program?</p>"));
        assert_eq!(g.answers.len(), 1);
        assert_eq!(g.answers[0].2, b.correct[0]);
        got.insert(g.answers[0].2.clone());
    }
    let want: BTreeSet<String> = ["a=b", "{x}", "c:d~e#"].map(String::from).into();
    assert_eq!(got, want);
}

fn validate(doc: &serde_json::Value) {
    let schema_path = concat!(env!("CARGO_MANIFEST_DIR"), "/schema/quiz-1.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn json_export_validates_for_every_kind() {
    let cases = [
        (QuestionKind::ReturnValue, fixture("minmax_rec5")),
        (QuestionKind::Output, fixture("invariant_fill")),
        (QuestionKind::HoleFill, fixture("branch_divergence")),
        (QuestionKind::WhichFragment, fixture("loops_abc")),
    ];
    for (kind, src) in cases {
        let qs = QuestionSpec::new(kind, "case", 2);
        let (out, opts) = pool(&src, &qs);
        let files = export(&out.bundles, Format::Json, &qs, &opts).unwrap();
        assert_eq!(files[0].name, "quiz.json");
        let doc: serde_json::Value = serde_json::from_str(&files[0].contents).unwrap();
        assert_eq!(doc["schema"], SCHEMA_ID);
        assert_eq!(doc["generator"]["kind"], kind.to_string());
        validate(&doc);
    }
}

#[test]
fn which_fragment_options_are_classified_by_the_interpreter() {
    let qs = QuestionSpec::new(QuestionKind::WhichFragment, "divergence", 2);
    let (out, _) = pool(&fixture("branch_divergence"), &qs);
    assert_eq!(out.bundles.len(), 2);
    for b in &out.bundles {
        assert!(b.source.contains("??"));
        assert!(!b.correct.is_empty() && !b.distractors.is_empty());
        assert!(b.correct[0].contains("limit = "));
        for r in &b.instances {
            let st = &r.trace;
            let a_ne_b = st.assertions.last().unwrap().holds;
            assert_eq!(a_ne_b, r.role == Role::Correct, "{}", r.rendered_source);
        }
    }
}

#[test]
fn empty_pool_and_missing_hole_are_errors() {
    let opts = PipelineOptions::default();
    let p = prepare_source("int x = INT(range(0, 3));\nASSERT(x > 5);", &opts).unwrap();
    let qs = QuestionSpec::new(QuestionKind::Output, "none", 2);
    assert!(matches!(generate(&p, &opts, &qs), Err(QuizError::Empty(_))));
    let qs = QuestionSpec::new(QuestionKind::HoleFill, "none", 2);
    assert!(matches!(generate(&p, &opts, &qs), Err(QuizError::NoHole)));
    let qs = QuestionSpec::new(QuestionKind::ReturnValue, "none", 2);
    assert!(matches!(generate(&p, &opts, &qs), Err(QuizError::NoReturnValue)));
    assert_eq!(export(&[], Format::Json, &qs, &opts), Err(ExportError::Empty));
}
