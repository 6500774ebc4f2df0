use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(format!("{name}.java"))
}

fn tracegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracegen")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_skeleton(dir: &tempfile::TempDir, name: &str, src: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, src).unwrap();
    p.display().to_string()
}

#[test]
fn json_pool_goes_to_stdout() {
    let f = fixture("loops_abc");
    let o = tracegen(&["gen", f.to_str().unwrap(), "-n", "3", "--kind", "which-fragment", "--seed", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], "tracegen-quiz/1");
    assert_eq!(doc["generator"]["seed"], 2);
    assert_eq!(doc["questions"].as_array().unwrap().len(), 3);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("branch_divergence");
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = tracegen(&["gen", f.to_str().unwrap(), "-n", "2", "--format", "gift", "--seed", "5", "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        std::fs::read(out.join("quiz.gift")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn plain_format_writes_sources_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("minmax_rec5");
    let out = dir.path().join("plain");
    let o = tracegen(&["gen", f.to_str().unwrap(), "-n", "2", "--format", "plain", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for name in ["instance_01.java", "instance_02.java", "answers.txt"] {
        assert!(out.join(name).exists(), "{name}");
    }
    // a rendered instance runs on its own
    let inst = out.join("instance_01.java");
    let r = tracegen(&["run", inst.to_str().unwrap(), "--entry", "start", "--trace"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let trace: serde_json::Value = serde_json::from_str(&stdout(&r)).unwrap();
    assert_eq!(trace["return_value"]["type"], "int_array");
}

#[test]
fn exit_codes_follow_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let small = write_skeleton(&dir, "small.java", "int x = INT(range(0, 3));\nASSERT(x > 1);\nSystem.out.print(x);");
    let o = tracegen(&["gen", &small, "-n", "5"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("2 of 5"));

    let none = write_skeleton(&dir, "none.java", "int x = INT(range(0, 3));\nASSERT(x > 5);\nSystem.out.print(x);");
    assert_eq!(code(&tracegen(&["gen", &none, "-n", "1"])), 3);
    let o = tracegen(&["check", &none]);
    assert_eq!((code(&o), stdout(&o).trim()), (3, "unsat"));

    let broken = write_skeleton(&dir, "broken.java", "int x = ;");
    let o = tracegen(&["gen", &broken]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("broken.java"));
    assert_eq!(code(&tracegen(&["gen", &small, "--format", "xml"])), 4);
    assert_eq!(code(&tracegen(&["gen", &small, "--hole", "7"])), 4);
}

#[test]
fn check_reports_sat_with_and_without_optimizer() {
    let f = fixture("minmax_rec5");
    for extra in [None, Some("--no-optimize")] {
        let mut args = vec!["check", f.to_str().unwrap()];
        args.extend(extra);
        let o = tracegen(&args);
        assert_eq!((code(&o), stdout(&o).trim()), (0, "sat"), "{}", stderr(&o));
    }
}

#[test]
fn dumps_and_kept_smt() {
    let dir = tempfile::tempdir().unwrap();
    let keep = dir.path().join("smt");
    let f = fixture("modified_ssa");
    let o = tracegen(&[
        "check",
        f.to_str().unwrap(),
        "--dump-ssa",
        "--dump-smt",
        "--dump-normalized",
        "--keep-smt",
        keep.to_str().unwrap(),
    ]);
    assert!(code(&o) == 0 || code(&o) == 3, "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("x@"), "{err}");
    assert!(err.contains("(check-sat)"));
    let kept = std::fs::read_to_string(keep.join("modified_ssa.smt2")).unwrap();
    assert!(kept.contains("(check-sat)"));
}

#[test]
fn config_file_sets_solver_options() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[solver]\npath = \"/nonexistent/solver\"\n").unwrap();
    let f = fixture("loops_abc");
    let o = tracegen(&["check", f.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("solver"), "{}", stderr(&o));

    std::fs::write(&cfg, "[solver]\ntimeout_ms = 30000\nseed = 3\n").unwrap();
    let o = tracegen(&["check", f.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn output_question_on_silent_program_is_refused() {
    let f = fixture("loops_abc");
    let o = tracegen(&["gen", f.to_str().unwrap(), "-n", "1", "--kind", "output"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("prints nothing"));
}
