//! End-to-end checks of the binary: exit codes, report output, suite
//! runner output, corpus self-check, and the SMT-LIB export backend.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(file)
}

fn minipol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minipol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn repair_tcas_exits_zero_with_the_expected_patch() {
    let out = minipol(&[
        "repair",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("status = patch_found"), "{text}");
    assert!(text.contains("up_sep != 0"), "{text}");
    assert!(text.contains("Fix found!"), "{text}");
    assert!(
        text.contains("At line 7 of file tcas.mini, replace"),
        "{text}"
    );
}

#[test]
fn run_prints_statuses_and_exits_one_on_failures() {
    let out = minipol(&[
        "run",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("3 pass / 2 fail"), "{text}");
    assert!(text.contains("2: fail (expected 1, got 0)"), "{text}");
}

#[test]
fn run_exits_zero_when_all_green() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("ok.mini");
    let suite = dir.path().join("ok.suite");
    std::fs::write(&program, "fn f(x: int) -> int { return x; }\n").unwrap();
    std::fs::write(&suite, "test a { function = f inputs = 3 expected = 3 }\n").unwrap();
    let out = minipol(&["run", program.to_str().unwrap(), suite.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("1 pass / 0 fail"));
}

#[test]
fn repairing_a_green_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("ok.mini");
    let suite = dir.path().join("ok.suite");
    std::fs::write(&program, "fn f(x: int) -> int { return x; }\n").unwrap();
    std::fs::write(&suite, "test a { function = f inputs = 3 expected = 3 }\n").unwrap();
    let out = minipol(&["repair", program.to_str().unwrap(), suite.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("nothing to repair"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn missing_files_and_malformed_input_exit_two() {
    let out = minipol(&["repair", "/nonexistent.mini", "/nonexistent.suite"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("bad.mini");
    let suite = dir.path().join("bad.suite");
    std::fs::write(&program, "fn f(x: int) -> int { return x; }\n").unwrap();
    std::fs::write(&suite, "test broken {\n").unwrap();
    let out = minipol(&["repair", program.to_str().unwrap(), suite.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // Type errors carry their location.
    std::fs::write(&program, "fn f(x: int) -> int { return 1 + true; }\n").unwrap();
    std::fs::write(&suite, "test a { function = f inputs = 3 expected = 3 }\n").unwrap();
    let out = minipol(&["repair", program.to_str().unwrap(), suite.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.mini:1:"), "{}", stderr(&out));
}

#[test]
fn no_patch_exits_one_with_a_reason() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("classify.mini");
    let suite = dir.path().join("classify.suite");
    std::fs::write(
        &program,
        "fn classify(x: int) -> int {\n\
         if (x < 0) { return -1; }\n\
         if (x == 5) { return 100; }\n\
         return x;\n\
         }\n",
    )
    .unwrap();
    std::fs::write(
        &suite,
        "test negative { function = classify inputs = -3 expected = -1 }\n\
         test bug { function = classify inputs = 7 expected = 100 }\n",
    )
    .unwrap();
    let out = minipol(&["repair", program.to_str().unwrap(), suite.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("status = no_patch"), "{text}");
    assert!(text.contains("reason = trivial_patch_guard"), "{text}");
}

#[test]
fn corpus_subcommand_is_self_checking() {
    let out = minipol(&["corpus"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("tcas: ok"), "{text}");
    assert!(text.contains("percentile: ok"), "{text}");
    assert!(text.contains("guard: ok"), "{text}");
}

#[test]
fn guard_repair_reports_a_precondition() {
    let out = minipol(&[
        "repair",
        corpus("guard.mini").to_str().unwrap(),
        corpus("guard.suite").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("patch_kind = precondition_insertion"),
        "{text}"
    );
    assert!(text.contains("add precondition"), "{text}");
}

#[test]
fn smtlib_export_writes_systems_per_pair_and_level() {
    let dir = tempfile::tempdir().unwrap();
    let smt_dir = dir.path().join("smt");
    let out = minipol(&[
        "repair",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
        "--solver",
        "smtlib-export",
        "--max-level",
        "2",
        "--smt-out",
        smt_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("status = exported"),
        "{}",
        stdout(&out)
    );

    let mut files: Vec<String> = std::fs::read_dir(&smt_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    // One angelic pair, levels 0..=2.
    assert_eq!(files.len(), 3, "{files:?}");
    assert!(files
        .iter()
        .all(|f| f.starts_with("tcas_") && f.ends_with(".smt2")));
    assert!(files.iter().any(|f| f.ends_with("_L1.smt2")));

    // The exported scripts parse with the bundled reader.
    for f in &files {
        let text = std::fs::read_to_string(smt_dir.join(f)).unwrap();
        minipol::synth::smtlib::validate_script(&text).unwrap();
    }
}

#[test]
fn report_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.txt");
    let out = minipol(&[
        "repair",
        corpus("percentile.mini").to_str().unwrap(),
        corpus("percentile.suite").to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("status = patch_found"), "{text}");
    assert!(text.contains("location = percentile.mini:12:"), "{text}");
    assert!(text.contains("level = 1"), "{text}");
}

#[test]
fn dump_flags_emit_spectrum_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.tsv");
    let out = minipol(&[
        "repair",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
        "--dump-spectrum",
        "--dump-trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(
        text.contains("node\tline\tcol\tfailed\tpassed\tsusp"),
        "{text}"
    );

    let tsv = std::fs::read_to_string(&trace).unwrap();
    let header = tsv.lines().next().unwrap();
    assert_eq!(header, "test\tm\texpected\tinhibit\tup_sep\tdown_sep\tbias");
    assert_eq!(tsv.lines().count(), 1 + 5, "one row per test hit");
}

#[test]
fn candidate_budget_can_starve_the_search() {
    // Line 3 ranks before line 7 (tie broken by position), so a budget
    // of one candidate examines only the unfixable condition.
    let out = minipol(&[
        "repair",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
        "--mode",
        "condition",
        "--candidates",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));
    assert!(
        stdout(&out).contains("reason = no_angelic_pair"),
        "{}",
        stdout(&out)
    );
}

#[test]
fn mode_flag_restricts_the_search() {
    // Precondition-only mode cannot fix tcas (its repair is a condition).
    let out = minipol(&[
        "repair",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
        "--mode",
        "precondition",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stdout(&out));

    // Condition-only mode still fixes it.
    let out = minipol(&[
        "repair",
        corpus("tcas.mini").to_str().unwrap(),
        corpus("tcas.suite").to_str().unwrap(),
        "--mode",
        "condition",
    ]);
    assert_eq!(out.status.code(), Some(0));
}
