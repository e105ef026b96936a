//! Bundled case studies and their expected-outcome manifests. The
//! `corpus` subcommand replays each one and fails loudly on any
//! mismatch, so the binary is self-checking.

use std::io::Write;

use crate::cli::RepairConfig;
use crate::driver::{apply_patch, repair, validate, PatchKind, RepairOutcome};
use crate::interp::run_suite;
use crate::lang::load_program;
use crate::suite::parse_suite;

pub struct CorpusCase {
    pub name: &'static str,
    pub program: &'static str,
    pub suite: &'static str,
    pub expect: &'static str,
}

pub fn cases() -> Vec<CorpusCase> {
    vec![
        CorpusCase {
            name: "tcas",
            program: include_str!("../corpus/tcas.mini"),
            suite: include_str!("../corpus/tcas.suite"),
            expect: include_str!("../corpus/tcas.expect"),
        },
        CorpusCase {
            name: "percentile",
            program: include_str!("../corpus/percentile.mini"),
            suite: include_str!("../corpus/percentile.suite"),
            expect: include_str!("../corpus/percentile.expect"),
        },
        CorpusCase {
            name: "guard",
            program: include_str!("../corpus/guard.mini"),
            suite: include_str!("../corpus/guard.suite"),
            expect: include_str!("../corpus/guard.expect"),
        },
    ]
}

#[derive(Debug)]
pub struct Expectation {
    pub baseline: Vec<String>,
    pub patch_kind: String,
    pub patch_line: u32,
}

pub fn parse_expect(text: &str) -> Expectation {
    let mut baseline = Vec::new();
    let mut patch_kind = String::new();
    let mut patch_line = 0;
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key.trim() {
            "baseline" => {
                baseline = value.split_whitespace().map(str::to_string).collect();
            }
            "patch_kind" => patch_kind = value.trim().to_string(),
            "patch_line" => patch_line = value.trim().parse().unwrap_or(0),
            _ => {}
        }
    }
    Expectation {
        baseline,
        patch_kind,
        patch_line,
    }
}

/// Replays every case; returns the process exit code (0 = all good).
pub fn run_corpus(out: &mut impl Write) -> i32 {
    let mut failures = 0;
    for case in cases() {
        match run_case(&case) {
            Ok(summary) => {
                let _ = writeln!(out, "{}: ok ({summary})", case.name);
            }
            Err(msg) => {
                failures += 1;
                let _ = writeln!(out, "{}: MISMATCH: {msg}", case.name);
            }
        }
    }
    if failures == 0 {
        0
    } else {
        1
    }
}

fn run_case(case: &CorpusCase) -> Result<String, String> {
    let file = format!("{}.mini", case.name);
    let program = load_program(case.program, &file).map_err(|e| e.to_string())?;
    let suite = parse_suite(case.suite).map_err(|e| e.to_string())?;
    let expect = parse_expect(case.expect);

    let records = run_suite(&program, &suite).map_err(|e| e.to_string())?;
    let baseline: Vec<&str> = records
        .iter()
        .map(|r| match r.status {
            crate::interp::TestStatus::Pass => "pass",
            _ => "fail",
        })
        .collect();
    if baseline != expect.baseline {
        return Err(format!(
            "baseline statuses {baseline:?}, expected {:?}",
            expect.baseline
        ));
    }

    let outcome = repair(&program, &suite, &RepairConfig::default()).map_err(|e| e.to_string())?;
    let RepairOutcome::Patched(patch, _) = outcome else {
        return Err(format!("expected a patch, got {outcome:?}"));
    };
    if patch.kind.as_str() != expect.patch_kind {
        return Err(format!(
            "patch kind {}, expected {}",
            patch.kind.as_str(),
            expect.patch_kind
        ));
    }
    if patch.location.line != expect.patch_line {
        return Err(format!(
            "patch at line {}, expected line {}",
            patch.location.line, expect.patch_line
        ));
    }

    // The emitted patch must leave the whole suite green.
    let patched = apply_patch(&program, &patch).map_err(|e| e.to_string())?;
    let (green, _) = validate(&patched, &suite).map_err(|e| e.to_string())?;
    if !green {
        return Err("patched program does not pass the suite".into());
    }

    let kind = match patch.kind {
        PatchKind::ConditionReplacement => "condition",
        PatchKind::PreconditionInsertion => "precondition",
    };
    Ok(format!(
        "{kind} patch at line {}: {}",
        patch.location.line,
        crate::lang::pretty_expr(&patch.new_expression)
    ))
}
