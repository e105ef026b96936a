//! The repair pipeline: baseline run, spectrum ranking, angelic
//! localization, trace collection, synthesis, patch application and
//! whole-suite validation. Patches are never stacked; the first
//! validated patch wins, explored in (condition pairs, then
//! precondition pairs) suspiciousness order.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::angelic::{
    locate_condition_fixes, locate_precondition_fixes, AngelicPair, Localization, PairKind,
};
use crate::cli::{RepairConfig, RepairMode, SolverChoice};
use crate::interp::{run_suite, InterpError, TestCase, TestStatus};
use crate::lang::{
    type_check, Block, Expression, NodeId, Program, SourceLoc, Statement, StmtKind, TypedProgram,
};
use crate::spectrum::{build_spectrum, ochiai_rank, SpectrumError};
use crate::suite::SuiteError;
use crate::synth::{emit_smtlib_for, synthesize, NotFoundReason, SynthConfig, SynthOutcome};
use crate::trace::{collect, gather_constants, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchKind {
    ConditionReplacement,
    PreconditionInsertion,
}

impl PatchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PatchKind::ConditionReplacement => "condition_replacement",
            PatchKind::PreconditionInsertion => "precondition_insertion",
        }
    }
}

/// A validated source-level fix.
#[derive(Debug, Clone)]
pub struct Patch {
    pub kind: PatchKind,
    /// Location of the replaced condition or the guarded statement.
    pub location: SourceLoc,
    pub new_expression: Expression,
    /// Unified-diff style rendering.
    pub rendered: String,
    pub level_used: u8,
    pub pairs_tried: usize,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub enum NoPatchReason {
    NoAngelicPair,
    SynthesisNotFound,
    ValidationRegression,
    TrivialPatchGuard { diagnostic: String },
}

impl NoPatchReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoPatchReason::NoAngelicPair => "no_angelic_pair",
            NoPatchReason::SynthesisNotFound => "synthesis_not_found",
            NoPatchReason::ValidationRegression => "validation_regression",
            NoPatchReason::TrivialPatchGuard { .. } => "trivial_patch_guard",
        }
    }
}

/// Counters and metadata reported alongside the outcome.
#[derive(Debug, Clone, Default)]
pub struct RepairStats {
    pub baseline: Vec<TestStatus>,
    pub conditions_examined: usize,
    pub preconditions_examined: usize,
    pub angelic_executions: usize,
    pub pairs_found: usize,
    pub pairs_tried: usize,
    pub wall_time: Duration,
}

#[derive(Debug)]
pub enum RepairOutcome {
    Patched(Patch, RepairStats),
    NoPatch(NoPatchReason, RepairStats),
    /// smtlib-export backend: systems written, nothing solved.
    Exported(Vec<PathBuf>, RepairStats),
}

#[derive(Debug, Error)]
pub enum RepairError {
    #[error("nothing to repair: every test passes")]
    NothingToRepair,
    #[error("no passing test models the expected behavior")]
    NoPassingTests,
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("cannot write SMT-LIB output: {0}")]
    SmtOut(std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

pub fn repair(
    program: &TypedProgram,
    suite: &[TestCase],
    config: &RepairConfig,
) -> Result<RepairOutcome, RepairError> {
    let start = Instant::now();
    let deadline = start + config.global_budget;
    let mut stats = RepairStats::default();

    // Baseline.
    let records = run_suite(program, suite)?;
    stats.baseline = records.iter().map(|r| r.status.clone()).collect();
    let failing: Vec<TestCase> = suite
        .iter()
        .zip(&records)
        .filter(|(_, r)| !r.status.is_pass())
        .map(|(t, _)| t.clone())
        .collect();
    if failing.is_empty() {
        return Err(RepairError::NothingToRepair);
    }
    if failing.len() == suite.len() {
        return Err(RepairError::NoPassingTests);
    }

    // Fault localization.
    let spectrum = build_spectrum(&records, suite)?;
    let ranked = ochiai_rank(&spectrum)?;
    let ranked_conditions: Vec<(NodeId, f64)> = {
        let ifs = program.program().if_conditions();
        ranked
            .iter()
            .filter(|(_, susp)| *susp > 0.0)
            .filter_map(|(id, susp)| {
                ifs.iter()
                    .find(|(stmt, _)| stmt.loc.node_id == *id)
                    .map(|(_, cond)| (*cond, *susp))
            })
            .collect()
    };
    let ranked_statements: Vec<(NodeId, f64)> = ranked
        .iter()
        .filter(|(_, susp)| *susp > 0.0)
        .filter(|(id, _)| {
            program
                .program()
                .statement(*id)
                .map(Statement::is_skippable)
                .unwrap_or(false)
        })
        .map(|&(id, susp)| (id, susp))
        .collect();

    let constants = gather_constants(program, config.constants);
    let synth_config = SynthConfig {
        max_level: config.max_level,
        budget_per_level: config.synth_budget,
        trivial_guard: config.trivial_guard,
    };

    let mut exported: Vec<PathBuf> = Vec::new();
    let mut saw_regression = false;
    let mut guard_diagnostic: Option<String> = None;
    let mut any_pair = false;

    // Condition phase, then (if nothing validated) precondition phase.
    let phases: Vec<PairKind> = match config.mode {
        RepairMode::Condition => vec![PairKind::Condition],
        RepairMode::Precondition => vec![PairKind::Precondition],
        RepairMode::Both => vec![PairKind::Condition, PairKind::Precondition],
    };

    for phase in phases {
        let localization: Localization = match phase {
            PairKind::Condition => {
                let l =
                    locate_condition_fixes(program, &failing, &ranked_conditions, config.budget)?;
                stats.conditions_examined = l.examined.len();
                l
            }
            PairKind::Precondition => {
                let l = locate_precondition_fixes(
                    program,
                    &failing,
                    &ranked_statements,
                    config.budget,
                )?;
                stats.preconditions_examined = l.examined.len();
                l
            }
        };
        stats.angelic_executions += localization.executions;
        stats.pairs_found += localization.pairs.len();
        any_pair |= !localization.pairs.is_empty();

        for pair in &localization.pairs {
            if Instant::now() > deadline {
                break;
            }
            stats.pairs_tried += 1;
            let input = match collect(program, suite, pair, &constants) {
                Ok(input) => input,
                Err(TraceError::Contradictory { .. }) => continue,
                Err(TraceError::NoFailingRows) => continue,
                Err(TraceError::SchemaMismatch { .. }) => continue,
                Err(TraceError::Interp(e)) => return Err(e.into()),
            };

            if config.solver == SolverChoice::SmtlibExport {
                let dir = config.smt_out.clone().unwrap_or_else(|| PathBuf::from("."));
                let stem = PathBuf::from(program.file())
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "program".into());
                for level in 0..=config.max_level {
                    let (name, script) = emit_smtlib_for(&input, level, &stem, pair.node_id);
                    let path = dir.join(name);
                    std::fs::write(&path, script).map_err(RepairError::SmtOut)?;
                    exported.push(path);
                }
                continue;
            }

            match synthesize(&input, &synth_config)
                .map_err(|e| RepairError::Internal(e.to_string()))?
            {
                SynthOutcome::Found { expr, level, .. } => {
                    let candidate = build_patch(
                        program,
                        pair,
                        expr,
                        level,
                        stats.pairs_tried,
                        start.elapsed(),
                    )?;
                    let patched = apply_patch(program, &candidate)?;
                    let (all_pass, _) = validate(&patched, suite)?;
                    if all_pass {
                        let mut patch = candidate;
                        patch.wall_time = start.elapsed();
                        stats.wall_time = start.elapsed();
                        return Ok(RepairOutcome::Patched(patch, stats));
                    }
                    saw_regression = true;
                }
                SynthOutcome::NotFound(NotFoundReason::TrivialPatchGuard { diagnostic }) => {
                    guard_diagnostic.get_or_insert(diagnostic);
                }
                SynthOutcome::NotFound(NotFoundReason::Exhausted { .. }) => {}
            }
        }
    }

    stats.wall_time = start.elapsed();
    if config.solver == SolverChoice::SmtlibExport {
        return Ok(RepairOutcome::Exported(exported, stats));
    }

    let reason = if saw_regression {
        NoPatchReason::ValidationRegression
    } else if let Some(diagnostic) = guard_diagnostic {
        NoPatchReason::TrivialPatchGuard { diagnostic }
    } else if any_pair {
        NoPatchReason::SynthesisNotFound
    } else {
        NoPatchReason::NoAngelicPair
    };
    Ok(RepairOutcome::NoPatch(reason, stats))
}

fn build_patch(
    program: &TypedProgram,
    pair: &AngelicPair,
    expr: Expression,
    level: u8,
    pairs_tried: usize,
    wall_time: Duration,
) -> Result<Patch, RepairError> {
    let (kind, location, rendered) = match pair.kind {
        PairKind::Condition => {
            let stmt = program
                .program()
                .if_by_condition(pair.node_id)
                .ok_or_else(|| RepairError::Internal("pair condition vanished".into()))?;
            let StmtKind::If { cond, .. } = &stmt.kind else {
                unreachable!();
            };
            let rendered = format!(
                "--- {}:{}\n- if ({})\n+ if ({})\n",
                cond.loc.file,
                cond.loc.line,
                crate::lang::pretty_expr(cond),
                crate::lang::pretty_expr(&expr),
            );
            (PatchKind::ConditionReplacement, cond.loc.clone(), rendered)
        }
        PairKind::Precondition => {
            let stmt = program
                .program()
                .statement(pair.node_id)
                .ok_or_else(|| RepairError::Internal("pair statement vanished".into()))?;
            let body = crate::lang::pretty_stmt(stmt, 1);
            let rendered = format!(
                "--- {}:{}\n+ if ({}) {{\n{}+ }}\n",
                stmt.loc.file,
                stmt.loc.line,
                crate::lang::pretty_expr(&expr),
                body,
            );
            (PatchKind::PreconditionInsertion, stmt.loc.clone(), rendered)
        }
    };
    Ok(Patch {
        kind,
        location,
        new_expression: expr,
        rendered,
        level_used: level,
        pairs_tried,
        wall_time,
    })
}

/// Applies a patch: swap the if condition, or wrap the statement in
/// `if (<expr>) { <stmt> }`. The result is re-type-checked; failure
/// indicates an internal bug (synthesis produced an ill-typed
/// expression).
pub fn apply_patch(program: &TypedProgram, patch: &Patch) -> Result<TypedProgram, RepairError> {
    let mut cloned: Program = program.program().clone();
    let mut next_id = cloned.max_node_id() + 1;
    let target = patch.location.node_id;

    let mut new_expr = patch.new_expression.clone();
    relocate(&mut new_expr, &patch.location, &mut next_id);

    let mut patched = false;
    for func in &mut cloned.functions {
        patch_block(
            &mut func.body,
            target,
            &new_expr,
            &mut next_id,
            &mut patched,
        );
    }
    if !patched {
        return Err(RepairError::Internal(format!(
            "patch target node {target} not found"
        )));
    }

    type_check(cloned).map_err(|errs| {
        RepairError::Internal(format!(
            "patched program fails the type checker: {}",
            errs.first().map(|e| e.to_string()).unwrap_or_default()
        ))
    })
}

fn relocate(expr: &mut Expression, site: &SourceLoc, next_id: &mut NodeId) {
    expr.loc = SourceLoc {
        file: site.file.clone(),
        line: site.line,
        col: site.col,
        node_id: *next_id,
    };
    *next_id += 1;
    match &mut expr.kind {
        crate::lang::ExprKind::Unary { operand, .. } => relocate(operand, site, next_id),
        crate::lang::ExprKind::Binary { lhs, rhs, .. } => {
            relocate(lhs, site, next_id);
            relocate(rhs, site, next_id);
        }
        crate::lang::ExprKind::Index { array, index } => {
            relocate(array, site, next_id);
            relocate(index, site, next_id);
        }
        crate::lang::ExprKind::Call { args, .. } => {
            for a in args {
                relocate(a, site, next_id);
            }
        }
        crate::lang::ExprKind::Literal(_) | crate::lang::ExprKind::Var(_) => {}
    }
}

fn patch_block(
    block: &mut Block,
    target: NodeId,
    new_expr: &Expression,
    next_id: &mut NodeId,
    patched: &mut bool,
) {
    for stmt in &mut block.statements {
        if *patched {
            return;
        }
        // Condition replacement targets the condition expression node.
        if let StmtKind::If { cond, .. } = &mut stmt.kind {
            if cond.loc.node_id == target {
                *cond = new_expr.clone();
                *patched = true;
                return;
            }
        }
        // Precondition insertion targets the statement node itself.
        if stmt.loc.node_id == target {
            let original = stmt.clone();
            let guard_loc = SourceLoc {
                file: original.loc.file.clone(),
                line: original.loc.line,
                col: original.loc.col,
                node_id: *next_id,
            };
            *next_id += 1;
            let body_loc = SourceLoc {
                file: original.loc.file.clone(),
                line: original.loc.line,
                col: original.loc.col,
                node_id: *next_id,
            };
            *next_id += 1;
            *stmt = Statement {
                kind: StmtKind::If {
                    cond: new_expr.clone(),
                    then_block: Block {
                        statements: vec![original],
                        loc: body_loc,
                    },
                    else_block: None,
                },
                loc: guard_loc,
            };
            *patched = true;
            return;
        }
        match &mut stmt.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                patch_block(then_block, target, new_expr, next_id, patched);
                if let Some(e) = else_block {
                    patch_block(e, target, new_expr, next_id, patched);
                }
            }
            StmtKind::While { body, .. } => patch_block(body, target, new_expr, next_id, patched),
            _ => {}
        }
    }
}

/// Full-suite run; true iff every status is pass.
pub fn validate(
    program: &TypedProgram,
    suite: &[TestCase],
) -> Result<(bool, Vec<TestStatus>), RepairError> {
    let records = run_suite(program, suite)?;
    let statuses: Vec<TestStatus> = records.into_iter().map(|r| r.status).collect();
    let all_pass = statuses.iter().all(TestStatus::is_pass);
    Ok((all_pass, statuses))
}

/// Structured report plus the human-readable rendering. Deterministic
/// except for the trailing `# timing` comment lines.
pub fn render_report(outcome: &RepairOutcome, program_file: &str) -> String {
    let mut s = String::new();
    match outcome {
        RepairOutcome::Patched(patch, stats) => {
            writeln!(s, "status = patch_found").unwrap();
            writeln!(s, "patch_kind = {}", patch.kind.as_str()).unwrap();
            writeln!(
                s,
                "location = {}:{}:{}",
                patch.location.file, patch.location.line, patch.location.col
            )
            .unwrap();
            writeln!(
                s,
                "expression = {}",
                crate::lang::pretty_expr(&patch.new_expression)
            )
            .unwrap();
            writeln!(s, "level = {}", patch.level_used).unwrap();
            writeln!(s, "pairs_examined = {}", stats.pairs_found).unwrap();
            writeln!(
                s,
                "candidates_by_phase = conditions:{} preconditions:{}",
                stats.conditions_examined, stats.preconditions_examined
            )
            .unwrap();
            writeln!(s).unwrap();
            writeln!(s, "Fix found!").unwrap();
            match patch.kind {
                PatchKind::ConditionReplacement => {
                    let (old, new) = diff_lines(&patch.rendered);
                    writeln!(
                        s,
                        "At line {} of file {}, replace",
                        patch.location.line, program_file
                    )
                    .unwrap();
                    writeln!(s, "  if ({old})").unwrap();
                    writeln!(s, "by").unwrap();
                    writeln!(s, "  if ({new})").unwrap();
                }
                PatchKind::PreconditionInsertion => {
                    writeln!(
                        s,
                        "At line {} of file {}, add precondition",
                        patch.location.line, program_file
                    )
                    .unwrap();
                    writeln!(
                        s,
                        "  if ({})",
                        crate::lang::pretty_expr(&patch.new_expression)
                    )
                    .unwrap();
                    writeln!(s, "before the guarded statement").unwrap();
                }
            }
            writeln!(s).unwrap();
            writeln!(s, "{}", patch.rendered.trim_end()).unwrap();
            writeln!(s, "# timing wall_ms = {}", stats.wall_time.as_millis()).unwrap();
        }
        RepairOutcome::NoPatch(reason, stats) => {
            writeln!(s, "status = no_patch").unwrap();
            writeln!(s, "reason = {}", reason.as_str()).unwrap();
            if let NoPatchReason::TrivialPatchGuard { diagnostic } = reason {
                writeln!(s, "diagnostic = {diagnostic}").unwrap();
            }
            writeln!(s, "pairs_examined = {}", stats.pairs_found).unwrap();
            writeln!(
                s,
                "candidates_by_phase = conditions:{} preconditions:{}",
                stats.conditions_examined, stats.preconditions_examined
            )
            .unwrap();
            writeln!(s, "# timing wall_ms = {}", stats.wall_time.as_millis()).unwrap();
        }
        RepairOutcome::Exported(files, stats) => {
            writeln!(s, "status = exported").unwrap();
            writeln!(s, "systems = {}", files.len()).unwrap();
            for f in files {
                writeln!(s, "file = {}", f.display()).unwrap();
            }
            writeln!(s, "# timing wall_ms = {}", stats.wall_time.as_millis()).unwrap();
        }
    }
    s
}

/// Pulls the `- if (...)` / `+ if (...)` payloads back out of the diff.
fn diff_lines(rendered: &str) -> (String, String) {
    let mut old = String::new();
    let mut new = String::new();
    for line in rendered.lines() {
        if let Some(rest) = line.strip_prefix("- if (") {
            old = rest.trim_end_matches(')').to_string();
        }
        if let Some(rest) = line.strip_prefix("+ if (") {
            new = rest.trim_end_matches(')').to_string();
        }
    }
    (old, new)
}
