//! Component-based synthesis: encode trace rows as a location-variable
//! constraint system, solve it (internal solver) or export SMT-LIB 2,
//! and decode a model into a mini-lang expression.

pub mod blocks;
pub mod decode;
pub mod smtlib;
pub mod solve;
pub mod system;

pub use blocks::{build_components, BlockOp, BuildingBlock, MAX_LEVEL};
pub use decode::{decode, DecodeError};
pub use smtlib::emit_smtlib;
pub use solve::{solve_internal, SolveOutcome};
pub use system::{encode, verify_model, ConstraintSystem, I0Element, LocVar, Model};

/// Encodes `input` at `level` and renders the SMT-LIB script, returning
/// the conventional `<program>_<node_id>_L<level>.smt2` file name with it.
pub fn emit_smtlib_for(
    input: &SynthesisInput,
    level: u8,
    program_stem: &str,
    node_id: crate::lang::NodeId,
) -> (String, String) {
    let system = encode(input, build_components(level.min(MAX_LEVEL), &input.schema));
    let name = format!("{program_stem}_{node_id}_L{level}.smt2");
    (name, emit_smtlib(&system))
}

use std::time::Duration;

use thiserror::Error;

use crate::interp::InputOrigin;
use crate::lang::{BinaryOp, Builtin, ExprKind, Expression, UnaryOp, Value};
use crate::trace::{SchemaEntry, SynthesisInput};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub max_level: u8,
    /// Budget per constraint system (one per level).
    pub budget_per_level: Duration,
    /// Reject inputs whose rows never cover one of the two outcomes.
    pub trivial_guard: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_level: 3,
            budget_per_level: Duration::from_secs(10),
            trivial_guard: true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum SynthOutcome {
    Found {
        expr: Expression,
        level: u8,
        model: Model,
    },
    NotFound(NotFoundReason),
}

#[derive(Debug, Clone)]
pub enum NotFoundReason {
    /// The rows only ever demand one boolean outcome; any patch would be
    /// a constant condition that the suite cannot distinguish from a
    /// real fix.
    TrivialPatchGuard { diagnostic: String },
    /// Every level came back unsat or timed out.
    Exhausted { levels_tried: u8, timeouts: u8 },
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("decoded model does not satisfy the rows (level {level}): {detail}")]
    ModelInconsistent { level: u8, detail: String },
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Iterates levels 0..=max, returning the first decoded expression that
/// satisfies every row by direct re-evaluation.
pub fn synthesize(
    input: &SynthesisInput,
    config: &SynthConfig,
) -> Result<SynthOutcome, SynthError> {
    if config.trivial_guard && !input.covers_both_outcomes() {
        let observed = input.rows.first().map(|r| r.expected).unwrap_or(true);
        let diagnostic = format!(
            "rows only require the condition to be {observed}; the {} branch is never exercised \
             by the suite, so only a constant condition could fit (suite cannot rule out a \
             trivial patch)",
            !observed
        );
        return Ok(SynthOutcome::NotFound(NotFoundReason::TrivialPatchGuard {
            diagnostic,
        }));
    }

    let mut timeouts = 0u8;
    for level in 0..=config.max_level.min(MAX_LEVEL) {
        let components = build_components(level, &input.schema);
        let system = encode(input, components);
        match solve_internal(&system, config.budget_per_level) {
            SolveOutcome::Sat(model) => {
                let expr = decode(&model, &system)?;
                // The repair equation, checked per row on the decoded
                // expression itself.
                for row in &input.rows {
                    let got = eval_patch_expr(&expr, &input.schema, &row.values);
                    if got != Some(Value::Bool(row.expected)) {
                        return Err(SynthError::ModelInconsistent {
                            level,
                            detail: format!(
                                "row ({}, m={}) expected {}, expression gave {:?}",
                                row.test_name, row.execution_index, row.expected, got
                            ),
                        });
                    }
                }
                return Ok(SynthOutcome::Found { expr, level, model });
            }
            SolveOutcome::Unsat => {}
            SolveOutcome::Timeout => timeouts += 1,
        }
    }
    Ok(SynthOutcome::NotFound(NotFoundReason::Exhausted {
        levels_tried: config.max_level.min(MAX_LEVEL) + 1,
        timeouts,
    }))
}

/// Evaluates a patch-shaped expression over one row of schema values.
/// Handles exactly the shapes decode produces (plus negated literals);
/// `None` means a runtime failure such as overflow.
pub fn eval_patch_expr(
    expr: &Expression,
    schema: &[SchemaEntry],
    values: &[Value],
) -> Option<Value> {
    match &expr.kind {
        ExprKind::Literal(v) => Some(v.clone()),
        ExprKind::Var(name) => lookup(schema, values, &InputOrigin::Var(name.clone())),
        ExprKind::Call {
            builtin: Builtin::Len,
            args,
        } => match &args[0].kind {
            ExprKind::Var(array) => lookup(schema, values, &InputOrigin::ArrayLen(array.clone())),
            _ => None,
        },
        ExprKind::Call { .. } | ExprKind::Index { .. } => None,
        ExprKind::Unary { op, operand } => {
            let v = eval_patch_expr(operand, schema, values)?;
            match (op, v) {
                (UnaryOp::Not, Value::Bool(b)) => Some(Value::Bool(!b)),
                (UnaryOp::Neg, Value::Int(n)) => n.checked_neg().map(Value::Int),
                (UnaryOp::Neg, Value::Real(x)) => Some(Value::Real(-x)),
                _ => None,
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let a = eval_patch_expr(lhs, schema, values)?;
            let b = eval_patch_expr(rhs, schema, values)?;
            use BinaryOp::*;
            Some(match (op, a, b) {
                (And, Value::Bool(x), Value::Bool(y)) => Value::Bool(x && y),
                (Or, Value::Bool(x), Value::Bool(y)) => Value::Bool(x || y),
                (Lt, Value::Int(x), Value::Int(y)) => Value::Bool(x < y),
                (Le, Value::Int(x), Value::Int(y)) => Value::Bool(x <= y),
                (Gt, Value::Int(x), Value::Int(y)) => Value::Bool(x > y),
                (Ge, Value::Int(x), Value::Int(y)) => Value::Bool(x >= y),
                (Eq, Value::Int(x), Value::Int(y)) => Value::Bool(x == y),
                (Ne, Value::Int(x), Value::Int(y)) => Value::Bool(x != y),
                (Lt, Value::Real(x), Value::Real(y)) => Value::Bool(x < y),
                (Le, Value::Real(x), Value::Real(y)) => Value::Bool(x <= y),
                (Gt, Value::Real(x), Value::Real(y)) => Value::Bool(x > y),
                (Ge, Value::Real(x), Value::Real(y)) => Value::Bool(x >= y),
                (Eq, Value::Real(x), Value::Real(y)) => Value::Bool(x == y),
                (Ne, Value::Real(x), Value::Real(y)) => Value::Bool(x != y),
                (Add, Value::Int(x), Value::Int(y)) => Value::Int(x.checked_add(y)?),
                (Sub, Value::Int(x), Value::Int(y)) => Value::Int(x.checked_sub(y)?),
                (Mul, Value::Int(x), Value::Int(y)) => Value::Int(x.checked_mul(y)?),
                (Add, Value::Real(x), Value::Real(y)) => Value::Real(x + y),
                (Sub, Value::Real(x), Value::Real(y)) => Value::Real(x - y),
                (Mul, Value::Real(x), Value::Real(y)) => Value::Real(x * y),
                _ => return None,
            })
        }
    }
}

fn lookup(schema: &[SchemaEntry], values: &[Value], origin: &InputOrigin) -> Option<Value> {
    schema
        .iter()
        .position(|e| &e.origin == origin)
        .map(|i| values[i].clone())
}
