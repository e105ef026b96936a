//! Trace collection: run the whole suite with instrumentation for one
//! angelic pair and assemble the synthesis rows plus the constant pool.
//!
//! Each dynamic hit of the repair location yields one row: the in-scope
//! primitive variables plus a `len(a)` observer per in-scope array, and
//! the expected boolean outcome. For condition pairs the expected value
//! of a passing test is the actual evaluation at that hit and the
//! angelic value for failing tests; for precondition pairs it is true
//! for passing tests and false for failing ones.

use std::collections::HashMap;
use std::fmt::Write;

use thiserror::Error;

use crate::angelic::{AngelicPair, PairKind};
use crate::interp::{run_test, InputOrigin, InterpError, SnapshotValue, TestCase};
use crate::lang::{ExprKind, Type, TypedProgram, Value};

/// One element of the row schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaEntry {
    pub origin: InputOrigin,
    pub ty: Type,
}

impl SchemaEntry {
    pub fn display_name(&self) -> String {
        self.origin.display_name()
    }
}

/// One execution of the repair site.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub test_name: String,
    /// 1-based index of this hit within its test execution.
    pub execution_index: u32,
    /// Values aligned with the schema.
    pub values: Vec<Value>,
    pub expected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantOrigin {
    Default,
    Mined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantStrategy {
    Default,
    Mined,
}

#[derive(Debug, Clone)]
pub struct SynthesisInput {
    pub schema: Vec<SchemaEntry>,
    pub rows: Vec<TraceRow>,
    pub constants: Vec<(Value, ConstantOrigin)>,
    pub target: PairKind,
    /// Diagnostics that do not block synthesis (trivial-patch risk).
    pub warnings: Vec<String>,
}

impl SynthesisInput {
    /// True when both outcomes appear among the rows; a one-sided input
    /// can only be satisfied by a constant condition.
    pub fn covers_both_outcomes(&self) -> bool {
        self.rows.iter().any(|r| r.expected) && self.rows.iter().any(|r| !r.expected)
    }

    /// Tab-separated rendering for `--dump-trace`.
    pub fn dump_tsv(&self) -> String {
        let mut out = String::from("test\tm\texpected");
        for entry in &self.schema {
            out.push('\t');
            out.push_str(&entry.display_name());
        }
        out.push('\n');
        for row in &self.rows {
            write!(
                out,
                "{}\t{}\t{}",
                row.test_name, row.execution_index, row.expected
            )
            .unwrap();
            for v in &row.values {
                write!(out, "\t{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(
        "contradictory rows: tests `{first}` and `{second}` reach the location with identical \
         values but need different outcomes"
    )]
    Contradictory { first: String, second: String },
    #[error("no failing test ever executes the repair location")]
    NoFailingRows,
    #[error("row schema diverged between hits (test `{test}`)")]
    SchemaMismatch { test: String },
}

/// Collects synthesis rows for `pair` over the whole suite. Failing
/// tests run under the pair's directive so execution continues past the
/// location; passing tests keep their natural execution.
///
/// `constants` is the pool from [`gather_constants`]; entries whose
/// type does not occur in the row schema are dropped.
pub fn collect(
    program: &TypedProgram,
    suite: &[TestCase],
    pair: &AngelicPair,
    constants: &[(Value, ConstantOrigin)],
) -> Result<SynthesisInput, TraceError> {
    let mut schema: Option<Vec<SchemaEntry>> = None;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut warnings = Vec::new();
    let mut passing_covers = false;
    let mut failing_rows = false;

    for test in suite {
        let is_failing = pair.values.contains_key(&test.name);
        let directive = if is_failing {
            pair.directive_for(&test.name)
        } else {
            None
        };
        let record = run_test(program, test, directive, true)?;

        let hits: Vec<(u32, bool, &[SnapshotValue])> = match pair.kind {
            PairKind::Condition => record
                .condition_evals
                .iter()
                .filter(|c| c.node_id == pair.node_id)
                .map(|c| (c.seq, c.outcome, c.snapshot.as_slice()))
                .collect(),
            PairKind::Precondition => record
                .statement_hits
                .iter()
                .filter(|h| h.node_id == pair.node_id)
                .map(|h| (h.seq, !is_failing, h.snapshot.as_slice()))
                .collect(),
        };

        for (seq, expected, snapshot) in hits {
            let (entries, values) = split_snapshot(snapshot);
            match &schema {
                None => schema = Some(entries),
                Some(s) => {
                    if *s != entries {
                        return Err(TraceError::SchemaMismatch {
                            test: test.name.clone(),
                        });
                    }
                }
            }
            if is_failing {
                failing_rows = true;
            } else {
                passing_covers = true;
            }
            rows.push(TraceRow {
                test_name: test.name.clone(),
                execution_index: seq,
                values,
                expected,
            });
        }
    }

    if !failing_rows {
        return Err(TraceError::NoFailingRows);
    }
    let schema = schema.expect("failing rows imply a schema");

    // Reject inputs where identical values demand different outcomes;
    // no expression can separate them.
    let mut seen: HashMap<String, (&str, bool)> = HashMap::new();
    for row in &rows {
        let key = row
            .values
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join("\u{1}");
        match seen.get(key.as_str()) {
            Some(&(first, expected)) if expected != row.expected => {
                return Err(TraceError::Contradictory {
                    first: first.to_string(),
                    second: row.test_name.clone(),
                });
            }
            Some(_) => {}
            None => {
                seen.insert(key, (&row.test_name, row.expected));
            }
        }
    }

    if !passing_covers {
        warnings.push(format!(
            "location {} is never executed by a passing test; only a constant condition can \
             satisfy these rows (trivial-patch risk)",
            pair.loc
        ));
    }

    let kept: Vec<(Value, ConstantOrigin)> = constants
        .iter()
        .filter(|(v, _)| schema.iter().any(|e| e.ty == v.ty()))
        .cloned()
        .collect();

    Ok(SynthesisInput {
        schema,
        rows,
        constants: kept,
        target: pair.kind,
        warnings,
    })
}

/// Primitives first (env order), then array-length observers (env
/// order), so comparison operands group naturally by type.
fn split_snapshot(snapshot: &[SnapshotValue]) -> (Vec<SchemaEntry>, Vec<Value>) {
    let mut entries = Vec::with_capacity(snapshot.len());
    let mut values = Vec::with_capacity(snapshot.len());
    for sv in snapshot
        .iter()
        .filter(|s| matches!(s.origin, InputOrigin::Var(_)))
    {
        entries.push(SchemaEntry {
            origin: sv.origin.clone(),
            ty: sv.ty,
        });
        values.push(sv.value.clone());
    }
    for sv in snapshot
        .iter()
        .filter(|s| matches!(s.origin, InputOrigin::ArrayLen(_)))
    {
        entries.push(SchemaEntry {
            origin: sv.origin.clone(),
            ty: sv.ty,
        });
        values.push(sv.value.clone());
    }
    (entries, values)
}

/// Builds the constant pool. The default strategy is {0, -1, 1} as
/// ints, plus the real counterparts when the program declares any real
/// variable; the mined strategy adds every scalar numeric literal of
/// the program, deduplicated.
pub fn gather_constants(
    program: &TypedProgram,
    strategy: ConstantStrategy,
) -> Vec<(Value, ConstantOrigin)> {
    let mut pool: Vec<(Value, ConstantOrigin)> = vec![
        (Value::Int(0), ConstantOrigin::Default),
        (Value::Int(-1), ConstantOrigin::Default),
        (Value::Int(1), ConstantOrigin::Default),
    ];
    if program_has_real_scalar(program) {
        pool.push((Value::Real(0.0), ConstantOrigin::Default));
        pool.push((Value::Real(-1.0), ConstantOrigin::Default));
        pool.push((Value::Real(1.0), ConstantOrigin::Default));
    }
    if strategy == ConstantStrategy::Mined {
        let mut literals = Vec::new();
        for f in &program.program().functions {
            collect_literals_block(&f.body, &mut literals);
        }
        for v in literals {
            if !pool.iter().any(|(p, _)| p == &v) {
                pool.push((v, ConstantOrigin::Mined));
            }
        }
    }
    pool
}

fn program_has_real_scalar(program: &TypedProgram) -> bool {
    let mut found = false;
    for f in &program.program().functions {
        if f.params.iter().any(|p| p.ty == Type::Real) {
            found = true;
        }
    }
    program.program().for_each_statement(&mut |s| {
        if let crate::lang::StmtKind::Decl { ty: Type::Real, .. } = s.kind {
            found = true;
        }
    });
    found
}

fn collect_literals_block(block: &crate::lang::Block, out: &mut Vec<Value>) {
    use crate::lang::StmtKind;
    for s in &block.statements {
        match &s.kind {
            StmtKind::Decl { init, .. } => collect_literals_expr(init, out),
            StmtKind::Assign { target, value } => {
                if let crate::lang::LValue::Elem { index, .. } = target {
                    collect_literals_expr(index, out);
                }
                collect_literals_expr(value, out);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                collect_literals_expr(cond, out);
                collect_literals_block(then_block, out);
                if let Some(e) = else_block {
                    collect_literals_block(e, out);
                }
            }
            StmtKind::While { cond, body } => {
                collect_literals_expr(cond, out);
                collect_literals_block(body, out);
            }
            StmtKind::Return(e) => collect_literals_expr(e, out),
        }
    }
}

fn collect_literals_expr(e: &crate::lang::Expression, out: &mut Vec<Value>) {
    match &e.kind {
        ExprKind::Literal(v @ (Value::Int(_) | Value::Real(_))) => out.push(v.clone()),
        ExprKind::Literal(_) | ExprKind::Var(_) => {}
        ExprKind::Unary { operand, .. } => collect_literals_expr(operand, out),
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_literals_expr(lhs, out);
            collect_literals_expr(rhs, out);
        }
        ExprKind::Index { array, index } => {
            collect_literals_expr(array, out);
            collect_literals_expr(index, out);
        }
        ExprKind::Call { args, .. } => {
            for a in args {
                collect_literals_expr(a, out);
            }
        }
    }
}
