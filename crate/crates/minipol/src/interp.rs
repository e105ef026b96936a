//! Tree-walking interpreter with execution directives and
//! instrumentation hooks.
//!
//! A directive either forces one if-condition to a fixed boolean for
//! the whole execution or skips every dynamic occurrence of one
//! statement. Instrumentation records statement coverage always, and
//! captures scope snapshots at condition evaluations and statement
//! hits when enabled.
//!
//! Runtime semantics deliberately keep non-finite reals out of the
//! language: division by zero is a runtime error for both `int` and
//! `real`, and `int` arithmetic is checked 64-bit.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lang::{
    Builtin, ExprKind, Expression, LValue, NodeId, SourceLoc, Statement, StmtKind, Type,
    TypedProgram, UnaryOp, Value,
};

/// Absolute tolerance used when comparing real outputs to expectations.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// Evaluation-step budget per execution; guards non-termination when
/// while bodies are skipped.
pub const STEP_BUDGET: u64 = 1_000_000;

/// One input/expected-output record.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub name: String,
    pub function: String,
    pub inputs: Vec<Value>,
    pub expected: Value,
}

/// At most one directive applies per execution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directive {
    /// Every evaluation of the targeted if-condition yields `value`.
    ForceCondition { node_id: NodeId, value: bool },
    /// Every dynamic occurrence of the targeted statement is a no-op.
    SkipStatement { node_id: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    IndexOutOfBounds,
    IntegerOverflow,
    DivisionByZero,
    StepBudgetExhausted,
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuntimeErrorKind::IndexOutOfBounds => write!(f, "index out of bounds"),
            RuntimeErrorKind::IntegerOverflow => write!(f, "integer overflow"),
            RuntimeErrorKind::DivisionByZero => write!(f, "division by zero"),
            RuntimeErrorKind::StepBudgetExhausted => write!(f, "step budget exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestStatus {
    Pass,
    Fail {
        actual: Value,
    },
    RuntimeError {
        kind: RuntimeErrorKind,
        loc: SourceLoc,
    },
}

impl TestStatus {
    pub fn is_pass(&self) -> bool {
        matches!(self, TestStatus::Pass)
    }

    pub fn short(&self) -> &'static str {
        match self {
            TestStatus::Pass => "pass",
            TestStatus::Fail { .. } => "fail",
            TestStatus::RuntimeError { .. } => "error",
        }
    }
}

/// Where a collected value came from: a primitive variable, or the
/// length observer of an in-scope array.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InputOrigin {
    Var(String),
    ArrayLen(String),
}

impl InputOrigin {
    pub fn display_name(&self) -> String {
        match self {
            InputOrigin::Var(n) => n.clone(),
            InputOrigin::ArrayLen(a) => format!("len({a})"),
        }
    }
}

/// One entry of a scope snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotValue {
    pub origin: InputOrigin,
    pub ty: Type,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEval {
    pub node_id: NodeId,
    /// 1-based sequence index of this evaluation within the execution.
    pub seq: u32,
    pub outcome: bool,
    pub snapshot: Vec<SnapshotValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatementHit {
    pub node_id: NodeId,
    pub seq: u32,
    pub snapshot: Vec<SnapshotValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionRecord {
    pub status: TestStatus,
    pub covered_statements: BTreeSet<NodeId>,
    pub condition_evals: Vec<ConditionEval>,
    pub statement_hits: Vec<StatementHit>,
}

#[derive(Debug, Error)]
pub enum InterpError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("test `{test}`: function `{function}` takes {expected} inputs, got {got}")]
    ArityMismatch {
        test: String,
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("test `{test}`: input {index} has type {got}, expected {expected}")]
    InputTypeMismatch {
        test: String,
        index: usize,
        expected: Type,
        got: Type,
    },
    #[error("invalid directive: {0}")]
    InvalidDirective(String),
}

/// Runs one test, optionally under a directive.
///
/// The status is `Pass` iff the returned value equals the expected one
/// (reals within [`REAL_TOLERANCE`]). Runtime errors become statuses,
/// not `Err`s. With `instrument = false`, scope snapshots stay empty.
pub fn run_test(
    program: &TypedProgram,
    test: &TestCase,
    directive: Option<Directive>,
    instrument: bool,
) -> Result<ExecutionRecord, InterpError> {
    let func = program
        .program()
        .function(&test.function)
        .ok_or_else(|| InterpError::UnknownFunction(test.function.clone()))?;
    if func.params.len() != test.inputs.len() {
        return Err(InterpError::ArityMismatch {
            test: test.name.clone(),
            function: test.function.clone(),
            expected: func.params.len(),
            got: test.inputs.len(),
        });
    }
    for (i, (param, input)) in func.params.iter().zip(&test.inputs).enumerate() {
        if input.ty() != param.ty {
            return Err(InterpError::InputTypeMismatch {
                test: test.name.clone(),
                index: i,
                expected: param.ty,
                got: input.ty(),
            });
        }
    }
    validate_directive(program, directive)?;

    let mut exec = Exec {
        program,
        directive,
        instrument,
        env: vec![func
            .params
            .iter()
            .zip(&test.inputs)
            .map(|(p, v)| (p.name.clone(), v.clone()))
            .collect()],
        covered: BTreeSet::new(),
        condition_evals: Vec::new(),
        statement_hits: Vec::new(),
        seq: HashMap::new(),
        steps: 0,
    };

    let status = match exec.run_block_flow(&func.body) {
        Ok(Flow::Return(value)) => {
            if value.approx_eq(&test.expected, REAL_TOLERANCE) {
                TestStatus::Pass
            } else {
                TestStatus::Fail { actual: value }
            }
        }
        // The checker proves all paths return, so falling off the end can
        // only happen when a directive skipped the deciding statement.
        Ok(Flow::Continue) => TestStatus::RuntimeError {
            kind: RuntimeErrorKind::StepBudgetExhausted,
            loc: func.loc.clone(),
        },
        Err(e) => TestStatus::RuntimeError {
            kind: e.kind,
            loc: e.loc,
        },
    };

    Ok(ExecutionRecord {
        status,
        covered_statements: exec.covered,
        condition_evals: exec.condition_evals,
        statement_hits: exec.statement_hits,
    })
}

/// Runs the whole suite in order without directives or snapshots.
pub fn run_suite(
    program: &TypedProgram,
    suite: &[TestCase],
) -> Result<Vec<ExecutionRecord>, InterpError> {
    suite
        .iter()
        .map(|t| run_test(program, t, None, false))
        .collect()
}

fn validate_directive(
    program: &TypedProgram,
    directive: Option<Directive>,
) -> Result<(), InterpError> {
    match directive {
        None => Ok(()),
        Some(Directive::ForceCondition { node_id, .. }) => {
            if program.program().if_by_condition(node_id).is_some() {
                Ok(())
            } else {
                Err(InterpError::InvalidDirective(format!(
                    "node {node_id} is not an if-condition expression"
                )))
            }
        }
        Some(Directive::SkipStatement { node_id }) => match program.program().statement(node_id) {
            Some(s) if s.is_skippable() => Ok(()),
            Some(_) => Err(InterpError::InvalidDirective(format!(
                "statement {node_id} is a decl or return and cannot be skipped"
            ))),
            None => Err(InterpError::InvalidDirective(format!(
                "node {node_id} is not a statement"
            ))),
        },
    }
}

struct RtErr {
    kind: RuntimeErrorKind,
    loc: SourceLoc,
}

enum Flow {
    Continue,
    Return(Value),
}

struct Exec<'a> {
    program: &'a TypedProgram,
    directive: Option<Directive>,
    instrument: bool,
    env: Vec<Vec<(String, Value)>>,
    covered: BTreeSet<NodeId>,
    condition_evals: Vec<ConditionEval>,
    statement_hits: Vec<StatementHit>,
    seq: HashMap<NodeId, u32>,
    steps: u64,
}

impl<'a> Exec<'a> {
    fn step(&mut self, loc: &SourceLoc) -> Result<(), RtErr> {
        self.steps += 1;
        if self.steps > STEP_BUDGET {
            Err(RtErr {
                kind: RuntimeErrorKind::StepBudgetExhausted,
                loc: loc.clone(),
            })
        } else {
            Ok(())
        }
    }

    fn next_seq(&mut self, node_id: NodeId) -> u32 {
        let c = self.seq.entry(node_id).or_insert(0);
        *c += 1;
        *c
    }

    fn snapshot(&self) -> Vec<SnapshotValue> {
        let mut out = Vec::new();
        for frame in &self.env {
            for (name, value) in frame {
                match value {
                    Value::IntArray(xs) => out.push(SnapshotValue {
                        origin: InputOrigin::ArrayLen(name.clone()),
                        ty: Type::Int,
                        value: Value::Int(xs.len() as i64),
                    }),
                    Value::RealArray(xs) => out.push(SnapshotValue {
                        origin: InputOrigin::ArrayLen(name.clone()),
                        ty: Type::Int,
                        value: Value::Int(xs.len() as i64),
                    }),
                    primitive => out.push(SnapshotValue {
                        origin: InputOrigin::Var(name.clone()),
                        ty: primitive.ty(),
                        value: primitive.clone(),
                    }),
                }
            }
        }
        out
    }

    fn lookup(&self, name: &str) -> &Value {
        self.env
            .iter()
            .rev()
            .find_map(|f| f.iter().find(|(n, _)| n == name).map(|(_, v)| v))
            .expect("checker guarantees names resolve")
    }

    fn lookup_mut(&mut self, name: &str) -> &mut Value {
        self.env
            .iter_mut()
            .rev()
            .find_map(|f| f.iter_mut().find(|(n, _)| n == name).map(|(_, v)| v))
            .expect("checker guarantees names resolve")
    }

    fn run_block_flow(&mut self, block: &crate::lang::Block) -> Result<Flow, RtErr> {
        self.env.push(Vec::new());
        let mut flow = Flow::Continue;
        for stmt in &block.statements {
            match self.run_statement(stmt)? {
                Flow::Continue => {}
                Flow::Return(v) => {
                    flow = Flow::Return(v);
                    break;
                }
            }
        }
        self.env.pop();
        Ok(flow)
    }

    fn run_statement(&mut self, stmt: &Statement) -> Result<Flow, RtErr> {
        self.step(&stmt.loc)?;
        let id = stmt.loc.node_id;

        let skipped = matches!(
            self.directive,
            Some(Directive::SkipStatement { node_id }) if node_id == id
        );
        if self.instrument || skipped {
            let seq = self.next_seq(id);
            let snapshot = if self.instrument {
                self.snapshot()
            } else {
                Vec::new()
            };
            self.statement_hits.push(StatementHit {
                node_id: id,
                seq,
                snapshot,
            });
        }
        if skipped {
            // Skipped statements are no-ops and do not count as covered.
            return Ok(Flow::Continue);
        }
        self.covered.insert(id);

        match &stmt.kind {
            StmtKind::Decl { name, init, .. } => {
                let v = self.eval(init)?;
                self.env.last_mut().unwrap().push((name.clone(), v));
                Ok(Flow::Continue)
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                match target {
                    LValue::Var(name) => *self.lookup_mut(name) = v,
                    LValue::Elem { array, index } => {
                        let idx = match self.eval(index)? {
                            Value::Int(i) => i,
                            _ => unreachable!("checker: index is int"),
                        };
                        let loc = index.loc.clone();
                        let slot = self.lookup_mut(array);
                        let ok = match (slot, v) {
                            (Value::IntArray(xs), Value::Int(x)) => store(xs, idx, x),
                            (Value::RealArray(xs), Value::Real(x)) => store(xs, idx, x),
                            _ => unreachable!("checker: element type matches"),
                        };
                        if !ok {
                            return Err(RtErr {
                                kind: RuntimeErrorKind::IndexOutOfBounds,
                                loc,
                            });
                        }
                    }
                }
                Ok(Flow::Continue)
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let outcome = self.eval_condition(cond)?;
                if outcome {
                    self.run_block_flow(then_block)
                } else if let Some(e) = else_block {
                    self.run_block_flow(e)
                } else {
                    Ok(Flow::Continue)
                }
            }
            StmtKind::While { cond, body } => {
                loop {
                    self.step(&cond.loc)?;
                    let go = match self.eval(cond)? {
                        Value::Bool(b) => b,
                        _ => unreachable!("checker: condition is bool"),
                    };
                    if !go {
                        break;
                    }
                    if let Flow::Return(v) = self.run_block_flow(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
                Ok(Flow::Continue)
            }
            StmtKind::Return(e) => {
                let v = self.eval(e)?;
                Ok(Flow::Return(v))
            }
        }
    }

    /// Evaluates an if-condition, honoring a force directive and
    /// recording the evaluation. Conditions are pure, so a forced
    /// condition is not evaluated at all.
    fn eval_condition(&mut self, cond: &Expression) -> Result<bool, RtErr> {
        let id = cond.loc.node_id;
        let outcome = match self.directive {
            Some(Directive::ForceCondition { node_id, value }) if node_id == id => value,
            _ => match self.eval(cond)? {
                Value::Bool(b) => b,
                _ => unreachable!("checker: condition is bool"),
            },
        };
        let seq = self.next_seq(id);
        let snapshot = if self.instrument {
            self.snapshot()
        } else {
            Vec::new()
        };
        self.condition_evals.push(ConditionEval {
            node_id: id,
            seq,
            outcome,
            snapshot,
        });
        Ok(outcome)
    }

    fn eval(&mut self, e: &Expression) -> Result<Value, RtErr> {
        self.step(&e.loc)?;
        let value = match &e.kind {
            ExprKind::Literal(v) => v.clone(),
            ExprKind::Var(name) => self.lookup(name).clone(),
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand)?;
                match (op, v) {
                    (UnaryOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (UnaryOp::Neg, Value::Int(n)) => {
                        Value::Int(n.checked_neg().ok_or_else(|| RtErr {
                            kind: RuntimeErrorKind::IntegerOverflow,
                            loc: e.loc.clone(),
                        })?)
                    }
                    (UnaryOp::Neg, Value::Real(x)) => Value::Real(-x),
                    _ => unreachable!("checker: unary operand types"),
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                use crate::lang::BinaryOp::*;
                // Short-circuit boolean operators.
                if *op == And {
                    let l = self.eval_bool(lhs)?;
                    return Ok(Value::Bool(l && self.eval_bool(rhs)?));
                }
                if *op == Or {
                    let l = self.eval_bool(lhs)?;
                    return Ok(Value::Bool(l || self.eval_bool(rhs)?));
                }
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                let overflow = |res: Option<i64>| {
                    res.map(Value::Int).ok_or_else(|| RtErr {
                        kind: RuntimeErrorKind::IntegerOverflow,
                        loc: e.loc.clone(),
                    })
                };
                match (op, l, r) {
                    (Add, Value::Int(a), Value::Int(b)) => overflow(a.checked_add(b))?,
                    (Sub, Value::Int(a), Value::Int(b)) => overflow(a.checked_sub(b))?,
                    (Mul, Value::Int(a), Value::Int(b)) => overflow(a.checked_mul(b))?,
                    (Div, Value::Int(a), Value::Int(b)) => {
                        if b == 0 {
                            return Err(RtErr {
                                kind: RuntimeErrorKind::DivisionByZero,
                                loc: e.loc.clone(),
                            });
                        }
                        overflow(a.checked_div(b))?
                    }
                    (Add, Value::Real(a), Value::Real(b)) => Value::Real(a + b),
                    (Sub, Value::Real(a), Value::Real(b)) => Value::Real(a - b),
                    (Mul, Value::Real(a), Value::Real(b)) => Value::Real(a * b),
                    (Div, Value::Real(a), Value::Real(b)) => {
                        if b == 0.0 {
                            return Err(RtErr {
                                kind: RuntimeErrorKind::DivisionByZero,
                                loc: e.loc.clone(),
                            });
                        }
                        Value::Real(a / b)
                    }
                    (Lt, Value::Int(a), Value::Int(b)) => Value::Bool(a < b),
                    (Le, Value::Int(a), Value::Int(b)) => Value::Bool(a <= b),
                    (Gt, Value::Int(a), Value::Int(b)) => Value::Bool(a > b),
                    (Ge, Value::Int(a), Value::Int(b)) => Value::Bool(a >= b),
                    (Eq, Value::Int(a), Value::Int(b)) => Value::Bool(a == b),
                    (Ne, Value::Int(a), Value::Int(b)) => Value::Bool(a != b),
                    (Lt, Value::Real(a), Value::Real(b)) => Value::Bool(a < b),
                    (Le, Value::Real(a), Value::Real(b)) => Value::Bool(a <= b),
                    (Gt, Value::Real(a), Value::Real(b)) => Value::Bool(a > b),
                    (Ge, Value::Real(a), Value::Real(b)) => Value::Bool(a >= b),
                    (Eq, Value::Real(a), Value::Real(b)) => Value::Bool(a == b),
                    (Ne, Value::Real(a), Value::Real(b)) => Value::Bool(a != b),
                    _ => unreachable!("checker: binary operand types"),
                }
            }
            ExprKind::Index { array, index } => {
                let a = self.eval(array)?;
                let i = match self.eval(index)? {
                    Value::Int(i) => i,
                    _ => unreachable!("checker: index is int"),
                };
                let oob = RtErr {
                    kind: RuntimeErrorKind::IndexOutOfBounds,
                    loc: e.loc.clone(),
                };
                match a {
                    Value::IntArray(xs) => Value::Int(*fetch(&xs, i).ok_or(oob)?),
                    Value::RealArray(xs) => Value::Real(*fetch(&xs, i).ok_or(oob)?),
                    _ => unreachable!("checker: indexing an array"),
                }
            }
            ExprKind::Call { builtin, args } => {
                let v = self.eval(&args[0])?;
                match (builtin, v) {
                    (Builtin::Len, Value::IntArray(xs)) => Value::Int(xs.len() as i64),
                    (Builtin::Len, Value::RealArray(xs)) => Value::Int(xs.len() as i64),
                    (Builtin::Floor, Value::Real(x)) => Value::Real(x.floor()),
                    (Builtin::Int, Value::Real(x)) => {
                        let t = x.trunc();
                        if t >= -(2f64.powi(63)) && t < 2f64.powi(63) && t.is_finite() {
                            Value::Int(t as i64)
                        } else {
                            return Err(RtErr {
                                kind: RuntimeErrorKind::IntegerOverflow,
                                loc: e.loc.clone(),
                            });
                        }
                    }
                    (Builtin::Real, Value::Int(n)) => Value::Real(n as f64),
                    (Builtin::Sort, Value::IntArray(mut xs)) => {
                        xs.sort_unstable();
                        Value::IntArray(xs)
                    }
                    (Builtin::Sort, Value::RealArray(mut xs)) => {
                        xs.sort_by(f64::total_cmp);
                        Value::RealArray(xs)
                    }
                    _ => unreachable!("checker: builtin argument types"),
                }
            }
        };
        // Runtime type soundness: the tag must match the checked type.
        debug_assert_eq!(
            Some(value.ty()),
            self.program.expr_type(e.loc.node_id),
            "value tag diverged from static type at {}",
            e.loc
        );
        Ok(value)
    }

    fn eval_bool(&mut self, e: &Expression) -> Result<bool, RtErr> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            _ => unreachable!("checker: bool operand"),
        }
    }
}

fn fetch<T>(xs: &[T], i: i64) -> Option<&T> {
    usize::try_from(i).ok().and_then(|i| xs.get(i))
}

fn store<T>(xs: &mut [T], i: i64, v: T) -> bool {
    match usize::try_from(i).ok().and_then(|i| xs.get_mut(i)) {
        Some(slot) => {
            *slot = v;
            true
        }
        None => false,
    }
}
