//! Building blocks: the operator instances available for wiring into a
//! synthesized expression.
//!
//! `>=` and `>` are not blocks; `a >= b` is `b <= a` by symmetry.
//! Division is excluded to avoid division-by-zero cases in patches.
//! Levels escalate the multiset: comparisons, then logic, then
//! additive arithmetic, then multiplication, then two instances of
//! everything.

use crate::lang::{Type, Value};
use crate::trace::SchemaEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockOp {
    Lt,
    Le,
    Eq,
    Ne,
    And,
    Or,
    Not,
    Add,
    Sub,
    Mul,
}

impl BlockOp {
    pub fn is_comparison(self) -> bool {
        matches!(self, BlockOp::Lt | BlockOp::Le | BlockOp::Eq | BlockOp::Ne)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, BlockOp::And | BlockOp::Or | BlockOp::Not)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BlockOp::Lt => "<",
            BlockOp::Le => "<=",
            BlockOp::Eq => "==",
            BlockOp::Ne => "!=",
            BlockOp::And => "&&",
            BlockOp::Or => "||",
            BlockOp::Not => "!",
            BlockOp::Add => "+",
            BlockOp::Sub => "-",
            BlockOp::Mul => "*",
        }
    }
}

/// One operator instance. `operand_ty` is the comparison/arithmetic
/// operand type, or Bool for logic blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildingBlock {
    pub id: usize,
    pub op: BlockOp,
    pub operand_ty: Type,
}

impl BuildingBlock {
    pub fn arity(&self) -> usize {
        if self.op == BlockOp::Not {
            1
        } else {
            2
        }
    }

    pub fn input_type(&self) -> Type {
        self.operand_ty
    }

    pub fn output_type(&self) -> Type {
        if self.op.is_comparison() || self.op.is_logic() {
            Type::Bool
        } else {
            self.operand_ty
        }
    }

    /// Total over in-range values; `None` signals 64-bit overflow, which
    /// makes the candidate fail the row (the interpreter would raise the
    /// same overflow at run time).
    pub fn eval(&self, args: &[Value]) -> Option<Value> {
        use BlockOp::*;
        Some(match (self.op, args) {
            (Not, [Value::Bool(a)]) => Value::Bool(!a),
            (And, [Value::Bool(a), Value::Bool(b)]) => Value::Bool(*a && *b),
            (Or, [Value::Bool(a), Value::Bool(b)]) => Value::Bool(*a || *b),
            (Lt, [Value::Int(a), Value::Int(b)]) => Value::Bool(a < b),
            (Le, [Value::Int(a), Value::Int(b)]) => Value::Bool(a <= b),
            (Eq, [Value::Int(a), Value::Int(b)]) => Value::Bool(a == b),
            (Ne, [Value::Int(a), Value::Int(b)]) => Value::Bool(a != b),
            (Lt, [Value::Real(a), Value::Real(b)]) => Value::Bool(a < b),
            (Le, [Value::Real(a), Value::Real(b)]) => Value::Bool(a <= b),
            (Eq, [Value::Real(a), Value::Real(b)]) => Value::Bool(a == b),
            (Ne, [Value::Real(a), Value::Real(b)]) => Value::Bool(a != b),
            (Add, [Value::Int(a), Value::Int(b)]) => Value::Int(a.checked_add(*b)?),
            (Sub, [Value::Int(a), Value::Int(b)]) => Value::Int(a.checked_sub(*b)?),
            (Mul, [Value::Int(a), Value::Int(b)]) => Value::Int(a.checked_mul(*b)?),
            (Add, [Value::Real(a), Value::Real(b)]) => Value::Real(a + b),
            (Sub, [Value::Real(a), Value::Real(b)]) => Value::Real(a - b),
            (Mul, [Value::Real(a), Value::Real(b)]) => Value::Real(a * b),
            _ => unreachable!("block applied to wrong operand types"),
        })
    }
}

pub const MAX_LEVEL: u8 = 5;

/// Block multiset for a level. Comparison and arithmetic instances
/// exist per numeric type present in the schema, in order of first
/// appearance, so the earliest-typed operands are wired first.
pub fn build_components(level: u8, schema: &[SchemaEntry]) -> Vec<BuildingBlock> {
    assert!(level <= MAX_LEVEL, "level out of range");
    let mut numeric_types: Vec<Type> = Vec::new();
    for entry in schema {
        if entry.ty.is_numeric() && !numeric_types.contains(&entry.ty) {
            numeric_types.push(entry.ty);
        }
    }

    let mut ops: Vec<(BlockOp, Type)> = Vec::new();
    if level >= 1 {
        for &ty in &numeric_types {
            for op in [BlockOp::Lt, BlockOp::Le, BlockOp::Eq, BlockOp::Ne] {
                ops.push((op, ty));
            }
        }
    }
    if level >= 2 {
        for op in [BlockOp::And, BlockOp::Or, BlockOp::Not] {
            ops.push((op, Type::Bool));
        }
    }
    if level >= 3 {
        for &ty in &numeric_types {
            for op in [BlockOp::Add, BlockOp::Sub] {
                ops.push((op, ty));
            }
        }
    }
    if level >= 4 {
        for &ty in &numeric_types {
            ops.push((BlockOp::Mul, ty));
        }
    }
    if level >= 5 {
        let base = ops.clone();
        ops.extend(base);
    }

    ops.into_iter()
        .enumerate()
        .map(|(id, (op, operand_ty))| BuildingBlock { id, op, operand_ty })
        .collect()
}
