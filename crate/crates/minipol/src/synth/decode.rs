//! Model decoding: backward traversal from the output location.
//!
//! Blocks that are wired but unreachable from the result are dropped.
//! Length observers decode back to `len(array)` calls. The produced
//! expression carries placeholder locations; patch application assigns
//! real ones.

use std::sync::Arc;

use thiserror::Error;

use crate::interp::InputOrigin;
use crate::lang::{BinaryOp, Builtin, ExprKind, Expression, SourceLoc, UnaryOp};

use super::blocks::BlockOp;
use super::system::{ConstraintSystem, I0Element, LocVar, Model};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("model has no value for {0}")]
    Missing(String),
    #[error("location {0} resolves to no element")]
    Dangling(usize),
    #[error("wiring contains a cycle through location {0}")]
    Cyclic(usize),
}

pub fn decode(model: &Model, system: &ConstraintSystem) -> Result<Expression, DecodeError> {
    let result_pos = model
        .get(LocVar::Result)
        .ok_or_else(|| DecodeError::Missing("l_r".into()))?;
    let mut on_path = vec![false; system.m() + 2];
    resolve(result_pos, model, system, &mut on_path)
}

fn resolve(
    pos: usize,
    model: &Model,
    system: &ConstraintSystem,
    on_path: &mut Vec<bool>,
) -> Result<Expression, DecodeError> {
    if pos == 0 || pos > system.m() {
        return Err(DecodeError::Dangling(pos));
    }
    if pos <= system.i0_len() {
        return Ok(i0_expression(&system.i0[pos - 1]));
    }
    if on_path[pos] {
        return Err(DecodeError::Cyclic(pos));
    }
    on_path[pos] = true;

    let (k, block) = system
        .blocks
        .iter()
        .enumerate()
        .find(|(k, _)| model.get(LocVar::BlockOut(*k)) == Some(pos))
        .ok_or(DecodeError::Dangling(pos))?;

    let mut args = Vec::with_capacity(block.arity());
    for j in 0..block.arity() {
        let src = model
            .get(LocVar::BlockIn(k, j))
            .ok_or_else(|| DecodeError::Missing(LocVar::BlockIn(k, j).smt_name()))?;
        args.push(resolve(src, model, system, on_path)?);
    }
    on_path[pos] = false;

    let kind = match block.op {
        BlockOp::Not => ExprKind::Unary {
            op: UnaryOp::Not,
            operand: Box::new(args.pop().unwrap()),
        },
        op => {
            let rhs = Box::new(args.pop().unwrap());
            let lhs = Box::new(args.pop().unwrap());
            ExprKind::Binary {
                op: binary_op(op),
                lhs,
                rhs,
            }
        }
    };
    Ok(Expression {
        kind,
        loc: synthetic_loc(),
    })
}

fn binary_op(op: BlockOp) -> BinaryOp {
    match op {
        BlockOp::Lt => BinaryOp::Lt,
        BlockOp::Le => BinaryOp::Le,
        BlockOp::Eq => BinaryOp::Eq,
        BlockOp::Ne => BinaryOp::Ne,
        BlockOp::And => BinaryOp::And,
        BlockOp::Or => BinaryOp::Or,
        BlockOp::Add => BinaryOp::Add,
        BlockOp::Sub => BinaryOp::Sub,
        BlockOp::Mul => BinaryOp::Mul,
        BlockOp::Not => unreachable!("not is unary"),
    }
}

fn i0_expression(element: &I0Element) -> Expression {
    let kind = match element {
        I0Element::Constant(v) => ExprKind::Literal(v.clone()),
        I0Element::Input(entry) => match &entry.origin {
            InputOrigin::Var(name) => ExprKind::Var(name.clone()),
            InputOrigin::ArrayLen(array) => ExprKind::Call {
                builtin: Builtin::Len,
                args: vec![Expression {
                    kind: ExprKind::Var(array.clone()),
                    loc: synthetic_loc(),
                }],
            },
        },
    };
    Expression {
        kind,
        loc: synthetic_loc(),
    }
}

fn synthetic_loc() -> SourceLoc {
    SourceLoc::new(Arc::from("<synthesized>"), 1, 1)
}
