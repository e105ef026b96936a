//! Deterministic pretty-printer. Emits the minimal parentheses needed
//! so that parsing the output reproduces the same structure.

use std::fmt::Write;

use super::ast::*;

/// Binding strength used for parenthesisation. Higher binds tighter.
fn level(op: BinaryOp) -> u8 {
    use BinaryOp::*;
    match op {
        Or => 1,
        And => 2,
        Lt | Le | Gt | Ge | Eq | Ne => 3,
        Add | Sub => 4,
        Mul | Div => 5,
    }
}

const UNARY_LEVEL: u8 = 6;

pub fn pretty_expr(e: &Expression) -> String {
    let mut s = String::new();
    expr(&mut s, e, 0);
    s
}

/// Renders a statement at the given indentation depth.
pub fn pretty_stmt(stmt: &Statement, indent: usize) -> String {
    let mut s = String::new();
    statement(&mut s, stmt, indent);
    s
}

pub fn pretty_program(p: &Program) -> String {
    let mut s = String::new();
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        function(&mut s, f);
    }
    s
}

fn function(s: &mut String, f: &Function) {
    write!(s, "fn {}(", f.name).unwrap();
    for (i, p) in f.params.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        write!(s, "{}: {}", p.name, p.ty).unwrap();
    }
    writeln!(s, ") -> {} {{", f.return_type).unwrap();
    for stmt in &f.body.statements {
        statement(s, stmt, 1);
    }
    s.push_str("}\n");
}

fn pad(s: &mut String, indent: usize) {
    for _ in 0..indent {
        s.push_str("    ");
    }
}

fn statement(s: &mut String, stmt: &Statement, indent: usize) {
    pad(s, indent);
    match &stmt.kind {
        StmtKind::Decl { name, ty, init } => {
            write!(s, "let {name}: {ty} = ").unwrap();
            expr(s, init, 0);
            s.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            match target {
                LValue::Var(name) => s.push_str(name),
                LValue::Elem { array, index } => {
                    s.push_str(array);
                    s.push('[');
                    expr(s, index, 0);
                    s.push(']');
                }
            }
            s.push_str(" = ");
            expr(s, value, 0);
            s.push_str(";\n");
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            s.push_str("if (");
            expr(s, cond, 0);
            s.push_str(") {\n");
            for st in &then_block.statements {
                statement(s, st, indent + 1);
            }
            pad(s, indent);
            s.push('}');
            if let Some(e) = else_block {
                s.push_str(" else {\n");
                for st in &e.statements {
                    statement(s, st, indent + 1);
                }
                pad(s, indent);
                s.push('}');
            }
            s.push('\n');
        }
        StmtKind::While { cond, body } => {
            s.push_str("while (");
            expr(s, cond, 0);
            s.push_str(") {\n");
            for st in &body.statements {
                statement(s, st, indent + 1);
            }
            pad(s, indent);
            s.push_str("}\n");
        }
        StmtKind::Return(e) => {
            s.push_str("return ");
            expr(s, e, 0);
            s.push_str(";\n");
        }
    }
}

/// `min_level` is the loosest binding allowed without parentheses.
fn expr(s: &mut String, e: &Expression, min_level: u8) {
    match &e.kind {
        ExprKind::Literal(v) => write!(s, "{v}").unwrap(),
        ExprKind::Var(name) => s.push_str(name),
        ExprKind::Unary { op, operand } => {
            let parens = UNARY_LEVEL < min_level;
            if parens {
                s.push('(');
            }
            let sym = match op {
                UnaryOp::Not => '!',
                UnaryOp::Neg => '-',
            };
            s.push(sym);
            // Parenthesise nested unary so `- -x` never re-lexes oddly.
            let inner_needs = matches!(operand.kind, ExprKind::Unary { .. });
            if inner_needs {
                s.push('(');
                expr(s, operand, 0);
                s.push(')');
            } else {
                expr(s, operand, UNARY_LEVEL);
            }
            if parens {
                s.push(')');
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let my = level(*op);
            let parens = my < min_level;
            if parens {
                s.push('(');
            }
            // Left-associative: the left child may sit at the same level,
            // the right child must bind strictly tighter.
            expr(s, lhs, my);
            write!(s, " {} ", op.symbol()).unwrap();
            expr(s, rhs, my + 1);
            if parens {
                s.push(')');
            }
        }
        ExprKind::Index { array, index } => {
            expr(s, array, UNARY_LEVEL + 1);
            s.push('[');
            expr(s, index, 0);
            s.push(']');
        }
        ExprKind::Call { builtin, args } => {
            s.push_str(builtin.name());
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                expr(s, a, 0);
            }
            s.push(')');
        }
    }
}

/// Real literal with the mandatory dot, exact round-trip through the
/// parser. Falls back to a full decimal expansion for values whose
/// shortest form would need an exponent.
pub fn real_literal(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('.') && !s.contains('e') && !s.contains('E') {
        return s;
    }
    let mut s = format!("{x:.340}");
    while s.ends_with('0') && !s.ends_with(".0") {
        s.pop();
    }
    s
}
