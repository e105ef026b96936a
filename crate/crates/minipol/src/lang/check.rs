//! Type checker. Annotates every expression with its type (kept in a
//! side table keyed by node id) and verifies that all paths return.

use std::collections::HashMap;

use super::ast::*;
use super::TypeError;

/// Signature of a mini-lang function.
#[derive(Debug, Clone, PartialEq)]
pub struct FnSig {
    pub params: Vec<(String, Type)>,
    pub return_type: Type,
}

/// A program that passed the checker, with the expression-type table.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    program: Program,
    expr_types: HashMap<NodeId, Type>,
}

impl TypedProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn file(&self) -> &str {
        &self.program.file
    }

    /// Static type of the expression with the given node id.
    pub fn expr_type(&self, id: NodeId) -> Option<Type> {
        self.expr_types.get(&id).copied()
    }

    pub fn signature(&self, function: &str) -> Option<FnSig> {
        self.program.function(function).map(|f| FnSig {
            params: f.params.iter().map(|p| (p.name.clone(), p.ty)).collect(),
            return_type: f.return_type,
        })
    }
}

pub fn type_check(program: Program) -> Result<TypedProgram, Vec<TypeError>> {
    let mut cx = Checker {
        expr_types: HashMap::new(),
        errors: Vec::new(),
    };
    for func in &program.functions {
        cx.function(func);
    }
    if cx.errors.is_empty() {
        Ok(TypedProgram {
            program,
            expr_types: cx.expr_types,
        })
    } else {
        Err(cx.errors)
    }
}

struct Checker {
    expr_types: HashMap<NodeId, Type>,
    errors: Vec<TypeError>,
}

struct Scope {
    // (name, type) per lexical frame; no shadowing anywhere in a function.
    frames: Vec<Vec<(String, Type)>>,
}

impl Scope {
    fn lookup(&self, name: &str) -> Option<Type> {
        self.frames
            .iter()
            .rev()
            .find_map(|f| f.iter().find(|(n, _)| n == name).map(|(_, t)| *t))
    }

    fn declared_anywhere(&self, name: &str) -> bool {
        self.frames.iter().any(|f| f.iter().any(|(n, _)| n == name))
    }
}

impl Checker {
    fn err(&mut self, loc: &SourceLoc, msg: impl Into<String>) {
        self.errors.push(TypeError {
            file: loc.file.to_string(),
            line: loc.line,
            col: loc.col,
            msg: msg.into(),
        });
    }

    fn function(&mut self, func: &Function) {
        let mut scope = Scope {
            frames: vec![Vec::new()],
        };
        for p in &func.params {
            if scope.declared_anywhere(&p.name) {
                self.err(&p.loc, format!("duplicate parameter `{}`", p.name));
            }
            scope.frames[0].push((p.name.clone(), p.ty));
        }
        let returns = self.block(&func.body, &mut scope, func.return_type);
        if !returns {
            self.err(
                &func.loc,
                format!("function `{}` has a path without a return", func.name),
            );
        }
    }

    /// Checks a block; returns true when every path through it returns.
    fn block(&mut self, block: &Block, scope: &mut Scope, ret: Type) -> bool {
        scope.frames.push(Vec::new());
        let mut returns = false;
        for stmt in &block.statements {
            returns |= self.statement(stmt, scope, ret);
        }
        scope.frames.pop();
        returns
    }

    fn statement(&mut self, stmt: &Statement, scope: &mut Scope, ret: Type) -> bool {
        match &stmt.kind {
            StmtKind::Decl { name, ty, init } => {
                if let Some(found) = self.expression(init, scope) {
                    if found != *ty {
                        self.err(
                            &init.loc,
                            format!("initializer has type {found}, expected {ty}"),
                        );
                    }
                }
                if scope.declared_anywhere(name) {
                    self.err(&stmt.loc, format!("`{name}` shadows an existing name"));
                } else {
                    scope.frames.last_mut().unwrap().push((name.clone(), *ty));
                }
                false
            }
            StmtKind::Assign { target, value } => {
                let value_ty = self.expression(value, scope);
                match target {
                    LValue::Var(name) => match scope.lookup(name) {
                        None => self.err(&stmt.loc, format!("unknown name `{name}`")),
                        Some(t) => {
                            if let Some(v) = value_ty {
                                if v != t {
                                    self.err(
                                        &value.loc,
                                        format!("cannot assign {v} to `{name}` of type {t}"),
                                    );
                                }
                            }
                        }
                    },
                    LValue::Elem { array, index } => {
                        let idx_ty = self.expression(index, scope);
                        if let Some(t) = idx_ty {
                            if t != Type::Int {
                                self.err(
                                    &index.loc,
                                    format!("array index has type {t}, expected int"),
                                );
                            }
                        }
                        match scope.lookup(array) {
                            None => self.err(&stmt.loc, format!("unknown name `{array}`")),
                            Some(Type::Array(elem)) => {
                                let want = match elem {
                                    ElemType::Int => Type::Int,
                                    ElemType::Real => Type::Real,
                                };
                                if let Some(v) = value_ty {
                                    if v != want {
                                        self.err(
                                            &value.loc,
                                            format!("cannot store {v} into array of {want}"),
                                        );
                                    }
                                }
                            }
                            Some(t) => {
                                self.err(&stmt.loc, format!("`{array}` has type {t}, not an array"))
                            }
                        }
                    }
                }
                false
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                if let Some(t) = self.expression(cond, scope) {
                    if t != Type::Bool {
                        self.err(&cond.loc, "condition must be bool");
                    }
                }
                let then_ret = self.block(then_block, scope, ret);
                match else_block {
                    Some(e) => {
                        let else_ret = self.block(e, scope, ret);
                        then_ret && else_ret
                    }
                    None => false,
                }
            }
            StmtKind::While { cond, body } => {
                if let Some(t) = self.expression(cond, scope) {
                    if t != Type::Bool {
                        self.err(&cond.loc, "condition must be bool");
                    }
                }
                self.block(body, scope, ret);
                false
            }
            StmtKind::Return(e) => {
                if let Some(t) = self.expression(e, scope) {
                    if t != ret {
                        self.err(&e.loc, format!("returning {t}, function returns {ret}"));
                    }
                }
                true
            }
        }
    }

    fn expression(&mut self, e: &Expression, scope: &Scope) -> Option<Type> {
        let ty = self.infer(e, scope)?;
        self.expr_types.insert(e.loc.node_id, ty);
        Some(ty)
    }

    fn infer(&mut self, e: &Expression, scope: &Scope) -> Option<Type> {
        match &e.kind {
            ExprKind::Literal(v) => Some(v.ty()),
            ExprKind::Var(name) => {
                let t = scope.lookup(name);
                if t.is_none() {
                    self.err(&e.loc, format!("unknown name `{name}`"));
                }
                t
            }
            ExprKind::Unary { op, operand } => {
                let t = self.expression(operand, scope)?;
                match op {
                    UnaryOp::Not => {
                        if t == Type::Bool {
                            Some(Type::Bool)
                        } else {
                            self.err(&e.loc, format!("`!` needs bool, found {t}"));
                            None
                        }
                    }
                    UnaryOp::Neg => {
                        if t.is_numeric() {
                            Some(t)
                        } else {
                            self.err(&e.loc, format!("unary `-` needs int or real, found {t}"));
                            None
                        }
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let lt = self.expression(lhs, scope);
                let rt = self.expression(rhs, scope);
                let (lt, rt) = (lt?, rt?);
                if *op == BinaryOp::And || *op == BinaryOp::Or {
                    if lt != Type::Bool || rt != Type::Bool {
                        self.err(
                            &e.loc,
                            format!("`{}` needs bool operands, found {lt} and {rt}", op.symbol()),
                        );
                        return None;
                    }
                    return Some(Type::Bool);
                }
                if lt != rt || !lt.is_numeric() {
                    self.err(
                        &e.loc,
                        format!(
                            "`{}` needs two ints or two reals, found {lt} and {rt}",
                            op.symbol()
                        ),
                    );
                    return None;
                }
                if op.is_comparison() {
                    Some(Type::Bool)
                } else {
                    Some(lt)
                }
            }
            ExprKind::Index { array, index } => {
                let at = self.expression(array, scope);
                let it = self.expression(index, scope);
                if let Some(t) = it {
                    if t != Type::Int {
                        self.err(
                            &index.loc,
                            format!("array index has type {t}, expected int"),
                        );
                    }
                }
                match at? {
                    Type::Array(ElemType::Int) => Some(Type::Int),
                    Type::Array(ElemType::Real) => Some(Type::Real),
                    t => {
                        self.err(&array.loc, format!("cannot index into {t}"));
                        None
                    }
                }
            }
            ExprKind::Call { builtin, args } => {
                if args.len() != 1 {
                    self.err(
                        &e.loc,
                        format!("`{}` takes exactly one argument", builtin.name()),
                    );
                    for a in args {
                        self.expression(a, scope);
                    }
                    return None;
                }
                let at = self.expression(&args[0], scope)?;
                match builtin {
                    Builtin::Len => match at {
                        Type::Array(_) => Some(Type::Int),
                        t => {
                            self.err(&e.loc, format!("`len` needs an array, found {t}"));
                            None
                        }
                    },
                    Builtin::Floor => {
                        if at == Type::Real {
                            Some(Type::Real)
                        } else {
                            self.err(&e.loc, format!("`floor` needs real, found {at}"));
                            None
                        }
                    }
                    Builtin::Int => {
                        if at == Type::Real {
                            Some(Type::Int)
                        } else {
                            self.err(&e.loc, format!("`int` needs real, found {at}"));
                            None
                        }
                    }
                    Builtin::Real => {
                        if at == Type::Int {
                            Some(Type::Real)
                        } else {
                            self.err(&e.loc, format!("`real` needs int, found {at}"));
                            None
                        }
                    }
                    Builtin::Sort => match at {
                        Type::Array(_) => Some(at),
                        t => {
                            self.err(&e.loc, format!("`sort` needs an array, found {t}"));
                            None
                        }
                    },
                }
            }
        }
    }
}

/// Type-check one expression against an ambient set of variable types.
/// Used to validate synthesized patch expressions on their own.
pub fn check_expression(
    expr: &Expression,
    vars: &[(String, Type)],
) -> Result<Type, Vec<TypeError>> {
    let mut cx = Checker {
        expr_types: HashMap::new(),
        errors: Vec::new(),
    };
    let scope = Scope {
        frames: vec![vars.to_vec()],
    };
    let ty = cx.expression(expr, &scope);
    match (ty, cx.errors.is_empty()) {
        (Some(t), true) => Ok(t),
        _ => Err(cx.errors),
    }
}
