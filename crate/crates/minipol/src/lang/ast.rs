//! AST for the mini-lang imperative language.
//!
//! Every node carries a [`SourceLoc`] with a `node_id` assigned in a
//! pre-order walk after parsing, so ids are unique, stable across
//! re-parses of identical text, and ascend in source order.

use std::fmt;
use std::sync::Arc;

/// Unique identifier of an AST node within one [`Program`].
pub type NodeId = u32;

/// Source position plus the node's stable id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: u32,
    pub col: u32,
    pub node_id: NodeId,
}

impl SourceLoc {
    pub fn new(file: Arc<str>, line: u32, col: u32) -> Self {
        SourceLoc {
            file,
            line,
            col,
            node_id: 0,
        }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

/// Element type of an array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElemType {
    Int,
    Real,
}

/// Static type of an expression or variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Bool,
    Int,
    Real,
    Array(ElemType),
}

impl Type {
    pub fn is_numeric(self) -> bool {
        matches!(self, Type::Int | Type::Real)
    }

    pub fn is_primitive(self) -> bool {
        !matches!(self, Type::Array(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "bool"),
            Type::Int => write!(f, "int"),
            Type::Real => write!(f, "real"),
            Type::Array(ElemType::Int) => write!(f, "array<int>"),
            Type::Array(ElemType::Real) => write!(f, "array<real>"),
        }
    }
}

/// Runtime value. The tag always matches the static type of the
/// producing expression once the program has been type-checked.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    IntArray(Vec<i64>),
    RealArray(Vec<f64>),
}

impl Value {
    pub fn ty(&self) -> Type {
        match self {
            Value::Bool(_) => Type::Bool,
            Value::Int(_) => Type::Int,
            Value::Real(_) => Type::Real,
            Value::IntArray(_) => Type::Array(ElemType::Int),
            Value::RealArray(_) => Type::Array(ElemType::Real),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Equality with an absolute tolerance on reals (elementwise for
    /// real arrays). Used for expected-output comparison in tests.
    pub fn approx_eq(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Real(a), Value::Real(b)) => (a - b).abs() <= tol,
            (Value::RealArray(a), Value::RealArray(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
            }
            _ => self == other,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Real(x) => write!(f, "{}", super::pretty::real_literal(*x)),
            Value::IntArray(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Value::RealArray(xs) => {
                write!(f, "[")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", super::pretty::real_literal(*x))?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn is_comparison(self) -> bool {
        use BinaryOp::*;
        matches!(self, Lt | Le | Gt | Ge | Eq | Ne)
    }

    pub fn is_arith(self) -> bool {
        use BinaryOp::*;
        matches!(self, Add | Sub | Mul | Div)
    }

    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            And => "&&",
            Or => "||",
        }
    }
}

/// The fixed built-in function set; calls never target user functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// len(array<T>) -> int
    Len,
    /// floor(real) -> real
    Floor,
    /// int(real) -> int, truncation toward zero
    Int,
    /// real(int) -> real
    Real,
    /// sort(array<T>) -> array<T>, pure sorted copy
    Sort,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Len => "len",
            Builtin::Floor => "floor",
            Builtin::Int => "int",
            Builtin::Real => "real",
            Builtin::Sort => "sort",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        match name {
            "len" => Some(Builtin::Len),
            "floor" => Some(Builtin::Floor),
            "int" => Some(Builtin::Int),
            "real" => Some(Builtin::Real),
            "sort" => Some(Builtin::Sort),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    pub kind: ExprKind,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Literal(Value),
    Var(String),
    Unary {
        op: UnaryOp,
        operand: Box<Expression>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expression>,
        rhs: Box<Expression>,
    },
    Index {
        array: Box<Expression>,
        index: Box<Expression>,
    },
    Call {
        builtin: Builtin,
        args: Vec<Expression>,
    },
}

/// Assignment target: a variable or one array element.
#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Var(String),
    Elem { array: String, index: Expression },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub kind: StmtKind,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl {
        name: String,
        ty: Type,
        init: Expression,
    },
    Assign {
        target: LValue,
        value: Expression,
    },
    If {
        cond: Expression,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expression,
        body: Block,
    },
    Return(Expression),
}

impl Statement {
    /// Statements eligible for the skip directive. Declarations would
    /// unbind a name and returns would break all-paths-return, so both
    /// are excluded.
    pub fn is_skippable(&self) -> bool {
        matches!(
            self.kind,
            StmtKind::Assign { .. } | StmtKind::If { .. } | StmtKind::While { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub statements: Vec<Statement>,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: Type,
    pub body: Block,
    pub loc: SourceLoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub functions: Vec<Function>,
    pub file: Arc<str>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Pre-order walk over every statement of every function.
    pub fn for_each_statement<'a>(&'a self, f: &mut impl FnMut(&'a Statement)) {
        fn walk_block<'a>(b: &'a Block, f: &mut impl FnMut(&'a Statement)) {
            for s in &b.statements {
                f(s);
                match &s.kind {
                    StmtKind::If {
                        then_block,
                        else_block,
                        ..
                    } => {
                        walk_block(then_block, f);
                        if let Some(e) = else_block {
                            walk_block(e, f);
                        }
                    }
                    StmtKind::While { body, .. } => walk_block(body, f),
                    _ => {}
                }
            }
        }
        for func in &self.functions {
            walk_block(&func.body, f);
        }
    }

    /// Find the statement with the given node id, if any.
    pub fn statement(&self, id: NodeId) -> Option<&Statement> {
        let mut found = None;
        self.for_each_statement(&mut |s| {
            if s.loc.node_id == id {
                found = Some(s);
            }
        });
        found
    }

    /// All if statements paired with the node id of their condition.
    pub fn if_conditions(&self) -> Vec<(&Statement, NodeId)> {
        let mut out = Vec::new();
        self.for_each_statement(&mut |s| {
            if let StmtKind::If { cond, .. } = &s.kind {
                out.push((s, cond.loc.node_id));
            }
        });
        out
    }

    /// The if statement owning the given condition node id.
    pub fn if_by_condition(&self, cond_id: NodeId) -> Option<&Statement> {
        self.if_conditions()
            .into_iter()
            .find(|(_, c)| *c == cond_id)
            .map(|(s, _)| s)
    }

    /// Largest node id in the program (0 for an empty program).
    pub fn max_node_id(&self) -> NodeId {
        let mut max = 0;
        visit_locs(self, &mut |loc| max = max.max(loc.node_id));
        max
    }
}

/// Visit the location of every node in pre-order.
pub(crate) fn visit_locs(program: &Program, f: &mut impl FnMut(&SourceLoc)) {
    fn expr(e: &Expression, f: &mut impl FnMut(&SourceLoc)) {
        f(&e.loc);
        match &e.kind {
            ExprKind::Literal(_) | ExprKind::Var(_) => {}
            ExprKind::Unary { operand, .. } => expr(operand, f),
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(lhs, f);
                expr(rhs, f);
            }
            ExprKind::Index { array, index } => {
                expr(array, f);
                expr(index, f);
            }
            ExprKind::Call { args, .. } => {
                for a in args {
                    expr(a, f);
                }
            }
        }
    }
    fn stmt(s: &Statement, f: &mut impl FnMut(&SourceLoc)) {
        f(&s.loc);
        match &s.kind {
            StmtKind::Decl { init, .. } => expr(init, f),
            StmtKind::Assign { target, value } => {
                if let LValue::Elem { index, .. } = target {
                    expr(index, f);
                }
                expr(value, f);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                expr(cond, f);
                block(then_block, f);
                if let Some(e) = else_block {
                    block(e, f);
                }
            }
            StmtKind::While { cond, body } => {
                expr(cond, f);
                block(body, f);
            }
            StmtKind::Return(e) => expr(e, f),
        }
    }
    fn block(b: &Block, f: &mut impl FnMut(&SourceLoc)) {
        f(&b.loc);
        for s in &b.statements {
            stmt(s, f);
        }
    }
    for func in &program.functions {
        f(&func.loc);
        for p in &func.params {
            f(&p.loc);
        }
        block(&func.body, f);
    }
}

/// Re-assign node ids in pre-order. Called once at the end of parsing;
/// also used after patching to keep ids unique.
pub(crate) fn renumber(program: &mut Program) {
    fn expr(e: &mut Expression, next: &mut NodeId) {
        e.loc.node_id = *next;
        *next += 1;
        match &mut e.kind {
            ExprKind::Literal(_) | ExprKind::Var(_) => {}
            ExprKind::Unary { operand, .. } => expr(operand, next),
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(lhs, next);
                expr(rhs, next);
            }
            ExprKind::Index { array, index } => {
                expr(array, next);
                expr(index, next);
            }
            ExprKind::Call { args, .. } => {
                for a in args {
                    expr(a, next);
                }
            }
        }
    }
    fn stmt(s: &mut Statement, next: &mut NodeId) {
        s.loc.node_id = *next;
        *next += 1;
        match &mut s.kind {
            StmtKind::Decl { init, .. } => expr(init, next),
            StmtKind::Assign { target, value } => {
                if let LValue::Elem { index, .. } = target {
                    expr(index, next);
                }
                expr(value, next);
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                expr(cond, next);
                block(then_block, next);
                if let Some(e) = else_block {
                    block(e, next);
                }
            }
            StmtKind::While { cond, body } => {
                expr(cond, next);
                block(body, next);
            }
            StmtKind::Return(e) => expr(e, next),
        }
    }
    fn block(b: &mut Block, next: &mut NodeId) {
        b.loc.node_id = *next;
        *next += 1;
        for s in &mut b.statements {
            stmt(s, next);
        }
    }
    let mut next: NodeId = 0;
    for func in &mut program.functions {
        func.loc.node_id = next;
        next += 1;
        for p in &mut func.params {
            p.loc.node_id = next;
            next += 1;
        }
        block(&mut func.body, &mut next);
    }
}
