//! Recursive-descent parser for mini-lang.
//!
//! Precedence, loosest to tightest: `||` < `&&` < comparisons < `+ -`
//! < `* /` < unary `! -` < postfix index/call.

use std::sync::Arc;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;

pub fn parse_program(source: &str, file: &str) -> Result<Program, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        file: Arc::from(file),
    };
    let mut functions = Vec::new();
    while !p.at_end() {
        functions.push(p.function()?);
    }
    if functions.is_empty() {
        return Err(ParseError::syntax(1, 1, "no functions"));
    }
    for (i, f) in functions.iter().enumerate() {
        if functions[..i].iter().any(|g| g.name == f.name) {
            return Err(ParseError::syntax(
                f.loc.line,
                f.loc.col,
                format!("duplicate function name `{}`", f.name),
            ));
        }
    }
    let mut program = Program {
        functions,
        file: Arc::from(file),
    };
    // Ids are assigned in a single pre-order pass so that they ascend in
    // source order and re-parses of identical text agree.
    renumber(&mut program);
    Ok(program)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    file: Arc<str>,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.tokens
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .or_else(|| self.tokens.last().map(|t| (t.line, t.col)))
            .unwrap_or((1, 1))
    }

    fn loc(&self) -> SourceLoc {
        let (line, col) = self.here();
        SourceLoc::new(self.file.clone(), line, col)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::syntax(line, col, msg)
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        match self.tokens.get(self.pos) {
            Some(t) if t.tok == want => Ok(self.advance().unwrap()),
            Some(t) => Err(ParseError::syntax(
                t.line,
                t.col,
                format!("expected {}, found {}", want.describe(), t.tok.describe()),
            )),
            None => Err(self.error(format!("expected {}, found end of input", want.describe()))),
        }
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek() == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, SourceLoc), ParseError> {
        let loc = self.loc();
        match self.advance() {
            Some(Token {
                tok: Tok::Ident(s), ..
            }) => Ok((s, loc)),
            Some(t) => Err(ParseError::syntax(
                t.line,
                t.col,
                format!("expected identifier, found {}", t.tok.describe()),
            )),
            None => Err(self.error("expected identifier, found end of input")),
        }
    }

    fn function(&mut self) -> Result<Function, ParseError> {
        let loc = self.loc();
        self.expect(Tok::KwFn)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let ploc = self.loc();
                let (pname, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                params.push(Param {
                    name: pname,
                    ty,
                    loc: ploc,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Arrow)?;
        let return_type = self.ty()?;
        let body = self.block()?;
        Ok(Function {
            name,
            params,
            return_type,
            body,
            loc,
        })
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        match self.advance() {
            Some(Token {
                tok: Tok::KwBool, ..
            }) => Ok(Type::Bool),
            Some(Token {
                tok: Tok::KwInt, ..
            }) => Ok(Type::Int),
            Some(Token {
                tok: Tok::KwReal, ..
            }) => Ok(Type::Real),
            Some(Token {
                tok: Tok::KwArray, ..
            }) => {
                self.expect(Tok::Lt)?;
                let elem = match self.advance() {
                    Some(Token {
                        tok: Tok::KwInt, ..
                    }) => ElemType::Int,
                    Some(Token {
                        tok: Tok::KwReal, ..
                    }) => ElemType::Real,
                    _ => return Err(self.error("array element type must be int or real")),
                };
                self.expect(Tok::Gt)?;
                Ok(Type::Array(elem))
            }
            Some(t) => Err(ParseError::syntax(
                t.line,
                t.col,
                format!("expected type, found {}", t.tok.describe()),
            )),
            None => Err(self.error("expected type, found end of input")),
        }
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        let loc = self.loc();
        self.expect(Tok::LBrace)?;
        let mut statements = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            if self.at_end() {
                return Err(self.error("unterminated block, expected `}`"));
            }
            statements.push(self.statement()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(Block { statements, loc })
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let loc = self.loc();
        match self.peek() {
            Some(Tok::KwLet) => {
                self.advance();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                self.expect(Tok::Assign)?;
                let init = self.expression()?;
                self.expect(Tok::Semi)?;
                Ok(Statement {
                    kind: StmtKind::Decl { name, ty, init },
                    loc,
                })
            }
            Some(Tok::KwIf) => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expression()?;
                self.expect(Tok::RParen)?;
                let then_block = self.block()?;
                let else_block = if self.eat(&Tok::KwElse) {
                    Some(self.block()?)
                } else {
                    None
                };
                Ok(Statement {
                    kind: StmtKind::If {
                        cond,
                        then_block,
                        else_block,
                    },
                    loc,
                })
            }
            Some(Tok::KwWhile) => {
                self.advance();
                self.expect(Tok::LParen)?;
                let cond = self.expression()?;
                self.expect(Tok::RParen)?;
                let body = self.block()?;
                Ok(Statement {
                    kind: StmtKind::While { cond, body },
                    loc,
                })
            }
            Some(Tok::KwReturn) => {
                self.advance();
                let e = self.expression()?;
                self.expect(Tok::Semi)?;
                Ok(Statement {
                    kind: StmtKind::Return(e),
                    loc,
                })
            }
            Some(Tok::Ident(_)) => {
                let (name, _) = self.ident()?;
                let target = if self.eat(&Tok::LBracket) {
                    let index = self.expression()?;
                    self.expect(Tok::RBracket)?;
                    LValue::Elem { array: name, index }
                } else {
                    LValue::Var(name)
                };
                self.expect(Tok::Assign)?;
                let value = self.expression()?;
                self.expect(Tok::Semi)?;
                Ok(Statement {
                    kind: StmtKind::Assign { target, value },
                    loc,
                })
            }
            _ => Err(self.error("expected a statement")),
        }
    }

    fn expression(&mut self) -> Result<Expression, ParseError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Tok::OrOr) {
            let loc = lhs.loc.clone();
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expression {
                kind: ExprKind::Binary {
                    op: BinaryOp::Or,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == Some(&Tok::AndAnd) {
            let loc = lhs.loc.clone();
            self.advance();
            let rhs = self.cmp_expr()?;
            lhs = Expression {
                kind: ExprKind::Binary {
                    op: BinaryOp::And,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc,
            };
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.add_expr()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Lt) => Some(BinaryOp::Lt),
            Some(Tok::Le) => Some(BinaryOp::Le),
            Some(Tok::Gt) => Some(BinaryOp::Gt),
            Some(Tok::Ge) => Some(BinaryOp::Ge),
            Some(Tok::EqEq) => Some(BinaryOp::Eq),
            Some(Tok::NotEq) => Some(BinaryOp::Ne),
            _ => None,
        } {
            let loc = lhs.loc.clone();
            self.advance();
            let rhs = self.add_expr()?;
            lhs = Expression {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc,
            };
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.mul_expr()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Plus) => Some(BinaryOp::Add),
            Some(Tok::Minus) => Some(BinaryOp::Sub),
            _ => None,
        } {
            let loc = lhs.loc.clone();
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expression {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc,
            };
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary_expr()?;
        while let Some(op) = match self.peek() {
            Some(Tok::Star) => Some(BinaryOp::Mul),
            Some(Tok::Slash) => Some(BinaryOp::Div),
            _ => None,
        } {
            let loc = lhs.loc.clone();
            self.advance();
            let rhs = self.unary_expr()?;
            lhs = Expression {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc,
            };
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expression, ParseError> {
        let loc = self.loc();
        if self.eat(&Tok::Bang) {
            let operand = self.unary_expr()?;
            return Ok(Expression {
                kind: ExprKind::Unary {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                loc,
            });
        }
        if self.eat(&Tok::Minus) {
            let operand = self.unary_expr()?;
            // Fold negation of numeric literals so `-1` round-trips as a
            // plain literal.
            let kind = match fold_neg(&operand.kind) {
                Some(folded) => folded,
                None => ExprKind::Unary {
                    op: UnaryOp::Neg,
                    operand: Box::new(operand),
                },
            };
            return Ok(Expression { kind, loc });
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expression, ParseError> {
        let mut e = self.atom()?;
        loop {
            if self.eat(&Tok::LBracket) {
                let index = self.expression()?;
                self.expect(Tok::RBracket)?;
                let loc = e.loc.clone();
                e = Expression {
                    kind: ExprKind::Index {
                        array: Box::new(e),
                        index: Box::new(index),
                    },
                    loc,
                };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let loc = self.loc();
        match self.peek().cloned() {
            Some(Tok::KwTrue) => {
                self.advance();
                Ok(Expression {
                    kind: ExprKind::Literal(Value::Bool(true)),
                    loc,
                })
            }
            Some(Tok::KwFalse) => {
                self.advance();
                Ok(Expression {
                    kind: ExprKind::Literal(Value::Bool(false)),
                    loc,
                })
            }
            Some(Tok::Int(n)) => {
                self.advance();
                let n = int_in_range(n, &loc)?;
                Ok(Expression {
                    kind: ExprKind::Literal(Value::Int(n)),
                    loc,
                })
            }
            Some(Tok::Real(x)) => {
                self.advance();
                Ok(Expression {
                    kind: ExprKind::Literal(Value::Real(x)),
                    loc,
                })
            }
            Some(Tok::LBracket) => {
                self.advance();
                self.array_literal(loc)
            }
            Some(Tok::LParen) => {
                self.advance();
                let e = self.expression()?;
                self.expect(Tok::RParen)?;
                // Parentheses are grouping only; the inner node is kept.
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.advance();
                if self.eat(&Tok::LParen) {
                    let builtin = Builtin::from_name(&name).ok_or_else(|| {
                        ParseError::syntax(
                            loc.line,
                            loc.col,
                            format!("unknown built-in `{name}` (calls target built-ins only)"),
                        )
                    })?;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.expression()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Expression {
                        kind: ExprKind::Call { builtin, args },
                        loc,
                    })
                } else {
                    Ok(Expression {
                        kind: ExprKind::Var(name),
                        loc,
                    })
                }
            }
            // `int(..)` / `real(..)` lex as type keywords; accept them as calls.
            Some(Tok::KwInt) => {
                self.advance();
                self.builtin_call(Builtin::Int, loc)
            }
            Some(Tok::KwReal) => {
                self.advance();
                self.builtin_call(Builtin::Real, loc)
            }
            Some(t) => Err(self.error(format!("expected expression, found {}", t.describe()))),
            None => Err(self.error("expected expression, found end of input")),
        }
    }

    fn builtin_call(&mut self, builtin: Builtin, loc: SourceLoc) -> Result<Expression, ParseError> {
        self.expect(Tok::LParen)?;
        let arg = self.expression()?;
        self.expect(Tok::RParen)?;
        Ok(Expression {
            kind: ExprKind::Call {
                builtin,
                args: vec![arg],
            },
            loc,
        })
    }

    /// `[1, 2, 3]` or `[1.0, -2.5]`; elements are numeric literals with
    /// an optional leading minus, all of one element type.
    fn array_literal(&mut self, loc: SourceLoc) -> Result<Expression, ParseError> {
        let mut ints: Vec<i64> = Vec::new();
        let mut reals: Vec<f64> = Vec::new();
        let mut elem: Option<ElemType> = None;
        if self.peek() == Some(&Tok::RBracket) {
            return Err(self.error("empty array literal has no element type"));
        }
        loop {
            let neg = self.eat(&Tok::Minus);
            let eloc = self.loc();
            match self.advance() {
                Some(Token {
                    tok: Tok::Int(n), ..
                }) => {
                    let n = int_in_range(if neg { -n } else { n }, &eloc)?;
                    match elem {
                        None => elem = Some(ElemType::Int),
                        Some(ElemType::Int) => {}
                        Some(ElemType::Real) => {
                            return Err(self.error("mixed element types in array literal"))
                        }
                    }
                    ints.push(n);
                }
                Some(Token {
                    tok: Tok::Real(x), ..
                }) => {
                    match elem {
                        None => elem = Some(ElemType::Real),
                        Some(ElemType::Real) => {}
                        Some(ElemType::Int) => {
                            return Err(self.error("mixed element types in array literal"))
                        }
                    }
                    reals.push(if neg { -x } else { x });
                }
                _ => return Err(self.error("array elements must be numeric literals")),
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        let value = match elem.unwrap() {
            ElemType::Int => Value::IntArray(ints),
            ElemType::Real => Value::RealArray(reals),
        };
        Ok(Expression {
            kind: ExprKind::Literal(value),
            loc,
        })
    }
}

/// Integer literals are carried as i128 through the lexer so that
/// `-9223372036854775808` folds before the range check.
fn int_in_range(n: i128, loc: &SourceLoc) -> Result<i64, ParseError> {
    i64::try_from(n)
        .map_err(|_| ParseError::syntax(loc.line, loc.col, "integer literal out of range"))
}

fn fold_neg(kind: &ExprKind) -> Option<ExprKind> {
    match kind {
        ExprKind::Literal(Value::Int(n)) => Some(ExprKind::Literal(Value::Int(n.checked_neg()?))),
        ExprKind::Literal(Value::Real(x)) => Some(ExprKind::Literal(Value::Real(-x))),
        _ => None,
    }
}
