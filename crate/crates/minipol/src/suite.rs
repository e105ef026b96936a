//! Test-suite file format.
//!
//! A suite is a list of records; values are written as mini-lang
//! literals. `#` or `//` start a comment.
//!
//! ```text
//! test 2 { function = is_upward_preferred  inputs = true, 11, 110  expected = 1 }
//! ```
//!
//! `inputs` may be empty (`inputs =` followed by the next key). Array
//! inputs use array literals, e.g. `inputs = [1.0, 2.0], 75.0`.

use thiserror::Error;

use crate::interp::TestCase;
use crate::lang::{TypedProgram, Value};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("suite:{line}: {msg}")]
    Malformed { line: u32, msg: String },
    #[error("duplicate test name `{0}`")]
    DuplicateName(String),
    #[error("test `{test}`: unknown function `{function}`")]
    UnknownFunction { test: String, function: String },
    #[error("test `{test}`: expected {expected} inputs for `{function}`, got {got}")]
    Arity {
        test: String,
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("test `{test}`: input {index} has type {got}, expected {expected}")]
    InputType {
        test: String,
        index: usize,
        expected: crate::lang::Type,
        got: crate::lang::Type,
    },
    #[error("test `{test}`: expected value has type {got}, function returns {expected}")]
    ExpectedType {
        test: String,
        expected: crate::lang::Type,
        got: crate::lang::Type,
    },
}

/// Parses a suite file. Structure only; use [`validate_suite`] to check
/// the records against a program.
pub fn parse_suite(text: &str) -> Result<Vec<TestCase>, SuiteError> {
    let mut p = SuiteParser::tokenize(text)?;
    let mut out: Vec<TestCase> = Vec::new();
    while !p.at_end() {
        let test = p.record()?;
        if out.iter().any(|t| t.name == test.name) {
            return Err(SuiteError::DuplicateName(test.name));
        }
        out.push(test);
    }
    Ok(out)
}

/// Checks arity and types of every record against the target program.
pub fn validate_suite(program: &TypedProgram, suite: &[TestCase]) -> Result<(), SuiteError> {
    for test in suite {
        let sig = program
            .signature(&test.function)
            .ok_or_else(|| SuiteError::UnknownFunction {
                test: test.name.clone(),
                function: test.function.clone(),
            })?;
        if sig.params.len() != test.inputs.len() {
            return Err(SuiteError::Arity {
                test: test.name.clone(),
                function: test.function.clone(),
                expected: sig.params.len(),
                got: test.inputs.len(),
            });
        }
        for (i, ((_, want), input)) in sig.params.iter().zip(&test.inputs).enumerate() {
            if input.ty() != *want {
                return Err(SuiteError::InputType {
                    test: test.name.clone(),
                    index: i,
                    expected: *want,
                    got: input.ty(),
                });
            }
        }
        if test.expected.ty() != sig.return_type {
            return Err(SuiteError::ExpectedType {
                test: test.name.clone(),
                expected: sig.return_type,
                got: test.expected.ty(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum STok {
    Word(String),
    Int(i64),
    Real(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Assign,
    Comma,
    Minus,
}

struct SuiteParser {
    toks: Vec<(STok, u32)>,
    pos: usize,
}

impl SuiteParser {
    fn tokenize(text: &str) -> Result<Self, SuiteError> {
        let mut toks = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = (lineno + 1) as u32;
            let content = raw.split("//").next().unwrap_or("");
            let content = content.split('#').next().unwrap_or("");
            let chars: Vec<char> = content.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let c = chars[i];
                match c {
                    ' ' | '\t' | '\r' => i += 1,
                    '{' => {
                        toks.push((STok::LBrace, line));
                        i += 1;
                    }
                    '}' => {
                        toks.push((STok::RBrace, line));
                        i += 1;
                    }
                    '[' => {
                        toks.push((STok::LBracket, line));
                        i += 1;
                    }
                    ']' => {
                        toks.push((STok::RBracket, line));
                        i += 1;
                    }
                    '=' => {
                        toks.push((STok::Assign, line));
                        i += 1;
                    }
                    ',' => {
                        toks.push((STok::Comma, line));
                        i += 1;
                    }
                    '-' => {
                        toks.push((STok::Minus, line));
                        i += 1;
                    }
                    c if c.is_ascii_digit() => {
                        let start = i;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                        if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                            i += 1;
                            while i < chars.len() && chars[i].is_ascii_digit() {
                                i += 1;
                            }
                            let s: String = chars[start..i].iter().collect();
                            let x = s.parse().map_err(|_| SuiteError::Malformed {
                                line,
                                msg: format!("bad real literal `{s}`"),
                            })?;
                            toks.push((STok::Real(x), line));
                        } else {
                            let s: String = chars[start..i].iter().collect();
                            let n = s.parse().map_err(|_| SuiteError::Malformed {
                                line,
                                msg: format!("integer literal out of range `{s}`"),
                            })?;
                            toks.push((STok::Int(n), line));
                        }
                    }
                    c if c.is_ascii_alphanumeric() || c == '_' => {
                        let start = i;
                        while i < chars.len()
                            && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                        {
                            i += 1;
                        }
                        toks.push((STok::Word(chars[start..i].iter().collect()), line));
                    }
                    other => {
                        return Err(SuiteError::Malformed {
                            line,
                            msg: format!("unexpected character `{other}`"),
                        })
                    }
                }
            }
        }
        Ok(SuiteParser { toks, pos: 0 })
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn line(&self) -> u32 {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l)| *l)
            .unwrap_or(1)
    }

    fn err(&self, msg: impl Into<String>) -> SuiteError {
        SuiteError::Malformed {
            line: self.line(),
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Option<STok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn peek(&self) -> Option<&STok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn expect_word(&mut self, want: &str) -> Result<(), SuiteError> {
        match self.next() {
            Some(STok::Word(w)) if w == want => Ok(()),
            _ => Err(self.err(format!("expected `{want}`"))),
        }
    }

    fn record(&mut self) -> Result<TestCase, SuiteError> {
        self.expect_word("test")?;
        let name = match self.next() {
            Some(STok::Word(w)) => w,
            Some(STok::Int(n)) => n.to_string(),
            _ => return Err(self.err("expected a test name")),
        };
        if !matches!(self.next(), Some(STok::LBrace)) {
            return Err(self.err("expected `{`"));
        }
        let mut function = None;
        let mut inputs = None;
        let mut expected = None;
        loop {
            match self.next() {
                Some(STok::RBrace) => break,
                Some(STok::Word(key)) => {
                    if !matches!(self.next(), Some(STok::Assign)) {
                        return Err(self.err(format!("expected `=` after `{key}`")));
                    }
                    match key.as_str() {
                        "function" => match self.next() {
                            Some(STok::Word(w)) => function = Some(w),
                            _ => return Err(self.err("expected a function name")),
                        },
                        "inputs" => inputs = Some(self.value_list()?),
                        "expected" => expected = Some(self.value()?),
                        other => return Err(self.err(format!("unknown key `{other}`"))),
                    }
                }
                _ => return Err(self.err("expected a key or `}`")),
            }
        }
        Ok(TestCase {
            name,
            function: function.ok_or_else(|| self.err("missing `function`"))?,
            inputs: inputs.ok_or_else(|| self.err("missing `inputs`"))?,
            expected: expected.ok_or_else(|| self.err("missing `expected`"))?,
        })
    }

    /// Comma-separated literals; ends at the next key, `}`, or a
    /// non-literal token. May be empty.
    fn value_list(&mut self) -> Result<Vec<Value>, SuiteError> {
        let mut out = Vec::new();
        if !self.starts_value() {
            return Ok(out);
        }
        loop {
            out.push(self.value()?);
            if matches!(self.peek(), Some(STok::Comma)) {
                self.next();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn starts_value(&self) -> bool {
        match self.peek() {
            Some(STok::Int(_) | STok::Real(_) | STok::Minus | STok::LBracket) => true,
            Some(STok::Word(w)) => w == "true" || w == "false",
            _ => false,
        }
    }

    fn value(&mut self) -> Result<Value, SuiteError> {
        match self.next() {
            Some(STok::Word(w)) if w == "true" => Ok(Value::Bool(true)),
            Some(STok::Word(w)) if w == "false" => Ok(Value::Bool(false)),
            Some(STok::Int(n)) => Ok(Value::Int(n)),
            Some(STok::Real(x)) => Ok(Value::Real(x)),
            Some(STok::Minus) => match self.next() {
                Some(STok::Int(n)) => Ok(Value::Int(-n)),
                Some(STok::Real(x)) => Ok(Value::Real(-x)),
                _ => Err(self.err("expected a number after `-`")),
            },
            Some(STok::LBracket) => {
                let mut ints: Vec<i64> = Vec::new();
                let mut reals: Vec<f64> = Vec::new();
                let mut is_real = None;
                if matches!(self.peek(), Some(STok::RBracket)) {
                    return Err(self.err("empty array literal has no element type"));
                }
                loop {
                    match self.value()? {
                        Value::Int(n) => {
                            if is_real == Some(true) {
                                return Err(self.err("mixed element types in array literal"));
                            }
                            is_real = Some(false);
                            ints.push(n);
                        }
                        Value::Real(x) => {
                            if is_real == Some(false) {
                                return Err(self.err("mixed element types in array literal"));
                            }
                            is_real = Some(true);
                            reals.push(x);
                        }
                        _ => return Err(self.err("array elements must be numbers")),
                    }
                    match self.next() {
                        Some(STok::Comma) => {}
                        Some(STok::RBracket) => break,
                        _ => return Err(self.err("expected `,` or `]`")),
                    }
                }
                Ok(if is_real == Some(true) {
                    Value::RealArray(reals)
                } else {
                    Value::IntArray(ints)
                })
            }
            _ => Err(self.err("expected a value")),
        }
    }
}
