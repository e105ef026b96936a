//! Hand-rolled lexer for mini-lang. `//` starts a line comment.

use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i128),
    Real(f64),
    KwFn,
    KwLet,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwTrue,
    KwFalse,
    KwBool,
    KwInt,
    KwReal,
    KwArray,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Arrow,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    AndAnd,
    OrOr,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer literal `{n}`"),
            Tok::Real(x) => format!("real literal `{x}`"),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) | Tok::Int(_) | Tok::Real(_) => "",
            Tok::KwFn => "fn",
            Tok::KwLet => "let",
            Tok::KwIf => "if",
            Tok::KwElse => "else",
            Tok::KwWhile => "while",
            Tok::KwReturn => "return",
            Tok::KwTrue => "true",
            Tok::KwFalse => "false",
            Tok::KwBool => "bool",
            Tok::KwInt => "int",
            Tok::KwReal => "real",
            Tok::KwArray => "array",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

pub fn lex(source: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0usize;
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Token {
                tok: $tok,
                line: $l,
                col: $c,
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                push!(Tok::LParen, tl, tc);
                i += 1;
                col += 1;
            }
            ')' => {
                push!(Tok::RParen, tl, tc);
                i += 1;
                col += 1;
            }
            '{' => {
                push!(Tok::LBrace, tl, tc);
                i += 1;
                col += 1;
            }
            '}' => {
                push!(Tok::RBrace, tl, tc);
                i += 1;
                col += 1;
            }
            '[' => {
                push!(Tok::LBracket, tl, tc);
                i += 1;
                col += 1;
            }
            ']' => {
                push!(Tok::RBracket, tl, tc);
                i += 1;
                col += 1;
            }
            ',' => {
                push!(Tok::Comma, tl, tc);
                i += 1;
                col += 1;
            }
            ';' => {
                push!(Tok::Semi, tl, tc);
                i += 1;
                col += 1;
            }
            ':' => {
                push!(Tok::Colon, tl, tc);
                i += 1;
                col += 1;
            }
            '+' => {
                push!(Tok::Plus, tl, tc);
                i += 1;
                col += 1;
            }
            '*' => {
                push!(Tok::Star, tl, tc);
                i += 1;
                col += 1;
            }
            '/' => {
                push!(Tok::Slash, tl, tc);
                i += 1;
                col += 1;
            }
            '-' => {
                if i + 1 < chars.len() && chars[i + 1] == '>' {
                    push!(Tok::Arrow, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Minus, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::EqEq, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Assign, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            '!' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::NotEq, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Bang, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            '<' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Le, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Lt, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            '>' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    push!(Tok::Ge, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    push!(Tok::Gt, tl, tc);
                    i += 1;
                    col += 1;
                }
            }
            '&' => {
                if i + 1 < chars.len() && chars[i + 1] == '&' {
                    push!(Tok::AndAnd, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    return Err(ParseError::syntax(tl, tc, "expected `&&`"));
                }
            }
            '|' => {
                if i + 1 < chars.len() && chars[i + 1] == '|' {
                    push!(Tok::OrOr, tl, tc);
                    i += 2;
                    col += 2;
                } else {
                    return Err(ParseError::syntax(tl, tc, "expected `||`"));
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                // A real literal requires a dot with digits on both sides.
                let is_real =
                    i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit();
                if is_real {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    let x: f64 = text
                        .parse()
                        .map_err(|_| ParseError::syntax(tl, tc, "malformed real literal"))?;
                    col += (i - start) as u32;
                    push!(Tok::Real(x), tl, tc);
                } else if i < chars.len() && chars[i] == '.' {
                    return Err(ParseError::syntax(
                        tl,
                        tc,
                        "real literal needs digits after the dot",
                    ));
                } else {
                    let text: String = chars[start..i].iter().collect();
                    let n: i128 = text
                        .parse()
                        .map_err(|_| ParseError::syntax(tl, tc, "integer literal out of range"))?;
                    col += (i - start) as u32;
                    push!(Tok::Int(n), tl, tc);
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                let tok = match word.as_str() {
                    "fn" => Tok::KwFn,
                    "let" => Tok::KwLet,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "return" => Tok::KwReturn,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    "bool" => Tok::KwBool,
                    "int" => Tok::KwInt,
                    "real" => Tok::KwReal,
                    "array" => Tok::KwArray,
                    _ => Tok::Ident(word),
                };
                push!(tok, tl, tc);
            }
            other => {
                return Err(ParseError::syntax(
                    tl,
                    tc,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    Ok(out)
}
