//! SMT-LIB 2 export of a constraint system, plus a small reader used to
//! round-trip the emitted script and to ingest models produced by an
//! external solver.
//!
//! The script declares integer location variables and per-row value
//! variables, asserts the wiring constraint groups, and ends with
//! `(check-sat)` and `(get-value ...)` over the location variables.
//! Real constants are emitted as exact rationals so an external model
//! agrees bit-for-bit with the internal evaluation.

use std::collections::BTreeMap;
use std::fmt::Write;

use thiserror::Error;

use crate::lang::{Type, Value};

use super::blocks::BlockOp;
use super::system::{ConstraintSystem, LocVar, Model};

pub fn emit_smtlib(system: &ConstraintSystem) -> String {
    let mut s = String::new();
    let i0_len = system.i0_len();
    let m = system.m();

    writeln!(s, "; component wiring constraints").unwrap();
    writeln!(
        s,
        "; |I_0| = {i0_len}, |B| = {}, m = {m}, rows = {}",
        system.blocks.len(),
        system.rows.len()
    )
    .unwrap();
    writeln!(
        s,
        "; note: models using * over Int need nonlinear integer arithmetic support"
    )
    .unwrap();
    writeln!(s, "(set-logic ALL)").unwrap();

    for (i, e) in system.i0.iter().enumerate() {
        writeln!(
            s,
            "; i0 position {} = {} : {}",
            i + 1,
            e.describe(),
            sort_name(e.ty())
        )
        .unwrap();
    }

    // Location variables.
    writeln!(s, "(declare-const l_r Int)").unwrap();
    for (k, b) in system.blocks.iter().enumerate() {
        writeln!(
            s,
            "; block b{k}: {} over {}",
            b.op.symbol(),
            sort_name(b.operand_ty)
        )
        .unwrap();
        writeln!(s, "(declare-const {} Int)", LocVar::BlockOut(k).smt_name()).unwrap();
        for j in 0..b.arity() {
            writeln!(
                s,
                "(declare-const {} Int)",
                LocVar::BlockIn(k, j).smt_name()
            )
            .unwrap();
        }
    }

    // Value variables, one family per row.
    for (r, _) in system.rows.iter().enumerate() {
        for (i, e) in system.i0.iter().enumerate() {
            writeln!(s, "(declare-const v_i{}_r{r} {})", i + 1, sort_name(e.ty())).unwrap();
        }
        for (k, b) in system.blocks.iter().enumerate() {
            writeln!(
                s,
                "(declare-const v_out_b{k}_r{r} {})",
                sort_name(b.output_type())
            )
            .unwrap();
            for j in 0..b.arity() {
                writeln!(
                    s,
                    "(declare-const v_in_b{k}_{j}_r{r} {})",
                    sort_name(b.input_type())
                )
                .unwrap();
            }
        }
        writeln!(s, "(declare-const v_r_r{r} Bool)").unwrap();
    }

    // phi_FIXED: I_0 locations are their positions; l_r = m with blocks,
    // or ranges over the boolean inputs in the degenerate no-block case.
    writeln!(s, "; phi_FIXED").unwrap();
    if system.blocks.is_empty() {
        let positions = system.bool_i0_positions();
        if positions.is_empty() {
            writeln!(s, "(assert false) ; no boolean element to wire l_r to").unwrap();
        } else {
            let alts: Vec<String> = positions.iter().map(|p| format!("(= l_r {p})")).collect();
            writeln!(s, "(assert (or {}))", alts.join(" ")).unwrap();
        }
    } else {
        writeln!(s, "(assert (= l_r {m}))").unwrap();
    }

    // phi_OUTPUT: block outputs lie in [|I_0|+1, m].
    if !system.blocks.is_empty() {
        writeln!(s, "; phi_OUTPUT").unwrap();
        for (k, _) in system.blocks.iter().enumerate() {
            let name = LocVar::BlockOut(k).smt_name();
            writeln!(
                s,
                "(assert (and (<= {} {name}) (<= {name} {m})))",
                i0_len + 1
            )
            .unwrap();
        }

        // phi_CONS: one output per location.
        writeln!(s, "; phi_CONS").unwrap();
        if system.blocks.len() > 1 {
            let outs: Vec<String> = (0..system.blocks.len())
                .map(|k| LocVar::BlockOut(k).smt_name())
                .collect();
            writeln!(s, "(assert (distinct {}))", outs.join(" ")).unwrap();
        }

        // phi_INPUT and phi_ACYC per block input.
        writeln!(s, "; phi_INPUT and phi_ACYC").unwrap();
        for (k, b) in system.blocks.iter().enumerate() {
            for j in 0..b.arity() {
                let name = LocVar::BlockIn(k, j).smt_name();
                let mut alts: Vec<String> = system
                    .i0_indices_of_type(b.input_type())
                    .into_iter()
                    .map(|i| format!("(= {name} {})", system.i0_position(i)))
                    .collect();
                for (c, other) in system.blocks.iter().enumerate() {
                    if c != k && other.output_type() == b.input_type() {
                        alts.push(format!("(= {name} {})", LocVar::BlockOut(c).smt_name()));
                    }
                }
                if alts.is_empty() {
                    writeln!(s, "(assert false) ; input {name} has no typed source").unwrap();
                } else {
                    writeln!(s, "(assert (or {}))", alts.join(" ")).unwrap();
                }
                writeln!(s, "(assert (< {name} {}))", LocVar::BlockOut(k).smt_name()).unwrap();
            }
        }
    }

    // Per-row constraints: bindings, phi_LIB, phi_CONN.
    for (r, row) in system.rows.iter().enumerate() {
        writeln!(
            s,
            "; row {r}: test {} hit {}",
            row.test_name, row.execution_index
        )
        .unwrap();
        for (i, _) in system.i0.iter().enumerate() {
            writeln!(
                s,
                "(assert (= v_i{}_r{r} {}))",
                i + 1,
                value_literal(&system.i0_value(i, row))
            )
            .unwrap();
        }
        writeln!(s, "(assert (= v_r_r{r} {}))", row.expected).unwrap();

        writeln!(s, "; phi_LIB row {r}").unwrap();
        for (k, b) in system.blocks.iter().enumerate() {
            let out = format!("v_out_b{k}_r{r}");
            let body = match b.arity() {
                1 => format!("({} v_in_b{k}_0_r{r})", smt_op(b.op)),
                _ => format!("({} v_in_b{k}_0_r{r} v_in_b{k}_1_r{r})", smt_op(b.op)),
            };
            writeln!(s, "(assert (= {out} {body}))").unwrap();
        }

        // phi_CONN: elements at the same location share a value. Pairs
        // between two fixed locations are vacuous and sink-sink pairs
        // follow transitively through their common source, so only the
        // sink-source pairs are emitted.
        writeln!(s, "; phi_CONN row {r}").unwrap();
        for (k, b) in system.blocks.iter().enumerate() {
            for j in 0..b.arity() {
                let lin = LocVar::BlockIn(k, j).smt_name();
                let vin = format!("v_in_b{k}_{j}_r{r}");
                for i in system.i0_indices_of_type(b.input_type()) {
                    writeln!(
                        s,
                        "(assert (=> (= {lin} {}) (= {vin} v_i{}_r{r})))",
                        system.i0_position(i),
                        i + 1
                    )
                    .unwrap();
                }
                for (c, other) in system.blocks.iter().enumerate() {
                    if c != k && other.output_type() == b.input_type() {
                        writeln!(
                            s,
                            "(assert (=> (= {lin} {}) (= {vin} v_out_b{c}_r{r})))",
                            LocVar::BlockOut(c).smt_name()
                        )
                        .unwrap();
                    }
                }
            }
        }
        if system.blocks.is_empty() {
            for i in system.i0_indices_of_type(Type::Bool) {
                writeln!(
                    s,
                    "(assert (=> (= l_r {}) (= v_r_r{r} v_i{}_r{r})))",
                    system.i0_position(i),
                    i + 1
                )
                .unwrap();
            }
        } else {
            for (k, b) in system.blocks.iter().enumerate() {
                if b.output_type() == Type::Bool {
                    writeln!(
                        s,
                        "(assert (=> (= l_r {}) (= v_r_r{r} v_out_b{k}_r{r})))",
                        LocVar::BlockOut(k).smt_name()
                    )
                    .unwrap();
                }
            }
        }
    }

    writeln!(s, "(check-sat)").unwrap();
    let mut names = vec!["l_r".to_string()];
    for (k, b) in system.blocks.iter().enumerate() {
        names.push(LocVar::BlockOut(k).smt_name());
        for j in 0..b.arity() {
            names.push(LocVar::BlockIn(k, j).smt_name());
        }
    }
    writeln!(s, "(get-value ({}))", names.join(" ")).unwrap();
    s
}

fn sort_name(ty: Type) -> &'static str {
    match ty {
        Type::Bool => "Bool",
        Type::Int => "Int",
        Type::Real => "Real",
        Type::Array(_) => unreachable!("arrays never enter the system"),
    }
}

fn smt_op(op: BlockOp) -> &'static str {
    match op {
        BlockOp::Lt => "<",
        BlockOp::Le => "<=",
        BlockOp::Eq => "=",
        BlockOp::Ne => "distinct",
        BlockOp::And => "and",
        BlockOp::Or => "or",
        BlockOp::Not => "not",
        BlockOp::Add => "+",
        BlockOp::Sub => "-",
        BlockOp::Mul => "*",
    }
}

fn value_literal(v: &Value) -> String {
    match v {
        Value::Bool(b) => b.to_string(),
        Value::Int(n) => int_literal(*n),
        Value::Real(x) => real_literal(*x),
        Value::IntArray(_) | Value::RealArray(_) => {
            unreachable!("arrays never enter the system")
        }
    }
}

fn int_literal(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

/// Exact binary64 value as an SMT Real term.
fn real_literal(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        let n = x as i64;
        return if n < 0 {
            format!("(- {}.0)", n.unsigned_abs())
        } else {
            format!("{n}.0")
        };
    }
    // x = mantissa * 2^exp exactly.
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1.0 } else { 1.0 };
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exponent == 0 {
        (fraction, -1074i64)
    } else {
        (fraction | (1u64 << 52), exponent - 1075)
    };
    let num = mantissa;
    if exp >= 0 {
        let val = (num as u128) << exp;
        let rendered = format!("{val}.0");
        if sign < 0.0 {
            format!("(- {rendered})")
        } else {
            rendered
        }
    } else {
        let den = 1u128 << (-exp).min(127);
        let body = format!("(/ {num}.0 {den}.0)");
        if sign < 0.0 {
            format!("(- {body})")
        } else {
            body
        }
    }
}

// ---------------------------------------------------------------------
// Reader: s-expressions, script validation, model ingestion.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn render(&self) -> String {
        match self {
            Sexp::Atom(a) => a.clone(),
            Sexp::List(items) => {
                let inner: Vec<String> = items.iter().map(Sexp::render).collect();
                format!("({})", inner.join(" "))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum SmtlibError {
    #[error("unbalanced parentheses at byte {0}")]
    Unbalanced(usize),
    #[error("unknown command `{0}`")]
    UnknownCommand(String),
    #[error("malformed command: {0}")]
    Malformed(String),
    #[error("undeclared symbol `{0}` used in an assertion")]
    Undeclared(String),
    #[error("model value for `{0}` is not an integer")]
    NonIntegerLocation(String),
}

/// Parses a script into top-level s-expressions, skipping `;` comments.
pub fn parse_sexprs(text: &str) -> Result<Vec<Sexp>, SmtlibError> {
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Sexp>> = Vec::new();
    let mut atom = String::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0usize;

    macro_rules! flush_atom {
        () => {
            if !atom.is_empty() {
                let sexp = Sexp::Atom(std::mem::take(&mut atom));
                match stack.last_mut() {
                    Some(top) => top.push(sexp),
                    None => out.push(sexp),
                }
            }
        };
    }

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ';' => {
                flush_atom!();
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                flush_atom!();
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                flush_atom!();
                let items = stack.pop().ok_or(SmtlibError::Unbalanced(i))?;
                let sexp = Sexp::List(items);
                match stack.last_mut() {
                    Some(top) => top.push(sexp),
                    None => out.push(sexp),
                }
                i += 1;
            }
            c if c.is_whitespace() => {
                flush_atom!();
                i += 1;
            }
            c => {
                atom.push(c);
                i += 1;
            }
        }
    }
    flush_atom!();
    if !stack.is_empty() {
        return Err(SmtlibError::Unbalanced(text.len()));
    }
    Ok(out)
}

#[derive(Debug, Default)]
pub struct ScriptSummary {
    pub declared: BTreeMap<String, String>,
    pub asserts: usize,
    pub has_check_sat: bool,
    pub has_get_value: bool,
}

/// Structural well-formedness: balanced, known commands, declared sorts,
/// and every symbol referenced by an assert is declared.
pub fn validate_script(text: &str) -> Result<ScriptSummary, SmtlibError> {
    let cmds = parse_sexprs(text)?;
    let mut summary = ScriptSummary::default();
    const OPERATORS: &[&str] = &[
        "=", "<", "<=", ">", ">=", "distinct", "and", "or", "not", "=>", "+", "-", "*", "/",
        "true", "false", "ite",
    ];

    for cmd in &cmds {
        let Sexp::List(items) = cmd else {
            return Err(SmtlibError::Malformed(cmd.render()));
        };
        let Some(Sexp::Atom(head)) = items.first() else {
            return Err(SmtlibError::Malformed(cmd.render()));
        };
        match head.as_str() {
            "set-logic" => {}
            "declare-const" => {
                let (Some(Sexp::Atom(name)), Some(Sexp::Atom(sort))) = (items.get(1), items.get(2))
                else {
                    return Err(SmtlibError::Malformed(cmd.render()));
                };
                if !matches!(sort.as_str(), "Bool" | "Int" | "Real") {
                    return Err(SmtlibError::Malformed(format!("sort {sort}")));
                }
                summary.declared.insert(name.clone(), sort.clone());
            }
            "assert" => {
                summary.asserts += 1;
                let body = items
                    .get(1)
                    .ok_or_else(|| SmtlibError::Malformed(cmd.render()))?;
                check_symbols(body, &summary.declared, OPERATORS)?;
            }
            "check-sat" => summary.has_check_sat = true,
            "get-value" => summary.has_get_value = true,
            other => return Err(SmtlibError::UnknownCommand(other.to_string())),
        }
    }
    Ok(summary)
}

fn check_symbols(
    sexp: &Sexp,
    declared: &BTreeMap<String, String>,
    operators: &[&str],
) -> Result<(), SmtlibError> {
    match sexp {
        Sexp::Atom(a) => {
            let is_numeral = a
                .chars()
                .all(|c| c.is_ascii_digit() || c == '.' || c == '-');
            if is_numeral || operators.contains(&a.as_str()) || declared.contains_key(a) {
                Ok(())
            } else {
                Err(SmtlibError::Undeclared(a.clone()))
            }
        }
        Sexp::List(items) => {
            for item in items {
                check_symbols(item, declared, operators)?;
            }
            Ok(())
        }
    }
}

/// Parses solver `get-value` output like `((l_r 5) (l_out_b0 4))` into a
/// location assignment.
pub fn parse_model_values(text: &str) -> Result<BTreeMap<String, i64>, SmtlibError> {
    let sexps = parse_sexprs(text)?;
    let mut out = BTreeMap::new();
    // Accept either one wrapping list or a flat sequence of pairs.
    let pairs: Vec<&Sexp> = match sexps.as_slice() {
        [Sexp::List(items)]
            if items
                .iter()
                .all(|i| matches!(i, Sexp::List(p) if p.len() == 2)) =>
        {
            items.iter().collect()
        }
        other => other.iter().collect(),
    };
    for pair in pairs {
        let Sexp::List(kv) = pair else {
            return Err(SmtlibError::Malformed(pair.render()));
        };
        let (Some(Sexp::Atom(name)), Some(value)) = (kv.first(), kv.get(1)) else {
            return Err(SmtlibError::Malformed(pair.render()));
        };
        let n = match value {
            Sexp::Atom(a) => a
                .parse::<i64>()
                .map_err(|_| SmtlibError::NonIntegerLocation(name.clone()))?,
            Sexp::List(items) => match items.as_slice() {
                [Sexp::Atom(minus), Sexp::Atom(num)] if minus == "-" => -num
                    .parse::<i64>()
                    .map_err(|_| SmtlibError::NonIntegerLocation(name.clone()))?,
                _ => return Err(SmtlibError::NonIntegerLocation(name.clone())),
            },
        };
        out.insert(name.clone(), n);
    }
    Ok(out)
}

/// Lifts a name->integer assignment into a [`Model`] for this system.
pub fn model_from_values(
    values: &BTreeMap<String, i64>,
    system: &ConstraintSystem,
) -> Result<Model, SmtlibError> {
    let mut assignment = BTreeMap::new();
    for (name, &v) in values {
        if let Some(var) = LocVar::from_smt_name(name) {
            if v < 1 || v as usize > system.m() {
                return Err(SmtlibError::NonIntegerLocation(name.clone()));
            }
            assignment.insert(var, v as usize);
        }
    }
    Ok(Model { assignment })
}
