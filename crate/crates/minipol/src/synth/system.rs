//! The location-variable constraint system.
//!
//! Positions are 1-based. The program inputs I_0 (row schema followed
//! by the constants) occupy fixed positions 1..=|I_0|; each block's
//! output takes a distinct position in [|I_0|+1, m] with m = |I_0|+|B|,
//! and the final result sits at position m. Block inputs may only be
//! wired to same-typed positions strictly below their block's output
//! (acyclicity), and with no blocks at all the result is wired directly
//! to a boolean element of I_0.

use std::collections::BTreeMap;

use crate::angelic::PairKind;
use crate::lang::{Type, Value};
use crate::trace::{SchemaEntry, SynthesisInput, TraceRow};

use super::blocks::BuildingBlock;

/// One element of I_0: a schema input or an appended constant.
#[derive(Debug, Clone, PartialEq)]
pub enum I0Element {
    Input(SchemaEntry),
    Constant(Value),
}

impl I0Element {
    pub fn ty(&self) -> Type {
        match self {
            I0Element::Input(e) => e.ty,
            I0Element::Constant(v) => v.ty(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            I0Element::Input(e) => e.display_name(),
            I0Element::Constant(v) => v.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub i0: Vec<I0Element>,
    pub blocks: Vec<BuildingBlock>,
    pub rows: Vec<TraceRow>,
    /// Number of schema inputs at the front of `i0`.
    pub schema_len: usize,
    pub target: PairKind,
}

impl ConstraintSystem {
    pub fn i0_len(&self) -> usize {
        self.i0.len()
    }

    /// m = |I_0| + |B|; the final output location.
    pub fn m(&self) -> usize {
        self.i0.len() + self.blocks.len()
    }

    /// 1-based position of the i-th I_0 element.
    pub fn i0_position(&self, index: usize) -> usize {
        index + 1
    }

    /// Value of the i-th I_0 element in the given row.
    pub fn i0_value(&self, index: usize, row: &TraceRow) -> Value {
        match &self.i0[index] {
            I0Element::Input(_) => row.values[index].clone(),
            I0Element::Constant(v) => v.clone(),
        }
    }

    /// I_0 indices with the given type, ascending.
    pub fn i0_indices_of_type(&self, ty: Type) -> Vec<usize> {
        (0..self.i0.len())
            .filter(|&i| self.i0[i].ty() == ty)
            .collect()
    }

    /// Positions a Level-0 result may be wired to.
    pub fn bool_i0_positions(&self) -> Vec<usize> {
        self.i0_indices_of_type(Type::Bool)
            .into_iter()
            .map(|i| self.i0_position(i))
            .collect()
    }
}

/// Location variables of the system. `Result` is l_r; `BlockOut(k)` and
/// `BlockIn(k, j)` are block k's output and j-th input locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LocVar {
    Result,
    BlockOut(usize),
    BlockIn(usize, usize),
}

impl LocVar {
    pub fn smt_name(&self) -> String {
        match self {
            LocVar::Result => "l_r".to_string(),
            LocVar::BlockOut(k) => format!("l_out_b{k}"),
            LocVar::BlockIn(k, j) => format!("l_in_b{k}_{j}"),
        }
    }

    pub fn from_smt_name(name: &str) -> Option<LocVar> {
        if name == "l_r" {
            return Some(LocVar::Result);
        }
        if let Some(rest) = name.strip_prefix("l_out_b") {
            return rest.parse().ok().map(LocVar::BlockOut);
        }
        if let Some(rest) = name.strip_prefix("l_in_b") {
            let (k, j) = rest.split_once('_')?;
            return Some(LocVar::BlockIn(k.parse().ok()?, j.parse().ok()?));
        }
        None
    }
}

/// A satisfying assignment of the location variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub assignment: BTreeMap<LocVar, usize>,
}

impl Model {
    pub fn get(&self, var: LocVar) -> Option<usize> {
        self.assignment.get(&var).copied()
    }
}

/// Builds the system: schema inputs first, constants in trailing
/// positions of I_0.
pub fn encode(input: &SynthesisInput, blocks: Vec<BuildingBlock>) -> ConstraintSystem {
    let mut i0: Vec<I0Element> = input.schema.iter().cloned().map(I0Element::Input).collect();
    for (value, _) in &input.constants {
        i0.push(I0Element::Constant(value.clone()));
    }
    ConstraintSystem {
        i0,
        blocks,
        rows: input.rows.clone(),
        schema_len: input.schema.len(),
        target: input.target,
    }
}

/// Checks an assignment against every row by direct evaluation.
/// Returns false for assignments that violate the wiring constraints.
/// Blocks absent from the assignment are treated as dropped (the
/// internal solver omits unreachable blocks it cannot park).
pub fn verify_model(model: &Model, system: &ConstraintSystem) -> bool {
    let i0_len = system.i0_len();
    let m = system.m();

    // Output positions: distinct, in [|I_0|+1, m].
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, _) in system.blocks.iter().enumerate() {
        let Some(pos) = model.get(LocVar::BlockOut(k)) else {
            continue;
        };
        if pos <= i0_len || pos > m || owner.insert(pos, k).is_some() {
            return false;
        }
    }

    // Input wiring: same type, strictly below the block's output.
    for (k, block) in system.blocks.iter().enumerate() {
        let Some(out) = model.get(LocVar::BlockOut(k)) else {
            continue;
        };
        for j in 0..block.arity() {
            let Some(pos) = model.get(LocVar::BlockIn(k, j)) else {
                return false;
            };
            if pos >= out || pos < 1 || pos > m {
                return false;
            }
            let src_ty = if pos <= i0_len {
                system.i0[pos - 1].ty()
            } else {
                match owner.get(&pos) {
                    Some(&src) => system.blocks[src].output_type(),
                    None => return false,
                }
            };
            if src_ty != block.input_type() {
                return false;
            }
        }
    }

    let Some(result_pos) = model.get(LocVar::Result) else {
        return false;
    };
    if system.blocks.is_empty() {
        if result_pos > i0_len || system.i0[result_pos - 1].ty() != Type::Bool {
            return false;
        }
    } else if result_pos != m {
        return false;
    }

    // Row-by-row evaluation, positions ascending (inputs are below).
    for row in &system.rows {
        let mut values: Vec<Option<Value>> = vec![None; m + 1];
        for i in 0..i0_len {
            values[i + 1] = Some(system.i0_value(i, row));
        }
        let mut positions: Vec<usize> = owner.keys().copied().collect();
        positions.sort_unstable();
        for pos in positions {
            let k = owner[&pos];
            let block = &system.blocks[k];
            let mut args = Vec::with_capacity(block.arity());
            for j in 0..block.arity() {
                let src = model.get(LocVar::BlockIn(k, j)).unwrap();
                match &values[src] {
                    Some(v) => args.push(v.clone()),
                    None => return false,
                }
            }
            values[pos] = block.eval(&args);
            if values[pos].is_none() {
                return false;
            }
        }
        match &values[result_pos] {
            Some(Value::Bool(b)) => {
                if *b != row.expected {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::interp::InputOrigin;
    use crate::lang::Type;
    use crate::synth::blocks::{build_components, BlockOp};
    use crate::trace::ConstantOrigin;

    fn entry(name: &str, ty: Type) -> SchemaEntry {
        SchemaEntry {
            origin: InputOrigin::Var(name.into()),
            ty,
        }
    }

    fn row(values: Vec<Value>, expected: bool) -> TraceRow {
        TraceRow {
            test_name: "t".into(),
            execution_index: 1,
            values,
            expected,
        }
    }

    /// The worked wiring example: one int input, constants false and 3,
    /// a Bool->Bool block and an (Int, Int)->Bool block.
    pub(crate) fn worked_example() -> ConstraintSystem {
        let input = SynthesisInput {
            schema: vec![entry("i0", Type::Int)],
            rows: vec![row(vec![Value::Int(5)], true)],
            constants: vec![
                (Value::Bool(false), ConstantOrigin::Default),
                (Value::Int(3), ConstantOrigin::Default),
            ],
            target: PairKind::Condition,
            warnings: vec![],
        };
        let blocks = vec![
            BuildingBlock {
                id: 0,
                op: BlockOp::Not,
                operand_ty: Type::Bool,
            },
            BuildingBlock {
                id: 1,
                op: BlockOp::Eq,
                operand_ty: Type::Int,
            },
        ];
        encode(&input, blocks)
    }

    #[test]
    fn worked_example_positions() {
        let sys = worked_example();
        assert_eq!(sys.i0_len(), 3);
        assert_eq!(sys.m(), 5);
        assert_eq!(sys.i0_position(0), 1);
        assert_eq!(sys.i0_position(1), 2);
        assert_eq!(sys.i0_position(2), 3);
        // Block outputs range over [4, 5]; the result is pinned to 5.
        assert_eq!(sys.i0_len() + 1, 4);
    }

    #[test]
    fn zero_blocks_degenerates_to_direct_reuse() {
        let input = SynthesisInput {
            schema: vec![entry("b", Type::Bool)],
            rows: vec![row(vec![Value::Bool(true)], true)],
            constants: vec![],
            target: PairKind::Condition,
            warnings: vec![],
        };
        let sys = encode(&input, build_components(0, &input.schema));
        assert_eq!(sys.m(), sys.i0_len());
        assert_eq!(sys.bool_i0_positions(), vec![1]);
    }

    #[test]
    fn tcas_level1_m_is_i0_plus_four() {
        let schema = vec![
            entry("inhibit", Type::Bool),
            entry("up_sep", Type::Int),
            entry("down_sep", Type::Int),
            entry("bias", Type::Int),
        ];
        let input = SynthesisInput {
            schema: schema.clone(),
            rows: vec![],
            constants: vec![
                (Value::Int(0), ConstantOrigin::Default),
                (Value::Int(-1), ConstantOrigin::Default),
                (Value::Int(1), ConstantOrigin::Default),
            ],
            target: PairKind::Condition,
            warnings: vec![],
        };
        let sys = encode(&input, build_components(1, &schema));
        assert_eq!(sys.i0_len(), 7);
        assert_eq!(sys.m(), sys.i0_len() + 4);
    }

    #[test]
    fn verify_model_accepts_the_worked_assignment() {
        let sys = worked_example();
        // f2 (block 1) at position 5 reading i0 twice; f1 parked at 4.
        let mut assignment = BTreeMap::new();
        assignment.insert(LocVar::Result, 5);
        assignment.insert(LocVar::BlockOut(1), 5);
        assignment.insert(LocVar::BlockIn(1, 0), 1);
        assignment.insert(LocVar::BlockIn(1, 1), 1);
        assignment.insert(LocVar::BlockOut(0), 4);
        assignment.insert(LocVar::BlockIn(0, 0), 2);
        let model = Model { assignment };
        assert!(verify_model(&model, &sys), "5 == 5 is true as expected");

        // Wiring the block input to an int position breaks typing.
        let mut bad = model.clone();
        bad.assignment.insert(LocVar::BlockIn(0, 0), 3);
        assert!(!verify_model(&bad, &sys));
    }

    #[test]
    fn smt_names_round_trip() {
        for var in [LocVar::Result, LocVar::BlockOut(3), LocVar::BlockIn(2, 1)] {
            assert_eq!(LocVar::from_smt_name(&var.smt_name()), Some(var));
        }
    }
}
