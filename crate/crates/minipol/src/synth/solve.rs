//! Internal backtracking solver.
//!
//! The search enumerates the wiring reachable from the output position
//! (the part of the assignment that determines the patch), checking
//! each complete candidate against every row by direct evaluation of
//! the block semantics. Candidates for a slot are tried in ascending
//! location order: same-typed I_0 positions first, then block outputs
//! by ascending block id — reusing an already-wired block (fan-out) or
//! opening a fresh one. Identical unused instances are symmetry-broken.
//! A row-consistent core is then extended to a full assignment by
//! parking the unreachable blocks in the remaining positions, and the
//! first complete model in this order is returned.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use crate::lang::{Type, Value};

use super::system::{verify_model, ConstraintSystem, LocVar, Model};

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Sat(Model),
    Unsat,
    Timeout,
}

pub fn solve_internal(system: &ConstraintSystem, budget: Duration) -> SolveOutcome {
    let deadline = Instant::now() + budget;

    if system.blocks.is_empty() {
        // Direct reuse: wire the result to a boolean element of I_0.
        for pos in system.bool_i0_positions() {
            let idx = pos - 1;
            let fits = system
                .rows
                .iter()
                .all(|row| system.i0_value(idx, row) == Value::Bool(row.expected));
            if fits {
                let mut assignment = BTreeMap::new();
                assignment.insert(LocVar::Result, pos);
                let model = Model { assignment };
                assert!(verify_model(&model, system), "level-0 model must verify");
                return SolveOutcome::Sat(model);
            }
        }
        return SolveOutcome::Unsat;
    }

    let mut search = Search {
        system,
        deadline,
        tick: 0,
        used: vec![false; system.blocks.len()],
        open: vec![false; system.blocks.len()],
        inputs: system
            .blocks
            .iter()
            .map(|b| vec![None; b.arity()])
            .collect(),
        closed_order: Vec::new(),
    };

    for root in 0..system.blocks.len() {
        if system.blocks[root].output_type() != Type::Bool {
            continue;
        }
        if search.symmetric_duplicate_unused(root) {
            continue;
        }
        search.used[root] = true;
        search.open[root] = true;
        let mut pending = vec![(root, 0usize)];
        let outcome = search.fill(&mut pending);
        search.used[root] = false;
        search.open[root] = false;
        match outcome {
            ControlFlow::Break(Found::Model(model)) => {
                assert!(
                    verify_model(&model, system),
                    "internal solver produced an inconsistent model"
                );
                return SolveOutcome::Sat(model);
            }
            ControlFlow::Break(Found::Timeout) => return SolveOutcome::Timeout,
            ControlFlow::Continue(()) => {}
        }
    }
    SolveOutcome::Unsat
}

/// Where a block input is wired: an I_0 index or another block's output.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Source {
    I0(usize),
    Block(usize),
}

enum Found {
    Model(Model),
    Timeout,
}

struct Search<'a> {
    system: &'a ConstraintSystem,
    deadline: Instant,
    tick: u32,
    used: Vec<bool>,
    open: Vec<bool>,
    inputs: Vec<Vec<Option<Source>>>,
    closed_order: Vec<usize>,
}

impl<'a> Search<'a> {
    fn out_of_time(&mut self) -> bool {
        self.tick += 1;
        self.tick % 4096 == 0 && Instant::now() > self.deadline
    }

    /// An unused block with a lower id and the same op/type would yield
    /// the same expression; skip the duplicate.
    fn symmetric_duplicate_unused(&self, b: usize) -> bool {
        let block = &self.system.blocks[b];
        self.system.blocks[..b]
            .iter()
            .enumerate()
            .any(|(c, other)| {
                !self.used[c] && other.op == block.op && other.operand_ty == block.operand_ty
            })
    }

    fn fill(&mut self, pending: &mut Vec<(usize, usize)>) -> ControlFlow<Found> {
        if self.out_of_time() {
            return ControlFlow::Break(Found::Timeout);
        }
        let Some((k, j)) = pending.pop() else {
            // Core complete; the last closed block is the root.
            let result = if self.core_satisfies_rows() {
                match self.assemble_model() {
                    Some(model) => ControlFlow::Break(Found::Model(model)),
                    None => ControlFlow::Continue(()),
                }
            } else {
                ControlFlow::Continue(())
            };
            return result;
        };

        if j == self.system.blocks[k].arity() {
            // Block k is fully wired; close it and keep filling.
            self.open[k] = false;
            self.closed_order.push(k);
            let r = self.fill(pending);
            self.closed_order.pop();
            self.open[k] = true;
            pending.push((k, j));
            return r;
        }

        let want = self.system.blocks[k].input_type();

        // I_0 leaves, ascending position.
        for idx in self.system.i0_indices_of_type(want) {
            self.inputs[k][j] = Some(Source::I0(idx));
            pending.push((k, j + 1));
            let r = self.fill(pending);
            pending.pop();
            self.inputs[k][j] = None;
            if r.is_break() {
                pending.push((k, j));
                return r;
            }
        }

        // Block outputs, ascending id: fan out to a closed block or
        // open a fresh instance.
        for b in 0..self.system.blocks.len() {
            if self.system.blocks[b].output_type() != want {
                continue;
            }
            if self.open[b] {
                continue;
            }
            if self.used[b] {
                self.inputs[k][j] = Some(Source::Block(b));
                pending.push((k, j + 1));
                let r = self.fill(pending);
                pending.pop();
                self.inputs[k][j] = None;
                if r.is_break() {
                    pending.push((k, j));
                    return r;
                }
            } else {
                if self.symmetric_duplicate_unused(b) {
                    continue;
                }
                self.inputs[k][j] = Some(Source::Block(b));
                self.used[b] = true;
                self.open[b] = true;
                pending.push((k, j + 1));
                pending.push((b, 0));
                let r = self.fill(pending);
                pending.pop();
                pending.pop();
                self.open[b] = false;
                self.used[b] = false;
                self.inputs[k][j] = None;
                if r.is_break() {
                    pending.push((k, j));
                    return r;
                }
            }
        }

        pending.push((k, j));
        ControlFlow::Continue(())
    }

    fn core_satisfies_rows(&self) -> bool {
        let root = *self.closed_order.last().expect("root closed last");
        self.system.rows.iter().all(|row| {
            let mut memo: Vec<Option<Option<Value>>> = vec![None; self.system.blocks.len()];
            match self.eval_block(root, row, &mut memo) {
                Some(Value::Bool(b)) => b == row.expected,
                _ => false,
            }
        })
    }

    fn eval_block(
        &self,
        k: usize,
        row: &crate::trace::TraceRow,
        memo: &mut Vec<Option<Option<Value>>>,
    ) -> Option<Value> {
        if let Some(v) = &memo[k] {
            return v.clone();
        }
        let block = &self.system.blocks[k];
        let mut args = Vec::with_capacity(block.arity());
        let mut result = Some(());
        for j in 0..block.arity() {
            let arg = match self.inputs[k][j].expect("closed block is fully wired") {
                Source::I0(idx) => Some(self.system.i0_value(idx, row)),
                Source::Block(b) => self.eval_block(b, row, memo),
            };
            match arg {
                Some(v) => args.push(v),
                None => {
                    result = None;
                    break;
                }
            }
        }
        let value = result.and_then(|()| block.eval(&args));
        memo[k] = Some(value.clone());
        value
    }

    /// Turns the validated core into a full assignment: core blocks get
    /// the lowest output positions in closing order with the root at m,
    /// then the unreachable blocks are parked in the remaining slots.
    fn assemble_model(&self) -> Option<Model> {
        let system = self.system;
        let i0_len = system.i0_len();
        let m = system.m();
        let root = *self.closed_order.last().unwrap();

        let mut position_of: BTreeMap<usize, usize> = BTreeMap::new();
        let mut next = i0_len + 1;
        for &k in &self.closed_order[..self.closed_order.len() - 1] {
            position_of.insert(k, next);
            next += 1;
        }
        position_of.insert(root, m);

        let remaining: Vec<usize> = (next..m).collect();
        let unused: Vec<usize> = (0..system.blocks.len())
            .filter(|b| !self.used[*b])
            .collect();
        debug_assert_eq!(remaining.len(), unused.len());

        // Park the unreachable blocks in the remaining positions. Some
        // multisets admit no full wiring (e.g. a lone logic block with
        // no boolean source below it); the patch is still real, so fall
        // back to a partial model that simply omits those blocks.
        let mut parked: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut budget = 100_000u32;
        let fully_parked = self.park(
            &remaining,
            &unused,
            &mut position_of,
            &mut parked,
            &mut budget,
        );
        if !fully_parked {
            parked.clear();
            for b in &unused {
                position_of.remove(b);
            }
        }

        let mut assignment = BTreeMap::new();
        assignment.insert(LocVar::Result, m);
        for (&k, &pos) in &position_of {
            assignment.insert(LocVar::BlockOut(k), pos);
        }
        for (k, wires) in self.inputs.iter().enumerate() {
            if !self.used[k] {
                continue;
            }
            for (j, src) in wires.iter().enumerate() {
                let pos = match src.expect("used block fully wired") {
                    Source::I0(idx) => system.i0_position(idx),
                    Source::Block(b) => position_of[&b],
                };
                assignment.insert(LocVar::BlockIn(k, j), pos);
            }
        }
        for (&k, wires) in &parked {
            for (j, &pos) in wires.iter().enumerate() {
                assignment.insert(LocVar::BlockIn(k, j), pos);
            }
        }
        Some(Model { assignment })
    }

    /// Backtracking placement of unused blocks into the remaining
    /// positions. Inputs are wired to the lowest same-typed position
    /// below; a wiring whose value overflows on some row is rejected so
    /// the final model verifies.
    fn park(
        &self,
        remaining: &[usize],
        unused: &[usize],
        position_of: &mut BTreeMap<usize, usize>,
        parked: &mut BTreeMap<usize, Vec<usize>>,
        budget: &mut u32,
    ) -> bool {
        let Some((&pos, rest_positions)) = remaining.split_first() else {
            return true;
        };
        if *budget == 0 {
            return false;
        }
        *budget -= 1;

        'candidates: for (uidx, &b) in unused.iter().enumerate() {
            // Interchangeable instances: only try the first of a kind.
            let block = &self.system.blocks[b];
            if unused[..uidx].iter().any(|&c| {
                !position_of.contains_key(&c)
                    && self.system.blocks[c].op == block.op
                    && self.system.blocks[c].operand_ty == block.operand_ty
            }) {
                continue;
            }
            if position_of.contains_key(&b) {
                continue;
            }

            let sources = self.sources_below(pos, block.input_type(), position_of);
            if sources.is_empty() {
                continue;
            }
            // Try source combinations, lowest first.
            let arity = block.arity();
            let mut pick = vec![0usize; arity];
            loop {
                if *budget == 0 {
                    return false;
                }
                *budget -= 1;
                let wires: Vec<usize> = pick.iter().map(|&i| sources[i]).collect();
                if self.parked_values_ok(b, &wires, position_of, parked) {
                    position_of.insert(b, pos);
                    parked.insert(b, wires);
                    if self.park(rest_positions, unused, position_of, parked, budget) {
                        return true;
                    }
                    parked.remove(&b);
                    position_of.remove(&b);
                }
                // Advance the odometer over source choices.
                let mut i = arity;
                loop {
                    if i == 0 {
                        continue 'candidates;
                    }
                    i -= 1;
                    pick[i] += 1;
                    if pick[i] < sources.len() {
                        break;
                    }
                    pick[i] = 0;
                }
            }
        }
        false
    }

    /// Positions strictly below `pos` carrying the wanted type.
    fn sources_below(
        &self,
        pos: usize,
        want: Type,
        position_of: &BTreeMap<usize, usize>,
    ) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .system
            .i0_indices_of_type(want)
            .into_iter()
            .map(|i| self.system.i0_position(i))
            .collect();
        for (&b, &p) in position_of {
            if p < pos && self.system.blocks[b].output_type() == want {
                out.push(p);
            }
        }
        out.sort_unstable();
        out
    }

    /// Every row must give the parked block a defined (non-overflowing)
    /// value through the chosen wiring.
    fn parked_values_ok(
        &self,
        b: usize,
        wires: &[usize],
        position_of: &BTreeMap<usize, usize>,
        parked: &BTreeMap<usize, Vec<usize>>,
    ) -> bool {
        self.system.rows.iter().all(|row| {
            self.value_at_positions(b, wires, row, position_of, parked)
                .is_some()
        })
    }

    fn value_at_positions(
        &self,
        b: usize,
        wires: &[usize],
        row: &crate::trace::TraceRow,
        position_of: &BTreeMap<usize, usize>,
        parked: &BTreeMap<usize, Vec<usize>>,
    ) -> Option<Value> {
        let mut args = Vec::with_capacity(wires.len());
        for &pos in wires {
            args.push(self.value_of_position(pos, row, position_of, parked)?);
        }
        self.system.blocks[b].eval(&args)
    }

    fn value_of_position(
        &self,
        pos: usize,
        row: &crate::trace::TraceRow,
        position_of: &BTreeMap<usize, usize>,
        parked: &BTreeMap<usize, Vec<usize>>,
    ) -> Option<Value> {
        if pos <= self.system.i0_len() {
            return Some(self.system.i0_value(pos - 1, row));
        }
        let (&b, _) = position_of.iter().find(|(_, &p)| p == pos)?;
        if let Some(wires) = parked.get(&b) {
            return self.value_at_positions(b, wires, row, position_of, parked);
        }
        // A core block: evaluate through its wiring.
        let block = &self.system.blocks[b];
        let mut args = Vec::with_capacity(block.arity());
        for j in 0..block.arity() {
            let v = match self.inputs[b][j].expect("core block wired") {
                Source::I0(idx) => Some(self.system.i0_value(idx, row)),
                Source::Block(c) => {
                    let mut memo = vec![None; self.system.blocks.len()];
                    self.eval_block(c, row, &mut memo)
                }
            };
            args.push(v?);
        }
        block.eval(&args)
    }
}
