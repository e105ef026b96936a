//! Angelic fix localization: find (location, forced value) pairs that
//! make every failing test pass.
//!
//! For candidate if-conditions the search forces true first, then
//! false, so at most two executions happen per (condition, failing
//! test). For candidate statements a single skipped execution decides.
//! Only failing tests are ever executed here.

use std::collections::BTreeMap;

use crate::interp::{run_test, Directive, InterpError, TestCase};
use crate::lang::{NodeId, SourceLoc, TypedProgram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Condition,
    Precondition,
}

/// A repair site with the per-failing-test angelic values.
#[derive(Debug, Clone)]
pub struct AngelicPair {
    /// The if-condition expression node (condition kind) or the
    /// statement node (precondition kind).
    pub node_id: NodeId,
    pub loc: SourceLoc,
    pub kind: PairKind,
    /// Failing-test name -> angelic value. Always false for
    /// precondition pairs; condition values may differ per test.
    pub values: BTreeMap<String, bool>,
    pub suspiciousness: f64,
}

/// Result of one localization phase, with instrumentation counters.
#[derive(Debug, Clone, Default)]
pub struct Localization {
    /// Pairs in candidate rank order.
    pub pairs: Vec<AngelicPair>,
    /// Candidates examined, in rank order.
    pub examined: Vec<NodeId>,
    /// Number of test executions performed.
    pub executions: usize,
}

/// Searches ranked if-conditions for angelic values. `ranked` carries
/// (condition node id, suspiciousness) ordered by rank; `budget` caps
/// how many candidates are examined.
pub fn locate_condition_fixes(
    program: &TypedProgram,
    failing: &[TestCase],
    ranked: &[(NodeId, f64)],
    budget: usize,
) -> Result<Localization, InterpError> {
    let mut out = Localization::default();
    for &(cond_id, susp) in ranked.iter().take(budget) {
        out.examined.push(cond_id);
        let mut values = BTreeMap::new();
        let mut all_pass = true;
        for test in failing {
            let mut found = None;
            // Try true first, then false, so results are deterministic.
            for value in [true, false] {
                out.executions += 1;
                let record = run_test(
                    program,
                    test,
                    Some(Directive::ForceCondition {
                        node_id: cond_id,
                        value,
                    }),
                    false,
                )?;
                if record.status.is_pass() {
                    found = Some(value);
                    break;
                }
            }
            match found {
                Some(v) => {
                    values.insert(test.name.clone(), v);
                }
                None => {
                    all_pass = false;
                    break;
                }
            }
        }
        if all_pass {
            let loc = program
                .program()
                .if_by_condition(cond_id)
                .map(|s| s.loc.clone())
                .expect("ranked candidate is an if condition");
            out.pairs.push(AngelicPair {
                node_id: cond_id,
                loc,
                kind: PairKind::Condition,
                values,
                suspiciousness: susp,
            });
        }
    }
    Ok(out)
}

/// Searches ranked skippable statements for a skip that makes every
/// failing test pass. The angelic value of a precondition is false.
pub fn locate_precondition_fixes(
    program: &TypedProgram,
    failing: &[TestCase],
    ranked: &[(NodeId, f64)],
    budget: usize,
) -> Result<Localization, InterpError> {
    let mut out = Localization::default();
    for &(stmt_id, susp) in ranked.iter().take(budget) {
        out.examined.push(stmt_id);
        let mut all_pass = true;
        for test in failing {
            out.executions += 1;
            let record = run_test(
                program,
                test,
                Some(Directive::SkipStatement { node_id: stmt_id }),
                false,
            )?;
            if !record.status.is_pass() {
                all_pass = false;
                break;
            }
        }
        if all_pass {
            let loc = program
                .program()
                .statement(stmt_id)
                .map(|s| s.loc.clone())
                .expect("ranked candidate is a statement");
            let values = failing.iter().map(|t| (t.name.clone(), false)).collect();
            out.pairs.push(AngelicPair {
                node_id: stmt_id,
                loc,
                kind: PairKind::Precondition,
                values,
                suspiciousness: susp,
            });
        }
    }
    Ok(out)
}

/// The directive realizing this pair for one failing test.
impl AngelicPair {
    pub fn directive_for(&self, test_name: &str) -> Option<Directive> {
        match self.kind {
            PairKind::Condition => {
                self.values
                    .get(test_name)
                    .map(|&value| Directive::ForceCondition {
                        node_id: self.node_id,
                        value,
                    })
            }
            PairKind::Precondition => {
                self.values
                    .get(test_name)
                    .map(|_| Directive::SkipStatement {
                        node_id: self.node_id,
                    })
            }
        }
    }
}
