//! Coverage spectrum and Ochiai suspiciousness ranking.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::interp::{ExecutionRecord, TestCase};
use crate::lang::NodeId;

/// Per-statement pass/fail coverage counts. Statements never observed
/// report zero counts.
#[derive(Debug, Clone, Default)]
pub struct Spectrum {
    counts: BTreeMap<NodeId, (u32, u32)>,
    total_failed: u32,
    total_passed: u32,
}

impl Spectrum {
    /// Failing tests covering the statement.
    pub fn failed(&self, id: NodeId) -> u32 {
        self.counts.get(&id).map(|c| c.0).unwrap_or(0)
    }

    /// Passing tests covering the statement.
    pub fn passed(&self, id: NodeId) -> u32 {
        self.counts.get(&id).map(|c| c.1).unwrap_or(0)
    }

    pub fn total_failed(&self) -> u32 {
        self.total_failed
    }

    pub fn total_passed(&self) -> u32 {
        self.total_passed
    }

    /// Node ids observed in any coverage set, ascending.
    pub fn observed(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.counts.keys().copied()
    }
}

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("{records} execution records for {tests} tests")]
    LengthMismatch { records: usize, tests: usize },
    #[error("nothing to localize: no failing test in the suite")]
    NothingToLocalize,
}

/// Builds the spectrum from one record per test. A runtime error counts
/// as a failing status.
pub fn build_spectrum(
    records: &[ExecutionRecord],
    suite: &[TestCase],
) -> Result<Spectrum, SpectrumError> {
    if records.len() != suite.len() {
        return Err(SpectrumError::LengthMismatch {
            records: records.len(),
            tests: suite.len(),
        });
    }
    let mut spectrum = Spectrum::default();
    for record in records {
        let passed = record.status.is_pass();
        if passed {
            spectrum.total_passed += 1;
        } else {
            spectrum.total_failed += 1;
        }
        for &id in &record.covered_statements {
            let slot = spectrum.counts.entry(id).or_insert((0, 0));
            if passed {
                slot.1 += 1;
            } else {
                slot.0 += 1;
            }
        }
    }
    Ok(spectrum)
}

/// susp(s) = failed(s) / sqrt(total_failed * (failed(s) + passed(s))),
/// with susp = 0 when failed(s) = 0.
pub fn ochiai(failed: u32, passed: u32, total_failed: u32) -> f64 {
    if failed == 0 {
        return 0.0;
    }
    let f = failed as f64;
    let denom = (total_failed as f64 * (f + passed as f64)).sqrt();
    f / denom
}

/// Ranks observed statements by descending suspiciousness; ties break
/// toward the earlier source position (node ids are pre-order, so
/// ascending id is ascending line/col).
pub fn ochiai_rank(spectrum: &Spectrum) -> Result<Vec<(NodeId, f64)>, SpectrumError> {
    if spectrum.total_failed == 0 {
        return Err(SpectrumError::NothingToLocalize);
    }
    let mut ranked: Vec<(NodeId, f64)> = spectrum
        .counts
        .iter()
        .map(|(&id, &(failed, passed))| (id, ochiai(failed, passed, spectrum.total_failed)))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(ranked)
}
