//! minipol: test-suite driven repair of buggy if conditions and missing
//! preconditions in mini-lang programs.
//!
//! The pipeline runs the suite, ranks statements by Ochiai
//! suspiciousness, searches for angelic (location, value) pairs,
//! collects runtime traces at each pair, synthesizes a replacement
//! expression from building blocks (internal solver or SMT-LIB 2
//! export), and validates the patched program against the whole suite.

pub mod angelic;
pub mod cli;
pub mod corpus;
pub mod driver;
pub mod interp;
pub mod lang;
pub mod spectrum;
pub mod suite;
pub mod synth;
pub mod trace;
