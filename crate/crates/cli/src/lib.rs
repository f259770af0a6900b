//! Experiment harness for `fdstep`: error analysis, CSV records and the
//! table reproduction runs behind the `fdstep` binary.

pub mod analysis;
pub mod experiments;
pub mod records;
