//! Problem-file parsing and report rendering behind the `ipw` binary.

pub mod problem;
pub mod report;
