//! Batch front-end: verification runs and machine-readable reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod fixtures;
pub mod numbers;
pub mod report;

/// Worker count from `ALE_NUM_THREADS`; `None` leaves the default.
pub fn thread_limit(var: Option<&str>) -> Result<Option<usize>, String> {
    match var.map(str::trim) {
        None | Some("") => Ok(None),
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("ALE_NUM_THREADS must be a positive integer, got {s:?}")),
        },
    }
}
