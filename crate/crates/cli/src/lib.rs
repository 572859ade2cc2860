//! File formats and subcommands behind the `otreg` binary.

pub mod commands;
pub mod formats;
mod svg;

use std::fmt;

/// A problem with the user's flags or input files (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

pub fn input_error(msg: impl fmt::Display) -> anyhow::Error {
    InputError(msg.to_string()).into()
}

/// 2 for bad input or flags, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let is_input = err
        .chain()
        .any(|e| e.is::<InputError>() || e.is::<otreg::Error>());
    if is_input {
        2
    } else {
        1
    }
}
