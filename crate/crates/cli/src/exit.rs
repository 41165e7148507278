//! Exit-code contract: 0 success, 1 usage/config, 2 validation,
//! 3 property violation, 4 internal numerical error.

use std::fmt;

use wirl_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Validation = 2,
    Property = 3,
    Numerical = 4,
}

/// An error carrying its own exit code.
#[derive(Debug)]
pub struct Coded {
    pub kind: ExitKind,
    pub message: String,
}

impl Coded {
    pub fn new(kind: ExitKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Coded {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    Coded::new(ExitKind::Usage, message).into()
}

pub fn validation(message: impl Into<String>) -> anyhow::Error {
    Coded::new(ExitKind::Validation, message).into()
}

fn core_kind(err: &CoreError) -> ExitKind {
    match err {
        CoreError::Validation { .. } | CoreError::Parse { .. } => ExitKind::Validation,
        CoreError::Numerical(_) => ExitKind::Numerical,
        CoreError::Solver { source, .. } => core_kind(source),
        CoreError::Shape(_) | CoreError::Domain(_) | CoreError::Config(_) => ExitKind::Usage,
    }
}

/// Exit code for an error chain; the outermost classified cause wins.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(c) = cause.downcast_ref::<Coded>() {
            return c.kind as i32;
        }
        if let Some(c) = cause.downcast_ref::<CoreError>() {
            return core_kind(c) as i32;
        }
    }
    ExitKind::Usage as i32
}
