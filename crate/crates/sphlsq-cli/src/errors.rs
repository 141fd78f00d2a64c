//! Process exit-code policy: 2 for validation problems, 3 for numerical
//! failures (deficient layers, non-convergence), 4 for file I/O.

use sphlsq::Error as CoreError;

#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Numerical(String),
    Io(String),
}

pub type CmdResult<T> = Result<T, CmdError>;

impl CmdError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CmdError::Validation(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CmdError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 2,
            CmdError::Numerical(_) => 3,
            CmdError::Io(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Validation(m) | CmdError::Numerical(m) | CmdError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        match &e {
            CoreError::MzDeficient(_) | CoreError::NonConvergence { .. } => {
                CmdError::Numerical(e.to_string())
            }
            _ => CmdError::Validation(e.to_string()),
        }
    }
}
