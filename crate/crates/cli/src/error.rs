use std::fmt;
use std::path::Path;

use varexp::criteria::Status;

/// Exit codes: verdict statuses map to 0/1/2, failures to run use the sysexits values.
pub mod code {
    pub const PASS: u8 = 0;
    pub const FAIL: u8 = 1;
    pub const UNDECIDED: u8 = 2;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const IO: u8 = 74;
}

/// Exit code for a set of verdict statuses: any failure gives 1, otherwise any boundary or
/// unknown gives 2. No verdicts at all counts as a pass.
pub fn status_code(statuses: impl IntoIterator<Item = Status>) -> u8 {
    match Status::all(statuses) {
        Status::Pass => code::PASS,
        Status::Fail => code::FAIL,
        Status::Boundary | Status::Unknown => code::UNDECIDED,
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => code::USAGE,
            CliError::Data(_) => code::DATA,
            CliError::Io(_) => code::IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Data(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<varexp::Error> for CliError {
    fn from(e: varexp::Error) -> Self {
        match e {
            varexp::Error::Io(m) => CliError::Io(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_map_to_codes() {
        assert_eq!(status_code([]), 0);
        assert_eq!(status_code([Status::Pass, Status::Pass]), 0);
        assert_eq!(status_code([Status::Pass, Status::Boundary]), 2);
        assert_eq!(status_code([Status::Unknown, Status::Fail]), 1);
    }
}
