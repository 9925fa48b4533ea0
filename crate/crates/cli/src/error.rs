use std::fmt;
use std::path::Path;

/// Process exit classes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad config document, override or argument.
    Config(String),
    /// Failure inside the library; classified by kind.
    Core(fiberpair::Error),
    /// Library failure attributed to an input file.
    Input(String, fiberpair::Error),
    Io(String, std::io::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, e: std::io::Error) -> Self {
        CliError::Io(path.as_ref().display().to_string(), e)
    }

    pub fn input(path: impl AsRef<Path>, e: fiberpair::Error) -> Self {
        CliError::Input(path.as_ref().display().to_string(), e)
    }

    pub fn exit_code(&self) -> i32 {
        let core = |e: &fiberpair::Error| {
            if e.is_domain() {
                EXIT_DOMAIN
            } else {
                match e {
                    fiberpair::Error::Io(_) => EXIT_IO,
                    fiberpair::Error::Json(_) => EXIT_OTHER,
                    _ => EXIT_CONFIG,
                }
            }
        };
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) | CliError::Input(_, e) => core(e),
            CliError::Io(..) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Input(p, e) => write!(f, "{p}: {e}"),
            CliError::Io(p, e) => write!(f, "{p}: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fiberpair::Error> for CliError {
    fn from(e: fiberpair::Error) -> Self {
        CliError::Core(e)
    }
}
