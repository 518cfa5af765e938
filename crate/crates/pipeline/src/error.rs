use std::fmt;
use std::path::{Path, PathBuf};

use marginalia_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Image {
        path: PathBuf,
        source: image::ImageError,
    },
    /// Problem with a whole input file.
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    /// Problem with one record of a line-delimited file.
    #[error("{}:{line}: {message}", path.display())]
    Line {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{} not found; run the `{stage}` stage first", path.display())]
    MissingStage { stage: &'static str, path: PathBuf },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("{}", ErrorList(.0))]
    Many(Vec<Error>),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

struct ErrorList<'a>(&'a [Error]);

impl fmt::Display for ErrorList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error(s)", self.0.len())?;
        for e in self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.as_ref().to_path_buf();
        move |source| Error::Io { path, source }
    }

    pub fn parse(path: impl AsRef<Path>, message: impl Into<String>) -> Error {
        Error::Parse {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    pub fn line(path: impl AsRef<Path>, line: usize, message: impl Into<String>) -> Error {
        Error::Line {
            path: path.as_ref().to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Folds several errors into one; a single error is returned as is.
    pub fn many(mut errors: Vec<Error>) -> Error {
        if errors.len() == 1 {
            errors.pop().expect("one error")
        } else {
            Error::Many(errors)
        }
    }

    /// Process exit code: 2 for broken internal invariants, 1 for
    /// everything caused by inputs or configuration.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Invariant(_) => 2,
            Error::Core(e) => match e {
                CoreError::InvalidParameter { .. }
                | CoreError::Empty(_)
                | CoreError::OutOfBounds { .. }
                | CoreError::DegenerateBox { .. } => 1,
                _ => 2,
            },
            Error::Many(all) => all.iter().map(Error::exit_code).max().unwrap_or(1),
            _ => 1,
        }
    }
}
