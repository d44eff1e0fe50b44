use std::fmt;
use std::path::PathBuf;

use crate::grid::Species;

/// Where a positivity violation was detected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    /// Interior cell, as `(i, j, k)`.
    Cell([isize; 3]),
    /// Face normal to `axis`, indexed by the cell on its high side.
    Face { axis: usize, index: [isize; 3] },
    /// A bare coefficient evaluation with no grid context.
    Point,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Cell([i, j, k]) => write!(f, "cell ({i}, {j}, {k})"),
            Location::Face { axis, index: [i, j, k] } => {
                let name = ["x", "y", "z"][*axis];
                write!(f, "{name}-face below cell ({i}, {j}, {k})")
            }
            Location::Point => write!(f, "point evaluation"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-positive {species} temperature/energy {value:e} at {location}")]
    Positivity {
        species: Species,
        value: f64,
        location: Location,
    },

    #[error("reconstruction error: {0}")]
    Reconstruction(String),

    #[error("solver error: {0}")]
    Solver(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a grid location to a positivity violation raised without one.
    pub(crate) fn at(self, location: Location) -> Self {
        match self {
            Error::Positivity {
                species,
                value,
                location: Location::Point,
            } => Error::Positivity {
                species,
                value,
                location,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
