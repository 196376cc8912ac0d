//! Reading configuration pairs and classifying failures.

use std::fmt;
use std::path::{Path, PathBuf};

use qot_core::gaussian::{ConfigurationFile, PhaseSpaceContext, WeightedConfiguration};
use serde::Deserialize;

/// Exit status 2: the input could not be used.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug)]
pub enum Failure {
    Input(InputError),
    Core(qot_core::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        use qot_core::Error as E;
        match self {
            Failure::Input(_) => 2,
            Failure::Core(e) => match e {
                E::InvalidContext(_)
                | E::NonFinite(_)
                | E::InvalidConfiguration(_)
                | E::NearDependentStates { .. }
                | E::BasisMismatch(_)
                | E::DimensionMismatch(_)
                | E::InfeasibleMasses(..)
                | E::NonzeroMomentum
                | E::GridMismatch(_)
                | E::InfeasibleAnsatz(_)
                | E::Io(_)
                | E::Json(_)
                | E::Csv(_) => 2,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(e) => write!(f, "input error: {e}"),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<qot_core::Error> for Failure {
    fn from(e: qot_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

/// Accepted layouts of a configuration file.
#[derive(Deserialize)]
#[serde(untagged)]
enum Document {
    Pair([ConfigurationFile; 2]),
    Named {
        x: ConfigurationFile,
        y: ConfigurationFile,
    },
    Single(ConfigurationFile),
}

fn read_document(path: &Path) -> Result<Document, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        InputError(format!(
            "{}: not a configuration file ({e})",
            path.display()
        ))
        .into()
    })
}

/// Two configurations with a common `ℏ`, from one file holding both (an
/// array of two, or `{"x": .., "y": ..}`) or from two single-state files.
pub fn load_pair(
    paths: &[PathBuf],
) -> Result<
    (
        PhaseSpaceContext,
        WeightedConfiguration,
        WeightedConfiguration,
    ),
    Failure,
> {
    let (fx, fy) = match paths {
        [one] => match read_document(one)? {
            Document::Pair([x, y]) | Document::Named { x, y } => (x, y),
            Document::Single(_) => {
                return Err(InputError(format!(
                    "{} holds one configuration; pass a second --config",
                    one.display()
                ))
                .into())
            }
        },
        [first, second] => match (read_document(first)?, read_document(second)?) {
            (Document::Single(x), Document::Single(y)) => (x, y),
            _ => {
                return Err(InputError(
                    "with two --config files each must hold a single configuration".into(),
                )
                .into())
            }
        },
        _ => return Err(InputError("expected one or two --config files".into()).into()),
    };
    if fx.hbar != fy.hbar {
        return Err(InputError(format!(
            "configurations disagree on hbar ({} vs {})",
            fx.hbar, fy.hbar
        ))
        .into());
    }
    let (ctx, x) = fx.into_parts()?;
    let (_, y) = fy.into_parts()?;
    Ok((ctx, x, y))
}
