use std::fmt;

use diffraction_channel::Error as CoreError;

pub const INVALID: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const STRICT: u8 = 4;

/// Bad flags, config or inputs.
#[derive(Debug)]
pub struct Usage(pub String);

/// A requested closed form left its regime of validity under `--strict`.
#[derive(Debug)]
pub struct Strict(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Strict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "strict mode: {}", self.0)
    }
}

impl std::error::Error for Usage {}
impl std::error::Error for Strict {}

fn core_code(e: &CoreError) -> u8 {
    match e {
        CoreError::QuadratureNonconvergence(_)
        | CoreError::PassivityViolation { .. }
        | CoreError::DecompositionFailure
        | CoreError::Nonconvergence(_) => NUMERICAL,
        CoreError::InvalidSetup(_)
        | CoreError::InvalidThresholds { .. }
        | CoreError::Domain(_)
        | CoreError::GridTooSmall { .. }
        | CoreError::GridTooLarge { .. }
        | CoreError::QuadratureOrder { .. }
        | CoreError::UnsupportedPupil { .. } => INVALID,
    }
}

pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Strict>().is_some() {
            return STRICT;
        }
        if cause.downcast_ref::<Usage>().is_some() {
            return INVALID;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_code(e);
        }
    }
    1
}
