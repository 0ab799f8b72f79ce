//! Descriptor and report documents in TOML.

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::closure::BettingStrategy;
use crate::constructions::bpp::SyntheticBpp;
use crate::constructions::domination::DominationFamily;
use crate::error::{Error, Result, DEFAULT_BUDGET};
use crate::martingale::Martingale;
use crate::scan::{Permutation, ScanningFunction};
use crate::sequence::SequenceOracle;

/// Descriptors that can be checked after parsing.
pub trait Validate {
    fn validate_descriptor(&self) -> Result<()>;
}

macro_rules! validate_via {
    ($($ty:ty),*) => {
        $(impl Validate for $ty {
            fn validate_descriptor(&self) -> Result<()> {
                self.validate()
            }
        })*
    };
}

validate_via!(Martingale, Permutation, ScanningFunction, SequenceOracle, SyntheticBpp, DominationFamily);

impl Validate for BettingStrategy {
    fn validate_descriptor(&self) -> Result<()> {
        self.validate(DEFAULT_BUDGET)
    }
}

pub fn to_document<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses without validating.
pub fn parse_document<T: DeserializeOwned>(text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses and validates a descriptor.
pub fn from_document<T: DeserializeOwned + Validate>(text: &str) -> Result<T> {
    let value: T = parse_document(text)?;
    value.validate_descriptor()?;
    Ok(value)
}
