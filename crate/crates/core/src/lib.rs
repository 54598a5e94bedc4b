//! Exact finite-blocklength analysis of variable-length source coding with
//! a nonvanishing error probability.
//!
//! The crate builds the exact self-information spectrum of a source at block
//! length `n` from its type classes, then evaluates on it
//!
//! * information-spectrum functionals ([`spectrum`]),
//! * explicit codes and the exact optimal error/overflow tradeoff
//!   ([`codes`]),
//! * finite-blocklength achievability and converse bounds ([`bounds`]),
//! * closed-form first/second-order predictions and convergence studies
//!   ([`asymptotics`]).
//!
//! Logarithms are natural internally; every rate crossing the API is in
//! base-`K` units per source symbol, where `K` is the code alphabet size
//! carried by the [`Distribution`].

pub mod asymptotics;
pub mod bounds;
pub mod codes;
pub mod error;
pub mod numeric;
pub mod source;
pub mod spectrum;

pub use error::{Error, Result};
pub use source::{
    iid_spectrum, mixed_spectrum, sample_sequences, switching_spectrum, BlockModel, Distribution,
    Spectrum, SpectrumAtom, SpectrumBuilder, SwitchRule, SwitchingSchedule,
};
pub use spectrum::Comparator;
