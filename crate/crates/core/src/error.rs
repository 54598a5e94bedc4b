use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("probs: {0}")]
    InvalidDistribution(String),

    #[error("base K must be at least 2, got {0}")]
    InvalidBase(u32),

    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("{name} = {value} out of range: expected {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{classes} type classes exceed the ceiling of {ceiling}")]
    CeilingExceeded { classes: String, ceiling: u64 },

    #[error("non-finite log-probability for type {0:?}")]
    LogOverflow(Vec<u32>),

    #[error("spectrum mass sums to {sum}, off by more than {tol}")]
    Normalization { sum: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            expected,
        })
    }
}
