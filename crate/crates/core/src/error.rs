use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar parameter fell outside its admissible range.
    #[error("{name} = {value} is outside the valid range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// The photon-number cutoff of a state container would be exceeded.
    #[error("occupation with {total} photons exceeds the cutoff of {cutoff}")]
    Truncation { total: u32, cutoff: u32 },

    #[error("matrix is not unitary (max |UU^† - I| = {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("{0}")]
    Usage(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Self {
        Error::Domain { name, value, range }
    }
}

/// Checks `lo <= value <= hi`, also rejecting NaN.
pub(crate) fn check_closed(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::domain(name, value, range))
    }
}
