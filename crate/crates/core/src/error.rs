use thiserror::Error;

/// Errors raised by the geometry, calculus and flow routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A coordinate outside the closed interval the formula is defined on.
    #[error("coordinate {value} is outside [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    /// Invalid construction parameters (node counts, weights, flow settings).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Operands sampled on different collocation grids.
    #[error("operands live on different grids ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    /// A model parameter (codimension, dimension) out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain {
            value: t,
            lo: 0.0,
            hi: 1.0,
        })
    }
}
