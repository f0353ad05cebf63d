use thiserror::Error;

/// Errors raised while evaluating geometric quantities.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The warp function vanishes (within tolerance) at the evaluation point.
    #[error("warp function vanishes at t = {t} (|w| = {value:e})")]
    Pole { t: f64, value: f64 },

    /// A finite-difference stencil reaches across (or onto) a pole.
    #[error("finite-difference stencil around ({r}, {theta}) crosses a pole")]
    Stencil { r: f64, theta: f64 },

    /// Every grid point was removed by pole exclusion.
    #[error("grid is empty after pole exclusion")]
    EmptyGrid,

    /// A quadrature over the whole torus hit a grid point near a pole.
    #[error("grid point ({r}, {theta}) lies within the pole margin")]
    PoleOnDomain { r: f64, theta: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Hopf map was handed a point off the unit 3-sphere.
    #[error("point is not on the unit 3-sphere (|p|^2 = {norm_sq})")]
    NotOnSphere { norm_sq: f64 },

    #[error("cannot project the zero vector")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
