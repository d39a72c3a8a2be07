use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a diffeomorphism germ: linear coefficient is zero")]
    NotADiffeomorphism,

    #[error("degenerate path: eps_min {eps_min} is not below the base radius {radius}")]
    DegeneratePath { eps_min: f64, radius: f64 },

    #[error("singular point: the leaf equation is undefined at x = 0")]
    SingularPoint,

    #[error(
        "leaf escaped: path not asymptotic for this initial condition \
         (sector {sector}, sample {}, y0 = {y0}, reached |y| = {y_abs:e} at x = {x})",
        sample.map_or_else(|| "-".to_string(), |s| s.to_string())
    )]
    LeafEscaped {
        sector: i64,
        sample: Option<usize>,
        y0: Complex64,
        x: Complex64,
        y_abs: f64,
    },

    #[error("non-integrable payload: g(x,0) must lie in x^(k+1)C{{x}} ({0})")]
    NonIntegrablePayload(String),

    #[error("first integral collapsed at sample {sample} of sector {sector}")]
    FirstIntegralCollapsed { sector: usize, sample: usize },

    #[error("model coefficient not defined for n = 0")]
    ZeroOrder,

    #[error("resonant index: σ+μ condition violated (m = {m}, n = {n})")]
    ResonantIndex { m: u32, n: u32 },

    #[error("payload evaluated to a non-finite value at x = {x}, y = {y}")]
    NonFinitePayload { x: Complex64, y: Complex64 },

    #[error("unit U vanished on domain at x = {x}, y = {y}")]
    UnitVanished { x: Complex64, y: Complex64 },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to input validation.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::LeafEscaped { .. }
                | Error::FirstIntegralCollapsed { .. }
                | Error::UnitVanished { .. }
                | Error::NonFinitePayload { .. }
                | Error::SingularPoint
                | Error::ResonantIndex { .. }
        )
    }
}
