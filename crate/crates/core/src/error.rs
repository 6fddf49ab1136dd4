use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("complete elliptic integral diverges at parameter 1")]
    Divergent,

    #[error("pole of tn at x = {0}")]
    Pole(f64),

    #[error("argument {value} outside the principal range of {function}")]
    Range { function: &'static str, value: f64 },

    #[error("x = {x} outside the definition interval ]{lo}, {hi}[")]
    OutOfInterval { x: f64, lo: f64, hi: f64 },

    #[error("2E + exp(2v) vanishes inside [{a}, {b}]")]
    SingularInterval { a: f64, b: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("frame validation failed: {0}")]
    FrameValidation(String),

    #[error("bivector is not in the requested eigenspace of star (residual {0:e})")]
    WrongEigenspace(f64),

    #[error("point is off the manifold (residual {0:e})")]
    OffManifold(f64),

    #[error("degenerate tangent plane at ({x}, {y})")]
    DegenerateTangent { x: f64, y: f64 },

    #[error("finite-difference stencil at ({x}, {y}) leaves the chart domain")]
    StencilOutOfDomain { x: f64, y: f64 },

    #[error("hopf differentials differ: {0}")]
    HopfMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("grid has no interior points")]
    EmptyGrid,

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    #[error("integration blew up at x = {0}")]
    BlowUp(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
