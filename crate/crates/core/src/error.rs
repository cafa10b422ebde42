use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("parameters satisfy neither regular case at infinity: {0}")]
    Unclassifiable(String),

    #[error("singular point of the radial equation at {location} ({what})")]
    SingularPoint { location: f64, what: &'static str },

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("exponent {exponent} is not a root of the indicial equation (residual {residual:e})")]
    NotIndicialRoot { exponent: String, residual: f64 },

    #[error("resonance at coefficient {index}: leading solve coefficient vanishes but the right-hand side does not (logarithmic case)")]
    Resonance { index: usize },

    #[error("coefficient {index} overflowed")]
    Overflow { index: usize },

    #[error("series diverges at x = {x}: observed term ratio {ratio}")]
    Divergence { x: f64, ratio: f64 },

    #[error("argument {x} outside the domain of {what}")]
    Domain { x: f64, what: &'static str },

    #[error("Gamma pole: argument {argument} is a nonpositive integer")]
    GammaPole { argument: f64 },

    #[error("explicit exponent formula {explicit} disagrees with quadratic roots {quadratic}")]
    FormulaMismatch { quadratic: String, explicit: String },

    #[error("step size collapsed at x = {x}")]
    StepSizeCollapse { x: f64 },

    #[error("integrator exceeded {steps} steps before reaching {x_end}")]
    ToleranceFailure { steps: usize, x_end: f64 },

    #[error("pole of the continued zeta function at s = {s}")]
    ZetaPole { s: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("malformed series document: {0}")]
    Document(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Unclassifiable(_) => "unclassifiable",
            Error::SingularPoint { .. } => "singular_point",
            Error::DivisionByZero(_) => "division_by_zero",
            Error::NotIndicialRoot { .. } => "not_indicial_root",
            Error::Resonance { .. } => "resonance",
            Error::Overflow { .. } => "overflow",
            Error::Divergence { .. } => "divergence",
            Error::Domain { .. } => "domain",
            Error::GammaPole { .. } => "gamma_pole",
            Error::FormulaMismatch { .. } => "formula_mismatch",
            Error::StepSizeCollapse { .. } => "step_size_collapse",
            Error::ToleranceFailure { .. } => "tolerance_failure",
            Error::ZetaPole { .. } => "zeta_pole",
            Error::Config { .. } => "config",
            Error::Document(_) => "document",
        }
    }

    /// Where the failure happened, when it has a natural coordinate.
    pub fn location(&self) -> Option<String> {
        match self {
            Error::SingularPoint { location, .. } => Some(format!("x={location}")),
            Error::Resonance { index } | Error::Overflow { index } => Some(format!("a[{index}]")),
            Error::Divergence { x, .. } | Error::Domain { x, .. } | Error::StepSizeCollapse { x } => {
                Some(format!("x={x}"))
            }
            Error::ToleranceFailure { x_end, .. } => Some(format!("x={x_end}")),
            Error::ZetaPole { s } => Some(format!("s={s}")),
            Error::GammaPole { argument } => Some(format!("gamma({argument})")),
            Error::Config { line, .. } => Some(format!("line {line}")),
            Error::InvalidParameter { name, .. } => Some((*name).to_string()),
            _ => None,
        }
    }
}
