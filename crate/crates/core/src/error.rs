use std::fmt;

/// A single violated invariant found while validating a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// Dotted path of the offending field, e.g. `pulse.sigma_g`.
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid scenario:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("quadrature did not converge: estimated error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("Fock cutoff n_max = {n_max} too small: truncated weight {tail:e}")]
    CutoffTooSmall { n_max: usize, tail: f64 },

    #[error("norm drift {drift:e} exceeds tolerance at t = {t}")]
    NormDrift { t: f64, drift: f64 },

    #[error("trace drift {drift:e} exceeds {limit:e} at t = {t}")]
    TraceDrift { t: f64, drift: f64, limit: f64 },

    #[error("undersampled series: dt_out = {actual} but the carrier needs dt_out <= {required}")]
    Undersampled { required: f64, actual: f64 },

    #[error("detection windows overlap: {0}")]
    OverlappingWindows(String),

    #[error("sweep cell (theta = {theta}, n_plus = {n_plus}): {source}")]
    SweepCell {
        theta: f64,
        n_plus: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
