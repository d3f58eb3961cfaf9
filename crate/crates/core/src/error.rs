use thiserror::Error;

/// Errors raised by constructions, samplers and certifiers.
///
/// Certification *failures* are not errors: they are recorded in a
/// [`CertificationReport`](crate::report::CertificationReport). Errors are reserved
/// for violated preconditions and numerical breakdowns.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("weights violate the standing hypothesis sum(a_i) < 1 (sum = {sum})")]
    WeightSum { sum: f64 },

    #[error("non-finite value {value} while evaluating {what} at point {point:?}")]
    NonFinite {
        what: String,
        value: f64,
        point: Vec<[f64; 2]>,
    },

    #[error("point outside the domain: {what} at {point:?}")]
    OutsideDomain { what: String, point: Vec<[f64; 2]> },

    #[error("{count} point(s) outside the domain, first at {first:?}")]
    Offenders { count: usize, first: Vec<[f64; 2]> },

    #[error("empty-or-thin sublevel at level {level}: {accepted} accepted out of {draws} draws")]
    ThinSublevel {
        level: f64,
        accepted: usize,
        draws: usize,
    },

    #[error("domain resolution exceeded: eps fell below {floor} at level {level}")]
    DomainResolution { level: usize, floor: f64 },

    #[error("bisection for envelope parameter at level {level} failed after {halvings} halvings")]
    Bisection { level: usize, halvings: usize },

    #[error("sandwich violated at level {level}: {detail} at {point:?}")]
    Sandwich {
        level: usize,
        detail: String,
        point: Vec<[f64; 2]>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
