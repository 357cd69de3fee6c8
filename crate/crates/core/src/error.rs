use crate::vec3::Vec3;
use thiserror::Error;

/// Failure modes shared by the model, search, renormalization and
/// certification layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("degenerate sigma vector: {0}")]
    DegenerateSigma(String),

    #[error("invalid model configuration [{tag}]: {msg}")]
    InvalidConfig { tag: &'static str, msg: String },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("point {point:?} is outside the {region} transition neighbourhood")]
    OutOfNeighbourhood { region: &'static str, point: Vec3 },

    #[error("bump argument {value} at {stage} is neither in the plateau nor outside the support")]
    PlateauViolation { stage: &'static str, value: f64 },

    #[error("orbit left the chart domain at {stage}: {point:?}")]
    DomainEscape { stage: &'static str, point: Vec3 },

    #[error("({lt}, {st}) is not in the admissible set: lambda^(1/2)*sigma = {value}")]
    NotInZTilde { lt: f64, st: f64, value: f64 },

    #[error("no sojourn pair found up to n = {n_max}{}", diagnostic_suffix(.diagnostic))]
    NotFound { n_max: u64, diagnostic: Option<String> },

    #[error("infeasible targets: {0}")]
    InfeasibleTargets(String),

    #[error("composition failed at schedule entry k = {k}, grid point {point:?}: {source}")]
    Composition { k: usize, point: Vec3, source: Box<Error> },

    #[error("power product overflow at k = {k}: {what}")]
    Overflow { k: usize, what: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn diagnostic_suffix(d: &Option<String>) -> String {
    match d {
        Some(s) => format!(" ({s})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
