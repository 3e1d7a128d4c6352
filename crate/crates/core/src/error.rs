use std::io;

use thiserror::Error;

use crate::ipf::IpfResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("degenerate table: two or more zero cells leave the odds ratio undefined")]
    DegenerateTable,

    #[error("empty sex group: female or male total is zero")]
    EmptySexGroup,

    #[error("degenerate marginal: a row or column total is zero")]
    DegenerateMarginal,

    #[error("duplicate category `{0}`")]
    DuplicateCategory(String),

    #[error("invalid target marginals: {0}")]
    InvalidTargets(String),

    #[error("invalid IPF settings: {0}")]
    InvalidSettings(String),

    #[error("infeasible target: a zero row or column faces a positive target (or vice versa)")]
    InfeasibleTarget,

    #[error(
        "IPF did not converge after {} iterations (max deviation {:e})",
        .0.iterations,
        .0.max_deviation
    )]
    NotConverged(Box<IpfResult>),

    #[error("non-positive cell in log decomposition")]
    NonPositiveCell,

    #[error("non-positive dissimilarity in log decomposition")]
    NonPositiveId,

    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: u64, reason: String },

    #[error("no records left for {country} {year} after filtering")]
    EmptyAfterFilters { country: String, year: i32 },

    #[error("duplicate covariate row for {country} {year}")]
    DuplicateCovariate { country: String, year: i32 },

    #[error("population {country} {year}: {source}")]
    Population {
        country: String,
        year: i32,
        #[source]
        source: Box<Error>,
    },

    #[error("too few points for quadratic regression: {0} (need at least 4)")]
    TooFewPoints(usize),

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("infeasible simulation spec: {0}")]
    InfeasibleSpec(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure rather than of the input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotConverged(_) | Error::RankDeficient => true,
            Error::Population { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn in_population(self, country: &str, year: i32) -> Error {
        Error::Population {
            country: country.to_string(),
            year,
            source: Box::new(self),
        }
    }
}
