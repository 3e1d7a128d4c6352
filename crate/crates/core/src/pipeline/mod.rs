//! From microdata to cross-country results: ingestion, per-population
//! indices, covariate join, regression, synthetic data and plot-ready output.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod covariates;
pub mod figures;
pub mod occupations;
pub mod regression;
pub mod results;
pub mod simulate;
pub mod workers;

/// A population is one country in one census year.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PopulationKey {
    pub country: String,
    pub year: i32,
}

impl PopulationKey {
    pub fn new(country: impl Into<String>, year: i32) -> Self {
        PopulationKey {
            country: country.into(),
            year,
        }
    }
}

impl fmt::Display for PopulationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.country, self.year)
    }
}
