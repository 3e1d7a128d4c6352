//! Country-level covariates, CSV header `country,year,gdp_pc`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::PopulationKey;

pub const COVARIATES_HEADER: [&str; 3] = ["country", "year", "gdp_pc"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryCovariates {
    pub country: String,
    pub year: i32,
    /// GDP per capita in constant PPP-adjusted currency units.
    pub gdp_pc: f64,
}

impl CountryCovariates {
    pub fn key(&self) -> PopulationKey {
        PopulationKey::new(self.country.clone(), self.year)
    }
}

pub fn read_covariates<R: Read>(reader: R) -> Result<Vec<CountryCovariates>> {
    let mut csv = csv::Reader::from_reader(reader);
    let header: Vec<String> = csv
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != COVARIATES_HEADER {
        return Err(Error::MalformedRecord {
            line: 1,
            reason: format!("expected header `{}`", COVARIATES_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| Error::MalformedRecord {
            line,
            reason: what.to_string(),
        };
        let year = rec[1].trim().parse::<i32>().map_err(|_| bad("bad year"))?;
        let gdp_pc = rec[2]
            .trim()
            .parse::<f64>()
            .map_err(|_| bad("bad gdp_pc"))?;
        if !(gdp_pc > 0.0 && gdp_pc.is_finite()) {
            return Err(bad("gdp_pc must be positive"));
        }
        out.push(CountryCovariates {
            country: rec[0].trim().to_string(),
            year,
            gdp_pc,
        });
    }
    Ok(out)
}

pub fn write_covariates<W: Write>(writer: W, covariates: &[CountryCovariates]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(COVARIATES_HEADER)?;
    for c in covariates {
        csv.write_record([
            c.country.as_str(),
            &c.year.to_string(),
            &format!("{}", c.gdp_pc),
        ])?;
    }
    csv.flush()?;
    Ok(())
}
