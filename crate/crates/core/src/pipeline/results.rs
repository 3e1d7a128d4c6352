//! Per-population indices and the covariate join.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::classify::{basic_classification, MmDiagnostics, OccupationTable};
use crate::error::{Error, Result};
use crate::fmt::Precision;
use crate::ipf::IpfSettings;
use crate::metrics::{conventional_id, mm_measure, standardize_basic, Scenario, StandardizedId};
use crate::par::{self, Execution};
use crate::pipeline::covariates::CountryCovariates;
use crate::pipeline::PopulationKey;
use crate::tables::{dissimilarity, marginal_shares, MarginalShares};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryResult {
    pub country: String,
    pub year: i32,
    pub occupation_table: OccupationTable,
    /// Marginal shares of the basic segregation table.
    pub marginals: MarginalShares,
    pub crude_id: f64,
    pub conventional_id: f64,
    /// One entry per scenario, in scenario order.
    pub sids: Vec<(String, StandardizedId)>,
    pub mm: (f64, MmDiagnostics),
    /// Filled in by [`join_covariates`].
    pub log_gdp_pc: Option<f64>,
}

impl CountryResult {
    pub fn key(&self) -> PopulationKey {
        PopulationKey::new(self.country.clone(), self.year)
    }

    pub fn sid(&self, scenario: &str) -> Option<f64> {
        self.sids
            .iter()
            .find(|(name, _)| name == scenario)
            .map(|(_, s)| s.value)
    }
}

pub fn compute_population(
    key: &PopulationKey,
    table: &OccupationTable,
    scenarios: &[Scenario],
    settings: &IpfSettings,
) -> Result<CountryResult> {
    let basic = basic_classification(table).basic;
    let crude = dissimilarity(&basic)?;
    let sids = scenarios
        .iter()
        .map(|s| {
            Ok((
                s.name.clone(),
                standardize_basic(&basic, &s.targets, settings)?,
            ))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_population(&key.country, key.year))?;
    Ok(CountryResult {
        country: key.country.clone(),
        year: key.year,
        occupation_table: table.clone(),
        marginals: marginal_shares(&basic),
        crude_id: crude,
        conventional_id: conventional_id(table),
        sids,
        mm: mm_measure(table),
        log_gdp_pc: None,
    })
}

/// Computes every population independently; output follows key order.
pub fn compute_results(
    tables: &BTreeMap<PopulationKey, OccupationTable>,
    scenarios: &[Scenario],
    settings: &IpfSettings,
    exec: Execution,
) -> Result<Vec<CountryResult>> {
    let items: Vec<(&PopulationKey, &OccupationTable)> = tables.iter().collect();
    par::try_map(exec, &items, |(key, table)| {
        compute_population(key, table, scenarios, settings)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joined {
    pub matched: Vec<CountryResult>,
    /// Populations without a covariate row.
    pub unmatched: Vec<PopulationKey>,
}

/// Inner join on `(country, year)`; `log_gdp_pc` is set on matched results.
pub fn join_covariates(
    results: Vec<CountryResult>,
    covariates: &[CountryCovariates],
) -> Result<Joined> {
    let mut by_key: HashMap<PopulationKey, f64> = HashMap::with_capacity(covariates.len());
    for c in covariates {
        if by_key.insert(c.key(), c.gdp_pc).is_some() {
            return Err(Error::DuplicateCovariate {
                country: c.country.clone(),
                year: c.year,
            });
        }
    }
    let mut matched = Vec::new();
    let mut unmatched = Vec::new();
    for mut r in results {
        match by_key.get(&r.key()) {
            Some(gdp) => {
                r.log_gdp_pc = Some(gdp.ln());
                matched.push(r);
            }
            None => unmatched.push(r.key()),
        }
    }
    Ok(Joined { matched, unmatched })
}

/// Header of the indices CSV for the given scenario names.
pub fn results_header(scenarios: &[String]) -> Vec<String> {
    let mut header: Vec<String> = [
        "country",
        "year",
        "log_gdp_pc",
        "female_share_workforce",
        "share_in_female_categories",
        "crude_id",
        "conventional_id",
        "mm_id",
        "mm_mismatch_share",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(scenarios.iter().map(|s| format!("sid_{s}")));
    header
}

pub fn write_results<W: Write>(
    writer: W,
    results: &[CountryResult],
    precision: Precision,
) -> Result<()> {
    let names: Vec<String> = results
        .first()
        .map(|r| r.sids.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_default();
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(results_header(&names))?;
    for r in results {
        let mut row = vec![
            r.country.clone(),
            r.year.to_string(),
            r.log_gdp_pc
                .map(|x| precision.format(x))
                .unwrap_or_default(),
            precision.format(r.marginals.col_female_share),
            precision.format(r.marginals.row_female_share),
            precision.format(r.crude_id),
            precision.format(r.conventional_id),
            precision.format(r.mm.0),
            precision.format(r.mm.1.mismatch_share),
        ];
        row.extend(r.sids.iter().map(|(_, s)| precision.format(s.value)));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}
