//! Person-level worker records and their aggregation into occupation tables.
//!
//! CSV schema, one row per person:
//!
//! ```text
//! country,year,sex,category,age,employed,group_quarters,armed_forces,weight
//! ```
//!
//! `sex` is `F` or `M`; booleans are `0`/`1`. Empty optional fields mean the
//! corresponding filter does not apply to that record, and an empty weight
//! means 1.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::classify::{OccupationRow, OccupationTable};
use crate::error::{Error, Result};
use crate::pipeline::PopulationKey;

pub const WORKERS_HEADER: [&str; 9] = [
    "country",
    "year",
    "sex",
    "category",
    "age",
    "employed",
    "group_quarters",
    "armed_forces",
    "weight",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    Female,
    Male,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerRecord {
    pub country: String,
    pub year: i32,
    pub sex: Sex,
    pub category: String,
    pub age: Option<u32>,
    pub employed: Option<bool>,
    pub group_quarters: Option<bool>,
    pub armed_forces: Option<bool>,
    pub weight: f64,
}

impl WorkerRecord {
    pub fn new(
        country: impl Into<String>,
        year: i32,
        sex: Sex,
        category: impl Into<String>,
    ) -> Self {
        WorkerRecord {
            country: country.into(),
            year,
            sex,
            category: category.into(),
            age: None,
            employed: None,
            group_quarters: None,
            armed_forces: None,
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_age(mut self, age: u32) -> Self {
        self.age = Some(age);
        self
    }

    pub fn key(&self) -> PopulationKey {
        PopulationKey::new(self.country.clone(), self.year)
    }
}

/// Sample restrictions. Each one applies only to records that carry the
/// relevant field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterSettings {
    /// Keep ages 15 to 64 inclusive.
    pub working_age: bool,
    pub employed_only: bool,
    pub exclude_group_quarters: bool,
    pub exclude_armed_forces: bool,
}

impl Default for FilterSettings {
    fn default() -> Self {
        FilterSettings {
            working_age: true,
            employed_only: true,
            exclude_group_quarters: true,
            exclude_armed_forces: true,
        }
    }
}

impl FilterSettings {
    pub fn none() -> Self {
        FilterSettings {
            working_age: false,
            employed_only: false,
            exclude_group_quarters: false,
            exclude_armed_forces: false,
        }
    }

    pub fn admits(&self, r: &WorkerRecord) -> bool {
        if self.working_age {
            if let Some(age) = r.age {
                if !(15..=64).contains(&age) {
                    return false;
                }
            }
        }
        if self.employed_only && r.employed == Some(false) {
            return false;
        }
        if self.exclude_group_quarters && r.group_quarters == Some(true) {
            return false;
        }
        if self.exclude_armed_forces && r.armed_forces == Some(true) {
            return false;
        }
        true
    }
}

fn malformed(line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRecord {
        line,
        reason: reason.into(),
    }
}

fn parse_flag(field: &str, name: &str, line: u64) -> Result<Option<bool>> {
    match field.trim() {
        "" => Ok(None),
        "0" => Ok(Some(false)),
        "1" => Ok(Some(true)),
        other => Err(malformed(
            line,
            format!("{name} must be 0 or 1, got `{other}`"),
        )),
    }
}

fn parse_record(rec: &csv::StringRecord, line: u64) -> Result<WorkerRecord> {
    if rec.len() != WORKERS_HEADER.len() {
        return Err(malformed(
            line,
            format!(
                "expected {} fields, found {}",
                WORKERS_HEADER.len(),
                rec.len()
            ),
        ));
    }
    let country = rec[0].trim();
    if country.is_empty() {
        return Err(malformed(line, "empty country"));
    }
    let year = rec[1]
        .trim()
        .parse::<i32>()
        .map_err(|_| malformed(line, format!("bad year `{}`", &rec[1])))?;
    let sex = match rec[2].trim() {
        "F" => Sex::Female,
        "M" => Sex::Male,
        other => {
            return Err(malformed(
                line,
                format!("sex must be F or M, got `{other}`"),
            ))
        }
    };
    let category = rec[3].trim();
    if category.is_empty() {
        return Err(malformed(line, "empty category"));
    }
    let age = match rec[4].trim() {
        "" => None,
        s => Some(
            s.parse::<u32>()
                .map_err(|_| malformed(line, format!("bad age `{s}`")))?,
        ),
    };
    let weight = match rec[8].trim() {
        "" => 1.0,
        s => s
            .parse::<f64>()
            .map_err(|_| malformed(line, format!("bad weight `{s}`")))?,
    };
    if !(weight.is_finite() && weight >= 0.0) {
        return Err(malformed(
            line,
            format!("weight must be non-negative, got {weight}"),
        ));
    }
    Ok(WorkerRecord {
        country: country.to_string(),
        year,
        sex,
        category: category.to_string(),
        age,
        employed: parse_flag(&rec[5], "employed", line)?,
        group_quarters: parse_flag(&rec[6], "group_quarters", line)?,
        armed_forces: parse_flag(&rec[7], "armed_forces", line)?,
        weight,
    })
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(malformed(
            1,
            format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.join(",")
            ),
        ));
    }
    Ok(())
}

/// Streams worker records from CSV. Errors carry the 1-based line number.
pub fn read_workers<R: Read>(reader: R) -> Result<impl Iterator<Item = Result<WorkerRecord>>> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    check_header(csv.headers()?, &WORKERS_HEADER)?;
    Ok(csv.into_records().map(|rec| {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        parse_record(&rec, line)
    }))
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        None => "",
        Some(false) => "0",
        Some(true) => "1",
    }
}

pub fn write_workers<'a, W: Write>(
    writer: W,
    records: impl IntoIterator<Item = &'a WorkerRecord>,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(WORKERS_HEADER)?;
    for r in records {
        let age = r.age.map(|a| a.to_string()).unwrap_or_default();
        csv.write_record([
            r.country.as_str(),
            &r.year.to_string(),
            match r.sex {
                Sex::Female => "F",
                Sex::Male => "M",
            },
            &r.category,
            &age,
            flag(r.employed),
            flag(r.group_quarters),
            flag(r.armed_forces),
            &format!("{}", r.weight),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Output of [`ingest_workers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation {
    pub tables: BTreeMap<PopulationKey, OccupationTable>,
    /// Records removed by the sample filters.
    pub excluded_records: usize,
}

impl Aggregation {
    /// Zero-mass categories dropped per population.
    pub fn dropped_rows(&self) -> BTreeMap<&PopulationKey, usize> {
        self.tables.iter().map(|(k, t)| (k, t.dropped())).collect()
    }
}

#[derive(Default)]
struct Accumulator {
    admitted: usize,
    cells: BTreeMap<String, (f64, f64)>,
}

/// Weighted female and male mass per category, per population.
///
/// Categories are ordered by code. A population whose records are all
/// filtered out is an error.
pub fn ingest_workers<I>(records: I, filters: &FilterSettings) -> Result<Aggregation>
where
    I: IntoIterator<Item = Result<WorkerRecord>>,
{
    let mut populations: BTreeMap<PopulationKey, Accumulator> = BTreeMap::new();
    let mut excluded = 0;
    for (i, record) in records.into_iter().enumerate() {
        let r = record?;
        if !(r.weight.is_finite() && r.weight >= 0.0) {
            return Err(malformed(
                i as u64 + 1,
                format!("weight must be non-negative, got {}", r.weight),
            ));
        }
        let acc = populations.entry(r.key()).or_default();
        if !filters.admits(&r) {
            excluded += 1;
            continue;
        }
        acc.admitted += 1;
        let cell = acc.cells.entry(r.category).or_insert((0.0, 0.0));
        match r.sex {
            Sex::Female => cell.0 += r.weight,
            Sex::Male => cell.1 += r.weight,
        }
    }

    let mut tables = BTreeMap::new();
    for (key, acc) in populations {
        if acc.admitted == 0 {
            return Err(Error::EmptyAfterFilters {
                country: key.country,
                year: key.year,
            });
        }
        let rows = acc
            .cells
            .into_iter()
            .map(|(c, (f, m))| OccupationRow::new(c, f, m))
            .collect();
        let table =
            OccupationTable::new(rows).map_err(|e| e.in_population(&key.country, key.year))?;
        tables.insert(key, table);
    }
    Ok(Aggregation {
        tables,
        excluded_records: excluded,
    })
}
