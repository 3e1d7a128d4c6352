//! Occupation-table CSV: `country,year,category,female,male`, one row per
//! category and population.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::classify::{OccupationRow, OccupationTable};
use crate::error::{Error, Result};
use crate::fmt::Precision;
use crate::pipeline::PopulationKey;

pub const OCCUPATIONS_HEADER: [&str; 5] = ["country", "year", "category", "female", "male"];

fn malformed(line: u64, reason: impl Into<String>) -> Error {
    Error::MalformedRecord {
        line,
        reason: reason.into(),
    }
}

pub fn read_occupation_tables<R: Read>(
    reader: R,
) -> Result<BTreeMap<PopulationKey, OccupationTable>> {
    let mut csv = csv::Reader::from_reader(reader);
    let header: Vec<String> = csv
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != OCCUPATIONS_HEADER {
        return Err(malformed(
            1,
            format!("expected header `{}`", OCCUPATIONS_HEADER.join(",")),
        ));
    }
    let mut rows: BTreeMap<PopulationKey, Vec<OccupationRow>> = BTreeMap::new();
    for rec in csv.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let year = rec[1]
            .trim()
            .parse::<i32>()
            .map_err(|_| malformed(line, format!("bad year `{}`", &rec[1])))?;
        let mass = |i: usize, name: &str| {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("bad {name} `{}`", &rec[i])))
        };
        let row = OccupationRow::new(rec[2].trim(), mass(3, "female")?, mass(4, "male")?);
        rows.entry(PopulationKey::new(rec[0].trim(), year))
            .or_default()
            .push(row);
    }
    rows.into_iter()
        .map(|(key, rows)| {
            let table =
                OccupationTable::new(rows).map_err(|e| e.in_population(&key.country, key.year))?;
            Ok((key, table))
        })
        .collect()
}

pub fn write_occupation_tables<W: Write>(
    writer: W,
    tables: &BTreeMap<PopulationKey, OccupationTable>,
    precision: Precision,
) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(OCCUPATIONS_HEADER)?;
    for (key, table) in tables {
        for row in table.rows() {
            csv.write_record([
                key.country.as_str(),
                &key.year.to_string(),
                &row.category,
                &precision.format(row.female),
                &precision.format(row.male),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}
