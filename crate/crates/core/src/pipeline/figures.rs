//! Plot-ready CSV with one row per population.
//!
//! Columns, in order: `country, year, log_gdp_pc, female_share_workforce,
//! share_in_female_categories, crude_id`, then `sid_<scenario>` for each
//! scenario. Numbers are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fmt::Precision;
use crate::pipeline::results::CountryResult;

pub const FIGURE_COLUMNS: [&str; 6] = [
    "country",
    "year",
    "log_gdp_pc",
    "female_share_workforce",
    "share_in_female_categories",
    "crude_id",
];

pub fn write_figure_data<W: Write>(writer: W, results: &[CountryResult]) -> Result<()> {
    let first = results
        .first()
        .ok_or_else(|| Error::InvalidTable("no populations to write".into()))?;
    let mut header: Vec<String> = FIGURE_COLUMNS.iter().map(|s| s.to_string()).collect();
    header.extend(first.sids.iter().map(|(name, _)| format!("sid_{name}")));

    let p = Precision::RoundTrip;
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(&header)?;
    for r in results {
        let mut row = vec![
            r.country.clone(),
            r.year.to_string(),
            r.log_gdp_pc.map(|x| p.format(x)).unwrap_or_default(),
            p.format(r.marginals.col_female_share),
            p.format(r.marginals.row_female_share),
            p.format(r.crude_id),
        ];
        row.extend(r.sids.iter().map(|(_, s)| p.format(s.value)));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn emit_figure_data(results: &[CountryResult], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_figure_data(&mut out, results)?;
    out.flush()?;
    Ok(())
}

/// Dependent variable for the cross-country regression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Measure {
    Crude,
    Sid(String),
}

impl Measure {
    pub fn column(&self) -> String {
        match self {
            Measure::Crude => "crude_id".into(),
            Measure::Sid(name) => format!("sid_{name}"),
        }
    }
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "crude" => Ok(Measure::Crude),
            _ => match s.strip_prefix("sid:") {
                Some(name) if !name.is_empty() => Ok(Measure::Sid(name.to_string())),
                _ => Err(format!("expected `crude` or `sid:<scenario>`, got `{s}`")),
            },
        }
    }
}

/// Reads `(log_gdp_pc, measure)` pairs from an indices or figures CSV.
/// Rows without `log_gdp_pc` are skipped.
pub fn read_points<R: Read>(reader: R, measure: &Measure) -> Result<Vec<(f64, f64)>> {
    let mut csv = csv::Reader::from_reader(reader);
    let header = csv.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MalformedRecord {
                line: 1,
                reason: format!("missing column `{name}`"),
            })
    };
    let x_col = find("log_gdp_pc")?;
    let y_col = find(&measure.column())?;
    let mut points = Vec::new();
    for rec in csv.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let x = rec[x_col].trim();
        if x.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::MalformedRecord {
                line,
                reason: format!("bad number `{s}`"),
            })
        };
        points.push((parse(x)?, parse(&rec[y_col])?));
    }
    Ok(points)
}
