//! Collapsing a k×2 occupation-by-sex table into a 2×2 segregation table.
//!
//! Two rules are provided: the cutoff rule (a category is female-typed when
//! its female share strictly exceeds the workforce female share) and marginal
//! matching, which fills the female-typed row with the most feminized
//! categories until it holds as many workers as there are women.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::Table2x2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationRow {
    pub category: String,
    pub female: f64,
    pub male: f64,
}

impl OccupationRow {
    pub fn new(category: impl Into<String>, female: f64, male: f64) -> Self {
        OccupationRow {
            category: category.into(),
            female,
            male,
        }
    }

    pub fn total(&self) -> f64 {
        self.female + self.male
    }
}

/// Occupation (or sector) by sex counts for one population.
///
/// Categories with zero mass are dropped on construction; `dropped()` keeps
/// the count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationTable {
    rows: Vec<OccupationRow>,
    dropped: usize,
}

impl OccupationTable {
    pub fn new(rows: Vec<OccupationRow>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(rows.len());
        let mut kept = Vec::with_capacity(rows.len());
        let mut dropped = 0;
        for row in rows {
            if !(row.female.is_finite() && row.male.is_finite())
                || row.female < 0.0
                || row.male < 0.0
            {
                return Err(Error::InvalidTable(format!(
                    "category `{}` has invalid masses ({}, {})",
                    row.category, row.female, row.male
                )));
            }
            if !seen.insert(row.category.clone()) {
                return Err(Error::DuplicateCategory(row.category));
            }
            if row.total() > 0.0 {
                kept.push(row);
            } else {
                dropped += 1;
            }
        }
        if kept.is_empty() {
            return Err(Error::InvalidTable("no category with positive mass".into()));
        }
        let table = OccupationTable {
            rows: kept,
            dropped,
        };
        if table.women() <= 0.0 || table.men() <= 0.0 {
            return Err(Error::EmptySexGroup);
        }
        Ok(table)
    }

    /// Convenience constructor from `(category, female, male)` triples.
    pub fn from_triples<S: Into<String>>(
        rows: impl IntoIterator<Item = (S, f64, f64)>,
    ) -> Result<Self> {
        Self::new(
            rows.into_iter()
                .map(|(c, f, m)| OccupationRow::new(c, f, m))
                .collect(),
        )
    }

    pub fn rows(&self) -> &[OccupationRow] {
        &self.rows
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn women(&self) -> f64 {
        self.rows.iter().map(|r| r.female).sum()
    }

    pub fn men(&self) -> f64 {
        self.rows.iter().map(|r| r.male).sum()
    }

    pub fn total(&self) -> f64 {
        self.rows.iter().map(|r| r.total()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Female,
    Male,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub labels: BTreeMap<String, Label>,
    pub basic: Table2x2,
    /// One gendered row is empty: every category landed on the same side.
    pub degenerate: bool,
}

impl Classification {
    pub fn label(&self, category: &str) -> Option<Label> {
        self.labels.get(category).copied()
    }

    pub fn female_categories(&self) -> impl Iterator<Item = &str> {
        self.labels
            .iter()
            .filter(|(_, l)| **l == Label::Female)
            .map(|(c, _)| c.as_str())
    }
}

/// How well marginal matching hit its target of `Nf = F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmDiagnostics {
    pub nf_target: f64,
    pub nf_achieved: f64,
    pub mismatch: f64,
    pub mismatch_share: f64,
    /// First category in matching order that was left out.
    pub boundary_category: Option<String>,
}

fn build(t: &OccupationTable, labels: BTreeMap<String, Label>) -> Classification {
    let (mut ff, mut mf, mut fm, mut mm) = (0.0, 0.0, 0.0, 0.0);
    for row in &t.rows {
        match labels[&row.category] {
            Label::Female => {
                ff += row.female;
                mf += row.male;
            }
            Label::Male => {
                fm += row.female;
                mm += row.male;
            }
        }
    }
    let basic = Table2x2::new(ff, mf, fm, mm).expect("occupation table has positive mass");
    Classification {
        labels,
        degenerate: basic.has_empty_row(),
        basic,
    }
}

/// Cutoff rule: female-typed iff `F_i/N_i > F/N` strictly; ties go to male.
pub fn basic_classification(t: &OccupationTable) -> Classification {
    let (women, total) = (t.women(), t.total());
    let labels = t
        .rows
        .iter()
        .map(|row| {
            // F_i/N_i > F/N without the rounding of two divisions.
            let label = if row.female * total > women * row.total() {
                Label::Female
            } else {
                Label::Male
            };
            (row.category.clone(), label)
        })
        .collect();
    build(t, labels)
}

/// Orders categories by female share descending, then female mass
/// descending, then category code ascending.
fn matching_order(a: &OccupationRow, b: &OccupationRow) -> Ordering {
    let lhs = a.female * b.total();
    let rhs = b.female * a.total();
    rhs.partial_cmp(&lhs)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.female.partial_cmp(&a.female).unwrap_or(Ordering::Equal))
        .then_with(|| a.category.cmp(&b.category))
}

/// Marginal matching with the greedy-under rule: take categories in
/// matching order while the cumulative size stays at or below `F`, and stop
/// at the first one that would overshoot.
pub fn mm_classification(t: &OccupationTable) -> (Classification, MmDiagnostics) {
    let (women, total) = (t.women(), t.total());
    // absorbs summation rounding in weighted data
    let slack = 1e-12 * total;

    let mut order: Vec<&OccupationRow> = t.rows.iter().collect();
    order.sort_by(|a, b| matching_order(a, b));

    let mut labels: BTreeMap<String, Label> = BTreeMap::new();
    let mut achieved = 0.0;
    let mut boundary = None;
    for row in order {
        if boundary.is_none() && achieved + row.total() <= women + slack {
            achieved += row.total();
            labels.insert(row.category.clone(), Label::Female);
        } else {
            if boundary.is_none() {
                boundary = Some(row.category.clone());
            }
            labels.insert(row.category.clone(), Label::Male);
        }
    }

    let mismatch = (achieved - women).abs();
    let diagnostics = MmDiagnostics {
        nf_target: women,
        nf_achieved: achieved,
        mismatch,
        mismatch_share: mismatch / total,
        boundary_category: boundary,
    };
    (build(t, labels), diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::{dissimilarity, is_symmetric};

    fn four_occupations() -> OccupationTable {
        OccupationTable::from_triples([
            ("1", 20.0, 5.0),
            ("2", 30.0, 10.0),
            ("3", 40.0, 60.0),
            ("4", 10.0, 125.0),
        ])
        .unwrap()
    }

    fn two_occupations() -> OccupationTable {
        OccupationTable::from_triples([("C", 10.0, 70.0), ("D", 60.0, 30.0)]).unwrap()
    }

    #[test]
    fn construction_drops_empty_rows() {
        let t = OccupationTable::from_triples([("a", 1.0, 2.0), ("b", 0.0, 0.0), ("c", 3.0, 0.0)])
            .unwrap();
        assert_eq!(t.rows().len(), 2);
        assert_eq!(t.dropped(), 1);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            OccupationTable::from_triples([("a", 1.0, 2.0), ("a", 1.0, 1.0)]),
            Err(Error::DuplicateCategory(_))
        ));
        assert!(matches!(
            OccupationTable::from_triples([("a", 0.0, 2.0), ("b", 0.0, 1.0)]),
            Err(Error::EmptySexGroup)
        ));
        assert!(OccupationTable::from_triples([("a", -1.0, 2.0)]).is_err());
        assert!(OccupationTable::from_triples(Vec::<(String, f64, f64)>::new()).is_err());
    }

    #[test]
    fn basic_four_occupations() {
        let c = basic_classification(&four_occupations());
        assert_eq!(c.basic, Table2x2::new(90.0, 75.0, 10.0, 125.0).unwrap());
        let female: Vec<_> = c.female_categories().collect();
        assert_eq!(female, ["1", "2", "3"]);
        assert!(!c.degenerate);
    }

    #[test]
    fn basic_identical_composition_is_degenerate() {
        let t = OccupationTable::from_triples([("a", 10.0, 20.0), ("b", 5.0, 10.0)]).unwrap();
        let c = basic_classification(&t);
        assert_eq!(c.female_categories().count(), 0);
        assert!(c.degenerate);
        assert_eq!(dissimilarity(&c.basic).unwrap(), 0.0);
    }

    #[test]
    fn basic_two_occupations() {
        let c = basic_classification(&two_occupations());
        assert_eq!(c.label("D"), Some(Label::Female));
        assert_eq!(c.label("C"), Some(Label::Male));
        assert_eq!(c.basic, Table2x2::new(60.0, 30.0, 10.0, 70.0).unwrap());
    }

    #[test]
    fn tie_goes_to_male() {
        // F/N = 1/3 and category b sits exactly on it.
        let t = OccupationTable::from_triples([("a", 8.0, 2.0), ("b", 2.0, 4.0), ("c", 0.0, 14.0)])
            .unwrap();
        let c = basic_classification(&t);
        assert_eq!(c.label("b"), Some(Label::Male));
        assert_eq!(c.label("a"), Some(Label::Female));
    }

    #[test]
    fn mm_four_occupations() {
        let (c, d) = mm_classification(&four_occupations());
        assert_eq!(c.basic, Table2x2::new(50.0, 15.0, 50.0, 185.0).unwrap());
        assert_eq!(d.nf_target, 100.0);
        assert_eq!(d.nf_achieved, 65.0);
        assert_eq!(d.mismatch, 35.0);
        assert!((d.mismatch_share - 35.0 / 300.0).abs() < 1e-15);
        assert_eq!(d.boundary_category.as_deref(), Some("3"));
    }

    #[test]
    fn mm_exact_match_is_symmetric() {
        // 3 all-female units and 5 all-male units
        let rows: Vec<_> = (0..8)
            .map(|i| {
                let f = if i < 3 { 1.0 } else { 0.0 };
                (format!("u{i}"), f, 1.0 - f)
            })
            .collect();
        let t = OccupationTable::from_triples(rows).unwrap();
        let (c, d) = mm_classification(&t);
        assert_eq!(d.mismatch, 0.0);
        // Nf = F forces Fm = Mf; the diagonal only matches when F = M
        assert_eq!(c.basic.fm(), c.basic.mf());
        assert_eq!(c.basic.female_row(), c.basic.women());

        let balanced = OccupationTable::from_triples([
            ("a", 1.0, 0.0),
            ("b", 1.0, 0.0),
            ("c", 0.0, 1.0),
            ("d", 0.0, 1.0),
        ])
        .unwrap();
        let (c, d) = mm_classification(&balanced);
        assert_eq!(d.mismatch, 0.0);
        assert!(is_symmetric(&c.basic, 0.0));
    }

    #[test]
    fn mm_two_occupations_greedy_under_takes_nothing() {
        let (c, d) = mm_classification(&two_occupations());
        assert_eq!(c.female_categories().count(), 0);
        assert_eq!(d.nf_achieved, 0.0);
        assert_eq!(d.mismatch, 70.0);
        assert_eq!(d.boundary_category.as_deref(), Some("D"));
        assert!(c.degenerate);
    }

    #[test]
    fn mm_tie_break_is_deterministic() {
        // b and a share the same female proportion; larger female mass first
        let t = OccupationTable::from_triples([("a", 1.0, 1.0), ("b", 2.0, 2.0), ("c", 0.0, 5.0)])
            .unwrap();
        let (_, d) = mm_classification(&t);
        // F = 3: b (size 4) overshoots and is the boundary even though a would fit.
        assert_eq!(d.boundary_category.as_deref(), Some("b"));
        assert_eq!(d.nf_achieved, 0.0);
    }
}
