//! The 2×2 segregation table and the association statistics defined on it.
//!
//! Rows are gendered categories (female-typed first), columns are sexes
//! (women first):
//!
//! ```text
//!                 women   men
//! female cats      ff     mf     | Nf
//! male cats        fm     mm     | Nm
//!                 ----   ----
//!                  F      M        N
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2×2 cross-tabulation of workers by gendered category and sex.
///
/// Cells are real masses: weighted counts or relative frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table2x2 {
    ff: f64,
    mf: f64,
    fm: f64,
    mm: f64,
}

impl Table2x2 {
    pub fn new(ff: f64, mf: f64, fm: f64, mm: f64) -> Result<Self> {
        let cells = [ff, mf, fm, mm];
        if cells.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidTable(format!(
                "cells must be finite and non-negative, got {cells:?}"
            )));
        }
        if ff + mf + fm + mm <= 0.0 {
            return Err(Error::InvalidTable("total mass is zero".into()));
        }
        Ok(Table2x2 { ff, mf, fm, mm })
    }

    /// Builds a table from `[ff, mf, fm, mm]`.
    pub fn from_cells(cells: [f64; 4]) -> Result<Self> {
        Self::new(cells[0], cells[1], cells[2], cells[3])
    }

    /// Women in female-typed categories.
    pub fn ff(&self) -> f64 {
        self.ff
    }

    /// Men in female-typed categories.
    pub fn mf(&self) -> f64 {
        self.mf
    }

    /// Women in male-typed categories.
    pub fn fm(&self) -> f64 {
        self.fm
    }

    /// Men in male-typed categories.
    pub fn mm(&self) -> f64 {
        self.mm
    }

    pub fn cells(&self) -> [f64; 4] {
        [self.ff, self.mf, self.fm, self.mm]
    }

    pub fn total(&self) -> f64 {
        self.ff + self.mf + self.fm + self.mm
    }

    /// Column total of women, `F`.
    pub fn women(&self) -> f64 {
        self.ff + self.fm
    }

    /// Column total of men, `M`.
    pub fn men(&self) -> f64 {
        self.mf + self.mm
    }

    /// Row total of female-typed categories, `Nf`.
    pub fn female_row(&self) -> f64 {
        self.ff + self.mf
    }

    /// Row total of male-typed categories, `Nm`.
    pub fn male_row(&self) -> f64 {
        self.fm + self.mm
    }

    pub fn row_totals(&self) -> [f64; 2] {
        [self.female_row(), self.male_row()]
    }

    pub fn col_totals(&self) -> [f64; 2] {
        [self.women(), self.men()]
    }

    /// Multiplies every cell by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.ff * k, self.mf * k, self.fm * k, self.mm * k)
    }

    /// Multiplies the female-typed row by `r0` and the male-typed row by `r1`.
    pub fn scale_rows(&self, r0: f64, r1: f64) -> Result<Self> {
        Self::new(self.ff * r0, self.mf * r0, self.fm * r1, self.mm * r1)
    }

    /// Multiplies the women column by `c0` and the men column by `c1`.
    pub fn scale_cols(&self, c0: f64, c1: f64) -> Result<Self> {
        Self::new(self.ff * c0, self.mf * c1, self.fm * c0, self.mm * c1)
    }

    /// Same table with total mass 1.
    pub fn normalized(&self) -> Self {
        let n = self.total();
        Table2x2 {
            ff: self.ff / n,
            mf: self.mf / n,
            fm: self.fm / n,
            mm: self.mm / n,
        }
    }

    /// True when one of the two rows carries no mass.
    pub fn has_empty_row(&self) -> bool {
        self.female_row() == 0.0 || self.male_row() == 0.0
    }
}

/// Row and column female shares of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalShares {
    /// `Nf / N`: share of the workforce in female-typed categories.
    pub row_female_share: f64,
    /// `F / N`: female share of the workforce.
    pub col_female_share: f64,
}

/// Cross-product ratio `(ff·mm)/(mf·fm)`.
///
/// A single zero off the diagonal gives `+∞`, a single zero on the diagonal
/// gives `0`. Two or more zero cells are rejected.
pub fn odds_ratio(t: &Table2x2) -> Result<f64> {
    let zeros = t.cells().iter().filter(|c| **c == 0.0).count();
    if zeros >= 2 {
        return Err(Error::DegenerateTable);
    }
    let diagonal = t.ff * t.mm;
    let off = t.mf * t.fm;
    if off == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(diagonal / off)
}

/// Difference of column proportions, `ff/F − mf/M` (signed).
pub fn dissimilarity(t: &Table2x2) -> Result<f64> {
    let (f, m) = (t.women(), t.men());
    if f == 0.0 || m == 0.0 {
        return Err(Error::EmptySexGroup);
    }
    Ok(t.ff / f - t.mf / m)
}

/// Phi coefficient `(ff·mm − mf·fm)/sqrt(Nf·Nm·F·M)`.
pub fn phi_coefficient(t: &Table2x2) -> Result<f64> {
    let margins = [t.female_row(), t.male_row(), t.women(), t.men()];
    if margins.contains(&0.0) {
        return Err(Error::DegenerateMarginal);
    }
    let denom = margins.iter().product::<f64>().sqrt();
    Ok((t.ff * t.mm - t.mf * t.fm) / denom)
}

/// Two-group Gini on a 2×2 table, `|(ff/F)(mm/M) − (fm/F)(mf/M)|`.
pub fn gini(t: &Table2x2) -> Result<f64> {
    let (f, m) = (t.women(), t.men());
    if f == 0.0 || m == 0.0 {
        return Err(Error::EmptySexGroup);
    }
    Ok(((t.ff / f) * (t.mm / m) - (t.fm / f) * (t.mf / m)).abs())
}

pub fn marginal_shares(t: &Table2x2) -> MarginalShares {
    let n = t.total();
    MarginalShares {
        row_female_share: t.female_row() / n,
        col_female_share: t.women() / n,
    }
}

/// `a = d` and `b = c` within `tol · N`.
pub fn is_symmetric(t: &Table2x2, tol: f64) -> bool {
    let slack = tol * t.total();
    (t.ff - t.mm).abs() <= slack && (t.mf - t.fm).abs() <= slack
}
