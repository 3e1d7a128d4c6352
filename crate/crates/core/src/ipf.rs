//! Iterative proportional fitting of a 2×2 table to target marginals.
//!
//! Each iteration rescales the rows to their targets and then the columns
//! (or the reverse when [`ScalingOrder::ColumnsFirst`] is chosen). Scaling
//! whole rows and columns leaves the cross-product ratio untouched, so the
//! fitted table keeps the association of the input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::{odds_ratio, Table2x2};

/// Marginals tolerance for shares summing to one.
const SHARE_SUM_TOL: f64 = 1e-12;

/// Row and column shares an IPF run should reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetMarginals {
    rows: [f64; 2],
    cols: [f64; 2],
}

impl TargetMarginals {
    pub fn new(rows: [f64; 2], cols: [f64; 2]) -> Result<Self> {
        for (name, pair) in [("row", rows), ("column", cols)] {
            if pair.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidTargets(format!(
                    "{name} shares must be finite and non-negative, got {pair:?}"
                )));
            }
            if (pair[0] + pair[1] - 1.0).abs() > SHARE_SUM_TOL {
                return Err(Error::InvalidTargets(format!(
                    "{name} shares must sum to 1, got {pair:?}"
                )));
            }
        }
        Ok(TargetMarginals { rows, cols })
    }

    /// Targets from the female-typed row share and the female column share.
    pub fn from_shares(row_female: f64, col_female: f64) -> Result<Self> {
        Self::new(
            [row_female, 1.0 - row_female],
            [col_female, 1.0 - col_female],
        )
    }

    /// `(1/2, 1/2)` on both margins.
    pub fn uniform() -> Self {
        TargetMarginals {
            rows: [0.5, 0.5],
            cols: [0.5, 0.5],
        }
    }

    /// The marginal shares of an existing table.
    pub fn of_table(t: &Table2x2) -> Self {
        let n = t.total();
        let [r0, r1] = t.row_totals();
        let [c0, c1] = t.col_totals();
        TargetMarginals {
            rows: [r0 / n, r1 / n],
            cols: [c0 / n, c1 / n],
        }
    }

    pub fn rows(&self) -> [f64; 2] {
        self.rows
    }

    pub fn cols(&self) -> [f64; 2] {
        self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ScalingOrder {
    #[default]
    RowsFirst,
    ColumnsFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpfSettings {
    /// Largest tolerated absolute gap between a marginal and its target.
    pub tolerance: f64,
    /// One iteration is one row pass plus one column pass.
    pub max_iterations: usize,
    pub order: ScalingOrder,
}

impl Default for IpfSettings {
    fn default() -> Self {
        IpfSettings {
            tolerance: 1e-12,
            max_iterations: 10_000,
            order: ScalingOrder::RowsFirst,
        }
    }
}

impl IpfSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidSettings(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSettings(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpfResult {
    /// Fitted table with total mass 1.
    pub table: Table2x2,
    pub iterations: usize,
    pub converged: bool,
    pub max_deviation: f64,
    /// `|OR_out − OR_in| / OR_in`, present when the input odds ratio is
    /// finite and non-zero.
    pub or_drift: Option<f64>,
}

/// False when some empty row or column faces a positive target, or a
/// non-empty one faces a zero target.
pub fn check_feasibility(t: &Table2x2, targets: &TargetMarginals) -> bool {
    let pairs = t
        .row_totals()
        .into_iter()
        .zip(targets.rows)
        .chain(t.col_totals().into_iter().zip(targets.cols));
    for (have, want) in pairs {
        if (have == 0.0) != (want == 0.0) {
            return false;
        }
    }
    true
}

/// Mutable IPF state, exposed so callers can watch the iteration.
#[derive(Debug, Clone)]
pub struct IpfState {
    cells: [f64; 4],
    targets: TargetMarginals,
}

impl IpfState {
    pub fn new(t: &Table2x2, targets: TargetMarginals) -> Result<Self> {
        if !check_feasibility(t, &targets) {
            return Err(Error::InfeasibleTarget);
        }
        Ok(IpfState {
            cells: t.normalized().cells(),
            targets,
        })
    }

    fn scale_rows(&mut self) {
        let c = &mut self.cells;
        for (row, target) in [(0usize, self.targets.rows[0]), (2, self.targets.rows[1])] {
            let sum = c[row] + c[row + 1];
            if sum > 0.0 {
                let k = target / sum;
                c[row] *= k;
                c[row + 1] *= k;
            }
        }
    }

    fn scale_cols(&mut self) {
        let c = &mut self.cells;
        for (col, target) in [(0usize, self.targets.cols[0]), (1, self.targets.cols[1])] {
            let sum = c[col] + c[col + 2];
            if sum > 0.0 {
                let k = target / sum;
                c[col] *= k;
                c[col + 2] *= k;
            }
        }
    }

    /// Runs one iteration and returns the resulting max deviation.
    pub fn step(&mut self, order: ScalingOrder) -> f64 {
        match order {
            ScalingOrder::RowsFirst => {
                self.scale_rows();
                self.scale_cols();
            }
            ScalingOrder::ColumnsFirst => {
                self.scale_cols();
                self.scale_rows();
            }
        }
        self.max_deviation()
    }

    pub fn max_deviation(&self) -> f64 {
        let c = &self.cells;
        let rows = [c[0] + c[1], c[2] + c[3]];
        let cols = [c[0] + c[2], c[1] + c[3]];
        rows.iter()
            .zip(self.targets.rows)
            .chain(cols.iter().zip(self.targets.cols))
            .map(|(have, want)| (have - want).abs())
            .fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table2x2 {
        Table2x2::from_cells(self.cells).expect("IPF keeps cells non-negative with unit mass")
    }
}

/// Standardizes `t` to `targets`. The output is a relative-frequency table.
///
/// Returns [`Error::NotConverged`] with the partial state when the iteration
/// cap is hit first.
pub fn ipf_standardize(
    t: &Table2x2,
    targets: &TargetMarginals,
    settings: &IpfSettings,
) -> Result<IpfResult> {
    settings.validate()?;
    let mut state = IpfState::new(t, *targets)?;

    let mut deviation = state.max_deviation();
    let mut iterations = 0;
    while deviation > settings.tolerance && iterations < settings.max_iterations {
        deviation = state.step(settings.order);
        iterations += 1;
    }

    let table = state.table();
    let or_drift = match odds_ratio(t) {
        Ok(before) if before.is_finite() && before > 0.0 => odds_ratio(&table)
            .ok()
            .map(|after| (after - before).abs() / before),
        _ => None,
    };
    let result = IpfResult {
        table,
        iterations,
        converged: deviation <= settings.tolerance,
        max_deviation: deviation,
        or_drift,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}
