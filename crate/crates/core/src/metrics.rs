//! Segregation indices and decompositions of cross-population differences.

use serde::{Deserialize, Serialize};

use crate::classify::{basic_classification, mm_classification, MmDiagnostics, OccupationTable};
use crate::error::{Error, Result};
use crate::ipf::{ipf_standardize, IpfResult, IpfSettings, TargetMarginals};
use crate::par::{self, Execution};
use crate::tables::{dissimilarity, Table2x2};

/// A named set of target marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub targets: TargetMarginals,
}

impl Scenario {
    pub fn new(name: impl Into<String>, targets: TargetMarginals) -> Self {
        Scenario {
            name: name.into(),
            targets,
        }
    }

    pub fn uniform() -> Self {
        Scenario::new("half", TargetMarginals::uniform())
    }

    /// Uniform targets plus low-, middle- and high-income country marginals
    /// (Uganda, Bolivia, Switzerland; shares rounded to two decimals).
    pub fn income_presets() -> Vec<Scenario> {
        let preset = |name: &str, nf: f64, f: f64| {
            Scenario::new(
                name,
                TargetMarginals::from_shares(nf, f).expect("valid preset"),
            )
        };
        vec![
            Scenario::uniform(),
            preset("uganda", 0.79, 0.45),
            preset("bolivia", 0.41, 0.40),
            preset("switzerland", 0.43, 0.42),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedId {
    pub value: f64,
    pub scenario: TargetMarginals,
    /// `None` when the basic table has an empty row and IPF was skipped.
    pub ipf: Option<IpfResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// B standardized to A's marginals.
    AtoB,
    /// A standardized to B's marginals.
    BtoA,
    /// Both standardized to a common target.
    BothToNeutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    Additive,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub total: f64,
    pub segregation_component: f64,
    pub marginal_component: f64,
    pub direction: Direction,
    pub form: Form,
}

impl DecompositionResult {
    /// `(segregation, marginal)` as fractions of the total.
    pub fn shares(&self) -> Option<(f64, f64)> {
        if self.total == 0.0 || !self.total.is_finite() {
            return None;
        }
        Some((
            self.segregation_component / self.total,
            self.marginal_component / self.total,
        ))
    }

    /// `total − (segregation + marginal)`. Zero for the additive form.
    pub fn residual(&self) -> f64 {
        self.total - (self.segregation_component + self.marginal_component)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub sid_a: f64,
    pub sid_b: f64,
    pub decomposition: DecompositionResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAverage {
    pub scenarios: Vec<ScenarioOutcome>,
    /// Undefined when the two crude IDs coincide.
    pub mean_segregation_share: Option<f64>,
    pub mean_marginal_share: Option<f64>,
    pub mean_sid_pair: (f64, f64),
}

/// ID of the basic segregation table.
pub fn crude_id(t: &OccupationTable) -> f64 {
    let basic = basic_classification(t).basic;
    dissimilarity(&basic).expect("occupation tables have both sexes")
}

/// `½ Σ |F_i/F − M_i/M|` over the categories.
pub fn conventional_id(t: &OccupationTable) -> f64 {
    let (f, m) = (t.women(), t.men());
    0.5 * t
        .rows()
        .iter()
        .map(|r| (r.female / f - r.male / m).abs())
        .sum::<f64>()
}

/// ID of a basic table after IPF standardization to `targets`.
///
/// A table with an empty gendered row has no association and scores 0
/// without running IPF.
pub fn standardize_basic(
    basic: &Table2x2,
    targets: &TargetMarginals,
    settings: &IpfSettings,
) -> Result<StandardizedId> {
    if basic.has_empty_row() {
        return Ok(StandardizedId {
            value: 0.0,
            scenario: *targets,
            ipf: None,
        });
    }
    let ipf = ipf_standardize(basic, targets, settings)?;
    Ok(StandardizedId {
        value: dissimilarity(&ipf.table)?,
        scenario: *targets,
        ipf: Some(ipf),
    })
}

pub fn standardized_id(
    t: &OccupationTable,
    targets: &TargetMarginals,
    settings: &IpfSettings,
) -> Result<StandardizedId> {
    standardize_basic(&basic_classification(t).basic, targets, settings)
}

/// ID of the marginal-matching table, with matching diagnostics. The value
/// is unreliable when `mismatch_share` is material.
pub fn mm_measure(t: &OccupationTable) -> (f64, MmDiagnostics) {
    let (c, diagnostics) = mm_classification(t);
    let value = dissimilarity(&c.basic).expect("occupation tables have both sexes");
    (value, diagnostics)
}

/// `ID_A − ID_B = (ID_A − SID_B) + (SID_B − ID_B)` with B standardized to
/// A's marginals.
pub fn decompose_additive(id_a: f64, sid_b_at_a: f64, id_b: f64) -> DecompositionResult {
    let segregation = id_a - sid_b_at_a;
    let marginal = sid_b_at_a - id_b;
    DecompositionResult {
        total: segregation + marginal,
        segregation_component: segregation,
        marginal_component: marginal,
        direction: Direction::AtoB,
        form: Form::Additive,
    }
}

/// Log-form split of the ID gap between `x = [a b; c d]` and `y = [p q; r s]`:
///
/// * segregation `Δ1 = ln a − ln b − ln p + ln q`
/// * marginal `Δ2 = ln(p+r) − ln(q+s) − ln(a+c) + ln(b+d)`
/// * total `ln ID_X − ln ID_Y`
///
/// `Δ1 + Δ2` is the gap in log *ratios* `ln[(a/(a+c)) / (b/(b+d))]`, which
/// differs from the gap in log IDs; [`DecompositionResult::residual`]
/// reports the difference.
pub fn decompose_log(x: &Table2x2, y: &Table2x2) -> Result<DecompositionResult> {
    if x.cells().iter().chain(y.cells().iter()).any(|c| *c <= 0.0) {
        return Err(Error::NonPositiveCell);
    }
    let (id_x, id_y) = (dissimilarity(x)?, dissimilarity(y)?);
    if id_x <= 0.0 || id_y <= 0.0 {
        return Err(Error::NonPositiveId);
    }
    let [a, b, c, d] = x.cells();
    let [p, q, r, s] = y.cells();
    let segregation = a.ln() - b.ln() - p.ln() + q.ln();
    let marginal = (p + r).ln() - (q + s).ln() - (a + c).ln() + (b + d).ln();
    Ok(DecompositionResult {
        total: id_x.ln() - id_y.ln(),
        segregation_component: segregation,
        marginal_component: marginal,
        direction: Direction::BothToNeutral,
        form: Form::Log,
    })
}

fn neutral(id_a: f64, id_b: f64, sid_a: f64, sid_b: f64) -> DecompositionResult {
    let segregation = sid_a - sid_b;
    let marginal = (id_a - id_b) - segregation;
    DecompositionResult {
        total: segregation + marginal,
        segregation_component: segregation,
        marginal_component: marginal,
        direction: Direction::BothToNeutral,
        form: Form::Additive,
    }
}

/// Additive decomposition of `ID_A − ID_B` for two basic tables.
///
/// `neutral_targets` is used only for [`Direction::BothToNeutral`].
pub fn decompose_basic(
    a: &Table2x2,
    b: &Table2x2,
    direction: Direction,
    neutral_targets: &TargetMarginals,
    settings: &IpfSettings,
) -> Result<DecompositionResult> {
    let (id_a, id_b) = (dissimilarity(a)?, dissimilarity(b)?);
    match direction {
        Direction::AtoB => {
            let sid_b = standardize_basic(b, &TargetMarginals::of_table(a), settings)?.value;
            Ok(decompose_additive(id_a, sid_b, id_b))
        }
        Direction::BtoA => {
            let sid_a = standardize_basic(a, &TargetMarginals::of_table(b), settings)?.value;
            let segregation = sid_a - id_b;
            let marginal = id_a - sid_a;
            Ok(DecompositionResult {
                total: segregation + marginal,
                segregation_component: segregation,
                marginal_component: marginal,
                direction,
                form: Form::Additive,
            })
        }
        Direction::BothToNeutral => {
            let sid_a = standardize_basic(a, neutral_targets, settings)?.value;
            let sid_b = standardize_basic(b, neutral_targets, settings)?.value;
            Ok(neutral(id_a, id_b, sid_a, sid_b))
        }
    }
}

/// Standardizes both populations to each scenario and averages the
/// resulting decompositions. Any failing scenario aborts the whole run.
pub fn scenario_average(
    t_a: &OccupationTable,
    t_b: &OccupationTable,
    scenarios: &[Scenario],
    settings: &IpfSettings,
    exec: Execution,
) -> Result<ScenarioAverage> {
    if scenarios.is_empty() {
        return Err(Error::InvalidTargets(
            "at least one scenario is required".into(),
        ));
    }
    let basic_a = basic_classification(t_a).basic;
    let basic_b = basic_classification(t_b).basic;
    let (id_a, id_b) = (dissimilarity(&basic_a)?, dissimilarity(&basic_b)?);

    let outcomes = par::try_map(exec, scenarios, |scenario| -> Result<ScenarioOutcome> {
        let sid_a = standardize_basic(&basic_a, &scenario.targets, settings)?.value;
        let sid_b = standardize_basic(&basic_b, &scenario.targets, settings)?.value;
        Ok(ScenarioOutcome {
            scenario: scenario.clone(),
            sid_a,
            sid_b,
            decomposition: neutral(id_a, id_b, sid_a, sid_b),
        })
    })?;

    let k = outcomes.len() as f64;
    let shares: Option<Vec<(f64, f64)>> =
        outcomes.iter().map(|o| o.decomposition.shares()).collect();
    let (mean_segregation_share, mean_marginal_share) = match shares {
        Some(s) => (
            Some(s.iter().map(|x| x.0).sum::<f64>() / k),
            Some(s.iter().map(|x| x.1).sum::<f64>() / k),
        ),
        None => (None, None),
    };
    let mean_sid_pair = (
        outcomes.iter().map(|o| o.sid_a).sum::<f64>() / k,
        outcomes.iter().map(|o| o.sid_b).sum::<f64>() / k,
    );
    Ok(ScenarioAverage {
        scenarios: outcomes,
        mean_segregation_share,
        mean_marginal_share,
        mean_sid_pair,
    })
}
