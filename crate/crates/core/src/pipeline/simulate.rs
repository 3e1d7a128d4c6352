//! Synthetic census extracts with a known segregation structure.
//!
//! Each country is described by its workforce size, female share, a
//! category-size profile that assigns every category to a female-typed or
//! male-typed group, and the odds ratio of the induced basic table. The
//! generator solves for the unique 2×2 table with row shares
//! `(Nf/N, Nm/N)`, column shares `(F/N, M/N)` and the requested odds ratio,
//! then gives every category in a group that group's female proportion.
//! With an odds ratio above one the female-typed group sits strictly above
//! the workforce female share, so the cutoff rule recovers the groups and
//! the basic table of the expected counts is exactly the solved table.
//!
//! Workers are then sampled: category from the size profile, sex from the
//! category's female proportion. Optional extra records fail one of the
//! sample filters (age, employment, group quarters, armed forces).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{OccupationRow, OccupationTable};
use crate::error::{Error, Result};
use crate::fmt::Precision;
use crate::par::{self, Execution};
use crate::pipeline::covariates::{write_covariates, CountryCovariates};
use crate::pipeline::occupations::write_occupation_tables;
use crate::pipeline::workers::{write_workers, Sex, WorkerRecord};
use crate::pipeline::PopulationKey;
use crate::tables::Table2x2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Female,
    Male,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub code: String,
    /// Relative size; sizes are normalized over the profile.
    pub size: f64,
    pub group: Group,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    Explicit {
        categories: Vec<CategorySpec>,
    },
    /// Equal-sized categories within each group.
    Even {
        female_categories: usize,
        male_categories: usize,
        female_row_share: f64,
    },
    /// One category (`AGR`) holding `lumpy_share` of all workers, plus
    /// equal-sized categories filling the rest of each group.
    Lumpy {
        lumpy_share: f64,
        lumpy_group: Group,
        female_categories: usize,
        male_categories: usize,
        female_row_share: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySpec {
    pub country: String,
    pub year: i32,
    /// Eligible workers to draw.
    pub workers: usize,
    /// `F/N` of the eligible workforce.
    pub female_share: f64,
    /// Odds ratio of the basic table; at least 1.
    pub odds_ratio: f64,
    pub gdp_pc: f64,
    pub profile: Profile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub countries: Vec<CountrySpec>,
    /// Extra filtered-out records, as a fraction of `workers`.
    #[serde(default)]
    pub ineligible_share: f64,
    /// Draw person weights uniformly from `[0.5, 2)` instead of using 1.
    #[serde(default)]
    pub random_weights: bool,
}

impl SimulationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// What a country was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub key: PopulationKey,
    /// Expected female and male mass per category.
    pub intended: OccupationTable,
    /// The basic table of `intended`, as shares.
    pub basic: Table2x2,
    /// Exact weighted aggregate of the eligible records that were emitted.
    pub realized: OccupationTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub records: Vec<WorkerRecord>,
    pub truth: Vec<GroundTruth>,
    pub covariates: Vec<CountryCovariates>,
}

fn infeasible(country: &str, reason: impl std::fmt::Display) -> Error {
    Error::InfeasibleSpec(format!("{country}: {reason}"))
}

fn open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

/// Cell shares `[ff, mf, fm, mm]` of the 2×2 table with the given female
/// row share, female column share and odds ratio.
pub fn solve_basic_table(row_female: f64, col_female: f64, odds_ratio: f64) -> [f64; 4] {
    let (r, s, theta) = (row_female, col_female, odds_ratio);
    let lo = (r + s - 1.0).max(0.0);
    let hi = r.min(s);
    let ff = if theta == 1.0 {
        r * s
    } else {
        // x(1 − r − s + x) = θ(r − x)(s − x)
        let a = 1.0 - theta;
        let b = 1.0 - r - s + theta * (r + s);
        let c = -theta * r * s;
        let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
        let q = -0.5 * (b + b.signum() * disc);
        let roots = [q / a, c / q];
        roots
            .into_iter()
            .filter(|x| x.is_finite())
            .min_by(|x, y| {
                let dist = |v: f64| (lo - v).max(v - hi).max(0.0);
                dist(*x).total_cmp(&dist(*y))
            })
            .expect("quadratic has a root in range")
            .clamp(lo, hi)
    };
    [ff, r - ff, s - ff, 1.0 - r - s + ff]
}

fn categories(spec: &CountrySpec) -> Result<Vec<CategorySpec>> {
    let name = spec.country.as_str();
    fn even(prefix: &str, count: usize, share: f64, group: Group) -> Vec<CategorySpec> {
        (0..count)
            .map(|i| CategorySpec {
                code: format!("{prefix}{:02}", i + 1),
                size: share / count as f64,
                group,
            })
            .collect()
    }
    let cats: Vec<CategorySpec> = match &spec.profile {
        Profile::Explicit { categories } => categories.clone(),
        Profile::Even {
            female_categories,
            male_categories,
            female_row_share,
        } => {
            if !open_unit(*female_row_share) {
                return Err(infeasible(name, "female_row_share must lie in (0, 1)"));
            }
            if *female_categories == 0 || *male_categories == 0 {
                return Err(infeasible(name, "each group needs at least one category"));
            }
            let mut cats = even("F", *female_categories, *female_row_share, Group::Female);
            cats.extend(even(
                "M",
                *male_categories,
                1.0 - female_row_share,
                Group::Male,
            ));
            cats
        }
        Profile::Lumpy {
            lumpy_share,
            lumpy_group,
            female_categories,
            male_categories,
            female_row_share,
        } => {
            if !open_unit(*female_row_share) || !open_unit(*lumpy_share) {
                return Err(infeasible(name, "shares must lie in (0, 1)"));
            }
            let (group_share, others) = match lumpy_group {
                Group::Female => (*female_row_share, *female_categories),
                Group::Male => (1.0 - female_row_share, *male_categories),
            };
            let rest = group_share - lumpy_share;
            if rest < -1e-12 || (others == 0) != (rest.abs() <= 1e-12) {
                return Err(infeasible(
                    name,
                    format!("lumpy share {lumpy_share} does not fit a group of size {group_share}"),
                ));
            }
            let mut cats = vec![CategorySpec {
                code: "AGR".into(),
                size: *lumpy_share,
                group: *lumpy_group,
            }];
            let (f_share, m_share) = match lumpy_group {
                Group::Female => (rest, 1.0 - female_row_share),
                Group::Male => (*female_row_share, rest),
            };
            if *female_categories + usize::from(*lumpy_group == Group::Female) == 0
                || *male_categories + usize::from(*lumpy_group == Group::Male) == 0
            {
                return Err(infeasible(name, "each group needs at least one category"));
            }
            if *female_categories > 0 {
                cats.extend(even("F", *female_categories, f_share, Group::Female));
            }
            if *male_categories > 0 {
                cats.extend(even("M", *male_categories, m_share, Group::Male));
            }
            cats
        }
    };
    if cats.iter().any(|c| !(c.size > 0.0 && c.size.is_finite())) {
        return Err(infeasible(name, "category sizes must be positive"));
    }
    if !cats.iter().any(|c| c.group == Group::Female)
        || !cats.iter().any(|c| c.group == Group::Male)
    {
        return Err(infeasible(name, "each group needs at least one category"));
    }
    let total: f64 = cats.iter().map(|c| c.size).sum();
    Ok(cats
        .into_iter()
        .map(|c| CategorySpec {
            size: c.size / total,
            ..c
        })
        .collect())
}

struct Plan {
    categories: Vec<CategorySpec>,
    /// Female proportion inside each category.
    female_prob: Vec<f64>,
    basic: Table2x2,
}

fn plan(spec: &CountrySpec) -> Result<Plan> {
    let name = spec.country.as_str();
    if spec.workers == 0 {
        return Err(infeasible(name, "workers must be positive"));
    }
    if !open_unit(spec.female_share) {
        return Err(infeasible(name, "female_share must lie in (0, 1)"));
    }
    if !(spec.odds_ratio >= 1.0 && spec.odds_ratio.is_finite()) {
        return Err(infeasible(name, "odds_ratio must be finite and at least 1"));
    }
    if !(spec.gdp_pc > 0.0 && spec.gdp_pc.is_finite()) {
        return Err(infeasible(name, "gdp_pc must be positive"));
    }
    let categories = categories(spec)?;
    let row_female: f64 = categories
        .iter()
        .filter(|c| c.group == Group::Female)
        .map(|c| c.size)
        .sum();
    let cells = solve_basic_table(row_female, spec.female_share, spec.odds_ratio);
    if cells.iter().any(|c| *c <= 0.0) {
        return Err(infeasible(
            name,
            format!(
                "female share {} leaves an empty cell with row share {row_female}",
                spec.female_share
            ),
        ));
    }
    let basic = Table2x2::from_cells(cells)?;
    let p_female = cells[0] / row_female;
    let p_male = cells[2] / (1.0 - row_female);
    let female_prob = categories
        .iter()
        .map(|c| match c.group {
            Group::Female => p_female,
            Group::Male => p_male,
        })
        .collect();
    Ok(Plan {
        categories,
        female_prob,
        basic,
    })
}

fn simulate_country(
    spec: &CountrySpec,
    index: usize,
    seed: u64,
    ineligible_share: f64,
    random_weights: bool,
) -> Result<(Vec<WorkerRecord>, GroundTruth)> {
    let plan = plan(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);

    let sizes: Vec<f64> = plan.categories.iter().map(|c| c.size).collect();
    let pick = WeightedIndex::new(&sizes).map_err(|e| infeasible(&spec.country, e))?;
    let extra = (spec.workers as f64 * ineligible_share).round() as usize;

    let mut records = Vec::with_capacity(spec.workers + extra);
    let mut realized = vec![(0.0, 0.0); plan.categories.len()];
    for i in 0..spec.workers + extra {
        let cat = pick.sample(&mut rng);
        let sex = if rng.gen::<f64>() < plan.female_prob[cat] {
            Sex::Female
        } else {
            Sex::Male
        };
        let weight = if random_weights {
            rng.gen_range(0.5..2.0)
        } else {
            1.0
        };
        let mut r = WorkerRecord::new(
            spec.country.clone(),
            spec.year,
            sex,
            plan.categories[cat].code.clone(),
        )
        .with_weight(weight);
        r.age = Some(rng.gen_range(15..=64));
        r.employed = Some(true);
        r.group_quarters = Some(false);
        r.armed_forces = Some(false);
        if i < spec.workers {
            let cell = &mut realized[cat];
            match sex {
                Sex::Female => cell.0 += weight,
                Sex::Male => cell.1 += weight,
            }
        } else {
            match rng.gen_range(0..5) {
                0 => r.age = Some(rng.gen_range(10..15)),
                1 => r.age = Some(rng.gen_range(65..90)),
                2 => r.employed = Some(false),
                3 => r.group_quarters = Some(true),
                _ => r.armed_forces = Some(true),
            }
        }
        records.push(r);
    }
    records.shuffle(&mut rng);

    let n = spec.workers as f64;
    let intended = OccupationTable::new(
        plan.categories
            .iter()
            .zip(&plan.female_prob)
            .map(|(c, p)| {
                OccupationRow::new(c.code.clone(), n * c.size * p, n * c.size * (1.0 - p))
            })
            .collect(),
    )?;
    let realized = OccupationTable::new(
        plan.categories
            .iter()
            .zip(realized)
            .map(|(c, (f, m))| OccupationRow::new(c.code.clone(), f, m))
            .collect(),
    )
    .map_err(|e| e.in_population(&spec.country, spec.year))?;
    let truth = GroundTruth {
        key: PopulationKey::new(spec.country.clone(), spec.year),
        intended,
        basic: plan.basic,
        realized,
    };
    Ok((records, truth))
}

/// Generates every country. Each country draws from its own ChaCha stream
/// keyed by `seed` and its position, so output is identical whether the
/// countries run in parallel or not.
pub fn simulate_countries(spec: &SimulationSpec, seed: u64, exec: Execution) -> Result<Simulation> {
    if !(0.0..=10.0).contains(&spec.ineligible_share) {
        return Err(Error::InfeasibleSpec(
            "ineligible_share must lie in [0, 10]".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for c in &spec.countries {
        if !seen.insert((c.country.as_str(), c.year)) {
            return Err(infeasible(
                &c.country,
                format!("duplicate country-year {}", c.year),
            ));
        }
    }
    let indexed: Vec<(usize, &CountrySpec)> = spec.countries.iter().enumerate().collect();
    let per_country = par::try_map(exec, &indexed, |(i, c)| {
        simulate_country(c, *i, seed, spec.ineligible_share, spec.random_weights)
    })?;

    let mut records = Vec::new();
    let mut truth = Vec::with_capacity(per_country.len());
    for (recs, t) in per_country {
        records.extend(recs);
        truth.push(t);
    }
    let covariates = spec
        .countries
        .iter()
        .map(|c| CountryCovariates {
            country: c.country.clone(),
            year: c.year,
            gdp_pc: c.gdp_pc,
        })
        .collect();
    Ok(Simulation {
        records,
        truth,
        covariates,
    })
}

pub const WORKERS_FILE: &str = "workers.csv";
pub const COVARIATES_FILE: &str = "covariates.csv";
pub const TRUTH_FILE: &str = "truth.csv";

/// Writes `workers.csv`, `covariates.csv` and `truth.csv` (the intended
/// occupation tables) into `dir`.
pub fn write_simulation(dir: &Path, sim: &Simulation) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_workers(
        BufWriter::new(File::create(dir.join(WORKERS_FILE))?),
        &sim.records,
    )?;
    write_covariates(
        BufWriter::new(File::create(dir.join(COVARIATES_FILE))?),
        &sim.covariates,
    )?;
    let truth: BTreeMap<PopulationKey, OccupationTable> = sim
        .truth
        .iter()
        .map(|t| (t.key.clone(), t.intended.clone()))
        .collect();
    write_occupation_tables(
        BufWriter::new(File::create(dir.join(TRUTH_FILE))?),
        &truth,
        Precision::RoundTrip,
    )?;
    Ok(())
}
