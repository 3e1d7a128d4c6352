//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line; run with
//! `cargo test -p occseg --test acceptance -- --nocapture --test-threads=1`
//! to see them in order.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use occseg::classify::{mm_classification, OccupationRow, OccupationTable};
use occseg::ipf::{ipf_standardize, IpfSettings, ScalingOrder, TargetMarginals};
use occseg::metrics::{
    conventional_id, crude_id, decompose_basic, decompose_log, standardize_basic, Direction,
    Scenario,
};
use occseg::pipeline::figures::{read_points, write_figure_data, Measure};
use occseg::pipeline::regression::regress_quadratic;
use occseg::pipeline::results::{compute_results, join_covariates};
use occseg::pipeline::simulate::{
    simulate_countries, write_simulation, CountrySpec, Profile, SimulationSpec, COVARIATES_FILE,
    TRUTH_FILE, WORKERS_FILE,
};
use occseg::pipeline::workers::{ingest_workers, FilterSettings};
use occseg::pipeline::PopulationKey;
use occseg::tables::{dissimilarity, gini, odds_ratio, phi_coefficient, Table2x2};
use occseg::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: u32, title: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {n:>2}: {title} ({detail})");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(20240611);
    r.set_stream(stream);
    r
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn country_pair() -> (Table2x2, Table2x2) {
    (
        Table2x2::new(310.0, 120.0, 110.0, 460.0).unwrap(),
        Table2x2::new(400.0, 385.0, 45.0, 170.0).unwrap(),
    )
}

#[test]
fn criterion_01_equal_odds_pair() {
    let a = OccupationTable::from_triples([("C", 10.0, 70.0), ("D", 60.0, 30.0)]).unwrap();
    let b = OccupationTable::from_triples([("C", 15.0, 70.0), ("D", 360.0, 120.0)]).unwrap();
    // rows C, D as laid out, columns women, men
    let or_a = odds_ratio(&Table2x2::new(10.0, 70.0, 60.0, 30.0).unwrap()).unwrap();
    let or_b = odds_ratio(&Table2x2::new(15.0, 70.0, 360.0, 120.0).unwrap()).unwrap();
    let (id_a, id_b) = (crude_id(&a), crude_id(&b));
    let pass = within(or_a, 0.0714, 0.0005)
        && within(or_b, 0.0714, 0.0005)
        && within(id_a, 0.557, 0.001)
        && within(id_b, 0.328, 0.001);
    report(
        1,
        "equal-odds pair: odds ratios and IDs",
        pass,
        format!("OR_A={or_a:.5} OR_B={or_b:.5} ID_A={id_a:.4} ID_B={id_b:.4}"),
    );
}

#[test]
fn criterion_02_four_occupations() {
    let t = OccupationTable::from_triples([
        ("1", 20.0, 5.0),
        ("2", 30.0, 10.0),
        ("3", 40.0, 60.0),
        ("4", 10.0, 125.0),
    ])
    .unwrap();
    let basic = occseg::classify::basic_classification(&t).basic;
    let (mm, diag) = mm_classification(&t);
    let pass = basic.cells() == [90.0, 75.0, 10.0, 125.0]
        && mm.basic.cells() == [50.0, 15.0, 50.0, 185.0]
        && diag.mismatch == 35.0
        && diag.boundary_category.as_deref() == Some("3");
    report(
        2,
        "four occupations: basic and marginal-matching tables",
        pass,
        format!(
            "basic={:?} mm={:?} mismatch={} boundary={:?}",
            basic.cells(),
            mm.basic.cells(),
            diag.mismatch,
            diag.boundary_category
        ),
    );
}

#[test]
fn criterion_03_country_pair() {
    let (a, b) = country_pair();
    let s = IpfSettings::default();
    let id_a = dissimilarity(&a).unwrap();
    let id_b = dissimilarity(&b).unwrap();
    let sid =
        standardize_basic(&b, &TargetMarginals::from_shares(0.43, 0.42).unwrap(), &s).unwrap();
    let panel_c = sid
        .ipf
        .as_ref()
        .unwrap()
        .table
        .scaled(1000.0)
        .unwrap()
        .cells();
    let cells_ok = panel_c
        .iter()
        .zip([260.0, 170.0, 160.0, 410.0])
        .all(|(x, y)| within(*x, y, 1.0));
    let fwd = decompose_basic(&a, &b, Direction::AtoB, &TargetMarginals::uniform(), &s).unwrap();
    let rev = decompose_basic(&a, &b, Direction::BtoA, &TargetMarginals::uniform(), &s).unwrap();
    let (fs, fm) = fwd.shares().unwrap();
    let (rs, rm) = rev.shares().unwrap();
    let pass = within(id_a, 0.531, 0.001)
        && within(id_b, 0.205, 0.001)
        && within(sid.value, 0.326, 0.002)
        && cells_ok
        && within(fwd.segregation_component, 0.20, 0.01)
        && within(fwd.marginal_component, 0.12, 0.01)
        && within(fs, 0.63, 0.01)
        && within(fm, 0.37, 0.01)
        && within(rs, 0.30, 0.01)
        && within(rm, 0.70, 0.01);
    report(
        3,
        "country pair: standardization and decompositions",
        pass,
        format!(
            "ID_A={id_a:.4} ID_B={id_b:.4} SID_B={:.4} panel={panel_c:.1?} \
             parts={:.3}/{:.3} shares={:.1}%/{:.1}% reversed={:.1}%/{:.1}%",
            sid.value,
            fwd.segregation_component,
            fwd.marginal_component,
            100.0 * fs,
            100.0 * fm,
            100.0 * rs,
            100.0 * rm
        ),
    );
}

#[test]
fn criterion_04_crude_equals_conventional() {
    let start = Instant::now();
    let mut rng = rng(4);
    let mut worst = 0.0f64;
    let mut tied_tables = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(2..=50);
        let mut rows: Vec<OccupationRow> = (0..k - 1)
            .map(|i| {
                OccupationRow::new(
                    format!("c{i}"),
                    rng.gen_range(0..400) as f64,
                    rng.gen_range(0..400) as f64,
                )
            })
            .collect();
        let (f, m): (f64, f64) = rows
            .iter()
            .fold((0.0, 0.0), |acc, r| (acc.0 + r.female, acc.1 + r.male));
        if f == 0.0 || m == 0.0 {
            rows.push(OccupationRow::new("fill", 7.0, 3.0));
        } else if rng.gen_bool(0.5) {
            // a row with exactly the workforce composition sits on the cutoff
            let c = rng.gen_range(1..4) as f64;
            rows.push(OccupationRow::new("tie", c * f, c * m));
            tied_tables += 1;
        } else {
            rows.push(OccupationRow::new(
                "last",
                rng.gen_range(1..400) as f64,
                rng.gen_range(1..400) as f64,
            ));
        }
        let t = OccupationTable::new(rows).unwrap();
        worst = worst.max((crude_id(&t) - conventional_id(&t)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        4,
        "crude ID equals conventional ID",
        worst <= 1e-12 && secs < 1.0,
        format!("max gap {worst:.2e}, {tied_tables} tables with ties, {secs:.3}s"),
    );
}

#[test]
fn criterion_05_symmetric_and_tau_b() {
    let mut rng = rng(5);
    let mut worst_sym = 0.0f64;
    for _ in 0..1000 {
        let (x, y) = (rng.gen_range(0.01..1000.0), rng.gen_range(0.01..1000.0));
        // a basic table has ff/F ≥ mf/M, so the diagonal carries the larger value
        let (a, b) = (f64::max(x, y), f64::min(x, y));
        let t = Table2x2::new(a, b, b, a).unwrap();
        let id = dissimilarity(&t).unwrap();
        worst_sym = worst_sym
            .max((id - phi_coefficient(&t).unwrap()).abs())
            .max((id - gini(&t).unwrap()).abs());
    }
    let mut worst_tau = 0.0f64;
    for _ in 0..1000 {
        let t = Table2x2::from_cells(common::random_cells(&mut rng, 0.5, 1000.0)).unwrap();
        worst_tau =
            worst_tau.max((common::kendall_tau_b(t.cells()) - phi_coefficient(&t).unwrap()).abs());
    }
    report(
        5,
        "ID = phi = Gini on symmetric tables, tau-b = phi",
        worst_sym <= 1e-12 && worst_tau <= 1e-12,
        format!("symmetric gap {worst_sym:.2e}, tau-b gap {worst_tau:.2e}"),
    );
}

#[test]
fn criterion_06_ipf() {
    let start = Instant::now();
    let mut rng = rng(6);
    let rows_first = IpfSettings::default();
    let cols_first = IpfSettings {
        order: ScalingOrder::ColumnsFirst,
        ..IpfSettings::default()
    };
    let (mut dev, mut drift, mut order_gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut all_converged = true;
    for _ in 0..1000 {
        let t = Table2x2::from_cells(common::random_cells(&mut rng, 0.01, 1000.0)).unwrap();
        let targets =
            TargetMarginals::from_shares(rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99))
                .unwrap();
        let r = ipf_standardize(&t, &targets, &rows_first).unwrap();
        let c = ipf_standardize(&t, &targets, &cols_first).unwrap();
        all_converged &= r.converged && c.converged;
        let (rt, ct) = (r.table.row_totals(), r.table.col_totals());
        for i in 0..2 {
            dev = dev
                .max((rt[i] - targets.rows()[i]).abs())
                .max((ct[i] - targets.cols()[i]).abs());
        }
        drift = drift.max(r.or_drift.unwrap());
        for (x, y) in r.table.cells().iter().zip(c.table.cells()) {
            order_gap = order_gap.max((x - y).abs());
        }
    }
    let diag = ipf_standardize(
        &Table2x2::new(3.0, 0.0, 0.0, 7.0).unwrap(),
        &TargetMarginals::uniform(),
        &rows_first,
    )
    .unwrap();
    let diag_ok = diag.converged
        && diag
            .table
            .cells()
            .iter()
            .zip([0.5, 0.0, 0.0, 0.5])
            .all(|(x, y)| within(*x, y, 1e-12));
    let secs = start.elapsed().as_secs_f64();
    report(
        6,
        "IPF convergence, odds-ratio drift and start order",
        all_converged
            && dev <= 1e-10
            && drift <= 1e-9
            && order_gap <= 1e-10
            && diag_ok
            && secs < 1.0,
        format!(
            "deviation {dev:.1e}, OR drift {drift:.1e}, order gap {order_gap:.1e}, \
             diagonal {:?}, {secs:.3}s",
            diag.table.cells()
        ),
    );
}

#[test]
fn criterion_07_log_identity() {
    let mut rng = rng(7);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 1000 {
        let x = Table2x2::from_cells(common::random_cells(&mut rng, 1.0, 1000.0)).unwrap();
        let y = Table2x2::from_cells(common::random_cells(&mut rng, 1.0, 1000.0)).unwrap();
        let (id_x, id_y) = (dissimilarity(&x).unwrap(), dissimilarity(&y).unwrap());
        if id_x <= 0.0 || id_y <= 0.0 {
            continue;
        }
        pairs += 1;
        let d = decompose_log(&x, &y).unwrap();
        let lhs = d.segregation_component + d.marginal_component;
        worst = worst.max((lhs - (id_x.ln() - id_y.ln())).abs());
    }
    report(
        7,
        "log decomposition parts sum to ln ID_X - ln ID_Y",
        worst <= 1e-12,
        format!("max |d1 + d2 - (ln ID_X - ln ID_Y)| = {worst:.3e} over {pairs} pairs"),
    );
}

#[test]
fn criterion_08_closed_form_sid() {
    let mut rng = rng(8);
    let s = IpfSettings::default();
    let uniform = TargetMarginals::uniform();
    let mut worst_closed = 0.0f64;
    let mut worst_equal = 0.0f64;
    for _ in 0..1000 {
        let t = Table2x2::from_cells(common::random_cells(&mut rng, 0.5, 1000.0)).unwrap();
        let sid = standardize_basic(&t, &uniform, &s).unwrap().value;
        worst_closed =
            worst_closed.max((sid - common::closed_form_sid(odds_ratio(&t).unwrap())).abs());

        // same odds ratio, different margins
        let twin = t
            .scale_rows(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0))
            .unwrap()
            .scale_cols(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0))
            .unwrap();
        let targets =
            TargetMarginals::from_shares(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95))
                .unwrap();
        let gap = standardize_basic(&t, &targets, &s).unwrap().value
            - standardize_basic(&twin, &targets, &s).unwrap().value;
        worst_equal = worst_equal.max(gap.abs());
    }
    report(
        8,
        "uniform-target SID closed form, equal OR gives equal SID",
        worst_closed <= 1e-10 && worst_equal <= 1e-10,
        format!("closed-form gap {worst_closed:.2e}, equal-OR gap {worst_equal:.2e}"),
    );
}

#[test]
fn criterion_09_margin_invariance() {
    let mut rng = rng(9);
    let s = IpfSettings::default();
    let mut worst = 0.0f64;
    let mut crude_moved = 0;
    let draws = 1000;
    for _ in 0..draws {
        let t = Table2x2::from_cells(common::random_cells(&mut rng, 0.5, 1000.0)).unwrap();
        let scaled = t
            .scale_rows(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0))
            .unwrap()
            .scale_cols(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0))
            .unwrap();
        let targets =
            TargetMarginals::from_shares(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95))
                .unwrap();
        let gap = standardize_basic(&t, &targets, &s).unwrap().value
            - standardize_basic(&scaled, &targets, &s).unwrap().value;
        worst = worst.max(gap.abs());
        if (dissimilarity(&t).unwrap() - dissimilarity(&scaled).unwrap()).abs() > 1e-6 {
            crude_moved += 1;
        }
    }
    let moved_share = crude_moved as f64 / draws as f64;
    report(
        9,
        "SID invariant to row/column scaling while crude ID moves",
        worst <= 1e-10 && moved_share >= 0.95,
        format!(
            "SID gap {worst:.2e}, crude ID moved in {:.1}% of draws",
            100.0 * moved_share
        ),
    );
}

#[test]
fn criterion_10_regression_oracle() {
    let mut rng = rng(10);
    let (mut coef_gap, mut se_gap) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.gen_range(8..200);
        let (b0, b1, b2) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-0.1..0.1),
        );
        let points: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let x: f64 = rng.gen_range(6.0..12.0);
                let noise = rng.gen_range(-0.2..0.2) * (1.0 + 0.1 * x);
                (x, b0 + b1 * x + b2 * x * x + noise)
            })
            .collect();
        let fit = regress_quadratic(&points).unwrap();
        let (beta, ses) = common::naive_quadratic_ols(&points);
        for i in 0..3 {
            coef_gap = coef_gap.max((fit.coefficients[i] - beta[i]).abs());
            se_gap = se_gap.max((fit.robust_ses[i] - ses[i]).abs());
        }
    }
    let exact: Vec<(f64, f64)> = (0..20)
        .map(|i| {
            let x = i as f64 * 0.5 - 3.0;
            (x, 2.0 + 3.0 * x - 0.5 * x * x)
        })
        .collect();
    let fit = regress_quadratic(&exact).unwrap();
    let exact_gap = fit
        .coefficients
        .iter()
        .zip([2.0, 3.0, -0.5])
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    report(
        10,
        "quadratic OLS with HC1 errors matches the oracle",
        coef_gap <= 1e-8 && se_gap <= 1e-8 && exact_gap <= 1e-10,
        format!(
            "coefficient gap {coef_gap:.2e}, SE gap {se_gap:.2e}, exact-fit gap {exact_gap:.2e}"
        ),
    );
}

/// Forty countries with odds ratio 8; richer countries have fewer women at
/// work and much smaller female-typed categories.
fn income_gradient_spec() -> SimulationSpec {
    let countries = (0..40)
        .map(|i| {
            let x = 6.5 + 5.0 * i as f64 / 39.0;
            let t = (x - 6.5) / 5.0;
            CountrySpec {
                country: format!("C{i:02}"),
                year: 2010,
                workers: 100_000,
                female_share: 0.45 - 0.10 * t,
                odds_ratio: 8.0,
                gdp_pc: x.exp(),
                profile: Profile::Even {
                    female_categories: 6,
                    male_categories: 10,
                    female_row_share: 0.79 - 0.60 * t + 0.25 * t * t,
                },
            }
        })
        .collect();
    SimulationSpec {
        countries,
        ineligible_share: 0.0,
        random_weights: false,
    }
}

#[test]
fn criterion_11_synthetic_cross_section() {
    let start = Instant::now();
    let sim = simulate_countries(&income_gradient_spec(), 11, Execution::default()).unwrap();
    let agg = ingest_workers(
        sim.records.iter().cloned().map(Ok),
        &FilterSettings::default(),
    )
    .unwrap();
    let results = compute_results(
        &agg.tables,
        &[Scenario::uniform()],
        &IpfSettings::default(),
        Execution::default(),
    )
    .unwrap();
    let joined = join_covariates(results, &sim.covariates).unwrap();
    assert!(joined.unmatched.is_empty());

    let crude: Vec<(f64, f64)> = joined
        .matched
        .iter()
        .map(|r| (r.log_gdp_pc.unwrap(), r.crude_id))
        .collect();
    let sid: Vec<(f64, f64)> = joined
        .matched
        .iter()
        .map(|r| (r.log_gdp_pc.unwrap(), r.sid("half").unwrap()))
        .collect();
    let crude_fit = regress_quadratic(&crude).unwrap();
    let sid_fit = regress_quadratic(&sid).unwrap();
    let t = crude_fit.t_stats();
    let secs = start.elapsed().as_secs_f64();
    let pass = joined.matched.len() == 40
        && t[1].abs() > 5.0
        && t[2].abs() > 5.0
        && sid_fit.coefficients[1].abs() < 0.02
        && sid_fit.coefficients[2].abs() < 0.02
        && secs < 30.0;
    report(
        11,
        "crude ID tracks income, SID does not",
        pass,
        format!(
            "crude b1={:.4} (t={:.1}) b2={:.5} (t={:.1}); SID b1={:.5} b2={:.6}; {secs:.1}s",
            crude_fit.coefficients[1],
            t[1],
            crude_fit.coefficients[2],
            t[2],
            sid_fit.coefficients[1],
            sid_fit.coefficients[2]
        ),
    );
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/figures.csv")
}

fn figures_bytes() -> Vec<u8> {
    let mut tables = BTreeMap::new();
    tables.insert(
        PopulationKey::new("AAA", 2000),
        OccupationTable::from_triples([
            ("1", 20.0, 5.0),
            ("2", 30.0, 10.0),
            ("3", 40.0, 60.0),
            ("4", 10.0, 125.0),
        ])
        .unwrap(),
    );
    tables.insert(
        PopulationKey::new("BBB", 2005),
        OccupationTable::from_triples([("C", 15.0, 70.0), ("D", 360.0, 120.0)]).unwrap(),
    );
    let covariates = vec![
        occseg::pipeline::covariates::CountryCovariates {
            country: "AAA".into(),
            year: 2000,
            gdp_pc: 1500.0,
        },
        occseg::pipeline::covariates::CountryCovariates {
            country: "BBB".into(),
            year: 2005,
            gdp_pc: 42000.0,
        },
    ];
    let results = compute_results(
        &tables,
        &[Scenario::uniform()],
        &IpfSettings::default(),
        Execution::default(),
    )
    .unwrap();
    let joined = join_covariates(results, &covariates).unwrap();
    let mut out = Vec::new();
    write_figure_data(&mut out, &joined.matched).unwrap();
    out
}

#[test]
fn criterion_12_determinism() {
    let spec = SimulationSpec::from_json(
        r#"{"countries": [
            {"country": "UGA", "year": 2002, "workers": 5000, "female_share": 0.45,
             "odds_ratio": 6.0, "gdp_pc": 1200.0,
             "profile": {"kind": "lumpy", "lumpy_share": 0.6, "lumpy_group": "female",
                         "female_categories": 2, "male_categories": 6, "female_row_share": 0.7}},
            {"country": "CHE", "year": 2000, "workers": 5000, "female_share": 0.42,
             "odds_ratio": 6.0, "gdp_pc": 45000.0,
             "profile": {"kind": "even", "female_categories": 5, "male_categories": 8,
                         "female_row_share": 0.43}}
        ], "ineligible_share": 0.1, "random_weights": true}"#,
    )
    .unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, exec) in dirs
        .iter()
        .zip([Execution::Sequential, Execution::default()])
    {
        let sim = simulate_countries(&spec, 42, exec).unwrap();
        write_simulation(dir.path(), &sim).unwrap();
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    let sim_same = [WORKERS_FILE, COVARIATES_FILE, TRUTH_FILE]
        .iter()
        .all(|f| read(&dirs[0], f) == read(&dirs[1], f));

    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        std::fs::write(golden_path(), figures_bytes()).unwrap();
    }
    let (first, second) = (figures_bytes(), figures_bytes());
    let golden = std::fs::read(golden_path()).unwrap_or_default();
    let figures_same = first == second && first == golden;
    let parsed = read_points(&first[..], &Measure::Crude).unwrap();

    report(
        12,
        "seeded simulation and figure data are byte-stable",
        sim_same && figures_same && parsed.len() == 2,
        format!("simulation identical: {sim_same}, figures match golden: {figures_same}"),
    );
}
