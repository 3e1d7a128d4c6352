use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use occseg::classify::{basic_classification, OccupationTable};
use occseg::fmt::Precision;
use occseg::ipf::{IpfSettings, TargetMarginals};
use occseg::metrics::{decompose_basic, decompose_log, scenario_average, Direction, Scenario};
use occseg::pipeline::covariates::read_covariates;
use occseg::pipeline::figures::{read_points, write_figure_data, Measure};
use occseg::pipeline::occupations::{read_occupation_tables, write_occupation_tables};
use occseg::pipeline::regression::regress_quadratic;
use occseg::pipeline::results::{compute_results, join_covariates, write_results, CountryResult};
use occseg::pipeline::simulate::{simulate_countries, write_simulation, SimulationSpec};
use occseg::pipeline::workers::{ingest_workers, read_workers, FilterSettings};
use occseg::pipeline::PopulationKey;
use occseg::tables::dissimilarity;
use occseg::{Error, Execution};

#[derive(Parser)]
#[command(
    name = "occseg",
    version,
    about = "Crude and margin-free gender segregation indices"
)]
struct Cli {
    /// Print numbers with 17 significant digits instead of 6.
    #[arg(long, global = true)]
    full_precision: bool,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a workers CSV into per-population occupation tables.
    Aggregate {
        workers: PathBuf,
        /// Keep every record regardless of age, employment, group quarters
        /// or armed-forces status.
        #[arg(long)]
        no_filters: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Crude, conventional, standardized and marginal-matching indices.
    Indices {
        tables: PathBuf,
        #[arg(long)]
        covariates: Option<PathBuf>,
        #[command(flatten)]
        scenarios: ScenarioArgs,
        #[command(flatten)]
        ipf: IpfArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split the ID gap between two populations into segregation and
    /// marginal components.
    Decompose {
        tables: PathBuf,
        /// First population, `COUNTRY:YEAR` or `COUNTRY` when unambiguous.
        #[arg(long)]
        a: String,
        /// Second population.
        #[arg(long)]
        b: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::AToB)]
        direction: DirectionArg,
        #[arg(long, value_enum, default_value_t = FormArg::Additive)]
        form: FormArg,
        #[command(flatten)]
        scenarios: ScenarioArgs,
        #[command(flatten)]
        ipf: IpfArgs,
    },
    /// Quadratic regression of an index on log GDP per capita.
    Regress {
        /// Indices or figures CSV with a `log_gdp_pc` column.
        data: PathBuf,
        /// `crude` or `sid:<scenario>`.
        #[arg(long, default_value = "crude")]
        measure: Measure,
    },
    /// Generate synthetic worker records from a JSON spec.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Output directory for workers.csv, covariates.csv and truth.csv.
        #[arg(long, default_value = "simulated")]
        out: PathBuf,
    },
    /// Plot-ready CSV: marginals, crude ID and SIDs against log GDP.
    Figures {
        tables: PathBuf,
        #[arg(long)]
        covariates: PathBuf,
        #[command(flatten)]
        scenarios: ScenarioArgs,
        #[command(flatten)]
        ipf: IpfArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Extra target marginals `name=rf,cf`: share of workers in female
    /// categories, then female share of the workforce. Repeatable.
    #[arg(long = "scenario", value_name = "NAME=RF,CF")]
    scenarios: Vec<String>,

    /// Use the uniform target plus the built-in low/middle/high income
    /// marginals.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

#[derive(Args)]
struct IpfArgs {
    #[arg(long, default_value_t = IpfSettings::default().tolerance)]
    ipf_tol: f64,
    #[arg(long, default_value_t = IpfSettings::default().max_iterations)]
    ipf_max_iter: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Income,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    AToB,
    BToA,
    Neutral,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Additive,
    Log,
}

impl IpfArgs {
    fn settings(&self) -> occseg::Result<IpfSettings> {
        let s = IpfSettings {
            tolerance: self.ipf_tol,
            max_iterations: self.ipf_max_iter,
            ..IpfSettings::default()
        };
        s.validate()?;
        Ok(s)
    }
}

fn parse_scenario(s: &str) -> occseg::Result<Scenario> {
    let bad = || Error::InvalidTargets(format!("expected `name=rf,cf`, got `{s}`"));
    let (name, shares) = s.split_once('=').ok_or_else(bad)?;
    let (rf, cf) = shares.split_once(',').ok_or_else(bad)?;
    let rf: f64 = rf.trim().parse().map_err(|_| bad())?;
    let cf: f64 = cf.trim().parse().map_err(|_| bad())?;
    if name.trim().is_empty() {
        return Err(bad());
    }
    Ok(Scenario::new(
        name.trim(),
        TargetMarginals::from_shares(rf, cf)?,
    ))
}

impl ScenarioArgs {
    fn resolve(&self) -> occseg::Result<Vec<Scenario>> {
        let mut out = match self.preset {
            Some(Preset::Income) => Scenario::income_presets(),
            None => vec![Scenario::uniform()],
        };
        for s in &self.scenarios {
            let s = parse_scenario(s)?;
            if out.iter().any(|o| o.name == s.name) {
                return Err(Error::InvalidTargets(format!(
                    "scenario `{}` given twice",
                    s.name
                )));
            }
            out.push(s);
        }
        Ok(out)
    }
}

fn open(path: &Path) -> occseg::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn output(path: &Option<PathBuf>) -> occseg::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_tables(path: &Path) -> occseg::Result<BTreeMap<PopulationKey, OccupationTable>> {
    read_occupation_tables(open(path)?)
}

fn find_population<'a>(
    tables: &'a BTreeMap<PopulationKey, OccupationTable>,
    id: &str,
) -> occseg::Result<(&'a PopulationKey, &'a OccupationTable)> {
    let matches: Vec<_> = match id.split_once(':') {
        Some((c, y)) => tables
            .iter()
            .filter(|(k, _)| k.country == c && y.parse() == Ok(k.year))
            .collect(),
        None => tables.iter().filter(|(k, _)| k.country == id).collect(),
    };
    match matches.as_slice() {
        [one] => Ok(*one),
        [] => Err(Error::InvalidTable(format!("no population `{id}`"))),
        _ => Err(Error::InvalidTable(format!(
            "`{id}` is ambiguous; use COUNTRY:YEAR"
        ))),
    }
}

fn results_with_covariates(
    tables: &Path,
    covariates: Option<&Path>,
    scenarios: &ScenarioArgs,
    ipf: &IpfArgs,
    exec: Execution,
) -> occseg::Result<Vec<CountryResult>> {
    let tables = load_tables(tables)?;
    let results = compute_results(&tables, &scenarios.resolve()?, &ipf.settings()?, exec)?;
    let Some(path) = covariates else {
        return Ok(results);
    };
    let joined = join_covariates(results, &read_covariates(open(path)?)?)?;
    for key in &joined.unmatched {
        eprintln!("warning: no covariates for {key}; population left out");
    }
    Ok(joined.matched)
}

fn run(cli: Cli) -> occseg::Result<()> {
    let precision = if cli.full_precision {
        Precision::Full
    } else {
        Precision::Short
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let p = |x: f64| precision.format(x);

    match cli.command {
        Command::Aggregate {
            workers,
            no_filters,
            out,
        } => {
            let filters = if no_filters {
                FilterSettings::none()
            } else {
                FilterSettings::default()
            };
            let agg = ingest_workers(read_workers(open(&workers)?)?, &filters)?;
            eprintln!(
                "{} populations, {} records excluded by filters",
                agg.tables.len(),
                agg.excluded_records
            );
            for (key, dropped) in agg.dropped_rows() {
                if dropped > 0 {
                    eprintln!("{key}: {dropped} empty categories dropped");
                }
            }
            let mut w = output(&out)?;
            write_occupation_tables(&mut w, &agg.tables, precision)?;
            w.flush()?;
        }
        Command::Indices {
            tables,
            covariates,
            scenarios,
            ipf,
            out,
        } => {
            let results =
                results_with_covariates(&tables, covariates.as_deref(), &scenarios, &ipf, exec)?;
            let mut w = output(&out)?;
            write_results(&mut w, &results, precision)?;
            w.flush()?;
        }
        Command::Decompose {
            tables,
            a,
            b,
            direction,
            form,
            scenarios,
            ipf,
        } => {
            let tables = load_tables(&tables)?;
            let (ka, ta) = find_population(&tables, &a)?;
            let (kb, tb) = find_population(&tables, &b)?;
            let (ba, bb) = (
                basic_classification(ta).basic,
                basic_classification(tb).basic,
            );
            let settings = ipf.settings()?;
            let mut w = BufWriter::new(io::stdout().lock());
            writeln!(w, "quantity,value")?;
            writeln!(w, "a,{ka}")?;
            writeln!(w, "b,{kb}")?;
            writeln!(w, "id_a,{}", p(dissimilarity(&ba)?))?;
            writeln!(w, "id_b,{}", p(dissimilarity(&bb)?))?;
            let d = match (form, direction) {
                (FormArg::Log, _) => decompose_log(&ba, &bb)?,
                (FormArg::Additive, DirectionArg::Neutral) => {
                    let avg = scenario_average(ta, tb, &scenarios.resolve()?, &settings, exec)?;
                    for o in &avg.scenarios {
                        let name = &o.scenario.name;
                        writeln!(w, "sid_a[{name}],{}", p(o.sid_a))?;
                        writeln!(w, "sid_b[{name}],{}", p(o.sid_b))?;
                        writeln!(
                            w,
                            "segregation[{name}],{}",
                            p(o.decomposition.segregation_component)
                        )?;
                        writeln!(
                            w,
                            "marginal[{name}],{}",
                            p(o.decomposition.marginal_component)
                        )?;
                    }
                    if let (Some(s), Some(m)) =
                        (avg.mean_segregation_share, avg.mean_marginal_share)
                    {
                        writeln!(w, "mean_segregation_share,{}", p(s))?;
                        writeln!(w, "mean_marginal_share,{}", p(m))?;
                    }
                    writeln!(w, "mean_sid_a,{}", p(avg.mean_sid_pair.0))?;
                    writeln!(w, "mean_sid_b,{}", p(avg.mean_sid_pair.1))?;
                    w.flush()?;
                    return Ok(());
                }
                (FormArg::Additive, DirectionArg::AToB) => decompose_basic(
                    &ba,
                    &bb,
                    Direction::AtoB,
                    &TargetMarginals::uniform(),
                    &settings,
                )?,
                (FormArg::Additive, DirectionArg::BToA) => decompose_basic(
                    &ba,
                    &bb,
                    Direction::BtoA,
                    &TargetMarginals::uniform(),
                    &settings,
                )?,
            };
            writeln!(w, "total,{}", p(d.total))?;
            writeln!(w, "segregation,{}", p(d.segregation_component))?;
            writeln!(w, "marginal,{}", p(d.marginal_component))?;
            if matches!(form, FormArg::Log) {
                writeln!(w, "residual,{}", p(d.residual()))?;
            }
            if let Some((s, m)) = d.shares() {
                writeln!(w, "segregation_share,{}", p(s))?;
                writeln!(w, "marginal_share,{}", p(m))?;
            }
            w.flush()?;
        }
        Command::Regress { data, measure } => {
            let points = read_points(open(&data)?, &measure)?;
            let fit = regress_quadratic(&points)?;
            let t = fit.t_stats();
            let mut w = BufWriter::new(io::stdout().lock());
            writeln!(w, "term,coefficient,robust_se,t")?;
            for (i, term) in ["constant", "log_gdp_pc", "log_gdp_pc_sq"]
                .iter()
                .enumerate()
            {
                writeln!(
                    w,
                    "{term},{},{},{}",
                    p(fit.coefficients[i]),
                    p(fit.robust_ses[i]),
                    p(t[i])
                )?;
            }
            writeln!(w, "# n={} r_squared={}", fit.n, p(fit.r_squared))?;
            w.flush()?;
        }
        Command::Simulate { spec, seed, out } => {
            let text = std::fs::read_to_string(&spec)?;
            let sim = simulate_countries(&SimulationSpec::from_json(&text)?, seed, exec)?;
            write_simulation(&out, &sim)?;
            eprintln!(
                "{} records for {} populations written to {}",
                sim.records.len(),
                sim.truth.len(),
                out.display()
            );
        }
        Command::Figures {
            tables,
            covariates,
            scenarios,
            ipf,
            out,
        } => {
            let results =
                results_with_covariates(&tables, Some(&covariates), &scenarios, &ipf, exec)?;
            let mut w = output(&out)?;
            write_figure_data(&mut w, &results)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
