//! `gpc`: rates, divisibility verdicts, region scans, classical simulation
//! and oracle checks for mixtures of generalized Pauli semigroups.

mod model;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gpc_core::classical::{identity_start, markov_generator_for_rate, ClassicalGenerator};
use gpc_core::divisibility::{classify_points, RegionPoint};
use gpc_core::fixtures::{catalogue, fixture, FixtureParams, NAMES};
use gpc_core::oracle::verify_fixture;
use gpc_core::{build_mubs, classify, integrate, scan_region, MixtureSpec, RegionMode, TimeGrid};
use serde::Serialize;

use model::{parse_grid, parse_vector, ModelArgs};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Oracle(String),
}

impl CliError {
    pub fn validation(field: &str, why: impl fmt::Display) -> Self {
        CliError::Validation(format!("{field}: {why}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Oracle(m) => write!(f, "oracle failure: {m}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gpc",
    version,
    about = "Generalized Pauli channel mixtures: rates, divisibility, classical realizations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Cp,
    PSufficient,
    PNecessary,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlavorArg {
    Markov,
    Mixture,
    Ratedep,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Table of decoherence rates gamma_a(t) and mu_a(t)
    Rates {
        #[command(flatten)]
        model: ModelArgs,
        /// Time grid start:stop:points[:log]
        #[arg(long, default_value = "0:5:101")]
        t: String,
        /// Reuse the t column of a CSV written by this tool
        #[arg(long)]
        from_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Divisibility verdict (JSON)
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        /// Time grid; defaults to 200 log points on [1e-3/r, 1e3/r]
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan the d = 3 simplex of mixing weights
    Region {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 3.0)]
        r: f64,
        /// Points per simplex edge
        #[arg(long, default_value_t = 51)]
        grid: usize,
        #[arg(long, value_enum, default_value = "all")]
        mode: Mode,
        /// Re-classify the x1..x4 rows of a CSV written by this tool
        #[arg(long)]
        from_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a classical rate equation for (p_0, ..., p_{d+1})
    SimulateClassical {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "markov")]
        flavor: FlavorArg,
        #[arg(long, default_value = "0:5:101")]
        t: String,
        /// Initial distribution; defaults to (1, 0, ..., 0)
        #[arg(long)]
        p0: Option<String>,
        #[arg(long)]
        from_file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle suite (JSON report); exit code 2 if any check fails
    Verify {
        /// Restrict to one fixture
        #[arg(long)]
        fixture: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List named fixtures
    Fixtures {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Dump the mutually unbiased bases (JSON)
    Mubs {
        #[arg(long)]
        d: usize,
    },
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::validation("--out", format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

/// Numeric columns of a CSV by header name.
fn read_columns(path: &Path, names: &[String]) -> Result<Vec<Vec<f64>>, CliError> {
    let bad =
        |why: String| CliError::validation("--from-file", format!("{}: {why}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let idx = names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| bad(format!("missing column '{n}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = idx
            .iter()
            .map(|&i| {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad number '{}'", &rec[i])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn time_grid(spec: &str, from_file: &Option<PathBuf>) -> Result<TimeGrid, CliError> {
    match from_file {
        Some(path) => {
            let t = read_columns(path, &["t".to_string()])?
                .into_iter()
                .map(|r| r[0])
                .collect();
            TimeGrid::from_points(t).map_err(|e| CliError::validation("--from-file", e))
        }
        None => parse_grid(spec).map_err(|e| CliError::validation("--t", e)),
    }
}

fn labels(prefix: &str, range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn run_rates(spec: &MixtureSpec, grid: &TimeGrid, format: Format) -> Result<String, CliError> {
    let rows = grid
        .points()
        .iter()
        .map(|&t| spec.rates_at(t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::validation("--t", e))?;
    Ok(match format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let n = spec.dim() + 1;
            let mut header = vec!["t".to_string()];
            header.extend(labels("gamma_", 1..=n));
            header.extend(labels("mu_", 1..=n));
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|rv| {
                    let mut row = vec![float(rv.t)];
                    row.extend(rv.gamma.iter().map(|v| float(*v)));
                    row.extend(rv.mu.iter().map(|v| float(*v)));
                    row
                })
                .collect();
            csv_string(&header, &body)
        }
    })
}

fn run_region(points: &[RegionPoint], mode: Mode, format: Format) -> String {
    let keep: Vec<&RegionPoint> = points
        .iter()
        .filter(|p| match mode {
            Mode::All => true,
            Mode::Cp => p.is_member(RegionMode::Cp),
            Mode::PSufficient => p.is_member(RegionMode::PSufficient),
            Mode::PNecessary => p.is_member(RegionMode::PNecessary),
        })
        .collect();
    match format {
        Format::Json => to_json(&keep),
        Format::Csv => {
            let mut header = labels("x", 1..=4);
            header.extend(labels("xp", 1..=3));
            header.extend(["cp", "p_suf", "p_nec"].map(String::from));
            let body: Vec<Vec<String>> = keep
                .iter()
                .map(|p| {
                    let mut row: Vec<String> = p.x.iter().map(|v| float(*v)).collect();
                    row.extend(p.coords[..3].iter().map(|v| float(*v)));
                    row.extend([p.cp, p.p_sufficient, p.p_necessary].map(|b| b.to_string()));
                    row
                })
                .collect();
            csv_string(&header, &body)
        }
    }
}

fn run_classical(
    spec: MixtureSpec,
    flavor: FlavorArg,
    grid: &TimeGrid,
    p0: Option<Vec<f64>>,
    format: Format,
) -> Result<String, CliError> {
    let d = spec.dim();
    let gen = match flavor {
        FlavorArg::Markov => {
            let r = spec.common_rate().ok_or_else(|| {
                CliError::validation("--flavor", "markov needs a linear weight w = rt")
            })?;
            markov_generator_for_rate(spec.x(), d, r).map_err(|e| CliError::validation("--x", e))?
        }
        FlavorArg::Mixture => ClassicalGenerator::mixture(spec),
        FlavorArg::Ratedep => ClassicalGenerator::rate_dependent(spec),
    };
    let p0 = p0.unwrap_or_else(|| identity_start(d));
    let traj = integrate(&gen, &p0, grid).map_err(|e| CliError::validation("--p0", e))?;
    Ok(match format {
        Format::Json => to_json(&traj),
        Format::Csv => {
            let mut header = vec!["t".to_string()];
            header.extend(labels("p_", 0..=d + 1));
            header.push("flavor".into());
            let tag = traj.flavor.tag().to_string();
            let body: Vec<Vec<String>> = traj
                .t_grid
                .iter()
                .zip(&traj.p)
                .map(|(t, p)| {
                    let mut row = vec![float(*t)];
                    row.extend(p.iter().map(|v| float(*v)));
                    row.push(tag.clone());
                    row
                })
                .collect();
            csv_string(&header, &body)
        }
    })
}

fn run_verify(only: &Option<String>, seed: u64) -> Result<(String, bool), CliError> {
    let names: Vec<&str> = match only {
        Some(n) => vec![n.as_str()],
        None => NAMES.to_vec(),
    };
    let mut records = Vec::new();
    for name in names {
        let spec = fixture(name, FixtureParams::default())
            .map_err(|e| CliError::validation("--fixture", e))?;
        let horizon = 5.0 / spec.common_rate().unwrap_or(1.0);
        let recs = verify_fixture(name, &spec, horizon, seed)
            .map_err(|e| CliError::Oracle(e.to_string()))?;
        records.extend(recs);
    }
    let ok = records.iter().all(|r| r.pass);
    Ok((to_json(&records), ok))
}

#[derive(Serialize)]
struct MubDump {
    dim: usize,
    /// bases[b][k][j] = [re, im] of component j of vector k
    bases: Vec<Vec<Vec<[f64; 2]>>>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Rates {
            model,
            t,
            from_file,
            format,
            out,
        } => {
            let spec = model.build()?;
            let grid = time_grid(&t, &from_file)?;
            emit(&out, &run_rates(&spec, &grid, format)?)
        }
        Command::Classify { model, t, out } => {
            let spec = model.build()?;
            let grid = match (&t, spec.common_rate()) {
                (Some(s), _) => parse_grid(s).map_err(|e| CliError::validation("--t", e))?,
                (None, Some(r)) => TimeGrid::certification(r),
                (None, None) => TimeGrid::log(1e-3, 1e3, 200).expect("valid default grid"),
            };
            let verdict = classify(&spec, &grid).map_err(|e| CliError::validation("--t", e))?;
            emit(&out, &to_json(&verdict))
        }
        Command::Region {
            d,
            r,
            grid,
            mode,
            from_file,
            format,
            out,
        } => {
            let points = match &from_file {
                Some(path) => {
                    let xs = read_columns(path, &labels("x", 1..=4))?;
                    classify_points(&xs, d, r)
                        .map_err(|e| CliError::validation("--from-file", e))?
                }
                None => {
                    scan_region(d, grid, r)
                        .map_err(|e| CliError::validation("--grid/--d", e))?
                        .points
                }
            };
            emit(&out, &run_region(&points, mode, format))
        }
        Command::SimulateClassical {
            model,
            flavor,
            t,
            p0,
            from_file,
            format,
            out,
        } => {
            let spec = model.build()?;
            let grid = time_grid(&t, &from_file)?;
            let p0 = p0
                .map(|s| parse_vector(&s).map_err(|e| CliError::validation("--p0", e)))
                .transpose()?;
            emit(&out, &run_classical(spec, flavor, &grid, p0, format)?)
        }
        Command::Verify { fixture, seed, out } => {
            let (report, ok) = run_verify(&fixture, seed)?;
            emit(&out, &report)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Oracle("one or more checks failed".into()))
            }
        }
        Command::Fixtures { format } => {
            let list = catalogue();
            let text = match format {
                Format::Json => to_json(&list),
                Format::Csv => {
                    let header = ["name", "default_dim", "description"].map(String::from);
                    let body: Vec<Vec<String>> = list
                        .iter()
                        .map(|f| {
                            vec![
                                f.name.to_string(),
                                f.default_dim.to_string(),
                                f.description.to_string(),
                            ]
                        })
                        .collect();
                    csv_string(&header, &body)
                }
            };
            emit(&None, &text)
        }
        Command::Mubs { d } => {
            let m = build_mubs(d).map_err(|e| CliError::validation("--d", e))?;
            let dump = MubDump {
                dim: d,
                bases: (0..m.num_bases())
                    .map(|b| {
                        m.basis(b)
                            .iter()
                            .map(|v| v.iter().map(|c| [c.re, c.im]).collect())
                            .collect()
                    })
                    .collect(),
            };
            emit(&None, &to_json(&dump))
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("GPC_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::validation("GPC_THREADS", "must be a positive integer"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation("GPC_THREADS", e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpc: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(1),
                CliError::Oracle(_) => ExitCode::from(2),
            }
        }
    }
}
