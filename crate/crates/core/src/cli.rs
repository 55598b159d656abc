//! Command-line front end. Every command writes a header line with the
//! resolved configuration, an optional summary line, then fixed-order rows.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::{SumsOfTwoSquaresTable, MAX_LIMIT};
use crate::cache::{read_cache, write_cache};
use crate::ergostat;
use crate::error::{Error, Result};
use crate::greens::{eval_greens, mixed_element, pure_momentum_element, MatrixElement};
use crate::spectral::{spectrum, CouplingConfig, SecularEngine, SpectralPoint, DEFAULT_DELTA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const MIN_TABLE: u64 = 1 << 16;
const SPECTRAL_FACTOR: u64 = 64;
const ELEMENT_TABLE: u64 = 1 << 20;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "pointscatter",
    version,
    about = "Point scatterer on the square torus"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (standard output when absent). For `sieve`, the cache file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Table cache: read when present, written after a fresh build otherwise.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Worker threads (logical cores when absent).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    /// Seed for sampled reports.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Override the sieve limit chosen for the command.
    #[arg(long, global = true)]
    pub table_limit: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Weak,
    Strong,
}

#[derive(Args, Debug, Serialize)]
pub struct Coupling {
    /// Coupling parameter in (-pi, pi).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    #[arg(long, value_enum, default_value_t = Mode::Weak)]
    pub mode: Mode,
    /// Window exponent in (0, 1), strong mode only.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
pub enum Command {
    /// Build the table up to --limit and write it to --out.
    Sieve {
        #[arg(long)]
        limit: u64,
    },
    /// New eigenvalues in every gap up to --limit.
    Spectrum {
        #[arg(long)]
        limit: u64,
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Momentum matrix elements at one lambda or along the spectrum.
    Element {
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, value_parser = parse_int_pair, allow_hyphen_values = true)]
        zeta: Option<(i64, i64)>,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        lambda: Option<f64>,
        #[arg(long, requires = "limit")]
        all: bool,
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1e-7)]
        element_tol: f64,
    },
    /// Samples of F(lambda) - rhs on [--from, --to]; empty at poles.
    Secular {
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        samples: usize,
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Arithmetic statistics of S.
    Stats {
        #[command(subcommand)]
        which: Stats,
    },
    /// The nine-property subsequence of S(x).
    Filter {
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        x: u64,
    },
    /// Pure momentum elements along the spectrum with dyadic medians.
    Decay {
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long)]
        x: u64,
        /// Sampled elements above 10^4.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        phi: f64,
        /// Restrict medians to the filtered subsequence as well.
        #[arg(long)]
        s1: bool,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        element_tol: f64,
    },
    /// Lattice-sum Green's function on an N x N grid of the torus.
    Greens {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long, value_parser = parse_real_pair, default_value = "0,0", allow_hyphen_values = true)]
        x0: (f64, f64),
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase", tag = "statistic")]
pub enum Stats {
    Pairs {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 100)]
        hmax: u64,
    },
    Moments {
        #[arg(long)]
        limit: u64,
    },
    Wkl2 {
        #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
        k: i64,
        #[arg(long)]
        x: u64,
    },
    Landau {
        #[arg(long)]
        limit: u64,
    },
    Hecke {
        #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
        k: i64,
        #[arg(long)]
        x: u64,
    },
    Gaps {
        #[arg(long)]
        x: u64,
    },
}

fn split_pair(s: &str) -> std::result::Result<(&str, &str), String> {
    s.split_once(',')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| format!("expected A,B but got '{s}'"))
}

/// Parse `A,B` with integer components.
pub fn parse_int_pair(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = split_pair(s)?;
    let p = |t: &str| t.parse::<i64>().map_err(|e| format!("'{t}': {e}"));
    Ok((p(a)?, p(b)?))
}

/// Parse `A,B` with finite real components.
pub fn parse_real_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = split_pair(s)?;
    let p = |t: &str| match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("'{t}' is not finite ({v})")),
        Err(e) => Err(format!("'{t}': {e}")),
    };
    Ok((p(a)?, p(b)?))
}

fn flag(name: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("--{name}: {msg}"))
}

fn check_tol(name: &str, tol: f64) -> Result<()> {
    if !(tol > 1e-14 && tol < 1.0) {
        return Err(flag(name, format!("{tol} must lie in (1e-14, 1)")));
    }
    Ok(())
}

fn check_phi(phi: f64) -> Result<()> {
    if !(phi.abs() < PI) {
        return Err(flag(
            "phi",
            format!("{phi} must lie strictly inside (-pi, pi)"),
        ));
    }
    Ok(())
}

fn coupling_config(c: &Coupling) -> Result<CouplingConfig> {
    check_phi(c.phi)?;
    match (c.mode, c.delta) {
        (Mode::Weak, Some(_)) => Err(flag("delta", "only applies to --mode strong")),
        (Mode::Weak, None) => CouplingConfig::weak(c.phi),
        (Mode::Strong, d) => {
            let d = d.unwrap_or(DEFAULT_DELTA);
            if !(d > 0.0 && d < 1.0) {
                return Err(flag("delta", format!("{d} must lie in (0, 1)")));
            }
            CouplingConfig::strong(c.phi, d)
        }
    }
}

fn spectral_table_size(top: f64) -> u64 {
    let n = top.max(1.0).ceil() as u64 + 1;
    n.next_power_of_two()
        .saturating_mul(SPECTRAL_FACTOR)
        .clamp(MIN_TABLE, MAX_LIMIT)
}

fn load_table(cli: &Cli, needed: u64) -> Result<SumsOfTwoSquaresTable> {
    load_table_with_default(cli, needed, needed)
}

/// Table of limit `--table-limit`, else `default`; never below `needed`.
fn load_table_with_default(cli: &Cli, needed: u64, default: u64) -> Result<SumsOfTwoSquaresTable> {
    let limit = match cli.table_limit {
        Some(l) if l < needed => {
            return Err(flag(
                "table-limit",
                format!("{l} is below the {needed} this command needs"),
            ));
        }
        Some(l) => l,
        None => default.max(needed),
    };
    if limit > MAX_LIMIT {
        return Err(flag(
            "table-limit",
            format!("{limit} exceeds the maximum {MAX_LIMIT}"),
        ));
    }
    match &cli.cache {
        Some(path) if path.exists() => {
            let t = read_cache(path)?;
            if t.limit() < limit {
                return Err(flag(
                    "cache",
                    format!("stored limit {} is below the required {limit}", t.limit()),
                ));
            }
            Ok(t)
        }
        Some(path) => {
            let t = SumsOfTwoSquaresTable::build(limit)?;
            write_cache(&t, path)?;
            Ok(t)
        }
        None => SumsOfTwoSquaresTable::build(limit),
    }
}

fn read_profile(path: Option<&Path>) -> Result<ergostat::PropertyProfile> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| flag("profile", format!("{}: {e}", p.display())))?;
            ergostat::PropertyProfile::from_toml(&text).map_err(|e| flag("profile", e))
        }
        None => Ok(ergostat::PropertyProfile::default()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Uint(u64),
    Real(f64),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Uint(v) => v.to_string(),
            Cell::Real(v) => format!("{v:?}"),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Uint(v) => json!(v),
            Cell::Real(v) => json!(v),
            Cell::Empty => Value::Null,
        }
    }
}

/// Tabular command output.
pub struct Document {
    pub header: Value,
    pub summary: Option<Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        let enc = |v: &Value| serde_json::to_string(v).map_err(|e| Error::Config(e.to_string()));
        match format {
            Format::Csv => {
                writeln!(out, "# {}", enc(&self.header)?)?;
                if let Some(s) = &self.summary {
                    writeln!(out, "# summary {}", enc(s)?)?;
                }
                let mut w = csv::Writer::from_writer(&mut out);
                w.write_record(&self.columns).map_err(csv_error)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))
                        .map_err(csv_error)?;
                }
                w.flush()?;
            }
            Format::Jsonl => {
                writeln!(out, "{}", enc(&json!({ "header": self.header }))?)?;
                if let Some(s) = &self.summary {
                    writeln!(out, "{}", enc(&json!({ "summary": s }))?)?;
                }
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| Ok(format!("{}:{}", enc(&json!(c))?, enc(&v.json())?)))
                        .collect::<Result<_>>()?;
                    writeln!(out, "{{{}}}", fields.join(","))?;
                }
            }
        }
        Ok(out)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn header(cli: &Cli, table_limit: Option<u64>) -> Result<Value> {
    Ok(json!({
        "program": "pointscatter",
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(cli).map_err(|e| Error::Config(e.to_string()))?,
        "table_limit": table_limit,
    }))
}

fn opt(v: Option<u64>) -> Cell {
    v.map_or(Cell::Empty, Cell::Uint)
}

fn element_row(e: &MatrixElement) -> Vec<Cell> {
    vec![
        Cell::Int(e.zeta.0),
        Cell::Int(e.zeta.1),
        Cell::Int(e.k),
        Cell::Real(e.lambda),
        Cell::Real(e.value.re),
        Cell::Real(e.value.im),
        Cell::Real(e.truncation_radius),
        Cell::Real(e.tail_bound),
    ]
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()))
}

/// Execute the parsed command and produce its output.
pub fn execute(cli: &Cli) -> Result<Vec<u8>> {
    let doc = match &cli.command {
        Command::Sieve { limit } => {
            if *limit < 1 {
                return Err(flag("limit", "must be at least 1"));
            }
            let path = cli
                .out
                .as_ref()
                .ok_or_else(|| flag("out", "sieve needs an output file"))?;
            let t = load_table(cli, *limit)?;
            write_cache(&t, path)?;
            let bytes = crate::cache::encode(&t);
            Document {
                header: header(cli, Some(t.limit()))?,
                summary: None,
                columns: vec!["limit", "count", "bytes"],
                rows: vec![vec![
                    Cell::Uint(t.limit()),
                    Cell::Uint(t.count()),
                    Cell::Uint(bytes.len() as u64),
                ]],
            }
        }
        Command::Spectrum {
            limit,
            coupling,
            tol,
        } => {
            check_tol("tol", *tol)?;
            let cfg = coupling_config(coupling)?;
            let t = load_table_with_default(
                cli,
                (*limit + 1).max(1024),
                spectral_table_size(*limit as f64),
            )?;
            let engine = SecularEngine::new(&t)?;
            let spec = spectrum(&engine, &cfg, *limit, *tol)?;
            let mut rows: Vec<(u64, Vec<Cell>)> = spec
                .records
                .iter()
                .map(|r| {
                    (
                        r.m,
                        vec![
                            Cell::Uint(r.m),
                            opt(r.m_minus),
                            Cell::Real(r.lambda_m),
                            Cell::Real(r.residual),
                            Cell::Uint(r.iterations as u64),
                        ],
                    )
                })
                .collect();
            for &m in &spec.rootless {
                let left = if m == 0 { None } else { t.prev_member(m - 1) };
                rows.push((
                    m,
                    vec![
                        Cell::Uint(m),
                        opt(left),
                        Cell::Empty,
                        Cell::Empty,
                        Cell::Empty,
                    ],
                ));
            }
            rows.sort_by_key(|r| r.0);
            Document {
                header: header(cli, Some(t.limit()))?,
                summary: Some(json!({ "coupling": to_value(&cfg)?, "rootless": spec.rootless })),
                columns: vec!["m", "m_minus", "lambda", "residual", "iterations"],
                rows: rows.into_iter().map(|r| r.1).collect(),
            }
        }
        Command::Element {
            k,
            zeta,
            lambda,
            all,
            limit,
            phi,
            tol,
            element_tol,
        } => {
            check_tol("tol", *tol)?;
            check_tol("element-tol", *element_tol)?;
            check_phi(*phi)?;
            let zeta = zeta.unwrap_or((0, 0));
            let top = match (lambda, all, limit) {
                (Some(l), _, _) if !l.is_finite() => return Err(flag("lambda", "must be finite")),
                (Some(l), _, _) => l.abs(),
                (None, true, Some(n)) => *n as f64,
                _ => return Err(flag("lambda", "give --lambda X or --all --limit N")),
            };
            let t = load_table_with_default(
                cli,
                (top as u64 + 1).max(1024),
                spectral_table_size(top).max(ELEMENT_TABLE),
            )?;
            let engine = SecularEngine::new(&t)?;
            let points: Vec<SpectralPoint> = match lambda {
                Some(l) => vec![SpectralPoint::new(*l)],
                None => spectrum(
                    &engine,
                    &CouplingConfig::weak(*phi)?,
                    limit.unwrap_or(0),
                    *tol,
                )?
                .records
                .iter()
                .map(|r| r.point())
                .collect(),
            };
            let rows = points
                .iter()
                .map(|&p| {
                    let e = if zeta == (0, 0) {
                        pure_momentum_element(&engine, p, *k, *element_tol)?
                    } else {
                        mixed_element(p, zeta, *k, *element_tol)?
                    };
                    Ok(element_row(&e))
                })
                .collect::<Result<Vec<_>>>()?;
            Document {
                header: header(cli, Some(t.limit()))?,
                summary: None,
                columns: vec![
                    "zeta_x", "zeta_y", "k", "lambda", "re", "im", "trunc", "tail",
                ],
                rows,
            }
        }
        Command::Secular {
            from,
            to,
            samples,
            coupling,
            tol,
        } => {
            check_tol("tol", *tol)?;
            if !(from.is_finite() && to.is_finite() && from < to) {
                return Err(flag(
                    "to",
                    format!("need finite --from < --to, got {from} and {to}"),
                ));
            }
            if *samples < 2 {
                return Err(flag("samples", "must be at least 2"));
            }
            let cfg = coupling_config(coupling)?;
            let top = from.abs().max(to.abs());
            let t =
                load_table_with_default(cli, (top as u64 + 1).max(1024), spectral_table_size(top))?;
            let engine = SecularEngine::new(&t)?;
            let mut rows = Vec::with_capacity(*samples);
            for i in 0..*samples {
                let lam = from + (to - from) * i as f64 / (*samples - 1) as f64;
                let v = match engine.evaluate(&cfg, SpectralPoint::new(lam), *tol) {
                    Ok((ev, _)) => Cell::Real(ev.value - cfg.rhs),
                    Err(Error::PoleProximity { .. }) => Cell::Empty,
                    Err(e) => return Err(e),
                };
                rows.push(vec![Cell::Real(lam), v]);
            }
            Document {
                header: header(cli, Some(t.limit()))?,
                summary: Some(json!({ "coupling": to_value(&cfg)? })),
                columns: vec!["lambda", "secular"],
                rows,
            }
        }
        Command::Stats { which } => stats(cli, which)?,
        Command::Filter { profile, x } => {
            let profile = read_profile(profile.as_deref())?;
            if *x < 16 {
                return Err(flag("x", "must be at least 16"));
            }
            let t = load_table(cli, x.saturating_mul(2))?;
            let rep = ergostat::filter_s1(&t, &profile, *x)?;
            let removed: serde_json::Map<String, Value> = ergostat::PROPERTY_NAMES
                .iter()
                .zip(rep.removed_per_property)
                .map(|(n, c)| (n.to_string(), json!(c)))
                .collect();
            Document {
                header: header(cli, Some(t.limit()))?,
                summary: Some(json!({
                    "x": rep.x,
                    "profile": to_value(&rep.profile)?,
                    "survivors": rep.survivors.len(),
                    "below_min": rep.below_min,
                    "removed_per_property": removed,
                    "density": rep.density,
                })),
                columns: vec!["m"],
                rows: rep.survivors.iter().map(|&m| vec![Cell::Uint(m)]).collect(),
            }
        }
        Command::Decay {
            k,
            x,
            budget,
            phi,
            s1,
            profile,
            tol,
            element_tol,
        } => {
            check_tol("tol", *tol)?;
            check_tol("element-tol", *element_tol)?;
            check_phi(*phi)?;
            if *x < 2 {
                return Err(flag("x", "must be at least 2"));
            }
            let restrict = *s1 || profile.is_some();
            let profile = read_profile(profile.as_deref())?;
            let mut needed = (x + 1)
                .next_power_of_two()
                .saturating_mul(8)
                .clamp(MIN_TABLE, MAX_LIMIT);
            if restrict {
                needed = needed.max(x.saturating_mul(2));
            }
            let t = load_table_with_default(
                cli,
                if restrict { x.saturating_mul(2) } else { *x }.max(1024),
                needed,
            )?;
            let engine = SecularEngine::new(&t)?;
            let sample = ergostat::decay_sample(&t, *x, *budget, cli.seed)?;
            let recs = ergostat::solve_gaps(&engine, &CouplingConfig::weak(*phi)?, &sample, *tol)?;
            let survivors = if restrict {
                Some(ergostat::filter_s1(&t, &profile, (*x).max(16))?.survivors)
            } else {
                None
            };
            let rep =
                ergostat::decay_report(&engine, &recs, *k, *element_tol, survivors.as_deref())?;
            Document {
                header: header(cli, Some(t.limit()))?,
                summary: Some(json!({
                    "k": rep.k,
                    "blocks": to_value(&rep.blocks)?,
                    "survivor_constant": rep.survivor_constant,
                    "note": rep.note,
                })),
                columns: vec!["m", "lambda", "value", "tail"],
                rows: rep
                    .points
                    .iter()
                    .map(|p| {
                        vec![
                            Cell::Uint(p.m),
                            Cell::Real(p.lambda),
                            Cell::Real(p.value),
                            Cell::Real(p.tail_bound),
                        ]
                    })
                    .collect(),
            }
        }
        Command::Greens {
            lambda,
            grid,
            radius,
            x0,
        } => {
            if !lambda.is_finite() {
                return Err(flag("lambda", "must be finite"));
            }
            if *grid == 0 || *grid > 4096 {
                return Err(flag("grid", "must lie in [1, 4096]"));
            }
            if !(radius.is_finite() && *radius >= 0.0 && *radius <= 1e4) {
                return Err(flag("radius", "must lie in [0, 1e4]"));
            }
            let p = SpectralPoint::new(*lambda);
            let step = 2.0 * PI / *grid as f64;
            let mut rows = Vec::with_capacity(grid * grid);
            for i in 0..*grid {
                for j in 0..*grid {
                    let x = (i as f64 * step, j as f64 * step);
                    let (re, im) = match eval_greens(p, x, *x0, *radius) {
                        Ok(g) => (Cell::Real(g.value), Cell::Real(g.imaginary)),
                        Err(Error::Domain(_)) => (Cell::Empty, Cell::Empty),
                        Err(e) => return Err(e),
                    };
                    rows.push(vec![Cell::Real(x.0), Cell::Real(x.1), re, im]);
                }
            }
            Document {
                header: header(cli, None)?,
                summary: None,
                columns: vec!["x", "y", "re", "im"],
                rows,
            }
        }
    };
    doc.render(cli.format)
}

fn stats(cli: &Cli, which: &Stats) -> Result<Document> {
    let doc =
        |t: &SumsOfTwoSquaresTable, summary: Option<Value>, columns, rows| -> Result<Document> {
            Ok(Document {
                header: header(cli, Some(t.limit()))?,
                summary,
                columns,
                rows,
            })
        };
    match which {
        Stats::Pairs { x, hmax } => {
            if *hmax == 0 {
                return Err(flag("hmax", "must be at least 1"));
            }
            let t = load_table(cli, x.saturating_add(*hmax).max(1024))?;
            let r = ergostat::pair_correlation(&t, *x, *hmax)?;
            let rows = (0..r.counts.len())
                .map(|i| {
                    vec![
                        Cell::Uint(i as u64 + 1),
                        Cell::Uint(r.counts[i]),
                        Cell::Real(r.c_values[i]),
                        Cell::Real(r.normalized[i]),
                    ]
                })
                .collect();
            let max = r.normalized.iter().copied().fold(0.0, f64::max);
            let summary =
                json!({ "x": r.x, "max_normalized": max, "recount_agrees": r.recount_agrees });
            doc(
                &t,
                Some(summary),
                vec!["h", "count", "c", "normalized"],
                rows,
            )
        }
        Stats::Moments { limit } => {
            let t = load_table(cli, *limit)?;
            let r = ergostat::moments_omega1(&t)?;
            let rows = r
                .checkpoints
                .iter()
                .map(|c| {
                    vec![
                        Cell::Uint(c.x),
                        Cell::Uint(c.count),
                        Cell::Real(c.mean_omega1),
                        Cell::Real(c.second_moment_omega1),
                        Cell::Real(c.normal_order),
                        Cell::Real(c.landau_ratio),
                    ]
                })
                .collect();
            doc(
                &t,
                None,
                vec![
                    "x",
                    "count",
                    "mean",
                    "second_moment",
                    "half_loglog",
                    "landau_ratio",
                ],
                rows,
            )
        }
        Stats::Wkl2 { k, x } => {
            let t = load_table(cli, (*x).max(1))?;
            let l2 = ergostat::wk_l2(&t, *k, *x)?;
            let tails = ergostat::wk_tail_report(&t, *k, *x, &[5.0, 10.0, 20.0])?;
            let rows = tails
                .iter()
                .map(|r| {
                    vec![
                        Cell::Real(r.threshold),
                        Cell::Real(r.fraction),
                        Cell::Real(r.chebyshev_bound),
                    ]
                })
                .collect();
            doc(
                &t,
                Some(json!({ "k": k, "x": x, "wk_l2": l2 })),
                vec!["threshold", "fraction", "chebyshev_bound"],
                rows,
            )
        }
        Stats::Landau { limit } => {
            let t = load_table(cli, *limit)?;
            let r = ergostat::landau_report(&t)?;
            let rows = r
                .checkpoints
                .iter()
                .map(|c| vec![Cell::Uint(c.x), Cell::Uint(c.count), Cell::Real(c.ratio)])
                .collect();
            doc(
                &t,
                Some(json!({ "extrapolated": r.extrapolated })),
                vec!["x", "count", "ratio"],
                rows,
            )
        }
        Stats::Hecke { k, x } => {
            if *k == 0 || k % 4 != 0 {
                return Err(flag("k", format!("{k} must be a non-zero multiple of 4")));
            }
            let t = load_table(cli, (*x).max(5))?;
            let r = ergostat::theta_equidist(&t, *k, *x)?;
            let rows = vec![vec![
                Cell::Int(r.k),
                Cell::Uint(r.x),
                Cell::Uint(r.primes),
                Cell::Real(r.mean),
                Cell::Real(r.mean_square),
            ]];
            doc(
                &t,
                None,
                vec!["k", "x", "primes", "mean", "mean_square"],
                rows,
            )
        }
        Stats::Gaps { x } => {
            let t = load_table(cli, x.saturating_mul(2).max(2048))?;
            let r = ergostat::gap_stats(&t, *x)?;
            let rows = r
                .checkpoints
                .iter()
                .map(|c| {
                    vec![
                        Cell::Uint(c.x),
                        Cell::Uint(c.gaps),
                        Cell::Real(c.mean_gap),
                        Cell::Uint(c.median),
                        Cell::Uint(c.q90),
                        Cell::Uint(c.q99),
                        Cell::Uint(c.max_gap),
                        Cell::Uint(c.max_second_gap),
                    ]
                })
                .collect();
            let summary = json!({ "histogram": r.histogram });
            doc(
                &t,
                Some(summary),
                vec![
                    "x",
                    "gaps",
                    "mean",
                    "median",
                    "q90",
                    "q99",
                    "max",
                    "max_second",
                ],
                rows,
            )
        }
    }
}

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

/// Parse `args`, run, and write the output. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(flag("threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| flag("threads", e))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    let written = result.and_then(|bytes| match (&cli.command, &cli.out) {
        (Command::Sieve { .. }, _) | (_, None) => stdout.write_all(&bytes).map_err(Error::from),
        (_, Some(path)) => std::fs::write(path, bytes).map_err(Error::from),
    });
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
