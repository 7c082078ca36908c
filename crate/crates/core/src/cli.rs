//! Command-line front end.
//!
//! Exit codes: `0` success, `1` a verification failed, `2` a verification was
//! vacuous only, `64` usage error, `65` domain error, `74` I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::algebra::{
    boundary_prediction, casimir_eigenvalue, radicand_sign_scan, z_boundaries, AlgebraParams,
    RepresentationTable, Spin,
};
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, rational_to_f64, Field, FieldKind};
use crate::fock::{FockSpace, Operator};
use crate::realizations::{
    g2_casimir_consistent, g_constant, product_recurrence, Family, Realization, Recipe,
};
use crate::similarity::{s1_closed_form, s1_recurrence, DiagonalTransform};
use crate::surd::Surd;
use crate::verify::{
    default_grid, exit_code, reports_to_text, sweep, verify_realization, FieldChoice, GridPoint,
    VerificationReport, VerifyConfig,
};

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DOMAIN: i32 = 65;
pub const EXIT_IO: i32 = 74;

/// Environment variable capping sweep worker threads.
pub const THREADS_ENV: &str = "HIGGSALG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "higgsalg", version, about = "Boson realizations of the Higgs algebra on truncated Fock space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Construct a realization and write it as JSON.
    Build(BuildArgs),
    /// Construct and verify a realization.
    Verify(VerifyArgs),
    /// Verify a grid of parameter points.
    Sweep(SweepArgs),
    /// Tables: representation elements, recurrence products, transforms.
    Table(TableArgs),
    /// Re-serialize a stored realization.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Hp,
    Dyson,
    Villain,
    GenericUnitary,
    GenericDyson,
}

impl KindArg {
    fn family(self) -> Family {
        match self {
            KindArg::Hp => Family::Hp,
            KindArg::Dyson => Family::Dyson,
            KindArg::Villain => Family::Villain,
            KindArg::GenericUnitary => Family::GenericUnitary,
            KindArg::GenericDyson => Family::GenericDyson,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    /// Exact for shift kinds, float for Villain kinds.
    Auto,
    Exact,
    Float,
}

impl FieldArg {
    fn resolve(self, family: Family) -> FieldChoice {
        match self {
            FieldArg::Exact => FieldChoice::Exact,
            FieldArg::Float => FieldChoice::Float,
            FieldArg::Auto if family == Family::Villain => FieldChoice::Float,
            FieldArg::Auto => FieldChoice::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableContent {
    /// Matrix elements and admissibility for n = 0..2j.
    Representation,
    /// F(n) from the difference equation.
    Product,
    /// S₁ from its recurrence.
    S1,
    /// S₁ from the Pochhammer closed form.
    S1Closed,
    /// Z± and the sign scan against the boundary rule.
    Boundaries,
    /// Casimir eigenvalue and Villain constants.
    Constants,
}

fn rational(s: &str) -> std::result::Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args, Clone)]
pub struct PointArgs {
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub c1: BigRational,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub c3: BigRational,
    /// Twice the spin, 2j.
    #[arg(long)]
    pub j2: u32,
}

impl PointArgs {
    fn params(&self) -> AlgebraParams {
        AlgebraParams::new(self.c1.clone(), self.c3.clone())
    }

    fn spin(&self) -> Spin {
        Spin::from_twice(self.j2)
    }
}

#[derive(Debug, Args, Clone)]
pub struct RealizationArgs {
    #[arg(long, value_enum, default_value = "hp")]
    pub kind: KindArg,
    /// Mode shift of the ladder part.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Villain form (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub form: u8,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub field: FieldArg,
}

impl RealizationArgs {
    fn recipe(&self) -> Recipe {
        Recipe {
            family: self.kind.family(),
            k: self.k,
            form: self.form,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub realization: RealizationArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ConfigArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance_coefficient: f64,
    /// Comma-separated dimensions for Villain convergence ladders.
    #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
    pub ladder: Vec<usize>,
    /// ⟨0|S|0⟩ for similarity checks.
    #[arg(long, value_parser = rational, default_value = "1")]
    pub q0: BigRational,
}

impl ConfigArgs {
    fn config(&self) -> VerifyConfig {
        VerifyConfig {
            tolerance_coefficient: self.tolerance_coefficient,
            ladder: self.ladder.clone(),
            q0: self.q0.clone(),
            threads: std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok()),
            ..VerifyConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub realization: RealizationArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON grid file `[{"c1": "p/q", "c3": "p/q", "j2": int}, …]`; the
    /// default 7×6 grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Comma-separated `kind:n`, where `n` is `k` (or the form for villain).
    #[arg(long, default_value = "hp:1,dyson:1")]
    pub kinds: String,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, value_enum, default_value = "auto")]
    pub field: FieldArg,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value = "representation")]
    pub content: TableContent,
    /// Step for `product`.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Last label for `product`, `s1` and `s1-closed`.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, value_parser = rational, default_value = "1")]
    pub q0: BigRational,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Realization JSON written by `build`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_DOMAIN,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Build(a) => build(&a).map(|_| 0),
        Command::Verify(a) => verify(&a),
        Command::Sweep(a) => run_sweep(&a),
        Command::Table(a) => table(&a).map(|_| 0),
        Command::Export(a) => export(&a).map(|_| 0),
    }
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn pretty(value: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// A realization over either field.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyRealization {
    Exact(Realization<Surd>),
    Float(Realization<Complex64>),
}

impl AnyRealization {
    pub fn build(recipe: &Recipe, space: FockSpace, point: &GridPoint, field: FieldChoice) -> Result<Self> {
        Ok(match field {
            FieldChoice::Exact => AnyRealization::Exact(recipe.build(space, &point.params, point.spin)?),
            FieldChoice::Float => AnyRealization::Float(recipe.build(space, &point.params, point.spin)?),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let field = value
            .pointer("/jp/field")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("realization has no jp.field".into()))?;
        match field {
            "rational" => Ok(AnyRealization::Exact(Realization::from_json(value)?)),
            "complex" => Ok(AnyRealization::Float(Realization::from_json(value)?)),
            other => Err(Error::Parse(format!("unknown field {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            AnyRealization::Exact(r) => r.to_json(),
            AnyRealization::Float(r) => r.to_json(),
        }
    }

    pub fn verify(&self, config: &VerifyConfig) -> VerificationReport {
        match self {
            AnyRealization::Exact(r) => verify_realization(r, config),
            AnyRealization::Float(r) => verify_realization(r, config),
        }
    }

    pub fn summary(&self) -> Result<String> {
        match self {
            AnyRealization::Exact(r) => r.summary(),
            AnyRealization::Float(r) => r.summary(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        match self {
            AnyRealization::Exact(r) => operators_csv(r),
            AnyRealization::Float(r) => operators_csv(r),
        }
    }
}

/// Non-zero entries as `operator,row,col,value`; complex values are written
/// as two columns `re,im`.
fn operators_csv<T: Field>(r: &Realization<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match T::KIND {
        FieldKind::Rational => w.write_record(["operator", "row", "col", "value"])?,
        FieldKind::Complex => w.write_record(["operator", "row", "col", "re", "im"])?,
    }
    for (name, op) in [("jp", &r.jp), ("jm", &r.jm), ("j3", &r.j3)] {
        write_entries(&mut w, name, op)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn write_entries<T: Field, W: Write>(w: &mut csv::Writer<W>, name: &str, op: &Operator<T>) -> Result<()> {
    for row in 0..op.dim() {
        for col in 0..op.dim() {
            let v = op.get(row, col);
            if v.is_zero() {
                continue;
            }
            let mut record = vec![name.to_string(), row.to_string(), col.to_string()];
            match v.to_json() {
                Value::Array(parts) => record.extend(parts.iter().map(|p| match p {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })),
                other => record.push(other.to_string()),
            }
            w.write_record(&record)?;
        }
    }
    Ok(())
}

fn build_requested(a: &RealizationArgs) -> Result<AnyRealization> {
    let recipe = a.recipe();
    let point = GridPoint {
        params: a.point.params(),
        spin: a.point.spin(),
    };
    let space = FockSpace::new(a.dim)?;
    AnyRealization::build(&recipe, space, &point, a.field.resolve(recipe.family))
}

fn build(a: &BuildArgs) -> Result<()> {
    let r = build_requested(&a.realization)?;
    emit(a.output.as_deref(), &pretty(&r.to_json())?)
}

fn render_reports(reports: &[VerificationReport], format: Format) -> Result<String> {
    match format {
        Format::Json => pretty(&serde_json::to_value(reports)?),
        Format::Text => Ok(reports_to_text(reports)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["index", "kind", "k", "c1", "c3", "j2", "dim", "field", "check", "residual", "tolerance", "block", "status"])?;
            for (i, r) in reports.iter().enumerate() {
                let s = &r.realization_summary;
                let head = [i.to_string(), s.kind.clone(), s.k.to_string(), s.c1.clone(), s.c3.clone(), s.j2.to_string(), s.dim.to_string(), s.field.clone()];
                if let Some(e) = &r.error {
                    let mut rec = head.to_vec();
                    rec.extend(["error".into(), String::new(), String::new(), String::new(), e.clone()]);
                    w.write_record(&rec)?;
                }
                for c in &r.checks {
                    let mut rec = head.to_vec();
                    rec.extend([
                        c.name.clone(),
                        format!("{:e}", c.residual),
                        format!("{:e}", c.tolerance),
                        c.block_size.to_string(),
                        c.status.as_str().to_string(),
                    ]);
                    w.write_record(&rec)?;
                }
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
    }
}

fn verify(a: &VerifyArgs) -> Result<i32> {
    let r = build_requested(&a.realization)?;
    let reports = vec![r.verify(&a.config.config())];
    emit(a.output.as_deref(), &render_reports(&reports, a.format)?)?;
    Ok(exit_code(&reports))
}

/// Parses `kind:n,…` into recipes.
pub fn parse_kinds(s: &str) -> Result<Vec<Recipe>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|piece| {
            let piece = piece.trim();
            let (name, n) = match piece.split_once(':') {
                Some((name, n)) => (
                    name,
                    n.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad kind spec {piece:?}")))?,
                ),
                None => (piece, 1),
            };
            let family = Family::parse(name)?;
            Ok(if family == Family::Villain {
                Recipe::villain(u8::try_from(n).map_err(|_| Error::InvalidForm(u8::MAX))?)
            } else {
                Recipe::new(family, n)
            })
        })
        .collect()
}

/// Parses the grid schema `[{"c1": "p/q", "c3": "p/q", "j2": int}, …]`;
/// integer `c1`/`c3` are accepted as JSON numbers too.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>> {
    let value: Value = serde_json::from_str(text)?;
    let entries = value
        .as_array()
        .ok_or_else(|| Error::Parse("grid must be a JSON list".into()))?;
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let coefficient = |name: &str| -> Result<BigRational> {
                match e.get(name) {
                    Some(Value::String(s)) => parse_rational(s),
                    Some(Value::Number(n)) if n.is_i64() => Ok(crate::field::int(n.as_i64().unwrap_or(0))),
                    _ => Err(Error::Parse(format!("grid entry {i}: {name:?} must be \"p/q\" or an integer"))),
                }
            };
            let j2 = e
                .get("j2")
                .and_then(Value::as_u64)
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| Error::Parse(format!("grid entry {i}: \"j2\" must be a non-negative integer")))?;
            Ok(GridPoint {
                params: AlgebraParams::new(coefficient("c1")?, coefficient("c3")?),
                spin: Spin::from_twice(j2),
            })
        })
        .collect()
}

fn run_sweep(a: &SweepArgs) -> Result<i32> {
    let grid = match &a.grid {
        Some(path) => parse_grid(&fs::read_to_string(path)?)?,
        None => default_grid(),
    };
    let recipes = parse_kinds(&a.kinds)?;
    let config = a.config.config();
    let mut reports = Vec::new();
    // the field is resolved per recipe so that villain kinds run in float
    // under `auto`; order stays grid-major
    let fields: Vec<FieldChoice> = recipes.iter().map(|r| a.field.resolve(r.family)).collect();
    if fields.iter().all(|f| *f == fields[0]) || recipes.is_empty() {
        let field = fields.first().copied().unwrap_or(FieldChoice::Exact);
        reports = sweep(&grid, &recipes, a.dim, field, &config);
    } else {
        let per_recipe: Vec<Vec<VerificationReport>> = recipes
            .iter()
            .zip(&fields)
            .map(|(r, f)| sweep(&grid, std::slice::from_ref(r), a.dim, *f, &config))
            .collect();
        for i in 0..grid.len() {
            for column in &per_recipe {
                reports.push(column[i].clone());
            }
        }
    }
    emit(a.output.as_deref(), &render_reports(&reports, a.format)?)?;
    Ok(exit_code(&reports))
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>, comments: &[String]) -> Result<String> {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(out)
}

fn point_comments(params: &AlgebraParams, spin: Spin) -> Vec<String> {
    vec![
        format!("C1={}", format_rational(&params.c1)),
        format!("C3={}", format_rational(&params.c3)),
        format!("j={spin}"),
    ]
}

fn transform_table<T: Field>(t: &DiagonalTransform<T>, format: Format, comments: &[String]) -> Result<String> {
    match format {
        Format::Json => pretty(&t.to_json()),
        _ => {
            let rows = t
                .entries
                .iter()
                .zip(&t.mask)
                .enumerate()
                .map(|(n, (e, ok))| {
                    vec![
                        n.to_string(),
                        format!("{}", e.to_complex().re),
                        u8::from(*ok).to_string(),
                    ]
                })
                .collect();
            csv_string(&["n", "s", "valid"], rows, comments)
        }
    }
}

fn table(a: &TableArgs) -> Result<()> {
    let params = a.point.params();
    let spin = a.point.spin();
    let comments = point_comments(&params, spin);
    let text = match a.content {
        TableContent::Representation => {
            let table = RepresentationTable::new(&params, spin);
            match a.format {
                Format::Json => pretty(&json!({
                    "c1": format_rational(&params.c1),
                    "c3": format_rational(&params.c3),
                    "j2": spin.twice(),
                    "chain": table.chain,
                    "rows": table.rows(),
                }))?,
                _ => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    String::from_utf8(buf).expect("csv output is UTF-8")
                }
            }
        }
        TableContent::Product => {
            let seq = product_recurrence(a.k, &params, spin, a.n_max)?;
            match a.format {
                Format::Json => pretty(&json!({
                    "k": a.k,
                    "values": seq.values.iter().map(format_rational).collect::<Vec<_>>(),
                }))?,
                _ => {
                    let rows = seq
                        .values
                        .iter()
                        .enumerate()
                        .map(|(n, v)| vec![n.to_string(), format_rational(v), format!("{}", rational_to_f64(v))])
                        .collect();
                    let mut c = comments.clone();
                    c.push(format!("k={}", a.k));
                    csv_string(&["n", "F", "F_float"], rows, &c)?
                }
            }
        }
        TableContent::S1 => {
            let t: DiagonalTransform<Surd> = s1_recurrence(&params, spin, &a.q0, a.n_max)?;
            transform_table(&t, a.format, &comments)?
        }
        TableContent::S1Closed => {
            let t = s1_closed_form(&params, spin, &a.q0, a.n_max)?;
            transform_table(&t, a.format, &comments)?
        }
        TableContent::Boundaries => {
            let z = z_boundaries(&params, spin)?;
            let scan = radicand_sign_scan(&params, spin);
            let predictions: Vec<Option<bool>> = (0..scan.len())
                .map(|n| z.as_ref().and_then(|z| boundary_prediction(&params, spin, z, n)))
                .collect();
            match a.format {
                Format::Json => pretty(&json!({
                    "discriminant": format_rational(&crate::algebra::ZBoundaries::discriminant(&params, spin)?),
                    "z_minus": z.as_ref().map(|z| z.minus),
                    "z_plus": z.as_ref().map(|z| z.plus),
                    "scan": scan,
                    "prediction": predictions,
                }))?,
                _ => {
                    let mut c = comments.clone();
                    match &z {
                        Some(z) => c.push(format!("Z-={} Z+={}", z.minus, z.plus)),
                        None => c.push("Z complex".to_string()),
                    }
                    let rows = scan
                        .iter()
                        .zip(&predictions)
                        .enumerate()
                        .map(|(n, (s, p))| {
                            vec![
                                n.to_string(),
                                u8::from(*s).to_string(),
                                p.map_or_else(|| "root".to_string(), |b| u8::from(b).to_string()),
                            ]
                        })
                        .collect();
                    csv_string(&["n", "scan", "prediction"], rows, &c)?
                }
            }
        }
        TableContent::Constants => {
            let fmt_g = |r: Result<f64>| r.map_or_else(|e| e.to_string(), |g| format!("{g}"));
            let casimir = casimir_eigenvalue(&params, spin);
            let rows = vec![
                vec!["casimir".to_string(), format_rational(&casimir)],
                vec!["g1".to_string(), fmt_g(g_constant(&params, spin, 1))],
                vec!["g2_printed".to_string(), fmt_g(g_constant(&params, spin, 2))],
                vec!["g2".to_string(), format!("{}", g2_casimir_consistent(&params, spin))],
            ];
            match a.format {
                Format::Json => pretty(&Value::Object(
                    rows.into_iter().map(|r| (r[0].clone(), Value::String(r[1].clone()))).collect(),
                ))?,
                _ => csv_string(&["name", "value"], rows, &comments)?,
            }
        }
    };
    emit(a.output.as_deref(), &text)
}

fn export(a: &ExportArgs) -> Result<()> {
    let value: Value = serde_json::from_str(&fs::read_to_string(&a.input)?)?;
    let r = AnyRealization::from_json(&value)?;
    let text = match a.format {
        Format::Json => pretty(&r.to_json())?,
        Format::Csv => r.to_csv()?,
        Format::Text => r.summary()?,
    };
    emit(a.output.as_deref(), &text)
}
