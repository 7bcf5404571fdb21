//! The `padic-dirac` command line.
//!
//! Every subcommand reads an optional JSON config (missing fields take their
//! defaults, unknown fields are rejected) and writes CSV or JSON. JSON output
//! embeds the resolved config. CSV output is accompanied by a metadata record
//! holding the config: a `<out>.meta.json` file next to `--out`, or a single
//! `# meta: {...}` line on stderr when writing to stdout.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use padic_dirac::causality::{self, fmt_f64, CausalityConfig, Mode, ReportFormat};
use padic_dirac::padic::{format_rational, FieldContext, PAdicScalar, PAdicVec3};
use padic_dirac::spinor::{lambda_a_u, spinor_to_pairs, EnergySign, FrequencyMagnitude, Spinor4};
use padic_dirac::state::SpinorWaveletState;
use padic_dirac::verify::{self, VerifyOptions, VerifyRow, SUITES};
use padic_dirac::wavelet::{expand_ball_indicator, WaveletIndex, WaveletIndex1D, WaveletIndex3D};
use padic_dirac::{Error, Execution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

const MAX_SPECTRUM_SPAN: i64 = 40;
const MAX_EXPANSION_TERMS: u128 = 2_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "padic-dirac",
    version,
    about = "Simulator for the free Dirac equation over the p-adic numbers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON config file. Omitted fields take their defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliMode {
    #[value(name = "unitary_exact")]
    UnitaryExact,
    #[value(name = "paper_literal")]
    PaperLiteral,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::UnitaryExact => Mode::UnitaryExact,
            CliMode::PaperLiteral => Mode::PaperLiteral,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the seeded invariant suites; exits 1 if any invariant fails.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        /// Replaces every floating-point tolerance.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Restrict to a suite (repeatable).
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
    },
    /// Tabulate λ, a₊ and a₋ over a cube of wavelet scales.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Wavelet coefficients of a ball indicator, with the exact omitted tail.
    Expand {
        #[command(flatten)]
        common: Common,
        #[arg(long = "r-max", allow_negative_numbers = true)]
        r_max: Option<i64>,
    },
    /// Sample a freely evolved state at terminating points.
    Evolve {
        #[command(flatten)]
        common: Common,
    },
    /// Transition probabilities between distant balls; exits 1 unless all
    /// are positive.
    Causality {
        #[command(flatten)]
        common: Common,
        #[arg(long = "r-max", allow_negative_numbers = true)]
        r_max: Option<i64>,
        #[arg(long, value_enum)]
        mode: Option<CliMode>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn execute<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                EXIT_ERROR
            } else {
                let _ = stdout.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match run(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Result of a command before it is written out.
struct Output {
    body: Vec<u8>,
    /// Metadata for CSV output; `None` for JSON, which embeds it.
    meta: Option<Value>,
    ok: bool,
}

fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<i32> {
    let (common, output) = match cli.command {
        Command::Verify {
            common,
            seed,
            tolerance,
            suites,
        } => {
            let out = cmd_verify(&common, seed, tolerance, suites)?;
            (common, out)
        }
        Command::Spectrum { common } => {
            let out = cmd_spectrum(&common)?;
            (common, out)
        }
        Command::Expand { common, r_max } => {
            let out = cmd_expand(&common, r_max)?;
            (common, out)
        }
        Command::Evolve { common } => {
            let out = cmd_evolve(&common)?;
            (common, out)
        }
        Command::Causality { common, r_max, mode } => {
            let out = cmd_causality(&common, r_max, mode)?;
            (common, out)
        }
    };
    match &common.out {
        Some(path) => {
            fs::write(path, &output.body).with_context(|| format!("writing {}", path.display()))?;
            if let Some(meta) = &output.meta {
                let side = meta_path(path);
                fs::write(&side, pretty(meta)).with_context(|| format!("writing {}", side.display()))?;
            }
        }
        None => {
            if let Some(meta) = &output.meta {
                writeln!(stderr, "# meta: {}", serde_json::to_string(meta)?)?;
            }
            stdout.write_all(&output.body)?;
            stdout.flush()?;
        }
    }
    Ok(if output.ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// `<out>.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values serialize");
    text.push('\n');
    text.into_bytes()
}

// ---------------------------------------------------------------------------
// config loading

struct Source {
    label: String,
    text: String,
}

impl Source {
    fn read(path: Option<&Path>) -> anyhow::Result<Source> {
        match path {
            Some(p) => Ok(Source {
                label: p.display().to_string(),
                text: fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?,
            }),
            None => Ok(Source {
                label: "<defaults>".into(),
                text: "{}".into(),
            }),
        }
    }

    fn parse<T: DeserializeOwned>(&self) -> anyhow::Result<T> {
        serde_json::from_str(&self.text).map_err(|e| {
            let msg = e.to_string();
            let msg = msg
                .rsplit_once(" at line ")
                .map_or(msg.as_str(), |(m, _)| m)
                .to_string();
            anyhow!("{}:{}:{}: {}", self.label, e.line(), e.column(), msg)
        })
    }

    /// Error pointing at the line of `"field"` in the config, or noting that
    /// the default was used.
    fn field_error(&self, field: &str, reason: impl std::fmt::Display) -> anyhow::Error {
        let key = field.split(['[', '.']).next().unwrap_or(field);
        match locate_key(&self.text, key) {
            Some((line, col)) => anyhow!("{}:{}:{}: {}: {}", self.label, line, col, field, reason),
            None => anyhow!("{}: {} (default): {}", self.label, field, reason),
        }
    }

    fn core_error(&self, e: Error) -> anyhow::Error {
        match e {
            Error::Config { field, reason } => self.field_error(&field, reason),
            e @ (Error::NotPrime(_) | Error::PrimeOutOfRange(_)) => self.field_error("p", e),
            other => anyhow!("{}: {}", self.label, other),
        }
    }
}

/// 1-based line and column of the first `"key"` followed by a colon.
fn locate_key(text: &str, key: &str) -> Option<(usize, usize)> {
    let needle = format!("\"{key}\"");
    let mut from = 0;
    while let Some(off) = text[from..].find(&needle) {
        let at = from + off;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            let line = text[..at].matches('\n').count() + 1;
            let col = at - text[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
            return Some((line, col));
        }
        from = at + needle.len();
    }
    None
}

fn context(src: &Source, p: u64) -> anyhow::Result<FieldContext> {
    FieldContext::new(p).map_err(|e| src.field_error("p", e))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> anyhow::Result<Vec<u8>> {
    w.into_inner().map_err(|e| anyhow!("flushing CSV: {}", e.error()))
}

fn render(
    format: Format,
    json_body: impl FnOnce() -> Value,
    csv_body: impl FnOnce() -> anyhow::Result<Vec<u8>>,
) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Json => Ok(pretty(&json_body())),
        Format::Csv => csv_body(),
    }
}

fn meta_for(format: Format, meta: impl FnOnce() -> Value) -> Option<Value> {
    match format {
        Format::Csv => Some(meta()),
        Format::Json => None,
    }
}

// ---------------------------------------------------------------------------
// verify

fn default_suites() -> Vec<String> {
    SUITES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
}

fn cmd_verify(
    common: &Common,
    seed: Option<u64>,
    tolerance: Option<f64>,
    suites: Vec<String>,
) -> anyhow::Result<Output> {
    let src = Source::read(common.config.as_deref())?;
    let mut cfg: VerifyConfig = src.parse()?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if tolerance.is_some() {
        cfg.tolerance = tolerance;
    }
    if !suites.is_empty() {
        cfg.suites = suites;
    }
    if let Some(t) = cfg.tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(src.field_error("tolerance", format!("must be finite and nonnegative, got {t}")));
        }
    }
    for s in &cfg.suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(src.field_error("suites", format!("unknown suite {s:?}; known: {}", SUITES.join(", "))));
        }
    }
    let opts = VerifyOptions {
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        exec: Execution::default(),
    };
    let mut rows: Vec<VerifyRow> = Vec::new();
    for s in &cfg.suites {
        rows.extend(verify::run_suite(s, &opts)?);
    }
    let all_pass = verify::all_pass(&rows);
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}: {}", r.suite, r.invariant))
        .collect();
    let body = render(
        common.format,
        || json!({ "config": cfg, "rows": rows, "all_pass": all_pass }),
        || {
            let mut w = csv_writer();
            w.write_record(["suite", "invariant", "max_deviation", "tolerance", "exact", "pass"])?;
            for r in &rows {
                w.write_record([
                    r.suite.to_string(),
                    r.invariant.to_string(),
                    fmt_f64(r.max_deviation),
                    fmt_f64(r.tolerance),
                    r.exact.to_string(),
                    r.pass.to_string(),
                ])?;
            }
            finish_csv(w)
        },
    )?;
    Ok(Output {
        body,
        meta: meta_for(
            common.format,
            || json!({ "config": cfg, "all_pass": all_pass, "failed": failed }),
        ),
        ok: all_pass,
    })
}

// ---------------------------------------------------------------------------
// spectrum

fn default_p() -> u64 {
    3
}
fn default_mass() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_p")]
    pub p: u64,
    #[serde(default = "default_mass")]
    pub m: f64,
    /// Smallest scale on each axis.
    #[serde(default = "default_spectrum_r_min")]
    pub r_min: i64,
    /// Largest scale on each axis.
    #[serde(default = "default_spectrum_r_max")]
    pub r_max: i64,
}

fn default_spectrum_r_min() -> i64 {
    -3
}
fn default_spectrum_r_max() -> i64 {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub r: [i64; 3],
    pub lambda: f64,
    pub a_plus: f64,
    pub a_minus: f64,
}

/// All `λ(p^(1-r), m)` for `r` in the cube, ascending by `λ` then `r`.
pub fn spectrum_rows(ctx: FieldContext, m: f64, r_min: i64, r_max: i64) -> Vec<SpectrumRow> {
    let mut rows = Vec::new();
    for r1 in r_min..=r_max {
        for r2 in r_min..=r_max {
            for r3 in r_min..=r_max {
                let r = [r1, r2, r3];
                let d = lambda_a_u(&FrequencyMagnitude::from_scales(ctx, r), m);
                rows.push(SpectrumRow {
                    r,
                    lambda: d.lambda,
                    a_plus: d.a_plus,
                    a_minus: d.a_minus,
                });
            }
        }
    }
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.r.cmp(&b.r)));
    rows
}

fn cmd_spectrum(common: &Common) -> anyhow::Result<Output> {
    let src = Source::read(common.config.as_deref())?;
    let cfg: SpectrumConfig = src.parse()?;
    let ctx = context(&src, cfg.p)?;
    if !(cfg.m >= 0.0 && cfg.m.is_finite()) {
        return Err(src.field_error("m", format!("mass must be finite and nonnegative, got {}", cfg.m)));
    }
    if cfg.r_min > cfg.r_max {
        return Err(src.field_error("r_min", format!("r_min = {} exceeds r_max = {}", cfg.r_min, cfg.r_max)));
    }
    if cfg.r_max - cfg.r_min > MAX_SPECTRUM_SPAN {
        return Err(src.field_error("r_max", format!("span above {MAX_SPECTRUM_SPAN} scales")));
    }
    let rows = spectrum_rows(ctx, cfg.m, cfg.r_min, cfg.r_max);
    let min_lambda = rows.first().map(|r| r.lambda).unwrap_or(f64::NAN);
    let ok = rows.iter().all(|r| r.lambda >= cfg.m);
    let body = render(
        common.format,
        || json!({ "config": cfg, "min_lambda": min_lambda, "rows": rows }),
        || {
            let mut w = csv_writer();
            w.write_record(["r1", "r2", "r3", "lambda", "a_plus", "a_minus"])?;
            for row in &rows {
                w.write_record([
                    row.r[0].to_string(),
                    row.r[1].to_string(),
                    row.r[2].to_string(),
                    fmt_f64(row.lambda),
                    fmt_f64(row.a_plus),
                    fmt_f64(row.a_minus),
                ])?;
            }
            finish_csv(w)
        },
    )?;
    Ok(Output {
        body,
        meta: meta_for(
            common.format,
            || json!({ "config": cfg, "rows": rows.len(), "min_lambda": min_lambda }),
        ),
        ok,
    })
}

// ---------------------------------------------------------------------------
// expand

fn default_dim() -> u8 {
    1
}
fn default_expand_r_max() -> i64 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandConfig {
    #[serde(default = "default_p")]
    pub p: u64,
    /// The ball is `p^R0 Z_p^dim`.
    #[serde(rename = "R0", default)]
    pub r0: i64,
    #[serde(default = "default_dim")]
    pub dim: u8,
    #[serde(default = "default_expand_r_max")]
    pub r_max: i64,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn index_columns(idx: &WaveletIndex) -> [String; 3] {
    match idx {
        WaveletIndex::One(i) => [i.r().to_string(), i.n().to_string(), i.j().to_string()],
        WaveletIndex::Three(i) => [
            join(&i.r()),
            join(&i.axes().iter().map(|a| a.n().clone()).collect::<Vec<_>>()),
            join(&i.j()),
        ],
    }
}

fn cmd_expand(common: &Common, r_max: Option<i64>) -> anyhow::Result<Output> {
    let src = Source::read(common.config.as_deref())?;
    let mut cfg: ExpandConfig = src.parse()?;
    if let Some(r) = r_max {
        cfg.r_max = r;
    }
    let ctx = context(&src, cfg.p)?;
    if cfg.dim != 1 && cfg.dim != 3 {
        return Err(src.field_error("dim", format!("must be 1 or 3, got {}", cfg.dim)));
    }
    let start = 1 - cfg.r0;
    if cfg.r_max < start {
        return Err(src.field_error("r_max", format!("need r_max >= 1 - R0 = {start}, got {}", cfg.r_max)));
    }
    let per_axis = (cfg.r_max - start + 1) as u128 * (ctx.p() as u128 - 1);
    let count = if cfg.dim == 1 { per_axis } else { per_axis.pow(3) };
    if count > MAX_EXPANSION_TERMS {
        return Err(src.field_error(
            "r_max",
            format!("{count} terms exceed the cap of {MAX_EXPANSION_TERMS}"),
        ));
    }
    let exp = expand_ball_indicator(ctx, cfg.r0, cfg.dim, cfg.r_max).map_err(|e| src.core_error(e))?;
    let retained = format_rational(&exp.retained_norm_sq);
    let tail = format_rational(&exp.truncation.tail_norm_sq);
    let body = render(
        common.format,
        || {
            let terms: Vec<Value> = exp
                .terms
                .iter()
                .map(|t| {
                    json!({
                        "index": t.index,
                        "half_exponent": t.coefficient_half_exponent,
                        "coefficient": t.coefficient,
                        "coefficient_sq": format_rational(&t.coefficient_sq),
                    })
                })
                .collect();
            json!({
                "config": cfg,
                "retained_norm_sq": retained,
                "tail_norm_sq": tail,
                "terms": terms,
            })
        },
        || {
            let mut w = csv_writer();
            w.write_record(["r", "n", "j", "half_exponent", "coefficient", "coefficient_sq"])?;
            for t in &exp.terms {
                let [r, n, j] = index_columns(&t.index);
                w.write_record([
                    r,
                    n,
                    j,
                    t.coefficient_half_exponent.to_string(),
                    fmt_f64(t.coefficient),
                    format_rational(&t.coefficient_sq),
                ])?;
            }
            finish_csv(w)
        },
    )?;
    Ok(Output {
        body,
        meta: meta_for(common.format, || {
            json!({
                "config": cfg,
                "terms": exp.terms.len(),
                "retained_norm_sq": retained,
                "tail_norm_sq": tail,
            })
        }),
        ok: true,
    })
}

// ---------------------------------------------------------------------------
// evolve

fn default_times() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}
fn default_points() -> Vec<[String; 3]> {
    [
        ["0", "0", "0"],
        ["1", "2", "0"],
        ["1/3", "0", "2"],
        ["1/9", "1/3", "1"],
        ["3", "0", "0"],
    ]
    .iter()
    .map(|p| p.map(String::from))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default = "default_p")]
    pub p: u64,
    #[serde(default = "default_mass")]
    pub m: f64,
    /// `[{index: {r, n, j}, amplitude: [[re, im] x4]}]`. Defaults to the
    /// positive-energy localized plane wave at `r = (0,0,0)`, `j = (1,1,1)`.
    #[serde(default)]
    pub state: Option<Value>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    /// Points as `"a/p^k"`, `"a/b"` or integer strings.
    #[serde(default = "default_points")]
    pub points: Vec<[String; 3]>,
}

#[derive(Debug, Clone, Serialize)]
struct Sample {
    point: PAdicVec3,
    value: [[f64; 2]; 4],
}

#[derive(Debug, Clone, Serialize)]
struct Snapshot {
    t: f64,
    norm: f64,
    samples: Vec<Sample>,
    coefficients: SpinorWaveletState,
}

fn spinor_cells(v: &Spinor4) -> Vec<String> {
    spinor_to_pairs(v)
        .iter()
        .flat_map(|[re, im]| [fmt_f64(*re), fmt_f64(*im)])
        .collect()
}

fn index_key(idx: &WaveletIndex3D) -> String {
    let n: Vec<PAdicScalar> = idx.axes().iter().map(WaveletIndex1D::n).cloned().collect();
    format!("r={} n={} j={}", join(&idx.r()), join(&n), join(&idx.j()))
}

fn cmd_evolve(common: &Common) -> anyhow::Result<Output> {
    let src = Source::read(common.config.as_deref())?;
    let mut cfg: EvolveConfig = src.parse()?;
    let ctx = context(&src, cfg.p)?;
    if !(cfg.m >= 0.0 && cfg.m.is_finite()) {
        return Err(src.field_error("m", format!("mass must be finite and nonnegative, got {}", cfg.m)));
    }
    if cfg.times.iter().any(|t| !t.is_finite()) {
        return Err(src.field_error("times", "all times must be finite"));
    }
    let state = match &cfg.state {
        Some(v) => SpinorWaveletState::from_json(ctx, v).map_err(|e| src.field_error("state", e))?,
        None => {
            let idx = WaveletIndex3D::at_origin(ctx, [0, 0, 0], [1, 1, 1])?;
            let s = SpinorWaveletState::localized_plane_wave(&idx, cfg.m, EnergySign::Pos);
            cfg.state = Some(serde_json::to_value(&s)?);
            s
        }
    };
    let mut points = Vec::with_capacity(cfg.points.len());
    for (i, p) in cfg.points.iter().enumerate() {
        let mut xs = Vec::with_capacity(3);
        for s in p {
            xs.push(PAdicScalar::parse_any(ctx, s).map_err(|e| src.field_error(&format!("points[{i}]"), e))?);
        }
        let [a, b, c]: [PAdicScalar; 3] = xs.try_into().expect("three coordinates");
        points.push(PAdicVec3::new(a, b, c));
    }
    let snapshots: Vec<Snapshot> = cfg
        .times
        .iter()
        .map(|&t| {
            let s = state.evolve(cfg.m, t);
            let samples = points
                .iter()
                .map(|x| Sample {
                    point: x.clone(),
                    value: spinor_to_pairs(&s.eval(x)),
                })
                .collect();
            Snapshot {
                t,
                norm: s.l2_norm(),
                samples,
                coefficients: s,
            }
        })
        .collect();
    let body = render(
        common.format,
        || json!({ "config": cfg, "snapshots": snapshots }),
        || {
            let mut w = csv_writer();
            let mut header = vec!["t".to_string(), "kind".into(), "key".into()];
            for k in 1..=4 {
                header.push(format!("c{k}_re"));
                header.push(format!("c{k}_im"));
            }
            w.write_record(&header)?;
            for snap in &snapshots {
                let t = fmt_f64(snap.t);
                for (x, smp) in points.iter().zip(&snap.samples) {
                    let v = Spinor4::from_iterator(smp.value.iter().map(|[re, im]| Complex64::new(*re, *im)));
                    let mut rec = vec![t.clone(), "sample".into(), join(&x.0)];
                    rec.extend(spinor_cells(&v));
                    w.write_record(&rec)?;
                }
                for (idx, amp) in snap.coefficients.terms() {
                    let mut rec = vec![t.clone(), "coefficient".into(), index_key(idx)];
                    rec.extend(spinor_cells(amp));
                    w.write_record(&rec)?;
                }
            }
            finish_csv(w)
        },
    )?;
    let norms: Vec<f64> = snapshots.iter().map(|s| s.norm).collect();
    Ok(Output {
        body,
        meta: meta_for(common.format, || json!({ "config": cfg, "norms": norms })),
        ok: true,
    })
}

// ---------------------------------------------------------------------------
// causality

fn cmd_causality(common: &Common, r_max: Option<i64>, mode: Option<CliMode>) -> anyhow::Result<Output> {
    let src = Source::read(common.config.as_deref())?;
    let mut cfg: CausalityConfig = src.parse()?;
    if let Some(r) = r_max {
        cfg.r_max = r;
    }
    if let Some(m) = mode {
        cfg.mode = m.into();
    }
    cfg.validate_for_scan().map_err(|e| src.core_error(e))?;
    if cfg.times.is_empty() {
        bail!("{}: times: at least one time is required", src.label);
    }
    let rep = causality::run_scan(&cfg).map_err(|e| src.core_error(e))?;
    let format = match common.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    let body = causality::emit_report(&rep, format);
    Ok(Output {
        body,
        meta: meta_for(common.format, || {
            json!({
                "config": rep.config,
                "distance": format_rational(&rep.distance),
                "distance_matches_formula": rep.distance_matches_formula,
                "all_positive": rep.all_positive,
                "initial": rep.initial,
                "a_priori_tail": rep.a_priori_tail,
                "certify_depth": rep.certify_depth,
                "crate_version": rep.crate_version,
            })
        }),
        ok: rep.passed(),
    })
}
