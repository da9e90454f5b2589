//! Front end of the `itoalg` binary: loads an algebra, runs one analysis
//! and prints a JSON report.
//!
//! Exit codes: 0 success, 1 I/O or parse error, 2 axiom violations,
//! 3 structural failure (no unit, noncommutative, ...).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ito_core::linalg::{CMatrix, CVector};
use ito_core::representation::{build_rep, convolve, metric_adjoint, to_matrix, FundamentalRep};
use ito_core::seminorms::{boundedness_lower_bound, check_axioms, random_elements, seminorms};
use ito_core::simulate::{canonical_form, ito_table_check, mean_increment_check, sample_paths, PathBundle, SimConfig};
use ito_core::structure::{classify_from, decompose, null_ideals, Decomposition};
use ito_core::{BuilderConfig, ItoAlgebraSpec, ItoError, SpecJson, DEFAULT_TOL};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

pub const TOL_ENV: &str = "ITOALG_TOL";

#[derive(Debug, Parser)]
#[command(name = "itoalg", version, about = "Analyse finite-dimensional Ito *-algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every axiom and list violations.
    Validate(Common),
    /// Gram matrix, Kolmogorov factor, GNS matrices and quadruples.
    Represent(Common),
    /// Split each basis element into Newton, Brownian and Levy parts.
    Decompose(Common),
    /// Classification flags.
    Classify(Common),
    /// The four seminorms of each basis element and an axiom check.
    Seminorms {
        #[command(flatten)]
        common: Common,
        /// Seed for the random sample and the boundedness search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random elements in the axiom check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Trials of the boundedness search per basis element.
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Sample noise paths and compare realized covariations with the Ito table.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        /// Horizon T.
        #[arg(long = "t", default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1.0 / 1024.0)]
        mesh: f64,
        #[arg(long, default_value_t = 200)]
        paths: usize,
        /// Basis index pairs such as `1,1;1,2`; defaults to all pairs i <= j.
        #[arg(long)]
        pairs: Option<String>,
        /// Per-path covariation table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// validate, represent, decompose, classify and seminorms in one document.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false)]
struct Input {
    /// Inline builder, e.g. '{"builder":"wiener","d":2}'.
    #[arg(long)]
    builder: Option<String>,
    /// Spec file in the sparse JSON format.
    path: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Common {
    #[command(flatten)]
    input: Input,
    /// Overrides the file tolerance and ITOALG_TOL.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Invalid(Vec<String>),
    Core(ItoError),
}

impl From<ItoError> for Failure {
    fn from(e: ItoError) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Core(e) if e.is_structural() => 3,
            Failure::Core(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(m) => m.clone(),
            Failure::Invalid(names) => format!("validation failed: {}", names.join(", ")),
            Failure::Core(e) => e.to_string(),
        }
    }
}

type Outcome = std::result::Result<Value, Failure>;

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let format = match &cli.command {
        Command::Validate(c) | Command::Represent(c) | Command::Decompose(c) | Command::Classify(c) => c.format,
        Command::Seminorms { common, .. } | Command::Simulate { common, .. } | Command::Report { common, .. } => {
            common.format
        }
    };
    let (value, code) = match execute(cli.command) {
        Ok(v) => (Some(v), 0),
        Err((report, failure)) => {
            eprintln!("error: {}", failure.message());
            (report, failure.exit_code())
        }
    };
    if let Some(v) = value {
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(render(&v, format == Format::Pretty).as_bytes());
        let _ = out.write_all(b"\n");
    }
    code
}

/// On failure, a partial report may still be printed (the validation
/// report for axiom violations).
fn execute(command: Command) -> std::result::Result<Value, (Option<Value>, Failure)> {
    let plain = |f: Failure| (None, f);
    match command {
        Command::Validate(c) => {
            let spec = load(&c).map_err(plain)?;
            let report = validation(&spec);
            match violations(&spec) {
                Some(f) => Err((Some(report), f)),
                None => Ok(report),
            }
        }
        Command::Represent(c) => {
            let spec = load_valid(&c)?;
            represent(&spec).map_err(plain)
        }
        Command::Decompose(c) => {
            let spec = load_valid(&c)?;
            decomposition(&spec).map_err(plain)
        }
        Command::Classify(c) => {
            let spec = load_valid(&c)?;
            classification(&spec).map_err(plain)
        }
        Command::Seminorms { common, seed, samples, trials } => {
            let spec = load_valid(&common)?;
            seminorm_report(&spec, seed, samples, trials).map_err(plain)
        }
        Command::Simulate { common, seed, horizon, mesh, paths, pairs, csv } => {
            let spec = load_valid(&common)?;
            let cfg = SimConfig { horizon, mesh, paths, seed };
            simulate(&spec, cfg, pairs.as_deref(), csv.as_deref()).map_err(plain)
        }
        Command::Report { common, seed } => {
            let spec = load_valid(&common)?;
            let mut doc = Map::new();
            doc.insert("validate".into(), validation(&spec));
            doc.insert("represent".into(), represent(&spec).map_err(plain)?);
            doc.insert("decompose".into(), decomposition(&spec).map_err(plain)?);
            doc.insert("classify".into(), classification(&spec).map_err(plain)?);
            doc.insert("seminorms".into(), seminorm_report(&spec, seed, 1000, 10_000).map_err(plain)?);
            Ok(Value::Object(doc))
        }
    }
}

// ---- loading ----

fn env_tol() -> std::result::Result<Option<f64>, Failure> {
    match std::env::var(TOL_ENV) {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Failure::Io(format!("{TOL_ENV} is not a number: {s:?}"))),
        Err(_) => Ok(None),
    }
}

/// Tolerance priority: `--tol`, then the file's `tol`, then `ITOALG_TOL`,
/// then the library default.
fn load(c: &Common) -> std::result::Result<ItoAlgebraSpec, Failure> {
    let (spec, file_tol) = match (&c.input.builder, &c.input.path) {
        (Some(text), _) => (BuilderConfig::parse(text)?.build()?, None),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let wire: SpecJson = serde_json::from_str(&text).map_err(ItoError::from)?;
            (wire.to_spec()?, wire.tol)
        }
        (None, None) => return Err(Failure::Io("no input given".into())),
    };
    let tol = match c.tol.or(file_tol) {
        Some(t) => t,
        None => env_tol()?.unwrap_or(DEFAULT_TOL),
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Io(format!("tolerance must be positive, got {tol}")));
    }
    Ok(spec.with_tol(tol))
}

fn violations(spec: &ItoAlgebraSpec) -> Option<Failure> {
    let report = spec.validate();
    if report.passed {
        return None;
    }
    let mut names: Vec<String> = report.violations.iter().map(|v| v.axiom.violation_name()).collect();
    names.dedup();
    Some(Failure::Invalid(names))
}

fn load_valid(c: &Common) -> std::result::Result<ItoAlgebraSpec, (Option<Value>, Failure)> {
    let spec = load(c).map_err(|f| (None, f))?;
    match violations(&spec) {
        Some(f) => Err((Some(validation(&spec)), f)),
        None => Ok(spec),
    }
}

// ---- JSON helpers ----

fn cnum(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn cvec(v: &[Complex64]) -> Value {
    Value::Array(v.iter().copied().map(cnum).collect())
}

fn cvector(v: &CVector) -> Value {
    Value::Array(v.iter().copied().map(cnum).collect())
}

fn cmat(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| cnum(m[(i, j)])).collect())).collect())
}

/// Basis vectors stored as matrix columns, one coordinate list each.
fn columns(m: &CMatrix) -> Value {
    Value::Array((0..m.ncols()).map(|j| cvec(m.column(j).as_slice())).collect())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn header(spec: &ItoAlgebraSpec) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("dim".into(), json!(spec.dim()));
    m.insert("labels".into(), json!(spec.labels()));
    m.insert("tol".into(), json!(spec.tol()));
    m
}

// ---- commands ----

fn validation(spec: &ItoAlgebraSpec) -> Value {
    let report = spec.validate();
    let mut m = header(spec);
    m.insert("passed".into(), json!(report.passed));
    m.insert(
        "violations".into(),
        Value::Array(
            report
                .violations
                .iter()
                .map(|v| {
                    json!({
                        "axiom": v.axiom.violation_name(),
                        "witness": v.witness,
                        "residual": v.residual,
                    })
                })
                .collect(),
        ),
    );
    Value::Object(m)
}

fn represent(spec: &ItoAlgebraSpec) -> Outcome {
    let rep = build_rep(spec)?;
    let n = spec.dim();
    let quads: Vec<_> = (0..n).map(|i| rep.quadruple_of(spec.basis(i).coords())).collect();
    let mut hom: f64 = 0.0;
    let mut star: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let qab = rep.quadruple_of(spec.basis_product(i, j));
            let scale = qab.max_abs().max(quads[i].max_abs() * quads[j].max_abs()).max(1.0);
            hom = hom.max(convolve(&quads[i], &quads[j])?.distance(&qab) / scale);
        }
        let qs = rep.quadruple_of(&spec.involve_coords(spec.basis(i).coords()));
        star = star.max(metric_adjoint(&to_matrix(&quads[i])).distance(&to_matrix(&qs)) / quads[i].max_abs().max(1.0));
    }
    let mut m = header(spec);
    m.insert("gram".into(), cmat(rep.gram()));
    m.insert("gram_eigenvalues".into(), json!(rep.gram_eigenvalues()));
    m.insert("rank".into(), json!(rep.rank()));
    m.insert("rank_cutoff".into(), json!(rep.rank_cutoff()));
    m.insert("kolmogorov".into(), cmat(rep.kolmogorov()));
    m.insert("gns".into(), Value::Array(rep.gns().iter().map(cmat).collect()));
    m.insert(
        "quadruples".into(),
        Value::Array(
            quads
                .iter()
                .zip(spec.labels())
                .map(|(q, label)| {
                    json!({
                        "label": label,
                        "alpha": cnum(q.alpha),
                        "ket": cvector(&q.ket),
                        "bra": cvector(&q.bra),
                        "op": cmat(&q.op),
                    })
                })
                .collect(),
        ),
    );
    m.insert(
        "residuals".into(),
        json!({
            "homomorphism": hom,
            "metric_adjoint": star,
            "gns": rep.gns_residual(),
            "star": rep.star_residual(),
        }),
    );
    Ok(Value::Object(m))
}

fn decomposition_value(spec: &ItoAlgebraSpec, dec: &Decomposition) -> Map<String, Value> {
    let mut m = header(spec);
    m.insert("idempotent".into(), cvec(dec.idempotent.coords()));
    m.insert(
        "components".into(),
        Value::Array(
            (0..spec.dim())
                .map(|i| {
                    json!({
                        "label": spec.labels()[i],
                        "alpha": cnum(dec.newton_coeff[i]),
                        "brownian": cvec(dec.brownian_part[i].coords()),
                        "levy": cvec(dec.levy_part[i].coords()),
                    })
                })
                .collect(),
        ),
    );
    m.insert("brownian_basis".into(), columns(&dec.brownian_basis));
    m.insert("levy_basis".into(), columns(&dec.levy_basis));
    m.insert("levy_dim_mod_theta".into(), json!(dec.levy_dim_mod_theta(spec)));
    m.insert(
        "residuals".into(),
        json!({
            "reconstruction": dec.reconstruction_residual(spec),
            "orthogonality": dec.orthogonality_residual(spec),
            "brownian_closure": dec.brownian_closure_residual(spec),
            "idempotent": dec.idempotent_residual(spec),
            "brownian_annihilation": dec.brownian_annihilation_residual(spec),
        }),
    );
    m
}

fn analyse(spec: &ItoAlgebraSpec) -> ito_core::Result<(FundamentalRep, Decomposition, Value)> {
    let rep = build_rep(spec)?;
    let ideals = null_ideals(spec, &rep);
    let dec = decompose(spec)?;
    let class = classify_from(spec, &rep, &ideals, &dec);
    Ok((rep, dec, to_value(&class)))
}

fn decomposition(spec: &ItoAlgebraSpec) -> Outcome {
    let (_, dec, class) = analyse(spec)?;
    let mut m = decomposition_value(spec, &dec);
    m.insert("classification".into(), class);
    Ok(Value::Object(m))
}

fn classification(spec: &ItoAlgebraSpec) -> Outcome {
    let (_, _, class) = analyse(spec)?;
    let mut m = header(spec);
    m.insert("classification".into(), class);
    Ok(Value::Object(m))
}

fn seminorm_report(spec: &ItoAlgebraSpec, seed: u64, samples: usize, trials: usize) -> Outcome {
    let rep = build_rep(spec)?;
    let mut elements = Vec::new();
    for i in 0..spec.dim() {
        let a = spec.basis(i);
        let s = seminorms(&rep, &a)?;
        let bound = if trials > 0 { Some(boundedness_lower_bound(&rep, &a, trials, seed)?) } else { None };
        elements.push(json!({
            "label": spec.labels()[i],
            "op": s.op,
            "plus": s.plus,
            "minus": s.minus,
            "plus_minus": s.plus_minus,
            "boundedness_lower_bound": bound,
        }));
    }
    let sample = random_elements(spec, samples.max(2), seed);
    let axioms = check_axioms(&rep, &sample)?;
    let mut m = header(spec);
    m.insert("inner_product".into(), json!("<a|b>_+ = l(a* b)"));
    m.insert("elements".into(), Value::Array(elements));
    m.insert(
        "axioms".into(),
        json!({
            "samples": axioms.samples,
            "seed": seed,
            "star_residual": axioms.star_residual,
            "product_residual": axioms.product_residual,
            "bstar_residual": axioms.bstar_residual,
            "max_violation": axioms.max_violation(),
        }),
    );
    Ok(Value::Object(m))
}

fn parse_pairs(text: &str, n: usize) -> std::result::Result<Vec<(usize, usize)>, Failure> {
    let bad = |p: &str| Failure::Io(format!("bad --pairs entry {p:?}; expected i,j with indices below {n}"));
    text.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (i, j) = p.split_once(',').ok_or_else(|| bad(p))?;
            let i: usize = i.trim().parse().map_err(|_| bad(p))?;
            let j: usize = j.trim().parse().map_err(|_| bad(p))?;
            if i >= n || j >= n {
                return Err(bad(p));
            }
            Ok((i, j))
        })
        .collect()
}

fn simulate(
    spec: &ItoAlgebraSpec,
    cfg: SimConfig,
    pairs: Option<&str>,
    csv: Option<&std::path::Path>,
) -> Outcome {
    let n = spec.dim();
    let pairs = match pairs {
        Some(text) => parse_pairs(text, n)?,
        None => (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect(),
    };
    let form = Arc::new(canonical_form(spec, &decompose(spec)?)?);
    let paths: Vec<PathBundle> = sample_paths(&form, &cfg)?;
    let mut table = String::from("path,a,b,realized_re,realized_im,predicted_re,predicted_im\n");
    let mut checks = Vec::new();
    for &(i, j) in &pairs {
        let c = ito_table_check(spec, &paths, &spec.basis(i), &spec.basis(j))?;
        for (k, (r, p)) in c.realized.iter().zip(&c.predicted).enumerate() {
            let _ = writeln!(table, "{k},{i},{j},{:e},{:e},{:e},{:e}", r.re, r.im, p.re, p.im);
        }
        checks.push(json!({
            "pair": [i, j],
            "labels": [c.pair.0, c.pair.1],
            "max_abs_error": c.max_abs_error,
            "rms_error": c.rms_error,
            "mean_realized": cnum(c.mean_realized),
            "stderr": c.stderr,
            "expected_mean": cnum(c.expected_mean),
        }));
    }
    let mut means = Vec::new();
    for i in 0..n {
        let m = mean_increment_check(spec, &paths, &spec.basis(i))?;
        means.push(json!({
            "label": m.label,
            "mean": cnum(m.mean),
            "stderr": m.stderr,
            "expected": cnum(m.expected),
            "passed": m.passed,
        }));
    }
    if let Some(path) = csv {
        std::fs::write(path, table).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    let mut m = header(spec);
    m.insert(
        "config".into(),
        json!({
            "horizon": cfg.horizon,
            "mesh": cfg.horizon / cfg.steps() as f64,
            "steps": cfg.steps(),
            "paths": cfg.paths,
            "seed": cfg.seed,
        }),
    );
    m.insert("canonical_form".into(), to_value(form.as_ref()));
    m.insert("ito_table".into(), Value::Array(checks));
    m.insert("mean_increments".into(), Value::Array(means));
    Ok(Value::Object(m))
}

// ---- output ----

/// Serializes with sorted keys and every float written with 17
/// significant digits, so identical runs give identical bytes.
pub fn render(v: &Value, pretty: bool) -> String {
    let mut out = String::new();
    write_value(&mut out, v, pretty, 0);
    out
}

fn write_value(out: &mut String, v: &Value, pretty: bool, depth: usize) {
    let newline = |out: &mut String, depth: usize| {
        if pretty {
            out.push('\n');
            out.push_str(&"  ".repeat(depth));
        }
    };
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(x) => match (x.as_i64(), x.as_u64(), x.as_f64()) {
            (Some(i), _, _) if !x.is_f64() => {
                let _ = write!(out, "{i}");
            }
            (_, Some(u), _) if !x.is_f64() => {
                let _ = write!(out, "{u}");
            }
            (_, _, Some(f)) if f.is_finite() => {
                let _ = write!(out, "{f:.16e}");
            }
            _ => out.push_str("null"),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric rows stay on one line
            let flat = items.iter().all(|x| x.is_number() || x.is_null());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                    if pretty && flat {
                        out.push(' ');
                    }
                }
                if !flat {
                    newline(out, depth + 1);
                }
                write_value(out, item, pretty, depth + 1);
            }
            if !flat {
                newline(out, depth);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (k, key) in keys.into_iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push(':');
                if pretty {
                    out.push(' ');
                }
                write_value(out, &map[key], pretty, depth + 1);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}
