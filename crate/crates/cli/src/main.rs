mod source;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cmfield::cf::{convergent_stream, delta_measure, error_bound, euler_partial, CfSpec, EulerSpec};
use cmfield::exact::parse::parse_index_poly;
use cmfield::exact::{parse_rational, to_decimal, to_f64, BiPoly, Mat2};
use cmfield::field::{FieldDefinition, FieldError, MatrixField};
use cmfield::lattice::{self, to_int_pair, LatticeError};
use cmfield::search::{complete_my, enumerate_pairs, SearchError, SearchSpace};
use num_traits::Zero;

use source::FieldArgs;

pub enum Fail {
    /// Bad arguments, unreadable input, parse errors.
    Usage(String),
    /// The input was understood but a mathematical check failed.
    Math(String),
}

impl From<LatticeError> for Fail {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Field(f) => source::field_error(f),
            LatticeError::InvalidArgument(_) => Fail::Usage(e.to_string()),
            other => Fail::Math(other.to_string()),
        }
    }
}

impl From<cmfield::cf::CfError> for Fail {
    fn from(e: cmfield::cf::CfError) -> Self {
        Fail::Math(e.to_string())
    }
}

impl From<SearchError> for Fail {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Field(f) => source::field_error(f),
            other => Fail::Usage(other.to_string()),
        }
    }
}

fn io_fail(e: std::io::Error) -> Fail {
    Fail::Usage(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "cmf", version, about = "Conservative matrix fields for polynomial continued fractions")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    Cf,
    Twisted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the linear and quadratic conditions and build both fields.
    Validate {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Print M_X and M_Y.
    Build {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value = "cf")]
        form: Form,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Convergents of a polynomial continued fraction, or of one row of a field.
    Convergents {
        #[command(flatten)]
        field: FieldArgs,
        /// Partial denominator a(n).
        #[arg(long, requires = "b")]
        a: Option<String>,
        /// Partial numerator b(n).
        #[arg(long, requires = "a")]
        b: Option<String>,
        /// Leading term a0.
        #[arg(long, default_value = "0")]
        a0: String,
        /// Row m of the field table.
        #[arg(long, default_value_t = 1)]
        row: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        /// Constant for the delta column.
        #[arg(long = "const")]
        constant: Option<String>,
    },
    /// Delta table over 1 <= n <= N, 1 <= m <= M.
    Heatmap {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 30)]
        m: usize,
        #[arg(long = "const")]
        constant: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
        /// Output path; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Numerical irrationality evidence along the diagonal.
    Certify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[arg(long = "const")]
        constant: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Diagonal continued fraction and its normalized denominators.
    Diagonal {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 12)]
        n: usize,
    },
    /// Enumerate conjugate pairs with bounded integer coefficients.
    Search {
        #[arg(long, default_value_t = 1)]
        deg: u32,
        #[arg(long = "box", default_value_t = 1)]
        coeff_box: i64,
        #[arg(long)]
        cap: Option<u128>,
        /// Drop degenerate pairs from the output.
        #[arg(long)]
        skip_degenerate: bool,
        /// Write one field-definition file per pair here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Solve for all M_Y compatible with the field's M_X instead.
        #[arg(long)]
        complete_my: bool,
        #[arg(long, default_value_t = 1)]
        deg_x: u32,
        #[arg(long, default_value_t = 1)]
        deg_y: u32,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Euler continued fraction from h1, h2, f, checked against its closed form.
    Euler {
        #[arg(long)]
        h1: String,
        #[arg(long)]
        h2: String,
        #[arg(long, default_value = "1")]
        f: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if !cmfield::set_jobs(j) {
            eprintln!("warning: thread pool already initialized");
        }
    }
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Math(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command, out: &mut String) -> Result<(), Fail> {
    match cmd {
        Command::Validate { field } => validate(&field, out),
        Command::Build { field, form, json } => build(&field, form, json, out),
        Command::Convergents { field, a, b, a0, row, depth, constant } => match (a, b) {
            (Some(a), Some(b)) => convergents_cf(&a, &b, &a0, depth, constant.as_deref(), out),
            _ => convergents_row(&field, row, depth, constant.as_deref(), out),
        },
        Command::Heatmap { field, n, m, constant, out: format, output } => {
            heatmap(&field, n, m, constant.as_deref(), format, output, out)
        }
        Command::Certify { field, depth, constant, json } => certify(&field, depth, constant.as_deref(), json, out),
        Command::Diagonal { field, n } => diagonal(&field, n, out),
        Command::Search { deg, coeff_box, cap, skip_degenerate, out_dir, complete_my, deg_x, deg_y, field } => {
            if complete_my {
                completion(&field, deg_x, deg_y, out)
            } else {
                search(deg, coeff_box, cap, skip_degenerate, out_dir, out)
            }
        }
        Command::Euler { h1, h2, f, depth } => euler(&h1, &h2, &f, depth, out),
    }
}

/// The twisted form, which stays nonsingular on the axis `x = 0`.
fn lattice_field(field: &FieldArgs) -> Result<(source::Loaded, MatrixField), Fail> {
    let loaded = source::load(field)?;
    let mf = loaded.pair.twisted_field().map_err(source::field_error)?;
    Ok((loaded, mf))
}

fn validate(field: &FieldArgs, out: &mut String) -> Result<(), Fail> {
    let (def, _) = source::definition(field)?;
    let _ = writeln!(out, "f = {}", def.f);
    let _ = writeln!(out, "fbar = {}", def.fbar);
    let loaded = match source::load(field) {
        Ok(l) => l,
        Err(Fail::Math(m)) => {
            let _ = writeln!(out, "valid: no");
            return Err(Fail::Math(m));
        }
        Err(e) => return Err(e),
    };
    let pair = &loaded.pair;
    let _ = writeln!(out, "linear condition: ok");
    let _ = writeln!(out, "quadratic condition: ok");
    let _ = writeln!(out, "b_x(x) = {}", pair.bx);
    let _ = writeln!(out, "b_y(y) = {}", pair.by.display_with("x", "y"));
    let _ = writeln!(out, "a(x, y) = {}", pair.a);
    let check = |name: &str, mf: Result<MatrixField, FieldError>, out: &mut String| -> Result<(), Fail> {
        let mf = mf.and_then(|m| m.verify().map(|_| m)).map_err(|e| {
            let _ = writeln!(out, "{name} field: {e}");
            source::field_error(e)
        })?;
        let _ = writeln!(out, "{name} field: conservative, determinants match");
        drop(mf);
        Ok(())
    };
    check("cf", pair.cf_field(), out)?;
    check("twisted", pair.twisted_field(), out)?;
    let _ = writeln!(out, "degenerate: {}", if pair.is_degenerate() { "yes" } else { "no" });
    let _ = writeln!(out, "valid: yes");
    Ok(())
}

fn mat_json(m: &Mat2<BiPoly>) -> serde_json::Value {
    serde_json::json!([
        [m.m[0][0].to_string(), m.m[0][1].to_string()],
        [m.m[1][0].to_string(), m.m[1][1].to_string()]
    ])
}

fn build(field: &FieldArgs, form: Form, json: bool, out: &mut String) -> Result<(), Fail> {
    let loaded = source::load(field)?;
    let mf = match form {
        Form::Cf => loaded.pair.cf_field(),
        Form::Twisted => loaded.pair.twisted_field(),
    }
    .map_err(source::field_error)?;
    let name = match form {
        Form::Cf => "cf",
        Form::Twisted => "twisted",
    };
    if json {
        let v = serde_json::json!({
            "definition": FieldDefinition::from_pair(&loaded.pair),
            "form": name,
            "mx": mat_json(&mf.mx),
            "my": mat_json(&mf.my),
        });
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        let _ = writeln!(out, "form: {name}");
        let _ = writeln!(out, "M_X = {}", mf.mx);
        let _ = writeln!(out, "M_Y = {}", mf.my);
        let _ = writeln!(out, "det M_X = {}", mf.mx.det());
        let _ = writeln!(out, "det M_Y = {}", mf.my.det());
    }
    Ok(())
}

fn optional_ladder(text: Option<&str>, preset: Option<cmfield::field::Preset>) -> Result<Option<cmfield::constants::PrecisionLadder>, Fail> {
    match (text, preset) {
        (None, None) => Ok(None),
        _ => source::ladder(text, preset).map(Some),
    }
}

fn convergents_cf(a: &str, b: &str, a0: &str, depth: usize, constant: Option<&str>, out: &mut String) -> Result<(), Fail> {
    let pa = parse_index_poly(a).map_err(|e| Fail::Usage(format!("a: {e}")))?;
    let pb = parse_index_poly(b).map_err(|e| Fail::Usage(format!("b: {e}")))?;
    let a0 = parse_rational(a0).ok_or_else(|| Fail::Usage(format!("a0: not a rational number: '{a0}'")))?;
    let cf = CfSpec::polynomial(pa, pb, a0.clone())?;
    let ladder = optional_ladder(constant, None)?;
    let conv = convergent_stream(&cf, depth)?;
    let _ = writeln!(out, "n,p,q,value,delta");
    for c in conv.iter().skip(1) {
        let (p, q) = to_int_pair(&[c.full_numerator(&a0), c.q.clone()]);
        let value = c.value(&a0).map_or("undefined".to_string(), |v| to_decimal(&v, 30));
        let delta = match (&ladder, q.is_zero()) {
            (Some(l), false) => delta_measure(&p, &q, l).render(),
            _ => String::new(),
        };
        let _ = writeln!(out, "{},{p},{q},{value},{delta}", c.n);
    }
    if depth >= 2 {
        let bound = error_bound(&cf, depth, 2 * depth)?;
        eprintln!(
            "tail bound at n = {depth}: {:.3e} ({})",
            to_f64(&bound.bound),
            if bound.rigorous { "rigorous" } else { "partial sum only" }
        );
    }
    Ok(())
}

fn convergents_row(field: &FieldArgs, row: usize, depth: usize, constant: Option<&str>, out: &mut String) -> Result<(), Fail> {
    if row == 0 {
        return Err(Fail::Usage("--row must be at least 1".into()));
    }
    let (loaded, mf) = lattice_field(field)?;
    let ladder = optional_ladder(constant, loaded.preset)?;
    let table = lattice::pq_table(&mf, depth, row)?;
    let _ = writeln!(out, "n,m,p,q,value,delta");
    for n in 0..=depth {
        let r = table.get(n, row).expect("row in table");
        let value = r.value().map_or("undefined".to_string(), |v| to_decimal(&v, 30));
        let delta = match &ladder {
            Some(l) if !r.q.is_zero() => delta_measure(&r.p, &r.q, l).render(),
            _ => String::new(),
        };
        let _ = writeln!(out, "{n},{row},{},{},{value},{delta}", r.p, r.q);
    }
    Ok(())
}

fn heatmap(
    field: &FieldArgs,
    n: usize,
    m: usize,
    constant: Option<&str>,
    format: Format,
    output: Option<PathBuf>,
    out: &mut String,
) -> Result<(), Fail> {
    if n == 0 || m == 0 {
        return Err(Fail::Usage("--n and --m must be positive".into()));
    }
    let (loaded, mf) = lattice_field(field)?;
    let ladder = source::ladder(constant, loaded.preset)?;
    let hm = lattice::heatmap(&mf, n, m, &ladder)?;
    let text = match format {
        Format::Csv => hm.to_csv(),
        Format::Json => serde_json::to_string_pretty(&hm.to_json(Some(&loaded.definition))).expect("json") + "\n",
    };
    let target = ladder.approx(64).to_f64();
    eprintln!("constant {} ~ {target:.12}", ladder.constant().name());
    for mm in 1..=m {
        if let Some(v) = hm.get(n, mm).and_then(|r| r.value()) {
            let v = to_f64(&v);
            eprintln!("row m = {mm}: P/Q at n = {n} is {v:.12} (difference {:.3e})", v - target);
        }
    }
    match output {
        Some(path) => std::fs::write(&path, text).map_err(io_fail)?,
        None => out.push_str(&text),
    }
    Ok(())
}

fn certify(field: &FieldArgs, depth: usize, constant: Option<&str>, json: bool, out: &mut String) -> Result<(), Fail> {
    let (loaded, mf) = lattice_field(field)?;
    let ladder = source::ladder(constant, loaded.preset)?;
    let cert = lattice::certificate(&mf, &ladder, depth)?;
    if cert.low_confidence {
        eprintln!("warning: depth {depth} is shallow; the verdict is low-confidence");
    }
    if json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&cert.to_json()).expect("json"));
    } else {
        out.push_str(&cert.to_text());
    }
    Ok(())
}

fn diagonal(field: &FieldArgs, n: usize, out: &mut String) -> Result<(), Fail> {
    let (_, mf) = lattice_field(field)?;
    let pcf = lattice::diagonal_pcf(&mf)?;
    let _ = writeln!(out, "step A(k) = {}", pcf.step);
    let _ = writeln!(out, "scale = {}", pcf.scale.display_with("k", "y"));
    let _ = writeln!(out, "a(k) = {}", pcf.a.display_with("k", "y"));
    let _ = writeln!(out, "b(k) = {}", pcf.b.display_with("k", "y"));
    let _ = writeln!(out, "prefix = {}", pcf.prefix);
    if pcf.a == lattice::apery_polynomial() {
        let _ = writeln!(out, "a(k) = (2k+1)(17k^2+17k+5): yes");
    }
    let v = lattice::v_sequence(&mf, n)?;
    let _ = writeln!(out, "normalization: (n!)^{}", 2 * v.exponent);
    let _ = writeln!(out, "n,v_n");
    for (i, x) in v.v.iter().enumerate() {
        let _ = writeln!(out, "{i},{x}");
    }
    let rec = match v.recurrence_holds {
        Some(true) => "holds",
        Some(false) => "fails",
        None => "not applicable",
    };
    let _ = writeln!(out, "recurrence: {rec}");
    let _ = writeln!(out, "tenfold growth: {}", if v.tenfold_growth { "yes" } else { "no" });
    let _ = writeln!(out, "lambda_hat = {:.6}", v.growth.lambda_hat);
    if let Some(a) = v.growth.lambda_aitken {
        let _ = writeln!(out, "lambda_aitken = {a:.6}");
    }
    if let Some(r) = &v.growth.roots {
        let _ = writeln!(out, "characteristic roots: {} ({:.6}, {:.6})", r.description, r.plus, r.minus);
    }
    Ok(())
}

fn search(deg: u32, coeff_box: i64, cap: Option<u128>, skip_degenerate: bool, out_dir: Option<PathBuf>, out: &mut String) -> Result<(), Fail> {
    let mut space = SearchSpace::new(deg, coeff_box);
    if let Some(c) = cap {
        space.cap = c;
    }
    let report = enumerate_pairs(&space)?;
    eprintln!(
        "candidates f: {}, raw pairs: {}, after dedup: {}, degenerate: {}",
        report.space_size,
        report.raw_count,
        report.pairs.len(),
        report.degenerate_count()
    );
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir).map_err(io_fail)?;
    }
    let mut written = 0usize;
    for found in report.pairs.iter().filter(|p| !(skip_degenerate && p.degenerate)) {
        let def = FieldDefinition::from_pair(&found.pair);
        let mut line = serde_json::to_value(&def).expect("json");
        line["degenerate"] = serde_json::Value::Bool(found.degenerate);
        let _ = writeln!(out, "{}", serde_json::to_string(&line).expect("json"));
        if let Some(dir) = &out_dir {
            written += 1;
            let path = dir.join(format!("pair_{written:05}.json"));
            let text = serde_json::to_string_pretty(&def).expect("json") + "\n";
            std::fs::write(path, text).map_err(io_fail)?;
        }
    }
    Ok(())
}

fn completion(field: &FieldArgs, deg_x: u32, deg_y: u32, out: &mut String) -> Result<(), Fail> {
    let (_, mf) = lattice_field(field)?;
    let c = complete_my(&mf.mx, deg_x, deg_y)?;
    let _ = writeln!(out, "M_X = {}", mf.mx);
    let _ = writeln!(out, "box: deg_x <= {deg_x}, deg_y <= {deg_y}");
    let _ = writeln!(out, "dimension: {}", c.basis.len());
    for (i, (b, ns)) in c.basis.iter().zip(&c.nonsingular).enumerate() {
        let _ = writeln!(out, "basis {i}: {b}{}", if *ns { "" } else { " (singular)" });
    }
    let _ = writeln!(out, "contains the field's M_Y: {}", if c.contains(&mf.my) { "yes" } else { "no" });
    Ok(())
}

fn euler(h1: &str, h2: &str, f: &str, depth: usize, out: &mut String) -> Result<(), Fail> {
    let parse = |name: &str, s: &str| parse_index_poly(s).map_err(|e| Fail::Usage(format!("{name}: {e}")));
    let spec = EulerSpec { h1: parse("h1", h1)?, h2: parse("h2", h2)?, f: parse("f", f)? };
    let cf = spec.generated_cf(depth)?;
    let conv = convergent_stream(&cf, depth + 1)?;
    let _ = writeln!(out, "k,a_k,b_k,convergent,closed_form,match");
    let mut mismatches = Vec::new();
    for k in 1..=depth {
        let closed = euler_partial(&spec, k)?;
        let c = &conv[k + 1];
        let value = c.value(&cf.a0);
        let ok = value.as_ref() == Some(&closed);
        if !ok {
            mismatches.push(k);
        }
        let shown = value.map_or("undefined".to_string(), |v| v.to_string());
        let _ = writeln!(out, "{k},{},{},{shown},{closed},{ok}", cf.a.at(k)?, cf.b.at(k)?);
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(Fail::Math(format!("closed form differs at k = {mismatches:?}")))
    }
}
