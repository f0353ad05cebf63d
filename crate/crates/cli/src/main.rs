//! `bitensor` command-line front end.

mod parse;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bitensor::atlas::{example_defaults, example_id, example_map, image_point, AtlasMap, MapSpec, EXAMPLE_LABELS};
use bitensor::bitension::max_bitension_norm;
use bitensor::functionals::{bienergy, degree, energy};
use bitensor::sweep::{parse_range, rows_to_csv, sweep, SweepRow};
use bitensor::tension::max_tension_norm;
use bitensor::verify::{run_suite, Suite, SuiteConfig};
use bitensor::classify::classify_nonflat_with;
use bitensor::{classify_flat, Error, GridSpec, LinearMap, WarpedSurface};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "bitensor", about = "Harmonic and biharmonic maps between warped-product surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Grid size as NxM (r samples x theta samples).
    #[arg(long, global = true, value_parser = parse::grid_size)]
    grid: Option<(usize, usize)>,
    /// Harmonic tolerance on the grid maximum of |tau|.
    #[arg(long = "tol-h", global = true, default_value_t = 1e-9)]
    tol_h: f64,
    /// Biharmonic tolerance on the grid maximum of |tau2|.
    #[arg(long = "tol-b", global = true, default_value_t = 1e-8)]
    tol_b: f64,
    /// Output format. Without it, commands print text (csv for sweep, json
    /// for verify and atlas).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the result here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a linear map torus -> sphere.
    Classify(MapArgs),
    /// Grid maxima of the tension and bitension of a map.
    Residual(MapArgs),
    /// Run a verification suite; exit status 1 on any failure.
    Verify(VerifyArgs),
    /// Residuals and functionals along a one-parameter family, as CSV.
    Sweep(SweepArgs),
    /// Energy and bienergy of a map.
    Energy(MapArgs),
    /// Brouwer degree of a map into a sphere model.
    Degree(MapArgs),
    /// List the example maps, or describe one.
    Atlas(AtlasArgs),
}

/// A linear map `(ar + bθ + c, mr + nθ + l)` on the flat or non-flat torus,
/// or an example from the atlas.
#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// Flat torus dr² + dθ² into dρ² + sin²ρ dφ² (default).
    #[arg(long, conflicts_with = "nonflat")]
    flat: bool,
    /// Torus dr² + (k + cos r)² dθ² into dρ² + cos²ρ dφ².
    #[arg(long)]
    nonflat: bool,
    #[arg(short = 'k', long = "k", default_value = "2", value_parser = parse::number, allow_hyphen_values = true)]
    k: f64,
    #[arg(short = 'a', default_value = "0", value_parser = parse::number, allow_hyphen_values = true)]
    a: f64,
    #[arg(short = 'b', default_value = "0", value_parser = parse::number, allow_hyphen_values = true)]
    b: f64,
    #[arg(short = 'c', default_value = "pi/4", value_parser = parse::number, allow_hyphen_values = true)]
    c: f64,
    #[arg(short = 'm', default_value = "1", value_parser = parse::number, allow_hyphen_values = true)]
    m: f64,
    #[arg(short = 'n', default_value = "0", value_parser = parse::number, allow_hyphen_values = true)]
    n: f64,
    #[arg(short = 'l', default_value = "0", value_parser = parse::number, allow_hyphen_values = true)]
    l: f64,
    /// Use an atlas example (1..6 or its label) instead of a linear map.
    #[arg(long, conflicts_with_all = ["flat", "nonflat"])]
    example: Option<String>,
    /// Example parameter, e.g. --set s=pi/8. Repeatable.
    #[arg(long = "set", value_parser = parse::assignment, requires = "example")]
    set: Vec<(String, f64)>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// theorem-flat, theorem-nonflat, expansion, oracle, variation or tension-oracle.
    suite: String,
    /// Offsets of the non-flat torus, comma separated.
    #[arg(long = "k", value_delimiter = ',', value_parser = parse::number)]
    k: Vec<f64>,
    /// Random cases (per family where the suite has two).
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    map: MapArgs,
    /// Parameter to vary: an example parameter, or a, b, c, m, n, l, k for
    /// linear maps. Defaults to the example's first parameter, or c.
    #[arg(long)]
    param: Option<String>,
    /// lo:hi, [lo,hi], (lo,hi) or a half-open mix; pi tokens allowed.
    #[arg(long, default_value = "[0.01,1.55]", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 155)]
    steps: usize,
}

#[derive(Args, Debug)]
struct AtlasArgs {
    /// Example id (1..6) or label. Lists all examples when absent.
    example: Option<String>,
    #[arg(long = "set", value_parser = parse::assignment)]
    set: Vec<(String, f64)>,
    /// Also emit image points in R³ on an N x N parameter grid.
    #[arg(long)]
    sample: Option<usize>,
}

/// Failure of a command, mapped onto an exit status.
enum Failure {
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

struct Context<'a> {
    global: &'a GlobalArgs,
}

impl Context<'_> {
    fn grid(&self, default: usize) -> Result<GridSpec, Failure> {
        let (nr, nt) = self.global.grid.unwrap_or((default, default));
        Ok(GridSpec::new(nr, nt)?.with_tolerances(self.global.tol_h, self.global.tol_b)?)
    }

    fn emit(&self, text: &str) -> CmdResult {
        match &self.global.output {
            Some(path) => fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    /// Text, `key,value` CSV or a JSON object, depending on `--format`.
    fn emit_record(&self, fields: &[(&str, Value)], text: String) -> CmdResult {
        match self.global.format {
            None => self.emit(&text),
            Some(Format::Json) => {
                let obj: serde_json::Map<String, Value> =
                    fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
                self.emit(&(to_json(&Value::Object(obj))? + "\n"))
            }
            Some(Format::Csv) => {
                let mut out = String::from("key,value\n");
                for (k, v) in fields {
                    let v = match v {
                        Value::String(s) => s.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    };
                    out.push_str(&format!("{k},{v}\n"));
                }
                self.emit(&out)
            }
        }
    }
}

fn to_json(v: &Value) -> Result<String, Failure> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))
}

fn json_error(e: serde_json::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn resolve_example(token: &str) -> Result<u8, Failure> {
    token
        .parse::<u8>()
        .ok()
        .filter(|id| (1..=6).contains(id))
        .or_else(|| example_id(token))
        .ok_or_else(|| {
            Failure::Usage(format!(
                "unknown example {token:?}; use 1..6 or one of {}",
                EXAMPLE_LABELS.join(", ")
            ))
        })
}

fn linear_spec(args: &MapArgs, map: LinearMap) -> Result<MapSpec, Failure> {
    let (domain, target) = if args.nonflat {
        (WarpedSurface::nonflat_torus(args.k)?, WarpedSurface::sphere_cosine())
    } else {
        (WarpedSurface::flat_torus(), WarpedSurface::sphere_sine())
    };
    Ok(MapSpec {
        domain,
        target,
        map: AtlasMap::Linear(map),
        label: if args.nonflat { "linear-nonflat" } else { "linear-flat" }.to_string(),
        params: BTreeMap::new(),
    })
}

fn linear_of(args: &MapArgs) -> LinearMap {
    LinearMap::new(args.a, args.b, args.c, args.m, args.n, args.l)
}

fn map_spec(args: &MapArgs) -> Result<MapSpec, Failure> {
    match &args.example {
        Some(token) => {
            let params: BTreeMap<String, f64> = args.set.iter().cloned().collect();
            Ok(example_map(resolve_example(token)?, &params)?)
        }
        None => linear_spec(args, linear_of(args)),
    }
}

fn cmd_classify(ctx: &Context, args: &MapArgs) -> CmdResult {
    if args.example.is_some() {
        return Err(Failure::Usage("classify takes a linear map, not an example".into()));
    }
    let map = linear_of(args);
    let result = if args.nonflat {
        classify_nonflat_with(&map, args.k, ctx.global.tol_h)?
    } else {
        classify_flat(&map)
    };
    let mut text = result.summary() + "\n";
    if let Some(w) = &result.witness {
        text.push_str(&format!("witness: {w}\n"));
    }
    ctx.emit_record(
        &[
            ("summary", json!(result.summary())),
            ("verdict", json!(result.verdict)),
            ("case_tag", json!(result.case_tag)),
            ("witness", json!(result.witness)),
        ],
        text,
    )
}

fn or_nan(v: bitensor::Result<f64>) -> Result<f64, Failure> {
    match v {
        Ok(x) => Ok(x),
        Err(Error::EmptyGrid) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

fn cmd_residual(ctx: &Context, args: &MapArgs) -> CmdResult {
    let spec = map_spec(args)?;
    let grid = ctx.grid(128)?;
    let (d, t, m) = (&spec.domain, &spec.target, &spec.map);
    let harmonic = or_nan(max_tension_norm(d, t, m, &grid, f64::INFINITY))?;
    let biharmonic = or_nan(max_bitension_norm(d, t, m, &grid, f64::INFINITY))?;
    // Every grid point excluded: the image is a pole and the map is constant.
    let is_h = harmonic.is_nan() || harmonic < grid.tolerance_harmonic;
    let is_b = biharmonic.is_nan() || biharmonic < grid.tolerance_biharmonic;
    let verdict = match (is_h, is_b) {
        (true, _) => "Harmonic",
        (false, true) => "ProperBiharmonic",
        (false, false) => "NotBiharmonic",
    };
    let text = format!(
        "map: {}\nmax_residual_harmonic: {harmonic:e}\nmax_residual_biharmonic: {biharmonic:e}\nverdict: {verdict}\n",
        spec.label
    );
    ctx.emit_record(
        &[
            ("map", json!(spec.label)),
            ("max_residual_harmonic", json_number(harmonic)),
            ("max_residual_biharmonic", json_number(biharmonic)),
            ("harmonic", json!(is_h)),
            ("biharmonic", json!(is_b)),
            ("verdict", json!(verdict)),
        ],
        text,
    )
}

fn cmd_verify(ctx: &Context, args: &VerifyArgs) -> CmdResult {
    let suite: Suite = args.suite.parse()?;
    let mut config = SuiteConfig {
        samples: args.samples,
        seed: ctx.global.seed,
        ..SuiteConfig::default()
    };
    if !args.k.is_empty() {
        config.k = args.k.clone();
    }
    if ctx.global.grid.is_some() || ctx.global.tol_h != 1e-9 || ctx.global.tol_b != 1e-8 {
        let default = if suite == Suite::Variation { 128 } else { 64 };
        config.grid = Some(ctx.grid(default)?);
    }
    let report = run_suite(suite, &config)?;
    let text = match ctx.global.format {
        Some(Format::Csv) => {
            let mut out = String::from("suite,cases,failures,max_residual\n");
            out.push_str(&format!(
                "{},{},{},{:e}\n",
                report.suite,
                report.cases,
                report.failures.len(),
                report.max_residual
            ));
            out
        }
        _ => to_json(&serde_json::to_value(&report).map_err(json_error)?)? + "\n",
    };
    ctx.emit(&text)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_sweep(ctx: &Context, args: &SweepArgs) -> CmdResult {
    let range = parse_range(&args.range, |s| parse::number(s).map_err(Error::InvalidParameter))?;
    let params = range.samples(args.steps)?;
    let grid = ctx.grid(64)?;
    let map_args = &args.map;
    let rows: Vec<SweepRow> = match &map_args.example {
        None if !map_args.flat && !map_args.nonflat && args.param.is_none() => {
            // Zero-flag default: the eigenmap family of example 2 in s.
            sweep(|s| example_map(2, &BTreeMap::from([("s".to_string(), s)])), &params, &grid)?
        }
        Some(token) => {
            let id = resolve_example(token)?;
            let name = match &args.param {
                Some(p) => p.clone(),
                None => example_defaults(id)?[0].0.to_string(),
            };
            let base: BTreeMap<String, f64> = map_args.set.iter().cloned().collect();
            sweep(
                |p| {
                    let mut params = base.clone();
                    params.insert(name.clone(), p);
                    example_map(id, &params)
                },
                &params,
                &grid,
            )?
        }
        None => {
            let name = args.param.clone().unwrap_or_else(|| "c".to_string());
            let allowed: &[&str] = if map_args.nonflat {
                &["a", "b", "c", "m", "n", "l", "k"]
            } else {
                &["a", "b", "c", "m", "n", "l"]
            };
            if !allowed.contains(&name.as_str()) {
                return Err(Failure::Usage(format!(
                    "linear sweeps vary one of {}, got {name:?}",
                    allowed.join(", ")
                )));
            }
            sweep(
                |p| {
                    let mut a = map_args.clone();
                    match name.as_str() {
                        "a" => a.a = p,
                        "b" => a.b = p,
                        "c" => a.c = p,
                        "m" => a.m = p,
                        "n" => a.n = p,
                        "l" => a.l = p,
                        _ => a.k = p,
                    }
                    linear_spec(&a, linear_of(&a)).map_err(|f| match f {
                        Failure::Usage(msg) => Error::InvalidParameter(msg),
                        Failure::Verification => Error::InvalidParameter("sweep".into()),
                    })
                },
                &params,
                &grid,
            )?
        }
    };
    let text = match ctx.global.format {
        Some(Format::Json) => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "param": json_number(r.param),
                        "max_residual_biharmonic": json_number(r.max_residual_biharmonic),
                        "max_residual_harmonic": json_number(r.max_residual_harmonic),
                        "energy": json_number(r.energy),
                        "bienergy": json_number(r.bienergy),
                    })
                })
                .collect();
            to_json(&Value::Array(rows))? + "\n"
        }
        _ => rows_to_csv(&rows),
    };
    ctx.emit(&text)
}

fn cmd_energy(ctx: &Context, args: &MapArgs) -> CmdResult {
    let spec = map_spec(args)?;
    let grid = ctx.grid(128)?;
    let e = energy(&spec.domain, &spec.target, &spec.map, &grid)?;
    let e2 = bienergy(&spec.domain, &spec.target, &spec.map, &grid)?;
    ctx.emit_record(
        &[("map", json!(spec.label)), ("energy", json!(e)), ("bienergy", json!(e2))],
        format!("map: {}\nenergy: {e}\nbienergy: {e2}\n", spec.label),
    )
}

fn cmd_degree(ctx: &Context, args: &MapArgs) -> CmdResult {
    let spec = map_spec(args)?;
    let grid = ctx.grid(128)?;
    let deg = degree(&spec.domain, &spec.target, &spec.map, &grid)?;
    ctx.emit_record(
        &[
            ("map", json!(spec.label)),
            ("degree", json!(deg)),
            ("rounded", json!(deg.round())),
        ],
        format!("map: {}\ndegree: {deg:e}\n", spec.label),
    )
}

fn cmd_atlas(ctx: &Context, args: &AtlasArgs) -> CmdResult {
    let Some(token) = &args.example else {
        if !args.set.is_empty() || args.sample.is_some() {
            return Err(Failure::Usage("--set and --sample need an example".into()));
        }
        let all = (1..=6u8)
            .map(|id| Ok(example_map(id, &BTreeMap::new())?.summary(id)))
            .collect::<Result<Vec<_>, Failure>>()?;
        let text = match ctx.global.format {
            Some(Format::Csv) => {
                let mut out = String::from("id,label,domain,target\n");
                for s in &all {
                    out.push_str(&format!("{},{},{},{}\n", s.id, s.label, s.domain, s.target));
                }
                out
            }
            _ => to_json(&serde_json::to_value(&all).map_err(json_error)?)? + "\n",
        };
        return ctx.emit(&text);
    };
    let id = resolve_example(token)?;
    let params: BTreeMap<String, f64> = args.set.iter().cloned().collect();
    let spec = example_map(id, &params)?;
    let (pr, pt) = spec.domain.periods()?;
    let points: Vec<[f64; 5]> = match args.sample {
        None => Vec::new(),
        Some(0) => return Err(Failure::Usage("--sample needs at least 1".into())),
        Some(n) => (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (r, t) = (i as f64 * pr / n as f64, j as f64 * pt / n as f64);
                let [x, y, z] = image_point(&spec, r, t);
                [r, t, x, y, z]
            })
            .collect(),
    };
    let text = match ctx.global.format {
        Some(Format::Csv) => {
            let mut out = String::from("r,theta,x,y,z\n");
            for p in &points {
                out.push_str(&p.map(|v| format!("{v:e}")).join(","));
                out.push('\n');
            }
            out
        }
        _ => {
            let mut v = serde_json::to_value(spec.summary(id)).map_err(json_error)?;
            if args.sample.is_some() {
                v["points"] = json!(points);
            }
            to_json(&v)? + "\n"
        }
    };
    ctx.emit(&text)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("BITENSOR_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("BITENSOR_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: &Cli) -> CmdResult {
    configure_threads()?;
    let ctx = Context { global: &cli.global };
    match &cli.command {
        Command::Classify(a) => cmd_classify(&ctx, a),
        Command::Residual(a) => cmd_residual(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Energy(a) => cmd_energy(&ctx, a),
        Command::Degree(a) => cmd_degree(&ctx, a),
        Command::Atlas(a) => cmd_atlas(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(EXIT_FAILURE),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
