//! Command-line front end.
//!
//! Every successful query prints one self-describing record per line:
//! `{"operation", "params", "engine", "result"}`. Exit status is 0 on success,
//! 2 for invalid input and 3 when a computation fails or `--verify` finds two
//! engines disagreeing by more than [`VERIFY_TOLERANCE`].

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::asymptotics;
use crate::closed_forms::{self, LineWindow, StarVertex};
use crate::exact;
use crate::graph::{Edge, Endpoint, EnsembleSpec, Graph, TransitionMatrix, WeightMode};
use crate::montecarlo::{self, Functional, SimulationConfig};
use crate::zdomain::{self, NumericResolvent, SeriesResolvent};
use crate::zseries::{self, ZSeries};
use crate::Error;

/// Largest disagreement tolerated by `--verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

/// Series length used to cross-check numeric z-values.
const MAX_VERIFY_ORDER: usize = 20_000;

#[derive(Debug, Parser)]
#[command(name = "localtime", version, about = "Local-time statistics of random walks on finite graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean local time <L(v1)>
    Mean(MeanArgs),
    /// Correlation <L(v1) L(v2)>
    Corr(CorrArgs),
    /// Distribution of L(v) over l = 0..=lmax
    Dist(DistArgs),
    /// Probability that v is never visited
    ZeroVisit(ZeroVisitArgs),
    /// Stationary distribution
    Stationary(StationaryArgs),
    /// lim <L(v1)>/n, or lim <L(v1) L(v2)>/n^2 with --v2
    LimitFraction(LimitArgs),
    /// Resolvent element <va|(P - zI)^-1|vb>, deformed with --v and --u
    Resolvent(ResolventArgs),
    /// Monte Carlo estimates
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Closed forms for the complete graph, star graph and discrete line
    #[command(subcommand)]
    ClosedForm(ClosedFormCommand),
    /// Write a graph as stochastic-mode JSON
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Time-domain sums and augmented chain
    Exact,
    /// Resolvent formulas expanded in w = 1/z
    Series,
    /// Resolvent formulas evaluated at a real z > 1 (z-transforms)
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EndpointKind {
    Free,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Complete,
    Star,
    Line,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// Graph file (JSON or dense CSV adjacency)
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub va: usize,
    /// Final vertex; implies --endpoint fixed
    #[arg(long)]
    pub vb: Option<usize>,
    #[arg(long, value_enum)]
    pub endpoint: Option<EndpointKind>,
    /// Number of steps
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    pub engine: Engine,
    /// Evaluation point for --engine numeric
    #[arg(long)]
    pub z: Option<f64>,
    /// Re-run on a second engine and fail on disagreement
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Args)]
pub struct MeanArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v1: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CorrArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v1: usize,
    #[arg(long)]
    pub v2: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v: usize,
    /// Largest l reported; defaults to n
    #[arg(long)]
    pub lmax: Option<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ZeroVisitArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StationaryArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Compare against final-value extrapolation of the mean
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LimitArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Starting vertex used by the extrapolation engine
    #[arg(long, default_value_t = 0)]
    pub va: usize,
    #[arg(long)]
    pub v1: usize,
    #[arg(long)]
    pub v2: Option<usize>,
    /// exact: stationary distribution; numeric: final-value extrapolation
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    pub engine: Engine,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ResolventArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub va: usize,
    #[arg(long)]
    pub vb: usize,
    #[arg(long)]
    pub z: f64,
    /// Vertex carrying the source potential
    #[arg(long, requires = "u")]
    pub v: Option<usize>,
    /// Source potential strength
    #[arg(long, requires = "v", allow_hyphen_values = true)]
    pub u: Option<f64>,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum SimulateCommand {
    Mean(SimMeanArgs),
    Corr(SimCorrArgs),
    Dist(SimDistArgs),
    ZeroVisit(SimZeroVisitArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulationArgs {
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimMeanArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v1: usize,
    #[command(flatten)]
    pub sim: SimulationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimCorrArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v1: usize,
    #[arg(long)]
    pub v2: usize,
    #[command(flatten)]
    pub sim: SimulationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimDistArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v: usize,
    #[arg(long)]
    pub l: usize,
    #[command(flatten)]
    pub sim: SimulationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimZeroVisitArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[arg(long)]
    pub v: usize,
    #[command(flatten)]
    pub sim: SimulationArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum ClosedFormCommand {
    /// Mean local time after --n steps, or the resolvent with --z
    Complete(CompleteArgs),
    /// Limiting fractions, or the resolvent matrix with --z
    Star(StarArgs),
    /// Zero-visit probability, resolvent (--z --delta) or distribution (--l)
    Line(LineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CompleteArgs {
    /// Number of vertices
    #[arg(long)]
    pub size: usize,
    #[arg(long, required_unless_present = "z")]
    pub n: Option<usize>,
    /// Mean at the starting vertex instead of another vertex
    #[arg(long)]
    pub at_start: bool,
    #[arg(long, requires_all = ["va", "vb"])]
    pub z: Option<f64>,
    #[arg(long)]
    pub va: Option<usize>,
    #[arg(long)]
    pub vb: Option<usize>,
    /// Compare with the generic engine
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StarArgs {
    /// Number of peripheral vertices
    #[arg(long)]
    pub size: usize,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct LineArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<i64>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    #[arg(long, conflicts_with = "family", required_unless_present = "family")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, requires = "size")]
    pub family: Option<Family>,
    /// Vertices (complete), peripheral vertices (star) or radius (line)
    #[arg(long)]
    pub size: Option<usize>,
    /// Output file; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Graph file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: usize,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub mode: WeightMode,
}

impl GraphFile {
    pub fn to_transition(&self) -> crate::Result<TransitionMatrix> {
        Graph::new(self.vertices, self.edges.clone())?.to_transition(self.mode)
    }

    /// Stochastic-mode description of `p` listing its positive entries.
    pub fn from_transition(p: &TransitionMatrix) -> Self {
        Self { vertices: p.size(), edges: p.positive_entries(), mode: WeightMode::Stochastic }
    }
}

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Compute(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Compute(_) => EXIT_COMPUTE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Compute(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Output record of one query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub operation: String,
    pub params: Map<String, Value>,
    pub engine: String,
    pub result: Value,
}

/// Loads a graph from JSON (by extension or a leading `{`) or a dense CSV
/// adjacency matrix.
pub fn load_graph(path: &Path) -> crate::Result<TransitionMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    if is_json {
        let file: GraphFile = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("bad graph JSON in {}: {e}", path.display())))?;
        file.to_transition()
    } else {
        parse_csv_adjacency(&text)
    }
}

/// Dense adjacency matrix, one row per line, no header.
pub fn parse_csv_adjacency(text: &str) -> crate::Result<TransitionMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::InvalidArgument(format!("bad CSV row {i}: {e}")))?;
        let row = record
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad number {s:?} in CSV row {i}")))
            })
            .collect::<crate::Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        let cols = rows.iter().map(Vec::len).find(|&c| c != n).unwrap_or(0);
        return Err(Error::NotSquare { rows: n, cols });
    }
    TransitionMatrix::from_adjacency(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Parses `args` (including the program name), runs the command and writes
/// records to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(rendered.as_bytes()) } else { out.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.exit_code()
        }
    }
}

fn execute(command: &Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Mean(a) => emit(out, a.output.format, &mean_cmd(a)?),
        Command::Corr(a) => emit(out, a.output.format, &corr_cmd(a)?),
        Command::Dist(a) => emit(out, a.output.format, &dist_cmd(a)?),
        Command::ZeroVisit(a) => emit(out, a.output.format, &zero_visit_cmd(a)?),
        Command::Stationary(a) => emit(out, a.output.format, &stationary_cmd(a)?),
        Command::LimitFraction(a) => emit(out, a.output.format, &limit_cmd(a)?),
        Command::Resolvent(a) => emit(out, a.output.format, &resolvent_cmd(a)?),
        Command::Simulate(s) => {
            let (format, record) = simulate_cmd(s)?;
            emit(out, format, &record)
        }
        Command::ClosedForm(c) => {
            let (format, record) = closed_form_cmd(c)?;
            emit(out, format, &record)
        }
        Command::Export(a) => export_cmd(a, out),
    }
}

fn emit(out: &mut dyn Write, format: Format, record: &Record) -> CliResult<()> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string(record).map_err(|e| Failure::Compute(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Csv => to_csv(record)?,
    };
    out.write_all(text.as_bytes()).map_err(|e| Failure::Compute(format!("write failed: {e}")))
}

/// Flattens a record: arrays of equal length in the result become one row
/// per index, everything else is repeated on every row.
fn to_csv(record: &Record) -> CliResult<String> {
    let mut scalars: Vec<(String, String)> = vec![
        ("operation".into(), record.operation.clone()),
        ("engine".into(), record.engine.clone()),
    ];
    for (k, v) in &record.params {
        scalars.push((k.clone(), cell(v)));
    }
    let mut columns: Vec<(String, Vec<Value>)> = Vec::new();
    let mut collect = |prefix: &str, v: &Value, scalars: &mut Vec<(String, String)>| match v {
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            columns.push((prefix.to_string(), items.clone()))
        }
        _ => scalars.push((prefix.to_string(), cell(v))),
    };
    match &record.result {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(inner) => {
                        for (ik, iv) in inner {
                            collect(&format!("{k}.{ik}"), iv, &mut scalars);
                        }
                    }
                    _ => collect(k, v, &mut scalars),
                }
            }
        }
        v => collect("value", v, &mut scalars),
    }
    let rows = columns.iter().map(|(_, c)| c.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = scalars.iter().map(|(k, _)| k.clone()).collect();
    if !columns.is_empty() {
        header.push("index".into());
        header.extend(columns.iter().map(|(k, _)| k.clone()));
    }
    let csv_err = |e: csv::Error| Failure::Compute(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    if columns.is_empty() {
        w.write_record(scalars.iter().map(|(_, v)| v)).map_err(csv_err)?;
    }
    for i in 0..rows {
        let mut row: Vec<String> = scalars.iter().map(|(_, v)| v.clone()).collect();
        row.push(i.to_string());
        row.extend(columns.iter().map(|(_, c)| c.get(i).map(cell).unwrap_or_default()));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Compute(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Compute(e.to_string()))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Exact => "exact",
        Engine::Series => "zdomain-series",
        Engine::Numeric => "zdomain-numeric",
    }
}

/// Loaded chain plus the validated ensemble.
struct Query {
    p: TransitionMatrix,
    spec: EnsembleSpec,
    params: Map<String, Value>,
}

fn ensemble(args: &EnsembleArgs, need_n: bool) -> CliResult<Query> {
    let endpoint = match (args.endpoint, args.vb) {
        (Some(EndpointKind::Free), Some(_)) => {
            return Err(Failure::Input("--vb cannot be combined with --endpoint free".into()))
        }
        (Some(EndpointKind::Fixed), None) => return Err(Failure::Input("--endpoint fixed needs --vb".into())),
        (_, Some(vb)) => Endpoint::Fixed(vb),
        (_, None) => Endpoint::Free,
    };
    let n = match (args.n, need_n) {
        (Some(n), _) => n,
        (None, false) => 0,
        (None, true) => return Err(Failure::Input("--n is required".into())),
    };
    let p = load_graph(&args.graph)?;
    let spec = EnsembleSpec { start: args.va, horizon: n, endpoint };
    spec.check(&p)?;
    let mut params = Map::new();
    params.insert("graph".into(), json!(args.graph.display().to_string()));
    params.insert("va".into(), json!(args.va));
    match endpoint {
        Endpoint::Fixed(vb) => {
            params.insert("vb".into(), json!(vb));
            params.insert("endpoint".into(), json!("fixed"));
        }
        Endpoint::Free => {
            params.insert("endpoint".into(), json!("free"));
        }
    }
    if need_n {
        params.insert("n".into(), json!(n));
    }
    Ok(Query { p, spec, params })
}

/// Validates the engine flags; returns `z` for the numeric engine.
fn engine_setup(args: &EngineArgs, params: &mut Map<String, Value>) -> CliResult<Option<f64>> {
    match (args.engine, args.z) {
        (Engine::Numeric, Some(z)) => {
            if !(z > 1.0) {
                return Err(Failure::Input(format!("--z must exceed 1, got {z}")));
            }
            params.insert("z".into(), json!(z));
            Ok(Some(z))
        }
        (Engine::Numeric, None) => Err(Failure::Input("--engine numeric needs --z".into())),
        (_, Some(_)) => Err(Failure::Input("--z only applies to --engine numeric".into())),
        (_, None) => Ok(None),
    }
}

/// Computes a list of time-domain values on one engine.
type TimeEngine<'a> = dyn Fn(Engine) -> crate::Result<Vec<f64>> + 'a;

/// Runs `f` on the requested engine and, with `verify`, on the other
/// time-domain engine.
fn time_domain(engine: Engine, verify: bool, f: &TimeEngine<'_>) -> CliResult<Vec<f64>> {
    let primary = f(engine)?;
    if verify {
        let other = if engine == Engine::Exact { Engine::Series } else { Engine::Exact };
        let check = f(other)?;
        compare(&primary, &check, engine_name(engine), engine_name(other))?;
    }
    Ok(primary)
}

fn compare(a: &[f64], b: &[f64], name_a: &str, name_b: &str) -> CliResult<()> {
    if a.len() != b.len() {
        return Err(Failure::Compute(format!("{name_a} and {name_b} returned different lengths")));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if !((x - y).abs() <= VERIFY_TOLERANCE * x.abs().max(1.0)) {
            return Err(Failure::Compute(format!(
                "verification failed at entry {i}: {name_a} gives {x}, {name_b} gives {y}"
            )));
        }
    }
    Ok(())
}

/// Series order whose tail at `z` is negligible for the polynomially growing
/// coefficients that occur here.
fn verify_order(z: f64) -> CliResult<usize> {
    let order = (40.0 / z.ln()).ceil();
    if !(order <= MAX_VERIFY_ORDER as f64) {
        return Err(Failure::Input(format!("--verify with --engine numeric needs z >= {}", (40.0 / MAX_VERIFY_ORDER as f64).exp())));
    }
    Ok(order as usize)
}

/// Value of a numeric z-domain query, cross-checked with `verify` against
/// the series expansion summed at `w = 1/z`.
fn numeric(
    z: f64,
    verify: bool,
    f: impl Fn(&NumericResolvent) -> crate::Result<f64>,
    g: impl Fn(&SeriesResolvent<'_>) -> crate::Result<ZSeries>,
    p: &TransitionMatrix,
) -> CliResult<f64> {
    let value = f(&NumericResolvent::new(p, z)?)?;
    if verify {
        let order = verify_order(z)?;
        let summed = g(&SeriesResolvent::new(p, order))?.truncate(order as i64).evaluate(1.0 / z);
        compare(&[value], &[summed], "zdomain-numeric", "zdomain-series")?;
    }
    Ok(value)
}

fn series_coefficient(s: ZSeries, n: usize) -> crate::Result<f64> {
    s.truncate(n as i64).coefficient(n as i64)
}

/// Result object for a scalar in the given ensemble.
fn scalar_result(q: &Query, value: f64) -> CliResult<Value> {
    match q.spec.endpoint {
        Endpoint::Free => Ok(json!({ "value": value })),
        Endpoint::Fixed(_) => {
            let normalized = exact::normalize(&q.p, &q.spec, value)?;
            Ok(json!({ "unnormalized": value, "normalized": normalized }))
        }
    }
}

fn record(operation: &str, params: Map<String, Value>, engine: &str, result: Value) -> Record {
    Record { operation: operation.into(), params, engine: engine.into(), result }
}

fn mean_cmd(a: &MeanArgs) -> CliResult<Record> {
    let numeric_mode = a.engine.engine == Engine::Numeric;
    let mut q = ensemble(&a.ensemble, !numeric_mode)?;
    q.p.check_vertex(a.v1)?;
    q.params.insert("v1".into(), json!(a.v1));
    let z = engine_setup(&a.engine, &mut q.params)?;
    let (va, e, v1) = (q.spec.start, q.spec.endpoint, a.v1);
    if let Some(z) = z {
        let value = numeric(
            z,
            a.engine.verify,
            |r| zdomain::mean_with(r, va, e, v1),
            |r| zdomain::mean_with(r, va, e, v1),
            &q.p,
        )?;
        return Ok(record("mean", q.params, "zdomain-numeric", json!({ "value": value })));
    }
    let n = q.spec.horizon;
    let values = time_domain(a.engine.engine, a.engine.verify, &|engine| {
        Ok(vec![match engine {
            Engine::Exact => exact::mean_local_time(&q.p, &q.spec, v1)?,
            _ => series_coefficient(zdomain::mean_with(&SeriesResolvent::new(&q.p, n), va, e, v1)?, n)?,
        }])
    })?;
    let result = scalar_result(&q, values[0])?;
    Ok(record("mean", q.params, engine_name(a.engine.engine), result))
}

fn corr_cmd(a: &CorrArgs) -> CliResult<Record> {
    let numeric_mode = a.engine.engine == Engine::Numeric;
    let mut q = ensemble(&a.ensemble, !numeric_mode)?;
    q.p.check_vertex(a.v1)?;
    q.p.check_vertex(a.v2)?;
    q.params.insert("v1".into(), json!(a.v1));
    q.params.insert("v2".into(), json!(a.v2));
    let z = engine_setup(&a.engine, &mut q.params)?;
    let (va, e, v1, v2) = (q.spec.start, q.spec.endpoint, a.v1, a.v2);
    if let Some(z) = z {
        let value = numeric(
            z,
            a.engine.verify,
            |r| zdomain::correlation_with(r, va, e, v1, v2),
            |r| zdomain::correlation_with(r, va, e, v1, v2),
            &q.p,
        )?;
        return Ok(record("corr", q.params, "zdomain-numeric", json!({ "value": value })));
    }
    let n = q.spec.horizon;
    let values = time_domain(a.engine.engine, a.engine.verify, &|engine| {
        Ok(vec![match engine {
            Engine::Exact => exact::correlation(&q.p, &q.spec, v1, v2)?,
            _ => series_coefficient(
                zdomain::correlation_with(&SeriesResolvent::new(&q.p, n), va, e, v1, v2)?,
                n,
            )?,
        }])
    })?;
    let result = scalar_result(&q, values[0])?;
    Ok(record("corr", q.params, engine_name(a.engine.engine), result))
}

fn dist_cmd(a: &DistArgs) -> CliResult<Record> {
    let numeric_mode = a.engine.engine == Engine::Numeric;
    let mut q = ensemble(&a.ensemble, !numeric_mode)?;
    q.p.check_vertex(a.v)?;
    let lmax = match (a.lmax, numeric_mode) {
        (Some(l), _) => l,
        (None, false) => q.spec.horizon,
        (None, true) => return Err(Failure::Input("--engine numeric needs --lmax".into())),
    };
    q.params.insert("v".into(), json!(a.v));
    q.params.insert("lmax".into(), json!(lmax));
    let z = engine_setup(&a.engine, &mut q.params)?;
    let (va, e, v) = (q.spec.start, q.spec.endpoint, a.v);
    if let Some(z) = z {
        let mut values = Vec::with_capacity(lmax + 1);
        for l in 0..=lmax {
            let l = l as u32;
            values.push(numeric(
                z,
                a.engine.verify,
                |r| zdomain::distribution_with(r, va, e, v, l),
                |r| zdomain::distribution_with(r, va, e, v, l),
                &q.p,
            )?);
        }
        return Ok(record("dist", q.params, "zdomain-numeric", json!({ "transform": values })));
    }
    let n = q.spec.horizon;
    let saturated = lmax < n;
    let mass = time_domain(a.engine.engine, a.engine.verify, &|engine| match engine {
        Engine::Exact => Ok(exact::local_time_distribution(&q.p, &q.spec, v, lmax)?.mass),
        _ => {
            let alg = SeriesResolvent::new(&q.p, n);
            let top = if saturated { lmax } else { lmax + 1 };
            let mut mass = (0..top)
                .map(|l| series_coefficient(zdomain::distribution_with(&alg, va, e, v, l as u32)?, n))
                .collect::<crate::Result<Vec<f64>>>()?;
            if saturated {
                let total = exact::normalization(&q.p, &q.spec)?;
                mass.push(total - mass.iter().sum::<f64>());
            }
            Ok(mass)
        }
    })?;
    let result = match e {
        Endpoint::Free => json!({ "mass": mass, "saturated": saturated }),
        Endpoint::Fixed(_) => {
            let normalized = mass
                .iter()
                .map(|&m| exact::normalize(&q.p, &q.spec, m))
                .collect::<crate::Result<Vec<f64>>>()?;
            json!({ "unnormalized": mass, "normalized": normalized, "saturated": saturated })
        }
    };
    Ok(record("dist", q.params, engine_name(a.engine.engine), result))
}

fn zero_visit_cmd(a: &ZeroVisitArgs) -> CliResult<Record> {
    let numeric_mode = a.engine.engine == Engine::Numeric;
    let mut q = ensemble(&a.ensemble, !numeric_mode)?;
    q.p.check_vertex(a.v)?;
    q.params.insert("v".into(), json!(a.v));
    let z = engine_setup(&a.engine, &mut q.params)?;
    let (va, e, v) = (q.spec.start, q.spec.endpoint, a.v);
    if let Some(z) = z {
        let value = zdomain::zero_visit_z(&q.p, z, va, e, v)?;
        if a.engine.verify {
            let via_distribution = zdomain::distribution_with(&NumericResolvent::new(&q.p, z)?, va, e, v, 0)?;
            compare(&[value], &[via_distribution], "zero-visit resolvent", "distribution at l = 0")?;
        }
        return Ok(record("zero-visit", q.params, "zdomain-numeric", json!({ "value": value })));
    }
    let n = q.spec.horizon;
    let values = time_domain(a.engine.engine, a.engine.verify, &|engine| {
        Ok(vec![match engine {
            Engine::Exact => exact::zero_visit_probability(&q.p, &q.spec, v)?,
            _ => series_coefficient(zdomain::distribution_with(&SeriesResolvent::new(&q.p, n), va, e, v, 0)?, n)?,
        }])
    })?;
    let result = scalar_result(&q, values[0])?;
    Ok(record("zero-visit", q.params, engine_name(a.engine.engine), result))
}

fn stationary_cmd(a: &StationaryArgs) -> CliResult<Record> {
    let p = load_graph(&a.graph)?;
    let pi = asymptotics::invariant_distribution(&p)?.pi;
    if a.verify {
        let extrapolated = (0..p.size())
            .map(|v| asymptotics::extrapolated_fraction(&p, 0, v))
            .collect::<crate::Result<Vec<f64>>>()?;
        compare(&pi, &extrapolated, "linear solve", "final-value extrapolation")?;
    }
    let mut params = Map::new();
    params.insert("graph".into(), json!(a.graph.display().to_string()));
    Ok(record("stationary", params, "exact", json!({ "pi": pi })))
}

fn limit_cmd(a: &LimitArgs) -> CliResult<Record> {
    let p = load_graph(&a.graph)?;
    let mut params = Map::new();
    params.insert("graph".into(), json!(a.graph.display().to_string()));
    params.insert("va".into(), json!(a.va));
    params.insert("v1".into(), json!(a.v1));
    if let Some(v2) = a.v2 {
        params.insert("v2".into(), json!(v2));
    }
    p.check_vertex(a.va)?;
    let by_solve = || match a.v2 {
        Some(v2) => asymptotics::limiting_pair_fraction(&p, a.v1, v2),
        None => asymptotics::limiting_local_time_fraction(&p, a.v1),
    };
    let by_extrapolation = || match a.v2 {
        Some(v2) => asymptotics::extrapolated_pair_fraction(&p, a.va, a.v1, v2),
        None => asymptotics::extrapolated_fraction(&p, a.va, a.v1),
    };
    let (value, engine) = match a.engine {
        Engine::Exact => (by_solve()?, "exact"),
        Engine::Numeric => (by_extrapolation()?, "zdomain-numeric"),
        Engine::Series => return Err(Failure::Input("limit-fraction supports --engine exact or numeric".into())),
    };
    if a.verify {
        let other = match a.engine {
            Engine::Exact => by_extrapolation()?,
            _ => by_solve()?,
        };
        compare(&[value], &[other], "linear solve", "final-value extrapolation")?;
    }
    Ok(record("limit-fraction", params, engine, json!({ "value": value })))
}

fn resolvent_cmd(a: &ResolventArgs) -> CliResult<Record> {
    let p = load_graph(&a.graph)?;
    if !(a.z > 1.0) {
        return Err(Failure::Input(format!("--z must exceed 1, got {}", a.z)));
    }
    let mut params = Map::new();
    params.insert("graph".into(), json!(a.graph.display().to_string()));
    params.insert("va".into(), json!(a.va));
    params.insert("vb".into(), json!(a.vb));
    params.insert("z".into(), json!(a.z));
    let value = match (a.v, a.u) {
        (Some(v), Some(u)) => {
            params.insert("v".into(), json!(v));
            params.insert("u".into(), json!(u));
            let value = zdomain::deformed_resolvent_element(&p, a.z, v, u, a.va, a.vb)?;
            if a.verify {
                let direct = zdomain::deformed_resolvent_direct(&p, a.z, v, u, a.va, a.vb)?;
                compare(&[value], &[direct], "rank-one update", "direct solve")?;
            }
            value
        }
        _ => {
            let value = zdomain::resolvent_element(&p, a.z, a.va, a.vb)?;
            if a.verify {
                let order = verify_order(a.z)?;
                let summed = zseries::resolvent_element(&p, a.va, a.vb, order)?.evaluate(1.0 / a.z);
                compare(&[value], &[summed], "linear solve", "power series")?;
            }
            value
        }
    };
    Ok(record("resolvent", params, "zdomain-numeric", json!({ "value": value })))
}

fn simulate_cmd(command: &SimulateCommand) -> CliResult<(Format, Record)> {
    let (ens, sim, format, functional, operation) = match command {
        SimulateCommand::Mean(a) => (&a.ensemble, &a.sim, a.output.format, Functional::Mean { v1: a.v1 }, "simulate-mean"),
        SimulateCommand::Corr(a) => (
            &a.ensemble,
            &a.sim,
            a.output.format,
            Functional::Product { v1: a.v1, v2: a.v2 },
            "simulate-corr",
        ),
        SimulateCommand::Dist(a) => (
            &a.ensemble,
            &a.sim,
            a.output.format,
            Functional::Indicator { v: a.v, l: a.l },
            "simulate-dist",
        ),
        SimulateCommand::ZeroVisit(a) => {
            (&a.ensemble, &a.sim, a.output.format, Functional::ZeroVisit { v: a.v }, "simulate-zero-visit")
        }
    };
    let mut q = ensemble(ens, true)?;
    match functional {
        Functional::Mean { v1 } => {
            q.params.insert("v1".into(), json!(v1));
        }
        Functional::Product { v1, v2 } => {
            q.params.insert("v1".into(), json!(v1));
            q.params.insert("v2".into(), json!(v2));
        }
        Functional::Indicator { v, l } => {
            q.params.insert("v".into(), json!(v));
            q.params.insert("l".into(), json!(l));
        }
        Functional::ZeroVisit { v } => {
            q.params.insert("v".into(), json!(v));
        }
    }
    q.params.insert("seed".into(), json!(sim.seed));
    q.params.insert("trials".into(), json!(sim.trials));
    let config = SimulationConfig::new(sim.seed, sim.trials, q.spec)?;
    let estimate = montecarlo::estimate(&q.p, &config, functional)?;
    let mut result = serde_json::to_value(estimate).map_err(|e| Failure::Compute(e.to_string()))?;
    if let (Endpoint::Fixed(_), Value::Object(map)) = (q.spec.endpoint, &mut result) {
        map.insert("acceptance_rate".into(), json!(estimate.trials_used as f64 / sim.trials as f64));
    }
    Ok((format, record(operation, q.params, "montecarlo", result)))
}

fn closed_form_cmd(command: &ClosedFormCommand) -> CliResult<(Format, Record)> {
    match command {
        ClosedFormCommand::Complete(a) => Ok((a.output.format, complete_cmd(a)?)),
        ClosedFormCommand::Star(a) => Ok((a.output.format, star_cmd(a)?)),
        ClosedFormCommand::Line(a) => Ok((a.output.format, line_cmd(a)?)),
    }
}

fn complete_cmd(a: &CompleteArgs) -> CliResult<Record> {
    let mut params = Map::new();
    params.insert("size".into(), json!(a.size));
    let p = closed_forms::complete_transition(a.size)?;
    if let (Some(z), Some(va), Some(vb)) = (a.z, a.va, a.vb) {
        params.insert("z".into(), json!(z));
        params.insert("va".into(), json!(va));
        params.insert("vb".into(), json!(vb));
        let value = closed_forms::complete_resolvent(a.size, z, va, vb)?;
        if a.verify {
            compare(&[value], &[zdomain::resolvent_element(&p, z, va, vb)?], "closed form", "linear solve")?;
        }
        return Ok(record("closed-form-complete-resolvent", params, "closed-form", json!({ "value": value })));
    }
    let n = a.n.ok_or_else(|| Failure::Input("--n is required".into()))?;
    params.insert("n".into(), json!(n));
    params.insert("at_start".into(), json!(a.at_start));
    let value = closed_forms::complete_mean_local_time(a.size, n, a.at_start)?;
    if a.verify {
        let v1 = if a.at_start { 0 } else { 1 };
        compare(&[value], &[exact::mean_local_time_free(&p, 0, v1, n)?], "closed form", "exact")?;
    }
    Ok(record("closed-form-complete-mean", params, "closed-form", json!({ "value": value })))
}

fn star_cmd(a: &StarArgs) -> CliResult<Record> {
    let mut params = Map::new();
    params.insert("size".into(), json!(a.size));
    let p = closed_forms::star_transition(a.size)?;
    match a.z {
        Some(z) => {
            params.insert("z".into(), json!(z));
            let r = closed_forms::star_resolvent(a.size, z)?;
            if a.verify {
                let generic = NumericResolvent::new(&p, z)?;
                compare(r.as_slice(), generic.matrix().as_slice(), "closed form", "linear solve")?;
            }
            let rows: Vec<Vec<f64>> = r.row_iter().map(|row| row.iter().copied().collect()).collect();
            Ok(record("closed-form-star-resolvent", params, "closed-form", json!({ "matrix": rows })))
        }
        None => {
            let center = closed_forms::star_limiting_fraction(a.size, StarVertex::Center);
            let peripheral = closed_forms::star_limiting_fraction(a.size, StarVertex::Peripheral);
            if a.verify {
                let pi = asymptotics::invariant_distribution(&p)?;
                compare(&[center, peripheral], &[pi.get(0), pi.get(1)], "closed form", "linear solve")?;
            }
            Ok(record(
                "closed-form-star-limit",
                params,
                "closed-form",
                json!({ "center": center, "peripheral": peripheral }),
            ))
        }
    }
}

fn line_cmd(a: &LineArgs) -> CliResult<Record> {
    let mut params = Map::new();
    match (a.n, a.z, a.delta, a.l) {
        (Some(n), None, None, l) => {
            params.insert("n".into(), json!(n));
            let l = l.unwrap_or(0);
            params.insert("l".into(), json!(l));
            let value = if l == 0 {
                closed_forms::line_zero_visit(n)
            } else {
                closed_forms::line_distribution_series(l, n)?.coefficient(n as i64)?
            };
            if a.verify {
                let window = LineWindow::covering(n, 0);
                let p = window.transition();
                let spec = EnsembleSpec::free(window.index(0)?, n);
                let table = exact::local_time_distribution(&p, &spec, spec.start, l as usize + 1)?;
                compare(&[value], &[table.mass[l as usize]], "closed form", "windowed exact")?;
            }
            Ok(record("closed-form-line-distribution", params, "closed-form", json!({ "value": value })))
        }
        (None, Some(z), Some(delta), None) => {
            params.insert("z".into(), json!(z));
            params.insert("delta".into(), json!(delta));
            let value = closed_forms::line_resolvent(z, delta)?;
            if a.verify {
                // the window decouples geometrically; 1e-14 / |log ratio| sites suffice
                let ratio = z - (z * z - 1.0).sqrt();
                let radius = delta.unsigned_abs() as usize + (40.0 / -ratio.ln()).ceil() as usize;
                let window = LineWindow::new(radius);
                let generic = zdomain::resolvent_element(&window.transition(), z, window.index(0)?, window.index(delta)?)?;
                compare(&[value], &[generic], "closed form", "windowed linear solve")?;
            }
            Ok(record("closed-form-line-resolvent", params, "closed-form", json!({ "value": value })))
        }
        (None, Some(z), None, l) => {
            let l = l.unwrap_or(0);
            params.insert("z".into(), json!(z));
            params.insert("l".into(), json!(l));
            let value = closed_forms::line_distribution_z(l, z)?;
            if a.verify {
                let order = verify_order(z)?;
                let summed = closed_forms::line_distribution_series(l, order)?.evaluate(1.0 / z);
                compare(&[value], &[summed], "closed form", "power series")?;
            }
            Ok(record("closed-form-line-transform", params, "closed-form", json!({ "value": value })))
        }
        _ => Err(Failure::Input(
            "closed-form line takes --n [--l], --z --delta, or --z [--l]".into(),
        )),
    }
}

fn export_cmd(a: &ExportArgs, out: &mut dyn Write) -> CliResult<()> {
    let p = match (&a.graph, a.family) {
        (Some(path), _) => load_graph(path)?,
        (None, Some(family)) => {
            let size = a.size.ok_or_else(|| Failure::Input("--family needs --size".into()))?;
            match family {
                Family::Complete => closed_forms::complete_transition(size)?,
                Family::Star => closed_forms::star_transition(size)?,
                Family::Line => LineWindow::new(size).transition(),
            }
        }
        (None, None) => return Err(Failure::Input("export needs --graph or --family".into())),
    };
    let mut text = serde_json::to_string_pretty(&GraphFile::from_transition(&p))
        .map_err(|e| Failure::Compute(e.to_string()))?;
    text.push('\n');
    match &a.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Compute(format!("write failed: {e}"))),
    }
}
