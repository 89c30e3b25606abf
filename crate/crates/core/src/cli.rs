//! Command-line driver.
//!
//! Every subcommand maps onto one library entry point. Machine-readable
//! results go to `--out` (or stdout); domain errors are reported as a JSON
//! object `{"error": kind, "message": text}` on stderr with exit code 1,
//! usage errors exit with 2.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::causation::{
    counterfactual_table, poc_exact, poc_from_model, poc_queries, forbidden_residuals, CfTable, CfTemplate, PocResult,
    Residuals, Source,
};
use crate::data::Dataset;
use crate::datagen::{artefact_paths, generate, Generated, GeneratorKind, GeneratorSpec, Manifest};
use crate::error::{Error, Result};
use crate::learn::{make_labels, train, Columns, LabelSource, TrainConfig, TwinModel};
use crate::models::is_markovian;
use crate::ordering::{
    check_cf_ordering, check_interventional_premise, check_monotone, check_stability, write_violations,
    OrderingSpec, PremiseForm, ViolationReport,
};
use crate::rng;
use crate::scm::{Cmp, Scm};
use crate::twin::{
    bench_compare, counterfactual_aap, counterfactual_exact, counterfactual_mc, random_query, CounterfactualQuery,
    Estimate, EventSpec,
};

pub const ENUM_CAP_VAR: &str = "TWINCF_ENUM_CAP";

#[derive(Parser, Debug)]
#[command(name = "twincf", version, about = "Counterfactual inference for discrete structural causal models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset with latent sidecar and manifest.
    Generate(GenerateArgs),
    /// Validate an SCM description.
    Validate(ScmArg),
    /// Answer one counterfactual query.
    Query(QueryArgs),
    /// Check monotonicity, counterfactual ordering and stability.
    Check(CheckArgs),
    /// Train a deep twin network.
    Train(TrainArgs),
    /// Probabilities of necessity and sufficiency.
    Poc(PocArgs),
    /// Counterfactual table and forbidden-conditional residuals.
    Table(TableArgs),
    /// Time twin-network sampling against abduction-action-prediction.
    Bench(BenchArgs),
    /// Render table or residual JSON as text.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    TwinMc,
    Aap,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::TwinMc => "twin-mc",
            Method::Aap => "aap",
        }
    }
}

#[derive(Args, Debug)]
struct ScmArg {
    #[arg(long)]
    scm: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GeneratorKind,
    /// Comma-separated `P(U_Y)` for the three-branch generators.
    #[arg(long, value_delimiter = ',')]
    q: Option<Vec<f64>>,
    /// `P(X = 1)` (unconfounded) or `P(Z = 1)` (confounded).
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Data CSV; sidecar and manifest are written next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    scm: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RoleArgs {
    #[arg(long, default_value = "X")]
    treatment: String,
    #[arg(long, default_value = "Y")]
    outcome: String,
    /// Comma-separated covariate columns.
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long)]
    scm: PathBuf,
    #[arg(long)]
    ordering: Option<PathBuf>,
    #[command(flatten)]
    roles: RoleArgs,
    /// Violation reports as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Data CSV. A manifest next to it supplies roles and generator labels.
    #[arg(long)]
    data: PathBuf,
    /// TrainConfig JSON; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ordering: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: u64,
    /// Counterfactual labels from nearest-neighbour matching even when a
    /// generator manifest exists.
    #[arg(long)]
    matching: bool,
    #[command(flatten)]
    roles: RoleArgs,
    /// Model JSON; the loss curve goes to `<stem>.curve.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SourceArgs {
    #[arg(long, conflicts_with_all = ["model", "data"])]
    scm: Option<PathBuf>,
    #[arg(long, requires = "data")]
    model: Option<PathBuf>,
    #[arg(long, requires = "model")]
    data: Option<PathBuf>,
    #[command(flatten)]
    roles: RoleArgs,
}

#[derive(Args, Debug)]
struct PocArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    ordering: Option<PathBuf>,
    /// `exact` or `twin-mc` for an SCM source.
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    /// Factual outcome the table conditions on.
    #[arg(long, default_value_t = 0)]
    evidence: u32,
    #[arg(long, value_parser = parse_cmp, default_value = "ge")]
    op: Cmp,
    #[arg(long, default_value_t = 1)]
    value: u32,
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON output; CSVs go to `<stem>.table.csv` and `<stem>.residuals.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    scm: PathBuf,
    /// JSON array of queries; random queries when absent.
    #[arg(long)]
    query: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Bench report as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Output of `table` (or a bare table / residual object).
    #[arg(long)]
    input: PathBuf,
    /// Flag forbidden residuals above this value and exit 1 if any.
    #[arg(long)]
    gate: Option<f64>,
}

fn parse_kind(s: &str) -> std::result::Result<GeneratorKind, String> {
    s.replace('-', "_").parse().map_err(|e: Error| e.to_string())
}

fn parse_cmp(s: &str) -> std::result::Result<Cmp, String> {
    match s {
        "eq" => Ok(Cmp::Eq),
        "ge" => Ok(Cmp::Ge),
        "le" => Ok(Cmp::Le),
        _ => Err(format!("expected eq, ge or le, got '{s}'")),
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
    /// Already reported; exit with this code.
    Exit(i32),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            let obj = serde_json::json!({"error": e.kind(), "message": e.to_string()});
            eprintln!("{obj}");
            1
        }
        Err(Failure::Exit(code)) => code,
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Query(a) => cmd_query(a),
        Command::Check(a) => cmd_check(a),
        Command::Train(a) => cmd_train(a),
        Command::Poc(a) => cmd_poc(a),
        Command::Table(a) => cmd_table(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn need_seed(seed: Option<u64>, what: &str) -> std::result::Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage(format!("--seed is required for {what}")))
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn load_scm(path: &Path) -> Result<Scm> {
    let scm = Scm::from_json(&read(path)?)?;
    match std::env::var(ENUM_CAP_VAR) {
        Ok(v) => {
            let cap = v
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidConfig(format!("{ENUM_CAP_VAR}='{v}' is not a positive integer")))?;
            Ok(scm.with_enum_cap(cap))
        }
        Err(_) => Ok(scm),
    }
}

fn load_ordering(path: Option<&Path>, default: impl FnOnce() -> Result<OrderingSpec>) -> Result<OrderingSpec> {
    match path {
        Some(p) => OrderingSpec::from_json(&read(p)?),
        None => default(),
    }
}

fn scm_identity(scm: &Scm, treatment: &str, outcome: &str) -> Result<OrderingSpec> {
    let nx = scm.cardinality(scm.id(treatment)?);
    let ny = scm.cardinality(scm.id(outcome)?);
    Ok(OrderingSpec::identity(treatment, outcome, nx, ny))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                s.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn cmd_generate(a: GenerateArgs) -> Outcome {
    let spec = GeneratorSpec {
        q: a.q,
        p: a.p,
        ..GeneratorSpec::new(a.kind, a.n, a.seed)
    };
    let g = generate(&spec)?;
    g.write(&a.out)?;
    emit(None, &to_json(&g.manifest)?)?;
    Ok(())
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    observed: Vec<String>,
    latents: Vec<String>,
    latent_support: u64,
    markovian: bool,
}

fn cmd_validate(a: ScmArg) -> Outcome {
    let scm = load_scm(&a.scm)?;
    let names = |ids: &[usize]| ids.iter().map(|&v| scm.name(v).to_string()).collect();
    let out = ValidateOutput {
        valid: true,
        observed: names(scm.observed()),
        latents: names(scm.latents()),
        latent_support: u64::try_from(scm.latent_support()).unwrap_or(u64::MAX),
        markovian: is_markovian(&scm),
    };
    emit(None, &to_json(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct QueryOutput {
    estimate: f64,
    stderr: f64,
    n_effective: usize,
    method: &'static str,
}

fn estimate_query(scm: &Scm, q: &CounterfactualQuery, method: Method, n: usize, seed: Option<u64>) -> std::result::Result<Estimate, Failure> {
    Ok(match method {
        Method::Exact => Estimate::exact(counterfactual_exact(scm, q)?),
        Method::TwinMc => counterfactual_mc(scm, q, n, need_seed(seed, "--method twin-mc")?)?,
        Method::Aap => counterfactual_aap(scm, q, n, need_seed(seed, "--method aap")?)?,
    })
}

fn cmd_query(a: QueryArgs) -> Outcome {
    let scm = load_scm(&a.scm)?;
    let q = CounterfactualQuery::from_json(&read(&a.query)?)?;
    let e = estimate_query(&scm, &q, a.method, a.n, a.seed)?;
    let out = QueryOutput {
        estimate: e.value,
        stderr: e.stderr,
        n_effective: e.n_effective,
        method: a.method.name(),
    };
    emit(a.out.as_deref(), &serde_json::to_string(&out).map_err(Error::from)?)?;
    Ok(())
}

#[derive(Serialize)]
struct CheckOutput {
    ordering: OrderingSpec,
    monotone: bool,
    cf_ordering: bool,
    stability: bool,
    premise_pointwise: bool,
    premise_dominance: bool,
    violations: usize,
}

fn cmd_check(a: CheckArgs) -> Outcome {
    let scm = load_scm(&a.scm)?;
    let ord = load_ordering(a.ordering.as_deref(), || scm_identity(&scm, &a.roles.treatment, &a.roles.outcome))?;
    let mono = check_monotone(&scm, &ord)?;
    let cf = check_cf_ordering(&scm, &ord)?;
    let stab = check_stability(&scm, &ord)?;
    let pw = check_interventional_premise(&scm, &ord, PremiseForm::Pointwise)?;
    let dom = check_interventional_premise(&scm, &ord, PremiseForm::Dominance)?;
    let all: Vec<ViolationReport> = [&mono, &cf, &stab, &pw].into_iter().flatten().cloned().collect();
    if let Some(p) = &a.out {
        write_violations(&all, fs::File::create(p).map_err(Error::from)?)?;
    }
    let out = CheckOutput {
        ordering: ord,
        monotone: mono.is_empty(),
        cf_ordering: cf.is_empty(),
        stability: stab.is_empty(),
        premise_pointwise: pw.is_empty(),
        premise_dominance: dom.is_empty(),
        violations: all.len(),
    };
    emit(None, &to_json(&out)?)?;
    Ok(())
}

/// Data plus the manifest next to it, when there is one.
fn load_data(path: &Path) -> Result<(Dataset, Option<Generated>)> {
    let (_, manifest) = artefact_paths(path);
    if manifest.exists() {
        let g = Generated::read(path)?;
        Ok((g.data.clone(), Some(g)))
    } else {
        Ok((Dataset::read_csv(path)?, None))
    }
}

fn roles(r: &RoleArgs, manifest: Option<&Manifest>) -> Columns {
    match manifest {
        Some(m) => Columns {
            treatment: m.treatment.clone(),
            outcome: m.outcome.clone(),
            covariates: m.covariates.clone(),
        },
        None => Columns {
            treatment: r.treatment.clone(),
            outcome: r.outcome.clone(),
            covariates: r.covariates.clone(),
        },
    }
}

#[derive(Serialize)]
struct TrainOutput {
    model: PathBuf,
    curve: PathBuf,
    rows: usize,
    epochs: usize,
    final_loss: f64,
    final_penalty: f64,
}

fn cmd_train(a: TrainArgs) -> Outcome {
    let (data, gen) = load_data(&a.data)?;
    let cols = roles(&a.roles, gen.as_ref().map(|g| &g.manifest));
    let (nx, ny) = match &gen {
        Some(g) => (g.treatment_cardinality(), g.outcome_cardinality()),
        None => (data.cardinality(&cols.treatment)?, data.cardinality(&cols.outcome)?),
    };
    let source = match (&gen, a.matching) {
        (Some(g), false) => LabelSource::Generator(g),
        _ => LabelSource::Matching,
    };
    let td = make_labels(&data, &cols, nx, ny, &source)?;
    let mut cfg: TrainConfig = match &a.config {
        Some(p) => serde_json::from_str(&read(p)?).map_err(Error::from)?,
        None => TrainConfig::default(),
    };
    cfg.seed = a.seed;
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    if let Some(p) = &a.ordering {
        cfg.ordering = Some(OrderingSpec::from_json(&read(p)?)?);
    }
    let r = train(&td, &cfg)?;
    fs::write(&a.out, r.model.to_json()).map_err(Error::from)?;
    let curve = sibling(&a.out, "curve.csv");
    r.write_curve_csv(fs::File::create(&curve).map_err(Error::from)?)?;
    let last = r.curve.last();
    let out = TrainOutput {
        model: a.out.clone(),
        curve,
        rows: td.len(),
        epochs: r.curve.len(),
        final_loss: last.map_or(f64::NAN, |s| s.loss),
        final_penalty: last.map_or(f64::NAN, |s| s.penalty),
    };
    emit(None, &to_json(&out)?)?;
    Ok(())
}

enum Loaded {
    Scm(Scm),
    Model(TwinModel, Dataset, Columns),
}

fn load_source(s: &SourceArgs) -> std::result::Result<Loaded, Failure> {
    match (&s.scm, &s.model, &s.data) {
        (Some(p), _, _) => Ok(Loaded::Scm(load_scm(p)?)),
        (None, Some(m), Some(d)) => {
            let model = TwinModel::from_json(&read(m)?)?;
            let (data, gen) = load_data(d)?;
            let cols = roles(&s.roles, gen.as_ref().map(|g| &g.manifest));
            Ok(Loaded::Model(model, data, cols))
        }
        _ => Err(Failure::Usage("pass either --scm or --model with --data".into())),
    }
}

fn cmd_poc(a: PocArgs) -> Outcome {
    let (t, o) = (&a.source.roles.treatment, &a.source.roles.outcome);
    let p = match load_source(&a.source)? {
        Loaded::Scm(scm) => match a.method {
            Method::Exact => poc_exact(&scm, t, o)?,
            m => {
                let seed = need_seed(a.seed, "a sampled PoC")?;
                let qs = poc_queries(t, o);
                let mut e = Vec::with_capacity(3);
                for (i, q) in qs.iter().enumerate() {
                    e.push(estimate_query(&scm, q, m, a.n, Some(rng::split(seed, i as u64)))?);
                }
                PocResult {
                    pn: e[0],
                    ps: e[1],
                    pns: e[2],
                }
            }
        },
        Loaded::Model(model, data, cols) => {
            poc_from_model(&model, &data, &cols, a.n, need_seed(a.seed, "a trained model")?)?
        }
    };
    emit(a.out.as_deref(), &to_json(&p)?)?;
    Ok(())
}

#[derive(Serialize)]
struct TableOutput {
    template: CfTemplate,
    ordering: OrderingSpec,
    table: CfTable,
    residuals: Residuals,
}

fn cmd_table(a: TableArgs) -> Outcome {
    let loaded = load_source(&a.source)?;
    let template = CfTemplate {
        evidence_outcome: a.evidence,
        target: EventSpec {
            op: a.op,
            value: a.value,
        },
    };
    let (t, o) = (&a.source.roles.treatment, &a.source.roles.outcome);
    let (source, ord, n, seed) = match &loaded {
        Loaded::Scm(scm) => {
            let ord = load_ordering(a.ordering.as_deref(), || scm_identity(scm, t, o))?;
            match a.method {
                Method::Exact => (Source::Scm(scm), ord, 0, 0),
                Method::TwinMc => (Source::ScmMc(scm), ord, a.n, need_seed(a.seed, "--method twin-mc")?),
                Method::Aap => return Err(Failure::Usage("--method aap is not available for tables".into())),
            }
        }
        Loaded::Model(model, data, cols) => {
            let ord = load_ordering(a.ordering.as_deref(), || {
                Ok(OrderingSpec::identity(
                    &cols.treatment,
                    &cols.outcome,
                    model.config.n_treatments as u32,
                    model.config.n_outcomes as u32,
                ))
            })?;
            let seed = need_seed(a.seed, "a trained model")?;
            (Source::Model { model, data, cols }, ord, a.n, seed)
        }
    };
    let table = counterfactual_table(&source, &template, &ord, n, rng::split(seed, 0))?;
    let residuals = forbidden_residuals(&source, &ord, n, rng::split(seed, 1))?;
    if let Some(p) = &a.out {
        table.write_csv(fs::File::create(sibling(p, "table.csv")).map_err(Error::from)?)?;
        residuals.write_csv(fs::File::create(sibling(p, "residuals.csv")).map_err(Error::from)?)?;
    }
    let out = TableOutput {
        template,
        ordering: ord,
        table,
        residuals,
    };
    emit(a.out.as_deref(), &to_json(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct BenchSummary {
    queries: usize,
    all_agree: bool,
    total_ms: f64,
}

fn cmd_bench(a: BenchArgs) -> Outcome {
    let scm = load_scm(&a.scm)?;
    let queries: Vec<(String, CounterfactualQuery)> = match &a.query {
        Some(p) => {
            let list: Vec<CounterfactualQuery> = serde_json::from_str(&read(p)?).map_err(Error::from)?;
            list.into_iter().enumerate().map(|(i, q)| (format!("q{i}"), q)).collect()
        }
        None => (0..a.count)
            .map(|i| (format!("q{i}"), random_query(&scm, rng::split(a.seed, i as u64))))
            .collect(),
    };
    for (_, q) in &queries {
        q.validate(&scm)?;
    }
    let report = bench_compare(&scm, &queries, a.n, a.seed)?;
    match &a.out {
        Some(p) => {
            report.write_jsonl(fs::File::create(p).map_err(Error::from)?)?;
            let summary = BenchSummary {
                queries: queries.len(),
                all_agree: report.all_agree(),
                total_ms: report.lines.iter().map(|l| l.wall_ms).sum(),
            };
            emit(None, &to_json(&summary)?)?;
        }
        None => report.write_jsonl(std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Outcome {
    let text = read(&a.input)?;
    let (rendered, violations) = render_report(&text, a.gate)?;
    emit(None, &rendered)?;
    if a.gate.is_some() && violations > 0 {
        return Err(Failure::Exit(1));
    }
    Ok(())
}

/// Renders table and residual JSON as aligned text. Returns the text and
/// the number of forbidden cells above `gate`.
pub fn render_report(text: &str, gate: Option<f64>) -> Result<(String, usize)> {
    if text.trim().is_empty() {
        return Ok(("no rows\n".into(), 0));
    }
    let v: Value = serde_json::from_str(text)?;
    let bad = || Error::InvalidData("expected a table, residuals, or table output".into());
    let obj = v.as_object().ok_or_else(bad)?;
    let (table, residuals) = if obj.contains_key("table") || obj.contains_key("residuals") {
        (obj.get("table").cloned(), obj.get("residuals").cloned())
    } else if obj.contains_key("entries") {
        (Some(v.clone()), None)
    } else if obj.contains_key("blocks") {
        (None, Some(v.clone()))
    } else {
        return Err(bad());
    };
    let table: Option<CfTable> = table.map(serde_json::from_value).transpose()?;
    let residuals: Option<Residuals> = residuals.map(serde_json::from_value).transpose()?;

    let mut out = String::new();
    let mut flagged = 0;
    if let Some(t) = table.filter(|t| !t.treatments.is_empty()) {
        out += &render_table(&t);
    }
    if let Some(r) = residuals.filter(|r| !r.blocks.is_empty()) {
        let (s, n) = render_residuals(&r, gate);
        out += &s;
        flagged = n;
    }
    if out.is_empty() {
        out = "no rows\n".into();
    }
    Ok((out, flagged))
}

fn cell(e: &Option<Estimate>) -> String {
    match e {
        Some(e) => format!("{:.4} ± {:.4}", e.value, e.stderr),
        None => "-".into(),
    }
}

fn grid(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .map(|r| r[c].chars().count())
                .chain([header[c].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |r: &[String]| {
        let cells: Vec<String> = r.iter().zip(&width).map(|(s, &w)| format!("{s:>w$}")).collect();
        cells.join("  ").trim_end().to_string() + "\n"
    };
    let mut s = line(&header);
    for r in &rows {
        s += &line(r);
    }
    s
}

fn render_table(t: &CfTable) -> String {
    let mut header = vec!["T\\T'".to_string()];
    header.extend(t.treatments.iter().map(|c| c.to_string()));
    let rows = t
        .treatments
        .iter()
        .zip(&t.entries)
        .map(|(code, row)| std::iter::once(code.to_string()).chain(row.iter().map(cell)).collect())
        .collect();
    format!("counterfactual table\n{}dominance {:.4}\n", grid(header, rows), t.dominance)
}

fn render_residuals(r: &Residuals, gate: Option<f64>) -> (String, usize) {
    let mut out = String::new();
    let mut flagged = 0;
    for b in &r.blocks {
        out += &format!("\nresiduals P(Y_{} | Y_{}), x_i = {}, x_j = {}\n", b.x_j, b.x_i, b.x_i, b.x_j);
        let mut header = vec!["y".to_string()];
        header.extend(r.outcomes.iter().map(|c| c.to_string()));
        let rows = b
            .matrix
            .iter()
            .enumerate()
            .map(|(h, row)| {
                let mut cells = vec![r.outcomes[h].to_string()];
                for (l, e) in row.iter().enumerate() {
                    let mut s = cell(e);
                    let hit = l > h && gate.is_some_and(|g| e.is_some_and(|e| e.value > g));
                    if hit {
                        flagged += 1;
                        s = format!("*{s}*");
                    }
                    cells.push(s);
                }
                cells
            })
            .collect();
        out += &grid(header, rows);
    }
    if let Some(g) = gate {
        out += &format!("\n{flagged} forbidden cell(s) above gate {g}\n");
    }
    (out, flagged)
}
