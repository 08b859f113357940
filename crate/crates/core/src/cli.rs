//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage or validation errors, 2 when a
//! verification check fails. Relative output paths are resolved against
//! `SPARSE_CODED_OUT_DIR` when it is set; `SPARSE_CODED_EXHAUSTIVE_CAP`
//! overrides the subset cap for exhaustive searches.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::encoder::{encode_job, EncodingPlan, Family, PlanSpec, Product, Scheme};
use crate::error::{Error, Result};
use crate::mtx;
use crate::oracle::{claim_bounds_check, exhaustive_decodability, hall_check};
use crate::simulator::{compare_schemes, summarize, write_csv, CompareConfig, DelayModel};
use crate::sparse::random_sparse;
use crate::stability::{best_of_trials, kappa_worst, KappaMode, KappaOptions, DEFAULT_EXHAUSTIVE_CAP, DEFAULT_SAMPLES};
use crate::weights::{baseline_weight_cyclic, min_weight, split_weight_mm};

pub const OUT_DIR_ENV: &str = "SPARSE_CODED_OUT_DIR";
pub const CAP_ENV: &str = "SPARSE_CODED_EXHAUSTIVE_CAP";

#[derive(Parser, Debug)]
#[command(name = "coded-matmul", version, about = "Sparse straggler-resilient coded matrix computation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build an encoding plan and write it as JSON.
    Plan(PlanArgs),
    /// Encode input matrices with a plan and write one file per coded block.
    Encode(EncodeArgs),
    /// Simulate straggling workers for several schemes and write a CSV.
    Simulate(SimulateArgs),
    /// Worst-case condition number over straggler patterns.
    Kappa(KappaArgs),
    /// Encoding weights of the proposed scheme, the cyclic baseline and the lower bound.
    CompareWeights(WeightArgs),
    /// Check decodability and the union bounds of a plan.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Mv,
    Mm,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SchemeArg {
    Proposed,
    Poly,
    DenseRandom,
    Cyclic,
}

impl From<SchemeArg> for Family {
    fn from(s: SchemeArg) -> Family {
        match s {
            SchemeArg::Proposed => Family::Proposed,
            SchemeArg::Poly => Family::Poly,
            SchemeArg::DenseRandom => Family::DenseRandom,
            SchemeArg::Cyclic => Family::Cyclic,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct SystemArgs {
    #[arg(long, value_enum, default_value = "mv")]
    mode: Mode,
    /// Total workers; must equal k + s when given.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "ka")]
    k_a: usize,
    #[arg(long = "kb", default_value_t = 1)]
    k_b: usize,
    #[arg(long)]
    s: usize,
}

impl SystemArgs {
    fn spec(&self, family: Family) -> Result<PlanSpec> {
        let spec = match self.mode {
            Mode::Mv => {
                if self.k_b != 1 {
                    return Err(Error::InvalidParameters("--kb only applies to --mode mm".into()));
                }
                PlanSpec::mv(family, self.k_a, self.s)
            }
            Mode::Mm => PlanSpec::mm(family, self.k_a, self.k_b, self.s),
        };
        if let Some(n) = self.n {
            if n != spec.n() {
                return Err(Error::InvalidParameters(format!("--n {n} but k + s = {}", spec.n())));
            }
        }
        Ok(spec)
    }

    fn product(&self) -> Product {
        match self.mode {
            Mode::Mv => Product::MatVec,
            Mode::Mm => Product::MatMat,
        }
    }
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, default_value = "proposed")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Matrix Market file for A; synthetic when omitted.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Matrix Market file for B.
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    rows: usize,
    #[arg(long = "cols-a", default_value_t = 360)]
    cols_a: usize,
    #[arg(long = "cols-b", default_value_t = 240)]
    cols_b: usize,
    #[arg(long, default_value_t = 0.02)]
    density: f64,
    #[arg(long = "data-seed", default_value_t = 1)]
    data_seed: u64,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Directory for the coded blocks.
    #[arg(long = "out-dir", default_value = "encoded")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["proposed", "poly", "dense-random", "cyclic"])]
    schemes: Vec<SchemeArg>,
    #[command(flatten)]
    data: DataArgs,
    /// First seed; runs use seed, seed + 1, ...
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 1e6)]
    rate: f64,
    #[arg(long, default_value_t = 1.0)]
    shift: f64,
    /// Workers forced to be slow.
    #[arg(long, value_delimiter = ',')]
    slow: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    slowdown: f64,
    /// CSV output; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct KappaArgs {
    /// Plan file; otherwise the plan is built from the system flags.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "ka")]
    k_a: Option<usize>,
    #[arg(long = "kb", default_value_t = 1)]
    k_b: usize,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, value_enum, default_value = "proposed")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Keep the best of this many coefficient draws (seeds seed, seed + 1, ...).
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Sample this many subsets instead of enumerating all of them.
    #[arg(long, conflicts_with = "exhaustive")]
    samples: Option<usize>,
    /// Enumerate every subset (the default when under the cap).
    #[arg(long)]
    exhaustive: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Cases {
    Reference,
}

#[derive(Args, Debug)]
struct WeightArgs {
    /// Bundled parameter sets.
    #[arg(long, value_enum, conflicts_with_all = ["n", "s"])]
    cases: Option<Cases>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    /// Matrix-matrix factorization of k; matrix-vector when omitted.
    #[arg(long = "ka")]
    k_a: Option<usize>,
    #[arg(long = "kb")]
    k_b: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Also run the decodability test on every k-subset.
    #[arg(long)]
    exhaustive: bool,
    /// Seed for sampled levels of the union checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Outcome {
    Ok,
    VerificationFailed,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::VerificationFailed) => 2,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Plan(a) => cmd_plan(a, out),
        Command::Encode(a) => cmd_encode(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
        Command::Kappa(a) => cmd_kappa(a, out),
        Command::CompareWeights(a) => cmd_weights(a, out),
        Command::Verify(a) => cmd_verify(a, out),
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn exhaustive_cap() -> Result<u128> {
    match std::env::var(CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameters(format!("{CAP_ENV} must be an integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_EXHAUSTIVE_CAP),
    }
}

/// Writes to the resolved file, or to `out` when no path is given.
fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => {
            let p = resolve(p);
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&p, text)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn load_plan(path: &Path) -> Result<EncodingPlan> {
    let text = fs::read_to_string(path)?;
    let plan: EncodingPlan =
        serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
    plan.validate()?;
    Ok(plan)
}

fn cmd_plan(a: PlanArgs, out: &mut dyn Write) -> Result<Outcome> {
    let plan = a.system.spec(a.scheme.into())?.build(a.seed)?;
    emit(a.output.as_deref(), &to_json(&plan)?, out)?;
    Ok(Outcome::Ok)
}

fn load_inputs(d: &DataArgs, product: Product) -> Result<(crate::SparseMatrix, Option<crate::SparseMatrix>)> {
    if !(d.density > 0.0 && d.density <= 1.0) && (d.a.is_none() || (product == Product::MatMat && d.b.is_none())) {
        return Err(Error::InvalidParameters(format!("density must be in (0, 1], got {}", d.density)));
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(d.data_seed);
    let a = match &d.a {
        Some(p) => mtx::load(p)?,
        None => random_sparse(d.rows, d.cols_a, d.density, &mut rng)?,
    };
    let b = match (product, &d.b) {
        (Product::MatVec, _) => None,
        (Product::MatMat, Some(p)) => Some(mtx::load(p)?),
        (Product::MatMat, None) => Some(random_sparse(a.rows(), d.cols_b, d.density, &mut rng)?),
    };
    Ok((a, b))
}

#[derive(Serialize)]
struct EncodeSummary {
    scheme: Scheme,
    seed: u64,
    a_nnz: usize,
    b_nnz: Option<usize>,
    coded_a_nnz: Vec<usize>,
    coded_b_nnz: Option<Vec<usize>>,
    files: Vec<String>,
}

fn cmd_encode(a: EncodeArgs, out: &mut dyn Write) -> Result<Outcome> {
    let plan = load_plan(&a.plan)?;
    let (ma, mb) = load_inputs(&a.data, plan.product())?;
    let job = encode_job(&plan, &ma, mb.as_ref())?;
    let dir = resolve(&a.out_dir);
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for t in &job.tasks {
        let p = dir.join(format!("worker{:03}_a.mtx", t.worker));
        mtx::save(&t.a, &p)?;
        files.push(p.display().to_string());
        if let Some(b) = &t.b {
            let p = dir.join(format!("worker{:03}_b.mtx", t.worker));
            mtx::save(b, &p)?;
            files.push(p.display().to_string());
        }
    }
    let summary = EncodeSummary {
        scheme: plan.scheme,
        seed: plan.seed,
        a_nnz: ma.nnz(),
        b_nnz: mb.as_ref().map(|b| b.nnz()),
        coded_a_nnz: job.tasks.iter().map(|t| t.a.nnz()).collect(),
        coded_b_nnz: mb.as_ref().map(|_| job.tasks.iter().filter_map(|t| t.b.as_ref().map(|b| b.nnz())).collect()),
        files,
    };
    out.write_all(to_json(&summary)?.as_bytes())?;
    Ok(Outcome::Ok)
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    if a.runs == 0 {
        return Err(Error::InvalidParameters("--runs must be at least 1".into()));
    }
    let product = a.system.product();
    let spec = a.system.spec(Family::Proposed)?;
    let (ma, mb) = load_inputs(&a.data, product)?;
    let cfg = CompareConfig {
        product,
        k_a: spec.k_a,
        k_b: spec.k_b,
        s: spec.s,
        density: a.data.density,
        rows: ma.rows(),
        cols_a: ma.cols(),
        cols_b: mb.as_ref().map_or(0, |b| b.cols()),
        families: a.schemes.iter().map(|&s| s.into()).collect(),
        seeds: (a.seed..a.seed + a.runs).collect(),
        delay: DelayModel { rate: a.rate, shift: a.shift, slow_workers: a.slow, slowdown: a.slowdown, ..DelayModel::default() },
    };
    // file inputs stay fixed across seeds; synthetic inputs are regenerated per seed
    let result = if a.data.a.is_some() {
        crate::simulator::compare_on_inputs(&cfg, &fixed_inputs(ma, mb, a.data.data_seed))?
    } else {
        compare_schemes(&cfg)?
    };
    for note in &result.skipped {
        writeln!(err, "skipped {note}")?;
    }
    let mut buf = Vec::new();
    write_csv(&result.rows, &mut buf)?;
    emit(a.output.as_deref(), &String::from_utf8_lossy(&buf), out)?;
    for s in summarize(&result.rows) {
        writeln!(
            err,
            "{:<16} weight {}x{}  flops/worker {:.0}  tx nnz/worker {:.0}  decoded {:.0}%  delay model {}",
            s.scheme,
            s.omega_a,
            s.omega_b,
            s.flops_mean,
            s.tx_nnz_mean,
            100.0 * s.decode_rate,
            cfg.delay.model
        )?;
    }
    Ok(Outcome::Ok)
}

fn fixed_inputs(a: crate::SparseMatrix, b: Option<crate::SparseMatrix>, seed: u64) -> crate::simulator::Inputs {
    use crate::simulator::Inputs;
    match b {
        Some(b) => Inputs::MatMat { a, b },
        None => {
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let x = (0..a.rows()).map(|_| rand::Rng::sample(&mut rng, rand_distr::StandardNormal)).collect();
            Inputs::MatVec { a, x }
        }
    }
}

#[derive(Serialize)]
struct KappaOutput {
    scheme: Scheme,
    n: usize,
    k: usize,
    #[serde(flatten)]
    report: crate::stability::KappaReport,
    trial_kappas: Vec<f64>,
}

fn cmd_kappa(a: KappaArgs, out: &mut dyn Write) -> Result<Outcome> {
    let cap = exhaustive_cap()?;
    let pick_opts = |n: usize, k: usize| -> KappaOptions {
        match a.samples {
            Some(samples) => KappaOptions { cap, ..KappaOptions::sampled(samples, a.seed) },
            None if a.exhaustive || crate::subsets::binomial(n, k) <= cap => {
                KappaOptions { cap, ..KappaOptions::exhaustive() }
            }
            None => KappaOptions { cap, ..KappaOptions::sampled(DEFAULT_SAMPLES, a.seed) },
        }
    };
    let (plan, report, trial_kappas) = if let Some(path) = &a.plan {
        let plan = load_plan(path)?;
        let report = kappa_worst(&plan, &pick_opts(plan.n, plan.k()))?;
        let tk = vec![report.kappa_worst];
        (plan, report, tk)
    } else {
        let missing = |f: &str| Error::InvalidParameters(format!("--{f} is required without --plan"));
        let system = SystemArgs {
            mode: a.mode.unwrap_or(Mode::Mv),
            n: a.n,
            k_a: a.k_a.ok_or_else(|| missing("ka"))?,
            k_b: a.k_b,
            s: a.s.ok_or_else(|| missing("s"))?,
        };
        let spec = system.spec(a.scheme.into())?;
        let opts = pick_opts(spec.n(), spec.k());
        let outcome = best_of_trials(&spec, a.trials, a.seed, &opts)?;
        (outcome.plan, outcome.report, outcome.trial_kappas)
    };
    if let KappaMode::Sampled { samples } = report.mode {
        if samples == 0 {
            return Err(Error::InvalidParameters("--samples must be positive".into()));
        }
    }
    let output = KappaOutput { scheme: plan.scheme, n: plan.n, k: plan.k(), report, trial_kappas };
    emit(a.output.as_deref(), &to_json(&output)?, out)?;
    Ok(Outcome::Ok)
}

/// One row of the weight comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightRow {
    pub case: String,
    pub n: usize,
    pub k_a: usize,
    pub k_b: usize,
    pub s: usize,
    pub proposed: (usize, usize),
    pub cyclic: (usize, usize),
    pub lower_bound: usize,
    pub note: Option<String>,
}

impl WeightRow {
    pub fn triple(&self) -> (usize, usize, usize) {
        (self.proposed.0 * self.proposed.1, self.cyclic.0 * self.cyclic.1, self.lower_bound)
    }
}

/// Weights for a matrix-vector (`k_b = None`) or matrix-matrix system.
pub fn weight_row(case: &str, n: usize, s: usize, k_a: usize, k_b: Option<usize>, note: Option<&str>) -> Result<WeightRow> {
    let k = k_a * k_b.unwrap_or(1);
    if n != k + s {
        return Err(Error::InvalidParameters(format!("n = {n} but k + s = {}", k + s)));
    }
    let lower_bound = min_weight(n, s)?;
    let (proposed, cyclic) = match k_b {
        None => ((lower_bound, 1), baseline_weight_cyclic(k_a, 1, s)?),
        Some(k_b) => (split_weight_mm(k_a, k_b, lower_bound)?, baseline_weight_cyclic(k_a, k_b, s)?),
    };
    Ok(WeightRow {
        case: case.to_string(),
        n,
        k_a,
        k_b: k_b.unwrap_or(1),
        s,
        proposed,
        cyclic,
        lower_bound,
        note: note.map(str::to_string),
    })
}

/// The bundled cases: the three small worked examples, the three bar-chart
/// configurations, and the 42-worker setting used for the communication count.
pub fn reference_cases() -> Result<Vec<WeightRow>> {
    let assumed = "k = k_A·k_B factorization assumed";
    Ok(vec![
        weight_row("example-mv-6", 6, 2, 4, None, None)?,
        weight_row("example-mv-12", 12, 3, 9, None, None)?,
        weight_row("example-mm-20", 20, 4, 4, Some(4), None)?,
        weight_row("bars-mv-30", 30, 9, 21, None, None)?,
        weight_row("bars-mm-36", 36, 8, 4, Some(7), Some(assumed))?,
        weight_row("bars-mm-56", 56, 14, 6, Some(7), Some(assumed))?,
        weight_row("mm-42", 42, 6, 6, Some(6), None)?,
    ])
}

fn render_weights(rows: &[WeightRow]) -> String {
    let mut s = format!(
        "{:<14} {:>3} {:>4} {:>4} {:>3}  {:>9} {:>9} {:>5}  {:<12} {:>6}  {}\n",
        "case", "n", "k_a", "k_b", "s", "proposed", "cyclic", "bound", "triple", "ratio", "note"
    );
    for r in rows {
        let (p, c, b) = r.triple();
        s.push_str(&format!(
            "{:<14} {:>3} {:>4} {:>4} {:>3}  {:>9} {:>9} {:>5}  {:<12} {:>6.3}  {}\n",
            r.case,
            r.n,
            r.k_a,
            r.k_b,
            r.s,
            format!("{}x{}", r.proposed.0, r.proposed.1),
            format!("{}x{}", r.cyclic.0, r.cyclic.1),
            b,
            format!("({p},{c},{b})"),
            p as f64 / c as f64,
            r.note.as_deref().unwrap_or("")
        ));
    }
    s
}

fn cmd_weights(a: WeightArgs, out: &mut dyn Write) -> Result<Outcome> {
    let rows = match (a.cases, a.n, a.s) {
        (Some(Cases::Reference), _, _) => reference_cases()?,
        (None, Some(n), Some(s)) => {
            let k = n.checked_sub(s).ok_or_else(|| Error::InvalidParameters("s exceeds n".into()))?;
            match (a.k_a, a.k_b) {
                (Some(ka), Some(kb)) => vec![weight_row("custom", n, s, ka, Some(kb), None)?],
                (None, None) => vec![weight_row("custom", n, s, k, None, None)?],
                _ => return Err(Error::InvalidParameters("give both --ka and --kb, or neither".into())),
            }
        }
        _ => return Err(Error::InvalidParameters("use --cases reference or give --n and --s".into())),
    };
    let text = if a.json { to_json(&rows)? } else { render_weights(&rows) };
    out.write_all(text.as_bytes())?;
    Ok(Outcome::Ok)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    let plan = load_plan(&a.plan)?;
    let mut ok = true;
    let mut line = |out: &mut dyn Write, name: &str, detail: String, pass: bool| -> Result<()> {
        ok &= pass;
        writeln!(out, "{:<22} {:<52} {}", name, detail, if pass { "PASS" } else { "FAIL" })?;
        Ok(())
    };
    writeln!(out, "plan: {} n={} k={} s={} seed={}", plan.scheme.tag(), plan.n, plan.k(), plan.s, plan.seed)?;

    let coverage = plan.coverage();
    let min_cov = coverage.iter().copied().min().unwrap_or(0);
    line(out, "coverage", format!("min workers per unknown {min_cov}, need {}", plan.s + 1), min_cov > plan.s)?;

    for level in hall_check(&plan, plan.k().min(plan.n), a.seed)? {
        let how = match level.mode {
            crate::oracle::LevelMode::Exhaustive => "all".to_string(),
            crate::oracle::LevelMode::Sampled { samples } => format!("{samples} sampled"),
        };
        let pass = level.pass();
        line(out, &format!("hall m={}", level.m), format!("{how} subsets, min union {}", level.min_union), pass)?;
    }
    if matches!(plan.scheme, Scheme::ProposedMv | Scheme::ProposedMm) {
        for c in claim_bounds_check(&plan, a.seed)? {
            let pass = c.pass();
            let rel = if c.exact.is_some() { "=" } else { ">=" };
            line(
                out,
                &format!("{} m={}", c.claim, c.level.m),
                format!("min union {} {rel} {}", c.level.min_union, c.level.bound),
                pass,
            )?;
        }
    }
    if a.exhaustive {
        let r = exhaustive_decodability(&plan, exhaustive_cap()?)?;
        line(out, "decodability", format!("{} subsets, {} failing", r.subsets, r.failures), r.failures == 0)?;
    }
    writeln!(out, "{}", if ok { "all checks passed" } else { "verification failed" })?;
    Ok(if ok { Outcome::Ok } else { Outcome::VerificationFailed })
}
