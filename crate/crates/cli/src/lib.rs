//! Command-line front end: subcommand parsing, suite orchestration and
//! report rendering. `main.rs` only forwards process arguments to [`execute`].

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcrystal::coalgebra::{coproduct_paths, coproduct_paths_ordered, CoproductMode, IndexPath, SplitOrder};
use qcrystal::coxeter::{bruhat_leq, longest_permutation, longest_word, normal_form, Permutation, ReducedWord};
use qcrystal::crystal::{
    braid_equivalence_check, convergence_deficit, deficit_table_csv, distance_up_to_unit,
    evaluate_kernel_element, factorization_check, p0_tensor, BraidOptions, DeficitReport,
    IDENTITY_TOLERANCE,
};
use qcrystal::fock::{FockError, TensorTermSum, MAX_SECTION_DIM};
use qcrystal::reps::{unitarity_residuals, RepSpec, TorusPoint};
use qcrystal::soibelman::{block_deficit_sup, torus_grid};
use qcrystal::spectrum::{fiber, non_hausdorff_witness, specialization_edges, to_adjacency, to_dot, RepLabel};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

/// Environment variable holding the default thread budget.
pub const THREADS_ENV: &str = "QCRYSTAL_THREADS";

/// Interior-entry tolerance for the unitarity relations.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Deformation parameter of the `q > 0` verification suites when none is given.
pub const DEFAULT_VERIFY_Q: f64 = 0.3;

#[derive(Debug, Parser)]
#[command(name = "qcrystal", version, about = "Crystal-limit verification workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Staircase normal form of a one-line permutation or of --word.
    NormalForm {
        /// One-line permutation, e.g. "3 2 1"; its rank overrides --n.
        permutation: Option<String>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Upper bounds of the deficit norms, one row per q.
    DeficitTable {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Runs the braid, factorization, kernel, unitarity and coassociativity suites.
    Verify {
        /// Test hook: negates one side of the reflection identity.
        #[arg(long = "inject-braid-sign-flip", hide = true)]
        inject_braid_sign_flip: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Specialization graph of representation labels.
    SpectrumGraph {
        /// JSON array of {"t": [[re, im], ...], "w": [one-line images]}.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Keep only covering edges.
        #[arg(long)]
        reduce: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Dot,
}

/// Raw flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Rank: permutations of 1..=n+1.
    #[arg(long)]
    pub n: Option<usize>,
    /// Section size (default 8 for n <= 2, 4 for n = 3, 2 beyond).
    #[arg(long = "dim")]
    pub dim: Option<usize>,
    /// Deformation parameter in [0, 1); repeat for several values.
    #[arg(long = "q")]
    pub q: Vec<f64>,
    /// Reduced word as comma-separated letters, e.g. "1,2,1".
    #[arg(long)]
    pub word: Option<String>,
    /// Points per circle of the torus grid.
    #[arg(long = "torus-grid")]
    pub torus_grid: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides the environment default.
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

/// Validated run configuration. Reports depend only on this value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub d: usize,
    pub q: Vec<f64>,
    pub torus_grid: usize,
    pub word: Option<ReducedWord>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

/// Default section size for rank `n`.
pub fn default_section_size(n: usize) -> usize {
    match n {
        0..=2 => 8,
        3 => 4,
        _ => 2,
    }
}

impl RunConfig {
    /// Defaults: `n = 2`, one torus point, the given format.
    pub fn new(n: usize) -> Self {
        RunConfig {
            n,
            d: default_section_size(n),
            q: Vec::new(),
            torus_grid: 1,
            word: None,
            format: Format::Json,
            out: None,
            threads: None,
        }
    }

    /// Applies flags over `defaults` and checks `n >= 1`, `d >= 2`,
    /// `q ∈ [0, 1)`, a positive grid and a reduced word of rank `n`.
    pub fn resolve(args: &ConfigArgs, defaults: RunConfig) -> Result<Self, CliError> {
        let n = args.n.unwrap_or(defaults.n);
        if n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        let d = args.dim.unwrap_or(default_section_size(n));
        if d < 2 {
            return Err(CliError::Usage(format!("--dim must be at least 2, got {d}")));
        }
        if let Some(q) = args.q.iter().find(|&&q| !(0.0..1.0).contains(&q)) {
            return Err(CliError::Usage(format!("--q {q} outside [0, 1)")));
        }
        let torus_grid = args.torus_grid.unwrap_or(defaults.torus_grid);
        if torus_grid == 0 {
            return Err(CliError::Usage("--torus-grid must be positive".into()));
        }
        if args.threads == Some(0) {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        let word = args.word.as_deref().map(|s| ReducedWord::parse(n, s).map_err(usage)).transpose()?;
        Ok(RunConfig {
            n,
            d,
            q: if args.q.is_empty() { defaults.q } else { args.q.clone() },
            torus_grid,
            word,
            format: args.format.unwrap_or(defaults.format),
            out: args.out.clone(),
            threads: args.threads,
        })
    }

    /// `--word`, or the longest word.
    pub fn word_or_longest(&self) -> Result<ReducedWord, CliError> {
        match &self.word {
            Some(w) => Ok(w.clone()),
            None => longest_word(self.n).word(self.n).map_err(usage),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

/// Result of one invocation: exit code, report text and diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> Execution
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Execution { code: EXIT_USAGE, stdout: String::new(), stderr: text }
            } else {
                Execution { code: EXIT_PASS, stdout: text, stderr: String::new() }
            };
        }
    };
    match run(&cli) {
        Ok((code, report)) => Execution { code, stdout: report, stderr: String::new() },
        Err(e) => Execution { code: e.exit_code(), stdout: String::new(), stderr: format!("qcrystal: {e}\n") },
    }
}

type Job = Box<dyn Fn(&RunConfig) -> Result<(i32, String), CliError> + Sync>;

/// Runs a parsed command on a pool of `--threads` workers. With `--out` the
/// report goes to the file and the returned text is empty.
pub fn run(cli: &Cli) -> Result<(i32, String), CliError> {
    let defaults = |format, torus_grid| RunConfig { format, torus_grid, ..RunConfig::new(2) };
    let (config, job): (RunConfig, Job) =
        match &cli.command {
            Command::NormalForm { permutation, config } => {
                let p = permutation.clone();
                (RunConfig::resolve(config, defaults(Format::Json, 1))?, Box::new(move |c| cmd_normal_form(c, p.as_deref())))
            }
            Command::DeficitTable { config } => {
                (RunConfig::resolve(config, defaults(Format::Json, 1))?, Box::new(cmd_deficit_table))
            }
            Command::Verify { inject_braid_sign_flip, config } => {
                let opts = BraidOptions { inject_sign_flip: *inject_braid_sign_flip };
                let c = RunConfig::resolve(config, defaults(Format::Json, 2))?;
                (c, Box::new(move |c| cmd_verify(c, opts)))
            }
            Command::SpectrumGraph { labels, reduce, config } => {
                let (labels, reduce) = (labels.clone(), *reduce);
                let c = RunConfig::resolve(config, defaults(Format::Dot, 1))?;
                (c, Box::new(move |c| cmd_spectrum_graph(c, labels.as_deref(), reduce)))
            }
        };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = config.threads {
        pool = pool.num_threads(k);
    }
    let pool = pool.build().map_err(|e| CliError::Resource(e.to_string()))?;
    let (code, report) = pool.install(|| job(&config))?;
    match &config.out {
        Some(path) => {
            std::fs::write(path, &report)?;
            Ok((code, String::new()))
        }
        None => Ok((code, report)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Section budget overruns become resource errors, everything else usage errors.
fn classify<E: std::fmt::Display + std::fmt::Debug>(e: E) -> CliError {
    if format!("{e:?}").contains("SectionTooLarge") {
        CliError::Resource(e.to_string())
    } else {
        CliError::Usage(e.to_string())
    }
}

/// Normal form of `permutation`, or of `--word` when no permutation is given.
pub fn cmd_normal_form(config: &RunConfig, permutation: Option<&str>) -> Result<(i32, String), CliError> {
    let w = match (permutation, &config.word) {
        (Some(p), None) => p.parse::<Permutation>().map_err(usage)?,
        (None, Some(word)) => word.permutation(),
        _ => return Err(CliError::Usage("give exactly one of PERMUTATION or --word".into())),
    };
    let nf = normal_form(&w);
    let report = match config.format {
        Format::Json => to_json(&json!({
            "schema": "qcrystal.normal-form/1",
            "n": w.rank(),
            "permutation": w.images(),
            "normal_form": nf.segments().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
            "word": nf.expand(),
            "length": w.length(),
        })),
        Format::Csv => {
            let mut s = String::from("a,b\n");
            for (a, b) in nf.segments() {
                s.push_str(&format!("{a},{b}\n"));
            }
            s
        }
        Format::Dot => return Err(CliError::Usage("normal-form writes json or csv".into())),
    };
    Ok((EXIT_PASS, report))
}

#[derive(Debug, Serialize)]
struct DeficitTable<'a> {
    schema: &'static str,
    config: &'a RunConfig,
    word: Vec<usize>,
    t_independent: bool,
    rows: Vec<DeficitReport>,
}

/// One row per `q`; with a torus grid of `m > 1` points per circle each cell
/// is the supremum over the grid.
pub fn cmd_deficit_table(config: &RunConfig) -> Result<(i32, String), CliError> {
    if config.q.is_empty() {
        return Err(CliError::Usage("at least one --q is required".into()));
    }
    if let Some(q) = config.q.iter().find(|&&q| q == 0.0) {
        return Err(CliError::Usage(format!("deficits need q > 0, got {q}")));
    }
    let (n, d) = (config.n, config.d);
    let word = config.word_or_longest()?;
    if (d as u128).pow(word.len() as u32) > MAX_SECTION_DIM as u128 {
        let e = FockError::SectionTooLarge { d, slots: word.len(), budget: MAX_SECTION_DIM };
        return Err(CliError::Resource(e.to_string()));
    }
    let grid = torus_grid(n, config.torus_grid).map_err(usage)?;
    let mut rows = Vec::with_capacity(config.q.len());
    let mut t_independent = true;
    for &q in &config.q {
        if config.torus_grid == 1 {
            rows.push(convergence_deficit(&TorusPoint::identity(n), &word, q, d).map_err(classify)?);
            continue;
        }
        let r = block_deficit_sup(&grid, std::slice::from_ref(&word), q, d).map_err(classify)?;
        t_independent &= r.t_independent;
        let mut row = r.reference[0].clone();
        row.generators = r.generators;
        row.max_lower = r.sup_lower;
        row.max_upper = r.sup_upper;
        rows.push(row);
    }
    let report = match config.format {
        Format::Json => to_json(&DeficitTable {
            schema: "qcrystal.deficit-table/1",
            config,
            word: word.letters().to_vec(),
            t_independent,
            rows,
        }),
        Format::Csv => deficit_table_csv(&rows),
        Format::Dot => return Err(CliError::Usage("deficit-table writes json or csv".into())),
    };
    Ok((EXIT_PASS, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub pass: bool,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub n: usize,
    pub d: usize,
    pub q: f64,
    pub torus_grid: usize,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

/// Torus point `(e^{0.7i}, e^{1.4i}, ...)` used where one generic label suffices.
pub fn probe_point(n: usize) -> TorusPoint {
    let angles: Vec<f64> = (1..=n).map(|k| 0.7 * k as f64).collect();
    TorusPoint::from_angles(&angles)
}

fn suite(name: &'static str, tolerance: f64, results: Vec<(String, f64, bool)>) -> SuiteResult {
    let max_residual = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let failures: Vec<String> = results.iter().filter(|r| !r.2).map(|r| r.0.clone()).collect();
    SuiteResult { name, pass: failures.is_empty(), cases: results.len(), max_residual, tolerance, failures }
}

pub fn braid_suite(n: usize, d: usize, q: f64, opts: BraidOptions) -> Result<SuiteResult, CliError> {
    let mut results = Vec::new();
    for q in [0.0, q] {
        let r = braid_equivalence_check(q, d, n, opts).map_err(classify)?;
        for c in &r.reflection {
            let label = format!("reflection q={q} window={} z{}{}", c.window, c.i, c.j);
            results.push((label, c.residual, c.residual <= r.tolerance));
        }
        for c in &r.flip {
            let label = format!("flip q={q} {:?}/{:?} z{}{}", c.left, c.right, c.i, c.j);
            results.push((label, c.residual, c.residual <= r.tolerance));
        }
    }
    Ok(suite("braid", IDENTITY_TOLERANCE, results))
}

pub fn factorization_suite(n: usize, d: usize, q: f64) -> Result<SuiteResult, CliError> {
    let perms = Permutation::all(n);
    let mut pairs = Vec::new();
    for w in &perms {
        for u in &perms {
            if bruhat_leq(u, w).map_err(usage)? {
                pairs.push((u.clone(), w.clone()));
            }
        }
    }
    let t = probe_point(n);
    let results = pairs
        .par_iter()
        .flat_map_iter(|(u, w)| [0.0, q].into_iter().map(move |q| (u, w, q)))
        .map(|(u, w, q)| {
            let r = factorization_check(u, w, &t, q, d).map_err(classify)?;
            Ok((format!("u={u} w={w} q={q}"), r.max_residual, r.pass))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(suite("factorization", IDENTITY_TOLERANCE, results))
}

pub fn kernel_suite(n: usize, d: usize, grid_m: usize) -> Result<SuiteResult, CliError> {
    let mut points = torus_grid(n, grid_m).map_err(usage)?.points;
    points.push(probe_point(n));
    let top = longest_permutation(n);
    let mut cases = Vec::new();
    for t in &points {
        for w in Permutation::all(n) {
            cases.push((t.clone(), w));
        }
    }
    let results = cases
        .par_iter()
        .map(|(t, w)| {
            let word = normal_form(w).word(n).map_err(usage)?;
            let slots = word.len();
            let spec = RepSpec::new(t.clone(), word, 0.0).map_err(usage)?;
            let e = evaluate_kernel_element(&spec, d).map_err(classify)?;
            let label = format!("w={w} t={:?}", t.coords().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
            if *w == top {
                let p0 = p0_tensor(slots).section(d).map_err(classify)?;
                let dist = distance_up_to_unit(&e.image.section(d).map_err(classify)?, &p0);
                Ok((label, dist, dist <= IDENTITY_TOLERANCE && e.bounds.lower > 0.5))
            } else {
                Ok((label, e.bounds.upper, e.bounds.upper <= IDENTITY_TOLERANCE))
            }
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(suite("kernel", IDENTITY_TOLERANCE, results))
}

/// Largest entry of a residual over multi-indices with all slots below `d - L`.
fn interior_max(ts: &TensorTermSum, d: usize) -> Result<f64, CliError> {
    let s = ts.section(d).map_err(classify)?;
    let idx = s.index();
    let limit = d.saturating_sub(ts.slots());
    let inside = |k: usize| idx.decode(k).iter().all(|&x| x < limit);
    let mut worst: f64 = 0.0;
    for col in (0..s.dim()).filter(|&c| inside(c)) {
        for &(row, v) in s.column(col) {
            if inside(row) {
                worst = worst.max(v.norm());
            }
        }
    }
    Ok(worst)
}

pub fn unitarity_suite(n: usize, d: usize, q: f64, t: &TorusPoint) -> Result<SuiteResult, CliError> {
    let mut cases = Vec::new();
    for w in Permutation::all(n) {
        for i in 1..=n + 1 {
            for j in 1..=n + 1 {
                cases.push((w.clone(), i, j));
            }
        }
    }
    let results = cases
        .par_iter()
        .map(|(w, i, j)| {
            let word = normal_form(w).word(n).map_err(usage)?;
            let spec = RepSpec::new(t.clone(), word, q).map_err(usage)?;
            let (cols, rows) = unitarity_residuals(&spec, *i, *j).map_err(classify)?;
            let r = interior_max(&cols, d)?.max(interior_max(&rows, d)?);
            Ok((format!("w={w} ({i},{j})"), r, r <= UNITARITY_TOLERANCE))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(suite("unitarity", UNITARITY_TOLERANCE, results))
}

fn sorted(mut v: Vec<IndexPath>) -> Vec<IndexPath> {
    v.sort();
    v
}

/// Exact multiset equality of both iteration orders, for every rank up to
/// `n`, generator and leg count up to `max_legs`.
pub fn coassociativity_suite(n: usize, max_legs: usize) -> Result<SuiteResult, CliError> {
    let mut results = Vec::new();
    for rank in 1..=n {
        for i in 1..=rank + 1 {
            for j in 1..=rank + 1 {
                for l in 1..=max_legs {
                    let mode = CoproductMode::Crystal;
                    let left = coproduct_paths_ordered(i, j, l, mode, rank, SplitOrder::LeftToRight).map_err(usage)?;
                    let right = coproduct_paths_ordered(i, j, l, mode, rank, SplitOrder::RightToLeft).map_err(usage)?;
                    let generic: BTreeSet<IndexPath> =
                        coproduct_paths(i, j, l, CoproductMode::Generic, rank).map_err(usage)?.into_iter().collect();
                    let contained = left.iter().all(|p| generic.contains(p));
                    let equal = sorted(left) == sorted(right);
                    let ok = equal && contained;
                    results.push((format!("n={rank} z{i}{j} l={l}"), if ok { 0.0 } else { 1.0 }, ok));
                }
            }
        }
    }
    Ok(suite("coassociativity", 0.0, results))
}

/// All suites for one configuration, in a fixed order.
pub fn verify_report(
    n: usize,
    d: usize,
    q: f64,
    grid_m: usize,
    opts: BraidOptions,
) -> Result<VerifyReport, CliError> {
    let unitarity_t = probe_point(n);
    let suites = vec![
        braid_suite(n, d, q, opts)?,
        factorization_suite(n, d, q)?,
        kernel_suite(n, d, grid_m)?,
        unitarity_suite(n, d, q, &unitarity_t)?,
        coassociativity_suite(n, 5)?,
    ];
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport { schema: "qcrystal.verify/1", n, d, q, torus_grid: grid_m, suites, pass })
}


/// Exit 0 iff every suite passes. The `q > 0` suites use the first `--q`,
/// or [`DEFAULT_VERIFY_Q`].
pub fn cmd_verify(config: &RunConfig, opts: BraidOptions) -> Result<(i32, String), CliError> {
    let q = match config.q.as_slice() {
        [] => DEFAULT_VERIFY_Q,
        [q] => *q,
        _ => return Err(CliError::Usage("verify takes a single --q".into())),
    };
    if config.format != Format::Json {
        return Err(CliError::Usage("verify writes json only".into()));
    }
    let report = verify_report(config.n, config.d, q, config.torus_grid, opts)?;
    let code = if report.pass { EXIT_PASS } else { EXIT_FAIL };
    Ok((code, to_json(&report)))
}

/// Graph of `labels` (a JSON file), or of the fiber over `t_0` when absent.
/// The non-Hausdorff witness is annotated when both of its labels are present.
pub fn cmd_spectrum_graph(
    config: &RunConfig,
    labels: Option<&std::path::Path>,
    reduce: bool,
) -> Result<(i32, String), CliError> {
    let labels: Vec<RepLabel> = match labels {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => fiber(&TorusPoint::identity(config.n)),
    };
    let edges = specialization_edges(&labels, reduce).map_err(usage)?;
    let witness = labels.first().and_then(|l| non_hausdorff_witness(l.t.rank()).ok()).and_then(|(top, low)| {
        let a = labels.iter().position(|l| *l == top)?;
        let b = labels.iter().position(|l| *l == low)?;
        Some((a, b))
    });
    let report = match config.format {
        Format::Dot => to_dot(&labels, &edges, witness),
        Format::Json => to_json(&json!({
            "schema": "qcrystal.spectrum-graph/1",
            "nodes": to_adjacency(&labels, &edges),
            "witness": witness.map(|(a, b)| [labels[a].node_id(), labels[b].node_id()]),
        })),
        Format::Csv => return Err(CliError::Usage("spectrum-graph writes dot or json".into())),
    };
    Ok((EXIT_PASS, report))
}
