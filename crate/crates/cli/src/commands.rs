use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use atbench::howe::{
    self, basis_len, hdn_matrix, weight_zero_len, weight_zero_matrix, RankRecord, DEFAULT_BASIS_CAP,
    DEFAULT_WEIGHT_ZERO_CAP, RANK_SCHEMA_VERSION,
};
use atbench::latin::{census_run, CensusOptions, CensusRecord, EnumerationLimit, CENSUS_SCHEMA_VERSION};
use atbench::poly::{apolar_pair, det_poly, entry_product, perm_poly, SparsePoly};
use atbench::su::{
    integrate_record, mc_projection_power, Integrand, McConfig, McRecord, DEFAULT_CHUNK_SIZE, DEFAULT_SAMPLES,
    DEFAULT_SEED, MC_SCHEMA_VERSION,
};
use atbench::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cache::{cache_key, default_dir, Cache, CACHE_ENV};
use crate::equiv::{equivalence_report, EquivalenceReport, Verdict, EQUIV_SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "atbench", version, about = "Latin square signs, Hadamard-Howe ranks and SU(n) integrals")]
pub struct Cli {
    /// Cache directory (default: $ATBENCH_CACHE_DIR, then <tmp>/atbench-cache)
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,

    /// Neither read nor write the cache
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count Latin squares of order n by sign class
    LatinCensus(CensusArgs),
    /// Alon-Tarsi and column-sign differences for order n
    AtCheck(CensusArgs),
    /// Exact rank of the Hadamard-Howe map h_{d,n}
    HoweRank(RankArgs),
    /// Apolar pairing of two polynomials in the n x n matrix variables
    Pair(PairArgs),
    /// Monte-Carlo Haar integral over SU(n)
    Integrate(IntegrateArgs),
    /// Monte-Carlo projection of g.(e1...en)^n onto the balanced monomials
    Project(ProjectArgs),
    /// Run every statement of the equivalence chain for order n
    Equiv(EquivArgs),
    /// Inspect or clear the result cache
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long)]
    pub n: usize,
    /// Permit order 6
    #[arg(long)]
    pub allow_large: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, default_value_t = 2)]
    pub dim_v: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub n: usize,
    /// Restrict to the weight-zero subspace (dim V = d n)
    #[arg(long)]
    pub weight_zero: bool,
    /// Largest accepted basis size
    #[arg(long)]
    pub cap: Option<usize>,
    /// Raise the weight-zero cap to the basis cap
    #[arg(long)]
    pub allow_large: bool,
    /// Also write the matrix in triplet text form to this file
    #[arg(long)]
    pub triplets: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[arg(long)]
    pub n: usize,
    /// det, perm or entry, with an optional power (perm^4), or file:PATH
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CHUNK_SIZE)]
    pub chunk_size: u64,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[arg(long)]
    pub n: usize,
    /// perm-power or entry-product
    #[arg(long)]
    pub integrand: String,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub n: usize,
    /// Permit n up to 4
    #[arg(long)]
    pub allow_large: bool,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Args)]
pub struct EquivArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    /// Print the cache directory
    Path,
    /// List cached keys
    List,
    /// Remove every entry
    Clear,
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok,
    Other,
    Validation,
    Resource,
    Inconsistent,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Ok => 0,
            ExitStatus::Other => 1,
            ExitStatus::Validation => 2,
            ExitStatus::Resource => 3,
            ExitStatus::Inconsistent => 4,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Inconsistent(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    cache: Cache,
    threads: Option<usize>,
    format: Format,
}

pub fn run(cli: Cli) -> ExitStatus {
    if let Some(t) = cli.threads {
        // A second call within one process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let cache = if cli.no_cache {
        Cache::disabled()
    } else {
        Cache::new(cli.cache_dir.clone().unwrap_or_else(default_dir))
    };
    let ctx = Ctx { cache, threads: cli.threads, format: cli.format };
    let result = match &cli.command {
        Command::LatinCensus(a) => latin_census(&ctx, a),
        Command::AtCheck(a) => at_check(&ctx, a),
        Command::HoweRank(a) => howe_rank(&ctx, a),
        Command::Pair(a) => pair(&ctx, a),
        Command::Integrate(a) => integrate(&ctx, a),
        Command::Project(a) => project(&ctx, a),
        Command::Equiv(a) => equiv(&ctx, a),
        Command::Cache { action } => cache_cmd(&ctx, action),
    };
    match result {
        Ok(()) => ExitStatus::Ok,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Validation(_) => ExitStatus::Validation,
                Error::Resource { .. } => ExitStatus::Resource,
                Error::Contract(_) => ExitStatus::Inconsistent,
            }
        }
        Err(Failure::Inconsistent(msg)) => {
            eprintln!("error: inconsistent results: {msg}");
            ExitStatus::Inconsistent
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitStatus::Other
        }
    }
}

fn emit(record: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{record}");
}

fn to_json<T: Serialize>(v: &T) -> std::result::Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure::Other(format!("serialization failed: {e}")))
}

fn parses_as<T: DeserializeOwned>(s: &str) -> bool {
    serde_json::from_str::<T>(s).is_ok()
}

fn json_only(ctx: &Ctx, what: &str) -> Outcome {
    if ctx.format == Format::Csv {
        return Err(Error::Validation(format!("csv output is available for censuses only, not {what}")).into());
    }
    Ok(())
}

/// Looks up or computes a record, returning its stored text and the parsed
/// value.
fn cached<T: Serialize + DeserializeOwned>(
    ctx: &Ctx,
    key: &str,
    compute: impl FnOnce() -> std::result::Result<T, Failure>,
) -> std::result::Result<(String, T), Failure> {
    let (text, hit) = ctx.cache.get_or_compute(key, parses_as::<T>, || to_json(&compute()?))?;
    if hit {
        eprintln!("cache hit: {key}");
    }
    let value = serde_json::from_str(&text).map_err(|e| Failure::Other(format!("record does not parse: {e}")))?;
    Ok((text, value))
}

fn census_record(ctx: &Ctx, a: &CensusArgs) -> std::result::Result<(String, CensusRecord), Failure> {
    let limit = if a.allow_large { EnumerationLimit::large() } else { EnumerationLimit::default() };
    limit.check(a.n)?;
    let key = cache_key(CENSUS_SCHEMA_VERSION, "latin-census", &[("n", a.n.to_string())]);
    cached(ctx, &key, || {
        let run = census_run(a.n, CensusOptions { limit, threads: ctx.threads })?;
        Ok(CensusRecord::from_run(&run))
    })
}

const CENSUS_CSV_HEADER: &str = "n,total,even,odd,col_even,col_odd,row_even,row_odd,at_difference,col_difference";

fn census_csv(r: &CensusRecord) -> String {
    format!(
        "{CENSUS_CSV_HEADER}\n{},{},{},{},{},{},{},{},{},{}",
        r.n, r.total, r.even, r.odd, r.col_even, r.col_odd, r.row_even, r.row_odd, r.at_difference, r.col_difference
    )
}

fn latin_census(ctx: &Ctx, a: &CensusArgs) -> Outcome {
    let (text, rec) = census_record(ctx, a)?;
    eprintln!(
        "n={}: {} squares, {} even, {} odd, at_difference {}, col_difference {}",
        rec.n, rec.total, rec.even, rec.odd, rec.at_difference, rec.col_difference
    );
    match ctx.format {
        Format::Json => emit(&text),
        Format::Csv => emit(&census_csv(&rec)),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtCheckRecord {
    pub schema_version: u32,
    pub op: String,
    pub n: usize,
    pub at_difference: String,
    pub col_difference: String,
    pub at_nonzero: bool,
    /// `|at_difference| = |col_difference|`
    pub huang_rota: bool,
    pub odd_order: bool,
    pub elapsed_ms: u64,
}

fn at_check(ctx: &Ctx, a: &CensusArgs) -> Outcome {
    let (_, rec) = census_record(ctx, a)?;
    let c = rec.to_census()?;
    let at = c.at_difference();
    let col = c.col_difference();
    let out = AtCheckRecord {
        schema_version: CENSUS_SCHEMA_VERSION,
        op: "at-check".into(),
        n: rec.n,
        at_difference: at.to_string(),
        col_difference: col.to_string(),
        at_nonzero: at != 0.into(),
        huang_rota: num_traits::Signed::abs(&at) == num_traits::Signed::abs(&col),
        odd_order: rec.n % 2 == 1,
        elapsed_ms: rec.elapsed_ms,
    };
    eprintln!(
        "n={}: at_difference {} ({}), |at| = |col|: {}",
        out.n,
        out.at_difference,
        if out.at_nonzero { "nonzero" } else { "zero" },
        out.huang_rota
    );
    match ctx.format {
        Format::Json => emit(&to_json(&out)?),
        Format::Csv => emit(&format!(
            "n,at_difference,col_difference,at_nonzero,huang_rota\n{},{},{},{},{}",
            out.n, out.at_difference, out.col_difference, out.at_nonzero, out.huang_rota
        )),
    }
    if !out.huang_rota {
        return Err(Failure::Inconsistent(format!("|at_difference| != |col_difference| at n = {}", out.n)));
    }
    Ok(())
}

fn howe_rank(ctx: &Ctx, a: &RankArgs) -> Outcome {
    json_only(ctx, "ranks")?;
    let cap = a.cap.unwrap_or(if a.weight_zero && !a.allow_large {
        DEFAULT_WEIGHT_ZERO_CAP
    } else {
        DEFAULT_BASIS_CAP
    });
    if a.d == 0 || a.n == 0 || (!a.weight_zero && a.dim_v == 0) {
        return Err(Error::Validation("dim_v, d and n must be positive".into()).into());
    }
    // Refuse oversized inputs before consulting the cache.
    let size = if a.weight_zero {
        weight_zero_len(a.d, a.n)
    } else {
        basis_len(a.dim_v, a.d, a.n).max(basis_len(a.dim_v, a.n, a.d))
    };
    if size > cap.into() {
        return Err(Error::Resource {
            what: format!("basis of size {size}"),
            detail: format!(
                "cap is {cap}{}",
                if a.weight_zero && !a.allow_large { "; --allow-large raises it" } else { "" }
            ),
        }
        .into());
    }
    let dim_v = if a.weight_zero { a.d * a.n } else { a.dim_v };
    let compute = || -> std::result::Result<RankRecord, Failure> {
        let t = Instant::now();
        let m = if a.weight_zero {
            weight_zero_matrix(a.d, a.n, cap)?
        } else {
            hdn_matrix(a.dim_v, a.d, a.n, cap)?
        };
        if let Some(path) = &a.triplets {
            std::fs::write(path, m.to_triplet_text())
                .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
        }
        let r = m.rank_report()?;
        Ok(RankRecord {
            schema_version: RANK_SCHEMA_VERSION,
            op: "howe-rank".into(),
            dim_v,
            d: a.d,
            n: a.n,
            weight_zero: a.weight_zero,
            rows: r.rows,
            cols: r.cols,
            rank: r.rank,
            injective: r.injective,
            surjective: r.surjective,
            elapsed_ms: t.elapsed().as_millis() as u64,
        })
    };
    let (text, rec) = if a.triplets.is_some() {
        let rec = compute()?;
        (to_json(&rec)?, rec)
    } else {
        let key = cache_key(
            RANK_SCHEMA_VERSION,
            "howe-rank",
            &[
                ("dim_v", dim_v.to_string()),
                ("d", a.d.to_string()),
                ("n", a.n.to_string()),
                ("weight_zero", a.weight_zero.to_string()),
            ],
        );
        cached(ctx, &key, compute)?
    };
    eprintln!(
        "h_{{{},{}}} on dim V = {}{}: {}x{} rank {}{}",
        rec.d,
        rec.n,
        rec.dim_v,
        if rec.weight_zero { " (weight zero)" } else { "" },
        rec.rows,
        rec.cols,
        rec.rank,
        if rec.injective && rec.surjective { ", isomorphism" } else { "" }
    );
    emit(&text);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub schema_version: u32,
    pub op: String,
    pub n: usize,
    pub left: String,
    pub right: String,
    pub value: String,
    pub elapsed_ms: u64,
}

pub const PAIR_SCHEMA_VERSION: u32 = 1;

/// `det`, `perm` or `entry` with an optional power.
fn parse_named(arg: &str) -> std::result::Result<(&str, u32), Failure> {
    let (name, power) = match arg.split_once('^') {
        Some((a, b)) => (a, b.parse::<u32>().map_err(|_| Error::Validation(format!("bad power in {arg:?}")))?),
        None => (arg, 1),
    };
    if !matches!(name, "det" | "perm" | "entry") {
        return Err(Error::Validation(format!("unknown polynomial {name:?}; use det, perm, entry or file:PATH")).into());
    }
    if power == 0 {
        return Err(Error::Validation("powers start at 1".into()).into());
    }
    Ok((name, power))
}

fn build_poly(n: usize, arg: &str, multilinear_only: bool) -> std::result::Result<SparsePoly, Failure> {
    if let Some(path) = arg.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Other(format!("cannot read {path}: {e}")))?;
        return Ok(text.parse()?);
    }
    let (name, power) = parse_named(arg)?;
    let base = match name {
        "det" => det_poly(n),
        "perm" => perm_poly(n),
        _ => entry_product(n),
    };
    Ok(base.pow(power, multilinear_only)?)
}

fn pair(ctx: &Ctx, a: &PairArgs) -> Outcome {
    json_only(ctx, "pairings")?;
    if a.n == 0 || a.n > 6 {
        return Err(Error::Validation("pairings are built for 1 ≤ n ≤ 6".into()).into());
    }
    let is_entry = |s: &str| s == "entry" || s == "entry^1";
    let compute = || -> std::result::Result<PairRecord, Failure> {
        let t = Instant::now();
        // Against the multilinear entry product only multilinear terms matter.
        let left = build_poly(a.n, &a.left, is_entry(&a.right))?;
        let right = build_poly(a.n, &a.right, is_entry(&a.left))?;
        let v = apolar_pair(&left, &right)?;
        Ok(PairRecord {
            schema_version: PAIR_SCHEMA_VERSION,
            op: "pair".into(),
            n: a.n,
            left: a.left.clone(),
            right: a.right.clone(),
            value: v.to_string(),
            elapsed_ms: t.elapsed().as_millis() as u64,
        })
    };
    let from_file = a.left.starts_with("file:") || a.right.starts_with("file:");
    let (text, rec) = if from_file {
        let rec = compute()?;
        (to_json(&rec)?, rec)
    } else {
        parse_named(&a.left)?;
        parse_named(&a.right)?;
        let key = cache_key(
            PAIR_SCHEMA_VERSION,
            "pair",
            &[("n", a.n.to_string()), ("left", a.left.clone()), ("right", a.right.clone())],
        );
        cached(ctx, &key, compute)?
    };
    eprintln!("<{}, {}> at n = {}: {}", rec.left, rec.right, rec.n, rec.value);
    emit(&text);
    Ok(())
}

fn mc_config(ctx: &Ctx, m: &McArgs) -> McConfig {
    McConfig { samples: m.samples, seed: m.seed, chunk_size: m.chunk_size, threads: ctx.threads }
}

fn mc_params(n: usize, m: &McArgs) -> Vec<(&'static str, String)> {
    vec![
        ("n", n.to_string()),
        ("samples", m.samples.to_string()),
        ("seed", m.seed.to_string()),
        ("chunk_size", m.chunk_size.to_string()),
    ]
}

fn integrate(ctx: &Ctx, a: &IntegrateArgs) -> Outcome {
    json_only(ctx, "integrals")?;
    let integrand: Integrand = a.integrand.parse()?;
    let cfg = mc_config(ctx, &a.mc);
    let op = format!("integrate-{}", integrand.name());
    let key = cache_key(MC_SCHEMA_VERSION, &op, &mc_params(a.n, &a.mc));
    let (text, rec): (String, McRecord) = cached(ctx, &key, || Ok(integrate_record(a.n, integrand, &cfg)?))?;
    eprintln!(
        "{} over SU({}): {:.6} {:+.6}i ± ({:.2e}, {:.2e}) from {} samples",
        integrand.name(),
        rec.n,
        rec.mean_re,
        rec.mean_im,
        rec.stderr.re,
        rec.stderr.im,
        rec.samples
    );
    emit(&text);
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedCoefficient {
    pub monomial: String,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// Exact `P*` coefficient where defined.
    pub pstar: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub schema_version: u32,
    pub op: String,
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
    pub coefficients: Vec<ProjectedCoefficient>,
    /// Cosine with the exact `P*` vector; the overall sign is not fixed.
    pub cosine: Option<f64>,
    pub elapsed_ms: u64,
}

fn project(ctx: &Ctx, a: &ProjectArgs) -> Outcome {
    json_only(ctx, "projections")?;
    let cfg = mc_config(ctx, &a.mc);
    let mut params = mc_params(a.n, &a.mc);
    params.push(("allow_large", a.allow_large.to_string()));
    let key = cache_key(MC_SCHEMA_VERSION, "project", &params);
    let (text, rec): (String, ProjectRecord) = cached(ctx, &key, || {
        let t = Instant::now();
        let proj = mc_projection_power(a.n, &cfg, a.allow_large)?;
        let pstar = howe::pstar_coefficients(a.n).ok();
        let coefficients = proj
            .monomials
            .iter()
            .zip(&proj.estimates)
            .map(|(m, e)| ProjectedCoefficient {
                monomial: m.to_string(),
                mean_re: e.mean.re,
                mean_im: e.mean.im,
                stderr_re: e.stderr_re,
                stderr_im: e.stderr_im,
                pstar: pstar.as_ref().map(|p| p.coefficient(m).to_string()),
            })
            .collect();
        Ok(ProjectRecord {
            schema_version: MC_SCHEMA_VERSION,
            op: "project".into(),
            n: a.n,
            samples: cfg.samples,
            seed: cfg.seed,
            chunk_size: cfg.chunk_size,
            coefficients,
            cosine: pstar.map(|_| proj.cosine_to_pstar()).transpose()?,
            elapsed_ms: t.elapsed().as_millis() as u64,
        })
    })?;
    for c in &rec.coefficients {
        eprintln!("{}: {:.6} ± {:.2e}", c.monomial, c.mean_re, c.stderr_re);
    }
    if let Some(cos) = rec.cosine {
        eprintln!("cosine with P*: {cos:.6}");
    }
    emit(&text);
    Ok(())
}

fn equiv(ctx: &Ctx, a: &EquivArgs) -> Outcome {
    json_only(ctx, "equivalence reports")?;
    let cfg = mc_config(ctx, &a.mc);
    let key = cache_key(EQUIV_SCHEMA_VERSION, "equiv", &mc_params(a.n, &a.mc));
    let (text, rep): (String, EquivalenceReport) = cached(ctx, &key, || Ok(equivalence_report(a.n, &cfg)?))?;
    for leg in &rep.legs {
        eprintln!(
            "({}) {:<56} {:<12} {}",
            leg.statement,
            leg.description,
            leg.method.as_str(),
            leg.value.as_deref().unwrap_or("-")
        );
    }
    for c in &rep.cross_checks {
        eprintln!("{}: {} vs {} {}", c.name, c.lhs, c.rhs, if c.holds { "ok" } else { "FAILED" });
    }
    if let Some(note) = &rep.note {
        eprintln!("{note}");
    }
    eprintln!("verdict: {}", serde_json::to_string(&rep.verdict).unwrap_or_default().trim_matches('"'));
    emit(&text);
    if rep.verdict == Verdict::Inconsistent {
        return Err(Failure::Inconsistent(format!("equivalence legs disagree at n = {}", rep.n)));
    }
    Ok(())
}

fn cache_cmd(ctx: &Ctx, action: &CacheAction) -> Outcome {
    match action {
        CacheAction::Path => match ctx.cache.dir() {
            Some(d) => emit(&d.display().to_string()),
            None => eprintln!("cache disabled"),
        },
        CacheAction::List => {
            for key in ctx.cache.list() {
                emit(&key);
            }
        }
        CacheAction::Clear => {
            let removed = ctx.cache.clear();
            eprintln!("removed {removed} entries");
        }
    }
    Ok(())
}
