//! Command-line surface: every library pipeline behind one binary with
//! stable exit codes (0 ok, 2 validation/io/format, 3 capability,
//! 4 budget, 5 invariant breach) and deterministic artifacts.

use clap::{Args, Parser, Subcommand, ValueEnum};
use coarsegeom::cache::{cached_space, content_hash, spec_key, CacheConfig, CacheOutcome};
use coarsegeom::cover::{
    audit_property_c, brick_colored_cover, cover_stats, dimension_profile, exact_dimension_at_scale,
    greedy_colored_cover, property_c_decomposition, set_distance, Cover, GreedyOutcome,
    ProfileStrategy, PropertyCOutcome, PropertyCSchedule, PropertyCStrategy,
};
use coarsegeom::embed::{
    compression_profile, hilbert_embedding, lebesgue_brick_cover, measure_map,
    property_c_map_from_schedule, EmbeddingStage, EmbeddingTable,
};
use coarsegeom::error::{Error, Result};
use coarsegeom::extension::{
    audit_scalar, audit_vector, blend_extension, extend_halfline, extend_orthant,
    lipschitz_minorant, neighborhood_extension, BlendProblem, EnumerationOrder, PartialValues,
    ValueRule,
};
use coarsegeom::functors::{asymptotic_product, cone, product, quotient_metric, suspension, wedge};
use coarsegeom::homology::{betti, tower_homology_ranks, InducedRank};
use coarsegeom::io::{
    self, audit_to_json, complex_from_json, complex_to_json, compression_csv, cover_from_json,
    cover_to_json, embedding_csv, embedding_from_csv, fibers_csv, increments_csv,
    measure_from_json, measure_map_stages_from_json, measure_map_to_json, problem_from_json,
    profile_csv, real_to_json, solution_to_json,
    space_from_json, space_to_json, stats_to_json, tower_csv, SCHEMA_VERSION,
};
use coarsegeom::measure::{kr_distance, FiniteMeasure};
use coarsegeom::nerve::{anti_cech_tower, nerve, nerve_projection, urysohn_fiber_profile};
use coarsegeom::space::{verify_metric, Budget, FiniteMetricSpace, SLACK};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const TRIANGLE_AUDIT_CAP: usize = 1_500;

#[derive(Parser)]
#[command(
    name = "coarsegeom",
    about = "Constructive large-scale geometry: covers, dimension certificates, nerve towers, Lipschitz extension, coarse embeddings",
    disable_version_flag = true
)]
struct Cli {
    /// Worker threads for parallel scans (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Cache directory for generated distance matrices (overrides COARSEGEOM_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Re-run the relevant invariant audits on outputs; a failed audit exits 5.
    #[arg(long, global = true)]
    audit: bool,
    /// Maximum number of points any generator or functor may produce.
    #[arg(long, global = true, default_value_t = 20_000)]
    max_points: usize,
    /// Maximum number of points for dense distance matrices.
    #[arg(long, global = true, default_value_t = 5_000)]
    max_dense: usize,
    /// Print the tool and artifact schema versions.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate and check finite pointed metric spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Products, asymptotic products, wedges, quotients, and cones.
    #[command(subcommand)]
    Functor(FunctorCmd),
    /// Transport (Kantorovich-Rubinstein) distance between two measures.
    Kr(KrArgs),
    /// Build and audit covers.
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Asymptotic-dimension profiles.
    #[command(subcommand)]
    Dim(DimCmd),
    /// Nerves, towers, homology, and fiber profiles.
    #[command(subcommand)]
    Nerve(NerveCmd),
    /// Lipschitz-type extension solvers.
    #[command(subcommand)]
    Extend(ExtendCmd),
    /// Measure maps, Hilbert realizations, and compression profiles.
    #[command(subcommand)]
    Embed(EmbedCmd),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// Generate a space artifact.
    Gen(SpaceGenArgs),
    /// Audit the metric axioms of a space file.
    Check {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpaceGenArgs {
    /// Integer grid: DIM SIDE (l1 metric, basepoint at the origin).
    #[arg(long, num_args = 2, value_names = ["DIM", "SIDE"])]
    grid: Option<Vec<usize>>,
    /// Cayley ball: comma-separated single-letter generators.
    #[arg(long)]
    cayley: Option<String>,
    /// Comma-separated relators (commutators like [a,b]) for --cayley.
    #[arg(long, default_value = "")]
    relators: String,
    /// Ball radius for --cayley.
    #[arg(long, default_value_t = 3)]
    radius: usize,
    /// Random Euclidean cloud with this many points (uses --seed).
    #[arg(long)]
    cloud: Option<usize>,
    /// Ambient dimension for --cloud.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Coordinate range [0, spread] for --cloud.
    #[arg(long, default_value_t = 100.0)]
    spread: f64,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FunctorCmd {
    /// Sum-metric product of two spaces.
    Product(TwoSpaceArgs),
    /// Asymptotic product (sub-distance-tolerance pairs).
    Aproduct(AproductArgs),
    /// Wedge at the basepoints.
    Wedge(TwoSpaceArgs),
    /// Metric quotient by a partition file.
    Quotient {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// JSON file {"schema_version":1, "classes":[[point ids]]}.
        #[arg(long)]
        classes: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Discrete cone (or suspension) over a space.
    Cone {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Height grid step.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// Fold both boundaries instead of one (experimental).
        #[arg(long)]
        suspension: bool,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TwoSpaceArgs {
    #[arg(short = 'a', long)]
    left: PathBuf,
    #[arg(short = 'b', long)]
    right: PathBuf,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AproductArgs {
    #[arg(short = 'a', long)]
    left: PathBuf,
    #[arg(short = 'b', long)]
    right: PathBuf,
    /// Norm-difference tolerance defining the asymptotic pairs.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KrArgs {
    #[arg(short = 's', long)]
    space: PathBuf,
    #[arg(long)]
    mu: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CoverCmd {
    /// Alternating brick cover at a scale (grid spaces).
    Brick(CoverBuildArgs),
    /// Greedy colored cover at a scale.
    Greedy {
        #[command(flatten)]
        build: CoverBuildArgs,
        /// Give up beyond this many families.
        #[arg(long, default_value_t = 64)]
        max_families: usize,
    },
    /// Exhaustive minimal colored cover (tiny spaces only).
    Exact {
        #[command(flatten)]
        build: CoverBuildArgs,
        /// Cap on member diameters (defaults to the scale heuristic).
        #[arg(long)]
        mesh_cap: Option<f64>,
    },
    /// Statistics (multiplicity, mesh, Lebesgue numbers) of a cover file.
    Stats {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'c', long)]
        cover: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Separation schedule for weighted measure maps.
    Propc {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Comma-separated nondecreasing separation radii.
        #[arg(long)]
        scales: String,
        #[arg(long, value_enum, default_value_t = ScheduleStrategy::Grid)]
        strategy: ScheduleStrategy,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CoverBuildArgs {
    #[arg(short = 's', long)]
    space: PathBuf,
    /// Scale (disjointness bound within each family).
    #[arg(short = 'L', long)]
    scale: f64,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ScheduleStrategy {
    Grid,
    Greedy,
}

#[derive(Copy, Clone, ValueEnum)]
enum CoverStrategy {
    Brick,
    Greedy,
    Exact,
}

#[derive(Subcommand)]
enum DimCmd {
    /// Per-scale family counts with audited certificates.
    Profile {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Comma-separated scales.
        #[arg(long)]
        scales: String,
        #[arg(long, value_enum, default_value_t = CoverStrategy::Brick)]
        strategy: CoverStrategy,
        #[arg(long, default_value_t = 64)]
        max_families: usize,
        /// Directory receiving one certificate cover file per scale.
        #[arg(long)]
        certs: Option<PathBuf>,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NerveCmd {
    /// Nerve complex of a cover file.
    Build {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'c', long)]
        cover: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Rational Betti numbers of a complex file.
    Betti {
        #[arg(long)]
        complex: PathBuf,
        /// Largest homology degree.
        #[arg(short = 'k', long, default_value_t = 2)]
        degree: usize,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Anti-Čech tower report (stage, scale, dim, Betti, ranks to next).
    Tower {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Comma-separated strictly increasing scales.
        #[arg(long)]
        scales: String,
        #[arg(long, value_enum, default_value_t = CoverStrategy::Brick)]
        strategy: CoverStrategy,
        #[arg(long, default_value_t = 64)]
        max_families: usize,
        /// Largest homology degree in the report.
        #[arg(short = 'k', long, default_value_t = 1)]
        degree: usize,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Ranks of all induced homology maps across a tower.
    Ranks {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(long)]
        scales: String,
        #[arg(long, value_enum, default_value_t = CoverStrategy::Brick)]
        strategy: CoverStrategy,
        #[arg(long, default_value_t = 64)]
        max_families: usize,
        /// Homology degree of the rank table.
        #[arg(short = 'k', long, default_value_t = 1)]
        degree: usize,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Fiber diameters of the barycentric projection of a cover.
    Fibers {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'c', long)]
        cover: PathBuf,
        /// Comma-separated radii for the fiber scan.
        #[arg(long)]
        rgrid: String,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum RuleArg {
    Midpoint,
    Lower,
}

#[derive(Args)]
struct ExtendCommon {
    #[arg(short = 's', long)]
    space: PathBuf,
    /// Extension problem file.
    #[arg(short = 'p', long)]
    problem: PathBuf,
    /// Value picked inside each admissible interval.
    #[arg(long, value_enum, default_value_t = RuleArg::Midpoint)]
    rule: RuleArg,
    /// Multiplies lambda (>= 1) for a deliberately slackened extension.
    #[arg(long, default_value_t = 1.0)]
    relax: f64,
    #[arg(short = 'o', long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExtendCmd {
    /// Scalar extension with the constants preserved.
    Line(ExtendCommon),
    /// Tuple extension into the closed positive orthant.
    Orthant {
        #[command(flatten)]
        common: ExtendCommon,
        /// Chart parameter (defaults to 1/(2n)).
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Staircase minorant q <= f with |q(x)-q(y)| <= d(x,y) + 3.
    Minorant {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Problem file whose A lists every point with scalar values.
        #[arg(short = 'p', long)]
        problem: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Extension under an envelope, exact on A (problem file carries W,
    /// the envelope, and the growth constants).
    Blend {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'p', long)]
        problem: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Tuple extension to a certified neighborhood of A.
    Nbhd {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'p', long)]
        problem: PathBuf,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Barycentric measure map of a deep cover.
    Measures {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Cover file (defaults to an enlarged brick cover at the scale).
        #[arg(short = 'c', long)]
        cover: Option<PathBuf>,
        /// Required depth.
        #[arg(short = 'L', long)]
        scale: f64,
        /// Also write the increment table as CSV here.
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Weighted multi-scale measure map with certified bounds.
    Propc {
        #[arg(short = 's', long)]
        space: PathBuf,
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(short = 'k', long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScheduleStrategy::Grid)]
        strategy: ScheduleStrategy,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Square-root Hilbert realization of measure-map stages.
    Hilbert {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Measure-map artifacts, one per stage (repeatable).
        #[arg(short = 'm', long = "measures", required = true)]
        stages: Vec<PathBuf>,
        /// Comma-separated stage weights (default 2^-s).
        #[arg(long)]
        weights: Option<String>,
        /// Skip basepoint centering.
        #[arg(long)]
        raw: bool,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
    /// Compression profile (rho1/rho2 envelopes) of an embedding CSV.
    Profile {
        #[arg(short = 's', long)]
        space: PathBuf,
        /// Embedding CSV produced by `embed hilbert`.
        #[arg(long)]
        embedding: PathBuf,
        /// Fixed bucket width (defaults to unit or quantile buckets).
        #[arg(long)]
        width: Option<f64>,
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(mut cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        // Later invocations in the same process keep the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    if cli.version {
        println!("coarsegeom {}", env!("CARGO_PKG_VERSION"));
        println!(
            "schemas: space={v} measure={v} cover={v} complex={v} problem={v} report={v}",
            v = SCHEMA_VERSION
        );
        return Ok(());
    }
    let bud = Budget {
        max_points: cli.max_points,
        max_dense: cli.max_dense,
    };
    let cache = CacheConfig::resolve(cli.cache_dir.clone());
    let Some(cmd) = cli.cmd.take() else {
        return Err(Error::Validation(
            "a subcommand is required (try --help)".into(),
        ));
    };
    match cmd {
        Cmd::Space(c) => run_space(c, &cli, &bud, &cache),
        Cmd::Functor(c) => run_functor(c, &cli, &bud),
        Cmd::Kr(a) => run_kr(a, &bud),
        Cmd::Cover(c) => run_cover(c, &cli, &bud),
        Cmd::Dim(c) => run_dim(c, &bud),
        Cmd::Nerve(c) => run_nerve(c, &cli, &bud),
        Cmd::Extend(c) => run_extend(c, &cli, &bud),
        Cmd::Embed(c) => run_embed(c, &cli, &bud),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing.
// ---------------------------------------------------------------------------

fn load_space(path: &Path, bud: &Budget) -> Result<FiniteMetricSpace> {
    space_from_json(&io::read_json_file(path)?, bud)
}

fn emit_json(out: &Option<PathBuf>, v: &Value) -> Result<()> {
    match out {
        Some(path) => io::write_json_file(path, v),
        None => emit_stdout(&io::json_to_string(v)),
    }
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text_file(path, text),
        None => emit_stdout(text),
    }
}

/// Write to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit_stdout(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn parse_scales(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Validation(format!("{t:?} is not a number")))
        })
        .collect()
}

fn profile_strategy(s: CoverStrategy, max_families: usize) -> ProfileStrategy {
    match s {
        CoverStrategy::Brick => ProfileStrategy::Brick,
        CoverStrategy::Greedy => ProfileStrategy::Greedy { max_families },
        CoverStrategy::Exact => ProfileStrategy::Exact,
    }
}

fn rule_of(r: RuleArg) -> ValueRule {
    match r {
        RuleArg::Midpoint => ValueRule::Midpoint,
        RuleArg::Lower => ValueRule::LowerEnd,
    }
}

/// Audits the metric axioms where feasible; grids and Cayley balls carry
/// path metrics that are metrics by construction, so only explicit
/// matrices are triangle-scanned.
fn audit_space(space: &FiniteMetricSpace) -> Result<()> {
    if space.is_grid() {
        return Ok(());
    }
    if space.n() > TRIANGLE_AUDIT_CAP {
        return Err(Error::Budget(format!(
            "triangle audit is cubic; {} points exceed the cap {TRIANGLE_AUDIT_CAP}",
            space.n()
        )));
    }
    let report = verify_metric(space);
    if !report.is_metric() {
        return Err(Error::Invariant(format!(
            "metric axioms violated: {:?}",
            report.violations.first()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// space
// ---------------------------------------------------------------------------

fn run_space(cmd: SpaceCmd, cli: &Cli, bud: &Budget, cache: &CacheConfig) -> Result<()> {
    match cmd {
        SpaceCmd::Gen(args) => {
            let chosen = [args.grid.is_some(), args.cayley.is_some(), args.cloud.is_some()]
                .iter()
                .filter(|b| **b)
                .count();
            if chosen != 1 {
                return Err(Error::Validation(
                    "pick exactly one generator: --grid, --cayley, or --cloud".into(),
                ));
            }
            let space = if let Some(g) = &args.grid {
                FiniteMetricSpace::grid(g[0], g[1], bud)?
            } else if let Some(gens) = &args.cayley {
                let gens: Vec<String> = gens.split(',').map(|s| s.trim().to_string()).collect();
                let relators = split_relators(&args.relators);
                let key = spec_key(
                    "cayley",
                    &[
                        ("gens", &gens.join(",")),
                        ("relators", &relators.join(",")),
                        ("radius", &args.radius.to_string()),
                    ],
                );
                let (space, outcome) = cached_space(cache, &key, bud, || {
                    coarsegeom::cayley::cayley_ball(&gens, &relators, args.radius, bud)
                })?;
                if outcome == CacheOutcome::Hit {
                    eprintln!("cache hit for {key}");
                }
                space
            } else {
                let n = args.cloud.expect("checked above");
                random_cloud(n, args.dim, args.spread, cli.seed, bud)?
            };
            if cli.audit {
                audit_space(&space)?;
            }
            emit_json(&args.out, &space_to_json(&space)?)
        }
        SpaceCmd::Check { space, out } => {
            let sp = load_space(&space, bud)?;
            if sp.n() > TRIANGLE_AUDIT_CAP {
                return Err(Error::Budget(format!(
                    "triangle audit is cubic; {} points exceed the cap {TRIANGLE_AUDIT_CAP}",
                    sp.n()
                )));
            }
            let report = verify_metric(&sp);
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "space": sp.name(),
                "checked_points": report.checked_points,
                "is_metric": report.is_metric(),
                "violations": report.violations.len(),
            });
            emit_json(&out, &v)?;
            if report.is_metric() {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "{} metric violations (first: {:?})",
                    report.violations.len(),
                    report.violations.first()
                )))
            }
        }
    }
}

/// Splits a relator list on commas that sit outside brackets, so the
/// commutator notation `[a,b]` survives intact.
fn split_relators(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '[' => {
                depth += 1;
                cur.push(ch);
            }
            ']' => {
                depth = depth.saturating_sub(1);
                cur.push(ch);
            }
            ',' if depth == 0 => {
                if !cur.trim().is_empty() {
                    out.push(cur.trim().to_string());
                }
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn random_cloud(
    n: usize,
    dim: usize,
    spread: f64,
    seed: u64,
    bud: &Budget,
) -> Result<FiniteMetricSpace> {
    if n == 0 || dim == 0 {
        return Err(Error::Validation("cloud needs n >= 1 and dim >= 1".into()));
    }
    if !(spread.is_finite() && spread > 0.0) {
        return Err(Error::Validation("spread must be finite and positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..spread)).collect())
        .collect();
    let ids: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let matrix: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    pts[i]
                        .iter()
                        .zip(&pts[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::from_matrix(&format!("cloud{n}d{dim}s{seed}"), ids, "p0", matrix, bud)
}

// ---------------------------------------------------------------------------
// functor / kr
// ---------------------------------------------------------------------------

fn run_functor(cmd: FunctorCmd, cli: &Cli, bud: &Budget) -> Result<()> {
    match cmd {
        FunctorCmd::Product(a) => {
            let x = load_space(&a.left, bud)?;
            let y = load_space(&a.right, bud)?;
            let p = product(&x, &y, bud)?;
            if cli.audit {
                audit_space(&p)?;
            }
            emit_json(&a.out, &space_to_json(&p)?)
        }
        FunctorCmd::Aproduct(a) => {
            let x = load_space(&a.left, bud)?;
            let y = load_space(&a.right, bud)?;
            let ap = asymptotic_product(&x, &y, a.tol, bud)?;
            let v = match &ap.space {
                Some(space) => {
                    if cli.audit {
                        audit_space(space)?;
                    }
                    json!({
                        "schema_version": SCHEMA_VERSION,
                        "empty": false,
                        "points": ap.pairs.len(),
                        "space": space_to_json(space)?,
                    })
                }
                None => json!({
                    "schema_version": SCHEMA_VERSION,
                    "empty": true,
                    "points": 0,
                    "space": Value::Null,
                }),
            };
            emit_json(&a.out, &v)
        }
        FunctorCmd::Wedge(a) => {
            let x = load_space(&a.left, bud)?;
            let y = load_space(&a.right, bud)?;
            let w = wedge(&x, &y, bud)?;
            if cli.audit {
                audit_space(&w)?;
            }
            emit_json(&a.out, &space_to_json(&w)?)
        }
        FunctorCmd::Quotient { space, classes, out } => {
            let x = load_space(&space, bud)?;
            let v = io::read_json_file(&classes)?;
            let m = v
                .as_object()
                .ok_or_else(|| Error::Format("classes file must be an object".into()))?;
            let classes: Vec<Vec<usize>> = m
                .get("classes")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Format("classes file needs a \"classes\" array".into()))?
                .iter()
                .map(|class| {
                    class
                        .as_array()
                        .ok_or_else(|| Error::Format("classes must be arrays".into()))?
                        .iter()
                        .map(|p| {
                            p.as_str()
                                .and_then(|s| x.index_of(s))
                                .ok_or_else(|| Error::Format(format!("unknown point {p}")))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let q = quotient_metric(&x, &classes, bud)?;
            if cli.audit {
                audit_space(&q.space)?;
            }
            emit_json(&out, &space_to_json(&q.space)?)
        }
        FunctorCmd::Cone {
            space,
            step,
            suspension: susp,
            out,
        } => {
            let x = load_space(&space, bud)?;
            let c = if susp {
                suspension(&x, step, bud)?
            } else {
                cone(&x, step, bud)?
            };
            if cli.audit {
                audit_space(&c.space)?;
            }
            emit_json(&out, &space_to_json(&c.space)?)
        }
    }
}

fn run_kr(a: KrArgs, bud: &Budget) -> Result<()> {
    let space = load_space(&a.space, bud)?;
    let mu = measure_from_json(&io::read_json_file(&a.mu)?, &space)?;
    let nu = measure_from_json(&io::read_json_file(&a.nu)?, &space)?;
    let d = kr_distance(&space, &mu, &nu)?;
    emit_json(
        &a.out,
        &json!({
            "schema_version": SCHEMA_VERSION,
            "space": space.name(),
            "distance": d,
        }),
    )
}

// ---------------------------------------------------------------------------
// cover
// ---------------------------------------------------------------------------

fn run_cover(cmd: CoverCmd, cli: &Cli, bud: &Budget) -> Result<()> {
    match cmd {
        CoverCmd::Brick(a) => {
            let space = load_space(&a.space, bud)?;
            let cc = brick_colored_cover(&space, a.scale)?;
            if cli.audit {
                audit_families(&space, &cc.families, a.scale)?;
            }
            // The families are the separated bricks; the cover the artifact
            // realizes is their (ceil(L) - 1)-enlargement, which restores the
            // Lebesgue number at scale L.
            let rho = (a.scale.ceil() - 1.0).max(0.0);
            emit_json(
                &a.out,
                &cover_to_json(&space, &cc.families, a.scale, None, rho),
            )
        }
        CoverCmd::Greedy { build, max_families } => {
            let space = load_space(&build.space, bud)?;
            match greedy_colored_cover(&space, build.scale, max_families)? {
                GreedyOutcome::Cover(cc) => {
                    if cli.audit {
                        audit_families(&space, &cc.families, build.scale)?;
                    }
                    emit_json(
                        &build.out,
                        &cover_to_json(&space, &cc.families, build.scale, None, 0.0),
                    )
                }
                GreedyOutcome::Infeasible {
                    families_needed,
                    max_families,
                } => Err(Error::Validation(format!(
                    "greedy needs {families_needed} families (cap {max_families})"
                ))),
            }
        }
        CoverCmd::Exact { build, mesh_cap } => {
            let space = load_space(&build.space, bud)?;
            let (_, cc) = exact_dimension_at_scale(&space, build.scale, mesh_cap)?;
            if cli.audit {
                audit_families(&space, &cc.families, build.scale)?;
            }
            emit_json(
                &build.out,
                &cover_to_json(&space, &cc.families, build.scale, None, 0.0),
            )
        }
        CoverCmd::Stats { space, cover, out } => {
            let sp = load_space(&space, bud)?;
            let cf = cover_from_json(&io::read_json_file(&cover)?, &sp)?;
            if cli.audit {
                audit_families(&sp, &cf.families, cf.scale)?;
            }
            let flat = cf.flat(&sp)?;
            let stats = cover_stats(&sp, &flat)?;
            emit_json(&out, &stats_to_json(&sp, &stats))
        }
        CoverCmd::Propc {
            space,
            scales,
            strategy,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let radii = parse_scales(&scales)?;
            let strat = match strategy {
                ScheduleStrategy::Grid => PropertyCStrategy::Grid,
                ScheduleStrategy::Greedy => PropertyCStrategy::Greedy,
            };
            match property_c_decomposition(&sp, &radii, strat)? {
                PropertyCOutcome::Schedule(sched) => {
                    if cli.audit {
                        let audit = audit_property_c(&sp, &sched)?;
                        if !audit.passed() {
                            return Err(Error::Invariant(format!(
                                "schedule audit failed: {} uncovered, {} separation violations",
                                audit.uncovered.len(),
                                audit.separation_violations.len()
                            )));
                        }
                    }
                    let top = sched.scales.last().copied().unwrap_or(0.0);
                    emit_json(
                        &out,
                        &cover_to_json(&sp, &sched.families, top, Some(&sched.scales), 0.0),
                    )
                }
                PropertyCOutcome::Infeasible { uncovered, detail } => Err(Error::Validation(
                    format!("no schedule: {detail} ({} uncovered)", uncovered.len()),
                )),
            }
        }
    }
}

/// Invariant gate for cover artifacts: coverage plus in-family separation
/// strictly above the scale. A violated gate is an invariant breach (exit
/// 5), which is what a tampered cover file must trigger.
fn audit_families(
    space: &FiniteMetricSpace,
    families: &[Vec<Vec<usize>>],
    scale: f64,
) -> Result<()> {
    let all: Vec<Vec<usize>> = families.concat();
    let flat = Cover::new(space, all)?;
    let missing = flat.uncovered(space);
    if !missing.is_empty() {
        return Err(Error::Invariant(format!(
            "cover audit: {} points uncovered (first: {})",
            missing.len(),
            space.id(missing[0])
        )));
    }
    for (fi, fam) in families.iter().enumerate() {
        for i in 0..fam.len() {
            for j in (i + 1)..fam.len() {
                let d = set_distance(space, &fam[i], &fam[j]);
                if d <= scale + SLACK {
                    return Err(Error::Invariant(format!(
                        "cover audit: family {fi} holds sets {i} and {j} at distance {d} <= {scale}"
                    )));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dim
// ---------------------------------------------------------------------------

fn run_dim(cmd: DimCmd, bud: &Budget) -> Result<()> {
    let DimCmd::Profile {
        space,
        scales,
        strategy,
        max_families,
        certs,
        out,
    } = cmd;
    let sp = load_space(&space, bud)?;
    let scales = parse_scales(&scales)?;
    let (rows, covers) = dimension_profile(&sp, &scales, profile_strategy(strategy, max_families))?;
    let mut fingerprints = Vec::with_capacity(covers.len());
    for cc in &covers {
        let artifact = cover_to_json(&sp, &cc.families, cc.scale, None, 0.0);
        let text = io::json_to_string(&artifact);
        let print = content_hash(text.as_bytes())[..12].to_string();
        if let Some(dir) = &certs {
            std::fs::create_dir_all(dir)?;
            io::write_json_file(&dir.join(format!("cover-{print}.json")), &artifact)?;
        }
        fingerprints.push(print);
    }
    emit_text(&out, &profile_csv(&rows, &fingerprints))
}

// ---------------------------------------------------------------------------
// nerve
// ---------------------------------------------------------------------------

fn run_nerve(cmd: NerveCmd, cli: &Cli, bud: &Budget) -> Result<()> {
    match cmd {
        NerveCmd::Build { space, cover, out } => {
            let sp = load_space(&space, bud)?;
            let cf = cover_from_json(&io::read_json_file(&cover)?, &sp)?;
            let flat = cf.flat(&sp)?;
            let cx = nerve(&sp, &flat, cf.scale)?;
            if cli.audit {
                let stats = cover_stats(&sp, &flat)?;
                if cx.dim() + 1 != stats.multiplicity {
                    return Err(Error::Invariant(format!(
                        "nerve dimension {} + 1 must equal multiplicity {}",
                        cx.dim(),
                        stats.multiplicity
                    )));
                }
            }
            emit_json(&out, &complex_to_json(&cx))
        }
        NerveCmd::Betti { complex, degree, out } => {
            let cx = complex_from_json(&io::read_json_file(&complex)?)?;
            let b = betti(&cx, degree)?;
            emit_json(
                &out,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "meshSize": real_to_json(cx.mesh_size),
                    "betti": b,
                }),
            )
        }
        NerveCmd::Tower {
            space,
            scales,
            strategy,
            max_families,
            degree,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let scales = parse_scales(&scales)?;
            let tower = anti_cech_tower(&sp, &scales, profile_strategy(strategy, max_families))?;
            let betti_rows: Vec<Vec<usize>> = tower
                .stages
                .iter()
                .map(|st| betti(&st.complex, degree))
                .collect::<Result<_>>()?;
            let mut ranks: Vec<InducedRank> = Vec::new();
            for k in 0..=degree {
                ranks.extend(tower_homology_ranks(&tower, k)?);
            }
            emit_text(&out, &tower_csv(&tower, &betti_rows, &ranks, degree))
        }
        NerveCmd::Ranks {
            space,
            scales,
            strategy,
            max_families,
            degree,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let scales = parse_scales(&scales)?;
            let tower = anti_cech_tower(&sp, &scales, profile_strategy(strategy, max_families))?;
            let ranks = tower_homology_ranks(&tower, degree)?;
            let rows: Vec<Value> = ranks
                .iter()
                .map(|r| {
                    json!({
                        "from": r.from_stage,
                        "to": r.to_stage,
                        "rank": r.rank,
                    })
                })
                .collect();
            emit_json(
                &out,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "degree": degree,
                    "scales": scales,
                    "ranks": rows,
                }),
            )
        }
        NerveCmd::Fibers {
            space,
            cover,
            rgrid,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let cf = cover_from_json(&io::read_json_file(&cover)?, &sp)?;
            let flat = cf.flat(&sp)?;
            let proj = nerve_projection(&sp, &flat, cf.scale)?;
            let grid = parse_scales(&rgrid)?;
            let profiles = urysohn_fiber_profile(&sp, &proj, &grid);
            emit_text(&out, &fibers_csv(&sp, &grid, &profiles))
        }
    }
}

// ---------------------------------------------------------------------------
// extend
// ---------------------------------------------------------------------------

fn run_extend(cmd: ExtendCmd, cli: &Cli, bud: &Budget) -> Result<()> {
    match cmd {
        ExtendCmd::Line(a) => {
            let sp = load_space(&a.space, bud)?;
            let problem = problem_from_json(&io::read_json_file(&a.problem)?, &sp)?;
            let sol = extend_halfline(
                &sp,
                &problem,
                &EnumerationOrder::AscendingNorm,
                rule_of(a.rule),
                a.relax,
            )?;
            let audit = audit_scalar(&sp, &sol.values, sol.lambda, sol.s);
            if cli.audit && !audit.satisfied() {
                return Err(Error::Invariant(format!(
                    "extension audit failed with excess {}",
                    audit.max_excess
                )));
            }
            emit_json(
                &a.out,
                &solution_to_json(
                    &sp,
                    &problem,
                    &PartialValues::Scalar(sol.values.clone()),
                    sol.lambda,
                    sol.s,
                    &audit,
                ),
            )
        }
        ExtendCmd::Orthant { common, epsilon } => {
            let sp = load_space(&common.space, bud)?;
            let problem = problem_from_json(&io::read_json_file(&common.problem)?, &sp)?;
            let sol = extend_orthant(
                &sp,
                &problem,
                epsilon,
                &EnumerationOrder::AscendingNorm,
                rule_of(common.rule),
                common.relax,
            )?;
            let audit = audit_vector(&sp, &sol.values, sol.lambda, sol.s);
            if cli.audit && !audit.satisfied() {
                return Err(Error::Invariant(format!(
                    "extension audit failed with excess {}",
                    audit.max_excess
                )));
            }
            let mut v = solution_to_json(
                &sp,
                &problem,
                &PartialValues::Vector(sol.values.clone()),
                sol.lambda,
                sol.s,
                &audit,
            );
            v.as_object_mut()
                .expect("solution is an object")
                .insert("epsilon".into(), json!(sol.epsilon));
            emit_json(&common.out, &v)
        }
        ExtendCmd::Minorant { space, problem, out } => {
            let sp = load_space(&space, bud)?;
            let p = problem_from_json(&io::read_json_file(&problem)?, &sp)?;
            if p.subset.len() != sp.n() {
                return Err(Error::Validation(
                    "the minorant needs values on every point (A must list the whole space)"
                        .into(),
                ));
            }
            let PartialValues::Scalar(raw) = &p.values else {
                return Err(Error::Validation("the minorant takes scalar values".into()));
            };
            let mut f = vec![0.0; sp.n()];
            for (&a, &x) in p.subset.iter().zip(raw) {
                f[a] = x;
            }
            let q = lipschitz_minorant(&sp, &f)?;
            let audit = audit_scalar(&sp, &q.values, 1.0, 3.0);
            let mut v = solution_to_json(
                &sp,
                &p,
                &PartialValues::Scalar(q.values.clone()),
                1.0,
                3.0,
                &audit,
            );
            let o = v.as_object_mut().expect("solution is an object");
            o.insert("base_level".into(), json!(q.base_level));
            o.insert("radii".into(), json!(q.radii));
            emit_json(&out, &v)
        }
        ExtendCmd::Blend { space, problem, out } => {
            let sp = load_space(&space, bud)?;
            let v = io::read_json_file(&problem)?;
            let p = blend_problem_from_json(&v, &sp)?;
            let sol = blend_extension(&sp, &p)?;
            let audit = audit_scalar(&sp, &sol.values, sol.lambda, sol.s);
            if cli.audit && !audit.satisfied() {
                return Err(Error::Invariant(format!(
                    "blend audit failed with excess {}",
                    audit.max_excess
                )));
            }
            let out_v = json!({
                "schema_version": SCHEMA_VERSION,
                "space": sp.name(),
                "values": (0..sp.n())
                    .map(|i| (sp.id(i).to_string(), json!(sol.values[i])))
                    .collect::<serde_json::Map<_, _>>(),
                "lambda": sol.lambda,
                "s": sol.s,
                "growth_ratio": sol.growth_ratio,
                "audit": audit_to_json(&sp, &audit),
            });
            emit_json(&out, &out_v)
        }
        ExtendCmd::Nbhd { space, problem, out } => {
            let sp = load_space(&space, bud)?;
            let p = problem_from_json(&io::read_json_file(&problem)?, &sp)?;
            let PartialValues::Vector(g) = &p.values else {
                return Err(Error::Validation(
                    "the neighborhood extension takes vector values".into(),
                ));
            };
            let sol = neighborhood_extension(&sp, &p.subset, g, p.lambda, p.s)?;
            let values: serde_json::Map<String, Value> = sol
                .w_set
                .iter()
                .zip(&sol.values)
                .map(|(&w, row)| (sp.id(w).to_string(), json!(row)))
                .collect();
            let transverse: serde_json::Map<String, Value> = (0..sp.n())
                .map(|i| (sp.id(i).to_string(), json!(sol.transverse[i])))
                .collect();
            emit_json(
                &out,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "space": sp.name(),
                    "W": sol.w_set.iter().map(|&w| sp.id(w)).collect::<Vec<_>>(),
                    "values": values,
                    "lambda": sol.lambda,
                    "s": sol.s,
                    "transverse": transverse,
                    "certificate_margin": sol.certificate_margin,
                }),
            )
        }
    }
}

/// Blend problems extend the plain problem artifact with `W`, the paired
/// `values` of g on W, an `fValues` envelope over the whole space, and
/// the growth constants `growthLambda`/`growthS` on A.
fn blend_problem_from_json(v: &Value, sp: &FiniteMetricSpace) -> Result<BlendProblem> {
    let base = problem_from_json(v, sp)?;
    let m = v.as_object().expect("validated by problem_from_json");
    let w_field = m
        .get("W")
        .ok_or_else(|| Error::Format("blend problems need a \"W\" field".into()))?;
    let subset_w: Vec<usize> = w_field
        .as_array()
        .ok_or_else(|| Error::Format("W must be an array of point ids".into()))?
        .iter()
        .map(|p| {
            p.as_str()
                .and_then(|s| sp.index_of(s))
                .ok_or_else(|| Error::Format(format!("unknown point {p} in W")))
        })
        .collect::<Result<_>>()?;
    // g lives on W: the base problem's A+values carry the exact-reproduction
    // subset, while "gValues" (keyed by W point) carries g itself.
    let g_obj = m
        .get("gValues")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Format("blend problems need a \"gValues\" object over W".into()))?;
    let g_values: Vec<f64> = subset_w
        .iter()
        .map(|&w| {
            g_obj
                .get(sp.id(w))
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Format(format!("gValues is missing {}", sp.id(w))))
        })
        .collect::<Result<_>>()?;
    let f_obj = m
        .get("fValues")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Format("blend problems need an \"fValues\" object".into()))?;
    let f_values: Vec<f64> = (0..sp.n())
        .map(|i| {
            f_obj
                .get(sp.id(i))
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Format(format!("fValues is missing {}", sp.id(i))))
        })
        .collect::<Result<_>>()?;
    let growth_lambda = m
        .get("growthLambda")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Format("blend problems need growthLambda".into()))?;
    let growth_s = m
        .get("growthS")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::Format("blend problems need growthS".into()))?;
    Ok(BlendProblem {
        subset_a: base.subset,
        subset_w,
        g_values,
        f_values,
        lambda_g: base.lambda,
        s_g: base.s,
        lambda_w: growth_lambda,
        s_w: growth_s,
    })
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

fn run_embed(cmd: EmbedCmd, cli: &Cli, bud: &Budget) -> Result<()> {
    match cmd {
        EmbedCmd::Measures {
            space,
            cover,
            scale,
            table,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let flat = match &cover {
                Some(path) => cover_from_json(&io::read_json_file(path)?, &sp)?.flat(&sp)?,
                None => lebesgue_brick_cover(&sp, scale)?,
            };
            let mm = measure_map(&sp, &flat, scale)?;
            if cli.audit {
                // Displacement bound of the depth theorem on every bucket.
                let mult = mm.multiplicity as f64;
                for row in &mm.increments {
                    let bound = (4.0 * row.upper * mult / scale).min(2.0);
                    if row.max_increment > bound + SLACK {
                        return Err(Error::Invariant(format!(
                            "increment {} at distance {} exceeds the bound {bound}",
                            row.max_increment, row.upper
                        )));
                    }
                }
            }
            if let Some(path) = &table {
                io::write_text_file(path, &increments_csv(&mm.increments))?;
            }
            emit_json(&out, &measure_map_to_json(&sp, &mm))
        }
        EmbedCmd::Propc {
            space,
            n,
            k,
            strategy,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let strat = match strategy {
                ScheduleStrategy::Grid => PropertyCStrategy::Grid,
                ScheduleStrategy::Greedy => PropertyCStrategy::Greedy,
            };
            let radii: Vec<f64> = (1..=k).map(|i| 2.0 * (n as f64).powi(i as i32)).collect();
            let schedule: PropertyCSchedule =
                match property_c_decomposition(&sp, &radii, strat)? {
                    PropertyCOutcome::Schedule(s) => s,
                    PropertyCOutcome::Infeasible { uncovered, detail } => {
                        return Err(Error::Validation(format!(
                            "no schedule: {detail} ({} uncovered)",
                            uncovered.len()
                        )));
                    }
                };
            let map = property_c_map_from_schedule(&sp, n, k, schedule)?;
            let min_raw = map.raw_norms.iter().cloned().fold(f64::INFINITY, f64::min);
            let floor_ok = min_raw >= map.norm_floor - SLACK;
            let ratio_ok = map.max_ratio <= map.lipschitz_bound + SLACK;
            if cli.audit && !(floor_ok && ratio_ok) {
                return Err(Error::Invariant(format!(
                    "weighted-map audit failed: min_raw {min_raw} vs floor {}, ratio {} vs bound {}",
                    map.norm_floor, map.max_ratio, map.lipschitz_bound
                )));
            }
            let per_point: Vec<Value> = (0..sp.n())
                .map(|i| {
                    json!({
                        "point": sp.id(i),
                        "atoms": map.measures[i]
                            .atoms()
                            .iter()
                            .map(|a| json!({"point": sp.id(a.point), "weight": a.weight}))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            emit_json(
                &out,
                &json!({
                    "schema_version": SCHEMA_VERSION,
                    "space": sp.name(),
                    "scale": map.n as f64,
                    "n": map.n,
                    "k": map.k,
                    "radii": map.radii,
                    "norm_floor": map.norm_floor,
                    "min_raw_norm": min_raw,
                    "lipschitz_bound": map.lipschitz_bound,
                    "max_ratio": map.max_ratio,
                    "support_radius": real_to_json(map.support_radius),
                    "audit": {
                        "norm_floor_ok": floor_ok,
                        "lipschitz_ok": ratio_ok,
                    },
                    "per_point": per_point,
                }),
            )
        }
        EmbedCmd::Hilbert {
            space,
            stages,
            weights,
            raw,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let mut loaded: Vec<(f64, Vec<FiniteMeasure>)> = Vec::with_capacity(stages.len());
            for path in &stages {
                loaded.push(measure_map_stages_from_json(
                    &io::read_json_file(path)?,
                    &sp,
                )?);
            }
            let stage_refs: Vec<EmbeddingStage> = loaded
                .iter()
                .map(|(label, measures)| EmbeddingStage {
                    label: *label,
                    measures,
                })
                .collect();
            let w = match &weights {
                Some(s) => Some(parse_scales(s)?),
                None => None,
            };
            let table = hilbert_embedding(&sp, &stage_refs, w.as_deref(), !raw)?;
            emit_text(&out, &embedding_csv(&sp, &table))
        }
        EmbedCmd::Profile {
            space,
            embedding,
            width,
            out,
        } => {
            let sp = load_space(&space, bud)?;
            let text = std::fs::read_to_string(&embedding)?;
            let coordinates = embedding_from_csv(&sp, &text)?;
            let dimension = coordinates.first().map(Vec::len).unwrap_or(0);
            let table = EmbeddingTable {
                coordinates,
                labels: Vec::new(),
                weights: Vec::new(),
                universes: Vec::new(),
                centered: false,
                dimension,
            };
            let rows = compression_profile(&sp, &table, width)?;
            emit_text(&out, &compression_csv(&rows))
        }
    }
}
