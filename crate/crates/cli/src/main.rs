//! `curtainlab` command line: scenario runner plus thin subcommands.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 validation failure,
//! 3 acceptance threshold violated under `--check`.

mod scenario;
mod spaces;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curtainlab::curtains::SampleBudget;
use curtainlab::experiments::EXAMPLE51_STEP;
use curtainlab::report::{num, write_experiment};
use curtainlab::separation::{dhat, AxisFamilyOracle, CurtainPool, PoolOracle, DEFAULT_LMAX};
use rayon::prelude::*;

use scenario::{ExperimentSpec, KappaFamily, KappaSpec, PoolSpec, Scenario, SpaceSpec};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Run(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Run(m) => write!(f, "{m}"),
        }
    }
}

impl From<curtainlab::Error> for CliError {
    fn from(e: curtainlab::Error) -> Self {
        use curtainlab::Error as E;
        match e {
            E::InvalidArgument(_) | E::InvalidSpace(_) | E::TruncationTooLow(_) | E::OutsideDomain(_) | E::PoolCap { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Run(e.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "curtainlab", version, about = "Curtain-separation experiments on CAT(0) model spaces")]
struct Cli {
    /// Worker threads for running several scenarios.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SpaceArgs {
    /// plane, h2, tree, tripod, polygon, strip or product.
    #[arg(long)]
    space: Option<String>,
    /// Space parameter `key=value`, repeatable.
    #[arg(long = "space-param", value_name = "KEY=VALUE")]
    space_param: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct Common {
    #[command(flatten)]
    space: SpaceArgs,
    /// Curtain pool cap.
    #[arg(long = "pool-size")]
    pool_size: Option<usize>,
    /// Curtain spacing along probes.
    #[arg(long = "pool-density")]
    pool_density: Option<f64>,
    /// Largest L considered.
    #[arg(long)]
    lmax: Option<usize>,
    /// `const:c`, `log:p`, `power:a` or `sqrt`.
    #[arg(long)]
    kappa: Option<String>,
    /// Output directory; overrides CURTAINLAB_OUT.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Exit 3 when the experiment's thresholds fail.
    #[arg(long)]
    check: bool,
    /// Experiment parameter `key=value`, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    param: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ambient distance between two points.
    Dist {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// d̂ lower and upper bounds between two points.
    Dhat {
        #[command(flatten)]
        common: Common,
        /// Defaults to the basepoint.
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
    },
    /// κ-chain listing along the default ray.
    Kchain {
        #[command(flatten)]
        common: Common,
        /// Contraction constant, or `auto` to estimate it.
        #[arg(long = "D", default_value = "auto")]
        d: String,
    },
    /// Four-point δ over growing windows.
    Deltascan(Common),
    /// Largest curtain grids over growing windows.
    Gridscan(Common),
    /// Persistent-shadow fits along a ray.
    Shadow(Common),
    /// Gromov-product trajectories of two rays with a same-ray control.
    Injectivity(Common),
    /// Longest L-chains along the square-gap strip axis.
    Example51(Common),
    /// Run scenario files.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        check: bool,
        /// Override a scenario field, e.g. `experiment.params.l_max=4`.
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
    },
}

fn kappa_spec(s: &str) -> Result<KappaSpec, CliError> {
    let bad = || CliError::Validation(format!("--kappa {s:?}: expected const:c, log:p, power:a or sqrt"));
    if s == "sqrt" {
        return Ok(KappaSpec { family: KappaFamily::Power, param: 0.5 });
    }
    let (f, v) = s.split_once(':').ok_or_else(bad)?;
    let param: f64 = v.parse().map_err(|_| bad())?;
    let family = match f {
        "const" => KappaFamily::Const,
        "log" => KappaFamily::Log,
        "power" => KappaFamily::Power,
        _ => return Err(bad()),
    };
    Ok(KappaSpec { family, param })
}

/// Scenario equivalent of a subcommand invocation.
fn scenario_of(name: &str, default_space: &str, c: &Common, lmax_key: Option<&str>) -> Result<Scenario, CliError> {
    let mut params = spaces::kv_table(&c.param)?;
    if let (Some(l), Some(k)) = (c.lmax, lmax_key) {
        params.insert(k.into(), toml::Value::Integer(l as i64));
    }
    let mut pool = PoolSpec::default();
    if let Some(cap) = c.pool_size {
        pool.cap = cap;
    }
    if let Some(d) = c.pool_density {
        pool.density = d;
    }
    Ok(Scenario {
        space: SpaceSpec { kind: c.space.space.clone().unwrap_or_else(|| default_space.into()), params: spaces::kv_table(&c.space.space_param)? },
        kappa: c.kappa.as_deref().map(kappa_spec).transpose()?,
        pool,
        experiment: ExperimentSpec { name: name.into(), params },
        seed: c.space.seed,
        out_dir: None,
    })
}

fn out_root(flag: Option<&Path>, scenario: Option<&str>) -> PathBuf {
    if let Some(f) = flag {
        return f.to_path_buf();
    }
    if let Some(e) = std::env::var_os("CURTAINLAB_OUT").filter(|e| !e.is_empty()) {
        return PathBuf::from(e);
    }
    PathBuf::from(scenario.unwrap_or("out"))
}

/// Run, write outputs, and return the exit code.
fn execute(sc: &Scenario, dir_name: &str, out_dir: Option<&Path>, check: bool) -> Result<(u8, String), CliError> {
    let out = scenario::run(sc)?;
    let root = out_root(out_dir, sc.out_dir.as_deref());
    let csv = out.csv(sc.seed);
    let failed = |e: std::io::Error| CliError::Run(format!("writing {}: {e}", root.display()));
    let dir = write_experiment(&root, dir_name, &csv, &out.plot.to_svg()).map_err(failed)?;
    for (name, bytes) in &out.files {
        std::fs::write(dir.join(name), bytes).map_err(failed)?;
    }
    let mut msg = format!("{}: {} -> {}", out.name, out.summary, dir.display());
    let mut code = 0;
    if check {
        if out.violations.is_empty() {
            msg.push_str("\ncheck: ok");
        } else {
            code = 3;
            for v in &out.violations {
                msg.push_str(&format!("\ncheck: {v}"));
            }
        }
    }
    Ok((code, msg))
}

fn simple(name: &str, default_space: &str, c: &Common, lmax_key: Option<&str>) -> Result<u8, CliError> {
    let sc = scenario_of(name, default_space, c, lmax_key)?;
    let (code, msg) = execute(&sc, name, c.out_dir.as_deref(), c.check)?;
    println!("{msg}");
    Ok(code)
}

fn run_files(files: &[PathBuf], seed: Option<u64>, out_dir: Option<&Path>, check: bool, set: &[String]) -> u8 {
    let mut overrides = Vec::new();
    for kv in set {
        match kv.split_once('=') {
            Some((k, v)) => overrides.push((k.trim().to_string(), spaces::parse_value(v.trim()))),
            None => {
                eprintln!("error: invalid input: --set {kv:?}: expected PATH=VALUE");
                return 2;
            }
        }
    }
    let results: Vec<Result<(u8, String), CliError>> = files
        .par_iter()
        .map(|f| {
            let mut sc = scenario::load(f, &overrides)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
            execute(&sc, stem, out_dir, check).map_err(|e| match e {
                CliError::Validation(m) => CliError::Validation(format!("{}: {m}", f.display())),
                CliError::Run(m) => CliError::Run(format!("{}: {m}", f.display())),
            })
        })
        .collect();
    let mut codes = Vec::new();
    for r in results {
        match r {
            Ok((c, msg)) => {
                println!("{msg}");
                codes.push(c);
            }
            Err(e) => {
                eprintln!("error: {e}");
                codes.push(e.code());
            }
        }
    }
    [2, 1, 3].into_iter().find(|c| codes.contains(c)).unwrap_or(0)
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Dist { space, p, q } => {
            let s = spaces::build(space.space.as_deref().unwrap_or("plane"), &spaces::kv_table(&space.space_param)?, space.seed, "space")?;
            let d = s.distance(&spaces::point(&s, &p)?, &spaces::point(&s, &q)?)?;
            println!("{d:?}");
            Ok(0)
        }
        Cmd::Dhat { common: c, p, q } => {
            let kind = c.space.space.clone().unwrap_or_else(|| "strip".into());
            let s = spaces::build(&kind, &spaces::kv_table(&c.space.space_param)?, c.space.seed, "space")?;
            let x = match p {
                Some(p) => spaces::point(&s, &p)?,
                None => s.origin(),
            };
            let y = match q {
                Some(q) => spaces::point(&s, &q)?,
                None if s.as_strip().is_some() => s.point_xy(15.0, 0.0)?,
                None => return Err(CliError::Validation("--q is required outside strip spaces".into())),
            };
            let lmax = c.lmax.unwrap_or(DEFAULT_LMAX);
            let b = if s.as_strip().is_some() {
                dhat(&AxisFamilyOracle::new(&s, c.pool_density.unwrap_or(EXAMPLE51_STEP))?, &x, &y, lmax)?
            } else {
                let g = s.geodesic(&x, &y)?;
                let pool = CurtainPool::from_probes(&s, vec![g], c.pool_density.unwrap_or(0.5), c.pool_size.unwrap_or(curtainlab::separation::DEFAULT_CAP))?;
                dhat(&PoolOracle::new(&pool, SampleBudget::default()), &x, &y, lmax)?
            };
            println!("{} {}", num(b.lower.value), num(b.upper.value));
            Ok(0)
        }
        Cmd::Kchain { common, d } => {
            let mut sc = scenario_of("kchain", "h2", &common, None)?;
            sc.experiment.params.insert("D".into(), spaces::parse_value(&d));
            print!("{}", scenario::kchain_listing(&sc)?);
            Ok(0)
        }
        Cmd::Deltascan(c) => simple("deltascan", "tree", &c, Some("l")),
        Cmd::Gridscan(c) => simple("gridscan", "plane", &c, None),
        Cmd::Shadow(c) => simple("shadow", "h2", &c, Some("l_max")),
        Cmd::Injectivity(c) => simple("injectivity", "tripod", &c, Some("l_max")),
        Cmd::Example51(c) => simple("example51", "strip", &c, Some("l_max")),
        Cmd::Run { files, seed, out_dir, check, set } => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.max(1)).build().map_err(|e| CliError::Run(e.to_string()))?;
            Ok(pool.install(|| run_files(&files, seed, out_dir.as_deref(), check, &set)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
