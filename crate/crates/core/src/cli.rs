//! Command-line front end.
//!
//! Exit codes: `0` success, `1` runtime failure (including any failed
//! sweep cell), `2` usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimators::{ModelSpec, Strategy};
use crate::evaluation::{evaluate, generate_query_set, run_sweep, write_sweep_csv, SweepConfig, SweepRow};
use crate::kinematics::{collision_check, CollisionState, Primitive, Scene, BUILTIN_SCENES};
use crate::sampling::{
    generate_training_set, read_dataset, transform_to_cspace, write_dataset, SampleClass, SobolGenerator,
};
use crate::similarity::{importance_weights_for_set, MeasureKind};

#[derive(Debug, Parser)]
#[command(
    name = "cspace-belief",
    version,
    about = "Collision-belief models over a robot arm's configuration space"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a balanced training set and write it as dataset CSV.
    GenDataset(GenDatasetArgs),
    /// Build one model, evaluate it on a seeded query set and report the metrics.
    Eval(EvalArgs),
    /// Evaluate a grid of scenes, strategies, measures, sizes, parameters and seeds.
    Sweep(SweepArgs),
    /// Describe a scene and its arm.
    SceneInfo(SceneInfoArgs),
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Built-in scene name (shelf, table, clutter) or path to a scene JSON file.
    #[arg(long)]
    pub scene: String,
    /// Number of samples (even; half free, half in collision).
    #[arg(long)]
    pub n: usize,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write importance-weight columns w0..w{d-1}.
    #[arg(long)]
    pub weights: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scene: String,
    /// Training size; ignored when --dataset is given.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Read the training set from a dataset CSV instead of generating it.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// nn, ann, gaussian, epanechnikov or topo.
    #[arg(long, default_value = "nn")]
    pub strategy: String,
    /// euclidean, weighted-euclidean, mahalanobis or weighted-mahalanobis.
    #[arg(long, default_value = "euclidean")]
    pub measure: String,
    /// Neighbor count (nn, ann).
    #[arg(long)]
    pub k: Option<usize>,
    /// Approximation factor (ann).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Kernel radius (gaussian, epanechnikov).
    #[arg(long)]
    pub r: Option<f64>,
    /// Primary-to-secondary belief ratio (topo).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Full model descriptor, e.g. "strategy=nn k=10 measure=euclidean";
    /// replaces the individual model flags.
    #[arg(long, conflicts_with_all = ["strategy", "measure", "k", "eps", "r", "rho"])]
    pub model: Option<String>,
    /// Number of query configurations.
    #[arg(long, default_value_t = 1000)]
    pub queries: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Append the result row to this CSV (header written when the file is new).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record build and query times (makes output run-dependent).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Run manifest with `key = value` lines using the flag names below;
    /// flags given on the command line take precedence.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Comma-separated scene names or paths [default: shelf,table,clutter].
    #[arg(long, value_delimiter = ',')]
    pub scenes: Vec<String>,
    /// Comma-separated strategy names [default: nn].
    #[arg(long, value_delimiter = ',')]
    pub strategies: Vec<String>,
    /// Comma-separated measure names [default: euclidean].
    #[arg(long, value_delimiter = ',')]
    pub measures: Vec<String>,
    /// Comma-separated training sizes [default: 2000].
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// k grid for nn/ann [default: 10].
    #[arg(long, value_delimiter = ',')]
    pub ks: Vec<usize>,
    /// r grid for gaussian/epanechnikov [default: 1.5].
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// rho grid for topo [default: 100].
    #[arg(long, value_delimiter = ',')]
    pub rhos: Vec<f64>,
    /// Approximation factor for ann [default: 0.5].
    #[arg(long)]
    pub eps: Option<f64>,
    /// Comma-separated query seeds [default: 1].
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    /// Queries per cell [default: 1000].
    #[arg(long)]
    pub queries: Option<usize>,
    /// Parallel sweep cells [default: 1].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output CSV path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the build_ms and query_us columns.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SceneInfoArgs {
    #[arg(long)]
    pub scene: String,
    /// Also classify this many Sobol samples and report class fractions.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
}

/// Validated eval settings.
#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub scene: Scene,
    pub n: usize,
    pub dataset: Option<PathBuf>,
    pub spec: ModelSpec,
    pub queries: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub timing: bool,
}

/// A fully validated command.
#[derive(Clone, Debug)]
pub enum RunConfig {
    GenDataset {
        scene: Scene,
        n: usize,
        out: PathBuf,
        weights: bool,
    },
    Eval(EvalConfig),
    Sweep {
        config: SweepConfig,
        out: Option<PathBuf>,
    },
    SceneInfo {
        scene: Scene,
        samples: usize,
    },
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn check_training_size(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(usage(format!("--n must be even and at least 2, got {n}")));
    }
    Ok(())
}

fn eval_spec(a: &EvalArgs) -> Result<ModelSpec> {
    if let Some(text) = &a.model {
        return text.parse();
    }
    let mut text = format!("strategy={} measure={}", a.strategy, a.measure);
    if let Some(k) = a.k {
        text += &format!(" k={k}");
    }
    if let Some(e) = a.eps {
        text += &format!(" eps={e}");
    }
    if let Some(r) = a.r {
        text += &format!(" r={r}");
    }
    if let Some(rho) = a.rho {
        text += &format!(" rho={rho}");
    }
    text.parse()
}

/// Parse a run manifest: `key = value` lines, `#` comments.
pub fn parse_manifest(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("manifest line {}: expected key = value", i + 1)))?;
        let key = k.trim().to_string();
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Parse(format!("manifest line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Parse(format!("manifest `{key}`: bad value `{s}`")))
        })
        .collect()
}

fn sweep_config(a: SweepArgs) -> Result<(SweepConfig, Option<PathBuf>)> {
    let mut a = a;
    if let Some(path) = a.manifest.take() {
        let text = std::fs::read_to_string(&path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for (key, v) in parse_manifest(&text)? {
            match key.as_str() {
                "scenes" if a.scenes.is_empty() => a.scenes = list(&key, &v)?,
                "strategies" if a.strategies.is_empty() => a.strategies = list(&key, &v)?,
                "measures" if a.measures.is_empty() => a.measures = list(&key, &v)?,
                "sizes" if a.sizes.is_empty() => a.sizes = list(&key, &v)?,
                "ks" if a.ks.is_empty() => a.ks = list(&key, &v)?,
                "radii" if a.radii.is_empty() => a.radii = list(&key, &v)?,
                "rhos" if a.rhos.is_empty() => a.rhos = list(&key, &v)?,
                "seeds" if a.seeds.is_empty() => a.seeds = list(&key, &v)?,
                "eps" if a.eps.is_none() => a.eps = Some(one(&key, &v)?),
                "queries" if a.queries.is_none() => a.queries = Some(one(&key, &v)?),
                "jobs" if a.jobs.is_none() => a.jobs = Some(one(&key, &v)?),
                "timing" => a.timing |= one::<bool>(&key, &v)?,
                "out" if a.out.is_none() => a.out = Some(base.join(v)),
                "scenes" | "strategies" | "measures" | "sizes" | "ks" | "radii" | "rhos" | "seeds" | "eps"
                | "queries" | "jobs" | "out" => {}
                other => return Err(Error::Parse(format!("unknown manifest key `{other}`"))),
            }
        }
    }
    let scenes = if a.scenes.is_empty() {
        BUILTIN_SCENES.iter().map(|s| s.to_string()).collect()
    } else {
        a.scenes
    };
    let scenes = scenes.iter().map(|s| Scene::resolve(s)).collect::<Result<Vec<_>>>()?;
    let names = if a.strategies.is_empty() {
        vec!["nn".to_string()]
    } else {
        a.strategies
    };
    let eps = a.eps.unwrap_or(crate::estimators::DEFAULT_EPS);
    let mut strategies = Vec::new();
    for name in &names {
        let mut s = ModelSpec::default_for(name, MeasureKind::Euclidean)?.strategy;
        if let Strategy::ApproxKnn { k, .. } = s {
            s = Strategy::ApproxKnn { k, eps };
        }
        strategies.push(ModelSpec::new(s, MeasureKind::Euclidean)?.strategy);
    }
    let has = |f: fn(&Strategy) -> bool| strategies.iter().any(f);
    if !a.ks.is_empty() && !has(|s| matches!(s, Strategy::ExactKnn { .. } | Strategy::ApproxKnn { .. })) {
        return Err(usage("--ks given but no nn or ann strategy selected"));
    }
    if !a.radii.is_empty() && !has(|s| matches!(s, Strategy::FixedRadius { .. })) {
        return Err(usage("--radii given but no gaussian or epanechnikov strategy selected"));
    }
    if !a.rhos.is_empty() && !has(|s| matches!(s, Strategy::Topological { .. })) {
        return Err(usage("--rhos given but no topo strategy selected"));
    }
    if a.eps.is_some() && !has(|s| matches!(s, Strategy::ApproxKnn { .. })) {
        return Err(usage("--eps given but no ann strategy selected"));
    }
    for &n in &a.sizes {
        check_training_size(n)?;
    }
    let measures = if a.measures.is_empty() {
        vec![MeasureKind::Euclidean]
    } else {
        a.measures.iter().map(|m| m.parse()).collect::<Result<Vec<_>>>()?
    };
    let config = SweepConfig {
        scenes,
        strategies,
        measures,
        sizes: if a.sizes.is_empty() { vec![2000] } else { a.sizes },
        ks: a.ks,
        radii: a.radii,
        rhos: a.rhos,
        seeds: if a.seeds.is_empty() { vec![1] } else { a.seeds },
        queries: a.queries.unwrap_or(1000),
        jobs: a.jobs.unwrap_or(1),
        timing: a.timing,
    };
    if config.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    if config.queries == 0 {
        return Err(usage("--queries must be at least 1"));
    }
    Ok((config, a.out))
}

fn one<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("manifest `{key}`: bad value `{v}`")))
}

impl RunConfig {
    pub fn from_command(cmd: Command) -> Result<Self> {
        match cmd {
            Command::GenDataset(a) => {
                check_training_size(a.n)?;
                Ok(RunConfig::GenDataset {
                    scene: Scene::resolve(&a.scene)?,
                    n: a.n,
                    out: a.out,
                    weights: a.weights,
                })
            }
            Command::Eval(a) => {
                if a.dataset.is_none() {
                    check_training_size(a.n)?;
                }
                if a.queries == 0 {
                    return Err(usage("--queries must be at least 1"));
                }
                let spec = eval_spec(&a)?;
                Ok(RunConfig::Eval(EvalConfig {
                    scene: Scene::resolve(&a.scene)?,
                    n: a.n,
                    dataset: a.dataset,
                    spec,
                    queries: a.queries,
                    seed: a.seed,
                    out: a.out,
                    timing: a.timing,
                }))
            }
            Command::Sweep(a) => {
                let (config, out) = sweep_config(a)?;
                Ok(RunConfig::Sweep { config, out })
            }
            Command::SceneInfo(a) => Ok(RunConfig::SceneInfo {
                scene: Scene::resolve(&a.scene)?,
                samples: a.samples,
            }),
        }
    }
}

fn gen_dataset(scene: &Scene, n: usize, out: &Path, weights: bool, stdout: &mut dyn Write) -> Result<()> {
    let set = generate_training_set(&scene.world, &scene.arm, n)?;
    let w = if weights {
        Some(
            importance_weights_for_set(&scene.arm, &set)?
                .into_iter()
                .map(|w| w.into_inner())
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    write_dataset(BufWriter::new(File::create(out)?), &set, w.as_deref())?;
    writeln!(
        stdout,
        "scene={} samples={} free={} obs={} checks={} self_collisions={} out={}",
        scene.name(),
        set.len(),
        set.free.len(),
        set.obs.len(),
        set.checks,
        set.self_collisions,
        out.display()
    )?;
    Ok(())
}

fn run_eval(c: &EvalConfig, stdout: &mut dyn Write) -> Result<()> {
    let (set, weights) = match &c.dataset {
        Some(path) => {
            let d = read_dataset(File::open(path)?)?;
            if d.set.dof() != c.scene.arm.dof() {
                return Err(Error::DimensionMismatch {
                    expected: c.scene.arm.dof(),
                    actual: d.set.dof(),
                });
            }
            (d.set, d.weights)
        }
        None => (generate_training_set(&c.scene.world, &c.scene.arm, c.n)?, None),
    };
    let queries = generate_query_set(&c.scene.world, &c.scene.arm, c.queries, c.seed, Some(&set))?;
    let start = Instant::now();
    let model = match (&weights, c.spec.measure.is_weighted()) {
        (Some(w), true) => c.spec.build_with_weights(&set, Some(w))?,
        _ => c.spec.build(&c.scene.arm, &set)?,
    };
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let r = evaluate(&model, &queries)?;
    let row = SweepRow {
        scene: c.scene.name().to_string(),
        strategy: c.spec.strategy.name().to_string(),
        measure: c.spec.measure,
        n: set.len(),
        param: c.spec.strategy.param(),
        seed: c.seed,
        accuracy: Some(r.accuracy),
        avg_error: Some(r.avg_error),
        build_ms: c.timing.then_some(build_ms),
        query_us: c.timing.then_some(r.query_us),
    };
    write!(
        stdout,
        "scene={} model=\"{}\" N={} queries={} seed={} accuracy={} avg_error={} free_accuracy={} obs_accuracy={}",
        row.scene,
        c.spec,
        row.n,
        r.total,
        c.seed,
        r.accuracy,
        r.avg_error,
        r.free.accuracy(),
        r.obs.accuracy()
    )?;
    if c.timing {
        write!(stdout, " build_ms={build_ms} query_us={}", r.query_us)?;
    }
    writeln!(stdout)?;
    if let Some(path) = &c.out {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        write_sweep_csv(file, std::slice::from_ref(&row), fresh)?;
    }
    Ok(())
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Returns whether every cell succeeded.
fn run_sweep_cmd(
    config: &SweepConfig,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<bool> {
    let result = run_sweep(config)?;
    match out {
        Some(path) => write_sweep_csv(BufWriter::new(File::create(path)?), &result.rows, true)?,
        None => write_sweep_csv(&mut *stdout, &result.rows, true)?,
    }
    for f in &result.failures {
        let row = &result.rows[f.row];
        writeln!(
            stderr,
            "sweep-cell-failed scene={} strategy={} measure={} N={} param={} seed={} message={}",
            row.scene,
            row.strategy,
            row.measure,
            row.n,
            row.param,
            row.seed,
            quote(&f.message)
        )?;
    }
    Ok(result.failures.is_empty())
}

fn scene_info(scene: &Scene, samples: usize, stdout: &mut dyn Write) -> Result<()> {
    let arm = &scene.arm;
    writeln!(stdout, "scene: {}", scene.name())?;
    writeln!(stdout, "obstacles: {}", scene.world.obstacles().len())?;
    for (i, o) in scene.world.obstacles().iter().enumerate() {
        match o {
            Primitive::Sphere { center, radius } => writeln!(
                stdout,
                "  {i}: sphere center=({}, {}, {}) radius={radius}",
                center.x, center.y, center.z
            )?,
            Primitive::AxisAlignedBox { min, max } => writeln!(
                stdout,
                "  {i}: box min=({}, {}, {}) max=({}, {}, {})",
                min.x, min.y, min.z, max.x, max.y, max.z
            )?,
        }
    }
    writeln!(stdout, "dof: {}", arm.dof())?;
    for (j, joint) in arm.joints().iter().enumerate() {
        writeln!(
            stdout,
            "  joint {j}: axis=({}, {}, {}) offset=({}, {}, {}) radius={} limits=[{}, {}]",
            joint.axis.x,
            joint.axis.y,
            joint.axis.z,
            joint.offset.x,
            joint.offset.y,
            joint.offset.z,
            joint.radius,
            arm.lower()[j],
            arm.upper()[j]
        )?;
    }
    if samples > 0 {
        let mut sobol = SobolGenerator::new(arm.dof())?;
        let (mut free, mut obs, mut selfc) = (0usize, 0usize, 0usize);
        let mut first_links = vec![0usize; arm.dof() + 1];
        for _ in 0..samples {
            let q = transform_to_cspace(&sobol.next_point()?, arm)?;
            let out = collision_check(&scene.world, arm, &q)?;
            match (out.state, SampleClass::from_state(out.state)) {
                (CollisionState::SelfCollision, _) => selfc += 1,
                (_, Some(SampleClass::Free)) => free += 1,
                _ => {
                    obs += 1;
                    if let Some(r) = out.report {
                        first_links[r.first_link_index] += 1;
                    }
                }
            }
        }
        let frac = |x: usize| x as f64 / samples as f64;
        writeln!(
            stdout,
            "sobol samples: {samples} free={} ({:.4}) obs={} ({:.4}) self={} ({:.4})",
            free,
            frac(free),
            obs,
            frac(obs),
            selfc,
            frac(selfc)
        )?;
        let hist: Vec<String> = first_links[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{}:{c}", i + 1))
            .collect();
        writeln!(stdout, "first colliding link: {}", hist.join(" "))?;
    }
    Ok(())
}

/// Execute a validated command. Returns the process exit code.
pub fn execute(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match config {
        RunConfig::GenDataset { scene, n, out, weights } => gen_dataset(scene, *n, out, *weights, stdout).map(|_| true),
        RunConfig::Eval(c) => run_eval(c, stdout).map(|_| true),
        RunConfig::Sweep { config, out } => run_sweep_cmd(config, out.as_deref(), stdout, stderr),
        RunConfig::SceneInfo { scene, samples } => scene_info(scene, *samples, stdout).map(|_| true),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Parse arguments, validate and execute. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let config = match RunConfig::from_command(cli.command) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let code = execute(&config, &mut out, &mut err);
    let _ = out.flush();
    code
}
