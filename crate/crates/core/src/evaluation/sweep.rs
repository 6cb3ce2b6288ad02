use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use super::{evaluate, generate_query_set, QuerySet};
use crate::error::{Error, Result};
use crate::estimators::{ModelSpec, Strategy};
use crate::kinematics::Scene;
use crate::sampling::{generate_training_set, TrainingSet};
use crate::similarity::MeasureKind;

pub const SWEEP_HEADER: [&str; 10] = [
    "scene",
    "strategy",
    "measure",
    "N",
    "param",
    "seed",
    "accuracy",
    "avg_error",
    "build_ms",
    "query_us",
];

/// Scene label of the rows averaged over all scenes.
pub const MEAN_SCENE: &str = "mean";

/// Full cross product of scenes, strategies, measures, training sizes,
/// per-strategy parameters and query seeds.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub scenes: Vec<Scene>,
    /// Strategies with their non-swept settings (e.g. `eps`).
    pub strategies: Vec<Strategy>,
    pub measures: Vec<MeasureKind>,
    pub sizes: Vec<usize>,
    /// `k` grid for nn/ann; empty keeps each strategy's own value.
    pub ks: Vec<usize>,
    /// `r` grid for the kernel strategies.
    pub radii: Vec<f64>,
    /// `rho` grid for the topological strategy.
    pub rhos: Vec<f64>,
    pub seeds: Vec<u64>,
    pub queries: usize,
    pub jobs: usize,
    /// Fill the timing columns. Off by default so output is reproducible
    /// byte for byte.
    pub timing: bool,
}

impl SweepConfig {
    fn params_for(&self, s: &Strategy) -> Vec<f64> {
        let grid: Vec<f64> = match s {
            Strategy::ExactKnn { .. } | Strategy::ApproxKnn { .. } => self.ks.iter().map(|&k| k as f64).collect(),
            Strategy::FixedRadius { .. } => self.radii.clone(),
            Strategy::Topological { .. } => self.rhos.clone(),
        };
        if grid.is_empty() {
            vec![s.param()]
        } else {
            grid
        }
    }

    fn validate(&self) -> Result<()> {
        let empty = [
            (self.scenes.is_empty(), "scenes"),
            (self.strategies.is_empty(), "strategies"),
            (self.measures.is_empty(), "measures"),
            (self.sizes.is_empty(), "sizes"),
            (self.seeds.is_empty(), "seeds"),
        ];
        if let Some((_, what)) = empty.iter().find(|(e, _)| *e) {
            return Err(Error::InvalidInput(format!("sweep grid `{what}` is empty")));
        }
        if self.queries == 0 {
            return Err(Error::InvalidInput("query count must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scene: String,
    pub strategy: String,
    pub measure: MeasureKind,
    pub n: usize,
    pub param: f64,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub avg_error: Option<f64>,
    pub build_ms: Option<f64>,
    pub query_us: Option<f64>,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.scene.clone(),
            self.strategy.clone(),
            self.measure.to_string(),
            self.n.to_string(),
            self.param.to_string(),
            self.seed.to_string(),
            opt(self.accuracy),
            opt(self.avg_error),
            opt(self.build_ms),
            opt(self.query_us),
        ]
    }

    pub fn failed(&self) -> bool {
        self.accuracy.is_none()
    }
}

/// A cell that could not be evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFailure {
    pub row: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<CellFailure>,
}

struct Unit {
    scene: usize,
    strategy: Strategy,
    measure: MeasureKind,
}

type CellOutcome = std::result::Result<(f64, f64, f64, f64), String>;

fn run_unit(
    cfg: &SweepConfig,
    unit: &Unit,
    set: &std::result::Result<TrainingSet, String>,
    queries: &HashMap<u64, std::result::Result<QuerySet, String>>,
) -> Vec<CellOutcome> {
    let scene = &cfg.scenes[unit.scene];
    let set = match set {
        Ok(s) => s,
        Err(e) => return vec![Err(e.clone()); cfg.seeds.len()],
    };
    let start = Instant::now();
    let model = ModelSpec::new(unit.strategy, unit.measure).and_then(|spec| spec.build(&scene.arm, set));
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let model = match model {
        Ok(m) => m,
        Err(e) => return vec![Err(e.to_string()); cfg.seeds.len()],
    };
    cfg.seeds
        .iter()
        .map(|seed| {
            let qs = queries[seed].as_ref().map_err(|e| e.clone())?;
            let r = evaluate(&model, qs).map_err(|e| e.to_string())?;
            Ok((r.accuracy, r.avg_error, build_ms, r.query_us))
        })
        .collect()
}

/// Evaluate every cell of the grid. Rows come out in grid order (scene,
/// strategy, measure, N, param, seed) regardless of `jobs`, followed by the
/// mean-over-scenes rows when more than one scene is swept.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    pool.install(|| sweep_in_pool(cfg))
}

fn sweep_in_pool(cfg: &SweepConfig) -> Result<SweepResult> {
    let data_keys: Vec<(usize, usize)> = (0..cfg.scenes.len())
        .flat_map(|s| cfg.sizes.iter().map(move |&n| (s, n)))
        .collect();
    let data: HashMap<
        (usize, usize),
        (
            std::result::Result<TrainingSet, String>,
            HashMap<u64, std::result::Result<QuerySet, String>>,
        ),
    > = data_keys
        .par_iter()
        .map(|&(s, n)| {
            let scene = &cfg.scenes[s];
            let set = generate_training_set(&scene.world, &scene.arm, n).map_err(|e| e.to_string());
            let queries = cfg
                .seeds
                .iter()
                .map(|&seed| {
                    let qs = generate_query_set(&scene.world, &scene.arm, cfg.queries, seed, set.as_ref().ok())
                        .map_err(|e| e.to_string());
                    (seed, qs)
                })
                .collect();
            ((s, n), (set, queries))
        })
        .collect();

    let mut units = Vec::new();
    for s in 0..cfg.scenes.len() {
        for strategy in &cfg.strategies {
            for &measure in &cfg.measures {
                for &n in &cfg.sizes {
                    for p in cfg.params_for(strategy) {
                        let unit_strategy = strategy.with_param(p);
                        units.push((s, *strategy, p, unit_strategy, measure, n));
                    }
                }
            }
        }
    }
    let outcomes: Vec<Vec<CellOutcome>> = units
        .par_iter()
        .map(|(s, _, _, unit_strategy, measure, n)| match unit_strategy {
            Err(e) => vec![Err(e.to_string()); cfg.seeds.len()],
            Ok(st) => {
                let (set, queries) = &data[&(*s, *n)];
                let unit = Unit {
                    scene: *s,
                    strategy: *st,
                    measure: *measure,
                };
                run_unit(cfg, &unit, set, queries)
            }
        })
        .collect();

    let mut result = SweepResult::default();
    let mut by_key: HashMap<(usize, usize, usize, usize, usize, usize), Option<(f64, f64, f64, f64)>> = HashMap::new();
    let mut key_order = Vec::new();
    for ((s, strategy, p, _, measure, n), cells) in units.iter().zip(outcomes) {
        let strat_i = cfg.strategies.iter().position(|x| x == strategy).unwrap_or(0);
        let measure_i = cfg.measures.iter().position(|x| x == measure).unwrap_or(0);
        let n_i = cfg.sizes.iter().position(|x| x == n).unwrap_or(0);
        let p_i = cfg.params_for(strategy).iter().position(|x| x == p).unwrap_or(0);
        for (seed_i, (&seed, cell)) in cfg.seeds.iter().zip(cells).enumerate() {
            let mut row = SweepRow {
                scene: cfg.scenes[*s].name().to_string(),
                strategy: strategy.name().to_string(),
                measure: *measure,
                n: *n,
                param: *p,
                seed,
                accuracy: None,
                avg_error: None,
                build_ms: None,
                query_us: None,
            };
            let key = (strat_i, measure_i, n_i, p_i, seed_i, *s);
            match cell {
                Ok((acc, err, build, query)) => {
                    row.accuracy = Some(acc);
                    row.avg_error = Some(err);
                    if cfg.timing {
                        row.build_ms = Some(build);
                        row.query_us = Some(query);
                    }
                    by_key.insert(key, Some((acc, err, build, query)));
                }
                Err(message) => {
                    result.failures.push(CellFailure {
                        row: result.rows.len(),
                        message,
                    });
                    by_key.insert(key, None);
                }
            }
            if *s == 0 {
                key_order.push((*strategy, *p, *measure, *n, seed, key));
            }
            result.rows.push(row);
        }
    }

    if cfg.scenes.len() > 1 {
        key_order.sort_by_key(|k| k.5);
        for (strategy, p, measure, n, seed, key) in key_order {
            let cells: Option<Vec<(f64, f64, f64, f64)>> = (0..cfg.scenes.len())
                .map(|s| by_key.get(&(key.0, key.1, key.2, key.3, key.4, s)).copied().flatten())
                .collect();
            let mean = |f: fn(&(f64, f64, f64, f64)) -> f64, c: &Vec<(f64, f64, f64, f64)>| {
                c.iter().map(f).sum::<f64>() / c.len() as f64
            };
            result.rows.push(SweepRow {
                scene: MEAN_SCENE.to_string(),
                strategy: strategy.name().to_string(),
                measure,
                n,
                param: p,
                seed,
                accuracy: cells.as_ref().map(|c| mean(|x| x.0, c)),
                avg_error: cells.as_ref().map(|c| mean(|x| x.1, c)),
                build_ms: cells.as_ref().filter(|_| cfg.timing).map(|c| mean(|x| x.2, c)),
                query_us: cells.as_ref().filter(|_| cfg.timing).map(|c| mean(|x| x.3, c)),
            });
        }
    }
    Ok(result)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow], header: bool) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().from_writer(out);
    if header {
        csv.write_record(SWEEP_HEADER)?;
    }
    for row in rows {
        csv.write_record(row.record())?;
    }
    csv.flush()?;
    Ok(())
}
