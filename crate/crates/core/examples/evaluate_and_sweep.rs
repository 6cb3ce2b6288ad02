//! Evaluate one model, then run a small sweep and print its CSV.

use cspace_belief::estimators::{Kernel, ModelSpec, Strategy};
use cspace_belief::evaluation::{evaluate, generate_query_set, run_sweep, write_sweep_csv, SweepConfig};
use cspace_belief::kinematics::Scene;
use cspace_belief::sampling::generate_training_set;
use cspace_belief::similarity::MeasureKind;

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::builtin("clutter")?;
    let set = generate_training_set(&scene.world, &scene.arm, 2000)?;
    let queries = generate_query_set(&scene.world, &scene.arm, 500, 1, Some(&set))?;
    let model = "strategy=nn k=10".parse::<ModelSpec>()?.build(&scene.arm, &set)?;
    let r = evaluate(&model, &queries)?;
    println!(
        "nn k=10, N=2000: accuracy {:.3} (free {:.3}, obs {:.3}), avg_error {:.3}\n",
        r.accuracy,
        r.free.accuracy(),
        r.obs.accuracy(),
        r.avg_error
    );

    let config = SweepConfig {
        scenes: vec![scene, Scene::builtin("table")?],
        strategies: vec![
            Strategy::ExactKnn { k: 10 },
            Strategy::FixedRadius {
                r: 1.5,
                kernel: Kernel::Epanechnikov,
            },
        ],
        measures: vec![MeasureKind::Euclidean],
        sizes: vec![500, 2000],
        ks: vec![],
        radii: vec![],
        rhos: vec![],
        seeds: vec![1, 2],
        queries: 300,
        jobs: 2,
        timing: false,
    };
    let result = run_sweep(&config)?;
    write_sweep_csv(std::io::stdout(), &result.rows, true)?;
    Ok(())
}
