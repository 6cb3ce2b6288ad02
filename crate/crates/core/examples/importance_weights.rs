//! Importance weights of free and colliding samples, and the four
//! similarity measures they feed.

use std::sync::Arc;

use cspace_belief::kinematics::Scene;
use cspace_belief::sampling::generate_training_set;
use cspace_belief::similarity::{importance_weights_for_set, Covariance, MeasureKind, SimilarityMeasure};

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::builtin("clutter")?;
    let set = generate_training_set(&scene.world, &scene.arm, 400)?;
    let weights = importance_weights_for_set(&scene.arm, &set)?;
    let fmt = |w: &[f64]| w.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" ");

    println!("free sample 0:  {}", fmt(weights[0].as_slice()));
    for (j, rep) in set.reports.iter().enumerate().take(3) {
        let i = set.free.len() + j;
        println!(
            "obs sample {j} (link {}): {}",
            rep.first_link_index,
            fmt(weights[i].as_slice())
        );
    }

    let cov = Arc::new(Covariance::from_training_set(&set)?);
    let (a, b) = (&set.free[0], &set.free[1]);
    println!("\nsim(free 0, free 1):");
    for kind in MeasureKind::ALL {
        let m = SimilarityMeasure::new(kind, Some(cov.clone()))?;
        println!("  {kind:>20}: {:.4}", m.sim(a, b, Some(weights[0].as_slice())));
    }
    Ok(())
}
