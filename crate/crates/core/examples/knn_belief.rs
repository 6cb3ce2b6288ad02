//! Exact and approximate k-NN beliefs with their neighbor lists.

use cspace_belief::estimators::{Model, ModelSpec};
use cspace_belief::kinematics::{collision_check, Scene};
use cspace_belief::sampling::generate_training_set;

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::builtin("shelf")?;
    let set = generate_training_set(&scene.world, &scene.arm, 4000)?;
    let q = [0.2, 0.8, -0.3, 0.9, 0.1, 0.4, 0.0];
    println!(
        "ground truth: {:?}",
        collision_check(&scene.world, &scene.arm, &q)?.state
    );

    let exact: ModelSpec = "strategy=nn k=10 measure=euclidean".parse()?;
    let Model::Neighbor(nn) = exact.build(&scene.arm, &set)? else {
        unreachable!()
    };
    let (neighbors, stats) = nn.query_knn_k(&q, 10);
    println!("{exact}: belief {:+.3} ({} nodes)", nn.belief(&q), stats.nodes_visited);
    for n in &neighbors {
        println!(
            "  sample {:>4} {:?} sim {:.4}",
            n.index,
            nn.data().class(n.index),
            n.sim
        );
    }

    let approx: ModelSpec = "strategy=ann k=10 eps=0.5 measure=euclidean".parse()?;
    let Model::Neighbor(ann) = approx.build(&scene.arm, &set)? else {
        unreachable!()
    };
    let (_, stats) = ann.query_ann(&q);
    println!(
        "{approx}: belief {:+.3} ({} nodes)",
        ann.belief(&q),
        stats.nodes_visited
    );
    Ok(())
}
