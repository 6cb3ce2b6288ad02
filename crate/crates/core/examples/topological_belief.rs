//! Delaunay tessellation of the shoulder/elbow projection and the blended
//! topological belief.

use cspace_belief::estimators::{Model, ModelSpec};
use cspace_belief::kinematics::Scene;
use cspace_belief::sampling::generate_training_set;

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::builtin("clutter")?;
    let set = generate_training_set(&scene.world, &scene.arm, 2000)?;
    let spec: ModelSpec = "strategy=topo rho=100 measure=euclidean".parse()?;
    let Model::Topo(topo) = spec.build(&scene.arm, &set)? else {
        unreachable!()
    };
    let tess = topo.tessellation();
    println!("{} vertices, {} simplices", tess.num_vertices(), tess.num_simplices());

    for q in [
        [0.4, 0.6, 0.2, 1.0, -0.5, 0.3, 0.1],
        [-1.2, 1.5, 1.0, 2.0, 0.0, -1.0, 2.0],
        [2.6, 2.0, 2.8, 2.6, 0.0, 0.0, 0.0],
    ] {
        match (topo.containing_samples(&q), topo.partial_beliefs(&q)) {
            (Some(vs), Some((b1, b2))) => println!(
                "q {q:?}\n  simplex {vs:?}\n  bel1 {b1:+.3} bel2 {b2:+.3} -> belief {:+.4}",
                topo.belief(&q)
            ),
            _ => println!("q {q:?}\n  outside the hull -> belief {}", topo.belief(&q)),
        }
    }
    Ok(())
}
