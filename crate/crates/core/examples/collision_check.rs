//! Classify a few configurations against the shelf scene.

use cspace_belief::kinematics::{collision_check, CollisionState, Scene};

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::builtin("shelf")?;
    let configs = [
        ("upright", [0.0f64, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ("reach into shelf", [0.0, 0.9, 0.0, 0.6, 0.0, 0.3, 0.0]),
        ("lean back into wall", [3.0, 1.2, 0.0, 0.3, 0.0, 0.0, 0.0]),
        ("fold down to floor", [0.0, 1.9, 0.0, 1.2, 0.0, 1.0, 0.0]),
    ];
    for (label, q) in configs {
        let q: Vec<f64> = q
            .iter()
            .zip(scene.arm.lower().iter().zip(scene.arm.upper()))
            .map(|(v, (l, u))| v.clamp(*l, *u))
            .collect();
        let out = collision_check(&scene.world, &scene.arm, &q)?;
        match (out.state, out.report) {
            (CollisionState::Obs, Some(rep)) => println!(
                "{label:>20}: obs, first link {} at ({:.3}, {:.3}, {:.3})",
                rep.first_link_index, rep.centroid.x, rep.centroid.y, rep.centroid.z
            ),
            (state, _) => println!("{label:>20}: {state:?}"),
        }
    }
    Ok(())
}
