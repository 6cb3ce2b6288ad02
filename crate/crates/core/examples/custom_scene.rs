//! Load a scene from JSON: a planar-ish 3-joint arm next to one sphere.

use cspace_belief::kinematics::{collision_check, Scene};

const SCENE: &str = r#"{
  "name": "pillar",
  "obstacles": [
    { "type": "sphere", "center": [0.6, 0.0, 0.5], "radius": 0.15 },
    { "type": "box", "min": [-1, -1, -0.2], "max": [1, 1, -0.1] }
  ],
  "arm": {
    "axes": [[0, 0, 1], [0, 1, 0], [0, 1, 0]],
    "offsets": [[0, 0, 0.3], [0, 0, 0.4], [0, 0, 0.35]],
    "radii": [0.05, 0.04, 0.03],
    "limits": [[-3.1, 3.1], [-1.5, 1.5], [-2.5, 2.5]]
  }
}"#;

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::from_json(SCENE)?;
    println!(
        "{}: {} obstacles, {} joints",
        scene.name(),
        scene.world.obstacles().len(),
        scene.arm.dof()
    );
    for q in [[0.0, 0.0, 0.0], [0.0, 0.9, 0.6], [1.5, 0.9, 0.6], [0.0, 1.5, 2.5]] {
        println!("{q:?}: {:?}", collision_check(&scene.world, &scene.arm, &q)?.state);
    }
    Ok(())
}
