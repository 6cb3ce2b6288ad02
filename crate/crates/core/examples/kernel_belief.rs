//! Fixed-radius Gaussian and Epanechnikov beliefs along a straight path.

use cspace_belief::estimators::ModelSpec;
use cspace_belief::kinematics::{collision_check, Scene};
use cspace_belief::sampling::generate_training_set;

fn main() -> cspace_belief::Result<()> {
    let scene = Scene::builtin("table")?;
    let set = generate_training_set(&scene.world, &scene.arm, 4000)?;
    let gauss = "strategy=gaussian r=1.5"
        .parse::<ModelSpec>()?
        .build(&scene.arm, &set)?;
    let epan = "strategy=epanechnikov r=1.5"
        .parse::<ModelSpec>()?
        .build(&scene.arm, &set)?;
    let start = [0.0, -0.5, 0.0, 0.5, 0.0, 0.0, 0.0];
    let end = [0.0, 1.6, 0.0, 1.2, 0.0, 0.8, 0.0];
    println!("{:>5} {:>10} {:>10} {:>12}", "t", "gaussian", "epanech.", "truth");
    for step in 0..=10 {
        let t = step as f64 / 10.0;
        let q: Vec<f64> = start.iter().zip(&end).map(|(a, b)| a + t * (b - a)).collect();
        let truth = collision_check(&scene.world, &scene.arm, &q)?.state;
        println!(
            "{t:>5.1} {:>+10.3} {:>+10.3} {:>12}",
            gauss.belief(&q),
            epan.belief(&q),
            format!("{truth:?}")
        );
    }
    Ok(())
}
