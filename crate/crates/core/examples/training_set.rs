//! Sobol coverage versus pseudorandom points, then a balanced training set
//! written as dataset CSV.

use cspace_belief::kinematics::Scene;
use cspace_belief::sampling::{generate_training_set, l2_star_discrepancy, write_dataset, SobolGenerator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> cspace_belief::Result<()> {
    let sobol: Vec<Vec<f64>> = SobolGenerator::new(7)?.take(500).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let random: Vec<Vec<f64>> = (0..500).map(|_| (0..7).map(|_| rng.gen()).collect()).collect();
    println!("L2-star discrepancy, 500 points in 7D");
    println!("  sobol:        {:.6}", l2_star_discrepancy(&sobol));
    println!("  pseudorandom: {:.6}", l2_star_discrepancy(&random));

    let scene = Scene::builtin("table")?;
    let set = generate_training_set(&scene.world, &scene.arm, 200)?;
    println!(
        "\ntraining set: {} free, {} obs after {} checks ({} self-collisions skipped)",
        set.free.len(),
        set.obs.len(),
        set.checks,
        set.self_collisions
    );
    let mut csv = Vec::new();
    write_dataset(&mut csv, &set, None)?;
    let text = String::from_utf8(csv).expect("utf-8");
    for line in text.lines().take(4) {
        println!("{line}");
    }
    Ok(())
}
