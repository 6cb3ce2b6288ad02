//! Pose the built-in 7-DOF arm and print its link capsules.

use cspace_belief::kinematics::{forward_kinematics, ArmSpec};

fn main() -> cspace_belief::Result<()> {
    let arm = ArmSpec::synthetic_7dof();
    let q = [0.3, -0.6, 0.0, 1.4, 0.0, 0.5, 0.0];
    let pose = forward_kinematics(&arm, &q)?;
    println!("q = {q:?}");
    for (l, cap) in pose.capsules.iter().enumerate() {
        println!(
            "link {}: ({:+.3}, {:+.3}, {:+.3}) -> ({:+.3}, {:+.3}, {:+.3})  r = {}",
            l + 1,
            cap.start.x,
            cap.start.y,
            cap.start.z,
            cap.end.x,
            cap.end.y,
            cap.end.z,
            cap.radius
        );
    }
    let ee = pose.end_effector;
    println!("end effector: ({:+.4}, {:+.4}, {:+.4})", ee.x, ee.y, ee.z);
    Ok(())
}
