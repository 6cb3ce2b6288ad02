//! Forward kinematics and collision checking against independent
//! re-implementations.

use cspace_belief::kinematics::{
    collision_check, forward_kinematics, ArmSpec, CollisionState, Joint, Primitive, Scene, World, BUILTIN_SCENES,
};
use nalgebra::{Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_q(arm: &ArmSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    arm.lower()
        .iter()
        .zip(arm.upper())
        .map(|(&l, &u)| rng.gen_range(l..=u))
        .collect()
}

/// 4x4 rotation about a unit axis, written out from Rodrigues' formula.
fn rot4(axis: &Vector3<f64>, angle: f64) -> Matrix4<f64> {
    let (x, y, z) = (axis.x, axis.y, axis.z);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    Matrix4::new(
        t * x * x + c,
        t * x * y - s * z,
        t * x * z + s * y,
        0.0,
        t * x * y + s * z,
        t * y * y + c,
        t * y * z - s * x,
        0.0,
        t * x * z - s * y,
        t * y * z + s * x,
        t * z * z + c,
        0.0,
        0.0,
        0.0,
        0.0,
        1.0,
    )
}

fn trans4(v: &Vector3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m[(0, 3)] = v.x;
    m[(1, 3)] = v.y;
    m[(2, 3)] = v.z;
    m
}

/// Joint origins from a product of homogeneous transforms.
fn origins_by_transforms(arm: &ArmSpec, q: &[f64]) -> Vec<Vector3<f64>> {
    let mut t = Matrix4::identity();
    let mut out = vec![Vector3::zeros()];
    for (j, joint) in arm.joints().iter().enumerate() {
        t = t * rot4(&joint.axis, q[j]) * trans4(&joint.offset);
        let p = t * Vector4::new(0.0, 0.0, 0.0, 1.0);
        out.push(p.xyz());
    }
    out
}

#[test]
fn planar_two_link_arm() {
    let j = Joint {
        axis: Vector3::z(),
        offset: Vector3::x(),
        radius: 0.05,
    };
    let arm = ArmSpec::new(vec![j.clone(), j], vec![-3.0; 2], vec![3.0; 2]).unwrap();
    let ee = forward_kinematics(&arm, &[0.0, 0.0]).unwrap().end_effector;
    assert!((ee - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-15);
    let ee = forward_kinematics(&arm, &[std::f64::consts::FRAC_PI_2, 0.0])
        .unwrap()
        .end_effector;
    assert!((ee - Vector3::new(0.0, 2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn seven_joint_arm_matches_transform_product() {
    let arm = ArmSpec::synthetic_7dof();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..2000 {
        let q = random_q(&arm, &mut rng);
        let pose = forward_kinematics(&arm, &q).unwrap();
        let oracle = origins_by_transforms(&arm, &q);
        for (l, cap) in pose.capsules.iter().enumerate() {
            assert!((cap.start - oracle[l]).norm() < 1e-10);
            assert!((cap.end - oracle[l + 1]).norm() < 1e-10);
        }
        assert!((pose.end_effector - oracle[7]).norm() < 1e-10);
    }
}

fn point_to_primitive(p: &Vector3<f64>, o: &Primitive) -> f64 {
    match o {
        Primitive::Sphere { center, radius } => (p - center).norm() - radius,
        Primitive::AxisAlignedBox { min, max } => {
            let clamped = Vector3::new(
                p.x.clamp(min.x, max.x),
                p.y.clamp(min.y, max.y),
                p.z.clamp(min.z, max.z),
            );
            (p - clamped).norm()
        }
    }
}

fn point_to_segment(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + t * ab)).norm()
}

const STEPS: usize = 2000;

fn along(a: &Vector3<f64>, b: &Vector3<f64>) -> impl Iterator<Item = Vector3<f64>> {
    let (a, b) = (*a, *b);
    (0..=STEPS).map(move |i| a + (b - a) * (i as f64 / STEPS as f64))
}

/// Classification by dense sampling of each capsule axis.
fn sampled_state(world: &World, arm: &ArmSpec, q: &[f64]) -> (CollisionState, Option<usize>) {
    let pts = origins_by_transforms(arm, q);
    let radius = |l: usize| arm.joints()[l].radius;
    let n = arm.dof();
    for i in 0..n {
        for j in i + 2..n {
            let d = along(&pts[i], &pts[i + 1])
                .map(|p| point_to_segment(&p, &pts[j], &pts[j + 1]))
                .fold(f64::INFINITY, f64::min);
            if d < radius(i) + radius(j) {
                return (CollisionState::SelfCollision, None);
            }
        }
    }
    for l in 0..n {
        let hit = world.obstacles().iter().any(|o| {
            along(&pts[l], &pts[l + 1])
                .map(|p| point_to_primitive(&p, o))
                .fold(f64::INFINITY, f64::min)
                < radius(l)
        });
        if hit {
            return (CollisionState::Obs, Some(l + 1));
        }
    }
    (CollisionState::Free, None)
}

#[test]
fn collision_check_agrees_with_point_sampling() {
    for (s, name) in BUILTIN_SCENES.iter().enumerate() {
        let scene = Scene::builtin(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + s as u64);
        let trials = 1500;
        let mut agree = 0;
        let mut states = [0usize; 3];
        for _ in 0..trials {
            let q = random_q(&scene.arm, &mut rng);
            let out = collision_check(&scene.world, &scene.arm, &q).unwrap();
            let (state, link) = sampled_state(&scene.world, &scene.arm, &q);
            if out.state == state && out.report.map(|r| r.first_link_index) == link {
                agree += 1;
            }
            states[state as usize] += 1;
        }
        let rate = agree as f64 / trials as f64;
        assert!(rate >= 0.999, "{name}: agreement {rate}");
        assert!(states[0] > 0 && states[1] > 0, "{name}: {states:?}");
    }
}

#[test]
fn centroid_lies_on_the_reported_link_inside_an_obstacle() {
    let scene = Scene::builtin("clutter").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut seen = 0;
    while seen < 300 {
        let q = random_q(&scene.arm, &mut rng);
        let out = collision_check(&scene.world, &scene.arm, &q).unwrap();
        let Some(rep) = out.report else { continue };
        seen += 1;
        let pts = origins_by_transforms(&scene.arm, &q);
        let l = rep.first_link_index;
        assert!(point_to_segment(&rep.centroid, &pts[l - 1], &pts[l]) < 1e-9);
        let r = scene.arm.joints()[l - 1].radius;
        let touching: Vec<&Primitive> = scene
            .world
            .obstacles()
            .iter()
            .filter(|o| along(&pts[l - 1], &pts[l]).any(|p| point_to_primitive(&p, o) < r))
            .collect();
        // With one obstacle the penetration interval is connected, so its
        // midpoint is inside the inflated obstacle.
        if let [o] = touching[..] {
            let d = point_to_primitive(&rep.centroid, o);
            assert!(d <= r + 1e-6, "centroid {d} from the obstacle, radius {r}");
        }
    }
}
