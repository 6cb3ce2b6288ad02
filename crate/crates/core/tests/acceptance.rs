//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any hard criterion fails. Soft criteria are reported but do
//! not affect the exit status.

mod common;

use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cspace_belief::estimators::topo::combine;
use cspace_belief::estimators::{
    belief_weighted_average, epanechnikov_weight, gaussian_weight, Kernel, NeighborModel, Strategy, Tessellation,
    TrainingData,
};
use cspace_belief::evaluation::{generate_query_set, run_sweep, SweepConfig, SweepRow};
use cspace_belief::kinematics::{ArmSpec, CollisionReport, Scene, BUILTIN_SCENES};
use cspace_belief::sampling::{generate_training_set, l2_star_discrepancy, SampleClass, SobolGenerator};
use cspace_belief::similarity::{
    importance_weights_for_set, importance_weights_obs, Covariance, MeasureKind, SimilarityMeasure,
};
use nalgebra::{DMatrix, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut checked, mut mismatches) = (0usize, 0usize);
    for name in BUILTIN_SCENES {
        let scene = Scene::builtin(name).unwrap();
        let set = generate_training_set(&scene.world, &scene.arm, 2000).unwrap();
        let qs = generate_query_set(&scene.world, &scene.arm, 1000, 1, Some(&set)).unwrap();
        let weights: Vec<Vec<f64>> = importance_weights_for_set(&scene.arm, &set)
            .unwrap()
            .into_iter()
            .map(|w| w.into_inner())
            .collect();
        for kind in MeasureKind::ALL {
            let data = TrainingData::new(&set, kind.is_weighted().then_some(&weights[..])).unwrap();
            let m = NeighborModel::build(data, Strategy::ExactKnn { k: 10 }, kind).unwrap();
            for q in &qs.queries {
                let mut all: Vec<(f64, usize)> = (0..set.len()).map(|i| (m.sim_to(i, q), i)).collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let knn: Vec<usize> = m.query_knn_k(q, 10).0.iter().map(|n| n.index).collect();
                let want: Vec<usize> = all[..10].iter().map(|a| a.1).collect();
                mismatches += usize::from(knn != want);
                let inside: Vec<usize> = m.query_radius_r(q, 1.5).0.iter().map(|n| n.index).collect();
                let mut want: Vec<usize> = all.iter().filter(|a| a.0 < 1.5).map(|a| a.1).collect();
                want.sort_unstable();
                mismatches += usize::from(inside != want);
                checked += 2;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 60.0,
        format!("{checked} kNN/radius queries over 3 scenes x 4 measures, {mismatches} mismatches, {secs:.1} s"),
    )
}

/// Barycentric inverse per finite simplex for fast containment scans.
fn containment_scan(t: &Tessellation) -> Vec<(usize, Vec<f64>, Matrix4<f64>)> {
    t.simplices()
        .map(|(id, verts)| {
            let p0 = t.vertex(verts[0]).to_vec();
            let m = Matrix4::from_fn(|i, k| t.vertex(verts[k + 1])[i] - p0[i]);
            (id, p0, m.try_inverse().expect("non-degenerate simplex"))
        })
        .collect()
}

fn bary(p0: &[f64], inv: &Matrix4<f64>, p: &[f64]) -> [f64; 5] {
    let x = inv * Vector4::from_fn(|i, _| p[i] - p0[i]);
    [1.0 - x.sum(), x[0], x[1], x[2], x[3]]
}

fn delaunay_audit() -> Outcome {
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let (mut sphere_bad, mut exact_tests, mut probe_bad, mut probes, mut simplices) = (0, 0, 0, 0, 0);
    let mut exact_failures = 0;
    for set in 0..20u64 {
        let n = 100 + (set as usize * 200) / 19;
        let pts = common::random_points(n, 4, 7000 + set);
        let t = Tessellation::new(4, &pts).unwrap();
        simplices += t.num_simplices();
        sphere_bad += common::empty_sphere_violations(&t);
        match t.audit_empty_spheres() {
            Ok(k) => exact_tests += k,
            Err(_) => exact_failures += 1,
        }
        let scan = containment_scan(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(set);
        for _ in 0..500 {
            let p: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.1..1.1)).collect();
            probes += 1;
            let ok = match t.locate(&p) {
                Some(id) => scan
                    .iter()
                    .find(|s| s.0 == id)
                    .is_some_and(|(_, p0, inv)| bary(p0, inv, &p).iter().all(|&b| b >= -TOL)),
                None => scan
                    .iter()
                    .all(|(_, p0, inv)| bary(p0, inv, &p).iter().any(|&b| b <= TOL)),
            };
            probe_bad += usize::from(!ok);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        sphere_bad == 0 && exact_failures == 0 && probe_bad == 0 && secs < 120.0,
        format!(
            "20 sets, {simplices} simplices, {exact_tests} exact insphere tests, {sphere_bad} float violations, \
             {probe_bad}/{probes} locate mismatches, {secs:.1} s"
        ),
    )
}

fn formula_fidelity() -> Outcome {
    let mut worst = 0.0f64;
    let mut check = |got: f64, want: f64| {
        let err = if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        };
        worst = worst.max(err);
    };
    use SampleClass::{Free, Obs};
    check(epanechnikov_weight(0.0, 1.5), 0.75);
    check(epanechnikov_weight(1.5, 1.5), 0.0);
    check(epanechnikov_weight(0.5, 1.0), 0.5625);
    check(gaussian_weight(0.0, 2.0), 1.0);
    check(gaussian_weight(2.0f64.sqrt(), 2.0), (-1.0f64).exp());
    check(belief_weighted_average([(1.0, Free)]).unwrap(), -1.0);
    check(belief_weighted_average([(0.5, Free), (0.5, Obs)]).unwrap(), 0.0);
    check(belief_weighted_average([(1.0, Free), (0.5, Obs)]).unwrap(), -1.0 / 3.0);
    check(combine(1.0, -1.0, 100.0), 99.0 / 101.0);
    check(combine(-1.0, -1.0, 100.0), -1.0);

    let zero = [0.0; 7];
    let d = [3.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let w = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    // 4 I plus the relative ridge 1e-8 * trace / dim.
    let iso = Arc::new(Covariance::from_matrix(DMatrix::identity(7, 7) * 4.0).unwrap());
    let scale = (1.0f64 + 1e-8).sqrt();
    let measure = |kind, cov: &Arc<Covariance>| SimilarityMeasure::new(kind, Some(cov.clone())).unwrap();
    for kind in MeasureKind::ALL {
        check(measure(kind, &iso).sim(&d, &d, Some(&w)), 0.0);
    }
    check(measure(MeasureKind::Euclidean, &iso).sim(&zero, &d, None), 5.0);
    check(
        measure(MeasureKind::WeightedEuclidean, &iso).sim(&zero, &d, Some(&w)),
        3.0,
    );
    check(
        measure(MeasureKind::Mahalanobis, &iso).sim(&zero, &d, None),
        2.5 / scale,
    );
    check(
        measure(MeasureKind::WeightedMahalanobis, &iso).sim(&zero, &d, Some(&w)),
        1.5 / scale,
    );
    // [[2, 1], [1, 2]] with ridge r = 2e-8: (1, 1) gives 2 / (3 + r).
    let coupled = Arc::new(Covariance::from_matrix(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap());
    check(
        measure(MeasureKind::Mahalanobis, &coupled).sim(&[0.0, 0.0], &[1.0, 1.0], None),
        (2.0f64 / (3.0 + 2e-8)).sqrt(),
    );
    // With W = diag(1, 0) only the first row of the inverse contributes:
    // (2 + r - 1) / ((2 + r)^2 - 1).
    let r = 2e-8f64;
    check(
        measure(MeasureKind::WeightedMahalanobis, &coupled).sim(&[0.0, 0.0], &[1.0, 1.0], Some(&[1.0, 0.0])),
        ((1.0 + r) / ((2.0 + r) * (2.0 + r) - 1.0)).sqrt(),
    );
    outcome(
        worst <= 1e-12,
        format!("21 hand values, worst relative error {worst:.2e}"),
    )
}

/// End effector from a product of homogeneous transforms.
fn end_effector(arm: &ArmSpec, q: &[f64]) -> Vector3<f64> {
    let mut t = Matrix4::identity();
    for (joint, &angle) in arm.joints().iter().zip(q) {
        let mut step = Matrix4::identity();
        let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(joint.axis), angle);
        step.fixed_view_mut::<3, 3>(0, 0).copy_from(r.matrix());
        let mut tr = Matrix4::identity();
        tr.fixed_view_mut::<3, 1>(0, 3).copy_from(&joint.offset);
        t = t * step * tr;
    }
    (t * Vector4::new(0.0, 0.0, 0.0, 1.0)).xyz()
}

fn importance_weight_invariants() -> Outcome {
    let (mut norm_bad, mut tail_bad, mut unit_bad, mut obs_seen, mut link_one) = (0, 0, 0, 0, 0);
    let mut fd_worst = 0.0f64;
    let mut fd_checked = 0;
    for name in BUILTIN_SCENES {
        let scene = Scene::builtin(name).unwrap();
        let set = generate_training_set(&scene.world, &scene.arm, 2000).unwrap();
        let weights = importance_weights_for_set(&scene.arm, &set).unwrap();
        for (i, (q, class)) in set.samples().enumerate() {
            let w = weights[i].as_slice();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            norm_bad += usize::from((norm - 1.0).abs() > 1e-9);
            if class == SampleClass::Obs {
                obs_seen += 1;
                let l = set.report(i).unwrap().first_link_index;
                tail_bad += usize::from(w[l..].iter().any(|&v| v != 0.0));
                if l == 1 {
                    link_one += 1;
                    unit_bad += usize::from(w[0] != 1.0);
                }
            } else if fd_checked < 1000 && name == "clutter" {
                // Central-difference joint sensitivities of the end effector.
                fd_checked += 1;
                let h = 1e-6;
                let mut s: Vec<f64> = (0..7)
                    .map(|j| {
                        let mut a = q.to_vec();
                        let mut b = q.to_vec();
                        a[j] += h;
                        b[j] -= h;
                        (end_effector(&scene.arm, &a) - end_effector(&scene.arm, &b)).norm() / (2.0 * h)
                    })
                    .collect();
                let n = s.iter().map(|v| v * v).sum::<f64>().sqrt();
                s.iter_mut().for_each(|v| *v /= n);
                let diff = s.iter().zip(w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                fd_worst = fd_worst.max(diff);
            }
        }
    }
    // A report on link 1 gives e0 whatever the centroid.
    let arm = ArmSpec::synthetic_7dof();
    let rep = CollisionReport {
        first_link_index: 1,
        centroid: Vector3::new(0.3, -0.2, 0.1),
    };
    let e0 = importance_weights_obs(&arm, &[0.4; 7], &rep).unwrap();
    unit_bad += usize::from(e0.as_slice() != [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    outcome(
        norm_bad + tail_bad + unit_bad == 0 && fd_checked == 1000 && fd_worst <= 0.02,
        format!(
            "6000 samples: {norm_bad} norm, {tail_bad}/{obs_seen} tail, {unit_bad} link-1 ({link_one} in data) violations; \
             finite-difference oracle max deviation {fd_worst:.2e} on {fd_checked} free samples"
        ),
    )
}

fn sobol_quality() -> Outcome {
    let mut g = SobolGenerator::new(7).unwrap();
    let first = g.next_point().unwrap();
    let mut g1 = SobolGenerator::new(1).unwrap();
    let mut vdc_bad = 0;
    for i in 1u32..=1024 {
        let want = i.reverse_bits() as f64 / 2f64.powi(32);
        vdc_bad += usize::from(g1.next_point().unwrap()[0] != want);
    }
    let sobol: Vec<Vec<f64>> = SobolGenerator::new(7).unwrap().take(500).collect();
    let ds = l2_star_discrepancy(&sobol);
    let random: Vec<f64> = (0..21)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..500).map(|_| (0..7).map(|_| rng.gen()).collect()).collect();
            l2_star_discrepancy(&pts)
        })
        .collect();
    let dr = median(random);
    outcome(
        first.iter().all(|&v| v == 0.5) && vdc_bad == 0 && ds < dr,
        format!(
            "first point 0.5^7, {vdc_bad}/1024 van der Corput mismatches, 500-point 7D discrepancy {ds:.6} vs \
             pseudorandom median {dr:.6}"
        ),
    )
}

fn sweep(strategies: Vec<Strategy>, measure: MeasureKind, sizes: Vec<usize>) -> Vec<SweepRow> {
    let config = SweepConfig {
        scenes: BUILTIN_SCENES.iter().map(|s| Scene::builtin(s).unwrap()).collect(),
        strategies,
        measures: vec![measure],
        sizes,
        ks: vec![],
        radii: vec![],
        rhos: vec![],
        seeds: (1..=5).collect(),
        queries: 2000,
        jobs: jobs(),
        timing: false,
    };
    let result = run_sweep(&config).unwrap();
    assert!(result.failures.is_empty(), "sweep cells failed");
    result.rows
}

/// Median-over-seeds accuracy for one scene, strategy and size.
fn cell(rows: &[SweepRow], scene: &str, strategy: &str, n: usize) -> f64 {
    median(
        rows.iter()
            .filter(|r| r.scene == scene && r.strategy == strategy && r.n == n)
            .map(|r| r.accuracy.unwrap())
            .collect(),
    )
}

fn seed_accuracies(rows: &[SweepRow], scene: &str) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.scene == scene)
        .map(|r| r.accuracy.unwrap())
        .collect()
}

fn main() {
    let total = Instant::now();
    let mut hard: Vec<(&str, Outcome)> = Vec::new();
    let mut soft: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &dyn Fn() -> Outcome, is_hard: bool| {
        let o = f();
        let tag = match (o.pass, is_hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (soft)",
        };
        println!("{tag:<11} {name}: {}", o.detail);
        if is_hard {
            hard.push((name, o));
        } else {
            soft.push((name, o));
        }
    };

    run("oracle-equivalence", &oracle_equivalence, true);
    run("delaunay-audit", &delaunay_audit, true);
    run("formula-fidelity", &formula_fidelity, true);
    run("importance-weight-invariants", &importance_weight_invariants, true);
    run("sobol-quality", &sobol_quality, true);

    let start = Instant::now();
    let epan = Strategy::FixedRadius {
        r: 1.5,
        kernel: Kernel::Epanechnikov,
    };
    let trend_rows = sweep(
        vec![Strategy::ExactKnn { k: 10 }, epan],
        MeasureKind::Euclidean,
        vec![500, 8000],
    );
    let topo_rows = sweep(
        vec![Strategy::Topological { rho: 100.0 }],
        MeasureKind::Euclidean,
        vec![8000],
    );
    let weighted_rows = sweep(
        vec![Strategy::ExactKnn { k: 10 }],
        MeasureKind::WeightedEuclidean,
        vec![8000],
    );
    let sweep_time = start.elapsed();

    run(
        "trend-reproduction",
        &|| {
            let mut pass = sweep_time < Duration::from_secs(15 * 60);
            let mut parts = Vec::new();
            for scene in BUILTIN_SCENES {
                for strategy in ["nn", "epanechnikov"] {
                    let (lo, hi) = (
                        cell(&trend_rows, scene, strategy, 500),
                        cell(&trend_rows, scene, strategy, 8000),
                    );
                    pass &= hi > lo;
                    parts.push(format!("{scene}/{strategy} {lo:.4}->{hi:.4}"));
                }
            }
            outcome(
                pass,
                format!(
                    "median of 5 seeds, N 500->8000, M 2000: {} ({:.0} s)",
                    parts.join(", "),
                    sweep_time.as_secs_f64()
                ),
            )
        },
        true,
    );

    let per_scene = |rows: &[SweepRow], strategy: &str| -> Vec<f64> {
        BUILTIN_SCENES.iter().map(|s| cell(rows, s, strategy, 8000)).collect()
    };
    let topo = per_scene(&topo_rows, "topo");
    let nn = per_scene(&trend_rows, "nn");
    let ep = per_scene(&trend_rows, "epanechnikov");
    let fmt = |v: &[f64]| v.iter().map(|a| format!("{a:.4}")).collect::<Vec<_>>().join("/");
    run(
        "method-ordering",
        &|| {
            let (t, n) = (median(topo.clone()), median(nn.clone()));
            outcome(
                t >= n - 0.02,
                format!(
                    "median scene at N 8000: topo {t:.4} vs nn {n:.4} (per scene {} vs {})",
                    fmt(&topo),
                    fmt(&nn)
                ),
            )
        },
        true,
    );
    run(
        "method-ordering-strict",
        &|| {
            let best = (0..3).filter(|&i| topo[i] > nn[i] && topo[i] > ep[i]).count();
            outcome(
                best == 3,
                format!(
                    "topo best on {best}/3 scenes (topo {}, nn {}, epanechnikov {})",
                    fmt(&topo),
                    fmt(&nn),
                    fmt(&ep)
                ),
            )
        },
        false,
    );
    run(
        "measure-ordering",
        &|| {
            let weighted = per_scene(&weighted_rows, "nn");
            let (w, e) = (median(weighted.clone()), median(nn.clone()));
            let nn8000: Vec<SweepRow> = trend_rows
                .iter()
                .filter(|r| r.strategy == "nn" && r.n == 8000)
                .cloned()
                .collect();
            let deltas: Vec<String> = BUILTIN_SCENES
                .iter()
                .map(|s| {
                    let d: Vec<String> = seed_accuracies(&weighted_rows, s)
                        .iter()
                        .zip(seed_accuracies(&nn8000, s))
                        .map(|(a, b)| format!("{:+.3}", a - b))
                        .collect();
                    format!("{s} [{}]", d.join(" "))
                })
                .collect();
            outcome(
                w >= e,
                format!(
                    "nn k=10 N 8000, median scene weighted-euclidean {w:.4} vs euclidean {e:.4}; deltas by seed 1..5: {}",
                    deltas.join(", ")
                ),
            )
        },
        false,
    );
    run("cli-determinism", &cli_determinism, true);

    let failed: Vec<&str> = hard.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    let soft_failed = soft.iter().filter(|(_, o)| !o.pass).count();
    println!(
        "acceptance: {}/{} hard criteria passed, {} soft criteria not met, {:.0} s",
        hard.len() - failed.len(),
        hard.len(),
        soft_failed,
        total.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        eprintln!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_cspace-belief");
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let commands: Vec<(Vec<String>, Option<String>)> = vec![
        (
            vec![
                "gen-dataset",
                "--scene",
                "shelf",
                "--n",
                "1000",
                "--weights",
                "--out",
                "{out}",
            ],
            Some("dataset.csv"),
        ),
        (
            vec![
                "eval",
                "--scene",
                "clutter",
                "--strategy",
                "topo",
                "--queries",
                "500",
                "--out",
                "{out}",
            ],
            Some("eval.csv"),
        ),
        (
            vec![
                "eval",
                "--scene",
                "table",
                "--strategy",
                "ann",
                "--measure",
                "weighted-mahalanobis",
                "--queries",
                "300",
            ],
            None,
        ),
        (
            vec![
                "sweep",
                "--strategies",
                "nn,gaussian",
                "--sizes",
                "400",
                "--seeds",
                "1,2",
                "--queries",
                "200",
                "--jobs",
                "3",
                "--out",
                "{out}",
            ],
            Some("sweep.csv"),
        ),
        (vec!["scene-info", "--scene", "table", "--samples", "500"], None),
    ]
    .into_iter()
    .map(|(args, out)| (args.into_iter().map(String::from).collect(), out.map(String::from)))
    .collect();
    let mut identical = 0;
    for (args, out) in &commands {
        let mut captures = Vec::new();
        for attempt in 0..2 {
            let target = out.as_ref().map(|o| p(&format!("{attempt}-{o}")));
            let args: Vec<String> = args
                .iter()
                .map(|a| {
                    if a == "{out}" {
                        target.clone().unwrap()
                    } else {
                        a.clone()
                    }
                })
                .collect();
            let res = Command::new(exe).args(&args).output().unwrap();
            assert!(
                res.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&res.stderr)
            );
            let file = target
                .map(|t| std::fs::read(Path::new(&t)).unwrap())
                .unwrap_or_default();
            // Output paths differ between attempts, so only files are compared
            // when a command writes one.
            captures.push(if out.is_some() { file } else { res.stdout });
        }
        identical += usize::from(captures[0] == captures[1] && !captures[0].is_empty());
    }
    outcome(
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical on rerun", commands.len()),
    )
}
