//! Oracles shared by the integration tests.

#![allow(dead_code)]

use cspace_belief::estimators::Tessellation;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Circumcenter and squared radius from the linear system
/// `2 (p_i - p_0) . c = |p_i|^2 - |p_0|^2`.
pub fn circumsphere(pts: &[&[f64]]) -> (Vec<f64>, f64) {
    let d = pts[0].len();
    let a = DMatrix::from_fn(d, d, |i, k| 2.0 * (pts[i + 1][k] - pts[0][k]));
    let sq = |p: &[f64]| p.iter().map(|v| v * v).sum::<f64>();
    let b = DVector::from_fn(d, |i, _| sq(pts[i + 1]) - sq(pts[0]));
    let c = a.lu().solve(&b).expect("non-degenerate simplex");
    let r2 = dist2(c.as_slice(), pts[0]);
    (c.as_slice().to_vec(), r2)
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Barycentric coordinates of `p` in the simplex `pts`.
pub fn barycentric(pts: &[&[f64]], p: &[f64]) -> Vec<f64> {
    let d = p.len();
    let a = DMatrix::from_fn(d, d, |i, k| pts[k + 1][i] - pts[0][i]);
    let b = DVector::from_fn(d, |i, _| p[i] - pts[0][i]);
    let x = a.lu().solve(&b).expect("non-degenerate simplex");
    let mut out = vec![1.0 - x.sum()];
    out.extend(x.iter());
    out
}

pub fn simplex_points<'a>(t: &'a Tessellation, verts: &[usize]) -> Vec<&'a [f64]> {
    verts.iter().map(|&v| t.vertex(v)).collect()
}

/// Vertices strictly inside some circumsphere, beyond a relative tolerance.
pub fn empty_sphere_violations(t: &Tessellation) -> usize {
    let mut bad = 0;
    for (_, verts) in t.simplices() {
        let pts = simplex_points(t, verts);
        let (c, r2) = circumsphere(&pts);
        for v in 0..t.num_vertices() {
            if verts.contains(&v) {
                continue;
            }
            if dist2(&c, t.vertex(v)) < r2 * (1.0 - 1e-9) {
                bad += 1;
            }
        }
    }
    bad
}

/// Whether `locate` agrees with a scan over all simplices: a returned
/// simplex must contain `p`, and `None` is only allowed when no simplex
/// contains `p` strictly.
pub fn locate_agrees(t: &Tessellation, p: &[f64]) -> bool {
    const TOL: f64 = 1e-9;
    match t.locate(p) {
        Some(id) => barycentric(&simplex_points(t, t.simplex(id)), p)
            .iter()
            .all(|&b| b >= -TOL),
        None => t
            .simplices()
            .all(|(_, verts)| barycentric(&simplex_points(t, verts), p).iter().any(|&b| b <= TOL)),
    }
}
