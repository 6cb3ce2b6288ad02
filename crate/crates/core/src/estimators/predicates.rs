//! Orientation and in-sphere predicates in 2 to 4 dimensions.
//!
//! Each predicate first evaluates its determinant in floating point together
//! with a permanent-based forward error bound. Only when the result is
//! within that bound is the determinant recomputed exactly: every input is a
//! dyadic rational, so after scaling to a common exponent the whole
//! computation runs on big integers (fraction-free Bareiss elimination).

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub const MAX_DIM: usize = 4;
const MAX_N: usize = MAX_DIM + 1;
const UNIT_ROUNDOFF: f64 = f64::EPSILON * 0.5;

static EXACT_EVALUATIONS: AtomicU64 = AtomicU64::new(0);

/// How many determinants fell through to exact arithmetic (process-wide).
pub fn exact_evaluations() -> u64 {
    EXACT_EVALUATIONS.load(AtomicOrdering::Relaxed)
}

type Mat = [[f64; MAX_N]; MAX_N];

/// Determinant and permanent of |M| for the leading `n x n` block, by
/// Laplace expansion over column subsets.
fn det_and_permanent(m: &Mat, n: usize) -> (f64, f64) {
    let full = (1usize << n) - 1;
    let mut det = [0.0f64; 1 << MAX_N];
    let mut perm = [0.0f64; 1 << MAX_N];
    det[0] = 1.0;
    perm[0] = 1.0;
    // Row n-k expands subsets of k columns.
    for k in 1..=n {
        let row = n - k;
        for mask in 1..=full {
            if (mask as u32).count_ones() as usize != k {
                continue;
            }
            let mut d = 0.0;
            let mut p = 0.0;
            let mut below = 0;
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let rest = mask & !(1 << c);
                let term = m[row][c] * det[rest];
                if below % 2 == 0 {
                    d += term;
                } else {
                    d -= term;
                }
                p += m[row][c].abs() * perm[rest];
                below += 1;
            }
            det[mask] = d;
            perm[mask] = p;
        }
    }
    (det[full], perm[full])
}

fn sign_of(v: f64) -> Ordering {
    v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Exact value of an `f64` as `mantissa * 2^exponent`.
fn decompose(v: f64) -> (i64, i32) {
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp - 1075)
    };
    (sign * mant, e)
}

/// Scales a set of floats to big integers sharing one power-of-two exponent.
struct ExactScale {
    min_exp: i32,
}

impl ExactScale {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let min_exp = values.filter(|v| *v != 0.0).map(|v| decompose(v).1).min().unwrap_or(0);
        Self { min_exp }
    }

    fn int(&self, v: f64) -> BigInt {
        let (m, e) = decompose(v);
        BigInt::from(m) << ((e - self.min_exp) as usize)
    }
}

fn bareiss_sign(mut m: Vec<Vec<BigInt>>) -> Ordering {
    let n = m.len();
    let mut negate = false;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return Ordering::Equal,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let last = &m[n - 1][n - 1];
    let s = if last.is_zero() {
        Ordering::Equal
    } else if last.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    };
    if negate {
        s.reverse()
    } else {
        s
    }
}

/// Sign of `det[p_1 - p_0, ..., p_D - p_0]` for `D + 1` points of dimension `D`.
pub fn orient(points: &[&[f64]]) -> Ordering {
    let d = points.len() - 1;
    debug_assert!(d >= 1 && d <= MAX_DIM);
    debug_assert!(points.iter().all(|p| p.len() == d));
    let mut m: Mat = [[0.0; MAX_N]; MAX_N];
    for i in 0..d {
        for k in 0..d {
            m[i][k] = points[i + 1][k] - points[0][k];
        }
    }
    let (det, perm) = det_and_permanent(&m, d);
    let terms = (d + (d - 1) + d * (d - 1) / 2 + 2) as f64;
    let bound = 2.0 * terms * UNIT_ROUNDOFF * perm;
    if det.abs() > bound {
        return sign_of(det);
    }
    EXACT_EVALUATIONS.fetch_add(1, AtomicOrdering::Relaxed);
    let scale = ExactScale::new(points.iter().flat_map(|p| p.iter().copied()));
    let rows = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| scale.int(points[i + 1][k]) - scale.int(points[0][k]))
                .collect()
        })
        .collect();
    bareiss_sign(rows)
}

/// Sign of the lifted determinant `det[p_i - q, |p_i - q|^2]` over the
/// `D + 1` simplex vertices, without orientation correction.
fn lifted(points: &[&[f64]], q: &[f64]) -> Ordering {
    let d = q.len();
    let n = d + 1;
    let mut m: Mat = [[0.0; MAX_N]; MAX_N];
    for i in 0..n {
        let mut sq = 0.0;
        for k in 0..d {
            let v = points[i][k] - q[k];
            m[i][k] = v;
            sq += v * v;
        }
        m[i][d] = sq;
    }
    let (det, perm) = det_and_permanent(&m, n);
    let terms = (n * (d + 2) + (n - 1) + n * (n - 1) / 2 + 2) as f64;
    let bound = 2.0 * terms * UNIT_ROUNDOFF * perm;
    if det.abs() > bound {
        return sign_of(det);
    }
    EXACT_EVALUATIONS.fetch_add(1, AtomicOrdering::Relaxed);
    let scale = ExactScale::new(points.iter().flat_map(|p| p.iter().copied()).chain(q.iter().copied()));
    let qi: Vec<BigInt> = q.iter().map(|v| scale.int(*v)).collect();
    let rows = points
        .iter()
        .map(|p| {
            let diffs: Vec<BigInt> = p.iter().zip(&qi).map(|(v, qk)| scale.int(*v) - qk).collect();
            let sq: BigInt = diffs.iter().map(|x| x * x).sum();
            let mut row = diffs;
            row.push(sq);
            row
        })
        .collect();
    bareiss_sign(rows)
}

/// `Greater` if `q` is strictly inside the circumsphere of a positively
/// oriented simplex, `Equal` if on it, `Less` if outside.
pub fn insphere_positive(points: &[&[f64]], q: &[f64]) -> Ordering {
    let s = lifted(points, q);
    if q.len() % 2 == 0 {
        s
    } else {
        s.reverse()
    }
}

/// In-sphere test for a simplex of either orientation. Returns `Equal` for
/// a flat simplex.
pub fn insphere(points: &[&[f64]], q: &[f64]) -> Ordering {
    match orient(points) {
        Ordering::Greater => insphere_positive(points, q),
        Ordering::Less => insphere_positive(points, q).reverse(),
        Ordering::Equal => Ordering::Equal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_simplex(d: usize) -> Vec<Vec<f64>> {
        let mut pts = vec![vec![0.0; d]];
        for i in 0..d {
            let mut p = vec![0.0; d];
            p[i] = 1.0;
            pts.push(p);
        }
        pts
    }

    fn refs(pts: &[Vec<f64>]) -> Vec<&[f64]> {
        pts.iter().map(|p| p.as_slice()).collect()
    }

    #[test]
    fn unit_simplex_orientation_and_sphere() {
        for d in 2..=4 {
            let pts = unit_simplex(d);
            let r = refs(&pts);
            assert_eq!(orient(&r), Ordering::Greater, "dim {d}");
            let centroid: Vec<f64> = (0..d).map(|_| 1.0 / (d + 1) as f64).collect();
            assert_eq!(insphere(&r, &centroid), Ordering::Greater, "dim {d}");
            assert_eq!(insphere(&r, &vec![3.0; d]), Ordering::Less, "dim {d}");
            // The all-ones corner lies on the circumsphere (center 1/2, radius sqrt(d)/2).
            assert_eq!(insphere(&r, &vec![1.0; d]), Ordering::Equal, "dim {d}");
            let mut swapped = pts.clone();
            swapped.swap(1, 2);
            let r = refs(&swapped);
            assert_eq!(orient(&r), Ordering::Less);
            assert_eq!(insphere(&r, &centroid), Ordering::Greater);
        }
    }

    #[test]
    fn exact_fallback_resolves_near_degenerate_orientation() {
        // Three nearly collinear points; the determinant 11.5 * 2^-45 is below
        // the floating-point filter bound.
        let eps = 2f64.powi(-45);
        let a = [0.5, 0.5];
        let b = [12.0, 12.0];
        let c = [24.0, 24.0 + eps];
        let before = exact_evaluations();
        // det[b - a, c - a] = 11.5 * (23.5 + eps) - 11.5 * 23.5 = 11.5 eps > 0
        assert_eq!(orient(&[&a, &b, &c]), Ordering::Greater);
        assert_eq!(orient(&[&a, &c, &b]), Ordering::Less);
        assert!(exact_evaluations() > before);
        assert_eq!(orient(&[&a, &b, &[36.0, 36.0]]), Ordering::Equal);
    }

    #[test]
    fn cocircular_square_is_exactly_on_circle() {
        let a = [0.1, 0.1];
        let b = [0.7, 0.1];
        let c = [0.7, 0.7];
        assert_eq!(insphere(&[&a, &b, &c], &[0.1, 0.7]), Ordering::Equal);
        assert_eq!(insphere(&[&a, &b, &c], &[0.1, 0.7 - 1e-17 - 1e-16]), Ordering::Greater);
    }

    #[test]
    fn decompose_is_exact() {
        for v in [1.0, -0.1, 3.5e-300, 5e-324, 1e300, 0.0] {
            let (m, e) = decompose(v);
            assert_eq!(m as f64 * 2f64.powi(e), v);
        }
    }
}
