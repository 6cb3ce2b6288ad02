//! Closed-form distance queries between capsule axes and primitives.
//!
//! Along a segment `a + t (b - a)`, the squared distance to a sphere center
//! or to an axis-aligned box is a piecewise convex quadratic in `t` with at
//! most six breakpoints. Both the minimum distance and the sub-interval
//! within a given inflation radius are solved exactly per piece.

use nalgebra::Vector3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Primitive {
    Sphere { center: Vector3<f64>, radius: f64 },
    AxisAlignedBox { min: Vector3<f64>, max: Vector3<f64> },
}

impl Primitive {
    pub fn point_distance(&self, p: &Vector3<f64>) -> f64 {
        match self {
            Primitive::Sphere { center, radius } => ((p - center).norm() - radius).max(0.0),
            Primitive::AxisAlignedBox { min, max } => {
                let mut sq = 0.0;
                for k in 0..3 {
                    let d = (min[k] - p[k]).max(p[k] - max[k]).max(0.0);
                    sq += d * d;
                }
                sq.sqrt()
            }
        }
    }
}

/// `A t^2 + B t + C` on `[t0, t1]`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    t0: f64,
    t1: f64,
    a: f64,
    b: f64,
    c: f64,
}

impl Piece {
    fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    fn argmin(&self) -> f64 {
        if self.a > 0.0 {
            (-self.b / (2.0 * self.a)).clamp(self.t0, self.t1)
        } else if self.b > 0.0 {
            self.t0
        } else {
            self.t1
        }
    }

    /// Sub-interval where the quadratic is strictly below `level`.
    fn below(&self, level: f64) -> Option<(f64, f64)> {
        let c = self.c - level;
        let (lo, hi) = if self.a > 0.0 {
            let disc = self.b * self.b - 4.0 * self.a * c;
            if disc <= 0.0 {
                return None;
            }
            let sq = disc.sqrt();
            // Numerically stable pair of roots.
            let q = -0.5 * (self.b + self.b.signum() * sq);
            let (r1, r2) = if q != 0.0 {
                (q / self.a, c / q)
            } else {
                (-sq / (2.0 * self.a), sq / (2.0 * self.a))
            };
            (r1.min(r2), r1.max(r2))
        } else if self.b != 0.0 {
            let root = -c / self.b;
            if self.b > 0.0 {
                (f64::NEG_INFINITY, root)
            } else {
                (root, f64::INFINITY)
            }
        } else if c < 0.0 {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            return None;
        };
        let lo = lo.max(self.t0);
        let hi = hi.min(self.t1);
        (lo <= hi).then_some((lo, hi))
    }
}

fn pieces(a: &Vector3<f64>, b: &Vector3<f64>, prim: &Primitive) -> Vec<Piece> {
    let d = b - a;
    match prim {
        Primitive::Sphere { center, .. } => {
            let e = a - center;
            vec![Piece {
                t0: 0.0,
                t1: 1.0,
                a: d.dot(&d),
                b: 2.0 * d.dot(&e),
                c: e.dot(&e),
            }]
        }
        Primitive::AxisAlignedBox { min, max } => {
            let mut breaks = vec![0.0, 1.0];
            for k in 0..3 {
                if d[k] != 0.0 {
                    for bound in [min[k], max[k]] {
                        let t = (bound - a[k]) / d[k];
                        if t > 0.0 && t < 1.0 {
                            breaks.push(t);
                        }
                    }
                }
            }
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let mut out = Vec::with_capacity(breaks.len());
            for w in breaks.windows(2) {
                let (t0, t1) = (w[0], w[1]);
                let mid = 0.5 * (t0 + t1);
                let mut piece = Piece {
                    t0,
                    t1,
                    a: 0.0,
                    b: 0.0,
                    c: 0.0,
                };
                for k in 0..3 {
                    let p = a[k] + mid * d[k];
                    let e = if p < min[k] {
                        a[k] - min[k]
                    } else if p > max[k] {
                        a[k] - max[k]
                    } else {
                        continue;
                    };
                    piece.a += d[k] * d[k];
                    piece.b += 2.0 * d[k] * e;
                    piece.c += e * e;
                }
                out.push(piece);
            }
            out
        }
    }
}

/// Minimum distance from the segment to the primitive's surface (0 when
/// they intersect) and the segment parameter where it is attained.
pub fn segment_primitive_distance(a: &Vector3<f64>, b: &Vector3<f64>, prim: &Primitive) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for piece in pieces(a, b, prim) {
        let t = piece.argmin();
        let sq = piece.eval(t).max(0.0);
        if sq < best.0 {
            best = (sq, t);
        }
    }
    let center_dist = best.0.sqrt();
    let dist = match prim {
        Primitive::Sphere { radius, .. } => (center_dist - radius).max(0.0),
        Primitive::AxisAlignedBox { .. } => center_dist,
    };
    (dist, best.1)
}

/// Parameter interval of the segment whose points lie strictly within
/// `inflate` of the primitive.
pub fn penetration_interval(a: &Vector3<f64>, b: &Vector3<f64>, prim: &Primitive, inflate: f64) -> Option<(f64, f64)> {
    let reach = match prim {
        Primitive::Sphere { radius, .. } => radius + inflate,
        Primitive::AxisAlignedBox { .. } => inflate,
    };
    let level = reach * reach;
    let mut span: Option<(f64, f64)> = None;
    for piece in pieces(a, b, prim) {
        if let Some((lo, hi)) = piece.below(level) {
            span = Some(match span {
                None => (lo, hi),
                Some((s0, s1)) => (s0.min(lo), s1.max(hi)),
            });
        }
    }
    span
}

/// Closest distance between segments `p0-p1` and `q0-q1`.
pub fn segment_segment_distance(p0: &Vector3<f64>, p1: &Vector3<f64>, q0: &Vector3<f64>, q1: &Vector3<f64>) -> f64 {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p0 + d1 * s) - (q0 + d2 * t)).norm()
}
