//! Sobol low-discrepancy sequence, natural (binary) index order.
//!
//! Direction numbers for dimensions 2..=8 are the first entries of the
//! Joe–Kuo `new-joe-kuo-6.21201` table; dimension 1 is the van der Corput
//! sequence in base 2. Points are emitted starting at index 1; the all-zero
//! point at index 0 is never produced by [`SobolGenerator::next_point`].

use crate::error::{Error, Result};

const BITS: usize = 32;

/// `(a, m)` per dimension after the first: primitive-polynomial coefficient
/// bits and initial direction integers.
const JOE_KUO: [(u32, &[u32]); 7] = [
    (0, &[1]),
    (1, &[1, 3]),
    (1, &[1, 3, 1]),
    (2, &[1, 1, 1]),
    (1, &[1, 1, 3, 3]),
    (4, &[1, 3, 5, 13]),
    (2, &[1, 1, 5, 5, 17]),
];

pub const MAX_DIMENSION: usize = JOE_KUO.len() + 1;

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (a, m) = JOE_KUO[dim - 1];
    let s = m.len();
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        v[k] = v[k - s] ^ (v[k - s] >> s);
        for j in 1..s {
            if (a >> (s - 1 - j)) & 1 == 1 {
                v[k] ^= v[k - j];
            }
        }
    }
    v
}

#[derive(Clone, Debug)]
pub struct SobolGenerator {
    directions: Vec<[u32; BITS]>,
    /// `prefix[d][c] = v[d][0] ^ ... ^ v[d][c]`.
    prefix: Vec<[u32; BITS]>,
    state: Vec<u32>,
    index: u64,
}

impl SobolGenerator {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::InvalidInput(format!(
                "sobol dimension must be in 1..={MAX_DIMENSION}, got {dimension}"
            )));
        }
        let directions: Vec<_> = (0..dimension).map(direction_numbers).collect();
        let prefix = directions
            .iter()
            .map(|v| {
                let mut p = [0u32; BITS];
                let mut acc = 0;
                for k in 0..BITS {
                    acc ^= v[k];
                    p[k] = acc;
                }
                p
            })
            .collect();
        Ok(Self {
            directions,
            prefix,
            state: vec![0; dimension],
            index: 0,
        })
    }

    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    /// Index of the most recently emitted point (0 before the first call).
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Reposition so that the next emitted point has index `next`.
    pub fn seek(&mut self, next: u64) -> Result<()> {
        if next == 0 || next > u32::MAX as u64 {
            return Err(Error::InvalidInput(format!("sobol index {next} out of range")));
        }
        let current = next - 1;
        for (d, s) in self.state.iter_mut().enumerate() {
            *s = Self::integer_at(&self.directions[d], current);
        }
        self.index = current;
        Ok(())
    }

    fn integer_at(v: &[u32; BITS], index: u64) -> u32 {
        let mut x = 0;
        let mut i = index;
        let mut k = 0;
        while i != 0 {
            if i & 1 == 1 {
                x ^= v[k];
            }
            i >>= 1;
            k += 1;
        }
        x
    }

    /// Point at an arbitrary index, computed directly from its binary digits.
    pub fn point_at(&self, index: u64) -> Vec<f64> {
        self.directions
            .iter()
            .map(|v| Self::integer_at(v, index) as f64 / 4_294_967_296.0)
            .collect()
    }

    pub fn next_point(&mut self) -> Result<Vec<f64>> {
        let next = self.index + 1;
        if next > u32::MAX as u64 {
            return Err(Error::SobolExhausted(self.index));
        }
        // Bits flipped between index-1 and index are 0..=trailing_zeros.
        let c = next.trailing_zeros() as usize;
        for (s, p) in self.state.iter_mut().zip(&self.prefix) {
            *s ^= p[c];
        }
        self.index = next;
        Ok(self.state.iter().map(|&x| x as f64 / 4_294_967_296.0).collect())
    }
}

impl Iterator for SobolGenerator {
    type Item = Vec<f64>;
    fn next(&mut self) -> Option<Vec<f64>> {
        self.next_point().ok()
    }
}

/// L2-star discrepancy of points in the unit cube (Warnock's closed form).
pub fn l2_star_discrepancy(points: &[Vec<f64>]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let d = points[0].len() as i32;
    let nf = n as f64;
    let term1 = 3f64.powi(-d);
    let term2: f64 = points
        .iter()
        .map(|p| p.iter().map(|x| 1.0 - x * x).product::<f64>())
        .sum::<f64>()
        * 2f64.powi(1 - d)
        / nf;
    let mut term3 = 0.0;
    for p in points {
        for q in points {
            term3 += p.iter().zip(q).map(|(a, b)| 1.0 - a.max(*b)).product::<f64>();
        }
    }
    (term1 - term2 + term3 / (nf * nf)).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn radical_inverse(mut i: u64) -> f64 {
        let mut inv = 0.0;
        let mut f = 0.5;
        while i > 0 {
            if i & 1 == 1 {
                inv += f;
            }
            i >>= 1;
            f *= 0.5;
        }
        inv
    }

    #[test]
    fn first_point_is_half_everywhere() {
        let mut g = SobolGenerator::new(7).unwrap();
        assert_eq!(g.next_point().unwrap(), vec![0.5; 7]);
        assert_eq!(g.index(), 1);
    }

    #[test]
    fn first_dimension_is_van_der_corput() {
        let mut g = SobolGenerator::new(7).unwrap();
        for i in 1..=1024u64 {
            assert_eq!(g.next_point().unwrap()[0], radical_inverse(i), "index {i}");
        }
    }

    #[test]
    fn second_dimension_known_prefix() {
        let mut g = SobolGenerator::new(2).unwrap();
        let second: Vec<f64> = (0..4).map(|_| g.next_point().unwrap()[1]).collect();
        assert_eq!(second, vec![0.5, 0.75, 0.25, 0.625]);
    }

    #[test]
    fn incremental_matches_direct_and_seek() {
        let mut g = SobolGenerator::new(7).unwrap();
        let reference = SobolGenerator::new(7).unwrap();
        for i in 1..=3000u64 {
            assert_eq!(g.next_point().unwrap(), reference.point_at(i));
        }
        let mut h = SobolGenerator::new(7).unwrap();
        h.seek(2001).unwrap();
        assert_eq!(h.next_point().unwrap(), reference.point_at(2001));
    }

    #[test]
    fn each_dimension_stratifies_dyadic_blocks() {
        // Every dimension of a (t, s)-sequence in base 2 is a (0, 1)-sequence:
        // indices 0..2^m hit each interval [j/2^m, (j+1)/2^m) exactly once.
        let g = SobolGenerator::new(MAX_DIMENSION).unwrap();
        for d in 0..MAX_DIMENSION {
            let mut seen = vec![false; 256];
            for i in 0..256u64 {
                let cell = (g.point_at(i)[d] * 256.0) as usize;
                assert!(!seen[cell], "dimension {d} repeats cell {cell}");
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn exhaustion_is_reported() {
        let mut g = SobolGenerator::new(3).unwrap();
        g.seek(u32::MAX as u64).unwrap();
        assert!(g.next_point().is_ok());
        assert!(matches!(g.next_point(), Err(Error::SobolExhausted(_))));
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(SobolGenerator::new(0).is_err());
        assert!(SobolGenerator::new(MAX_DIMENSION + 1).is_err());
    }

    #[test]
    fn discrepancy_of_single_corner_point() {
        // One point at the origin in 1D: T^2 = 1/3 - 1 + 1 = 1/3.
        let d = l2_star_discrepancy(&[vec![0.0]]);
        assert!((d - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }
}
