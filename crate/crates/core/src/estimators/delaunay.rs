//! Incremental Bowyer-Watson Delaunay tessellation in 2, 3 or 4 dimensions.
//!
//! The convex hull is closed with a symbolic vertex at infinity: every hull
//! facet carries an "infinite" cell, so point location never leaves the
//! triangulation and no bounding simplex has to be removed afterwards.
//! All decisions go through the exact predicates in [`super::predicates`].

use std::cmp::Ordering;
use std::collections::HashMap;

use super::predicates::{insphere_positive, orient, MAX_DIM};
use crate::error::{Error, Result};

/// Vertex id of the point at infinity.
const INF: usize = usize::MAX;
const NONE: usize = usize::MAX;
const CELL_SLOTS: usize = MAX_DIM + 1;

pub type SimplexId = usize;

#[derive(Clone, Debug)]
struct Cell {
    v: [usize; CELL_SLOTS],
    n: [usize; CELL_SLOTS],
    alive: bool,
}

impl Cell {
    fn inf_slot(&self, d: usize) -> Option<usize> {
        self.v[..=d].iter().position(|&x| x == INF)
    }
}

/// Outcome of walking towards a point.
enum Walk {
    /// Finite cell whose closure contains the point.
    Inside(usize),
    /// Infinite cell whose hull facet sees the point.
    Outside(usize),
}

#[derive(Clone, Debug)]
pub struct Tessellation {
    dim: usize,
    points: Vec<f64>,
    cells: Vec<Cell>,
    free_cells: Vec<usize>,
    /// Vertex ids that were not inserted because they repeated an earlier point.
    duplicates: Vec<usize>,
    start: usize,
}

/// Counters from a [`Tessellation::locate_traced`] call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LocateTrace {
    pub steps: usize,
    pub fell_back: bool,
}

impl Tessellation {
    /// Tessellate `points` (each of length `dim`) in input order.
    pub fn new<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidInput(format!(
                "tessellation dimension {dim} not in 2..=4"
            )));
        }
        let mut flat = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: p.len(),
                });
            }
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidInput(format!("point {i} is not finite")));
            }
            flat.extend_from_slice(p);
        }
        let mut tess = Self {
            dim,
            points: flat,
            cells: Vec::new(),
            free_cells: Vec::new(),
            duplicates: Vec::new(),
            start: 0,
        };
        let initial = tess.initial_simplex()?;
        tess.build_initial(&initial);
        for i in 0..points.len() {
            if !initial.contains(&i) {
                tess.insert(i);
            }
        }
        Ok(tess)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Input indices skipped as exact repeats of an earlier point.
    pub fn duplicates(&self) -> &[usize] {
        &self.duplicates
    }

    /// Finite simplices as `(id, vertex ids)`.
    pub fn simplices(&self) -> impl Iterator<Item = (SimplexId, &[usize])> + '_ {
        let d = self.dim;
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.alive && c.inf_slot(d).is_none())
            .map(move |(i, c)| (i, &c.v[..=d]))
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices().count()
    }

    /// Vertex ids of a finite simplex.
    pub fn simplex(&self, id: SimplexId) -> &[usize] {
        &self.cells[id].v[..=self.dim]
    }

    /// Neighbor across the facet opposite vertex slot `i`; `None` on the hull.
    pub fn neighbor(&self, id: SimplexId, i: usize) -> Option<SimplexId> {
        let n = self.cells[id].n[i];
        (!self.is_infinite(n)).then_some(n)
    }

    fn is_infinite(&self, c: usize) -> bool {
        self.cells[c].inf_slot(self.dim).is_some()
    }

    fn point(&self, v: usize) -> &[f64] {
        self.vertex(v)
    }

    fn cell_points(&self, c: usize) -> Vec<&[f64]> {
        self.cells[c].v[..=self.dim].iter().map(|&v| self.point(v)).collect()
    }

    /// The first affinely independent `dim + 1` points in input order.
    fn initial_simplex(&self) -> Result<Vec<usize>> {
        let d = self.dim;
        let n = self.num_vertices();
        if n < d + 1 {
            return Err(Error::Degenerate(format!("{n} points cannot span {d} dimensions")));
        }
        let origin = self.point(0);
        let scale = (0..n)
            .flat_map(|i| self.point(i).iter().zip(origin).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Err(Error::Degenerate("all points coincide".into()));
        }
        let mut chosen = vec![0];
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for i in 1..n {
            if chosen.len() == d + 1 {
                break;
            }
            let mut r: Vec<f64> = self.point(i).iter().zip(origin).map(|(a, b)| a - b).collect();
            for b in &basis {
                let dot: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
            let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm <= 1e-10 * scale {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(i);
            if trial.len() == d + 1 {
                let pts: Vec<&[f64]> = trial.iter().map(|&v| self.point(v)).collect();
                if orient(&pts) == Ordering::Equal {
                    continue;
                }
            }
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
            chosen.push(i);
        }
        if chosen.len() < d + 1 {
            return Err(Error::Degenerate(format!(
                "points span only {} of {d} dimensions",
                chosen.len() - 1
            )));
        }
        Ok(chosen)
    }

    fn alloc(&mut self, v: [usize; CELL_SLOTS]) -> usize {
        let cell = Cell {
            v,
            n: [NONE; CELL_SLOTS],
            alive: true,
        };
        match self.free_cells.pop() {
            Some(i) => {
                self.cells[i] = cell;
                i
            }
            None => {
                self.cells.push(cell);
                self.cells.len() - 1
            }
        }
    }

    fn build_initial(&mut self, initial: &[usize]) {
        let d = self.dim;
        let mut v = [NONE; CELL_SLOTS];
        v[..=d].copy_from_slice(initial);
        let pts: Vec<&[f64]> = initial.iter().map(|&i| self.point(i)).collect();
        if orient(&pts) == Ordering::Less {
            v.swap(0, 1);
        }
        let finite = self.alloc(v);
        let mut new_cells = vec![finite];
        for i in 0..=d {
            // Replace vertex i by infinity and swap two finite vertices so
            // that substituting an outside point yields positive orientation.
            let mut w = v;
            w[i] = INF;
            let (a, b) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            w.swap(a, b);
            new_cells.push(self.alloc(w));
        }
        self.link_by_facets(&new_cells);
        self.start = finite;
    }

    /// Connect cells in `ids` that share a facet.
    fn link_by_facets(&mut self, ids: &[usize]) {
        let d = self.dim;
        let mut facets: HashMap<[usize; MAX_DIM], (usize, usize)> = HashMap::new();
        for &c in ids {
            for i in 0..=d {
                let key = facet_key(&self.cells[c].v[..=d], i);
                if let Some((other, j)) = facets.remove(&key) {
                    self.cells[c].n[i] = other;
                    self.cells[other].n[j] = c;
                } else {
                    facets.insert(key, (c, i));
                }
            }
        }
    }

    /// Orientation of cell `c` with slot `slot` replaced by `p`.
    fn orient_replaced(&self, c: usize, slot: usize, p: &[f64]) -> Ordering {
        let mut pts = self.cell_points_or_inf(c);
        pts[slot] = Some(p);
        let pts: Vec<&[f64]> = pts.into_iter().map(|x| x.expect("finite after replacement")).collect();
        orient(&pts)
    }

    fn cell_points_or_inf(&self, c: usize) -> Vec<Option<&[f64]>> {
        self.cells[c].v[..=self.dim]
            .iter()
            .map(|&v| (v != INF).then(|| self.point(v)))
            .collect()
    }

    fn walk(&self, p: &[f64]) -> std::result::Result<(Walk, usize), ()> {
        let d = self.dim;
        let mut c = self.start;
        let max_steps = 4 * self.cells.len() + 16;
        let mut prev = NONE;
        for step in 0..max_steps {
            let mut next = None;
            for i in 0..=d {
                let nb = self.cells[c].n[i];
                if nb == prev {
                    continue;
                }
                if self.orient_replaced(c, i, p) == Ordering::Less {
                    next = Some(nb);
                    break;
                }
            }
            match next {
                None => {
                    // The facet shared with `prev` was excluded above; p is on
                    // its inner side because we crossed it.
                    return Ok((Walk::Inside(c), step));
                }
                Some(nb) if self.is_infinite(nb) => return Ok((Walk::Outside(nb), step)),
                Some(nb) => {
                    prev = c;
                    c = nb;
                }
            }
        }
        Err(())
    }

    /// Linear scan for the containing finite cell, or a visible infinite cell.
    fn scan(&self, p: &[f64]) -> Walk {
        let d = self.dim;
        for (i, cell) in self.cells.iter().enumerate() {
            if !cell.alive || cell.inf_slot(d).is_some() {
                continue;
            }
            if (0..=d).all(|s| self.orient_replaced(i, s, p) != Ordering::Less) {
                return Walk::Inside(i);
            }
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if let (true, Some(k)) = (cell.alive, cell.inf_slot(d)) {
                if self.orient_replaced(i, k, p) == Ordering::Greater {
                    return Walk::Outside(i);
                }
            }
        }
        unreachable!("point neither inside nor outside the hull")
    }

    fn in_conflict(&self, c: usize, p: &[f64]) -> bool {
        match self.cells[c].inf_slot(self.dim) {
            None => insphere_positive(&self.cell_points(c), p) == Ordering::Greater,
            Some(k) => match self.orient_replaced(c, k, p) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => {
                    let nb = self.cells[c].n[k];
                    insphere_positive(&self.cell_points(nb), p) == Ordering::Greater
                }
            },
        }
    }

    fn insert(&mut self, v: usize) {
        let d = self.dim;
        let p: Vec<f64> = self.point(v).to_vec();
        let first = match self.walk(&p) {
            Ok((Walk::Inside(c), _)) | Ok((Walk::Outside(c), _)) => c,
            Err(()) => match self.scan(&p) {
                Walk::Inside(c) | Walk::Outside(c) => c,
            },
        };
        if !self.in_conflict(first, &p) {
            // A point inside a cell's closure but not strictly inside its
            // circumsphere must be one of its vertices.
            self.duplicates.push(v);
            return;
        }
        let mut conflict = vec![first];
        let mut mark: HashMap<usize, bool> = HashMap::from([(first, true)]);
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        let mut k = 0;
        while k < conflict.len() {
            let c = conflict[k];
            k += 1;
            for i in 0..=d {
                let nb = self.cells[c].n[i];
                let hit = match mark.get(&nb) {
                    Some(&h) => h,
                    None => {
                        let h = self.in_conflict(nb, &p);
                        mark.insert(nb, h);
                        if h {
                            conflict.push(nb);
                        }
                        h
                    }
                };
                if !hit {
                    boundary.push((c, i));
                }
            }
        }
        let mut created = Vec::with_capacity(boundary.len());
        for &(c, i) in &boundary {
            let mut w = self.cells[c].v;
            w[i] = v;
            let outside = self.cells[c].n[i];
            let nc = self.alloc(w);
            self.cells[nc].n[i] = outside;
            let back = self.cells[outside].n[..=d]
                .iter()
                .position(|&x| x == c)
                .expect("adjacency is symmetric");
            self.cells[outside].n[back] = nc;
            created.push((nc, i));
        }
        for &c in &conflict {
            self.cells[c].alive = false;
        }
        // Free the dead cells only after allocation so ids are not reused
        // while the cavity is still referenced.
        self.free_cells.extend(conflict.iter().copied());
        // Link new cells to each other across facets through `v`.
        let mut ridges: HashMap<[usize; MAX_DIM], (usize, usize)> = HashMap::new();
        for &(nc, slot_v) in &created {
            for j in 0..=d {
                if j == slot_v {
                    continue;
                }
                let key = facet_key(&self.cells[nc].v[..=d], j);
                if let Some((other, oj)) = ridges.remove(&key) {
                    self.cells[nc].n[j] = other;
                    self.cells[other].n[oj] = nc;
                } else {
                    ridges.insert(key, (nc, j));
                }
            }
        }
        debug_assert!(ridges.is_empty(), "cavity boundary is not closed");
        self.start = created
            .iter()
            .map(|&(c, _)| c)
            .find(|&c| !self.is_infinite(c))
            .unwrap_or(self.start);
    }

    /// Finite simplex containing `p` (barycentric coordinates all at least
    /// `-1e-12`), or `None` outside the convex hull.
    pub fn locate(&self, p: &[f64]) -> Option<SimplexId> {
        self.locate_traced(p).0
    }

    pub fn locate_traced(&self, p: &[f64]) -> (Option<SimplexId>, LocateTrace) {
        assert_eq!(p.len(), self.dim, "query dimension");
        let mut trace = LocateTrace::default();
        let found = match self.walk(p) {
            Ok((w, steps)) => {
                trace.steps = steps;
                w
            }
            Err(()) => {
                trace.fell_back = true;
                self.scan(p)
            }
        };
        let hit = match found {
            Walk::Inside(c) => c,
            Walk::Outside(_) => return (None, trace),
        };
        if self.barycentric(hit, p).iter().all(|&b| b >= -1e-12) {
            return (Some(hit), trace);
        }
        trace.fell_back = true;
        let scan = self
            .simplices()
            .map(|(id, _)| id)
            .find(|&id| self.barycentric(id, p).iter().all(|&b| b >= -1e-12));
        (scan.or(Some(hit)), trace)
    }

    /// Barycentric coordinates of `p` in a finite simplex.
    pub fn barycentric(&self, id: SimplexId, p: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let v = self.simplex(id);
        let v0 = self.point(v[0]);
        // Solve T lambda = p - v0, T columns = v_i - v0.
        let mut a = vec![vec![0.0; d + 1]; d];
        for r in 0..d {
            for c in 0..d {
                a[r][c] = self.point(v[c + 1])[r] - v0[r];
            }
            a[r][d] = p[r] - v0[r];
        }
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .expect("non-empty");
            a.swap(col, piv);
            let pv = a[col][col];
            if pv == 0.0 {
                return vec![f64::NAN; d + 1];
            }
            for r in col + 1..d {
                let f = a[r][col] / pv;
                for c in col..=d {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        let mut lam = vec![0.0; d];
        for r in (0..d).rev() {
            let s: f64 = (r + 1..d).map(|c| a[r][c] * lam[c]).sum();
            lam[r] = (a[r][d] - s) / a[r][r];
        }
        let mut out = Vec::with_capacity(d + 1);
        out.push(1.0 - lam.iter().sum::<f64>());
        out.extend(lam);
        out
    }

    /// Structural and Delaunay checks over the whole tessellation. Cost is
    /// quadratic; intended for tests and audits.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        let bad = |msg: String| Err(Error::Degenerate(msg));
        for (c, cell) in self.cells.iter().enumerate() {
            if !cell.alive {
                continue;
            }
            for i in 0..=d {
                let nb = cell.n[i];
                if nb == NONE || !self.cells[nb].alive {
                    return bad(format!("cell {c} slot {i} has no live neighbor"));
                }
                let back = self.cells[nb].n[..=d].iter().filter(|&&x| x == c).count();
                if back != 1 {
                    return bad(format!("adjacency {c} -> {nb} is not symmetric"));
                }
                if facet_key(&cell.v[..=d], i)
                    != facet_key(
                        &self.cells[nb].v[..=d],
                        self.cells[nb].n[..=d].iter().position(|&x| x == c).unwrap(),
                    )
                {
                    return bad(format!("cells {c} and {nb} disagree on their shared facet"));
                }
            }
            match cell.inf_slot(d) {
                None => {
                    if orient(&self.cell_points(c)) != Ordering::Greater {
                        return bad(format!("cell {c} is not positively oriented"));
                    }
                }
                Some(k) => {
                    let nb = cell.n[k];
                    let slot = self.cells[nb].n[..=d].iter().position(|&x| x == c).unwrap();
                    let apex = self.point(self.cells[nb].v[slot]);
                    if self.orient_replaced(c, k, apex) != Ordering::Less {
                        return bad(format!("hull cell {c} faces inwards"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Every vertex against every finite simplex: no vertex strictly inside a
    /// circumsphere. Returns the number of predicate evaluations.
    pub fn audit_empty_spheres(&self) -> Result<usize> {
        let mut tests = 0;
        for (id, verts) in self.simplices() {
            let pts: Vec<&[f64]> = verts.iter().map(|&v| self.point(v)).collect();
            for v in 0..self.num_vertices() {
                tests += 1;
                if insphere_positive(&pts, self.point(v)) == Ordering::Greater {
                    return Err(Error::Degenerate(format!(
                        "vertex {v} lies inside the circumsphere of simplex {id}"
                    )));
                }
            }
        }
        Ok(tests)
    }
}

/// Sorted vertex ids of the facet opposite slot `skip`, padded.
fn facet_key(v: &[usize], skip: usize) -> [usize; MAX_DIM] {
    let mut key = [NONE - 1; MAX_DIM];
    let mut k = 0;
    for (i, &x) in v.iter().enumerate() {
        if i != skip {
            key[k] = x;
            k += 1;
        }
    }
    key[..k].sort_unstable();
    key
}
