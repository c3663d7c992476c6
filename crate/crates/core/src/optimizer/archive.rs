//! Elitist archive with ε-box dominance.
//!
//! Objective space is cut into boxes of width `w` per objective. A candidate
//! enters unless some member's box weakly dominates its box, with one
//! exception: inside the same box the vector closer to the box's lower
//! corner wins. Entering removes every member whose box the candidate's box
//! weakly dominates. The result depends only on the set of inserted vectors
//! (up to exact distance ties), not on their order. Width 0 falls back to
//! plain Pareto dominance.

use crate::objectives::ObjectiveVector;

#[derive(Clone, Debug)]
pub struct ArchiveEntry<T> {
    pub objectives: ObjectiveVector,
    pub payload: T,
}

#[derive(Clone, Debug)]
pub struct ElitistArchive<T> {
    entries: Vec<ArchiveEntry<T>>,
    cells: usize,
    width: [f64; 3],
    span: [f64; 3],
    adaptive: bool,
}

fn boxed(v: &ObjectiveVector, width: &[f64; 3]) -> [f64; 3] {
    let mut b = v.to_array();
    for i in 0..3 {
        if width[i] > 0.0 {
            b[i] = (b[i] / width[i]).floor();
        }
    }
    b
}

fn corner_distance(v: &ObjectiveVector, width: &[f64; 3]) -> f64 {
    let a = v.to_array();
    let mut d = 0.0;
    for i in 0..3 {
        if width[i] > 0.0 {
            let u = a[i] / width[i] - (a[i] / width[i]).floor();
            d += u * u;
        }
    }
    d
}

fn weakly_dominates(a: &[f64; 3], b: &[f64; 3], n: usize) -> bool {
    (0..n).all(|i| a[i] <= b[i])
}

impl<T: Clone> ElitistArchive<T> {
    /// Adaptive archive: `cells` boxes per objective over the archive's
    /// range, refreshed by [`ElitistArchive::rescale`]. `cells == 0` keeps a
    /// plain Pareto archive.
    pub fn new(cells: usize) -> Self {
        ElitistArchive {
            entries: Vec::new(),
            cells,
            width: [0.0; 3],
            span: [0.0; 3],
            adaptive: true,
        }
    }

    /// Archive with fixed box widths.
    pub fn with_widths(width: [f64; 3]) -> Self {
        ElitistArchive {
            entries: Vec::new(),
            cells: 0,
            width,
            span: [0.0; 3],
            adaptive: false,
        }
    }

    /// Empty archive sharing this archive's box widths.
    pub fn empty_like(&self) -> Self {
        ElitistArchive {
            entries: Vec::new(),
            cells: self.cells,
            width: self.width,
            span: self.span,
            adaptive: false,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry<T>> {
        self.entries
    }

    pub fn widths(&self) -> [f64; 3] {
        self.width
    }

    /// Whether [`ElitistArchive::insert`] would accept `v`.
    pub fn accepts(&self, v: &ObjectiveVector) -> bool {
        if !v.is_valid() {
            return false;
        }
        let n = v.len();
        let bc = boxed(v, &self.width);
        let mut dist = None;
        for e in &self.entries {
            let bm = boxed(&e.objectives, &self.width);
            if weakly_dominates(&bm, &bc, n) {
                if bm[..n] != bc[..n] {
                    return false;
                }
                let dc = *dist.get_or_insert_with(|| corner_distance(v, &self.width));
                if corner_distance(&e.objectives, &self.width) <= dc {
                    return false;
                }
            }
        }
        true
    }

    pub fn insert(&mut self, v: ObjectiveVector, payload: T) -> bool {
        if !self.accepts(&v) {
            return false;
        }
        let n = v.len();
        let bc = boxed(&v, &self.width);
        let width = self.width;
        self.entries
            .retain(|e| !weakly_dominates(&bc, &boxed(&e.objectives, &width), n));
        self.entries.push(ArchiveEntry {
            objectives: v,
            payload,
        });
        true
    }

    /// Recomputes the box widths when the archive's objective range has
    /// grown by more than a factor of 2 since they were last set, and
    /// re-filters the members under the new widths.
    pub fn rescale(&mut self) {
        if !self.adaptive || self.cells == 0 || self.entries.is_empty() {
            return;
        }
        let n = self.entries[0].objectives.len();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for e in &self.entries {
            let a = e.objectives.to_array();
            for i in 0..n {
                lo[i] = lo[i].min(a[i]);
                hi[i] = hi[i].max(a[i]);
            }
        }
        let mut changed = false;
        for i in 0..n {
            let range = hi[i] - lo[i];
            if range > 0.0 && (self.width[i] == 0.0 || range > 2.0 * self.span[i]) {
                self.span[i] = range;
                self.width[i] = range / self.cells as f64;
                changed = true;
            }
        }
        if changed {
            let old = std::mem::take(&mut self.entries);
            for e in old {
                self.insert(e.objectives, e.payload);
            }
        }
    }
}

/// Dominated hypervolume of `points` (minimization) with respect to
/// `reference`, using the first `n` (2 or 3) objectives. Points not
/// strictly better than the reference in every objective add nothing.
pub fn hypervolume(points: &[[f64; 3]], n: usize, reference: [f64; 3]) -> f64 {
    let pts: Vec<[f64; 3]> = points
        .iter()
        .copied()
        .filter(|p| (0..n).all(|i| p[i] < reference[i]))
        .collect();
    match n {
        2 => area(&pts, reference),
        3 => {
            let mut zs: Vec<f64> = pts.iter().map(|p| p[2]).collect();
            zs.sort_by(|a, b| a.total_cmp(b));
            zs.dedup();
            let mut total = 0.0;
            for (i, &z) in zs.iter().enumerate() {
                let next = zs.get(i + 1).copied().unwrap_or(reference[2]);
                let slice: Vec<[f64; 3]> = pts.iter().copied().filter(|p| p[2] <= z).collect();
                total += area(&slice, reference) * (next - z);
            }
            total
        }
        _ => panic!("hypervolume supports 2 or 3 objectives"),
    }
}

fn area(points: &[[f64; 3]], reference: [f64; 3]) -> f64 {
    let mut pts: Vec<[f64; 3]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut total = 0.0;
    let mut best_y = reference[1];
    for (i, p) in pts.iter().enumerate() {
        if p[1] < best_y {
            best_y = p[1];
        }
        let next_x = pts.get(i + 1).map(|q| q[0]).unwrap_or(reference[0]);
        total += (next_x - p[0]) * (reference[1] - best_y);
    }
    total
}
