use std::collections::{BTreeMap, HashMap};

use crate::geom::{project_onto_segment, PlanarPoint};
use crate::scalar::{from_usize, lit, Real};

use super::{MapSegment, SegmentId};

/// Distances within this many meters of the minimum count as a tie.
pub const TIE_EPS: f64 = 1e-9;

/// Result of projecting a point onto the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection<T> {
    pub segment: SegmentId,
    /// Arc distance of `q` along the winning segment.
    pub d: T,
    pub q: PlanarPoint<T>,
    pub dist: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    segment: SegmentId,
    k: usize,
}

/// Uniform grid over every polyline sub-segment of a map.
#[derive(Debug, Clone)]
pub struct SegmentIndex<T> {
    cell: T,
    pieces: Vec<Piece>,
    cells: HashMap<(i64, i64), Vec<usize>>,
    lo: (i64, i64),
    hi: (i64, i64),
}

impl<T: Real> SegmentIndex<T> {
    pub fn build(segments: &BTreeMap<SegmentId, MapSegment<T>>) -> Self {
        Self::with_cell_size(segments, lit(16.0))
    }

    pub fn with_cell_size(segments: &BTreeMap<SegmentId, MapSegment<T>>, cell: T) -> Self {
        let mut idx = Self {
            cell,
            pieces: Vec::new(),
            cells: HashMap::new(),
            lo: (i64::MAX, i64::MAX),
            hi: (i64::MIN, i64::MIN),
        };
        for (id, seg) in segments {
            let n = seg.polyline.len().saturating_sub(1).max(1);
            for k in 0..n {
                let (a, b) = piece_ends(seg, k);
                let slot = idx.pieces.len();
                idx.pieces.push(Piece { segment: *id, k });
                let (i0, j0) = idx.cell_of(&PlanarPoint::new(a.x.min(b.x), a.y.min(b.y)));
                let (i1, j1) = idx.cell_of(&PlanarPoint::new(a.x.max(b.x), a.y.max(b.y)));
                idx.lo = (idx.lo.0.min(i0), idx.lo.1.min(j0));
                idx.hi = (idx.hi.0.max(i1), idx.hi.1.max(j1));
                for i in i0..=i1 {
                    for j in j0..=j1 {
                        idx.cells.entry((i, j)).or_default().push(slot);
                    }
                }
            }
        }
        idx
    }

    fn cell_of(&self, p: &PlanarPoint<T>) -> (i64, i64) {
        let f = |v: T| (v / self.cell).floor().to_i64().unwrap_or(0);
        (f(p.x), f(p.y))
    }

    /// Exact nearest point over all (or only `candidates`) polylines.
    ///
    /// Among sub-segments whose distance is within [`TIE_EPS`] of the
    /// minimum, the one with the lowest segment id and then the lowest
    /// sub-segment index wins.
    pub fn nearest(
        &self,
        segments: &BTreeMap<SegmentId, MapSegment<T>>,
        p: PlanarPoint<T>,
        candidates: Option<&[SegmentId]>,
    ) -> Option<Projection<T>> {
        if self.pieces.is_empty() || !p.is_finite() {
            return None;
        }
        let allowed = |id: &SegmentId| candidates.is_none_or(|c| c.contains(id));
        let eps = lit::<T>(TIE_EPS);
        let (ci, cj) = self.cell_of(&p);
        let max_ring = [
            ci - self.lo.0,
            self.hi.0 - ci,
            cj - self.lo.1,
            self.hi.1 - cj,
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
        .max(0);

        let mut found: Vec<(T, Piece, PlanarPoint<T>, T)> = Vec::new();
        let mut best = T::infinity();
        for ring in 0..=max_ring {
            for (i, j) in ring_cells(ci, cj, ring) {
                let Some(slots) = self.cells.get(&(i, j)) else {
                    continue;
                };
                for &slot in slots {
                    let piece = self.pieces[slot];
                    if !allowed(&piece.segment) {
                        continue;
                    }
                    let (a, b) = piece_ends(&segments[&piece.segment], piece.k);
                    let (q, t) = project_onto_segment(p, a, b);
                    let dist = p.distance(&q);
                    best = best.min(dist);
                    found.push((dist, piece, q, t));
                }
            }
            // Everything not yet visited is at least `ring * cell` away.
            if best + eps < from_usize::<T>(ring as usize) * self.cell {
                break;
            }
        }
        let limit = best + eps;
        found
            .into_iter()
            .filter(|(dist, ..)| *dist <= limit)
            .min_by(|x, y| (x.1.segment, x.1.k).cmp(&(y.1.segment, y.1.k)))
            .map(|(dist, piece, q, t)| Projection {
                segment: piece.segment,
                d: from_usize::<T>(piece.k) + t,
                q,
                dist,
            })
    }
}

/// Endpoints of sub-segment `k`. A one-point polyline yields a degenerate
/// piece at that point.
fn piece_ends<T: Real>(seg: &MapSegment<T>, k: usize) -> (PlanarPoint<T>, PlanarPoint<T>) {
    let a = seg.polyline[k];
    let b = seg.polyline.get(k + 1).copied().unwrap_or(a);
    (a, b)
}

fn ring_cells(ci: i64, cj: i64, ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(ci, cj)];
    }
    let mut out = Vec::with_capacity(8 * ring as usize);
    for d in -ring..=ring {
        out.push((ci + d, cj - ring));
        out.push((ci + d, cj + ring));
    }
    for d in (-ring + 1)..ring {
        out.push((ci - ring, cj + d));
        out.push((ci + ring, cj + d));
    }
    out
}
