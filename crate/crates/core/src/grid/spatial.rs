//! Uniform-bucket nearest-segment search over a set of 2-D segments.

use super::shapes::segment_distance;
use super::Point;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Nearest {
    pub segment: usize,
    pub t: f64,
    pub distance: f64,
}

pub(crate) struct SegmentIndex<'a> {
    segments: &'a [(Point, Point)],
    origin: Point,
    size: f64,
    ncx: usize,
    ncy: usize,
    /// Segment ids per bucket; a segment is listed in every bucket its
    /// bounding box overlaps.
    buckets: Vec<Vec<usize>>,
    /// Non-empty buckets with the bounding box of their segments.
    occupied: Vec<(usize, [f64; 4])>,
}

impl<'a> SegmentIndex<'a> {
    /// `bucket` is the edge length of the square buckets.
    pub fn new(segments: &'a [(Point, Point)], bucket: f64) -> Self {
        debug_assert!(bucket > 0.0);
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for (p, q) in segments {
            b[0] = b[0].min(p[0].min(q[0]));
            b[1] = b[1].min(p[1].min(q[1]));
            b[2] = b[2].max(p[0].max(q[0]));
            b[3] = b[3].max(p[1].max(q[1]));
        }
        if segments.is_empty() {
            b = [0.0, 0.0, 0.0, 0.0];
        }
        let ncx = (((b[2] - b[0]) / bucket).floor() as usize + 1).max(1);
        let ncy = (((b[3] - b[1]) / bucket).floor() as usize + 1).max(1);
        let mut index = Self {
            segments,
            origin: [b[0], b[1]],
            size: bucket,
            ncx,
            ncy,
            buckets: vec![Vec::new(); ncx * ncy],
            occupied: Vec::new(),
        };
        for (k, (p, q)) in segments.iter().enumerate() {
            let (i0, j0) = index.cell([p[0].min(q[0]), p[1].min(q[1])]);
            let (i1, j1) = index.cell([p[0].max(q[0]), p[1].max(q[1])]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    index.buckets[j * ncx + i].push(k);
                }
            }
        }
        for (k, ids) in index.buckets.iter().enumerate() {
            if ids.is_empty() {
                continue;
            }
            let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
            for &s in ids {
                let (p, q) = segments[s];
                b[0] = b[0].min(p[0].min(q[0]));
                b[1] = b[1].min(p[1].min(q[1]));
                b[2] = b[2].max(p[0].max(q[0]));
                b[3] = b[3].max(p[1].max(q[1]));
            }
            index.occupied.push((k, b));
        }
        index
    }

    fn cell(&self, p: Point) -> (usize, usize) {
        let fx = ((p[0] - self.origin[0]) / self.size).floor();
        let fy = ((p[1] - self.origin[1]) / self.size).floor();
        (
            (fx.max(0.0) as usize).min(self.ncx - 1),
            (fy.max(0.0) as usize).min(self.ncy - 1),
        )
    }

    /// Closest segment to `p`. Ties resolve to the lowest segment id, so the
    /// result matches a brute-force scan.
    #[cfg(test)]
    pub fn nearest(&self, p: Point) -> Option<Nearest> {
        self.nearest_with_hint(p, None)
    }

    /// Closest segment to `p`, seeding the search with a candidate segment
    /// (typically the answer for a neighbouring query point).
    pub fn nearest_with_hint(&self, p: Point, hint: Option<usize>) -> Option<Nearest> {
        if self.segments.is_empty() {
            return None;
        }
        let (ci, cj) = self.cell(p);
        let (ci, cj) = (ci as isize, cj as isize);
        let mut best: Option<Nearest> = None;
        // distances are squared during the search
        let consider = |s: usize, best: &mut Option<Nearest>| {
            let (a, q) = self.segments[s];
            let (d, t) = segment_distance2(p, a, q);
            let better = match best {
                None => true,
                Some(b) => d < b.distance || (d == b.distance && s < b.segment),
            };
            if better {
                *best = Some(Nearest { segment: s, t, distance: d });
            }
        };
        if let Some(s) = hint.filter(|&s| s < self.segments.len()) {
            consider(s, &mut best);
        }
        let max_r = self.ncx.max(self.ncy) as isize;
        for r in 0..=max_r {
            if ((2 * r + 1) * (2 * r + 1)) as usize > self.occupied.len() {
                // far from the segments: scanning occupied buckets is cheaper
                for (k, b) in &self.occupied {
                    let dx = (b[0] - p[0]).max(0.0).max(p[0] - b[2]);
                    let dy = (b[1] - p[1]).max(0.0).max(p[1] - b[3]);
                    if best.is_some_and(|n| dx * dx + dy * dy > n.distance) {
                        continue;
                    }
                    for &s in &self.buckets[*k] {
                        consider(s, &mut best);
                    }
                }
                break;
            }
            for j in (cj - r)..=(cj + r) {
                if j < 0 || j >= self.ncy as isize {
                    continue;
                }
                let on_edge_row = j == cj - r || j == cj + r;
                let mut i = ci - r;
                while i <= ci + r {
                    if i >= 0 && i < self.ncx as isize {
                        for &s in &self.buckets[j as usize * self.ncx + i as usize] {
                            consider(s, &mut best);
                        }
                    }
                    // interior rows only need the two ring columns
                    i += if on_edge_row || r == 0 { 1 } else { 2 * r };
                }
            }
            if let Some(b) = best {
                let lb = self.unvisited_bound(p, ci, cj, r);
                if b.distance < lb * lb {
                    break;
                }
            }
        }
        best.map(|n| {
            let (a, q) = self.segments[n.segment];
            Nearest { distance: segment_distance(p, a, q).0, ..n }
        })
    }

    /// Lower bound on the distance from `p` to any bucket outside the block
    /// of Chebyshev radius `r` around `(ci, cj)`.
    fn unvisited_bound(&self, p: Point, ci: isize, cj: isize, r: isize) -> f64 {
        let mut lb = f64::INFINITY;
        let s = self.size;
        if ci - r > 0 {
            let x = self.origin[0] + (ci - r) as f64 * s;
            lb = lb.min((p[0] - x).max(0.0));
        }
        if ci + r < self.ncx as isize - 1 {
            let x = self.origin[0] + (ci + r + 1) as f64 * s;
            lb = lb.min((x - p[0]).max(0.0));
        }
        if cj - r > 0 {
            let y = self.origin[1] + (cj - r) as f64 * s;
            lb = lb.min((p[1] - y).max(0.0));
        }
        if cj + r < self.ncy as isize - 1 {
            let y = self.origin[1] + (cj + r + 1) as f64 * s;
            lb = lb.min((y - p[1]).max(0.0));
        }
        lb
    }
}

/// Squared distance from `p` to segment `ab` and the parameter of the
/// closest point.
fn segment_distance2(p: Point, a: Point, b: Point) -> (f64, f64) {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if l2 > 0.0 { ((ap[0] * ab[0] + ap[1] * ab[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let dx = ap[0] - t * ab[0];
    let dy = ap[1] - t * ab[1];
    (dx * dx + dy * dy, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(segs: &[(Point, Point)], q: Point) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (k, (a, b)) in segs.iter().enumerate() {
            let d = segment_distance(q, *a, *b).0;
            if d < best.1 {
                best = (k, d);
            }
        }
        best
    }

    #[test]
    fn matches_brute_force() {
        let segs: Vec<(Point, Point)> = (0..200)
            .map(|k| {
                let t0 = k as f64 * 0.0314159;
                let t1 = (k + 1) as f64 * 0.0314159;
                ([t0.cos(), t0.sin()], [t1.cos(), t1.sin()])
            })
            .collect();
        for bucket in [0.05, 0.1, 0.7, 5.0] {
            let idx = SegmentIndex::new(&segs, bucket);
            for q in [[0.0, 0.0], [2.5, -1.0], [0.3, 0.95], [-0.7, 0.1], [-9.0, 4.0], [1.0, 0.0]] {
                let (k, d) = brute(&segs, q);
                for hint in [None, Some(0), Some(150)] {
                    let n = idx.nearest_with_hint(q, hint).unwrap();
                    assert!((n.distance - d).abs() <= 1e-15 * (1.0 + d));
                    let dk = segment_distance(q, segs[n.segment].0, segs[n.segment].1).0;
                    assert!(n.segment == k || (dk - d).abs() <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn long_segments_spanning_buckets() {
        let segs = vec![([-5.0, 0.0], [5.0, 0.0]), ([0.0, 3.0], [0.1, 3.0])];
        let idx = SegmentIndex::new(&segs, 0.5);
        let n = idx.nearest([4.0, 1.0]).unwrap();
        assert_eq!(n.segment, 0);
        assert_eq!(n.distance, 1.0);
    }
}
