//! Combinatorics of the triangulated `n × n` flat torus.
//!
//! Vertex `(i, j)` sits at `(p, q) = (i/n, j/n)` and has id `i·n + j`. Every
//! unit cell is split along its `(+1, +1)` diagonal. Edges are numbered
//! `3·v + d` where `d` selects the direction `(1,0)`, `(0,1)` or `(1,1)` out
//! of the base vertex `v`; triangles are numbered `2·(i·n + j) + s`.

use crate::error::{Error, Result};

pub const MIN_RESOLUTION: usize = 8;

/// Edge directions out of the base vertex, indexed by `d`.
pub const EDGE_DIRS: [(i64, i64); 3] = [(1, 0), (0, 1), (1, 1)];

/// Link of a vertex in counter-clockwise order.
pub const LINK: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

/// Corner offsets of the two triangles of a cell, counter-clockwise.
pub const TRI_CORNERS: [[(i64, i64); 3]; 2] = [[(0, 0), (1, 0), (1, 1)], [(0, 0), (1, 1), (0, 1)]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n: usize,
}

/// One side of a triangle, walked counter-clockwise from corner `from` to
/// corner `from + 1 (mod 3)`.
#[derive(Debug, Clone, Copy)]
pub struct TriSide {
    pub edge: usize,
    /// True when the walk starts at the edge's base vertex.
    pub forward: bool,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_RESOLUTION {
            return Err(Error::Resolution(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        3 * self.n * self.n
    }

    #[inline]
    pub fn triangle_count(&self) -> usize {
        2 * self.n * self.n
    }

    /// Area of one triangle; the torus has total area 1.
    #[inline]
    pub fn triangle_area(&self) -> f64 {
        0.5 / (self.n * self.n) as f64
    }

    #[inline]
    pub fn vertex(&self, i: i64, j: i64) -> usize {
        let n = self.n as i64;
        (i.rem_euclid(n) * n + j.rem_euclid(n)) as usize
    }

    #[inline]
    pub fn coords(&self, v: usize) -> (i64, i64) {
        ((v / self.n) as i64, (v % self.n) as i64)
    }

    #[inline]
    pub fn neighbor(&self, v: usize, off: (i64, i64)) -> usize {
        let (i, j) = self.coords(v);
        self.vertex(i + off.0, j + off.1)
    }

    /// Edge joining `v` to its neighbour at offset `off` (one of the six link
    /// offsets).
    pub fn edge_to(&self, v: usize, off: (i64, i64)) -> usize {
        match off {
            (1, 0) => 3 * v,
            (0, 1) => 3 * v + 1,
            (1, 1) => 3 * v + 2,
            (-1, 0) => 3 * self.neighbor(v, off),
            (0, -1) => 3 * self.neighbor(v, off) + 1,
            (-1, -1) => 3 * self.neighbor(v, off) + 2,
            _ => panic!("offset {off:?} is not a grid edge"),
        }
    }

    /// Corners `[v, v+(1,0), v+(1,1), v+(0,1)]` of every cell, in vertex id
    /// order. Triangle `2v` is `[0, 1, 2]` of these, `2v + 1` is `[0, 2, 3]`.
    pub fn cells(&self) -> impl Iterator<Item = [usize; 4]> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| {
            let ip = if i + 1 == n { 0 } else { i + 1 };
            (0..n).map(move |j| {
                let jp = if j + 1 == n { 0 } else { j + 1 };
                [i * n + j, ip * n + j, ip * n + jp, i * n + jp]
            })
        })
    }

    /// Base and tip vertex of an edge.
    #[inline]
    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        let v = e / 3;
        (v, self.neighbor(v, EDGE_DIRS[e % 3]))
    }

    /// The two triangles sharing an edge.
    pub fn edge_triangles(&self, e: usize) -> [usize; 2] {
        let v = e / 3;
        let (i, j) = self.coords(v);
        match e % 3 {
            0 => [2 * v, 2 * self.vertex(i, j - 1) + 1],
            1 => [2 * v + 1, 2 * self.vertex(i - 1, j)],
            _ => [2 * v, 2 * v + 1],
        }
    }

    #[inline]
    pub fn triangle_cell(&self, t: usize) -> (usize, usize) {
        (t / 2, t % 2)
    }

    /// Corner vertices of a triangle, counter-clockwise.
    pub fn triangle_vertices(&self, t: usize) -> [usize; 3] {
        let (v, s) = self.triangle_cell(t);
        let (i, j) = self.coords(v);
        TRI_CORNERS[s].map(|(di, dj)| self.vertex(i + di, j + dj))
    }

    /// Sides of a triangle in the same counter-clockwise order as its corners:
    /// side `k` runs from corner `k` to corner `k + 1`.
    pub fn triangle_sides(&self, t: usize) -> [TriSide; 3] {
        let (v, s) = self.triangle_cell(t);
        let [c0, c1, c2] = self.triangle_vertices(t);
        if s == 0 {
            [
                TriSide { edge: 3 * c0, forward: true },
                TriSide { edge: 3 * c1 + 1, forward: true },
                TriSide { edge: 3 * v + 2, forward: false },
            ]
        } else {
            [
                TriSide { edge: 3 * c0 + 2, forward: true },
                TriSide { edge: 3 * c2, forward: false },
                TriSide { edge: 3 * c0 + 1, forward: false },
            ]
        }
    }

    /// Triangles incident to `v`; entry `k` spans link entries `k` and `k+1`.
    pub fn star(&self, v: usize) -> [usize; 6] {
        let (i, j) = self.coords(v);
        [
            2 * v,
            2 * v + 1,
            2 * self.vertex(i - 1, j),
            2 * self.vertex(i - 1, j - 1) + 1,
            2 * self.vertex(i - 1, j - 1),
            2 * self.vertex(i, j - 1) + 1,
        ]
    }

    /// Local corner positions of a triangle in grid units, unwrapped.
    pub fn triangle_positions(&self, t: usize) -> [(f64, f64); 3] {
        let (v, s) = self.triangle_cell(t);
        let (i, j) = self.coords(v);
        TRI_CORNERS[s].map(|(di, dj)| ((i + di) as f64, (j + dj) as f64))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.triangle_count() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_match_triangles_and_edges() {
        let g = TorusGrid::new(9).unwrap();
        for (v, [a, r, d, u]) in g.cells().enumerate() {
            assert_eq!(a, v);
            assert_eq!(g.triangle_vertices(2 * v), [a, r, d]);
            assert_eq!(g.triangle_vertices(2 * v + 1), [a, d, u]);
            assert_eq!(g.edge_ends(3 * v), (v, r));
            assert_eq!(g.edge_ends(3 * v + 1), (v, u));
            assert_eq!(g.edge_ends(3 * v + 2), (v, d));
        }
    }

    #[test]
    fn rejects_small_grids() {
        assert_eq!(TorusGrid::new(7), Err(Error::Resolution(7)));
        assert!(TorusGrid::new(8).is_ok());
    }

    #[test]
    fn torus_euler_characteristic_is_zero() {
        for n in [8, 9, 16, 33] {
            assert_eq!(TorusGrid::new(n).unwrap().euler_characteristic(), 0);
        }
    }

    #[test]
    fn every_edge_borders_two_triangles_containing_it() {
        let g = TorusGrid::new(9).unwrap();
        let mut count = vec![0usize; g.edge_count()];
        for t in 0..g.triangle_count() {
            for side in g.triangle_sides(t) {
                count[side.edge] += 1;
                assert!(g.edge_triangles(side.edge).contains(&t));
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }

    #[test]
    fn sides_follow_corner_order() {
        let g = TorusGrid::new(8).unwrap();
        for t in 0..g.triangle_count() {
            let c = g.triangle_vertices(t);
            for (k, side) in g.triangle_sides(t).iter().enumerate() {
                let (a, b) = g.edge_ends(side.edge);
                let (from, to) = (c[k], c[(k + 1) % 3]);
                if side.forward {
                    assert_eq!((a, b), (from, to));
                } else {
                    assert_eq!((a, b), (to, from));
                }
            }
        }
    }

    #[test]
    fn star_matches_link() {
        let g = TorusGrid::new(8).unwrap();
        for v in [0, 7, 8, 63, 27] {
            let star = g.star(v);
            for k in 0..6 {
                let a = g.neighbor(v, LINK[k]);
                let b = g.neighbor(v, LINK[(k + 1) % 6]);
                let tri = g.triangle_vertices(star[k]);
                assert!(tri.contains(&v) && tri.contains(&a) && tri.contains(&b));
                let e = g.edge_to(v, LINK[k]);
                let (x, y) = g.edge_ends(e);
                assert!((x == v && y == a) || (x == a && y == v));
            }
        }
    }
}
