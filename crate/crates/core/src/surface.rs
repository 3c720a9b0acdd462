//! Subsurfaces of the grid torus, their boundary loops, and the topological
//! measure `τ(W) = |Ŵ|`.
//!
//! A [`SubSurface`] is the closed region `{g ≤ 0}` of a PL function `g`
//! known only through the sign of `g` at every vertex and the position where
//! its zero set crosses each sign-changing edge. Inside a triangle the region
//! is therefore a convex polygon cut off by a single straight segment, and
//! every boundary component is a simple closed polygon.
//!
//! The complement of the boundary splits into *faces*, the connected
//! components of same-sign vertices. Each face deformation retracts onto the
//! full subcomplex spanned by its vertices, which is how Euler
//! characteristics are computed. Boundary loops are the edges of a bipartite
//! graph on the faces; a contractible loop separates that graph and its disk
//! side is the side of Euler characteristic 1.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{area_and_integral, Corner};
use crate::grid::{TorusGrid, EDGE_DIRS};
use crate::lattice::LatticeSymplectomorphism;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq)]
pub struct SubSurface {
    grid: TorusGrid,
    inside: Vec<bool>,
    /// Crossing position on each edge, as a fraction from its base vertex.
    /// Only read on edges whose ends differ in `inside`.
    cuts: Arc<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopClass {
    Contractible,
    Essential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Exterior,
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopAction {
    /// Maximal interior loop: its disk was adjoined.
    Filled,
    /// Maximal exterior loop: its disk was cut away.
    Removed,
    /// Non-maximal contractible loop swallowed by a maximal disk.
    Absorbed,
    /// Essential loop; stays on the boundary.
    Kept,
}

/// Oriented boundary component. The region lies to the left.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoop {
    /// Crossing edges in traversal order.
    pub edges: Vec<usize>,
    /// Cut fraction (from the base vertex) on each edge.
    pub fractions: Vec<f64>,
    /// Crossing points, unwrapped into the plane, in torus units.
    pub points: Vec<[f64; 2]>,
    /// Net displacement in the universal cover: `(w_p, w_q)`.
    pub winding: (i64, i64),
}

impl BoundaryLoop {
    pub fn classify(&self) -> LoopClass {
        if self.winding == (0, 0) {
            LoopClass::Contractible
        } else {
            LoopClass::Essential
        }
    }

    pub fn is_contractible(&self) -> bool {
        self.classify() == LoopClass::Contractible
    }

    /// Winding up to orientation: the first non-zero entry is made positive.
    pub fn winding_class(&self) -> (i64, i64) {
        let (a, b) = self.winding;
        if a < 0 || (a == 0 && b < 0) {
            (-a, -b)
        } else {
            (a, b)
        }
    }

    /// Shoelace area of the lifted polygon. Positive when the loop runs
    /// counter-clockwise. Meaningful only for contractible loops.
    pub fn signed_area(&self) -> f64 {
        let pts = &self.points;
        let mut s = 0.0;
        for k in 0..pts.len() {
            let a = pts[k];
            let b = pts[(k + 1) % pts.len()];
            s += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * s
    }

    /// The closed disk `D(γ)` bounded by a contractible loop, found by
    /// cutting the torus along the loop alone and keeping the side of Euler
    /// characteristic 1.
    pub fn fill_disk(&self, grid: TorusGrid) -> Result<SubSurface> {
        if !self.is_contractible() {
            return Err(Error::EssentialLoop);
        }
        let mut cut = vec![f64::NAN; grid.edge_count()];
        for (&e, &f) in self.edges.iter().zip(&self.fractions) {
            cut[e] = f;
        }
        let mut uf = UnionFind::new(grid.vertex_count());
        for e in 0..grid.edge_count() {
            if cut[e].is_nan() {
                let (a, b) = grid.edge_ends(e);
                uf.union(a, b);
            }
        }
        let (side, count) = uf.labels();
        if count != 2 {
            return Err(Error::Topology(format!(
                "contractible loop splits the torus into {count} parts"
            )));
        }
        let chi_a = chi_of(&grid, |v| side[v] == 0);
        let chi_b = -chi_a;
        let disk_label = match (chi_a == 1, chi_b == 1) {
            (true, false) => 0,
            (false, true) => 1,
            _ => {
                return Err(Error::Topology(format!(
                    "loop sides have Euler characteristics {chi_a} and {chi_b}"
                )))
            }
        };
        let inside: Vec<bool> = side.iter().map(|&s| s == disk_label).collect();
        for c in cut.iter_mut() {
            if c.is_nan() {
                *c = 0.5;
            }
        }
        Ok(SubSurface { grid, inside, cuts: Arc::new(cut) })
    }
}

/// Euler characteristic of the full subcomplex on the selected vertices.
fn chi_of(grid: &TorusGrid, sel: impl Fn(usize) -> bool) -> i64 {
    let mut chi = 0i64;
    for v in 0..grid.vertex_count() {
        if !sel(v) {
            continue;
        }
        chi += 1;
        for d in 0..3 {
            let (_, w) = grid.edge_ends(3 * v + d);
            if sel(w) {
                chi -= 1;
            }
        }
        for s in 0..2 {
            if grid.triangle_vertices(2 * v + s).iter().all(|&w| sel(w)) {
                chi += 1;
            }
        }
    }
    chi
}

/// Face structure of a subsurface and the disks of its contractible loops.
#[derive(Debug, Clone)]
pub struct Topology {
    pub loops: Vec<BoundaryLoop>,
    /// Face id of every vertex.
    pub vertex_face: Vec<u32>,
    pub face_inside: Vec<bool>,
    pub face_chi: Vec<i64>,
    /// `(inside face, outside face)` adjacent to each loop.
    pub loop_faces: Vec<(usize, usize)>,
    /// For contractible loops, the faces making up `D(γ)`.
    pub disks: Vec<Option<Vec<bool>>>,
}

impl Topology {
    fn contains(&self, outer: usize, inner: usize) -> bool {
        match (&self.disks[outer], &self.disks[inner]) {
            (Some(a), Some(b)) => b.iter().zip(a).all(|(&x, &y)| !x || y),
            _ => false,
        }
    }

    fn disjoint(&self, a: usize, b: usize) -> bool {
        match (&self.disks[a], &self.disks[b]) {
            (Some(a), Some(b)) => !a.iter().zip(b).any(|(&x, &y)| x && y),
            _ => false,
        }
    }

    /// Indices of the maximal contractible loops.
    pub fn maximal(&self) -> Vec<usize> {
        let contractible: Vec<usize> =
            (0..self.loops.len()).filter(|&k| self.disks[k].is_some()).collect();
        contractible
            .iter()
            .copied()
            .filter(|&k| {
                contractible
                    .iter()
                    .all(|&o| o == k || self.contains(k, o) || self.disjoint(k, o))
            })
            .collect()
    }

    /// Exterior when the region's side of the loop lies in `D(γ)`.
    pub fn side(&self, k: usize) -> Option<Side> {
        let disk = self.disks[k].as_ref()?;
        Some(if disk[self.loop_faces[k].0] { Side::Exterior } else { Side::Interior })
    }
}

impl SubSurface {
    pub fn whole(grid: TorusGrid) -> Self {
        Self::from_vertex_set(grid, vec![true; grid.vertex_count()])
    }

    pub fn empty(grid: TorusGrid) -> Self {
        Self::from_vertex_set(grid, vec![false; grid.vertex_count()])
    }

    /// Thickened vertex set: boundary crosses every sign-changing edge at its
    /// midpoint.
    pub fn from_vertex_set(grid: TorusGrid, inside: Vec<bool>) -> Self {
        assert_eq!(inside.len(), grid.vertex_count());
        Self { grid, inside, cuts: Arc::new(vec![0.5; grid.edge_count()]) }
    }

    /// `{g ≤ level}` for PL vertex data `g`; `level` must differ from every
    /// vertex value.
    pub fn from_levels(grid: TorusGrid, values: &[f64], level: f64) -> Result<Self> {
        if values.len() != grid.vertex_count() {
            return Err(Error::GridMismatch { expected: grid.n(), actual: 0 });
        }
        if values.iter().any(|&h| h == level) {
            return Err(Error::IrregularLevel(level));
        }
        let inside: Vec<bool> = values.iter().map(|&h| h < level).collect();
        let mut cuts = vec![0.5; grid.edge_count()];
        for [v, r, d, u] in grid.cells() {
            for (k, w) in [r, u, d].into_iter().enumerate() {
                if inside[v] != inside[w] {
                    cuts[3 * v + k] = (level - values[v]) / (values[w] - values[v]);
                }
            }
        }
        Ok(Self { grid, inside, cuts: Arc::new(cuts) })
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    #[inline]
    fn crossing(&self, e: usize) -> bool {
        let (a, b) = self.grid.edge_ends(e);
        self.inside[a] != self.inside[b]
    }

    /// Closure of the complement: same boundary, sides swapped.
    pub fn complement(&self) -> Self {
        Self {
            grid: self.grid,
            inside: self.inside.iter().map(|&b| !b).collect(),
            cuts: Arc::clone(&self.cuts),
        }
    }

    /// True when no triangle meets both regions (their closures are
    /// disjoint).
    pub fn is_disjoint(&self, other: &SubSurface) -> bool {
        self.grid == other.grid
            && (0..self.grid.triangle_count()).all(|t| {
                let vs = self.grid.triangle_vertices(t);
                !(vs.iter().any(|&v| self.inside[v]) && vs.iter().any(|&v| other.inside[v]))
            })
    }

    pub fn union_disjoint(&self, other: &SubSurface) -> Result<Self> {
        if !self.is_disjoint(other) {
            return Err(Error::NotDisjoint);
        }
        let mut cuts = (*self.cuts).clone();
        for (e, c) in cuts.iter_mut().enumerate() {
            if other.crossing(e) {
                *c = other.cuts[e];
            }
        }
        let inside = self.inside.iter().zip(&other.inside).map(|(&a, &b)| a || b).collect();
        Ok(Self { grid: self.grid, inside, cuts: Arc::new(cuts) })
    }

    /// Image under a lattice map that preserves the triangulation.
    pub fn map(&self, phi: &LatticeSymplectomorphism) -> Result<Self> {
        phi.validate()?;
        if !phi.preserves_triangulation() {
            return Err(Error::BreaksTriangulation);
        }
        let g = self.grid;
        let mut inside = vec![false; g.vertex_count()];
        for v in 0..g.vertex_count() {
            inside[phi.apply_vertex(&g, v)] = self.inside[v];
        }
        let [[a, b], [c, d]] = phi.matrix;
        let mut cuts = vec![0.5; g.edge_count()];
        for e in 0..g.edge_count() {
            let (x, dir) = (e / 3, EDGE_DIRS[e % 3]);
            let off = (a * dir.0 + b * dir.1, c * dir.0 + d * dir.1);
            let base = phi.apply_vertex(&g, x);
            let image = g.edge_to(base, off);
            cuts[image] = if image / 3 == base { self.cuts[e] } else { 1.0 - self.cuts[e] };
        }
        Ok(Self { grid: g, inside, cuts: Arc::new(cuts) })
    }

    /// Inside part of a triangle as a counter-clockwise polygon, with corner
    /// data linearly interpolated onto the cut points.
    pub fn piece(&self, t: usize, corners: &[Corner; 3]) -> Vec<Corner> {
        let verts = self.grid.triangle_vertices(t);
        let ins = verts.map(|v| self.inside[v]);
        if ins == [true; 3] {
            return corners.to_vec();
        }
        if ins == [false; 3] {
            return Vec::new();
        }
        let sides = self.grid.triangle_sides(t);
        let mut poly = Vec::with_capacity(4);
        for k in 0..3 {
            let k1 = (k + 1) % 3;
            if ins[k] {
                poly.push(corners[k]);
            }
            if ins[k] != ins[k1] {
                let f = self.cuts[sides[k].edge];
                let f = if sides[k].forward { f } else { 1.0 - f };
                poly.push(Corner::lerp(corners[k], corners[k1], f));
            }
        }
        poly
    }

    fn local_corners(&self, t: usize) -> [Corner; 3] {
        let pos = self.grid.triangle_positions(t);
        pos.map(|(x, y)| Corner { x, y, h: 0.0 })
    }

    /// Lebesgue measure (total torus area 1).
    pub fn measure(&self) -> f64 {
        let g = &self.grid;
        let ins = &self.inside;
        let mut full = 0usize;
        let mut partial = 0.0;
        for [v, r, d, u] in g.cells() {
            for (s, k) in [(0, ins[r] as u8 + ins[d] as u8), (1, ins[d] as u8 + ins[u] as u8)] {
                match k + ins[v] as u8 {
                    0 => {}
                    3 => full += 1,
                    _ => {
                        let t = 2 * v + s;
                        partial += area_and_integral(&self.piece(t, &self.local_corners(t))).0;
                    }
                }
            }
        }
        (0.5 * full as f64 + partial) / g.vertex_count() as f64
    }

    /// Ids of triangles meeting the region in positive area, ascending.
    pub fn triangles(&self) -> Vec<usize> {
        (0..self.grid.triangle_count())
            .filter(|&t| self.grid.triangle_vertices(t).iter().any(|&v| self.inside[v]))
            .collect()
    }

    /// Traces every boundary component with the region on its left.
    pub fn boundary_loops(&self) -> Vec<BoundaryLoop> {
        let g = &self.grid;
        let n = g.n() as f64;
        let mut seen = vec![false; g.edge_count()];
        let mut loops = Vec::new();
        let starts = g.cells().flat_map(|[v, r, d, u]| {
            [(0, r), (1, u), (2, d)]
                .into_iter()
                .filter(move |&(_, w)| self.inside[v] != self.inside[w])
                .map(move |(k, _)| 3 * v + k)
        });
        for start in starts {
            if seen[start] {
                continue;
            }
            // Triangle in which `start` is crossed from inside to outside.
            let mut tri = g.edge_triangles(start)[0];
            if self.exit_and_entry(tri).0 != start {
                tri = g.edge_triangles(start)[1];
            }
            let mut edges = Vec::new();
            let mut e = start;
            loop {
                seen[e] = true;
                edges.push(e);
                let (_, entry) = self.exit_and_entry(tri);
                let [t0, t1] = g.edge_triangles(entry);
                tri = if t0 == tri { t1 } else { t0 };
                e = entry;
                if e == start {
                    break;
                }
            }
            let fractions: Vec<f64> = edges.iter().map(|&e| self.cuts[e]).collect();
            let raw: Vec<(f64, f64)> = edges
                .iter()
                .zip(&fractions)
                .map(|(&e, &f)| {
                    let (i, j) = g.coords(e / 3);
                    let (di, dj) = EDGE_DIRS[e % 3];
                    (i as f64 + f * di as f64, j as f64 + f * dj as f64)
                })
                .collect();
            let wrap = |d: f64| d - n * (d / n).round();
            let mut points = Vec::with_capacity(raw.len());
            let mut cur = raw[0];
            points.push([cur.0 / n, cur.1 / n]);
            let mut total = (0.0, 0.0);
            for k in 1..=raw.len() {
                let next = raw[k % raw.len()];
                let prev = raw[k - 1];
                let d = (wrap(next.0 - prev.0), wrap(next.1 - prev.1));
                total = (total.0 + d.0, total.1 + d.1);
                cur = (cur.0 + d.0, cur.1 + d.1);
                if k < raw.len() {
                    points.push([cur.0 / n, cur.1 / n]);
                }
            }
            let winding = ((total.0 / n).round() as i64, (total.1 / n).round() as i64);
            loops.push(BoundaryLoop { edges, fractions, points, winding });
        }
        loops
    }

    /// For a mixed triangle: the side crossed inside→outside and the side
    /// crossed outside→inside, walking the corners counter-clockwise.
    fn exit_and_entry(&self, t: usize) -> (usize, usize) {
        let verts = self.grid.triangle_vertices(t);
        let sides = self.grid.triangle_sides(t);
        let (mut exit, mut entry) = (usize::MAX, usize::MAX);
        for k in 0..3 {
            let (a, b) = (self.inside[verts[k]], self.inside[verts[(k + 1) % 3]]);
            if a && !b {
                exit = sides[k].edge;
            } else if !a && b {
                entry = sides[k].edge;
            }
        }
        (exit, entry)
    }

    /// Faces, loops and disks.
    pub fn topology(&self) -> Result<Topology> {
        self.topology_of(self.boundary_loops())
    }

    fn topology_of(&self, loops: Vec<BoundaryLoop>) -> Result<Topology> {
        let g = &self.grid;
        let ins = &self.inside;
        let mut uf = UnionFind::new(g.vertex_count());
        for [v, r, d, u] in g.cells() {
            for w in [r, u, d] {
                if ins[v] == ins[w] {
                    uf.union(v, w);
                }
            }
        }
        let (vertex_face, face_count) = uf.labels();
        let mut face_inside = vec![false; face_count];
        let mut face_chi = vec![0i64; face_count];
        for [v, r, d, u] in g.cells() {
            let f = vertex_face[v] as usize;
            let x = ins[v];
            face_inside[f] = x;
            let same = [r, u, d].map(|w| ins[w] == x);
            let edges = same.iter().filter(|&&b| b).count() as i64;
            let tris = (same[0] && same[2]) as i64 + (same[1] && same[2]) as i64;
            face_chi[f] += 1 - edges + tris;
        }
        let loop_faces: Vec<(usize, usize)> = loops
            .iter()
            .map(|l| {
                let (a, b) = g.edge_ends(l.edges[0]);
                let (fa, fb) = (vertex_face[a] as usize, vertex_face[b] as usize);
                if self.inside[a] {
                    (fa, fb)
                } else {
                    (fb, fa)
                }
            })
            .collect();
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); face_count];
        for (k, &(fi, fo)) in loop_faces.iter().enumerate() {
            adj[fi].push((k, fo));
            adj[fo].push((k, fi));
        }
        let mut disks = Vec::with_capacity(loops.len());
        for (k, l) in loops.iter().enumerate() {
            if !l.is_contractible() {
                disks.push(None);
                continue;
            }
            let (fi, fo) = loop_faces[k];
            let mut side = vec![false; face_count];
            side[fi] = true;
            let mut queue = VecDeque::from([fi]);
            while let Some(f) = queue.pop_front() {
                for &(via, h) in &adj[f] {
                    if via != k && !side[h] {
                        side[h] = true;
                        queue.push_back(h);
                    }
                }
            }
            if side[fo] {
                return Err(Error::Topology("contractible loop does not separate".into()));
            }
            let chi_a: i64 = (0..face_count).filter(|&f| side[f]).map(|f| face_chi[f]).sum();
            let chi_b: i64 = (0..face_count).filter(|&f| !side[f]).map(|f| face_chi[f]).sum();
            let disk = match (chi_a == 1, chi_b == 1) {
                (true, false) => side,
                (false, true) => side.iter().map(|&s| !s).collect(),
                _ => {
                    return Err(Error::Topology(format!(
                        "loop sides have Euler characteristics {chi_a} and {chi_b}"
                    )))
                }
            };
            disks.push(Some(disk));
        }
        Ok(Topology { loops, vertex_face, face_inside, face_chi, loop_faces, disks })
    }

    fn find_loop(&self, topo: &Topology, lp: &BoundaryLoop) -> Result<usize> {
        topo.loops
            .iter()
            .position(|l| l.edges.contains(&lp.edges[0]) && l.edges.len() == lp.edges.len())
            .ok_or(Error::NotOnBoundary)
    }

    /// Contractible boundary loops whose disks contain or avoid the disk of
    /// every other contractible boundary loop.
    pub fn maximal_loops(&self) -> Result<Vec<BoundaryLoop>> {
        let topo = self.topology()?;
        Ok(topo.maximal().into_iter().map(|k| topo.loops[k].clone()).collect())
    }

    pub fn classify_side(&self, lp: &BoundaryLoop) -> Result<Side> {
        if !lp.is_contractible() {
            return Err(Error::EssentialLoop);
        }
        let topo = self.topology()?;
        let k = self.find_loop(&topo, lp)?;
        topo.side(k).ok_or(Error::EssentialLoop)
    }

    /// `Ŵ = (W ∪ ⋃ D(δ_i)) − ⋃ D(γ_j)` over the maximal interior loops `δ`
    /// and maximal exterior loops `γ` of the original `W`, in one batch.
    pub fn regularize(&self) -> Result<RegularizedSurface> {
        let loops = self.boundary_loops();
        if loops.iter().all(|l| !l.is_contractible()) {
            let provenance = loops.into_iter().map(|l| (l, LoopAction::Kept)).collect();
            return Ok(RegularizedSurface { region: self.clone(), provenance });
        }
        let topo = self.topology_of(loops)?;
        let maximal = topo.maximal();
        let mut keep = topo.face_inside.clone();
        let mut action: Vec<LoopAction> = topo
            .loops
            .iter()
            .map(|l| if l.is_contractible() { LoopAction::Absorbed } else { LoopAction::Kept })
            .collect();
        let mut removed = vec![false; keep.len()];
        for &k in &maximal {
            let disk = topo.disks[k].as_ref().expect("maximal loops are contractible");
            match topo.side(k) {
                Some(Side::Interior) => {
                    action[k] = LoopAction::Filled;
                    for (f, &d) in disk.iter().enumerate() {
                        keep[f] |= d;
                    }
                }
                _ => {
                    action[k] = LoopAction::Removed;
                    for (f, &d) in disk.iter().enumerate() {
                        removed[f] |= d;
                    }
                }
            }
        }
        for (k, r) in keep.iter_mut().zip(&removed) {
            *k &= !r;
        }
        let inside = topo.vertex_face.iter().map(|&f| keep[f as usize]).collect();
        let region = SubSurface { grid: self.grid, inside, cuts: Arc::clone(&self.cuts) };
        let provenance = topo.loops.into_iter().zip(action).collect();
        Ok(RegularizedSurface { region, provenance })
    }

    /// Topological measure `τ(W) = |Ŵ|`.
    pub fn tau(&self) -> Result<f64> {
        Ok(self.regularize()?.region.measure())
    }

    pub fn to_json(&self) -> SubSurfaceJson {
        SubSurfaceJson {
            n: self.grid.n(),
            triangles: self.triangles(),
            boundary: self.boundary_loops().into_iter().map(|l| l.points).collect(),
            measure: self.measure(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegularizedSurface {
    pub region: SubSurface,
    pub provenance: Vec<(BoundaryLoop, LoopAction)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubSurfaceJson {
    pub n: usize,
    pub triangles: Vec<usize>,
    pub boundary: Vec<Vec<[f64; 2]>>,
    pub measure: f64,
}
