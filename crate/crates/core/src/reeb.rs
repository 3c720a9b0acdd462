//! Reeb graph of a PL torus field and its cycle/tree decomposition.
//!
//! The graph is built by sweeping the vertices in perturbed order while the
//! crossing edges of the current level set carry a component label. A
//! regular vertex hands its lower label to its new upper edges. At a
//! critical vertex the touched components end in a new node, and each level
//! loop through the vertex's upper edges is re-traced and starts a new edge.
//! Monkey saddles are split into simple ones first.
//! Every triangle keeps a log of the labels it carried over its sweep
//! lifetime; the band of the triangle between consecutive log entries is the
//! part of its area that maps to that Reeb edge.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{CriticalKind, TorusField};
use crate::geometry::band;
use crate::grid::{TorusGrid, LINK};
use crate::surface::SubSurface;
use crate::unionfind::UnionFind;

const OPEN: u32 = u32::MAX;

#[derive(Debug, Clone, Serialize)]
pub struct ReebNode {
    pub id: usize,
    pub vertex: usize,
    pub value: f64,
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReebEdge {
    pub id: usize,
    /// End nodes, lower one first in perturbed order.
    pub endpoints: [usize; 2],
    /// Unperturbed values of the end nodes.
    pub value_interval: [f64; 2],
    /// Area of the preimage.
    pub measure: f64,
    /// `∫ H ω` over the preimage.
    #[serde(skip)]
    pub integral: f64,
}

/// Part of a triangle, `{lo ≤ H ≤ hi}`, mapping to one Reeb edge.
#[derive(Debug, Clone, Copy)]
pub struct Piece {
    pub triangle: usize,
    pub edge: usize,
    pub lo: f64,
    pub hi: f64,
    pub area: f64,
    pub integral: f64,
}

/// Where a vertex lands under the quotient map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Node(usize),
    Edge(usize),
}

#[derive(Debug, Clone)]
pub struct ReebGraph {
    pub grid: TorusGrid,
    pub nodes: Vec<ReebNode>,
    pub edges: Vec<ReebEdge>,
    pub pieces: Vec<Piece>,
    pub vertex_element: Vec<Element>,
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub attachment: usize,
    pub alpha: f64,
    pub edges: Vec<usize>,
    pub nodes: Vec<usize>,
    /// `|D_j|`, exact.
    pub region_measure: f64,
    /// `∫_{D_j} H ω`, exact.
    pub region_integral: f64,
    /// Closure of `D_j` as the thickening of the vertices mapping into the
    /// tree (same topology, not the same area).
    pub region: SubSurface,
}

impl Tree {
    /// `∫_{D_j} (α_j − H) ω`.
    pub fn term(&self) -> f64 {
        self.alpha * self.region_measure - self.region_integral
    }
}

#[derive(Debug, Clone)]
pub struct CycleTreeDecomposition {
    pub cycle_edges: Vec<usize>,
    pub cycle_nodes: Vec<usize>,
    pub trees: Vec<Tree>,
    /// `|S|` with `S = π⁻¹(Γ)`, exact.
    pub cycle_measure: f64,
    /// `S` as the thickening of the vertices mapping onto the cycle.
    pub cycle_region: SubSurface,
}

fn trace_level_loop(
    grid: &TorusGrid,
    below: &[bool],
    start: usize,
    edges: &mut Vec<usize>,
    tris: &mut Vec<usize>,
) {
    let crossing = |e: usize| {
        let (a, b) = grid.edge_ends(e);
        below[a] != below[b]
    };
    let mut e = start;
    let mut tri = grid.edge_triangles(start)[0];
    loop {
        edges.push(e);
        tris.push(tri);
        let next = grid
            .triangle_sides(tri)
            .iter()
            .map(|s| s.edge)
            .find(|&x| x != e && crossing(x))
            .expect("a mixed triangle has two crossing sides");
        let [t0, t1] = grid.edge_triangles(next);
        tri = if t0 == tri { t1 } else { t0 };
        e = next;
        if e == start {
            break;
        }
    }
}

/// A vertex whose link alternates between `k ≥ 3` lower and upper arcs.
///
/// Passing it is unfolded into `k − 1` simple saddles at the same value.
/// Near the vertex the level set is a chord across the star for every arc:
/// below the vertex the chords cut off the lower arcs, above it the upper
/// ones. Chord endpoints sit on the link between arcs; endpoint `2i` lies
/// before lower arc `i` and `2i + 1` after it. Outside the star the level
/// strands pair the endpoints the same way on both sides of the vertex, and
/// that pairing is read off the traced upper loops. Lower caps are then
/// joined one at a time, each join swapping two chords.
struct MultiSaddle<'a> {
    grid: &'a TorusGrid,
    v: usize,
    nbrs: [usize; 6],
    lower: [bool; 6],
}

impl MultiSaddle<'_> {
    fn unfold(
        &self,
        edge_label: &[u32],
        traced: &[(Vec<usize>, Vec<usize>)],
        raw: &mut Vec<(u32, u32)>,
        node_vertex: &mut Vec<usize>,
    ) -> Result<Vec<u32>> {
        let grid = self.grid;
        let lower = self.lower;
        // Arc index of every link position, counted from a lower arc start.
        let s = (0..6).find(|&k| lower[k] && !lower[(k + 5) % 6]).unwrap();
        let mut arc = [0usize; 6];
        let mut lower_label = Vec::new();
        let mut i = 0;
        for step in 0..6 {
            let k = (s + step) % 6;
            if step > 0 && lower[k] && !lower[(k + 5) % 6] {
                i += 1;
            }
            arc[k] = i;
            if lower[k] && (step == 0 || !lower[(k + 5) % 6]) {
                lower_label.push(edge_label[grid.edge_to(self.v, LINK[k])]);
            }
        }
        let arcs = lower_label.len();
        let ends = 2 * arcs;

        let position = |w: usize| self.nbrs.iter().position(|&x| x == w).unwrap();
        let touches_v = |e: usize| {
            let (a, b) = grid.edge_ends(e);
            a == self.v || b == self.v
        };
        let mut outer = vec![usize::MAX; ends];
        let mut chord_loop = vec![usize::MAX; arcs];
        for (li, (edges, tris)) in traced.iter().enumerate() {
            let len = edges.len();
            let r0 = (0..len).find(|&j| !touches_v(edges[j])).unwrap();
            let mut runs: Vec<(usize, usize)> = Vec::new();
            for step in 1..=len {
                let j = (r0 + step) % len;
                let prev = (j + len - 1) % len;
                if !touches_v(edges[j]) || touches_v(edges[prev]) {
                    continue;
                }
                let (a, b) = grid.edge_ends(edges[j]);
                let w = if a == self.v { b } else { a };
                let x = *grid
                    .triangle_vertices(tris[prev])
                    .iter()
                    .find(|&&x| x != self.v && x != w)
                    .unwrap();
                let (pw, px) = (position(w), position(x));
                let i = arc[pw];
                let (after_lower, before_next) = (2 * i + 1, 2 * ((i + 1) % arcs));
                chord_loop[i] = li;
                runs.push(if px == (pw + 5) % 6 {
                    (after_lower, before_next)
                } else {
                    (before_next, after_lower)
                });
            }
            for r in 0..runs.len() {
                let exit = runs[r].1;
                let entry = runs[(r + 1) % runs.len()].0;
                outer[exit] = entry;
                outer[entry] = exit;
            }
        }
        if outer.contains(&usize::MAX) || chord_loop.contains(&usize::MAX) {
            return Err(Error::Topology(format!("unmatched strands at multi-saddle {}", self.v)));
        }

        let mut inner: Vec<usize> = (0..ends).map(|e| e ^ 1).collect();
        let mut label = vec![OPEN; ends];
        for (i, &l) in lower_label.iter().enumerate() {
            label[2 * i] = l;
            label[2 * i + 1] = l;
        }
        for m in 1..arcs {
            let node = node_vertex.len() as u32;
            node_vertex.push(self.v);
            for l in [label[0], label[2 * m]] {
                if raw[l as usize].1 == OPEN {
                    raw[l as usize].1 = node;
                }
            }
            // Join cap m to the blob of caps 0..m.
            let tail = 2 * m - 1;
            inner[tail] = 2 * m;
            inner[2 * m] = tail;
            inner[2 * m + 1] = 0;
            inner[0] = 2 * m + 1;
            let comp = strand_components(&inner, &outer);
            let fresh = |c: usize, raw: &mut Vec<(u32, u32)>, label: &mut [u32]| {
                raw.push((node, OPEN));
                let l = (raw.len() - 1) as u32;
                for e in 0..ends {
                    if comp[e] == c {
                        label[e] = l;
                    }
                }
            };
            fresh(comp[0], raw, &mut label);
            if comp[2 * m] != comp[0] {
                fresh(comp[2 * m], raw, &mut label);
            }
        }
        Ok((0..traced.len())
            .map(|li| {
                let i = chord_loop.iter().position(|&x| x == li).unwrap();
                label[2 * i + 1]
            })
            .collect())
    }
}

/// Component id of every chord endpoint, chords and strands alternating.
fn strand_components(inner: &[usize], outer: &[usize]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; inner.len()];
    let mut next = 0;
    for start in 0..inner.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut x = start;
        loop {
            comp[x] = next;
            let y = inner[x];
            comp[y] = next;
            x = outer[y];
            if x == start {
                break;
            }
        }
        next += 1;
    }
    comp
}

impl ReebGraph {
    pub fn build(field: &TorusField) -> Result<Self> {
        let grid = *field.grid();
        let nv = grid.vertex_count();
        let order = field.sorted_vertices();
        let mut rank = vec![0usize; nv];
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }

        let mut below = vec![false; nv];
        let mut edge_label = vec![OPEN; grid.edge_count()];
        let mut stamp = vec![usize::MAX; grid.edge_count()];
        let mut tri_label = vec![OPEN; grid.triangle_count()];
        let mut log: Vec<(u32, u32, u32)> = Vec::with_capacity(grid.triangle_count() * 3 / 2);
        // Raw edges: (start node, end node).
        let mut raw: Vec<(u32, u32)> = Vec::new();
        let mut node_vertex: Vec<usize> = Vec::new();
        let mut elem: Vec<Element> = vec![Element::Node(0); nv];
        let mut loop_edges = Vec::new();
        let mut loop_tris = Vec::new();

        for (pos, &v) in order.iter().enumerate() {
            let nbrs = LINK.map(|off| grid.neighbor(v, off));
            let lower = nbrs.map(|w| below[w]);
            let n_lower = lower.iter().filter(|&&b| b).count();
            let changes = (0..6).filter(|&k| lower[k] != lower[(k + 1) % 6]).count();
            let regular = n_lower > 0 && n_lower < 6 && changes == 2;

            if regular {
                let k = lower.iter().position(|&b| b).unwrap();
                let label = edge_label[grid.edge_to(v, LINK[k])];
                below[v] = true;
                for k in 0..6 {
                    if !lower[k] {
                        edge_label[grid.edge_to(v, LINK[k])] = label;
                    }
                }
                for t in grid.star(v) {
                    let mixed = grid.triangle_vertices(t).iter().any(|&w| !below[w]);
                    if mixed && tri_label[t] != label {
                        tri_label[t] = label;
                        log.push((t as u32, pos as u32, label));
                    }
                }
                elem[v] = Element::Edge(label as usize);
                continue;
            }

            below[v] = true;
            let mut traced: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
            for k in 0..6 {
                if lower[k] {
                    continue;
                }
                let start = grid.edge_to(v, LINK[k]);
                if stamp[start] == pos {
                    continue;
                }
                loop_edges.clear();
                loop_tris.clear();
                trace_level_loop(&grid, &below, start, &mut loop_edges, &mut loop_tris);
                for &e in &loop_edges {
                    stamp[e] = pos;
                }
                traced.push((loop_edges.clone(), loop_tris.clone()));
            }

            let first_node = node_vertex.len();
            let labels = if changes >= 6 {
                let saddle = MultiSaddle { grid: &grid, v, nbrs, lower };
                saddle.unfold(&edge_label, &traced, &mut raw, &mut node_vertex)?
            } else {
                let node = first_node as u32;
                node_vertex.push(v);
                for k in 0..6 {
                    if lower[k] {
                        let label = edge_label[grid.edge_to(v, LINK[k])] as usize;
                        if raw[label].1 == OPEN {
                            raw[label].1 = node;
                        }
                    }
                }
                traced
                    .iter()
                    .map(|_| {
                        raw.push((node, OPEN));
                        (raw.len() - 1) as u32
                    })
                    .collect()
            };
            elem[v] = Element::Node(first_node);
            for ((edges, tris), &label) in traced.iter().zip(&labels) {
                for &e in edges {
                    edge_label[e] = label;
                }
                for &t in tris {
                    tri_label[t] = label;
                    log.push((t as u32, pos as u32, label));
                }
            }
        }
        if raw.iter().any(|r| r.1 == OPEN) {
            return Err(Error::Topology("sweep left an open Reeb edge".into()));
        }

        let raw_pieces = collect_pieces(field, &order, &rank, log);
        Self::assemble(field, node_vertex, raw, raw_pieces, elem)
    }

    /// Smooths degree-2 nodes, renumbers, and checks the first Betti number.
    fn assemble(
        field: &TorusField,
        node_vertex: Vec<usize>,
        raw: Vec<(u32, u32)>,
        raw_pieces: Vec<Piece>,
        elem: Vec<Element>,
    ) -> Result<Self> {
        let grid = *field.grid();
        let mut degree = vec![0usize; node_vertex.len()];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); node_vertex.len()];
        for (e, &(a, b)) in raw.iter().enumerate() {
            for x in [a as usize, b as usize] {
                degree[x] += 1;
                incident[x].push(e);
            }
        }
        let smoothed: Vec<bool> = (0..node_vertex.len())
            .map(|x| degree[x] == 2 && incident[x][0] != incident[x][1])
            .collect();
        let mut uf = UnionFind::new(raw.len());
        for x in 0..node_vertex.len() {
            if smoothed[x] {
                uf.union(incident[x][0], incident[x][1]);
            }
        }

        let mut node_id = vec![usize::MAX; node_vertex.len()];
        let mut nodes = Vec::new();
        for (x, &v) in node_vertex.iter().enumerate() {
            if !smoothed[x] {
                node_id[x] = nodes.len();
                nodes.push(ReebNode { id: nodes.len(), vertex: v, value: field.value(v), degree: 0 });
            }
        }
        let mut edge_id = vec![usize::MAX; raw.len()];
        let mut ends: Vec<Vec<usize>> = Vec::new();
        for e in 0..raw.len() {
            let r = uf.find(e);
            if edge_id[r] == usize::MAX {
                edge_id[r] = ends.len();
                ends.push(Vec::new());
            }
            edge_id[e] = edge_id[r];
            for x in [raw[e].0 as usize, raw[e].1 as usize] {
                if !smoothed[x] {
                    ends[edge_id[e]].push(node_id[x]);
                }
            }
        }
        let mut edges = Vec::with_capacity(ends.len());
        for (id, mut end) in ends.into_iter().enumerate() {
            if end.len() != 2 {
                return Err(Error::Topology(format!("edge {id} has {} free ends", end.len())));
            }
            end.sort_by(|&a, &b| field.compare(nodes[a].vertex, nodes[b].vertex));
            for &x in &end {
                nodes[x].degree += 1;
            }
            edges.push(ReebEdge {
                id,
                endpoints: [end[0], end[1]],
                value_interval: [nodes[end[0]].value, nodes[end[1]].value],
                measure: 0.0,
                integral: 0.0,
            });
        }

        let mut pieces = raw_pieces;
        for p in &mut pieces {
            p.edge = edge_id[p.edge];
            edges[p.edge].measure += p.area;
            edges[p.edge].integral += p.integral;
        }
        let vertex_element = elem
            .into_iter()
            .map(|el| match el {
                Element::Node(x) if smoothed[x] => Element::Edge(edge_id[incident[x][0]]),
                Element::Node(x) => Element::Node(node_id[x]),
                Element::Edge(e) => Element::Edge(edge_id[e]),
            })
            .collect();

        let graph = ReebGraph { grid, nodes, edges, pieces, vertex_element };
        let betti = graph.betti_number();
        if betti != 1 {
            return Err(Error::Topology(format!("Reeb graph has first Betti number {betti}")));
        }
        Ok(graph)
    }

    /// `E − V + (number of components)`.
    pub fn betti_number(&self) -> i64 {
        let mut uf = UnionFind::new(self.nodes.len());
        let mut components = self.nodes.len() as i64;
        for e in &self.edges {
            if uf.union(e.endpoints[0], e.endpoints[1]) {
                components -= 1;
            }
        }
        self.edges.len() as i64 - self.nodes.len() as i64 + components
    }

    pub fn total_measure(&self) -> f64 {
        self.edges.iter().map(|e| e.measure).sum()
    }

    /// Reeb edges whose open value interval contains `t`.
    pub fn edges_at(&self, t: f64) -> usize {
        self.edges
            .iter()
            .filter(|e| e.value_interval[0] < t && t < e.value_interval[1])
            .count()
    }

    pub fn node_kind(&self, field: &TorusField, id: usize) -> Option<CriticalKind> {
        field.classify_vertex(self.nodes[id].vertex)
    }

    /// Strips leaves until only the unique cycle `Γ` is left; every stripped
    /// component is a tree hanging off one cycle node.
    pub fn decompose(&self) -> Result<CycleTreeDecomposition> {
        let nn = self.nodes.len();
        let mut degree: Vec<usize> = self.nodes.iter().map(|x| x.degree).collect();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nn];
        for e in &self.edges {
            incident[e.endpoints[0]].push(e.id);
            incident[e.endpoints[1]].push(e.id);
        }
        let mut node_gone = vec![false; nn];
        let mut edge_gone = vec![false; self.edges.len()];
        let mut stack: Vec<usize> = (0..nn).filter(|&x| degree[x] == 1).collect();
        while let Some(x) = stack.pop() {
            if node_gone[x] || degree[x] != 1 {
                continue;
            }
            let e = *incident[x].iter().find(|&&e| !edge_gone[e]).unwrap();
            node_gone[x] = true;
            edge_gone[e] = true;
            degree[x] = 0;
            let [a, b] = self.edges[e].endpoints;
            let y = if a == x { b } else { a };
            degree[y] -= 1;
            if degree[y] == 1 {
                stack.push(y);
            }
        }

        let cycle_nodes: Vec<usize> = (0..nn).filter(|&x| !node_gone[x]).collect();
        let cycle_edges: Vec<usize> = (0..self.edges.len()).filter(|&e| !edge_gone[e]).collect();
        if cycle_nodes.is_empty()
            || cycle_nodes.len() != cycle_edges.len()
            || cycle_nodes.iter().any(|&x| degree[x] != 2)
        {
            return Err(Error::Topology("residue after stripping leaves is not a cycle".into()));
        }
        let mut uf = UnionFind::new(nn);
        for &e in &cycle_edges {
            uf.union(self.edges[e].endpoints[0], self.edges[e].endpoints[1]);
        }
        let root = uf.find(cycle_nodes[0]);
        if cycle_nodes.iter().any(|&x| uf.find(x) != root) {
            return Err(Error::Topology("residue after stripping leaves is disconnected".into()));
        }

        // Group stripped pieces by the cycle node they hang from.
        let mut uf = UnionFind::new(nn);
        for e in (0..self.edges.len()).filter(|&e| edge_gone[e]) {
            uf.union(self.edges[e].endpoints[0], self.edges[e].endpoints[1]);
        }
        let mut attach_of_root = vec![usize::MAX; nn];
        for &x in &cycle_nodes {
            attach_of_root[uf.find(x)] = x;
        }
        let mut tree_of_attach = vec![usize::MAX; nn];
        let mut trees_raw: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
        let mut tree_slot = |x: usize, uf: &mut UnionFind| {
            let a = attach_of_root[uf.find(x)];
            if tree_of_attach[a] == usize::MAX {
                tree_of_attach[a] = trees_raw.len();
                trees_raw.push((a, Vec::new(), Vec::new()));
            }
            tree_of_attach[a]
        };
        let mut edge_tree = vec![usize::MAX; self.edges.len()];
        let mut node_tree = vec![usize::MAX; nn];
        for e in (0..self.edges.len()).filter(|&e| edge_gone[e]) {
            let k = tree_slot(self.edges[e].endpoints[0], &mut uf);
            edge_tree[e] = k;
        }
        for x in (0..nn).filter(|&x| node_gone[x]) {
            let k = tree_slot(x, &mut uf);
            node_tree[x] = k;
        }
        for e in 0..self.edges.len() {
            if edge_tree[e] != usize::MAX {
                trees_raw[edge_tree[e]].1.push(e);
            }
        }
        for x in 0..nn {
            if node_tree[x] != usize::MAX {
                trees_raw[node_tree[x]].2.push(x);
            }
        }

        let tree_of_vertex = |el: &Element| match *el {
            Element::Edge(e) => edge_tree[e],
            Element::Node(x) => node_tree[x],
        };
        let mut trees: Vec<Tree> = trees_raw
            .into_iter()
            .enumerate()
            .map(|(k, (attachment, edges, nodes))| {
                let inside = self.vertex_element.iter().map(|el| tree_of_vertex(el) == k).collect();
                Tree {
                    attachment,
                    alpha: self.nodes[attachment].value,
                    region_measure: edges.iter().map(|&e| self.edges[e].measure).sum(),
                    region_integral: edges.iter().map(|&e| self.edges[e].integral).sum(),
                    edges,
                    nodes,
                    region: SubSurface::from_vertex_set(self.grid, inside),
                }
            })
            .collect();
        trees.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.attachment.cmp(&b.attachment)));

        let on_cycle = self.vertex_element.iter().map(|el| tree_of_vertex(el) == usize::MAX).collect();
        Ok(CycleTreeDecomposition {
            cycle_measure: cycle_edges.iter().map(|&e| self.edges[e].measure).sum(),
            cycle_edges,
            cycle_nodes,
            trees,
            cycle_region: SubSurface::from_vertex_set(self.grid, on_cycle),
        })
    }

    pub fn to_json(&self, decomposition: Option<&CycleTreeDecomposition>) -> ReebGraphJson {
        ReebGraphJson {
            nodes: self
                .nodes
                .iter()
                .map(|x| NodeJson { id: x.id, value: x.value, degree: x.degree })
                .collect(),
            edges: self.edges.clone(),
            cycle: decomposition.map(|d| d.cycle_edges.clone()).unwrap_or_default(),
            trees: decomposition
                .map(|d| {
                    d.trees
                        .iter()
                        .map(|t| TreeJson {
                            attachment_node: t.attachment,
                            alpha: t.alpha,
                            edges: t.edges.clone(),
                            region_measure: t.region_measure,
                        })
                        .collect()
                })
                .unwrap_or_default(),
        }
    }
}

/// Turns the per-triangle label log into value bands.
fn collect_pieces(
    field: &TorusField,
    order: &[usize],
    rank: &[usize],
    mut log: Vec<(u32, u32, u32)>,
) -> Vec<Piece> {
    let grid = field.grid();
    let scale = 1.0 / grid.vertex_count() as f64;
    log.sort_by_key(|&(t, pos, _)| (t, pos));
    // Later entries at the same position win.
    log.dedup_by(|later, earlier| {
        if later.0 == earlier.0 && later.1 == earlier.1 {
            earlier.2 = later.2;
            true
        } else {
            false
        }
    });
    let mut pieces = Vec::with_capacity(log.len());
    let mut k = 0;
    while k < log.len() {
        let t = log[k].0 as usize;
        let mut end = k;
        while end < log.len() && log[end].0 as usize == t {
            end += 1;
        }
        let corners = field.triangle_corners(t);
        let verts = grid.triangle_vertices(t);
        let top = verts.iter().map(|&v| rank[v]).max().unwrap();
        // A flat triangle has no value bands; split it by the perturbation.
        let flat = corners[0].h == corners[1].h && corners[1].h == corners[2].h;
        let mut ranked = corners;
        for (c, &v) in ranked.iter_mut().zip(&verts) {
            c.h = rank[v] as f64;
        }
        for m in k..end {
            let (_, pos, label) = log[m];
            let stop = if m + 1 < end { log[m + 1].1 as usize } else { top };
            let lo = field.value(order[pos as usize]);
            let hi = field.value(order[stop]);
            let (area, integral) = if flat {
                let area = band(&ranked, pos as f64, stop as f64).0;
                (area, area * corners[0].h)
            } else {
                band(&corners, lo, hi)
            };
            if area > 0.0 {
                pieces.push(Piece {
                    triangle: t,
                    edge: label as usize,
                    lo,
                    hi,
                    area: area * scale,
                    integral: integral * scale,
                });
            }
        }
        k = end;
    }
    pieces
}

/// Precomputed `t ↦ |{H ≤ t} ∩ π⁻¹(E)|` for a set `E` of Reeb edges.
#[derive(Debug, Clone)]
pub struct SublevelProfile {
    by_lo: Vec<Piece>,
    his: Vec<f64>,
    prefix: Vec<f64>,
}

impl SublevelProfile {
    pub fn new(graph: &ReebGraph, edges: &[usize]) -> Self {
        let mut mask = vec![false; graph.edges.len()];
        for &e in edges {
            mask[e] = true;
        }
        let mut by_lo: Vec<Piece> = graph.pieces.iter().filter(|p| mask[p.edge]).copied().collect();
        let mut by_hi = by_lo.clone();
        by_lo.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        by_hi.sort_by(|a, b| a.hi.total_cmp(&b.hi));
        let mut prefix = Vec::with_capacity(by_hi.len() + 1);
        prefix.push(0.0);
        for p in &by_hi {
            prefix.push(prefix.last().unwrap() + p.area);
        }
        Self { his: by_hi.iter().map(|p| p.hi).collect(), by_lo, prefix }
    }

    pub fn measure_below(&self, field: &TorusField, t: f64) -> f64 {
        let full = self.his.partition_point(|&h| h <= t);
        let mut total = self.prefix[full];
        let scale = 1.0 / field.grid().vertex_count() as f64;
        for p in self.by_lo.iter().take_while(|p| p.lo < t) {
            if p.hi > t {
                total += band(&field.triangle_corners(p.triangle), p.lo, t).0 * scale;
            }
        }
        total
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeJson {
    pub id: usize,
    pub value: f64,
    pub degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeJson {
    pub attachment_node: usize,
    pub alpha: f64,
    pub edges: Vec<usize>,
    pub region_measure: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReebGraphJson {
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<ReebEdge>,
    pub cycle: Vec<usize>,
    pub trees: Vec<TreeJson>,
}

#[cfg(test)]
mod tests;
