//! Weighted grid graphs over a domain window. Vertices are lattice points at
//! pitch h with boundary clearance d(v) >= h/2; edges follow a fixed stencil
//! and carry both their Euclidean length and the trapezoid weight
//! len * (1/d(u) + 1/d(v)) / 2, which discretizes the line integral of 1/d.
//!
//! Shortest paths are exact Dijkstra runs with deterministic tie-breaking, so
//! identical inputs give byte-identical paths and distances.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::geometry::{Domain, Point};
use crate::{Error, Result};

pub const VERTEX_BUDGET: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    /// 2-D, axis and diagonal steps.
    S8,
    /// 2-D, S8 plus knight steps; direction error stays under ~3%.
    S16,
    /// 3-D, the full unit cube neighborhood.
    S26,
}

impl Stencil {
    pub fn default_for(dim: usize) -> Stencil {
        if dim == 3 {
            Stencil::S26
        } else {
            Stencil::S16
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Stencil::S8 => "8",
            Stencil::S16 => "16",
            Stencil::S26 => "26",
        }
    }

    pub fn parse(s: &str) -> Result<Stencil> {
        match s {
            "8" => Ok(Stencil::S8),
            "16" => Ok(Stencil::S16),
            "26" => Ok(Stencil::S26),
            other => Err(Error::DegenerateParams(format!("stencil `{other}` (use 8, 16 or 26)"))),
        }
    }

    fn dim(&self) -> usize {
        if *self == Stencil::S26 {
            3
        } else {
            2
        }
    }

    /// One representative per undirected edge direction.
    fn half_offsets(&self) -> Vec<[i64; 3]> {
        match self {
            Stencil::S8 => vec![[1, 0, 0], [0, 1, 0], [1, 1, 0], [1, -1, 0]],
            Stencil::S16 => vec![
                [1, 0, 0],
                [0, 1, 0],
                [1, 1, 0],
                [1, -1, 0],
                [1, 2, 0],
                [2, 1, 0],
                [2, -1, 0],
                [1, -2, 0],
            ],
            Stencil::S26 => {
                let mut out = Vec::with_capacity(13);
                for a in -1i64..=1 {
                    for b in -1i64..=1 {
                        for c in -1i64..=1 {
                            let v = [a, b, c];
                            let lex_positive = match v.iter().find(|x| **x != 0) {
                                Some(x) => *x > 0,
                                None => false,
                            };
                            if lex_positive {
                                out.push(v);
                            }
                        }
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Weighting {
    Euclid,
    Qh,
}

#[derive(Clone, Copy)]
pub(crate) struct Edge {
    pub to: u32,
    pub elen: f64,
    pub qh: f64,
}

/// Immutable discretization of a domain window.
pub struct MetricGraph {
    dom: Domain,
    h: f64,
    stencil: Stencil,
    lo: Point,
    pub(crate) verts: Vec<Point>,
    pub(crate) d: Vec<f64>,
    pub(crate) adj_off: Vec<usize>,
    pub(crate) edges: Vec<Edge>,
    comp: Vec<u32>,
    n_comp: usize,
    index: HashMap<[i64; 3], u32>,
}

pub fn build_graph(dom: &Domain, h: f64, stencil: Stencil) -> Result<MetricGraph> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::DegenerateParams(format!("lattice pitch h = {h}")));
    }
    if stencil.dim() != dom.dim() {
        return Err(Error::DegenerateParams(format!(
            "stencil {} is {}-dimensional, domain is {}-dimensional",
            stencil.name(),
            stencil.dim(),
            dom.dim()
        )));
    }
    let dim = dom.dim();
    let lo = dom.window().lo();
    let mut n_cells = [1i64; 3];
    let mut total: u64 = 1;
    for axis in 0..dim {
        n_cells[axis] = (dom.window().extent(axis) / h + 1e-9).floor() as i64 + 1;
        total = total.saturating_mul(n_cells[axis] as u64);
    }
    if total > VERTEX_BUDGET {
        return Err(Error::BudgetExceeded { got: total, budget: VERTEX_BUDGET });
    }

    let mut verts = Vec::new();
    let mut d = Vec::new();
    let mut index = HashMap::new();
    let probe = |cell: [i64; 3]| -> Point {
        let mut c = [0.0; 3];
        for axis in 0..dim {
            c[axis] = lo.coord(axis) + cell[axis] as f64 * h;
        }
        Point::from_slice(&c[..dim]).expect("dim checked")
    };
    for i in 0..n_cells[0] {
        for j in 0..n_cells[1] {
            for k in 0..n_cells[2] {
                let cell = [i, j, k];
                let p = probe(cell);
                if !dom.contains(&p) {
                    continue;
                }
                let dist = dom.dist_boundary_unchecked(&p);
                if dist < 0.5 * h {
                    continue;
                }
                index.insert(cell, verts.len() as u32);
                verts.push(p);
                d.push(dist);
            }
        }
    }
    if verts.is_empty() {
        return Err(Error::EmptyVertexSet);
    }

    // One admissibility test per undirected edge. Midpoint containment alone
    // leaks: a diagonal can cross a slit or a cusp wall transversally with the
    // midpoint a rounding error inside G, so the midpoint must also keep the
    // same half-cell clearance the endpoints do.
    let min_mid = 0.5 * h * (1.0 - 1e-9);
    let offsets = stencil.half_offsets();
    let mut raw: Vec<(u32, u32, f64, f64)> = Vec::new();
    for (cell, &u) in &index {
        for off in &offsets {
            let ncell = [cell[0] + off[0], cell[1] + off[1], cell[2] + off[2]];
            let Some(&v) = index.get(&ncell) else { continue };
            let (pu, pv) = (verts[u as usize], verts[v as usize]);
            let mid = Point::lerp(&pu, &pv, 0.5);
            if !dom.contains(&mid) || dom.dist_boundary_unchecked(&mid) < min_mid {
                continue;
            }
            let elen = pu.dist(&pv);
            let qh = elen * 0.5 * (1.0 / d[u as usize] + 1.0 / d[v as usize]);
            raw.push((u, v, elen, qh));
        }
    }

    let n = verts.len();
    let mut deg = vec![0usize; n];
    for &(u, v, _, _) in &raw {
        deg[u as usize] += 1;
        deg[v as usize] += 1;
    }
    let mut adj_off = vec![0usize; n + 1];
    for i in 0..n {
        adj_off[i + 1] = adj_off[i] + deg[i];
    }
    let mut edges = vec![Edge { to: 0, elen: 0.0, qh: 0.0 }; adj_off[n]];
    let mut cursor = adj_off.clone();
    for &(u, v, elen, qh) in &raw {
        edges[cursor[u as usize]] = Edge { to: v, elen, qh };
        cursor[u as usize] += 1;
        edges[cursor[v as usize]] = Edge { to: u, elen, qh };
        cursor[v as usize] += 1;
    }
    // sorted adjacency keeps every downstream iteration order canonical
    for i in 0..n {
        edges[adj_off[i]..adj_off[i + 1]].sort_by_key(|e| e.to);
    }

    let (comp, n_comp) = label_components(n, &adj_off, &edges);
    Ok(MetricGraph { dom: dom.clone(), h, stencil, lo, verts, d, adj_off, edges, comp, n_comp, index })
}

fn label_components(n: usize, adj_off: &[usize], edges: &[Edge]) -> (Vec<u32>, usize) {
    let mut comp = vec![u32::MAX; n];
    let mut n_comp = 0u32;
    let mut stack = Vec::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        comp[start] = n_comp;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for e in &edges[adj_off[u]..adj_off[u + 1]] {
                let v = e.to as usize;
                if comp[v] == u32::MAX {
                    comp[v] = n_comp;
                    stack.push(v);
                }
            }
        }
        n_comp += 1;
    }
    (comp, n_comp as usize)
}

/// A shortest path in a fixed graph: ordered vertex ids plus cached lengths.
#[derive(Clone, Debug)]
pub struct Path {
    pub verts: Vec<u32>,
    pub len_euclid: f64,
    pub len_qh: f64,
    /// Length under the weighting the path was optimized for.
    pub cost: f64,
    /// Euclidean diameter of the vertex set (exact pairwise maximum).
    pub diam_euclid: f64,
    /// How far each query endpoint moved when snapping to the lattice.
    pub snap: [f64; 2],
}

struct HeapState {
    cost: f64,
    node: u32,
}

impl PartialEq for HeapState {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.node == other.node
    }
}
impl Eq for HeapState {}
impl PartialOrd for HeapState {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapState {
    // reversed: BinaryHeap is a max-heap; ties break toward the smaller id
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl MetricGraph {
    pub fn domain(&self) -> &Domain {
        &self.dom
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn dim(&self) -> usize {
        self.dom.dim()
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn point(&self, v: u32) -> Point {
        self.verts[v as usize]
    }

    pub fn depth(&self, v: u32) -> f64 {
        self.d[v as usize]
    }

    pub fn points(&self) -> &[Point] {
        &self.verts
    }

    pub fn depths(&self) -> &[f64] {
        &self.d
    }

    pub fn component(&self, v: u32) -> u32 {
        self.comp[v as usize]
    }

    pub fn component_count(&self) -> usize {
        self.n_comp
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, f64, f64)> + '_ {
        self.edges[self.adj_off[v as usize]..self.adj_off[v as usize + 1]]
            .iter()
            .map(|e| (e.to, e.elen, e.qh))
    }

    /// Undirected edge list, each edge once with u < v.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (u32, u32, f64, f64)> + '_ {
        (0..self.verts.len() as u32).flat_map(move |u| {
            self.neighbors(u).filter(move |(v, _, _)| u < *v).map(move |(v, elen, qh)| (u, v, elen, qh))
        })
    }

    /// Nearest vertex to a point, searched over expanding lattice shells.
    /// Returns the vertex and the snap radius.
    pub fn snap(&self, p: &Point) -> Result<(u32, f64)> {
        if p.dim() != self.dim() {
            return Err(Error::DimMismatch { got: p.dim(), want: self.dim() });
        }
        let dim = self.dim();
        let mut cell = [0i64; 3];
        for axis in 0..dim {
            cell[axis] = ((p.coord(axis) - self.lo.coord(axis)) / self.h).round() as i64;
        }
        let mut best: Option<(u32, f64)> = None;
        let max_ring = 32i64;
        for ring in 0..=max_ring {
            if let Some((_, bd)) = best {
                // every point in this shell or beyond is at least (ring - 1/2) h away
                if bd <= (ring as f64 - 1.0) * self.h {
                    break;
                }
            }
            let kr = if dim == 3 { ring } else { 0 };
            for di in -ring..=ring {
                for dj in -ring..=ring {
                    for dk in -kr..=kr {
                        if di.abs().max(dj.abs()).max(dk.abs()) != ring {
                            continue;
                        }
                        if let Some(&v) = self.index.get(&[cell[0] + di, cell[1] + dj, cell[2] + dk]) {
                            let dist = self.verts[v as usize].dist(p);
                            if best.map_or(true, |(bv, bd)| dist < bd || (dist == bd && v < bv)) {
                                best = Some((v, dist));
                            }
                        }
                    }
                }
            }
        }
        best.ok_or(Error::SnapFailed(max_ring as f64 * self.h))
    }

    pub(crate) fn edge_weight(&self, e: &Edge, w: Weighting) -> f64 {
        match w {
            Weighting::Euclid => e.elen,
            Weighting::Qh => e.qh,
        }
    }

    /// Dijkstra with arbitrary per-edge weights and multiple seeded sources.
    /// `weight(u, edge)` must be nonnegative. Returns (dist, pred).
    pub(crate) fn dijkstra_generic<W>(
        &self,
        sources: &[(u32, f64)],
        target: Option<u32>,
        weight: W,
    ) -> (Vec<f64>, Vec<u32>)
    where
        W: Fn(u32, &Edge) -> f64,
    {
        let n = self.verts.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut done = vec![false; n];
        let mut heap = std::collections::BinaryHeap::new();
        for &(s, c) in sources {
            if c < dist[s as usize] {
                dist[s as usize] = c;
                heap.push(HeapState { cost: c, node: s });
            }
        }
        while let Some(HeapState { cost, node }) = heap.pop() {
            let u = node as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            if Some(node) == target {
                break;
            }
            for e in &self.edges[self.adj_off[u]..self.adj_off[u + 1]] {
                let v = e.to as usize;
                if done[v] {
                    continue;
                }
                let next = cost + weight(node, e);
                if next < dist[v] {
                    dist[v] = next;
                    pred[v] = node;
                    heap.push(HeapState { cost: next, node: e.to });
                }
            }
        }
        (dist, pred)
    }

    /// Distances from one vertex to every vertex under a stock weighting.
    pub fn distances_from(&self, source: u32, w: Weighting) -> Vec<f64> {
        self.dijkstra_generic(&[(source, 0.0)], None, |u, e| {
            let _ = u;
            self.edge_weight(e, w)
        })
        .0
    }

    /// Distances from a vertex set (all seeded at zero).
    pub fn distances_from_set(&self, set: &[u32], w: Weighting) -> Vec<f64> {
        let sources: Vec<(u32, f64)> = set.iter().map(|&v| (v, 0.0)).collect();
        self.dijkstra_generic(&sources, None, |_, e| self.edge_weight(e, w)).0
    }

    /// Distance matrix rows for a pool of vertices, assembled in parallel.
    pub fn pool_distances(&self, pool: &[u32], w: Weighting) -> Vec<Vec<f64>> {
        pool.par_iter().map(|&s| self.distances_from(s, w)).collect()
    }

    /// Walks predecessor pointers back from `sy` to `sx` and assembles a
    /// Path; `cost` is taken from the caller's distance array.
    pub(crate) fn trace_path(&self, pred: &[u32], sx: u32, sy: u32, cost: f64) -> Path {
        let mut verts = vec![sy];
        let mut cur = sy;
        while cur != sx {
            cur = pred[cur as usize];
            debug_assert_ne!(cur, u32::MAX, "target settled so the chain is complete");
            verts.push(cur);
        }
        verts.reverse();
        let (mut le, mut lq) = (0.0, 0.0);
        for w in verts.windows(2) {
            let (elen, qh) = self.edge_between(w[0], w[1]).expect("consecutive path vertices");
            le += elen;
            lq += qh;
        }
        Path {
            diam_euclid: self.point_set_diameter(&verts),
            cost,
            len_euclid: le,
            len_qh: lq,
            verts,
            snap: [0.0, 0.0],
        }
    }

    pub fn shortest_path_vertices(&self, sx: u32, sy: u32, w: Weighting) -> Result<Path> {
        let (ca, cb) = (self.comp[sx as usize], self.comp[sy as usize]);
        if ca != cb {
            return Err(Error::Disconnected(ca, cb));
        }
        let (dist, pred) = self.dijkstra_generic(&[(sx, 0.0)], Some(sy), |_, e| self.edge_weight(e, w));
        Ok(self.trace_path(&pred, sx, sy, dist[sy as usize]))
    }

    /// Snap both endpoints, then run an exact shortest path between them.
    pub fn shortest_path(&self, x: &Point, y: &Point, w: Weighting) -> Result<Path> {
        let (sx, rx) = self.snap(x)?;
        let (sy, ry) = self.snap(y)?;
        let mut path = self.shortest_path_vertices(sx, sy, w)?;
        path.snap = [rx, ry];
        Ok(path)
    }

    /// Inner (length) distance: Euclidean-weighted shortest path.
    pub fn inner_distance(&self, x: &Point, y: &Point) -> Result<f64> {
        Ok(self.shortest_path(x, y, Weighting::Euclid)?.len_euclid)
    }

    pub fn edge_between(&self, u: u32, v: u32) -> Option<(f64, f64)> {
        self.neighbors(u).find(|(t, _, _)| *t == v).map(|(_, elen, qh)| (elen, qh))
    }

    pub fn point_set_diameter(&self, verts: &[u32]) -> f64 {
        let mut best = 0.0f64;
        for (i, &a) in verts.iter().enumerate() {
            for &b in &verts[i + 1..] {
                best = best.max(self.verts[a as usize].dist(&self.verts[b as usize]));
            }
        }
        best
    }

    /// Vertices whose points satisfy a predicate, in id order.
    pub fn select_vertices(&self, pred: impl Fn(&Point) -> bool) -> Vec<u32> {
        (0..self.verts.len() as u32).filter(|&v| pred(&self.verts[v as usize])).collect()
    }

    /// BFS reachability from a to b through vertices allowed by the mask.
    pub fn connected_within(&self, a: u32, b: u32, allowed: impl Fn(u32) -> bool) -> bool {
        if !allowed(a) || !allowed(b) {
            return false;
        }
        let n = self.verts.len();
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[a as usize] = true;
        queue.push_back(a);
        while let Some(u) = queue.pop_front() {
            if u == b {
                return true;
            }
            for (v, _, _) in self.neighbors(u) {
                if !seen[v as usize] && allowed(v) {
                    seen[v as usize] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    /// Euclid-shortest path from a to b restricted to allowed vertices.
    /// Errors with Disconnected if the restriction separates the endpoints.
    pub fn restricted_path(&self, a: u32, b: u32, allowed: impl Fn(u32) -> bool) -> Result<Path> {
        if !allowed(a) || !allowed(b) {
            return Err(Error::Disconnected(self.comp[a as usize], self.comp[b as usize]));
        }
        let (dist, pred) = self.dijkstra_generic(&[(a, 0.0)], Some(b), |_, e| {
            if allowed(e.to) {
                e.elen
            } else {
                f64::INFINITY
            }
        });
        if !dist[b as usize].is_finite() {
            return Err(Error::Disconnected(self.comp[a as usize], self.comp[b as usize]));
        }
        Ok(self.trace_path(&pred, a, b, dist[b as usize]))
    }

    /// Component labels after deleting a vertex set; deleted vertices get
    /// u32::MAX. Returns (labels, component count).
    pub fn components_excluding(&self, removed: &[bool]) -> (Vec<u32>, usize) {
        let n = self.verts.len();
        assert_eq!(removed.len(), n);
        let mut comp = vec![u32::MAX; n];
        let mut n_comp = 0u32;
        let mut stack = Vec::new();
        for start in 0..n {
            if removed[start] || comp[start] != u32::MAX {
                continue;
            }
            comp[start] = n_comp;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for e in &self.edges[self.adj_off[u]..self.adj_off[u + 1]] {
                    let v = e.to as usize;
                    if !removed[v] && comp[v] == u32::MAX {
                        comp[v] = n_comp;
                        stack.push(v);
                    }
                }
            }
            n_comp += 1;
        }
        (comp, n_comp as usize)
    }

    pub fn write_vertices_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "id,{},d", (0..self.dim()).map(axis_name).collect::<Vec<_>>().join(","))?;
        for (i, p) in self.verts.iter().enumerate() {
            let coords =
                p.to_vec().iter().map(|c| format!("{c:.12}")).collect::<Vec<_>>().join(",");
            writeln!(out, "{i},{coords},{:.12}", self.d[i])?;
        }
        Ok(())
    }

    pub fn write_edges_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "u,v,euclid_len,qh_weight")?;
        for (u, v, elen, qh) in self.undirected_edges() {
            writeln!(out, "{u},{v},{elen:.12},{qh:.12}")?;
        }
        Ok(())
    }
}

fn axis_name(i: usize) -> String {
    ["x", "y", "z"][i].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;

    fn win2(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::new(Point::xy(x0, y0), Point::xy(x1, y1)).unwrap()
    }

    fn half_plane(h: f64, top: f64) -> MetricGraph {
        let dom = Domain::half_space(2, win2(-2.0, 0.0, 2.0, top)).unwrap();
        build_graph(&dom, h, Stencil::S16).unwrap()
    }

    /// Vertex admission must equal direct lattice enumeration with d >= h/2.
    #[test]
    fn half_plane_vertex_count_matches_enumeration() {
        let dom = Domain::half_space(2, win2(-2.0, 0.0, 2.0, 2.0)).unwrap();
        let g = build_graph(&dom, 0.1, Stencil::S8).unwrap();
        let mut count = 0;
        for i in 0..=40 {
            for j in 0..=20 {
                let p = Point::xy(-2.0 + 0.1 * i as f64, 0.1 * j as f64);
                if dom.contains(&p) && dom.dist_boundary(&p).unwrap() >= 0.05 {
                    count += 1;
                }
            }
        }
        assert_eq!(g.vertex_count(), count);
        assert_eq!(count, 41 * 20); // rows y = 0.1 .. 2.0
        assert_eq!(g.component_count(), 1);
    }

    /// In a convex domain no stencil edge between admitted vertices is lost.
    #[test]
    fn disk_admits_every_candidate_edge() {
        let dom = Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap();
        let g = build_graph(&dom, 0.1, Stencil::S16).unwrap();
        let full: Vec<[i64; 3]> = Stencil::S16
            .half_offsets()
            .iter()
            .flat_map(|o| [[o[0], o[1], 0], [-o[0], -o[1], 0]])
            .collect();
        for u in 0..g.vertex_count() as u32 {
            let p = g.point(u);
            let cell = [
                ((p.coord(0) + 1.0) / 0.1).round() as i64,
                ((p.coord(1) + 1.0) / 0.1).round() as i64,
                0,
            ];
            for off in &full {
                let ncell = [cell[0] + off[0], cell[1] + off[1], 0];
                if let Some(&v) = g.index.get(&ncell) {
                    assert!(
                        g.edge_between(u, v).is_some(),
                        "missing edge {u} -> {v} in a convex domain"
                    );
                }
            }
        }
    }

    /// Segment-vs-slit oracle: no surviving edge crosses { x >= 0, y = 0 }.
    #[test]
    fn slit_edges_never_cross_the_slit() {
        let dom = Domain::slit_plane(win2(-2.0, -2.0, 2.0, 2.0)).unwrap();
        let g = build_graph(&dom, 0.1, Stencil::S16).unwrap();
        let mut checked = 0;
        for (u, v, _, _) in g.undirected_edges() {
            let (a, b) = (g.point(u), g.point(v));
            let (ya, yb) = (a.coord(1), b.coord(1));
            if ya * yb < 0.0 {
                let t = ya / (ya - yb);
                let x_cross = a.coord(0) + t * (b.coord(0) - a.coord(0));
                assert!(x_cross < 0.0, "edge {a:?} - {b:?} crosses the slit at x = {x_cross}");
                checked += 1;
            }
        }
        assert!(checked > 0, "expected some edges through the left half-plane");
        assert_eq!(g.component_count(), 1); // bypass around the tip exists
    }

    #[test]
    fn slit_without_bypass_disconnects() {
        let dom = Domain::slit_plane(win2(0.5, -1.0, 3.0, 1.0)).unwrap();
        let g = build_graph(&dom, 0.1, Stencil::S16).unwrap();
        assert_eq!(g.component_count(), 2);
        let err = g.shortest_path(&Point::xy(1.0, 0.3), &Point::xy(1.0, -0.3), Weighting::Qh);
        assert!(matches!(err, Err(Error::Disconnected(_, _))));
    }

    /// Vertical pairs are resolved exactly by the lattice; the qh length of
    /// the column from height 1 to height 3 is log 3 up to trapezoid error.
    #[test]
    fn vertical_pair_matches_log3() {
        let g = half_plane(0.05, 3.5);
        let path = g.shortest_path(&Point::xy(0.0, 1.0), &Point::xy(0.0, 3.0), Weighting::Qh).unwrap();
        let expect = 3.0f64.ln();
        assert!(
            (path.cost - expect).abs() / expect < 0.02,
            "qh length {} vs log 3 = {expect}",
            path.cost
        );
        // the optimum is the straight column
        for w in path.verts.windows(2) {
            assert_eq!(g.point(w[0]).coord(0), 0.0);
            assert_eq!(g.point(w[1]).coord(0), 0.0);
        }
    }

    /// Successive refinement differences |k(h) - k(h/2)| shrink.
    #[test]
    fn refinement_differences_shrink() {
        let (x, y) = (Point::xy(0.0, 1.0), Point::xy(0.0, 3.0));
        let k: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| half_plane(h, 3.5).shortest_path(&x, &y, Weighting::Qh).unwrap().cost)
            .collect();
        let d01 = (k[0] - k[1]).abs();
        let d12 = (k[1] - k[2]).abs();
        assert!(d12 < d01, "differences {d01} then {d12} should shrink");
    }

    #[test]
    fn metric_axioms_hold_on_random_pairs() {
        let g = half_plane(0.1, 2.0);
        let pts = g.domain().sample_interior_filtered(30, 17, 0.3, 0.1).unwrap();
        let ids: Vec<u32> = pts.iter().map(|p| g.snap(p).unwrap().0).collect();
        let rows = g.pool_distances(&ids, Weighting::Qh);
        for (i, &a) in ids.iter().enumerate() {
            // identity
            assert_eq!(rows[i][a as usize], 0.0);
            for (j, &b) in ids.iter().enumerate() {
                // symmetry within float reassociation noise
                assert!(
                    (rows[i][b as usize] - rows[j][a as usize]).abs() < 1e-12,
                    "asymmetry at pair {i},{j}"
                );
                for &c in &ids {
                    assert!(
                        rows[i][c as usize] <= rows[i][b as usize] + rows[j][c as usize] + 1e-12,
                        "triangle violation"
                    );
                }
            }
        }
    }

    #[test]
    fn inner_distance_is_straight_in_a_disk() {
        let dom = Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap();
        let g = build_graph(&dom, 0.05, Stencil::S16).unwrap();
        let d = g.inner_distance(&Point::xy(-0.5, 0.0), &Point::xy(0.5, 0.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-12, "axis-aligned inner distance {d}");
        let diag = g.inner_distance(&Point::xy(-0.4, -0.4), &Point::xy(0.4, 0.4)).unwrap();
        assert!((diag - 0.8 * 2.0f64.sqrt()).abs() / (0.8 * 2.0f64.sqrt()) < 0.02);
    }

    /// Geodesic from (-1, .06) to (1, .06) sweeps a half-circle; its diameter
    /// is the endpoint separation, by brute-force pairwise maximum.
    #[test]
    fn semicircle_path_diameter() {
        let g = half_plane(0.02, 2.0);
        let path =
            g.shortest_path(&Point::xy(-1.0, 0.06), &Point::xy(1.0, 0.06), Weighting::Qh).unwrap();
        assert!((path.diam_euclid - 2.0).abs() <= 0.02, "diameter {}", path.diam_euclid);
        // the arc really does climb towards the center of the window
        let apex = path.verts.iter().map(|&v| g.point(v).coord(1)).fold(0.0, f64::max);
        assert!(apex > 0.5, "apex {apex}");
    }

    #[test]
    fn snapping_is_tight_and_guarded() {
        let g = half_plane(0.1, 2.0);
        let (v, r) = g.snap(&Point::xy(0.52, 0.77)).unwrap();
        assert!(r <= 0.1 * 0.5 * 2.0f64.sqrt() + 1e-12);
        let p = g.point(v);
        assert!((p.coord(0) - 0.5).abs() < 1e-9 && (p.coord(1) - 0.8).abs() < 1e-9);
        assert!(matches!(g.snap(&Point::xy(50.0, 50.0)), Err(Error::SnapFailed(_))));
    }

    #[test]
    fn budget_guard_trips_before_allocation() {
        let dom = Domain::half_space(2, win2(-2.0, 0.0, 2.0, 2.0)).unwrap();
        assert!(matches!(
            build_graph(&dom, 1e-5, Stencil::S16),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn csv_dumps_are_deterministic() {
        let g = half_plane(0.25, 2.0);
        let mut a = Vec::new();
        let mut b = Vec::new();
        g.write_vertices_csv(&mut a).unwrap();
        g.write_vertices_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("id,x,y,d\n"));
        let mut e = Vec::new();
        g.write_edges_csv(&mut e).unwrap();
        assert!(String::from_utf8(e).unwrap().starts_with("u,v,euclid_len,qh_weight\n"));
    }

    #[test]
    fn stencil_dim_mismatch_is_rejected() {
        let dom = Domain::half_space(2, win2(-1.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(build_graph(&dom, 0.1, Stencil::S26).is_err());
        assert!(build_graph(&dom, -0.1, Stencil::S16).is_err());
    }
}
