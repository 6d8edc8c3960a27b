//! Conformal deformations e^{-eps b} of the quasihyperbolic metric.
//!
//! Given a Busemann function b, the density rho(v) = exp(-eps b(v)) rescales
//! every edge, turning the unbounded quasihyperbolic geometry into a bounded
//! one. The deformed boundary distance, measure, and re-quasihyperbolized
//! metric are what the uniformization checks downstream consume.

use std::sync::Arc;

use crate::geometry::Point;
use crate::graph::{MetricGraph, Path};
use crate::gromov::BusemannField;
use crate::qhyp::check_depth;
use crate::{Error, Result};

#[derive(Clone)]
pub struct DeformedGraph {
    base: Arc<MetricGraph>,
    eps: f64,
    rho: Vec<f64>,
    d_eps: Vec<f64>,
}

/// Builds the deformation at scale eps from a Busemann field.
///
/// d_eps is a multi-source Dijkstra over the deformed weights, seeded at
/// every vertex within three cells of the boundary. The seed value is the
/// deformed length of the remaining descent, rho(w)/eps: along a ray where
/// b grows at unit speed the tail integrates exp(-eps t) exactly.
pub fn deform(field: &BusemannField, eps: f64) -> Result<DeformedGraph> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::DegenerateParams(format!("deformation scale eps in (0,1], got {eps}")));
    }
    let g = field.graph();
    let rho: Vec<f64> = field.values().iter().map(|&b| (-eps * b).exp()).collect();
    let shallow_limit = 3.0 * g.h();
    let sources: Vec<(u32, f64)> = (0..g.vertex_count() as u32)
        .filter(|&v| g.depth(v) <= shallow_limit && rho[v as usize] > 0.0)
        .map(|v| (v, rho[v as usize] / eps))
        .collect();
    if sources.is_empty() {
        return Err(Error::NoProxy(f64::INFINITY));
    }
    let (d_eps, _) =
        g.dijkstra_generic(&sources, None, |u, e| e.qh * 0.5 * (rho[u as usize] + rho[e.to as usize]));
    Ok(DeformedGraph { base: Arc::clone(g), eps, rho, d_eps })
}

impl DeformedGraph {
    pub fn base(&self) -> &Arc<MetricGraph> {
        &self.base
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn rho(&self, v: u32) -> f64 {
        self.rho[v as usize]
    }

    pub fn rho_values(&self) -> &[f64] {
        &self.rho
    }

    /// Deformed distance from v to the boundary.
    pub fn d_eps(&self, v: u32) -> f64 {
        self.d_eps[v as usize]
    }

    pub fn d_eps_values(&self) -> &[f64] {
        &self.d_eps
    }

    pub(crate) fn edge_len(&self, u: u32, e: &crate::graph::Edge) -> f64 {
        e.qh * 0.5 * (self.rho[u as usize] + self.rho[e.to as usize])
    }

    /// Deformed length of the quasihyperbolically shortest edgewise route;
    /// an upper bound for and in practice indistinguishable from the
    /// deformed distance, but we minimize the deformed weight directly.
    pub fn distance_vertices(&self, a: u32, b: u32) -> Result<f64> {
        if self.base.component(a) != self.base.component(b) {
            return Err(Error::Disconnected(self.base.component(a), self.base.component(b)));
        }
        let (dist, _) =
            self.base.dijkstra_generic(&[(a, 0.0)], Some(b), |u, e| self.edge_len(u, e));
        Ok(dist[b as usize])
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        check_depth(&self.base, a)?;
        check_depth(&self.base, b)?;
        self.distance_vertices(self.base.snap(a)?.0, self.base.snap(b)?.0)
    }

    pub fn shortest_path(&self, a: &Point, b: &Point) -> Result<Path> {
        check_depth(&self.base, a)?;
        check_depth(&self.base, b)?;
        let (sa, ra) = self.base.snap(a)?;
        let (sb, rb) = self.base.snap(b)?;
        if self.base.component(sa) != self.base.component(sb) {
            return Err(Error::Disconnected(self.base.component(sa), self.base.component(sb)));
        }
        let (dist, pred) =
            self.base.dijkstra_generic(&[(sa, 0.0)], Some(sb), |u, e| self.edge_len(u, e));
        let mut path = self.base.trace_path(&pred, sa, sb, dist[sb as usize]);
        path.snap = [ra, rb];
        Ok(path)
    }

    /// Quasihyperbolic distance of the deformed space: deformed edge length
    /// divided by the deformed boundary distance, trapezoid style.
    pub fn quasihyperbolized_vertices(&self, a: u32, b: u32) -> Result<f64> {
        if self.base.component(a) != self.base.component(b) {
            return Err(Error::Disconnected(self.base.component(a), self.base.component(b)));
        }
        let (dist, _) = self.base.dijkstra_generic(&[(a, 0.0)], Some(b), |u, e| {
            self.edge_len(u, e)
                * 0.5
                * (1.0 / self.d_eps[u as usize] + 1.0 / self.d_eps[e.to as usize])
        });
        Ok(dist[b as usize])
    }

    pub fn quasihyperbolized(&self, a: &Point, b: &Point) -> Result<f64> {
        check_depth(&self.base, a)?;
        check_depth(&self.base, b)?;
        self.quasihyperbolized_vertices(self.base.snap(a)?.0, self.base.snap(b)?.0)
    }

    /// Deformed measure of a region: sum of (rho/d)^n h^n over its vertices.
    pub fn measure_where(&self, pred: impl Fn(&Point) -> bool) -> f64 {
        let n = self.base.dim() as i32;
        let hn = self.base.h().powi(n);
        let mut total = 0.0;
        for v in 0..self.base.vertex_count() {
            let p = self.base.point(v as u32);
            if pred(&p) {
                total += (self.rho[v] / self.base.depth(v as u32)).powi(n) * hn;
            }
        }
        total
    }

    pub fn total_measure(&self) -> f64 {
        self.measure_where(|_| true)
    }

    /// Deformed diameter proxy: the largest deformed boundary distance.
    pub fn max_d_eps(&self) -> f64 {
        self.d_eps.iter().cloned().fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let dim = self.base.dim();
        if dim == 2 {
            writeln!(out, "id,x,y,rho,d_eps")?;
        } else {
            writeln!(out, "id,x,y,z,rho,d_eps")?;
        }
        for v in 0..self.base.vertex_count() {
            let p = self.base.point(v as u32);
            let coords: Vec<String> = (0..dim).map(|i| format!("{:.12}", p.coord(i))).collect();
            writeln!(out, "{v},{},{:.12},{:.12}", coords.join(","), self.rho[v], self.d_eps[v])?;
        }
        Ok(())
    }
}
