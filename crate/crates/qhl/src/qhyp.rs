//! Quasihyperbolic distance and geodesics.
//!
//! Grid values are trapezoid sums along shortest lattice paths. The closed
//! forms on the half-space and the punctured space are exact and calibrate
//! everything else in the crate.

use crate::geometry::{Domain, Point};
use crate::graph::{MetricGraph, Path, Weighting};
use crate::{Error, Result};

/// Queries closer to the boundary than this many cells are refused: the
/// trapezoid rule has no accuracy story inside the last few layers.
pub const MIN_DEPTH_CELLS: f64 = 3.0;

pub(crate) fn check_depth(g: &MetricGraph, p: &Point) -> Result<()> {
    if p.dim() != g.dim() {
        return Err(Error::DimMismatch { got: p.dim(), want: g.dim() });
    }
    let limit = MIN_DEPTH_CELLS * g.h();
    let d = g.domain().dist_boundary(p)?;
    if d < limit {
        return Err(Error::NearBoundary { d, limit });
    }
    Ok(())
}

/// acosh(1 + t) without cancellation for small t >= 0.
fn acosh1p(t: f64) -> f64 {
    (t + (t * (2.0 + t)).sqrt()).ln_1p()
}

/// Exact continuum quasihyperbolic distance, where one is known.
///
/// Half-space: arccosh of 1 + |x-y|^2 / (2 x_n y_n). Punctured space: the
/// metric is a cylinder over the unit sphere after r -> log r, so the
/// distance is the hypotenuse of the angle and the log of the radius ratio.
/// Everything else returns None.
pub fn closed_form_qh(dom: &Domain, a: &Point, b: &Point) -> Option<f64> {
    if a.dim() != dom.dim() || b.dim() != dom.dim() {
        return None;
    }
    match dom.kind_name() {
        "half_space" => {
            let n = dom.dim() - 1;
            let (ha, hb) = (a.coord(n), b.coord(n));
            if ha <= 0.0 || hb <= 0.0 {
                return None;
            }
            Some(acosh1p(a.dist(b).powi(2) / (2.0 * ha * hb)))
        }
        "punctured_space" => {
            let (ra, rb) = (a.norm(), b.norm());
            if ra == 0.0 || rb == 0.0 {
                return None;
            }
            let theta = a.angle_between(b);
            Some((theta * theta + (ra / rb).ln().powi(2)).sqrt())
        }
        _ => None,
    }
}

/// Grid quasihyperbolic distance between two interior points.
pub fn qh_distance(g: &MetricGraph, a: &Point, b: &Point) -> Result<f64> {
    check_depth(g, a)?;
    check_depth(g, b)?;
    let (sa, _) = g.snap(a)?;
    let (sb, _) = g.snap(b)?;
    qh_distance_vertices(g, sa, sb)
}

/// Same, between vertices that are already on the lattice.
pub fn qh_distance_vertices(g: &MetricGraph, sa: u32, sb: u32) -> Result<f64> {
    if g.component(sa) != g.component(sb) {
        return Err(Error::Disconnected(g.component(sa), g.component(sb)));
    }
    let (dist, _) = g.dijkstra_generic(&[(sa, 0.0)], Some(sb), |_, e| g.edge_weight(e, Weighting::Qh));
    Ok(dist[sb as usize])
}

/// A grid quasihyperbolic geodesic with a cumulative-length parametrization.
#[derive(Clone, Debug)]
pub struct QhGeodesic {
    pub path: Path,
    points: Vec<Point>,
    cum_qh: Vec<f64>,
}

impl QhGeodesic {
    pub(crate) fn from_path(g: &MetricGraph, path: Path) -> QhGeodesic {
        let points: Vec<Point> = path.verts.iter().map(|&v| g.point(v)).collect();
        let mut cum_qh = Vec::with_capacity(path.verts.len());
        cum_qh.push(0.0);
        for w in path.verts.windows(2) {
            let (_, qh) = g.edge_between(w[0], w[1]).expect("consecutive path vertices");
            cum_qh.push(cum_qh.last().unwrap() + qh);
        }
        QhGeodesic { path, points, cum_qh }
    }

    pub fn len_qh(&self) -> f64 {
        self.path.len_qh
    }

    pub fn len_euclid(&self) -> f64 {
        self.path.len_euclid
    }

    pub fn diam_euclid(&self) -> f64 {
        self.path.diam_euclid
    }

    pub fn vertices(&self) -> &[u32] {
        &self.path.verts
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Cumulative quasihyperbolic length at each vertex, starting at zero.
    pub fn cum_qh(&self) -> &[f64] {
        &self.cum_qh
    }

    /// Point at quasihyperbolic arclength s from the start, interpolated
    /// linearly inside a cell. s is clamped to the path.
    pub fn point_at_qh(&self, s: f64) -> Point {
        let total = *self.cum_qh.last().unwrap();
        let s = s.clamp(0.0, total);
        let i = match self.cum_qh.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.points[i],
            Err(i) => i - 1,
        };
        let span = self.cum_qh[i + 1] - self.cum_qh[i];
        Point::lerp(&self.points[i], &self.points[i + 1], (s - self.cum_qh[i]) / span)
    }

    pub fn min_depth(&self, g: &MetricGraph) -> f64 {
        self.path.verts.iter().map(|&v| g.depth(v)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_depth(&self, g: &MetricGraph) -> f64 {
        self.path.verts.iter().map(|&v| g.depth(v)).fold(0.0, f64::max)
    }
}

/// Grid quasihyperbolic geodesic between two interior points.
pub fn qh_geodesic(g: &MetricGraph, a: &Point, b: &Point) -> Result<QhGeodesic> {
    check_depth(g, a)?;
    check_depth(g, b)?;
    let path = g.shortest_path(a, b, Weighting::Qh)?;
    Ok(QhGeodesic::from_path(g, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Window};
    use crate::graph::{build_graph, Stencil};

    fn window(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::new(Point::xy(x0, y0), Point::xy(x1, y1)).unwrap()
    }

    fn half_plane(h: f64) -> MetricGraph {
        let dom = Domain::half_space(2, window(-2.0, 0.0, 2.0, 2.0)).unwrap();
        build_graph(&dom, h, Stencil::S16).unwrap()
    }

    fn median(v: &mut Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    }

    #[test]
    fn acosh_shifted_is_stable_near_zero() {
        let t = 1e-12;
        // acosh(1+t) = sqrt(2t) (1 - t/12 + ...)
        assert!((acosh1p(t) - (2.0 * t).sqrt()).abs() < 1e-18);
        assert!((acosh1p(3.0) - (4.0f64 + 15.0f64.sqrt()).ln()).abs() < 1e-15);
        assert_eq!(acosh1p(0.0), 0.0);
    }

    #[test]
    fn half_plane_pairs_match_the_closed_form() {
        let g = half_plane(0.05);
        let dom = g.domain().clone();
        let pts = dom.sample_interior_filtered(14, 11, 0.25, 0.1).unwrap();
        let ids: Vec<u32> = pts.iter().map(|p| g.snap(p).unwrap().0).collect();
        let rows = g.pool_distances(&ids, Weighting::Qh);
        let mut errs = Vec::new();
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                // compare on the snapped coordinates so only the grid error is measured
                let exact = closed_form_qh(&dom, &g.point(ids[i]), &g.point(ids[j])).unwrap();
                if exact < 0.3 {
                    continue;
                }
                errs.push((rows[i][ids[j] as usize] - exact).abs() / exact);
            }
        }
        assert!(errs.len() > 40, "want a meaningful sample, got {}", errs.len());
        let max = errs.iter().cloned().fold(0.0, f64::max);
        let med = median(&mut errs);
        assert!(med <= 0.02, "median rel err {med:.4}");
        assert!(max <= 0.05, "max rel err {max:.4}");
    }

    #[test]
    fn punctured_plane_pairs_match_the_closed_form() {
        let dom = Domain::punctured_space(2, window(-2.0, -2.0, 2.0, 2.0)).unwrap();
        let g = build_graph(&dom, 0.05, Stencil::S16).unwrap();
        let pts = dom.sample_interior_filtered(14, 5, 0.3, 0.1).unwrap();
        let ids: Vec<u32> = pts.iter().map(|p| g.snap(p).unwrap().0).collect();
        let rows = g.pool_distances(&ids, Weighting::Qh);
        let mut errs = Vec::new();
        for i in 0..ids.len() {
            for j in (i + 1)..ids.len() {
                let exact = closed_form_qh(&dom, &g.point(ids[i]), &g.point(ids[j])).unwrap();
                if exact < 0.3 {
                    continue;
                }
                errs.push((rows[i][ids[j] as usize] - exact).abs() / exact);
            }
        }
        assert!(errs.len() > 40, "want a meaningful sample, got {}", errs.len());
        let max = errs.iter().cloned().fold(0.0, f64::max);
        let med = median(&mut errs);
        assert!(med <= 0.02, "median rel err {med:.4}");
        assert!(max <= 0.05, "max rel err {max:.4}");
    }

    #[test]
    fn disk_paths_through_the_center_are_logarithmic() {
        let dom = Domain::ball(1.0, 2, window(-1.0, -1.0, 1.0, 1.0)).unwrap();
        let g = build_graph(&dom, 0.01, Stencil::S16).unwrap();
        // radial integral of 1/(1-r): log 2 up from -0.5, log 10 up from 0.9
        let exact = 2.0f64.ln() + 10.0f64.ln();
        let got = qh_distance(&g, &Point::xy(0.0, -0.5), &Point::xy(0.0, 0.9)).unwrap();
        assert!((got - exact).abs() / exact < 0.01, "got {got}, exact {exact}");
    }

    #[test]
    fn near_boundary_queries_are_refused() {
        let g = half_plane(0.1);
        let err = qh_distance(&g, &Point::xy(0.0, 0.15), &Point::xy(0.0, 1.0)).unwrap_err();
        match err {
            Error::NearBoundary { d, limit } => {
                assert!((d - 0.15).abs() < 1e-12);
                assert!((limit - 0.3).abs() < 1e-12);
            }
            other => panic!("want NearBoundary, got {other:?}"),
        }
        let err = qh_distance(&g, &Point::xy(0.0, -0.5), &Point::xy(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::NotInterior));
    }

    #[test]
    fn subpaths_of_geodesics_are_geodesics() {
        let g = half_plane(0.05);
        let geo = qh_geodesic(&g, &Point::xy(-1.2, 0.3), &Point::xy(1.3, 0.4)).unwrap();
        let n = geo.vertices().len();
        let (i, j) = (n / 4, 3 * n / 4);
        let along = geo.cum_qh()[j] - geo.cum_qh()[i];
        let direct = qh_distance_vertices(&g, geo.vertices()[i], geo.vertices()[j]).unwrap();
        assert!((along - direct).abs() < 1e-9, "subpath {along} vs direct {direct}");
    }

    #[test]
    fn arclength_walk_passes_the_geometric_mean_height() {
        let dom = Domain::half_space(2, window(-1.0, 0.0, 1.0, 4.5)).unwrap();
        let g = build_graph(&dom, 0.05, Stencil::S16).unwrap();
        let geo = qh_geodesic(&g, &Point::xy(0.0, 0.25), &Point::xy(0.0, 4.0)).unwrap();
        // vertical segment: qh midpoint sits at the geometric mean height
        let mid = geo.point_at_qh(geo.len_qh() / 2.0);
        assert!((mid.coord(1) - 1.0).abs() < 0.02, "midpoint {mid:?}");
        assert!(mid.coord(0).abs() < 1e-12);
        let start = geo.point_at_qh(0.0);
        let end = geo.point_at_qh(geo.len_qh());
        assert_eq!(start.to_vec(), geo.points()[0].to_vec());
        assert_eq!(end.to_vec(), geo.points().last().unwrap().to_vec());
    }

    #[test]
    fn closed_form_is_only_claimed_where_it_holds() {
        let disk = Domain::ball(1.0, 2, window(-1.0, -1.0, 1.0, 1.0)).unwrap();
        assert!(closed_form_qh(&disk, &Point::xy(0.0, 0.0), &Point::xy(0.5, 0.0)).is_none());
        let hp = Domain::half_space(2, window(-1.0, 0.0, 1.0, 1.0)).unwrap();
        assert!(closed_form_qh(&hp, &Point::xy(0.0, -1.0), &Point::xy(0.0, 1.0)).is_none());
        // symmetry and the exact vertical value
        let k = closed_form_qh(&hp, &Point::xy(0.0, 0.25), &Point::xy(0.0, 4.0)).unwrap();
        assert!((k - 16.0f64.ln()).abs() < 1e-12);
    }
}
