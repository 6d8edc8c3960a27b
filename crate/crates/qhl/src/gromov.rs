//! Gromov products, four-point hyperbolicity estimates, Busemann functions
//! anchored at the boundary, and metrics on finite boundary samples.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{BoundaryAnchor, Point};
use crate::graph::{MetricGraph, Weighting};
use crate::qhyp::{check_depth, qh_distance_vertices};
use crate::{Error, Result};

/// Gromov product (x|y)_o = (k(x,o) + k(y,o) - k(x,y)) / 2 at vertices.
pub fn gromov_product_vertices(g: &MetricGraph, x: u32, y: u32, o: u32) -> Result<f64> {
    let from_o = g.distances_from(o, Weighting::Qh);
    let (kxo, kyo) = (from_o[x as usize], from_o[y as usize]);
    if !kxo.is_finite() || !kyo.is_finite() {
        return Err(Error::Disconnected(g.component(x), g.component(o)));
    }
    Ok(0.5 * (kxo + kyo - qh_distance_vertices(g, x, y)?))
}

/// Gromov product at continuum points, after snapping.
pub fn gromov_product(g: &MetricGraph, x: &Point, y: &Point, o: &Point) -> Result<f64> {
    for p in [x, y, o] {
        check_depth(g, p)?;
    }
    gromov_product_vertices(g, g.snap(x)?.0, g.snap(y)?.0, g.snap(o)?.0)
}

/// How the quadruples for a hyperbolicity estimate are enumerated.
#[derive(Clone, Copy, Debug)]
pub enum DeltaMode {
    /// Every 4-subset of the pool.
    Exhaustive,
    /// Random 4-subsets, reproducible from the seed.
    Random { count: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct DeltaEstimate {
    /// Four-point constant: half the worst gap between the two largest
    /// pairings of opposite-side sums.
    pub delta: f64,
    pub pool: usize,
    pub quadruples: u64,
    /// Pool indices of the worst quadruple.
    pub worst: [usize; 4],
}

/// Four-point delta over a precomputed distance matrix.
///
/// For each quadruple the three pairings d(x,y)+d(z,w), d(x,z)+d(y,w),
/// d(x,w)+d(y,z) are sorted; the witness is (largest - middle) / 2. This is
/// the standard four-point condition rearranged so each quadruple is O(1).
pub fn delta_from_matrix(d: &[Vec<f64>], mode: DeltaMode) -> Result<DeltaEstimate> {
    let n = d.len();
    if n < 4 {
        return Err(Error::EmptySample(format!("need 4 pool points, have {n}")));
    }
    let mut best = DeltaEstimate { delta: 0.0, pool: n, quadruples: 0, worst: [0, 1, 2, 3] };
    let consider = |q: [usize; 4], best: &mut DeltaEstimate| {
        let [x, y, z, w] = q;
        let s1 = d[x][y] + d[z][w];
        let s2 = d[x][z] + d[y][w];
        let s3 = d[x][w] + d[y][z];
        let top = s1.max(s2).max(s3);
        let mid = (s1 + s2 + s3) - top - s1.min(s2).min(s3);
        let witness = 0.5 * (top - mid);
        best.quadruples += 1;
        if witness > best.delta {
            best.delta = witness;
            best.worst = q;
        }
    };
    match mode {
        DeltaMode::Exhaustive => {
            for x in 0..n {
                for y in (x + 1)..n {
                    for z in (y + 1)..n {
                        for w in (z + 1)..n {
                            consider([x, y, z, w], &mut best);
                        }
                    }
                }
            }
        }
        DeltaMode::Random { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..count {
                let pick = rand::seq::index::sample(&mut rng, n, 4);
                consider([pick.index(0), pick.index(1), pick.index(2), pick.index(3)], &mut best);
            }
        }
    }
    Ok(best)
}

/// Four-point delta of the grid metric over a vertex pool.
pub fn estimate_delta(g: &MetricGraph, pool: &[u32], mode: DeltaMode) -> Result<DeltaEstimate> {
    let rows = g.pool_distances(pool, Weighting::Qh);
    let mut d = vec![vec![0.0; pool.len()]; pool.len()];
    for i in 0..pool.len() {
        for j in 0..pool.len() {
            let v = rows[i][pool[j] as usize];
            if !v.is_finite() {
                return Err(Error::Disconnected(g.component(pool[i]), g.component(pool[j])));
            }
            d[i][j] = v;
        }
    }
    delta_from_matrix(&d, mode)
}

/// Deterministic pool of distinct interior vertices, deep enough to trust
/// and clear of the artificial window faces.
pub fn interior_pool(
    g: &MetricGraph,
    count: usize,
    seed: u64,
    min_depth: f64,
    margin_frac: f64,
) -> Result<Vec<u32>> {
    let mut want = count;
    for _ in 0..8 {
        let pts = g.domain().sample_interior_filtered(want, seed, min_depth, margin_frac)?;
        let mut ids = Vec::with_capacity(count);
        for p in &pts {
            let (v, _) = g.snap(p)?;
            if !ids.contains(&v) {
                ids.push(v);
            }
            if ids.len() == count {
                return Ok(ids);
            }
        }
        want *= 2;
    }
    Err(Error::SampleExhausted { want: count, got: 0 })
}

/// Busemann function b(v) = k(v, z_r) - k(o, z_r) for an anchor pushed to
/// radius r along a boundary ray. Defined on every vertex of the component
/// containing the anchor; 1-Lipschitz in the graph metric by construction.
#[derive(Clone)]
pub struct BusemannField {
    g: Arc<MetricGraph>,
    anchor: BoundaryAnchor,
    r: f64,
    base: u32,
    anchor_vertex: u32,
    vals: Vec<f64>,
}

pub fn busemann_field(
    g: &Arc<MetricGraph>,
    anchor: &BoundaryAnchor,
    base: &Point,
    r: f64,
) -> Result<BusemannField> {
    let z = g.domain().anchor_point(anchor, r)?;
    check_depth(g, &z)?;
    check_depth(g, base)?;
    let (za, _) = g.snap(&z)?;
    let (bo, _) = g.snap(base)?;
    if g.component(za) != g.component(bo) {
        return Err(Error::Disconnected(g.component(za), g.component(bo)));
    }
    let dist = g.distances_from(za, Weighting::Qh);
    let k0 = dist[bo as usize];
    let vals = dist.iter().map(|&x| x - k0).collect();
    Ok(BusemannField { g: Arc::clone(g), anchor: anchor.clone(), r, base: bo, anchor_vertex: za, vals })
}

impl BusemannField {
    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.g
    }

    pub fn anchor(&self) -> &BoundaryAnchor {
        &self.anchor
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn base_vertex(&self) -> u32 {
        self.base
    }

    pub fn anchor_vertex(&self) -> u32 {
        self.anchor_vertex
    }

    /// Value at a vertex; infinite off the anchor's component.
    pub fn value(&self, v: u32) -> f64 {
        self.vals[v as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn value_at(&self, p: &Point) -> Result<f64> {
        check_depth(&self.g, p)?;
        Ok(self.vals[self.g.snap(p)?.0 as usize])
    }

    /// Gromov product rebased at the anchor:
    /// (u|v)_b = (b(u) + b(v) - k(u,v)) / 2.
    pub fn boundary_product(&self, u: u32, v: u32, k_uv: f64) -> f64 {
        0.5 * (self.vals[u as usize] + self.vals[v as usize] - k_uv)
    }
}

/// Visibility scale for a hyperbolicity estimate: small enough that the
/// exponential of products is close to multiplicative on triples.
pub fn choose_epsilon(delta_hat: f64) -> f64 {
    std::f64::consts::LN_2 / (22.0 * delta_hat.max(0.1))
}

/// Metric structure on a finite boundary sample, seen from one anchor.
#[derive(Clone, Debug)]
pub struct BoundaryMetricTable {
    /// Scale actually used (after the safety clamp).
    pub eps: f64,
    pub requested_eps: f64,
    /// Worst observed product defect min((i|k),(k|j)) - (i|j) over triples.
    pub defect: f64,
    pub boundary_pts: Vec<Point>,
    /// Near-boundary vertices standing in for the boundary points.
    pub proxies: Vec<u32>,
    /// Boundary products (i|j)_b at the proxies; diagonal is +inf.
    pub gromov: Vec<Vec<f64>>,
    /// Quasimetric exp(-eps (i|j)_b); zero on the diagonal.
    pub rho: Vec<Vec<f64>>,
    /// Largest metric below rho: infimum of chain sums, here exact by
    /// Floyd-Warshall on the complete table.
    pub dist: Vec<Vec<f64>>,
}

/// Builds the boundary table: each target point is represented by the
/// nearest vertex within three cells of the boundary, products come from
/// the Busemann field, and rho = exp(-eps * product) is turned into a true
/// metric by chaining.
///
/// The clamp keeps exp(eps * defect) <= 5/4; the chain-sum lower bound
/// (3 - 2K) rho with K = exp(eps * defect) then guarantees rho/2 <= dist
/// on the finite table, and dist <= rho is the one-hop chain.
pub fn hamenstadt_table(
    field: &BusemannField,
    boundary_pts: &[Point],
    eps: f64,
) -> Result<BoundaryMetricTable> {
    let g = field.graph();
    let n = boundary_pts.len();
    if n < 2 {
        return Err(Error::EmptySample(format!("need 2 boundary points, have {n}")));
    }
    if eps <= 0.0 {
        return Err(Error::DegenerateParams(format!("eps must be positive, got {eps}")));
    }
    let shallow_limit = 3.0 * g.h();
    let shallow: Vec<u32> =
        (0..g.vertex_count() as u32).filter(|&v| g.depth(v) <= shallow_limit).collect();
    if shallow.is_empty() {
        return Err(Error::NoProxy(f64::INFINITY));
    }
    let mut proxies = Vec::with_capacity(n);
    for p in boundary_pts {
        let (best, dist) = shallow
            .iter()
            .map(|&v| (v, g.point(v).dist(p)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            .unwrap();
        if dist > 10.0 * g.h() {
            return Err(Error::NoProxy(dist));
        }
        proxies.push(best);
    }

    let rows = g.pool_distances(&proxies, Weighting::Qh);
    let mut gromov = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let k_ij = rows[i][proxies[j] as usize];
            if !k_ij.is_finite() && proxies[i] != proxies[j] {
                return Err(Error::Disconnected(g.component(proxies[i]), g.component(proxies[j])));
            }
            let p = field.boundary_product(proxies[i], proxies[j], k_ij);
            gromov[i][j] = p;
            gromov[j][i] = p;
        }
    }

    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let lhs = gromov[i][k].min(gromov[k][j]);
                if lhs.is_finite() && gromov[i][j].is_finite() {
                    defect = defect.max(lhs - gromov[i][j]);
                }
            }
        }
    }
    let mut eff = eps;
    if defect > 0.0 && (eps * defect).exp() > 1.25 {
        eff = 1.25f64.ln() / defect;
    }

    let mut rho = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && gromov[i][j].is_finite() {
                rho[i][j] = (-eff * gromov[i][j]).exp();
            }
        }
    }
    let dist = chain_metric(&rho);
    Ok(BoundaryMetricTable {
        eps: eff,
        requested_eps: eps,
        defect,
        boundary_pts: boundary_pts.to_vec(),
        proxies,
        gromov,
        rho,
        dist,
    })
}

/// Largest pseudometric below a symmetric nonnegative weight table.
fn chain_metric(rho: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = rho.len();
    let mut d: Vec<Vec<f64>> = rho.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

impl BoundaryMetricTable {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,gromov,rho,chain")?;
        for i in 0..self.rho.len() {
            for j in (i + 1)..self.rho.len() {
                writeln!(
                    out,
                    "{i},{j},{:.12},{:.12},{:.12}",
                    self.gromov[i][j], self.rho[i][j], self.dist[i][j]
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Window};
    use crate::graph::{build_graph, Stencil};

    fn window(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::new(Point::xy(x0, y0), Point::xy(x1, y1)).unwrap()
    }

    fn half_plane(h: f64, w: Window) -> Arc<MetricGraph> {
        let dom = Domain::half_space(2, w).unwrap();
        Arc::new(build_graph(&dom, h, Stencil::S16).unwrap())
    }

    #[test]
    fn star_tree_metric_has_zero_delta() {
        // four leaves glued to a center at dyadic arm lengths: a 0-hyperbolic space
        let arms = [0.25, 0.5, 1.0, 2.0, 4.0];
        let n = arms.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    d[i][j] = arms[i] + arms[j];
                }
            }
        }
        let est = delta_from_matrix(&d, DeltaMode::Exhaustive).unwrap();
        assert_eq!(est.delta, 0.0);
        assert_eq!(est.quadruples, 5);
    }

    #[test]
    fn half_plane_delta_sits_in_the_hyperbolic_range() {
        let g = half_plane(0.05, window(-2.0, 0.0, 2.0, 2.0));
        let pool = interior_pool(&g, 24, 3, 0.2, 0.05).unwrap();
        let est = estimate_delta(&g, &pool, DeltaMode::Exhaustive).unwrap();
        // the continuum metric is the curvature -1 half-plane
        assert!(est.delta > 0.4 && est.delta < 0.8, "delta {:.4}", est.delta);
        assert_eq!(est.quadruples, 10626);
    }

    #[test]
    fn random_quadruples_never_beat_exhaustive() {
        let g = half_plane(0.1, window(-2.0, 0.0, 2.0, 2.0));
        let pool = interior_pool(&g, 12, 9, 0.3, 0.05).unwrap();
        let exh = estimate_delta(&g, &pool, DeltaMode::Exhaustive).unwrap();
        let rnd = estimate_delta(&g, &pool, DeltaMode::Random { count: 4000, seed: 1 }).unwrap();
        assert!(rnd.delta <= exh.delta + 1e-12);
        assert!(rnd.delta >= 0.5 * exh.delta, "random {} vs exhaustive {}", rnd.delta, exh.delta);
    }

    #[test]
    fn vertical_axis_busemann_is_log_height() {
        let g = half_plane(0.05, window(-3.0, 0.0, 3.0, 10.0));
        let anchor =
            BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let field = busemann_field(&g, &anchor, &Point::xy(0.0, 1.0), 8.0).unwrap();
        for y in [0.25, 0.5, std::f64::consts::E.recip(), 1.0, std::f64::consts::E, 4.0] {
            let (v, _) = g.snap(&Point::xy(0.0, y)).unwrap();
            let want = -g.point(v).coord(1).ln();
            let got = field.value(v);
            // on the anchor's own column the trapezoid sums cancel above
            // min(y, 1); what is left is the 1-D trapezoid error below that
            assert!((got - want).abs() < 5e-3, "y={y}: got {got}, want {want}");
        }
    }

    #[test]
    fn busemann_is_one_lipschitz_in_the_graph_metric() {
        let g = half_plane(0.1, window(-2.0, 0.0, 2.0, 2.0));
        let anchor =
            BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let field = busemann_field(&g, &anchor, &Point::xy(0.0, 1.0), 1.5).unwrap();
        let pool = interior_pool(&g, 10, 21, 0.25, 0.05).unwrap();
        let rows = g.pool_distances(&pool, Weighting::Qh);
        for (i, &u) in pool.iter().enumerate() {
            for &v in &pool {
                let gap = (field.value(u) - field.value(v)).abs();
                assert!(gap <= rows[i][v as usize] + 1e-12);
            }
        }
    }

    #[test]
    fn doubling_the_anchor_radius_moves_busemann_by_at_most_two_log_two() {
        let g = half_plane(0.05, window(-3.0, 0.0, 3.0, 20.0));
        let anchor =
            BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let base = Point::xy(0.0, 1.0);
        let f1 = busemann_field(&g, &anchor, &base, 8.0).unwrap();
        let f2 = busemann_field(&g, &anchor, &base, 16.0).unwrap();
        let mut worst = 0.0f64;
        for v in 0..g.vertex_count() as u32 {
            if g.depth(v) >= 0.25 {
                worst = worst.max((f1.value(v) - f2.value(v)).abs());
            }
        }
        // the anchors are log 2 apart, so the two normalized distance
        // functions can disagree by at most 2 log 2 plus grid error
        assert!(worst <= 2.0 * 2.0f64.ln() + 0.05, "worst gap {worst}");
    }

    #[test]
    fn boundary_products_reproduce_the_euclidean_log() {
        let g = half_plane(0.02, window(-1.5, 0.0, 1.5, 1.5));
        let anchor =
            BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let field = busemann_field(&g, &anchor, &Point::xy(0.0, 1.0), 1.2).unwrap();
        let pts =
            vec![Point::xy(-0.5, 0.0), Point::xy(0.5, 0.0), Point::xy(-0.1, 0.0), Point::xy(0.1, 0.0)];
        let table = hamenstadt_table(&field, &pts, 1.0).unwrap();
        // anchored at the upper-half-plane infinity, (u|v) -> -log|u - v|
        let cases = [(0usize, 1usize, 1.0f64), (2, 3, 0.2), (0, 3, 0.6), (2, 1, 0.6)];
        for (i, j, sep) in cases {
            let want = -sep.ln();
            let got = table.gromov[i][j];
            assert!((got - want).abs() < 0.2, "pair {i},{j}: got {got}, want {want}");
        }
    }

    #[test]
    fn chained_boundary_metric_is_sandwiched_by_rho() {
        let g = half_plane(0.02, window(-1.5, 0.0, 1.5, 1.5));
        let anchor =
            BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let field = busemann_field(&g, &anchor, &Point::xy(0.0, 1.0), 1.2).unwrap();
        let pts: Vec<Point> = (0..12).map(|i| Point::xy(-1.1 + 0.2 * i as f64, 0.0)).collect();
        let pool = interior_pool(&g, 20, 17, 0.1, 0.05).unwrap();
        let delta = estimate_delta(&g, &pool, DeltaMode::Exhaustive).unwrap().delta;
        let table = hamenstadt_table(&field, &pts, choose_epsilon(delta)).unwrap();
        assert!((table.eps * table.defect).exp() <= 1.25, "clamp failed to bite");
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j {
                    continue;
                }
                let (r, d) = (table.rho[i][j], table.dist[i][j]);
                assert!(d <= r + 1e-12, "chain above rho at {i},{j}");
                assert!(d >= 0.5 * r - 1e-12, "chain below rho/2 at {i},{j}: {d} vs {r}");
                // symmetry and triangle come with the construction
                assert!((table.dist[i][j] - table.dist[j][i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn epsilon_rule_floors_small_deltas() {
        let ln2 = std::f64::consts::LN_2;
        assert!((choose_epsilon(0.7) - ln2 / (22.0 * 0.7)).abs() < 1e-15);
        assert!((choose_epsilon(0.01) - ln2 / 2.2).abs() < 1e-15);
    }

    #[test]
    fn boundary_table_rejects_bad_inputs() {
        let g = half_plane(0.1, window(-1.0, 0.0, 1.0, 1.0));
        let anchor =
            BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let field = busemann_field(&g, &anchor, &Point::xy(0.0, 0.5), 0.8).unwrap();
        let one = vec![Point::xy(0.0, 0.0)];
        assert!(matches!(hamenstadt_table(&field, &one, 1.0), Err(Error::EmptySample(_))));
        let two = vec![Point::xy(-0.5, 0.0), Point::xy(0.5, 0.0)];
        assert!(matches!(
            hamenstadt_table(&field, &two, 0.0),
            Err(Error::DegenerateParams(_))
        ));
    }
}
