//! Discrete p-modulus of connecting curve families.
//!
//! Vertex densities, cell measures, trapezoid line integrals. The solver
//! works on the flow side of the blocking duality: over unit E-F path flows
//! the dual objective is a smooth convex energy of the vertex throughput, so
//! conditional gradient steps apply, with a Dijkstra as the linear oracle.
//! Every step yields a certified bracket: any unit flow gives a lower bound
//! through weak duality, and the throughput density rescaled by its own
//! shortest path integral is admissible, giving an upper bound.

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::deform::DeformedGraph;
use crate::geometry::Point;
use crate::graph::{Edge, MetricGraph};
use crate::{Error, Result};

/// Which length and measure the curve family is measured in.
pub enum ModulusMetric<'a> {
    /// Euclidean edge lengths, Lebesgue cell measure h^n.
    Euclid,
    /// Quasihyperbolic lengths and measure h^n / d^n.
    Qh,
    /// Deformed lengths rho_eps ds and measure (rho_eps/d)^n h^n.
    Deformed(&'a DeformedGraph),
}

enum EdgeLens {
    Euclid,
    Qh,
    /// Per-vertex conformal factor applied to the qh weight.
    Scaled(Vec<f64>),
}

pub struct ModulusProblem {
    g: Arc<MetricGraph>,
    e: Vec<u32>,
    f: Vec<u32>,
    p: f64,
    tol: f64,
    gap_target: f64,
    measure: Vec<f64>,
    lens: EdgeLens,
}

#[derive(Clone, Debug)]
pub struct ModulusSolution {
    /// Certified value: integral of the admissible density, an upper bound
    /// for the true discrete modulus.
    pub value: f64,
    /// Weak-duality lower bound from the active-set multipliers.
    pub lower_bound: f64,
    /// (value - lower_bound) / value; zero for empty families.
    pub gap: f64,
    /// Admissible density (every connecting path has rho-length >= 1).
    pub rho: Vec<f64>,
    /// Active constraint paths, in generation order.
    pub paths: Vec<Vec<u32>>,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub empty_family: bool,
}

fn in_set_connected(g: &MetricGraph, set: &[u32]) -> bool {
    let mut mask = vec![false; g.vertex_count()];
    for &v in set {
        mask[v as usize] = true;
    }
    let mut seen = vec![false; g.vertex_count()];
    let mut stack = vec![set[0]];
    seen[set[0] as usize] = true;
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for (v, _, _) in g.neighbors(u) {
            if mask[v as usize] && !seen[v as usize] {
                seen[v as usize] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    reached == set.len()
}

impl ModulusProblem {
    pub fn new(
        g: &Arc<MetricGraph>,
        metric: ModulusMetric,
        e: Vec<u32>,
        f: Vec<u32>,
        p: f64,
    ) -> Result<ModulusProblem> {
        if e.is_empty() || f.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        if p <= 1.0 {
            return Err(Error::DegenerateParams(format!("exponent p must exceed 1, got {p}")));
        }
        if e.iter().any(|v| f.contains(v)) {
            return Err(Error::DegenerateParams("continua E and F intersect".into()));
        }
        for (name, set) in [("E", &e), ("F", &f)] {
            if !in_set_connected(g, set) {
                return Err(Error::DegenerateParams(format!("continuum {name} is not connected")));
            }
        }
        if let ModulusMetric::Deformed(dg) = &metric {
            if !Arc::ptr_eq(dg.base(), g) {
                return Err(Error::DegenerateParams(
                    "deformed metric lives on a different grid".into(),
                ));
            }
        }
        let n = g.dim() as i32;
        let hn = g.h().powi(n);
        let (measure, lens) = match metric {
            ModulusMetric::Euclid => (vec![hn; g.vertex_count()], EdgeLens::Euclid),
            ModulusMetric::Qh => (
                g.depths().iter().map(|&d| hn / d.powi(n)).collect(),
                EdgeLens::Qh,
            ),
            ModulusMetric::Deformed(dg) => (
                (0..g.vertex_count())
                    .map(|v| (dg.rho(v as u32) / g.depth(v as u32)).powi(n) * hn)
                    .collect(),
                EdgeLens::Scaled(dg.rho_values().to_vec()),
            ),
        };
        Ok(ModulusProblem { g: Arc::clone(g), e, f, p, tol: 1e-3, gap_target: 0.03, measure, lens })
    }

    pub fn with_tolerance(mut self, tol: f64) -> ModulusProblem {
        self.tol = tol;
        self
    }

    /// Relative duality-gap target at which the solver stops refining.
    pub fn with_gap_target(mut self, gap: f64) -> ModulusProblem {
        self.gap_target = gap.clamp(1e-4, 0.5);
        self
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.g
    }

    pub fn continua(&self) -> (&[u32], &[u32]) {
        (&self.e, &self.f)
    }

    fn edge_len(&self, u: u32, e: &Edge) -> f64 {
        match &self.lens {
            EdgeLens::Euclid => e.elen,
            EdgeLens::Qh => e.qh,
            EdgeLens::Scaled(rho) => e.qh * 0.5 * (rho[u as usize] + rho[e.to as usize]),
        }
    }

    fn edge_len_between(&self, u: u32, v: u32) -> f64 {
        let (elen, qh) = self.g.edge_between(u, v).expect("consecutive path vertices");
        match &self.lens {
            EdgeLens::Euclid => elen,
            EdgeLens::Qh => qh,
            EdgeLens::Scaled(rho) => qh * 0.5 * (rho[u as usize] + rho[v as usize]),
        }
    }

    /// Trapezoid coefficients of a path: each vertex carries half of its
    /// incident path edges, so sum(c_v rho_v) is the path line integral.
    fn coefficients(&self, path: &[u32]) -> Vec<(u32, f64)> {
        let mut c: Vec<(u32, f64)> = path.iter().map(|&v| (v, 0.0)).collect();
        for i in 0..path.len() - 1 {
            let len = self.edge_len_between(path[i], path[i + 1]);
            c[i].1 += 0.5 * len;
            c[i + 1].1 += 0.5 * len;
        }
        c
    }

    /// Separation oracle: rho-cheapest paths from E, with the line integral
    /// to each F target sorted cheapest first.
    fn rho_dijkstra(&self, rho: &[f64]) -> (Vec<(f64, u32)>, Vec<u32>) {
        let sources: Vec<(u32, f64)> = self.e.iter().map(|&v| (v, 0.0)).collect();
        let (dist, pred) = self.g.dijkstra_generic(&sources, None, |u, e| {
            self.edge_len(u, e) * 0.5 * (rho[u as usize] + rho[e.to as usize])
        });
        let mut targets: Vec<(f64, u32)> =
            self.f.iter().map(|&v| (dist[v as usize], v)).collect();
        targets.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        (targets, pred)
    }

    fn shortest_rho_path(&self, rho: &[f64]) -> (Vec<u32>, f64) {
        let (targets, pred) = self.rho_dijkstra(rho);
        (extract_path(&pred, targets[0].1), targets[0].0)
    }

    fn value_of(&self, rho: &[f64]) -> f64 {
        rho.iter().zip(&self.measure).map(|(r, m)| r.powf(self.p) * m).sum()
    }
}

fn extract_path(pred: &[u32], target: u32) -> Vec<u32> {
    let mut path = vec![target];
    let mut cur = target;
    while pred[cur as usize] != u32::MAX {
        cur = pred[cur as usize];
        path.push(cur);
    }
    path.reverse();
    path
}

/// rho recovered from the dual variables: p m rho^(p-1) = s.
fn rho_from_s(s: f64, p: f64, m: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if p == 2.0 {
        s / (2.0 * m)
    } else {
        (s / (p * m)).powf(1.0 / (p - 1.0))
    }
}

pub fn discrete_modulus(prob: &ModulusProblem) -> Result<ModulusSolution> {
    let g = &prob.g;
    let n = g.vertex_count();
    let empty = ModulusSolution {
        value: 0.0,
        lower_bound: 0.0,
        gap: 0.0,
        rho: vec![0.0; n],
        paths: Vec::new(),
        iterations: 0,
        oracle_calls: 0,
        empty_family: true,
    };
    if g.component(prob.e[0]) != g.component(prob.f[0]) {
        return Ok(empty);
    }

    let mut flow = FlowState::new(prob);
    let mut best_value = f64::INFINITY;
    let mut best_lower = 0.0f64;
    let mut best_rho: Vec<f64> = vec![0.0; n];
    let mut oracle_calls = 0usize;
    let mut steps = 0usize;
    let trace = std::env::var_os("QHL_MODULUS_TRACE").is_some();
    let p = prob.p;
    let max_rounds = 4000;
    let batch = 8;
    let mut checkpoint_gap = f64::INFINITY;

    for round in 0..max_rounds {
        let (targets, pred) = prob.rho_dijkstra(&flow.gd);
        oracle_calls += 1;
        let ell = targets[0].0;

        let kk = flow.k_exact();
        if kk > 0.0 && ell > 0.0 {
            let lower = kk.powf(1.0 - p) / p;
            let value = kk / (p * ell.powf(p));
            if lower > best_lower {
                best_lower = lower;
            }
            if value < best_value {
                best_value = value;
                best_rho.copy_from_slice(&flow.gd);
                for r in best_rho.iter_mut() {
                    *r /= ell;
                }
            }
            let gap = (best_value - best_lower) / best_value;
            if trace && round % 25 == 0 {
                eprintln!(
                    "modulus round {round}: steps {steps} atoms {} bracket [{best_lower:.5}, {best_value:.5}] gap {gap:.4}",
                    flow.active_count()
                );
            }
            if gap <= prob.gap_target {
                break;
            }
            // stop refining once the bracket stops closing at a useful rate
            if round % 200 == 199 {
                if checkpoint_gap - gap < 0.0015 {
                    break;
                }
                checkpoint_gap = gap;
            }
        }

        // one Dijkstra funds several pairwise steps: near-shortest paths to
        // a spread of targets are each played against the currently most
        // expensive active atom
        let limit = ell * 1.25;
        let eligible = targets.iter().take_while(|t| t.0 <= limit).count().max(1);
        let stride = eligible.div_ceil(batch).max(1);
        let mut progressed = false;
        for b in (0..eligible).step_by(stride) {
            let path = extract_path(&pred, targets[b].1);
            let fw = flow.intern(path);
            if flow.total_mass() == 0.0 {
                flow.init_unit(fw);
                progressed = true;
                continue;
            }
            if flow.pairwise_step(fw) {
                steps += 1;
                progressed = true;
                if steps % 1024 == 0 {
                    flow.rebuild();
                }
            }
        }
        if !progressed && flow.total_mass() > 0.0 {
            break;
        }
    }

    if !best_value.is_finite() || best_value <= 0.0 {
        return Ok(empty);
    }
    debug_assert!(
        prob.shortest_rho_path(&best_rho).1 >= 1.0 - prob.tol,
        "returned density must be admissible"
    );
    debug_assert!(
        (prob.value_of(&best_rho) - best_value).abs() <= 1e-9 * best_value.max(1.0),
        "reported value must be the energy of the returned density"
    );
    let gap = ((best_value - best_lower) / best_value).max(0.0);
    Ok(ModulusSolution {
        value: best_value,
        lower_bound: best_lower,
        gap,
        rho: best_rho,
        paths: flow.active_paths(),
        iterations: steps,
        oracle_calls,
        empty_family: false,
    })
}

struct Atom {
    path: Vec<u32>,
    coef: Vec<(u32, f64)>,
    alpha: f64,
}

/// A unit E-F flow kept as an explicit atom decomposition s = sum alpha_i
/// c_i, where c_i is the trapezoid coefficient column of path i. Pairwise
/// steps shift mass from the most expensive active atom to a cheaper one;
/// throughput s, density gd and per-atom integrals are maintained sparsely
/// through a vertex-to-atoms adjacency.
struct FlowState<'a> {
    prob: &'a ModulusProblem,
    atoms: Vec<Atom>,
    /// line integral of each atom's path under the current density
    integrals: Vec<f64>,
    index: HashMap<Vec<u32>, usize>,
    /// vertex -> (atom, coefficient) incidences
    touch: Vec<Vec<(u32, f64)>>,
    /// throughput of the current flow
    s: Vec<f64>,
    /// density induced by the throughput: gd = (s / (p m))^(1/(p-1))
    gd: Vec<f64>,
    mass: f64,
}

impl<'a> FlowState<'a> {
    fn new(prob: &'a ModulusProblem) -> FlowState<'a> {
        let n = prob.g.vertex_count();
        FlowState {
            prob,
            atoms: Vec::new(),
            integrals: Vec::new(),
            index: HashMap::new(),
            touch: vec![Vec::new(); n],
            s: vec![0.0; n],
            gd: vec![0.0; n],
            mass: 0.0,
        }
    }

    fn total_mass(&self) -> f64 {
        self.mass
    }

    fn active_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.alpha > 0.0).count()
    }

    fn active_paths(&self) -> Vec<Vec<u32>> {
        self.atoms.iter().filter(|a| a.alpha > 0.0).map(|a| a.path.clone()).collect()
    }

    fn k_exact(&self) -> f64 {
        let p = self.prob.p;
        let q = p / (p - 1.0);
        let m = &self.prob.measure;
        if p == 2.0 {
            self.s.iter().zip(m).map(|(&sv, &mv)| sv * sv / (2.0 * mv)).sum()
        } else {
            self.s
                .iter()
                .zip(m)
                .map(|(&sv, &mv)| {
                    if sv <= 0.0 {
                        0.0
                    } else {
                        sv.powf(q) / (p * mv).powf(q - 1.0)
                    }
                })
                .sum()
        }
    }

    fn intern(&mut self, path: Vec<u32>) -> usize {
        if let Some(&i) = self.index.get(&path) {
            return i;
        }
        let i = self.atoms.len();
        let coef = self.prob.coefficients(&path);
        let integral = coef.iter().map(|&(v, c)| c * self.gd[v as usize]).sum();
        for &(v, c) in &coef {
            self.touch[v as usize].push((i as u32, c));
        }
        self.index.insert(path.clone(), i);
        self.atoms.push(Atom { path, coef, alpha: 0.0 });
        self.integrals.push(integral);
        i
    }

    fn init_unit(&mut self, fw: usize) {
        self.atoms[fw].alpha = 1.0;
        self.mass = 1.0;
        let coef: Vec<(u32, f64)> = self.atoms[fw].coef.clone();
        self.apply_throughput(&coef);
    }

    /// Moves mass from the currently most expensive active atom toward
    /// `fw`, with an exact line search; returns false when no progress is
    /// possible in that direction.
    fn pairwise_step(&mut self, fw: usize) -> bool {
        let mut away = usize::MAX;
        let mut away_cost = f64::NEG_INFINITY;
        for (i, a) in self.atoms.iter().enumerate() {
            if a.alpha > 0.0 && self.integrals[i] > away_cost {
                away_cost = self.integrals[i];
                away = i;
            }
        }
        if away == usize::MAX || away == fw {
            return false;
        }
        if away_cost - self.integrals[fw] <= 1e-12 * away_cost.abs().max(1.0) {
            return false;
        }

        // sparse direction d = c_fw - c_away, merged by vertex so the sums
        // below are order-deterministic
        let mut d: Vec<(u32, f64)> = self.atoms[fw]
            .coef
            .iter()
            .cloned()
            .chain(self.atoms[away].coef.iter().map(|&(v, c)| (v, -c)))
            .collect();
        d.sort_unstable_by_key(|e| e.0);
        d.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });

        let p = self.prob.p;
        let gamma_max = self.atoms[away].alpha;
        let theta = if p == 2.0 {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(v, dv) in &d {
                let v = v as usize;
                num -= self.s[v] * dv / (2.0 * self.prob.measure[v]);
                den += dv * dv / (2.0 * self.prob.measure[v]);
            }
            if den <= 0.0 {
                0.0
            } else {
                (num / den).clamp(0.0, gamma_max)
            }
        } else {
            sparse_line_search(&self.s, &d, p, &self.prob.measure, gamma_max)
        };
        if theta <= 0.0 {
            return false;
        }

        self.atoms[fw].alpha += theta;
        self.atoms[away].alpha -= theta;
        if self.atoms[away].alpha < 1e-15 {
            self.atoms[away].alpha = 0.0;
        }
        let shift: Vec<(u32, f64)> = d.iter().map(|&(v, dv)| (v, theta * dv)).collect();
        self.apply_throughput(&shift);
        true
    }

    /// Adds a sparse increment to the throughput and propagates it to the
    /// density and to every incident atom integral.
    fn apply_throughput(&mut self, delta: &[(u32, f64)]) {
        let p = self.prob.p;
        for &(v, dv) in delta {
            let v = v as usize;
            self.s[v] = (self.s[v] + dv).max(0.0);
            let g_new = rho_from_s(self.s[v], p, self.prob.measure[v]);
            let g_delta = g_new - self.gd[v];
            self.gd[v] = g_new;
            if g_delta != 0.0 {
                for &(atom, c) in &self.touch[v] {
                    self.integrals[atom as usize] += c * g_delta;
                }
            }
        }
    }

    /// Recomputes throughput, density and integrals from the atom masses;
    /// run periodically so incremental float drift cannot accumulate.
    fn rebuild(&mut self) {
        let p = self.prob.p;
        self.s.iter_mut().for_each(|x| *x = 0.0);
        self.mass = 0.0;
        for a in &self.atoms {
            if a.alpha > 0.0 {
                self.mass += a.alpha;
                for &(v, c) in &a.coef {
                    self.s[v as usize] += a.alpha * c;
                }
            }
        }
        for v in 0..self.s.len() {
            self.gd[v] = rho_from_s(self.s[v], p, self.prob.measure[v]);
        }
        for (i, a) in self.atoms.iter().enumerate() {
            self.integrals[i] =
                a.coef.iter().map(|&(v, c)| c * self.gd[v as usize]).sum();
        }
    }
}

/// Minimizes the convex t -> K(s + t d) over [0, hi] by bisecting the
/// derivative; d is sparse, so each probe touches only its support.
fn sparse_line_search(s: &[f64], d: &[(u32, f64)], p: f64, measure: &[f64], hi: f64) -> f64 {
    let deriv = |t: f64| -> f64 {
        d.iter()
            .map(|&(v, dv)| {
                let v = v as usize;
                rho_from_s(s[v] + t * dv, p, measure[v]) * dv
            })
            .sum()
    };
    if deriv(0.0) >= 0.0 {
        return 0.0;
    }
    if deriv(hi) <= 0.0 {
        return hi;
    }
    let (mut a, mut b) = (0.0, hi);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if deriv(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Vertices within `band` of the circle |x - c| = r, id-sorted.
pub fn circle_proxies(g: &MetricGraph, c: &Point, r: f64, band: f64) -> Result<Vec<u32>> {
    let got = g.select_vertices(|p| (p.dist(c) - r).abs() <= band);
    if got.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    Ok(got)
}

/// Vertices within `band` of the segment [a, b], id-sorted.
pub fn segment_proxies(g: &MetricGraph, a: &Point, b: &Point, band: f64) -> Result<Vec<u32>> {
    let ab = b.dist(a);
    if ab == 0.0 {
        return Err(Error::BadContinuumPair);
    }
    let got = g.select_vertices(|p| {
        let t = ((0..p.dim())
            .map(|i| (p.coord(i) - a.coord(i)) * (b.coord(i) - a.coord(i)))
            .sum::<f64>()
            / (ab * ab))
            .clamp(0.0, 1.0);
        p.dist(&Point::lerp(a, b, t)) <= band
    });
    if got.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    Ok(got)
}

/// Vertices inside the closed ball B(c, r), id-sorted.
pub fn disk_proxies(g: &MetricGraph, c: &Point, r: f64) -> Result<Vec<u32>> {
    let got = g.select_vertices(|p| p.dist(c) <= r);
    if got.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    Ok(got)
}

fn euclid_diameter(g: &MetricGraph, set: &[u32]) -> f64 {
    g.point_set_diameter(set)
}

/// dist(E, F) / min(diam E, diam F) in the Euclidean metric.
pub fn separation_ratio_euclid(g: &MetricGraph, e: &[u32], f: &[u32]) -> Result<f64> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let dmin = e
        .iter()
        .flat_map(|&u| f.iter().map(move |&v| (u, v)))
        .map(|(u, v)| g.point(u).dist(&g.point(v)))
        .fold(f64::INFINITY, f64::min);
    let de = euclid_diameter(g, e);
    let df = euclid_diameter(g, f);
    if de == 0.0 || df == 0.0 {
        return Err(Error::BadContinuumPair);
    }
    Ok(dmin / de.min(df))
}

/// Same ratio measured in the deformed metric. Diameters of large sets are
/// estimated on an id-ordered subsample to keep the pairwise work bounded.
pub fn separation_ratio_deformed(dg: &DeformedGraph, e: &[u32], f: &[u32]) -> Result<f64> {
    if e.is_empty() || f.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let g = dg.base();
    let subsample = |set: &[u32]| -> Vec<u32> {
        let stride = (set.len() / 48).max(1);
        set.iter().step_by(stride).cloned().collect()
    };
    let deformed_rows = |set: &[u32]| -> Vec<Vec<f64>> {
        set.iter()
            .map(|&v| {
                g.dijkstra_generic(&[(v, 0.0)], None, |u, e| dg.edge_len(u, e)).0
            })
            .collect()
    };
    let es = subsample(e);
    let fs = subsample(f);
    let rows = deformed_rows(&es);
    let dmin = rows
        .iter()
        .flat_map(|row| fs.iter().map(move |&v| row[v as usize]))
        .fold(f64::INFINITY, f64::min);
    let diam = |set: &[u32], rows: &[Vec<f64>]| -> f64 {
        rows.iter()
            .flat_map(|row| set.iter().map(move |&v| row[v as usize]))
            .fold(0.0, f64::max)
    };
    let de = diam(&es, &rows);
    let df = diam(&fs, &deformed_rows(&fs));
    if de == 0.0 || df == 0.0 {
        return Err(Error::BadContinuumPair);
    }
    Ok(dmin / de.min(df))
}

#[derive(Clone, Debug)]
pub struct LoewnerSample {
    pub t: f64,
    /// Smallest modulus observed among sampled pairs with separation <= t;
    /// an upper bound for the Loewner control function at t.
    pub modulus: f64,
    pub pairs: usize,
}

/// Samples disk continua pairs, bins them by separation ratio, and reports
/// the minimum modulus per threshold. One shared pair pool serves every t,
/// so the output is monotone in t by construction.
pub fn loewner_probe(
    g: &Arc<MetricGraph>,
    dg: Option<&DeformedGraph>,
    t_values: &[f64],
    pairs_per_t: usize,
    seed: u64,
) -> Result<Vec<LoewnerSample>> {
    if t_values.is_empty() || t_values.iter().any(|&t| t <= 0.0) {
        return Err(Error::DegenerateParams("separation thresholds must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_max = t_values.iter().cloned().fold(0.0, f64::max);
    let t_min = t_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let want = pairs_per_t * t_values.len();
    let mut measured: Vec<(f64, f64)> = Vec::new();
    let p = g.dim() as f64;

    let mut attempts = 0;
    while measured.len() < want && attempts < want * 40 {
        attempts += 1;
        use rand::Rng;
        // draw a target separation, then size the disks to hit it
        let t_target = t_min * (t_max / t_min).powf(rng.random::<f64>());
        let pts = g.domain().sample_interior_filtered(2, rng.random::<u64>(), 6.0 * g.h(), 0.1);
        let Ok(pts) = pts else { continue };
        let d = pts[0].dist(&pts[1]);
        let r = d / (2.0 * (1.0 + 0.8 * t_target));
        if r < 2.5 * g.h() {
            continue;
        }
        let deep_enough = [&pts[0], &pts[1]].iter().all(|c| {
            g.domain().dist_boundary(c).map(|dep| dep >= r + 3.0 * g.h()).unwrap_or(false)
        });
        if !deep_enough {
            continue;
        }
        let Ok(e) = disk_proxies(g, &pts[0], r) else { continue };
        let Ok(f) = disk_proxies(g, &pts[1], r) else { continue };
        if e.iter().any(|v| f.contains(v)) {
            continue;
        }
        let sep = match dg {
            None => separation_ratio_euclid(g, &e, &f),
            Some(dg) => separation_ratio_deformed(dg, &e, &f),
        };
        let Ok(sep) = sep else { continue };
        if sep > t_max {
            continue;
        }
        let metric = match dg {
            None => ModulusMetric::Euclid,
            Some(dg) => ModulusMetric::Deformed(dg),
        };
        // probe values are upper bounds by construction, so a loose bracket
        // is enough here and keeps many-pair sweeps affordable
        let prob = ModulusProblem::new(g, metric, e, f, p)?.with_gap_target(0.08);
        let sol = discrete_modulus(&prob)?;
        measured.push((sep, sol.value));
    }

    let mut out = Vec::new();
    for &t in t_values {
        let eligible: Vec<&(f64, f64)> = measured.iter().filter(|(sep, _)| *sep <= t).collect();
        if eligible.is_empty() {
            return Err(Error::SampleExhausted { want: pairs_per_t, got: 0 });
        }
        let min_mod = eligible.iter().map(|(_, m)| *m).fold(f64::INFINITY, f64::min);
        out.push(LoewnerSample { t, modulus: min_mod, pairs: eligible.len() });
    }
    Ok(out)
}

impl ModulusSolution {
    pub fn write_density_csv<W: std::io::Write>(
        &self,
        g: &MetricGraph,
        mut out: W,
    ) -> std::io::Result<()> {
        if g.dim() == 2 {
            writeln!(out, "id,x,y,rho")?;
        } else {
            writeln!(out, "id,x,y,z,rho")?;
        }
        for v in 0..g.vertex_count() {
            let p = g.point(v as u32);
            let coords: Vec<String> =
                (0..g.dim()).map(|i| format!("{:.12}", p.coord(i))).collect();
            writeln!(out, "{v},{},{:.12}", coords.join(","), self.rho[v])?;
        }
        Ok(())
    }
}
