//! Python bindings for the core library. Wrappers stay thin: geometry
//! objects are opaque handles, everything measured comes back as plain
//! floats, lists and dicts, and reports are converted field by field so a
//! session never round-trips through JSON.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qhl::deform::{deform, DeformedGraph};
use qhl::geometry::{BoundaryAnchor, Domain as CoreDomain, Point, Window};
use qhl::graph::{build_graph, MetricGraph, Stencil};
use qhl::gromov::{
    busemann_field, choose_epsilon as core_choose_epsilon, delta_from_matrix, estimate_delta,
    hamenstadt_table, interior_pool, BusemannField, DeltaMode,
};
use qhl::modulus::{discrete_modulus, ModulusMetric, ModulusProblem};
use qhl::qhyp;
use qhl::report::VerificationReport;
use qhl::verify;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn point(c: &[f64]) -> PyResult<Point> {
    Point::from_slice(c).map_err(err)
}

fn window(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Window> {
    Window::new(point(&lo)?, point(&hi)?).map_err(err)
}

fn anchor_from(kind: &str, a: Vec<f64>, b: Vec<f64>) -> PyResult<BoundaryAnchor> {
    match kind {
        "infinity" => BoundaryAnchor::infinity(point(&a)?, point(&b)?).map_err(err),
        "finite" => BoundaryAnchor::finite(point(&a)?, point(&b)?).map_err(err),
        other => Err(PyValueError::new_err(format!(
            "anchor kind `{other}` (use \"infinity\" or \"finite\")"
        ))),
    }
}

fn report_dict<'py>(py: Python<'py>, rep: &VerificationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("property", &rep.property)?;
    d.set_item("h", rep.h)?;
    d.set_item("pass", rep.pass)?;
    d.set_item("samples", rep.samples)?;
    d.set_item("note", &rep.note)?;
    let constants = PyDict::new(py);
    for (k, v) in &rep.constants {
        constants.set_item(k, *v)?;
    }
    d.set_item("constants", constants)?;
    let tolerances = PyDict::new(py);
    for (k, v) in &rep.tolerances {
        tolerances.set_item(k, *v)?;
    }
    d.set_item("tolerances", tolerances)?;
    let witness = PyDict::new(py);
    witness.set_item("points", rep.witness.points.clone())?;
    let values = PyDict::new(py);
    for (k, v) in &rep.witness.values {
        values.set_item(k, *v)?;
    }
    witness.set_item("values", values)?;
    d.set_item("witness", witness)?;
    Ok(d)
}

/// A Euclidean domain clipped to an axis-aligned window.
#[pyclass(frozen)]
struct Domain {
    inner: CoreDomain,
}

#[pymethods]
impl Domain {
    #[staticmethod]
    fn half_plane(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::half_space(2, window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    fn half_space(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::half_space(3, window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (r, lo, hi, dim = 2))]
    fn ball(r: f64, lo: Vec<f64>, hi: Vec<f64>, dim: usize) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::ball(r, dim, window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (lo, hi, dim = 2))]
    fn punctured(lo: Vec<f64>, hi: Vec<f64>, dim: usize) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::punctured_space(dim, window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    fn slit_plane(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::slit_plane(window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    fn polygon(verts: Vec<[f64; 2]>, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::polygon(verts, window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    fn l_shape(lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::l_shape(window(lo, hi)?).map_err(err)? })
    }

    #[staticmethod]
    fn cusp(power: f64, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Domain> {
        Ok(Domain { inner: CoreDomain::cusp(power, window(lo, hi)?).map_err(err)? })
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn contains(&self, p: Vec<f64>) -> PyResult<bool> {
        Ok(self.inner.contains(&point(&p)?))
    }

    /// Distance from `p` to the domain boundary; raises if `p` is outside.
    fn dist_boundary(&self, p: Vec<f64>) -> PyResult<f64> {
        self.inner.dist_boundary(&point(&p)?).map_err(err)
    }

    fn sample_interior(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let pts = self.inner.sample_interior(count, seed).map_err(err)?;
        Ok(pts.iter().map(Point::to_vec).collect())
    }

    fn sample_boundary(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let pts = self.inner.sample_boundary(count, seed).map_err(err)?;
        Ok(pts.iter().map(Point::to_vec).collect())
    }
}

/// Lattice approximation of a domain with edge weights (1/d(u) + 1/d(v))/2.
#[pyclass(frozen)]
struct Graph {
    g: Arc<MetricGraph>,
}

#[pymethods]
impl Graph {
    #[new]
    #[pyo3(signature = (domain, h, stencil = None))]
    fn new(domain: &Domain, h: f64, stencil: Option<&str>) -> PyResult<Graph> {
        let st = match stencil {
            Some(s) => Stencil::parse(s.trim_start_matches('s')).map_err(err)?,
            None => Stencil::default_for(domain.inner.dim()),
        };
        let g = build_graph(&domain.inner, h, st).map_err(err)?;
        Ok(Graph { g: Arc::new(g) })
    }

    fn vertex_count(&self) -> usize {
        self.g.vertex_count()
    }

    fn h(&self) -> f64 {
        self.g.h()
    }

    fn point(&self, v: u32) -> Vec<f64> {
        self.g.point(v).to_vec()
    }

    fn depth(&self, v: u32) -> f64 {
        self.g.depth(v)
    }

    /// Nearest graph vertex to `p` and its offset.
    fn snap(&self, p: Vec<f64>) -> PyResult<(u32, f64)> {
        self.g.snap(&point(&p)?).map_err(err)
    }

    /// Quasihyperbolic distance between the vertices nearest to `a` and `b`.
    fn distance(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
        qhyp::qh_distance(&self.g, &point(&a)?, &point(&b)?).map_err(err)
    }

    /// Exact quasihyperbolic distance when the domain has one, else None.
    fn closed_form(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<Option<f64>> {
        Ok(qhyp::closed_form_qh(self.g.domain(), &point(&a)?, &point(&b)?))
    }

    fn geodesic<'py>(
        &self,
        py: Python<'py>,
        a: Vec<f64>,
        b: Vec<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let geo = qhyp::qh_geodesic(&self.g, &point(&a)?, &point(&b)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("qh_length", geo.len_qh())?;
        d.set_item("euclid_length", geo.len_euclid())?;
        d.set_item("euclid_diameter", geo.diam_euclid())?;
        d.set_item("points", geo.points().iter().map(Point::to_vec).collect::<Vec<_>>())?;
        Ok(d)
    }

    /// Four-point hyperbolicity defect over a sampled interior pool.
    #[pyo3(signature = (pool = 16, quadruples = 4000, seed = 7))]
    fn delta(&self, pool: usize, quadruples: u64, seed: u64) -> PyResult<f64> {
        let pts = interior_pool(&self.g, pool, seed, 4.0 * self.g.h(), 0.05).map_err(err)?;
        let est = estimate_delta(&self.g, &pts, DeltaMode::Random { count: quadruples, seed })
            .map_err(err)?;
        Ok(est.delta)
    }

    /// Busemann field for a boundary anchor, normalized at `base`.
    /// `anchor` is ("infinity", base_pt, direction) or ("finite", pt, inward).
    fn busemann(
        &self,
        anchor: (String, Vec<f64>, Vec<f64>),
        base: Vec<f64>,
        r: f64,
    ) -> PyResult<Busemann> {
        let a = anchor_from(&anchor.0, anchor.1, anchor.2)?;
        let field = busemann_field(&self.g, &a, &point(&base)?, r).map_err(err)?;
        Ok(Busemann { field })
    }

    /// Vertex ids within `band` of the circle |p - c| = r.
    fn ring(&self, c: Vec<f64>, r: f64, band: f64) -> PyResult<Vec<u32>> {
        let c = point(&c)?;
        Ok(self.g.select_vertices(|p| (p.dist(&c) - r).abs() <= band))
    }

    /// Vertex ids inside the axis-aligned box [lo, hi].
    fn in_box(&self, lo: Vec<f64>, hi: Vec<f64>) -> PyResult<Vec<u32>> {
        let n = self.g.dim();
        if lo.len() != n || hi.len() != n {
            return Err(PyValueError::new_err("box corners must match the graph dimension"));
        }
        Ok(self.g.select_vertices(|p| {
            (0..n).all(|i| p.coord(i) >= lo[i] && p.coord(i) <= hi[i])
        }))
    }

    /// p-modulus of the curve family connecting vertex sets `e` and `f`.
    #[pyo3(signature = (e, f, p = 2.0, gap = 0.05, deformed = None))]
    fn modulus<'py>(
        &self,
        py: Python<'py>,
        e: Vec<u32>,
        f: Vec<u32>,
        p: f64,
        gap: f64,
        deformed: Option<&Deformed>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let metric = match deformed {
            Some(dg) => ModulusMetric::Deformed(&dg.dg),
            None => ModulusMetric::Euclid,
        };
        let prob = ModulusProblem::new(&self.g, metric, e, f, p)
            .map_err(err)?
            .with_gap_target(gap);
        let sol = discrete_modulus(&prob).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("value", sol.value)?;
        d.set_item("lower_bound", sol.lower_bound)?;
        d.set_item("gap", sol.gap)?;
        d.set_item("iterations", sol.iterations)?;
        Ok(d)
    }

    /// Run a pair-sampling verifier and return its report as a dict.
    /// Properties: gehring_hayman, pommerenke, separation, uniformity.
    #[pyo3(signature = (property, samples = 60, seed = 7, competitors = 3))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        property: &str,
        samples: usize,
        seed: u64,
        competitors: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let pairs = verify::sample_point_pairs(&self.g, samples, seed).map_err(err)?;
        let rep = match property {
            "gehring_hayman" => verify::verify_gehring_hayman(&self.g, &pairs),
            "pommerenke" => verify::verify_pommerenke(&self.g, &pairs),
            "separation" => verify::verify_separation(&self.g, &pairs, competitors, seed),
            "uniformity" => verify::verify_uniformity(&self.g, &pairs),
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown property `{other}` (use gehring_hayman, pommerenke, separation \
                     or uniformity)"
                )))
            }
        }
        .map_err(err)?;
        report_dict(py, &rep)
    }
}

/// Busemann function on a graph: b(x) = lim (d(x, z) - d(base, z)) along
/// a geodesic ray to the anchor, realized with a deep proxy vertex.
#[pyclass(frozen)]
struct Busemann {
    field: BusemannField,
}

#[pymethods]
impl Busemann {
    fn value_at(&self, p: Vec<f64>) -> PyResult<f64> {
        self.field.value_at(&point(&p)?).map_err(err)
    }

    fn values(&self) -> Vec<f64> {
        self.field.values().to_vec()
    }

    /// Conformal deformation with density exp(-eps * b).
    fn deform(&self, eps: f64) -> PyResult<Deformed> {
        Ok(Deformed { dg: deform(&self.field, eps).map_err(err)? })
    }

    /// Pairwise boundary metric table: rho from Gromov products, dist as
    /// the induced path metric, with rho/2 <= dist <= rho by construction.
    fn boundary_table<'py>(
        &self,
        py: Python<'py>,
        points: Vec<Vec<f64>>,
        eps: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let pts = points.iter().map(|c| point(c)).collect::<PyResult<Vec<_>>>()?;
        let table = hamenstadt_table(&self.field, &pts, eps).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("eps", table.eps)?;
        d.set_item("requested_eps", table.requested_eps)?;
        d.set_item("rho", table.rho)?;
        d.set_item("dist", table.dist)?;
        Ok(d)
    }
}

/// A graph with the conformally deformed metric exp(-eps * b) ds.
#[pyclass(frozen)]
struct Deformed {
    dg: DeformedGraph,
}

#[pymethods]
impl Deformed {
    fn eps(&self) -> f64 {
        self.dg.eps()
    }

    fn rho(&self, v: u32) -> f64 {
        self.dg.rho(v)
    }

    fn d_eps(&self, v: u32) -> f64 {
        self.dg.d_eps(v)
    }

    fn total_measure(&self) -> f64 {
        self.dg.total_measure()
    }

    fn distance(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
        self.dg.distance(&point(&a)?, &point(&b)?).map_err(err)
    }

    /// Harnack-style comparison of the deformed metric against the base
    /// quasihyperbolic one over sampled pairs; returns the report dict.
    #[pyo3(signature = (pairs = 200, seed = 7))]
    fn verify_bounds<'py>(
        &self,
        py: Python<'py>,
        pairs: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let g = self.dg.base();
        let sampled = verify::sample_point_pairs(g, pairs, seed).map_err(err)?;
        let rep = verify::verify_deformation_bounds(g, &self.dg, &sampled).map_err(err)?;
        report_dict(py, &rep)
    }
}

/// Epsilon for which the exponential boundary metric stays bi-Lipschitz
/// to its guaranteed envelope, given a hyperbolicity defect.
#[pyfunction]
fn choose_epsilon(delta: f64) -> f64 {
    core_choose_epsilon(delta)
}

/// Exact four-point hyperbolicity defect of an explicit distance matrix.
#[pyfunction]
fn delta_of_matrix(matrix: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(delta_from_matrix(&matrix, DeltaMode::Exhaustive).map_err(err)?.delta)
}

#[pymodule]
fn qhl_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Graph>()?;
    m.add_class::<Busemann>()?;
    m.add_class::<Deformed>()?;
    m.add_function(wrap_pyfunction!(choose_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(delta_of_matrix, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
