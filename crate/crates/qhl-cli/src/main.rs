//! Command-line front end: builds domains and grids, runs the solvers and
//! verifiers, and writes JSON / CSV / SVG artifacts.
//!
//! Exit codes: 0 success, 1 a verifier produced a failing report, 2 usage
//! or input error.

mod output;
mod spec;

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use output::{report_json, OutTarget, RunConfig};
use qhl::deform::{deform, DeformedGraph};
use qhl::geometry::{BoundaryAnchor, Domain, Point};
use qhl::graph::{build_graph, MetricGraph, Stencil, Weighting};
use qhl::gromov::{busemann_field, choose_epsilon, estimate_delta, interior_pool, DeltaMode};
use qhl::modulus::{discrete_modulus, ModulusMetric, ModulusProblem};
use qhl::qhyp::closed_form_qh;
use qhl::report::{apply_refinement, emit_svg, Overlay, VerificationReport};
use qhl::verify;
use spec::{parse_anchor, parse_point, parse_scales, parse_set, DomainSpec};

#[derive(Parser)]
#[command(name = "qhl", version, about = "quasihyperbolic geometry toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trace a shortest path between two interior points (CSV)
    Geodesic(GeodesicArgs),
    /// Estimate the four-point hyperbolicity constant
    Delta(DeltaArgs),
    /// Compute a renormalized distance field from a boundary anchor
    Busemann(BusemannArgs),
    /// Conformally deform the metric along a Busemann field
    Deform(DeformArgs),
    /// Discrete p-modulus of the curve family connecting two vertex sets
    Modulus(ModulusArgs),
    /// Run a property verifier and emit its report
    Verify(VerifyArgs),
    /// Re-render a stored report as an SVG figure
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Domain spec file (JSON)
    #[arg(long)]
    domain: String,
    /// Grid spacing
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    /// Neighbor stencil: s8 or s16 (2-D), s26 (3-D)
    #[arg(long, default_value = "s8")]
    stencil: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Output target: `-` for stdout, a .json path, or a directory
    #[arg(long, default_value = "-")]
    out: String,
    /// Comma-separated artifact kinds: json, csv, svg
    #[arg(long, default_value = "json")]
    formats: String,
}

#[derive(Args)]
struct GeodesicArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Start point, "x,y"
    #[arg(long)]
    from: String,
    /// End point, "x,y"
    #[arg(long)]
    to: String,
    /// Path metric: qh or euclid
    #[arg(long, default_value = "qh")]
    weighting: String,
    /// Also dump the whole grid (vertices.csv, edges.csv)
    #[arg(long)]
    dump_graph: bool,
}

#[derive(Args)]
struct DeltaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Interior base-point pool size
    #[arg(long, default_value_t = 24)]
    pool: usize,
    /// Random quadruples to test (ignored with --exhaustive)
    #[arg(long, default_value_t = 20000)]
    quadruples: u64,
    /// Test every 4-subset of the pool
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct BusemannArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Anchor: "finite:px,py,ix,iy" or "infinity:bx,by,dx,dy"
    #[arg(long)]
    anchor: String,
    /// Renormalization base point, "x,y"
    #[arg(long)]
    base: String,
    /// Anchor proxy radius
    #[arg(long, default_value_t = 4.0)]
    r: f64,
}

#[derive(Args)]
struct DeformArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    anchor: String,
    #[arg(long)]
    base: String,
    #[arg(long, default_value_t = 4.0)]
    r: f64,
    /// Deformation scale; estimated from the hyperbolicity constant if unset
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct ModulusArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First continuum: "circle:cx,cy,r", "segment:x0,y0,x1,y1", "rect:..."
    #[arg(long)]
    e_set: String,
    /// Second continuum, same formats
    #[arg(long)]
    f_set: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Length/measure structure: euclid, qh, or deformed
    #[arg(long, default_value = "euclid")]
    metric: String,
    /// Relative duality-gap target for the solver
    #[arg(long, default_value_t = 0.03)]
    gap: f64,
    /// Selector band width around segments (defaults to 0.75 h)
    #[arg(long)]
    band: Option<f64>,
    /// Busemann anchor (deformed metric only)
    #[arg(long)]
    anchor: Option<String>,
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    r: f64,
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Property: gehring_hayman, pommerenke, separation, faltensatz,
    /// uniformity, llc, boundary_qs, deformation, bhk_bounds, bhk314,
    /// starlike, anchor_stability
    property: String,
    #[command(flatten)]
    common: CommonArgs,
    /// Sampled pairs / trials / triples, per property
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Competitor curves per pair (separation)
    #[arg(long, default_value_t = 3)]
    competitors: usize,
    /// Cross-section selector (faltensatz), e.g. "segment:0.5,-1,0.5,1"
    #[arg(long)]
    sigma: Option<String>,
    /// Cross-section band width (defaults to 0.55 h)
    #[arg(long)]
    sigma_band: Option<f64>,
    /// Boundary feature the scale sweep zooms toward (uniformity)
    #[arg(long, default_value = "0,0")]
    probe: String,
    /// Sweep scales, largest to smallest (uniformity)
    #[arg(long, default_value = "0.4,0.2,0.1")]
    scales: String,
    #[arg(long, default_value_t = 8)]
    pairs_per_scale: usize,
    /// Boundary anchor; repeat for starlike
    #[arg(long)]
    anchor: Vec<String>,
    #[arg(long)]
    base: Option<String>,
    #[arg(long, default_value_t = 4.0)]
    r: f64,
    /// Visibility scale; estimated from the hyperbolicity constant if unset
    #[arg(long)]
    eps: Option<f64>,
    /// Hyperbolicity constant input (anchor_stability); estimated if unset
    #[arg(long)]
    delta: Option<f64>,
    /// Uniformity constant input (bhk_bounds); fitted on the fly if unset
    #[arg(long)]
    a_hat: Option<f64>,
    /// Skip the h -> h/2 stability pass (pommerenke)
    #[arg(long)]
    skip_refine: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored report to render
    #[arg(long = "in")]
    input: String,
    /// Domain spec file the report was produced on
    #[arg(long)]
    domain: String,
    #[arg(long, default_value = "-")]
    out: String,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    if let Ok(v) = std::env::var("QHL_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Geodesic(a) => run_geodesic(a),
        Cmd::Delta(a) => run_delta(a),
        Cmd::Busemann(a) => run_busemann(a),
        Cmd::Deform(a) => run_deform(a),
        Cmd::Modulus(a) => run_modulus(a),
        Cmd::Verify(a) => run_verify(a),
        Cmd::Report(a) => run_report(a),
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

/// Everything a handler needs: resolved inputs plus the replay header.
struct Ctx {
    dom: Domain,
    g: Arc<MetricGraph>,
    config: RunConfig,
    target: OutTarget,
    formats: Vec<String>,
}

impl Ctx {
    fn new(command: &str, common: &CommonArgs, samples: usize) -> Result<Ctx> {
        let dspec = DomainSpec::load(&common.domain)?;
        let dom = dspec.to_domain()?;
        let stencil = match common.stencil.as_str() {
            "s8" => Stencil::S8,
            "s16" => Stencil::S16,
            "s26" => Stencil::S26,
            other => bail!("unknown stencil `{other}` (s8 | s16 | s26)"),
        };
        if !(common.h > 0.0) {
            bail!("grid spacing must be positive, got {}", common.h);
        }
        let g = Arc::new(build_graph(&dom, common.h, stencil)?);
        let formats: Vec<String> =
            common.formats.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        for f in &formats {
            if !matches!(f.as_str(), "json" | "csv" | "svg") {
                bail!("unknown format `{f}` (json | csv | svg)");
            }
        }
        let target = OutTarget::parse(&common.out)?;
        let config = RunConfig {
            command: command.to_string(),
            domain_path: common.domain.clone(),
            domain: dspec,
            h: common.h,
            stencil: common.stencil.clone(),
            seed: common.seed,
            samples,
            params: BTreeMap::new(),
            out: common.out.clone(),
            formats: formats.clone(),
        };
        Ok(Ctx { dom, g, config, target, formats })
    }

    fn param(&mut self, key: &str, value: impl std::fmt::Display) {
        self.config.params.insert(key.to_string(), value.to_string());
    }

    fn wants(&self, fmt: &str) -> bool {
        self.formats.iter().any(|f| f == fmt)
    }

    /// Write the report (primary artifact unless CSV took that role) and an
    /// SVG sidecar; returns the report's pass flag as the exit status.
    fn finish(&self, rep: &VerificationReport, overlays: Vec<Overlay>) -> Result<bool> {
        let json = report_json(&self.config, rep)?;
        self.target.write(&format!("{}.json", rep.property), &json)?;
        if self.wants("svg") && self.dom.dim() == 2 {
            let svg = emit_svg(&self.dom, &overlays)?;
            self.target.write_sidecar(&format!("{}.svg", rep.property), &svg)?;
        }
        Ok(rep.pass)
    }
}

fn point_xy(p: &Point) -> [f64; 2] {
    [p.coord(0), p.coord(1)]
}

/// Recompute the geodesic between two stored witness endpoints for figures.
fn witness_geodesic(g: &MetricGraph, rep: &VerificationReport) -> Option<Overlay> {
    let pts = &rep.witness.points;
    if pts.len() < 2 || pts[0].len() != 2 {
        return None;
    }
    let a = Point::xy(pts[0][0], pts[0][1]);
    let b = Point::xy(pts[1][0], pts[1][1]);
    let path = g.shortest_path(&a, &b, Weighting::Qh).ok()?;
    let line = path.verts.iter().map(|&v| point_xy(&g.point(v))).collect();
    Some(Overlay::curve("geodesic", line))
}

fn witness_markers(rep: &VerificationReport) -> Option<Overlay> {
    let pts: Vec<[f64; 2]> =
        rep.witness.points.iter().filter(|p| p.len() == 2).map(|p| [p[0], p[1]]).collect();
    (!pts.is_empty()).then(|| Overlay::markers("witness", pts))
}

fn run_geodesic(a: GeodesicArgs) -> Result<bool> {
    let mut ctx = Ctx::new("geodesic", &a.common, 1)?;
    ctx.param("from", &a.from);
    ctx.param("to", &a.to);
    ctx.param("weighting", &a.weighting);
    let from = parse_point(&a.from)?;
    let to = parse_point(&a.to)?;
    ctx.dom.dist_boundary(&from).with_context(|| format!("start point {}", a.from))?;
    ctx.dom.dist_boundary(&to).with_context(|| format!("end point {}", a.to))?;
    let w = match a.weighting.as_str() {
        "qh" | "quasihyperbolic" => Weighting::Qh,
        "euclid" | "euclidean" => Weighting::Euclid,
        other => bail!("unknown weighting `{other}` (qh | euclid)"),
    };
    let g = &ctx.g;
    let path = g.shortest_path(&from, &to, w)?;

    // per-vertex cumulative lengths under both weightings; edge rule is the
    // trapezoid quadrature the grid itself uses
    let dim = ctx.dom.dim();
    let mut csv = String::from(if dim == 3 {
        "i,x,y,z,d,cum_euclid,cum_qh\n"
    } else {
        "i,x,y,d,cum_euclid,cum_qh\n"
    });
    let (mut ce, mut cq) = (0.0f64, 0.0f64);
    for (i, &v) in path.verts.iter().enumerate() {
        if i > 0 {
            let u = path.verts[i - 1];
            let step = g.point(u).dist(&g.point(v));
            ce += step;
            cq += step * 0.5 * (1.0 / g.depth(u) + 1.0 / g.depth(v));
        }
        let p = g.point(v);
        let coords: Vec<String> = (0..dim).map(|k| format!("{}", p.coord(k))).collect();
        csv.push_str(&format!("{i},{},{},{ce},{cq}\n", coords.join(","), g.depth(v)));
    }
    ctx.target.write("geodesic.csv", &csv)?;

    if ctx.wants("json") {
        let mut rep = VerificationReport::new("geodesic", g.h());
        rep.constant("len_euclid", path.len_euclid);
        rep.constant("len_qh", path.len_qh);
        rep.constant("diam_euclid", path.diam_euclid);
        rep.samples = path.verts.len();
        rep.witness_point(&from).witness_point(&to);
        if let Some(exact) = closed_form_qh(&ctx.dom, &from, &to) {
            rep.constant("closed_form", exact);
            rep.constant("rel_error", (path.len_qh - exact).abs() / exact.max(1e-300));
        }
        let json = report_json(&ctx.config, &rep)?;
        ctx.target.write_sidecar("geodesic.json", &json)?;
    }
    if ctx.wants("svg") && dim == 2 {
        let line = path.verts.iter().map(|&v| point_xy(&g.point(v))).collect();
        let overlays = vec![
            Overlay::curve("geodesic", line),
            Overlay::markers("endpoints", vec![point_xy(&from), point_xy(&to)]),
        ];
        let svg = emit_svg(&ctx.dom, &overlays)?;
        ctx.target.write_sidecar("geodesic.svg", &svg)?;
    }
    if a.dump_graph {
        let mut verts = String::from(if dim == 3 { "id,x,y,z,d\n" } else { "id,x,y,d\n" });
        for v in 0..g.vertex_count() as u32 {
            let p = g.point(v);
            let coords: Vec<String> = (0..dim).map(|k| format!("{}", p.coord(k))).collect();
            verts.push_str(&format!("{v},{},{}\n", coords.join(","), g.depth(v)));
        }
        ctx.target.write_sidecar("vertices.csv", &verts)?;
        let mut edges = String::from("u,v,euclid_len,qh_weight\n");
        for (u, v, elen, qh) in g.undirected_edges() {
            edges.push_str(&format!("{u},{v},{elen},{qh}\n"));
        }
        ctx.target.write_sidecar("edges.csv", &edges)?;
    }
    Ok(true)
}

fn run_delta(a: DeltaArgs) -> Result<bool> {
    let mut ctx = Ctx::new("delta", &a.common, a.pool)?;
    ctx.param("pool", a.pool);
    ctx.param("quadruples", a.quadruples);
    ctx.param("exhaustive", a.exhaustive);
    let g = &ctx.g;
    let pool = interior_pool(g, a.pool, a.common.seed, 4.0 * g.h(), 0.05)?;
    let mode = if a.exhaustive {
        DeltaMode::Exhaustive
    } else {
        DeltaMode::Random { count: a.quadruples, seed: a.common.seed }
    };
    let est = estimate_delta(g, &pool, mode)?;

    let mut rep = VerificationReport::new("delta", g.h());
    rep.constant("delta", est.delta);
    rep.constant("pool", est.pool as f64);
    rep.constant("quadruples", est.quadruples as f64);
    rep.samples = est.quadruples as usize;
    for &i in &est.worst {
        rep.witness_point(&g.point(pool[i]));
    }
    let overlays = witness_markers(&rep).into_iter().collect();
    ctx.finish(&rep, overlays)
}

fn run_busemann(a: BusemannArgs) -> Result<bool> {
    let mut ctx = Ctx::new("busemann", &a.common, 0)?;
    ctx.param("anchor", &a.anchor);
    ctx.param("base", &a.base);
    ctx.param("r", a.r);
    let anchor = parse_anchor(&a.anchor)?;
    let base = parse_point(&a.base)?;
    ctx.dom.dist_boundary(&base).with_context(|| format!("base point {}", a.base))?;
    let g = &ctx.g;
    let field = busemann_field(g, &anchor, &base, a.r)?;

    let vals = field.values();
    let finite = vals.iter().cloned().filter(|b| b.is_finite());
    let mut rep = VerificationReport::new("busemann", g.h());
    rep.constant("r", a.r);
    rep.constant("b_min", finite.clone().fold(f64::INFINITY, f64::min));
    rep.constant("b_max", finite.fold(f64::NEG_INFINITY, f64::max));
    rep.samples = g.vertex_count();
    rep.witness_point(&g.point(field.anchor_vertex()));
    rep.witness_point(&g.point(field.base_vertex()));
    rep.witness_value("b_at_base", field.value(field.base_vertex()));

    if ctx.wants("csv") {
        let dim = ctx.dom.dim();
        let mut csv = String::from(if dim == 3 { "id,x,y,z,b\n" } else { "id,x,y,b\n" });
        for v in 0..g.vertex_count() as u32 {
            let p = g.point(v);
            let coords: Vec<String> = (0..dim).map(|k| format!("{}", p.coord(k))).collect();
            csv.push_str(&format!("{v},{},{}\n", coords.join(","), field.value(v)));
        }
        ctx.target.write_sidecar("busemann.csv", &csv)?;
    }
    let overlays = witness_markers(&rep).into_iter().collect();
    ctx.finish(&rep, overlays)
}

/// Visibility scale from a quick hyperbolicity estimate when none is given.
fn pick_eps(g: &Arc<MetricGraph>, seed: u64, eps: Option<f64>) -> Result<f64> {
    if let Some(e) = eps {
        return Ok(e);
    }
    let pool = interior_pool(g, 16, seed, 4.0 * g.h(), 0.05)?;
    let est = estimate_delta(g, &pool, DeltaMode::Random { count: 4000, seed })?;
    Ok(choose_epsilon(est.delta))
}

fn build_field(
    g: &Arc<MetricGraph>,
    anchor: &str,
    base: &str,
    r: f64,
) -> Result<qhl::gromov::BusemannField> {
    let anchor = parse_anchor(anchor)?;
    let base_pt = parse_point(base)?;
    g.domain().dist_boundary(&base_pt).with_context(|| format!("base point {base}"))?;
    Ok(busemann_field(g, &anchor, &base_pt, r)?)
}

fn run_deform(a: DeformArgs) -> Result<bool> {
    let mut ctx = Ctx::new("deform", &a.common, 0)?;
    ctx.param("anchor", &a.anchor);
    ctx.param("base", &a.base);
    ctx.param("r", a.r);
    let g = ctx.g.clone();
    let eps = pick_eps(&g, a.common.seed, a.eps)?;
    ctx.param("eps", eps);
    let field = build_field(&g, &a.anchor, &a.base, a.r)?;
    let dg = deform(&field, eps)?;

    let mut rep = VerificationReport::new("deform", g.h());
    rep.constant("eps", eps);
    rep.constant("max_d_eps", dg.max_d_eps());
    rep.constant("total_measure", dg.total_measure());
    rep.samples = g.vertex_count();
    rep.witness_point(&g.point(field.anchor_vertex()));
    rep.witness_point(&g.point(field.base_vertex()));

    if ctx.wants("csv") {
        let dim = ctx.dom.dim();
        let mut csv =
            String::from(if dim == 3 { "id,x,y,z,rho,d_eps\n" } else { "id,x,y,rho,d_eps\n" });
        for v in 0..g.vertex_count() as u32 {
            let p = g.point(v);
            let coords: Vec<String> = (0..dim).map(|k| format!("{}", p.coord(k))).collect();
            csv.push_str(&format!("{v},{},{},{}\n", coords.join(","), dg.rho(v), dg.d_eps(v)));
        }
        ctx.target.write_sidecar("deform.csv", &csv)?;
    }
    let overlays = witness_markers(&rep).into_iter().collect();
    ctx.finish(&rep, overlays)
}

fn run_modulus(a: ModulusArgs) -> Result<bool> {
    let mut ctx = Ctx::new("modulus", &a.common, 0)?;
    ctx.param("e_set", &a.e_set);
    ctx.param("f_set", &a.f_set);
    ctx.param("p", a.p);
    ctx.param("metric", &a.metric);
    ctx.param("gap", a.gap);
    let g = ctx.g.clone();
    let band = a.band.unwrap_or(0.75 * g.h());
    let e = parse_set(&a.e_set)?.select(&g, band)?;
    let f = parse_set(&a.f_set)?.select(&g, band)?;

    // the deformed metric borrows its graph, so build it before the problem
    let dg: Option<DeformedGraph> = if a.metric == "deformed" {
        let anchor = a.anchor.as_deref().ok_or_else(|| anyhow!("deformed metric needs --anchor"))?;
        let base = a.base.as_deref().ok_or_else(|| anyhow!("deformed metric needs --base"))?;
        let eps = pick_eps(&g, a.common.seed, a.eps)?;
        ctx.param("eps", eps);
        let field = build_field(&g, anchor, base, a.r)?;
        Some(deform(&field, eps)?)
    } else {
        None
    };
    let metric = match a.metric.as_str() {
        "euclid" | "euclidean" => ModulusMetric::Euclid,
        "qh" | "quasihyperbolic" => ModulusMetric::Qh,
        "deformed" => ModulusMetric::Deformed(dg.as_ref().unwrap()),
        other => bail!("unknown metric `{other}` (euclid | qh | deformed)"),
    };
    let (e_len, f_len) = (e.len(), f.len());
    let e_pts: Vec<[f64; 2]> = e.iter().map(|&v| point_xy(&g.point(v))).collect();
    let f_pts: Vec<[f64; 2]> = f.iter().map(|&v| point_xy(&g.point(v))).collect();
    let prob = ModulusProblem::new(&g, metric, e, f, a.p)?.with_gap_target(a.gap);
    let sol = discrete_modulus(&prob)?;

    let mut rep = VerificationReport::new("modulus", g.h());
    rep.constant("value", sol.value);
    rep.constant("lower_bound", sol.lower_bound);
    rep.constant("gap", sol.gap);
    rep.constant("p", a.p);
    rep.constant("e_vertices", e_len as f64);
    rep.constant("f_vertices", f_len as f64);
    rep.samples = sol.iterations;
    rep.tolerance("gap_target", a.gap);
    if sol.gap > a.gap + 1e-9 {
        rep.fail(&format!("duality gap {:.4} missed the target {:.4}", sol.gap, a.gap));
    }
    if ctx.wants("csv") {
        let dim = ctx.dom.dim();
        let mut csv = String::from(if dim == 3 { "id,x,y,z,rho\n" } else { "id,x,y,rho\n" });
        for (v, r) in sol.rho.iter().enumerate() {
            let p = g.point(v as u32);
            let coords: Vec<String> = (0..dim).map(|k| format!("{}", p.coord(k))).collect();
            csv.push_str(&format!("{v},{},{r}\n", coords.join(",")));
        }
        ctx.target.write_sidecar("modulus_rho.csv", &csv)?;
    }
    let mut overlays = vec![Overlay::markers("E", e_pts), Overlay::markers("F", f_pts)];
    if let Some(path) = sol.paths.first() {
        overlays.push(Overlay::curve(
            "extremal path",
            path.iter().map(|&v| point_xy(&g.point(v))).collect(),
        ));
    }
    ctx.finish(&rep, overlays)
}

fn run_verify(a: VerifyArgs) -> Result<bool> {
    let command = format!("verify {}", a.property);
    let mut ctx = Ctx::new(&command, &a.common, a.samples)?;
    let g = ctx.g.clone();
    let seed = a.common.seed;

    let mut overlays: Vec<Overlay> = Vec::new();
    let rep = match a.property.as_str() {
        "gehring_hayman" => {
            let pairs = verify::sample_point_pairs(&g, a.samples, seed)?;
            let rep = verify::verify_gehring_hayman(&g, &pairs)?;
            overlays.extend(witness_geodesic(&g, &rep));
            rep
        }
        "pommerenke" => {
            let pairs = verify::sample_point_pairs(&g, a.samples, seed)?;
            let mut rep = verify::verify_pommerenke(&g, &pairs)?;
            if !a.skip_refine {
                let fine = Arc::new(build_graph(&ctx.dom, a.common.h / 2.0, stencil_of(&g))?);
                let frep = verify::verify_pommerenke(&fine, &pairs)?;
                apply_refinement(&mut rep, &frep, 0.10);
            }
            ctx.param("skip_refine", a.skip_refine);
            overlays.extend(witness_geodesic(&g, &rep));
            rep
        }
        "separation" => {
            ctx.param("competitors", a.competitors);
            let pairs = verify::sample_point_pairs(&g, a.samples, seed)?;
            let rep = verify::verify_separation(&g, &pairs, a.competitors, seed)?;
            overlays.extend(witness_geodesic(&g, &rep));
            rep
        }
        "faltensatz" => {
            let sig = a.sigma.as_deref().ok_or_else(|| anyhow!("faltensatz needs --sigma"))?;
            ctx.param("sigma", sig);
            let band = a.sigma_band.unwrap_or(0.55 * g.h());
            ctx.param("sigma_band", band);
            let sigma = parse_set(sig)?.select(&g, band)?;
            let mut rep = verify::verify_faltensatz(&g, &sigma, a.samples, seed)?;

            // composition cross-check: the escape bound is controlled by the
            // three route-stability constants fitted independently
            let pairs = verify::sample_point_pairs(&g, a.samples.max(30), seed)?;
            let gh = verify::verify_gehring_hayman(&g, &pairs)?;
            let sp = verify::verify_separation(&g, &pairs, a.competitors, seed)?;
            let po = verify::verify_pommerenke(&g, &pairs)?;
            let bound = 1.5 * gh.constants["C_gh"] * sp.constants["C_sp"] * po.constants["R_po"];
            rep.constant("C_gh", gh.constants["C_gh"]);
            rep.constant("C_sp", sp.constants["C_sp"]);
            rep.constant("R_po", po.constants["R_po"]);
            rep.constant("composite_bound", bound);
            if rep.constants["A"] > bound {
                rep.fail(&format!(
                    "escape constant {:.3} exceeds the composite bound {:.3}",
                    rep.constants["A"], bound
                ));
            }
            let sig_pts: Vec<[f64; 2]> = sigma
                .iter()
                .step_by(4)
                .map(|&v| point_xy(&g.point(v)))
                .collect();
            overlays.push(Overlay::markers("cross-section", sig_pts));
            overlays.extend(witness_geodesic(&g, &rep));
            rep
        }
        "uniformity" => {
            let probe = parse_point(&a.probe)?;
            let scales = parse_scales(&a.scales)?;
            ctx.param("probe", &a.probe);
            ctx.param("scales", &a.scales);
            ctx.param("pairs_per_scale", a.pairs_per_scale);
            let pairs = verify::sample_point_pairs(&g, a.samples, seed)?;
            let mut rep = verify::verify_uniformity(&g, &pairs)?;
            let sweep =
                verify::uniformity_sweep(&g, &probe, &scales, a.pairs_per_scale, seed)?;
            for (k, v) in &sweep.constants {
                rep.constant(k, *v);
            }
            for (k, v) in &sweep.tolerances {
                rep.tolerance(k, *v);
            }
            for (k, v) in &sweep.witness.values {
                rep.witness_value(k, *v);
            }
            rep.witness.points.extend(sweep.witness.points.iter().cloned());
            rep.samples += sweep.samples;
            if !sweep.pass {
                rep.fail(&sweep.note);
            }
            overlays.push(Overlay::markers("probe", vec![point_xy(&probe)]));
            overlays.extend(witness_geodesic(&g, &rep));
            rep
        }
        "llc" => verify::verify_llc(&ctx.dom, &g, a.samples.max(30), seed)?,
        "boundary_qs" => {
            let anchor = single_anchor(&a)?;
            let base = a.base.as_deref().ok_or_else(|| anyhow!("boundary_qs needs --base"))?;
            ctx.param("anchor", anchor);
            ctx.param("base", base);
            ctx.param("r", a.r);
            let eps = pick_eps(&g, seed, a.eps)?;
            ctx.param("eps", eps);
            let field = build_field(&g, anchor, base, a.r)?;
            verify::verify_boundary_qs(&ctx.dom, &g, &field, eps, a.samples, seed)?
        }
        "deformation" => {
            let anchor = single_anchor(&a)?;
            let base = a.base.as_deref().ok_or_else(|| anyhow!("deformation needs --base"))?;
            ctx.param("anchor", anchor);
            ctx.param("base", base);
            ctx.param("r", a.r);
            let eps = pick_eps(&g, seed, a.eps)?;
            ctx.param("eps", eps);
            let field = build_field(&g, anchor, base, a.r)?;
            let dg = deform(&field, eps)?;
            let pairs = verify::sample_point_pairs(&g, a.samples, seed)?;
            verify::verify_deformation_bounds(&g, &dg, &pairs)?
        }
        "bhk_bounds" => {
            let pairs = verify::sample_point_pairs(&g, a.samples, seed)?;
            let a_hat = match a.a_hat {
                Some(v) => v,
                None => verify::verify_uniformity(&g, &pairs)?.constants["A"],
            };
            ctx.param("a_hat", a_hat);
            let mut rep = verify::verify_bhk_uniform_bounds(&g, &pairs, a_hat)?;
            rep.constant("A", a_hat);
            rep
        }
        "bhk314" => verify::verify_bhk314(&g, a.samples, seed)?,
        "starlike" => {
            if a.anchor.len() < 2 {
                bail!("starlike needs at least two --anchor flags");
            }
            let anchors: Vec<BoundaryAnchor> =
                a.anchor.iter().map(|s| parse_anchor(s)).collect::<Result<_>>()?;
            ctx.param("anchors", a.anchor.join(";"));
            ctx.param("r", a.r);
            verify::estimate_rough_starlike(&g, &anchors, a.r, a.samples, seed)?
        }
        "anchor_stability" => {
            let anchor = single_anchor(&a)?;
            let base = a.base.as_deref().ok_or_else(|| anyhow!("anchor_stability needs --base"))?;
            ctx.param("anchor", anchor);
            ctx.param("base", base);
            ctx.param("r", a.r);
            let delta = match a.delta {
                Some(d) => d,
                None => {
                    let pool = interior_pool(&g, 16, seed, 4.0 * g.h(), 0.05)?;
                    estimate_delta(&g, &pool, DeltaMode::Random { count: 4000, seed })?.delta
                }
            };
            ctx.param("delta", delta);
            let anchor = parse_anchor(anchor)?;
            let base_pt = parse_point(base)?;
            ctx.dom.dist_boundary(&base_pt).with_context(|| format!("base point {base}"))?;
            verify::busemann_anchor_stability(&g, &anchor, &base_pt, a.r, delta)?
        }
        other => bail!(
            "unknown property `{other}` (gehring_hayman | pommerenke | separation | \
             faltensatz | uniformity | llc | boundary_qs | deformation | bhk_bounds | \
             bhk314 | starlike | anchor_stability)"
        ),
    };
    if let Some(m) = witness_markers(&rep) {
        overlays.push(m);
    }
    ctx.finish(&rep, overlays)
}

fn single_anchor(a: &VerifyArgs) -> Result<&str> {
    match a.anchor.as_slice() {
        [one] => Ok(one.as_str()),
        [] => bail!("property `{}` needs --anchor", a.property),
        _ => bail!("property `{}` takes exactly one --anchor", a.property),
    }
}

fn stencil_of(g: &MetricGraph) -> Stencil {
    g.stencil()
}

fn run_report(a: ReportArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.input)
        .with_context(|| format!("reading report {}", a.input))?;
    let rep = VerificationReport::from_json(&text)?;
    let dom = DomainSpec::load(&a.domain)?.to_domain()?;
    let overlays: Vec<Overlay> = witness_markers(&rep).into_iter().collect();
    let svg = emit_svg(&dom, &overlays)?;
    let target = OutTarget::parse(&a.out)?;
    target.write(&format!("{}.svg", rep.property), &svg)?;
    Ok(true)
}
