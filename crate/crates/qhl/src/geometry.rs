//! Analytic domains in the plane and in 3-space: membership, exact distance to
//! the boundary, seeded interior/boundary samplers, and boundary anchors used
//! to push reference points toward a boundary point (or toward infinity).
//!
//! Every domain here is an oracle: `dist_boundary` is exact (up to a 1-D line
//! search for the cusp walls), not derived from any discretization. The graph
//! layer leans on that when admitting vertices and weighting edges.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_DIM: usize = 3;

/// A point of R^2 or R^3. The dimension travels with the value so mixed-dim
/// mistakes surface as errors instead of silent zero-padding.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    c: [f64; MAX_DIM],
    dim: usize,
}

impl Point {
    pub fn xy(x: f64, y: f64) -> Point {
        Point { c: [x, y, 0.0], dim: 2 }
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Point {
        Point { c: [x, y, z], dim: 3 }
    }

    pub fn from_slice(v: &[f64]) -> Result<Point> {
        match v.len() {
            2 => Ok(Point::xy(v[0], v[1])),
            3 => Ok(Point::xyz(v[0], v[1], v[2])),
            d => Err(Error::BadDim(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coord(&self, i: usize) -> f64 {
        debug_assert!(i < self.dim);
        self.c[i]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.c[..self.dim].to_vec()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            let d = self.c[i] - other.c[i];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.c[i] * self.c[i];
        }
        s.sqrt()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for i in 0..self.dim {
            s += self.c[i] * other.c[i];
        }
        s
    }

    /// Angle between the position vectors, in [0, pi].
    pub fn angle_between(&self, other: &Point) -> f64 {
        let n = self.norm() * other.norm();
        if n == 0.0 {
            return 0.0;
        }
        (self.dot(other) / n).clamp(-1.0, 1.0).acos()
    }

    /// self + t * dir.
    pub fn offset(&self, dir: &Point, t: f64) -> Point {
        debug_assert_eq!(self.dim, dir.dim);
        let mut c = self.c;
        for i in 0..self.dim {
            c[i] += t * dir.c[i];
        }
        Point { c, dim: self.dim }
    }

    pub fn lerp(a: &Point, b: &Point, t: f64) -> Point {
        debug_assert_eq!(a.dim, b.dim);
        let mut c = a.c;
        for i in 0..a.dim {
            c[i] += t * (b.c[i] - a.c[i]);
        }
        Point { c, dim: a.dim }
    }

    fn normalized(&self) -> Option<Point> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return None;
        }
        let mut c = self.c;
        for x in &mut c {
            *x /= n;
        }
        Some(Point { c, dim: self.dim })
    }
}

impl std::fmt::Debug for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v = &self.c[..self.dim];
        write!(f, "({})", v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", "))
    }
}

/// Axis-aligned truncation box. Unbounded domains are always studied through a
/// window; bounded ones use it as a sanity bound for lattice generation.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    lo: Point,
    hi: Point,
}

impl Window {
    pub fn new(lo: Point, hi: Point) -> Result<Window> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimMismatch { got: hi.dim(), want: lo.dim() });
        }
        for i in 0..lo.dim() {
            if !(lo.coord(i) < hi.coord(i)) {
                return Err(Error::DegenerateParams(format!(
                    "window is empty on axis {i}: [{}, {}]",
                    lo.coord(i),
                    hi.coord(i)
                )));
            }
        }
        Ok(Window { lo, hi })
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi.coord(axis) - self.lo.coord(axis)
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.dim() {
            return false;
        }
        (0..self.dim()).all(|i| p.coord(i) >= self.lo.coord(i) && p.coord(i) <= self.hi.coord(i))
    }

    pub fn center(&self) -> Point {
        Point::lerp(&self.lo, &self.hi, 0.5)
    }
}

#[derive(Clone, Debug)]
enum Kind {
    /// { x_n > 0 }: the upper half-plane for n = 2, upper half-space for n = 3.
    HalfSpace,
    /// { |x| < r }, centered at the origin.
    Ball { r: f64 },
    /// R^n minus the origin.
    PuncturedSpace,
    /// R^2 minus the ray { (t, 0) : t >= 0 }.
    SlitPlane,
    /// Interior of a simple polygon, given by its vertex loop.
    Polygon { verts: Vec<[f64; 2]> },
    /// [0,2]^2 with the closed quadrant [1,2]^2 removed; reentrant corner at (1,1).
    LShape { verts: Vec<[f64; 2]> },
    /// { 0 < x < 1, |y| < x^power }: an outward cusp pinching at the origin.
    Cusp { power: f64 },
}

/// JSON shape for domain files: `{"kind": "...", "params": {...},
/// "window": [[lo...],[hi...]], "dim": n}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
    pub window: [Vec<f64>; 2],
    pub dim: usize,
}

#[derive(Clone, Debug)]
pub struct Domain {
    kind: Kind,
    window: Window,
    dim: usize,
}

const L_SHAPE_VERTS: [[f64; 2]; 6] =
    [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];

impl Domain {
    pub fn half_space(dim: usize, window: Window) -> Result<Domain> {
        Domain::build(Kind::HalfSpace, window, dim)
    }

    pub fn ball(r: f64, dim: usize, window: Window) -> Result<Domain> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::DegenerateParams(format!("ball radius {r}")));
        }
        Domain::build(Kind::Ball { r }, window, dim)
    }

    pub fn punctured_space(dim: usize, window: Window) -> Result<Domain> {
        Domain::build(Kind::PuncturedSpace, window, dim)
    }

    pub fn slit_plane(window: Window) -> Result<Domain> {
        Domain::build(Kind::SlitPlane, window, 2)
    }

    pub fn polygon(verts: Vec<[f64; 2]>, window: Window) -> Result<Domain> {
        if verts.len() < 3 {
            return Err(Error::DegenerateParams(format!("polygon with {} vertices", verts.len())));
        }
        if verts.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::DegenerateParams("polygon vertex is not finite".into()));
        }
        Domain::build(Kind::Polygon { verts }, window, 2)
    }

    pub fn l_shape(window: Window) -> Result<Domain> {
        Domain::build(Kind::LShape { verts: L_SHAPE_VERTS.to_vec() }, window, 2)
    }

    pub fn cusp(power: f64, window: Window) -> Result<Domain> {
        if !(power >= 1.0) || !power.is_finite() {
            return Err(Error::DegenerateParams(format!("cusp power {power}")));
        }
        Domain::build(Kind::Cusp { power }, window, 2)
    }

    fn build(kind: Kind, window: Window, dim: usize) -> Result<Domain> {
        if dim != 2 && dim != 3 {
            return Err(Error::BadDim(dim));
        }
        if window.dim() != dim {
            return Err(Error::DimMismatch { got: window.dim(), want: dim });
        }
        let planar = matches!(
            kind,
            Kind::SlitPlane | Kind::Polygon { .. } | Kind::LShape { .. } | Kind::Cusp { .. }
        );
        if planar && dim != 2 {
            return Err(Error::BadDim(dim));
        }
        Ok(Domain { kind, window, dim })
    }

    pub fn from_spec(spec: &DomainSpec) -> Result<Domain> {
        let lo = Point::from_slice(&spec.window[0])?;
        let hi = Point::from_slice(&spec.window[1])?;
        let window = Window::new(lo, hi)?;
        let p = &spec.params;
        let get = |key: &str, default: f64| p.get(key).and_then(|v| v.as_f64()).unwrap_or(default);
        match spec.kind.as_str() {
            "half_space" | "half_plane" => Domain::half_space(spec.dim, window),
            "ball" | "disk" => Domain::ball(get("r", 1.0), spec.dim, window),
            "punctured_space" | "punctured_plane" => Domain::punctured_space(spec.dim, window),
            "slit_plane" => Domain::slit_plane(window),
            "polygon" => {
                let verts = p
                    .get("vertices")
                    .and_then(|v| serde_json::from_value::<Vec<[f64; 2]>>(v.clone()).ok())
                    .ok_or_else(|| {
                        Error::DegenerateParams("polygon needs params.vertices: [[x,y],...]".into())
                    })?;
                Domain::polygon(verts, window)
            }
            "l_shape" => Domain::l_shape(window),
            "cusp" => Domain::cusp(get("power", 2.0), window),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }

    pub fn from_spec_str(json: &str) -> Result<Domain> {
        let spec: DomainSpec = serde_json::from_str(json)
            .map_err(|e| Error::DegenerateParams(format!("bad domain spec: {e}")))?;
        Domain::from_spec(&spec)
    }

    pub fn to_spec(&self) -> DomainSpec {
        let (kind, params) = match &self.kind {
            Kind::HalfSpace => ("half_space", serde_json::json!({})),
            Kind::Ball { r } => ("ball", serde_json::json!({ "r": r })),
            Kind::PuncturedSpace => ("punctured_space", serde_json::json!({})),
            Kind::SlitPlane => ("slit_plane", serde_json::json!({})),
            Kind::Polygon { verts } => ("polygon", serde_json::json!({ "vertices": verts })),
            Kind::LShape { .. } => ("l_shape", serde_json::json!({})),
            Kind::Cusp { power } => ("cusp", serde_json::json!({ "power": power })),
        };
        DomainSpec {
            kind: kind.to_string(),
            params,
            window: [self.window.lo().to_vec(), self.window.hi().to_vec()],
            dim: self.dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            Kind::HalfSpace => "half_space",
            Kind::Ball { .. } => "ball",
            Kind::PuncturedSpace => "punctured_space",
            Kind::SlitPlane => "slit_plane",
            Kind::Polygon { .. } => "polygon",
            Kind::LShape { .. } => "l_shape",
            Kind::Cusp { .. } => "cusp",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, Kind::HalfSpace | Kind::PuncturedSpace | Kind::SlitPlane)
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.dim {
            return Err(Error::DimMismatch { got: p.dim(), want: self.dim });
        }
        Ok(())
    }

    /// Strict interior membership. Points exactly on the boundary are outside.
    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.dim {
            return false;
        }
        match &self.kind {
            Kind::HalfSpace => p.coord(self.dim - 1) > 0.0,
            Kind::Ball { r } => p.norm() < *r,
            Kind::PuncturedSpace => p.norm() > 0.0,
            Kind::SlitPlane => !(p.coord(1) == 0.0 && p.coord(0) >= 0.0),
            Kind::Polygon { verts } | Kind::LShape { verts } => {
                let q = [p.coord(0), p.coord(1)];
                pnpoly(verts, q) && poly_dist(verts, q) > 0.0
            }
            Kind::Cusp { power } => {
                let (x, y) = (p.coord(0), p.coord(1));
                x > 0.0 && x < 1.0 && y.abs() < x.powf(*power)
            }
        }
    }

    /// Exact Euclidean distance from an interior point to the boundary.
    pub fn dist_boundary(&self, p: &Point) -> Result<f64> {
        self.check_dim(p)?;
        if !self.contains(p) {
            return Err(Error::NotInterior);
        }
        Ok(self.dist_boundary_unchecked(p))
    }

    /// Same metric quantity without the interiority gate; 0 or garbage outside.
    /// The graph builder calls this on raw lattice points after `contains`.
    pub(crate) fn dist_boundary_unchecked(&self, p: &Point) -> f64 {
        match &self.kind {
            Kind::HalfSpace => p.coord(self.dim - 1),
            Kind::Ball { r } => r - p.norm(),
            Kind::PuncturedSpace => p.norm(),
            Kind::SlitPlane => {
                let (x, y) = (p.coord(0), p.coord(1));
                if x >= 0.0 {
                    y.abs()
                } else {
                    (x * x + y * y).sqrt()
                }
            }
            Kind::Polygon { verts } | Kind::LShape { verts } => {
                poly_dist(verts, [p.coord(0), p.coord(1)])
            }
            Kind::Cusp { power } => cusp_dist(*power, [p.coord(0), p.coord(1)]),
        }
    }

    /// Seeded uniform-ish interior sample: rejection from a proposal box. The
    /// cusp proposes x first and y inside the local width so the deep throat
    /// is actually visited; everything else proposes uniformly in the window.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        self.sample_interior_filtered(count, seed, 0.0, 0.0)
    }

    /// Interior sample with a depth floor and a margin (as a fraction of the
    /// window extent) kept from every artificial window face.
    pub fn sample_interior_filtered(
        &self,
        count: usize,
        seed: u64,
        min_depth: f64,
        margin_frac: f64,
    ) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let art = self.artificial_faces();
        let mut pts = Vec::with_capacity(count);
        let max_attempts = count.saturating_mul(200_000).max(200_000);
        for _ in 0..max_attempts {
            if pts.len() == count {
                break;
            }
            let p = self.propose(&mut rng);
            if !self.window.contains(&p) || !self.contains(&p) {
                continue;
            }
            if margin_frac > 0.0 && !self.clears_margin(&p, margin_frac, &art) {
                continue;
            }
            if min_depth > 0.0 && self.dist_boundary_unchecked(&p) < min_depth {
                continue;
            }
            pts.push(p);
        }
        if pts.len() < count {
            return Err(Error::SampleExhausted { want: count, got: pts.len() });
        }
        Ok(pts)
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> Point {
        if let Kind::Cusp { power } = self.kind {
            let xlo = self.window.lo().coord(0).max(0.0);
            let xhi = self.window.hi().coord(0).min(1.0);
            let x = rng.random_range(xlo..xhi);
            let w = x.powf(power);
            let y = rng.random_range(-w..w);
            return Point::xy(x, y);
        }
        let mut c = [0.0; MAX_DIM];
        for (i, v) in c.iter_mut().enumerate().take(self.dim) {
            *v = rng.random_range(self.window.lo().coord(i)..self.window.hi().coord(i));
        }
        Point { c, dim: self.dim }
    }

    /// A window face is artificial when the domain keeps going past it.
    pub fn artificial_faces(&self) -> [[bool; 2]; MAX_DIM] {
        let mut out = [[false; 2]; MAX_DIM];
        let c = self.window.center();
        let eps = 1e-7;
        for axis in 0..self.dim {
            for (side, coord) in
                [(0, self.window.lo().coord(axis)), (1, self.window.hi().coord(axis))]
            {
                let mut probe = c;
                probe.c[axis] = coord + if side == 0 { -eps } else { eps } * self.window.extent(axis).max(1.0);
                out[axis][side] = self.contains(&probe);
            }
        }
        out
    }

    fn clears_margin(&self, p: &Point, frac: f64, art: &[[bool; 2]; MAX_DIM]) -> bool {
        for axis in 0..self.dim {
            let m = frac * self.window.extent(axis);
            if art[axis][0] && p.coord(axis) < self.window.lo().coord(axis) + m {
                return false;
            }
            if art[axis][1] && p.coord(axis) > self.window.hi().coord(axis) - m {
                return false;
            }
        }
        true
    }

    /// Seeded boundary sample, length-proportional on piecewise-linear parts.
    pub fn sample_boundary(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::with_capacity(count);
        let max_attempts = count.saturating_mul(10_000).max(10_000);
        for _ in 0..max_attempts {
            if pts.len() == count {
                break;
            }
            let p = self.propose_boundary(&mut rng)?;
            if self.window.contains(&p) {
                pts.push(p);
            }
        }
        if pts.len() < count {
            return Err(Error::SampleExhausted { want: count, got: pts.len() });
        }
        Ok(pts)
    }

    fn propose_boundary(&self, rng: &mut ChaCha8Rng) -> Result<Point> {
        match &self.kind {
            Kind::HalfSpace => {
                let mut c = [0.0; MAX_DIM];
                for (i, v) in c.iter_mut().enumerate().take(self.dim - 1) {
                    *v = rng.random_range(self.window.lo().coord(i)..self.window.hi().coord(i));
                }
                c[self.dim - 1] = 0.0;
                Ok(Point { c, dim: self.dim })
            }
            Kind::Ball { r } => {
                if self.dim == 2 {
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    Ok(Point::xy(r * t.cos(), r * t.sin()))
                } else {
                    let z = rng.random_range(-1.0..1.0_f64);
                    let t = rng.random_range(0.0..std::f64::consts::TAU);
                    let s = (1.0 - z * z).sqrt();
                    Ok(Point::xyz(r * s * t.cos(), r * s * t.sin(), r * z))
                }
            }
            Kind::PuncturedSpace => Ok(Point { c: [0.0; MAX_DIM], dim: self.dim }),
            Kind::SlitPlane => {
                let hi = self.window.hi().coord(0);
                if hi <= 0.0 {
                    return Err(Error::EmptySample("window misses the slit".into()));
                }
                Ok(Point::xy(rng.random_range(0.0..hi), 0.0))
            }
            Kind::Polygon { verts } | Kind::LShape { verts } => {
                Ok(sample_polyline(verts, true, rng))
            }
            Kind::Cusp { power } => {
                // piecewise-linear proxy of the two walls plus the closing edge
                let mut poly = Vec::with_capacity(2 * 256 + 2);
                for i in 0..=256 {
                    let t = i as f64 / 256.0;
                    poly.push([t, t.powf(*power)]);
                }
                poly.push([1.0, -1.0]);
                for i in (0..=256).rev() {
                    let t = i as f64 / 256.0;
                    poly.push([t, -t.powf(*power)]);
                }
                Ok(sample_polyline(&poly, false, rng))
            }
        }
    }

    /// Polyline sketch of the boundary for figures, clipped to the window
    /// only loosely (renderers clip again). 2-D domains only.
    pub fn boundary_polylines(&self) -> Result<Vec<Vec<[f64; 2]>>> {
        if self.dim != 2 {
            return Err(Error::DegenerateParams("svg is 2-D only".into()));
        }
        let (lo, hi) = (self.window.lo(), self.window.hi());
        Ok(match &self.kind {
            Kind::HalfSpace => vec![vec![[lo.coord(0), 0.0], [hi.coord(0), 0.0]]],
            Kind::Ball { r } => {
                let ring: Vec<[f64; 2]> = (0..=128)
                    .map(|i| {
                        let t = std::f64::consts::TAU * i as f64 / 128.0;
                        [r * t.cos(), r * t.sin()]
                    })
                    .collect();
                vec![ring]
            }
            // the boundary is one point; draw a small cross at the puncture
            Kind::PuncturedSpace => {
                let s = 0.02 * (hi.coord(0) - lo.coord(0)).max(hi.coord(1) - lo.coord(1));
                vec![vec![[-s, 0.0], [s, 0.0]], vec![[0.0, -s], [0.0, s]]]
            }
            Kind::SlitPlane => vec![vec![[0.0, 0.0], [hi.coord(0).max(0.0), 0.0]]],
            Kind::Polygon { verts } | Kind::LShape { verts } => {
                let mut loop_pts: Vec<[f64; 2]> = verts.clone();
                if let Some(&first) = loop_pts.first() {
                    loop_pts.push(first);
                }
                vec![loop_pts]
            }
            Kind::Cusp { power } => {
                let wall = |sign: f64| -> Vec<[f64; 2]> {
                    (0..=256)
                        .map(|i| {
                            let t = i as f64 / 256.0;
                            [t, sign * t.powf(*power)]
                        })
                        .collect()
                };
                vec![wall(1.0), wall(-1.0), vec![[1.0, -1.0], [1.0, 1.0]]]
            }
        })
    }

    /// The reference point z(R) pushed toward a boundary anchor. Far-point
    /// anchors walk straight out (z = base + R dir); boundary-point anchors
    /// step distance 1/R inward from the anchor.
    pub fn anchor_point(&self, anchor: &BoundaryAnchor, r: f64) -> Result<Point> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::AnchorOutOfRange(r));
        }
        let z = match anchor {
            BoundaryAnchor::Infinity { base, direction } => {
                if self.is_bounded() {
                    return Err(Error::AnchorNeedsUnbounded);
                }
                base.offset(direction, r)
            }
            BoundaryAnchor::Finite { point, inward } => point.offset(inward, 1.0 / r),
        };
        self.check_dim(&z)?;
        if !self.contains(&z) {
            return Err(Error::AnchorOutOfRange(r));
        }
        Ok(z)
    }
}

/// A boundary point to aim at: either a finite boundary point with an inward
/// direction, or a point at infinity reached along a ray.
#[derive(Clone, Debug)]
pub enum BoundaryAnchor {
    Infinity { base: Point, direction: Point },
    Finite { point: Point, inward: Point },
}

impl BoundaryAnchor {
    pub fn infinity(base: Point, direction: Point) -> Result<BoundaryAnchor> {
        let direction = direction
            .normalized()
            .ok_or_else(|| Error::DegenerateParams("anchor direction has zero length".into()))?;
        Ok(BoundaryAnchor::Infinity { base, direction })
    }

    pub fn finite(point: Point, inward: Point) -> Result<BoundaryAnchor> {
        let inward = inward
            .normalized()
            .ok_or_else(|| Error::DegenerateParams("anchor direction has zero length".into()))?;
        Ok(BoundaryAnchor::Finite { point, inward })
    }
}

/// Doubling schedule R, 2R, 4R, ... used when checking anchor stability.
pub fn anchor_schedule(r0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| r0 * (1u64 << i) as f64).collect()
}

fn sample_polyline(verts: &[[f64; 2]], closed: bool, rng: &mut ChaCha8Rng) -> Point {
    let n = verts.len();
    let segs = if closed { n } else { n - 1 };
    let mut cum = Vec::with_capacity(segs + 1);
    cum.push(0.0);
    let mut total = 0.0;
    for i in 0..segs {
        let a = verts[i];
        let b = verts[(i + 1) % n];
        total += ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        cum.push(total);
    }
    let u = rng.random_range(0.0..total);
    let k = match cum.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
        Ok(i) => i.min(segs - 1),
        Err(i) => i - 1,
    };
    let a = verts[k];
    let b = verts[(k + 1) % n];
    let seg = cum[k + 1] - cum[k];
    let t = if seg > 0.0 { (u - cum[k]) / seg } else { 0.0 };
    Point::xy(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 { ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (dx, dy) = (p[0] - (a[0] + t * abx), p[1] - (a[1] + t * aby));
    (dx * dx + dy * dy).sqrt()
}

fn poly_dist(verts: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let n = verts.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        best = best.min(seg_dist(p, verts[i], verts[(i + 1) % n]));
    }
    best
}

/// Even-odd rule; arbitrary on the boundary itself, which callers mask with a
/// positive-distance requirement.
fn pnpoly(verts: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = verts.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = (verts[i][0], verts[i][1]);
        let (xj, yj) = (verts[j][0], verts[j][1]);
        if (yi > p[1]) != (yj > p[1]) && p[0] < (xj - xi) * (p[1] - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Distance to the wall y = sign * x^power over x in [0, 1]: coarse scan plus
/// golden-section refinement of the squared distance along the wall parameter.
fn cusp_wall_dist(power: f64, p: [f64; 2], sign: f64) -> f64 {
    let f = |t: f64| {
        let dx = p[0] - t;
        let dy = p[1] - sign * t.powf(power);
        dx * dx + dy * dy
    };
    let n = 64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let v = f(i as f64 / n as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = ((best_i as f64 - 1.0) / n as f64).max(0.0);
    let mut b = ((best_i as f64 + 1.0) / n as f64).min(1.0);
    let phi = 0.5 * (3.0 - 5.0_f64.sqrt());
    let (mut x1, mut x2) = (a + phi * (b - a), b - phi * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-13 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - phi * (b - a);
            f2 = f(x2);
        }
    }
    f(0.5 * (a + b)).min(best).sqrt()
}

fn cusp_dist(power: f64, p: [f64; 2]) -> f64 {
    let walls = cusp_wall_dist(power, p, 1.0).min(cusp_wall_dist(power, p, -1.0));
    walls.min(seg_dist(p, [1.0, -1.0], [1.0, 1.0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win2(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::new(Point::xy(x0, y0), Point::xy(x1, y1)).unwrap()
    }

    fn upper_half_plane() -> Domain {
        Domain::half_space(2, win2(-2.0, 0.0, 2.0, 2.0)).unwrap()
    }

    #[test]
    fn half_plane_distance_is_height() {
        let d = upper_half_plane();
        assert_eq!(d.dist_boundary(&Point::xy(0.0, 1.0)).unwrap(), 1.0);
        assert_eq!(d.dist_boundary(&Point::xy(-1.3, 0.25)).unwrap(), 0.25);
        assert!(matches!(d.dist_boundary(&Point::xy(0.0, -1.0)), Err(Error::NotInterior)));
        assert!(matches!(d.dist_boundary(&Point::xy(0.0, 0.0)), Err(Error::NotInterior)));
    }

    #[test]
    fn disk_distance() {
        let d = Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap();
        assert!((d.dist_boundary(&Point::xy(0.5, 0.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.dist_boundary(&Point::xy(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slit_plane_membership_and_distance() {
        let d = Domain::slit_plane(win2(-2.0, -2.0, 3.0, 2.0)).unwrap();
        assert!(!d.contains(&Point::xy(1.0, 0.0)));
        assert!(!d.contains(&Point::xy(0.0, 0.0)));
        assert!(d.contains(&Point::xy(-1.0, 0.0)));
        assert!((d.dist_boundary(&Point::xy(1.0, 0.3)).unwrap() - 0.3).abs() < 1e-15);
        assert!((d.dist_boundary(&Point::xy(-1.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        // distance to the tip from the left half
        let v = d.dist_boundary(&Point::xy(-0.3, 0.4)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    /// Distance at the reentrant corner must match a brute-force minimum over
    /// a dense boundary sample that includes the polygon vertices exactly.
    #[test]
    fn l_shape_corner_distance_matches_brute_force() {
        let d = Domain::l_shape(win2(0.0, 0.0, 2.0, 2.0)).unwrap();
        let p = Point::xy(0.98, 0.97);
        let got = d.dist_boundary(&p).unwrap();

        let mut brute = f64::INFINITY;
        let per_edge = 200_000usize;
        for i in 0..L_SHAPE_VERTS.len() {
            let a = L_SHAPE_VERTS[i];
            let b = L_SHAPE_VERTS[(i + 1) % L_SHAPE_VERTS.len()];
            for k in 0..=per_edge {
                let t = k as f64 / per_edge as f64;
                let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let dist = ((p.coord(0) - q[0]).powi(2) + (p.coord(1) - q[1]).powi(2)).sqrt();
                brute = brute.min(dist);
            }
        }
        assert!((got - brute).abs() < 1e-9, "got {got}, brute {brute}");
        // nearest boundary point is the corner itself
        assert!((got - (0.02f64.powi(2) + 0.03f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l_shape_membership() {
        let d = Domain::l_shape(win2(0.0, 0.0, 2.0, 2.0)).unwrap();
        assert!(d.contains(&Point::xy(0.5, 1.5)));
        assert!(d.contains(&Point::xy(1.5, 0.5)));
        assert!(!d.contains(&Point::xy(1.5, 1.5)));
        assert!(!d.contains(&Point::xy(1.0, 1.5))); // on the inner wall
    }

    /// Wall-distance line search vs. a dense scan of the wall polylines.
    #[test]
    fn cusp_distance_matches_dense_scan() {
        let pw = 2.0;
        let d = Domain::cusp(pw, win2(0.0, -1.0, 1.0, 1.0)).unwrap();
        for p in [Point::xy(0.5, 0.1), Point::xy(0.2, 0.0), Point::xy(0.9, -0.5)] {
            let got = d.dist_boundary(&p).unwrap();
            let mut brute = f64::INFINITY;
            let n = 2_000_000usize;
            for k in 0..=n {
                let t = k as f64 / n as f64;
                let w = t.powf(pw);
                for s in [w, -w] {
                    let dist = ((p.coord(0) - t).powi(2) + (p.coord(1) - s).powi(2)).sqrt();
                    brute = brute.min(dist);
                }
            }
            brute = brute.min(seg_dist([p.coord(0), p.coord(1)], [1.0, -1.0], [1.0, 1.0]));
            assert!((got - brute).abs() < 1e-9, "p {p:?}: got {got}, brute {brute}");
        }
    }

    #[test]
    fn membership_and_distance_agree_on_probes() {
        let domains: Vec<Domain> = vec![
            upper_half_plane(),
            Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap(),
            Domain::punctured_space(2, win2(-2.0, -2.0, 2.0, 2.0)).unwrap(),
            Domain::slit_plane(win2(-2.0, -2.0, 2.0, 2.0)).unwrap(),
            Domain::l_shape(win2(0.0, 0.0, 2.0, 2.0)).unwrap(),
            Domain::cusp(2.0, win2(0.0, -1.0, 1.0, 1.0)).unwrap(),
            Domain::half_space(3, Window::new(Point::xyz(-1.0, -1.0, 0.0), Point::xyz(1.0, 1.0, 2.0)).unwrap()).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dom in &domains {
            for _ in 0..10_000 {
                let mut c = [0.0; MAX_DIM];
                for (i, v) in c.iter_mut().enumerate().take(dom.dim()) {
                    *v = rng.random_range(dom.window().lo().coord(i)..dom.window().hi().coord(i));
                }
                let p = Point { c, dim: dom.dim() };
                match dom.dist_boundary(&p) {
                    Ok(v) => {
                        assert!(dom.contains(&p));
                        assert!(v > 0.0, "{} at {p:?}: d = {v}", dom.kind_name());
                    }
                    Err(Error::NotInterior) => assert!(!dom.contains(&p)),
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn boundary_distance_is_one_lipschitz() {
        let domains: Vec<Domain> = vec![
            upper_half_plane(),
            Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap(),
            Domain::slit_plane(win2(-2.0, -2.0, 2.0, 2.0)).unwrap(),
            Domain::l_shape(win2(0.0, 0.0, 2.0, 2.0)).unwrap(),
            Domain::cusp(2.5, win2(0.0, -1.0, 1.0, 1.0)).unwrap(),
        ];
        for (di, dom) in domains.iter().enumerate() {
            let pts = dom.sample_interior(400, 100 + di as u64).unwrap();
            for w in pts.chunks(2) {
                if w.len() < 2 {
                    continue;
                }
                let (a, b) = (&w[0], &w[1]);
                let da = dom.dist_boundary(a).unwrap();
                let db = dom.dist_boundary(b).unwrap();
                assert!(
                    (da - db).abs() <= a.dist(b) + 1e-9,
                    "{}: |{da} - {db}| > |{a:?} - {b:?}|",
                    dom.kind_name()
                );
            }
        }
    }

    #[test]
    fn samplers_are_deterministic_and_interior() {
        let dom = Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap();
        let a = dom.sample_interior(200, 7).unwrap();
        let b = dom.sample_interior(200, 7).unwrap();
        let c = dom.sample_interior(200, 8).unwrap();
        assert_eq!(a.len(), 200);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.to_vec(), q.to_vec());
        }
        assert!(a.iter().zip(&c).any(|(p, q)| p.to_vec() != q.to_vec()));
        for p in &a {
            assert!(dom.contains(p) && dom.window().contains(p));
        }
    }

    #[test]
    fn interior_filter_respects_depth_and_margin() {
        let dom = upper_half_plane();
        let pts = dom.sample_interior_filtered(300, 3, 0.15, 0.2).unwrap();
        for p in &pts {
            assert!(dom.dist_boundary(p).unwrap() >= 0.15);
            // x faces are artificial (domain continues), y = 0 face is real
            assert!(p.coord(0) >= -2.0 + 0.2 * 4.0 - 1e-12);
            assert!(p.coord(0) <= 2.0 - 0.2 * 4.0 + 1e-12);
        }
        // depth floor alone must not impose the x margin
        let free = dom.sample_interior_filtered(300, 3, 0.15, 0.0).unwrap();
        assert!(free.iter().any(|p| p.coord(0) < -1.3 || p.coord(0) > 1.3));
    }

    #[test]
    fn cusp_sampler_reaches_the_throat() {
        let dom = Domain::cusp(2.0, win2(0.0, -1.0, 1.0, 1.0)).unwrap();
        let pts = dom.sample_interior(100, 7).unwrap();
        let min_d = pts.iter().map(|p| dom.dist_boundary(p).unwrap()).fold(f64::INFINITY, f64::min);
        assert!(min_d < 1e-3, "deepest sample only reaches d = {min_d}");
    }

    #[test]
    fn boundary_sampler_is_length_proportional_on_polygons() {
        let dom = Domain::polygon(
            vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
            win2(0.0, 0.0, 2.0, 1.0),
        )
        .unwrap();
        let pts = dom.sample_boundary(6000, 5).unwrap();
        // classify by nearest edge; expect 1/3 on each long edge, 1/6 on each short
        let mut counts = [0usize; 4];
        for p in &pts {
            let q = [p.coord(0), p.coord(1)];
            let verts = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
            let mut best = (f64::INFINITY, 0);
            for i in 0..4 {
                let d = seg_dist(q, verts[i], verts[(i + 1) % 4]);
                if d < best.0 {
                    best = (d, i);
                }
            }
            counts[best.1] += 1;
        }
        let frac: Vec<f64> = counts.iter().map(|&c| c as f64 / 6000.0).collect();
        for (i, expect) in [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0].iter().enumerate() {
            assert!(
                (frac[i] - expect).abs() < 0.05,
                "edge {i}: got fraction {}, expected {expect}",
                frac[i]
            );
        }
        for p in &pts {
            assert!(!dom.contains(p));
        }
    }

    #[test]
    fn anchor_points_follow_the_schedule() {
        let hp = upper_half_plane();
        let up = BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let z = hp.anchor_point(&up, 100.0).unwrap();
        assert_eq!(z.to_vec(), vec![0.0, 100.0]);

        let foot = BoundaryAnchor::finite(Point::xy(3.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let z = hp.anchor_point(&foot, 10.0).unwrap();
        assert_eq!(z.to_vec(), vec![3.0, 0.1]);

        let disk = Domain::ball(1.0, 2, win2(-1.0, -1.0, 1.0, 1.0)).unwrap();
        let rim = BoundaryAnchor::finite(Point::xy(1.0, 0.0), Point::xy(-1.0, 0.0)).unwrap();
        let z = disk.anchor_point(&rim, 100.0).unwrap();
        assert_eq!(z.to_vec(), vec![0.99, 0.0]);
        assert!(disk.dist_boundary(&z).unwrap() <= 1.0 / 100.0 + 1e-12);

        assert!(matches!(
            disk.anchor_point(&BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap(), 4.0),
            Err(Error::AnchorNeedsUnbounded)
        ));
        assert_eq!(anchor_schedule(8.0, 3), vec![8.0, 16.0, 32.0]);
    }

    #[test]
    fn domain_spec_round_trip() {
        let json = r#"{"kind":"cusp","params":{"power":3.0},"window":[[0.0,-1.0],[1.0,1.0]],"dim":2}"#;
        let dom = Domain::from_spec_str(json).unwrap();
        assert_eq!(dom.kind_name(), "cusp");
        let spec = dom.to_spec();
        let again = Domain::from_spec(&spec).unwrap();
        assert_eq!(again.kind_name(), "cusp");
        assert!(matches!(
            Domain::from_spec_str(r#"{"kind":"torus","window":[[0,0],[1,1]],"dim":2}"#),
            Err(Error::UnknownKind(_))
        ));
        assert!(matches!(
            Domain::from_spec_str(r#"{"kind":"ball","params":{"r":-1.0},"window":[[0,0],[1,1]],"dim":2}"#),
            Err(Error::DegenerateParams(_))
        ));
    }
}
