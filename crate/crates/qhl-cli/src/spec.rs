//! Input parsing: domain spec files and the small string formats for
//! points, boundary anchors, and vertex-set selectors.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use qhl::geometry::{BoundaryAnchor, Domain, Point, Window};
use qhl::graph::MetricGraph;

/// On-disk domain description. The resolved spec is embedded verbatim in
/// every report so a run can be replayed from its output alone.
#[derive(Clone, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: String,
    #[serde(default = "two")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    /// [lo, hi] corner coordinates.
    pub window: [Vec<f64>; 2],
}

fn two() -> usize {
    2
}

impl DomainSpec {
    pub fn load(path: &str) -> Result<DomainSpec> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading domain spec {path}"))?;
        serde_json::from_str(&text).with_context(|| format!("parsing domain spec {path}"))
    }

    pub fn to_domain(&self) -> Result<Domain> {
        let lo = Point::from_slice(&self.window[0])?;
        let hi = Point::from_slice(&self.window[1])?;
        let window = Window::new(lo, hi)?;
        let dom = match self.kind.as_str() {
            "half_plane" | "half_space" => Domain::half_space(self.dim, window)?,
            "ball" | "disk" => {
                let r = self.radius.ok_or_else(|| anyhow!("ball domain needs `radius`"))?;
                Domain::ball(r, self.dim, window)?
            }
            "punctured" | "punctured_plane" | "punctured_space" => {
                Domain::punctured_space(self.dim, window)?
            }
            "slit" | "slit_plane" => Domain::slit_plane(window)?,
            "polygon" => {
                let verts =
                    self.vertices.clone().ok_or_else(|| anyhow!("polygon needs `vertices`"))?;
                Domain::polygon(verts, window)?
            }
            "l_shape" => Domain::l_shape(window)?,
            "cusp" => {
                let p = self.power.ok_or_else(|| anyhow!("cusp domain needs `power`"))?;
                Domain::cusp(p, window)?
            }
            other => bail!("unknown domain kind `{other}`"),
        };
        Ok(dom)
    }
}

/// "x,y" or "x,y,z".
pub fn parse_point(s: &str) -> Result<Point> {
    let coords: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad coordinate `{t}` in `{s}`")))
        .collect::<Result<_>>()?;
    Ok(Point::from_slice(&coords)?)
}

/// "finite:px,py,ix,iy" (boundary point + inward direction) or
/// "infinity:bx,by,dx,dy" (base point + escape direction), 2-D forms;
/// 3-D takes six numbers.
pub fn parse_anchor(s: &str) -> Result<BoundaryAnchor> {
    let (kind, rest) =
        s.split_once(':').ok_or_else(|| anyhow!("anchor `{s}` needs a `kind:` prefix"))?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad number `{t}` in `{s}`")))
        .collect::<Result<_>>()?;
    if nums.len() % 2 != 0 || nums.len() < 4 {
        bail!("anchor `{s}` needs two points of equal dimension");
    }
    let d = nums.len() / 2;
    let a = Point::from_slice(&nums[..d])?;
    let b = Point::from_slice(&nums[d..])?;
    Ok(match kind {
        "finite" => BoundaryAnchor::finite(a, b)?,
        "infinity" | "inf" => BoundaryAnchor::infinity(a, b)?,
        other => bail!("unknown anchor kind `{other}` (finite | infinity)"),
    })
}

/// Vertex-set selector: "circle:cx,cy,r" and "segment:x0,y0,x1,y1" take the
/// vertices within `band` of the curve; "rect:x0,y0,x1,y1" takes the solid
/// box.
pub enum SetSpec {
    Circle { c: Point, r: f64 },
    Segment { a: Point, b: Point },
    Rect { lo: Point, hi: Point },
}

pub fn parse_set(s: &str) -> Result<SetSpec> {
    let (kind, rest) =
        s.split_once(':').ok_or_else(|| anyhow!("set `{s}` needs a `kind:` prefix"))?;
    let nums: Vec<f64> = rest
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad number `{t}` in `{s}`")))
        .collect::<Result<_>>()?;
    Ok(match (kind, nums.len()) {
        ("circle", 3) => SetSpec::Circle { c: Point::xy(nums[0], nums[1]), r: nums[2] },
        ("segment", 4) => SetSpec::Segment {
            a: Point::xy(nums[0], nums[1]),
            b: Point::xy(nums[2], nums[3]),
        },
        ("rect", 4) => SetSpec::Rect {
            lo: Point::xy(nums[0], nums[1]),
            hi: Point::xy(nums[2], nums[3]),
        },
        _ => bail!("unknown set spec `{s}` (circle:cx,cy,r | segment:x0,y0,x1,y1 | rect:...)"),
    })
}

fn segment_dist(p: &Point, a: &Point, b: &Point) -> f64 {
    let (px, py) = (p.coord(0), p.coord(1));
    let (ax, ay) = (a.coord(0), a.coord(1));
    let (bx, by) = (b.coord(0), b.coord(1));
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((px - ax) * dx + (py - ay) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (cx, cy) = (ax + t * dx, ay + t * dy);
    ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
}

impl SetSpec {
    /// Materialize the selector on a grid; `band` widens segments/rect edges.
    pub fn select(&self, g: &MetricGraph, band: f64) -> Result<Vec<u32>> {
        let verts = match self {
            SetSpec::Circle { c, r } => g.select_vertices(|p| (p.dist(c) - r).abs() <= band),
            SetSpec::Segment { a, b } => g.select_vertices(|p| segment_dist(p, a, b) <= band),
            SetSpec::Rect { lo, hi } => g.select_vertices(|p| {
                (0..p.dim()).all(|i| (lo.coord(i)..=hi.coord(i)).contains(&p.coord(i)))
            }),
        };
        if verts.is_empty() {
            bail!("set selector matched no grid vertices");
        }
        Ok(verts)
    }
}

/// "a,b,c" list of positive floats.
pub fn parse_scales(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad scale `{t}` in `{s}`")))
        .collect::<Result<_>>()?;
    if v.len() < 2 {
        bail!("need at least two sweep scales");
    }
    Ok(v)
}
