//! Serializable verification reports and figure output.
//!
//! Every verifier returns a [`VerificationReport`]: a property id, fitted
//! constants, the worst witness with enough context to replay it, and a
//! tolerance ledger listing each slack that went into the pass decision.
//! Maps are ordered and floats go through the standard shortest-roundtrip
//! formatter, so a rerun with the same inputs serializes byte-identically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, Point};
use crate::{Error, Result};

/// The arg-sup sample behind a fitted constant: the points involved and the
/// quantities measured at them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<Vec<f64>>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    /// Which inequality or property was checked.
    pub property: String,
    /// Fitted constants: observed suprema over the enumerated sample.
    pub constants: BTreeMap<String, f64>,
    pub witness: Witness,
    /// Sample instances actually used (after skipping degenerate ones).
    pub samples: usize,
    /// Grid spacing of the graph the verifier ran on.
    pub h: f64,
    pub pass: bool,
    /// Every slack folded into the pass decision, by name.
    pub tolerances: BTreeMap<String, f64>,
    /// Human-readable failure reasons; empty when passing.
    pub note: String,
}

impl VerificationReport {
    pub fn new(property: &str, h: f64) -> VerificationReport {
        VerificationReport {
            property: property.to_string(),
            constants: BTreeMap::new(),
            witness: Witness::default(),
            samples: 0,
            h,
            pass: true,
            tolerances: BTreeMap::new(),
            note: String::new(),
        }
    }

    /// Records a fitted constant. A non-finite value is a verification
    /// failure, not a serialization problem, so it is clamped and flagged.
    pub fn constant(&mut self, name: &str, v: f64) -> &mut Self {
        if v.is_finite() {
            self.constants.insert(name.to_string(), v);
        } else {
            self.constants.insert(name.to_string(), f64::MAX);
            self.fail(&format!("constant {name} is not finite"));
        }
        self
    }

    pub fn tolerance(&mut self, name: &str, v: f64) -> &mut Self {
        self.tolerances.insert(name.to_string(), if v.is_finite() { v } else { f64::MAX });
        self
    }

    pub fn witness_point(&mut self, p: &Point) -> &mut Self {
        self.witness.points.push(p.to_vec());
        self
    }

    pub fn witness_value(&mut self, name: &str, v: f64) -> &mut Self {
        self.witness.values.insert(name.to_string(), if v.is_finite() { v } else { f64::MAX });
        self
    }

    pub fn fail(&mut self, why: &str) -> &mut Self {
        self.pass = false;
        if !self.note.is_empty() {
            self.note.push_str("; ");
        }
        self.note.push_str(why);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report fields are serializable");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<VerificationReport> {
        serde_json::from_str(s).map_err(|e| Error::DegenerateParams(format!("bad report: {e}")))
    }
}

/// Largest relative change among constants shared by two reports.
pub fn refinement_drift(a: &VerificationReport, b: &VerificationReport) -> f64 {
    let mut worst = 0.0f64;
    for (k, va) in &a.constants {
        if let Some(vb) = b.constants.get(k) {
            let scale = va.abs().max(vb.abs());
            if scale > 1e-12 {
                worst = worst.max((va - vb).abs() / scale);
            }
        }
    }
    worst
}

/// Folds a half-spacing rerun into the report: records the observed drift
/// and fails as unconverged when it exceeds the stability contract.
pub fn apply_refinement(report: &mut VerificationReport, fine: &VerificationReport, tol: f64) {
    let drift = refinement_drift(report, fine);
    report.tolerance("refinement_drift", drift);
    report.tolerance("refinement_tol", tol);
    if drift > tol {
        report.fail(&format!("unconverged: constants drift {drift:.3} between h and h/2"));
    }
}

/// One drawable element of a figure: a polyline, or markers at points.
#[derive(Clone, Debug)]
pub struct Overlay {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub marker: bool,
}

impl Overlay {
    pub fn curve(label: &str, points: Vec<[f64; 2]>) -> Overlay {
        Overlay { label: label.to_string(), points, marker: false }
    }

    pub fn markers(label: &str, points: Vec<[f64; 2]>) -> Overlay {
        Overlay { label: label.to_string(), points, marker: true }
    }

    pub fn from_points(label: &str, pts: &[Point], marker: bool) -> Overlay {
        let points = pts.iter().map(|p| [p.coord(0), p.coord(1)]).collect();
        Overlay { label: label.to_string(), points, marker }
    }
}

const PALETTE: [&str; 6] = ["#1b6ef3", "#d94f04", "#1f9d55", "#8f2fb3", "#b8860b", "#19a0b8"];

/// Renders the domain boundary plus overlays as a standalone SVG document.
/// Output is deterministic for a fixed input. 2-D domains only.
pub fn emit_svg(dom: &Domain, overlays: &[Overlay]) -> Result<String> {
    let boundary = dom.boundary_polylines()?;
    let (lo, hi) = (dom.window().lo(), dom.window().hi());
    let (w, h) = (hi.coord(0) - lo.coord(0), hi.coord(1) - lo.coord(1));
    let pad = 0.05 * w.max(h);
    // svg y runs downward; reflect about the window's horizontal midline
    let flip = |y: f64| (lo.coord(1) + hi.coord(1)) - y;
    let lw = 0.006 * w.max(h);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.4} {:.4} {:.4} {:.4}\">\n",
        lo.coord(0) - pad,
        lo.coord(1) - pad,
        w + 2.0 * pad,
        h + 2.0 * pad
    ));
    let path_d = |pts: &[[f64; 2]]| -> String {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            d.push_str(&format!("{}{:.4},{:.4}", if i == 0 { "M" } else { " L" }, p[0], flip(p[1])));
        }
        d
    };
    out.push_str(&format!(
        "  <g fill=\"none\" stroke=\"#222222\" stroke-width=\"{lw:.4}\">\n"
    ));
    for line in &boundary {
        out.push_str(&format!("    <path d=\"{}\"/>\n", path_d(line)));
    }
    out.push_str("  </g>\n");

    for (i, ov) in overlays.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if ov.marker {
            out.push_str(&format!("  <g fill=\"{color}\">\n    <title>{}</title>\n", ov.label));
            for p in &ov.points {
                out.push_str(&format!(
                    "    <circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\"/>\n",
                    p[0],
                    flip(p[1]),
                    1.4 * lw
                ));
            }
            out.push_str("  </g>\n");
        } else {
            out.push_str(&format!(
                "  <g fill=\"none\" stroke=\"{color}\" stroke-width=\"{:.4}\">\n    <title>{}</title>\n",
                0.8 * lw,
                ov.label
            ));
            out.push_str(&format!("    <path d=\"{}\"/>\n", path_d(&ov.points)));
            out.push_str("  </g>\n");
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;

    fn sample_report() -> VerificationReport {
        let mut r = VerificationReport::new("gehring_hayman", 0.05);
        r.constant("C_gh", 1.2345);
        r.constant("A", 3.5);
        r.tolerance("snap_slack", 0.02);
        r.witness_point(&Point::xy(0.5, 1.0));
        r.witness_point(&Point::xy(-0.25, 0.5));
        r.witness_value("ratio", 1.2345);
        r.samples = 42;
        r
    }

    #[test]
    fn json_round_trips_and_orders_keys() {
        let r = sample_report();
        let json = r.to_json();
        // BTreeMap keys come out sorted, independent of insertion order
        assert!(json.find("\"A\"").unwrap() < json.find("\"C_gh\"").unwrap());
        let back = VerificationReport::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn nonfinite_constants_fail_the_report() {
        let mut r = VerificationReport::new("test", 0.1);
        r.constant("bad", f64::INFINITY);
        assert!(!r.pass);
        assert!(r.note.contains("bad"));
        // still serializable
        assert!(r.to_json().contains("\"pass\": false"));
    }

    #[test]
    fn refinement_drift_flags_unconverged_constants() {
        let mut coarse = sample_report();
        let mut fine = sample_report();
        fine.constants.insert("C_gh".into(), 1.2345 * 1.30);
        assert!((refinement_drift(&coarse, &fine) - 0.3 / 1.3).abs() < 1e-12);
        apply_refinement(&mut coarse, &fine, 0.15);
        assert!(!coarse.pass);
        assert!(coarse.note.contains("unconverged"));

        let mut stable = sample_report();
        apply_refinement(&mut stable, &sample_report(), 0.15);
        assert!(stable.pass);
    }

    #[test]
    fn svg_draws_boundary_and_overlays_deterministically() {
        let w = Window::new(Point::xy(-2.0, 0.0), Point::xy(2.0, 2.0)).unwrap();
        let dom = Domain::half_space(2, w).unwrap();
        let overlays = vec![
            Overlay::curve("geodesic", vec![[-1.0, 0.5], [0.0, 1.2], [1.0, 0.5]]),
            Overlay::markers("witness", vec![[0.0, 1.2]]),
        ];
        let svg = emit_svg(&dom, &overlays).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<path").count(), 2); // boundary line + curve
        assert_eq!(svg.matches("<circle").count(), 1);
        // y flip puts the apex of the arc above the boundary line in svg space
        assert_eq!(svg, emit_svg(&dom, &overlays).unwrap());
    }

    #[test]
    fn svg_rejects_three_dimensional_domains() {
        let w = Window::new(
            Point::xyz(-1.0, -1.0, -1.0),
            Point::xyz(1.0, 1.0, 1.0),
        )
        .unwrap();
        let dom = Domain::ball(1.0, 3, w).unwrap();
        let err = emit_svg(&dom, &[]).unwrap_err();
        assert!(err.to_string().contains("svg is 2-D only"));
    }
}
