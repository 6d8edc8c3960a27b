//! Empirical verifiers for the geometric inequalities the library is built
//! around: each one enumerates a sample, fits the inequality's constant as
//! an observed supremum, and returns a replayable report with the arg-sup
//! witness and an explicit tolerance ledger.
//!
//! Verifiers never assert absolute thresholds on their own; pass means the
//! fitted constant is finite and any internal consistency checks hold.
//! Stability across grid refinement or scale sweeps is layered on top with
//! [`crate::report::apply_refinement`] and [`uniformity_sweep`].

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::deform::DeformedGraph;
use crate::geometry::{BoundaryAnchor, Domain, Point};
use crate::graph::{MetricGraph, Weighting};
use crate::gromov::{busemann_field, hamenstadt_table, BusemannField};
use crate::report::VerificationReport;
use crate::{Error, Result};

/// Seeded interior pairs, deep enough to snap robustly. Pairs may still
/// degenerate (same vertex, split components); verifiers skip and count.
pub fn sample_point_pairs(g: &MetricGraph, count: usize, seed: u64) -> Result<Vec<(Point, Point)>> {
    let pts = g.domain().sample_interior_filtered(2 * count, seed, 4.0 * g.h(), 0.05)?;
    Ok(pts.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

struct Prepped {
    pairs: Vec<(u32, u32)>,
    /// Relative error floor from endpoint snapping: max of 2h/d over endpoints.
    snap_slack: f64,
    skipped: usize,
}

fn prep_pairs(g: &MetricGraph, pairs: &[(Point, Point)], min_pairs: usize) -> Result<Prepped> {
    if pairs.len() < min_pairs {
        return Err(Error::EmptySample(format!("need {min_pairs} pairs, have {}", pairs.len())));
    }
    let mut out = Vec::with_capacity(pairs.len());
    let mut slack = 0.0f64;
    let mut skipped = 0usize;
    for (x, y) in pairs {
        let (a, _) = g.snap(x)?;
        let (b, _) = g.snap(y)?;
        if a == b || g.component(a) != g.component(b) {
            skipped += 1;
            continue;
        }
        slack = slack.max(2.0 * g.h() / g.depth(a).min(g.depth(b)));
        out.push((a, b));
    }
    if out.is_empty() {
        return Err(Error::EmptySample("every pair degenerated after snapping".into()));
    }
    Ok(Prepped { pairs: out, snap_slack: slack, skipped })
}

fn euclid_cum(g: &MetricGraph, verts: &[u32]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(verts.len());
    let mut acc = 0.0;
    cum.push(0.0);
    for w in verts.windows(2) {
        acc += g.point(w[0]).dist(&g.point(w[1]));
        cum.push(acc);
    }
    cum
}

/// Index of the strictly largest value; ties break to the first occurrence.
fn argmax(vals: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, v) in vals.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// Geodesics have near-minimal Euclidean length: fits
/// C_gh = sup len(geodesic) / len(shortest curve) over the sampled pairs.
pub fn verify_gehring_hayman(
    g: &MetricGraph,
    pairs: &[(Point, Point)],
) -> Result<VerificationReport> {
    let prep = prep_pairs(g, pairs, 30)?;
    let recs: Result<Vec<(f64, f64, f64)>> = prep
        .pairs
        .par_iter()
        .map(|&(a, b)| {
            let geo = g.shortest_path_vertices(a, b, Weighting::Qh)?;
            let short = g.shortest_path_vertices(a, b, Weighting::Euclid)?;
            Ok((geo.len_euclid / short.len_euclid, geo.len_euclid, short.len_euclid))
        })
        .collect();
    let recs = recs?;
    let (i, sup) = argmax(recs.iter().map(|r| r.0));

    let mut rep = VerificationReport::new("gehring_hayman", g.h());
    rep.constant("C_gh", sup);
    rep.samples = recs.len();
    rep.tolerance("snap_slack", prep.snap_slack);
    let (a, b) = prep.pairs[i];
    rep.witness_point(&g.point(a)).witness_point(&g.point(b));
    rep.witness_value("geodesic_length", recs[i].1)
        .witness_value("shortest_length", recs[i].2)
        .witness_value("ratio", recs[i].0)
        .witness_value("skipped", prep.skipped as f64);
    Ok(rep)
}

/// Diameter form of the same principle: fits R_po = sup diam(geodesic)/|x-y|,
/// which bounds the observable diameter ratio since every competitor has
/// diameter at least |x-y|.
pub fn verify_pommerenke(g: &MetricGraph, pairs: &[(Point, Point)]) -> Result<VerificationReport> {
    let prep = prep_pairs(g, pairs, 30)?;
    let recs: Result<Vec<(f64, f64, f64)>> = prep
        .pairs
        .par_iter()
        .map(|&(a, b)| {
            let geo = g.shortest_path_vertices(a, b, Weighting::Qh)?;
            let sep = g.point(a).dist(&g.point(b));
            Ok((geo.diam_euclid / sep, geo.diam_euclid, sep))
        })
        .collect();
    let recs = recs?;
    let (i, sup) = argmax(recs.iter().map(|r| r.0));

    let mut rep = VerificationReport::new("pommerenke", g.h());
    rep.constant("R_po", sup);
    rep.samples = recs.len();
    rep.tolerance("snap_slack", prep.snap_slack);
    let (a, b) = prep.pairs[i];
    rep.witness_point(&g.point(a)).witness_point(&g.point(b));
    rep.witness_value("geodesic_diam", recs[i].1)
        .witness_value("separation", recs[i].2)
        .witness_value("ratio", recs[i].0);
    Ok(rep)
}

/// Every competitor curve passes near every geodesic point, in the inner
/// metric and at the scale of the local boundary distance: fits
/// C_sp = sup over geodesic points z and competitors c of d_inner(z, c)/d(z).
/// Competitors are the inner-shortest curve plus seeded random detours.
pub fn verify_separation(
    g: &MetricGraph,
    pairs: &[(Point, Point)],
    competitors_per_pair: usize,
    seed: u64,
) -> Result<VerificationReport> {
    let prep = prep_pairs(g, pairs, 1)?;
    let n_comp = competitors_per_pair.max(1);
    let recs: Result<Vec<(f64, u32)>> = prep
        .pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(a, b))| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add((idx as u64).wrapping_mul(0x9E3779B97F4A7C15)),
                );
            let geo = g.shortest_path_vertices(a, b, Weighting::Qh)?;
            let mut best = (0.0f64, a);
            for c in 0..n_comp {
                let verts = if c == 0 {
                    g.shortest_path_vertices(a, b, Weighting::Euclid)?.verts
                } else {
                    // random admissible detour: shortest curve through a via
                    let mut via = a;
                    for _ in 0..50 {
                        let w = rng.random_range(0..g.vertex_count() as u32);
                        if w != a
                            && w != b
                            && g.component(w) == g.component(a)
                            && g.depth(w) >= 3.0 * g.h()
                        {
                            via = w;
                            break;
                        }
                    }
                    if via == a {
                        continue;
                    }
                    let mut p1 = g.shortest_path_vertices(a, via, Weighting::Euclid)?.verts;
                    let p2 = g.shortest_path_vertices(via, b, Weighting::Euclid)?.verts;
                    p1.extend_from_slice(&p2[1..]);
                    p1
                };
                let dist = g.distances_from_set(&verts, Weighting::Euclid);
                for &z in &geo.verts {
                    let ratio = dist[z as usize] / g.depth(z);
                    if ratio > best.0 {
                        best = (ratio, z);
                    }
                }
            }
            Ok(best)
        })
        .collect();
    let recs = recs?;
    let (i, sup) = argmax(recs.iter().map(|r| r.0));

    let mut rep = VerificationReport::new("separation", g.h());
    rep.constant("C_sp", sup);
    rep.samples = recs.len();
    rep.tolerance("snap_slack", prep.snap_slack);
    let (a, b) = prep.pairs[i];
    rep.witness_point(&g.point(a)).witness_point(&g.point(b)).witness_point(&g.point(recs[i].1));
    rep.witness_value("ratio", recs[i].0).witness_value("d_z", g.depth(recs[i].1));
    Ok(rep)
}

/// Excursions across a separating cross-section stay near it: with sigma
/// splitting the graph in two, geodesics with both endpoints on one side are
/// followed into the other side, and the inner escape distance back to sigma
/// is fitted against min(d(x), diam sigma).
pub fn verify_faltensatz(
    g: &MetricGraph,
    sigma: &[u32],
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if sigma.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let mut removed = vec![false; g.vertex_count()];
    for &v in sigma {
        removed[v as usize] = true;
    }
    let (comp, ncomp) = g.components_excluding(&removed);
    if ncomp != 2 {
        return Err(Error::NotCrossSection(ncomp));
    }
    let dsig = g.distances_from_set(sigma, Weighting::Euclid);
    let diam_sigma = g.point_set_diameter(sigma);

    // seeded endpoint pairs, both ends on the same side of sigma
    let pool: Vec<u32> = (0..g.vertex_count() as u32)
        .filter(|&v| !removed[v as usize] && g.depth(v) >= 4.0 * g.h())
        .collect();
    if pool.len() < 2 {
        return Err(Error::EmptySample("no deep vertices off the cross-section".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(trials);
    let mut attempts = 0;
    while pairs.len() < trials && attempts < trials * 60 {
        attempts += 1;
        let a = pool[rng.random_range(0..pool.len())];
        let b = pool[rng.random_range(0..pool.len())];
        if a != b && comp[a as usize] == comp[b as usize] {
            pairs.push((a, b));
        }
    }
    if pairs.is_empty() {
        return Err(Error::SampleExhausted { want: trials, got: 0 });
    }

    // per pair: worst excursion vertex on the far side, or None
    let recs: Result<Vec<Option<(f64, u32)>>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let geo = g.shortest_path_vertices(a, b, Weighting::Qh)?;
            let far = 1 - comp[a as usize];
            let mut worst: Option<(f64, u32)> = None;
            for &x in &geo.verts {
                if comp[x as usize] != far {
                    continue;
                }
                let ratio = dsig[x as usize] / g.depth(x).min(diam_sigma);
                if worst.map_or(true, |(r, _)| ratio > r) {
                    worst = Some((ratio, x));
                }
            }
            Ok(worst)
        })
        .collect();
    let recs = recs?;

    let crossings = recs.iter().filter(|r| r.is_some()).count();
    let mut rep = VerificationReport::new("faltensatz", g.h());
    rep.samples = pairs.len();
    rep.constant("crossings", crossings as f64);
    rep.constant("diam_sigma", diam_sigma);
    if crossings == 0 {
        rep.constant("A", 0.0);
        rep.witness_value("note_no_crossings", 1.0);
        return Ok(rep);
    }
    let (i, sup) =
        argmax(recs.iter().map(|r| r.map_or(f64::NEG_INFINITY, |(ratio, _)| ratio)));
    rep.constant("A", sup);
    let (a, b) = pairs[i];
    let (_, x) = recs[i].unwrap();
    rep.witness_point(&g.point(a)).witness_point(&g.point(b)).witness_point(&g.point(x));
    rep.witness_value("escape_length", dsig[x as usize])
        .witness_value("d_x", g.depth(x))
        .witness_value("ratio", sup);
    Ok(rep)
}

struct UniformityStat {
    a: f64,
    qc: f64,
    cigar: f64,
    z: u32,
}

fn uniformity_stat(g: &MetricGraph, a: u32, b: u32) -> Result<UniformityStat> {
    let geo = g.shortest_path_vertices(a, b, Weighting::Qh)?;
    let sep = g.point(a).dist(&g.point(b));
    let qc = geo.len_euclid / sep;
    let cum = euclid_cum(g, &geo.verts);
    let total = *cum.last().unwrap();
    let mut cigar = 0.0f64;
    let mut z = a;
    for (i, &v) in geo.verts.iter().enumerate() {
        let c = cum[i].min(total - cum[i]) / g.depth(v);
        if c > cigar {
            cigar = c;
            z = v;
        }
    }
    Ok(UniformityStat { a: qc.max(cigar), qc, cigar, z })
}

/// Double-cone condition along geodesics: fits the uniformity constant
/// A = max(sup len(geod)/|x-y|, sup over geodesic points of
/// min(len to either end)/d(z)).
pub fn verify_uniformity(g: &MetricGraph, pairs: &[(Point, Point)]) -> Result<VerificationReport> {
    let prep = prep_pairs(g, pairs, 30)?;
    let recs: Result<Vec<UniformityStat>> =
        prep.pairs.par_iter().map(|&(a, b)| uniformity_stat(g, a, b)).collect();
    let recs = recs?;
    let (i, sup) = argmax(recs.iter().map(|r| r.a));

    let mut rep = VerificationReport::new("uniformity", g.h());
    rep.constant("A", sup);
    rep.constant("A_quasiconvex", recs.iter().map(|r| r.qc).fold(0.0, f64::max));
    rep.constant("A_cigar", recs.iter().map(|r| r.cigar).fold(0.0, f64::max));
    rep.samples = recs.len();
    rep.tolerance("snap_slack", prep.snap_slack);
    let (a, b) = prep.pairs[i];
    rep.witness_point(&g.point(a)).witness_point(&g.point(b)).witness_point(&g.point(recs[i].z));
    rep.witness_value("A_pair", recs[i].a)
        .witness_value("quasiconvexity", recs[i].qc)
        .witness_value("cigar", recs[i].cigar);
    Ok(rep)
}

/// Probes uniformity toward a boundary feature across geometric scales: for
/// each scale s the deep endpoints come from the ring |p - probe| in
/// [0.75 s, 1.75 s] and partners from a fixed far pool, and the fitted
/// constant per scale must not grow across the sweep. A growth of 5x or more
/// between the largest and smallest scale fails the report (non-uniformity
/// blow-up); on uniform domains the per-scale constants stay comparable.
pub fn uniformity_sweep(
    g: &MetricGraph,
    probe: &Point,
    scales: &[f64],
    pairs_per_scale: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if scales.len() < 2 || scales.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateParams("need at least two positive sweep scales".into()));
    }
    if pairs_per_scale == 0 {
        return Err(Error::EmptySample("pairs_per_scale must be positive".into()));
    }
    let smax = scales.iter().cloned().fold(0.0, f64::max);
    let count = 3000 + 600 * pairs_per_scale;
    let pts = g.domain().sample_interior_filtered(count, seed, 3.0 * g.h(), 0.0)?;
    // far endpoints are the deepest available references: a shallow far end
    // contributes a scale-independent term to the sup and masks the probe
    let mut far: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            (p.dist(probe) >= 1.5 * smax).then(|| (g.domain().dist_boundary_unchecked(p), i))
        })
        .collect();
    if far.is_empty() {
        return Err(Error::SampleExhausted { want: pairs_per_scale, got: 0 });
    }
    far.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    far.truncate(pairs_per_scale.min(4));
    let far: Vec<Point> = far.iter().map(|&(_, i)| pts[i]).collect();

    // sort by scale, largest first, so growth reads shallow -> deep
    let mut order: Vec<usize> = (0..scales.len()).collect();
    order.sort_by(|&i, &j| scales[j].partial_cmp(&scales[i]).unwrap().then(i.cmp(&j)));

    let mut rep = VerificationReport::new("uniformity_sweep", g.h());
    let mut fitted = Vec::new();
    for (rank, &si) in order.iter().enumerate() {
        let s = scales[si];
        // ring members closest to the probe first: they carry the sup
        let mut ring: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let d = p.dist(probe);
                (0.75 * s..=1.75 * s).contains(&d).then_some((d, i))
            })
            .collect();
        ring.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
        if ring.len() < pairs_per_scale {
            return Err(Error::SampleExhausted { want: pairs_per_scale, got: ring.len() });
        }
        let pairs: Vec<(Point, Point)> = ring[..pairs_per_scale]
            .iter()
            .enumerate()
            .map(|(k, &(_, i))| (pts[i], far[k % far.len()]))
            .collect();
        let prep = prep_pairs(g, &pairs, 1)?;
        let stats: Result<Vec<UniformityStat>> =
            prep.pairs.par_iter().map(|&(a, b)| uniformity_stat(g, a, b)).collect();
        let stats = stats?;
        let worst = stats
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.a.partial_cmp(&y.1.a).unwrap())
            .map(|(k, _)| k)
            .unwrap_or(0);
        let a_s = stats.get(worst).map_or(0.0, |r| r.a);
        rep.constant(&format!("A_scale_{rank}"), a_s);
        rep.witness_value(&format!("scale_{rank}"), s);
        if let Some(&(va, vb)) = prep.pairs.get(worst) {
            rep.witness_point(&g.point(va));
            rep.witness_point(&g.point(vb));
        }
        fitted.push(a_s);
    }
    let growth = fitted.last().unwrap() / fitted.first().unwrap().max(1e-300);
    rep.constant("growth", growth);
    rep.samples = pairs_per_scale * scales.len();
    rep.tolerance("blow_up_gate", 5.0);
    if growth >= 5.0 {
        rep.fail(&format!("blow-up across the scale sweep: {growth:.1}x"));
    }
    Ok(rep)
}

/// Linear local connectivity by dyadic search: points inside a ball must
/// connect inside the C-enlarged ball (LLC1, probed with the pair-scaled
/// ball so the 2C bounded-turning corollary is checkable on the witnesses),
/// and points outside a ball must connect outside the C-shrunk ball (LLC2).
pub fn verify_llc(
    dom: &Domain,
    g: &MetricGraph,
    trials: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if trials < 30 {
        return Err(Error::EmptySample(format!("need 30 trials, have {trials}")));
    }
    if dom.kind_name() != g.domain().kind_name() {
        return Err(Error::DegenerateParams("domain does not match the graph".into()));
    }
    let art = dom.artificial_faces();
    let (lo, hi) = (dom.window().lo(), dom.window().hi());
    let clear = |p: &Point, m: f64| {
        (0..dom.dim()).all(|ax| {
            (!art[ax][0] || p.coord(ax) >= lo.coord(ax) + m)
                && (!art[ax][1] || p.coord(ax) <= hi.coord(ax) - m)
        })
    };
    let ext_min = (0..dom.dim()).map(|ax| dom.window().extent(ax)).fold(f64::INFINITY, f64::min);
    let (r_lo, r_hi) = (5.0 * g.h(), ext_min / 6.0);
    if r_lo >= r_hi {
        return Err(Error::DegenerateParams("grid too coarse for llc radii".into()));
    }
    let dyadic = [1.0, 2.0, 4.0, 8.0, 16.0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = VerificationReport::new("llc", g.h());

    // LLC1 instances are centered at one endpoint with r = |u - v|
    let mut c1_max = 0.0f64;
    let mut bt_max = 0.0f64;
    let mut witness: Option<(u32, u32, f64, f64)> = None;
    let mut done = 0;
    let mut attempts = 0;
    while done < trials && attempts < trials * 80 {
        attempts += 1;
        let r = r_lo * (r_hi / r_lo).powf(rng.random::<f64>());
        let u = rng.random_range(0..g.vertex_count() as u32);
        let pu = g.point(u);
        if g.depth(u) < 3.0 * g.h() || !clear(&pu, 3.0 * r) {
            continue;
        }
        let cands: Vec<u32> = (0..g.vertex_count() as u32)
            .filter(|&v| v != u && g.point(v).dist(&pu) <= r)
            .collect();
        if cands.is_empty() {
            continue;
        }
        let v = cands[rng.random_range(0..cands.len())];
        let rr = g.point(v).dist(&pu);
        let c1 = dyadic
            .iter()
            .find(|&&c| g.connected_within(u, v, |w| g.point(w).dist(&pu) <= c * rr));
        let Some(&c1) = c1 else {
            rep.fail("llc1 exhausted the dyadic search");
            done += 1;
            continue;
        };
        c1_max = c1_max.max(c1);
        // bounded-turning corollary on this witness
        let within = |w: u32| g.point(w).dist(&pu) <= c1 * rr;
        let path = g.restricted_path(u, v, within)?;
        let bt = path.diam_euclid / rr;
        if bt > bt_max {
            bt_max = bt;
            witness = Some((u, v, c1, bt));
        }
        done += 1;
    }
    if done < trials {
        return Err(Error::SampleExhausted { want: trials, got: done });
    }

    // LLC2 instances use a random center and an outside pair
    let mut c2_max = 0.0f64;
    done = 0;
    attempts = 0;
    while done < trials && attempts < trials * 80 {
        attempts += 1;
        let r = r_lo * (r_hi / r_lo).powf(rng.random::<f64>());
        let x = rng.random_range(0..g.vertex_count() as u32);
        let px = g.point(x);
        if g.depth(x) < 3.0 * g.h() || !clear(&px, 3.0 * r) {
            continue;
        }
        let outs: Vec<u32> =
            (0..g.vertex_count() as u32).filter(|&v| g.point(v).dist(&px) > r).collect();
        if outs.len() < 2 {
            continue;
        }
        let u = outs[rng.random_range(0..outs.len())];
        let same: Vec<u32> =
            outs.iter().cloned().filter(|&v| v != u && g.component(v) == g.component(u)).collect();
        if same.is_empty() {
            continue;
        }
        let v = same[rng.random_range(0..same.len())];
        let c2 = dyadic
            .iter()
            .find(|&&c| g.connected_within(u, v, |w| g.point(w).dist(&px) > r / c));
        let Some(&c2) = c2 else {
            rep.fail("llc2 exhausted the dyadic search");
            done += 1;
            continue;
        };
        c2_max = c2_max.max(c2);
        done += 1;
    }
    if done < trials {
        return Err(Error::SampleExhausted { want: trials, got: done });
    }

    rep.constant("C", c1_max.max(c2_max));
    rep.constant("C_llc1", c1_max);
    rep.constant("C_llc2", c2_max);
    rep.constant("C_bt_observed", bt_max);
    rep.samples = 2 * trials;
    rep.tolerance("dyadic_cap", 16.0);
    if let Some((u, v, c1, bt)) = witness {
        rep.witness_point(&g.point(u)).witness_point(&g.point(v));
        rep.witness_value("c_instance", c1).witness_value("turning_ratio", bt);
        if bt > 2.0 * c1_max + 1e-9 {
            rep.fail("bounded-turning corollary violated on a witness");
        }
    }
    Ok(rep)
}

/// Quasisymmetry of the boundary identification: for boundary triples
/// (x, a, b) with Euclidean ratio t and boundary-metric ratio T, fits the
/// power envelope lambda * max(t^(eps*alpha), t^(eps/alpha)) two-sidedly
/// (T below the envelope of t, and t below the envelope of T). Large alpha
/// makes any envelope permissive, so the fit takes the smallest alpha whose
/// constant stays under 100 rather than the smallest constant outright.
pub fn verify_boundary_qs(
    dom: &Domain,
    g: &Arc<MetricGraph>,
    field: &BusemannField,
    eps: f64,
    triples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if !Arc::ptr_eq(field.graph(), g) {
        return Err(Error::DegenerateParams("field was built on a different grid".into()));
    }
    if triples == 0 {
        return Err(Error::EmptySample("need at least one triple".into()));
    }
    let pts = dom.sample_boundary(3 * triples, seed)?;
    let table = hamenstadt_table(field, &pts, eps)?;
    let e = table.eps;

    let mut recs: Vec<(f64, f64, usize)> = Vec::new();
    let mut skipped = 0usize;
    for i in 0..triples {
        let (x, a, b) = (3 * i, 3 * i + 1, 3 * i + 2);
        let ta = pts[x].dist(&pts[a]);
        let tb = pts[x].dist(&pts[b]);
        if ta < 1e-12 || tb < 1e-12 || table.dist[x][b] <= 0.0 {
            skipped += 1;
            continue;
        }
        recs.push((ta / tb, table.dist[x][a] / table.dist[x][b], i));
    }
    if recs.is_empty() {
        return Err(Error::EmptySample("all boundary triples degenerated".into()));
    }

    // grid search over the exponent spread, smallest alpha first; the
    // envelope constant at a given alpha is itself an observed supremum
    let env = |t: f64, alpha: f64| t.powf(e * alpha).max(t.powf(e / alpha));
    let lam_at = |alpha: f64| {
        recs.iter()
            .map(|&(t, tt, _)| (tt / env(t, alpha)).max(1.0 / (tt * env(1.0 / t, alpha))))
            .fold(0.0, f64::max)
    };
    let mut best = (f64::INFINITY, 64.0);
    for j in 0..=120 {
        let alpha = 64.0f64.powf(j as f64 / 120.0);
        let lam = lam_at(alpha);
        if lam <= 100.0 {
            best = (lam, alpha);
            break;
        }
        if lam < best.0 {
            best = (lam, alpha);
        }
    }
    let (lambda, alpha) = best;
    let (wi, _) = argmax(
        recs.iter()
            .map(|&(t, tt, _)| (tt / env(t, alpha)).max(1.0 / (tt * env(1.0 / t, alpha)))),
    );
    let (t_w, tt_w, tri) = recs[wi];

    let mut rep = VerificationReport::new("boundary_qs", g.h());
    rep.constant("lambda", lambda);
    rep.constant("alpha", alpha);
    rep.constant("eps_effective", e);
    rep.samples = recs.len();
    rep.tolerance("gromov_defect", table.defect);
    rep.tolerance("eps_requested", eps);
    rep.witness_point(&pts[3 * tri])
        .witness_point(&pts[3 * tri + 1])
        .witness_point(&pts[3 * tri + 2]);
    rep.witness_value("t", t_w).witness_value("T", tt_w).witness_value("skipped", skipped as f64);
    if lambda > 100.0 {
        rep.fail(&format!("envelope constant {lambda:.1} exceeds 100"));
    }
    Ok(rep)
}

/// Comparisons between the deformed and original metrics: fits M (distance
/// comparability after quasihyperbolizing the deformed space), C_delta (the
/// deformed distance against its boundary-product closed form), and checks
/// the density Harnack inequality on every edge and along sampled pairs.
pub fn verify_deformation_bounds(
    g: &Arc<MetricGraph>,
    dg: &DeformedGraph,
    pairs: &[(Point, Point)],
) -> Result<VerificationReport> {
    if !Arc::ptr_eq(dg.base(), g) {
        return Err(Error::DegenerateParams("deformed graph lives on a different grid".into()));
    }
    let prep = prep_pairs(g, pairs, 1)?;
    let eps = dg.eps();
    // the density is exp(-eps b), so b is recoverable exactly
    let bval = |v: u32| -dg.rho(v).ln() / eps;

    let mut edge_violations = 0usize;
    for (u, v, _, qh) in g.undirected_edges() {
        let bound = (eps * qh).exp() * (1.0 + 1e-12);
        let ratio = dg.rho(u) / dg.rho(v);
        if ratio > bound || 1.0 / ratio > bound {
            edge_violations += 1;
        }
    }

    struct Rec {
        m: f64,
        c: f64,
        harnack_margin: f64,
        k: f64,
        keps: f64,
        deps: f64,
    }
    let recs: Result<Vec<Rec>> = prep
        .pairs
        .par_iter()
        .map(|&(a, b)| {
            let k = g.shortest_path_vertices(a, b, Weighting::Qh)?.cost;
            let keps = dg.quasihyperbolized_vertices(a, b)?;
            let deps = dg.distance_vertices(a, b)?;
            let m = (k / keps).max(keps / k);
            let prod = 0.5 * (bval(a) + bval(b) - k);
            let rhs = (-eps * prod).exp() / eps * (eps * k).min(1.0);
            let c = (deps / rhs).max(rhs / deps);
            let harnack_margin = eps * k - (dg.rho(a) / dg.rho(b)).ln().abs();
            Ok(Rec { m, c, harnack_margin, k, keps, deps })
        })
        .collect();
    let recs = recs?;

    let m_hat = recs.iter().map(|r| r.m).fold(0.0, f64::max);
    let (ci, c_hat) = argmax(recs.iter().map(|r| r.c));
    let margin_min = recs.iter().map(|r| r.harnack_margin).fold(f64::INFINITY, f64::min);

    let mut rep = VerificationReport::new("deformation_bounds", g.h());
    rep.constant("M", m_hat);
    rep.constant("C_delta", c_hat);
    rep.constant("harnack_edge_violations", edge_violations as f64);
    rep.constant("harnack_pair_margin_min", margin_min);
    rep.samples = recs.len();
    rep.tolerance("snap_slack", prep.snap_slack);
    rep.tolerance("fp_margin", 1e-9);
    let (a, b) = prep.pairs[ci];
    rep.witness_point(&g.point(a)).witness_point(&g.point(b));
    rep.witness_value("k", recs[ci].k)
        .witness_value("k_eps", recs[ci].keps)
        .witness_value("d_eps", recs[ci].deps)
        .witness_value("C_pair", recs[ci].c);
    if edge_violations > 0 {
        rep.fail(&format!("harnack fails on {edge_violations} edges"));
    }
    if margin_min < -1e-9 {
        rep.fail("harnack fails along a sampled pair");
    }
    Ok(rep)
}

/// Two-sided distance bounds on uniform domains: the lower bound
/// log(1 + |x-y|/min d) <= k holds universally; the upper bound with 4 A^2
/// requires the uniformity constant fitted beforehand.
pub fn verify_bhk_uniform_bounds(
    g: &MetricGraph,
    pairs: &[(Point, Point)],
    a_hat: f64,
) -> Result<VerificationReport> {
    let prep = prep_pairs(g, pairs, 1)?;
    let recs: Result<Vec<(f64, f64)>> = prep
        .pairs
        .par_iter()
        .map(|&(a, b)| {
            let k = g.shortest_path_vertices(a, b, Weighting::Qh)?.cost;
            let lower =
                (1.0 + g.point(a).dist(&g.point(b)) / g.depth(a).min(g.depth(b))).ln();
            Ok((k, lower))
        })
        .collect();
    let recs = recs?;
    let ratio_min = recs.iter().map(|(k, lo)| k / lo).fold(f64::INFINITY, f64::min);
    let (ri, ratio_max) = argmax(recs.iter().map(|(k, lo)| k / lo));
    let gate = 4.0 * a_hat * a_hat;

    let mut rep = VerificationReport::new("bhk_uniform_bounds", g.h());
    rep.constant("bound_ratio_min", ratio_min);
    rep.constant("bound_ratio_max", ratio_max);
    rep.constant("upper_gate", gate);
    rep.samples = recs.len();
    rep.tolerance("snap_slack", prep.snap_slack);
    // the trapezoid rule can undershoot a curved integrand slightly
    rep.tolerance("quadrature_slack", 0.02);
    let (a, b) = prep.pairs[ri];
    rep.witness_point(&g.point(a)).witness_point(&g.point(b));
    rep.witness_value("k", recs[ri].0).witness_value("lower_bound", recs[ri].1);
    if ratio_min < 1.0 - prep.snap_slack - 0.02 {
        rep.fail(&format!("universal lower bound violated: ratio {ratio_min:.4}"));
    }
    if ratio_max > gate {
        rep.fail(&format!("upper bound misses the 4A^2 gate: {ratio_max:.2} > {gate:.2}"));
    }
    Ok(rep)
}

/// Geodesic stability under endpoint replacement: for triples (x, y, z) with
/// |x-y| >= 2|x-z|, the point w on [x, y] at arclength |x-z| is nearly as
/// far from y as the whole geodesic [x, z] is: fits
/// C_A = sup |k(y, w) - dist_k(y, [x, z])|.
pub fn verify_bhk314(g: &MetricGraph, triples: usize, seed: u64) -> Result<VerificationReport> {
    if triples == 0 {
        return Err(Error::EmptySample("need at least one triple".into()));
    }
    let pts = g.domain().sample_interior_filtered(12 * triples, seed, 4.0 * g.h(), 0.05)?;
    let mut chosen: Vec<(u32, u32, u32)> = Vec::with_capacity(triples);
    for c in pts.chunks_exact(3) {
        if chosen.len() == triples {
            break;
        }
        // try both assignments of the short leg
        for (x, y, z) in [(c[0], c[1], c[2]), (c[0], c[2], c[1])] {
            if x.dist(&y) >= 2.0 * x.dist(&z) {
                let (vx, _) = g.snap(&x)?;
                let (vy, _) = g.snap(&y)?;
                let (vz, _) = g.snap(&z)?;
                if vx != vy
                    && vx != vz
                    && g.component(vx) == g.component(vy)
                    && g.component(vx) == g.component(vz)
                {
                    chosen.push((vx, vy, vz));
                }
                break;
            }
        }
    }
    if chosen.is_empty() {
        return Err(Error::EmptySample("no admissible triple found".into()));
    }

    let recs: Result<Vec<(f64, u32)>> = chosen
        .par_iter()
        .map(|&(vx, vy, vz)| {
            let geo = g.shortest_path_vertices(vx, vy, Weighting::Qh)?;
            let cum = euclid_cum(g, &geo.verts);
            let target = g.point(vx).dist(&g.point(vz));
            let wi = cum.iter().position(|&c| c >= target).unwrap_or(cum.len() - 1);
            let w = geo.verts[wi];
            let alpha = g.shortest_path_vertices(vx, vz, Weighting::Qh)?.verts;
            let drow = g.distances_from(vy, Weighting::Qh);
            let to_alpha =
                alpha.iter().map(|&v| drow[v as usize]).fold(f64::INFINITY, f64::min);
            Ok(((drow[w as usize] - to_alpha).abs(), w))
        })
        .collect();
    let recs = recs?;
    let (i, sup) = argmax(recs.iter().map(|r| r.0));

    let mut rep = VerificationReport::new("bhk314", g.h());
    rep.constant("C_A", sup);
    rep.samples = recs.len();
    let (vx, vy, vz) = chosen[i];
    rep.witness_point(&g.point(vx))
        .witness_point(&g.point(vy))
        .witness_point(&g.point(vz))
        .witness_point(&g.point(recs[i].1));
    rep.witness_value("defect", sup);
    Ok(rep)
}

/// Every point should sit within bounded quasihyperbolic distance of some
/// geodesic between boundary anchors: estimates K as the sup over sampled
/// points of the distance to the nearest anchor-pair geodesic. The estimate
/// only improves (never grows) as more anchors are supplied.
pub fn estimate_rough_starlike(
    g: &MetricGraph,
    anchors: &[BoundaryAnchor],
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if anchors.len() < 2 {
        return Err(Error::DegenerateParams("need at least two anchors".into()));
    }
    let mut anchor_verts = Vec::with_capacity(anchors.len());
    for a in anchors {
        let z = g.domain().anchor_point(a, r)?;
        anchor_verts.push(g.snap(&z)?.0);
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..anchor_verts.len() {
        for j in (i + 1)..anchor_verts.len() {
            let (a, b) = (anchor_verts[i], anchor_verts[j]);
            if a == b {
                continue;
            }
            let geo = g.shortest_path_vertices(a, b, Weighting::Qh)?;
            rows.push(g.distances_from_set(&geo.verts, Weighting::Qh));
        }
    }
    if rows.is_empty() {
        return Err(Error::DegenerateParams("anchors collapse to one vertex".into()));
    }
    let pool = g.domain().sample_interior_filtered(samples, seed, 4.0 * g.h(), 0.05)?;
    let mut k_hat = 0.0f64;
    let mut worst = pool[0];
    let mut used = 0usize;
    for p in &pool {
        let v = g.snap(p)?.0;
        let d = rows.iter().map(|row| row[v as usize]).fold(f64::INFINITY, f64::min);
        if !d.is_finite() {
            continue;
        }
        used += 1;
        if d > k_hat {
            k_hat = d;
            worst = *p;
        }
    }
    let mut rep = VerificationReport::new("rough_starlike", g.h());
    rep.constant("K", k_hat);
    rep.constant("anchor_pairs", rows.len() as f64);
    rep.samples = used;
    rep.witness_point(&worst);
    rep.witness_value("distance", k_hat);
    Ok(rep)
}

/// Doubling the anchor radius must barely move the renormalized distance
/// field: the observed sup-gap over every vertex is checked against the
/// hyperbolicity budget 4 delta plus the snapping slack at the two anchor
/// proxies. Past the proxy scale the gap saturates near twice the
/// proxy-to-proxy distance by construction, which the budget absorbs; the
/// sharper convergence figure is the core gap, measured on the
/// quasihyperbolic ball around the base at 80% of the base-to-proxy
/// distance, where both renormalizations are already trustworthy.
pub fn busemann_anchor_stability(
    g: &Arc<MetricGraph>,
    anchor: &BoundaryAnchor,
    base: &Point,
    r: f64,
    delta_hat: f64,
) -> Result<VerificationReport> {
    let f1 = busemann_field(g, anchor, base, r)?;
    let f2 = busemann_field(g, anchor, base, 2.0 * r)?;
    let roi = 0.8 * -f1.value(f1.anchor_vertex());
    let from_base = g.distances_from(f1.base_vertex(), Weighting::Qh);
    let mut gap = 0.0f64;
    let mut gap_core = 0.0f64;
    let mut worst = f1.base_vertex();
    let mut in_core = 0usize;
    for v in 0..g.vertex_count() as u32 {
        let (b1, b2) = (f1.value(v), f2.value(v));
        if !b1.is_finite() || !b2.is_finite() {
            continue;
        }
        let d = (b1 - b2).abs();
        if d > gap {
            gap = d;
            worst = v;
        }
        if from_base[v as usize] <= roi {
            in_core += 1;
            gap_core = gap_core.max(d);
        }
    }
    let anchor_slack = 4.0 * delta_hat;
    let snap_slack = 2.0 * g.h() / g.depth(f1.anchor_vertex())
        + 2.0 * g.h() / g.depth(f2.anchor_vertex());
    let mut rep = VerificationReport::new("busemann_anchor_stability", g.h());
    rep.constant("gap", gap);
    rep.constant("gap_core", gap_core);
    rep.constant("core_vertices", in_core as f64);
    rep.samples = g.vertex_count();
    rep.tolerance("anchor_slack", anchor_slack);
    rep.tolerance("snap_slack", snap_slack);
    rep.tolerance("roi_radius", roi);
    rep.witness_point(&g.point(worst));
    rep.witness_value("gap", gap);
    if gap > anchor_slack + snap_slack {
        rep.fail(&format!("anchor gap {gap:.4} exceeds budget {:.4}", anchor_slack + snap_slack));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Window;
    use crate::graph::{build_graph, Stencil};
    use std::sync::OnceLock;

    fn window(x0: f64, y0: f64, x1: f64, y1: f64) -> Window {
        Window::new(Point::xy(x0, y0), Point::xy(x1, y1)).unwrap()
    }

    fn half_plane() -> &'static Arc<MetricGraph> {
        static G: OnceLock<Arc<MetricGraph>> = OnceLock::new();
        G.get_or_init(|| {
            let dom = Domain::half_space(2, window(-2.0, 0.0, 2.0, 2.0)).unwrap();
            Arc::new(build_graph(&dom, 0.05, Stencil::S8).unwrap())
        })
    }

    fn vertical_pairs(n: usize) -> Vec<(Point, Point)> {
        (0..n)
            .map(|i| {
                let x = -1.5 + 3.0 * (i as f64 + 0.5) / n as f64;
                (Point::xy(x, 0.4), Point::xy(x, 1.6))
            })
            .collect()
    }

    #[test]
    fn gehring_hayman_is_tight_on_vertical_pairs() {
        let g = half_plane();
        let rep = verify_gehring_hayman(g, &vertical_pairs(30)).unwrap();
        let c = rep.constants["C_gh"];
        assert!(rep.pass);
        assert_eq!(rep.samples, 30);
        // geodesics are the segments themselves
        assert!((1.0..1.02).contains(&c), "C_gh {c}");
        assert!(matches!(
            verify_gehring_hayman(g, &vertical_pairs(10)),
            Err(Error::EmptySample(_))
        ));
    }

    #[test]
    fn gehring_hayman_stays_modest_on_random_pairs() {
        let g = half_plane();
        let pairs = sample_point_pairs(g, 40, 5).unwrap();
        let rep = verify_gehring_hayman(g, &pairs).unwrap();
        let c = rep.constants["C_gh"];
        assert!((1.0 - 1e-9..2.5).contains(&c), "C_gh {c}");
        assert_eq!(rep.witness.points.len(), 2);
    }

    #[test]
    fn pommerenke_matches_the_semicircle_oracle() {
        let g = half_plane();
        let mut pairs = vertical_pairs(30);
        pairs.push((Point::xy(-1.0, 0.2), Point::xy(1.0, 0.2)));
        let rep = verify_pommerenke(g, &pairs).unwrap();
        let r = rep.constants["R_po"];
        // the wide pair's geodesic spans exactly its endpoints horizontally
        assert!((0.98..1.08).contains(&r), "R_po {r}");

        // its apex must reach the semicircle through the endpoints
        let geo = crate::qhyp::qh_geodesic(g, &Point::xy(-1.0, 0.2), &Point::xy(1.0, 0.2)).unwrap();
        let apex = geo.points().iter().map(|p| p.coord(1)).fold(0.0, f64::max);
        let oracle = (1.0f64 + 0.04).sqrt();
        assert!((apex - oracle).abs() / oracle < 0.10, "apex {apex} vs {oracle}");
    }

    #[test]
    fn separation_sees_the_straight_competitor_from_the_arc() {
        let g = half_plane();
        let pairs = vec![(Point::xy(-1.0, 0.3), Point::xy(1.0, 0.3))];
        let rep = verify_separation(g, &pairs, 3, 9).unwrap();
        let c = rep.constants["C_sp"];
        // the arched geodesic pulls away from the straight competitor by a
        // bounded multiple of the local boundary distance
        assert!((0.2..1.5).contains(&c), "C_sp {c}");
        assert!(rep.pass);
    }

    #[test]
    fn separation_runs_over_a_sampled_batch() {
        let g = half_plane();
        let pairs = sample_point_pairs(g, 40, 5).unwrap();
        let rep = verify_separation(g, &pairs, 2, 5).unwrap();
        assert!(rep.constants["C_sp"].is_finite());
        assert!(rep.samples >= 30, "samples {}", rep.samples);
    }

    #[test]
    fn faltensatz_requires_a_separating_section() {
        let g = half_plane();
        // a short stub does not split the strip
        let stub = g.select_vertices(|p| (p.coord(0) - 0.0).abs() <= 0.03 && p.coord(1) < 0.3);
        let err = verify_faltensatz(g, &stub, 10, 3).unwrap_err();
        assert!(matches!(err, Error::NotCrossSection(1)));
    }

    #[test]
    fn faltensatz_bounds_excursions_across_a_chord() {
        let dom = Domain::ball(1.0, 2, window(-1.0, -1.0, 1.0, 1.0)).unwrap();
        let g = Arc::new(build_graph(&dom, 0.025, Stencil::S8).unwrap());
        // rim-to-rim pairs inside the cap bow past a chord this deep
        let sigma = g.select_vertices(|p| (p.coord(0) - 0.5).abs() <= 0.55 * 0.025);
        let rep = verify_faltensatz(&g, &sigma, 250, 17).unwrap();
        assert!(rep.pass);
        let a = rep.constants["A"];
        assert!(rep.constants["crossings"] >= 1.0, "no geodesic crossed the chord");
        assert!((0.0..4.0).contains(&a), "A {a}");
        assert!(a > 0.0);
        eprintln!("faltensatz: A {a:.3}, crossings {}", rep.constants["crossings"]);
    }

    #[test]
    fn uniformity_constant_is_small_on_the_half_plane() {
        let g = half_plane();
        let pairs = sample_point_pairs(g, 40, 7).unwrap();
        let rep = verify_uniformity(g, &pairs).unwrap();
        let a = rep.constants["A"];
        // half-plane uniformity constant is classically at most ~2-3
        assert!((1.0..3.5).contains(&a), "A {a}");
        assert!(rep.constants["A_cigar"] <= a + 1e-12);
        assert!(rep.constants["A_quasiconvex"] <= a + 1e-12);
    }

    #[test]
    fn uniformity_sweep_is_flat_on_the_half_plane() {
        let g = half_plane();
        let rep =
            uniformity_sweep(g, &Point::xy(0.0, 0.0), &[0.8, 0.4, 0.2], 6, 11).unwrap();
        assert!(rep.pass, "note: {}", rep.note);
        let growth = rep.constants["growth"];
        assert!(growth < 2.0, "growth {growth}");
    }

    #[test]
    fn llc_constant_is_one_on_the_half_plane() {
        let g = half_plane();
        let rep = verify_llc(g.domain(), g, 30, 5).unwrap();
        assert!(rep.pass, "note: {}", rep.note);
        // convexity: the original balls already connect everything
        assert_eq!(rep.constants["C_llc1"], 1.0);
        let bt = rep.constants["C_bt_observed"];
        assert!(bt <= 2.0 * rep.constants["C_llc1"] + 1e-9, "bt {bt}");
    }

    #[test]
    fn llc_needs_dilation_near_a_slit_tip() {
        let dom = Domain::slit_plane(window(-1.5, -1.5, 1.5, 1.5)).unwrap();
        let g = build_graph(&dom, 0.05, Stencil::S8).unwrap();
        let rep = verify_llc(&dom, &g, 30, 21).unwrap();
        let c1 = rep.constants["C_llc1"];
        assert!(c1 >= 2.0, "C_llc1 {c1} should exceed 1 near the slit");
        assert!(c1 <= 16.0);
    }

    fn upper_field() -> (&'static Arc<MetricGraph>, &'static BusemannField) {
        static F: OnceLock<(Arc<MetricGraph>, BusemannField)> = OnceLock::new();
        let (g, f) = F.get_or_init(|| {
            let dom = Domain::half_space(2, window(-2.0, 0.0, 2.0, 6.5)).unwrap();
            let g = Arc::new(build_graph(&dom, 0.05, Stencil::S8).unwrap());
            let anchor =
                BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
            let f = busemann_field(&g, &anchor, &Point::xy(0.0, 1.0), 6.0).unwrap();
            (g, f)
        });
        (g, f)
    }

    #[test]
    fn boundary_qs_envelope_fits_on_the_half_plane() {
        let (g, field) = upper_field();
        let rep = verify_boundary_qs(g.domain(), g, field, 0.5, 50, 13).unwrap();
        assert!(rep.pass, "note: {}", rep.note);
        let (lam, alpha) = (rep.constants["lambda"], rep.constants["alpha"]);
        assert!(lam <= 100.0, "lambda {lam}");
        // the half-plane boundary metric is a clean power law, so a narrow
        // exponent spread already admits a sane constant
        assert!((1.0..8.0).contains(&alpha), "alpha {alpha}");
        eprintln!("boundary_qs: lambda {lam:.2}, alpha {alpha:.2}");
    }

    #[test]
    fn deformation_bounds_hold_on_the_half_plane() {
        let (g, field) = upper_field();
        let dg = crate::deform::deform(field, 0.25).unwrap();
        let pairs = sample_point_pairs(g, 40, 19).unwrap();
        let rep = verify_deformation_bounds(g, &dg, &pairs).unwrap();
        assert!(rep.pass, "note: {}", rep.note);
        assert_eq!(rep.constants["harnack_edge_violations"], 0.0);
        // quasihyperbolizing the deformation rescales distances by eps here
        let m = rep.constants["M"];
        assert!((3.5..4.5).contains(&m), "M {m} (expected about 1/eps = 4)");
        let c = rep.constants["C_delta"];
        assert!(c < 20.0, "C_delta {c}");
        eprintln!("deformation_bounds: M {m:.3}, C_delta {c:.3}");
    }

    #[test]
    fn bhk_bounds_have_an_equality_case_on_verticals() {
        let g = half_plane();
        let mut pairs = sample_point_pairs(g, 30, 23).unwrap();
        pairs.push((Point::xy(0.0, 0.5), Point::xy(0.0, 1.5)));
        let rep = verify_bhk_uniform_bounds(g, &pairs, 3.0).unwrap();
        assert!(rep.pass, "note: {}", rep.note);
        let lo = rep.constants["bound_ratio_min"];
        assert!(lo >= 0.97, "ratio min {lo}");
        assert!(rep.constants["bound_ratio_max"] <= rep.constants["upper_gate"]);
    }

    #[test]
    fn bhk314_defect_is_bounded_by_the_hyperbolicity_scale() {
        let g = half_plane();
        let rep = verify_bhk314(g, 15, 29).unwrap();
        assert!(rep.samples >= 5, "only {} triples", rep.samples);
        let c = rep.constants["C_A"];
        assert!((0.0..2.5).contains(&c), "C_A {c}");
        eprintln!("bhk314: C_A {c:.3} over {} triples", rep.samples);
    }

    #[test]
    fn rough_starlike_shrinks_with_more_anchors() {
        let dom = Domain::half_space(2, window(-2.0, 0.0, 2.0, 4.0)).unwrap();
        let g = Arc::new(build_graph(&dom, 0.05, Stencil::S8).unwrap());
        let up = |x: f64| {
            BoundaryAnchor::infinity(Point::xy(x, 0.0), Point::xy(0.0, 1.0)).unwrap()
        };
        let two = estimate_rough_starlike(&g, &[up(-1.0), up(1.0)], 3.0, 60, 31).unwrap();
        let three =
            estimate_rough_starlike(&g, &[up(-1.0), up(1.0), up(0.0)], 3.0, 60, 31).unwrap();
        let (k2, k3) = (two.constants["K"], three.constants["K"]);
        assert!(k3 <= k2 + 1e-12, "K grew: {k2} -> {k3}");
        assert!(k2 < 6.0, "K {k2}");
        eprintln!("rough_starlike: K2 {k2:.3}, K3 {k3:.3}");
    }

    #[test]
    fn busemann_anchor_doubling_stays_in_budget() {
        let (g, _) = upper_field();
        let anchor = BoundaryAnchor::infinity(Point::xy(0.0, 0.0), Point::xy(0.0, 1.0)).unwrap();
        let rep =
            busemann_anchor_stability(g, &anchor, &Point::xy(0.0, 1.0), 3.0, 0.72).unwrap();
        assert!(rep.pass, "gap {} note {}", rep.constants["gap"], rep.note);
        // past the proxy the gap saturates at twice the proxy separation
        let gap = rep.constants["gap"];
        assert!((1.2..1.5).contains(&gap), "gap {gap}");
        // inside the proxy scale both renormalizations are grid-exact
        let core = rep.constants["gap_core"];
        assert!(core <= 0.15, "core gap {core}");
        assert!(rep.constants["core_vertices"] > 500.0);
        eprintln!("anchor stability: gap {gap:.4}, core {core:.4}");
    }
}
