//! Deterministic evaluation of the percolation events on a sampled
//! configuration: box crossings (covered, vacant via duality, one-grain),
//! three-grain circuits, covering counts and annulus connections.

use crate::error::ModelError;
use crate::geometry::{
    grain_box_intersects, grain_grain_intersects, grain_segment_intersects, minimize_periodic,
    rot_rects_disjoint, triple_common_point, BoxSpec, GrainSpec, Point, Rect, RotRect, Segment,
    GEOM_TOL, ORIGIN,
};
use crate::sampling::Configuration;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossAxis {
    Horizontal,
    Vertical,
}

// ---------------------------------------------------------------------------
// union-find
// ---------------------------------------------------------------------------

pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Visit candidate grain pairs whose bounding boxes share a spatial-hash
/// cell. Each unordered pair is reported exactly once; the visitor returns
/// `false` to stop the enumeration early.
fn for_candidate_pairs(bboxes: &[Rect], region: Rect, mut visit: impl FnMut(usize, usize) -> bool) {
    let n = bboxes.len();
    if n < 2 {
        return;
    }
    // cell size at grain scale; clamp the grid to a sane size
    let cell = 2.0_f64.max(region.width().max(region.height()) / 512.0);
    let ncx = ((region.width() / cell).ceil() as usize).max(1);
    let ncy = ((region.height() / cell).ceil() as usize).max(1);
    let clampi = |v: f64, n: usize| -> usize { (v.floor().max(0.0) as usize).min(n - 1) };
    let mut cells: Vec<Vec<u32>> = vec![Vec::new(); ncx * ncy];
    let mut spans = Vec::with_capacity(n);
    for (i, b) in bboxes.iter().enumerate() {
        let c = b.intersect(&region);
        if c.is_empty() {
            spans.push((1usize, 0usize, 1usize, 0usize));
            continue;
        }
        let ix0 = clampi((c.x0 - region.x0) / cell, ncx);
        let ix1 = clampi((c.x1 - region.x0) / cell, ncx);
        let iy0 = clampi((c.y0 - region.y0) / cell, ncy);
        let iy1 = clampi((c.y1 - region.y0) / cell, ncy);
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                cells[iy * ncx + ix].push(i as u32);
            }
        }
        spans.push((ix0, ix1, iy0, iy1));
    }
    let mut stamp: Vec<u32> = vec![u32::MAX; n];
    for (i, &(ix0, ix1, iy0, iy1)) in spans.iter().enumerate() {
        if ix0 > ix1 {
            continue;
        }
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                for &j in &cells[iy * ncx + ix] {
                    let j = j as usize;
                    if j > i && stamp[j] != i as u32 {
                        stamp[j] = i as u32;
                        if !visit(i, j) {
                            return;
                        }
                    }
                }
            }
        }
    }
}

/// Do grains `a` and `b` share a point inside the box?
fn pair_edge_in_box(ga: &GrainSpec, gb: &GrainSpec, bx: &BoxSpec, rect: &Rect) -> bool {
    let d2 = ga.center.sub(gb.center).norm2();
    let reach = ga.r + gb.r;
    if d2 > reach * reach {
        return false;
    }
    match crate::geometry::grain_pair_witness(ga, gb) {
        None => false,
        Some(w) if rect.contains(w) => true,
        // grains meet but only outside the box witness: settle by the full
        // convex feasibility over grain-grain-box
        Some(_) => triple_common_point(ga, gb, bx),
    }
}

// ---------------------------------------------------------------------------
// crossing graph
// ---------------------------------------------------------------------------

const MARK_LEFT: u8 = 1;
const MARK_RIGHT: u8 = 2;
const MARK_TOP: u8 = 4;
const MARK_BOTTOM: u8 = 8;

/// Graph of grains intersecting a box, with edges between pairs sharing a
/// point inside the box and side marks from the box boundary segments.
pub struct CrossingGraph {
    /// Indices into the original grain list.
    pub nodes: Vec<usize>,
    comp_marks: Vec<u8>,
}

impl CrossingGraph {
    pub fn build(grains: &[GrainSpec], bx: &BoxSpec) -> Self {
        let nodes: Vec<usize> = (0..grains.len())
            .filter(|&i| grain_box_intersects(&grains[i], bx))
            .collect();
        let sides = [
            (bx.left_side(), MARK_LEFT),
            (bx.right_side(), MARK_RIGHT),
            (bx.top_side(), MARK_TOP),
            (bx.bottom_side(), MARK_BOTTOM),
        ];
        let mut marks: Vec<u8> = Vec::with_capacity(nodes.len());
        for &i in &nodes {
            let mut m = 0u8;
            for (seg, bit) in &sides {
                if grain_segment_intersects(&grains[i], seg) {
                    m |= bit;
                }
            }
            marks.push(m);
        }
        let bboxes: Vec<Rect> = nodes.iter().map(|&i| grains[i].bbox()).collect();
        let mut uf = UnionFind::new(nodes.len());
        let rect = bx.rect();
        for_candidate_pairs(&bboxes, rect, |a, b| {
            let (ga, gb) = (&grains[nodes[a]], &grains[nodes[b]]);
            if pair_edge_in_box(ga, gb, bx, &rect) {
                uf.union(a as u32, b as u32);
            }
            true
        });
        // fold marks into component roots
        let mut comp_marks = vec![0u8; nodes.len()];
        for i in 0..nodes.len() {
            let root = uf.find(i as u32) as usize;
            comp_marks[root] |= marks[i];
        }
        // compress: store per-node the root marks
        let folded: Vec<u8> = (0..nodes.len())
            .map(|i| comp_marks[uf.find(i as u32) as usize])
            .collect();
        CrossingGraph {
            nodes,
            comp_marks: folded,
        }
    }

    pub fn has_crossing(&self, axis: CrossAxis) -> bool {
        let want = match axis {
            CrossAxis::Horizontal => MARK_LEFT | MARK_RIGHT,
            CrossAxis::Vertical => MARK_TOP | MARK_BOTTOM,
        };
        self.comp_marks.iter().any(|&m| m & want == want)
    }
}

/// Decide one crossing direction with early exits: a single grain touching
/// both sides settles it immediately, and the union-find stops as soon as a
/// component carries both side marks.
pub fn crossing_decision(grains: &[GrainSpec], bx: &BoxSpec, axis: CrossAxis) -> bool {
    let (side_a, side_b) = match axis {
        CrossAxis::Horizontal => (bx.left_side(), bx.right_side()),
        CrossAxis::Vertical => (bx.bottom_side(), bx.top_side()),
    };
    let mut nodes = Vec::new();
    let mut marks: Vec<u8> = Vec::new();
    for (i, g) in grains.iter().enumerate() {
        if !grain_box_intersects(g, bx) {
            continue;
        }
        let m = grain_segment_intersects(g, &side_a) as u8
            | (grain_segment_intersects(g, &side_b) as u8) << 1;
        if m == 3 {
            return true; // one grain joins both sides
        }
        nodes.push(i);
        marks.push(m);
    }
    let bboxes: Vec<Rect> = nodes.iter().map(|&i| grains[i].bbox()).collect();
    let mut uf = UnionFind::new(nodes.len());
    let mut root_marks = marks.clone();
    let rect = bx.rect();
    let mut found = false;
    for_candidate_pairs(&bboxes, rect, |a, b| {
        let (ra, rb) = (uf.find(a as u32), uf.find(b as u32));
        if ra == rb {
            return true;
        }
        // joining cannot help a crossing unless the united marks differ
        let merged = root_marks[ra as usize] | root_marks[rb as usize];
        let (ga, gb) = (&grains[nodes[a]], &grains[nodes[b]]);
        if pair_edge_in_box(ga, gb, bx, &rect) {
            uf.union(ra, rb);
            let root = uf.find(ra) as usize;
            root_marks[root] = merged;
            if merged == 3 {
                found = true;
                return false;
            }
        }
        true
    });
    found
}

/// Does a covered path join the two opposite sides of the box along `axis`?
pub fn covered_crossing(config: &Configuration, bx: &BoxSpec, axis: CrossAxis) -> bool {
    crossing_decision(&config.grains, bx, axis)
}

/// Vacant left-right crossing, by duality: it exists iff no covered
/// top-bottom crossing does.
pub fn vacant_lr_crossing(config: &Configuration, bx: &BoxSpec) -> bool {
    !covered_crossing(config, bx, CrossAxis::Vertical)
}

/// Does a single grain meet both the left and right sides?
pub fn one_ellipse_crossing(config: &Configuration, bx: &BoxSpec) -> bool {
    let need = bx.width() / 2.0;
    let (left, right) = (bx.left_side(), bx.right_side());
    config.grains.iter().any(|g| {
        // a grain reaches at most R from its center, so R >= lk/2 is necessary
        g.r + GEOM_TOL >= need
            && grain_segment_intersects(g, &left)
            && grain_segment_intersects(g, &right)
    })
}

// ---------------------------------------------------------------------------
// three-grain circuits
// ---------------------------------------------------------------------------

/// Segments `S_j^+-(a)` and center regions `D_j(a)` for the three-grain
/// circuit around the origin at scale `a`.
pub struct CircuitSpec {
    pub a: f64,
    pub segments: [(Segment, Segment); 3],
    pub centers: [RotRect; 3],
}

impl CircuitSpec {
    /// Builds the circuit geometry and asserts the disjointness the event
    /// needs: `D_j` inside `B_j` and disjoint from the other strips.
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(ModelError::domain("circuit scale must be positive"));
        }
        let s3 = 3.0_f64.sqrt() / 2.0;
        let s_minus = Segment::new(
            Point::new(-s3 * a, -a / 2.0),
            Point::new(-s3 * a, -a / 4.0),
        );
        let s_plus = Segment::new(Point::new(s3 * a, -a / 2.0), Point::new(s3 * a, -a / 4.0));
        let d1 = RotRect::new(Point::new(0.0, -3.0 * a / 8.0), a / 4.0, a / 16.0, 0.0);
        let b1 = RotRect::new(Point::new(0.0, -3.0 * a / 8.0), s3 * a, a / 8.0, 0.0);
        let rot = 2.0 * std::f64::consts::PI / 3.0;
        let segments = [
            (s_minus, s_plus),
            (s_minus.rotate(rot), s_plus.rotate(rot)),
            (s_minus.rotate(2.0 * rot), s_plus.rotate(2.0 * rot)),
        ];
        let centers = [d1, d1.rotate(rot), d1.rotate(2.0 * rot)];
        let strips = [b1, b1.rotate(rot), b1.rotate(2.0 * rot)];
        for j in 0..3 {
            for c in centers[j].corners() {
                if !strips[j].contains(c) {
                    return Err(ModelError::domain(format!(
                        "circuit geometry violated: D_{} not inside B_{}",
                        j + 1,
                        j + 1
                    )));
                }
            }
            for (i, strip) in strips.iter().enumerate() {
                if i != j && !rot_rects_disjoint(&centers[j], strip) {
                    return Err(ModelError::domain(format!(
                        "circuit geometry violated: D_{} meets B_{}",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(CircuitSpec {
            a,
            segments,
            centers,
        })
    }
}

/// Three-grain circuit around the origin: for each `j` some single grain
/// centered in `D_j(a)` meets both `S_j^-(a)` and `S_j^+(a)`.
pub fn three_ellipse_circuit(config: &Configuration, a: f64) -> Result<bool> {
    let spec = CircuitSpec::new(a)?;
    Ok(circuit_holds(&spec, &config.grains))
}

pub fn circuit_holds(spec: &CircuitSpec, grains: &[GrainSpec]) -> bool {
    (0..3).all(|j| {
        let (ref sm, ref sp) = spec.segments[j];
        grains.iter().any(|g| {
            spec.centers[j].contains(g.center)
                && grain_segment_intersects(g, sm)
                && grain_segment_intersects(g, sp)
        })
    })
}

// ---------------------------------------------------------------------------
// covering counts and annulus connections
// ---------------------------------------------------------------------------

/// Number of grains centered in the ball `B(0, n)` that contain the closed
/// disk `B(w, eps)`.
pub fn count_covering(config: &Configuration, w: Point, eps: f64, n: f64) -> usize {
    assert!((0.0..0.5).contains(&eps) || eps == 0.0);
    config
        .grains
        .iter()
        .filter(|g| {
            if g.center.norm() > n {
                return false;
            }
            // the grain reaches at most R from its center
            if g.center.sub(w).norm() + eps > g.r + GEOM_TOL {
                return false;
            }
            crate::geometry::disk_in_grain(w, eps, g)
        })
        .count()
}

/// Smallest distance from the origin to a point of the grain (0 if the grain
/// contains the origin).
pub fn grain_min_radius(g: &GrainSpec) -> f64 {
    if crate::geometry::point_in_grain(ORIGIN, g) {
        0.0
    } else {
        g.boundary_distance(ORIGIN)
    }
}

/// Largest distance from the origin to a point of the grain.
pub fn grain_max_radius(g: &GrainSpec) -> f64 {
    let (sa, sb) = g.semi_axes();
    if g.kind == crate::geometry::GrainKind::Disk {
        return g.center.norm() + sa;
    }
    let (s, c) = g.v.sin_cos();
    let axis1 = Point::new(c * sa, s * sa);
    let axis2 = Point::new(-s * sb, c * sb);
    let f = |t: f64| {
        let (st, ct) = t.sin_cos();
        -(g.center.add(axis1.scale(ct)).add(axis2.scale(st))).norm2()
    };
    (-minimize_periodic(&f, 16)).max(0.0).sqrt()
}

/// Does the grain meet the circle of radius `r` around the origin?
pub fn grain_meets_circle(g: &GrainSpec, r: f64) -> bool {
    grain_min_radius(g) <= r + GEOM_TOL && grain_max_radius(g) + GEOM_TOL >= r
}

/// Is there a chain of pairwise-intersecting grains, each meeting the closed
/// annulus, that connects the inner circle to the outer circle?
pub fn annulus_connection(config: &Configuration, r_in: f64, r_out: f64) -> bool {
    assert!(r_out > r_in && r_in > 0.0);
    let mut idx = Vec::new();
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for (i, g) in config.grains.iter().enumerate() {
        let lo = grain_min_radius(g);
        let hi = grain_max_radius(g);
        // grain meets the closed annulus
        if lo <= r_out + GEOM_TOL && hi + GEOM_TOL >= r_in {
            idx.push(i);
            inner.push(lo <= r_in + GEOM_TOL && hi + GEOM_TOL >= r_in);
            outer.push(lo <= r_out + GEOM_TOL && hi + GEOM_TOL >= r_out);
        }
    }
    let grains = &config.grains;
    let bboxes: Vec<Rect> = idx.iter().map(|&i| grains[i].bbox()).collect();
    let region = Rect {
        x0: -r_out,
        x1: r_out,
        y0: -r_out,
        y1: r_out,
    };
    let mut uf = UnionFind::new(idx.len());
    for_candidate_pairs(&bboxes, region, |a, b| {
        if grain_grain_intersects(&grains[idx[a]], &grains[idx[b]]) {
            uf.union(a as u32, b as u32);
        }
        true
    });
    let n = idx.len();
    let mut comp_in = vec![false; n];
    let mut comp_out = vec![false; n];
    for i in 0..n {
        let r = uf.find(i as u32) as usize;
        comp_in[r] |= inner[i];
        comp_out[r] |= outer[i];
    }
    (0..n).any(|i| comp_in[i] && comp_out[i])
}

/// Vacant circuit around the origin in `B(3l) \ B(l)`, by duality: it exists
/// iff no covered component crosses the annulus radially.
pub fn vacant_circuit_in_annulus(config: &Configuration, l: f64) -> bool {
    !annulus_connection(config, l, 3.0 * l)
}

// ---------------------------------------------------------------------------
// named events
// ---------------------------------------------------------------------------

/// A percolation event bound to its geometry, evaluable on any configuration.
#[derive(Clone, Debug)]
pub enum Event {
    CoveredLr(BoxSpec),
    CoveredTb(BoxSpec),
    VacantLr(BoxSpec),
    OneEllipseLr(BoxSpec),
    Circuit3 { a: f64 },
    PointCovered { at: Point },
    DiskCovered { at: Point, eps: f64 },
    AnnulusConn { r_in: f64, r_out: f64 },
    VacantAnnulusCircuit { l: f64 },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::CoveredLr(_) => "covered_lr",
            Event::CoveredTb(_) => "covered_tb",
            Event::VacantLr(_) => "vacant_lr",
            Event::OneEllipseLr(_) => "one_ellipse_lr",
            Event::Circuit3 { .. } => "circuit3",
            Event::PointCovered { .. } => "point_covered",
            Event::DiskCovered { .. } => "disk_covered",
            Event::AnnulusConn { .. } => "annulus_conn",
            Event::VacantAnnulusCircuit { .. } => "vacant_annulus_circuit",
        }
    }

    pub fn eval(&self, config: &Configuration) -> bool {
        match self {
            Event::CoveredLr(bx) => covered_crossing(config, bx, CrossAxis::Horizontal),
            Event::CoveredTb(bx) => covered_crossing(config, bx, CrossAxis::Vertical),
            Event::VacantLr(bx) => vacant_lr_crossing(config, bx),
            Event::OneEllipseLr(bx) => one_ellipse_crossing(config, bx),
            Event::Circuit3 { a } => {
                let spec = CircuitSpec::new(*a).expect("validated at parse time");
                circuit_holds(&spec, &config.grains)
            }
            Event::PointCovered { at } => config
                .grains
                .iter()
                .any(|g| crate::geometry::point_in_grain(*at, g)),
            Event::DiskCovered { at, eps } => config
                .grains
                .iter()
                .any(|g| crate::geometry::disk_in_grain(*at, *eps, g)),
            Event::AnnulusConn { r_in, r_out } => annulus_connection(config, *r_in, *r_out),
            Event::VacantAnnulusCircuit { l } => vacant_circuit_in_annulus(config, *l),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{AxisLaw, Configuration, Truncation};
    use crate::geometry::GrainKind;

    fn config_with(grains: Vec<GrainSpec>) -> Configuration {
        Configuration {
            window: BoxSpec::new(100.0, 1.0),
            u: 0.0,
            law: AxisLaw::pareto(2.0).unwrap(),
            grain_kind: GrainKind::Ellipse,
            truncation: Truncation::Exact,
            seed: 0,
            grains,
        }
    }

    fn ell(cx: f64, cy: f64, r: f64, v: f64) -> GrainSpec {
        GrainSpec::ellipse(Point::new(cx, cy), r, v)
    }

    #[test]
    fn covered_crossing_examples() {
        let bx = BoxSpec::new(2.0, 1.0);
        // a single grain spanning the full horizontal diameter
        let cfg = config_with(vec![ell(0.0, 0.0, 2.0, 0.0)]);
        assert!(covered_crossing(&cfg, &bx, CrossAxis::Horizontal));
        // empty configuration
        assert!(!covered_crossing(&config_with(vec![]), &bx, CrossAxis::Horizontal));
        // two unit disks, each touching a side, meeting inside the box
        let cfg = config_with(vec![ell(-0.8, 0.0, 1.0, 0.0), ell(0.8, 0.0, 1.0, 0.0)]);
        assert!(covered_crossing(&cfg, &bx, CrossAxis::Horizontal));
    }

    #[test]
    fn vacant_crossing_examples() {
        let bx = BoxSpec::new(2.0, 1.0);
        assert!(vacant_lr_crossing(&config_with(vec![]), &bx));
        let cfg = config_with(vec![ell(0.0, 0.0, 10.0, std::f64::consts::FRAC_PI_2)]);
        assert!(!vacant_lr_crossing(&cfg, &bx));
    }

    #[test]
    fn one_ellipse_examples() {
        let bx = BoxSpec::new(4.0, 2.0); // width 8
        let cfg = config_with(vec![ell(0.0, 0.0, 8.0, 0.0)]);
        assert!(one_ellipse_crossing(&cfg, &bx));
        assert!(!one_ellipse_crossing(&config_with(vec![]), &bx));
        // any grain with R < lk/2 cannot span
        let cfg = config_with(vec![ell(0.0, 0.0, 3.9, 0.0)]);
        assert!(!one_ellipse_crossing(&cfg, &bx));
        // implication: a one-grain crossing is a covered crossing
        let cfg = config_with(vec![ell(0.3, 0.1, 9.0, 0.02)]);
        if one_ellipse_crossing(&cfg, &bx) {
            assert!(covered_crossing(&cfg, &bx, CrossAxis::Horizontal));
        }
    }

    #[test]
    fn circuit_spec_geometry_validates() {
        for a in [3.0, 4.0, 10.0, 81.0] {
            CircuitSpec::new(a).unwrap();
        }
    }

    #[test]
    fn circuit_examples() {
        let a = 8.0;
        let rot = 2.0 * std::f64::consts::PI / 3.0;
        let base = ell(0.0, -3.0 * a / 8.0, a, 0.0);
        let mk = |j: usize| {
            let c = base.center.rotate(rot * j as f64);
            GrainSpec::ellipse(c, a, rot * j as f64)
        };
        let cfg = config_with(vec![mk(0), mk(1), mk(2)]);
        assert!(three_ellipse_circuit(&cfg, a).unwrap());
        assert!(!three_ellipse_circuit(&config_with(vec![]), a).unwrap());
        // translated so the centers leave D_j
        let shift = Point::new(a / 2.0, 0.0);
        let cfg = config_with(vec![
            GrainSpec::ellipse(mk(0).center.add(shift), a, 0.0),
            GrainSpec::ellipse(mk(1).center.add(shift), a, rot),
            GrainSpec::ellipse(mk(2).center.add(shift), a, 2.0 * rot),
        ]);
        assert!(!three_ellipse_circuit(&cfg, a).unwrap());
    }

    #[test]
    fn count_covering_examples() {
        let cfg = config_with(vec![]);
        assert_eq!(count_covering(&cfg, ORIGIN, 0.3, 1.0), 0);
        let cfg = config_with(vec![ell(0.0, 0.0, 5.0, 0.0)]);
        assert_eq!(count_covering(&cfg, ORIGIN, 0.3, 1.0), 1);
        // center outside B(n) does not count
        let cfg = config_with(vec![ell(3.0, 0.0, 50.0, 0.0)]);
        assert_eq!(count_covering(&cfg, ORIGIN, 0.3, 1.0), 0);
        assert_eq!(count_covering(&cfg, ORIGIN, 0.3, 4.0), 1);
    }

    #[test]
    fn annulus_examples() {
        assert!(!annulus_connection(&config_with(vec![]), 1.0, 3.0));
        // one disk grain of radius r_out centered at the origin meets both
        let cfg = Configuration {
            grain_kind: GrainKind::Disk,
            grains: vec![GrainSpec::disk(ORIGIN, 3.0)],
            ..config_with(vec![])
        };
        assert!(annulus_connection(&cfg, 1.0, 3.0));
        // a chain of unit disks along the x axis
        let chain: Vec<GrainSpec> =
            (0..8).map(|i| ell(0.2 + 1.8 * i as f64, 0.0, 1.0, 0.0)).collect();
        let cfg = config_with(chain);
        assert!(annulus_connection(&cfg, 2.0, 9.0));
        assert!(!vacant_circuit_in_annulus(&cfg, 2.0));
        // a grain spanning from inside B(l) to outside B(3l)
        let cfg = config_with(vec![ell(0.0, 0.0, 50.0, 0.3)]);
        assert!(!vacant_circuit_in_annulus(&cfg, 2.0));
        assert!(vacant_circuit_in_annulus(&config_with(vec![]), 2.0));
    }

    #[test]
    fn min_max_radius_known_values() {
        let g = ell(3.0, 0.0, 2.0, 0.0);
        assert!((grain_min_radius(&g) - 1.0).abs() < 1e-9);
        assert!((grain_max_radius(&g) - 5.0).abs() < 1e-9);
        let g = ell(0.0, 0.0, 4.0, 0.7);
        assert_eq!(grain_min_radius(&g), 0.0);
        assert!((grain_max_radius(&g) - 4.0).abs() < 1e-9);
        let d = GrainSpec::disk(Point::new(0.0, 5.0), 2.0);
        assert!((grain_min_radius(&d) - 3.0).abs() < 1e-12);
        assert!((grain_max_radius(&d) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn monotonicity_adding_grains() {
        use rand::Rng;
        let bx = BoxSpec::new(6.0, 1.0);
        let mut rng = crate::rng::stream(17);
        for _ in 0..50 {
            let mut grains: Vec<GrainSpec> = (0..12)
                .map(|_| {
                    ell(
                        rng.gen_range(-4.0..4.0),
                        rng.gen_range(-4.0..4.0),
                        rng.gen_range(1.0..3.0),
                        rng.gen_range(-1.5..1.5),
                    )
                })
                .collect();
            let before = covered_crossing(&config_with(grains.clone()), &bx, CrossAxis::Horizontal);
            let before_vac = vacant_lr_crossing(&config_with(grains.clone()), &bx);
            grains.push(ell(
                rng.gen_range(-4.0..4.0),
                rng.gen_range(-4.0..4.0),
                rng.gen_range(1.0..4.0),
                rng.gen_range(-1.5..1.5),
            ));
            let after = covered_crossing(&config_with(grains.clone()), &bx, CrossAxis::Horizontal);
            let after_vac = vacant_lr_crossing(&config_with(grains), &bx);
            assert!(!(before && !after), "adding a grain removed a covered crossing");
            assert!(!(!before_vac && after_vac), "adding a grain created a vacant crossing");
        }
    }
}
