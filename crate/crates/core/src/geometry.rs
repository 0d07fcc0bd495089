//! Exact predicates and measures for grains (ellipses with unit semi-minor
//! axis, or disks), segments and boxes.
//!
//! Conventions: all sets are closed, so boundary contact counts as
//! intersection. `R` is the SEMI-major axis and the semi-minor axis is 1;
//! membership in the grain frame is `(x/R)^2 + y^2 <= 1`. Gap tests use the
//! shared geometric tolerance [`GEOM_TOL`]; a result within tolerance of zero
//! is "marginal" and resolves to intersecting.

use serde::{Deserialize, Serialize};

/// Geometric tolerance in plane units for all gap tests.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    /// Counter-clockwise rotation by `theta`.
    pub fn rotate(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

pub const ORIGIN: Point = Point::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrainKind {
    /// Ellipse with semi-major axis `R`, semi-minor axis 1.
    Ellipse,
    /// Disk of radius `R` (the Boolean comparison model).
    Disk,
}

/// One random shape: center, semi-major axis `R >= 1`, direction
/// `V` in `(-pi/2, pi/2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrainSpec {
    pub center: Point,
    pub r: f64,
    pub v: f64,
    pub kind: GrainKind,
}

/// Normalize an axis direction into `(-pi/2, pi/2]` (directions are only
/// defined modulo pi).
pub fn normalize_direction(v: f64) -> f64 {
    let mut v = v % std::f64::consts::PI;
    if v > std::f64::consts::FRAC_PI_2 {
        v -= std::f64::consts::PI;
    } else if v <= -std::f64::consts::FRAC_PI_2 {
        v += std::f64::consts::PI;
    }
    v
}

impl GrainSpec {
    pub fn ellipse(center: Point, r: f64, v: f64) -> Self {
        assert!(r >= 1.0 && r.is_finite(), "semi-major axis must be >= 1, got {r}");
        GrainSpec {
            center,
            r,
            v: normalize_direction(v),
            kind: GrainKind::Ellipse,
        }
    }

    pub fn disk(center: Point, r: f64) -> Self {
        assert!(r >= 1.0 && r.is_finite(), "disk radius must be >= 1, got {r}");
        GrainSpec {
            center,
            r,
            v: 0.0,
            kind: GrainKind::Disk,
        }
    }

    pub fn new(center: Point, r: f64, v: f64, kind: GrainKind) -> Self {
        match kind {
            GrainKind::Ellipse => GrainSpec::ellipse(center, r, v),
            GrainKind::Disk => GrainSpec::disk(center, r),
        }
    }

    /// Semi-axes `(major, minor)` of the grain.
    pub fn semi_axes(&self) -> (f64, f64) {
        match self.kind {
            GrainKind::Ellipse => (self.r, 1.0),
            GrainKind::Disk => (self.r, self.r),
        }
    }

    /// Map a world point into the grain frame (translate, then rotate by -V).
    pub fn to_frame(&self, p: Point) -> Point {
        p.sub(self.center).rotate(-self.v)
    }

    /// Membership gap: `(x/R)^2 + y^2 - 1` in the grain frame.
    /// Non-positive iff the point lies in the closed grain.
    pub fn gap(&self, p: Point) -> f64 {
        let q = self.to_frame(p);
        let (a, b) = self.semi_axes();
        let gx = q.x / a;
        let gy = q.y / b;
        gx * gx + gy * gy - 1.0
    }

    /// Grain area (`pi R` for ellipses, `pi R^2` for disks).
    pub fn area(&self) -> f64 {
        let (a, b) = self.semi_axes();
        std::f64::consts::PI * a * b
    }

    /// Half-extent of the grain along the world x axis.
    pub fn half_extent_x(&self) -> f64 {
        support_extent(self, 0.0) / 2.0
    }

    /// Half-extent of the grain along the world y axis.
    pub fn half_extent_y(&self) -> f64 {
        support_extent(self, std::f64::consts::FRAC_PI_2) / 2.0
    }

    /// Axis-aligned bounding rectangle.
    pub fn bbox(&self) -> Rect {
        let hx = self.half_extent_x();
        let hy = self.half_extent_y();
        Rect {
            x0: self.center.x - hx,
            x1: self.center.x + hx,
            y0: self.center.y - hy,
            y1: self.center.y + hy,
        }
    }

    /// World-frame quadratic coefficients of the membership gap, expanded
    /// about the center: `gap = qxx dx^2 + qxy dx dy + qyy dy^2 - 1` with
    /// `(dx, dy) = p - center`. This is the alternative algebraic route used
    /// by the raster oracle.
    pub fn conic(&self) -> Conic {
        let (a, b) = self.semi_axes();
        let (s, c) = self.v.sin_cos();
        let ia = 1.0 / (a * a);
        let ib = 1.0 / (b * b);
        Conic {
            cx: self.center.x,
            cy: self.center.y,
            qxx: c * c * ia + s * s * ib,
            qyy: s * s * ia + c * c * ib,
            qxy: 2.0 * s * c * (ia - ib),
        }
    }

    /// Unsigned distance from `p` to the grain boundary (works for points
    /// inside and outside).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        let q = self.to_frame(p);
        let (a, b) = self.semi_axes();
        if self.kind == GrainKind::Disk {
            return (q.norm() - a).abs();
        }
        ellipse_boundary_distance(a, b, q.x.abs(), q.y.abs())
    }
}

/// Expanded world-frame quadratic form of a grain.
#[derive(Clone, Copy, Debug)]
pub struct Conic {
    pub cx: f64,
    pub cy: f64,
    pub qxx: f64,
    pub qxy: f64,
    pub qyy: f64,
}

impl Conic {
    #[inline]
    pub fn gap(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.cx;
        let dy = y - self.cy;
        self.qxx * dx * dx + self.qxy * dx * dy + self.qyy * dy * dy - 1.0
    }

    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.gap(x, y) <= 0.0
    }
}

/// Axis-aligned box `[-lk/2, lk/2] x [-l/2, l/2]` relative to `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    /// Height in plane units.
    pub l: f64,
    /// Aspect ratio; the width is `k * l`.
    pub k: f64,
    pub center: Point,
}

impl BoxSpec {
    pub fn new(l: f64, k: f64) -> Self {
        Self::at(l, k, ORIGIN)
    }

    pub fn at(l: f64, k: f64, center: Point) -> Self {
        assert!(l > 0.0 && k > 0.0, "box requires l > 0 and k > 0");
        BoxSpec { l, k, center }
    }

    pub fn width(&self) -> f64 {
        self.k * self.l
    }

    pub fn height(&self) -> f64 {
        self.l
    }

    pub fn rect(&self) -> Rect {
        Rect {
            x0: self.center.x - self.width() / 2.0,
            x1: self.center.x + self.width() / 2.0,
            y0: self.center.y - self.height() / 2.0,
            y1: self.center.y + self.height() / 2.0,
        }
    }

    /// Left side `L^-`.
    pub fn left_side(&self) -> Segment {
        let r = self.rect();
        Segment::new(Point::new(r.x0, r.y0), Point::new(r.x0, r.y1))
    }

    /// Right side `L^+`.
    pub fn right_side(&self) -> Segment {
        let r = self.rect();
        Segment::new(Point::new(r.x1, r.y0), Point::new(r.x1, r.y1))
    }

    pub fn bottom_side(&self) -> Segment {
        let r = self.rect();
        Segment::new(Point::new(r.x0, r.y0), Point::new(r.x1, r.y0))
    }

    pub fn top_side(&self) -> Segment {
        let r = self.rect();
        Segment::new(Point::new(r.x0, r.y1), Point::new(r.x1, r.y1))
    }

    pub fn contains(&self, p: Point) -> bool {
        self.rect().contains(p)
    }

    /// Radius of the smallest origin-centered... of the circumscribed circle.
    pub fn circumradius(&self) -> f64 {
        (self.width() * self.width() + self.height() * self.height()).sqrt() / 2.0
    }
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn is_empty(&self) -> bool {
        self.x0 > self.x1 || self.y0 > self.y1
    }

    pub fn intersect(&self, o: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(o.x0),
            x1: self.x1.min(o.x1),
            y0: self.y0.max(o.y0),
            y1: self.y1.min(o.y1),
        }
    }

    /// Signed gap of a point against the rectangle: negative inside,
    /// max of the four edge gaps.
    pub fn gap(&self, p: Point) -> f64 {
        (self.x0 - p.x)
            .max(p.x - self.x1)
            .max(self.y0 - p.y)
            .max(p.y - self.y1)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }

    pub fn clamp_point(&self, p: Point) -> Point {
        Point::new(p.x.clamp(self.x0, self.x1), p.y.clamp(self.y0, self.y1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        assert!(a != b, "segment endpoints must differ");
        Segment { a, b }
    }

    /// Rotate both endpoints around the origin.
    pub fn rotate(&self, theta: f64) -> Segment {
        Segment::new(self.a.rotate(theta), self.b.rotate(theta))
    }
}

/// Closed rectangle with an orientation (used for the circuit center regions).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotRect {
    pub center: Point,
    pub half_w: f64,
    pub half_h: f64,
    pub angle: f64,
}

impl RotRect {
    pub fn new(center: Point, half_w: f64, half_h: f64, angle: f64) -> Self {
        assert!(half_w > 0.0 && half_h > 0.0);
        RotRect {
            center,
            half_w,
            half_h,
            angle,
        }
    }

    /// Rotate the whole rectangle around the origin.
    pub fn rotate(&self, theta: f64) -> RotRect {
        RotRect {
            center: self.center.rotate(theta),
            half_w: self.half_w,
            half_h: self.half_h,
            angle: self.angle + theta,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        let q = p.sub(self.center).rotate(-self.angle);
        q.x.abs() <= self.half_w && q.y.abs() <= self.half_h
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_w * self.half_h
    }

    pub fn corners(&self) -> [Point; 4] {
        let mut out = [ORIGIN; 4];
        for (i, (sx, sy)) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            out[i] = self
                .center
                .add(Point::new(sx * self.half_w, sy * self.half_h).rotate(self.angle));
        }
        out
    }

    /// Map a point from the unit square `[-1,1]^2` into the rectangle.
    pub fn from_unit(&self, ux: f64, uy: f64) -> Point {
        self.center
            .add(Point::new(ux * self.half_w, uy * self.half_h).rotate(self.angle))
    }
}

/// Separating-axis disjointness test for two rotated rectangles; `true` means
/// provably disjoint with a strictly positive margin.
pub fn rot_rects_disjoint(a: &RotRect, b: &RotRect) -> bool {
    let axes = [
        Point::new(a.angle.cos(), a.angle.sin()),
        Point::new(-a.angle.sin(), a.angle.cos()),
        Point::new(b.angle.cos(), b.angle.sin()),
        Point::new(-b.angle.sin(), b.angle.cos()),
    ];
    let project = |r: &RotRect, axis: Point| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in r.corners() {
            let t = c.dot(axis);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        (lo, hi)
    };
    for axis in axes {
        let (alo, ahi) = project(a, axis);
        let (blo, bhi) = project(b, axis);
        if ahi < blo - GEOM_TOL || bhi < alo - GEOM_TOL {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// predicates
// ---------------------------------------------------------------------------

/// Closed membership: does `p` lie in the grain?
pub fn point_in_grain(p: Point, g: &GrainSpec) -> bool {
    g.gap(p) <= 0.0
}

/// Is the closed disk `B(w, eps)` contained in the closed grain?
/// `eps = 0` degrades to point membership.
pub fn disk_in_grain(w: Point, eps: f64, g: &GrainSpec) -> bool {
    assert!(eps >= 0.0);
    if !point_in_grain(w, g) {
        return false;
    }
    if eps == 0.0 {
        return true;
    }
    g.boundary_distance(w) >= eps
}

/// Does the closed grain meet the closed segment?
///
/// The grain is mapped to the unit disk by the affine transform
/// (rotate -V, scale x by 1/R), reducing the test to the distance from the
/// origin to the image segment.
pub fn grain_segment_intersects(g: &GrainSpec, s: &Segment) -> bool {
    let (sa, sb) = (g.to_frame(s.a), g.to_frame(s.b));
    let (ax, bx) = g.semi_axes();
    let pa = Point::new(sa.x / ax, sa.y / bx);
    let pb = Point::new(sb.x / ax, sb.y / bx);
    dist2_origin_segment(pa, pb) <= (1.0 + GEOM_TOL) * (1.0 + GEOM_TOL)
}

fn dist2_origin_segment(a: Point, b: Point) -> f64 {
    let d = b.sub(a);
    let dd = d.norm2();
    if dd == 0.0 {
        return a.norm2();
    }
    let t = (-a.dot(d) / dd).clamp(0.0, 1.0);
    a.add(d.scale(t)).norm2()
}

fn dist2_point_segment(p: Point, a: Point, b: Point) -> f64 {
    dist2_origin_segment(a.sub(p), b.sub(p))
}

fn segments_cross(a1: Point, a2: Point, b1: Point, b2: Point) -> bool {
    let orient = |p: Point, q: Point, r: Point| -> f64 {
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    };
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Squared distance between two closed segments (either may degenerate to a
/// point).
pub(crate) fn dist2_segment_segment(a1: Point, a2: Point, b1: Point, b2: Point) -> f64 {
    if segments_cross(a1, a2, b1, b2) {
        return 0.0;
    }
    dist2_point_segment(a1, b1, b2)
        .min(dist2_point_segment(a2, b1, b2))
        .min(dist2_point_segment(b1, a1, a2))
        .min(dist2_point_segment(b2, a1, a2))
}

/// Does the closed grain meet the closed box?
pub fn grain_box_intersects(g: &GrainSpec, b: &BoxSpec) -> bool {
    let rect = b.rect();
    if rect.contains(g.center) {
        return true;
    }
    // quick reject: bounding boxes disjoint beyond tolerance
    let gb = g.bbox();
    if gb.x1 < rect.x0 - GEOM_TOL
        || gb.x0 > rect.x1 + GEOM_TOL
        || gb.y1 < rect.y0 - GEOM_TOL
        || gb.y0 > rect.y1 + GEOM_TOL
    {
        return false;
    }
    for c in rect.corners() {
        if point_in_grain(c, g) {
            return true;
        }
    }
    for s in [
        b.left_side(),
        b.right_side(),
        b.top_side(),
        b.bottom_side(),
    ] {
        if grain_segment_intersects(g, &s) {
            return true;
        }
    }
    false
}

/// Do the two closed grains share a point?
pub fn grain_grain_intersects(a: &GrainSpec, b: &GrainSpec) -> bool {
    grain_pair_witness(a, b).is_some()
}

/// A common point of the two grains, or `None` when they are disjoint.
/// Marginal contacts (within [`GEOM_TOL`]) count as intersecting; the
/// witness then lies within tolerance of both sets.
pub fn grain_pair_witness(a: &GrainSpec, b: &GrainSpec) -> Option<Point> {
    let d = a.center.sub(b.center).norm();
    // every grain contains the unit disk at its center
    let (amin, bmin) = (a.semi_axes().1, b.semi_axes().1);
    if d <= amin + bmin + GEOM_TOL {
        return Some(a.center.add(b.center).scale(0.5));
    }
    if d > a.r + b.r + GEOM_TOL {
        return None;
    }
    // every grain lies in the stadium of radius semi-minor around its major
    // axis segment, so distant axis segments certify disjointness
    let axis_seg = |g: &GrainSpec| -> (Point, Point) {
        match g.kind {
            GrainKind::Disk => (g.center, g.center),
            GrainKind::Ellipse => {
                let u = Point::new(g.v.cos(), g.v.sin()).scale(g.r);
                (g.center.sub(u), g.center.add(u))
            }
        }
    };
    let (a1, a2) = axis_seg(a);
    let (b1, b2) = axis_seg(b);
    let clearance = amin + bmin + GEOM_TOL;
    if dist2_segment_segment(a1, a2, b1, b2) > clearance * clearance {
        return None;
    }
    if a.kind == GrainKind::Disk && b.kind == GrainKind::Disk {
        if d <= a.r + b.r + GEOM_TOL {
            // point on the chord between the centers at the disk boundary mix
            let t = a.r / (a.r + b.r);
            return Some(a.center.add(b.center.sub(a.center).scale(t)));
        }
        return None;
    }
    // map `a` to the unit disk; `b` becomes the ellipse q + M u(t)
    let m = MappedEllipse::new(a, b);
    if m.center_norm2() <= 1.0 {
        return Some(b.center); // center of b lies in a
    }
    if m.contains_origin() {
        return Some(a.center); // center of a lies in b
    }
    let (t, n2) = m.min_boundary_norm2();
    if n2 <= (1.0 + GEOM_TOL) * (1.0 + GEOM_TOL) {
        Some(m.world_point(a, t))
    } else {
        None
    }
}

/// Image of grain `b` under the affine map sending grain `a` to the unit disk.
struct MappedEllipse {
    q: Point,
    // columns of M: boundary point = q + m1*cos t + m2*sin t
    m1: Point,
    m2: Point,
}

impl MappedEllipse {
    fn new(a: &GrainSpec, b: &GrainSpec) -> Self {
        let (aa, ab) = a.semi_axes();
        let (ba, bb) = b.semi_axes();
        let map = |p: Point| {
            let f = p.rotate(-a.v);
            Point::new(f.x / aa, f.y / ab)
        };
        let q = map(b.center.sub(a.center));
        let axis1 = Point::new(b.v.cos(), b.v.sin()).scale(ba);
        let axis2 = Point::new(-b.v.sin(), b.v.cos()).scale(bb);
        MappedEllipse {
            q,
            m1: map(axis1),
            m2: map(axis2),
        }
    }

    fn center_norm2(&self) -> f64 {
        self.q.norm2()
    }

    fn contains_origin(&self) -> bool {
        // solve M u = -q; |u| <= 1 iff origin inside
        let det = self.m1.x * self.m2.y - self.m1.y * self.m2.x;
        if det.abs() < 1e-300 {
            return false;
        }
        let rx = -self.q.x;
        let ry = -self.q.y;
        let u = (rx * self.m2.y - ry * self.m2.x) / det;
        let v = (self.m1.x * ry - self.m1.y * rx) / det;
        u * u + v * v <= 1.0
    }

    fn point(&self, t: f64) -> Point {
        let (s, c) = t.sin_cos();
        Point::new(
            self.q.x + self.m1.x * c + self.m2.x * s,
            self.q.y + self.m1.y * c + self.m2.y * s,
        )
    }

    /// Global minimum of |x(t)|^2 over the boundary parameter, found by
    /// seeding at equispaced parameters and refining every discrete local
    /// minimum (the squared norm is a degree-2 trigonometric polynomial, so
    /// it has at most two local minima). Returns `(argmin, min)`.
    fn min_boundary_norm2(&self) -> (f64, f64) {
        let f = |t: f64| self.point(t).norm2();
        minimize_periodic_arg(&f, 16)
    }

    /// Map a boundary parameter of the image ellipse back to world
    /// coordinates through the inverse of the `a`-to-unit-disk transform.
    fn world_point(&self, a: &GrainSpec, t: f64) -> Point {
        let p = self.point(t);
        let (aa, ab) = a.semi_axes();
        Point::new(p.x * aa, p.y * ab).rotate(a.v).add(a.center)
    }
}

/// Minimum of a smooth 2pi-periodic function with few critical points:
/// evaluate at `seeds` equispaced points, then golden-section refine around
/// every discrete local minimum.
pub(crate) fn minimize_periodic(f: &dyn Fn(f64) -> f64, seeds: usize) -> f64 {
    minimize_periodic_arg(f, seeds).1
}

pub(crate) fn minimize_periodic_arg(f: &dyn Fn(f64) -> f64, seeds: usize) -> (f64, f64) {
    let step = 2.0 * std::f64::consts::PI / seeds as f64;
    let vals: Vec<f64> = (0..seeds).map(|i| f(i as f64 * step)).collect();
    let mut best = (0.0, f64::INFINITY);
    for i in 0..seeds {
        let prev = vals[(i + seeds - 1) % seeds];
        let next = vals[(i + 1) % seeds];
        if vals[i] <= prev && vals[i] <= next {
            let t = i as f64 * step;
            let (x, v) = golden_min(f, t - step, t + step, 80);
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    best
}

/// Golden-section minimization on [a, b].
pub(crate) fn golden_min(f: &dyn Fn(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a, b);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Outcome of a convex feasibility test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feasibility {
    /// Minimum over the plane of the max membership gap.
    pub min_gap: f64,
}

impl Feasibility {
    /// Marginal results resolve to intersecting.
    pub fn intersects(&self) -> bool {
        self.min_gap <= GEOM_TOL
    }

    pub fn marginal(&self) -> bool {
        self.min_gap.abs() < GEOM_TOL
    }
}

/// Do the three closed convex sets `a`, `b` and the box share a point?
///
/// Decided by minimizing `f(x) = max(gap_a(x), gap_b(x), gap_box(x))`, a
/// convex function whose sign at the minimum settles feasibility. The search
/// runs nested ternary sections over the intersection of the bounding
/// rectangles, which contains every feasible point.
pub fn triple_common_point(a: &GrainSpec, b: &GrainSpec, bx: &BoxSpec) -> bool {
    triple_feasibility(a, b, bx).intersects()
}

pub fn triple_feasibility(a: &GrainSpec, b: &GrainSpec, bx: &BoxSpec) -> Feasibility {
    let rect = bx.rect();
    let f = |p: Point| a.gap(p).max(b.gap(p)).max(rect.gap(p));

    // cheap witnesses: centers, their midpoint, and box-clamped versions
    let mid = a.center.add(b.center).scale(0.5);
    for cand in [
        mid,
        a.center,
        b.center,
        rect.clamp_point(mid),
        rect.clamp_point(a.center),
        rect.clamp_point(b.center),
    ] {
        let v = f(cand);
        if v <= -GEOM_TOL {
            return Feasibility { min_gap: v };
        }
    }

    let search = a.bbox().intersect(&b.bbox()).intersect(&rect);
    if search.is_empty() {
        // disjoint bounding boxes: report the gap at the nearest proxy point
        let p = Point::new(
            0.5 * (search.x0 + search.x1),
            0.5 * (search.y0 + search.y1),
        );
        return Feasibility {
            min_gap: f(rect.clamp_point(p)).max(GEOM_TOL * 2.0),
        };
    }
    let min_gap = minimize_convex_2d(&f, &search);
    Feasibility { min_gap }
}

/// Nested ternary-section minimization of a convex function over a rectangle.
fn minimize_convex_2d(f: &dyn Fn(Point) -> f64, rect: &Rect) -> f64 {
    let inner = |x: f64| -> f64 {
        let g = |y: f64| f(Point::new(x, y));
        ternary_min(&g, rect.y0, rect.y1)
    };
    ternary_min(&inner, rect.x0, rect.x1)
}

fn ternary_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if hi <= lo {
        return f(lo);
    }
    // (2/3)^n shrink; 120 iterations take ~1e6 down to ~1e-15 widths
    for _ in 0..120 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let m = 0.5 * (lo + hi);
    f(m).min(f(lo)).min(f(hi))
}

/// Full width of the grain's projection onto the direction `theta`.
pub fn support_extent(g: &GrainSpec, theta: f64) -> f64 {
    match g.kind {
        GrainKind::Disk => 2.0 * g.r,
        GrainKind::Ellipse => {
            let (s, c) = (theta - g.v).sin_cos();
            2.0 * (g.r * g.r * c * c + s * s).sqrt()
        }
    }
}

/// Area of the set of centers whose grain (with marks `r`, `v`) intersects a
/// `w x h` box: `w h + grain area + w * (vertical extent) + h * (horizontal
/// extent)` (Steiner-Minkowski for convex symmetric grains).
pub fn minkowski_hit_area(w: f64, h: f64, r: f64, v: f64, kind: GrainKind) -> f64 {
    assert!(w > 0.0 && h > 0.0);
    let g = GrainSpec::new(ORIGIN, r, v, kind);
    w * h + g.area() + w * support_extent(&g, std::f64::consts::FRAC_PI_2) + h * support_extent(&g, 0.0)
}

/// Robust distance from a first-quadrant point `(u0, u1)` to the ellipse
/// `x^2/a^2 + y^2/b^2 = 1` with `a >= b > 0` (bisection on the secular
/// equation; valid for interior and exterior points).
pub fn ellipse_boundary_distance(a: f64, b: f64, u0: f64, u1: f64) -> f64 {
    debug_assert!(a >= b && b > 0.0 && u0 >= 0.0 && u1 >= 0.0);
    if u1 > 0.0 {
        if u0 > 0.0 {
            let z0 = u0 / a;
            let z1 = u1 / b;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (a / b) * (a / b);
                let sbar = secular_root(r0, z0, z1, g);
                let x0 = r0 * u0 / (sbar + r0);
                let x1 = u1 / (sbar + 1.0);
                ((x0 - u0) * (x0 - u0) + (x1 - u1) * (x1 - u1)).sqrt()
            } else {
                0.0
            }
        } else {
            (u1 - b).abs()
        }
    } else {
        let numer0 = a * u0;
        let denom0 = a * a - b * b;
        if denom0 > 0.0 && numer0 < denom0 {
            let x = numer0 / denom0;
            let x0 = a * x;
            let x1 = b * (1.0 - x * x).max(0.0).sqrt();
            ((x0 - u0) * (x0 - u0) + x1 * x1).sqrt()
        } else {
            (u0 - a).abs()
        }
    }
}

/// Root of F(s) = (r0 z0/(s+r0))^2 + (z1/(s+1))^2 - 1 on its bracket; F is
/// strictly decreasing there.
fn secular_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 {
        0.0
    } else {
        (n0 * n0 + z1 * z1).sqrt() - 1.0
    };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let r1 = n0 / (s + r0);
        let r2 = z1 / (s + 1.0);
        let f = r1 * r1 + r2 * r2 - 1.0;
        if f > 0.0 {
            s0 = s;
        } else if f < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn ell(cx: f64, cy: f64, r: f64, v: f64) -> GrainSpec {
        GrainSpec::ellipse(Point::new(cx, cy), r, v)
    }

    fn unit_disk(cx: f64, cy: f64) -> GrainSpec {
        GrainSpec::ellipse(Point::new(cx, cy), 1.0, 0.0)
    }

    #[test]
    fn point_membership_examples() {
        assert!(point_in_grain(Point::new(1.5, 0.0), &ell(0.0, 0.0, 2.0, 0.0)));
        assert!(!point_in_grain(Point::new(0.0, 1.5), &ell(0.0, 0.0, 2.0, 0.0)));
        assert!(point_in_grain(Point::new(0.0, 1.5), &ell(0.0, 0.0, 2.0, FRAC_PI_2)));
    }

    #[test]
    fn disk_containment_examples() {
        assert!(disk_in_grain(Point::new(0.0, 0.0), 0.5, &ell(0.0, 0.0, 3.0, 0.0)));
        assert!(!disk_in_grain(Point::new(0.0, 0.9), 0.5, &ell(0.0, 0.0, 3.0, 0.0)));
        // closed-set boundary contact
        assert!(disk_in_grain(Point::new(0.0, 0.0), 1.0, &ell(0.0, 0.0, 1.0, 0.0)));
    }

    #[test]
    fn disk_containment_is_point_membership_at_zero_radius() {
        let g = ell(0.3, -0.4, 5.0, 0.7);
        for p in [
            Point::new(0.0, 0.0),
            Point::new(4.0, 1.0),
            Point::new(-3.0, 0.2),
            Point::new(0.3, 0.6),
        ] {
            assert_eq!(disk_in_grain(p, 0.0, &g), point_in_grain(p, &g));
        }
    }

    #[test]
    fn segment_examples() {
        let d = unit_disk(0.0, 0.0);
        assert!(grain_segment_intersects(
            &d,
            &Segment::new(Point::new(0.5, -2.0), Point::new(0.5, 2.0))
        ));
        assert!(!grain_segment_intersects(
            &d,
            &Segment::new(Point::new(2.0, -1.0), Point::new(2.0, 1.0))
        ));
        assert!(grain_segment_intersects(
            &ell(0.0, 0.0, 5.0, 0.0),
            &Segment::new(Point::new(4.0, -0.5), Point::new(4.0, 0.5))
        ));
    }

    #[test]
    fn box_examples() {
        let b = BoxSpec::new(2.0, 1.0);
        assert!(grain_box_intersects(&unit_disk(0.0, 0.0), &b));
        assert!(!grain_box_intersects(&unit_disk(10.0, 0.0), &b));
        // reaches x = 0.5, touching the box interior at (1, 0)
        assert!(grain_box_intersects(&ell(3.0, 0.0, 2.5, 0.0), &b));
    }

    #[test]
    fn grain_grain_examples() {
        assert!(grain_grain_intersects(&unit_disk(0.0, 0.0), &unit_disk(1.5, 0.0)));
        assert!(!grain_grain_intersects(&unit_disk(0.0, 0.0), &unit_disk(2.5, 0.0)));
        // both contain (0, 1)
        assert!(grain_grain_intersects(
            &ell(0.0, 0.0, 3.0, 0.0),
            &ell(0.0, 2.0, 3.0, FRAC_PI_2)
        ));
    }

    #[test]
    fn grain_grain_symmetry() {
        let cases = [
            (ell(0.0, 0.0, 4.0, 0.3), ell(3.0, 1.0, 2.0, -0.9)),
            (ell(0.0, 0.0, 4.0, 0.3), ell(7.0, 1.0, 2.0, 1.2)),
            (ell(-1.0, 2.0, 10.0, 1.5), ell(3.0, -4.0, 1.5, 0.0)),
        ];
        for (a, b) in cases {
            assert_eq!(grain_grain_intersects(&a, &b), grain_grain_intersects(&b, &a));
        }
    }

    #[test]
    fn tangent_grains_touch() {
        // boundary contact counts: unit disks at distance exactly 2
        assert!(grain_grain_intersects(&unit_disk(0.0, 0.0), &unit_disk(2.0, 0.0)));
        // ellipse tip touching a unit disk: tip at (5, 0), disk center (6, 0)
        assert!(grain_grain_intersects(&ell(0.0, 0.0, 5.0, 0.0), &unit_disk(6.0, 0.0)));
        assert!(!grain_grain_intersects(&ell(0.0, 0.0, 5.0, 0.0), &unit_disk(6.1, 0.0)));
    }

    #[test]
    fn triple_examples() {
        let a = unit_disk(-0.5, 0.0);
        let b = unit_disk(0.5, 0.0);
        assert!(triple_common_point(&a, &b, &BoxSpec::new(4.0, 1.0)));
        assert!(!triple_common_point(
            &a,
            &b,
            &BoxSpec::at(1.0, 1.0, Point::new(10.0, 10.0))
        ));
    }

    #[test]
    fn triple_with_huge_box_is_grain_grain() {
        let big = BoxSpec::new(1e6, 1.0);
        let cases = [
            (ell(0.0, 0.0, 4.0, 0.3), ell(3.0, 1.0, 2.0, -0.9)),
            (ell(0.0, 0.0, 4.0, 0.3), ell(8.0, 1.0, 2.0, 1.2)),
            (ell(-1.0, 2.0, 7.0, 1.5), ell(3.0, -4.0, 1.5, 0.2)),
            (unit_disk(0.0, 0.0), unit_disk(2.5, 0.0)),
        ];
        for (a, b) in cases {
            assert_eq!(
                triple_common_point(&a, &b, &big),
                grain_grain_intersects(&a, &b),
                "{a:?} vs {b:?}"
            );
        }
    }

    #[test]
    fn triple_respects_box_restriction() {
        // grains meet at x ~ 5, box only covers x <= 1
        let a = ell(0.0, 0.0, 6.0, 0.0);
        let b = ell(10.0, 0.0, 6.0, 0.0);
        assert!(grain_grain_intersects(&a, &b));
        let off_box = BoxSpec::at(2.0, 1.0, Point::new(0.0, 0.0));
        assert!(!triple_common_point(&a, &b, &off_box));
        let on_box = BoxSpec::at(2.0, 1.0, Point::new(5.0, 0.0));
        assert!(triple_common_point(&a, &b, &on_box));
    }

    #[test]
    fn support_extent_examples() {
        let g = ell(0.0, 0.0, 2.0, 0.0);
        assert!((support_extent(&g, 0.0) - 4.0).abs() < 1e-12);
        assert!((support_extent(&g, FRAC_PI_2) - 2.0).abs() < 1e-12);
        let d = GrainSpec::disk(ORIGIN, 3.0);
        assert!((support_extent(&d, 1.234) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn hit_area_examples() {
        let v = minkowski_hit_area(1.0, 1.0, 1.0, 0.0, GrainKind::Ellipse);
        assert!((v - (5.0 + PI)).abs() < 1e-12);
        let v = minkowski_hit_area(2.0, 1.0, 2.0, 0.0, GrainKind::Ellipse);
        assert!((v - (10.0 + 2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn hit_area_steiner_for_disks() {
        for (w, h, r) in [(1.0, 1.0, 1.0), (2.0, 3.0, 1.5), (10.0, 4.0, 7.0)] {
            let v = minkowski_hit_area(w, h, r, 0.3, GrainKind::Disk);
            let steiner = w * h + PI * r * r + 2.0 * (w + h) * r;
            assert!((v - steiner).abs() < 1e-9 * steiner);
        }
    }

    #[test]
    fn r_equal_one_ellipse_is_unit_disk() {
        let p = Point::new(0.3, -0.9);
        for v in [0.0, 0.4, -1.2, FRAC_PI_2] {
            let e = ell(0.0, 0.0, 1.0, v);
            let d = unit_disk(0.0, 0.0);
            assert_eq!(point_in_grain(p, &e), point_in_grain(p, &d));
            assert_eq!(
                grain_segment_intersects(&e, &Segment::new(Point::new(0.9, -3.0), Point::new(0.9, 3.0))),
                grain_segment_intersects(&d, &Segment::new(Point::new(0.9, -3.0), Point::new(0.9, 3.0)))
            );
        }
    }

    #[test]
    fn boundary_distance_matches_known_values() {
        let g = ell(0.0, 0.0, 2.0, 0.0);
        assert!((g.boundary_distance(Point::new(0.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((g.boundary_distance(Point::new(3.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((g.boundary_distance(Point::new(0.0, 2.0)) - 1.0).abs() < 1e-12);
        // rotated + translated disk case
        let d = GrainSpec::disk(Point::new(1.0, 1.0), 2.0);
        assert!((d.boundary_distance(Point::new(1.0, 4.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rigid_motion_invariance() {
        use rand::Rng;
        let mut rng = crate::rng::stream(41);
        for _ in 0..200 {
            let a = ell(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(1.0..8.0),
                rng.gen_range(-1.5..1.5),
            );
            let b = ell(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(1.0..8.0),
                rng.gen_range(-1.5..1.5),
            );
            let theta: f64 = rng.gen_range(0.0..PI);
            let t = Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let mv = |g: &GrainSpec| {
                GrainSpec::ellipse(g.center.rotate(theta).add(t), g.r, g.v + theta)
            };
            assert_eq!(
                grain_grain_intersects(&a, &b),
                grain_grain_intersects(&mv(&a), &mv(&b))
            );
            let p = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            assert_eq!(
                point_in_grain(p, &a),
                point_in_grain(p.rotate(theta).add(t), &mv(&a))
            );
        }
    }

    #[test]
    fn conic_route_agrees_with_frame_route() {
        use rand::Rng;
        let mut rng = crate::rng::stream(42);
        for _ in 0..500 {
            let g = ell(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(1.0..50.0),
                rng.gen_range(-1.5..1.5),
            );
            let c = g.conic();
            let p = Point::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
            let d = (g.gap(p) - c.gap(p.x, p.y)).abs();
            assert!(d <= 1e-9 * (1.0 + g.gap(p).abs()), "routes differ by {d}");
        }
    }

    #[test]
    fn direction_normalization() {
        assert!((normalize_direction(PI) - 0.0).abs() < 1e-12);
        assert!((normalize_direction(3.0 * FRAC_PI_4) + FRAC_PI_4).abs() < 1e-12);
        assert_eq!(normalize_direction(FRAC_PI_2), FRAC_PI_2);
        assert!((normalize_direction(-FRAC_PI_2) - FRAC_PI_2).abs() < 1e-12);
    }
}
