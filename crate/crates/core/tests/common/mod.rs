//! Shared oracle machinery for the integration suites.
//!
//! The predicates under test decide convex feasibility through continuous
//! minimization and affine reductions. The oracle here takes the other
//! route: membership gaps are evaluated through the expanded world-frame
//! conics on adaptive raster grids, zooming into the candidate basin until
//! the sign of the minimum gap is certified or the instance is marginal.
//! Zoom levels multiply the effective resolution well past 2048 cells per
//! instance side.

use ellipseperc::geometry::{Conic, GrainSpec, Point, Rect, Segment};
use ellipseperc::rng::Stream;
use rand::Rng;

pub enum GapSet {
    Grain(Conic),
    Box(Rect),
}

impl GapSet {
    pub fn grain(g: &GrainSpec) -> Self {
        GapSet::Grain(g.conic())
    }

    #[inline]
    pub fn gap(&self, x: f64, y: f64) -> f64 {
        match self {
            GapSet::Grain(c) => c.gap(x, y),
            GapSet::Box(r) => r.gap(Point::new(x, y)),
        }
    }

    /// Bound on the gap's gradient norm over a region.
    fn lipschitz(&self, region: &Rect) -> f64 {
        match self {
            GapSet::Box(_) => 1.0,
            GapSet::Grain(c) => {
                let lam = c.qxx.abs().max(c.qyy.abs()) + c.qxy.abs();
                let dx = (region.x0 - c.cx).abs().max((region.x1 - c.cx).abs());
                let dy = (region.y0 - c.cy).abs().max((region.y1 - c.cy).abs());
                2.0 * lam * (dx * dx + dy * dy).sqrt()
            }
        }
    }
}

/// Minimum over the plane of `max_i gap_i`, certified by adaptive grid
/// refinement; the returned value has the correct sign unless it lies within
/// the refinement floor (|min| of order 1e-9), which callers exempt.
pub fn oracle_min_gap(sets: &[GapSet], region: Rect) -> f64 {
    const N: usize = 128;
    let mut region = region;
    if region.is_empty() {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for _level in 0..9 {
        let hx = region.width() / N as f64;
        let hy = region.height() / N as f64;
        let mut vals = vec![0.0f64; N * N];
        let mut min_val = f64::INFINITY;
        for iy in 0..N {
            let y = region.y0 + (iy as f64 + 0.5) * hy;
            for ix in 0..N {
                let x = region.x0 + (ix as f64 + 0.5) * hx;
                let mut v = f64::NEG_INFINITY;
                for s in sets {
                    v = v.max(s.gap(x, y));
                }
                vals[iy * N + ix] = v;
                min_val = min_val.min(v);
            }
        }
        best = best.min(min_val);
        if best <= 0.0 {
            return best; // a grid point is a certified common point
        }
        let lip = sets.iter().map(|s| s.lipschitz(&region)).fold(0.0, f64::max);
        let reach = lip * (hx * hx + hy * hy).sqrt();
        if min_val > reach {
            return best; // certified positive: the true minimum is > 0
        }
        // the convex minimizer lies in a cell whose sampled value is within
        // one gradient step of the grid minimum; zoom to those cells
        let keep = min_val + 2.0 * reach;
        let (mut x0, mut x1, mut y0, mut y1) = (usize::MAX, 0usize, usize::MAX, 0usize);
        for iy in 0..N {
            for ix in 0..N {
                if vals[iy * N + ix] <= keep {
                    x0 = x0.min(ix);
                    x1 = x1.max(ix);
                    y0 = y0.min(iy);
                    y1 = y1.max(iy);
                }
            }
        }
        let pad = 1;
        let nx0 = x0.saturating_sub(pad);
        let ny0 = y0.saturating_sub(pad);
        let nx1 = (x1 + pad).min(N - 1);
        let ny1 = (y1 + pad).min(N - 1);
        region = Rect {
            x0: region.x0 + nx0 as f64 * hx,
            x1: region.x0 + (nx1 + 1) as f64 * hx,
            y0: region.y0 + ny0 as f64 * hy,
            y1: region.y0 + (ny1 + 1) as f64 * hy,
        };
    }
    best
}

/// Minimum of the conic gap along a segment (adaptive 1-D refinement).
pub fn oracle_min_gap_on_segment(c: &Conic, seg: &Segment) -> f64 {
    let f = |t: f64| {
        let x = seg.a.x + t * (seg.b.x - seg.a.x);
        let y = seg.a.y + t * (seg.b.y - seg.a.y);
        c.gap(x, y)
    };
    refine_1d(&f, 0.0, 1.0, false)
}

/// Maximum of the conic gap over the circle of radius `eps` around `w`.
pub fn oracle_max_gap_on_circle(c: &Conic, w: Point, eps: f64) -> f64 {
    let f = |t: f64| {
        let x = w.x + eps * t.cos();
        let y = w.y + eps * t.sin();
        c.gap(x, y)
    };
    -refine_1d(&|t| -f(t), 0.0, std::f64::consts::TAU, true)
}

fn refine_1d(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, periodic: bool) -> f64 {
    const N: usize = 2048;
    let (mut lo, mut hi) = (lo, hi);
    let mut best = f64::INFINITY;
    for level in 0..5 {
        let h = (hi - lo) / N as f64;
        let mut min_val = f64::INFINITY;
        let mut argmin = lo;
        for i in 0..N {
            let t = lo + (i as f64 + 0.5) * h;
            let v = f(t);
            if v < min_val {
                min_val = v;
                argmin = t;
            }
        }
        best = best.min(min_val);
        if level == 0 && periodic {
            // fall through: refine around the best sample
        }
        lo = argmin - 2.0 * h;
        hi = argmin + 2.0 * h;
    }
    best
}

// ---------------------------------------------------------------------------
// sandwich raster: certified path decisions
// ---------------------------------------------------------------------------

/// Boolean grid with the two complementary path searches used by the duality
/// checks.
pub struct BoolGrid {
    pub nx: usize,
    pub ny: usize,
    pub bits: Vec<bool>,
}

impl BoolGrid {
    fn at(&self, ix: usize, iy: usize) -> bool {
        self.bits[iy * self.nx + ix]
    }

    /// 4-connected left-right path of cells in state `covered`.
    pub fn path4_lr(&self, covered: bool) -> bool {
        let mut seen = vec![false; self.nx * self.ny];
        let mut queue = Vec::new();
        for iy in 0..self.ny {
            if self.at(0, iy) == covered {
                seen[iy * self.nx] = true;
                queue.push(iy * self.nx);
            }
        }
        while let Some(i) = queue.pop() {
            let (ix, iy) = (i % self.nx, i / self.nx);
            if ix + 1 == self.nx {
                return true;
            }
            for (jx, jy) in [
                (ix.wrapping_sub(1), iy),
                (ix + 1, iy),
                (ix, iy.wrapping_sub(1)),
                (ix, iy + 1),
            ] {
                if jx < self.nx && jy < self.ny {
                    let j = jy * self.nx + jx;
                    if !seen[j] && self.at(jx, jy) == covered {
                        seen[j] = true;
                        queue.push(j);
                    }
                }
            }
        }
        false
    }

    /// 8-connected top-bottom path of cells in state `covered`.
    pub fn path8_tb(&self, covered: bool) -> bool {
        let mut seen = vec![false; self.nx * self.ny];
        let mut queue = Vec::new();
        for ix in 0..self.nx {
            if self.at(ix, 0) == covered {
                seen[ix] = true;
                queue.push(ix);
            }
        }
        while let Some(i) = queue.pop() {
            let (ix, iy) = (i % self.nx, i / self.nx);
            if iy + 1 == self.ny {
                return true;
            }
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let jx = ix as i64 + dx;
                    let jy = iy as i64 + dy;
                    if jx < 0 || jy < 0 || jx as usize >= self.nx || jy as usize >= self.ny {
                        continue;
                    }
                    let j = jy as usize * self.nx + jx as usize;
                    if !seen[j] && self.at(jx as usize, jy as usize) == covered {
                        seen[j] = true;
                        queue.push(j);
                    }
                }
            }
        }
        false
    }
}

/// Certified vacancy-crossing oracle. Rasterizes the grains once inflated
/// and once deflated by half the pixel diagonal:
/// - a 4-connected vacant left-right path through the inflated raster walks
///   through fully vacant pixels, so the continuum vacant crossing exists;
/// - an 8-connected covered top-bottom path through the deflated raster
///   chains fully covered pixels (corner contact included), so the continuum
///   covered crossing exists and blocks the vacant one.
/// When neither certificate fires the instance is resolution-marginal.
pub enum PathCertificate {
    VacantCrossing,
    CoveredBlocks,
    Marginal,
}

pub fn certified_vacant_lr(grains: &[GrainSpec], rect: Rect, resolution: usize) -> PathCertificate {
    let pixel = rect.width().max(rect.height()) / resolution as f64;
    let nx = (rect.width() / pixel).ceil() as usize;
    let ny = (rect.height() / pixel).ceil() as usize;
    let delta = pixel * std::f64::consts::SQRT_2 / 2.0;
    let mut inflated = BoolGrid {
        nx,
        ny,
        bits: vec![false; nx * ny],
    };
    let mut deflated = BoolGrid {
        nx,
        ny,
        bits: vec![false; nx * ny],
    };
    for g in grains {
        let conic = g.conic();
        let gb = g.bbox();
        let pad = 2.0 * delta;
        let ix0 = (((gb.x0 - pad - rect.x0) / pixel).floor().max(0.0)) as usize;
        let iy0 = (((gb.y0 - pad - rect.y0) / pixel).floor().max(0.0)) as usize;
        let ix1 = ((((gb.x1 + pad - rect.x0) / pixel).ceil()).max(0.0) as usize).min(nx);
        let iy1 = ((((gb.y1 + pad - rect.y0) / pixel).ceil()).max(0.0) as usize).min(ny);
        // gradient bound of the conic gap over the padded bbox turns gap
        // values into certified metric distances away from the band
        let lam = conic.qxx.abs().max(conic.qyy.abs()) + conic.qxy.abs();
        let dx = (gb.x0 - pad - g.center.x).abs().max((gb.x1 + pad - g.center.x).abs());
        let dy = (gb.y0 - pad - g.center.y).abs().max((gb.y1 + pad - g.center.y).abs());
        let lip = 2.0 * lam * (dx * dx + dy * dy).sqrt();
        for iy in iy0..iy1 {
            let y = rect.y0 + (iy as f64 + 0.5) * pixel;
            for ix in ix0..ix1 {
                let x = rect.x0 + (ix as f64 + 0.5) * pixel;
                let gap = conic.gap(x, y);
                let i = iy * nx + ix;
                if gap <= 0.0 {
                    inflated.bits[i] = true;
                    if gap <= -lip * delta {
                        deflated.bits[i] = true; // certified interior
                    } else if !deflated.bits[i] {
                        let p = Point::new(x, y);
                        if g.boundary_distance(p) >= delta {
                            deflated.bits[i] = true;
                        }
                    }
                } else if gap <= lip * delta && !inflated.bits[i] {
                    let p = Point::new(x, y);
                    if g.boundary_distance(p) <= delta {
                        inflated.bits[i] = true;
                    }
                }
            }
        }
    }
    if deflated.path8_tb(true) {
        PathCertificate::CoveredBlocks
    } else if inflated.path4_lr(false) {
        PathCertificate::VacantCrossing
    } else {
        PathCertificate::Marginal
    }
}

// ---------------------------------------------------------------------------
// random instances
// ---------------------------------------------------------------------------

pub fn random_grain(rng: &mut Stream, max_r: f64) -> GrainSpec {
    // heavy-tailed axis truncated to keep raster regions sane
    let u: f64 = 1.0 - rng.gen::<f64>();
    let r = u.powf(-1.0 / 1.5).min(max_r);
    let center = Point::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
    if rng.gen::<f64>() < 0.2 {
        GrainSpec::disk(center, 1.0 + (r - 1.0) * 0.5)
    } else {
        GrainSpec::ellipse(center, r, rng.gen_range(-1.6..1.6))
    }
}

pub fn random_point(rng: &mut Stream, half: f64) -> Point {
    Point::new(rng.gen_range(-half..half), rng.gen_range(-half..half))
}

pub fn random_box(rng: &mut Stream) -> ellipseperc::geometry::BoxSpec {
    ellipseperc::geometry::BoxSpec::at(
        rng.gen_range(0.5..8.0),
        rng.gen_range(0.25..4.0),
        random_point(rng, 4.0),
    )
}
