//! Random generation: the major-axis law, directions, and exact or truncated
//! sampling of the Poisson process of grains hitting a finite window.
//!
//! The exact hit sampler draws the grain count from `Poisson(u * E[hit
//! area])`, the marks `(R, V)` from the law reweighted by the hit area via a
//! four-component mixture (box area, grain area, two extent terms with
//! per-component rejection), and the center uniformly on the hit region by
//! rejection with the exact hit predicate as acceptance test. The resulting
//! configuration is an exact draw of the hit process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::{
    grain_box_intersects, support_extent, BoxSpec, GrainKind, GrainSpec, Point,
};
use crate::quad;
use crate::rng::Stream;
use crate::Result;

/// Major-axis distribution on `[1, inf)` with survival function `S`,
/// `S(1) = 1`. The canonical Pareto family has `S(r) = r^-alpha` exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisLaw {
    Pareto { alpha: f64 },
    PointMass { r: f64 },
    /// Piecewise power law: on `[start_i, start_{i+1})` the survival decays
    /// with exponent `alpha_i`; the first threshold must be 1.
    Piecewise { pieces: Vec<(f64, f64)> },
}

impl AxisLaw {
    pub fn pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(ModelError::domain(format!("pareto alpha must be > 0, got {alpha}")));
        }
        Ok(AxisLaw::Pareto { alpha })
    }

    pub fn point_mass(r: f64) -> Result<Self> {
        if !(r >= 1.0) || !r.is_finite() {
            return Err(ModelError::domain(format!("point mass must be >= 1, got {r}")));
        }
        Ok(AxisLaw::PointMass { r })
    }

    pub fn piecewise(pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(ModelError::domain("piecewise law needs at least one piece"));
        }
        if pieces[0].0 != 1.0 {
            return Err(ModelError::domain("piecewise law must start at threshold 1"));
        }
        for w in pieces.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(ModelError::domain("piecewise thresholds must increase"));
            }
        }
        if pieces.iter().any(|&(_, a)| !(a > 0.0) || !a.is_finite()) {
            return Err(ModelError::domain("piecewise exponents must be > 0"));
        }
        Ok(AxisLaw::Piecewise { pieces })
    }

    /// Tail exponent governing moments; `inf` for a point mass.
    pub fn tail_alpha(&self) -> f64 {
        match self {
            AxisLaw::Pareto { alpha } => *alpha,
            AxisLaw::PointMass { .. } => f64::INFINITY,
            AxisLaw::Piecewise { pieces } => pieces.last().unwrap().1,
        }
    }

    /// Survival function `S(x) = P[R >= x]`; right-continuous, `S(1) = 1`.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 1.0 {
            return 1.0;
        }
        match self {
            AxisLaw::Pareto { alpha } => x.powf(-alpha),
            AxisLaw::PointMass { r } => {
                if x <= *r {
                    1.0
                } else {
                    0.0
                }
            }
            AxisLaw::Piecewise { pieces } => {
                let mut surv = 1.0;
                for (i, &(start, alpha)) in pieces.iter().enumerate() {
                    let end = pieces.get(i + 1).map(|p| p.0).unwrap_or(f64::INFINITY);
                    if x < end {
                        return surv * (x / start).powf(-alpha);
                    }
                    surv *= (end / start).powf(-alpha);
                }
                unreachable!()
            }
        }
    }

    /// Inverse survival transform; defined for `u` in `(0, 1]`.
    pub fn inverse_survival(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u <= 1.0);
        match self {
            AxisLaw::Pareto { alpha } => u.powf(-1.0 / alpha),
            AxisLaw::PointMass { r } => *r,
            AxisLaw::Piecewise { pieces } => {
                let mut surv = 1.0;
                for (i, &(start, alpha)) in pieces.iter().enumerate() {
                    let end = pieces.get(i + 1).map(|p| p.0).unwrap_or(f64::INFINITY);
                    let surv_end = if end.is_finite() {
                        surv * (end / start).powf(-alpha)
                    } else {
                        0.0
                    };
                    if u > surv_end {
                        return start * (u / surv).powf(-1.0 / alpha);
                    }
                    surv = surv_end;
                }
                unreachable!()
            }
        }
    }

    /// `E[R^p ; R in [lo, hi)]` in closed form for `p in {0, 1, 2}`.
    /// Returns `inf` when the restricted moment diverges.
    pub fn moment_in(&self, p: u32, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(1.0);
        if hi <= lo {
            return 0.0;
        }
        match self {
            AxisLaw::PointMass { r } => {
                if *r >= lo && *r < hi {
                    r.powi(p as i32)
                } else {
                    0.0
                }
            }
            AxisLaw::Pareto { alpha } => power_piece_moment(1.0, 1.0, *alpha, p as f64, lo, hi),
            AxisLaw::Piecewise { pieces } => {
                let mut total = 0.0;
                let mut surv = 1.0;
                for (i, &(start, alpha)) in pieces.iter().enumerate() {
                    let end = pieces.get(i + 1).map(|q| q.0).unwrap_or(f64::INFINITY);
                    let a = lo.max(start);
                    let b = hi.min(end);
                    if b > a {
                        total += power_piece_moment(surv, start, alpha, p as f64, a, b);
                    }
                    if end.is_finite() {
                        surv *= (end / start).powf(-alpha);
                    }
                }
                total
            }
        }
    }

    /// `P[R in [lo, hi)]`.
    pub fn prob_in(&self, lo: f64, hi: f64) -> f64 {
        let s_hi = if hi.is_finite() { self.survival(hi) } else { 0.0 };
        (self.survival(lo.max(1.0)) - s_hi).max(0.0)
    }

    /// Draw `R` conditioned on `R in [lo, hi)`.
    pub fn sample_conditional(&self, rng: &mut Stream, lo: f64, hi: f64) -> f64 {
        let s_lo = self.survival(lo.max(1.0));
        let s_hi = if hi.is_finite() { self.survival(hi) } else { 0.0 };
        debug_assert!(s_lo > s_hi, "conditioning event has zero mass");
        // U in (0,1] so the survival target stays in (s_hi, s_lo]
        let u: f64 = 1.0 - rng.gen::<f64>();
        self.inverse_survival(s_hi + u * (s_lo - s_hi))
    }

    /// Draw `R` with density proportional to `r^p rho(dr)` on `[lo, hi)`.
    pub fn sample_biased(&self, rng: &mut Stream, p: u32, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(1.0);
        match self {
            AxisLaw::PointMass { r } => {
                debug_assert!(*r >= lo && *r < hi);
                *r
            }
            AxisLaw::Pareto { alpha } => sample_power(rng, alpha + 1.0 - p as f64, lo, hi),
            AxisLaw::Piecewise { pieces } => {
                // pick the piece by its r^p mass, then sample the power law
                let mut weights = Vec::with_capacity(pieces.len());
                let mut bounds = Vec::with_capacity(pieces.len());
                let mut surv = 1.0;
                for (i, &(start, alpha)) in pieces.iter().enumerate() {
                    let end = pieces.get(i + 1).map(|q| q.0).unwrap_or(f64::INFINITY);
                    let a = lo.max(start);
                    let b = hi.min(end);
                    let w = if b > a {
                        power_piece_moment(surv, start, alpha, p as f64, a, b)
                    } else {
                        0.0
                    };
                    weights.push(w);
                    bounds.push((a, b, alpha));
                    if end.is_finite() {
                        surv *= (end / start).powf(-alpha);
                    }
                }
                let total: f64 = weights.iter().sum();
                debug_assert!(total > 0.0 && total.is_finite());
                let mut t = rng.gen::<f64>() * total;
                for (i, &w) in weights.iter().enumerate() {
                    if t < w || i + 1 == weights.len() {
                        let (a, b, alpha) = bounds[i];
                        return sample_power(rng, alpha + 1.0 - p as f64, a, b);
                    }
                    t -= w;
                }
                unreachable!()
            }
        }
    }

    /// `E[f(R); R in [lo, hi)]` by quadrature against the density, with the
    /// tail handled through the envelope `|f(r)| <= 2 r` (true for the grain
    /// extents this is used for).
    pub fn expect_in(&self, f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        let lo = lo.max(1.0);
        if hi <= lo {
            return Ok(0.0);
        }
        match self {
            AxisLaw::PointMass { r } => {
                if *r >= lo && *r < hi {
                    Ok(f(*r))
                } else {
                    Ok(0.0)
                }
            }
            _ => {
                let mut total = 0.0;
                let mut segment_lo = lo;
                // integrate piecewise against the density, doubling segment
                // widths; stop when the linear tail bound is negligible
                for _ in 0..4000 {
                    if segment_lo >= hi {
                        return Ok(total);
                    }
                    let segment_hi = (segment_lo * 2.0).min(hi);
                    let part = quad::integrate(
                        |r| f(r) * self.density(r),
                        segment_lo,
                        segment_hi,
                        quad::REL_TOL,
                    )?;
                    total += part;
                    segment_lo = segment_hi;
                    if segment_lo >= hi {
                        return Ok(total);
                    }
                    let tail_bound = 2.0 * self.moment_in(1, segment_lo, hi);
                    if !tail_bound.is_finite() {
                        return Err(ModelError::InfiniteIntensity {
                            reason: format!("E[R] restricted to [{segment_lo}, {hi}) diverges"),
                        });
                    }
                    if tail_bound < 1e-12 * total.abs().max(1e-300) {
                        // remaining mass bounded between 2 P and 2 E[R];
                        // both are below tolerance here
                        return Ok(total);
                    }
                }
                Err(ModelError::QuadratureCap(
                    "law expectation did not converge".into(),
                ))
            }
        }
    }

    /// Lebesgue density (piecewise power; zero for a point mass).
    pub fn density(&self, r: f64) -> f64 {
        if r < 1.0 {
            return 0.0;
        }
        match self {
            AxisLaw::Pareto { alpha } => alpha * r.powf(-alpha - 1.0),
            AxisLaw::PointMass { .. } => 0.0,
            AxisLaw::Piecewise { pieces } => {
                let mut surv = 1.0;
                for (i, &(start, alpha)) in pieces.iter().enumerate() {
                    let end = pieces.get(i + 1).map(|q| q.0).unwrap_or(f64::INFINITY);
                    if r < end {
                        return surv * alpha * start.powf(alpha) * r.powf(-alpha - 1.0);
                    }
                    surv *= (end / start).powf(-alpha);
                }
                unreachable!()
            }
        }
    }
}

/// `E[R^p; piece]` for a survival branch `surv * (r/start)^-alpha` on [a, b).
fn power_piece_moment(surv: f64, start: f64, alpha: f64, p: f64, a: f64, b: f64) -> f64 {
    // density c r^(-alpha-1) with c = surv * alpha * start^alpha
    let c = surv * alpha * start.powf(alpha);
    let expo = p - alpha;
    if b.is_finite() {
        if (expo).abs() < 1e-12 {
            c * (b / a).ln()
        } else {
            c * (b.powf(expo) - a.powf(expo)) / expo
        }
    } else if expo < 0.0 {
        -c * a.powf(expo) / expo
    } else {
        f64::INFINITY
    }
}

/// Sample density proportional to `r^-beta` on `[a, b)`; `b` may be infinite
/// when `beta > 1`.
fn sample_power(rng: &mut Stream, beta: f64, a: f64, b: f64) -> f64 {
    let u: f64 = rng.gen();
    if b.is_finite() {
        if (beta - 1.0).abs() < 1e-12 {
            a * (b / a).powf(u)
        } else {
            let e = 1.0 - beta;
            (a.powf(e) + u * (b.powf(e) - a.powf(e))).powf(1.0 / e)
        }
    } else {
        debug_assert!(beta > 1.0, "unbounded power sample requires beta > 1");
        // guard u = 1 which would map to the lower endpoint exactly; u = 0
        // (infinite draw) cannot occur since gen() < 1
        a * (1.0 - u).powf(-1.0 / (beta - 1.0))
    }
}

/// Inverse-survival draw of the major axis; rejects `u = 0`.
pub fn sample_major_axis(law: &AxisLaw, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(ModelError::domain(format!(
            "major axis variate must be in (0, 1], got {u}"
        )));
    }
    Ok(law.inverse_survival(u))
}

/// Uniform direction on `(-pi/2, pi/2]` from a `[0, 1)` variate.
pub fn sample_direction(u: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&u));
    let v = std::f64::consts::PI * u - std::f64::consts::FRAC_PI_2;
    if v <= -std::f64::consts::FRAC_PI_2 {
        v + std::f64::consts::PI
    } else {
        v
    }
}

fn draw_direction(rng: &mut Stream) -> f64 {
    sample_direction(rng.gen::<f64>())
}

// ---------------------------------------------------------------------------
// Poisson sampling
// ---------------------------------------------------------------------------

/// Exact Poisson sampler: exponential inter-arrivals for small means, the
/// PTRD transformed-rejection method for large ones.
pub fn sample_poisson(rng: &mut Stream, lambda: f64) -> u64 {
    assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda == 0.0 {
        return 0;
    }
    if lambda < 10.0 {
        let mut acc = 0.0;
        let mut k = 0u64;
        loop {
            let u: f64 = 1.0 - rng.gen::<f64>();
            acc -= u.ln();
            if acc > lambda {
                return k;
            }
            k += 1;
        }
    }
    ptrd(rng, lambda)
}

/// Hoermann's PTRD rejection sampler (exact for lambda >= 10).
fn ptrd(rng: &mut Stream, mu: f64) -> u64 {
    let smu = mu.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let mut v: f64 = rng.gen();
        if v <= 0.86 * v_r {
            let u = v / v_r - 0.43;
            let k = ((2.0 * a / (0.5 - u.abs()) + b) * u + mu + 0.445).floor();
            return k as u64;
        }
        let u: f64;
        if v >= v_r {
            u = rng.gen::<f64>() - 0.5;
        } else {
            let uu = v / v_r - 0.93;
            u = 0.5f64.copysign(uu) - uu;
            v = rng.gen::<f64>() * v_r;
        }
        let us = 0.5 - u.abs();
        if us < 0.013 && v > us {
            continue;
        }
        let k = ((2.0 * a / us + b) * u + mu + 0.445).floor();
        if k < 0.0 {
            continue;
        }
        let v_scaled = v * inv_alpha / (a / (us * us) + b);
        if v_scaled.ln() <= k * mu.ln() - mu - ln_gamma(k + 1.0) {
            return k as u64;
        }
    }
}

pub use crate::stats::ln_gamma;

// ---------------------------------------------------------------------------
// hit-process sampling
// ---------------------------------------------------------------------------

const REJECTION_ATTEMPT_CAP: u64 = 1_000_000;

/// Exact sampler of the grains hitting a window, optionally restricted to a
/// major-axis range `[r_lo, r_hi)`.
pub struct HitSampler {
    pub window: BoxSpec,
    pub u: f64,
    pub law: AxisLaw,
    pub kind: GrainKind,
    pub r_lo: f64,
    pub r_hi: f64,
    /// Mixture masses: box term, grain-area term, vertical extent, horizontal
    /// extent (true masses, rejection happens inside the extent components).
    weights: [f64; 4],
    lambda: f64,
}

impl HitSampler {
    pub fn new(window: BoxSpec, u: f64, law: AxisLaw, kind: GrainKind) -> Result<Self> {
        Self::with_range(window, u, law, kind, 1.0, f64::INFINITY)
    }

    pub fn with_range(
        window: BoxSpec,
        u: f64,
        law: AxisLaw,
        kind: GrainKind,
        r_lo: f64,
        r_hi: f64,
    ) -> Result<Self> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(ModelError::domain(format!("intensity must be >= 0, got {u}")));
        }
        let (w, h) = (window.width(), window.height());
        let prob = law.prob_in(r_lo, r_hi);
        let unbounded = !r_hi.is_finite();
        let kind_name = match kind {
            GrainKind::Ellipse => "ellipse",
            GrainKind::Disk => "disk",
        };
        let area_moment = match kind {
            GrainKind::Ellipse => 1,
            GrainKind::Disk => 2,
        };
        if unbounded && law.tail_alpha() <= area_moment as f64 {
            return Err(ModelError::InfiniteIntensity {
                reason: format!(
                    "{kind_name} grains need tail alpha > {area_moment}, got {} \
                     (total covering regime; use the truncated sampler)",
                    law.tail_alpha()
                ),
            });
        }
        let t_area = std::f64::consts::PI * law.moment_in(area_moment, r_lo, r_hi);
        // mean extent over the uniform direction; identical for both axes
        let mean_ext = match kind {
            GrainKind::Disk => 2.0 * law.moment_in(1, r_lo, r_hi),
            GrainKind::Ellipse => law.expect_in(&mean_extent_ellipse, r_lo, r_hi)?,
        };
        let weights = [w * h * prob, t_area, w * mean_ext, h * mean_ext];
        let lambda = u * weights.iter().sum::<f64>();
        if !lambda.is_finite() {
            return Err(ModelError::InfiniteIntensity {
                reason: "hit intensity overflowed".into(),
            });
        }
        Ok(HitSampler {
            window,
            u,
            law,
            kind,
            r_lo,
            r_hi,
            weights,
            lambda,
        })
    }

    /// Expected number of grains hitting the window.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Draw the marks `(R, V)` with density proportional to the grain's hit
    /// area against the law.
    fn sample_marks(&self, rng: &mut Stream) -> Result<(f64, f64)> {
        let total: f64 = self.weights.iter().sum();
        let area_moment = match self.kind {
            GrainKind::Ellipse => 1,
            GrainKind::Disk => 2,
        };
        let mut t = rng.gen::<f64>() * total;
        let mut comp = 3;
        for (i, &w) in self.weights.iter().enumerate() {
            if t < w {
                comp = i;
                break;
            }
            t -= w;
        }
        match comp {
            0 => Ok((
                self.law.sample_conditional(rng, self.r_lo, self.r_hi),
                draw_direction(rng),
            )),
            1 => Ok((
                self.law.sample_biased(rng, area_moment, self.r_lo, self.r_hi),
                draw_direction(rng),
            )),
            dir => {
                // extent component: R size-biased with envelope 2R, accept
                // with ratio extent/(2R)
                let theta = if dir == 2 {
                    std::f64::consts::FRAC_PI_2
                } else {
                    0.0
                };
                for _ in 0..REJECTION_ATTEMPT_CAP {
                    let r = self.law.sample_biased(rng, 1, self.r_lo, self.r_hi);
                    let v = draw_direction(rng);
                    let g = GrainSpec::new(crate::geometry::ORIGIN, r, v, self.kind);
                    let ratio = support_extent(&g, theta) / (2.0 * r);
                    debug_assert!(ratio <= 1.0 + 1e-12);
                    if rng.gen::<f64>() <= ratio {
                        return Ok((r, v));
                    }
                }
                Err(ModelError::RejectionStall {
                    stage: "extent marks",
                    attempts: REJECTION_ATTEMPT_CAP,
                })
            }
        }
    }

    /// Draw the center uniformly on the hit region of a grain with marks
    /// `(r, v)`: rejection from the grain-frame envelope, accepted by the
    /// exact hit predicate (correctness never depends on the envelope).
    fn sample_center(&self, rng: &mut Stream, r: f64, v: f64) -> Result<Point> {
        let (w, h) = (self.window.width(), self.window.height());
        let (s, c) = v.sin_cos();
        let wf = w * c.abs() + h * s.abs();
        let hf = w * s.abs() + h * c.abs();
        let (sa, sb) = match self.kind {
            GrainKind::Ellipse => (r, 1.0),
            GrainKind::Disk => (r, r),
        };
        let half_x = wf / 2.0 + sa;
        let half_y = hf / 2.0 + sb;
        for _ in 0..REJECTION_ATTEMPT_CAP {
            let zx = rng.gen_range(-half_x..half_x);
            let zy = rng.gen_range(-half_y..half_y);
            let z = Point::new(zx, zy).rotate(v).add(self.window.center);
            let grain = GrainSpec::new(z, r, v, self.kind);
            if grain_box_intersects(&grain, &self.window) {
                return Ok(z);
            }
        }
        Err(ModelError::RejectionStall {
            stage: "center placement",
            attempts: REJECTION_ATTEMPT_CAP,
        })
    }

    pub fn sample_grains(&self, rng: &mut Stream) -> Result<Vec<GrainSpec>> {
        let n = sample_poisson(rng, self.lambda);
        let mut grains = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let (r, v) = self.sample_marks(rng)?;
            let z = self.sample_center(rng, r, v)?;
            grains.push(GrainSpec::new(z, r, v, self.kind));
        }
        Ok(grains)
    }
}

/// Expected number of grains hitting the window (`u * E[hit area]`).
///
/// Errors with `InfiniteIntensity` when the moment condition fails: ellipses
/// need `E[R] < inf` (alpha > 1), disks need `E[R^2] < inf` (alpha > 2).
pub fn hitting_intensity(window: &BoxSpec, u: f64, law: &AxisLaw, kind: GrainKind) -> Result<f64> {
    Ok(HitSampler::new(*window, u, law.clone(), kind)?.lambda())
}

/// Mean full extent of an ellipse with semi-major `r` over the uniform
/// direction: `(2/pi) * Int_0^{pi/2} 2 sqrt(r^2 cos^2 v + sin^2 v) dv`.
fn mean_extent_ellipse(r: f64) -> f64 {
    let f = |v: f64| {
        let (s, c) = v.sin_cos();
        (r * r * c * c + s * s).sqrt()
    };
    let integral = quad::integrate(f, 0.0, std::f64::consts::FRAC_PI_2, 1e-10)
        .expect("smooth bounded integrand");
    4.0 / std::f64::consts::PI * integral
}

// ---------------------------------------------------------------------------
// configurations
// ---------------------------------------------------------------------------

/// How the far field was handled when the configuration was sampled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Truncation {
    /// Exact hit process: every grain hitting the window is present.
    Exact,
    /// Centers restricted to a disk of the given radius; the bound is a
    /// rigorous upper estimate of P[some omitted grain meets the window].
    Truncated { radius: f64, error_bound: f64 },
    /// Homogeneous center sampling on a disk (no hit filtering); used by the
    /// covering counts, where the relevant grains need not hit any window.
    Centers { radius: f64 },
}

/// A finite realization of the grain process.
#[derive(Clone, Debug)]
pub struct Configuration {
    pub window: BoxSpec,
    pub u: f64,
    pub law: AxisLaw,
    pub grain_kind: GrainKind,
    pub truncation: Truncation,
    pub seed: u64,
    pub grains: Vec<GrainSpec>,
}

/// Certificate attached to a truncated sample.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TruncationReport {
    pub radius: f64,
    pub error_probability: f64,
    pub method: &'static str,
}

/// Exact draw of the process of grains hitting `window`.
pub fn sample_hitting_process(
    window: &BoxSpec,
    u: f64,
    law: &AxisLaw,
    kind: GrainKind,
    rng: &mut Stream,
    seed: u64,
) -> Result<Configuration> {
    let sampler = HitSampler::new(*window, u, law.clone(), kind)?;
    let grains = sampler.sample_grains(rng)?;
    Ok(Configuration {
        window: *window,
        u,
        law: law.clone(),
        grain_kind: kind,
        truncation: Truncation::Exact,
        seed,
        grains,
    })
}

/// Truncated sampler: homogeneous `Poisson(u)` centers on the disk of radius
/// `trunc_radius` around the window center, independent marks, grains
/// filtered to those hitting the window. Valid for every alpha.
pub fn sample_truncated_process(
    window: &BoxSpec,
    u: f64,
    law: &AxisLaw,
    kind: GrainKind,
    trunc_radius: f64,
    rng: &mut Stream,
    seed: u64,
) -> Result<(Configuration, TruncationReport)> {
    if !(trunc_radius >= window.circumradius() + 1.0) {
        return Err(ModelError::domain(format!(
            "truncation radius {trunc_radius} must be >= window circumradius + 1 = {}",
            window.circumradius() + 1.0
        )));
    }
    let a = window.circumradius();
    let error_bound = if trunc_radius >= (a + 1.0).max(2.0 * a) {
        truncation_error_bound(a, trunc_radius, u, law)?
    } else {
        1.0
    };
    let lambda = u * std::f64::consts::PI * trunc_radius * trunc_radius;
    let n = sample_poisson(rng, lambda);
    let mut grains = Vec::new();
    for _ in 0..n {
        // uniform center in the disk
        let rad = trunc_radius * rng.gen::<f64>().sqrt();
        let ang = rng.gen::<f64>() * std::f64::consts::TAU;
        let z = Point::new(rad * ang.cos(), rad * ang.sin()).add(window.center);
        let r = law.inverse_survival(1.0 - rng.gen::<f64>());
        let v = draw_direction(rng);
        let grain = GrainSpec::new(z, r, v, kind);
        if grain_box_intersects(&grain, window) {
            grains.push(grain);
        }
    }
    let config = Configuration {
        window: *window,
        u,
        law: law.clone(),
        grain_kind: kind,
        truncation: Truncation::Truncated {
            radius: trunc_radius,
            error_bound,
        },
        seed,
        grains,
    };
    let report = TruncationReport {
        radius: trunc_radius,
        error_probability: error_bound,
        method: "quadrature",
    };
    Ok((config, report))
}

/// Homogeneous Poisson centers on the disk `B(center, radius)` with
/// independent marks and no hit filtering.
pub fn sample_centers_in_disk(
    center: Point,
    radius: f64,
    u: f64,
    law: &AxisLaw,
    kind: GrainKind,
    rng: &mut Stream,
    seed: u64,
) -> Configuration {
    let lambda = u * std::f64::consts::PI * radius * radius;
    let n = sample_poisson(rng, lambda);
    let mut grains = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let rad = radius * rng.gen::<f64>().sqrt();
        let ang = rng.gen::<f64>() * std::f64::consts::TAU;
        let z = Point::new(rad * ang.cos(), rad * ang.sin()).add(center);
        let r = law.inverse_survival(1.0 - rng.gen::<f64>());
        let v = draw_direction(rng);
        grains.push(GrainSpec::new(z, r, v, kind));
    }
    Configuration {
        window: BoxSpec::at(2.0 * radius, 1.0, center),
        u,
        law: law.clone(),
        grain_kind: kind,
        truncation: Truncation::Centers { radius },
        seed,
        grains,
    }
}

/// Rigorous upper bound on the probability that some grain centered beyond
/// `trunc_radius` meets the disk `B(a)` enclosing the window:
/// `1 - exp(-u * Int_{|z| > t} S(|z| - a) (2/pi) asin((a+1)/|z|) dz)`,
/// computed with the law's exact survival function by radial quadrature.
pub fn truncation_error_bound(a: f64, trunc_radius: f64, u: f64, law: &AxisLaw) -> Result<f64> {
    if !(a > 0.0) {
        return Err(ModelError::domain("enclosing radius must be positive"));
    }
    if !(trunc_radius >= (a + 1.0).max(2.0 * a)) {
        return Err(ModelError::domain(format!(
            "truncation radius {trunc_radius} must be >= max(a+1, 2a) = {}",
            (a + 1.0).max(2.0 * a)
        )));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    if law.tail_alpha() <= 1.0 {
        // the far-field integral diverges: report the trivial (valid) bound
        return Ok(1.0);
    }
    // integrand in polar coordinates: 2 pi r * S(r - a) * (2/pi) asin((a+1)/r)
    let f = |r: f64| 4.0 * r * law.survival(r - a) * ((a + 1.0) / r).min(1.0).asin();
    let mut total = 0.0;
    let mut lo = trunc_radius;
    for _ in 0..4000 {
        let hi = lo * 2.0;
        total += quad::integrate(f, lo, hi, quad::REL_TOL)?;
        lo = hi;
        // tail: asin(x) <= (pi/2) x and survival is non-increasing, so
        // tail <= 2 pi (a+1) * Int_lo S(r-a) dr = 2 pi (a+1) E-free bound
        let tail = 2.0 * std::f64::consts::PI * (a + 1.0) * survival_integral_tail(law, lo - a);
        if !tail.is_finite() {
            return Ok(1.0);
        }
        if tail < 1e-12 * total.max(1e-300) {
            return Ok(1.0 - (-u * total).exp());
        }
    }
    Err(ModelError::QuadratureCap(
        "truncation bound tail did not converge".into(),
    ))
}

/// `Int_T^inf S(r) dr` in closed form (piecewise power laws).
fn survival_integral_tail(law: &AxisLaw, t: f64) -> f64 {
    // Int_T^inf S(r) dr = E[(R - T)^+] = E[R; R >= T] - T P[R >= T]
    let m1 = law.moment_in(1, t, f64::INFINITY);
    if !m1.is_finite() {
        return f64::INFINITY;
    }
    m1 - t.max(1.0) * law.prob_in(t, f64::INFINITY)
        + if t < 1.0 { 1.0 - t } else { 0.0 }
}

/// Independent thinning: keep each point with probability `g(point)`.
pub fn thin_points(points: &[Point], g: impl Fn(Point) -> f64, rng: &mut Stream) -> Vec<Point> {
    points
        .iter()
        .copied()
        .filter(|&p| {
            let keep = g(p);
            debug_assert!((0.0..=1.0).contains(&keep));
            rng.gen::<f64>() < keep
        })
        .collect()
}

// ---------------------------------------------------------------------------
// serialization (exact JSON schema; doubles round-trip exactly)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WindowJson {
    l: f64,
    k: f64,
    cx: f64,
    cy: f64,
}

#[derive(Serialize, Deserialize)]
struct LawJson {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pieces: Option<Vec<(f64, f64)>>,
}

#[derive(Serialize, Deserialize)]
struct TruncationJson {
    mode: String,
    radius: f64,
    error_bound: f64,
}

#[derive(Serialize, Deserialize)]
struct GrainJson {
    x: f64,
    y: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "V")]
    v: f64,
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    window: WindowJson,
    u: f64,
    law: LawJson,
    grain_kind: GrainKind,
    truncation: TruncationJson,
    seed: u64,
    grains: Vec<GrainJson>,
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let law = match &self.law {
            AxisLaw::Pareto { alpha } => LawJson {
                kind: "pareto".into(),
                alpha: Some(*alpha),
                r: None,
                pieces: None,
            },
            AxisLaw::PointMass { r } => LawJson {
                kind: "point_mass".into(),
                alpha: None,
                r: Some(*r),
                pieces: None,
            },
            AxisLaw::Piecewise { pieces } => LawJson {
                kind: "piecewise".into(),
                alpha: None,
                r: None,
                pieces: Some(pieces.clone()),
            },
        };
        let truncation = match self.truncation {
            Truncation::Exact => TruncationJson {
                mode: "exact".into(),
                radius: 0.0,
                error_bound: 0.0,
            },
            Truncation::Truncated {
                radius,
                error_bound,
            } => TruncationJson {
                mode: "truncated".into(),
                radius,
                error_bound,
            },
            Truncation::Centers { radius } => TruncationJson {
                mode: "centers".into(),
                radius,
                error_bound: 0.0,
            },
        };
        ConfigJson {
            window: WindowJson {
                l: self.window.l,
                k: self.window.k,
                cx: self.window.center.x,
                cy: self.window.center.y,
            },
            u: self.u,
            law,
            grain_kind: self.grain_kind,
            truncation,
            seed: self.seed,
            grains: self
                .grains
                .iter()
                .map(|g| GrainJson {
                    x: g.center.x,
                    y: g.center.y,
                    r: g.r,
                    v: g.v,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let j = ConfigJson::deserialize(d)?;
        let law = match j.law.kind.as_str() {
            "pareto" => AxisLaw::pareto(
                j.law
                    .alpha
                    .ok_or_else(|| D::Error::custom("pareto law requires alpha"))?,
            ),
            "point_mass" => AxisLaw::point_mass(
                j.law
                    .r
                    .ok_or_else(|| D::Error::custom("point_mass law requires r"))?,
            ),
            "piecewise" => AxisLaw::piecewise(
                j.law
                    .pieces
                    .ok_or_else(|| D::Error::custom("piecewise law requires pieces"))?,
            ),
            other => return Err(D::Error::custom(format!("unknown law kind {other}"))),
        }
        .map_err(|e| D::Error::custom(e.to_string()))?;
        let truncation = match j.truncation.mode.as_str() {
            "exact" => Truncation::Exact,
            "truncated" => Truncation::Truncated {
                radius: j.truncation.radius,
                error_bound: j.truncation.error_bound,
            },
            "centers" => Truncation::Centers {
                radius: j.truncation.radius,
            },
            other => return Err(D::Error::custom(format!("unknown truncation mode {other}"))),
        };
        let window = BoxSpec::at(j.window.l, j.window.k, Point::new(j.window.cx, j.window.cy));
        let grains = j
            .grains
            .iter()
            .map(|g| GrainSpec::new(Point::new(g.x, g.y), g.r, g.v, j.grain_kind))
            .collect();
        Ok(Configuration {
            window,
            u: j.u,
            law,
            grain_kind: j.grain_kind,
            truncation,
            seed: j.seed,
            grains,
        })
    }
}
