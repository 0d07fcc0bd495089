//! Multiscale machinery: the annulus-connection recursion with its
//! constructive `(k0, u0)`, the level-by-level removal process on dyadic
//! axis ranges, and plain fractal percolation for comparison.

use rand::Rng;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::{grain_box_intersects, BoxSpec, GrainKind, Point};
use crate::rng::Stream;
use crate::sampling::{AxisLaw, HitSampler};

use crate::Result;

// ---------------------------------------------------------------------------
// the q_k recursion
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct RecursionParams {
    pub c7: f64,
    pub alpha: f64,
    pub u: f64,
    pub q0: f64,
}

impl RecursionParams {
    pub fn new(c7: f64, alpha: f64, u: f64, q0: f64) -> Result<Self> {
        if !(c7 > 0.0 && c7.is_finite()) {
            return Err(ModelError::domain("recursion constant must be positive"));
        }
        if !(u >= 0.0 && u.is_finite()) {
            return Err(ModelError::domain("intensity must be >= 0"));
        }
        if !(0.0..=1.0).contains(&q0) {
            return Err(ModelError::domain("q0 must lie in [0, 1]"));
        }
        if !alpha.is_finite() {
            return Err(ModelError::domain("alpha must be finite"));
        }
        Ok(RecursionParams { c7, alpha, u, q0 })
    }
}

/// Iterate `q_{k+1} = min(1, C7 q_k^2 + u C7 10^{(2-alpha) k})` from `q_0`,
/// returning `q_0 ..= q_kmax`. The inequality is iterated as equality, the
/// worst case, so a passing envelope certifies the true sequence.
pub fn iterate_qk(params: &RecursionParams, k_max: usize) -> Vec<f64> {
    let mut qs = Vec::with_capacity(k_max + 1);
    let mut q = params.q0;
    qs.push(q);
    for k in 0..k_max {
        let additive = params.u * params.c7 * 10f64.powf((2.0 - params.alpha) * k as f64);
        q = (params.c7 * q * q + additive).min(1.0);
        qs.push(q);
    }
    qs
}

/// Constructive scale and intensity for the decay envelope:
/// `epsilon = 2 (alpha - 2)`, the smallest `k0` satisfying both smallness
/// conditions, and the intensity `u0` the crude bound certifies at `k0`.
pub fn compute_k0_u0(c7: f64, alpha: f64) -> Result<(f64, u64, f64)> {
    if !(alpha > 2.0) {
        return Err(ModelError::domain(format!(
            "the recursion envelope needs alpha > 2, got {alpha}"
        )));
    }
    if !(c7 > 0.0 && c7.is_finite()) {
        return Err(ModelError::domain("recursion constant must be positive"));
    }
    let eps = 2.0 * (alpha - 2.0);
    let ln10 = std::f64::consts::LN_10;
    let cond = |k: f64| -> bool {
        c7 * (eps - eps * k).exp() < 0.5 && c7 * ((eps - ln10 * (alpha - 2.0)) * k + eps).exp() < 0.5
    };
    let mut k0 = 1u64;
    while !cond(k0 as f64) {
        k0 += 1;
        if k0 > 1_000_000 {
            return Err(ModelError::domain(
                "no feasible k0 below 1e6; alpha is too close to 2",
            ));
        }
    }
    let u0 = (ln_u0(c7, alpha, eps, k0)).exp().min(1.0);
    Ok((eps, k0, u0))
}

/// `ln[ e^{-eps k0} / (C7 (100^{k0} + 10^{(2-alpha) k0})) ]`, evaluated in
/// log space so large `k0` cannot overflow.
fn ln_u0(c7: f64, alpha: f64, eps: f64, k0: u64) -> f64 {
    -eps * k0 as f64 - c7.ln() - ln_crude_sum(alpha, k0)
}

/// `ln(100^{k0} + 10^{(2-alpha) k0})` via log-sum-exp.
fn ln_crude_sum(alpha: f64, k0: u64) -> f64 {
    let ln10 = std::f64::consts::LN_10;
    let a = 2.0 * ln10 * k0 as f64;
    let b = (2.0 - alpha) * ln10 * k0 as f64;
    let hi = a.max(b);
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// Check the decay envelope `q_k <= exp(-epsilon k)` for `k0 <= k <= k_max`.
///
/// The sequence is seeded at `k0` by the crude bound
/// `q_{k0} <= min(1, u C7 (100^{k0} + 10^{(2-alpha) k0}))` — which equals the
/// envelope value exactly at the certified `u0` — and then iterated as
/// equality. Comparisons allow a relative 1e-9 slack for the seed-level
/// float rounding.
pub fn verify_qk_bound(
    c7: f64,
    alpha: f64,
    u: f64,
    epsilon: f64,
    k0: u64,
    k_max: u64,
) -> Result<bool> {
    if !(alpha > 2.0) {
        return Err(ModelError::domain("envelope verification needs alpha > 2"));
    }
    if k_max < k0 {
        return Err(ModelError::domain("k_max must be >= k0"));
    }
    let seed = if u == 0.0 {
        0.0
    } else {
        (u.ln() + c7.ln() + ln_crude_sum(alpha, k0)).exp().min(1.0)
    };
    let mut q = seed;
    for k in k0..=k_max {
        let envelope = (-epsilon * k as f64).exp();
        if q > envelope * (1.0 + 1e-9) {
            return Ok(false);
        }
        let additive = u * c7 * 10f64.powf((2.0 - alpha) * k as f64);
        q = (c7 * q * q + additive).min(1.0);
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// removal process
// ---------------------------------------------------------------------------

/// One level of the removal process: the axis interval `I_n` and the grid of
/// box-survival indicators over `B_inf(l; 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelField {
    pub n: u32,
    /// Half-open interval `[lo, hi)` of semi-major axes this level removes.
    pub interval: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// `true` = survived (no grain with `R` in the interval meets the box).
    pub bits: Vec<bool>,
    /// Largest Chebyshev index span of the boxes met by a single grain;
    /// at most 2 when the interval discipline holds.
    pub max_box_span: usize,
}

impl LevelField {
    #[inline]
    pub fn bit(&self, ix: usize, iy: usize) -> bool {
        self.bits[iy * self.nx + ix]
    }
}

#[derive(Clone, Debug)]
pub struct RemovalOutcome {
    pub l: f64,
    pub u: f64,
    pub levels: Vec<LevelField>,
    /// Survival bits of the finest grid after intersecting all levels.
    pub surviving: Vec<bool>,
    pub crossing: bool,
}

/// Number of levels: the unique integer with `l/2^(n0+1) <= 1 < l/2^(n0)`.
pub fn removal_depth(l: f64) -> u32 {
    ((l.log2().ceil() as i64) - 1).max(1) as u32
}

/// Axis intervals `I_1 .. I_n0` partitioning `[1, l/2)`.
pub fn removal_intervals(l: f64) -> Vec<(f64, f64)> {
    let n0 = removal_depth(l);
    (1..=n0)
        .map(|n| {
            let hi = l / 2f64.powi(n as i32);
            let lo = if n == n0 { 1.0 } else { l / 2f64.powi(n as i32 + 1) };
            (lo, hi)
        })
        .collect()
}

/// Run the removal process on `B_inf(l; 2)`: per level `n`, sample the hit
/// process restricted to `R` in `I_n`, mark the boxes it meets, intersect
/// levels, and look for a left-right crossing through edge-adjacent
/// surviving boxes of the finest grid.
pub fn removal_process(
    l: f64,
    u: f64,
    law: &AxisLaw,
    kind: GrainKind,
    rng: &mut Stream,
) -> Result<RemovalOutcome> {
    if !(l > 2.0) {
        return Err(ModelError::domain("removal process needs l > 2"));
    }
    let window = BoxSpec::new(l, 2.0);
    let rect = window.rect();
    let n0 = removal_depth(l);
    let intervals = removal_intervals(l);
    let mut levels = Vec::with_capacity(n0 as usize);
    for (idx, &(lo, hi)) in intervals.iter().enumerate() {
        let n = idx as u32 + 1;
        let side = l / 2f64.powi(n as i32);
        let nx = 2usize.pow(n + 1);
        let ny = 2usize.pow(n);
        let sampler = HitSampler::with_range(window, u, law.clone(), kind, lo, hi)?;
        let grains = sampler.sample_grains(rng)?;
        let mut bits = vec![true; nx * ny];
        let mut max_span = 0usize;
        for g in &grains {
            let gb = g.bbox();
            let clamp = |v: f64, n: usize| -> usize { (v.floor().max(0.0) as usize).min(n - 1) };
            let ix0 = clamp((gb.x0 - rect.x0) / side, nx);
            let ix1 = clamp((gb.x1 - rect.x0) / side, nx);
            let iy0 = clamp((gb.y0 - rect.y0) / side, ny);
            let iy1 = clamp((gb.y1 - rect.y0) / side, ny);
            let mut hit_span_x = (usize::MAX, 0usize);
            let mut hit_span_y = (usize::MAX, 0usize);
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    let cell = BoxSpec::at(
                        side,
                        1.0,
                        Point::new(
                            rect.x0 + (ix as f64 + 0.5) * side,
                            rect.y0 + (iy as f64 + 0.5) * side,
                        ),
                    );
                    if grain_box_intersects(g, &cell) {
                        bits[iy * nx + ix] = false;
                        hit_span_x = (hit_span_x.0.min(ix), hit_span_x.1.max(ix));
                        hit_span_y = (hit_span_y.0.min(iy), hit_span_y.1.max(iy));
                    }
                }
            }
            if hit_span_x.0 != usize::MAX {
                let span = (hit_span_x.1 - hit_span_x.0).max(hit_span_y.1 - hit_span_y.0);
                max_span = max_span.max(span);
            }
        }
        levels.push(LevelField {
            n,
            interval: (lo, hi),
            nx,
            ny,
            bits,
            max_box_span: max_span,
        });
    }
    // intersect all levels on the finest grid
    let fnx = 2usize.pow(n0 + 1);
    let fny = 2usize.pow(n0);
    let mut surviving = vec![true; fnx * fny];
    for level in &levels {
        let shift = n0 - level.n;
        for iy in 0..fny {
            for ix in 0..fnx {
                if !level.bit(ix >> shift, iy >> shift) {
                    surviving[iy * fnx + ix] = false;
                }
            }
        }
    }
    let crossing = grid_crossing(&surviving, fnx, fny);
    Ok(RemovalOutcome {
        l,
        u,
        levels,
        surviving,
        crossing,
    })
}

/// Left-right crossing through edge-adjacent `true` cells.
pub fn grid_crossing(bits: &[bool], nx: usize, ny: usize) -> bool {
    let mut seen = vec![false; nx * ny];
    let mut queue = Vec::new();
    for iy in 0..ny {
        if bits[iy * nx] {
            seen[iy * nx] = true;
            queue.push(iy * nx);
        }
    }
    while let Some(i) = queue.pop() {
        let (ix, iy) = (i % nx, i / nx);
        if ix + 1 == nx {
            return true;
        }
        let push = |j: usize, seen: &mut Vec<bool>, queue: &mut Vec<usize>| {
            if bits[j] && !seen[j] {
                seen[j] = true;
                queue.push(j);
            }
        };
        if ix > 0 {
            push(i - 1, &mut seen, &mut queue);
        }
        if ix + 1 < nx {
            push(i + 1, &mut seen, &mut queue);
        }
        if iy > 0 {
            push(i - nx, &mut seen, &mut queue);
        }
        if iy + 1 < ny {
            push(i + nx, &mut seen, &mut queue);
        }
    }
    false
}

// ---------------------------------------------------------------------------
// fractal percolation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FractalOutcome {
    pub size: usize,
    pub surviving: Vec<bool>,
    pub crossing: bool,
}

/// Mandelbrot fractal percolation on the unit square: at each of `depth`
/// levels every surviving box splits into `n_div^2` children retained
/// independently with probability `p`. Returns the final grid and whether it
/// carries a left-right crossing through edge-adjacent boxes.
pub fn fractal_percolation(p: f64, n_div: usize, depth: u32, rng: &mut Stream) -> Result<FractalOutcome> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ModelError::domain("retention probability must be in [0, 1]"));
    }
    if n_div < 2 {
        return Err(ModelError::domain("subdivision factor must be >= 2"));
    }
    if depth < 1 {
        return Err(ModelError::domain("depth must be >= 1"));
    }
    let final_size = n_div.checked_pow(depth).ok_or_else(|| {
        ModelError::ResourceLimit("fractal grid size overflows".into())
    })?;
    if final_size * final_size > (1 << 28) {
        return Err(ModelError::ResourceLimit(format!(
            "fractal grid {final_size}^2 exceeds the cell budget"
        )));
    }
    let mut size = 1usize;
    let mut bits = vec![true];
    for _ in 0..depth {
        let nsize = size * n_div;
        let mut next = vec![false; nsize * nsize];
        for iy in 0..nsize {
            for ix in 0..nsize {
                if bits[(iy / n_div) * size + ix / n_div] {
                    next[iy * nsize + ix] = rng.gen::<f64>() < p;
                }
            }
        }
        size = nsize;
        bits = next;
    }
    let crossing = grid_crossing(&bits, size, size);
    Ok(FractalOutcome {
        size,
        surviving: bits,
        crossing,
    })
}

// ---------------------------------------------------------------------------
// empirical 2-dependence
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TwoDependenceReport {
    /// Site pairs at Chebyshev distance >= 3 that had non-degenerate bits.
    pub pairs_tested: usize,
    /// Pairs skipped because a site was constant across realizations.
    pub pairs_degenerate: usize,
    pub max_abs_correlation: f64,
    /// Smallest Fisher-exact p-value over the tested pairs.
    pub min_p_value: f64,
    /// No pair rejects independence at the Bonferroni-adjusted family level
    /// (0.05 split across the pairs). Fisher's exact test keeps the
    /// calibration honest even when the survival bits are rare.
    pub all_pairs_uncorrelated: bool,
    /// Largest per-grain box span observed; the exact structural check
    /// passes iff this is <= 2.
    pub max_box_span: usize,
    pub structural_ok: bool,
}

/// Empirical check that same-level survival bits at box-distance >= 3 are
/// uncorrelated, plus the exact structural span assertion. `family_alpha`
/// is the total false-alarm budget for this call; it is split across the
/// tested pairs.
pub fn check_two_dependence(fields: &[LevelField], family_alpha: f64) -> Result<TwoDependenceReport> {
    if fields.len() < 2 {
        return Err(ModelError::domain("need at least 2 realizations"));
    }
    let (nx, ny, n) = (fields[0].nx, fields[0].ny, fields[0].n);
    if fields.iter().any(|f| f.nx != nx || f.ny != ny || f.n != n) {
        return Err(ModelError::domain("realizations must share level geometry"));
    }
    let m = fields.len() as f64;
    // deterministic pair selection: three offsets at Chebyshev distance 3,
    // anchors strided to keep the family small
    let offsets = [(3usize, 0usize), (0, 3), (3, 3)];
    let stride_x = (nx / 4).max(1);
    let stride_y = (ny / 4).max(1);
    let mut pairs = Vec::new();
    let mut ax = 0;
    while ax < nx {
        let mut ay = 0;
        while ay < ny {
            for &(dx, dy) in &offsets {
                if ax + dx < nx && ay + dy < ny {
                    pairs.push(((ax, ay), (ax + dx, ay + dy)));
                }
            }
            ay += stride_y;
        }
        ax += stride_x;
    }
    let mut tested = 0usize;
    let mut degenerate = 0usize;
    let mut max_abs = 0.0f64;
    let mut min_p = 1.0f64;
    let alpha_pair = family_alpha / pairs.len().max(1) as f64;
    for ((ax, ay), (bx, by)) in pairs {
        let mut n11 = 0u64;
        let mut n10 = 0u64;
        let mut n01 = 0u64;
        let mut n00 = 0u64;
        for f in fields {
            match (f.bit(ax, ay), f.bit(bx, by)) {
                (true, true) => n11 += 1,
                (true, false) => n10 += 1,
                (false, true) => n01 += 1,
                (false, false) => n00 += 1,
            }
        }
        let pa = (n11 + n10) as f64 / m;
        let pb = (n11 + n01) as f64 / m;
        let va = pa * (1.0 - pa);
        let vb = pb * (1.0 - pb);
        if va <= 0.0 || vb <= 0.0 {
            degenerate += 1;
            continue;
        }
        tested += 1;
        let corr = ((n11 as f64 / m - pa * pb) / (va * vb).sqrt()).clamp(-1.0, 1.0);
        max_abs = max_abs.max(corr.abs());
        min_p = min_p.min(crate::stats::fisher_exact_two_sided(n11, n10, n01, n00));
    }
    let max_span = fields.iter().map(|f| f.max_box_span).max().unwrap_or(0);
    Ok(TwoDependenceReport {
        pairs_tested: tested,
        pairs_degenerate: degenerate,
        max_abs_correlation: max_abs,
        min_p_value: min_p,
        all_pairs_uncorrelated: min_p >= alpha_pair,
        max_box_span: max_span,
        structural_ok: max_span <= 2,
    })
}

// ---------------------------------------------------------------------------
// annulus schedule
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleReport {
    pub ok: bool,
    pub min_ratio: f64,
    /// Sum of 1/a_n over the last half of the ratios (Cauchy-tail proxy for
    /// summability; heuristic on finite lists).
    pub tail_sum: f64,
    pub tail_bound: f64,
    pub heuristic: bool,
}

/// Validate an annulus schedule: ratios `a_n = L_n / L_{n-1}` must all be at
/// least 9 and the tail of `sum 1/a_n` must stay below `tail_bound`.
pub fn validate_annuli_schedule(l_list: &[f64], tail_bound: f64) -> Result<ScheduleReport> {
    if l_list.len() < 2 {
        return Err(ModelError::domain("schedule needs at least two scales"));
    }
    if !(l_list[0] >= 1.0) {
        return Err(ModelError::domain("schedule must start at L1 >= 1"));
    }
    for w in l_list.windows(2) {
        if !(w[1] > w[0]) {
            return Err(ModelError::domain("schedule must be strictly increasing"));
        }
    }
    let ratios: Vec<f64> = l_list.windows(2).map(|w| w[1] / w[0]).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let half = ratios.len() / 2;
    let tail_sum: f64 = ratios[half..].iter().map(|a| 1.0 / a).sum();
    Ok(ScheduleReport {
        ok: min_ratio >= 9.0 && tail_sum < tail_bound,
        min_ratio,
        tail_sum,
        tail_bound,
        heuristic: true,
    })
}

// ---------------------------------------------------------------------------
// serialization of removal outcomes
// ---------------------------------------------------------------------------

/// Rows encoded as alternating run lengths, starting with the number of
/// leading zero (removed) boxes.
fn rle_row(row: &[bool]) -> Vec<u32> {
    let mut runs = Vec::new();
    let mut current = false;
    let mut count = 0u32;
    for &b in row {
        if b == current {
            count += 1;
        } else {
            runs.push(count);
            current = b;
            count = 1;
        }
    }
    runs.push(count);
    runs
}

fn unrle_row(runs: &[u32], expected: usize) -> Option<Vec<bool>> {
    let mut out = Vec::with_capacity(expected);
    let mut value = false;
    for &r in runs {
        out.extend(std::iter::repeat(value).take(r as usize));
        value = !value;
    }
    (out.len() == expected).then_some(out)
}

#[derive(Serialize, Deserialize)]
struct LevelJson {
    n: u32,
    interval: (f64, f64),
    nx: usize,
    ny: usize,
    bits: Vec<Vec<u32>>,
    max_box_span: usize,
}

impl Serialize for RemovalOutcome {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RemovalOutcome", 4)?;
        st.serialize_field("l", &self.l)?;
        st.serialize_field("u", &self.u)?;
        let levels: Vec<LevelJson> = self
            .levels
            .iter()
            .map(|lv| LevelJson {
                n: lv.n,
                interval: lv.interval,
                nx: lv.nx,
                ny: lv.ny,
                bits: lv.bits.chunks(lv.nx).map(rle_row).collect(),
                max_box_span: lv.max_box_span,
            })
            .collect();
        st.serialize_field("levels", &levels)?;
        st.serialize_field("crossing", &self.crossing)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for RemovalOutcome {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        struct Json {
            l: f64,
            u: f64,
            levels: Vec<LevelJson>,
            crossing: bool,
        }
        let j = Json::deserialize(d)?;
        let mut levels = Vec::with_capacity(j.levels.len());
        for lv in &j.levels {
            let mut bits = Vec::with_capacity(lv.nx * lv.ny);
            for row in &lv.bits {
                let r = unrle_row(row, lv.nx)
                    .ok_or_else(|| D::Error::custom("run lengths do not fill the row"))?;
                bits.extend(r);
            }
            if bits.len() != lv.nx * lv.ny {
                return Err(D::Error::custom("row count mismatch"));
            }
            levels.push(LevelField {
                n: lv.n,
                interval: lv.interval,
                nx: lv.nx,
                ny: lv.ny,
                bits,
                max_box_span: lv.max_box_span,
            });
        }
        // recompute the derived fields
        let n0 = levels.len() as u32;
        let fnx = 2usize.pow(n0 + 1);
        let fny = 2usize.pow(n0);
        let mut surviving = vec![true; fnx * fny];
        for level in &levels {
            let shift = n0 - level.n;
            for iy in 0..fny {
                for ix in 0..fnx {
                    if !level.bit(ix >> shift, iy >> shift) {
                        surviving[iy * fnx + ix] = false;
                    }
                }
            }
        }
        let crossing = grid_crossing(&surviving, fnx, fny);
        if crossing != j.crossing {
            return Err(D::Error::custom("stored crossing flag contradicts the bits"));
        }
        Ok(RemovalOutcome {
            l: j.l,
            u: j.u,
            levels,
            surviving,
            crossing,
        })
    }
}
