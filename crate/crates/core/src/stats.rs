//! Small statistical helpers: normal quantiles, chi-square tails,
//! Kolmogorov–Smirnov statistics.

/// Inverse standard normal CDF (Acklam's rational approximation with one
/// Halley refinement; absolute error far below 1e-9 on (0, 1)).
pub fn probit(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "probit requires p in (0,1), got {p}");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let plow = 0.02425;
    let x = if p < plow {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // One Halley step against the exact CDF.
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Standard normal CDF via erfc.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function (W. J. Cody style rational approximation,
/// ~1e-15 relative accuracy; adapted from the classic Numerical Recipes form).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 2.0 / (2.0 + z);
    let ty = 4.0 * t - 2.0;
    const COF: [f64; 28] = [
        -1.3026537197817094,
        6.419697923564902e-1,
        1.9476473204185836e-2,
        -9.561514786808631e-3,
        -9.46595344482036e-4,
        3.66839497852761e-4,
        4.2523324806907e-5,
        -2.0278578112534e-5,
        -1.624290004647e-6,
        1.303655835580e-6,
        1.5626441722e-8,
        -8.5238095915e-8,
        6.529054439e-9,
        5.059343495e-9,
        -9.91364156e-10,
        -2.27365122e-10,
        9.6467911e-11,
        2.394038e-12,
        -6.886027e-12,
        8.94487e-13,
        3.13092e-13,
        -1.12708e-13,
        3.81e-16,
        7.106e-15,
        -1.523e-15,
        -9.4e-17,
        1.21e-16,
        -2.8e-17,
    ];
    let mut d = 0.0;
    let mut dd = 0.0;
    for j in (1..COF.len()).rev() {
        let tmp = d;
        d = ty * d - dd + COF[j];
        dd = tmp;
    }
    let ans = t * (-z * z + 0.5 * (COF[0] + ty * d) - dd).exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom,
/// via the Wilson–Hilferty cube-root normal approximation (adequate for the
/// moderate-to-large dof used in the goodness-of-fit checks here).
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    assert!(dof > 0.0);
    if x <= 0.0 {
        return 1.0;
    }
    let v = 2.0 / (9.0 * dof);
    let z = ((x / dof).powf(1.0 / 3.0) - (1.0 - v)) / v.sqrt();
    1.0 - normal_cdf(z)
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against the uniform
/// distribution on `[lo, hi]`.
pub fn ks_statistic_uniform(samples: &mut [f64], lo: f64, hi: f64) -> f64 {
    assert!(hi > lo && !samples.is_empty());
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let lo_step = i as f64 / n;
        let hi_step = (i + 1) as f64 / n;
        d = d.max((f - lo_step).abs()).max((hi_step - f).abs());
    }
    d
}

/// Lanczos log-gamma for positive arguments.
pub fn ln_gamma(z: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    assert!(z > 0.0);
    let z = z - 1.0;
    let mut x = G[0];
    for (i, &g) in G.iter().enumerate().skip(1) {
        x += g / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

fn ln_choose(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Fisher's exact test (two-sided) for a 2x2 contingency table
/// `[[n11, n10], [n01, n00]]`; correctly calibrated even for very sparse
/// tables, unlike normal-theory correlation intervals.
pub fn fisher_exact_two_sided(n11: u64, n10: u64, n01: u64, n00: u64) -> f64 {
    let (r1, r2) = (n11 + n10, n01 + n00);
    let c1 = n11 + n01;
    let m = r1 + r2;
    if r1 == 0 || r2 == 0 || c1 == 0 || c1 == m {
        return 1.0;
    }
    let log_p = |k: u64| -> f64 {
        ln_choose(r1 as f64, k as f64) + ln_choose(r2 as f64, (c1 - k) as f64)
            - ln_choose(m as f64, c1 as f64)
    };
    let k_lo = c1.saturating_sub(r2);
    let k_hi = r1.min(c1);
    let obs = log_p(n11);
    let mut p = 0.0;
    for k in k_lo..=k_hi {
        let lp = log_p(k);
        if lp <= obs + 1e-9 {
            p += lp.exp();
        }
    }
    p.min(1.0)
}

/// Poisson dispersion test: returns the two-sided p-value of the index of
/// dispersion `(n-1) s^2 / mean` against its chi-square null.
pub fn poisson_dispersion_pvalue(counts: &[u64]) -> f64 {
    let n = counts.len() as f64;
    assert!(n >= 2.0);
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    if mean == 0.0 {
        return 1.0;
    }
    let ss: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum();
    let stat = ss / mean;
    let p_hi = chi_square_sf(stat, n - 1.0);
    let p = 2.0 * p_hi.min(1.0 - p_hi);
    p.clamp(0.0, 1.0)
}
