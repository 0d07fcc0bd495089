//! Adaptive Gauss–Kronrod quadrature.
//!
//! Used for the mixed extent expectations of the hit intensity and for the
//! radial truncation-error integrals. Intervals are bisected greedily until
//! the summed Kronrod error estimate meets the relative tolerance; hitting
//! the interval cap is an error, never a silently degraded answer.

use crate::error::ModelError;
use crate::Result;

// G7-K15 nodes and weights on [-1, 1] (Kronrod nodes, Kronrod weights,
// embedded Gauss weights on the odd-indexed nodes).
const XK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// Default relative tolerance for all internal integrals.
pub const REL_TOL: f64 = 1e-8;
/// Hard cap on adaptive subdivisions.
pub const MAX_INTERVALS: usize = 20_000;

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut ik = WK[7] * fc;
    let mut ig = WG[3] * fc;
    for i in 0..7 {
        let x = h * XK[i];
        let fs = f(c - x) + f(c + x);
        ik += WK[i] * fs;
        if i % 2 == 1 {
            ig += WG[i / 2] * fs;
        }
    }
    ik *= h;
    ig *= h;
    (ik, (ik - ig).abs())
}

/// Integrate `f` on the finite interval `[a, b]` to relative tolerance `rel`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(ModelError::domain("integrate: endpoints must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    let f = &f as &dyn Fn(f64) -> f64;
    let (i0, e0) = gk15(f, a, b);
    // (error, lo, hi, value)
    let mut segs: Vec<(f64, f64, f64, f64)> = vec![(e0, a, b, i0)];
    loop {
        let total: f64 = segs.iter().map(|s| s.3).sum();
        let err: f64 = segs.iter().map(|s| s.0).sum();
        // the second branch terminates integrals whose value cancels to
        // (near) zero: the error is measured against the integrand mass
        let mass: f64 = segs.iter().map(|s| s.3.abs()).sum();
        if err <= rel * total.abs().max(1e-300) || err <= 1e-12 * mass || err <= 1e-300 {
            return Ok(total);
        }
        if segs.len() >= MAX_INTERVALS {
            return Err(ModelError::QuadratureCap(format!(
                "interval cap {MAX_INTERVALS} reached (err {err:.3e}, total {total:.6e})"
            )));
        }
        // split the segment with the largest error estimate
        let worst = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(i, _)| i)
            .unwrap();
        let (_, lo, hi, _) = segs.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(ModelError::QuadratureCap(
                "interval shrank below floating point resolution".into(),
            ));
        }
        let (il, el) = gk15(f, lo, mid);
        let (ir, er) = gk15(f, mid, hi);
        segs.push((el, lo, mid, il));
        segs.push((er, mid, hi, ir));
    }
}

/// Integrate `f` on `[a, +inf)` via the substitution `r = a + t/(1-t)`.
pub fn integrate_to_inf(f: impl Fn(f64) -> f64, a: f64, rel: f64) -> Result<f64> {
    let g = move |t: f64| {
        let om = 1.0 - t;
        let r = a + t / om;
        f(r) / (om * om)
    };
    integrate(g, 0.0, 1.0 - 1e-14, rel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_tail() {
        // integral of exp(-x) on [0, inf) = 1
        let v = integrate_to_inf(|x| (-x).exp(), 0.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn power_tail() {
        // integral of r^-3 on [2, inf) = 1/(2*4) = 0.125
        let v = integrate_to_inf(|r| r.powi(-3), 2.0, 1e-10).unwrap();
        assert!((v - 0.125).abs() < 1e-9, "{v}");
    }

    #[test]
    fn oscillatory_needs_subdivision() {
        let v = integrate(|x| (37.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-10).unwrap();
        let exact = (1.0 - (37.0 * std::f64::consts::PI).cos()) / 37.0;
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn cancelling_integral_terminates() {
        // whole periods cancel to zero; termination must not demand relative
        // accuracy against a zero total
        let v = integrate(|x| (40.0 * x).sin(), 0.0, std::f64::consts::PI, 1e-10).unwrap();
        assert!(v.abs() < 1e-9, "{v}");
    }
}
