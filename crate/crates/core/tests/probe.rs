//! Temporary calibration probe (deleted before release).

use ellipseperc::events::Event;
use ellipseperc::geometry::{BoxSpec, GrainKind, ORIGIN};
use ellipseperc::montecarlo::{estimate, RunParams};
use ellipseperc::sampling::AxisLaw;

#[test]
#[ignore]
fn probe_scale_invariance() {
    let t0 = std::time::Instant::now();
    for l in [10.0, 100.0, 1000.0] {
        let params = RunParams::new(AxisLaw::pareto(2.0).unwrap(), 0.5, GrainKind::Ellipse);
        let ev = Event::OneEllipseLr(BoxSpec::new(l, 1.0));
        let r = estimate(&ev, &params, 10_000, 42, 0.95).unwrap();
        println!(
            "one_ellipse_lr l={l}: phat={:.4} ci=({:.4},{:.4}) wall={:.2}s",
            r.phat, r.ci_lo, r.ci_hi, r.wall_time
        );
    }
    println!("total {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_envelope_pilot() {
    let t0 = std::time::Instant::now();
    for u in [0.8, 0.4, 0.2, 0.1, 0.05, 0.025] {
        let params = RunParams::new(AxisLaw::pareto(2.0).unwrap(), u, GrainKind::Ellipse);
        let ev = Event::VacantLr(BoxSpec::new(8.0, 2.0));
        let r = estimate(&ev, &params, 2000, 7, 0.95).unwrap();
        println!("vacant_lr l=8 u={u}: phat={:.4}", r.phat);
    }
    println!("pilot {:?}", t0.elapsed());
    // check drift across scales at a plausible pilot u
    for u in [0.2, 0.1, 0.05] {
        for l in [8.0, 32.0, 128.0] {
            let params = RunParams::new(AxisLaw::pareto(2.0).unwrap(), u, GrainKind::Ellipse);
            let ev = Event::VacantLr(BoxSpec::new(l, 2.0));
            let t = std::time::Instant::now();
            let r = estimate(&ev, &params, 4000, 11, 0.95).unwrap();
            println!(
                "vacant_lr u={u} l={l}: phat={:.4} wall={:.2}s",
                r.phat,
                t.elapsed().as_secs_f64()
            );
        }
    }
    println!("total {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_dichotomy() {
    let t0 = std::time::Instant::now();
    for (alpha, u) in [(0.8, 0.05), (1.5, 0.1)] {
        let mut last = f64::NAN;
        for p in 4..=10 {
            let radius = 2f64.powi(p);
            let mut params = RunParams::new(AxisLaw::pareto(alpha).unwrap(), u, GrainKind::Ellipse);
            params.trunc_radius = Some(radius);
            params.override_truncation_guard = true;
            let ev = Event::PointCovered { at: ORIGIN };
            let t = std::time::Instant::now();
            let r = estimate(&ev, &params, 4000, 5, 0.95).unwrap();
            let vac = 1.0 - r.phat;
            println!(
                "alpha={alpha} radius=2^{p}: vacancy={vac:.4} (delta {:.4}) wall={:.2}s",
                last - vac,
                t.elapsed().as_secs_f64()
            );
            last = vac;
        }
    }
    println!("total {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_circuit() {
    let t0 = std::time::Instant::now();
    for (u, scales) in [(0.5, vec![3.0, 9.0, 27.0, 81.0]), (100.0, vec![4.0, 16.0])] {
        for a in scales {
            let params = RunParams::new(AxisLaw::pareto(1.5).unwrap(), u, GrainKind::Ellipse);
            let ev = Event::Circuit3 { a };
            let r = estimate(&ev, &params, 20_000, 9, 0.95).unwrap();
            println!("circuit3 u={u} a={a}: phat={:.5}", r.phat);
        }
    }
    println!("total {:?}", t0.elapsed());
}

#[test]
#[ignore]
fn probe_duality_u() {
    for alpha in [1.5, 2.0, 3.0] {
        for u in [0.05, 0.1, 0.2, 0.3] {
            let params = RunParams::new(AxisLaw::pareto(alpha).unwrap(), u, GrainKind::Ellipse);
            let ev = Event::CoveredTb(BoxSpec::new(12.0, 1.0));
            let r = estimate(&ev, &params, 500, 3, 0.95).unwrap();
            println!("covered_tb alpha={alpha} u={u}: phat={:.3}", r.phat);
        }
    }
}

#[test]
#[ignore]
fn probe_one_ellipse_unrestricted() {
    use ellipseperc::sampling::sample_hitting_process;
    use ellipseperc::rng::substream;
    // full hit process (no R restriction), direct event scan
    let law = AxisLaw::pareto(2.0).unwrap();
    let window = BoxSpec::new(10.0, 1.0);
    let mut succ = 0u32;
    let n = 4000;
    for rep in 0..n {
        let mut rng = substream(42, rep);
        let cfg = sample_hitting_process(&window, 0.5, &law, GrainKind::Ellipse, &mut rng, 42).unwrap();
        if ellipseperc::events::one_ellipse_crossing(&cfg, &window) {
            succ += 1;
        }
    }
    println!("unrestricted l=10: phat={:.4}", succ as f64 / n as f64);
}

#[test]
#[ignore]
fn probe_one_ellipse_thinning_oracle() {
    use ellipseperc::geometry::{grain_segment_intersects, GrainSpec, Point};
    use rand::Rng;
    // independent route: P = 1 - exp(-u * I), I = Int_z P_{R,V}[grain at z
    // meets both sides]; the inner probability integrates the exact survival
    // over the V-conditional minimal R found by bisection on the monotone
    // segment predicate.
    let law = AxisLaw::pareto(2.0).unwrap();
    for l in [10.0, 100.0, 1000.0] {
        let bx = BoxSpec::new(l, 1.0);
        let (left, right) = (bx.left_side(), bx.right_side());
        let meets_both = |z: Point, r: f64, v: f64| {
            let g = GrainSpec::ellipse(z, r, v);
            grain_segment_intersects(&g, &left) && grain_segment_intersects(&g, &right)
        };
        // minimal R for fixed (z, v): monotone in R (grains are nested)
        let r_need = |z: Point, v: f64| -> f64 {
            let rmax = 64.0 * l;
            if !meets_both(z, rmax, v) {
                return f64::INFINITY;
            }
            let (mut lo, mut hi) = (1.0, rmax);
            if meets_both(z, lo, v) {
                return 1.0;
            }
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if meets_both(z, mid, v) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        // MC over (z, V) with z uniform on [-T, T]^2; integrand decays ~
        // |z|^-3 beyond the box scale, so T = 30 l captures the mass
        let t_half = 30.0 * l;
        let mut rng = ellipseperc::rng::substream(7, 0);
        let m = 400_000;
        let mut acc = 0.0;
        for _ in 0..m {
            let z = Point::new(
                rng.gen_range(-t_half..t_half),
                rng.gen_range(-t_half..t_half),
            );
            let v = ellipseperc::sampling::sample_direction(rng.gen::<f64>());
            let rn = r_need(z, v);
            if rn.is_finite() {
                acc += law.survival(rn);
            }
        }
        let area = (2.0 * t_half) * (2.0 * t_half);
        let integral = acc / m as f64 * area;
        let p = 1.0 - (-0.5 * integral).exp();
        println!("thinning oracle l={l}: I={integral:.4} p={p:.4}");
    }
}

#[test]
#[ignore]
fn probe_lr1_envelope() {
    for u in [20.0, 50.0] {
        for l in [8.0, 16.0, 32.0] {
            let params = RunParams::new(AxisLaw::pareto(3.0).unwrap(), u, GrainKind::Ellipse);
            let ev = Event::OneEllipseLr(BoxSpec::new(l, 1.0));
            let r = estimate(&ev, &params, 20_000, 13, 0.95).unwrap();
            println!(
                "lr1 alpha=3 u={u} l={l}: phat={:.4} -log(1-p)={:.4}",
                r.phat,
                -(1.0 - r.phat).ln()
            );
        }
    }
}

#[test]
#[ignore]
fn probe_covariance_decay() {
    use ellipseperc::montecarlo::covariance;
    use ellipseperc::geometry::Point;
    for d in [10.0, 28.0, 82.0] {
        let params = RunParams::new(AxisLaw::pareto(3.0).unwrap(), 0.1, GrainKind::Ellipse);
        let a = Event::PointCovered { at: ORIGIN };
        let b = Event::PointCovered { at: Point::new(d, 0.0) };
        let t = std::time::Instant::now();
        let r = covariance(&a, &b, &params, 200_000, 3).unwrap();
        println!(
            "cov d={d}: cov={:.5} ci=({:.5},{:.5}) p_a={:.3} wall={:.1?}",
            r.cov_hat, r.ci_lo, r.ci_hi, r.mean_a, t.elapsed()
        );
    }
}

#[test]
#[ignore]
fn probe_scan_trend() {
    for alpha in [1.5, 2.0, 3.0] {
        for l in [16.0, 64.0, 256.0] {
            let params = RunParams::new(AxisLaw::pareto(alpha).unwrap(), 0.12, GrainKind::Ellipse);
            let ev = Event::CoveredLr(BoxSpec::new(l, 1.0));
            let t = std::time::Instant::now();
            let r = estimate(&ev, &params, 1500, 21, 0.95).unwrap();
            println!(
                "covered_lr alpha={alpha} l={l}: phat={:.3} wall={:.1?}",
                r.phat,
                t.elapsed()
            );
        }
    }
}

#[test]
#[ignore]
fn probe_annulus_qk() {
    for (k, n) in [(0u32, 3000u64), (1, 1500), (2, 300)] {
        let r_in = 10f64.powi(k as i32);
        let r_out = 8.0 * r_in;
        let params = RunParams::new(AxisLaw::pareto(3.0).unwrap(), 0.05, GrainKind::Disk);
        let ev = Event::AnnulusConn { r_in, r_out };
        let t = std::time::Instant::now();
        let r = estimate(&ev, &params, n, 17, 0.95).unwrap();
        println!(
            "qk k={k}: phat={:.4} ci=({:.4},{:.4}) wall={:.1?}",
            r.phat, r.ci_lo, r.ci_hi, t.elapsed()
        );
    }
}
