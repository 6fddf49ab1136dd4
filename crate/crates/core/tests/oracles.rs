//! Library values against independent implementations written here.

use maxsurf::diffgeo::{curve_length, CurveSample, MetricSource};
use maxsurf::elliptic::{ellip_f, ellip_k, jacobi, jacobi_am, EllipticParameter};
use maxsurf::immersions::{maximal_phi_e, Ambient, Point, Rect, SurfaceChart};
use maxsurf::lorentz::Vec4;
use maxsurf::sinhgordon::{initial_slope, rk_oracle, solve, Interval};
use num_complex::Complex64;
use std::sync::Arc;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

fn incomplete_f(phi: f64, m: f64) -> f64 {
    simpson(&|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-15)
}

#[test]
fn complete_integral_matches_simpson() {
    let k = ellip_k(EllipticParameter::new(0.5).unwrap()).unwrap();
    assert!((k - 1.854_074_677_301_371_9).abs() < 1e-14);
    for m in [0.0, 0.1, 0.5, 0.9, 0.99] {
        let k = ellip_k(EllipticParameter::new(m).unwrap()).unwrap();
        let oracle = incomplete_f(std::f64::consts::FRAC_PI_2, m);
        assert!((k - oracle).abs() < 1e-12 * oracle, "m={m}: {k} vs {oracle}");
    }
}

#[test]
fn incomplete_integral_matches_simpson() {
    for &(phi, m) in &[(0.3, 0.2), (1.2, 0.7), (2.5, 0.95), (-0.8, 0.5)] {
        let f = ellip_f(phi, EllipticParameter::new(m).unwrap()).unwrap();
        let oracle = incomplete_f(phi, m);
        assert!((f - oracle).abs() < 1e-12, "phi={phi} m={m}: {f} vs {oracle}");
    }
}

#[test]
fn amplitude_matches_bisection() {
    for &(u, m) in &[(1.0, 0.7), (0.25, 0.1), (2.0, 0.5), (3.7, 0.3)] {
        let (mut lo, mut hi) = (0.0, 2.0 * u + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if incomplete_f(mid, m) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let am = jacobi_am(u, EllipticParameter::new(m).unwrap()).unwrap();
        assert!((am - lo).abs() < 1e-11, "u={u} m={m}: {am} vs {lo}");
    }
}

#[test]
fn jacobi_derivatives_match_difference_quotients() {
    let m = EllipticParameter::new(0.6).unwrap();
    let h = 1e-5;
    for x in [0.1, 0.9, 1.7, -2.3] {
        let j = jacobi(x, m).unwrap();
        let (a, b) = (jacobi(x + h, m).unwrap(), jacobi(x - h, m).unwrap());
        let d = |p: f64, q: f64| (p - q) / (2.0 * h);
        assert!((d(a.sn, b.sn) - j.cn * j.dn).abs() < 1e-9);
        assert!((d(a.cn, b.cn) + j.sn * j.dn).abs() < 1e-9);
        assert!((d(a.dn, b.dn) + 0.6 * j.sn * j.cn).abs() < 1e-9);
    }
}

#[test]
fn closed_forms_follow_runge_kutta() {
    for &(e, v0) in &[(2.0, 0.3), (0.5, 0.1), (-0.5, 0.4), (-3.0, 1.2), (-1.0, 0.7)] {
        let sol = solve(e, v0, false).unwrap();
        let xi = sol.interval();
        let reach = if xi.hi.is_finite() { 0.8 * xi.hi } else { 1.0 };
        let path = rk_oracle(e, v0, initial_slope(e, v0), reach, 1e-4).unwrap();
        assert!(!path.blew_up);
        for (x, v) in path.xs.iter().zip(&path.v).step_by(97) {
            let w = sol.eval_v(*x).unwrap();
            assert!((w - v).abs() < 1e-8 * v.abs().max(1.0), "E={e} x={x}: {w} vs {v}");
        }
    }
}

#[test]
fn g_integral_matches_simpson() {
    for &(e, v0, x) in &[(4.0, 0.0, 0.3), (0.1, 0.0, -0.6), (-0.5, 0.0, -0.4)] {
        let sol = solve(e, v0, false).unwrap();
        let base = sol.g_base_point().unwrap();
        let oracle = simpson(
            &|t| 1.0 / (2.0 * e + (2.0 * sol.eval_v(t).unwrap()).exp()),
            base,
            x,
            1e-14,
        );
        let g = sol.g_integral(x, base).unwrap();
        assert!((g - oracle).abs() < 1e-11, "E={e}: {g} vs {oracle}");
    }
}

fn flat_chart(factor: Arc<dyn Fn(f64) -> f64 + Send + Sync>, x: Interval) -> SurfaceChart {
    let f2 = factor.clone();
    SurfaceChart::new(
        "probe",
        Ambient::H31,
        Rect::new(x, Interval::REAL_LINE),
        Rect::new(x, Interval::new(-1.0, 1.0)),
        Complex64::new(0.0, 0.0),
        Arc::new(|_, _| Ok(Point::h31(Vec4::new(0.0, 0.0, 1.0, 0.0)))),
        Arc::new(move |x, _| Ok(f2(x))),
    )
}

#[test]
fn log_tanh_probe_has_length_log_cosh() {
    // metric e^{2v}|dz|² with v = log tanh x, along γ(t) = (a − t, 0)
    let a: f64 = 1.0;
    let c = flat_chart(Arc::new(|x: f64| x.tanh().powi(2)), Interval::new(0.0, f64::INFINITY));
    let gamma = |t: f64| CurveSample {
        x: a - t,
        y: 0.0,
        dx: -1.0,
        dy: 0.0,
    };
    let len = curve_length(&c, gamma, 0.0, a * (1.0 - 1e-12), MetricSource::Declared).unwrap();
    assert!((len - a.cosh().ln()).abs() < 1e-8, "{len}");
}

#[test]
fn phi_e_stays_on_quadric_along_rk_values() {
    // the chart only depends on v through the closed form; compare its factor with RK
    let sol = solve(1.0, 0.2, false).unwrap();
    let c = maximal_phi_e(sol).unwrap();
    let path = rk_oracle(1.0, 0.2, initial_slope(1.0, 0.2), 0.4, 1e-4).unwrap();
    for (x, v) in path.xs.iter().zip(&path.v).step_by(500) {
        let f = c.declared_conformal_factor(*x, 0.0).unwrap();
        assert!((f - (2.0 * v).exp()).abs() < 1e-8 * f);
        assert!(c.eval(*x, 0.3).unwrap().quadric_residual() < 1e-10);
    }
}
