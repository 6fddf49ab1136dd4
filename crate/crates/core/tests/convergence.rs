use maxsurf::diffgeo::{curvatures, hopf_differential, FdSteps};
use maxsurf::immersions::{hyperbolic_cylinder, maximal_phi_e, minimal_phi_e, SurfaceChart};
use maxsurf::sinhgordon::solve;

fn ratio(c: &SurfaceChart, x: f64, y: f64, h: f64, err: &dyn Fn(&SurfaceChart, f64, f64, &FdSteps) -> f64) -> f64 {
    err(c, x, y, &FdSteps::second_order(h)) / err(c, x, y, &FdSteps::second_order(0.5 * h))
}

fn mean(c: &SurfaceChart, x: f64, y: f64, s: &FdSteps) -> f64 {
    curvatures(c, x, y, s).unwrap().mean.abs()
}

fn hopf(c: &SurfaceChart, x: f64, y: f64, s: &FdSteps) -> f64 {
    (hopf_differential(c, x, y, s).unwrap() - c.declared_hopf()).norm()
}

fn sigma(c: &SurfaceChart, x: f64, y: f64, s: &FdSteps) -> f64 {
    (curvatures(c, x, y, s).unwrap().sigma_sq - 2.0).abs()
}

#[test]
fn halving_the_step_quarters_the_residual() {
    let ads = maximal_phi_e(solve(1.0, 0.0, false).unwrap()).unwrap();
    let ads_neg = maximal_phi_e(solve(-0.5, 0.0, false).unwrap()).unwrap();
    let h2xr = minimal_phi_e(solve(4.0, 0.0, false).unwrap()).unwrap();
    let cyl = hyperbolic_cylinder(0.3);
    let cases: [(
        &SurfaceChart,
        f64,
        f64,
        &dyn Fn(&SurfaceChart, f64, f64, &FdSteps) -> f64,
    ); 5] = [
        (&ads, 0.1, 0.2, &mean),
        (&ads, 0.1, 0.2, &hopf),
        (&ads_neg, -0.5, 0.3, &mean),
        (&h2xr, 0.05, -0.1, &mean),
        (&cyl, 0.4, -0.3, &sigma),
    ];
    for (c, x, y, err) in cases {
        let r = ratio(c, x, y, 1e-3, err);
        assert!((3.5..=4.5).contains(&r), "{} at ({x}, {y}): ratio {r}", c.label());
    }
}
