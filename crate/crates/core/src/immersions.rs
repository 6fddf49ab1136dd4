//! The explicit surface families and the Gauss-map constructions linking
//! maximal surfaces of `H³₁` with minimal surfaces of `H² × H²` and `H² × ℝ`.
//!
//! Ambient coordinates:
//!
//! | ambient  | coordinates               | metric diagonal        |
//! |----------|---------------------------|------------------------|
//! | `H31`    | `x₁..x₄` of `ℝ⁴₂`         | `(+, +, −, −)`         |
//! | `H2xR`   | `p₁, p₂, p₃, t`           | `(−, +, +, +)`         |
//! | `H2xH2`  | `p₁, p₂, p₃, q₁, q₂, q₃`  | `(−, +, +, −, +, +)`   |
//!
//! The `H²` factors always have their first coordinate timelike.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, SQRT_2};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diffgeo::{self, FdSteps};
use crate::error::{Error, Result};
use crate::lorentz::{inner4, lambda_pm_coords, project, wedge, PointH2xR, Side, Vec3, Vec4, ETA3, ETA4};
use crate::sinhgordon::{Interval, SinhGordonSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ambient {
    #[serde(rename = "h31")]
    H31,
    #[serde(rename = "h2xh2")]
    H2xH2,
    #[serde(rename = "h2xr")]
    H2xR,
}

impl Ambient {
    pub fn dim(self) -> usize {
        match self {
            Ambient::H31 | Ambient::H2xR => 4,
            Ambient::H2xH2 => 6,
        }
    }

    pub fn metric(self) -> &'static [f64] {
        const H31: [f64; 4] = ETA4;
        const H2XR: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];
        const H2XH2: [f64; 6] = [-1.0, 1.0, 1.0, -1.0, 1.0, 1.0];
        match self {
            Ambient::H31 => &H31,
            Ambient::H2xR => &H2XR,
            Ambient::H2xH2 => &H2XH2,
        }
    }

    /// Ambient inner product of two coordinate vectors.
    pub fn inner(self, a: &[f64; 6], b: &[f64; 6]) -> f64 {
        self.metric().iter().enumerate().map(|(i, g)| g * a[i] * b[i]).sum()
    }

    pub fn name(self) -> &'static str {
        match self {
            Ambient::H31 => "h31",
            Ambient::H2xH2 => "h2xh2",
            Ambient::H2xR => "h2xr",
        }
    }

    pub fn parse(s: &str) -> Option<Ambient> {
        match s {
            "h31" => Some(Ambient::H31),
            "h2xh2" => Some(Ambient::H2xH2),
            "h2xr" => Some(Ambient::H2xR),
            _ => None,
        }
    }
}

impl fmt::Display for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point of one of the ambient manifolds; unused trailing slots are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub ambient: Ambient,
    pub c: [f64; 6],
}

impl Point {
    pub fn h31(p: Vec4) -> Self {
        let mut c = [0.0; 6];
        c[..4].copy_from_slice(&p.0);
        Point {
            ambient: Ambient::H31,
            c,
        }
    }

    pub fn h2xr(q: PointH2xR) -> Self {
        Point {
            ambient: Ambient::H2xR,
            c: [q.p.0[0], q.p.0[1], q.p.0[2], q.t, 0.0, 0.0],
        }
    }

    pub fn h2xh2(a: Vec3, b: Vec3) -> Self {
        Point {
            ambient: Ambient::H2xH2,
            c: [a.0[0], a.0[1], a.0[2], b.0[0], b.0[1], b.0[2]],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.ambient.dim()]
    }

    pub fn as_vec4(&self) -> Option<Vec4> {
        (self.ambient == Ambient::H31).then(|| Vec4([self.c[0], self.c[1], self.c[2], self.c[3]]))
    }

    pub fn as_h2xr(&self) -> Option<PointH2xR> {
        (self.ambient == Ambient::H2xR).then(|| PointH2xR {
            p: Vec3([self.c[0], self.c[1], self.c[2]]),
            t: self.c[3],
        })
    }

    /// The `H²` factors of a product point.
    pub fn h2_factors(&self) -> Vec<Vec3> {
        match self.ambient {
            Ambient::H31 => Vec::new(),
            Ambient::H2xR => vec![Vec3([self.c[0], self.c[1], self.c[2]])],
            Ambient::H2xH2 => vec![
                Vec3([self.c[0], self.c[1], self.c[2]]),
                Vec3([self.c[3], self.c[4], self.c[5]]),
            ],
        }
    }

    /// Defining-quadric residual, scaled by the squared coordinate size so
    /// that it measures relative cancellation.
    pub fn quadric_residual(&self) -> f64 {
        match self.ambient {
            Ambient::H31 => {
                let p = Vec4([self.c[0], self.c[1], self.c[2], self.c[3]]);
                (p.norm_sq() + 1.0).abs() / p.euclidean_norm().powi(2).max(1.0)
            }
            _ => self
                .h2_factors()
                .iter()
                .map(|q| q.h2_residual() / q.0[0].powi(2).max(1.0))
                .fold(0.0, f64::max),
        }
    }
}

/// An open rectangle of the `(x, y)` parameter plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: Interval,
    pub y: Interval,
}

impl Rect {
    pub fn new(x: Interval, y: Interval) -> Self {
        Rect { x, y }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }
}

pub type EvalFn = dyn Fn(f64, f64) -> Result<Point> + Send + Sync;
pub type FactorFn = dyn Fn(f64, f64) -> Result<f64> + Send + Sync;
pub type ScaleFn = dyn Fn(f64, f64) -> Result<[f64; 2]> + Send + Sync;

/// A parametrised surface with its declared conformal factor and Hopf constant.
#[derive(Clone)]
pub struct SurfaceChart {
    label: String,
    ambient: Ambient,
    domain: Rect,
    window: Rect,
    declared_hopf: Complex64,
    fd_scale: f64,
    eval: Arc<EvalFn>,
    factor: Arc<FactorFn>,
    scale: Option<Arc<ScaleFn>>,
}

impl fmt::Debug for SurfaceChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfaceChart")
            .field("label", &self.label)
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .field("declared_hopf", &self.declared_hopf)
            .finish_non_exhaustive()
    }
}

impl SurfaceChart {
    /// `window` is a finite rectangle inside `domain` used for default grids.
    pub fn new(
        label: impl Into<String>,
        ambient: Ambient,
        domain: Rect,
        window: Rect,
        declared_hopf: Complex64,
        eval: Arc<EvalFn>,
        factor: Arc<FactorFn>,
    ) -> Self {
        SurfaceChart {
            label: label.into(),
            ambient,
            domain,
            window,
            declared_hopf,
            fd_scale: 1.0,
            eval,
            factor,
            scale: None,
        }
    }

    /// Multiplier applied to finite-difference steps; charts whose values
    /// already carry finite-difference noise use a value above 1.
    pub fn with_fd_scale(mut self, scale: f64) -> Self {
        self.fd_scale = scale;
        self
    }

    /// Local length scales `(ℓx, ℓy)`, each in `]0, 1]`, multiplying the
    /// finite-difference steps along `x` and `y`. Charts that degenerate
    /// towards their domain boundary shrink them there.
    pub fn with_length_scale<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<[f64; 2]> + Send + Sync + 'static,
    {
        self.scale = Some(Arc::new(f));
        self
    }

    fn with_scale_of(self, a: &SurfaceChart, b: &SurfaceChart) -> Self {
        match (a.scale.clone(), b.scale.clone()) {
            (None, None) => self,
            (Some(f), None) | (None, Some(f)) => SurfaceChart { scale: Some(f), ..self },
            (Some(f), Some(g)) => self.with_length_scale(move |x, y| {
                let (a, b) = (f(x, y)?, g(x, y)?);
                Ok([a[0].min(b[0]), a[1].min(b[1])])
            }),
        }
    }

    pub fn length_scale(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        match &self.scale {
            Some(f) => Ok(f(x, y)?.map(|l| l.clamp(1e-6, 1.0))),
            None => Ok([1.0, 1.0]),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_window(mut self, window: Rect) -> Self {
        self.window = window;
        self
    }

    /// Post-composes the evaluation map; the declared data are kept.
    pub fn map_points<F>(&self, label: impl Into<String>, f: F) -> SurfaceChart
    where
        F: Fn(f64, f64, Point) -> Point + Send + Sync + 'static,
    {
        let inner = self.eval.clone();
        SurfaceChart {
            label: label.into(),
            eval: Arc::new(move |x, y| Ok(f(x, y, inner(x, y)?))),
            ..self.clone()
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn declared_hopf(&self) -> Complex64 {
        self.declared_hopf
    }

    pub fn fd_scale(&self) -> f64 {
        self.fd_scale
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<Point> {
        if !self.domain.contains(x, y) {
            return Err(Error::domain(format!(
                "({x}, {y}) is outside the domain of {}",
                self.label
            )));
        }
        (self.eval)(x, y)
    }

    pub fn declared_conformal_factor(&self, x: f64, y: f64) -> Result<f64> {
        (self.factor)(x, y)
    }
}

fn whole_plane() -> Rect {
    Rect::new(Interval::REAL_LINE, Interval::REAL_LINE)
}

fn square(r: f64) -> Rect {
    Rect::new(Interval::new(-r, r), Interval::new(-r, r))
}

/// `(u, φ) ↦ (sinh u cos φ, sinh u sin φ, cosh u, 0)`, the totally geodesic
/// `H²` given by `Im w = 0`.
pub fn totally_geodesic_b(u: f64, phi: f64) -> Vec4 {
    let (s, c) = phi.sin_cos();
    Vec4::new(u.sinh() * c, u.sinh() * s, u.cosh(), 0.0)
}

/// Conformal disc chart of the totally geodesic surface `B`:
/// `(x, y) ↦ (2x, 2y, 1 + r², 0) / (1 − r²)`.
pub fn b_chart() -> SurfaceChart {
    SurfaceChart::new(
        "B",
        Ambient::H31,
        square(0.7),
        square(0.6),
        Complex64::new(0.0, 0.0),
        Arc::new(|x, y| {
            let r2 = x * x + y * y;
            let d = 1.0 - r2;
            Ok(Point::h31(Vec4::new(2.0 * x / d, 2.0 * y / d, (1.0 + r2) / d, 0.0)))
        }),
        Arc::new(|x, y| {
            let d = 1.0 - x * x - y * y;
            Ok(4.0 / (d * d))
        }),
    )
    .with_length_scale(|x, y| Ok([1.0 - x * x - y * y; 2]))
}

/// `ψ_t(x, y) = (sinh a, sinh b, cosh a, cosh b) / √2` with
/// `a = (x + y) cos(t/2) + (x − y) sin(t/2)`,
/// `b = (y − x) cos(t/2) + (x + y) sin(t/2)`.
pub fn cylinder_point(t: f64, x: f64, y: f64) -> Vec4 {
    let (s, c) = (0.5 * t).sin_cos();
    let a = (x + y) * c + (x - y) * s;
    let b = (y - x) * c + (x + y) * s;
    Vec4::new(a.sinh(), b.sinh(), a.cosh(), b.cosh()) * std::f64::consts::FRAC_1_SQRT_2
}

/// The flat hyperbolic cylinder `ψ_t`, with Hopf constant `(i/2) e^{it}`.
pub fn hyperbolic_cylinder(t: f64) -> SurfaceChart {
    SurfaceChart::new(
        format!("cylinder(t={t})"),
        Ambient::H31,
        whole_plane(),
        square(1.0),
        Complex64::new(0.0, 0.5) * Complex64::from_polar(1.0, t),
        Arc::new(move |x, y| Ok(Point::h31(cylinder_point(t, x, y)))),
        Arc::new(|_, _| Ok(1.0)),
    )
}

/// Memoised `G(x)` for one solution, measured from the solution's base point.
struct GTable {
    sol: SinhGordonSolution,
    base: f64,
    memo: Mutex<HashMap<u64, f64>>,
}

impl GTable {
    fn new(sol: SinhGordonSolution) -> Result<Self> {
        Ok(GTable {
            sol,
            base: sol.g_base_point()?,
            memo: Mutex::new(HashMap::new()),
        })
    }

    fn get(&self, x: f64) -> Result<f64> {
        let key = x.to_bits();
        if let Some(&g) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(g);
        }
        let g = self.sol.g_integral_smooth(x, self.base)?;
        self.memo.lock().expect("memo lock").insert(key, g);
        Ok(g)
    }
}

fn surface_domain(sol: &SinhGordonSolution) -> Result<(Rect, Rect)> {
    let xi = sol.surface_interval()?;
    let base = sol.g_base_point()?;
    let domain = Rect::new(xi, Interval::REAL_LINE);
    let wx = xi.inner(1.0, base, 2.0);
    let window = Rect::new(wx, Interval::new(-1.0, 1.0));
    Ok((domain, window))
}

/// Along `x`, a smooth version of `min(1, k·d)` with `d` the distance to a
/// finite end of the chart's interval: `k = 2` at ends where `v` blows up,
/// `k = 4` at ends of `I'` where only `2E + e^{2v}` vanishes. Along `y`, the
/// period scale `1/√(2|E|)`.
fn family_length_scale(sol: SinhGordonSolution) -> Result<impl Fn(f64, f64) -> Result<[f64; 2]> + Send + Sync> {
    let xi = sol.surface_interval()?;
    let full = sol.interval();
    let k = |end: f64, blow_up: f64| if end == blow_up { 2.0 } else { 4.0 };
    let (klo, khi) = (k(xi.lo, full.lo), k(xi.hi, full.hi));
    let ly = (2.0 * sol.energy().abs()).sqrt().recip().min(1.0);
    Ok(move |x: f64, _| {
        let inv = |k: f64, d: f64| if d.is_finite() { 1.0 / (k * d) } else { 0.0 };
        Ok([1.0 / (1.0 + inv(klo, x - xi.lo) + inv(khi, xi.hi - x)), ly])
    })
}

fn energy_label(prefix: &str, sol: &SinhGordonSolution) -> String {
    let neg = if sol.is_negated() { ",negated" } else { "" };
    format!("{prefix}(E={},v0={}{neg})", sol.energy(), sol.v0())
}

/// The maximal immersion `φ_E` into `H³₁`, conformal with factor `e^{2v}`
/// and Hopf constant `½`. With `s = √(2|E|)` and `r = √|2E + e^{2v}|`:
///
/// ```text
/// E > 0:  (e^v cos sy, −e^v sin sy, −r cos sG, −r sin sG) / s
/// E < 0:  (r sinh sG, −e^v sinh sy, e^v cosh sy, r cosh sG) / s
/// ```
pub fn maximal_phi_e(sol: SinhGordonSolution) -> Result<SurfaceChart> {
    let (domain, window) = surface_domain(&sol)?;
    let table = Arc::new(GTable::new(sol)?);
    let e = sol.energy();
    let s = (2.0 * e.abs()).sqrt();
    let eval = move |x: f64, y: f64| -> Result<Point> {
        let v = table.sol.eval_v(x)?;
        let g = table.get(x)?;
        let ev = v.exp();
        let r = table.sol.g_denominator(x)?.abs().sqrt();
        let p = if e > 0.0 {
            let (sy, cy) = (s * y).sin_cos();
            let (sg, cg) = (s * g).sin_cos();
            Vec4::new(ev * cy, -ev * sy, -r * cg, -r * sg)
        } else {
            let (sy, cy) = ((s * y).sinh(), (s * y).cosh());
            let (sg, cg) = ((s * g).sinh(), (s * g).cosh());
            Vec4::new(r * sg, -ev * sy, ev * cy, r * cg)
        };
        Ok(Point::h31(p * (1.0 / s)))
    };
    Ok(SurfaceChart::new(
        energy_label("ads-max", &sol),
        Ambient::H31,
        domain,
        window,
        Complex64::new(0.5, 0.0),
        Arc::new(eval),
        Arc::new(move |x, _| Ok((2.0 * sol.eval_v(x)?).exp())),
    )
    .with_length_scale(family_length_scale(sol)?))
}

/// The minimal immersion `Φ_E` into `H² × ℝ`, conformal with factor
/// `4 cosh² v`. With `a = s(y − G)`, the `H²` factor is
///
/// ```text
/// E > 0:  (v', (s e^{−v} cos a − v' e^v sin a)/r, (s e^{−v} sin a + v' e^v cos a)/r) / s
/// E < 0:  ((s e^{−v} cosh a − v' e^v sinh a)/r, v', (−s e^{−v} sinh a + v' e^v cosh a)/r) / s
/// ```
///
/// and the `ℝ` factor is `√2 (y − x)`.
pub fn minimal_phi_e(sol: SinhGordonSolution) -> Result<SurfaceChart> {
    let (domain, window) = surface_domain(&sol)?;
    let table = Arc::new(GTable::new(sol)?);
    let e = sol.energy();
    let s = (2.0 * e.abs()).sqrt();
    let eval = move |x: f64, y: f64| -> Result<Point> {
        let (v, vp) = table.sol.eval(x)?;
        let g = table.get(x)?;
        let (ev, emv) = (v.exp(), (-v).exp());
        let a = s * (y - g);
        let r = table.sol.g_denominator(x)?.abs().sqrt();
        let p = if e > 0.0 {
            let (sa, ca) = a.sin_cos();
            Vec3::new(vp, (s * emv * ca - vp * ev * sa) / r, (s * emv * sa + vp * ev * ca) / r)
        } else {
            let (sa, ca) = (a.sinh(), a.cosh());
            Vec3::new(
                (s * emv * ca - vp * ev * sa) / r,
                vp,
                (-s * emv * sa + vp * ev * ca) / r,
            )
        };
        let p = Vec3(p.0.map(|c| c / s));
        Ok(Point::h2xr(PointH2xR { p, t: SQRT_2 * (y - x) }))
    };
    Ok(SurfaceChart::new(
        energy_label("h2xr-min", &sol),
        Ambient::H2xR,
        domain,
        window,
        Complex64::new(0.0, -1.0),
        Arc::new(eval),
        Arc::new(move |x, _| {
            let c = sol.eval_v(x)?.cosh();
            Ok(4.0 * c * c)
        }),
    )
    .with_length_scale(family_length_scale(sol)?))
}

/// The vertical plane `(γ(u), v)` over the geodesic `γ(u) = (cosh u, sinh u, 0)`.
pub fn geodesic_plane() -> SurfaceChart {
    SurfaceChart::new(
        "geodesic",
        Ambient::H2xR,
        whole_plane(),
        square(1.0),
        Complex64::new(0.25, 0.0),
        Arc::new(|x, y| {
            Ok(Point::h2xr(PointH2xR {
                p: Vec3::new(x.cosh(), x.sinh(), 0.0),
                t: y,
            }))
        }),
        Arc::new(|_, _| Ok(1.0)),
    )
}

fn tangent_vec4(c: &[f64; 6]) -> Vec4 {
    Vec4([c[0], c[1], c[2], c[3]])
}

/// Timelike unit normal `N` of a spacelike surface in `H³₁`, orthogonal to
/// `φ`, `φ_x`, `φ_y` and with `det(φ_x, φ_y, φ, N) > 0`.
pub fn unit_normal(c: &SurfaceChart, x: f64, y: f64) -> Result<Vec4> {
    unit_normal_with(c, x, y, &FdSteps::default())
}

pub fn unit_normal_with(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<Vec4> {
    if c.ambient() != Ambient::H31 {
        return Err(Error::NotApplicable(format!("unit normal of a {} chart", c.ambient())));
    }
    let (p, px, py) = diffgeo::first_partials(c, x, y, steps)?;
    normal_from_frame(tangent_vec4(&p.c), tangent_vec4(&px), tangent_vec4(&py), x, y)
}

pub(crate) fn normal_from_frame(p: Vec4, px: Vec4, py: Vec4, x: f64, y: f64) -> Result<Vec4> {
    diffgeo::check_tangent_gram(inner4(px, px), inner4(px, py), inner4(py, py), x, y)?;
    let rows = [px, py, p].map(|v| Vec4(std::array::from_fn(|i| ETA4[i] * v.0[i])));
    let n = Vec4(diffgeo::null_vector(rows.map(|r| r.0)));
    let nn = n.norm_sq();
    if !(nn < 0.0) {
        return Err(Error::DegenerateTangent { x, y });
    }
    let n = n * (1.0 / (-nn).sqrt());
    if crate::lorentz::det4([px, py, p, n]) < 0.0 {
        Ok(-n)
    } else {
        Ok(n)
    }
}

/// Values of the Gauss map in `H²₊ × H²₋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussPair {
    pub plus: Vec3,
    pub minus: Vec3,
}

/// `ν± = (e₁∧e₂ ± N∧φ)/√2` in the coordinates of the canonical frames
/// `E±_j`, moved to the upper sheet of `H²` when needed.
pub fn gauss_map(c: &SurfaceChart, x: f64, y: f64) -> Result<GaussPair> {
    gauss_map_with(c, x, y, &FdSteps::inner())
}

pub fn gauss_map_with(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<GaussPair> {
    if c.ambient() != Ambient::H31 {
        return Err(Error::NotApplicable(format!("Gauss map of a {} chart", c.ambient())));
    }
    let (p, px, py) = diffgeo::first_partials(c, x, y, steps)?;
    let (p, px, py) = (tangent_vec4(&p.c), tangent_vec4(&px), tangent_vec4(&py));
    let n = normal_from_frame(p, px, py, x, y)?;
    let e1 = px * (1.0 / inner4(px, px).sqrt());
    let e2 = py - e1 * inner4(py, e1);
    let e2 = e2 * (1.0 / inner4(e2, e2).sqrt());
    let b = wedge(e1, e2);
    let nb = wedge(n, p);
    let to_h2 = |side: Side| -> Result<Vec3> {
        let a = project((b + nb * side.sign()) * std::f64::consts::FRAC_1_SQRT_2, side);
        let q = lambda_pm_coords(a, side)?;
        Ok(if q.0[0] < 0.0 { -q } else { q })
    };
    Ok(GaussPair {
        plus: to_h2(Side::Plus)?,
        minus: to_h2(Side::Minus)?,
    })
}

/// Tolerance for comparing declared Hopf constants.
pub const HOPF_MATCH_TOL: f64 = 1e-8;

fn sigma_sq_times_factor(hopf: Complex64, f: f64) -> f64 {
    // |σ|² g = 8|θ|²/f for a maximal conformal immersion with factor f
    8.0 * hopf.norm_sqr() / f
}

/// `(ν⁺_a, ν⁻_b)` into `H² × H²`, for charts sharing a Hopf constant.
///
/// The declared conformal factor is `½[(2 + |σ_a|²) f_a + (2 + |σ_b|²) f_b]`.
pub fn pair_gauss_map(a: &SurfaceChart, b: &SurfaceChart) -> Result<SurfaceChart> {
    if a.ambient() != Ambient::H31 || b.ambient() != Ambient::H31 {
        return Err(Error::NotApplicable("pair Gauss map needs two H31 charts".into()));
    }
    let (ha, hb) = (a.declared_hopf(), b.declared_hopf());
    if (ha - hb).norm() > HOPF_MATCH_TOL {
        return Err(Error::HopfMismatch(format!("{ha} vs {hb}")));
    }
    let clip = |p: Interval, q: Interval| Interval::new(p.lo.max(q.lo), p.hi.min(q.hi));
    let domain = Rect::new(clip(a.domain().x, b.domain().x), clip(a.domain().y, b.domain().y));
    let window = Rect::new(clip(a.window().x, b.window().x), clip(a.window().y, b.window().y));
    let (ca, cb) = (a.clone(), b.clone());
    let (fa_chart, fb_chart) = (a.clone(), b.clone());
    Ok(SurfaceChart::new(
        format!("pair[{}, {}]", a.label(), b.label()),
        Ambient::H2xH2,
        domain,
        window,
        ha,
        Arc::new(move |x, y| {
            let plus = gauss_map(&ca, x, y)?.plus;
            let minus = gauss_map(&cb, x, y)?.minus;
            Ok(Point::h2xh2(plus, minus))
        }),
        Arc::new(move |x, y| {
            let fa = fa_chart.declared_conformal_factor(x, y)?;
            let fb = fb_chart.declared_conformal_factor(x, y)?;
            Ok(0.5 * (2.0 * fa + sigma_sq_times_factor(ha, fa) + 2.0 * fb + sigma_sq_times_factor(hb, fb)))
        }),
    )
    .with_scale_of(a, b))
}

/// Cylinder phase `t` with `(i/2) e^{it} = θ`; requires `|θ| = ½`.
pub fn matching_cylinder_phase(theta: Complex64) -> Result<f64> {
    if (theta.norm() - 0.5).abs() > HOPF_MATCH_TOL {
        return Err(Error::HopfMismatch(format!(
            "|θ| = {} has no matching hyperbolic cylinder",
            theta.norm()
        )));
    }
    Ok((theta * Complex64::new(0.0, -2.0)).arg())
}

/// `(ν⁺_φ, 2 Im(z e^{it/2}))` into `H² × ℝ`, pairing `φ` with the cylinder
/// of the same Hopf constant. Only `θ = ½` (so `t = −π/2`) is accepted.
pub fn modified_gauss_map(c: &SurfaceChart) -> Result<SurfaceChart> {
    if c.ambient() != Ambient::H31 {
        return Err(Error::NotApplicable("modified Gauss map needs an H31 chart".into()));
    }
    let theta = c.declared_hopf();
    if (theta - Complex64::new(0.5, 0.0)).norm() > HOPF_MATCH_TOL {
        return Err(Error::HopfMismatch(format!("expected 1/2, chart declares {theta}")));
    }
    let t = matching_cylinder_phase(theta)?;
    debug_assert!((t + FRAC_PI_2).abs() < 1e-12);
    let rot = Complex64::from_polar(1.0, 0.5 * t);
    let (ce, cf) = (c.clone(), c.clone());
    let h2 = theta.norm_sqr();
    Ok(SurfaceChart::new(
        format!("modified[{}]", c.label()),
        Ambient::H2xR,
        c.domain(),
        c.window(),
        Complex64::new(0.0, -1.0),
        Arc::new(move |x, y| {
            let plus = gauss_map(&ce, x, y)?.plus;
            let height = 2.0 * (Complex64::new(x, y) * rot).im;
            Ok(Point::h2xr(PointH2xR { p: plus, t: height }))
        }),
        Arc::new(move |x, y| {
            let f = cf.declared_conformal_factor(x, y)?;
            Ok(f + 4.0 * h2 / f + 2.0)
        }),
    )
    .with_scale_of(c, c))
}

/// The one-parameter isometry groups leaving the `E`-families invariant.
///
/// On `H³₁` a rotation of `(x₁, x₂)` (`E > 0`) or a boost of `(x₂, x₃)`
/// (`E < 0`); this moves `φ_E(x, y)` to `φ_E(x, y − θ/√(2|E|))`. On `H² × ℝ`
/// a rotation of `(p₂, p₃)` or a boost of `(p₁, p₃)` combined with the
/// vertical translation `t ↦ t ± θ/√|E|` (sign of `E`); this moves
/// `Φ_E(x, y)` to `Φ_E(x, y ± θ/√(2|E|))`.
pub fn screw_action(energy: f64, theta: f64, p: &Point) -> Result<Point> {
    if energy == 0.0 {
        return Err(Error::Unsupported("no screw motion for E = 0".into()));
    }
    let mut c = p.c;
    match p.ambient {
        Ambient::H31 => {
            if energy > 0.0 {
                let (s, co) = theta.sin_cos();
                c[0] = co * p.c[0] - s * p.c[1];
                c[1] = s * p.c[0] + co * p.c[1];
            } else {
                let (s, co) = (theta.sinh(), theta.cosh());
                c[1] = co * p.c[1] + s * p.c[2];
                c[2] = s * p.c[1] + co * p.c[2];
            }
        }
        Ambient::H2xR => {
            let shift = theta / energy.abs().sqrt();
            if energy > 0.0 {
                let (s, co) = theta.sin_cos();
                c[1] = co * p.c[1] - s * p.c[2];
                c[2] = s * p.c[1] + co * p.c[2];
                c[3] = p.c[3] + shift;
            } else {
                let (s, co) = (theta.sinh(), theta.cosh());
                c[0] = co * p.c[0] + s * p.c[2];
                c[2] = s * p.c[0] + co * p.c[2];
                c[3] = p.c[3] - shift;
            }
        }
        Ambient::H2xH2 => {
            return Err(Error::NotApplicable("screw action on H2xH2".into()));
        }
    }
    Ok(Point { c, ..*p })
}

/// The `H²` Minkowski product, exposed for product-factor computations.
pub fn h2_inner(a: &[f64], b: &[f64]) -> f64 {
    (0..3).map(|i| ETA3[i] * a[i] * b[i]).sum()
}
