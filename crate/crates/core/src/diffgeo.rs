//! Finite-difference differential geometry of [`SurfaceChart`]s and the
//! verification suite that scores each chart against its declared data.
//!
//! Steps are relative: a base step `h` becomes `h · fd_scale · ℓ · √(1 + x²)`
//! at the coordinate `x`, where `ℓ` is the chart's local length scale.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersions::{h2_inner, normal_from_frame, Ambient, Point, SurfaceChart};
use crate::lorentz::Vec4;
use crate::quadrature::{integrate, QuadOptions};

/// Finite-difference step configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    /// First derivatives.
    pub h1: f64,
    /// Second derivatives.
    pub h2: f64,
    /// Grid spacing of the Laplacian used for the intrinsic curvature.
    pub hk: f64,
    /// Accuracy order of the central stencils: 2, 4 or 6.
    pub order: u32,
}

impl Default for FdSteps {
    fn default() -> Self {
        FdSteps {
            h1: 1e-2,
            h2: 3e-2,
            hk: 3e-2,
            order: 6,
        }
    }
}

impl FdSteps {
    /// Steps used when a chart's values are themselves built from first
    /// derivatives (Gauss maps).
    pub fn inner() -> Self {
        FdSteps::default()
    }

    /// Three-point stencils with `h1 = h`, `h2 = 10h`; the truncation error
    /// is `O(h²)`, which makes step-halving studies meaningful.
    pub fn second_order(h: f64) -> Self {
        FdSteps {
            h1: h,
            h2: 10.0 * h,
            hk: 3e-2,
            order: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, h) in [("h1", self.h1), ("h2", self.h2), ("hk", self.hk)] {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::domain(format!("step {name} = {h} must lie in ]0, 1[")));
            }
        }
        if !matches!(self.order, 2 | 4 | 6) {
            return Err(Error::domain(format!("stencil order {} is not 2, 4 or 6", self.order)));
        }
        Ok(())
    }
}

type C6 = [f64; 6];

fn lin(terms: &[(f64, &C6)]) -> C6 {
    let mut out = [0.0; 6];
    for (w, v) in terms {
        for i in 0..6 {
            out[i] += w * v[i];
        }
    }
    out
}

fn step_for(c: &SurfaceChart, base: f64, scale: f64, coord: f64) -> f64 {
    base * c.fd_scale() * scale * coord.hypot(1.0)
}

fn eval_stencil(c: &SurfaceChart, x: f64, y: f64, pts: &[(f64, f64)]) -> Result<Vec<C6>> {
    let dom = c.domain();
    if pts.iter().any(|&(u, v)| !dom.contains(x + u, y + v)) {
        return Err(Error::StencilOutOfDomain { x, y });
    }
    pts.iter().map(|&(u, v)| Ok(c.eval(x + u, y + v)?.c)).collect()
}

/// Central first-derivative weights `(offset, weight)`, centre omitted.
fn d1_weights(order: u32) -> &'static [(f64, f64)] {
    match order {
        2 => &[(1.0, 0.5), (-1.0, -0.5)],
        6 => &[
            (3.0, 1.0 / 60.0),
            (2.0, -9.0 / 60.0),
            (1.0, 45.0 / 60.0),
            (-1.0, -45.0 / 60.0),
            (-2.0, 9.0 / 60.0),
            (-3.0, -1.0 / 60.0),
        ],
        _ => &[
            (2.0, -1.0 / 12.0),
            (1.0, 8.0 / 12.0),
            (-1.0, -8.0 / 12.0),
            (-2.0, 1.0 / 12.0),
        ],
    }
}

/// Central second-derivative weights; the centre weight comes first.
fn d2_weights(order: u32) -> &'static [(f64, f64)] {
    match order {
        2 => &[(0.0, -2.0), (1.0, 1.0), (-1.0, 1.0)],
        6 => &[
            (0.0, -490.0 / 180.0),
            (3.0, 2.0 / 180.0),
            (2.0, -27.0 / 180.0),
            (1.0, 270.0 / 180.0),
            (-1.0, 270.0 / 180.0),
            (-2.0, -27.0 / 180.0),
            (-3.0, 2.0 / 180.0),
        ],
        _ => &[
            (0.0, -30.0 / 12.0),
            (2.0, -1.0 / 12.0),
            (1.0, 16.0 / 12.0),
            (-1.0, 16.0 / 12.0),
            (-2.0, -1.0 / 12.0),
        ],
    }
}

fn steps_at(c: &SurfaceChart, x: f64, y: f64, base: f64) -> Result<(f64, f64)> {
    let l = c.length_scale(x, y)?;
    Ok((step_for(c, base, l[0], x), step_for(c, base, l[1], y)))
}

/// `(φ, φ_x, φ_y)` by central differences.
pub fn first_partials(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<(Point, C6, C6)> {
    let p = c.eval(x, y)?;
    let (hx, hy) = steps_at(c, x, y, steps.h1)?;
    let w = d1_weights(steps.order);
    let mut pts: Vec<(f64, f64)> = w.iter().map(|&(k, _)| (k * hx, 0.0)).collect();
    pts.extend(w.iter().map(|&(k, _)| (0.0, k * hy)));
    let f = eval_stencil(c, x, y, &pts)?;
    let n = w.len();
    let d = |vals: &[C6], h: f64| {
        let terms: Vec<(f64, &C6)> = w.iter().zip(vals).map(|(&(_, wk), v)| (wk / h, v)).collect();
        lin(&terms)
    };
    Ok((p, d(&f[..n], hx), d(&f[n..], hy)))
}

/// Position with first and second partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub p: Point,
    pub px: C6,
    pub py: C6,
    pub pxx: C6,
    pub pxy: C6,
    pub pyy: C6,
}

pub fn jet(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<Jet> {
    let (p, px, py) = first_partials(c, x, y, steps)?;
    let (hx, hy) = steps_at(c, x, y, steps.h2)?;
    let c0 = p.c;
    let w2 = &d2_weights(steps.order)[1..];
    let w1 = d1_weights(steps.order);
    let mut pts: Vec<(f64, f64)> = w2.iter().map(|&(k, _)| (k * hx, 0.0)).collect();
    pts.extend(w2.iter().map(|&(k, _)| (0.0, k * hy)));
    for &(a, _) in w1 {
        for &(b, _) in w1 {
            pts.push((a * hx, b * hy));
        }
    }
    let f = eval_stencil(c, x, y, &pts)?;
    let n = w2.len();
    let centre = d2_weights(steps.order)[0].1;
    let d2 = |vals: &[C6], h: f64| {
        let h2 = h * h;
        let mut terms: Vec<(f64, &C6)> = vec![(centre / h2, &c0)];
        terms.extend(w2.iter().zip(vals).map(|(&(_, wk), v)| (wk / h2, v)));
        lin(&terms)
    };
    let mixed: Vec<(f64, &C6)> = w1
        .iter()
        .flat_map(|&(_, wa)| w1.iter().map(move |&(_, wb)| wa * wb / (hx * hy)))
        .zip(&f[2 * n..])
        .collect();
    Ok(Jet {
        p,
        px,
        py,
        pxx: d2(&f[..n], hx),
        pxy: lin(&mixed),
        pyy: d2(&f[n..2 * n], hy),
    })
}

/// Null vector of a 3×4 matrix by signed 3×3 minors.
pub(crate) fn null_vector(rows: [[f64; 4]; 3]) -> [f64; 4] {
    std::array::from_fn(|k| {
        let minor: [[f64; 3]; 3] = std::array::from_fn(|r| {
            let mut out = [0.0; 3];
            let mut j = 0;
            for (col, &v) in rows[r].iter().enumerate() {
                if col != k {
                    out[j] = v;
                    j += 1;
                }
            }
            out
        });
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        s * crate::lorentz::det3(minor)
    })
}

/// Fails unless the tangent Gram matrix is positive definite and
/// reasonably conditioned.
pub(crate) fn check_tangent_gram(gxx: f64, gxy: f64, gyy: f64, x: f64, y: f64) -> Result<()> {
    let tr = gxx + gyy;
    let det = gxx * gyy - gxy * gxy;
    let disc = (0.25 * (gxx - gyy).powi(2) + gxy * gxy).sqrt();
    let (l1, l2) = (0.5 * tr + disc, 0.5 * tr - disc);
    if !(det > 0.0 && gxx > 0.0 && l2 > 0.0 && l1 / l2 < 1e12) {
        return Err(Error::DegenerateTangent { x, y });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstForm {
    pub gxx: f64,
    pub gxy: f64,
    pub gyy: f64,
}

impl FirstForm {
    pub fn det(&self) -> f64 {
        self.gxx * self.gyy - self.gxy * self.gxy
    }

    /// `max(|gxx − gyy|, |gxy|) / gxx`.
    pub fn conformality_defect(&self) -> f64 {
        (self.gxx - self.gyy).abs().max(self.gxy.abs()) / self.gxx.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondForm {
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

fn form_from(ambient: Ambient, px: &C6, py: &C6) -> FirstForm {
    FirstForm {
        gxx: ambient.inner(px, px),
        gxy: ambient.inner(px, py),
        gyy: ambient.inner(py, py),
    }
}

pub fn first_fundamental_form(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<FirstForm> {
    let (_, px, py) = first_partials(c, x, y, steps)?;
    Ok(form_from(c.ambient(), &px, &py))
}

/// Unit normal of the surface inside the ambient manifold, as ambient
/// coordinates. Defined for `H31` (timelike) and `H2xR` (spacelike).
fn surface_normal(ambient: Ambient, j: &Jet, x: f64, y: f64) -> Result<C6> {
    let v4 = |c: &C6| Vec4([c[0], c[1], c[2], c[3]]);
    match ambient {
        Ambient::H31 => {
            let n = normal_from_frame(v4(&j.p.c), v4(&j.px), v4(&j.py), x, y)?;
            Ok([n.0[0], n.0[1], n.0[2], n.0[3], 0.0, 0.0])
        }
        Ambient::H2xR => {
            let g = form_from(ambient, &j.px, &j.py);
            check_tangent_gram(g.gxx, g.gxy, g.gyy, x, y)?;
            let metric = ambient.metric();
            let pos = [j.p.c[0], j.p.c[1], j.p.c[2], 0.0];
            let rows = [j.px, j.py, [pos[0], pos[1], pos[2], pos[3], 0.0, 0.0]]
                .map(|r| std::array::from_fn::<f64, 4, _>(|i| metric[i] * r[i]));
            let n = null_vector(rows);
            let n6 = [n[0], n[1], n[2], n[3], 0.0, 0.0];
            let nn = ambient.inner(&n6, &n6);
            if !(nn > 0.0) {
                return Err(Error::DegenerateTangent { x, y });
            }
            let s = 1.0 / nn.sqrt();
            let n = n.map(|c| c * s);
            let d = crate::lorentz::det4([
                Vec4([j.px[0], j.px[1], j.px[2], j.px[3]]),
                Vec4([j.py[0], j.py[1], j.py[2], j.py[3]]),
                Vec4(n),
                Vec4(pos),
            ]);
            let sign = if d < 0.0 { -1.0 } else { 1.0 };
            Ok([sign * n[0], sign * n[1], sign * n[2], sign * n[3], 0.0, 0.0])
        }
        Ambient::H2xH2 => Err(Error::NotApplicable(
            "codimension-two surfaces have no unit normal".into(),
        )),
    }
}

/// Curvature data at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curvatures {
    pub first: FirstForm,
    pub second: SecondForm,
    pub mean: f64,
    pub sigma_sq: f64,
    pub principal: (f64, f64),
    pub normal: C6,
}

pub fn curvatures(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<Curvatures> {
    let amb = c.ambient();
    let j = jet(c, x, y, steps)?;
    let n = surface_normal(amb, &j, x, y)?;
    let g = form_from(amb, &j.px, &j.py);
    let h = SecondForm {
        hxx: amb.inner(&j.pxx, &n),
        hxy: amb.inner(&j.pxy, &n),
        hyy: amb.inner(&j.pyy, &n),
    };
    let det = g.det();
    let mean = (g.gyy * h.hxx - 2.0 * g.gxy * h.hxy + g.gxx * h.hyy) / (2.0 * det);
    // shape operator S = g⁻¹ h
    let s11 = (g.gyy * h.hxx - g.gxy * h.hxy) / det;
    let s12 = (g.gyy * h.hxy - g.gxy * h.hyy) / det;
    let s21 = (g.gxx * h.hxy - g.gxy * h.hxx) / det;
    let s22 = (g.gxx * h.hyy - g.gxy * h.hxy) / det;
    let sigma_sq = s11 * s11 + 2.0 * s12 * s21 + s22 * s22;
    let half_tr = 0.5 * (s11 + s22);
    let disc = (half_tr * half_tr - (s11 * s22 - s12 * s21)).max(0.0).sqrt();
    Ok(Curvatures {
        first: g,
        second: h,
        mean,
        sigma_sq,
        principal: (half_tr + disc, half_tr - disc),
        normal: n,
    })
}

pub fn second_fundamental_form(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<SecondForm> {
    Ok(curvatures(c, x, y, steps)?.second)
}

/// Mean curvature of a chart in `H³₁` or `H² × ℝ`.
pub fn mean_curvature(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<f64> {
    Ok(curvatures(c, x, y, steps)?.mean)
}

/// Mean curvature in `H² × ℝ`; the normal is taken inside `T(H² × ℝ)`, so
/// the component of `∂²Φ` along the `H²` position drops out.
pub fn mean_curvature_h2xr(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<f64> {
    if c.ambient() != Ambient::H2xR {
        return Err(Error::NotApplicable(format!("chart lives in {}", c.ambient())));
    }
    mean_curvature(c, x, y, steps)
}

/// The Hopf differential coefficient `θ(z)`.
///
/// In `H³₁` this is `⟨φ_z, N_z⟩ = −⟨φ_zz, N⟩`. In `H² × ℝ` it is the Hopf
/// differential `⟨q_z, q_z⟩` of the harmonic `H²` factor `q`.
pub fn hopf_differential(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<Complex64> {
    match c.ambient() {
        Ambient::H31 => {
            let k = curvatures(c, x, y, steps)?;
            let h = k.second;
            Ok(Complex64::new(-0.25 * (h.hxx - h.hyy), 0.5 * h.hxy))
        }
        Ambient::H2xR => {
            let (_, px, py) = first_partials(c, x, y, steps)?;
            let a = h2_inner(&px[..3], &px[..3]);
            let b = h2_inner(&py[..3], &py[..3]);
            let m = h2_inner(&px[..3], &py[..3]);
            Ok(Complex64::new(0.25 * (a - b), -0.5 * m))
        }
        Ambient::H2xH2 => Err(Error::NotApplicable("Hopf differential in H2xH2".into())),
    }
}

/// Gauss curvature `K = −e^{−2u} Δu` with `u = ½ log g_xx`, for conformal
/// charts. Both `g_xx` and `Δ` use stencils of order at least four, the
/// latter with spacing `hk · ℓ`.
pub fn gauss_curvature(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<f64> {
    let inner = FdSteps {
        order: steps.order.max(4),
        ..*steps
    };
    let amb = c.ambient();
    let u = |a: f64, b: f64| -> Result<f64> {
        let (_, px, _) = first_partials(c, a, b, &inner)?;
        Ok(0.5 * amb.inner(&px, &px).ln())
    };
    // the spacing ignores fd_scale: u is already smoothed by two levels of differencing
    let l = c.length_scale(x, y)?;
    let hx = steps.hk * l[0] * x.hypot(1.0);
    let hy = steps.hk * l[1] * y.hypot(1.0);
    let w = d2_weights(inner.order);
    let u0 = u(x, y)?;
    let d2 = |h: f64, f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        let mut acc = w[0].1 * u0;
        for &(k, wk) in &w[1..] {
            acc += wk * f(k * h)?;
        }
        Ok(acc / (h * h))
    };
    let uxx = d2(hx, &|d| u(x + d, y))?;
    let uyy = d2(hy, &|d| u(x, y + d))?;
    Ok(-(-2.0 * u0).exp() * (uxx + uyy))
}

/// Values of `θ` on a regular grid, row-major with `x` varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn from_fn(nx: usize, ny: usize, b: Bounds, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let dx = (b.x1 - b.x0) / (nx.max(2) - 1) as f64;
        let dy = (b.y1 - b.y0) / (ny.max(2) - 1) as f64;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                values.push(f(b.x0 + i as f64 * dx, b.y0 + j as f64 * dy));
            }
        }
        ComplexGrid { nx, ny, dx, dy, values }
    }
}

/// `max |∂θ/∂x + i ∂θ/∂y| / 2` over interior grid points; zero when the
/// grid has no interior.
pub fn cauchy_riemann_residual(g: &ComplexGrid) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 1..g.ny.saturating_sub(1) {
        for i in 1..g.nx.saturating_sub(1) {
            let at = |a: usize, b: usize| g.values[b * g.nx + a];
            let tx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * g.dx);
            let ty = (at(i, j + 1) - at(i, j - 1)) / (2.0 * g.dy);
            worst = worst.max(0.5 * (tx + Complex64::i() * ty).norm());
        }
    }
    worst
}

/// A point and velocity of a parameter-plane curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSource {
    /// The chart's declared conformal factor.
    Declared,
    /// The finite-difference first fundamental form with default steps.
    FiniteDifference,
}

/// Length of `t ↦ γ(t)`, `t ∈ [t0, t1]`, in the metric induced by `c`.
pub fn curve_length<F>(c: &SurfaceChart, gamma: F, t0: f64, t1: f64, source: MetricSource) -> Result<f64>
where
    F: Fn(f64) -> CurveSample,
{
    let steps = FdSteps::default();
    let speed = |t: f64| -> Result<f64> {
        let s = gamma(t);
        let q = match source {
            MetricSource::Declared => c.declared_conformal_factor(s.x, s.y)? * (s.dx * s.dx + s.dy * s.dy),
            MetricSource::FiniteDifference => {
                let g = first_fundamental_form(c, s.x, s.y, &steps)?;
                g.gxx * s.dx * s.dx + 2.0 * g.gxy * s.dx * s.dy + g.gyy * s.dy * s.dy
            }
        };
        Ok(q.max(0.0).sqrt())
    };
    // finite-difference speeds carry ~1e-11 noise
    let rel_tol = match source {
        MetricSource::Declared => 1e-12,
        MetricSource::FiniteDifference => 1e-9,
    };
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol,
        max_intervals: 4000,
    };
    let r = integrate(|t| speed(t).unwrap_or(f64::NAN), t0, t1, opts)?;
    Ok(r.value)
}

/// A finite parameter rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bounds {
    pub fn is_valid(&self) -> bool {
        [self.x0, self.x1, self.y0, self.y1].iter().all(|v| v.is_finite()) && self.x0 < self.x1 && self.y0 < self.y1
    }
}

/// Grid resolution with optional explicit bounds; without bounds the inner
/// 90% of the chart's window is used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub bounds: Option<Bounds>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 61,
            ny: 61,
            bounds: None,
        }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize) -> Self {
        GridSpec { nx, ny, bounds: None }
    }

    pub fn with_bounds(mut self, b: Bounds) -> Self {
        self.bounds = Some(b);
        self
    }

    pub fn resolve(&self, c: &SurfaceChart) -> Result<Bounds> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::EmptyGrid);
        }
        let b = match self.bounds {
            Some(b) => b,
            None => {
                let w = c.window();
                let xi = w.x.inner(0.9, 0.0, 1.0);
                let yi = w.y.inner(0.9, 0.0, 1.0);
                Bounds {
                    x0: xi.lo,
                    x1: xi.hi,
                    y0: yi.lo,
                    y1: yi.hi,
                }
            }
        };
        if !b.is_valid() {
            return Err(Error::domain(format!("invalid grid bounds {b:?}")));
        }
        Ok(b)
    }

    /// Grid points in row-major order (`x` fastest).
    pub fn points(&self, b: &Bounds) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            let y = b.y0 + (b.y1 - b.y0) * j as f64 / (self.ny - 1) as f64;
            for i in 0..self.nx {
                let x = b.x0 + (b.x1 - b.x0) * i as f64 / (self.nx - 1) as f64;
                out.push((x, y));
            }
        }
        out
    }
}

/// Pass thresholds of the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub on_manifold: f64,
    pub conformality: f64,
    pub conformal_factor: f64,
    pub mean_curvature: f64,
    pub hopf: f64,
    pub cauchy_riemann: f64,
    pub normal: f64,
    pub gauss_equation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            on_manifold: 1e-10,
            conformality: 1e-6,
            conformal_factor: 1e-6,
            mean_curvature: 1e-5,
            hopf: 1e-6,
            cauchy_riemann: 1e-5,
            normal: 1e-9,
            gauss_equation: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub max_residual: f64,
    /// `None` for report-only quantities.
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl CheckResult {
    fn new(max_residual: f64, tolerance: Option<f64>) -> Self {
        let r = if max_residual.is_finite() {
            max_residual
        } else {
            f64::MAX
        };
        CheckResult {
            max_residual: r,
            tolerance,
            pass: tolerance.is_none_or(|t| r <= t),
        }
    }
}

pub const REPORT_VERSION: u32 = 1;

/// Summary of one chart's verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub chart: String,
    pub ambient: Ambient,
    pub nx: usize,
    pub ny: usize,
    pub bounds: Bounds,
    pub steps: FdSteps,
    pub checks: BTreeMap<String, CheckResult>,
    pub notes: Vec<String>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("bad number {s:?}: {e}"),
    })
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: VerificationReport = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        r.validated(0)
    }

    fn validated(self, line: usize) -> Result<Self> {
        if self.version != REPORT_VERSION {
            return Err(Error::Parse {
                line,
                message: format!("unsupported report version {}", self.version),
            });
        }
        if self.checks.values().any(|c| !c.max_residual.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "non-finite residual".into(),
            });
        }
        Ok(self)
    }

    /// One `key: value` line per field; checks read
    /// `check <name>: residual=<r> tolerance=<t|none> status=<pass|fail>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let b = &self.bounds;
        let _ = writeln!(s, "version: {}", self.version);
        let _ = writeln!(s, "chart: {}", self.chart);
        let _ = writeln!(s, "ambient: {}", self.ambient);
        let _ = writeln!(s, "grid: {}x{}", self.nx, self.ny);
        let _ = writeln!(
            s,
            "bounds: {}:{}:{}:{}",
            fmt_f64(b.x0),
            fmt_f64(b.x1),
            fmt_f64(b.y0),
            fmt_f64(b.y1)
        );
        let st = &self.steps;
        let _ = writeln!(
            s,
            "steps: h1={} h2={} hk={} order={}",
            fmt_f64(st.h1),
            fmt_f64(st.h2),
            fmt_f64(st.hk),
            st.order
        );
        for (name, c) in &self.checks {
            let tol = c.tolerance.map_or("none".to_string(), fmt_f64);
            let status = if c.pass { "pass" } else { "fail" };
            let _ = writeln!(
                s,
                "check {name}: residual={} tolerance={tol} status={status}",
                fmt_f64(c.max_residual)
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "note: {}", n.replace('\n', " "));
        }
        let _ = writeln!(s, "result: {}", if self.passed() { "pass" } else { "fail" });
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut version = None;
        let mut chart = None;
        let mut ambient = None;
        let mut grid = None;
        let mut bounds = None;
        let mut steps = None;
        let mut checks = BTreeMap::new();
        let mut notes = Vec::new();
        let err = |line: usize, message: String| Error::Parse { line, message };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let (key, value) = raw
                .split_once(": ")
                .or_else(|| raw.strip_suffix(':').map(|k| (k, "")))
                .ok_or_else(|| err(line, format!("expected 'key: value', got {raw:?}")))?;
            match key {
                "version" => version = Some(value.trim().parse::<u32>().map_err(|e| err(line, e.to_string()))?),
                "chart" => chart = Some(value.to_string()),
                "ambient" => {
                    ambient = Some(
                        Ambient::parse(value.trim()).ok_or_else(|| err(line, format!("unknown ambient {value:?}")))?,
                    )
                }
                "grid" => {
                    let (a, b) = value
                        .split_once('x')
                        .ok_or_else(|| err(line, format!("bad grid {value:?}")))?;
                    let nx = a.trim().parse::<usize>().map_err(|e| err(line, e.to_string()))?;
                    let ny = b.trim().parse::<usize>().map_err(|e| err(line, e.to_string()))?;
                    grid = Some((nx, ny));
                }
                "bounds" => {
                    let parts: Vec<&str> = value.split(':').collect();
                    if parts.len() != 4 {
                        return Err(err(line, format!("bad bounds {value:?}")));
                    }
                    bounds = Some(Bounds {
                        x0: parse_f64(parts[0], line)?,
                        x1: parse_f64(parts[1], line)?,
                        y0: parse_f64(parts[2], line)?,
                        y1: parse_f64(parts[3], line)?,
                    });
                }
                "steps" => {
                    let mut st = FdSteps::default();
                    for kv in value.split_whitespace() {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| err(line, format!("bad step {kv:?}")))?;
                        match k {
                            "h1" => st.h1 = parse_f64(v, line)?,
                            "h2" => st.h2 = parse_f64(v, line)?,
                            "hk" => st.hk = parse_f64(v, line)?,
                            "order" => st.order = v.parse::<u32>().map_err(|e| err(line, e.to_string()))?,
                            _ => return Err(err(line, format!("unknown step key {k:?}"))),
                        }
                    }
                    steps = Some(st);
                }
                "note" => notes.push(value.to_string()),
                "result" => {}
                k if k.starts_with("check ") => {
                    let name = k["check ".len()..].trim().to_string();
                    if name.is_empty() || checks.contains_key(&name) {
                        return Err(err(line, format!("empty or repeated check {name:?}")));
                    }
                    let mut residual = None;
                    let mut tolerance = None;
                    let mut status = None;
                    for kv in value.split_whitespace() {
                        let (k, v) = kv
                            .split_once('=')
                            .ok_or_else(|| err(line, format!("bad field {kv:?}")))?;
                        match k {
                            "residual" => residual = Some(parse_f64(v, line)?),
                            "tolerance" => tolerance = Some(if v == "none" { None } else { Some(parse_f64(v, line)?) }),
                            "status" => {
                                status = Some(match v {
                                    "pass" => true,
                                    "fail" => false,
                                    _ => return Err(err(line, format!("bad status {v:?}"))),
                                })
                            }
                            _ => return Err(err(line, format!("unknown field {k:?}"))),
                        }
                    }
                    let (Some(max_residual), Some(tolerance), Some(pass)) = (residual, tolerance, status) else {
                        return Err(err(line, "incomplete check line".into()));
                    };
                    checks.insert(
                        name,
                        CheckResult {
                            max_residual,
                            tolerance,
                            pass,
                        },
                    );
                }
                _ => return Err(err(line, format!("unknown key {key:?}"))),
            }
        }
        let missing = |what: &str| err(0, format!("missing {what}"));
        let (nx, ny) = grid.ok_or_else(|| missing("grid"))?;
        VerificationReport {
            version: version.ok_or_else(|| missing("version"))?,
            chart: chart.ok_or_else(|| missing("chart"))?,
            ambient: ambient.ok_or_else(|| missing("ambient"))?,
            nx,
            ny,
            bounds: bounds.ok_or_else(|| missing("bounds"))?,
            steps: steps.ok_or_else(|| missing("steps"))?,
            checks,
            notes,
        }
        .validated(0)
    }
}

/// Check names, in report order.
pub mod checks {
    pub const ON_MANIFOLD: &str = "on_manifold";
    pub const CONFORMALITY: &str = "conformality";
    pub const CONFORMAL_FACTOR: &str = "conformal_factor";
    pub const MEAN_CURVATURE: &str = "mean_curvature";
    pub const HOPF: &str = "hopf";
    pub const CAUCHY_RIEMANN: &str = "cauchy_riemann";
    pub const NORMAL: &str = "normal";
    pub const GAUSS_EQUATION: &str = "gauss_equation";
    pub const GAUSS_CURVATURE: &str = "gauss_curvature";
    pub const EVALUATION: &str = "evaluation";
}

#[derive(Debug, Clone, Copy, Default)]
struct PointDiag {
    on_manifold: f64,
    conformality: f64,
    factor: f64,
    mean: Option<f64>,
    hopf: Option<Complex64>,
    normal: Option<f64>,
}

fn diagnose(c: &SurfaceChart, x: f64, y: f64, steps: &FdSteps) -> Result<PointDiag> {
    let amb = c.ambient();
    let (p, px, py) = first_partials(c, x, y, steps)?;
    let g = form_from(amb, &px, &py);
    let declared = c.declared_conformal_factor(x, y)?;
    let mut d = PointDiag {
        on_manifold: p.quadric_residual(),
        conformality: g.conformality_defect(),
        factor: (0.5 * (g.gxx + g.gyy) - declared).abs() / declared.abs(),
        ..Default::default()
    };
    if amb != Ambient::H2xH2 {
        let k = curvatures(c, x, y, steps)?;
        d.mean = Some(k.mean.abs());
        d.hopf = Some(hopf_differential(c, x, y, steps)?);
        if amb == Ambient::H31 {
            let n = Vec4([k.normal[0], k.normal[1], k.normal[2], k.normal[3]]);
            let v = |a: &C6| Vec4([a[0], a[1], a[2], a[3]]);
            let (pp, ppx, ppy) = (v(&p.c), v(&px), v(&py));
            let ip = crate::lorentz::inner4;
            let r = [
                ip(n, ppx).abs() / g.gxx.sqrt(),
                ip(n, ppy).abs() / g.gyy.sqrt(),
                ip(n, pp).abs() / pp.euclidean_norm().max(1.0),
                (ip(n, n) + 1.0).abs(),
            ];
            d.normal = Some(r.iter().copied().fold(0.0, f64::max));
        }
    }
    Ok(d)
}

/// Stride of the coarse sub-grid on which intrinsic curvature is evaluated.
pub const CURVATURE_STRIDE: usize = 6;

/// Runs every applicable check on one chart.
pub fn verify_chart(
    c: &SurfaceChart,
    grid: &GridSpec,
    tol: &Tolerances,
    steps: &FdSteps,
) -> Result<VerificationReport> {
    steps.validate()?;
    let b = grid.resolve(c)?;
    let pts = grid.points(&b);
    let diags: Vec<Result<PointDiag>> = pts.par_iter().map(|&(x, y)| diagnose(c, x, y, steps)).collect();

    let amb = c.ambient();
    let mut notes = Vec::new();
    let mut failures = 0usize;
    let mut acc = PointDiag::default();
    let mut mean: f64 = 0.0;
    let mut hopf_err: f64 = 0.0;
    let mut normal: f64 = 0.0;
    let mut thetas = Vec::with_capacity(pts.len());
    for (r, &(x, y)) in diags.iter().zip(&pts) {
        match r {
            Ok(d) => {
                acc.on_manifold = acc.on_manifold.max(d.on_manifold);
                acc.conformality = acc.conformality.max(d.conformality);
                acc.factor = acc.factor.max(d.factor);
                if let Some(m) = d.mean {
                    mean = mean.max(m);
                }
                if let Some(h) = d.hopf {
                    hopf_err = hopf_err.max((h - c.declared_hopf()).norm());
                    thetas.push(h);
                }
                if let Some(n) = d.normal {
                    normal = normal.max(n);
                }
            }
            Err(e) => {
                failures += 1;
                if failures <= 3 {
                    notes.push(format!("point ({x:e}, {y:e}): {e}"));
                }
                thetas.push(Complex64::new(f64::NAN, f64::NAN));
            }
        }
    }

    let mut out = BTreeMap::new();
    out.insert(
        checks::EVALUATION.to_string(),
        CheckResult::new(failures as f64, Some(0.0)),
    );
    out.insert(
        checks::ON_MANIFOLD.to_string(),
        CheckResult::new(acc.on_manifold, Some(tol.on_manifold)),
    );
    out.insert(
        checks::CONFORMALITY.to_string(),
        CheckResult::new(acc.conformality, Some(tol.conformality)),
    );
    out.insert(
        checks::CONFORMAL_FACTOR.to_string(),
        CheckResult::new(acc.factor, Some(tol.conformal_factor)),
    );
    if amb != Ambient::H2xH2 {
        out.insert(
            checks::MEAN_CURVATURE.to_string(),
            CheckResult::new(mean, Some(tol.mean_curvature)),
        );
        out.insert(checks::HOPF.to_string(), CheckResult::new(hopf_err, Some(tol.hopf)));
        let cr = if failures == 0 {
            let dx = (b.x1 - b.x0) / (grid.nx - 1) as f64;
            let dy = (b.y1 - b.y0) / (grid.ny - 1) as f64;
            cauchy_riemann_residual(&ComplexGrid {
                nx: grid.nx,
                ny: grid.ny,
                dx,
                dy,
                values: thetas,
            })
        } else {
            f64::MAX
        };
        out.insert(
            checks::CAUCHY_RIEMANN.to_string(),
            CheckResult::new(cr, Some(tol.cauchy_riemann)),
        );

        let pts = &pts;
        let coarse: Vec<(f64, f64)> = (0..grid.ny)
            .step_by(CURVATURE_STRIDE)
            .flat_map(|j| {
                (0..grid.nx)
                    .step_by(CURVATURE_STRIDE)
                    .map(move |i| pts[j * grid.nx + i])
            })
            .collect();
        let ks: Vec<Result<(f64, f64)>> = coarse
            .par_iter()
            .map(|&(x, y)| {
                let k = gauss_curvature(c, x, y, steps)?;
                let s = curvatures(c, x, y, steps)?.sigma_sq;
                Ok((k, s))
            })
            .collect();
        let mut kmax: f64 = 0.0;
        let mut gauss_eq: f64 = 0.0;
        let mut k_failed = 0usize;
        for r in &ks {
            match r {
                Ok((k, s)) => {
                    kmax = kmax.max(k.abs());
                    gauss_eq = gauss_eq.max((k - (-1.0 + 0.5 * s)).abs() / s.max(1.0));
                }
                Err(_) => k_failed += 1,
            }
        }
        if k_failed > 0 {
            notes.push(format!("intrinsic curvature failed at {k_failed} sub-grid points"));
            kmax = f64::MAX;
            gauss_eq = f64::MAX;
        }
        if amb == Ambient::H31 {
            out.insert(checks::NORMAL.to_string(), CheckResult::new(normal, Some(tol.normal)));
            out.insert(
                checks::GAUSS_EQUATION.to_string(),
                CheckResult::new(gauss_eq, Some(tol.gauss_equation)),
            );
        } else {
            out.insert(checks::GAUSS_CURVATURE.to_string(), CheckResult::new(kmax, None));
        }
    }
    if amb == Ambient::H2xR {
        notes.push("hopf: harmonic-map convention <q_z, q_z> of the H2 factor".into());
    }
    Ok(VerificationReport {
        version: REPORT_VERSION,
        chart: c.label().to_string(),
        ambient: amb,
        nx: grid.nx,
        ny: grid.ny,
        bounds: b,
        steps: *steps,
        checks: out,
        notes,
    })
}

/// Runs [`verify_chart`] on every chart, in order.
pub fn run_suite(
    charts: &[SurfaceChart],
    grid: &GridSpec,
    tol: &Tolerances,
    steps: &FdSteps,
) -> Result<Vec<VerificationReport>> {
    charts.iter().map(|c| verify_chart(c, grid, tol, steps)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{b_chart, geodesic_plane, hyperbolic_cylinder};

    #[test]
    fn cylinder_forms() {
        let c = hyperbolic_cylinder(0.4);
        let s = FdSteps::default();
        let g = first_fundamental_form(&c, 0.3, -0.2, &s).unwrap();
        assert!((g.gxx - 1.0).abs() < 1e-9 && g.gxy.abs() < 1e-9 && (g.gyy - 1.0).abs() < 1e-9);
        let k = curvatures(&c, 0.3, -0.2, &s).unwrap();
        assert!((k.sigma_sq - 2.0).abs() < 1e-6);
        assert!((k.principal.0 - 1.0).abs() < 1e-6 && (k.principal.1 + 1.0).abs() < 1e-6);
        assert!(k.mean.abs() < 1e-6);
        let theta = hopf_differential(&c, 0.3, -0.2, &s).unwrap();
        assert!((theta - c.declared_hopf()).norm() < 1e-6, "{theta}");
        assert!(gauss_curvature(&c, 0.3, -0.2, &s).unwrap().abs() < 1e-6);
    }

    #[test]
    fn b_is_totally_geodesic_with_curvature_minus_one() {
        let c = b_chart();
        let s = FdSteps::default();
        let h = second_fundamental_form(&c, 0.2, 0.1, &s).unwrap();
        assert!(h.hxx.abs() < 1e-5 && h.hxy.abs() < 1e-5 && h.hyy.abs() < 1e-5, "{h:?}");
        let k = gauss_curvature(&c, 0.2, 0.1, &s).unwrap();
        assert!((k + 1.0).abs() < 1e-6, "{k}");
    }

    #[test]
    fn geodesic_plane_is_minimal() {
        let c = geodesic_plane();
        let s = FdSteps::default();
        assert!(mean_curvature_h2xr(&c, 0.3, 0.5, &s).unwrap().abs() < 1e-6);
        let theta = hopf_differential(&c, 0.3, 0.5, &s).unwrap();
        assert!((theta - c.declared_hopf()).norm() < 1e-8);
        assert!(matches!(
            mean_curvature_h2xr(&b_chart(), 0.0, 0.0, &s),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn cauchy_riemann_controls() {
        let b = Bounds {
            x0: -1.0,
            x1: 1.0,
            y0: -1.0,
            y1: 1.0,
        };
        let constant = ComplexGrid::from_fn(11, 11, b, |_, _| Complex64::new(0.3, -2.0));
        assert_eq!(cauchy_riemann_residual(&constant), 0.0);
        let z = ComplexGrid::from_fn(11, 11, b, Complex64::new);
        assert!(cauchy_riemann_residual(&z) < 1e-14);
        let zbar = ComplexGrid::from_fn(11, 11, b, |x, y| Complex64::new(x, -y));
        assert!((cauchy_riemann_residual(&zbar) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn straight_segment_length() {
        let c = hyperbolic_cylinder(0.0);
        let l = curve_length(
            &c,
            |t| CurveSample {
                x: t,
                y: 0.5 * t,
                dx: 1.0,
                dy: 0.5,
            },
            0.0,
            2.0,
            MetricSource::FiniteDifference,
        )
        .unwrap();
        assert!((l - 2.0 * 1.25f64.sqrt()).abs() < 1e-9, "{l}");
    }

    #[test]
    fn stencil_outside_domain() {
        let c = b_chart();
        let s = FdSteps::default();
        assert!(matches!(
            first_fundamental_form(&c, 0.7 - 1e-7, 0.0, &s),
            Err(Error::StencilOutOfDomain { .. })
        ));
    }

    #[test]
    fn empty_grid() {
        let c = hyperbolic_cylinder(0.0);
        let r = verify_chart(&c, &GridSpec::new(1, 5), &Tolerances::default(), &FdSteps::default());
        assert_eq!(r.unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn cylinder_suite_passes_and_round_trips() {
        let c = hyperbolic_cylinder(0.7);
        let r = verify_chart(&c, &GridSpec::new(13, 13), &Tolerances::default(), &FdSteps::default()).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let back = VerificationReport::from_text(&r.to_text()).unwrap();
        assert_eq!(back, r);
        let back = VerificationReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn report_parse_errors() {
        assert!(matches!(
            VerificationReport::from_text("nonsense"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            VerificationReport::from_text("version: 1\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(VerificationReport::from_json("{}"), Err(Error::Parse { .. })));
    }

    #[test]
    fn null_vector_is_orthogonal() {
        let rows = [[1.0, 2.0, 0.5, -1.0], [0.0, 1.0, 3.0, 2.0], [4.0, -1.0, 0.0, 1.0]];
        let n = null_vector(rows);
        for r in rows {
            let d: f64 = (0..4).map(|i| r[i] * n[i]).sum();
            assert!(d.abs() < 1e-12);
        }
    }
}
