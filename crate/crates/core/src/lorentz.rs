//! Semi-Riemannian linear algebra: `ℝ⁴₂`, the hyperboloid model of `H²`,
//! bivectors `Λ²ℝ⁴₂` with their index-2 metric, and the star operator.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::{Add, Index, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diagonal of the `ℝ⁴₂` metric.
pub const ETA4: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
/// Diagonal of the Minkowski metric on the ambient space of `H²`.
pub const ETA3: [f64; 3] = [-1.0, 1.0, 1.0];
/// Signs `g(E±_j, E±_j)`.
pub const EPSILON: [f64; 3] = [-1.0, 1.0, 1.0];

/// A vector of `ℝ⁴₂`, identified with `(z, w) = (x₁ + i x₂, x₃ + i x₄) ∈ ℂ²`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec4(pub [f64; 4]);

impl Vec4 {
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4([x1, x2, x3, x4])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        Vec4(v)
    }

    pub fn from_zw(z: Complex64, w: Complex64) -> Self {
        Vec4([z.re, z.im, w.re, w.im])
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.0[0], self.0[1])
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(self.0[2], self.0[3])
    }

    pub fn norm_sq(&self) -> f64 {
        inner4(*self, *self)
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        Vec4(self.0.map(|x| x * s))
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4(self.0.map(|x| -x))
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `⟨u, v⟩ = u₁v₁ + u₂v₂ − u₃v₃ − u₄v₄`.
pub fn inner4(u: Vec4, v: Vec4) -> f64 {
    u.0[0] * v.0[0] + u.0[1] * v.0[1] - u.0[2] * v.0[2] - u.0[3] * v.0[3]
}

/// A vector of the Minkowski 3-space containing `H²`; the first coordinate
/// is timelike.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const fn new(p1: f64, p2: f64, p3: f64) -> Self {
        Vec3([p1, p2, p3])
    }

    pub fn norm_sq(&self) -> f64 {
        inner3(*self, *self)
    }

    /// `|⟨p, p⟩ + 1|`.
    pub fn h2_residual(&self) -> f64 {
        (self.norm_sq() + 1.0).abs()
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3(self.0.map(|x| -x))
    }
}

/// `⟨x, y⟩ = −x₁y₁ + x₂y₂ + x₃y₃`.
pub fn inner3(x: Vec3, y: Vec3) -> f64 {
    -x.0[0] * y.0[0] + x.0[1] * y.0[1] + x.0[2] * y.0[2]
}

/// Index pairs of the bivector basis `e₁∧e₂, e₁∧e₃, e₁∧e₄, e₂∧e₃, e₂∧e₄, e₃∧e₄`.
pub const BASIS_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// An element of `Λ²ℝ⁴₂` in the basis [`BASIS_PAIRS`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Bivector(pub [f64; 6]);

impl Bivector {
    pub fn basis(a: usize) -> Self {
        let mut b = [0.0; 6];
        b[a] = 1.0;
        Bivector(b)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Add for Bivector {
    type Output = Bivector;
    fn add(self, o: Bivector) -> Bivector {
        Bivector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Bivector {
    type Output = Bivector;
    fn sub(self, o: Bivector) -> Bivector {
        Bivector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul<f64> for Bivector {
    type Output = Bivector;
    fn mul(self, s: f64) -> Bivector {
        Bivector(self.0.map(|x| x * s))
    }
}

impl Neg for Bivector {
    type Output = Bivector;
    fn neg(self) -> Bivector {
        Bivector(self.0.map(|x| -x))
    }
}

pub fn wedge(u: Vec4, v: Vec4) -> Bivector {
    Bivector(BASIS_PAIRS.map(|(i, j)| u.0[i] * v.0[j] - u.0[j] * v.0[i]))
}

fn gram() -> &'static [[f64; 6]; 6] {
    static GRAM: OnceLock<[[f64; 6]; 6]> = OnceLock::new();
    GRAM.get_or_init(|| {
        let e = |i| Vec4::basis(i);
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let (i, j) = BASIS_PAIRS[a];
                let (k, l) = BASIS_PAIRS[b];
                inner4(e(i), e(l)) * inner4(e(j), e(k)) - inner4(e(i), e(k)) * inner4(e(j), e(l))
            })
        })
    })
}

/// `g(a, b)`, extending `g(v∧w, v'∧w') = ⟨v,w'⟩⟨w,v'⟩ − ⟨v,v'⟩⟨w,w'⟩`.
pub fn biv_inner(a: Bivector, b: Bivector) -> f64 {
    let g = gram();
    let mut s = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            s += a.0[i] * g[i][j] * b.0[j];
        }
    }
    s
}

fn permutation_sign(p: [usize; 4]) -> f64 {
    let mut s = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// Solves `a x = b` column by column with partial pivoting.
pub(crate) fn solve_linear<const N: usize>(mut a: [[f64; N]; N], mut b: [[f64; N]; N]) -> Option<[[f64; N]; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..N {
            if r == col {
                continue;
            }
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in 0..N {
                a[r][c] -= f * a[col][c];
                b[r][c] -= f * b[col][c];
            }
        }
    }
    for r in 0..N {
        let d = a[r][r];
        for c in 0..N {
            b[r][c] /= d;
        }
    }
    Some(b)
}

/// Matrix of the star operator; column `b` holds `⋆(basis b)`.
fn star_matrix() -> &'static [[f64; 6]; 6] {
    static STAR: OnceLock<[[f64; 6]; 6]> = OnceLock::new();
    STAR.get_or_init(|| {
        // (e_a ∧ e_c) = W[a][c] Ω, so α∧⋆β = g(α, β) Ω reads W · S = Gram.
        let w: [[f64; 6]; 6] = std::array::from_fn(|a| {
            std::array::from_fn(|c| {
                let (i, j) = BASIS_PAIRS[a];
                let (k, l) = BASIS_PAIRS[c];
                let mut seen = [false; 4];
                for idx in [i, j, k, l] {
                    seen[idx] = true;
                }
                if seen.iter().all(|&s| s) {
                    permutation_sign([i, j, k, l])
                } else {
                    0.0
                }
            })
        });
        solve_linear(w, *gram()).expect("wedge pairing is non-degenerate")
    })
}

pub fn star(a: Bivector) -> Bivector {
    let s = star_matrix();
    Bivector(std::array::from_fn(|r| (0..6).map(|c| s[r][c] * a.0[c]).sum()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }
}

/// `P±(a) = ½(a ± ⋆a)`.
pub fn project(a: Bivector, side: Side) -> Bivector {
    (a + star(a) * side.sign()) * 0.5
}

/// An orthonormal frame `(e₁, e₂, e₃, e₄)` of `ℝ⁴₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame(pub [Vec4; 4]);

impl Frame {
    pub fn canonical() -> Self {
        Frame(std::array::from_fn(Vec4::basis))
    }

    /// Checks orthonormality with signs `(+, +, −, −)` and positive orientation.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { ETA4[i] } else { 0.0 };
                let got = inner4(self.0[i], self.0[j]);
                if (got - expected).abs() > tol {
                    return Err(Error::FrameValidation(format!(
                        "<e{}, e{}> = {got}, expected {expected}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let d = det4(self.0);
        if d <= 0.0 {
            return Err(Error::FrameValidation(format!(
                "orientation determinant {d} is not positive"
            )));
        }
        Ok(())
    }
}

/// `det(a, b, c, d)` with the vectors as rows.
pub fn det4(rows: [Vec4; 4]) -> f64 {
    let m = rows.map(|r| r.0);
    let mut det = 0.0;
    for c in 0..4 {
        let minor: [[f64; 3]; 3] = std::array::from_fn(|i| {
            let row = m[i + 1];
            let mut out = [0.0; 3];
            let mut k = 0;
            for (j, &x) in row.iter().enumerate() {
                if j != c {
                    out[k] = x;
                    k += 1;
                }
            }
            out
        });
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m[0][c] * det3(minor);
    }
    det
}

pub(crate) fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// The frames `E±_j` of `Λ²±ℝ⁴₂` built from an oriented orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfDualFrames {
    pub plus: [Bivector; 3],
    pub minus: [Bivector; 3],
}

impl SelfDualFrames {
    pub fn side(&self, side: Side) -> &[Bivector; 3] {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

/// `E±₁ = (e₁∧e₂ ± e₄∧e₃)/√2`, `E±₂ = (e₁∧e₃ ± e₄∧e₂)/√2`,
/// `E±₃ = (e₁∧e₄ ± e₂∧e₃)/√2`.
pub fn frames(e: &Frame) -> Result<SelfDualFrames> {
    e.validate(1e-9)?;
    let [e1, e2, e3, e4] = e.0;
    let build = |s: f64| {
        [
            (wedge(e1, e2) + wedge(e4, e3) * s) * FRAC_1_SQRT_2,
            (wedge(e1, e3) + wedge(e4, e2) * s) * FRAC_1_SQRT_2,
            (wedge(e1, e4) + wedge(e2, e3) * s) * FRAC_1_SQRT_2,
        ]
    };
    Ok(SelfDualFrames {
        plus: build(1.0),
        minus: build(-1.0),
    })
}

fn canonical_frames() -> &'static SelfDualFrames {
    static F: OnceLock<SelfDualFrames> = OnceLock::new();
    F.get_or_init(|| frames(&Frame::canonical()).expect("canonical frame is valid"))
}

/// Coordinates of `a ∈ Λ²±` in the canonical basis `(E±₁, E±₂, E±₃)`.
pub fn lambda_pm_coords(a: Bivector, side: Side) -> Result<Vec3> {
    let residual = (a - project(a, side)).max_abs();
    if residual > 1e-9 * a.max_abs().max(1.0) {
        return Err(Error::WrongEigenspace(residual));
    }
    let basis = canonical_frames().side(side);
    Ok(Vec3(std::array::from_fn(|j| EPSILON[j] * biv_inner(a, basis[j]))))
}

/// Inverse of [`lambda_pm_coords`].
pub fn from_lambda_pm_coords(c: Vec3, side: Side) -> Bivector {
    let basis = canonical_frames().side(side);
    basis[0] * c.0[0] + basis[1] * c.0[1] + basis[2] * c.0[2]
}

fn check_h31(p: Vec4) -> Result<()> {
    let r = (p.norm_sq() + 1.0).abs();
    if r > 1e-9 * p.euclidean_norm().powi(2).max(1.0) {
        return Err(Error::OffManifold(r));
    }
    Ok(())
}

/// `π(z, w) = (½(|z|² + |w|²), Re(z w̄), Im(z w̄))`, landing on `H²(−4)`:
/// `−q₁² + q₂² + q₃² = −¼`.
pub fn ads_submersion(p: Vec4) -> Result<Vec3> {
    check_h31(p)?;
    let (z, w) = (p.z(), p.w());
    let zw = z * w.conj();
    Ok(Vec3::new(0.5 * (z.norm_sqr() + w.norm_sqr()), zw.re, zw.im))
}

/// A point of `H² × ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointH2xR {
    pub p: Vec3,
    pub t: f64,
}

/// `(p, t) ↦ (p, (cosh t, 0, sinh t))`, a totally geodesic copy of
/// `H² × ℝ` in `H² × H²`.
pub fn h2xr_embed(q: PointH2xR) -> (Vec3, Vec3) {
    (q.p, Vec3::new(q.t.cosh(), 0.0, q.t.sinh()))
}

fn check_h2(p: Vec3) -> Result<()> {
    let r = p.h2_residual();
    if r > 1e-9 * p.0[0].abs().max(1.0).powi(2) || p.0[0] <= 0.0 {
        return Err(Error::OffManifold(r));
    }
    Ok(())
}

/// Poincaré disc coordinates `(p₂, p₃) / (1 + p₁)`.
pub fn disc_projection(p: Vec3) -> Result<(f64, f64)> {
    check_h2(p)?;
    let d = 1.0 + p.0[0];
    Ok((p.0[1] / d, p.0[2] / d))
}

/// Inverse of [`disc_projection`] on the open unit disc.
pub fn disc_inverse(u: f64, v: f64) -> Result<Vec3> {
    let r2 = u * u + v * v;
    if !(r2 < 1.0) {
        return Err(Error::domain(format!("({u}, {v}) is not in the open unit disc")));
    }
    let d = 1.0 - r2;
    Ok(Vec3::new((1.0 + r2) / d, 2.0 * u / d, 2.0 * v / d))
}
