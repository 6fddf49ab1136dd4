//! Jacobi elliptic functions, the elliptic integral of the first kind and
//! principal-branch inverses.
//!
//! Everything here uses the *parameter* convention: `m` multiplies `sin²θ`
//! inside the integrand,
//!
//! ```text
//! F(φ | m) = ∫₀^φ dθ / √(1 − m sin²θ),   0 ≤ m ≤ 1.
//! ```
//!
//! The amplitude `am(u | m)` is evaluated by the descending Landen (AGM)
//! recursion, `F` by Carlson's symmetric integral `R_F`, so the two
//! directions are computed independently of each other.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Rounding slack tolerated (and clamped) outside `[0, 1]`.
pub const PARAMETER_SLACK: f64 = 1e-14;

/// An elliptic parameter `m ∈ [0, 1]` together with its complement `1 − m`.
///
/// Storing the complement separately keeps `K(m)` accurate when `m` is
/// produced as `1 − λ⁴` for small `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParameter {
    m: f64,
    m1: f64,
}

impl EllipticParameter {
    pub fn new(m: f64) -> Result<Self> {
        if !m.is_finite() || m < -PARAMETER_SLACK || m > 1.0 + PARAMETER_SLACK {
            return Err(Error::domain(format!("elliptic parameter {m} outside [0, 1]")));
        }
        let m = m.clamp(0.0, 1.0);
        Ok(EllipticParameter { m, m1: 1.0 - m })
    }

    /// Builds the parameter from its complement `m1 = 1 − m`.
    pub fn from_complement(m1: f64) -> Result<Self> {
        if !m1.is_finite() || m1 < -PARAMETER_SLACK || m1 > 1.0 + PARAMETER_SLACK {
            return Err(Error::domain(format!("complementary parameter {m1} outside [0, 1]")));
        }
        let m1 = m1.clamp(0.0, 1.0);
        Ok(EllipticParameter { m: 1.0 - m1, m1 })
    }

    pub fn value(self) -> f64 {
        self.m
    }

    pub fn complement(self) -> f64 {
        self.m1
    }

    fn is_one(self) -> bool {
        self.m1 == 0.0
    }
}

/// The four Jacobi functions at one point, sharing one amplitude evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub am: f64,
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

impl Jacobi {
    /// `tn = sn / cn`; fails near the poles `x ≡ K (mod 2K)`.
    pub fn tn(&self) -> Result<f64> {
        if self.cn.abs() <= 1e-15 * self.am.abs().max(1.0) {
            return Err(Error::Pole(self.am));
        }
        Ok(self.sn / self.cn)
    }
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind `K(m) = F(π/2 | m)`.
pub fn ellip_k(m: EllipticParameter) -> Result<f64> {
    if m.is_one() {
        return Err(Error::Divergent);
    }
    Ok(FRAC_PI_2 / agm(1.0, m.m1.sqrt()))
}

/// Carlson's symmetric elliptic integral of the first kind.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    const TOL: f64 = 8e-4;
    loop {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < TOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

/// Incomplete elliptic integral of the first kind `F(φ | m)`, odd in `φ`.
///
/// For `m < 1` any real `φ` is accepted via `F(φ + nπ) = F(φ) + 2nK`. At
/// `m = 1` the integrand has a non-integrable singularity at `π/2`, so
/// `|φ| < π/2` is required.
pub fn ellip_f(phi: f64, m: EllipticParameter) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::domain("non-finite amplitude"));
    }
    if m.is_one() {
        if phi.abs() >= FRAC_PI_2 {
            return Err(Error::domain("F(φ | 1) diverges for |φ| ≥ π/2"));
        }
        return Ok(phi.sin().atanh());
    }
    let n = (phi / PI).round();
    let r = phi - n * PI;
    let (s, c) = r.sin_cos();
    let reduced = s * carlson_rf(c * c, m.m1 + m.m * c * c, 1.0);
    if n == 0.0 {
        Ok(reduced)
    } else {
        Ok(2.0 * n * ellip_k(m)? + reduced)
    }
}

/// Jacobi amplitude `am(u | m)`, the inverse of `φ ↦ F(φ | m)`.
pub fn jacobi_am(u: f64, m: EllipticParameter) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::domain("non-finite argument"));
    }
    if m.m == 0.0 {
        return Ok(u);
    }
    if m.is_one() {
        // Gudermannian
        return Ok(u.sinh().atan());
    }
    if m.m < 1e-12 {
        // first-order expansion in the parameter; the next term is O(m²)
        let (s, c) = u.sin_cos();
        return Ok(u - 0.25 * m.m * (u - s * c));
    }
    Ok(am_landen(u, m))
}

fn am_landen(u: f64, m: EllipticParameter) -> f64 {
    const MAX_STEPS: usize = 24;
    let mut a = [0.0_f64; MAX_STEPS + 1];
    let mut c = [0.0_f64; MAX_STEPS + 1];
    a[0] = 1.0;
    c[0] = m.m.sqrt();
    let mut b = m.m1.sqrt();
    let mut n = 0;
    while n < MAX_STEPS && c[n].abs() > 1e-17 * a[n] {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for k in (1..=n).rev() {
        phi = 0.5 * (phi + (c[k] / a[k] * phi.sin()).asin());
    }
    phi
}

/// Evaluates `am, sn, cn, dn` at `x`.
pub fn jacobi(x: f64, m: EllipticParameter) -> Result<Jacobi> {
    let am = jacobi_am(x, m)?;
    let (sn, cn) = am.sin_cos();
    let dn = if m.is_one() {
        1.0 / x.cosh()
    } else {
        (m.m1 + m.m * cn * cn).sqrt()
    };
    Ok(Jacobi { am, sn, cn, dn })
}

pub fn jacobi_sn(x: f64, m: EllipticParameter) -> Result<f64> {
    Ok(jacobi(x, m)?.sn)
}

pub fn jacobi_cn(x: f64, m: EllipticParameter) -> Result<f64> {
    Ok(jacobi(x, m)?.cn)
}

pub fn jacobi_dn(x: f64, m: EllipticParameter) -> Result<f64> {
    Ok(jacobi(x, m)?.dn)
}

pub fn jacobi_tn(x: f64, m: EllipticParameter) -> Result<f64> {
    jacobi(x, m)?.tn()
}

fn check_unit_range(function: &'static str, y: f64) -> Result<f64> {
    if !(-PARAMETER_SLACK..=1.0 + PARAMETER_SLACK).contains(&y) {
        return Err(Error::Range { function, value: y });
    }
    Ok(y.clamp(0.0, 1.0))
}

/// Principal inverse of `sn` on `[0, K]`, for `y ∈ [0, 1]`.
pub fn arcsn(y: f64, m: EllipticParameter) -> Result<f64> {
    let y = check_unit_range("arcsn", y)?;
    if m.is_one() && y == 1.0 {
        return Err(Error::Divergent);
    }
    ellip_f(y.asin(), m)
}

/// Principal inverse of `cn` on `[0, K]`, for `y ∈ [0, 1]`.
pub fn arccn(y: f64, m: EllipticParameter) -> Result<f64> {
    let y = check_unit_range("arccn", y)?;
    if m.is_one() && y == 0.0 {
        return Err(Error::Divergent);
    }
    ellip_f(y.acos(), m)
}

/// Principal inverse of `tn` on `[0, K)`, for `y ∈ [0, ∞)`.
pub fn arctn(y: f64, m: EllipticParameter) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::Range {
            function: "arctn",
            value: y,
        });
    }
    if y == f64::INFINITY {
        return ellip_k(m);
    }
    ellip_f(y.atan(), m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(m: f64) -> EllipticParameter {
        EllipticParameter::new(m).unwrap()
    }

    #[test]
    fn parameter_domain_and_clamping() {
        assert!(EllipticParameter::new(-1e-3).is_err());
        assert!(EllipticParameter::new(1.001).is_err());
        assert!(EllipticParameter::new(f64::NAN).is_err());
        assert_eq!(p(1.0 + 1e-15).value(), 1.0);
        assert_eq!(p(-1e-15).value(), 0.0);
        let q = EllipticParameter::from_complement(1e-20).unwrap();
        assert_eq!(q.complement(), 1e-20);
    }

    #[test]
    fn k_at_zero_and_divergence() {
        assert!((ellip_k(p(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_k(p(1.0)), Err(Error::Divergent));
    }

    #[test]
    fn f_trivial_values() {
        assert!((ellip_f(FRAC_PI_2, p(0.0)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_f(0.0, p(1.0)).unwrap(), 0.0);
        let phi = 0.7_f64;
        let gd_inv = (1.0 / phi.cos() + phi.tan()).ln();
        assert!((ellip_f(phi, p(1.0)).unwrap() - gd_inv).abs() < 1e-14);
        assert!(ellip_f(FRAC_PI_2, p(1.0)).is_err());
        // odd
        assert_eq!(ellip_f(-0.4, p(0.3)).unwrap(), -ellip_f(0.4, p(0.3)).unwrap());
    }

    #[test]
    fn f_quasi_periodic_extension() {
        let m = p(0.6);
        let k = ellip_k(m).unwrap();
        let f = ellip_f(0.3 + 2.0 * PI, m).unwrap();
        assert!((f - (ellip_f(0.3, m).unwrap() + 4.0 * k)).abs() < 1e-13);
    }

    #[test]
    fn am_trivial_values() {
        assert_eq!(jacobi_am(1.3, p(0.0)).unwrap(), 1.3);
        let m = p(0.37);
        let k = ellip_k(m).unwrap();
        assert!((jacobi_am(k, m).unwrap() - FRAC_PI_2).abs() < 1e-14);
        assert_eq!(jacobi_am(0.0, m).unwrap(), 0.0);
    }

    #[test]
    fn limits_sin_tanh() {
        for &x in &[-2.0, -0.3, 0.0, 0.9, 3.5] {
            let j0 = jacobi(x, p(0.0)).unwrap();
            assert!((j0.sn - f64::sin(x)).abs() < 1e-15);
            assert!((j0.cn - f64::cos(x)).abs() < 1e-15);
            assert_eq!(j0.dn, 1.0);
            let j1 = jacobi(x, p(1.0)).unwrap();
            assert!((j1.sn - f64::tanh(x)).abs() < 1e-15);
            assert!((j1.cn - 1.0 / f64::cosh(x)).abs() < 1e-15);
            assert!((j1.dn - 1.0 / f64::cosh(x)).abs() < 1e-15);
        }
        assert!((jacobi_tn(0.4, p(0.0)).unwrap() - 0.4_f64.tan()).abs() < 1e-15);
    }

    #[test]
    fn tn_pole() {
        let m = p(0.5);
        let k = ellip_k(m).unwrap();
        assert!(matches!(jacobi_tn(k, m), Err(Error::Pole(_))));
        assert!(matches!(jacobi_tn(FRAC_PI_2, p(0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn inverse_trivial_values() {
        let m = p(0.81);
        let k = ellip_k(m).unwrap();
        assert_eq!(arcsn(0.0, m).unwrap(), 0.0);
        assert!((arcsn(1.0, m).unwrap() - k).abs() < 1e-14);
        assert!((arccn(0.0, m).unwrap() - k).abs() < 1e-14);
        assert!((arctn(1.0, p(0.0)).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!((arctn(f64::INFINITY, m).unwrap() - k).abs() < 1e-15);
    }

    #[test]
    fn inverse_range_errors() {
        let m = p(0.2);
        assert!(matches!(arcsn(1.2, m), Err(Error::Range { .. })));
        assert!(matches!(arcsn(-0.1, m), Err(Error::Range { .. })));
        assert!(matches!(arccn(2.0, m), Err(Error::Range { .. })));
        assert!(matches!(arctn(-1.0, m), Err(Error::Range { .. })));
        assert_eq!(arcsn(1.0, p(1.0)), Err(Error::Divergent));
    }

    #[test]
    fn small_parameter_series_is_continuous() {
        for m in [0.9e-12, 0.5e-12, 1e-13] {
            let series = jacobi_am(2.3, p(m)).unwrap();
            let landen = am_landen(2.3, p(m));
            assert!((series - landen).abs() < 1e-14, "{m}");
        }
    }
}
