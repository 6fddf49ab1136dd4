//! Closed-form solutions of the reduced sinh-Gordon equation
//!
//! ```text
//! v''(x) = 2 sinh(2 v(x)),   E = ½ v'(x)² − cosh(2 v(x)),
//! ```
//!
//! with initial data `v(0) = v₀ ≥ 0`, `v'(0) = √(2(E + cosh 2v₀))`, together
//! with a classical RK4 integrator used as an independent oracle and the
//! quadrature `G(x) = ∫ dt / (2E + e^{2v(t)})`.
//!
//! Branches, in terms of the Jacobi functions of [`crate::elliptic`]:
//!
//! | energy      | `v(x)`                       | parameter            |
//! |-------------|------------------------------|----------------------|
//! | `E > 1`     | `log(λ tn(x/λ + a₀))`        | `μ = 1 − λ⁴`         |
//! | `|E| ≤ 1`   | `log(tn·dn(x + a₀))`         | `μ = (1 − E)/2`      |
//! | `E < −1`    | `log λ − log sn(λx + a₀)`    | `μ = λ⁻⁴`            |
//!
//! At `E = −1` the parameter degenerates to 1 and the solutions become
//! elementary: `v ≡ 0` for `v₀ = 0`, otherwise `v(x) = log coth(a₀ − x)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::elliptic::{self, arccn, arcsn, arctn, ellip_k, EllipticParameter};
use crate::error::{Error, Result};
use crate::quadrature::{graded_integral, integrate, QuadOptions};

/// Relative margin kept away from the finite ends of the definition interval.
pub const ENDPOINT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Tn,
    TnDn,
    Sn,
    ConstantZero,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::Tn => "tn",
            Branch::TnDn => "tndn",
            Branch::Sn => "sn",
            Branch::ConstantZero => "zero",
        };
        f.write_str(s)
    }
}

/// An open interval `]lo, hi[`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// The centred sub-interval holding `fraction` of the width. Infinite
    /// ends are first replaced by `anchor ∓ reach`.
    pub fn inner(&self, fraction: f64, anchor: f64, reach: f64) -> Interval {
        let lo = if self.lo.is_finite() { self.lo } else { anchor - reach };
        let hi = if self.hi.is_finite() { self.hi } else { anchor + reach };
        let pad = 0.5 * (1.0 - fraction) * (hi - lo);
        Interval::new(lo + pad, hi - pad)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "]{}, {}[", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Form {
    Zero,
    Tn,
    TnDn,
    LogCoth,
    Sn,
}

/// One closed-form branch of the reduced sinh-Gordon equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinhGordonSolution {
    energy: f64,
    v0: f64,
    branch: Branch,
    form: Form,
    lambda: Option<f64>,
    mu: EllipticParameter,
    k: f64,
    a0: f64,
    interval: Interval,
    negated: bool,
}

/// Solves the initial-value problem with `v(0) = v0`, `v'(0) ≥ 0`.
///
/// With `negated` the returned solution evaluates to `−v`.
pub fn solve(energy: f64, v0: f64, negated: bool) -> Result<SinhGordonSolution> {
    if !energy.is_finite() || !v0.is_finite() {
        return Err(Error::domain("energy and initial value must be finite"));
    }
    if v0 < 0.0 {
        return Err(Error::domain(format!("initial value v0 = {v0} must be non-negative")));
    }
    let floor = -(2.0 * v0).cosh();
    if energy < floor * (1.0 + 4.0 * f64::EPSILON) {
        return Err(Error::domain(format!("energy {energy} below -cosh(2 v0) = {floor}")));
    }
    let base = SinhGordonSolution {
        energy,
        v0,
        branch: Branch::ConstantZero,
        form: Form::Zero,
        lambda: None,
        mu: EllipticParameter::new(1.0)?,
        k: f64::INFINITY,
        a0: 0.0,
        interval: Interval::REAL_LINE,
        negated,
    };
    if energy > 1.0 {
        let lambda2 = 1.0 / (energy + (energy * energy - 1.0).sqrt());
        let lambda = lambda2.sqrt();
        let mu = EllipticParameter::from_complement(lambda2 * lambda2)?;
        let k = ellip_k(mu)?;
        let a0 = arctn(v0.exp() / lambda, mu)?;
        Ok(SinhGordonSolution {
            branch: Branch::Tn,
            form: Form::Tn,
            lambda: Some(lambda),
            mu,
            k,
            a0,
            interval: Interval::new(-lambda * a0, lambda * (k - a0)),
            ..base
        })
    } else if energy > -1.0 {
        let mu = EllipticParameter::from_complement(0.5 * (1.0 + energy))?;
        let k = ellip_k(mu)?;
        let a0 = k - 0.5 * arccn(v0.tanh(), mu)?;
        Ok(SinhGordonSolution {
            branch: Branch::TnDn,
            form: Form::TnDn,
            mu,
            k,
            a0,
            interval: Interval::new(-a0, k - a0),
            ..base
        })
    } else if energy == -1.0 {
        if v0 == 0.0 {
            return Ok(base);
        }
        let a0 = (-v0).exp().atanh();
        Ok(SinhGordonSolution {
            branch: Branch::TnDn,
            form: Form::LogCoth,
            a0,
            interval: Interval::new(f64::NEG_INFINITY, a0),
            ..base
        })
    } else {
        let lambda2 = -energy + (energy * energy - 1.0).sqrt();
        let lambda = lambda2.sqrt();
        let mu = EllipticParameter::new(1.0 / (lambda2 * lambda2))?;
        let k = ellip_k(mu)?;
        let a0 = 2.0 * k - arcsn(lambda * (-v0).exp(), mu)?;
        Ok(SinhGordonSolution {
            branch: Branch::Sn,
            form: Form::Sn,
            lambda: Some(lambda),
            mu,
            k,
            a0,
            interval: Interval::new(-a0 / lambda, (2.0 * k - a0) / lambda),
            ..base
        })
    }
}

/// The point `s ∈ ]0, K[` with `tn(s) dn(s) = w`, for `w > 0`.
fn tndn_inverse(w: f64, mu: EllipticParameter, k: f64) -> Result<f64> {
    if w > 1.0 {
        // tn·dn(K − s) = 1 / tn·dn(s)
        return Ok(k - tndn_inverse(1.0 / w, mu, k)?);
    }
    let w2 = w * w;
    Ok(0.5 * arccn((1.0 - w2) / (1.0 + w2), mu)?)
}

impl SinhGordonSolution {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn mu(&self) -> EllipticParameter {
        self.mu
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    /// True for the elementary `log coth` / `log tanh` solutions at `E = −1`.
    pub fn is_log_coth(&self) -> bool {
        self.form == Form::LogCoth
    }

    /// Name of the closed form, with the elementary cases spelled out.
    pub fn form_name(&self) -> &'static str {
        match self.form {
            Form::Zero => "zero",
            Form::Tn => "tn",
            Form::TnDn if self.mu.value() == 0.0 => "log-tan",
            Form::TnDn => "tndn",
            Form::LogCoth if self.negated => "log-tanh",
            Form::LogCoth => "log-coth",
            Form::Sn => "sn",
        }
    }

    /// The same branch with the sign of `v` flipped.
    pub fn mirrored(&self) -> SinhGordonSolution {
        SinhGordonSolution {
            negated: !self.negated,
            ..*self
        }
    }

    fn check(&self, x: f64) -> Result<()> {
        let iv = self.interval;
        let margin = if iv.is_finite() {
            ENDPOINT_MARGIN * iv.width()
        } else {
            ENDPOINT_MARGIN
        };
        let inside =
            x.is_finite() && (!iv.lo.is_finite() || x > iv.lo + margin) && (!iv.hi.is_finite() || x < iv.hi - margin);
        if inside {
            Ok(())
        } else {
            Err(Error::OutOfInterval {
                x,
                lo: iv.lo,
                hi: iv.hi,
            })
        }
    }

    /// `(v(x), v'(x))` for the un-negated branch.
    fn raw(&self, x: f64) -> Result<(f64, f64)> {
        match self.form {
            Form::Zero => Ok((0.0, 0.0)),
            Form::Tn => {
                let lambda = self.lambda.expect("tn branch carries lambda");
                let j = elliptic::jacobi(x / lambda + self.a0, self.mu)?;
                let v = (lambda * j.sn / j.cn).ln();
                let vp = j.dn / (lambda * j.sn * j.cn);
                Ok((v, vp))
            }
            Form::TnDn => {
                let m = self.mu.value();
                let j = elliptic::jacobi(x + self.a0, self.mu)?;
                let v = (j.sn * j.dn / j.cn).ln();
                let vp = j.cn * j.dn / j.sn - m * j.sn * j.cn / j.dn + j.sn * j.dn / j.cn;
                Ok((v, vp))
            }
            Form::LogCoth => {
                let r = self.a0 - x;
                Ok((-r.tanh().ln(), 2.0 / (2.0 * r).sinh()))
            }
            Form::Sn => {
                let lambda = self.lambda.expect("sn branch carries lambda");
                let j = elliptic::jacobi(lambda * x + self.a0, self.mu)?;
                let v = lambda.ln() - j.sn.ln();
                let vp = -lambda * j.cn * j.dn / j.sn;
                Ok((v, vp))
            }
        }
    }

    /// `(v(x), v'(x))`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        self.check(x)?;
        let (v, vp) = self.raw(x)?;
        if self.negated {
            Ok((-v, -vp))
        } else {
            Ok((v, vp))
        }
    }

    pub fn eval_v(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.0)
    }

    pub fn eval_v_prime(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.1)
    }

    /// `½ v'² − cosh 2v − E` at `x`.
    pub fn energy_residual(&self, x: f64) -> Result<f64> {
        let (v, vp) = self.eval(x)?;
        Ok(0.5 * vp * vp - (2.0 * v).cosh() - self.energy)
    }

    /// The maximal sub-interval `I' ⊆ I` on which `2E + e^{2v} < 0`.
    pub fn admissible_interval(&self) -> Result<Interval> {
        let e = self.energy;
        if e >= 0.0 {
            return Err(Error::NotApplicable(format!(
                "admissible interval requires E < 0, got {e}"
            )));
        }
        let iv = self.interval;
        let neg = self.negated;
        match self.form {
            Form::Zero => Ok(Interval::REAL_LINE),
            Form::LogCoth if neg => Ok(iv),
            Form::LogCoth => Ok(Interval::new(iv.lo, self.a0 - 2f64.sqrt().recip().atanh())),
            Form::Sn if neg => Ok(iv),
            Form::Sn => {
                let lambda = self.lambda.expect("sn branch carries lambda");
                let c = arcsn(lambda / (-2.0 * e).sqrt(), self.mu)?;
                Ok(Interval::new(
                    (c - self.a0) / lambda,
                    (2.0 * self.k - c - self.a0) / lambda,
                ))
            }
            Form::TnDn => {
                let w = (-2.0 * e).sqrt();
                if neg {
                    let s = tndn_inverse(1.0 / w, self.mu, self.k)?;
                    Ok(Interval::new(s - self.a0, iv.hi))
                } else {
                    let s = tndn_inverse(w, self.mu, self.k)?;
                    Ok(Interval::new(iv.lo, s - self.a0))
                }
            }
            Form::Tn => unreachable!("tn branch has positive energy"),
        }
    }

    /// The interval over which the immersions built from this solution are
    /// defined: `I` for `E > 0`, `I'` for `E < 0`.
    pub fn surface_interval(&self) -> Result<Interval> {
        if self.energy > 0.0 {
            Ok(self.interval)
        } else if self.energy < 0.0 {
            self.admissible_interval()
        } else {
            Err(Error::Unsupported("no immersion is defined for E = 0".into()))
        }
    }

    /// Base point of `G`: `0` when admissible, otherwise a point well inside `I'`.
    pub fn g_base_point(&self) -> Result<f64> {
        let adm = self.surface_interval()?;
        if adm.contains(0.0) {
            return Ok(0.0);
        }
        Ok(match (adm.lo.is_finite(), adm.hi.is_finite()) {
            (true, true) => adm.midpoint(),
            (true, false) => adm.lo + 1.0,
            (false, true) => adm.hi - 1.0,
            (false, false) => 0.0,
        })
    }

    /// 0 left of `I'`, 1 inside, 2 right of it; `None` on its boundary.
    fn sign_region(&self, x: f64) -> Result<Option<u8>> {
        if self.energy > 0.0 {
            return Ok(Some(1));
        }
        let adm = self.admissible_interval()?;
        Ok(if adm.contains(x) {
            Some(1)
        } else if x < adm.lo {
            Some(0)
        } else if x > adm.hi {
            Some(2)
        } else {
            None
        })
    }

    /// `2E + e^{2v(x)}`, the denominator of `G`. For `E < 0` this is
    /// evaluated as `v'² − e^{−2v}`, which is the same quantity on a solution
    /// and loses far fewer digits near the ends of `I'`.
    pub fn g_denominator(&self, x: f64) -> Result<f64> {
        if self.energy < 0.0 {
            let (v, vp) = self.eval(x)?;
            Ok(vp * vp - (-2.0 * v).exp())
        } else {
            Ok(2.0 * self.energy + (2.0 * self.eval_v(x)?).exp())
        }
    }

    /// `G(x) = ∫_{x_base}^{x} dt / (2E + e^{2v(t)})` by adaptive quadrature.
    pub fn g_integral(&self, x: f64, x_base: f64) -> Result<f64> {
        self.g_integral_with(x, x_base, QuadOptions::with_rel_tol(1e-13))
    }

    pub fn g_integral_with(&self, x: f64, x_base: f64, opts: QuadOptions) -> Result<f64> {
        if self.energy == 0.0 {
            return Err(Error::Unsupported("G is not used for E = 0".into()));
        }
        self.check(x)?;
        self.check(x_base)?;
        let (a, b) = (self.sign_region(x_base)?, self.sign_region(x)?);
        if a.is_none() || a != b {
            return Err(Error::SingularInterval { a: x_base, b: x });
        }
        let e2 = 2.0 * self.energy;
        let f = |t: f64| match self.eval_v(t) {
            Ok(v) => 1.0 / (e2 + (2.0 * v).exp()),
            Err(_) => f64::NAN,
        };
        Ok(integrate(f, x_base, x, opts)?.value)
    }

    /// `G(x) − G(x_base)` by a fixed graded Gauss–Legendre rule. Agrees with
    /// [`g_integral`](Self::g_integral) to rounding, and is a smooth function
    /// of `x`, which finite differences of charts built on `G` rely on.
    pub fn g_integral_smooth(&self, x: f64, x_base: f64) -> Result<f64> {
        if self.energy == 0.0 {
            return Err(Error::Unsupported("G is not used for E = 0".into()));
        }
        self.check(x)?;
        self.check(x_base)?;
        let (a, b) = (self.sign_region(x_base)?, self.sign_region(x)?);
        if a.is_none() || a != b {
            return Err(Error::SingularInterval { a: x_base, b: x });
        }
        let f = |t: f64| self.g_denominator(t).map_or(f64::NAN, f64::recip);
        let g = graded_integral(f, x_base, x, 40);
        if !g.is_finite() {
            return Err(Error::SingularInterval { a: x_base, b: x });
        }
        Ok(g)
    }
}

/// A path sampled by [`rk_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct RkPath {
    pub xs: Vec<f64>,
    pub v: Vec<f64>,
    pub v_prime: Vec<f64>,
    pub energy: f64,
    /// `max |½v'² − cosh 2v − E|` along the path.
    pub max_energy_drift: f64,
    /// Set when the `|v| > 50` guard stopped the integration early.
    pub blew_up: bool,
}

const BLOW_UP: f64 = 50.0;

/// Classical fourth-order Runge–Kutta integration of `v'' = 2 sinh 2v` from
/// `x = 0` to `x_max` (either sign) with step `h`.
pub fn rk_oracle(energy: f64, v0: f64, v0_prime: f64, x_max: f64, h: f64) -> Result<RkPath> {
    if !(h > 0.0) || !x_max.is_finite() {
        return Err(Error::domain("step must be positive and the end point finite"));
    }
    let drift0 = 0.5 * v0_prime * v0_prime - (2.0 * v0).cosh() - energy;
    let scale = energy.abs().max((2.0 * v0).cosh());
    if drift0.abs() > 1e-12 * scale {
        return Err(Error::domain(format!(
            "initial data inconsistent with energy {energy} (residual {drift0:e})"
        )));
    }
    let steps = (x_max.abs() / h).round() as usize;
    let dx = if steps == 0 { 0.0 } else { x_max / steps as f64 };
    let rhs = |v: f64, w: f64| (w, 2.0 * (2.0 * v).sinh());
    let mut path = RkPath {
        xs: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
        v_prime: Vec::with_capacity(steps + 1),
        energy,
        max_energy_drift: drift0.abs(),
        blew_up: false,
    };
    let (mut v, mut w) = (v0, v0_prime);
    path.xs.push(0.0);
    path.v.push(v);
    path.v_prime.push(w);
    for i in 1..=steps {
        let (k1v, k1w) = rhs(v, w);
        let (k2v, k2w) = rhs(v + 0.5 * dx * k1v, w + 0.5 * dx * k1w);
        let (k3v, k3w) = rhs(v + 0.5 * dx * k2v, w + 0.5 * dx * k2w);
        let (k4v, k4w) = rhs(v + dx * k3v, w + dx * k3w);
        v += dx / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        w += dx / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        if !(v.abs() <= BLOW_UP) {
            path.blew_up = true;
            break;
        }
        let drift = (0.5 * w * w - (2.0 * v).cosh() - energy).abs();
        path.max_energy_drift = path.max_energy_drift.max(drift);
        path.xs.push(i as f64 * dx);
        path.v.push(v);
        path.v_prime.push(w);
    }
    Ok(path)
}

/// `v'(0)` forced by the energy and `v(0) = v0`.
pub fn initial_slope(energy: f64, v0: f64) -> f64 {
    (2.0 * (energy + (2.0 * v0).cosh())).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ode_residual(s: &SinhGordonSolution, x: f64) -> f64 {
        let h = 1e-4;
        let v = s.eval_v(x).unwrap();
        let d2 = (s.eval_v(x + h).unwrap() - 2.0 * v + s.eval_v(x - h).unwrap()) / (h * h);
        d2 - 2.0 * (2.0 * v).sinh()
    }

    fn inner_points(iv: Interval, n: usize, fraction: f64) -> Vec<f64> {
        let adm = iv.inner(fraction, 0.0, 3.0);
        (0..n)
            .map(|i| adm.lo + (adm.hi - adm.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn initial_conditions_hold_on_every_branch() {
        for &(e, v0) in &[(3.0, 0.2), (1.5, 0.0), (0.4, 0.7), (-0.6, 0.1), (1.0, 0.3), (-4.0, 1.2)] {
            let s = solve(e, v0, false).unwrap();
            let (v, vp) = s.eval(0.0).unwrap();
            assert!((v - v0).abs() < 1e-12, "E={e}: v(0)={v}");
            assert!(
                (vp - initial_slope(e, v0)).abs() < 1e-9 * vp.max(1.0),
                "E={e}: v'(0)={vp}"
            );
        }
    }

    #[test]
    fn branch_selection() {
        assert_eq!(solve(2.0, 0.0, false).unwrap().branch(), Branch::Tn);
        assert_eq!(solve(1.0, 0.0, false).unwrap().branch(), Branch::TnDn);
        assert_eq!(solve(-0.3, 0.0, false).unwrap().branch(), Branch::TnDn);
        assert_eq!(solve(-1.0, 0.0, false).unwrap().branch(), Branch::ConstantZero);
        assert_eq!(solve(-1.0, 0.4, false).unwrap().branch(), Branch::TnDn);
        assert_eq!(solve(-2.0, 1.0, false).unwrap().branch(), Branch::Sn);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(solve(-2.0, 0.1, false), Err(Error::Domain(_))));
        assert!(matches!(solve(0.5, -0.1, false), Err(Error::Domain(_))));
        assert!(matches!(solve(f64::NAN, 0.0, false), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_zero() {
        let s = solve(-1.0, 0.0, false).unwrap();
        assert_eq!(s.interval(), Interval::REAL_LINE);
        assert_eq!(s.eval(123.0).unwrap(), (0.0, 0.0));
        assert_eq!(s.admissible_interval().unwrap(), Interval::REAL_LINE);
        assert_eq!(s.g_integral(1.5, 0.0).unwrap(), -1.5);
    }

    #[test]
    fn log_tan_at_unit_energy() {
        let s = solve(1.0, 0.0, false).unwrap();
        assert_eq!(s.mu().value(), 0.0);
        let a0 = s.a0();
        assert!((a0 - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        for x in inner_points(s.interval(), 9, 0.9) {
            assert!((s.eval_v(x).unwrap() - (x + a0).tan().ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn log_coth_and_its_mirror() {
        let s = solve(-1.0, 0.5, false).unwrap();
        assert!(s.is_log_coth());
        let a0 = s.a0();
        assert!((1.0 / a0.tanh() - 0.5f64.exp()).abs() < 1e-14);
        let m = s.mirrored();
        for &x in &[-3.0, -1.0, 0.0, 0.9 * a0] {
            let coth = 1.0 / (a0 - x).tanh();
            assert!((s.eval_v(x).unwrap() - coth.ln()).abs() < 1e-13);
            assert!((m.eval_v(x).unwrap() - (a0 - x).tanh().ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn out_of_interval() {
        let s = solve(2.0, 0.3, false).unwrap();
        let iv = s.interval();
        assert!(matches!(s.eval_v(iv.hi), Err(Error::OutOfInterval { .. })));
        assert!(matches!(s.eval_v(iv.lo - 1.0), Err(Error::OutOfInterval { .. })));
        assert!(s.eval_v(f64::NAN).is_err());
    }

    #[test]
    fn energy_and_ode_residuals() {
        for &(e, v0) in &[
            (4.0, 0.0),
            (2.0, 0.3),
            (0.1, 0.0),
            (-0.5, 0.2),
            (-0.99, 0.0),
            (-6.0, 1.5),
        ] {
            for neg in [false, true] {
                let s = solve(e, v0, neg).unwrap();
                for x in inner_points(s.interval(), 41, 0.9) {
                    let r = s.energy_residual(x).unwrap();
                    let scale = (2.0 * s.eval_v(x).unwrap()).cosh();
                    assert!(r.abs() < 1e-9 * scale, "E={e} x={x} energy residual {r}");
                    let o = ode_residual(&s, x);
                    assert!(o.abs() < 1e-5 * scale, "E={e} x={x} ode residual {o}");
                }
            }
        }
    }

    #[test]
    fn reflection_symmetry_above_minus_one() {
        for &(e, v0) in &[(4.0, 0.3), (1.0, 0.0), (0.1, 0.6), (-0.5, 0.2)] {
            let s = solve(e, v0, false).unwrap();
            let iv = s.interval();
            let mid = iv.midpoint();
            for k in 1..10 {
                let t = 0.045 * k as f64 * iv.width();
                let a = s.eval_v(mid + t).unwrap();
                let b = s.eval_v(mid - t).unwrap();
                assert!((a + b).abs() < 1e-9 * a.abs().max(1.0), "E={e}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn sn_branch_is_positive() {
        let s = solve(-4.0, 1.2, false).unwrap();
        for x in inner_points(s.interval(), 200, 0.999) {
            assert!(s.eval_v(x).unwrap() > 0.0);
        }
    }

    #[test]
    fn closed_form_matches_rk_oracle() {
        for &(e, v0) in &[(2.0, 0.3), (-4.0, 1.2), (0.5, 0.1)] {
            let s = solve(e, v0, false).unwrap();
            let adm = s.interval().inner(0.9, 0.0, 0.0);
            for end in [adm.lo, adm.hi] {
                let path = rk_oracle(e, v0, initial_slope(e, v0), end, 1e-4).unwrap();
                assert!(!path.blew_up);
                assert!(path.max_energy_drift < 1e-9 * path.v.iter().map(|v| (2.0 * v).cosh()).fold(1.0, f64::max));
                for (x, v) in path.xs.iter().zip(&path.v).step_by(97) {
                    let exact = s.eval_v(*x).unwrap();
                    assert!((exact - v).abs() < 1e-8, "E={e} x={x}: {exact} vs {v}");
                }
            }
        }
    }

    #[test]
    fn rk_oracle_trivial_and_inconsistent() {
        let p = rk_oracle(-1.0, 0.0, 0.0, 2.0, 1e-2).unwrap();
        assert!(p.v.iter().all(|&v| v == 0.0));
        assert!(rk_oracle(1.0, 0.0, 0.0, 1.0, 1e-2).is_err());
        assert!(rk_oracle(1.0, 0.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn rk_oracle_blow_up_guard() {
        let e = 1.0;
        let v0 = 0.2f64.tan().ln();
        let p = rk_oracle(e, v0, 2.0 / 0.4f64.sin(), 2.0, 1e-3).unwrap();
        assert!(p.blew_up);
        assert!(*p.xs.last().unwrap() < std::f64::consts::FRAC_PI_2 - 0.2 + 1e-3);
    }

    #[test]
    fn rk_oracle_is_fourth_order() {
        let v0 = 0.2f64.tan().ln();
        let vp0 = 2.0 / 0.4f64.sin();
        let e = 0.5 * vp0 * vp0 - (2.0 * v0).cosh();
        assert!((e - 1.0).abs() < 1e-13);
        let err = |h: f64| {
            let p = rk_oracle(e, v0, vp0, 1.0, h).unwrap();
            let x = *p.xs.last().unwrap();
            (p.v.last().unwrap() - (x + 0.2).tan().ln()).abs()
        };
        let ratio = err(2e-3) / err(1e-3);
        assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn g_integral_against_composite_simpson() {
        let s = solve(4.0, 0.0, false).unwrap();
        let g = s.g_integral(0.5, 0.0).unwrap();
        let n = 4000;
        let h = 0.5 / n as f64;
        let f = |t: f64| 1.0 / (8.0 + (2.0 * s.eval_v(t).unwrap()).exp());
        let mut acc = f(0.0) + f(0.5);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        let simpson = acc * h / 3.0;
        assert!((g - simpson).abs() < 1e-12, "{g} vs {simpson}");
    }

    #[test]
    fn smooth_g_agrees_with_adaptive() {
        for &(e, v0) in &[(4.0, 0.0), (0.1, 0.3), (-0.5, 0.0), (-6.0, 1.2389443651442376)] {
            let s = solve(e, v0, false).unwrap();
            let base = s.g_base_point().unwrap();
            let xi = s.surface_interval().unwrap().inner(0.98, base, 2.0);
            for x in [xi.lo, 0.5 * (xi.lo + base), 0.5 * (base + xi.hi), xi.hi] {
                let a = s.g_integral(x, base).unwrap();
                let b = s.g_integral_smooth(x, base).unwrap();
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "E={e} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn g_integral_is_additive() {
        let s = solve(-0.5, 0.2, false).unwrap();
        let adm = s.admissible_interval().unwrap().inner(0.8, 0.0, 0.0);
        let (a, b, c) = (adm.lo, adm.midpoint(), adm.hi);
        let lhs = s.g_integral(b, a).unwrap() + s.g_integral(c, b).unwrap();
        assert!((lhs - s.g_integral(c, a).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn g_integral_refuses_singular_range() {
        let s = solve(-0.5, 0.2, false).unwrap();
        let adm = s.admissible_interval().unwrap();
        let inside = adm.inner(0.5, 0.0, 0.0).midpoint();
        let outside = 0.5 * (adm.hi + s.interval().hi);
        assert!(matches!(
            s.g_integral(outside, inside),
            Err(Error::SingularInterval { .. })
        ));
    }

    #[test]
    fn admissible_interval_sn_by_bisection() {
        let e = -6.0;
        let s = solve(e, 1.5, false).unwrap();
        let adm = s.admissible_interval().unwrap();
        let iv = s.interval();
        let f = |x: f64| (2.0 * s.eval_v(x).unwrap()).exp() - 12.0;
        let bisect = |mut a: f64, mut b: f64| {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if (f(m) > 0.0) == (f(a) > 0.0) {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let mid = adm.midpoint();
        assert!(f(mid) < 0.0);
        let lo = bisect(iv.lo + 1e-6 * iv.width(), mid);
        let hi = bisect(mid, iv.hi - 1e-6 * iv.width());
        assert!((lo - adm.lo).abs() < 1e-10, "{lo} vs {}", adm.lo);
        assert!((hi - adm.hi).abs() < 1e-10, "{hi} vs {}", adm.hi);
        assert!(!adm.contains(0.0));
        assert!((s.g_base_point().unwrap() - mid).abs() < 1e-15);
    }

    #[test]
    fn admissible_interval_tndn_endpoint() {
        for neg in [false, true] {
            let s = solve(-0.5, 0.2, neg).unwrap();
            let adm = s.admissible_interval().unwrap();
            let end = if neg { adm.lo } else { adm.hi };
            assert!(s.g_denominator(end).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn admissible_interval_log_coth() {
        let s = solve(-1.0, 0.5, false).unwrap();
        let adm = s.admissible_interval().unwrap();
        assert_eq!(adm.lo, f64::NEG_INFINITY);
        assert!(s.g_denominator(adm.hi).unwrap().abs() < 1e-12);
        assert!(s.g_denominator(adm.hi - 0.1).unwrap() < 0.0);
        assert_eq!(s.mirrored().admissible_interval().unwrap(), s.interval());
    }

    #[test]
    fn admissible_interval_not_applicable() {
        let s = solve(0.5, 0.0, false).unwrap();
        assert!(matches!(s.admissible_interval(), Err(Error::NotApplicable(_))));
        assert!(matches!(
            solve(0.0, 0.0, false).unwrap().surface_interval(),
            Err(Error::Unsupported(_))
        ));
    }
}
