//! The `A`-dependent landscape of the limit problem: the endpoints
//! `beta1 < beta2`, the branch function `R(z) = (z - beta1)^{1/2} (z - beta2)^{1/2}`,
//! the phase functions
//!
//! ```text
//! phi(z)       = 1/2 int_{beta1}^{z} R(s)/s ds
//! phi_tilde(z) = 1/2 int_{beta2}^{z} R(s)/s ds
//! ```
//!
//! the constant `c_n = 2 i sin(n A_n pi)`, and the g-function (log-transform
//! of the `r = 0` limit measure) together with its constant `ell`.
//!
//! Everything here works in f64; the phase integrals are computed by adaptive
//! Gauss–Legendre quadrature to `quad_tol`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Float, Rational};

use crate::contour::{trace_gamma, ContourPolyline, TraceOptions};
use crate::error::{Error, Result};
use crate::measure::interval_integral;
use crate::quadrature::{integrate_segment, integrate_segment_sqrt_start};

pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Endpoints and working tolerances for a given `A`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialContext {
    pub a: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub precision_bits: u32,
    pub quad_tol: f64,
}

/// Which one-sided limit to take on a cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundarySide {
    Above,
    Below,
    OffAxis,
}

/// `beta1 = 2 - A - 2 sqrt(1 - A)`, `beta2 = 2 - A + 2 sqrt(1 - A)`.
///
/// `beta1` is formed as `A^2 / beta2` to avoid cancellation for small `A`.
pub fn beta_endpoints(a: f64) -> (f64, f64) {
    let root = (1.0 - a).max(0.0).sqrt();
    let beta2 = 2.0 - a + 2.0 * root;
    (a * a / beta2, beta2)
}

/// Endpoints at arbitrary precision.
pub fn beta_endpoints_mp(a: &Float) -> (Float, Float) {
    let prec = a.prec();
    let one_minus = Float::with_val(prec, 1 - a);
    let root = one_minus.sqrt();
    let two_minus = Float::with_val(prec, 2 - a);
    let beta1 = Float::with_val(prec, &two_minus - Float::with_val(prec, &root * 2u32));
    let beta2 = Float::with_val(prec, &two_minus + Float::with_val(prec, &root * 2u32));
    (beta1, beta2)
}

pub fn make_context(a: f64, precision_bits: u32) -> Result<PotentialContext> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!("A = {a} is outside (0, 1]")));
    }
    let (beta1, beta2) = beta_endpoints(a);
    Ok(PotentialContext {
        a,
        beta1,
        beta2,
        precision_bits,
        quad_tol: DEFAULT_QUAD_TOL,
    })
}

impl PotentialContext {
    pub fn with_quad_tol(mut self, quad_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self
    }

    pub fn width(&self) -> f64 {
        self.beta2 - self.beta1
    }

    /// `R(z)` (see [`r_eval`]).
    pub fn r(&self, z: Complex64, side: BoundarySide) -> Result<Complex64> {
        r_eval(self, z, side)
    }

    /// `R(s)/s` off the cuts; `s` is assumed to have a sign on its imaginary
    /// part or lie off `(beta1, beta2)`.
    pub(crate) fn r_over_s(&self, s: Complex64) -> Complex64 {
        r_raw(self, s, BoundarySide::Above) / s
    }

    /// `dphi/dz = R(z) / (2 z)`.
    pub fn phi_derivative(&self, z: Complex64) -> Complex64 {
        0.5 * self.r_over_s(z)
    }
}

fn r_raw(ctx: &PotentialContext, z: Complex64, side: BoundarySide) -> Complex64 {
    if z.im == 0.0 {
        let x = z.re;
        let q = ((x - ctx.beta1) * (x - ctx.beta2)).abs().sqrt();
        return if x <= ctx.beta1 {
            Complex64::new(-q, 0.0)
        } else if x >= ctx.beta2 {
            Complex64::new(q, 0.0)
        } else if side == BoundarySide::Below {
            Complex64::new(0.0, -q)
        } else {
            Complex64::new(0.0, q)
        };
    }
    let w1 = z - ctx.beta1;
    let w2 = z - ctx.beta2;
    let modulus = w1.norm().sqrt() * w2.norm().sqrt();
    Complex64::from_polar(modulus, 0.5 * (w1.arg() + w2.arg()))
}

/// `R(z)` with the cut exactly on `[beta1, beta2]`, `R(z) ~ z` at infinity
/// and `R < 0` on `(-inf, beta1)`. On the open cut `side` selects `R_+` or
/// `R_-`.
pub fn r_eval(ctx: &PotentialContext, z: Complex64, side: BoundarySide) -> Result<Complex64> {
    let on_cut = z.im == 0.0 && z.re > ctx.beta1 && z.re < ctx.beta2;
    if on_cut && side == BoundarySide::OffAxis {
        return Err(Error::BranchCut(format!("{z}")));
    }
    Ok(r_raw(ctx, z, side))
}

/// Three-leg path from `start` (real) to `z` in the closed upper half plane:
/// up to height `h`, across, and down to `z`.
fn upper_path(start: f64, z: Complex64) -> Vec<Complex64> {
    let h = z.im.max(0.1);
    let mut pts = vec![Complex64::new(start, 0.0), Complex64::new(start, h)];
    if (z.re - start).abs() > 0.0 {
        pts.push(Complex64::new(z.re, h));
    }
    if z.im < h {
        pts.push(z);
    }
    pts
}

/// `int R(s)/s ds` (without the 1/2) along a polyline leaving the real point
/// `path[0]`, where `R` has a square-root zero.
fn integrate_path<F>(f: F, path: &[Complex64], tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + Copy,
{
    let mut total = Complex64::new(0.0, 0.0);
    for (k, w) in path.windows(2).enumerate() {
        let est = if k == 0 {
            integrate_segment_sqrt_start(f, w[0], w[1], tol)?
        } else {
            integrate_segment(f, w[0], w[1], tol)?
        };
        total += est.value;
    }
    Ok(total)
}

fn phi_upper(ctx: &PotentialContext, z: Complex64) -> Result<Complex64> {
    let path = upper_path(ctx.beta1, z);
    let integral = integrate_path(|s| ctx.r_over_s(s), &path, ctx.quad_tol)?;
    Ok(0.5 * integral)
}

fn half_plane_of(ctx_cut_lo: f64, z: Complex64, side: BoundarySide) -> Result<bool> {
    if z.im > 0.0 {
        Ok(true)
    } else if z.im < 0.0 {
        Ok(false)
    } else {
        match side {
            BoundarySide::Above => Ok(true),
            BoundarySide::Below => Ok(false),
            BoundarySide::OffAxis => Err(Error::BranchCut(format!("{z} (cut starts at {ctx_cut_lo})"))),
        }
    }
}

/// `phi(z) = 1/2 int_{beta1}^{z} R(s)/s ds` with the path avoiding
/// `(-inf, 0] U [beta1, inf)`; on those cuts `side` selects the one-sided
/// limit. On `(0, beta1)` the integral runs along the real axis.
pub fn phi_eval(ctx: &PotentialContext, z: Complex64, side: BoundarySide) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("phi is singular at the origin".into()));
    }
    if z == Complex64::new(ctx.beta1, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.im == 0.0 && z.re > 0.0 && z.re < ctx.beta1 {
        let from = Complex64::new(ctx.beta1, 0.0);
        let est = integrate_segment_sqrt_start(|s| ctx.r_over_s(s), from, z, ctx.quad_tol)?;
        return Ok(0.5 * est.value);
    }
    if half_plane_of(0.0, z, side)? {
        phi_upper(ctx, z)
    } else {
        Ok(phi_upper(ctx, z.conj())?.conj())
    }
}

/// `Re phi(z)`, which is single valued off `{0} U [beta1, inf)`.
pub fn re_phi(ctx: &PotentialContext, z: Complex64) -> Result<f64> {
    Ok(phi_eval(ctx, z, BoundarySide::Above)?.re)
}

/// `phi_tilde(z) = 1/2 int_{beta2}^{z} R(s)/s ds` on `C \ (-inf, beta2]`.
pub fn phi_tilde_eval(ctx: &PotentialContext, z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(ctx.beta2, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.im == 0.0 && z.re <= ctx.beta2 {
        return Err(Error::Domain(format!("{z} lies on the cut (-inf, beta2] of phi_tilde")));
    }
    if z.im == 0.0 {
        let from = Complex64::new(ctx.beta2, 0.0);
        let est = integrate_segment_sqrt_start(|s| ctx.r_over_s(s), from, z, ctx.quad_tol)?;
        return Ok(0.5 * est.value);
    }
    let upper = |w: Complex64| -> Result<Complex64> {
        let path = upper_path(ctx.beta2, w);
        Ok(0.5 * integrate_path(|s| ctx.r_over_s(s), &path, ctx.quad_tol)?)
    };
    if z.im > 0.0 {
        upper(z)
    } else {
        Ok(upper(z.conj())?.conj())
    }
}

/// `2 phi(z) - z + (2 - A) Log z` for `z` in the closed upper half plane,
/// computed without the cancellation that `phi` itself suffers for large `|z|`.
///
/// Uses `R(s)/s - 1 + (2 - A)/s = -4 (1 - A) / (s (R(s) + s - (2 - A)))`.
pub fn phi_linear_remainder(ctx: &PotentialContext, z: Complex64) -> Result<Complex64> {
    if z.im < 0.0 {
        return Err(Error::Domain(
            "phi_linear_remainder is defined on the upper half plane".into(),
        ));
    }
    let b = 2.0 - ctx.a;
    let c = -4.0 * (1.0 - ctx.a);
    let h = |s: Complex64| {
        let r = r_raw(ctx, s, BoundarySide::Above);
        c / (s * (r + s - b))
    };
    let path = upper_path(ctx.beta1, z);
    let integral = integrate_path(h, &path, ctx.quad_tol)?;
    Ok(integral - ctx.beta1 + b * ctx.beta1.ln())
}

/// `c_n = 2 i sin(n A_n pi)`, stored as the imaginary part `2 sin(n A_n pi)`.
#[derive(Clone, Debug)]
pub struct CConstant {
    pub imag: Float,
    /// Set when `n A_n` is an integer, so that `c_n = 0`.
    pub integer_parameter: bool,
}

impl CConstant {
    pub fn abs_f64(&self) -> f64 {
        self.imag.to_f64().abs()
    }

    pub fn value_f64(&self) -> Complex64 {
        Complex64::new(0.0, self.imag.to_f64())
    }
}

/// `c_n = 2 i sin(n A_n pi)` with the argument reduced modulo 2 exactly.
pub fn c_constant(n: u32, a_n: &Rational, precision_bits: u32) -> CConstant {
    let x = a_n.clone() * n;
    c_constant_from_product(&x, precision_bits)
}

/// `c_n` from the exact product `n A_n` (that is, `-alpha`).
pub fn c_constant_from_product(n_a: &Rational, precision_bits: u32) -> CConstant {
    // reduce n A_n modulo 2 into [0, 2)
    let two = Rational::from(2);
    let q = (n_a.clone() / &two).floor();
    let reduced = n_a.clone() - q * &two;
    let integer_parameter = *reduced.denom() == 1;
    if integer_parameter {
        return CConstant {
            imag: Float::with_val(precision_bits, 0),
            integer_parameter,
        };
    }
    let pi = Float::with_val(precision_bits, Constant::Pi);
    let angle = Float::with_val(precision_bits, &reduced) * pi;
    let imag = Float::with_val(precision_bits, angle.sin() * 2u32);
    CConstant {
        imag,
        integer_parameter,
    }
}

/// `|c|^{1/n}` together with the integer-parameter flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rate {
    pub value: f64,
    pub integer_parameter: bool,
}

pub fn rate_from_c(n: u32, c: &CConstant) -> Rate {
    if c.integer_parameter || c.imag.is_zero() {
        return Rate {
            value: 0.0,
            integer_parameter: true,
        };
    }
    let ln_abs = Float::with_val(c.imag.prec(), c.imag.abs_ref()).ln();
    let value = Float::with_val(c.imag.prec(), ln_abs / n).exp().to_f64();
    Rate {
        value,
        integer_parameter: false,
    }
}

/// `Log w` with `arg w` in `[0, 2 pi)`; on the positive axis `side` picks
/// `0` (above) or `2 pi` (below).
pub fn log_0_2pi(w: Complex64, side: BoundarySide) -> Complex64 {
    let mut arg = w.im.atan2(w.re);
    if arg < 0.0 || (arg == 0.0 && w.im == 0.0 && side == BoundarySide::Below && w.re > 0.0) {
        arg += 2.0 * PI;
    }
    Complex64::new(w.norm().ln(), arg)
}

/// The g-function `g(z) = int log(z - s) dmu_0(s)` for one value of `A`.
///
/// For `s` on the interval the logarithm has its cut along `[s, inf)`; for
/// `s` on the loop `Gamma_0` its cut runs from `s` along the loop to `beta1`
/// and then along `[beta1, inf)`. The loop part is integrated against the
/// complex differential `R(s)/(2 pi i s) ds` along the traced polyline.
#[derive(Clone, Debug)]
pub struct GFunction {
    ctx: PotentialContext,
    gamma: ContourPolyline,
    beta1_index: usize,
}

impl GFunction {
    pub fn new(ctx: &PotentialContext) -> Result<Self> {
        let gamma = trace_gamma(ctx, 0.0, &TraceOptions::for_context(ctx))?;
        Self::with_contour(ctx, gamma)
    }

    pub fn with_contour(ctx: &PotentialContext, gamma: ContourPolyline) -> Result<Self> {
        let beta1_index = gamma
            .beta1_index
            .ok_or_else(|| Error::Domain("g needs the r = 0 contour through beta1".into()))?;
        Ok(GFunction {
            ctx: *ctx,
            gamma,
            beta1_index,
        })
    }

    pub fn context(&self) -> &PotentialContext {
        &self.ctx
    }

    pub fn contour(&self) -> &ContourPolyline {
        &self.gamma
    }

    fn check_domain(&self, z: Complex64, side: BoundarySide) -> Result<()> {
        if z.im == 0.0 && z.re >= self.ctx.beta1 && side == BoundarySide::OffAxis {
            return Err(Error::Domain(format!("{z} lies on the cut [beta1, inf) of g")));
        }
        if self.gamma.distance_to(z) < self.gamma.max_step {
            return Err(Error::Domain(format!("{z} lies on the loop Gamma_0")));
        }
        Ok(())
    }

    /// `(g(z) - Log z, loop mass)` where `Log` has `arg` in `[0, 2 pi)`.
    fn eval_parts(&self, z: Complex64, side: BoundarySide) -> Result<(Complex64, f64)> {
        self.check_domain(z, side)?;
        let ctx = &self.ctx;
        let tol = ctx.quad_tol;
        let log_z = log_0_2pi(z, side);
        let pts = &self.gamma.points;
        let m = pts.len();
        let to_log_diff = |w: Complex64| -> Complex64 {
            // Log(z - b1) - Log z on the [0, 2 pi) branch
            let arg = log_0_2pi(w, side).im - log_z.im;
            Complex64::new((w / z).norm().ln(), arg)
        };
        let base = to_log_diff(z - ctx.beta1);
        let nu = |s: Complex64| ctx.r_over_s(s) / Complex64::new(0.0, 2.0 * PI);

        let mut loop_part = Complex64::new(0.0, 0.0);
        let mut loop_mass = Complex64::new(0.0, 0.0);
        // Walk away from beta1 along each arc, keeping log(z - s) continuous.
        // The upper arc is walked against the (clockwise) traversal direction.
        for (range, orient) in [
            ((0..self.beta1_index).rev().collect::<Vec<_>>(), -1.0),
            ((self.beta1_index + 1..=m).collect::<Vec<_>>(), 1.0),
        ] {
            let mut prev = pts[self.beta1_index];
            let mut prev_log = base;
            for idx in range {
                let next = pts[idx % m];
                let anchor = z - prev;
                let integrand = |s: Complex64| (prev_log + ((z - s) / anchor).ln()) * nu(s);
                let seg = integrate_segment(integrand, prev, next, tol)?.value;
                let mass = integrate_segment(nu, prev, next, tol)?.value;
                loop_part += orient * seg;
                loop_mass += orient * mass;
                prev_log += ((z - next) / anchor).ln();
                prev = next;
            }
        }
        let interval_part = interval_integral(ctx, |x| to_log_diff(z - x))?;
        let loop_mass_re = loop_mass.re;
        let total = loop_part + interval_part;
        Ok((total + (loop_mass_re + (1.0 - ctx.a) - 1.0) * log_z, loop_mass_re))
    }

    /// `g(z)`; on `(beta1, inf)` `side` picks the one-sided value.
    pub fn eval(&self, z: Complex64, side: BoundarySide) -> Result<Complex64> {
        let (rest, _) = self.eval_parts(z, side)?;
        Ok(log_0_2pi(z, side) + rest)
    }

    /// `g(z) - Log z`, accurate also for large `|z|`.
    pub fn eval_minus_log(&self, z: Complex64, side: BoundarySide) -> Result<Complex64> {
        Ok(self.eval_parts(z, side)?.0)
    }

    /// The constant `ell` with
    /// `g(z) = (A Log z + z + ell)/2 - A pi i/2 - phi(z)` in the outer upper half plane,
    /// from evaluations at `z = i 10^3, i 10^4, i 10^5`.
    ///
    /// With `g(z) - Log z -> 0` and `arg` in `[0, 2 pi)` its imaginary part is
    /// `(2 - A) pi`; see [`GFunction::ell_constant`] for the real part.
    pub fn ell_complex(&self) -> Result<Complex64> {
        let ctx = &self.ctx;
        let mut values = Vec::with_capacity(3);
        for t in [1e3, 1e4, 1e5] {
            let z = Complex64::new(0.0, t);
            let rest = self.eval_minus_log(z, BoundarySide::OffAxis)?;
            let k = phi_linear_remainder(ctx, z)?;
            values.push(2.0 * rest + k + Complex64::new(0.0, ctx.a * PI));
        }
        let spread = values
            .iter()
            .flat_map(|u| values.iter().map(move |v| (u - v).norm()))
            .fold(0.0, f64::max);
        if spread > 10.0 * ctx.quad_tol {
            return Err(Error::NonConvergence {
                iterations: values.len(),
                worst_residual: spread,
            });
        }
        Ok(values[2])
    }

    /// `Re ell`, which fixes the growth `|P_n(x)| ~ exp(n (A log x + x + Re ell)/2)`
    /// on the interval. Fails if `Im ell` is not `(2 - A) pi`.
    pub fn ell_constant(&self) -> Result<f64> {
        let ell = self.ell_complex()?;
        let expected = (2.0 - self.ctx.a) * PI;
        if (ell.im - expected).abs() > 1e-8 {
            return Err(Error::Domain(format!(
                "Im ell = {} differs from (2 - A) pi = {expected}",
                ell.im
            )));
        }
        Ok(ell.re)
    }
}

/// `g(z)` for a context, tracing `Gamma_0` on each call; prefer
/// [`GFunction`] for repeated evaluation.
pub fn g_eval(ctx: &PotentialContext, z: Complex64, side: BoundarySide) -> Result<Complex64> {
    GFunction::new(ctx)?.eval(z, side)
}

/// `ell` for a context (see [`GFunction::ell_constant`]).
pub fn ell_constant(ctx: &PotentialContext) -> Result<f64> {
    GFunction::new(ctx)?.ell_constant()
}
