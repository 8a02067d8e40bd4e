//! Leading-order asymptotics of the scaled polynomials, for comparison with
//! exact multiprecision evaluation.
//!
//! * outer: `P_n(z) e^{-n g_n(z)} -> N11(z) = (a + 1/a)/2`, `a = ((z - beta2)/(z - beta1))^{1/4}`;
//! * oscillatory, on `(beta1, beta2)`:
//!   `L_n(n x) ~ ((-n)^n / n!) e^{n (A log x + x + Re ell)/2} sqrt(beta2 - beta1)
//!   ((beta2 - x)(x - beta1))^{-1/4} cos(n pi int_{beta2}^x rho + arcsin((2x - beta1 - beta2)/(beta2 - beta1))/2)`;
//! * n-th root: `(1/n) log |P_n(z)| -> int log|z - s| d mu(s)`.
//!
//! All constants are taken from the `A_n` context.

use std::f64::consts::PI;

use num_complex::Complex64;
use rug::{Complex, Float};
use serde::Serialize;

use crate::contour::{interval_distance, trace_gamma, ContourPolyline, TraceOptions};
use crate::error::{Error, Result};
use crate::laguerre::{eval_laguerre, monic_rescaled, LaguerreSpec};
use crate::landscape::{make_context, BoundarySide, GFunction, PotentialContext};
use crate::measure::{cdf_interval_from_beta2, MeasureSpec};
use crate::mp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Outer,
    Oscillatory,
    NthRoot,
}

/// A predicted value `value * e^{log_scale}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticPrediction {
    pub value: Complex64,
    pub log_scale: f64,
    pub regime: Regime,
    pub claimed_error_order: &'static str,
}

/// Minimum distance from `[beta1, beta2]` for the outer formula.
pub const OUTER_MARGIN: f64 = 0.2;

fn a_function(ctx: &PotentialContext, z: Complex64) -> Complex64 {
    // principal fourth roots of each factor keep the cut on [beta1, beta2]
    let w2 = (z - ctx.beta2).powf(0.25);
    let w1 = (z - ctx.beta1).powf(0.25);
    let a = w2 / w1;
    if z.im == 0.0 && z.re > ctx.beta2 {
        Complex64::new(a.re, 0.0)
    } else {
        a
    }
}

/// `N11(z)`; requires `z` outside `Gamma_0` and at least [`OUTER_MARGIN`]
/// from the interval.
pub fn outer_ratio(ctx_n: &PotentialContext, n: u32, z: Complex64) -> Result<AsymptoticPrediction> {
    let gamma = trace_gamma(ctx_n, 0.0, &TraceOptions::for_context(ctx_n))?;
    outer_ratio_with(ctx_n, &gamma, n, z)
}

/// [`outer_ratio`] against an already traced `Gamma_0`.
pub fn outer_ratio_with(
    ctx_n: &PotentialContext,
    gamma0: &ContourPolyline,
    _n: u32,
    z: Complex64,
) -> Result<AsymptoticPrediction> {
    let gap = interval_distance(ctx_n, z).min(gamma0.distance_to(z));
    if gap < OUTER_MARGIN {
        return Err(Error::AsymptoticDomain(format!(
            "{z} is within {gap:.3} of the support"
        )));
    }
    if gamma0.contains(z) {
        return Err(Error::AsymptoticDomain(format!("{z} lies inside Gamma_0")));
    }
    let a = a_function(ctx_n, z);
    Ok(AsymptoticPrediction {
        value: 0.5 * (a + 1.0 / a),
        log_scale: 0.0,
        regime: Regime::Outer,
        claimed_error_order: "O(1/n)",
    })
}

fn context_for(spec: &LaguerreSpec) -> Result<PotentialContext> {
    let a_n = spec.check_varying_regime()?;
    make_context(a_n, spec.precision_bits())
}

/// `log P_n(z)` for the monic scaled polynomial, at the spec's precision.
pub fn log_monic(spec: &LaguerreSpec, z: Complex64) -> Result<Complex64> {
    let p = monic_rescaled(spec).eval(&mp::from_c64(z, spec.precision_bits()));
    if p.real().is_zero() && p.imag().is_zero() {
        return Err(Error::Domain(format!("P_n vanishes at {z}")));
    }
    Ok(mp::to_c64(&p.ln()))
}

/// Exact `P_n(z) e^{-n g_n(z)} / N11(z) - 1`, with `g_n` from `gfun`
/// (built on the `A_n` context).
pub fn outer_relative_error(spec: &LaguerreSpec, gfun: &GFunction, z: Complex64) -> Result<f64> {
    let n = spec.n();
    let pred = outer_ratio_with(gfun.context(), gfun.contour(), n, z)?;
    let side = if z.im == 0.0 {
        BoundarySide::Above
    } else {
        BoundarySide::OffAxis
    };
    let g = gfun.eval(z, side)?;
    let ratio = (log_monic(spec, z)? - n as f64 * g).exp();
    Ok((ratio / pred.value - 1.0).norm())
}

/// Oscillatory model for one `(n, alpha)`; holds the `A_n` context and `Re ell_n`.
#[derive(Clone, Debug)]
pub struct OscillatoryModel {
    pub n: u32,
    pub ctx: PotentialContext,
    pub ell: f64,
    spec: LaguerreSpec,
    log_prefactor: f64,
}

impl OscillatoryModel {
    pub fn new(spec: &LaguerreSpec) -> Result<Self> {
        let ctx = context_for(spec)?;
        let ell = GFunction::new(&ctx)?.ell_constant()?;
        let n = spec.n();
        // log(n^n / n!)
        let prec = spec.precision_bits();
        let n_pow = Float::with_val(prec, n).ln() * n;
        let fact = Float::with_val(prec, Float::factorial(n)).ln();
        let log_prefactor = Float::with_val(prec, n_pow - fact).to_f64();
        Ok(OscillatoryModel {
            n,
            ctx,
            ell,
            spec: spec.clone(),
            log_prefactor,
        })
    }

    /// Half-width of the excluded windows at each endpoint.
    pub fn margin(&self) -> f64 {
        0.1 * self.ctx.width()
    }

    fn check(&self, x: f64) -> Result<()> {
        let m = self.margin();
        if x < self.ctx.beta1 + m || x > self.ctx.beta2 - m {
            return Err(Error::AsymptoticDomain(format!(
                "x = {x} outside [{}, {}]",
                self.ctx.beta1 + m,
                self.ctx.beta2 - m
            )));
        }
        Ok(())
    }

    /// Argument of the cosine.
    pub fn phase(&self, x: f64) -> Result<f64> {
        let c = &self.ctx;
        let integral = -cdf_interval_from_beta2(c, x)?;
        let s = ((2.0 * x - c.beta1 - c.beta2) / c.width()).clamp(-1.0, 1.0);
        Ok(self.n as f64 * PI * integral + 0.5 * s.asin())
    }

    /// Leading term for `L_n^{(alpha)}(n x)`.
    pub fn predict(&self, x: f64) -> Result<AsymptoticPrediction> {
        self.check(x)?;
        let c = &self.ctx;
        let n = self.n as f64;
        let amp = c.width().sqrt() * ((c.beta2 - x) * (x - c.beta1)).powf(-0.25);
        let sign = if self.n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let growth = 0.5 * n * (c.a * x.ln() + x + self.ell);
        Ok(AsymptoticPrediction {
            value: Complex64::new(sign * amp * self.phase(x)?.cos(), 0.0),
            log_scale: self.log_prefactor + growth,
            regime: Regime::Oscillatory,
            claimed_error_order: "O(1/n)",
        })
    }

    /// Exact `L_n^{(alpha)}(n x) e^{-log_scale}` for the prediction's scale.
    pub fn exact_scaled(&self, x: f64, log_scale: f64) -> f64 {
        let prec = self.spec.precision_bits();
        let arg = Complex::with_val(prec, (Float::with_val(prec, x) * self.n, 0));
        let v = eval_laguerre(&self.spec, &arg);
        let scale = Float::with_val(prec, -log_scale).exp();
        Float::with_val(prec, v.real() * scale).to_f64()
    }

    /// `(exact, predicted, relative error)` at `x`, both scaled by the
    /// prediction's `e^{-log_scale}`.
    pub fn compare(&self, x: f64) -> Result<(f64, f64, f64)> {
        let pred = self.predict(x)?;
        let exact = self.exact_scaled(x, pred.log_scale);
        Ok((exact, pred.value.re, (pred.value.re / exact - 1.0).abs()))
    }
}

/// Leading oscillatory term at one point (builds the model).
pub fn oscillatory_value(spec: &LaguerreSpec, x: f64) -> Result<AsymptoticPrediction> {
    OscillatoryModel::new(spec)?.predict(x)
}

/// `((1/n) log|P_n(z)|, int log|z - s| d mu(s))`.
pub fn nth_root_exponent(spec: &LaguerreSpec, measure: &MeasureSpec, z: Complex64) -> Result<(f64, f64)> {
    let empirical = log_monic(spec, z)?.re / spec.n() as f64;
    Ok((empirical, measure.log_potential(z)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u32, alpha: &str) -> LaguerreSpec {
        let s = LaguerreSpec::from_decimal(n, alpha).unwrap();
        let p = crate::laguerre::default_precision(n);
        s.with_precision(p).unwrap()
    }

    #[test]
    fn outer_basics() {
        let c = make_context(0.8, 256).unwrap();
        let far = outer_ratio(&c, 10, Complex64::new(1e8, 1e8)).unwrap();
        assert!((far.value - 1.0).norm() < 1e-8);
        let real = outer_ratio(&c, 10, Complex64::new(4.0, 0.0)).unwrap();
        assert_eq!(real.value.im, 0.0);
        assert!(matches!(
            outer_ratio(&c, 10, Complex64::new(1.0, 0.05)),
            Err(Error::AsymptoticDomain(_))
        ));
        assert!(matches!(
            outer_ratio(&c, 10, Complex64::new(0.0, 0.05)),
            Err(Error::AsymptoticDomain(_))
        ));
        assert!(matches!(
            outer_ratio(&c, 10, Complex64::new(-0.05, 0.0)),
            Err(Error::AsymptoticDomain(_))
        ));
        // conjugate symmetry
        let z = Complex64::new(-1.0, 1.5);
        let (u, v) = (
            outer_ratio(&c, 1, z).unwrap().value,
            outer_ratio(&c, 1, z.conj()).unwrap().value,
        );
        assert!((u - v.conj()).norm() < 1e-15);
    }

    #[test]
    fn outer_error_decays() {
        let alpha = |n: u32| format!("{}", -(n as f64) * 0.8 - 0.3);
        let z = Complex64::new(4.0, 0.0);
        let errs: Vec<f64> = [30u32, 60]
            .iter()
            .map(|&n| {
                let s = spec(n, &alpha(n));
                let g = GFunction::new(&context_for(&s).unwrap()).unwrap();
                outer_relative_error(&s, &g, z).unwrap()
            })
            .collect();
        assert!(errs[1] < errs[0] * 0.75, "{errs:?}");
    }

    #[test]
    fn oscillatory_structure() {
        let s = spec(40, "-32.4");
        let m = OscillatoryModel::new(&s).unwrap();
        let c = m.ctx;
        // arcsin term vanishes at the midpoint; the phase integral at beta2
        assert!((((2.0 * (0.5 * (c.beta1 + c.beta2)) - c.beta1 - c.beta2) / c.width()).asin()).abs() < 1e-15);
        assert!(cdf_interval_from_beta2(&c, c.beta2).unwrap().abs() < 1e-15);
        assert!(matches!(m.predict(c.beta1 + 0.01), Err(Error::AsymptoticDomain(_))));
    }

    #[test]
    fn oscillatory_error_is_small_and_decays() {
        let median = |n: u32| {
            let s = spec(n, &format!("{}", -(n as f64) * 0.81));
            let m = OscillatoryModel::new(&s).unwrap();
            let (lo, hi) = (m.ctx.beta1 + 0.2, m.ctx.beta2 - 0.2);
            let mut errs: Vec<f64> = (0..20)
                .filter_map(|k| {
                    let x = lo + (hi - lo) * k as f64 / 19.0;
                    (m.phase(x).unwrap().cos().abs() > 0.2).then(|| m.compare(x).unwrap().2)
                })
                .collect();
            errs.sort_by(f64::total_cmp);
            errs[errs.len() / 2]
        };
        let (e40, e80) = (median(40), median(80));
        assert!(e40 < 0.1 && e80 < 0.6 * e40, "{e40} {e80}");
    }
}
