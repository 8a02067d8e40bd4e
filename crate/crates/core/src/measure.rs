//! The limit zero-counting measures
//!
//! ```text
//! mu_r = nu_r (on Gamma_r) + rho(x) dx (on [beta1, beta2]),
//! rho(x) = sqrt((x - beta1)(beta2 - x)) / (2 pi x),
//! d nu_r = R(s) / (2 pi i s) ds   (clockwise),
//! ```
//!
//! with loop mass `A` and interval mass `1 - A`; for `r = inf` the loop
//! collapses to a point mass `A` at the origin.
//!
//! Loop integrals are taken against the complex differential along the
//! traced polyline, so they only depend on the polyline through its endpoints
//! and the region it encloses.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::contour::{trace_gamma, ContourPolyline, TraceOptions};
use crate::error::{Error, Result};
use crate::landscape::PotentialContext;
use crate::quadrature::{integrate, integrate_segment, integrate_segment_sqrt_start};

/// The level `r` of the limit problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RLevel {
    Finite(f64),
    Infinite,
}

impl RLevel {
    pub fn finite(self) -> Option<f64> {
        match self {
            RLevel::Finite(r) => Some(r),
            RLevel::Infinite => None,
        }
    }
}

impl std::fmt::Display for RLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RLevel::Finite(r) => write!(f, "{r}"),
            RLevel::Infinite => write!(f, "inf"),
        }
    }
}

fn check_interval(ctx: &PotentialContext, x: f64) -> Result<()> {
    if x >= ctx.beta1 && x <= ctx.beta2 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{x} lies outside [{}, {}]",
            ctx.beta1, ctx.beta2
        )))
    }
}

/// `rho(x)` on `[beta1, beta2]`.
pub fn mp_density(ctx: &PotentialContext, x: f64) -> Result<f64> {
    check_interval(ctx, x)?;
    Ok(((x - ctx.beta1).max(0.0) * (ctx.beta2 - x).max(0.0)).sqrt() / (2.0 * PI * x))
}

/// `x = beta1 + (beta2 - beta1) sin^2 theta` and `rho(x) dx/dtheta`.
fn theta_map(ctx: &PotentialContext, theta: f64) -> (f64, f64) {
    let w = ctx.width();
    let (s, c) = theta.sin_cos();
    let x = ctx.beta1 + w * s * s;
    (x, w * w * 2.0 * s * s * c * c / (2.0 * PI * x))
}

fn theta_of(ctx: &PotentialContext, x: f64) -> f64 {
    let u = ((x - ctx.beta1) / ctx.width()).clamp(0.0, 1.0);
    u.sqrt().asin()
}

/// `int_{beta1}^{beta2} f(x) rho(x) dx`.
pub fn interval_integral<F: Fn(f64) -> Complex64>(ctx: &PotentialContext, f: F) -> Result<Complex64> {
    let est = integrate(
        |t| {
            let (x, w) = theta_map(ctx, t);
            f(x) * w
        },
        0.0,
        0.5 * PI,
        ctx.quad_tol,
    )?;
    Ok(est.value)
}

/// `int_{beta1}^{x} rho`.
pub fn cdf_interval(ctx: &PotentialContext, x: f64) -> Result<f64> {
    check_interval(ctx, x)?;
    let theta = theta_of(ctx, x);
    let est = integrate(|t| Complex64::new(theta_map(ctx, t).1, 0.0), 0.0, theta, ctx.quad_tol)?;
    Ok(est.value.re)
}

/// `int_{x}^{beta2} rho`, accurate near `beta2`.
pub fn cdf_interval_from_beta2(ctx: &PotentialContext, x: f64) -> Result<f64> {
    check_interval(ctx, x)?;
    let theta = theta_of(ctx, x);
    let est = integrate(
        |t| Complex64::new(theta_map(ctx, t).1, 0.0),
        theta,
        0.5 * PI,
        ctx.quad_tol,
    )?;
    Ok(est.value.re)
}

/// The point `x` with `int_{beta1}^{x} rho = u (1 - A)`, `u` in `[0, 1]`.
pub fn interval_quantile(ctx: &PotentialContext, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain(format!("quantile level {u} outside [0, 1]")));
    }
    let target = u * (1.0 - ctx.a);
    let (mut lo, mut hi) = (0.0, 0.5 * PI);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        let est = integrate(|t| Complex64::new(theta_map(ctx, t).1, 0.0), 0.0, mid, ctx.quad_tol)?;
        if est.value.re < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(theta_map(ctx, 0.5 * (lo + hi)).0)
}

/// `|R(z)| / (2 pi |z|)`: the density of `nu_r` per unit arclength on the
/// exact level curve.
pub fn nu_arclength_density(ctx: &PotentialContext, z: Complex64) -> f64 {
    ctx.r_over_s(z).norm() / (2.0 * PI)
}

fn nu_differential(ctx: &PotentialContext, s: Complex64) -> Complex64 {
    ctx.r_over_s(s) / Complex64::new(0.0, 2.0 * PI)
}

/// `int_a^b R(s)/(2 pi i s) ds`, with the square-root endpoint at `beta1`
/// handled by substitution.
fn nu_segment(ctx: &PotentialContext, a: Complex64, b: Complex64) -> Result<Complex64> {
    let beta1 = Complex64::new(ctx.beta1, 0.0);
    let f = |s| nu_differential(ctx, s);
    if a == beta1 {
        Ok(integrate_segment_sqrt_start(f, a, b, ctx.quad_tol)?.value)
    } else if b == beta1 {
        Ok(-integrate_segment_sqrt_start(f, b, a, ctx.quad_tol)?.value)
    } else {
        Ok(integrate_segment(f, a, b, ctx.quad_tol)?.value)
    }
}

/// Cumulative loop mass at each polyline vertex; `total` includes the
/// closing segment.
#[derive(Clone, Debug)]
pub struct LoopCdf {
    pub cumulative: Vec<f64>,
    pub total: f64,
}

impl LoopCdf {
    /// Normalized CDF value at a point on segment `k` with parameter `t`.
    pub fn at(&self, k: usize, t: f64) -> f64 {
        let m = self.cumulative.len();
        let lo = self.cumulative[k];
        let hi = if k + 1 < m { self.cumulative[k + 1] } else { self.total };
        (lo + t * (hi - lo)) / self.total
    }
}

/// A limit measure `mu_r` for one `(A, r)`.
#[derive(Clone, Debug)]
pub struct MeasureSpec {
    pub ctx: PotentialContext,
    pub r: RLevel,
    pub gamma: Option<ContourPolyline>,
}

impl MeasureSpec {
    /// Traces `Gamma_r` when `r` is finite and no contour is supplied.
    pub fn new(ctx: PotentialContext, r: RLevel, gamma: Option<ContourPolyline>) -> Result<Self> {
        let gamma = match (r, gamma) {
            (RLevel::Infinite, _) => None,
            (RLevel::Finite(_), Some(g)) => Some(g),
            (RLevel::Finite(r), None) => Some(trace_gamma(&ctx, r, &TraceOptions::for_context(&ctx))?),
        };
        Ok(MeasureSpec { ctx, r, gamma })
    }

    fn contour(&self) -> Result<&ContourPolyline> {
        self.gamma
            .as_ref()
            .ok_or_else(|| Error::Domain("r = inf has no loop contour".into()))
    }

    /// Mass of each polyline segment (the last one closes the loop).
    pub fn segment_masses(&self) -> Result<Vec<f64>> {
        let g = self.contour()?;
        g.segments().map(|(a, b)| Ok(nu_segment(&self.ctx, a, b)?.re)).collect()
    }

    /// Loop mass by the complex differential along the polyline; `A` for
    /// `r = inf`.
    pub fn loop_mass(&self) -> Result<f64> {
        if self.r == RLevel::Infinite {
            return Ok(self.ctx.a);
        }
        Ok(self.segment_masses()?.iter().sum())
    }

    /// Loop mass by the trapezoidal rule on `nu_arclength_density`.
    pub fn loop_mass_trapezoid(&self) -> Result<f64> {
        let g = self.contour()?;
        Ok(g.segments()
            .map(|(a, b)| {
                0.5 * (nu_arclength_density(&self.ctx, a) + nu_arclength_density(&self.ctx, b)) * (b - a).norm()
            })
            .sum())
    }

    /// `nu_arclength_density` at a point of the traced curve.
    pub fn arclength_density(&self, p: Complex64) -> Result<f64> {
        let g = self.contour()?;
        if g.distance_to(p) > g.max_step {
            return Err(Error::Domain(format!("{p} is not on Gamma_r")));
        }
        Ok(nu_arclength_density(&self.ctx, p))
    }

    pub fn interval_mass(&self) -> Result<f64> {
        cdf_interval(&self.ctx, self.ctx.beta2)
    }

    pub fn loop_cdf(&self) -> Result<LoopCdf> {
        let masses = self.segment_masses()?;
        let mut cumulative = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            cumulative.push(acc);
            acc += m;
        }
        Ok(LoopCdf { cumulative, total: acc })
    }

    /// The point at normalized loop-CDF level `u`, interpolated within a
    /// segment.
    pub fn loop_quantile(&self, cdf: &LoopCdf, u: f64) -> Complex64 {
        let g = self.gamma.as_ref().expect("loop quantile needs a contour");
        let target = u.clamp(0.0, 1.0) * cdf.total;
        let m = g.points.len();
        let k = match cdf.cumulative.partition_point(|c| *c <= target) {
            0 => 0,
            i => i - 1,
        };
        let lo = cdf.cumulative[k];
        let hi = if k + 1 < m { cdf.cumulative[k + 1] } else { cdf.total };
        let t = if hi > lo {
            ((target - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (g.points[k], g.points[(k + 1) % m]);
        a + (b - a) * t
    }

    /// Normalized loop-CDF value of the polyline point nearest `z`.
    pub fn loop_cdf_at(&self, cdf: &LoopCdf, z: Complex64) -> Result<f64> {
        let (k, t) = self.contour()?.nearest(z);
        Ok(cdf.at(k, t))
    }

    /// `int log|z - s| d mu_r(s)`.
    pub fn log_potential(&self, z: Complex64) -> Result<f64> {
        let interval = interval_integral(&self.ctx, |x| Complex64::new((z - x).norm().ln(), 0.0))?.re;
        let lp = match self.r {
            RLevel::Infinite => self.ctx.a * z.norm().ln(),
            RLevel::Finite(_) => self.loop_log_potential(z)?,
        };
        Ok(lp + interval)
    }

    fn loop_log_potential(&self, z: Complex64) -> Result<f64> {
        let g = self.contour()?;
        if g.distance_to(z) < g.max_step {
            return Err(Error::Domain(format!("{z} lies on Gamma_r")));
        }
        let mut total = Complex64::new(0.0, 0.0);
        let mut log_prev = (z - g.points[0]).ln();
        for (a, b) in g.segments() {
            let anchor = z - a;
            let integrand = |s: Complex64| (log_prev + ((z - s) / anchor).ln()) * nu_differential(&self.ctx, s);
            let beta1 = Complex64::new(self.ctx.beta1, 0.0);
            let seg = if a == beta1 {
                integrate_segment_sqrt_start(integrand, a, b, self.ctx.quad_tol)?.value
            } else if b == beta1 {
                -integrate_segment_sqrt_start(integrand, b, a, self.ctx.quad_tol)?.value
            } else {
                integrate_segment(integrand, a, b, self.ctx.quad_tol)?.value
            };
            total += seg;
            log_prev += ((z - b) / anchor).ln();
        }
        Ok(total.re)
    }

    /// Writes the interval density as `x,density` on `samples + 1` points.
    pub fn write_interval_csv<W: Write>(&self, out: W, samples: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "density"])?;
        for k in 0..=samples {
            let x = (self.ctx.beta1 + self.ctx.width() * k as f64 / samples as f64).min(self.ctx.beta2);
            let row = [x, mp_density(&self.ctx, x)?];
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        Ok(w.flush()?)
    }

    /// Writes the loop density as `re,im,arclength,density`.
    pub fn write_loop_csv<W: Write>(&self, out: W) -> Result<()> {
        let g = self.contour()?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "arclength", "density"])?;
        for (p, s) in g.points.iter().zip(&g.arclengths) {
            let row = [p.re, p.im, *s, nu_arclength_density(&self.ctx, *p)];
            w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        Ok(w.flush()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::make_context;
    use proptest::prelude::*;

    fn ctx() -> PotentialContext {
        make_context(0.81, 256).unwrap()
    }

    #[test]
    fn interval_mass_is_one_minus_a() {
        for a in [0.2, 0.5, 0.81, 0.99] {
            let c = make_context(a, 256).unwrap();
            assert!((cdf_interval(&c, c.beta2).unwrap() - (1.0 - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn density_matches_theta_substitution() {
        let c = ctx();
        // plain quadrature in x with a sqrt-endpoint split as an oracle
        let mid = 0.5 * (c.beta1 + c.beta2);
        let f = |x: f64| Complex64::new(mp_density(&c, x).unwrap(), 0.0);
        let left = integrate(
            |u| f(c.beta1 + (mid - c.beta1) * u * u) * 2.0 * u * (mid - c.beta1),
            0.0,
            1.0,
            1e-13,
        )
        .unwrap()
        .value
        .re;
        assert!((cdf_interval(&c, mid).unwrap() - left).abs() < 1e-11);
    }

    #[test]
    fn density_values() {
        let c = make_context(0.75, 256).unwrap();
        assert_eq!(mp_density(&c, c.beta1).unwrap(), 0.0);
        assert_eq!(mp_density(&c, c.beta2).unwrap(), 0.0);
        assert!((mp_density(&c, 1.0).unwrap() - 0.9375f64.sqrt() / (2.0 * PI)).abs() < 1e-15);
        assert!(matches!(mp_density(&c, 3.0), Err(Error::Domain(_))));
        assert_eq!(cdf_interval(&c, c.beta1).unwrap(), 0.0);
    }

    #[test]
    fn arclength_density_at_crossing() {
        let c = make_context(0.8, 256).unwrap();
        let m = MeasureSpec::new(c, RLevel::Finite(0.0), None).unwrap();
        let x = m.gamma.as_ref().unwrap().points[0].re;
        let expected = ((x - c.beta1) * (x - c.beta2)).sqrt() / (2.0 * PI * x.abs());
        assert!((m.arclength_density(Complex64::new(x, 0.0)).unwrap() - expected).abs() < 1e-14);
        // R vanishes only at the corner beta1
        let g = m.gamma.as_ref().unwrap();
        let corner = g.beta1_index.unwrap();
        assert!(g
            .points
            .iter()
            .enumerate()
            .all(|(k, p)| k == corner || m.arclength_density(*p).unwrap() > 0.0));
        assert!(m.arclength_density(Complex64::new(5.0, 0.0)).is_err());
    }

    #[test]
    fn loop_mass_is_a() {
        let c = ctx();
        for r in [0.0, 0.3, 2.0] {
            let m = MeasureSpec::new(c, RLevel::Finite(r), None).unwrap();
            assert!((m.loop_mass().unwrap() - 0.81).abs() < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        let c = ctx();
        let base = TraceOptions::for_context(&c);
        let err = |k: f64| {
            let g = trace_gamma(&c, 0.5, &base.with_max_step(base.max_step * k)).unwrap();
            let m = MeasureSpec::new(c, RLevel::Finite(0.5), Some(g)).unwrap();
            (m.loop_mass_trapezoid().unwrap() - 0.81).abs()
        };
        let (e1, e2) = (err(1.0), err(0.5));
        assert!(e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn quantiles_invert_cdfs() {
        let c = ctx();
        for u in [0.1, 0.5, 0.9] {
            let x = interval_quantile(&c, u).unwrap();
            assert!((cdf_interval(&c, x).unwrap() / (1.0 - c.a) - u).abs() < 1e-10);
        }
        let m = MeasureSpec::new(c, RLevel::Finite(0.0), None).unwrap();
        let cdf = m.loop_cdf().unwrap();
        for u in [0.2, 0.5, 0.75] {
            let z = m.loop_quantile(&cdf, u);
            assert!((m.loop_cdf_at(&cdf, z).unwrap() - u).abs() < 1e-9);
        }
    }

    #[test]
    fn potential_tends_to_log_at_infinity() {
        let c = ctx();
        let m = MeasureSpec::new(c, RLevel::Finite(0.0), None).unwrap();
        let z = Complex64::new(3e3, 4e3);
        assert!((m.log_potential(z).unwrap() - z.norm().ln()).abs() < 1e-3);
        let inf = MeasureSpec::new(c, RLevel::Infinite, None).unwrap();
        assert!((inf.log_potential(z).unwrap() - z.norm().ln()).abs() < 1e-3);
    }

    #[test]
    fn loop_potential_matches_arclength_sum_off_contour() {
        // on the exact curve d nu is real, so a fine arclength sum of
        // log|z - s| d nu approximates the same value
        let c = ctx();
        let base = TraceOptions::for_context(&c);
        let g = trace_gamma(&c, 0.5, &base.with_max_step(base.max_step / 4.0)).unwrap();
        let m = MeasureSpec::new(c, RLevel::Finite(0.5), Some(g.clone())).unwrap();
        let z = Complex64::new(0.9, 0.7);
        let exact = m.loop_log_potential(z).unwrap();
        let approx: f64 = g
            .segments()
            .map(|(a, b)| {
                let s = 0.5 * (a + b);
                (z - s).norm().ln() * nu_arclength_density(&c, s) * (b - a).norm()
            })
            .sum();
        assert!((exact - approx).abs() < 1e-5, "{exact} {approx}");
    }

    proptest! {
        #[test]
        fn cdf_halves_add_up(u in 0.01f64..0.99) {
            let c = ctx();
            let x = c.beta1 + u * c.width();
            let total = cdf_interval(&c, x).unwrap() + cdf_interval_from_beta2(&c, x).unwrap();
            prop_assert!((total - (1.0 - c.a)).abs() < 1e-12);
        }
    }
}
