//! Experiments on the zeros of `L_n^{(alpha_n)}(n z)`: parameter plans with a
//! prescribed distance of `alpha_n` to the integers, zero computation, and
//! comparison with the predicted limit support and distribution.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use crate::contour::{interval_distance, trace_gamma, ContourPolyline, TraceOptions};
use crate::error::{Error, Result};
use crate::laguerre::{
    default_precision, exact_scaled_monic, integer_reduction, monic_rescaled, CoefficientList, LaguerreSpec,
};
use crate::landscape::{make_context, PotentialContext};
use crate::measure::{cdf_interval, MeasureSpec, RLevel};
use crate::rootfinder::{certify, find_zeros_with_retry, initial_guesses, AberthOptions, SeedPlan, ZeroSet};
use crate::stats::ks_uniform;

const DIST_PRECISION: u32 = 256;

/// `min_k |alpha - k|`, exact.
pub fn dist_to_integers_exact(alpha: &Rational) -> Rational {
    let frac = alpha.clone() - alpha.clone().floor();
    let other = Rational::from(1) - &frac;
    if frac < other {
        frac
    } else {
        other
    }
}

/// `min_k |alpha - k|` rounded to f64.
pub fn dist_to_integers(alpha: &Rational) -> f64 {
    dist_to_integers_exact(alpha).to_f64()
}

/// `-(1/n) log dist(alpha, Z)`, or `None` for an integer.
pub fn r_hat(n: u32, alpha: &Rational) -> Option<f64> {
    let d = dist_to_integers_exact(alpha);
    if d == 0 {
        return None;
    }
    let ln = Float::with_val(DIST_PRECISION, &d).ln();
    Some(Float::with_val(DIST_PRECISION, -ln / n).to_f64())
}

/// Parameters `alpha_i` for a sequence of degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterPlan {
    pub a: f64,
    pub r: RLevel,
    pub n_values: Vec<u32>,
    pub alphas: Vec<Rational>,
}

impl ParameterPlan {
    /// A plan with explicit decimal parameters.
    pub fn from_alphas(a: f64, r: RLevel, n_values: &[u32], alphas: &[&str]) -> Result<Self> {
        if n_values.len() != alphas.len() {
            return Err(Error::Plan("one alpha per n is required".into()));
        }
        let alphas = alphas
            .iter()
            .map(|s| crate::laguerre::parse_decimal(s))
            .collect::<Result<Vec<_>>>()?;
        for (&n, alpha) in n_values.iter().zip(&alphas) {
            check_alpha(n, alpha)?;
        }
        Ok(ParameterPlan {
            a,
            r,
            n_values: n_values.to_vec(),
            alphas,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Rational)> {
        self.n_values.iter().copied().zip(&self.alphas)
    }
}

fn check_alpha(n: u32, alpha: &Rational) -> Result<()> {
    let minus_n = Rational::from(-(n as i64));
    if *alpha >= 0 || *alpha <= minus_n {
        return Err(Error::Plan(format!(
            "alpha = {} must lie strictly between -{n} and 0",
            alpha.to_f64()
        )));
    }
    Ok(())
}

/// `alpha_i = round(-n_i A) + d_i` with `d_i = min(1/2, e^{-r n_i})`, shifted by
/// one if needed to keep `-alpha_i / n_i` in `(0, 1)`; integers for `r = inf`.
pub fn make_plan(a: f64, r: RLevel, n_values: &[u32]) -> Result<ParameterPlan> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Plan(format!("A = {a} must lie in (0, 1)")));
    }
    let mut alphas = Vec::with_capacity(n_values.len());
    for &n in n_values {
        if n < 2 {
            return Err(Error::Plan(format!("n = {n} is too small")));
        }
        let base = (-(n as f64) * a).round() as i64;
        let alpha = match r {
            RLevel::Infinite => {
                let k = base.clamp(-(n as i64) + 1, -1);
                Rational::from(k)
            }
            RLevel::Finite(r) => {
                if r.is_nan() || r < 0.0 {
                    return Err(Error::Plan(format!("r = {r} must be non-negative")));
                }
                let e = Float::with_val(DIST_PRECISION, -r * n as f64).exp();
                let half = Float::with_val(DIST_PRECISION, 0.5);
                let d = e.min(&half).to_rational().expect("finite");
                if d == 0 {
                    return Err(Error::Plan(format!("e^(-r n) underflows for r = {r}, n = {n}")));
                }
                let mut k = base;
                if k >= 0 {
                    k = -1;
                }
                Rational::from(k) + d
            }
        };
        check_alpha(n, &alpha)?;
        alphas.push(alpha);
    }
    Ok(ParameterPlan {
        a,
        r,
        n_values: n_values.to_vec(),
        alphas,
    })
}

/// Tolerances for [`run_comparison`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonOptions {
    pub classify_tol: f64,
    /// Root-finding precision; raised for near-integer parameters when `None`.
    pub precision_bits: Option<u32>,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        ComparisonOptions {
            classify_tol: 0.1,
            precision_bits: None,
        }
    }
}

/// Summary of one `(n, alpha)` comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub n: u32,
    pub alpha: f64,
    /// `null` for integer `alpha`.
    pub r_hat: Option<f64>,
    pub max_deviation: f64,
    pub loop_count: usize,
    pub interval_count: usize,
    pub outlier_count: usize,
    pub ks_interval: f64,
    pub ks_loop: f64,
    pub mass_error: f64,
    pub residual_max: f64,
    pub origin_multiplicity: u32,
    /// False when certification flagged any zero.
    pub valid: bool,
}

/// Where a zero was assigned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroClass {
    Interval,
    Loop,
    Outlier,
}

/// Zeros and predicted support for one `(n, alpha)`, reusable across
/// classification tolerances.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub n: u32,
    pub alpha: Rational,
    pub ctx: PotentialContext,
    pub r_hat: RLevel,
    pub zeros: ZeroSet,
    pub measure: MeasureSpec,
}

/// Working precision: the default, raised by `10 ceil(-log2 dist)` bits for
/// near-integer parameters.
pub fn working_precision(n: u32, alpha: &Rational) -> u32 {
    let d = dist_to_integers(alpha);
    let base = default_precision(n);
    if d == 0.0 {
        return base;
    }
    base.max(4 * n + 10 * (-d.log2()).ceil().max(0.0) as u32)
}

fn root_tolerance(prec: u32) -> f64 {
    (-(prec as f64) / 2.0).exp2()
}

/// Computes the zeros of `L_n^{(alpha)}(n z)` (monic form), reducing integer
/// parameters, and certifies them at doubled precision.
pub fn compute_zeros(n: u32, alpha: &Rational, ctx: &PotentialContext, r: RLevel, prec: u32) -> Result<ZeroSet> {
    let tol = root_tolerance(prec);
    if *alpha.denom() == 1 {
        let red = integer_reduction(n, alpha)?;
        let m = red.reduced_degree;
        if m == 0 {
            return Ok(ZeroSet {
                zeros: Vec::new(),
                residuals: Vec::new(),
                origin_multiplicity: red.multiplicity,
                precision_bits: prec,
                threshold: tol,
                suspect: Vec::new(),
                iterations: 0,
            });
        }
        let beta = Rational::from(red.reduced_alpha);
        let build = |p: u32| CoefficientList::from_rationals(&exact_scaled_monic(m, &beta, n), p);
        // zeros of the reduced factor all lie on the interval
        let seeds = (0..m as usize)
            .map(|k| {
                let u = (k as f64 + 0.5) / m as f64;
                let x = crate::measure::interval_quantile(ctx, u).unwrap_or(1.0);
                Complex64::new(x, if k % 2 == 0 { 1e-3 } else { -1e-3 })
            })
            .collect();
        let opts = AberthOptions {
            seeds: Some(seeds),
            ..Default::default()
        };
        let zs = find_zeros_with_retry(build, prec, tol, &opts)?;
        let mut zs = certify(&build(zs.precision_bits), &zs);
        zs.origin_multiplicity = red.multiplicity;
        return Ok(zs);
    }
    let spec = LaguerreSpec::new(n, alpha.clone(), prec)?;
    let build = |p: u32| monic_rescaled(&spec.with_precision(p).expect("valid precision"));
    let coeffs = build(prec);
    let radius = crate::rootfinder::cauchy_radius(&coeffs);
    let seeds = initial_guesses(
        n as usize,
        SeedPlan::Predicted {
            ctx,
            r_hat: r,
            fallback_radius: radius,
        },
    );
    let opts = AberthOptions {
        seeds: Some(seeds),
        ..Default::default()
    };
    let zs = find_zeros_with_retry(build, prec, tol, &opts)?;
    Ok(certify(&build(zs.precision_bits), &zs))
}

impl Comparison {
    pub fn compute(n: u32, alpha: &Rational, opts: &ComparisonOptions) -> Result<Self> {
        let spec = LaguerreSpec::new(n, alpha.clone(), default_precision(n))?;
        let a_n = spec.check_varying_regime()?;
        let ctx = make_context(a_n, spec.precision_bits())?;
        let r_hat = r_hat(n, alpha).map_or(RLevel::Infinite, RLevel::Finite);
        let prec = opts.precision_bits.unwrap_or_else(|| working_precision(n, alpha));
        let zeros = compute_zeros(n, alpha, &ctx, r_hat, prec)?;
        let gamma = match r_hat {
            RLevel::Finite(r) => Some(trace_gamma(&ctx, r, &TraceOptions::for_context(&ctx))?),
            RLevel::Infinite => None,
        };
        let measure = MeasureSpec::new(ctx, r_hat, gamma)?;
        Ok(Comparison {
            n,
            alpha: alpha.clone(),
            ctx,
            r_hat,
            zeros,
            measure,
        })
    }

    fn gamma(&self) -> Option<&ContourPolyline> {
        self.measure.gamma.as_ref()
    }

    /// Distances `(to interval, to loop)`; the loop is the origin for `r = inf`.
    fn distances(&self, z: Complex64) -> (f64, f64) {
        let d_loop = match self.gamma() {
            Some(g) => g.distance_to(z),
            None => z.norm(),
        };
        (interval_distance(&self.ctx, z), d_loop)
    }

    /// Assigns each computed zero to the nearer of the two predicted pieces
    /// when within `delta` of it.
    pub fn classify(&self, delta: f64) -> Vec<ZeroClass> {
        self.zeros
            .zeros_f64()
            .iter()
            .map(|&z| {
                let (di, dl) = self.distances(z);
                if di.min(dl) > delta {
                    ZeroClass::Outlier
                } else if di <= dl {
                    ZeroClass::Interval
                } else {
                    ZeroClass::Loop
                }
            })
            .collect()
    }

    pub fn report(&self, delta: f64) -> Result<ComparisonReport> {
        let zeros = self.zeros.zeros_f64();
        let classes = self.classify(delta);
        let count = |c: ZeroClass| classes.iter().filter(|&&k| k == c).count();
        let (interval_count, loop_count, outlier_count) = (
            count(ZeroClass::Interval),
            count(ZeroClass::Loop),
            count(ZeroClass::Outlier),
        );
        let max_deviation = zeros
            .iter()
            .map(|&z| {
                let (di, dl) = self.distances(z);
                di.min(dl)
            })
            .fold(0.0, f64::max);

        let a_n = self.ctx.a;
        let interval_u = zeros
            .iter()
            .zip(&classes)
            .filter(|(_, c)| **c == ZeroClass::Interval)
            .map(|(z, _)| {
                let x = z.re.clamp(self.ctx.beta1, self.ctx.beta2);
                Ok(cdf_interval(&self.ctx, x)? / (1.0 - a_n))
            })
            .collect::<Result<Vec<f64>>>()?;
        let ks_loop = match self.gamma() {
            Some(_) => {
                let cdf = self.measure.loop_cdf()?;
                let u = zeros
                    .iter()
                    .zip(&classes)
                    .filter(|(_, c)| **c == ZeroClass::Loop)
                    .map(|(z, _)| self.measure.loop_cdf_at(&cdf, *z))
                    .collect::<Result<Vec<f64>>>()?;
                ks_uniform(&u)
            }
            None => 0.0,
        };
        let origin = self.zeros.origin_multiplicity;
        let loop_fraction = (loop_count as f64 + origin as f64) / self.n as f64;
        Ok(ComparisonReport {
            n: self.n,
            alpha: self.alpha.to_f64(),
            r_hat: self.r_hat.finite(),
            max_deviation,
            loop_count,
            interval_count,
            outlier_count,
            ks_interval: ks_uniform(&interval_u),
            ks_loop,
            mass_error: (loop_fraction - a_n).abs(),
            residual_max: self.zeros.max_residual(),
            origin_multiplicity: origin,
            valid: self.zeros.suspect.is_empty(),
        })
    }
}

/// Computes zeros for `(n, alpha)` and compares them with the limit set of
/// level `r_hat = -(1/n) log dist(alpha, Z)`.
pub fn run_comparison(n: u32, alpha: &Rational, opts: &ComparisonOptions) -> Result<ComparisonReport> {
    Comparison::compute(n, alpha, opts)?.report(opts.classify_tol)
}

/// Reports per `n` (sorted) and the trend checks that failed.
#[derive(Clone, Debug, Serialize)]
pub struct StudyResult {
    pub reports: Vec<ComparisonReport>,
    pub violations: Vec<String>,
}

/// Relative slack allowed in the non-increasing trend checks.
pub const TREND_SLACK: f64 = 0.2;

pub fn convergence_study(plan: &ParameterPlan, opts: &ComparisonOptions) -> Result<StudyResult> {
    let mut reports = plan
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(n, alpha)| run_comparison(n, alpha, opts))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| r.n);
    let mut violations = Vec::new();
    for w in reports.windows(2) {
        let checks = [
            ("max_deviation", w[0].max_deviation, w[1].max_deviation),
            ("ks_interval", w[0].ks_interval, w[1].ks_interval),
            ("ks_loop", w[0].ks_loop, w[1].ks_loop),
        ];
        for (name, before, after) in checks {
            if after > (1.0 + TREND_SLACK) * before {
                violations.push(format!(
                    "{name} rose from {before:.4e} (n = {}) to {after:.4e} (n = {})",
                    w[0].n, w[1].n
                ));
            }
        }
    }
    Ok(StudyResult { reports, violations })
}

/// Writes `n,alpha,r_hat,max_deviation,ks_interval,ks_loop,mass_error`.
pub fn write_summary_csv<W: Write>(reports: &[ComparisonReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "alpha",
        "r_hat",
        "max_deviation",
        "ks_interval",
        "ks_loop",
        "mass_error",
    ])?;
    for r in reports {
        let r_hat = r.r_hat.map_or_else(|| "inf".to_string(), |v| format!("{v:.17e}"));
        w.write_record([
            r.n.to_string(),
            format!("{}", r.alpha),
            r_hat,
            format!("{:.17e}", r.max_deviation),
            format!("{:.17e}", r.ks_interval),
            format!("{:.17e}", r.ks_loop),
            format!("{:.17e}", r.mass_error),
        ])?;
    }
    Ok(w.flush()?)
}
