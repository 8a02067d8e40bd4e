//! Simultaneous computation of all zeros of a monic polynomial with the
//! Aberth–Ehrlich iteration at arbitrary precision.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rug::{Assign, Complex, Float};

use crate::contour::{trace_gamma, TraceOptions};
use crate::error::{Error, Result};
use crate::laguerre::CoefficientList;
use crate::landscape::PotentialContext;
use crate::measure::{interval_quantile, MeasureSpec, RLevel};
use crate::mp;

pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Zeros of a polynomial with residual certificates.
///
/// `zeros` excludes the `origin_multiplicity` zeros placed exactly at the
/// origin by an integer-parameter reduction.
#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub zeros: Vec<Complex>,
    /// `|P(z)| / max(1, |z|)^n` per zero.
    pub residuals: Vec<f64>,
    pub origin_multiplicity: u32,
    pub precision_bits: u32,
    /// Residual bound the set was certified against.
    pub threshold: f64,
    /// Indices whose doubled-precision residual exceeded 4x the original.
    pub suspect: Vec<usize>,
    pub iterations: usize,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Total degree including the zeros at the origin.
    pub fn degree(&self) -> usize {
        self.zeros.len() + self.origin_multiplicity as usize
    }

    pub fn zeros_f64(&self) -> Vec<Complex64> {
        self.zeros.iter().map(mp::to_c64).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Zeros with `|Im z| <= imag_tol` and positive real part.
    pub fn count_positive_real(&self, imag_tol: f64) -> usize {
        self.zeros_f64()
            .iter()
            .filter(|z| z.im.abs() <= imag_tol && z.re > 0.0)
            .count()
    }

    pub fn count_negative_real(&self, imag_tol: f64) -> usize {
        self.zeros_f64()
            .iter()
            .filter(|z| z.im.abs() <= imag_tol && z.re < 0.0)
            .count()
    }
}

/// Where the starting points of the iteration come from.
#[derive(Clone, Copy, Debug)]
pub enum SeedPlan<'a> {
    /// Equally spaced points on a circle about the origin.
    Circle { radius: f64 },
    /// Quantiles of the predicted limit distribution for the parameter
    /// `ctx.a` and level `r_hat`; falls back to a circle of `fallback_radius`.
    Predicted {
        ctx: &'a PotentialContext,
        r_hat: RLevel,
        fallback_radius: f64,
    },
}

/// Cauchy radius of a monic polynomial: the positive root of
/// `z^n = sum_{k<n} |c_k| z^k`, an upper bound for the moduli of the zeros.
pub fn cauchy_radius(coeffs: &CoefficientList) -> f64 {
    let n = coeffs.degree();
    let logs: Vec<(f64, f64)> = coeffs.coeffs()[..n]
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k as f64, Float::with_val(c.prec(), c.abs_ref()).ln().to_f64()))
        .collect();
    if logs.is_empty() {
        return 0.0;
    }
    // sum_k |c_k| rho^(k - n) is decreasing in rho; bisect on log(rho) for the value 1
    let excess = |t: f64| logs.iter().map(|&(k, lc)| (lc + (k - n as f64) * t).exp()).sum::<f64>() - 1.0;
    let bound = logs.iter().map(|&(k, lc)| lc / (n as f64 - k)).fold(f64::MIN, f64::max);
    let (mut lo, mut hi) = (bound, bound + (n as f64).ln() + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

fn circle(n: usize, radius: f64, center: Complex64, phase: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| center + Complex64::from_polar(radius, phase + 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Starting points for `n` zeros.
///
/// With a predicted plan, `ceil(n A)` points are spread by quantiles of the
/// loop measure along the level curve (or on a small circle about 0 when the
/// level is infinite) and the rest by quantiles of the interval density.
pub fn initial_guesses(n: usize, plan: SeedPlan<'_>) -> Vec<Complex64> {
    match plan {
        SeedPlan::Circle { radius } => circle(n, radius, Complex64::new(0.0, 0.0), 0.5 * PI / n as f64),
        SeedPlan::Predicted {
            ctx,
            r_hat,
            fallback_radius,
        } => predicted_seeds(n, ctx, r_hat)
            .unwrap_or_else(|_| circle(n, fallback_radius, Complex64::new(0.0, 0.0), 0.5 * PI / n as f64)),
    }
}

/// Number of seeds placed on the loop part: `ceil(n A)`, capped at `n`.
pub fn loop_seed_count(n: usize, a: f64) -> usize {
    ((n as f64 * a - 1e-9).ceil().max(0.0) as usize).min(n)
}

fn predicted_seeds(n: usize, ctx: &PotentialContext, r_hat: RLevel) -> Result<Vec<Complex64>> {
    let n_loop = loop_seed_count(n, ctx.a);
    let n_interval = n - n_loop;
    let mut seeds = Vec::with_capacity(n);
    match r_hat {
        RLevel::Infinite => {
            seeds.extend(circle(
                n_loop,
                0.05,
                Complex64::new(0.0, 0.0),
                0.5 * PI / n_loop.max(1) as f64,
            ));
        }
        RLevel::Finite(r) => {
            if n_loop > 0 {
                let gamma = trace_gamma(ctx, r, &TraceOptions::for_context(ctx))?;
                let spec = MeasureSpec::new(*ctx, RLevel::Finite(r), Some(gamma))?;
                let cdf = spec.loop_cdf()?;
                for k in 0..n_loop {
                    // offset by a quarter step so no seed lands on the real axis
                    let u = (k as f64 + 0.25) / n_loop as f64;
                    seeds.push(spec.loop_quantile(&cdf, u));
                }
            }
        }
    }
    for k in 0..n_interval {
        let u = (k as f64 + 0.5) / n_interval as f64;
        let x = interval_quantile(ctx, u)?;
        let wobble = if k % 2 == 0 { 1e-3 } else { -1e-3 };
        seeds.push(Complex64::new(x, wobble));
    }
    Ok(seeds)
}

/// Options for [`find_zeros_with`].
#[derive(Clone, Debug)]
pub struct AberthOptions {
    pub max_iterations: usize,
    pub seeds: Option<Vec<Complex64>>,
}

impl Default for AberthOptions {
    fn default() -> Self {
        AberthOptions {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            seeds: None,
        }
    }
}

fn scaled_residual(coeffs: &[Float], z: &Complex, prec: u32) -> f64 {
    let n = coeffs.len() - 1;
    let p = mp::horner(coeffs, z, prec);
    let ln_p = mp::ln_abs(&p);
    let ln_scale = n as f64 * mp::ln_abs(z).max(0.0);
    (ln_p - ln_scale).exp()
}

/// All zeros of the monic polynomial `coeffs` with `|P(z)|/max(1,|z|)^n <= tol`.
pub fn find_zeros(coeffs: &CoefficientList, precision_bits: u32, tol: f64) -> Result<ZeroSet> {
    find_zeros_with(coeffs, precision_bits, tol, &AberthOptions::default())
}

pub fn find_zeros_with(
    coeffs: &CoefficientList,
    precision_bits: u32,
    tol: f64,
    opts: &AberthOptions,
) -> Result<ZeroSet> {
    if !coeffs.is_monic() {
        return Err(Error::Domain("find_zeros needs a monic polynomial".into()));
    }
    let floor = (-(precision_bits as f64) / 2.0).exp2();
    if tol.is_nan() || tol <= 0.0 || tol < floor {
        return Err(Error::Domain(format!(
            "tolerance {tol:e} is below 2^(-precision/2) = {floor:e}"
        )));
    }
    let prec = precision_bits;
    let n = coeffs.degree();
    let c: Vec<Float> = coeffs.coeffs().iter().map(|x| Float::with_val(prec, x)).collect();

    let seeds = match &opts.seeds {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => {
            return Err(Error::Domain(format!("{} seeds supplied for degree {n}", s.len())));
        }
        None => initial_guesses(
            n,
            SeedPlan::Circle {
                radius: cauchy_radius(coeffs),
            },
        ),
    };
    let mut z: Vec<Complex> = seeds.iter().map(|&s| mp::from_c64(s, prec)).collect();
    let mut frozen = vec![false; n];
    let mut residuals = vec![f64::INFINITY; n];

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let current = &z;
        let updates: Vec<Option<(Complex, bool)>> = (0..n)
            .into_par_iter()
            .map(|i| {
                if frozen[i] {
                    return None;
                }
                let zi = &current[i];
                let (p, dp) = mp::horner_with_derivative(&c, zi, prec);
                if p.real().is_zero() && p.imag().is_zero() {
                    return Some((zi.clone(), true));
                }
                let newton = Complex::with_val(prec, &p / &dp);
                let mut sum = Complex::new(prec);
                let mut diff = Complex::new(prec);
                for (j, zj) in current.iter().enumerate() {
                    if j != i {
                        diff.assign(zi - zj);
                        diff.recip_mut();
                        sum += &diff;
                    }
                }
                // w = N / (1 - N * sum)
                let mut denom = Complex::with_val(prec, &newton * &sum);
                denom = Complex::with_val(prec, 1) - denom;
                let w = Complex::with_val(prec, &newton / &denom);
                let step = mp::abs_f64(&w);
                let size = mp::abs_f64(zi).max(1.0);
                let next = Complex::with_val(prec, zi - &w);
                Some((next, step <= tol * size))
            })
            .collect();
        for (i, up) in updates.into_iter().enumerate() {
            if let Some((next, small)) = up {
                if next.real().is_finite() && next.imag().is_finite() {
                    z[i] = next;
                }
                frozen[i] = small;
            }
        }
        if frozen.iter().all(|&f| f) {
            residuals = z.par_iter().map(|zi| scaled_residual(&c, zi, prec)).collect();
            let mut all_ok = true;
            for (i, r) in residuals.iter().enumerate() {
                if *r > tol {
                    frozen[i] = false;
                    all_ok = false;
                }
            }
            if all_ok {
                return Ok(finish(z, residuals, prec, tol, iterations));
            }
        }
    }
    residuals = z.par_iter().map(|zi| scaled_residual(&c, zi, prec)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Err(Error::NonConvergence {
        iterations,
        worst_residual: worst,
    })
}

fn finish(z: Vec<Complex>, residuals: Vec<f64>, prec: u32, tol: f64, iterations: usize) -> ZeroSet {
    let mut pairs: Vec<(Complex, f64)> = z.into_iter().zip(residuals).collect();
    // real parts within the convergence tolerance count as equal
    pairs.sort_by(|(a, _), (b, _)| {
        let (ar, br) = (a.real().to_f64(), b.real().to_f64());
        let scale = tol * ar.abs().max(br.abs()).max(1.0);
        if (ar - br).abs() > scale {
            ar.total_cmp(&br)
        } else {
            a.imag().to_f64().total_cmp(&b.imag().to_f64())
        }
    });
    let (zeros, residuals) = pairs.into_iter().unzip();
    ZeroSet {
        zeros,
        residuals,
        origin_multiplicity: 0,
        precision_bits: prec,
        threshold: tol,
        suspect: Vec::new(),
        iterations,
    }
}

/// Root finding with one automatic precision doubling on non-convergence.
/// `build` produces the coefficient list at a requested precision.
pub fn find_zeros_with_retry<B>(build: B, precision_bits: u32, tol: f64, opts: &AberthOptions) -> Result<ZeroSet>
where
    B: Fn(u32) -> CoefficientList,
{
    let coeffs = build(precision_bits);
    match find_zeros_with(&coeffs, precision_bits, tol, opts) {
        Err(Error::NonConvergence { .. }) => {
            let doubled = 2 * precision_bits;
            let coeffs = build(doubled);
            find_zeros_with(&coeffs, doubled, tol, opts)
        }
        other => other,
    }
}

/// Re-evaluates residuals at doubled precision and flags zeros whose residual
/// grew by more than a factor of four to a value above the set's threshold.
pub fn certify(coeffs: &CoefficientList, zset: &ZeroSet) -> ZeroSet {
    let prec = 2 * zset.precision_bits.max(coeffs.precision());
    let c: Vec<Float> = coeffs.coeffs().iter().map(|x| Float::with_val(prec, x)).collect();
    let residuals: Vec<f64> = zset
        .zeros
        .par_iter()
        .map(|z| scaled_residual(&c, &Complex::with_val(prec, z), prec))
        .collect();
    let suspect = residuals
        .iter()
        .zip(&zset.residuals)
        .enumerate()
        .filter(|(_, (new, old))| **new > 4.0 * **old && **new > zset.threshold)
        .map(|(i, _)| i)
        .collect();
    ZeroSet {
        residuals,
        suspect,
        ..zset.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64], prec: u32) -> CoefficientList {
        CoefficientList::from_floats(coeffs.iter().map(|&c| Float::with_val(prec, c)).collect()).unwrap()
    }

    #[test]
    fn zeros_of_z_times_z_minus_one() {
        let p = poly(&[0.0, -1.0, 1.0], 128);
        let zs = find_zeros(&p, 128, 1e-15).unwrap();
        let z = zs.zeros_f64();
        assert!(z[0].norm() < 1e-15);
        assert!((z[1] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zeros_of_z_squared_plus_one() {
        let p = poly(&[1.0, 0.0, 1.0], 128);
        let zs = find_zeros(&p, 128, 1e-15).unwrap();
        let z = zs.zeros_f64();
        assert!((z[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((z[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(zs.max_residual() <= 1e-15);
    }

    #[test]
    fn rejects_non_monic_and_loose_precision() {
        let p = poly(&[1.0, 2.0], 128);
        assert!(find_zeros(&p, 128, 1e-10).is_err());
        let p = poly(&[1.0, 1.0], 128);
        assert!(matches!(find_zeros(&p, 128, 1e-30), Err(Error::Domain(_))));
    }

    #[test]
    fn reports_non_convergence() {
        let p = poly(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0], 128);
        let opts = AberthOptions {
            max_iterations: 1,
            seeds: None,
        };
        assert!(matches!(
            find_zeros_with(&p, 128, 1e-15, &opts),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn circle_seeds_fallback() {
        let p = poly(&[0.0, -1.0, 1.0], 128);
        let s = initial_guesses(
            2,
            SeedPlan::Circle {
                radius: cauchy_radius(&p),
            },
        );
        assert_eq!(s.len(), 2);
        for z in &s {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        assert!((s[0] + s[1]).norm() < 1e-15);
    }

    #[test]
    fn certify_exact_and_perturbed() {
        let prec = 128;
        let p = poly(&[1.0, 0.0, 1.0], prec);
        let exact = ZeroSet {
            zeros: vec![Complex::with_val(prec, (0, 1)), Complex::with_val(prec, (0, -1))],
            residuals: vec![0.0, 0.0],
            origin_multiplicity: 0,
            precision_bits: prec,
            threshold: 1e-20,
            suspect: vec![],
            iterations: 0,
        };
        let c = certify(&p, &exact);
        assert_eq!(c.residuals, vec![0.0, 0.0]);
        assert!(c.suspect.is_empty());

        let q = poly(&[0.0, -1.0, 1.0], prec);
        let eps = Float::with_val(prec, 1e-8);
        let z = Complex::with_val(prec, (Float::with_val(prec, 1) + &eps, 0));
        let perturbed = ZeroSet {
            zeros: vec![z],
            residuals: vec![1e-30],
            origin_multiplicity: 0,
            precision_bits: prec,
            threshold: 1e-30,
            suspect: vec![],
            iterations: 0,
        };
        let c = certify(&q, &perturbed);
        assert!((c.residuals[0] - 1e-8).abs() < 1e-15);
        assert_eq!(c.suspect, vec![0]);
    }
}
