//! Adaptive Gauss–Legendre quadrature for complex-valued integrands of a real
//! variable. Each panel is accepted when the single-panel rule and the sum
//! over its two halves agree to the panel's share of the tolerance.

use std::sync::OnceLock;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{Error, Result};

const RULE_DEGREE: usize = 12;
const MAX_DEPTH: u32 = 56;
const MAX_PANELS: usize = 200_000;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(RULE_DEGREE)
            .expect("valid degree")
            .into_node_weight_pairs()
    })
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

fn panel<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Complex64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in rule() {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate `f` over `[a, b]` to mixed tolerance `tol * max(1, |I|)`.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let width = b - a;
    let first = panel(&mut f, a, b);
    let mut evaluations = RULE_DEGREE;
    let mut scale = first.norm().max(1.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    let mut stack = vec![(a, b, first, 0u32)];
    let mut panels = 0usize;
    while let Some((lo, hi, coarse, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&mut f, lo, mid);
        let right = panel(&mut f, mid, hi);
        evaluations += 2 * RULE_DEGREE;
        panels += 1;
        let fine = left + right;
        let diff = (fine - coarse).norm();
        let share = tol * scale * ((hi - lo) / width).abs();
        // roundoff in the node positions limits tiny panels near singularities
        let floor = (64.0 * f64::EPSILON * fine.norm()).max(1e-3 * tol * scale);
        if diff <= share.max(floor) || depth >= MAX_DEPTH {
            total += fine;
            error += diff;
            scale = scale.max(total.norm());
            continue;
        }
        if panels > MAX_PANELS {
            return Err(Error::Quadrature { achieved: error + diff });
        }
        stack.push((mid, hi, right, depth + 1));
        stack.push((lo, mid, left, depth + 1));
    }
    if !total.re.is_finite() || !total.im.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::INFINITY,
        });
    }
    if error > 1e3 * tol * scale {
        return Err(Error::Quadrature { achieved: error });
    }
    Ok(Estimate {
        value: total,
        error,
        evaluations,
    })
}

fn half_from<G: FnMut(Complex64) -> Complex64>(g: &mut G, base: Complex64, d: Complex64, tol: f64) -> Result<Estimate> {
    let est = integrate(|t| g(base + d * t), 0.0, 1.0, tol)?;
    Ok(Estimate {
        value: est.value * d,
        ..est
    })
}

fn join(a: Estimate, b: Estimate, sign_b: f64) -> Estimate {
    Estimate {
        value: a.value + sign_b * b.value,
        error: a.error + b.error,
        evaluations: a.evaluations + b.evaluations,
    }
}

/// Integrate an analytic `g(s)` along the straight segment from `from` to `to`.
///
/// Each half is parameterized from its own endpoint, so nodes near either end
/// keep full relative accuracy in their distance to it.
pub fn integrate_segment<G: FnMut(Complex64) -> Complex64>(
    mut g: G,
    from: Complex64,
    to: Complex64,
    tol: f64,
) -> Result<Estimate> {
    let half = 0.5 * (to - from);
    let first = half_from(&mut g, from, half, tol)?;
    let second = half_from(&mut g, to, -half, tol)?;
    Ok(join(first, second, -1.0))
}

/// Integrate along the segment with the quadratic clustering `s = from + (to - from) u^2`
/// on the first half, which smooths square-root behavior at `from`.
pub fn integrate_segment_sqrt_start<G: FnMut(Complex64) -> Complex64>(
    mut g: G,
    from: Complex64,
    to: Complex64,
    tol: f64,
) -> Result<Estimate> {
    let half = 0.5 * (to - from);
    let est = integrate(|u| g(from + half * (u * u)) * (2.0 * u), 0.0, 1.0, tol)?;
    let first = Estimate {
        value: est.value * half,
        ..est
    };
    let second = half_from(&mut g, to, -half, tol)?;
    Ok(join(first, second, -1.0))
}

/// Fixed `RULE_DEGREE`-point rule on one segment; used for short polyline
/// pieces where adaptivity is unnecessary.
pub fn segment_rule<G: FnMut(Complex64) -> Complex64>(mut g: G, from: Complex64, to: Complex64) -> Complex64 {
    let d = to - from;
    panel(&mut |t| g(from + d * t), 0.0, 1.0) * d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let est = integrate(|x| Complex64::new(x * x * x, -x), 0.0, 2.0, 1e-14).unwrap();
        assert!((est.value - Complex64::new(4.0, -2.0)).norm() < 1e-13);
    }

    #[test]
    fn oscillatory_and_singular_endpoint() {
        let est = integrate(|x| Complex64::new((50.0 * x).cos(), 0.0), 0.0, PI, 1e-13).unwrap();
        assert!(est.value.norm() < 1e-12);
        // integrable log singularity at 0: int_0^1 ln x dx = -1
        let est = integrate(|x| Complex64::new(x.ln(), 0.0), 0.0, 1.0, 1e-12).unwrap();
        assert!((est.value.re + 1.0).abs() < 1e-10);
    }

    #[test]
    fn contour_integral_of_pole() {
        // int over unit circle of dz / z = 2 pi i
        let mut total = Complex64::new(0.0, 0.0);
        let k = 16;
        for j in 0..k {
            let a = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64);
            let b = Complex64::from_polar(1.0, 2.0 * PI * (j + 1) as f64 / k as f64);
            total += integrate_segment(|s| 1.0 / s, a, b, 1e-14).unwrap().value;
        }
        assert!((total - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn segment_ending_near_a_pole() {
        let a = Complex64::new(0.0, 0.1);
        for b in [Complex64::new(0.0, 1e-8), Complex64::new(-1e-11, 0.0)] {
            let est = integrate_segment(|s| 1.0 / s, a, b, 1e-12).unwrap();
            assert!(
                (est.value - (b / a).ln()).norm() < 1e-11,
                "{b}: {:?} vs {}",
                est,
                (b / a).ln()
            );
        }
    }

    #[test]
    fn sqrt_start_substitution() {
        // int_0^1 sqrt(s) ds = 2/3
        let est = integrate_segment_sqrt_start(|s| s.sqrt(), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 1e-14)
            .unwrap();
        assert!((est.value.re - 2.0 / 3.0).abs() < 1e-14);
    }
}
