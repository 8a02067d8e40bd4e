//! Small helpers over `rug` multiprecision scalars.

use num_complex::Complex64;
use rug::{Complex, Float};

/// Horner evaluation of `sum c_k z^k` at `prec` bits.
pub fn horner(coeffs: &[Float], z: &Complex, prec: u32) -> Complex {
    let mut acc = Complex::with_val(prec, (coeffs.last().expect("non-empty"), 0));
    for c in coeffs.iter().rev().skip(1) {
        acc *= z;
        *acc.mut_real() += c;
    }
    acc
}

/// Value and first derivative of `sum c_k z^k` by a single Horner sweep.
pub fn horner_with_derivative(coeffs: &[Float], z: &Complex, prec: u32) -> (Complex, Complex) {
    let mut p = Complex::with_val(prec, (coeffs.last().expect("non-empty"), 0));
    let mut dp = Complex::new(prec);
    for c in coeffs.iter().rev().skip(1) {
        dp *= z;
        dp += &p;
        p *= z;
        *p.mut_real() += c;
    }
    (p, dp)
}

pub fn to_c64(z: &Complex) -> Complex64 {
    Complex64::new(z.real().to_f64(), z.imag().to_f64())
}

pub fn from_c64(z: Complex64, prec: u32) -> Complex {
    Complex::with_val(prec, (z.re, z.im))
}

/// `|z|` rounded to f64.
pub fn abs_f64(z: &Complex) -> f64 {
    Float::with_val(z.prec().0, z.abs_ref()).to_f64()
}

/// `log |z|` as f64, usable far outside the f64 exponent range.
pub fn ln_abs(z: &Complex) -> f64 {
    let a = Float::with_val(z.prec().0, z.abs_ref());
    if a.is_zero() {
        return f64::NEG_INFINITY;
    }
    a.ln().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn horner_matches_direct_sum() {
        let prec = 128;
        let coeffs: Vec<Float> = [3.0, -2.0, 0.5, 1.0]
            .iter()
            .map(|&c| Float::with_val(prec, c))
            .collect();
        let z = Complex::with_val(prec, (0.3, -1.1));
        let zc = to_c64(&z);
        let direct = Complex64::new(3.0, 0.0) - 2.0 * zc + 0.5 * zc * zc + zc * zc * zc;
        let (p, dp) = horner_with_derivative(&coeffs, &z, prec);
        assert!((to_c64(&p) - direct).norm() < 1e-14);
        assert!((to_c64(&horner(&coeffs, &z, prec)) - direct).norm() < 1e-14);
        let deriv = Complex64::new(-2.0, 0.0) + zc + 3.0 * zc * zc;
        assert!((to_c64(&dp) - deriv).norm() < 1e-14);
    }

    #[test]
    fn ln_abs_handles_huge_values() {
        let z = Complex::with_val(64, (Float::with_val(64, 10).pow(500u32), 0));
        assert!((ln_abs(&z) - 500.0 * 10f64.ln()).abs() < 1e-9);
    }
}
