//! Generalized Laguerre polynomials `L_n^{(alpha)}` with arbitrary real
//! parameter, built from the explicit finite sum
//!
//! ```text
//! L_n^{(alpha)}(z) = sum_{k=0}^{n} binom(n + alpha, n - k) (-z)^k / k!
//! ```
//!
//! The parameter is kept as an exact rational number (parsed from a decimal
//! string) so that parameters extremely close to an integer keep their
//! distance to the integers. All coefficients are formed in exact rational
//! arithmetic and rounded to the working precision only at the end.

use std::fmt;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::mp;

/// Minimum working precision accepted for evaluation.
pub const MIN_PRECISION_BITS: u32 = 64;

/// Default working precision for a polynomial of degree `n`.
pub fn default_precision(n: u32) -> u32 {
    (4 * n + 64).max(256)
}

/// Parse a decimal literal such as `-31.999999`, `0.75` or `-3.2e1` into an
/// exact rational. Binary floating point is never involved.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a decimal number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = Integer::from_str_radix(&all_digits, 10).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(Error::Parse(format!("exponent out of range in {text:?}")));
    }
    let ten = Integer::from(10);
    let mut value = if scale >= 0 {
        Rational::from(numer * ten.pow(scale as u32))
    } else {
        Rational::from((numer, ten.pow((-scale) as u32)))
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Degree, parameter and working precision of `L_n^{(alpha)}`.
#[derive(Clone, PartialEq)]
pub struct LaguerreSpec {
    n: u32,
    alpha: Rational,
    precision_bits: u32,
}

impl fmt::Debug for LaguerreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaguerreSpec")
            .field("n", &self.n)
            .field("alpha", &self.alpha.to_f64())
            .field("precision_bits", &self.precision_bits)
            .finish()
    }
}

impl LaguerreSpec {
    pub fn new(n: u32, alpha: Rational, precision_bits: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("degree must be at least 1".into()));
        }
        if precision_bits < MIN_PRECISION_BITS {
            return Err(Error::Domain(format!(
                "precision_bits must be at least {MIN_PRECISION_BITS}, got {precision_bits}"
            )));
        }
        Ok(LaguerreSpec {
            n,
            alpha,
            precision_bits,
        })
    }

    /// Spec with the alpha given as a decimal string and the default precision.
    pub fn from_decimal(n: u32, alpha: &str) -> Result<Self> {
        Self::new(n, parse_decimal(alpha)?, default_precision(n))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn with_precision(&self, precision_bits: u32) -> Result<Self> {
        Self::new(self.n, self.alpha.clone(), precision_bits)
    }

    /// `A_n = -alpha / n`, exactly.
    pub fn a_n(&self) -> Rational {
        -self.alpha.clone() / self.n
    }

    /// Checks `A_n` in `(0, 1)`, the varying-parameter regime.
    pub fn check_varying_regime(&self) -> Result<f64> {
        let a = self.a_n();
        if a <= 0 || a >= 1 {
            return Err(Error::Domain(format!(
                "A_n = -alpha/n = {} is outside (0, 1)",
                a.to_f64()
            )));
        }
        Ok(a.to_f64())
    }

    /// True when alpha is an integer.
    pub fn alpha_is_integer(&self) -> bool {
        *self.alpha.denom() == 1
    }
}

/// Monomial coefficients `c_0, ..., c_n` of a polynomial, rounded to a
/// working precision.
#[derive(Clone, Debug)]
pub struct CoefficientList {
    coeffs: Vec<Float>,
}

impl CoefficientList {
    pub fn from_floats(coeffs: Vec<Float>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::Domain("polynomial must have degree at least 1".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coefficient".into()));
        }
        if coeffs.last().is_none_or(|c| c.is_zero()) {
            return Err(Error::Domain("leading coefficient is zero".into()));
        }
        Ok(CoefficientList { coeffs })
    }

    pub fn from_rationals(exact: &[Rational], precision_bits: u32) -> Self {
        let coeffs = exact.iter().map(|c| Float::with_val(precision_bits, c)).collect();
        CoefficientList { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    pub fn precision(&self) -> u32 {
        self.coeffs[0].prec()
    }

    pub fn leading(&self) -> &Float {
        self.coeffs.last().expect("non-empty")
    }

    pub fn is_monic(&self) -> bool {
        *self.leading() == 1
    }

    pub fn eval(&self, z: &Complex) -> Complex {
        mp::horner(&self.coeffs, z, self.precision())
    }

    /// Largest coefficient modulus below the leading one, as f64.
    pub fn max_lower_abs(&self) -> f64 {
        self.coeffs[..self.degree()]
            .iter()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// Exact coefficients of `L_n^{(alpha)}(z)` in the monomial basis.
///
/// Uses `binom(n + alpha, m) = binom(n + alpha, m - 1) (alpha + n - m + 1) / m`,
/// so the generalized binomials are products of exact rationals.
pub fn exact_coefficients(n: u32, alpha: &Rational) -> Vec<Rational> {
    let n_us = n as usize;
    // binoms[m] = binom(n + alpha, m)
    let mut binoms = Vec::with_capacity(n_us + 1);
    binoms.push(Rational::from(1));
    for m in 1..=n {
        let factor = (alpha.clone() + (n - m + 1)) / m;
        let next = binoms[(m - 1) as usize].clone() * factor;
        binoms.push(next);
    }
    let mut coeffs = Vec::with_capacity(n_us + 1);
    let mut inv_fact = Rational::from(1);
    for k in 0..=n {
        if k > 0 {
            inv_fact /= k;
        }
        let mut c = binoms[(n - k) as usize].clone() * &inv_fact;
        if k % 2 == 1 {
            c = -c;
        }
        coeffs.push(c);
    }
    coeffs
}

/// Coefficients of `L_n^{(alpha)}(z)` rounded to the spec's precision.
pub fn build_coefficients(spec: &LaguerreSpec) -> CoefficientList {
    let exact = exact_coefficients(spec.n, &spec.alpha);
    CoefficientList::from_rationals(&exact, spec.precision_bits)
}

/// `L_n^{(alpha)}(z)` at the spec's precision.
pub fn eval_laguerre(spec: &LaguerreSpec, z: &Complex) -> Complex {
    build_coefficients(spec).eval(z)
}

/// Exact coefficients of the monic polynomial with the same zeros as
/// `L_n^{(alpha)}(scale * z)`.
pub fn exact_scaled_monic(n: u32, alpha: &Rational, scale: u32) -> Vec<Rational> {
    let mut coeffs = exact_coefficients(n, alpha);
    let lead = coeffs[n as usize].clone();
    let s = Integer::from(scale);
    for (k, c) in coeffs.iter_mut().enumerate() {
        let pow = Rational::from((s.clone().pow(k as u32), s.clone().pow(n)));
        *c = (c.clone() * pow) / &lead;
    }
    coeffs
}

/// `P_n(z) = n! / (-n)^n * L_n^{(alpha)}(n z)`: monic, with the zeros of the
/// scaled polynomial `L_n^{(alpha)}(n z)`.
pub fn monic_rescaled(spec: &LaguerreSpec) -> CoefficientList {
    let exact = exact_scaled_monic(spec.n, &spec.alpha, spec.n);
    CoefficientList::from_rationals(&exact, spec.precision_bits)
}

/// Reduction of an integer parameter `alpha in {-n, ..., -1}`:
///
/// `L_n^{(alpha)}(z) = ((n + alpha)! / n!) (-z)^{-alpha} L_{n+alpha}^{(-alpha)}(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegerReduction {
    /// Order of the zero at the origin, `|alpha|`.
    pub multiplicity: u32,
    /// Degree `n + alpha` of the remaining factor (may be zero).
    pub reduced_degree: u32,
    /// Parameter `-alpha` of the remaining factor.
    pub reduced_alpha: u32,
    /// `(n + alpha)! / n!`.
    pub prefactor: Rational,
}

impl IntegerReduction {
    /// The reduced polynomial as a spec, or `None` when all zeros sit at the
    /// origin.
    pub fn reduced_spec(&self, precision_bits: u32) -> Result<Option<LaguerreSpec>> {
        if self.reduced_degree == 0 {
            return Ok(None);
        }
        LaguerreSpec::new(self.reduced_degree, Rational::from(self.reduced_alpha), precision_bits).map(Some)
    }
}

pub fn integer_reduction(n: u32, alpha: &Rational) -> Result<IntegerReduction> {
    if *alpha.denom() != 1 {
        return Err(Error::Domain(format!(
            "integer reduction needs an integer alpha, got {}",
            alpha.to_f64()
        )));
    }
    let a = alpha
        .numer()
        .to_i64()
        .ok_or_else(|| Error::Domain("alpha out of range".into()))?;
    if a > -1 || a < -(n as i64) {
        return Err(Error::Domain(format!("alpha = {a} is not in {{-{n}, ..., -1}}")));
    }
    let multiplicity = (-a) as u32;
    let reduced_degree = n - multiplicity;
    let mut prefactor = Rational::from(1);
    for j in (reduced_degree + 1)..=n {
        prefactor /= j;
    }
    Ok(IntegerReduction {
        multiplicity,
        reduced_degree,
        reduced_alpha: multiplicity,
        prefactor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_decimal(s).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(q("-31.999999"), Rational::from((-31_999_999, 1_000_000)));
        assert_eq!(q("0.75"), Rational::from((3, 4)));
        assert_eq!(q("-3.2e1"), Rational::from(-32));
        assert_eq!(q("+7"), Rational::from(7));
        assert_eq!(q(".5"), Rational::from((1, 2)));
        assert_eq!(q("1e-300") * Rational::from(Integer::from(10).pow(300)), 1);
        for bad in ["", "-", "1.2.3", "abc", "1e", "0x10", "1,5"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn degree_one() {
        let a = q("0.3");
        let c = exact_coefficients(1, &a);
        assert_eq!(c[0], Rational::from(1) + &a);
        assert_eq!(c[1], -1);
    }

    #[test]
    fn degree_two_alpha_minus_one() {
        // z^2/2 - z
        let c = exact_coefficients(2, &Rational::from(-1));
        assert_eq!(c, vec![Rational::from(0), Rational::from(-1), Rational::from((1, 2))]);
    }

    #[test]
    fn constant_term_alpha_zero() {
        let c = exact_coefficients(3, &Rational::from(0));
        assert_eq!(c[0], 1);
    }

    #[test]
    fn leading_coefficient_is_signed_inverse_factorial() {
        for n in 1..12u32 {
            let c = exact_coefficients(n, &q("-3.7"));
            let mut fact = Integer::from(1);
            for j in 1..=n {
                fact *= j;
            }
            let sign = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(c[n as usize], Rational::from((Integer::from(sign), fact)));
        }
    }

    #[test]
    fn eval_small_cases() {
        let spec = LaguerreSpec::new(1, q("-0.5"), 128).unwrap();
        let v = eval_laguerre(&spec, &Complex::with_val(128, (1, 0)));
        assert_eq!(v.real().to_f64(), -0.5);
        let spec = LaguerreSpec::new(2, Rational::from(-1), 128).unwrap();
        let v = eval_laguerre(&spec, &Complex::with_val(128, (2, 0)));
        assert!(v.real().is_zero() && v.imag().is_zero());
    }

    #[test]
    fn eval_at_i_matches_exact_expansion() {
        // z^2/2 - z at z = i: -1/2 - i
        let spec = LaguerreSpec::new(2, Rational::from(-1), 128).unwrap();
        let v = eval_laguerre(&spec, &Complex::with_val(128, (0, 1)));
        assert_eq!(v.real().to_f64(), -0.5);
        assert_eq!(v.imag().to_f64(), -1.0);
    }

    #[test]
    fn monic_rescaled_examples() {
        let spec = LaguerreSpec::new(1, q("-0.5"), 128).unwrap();
        let m = monic_rescaled(&spec);
        assert_eq!(m.coeffs()[0].to_f64(), -0.5);
        assert!(m.is_monic());

        let spec = LaguerreSpec::new(2, Rational::from(-1), 128).unwrap();
        let exact = exact_scaled_monic(2, spec.alpha(), 2);
        assert_eq!(exact, vec![Rational::from(0), Rational::from(-1), Rational::from(1)]);
    }

    #[test]
    fn integer_reduction_examples() {
        let red = integer_reduction(2, &Rational::from(-1)).unwrap();
        assert_eq!(red.multiplicity, 1);
        assert_eq!(red.reduced_degree, 1);
        assert_eq!(red.reduced_alpha, 1);

        let red = integer_reduction(5, &Rational::from(-5)).unwrap();
        assert_eq!(red.multiplicity, 5);
        assert_eq!(red.reduced_degree, 0);
        assert!(red.reduced_spec(128).unwrap().is_none());

        assert!(integer_reduction(5, &q("-2.5")).is_err());
        assert!(integer_reduction(5, &Rational::from(-6)).is_err());
        assert!(integer_reduction(5, &Rational::from(0)).is_err());
    }

    #[test]
    fn integer_reduction_identity_holds_coefficientwise() {
        // ((n+a)!/n!) (-z)^{-a} L_{n+a}^{(-a)}(z) == L_n^{(a)}(z)
        for (n, a) in [(2u32, -1i64), (6, -2), (9, -5), (7, -7)] {
            let alpha = Rational::from(a);
            let red = integer_reduction(n, &alpha).unwrap();
            let lhs = exact_coefficients(n, &alpha);
            let m = red.multiplicity as usize;
            let rhs_inner = if red.reduced_degree == 0 {
                vec![Rational::from(1)]
            } else {
                exact_coefficients(red.reduced_degree, &Rational::from(red.reduced_alpha))
            };
            let sign = if m.is_multiple_of(2) { 1 } else { -1 };
            for (k, c) in lhs.iter().enumerate() {
                let expected = if k < m {
                    Rational::from(0)
                } else {
                    rhs_inner[k - m].clone() * &red.prefactor * sign
                };
                assert_eq!(*c, expected, "n={n} a={a} k={k}");
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(LaguerreSpec::new(0, q("1"), 128).is_err());
        assert!(LaguerreSpec::new(3, q("1"), 32).is_err());
        let s = LaguerreSpec::from_decimal(40, "-32.4").unwrap();
        assert_eq!(s.precision_bits(), 256);
        assert!((s.check_varying_regime().unwrap() - 0.81).abs() < 1e-15);
        assert!(LaguerreSpec::from_decimal(4, "1.5")
            .unwrap()
            .check_varying_regime()
            .is_err());
    }
}
