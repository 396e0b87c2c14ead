//! Logarithms and conversions of arbitrary-precision numbers.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Natural log of a positive big integer; `-inf` for zero.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of `|n|`.
pub fn ln_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// Natural log of `|x|`.
pub fn ln_ratio(x: &BigRational) -> f64 {
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// Nearest double of a rational, robust to huge numerators and denominators.
pub fn ratio_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let (Some(a), Some(b)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if a.is_finite() && b.is_finite() && b != 0.0 {
            let v = a / b;
            if v.is_normal() {
                return v;
            }
        }
    }
    let sign = if x.numer().sign() == Sign::Minus {
        -1.0
    } else {
        1.0
    };
    sign * ln_ratio(x).exp()
}

/// A double with 17 significant digits, the shortest width that always round-trips.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn log_of_large_power() {
        let n = BigUint::from(7u32).pow(900);
        let want = 900.0 * 7f64.ln();
        assert!((ln_biguint(&n) - want).abs() < 1e-9 * want);
        assert_eq!(ln_biguint(&BigUint::one()), 0.0);
    }

    #[test]
    fn tiny_ratio() {
        let x = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(400));
        assert_eq!(ratio_to_f64(&x), 0.0_f64.max((-400.0 * 10f64.ln()).exp()));
        let y = BigRational::new(BigInt::from(3), BigInt::from(7));
        assert_eq!(ratio_to_f64(&y), 3.0 / 7.0);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let x = 0.1 + 0.2;
        let s = fmt17(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }
}
