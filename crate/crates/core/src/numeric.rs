//! Exact integer and rational helpers plus log-space evaluation.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use num_bigint::BigInt;

use crate::error::{Error, Result};

/// Natural log of a big unsigned integer. Returns `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        if let Some(f) = x.to_f64() {
            if f.is_finite() {
                return f.ln();
            }
        }
    }
    // keep the top 64 bits and account for the shift
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a nonnegative rational. `-inf` for zero.
pub fn ln_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let num = x.numer().abs().to_biguint().unwrap_or_default();
    let den = x.denom().abs().to_biguint().unwrap_or_default();
    ln_biguint(&num) - ln_biguint(&den)
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let Some(f) = x.to_f64() {
        if f.is_finite() && (f != 0.0 || x.is_zero()) {
            return f;
        }
    }
    let s = if x.is_negative() { -1.0 } else { 1.0 };
    s * ln_rational(&x.abs()).exp()
}

pub fn factorial(k: usize) -> BigUint {
    (1..=k as u64).fold(BigUint::one(), |acc, i| acc * i)
}

/// `(n)_k = n (n-1) ... (n-k+1)`; zero when `k > n`.
pub fn falling_factorial(n: &BigUint, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    let mut cur = n.clone();
    for _ in 0..k {
        if cur.is_zero() {
            return BigUint::zero();
        }
        acc *= &cur;
        cur -= 1u32;
    }
    acc
}

pub fn binomial(n: &BigUint, k: usize) -> BigUint {
    if BigUint::from(k) > *n {
        return BigUint::zero();
    }
    falling_factorial(n, k) / factorial(k)
}

pub fn binomial_u64(n: u64, k: u64) -> BigUint {
    binomial(&BigUint::from(n), k as usize)
}

/// `ln (n)_k` evaluated term by term, so it stays accurate for astronomically large `n`.
pub fn ln_falling_factorial(n: &BigUint, k: usize) -> f64 {
    if let Some(nf) = n.to_u64() {
        if (k as u64) > nf {
            return f64::NEG_INFINITY;
        }
        if nf < (1u64 << 53) {
            return (0..k as u64).map(|i| ((nf - i) as f64).ln()).sum();
        }
    }
    let mut s = 0.0;
    let mut cur = n.clone();
    for _ in 0..k {
        s += ln_biguint(&cur);
        cur -= 1u32;
    }
    s
}

pub fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: &BigUint, k: usize) -> f64 {
    ln_falling_factorial(n, k) - ln_factorial(k)
}

/// Parses `"3/4"`, `"0.25"`, `"1e-3"` or `"2"` as an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: {text:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    if !(-4096..=4096).contains(&exp) {
        return Err(bad());
    }
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

/// Serializes a rational as `"num/den"`.
pub fn format_rational(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// `ceil(q * e)` for `q >= 0`.
pub fn ceil_mul(q: &BigRational, e: usize) -> usize {
    let prod = q * BigRational::from_integer(BigInt::from(e));
    let (d, r) = prod.numer().div_rem(prod.denom());
    let mut c = d;
    if r.is_positive() {
        c += 1;
    }
    c.to_usize().unwrap_or(usize::MAX)
}

/// Smallest admissible edge count `max(1, ceil(q e))`.
pub fn min_edges_for(q: &BigRational, e: usize) -> usize {
    ceil_mul(q, e).max(1)
}

pub fn rational_in_unit_interval(q: &BigRational) -> bool {
    !q.is_negative() && *q <= BigRational::one()
}

/// Parses a decimal or scientific string as a big unsigned integer, e.g. `"1e6"`.
pub fn parse_biguint(text: &str) -> Result<BigUint> {
    let r = parse_rational(text)?;
    if !r.is_integer() || r.is_negative() {
        return Err(Error::InvalidParameter(format!("not a nonnegative integer: {text:?}")));
    }
    Ok(r.to_integer().to_biguint().unwrap_or_default())
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

/// Sample mean and standard error of the mean, in input order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    if values.iter().all(|&x| x == values[0]) {
        return (values[0], 0.0);
    }
    let mean = values.iter().copied().collect::<KahanSum>().total() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values
        .iter()
        .map(|x| (x - mean) * (x - mean))
        .collect::<KahanSum>()
        .total();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, sd / (n as f64).sqrt())
}

/// Float formatting for CSV: shortest round-trip decimal, `inf`/`-inf`/`nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/4").unwrap(), r(3, 4));
        assert_eq!(parse_rational("0.5").unwrap(), r(1, 2));
        assert_eq!(parse_rational("1e-3").unwrap(), r(1, 1000));
        assert_eq!(parse_rational("2").unwrap(), r(2, 1));
        assert_eq!(parse_rational(".25").unwrap(), r(1, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational(".").is_err());
        assert!(parse_rational("1e99999").is_err());
    }

    #[test]
    fn ceil_mul_is_exact_at_boundaries() {
        assert_eq!(ceil_mul(&r(2, 3), 15), 10);
        assert_eq!(ceil_mul(&r(7, 10), 15), 11);
        assert_eq!(ceil_mul(&r(1, 2), 52), 26);
        assert_eq!(min_edges_for(&r(0, 1), 10), 1);
    }

    #[test]
    fn big_logs_match_small_logs() {
        let x = BigUint::from(15504u32);
        assert!((ln_biguint(&x) - 15504f64.ln()).abs() < 1e-12);
        let huge = num_traits::pow(BigUint::from(10u32), 400);
        assert!((ln_biguint(&huge) - 400.0 * 10f64.ln()).abs() < 1e-9);
        let n = num_traits::pow(BigUint::from(10u32), 60);
        let direct = ln_falling_factorial(&n, 3);
        assert!((direct - 3.0 * 60.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_u64(20, 5), BigUint::from(15504u32));
        assert_eq!(binomial_u64(3, 5), BigUint::zero());
        assert_eq!(falling_factorial(&BigUint::from(4u32), 3), BigUint::from(24u32));
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(1e16);
        for _ in 0..10 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.total(), 10.0);
    }
}
