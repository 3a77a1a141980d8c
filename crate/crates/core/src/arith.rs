//! Exact rational arithmetic over ℚ: places, p-adic valuations, normalized
//! absolute values and the Weil height of points of ℙ¹(ℚ).
//!
//! Absolute values are normalized as |x|_p = p^(-v_p(x)) at a prime p and as
//! the usual absolute value at the archimedean place, so the product formula
//! holds exactly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_prime::Primality;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_rational::BigRational;

use crate::error::{Error, Result};

/// A prime number that has passed a primality test.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(BigUint);

impl Prime {
    pub fn new(p: BigUint) -> Result<Self> {
        match num_prime::nt_funcs::is_prime(&p, None) {
            Primality::Yes | Primality::Probable(_) => Ok(Prime(p)),
            Primality::No => Err(Error::NotPrime(p)),
        }
    }

    pub fn from_u64(p: u64) -> Result<Self> {
        Self::new(BigUint::from(p))
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn to_bigint(&self) -> BigInt {
        BigInt::from(self.0.clone())
    }

    pub fn ln(&self) -> f64 {
        ln_biguint(&self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A place of ℚ: the archimedean absolute value or a p-adic one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Archimedean,
    Finite(Prime),
}

impl Place {
    pub fn finite(p: u64) -> Result<Self> {
        Ok(Place::Finite(Prime::from_u64(p)?))
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => f.write_str("inf"),
            Place::Finite(p) => p.fmt(f),
        }
    }
}

/// The value of a normalized absolute value.
#[derive(Debug, Clone, PartialEq)]
pub enum AbsValue {
    /// Finite places: an exact power p^(-v), or 0.
    Exact(BigRational),
    /// Archimedean place. `ln` is computed from the big integers directly, so
    /// it stays finite even when `value` overflows to infinity.
    Approx { value: f64, ln: f64 },
}

impl AbsValue {
    pub fn ln(&self) -> f64 {
        match self {
            AbsValue::Exact(q) => ln_rational(q),
            AbsValue::Approx { ln, .. } => *ln,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            AbsValue::Exact(q) => q.to_f64().unwrap_or(f64::INFINITY),
            AbsValue::Approx { value, .. } => *value,
        }
    }
}

/// Normalized absolute value |x|_v.
pub fn abs_value(v: &Place, x: &BigRational) -> AbsValue {
    match v {
        Place::Finite(p) => {
            if x.is_zero() {
                return AbsValue::Exact(BigRational::zero());
            }
            let k = padic_valuation(p, x).expect("nonzero");
            AbsValue::Exact(rational_pow(&BigRational::from_integer(p.to_bigint()), -k))
        }
        Place::Archimedean => {
            let a = x.abs();
            AbsValue::Approx {
                value: a.to_f64().unwrap_or(f64::INFINITY),
                ln: ln_rational(&a),
            }
        }
    }
}

fn rational_pow(base: &BigRational, exp: i64) -> BigRational {
    let e = exp.unsigned_abs();
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    if exp < 0 {
        acc.recip()
    } else {
        acc
    }
}

/// v_p of a nonzero integer.
pub fn valuation_int(p: &BigUint, n: &BigInt) -> u64 {
    debug_assert!(!n.is_zero());
    let mut m = n.magnitude().clone();
    if p == &BigUint::from(2u32) {
        return m.trailing_zeros().unwrap_or(0);
    }
    let mut v = 0u64;
    // Strip p^(2^k) chunks, then finish one power at a time.
    let mut powers = vec![p.clone()];
    loop {
        let last = powers.last().unwrap();
        if last.bits() * 2 > m.bits() + 1 {
            break;
        }
        let sq = last * last;
        powers.push(sq);
    }
    for (k, pk) in powers.iter().enumerate().rev() {
        loop {
            let (q, r) = m.div_rem(pk);
            if !r.is_zero() {
                break;
            }
            m = q;
            v += 1 << k;
        }
    }
    v
}

/// The exact p-adic valuation v_p(num) − v_p(den).
pub fn padic_valuation(p: &Prime, x: &BigRational) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::InvalidInput(
            "the valuation of 0 is +infinity".to_string(),
        ));
    }
    let vn = valuation_int(p.value(), x.numer()) as i64;
    let vd = valuation_int(p.value(), x.denom()) as i64;
    Ok(vn - vd)
}

/// Distinct prime factors of a positive integer, ascending.
pub fn prime_factors(n: &BigUint) -> Result<Vec<Prime>> {
    if n.is_zero() {
        return Err(Error::InvalidInput("cannot factor 0".to_string()));
    }
    if n.is_one() {
        return Ok(Vec::new());
    }
    if let Some(small) = n.to_u64() {
        return num_prime::nt_funcs::factorize64(small)
            .into_keys()
            .map(Prime::from_u64)
            .collect();
    }
    let (found, rest) = num_prime::nt_funcs::factors(n.clone(), None);
    if let Some(rest) = rest {
        if !rest.is_empty() {
            return Err(Error::Factorization(n.to_string()));
        }
    }
    found.into_keys().map(Prime::new).collect()
}

/// Primes dividing the numerator or denominator of a nonzero rational.
pub fn prime_support(x: &BigRational) -> Result<Vec<Prime>> {
    if x.is_zero() {
        return Err(Error::InvalidInput(
            "prime support of 0 is undefined".to_string(),
        ));
    }
    let mut out = prime_factors(x.numer().magnitude())?;
    out.extend(prime_factors(x.denom().magnitude())?);
    out.sort();
    out.dedup();
    Ok(out)
}

/// Natural log of a positive big integer, computed from its leading 64 bits
/// and bit length so that it never overflows.
pub fn ln_biguint(n: &BigUint) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// ln|x| for a rational; −∞ at 0.
pub fn ln_rational(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

/// n/d as a float, accurate to about 2^-58 relative even when n and d are
/// far beyond the f64 range.
pub fn ratio_f64(n: &BigInt, d: &BigInt) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let shift = n.bits() as i64 - d.bits() as i64 - 60;
    let q = if shift >= 0 {
        n / (d << shift as usize)
    } else {
        (n << (-shift) as usize) / d
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}

/// x^e; powers of a reduced fraction stay reduced.
pub fn rat_pow(x: &BigRational, e: u32) -> BigRational {
    BigRational::new_raw(x.numer().pow(e), x.denom().pow(e))
}

/// Weil height of a rational number viewed as [x : 1].
pub fn height_rational(x: &BigRational) -> f64 {
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    ln_biguint(if n > d { n } else { d })
}

/// A point of ℙ¹(ℚ) in canonical form: coprime integers (a, b) with b ≥ 0,
/// and b = 0 only for [1 : 0].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjectivePointQ {
    a: BigInt,
    b: BigInt,
}

impl ProjectivePointQ {
    /// Canonical form of [a : b]; rejects [0 : 0].
    pub fn new(a: BigRational, b: BigRational) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::InvalidInput("[0 : 0] is not a point".to_string()));
        }
        let l = a.denom().lcm(b.denom());
        let ai = (a * BigRational::from_integer(l.clone())).to_integer();
        let bi = (b * BigRational::from_integer(l)).to_integer();
        Ok(Self::from_integers(ai, bi))
    }

    /// Canonical form of [a : b] for integers, not both zero.
    pub fn from_integers(a: BigInt, b: BigInt) -> Self {
        assert!(!(a.is_zero() && b.is_zero()), "[0 : 0] is not a point");
        if b.is_zero() {
            return Self::infinity();
        }
        let g = a.gcd(&b);
        let (mut a, mut b) = (a / &g, b / &g);
        if b.is_negative() {
            a = -a;
            b = -b;
        }
        ProjectivePointQ { a, b }
    }

    pub fn from_rational(x: &BigRational) -> Self {
        ProjectivePointQ {
            a: x.numer().clone(),
            b: x.denom().clone(),
        }
    }

    pub fn infinity() -> Self {
        ProjectivePointQ {
            a: BigInt::one(),
            b: BigInt::zero(),
        }
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn is_infinity(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    /// The affine coordinate a/b, or `None` at infinity.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_infinity() {
            None
        } else {
            Some(BigRational::new(self.a.clone(), self.b.clone()))
        }
    }

    /// The coprime-integer lift as a rational pair.
    pub fn lift(&self) -> (BigRational, BigRational) {
        (
            BigRational::from_integer(self.a.clone()),
            BigRational::from_integer(self.b.clone()),
        )
    }

    /// Bit length of the larger coordinate.
    pub fn bits(&self) -> u64 {
        self.a.bits().max(self.b.bits())
    }
}

impl fmt::Display for ProjectivePointQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            f.write_str("inf")
        } else if self.b.is_one() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}/{}", self.a, self.b)
        }
    }
}

impl FromStr for ProjectivePointQ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "∞" | "1:0") {
            return Ok(Self::infinity());
        }
        Ok(Self::from_rational(&parse_rational(t)?))
    }
}

/// Weil height h([a : b]) = log max(|a|, |b|) for the canonical lift.
pub fn weil_height(x: &ProjectivePointQ) -> f64 {
    let m = match x.a.magnitude().cmp(x.b.magnitude()) {
        Ordering::Less => x.b.magnitude(),
        _ => x.a.magnitude(),
    };
    ln_biguint(m)
}

/// Parses "p", "p/q" or "-p/q" with integer p, q and q ≠ 0.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim().replace('−', "-");
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t.as_str(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// "p/q" rendering used at every serialization boundary ("p" when q = 1).
pub fn format_rational(x: &BigRational) -> String {
    x.to_string()
}

/// Largest positive integer N with ln N ≤ h (0 when h < 0).
pub fn max_coordinate_for_height(h: f64) -> u64 {
    if h < 0.0 || !h.is_finite() {
        return 0;
    }
    let mut n = h.exp().floor().max(1.0) as u64;
    while ((n + 1) as f64).ln() <= h {
        n += 1;
    }
    while n > 1 && (n as f64).ln() > h {
        n -= 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn abs_value_examples() {
        let two = Place::finite(2).unwrap();
        let five = Place::finite(5).unwrap();
        assert_eq!(abs_value(&two, &q("12")), AbsValue::Exact(q("1/4")));
        assert_eq!(abs_value(&five, &q("3/25")), AbsValue::Exact(q("25")));
        let arch = abs_value(&Place::Archimedean, &q("-3/5"));
        assert!((arch.to_f64() - 0.6).abs() < 1e-15);
        assert_eq!(abs_value(&two, &q("0")), AbsValue::Exact(q("0")));
        assert_eq!(abs_value(&Place::Archimedean, &q("0")).to_f64(), 0.0);
    }

    #[test]
    fn valuation_examples() {
        let x = q("18/5");
        assert_eq!(padic_valuation(&Prime::from_u64(3).unwrap(), &x).unwrap(), 2);
        assert_eq!(padic_valuation(&Prime::from_u64(5).unwrap(), &x).unwrap(), -1);
        assert_eq!(padic_valuation(&Prime::from_u64(7).unwrap(), &x).unwrap(), 0);
        assert!(padic_valuation(&Prime::from_u64(7).unwrap(), &q("0")).is_err());
    }

    #[test]
    fn valuation_of_large_powers() {
        let p = BigUint::from(3u32);
        let n = BigInt::from(3u32).pow(1000) * BigInt::from(7u32);
        assert_eq!(valuation_int(&p, &n), 1000);
        let n2 = BigInt::from(2u32).pow(77) * BigInt::from(-5);
        assert_eq!(valuation_int(&BigUint::from(2u32), &n2), 77);
    }

    #[test]
    fn prime_support_examples() {
        let primes = |s: &str| -> Vec<u64> {
            prime_support(&q(s))
                .unwrap()
                .iter()
                .map(|p| p.value().to_u64().unwrap())
                .collect()
        };
        assert_eq!(primes("6"), vec![2, 3]);
        assert_eq!(primes("1"), Vec::<u64>::new());
        assert_eq!(primes("9/10"), vec![2, 3, 5]);
        assert!(prime_support(&q("0")).is_err());
    }

    #[test]
    fn large_prime_support() {
        // (2^61 - 1) * (2^31 - 1), both prime.
        let a = (BigUint::one() << 61) - BigUint::one();
        let b = (BigUint::one() << 31) - BigUint::one();
        let n = &a * &b * BigUint::from(9u32);
        let f = prime_factors(&n).unwrap();
        let got: Vec<BigUint> = f.into_iter().map(|p| p.value().clone()).collect();
        assert_eq!(got, vec![BigUint::from(3u32), b, a]);
    }

    #[test]
    fn non_primes_rejected() {
        assert!(Place::finite(1).is_err());
        assert!(Place::finite(91).is_err());
        assert!(Place::finite(0).is_err());
        assert!(Place::finite(97).is_ok());
    }

    #[test]
    fn weil_height_examples() {
        let pt = |s: &str| s.parse::<ProjectivePointQ>().unwrap();
        assert!((weil_height(&pt("3/5")) - 5f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height(&pt("1")), 0.0);
        assert_eq!(weil_height(&pt("inf")), 0.0);
        // 29/10: naive two-integer computation
        let naive = (29f64).max(10f64).ln();
        assert!((weil_height(&pt("29/10")) - naive).abs() < 1e-15);
        // non-reduced input reduces first
        let p = ProjectivePointQ::from_integers(BigInt::from(58), BigInt::from(20));
        assert_eq!(p.to_string(), "29/10");
        assert!((weil_height(&p) - naive).abs() < 1e-15);
    }

    #[test]
    fn canonical_form() {
        let p = ProjectivePointQ::new(q("-3"), q("-6")).unwrap();
        assert_eq!((p.a().clone(), p.b().clone()), (BigInt::from(1), BigInt::from(2)));
        let inf = ProjectivePointQ::new(q("-7/2"), q("0")).unwrap();
        assert!(inf.is_infinity());
        assert_eq!(inf, ProjectivePointQ::infinity());
        assert!(ProjectivePointQ::new(q("0"), q("0")).is_err());
        let z = ProjectivePointQ::new(q("0"), q("-5")).unwrap();
        assert_eq!(z.to_string(), "0");
    }

    #[test]
    fn huge_integer_logs_do_not_overflow() {
        let n = BigUint::one() << 5000u32;
        let l = ln_biguint(&n);
        assert!((l - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn height_cap_helper() {
        assert_eq!(max_coordinate_for_height(0.0), 1);
        assert_eq!(max_coordinate_for_height(3f64.ln()), 3);
        assert_eq!(max_coordinate_for_height(1.1), 3);
        assert_eq!(max_coordinate_for_height(100f64.ln()), 100);
        assert_eq!(max_coordinate_for_height(-1.0), 0);
    }
}
