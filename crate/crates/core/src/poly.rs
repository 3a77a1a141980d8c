//! Dense univariate polynomials in t over ℚ.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::BigRational;

const COPRIME_TEST_PRIMES: [u64; 4] = [
    2_305_843_009_213_693_951,
    4_611_686_018_427_387_847,
    1_152_921_504_606_846_883,
    9_223_372_036_854_775_783,
];

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

/// Degree of gcd(a, b) over GF(p); coefficients lowest degree first.
fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> usize {
    let trim = |v: &mut Vec<u64>| {
        while v.last() == Some(&0) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = powmod(*b.last().unwrap(), p - 2, p);
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let f = mulmod(*a.last().unwrap(), inv, p);
            for (i, &bc) in b.iter().enumerate() {
                let t = mulmod(f, bc, p);
                a[i + shift] = (a[i + shift] + p - t) % p;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Coefficients stored lowest degree first, with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    /// The monomial t.
    pub fn t() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with deg 0 := 0; used where the zero polynomial is excluded.
    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(0)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Poly::one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplies by t.
    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(BigRational::zero());
        c.extend(self.coeffs.iter().cloned());
        Poly { coeffs: c }
    }

    /// Exact division by t; `None` if the constant term is nonzero.
    pub fn div_t(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if !self.coeffs[0].is_zero() {
            return None;
        }
        Some(Poly::new(self.coeffs[1..].to_vec()))
    }

    /// Euclidean division over ℚ. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.deg();
        let lc = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lc;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic copy (zero stays zero).
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = self.leading();
        self.scale(&lc.recip())
    }

    /// Monic gcd over ℚ; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.primitive();
        let mut b = other.primitive();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.primitive();
        }
        a.monic()
    }

    /// Whether gcd(self, other) is a nonzero constant.
    ///
    /// Tries a few word-sized primes first: if p divides neither leading
    /// coefficient, a common factor over ℚ would survive reduction mod p, so a
    /// constant gcd mod p settles the question. Falls back to the exact gcd.
    pub fn is_coprime_to(&self, other: &Poly) -> bool {
        if self.is_zero() {
            return other.is_constant() && !other.is_zero();
        }
        if other.is_zero() {
            return self.is_constant();
        }
        if self.is_constant() || other.is_constant() {
            return true;
        }
        let (a, b) = (self.integer_coeffs(), other.integer_coeffs());
        for &p in &COPRIME_TEST_PRIMES {
            let pb = BigInt::from(p);
            let red = |c: &[BigInt]| -> Vec<u64> {
                c.iter()
                    .map(|x| x.mod_floor(&pb).to_u64().expect("reduced below a u64 prime"))
                    .collect()
            };
            let (ra, rb) = (red(&a), red(&b));
            if ra.last() == Some(&0) || rb.last() == Some(&0) {
                continue;
            }
            if gcd_degree_mod(ra, rb, p) == 0 {
                return true;
            }
        }
        self.gcd(other).is_constant()
    }

    /// Least common multiple of all coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer content: gcd of numerators once denominators are cleared.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        let l = self.denominator_lcm();
        self.coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(l.clone())).to_integer())
            .collect()
    }

    /// Integer-coefficient copy with coprime coefficients and positive leading
    /// coefficient, used to keep remainder sequences small.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let ints = self.integer_coeffs();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let sign = if ints.last().unwrap().is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        };
        let g = g * sign;
        Poly::new(
            ints.into_iter()
                .map(|c| BigRational::from_integer(c / &g))
                .collect(),
        )
    }

    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                if mag.is_integer() {
                    write!(f, "{mag}")?;
                } else {
                    write!(f, "({mag})")?;
                }
                if i > 0 {
                    f.write_str("*")?;
                }
            }
            match i {
                0 => {}
                1 => f.write_str("t")?,
                _ => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_degree() {
        let a = Poly::from_ints(&[1, 0, 1]); // t^2 + 1
        let b = Poly::from_ints(&[-3, 2]); // 2t - 3
        assert_eq!((&a * &b), Poly::from_ints(&[-3, 2, -3, 2]));
        assert_eq!(a.pow(2), Poly::from_ints(&[1, 0, 2, 0, 1]));
        assert_eq!(a.degree(), Some(2));
        assert_eq!(Poly::zero().degree(), None);
        assert_eq!((&a - &a), Poly::zero());
    }

    #[test]
    fn division_and_gcd() {
        let x1 = Poly::from_ints(&[-1, 1]);
        let x2 = Poly::from_ints(&[2, 1]);
        let x3 = Poly::from_ints(&[5, 0, 3]);
        let p = &(&x1 * &x2) * &Poly::from_ints(&[7]);
        let q = &x1 * &x3;
        assert_eq!(p.gcd(&q), x1);
        let (quo, rem) = p.div_rem(&x1);
        assert!(rem.is_zero());
        assert_eq!(quo, x2.scale(&BigRational::from_integer(7.into())));
        assert_eq!(x2.gcd(&x3), Poly::one());
        assert!(!p.is_coprime_to(&q));
        assert!(x2.is_coprime_to(&x3));
        assert!(Poly::from_ints(&[3]).is_coprime_to(&Poly::zero()));
        assert!(!Poly::zero().is_coprime_to(&x1));
        // large coefficients: modular and exact answers must agree
        let big = &x3.pow(40) + &Poly::from_ints(&[0, 1]);
        assert_eq!(big.is_coprime_to(&x3), big.gcd(&x3).is_constant());
    }

    #[test]
    fn div_t_is_exact() {
        let p = Poly::from_ints(&[0, 1, 1]);
        assert_eq!(p.div_t(), Some(Poly::from_ints(&[1, 1])));
        assert_eq!(Poly::from_ints(&[1, 1]).div_t(), None);
    }

    #[test]
    fn display() {
        assert_eq!(Poly::from_ints(&[-3, 2, 0, -1]).to_string(), "-t^3 + 2*t - 3");
        assert_eq!(Poly::from_ints(&[0, 1]).to_string(), "t");
    }
}
