//! Canonical heights on the generic fiber: f_t(z) = (z^d + t)/z over ℚ(t).
//!
//! For a starting value c(t) = 𝐀(t)/𝐁(t) the canonical height is the degree
//! ratio max(deg 𝐀₁, deg 𝐁₁)/d of the first iterate, an exact rational.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::BigRational;
use crate::dynamics::iterate_poly_pairs;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::poly::Poly;

/// c(t) = 𝐀(t)/𝐁(t) with coprime integer polynomials, the denominator having
/// positive leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMap1D {
    num: Poly,
    den: Poly,
    c0_zero: bool,
}

impl RationalMap1D {
    /// Normalizes 𝐀/𝐁: divides out the gcd, clears denominators and
    /// content. Returns the removed common factor when it is nonconstant.
    pub fn from_polys(num: Poly, den: Poly) -> Result<(Self, Option<Poly>)> {
        if num.is_zero() && den.is_zero() {
            return Err(Error::InvalidInput("0/0 is not a rational function".to_string()));
        }
        if num.is_zero() {
            return Ok((Self::build(Poly::zero(), Poly::one()), None));
        }
        if den.is_zero() {
            return Ok((Self::build(Poly::one(), Poly::zero()), None));
        }
        let g = num.gcd(&den);
        let removed = if g.is_constant() { None } else { Some(g.clone()) };
        let num = num.div_rem(&g).0;
        let den = den.div_rem(&g).0;

        let l = num.denominator_lcm().lcm(&den.denominator_lcm());
        let lq = BigRational::from_integer(l);
        let (num, den) = (num.scale(&lq), den.scale(&lq));
        let content = num
            .coeffs()
            .iter()
            .chain(den.coeffs())
            .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
        let sign = if den.leading().is_negative() { -BigInt::one() } else { BigInt::one() };
        let k = BigRational::new(sign, content);
        Ok((Self::build(num.scale(&k), den.scale(&k)), removed))
    }

    fn build(num: Poly, den: Poly) -> Self {
        let c0_zero = num.constant_term().is_zero();
        RationalMap1D { num, den, c0_zero }
    }

    pub fn constant(alpha: &BigRational) -> Self {
        Self::from_polys(Poly::constant(alpha.clone()), Poly::one()).unwrap().0
    }

    /// c(t) = t.
    pub fn identity() -> Self {
        Self::build(Poly::t(), Poly::one())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// 𝐀(0) = 0.
    pub fn c0_zero(&self) -> bool {
        self.c0_zero
    }

    pub fn degree(&self) -> usize {
        self.num.deg().max(self.den.deg())
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    /// The constant value when c is constant and finite.
    pub fn constant_value(&self) -> Option<BigRational> {
        if self.is_constant() && !self.den.is_zero() {
            Some(self.num.constant_term() / self.den.constant_term())
        } else {
            None
        }
    }

    /// [𝐀(λ) : 𝐁(λ)]; both vanish only if the polynomials share a root,
    /// which normalization rules out.
    pub fn eval(&self, lambda: &BigRational) -> (BigRational, BigRational) {
        (self.num.eval(lambda), self.den.eval(lambda))
    }
}

impl fmt::Display for RationalMap1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else if let Some(a) = self.constant_value() {
            write!(f, "{}", crate::arith::format_rational(&a))
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Degrees of the first two iterates and the resulting exact height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericHeight {
    pub hhat: BigRational,
    pub deg_f1: usize,
    pub deg_f2: usize,
}

/// ĥ_f(c) = max(deg 𝐀₁, deg 𝐁₁)/d, checked against max(deg 𝐀₂, deg 𝐁₂)/d².
pub fn generic_height_detail(c: &RationalMap1D, d: u32) -> Result<GenericHeight> {
    if d < 2 {
        return Err(Error::InvalidInput(format!("degree d must be at least 2, got {d}")));
    }
    if c.num.is_zero() || c.den.is_zero() {
        return Ok(GenericHeight {
            hhat: BigRational::zero(),
            deg_f1: 0,
            deg_f2: 0,
        });
    }
    let pairs = iterate_poly_pairs(c, d, 2, &Limits::default())?;
    let deg_f1 = pairs[1].degree();
    let deg_f2 = pairs[2].degree();
    let d = BigInt::from(d);
    let hhat = BigRational::new(BigInt::from(deg_f1), d.clone());
    let check = BigRational::new(BigInt::from(deg_f2), &d * &d);
    assert_eq!(hhat, check, "degree law failed for c = {c}");
    Ok(GenericHeight { hhat, deg_f1, deg_f2 })
}

pub fn generic_height(c: &RationalMap1D, d: u32) -> Result<BigRational> {
    Ok(generic_height_detail(c, d)?.hhat)
}

/// True iff gcd(𝐀_n, 𝐁_n) = 1 in ℚ[t] for every n ≤ nmax.
pub fn verify_coprime_iterates(c: &RationalMap1D, d: u32, nmax: u64) -> Result<bool> {
    if c.num.is_zero() || c.den.is_zero() {
        return Ok(true);
    }
    let pairs = iterate_poly_pairs(c, d, nmax, &Limits::default())?;
    Ok(pairs.iter().all(|p| p.a.is_coprime_to(&p.b)))
}

/// Resultant as the determinant of the Sylvester matrix. For a constant
/// argument the convention Res(P, q) = q^deg P (and symmetrically) is used.
pub fn poly_resultant(p: &Poly, q: &Poly) -> Result<BigRational> {
    if p.is_zero() || q.is_zero() {
        return Err(Error::InvalidInput("resultant of the zero polynomial".to_string()));
    }
    let (m, n) = (p.deg(), q.deg());
    if n == 0 {
        return Ok(pow(&q.leading(), m));
    }
    if m == 0 {
        return Ok(pow(&p.leading(), n));
    }
    let size = m + n;
    let mut rows = vec![vec![BigRational::zero(); size]; size];
    for i in 0..n {
        for j in 0..=m {
            rows[i][i + j] = p.coeff(m - j);
        }
    }
    for i in 0..m {
        for j in 0..=n {
            rows[n + i][i + j] = q.coeff(n - j);
        }
    }
    Ok(determinant(rows))
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    crate::arith::rat_pow(x, e as u32)
}

/// Gaussian elimination over ℚ.
fn determinant(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pv;
            for c in col..n {
                let delta = &f * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    det
}
