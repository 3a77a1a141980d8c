//! Outward-rounded intervals with dyadic endpoints m·2^e.
//!
//! Every operation returns an interval containing the exact result of the
//! operation on any points of its inputs. Products and integer scalings are
//! exact; only `round`, `add` across huge exponent gaps and `from_rational`
//! widen.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{ln_bigint, BigRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    Down,
    Up,
}

/// m·2^e.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    man: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(man: BigInt, exp: i64) -> Self {
        if man.is_zero() {
            return Self::zero();
        }
        Dyadic { man, exp }
    }

    pub fn zero() -> Self {
        Dyadic {
            man: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn from_int(n: BigInt) -> Self {
        Self::new(n, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    /// floor(log2 |x|) for x ≠ 0.
    pub fn ilog2(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.man.bits() as i64 - 1 + self.exp
    }

    fn neg(&self) -> Self {
        Dyadic {
            man: -&self.man,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            man: self.man.abs(),
            exp: self.exp,
        }
    }

    fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            man: self.man.clone(),
            exp: self.exp + k,
        }
    }

    fn mul(&self, o: &Dyadic) -> Self {
        Self::new(&self.man * &o.man, self.exp + o.exp)
    }

    fn scale(&self, k: &BigInt) -> Self {
        Self::new(&self.man * k, self.exp)
    }

    fn pow(&self, e: u32) -> Self {
        if e == 0 {
            return Self::from_int(BigInt::one());
        }
        Self::new(self.man.pow(e), self.exp * e as i64)
    }

    /// Sum rounded in direction `dir` when the exponent gap exceeds `gap`
    /// bits; exact otherwise.
    fn add(&self, o: &Dyadic, dir: Dir, gap: i64) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (big, small) = if self.ilog2() >= o.ilog2() {
            (self, o)
        } else {
            (o, self)
        };
        if big.ilog2() - small.ilog2() > gap {
            // |small| < 2^(ilog2(small)+1) <= 2^(ilog2(big)-gap) =: ulp
            let ulp_exp = big.ilog2() - gap;
            let ulp = Dyadic::new(BigInt::one(), ulp_exp);
            let step = if dir == Dir::Down { ulp.neg() } else { ulp };
            return exact_add(big, &step);
        }
        exact_add(self, o)
    }

    /// Round to at most `prec` mantissa bits in direction `dir`.
    fn round(&self, prec: u64, dir: Dir) -> Self {
        let bits = self.man.bits();
        if bits <= prec {
            return self.clone();
        }
        let k = bits - prec;
        let man = match dir {
            Dir::Down => floor_shr(&self.man, k),
            Dir::Up => -floor_shr(&-&self.man, k),
        };
        Self::new(man, self.exp + k as i64)
    }

    /// ln|x| for x ≠ 0 (approximate, within a few ulps).
    pub fn ln_abs(&self) -> f64 {
        ln_bigint(&self.man) + self.exp as f64 * std::f64::consts::LN_2
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let s = if self.is_negative() { -1.0 } else { 1.0 };
        s * self.ln_abs().exp()
    }
}

fn floor_shr(m: &BigInt, k: u64) -> BigInt {
    let (q, _) = m.div_mod_floor(&(BigInt::one() << k));
    q
}

fn exact_add(a: &Dyadic, b: &Dyadic) -> Dyadic {
    let e = a.exp.min(b.exp);
    let am = &a.man << (a.exp - e) as usize;
    let bm = &b.man << (b.exp - e) as usize;
    Dyadic::new(am + bm, e)
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.man.sign(), other.man.sign());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if self.is_zero() {
            return Ordering::Equal;
        }
        let by_mag = match self.ilog2().cmp(&other.ilog2()) {
            Ordering::Equal => {
                let e = self.exp.min(other.exp);
                let am = self.man.abs() << (self.exp - e) as usize;
                let bm = other.man.abs() << (other.exp - e) as usize;
                am.cmp(&bm)
            }
            o => o,
        };
        if self.is_negative() {
            by_mag.reverse()
        } else {
            by_mag
        }
    }
}

/// A closed interval [lo, hi] with dyadic endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

/// Exponent gap beyond which additions round instead of aligning mantissas.
const ADD_GAP: i64 = 1 << 14;

impl Interval {
    pub fn point(x: Dyadic) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn from_int(n: &BigInt) -> Self {
        Self::point(Dyadic::from_int(n.clone()))
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    /// Enclosure of a rational with about `prec` bits of relative accuracy.
    pub fn from_rational(q: &BigRational, prec: u64) -> Self {
        if q.is_integer() {
            let i = Self::from_int(q.numer());
            return i.round(prec);
        }
        let num = q.numer();
        let den = q.denom();
        let e = num.bits() as i64 - den.bits() as i64 - prec as i64 - 2;
        let (m, r) = if e < 0 {
            (num << (-e) as usize).div_mod_floor(den)
        } else {
            num.div_mod_floor(&(den << e as usize))
        };
        let exp = e;
        let lo = Dyadic::new(m.clone(), exp);
        let hi = if r.is_zero() {
            lo.clone()
        } else {
            Dyadic::new(m + 1, exp)
        };
        Interval { lo, hi }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// lo <= 0 <= hi.
    pub fn contains_zero(&self) -> bool {
        (self.lo.is_negative() || self.lo.is_zero()) && !self.hi.is_negative()
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: self.lo.add(&o.lo, Dir::Down, ADD_GAP),
            hi: self.hi.add(&o.hi, Dir::Up, ADD_GAP),
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    /// Exact multiplication by an integer.
    pub fn scale(&self, k: &BigInt) -> Interval {
        let a = self.lo.scale(k);
        let b = self.hi.scale(k);
        if k.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    /// Exact power, tight for intervals straddling zero.
    pub fn pow(&self, e: u32) -> Interval {
        if e == 0 {
            return Self::from_int(&BigInt::one());
        }
        let even = e % 2 == 0;
        let (l, h) = (self.lo.pow(e), self.hi.pow(e));
        if !even || !self.lo.is_negative() {
            return Interval { lo: l, hi: h };
        }
        if !self.hi.is_negative() && !self.hi.is_zero() {
            // straddles zero
            Interval {
                lo: Dyadic::zero(),
                hi: l.max(h),
            }
        } else {
            Interval { lo: h, hi: l }
        }
    }

    /// Exact multiplication by 2^k.
    pub fn shl(&self, k: i64) -> Interval {
        Interval {
            lo: self.lo.shl(k),
            hi: self.hi.shl(k),
        }
    }

    /// Outward rounding to `prec` mantissa bits.
    pub fn round(&self, prec: u64) -> Interval {
        Interval {
            lo: self.lo.round(prec, Dir::Down),
            hi: self.hi.round(prec, Dir::Up),
        }
    }

    /// Upper bound of |x| over the interval.
    pub fn mag_hi(&self) -> Dyadic {
        self.lo.abs().max(self.hi.abs())
    }

    /// Lower bound of |x| over the interval.
    pub fn mag_lo(&self) -> Dyadic {
        if self.contains_zero() {
            Dyadic::zero()
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Replaces an interval whose magnitude is below 2^floor_exp by the
    /// symmetric enclosure [-2^floor_exp, 2^floor_exp]. Exact zeros are kept.
    pub fn clamp_tiny(&self, floor_exp: i64) -> Interval {
        if self.is_exact_zero() {
            return self.clone();
        }
        let m = self.mag_hi();
        if m.ilog2() < floor_exp {
            let u = Dyadic::new(BigInt::one(), floor_exp);
            Interval { lo: u.neg(), hi: u }
        } else {
            self.clone()
        }
    }

    /// Relative width (hi - lo) / max(|lo|, |hi|), as a float.
    pub fn relative_width(&self) -> f64 {
        if self.is_exact_zero() {
            return 0.0;
        }
        let w = exact_add(&self.hi, &self.lo.neg());
        if w.is_zero() {
            return 0.0;
        }
        (w.ln_abs() - self.mag_hi().ln_abs()).exp()
    }
}

/// [max(lo_a, lo_b), max(hi_a, hi_b)] for two nonnegative enclosures.
pub fn max_bounds(a: (Dyadic, Dyadic), b: (Dyadic, Dyadic)) -> (Dyadic, Dyadic) {
    (a.0.max(b.0), a.1.max(b.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    fn contains(iv: &Interval, q: &BigRational) -> bool {
        let lo = dyadic_to_rational(iv.lo());
        let hi = dyadic_to_rational(iv.hi());
        &lo <= q && q <= &hi
    }

    fn dyadic_to_rational(d: &Dyadic) -> BigRational {
        if d.exp >= 0 {
            BigRational::from_integer(&d.man << d.exp as usize)
        } else {
            BigRational::new(d.man.clone(), BigInt::one() << (-d.exp) as usize)
        }
    }

    #[test]
    fn floor_shift_rounds_toward_negative_infinity() {
        assert_eq!(floor_shr(&BigInt::from(-5), 1), BigInt::from(-3));
        assert_eq!(floor_shr(&BigInt::from(5), 1), BigInt::from(2));
    }

    #[test]
    fn rational_enclosure() {
        for s in ["1/3", "-1/3", "22/7", "-100/3", "5", "-7/1024", "123456789/1000"] {
            let q = parse_rational(s).unwrap();
            let iv = Interval::from_rational(&q, 20);
            assert!(contains(&iv, &q), "{s}");
            assert!(iv.relative_width() < 1e-5, "{s}");
        }
    }

    #[test]
    fn operations_enclose() {
        let a = parse_rational("-2/3").unwrap();
        let b = parse_rational("5/7").unwrap();
        let ia = Interval::from_rational(&a, 40);
        let ib = Interval::from_rational(&b, 40);
        assert!(contains(&ia.add(&ib), &(&a + &b)));
        assert!(contains(&ia.mul(&ib), &(&a * &b)));
        assert!(contains(&ia.pow(3), &(&a * &a * &a)));
        assert!(contains(&ia.pow(4), &(&a * &a * &a * &a)));
        assert!(contains(&ia.scale(&BigInt::from(-9)), &(&a * BigRational::from_integer((-9).into()))));
        let r = ia.mul(&ib).round(8);
        assert!(contains(&r, &(&a * &b)));
    }

    #[test]
    fn straddling_powers() {
        let iv = Interval {
            lo: Dyadic::from_int((-2).into()),
            hi: Dyadic::from_int(1.into()),
        };
        let sq = iv.pow(2);
        assert_eq!(sq.lo, Dyadic::zero());
        assert_eq!(sq.hi, Dyadic::from_int(4.into()));
        let cube = iv.pow(3);
        assert_eq!(cube.lo, Dyadic::from_int((-8).into()));
        assert!(iv.contains_zero());
        assert_eq!(iv.mag_lo(), Dyadic::zero());
    }

    #[test]
    fn gap_addition_stays_small_and_encloses() {
        let big = Interval::from_int(&BigInt::from(3));
        let tiny = Interval::point(Dyadic::new(BigInt::from(5), -100_000));
        let s = big.add(&tiny);
        assert!(s.lo.man.bits() < 20_000);
        assert!(s.lo <= Dyadic::from_int(3.into()));
        assert!(s.hi > Dyadic::from_int(3.into()));
    }

    #[test]
    fn clamp_tiny_encloses() {
        let tiny = Interval::point(Dyadic::new(BigInt::from(-5), -5000));
        let c = tiny.clamp_tiny(-1000);
        assert!(c.lo < tiny.lo && c.hi > tiny.hi);
        assert_eq!(Interval::zero().clamp_tiny(-10), Interval::zero());
    }
}
