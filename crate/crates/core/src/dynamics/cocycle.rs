//! Renormalized per-place iteration of the homogeneous recursion.
//!
//! Both engines keep a normalized pair p_n and an exact record of the scale
//! S_n with (A_n, B_n) = S_n·p_n, so that
//!
//! ```text
//! log M_{n,v} / d^n = log M_{0,v} + Σ_{k<n} g_k / d^(k+1),
//! g_k = log M_{k+1,v} − d·log M_{k,v}
//! ```
//!
//! is available at every step without building the exact integers.
//!
//! Archimedean: p_n is a pair of dyadic intervals with max|p_n| in [1, 2)
//! and log S_n = E_n·ln 2 − U_n·ln s where λ = r/s; E_n, U_n are integers.
//!
//! Finite: p_n is (valuation, unit mod p^N) per coordinate with minimum
//! valuation 0 and S_n = p^(W_n). A tie v(a^d) = v(λb^d) whose unit sum
//! vanishes mod p^N either is certified to be an exact zero (using a bit
//! bound on an integral lift) or raises `PrecisionExhausted`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{FamilyParams, HomogeneousPair};
use crate::arith::{ln_bigint, padic_valuation, ratio_f64, BigRational, Place, Prime};
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Debug, Clone)]
pub enum PlaceCocycleState {
    Archimedean(ArchState),
    Finite(FiniteState),
}

impl PlaceCocycleState {
    /// Starts the cocycle at the exact pair `start`. `precision` is the
    /// mantissa width in bits at the archimedean place and the number of
    /// base-p digits at a finite place.
    pub fn new(place: &Place, params: &FamilyParams, start: &HomogeneousPair, precision: u64) -> Result<Self> {
        params.require_nonzero_lambda()?;
        if start.is_degenerate() {
            return Err(Error::DegenerateOrbit(start.n));
        }
        Ok(match place {
            Place::Archimedean => Self::Archimedean(ArchState::new(params, start, precision)),
            Place::Finite(p) => Self::Finite(FiniteState::new(p, params, start, precision)?),
        })
    }

    pub fn place(&self) -> Place {
        match self {
            Self::Archimedean(_) => Place::Archimedean,
            Self::Finite(s) => Place::Finite(s.p.clone()),
        }
    }

    /// Index n of the current iterate.
    pub fn index(&self) -> u64 {
        match self {
            Self::Archimedean(s) => s.n,
            Self::Finite(s) => s.n,
        }
    }

    pub fn precision(&self) -> u64 {
        match self {
            Self::Archimedean(s) => s.prec,
            Self::Finite(s) => s.digits as u64,
        }
    }

    /// True once B_n = 0 exactly: from then on M_{n+1} = M_n^d and the
    /// partial value is the limit.
    pub fn is_terminal(&self) -> bool {
        match self {
            Self::Archimedean(s) => s.b.is_exact_zero(),
            Self::Finite(s) => s.b.is_none(),
        }
    }

    /// Enclosure [lo, hi] of the last increment g_{n-1}.
    pub fn last_increment(&self) -> Option<(f64, f64)> {
        match self {
            Self::Archimedean(s) => s.last_g,
            Self::Finite(s) => s.last_g.map(|g| (g, g)),
        }
    }

    /// log M_{n,v} / d^n as (value, error radius).
    pub fn scaled_log_max(&self) -> (f64, f64) {
        match self {
            Self::Archimedean(s) => s.scaled_log_max(),
            Self::Finite(s) => s.scaled_log_max(),
        }
    }

    pub fn advance(&mut self, params: &FamilyParams) -> Result<()> {
        match self {
            Self::Archimedean(s) => s.advance(params),
            Self::Finite(s) => s.advance(params),
        }
    }
}

/// One renormalized step of the homogeneous recursion at the state's place.
pub fn cocycle_step(state: &PlaceCocycleState, params: &FamilyParams) -> Result<PlaceCocycleState> {
    let mut next = state.clone();
    next.advance(params)?;
    Ok(next)
}

#[derive(Debug, Clone)]
pub struct ArchState {
    d: u32,
    n: u64,
    prec: u64,
    a: Interval,
    b: Interval,
    e_acc: BigInt,
    u_acc: BigInt,
    d_pow: BigInt,
    ln_s: f64,
    last_g: Option<(f64, f64)>,
}

impl ArchState {
    fn new(params: &FamilyParams, start: &HomogeneousPair, prec: u64) -> Self {
        let prec = prec.max(16);
        let a = Interval::from_rational(&start.a, prec);
        let b = Interval::from_rational(&start.b, prec);
        let t = a.mag_hi().max(b.mag_hi()).ilog2();
        ArchState {
            d: params.d(),
            n: 0,
            prec,
            a: a.shl(-t),
            b: b.shl(-t),
            e_acc: BigInt::from(t),
            u_acc: BigInt::zero(),
            d_pow: BigInt::one(),
            ln_s: ln_bigint(params.lambda().denom()),
            last_g: None,
        }
    }

    fn floor_exp(&self) -> i64 {
        -(4 * self.prec as i64 + 64)
    }

    /// Bounds on ln max(|a|, |b|); the lower bound is −∞ once both
    /// coordinates straddle zero.
    fn ln_max_bounds(&self) -> (f64, f64) {
        let hi = self.a.mag_hi().max(self.b.mag_hi());
        let lo = self.a.mag_lo().max(self.b.mag_lo());
        let lo = if lo.is_zero() {
            f64::NEG_INFINITY
        } else {
            lo.ln_abs()
        };
        (lo, hi.ln_abs())
    }

    fn advance(&mut self, params: &FamilyParams) -> Result<()> {
        debug_assert_eq!(params.d(), self.d);
        let (r, s) = (params.lambda().numer(), params.lambda().denom());
        let bd1 = self.b.pow(self.d - 1);
        let raw_a = self.a.pow(self.d).scale(s).add(&bd1.mul(&self.b).scale(r));
        let raw_b = self.a.mul(&bd1).scale(s);
        if raw_a.is_exact_zero() && raw_b.is_exact_zero() {
            return Err(Error::DegenerateOrbit(self.n + 1));
        }
        let t = raw_a.mag_hi().max(raw_b.mag_hi()).ilog2();
        let fl = self.floor_exp();
        let (prev_lo, prev_hi) = self.ln_max_bounds();
        self.a = raw_a.shl(-t).round(self.prec).clamp_tiny(fl);
        self.b = raw_b.shl(-t).round(self.prec).clamp_tiny(fl);
        self.e_acc = &self.e_acc * self.d + t;
        self.u_acc = &self.u_acc * self.d + 1;
        self.d_pow *= self.d;
        self.n += 1;
        let (lo, hi) = self.ln_max_bounds();
        let shift = t as f64 * std::f64::consts::LN_2 - self.ln_s;
        let df = self.d as f64;
        let slack = 1e-12 * (1.0 + shift.abs() + df * prev_hi.abs().max(prev_lo.abs().min(1e300)));
        self.last_g = Some((lo + shift - df * prev_hi - slack, hi + shift - df * prev_lo + slack));
        Ok(())
    }

    fn scaled_log_max(&self) -> (f64, f64) {
        let fe = ratio_f64(&self.e_acc, &self.d_pow);
        let fu = ratio_f64(&self.u_acc, &self.d_pow);
        let (lo, hi) = self.ln_max_bounds();
        let inv = (self.d as f64).powi(-(self.n.min(i32::MAX as u64) as i32));
        let ln2 = std::f64::consts::LN_2;
        let base = fe * ln2 - fu * self.ln_s;
        let rounding = 1e-14 * (fe.abs() * ln2 + fu.abs() * self.ln_s) + 1e-12 * (1.0 + hi.abs()) * inv;
        if !lo.is_finite() {
            return (base + hi * inv, f64::INFINITY);
        }
        let mid = 0.5 * (lo + hi);
        (base + mid * inv, 0.5 * (hi - lo) * inv + rounding)
    }
}

/// (valuation, unit mod p^N) for a nonzero coordinate; `None` is exact zero.
type Coord = Option<(i64, BigInt)>;

#[derive(Debug, Clone)]
pub struct FiniteState {
    p: Prime,
    pz: BigInt,
    d: u32,
    n: u64,
    digits: usize,
    start_digits: usize,
    modulus: BigInt,
    a: Coord,
    b: Coord,
    w_acc: BigInt,
    d_pow: BigInt,
    lam_val: i64,
    lam_unit: BigRational,
    lam_unit_mod: BigInt,
    ln_p: f64,
    last_g: Option<f64>,
    // Exact-zero certificate data: an integral lift (Ã_n, B̃_n) =
    // s^(c_n)·D^(d^n)·(A_n, B_n) has both coordinates below 2^lift_bits.
    lift_bits: BigInt,
    c_exp: BigInt,
    vp_s: u64,
    vp_den: u64,
    rs_bits: u64,
    log2_p: u64,
}

fn inverse_mod(x: &BigInt, m: &BigInt) -> BigInt {
    let e = x.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// p-free part of a nonzero integer.
fn strip(x: &BigInt, p: &BigInt) -> BigInt {
    let mut x = x.clone();
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return x;
        }
        x = q;
    }
}

impl FiniteState {
    fn new(p: &Prime, params: &FamilyParams, start: &HomogeneousPair, digits: u64) -> Result<Self> {
        let digits = digits.max(1) as usize;
        let pz = p.to_bigint();
        let modulus = num_traits::pow(pz.clone(), digits);
        let lam = params.lambda();
        let lam_val = padic_valuation(p, lam)?;
        let lam_unit = BigRational::new(strip(lam.numer(), &pz), strip(lam.denom(), &pz));
        let mut st = FiniteState {
            p: p.clone(),
            pz: pz.clone(),
            d: params.d(),
            n: 0,
            digits,
            start_digits: digits,
            modulus,
            a: None,
            b: None,
            w_acc: BigInt::zero(),
            d_pow: BigInt::one(),
            lam_val,
            lam_unit_mod: BigInt::zero(),
            lam_unit,
            ln_p: p.ln(),
            last_g: None,
            lift_bits: BigInt::zero(),
            c_exp: BigInt::zero(),
            vp_s: 0,
            vp_den: 0,
            rs_bits: 0,
            log2_p: p.value().bits() - 1,
        };
        st.lam_unit_mod = st.unit_mod(&st.lam_unit);
        let a = st.coord(&start.a)?;
        let b = st.coord(&start.b)?;
        let w = [&a, &b].iter().filter_map(|c| c.as_ref().map(|x| x.0)).min().unwrap();
        st.a = a.map(|(v, u)| (v - w, u));
        st.b = b.map(|(v, u)| (v - w, u));
        st.w_acc = BigInt::from(w);

        let den = start.a.denom().lcm(start.b.denom());
        let at = (&start.a * BigRational::from_integer(den.clone())).to_integer();
        let bt = (&start.b * BigRational::from_integer(den.clone())).to_integer();
        st.lift_bits = BigInt::from(at.bits().max(bt.bits()));
        st.vp_den = crate::arith::valuation_int(p.value(), &den);
        st.vp_s = crate::arith::valuation_int(p.value(), lam.denom());
        st.rs_bits = (lam.numer().abs() + lam.denom()).bits();
        Ok(st)
    }

    fn unit_mod(&self, u: &BigRational) -> BigInt {
        let n = u.numer().mod_floor(&self.modulus);
        let d = inverse_mod(u.denom(), &self.modulus);
        (n * d).mod_floor(&self.modulus)
    }

    fn coord(&self, x: &BigRational) -> Result<Coord> {
        if x.is_zero() {
            return Ok(None);
        }
        let v = padic_valuation(&self.p, x)?;
        let u = BigRational::new(strip(x.numer(), &self.pz), strip(x.denom(), &self.pz));
        Ok(Some((v, self.unit_mod(&u))))
    }

    fn mul_mod(&self, x: &BigInt, y: &BigInt) -> BigInt {
        (x * y).mod_floor(&self.modulus)
    }

    fn pow_mod(&self, x: &BigInt, e: u32) -> BigInt {
        x.modpow(&BigInt::from(e), &self.modulus)
    }

    fn set_digits(&mut self, digits: usize) {
        if digits == self.digits {
            return;
        }
        self.digits = digits;
        self.modulus = num_traits::pow(self.pz.clone(), digits);
        let m = self.modulus.clone();
        for c in [&mut self.a, &mut self.b].into_iter().flatten() {
            c.1 = c.1.mod_floor(&m);
        }
        self.lam_unit_mod = self.unit_mod(&self.lam_unit);
    }

    fn exhausted(&self) -> Error {
        Error::PrecisionExhausted {
            digits: self.start_digits,
        }
    }

    fn advance(&mut self, params: &FamilyParams) -> Result<()> {
        debug_assert_eq!(params.d(), self.d);
        let d = self.d;
        let di = d as i64;
        let t1 = self.a.as_ref().map(|(v, u)| (di * v, self.pow_mod(u, d)));
        let t2 = self
            .b
            .as_ref()
            .map(|(v, u)| (self.lam_val + di * v, self.mul_mod(&self.lam_unit_mod, &self.pow_mod(u, d))));
        let next_c = &self.c_exp * d + 1u32;
        let next_bits = &self.lift_bits * d + self.rs_bits;
        let next_dpow = &self.d_pow * d;

        let mut lost = 0usize;
        let new_a: Coord = match (t1, t2) {
            (None, None) => None,
            (Some(x), None) | (None, Some(x)) => Some(x),
            (Some((v1, u1)), Some((v2, u2))) => {
                if v1 != v2 {
                    let (lo, hi) = if v1 < v2 { ((v1, u1), (v2, u2)) } else { ((v2, u2), (v1, u1)) };
                    let gap = (hi.0 - lo.0) as usize;
                    let u = if gap >= self.digits {
                        lo.1
                    } else {
                        (lo.1 + hi.1 * num_traits::pow(self.pz.clone(), gap)).mod_floor(&self.modulus)
                    };
                    Some((lo.0, u))
                } else {
                    let s = (u1 + u2).mod_floor(&self.modulus);
                    if s.is_zero() {
                        // v(A_{n+1}) >= d·W_n + v1 + N; compare against the
                        // largest valuation a nonzero lift coordinate can have.
                        let lower = &self.w_acc * d
                            + v1
                            + self.digits as i64
                            + &next_c * self.vp_s
                            + &next_dpow * self.vp_den;
                        if lower * self.log2_p >= next_bits {
                            None
                        } else {
                            return Err(self.exhausted());
                        }
                    } else {
                        let mut k = 0usize;
                        let mut s = s;
                        loop {
                            let (q, r) = s.div_rem(&self.pz);
                            if !r.is_zero() {
                                break;
                            }
                            s = q;
                            k += 1;
                        }
                        lost = k;
                        Some((v1 + k as i64, s))
                    }
                }
            }
        };
        let new_b: Coord = match (&self.a, &self.b) {
            (Some((va, ua)), Some((vb, ub))) => {
                Some((va + (di - 1) * vb, self.mul_mod(ua, &self.pow_mod(ub, d - 1))))
            }
            _ => None,
        };
        let m = match [&new_a, &new_b].iter().filter_map(|c| c.as_ref().map(|x| x.0)).min() {
            Some(m) => m,
            None => return Err(Error::DegenerateOrbit(self.n + 1)),
        };
        if lost >= self.digits {
            return Err(self.exhausted());
        }
        self.a = new_a.map(|(v, u)| (v - m, u));
        self.b = new_b.map(|(v, u)| (v - m, u));
        self.set_digits(self.digits - lost);
        self.w_acc = &self.w_acc * d + m;
        self.d_pow = next_dpow;
        self.c_exp = next_c;
        self.lift_bits = next_bits;
        self.n += 1;
        self.last_g = Some(-(m as f64) * self.ln_p);
        Ok(())
    }

    /// −W_n·ln p / d^n. The only error is float rounding.
    fn scaled_log_max(&self) -> (f64, f64) {
        let v = -ratio_f64(&self.w_acc, &self.d_pow) * self.ln_p;
        (v, 1e-14 * v.abs())
    }

    /// Exact W_n/d^n, so that log M_{n,p}/d^n = −(W_n/d^n)·ln p.
    pub fn scaled_valuation(&self) -> BigRational {
        BigRational::new(self.w_acc.clone(), self.d_pow.clone())
    }
}

impl PlaceCocycleState {
    /// The exact W_n/d^n at a finite place.
    pub fn scaled_valuation(&self) -> Option<BigRational> {
        match self {
            Self::Finite(s) => Some(s.scaled_valuation()),
            Self::Archimedean(_) => None,
        }
    }
}
