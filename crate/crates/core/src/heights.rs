//! Certified local and global canonical heights.
//!
//! The local height at v of a lift (A, B) is lim log M_{n,v}/d^n with
//! M_{n,v} = max(|A_n|_v, |B_n|_v). Truncating at n₀ ≥ 1 leaves an error of
//! at most
//!
//! ```text
//! (ln(2·max{1, |λ|_v}) − ln(min{1, |λ|_v})) / (d^n₀·(d − 1)).
//! ```
//!
//! At a finite place where λ is a unit and the first iterate is primitive,
//! every M_{n,v} is 1, so only finitely many places contribute.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::arith::{
    abs_value, height_rational, ln_rational, padic_valuation, prime_support, weil_height, BigRational, Place, Prime,
    ProjectivePointQ,
};
use crate::dynamics::{orbit_point, step_homogeneous, FamilyParams, HomogeneousPair, PlaceCocycleState};
use crate::error::{Error, Result};
use crate::generic::{poly_resultant, RationalMap1D};
use crate::limits::Limits;

/// value ± error, with the true quantity guaranteed inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertifiedValue {
    pub value: f64,
    pub error: f64,
}

impl CertifiedValue {
    pub fn new(value: f64, error: f64) -> Self {
        // keep -0.0 out of serialized output
        CertifiedValue {
            value: value + 0.0,
            error: error.max(0.0) + 0.0,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0)
    }

    pub fn zero() -> Self {
        Self::exact(0.0)
    }

    pub fn lower(&self) -> f64 {
        self.value - self.error
    }

    pub fn upper(&self) -> f64 {
        self.value + self.error
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

impl std::ops::Add for CertifiedValue {
    type Output = CertifiedValue;
    fn add(self, o: CertifiedValue) -> CertifiedValue {
        let v = self.value + o.value;
        // one extra ulp-scale term for the float addition itself
        CertifiedValue::new(v, self.error + o.error + f64::EPSILON * v.abs())
    }
}

impl fmt::Display for CertifiedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", self.value, self.error)
    }
}

/// Why a place was included in a [`PlaceSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceReason {
    Archimedean,
    DividesLambda,
    DividesFirstIterate,
}

impl PlaceReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlaceReason::Archimedean => "archimedean",
            PlaceReason::DividesLambda => "divides_lambda",
            PlaceReason::DividesFirstIterate => "divides_first_iterate",
        }
    }
}

/// The archimedean place followed by finite places in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceSet {
    pub places: Vec<(Place, PlaceReason)>,
}

impl PlaceSet {
    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }

    pub fn contains(&self, v: &Place) -> bool {
        self.places.iter().any(|(p, _)| p == v)
    }

    pub fn primes(&self) -> impl Iterator<Item = &Prime> {
        self.places.iter().filter_map(|(p, _)| match p {
            Place::Finite(q) => Some(q),
            Place::Archimedean => None,
        })
    }
}

/// Places outside of which the local height of the canonical lift of `x0`
/// vanishes.
pub fn sufficient_places(params: &FamilyParams, x0: &ProjectivePointQ) -> Result<PlaceSet> {
    sufficient_places_for_lift(params, &HomogeneousPair::from_point(x0))
}

/// The archimedean place, the primes of λ, and the primes dividing a
/// numerator or denominator of the first iterate (A₁, B₁) of `lift`.
pub fn sufficient_places_for_lift(params: &FamilyParams, lift: &HomogeneousPair) -> Result<PlaceSet> {
    params.require_nonzero_lambda()?;
    let first = step_homogeneous(params, lift)?;
    let mut places = vec![(Place::Archimedean, PlaceReason::Archimedean)];
    let mut finite: Vec<(Prime, PlaceReason)> = prime_support(params.lambda())?
        .into_iter()
        .map(|p| (p, PlaceReason::DividesLambda))
        .collect();
    for x in [&first.a, &first.b] {
        if x.is_zero() {
            continue;
        }
        for p in prime_support(x)? {
            if !finite.iter().any(|(q, _)| *q == p) {
                finite.push((p, PlaceReason::DividesFirstIterate));
            }
        }
    }
    finite.sort_by(|a, b| a.0.cmp(&b.0));
    places.extend(finite.into_iter().map(|(p, r)| (Place::Finite(p), r)));
    Ok(PlaceSet { places })
}

/// ln|λ|_v.
pub fn ln_abs_lambda(params: &FamilyParams, v: &Place) -> f64 {
    match v {
        Place::Archimedean => ln_rational(params.lambda()),
        Place::Finite(_) => abs_value(v, params.lambda()).ln(),
    }
}

/// (ln(2·max{1, |λ|_v}) − ln(min{1, |λ|_v})) / (d^n₀·(d − 1)).
pub fn tail_bound(params: &FamilyParams, v: &Place, n0: u32) -> f64 {
    let l = ln_abs_lambda(params, v);
    let spread = std::f64::consts::LN_2 + l.max(0.0) - l.min(0.0);
    let d = params.d() as f64;
    spread / (d.powi(n0 as i32) * (d - 1.0))
}

/// Bound on |lim log N_k/d^k − log N_k₀/d^k₀| for a positive sequence with
/// m ≤ N_{k+1}/N_k^d ≤ M for all k ≥ k₀.
pub fn fundamental_inequality_bound(m: f64, big_m: f64, d: u32, k0: u32) -> f64 {
    let d = d as f64;
    (-m.ln()).max(big_m.ln()) / (d.powi(k0 as i32) * (d - 1.0))
}

/// The per-step window [ln(min{|λ|,1}/(2·max{|λ|,1})), ln(max{|λ|,1} + 1)]
/// that every increment g_k lies in.
pub fn increment_bounds(params: &FamilyParams, v: &Place) -> (f64, f64) {
    let l = ln_abs_lambda(params, v);
    let lo = l.min(0.0) - std::f64::consts::LN_2 - l.max(0.0);
    let hi = l.max(0.0).exp().ln_1p();
    (lo, hi)
}

/// Smallest n₀ ≥ 1 with tail_bound(n₀) ≤ budget.
pub fn truncation_index(params: &FamilyParams, v: &Place, budget: f64, limits: &Limits) -> Result<u32> {
    if !(budget > 0.0) {
        return Err(Error::InvalidInput(format!("error budget must be positive, got {budget}")));
    }
    let mut n0 = 1u32;
    while tail_bound(params, v, n0) > budget {
        n0 += 1;
        if n0 > limits.max_iterations {
            return Err(Error::CapExceeded(format!(
                "truncation index would exceed {} iterations",
                limits.max_iterations
            )));
        }
    }
    Ok(n0)
}

/// |λ|_p = 1 and max(|A₁|_p, |B₁|_p) = 1: every later M_{n,p} is 1.
fn primitive_after_one_step(p: &Prime, params: &FamilyParams, lift: &HomogeneousPair) -> Result<bool> {
    if padic_valuation(p, params.lambda())? != 0 {
        return Ok(false);
    }
    let first = step_homogeneous(params, lift)?;
    Ok(min_valuation(p, &first)? == Some(0))
}

/// min(v_p(A), v_p(B)), `None` for the zero pair.
pub fn min_valuation(p: &Prime, pair: &HomogeneousPair) -> Result<Option<i64>> {
    let mut best: Option<i64> = None;
    for x in [&pair.a, &pair.b] {
        if !x.is_zero() {
            let v = padic_valuation(p, x)?;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    Ok(best)
}

/// Local canonical height at v of the canonical lift of `x0`.
pub fn local_canonical_height(
    params: &FamilyParams,
    x0: &ProjectivePointQ,
    v: &Place,
    eps: f64,
    limits: &Limits,
) -> Result<CertifiedValue> {
    local_canonical_height_lift(params, &HomogeneousPair::from_point(x0), v, eps, limits)
}

/// Local canonical height at v of an explicit lift (A, B).
///
/// Half of `eps` goes to the series tail and half to arithmetic error; the
/// working precision doubles until the latter fits.
pub fn local_canonical_height_lift(
    params: &FamilyParams,
    lift: &HomogeneousPair,
    v: &Place,
    eps: f64,
    limits: &Limits,
) -> Result<CertifiedValue> {
    params.require_nonzero_lambda()?;
    if lift.is_degenerate() {
        return Err(Error::DegenerateOrbit(lift.n));
    }
    if lift.b.is_zero() {
        // [A : 0] is fixed and A_n = A^(d^n)
        return Ok(CertifiedValue::exact(abs_value(v, &lift.a).ln()));
    }
    if let Place::Finite(p) = v {
        if primitive_after_one_step(p, params, lift)? {
            return Ok(CertifiedValue::zero());
        }
    }
    let n0 = truncation_index(params, v, eps / 2.0, limits)?;
    let (mut prec, max_prec) = match v {
        Place::Archimedean => (limits.arch_start_bits, limits.arch_max_bits),
        Place::Finite(_) => (limits.padic_start_digits as u64, limits.padic_max_digits as u64),
    };
    // working integers are mantissas of `prec` bits, or residues mod p^prec
    let bits_per_unit = match v {
        Place::Archimedean => 1.0,
        Place::Finite(p) => p.ln() / std::f64::consts::LN_2,
    };
    let cap = limits.bigint_cap_bits() as f64;
    loop {
        if prec as f64 * bits_per_unit > cap {
            return Err(Error::CapExceeded(format!(
                "working precision {prec} at {v} exceeds the big-integer cap of {} bytes",
                limits.bigint_cap_bytes
            )));
        }
        match run_cocycle(params, lift, v, n0, prec) {
            Ok(state) => {
                let (value, num_err) = state.scaled_log_max();
                if num_err <= eps / 2.0 {
                    let tail = if state.is_terminal() { 0.0 } else { tail_bound(params, v, n0) };
                    return Ok(CertifiedValue::new(value, tail + num_err));
                }
            }
            Err(Error::PrecisionExhausted { .. }) => {}
            Err(e) => return Err(e),
        }
        if prec >= max_prec {
            return Err(Error::PrecisionExhausted { digits: prec as usize });
        }
        prec = (prec * 2).min(max_prec);
    }
}

/// Advances the cocycle n₀ steps, stopping early once B_n = 0.
fn run_cocycle(
    params: &FamilyParams,
    lift: &HomogeneousPair,
    v: &Place,
    n0: u32,
    prec: u64,
) -> Result<PlaceCocycleState> {
    let mut state = PlaceCocycleState::new(v, params, lift, prec)?;
    while state.index() < n0 as u64 && !state.is_terminal() {
        state.advance(params)?;
    }
    Ok(state)
}

/// Is the good-reduction shortcut available for c at v: (i) integral
/// coefficients, (ii) unit resultant and leading coefficients, (iii) a unit
/// or vanishing constant term of 𝐀.
pub fn good_place_shortcut(c: &RationalMap1D, v: &Place) -> Result<bool> {
    let Place::Finite(p) = v else {
        return Err(Error::InvalidInput("the good-reduction test needs a finite place".to_string()));
    };
    let (a, b) = (c.num(), c.den());
    if a.is_zero() || b.is_zero() {
        return Err(Error::InvalidInput("c must have nonzero numerator and denominator".to_string()));
    }
    let val = |x: &BigRational| padic_valuation(p, x);
    for x in a.coeffs().iter().chain(b.coeffs()) {
        if !x.is_zero() && val(x)? < 0 {
            return Ok(false);
        }
    }
    let res = poly_resultant(a, b)?;
    if res.is_zero() || val(&res)? != 0 || val(&a.leading())? != 0 || val(&b.leading())? != 0 {
        return Ok(false);
    }
    let a0 = a.constant_term();
    if !a0.is_zero() && val(&a0)? != 0 {
        return Ok(false);
    }
    Ok(true)
}

/// One place's share of a global height.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalContribution {
    pub place: Place,
    pub reason: PlaceReason,
    pub value: CertifiedValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalHeight {
    pub total: CertifiedValue,
    pub places: Vec<LocalContribution>,
}

pub fn global_canonical_height(
    params: &FamilyParams,
    x0: &ProjectivePointQ,
    eps: f64,
    limits: &Limits,
) -> Result<CertifiedValue> {
    Ok(global_canonical_height_detail(params, x0, eps, limits)?.total)
}

/// Sum of local heights over [`sufficient_places`], each computed to eps/|S|.
/// The orbits of 0 and ∞ end at the fixed point ∞, so their height is
/// reported as exactly 0.
pub fn global_canonical_height_detail(
    params: &FamilyParams,
    x0: &ProjectivePointQ,
    eps: f64,
    limits: &Limits,
) -> Result<GlobalHeight> {
    let g = global_canonical_height_lift(params, &HomogeneousPair::from_point(x0), eps, limits)?;
    if x0.is_infinity() || x0.is_zero() {
        return Ok(GlobalHeight {
            total: CertifiedValue::zero(),
            places: g.places,
        });
    }
    Ok(g)
}

/// Global height computed from an arbitrary lift; equal to the value for
/// the canonical lift by the product formula.
pub fn global_canonical_height_lift(
    params: &FamilyParams,
    lift: &HomogeneousPair,
    eps: f64,
    limits: &Limits,
) -> Result<GlobalHeight> {
    params.require_nonzero_lambda()?;
    let set = sufficient_places_for_lift(params, lift)?;
    let share = eps / set.len() as f64;
    let mut total = CertifiedValue::zero();
    let mut places = Vec::with_capacity(set.len());
    for (place, reason) in set.places {
        let value = local_canonical_height_lift(params, lift, &place, share, limits)?;
        total = total + value;
        places.push(LocalContribution { place, reason, value });
    }
    // float additions may push the error a hair over the requested budget
    if total.error > eps && total.error <= eps * (1.0 + 1e-9) {
        total.error = eps;
    }
    Ok(GlobalHeight { total, places })
}

/// h(f^n(x))/d^n from the exact reduced orbit.
pub fn naive_height_oracle(params: &FamilyParams, x0: &ProjectivePointQ, n: u64, limits: &Limits) -> Result<f64> {
    let orbit = orbit_point(params, x0, n, limits)?;
    let last = orbit.last().unwrap();
    Ok(weil_height(last) / (params.d() as f64).powi(n as i32))
}

/// log M_{n,v}/d^n of an exact pair at a finite place: −min v_p · ln p / d^n.
pub fn exact_scaled_log_max(p: &Prime, pair: &HomogeneousPair, d: u32) -> Result<f64> {
    let w = min_valuation(p, pair)?.ok_or(Error::DegenerateOrbit(pair.n))?;
    Ok(-(w as f64) * p.ln() / (d as f64).powi(pair.n as i32))
}

/// Naive Weil height of λ, h(λ) = ln max(|num|, |den|).
pub fn lambda_height(params: &FamilyParams) -> f64 {
    height_rational(params.lambda())
}
