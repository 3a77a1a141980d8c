//! Preperiodicity verdicts and the bounded search for parameters λ that make
//! a given α preperiodic under f_λ.
//!
//! α ≠ 0 is preperiodic for f_λ only if h(λ) < 3d²(1 + ℓ + 2h(α)), where ℓ
//! counts the primes dividing α, which makes the search finite.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{format_rational, height_rational, max_coordinate_for_height, prime_support, BigRational, ProjectivePointQ};
use crate::dynamics::{apply_map, orbit_point, FamilyParams};
use crate::error::{Error, Result};
use crate::heights::{global_canonical_height, CertifiedValue};
use crate::limits::Limits;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PreperiodicVerdict {
    /// x_{tail+cycle} = x_tail, found by exact orbit comparison.
    Preperiodic { tail: u64, cycle: u64 },
    /// Certified ĥ(x) ≥ hhat_lower > 0.
    NotPreperiodic { hhat_lower: f64, hhat: CertifiedValue },
    /// Neither an orbit collision nor a positive lower bound was found.
    Unknown { hhat: CertifiedValue },
}

impl PreperiodicVerdict {
    pub fn is_preperiodic(&self) -> bool {
        matches!(self, PreperiodicVerdict::Preperiodic { .. })
    }
}

/// Decides preperiodicity of x under f_λ: exact cycle detection over at most
/// `orbit_cap` steps, then a certified canonical height.
pub fn classify(
    params: &FamilyParams,
    x: &ProjectivePointQ,
    eps: f64,
    orbit_cap: u64,
    limits: &Limits,
) -> Result<PreperiodicVerdict> {
    params.require_nonzero_lambda()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if let Some((tail, cycle)) = find_cycle(params, x, orbit_cap, limits.classify_bit_cap) {
        return Ok(PreperiodicVerdict::Preperiodic { tail, cycle });
    }
    let hhat = global_canonical_height(params, x, eps, limits)?;
    if hhat.lower() > 0.0 {
        Ok(PreperiodicVerdict::NotPreperiodic {
            hhat_lower: hhat.lower(),
            hhat,
        })
    } else {
        Ok(PreperiodicVerdict::Unknown { hhat })
    }
}

/// (tail, cycle) of the first repeated orbit point, if one appears within
/// `steps` iterations before any coordinate passes `bit_cap` bits.
pub fn find_cycle(params: &FamilyParams, x: &ProjectivePointQ, steps: u64, bit_cap: u64) -> Option<(u64, u64)> {
    let mut seen: HashMap<ProjectivePointQ, u64> = HashMap::new();
    let mut cur = x.clone();
    for i in 0..=steps {
        if let Some(&j) = seen.get(&cur) {
            return Some((j, i - j));
        }
        if cur.bits() > bit_cap {
            return None;
        }
        let next = apply_map(params, &cur);
        seen.insert(cur, i);
        cur = next;
    }
    None
}

/// Replays the exact orbit and checks x_{tail+cycle} = x_tail.
pub fn verify_cycle(params: &FamilyParams, x: &ProjectivePointQ, tail: u64, cycle: u64, limits: &Limits) -> Result<bool> {
    if cycle == 0 {
        return Ok(false);
    }
    let orbit = orbit_point(params, x, tail + cycle, limits)?;
    Ok(orbit[tail as usize] == orbit[(tail + cycle) as usize])
}

/// ℓ = number of primes dividing the numerator or denominator of α.
pub fn ell(alpha: &BigRational) -> Result<usize> {
    Ok(prime_support(alpha)?.len())
}

fn require_nonzero_alpha(alpha: &BigRational) -> Result<()> {
    if alpha.is_zero() {
        Err(Error::InvalidInput("alpha=0 is preperiodic for every lambda".to_string()))
    } else {
        Ok(())
    }
}

/// 3d²(1 + ℓ + 2h(α)): every λ making α preperiodic has h(λ) below this.
pub fn parameter_height_bound(alpha: &BigRational, d: u32) -> Result<f64> {
    Ok(d as f64 * variation_bound(alpha, d)?)
}

/// 3d(1 + ℓ + 2h(α)), the bound on |ĥ_{f_λ}(α) − h(λ)/d|.
pub fn variation_bound(alpha: &BigRational, d: u32) -> Result<f64> {
    require_nonzero_alpha(alpha)?;
    let l = ell(alpha)? as f64;
    Ok(3.0 * d as f64 * (1.0 + l + 2.0 * height_rational(alpha)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub lambda: String,
    #[serde(flatten)]
    pub verdict: PreperiodicVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub alpha: String,
    pub d: u32,
    pub bound: f64,
    pub cap: f64,
    pub hits: Vec<SearchHit>,
    #[serde(rename = "x_candidates")]
    pub candidates: usize,
    /// Candidates left undecided at the requested eps.
    #[serde(rename = "x_unknown")]
    pub unknown: Vec<String>,
}

/// All reduced λ = p/q ≠ 0 with max(|p|, q) ≤ n, ordered by
/// (max(|p|, q), p, q).
pub fn parameters_up_to(n: u64) -> Vec<BigRational> {
    let mut out = Vec::new();
    for m in 1..=n as i64 {
        let mut layer: Vec<(i64, i64)> = Vec::new();
        for p in -m..=m {
            if p != 0 && p.gcd(&m) == 1 {
                layer.push((p, m));
            }
        }
        for q in 1..m {
            if q.gcd(&m) == 1 {
                layer.push((m, q));
                layer.push((-m, q));
            }
        }
        layer.sort();
        out.extend(layer.into_iter().map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q))));
    }
    out
}

/// Classifies every λ with h(λ) ≤ cap and reports the preperiodic ones,
/// each confirmed by replaying its orbit.
pub fn search_preperiodic_parameters(
    alpha: &BigRational,
    d: u32,
    cap: f64,
    eps: f64,
    orbit_cap: u64,
    limits: &Limits,
) -> Result<SearchReport> {
    let bound = parameter_height_bound(alpha, d)?;
    if !(cap >= 0.0) || cap > bound {
        return Err(Error::InvalidInput(format!("cap must lie in [0, {bound}], got {cap}")));
    }
    let n = max_coordinate_for_height(cap);
    let box_size = (2 * n as u128 + 1).pow(2);
    if box_size > limits.enumeration_budget {
        return Err(Error::RegionTooLarge {
            candidates: box_size,
            budget: limits.enumeration_budget,
        });
    }
    let x = ProjectivePointQ::from_rational(alpha);
    let candidates = parameters_up_to(n);
    let verdicts: Vec<Result<PreperiodicVerdict>> = candidates
        .par_iter()
        .map(|lam| {
            let params = FamilyParams::new(d, lam.clone())?;
            classify(&params, &x, eps, orbit_cap, limits)
        })
        .collect();
    let mut hits = Vec::new();
    let mut unknown = Vec::new();
    for (lam, v) in candidates.iter().zip(verdicts) {
        let v = v?;
        match v {
            PreperiodicVerdict::Preperiodic { tail, cycle } => {
                let params = FamilyParams::new(d, lam.clone())?;
                assert!(
                    verify_cycle(&params, &x, tail, cycle, limits)?,
                    "orbit replay disagrees for lambda = {lam}"
                );
                hits.push(SearchHit {
                    lambda: format_rational(lam),
                    verdict: v,
                });
            }
            PreperiodicVerdict::Unknown { .. } => unknown.push(format_rational(lam)),
            PreperiodicVerdict::NotPreperiodic { .. } => {}
        }
    }
    Ok(SearchReport {
        alpha: format_rational(alpha),
        d,
        bound,
        cap,
        hits,
        candidates: candidates.len(),
        unknown,
    })
}

/// |ĥ_{f_λ}(α) − h(λ)/d|, certified.
///
/// At λ = 0 the map is z^(d−1) with ĥ_{f₀}(α) = h(α). The value returned
/// there is the conventional ((d − 1)/d)·h(α), not |h(α) − h(0)/d| = h(α).
pub fn variation_gap(params: &FamilyParams, alpha: &BigRational, eps: f64, limits: &Limits) -> Result<CertifiedValue> {
    require_nonzero_alpha(alpha)?;
    let d = params.d() as f64;
    if params.lambda().is_zero() {
        let h = height_rational(alpha);
        return Ok(CertifiedValue::new((d - 1.0) / d * h, 1e-15 * h));
    }
    let hhat = global_canonical_height(params, &ProjectivePointQ::from_rational(alpha), eps, limits)?;
    let predicted = height_rational(params.lambda()) / d;
    let gap = (hhat.value - predicted).abs();
    Ok(CertifiedValue::new(gap, hhat.error + 1e-15 * (hhat.value.abs() + predicted)))
}
