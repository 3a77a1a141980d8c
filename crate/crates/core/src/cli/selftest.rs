//! Invariant suites run by `heightlab selftest`.
//!
//! Each suite draws its instances from a fixed seed and checks the engines
//! against exact big-rational iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{ln_rational, BigRational, Place, Prime, ProjectivePointQ};
use crate::dynamics::{conversion_check, homogeneous_orbit, FamilyParams, HomogeneousPair, PlaceCocycleState};
use crate::generic::{verify_coprime_iterates, RationalMap1D};
use crate::heights::{exact_scaled_log_max, increment_bounds, sufficient_places, tail_bound};
use crate::limits::Limits;
use crate::poly::Poly;

pub const SUITES: [&str; 5] = ["conversion", "tailbound", "goodplace", "coprime", "cocycle"];

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    /// Multiplier on the tail bound; values below 1 make the tail-bound
    /// suite fail, which is how the suite itself is tested.
    pub tail_scale: f64,
    pub seed: u64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            tail_scale: 1.0,
            seed: 20240917,
        }
    }
}

pub type SuiteResult = std::result::Result<usize, String>;

/// Runs one suite; Ok carries the number of checks performed.
pub fn run_suite(name: &str, opts: &SelftestOptions) -> Option<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    Some(match name {
        "conversion" => conversion_suite(&mut rng),
        "tailbound" => tailbound_suite(&mut rng, opts.tail_scale),
        "goodplace" => goodplace_suite(&mut rng),
        "coprime" => coprime_suite(),
        "cocycle" => cocycle_suite(&mut rng),
        _ => return None,
    })
}

fn small_rational(rng: &mut ChaCha8Rng, bound: i64) -> BigRational {
    loop {
        let p = rng.gen_range(-bound..=bound);
        let q = rng.gen_range(1..=bound);
        if p != 0 {
            return BigRational::new(p.into(), q.into());
        }
    }
}

fn small_poly(rng: &mut ChaCha8Rng, max_deg: usize) -> Poly {
    loop {
        let deg = rng.gen_range(0..=max_deg);
        let c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-3..=3)).collect();
        let p = Poly::from_ints(&c);
        if !p.is_zero() {
            return p;
        }
    }
}

fn conversion_suite(rng: &mut ChaCha8Rng) -> SuiteResult {
    let mut checks = 0;
    while checks < 30 {
        let (c, _) = RationalMap1D::from_polys(small_poly(rng, 2), small_poly(rng, 2)).map_err(|e| e.to_string())?;
        if c.num().is_zero() || c.den().is_zero() {
            continue;
        }
        let d = rng.gen_range(2..=3);
        let params = FamilyParams::new(d, small_rational(rng, 5)).unwrap();
        let k0 = rng.gen_range(0..=2);
        let n = rng.gen_range(0..=2);
        match conversion_check(&c, &params, k0, n) {
            Ok(true) => checks += 1,
            Ok(false) => return Err(format!("identity fails for c = {c}, d = {d}, lambda = {}, k0 = {k0}, n = {n}", params.lambda())),
            Err(_) => continue,
        }
    }
    Ok(checks)
}

fn finite_places(params: &FamilyParams, x: &ProjectivePointQ) -> Vec<Prime> {
    sufficient_places(params, x).map(|s| s.primes().cloned().collect()).unwrap_or_default()
}

fn tailbound_suite(rng: &mut ChaCha8Rng, scale: f64) -> SuiteResult {
    let lim = Limits::default();
    let mut checks = 0;
    for _ in 0..40 {
        let d = [2u32, 3, 5][rng.gen_range(0..3)];
        let nmax = if d == 5 { 6 } else { 8 };
        let params = FamilyParams::new(d, small_rational(rng, 9)).unwrap();
        let x = ProjectivePointQ::from_rational(&small_rational(rng, 9));
        let orbit = homogeneous_orbit(&params, &HomogeneousPair::from_point(&x), nmax, &lim).map_err(|e| e.to_string())?;
        let dn = |n: usize| (d as f64).powi(n as i32);
        for p in finite_places(&params, &x) {
            let v = Place::Finite(p.clone());
            let vals: Vec<f64> = orbit.iter().map(|h| exact_scaled_log_max(&p, h, d).unwrap()).collect();
            for n0 in 1..=nmax as usize {
                for n in n0..=nmax as usize {
                    checks += 1;
                    if (vals[n] - vals[n0]).abs() > scale * tail_bound(&params, &v, n0 as u32) + 1e-12 {
                        return Err(format!("p = {p}, d = {d}, lambda = {}, x = {x}, n0 = {n0}, n = {n}", params.lambda()));
                    }
                }
            }
        }
        let vals: Vec<f64> = orbit.iter().enumerate().map(|(n, h)| ln_rational(&h.max_abs()) / dn(n)).collect();
        for n0 in 1..=nmax as usize {
            for n in n0..=nmax as usize {
                checks += 1;
                if (vals[n] - vals[n0]).abs() > scale * tail_bound(&params, &Place::Archimedean, n0 as u32) + 1e-12 {
                    return Err(format!("archimedean, d = {d}, lambda = {}, x = {x}, n0 = {n0}, n = {n}", params.lambda()));
                }
            }
        }
    }
    Ok(checks)
}

fn goodplace_suite(rng: &mut ChaCha8Rng) -> SuiteResult {
    let lim = Limits::default();
    let small_primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    let mut checks = 0;
    for _ in 0..30 {
        let d = rng.gen_range(2..=4);
        let params = FamilyParams::new(d, small_rational(rng, 12)).unwrap();
        let x = ProjectivePointQ::from_rational(&small_rational(rng, 12));
        let set = sufficient_places(&params, &x).map_err(|e| e.to_string())?;
        let orbit = homogeneous_orbit(&params, &HomogeneousPair::from_point(&x), 5, &lim).map_err(|e| e.to_string())?;
        for &p in &small_primes {
            let v = Place::finite(p).unwrap();
            if set.contains(&v) {
                continue;
            }
            let p = Prime::from_u64(p).unwrap();
            for h in &orbit[1..] {
                checks += 1;
                if exact_scaled_log_max(&p, h, d).unwrap() != 0.0 {
                    return Err(format!("p = {p} omitted but M_{} != 1 for d = {d}, lambda = {}, x = {x}", h.n, params.lambda()));
                }
            }
        }
    }
    Ok(checks)
}

fn coprime_suite() -> SuiteResult {
    let maps = [
        (Poly::from_ints(&[0, 1]), Poly::from_ints(&[1, 1])),
        (Poly::from_ints(&[0, 1]), Poly::one()),
        (Poly::from_ints(&[1, 0, 1]), Poly::from_ints(&[-3, 2])),
        (Poly::from_ints(&[5]), Poly::one()),
        (Poly::from_ints(&[2, -1, 1]), Poly::from_ints(&[0, 0, 3])),
    ];
    let mut checks = 0;
    for (a, b) in maps {
        let (c, _) = RationalMap1D::from_polys(a, b).map_err(|e| e.to_string())?;
        for d in 2..=3 {
            checks += 1;
            if !verify_coprime_iterates(&c, d, 3).map_err(|e| e.to_string())? {
                return Err(format!("iterates of c = {c} share a factor for d = {d}"));
            }
        }
    }
    Ok(checks)
}

fn cocycle_suite(rng: &mut ChaCha8Rng) -> SuiteResult {
    let lim = Limits::default();
    let mut checks = 0;
    for _ in 0..30 {
        let d = rng.gen_range(2..=3);
        let nmax = if d == 2 { 12 } else { 8 };
        let params = FamilyParams::new(d, small_rational(rng, 20)).unwrap();
        let x = ProjectivePointQ::from_rational(&small_rational(rng, 20));
        let start = HomogeneousPair::from_point(&x);
        let orbit = homogeneous_orbit(&params, &start, nmax, &lim).map_err(|e| e.to_string())?;
        let (glo, ghi) = increment_bounds(&params, &Place::Archimedean);
        let mut st = PlaceCocycleState::new(&Place::Archimedean, &params, &start, 128).map_err(|e| e.to_string())?;
        for h in &orbit[1..] {
            st.advance(&params).map_err(|e| e.to_string())?;
            let exact = ln_rational(&h.max_abs()) / (d as f64).powi(h.n as i32);
            let (v, _) = st.scaled_log_max();
            checks += 1;
            if (v - exact).abs() > 1e-9 {
                return Err(format!("cocycle drift {v} vs {exact} at n = {} for lambda = {}, x = {x}", h.n, params.lambda()));
            }
            if let Some((lo, hi)) = st.last_increment() {
                if lo < glo - 1e-9 || hi > ghi + 1e-9 {
                    return Err(format!("increment [{lo}, {hi}] outside [{glo}, {ghi}] for lambda = {}", params.lambda()));
                }
            }
        }
    }
    Ok(checks)
}
