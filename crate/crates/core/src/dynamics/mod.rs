//! Orbits of f_λ(z) = (z^d + λ)/z: exact point orbits, exact homogeneous
//! lifts, polynomial orbits over ℚ[t] and the per-place cocycle engine.
//!
//! The homogeneous recursion is
//!
//! ```text
//! A_{n+1} = A_n^d + λ·B_n^d,   B_{n+1} = A_n·B_n^(d-1)
//! ```
//!
//! so f_λ^n([A : B]) = [A_n : B_n].

mod cocycle;

pub use cocycle::{cocycle_step, ArchState, FiniteState, PlaceCocycleState};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{rat_pow, BigRational, ProjectivePointQ};
use crate::error::{Error, Result};
use crate::generic::RationalMap1D;
use crate::limits::Limits;
use crate::poly::Poly;

/// The member f_λ(z) = (z^d + λ)/z of the family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    d: u32,
    lambda: BigRational,
}

impl FamilyParams {
    /// Accepts any λ, including 0; orbit operations check λ ≠ 0 themselves.
    pub fn new(d: u32, lambda: BigRational) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidInput(format!("degree d must be at least 2, got {d}")));
        }
        Ok(FamilyParams { d, lambda })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn lambda(&self) -> &BigRational {
        &self.lambda
    }

    pub(crate) fn require_nonzero_lambda(&self) -> Result<()> {
        if self.lambda.is_zero() {
            Err(Error::InvalidInput("lambda must be nonzero".to_string()))
        } else {
            Ok(())
        }
    }
}

/// An exact lift (A_n, B_n) of f^n of the starting point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousPair {
    pub a: BigRational,
    pub b: BigRational,
    pub n: u64,
}

impl HomogeneousPair {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        HomogeneousPair { a, b, n: 0 }
    }

    /// The coprime-integer lift of a projective point.
    pub fn from_point(x: &ProjectivePointQ) -> Self {
        let (a, b) = x.lift();
        Self::new(a, b)
    }

    /// The lift (x, 1) of an affine point.
    pub fn affine(x: &BigRational) -> Self {
        Self::new(x.clone(), BigRational::one())
    }

    pub fn is_degenerate(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn point(&self) -> Result<ProjectivePointQ> {
        ProjectivePointQ::new(self.a.clone(), self.b.clone())
    }

    /// max(|A|, |B|) as an exact rational.
    pub fn max_abs(&self) -> BigRational {
        let (x, y) = (self.a.abs(), self.b.abs());
        if x >= y {
            x
        } else {
            y
        }
    }
}

/// One exact step of the homogeneous recursion. λ = 0 is allowed here.
pub fn step_homogeneous(params: &FamilyParams, pair: &HomogeneousPair) -> Result<HomogeneousPair> {
    if pair.is_degenerate() {
        return Err(Error::DegenerateOrbit(pair.n));
    }
    let d = params.d;
    let bd1 = rat_pow(&pair.b, d - 1);
    let a = rat_pow(&pair.a, d) + &params.lambda * (&bd1 * &pair.b);
    let b = &pair.a * bd1;
    let next = HomogeneousPair { a, b, n: pair.n + 1 };
    if next.is_degenerate() {
        return Err(Error::DegenerateOrbit(next.n));
    }
    Ok(next)
}

/// The exact lifts (A_0, B_0), …, (A_n, B_n), stopping with `CapExceeded`
/// once a coordinate would pass the bigint cap.
pub fn homogeneous_orbit(
    params: &FamilyParams,
    start: &HomogeneousPair,
    n: u64,
    limits: &Limits,
) -> Result<Vec<HomogeneousPair>> {
    let cap = limits.bigint_cap_bits();
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(start.clone());
    for _ in 0..n {
        let cur = out.last().unwrap();
        let est = pair_bits(cur).saturating_mul(params.d as u64) + lambda_bits(params);
        if est > cap {
            return Err(Error::CapExceeded(format!(
                "exact lift at step {} would need about {est} bits",
                cur.n + 1
            )));
        }
        let next = step_homogeneous(params, cur)?;
        out.push(next);
    }
    Ok(out)
}

fn rational_bits(x: &BigRational) -> u64 {
    x.numer().bits() + x.denom().bits()
}

fn pair_bits(p: &HomogeneousPair) -> u64 {
    rational_bits(&p.a).max(rational_bits(&p.b))
}

fn lambda_bits(params: &FamilyParams) -> u64 {
    rational_bits(&params.lambda)
}

/// f_λ applied to a canonical point, with the result in canonical form.
pub fn apply_map(params: &FamilyParams, x: &ProjectivePointQ) -> ProjectivePointQ {
    if x.is_infinity() || x.is_zero() {
        return ProjectivePointQ::infinity();
    }
    let (r, s) = (params.lambda.numer(), params.lambda.denom());
    let d = params.d as usize;
    let ad = num_traits::pow(x.a().clone(), d);
    let bd1 = num_traits::pow(x.b().clone(), d - 1);
    let bd = &bd1 * x.b();
    let num = s * ad + r * bd;
    let den = s * x.a() * bd1;
    if num.is_zero() {
        return ProjectivePointQ::from_integers(BigInt::zero(), BigInt::one());
    }
    ProjectivePointQ::from_integers(num, den)
}

/// The exact reduced orbit x_0, f(x_0), …, f^n(x_0).
pub fn orbit_point(
    params: &FamilyParams,
    x0: &ProjectivePointQ,
    n: u64,
    limits: &Limits,
) -> Result<Vec<ProjectivePointQ>> {
    params.require_nonzero_lambda()?;
    let cap = limits.bigint_cap_bits();
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(x0.clone());
    for i in 0..n {
        let cur = out.last().unwrap();
        let est = cur.bits().saturating_mul(params.d as u64) + lambda_bits(params);
        if est > cap {
            return Err(Error::CapExceeded(format!(
                "orbit point {} would need about {est} bits",
                i + 1
            )));
        }
        let next = apply_map(params, cur);
        out.push(next);
    }
    Ok(out)
}

/// The pair (𝐀_{c,n}, 𝐁_{c,n}) over ℚ[t] representing f_t^n(c(t)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyPair {
    pub a: Poly,
    pub b: Poly,
    pub n: u64,
}

impl PolyPair {
    pub fn degree(&self) -> usize {
        self.a.deg().max(self.b.deg())
    }

    pub fn eval(&self, t: &BigRational) -> (BigRational, BigRational) {
        (self.a.eval(t), self.b.eval(t))
    }
}

/// All pairs (𝐀_{c,k}, 𝐁_{c,k}) for k = 0..=n.
///
/// When 𝐀(0) = 0 the first step divides both polynomials by t.
pub fn iterate_poly_pairs(c: &RationalMap1D, d: u32, n: u64, limits: &Limits) -> Result<Vec<PolyPair>> {
    if c.num().is_zero() || c.den().is_zero() {
        return Err(Error::InvalidInput(
            "polynomial iteration needs a nonzero numerator and denominator".to_string(),
        ));
    }
    if d < 2 {
        return Err(Error::InvalidInput(format!("degree d must be at least 2, got {d}")));
    }
    let mut deg = c.degree().max(1) as u128;
    for _ in 0..n {
        deg = deg.saturating_mul(d as u128);
    }
    if deg > limits.poly_max_degree as u128 {
        return Err(Error::CapExceeded(format!(
            "iterate {n} would reach degree about {deg}"
        )));
    }
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(PolyPair {
        a: c.num().clone(),
        b: c.den().clone(),
        n: 0,
    });
    let t = Poly::t();
    for k in 0..n {
        let cur = out.last().unwrap();
        let bd1 = cur.b.pow(d - 1);
        let mut a = &cur.a.pow(d) + &(&t * &(&bd1 * &cur.b));
        let mut b = &cur.a * &bd1;
        if k == 0 && c.c0_zero() {
            a = a.div_t().expect("t divides A^d + t*B^d when A(0) = 0");
            b = b.div_t().expect("t divides A*B^(d-1) when A(0) = 0");
        }
        out.push(PolyPair { a, b, n: k + 1 });
    }
    Ok(out)
}

pub fn iterate_poly_pair(c: &RationalMap1D, d: u32, n: u64, limits: &Limits) -> Result<PolyPair> {
    Ok(iterate_poly_pairs(c, d, n, limits)?.pop().unwrap())
}

/// Checks A_{c,n+k0}(λ) = 𝐁_{c,k0}(λ)^(d^n)·A_{λ, f^k0(c(λ)), n} and the
/// matching identity for B, exactly.
///
/// For c(0) = 0 and k0 = 0 the first polynomial step carries an extra 1/t,
/// so the right-hand sides pick up λ^(-d^(n-1)) when n ≥ 1.
pub fn conversion_check(c: &RationalMap1D, params: &FamilyParams, k0: u64, n: u64) -> Result<bool> {
    params.require_nonzero_lambda()?;
    let lam = params.lambda();
    let pairs = iterate_poly_pairs(c, params.d, n + k0, &Limits::default())?;
    let (ak, bk) = pairs[k0 as usize].eval(lam);
    if bk.is_zero() {
        return Err(Error::InvalidInput(format!(
            "B_(c,{k0}) vanishes at lambda = {lam}"
        )));
    }
    let mut h = HomogeneousPair::affine(&(ak / &bk));
    for _ in 0..n {
        h = step_homogeneous(params, &h)?;
    }
    let dn = num_traits::pow(BigInt::from(params.d), n as usize);
    let mut factor = pow_big(&bk, &dn);
    if c.c0_zero() && k0 == 0 && n >= 1 {
        let e = num_traits::pow(BigInt::from(params.d), n as usize - 1);
        factor /= pow_big(lam, &e);
    }
    let (lhs_a, lhs_b) = pairs[(n + k0) as usize].eval(lam);
    Ok(lhs_a == &factor * &h.a && lhs_b == &factor * &h.b)
}

fn pow_big(x: &BigRational, e: &BigInt) -> BigRational {
    let e: u32 = e.try_into().expect("exponent fits in u32");
    rat_pow(x, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn fam(d: u32, l: &str) -> FamilyParams {
        FamilyParams::new(d, q(l)).unwrap()
    }

    #[test]
    fn homogeneous_steps() {
        let p = fam(2, "1");
        let h1 = step_homogeneous(&p, &HomogeneousPair::new(q("1"), q("1"))).unwrap();
        assert_eq!((h1.a.clone(), h1.b.clone(), h1.n), (q("2"), q("1"), 1));
        let h2 = step_homogeneous(&p, &h1).unwrap();
        assert_eq!((h2.a.clone(), h2.b.clone()), (q("5"), q("2")));
        let h3 = step_homogeneous(&p, &h2).unwrap();
        assert_eq!((h3.a, h3.b), (q("29"), q("10")));

        let zero = fam(3, "0");
        let h = step_homogeneous(&zero, &HomogeneousPair::affine(&q("2/3"))).unwrap();
        assert_eq!(h.point().unwrap(), ProjectivePointQ::from_rational(&q("4/9")));
    }

    #[test]
    fn degenerate_pair_is_an_error() {
        let p = fam(2, "1");
        let bad = HomogeneousPair::new(q("0"), q("0"));
        assert!(matches!(step_homogeneous(&p, &bad), Err(Error::DegenerateOrbit(0))));
    }

    #[test]
    fn point_orbits() {
        let lim = Limits::default();
        let o = orbit_point(&fam(2, "1"), &"1".parse().unwrap(), 3, &lim).unwrap();
        let s: Vec<String> = o.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["1", "2", "5/2", "29/10"]);

        let o = orbit_point(&fam(2, "-2"), &"1".parse().unwrap(), 4, &lim).unwrap();
        let s: Vec<String> = o.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["1", "-1", "1", "-1", "1"]);

        let o = orbit_point(&fam(5, "7/3"), &ProjectivePointQ::infinity(), 3, &lim).unwrap();
        assert!(o.iter().all(|x| x.is_infinity()));

        let o = orbit_point(&fam(2, "-1"), &"1".parse().unwrap(), 3, &lim).unwrap();
        let s: Vec<String> = o.iter().map(|x| x.to_string()).collect();
        assert_eq!(s, ["1", "0", "inf", "inf"]);
    }

    #[test]
    fn orbit_cap_is_enforced() {
        let lim = Limits {
            bigint_cap_bytes: 64,
            ..Limits::default()
        };
        let r = orbit_point(&fam(3, "1"), &"2".parse().unwrap(), 20, &lim);
        assert!(matches!(r, Err(Error::CapExceeded(_))));
    }

    #[test]
    fn poly_iterates() {
        let lim = Limits::default();
        let t = RationalMap1D::identity();
        let p = iterate_poly_pair(&t, 2, 1, &lim).unwrap();
        assert_eq!(p.a, Poly::from_ints(&[1, 1]));
        assert_eq!(p.b, Poly::one());

        let five = RationalMap1D::constant(&q("5"));
        let p = iterate_poly_pair(&five, 3, 1, &lim).unwrap();
        assert_eq!(p.a, Poly::from_ints(&[125, 1]));
        assert_eq!(p.b, Poly::from_ints(&[5]));

        let c = RationalMap1D::from_polys(Poly::from_ints(&[1, 0, 1]), Poly::one()).unwrap().0;
        let p = iterate_poly_pair(&c, 2, 1, &lim).unwrap();
        assert_eq!(p.a, Poly::from_ints(&[1, 1, 2, 0, 1]));
        assert_eq!(p.b, Poly::from_ints(&[1, 0, 1]));
    }

    #[test]
    fn conversion_examples() {
        let t = RationalMap1D::identity();
        assert!(conversion_check(&t, &fam(2, "3"), 1, 2).unwrap());
        assert!(conversion_check(&t, &fam(2, "3"), 0, 2).unwrap());
        let c = RationalMap1D::from_polys(Poly::from_ints(&[1, 0, 1]), Poly::one()).unwrap().0;
        assert!(conversion_check(&c, &fam(3, "2"), 2, 1).unwrap());
        assert!(conversion_check(&c, &fam(2, "-5/3"), 0, 3).unwrap());
    }
}
