//! Ground-field arithmetic: prime fields `GF(p)` and arbitrary-precision rationals.
//!
//! Every algorithm in this crate is generic over a [`Field`] context. Field
//! elements are plain values; all arithmetic goes through the context object,
//! so `GF(p)` elements stay a single machine word while rational elements can
//! grow without bound.

use std::fmt;

use num::BigRational;
use num::traits::{One, Signed, Zero};

/// Errors raised by field construction and element-level arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    /// The requested modulus is not a prime number.
    NotPrime(u64),
    /// A fraction with zero denominator was requested.
    ZeroDenominator,
    /// A denominator vanishes in the target field (e.g. `1/p` in `GF(p)`).
    NonInvertibleDenominator,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "modulus {p} is not prime"),
            FieldError::ZeroDenominator => write!(f, "zero denominator"),
            FieldError::NonInvertibleDenominator => {
                write!(f, "denominator is zero in the target field")
            }
        }
    }
}

impl std::error::Error for FieldError {}

/// An exact field, used as an explicit arithmetic context.
///
/// Implementations must be exact: no operation may round or overflow
/// silently. Elements are self-contained values; two elements may only be
/// combined through the same context.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync {
    /// Canonical element representation.
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn is_one(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// `a / b`; `None` when `b` is zero.
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    /// Canonical image of a signed integer.
    fn from_i64(&self, v: i64) -> Self::Elem;

    /// Image of the fraction `num/den`.
    fn from_fraction(&self, num: i64, den: i64) -> Result<Self::Elem, FieldError>;

    /// Number of elements, if finite.
    fn order(&self) -> Option<u64>;

    /// All elements in a canonical order, for enumeration oracles over small
    /// fields. `None` when the field is infinite.
    fn elements(&self) -> Option<Vec<Self::Elem>>;

    /// A random element. Uniform over finite fields; over the rationals a
    /// small-height element suitable for randomized tests.
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    /// A random nonzero element.
    fn sample_nonzero<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem {
        loop {
            let x = self.sample(rng);
            if !self.is_zero(&x) {
                return x;
            }
        }
    }

    /// Render an element in the text-format syntax (decimal, or `a/b`).
    fn fmt_elem(&self, a: &Self::Elem) -> String;
}

/// The prime field `GF(p)` with canonical representatives in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GfP {
    p: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl GfP {
    /// Construct `GF(p)`. The modulus must be prime and fit comfortably in a
    /// word (products are computed through `u128`).
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(GfP { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.p as i128) as u64
    }
}

impl Field for GfP {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn is_one(&self, a: &u64) -> bool {
        *a == 1 % self.p
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // Extended Euclid on signed words; p is prime so gcd is 1.
        let (mut r0, mut r1) = (self.p as i128, *a as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(s0.rem_euclid(self.p as i128) as u64)
    }

    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }

    fn from_fraction(&self, num: i64, den: i64) -> Result<u64, FieldError> {
        if den == 0 {
            return Err(FieldError::ZeroDenominator);
        }
        let d = self.reduce_i64(den);
        let di = self.inv(&d).ok_or(FieldError::NonInvertibleDenominator)?;
        Ok(self.mul(&self.reduce_i64(num), &di))
    }

    fn order(&self) -> Option<u64> {
        Some(self.p)
    }

    fn elements(&self) -> Option<Vec<u64>> {
        Some((0..self.p).collect())
    }

    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    fn fmt_elem(&self, a: &u64) -> String {
        a.to_string()
    }
}

/// The field of rationals with arbitrary-precision elements.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn is_one(&self, a: &BigRational) -> bool {
        a.is_one()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }

    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    fn from_fraction(&self, num: i64, den: i64) -> Result<BigRational, FieldError> {
        if den == 0 {
            return Err(FieldError::ZeroDenominator);
        }
        Ok(BigRational::new(num.into(), den.into()))
    }

    fn order(&self) -> Option<u64> {
        None
    }

    fn elements(&self) -> Option<Vec<BigRational>> {
        None
    }

    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        // Small-height elements keep randomized rational tests fast.
        let num: i64 = rng.gen_range(-9..=9);
        let den: i64 = rng.gen_range(1..=4);
        BigRational::new(num.into(), den.into())
    }

    fn fmt_elem(&self, a: &BigRational) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else if a.is_negative() && (-a).denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gfp_rejects_composite_modulus() {
        assert_eq!(GfP::new(10).unwrap_err(), FieldError::NotPrime(10));
        assert_eq!(GfP::new(1).unwrap_err(), FieldError::NotPrime(1));
        assert!(GfP::new(2).is_ok());
        assert!(GfP::new(10007).is_ok());
    }

    #[test]
    fn gfp_canonical_representatives() {
        let f = GfP::new(7).unwrap();
        assert_eq!(f.from_i64(-1), 6);
        assert_eq!(f.from_i64(14), 0);
        assert_eq!(f.from_fraction(1, 2).unwrap(), 4); // 2 * 4 = 8 = 1 mod 7
        assert_eq!(
            f.from_fraction(1, 7).unwrap_err(),
            FieldError::NonInvertibleDenominator
        );
    }

    #[test]
    fn gfp_inverse_over_all_nonzero_elements() {
        for p in [2u64, 3, 5, 10007] {
            let f = GfP::new(p).unwrap();
            for a in 1..p.min(200) {
                let ai = f.inv(&a).unwrap();
                assert_eq!(f.mul(&a, &ai), f.one(), "p={p} a={a}");
            }
            assert_eq!(f.inv(&0), None);
        }
    }

    #[test]
    fn rationals_reduce_and_invert() {
        let f = Rationals;
        let x = f.from_fraction(6, -4).unwrap();
        assert_eq!(f.fmt_elem(&x), "-3/2");
        let xi = f.inv(&x).unwrap();
        assert!(f.is_one(&f.mul(&x, &xi)));
        assert_eq!(f.from_fraction(1, 0).unwrap_err(), FieldError::ZeroDenominator);
    }

    fn axiom_check<F: Field>(f: &F, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let a = f.sample(&mut rng);
            let b = f.sample(&mut rng);
            let c = f.sample(&mut rng);
            let ab_c = f.add(&f.add(&a, &b), &c);
            let a_bc = f.add(&a, &f.add(&b, &c));
            assert_eq!(ab_c, a_bc);
            let l = f.mul(&a, &f.add(&b, &c));
            let r = f.add(&f.mul(&a, &b), &f.mul(&a, &c));
            assert_eq!(l, r);
            assert_eq!(f.add(&a, &f.zero()), a);
            assert_eq!(f.mul(&a, &f.one()), a);
            assert_eq!(f.add(&a, &f.neg(&a)), f.zero());
            if !f.is_zero(&a) {
                assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
            }
        }
    }

    #[test]
    fn ring_axioms_on_random_samples() {
        axiom_check(&GfP::new(2).unwrap(), 1);
        axiom_check(&GfP::new(10007).unwrap(), 2);
        axiom_check(&Rationals, 3);
    }

    #[test]
    fn elements_enumeration_matches_order() {
        let f = GfP::new(5).unwrap();
        assert_eq!(f.elements().unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(f.order(), Some(5));
        assert_eq!(Rationals.order(), None);
    }
}
