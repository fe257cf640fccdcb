//! Prime-field arithmetic and exact linear algebra over `F_q`.
//!
//! Elements carry a handle to their [`Modulus`]; mixing elements of
//! different moduli is an error on the `try_*` methods and a panic on the
//! operator impls. Moduli below 2^63 take a machine-word path, larger ones
//! go through `BigUint`.

mod element;
mod matrix;
mod prime;
mod rng;

pub use element::FieldElement;
pub use matrix::{Matrix, PreparedRow, RowBasis, Solution};
pub use prime::is_probable_prime;
pub use rng::Randomness;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::RngCore;

use crate::error::{Error, Result};

/// Smallest modulus accepted from user-supplied topology files.
pub const MIN_USER_MODULUS: u64 = 257;

/// Miller-Rabin rounds used when validating a modulus.
pub const PRIMALITY_ROUNDS: usize = 64;

struct Inner {
    value: BigUint,
    word: Option<u64>,
}

/// A prime modulus `q`. Cheap to clone.
#[derive(Clone)]
pub struct Modulus(Arc<Inner>);

impl Modulus {
    /// Validates `q` as a probable prime and wraps it.
    pub fn new(q: BigUint) -> Result<Self> {
        if !is_probable_prime(&q, PRIMALITY_ROUNDS) {
            return Err(Error::InvalidModulus(format!("{} is not prime", q.to_str_radix(16))));
        }
        Ok(Self::new_unchecked(q))
    }

    pub fn from_u64(q: u64) -> Result<Self> {
        Self::new(BigUint::from(q))
    }

    /// Parses a hex modulus and applies the lower bound for user input.
    pub fn from_user_hex(s: &str) -> Result<Self> {
        let q = parse_hex(s).ok_or_else(|| Error::InvalidModulus(format!("bad hex {s:?}")))?;
        if q < BigUint::from(MIN_USER_MODULUS) {
            return Err(Error::InvalidModulus(format!("modulus must be at least {MIN_USER_MODULUS}")));
        }
        Self::new(q)
    }

    /// The Mersenne prime 2^127 - 1.
    pub fn mersenne_127() -> Self {
        Self::new_unchecked((BigUint::one() << 127u32) - 1u32)
    }

    fn new_unchecked(q: BigUint) -> Self {
        let word = q.to_u64().filter(|&w| w < (1u64 << 63));
        Modulus(Arc::new(Inner { value: q, word }))
    }

    pub fn value(&self) -> &BigUint {
        &self.0.value
    }

    pub(crate) fn word(&self) -> Option<u64> {
        self.0.word
    }

    pub fn bits(&self) -> u64 {
        self.0.value.bits()
    }

    pub fn to_hex(&self) -> String {
        self.0.value.to_str_radix(16)
    }

    /// `q` as a `usize` when it fits; used for small-index bounds checks.
    pub fn as_usize(&self) -> Option<usize> {
        self.0.value.to_usize()
    }

    /// Reduces `v` into the field.
    pub fn element(&self, v: impl Into<BigUint>) -> FieldElement {
        FieldElement::reduce(self, v.into())
    }

    pub fn elem(&self, v: u64) -> FieldElement {
        match self.word() {
            Some(q) => FieldElement::from_word(self, v % q),
            None => self.element(v),
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// Parses a canonical hex value; rejects values `>= q`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let v = parse_hex(s).ok_or_else(|| Error::Malformed(format!("bad hex field element {s:?}")))?;
        if &v >= self.value() {
            return Err(Error::Corrupt(format!("field element {s} is not below the modulus")));
        }
        Ok(FieldElement::reduce(self, v))
    }

    /// Uniform element by rejection sampling: draw `bits(q)` random bits and
    /// retry while the draw is `>= q`. No modulo bias.
    pub fn random<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        if let Some(q) = self.word() {
            let bits = 64 - q.leading_zeros();
            let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
            loop {
                let v = rng.next_u64() & mask;
                if v < q {
                    return FieldElement::from_word(self, v);
                }
            }
        }
        let bits = self.bits() as usize;
        let nbytes = bits.div_ceil(8);
        let excess = nbytes * 8 - bits;
        let mut buf = vec![0u8; nbytes];
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= 0xffu8 >> excess;
            let v = BigUint::from_bytes_be(&buf);
            if &v < self.value() {
                return FieldElement::reduce(self, v);
            }
        }
    }

    /// Uniform nonzero element.
    pub fn random_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let v = self.random(rng);
            if !v.is_zero() {
                return v;
            }
        }
    }

    /// Every element of the field in increasing order. Only sensible for tiny `q`.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self.word().expect("enumeration requires a word-sized modulus");
        (0..q).map(move |v| FieldElement::from_word(self, v))
    }

    pub(crate) fn same(&self, other: &Modulus) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.value == other.0.value
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl Eq for Modulus {}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Modulus(0x{})", self.to_hex())
    }
}

/// Lowercase or uppercase hex, optional `0x` prefix.
pub(crate) fn parse_hex(s: &str) -> Option<BigUint> {
    let s = s.strip_prefix("0x").unwrap_or(s);
    if s.is_empty() {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 16)
}
