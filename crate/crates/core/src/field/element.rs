use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::Modulus;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Residue {
    Word(u64),
    Big(BigUint),
}

/// An element of `F_q`, always held as its canonical representative in `[0, q)`.
#[derive(Clone)]
pub struct FieldElement {
    value: Residue,
    modulus: Modulus,
}

impl FieldElement {
    pub(super) fn from_word(modulus: &Modulus, v: u64) -> Self {
        debug_assert!(modulus.word().is_some_and(|q| v < q));
        FieldElement { value: Residue::Word(v), modulus: modulus.clone() }
    }

    pub(super) fn reduce(modulus: &Modulus, v: BigUint) -> Self {
        let value = match modulus.word() {
            Some(q) => Residue::Word((v % q).to_u64().expect("reduced below a word")),
            None => Residue::Big(v % modulus.value()),
        };
        FieldElement { value, modulus: modulus.clone() }
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn to_biguint(&self) -> BigUint {
        match &self.value {
            Residue::Word(v) => BigUint::from(*v),
            Residue::Big(v) => v.clone(),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match &self.value {
            Residue::Word(v) => Some(*v),
            Residue::Big(v) => v.to_u64(),
        }
    }

    /// Lowercase big-endian hex without leading zeros; zero is `"0"`.
    pub fn to_hex(&self) -> String {
        match &self.value {
            Residue::Word(v) => format!("{v:x}"),
            Residue::Big(v) => v.to_str_radix(16),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Residue::Word(v) => *v == 0,
            Residue::Big(v) => v.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Residue::Word(v) => *v == 1,
            Residue::Big(v) => *v == BigUint::from(1u8),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.modulus.same(&other.modulus) {
            Ok(())
        } else {
            Err(Error::ModulusMismatch)
        }
    }

    fn with(&self, value: Residue) -> Self {
        FieldElement { value, modulus: self.modulus.clone() }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.sub_unchecked(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    /// `self / other`.
    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(&other.inv()?))
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        match (&self.value, &other.value) {
            (Residue::Word(a), Residue::Word(b)) => {
                let q = self.modulus.word().unwrap();
                let s = a + b;
                self.with(Residue::Word(if s >= q { s - q } else { s }))
            }
            (a, b) => {
                let s = big(a) + big(b);
                let q = self.modulus.value();
                self.with(Residue::Big(if &s >= q { s - q } else { s }))
            }
        }
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        match (&self.value, &other.value) {
            (Residue::Word(a), Residue::Word(b)) => {
                let q = self.modulus.word().unwrap();
                self.with(Residue::Word(if a >= b { a - b } else { q - (b - a) }))
            }
            (a, b) => {
                let (a, b) = (big(a), big(b));
                let v = if a >= b { a - b } else { self.modulus.value() - (b - a) };
                self.with(Residue::Big(v))
            }
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        match (&self.value, &other.value) {
            (Residue::Word(a), Residue::Word(b)) => {
                let q = self.modulus.word().unwrap();
                let p = (*a as u128 * *b as u128) % q as u128;
                self.with(Residue::Word(p as u64))
            }
            (a, b) => self.with(Residue::Big((big(a) * big(b)) % self.modulus.value())),
        }
    }

    pub fn neg(&self) -> Self {
        match &self.value {
            Residue::Word(0) => self.clone(),
            Residue::Word(a) => self.with(Residue::Word(self.modulus.word().unwrap() - a)),
            Residue::Big(a) if a.is_zero() => self.clone(),
            Residue::Big(a) => self.with(Residue::Big(self.modulus.value() - a)),
        }
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let exp = self.modulus.value() - 2u32;
        Ok(self.pow(&exp))
    }

    pub fn pow(&self, exp: &BigUint) -> Self {
        match &self.value {
            Residue::Word(a) => {
                let q = self.modulus.word().unwrap() as u128;
                let mut e = exp.to_u64().expect("exponent fits a word for word moduli");
                let mut base = *a as u128;
                let mut acc = 1u128 % q;
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % q;
                    }
                    base = base * base % q;
                    e >>= 1;
                }
                self.with(Residue::Word(acc as u64))
            }
            Residue::Big(a) => self.with(Residue::Big(a.modpow(exp, self.modulus.value()))),
        }
    }

    pub fn pow_u64(&self, exp: u64) -> Self {
        self.pow(&BigUint::from(exp))
    }
}

fn big(r: &Residue) -> BigUint {
    match r {
        Residue::Word(v) => BigUint::from(*v),
        Residue::Big(v) => v.clone(),
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.modulus.same(&other.modulus) && self.value == other.value
    }
}

impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl PartialOrd for FieldElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by canonical representative.
impl Ord for FieldElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (&self.value, &other.value) {
            (Residue::Word(a), Residue::Word(b)) => a.cmp(b),
            (a, b) => big(a).cmp(&big(b)),
        }
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Residue::Word(v) => write!(f, "{v}"),
            Residue::Big(v) => write!(f, "{v}"),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                assert!(self.modulus.same(&rhs.modulus), "field elements belong to different moduli");
                self.$inner(rhs)
            }
        }
        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, add_unchecked);
binop!(Sub, sub, sub_unchecked);
binop!(Mul, mul, mul_unchecked);

impl AddAssign<&FieldElement> for FieldElement {
    fn add_assign(&mut self, rhs: &FieldElement) {
        *self = &*self + rhs;
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}
