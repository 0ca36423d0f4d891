//! Arithmetic in `F_q` for prime powers `q = p^e`.
//!
//! Elements use the polynomial basis `1, x, ..., x^{e-1}` over `F_p`. An
//! element is stored packed as the integer `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`,
//! always fully reduced, so equality and hashing are plain integer
//! comparisons. The packed integer is also the element's position in the
//! canonical enumeration order: `0, 1, 2, ..., q - 1`.
//!
//! Fields with `q <= 256` carry precomputed addition and multiplication
//! tables; larger fields compute each operation from the coefficient form.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 8;
/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 20;
/// Fields up to this order get full operation tables.
const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree {0} outside 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("field order {0} exceeds {MAX_ORDER}")]
    OrderTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus is not a monic irreducible polynomial of degree {0}")]
    InvalidModulus(u32),
    #[error("coefficient vector {0:?} is not a valid element")]
    InvalidElement(Vec<u32>),
}

/// Trial division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Splits `q` as `p^e` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        // no factor up to sqrt(q): q is prime
        return Some((q, 1));
    }
    let mut rest = q;
    let mut e = 0u32;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// An element of `F_q`, stored as its packed coefficient index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Element at a canonical position; the caller guarantees `index < q`.
    #[inline]
    pub(crate) const fn from_index(index: u32) -> Self {
        FieldElement(index)
    }

    /// Position of the element in the canonical enumeration.
    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
}

/// The field `F_q` with `q = p^e`.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    /// `e + 1` coefficients, low degree first; empty for prime fields.
    modulus: Vec<u32>,
    tables: Option<Arc<Tables>>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.q)
    }
}

impl FieldSpec {
    /// Builds `F_{p^e}` using the lexicographically smallest monic
    /// irreducible modulus (coefficients compared from the constant term up).
    pub fn new(p: u64, e: u32) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if !(1..=MAX_DEGREE).contains(&e) {
            return Err(FieldError::DegreeOutOfRange(e));
        }
        let q = p
            .checked_pow(e)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::OrderTooLarge(p.saturating_pow(e)))?;
        let p = p as u32;
        let modulus = if e == 1 {
            Vec::new()
        } else {
            smallest_irreducible(p, e as usize)
                .expect("an irreducible polynomial of every degree exists over F_p")
        };
        Ok(Self::assemble(p, e, q as u32, modulus))
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn from_order(q: u64) -> Result<Self, FieldError> {
        let (p, e) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        if q > MAX_ORDER {
            return Err(FieldError::OrderTooLarge(q));
        }
        Self::new(p, e)
    }

    /// Builds `F_{p^e}` with an explicitly supplied modulus, which is
    /// validated for monicity and irreducibility.
    pub fn with_modulus(p: u64, e: u32, modulus: Vec<u32>) -> Result<Self, FieldError> {
        let canonical = Self::new(p, e)?;
        if e == 1 {
            if modulus.is_empty() {
                return Ok(canonical);
            }
            return Err(FieldError::InvalidModulus(e));
        }
        let p32 = p as u32;
        let ok = modulus.len() == e as usize + 1
            && modulus.last() == Some(&1)
            && modulus.iter().all(|&c| c < p32)
            && is_irreducible(&modulus, p32);
        if !ok {
            return Err(FieldError::InvalidModulus(e));
        }
        Ok(Self::assemble(p32, e, canonical.q, modulus))
    }

    fn assemble(p: u32, e: u32, q: u32, modulus: Vec<u32>) -> Self {
        let mut spec = FieldSpec {
            p,
            e,
            q,
            modulus,
            tables: None,
        };
        if q <= TABLE_LIMIT {
            spec.tables = Some(Arc::new(spec.build_tables()));
        }
        spec
    }

    fn build_tables(&self) -> Tables {
        let q = self.q as usize;
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = self.slow_add(a as u32, b as u32);
                mul[a * q + b] = self.slow_mul(a as u32, b as u32);
            }
        }
        let neg = (0..q as u32).map(|a| self.slow_neg(a)).collect();
        let inv = (0..q as u32)
            .map(|a| if a == 0 { 0 } else { self.slow_inv(a) })
            .collect();
        Tables { add, mul, neg, inv }
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }

    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// Element at position `index` of the canonical enumeration.
    pub fn element(&self, index: u32) -> Option<FieldElement> {
        (index < self.q).then_some(FieldElement(index))
    }

    /// Image of an integer under `Z -> F_p ⊆ F_q`.
    pub fn from_int(&self, value: i64) -> FieldElement {
        FieldElement(value.rem_euclid(self.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        if coeffs.len() != self.e as usize || coeffs.iter().any(|&c| c >= self.p) {
            return Err(FieldError::InvalidElement(coeffs.to_vec()));
        }
        Ok(FieldElement(
            coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c),
        ))
    }

    /// Coefficients `c_0, ..., c_{e-1}` of the element, low degree first.
    pub fn coeffs(&self, a: FieldElement) -> Vec<u32> {
        let mut v = a.0;
        (0..self.e)
            .map(|_| {
                let c = v % self.p;
                v /= self.p;
                c
            })
            .collect()
    }

    /// All `q` elements in canonical order; `0` first and `1` second.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.q).map(FieldElement)
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.add[(a.0 * self.q + b.0) as usize]),
            None => FieldElement(self.slow_add(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.neg[a.0 as usize]),
            None => FieldElement(self.slow_neg(a.0)),
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match &self.tables {
            Some(t) => FieldElement(t.mul[(a.0 * self.q + b.0) as usize]),
            None => FieldElement(self.slow_mul(a.0, b.0)),
        }
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        if a.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(match &self.tables {
            Some(t) => FieldElement(t.inv[a.0 as usize]),
            None => FieldElement(self.slow_inv(a.0)),
        })
    }

    pub fn pow(&self, a: FieldElement, mut exp: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    fn unpack(&self, a: u32) -> Vec<u32> {
        self.coeffs(FieldElement(a))
    }

    fn pack(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    fn slow_add(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        let (ca, cb) = (self.unpack(a), self.unpack(b));
        let sum: Vec<u32> = ca
            .iter()
            .zip(&cb)
            .map(|(&x, &y)| (x + y) % self.p)
            .collect();
        self.pack(&sum)
    }

    fn slow_neg(&self, a: u32) -> u32 {
        if self.e == 1 {
            return (self.p - a) % self.p;
        }
        let c: Vec<u32> = self
            .unpack(a)
            .iter()
            .map(|&x| (self.p - x) % self.p)
            .collect();
        self.pack(&c)
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let p = self.p as u64;
        if self.e == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let (ca, cb) = (self.unpack(a), self.unpack(b));
        let e = self.e as usize;
        let mut prod = vec![0u64; 2 * e - 1];
        for (i, &x) in ca.iter().enumerate() {
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        // x^e = -(m_0 + m_1 x + ... + m_{e-1} x^{e-1})
        for deg in (e..prod.len()).rev() {
            let lead = prod[deg];
            if lead == 0 {
                continue;
            }
            prod[deg] = 0;
            for k in 0..e {
                let sub = lead * self.modulus[k] as u64 % p;
                let slot = &mut prod[deg - e + k];
                *slot = (*slot + p - sub) % p;
            }
        }
        let reduced: Vec<u32> = prod[..e].iter().map(|&c| c as u32).collect();
        self.pack(&reduced)
    }

    fn slow_inv(&self, a: u32) -> u32 {
        let p = self.p;
        if self.e == 1 {
            return mod_inv(a, p);
        }
        // extended Euclid on F_p[x]: track s with s * a ≡ r (mod modulus)
        let mut r0 = self.modulus.clone();
        let mut r1 = trim(self.unpack(a));
        let mut s0: Vec<u32> = vec![];
        let mut s1: Vec<u32> = vec![1];
        while !r1.is_empty() {
            let (quot, rem) = poly_divmod(&r0, &r1, p);
            let s2 = poly_sub(&s0, &poly_mul(&quot, &s1, p), p);
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        // r0 is a nonzero constant
        debug_assert_eq!(r0.len(), 1);
        let scale = mod_inv(r0[0], p);
        let mut coeffs: Vec<u32> = s0
            .iter()
            .map(|&c| (c as u64 * scale as u64 % p as u64) as u32)
            .collect();
        coeffs.resize(self.e as usize, 0);
        self.pack(&coeffs)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            p: u32,
            e: u32,
            modulus: &'a [u32],
        }
        Repr {
            p: self.p,
            e: self.e,
            modulus: &self.modulus,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            p: u64,
            e: u32,
            #[serde(default)]
            modulus: Vec<u32>,
        }
        let repr = Repr::deserialize(deserializer)?;
        FieldSpec::with_modulus(repr.p, repr.e, repr.modulus).map_err(serde::de::Error::custom)
    }
}

fn mod_inv(a: u32, p: u32) -> u32 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    t.rem_euclid(p as i64) as u32
}

fn trim(mut poly: Vec<u32>) -> Vec<u32> {
    while poly.last() == Some(&0) {
        poly.pop();
    }
    poly
}

fn poly_mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

fn poly_sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

/// Quotient and remainder of `a / b` over `F_p`; `b` must be nonzero and trimmed.
fn poly_divmod(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let lead_inv = mod_inv(*b.last().unwrap(), p) as u64;
    let mut quot = vec![0u32; rem.len() - b.len() + 1];
    while rem.len() >= b.len() {
        let shift = rem.len() - b.len();
        let coef = (*rem.last().unwrap() as u64 * lead_inv % p as u64) as u32;
        quot[shift] = coef;
        for (k, &bk) in b.iter().enumerate() {
            let sub = (coef as u64 * bk as u64 % p as u64) as u32;
            rem[shift + k] = (rem[shift + k] + p - sub) % p;
        }
        rem = trim(rem);
    }
    (trim(quot), rem)
}

/// Monic polynomials of exact degree `deg`, low-degree coefficients first.
fn monic_polys(p: u32, deg: usize) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(deg as u32);
    (0..count).map(move |mut idx| {
        let mut coeffs = vec![0u32; deg + 1];
        // constant term is the most significant digit: lexicographic order
        // compared from the constant term up
        for slot in coeffs[..deg].iter_mut().rev() {
            *slot = (idx % p as u64) as u32;
            idx /= p as u64;
        }
        coeffs[deg] = 1;
        coeffs
    })
}

/// Irreducible iff no monic factor of degree `1..=deg/2` divides it.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|f| !poly_divmod(poly, &f, p).1.is_empty()))
}

fn smallest_irreducible(p: u32, e: usize) -> Option<Vec<u32>> {
    monic_polys(p, e).find(|poly| is_irreducible(poly, p))
}
