//! Exact arithmetic in GF(p) and GF(p^d).
//!
//! A [`Field`] is a cheap, shareable handle on an immutable [`FieldSpec`].
//! Elements are plain [`Fe`] values packed into a `u128`:
//!
//! * for `p = 2` bit `i` is the coefficient of `x^i`;
//! * for odd `p` the value is `sum c_i p^i` with `0 <= c_i < p`.
//!
//! Either way the packing is canonical, so element equality is value
//! equality. The hot paths (matrix products, Gauss elimination) work on raw
//! `Fe` through the `Field` methods; [`FieldElement`] pairs a value with its
//! field and checks that both operands agree.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{format_err, invalid, Error, Result};
use crate::poly::{self, inv_mod_prime, Poly};

/// Packed field element. Only meaningful together with its [`Field`].
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(pub(crate) u128);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn raw(self) -> u128 {
        self.0
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    characteristic: u64,
    degree: usize,
    /// Monic, irreducible, degree `degree`. For `degree == 1` this is `x`.
    modulus: Poly,
    /// Modulus bit pattern including the leading bit (binary fields only).
    binary_modulus: u128,
    /// `t * x^d mod m` for every 4-bit `t` (binary fields of degree >= 4).
    binary_fold: [u128; 16],
    /// `p^d`, which always fits in a `u128` for supported fields.
    order: u128,
}

#[derive(Clone)]
pub struct Field(Arc<FieldSpec>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.degree == 1 {
            write!(f, "GF({})", self.0.characteristic)
        } else {
            write!(f, "GF({}^{})", self.0.characteristic, self.0.degree)
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 1;
    }
    true
}

/// Default modulus for GF(2^127): `x^127 + x + 1`.
pub fn default_gf2_127_modulus() -> Poly {
    let mut c = vec![0u64; 128];
    c[0] = 1;
    c[1] = 1;
    c[127] = 1;
    Poly::new(2, c)
}

impl Field {
    /// The prime field GF(p).
    pub fn prime(p: u64) -> Result<Field> {
        Self::with_modulus(p, Poly::x(p.max(1)))
    }

    /// GF(p^d) with an explicit monic irreducible modulus of degree `d`.
    pub fn with_modulus(p: u64, modulus: Poly) -> Result<Field> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(invalid(format!(
                "characteristic {p} is not a supported prime"
            )));
        }
        if modulus.characteristic() != p {
            return Err(invalid("modulus has the wrong characteristic"));
        }
        let degree = modulus
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| invalid("modulus must have degree >= 1"))?;
        if !modulus.is_monic() {
            return Err(invalid("modulus must be monic"));
        }
        let order = (p as u128)
            .checked_pow(degree as u32)
            .filter(|_| if p == 2 { degree <= 127 } else { true })
            .filter(|&o| o < 1 << 126 || p == 2)
            .ok_or_else(|| invalid(format!("GF({p}^{degree}) is too large")))?;
        // GF(p) is stored with modulus x; the irreducibility test is trivial there.
        if degree > 1 && !poly::is_irreducible(&modulus)? {
            return Err(invalid("modulus is reducible"));
        }
        let binary_modulus = if p == 2 {
            modulus
                .coeffs()
                .iter()
                .enumerate()
                .fold(0u128, |acc, (i, &c)| acc | ((c as u128) << i))
        } else {
            0
        };
        Ok(Field(Arc::new(FieldSpec {
            characteristic: p,
            degree,
            modulus,
            binary_modulus,
            binary_fold: if p == 2 && degree >= 4 {
                fold_table(binary_modulus, degree)
            } else {
                [0; 16]
            },
            order,
        })))
    }

    /// GF(p^d) with a default modulus: `x^127 + x + 1` for GF(2^127),
    /// otherwise the first irreducible found by [`poly::first_irreducible`].
    pub fn new(p: u64, d: usize) -> Result<Field> {
        if d == 1 {
            return Self::prime(p);
        }
        if p == 2 && d == 127 {
            return Self::gf2_127();
        }
        if !is_prime(p) {
            return Err(invalid(format!("characteristic {p} is not prime")));
        }
        Self::with_modulus(p, poly::first_irreducible(p, d)?)
    }

    /// GF(2^127) modulo `x^127 + x + 1`, checked with Rabin's test.
    pub fn gf2_127() -> Result<Field> {
        Self::with_modulus(2, default_gf2_127_modulus())
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0
    }

    pub fn characteristic(&self) -> u64 {
        self.0.characteristic
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn modulus(&self) -> &Poly {
        &self.0.modulus
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.degree == 1
    }

    pub fn order(&self) -> BigUint {
        BigUint::from(self.0.order)
    }

    pub fn prime_subfield(&self) -> Field {
        if self.is_prime_field() {
            self.clone()
        } else {
            Field::prime(self.0.characteristic).expect("characteristic was validated")
        }
    }

    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    /// Image of an integer under `Z -> GF(p)`, embedded in this field.
    pub fn from_int(&self, v: u64) -> Fe {
        Fe((v % self.0.characteristic) as u128)
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.0.order
    }

    /// Coefficient vector of length `d`, lowest degree first.
    pub fn coeffs(&self, a: Fe) -> Vec<u64> {
        let p = self.0.characteristic;
        let d = self.0.degree;
        if p == 2 {
            (0..d).map(|i| ((a.0 >> i) & 1) as u64).collect()
        } else {
            let mut v = a.0;
            (0..d)
                .map(|_| {
                    let c = (v % p as u128) as u64;
                    v /= p as u128;
                    c
                })
                .collect()
        }
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<Fe> {
        let p = self.0.characteristic;
        if coeffs.len() != self.0.degree {
            return Err(Error::Dimension {
                expected: self.0.degree,
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|&c| c >= p) {
            return Err(invalid(format!("coefficient out of range for GF({p})")));
        }
        Ok(self.pack(coeffs))
    }

    fn pack(&self, coeffs: &[u64]) -> Fe {
        let p = self.0.characteristic as u128;
        if p == 2 {
            Fe(coeffs
                .iter()
                .enumerate()
                .fold(0, |acc, (i, &c)| acc | ((c as u128 & 1) << i)))
        } else {
            Fe(coeffs.iter().rev().fold(0, |acc, &c| acc * p + c as u128))
        }
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.characteristic;
        if p == 2 {
            Fe(a.0 ^ b.0)
        } else if self.0.degree == 1 {
            let s = a.0 as u64 + b.0 as u64;
            Fe(if s >= p { s - p } else { s } as u128)
        } else {
            let (x, y) = (self.coeffs(a), self.coeffs(b));
            let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect();
            self.pack(&s)
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        let p = self.0.characteristic;
        if p == 2 || a.0 == 0 {
            a
        } else if self.0.degree == 1 {
            Fe((p as u128) - a.0)
        } else {
            let x: Vec<u64> = self.coeffs(a).iter().map(|&c| (p - c) % p).collect();
            self.pack(&x)
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        let p = self.0.characteristic;
        if self.0.degree == 1 {
            Fe(((a.0 as u64 * b.0 as u64) % p) as u128)
        } else if p == 2 {
            Fe(self.binary_mul(a.0, b.0))
        } else {
            let x = Poly::new(p, self.coeffs(a));
            let y = Poly::new(p, self.coeffs(b));
            self.from_poly(&x.mul_mod(&y, &self.0.modulus))
        }
    }

    /// `a + b*c`, the elimination kernel.
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(a, self.mul(b, c))
    }

    fn from_poly(&self, f: &Poly) -> Fe {
        let mut c = f.coeffs().to_vec();
        c.resize(self.0.degree, 0);
        self.pack(&c)
    }

    // Horner over 4-bit digits of b, in GF(2)[x]/(m), d <= 127
    fn binary_mul(&self, a: u128, b: u128) -> u128 {
        let d = self.0.degree;
        let m = self.0.binary_modulus;
        if d < 4 {
            return binary_mul_serial(a, b, m, d);
        }
        let mut multiples = [0u128; 16];
        multiples[1] = a;
        for k in 2..16 {
            multiples[k] = if k % 2 == 0 {
                times_x(multiples[k / 2], m, d)
            } else {
                multiples[k - 1] ^ a
            };
        }
        let low = (1u128 << (d - 4)) - 1;
        let mut r = 0u128;
        for j in (0..d.div_ceil(4)).rev() {
            r = ((r & low) << 4) ^ self.0.binary_fold[(r >> (d - 4)) as usize];
            r ^= multiples[((b >> (4 * j)) & 15) as usize];
        }
        r
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.0.characteristic;
        if self.0.degree == 1 {
            return Ok(Fe(inv_mod_prime(a.0 as u64, p) as u128));
        }
        let inv = Poly::new(p, self.coeffs(a))
            .inverse_mod(&self.0.modulus)
            .ok_or(Error::DivisionByZero)?;
        Ok(self.from_poly(&inv))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` by square-and-multiply. `0^0 = 1`.
    pub fn pow(&self, a: Fe, e: &BigUint) -> Fe {
        let mut acc = Fe::ONE;
        for i in (0..e.bits()).rev() {
            acc = self.mul(acc, acc);
            if e.bit(i) {
                acc = self.mul(acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: Fe, e: u64) -> Fe {
        self.pow(a, &BigUint::from(e))
    }

    /// Reduce an exponent modulo the multiplicative group order `p^d - 1`,
    /// choosing the representative in `[1, p^d - 1]`. Valid for every entry
    /// when the original exponent is positive.
    pub fn reduce_exponent(&self, e: &BigUint) -> BigUint {
        let group = BigUint::from(self.0.order - 1);
        let r = e % &group;
        if r.is_zero() {
            group
        } else {
            r
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        if self.0.characteristic == 2 {
            let mask = if self.0.degree == 128 {
                u128::MAX
            } else {
                (1u128 << self.0.degree) - 1
            };
            Fe(rng.gen::<u128>() & mask)
        } else {
            Fe(rng.gen_range(0..self.0.order))
        }
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Fe {
        loop {
            let a = self.random(rng);
            if !a.is_zero() {
                return a;
            }
        }
    }

    /// Number of bytes in the hex encoding of a binary-field element.
    pub fn encoded_bytes(&self) -> usize {
        let bits_per_coeff = 64 - (self.0.characteristic - 1).leading_zeros() as usize;
        (self.0.degree * bits_per_coeff).div_ceil(8)
    }

    /// Text encoding: lowercase little-endian hex for `p = 2`, otherwise a
    /// decimal coefficient list `[c0,c1,...]`.
    pub fn encode(&self, a: Fe) -> String {
        if self.0.characteristic == 2 {
            hex::encode(&a.0.to_le_bytes()[..self.encoded_bytes()])
        } else {
            let parts: Vec<String> = self.coeffs(a).iter().map(u64::to_string).collect();
            format!("[{}]", parts.join(","))
        }
    }

    pub fn decode(&self, s: &str) -> Result<Fe> {
        if self.0.characteristic == 2 {
            let n = self.encoded_bytes();
            if s.len() != 2 * n || s.bytes().any(|b| b.is_ascii_uppercase()) {
                return Err(format_err(format!(
                    "expected {} lowercase hex digits",
                    2 * n
                )));
            }
            let bytes = hex::decode(s).map_err(|e| format_err(e.to_string()))?;
            let mut buf = [0u8; 16];
            buf[..n].copy_from_slice(&bytes);
            let v = u128::from_le_bytes(buf);
            if self.0.degree < 128 && v >> self.0.degree != 0 {
                return Err(format_err("bits set beyond the field degree"));
            }
            Ok(Fe(v))
        } else {
            let inner = s
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| format_err(format!("expected [c0,...], got {s:?}")))?;
            let coeffs = inner
                .split(',')
                .map(|t| {
                    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(format_err(format!("bad coefficient {t:?}")));
                    }
                    t.parse::<u64>().map_err(|e| format_err(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            self.from_coeffs(&coeffs)
                .map_err(|e| format_err(e.to_string()))
        }
    }

    pub fn element(&self, a: Fe) -> FieldElement {
        FieldElement {
            field: self.clone(),
            value: a,
        }
    }
}

/// A field element bundled with its field; arithmetic checks the fields match.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: Fe,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.encode(self.value))
    }
}

impl FieldElement {
    pub fn new(field: &Field, coeffs: &[u64]) -> Result<Self> {
        Ok(field.element(field.from_coeffs(coeffs)?))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn value(&self) -> Fe {
        self.value
    }

    pub fn coeffs(&self) -> Vec<u64> {
        self.field.coeffs(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::SpecMismatch("fields"))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.field.element(self.field.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.field.element(self.field.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.field.element(self.field.mul(self.value, other.value)))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.field.element(self.field.inv(self.value)?))
    }

    pub fn pow(&self, e: &BigUint) -> Self {
        self.field.element(self.field.pow(self.value, e))
    }

    pub fn encode(&self) -> String {
        self.field.encode(self.value)
    }
}

pub(crate) fn is_power_of(e: &BigUint, p: u64) -> bool {
    let mut e = e.clone();
    if e.is_zero() {
        return false;
    }
    let p = BigUint::from(p);
    while !e.is_one() {
        if (&e % &p) != BigUint::zero() {
            return false;
        }
        e /= &p;
    }
    true
}

fn times_x(v: u128, m: u128, d: usize) -> u128 {
    let carry = (v >> (d - 1)) & 1;
    (v << 1) ^ (m & carry.wrapping_neg())
}

fn fold_table(m: u128, d: usize) -> [u128; 16] {
    // x^d = m - x^d, then x^(d+1), x^(d+2), x^(d+3)
    let mut powers = [m ^ (1u128 << d); 4];
    for i in 1..4 {
        powers[i] = times_x(powers[i - 1], m, d);
    }
    let mut out = [0u128; 16];
    for (t, slot) in out.iter_mut().enumerate() {
        *slot = (0..4)
            .filter(|i| t >> i & 1 == 1)
            .fold(0, |acc, i| acc ^ powers[i]);
    }
    out
}

// shift-and-add; the reference the windowed version is tested against
fn binary_mul_serial(a: u128, b: u128, m: u128, d: usize) -> u128 {
    let mut r = 0u128;
    for i in (0..d).rev() {
        r = times_x(r, m, d);
        r ^= a & ((b >> i) & 1).wrapping_neg();
    }
    r
}
