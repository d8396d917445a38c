//! Dense univariate polynomials over a prime field GF(p).
//!
//! Used for validating extension-field moduli (Rabin's irreducibility test)
//! and for inversion in extension fields. Coefficients are stored
//! lowest degree first and kept trimmed, so the zero polynomial is empty.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    p: u64,
    coeffs: Vec<u64>,
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // extended Euclid on integers; a is nonzero mod p
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "{a} not invertible mod {p}");
    t0.rem_euclid(p as i128) as u64
}

pub(crate) fn inv_mod_prime(a: u64, p: u64) -> u64 {
    inv_mod(a, p)
}

impl Poly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut out = Poly {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        out.trim();
        out
    }

    pub fn zero(p: u64) -> Self {
        Poly {
            p,
            coeffs: Vec::new(),
        }
    }

    pub fn one(p: u64) -> Self {
        Poly::new(p, vec![1])
    }

    /// The monomial `x`.
    pub fn x(p: u64) -> Self {
        Poly::new(p, vec![0, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + b) % self.p
            })
            .collect();
        Poly::new(self.p, c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                (a + self.p - b) % self.p
            })
            .collect();
        Poly::new(self.p, c)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.p);
        }
        let p = self.p as u128;
        let mut acc = vec![0u128; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u128 * b as u128) % p;
            }
        }
        Poly::new(self.p, acc.into_iter().map(|c| c as u64).collect())
    }

    pub fn scale(&self, s: u64) -> Poly {
        let p = self.p as u128;
        Poly::new(
            self.p,
            self.coeffs
                .iter()
                .map(|&c| ((c as u128 * s as u128) % p) as u64)
                .collect(),
        )
    }

    /// Quotient and remainder. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let p = self.p as u128;
        let lead_inv = inv_mod(divisor.leading(), self.p) as u128;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(self.p), self.clone());
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = rem[i] as u128 % p;
            if c == 0 {
                continue;
            }
            let q = (c * lead_inv) % p;
            quot[i - dd] = q as u64;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                let k = i - dd + j;
                rem[k] = ((rem[k] as u128 + p * p - q * dc as u128) % p) as u64;
            }
        }
        (Poly::new(self.p, quot), Poly::new(self.p, rem))
    }

    pub fn rem(&self, divisor: &Poly) -> Poly {
        self.div_rem(divisor).1
    }

    pub fn mul_mod(&self, other: &Poly, modulus: &Poly) -> Poly {
        self.mul(other).rem(modulus)
    }

    /// `self^e mod modulus` by square-and-multiply on a machine-word exponent.
    pub fn pow_mod(&self, mut e: u64, modulus: &Poly) -> Poly {
        let mut base = self.rem(modulus);
        let mut acc = Poly::one(self.p).rem(modulus);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(&base, modulus);
            }
            base = base.mul_mod(&base, modulus);
            e >>= 1;
        }
        acc
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.leading(), self.p))
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Inverse of `self` modulo `modulus` by the extended Euclidean algorithm,
    /// or `None` when they are not coprime.
    pub fn inverse_mod(&self, modulus: &Poly) -> Option<Poly> {
        let p = self.p;
        let (mut r0, mut r1) = (modulus.clone(), self.rem(modulus));
        let (mut t0, mut t1) = (Poly::zero(p), Poly::one(p));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let t = t0.sub(&q.mul(&t1));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        if r0.degree() != Some(0) {
            return None;
        }
        Some(t0.scale(inv_mod(r0.leading(), p)).rem(modulus))
    }
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `x^(p^j) mod f`, by `j` successive p-th powerings.
fn frobenius_power_of_x(f: &Poly, j: usize) -> Poly {
    let p = f.p;
    let mut h = Poly::x(p).rem(f);
    for _ in 0..j {
        h = h.pow_mod(p, f);
    }
    h
}

/// Rabin's irreducibility test over GF(p).
///
/// A monic `f` of degree `d` is irreducible iff `x^(p^d) = x mod f` and
/// `gcd(f, x^(p^(d/q)) - x) = 1` for every prime `q` dividing `d`.
pub fn is_irreducible(f: &Poly) -> Result<bool> {
    let d = match f.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(invalid("irreducibility test needs degree >= 1")),
    };
    if !f.is_monic() {
        return Err(invalid("irreducibility test needs a monic polynomial"));
    }
    if d == 1 {
        return Ok(true);
    }
    let x = Poly::x(f.p);
    for q in prime_divisors(d) {
        let h = frobenius_power_of_x(f, d / q).sub(&x);
        if f.gcd(&h).degree() != Some(0) {
            return Ok(false);
        }
    }
    Ok(frobenius_power_of_x(f, d) == x.rem(f))
}

/// The first monic irreducible polynomial of degree `d` over GF(p) in
/// lexicographic order of its lower coefficients (constant term varying
/// fastest). Only meant for small fields.
pub fn first_irreducible(p: u64, d: usize) -> Result<Poly> {
    if d == 0 {
        return Err(invalid("degree must be positive"));
    }
    let mut lower = vec![0u64; d];
    loop {
        let mut c = lower.clone();
        c.push(1);
        let f = Poly::new(p, c);
        if is_irreducible(&f)? {
            return Ok(f);
        }
        // increment the base-p counter
        let mut i = 0;
        loop {
            if i == d {
                return Err(invalid(format!(
                    "no irreducible of degree {d} over GF({p})"
                )));
            }
            lower[i] += 1;
            if lower[i] < p {
                break;
            }
            lower[i] = 0;
            i += 1;
        }
    }
}
