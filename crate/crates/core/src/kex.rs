//! The noncommutative shift key exchange and its masked variant.
//!
//! Both parties work in the semidirect product of the platform with the
//! monoid generated by `phi`, where `(phi^r, f) * (phi^s, h) = (phi^(r+s), phi^s(f) h)`.
//! The public value of a party with secret `k` is the second component `a_k`
//! of `(phi, g)^k`; the shared key is `a_(m+n)`.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::Rng;

use crate::endo::EndoDescriptor;
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::platform::{Platform, PlatformElement};

/// `(phi^exponent, part)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemidirectElement {
    pub exponent: BigUint,
    pub part: PlatformElement,
}

impl SemidirectElement {
    pub fn new(exponent: BigUint, part: PlatformElement) -> Self {
        SemidirectElement { exponent, part }
    }

    pub fn one(platform: &Platform) -> Self {
        Self::new(BigUint::zero(), PlatformElement::identity(platform))
    }
}

/// `(r, f) * (s, h) = (r + s, phi^s(f) h)`.
pub fn sd_mul(
    x: &SemidirectElement,
    y: &SemidirectElement,
    phi: &EndoDescriptor,
) -> Result<SemidirectElement> {
    let twisted = phi.power(&y.exponent)?.apply(&x.part)?;
    Ok(SemidirectElement {
        exponent: &x.exponent + &y.exponent,
        part: twisted.checked_mul(&y.part)?,
    })
}

/// The same product, carrying a descriptor for `phi^r` alongside the part so
/// that powering does not rebuild `phi^s` from scratch at every step.
struct Carried {
    endo: EndoDescriptor,
    part: PlatformElement,
}

impl Carried {
    fn mul(&self, other: &Carried) -> Result<Carried> {
        Ok(Carried {
            endo: self.endo.then(&other.endo)?,
            part: &other.endo.apply(&self.part)? * &other.part,
        })
    }
}

/// The orbit element `a_k = phi^(k-1)(g) ... phi(g) g`, i.e. the second
/// component of `(phi, g)^k`, by square-and-multiply. `k` must be positive.
pub fn orbit_element(
    g: &PlatformElement,
    phi: &EndoDescriptor,
    k: &BigUint,
) -> Result<PlatformElement> {
    if k.is_zero() {
        return Err(Error::Precondition("orbit index must be at least 1".into()));
    }
    if g.platform() != phi.platform() {
        return Err(Error::SpecMismatch("platforms"));
    }
    let base = Carried {
        endo: phi.clone(),
        part: g.clone(),
    };
    let mut acc = Carried {
        endo: EndoDescriptor::identity(g.platform()),
        part: PlatformElement::identity(g.platform()),
    };
    for i in (0..k.bits()).rev() {
        acc = acc.mul(&acc)?;
        if k.bit(i) {
            acc = acc.mul(&base)?;
        }
    }
    Ok(acc.part)
}

pub fn orbit_element_u64(
    g: &PlatformElement,
    phi: &EndoDescriptor,
    k: u64,
) -> Result<PlatformElement> {
    orbit_element(g, phi, &BigUint::from(k))
}

/// Public data of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub phi: EndoDescriptor,
    pub g: PlatformElement,
    /// `a_m`, or `a_m + R` when masked.
    pub alice: PlatformElement,
    /// `a_n`, or `a_n + S` when masked.
    pub bob: PlatformElement,
    pub masked: bool,
}

impl Transcript {
    pub fn platform(&self) -> &Platform {
        self.g.platform()
    }
}

/// Private data of one session, kept only for verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionSecrets {
    pub m: BigUint,
    pub n: BigUint,
    pub r: Option<PlatformElement>,
    pub s: Option<PlatformElement>,
    pub true_key: PlatformElement,
}

/// A uniformly random nonzero element of the span of `basis`.
fn random_nonzero_combination<R: Rng + ?Sized>(
    basis: &[PlatformElement],
    rng: &mut R,
) -> PlatformElement {
    let platform = basis[0].platform();
    let field = platform.field();
    loop {
        let x = basis
            .iter()
            .fold(PlatformElement::zero(platform), |acc, b| {
                &acc + &b.scale(field.random(rng))
            });
        if !x.is_zero() {
            return x;
        }
    }
}

/// Runs one honest session and checks that both parties agree on `a_(m+n)`.
///
/// In the masked variant `phi` must be conjugation by `H` and `HM` must be
/// singular and nonzero; `R` and `S` are random nonzero left annihilators of `HM`.
pub fn run_session<R: Rng + ?Sized>(
    phi: &EndoDescriptor,
    g: &PlatformElement,
    m: &BigUint,
    n: &BigUint,
    masked: bool,
    rng: &mut R,
) -> Result<(Transcript, SessionSecrets)> {
    if m.is_zero() || n.is_zero() {
        return Err(Error::Precondition(
            "private exponents must be positive".into(),
        ));
    }
    let a_m = orbit_element(g, phi, m)?;
    let a_n = orbit_element(g, phi, n)?;

    let (r, s) = if masked {
        let (h, _) = phi
            .inner_pair()
            .ok_or_else(|| Error::Precondition("masking needs an inner automorphism".into()))?;
        let hm = h.checked_mul(g)?;
        if hm.is_zero() {
            return Err(Error::Precondition("masking needs HM != 0".into()));
        }
        let annihilator = hm.left_annihilator()?;
        if annihilator.is_empty() {
            return Err(Error::Precondition("masking needs a singular HM".into()));
        }
        (
            Some(random_nonzero_combination(&annihilator, rng)),
            Some(random_nonzero_combination(&annihilator, rng)),
        )
    } else {
        (None, None)
    };

    let alice = r.as_ref().map_or(a_m.clone(), |r| &a_m + r);
    let bob = s.as_ref().map_or(a_n.clone(), |s| &a_n + s);

    let key_alice = &phi.power(m)?.apply(&bob)? * &a_m;
    let key_bob = &phi.power(n)?.apply(&alice)? * &a_n;
    let true_key = orbit_element(g, phi, &(m + n))?;
    if key_alice != key_bob || key_alice != true_key {
        return Err(Error::Invariant("parties derived different keys".into()));
    }

    Ok((
        Transcript {
            phi: phi.clone(),
            g: g.clone(),
            alice,
            bob,
            masked,
        },
        SessionSecrets {
            m: m.clone(),
            n: n.clone(),
            r,
            s,
            true_key,
        },
    ))
}

/// Uniform private exponent in `[2, bound]` (or `[1, bound]` when `bound < 2`).
pub fn sample_exponent<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    let two = BigUint::from(2u32);
    if *bound < two {
        return BigUint::one();
    }
    rng.gen_biguint_range(&two, &(bound + 1u32))
}

/// The default exponent bound `2^64`.
pub fn default_exponent_bound() -> BigUint {
    BigUint::one() << 64
}

pub(crate) fn scalar_combination(
    platform: &Platform,
    terms: impl IntoIterator<Item = (Fe, PlatformElement)>,
) -> PlatformElement {
    terms
        .into_iter()
        .filter(|(c, _)| !c.is_zero())
        .fold(PlatformElement::zero(platform), |acc, (c, x)| {
            &acc + &x.scale(c)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::platform::{sample_instance, Variant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2_gf7() -> Platform {
        Platform::matrices(Field::prime(7).unwrap(), 2).unwrap()
    }

    fn mat(p: &Platform, rows: &[&[u64]]) -> PlatformElement {
        PlatformElement::from_ints(p, rows).unwrap()
    }

    /// a_1 = g, a_(k+1) = phi(a_k) g
    fn recurrence(g: &PlatformElement, phi: &EndoDescriptor, k: usize) -> Vec<PlatformElement> {
        let mut out = vec![g.clone()];
        while out.len() < k {
            let next = &phi.apply(out.last().unwrap()).unwrap() * g;
            out.push(next);
        }
        out
    }

    #[test]
    fn sd_mul_examples() {
        let p = m2_gf7();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = sample_instance(&p, Variant::Inner, &mut rng).unwrap();
        let phi = EndoDescriptor::inner(inst.h, inst.h_inv).unwrap();
        let x = SemidirectElement::new(BigUint::from(3u32), PlatformElement::random(&p, &mut rng));
        let one = SemidirectElement::one(&p);
        assert_eq!(sd_mul(&one, &x, &phi).unwrap(), x);
        assert_eq!(sd_mul(&x, &one, &phi).unwrap(), x);

        let id = EndoDescriptor::identity(&p);
        let y = SemidirectElement::new(BigUint::from(2u32), PlatformElement::random(&p, &mut rng));
        let xy = sd_mul(&x, &y, &id).unwrap();
        assert_eq!(xy.exponent, BigUint::from(5u32));
        assert_eq!(xy.part, &x.part * &y.part);
    }

    #[test]
    fn orbit_examples() {
        let p = m2_gf7();
        let g = mat(&p, &[&[1, 2], &[3, 4]]);
        let id = EndoDescriptor::identity(&p);
        assert_eq!(orbit_element_u64(&g, &id, 1).unwrap(), g);
        assert_eq!(orbit_element_u64(&g, &id, 9).unwrap(), g.pow_u64(9));
        assert!(orbit_element_u64(&g, &id, 0).is_err());

        // a_k = H^-k (HM)^k for conjugation
        let h = mat(&p, &[&[1, 1], &[0, 1]]);
        let phi = EndoDescriptor::inner_from(h.clone()).unwrap();
        let hm = &h * &g;
        let seq = recurrence(&g, &phi, 50);
        let h_inv = h.inverse().unwrap();
        for k in 1..=50u64 {
            let closed = &h_inv.pow_u64(k) * &hm.pow_u64(k);
            assert_eq!(orbit_element_u64(&g, &phi, k).unwrap(), closed);
            assert_eq!(seq[k as usize - 1], closed);
        }
    }

    #[test]
    fn orbit_matches_recurrence_all_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for field in [Field::prime(7).unwrap(), Field::new(2, 4).unwrap()] {
            let p = Platform::matrices(field.clone(), 2).unwrap();
            let inst = sample_instance(&p, Variant::Inner, &mut rng).unwrap();
            let e = BigUint::from(field.characteristic().pow(2));
            let phis = [
                EndoDescriptor::identity(&p),
                EndoDescriptor::inner(inst.h.clone(), inst.h_inv.clone()).unwrap(),
                EndoDescriptor::compose(e, inst.h, inst.h_inv).unwrap(),
            ];
            for phi in &phis {
                let seq = recurrence(&inst.m, phi, 100);
                for (k, a) in seq.iter().enumerate() {
                    assert_eq!(&orbit_element_u64(&inst.m, phi, k as u64 + 1).unwrap(), a);
                }
                // a_(i+j) = phi^j(a_i) a_j
                for i in 1..=12 {
                    for j in 1..=12 {
                        let lhs = &phi.power_u64(j as u64).unwrap().apply(&seq[i - 1]).unwrap()
                            * &seq[j - 1];
                        assert_eq!(lhs, seq[i + j - 1]);
                    }
                }
            }
        }
    }

    #[test]
    fn trivial_session() {
        let p = m2_gf7();
        let g = mat(&p, &[&[1, 2], &[3, 4]]);
        let id = EndoDescriptor::identity(&p);
        let one = BigUint::one();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (t, s) = run_session(&id, &g, &one, &one, false, &mut rng).unwrap();
        assert_eq!(s.true_key, &g * &g);
        assert_eq!(t.alice, g);
        assert!(run_session(&id, &g, &BigUint::zero(), &one, false, &mut rng).is_err());
    }

    #[test]
    fn masked_toy_session() {
        let p = m2_gf7();
        let h = mat(&p, &[&[1, 1], &[0, 1]]);
        let m = mat(&p, &[&[1, 0], &[1, 0]]);
        let phi = EndoDescriptor::inner_from(h.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (t, s) = run_session(
            &phi,
            &m,
            &BigUint::from(2u32),
            &BigUint::from(3u32),
            true,
            &mut rng,
        )
        .unwrap();
        assert_eq!(s.true_key, recurrence(&m, &phi, 5)[4]);
        let hm = &h * &m;
        let r = s.r.unwrap();
        assert!(!r.is_zero());
        assert!((&r * &hm).is_zero());
        let a2 = orbit_element_u64(&m, &phi, 2).unwrap();
        assert!((&(&t.alice - &a2) * &hm).is_zero());
        assert!(t.masked);
    }

    #[test]
    fn masked_requires_singular_hm() {
        let p = m2_gf7();
        let h = mat(&p, &[&[1, 1], &[0, 1]]);
        let phi = EndoDescriptor::inner_from(h).unwrap();
        let invertible = mat(&p, &[&[1, 2], &[3, 4]]);
        let two = BigUint::from(2u32);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            run_session(&phi, &invertible, &two, &two, true, &mut rng),
            Err(Error::Precondition(_))
        ));
        let id = EndoDescriptor::identity(&p);
        assert!(run_session(&id, &invertible, &two, &two, true, &mut rng).is_err());
    }

    #[test]
    fn exponent_sampling_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let bound = BigUint::from(5u32);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let e = sample_exponent(&bound, &mut rng);
            assert!(e >= BigUint::from(2u32) && e <= bound);
            seen.insert(e);
        }
        assert_eq!(seen.len(), 4);
    }
}
