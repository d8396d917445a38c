//! Symbolic endomorphisms of a matrix platform.
//!
//! Conjugation is `x -> H^-1 x H`. The entry-power map raises every entry to
//! a power of the characteristic, which is a ring endomorphism that is only
//! semilinear over the base field but linear over its prime subfield.
//!
//! Every descriptor can be written as `x -> C^-1 psi_e(x) C` for an entry
//! exponent `e` and a conjugator `C`. Composition in that form is
//! `(e1, C1) then (e2, C2) = (e1 e2, psi_e2(C1) C2)`, which is what makes
//! `phi^k` computable in `O(log k)` descriptor products.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{invalid, Error, Result};
use crate::field::{is_power_of, Field};
use crate::platform::{Platform, PlatformElement};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EndoKind {
    Identity,
    /// `x -> h_inv * x * h`.
    Inner {
        h: PlatformElement,
        h_inv: PlatformElement,
    },
    /// Entry-wise `x -> x^e`.
    EntryPower {
        e: BigUint,
    },
    /// Entry power first, then conjugation by `h`.
    Compose {
        e: BigUint,
        h: PlatformElement,
        h_inv: PlatformElement,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndoDescriptor {
    platform: Platform,
    kind: EndoKind,
}

impl EndoDescriptor {
    pub fn identity(platform: &Platform) -> Self {
        EndoDescriptor {
            platform: platform.clone(),
            kind: EndoKind::Identity,
        }
    }

    /// Conjugation by `h`, with its inverse supplied by the caller.
    pub fn inner(h: PlatformElement, h_inv: PlatformElement) -> Result<Self> {
        let platform = h.platform().clone();
        check_inverse_pair(&h, &h_inv)?;
        Ok(EndoDescriptor {
            platform,
            kind: EndoKind::Inner { h, h_inv },
        })
    }

    /// Conjugation by `h`, computing the inverse.
    pub fn inner_from(h: PlatformElement) -> Result<Self> {
        let h_inv = h.inverse()?;
        Self::inner(h, h_inv)
    }

    pub fn entry_power(platform: &Platform, e: BigUint) -> Result<Self> {
        check_entry_exponent(platform, &e)?;
        Ok(EndoDescriptor {
            platform: platform.clone(),
            kind: EndoKind::EntryPower { e },
        })
    }

    pub fn compose(e: BigUint, h: PlatformElement, h_inv: PlatformElement) -> Result<Self> {
        let platform = h.platform().clone();
        check_entry_exponent(&platform, &e)?;
        check_inverse_pair(&h, &h_inv)?;
        Ok(EndoDescriptor {
            platform,
            kind: EndoKind::Compose { e, h, h_inv },
        })
    }

    pub fn compose_from(e: BigUint, h: PlatformElement) -> Result<Self> {
        let h_inv = h.inverse()?;
        Self::compose(e, h, h_inv)
    }

    pub fn kind(&self) -> &EndoKind {
        &self.kind
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    /// The conjugating matrix and its inverse, for inner automorphisms.
    pub fn inner_pair(&self) -> Option<(&PlatformElement, &PlatformElement)> {
        match &self.kind {
            EndoKind::Inner { h, h_inv } => Some((h, h_inv)),
            _ => None,
        }
    }

    pub fn apply(&self, x: &PlatformElement) -> Result<PlatformElement> {
        if x.platform() != &self.platform {
            return Err(Error::SpecMismatch("platforms"));
        }
        Ok(match &self.kind {
            EndoKind::Identity => x.clone(),
            EndoKind::Inner { h, h_inv } => &(h_inv * x) * h,
            EndoKind::EntryPower { e } => x.entry_pow(e)?,
            EndoKind::Compose { e, h, h_inv } => &(h_inv * &x.entry_pow(e)?) * h,
        })
    }

    /// The largest field over which [`apply`](Self::apply) is linear: the
    /// base field for identity and conjugation, the prime subfield once an
    /// entry power is involved.
    pub fn scalar_field(&self) -> Field {
        let f = self.platform.field();
        match self.kind {
            EndoKind::Identity | EndoKind::Inner { .. } => f.clone(),
            EndoKind::EntryPower { .. } | EndoKind::Compose { .. } => f.prime_subfield(),
        }
    }

    /// `(entry exponent, C, C^-1)` normal form; `None` means the identity part.
    fn normal_form(
        &self,
    ) -> (
        Option<&BigUint>,
        Option<(&PlatformElement, &PlatformElement)>,
    ) {
        match &self.kind {
            EndoKind::Identity => (None, None),
            EndoKind::Inner { h, h_inv } => (None, Some((h, h_inv))),
            EndoKind::EntryPower { e } => (Some(e), None),
            EndoKind::Compose { e, h, h_inv } => (Some(e), Some((h, h_inv))),
        }
    }

    /// The endomorphism `x -> other(self(x))`.
    pub fn then(&self, other: &EndoDescriptor) -> Result<EndoDescriptor> {
        if self.platform != other.platform {
            return Err(Error::SpecMismatch("platforms"));
        }
        let (e1, c1) = self.normal_form();
        let (e2, c2) = other.normal_form();
        let field = self.platform.field();

        let e = match (e1, e2) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(field.reduce_exponent(&(a * b))),
        };
        // psi_e2(C1) C2 and its inverse C2^-1 psi_e2(C1^-1)
        let c1 = match (c1, e2) {
            (Some((h, hi)), Some(e)) => Some((h.entry_pow(e)?, hi.entry_pow(e)?)),
            (Some((h, hi)), None) => Some((h.clone(), hi.clone())),
            (None, _) => None,
        };
        let c = match (c1, c2) {
            (None, None) => None,
            (Some(c), None) => Some(c),
            (None, Some((h, hi))) => Some((h.clone(), hi.clone())),
            (Some((h1, hi1)), Some((h2, hi2))) => Some((&h1 * h2, hi2 * &hi1)),
        };
        let kind = match (e, c) {
            (None, None) => EndoKind::Identity,
            (None, Some((h, h_inv))) => EndoKind::Inner { h, h_inv },
            (Some(e), None) => EndoKind::EntryPower { e },
            (Some(e), Some((h, h_inv))) => EndoKind::Compose { e, h, h_inv },
        };
        Ok(EndoDescriptor {
            platform: self.platform.clone(),
            kind,
        })
    }

    /// A descriptor for `phi^k`, by square-and-multiply over [`then`](Self::then).
    pub fn power(&self, k: &BigUint) -> Result<EndoDescriptor> {
        let mut acc = EndoDescriptor::identity(&self.platform);
        for i in (0..k.bits()).rev() {
            acc = acc.then(&acc)?;
            if k.bit(i) {
                acc = acc.then(self)?;
            }
        }
        Ok(acc)
    }

    pub fn power_u64(&self, k: u64) -> Result<EndoDescriptor> {
        self.power(&BigUint::from(k))
    }
}

fn check_inverse_pair(h: &PlatformElement, h_inv: &PlatformElement) -> Result<()> {
    if h.platform() != h_inv.platform() {
        return Err(Error::SpecMismatch("platforms"));
    }
    if h * h_inv != PlatformElement::identity(h.platform()) {
        return Err(invalid("supplied inverse does not satisfy H * H^-1 = I"));
    }
    Ok(())
}

fn check_entry_exponent(platform: &Platform, e: &BigUint) -> Result<()> {
    if !platform.is_field_base() {
        return Err(invalid("entry powers need a platform over a field"));
    }
    let p = platform.field().characteristic();
    if !(is_power_of(e, p) || e.is_one()) {
        return Err(invalid(format!("entry exponent {e} is not a power of {p}")));
    }
    Ok(())
}
