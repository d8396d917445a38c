//! Named platform configurations and seeded session generation.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::endo::EndoDescriptor;
use crate::error::{invalid, Error, Result};
use crate::field::Field;
use crate::group::GroupTable;
use crate::kex::{
    default_exponent_bound, run_session, sample_exponent, SessionSecrets, Transcript,
};
use crate::platform::{sample_instance, Platform, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlatformChoice {
    /// `M_2(GF(2^127))` with conjugation.
    Kls2x2,
    /// `M_2(GF(2^127))` with entry-wise fourth power followed by conjugation.
    Kls2x2Power4,
    /// `M_3(F_7[A_5])` with conjugation.
    Hkks3x3,
    /// `M_n(GF(p^d))` with conjugation.
    Toy { p: u64, d: usize, n: usize },
}

impl PlatformChoice {
    pub fn platform(&self) -> Result<Platform> {
        match *self {
            PlatformChoice::Kls2x2 | PlatformChoice::Kls2x2Power4 => {
                Platform::matrices(Field::gf2_127()?, 2)
            }
            PlatformChoice::Hkks3x3 => {
                Platform::group_algebra_matrices(Field::prime(7)?, Arc::new(GroupTable::a5()), 3)
            }
            PlatformChoice::Toy { p, d, n } => Platform::matrices(Field::new(p, d)?, n),
        }
    }

    /// Whether sessions can use the masked variant.
    pub fn supports_masking(&self) -> bool {
        matches!(
            self,
            PlatformChoice::Kls2x2 | PlatformChoice::Toy { n: 2.., .. }
        )
    }
}

impl fmt::Display for PlatformChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlatformChoice::Kls2x2 => f.write_str("kls2x2"),
            PlatformChoice::Kls2x2Power4 => f.write_str("kls2x2-power4"),
            PlatformChoice::Hkks3x3 => f.write_str("hkks3x3"),
            PlatformChoice::Toy { p, d, n } => write!(f, "toy:{p},{d},{n}"),
        }
    }
}

impl FromStr for PlatformChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kls2x2" => return Ok(PlatformChoice::Kls2x2),
            "kls2x2-power4" => return Ok(PlatformChoice::Kls2x2Power4),
            "hkks3x3" => return Ok(PlatformChoice::Hkks3x3),
            _ => {}
        }
        let bad = || {
            invalid(format!(
                "unknown platform {s:?}; expected kls2x2, kls2x2-power4, hkks3x3 or toy:p,d,n"
            ))
        };
        let parts: Vec<&str> = s.strip_prefix("toy:").ok_or_else(bad)?.split(',').collect();
        let [p, d, n] = parts[..] else {
            return Err(bad());
        };
        let p = p.parse().map_err(|_| bad())?;
        let d = d.parse().map_err(|_| bad())?;
        let n = n.parse().map_err(|_| bad())?;
        if n == 0 || n > 16 {
            return Err(invalid("toy matrix size must be between 1 and 16"));
        }
        // validates p and d
        Field::new(p, d)?;
        Ok(PlatformChoice::Toy { p, d, n })
    }
}

/// Everything needed to reproduce one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub platform: PlatformChoice,
    pub masked: bool,
    pub exp_bound: BigUint,
    pub seed: u64,
}

impl Scenario {
    pub fn new(platform: PlatformChoice) -> Self {
        Scenario {
            platform,
            masked: false,
            exp_bound: default_exponent_bound(),
            seed: 0,
        }
    }

    pub fn masked(mut self, masked: bool) -> Self {
        self.masked = masked;
        self
    }

    pub fn exp_bound(mut self, bound: BigUint) -> Self {
        self.exp_bound = bound;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Samples the public instance and exponents from one generator seeded
    /// with `seed`, then runs an honest session.
    pub fn run(&self) -> Result<(Transcript, SessionSecrets)> {
        if self.masked && !self.platform.supports_masking() {
            return Err(invalid(format!(
                "{} does not support the masked variant",
                self.platform
            )));
        }
        if self.exp_bound == BigUint::default() {
            return Err(invalid("exponent bound must be positive"));
        }
        let platform = self.platform.platform()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let variant = match (self.platform, self.masked) {
            (_, true) => Variant::Masked,
            (PlatformChoice::Kls2x2Power4, false) => Variant::Composite,
            (_, false) => Variant::Inner,
        };
        let inst = sample_instance(&platform, variant, &mut rng)?;
        let phi = match self.platform {
            PlatformChoice::Kls2x2Power4 => {
                EndoDescriptor::compose(4u32.into(), inst.h, inst.h_inv)?
            }
            _ => EndoDescriptor::inner(inst.h, inst.h_inv)?,
        };
        let m = sample_exponent(&self.exp_bound, &mut rng);
        let n = sample_exponent(&self.exp_bound, &mut rng);
        run_session(&phi, &inst.m, &m, &n, self.masked, &mut rng)
    }
}
