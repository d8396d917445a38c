//! Linear decomposition attacks on the noncommutative shift, plus the
//! commutant ("linear algebra") attack they are compared against.
//!
//! Every attack takes only a [`Transcript`]. The decomposition attacks split
//! into an offline phase that depends only on the public parameters
//! (`phi`, `g`) and an online phase that expresses an intercepted value in
//! the offline basis and reassembles the key from the coefficients. Neither
//! phase recovers the private exponents.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::endo::{EndoDescriptor, EndoKind};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::kex::{scalar_combination, Transcript};
use crate::linalg::{self, Insertion, SpanBasis};
use crate::platform::PlatformElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    General,
    Conjugation,
    Masked,
    Commutant,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::General,
        Method::Conjugation,
        Method::Masked,
        Method::Commutant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::General => "general",
            Method::Conjugation => "conjugation",
            Method::Masked => "masked",
            Method::Commutant => "commutant",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown attack method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackReport {
    pub method: Method,
    pub recovered_key: Option<PlatformElement>,
    pub basis_dimension: usize,
    pub elapsed: Duration,
    /// Why no key was produced.
    pub failure: Option<String>,
}

impl AttackReport {
    pub fn success(&self) -> bool {
        self.recovered_key.is_some()
    }
}

/// Wall-clock time per attack phase. `offline` only depends on public
/// parameters and can be shared by every session using them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    pub offline: Duration,
    pub express: Duration,
    pub assemble: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.offline + self.express + self.assemble
    }
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed();
    out
}

/// The maximal independent prefix `a_1, ..., a_k` of the orbit of `g`,
/// flattened over the scalar field of `phi`.
#[derive(Debug, Clone)]
pub struct OrbitBasis {
    pub basis: SpanBasis<usize>,
    /// `elements[i] = a_(i+1)`.
    pub elements: Vec<PlatformElement>,
    pub scalar: Field,
}

impl OrbitBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Inserts `a_1, a_2, ...` until the first one that is already in the span.
/// Every later orbit element then lies in the span as well, since
/// `a_(j+1) = phi(a_j) g` and `x -> phi(x) g` is linear over the scalar field.
pub fn orbit_prefix_basis(
    g: &PlatformElement,
    phi: &EndoDescriptor,
    max_dim: usize,
) -> Result<OrbitBasis> {
    let scalar = phi.scalar_field();
    let dim = g.platform().flat_dim(&scalar)?;
    let mut basis = SpanBasis::new(scalar.clone(), dim);
    let mut elements = Vec::new();
    let mut current = g.clone();
    loop {
        let index = elements.len() + 1;
        if let Insertion::Dependent(_) = basis.insert(current.flatten(&scalar)?, index)? {
            return Ok(OrbitBasis {
                basis,
                elements,
                scalar,
            });
        }
        elements.push(current.clone());
        if elements.len() > max_dim {
            return Err(Error::Invariant(format!(
                "orbit still independent after {max_dim} elements"
            )));
        }
        current = &phi.apply(&current)? * g;
    }
}

/// Offline state of the generic attack.
#[derive(Debug, Clone)]
pub struct GeneralAttack {
    phi: EndoDescriptor,
    orbit: OrbitBasis,
}

impl GeneralAttack {
    pub fn prepare(phi: &EndoDescriptor, g: &PlatformElement) -> Result<Self> {
        let dim = g.platform().flat_dim(&phi.scalar_field())?;
        Ok(GeneralAttack {
            phi: phi.clone(),
            orbit: orbit_prefix_basis(g, phi, dim)?,
        })
    }

    pub fn orbit(&self) -> &OrbitBasis {
        &self.orbit
    }

    /// Coefficients `eta` with `bob = sum eta_i a_i`.
    pub fn express(&self, bob: &PlatformElement) -> Result<Vec<Fe>> {
        self.orbit
            .basis
            .express(&bob.flatten(&self.orbit.scalar)?)?
            .ok_or_else(|| Error::Invariant("intercepted value outside the orbit span".into()))
    }

    /// `sum eta_i phi^i(alice) a_i`, which equals `a_(m+n)` because
    /// `phi^i(a_m) a_i = a_(m+i)` and the scalars are fixed by `phi`.
    pub fn assemble(&self, eta: &[Fe], alice: &PlatformElement) -> Result<PlatformElement> {
        let mut twisted = alice.clone();
        let mut terms = Vec::with_capacity(eta.len());
        for (&c, a_i) in eta.iter().zip(&self.orbit.elements) {
            twisted = self.phi.apply(&twisted)?;
            terms.push((c, &twisted * a_i));
        }
        Ok(scalar_combination(alice.platform(), terms))
    }
}

/// Which monomials `H^-k (HM)^l` generate the span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureMode {
    /// All `k, l >= 0`, seeded with the identity.
    Full,
    /// Only `k = l >= 1`, seeded with `H^-1 (HM) = M`.
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisTag {
    /// `H^-k (HM)^l`.
    Monomial { k: u32, l: u32 },
    /// The `j`-th left annihilator basis vector of `HM`.
    Annihilator(usize),
}

/// Basis of a span of monomials `H^-k (HM)^l`, optionally extended by the
/// left annihilator of `HM`. Monomials always precede annihilator vectors.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub basis: SpanBasis<BasisTag>,
    /// Platform elements in insertion order, parallel to the basis originals.
    pub elements: Vec<PlatformElement>,
    pub monomials: usize,
}

/// Closure of `{seed}` under `x -> H^-1 x` and `x -> x (HM)` (full mode) or
/// under `x -> H^-1 x (HM)` (diagonal mode). Breadth-first: a monomial's
/// successors are queued only when it extended the span.
pub fn monomial_closure(
    h_inv: &PlatformElement,
    hm: &PlatformElement,
    scalar: &Field,
    mode: ClosureMode,
) -> Result<MonomialBasis> {
    let platform = hm.platform();
    let dim = platform.flat_dim(scalar)?;
    let mut basis = SpanBasis::new(scalar.clone(), dim);
    let mut elements = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    match mode {
        ClosureMode::Full => queue.push_back((0, 0, PlatformElement::identity(platform))),
        ClosureMode::Diagonal => queue.push_back((1, 1, h_inv * hm)),
    }
    while let Some((k, l, x)) = queue.pop_front() {
        if !basis
            .insert(x.flatten(scalar)?, BasisTag::Monomial { k, l })?
            .added()
        {
            continue;
        }
        match mode {
            ClosureMode::Full => {
                queue.push_back((k + 1, l, h_inv * &x));
                queue.push_back((k, l + 1, &x * hm));
            }
            ClosureMode::Diagonal => queue.push_back((k + 1, l + 1, &(h_inv * &x) * hm)),
        }
        elements.push(x);
    }
    let monomials = elements.len();
    Ok(MonomialBasis {
        basis,
        elements,
        monomials,
    })
}

fn inner_parts(t: &Transcript) -> Result<(&PlatformElement, &PlatformElement)> {
    match t.phi.kind() {
        EndoKind::Inner { h, h_inv } => Ok((h, h_inv)),
        _ => Err(Error::Precondition(
            "attack needs an inner automorphism".into(),
        )),
    }
}

/// `sum c_i H^-k_i x (HM)^l_i` over the monomial part of a basis.
fn sandwich_sum(
    monomials: &[(Fe, u32, u32)],
    h_inv: &PlatformElement,
    hm: &PlatformElement,
    x: &PlatformElement,
) -> PlatformElement {
    let max_k = monomials.iter().map(|m| m.1).max().unwrap_or(0);
    let max_l = monomials.iter().map(|m| m.2).max().unwrap_or(0);
    let platform = x.platform();
    let mut left = vec![PlatformElement::identity(platform)];
    for _ in 0..max_k {
        left.push(h_inv * left.last().unwrap());
    }
    let mut right = vec![PlatformElement::identity(platform)];
    for _ in 0..max_l {
        right.push(right.last().unwrap() * hm);
    }
    scalar_combination(
        platform,
        monomials
            .iter()
            .map(|&(c, k, l)| (c, &(&left[k as usize] * x) * &right[l as usize])),
    )
}

fn monomial_terms(basis: &MonomialBasis, coeffs: &[Fe]) -> Vec<(Fe, u32, u32)> {
    basis
        .basis
        .tags()
        .zip(coeffs)
        .filter_map(|(tag, &c)| match *tag {
            BasisTag::Monomial { k, l } => Some((c, k, l)),
            BasisTag::Annihilator(_) => None,
        })
        .collect()
}

/// Offline state of the conjugation-span attack.
#[derive(Debug, Clone)]
pub struct ConjugationAttack {
    h_inv: PlatformElement,
    hm: PlatformElement,
    span: MonomialBasis,
}

impl ConjugationAttack {
    pub fn prepare(
        h: &PlatformElement,
        h_inv: &PlatformElement,
        m: &PlatformElement,
    ) -> Result<Self> {
        let hm = h * m;
        let scalar = m.platform().field().clone();
        let span = monomial_closure(h_inv, &hm, &scalar, ClosureMode::Full)?;
        Ok(ConjugationAttack {
            h_inv: h_inv.clone(),
            hm,
            span,
        })
    }

    pub fn span(&self) -> &MonomialBasis {
        &self.span
    }

    pub fn express(&self, bob: &PlatformElement) -> Result<Vec<Fe>> {
        let scalar = self.span.basis.field().clone();
        self.span
            .basis
            .express(&bob.flatten(&scalar)?)?
            .ok_or_else(|| Error::Invariant("intercepted value outside the monomial span".into()))
    }

    /// `sum eta_i H^-k_i alice (HM)^l_i`.
    pub fn assemble(&self, eta: &[Fe], alice: &PlatformElement) -> PlatformElement {
        sandwich_sum(
            &monomial_terms(&self.span, eta),
            &self.h_inv,
            &self.hm,
            alice,
        )
    }
}

/// Offline state of the attack on the masked variant: a basis of
/// `W + U`, `W` spanned by `H^-k (HM)^k` for `k >= 1` and `U` the left
/// annihilator of `HM`.
#[derive(Debug, Clone)]
pub struct MaskedAttack {
    h_inv: PlatformElement,
    hm: PlatformElement,
    span: MonomialBasis,
}

impl MaskedAttack {
    pub fn prepare(
        h: &PlatformElement,
        h_inv: &PlatformElement,
        m: &PlatformElement,
    ) -> Result<Self> {
        let hm = h * m;
        let scalar = m.platform().field().clone();
        let mut span = monomial_closure(h_inv, &hm, &scalar, ClosureMode::Diagonal)?;
        for (j, f) in hm.left_annihilator()?.into_iter().enumerate() {
            if span
                .basis
                .insert(f.flatten(&scalar)?, BasisTag::Annihilator(j))?
                .added()
            {
                span.elements.push(f);
            }
        }
        Ok(MaskedAttack {
            h_inv: h_inv.clone(),
            hm,
            span,
        })
    }

    pub fn span(&self) -> &MonomialBasis {
        &self.span
    }

    /// Coefficients over `W` and `U`; only the `W` part is used later.
    pub fn express(&self, bob: &PlatformElement) -> Result<Vec<Fe>> {
        let scalar = self.span.basis.field().clone();
        let coeffs = self
            .span
            .basis
            .express(&bob.flatten(&scalar)?)?
            .ok_or_else(|| Error::Invariant("intercepted value outside W + U".into()))?;
        // whatever W does not explain must annihilate HM
        let w_part = scalar_combination(
            bob.platform(),
            coeffs[..self.span.monomials]
                .iter()
                .zip(&self.span.elements)
                .map(|(&c, e)| (c, e.clone())),
        );
        if !(&(bob - &w_part) * &self.hm).is_zero() {
            return Err(Error::Invariant("residual does not annihilate HM".into()));
        }
        Ok(coeffs)
    }

    /// `sum eta_i H^-k_i alice (HM)^k_i`. The mask `R` vanishes since every
    /// `k_i >= 1`, and the unexplained part of Bob's mask is absorbed by `(HM)^m`.
    pub fn assemble(&self, coeffs: &[Fe], alice: &PlatformElement) -> PlatformElement {
        sandwich_sum(
            &monomial_terms(&self.span, coeffs),
            &self.h_inv,
            &self.hm,
            alice,
        )
    }
}

/// Trial budget for the commutant attack's search for an invertible solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommutantBudget {
    pub random_trials: usize,
    /// Enumerate the whole solution space when it has at most this many elements.
    pub enumerate_up_to: u128,
}

impl Default for CommutantBudget {
    fn default() -> Self {
        CommutantBudget {
            random_trials: 64,
            enumerate_up_to: 1 << 12,
        }
    }
}

/// Basis of `{Y : Y N = N Y and (A Y) H = H (A Y)}`.
fn commutant_space(
    a: &PlatformElement,
    h: &PlatformElement,
    hm: &PlatformElement,
) -> Result<Vec<PlatformElement>> {
    let platform = a.platform();
    let field = platform.field();
    let unknowns = platform.coord_len();
    let mut columns = Vec::with_capacity(unknowns);
    for j in 0..unknowns {
        let mut data = vec![Fe::ZERO; unknowns];
        data[j] = Fe::ONE;
        let y = PlatformElement::from_coords(platform, data)?;
        let ay = a * &y;
        let mut col = (&(&y * hm) - &(hm * &y)).coords().to_vec();
        col.extend_from_slice((&(&ay * h) - &(h * &ay)).coords());
        columns.push(col);
    }
    let rows: Vec<Vec<Fe>> = (0..2 * unknowns)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    let sol = linalg::solve_with_cols(field, &rows, &vec![Fe::ZERO; rows.len()], unknowns)?
        .expect("homogeneous systems are consistent");
    sol.nullspace
        .into_iter()
        .map(|v| PlatformElement::from_coords(platform, v))
        .collect()
}

/// Searches the span of `basis` for an invertible element.
fn find_invertible(
    basis: &[PlatformElement],
    budget: CommutantBudget,
) -> Option<(PlatformElement, PlatformElement)> {
    let platform = basis.first()?.platform();
    let field = platform.field();
    let q = field.order();
    let space = num_traits::pow(q.clone(), basis.len());
    let try_one = |y: PlatformElement| y.inverse().ok().map(|inv| (y, inv));

    if field.is_prime_field() && space <= budget.enumerate_up_to.into() {
        let p = u128::from(field.characteristic());
        let total = u128::try_from(&space).expect("small space");
        for code in 1..total {
            let mut c = code;
            let y = scalar_combination(
                platform,
                basis.iter().map(|b| {
                    let digit = (c % p) as u64;
                    c /= p;
                    (field.from_int(digit), b.clone())
                }),
            );
            if let Some(found) = try_one(y) {
                return Some(found);
            }
        }
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x636f_6d6d);
    for _ in 0..budget.random_trials {
        let y = scalar_combination(
            platform,
            basis.iter().map(|b| (field.random(&mut rng), b.clone())),
        );
        if let Some(found) = try_one(y) {
            return Some(found);
        }
    }
    None
}

/// An invertible `Y'` with `Y' (HM) = (HM) Y'` and `(alice Y') H = H (alice Y')`,
/// if the search finds one within `budget`.
pub fn commutant_solution(
    t: &Transcript,
    budget: CommutantBudget,
) -> Result<Option<PlatformElement>> {
    let (h, _) = inner_parts(t)?;
    if !t.platform().is_field_base() {
        return Err(Error::Precondition(
            "the commutant attack needs a field platform".into(),
        ));
    }
    let space = commutant_space(&t.alice, h, &(h * &t.g))?;
    Ok(find_invertible(&space, budget).map(|(y_prime, _)| y_prime))
}

/// One direction of the commutant attack: find `X` commuting with `H`,
/// `Y` commuting with `HM`, `X Y = own`, and return `X other Y`.
fn commutant_direction(
    own: &PlatformElement,
    other: &PlatformElement,
    h: &PlatformElement,
    hm: &PlatformElement,
    budget: CommutantBudget,
) -> Result<(usize, Option<PlatformElement>)> {
    let space = commutant_space(own, h, hm)?;
    let dim = space.len();
    Ok((
        dim,
        find_invertible(&space, budget).map(|(y_prime, y)| &(&(own * &y_prime) * other) * &y),
    ))
}

fn failed(method: Method, dim: usize, elapsed: Duration, why: String) -> AttackReport {
    AttackReport {
        method,
        recovered_key: None,
        basis_dimension: dim,
        elapsed,
        failure: Some(why),
    }
}

fn require_unmasked(t: &Transcript, method: Method) -> Result<()> {
    if t.masked {
        return Err(Error::Precondition(format!(
            "the {method} attack needs an unmasked transcript"
        )));
    }
    Ok(())
}

/// Runs `method` on `t`, recording per-phase timings.
///
/// Returns `Err` when the method does not apply to the transcript (wrong
/// endomorphism, wrong masking, unsupported base ring). Cryptanalytic
/// failure is reported through [`AttackReport::failure`].
pub fn run_attack(method: Method, t: &Transcript) -> Result<(AttackReport, PhaseTimings)> {
    run_attack_with(method, t, CommutantBudget::default())
}

pub fn run_attack_with(
    method: Method,
    t: &Transcript,
    budget: CommutantBudget,
) -> Result<(AttackReport, PhaseTimings)> {
    let mut times = PhaseTimings::default();
    let (dim, key) = match method {
        Method::General => {
            require_unmasked(t, method)?;
            let attack = timed(&mut times.offline, || GeneralAttack::prepare(&t.phi, &t.g))?;
            let dim = attack.orbit().len();
            let key = timed(&mut times.express, || attack.express(&t.bob))
                .and_then(|eta| timed(&mut times.assemble, || attack.assemble(&eta, &t.alice)));
            (dim, key)
        }
        Method::Conjugation => {
            require_unmasked(t, method)?;
            let (h, h_inv) = inner_parts(t)?;
            let attack = timed(&mut times.offline, || {
                ConjugationAttack::prepare(h, h_inv, &t.g)
            })?;
            let dim = attack.span().basis.len();
            let key = timed(&mut times.express, || attack.express(&t.bob))
                .map(|eta| timed(&mut times.assemble, || attack.assemble(&eta, &t.alice)));
            (dim, key)
        }
        Method::Masked => {
            if !t.masked {
                return Err(Error::Precondition(
                    "the masked attack needs a masked transcript".into(),
                ));
            }
            let (h, h_inv) = inner_parts(t)?;
            if !t.platform().is_field_base() {
                return Err(Error::Precondition(
                    "the masked attack needs a field platform".into(),
                ));
            }
            let attack = timed(&mut times.offline, || MaskedAttack::prepare(h, h_inv, &t.g))?;
            let dim = attack.span().basis.len();
            let key = timed(&mut times.express, || attack.express(&t.bob))
                .map(|c| timed(&mut times.assemble, || attack.assemble(&c, &t.alice)));
            (dim, key)
        }
        Method::Commutant => {
            let (h, _) = inner_parts(t)?;
            if !t.platform().is_field_base() {
                return Err(Error::Precondition(
                    "the commutant attack needs a field platform".into(),
                ));
            }
            let hm = h * &t.g;
            // solve from both sides; the two candidates must agree
            let forward = timed(&mut times.express, || {
                commutant_direction(&t.alice, &t.bob, h, &hm, budget)
            })?;
            let backward = timed(&mut times.assemble, || {
                commutant_direction(&t.bob, &t.alice, h, &hm, budget)
            })?;
            let key = match (forward.1, backward.1) {
                (Some(k1), Some(k2)) if k1 == k2 => Ok(k1),
                (Some(_), Some(_)) => Err(Error::Invariant(
                    "the two commutant solutions give different keys".into(),
                )),
                _ => Err(Error::Invariant(
                    "no invertible solution within budget".into(),
                )),
            };
            (forward.0, key)
        }
    };
    let elapsed = times.total();
    let report = match key {
        Ok(k) => AttackReport {
            method,
            recovered_key: Some(k),
            basis_dimension: dim,
            elapsed,
            failure: None,
        },
        Err(e) => failed(method, dim, elapsed, e.to_string()),
    };
    Ok((report, times))
}

pub fn attack_general(t: &Transcript) -> Result<AttackReport> {
    Ok(run_attack(Method::General, t)?.0)
}

pub fn attack_conjugation(t: &Transcript) -> Result<AttackReport> {
    Ok(run_attack(Method::Conjugation, t)?.0)
}

pub fn attack_masked(t: &Transcript) -> Result<AttackReport> {
    Ok(run_attack(Method::Masked, t)?.0)
}

pub fn attack_commutant(t: &Transcript) -> Result<AttackReport> {
    Ok(run_attack(Method::Commutant, t)?.0)
}
