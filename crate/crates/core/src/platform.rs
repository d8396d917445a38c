//! Matrix platforms: `n x n` matrices over a finite field or over a group
//! algebra `F[G]`, with flattening to coordinate vectors over a scalar field.
//!
//! Every element stores its entries as a flat row-major vector of base-field
//! coordinates: one coordinate per entry for field platforms, `|G|`
//! coordinates per entry (indexed by group element) for group-algebra
//! platforms. This is already the flattening over the base field.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigUint;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::field::{Fe, Field};
use crate::group::{ga_dot, GroupAlgebraElement, GroupTable};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseRing {
    Field(Field),
    GroupAlgebra {
        field: Field,
        table: Arc<GroupTable>,
    },
}

#[derive(Debug, PartialEq, Eq)]
pub struct PlatformSpec {
    base: BaseRing,
    n: usize,
}

/// Shared handle on a [`PlatformSpec`].
#[derive(Clone)]
pub struct Platform(Arc<PlatformSpec>);

impl PartialEq for Platform {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Platform {}

impl fmt::Debug for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.base {
            BaseRing::Field(k) => write!(f, "M_{}({:?})", self.0.n, k),
            BaseRing::GroupAlgebra { field, table } => {
                write!(f, "M_{}({:?}[{}])", self.0.n, field, table.name())
            }
        }
    }
}

impl Platform {
    pub fn matrices(field: Field, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix size must be positive"));
        }
        Ok(Platform(Arc::new(PlatformSpec {
            base: BaseRing::Field(field),
            n,
        })))
    }

    pub fn group_algebra_matrices(field: Field, table: Arc<GroupTable>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix size must be positive"));
        }
        Ok(Platform(Arc::new(PlatformSpec {
            base: BaseRing::GroupAlgebra { field, table },
            n,
        })))
    }

    pub fn base(&self) -> &BaseRing {
        &self.0.base
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    /// The field the base ring is an algebra over.
    pub fn field(&self) -> &Field {
        match &self.0.base {
            BaseRing::Field(f) => f,
            BaseRing::GroupAlgebra { field, .. } => field,
        }
    }

    pub fn group(&self) -> Option<&Arc<GroupTable>> {
        match &self.0.base {
            BaseRing::Field(_) => None,
            BaseRing::GroupAlgebra { table, .. } => Some(table),
        }
    }

    pub fn is_field_base(&self) -> bool {
        matches!(self.0.base, BaseRing::Field(_))
    }

    /// Dimension of one entry over the base field.
    pub fn entry_dim(&self) -> usize {
        self.group().map_or(1, |g| g.order())
    }

    /// Number of base-field coordinates of an element.
    pub fn coord_len(&self) -> usize {
        self.0.n * self.0.n * self.entry_dim()
    }

    /// Flat dimension over `scalar`, which must be the base field or its prime subfield.
    pub fn flat_dim(&self, scalar: &Field) -> Result<usize> {
        Ok(self.coord_len() * self.coords_per_scalar(scalar)?)
    }

    fn coords_per_scalar(&self, scalar: &Field) -> Result<usize> {
        let f = self.field();
        if scalar == f {
            Ok(1)
        } else if *scalar == f.prime_subfield() {
            Ok(f.degree())
        } else {
            Err(Error::SpecMismatch("scalar fields"))
        }
    }

    fn require_field(&self) -> Result<&Field> {
        match &self.0.base {
            BaseRing::Field(f) => Ok(f),
            BaseRing::GroupAlgebra { .. } => {
                Err(invalid("operation needs a platform over a field"))
            }
        }
    }
}

/// A square matrix over the platform's base ring.
#[derive(Clone, PartialEq, Eq)]
pub struct PlatformElement {
    platform: Platform,
    data: Vec<Fe>,
}

impl fmt::Debug for PlatformElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = self.platform.field();
        let n = self.platform.n();
        let r = self.platform.entry_dim();
        write!(f, "[")?;
        for i in 0..n {
            write!(f, "{}[", if i > 0 { ", " } else { "" })?;
            for j in 0..n {
                let e = &self.data[(i * n + j) * r..(i * n + j + 1) * r];
                let s: Vec<String> = if r == 1 {
                    vec![field.encode(e[0])]
                } else {
                    e.iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(g, c)| format!("{}g{g}", field.encode(*c)))
                        .collect()
                };
                write!(f, "{}{}", if j > 0 { ", " } else { "" }, s.join("+"))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl PlatformElement {
    pub fn zero(platform: &Platform) -> Self {
        PlatformElement {
            platform: platform.clone(),
            data: vec![Fe::ZERO; platform.coord_len()],
        }
    }

    pub fn identity(platform: &Platform) -> Self {
        let mut out = Self::zero(platform);
        let n = platform.n();
        let r = platform.entry_dim();
        let unit = platform.group().map_or(0, |g| g.identity());
        for i in 0..n {
            out.data[(i * n + i) * r + unit] = Fe::ONE;
        }
        out
    }

    /// Builds an element from its base-field coordinates (row-major entries,
    /// group-algebra coefficients by element index within an entry).
    pub fn from_coords(platform: &Platform, data: Vec<Fe>) -> Result<Self> {
        if data.len() != platform.coord_len() {
            return Err(Error::Dimension {
                expected: platform.coord_len(),
                got: data.len(),
            });
        }
        if data.iter().any(|&x| !platform.field().contains(x)) {
            return Err(invalid("coordinate outside the base field"));
        }
        Ok(PlatformElement {
            platform: platform.clone(),
            data,
        })
    }

    /// Field-platform convenience: entries given as integers embedded mod p
    /// (only meaningful for prime fields).
    pub fn from_ints(platform: &Platform, rows: &[&[u64]]) -> Result<Self> {
        let field = platform.require_field()?;
        let n = platform.n();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension {
                expected: n,
                got: rows.len(),
            });
        }
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| field.from_int(x)))
            .collect();
        Self::from_coords(platform, data)
    }

    /// Field-platform convenience: entries given as field values.
    pub fn from_entries(platform: &Platform, entries: Vec<Fe>) -> Result<Self> {
        platform.require_field()?;
        Self::from_coords(platform, entries)
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    pub fn coords(&self) -> &[Fe] {
        &self.data
    }

    /// Entry `(i, j)` of a field platform.
    pub fn entry(&self, i: usize, j: usize) -> Fe {
        let n = self.platform.n();
        self.data[(i * n + j) * self.platform.entry_dim()]
    }

    /// Entry `(i, j)` of a group-algebra platform.
    pub fn ga_entry(&self, i: usize, j: usize) -> Result<GroupAlgebraElement> {
        let table = self
            .platform
            .group()
            .ok_or_else(|| invalid("not a group-algebra platform"))?;
        let n = self.platform.n();
        let r = table.order();
        GroupAlgebraElement::new(
            table.clone(),
            self.platform.field().clone(),
            self.data[(i * n + j) * r..(i * n + j + 1) * r].to_vec(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.platform == other.platform {
            Ok(())
        } else {
            Err(Error::SpecMismatch("platforms"))
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Fe, Fe) -> Fe) -> Self {
        PlatformElement {
            platform: self.platform.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.platform.field();
        Ok(self.zip_with(other, |a, b| f.add(a, b)))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let f = self.platform.field();
        Ok(self.zip_with(other, |a, b| f.sub(a, b)))
    }

    /// Multiplication by a scalar from the base field (or any subfield of it).
    pub fn scale(&self, s: Fe) -> Self {
        let f = self.platform.field();
        PlatformElement {
            platform: self.platform.clone(),
            data: self.data.iter().map(|&x| f.mul(x, s)).collect(),
        }
    }

    /// Matrix product over the base ring.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let p = &self.platform;
        let n = p.n();
        let mut out = vec![Fe::ZERO; p.coord_len()];
        match p.base() {
            BaseRing::Field(f) => {
                for i in 0..n {
                    for k in 0..n {
                        let a = self.data[i * n + k];
                        if a.is_zero() {
                            continue;
                        }
                        for j in 0..n {
                            let o = &mut out[i * n + j];
                            *o = f.mul_add(*o, a, other.data[k * n + j]);
                        }
                    }
                }
            }
            BaseRing::GroupAlgebra { field, table } => {
                let r = table.order();
                for i in 0..n {
                    for j in 0..n {
                        let pairs: Vec<(&[Fe], &[Fe])> = (0..n)
                            .map(|k| {
                                (
                                    &self.data[(i * n + k) * r..(i * n + k + 1) * r],
                                    &other.data[(k * n + j) * r..(k * n + j + 1) * r],
                                )
                            })
                            .collect();
                        ga_dot(
                            table,
                            field,
                            &pairs,
                            &mut out[(i * n + j) * r..(i * n + j + 1) * r],
                        );
                    }
                }
            }
        }
        Ok(PlatformElement {
            platform: p.clone(),
            data: out,
        })
    }

    /// `self^e` by square-and-multiply.
    pub fn pow(&self, e: &BigUint) -> Self {
        let mut acc = Self::identity(&self.platform);
        for i in (0..e.bits()).rev() {
            acc = &acc * &acc;
            if e.bit(i) {
                acc = &acc * self;
            }
        }
        acc
    }

    pub fn pow_u64(&self, e: u64) -> Self {
        self.pow(&BigUint::from(e))
    }

    /// Raises every entry to the power `e` (field platforms only).
    pub fn entry_pow(&self, e: &BigUint) -> Result<Self> {
        let f = self.platform.require_field()?;
        Ok(PlatformElement {
            platform: self.platform.clone(),
            data: self.data.iter().map(|&x| f.pow(x, e)).collect(),
        })
    }

    /// Inverse matrix. Gauss-Jordan over a field; over a group algebra the
    /// equation `A X = I` is solved in the regular representation.
    pub fn inverse(&self) -> Result<Self> {
        match self.platform.base() {
            BaseRing::Field(f) => self.inverse_over_field(f),
            BaseRing::GroupAlgebra { field, table } => {
                self.inverse_over_group_algebra(field, table)
            }
        }
    }

    fn inverse_over_field(&self, f: &Field) -> Result<Self> {
        let n = self.platform.n();
        let mut m: Vec<Vec<Fe>> = (0..n)
            .map(|i| {
                let mut row = self.data[i * n..(i + 1) * n].to_vec();
                row.extend((0..n).map(|j| if i == j { Fe::ONE } else { Fe::ZERO }));
                row
            })
            .collect();
        for c in 0..n {
            let sel = (c..n)
                .find(|&r| !m[r][c].is_zero())
                .ok_or(Error::Singular)?;
            m.swap(c, sel);
            let inv = f.inv(m[c][c])?;
            m[c].iter_mut().for_each(|x| *x = f.mul(*x, inv));
            let pivot = m[c].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r != c && !row[c].is_zero() {
                    let k = f.neg(row[c]);
                    for (x, &p) in row.iter_mut().zip(&pivot) {
                        *x = f.mul_add(*x, k, p);
                    }
                }
            }
        }
        let data = m.into_iter().flat_map(|row| row[n..].to_vec()).collect();
        Ok(PlatformElement {
            platform: self.platform.clone(),
            data,
        })
    }

    fn inverse_over_group_algebra(&self, field: &Field, table: &GroupTable) -> Result<Self> {
        let n = self.platform.n();
        let r = table.order();
        let dim = self.platform.coord_len();
        // column (row_idx, c, g) of the left-multiplication operator: A * (g at entry (row_idx, c))
        let mut op = vec![vec![Fe::ZERO; dim]; dim];
        for k in 0..n {
            for c in 0..n {
                for g in 0..r {
                    let col = (k * n + c) * r + g;
                    for i in 0..n {
                        let a = &self.data[(i * n + k) * r..(i * n + k + 1) * r];
                        for (u, &au) in a.iter().enumerate() {
                            if !au.is_zero() {
                                op[(i * n + c) * r + table.mul(u, g)][col] = au;
                            }
                        }
                    }
                }
            }
        }
        let rhs = Self::identity(&self.platform).data;
        let sol = linalg::solve_linear(field, &op, &rhs)?.ok_or(Error::Singular)?;
        if !sol.nullspace.is_empty() {
            return Err(Error::Singular);
        }
        Ok(PlatformElement {
            platform: self.platform.clone(),
            data: sol.particular,
        })
    }

    /// Coordinates over `scalar` (the base field or its prime subfield).
    /// Over the prime subfield each base-field coordinate expands into its
    /// `d` polynomial-basis coefficients, lowest degree first.
    pub fn flatten(&self, scalar: &Field) -> Result<Vec<Fe>> {
        let f = self.platform.field();
        if self.platform.coords_per_scalar(scalar)? == 1 {
            return Ok(self.data.clone());
        }
        Ok(self
            .data
            .iter()
            .flat_map(|&x| f.coeffs(x).into_iter().map(|c| scalar.from_int(c)))
            .collect())
    }

    pub fn unflatten(platform: &Platform, scalar: &Field, v: &[Fe]) -> Result<Self> {
        let k = platform.coords_per_scalar(scalar)?;
        let expected = platform.coord_len() * k;
        if v.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: v.len(),
            });
        }
        if k == 1 {
            return Self::from_coords(platform, v.to_vec());
        }
        let f = platform.field();
        let data = v
            .chunks(k)
            .map(|chunk| {
                let c: Vec<u64> = chunk.iter().map(|x| x.raw() as u64).collect();
                f.from_coeffs(&c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coords(platform, data)
    }

    fn field_rows(&self) -> Result<Vec<Vec<Fe>>> {
        self.platform.require_field()?;
        let n = self.platform.n();
        Ok(self.data.chunks(n).map(<[Fe]>::to_vec).collect())
    }

    /// Rank over the base field (field platforms only).
    pub fn rank(&self) -> Result<usize> {
        let rows = self.field_rows()?;
        Ok(linalg::rank(self.platform.field(), &rows))
    }

    /// Basis of `{X : X * self = 0}`, from the linear system in the `n^2`
    /// entries of `X` (field platforms only).
    pub fn left_annihilator(&self) -> Result<Vec<Self>> {
        let f = self.platform.require_field()?;
        let n = self.platform.n();
        // equation (i, j): sum_k X[i][k] * A[k][j] = 0
        let mut system = vec![vec![Fe::ZERO; n * n]; n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    system[i * n + j][i * n + k] = self.data[k * n + j];
                }
            }
        }
        let sol = linalg::solve_with_cols(f, &system, &vec![Fe::ZERO; n * n], n * n)?
            .expect("homogeneous systems are consistent");
        Ok(sol
            .nullspace
            .into_iter()
            .map(|data| PlatformElement {
                platform: self.platform.clone(),
                data,
            })
            .collect())
    }

    pub fn random<R: Rng + ?Sized>(platform: &Platform, rng: &mut R) -> Self {
        let f = platform.field();
        PlatformElement {
            platform: platform.clone(),
            data: (0..platform.coord_len()).map(|_| f.random(rng)).collect(),
        }
    }
}

impl Add for &PlatformElement {
    type Output = PlatformElement;

    /// Panics on mismatched platforms; see [`PlatformElement::checked_add`].
    fn add(self, rhs: Self) -> PlatformElement {
        self.checked_add(rhs).expect("platform mismatch")
    }
}

impl Sub for &PlatformElement {
    type Output = PlatformElement;

    fn sub(self, rhs: Self) -> PlatformElement {
        self.checked_sub(rhs).expect("platform mismatch")
    }
}

impl Mul for &PlatformElement {
    type Output = PlatformElement;

    fn mul(self, rhs: Self) -> PlatformElement {
        self.checked_mul(rhs).expect("platform mismatch")
    }
}

impl Neg for &PlatformElement {
    type Output = PlatformElement;

    fn neg(self) -> PlatformElement {
        let f = self.platform.field();
        PlatformElement {
            platform: self.platform.clone(),
            data: self.data.iter().map(|&x| f.neg(x)).collect(),
        }
    }
}

/// Which kind of public instance to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Invertible `H` for an inner automorphism; arbitrary `M`.
    Inner,
    /// Invertible `H` for the entry-power-then-conjugate endomorphism.
    Composite,
    /// Invertible `H` and singular `M` with `HM != 0`.
    Masked,
}

/// Public platform data of one instance: `H`, its inverse and the base element `M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub h: PlatformElement,
    pub h_inv: PlatformElement,
    pub m: PlatformElement,
}

/// Deterministic instance sampling. Over a field, `H` is rejection-sampled
/// until invertible. Over a group algebra `H` is a product of elementary
/// and monomial matrices, so its inverse comes from the construction.
pub fn sample_instance<R: Rng + ?Sized>(
    platform: &Platform,
    variant: Variant,
    rng: &mut R,
) -> Result<Instance> {
    match platform.base() {
        BaseRing::Field(_) => sample_field_instance(platform, variant, rng),
        BaseRing::GroupAlgebra { field, table } => {
            if variant != Variant::Inner {
                return Err(invalid(
                    "group-algebra platforms only support the inner variant",
                ));
            }
            let (h, h_inv) = sample_group_algebra_unit(platform, field, table, rng);
            let m = PlatformElement::random(platform, rng);
            Ok(Instance { h, h_inv, m })
        }
    }
}

fn sample_field_instance<R: Rng + ?Sized>(
    platform: &Platform,
    variant: Variant,
    rng: &mut R,
) -> Result<Instance> {
    let n = platform.n();
    if variant == Variant::Masked && n < 2 {
        return Err(invalid("masked instances need n >= 2"));
    }
    let f = platform.field().clone();
    let (h, h_inv) = loop {
        let h = PlatformElement::random(platform, rng);
        if let Ok(inv) = h.inverse() {
            break (h, inv);
        }
    };
    let m = match variant {
        Variant::Inner | Variant::Composite => PlatformElement::random(platform, rng),
        Variant::Masked => loop {
            // last row is a random combination of the others, so rank < n
            let mut m = PlatformElement::random(platform, rng);
            let weights: Vec<Fe> = (0..n - 1).map(|_| f.random(rng)).collect();
            for j in 0..n {
                let v = (0..n - 1).fold(Fe::ZERO, |acc, i| {
                    f.mul_add(acc, weights[i], m.data[i * n + j])
                });
                m.data[(n - 1) * n + j] = v;
            }
            if !(&h * &m).is_zero() {
                break m;
            }
        },
    };
    Ok(Instance { h, h_inv, m })
}

fn sample_group_algebra_unit<R: Rng + ?Sized>(
    platform: &Platform,
    field: &Field,
    table: &GroupTable,
    rng: &mut R,
) -> (PlatformElement, PlatformElement) {
    let n = platform.n();
    let r = table.order();
    let mut h = PlatformElement::identity(platform);
    let mut h_inv = PlatformElement::identity(platform);

    // monomial factor: permutation matrix times diag(lambda_i * g_i)
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut mono = PlatformElement::zero(platform);
    let mut mono_inv = PlatformElement::zero(platform);
    for i in 0..n {
        let j = perm[i];
        let lambda = field.random_nonzero(rng);
        let g = rng.gen_range(0..r);
        // mono[i][j] = lambda*g, so mono_inv[j][i] = lambda^-1 * g^-1
        mono.data[(i * n + j) * r + g] = lambda;
        mono_inv.data[(j * n + i) * r + table.inverse(g)] = field.inv(lambda).expect("nonzero");
    }
    h = &h * &mono;
    h_inv = &mono_inv * &h_inv;

    // elementary factors I + c E_ij with i != j; inverse I - c E_ij
    if n > 1 {
        for _ in 0..2 * n * n {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut e = PlatformElement::identity(platform);
            let mut e_inv = PlatformElement::identity(platform);
            for g in 0..r {
                let c = field.random(rng);
                e.data[(i * n + j) * r + g] = c;
                e_inv.data[(i * n + j) * r + g] = field.neg(c);
            }
            h = &h * &e;
            h_inv = &e_inv * &h_inv;
        }
    }
    debug_assert!((&h * &h_inv) == PlatformElement::identity(platform));
    (h, h_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m2_gf7() -> Platform {
        Platform::matrices(Field::prime(7).unwrap(), 2).unwrap()
    }

    fn mat(p: &Platform, rows: &[&[u64]]) -> PlatformElement {
        PlatformElement::from_ints(p, rows).unwrap()
    }

    #[test]
    fn mat_mul_examples() {
        let p = m2_gf7();
        let a = mat(&p, &[&[1, 2], &[3, 4]]);
        let b = mat(&p, &[&[5, 6], &[0, 1]]);
        assert_eq!(&a * &b, mat(&p, &[&[5, 1], &[1, 1]]));
        assert_eq!(&a * &PlatformElement::identity(&p), a);
        assert!((&a * &PlatformElement::zero(&p)).is_zero());
        let other = Platform::matrices(Field::prime(5).unwrap(), 2).unwrap();
        assert_eq!(
            a.checked_mul(&PlatformElement::identity(&other)),
            Err(Error::SpecMismatch("platforms"))
        );
    }

    #[test]
    fn inverse_examples() {
        let p = m2_gf7();
        let id = PlatformElement::identity(&p);
        assert_eq!(id.inverse().unwrap(), id);
        let u = mat(&p, &[&[1, 1], &[0, 1]]);
        assert_eq!(u.inverse().unwrap(), mat(&p, &[&[1, 6], &[0, 1]]));
        assert_eq!(mat(&p, &[&[1, 0], &[1, 0]]).inverse(), Err(Error::Singular));
    }

    #[test]
    fn flatten_examples() {
        let p = m2_gf7();
        let f7 = Field::prime(7).unwrap();
        let a = mat(&p, &[&[1, 2], &[3, 4]]);
        let flat: Vec<u128> = a.flatten(&f7).unwrap().iter().map(|x| x.raw()).collect();
        assert_eq!(flat, vec![1, 2, 3, 4]);

        let gf4 = Field::with_modulus(2, Poly::new(2, vec![1, 1, 1])).unwrap();
        let q = Platform::matrices(gf4.clone(), 2).unwrap();
        let x = gf4.from_coeffs(&[0, 1]).unwrap();
        let e = PlatformElement::from_entries(&q, vec![x, Fe::ZERO, Fe::ZERO, Fe::ZERO]).unwrap();
        let gf2 = gf4.prime_subfield();
        let flat: Vec<u128> = e.flatten(&gf2).unwrap().iter().map(|x| x.raw()).collect();
        assert_eq!(flat, vec![0, 1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(
            PlatformElement::unflatten(&q, &gf2, &e.flatten(&gf2).unwrap()).unwrap(),
            e
        );
        assert_eq!(PlatformElement::zero(&q).flatten(&gf2).unwrap().len(), 8);
        assert!(e.flatten(&Field::prime(7).unwrap()).is_err());
    }

    #[test]
    fn annihilator_examples() {
        let p = m2_gf7();
        let a = mat(&p, &[&[1, 2], &[2, 4]]);
        let basis = a.left_annihilator().unwrap();
        assert_eq!(
            basis,
            vec![mat(&p, &[&[5, 1], &[0, 0]]), mat(&p, &[&[0, 0], &[5, 1]])]
        );
        for b in &basis {
            assert!((b * &a).is_zero());
        }
        assert!(mat(&p, &[&[1, 1], &[0, 1]])
            .left_annihilator()
            .unwrap()
            .is_empty());
        assert_eq!(
            PlatformElement::zero(&p).left_annihilator().unwrap().len(),
            4
        );
    }

    #[test]
    fn group_algebra_inverse_via_regular_representation() {
        let f = Field::prime(7).unwrap();
        let p = Platform::group_algebra_matrices(f, Arc::new(GroupTable::cyclic(3).unwrap()), 2)
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = sample_instance(&p, Variant::Inner, &mut rng).unwrap();
        assert_eq!(&inst.h * &inst.h_inv, PlatformElement::identity(&p));
        assert_eq!(&inst.h_inv * &inst.h, PlatformElement::identity(&p));
        assert_eq!(inst.h.inverse().unwrap(), inst.h_inv);
        assert_eq!(PlatformElement::zero(&p).inverse(), Err(Error::Singular));
    }

    #[test]
    fn sampling_is_deterministic_and_well_formed() {
        let p = Platform::matrices(Field::gf2_127().unwrap(), 2).unwrap();
        for variant in [Variant::Inner, Variant::Composite, Variant::Masked] {
            let a = sample_instance(&p, variant, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            let b = sample_instance(&p, variant, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
            assert_eq!(a, b);
            assert!(a.h.inverse().is_ok());
            if variant == Variant::Masked {
                let hm = &a.h * &a.m;
                assert_eq!(hm.inverse(), Err(Error::Singular));
                assert!(!hm.is_zero());
            }
        }
    }
}
