//! Finite permutation groups given by Cayley tables, and their group algebras.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::field::{Fe, Field};

/// A finite group of permutations with a precomputed multiplication table.
///
/// Products compose as functions: `(u * v)(i) = u(v(i))`, so `v` acts first.
#[derive(PartialEq, Eq)]
pub struct GroupTable {
    name: String,
    elements: Vec<Vec<usize>>,
    cayley: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupTable({}, order {})", self.name, self.order())
    }
}

fn compose(u: &[usize], v: &[usize]) -> Vec<usize> {
    v.iter().map(|&i| u[i]).collect()
}

fn is_even(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut transpositions = 0;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 0
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    // lexicographic order of one-line notation
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

impl GroupTable {
    /// Builds the table of a set of permutations, which must be closed under
    /// composition and contain the identity.
    pub fn from_permutations(name: &str, elements: Vec<Vec<usize>>) -> Result<Self> {
        let degree = elements.first().map_or(0, Vec::len);
        if elements.is_empty() || elements.iter().any(|e| e.len() != degree) {
            return Err(invalid("permutations must be nonempty and of equal degree"));
        }
        let index: HashMap<&[usize], usize> = elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i))
            .collect();
        if index.len() != elements.len() {
            return Err(invalid("duplicate permutations"));
        }
        let id: Vec<usize> = (0..degree).collect();
        let identity = *index
            .get(id.as_slice())
            .ok_or_else(|| invalid("identity missing"))?;
        let mut cayley = vec![vec![0; elements.len()]; elements.len()];
        for (i, u) in elements.iter().enumerate() {
            for (j, v) in elements.iter().enumerate() {
                let uv = compose(u, v);
                cayley[i][j] = *index
                    .get(uv.as_slice())
                    .ok_or_else(|| invalid("permutations not closed under composition"))?;
            }
        }
        let inverse = (0..elements.len())
            .map(|i| {
                (0..elements.len())
                    .find(|&j| cayley[i][j] == identity)
                    .ok_or_else(|| invalid("element without inverse"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupTable {
            name: name.to_string(),
            elements,
            cayley,
            inverse,
            identity,
        })
    }

    /// The alternating group on 5 points: the 60 even permutations of
    /// `{0..4}` in lexicographic one-line order.
    pub fn a5() -> Self {
        let evens = all_permutations(5)
            .into_iter()
            .filter(|p| is_even(p))
            .collect();
        Self::from_permutations("A5", evens).expect("A5 is a group")
    }

    /// The cyclic group of order `n` as rotations of `n` points.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("cyclic group order must be positive"));
        }
        let elements = (0..n)
            .map(|s| (0..n).map(|i| (i + s) % n).collect())
            .collect();
        Self::from_permutations(&format!("C{n}"), elements)
    }

    /// Looks a group up by the name used in transcript files (`A5`, `C<n>`).
    pub fn by_name(name: &str) -> Result<Self> {
        if name == "A5" {
            return Ok(Self::a5());
        }
        name.strip_prefix('C')
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| (1..=1024).contains(&n))
            .map(Self::cyclic)
            .unwrap_or_else(|| Err(invalid(format!("unknown group {name:?}"))))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, u: usize, v: usize) -> usize {
        self.cayley[u][v]
    }

    pub fn inverse(&self, u: usize) -> usize {
        self.inverse[u]
    }

    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }
}

/// Sum of convolution products `a * b` over `pairs`, accumulated into `out`.
pub(crate) fn ga_dot(table: &GroupTable, field: &Field, pairs: &[(&[Fe], &[Fe])], out: &mut [Fe]) {
    if field.is_prime_field() {
        // products of residues below 2^16 fit 32 bits; reduce per pair so
        // the u64 accumulators never overflow
        let p = field.characteristic();
        let lazy = p < 1 << 16;
        let mut acc: Vec<u64> = out.iter().map(|x| x.raw() as u64).collect();
        let mut bs = Vec::with_capacity(out.len());
        for (a, b) in pairs {
            bs.clear();
            bs.extend(
                b.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(v, x)| (v, x.raw() as u64)),
            );
            for (u, au) in a.iter().enumerate() {
                if au.is_zero() {
                    continue;
                }
                let au = au.raw() as u64;
                let row = &table.cayley[u];
                for &(v, bv) in &bs {
                    let w = row[v];
                    acc[w] += au * bv;
                    if !lazy {
                        acc[w] %= p;
                    }
                }
            }
            if lazy {
                acc.iter_mut().for_each(|x| *x %= p);
            }
        }
        for (o, x) in out.iter_mut().zip(acc) {
            *o = field.from_int(x);
        }
    } else {
        for (a, b) in pairs {
            for (u, &au) in a.iter().enumerate() {
                if au.is_zero() {
                    continue;
                }
                let row = &table.cayley[u];
                for (v, &bv) in b.iter().enumerate() {
                    if !bv.is_zero() {
                        let w = row[v];
                        out[w] = field.mul_add(out[w], au, bv);
                    }
                }
            }
        }
    }
}

/// Element of the group algebra `F[G]`: coefficient of group element `i` at position `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupAlgebraElement {
    table: Arc<GroupTable>,
    field: Field,
    coeffs: Vec<Fe>,
}

impl fmt::Debug for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*g{i}", self.field.encode(*c)))
            .collect();
        write!(
            f,
            "{}",
            if terms.is_empty() {
                "0".into()
            } else {
                terms.join(" + ")
            }
        )
    }
}

impl GroupAlgebraElement {
    pub fn new(table: Arc<GroupTable>, field: Field, coeffs: Vec<Fe>) -> Result<Self> {
        if coeffs.len() != table.order() {
            return Err(Error::Dimension {
                expected: table.order(),
                got: coeffs.len(),
            });
        }
        Ok(GroupAlgebraElement {
            table,
            field,
            coeffs,
        })
    }

    pub fn zero(table: Arc<GroupTable>, field: Field) -> Self {
        let coeffs = vec![Fe::ZERO; table.order()];
        GroupAlgebraElement {
            table,
            field,
            coeffs,
        }
    }

    /// The basis element `1 * g_index`.
    pub fn basis(table: Arc<GroupTable>, field: Field, index: usize) -> Self {
        let mut e = Self::zero(table, field);
        e.coeffs[index] = Fe::ONE;
        e
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn table(&self) -> &Arc<GroupTable> {
        &self.table
    }

    fn check(&self, other: &Self) -> Result<()> {
        if *self.table != *other.table || self.field != other.field {
            return Err(Error::SpecMismatch("group algebras"));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| self.field.add(a, b))
            .collect();
        Ok(GroupAlgebraElement {
            coeffs,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| self.field.sub(a, b))
            .collect();
        Ok(GroupAlgebraElement {
            coeffs,
            ..self.clone()
        })
    }

    /// Convolution: the coefficient of `w` is the sum of `a_u * b_v` over `u*v = w`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut coeffs = vec![Fe::ZERO; self.table.order()];
        ga_dot(
            &self.table,
            &self.field,
            &[(&self.coeffs, &other.coeffs)],
            &mut coeffs,
        );
        Ok(GroupAlgebraElement {
            coeffs,
            ..self.clone()
        })
    }
}
