//! Exact Gauss elimination over a finite scalar field.
//!
//! [`SpanBasis`] maintains a row-echelon basis of the span of the vectors
//! inserted so far, together with the combination of original vectors that
//! produced every echelon row. That bookkeeping is what lets the attacks
//! express an intercepted value in terms of algebraically meaningful
//! elements rather than in terms of anonymous echelon rows.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

#[derive(Debug, Clone)]
struct EchelonRow {
    pivot: usize,
    /// Normalised so that `vec[pivot] == 1`; zero before `pivot`.
    vec: Vec<Fe>,
    /// `vec = sum combo[i] * originals[i]`; missing trailing entries are zero.
    combo: Vec<Fe>,
}

/// Incremental row-echelon basis with coefficient extraction.
///
/// Only independent vectors are kept as originals, so every coefficient
/// list returned by [`SpanBasis::insert`] or [`SpanBasis::express`] is
/// indexed by insertion order of the accepted vectors.
#[derive(Debug, Clone)]
pub struct SpanBasis<T> {
    field: Field,
    dim: usize,
    /// Sorted by strictly increasing pivot.
    rows: Vec<EchelonRow>,
    originals: Vec<(Vec<Fe>, T)>,
}

/// Outcome of [`SpanBasis::insert`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Insertion {
    Added,
    /// The vector was already in the span, with these coefficients over the originals.
    Dependent(Vec<Fe>),
}

impl Insertion {
    pub fn added(&self) -> bool {
        matches!(self, Insertion::Added)
    }
}

impl<T> SpanBasis<T> {
    pub fn new(field: Field, dim: usize) -> Self {
        SpanBasis {
            field,
            dim,
            rows: Vec::new(),
            originals: Vec::new(),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.originals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.originals.is_empty()
    }

    pub fn originals(&self) -> impl Iterator<Item = (&[Fe], &T)> {
        self.originals.iter().map(|(v, t)| (v.as_slice(), t))
    }

    pub fn tags(&self) -> impl Iterator<Item = &T> {
        self.originals.iter().map(|(_, t)| t)
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }

    fn check_dim(&self, v: &[Fe]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Reduces `v` against the echelon rows. Returns the residual and the
    /// combination of originals that was subtracted from `v`.
    fn reduce(&self, v: &[Fe]) -> (Vec<Fe>, Vec<Fe>) {
        let f = &self.field;
        let mut w = v.to_vec();
        let mut used = vec![Fe::ZERO; self.originals.len()];
        for row in &self.rows {
            let c = w[row.pivot];
            if c.is_zero() {
                continue;
            }
            let nc = f.neg(c);
            for (x, &r) in w[row.pivot..].iter_mut().zip(&row.vec[row.pivot..]) {
                if !r.is_zero() {
                    *x = f.mul_add(*x, nc, r);
                }
            }
            for (u, &r) in used.iter_mut().zip(&row.combo) {
                if !r.is_zero() {
                    *u = f.mul_add(*u, c, r);
                }
            }
        }
        (w, used)
    }

    /// Coefficients over the originals when `v` lies in the span.
    pub fn express(&self, v: &[Fe]) -> Result<Option<Vec<Fe>>> {
        self.check_dim(v)?;
        let (w, used) = self.reduce(v);
        Ok(w.iter().all(|x| x.is_zero()).then_some(used))
    }

    pub fn contains(&self, v: &[Fe]) -> Result<bool> {
        Ok(self.express(v)?.is_some())
    }

    pub fn insert(&mut self, v: Vec<Fe>, tag: T) -> Result<Insertion> {
        self.check_dim(&v)?;
        let (w, used) = self.reduce(&v);
        let Some(pivot) = w.iter().position(|x| !x.is_zero()) else {
            return Ok(Insertion::Dependent(used));
        };
        let f = &self.field;
        let inv = f.inv(w[pivot])?;
        let vec: Vec<Fe> = w.iter().map(|&x| f.mul(x, inv)).collect();
        // echelon row = (v - used . originals) / w[pivot]
        let mut combo: Vec<Fe> = used.iter().map(|&u| f.neg(f.mul(u, inv))).collect();
        combo.push(inv);
        let at = self.rows.partition_point(|r| r.pivot < pivot);
        self.rows.insert(at, EchelonRow { pivot, vec, combo });
        self.originals.push((v, tag));
        Ok(Insertion::Added)
    }

    /// Linear combination `sum c_i * originals[i]`.
    pub fn combine(&self, coeffs: &[Fe]) -> Vec<Fe> {
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.dim];
        for (&c, (v, _)) in coeffs.iter().zip(&self.originals) {
            if c.is_zero() {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(v) {
                *o = f.mul_add(*o, c, x);
            }
        }
        out
    }

    /// Rechecks the echelon invariants: strictly increasing pivots, unit
    /// pivots with zeros before them, and each row equal to its recorded
    /// combination of originals.
    pub fn verify(&self) -> bool {
        let pivots_ok = self.rows.windows(2).all(|w| w[0].pivot < w[1].pivot);
        let rows_ok = self.rows.iter().all(|r| {
            r.vec[r.pivot] == Fe::ONE
                && r.vec[..r.pivot].iter().all(|x| x.is_zero())
                && self.combine(&r.combo) == r.vec
        });
        pivots_ok
            && rows_ok
            && self.rows.len() == self.originals.len()
            && self.rows.len() <= self.dim
    }
}

/// Reduced row echelon form in place; returns pivot columns (ascending).
/// Pivots are the first nonzero entry in column order.
fn rref(field: &Field, m: &mut [Vec<Fe>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(sel) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, sel);
        let inv = field.inv(m[r][c]).expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let k = field.neg(row[c]);
            for (x, &p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x = field.mul_add(*x, k, p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a dense matrix given by rows.
pub fn rank(field: &Field, rows: &[Vec<Fe>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut m = rows.to_vec();
    rref(field, &mut m, cols).len()
}

/// Complete solution set of `A x = rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub particular: Vec<Fe>,
    pub nullspace: Vec<Vec<Fe>>,
}

/// Solves `A x = rhs` by Gauss-Jordan elimination. `None` when inconsistent.
///
/// The nullspace basis has one vector per free column, in ascending column
/// order, with that free variable set to 1 and the other free variables 0.
pub fn solve_linear(field: &Field, a: &[Vec<Fe>], rhs: &[Fe]) -> Result<Option<Solution>> {
    if a.len() != rhs.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: rhs.len(),
        });
    }
    let cols = a.first().map_or(0, Vec::len);
    if let Some(bad) = a.iter().find(|r| r.len() != cols) {
        return Err(Error::Dimension {
            expected: cols,
            got: bad.len(),
        });
    }
    solve_with_cols(field, a, rhs, cols)
}

/// Like [`solve_linear`] but with the column count given explicitly, which
/// matters for systems with no equations.
pub fn solve_with_cols(
    field: &Field,
    a: &[Vec<Fe>],
    rhs: &[Fe],
    cols: usize,
) -> Result<Option<Solution>> {
    let mut m: Vec<Vec<Fe>> = a
        .iter()
        .zip(rhs)
        .map(|(row, &b)| {
            let mut r = row.clone();
            r.push(b);
            r
        })
        .collect();
    let pivots = rref(field, &mut m, cols);
    if m.iter().skip(pivots.len()).any(|row| !row[cols].is_zero()) {
        return Ok(None);
    }
    let mut particular = vec![Fe::ZERO; cols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = m[r][cols];
    }
    let mut is_pivot = vec![false; cols];
    pivots.iter().for_each(|&c| is_pivot[c] = true);
    let nullspace = (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Fe::ZERO; cols];
            v[free] = Fe::ONE;
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = field.neg(m[r][free]);
            }
            v
        })
        .collect();
    Ok(Some(Solution {
        particular,
        nullspace,
    }))
}

/// `A x` for a dense matrix given by rows.
pub fn mat_vec(field: &Field, a: &[Vec<Fe>], x: &[Fe]) -> Vec<Fe> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(Fe::ZERO, |acc, (&r, &v)| field.mul_add(acc, r, v))
        })
        .collect()
}
