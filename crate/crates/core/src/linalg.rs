//! Exact linear algebra over the integers.
//!
//! Everything here is fraction-free: matrices hold [`BigInt`] entries and no
//! operation ever rounds. The module provides
//!
//! - [`IntMat`], a dense row-major integer matrix,
//! - [`snf`], the Smith normal form `U * A * V = D` with unimodular
//!   transforms and the divisibility chain `d1 | d2 | ...`,
//! - [`det`], a Bareiss fraction-free determinant (sign included),
//! - [`kernel_basis`], a basis of the *saturated* kernel lattice
//!   `{ x : A x = 0 }`,
//! - [`quotient`], the isomorphism type of `Z^n / (column span)` as a
//!   [`FinAbGroup`],
//! - [`solve_right`], exact solution of `A X = B` over the integers.
//!
//! Empty matrices (0 rows or 0 columns) are legal everywhere and behave as
//! rank-0 objects.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMat { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = BigInt::one();
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        IntMat { rows, cols, entries }
    }

    /// Builder for literals in tests and fixtures.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row.iter().map(|&x| BigInt::from(x)));
        }
        IntMat { rows: r, cols: c, entries }
    }

    /// Column vector from integer literals.
    pub fn col_from_i64(v: &[i64]) -> Self {
        IntMat {
            rows: v.len(),
            cols: 1,
            entries: v.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn diag_from_i64(d: &[i64]) -> Self {
        let mut m = IntMat::zero(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            *m.at_mut(i, i) = BigInt::from(x);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }

    pub fn set_i64(&mut self, i: usize, j: usize, v: i64) {
        *self.at_mut(i, j) = BigInt::from(v);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j { self.at(i, j).is_one() } else { self.at(i, j).is_zero() }
                })
            })
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, rhs: &IntMat) -> IntMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = IntMat::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if !b.is_zero() {
                        *out.at_mut(i, j) += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b)
            .collect();
        IntMat { rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, rhs: &IntMat) -> IntMat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a - b)
            .collect();
        IntMat { rows: self.rows, cols: self.cols, entries }
    }

    pub fn neg(&self) -> IntMat {
        let entries = self.entries.iter().map(|a| -a).collect();
        IntMat { rows: self.rows, cols: self.cols, entries }
    }

    pub fn scale(&self, c: &BigInt) -> IntMat {
        let entries = self.entries.iter().map(|a| a * c).collect();
        IntMat { rows: self.rows, cols: self.cols, entries }
    }

    /// Column `j` as an n-by-1 matrix.
    pub fn col(&self, j: usize) -> IntMat {
        let mut v = IntMat::zero(self.rows, 1);
        for i in 0..self.rows {
            *v.at_mut(i, 0) = self.at(i, j).clone();
        }
        v
    }

    /// Stack `self` on top of `other` (same column count).
    pub fn vstack(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        IntMat { rows: self.rows + other.rows, cols: self.cols, entries }
    }

    /// Place `self` left of `other` (same row count).
    pub fn hstack(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.rows, other.rows);
        let mut out = IntMat::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(i, j) = self.at(i, j).clone();
            }
            for j in 0..other.cols {
                *out.at_mut(i, self.cols + j) = other.at(i, j).clone();
            }
        }
        out
    }

    /// Matrix with the listed columns of `self`, in the given order.
    pub fn select_cols(&self, js: &[usize]) -> IntMat {
        let mut out = IntMat::zero(self.rows, js.len());
        for (k, &j) in js.iter().enumerate() {
            for i in 0..self.rows {
                *out.at_mut(i, k) = self.at(i, j).clone();
            }
        }
        out
    }

    /// Block-diagonal sum of `self` and `other`.
    pub fn direct_sum(&self, other: &IntMat) -> IntMat {
        let mut out = IntMat::zero(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(i, j) = self.at(i, j).clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                *out.at_mut(self.rows + i, self.cols + j) = other.at(i, j).clone();
            }
        }
        out
    }

    /// Kronecker product; block `(i,j)` is `self[i][j] * other`.
    pub fn kronecker(&self, other: &IntMat) -> IntMat {
        let mut out = IntMat::zero(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.at(i, j);
                if a.is_zero() {
                    continue;
                }
                for p in 0..other.rows {
                    for q in 0..other.cols {
                        *out.at_mut(i * other.rows + p, j * other.cols + q) = a * other.at(p, q);
                    }
                }
            }
        }
        out
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row_i -= q * row_k
    fn row_sub_mul(&mut self, i: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let t = q * self.at(k, j);
            *self.at_mut(i, j) -= t;
        }
    }

    /// col_j -= q * col_k
    fn col_sub_mul(&mut self, j: usize, k: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let t = q * self.at(i, k);
            *self.at_mut(i, j) -= t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.at(i, j).clone();
            *self.at_mut(i, j) = v;
        }
    }

    /// Deterministic byte encoding; equal matrices encode identically.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.entries.len() * 4);
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for e in &self.entries {
            let bytes = e.to_signed_bytes_le();
            out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        out
    }

    pub fn from_canonical_bytes(buf: &[u8]) -> Self {
        let rows = u32::from_le_bytes(buf[0..4].try_into().unwrap()) as usize;
        let cols = u32::from_le_bytes(buf[4..8].try_into().unwrap()) as usize;
        let mut entries = Vec::with_capacity(rows * cols);
        let mut pos = 8;
        for _ in 0..rows * cols {
            let len = u32::from_le_bytes(buf[pos..pos + 4].try_into().unwrap()) as usize;
            pos += 4;
            entries.push(BigInt::from_signed_bytes_le(&buf[pos..pos + len]));
            pos += len;
        }
        IntMat { rows, cols, entries }
    }
}

impl fmt::Debug for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.at(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Result of [`snf`]: `u * a * v = d` with `u`, `v` unimodular and `d`
/// diagonal, nonnegative, `d1 | d2 | ...`, zeros last.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
}

impl SmithForm {
    /// Diagonal of `d`, length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.at(i, i).clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Nearest-integer division (ties toward zero), so `|a - q*b| <= |b|/2`.
fn div_nearest(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut q, r) = a.div_rem(b);
    // |r| <= |b|/2 already? truncated division leaves |r| < |b|;
    // shift q by one when the remainder is more than half of |b|.
    let two_r = BigInt::from(2) * r.abs();
    if two_r > b.abs() {
        if (a.sign() == b.sign()) || a.is_zero() {
            q += 1;
        } else {
            q -= 1;
        }
    }
    q
}

/// Position of the nonzero entry of minimal absolute value in the trailing
/// submatrix `a[k.., k..]`, ties broken by lowest `(row, col)`.
fn min_abs_pivot(a: &IntMat, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in k..a.rows() {
        for j in k..a.cols() {
            let v = a.at(i, j);
            if v.is_zero() {
                continue;
            }
            let m = v.abs();
            match &best {
                Some((bm, _, _)) if *bm <= m => {}
                _ => best = Some((m, i, j)),
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Smith normal form with both unimodular transforms.
///
/// Pivoting is deterministic: at every step the nonzero entry of minimal
/// absolute value is chosen, ties broken by lowest `(row, col)`.
pub fn snf(a: &IntMat) -> SmithForm {
    let m = a.rows();
    let n = a.cols();
    let mut d = a.clone();
    let mut u = IntMat::identity(m);
    let mut v = IntMat::identity(n);

    let mut k = 0;
    while k < m.min(n) {
        let Some((pi, pj)) = min_abs_pivot(&d, k) else { break };
        d.swap_rows(k, pi);
        u.swap_rows(k, pi);
        d.swap_cols(k, pj);
        v.swap_cols(k, pj);

        loop {
            let mut disturbed = false;
            // clear column k below the pivot
            for i in k + 1..m {
                if !d.at(i, k).is_zero() {
                    let q = div_nearest(d.at(i, k), d.at(k, k));
                    d.row_sub_mul(i, k, &q);
                    u.row_sub_mul(i, k, &q);
                    if !d.at(i, k).is_zero() {
                        disturbed = true;
                    }
                }
            }
            // clear row k right of the pivot
            for j in k + 1..n {
                if !d.at(k, j).is_zero() {
                    let q = div_nearest(d.at(k, j), d.at(k, k));
                    d.col_sub_mul(j, k, &q);
                    v.col_sub_mul(j, k, &q);
                    if !d.at(k, j).is_zero() {
                        disturbed = true;
                    }
                }
            }
            if disturbed {
                // a remainder smaller than the pivot appeared; re-pivot
                let (pi, pj) = min_abs_pivot(&d, k).expect("nonzero remainder present");
                d.swap_rows(k, pi);
                u.swap_rows(k, pi);
                d.swap_cols(k, pj);
                v.swap_cols(k, pj);
                continue;
            }
            // row and column are clear; enforce the divisibility chain by
            // absorbing any entry the pivot does not divide
            let pivot = d.at(k, k).clone();
            let mut absorbed = false;
            'scan: for i in k + 1..m {
                for j in k + 1..n {
                    if !(d.at(i, j) % &pivot).is_zero() {
                        // row k gains the offending row; col k stays clear
                        for col in 0..n {
                            let t = d.at(i, col).clone();
                            *d.at_mut(k, col) += t;
                        }
                        for col in 0..m {
                            let t = u.at(i, col).clone();
                            *u.at_mut(k, col) += t;
                        }
                        absorbed = true;
                        break 'scan;
                    }
                }
            }
            if !absorbed {
                break;
            }
        }
        if d.at(k, k).is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
        k += 1;
    }
    SmithForm { u, d, v }
}

/// Determinant by the Bareiss fraction-free algorithm; exact sign.
pub fn det(a: &IntMat) -> Result<BigInt> {
    if !a.is_square() {
        return Err(Error::NonSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut w = a.clone();
    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if w.at(k, k).is_zero() {
            let Some(i) = (k + 1..n).find(|&i| !w.at(i, k).is_zero()) else {
                return Ok(BigInt::zero());
            };
            w.swap_rows(k, i);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = w.at(i, j) * w.at(k, k) - w.at(i, k) * w.at(k, j);
                let (q, r) = t.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                *w.at_mut(i, j) = q;
            }
        }
        for i in k + 1..n {
            *w.at_mut(i, k) = BigInt::zero();
        }
        prev = w.at(k, k).clone();
    }
    let d = w.at(n - 1, n - 1).clone();
    Ok(if sign < 0 { -d } else { d })
}

/// Row echelon reduction over the integers.
///
/// Returns a matrix with the same kernel as `a` and at most `a.cols()`
/// nonzero rows (zero rows dropped). Used to shrink tall constraint systems
/// before a Smith computation.
pub fn row_echelon(a: &IntMat) -> IntMat {
    let mut w = a.clone();
    let m = w.rows();
    let n = w.cols();
    let mut r = 0;
    for j in 0..n {
        if r == m {
            break;
        }
        loop {
            // entry of minimal absolute value in column j at rows >= r
            let mut best: Option<(BigInt, usize)> = None;
            for i in r..m {
                let v = w.at(i, j);
                if v.is_zero() {
                    continue;
                }
                let a = v.abs();
                match &best {
                    Some((bm, _)) if *bm <= a => {}
                    _ => best = Some((a, i)),
                }
            }
            let Some((_, ip)) = best else { break };
            let mut clear = true;
            for i in r..m {
                if i == ip || w.at(i, j).is_zero() {
                    continue;
                }
                let q = div_nearest(w.at(i, j), w.at(ip, j));
                w.row_sub_mul(i, ip, &q);
                if !w.at(i, j).is_zero() {
                    clear = false;
                }
            }
            if clear {
                w.swap_rows(r, ip);
                r += 1;
                break;
            }
        }
    }
    let mut out = IntMat::zero(r, n);
    for i in 0..r {
        for j in 0..n {
            *out.at_mut(i, j) = w.at(i, j).clone();
        }
    }
    out
}

/// Incrementally row-reduces a tall stack of constraint blocks without ever
/// materialising the full matrix. `finish` yields an echelon matrix with the
/// same kernel as the virtual stack of everything pushed.
pub struct EchelonAccumulator {
    cols: usize,
    acc: IntMat,
}

impl EchelonAccumulator {
    pub fn new(cols: usize) -> Self {
        EchelonAccumulator { cols, acc: IntMat::zero(0, cols) }
    }

    pub fn push(&mut self, block: &IntMat) {
        assert_eq!(block.cols(), self.cols);
        if block.is_zero() {
            return;
        }
        self.acc = row_echelon(&self.acc.vstack(block));
    }

    pub fn finish(self) -> IntMat {
        self.acc
    }
}

/// Basis of the saturated kernel lattice `{ x in Z^n : A x = 0 }`,
/// returned as the columns of an `n x k` matrix.
///
/// The basis is primitive: it extends to a basis of `Z^n`, so the kernel it
/// spans is saturated (no vector outside the span has a multiple inside).
pub fn kernel_basis(a: &IntMat) -> IntMat {
    let n = a.cols();
    // row reduction keeps the kernel and makes the Smith step cheap for
    // tall constraint matrices
    let reduced = row_echelon(a);
    let sf = snf(&reduced);
    let rank = sf.rank();
    let keep: Vec<usize> = (rank..n).collect();
    sf.v.select_cols(&keep)
}

/// Finitely generated abelian group `Z/d1 x ... x Z/dk x Z^f`
/// with `d1 | d2 | ... | dk`, every `di >= 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinAbGroup {
    invariant_factors: Vec<BigInt>,
    free_rank: usize,
}

impl FinAbGroup {
    pub fn new(mut invariant_factors: Vec<BigInt>, free_rank: usize) -> Self {
        invariant_factors.retain(|d| !d.is_one());
        assert!(
            invariant_factors.iter().all(|d| *d >= BigInt::from(2)),
            "invariant factors must be >= 2"
        );
        for w in invariant_factors.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "divisibility chain violated");
        }
        FinAbGroup { invariant_factors, free_rank }
    }

    pub fn trivial() -> Self {
        FinAbGroup { invariant_factors: vec![], free_rank: 0 }
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn is_trivial(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    /// Order of the torsion part (`None` when the group is infinite).
    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.torsion_order())
    }

    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    /// True when no invariant factor is divisible by `p`.
    pub fn p_part_is_trivial(&self, p: u64) -> bool {
        let p = BigInt::from(p);
        self.invariant_factors.iter().all(|d| !(d % &p).is_zero())
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> =
            self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        write!(f, "{}", parts.join(" x "))
    }
}

/// Isomorphism type of `Z^ambient_rank / (column span of sub)`.
///
/// `sub` must have `ambient_rank` rows; its columns need not be independent.
pub fn quotient(ambient_rank: usize, sub: &IntMat) -> Result<FinAbGroup> {
    if sub.rows() != ambient_rank {
        return Err(Error::DimensionMismatch(format!(
            "subgroup matrix has {} rows, ambient rank is {}",
            sub.rows(),
            ambient_rank
        )));
    }
    let sf = snf(sub);
    let diag = sf.diagonal();
    let rank = diag.iter().filter(|d| !d.is_zero()).count();
    let factors: Vec<BigInt> = diag.into_iter().filter(|d| !d.is_zero() && !d.is_one()).collect();
    Ok(FinAbGroup::new(factors, ambient_rank - rank))
}

/// Exact solution `X` of `A X = B` over the integers, if one exists.
pub fn solve_right(a: &IntMat, b: &IntMat) -> Option<IntMat> {
    assert_eq!(a.rows(), b.rows(), "row counts must agree");
    let sf = snf(a);
    let rank = sf.rank();
    // A = U^-1 D V^-1, so A X = B  <=>  D (V^-1 X) = U B
    let ub = sf.u.mul(b);
    let mut y = IntMat::zero(a.cols(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let rhs = ub.at(i, j);
            if i < rank {
                let (q, r) = rhs.div_rem(sf.d.at(i, i));
                if !r.is_zero() {
                    return None;
                }
                *y.at_mut(i, j) = q;
            } else if !rhs.is_zero() {
                return None;
            }
        }
    }
    Some(sf.v.mul(&y))
}

/// True when `v` lies in the column span of `basis` (over the integers).
pub fn in_span(basis: &IntMat, v: &IntMat) -> bool {
    solve_right(basis, v).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_snf_contract(a: &IntMat) {
        let sf = snf(a);
        // U A V = D
        assert_eq!(sf.u.mul(a).mul(&sf.v), sf.d, "U*A*V != D for {a:?}");
        // unimodular transforms
        assert!(det(&sf.u).unwrap().abs().is_one());
        assert!(det(&sf.v).unwrap().abs().is_one());
        // diagonal, nonnegative, divisibility chain, zeros last
        let diag = sf.diagonal();
        for i in 0..sf.d.rows() {
            for j in 0..sf.d.cols() {
                if i != j {
                    assert!(sf.d.at(i, j).is_zero(), "off-diagonal entry in D");
                }
            }
        }
        for d in &diag {
            assert!(!d.is_negative());
        }
        for w in diag.windows(2) {
            if w[0].is_zero() {
                assert!(w[1].is_zero(), "zeros must come last");
            } else {
                assert!((&w[1] % &w[0]).is_zero(), "divisibility chain violated");
            }
        }
    }

    /// Independent Smith oracle: d_k = gcd(k x k minors) / gcd((k-1) minors).
    fn minors_gcd_diagonal(a: &IntMat) -> Vec<BigInt> {
        fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            let mut idx: Vec<usize> = (0..k).collect();
            if k > n {
                return out;
            }
            loop {
                out.push(idx.clone());
                let mut i = k;
                loop {
                    if i == 0 {
                        return out;
                    }
                    i -= 1;
                    if idx[i] != i + n - k {
                        break;
                    }
                }
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        let m = a.rows().min(a.cols());
        let mut prev = BigInt::one();
        let mut out = Vec::new();
        for k in 1..=m {
            let mut g = BigInt::zero();
            for rows in combinations(a.rows(), k) {
                for cols in combinations(a.cols(), k) {
                    let mut sub = IntMat::zero(k, k);
                    for (i, &r) in rows.iter().enumerate() {
                        for (j, &c) in cols.iter().enumerate() {
                            *sub.at_mut(i, j) = a.at(r, c).clone();
                        }
                    }
                    g = g.gcd(&det(&sub).unwrap());
                }
            }
            if g.is_zero() {
                out.push(BigInt::zero());
            } else {
                out.push(&g / &prev);
                prev = g;
            }
        }
        out
    }

    fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMat {
        let mut m = IntMat::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set_i64(i, j, rng.gen_range(-bound..=bound));
            }
        }
        m
    }

    /// Random unimodular matrix: a product of elementary row operations.
    pub(crate) fn rand_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntMat {
        let mut m = IntMat::identity(n);
        if n < 2 {
            return m;
        }
        for _ in 0..2 * n {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            match rng.gen_range(0..3) {
                0 => {
                    let q = BigInt::from(rng.gen_range(-2i64..=2));
                    m.row_sub_mul(i, j, &q);
                }
                1 => m.swap_rows(i, j),
                _ => m.negate_row(i),
            }
        }
        m
    }

    #[test]
    fn snf_identity() {
        let a = IntMat::identity(4);
        let sf = snf(&a);
        assert_eq!(sf.d, IntMat::identity(4));
        check_snf_contract(&a);
    }

    #[test]
    fn snf_diag_2_3_gives_1_6() {
        let a = IntMat::diag_from_i64(&[2, 3]);
        let sf = snf(&a);
        assert_eq!(sf.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
        check_snf_contract(&a);
    }

    #[test]
    fn snf_rank_deficient() {
        let a = IntMat::from_i64_rows(&[&[4, 6], &[6, 9]]);
        let sf = snf(&a);
        assert_eq!(sf.diagonal(), vec![BigInt::from(1), BigInt::zero()]);
        check_snf_contract(&a);
    }

    #[test]
    fn snf_empty_matrices() {
        for (r, c) in [(0, 0), (0, 3), (3, 0)] {
            let a = IntMat::zero(r, c);
            let sf = snf(&a);
            assert_eq!(sf.d.rows(), r);
            assert_eq!(sf.d.cols(), c);
            assert_eq!(sf.rank(), 0);
            check_snf_contract(&a);
        }
    }

    #[test]
    fn snf_matches_minors_oracle_randomised() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let rows = rng.gen_range(0..=4);
            let cols = rng.gen_range(0..=4);
            let a = rand_mat(&mut rng, rows, cols, 9);
            check_snf_contract(&a);
            let sf = snf(&a);
            assert_eq!(sf.diagonal(), minors_gcd_diagonal(&a), "oracle mismatch for {a:?}");
        }
    }

    #[test]
    fn det_basic() {
        assert_eq!(det(&IntMat::identity(28)).unwrap(), BigInt::one());
        assert_eq!(det(&IntMat::zero(0, 0)).unwrap(), BigInt::one());
        let a = IntMat::from_i64_rows(&[&[0, 1], &[1, 0]]);
        assert_eq!(det(&a).unwrap(), BigInt::from(-1));
        let b = IntMat::from_i64_rows(&[&[2, 1], &[1, 2]]);
        assert_eq!(det(&b).unwrap(), BigInt::from(3));
        assert!(matches!(det(&IntMat::zero(2, 3)), Err(Error::NonSquare { .. })));
    }

    #[test]
    fn det_multiplicative_randomised() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(0..=5);
            let a = rand_mat(&mut rng, n, n, 6);
            let b = rand_mat(&mut rng, n, n, 6);
            assert_eq!(det(&a.mul(&b)).unwrap(), det(&a).unwrap() * det(&b).unwrap());
        }
    }

    #[test]
    fn det_agrees_with_smith_diagonal_up_to_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let n = rng.gen_range(1..=4);
            let a = rand_mat(&mut rng, n, n, 7);
            let product: BigInt = snf(&a).diagonal().iter().product();
            assert_eq!(det(&a).unwrap().abs(), product.abs());
        }
    }

    #[test]
    fn kernel_examples() {
        // x - y = 0 has saturated kernel spanned by (1, 1)
        let a = IntMat::from_i64_rows(&[&[1, -1]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 1);
        assert!(in_span(&k, &IntMat::col_from_i64(&[1, 1])));
        assert!(in_span(&IntMat::col_from_i64(&[1, 1]), &k));

        // identity has trivial kernel
        assert_eq!(kernel_basis(&IntMat::identity(3)).cols(), 0);

        // 2x + 4y = 0: saturated kernel is (2, -1), not (4, -2)
        let a = IntMat::from_i64_rows(&[&[2, 4]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 1);
        assert!(in_span(&k, &IntMat::col_from_i64(&[2, -1])));
        assert!(in_span(&IntMat::col_from_i64(&[2, -1]), &k));

        // zero map: kernel is everything
        assert_eq!(kernel_basis(&IntMat::zero(0, 4)).cols(), 4);
        assert_eq!(kernel_basis(&IntMat::zero(3, 4)).cols(), 4);
    }

    #[test]
    fn kernel_is_saturated_randomised() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let rows = rng.gen_range(0..=5);
            let cols = rng.gen_range(0..=5);
            let a = rand_mat(&mut rng, rows, cols, 9);
            let k = kernel_basis(&a);
            // A * K = 0
            assert!(a.mul(&k).is_zero());
            // rank of kernel complements rank of A
            assert_eq!(k.cols(), cols - snf(&a).rank());
            // saturation: Z^cols / span(K) is torsion-free, so no vector
            // outside the span has a prime multiple inside it
            let q = quotient(cols, &k).unwrap();
            assert!(q.invariant_factors().is_empty(), "kernel not saturated for {a:?}");
        }
    }

    #[test]
    fn unsaturated_basis_is_detected_by_quotient() {
        // doubling a kernel basis must break the saturation certificate:
        // the negative control for the saturation test above
        let a = IntMat::from_i64_rows(&[&[1, -1]]);
        let k = kernel_basis(&a);
        let doubled = k.scale(&BigInt::from(2));
        let q = quotient(2, &doubled).unwrap();
        assert_eq!(q.invariant_factors(), &[BigInt::from(2)]);
    }

    #[test]
    fn quotient_examples() {
        // Z^2 / <(2,0),(0,3)> = Z/6 (after normalisation to the chain 1 | 6)
        let q = quotient(2, &IntMat::diag_from_i64(&[2, 3])).unwrap();
        assert_eq!(q.invariant_factors(), &[BigInt::from(6)]);
        assert_eq!(q.free_rank(), 0);
        assert_eq!(q.order(), Some(BigInt::from(6)));

        // Z^2 / <(1,0)> = Z
        let sub = IntMat::from_i64_rows(&[&[1], &[0]]);
        let q = quotient(2, &sub).unwrap();
        assert!(q.invariant_factors().is_empty());
        assert_eq!(q.free_rank(), 1);
        assert_eq!(q.order(), None);

        // Z^0 / 0 = 0
        let q = quotient(0, &IntMat::zero(0, 0)).unwrap();
        assert!(q.is_trivial());
        assert_eq!(q.to_string(), "0");

        assert!(quotient(3, &IntMat::zero(2, 1)).is_err());
    }

    #[test]
    fn quotient_invariant_under_column_basis_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..30 {
            let n = rng.gen_range(1..=5);
            let k = rng.gen_range(0..=n);
            let s = rand_mat(&mut rng, n, k, 9);
            let t = rand_unimodular(&mut rng, k);
            assert_eq!(quotient(n, &s).unwrap(), quotient(n, &s.mul(&t)).unwrap());
        }
    }

    #[test]
    fn finab_display() {
        let g = FinAbGroup::new(vec![BigInt::from(2), BigInt::from(6)], 1);
        assert_eq!(g.to_string(), "Z/2 x Z/6 x Z");
        assert_eq!(FinAbGroup::trivial().to_string(), "0");
        let h = FinAbGroup::new(vec![BigInt::one(), BigInt::from(2)], 0);
        assert_eq!(h.to_string(), "Z/2");
        assert!(h.p_part_is_trivial(3));
        assert!(!h.p_part_is_trivial(2));
    }

    #[test]
    fn solve_right_examples() {
        let a = IntMat::from_i64_rows(&[&[2, 0], &[0, 3]]);
        let b = IntMat::col_from_i64(&[4, 9]);
        let x = solve_right(&a, &b).unwrap();
        assert_eq!(a.mul(&x), b);
        // 2x = 3 has no integer solution
        assert!(solve_right(&IntMat::from_i64_rows(&[&[2]]), &IntMat::col_from_i64(&[3])).is_none());
    }

    #[test]
    fn solve_right_randomised() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let m = rng.gen_range(1..=4);
            let n = rng.gen_range(1..=4);
            let a = rand_mat(&mut rng, m, n, 5);
            let x = rand_mat(&mut rng, n, 2, 5);
            let b = a.mul(&x);
            let sol = solve_right(&a, &b).expect("constructed system must be solvable");
            assert_eq!(a.mul(&sol), b);
        }
    }

    #[test]
    fn row_echelon_preserves_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..30 {
            let rows = rng.gen_range(0..=8);
            let cols = rng.gen_range(0..=4);
            let a = rand_mat(&mut rng, rows, cols, 9);
            let e = row_echelon(&a);
            assert!(e.rows() <= cols);
            let ka = kernel_basis(&a);
            let ke = kernel_basis(&e);
            assert_eq!(ka.cols(), ke.cols());
            for j in 0..ka.cols() {
                assert!(in_span(&ke, &ka.col(j)));
            }
        }
    }

    #[test]
    fn echelon_accumulator_matches_direct_stack() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let cols = rng.gen_range(1..=4);
            let mut acc = EchelonAccumulator::new(cols);
            let mut stack = IntMat::zero(0, cols);
            for _ in 0..rng.gen_range(1..=5) {
                let block_rows = rng.gen_range(0..=3);
                let block = rand_mat(&mut rng, block_rows, cols, 7);
                acc.push(&block);
                stack = stack.vstack(&block);
            }
            let ka = kernel_basis(&acc.finish());
            let ks = kernel_basis(&stack);
            assert_eq!(ka.cols(), ks.cols());
            for j in 0..ks.cols() {
                assert!(in_span(&ka, &ks.col(j)));
            }
        }
    }

    #[test]
    fn canonical_bytes_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..20 {
            let (rows, cols) = (rng.gen_range(0..=4), rng.gen_range(0..=4));
            let a = rand_mat(&mut rng, rows, cols, 1_000_000);
            assert_eq!(IntMat::from_canonical_bytes(&a.canonical_bytes()), a);
        }
    }

    #[test]
    fn div_nearest_bounds() {
        for a in -20i64..=20 {
            for b in [-7i64, -3, -2, -1, 1, 2, 3, 7] {
                let q = div_nearest(&BigInt::from(a), &BigInt::from(b));
                let r = BigInt::from(a) - &q * BigInt::from(b);
                assert!(
                    BigInt::from(2) * r.abs() <= BigInt::from(b).abs(),
                    "bad remainder for {a}/{b}: q={q}, r={r}"
                );
            }
        }
    }
}
