//! Picard lattices of del Pezzo surfaces and their Weyl group actions.
//!
//! For a del Pezzo surface of degree `d` (the blow-up of the plane in
//! `r = 9 - d` general points), the Picard lattice is `Z^{r+1}` with basis
//! `l_0` (the pullback of a line) and the exceptional classes
//! `l_1, ..., l_r`, intersection form `diag(1, -1, ..., -1)`, and canonical
//! class `omega = -3 l_0 + l_1 + ... + l_r`, so `omega.omega = d`.
//!
//! The module enumerates:
//!
//! - exceptional classes (`E.E = E.omega = -1`),
//! - roots (`a.a = -2`, `a.omega = 0`) and their reflections
//!   `s_a(x) = x + (x.a) a`,
//! - the Weyl group `W(R_r)` generated by the simple-root reflections
//!   (full enumeration for `r <= 6`; `r = 7, 8` are refused and handled
//!   through tabulated orders),
//! - the image of the symmetric group permuting `l_1, ..., l_r`.
//!
//! On the symmetric square of the Picard lattice, the intersection form
//! induces the equivariant surjection `cup(x.y) = x.y` onto `Z`;
//! [`DelPezzoPic::kernel_lattice`] is its saturated kernel with the induced
//! action, and [`obstruction_report`] packages the resulting invariants:
//! the index of `cup` on the invariant sublattice, `H^1` of the symmetric
//! square and of the kernel, and the order identity
//! `|H^1(kernel)| = index * |H^1(Sym^2)|` forced by `H^1(G, Z) = 0`.
//!
//! Degree 3 carries extra structure: the 27 lines, the invariant vector
//! `L = l_0.l_0 - sum l_i.l_i`, the identity
//! `6 L = 5 (omega.omega) - sum_i (D_i.D_i)`, and the 28 x 28 matrix of
//! `-L` and the `D_i.D_i` in the mixed tensor basis, whose determinant
//! `+-5 * 2^27` certifies that the classes of `L` and the `D_i.D_i` span a
//! finite-index subgroup.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::group::MatGroup;
use crate::lattice::GLattice;
use crate::linalg::{kernel_basis, solve_right, FinAbGroup, IntMat};
use crate::multilinear::{sym2, sym2_matrix, Sym2Basis};

/// Published orders of the Weyl groups `W(R_r)` for `3 <= r <= 8`.
pub fn weyl_order_published(r: usize) -> Option<u64> {
    match r {
        3 => Some(12),
        4 => Some(120),
        5 => Some(1920),
        6 => Some(51840),
        7 => Some(2_903_040),
        8 => Some(696_729_600),
        _ => None,
    }
}

/// Picard lattice of a del Pezzo surface of degree `d`, `1 <= d <= 9`.
#[derive(Clone, Debug)]
pub struct DelPezzoPic {
    degree: usize,
    r: usize,
}

impl DelPezzoPic {
    pub fn new(degree: usize) -> Result<Self> {
        if !(1..=9).contains(&degree) {
            return Err(Error::BadDegree(degree));
        }
        Ok(DelPezzoPic { degree, r: 9 - degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of blown-up points, `r = 9 - d`.
    pub fn blowups(&self) -> usize {
        self.r
    }

    /// Rank of the Picard lattice, `r + 1`.
    pub fn rank(&self) -> usize {
        self.r + 1
    }

    /// Intersection form `diag(1, -1, ..., -1)`.
    pub fn intersection_form(&self) -> IntMat {
        let mut q = IntMat::identity(self.rank());
        for i in 1..self.rank() {
            q.set_i64(i, i, -1);
        }
        q
    }

    /// Intersection number of two classes (column vectors).
    pub fn pair(&self, x: &IntMat, y: &IntMat) -> BigInt {
        assert_eq!(x.rows(), self.rank());
        assert_eq!(y.rows(), self.rank());
        let mut acc = x.at(0, 0) * y.at(0, 0);
        for i in 1..self.rank() {
            acc -= x.at(i, 0) * y.at(i, 0);
        }
        acc
    }

    /// Canonical class `omega = -3 l_0 + l_1 + ... + l_r`.
    pub fn omega(&self) -> IntMat {
        let mut w = IntMat::zero(self.rank(), 1);
        w.set_i64(0, 0, -3);
        for i in 1..self.rank() {
            w.set_i64(i, 0, 1);
        }
        w
    }

    /// All classes with the given self-intersection and pairing against
    /// omega whose `l_0`-coefficient lies in `[a0_lo, a0_hi]`, ordered by
    /// `(a_0, a_1, ..., a_r)` lexicographically.
    pub fn classes_in_range(
        &self,
        self_int: i64,
        omega_pair: i64,
        a0_lo: i64,
        a0_hi: i64,
    ) -> Vec<IntMat> {
        fn isqrt(n: i64) -> i64 {
            let mut x = (n as f64).sqrt() as i64;
            while x * x > n {
                x -= 1;
            }
            while (x + 1) * (x + 1) <= n {
                x += 1;
            }
            x
        }
        fn rec(coords: &mut Vec<i64>, left: usize, sum: i64, sumsq: i64, out: &mut Vec<Vec<i64>>) {
            if left == 0 {
                if sum == 0 && sumsq == 0 {
                    out.push(coords.clone());
                }
                return;
            }
            // Cauchy-Schwarz: the remaining sum is unreachable if
            // sum^2 > left * sumsq
            if sum * sum > (left as i64) * sumsq {
                return;
            }
            let b = isqrt(sumsq);
            for a in -b..=b {
                coords.push(a);
                rec(coords, left - 1, sum - a, sumsq - a * a, out);
                coords.pop();
            }
        }

        let mut out = Vec::new();
        for a0 in a0_lo..=a0_hi {
            // x.x = a0^2 - sum a_i^2, x.omega = -3 a0 - sum a_i
            let sum = -omega_pair - 3 * a0;
            let sumsq = a0 * a0 - self_int;
            if sumsq < 0 {
                continue;
            }
            let mut found = Vec::new();
            rec(&mut Vec::with_capacity(self.r), self.r, sum, sumsq, &mut found);
            for coords in found {
                let mut v = IntMat::zero(self.rank(), 1);
                v.set_i64(0, 0, a0);
                for (i, &c) in coords.iter().enumerate() {
                    v.set_i64(i + 1, 0, c);
                }
                out.push(v);
            }
        }
        out
    }

    /// Exceptional classes `E.E = E.omega = -1`, enumerated with the
    /// `l_0`-coefficient in the default window `[-3, 7]`.
    pub fn exceptional_classes(&self) -> Vec<IntMat> {
        self.classes_in_range(-1, -1, -3, 7)
    }

    /// Roots `a.a = -2`, `a.omega = 0`, same enumeration window.
    /// Defined for `3 <= r <= 8`.
    pub fn roots(&self) -> Result<Vec<IntMat>> {
        if !(3..=8).contains(&self.r) {
            return Err(Error::BadRank { got: self.r, needed: "3 <= r <= 8" });
        }
        Ok(self.classes_in_range(-2, 0, -3, 7))
    }

    /// Reflection `s_a(x) = x + (x.a) a` in a root `a`.
    pub fn reflection(&self, alpha: &IntMat) -> Result<IntMat> {
        if alpha.rows() != self.rank() || alpha.cols() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "root must be a {}x1 column, got {}x{}",
                self.rank(),
                alpha.rows(),
                alpha.cols()
            )));
        }
        if self.pair(alpha, alpha) != BigInt::from(-2)
            || !self.pair(alpha, &self.omega()).is_zero()
        {
            return Err(Error::NotARoot);
        }
        let mut m = IntMat::identity(self.rank());
        for j in 0..self.rank() {
            let mut e = IntMat::zero(self.rank(), 1);
            e.set_i64(j, 0, 1);
            let c = self.pair(&e, alpha);
            for i in 0..self.rank() {
                *m.at_mut(i, j) += &c * alpha.at(i, 0);
            }
        }
        Ok(m)
    }

    /// Simple roots `l_0 - l_1 - l_2 - l_3` and `l_i - l_{i+1}`; their
    /// reflections generate `W(R_r)`.
    pub fn simple_roots(&self) -> Vec<IntMat> {
        let mut roots = Vec::new();
        if self.r >= 3 {
            let mut a = IntMat::zero(self.rank(), 1);
            a.set_i64(0, 0, 1);
            for i in 1..=3 {
                a.set_i64(i, 0, -1);
            }
            roots.push(a);
        }
        for i in 1..self.r {
            let mut a = IntMat::zero(self.rank(), 1);
            a.set_i64(i, 0, 1);
            a.set_i64(i + 1, 0, -1);
            roots.push(a);
        }
        roots
    }

    /// Full enumeration of the Weyl group, for `r <= 6` only; the groups
    /// for `r = 7, 8` (orders 2903040 and 696729600) are never enumerated.
    pub fn weyl_group(&self, cap: usize) -> Result<MatGroup> {
        if self.r >= 7 {
            return Err(Error::TooLargeForEnumeration(self.r));
        }
        let gens: Vec<IntMat> = self
            .simple_roots()
            .iter()
            .map(|a| self.reflection(a).expect("simple roots are roots"))
            .collect();
        MatGroup::close(self.rank(), gens, cap)
    }

    /// Subgroup of the Weyl group permuting `l_1, ..., l_r` (and fixing
    /// `l_0`), generated by the adjacent transpositions; order `r!`.
    pub fn symmetric_group_image(&self, cap: usize) -> Result<MatGroup> {
        if self.r < 2 {
            return Err(Error::BadRank { got: self.r, needed: "r >= 2" });
        }
        let mut gens = Vec::new();
        for i in 1..self.r {
            let mut t = IntMat::identity(self.rank());
            t.set_i64(i, i, 0);
            t.set_i64(i + 1, i + 1, 0);
            t.set_i64(i, i + 1, 1);
            t.set_i64(i + 1, i, 1);
            gens.push(t);
        }
        MatGroup::close(self.rank(), gens, cap)
    }

    /// The functional `cup : Sym^2 Pic -> Z`, `x.y -> x.y`, as a row vector
    /// on the `e_i . e_j` basis.
    pub fn cup_row(&self) -> IntMat {
        let basis = Sym2Basis::new(self.rank());
        let mut row = IntMat::zero(1, basis.rank());
        for (p, &(i, j)) in basis.pairs().iter().enumerate() {
            if i == j {
                row.set_i64(0, p, if i == 0 { 1 } else { -1 });
            }
        }
        row
    }

    /// Value of `cup` on a vector of `Sym^2 Pic`.
    pub fn cup(&self, v: &IntMat) -> Result<BigInt> {
        let n = Sym2Basis::new(self.rank()).rank();
        if v.rows() != n || v.cols() != 1 {
            return Err(Error::DimensionMismatch(format!(
                "Sym^2 vector must be {n}x1, got {}x{}",
                v.rows(),
                v.cols()
            )));
        }
        let prod = self.cup_row().mul(v);
        Ok(prod.at(0, 0).clone())
    }

    /// Checks that every generator of `group` preserves the intersection
    /// form and fixes the canonical class.
    pub fn check_geometric_action(&self, group: &MatGroup) -> Result<()> {
        if group.rank() != self.rank() {
            return Err(Error::DimensionMismatch(format!(
                "group acts on rank {}, Picard lattice has rank {}",
                group.rank(),
                self.rank()
            )));
        }
        let q = self.intersection_form();
        let omega = self.omega();
        for g in group.generators() {
            if g.transpose().mul(&q).mul(g) != q || g.mul(&omega) != omega {
                return Err(Error::ActionDoesNotPreserveForm);
            }
        }
        Ok(())
    }

    /// Symmetric square of the Picard lattice as a module over `group`.
    pub fn sym2_lattice(&self, group: Arc<MatGroup>) -> Result<GLattice> {
        self.check_geometric_action(&group)?;
        Ok(sym2(&GLattice::standard(group)))
    }

    /// Saturated kernel of `cup` on `Sym^2 Pic`, rank
    /// `(r+1)(r+2)/2 - 1`, with the induced action of `group`.
    pub fn kernel_lattice(&self, group: Arc<MatGroup>) -> Result<GLattice> {
        self.check_geometric_action(&group)?;
        let basis = kernel_basis(&self.cup_row());
        let action: Vec<IntMat> = group
            .generators()
            .iter()
            .map(|g| {
                let image = sym2_matrix(g).mul(&basis);
                solve_right(&basis, &image)
                    .expect("cup is equivariant, so the kernel is preserved")
            })
            .collect();
        GLattice::from_functorial_action(group, basis.cols(), action)
    }

    /// `omega . omega` in `Sym^2` coordinates; `cup` of it equals `d`.
    pub fn omega_square(&self) -> IntMat {
        Sym2Basis::new(self.rank()).square_coords(&self.omega())
    }

    /// Degree 3 only: the invariant vector
    /// `L = l_0.l_0 - (l_1.l_1 + ... + l_6.l_6)`, with `cup(L) = 7`.
    pub fn vector_l(&self) -> Result<IntMat> {
        if self.degree != 3 {
            return Err(Error::WrongDegree { expected: 3, got: self.degree });
        }
        let basis = Sym2Basis::new(self.rank());
        let mut v = IntMat::zero(basis.rank(), 1);
        v.set_i64(basis.index(0, 0), 0, 1);
        for i in 1..self.rank() {
            v.set_i64(basis.index(i, i), 0, -1);
        }
        Ok(v)
    }

    /// Degree 3 only: the 27 lines in their family order — `l_i`, then
    /// `2 l_0 - sum_{j != i} l_j`, then `l_0 - l_i - l_j` for `i < j`.
    pub fn lines27(&self) -> Result<Vec<IntMat>> {
        if self.degree != 3 {
            return Err(Error::WrongDegree { expected: 3, got: self.degree });
        }
        let mut out = Vec::with_capacity(27);
        for i in 1..=6 {
            let mut v = IntMat::zero(7, 1);
            v.set_i64(i, 0, 1);
            out.push(v);
        }
        for i in 1..=6 {
            let mut v = IntMat::zero(7, 1);
            v.set_i64(0, 0, 2);
            for j in 1..=6 {
                if j != i {
                    v.set_i64(j, 0, -1);
                }
            }
            out.push(v);
        }
        for i in 1..=6 {
            for j in i + 1..=6 {
                let mut v = IntMat::zero(7, 1);
                v.set_i64(0, 0, 1);
                v.set_i64(i, 0, -1);
                v.set_i64(j, 0, -1);
                out.push(v);
            }
        }
        debug_assert_eq!(out.len(), 27);
        Ok(out)
    }

    /// Coordinates of a `Sym^2` vector in the mixed tensor basis
    /// `(l_i (x) l_i)_{0<=i<=6}, (-l_0 (x) l_i)_{1<=i<=6},
    /// (l_i (x) l_j)_{1<=i<j<=6}` used to print the degree-3 matrix.
    fn mixed_coords(&self, v: &IntMat) -> IntMat {
        let basis = Sym2Basis::new(self.rank());
        let n = self.rank();
        let mut out = IntMat::zero(basis.rank(), 1);
        let mut pos = 0;
        for i in 0..n {
            *out.at_mut(pos, 0) = v.at(basis.index(i, i), 0).clone();
            pos += 1;
        }
        for i in 1..n {
            *out.at_mut(pos, 0) = -v.at(basis.index(0, i), 0);
            pos += 1;
        }
        for i in 1..n {
            for j in i + 1..n {
                *out.at_mut(pos, 0) = v.at(basis.index(i, j), 0).clone();
                pos += 1;
            }
        }
        out
    }

    /// Degree 3 only: the 28 x 28 matrix whose rows are `-L` followed by
    /// `D_i . D_i` for the 27 lines, in the mixed tensor basis.
    /// Its determinant is `+-5 * 2^27`.
    pub fn matrix_a(&self) -> Result<IntMat> {
        let lines = self.lines27()?;
        let basis = Sym2Basis::new(self.rank());
        let mut rows = IntMat::zero(28, 28);
        let put_row = |rows: &mut IntMat, r: usize, v: &IntMat| {
            for c in 0..28 {
                *rows.at_mut(r, c) = v.at(c, 0).clone();
            }
        };
        put_row(&mut rows, 0, &self.mixed_coords(&self.vector_l()?.neg()));
        for (m, d) in lines.iter().enumerate() {
            put_row(&mut rows, m + 1, &self.mixed_coords(&basis.square_coords(d)));
        }
        Ok(rows)
    }
}

fn vp_u64(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n % p == 0 && n > 0 {
        n /= p;
        v += 1;
    }
    v
}

fn vp_factorial(n: u64, p: u64) -> u32 {
    // Legendre: sum of floor(n / p^k)
    let mut v = 0u32;
    let mut q = p;
    while q <= n {
        v += (n / q) as u32;
        match q.checked_mul(p) {
            Some(next) => q = next,
            None => break,
        }
    }
    v
}

fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// For `1 <= d <= 4`, compares the `p`-valuation of `r! = (9-d)!` (the
/// order of the subgroup permuting the blown-up points) with that of the
/// tabulated order of `W(R_r)`: true exactly when the two agree, i.e. when
/// a Sylow `p`-subgroup of the symmetric group is already Sylow in the
/// Weyl group.
pub fn sylow_order_check(degree: usize, p: usize) -> Result<bool> {
    if !(1..=4).contains(&degree) {
        return Err(Error::BadInput(format!(
            "sylow order comparison is tabulated for degrees 1..=4, got {degree}"
        )));
    }
    if !is_prime(p) {
        return Err(Error::BadInput(format!("{p} is not a prime")));
    }
    let r = (9 - degree) as u64;
    let w = weyl_order_published(r as usize).expect("r is in 5..=8");
    Ok(vp_factorial(r, p as u64) == vp_u64(w, p as u64))
}

/// Invariants of the symmetric square of the Picard lattice under a
/// geometric action, together with the order identity they must satisfy.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub degree: usize,
    pub group_order: usize,
    pub invariant_rank: usize,
    /// Index of `cup((Sym^2 Pic)^G)` in `Z`.
    pub cup_index: BigInt,
    pub h1_sym2: FinAbGroup,
    pub h1_kernel: FinAbGroup,
    /// `|H^1(G, ker cup)| = cup_index * |H^1(G, Sym^2 Pic)|`, which follows
    /// from `H^1(G, Z) = 0` and the exact sequence
    /// `0 -> ker cup -> Sym^2 Pic -> Z -> 0`.
    pub order_identity: bool,
    /// Vanishing criterion: `H^1(G, Sym^2 Pic) = 0`.
    pub sym2_h1_trivial: bool,
}

/// Computes the [`ObstructionReport`] of an action on the Picard lattice
/// of a degree-`d` del Pezzo surface given by generator matrices (the full
/// Weyl group when `generators` is `None`).
pub fn obstruction_report(
    degree: usize,
    generators: Option<Vec<IntMat>>,
    cap: usize,
) -> Result<ObstructionReport> {
    let pic = DelPezzoPic::new(degree)?;
    let group = match generators {
        Some(gens) => MatGroup::close(pic.rank(), gens, cap)?,
        None => pic.weyl_group(cap)?,
    };
    let group = Arc::new(group);
    pic.check_geometric_action(&group)?;

    let sym = pic.sym2_lattice(group.clone())?;
    let inv = sym.invariants();
    let mut cup_index = BigInt::zero();
    for j in 0..inv.cols() {
        cup_index = num_integer::Integer::gcd(&cup_index, &pic.cup(&inv.col(j))?);
    }
    assert!(
        cup_index.is_positive(),
        "omega.omega is invariant with cup value d, so the image is nonzero"
    );

    let h1_sym2 = sym.h1();
    let h1_kernel = pic.kernel_lattice(group.clone())?.h1();
    let lhs = h1_kernel.order().expect("H^1 of a finite group is finite");
    let rhs = &cup_index * h1_sym2.order().expect("H^1 of a finite group is finite");

    Ok(ObstructionReport {
        degree,
        group_order: group.order(),
        invariant_rank: inv.cols(),
        cup_index,
        order_identity: lhs == rhs,
        sym2_h1_trivial: h1_sym2.is_trivial(),
        h1_sym2,
        h1_kernel,
    })
}
