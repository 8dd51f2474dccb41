//! Symmetric squares, exterior squares and tensor products of `G`-lattices.
//!
//! For a free module `A` with basis `e_0, ..., e_{n-1}`:
//!
//! - `Sym^2 A` has basis `e_i . e_j` for `i <= j` (lexicographic), with
//!   `x.x = sum a_i^2 (e_i.e_i) + sum_{i<j} 2 a_i a_j (e_i.e_j)`;
//! - `Wedge^2 A` has basis `e_i ^ e_j` for `i < j`;
//! - `A (x) B` has basis `e_a (x) f_b` ordered by `a * rank(B) + b`.
//!
//! All three are functorial, so the induced actions need no relation check.
//! [`check_sym_wedge_sequence`] certifies exactness of
//! `0 -> Wedge^2 A -> A (x) A -> Sym^2 A -> 0` (the first map is
//! `a ^ b -> a (x) b - b (x) a`, the second symmetrises), including
//! saturation of the image; [`check_split_decomposition`] certifies the
//! `Sym^2` and `Wedge^2` decompositions of a direct sum.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::GLattice;
use crate::linalg::{in_span, kernel_basis, snf, IntMat};

/// Index bookkeeping for the basis `e_i . e_j`, `i <= j`, of `Sym^2 Z^n`.
#[derive(Clone, Debug)]
pub struct Sym2Basis {
    rank: usize,
    pairs: Vec<(usize, usize)>,
}

impl Sym2Basis {
    pub fn new(rank: usize) -> Self {
        let mut pairs = Vec::with_capacity(rank * (rank + 1) / 2);
        for i in 0..rank {
            for j in i..rank {
                pairs.push((i, j));
            }
        }
        Sym2Basis { rank, pairs }
    }

    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Position of `e_i . e_j` (arguments in either order).
    pub fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        debug_assert!(j < self.rank);
        i * self.rank - i * (i + 1) / 2 + j
    }

    /// Coordinates of `v . w` as a column vector.
    pub fn pair_coords(&self, v: &IntMat, w: &IntMat) -> IntMat {
        assert_eq!(v.rows(), self.rank);
        assert_eq!(w.rows(), self.rank);
        let mut out = IntMat::zero(self.rank(), 1);
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let c = if i == j {
                v.at(i, 0) * w.at(i, 0)
            } else {
                v.at(i, 0) * w.at(j, 0) + v.at(j, 0) * w.at(i, 0)
            };
            *out.at_mut(p, 0) = c;
        }
        out
    }

    /// Coordinates of `v . v`.
    pub fn square_coords(&self, v: &IntMat) -> IntMat {
        self.pair_coords(v, v)
    }
}

/// Matrix of `Sym^2 g` in the `e_i . e_j` basis.
pub fn sym2_matrix(g: &IntMat) -> IntMat {
    assert!(g.is_square());
    let basis = Sym2Basis::new(g.rows());
    let cols: Vec<IntMat> = (0..g.cols()).map(|j| g.col(j)).collect();
    let mut out = IntMat::zero(basis.rank(), basis.rank());
    for (p, &(i, j)) in basis.pairs().iter().enumerate() {
        let image = basis.pair_coords(&cols[i], &cols[j]);
        for r in 0..basis.rank() {
            *out.at_mut(r, p) = image.at(r, 0).clone();
        }
    }
    out
}

/// Matrix of `Wedge^2 g` in the `e_i ^ e_j` (`i < j`) basis.
pub fn wedge2_matrix(g: &IntMat) -> IntMat {
    assert!(g.is_square());
    let n = g.rows();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    let mut out = IntMat::zero(pairs.len(), pairs.len());
    for (q, &(i, j)) in pairs.iter().enumerate() {
        for (p, &(a, b)) in pairs.iter().enumerate() {
            *out.at_mut(p, q) = g.at(a, i) * g.at(b, j) - g.at(b, i) * g.at(a, j);
        }
    }
    out
}

/// Symmetric square of a module, over the same group.
pub fn sym2(l: &GLattice) -> GLattice {
    let action = l.action().iter().map(sym2_matrix).collect();
    let rank = l.rank() * (l.rank() + 1) / 2;
    GLattice::from_functorial_action(l.group().clone(), rank, action)
        .expect("functorial action matches the generator count")
}

/// Exterior square of a module, over the same group.
pub fn wedge2(l: &GLattice) -> GLattice {
    let action = l.action().iter().map(wedge2_matrix).collect();
    let rank = l.rank() * (l.rank() - 1) / 2;
    GLattice::from_functorial_action(l.group().clone(), rank, action)
        .expect("functorial action matches the generator count")
}

/// Tensor product of two modules over the same group.
pub fn tensor(l: &GLattice, m: &GLattice) -> Result<GLattice> {
    if !l.same_group_as(m) {
        return Err(Error::GroupMismatch);
    }
    let action: Vec<IntMat> = l
        .action()
        .iter()
        .zip(m.action())
        .map(|(a, b)| a.kronecker(b))
        .collect();
    GLattice::from_functorial_action(l.group().clone(), l.rank() * m.rank(), action)
}

/// Matrix of `a ^ b -> a (x) b - b (x) a` from `Wedge^2 A` to `A (x) A`.
fn wedge_to_tensor(n: usize) -> IntMat {
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j));
        }
    }
    let mut t = IntMat::zero(n * n, pairs.len());
    for (q, &(i, j)) in pairs.iter().enumerate() {
        t.set_i64(i * n + j, q, 1);
        t.set_i64(j * n + i, q, -1);
    }
    t
}

/// Matrix of the symmetrisation `e_a (x) e_b -> e_a . e_b`.
fn tensor_to_sym(n: usize) -> IntMat {
    let basis = Sym2Basis::new(n);
    let mut t = IntMat::zero(basis.rank(), n * n);
    for a in 0..n {
        for b in 0..n {
            t.set_i64(basis.index(a, b), a * n + b, 1);
        }
    }
    t
}

/// Certifies exactness of `0 -> Wedge^2 A -> A (x) A -> Sym^2 A -> 0`
/// for the module `l`: both maps are equivariant, the composite vanishes,
/// the first map is injective with image exactly the saturated kernel of
/// the second, and the second is surjective.
pub fn check_sym_wedge_sequence(l: &GLattice) -> bool {
    let n = l.rank();
    let t1 = wedge_to_tensor(n);
    let t2 = tensor_to_sym(n);

    for g in l.action() {
        let kron = g.kronecker(g);
        if kron.mul(&t1) != t1.mul(&wedge2_matrix(g)) {
            return false;
        }
        if sym2_matrix(g).mul(&t2) != t2.mul(&kron) {
            return false;
        }
    }
    if !t2.mul(&t1).is_zero() {
        return false;
    }

    // injectivity and saturation of the wedge image
    let sf1 = snf(&t1);
    let wedge_rank = n * (n - 1) / 2;
    if sf1.rank() != wedge_rank || sf1.diagonal().iter().any(|d| !d.is_zero() && *d != BigInt::from(1)) {
        return false;
    }
    // image = kernel of the symmetrisation, both saturated of equal rank
    let ker = kernel_basis(&t2);
    if ker.cols() != wedge_rank {
        return false;
    }
    for q in 0..wedge_rank {
        if !in_span(&ker, &t1.col(q)) || !in_span(&t1, &ker.col(q)) {
            return false;
        }
    }

    // surjectivity of the symmetrisation
    let sf2 = snf(&t2);
    let sym_rank = n * (n + 1) / 2;
    sf2.rank() == sym_rank && sf2.diagonal().iter().all(|d| d.is_zero() || *d == BigInt::from(1))
}

/// Outcome of a direct-sum decomposition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionOutcome {
    /// The canonical maps are equivariant unimodular isomorphisms.
    Verified,
    /// A canonical map failed to be an equivariant isomorphism.
    Mismatch,
    /// The action does not preserve the two summands, so the componentwise
    /// decomposition does not apply.
    NotApplicable,
}

/// Checks the decompositions
/// `Sym^2(A + B) = Sym^2 A + A (x) B + Sym^2 B` and
/// `Wedge^2(A + B) = Wedge^2 A + A (x) B + Wedge^2 B`
/// for the module `l` split as the first `n1` coordinates against the rest.
///
/// If some action matrix does not preserve the split (nonzero off-diagonal
/// block), the decomposition has no meaning and the check reports
/// [`DecompositionOutcome::NotApplicable`].
pub fn check_split_decomposition(l: &GLattice, n1: usize) -> Result<DecompositionOutcome> {
    let n = l.rank();
    if n1 > n {
        return Err(Error::DimensionMismatch(format!("split {n1} exceeds rank {n}")));
    }
    let n2 = n - n1;
    for g in l.action() {
        for i in 0..n1 {
            for j in n1..n {
                if !g.at(i, j).is_zero() || !g.at(j, i).is_zero() {
                    return Ok(DecompositionOutcome::NotApplicable);
                }
            }
        }
    }

    let block = |g: &IntMat, r0: usize, size: usize| {
        let mut b = IntMat::zero(size, size);
        for i in 0..size {
            for j in 0..size {
                *b.at_mut(i, j) = g.at(r0 + i, r0 + j).clone();
            }
        }
        b
    };

    let sym = Sym2Basis::new(n);
    let sym1 = Sym2Basis::new(n1);
    let sym2b = Sym2Basis::new(n2);

    // canonical inclusion Sym^2 A + A(x)B + Sym^2 B -> Sym^2(A + B)
    let mut phi_sym = IntMat::zero(sym.rank(), sym.rank());
    let mut col = 0;
    for &(i, j) in sym1.pairs() {
        phi_sym.set_i64(sym.index(i, j), col, 1);
        col += 1;
    }
    for a in 0..n1 {
        for b in 0..n2 {
            phi_sym.set_i64(sym.index(a, n1 + b), col, 1);
            col += 1;
        }
    }
    for &(i, j) in sym2b.pairs() {
        phi_sym.set_i64(sym.index(n1 + i, n1 + j), col, 1);
        col += 1;
    }
    debug_assert_eq!(col, sym.rank());

    // canonical inclusion Wedge^2 A + A(x)B + Wedge^2 B -> Wedge^2(A + B)
    let wedge_pairs = |m: usize| {
        let mut ps = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                ps.push((i, j));
            }
        }
        ps
    };
    let wp = wedge_pairs(n);
    let wedge_index = |i: usize, j: usize| wp.iter().position(|&p| p == (i, j)).unwrap();
    let wrank = wp.len();
    let mut phi_wedge = IntMat::zero(wrank, wrank);
    let mut col = 0;
    for (i, j) in wedge_pairs(n1) {
        phi_wedge.set_i64(wedge_index(i, j), col, 1);
        col += 1;
    }
    for a in 0..n1 {
        for b in 0..n2 {
            phi_wedge.set_i64(wedge_index(a, n1 + b), col, 1);
            col += 1;
        }
    }
    for (i, j) in wedge_pairs(n2) {
        phi_wedge.set_i64(wedge_index(n1 + i, n1 + j), col, 1);
        col += 1;
    }
    debug_assert_eq!(col, wrank);

    // unimodularity (they are permutation matrices) and equivariance
    if !crate::linalg::det(&phi_sym)?.abs().is_one()
        || !crate::linalg::det(&phi_wedge)?.abs().is_one()
    {
        return Ok(DecompositionOutcome::Mismatch);
    }
    for g in l.action() {
        let g1 = block(g, 0, n1);
        let g2 = block(g, n1, n2);
        let sum_sym = sym2_matrix(&g1)
            .direct_sum(&g1.kronecker(&g2))
            .direct_sum(&sym2_matrix(&g2));
        if sym2_matrix(g).mul(&phi_sym) != phi_sym.mul(&sum_sym) {
            return Ok(DecompositionOutcome::Mismatch);
        }
        let sum_wedge = wedge2_matrix(&g1)
            .direct_sum(&g1.kronecker(&g2))
            .direct_sum(&wedge2_matrix(&g2));
        if wedge2_matrix(g).mul(&phi_wedge) != phi_wedge.mul(&sum_wedge) {
            return Ok(DecompositionOutcome::Mismatch);
        }
    }
    Ok(DecompositionOutcome::Verified)
}

/// Decomposition check for an explicitly given pair of summands: assembles
/// the block-diagonal sum and certifies the canonical maps.
pub fn check_direct_sum_decomposition(l1: &GLattice, l2: &GLattice) -> Result<bool> {
    let sum = l1.direct_sum(l2)?;
    match check_split_decomposition(&sum, l1.rank())? {
        DecompositionOutcome::Verified => Ok(true),
        DecompositionOutcome::Mismatch => Ok(false),
        DecompositionOutcome::NotApplicable => {
            unreachable!("a block-diagonal sum always preserves its own split")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::MatGroup;
    use crate::lattice::bar_h1;
    use std::sync::Arc;

    fn lattice(rank: usize, gens: &[IntMat]) -> GLattice {
        let g = MatGroup::close(rank, gens.to_vec(), 100_000).unwrap();
        GLattice::standard(Arc::new(g))
    }

    #[test]
    fn sym2_basis_indexing() {
        let b = Sym2Basis::new(4);
        assert_eq!(b.rank(), 10);
        for (p, &(i, j)) in b.pairs().iter().enumerate() {
            assert_eq!(b.index(i, j), p);
            assert_eq!(b.index(j, i), p);
        }
        // squares expand with doubled cross terms
        let v = IntMat::col_from_i64(&[1, 2, 0, -1]);
        let sq = b.square_coords(&v);
        assert_eq!(*sq.at(b.index(0, 0), 0), BigInt::from(1));
        assert_eq!(*sq.at(b.index(0, 1), 0), BigInt::from(4));
        assert_eq!(*sq.at(b.index(1, 1), 0), BigInt::from(4));
        assert_eq!(*sq.at(b.index(0, 3), 0), BigInt::from(-2));
        assert_eq!(*sq.at(b.index(2, 3), 0), BigInt::from(0));
    }

    #[test]
    fn sym2_and_wedge2_are_functorial() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let n = rng.gen_range(1..=4);
            let mut g = IntMat::zero(n, n);
            let mut h = IntMat::zero(n, n);
            for i in 0..n {
                for j in 0..n {
                    g.set_i64(i, j, rng.gen_range(-3..=3));
                    h.set_i64(i, j, rng.gen_range(-3..=3));
                }
            }
            let gh = g.mul(&h);
            assert_eq!(sym2_matrix(&gh), sym2_matrix(&g).mul(&sym2_matrix(&h)));
            assert_eq!(wedge2_matrix(&gh), wedge2_matrix(&g).mul(&wedge2_matrix(&h)));
            assert_eq!(gh.kronecker(&gh), g.kronecker(&g).mul(&h.kronecker(&h)));
        }
    }

    #[test]
    fn sym2_of_sign_action_is_trivial_module() {
        // (-1).(-1) = +1 on e.e, so Sym^2 carries the trivial action
        let l = lattice(1, &[IntMat::from_i64_rows(&[&[-1]])]);
        let s = sym2(&l);
        assert_eq!(s.rank(), 1);
        assert!(s.action()[0].is_identity());
        assert!(s.h1().is_trivial());
        assert_eq!(s.invariants().cols(), 1);
    }

    #[test]
    fn wedge2_of_swap_is_sign() {
        let l = lattice(2, &[IntMat::from_i64_rows(&[&[0, 1], &[1, 0]])]);
        let w = wedge2(&l);
        assert_eq!(w.rank(), 1);
        assert_eq!(w.action()[0], IntMat::from_i64_rows(&[&[-1]]));
        assert_eq!(w.h1().to_string(), "Z/2");
    }

    #[test]
    fn tensor_requires_matching_groups() {
        let a = lattice(2, &[IntMat::from_i64_rows(&[&[0, 1], &[1, 0]])]);
        let b = lattice(1, &[IntMat::from_i64_rows(&[&[-1]])]);
        assert!(matches!(tensor(&a, &b), Err(Error::GroupMismatch)));
        let t = tensor(&a, &a).unwrap();
        assert_eq!(t.rank(), 4);
    }

    #[test]
    fn rank_identity_sym_plus_wedge() {
        for n in 1..=4 {
            let id = IntMat::identity(n);
            let l = lattice(n, &[id]);
            assert_eq!(
                sym2(&l).rank() + wedge2(&l).rank(),
                tensor(&l, &l).unwrap().rank()
            );
        }
    }

    #[test]
    fn sym2_h1_matches_bar_complex() {
        let swap = IntMat::from_i64_rows(&[&[0, 1], &[1, 0]]);
        let rot3 = IntMat::from_i64_rows(&[&[0, -1], &[1, -1]]);
        for l in [lattice(2, &[swap.clone()]), lattice(2, &[rot3]), lattice(2, &[swap, IntMat::diag_from_i64(&[-1, -1])])] {
            let s = sym2(&l);
            assert_eq!(s.h1(), bar_h1(&s));
        }
    }

    #[test]
    fn exact_sequence_certificate() {
        let cases = vec![
            lattice(1, &[IntMat::from_i64_rows(&[&[-1]])]),
            lattice(2, &[IntMat::from_i64_rows(&[&[0, 1], &[1, 0]])]),
            lattice(3, &[
                IntMat::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]),
                IntMat::from_i64_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]),
            ]),
            lattice(2, &[IntMat::from_i64_rows(&[&[0, -1], &[1, 0]])]),
        ];
        for l in cases {
            assert!(check_sym_wedge_sequence(&l));
        }
    }

    #[test]
    fn split_decomposition_verified_for_componentwise_actions() {
        // sign on Z + rotation on Z^2, block diagonal
        let g = IntMat::diag_from_i64(&[-1, 1, 1]);
        let mut rot = IntMat::identity(3);
        rot.set_i64(1, 1, 0);
        rot.set_i64(1, 2, -1);
        rot.set_i64(2, 1, 1);
        rot.set_i64(2, 2, 0);
        let l = lattice(3, &[g, rot]);
        assert_eq!(check_split_decomposition(&l, 1).unwrap(), DecompositionOutcome::Verified);

        // two different modules over one group: sign and trivial characters of Z/2
        let group = Arc::new(
            MatGroup::close(1, vec![IntMat::from_i64_rows(&[&[-1]])], 10).unwrap(),
        );
        let a = GLattice::with_action(group.clone(), 1, vec![IntMat::from_i64_rows(&[&[-1]])])
            .unwrap();
        let b = GLattice::with_action(group, 1, vec![IntMat::identity(1)]).unwrap();
        assert!(check_direct_sum_decomposition(&a, &b).unwrap());
    }

    #[test]
    fn swapping_summands_is_not_applicable() {
        // Z/2 swapping two rank-1 summands does not preserve the split
        let l = lattice(2, &[IntMat::from_i64_rows(&[&[0, 1], &[1, 0]])]);
        assert_eq!(
            check_split_decomposition(&l, 1).unwrap(),
            DecompositionOutcome::NotApplicable
        );
    }
}
