//! Lattices with an action of a finite matrix group, and their `H^1`.
//!
//! A [`GLattice`] is a free `Z`-module of finite rank on which a finite
//! group `G` (a [`MatGroup`]) acts by one integer matrix per generator.
//! The module computes:
//!
//! - the saturated sublattice of `G`-invariants,
//! - `H^1(G, M)` by the cocycle-constraint method: a cocycle is determined
//!   by its values on the generators, the cocycle identity
//!   `f(s x) = f(s) + s.f(x)` for every generator `s` and every `x` in `G`
//!   cuts out the cocycle lattice `Z^1` exactly, and `H^1 = Z^1 / B^1`,
//! - `H^1` of a cyclic group from the classical kernel/image formula,
//! - permutation-basis detection with an explicit certificate.
//!
//! [`bar_h1`] recomputes `H^1` from the full bar complex; it is exponential
//! in the group order and exists as an independent oracle for small cases.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::MatGroup;
use crate::linalg::{
    det, kernel_basis, quotient, snf, solve_right, EchelonAccumulator, FinAbGroup, IntMat,
};

/// Free `Z`-module with an action of a finite matrix group.
///
/// The group's own matrices and the action matrices may have different
/// sizes: for instance the symmetric square of a rank-7 lattice is a rank-28
/// module over the same rank-7 matrix group.
#[derive(Clone, Debug)]
pub struct GLattice {
    group: Arc<MatGroup>,
    rank: usize,
    /// one action matrix per group generator, `rank x rank`
    action: Vec<IntMat>,
}

/// `H^1` together with the ranks of the cocycle and coboundary lattices.
#[derive(Clone, Debug)]
pub struct H1Data {
    pub h1: FinAbGroup,
    pub z1_rank: usize,
    pub b1_rank: usize,
}

impl GLattice {
    /// The group acting on its own defining module.
    pub fn standard(group: Arc<MatGroup>) -> Self {
        let rank = group.rank();
        let action = group.generators().to_vec();
        GLattice { group, rank, action }
    }

    /// Module with an explicitly supplied action.
    ///
    /// The action matrices are verified against every relation of the
    /// generators (walking the full closure), so an inconsistent assignment
    /// is rejected with [`Error::InvalidAction`]. Constructions that are
    /// functorial in an existing lattice skip this walk via
    /// [`GLattice::from_functorial_action`].
    pub fn with_action(group: Arc<MatGroup>, rank: usize, action: Vec<IntMat>) -> Result<Self> {
        let l = GLattice::from_functorial_action(group, rank, action)?;
        l.check_relations()?;
        Ok(l)
    }

    /// Module with an action known to be consistent by construction.
    pub fn from_functorial_action(
        group: Arc<MatGroup>,
        rank: usize,
        action: Vec<IntMat>,
    ) -> Result<Self> {
        if action.len() != group.num_generators() {
            return Err(Error::DimensionMismatch(format!(
                "{} action matrices for {} generators",
                action.len(),
                group.num_generators()
            )));
        }
        for a in &action {
            if !a.is_square() || a.rows() != rank {
                return Err(Error::DimensionMismatch(format!(
                    "action matrix is {}x{}, expected {}x{}",
                    a.rows(),
                    a.cols(),
                    rank,
                    rank
                )));
            }
        }
        Ok(GLattice { group, rank, action })
    }

    /// Verifies that the generator assignment extends to a homomorphism on
    /// the whole group: along the closure's discovery tree, the action of
    /// `parent * s` must agree with `action(parent) * action(s)` no matter
    /// which product reaches the element.
    fn check_relations(&self) -> Result<()> {
        let acts = self.element_actions();
        for x in 0..self.group.order() {
            for s in 0..self.group.num_generators() {
                let xs = self.group.mult(x, self.group.generator_index(s));
                if acts[x].mul(&self.action[s]) != acts[xs] {
                    return Err(Error::InvalidAction);
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<MatGroup> {
        &self.group
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn action(&self) -> &[IntMat] {
        &self.action
    }

    pub fn same_group_as(&self, other: &GLattice) -> bool {
        Arc::ptr_eq(&self.group, &other.group)
            || (self.group.rank() == other.group.rank()
                && self.group.generators() == other.group.generators())
    }

    /// Action matrix of the group element with index `i`.
    pub fn action_of(&self, i: usize) -> IntMat {
        let mut m = IntMat::identity(self.rank);
        for s in self.group.word(i) {
            m = m.mul(&self.action[s]);
        }
        m
    }

    /// Action matrices of all elements, in element order.
    ///
    /// Linear in the group order: each element's matrix is its discovery
    /// parent's matrix times one generator matrix.
    pub fn element_actions(&self) -> Vec<IntMat> {
        let mut acts = Vec::with_capacity(self.group.order());
        acts.push(IntMat::identity(self.rank));
        for i in 1..self.group.order() {
            let (p, s) = self.group.parent_edge(i).expect("non-identity element has a parent");
            acts.push(acts[p].mul(&self.action[s]));
        }
        acts
    }

    /// Basis of the saturated sublattice of `G`-invariants, as the columns
    /// of a `rank x k` matrix.
    pub fn invariants(&self) -> IntMat {
        let n = self.rank;
        let mut acc = EchelonAccumulator::new(n);
        for a in &self.action {
            acc.push(&a.sub(&IntMat::identity(n)));
        }
        kernel_basis(&acc.finish())
    }

    /// `H^1(G, M)` with the ranks of `Z^1` and `B^1`.
    pub fn h1_detailed(&self) -> H1Data {
        let n = self.rank;
        let k = self.group.num_generators();
        let nvars = k * n;
        if nvars == 0 {
            return H1Data { h1: FinAbGroup::trivial(), z1_rank: 0, b1_rank: 0 };
        }

        let acts = self.element_actions();

        // E[x] is the n x nvars matrix with f(x) = E[x] * vars, where vars
        // stacks the unknown values f(s) of a cocycle on the generators.
        // Recursion along discovery edges: f(p s) = f(p) + p.f(s).
        let mut exprs: Vec<IntMat> = Vec::with_capacity(self.group.order());
        exprs.push(IntMat::zero(n, nvars));
        for i in 1..self.group.order() {
            let (p, s) = self.group.parent_edge(i).expect("non-identity element has a parent");
            let mut e = exprs[p].clone();
            for r in 0..n {
                for c in 0..n {
                    let v = acts[p].at(r, c);
                    if !v.is_zero() {
                        *e.at_mut(r, s * n + c) += v;
                    }
                }
            }
            exprs.push(e);
        }

        // cocycle identity f(s x) = f(s) + s.f(x) for all s, x
        let mut acc = EchelonAccumulator::new(nvars);
        for s in 0..k {
            let s_elem = self.group.generator_index(s);
            for x in 0..self.group.order() {
                let sx = self.group.mult(s_elem, x);
                let mut block = exprs[sx].sub(&self.action[s].mul(&exprs[x]));
                for r in 0..n {
                    *block.at_mut(r, s * n + r) -= BigInt::one();
                }
                acc.push(&block);
            }
        }
        let z1 = kernel_basis(&acc.finish());

        // coboundaries (s.m - m)_s, expressed in the Z^1 basis
        let mut b1 = IntMat::zero(nvars, n);
        for s in 0..k {
            let diff = self.action[s].sub(&IntMat::identity(n));
            for r in 0..n {
                for c in 0..n {
                    *b1.at_mut(s * n + r, c) = diff.at(r, c).clone();
                }
            }
        }
        let in_z1 = solve_right(&z1, &b1).expect("coboundaries are cocycles");
        let h1 = quotient(z1.cols(), &in_z1).expect("ambient rank matches by construction");
        H1Data { h1, z1_rank: z1.cols(), b1_rank: snf(&in_z1).rank() }
    }

    pub fn h1(&self) -> FinAbGroup {
        self.h1_detailed().h1
    }

    /// Restriction of the module to the subgroup generated by the listed
    /// elements of the closure.
    pub fn restrict(&self, elements: &[usize], cap: usize) -> Result<GLattice> {
        let order = self.group.order();
        for &i in elements {
            if i >= order {
                return Err(Error::IndexOutOfRange { index: i, order });
            }
        }
        let gens: Vec<IntMat> = elements.iter().map(|&i| self.group.element(i)).collect();
        let sub = MatGroup::close(self.group.rank(), gens, cap)?;
        let action: Vec<IntMat> = elements.iter().map(|&i| self.action_of(i)).collect();
        GLattice::from_functorial_action(Arc::new(sub), self.rank, action)
    }

    /// When the columns of `basis` are permuted (no signs) by every
    /// generator and `p` does not divide `det(basis)`, returns the
    /// permutation certificate: for each generator `s` and column `j`,
    /// `cert[s][j]` is the column index of the image of column `j`.
    pub fn permutation_basis_certificate(
        &self,
        basis: &IntMat,
        p: u64,
    ) -> Result<Option<Vec<Vec<usize>>>> {
        if basis.rows() != self.rank || basis.cols() != self.rank {
            return Err(Error::DimensionMismatch(format!(
                "basis is {}x{}, module rank is {}",
                basis.rows(),
                basis.cols(),
                self.rank
            )));
        }
        let d = det(basis)?;
        if d.is_zero() || (d % BigInt::from(p)).is_zero() {
            return Ok(None);
        }
        let cols: Vec<IntMat> = (0..basis.cols()).map(|j| basis.col(j)).collect();
        let mut cert = Vec::with_capacity(self.action.len());
        for a in &self.action {
            let mut perm = Vec::with_capacity(cols.len());
            for col in &cols {
                let image = a.mul(col);
                match cols.iter().position(|c| *c == image) {
                    Some(t) => perm.push(t),
                    None => return Ok(None),
                }
            }
            // nonzero determinant forces distinct columns, hence a bijection
            debug_assert_eq!(
                { let mut s = perm.clone(); s.sort_unstable(); s },
                (0..cols.len()).collect::<Vec<_>>()
            );
            cert.push(perm);
        }
        Ok(Some(cert))
    }

    /// Block-diagonal sum of two modules over the same group.
    pub fn direct_sum(&self, other: &GLattice) -> Result<GLattice> {
        if !self.same_group_as(other) {
            return Err(Error::GroupMismatch);
        }
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        GLattice::from_functorial_action(self.group.clone(), self.rank + other.rank, action)
    }
}

/// `H^1(Z/order, M)` for a single matrix `sigma` of the given order:
/// the kernel of the norm `1 + sigma + ... + sigma^(order-1)` modulo the
/// image of `sigma - 1`.
pub fn h1_cyclic(sigma: &IntMat, order: usize) -> Result<FinAbGroup> {
    if !sigma.is_square() {
        return Err(Error::NonSquare { rows: sigma.rows(), cols: sigma.cols() });
    }
    if order == 0 {
        return Err(Error::BadInput("order must be positive".into()));
    }
    let n = sigma.rows();
    let mut norm = IntMat::zero(n, n);
    let mut power = IntMat::identity(n);
    for _ in 0..order {
        norm = norm.add(&power);
        power = power.mul(sigma);
    }
    if !power.is_identity() {
        return Err(Error::NotPeriodic { order });
    }
    let ker = kernel_basis(&norm);
    let image = sigma.sub(&IntMat::identity(n));
    let in_ker = solve_right(&ker, &image).expect("(sigma - 1) maps into ker(norm)");
    quotient(ker.cols(), &in_ker)
}

/// `H^1` from the full bar complex: kernel of
/// `(d^1 f)(x,y) = x.f(y) - f(xy) + f(x)` modulo the image of
/// `(d^0 m)(x) = x.m - m`. Exponential in the group order; an independent
/// oracle for small groups.
pub fn bar_h1(l: &GLattice) -> FinAbGroup {
    let n = l.rank();
    let g = l.group().order();
    let acts = l.element_actions();
    let nvars = g * n;

    let mut acc = EchelonAccumulator::new(nvars);
    for x in 0..g {
        for y in 0..g {
            let xy = l.group().mult(x, y);
            // x.f(y) - f(xy) + f(x)
            let mut block = IntMat::zero(n, nvars);
            for r in 0..n {
                for c in 0..n {
                    let v = acts[x].at(r, c);
                    if !v.is_zero() {
                        *block.at_mut(r, y * n + c) += v;
                    }
                }
            }
            for r in 0..n {
                *block.at_mut(r, xy * n + r) -= BigInt::one();
                *block.at_mut(r, x * n + r) += BigInt::one();
            }
            acc.push(&block);
        }
    }
    let z1 = kernel_basis(&acc.finish());

    let mut b1 = IntMat::zero(nvars, n);
    for x in 0..g {
        for r in 0..n {
            for c in 0..n {
                let mut v = acts[x].at(r, c).clone();
                if r == c {
                    v -= BigInt::one();
                }
                *b1.at_mut(x * n + r, c) = v;
            }
        }
    }
    let in_z1 = solve_right(&z1, &b1).expect("coboundaries are cocycles");
    quotient(z1.cols(), &in_z1).expect("ambient rank matches by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::in_span;

    fn lattice(rank: usize, gens: &[IntMat]) -> GLattice {
        let g = MatGroup::close(rank, gens.to_vec(), 100_000).unwrap();
        GLattice::standard(Arc::new(g))
    }

    fn sign_flip() -> IntMat {
        IntMat::from_i64_rows(&[&[-1]])
    }

    fn swap2() -> IntMat {
        IntMat::from_i64_rows(&[&[0, 1], &[1, 0]])
    }

    #[test]
    fn invariants_examples() {
        // trivial group: everything is invariant
        let l = lattice(2, &[]);
        assert_eq!(l.invariants().cols(), 2);

        // sign flip: nothing is invariant
        let l = lattice(1, &[sign_flip()]);
        assert_eq!(l.invariants().cols(), 0);

        // swap on Z^2: invariants are the diagonal (1,1)
        let l = lattice(2, &[swap2()]);
        let inv = l.invariants();
        assert_eq!(inv.cols(), 1);
        assert!(in_span(&inv, &IntMat::col_from_i64(&[1, 1])));

        // invariants really are fixed by every element of the closure
        let rot = IntMat::from_i64_rows(&[&[0, -1], &[1, 0]]);
        let l = lattice(2, &[rot, swap2()]);
        let inv = l.invariants();
        for i in 0..l.group().order() {
            assert_eq!(l.action_of(i).mul(&inv), inv);
        }
    }

    #[test]
    fn h1_of_trivial_group_vanishes() {
        let l = lattice(3, &[]);
        assert!(l.h1().is_trivial());
    }

    #[test]
    fn h1_sign_action_is_z2() {
        let l = lattice(1, &[sign_flip()]);
        let data = l.h1_detailed();
        assert_eq!(data.h1.to_string(), "Z/2");
        assert_eq!(data.z1_rank, 1);
        assert_eq!(data.b1_rank, 1);
    }

    #[test]
    fn h1_of_regular_representation_vanishes() {
        // Z/2 on Z[Z/2]: induced module, so H^1 = 0
        let l = lattice(2, &[swap2()]);
        assert!(l.h1().is_trivial());

        // Z/3 on Z[Z/3]
        let rot3 = IntMat::from_i64_rows(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]);
        let l = lattice(3, &[rot3]);
        assert!(l.h1().is_trivial());
    }

    #[test]
    fn h1_of_diagonal_signs() {
        // Z/2 acting by -1 on Z^2: H^1 = (Z/2)^2
        let l = lattice(2, &[IntMat::diag_from_i64(&[-1, -1])]);
        assert_eq!(l.h1().to_string(), "Z/2 x Z/2");
    }

    #[test]
    fn h1_cyclic_examples() {
        // trivial action of Z/2 on Z: Hom(Z/2, Z) = 0
        assert!(h1_cyclic(&IntMat::identity(1), 2).unwrap().is_trivial());

        // sign action: Z/2
        assert_eq!(h1_cyclic(&sign_flip(), 2).unwrap().to_string(), "Z/2");

        // the anti-diagonal involution has ker(norm) = im(sigma - 1)
        let anti = IntMat::from_i64_rows(&[&[0, -1], &[-1, 0]]);
        assert!(h1_cyclic(&anti, 2).unwrap().is_trivial());

        // stated order must be a period of the matrix
        assert!(matches!(
            h1_cyclic(&IntMat::from_i64_rows(&[&[1, 1], &[0, 1]]), 2),
            Err(Error::NotPeriodic { order: 2 })
        ));
        // any multiple of the true order is accepted
        assert_eq!(h1_cyclic(&sign_flip(), 4).unwrap().to_string(), "Z/2");
    }

    #[test]
    fn h1_agrees_with_cyclic_formula() {
        let cases: Vec<(IntMat, usize)> = vec![
            (sign_flip(), 2),
            (swap2(), 2),
            (IntMat::from_i64_rows(&[&[0, -1], &[1, 0]]), 4),
            (IntMat::from_i64_rows(&[&[0, -1], &[1, -1]]), 3),
            (IntMat::from_i64_rows(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]), 3),
            (IntMat::diag_from_i64(&[-1, -1, 1]), 2),
        ];
        for (sigma, order) in cases {
            let l = lattice(sigma.rows(), &[sigma.clone()]);
            assert_eq!(l.group().order(), order);
            assert_eq!(l.h1(), h1_cyclic(&sigma, order).unwrap(), "mismatch for {sigma:?}");
        }
    }

    #[test]
    fn h1_agrees_with_bar_complex() {
        let s12 = IntMat::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        let s23 = IntMat::from_i64_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        let cases: Vec<GLattice> = vec![
            lattice(1, &[sign_flip()]),
            lattice(2, &[IntMat::diag_from_i64(&[-1, -1])]),
            lattice(3, &[s12.clone(), s23.clone()]),
            lattice(2, &[IntMat::from_i64_rows(&[&[0, -1], &[1, -1]]), swap2()]),
            lattice(2, &[IntMat::from_i64_rows(&[&[0, -1], &[1, 0]]),
                         IntMat::from_i64_rows(&[&[1, 0], &[0, -1]])]),
        ];
        for l in cases {
            assert_eq!(l.h1(), bar_h1(&l), "oracle mismatch at order {}", l.group().order());
        }
    }

    #[test]
    fn h1_invariant_under_conjugation() {
        // S3 standard module, conjugated by a unimodular change of basis
        let a = IntMat::from_i64_rows(&[&[0, -1], &[1, -1]]);
        let b = swap2();
        let t = IntMat::from_i64_rows(&[&[2, 1], &[1, 1]]);
        let ti = solve_right(&t, &IntMat::identity(2)).unwrap();
        let conj = |m: &IntMat| t.mul(m).mul(&ti);
        let l = lattice(2, &[a.clone(), b.clone()]);
        let lc = lattice(2, &[conj(&a), conj(&b)]);
        assert_eq!(l.h1(), lc.h1());
    }

    #[test]
    fn h1_order_divides_group_order_power() {
        let rot4 = IntMat::from_i64_rows(&[&[0, -1], &[1, 0]]);
        let mirror = IntMat::from_i64_rows(&[&[1, 0], &[0, -1]]);
        let l = lattice(2, &[rot4, mirror]);
        let order = l.h1().order().expect("H^1 of a finite group is finite");
        let bound: BigInt =
            (0..l.rank()).fold(BigInt::one(), |acc, _| acc * l.group().order());
        assert!((bound % order).is_zero());
    }

    #[test]
    fn with_action_checks_relations() {
        // s12, s23 generate S3; sending both to -1 on Z is the sign
        // character: consistent
        let s12 = IntMat::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        let s23 = IntMat::from_i64_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        let g = Arc::new(MatGroup::close(3, vec![s12, s23], 100).unwrap());
        let ok = GLattice::with_action(g.clone(), 1, vec![sign_flip(), sign_flip()]);
        assert!(ok.is_ok());

        // sending one transposition to -1 and the other to +1 violates the
        // braid relation (s12 s23)^3 = 1
        let bad = GLattice::with_action(g, 1, vec![sign_flip(), IntMat::identity(1)]);
        assert!(matches!(bad, Err(Error::InvalidAction)));
    }

    #[test]
    fn restriction_to_cyclic_subgroup() {
        let s12 = IntMat::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]);
        let s23 = IntMat::from_i64_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        let l = lattice(3, &[s12, s23]);
        let three_cycle = (0..6)
            .find(|&i| l.group().element_order(i) == 3)
            .expect("S3 has an element of order 3");
        let r = l.restrict(&[three_cycle], 100).unwrap();
        assert_eq!(r.group().order(), 3);
        assert!(r.h1().is_trivial());
        assert_eq!(r.h1(), h1_cyclic(&l.group().element(three_cycle), 3).unwrap());

        assert!(matches!(
            l.restrict(&[99], 100),
            Err(Error::IndexOutOfRange { index: 99, order: 6 })
        ));
    }

    #[test]
    fn permutation_basis_detection() {
        let rot3 = IntMat::from_i64_rows(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]);
        let l = lattice(3, &[rot3]);
        let cert = l
            .permutation_basis_certificate(&IntMat::identity(3), 5)
            .unwrap()
            .expect("standard basis is permuted");
        assert_eq!(cert, vec![vec![1, 2, 0]]);

        // sign action sends e1 to -e1: not a permutation of the basis
        let l = lattice(1, &[sign_flip()]);
        assert!(l.permutation_basis_certificate(&IntMat::identity(1), 3).unwrap().is_none());

        // p dividing the determinant disqualifies the basis
        let l = lattice(2, &[swap2()]);
        let doubled = IntMat::diag_from_i64(&[2, 2]);
        assert!(l.permutation_basis_certificate(&doubled, 2).unwrap().is_none());
        assert!(l
            .permutation_basis_certificate(&IntMat::from_i64_rows(&[&[1, 1], &[1, 1]]), 3)
            .unwrap()
            .is_none());
    }

    #[test]
    fn direct_sum_adds_h1() {
        let a = lattice(1, &[sign_flip()]);
        let b = lattice(1, &[sign_flip()]);
        let sum = a.direct_sum(&b).unwrap();
        assert_eq!(sum.rank(), 2);
        assert_eq!(sum.h1().to_string(), "Z/2 x Z/2");

        let c = lattice(2, &[swap2()]);
        assert!(matches!(a.direct_sum(&c), Err(Error::GroupMismatch)));
    }
}
