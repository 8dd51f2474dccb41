//! Finite groups of integer matrices, built by closure from generators.
//!
//! A [`MatGroup`] is the multiplicative closure of finitely many unimodular
//! integer matrices. Closure is breadth-first, so the element order is
//! deterministic: the identity first, then products in discovery order with
//! generators applied on the right. Elements are stored in a compact
//! canonical byte encoding and decoded on demand, which keeps even the
//! 51840-element Weyl group of a degree-3 del Pezzo surface affordable.

use std::collections::HashMap;

use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::linalg::{det, IntMat};

/// Finite subgroup of `GL_n(Z)` given by its full element list.
#[derive(Clone, Debug)]
pub struct MatGroup {
    rank: usize,
    generators: Vec<IntMat>,
    elems: Vec<Box<[u8]>>,
    index: HashMap<Box<[u8]>, usize>,
    /// discovery edge of element i > 0: (parent, generator) with
    /// elems[i] = elems[parent] * generators[generator]
    parent: Vec<(usize, usize)>,
}

impl MatGroup {
    /// Multiplicative closure of `generators` inside `GL_rank(Z)`.
    ///
    /// Fails with [`Error::NotInvertible`] if a generator has determinant
    /// other than +-1, and with [`Error::GroupTooLarge`] as soon as the
    /// closure would exceed `cap` elements. An empty generator list yields
    /// the trivial group.
    pub fn close(rank: usize, generators: Vec<IntMat>, cap: usize) -> Result<Self> {
        for g in &generators {
            if !g.is_square() || g.rows() != rank {
                return Err(Error::DimensionMismatch(format!(
                    "generator is {}x{}, expected {}x{}",
                    g.rows(),
                    g.cols(),
                    rank,
                    rank
                )));
            }
            let d = det(g)?;
            if !d.abs().is_one() {
                return Err(Error::NotInvertible { det: d.to_string() });
            }
        }

        let identity = IntMat::identity(rank);
        let mut elems: Vec<Box<[u8]>> = vec![identity.canonical_bytes().into()];
        let mut index = HashMap::new();
        index.insert(elems[0].clone(), 0usize);
        let mut parent = vec![(usize::MAX, usize::MAX)];

        let mut head = 0;
        while head < elems.len() {
            let e = IntMat::from_canonical_bytes(&elems[head]);
            for (s, g) in generators.iter().enumerate() {
                let p = e.mul(g);
                let key: Box<[u8]> = p.canonical_bytes().into();
                if !index.contains_key(&key) {
                    if elems.len() >= cap {
                        return Err(Error::GroupTooLarge { cap });
                    }
                    index.insert(key.clone(), elems.len());
                    elems.push(key);
                    parent.push((head, s));
                }
            }
            head += 1;
        }
        Ok(MatGroup { rank, generators, elems, index, parent })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.elems.len()
    }

    pub fn generators(&self) -> &[IntMat] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// Matrix of element `i` (BFS order; element 0 is the identity).
    pub fn element(&self, i: usize) -> IntMat {
        IntMat::from_canonical_bytes(&self.elems[i])
    }

    /// Index of the matrix `m` in the closure, if present.
    pub fn index_of(&self, m: &IntMat) -> Option<usize> {
        self.index.get(m.canonical_bytes().as_slice()).copied()
    }

    /// Index of generator `s` viewed as a group element.
    pub fn generator_index(&self, s: usize) -> usize {
        self.index_of(&self.generators[s]).expect("generator lies in its own closure")
    }

    /// Discovery edge `(parent, generator)` of a non-identity element, with
    /// `element(i) = element(parent) * generators[generator]`.
    pub fn parent_edge(&self, i: usize) -> Option<(usize, usize)> {
        (i > 0).then(|| self.parent[i])
    }

    /// A word in the generators whose product (left to right) is element `i`.
    /// The identity gets the empty word.
    pub fn word(&self, i: usize) -> Vec<usize> {
        let mut w = Vec::new();
        let mut cur = i;
        while cur != 0 {
            let (p, s) = self.parent[cur];
            w.push(s);
            cur = p;
        }
        w.reverse();
        w
    }

    /// Index of `element(i) * element(j)`.
    pub fn mult(&self, i: usize, j: usize) -> usize {
        let p = self.element(i).mul(&self.element(j));
        self.index_of(&p).expect("closure is closed under multiplication")
    }

    /// Index of the inverse of element `i`.
    pub fn inverse(&self, i: usize) -> usize {
        // walk i, i^2, ...; when i^k hits the identity, i^(k-1) is the inverse
        let mut cur = i;
        let mut prev = 0;
        while cur != 0 {
            prev = cur;
            cur = self.mult(cur, i);
        }
        debug_assert_eq!(self.mult(prev, i), 0);
        prev
    }

    /// Multiplicative order of element `i`.
    pub fn element_order(&self, i: usize) -> usize {
        if i == 0 {
            return 1;
        }
        let mut cur = i;
        let mut ord = 1;
        while cur != 0 {
            cur = self.mult(cur, i);
            ord += 1;
        }
        ord
    }

    /// Indices of the subgroup generated by the listed elements.
    pub fn subgroup_closure(&self, gens: &[usize]) -> Result<Vec<usize>> {
        for &g in gens {
            if g >= self.order() {
                return Err(Error::IndexOutOfRange { index: g, order: self.order() });
            }
        }
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut list = vec![0usize];
        let mut head = 0;
        while head < list.len() {
            let e = list[head];
            for &g in gens {
                let p = self.mult(e, g);
                if !seen[p] {
                    seen[p] = true;
                    list.push(p);
                }
            }
            head += 1;
        }
        Ok(list)
    }

    /// Generator indices (as elements of `self`) of a Sylow `p`-subgroup.
    ///
    /// The subgroup is grown from an element of order `p` by repeatedly
    /// adjoining a normalising element of `p`-power order, which always
    /// exists while the subgroup is smaller than a full Sylow subgroup.
    /// Returns the chosen generators' element indices; empty when `p` does
    /// not divide the group order.
    pub fn sylow_generators(&self, p: usize) -> Result<Vec<usize>> {
        if p < 2 {
            return Err(Error::BadInput(format!("{p} is not a prime")));
        }
        let mut target = 1usize;
        {
            let mut n = self.order();
            while n % p == 0 {
                n /= p;
                target *= p;
            }
        }
        if target == 1 {
            return Ok(Vec::new());
        }

        // elements of p-power order, by index; orders computed once
        let mut p_elements = Vec::new();
        for i in 1..self.order() {
            let mut ord = self.element_order(i);
            while ord % p == 0 {
                ord /= p;
            }
            if ord == 1 {
                p_elements.push(i);
            }
        }

        // seed: the first element of p-power order
        let first = *p_elements.first().expect("p divides the order, so a p-element exists");
        let mut gens = vec![first];
        let mut members = self.subgroup_closure(&gens)?;
        while members.len() < target {
            let in_subgroup = {
                let mut flags = vec![false; self.order()];
                for &m in &members {
                    flags[m] = true;
                }
                flags
            };
            let mut grown = false;
            for &g in &p_elements {
                if in_subgroup[g] {
                    continue;
                }
                let gi = self.inverse(g);
                let normalises = members.iter().all(|&h| in_subgroup[self.mult(self.mult(g, h), gi)]);
                if !normalises {
                    continue;
                }
                let mut extended = gens.clone();
                extended.push(g);
                let closure = self.subgroup_closure(&extended)?;
                if target % closure.len() == 0 && closure.len() > members.len() {
                    gens = extended;
                    members = closure;
                    grown = true;
                    break;
                }
            }
            assert!(grown, "a p-subgroup below Sylow order always has a larger normaliser");
        }
        Ok(gens)
    }
}
