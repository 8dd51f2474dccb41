//! The acceptance battery: a fixed manifest of named checks covering the
//! headline computations of the crate, run in a deterministic order with
//! deterministic results.
//!
//! Checks are grouped into numbered criteria (the groups a release must
//! pass in full).  Expected values come from three kinds of sources:
//! `tabulated` constants, frozen independent `oracle`s (including a full
//! 28 x 28 matrix fixture), and internal `consistency` conditions between
//! two ways of computing the same thing.

use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::chatelet::{
    build_filtration, odd_block_witness, sym2_h1_check, symmetric_block_check, ChateletSpec,
    Factor,
};
use crate::delpezzo::{obstruction_report, sylow_order_check, DelPezzoPic};
use crate::error::Result;
use crate::group::MatGroup;
use crate::lattice::{bar_h1, h1_cyclic, GLattice};
use crate::linalg::{det, kernel_basis, quotient, snf, IntMat};
use crate::multilinear::Sym2Basis;
use crate::report::{Check, CheckStatus, ExpectedSource, Report};

/// Frozen expected value of the degree-3 mixed-basis matrix: row 0 is
/// `-L`, rows 1..=27 are the squares of the 27 lines, all written in the
/// mixed tensor basis.  The library recomputes the matrix from scratch;
/// this fixture pins every entry.
pub const MIXED_BASIS_MATRIX: [[i64; 28]; 28] = [
    [-1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [4, 0, 1, 1, 1, 1, 1, 0, 4, 4, 4, 4, 4, 0, 0, 0, 0, 0, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2],
    [4, 1, 0, 1, 1, 1, 1, 4, 0, 4, 4, 4, 4, 0, 2, 2, 2, 2, 0, 0, 0, 0, 2, 2, 2, 2, 2, 2],
    [4, 1, 1, 0, 1, 1, 1, 4, 4, 0, 4, 4, 4, 2, 0, 2, 2, 2, 0, 2, 2, 2, 0, 0, 0, 2, 2, 2],
    [4, 1, 1, 1, 0, 1, 1, 4, 4, 4, 0, 4, 4, 2, 2, 0, 2, 2, 2, 0, 2, 2, 0, 2, 2, 0, 0, 2],
    [4, 1, 1, 1, 1, 0, 1, 4, 4, 4, 4, 0, 4, 2, 2, 2, 0, 2, 2, 2, 0, 2, 2, 0, 2, 0, 2, 0],
    [4, 1, 1, 1, 1, 1, 0, 4, 4, 4, 4, 4, 0, 2, 2, 2, 2, 0, 2, 2, 2, 0, 2, 2, 0, 2, 0, 0],
    [1, 1, 1, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 1, 0, 0, 0, 2, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 1, 0, 0, 2, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 1, 0, 2, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 0, 1, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 1, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 1, 0, 0, 0, 2, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 1, 0, 0, 2, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 0, 1, 0, 2, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 1, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 1, 0, 0, 0, 2, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 0, 1, 0, 0, 2, 0, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0, 0],
    [1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0, 0],
    [1, 0, 0, 0, 1, 0, 1, 0, 0, 0, 2, 0, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2, 0],
    [1, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2],
];

/// Titles of the eleven acceptance criteria, indexed by criterion - 1.
pub const CRITERION_TITLES: [&str; 11] = [
    "mixed-basis determinant 5*2^27 with sign control",
    "six-L identity in the symmetric square",
    "permutation basis mod 3 and Sylow-3 cohomology",
    "cup values on canonical and line classes",
    "exceptional class and root counts",
    "reflection group orders by enumeration",
    "Sylow valuations versus the symmetric group",
    "conic-bundle symmetric-square vanishing end-to-end",
    "first-cohomology oracle equivalence",
    "kernel versus symmetric-square order identity",
    "integer linear algebra property suite",
];

#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub name: &'static str,
    pub criterion: usize,
    pub source: ExpectedSource,
}

/// The fixed check manifest; report order follows this list.
pub const MANIFEST: [CheckSpec; 20] = [
    CheckSpec { name: "delpezzo3.matrix_fixture", criterion: 1, source: ExpectedSource::Oracle },
    CheckSpec { name: "delpezzo3.det", criterion: 1, source: ExpectedSource::Tabulated },
    CheckSpec { name: "delpezzo3.det_column_swap", criterion: 1, source: ExpectedSource::Consistency },
    CheckSpec { name: "delpezzo3.identity_6l", criterion: 2, source: ExpectedSource::Tabulated },
    CheckSpec { name: "delpezzo3.perm_basis_mod3", criterion: 3, source: ExpectedSource::Consistency },
    CheckSpec { name: "delpezzo3.sylow3_h1", criterion: 3, source: ExpectedSource::Tabulated },
    CheckSpec { name: "cup.omega_values", criterion: 4, source: ExpectedSource::Tabulated },
    CheckSpec { name: "cup.line_class_value", criterion: 4, source: ExpectedSource::Tabulated },
    CheckSpec { name: "cup.degree6_witnesses", criterion: 4, source: ExpectedSource::Tabulated },
    CheckSpec { name: "counts.exceptional", criterion: 5, source: ExpectedSource::Oracle },
    CheckSpec { name: "counts.roots", criterion: 5, source: ExpectedSource::Oracle },
    CheckSpec { name: "weyl.orders_enumerated", criterion: 6, source: ExpectedSource::Tabulated },
    CheckSpec { name: "sylow.arithmetic", criterion: 7, source: ExpectedSource::Tabulated },
    CheckSpec { name: "chatelet.sym2_vanishing", criterion: 8, source: ExpectedSource::Tabulated },
    CheckSpec { name: "chatelet.filtration", criterion: 8, source: ExpectedSource::Consistency },
    CheckSpec { name: "chatelet.orbit_witnesses", criterion: 8, source: ExpectedSource::Consistency },
    CheckSpec { name: "h1.oracle_equivalence", criterion: 9, source: ExpectedSource::Oracle },
    CheckSpec { name: "h1.permutation_vanishing", criterion: 9, source: ExpectedSource::Oracle },
    CheckSpec { name: "delpezzo.order_identity", criterion: 10, source: ExpectedSource::Consistency },
    CheckSpec { name: "linalg.properties", criterion: 11, source: ExpectedSource::Oracle },
];

/// Sample conic-bundle specs used by the battery: every one satisfies the
/// blockwise-transitivity hypothesis, with total degrees 2 through 6 and
/// subgroup orders up to 8.
pub fn sample_chatelet_specs() -> Vec<(&'static str, ChateletSpec)> {
    vec![
        (
            "single_quadratic",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 2 }],
                gamma_generators: vec![vec![1, 0]],
                sigma_root_perm: vec![0, 1],
            },
        ),
        (
            "two_linear",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 1 }, Factor { id: 2, degree: 1 }],
                gamma_generators: vec![],
                sigma_root_perm: vec![0, 1],
            },
        ),
        (
            "two_quadratics",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 2 }, Factor { id: 2, degree: 2 }],
                gamma_generators: vec![vec![1, 0, 2, 3], vec![0, 1, 3, 2]],
                sigma_root_perm: vec![0, 1, 2, 3],
            },
        ),
        (
            "two_quadratics_twisted",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 2 }, Factor { id: 2, degree: 2 }],
                gamma_generators: vec![vec![1, 0, 2, 3], vec![0, 1, 3, 2]],
                sigma_root_perm: vec![1, 0, 2, 3],
            },
        ),
        (
            "cyclic_quartic",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 4 }],
                gamma_generators: vec![vec![1, 2, 3, 0]],
                sigma_root_perm: vec![0, 1, 2, 3],
            },
        ),
        (
            "biquadratic_quartic",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 4 }],
                gamma_generators: vec![vec![1, 0, 3, 2], vec![2, 3, 0, 1]],
                sigma_root_perm: vec![0, 1, 2, 3],
            },
        ),
        (
            "quadratic_plus_quartic",
            ChateletSpec {
                factors: vec![Factor { id: 1, degree: 2 }, Factor { id: 2, degree: 4 }],
                gamma_generators: vec![vec![1, 0, 2, 3, 4, 5], vec![0, 1, 3, 4, 5, 2]],
                sigma_root_perm: vec![0, 1, 2, 3, 4, 5],
            },
        ),
        (
            "degrees_1_2_3",
            ChateletSpec {
                factors: vec![
                    Factor { id: 1, degree: 1 },
                    Factor { id: 2, degree: 2 },
                    Factor { id: 3, degree: 3 },
                ],
                gamma_generators: vec![vec![0, 2, 1, 3, 4, 5], vec![0, 1, 2, 4, 5, 3]],
                sigma_root_perm: vec![0, 1, 2, 3, 4, 5],
            },
        ),
    ]
}

struct Ctx {
    cap: usize,
    seed: u64,
    dp3: Option<DelPezzoPic>,
    matrix_a: Option<IntMat>,
    w6: Option<Arc<MatGroup>>,
    sym2_w6: Option<GLattice>,
}

impl Ctx {
    fn dp3(&mut self) -> &DelPezzoPic {
        if self.dp3.is_none() {
            self.dp3 = Some(DelPezzoPic::new(3).expect("degree 3 is valid"));
        }
        self.dp3.as_ref().unwrap()
    }

    fn matrix_a(&mut self) -> Result<&IntMat> {
        if self.matrix_a.is_none() {
            self.matrix_a = Some(self.dp3().matrix_a()?);
        }
        Ok(self.matrix_a.as_ref().unwrap())
    }

    fn w6(&mut self) -> Result<Arc<MatGroup>> {
        if self.w6.is_none() {
            let cap = self.cap;
            let g = self.dp3().weyl_group(cap)?;
            self.w6 = Some(Arc::new(g));
        }
        Ok(self.w6.as_ref().unwrap().clone())
    }

    fn sym2_w6(&mut self) -> Result<&GLattice> {
        if self.sym2_w6.is_none() {
            let g = self.w6()?;
            let lat = self.dp3().sym2_lattice(g)?;
            self.sym2_w6 = Some(lat);
        }
        Ok(self.sym2_w6.as_ref().unwrap())
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt)
    }
}

/// Number of entries where the recomputed matrix differs from the frozen
/// fixture.
pub fn fixture_mismatch_count(m: &IntMat) -> usize {
    if m.rows() != 28 || m.cols() != 28 {
        return 28 * 28;
    }
    let mut bad = 0;
    for (i, row) in MIXED_BASIS_MATRIX.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if *m.at(i, j) != BigInt::from(v) {
                bad += 1;
            }
        }
    }
    bad
}

struct Outcome {
    computed: String,
    expected: String,
    pass: bool,
}

fn ok(computed: impl Into<String>, expected: impl Into<String>, pass: bool) -> Result<Outcome> {
    Ok(Outcome { computed: computed.into(), expected: expected.into(), pass })
}

fn run_check(name: &str, ctx: &mut Ctx) -> Result<Outcome> {
    match name {
        "delpezzo3.matrix_fixture" => {
            let bad = fixture_mismatch_count(ctx.matrix_a()?);
            ok(format!("{bad} mismatching entries"), "0 mismatching entries", bad == 0)
        }
        "delpezzo3.det" => {
            let d = det(ctx.matrix_a()?)?;
            let expected = BigInt::from(671_088_640i64); // 5 * 2^27
            ok(d.to_string(), "671088640 up to sign", d.abs() == expected)
        }
        "delpezzo3.det_column_swap" => {
            let a = ctx.matrix_a()?.clone();
            let d = det(&a)?;
            let mut b = a;
            b.swap_cols(0, 1);
            let ds = det(&b)?;
            ok(
                format!("det {d}, after column swap {ds}"),
                "swap flips exactly the sign",
                ds == -d,
            )
        }
        "delpezzo3.identity_6l" => {
            let pic = ctx.dp3();
            let basis = Sym2Basis::new(pic.rank());
            let lhs = pic.vector_l()?.scale(&BigInt::from(6));
            let mut rhs = pic.omega_square().scale(&BigInt::from(5));
            for line in pic.lines27()? {
                rhs = rhs.sub(&basis.square_coords(&line));
            }
            ok(
                if lhs == rhs { "identical vectors" } else { "vectors differ" },
                "6L = 5*(omega.omega) - sum of line squares",
                lhs == rhs,
            )
        }
        "delpezzo3.perm_basis_mod3" => {
            let pic = ctx.dp3();
            let basis = Sym2Basis::new(pic.rank());
            let mut cols = pic.vector_l()?.neg();
            for line in pic.lines27()? {
                cols = cols.hstack(&basis.square_coords(&line));
            }
            let lat = ctx.sym2_w6()?;
            let cert = lat.permutation_basis_certificate(&cols, 3)?;
            ok(
                if cert.is_some() { "permutation certificate found" } else { "not a permuted basis" },
                "all generators permute {-L, line squares}; 3 does not divide the determinant",
                cert.is_some(),
            )
        }
        "delpezzo3.sylow3_h1" => {
            let w6 = ctx.w6()?;
            let gens = w6.sylow_generators(3)?;
            let cap = ctx.cap;
            let sub = ctx.sym2_w6()?.restrict(&gens, cap)?;
            let order = sub.group().order();
            let h1 = sub.h1();
            ok(
                format!("subgroup order {order}, H1 = {h1}"),
                "subgroup order 81, trivial 3-part",
                order == 81 && h1.p_part_is_trivial(3),
            )
        }
        "cup.omega_values" => {
            let mut got = Vec::new();
            let mut pass = true;
            for d in 1..=4usize {
                let pic = DelPezzoPic::new(d)?;
                let v = pic.cup(&pic.omega_square())?;
                pass &= v == BigInt::from(d);
                got.push(format!("d={d}: {v}"));
            }
            ok(got.join(", "), "cup(omega.omega) = d for d = 1..4", pass)
        }
        "cup.line_class_value" => {
            let pic = ctx.dp3();
            let v = pic.cup(&pic.vector_l()?)?;
            ok(v.to_string(), "7", v == BigInt::from(7))
        }
        "cup.degree6_witnesses" => {
            let pic = DelPezzoPic::new(6)?;
            let basis = Sym2Basis::new(4);
            let e = |i: usize| {
                let mut v = IntMat::zero(4, 1);
                v.set_i64(i, 0, 1);
                v
            };
            let l0 = e(0);
            let mut w1 = IntMat::zero(basis.rank(), 1);
            for i in 1..=3 {
                for j in i + 1..=3 {
                    w1 = w1.add(&basis.pair_coords(&l0.sub(&e(i)), &l0.sub(&e(j))));
                }
            }
            let w2 = basis.pair_coords(&l0, &pic.omega().add(&l0));
            let v1 = pic.cup(&w1)?;
            let v2 = pic.cup(&w2)?;
            ok(
                format!("cup(w1) = {v1}, cup(w2) = {v2}"),
                "3 and -2",
                v1 == BigInt::from(3) && v2 == BigInt::from(-2),
            )
        }
        "counts.exceptional" => {
            let expected = [(3usize, 6usize), (4, 10), (5, 16), (6, 27)];
            let mut got = Vec::new();
            let mut pass = true;
            for (r, want) in expected {
                let n = DelPezzoPic::new(9 - r)?.exceptional_classes().len();
                pass &= n == want;
                got.push(format!("r={r}: {n}"));
            }
            ok(got.join(", "), "6, 10, 16, 27", pass)
        }
        "counts.roots" => {
            let expected = [(3usize, 8usize), (4, 20), (5, 40), (6, 72)];
            let mut got = Vec::new();
            let mut pass = true;
            for (r, want) in expected {
                let n = DelPezzoPic::new(9 - r)?.roots()?.len();
                pass &= n == want;
                got.push(format!("r={r}: {n}"));
            }
            ok(got.join(", "), "8, 20, 40, 72", pass)
        }
        "weyl.orders_enumerated" => {
            let o3 = DelPezzoPic::new(6)?.weyl_group(ctx.cap)?.order();
            let o5 = DelPezzoPic::new(4)?.weyl_group(ctx.cap)?.order();
            let o6 = ctx.w6()?.order();
            ok(
                format!("r=3: {o3}, r=5: {o5}, r=6: {o6}"),
                "12, 1920, 51840",
                o3 == 12 && o5 == 1920 && o6 == 51840,
            )
        }
        "sylow.arithmetic" => {
            // (degree, p, whether the valuations must agree)
            let table = [
                (4usize, 3usize, true),
                (4, 5, true),
                (4, 2, false),
                (3, 5, true),
                (3, 7, true),
                (3, 3, false),
                (3, 2, false),
                (2, 5, true),
                (2, 7, true),
                (2, 3, false),
                (2, 2, false),
                (1, 7, true),
                (1, 5, false),
                (1, 3, false),
                (1, 2, false),
            ];
            let mut bad = Vec::new();
            for (d, p, want) in table {
                if sylow_order_check(d, p)? != want {
                    bad.push(format!("d={d}, p={p}"));
                }
            }
            ok(
                if bad.is_empty() { "all 15 pairs as tabulated".to_string() } else { bad.join("; ") },
                "equal valuations exactly off the excluded primes",
                bad.is_empty(),
            )
        }
        "chatelet.sym2_vanishing" => {
            let mut bad = Vec::new();
            for (tag, spec) in sample_chatelet_specs() {
                let r = sym2_h1_check(&spec, ctx.cap)?;
                let good = r.hypotheses_hold
                    && r.subgroup_h1_trivial
                    && r.agree
                    && r.h1_direct.is_trivial()
                    && r.h1_via_quotient.is_trivial();
                if !good {
                    bad.push(format!("{tag}: direct {}, quotient {}", r.h1_direct, r.h1_via_quotient));
                }
            }
            ok(
                if bad.is_empty() {
                    format!("{} specs, all trivial by both routes", sample_chatelet_specs().len())
                } else {
                    bad.join("; ")
                },
                "trivial H1 by both routes on every sample spec",
                bad.is_empty(),
            )
        }
        "chatelet.filtration" => {
            let mut bad = Vec::new();
            for (tag, spec) in sample_chatelet_specs() {
                let f = build_filtration(&spec, ctx.cap)?;
                let total: usize = f.steps.iter().map(|s| s.basis.cols()).sum();
                let good = f.stable_partial_sums
                    && f.all_quotients_trivial
                    && total == f.invariant_rank
                    && f.steps.len() == 6;
                if !good {
                    bad.push(tag.to_string());
                }
            }
            ok(
                if bad.is_empty() { "six stable steps, trivial quotients, full rank".to_string() } else { bad.join("; ") },
                "every sample spec filters with trivial step cohomology",
                bad.is_empty(),
            )
        }
        "chatelet.orbit_witnesses" => {
            let mut bad = Vec::new();
            for (tag, spec) in sample_chatelet_specs() {
                for f in &spec.factors {
                    let c = symmetric_block_check(&spec, f.id)?;
                    if !c.divisibility_holds || (f.degree % 2 == 0 && c.witness.is_none()) {
                        bad.push(format!("{tag}: factor {}", f.id));
                    }
                }
                for a in &spec.factors {
                    if a.degree % 2 == 1 {
                        for b in &spec.factors {
                            if b.id != a.id && !odd_block_witness(&spec, a.id, b.id)?.holds {
                                bad.push(format!("{tag}: pair ({}, {})", a.id, b.id));
                            }
                        }
                    }
                }
            }
            ok(
                if bad.is_empty() { "all witnesses found".to_string() } else { bad.join("; ") },
                "a stable orbit witness for every applicable factor and pair",
                bad.is_empty(),
            )
        }
        "h1.oracle_equivalence" => h1_oracle_equivalence(ctx),
        "h1.permutation_vanishing" => h1_permutation_vanishing(ctx),
        "delpezzo.order_identity" => order_identity_random_subgroups(ctx),
        "linalg.properties" => linalg_property_suite(ctx),
        other => ok(format!("unknown check {other}"), "known check name", false),
    }
}

// ---------------------------------------------------------------------
// randomized suites

fn rand_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> IntMat {
    let mut m = IntMat::zero(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set_i64(i, j, rng.gen_range(-bound..=bound));
        }
    }
    m
}

fn rand_unimodular(rng: &mut ChaCha8Rng, n: usize) -> IntMat {
    let mut u = IntMat::identity(n);
    if n < 2 {
        return u;
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let c = BigInt::from(rng.gen_range(-2i64..=2));
        for k in 0..n {
            let add = &c * u.at(i, k);
            *u.at_mut(j, k) += add;
        }
        if rng.gen_bool(0.3) {
            u.swap_rows(i, j);
        }
    }
    u
}

/// Conjugates by a random unimodular matrix without ever leaving the
/// integers: repeatedly applies `E . M . E^{-1}` for elementary `E`.
fn conjugate_randomly(rng: &mut ChaCha8Rng, mut m: IntMat) -> IntMat {
    let n = m.rows();
    if n < 2 {
        return m;
    }
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        while j == i {
            j = rng.gen_range(0..n);
        }
        let c = BigInt::from(rng.gen_range(-2i64..=2));
        // rows: row_j += c * row_i
        for k in 0..n {
            let add = &c * m.at(i, k);
            *m.at_mut(j, k) += add;
        }
        // columns: col_i -= c * col_j
        for k in 0..n {
            let sub = &c * m.at(k, j);
            *m.at_mut(k, i) -= sub;
        }
    }
    m
}

/// Small-order building blocks: (matrix, multiplicative order).
fn cyclic_atoms() -> Vec<(IntMat, usize)> {
    vec![
        (IntMat::from_i64_rows(&[&[1]]), 1),
        (IntMat::from_i64_rows(&[&[-1]]), 2),
        (IntMat::from_i64_rows(&[&[0, 1], &[1, 0]]), 2),
        (IntMat::from_i64_rows(&[&[0, -1], &[1, -1]]), 3),
        (IntMat::from_i64_rows(&[&[0, -1], &[1, 0]]), 4),
        (IntMat::from_i64_rows(&[&[0, -1], &[1, 1]]), 6),
    ]
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn h1_oracle_equivalence(ctx: &mut Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng(0x6f7261636c65);
    let atoms = cyclic_atoms();
    let mut matches = 0usize;
    let mut total = 0usize;
    let mut failures = Vec::new();

    // Cyclic modules: one generator assembled from blocks, then hidden by
    // an integral change of basis.  Three oracles must agree.
    for case in 0..30 {
        let mut m = atoms[rng.gen_range(0..atoms.len())].0.clone();
        let mut order = atoms.iter().find(|(a, _)| *a == m).map(|(_, o)| *o).unwrap();
        while m.rows() < 4 && rng.gen_bool(0.6) {
            let (a, o) = &atoms[rng.gen_range(0..atoms.len())];
            if m.rows() + a.rows() > 4 {
                break;
            }
            m = m.direct_sum(a);
            order = lcm(order, *o);
        }
        let m = conjugate_randomly(&mut rng, m);
        let group = MatGroup::close(m.rows(), vec![m.clone()], 16)?;
        let lat = GLattice::standard(Arc::new(group));
        let direct = lat.h1();
        let bar = bar_h1(&lat);
        let cyc = h1_cyclic(&m, order)?;
        total += 1;
        if direct == bar && direct == cyc {
            matches += 1;
        } else {
            failures.push(format!("cyclic case {case}: {direct} vs bar {bar} vs cyclic {cyc}"));
        }
    }

    // Small non-cyclic templates, likewise hidden by conjugation.
    let templates: Vec<Vec<IntMat>> = vec![
        vec![
            IntMat::from_i64_rows(&[&[-1, 0], &[0, 1]]),
            IntMat::from_i64_rows(&[&[1, 0], &[0, -1]]),
        ],
        vec![
            IntMat::from_i64_rows(&[&[0, -1], &[1, -1]]),
            IntMat::from_i64_rows(&[&[0, 1], &[1, 0]]),
        ],
        vec![
            IntMat::from_i64_rows(&[&[0, -1], &[1, 0]]),
            IntMat::from_i64_rows(&[&[0, 1], &[1, 0]]),
        ],
        vec![
            IntMat::from_i64_rows(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]),
            IntMat::from_i64_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, 1, 0]]),
        ],
    ];
    for case in 0..20 {
        let t = &templates[case % templates.len()];
        let pad = rng.gen_range(0..=(4 - t[0].rows()).min(2));
        let gens_padded: Vec<IntMat> =
            t.iter().map(|g| g.direct_sum(&IntMat::identity(pad))).collect();
        // one shared change of basis for all generators
        let n = gens_padded[0].rows();
        let mut ops = Vec::new();
        for _ in 0..3 * n {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n);
            while j == i {
                j = rng.gen_range(0..n);
            }
            ops.push((i, j, rng.gen_range(-2i64..=2)));
        }
        let conj = |mut m: IntMat| {
            for &(i, j, c) in &ops {
                let c = BigInt::from(c);
                for k in 0..n {
                    let add = &c * m.at(i, k);
                    *m.at_mut(j, k) += add;
                }
                for k in 0..n {
                    let sub = &c * m.at(k, j);
                    *m.at_mut(k, i) -= sub;
                }
            }
            m
        };
        let gens: Vec<IntMat> = gens_padded.into_iter().map(conj).collect();
        let group = MatGroup::close(n, gens, 16)?;
        let lat = GLattice::standard(Arc::new(group));
        let direct = lat.h1();
        let bar = bar_h1(&lat);
        total += 1;
        if direct == bar {
            matches += 1;
        } else {
            failures.push(format!("template case {case}: {direct} vs bar {bar}"));
        }
    }

    ok(
        if failures.is_empty() { format!("{matches}/{total} agree") } else { failures.join("; ") },
        "50/50 agree",
        matches == total && total == 50,
    )
}

fn h1_permutation_vanishing(ctx: &mut Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng(0x7065726d);
    let mut trivial = 0usize;
    for _ in 0..20 {
        let n = rng.gen_range(2..=4usize);
        let num_gens = rng.gen_range(1..=2usize);
        let gens: Vec<IntMat> = (0..num_gens)
            .map(|_| {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let mut m = IntMat::zero(n, n);
                for (j, &i) in perm.iter().enumerate() {
                    m.set_i64(i, j, 1);
                }
                m
            })
            .collect();
        let group = MatGroup::close(n, gens, 64)?;
        if GLattice::standard(Arc::new(group)).h1().is_trivial() {
            trivial += 1;
        }
    }
    ok(
        format!("{trivial}/20 trivial"),
        "20/20 trivial",
        trivial == 20,
    )
}

fn order_identity_random_subgroups(ctx: &mut Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng(0x737562);
    let w_small: Vec<(usize, Arc<MatGroup>)> = [6usize, 5]
        .iter()
        .map(|&d| {
            let pic = DelPezzoPic::new(d)?;
            Ok((d, Arc::new(pic.weyl_group(ctx.cap)?)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut holds = 0usize;
    let mut bad = Vec::new();
    for case in 0..20 {
        let (d, w) = &w_small[case % 2];
        let k = rng.gen_range(1..=2usize);
        let gens: Vec<IntMat> = (0..k)
            .map(|_| w.element(rng.gen_range(0..w.order())))
            .collect();
        let rep = obstruction_report(*d, Some(gens), ctx.cap)?;
        if rep.order_identity {
            holds += 1;
        } else {
            bad.push(format!(
                "case {case}: d={d}, |G|={}, index {}, H1(sym2) {}, H1(ker) {}",
                rep.group_order, rep.cup_index, rep.h1_sym2, rep.h1_kernel
            ));
        }
    }
    ok(
        if bad.is_empty() { format!("{holds}/20 hold") } else { bad.join("; ") },
        "20/20 hold",
        holds == 20,
    )
}

fn linalg_property_suite(ctx: &mut Ctx) -> Result<Outcome> {
    let mut rng = ctx.rng(0x6c696e616c67);
    let mut failures = Vec::new();
    for case in 0..200usize {
        match case % 4 {
            0 => {
                // Smith form axioms.
                let rows = rng.gen_range(1..=5);
                let cols = rng.gen_range(1..=5);
                let a = rand_mat(&mut rng, rows, cols, 9);
                let sf = snf(&a);
                let mut good = sf.u.mul(&a).mul(&sf.v) == sf.d;
                good &= det(&sf.u).map(|d| d.abs().is_one()).unwrap_or(false);
                good &= det(&sf.v).map(|d| d.abs().is_one()).unwrap_or(false);
                let diag = sf.diagonal();
                for (i, v) in diag.iter().enumerate() {
                    good &= !v.is_negative();
                    if i + 1 < diag.len() && !v.is_zero() {
                        good &= (&diag[i + 1] % v).is_zero();
                    }
                    if i + 1 < diag.len() && v.is_zero() {
                        good &= diag[i + 1].is_zero();
                    }
                }
                for i in 0..sf.d.rows() {
                    for j in 0..sf.d.cols() {
                        if i != j {
                            good &= sf.d.at(i, j).is_zero();
                        }
                    }
                }
                if !good {
                    failures.push(format!("snf axioms, case {case}"));
                }
            }
            1 => {
                // Determinant multiplicativity.
                let n = rng.gen_range(1..=4);
                let a = rand_mat(&mut rng, n, n, 6);
                let b = rand_mat(&mut rng, n, n, 6);
                if det(&a.mul(&b))? != det(&a)? * det(&b)? {
                    failures.push(format!("det multiplicativity, case {case}"));
                }
            }
            2 => {
                // Kernel: contained in the kernel, and saturated.
                let rows = rng.gen_range(1..=4);
                let cols = rng.gen_range(1..=5);
                let a = rand_mat(&mut rng, rows, cols, 7);
                let k = kernel_basis(&a);
                let mut good = a.mul(&k).is_zero();
                let q = quotient(cols, &k)?;
                good &= q.invariant_factors().is_empty();
                if !good {
                    failures.push(format!("kernel saturation, case {case}"));
                }
            }
            _ => {
                // Quotient type is invariant under unimodular changes on
                // either side.
                let n = rng.gen_range(1..=4);
                let k = rng.gen_range(1..=4);
                let s = rand_mat(&mut rng, n, k, 7);
                let u = rand_unimodular(&mut rng, n);
                let v = rand_unimodular(&mut rng, k);
                let q0 = quotient(n, &s)?;
                let q1 = quotient(n, &u.mul(&s))?;
                let q2 = quotient(n, &s.mul(&v))?;
                if q0 != q1 || q0 != q2 {
                    failures.push(format!("quotient invariance, case {case}"));
                }
            }
        }
    }
    ok(
        if failures.is_empty() { "200/200 pass".to_string() } else { failures.join("; ") },
        "200/200 pass",
        failures.is_empty(),
    )
}

// ---------------------------------------------------------------------

fn selected(name: &str, only: Option<&str>) -> bool {
    match only {
        None => true,
        Some(f) => name == f || name.starts_with(&format!("{f}.")),
    }
}

/// Runs the battery (or the checks selected by the `only` prefix) and
/// returns the report.  Heavy shared state — the big reflection group and
/// its symmetric square — is built once and reused across checks.
pub fn run_battery(cap: usize, seed: u64, only: Option<&str>) -> Report {
    let mut ctx = Ctx { cap, seed, dp3: None, matrix_a: None, w6: None, sym2_w6: None };
    let digest_input = format!("verify-paper cap={cap} seed={seed} only={}", only.unwrap_or("*"));
    let mut report = Report::new(crate::report::sha256_hex(digest_input.as_bytes()));
    for spec in MANIFEST {
        if !selected(spec.name, only) {
            continue;
        }
        let start = Instant::now();
        let (status, computed, expected) = match run_check(spec.name, &mut ctx) {
            Ok(out) => (
                if out.pass { CheckStatus::Pass } else { CheckStatus::Fail },
                out.computed,
                out.expected,
            ),
            Err(e) => (CheckStatus::Fail, format!("error: {e}"), "no error".to_string()),
        };
        report.checks.push(Check {
            name: spec.name.to_string(),
            status,
            computed,
            expected,
            source: spec.source,
            millis: start.elapsed().as_millis(),
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DEFAULT_CAP, DEFAULT_SEED};

    #[test]
    fn manifest_names_are_unique_and_cover_all_criteria() {
        let mut names: Vec<&str> = MANIFEST.iter().map(|c| c.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), MANIFEST.len());
        for c in 1..=CRITERION_TITLES.len() {
            assert!(
                MANIFEST.iter().any(|s| s.criterion == c),
                "criterion {c} has no checks"
            );
        }
        assert!(MANIFEST.iter().all(|s| (1..=11).contains(&s.criterion)));
    }

    #[test]
    fn tampered_fixture_is_detected() {
        let pic = DelPezzoPic::new(3).unwrap();
        let mut a = pic.matrix_a().unwrap();
        assert_eq!(fixture_mismatch_count(&a), 0);
        *a.at_mut(7, 8) += BigInt::from(1);
        assert_eq!(fixture_mismatch_count(&a), 1);
        let wrong_shape = IntMat::identity(3);
        assert_eq!(fixture_mismatch_count(&wrong_shape), 28 * 28);
    }

    #[test]
    fn only_filter_selects_by_prefix() {
        let report = run_battery(DEFAULT_CAP, DEFAULT_SEED, Some("cup"));
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            vec!["cup.omega_values", "cup.line_class_value", "cup.degree6_witnesses"]
        );
        assert!(report.all_passed(), "{}", report.body_json());
    }

    #[test]
    fn fast_criteria_pass_and_are_deterministic() {
        for filter in ["counts", "sylow", "linalg", "delpezzo3.matrix_fixture"] {
            let a = run_battery(DEFAULT_CAP, DEFAULT_SEED, Some(filter));
            assert!(a.all_passed(), "{}", a.body_json());
            let b = run_battery(DEFAULT_CAP, DEFAULT_SEED, Some(filter));
            assert_eq!(a.body_json(), b.body_json());
        }
    }

    #[test]
    fn unknown_check_names_fail_closed() {
        let mut ctx =
            Ctx { cap: DEFAULT_CAP, seed: 0, dp3: None, matrix_a: None, w6: None, sym2_w6: None };
        let out = run_check("nonsense.name", &mut ctx).unwrap();
        assert!(!out.pass);
    }
}
