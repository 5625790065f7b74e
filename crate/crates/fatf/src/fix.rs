//! Fixed subgroups of endomorphisms of `Z^m x F_n`.
//!
//! Two computations are provided. For a stable-letter endomorphism the fixed
//! subgroup is abelian and comes from one integer kernel. For a family of
//! matrix pairs `(Q_j, P_j)` over a given common free part `K`, the fixed
//! subgroup `{ t^a u : u in K, a (I - Q_j) = ab(u) P_j for all j }` reduces
//! to an abelianization preimage inside `K`, which may fail to be finitely
//! generated; the verdict is part of the result.
//!
//! The free-part endomorphisms themselves are never evaluated here: the
//! vector conditions depend only on the matrix pairs, which is what makes
//! the family computation independent of how `K` was obtained.

use num_bigint::BigInt;

use crate::group::{subgroup_basis, FatfElement, SubgroupBasis, TypeIIEndo};
use crate::intlin::{dot, left_kernel, solve_linear, IntMatrix, Lattice};
use crate::stallings::{self, AbelianPreimage, FreeBasis};
use crate::{Error, Result};

/// Verdict of a fixed-subgroup computation.
#[derive(Clone, Debug)]
pub enum FixResult {
    FinitelyGenerated(SubgroupBasis),
    /// Witness: a primitive direction of the free-part coordinate space
    /// along which the constraint lattice has infinite index.
    NotFinitelyGenerated {
        witness: Vec<BigInt>,
    },
}

impl FixResult {
    pub fn is_finitely_generated(&self) -> bool {
        matches!(self, FixResult::FinitelyGenerated(_))
    }

    pub fn basis(&self) -> Option<&SubgroupBasis> {
        match self {
            FixResult::FinitelyGenerated(b) => Some(b),
            FixResult::NotFinitelyGenerated { .. } => None,
        }
    }
}

/// A family of vector constraints `(Q_j, P_j)` together with a free basis of
/// the subgroup `K` on which the word part is allowed to range.
#[derive(Clone, Debug)]
pub struct TypeIFamily {
    m: usize,
    pairs: Vec<(IntMatrix, IntMatrix)>,
    free_part: FreeBasis,
}

impl TypeIFamily {
    pub fn new(m: usize, pairs: Vec<(IntMatrix, IntMatrix)>, free_part: FreeBasis) -> Result<Self> {
        let n = free_part.ambient_alphabet();
        for (q, p) in &pairs {
            if q.rows() != m || q.cols() != m {
                return Err(Error::Dimension("each Q must be m x m".into()));
            }
            if p.rows() != n || p.cols() != m {
                return Err(Error::Dimension("each P must be n x m".into()));
            }
        }
        Ok(TypeIFamily {
            m,
            pairs,
            free_part,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[(IntMatrix, IntMatrix)] {
        &self.pairs
    }

    pub fn free_part(&self) -> &FreeBasis {
        &self.free_part
    }
}

/// Fixed subgroup of a stable-letter endomorphism; always finitely
/// generated (and abelian: every fixed point is `t^a z^k`).
///
/// Such a point is fixed iff `a(Q - I) + k (ab(z) P) = 0` and
/// `a . ell + k (ab(z) . h - 1) = 0`, an integer kernel in `(a, k)`.
pub fn fix_type_ii(e: &TypeIIEndo) -> SubgroupBasis {
    let m = e.m();
    let n = e.n();
    let zab = e.z().abelianize();
    let zp = e.p().left_mul_vec(&zab); // ab(z) * P
    let zh = dot(&zab, e.h()); // ab(z) . h
    let mut system = IntMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            let mut v = e.q().get(i, j).clone();
            if i == j {
                v -= 1;
            }
            system.set(i, j, v);
        }
        system.set(i, m, e.ell()[i].clone());
    }
    for j in 0..m {
        system.set(m, j, zp[j].clone());
    }
    system.set(m, m, zh - 1);

    let kernel = left_kernel(&system);
    let elements: Vec<FatfElement> = kernel
        .basis_rows()
        .into_iter()
        .map(|row| {
            let k = i64::try_from(&row[m]).expect("stable exponent fits in i64");
            FatfElement::new(row[..m].to_vec(), e.z().pow(k))
        })
        .collect();
    subgroup_basis(m, n, &elements)
}

/// Fixed subgroup of the family: elements `t^a u` with `u` in the free part
/// and `a (I - Q_j) = ab(u) P_j` for every pair.
///
/// Stacking the pairs gives one block condition `a A = ab(u) [P_1|..|P_N]`
/// with `A = [(I-Q_1)|..|(I-Q_N)]`; the words admitting a decoration are an
/// abelianization preimage in `K`, each decorated word gets one particular
/// solution (canonicalized later), and the purely abelian part is the left
/// kernel of `A`. An empty family imposes no condition at all.
pub fn fix_type_i_family(family: &TypeIFamily) -> FixResult {
    let m = family.m();
    let free_part = family.free_part();
    let n = free_part.ambient_alphabet();
    let r = free_part.rank();

    let blocks_a: Vec<IntMatrix> = family
        .pairs()
        .iter()
        .map(|(q, _)| IntMatrix::identity(m).add(&q.neg()))
        .collect();
    let blocks_p: Vec<IntMatrix> = family.pairs().iter().map(|(_, p)| p.clone()).collect();
    let a_star = if blocks_a.is_empty() {
        IntMatrix::zeros(m, 0)
    } else {
        IntMatrix::hstack(&blocks_a.iter().collect::<Vec<_>>())
    };
    let p_cat = if blocks_p.is_empty() {
        IntMatrix::zeros(n, 0)
    } else {
        IntMatrix::hstack(&blocks_p.iter().collect::<Vec<_>>())
    };

    // coordinate condition matrix: row j is ab(w_j) * [P_1|..|P_N]
    let t = IntMatrix::from_rows(
        p_cat.cols(),
        free_part
            .words()
            .iter()
            .map(|w| p_cat.left_mul_vec(&w.abelianize()))
            .collect(),
    );
    debug_assert_eq!(t.rows(), r);
    let row_space = Lattice::from_generators(a_star.cols(), &a_star);

    match stallings::abelian_preimage(free_part, &t, &row_space) {
        AbelianPreimage::NotFinitelyGenerated { witness } => {
            FixResult::NotFinitelyGenerated { witness }
        }
        AbelianPreimage::FinitelyGenerated(words_basis) => {
            let mut elements: Vec<FatfElement> = words_basis
                .words()
                .iter()
                .map(|v| {
                    let rhs = p_cat.left_mul_vec(&v.abelianize());
                    let a = solve_linear(&a_star, &rhs)
                        .particular
                        .expect("preimage membership makes the decoration solvable");
                    FatfElement::new(a, v.clone())
                })
                .collect();
            for b in left_kernel(&a_star).basis_rows() {
                elements.push(FatfElement::from_vec(b, n));
            }
            FixResult::FinitelyGenerated(subgroup_basis(m, n, &elements))
        }
    }
}

/// Free basis of the intersection of the given subgroups (iterated
/// pullbacks). At least one basis is required.
pub fn common_free_part(bases: &[FreeBasis]) -> FreeBasis {
    assert!(!bases.is_empty(), "need at least one subgroup");
    let mut acc = bases[0].clone();
    for b in &bases[1..] {
        acc = stallings::intersect(&acc, b);
    }
    acc
}
