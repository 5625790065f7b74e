//! Elements, endomorphisms, and subgroup bases of `G = Z^m x F_n`.
//!
//! Elements are kept in the normal form "vector times reduced word"; the
//! vector part is central, so multiplication adds vectors and concatenates
//! words. For `n >= 2` every endomorphism of `G` falls into one of two
//! classes, mirrored by [`TypeIEndo`] (an endomorphism of the free part plus
//! a pair of integer matrices) and [`TypeIIEndo`] (image generated by a
//! stable letter).
//!
//! A subgroup is presented by a [`SubgroupBasis`]: a free basis of its
//! projection to `F_n`, each basis word decorated with a vector, plus the
//! lattice of purely abelian members. The construction keeps enough
//! provenance to rewrite members over the basis and to exhibit each lattice
//! vector as an explicit product of the original generators.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::intlin::{
    dot, left_kernel, solve_linear, vec_add, vec_is_zero, vec_sub, IntMatrix, Lattice,
};
use crate::stallings::{self, CoreGraph, FreeBasis};
use crate::words::Word;
use crate::{Error, Result};

/// An element `t^a u` of `Z^m x F_n`: central vector `a`, reduced word `u`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FatfElement {
    vec: Vec<BigInt>,
    word: Word,
}

impl std::fmt::Debug for FatfElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let vs: Vec<String> = self.vec.iter().map(|x| x.to_string()).collect();
        write!(f, "t^({}) {:?}", vs.join(","), self.word)
    }
}

impl FatfElement {
    pub fn new(vec: Vec<BigInt>, word: Word) -> Self {
        FatfElement { vec, word }
    }

    pub fn from_i64(vec: &[i64], word: Word) -> Self {
        FatfElement {
            vec: vec.iter().map(|&x| BigInt::from(x)).collect(),
            word,
        }
    }

    pub fn identity(m: usize, n: usize) -> Self {
        FatfElement {
            vec: vec![BigInt::zero(); m],
            word: Word::identity(n),
        }
    }

    /// A purely abelian element `t^a`.
    pub fn from_vec(vec: Vec<BigInt>, n: usize) -> Self {
        FatfElement {
            vec,
            word: Word::identity(n),
        }
    }

    pub fn m(&self) -> usize {
        self.vec.len()
    }

    pub fn n(&self) -> usize {
        self.word.alphabet()
    }

    pub fn vec(&self) -> &[BigInt] {
        &self.vec
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_identity() && vec_is_zero(&self.vec)
    }

    pub fn mul(&self, other: &FatfElement) -> FatfElement {
        assert_eq!(self.m(), other.m(), "ambient mismatch");
        FatfElement {
            vec: vec_add(&self.vec, &other.vec),
            word: self.word.mul(&other.word),
        }
    }

    pub fn inverse(&self) -> FatfElement {
        FatfElement {
            vec: self.vec.iter().map(|x| -x).collect(),
            word: self.word.inverse(),
        }
    }
}

/// Endomorphism determined by a free-part endomorphism `phi` and matrices
/// `q` (m x m), `p` (n x m): sends `t^a u` to `t^{a q + ab(u) p} (u phi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeIEndo {
    phi: Vec<Word>,
    q: IntMatrix,
    p: IntMatrix,
}

impl TypeIEndo {
    pub fn new(phi: Vec<Word>, q: IntMatrix, p: IntMatrix) -> Result<Self> {
        let n = phi.len();
        let m = q.rows();
        if q.cols() != m {
            return Err(Error::Dimension("q must be square".into()));
        }
        if p.rows() != n || p.cols() != m {
            return Err(Error::Dimension("p must be n x m".into()));
        }
        if phi.iter().any(|w| w.alphabet() != n) {
            return Err(Error::Dimension(
                "phi images must live in the same free group".into(),
            ));
        }
        Ok(TypeIEndo { phi, q, p })
    }

    pub fn identity(m: usize, n: usize) -> Self {
        let phi = (1..=n).map(|i| Word::generator(n, i)).collect();
        TypeIEndo {
            phi,
            q: IntMatrix::identity(m),
            p: IntMatrix::zeros(n, m),
        }
    }

    pub fn m(&self) -> usize {
        self.q.rows()
    }

    pub fn n(&self) -> usize {
        self.phi.len()
    }

    pub fn phi(&self) -> &[Word] {
        &self.phi
    }

    pub fn q(&self) -> &IntMatrix {
        &self.q
    }

    pub fn p(&self) -> &IntMatrix {
        &self.p
    }

    pub fn apply(&self, x: &FatfElement) -> FatfElement {
        assert_eq!((x.m(), x.n()), (self.m(), self.n()), "ambient mismatch");
        let vec = vec_add(
            &self.q.left_mul_vec(x.vec()),
            &self.p.left_mul_vec(&x.word.abelianize()),
        );
        FatfElement {
            vec,
            word: x.word.substitute(&self.phi),
        }
    }

    /// Abelianization matrix of `phi` (row i is the image of letter i).
    fn phi_abelianized(&self) -> IntMatrix {
        IntMatrix::from_rows(self.n(), self.phi.iter().map(|w| w.abelianize()).collect())
    }
}

/// Endomorphism with image generated by a stable letter `z` (primitive and
/// nontrivial): sends `t^a u` to `t^{a q + ab(u) p} z^{a . ell + ab(u) . h}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeIIEndo {
    z: Word,
    ell: Vec<BigInt>,
    h: Vec<BigInt>,
    q: IntMatrix,
    p: IntMatrix,
}

impl TypeIIEndo {
    pub fn new(
        z: Word,
        ell: Vec<BigInt>,
        h: Vec<BigInt>,
        q: IntMatrix,
        p: IntMatrix,
    ) -> Result<Self> {
        if !z.is_primitive() {
            return Err(Error::InvalidStableLetter);
        }
        if vec_is_zero(&ell) {
            return Err(Error::ZeroStableVector);
        }
        let m = ell.len();
        let n = z.alphabet();
        if q.rows() != m || q.cols() != m {
            return Err(Error::Dimension("q must be m x m".into()));
        }
        if p.rows() != n || p.cols() != m {
            return Err(Error::Dimension("p must be n x m".into()));
        }
        if h.len() != n {
            return Err(Error::Dimension("h must have one entry per letter".into()));
        }
        Ok(TypeIIEndo { z, ell, h, q, p })
    }

    pub fn m(&self) -> usize {
        self.ell.len()
    }

    pub fn n(&self) -> usize {
        self.z.alphabet()
    }

    pub fn z(&self) -> &Word {
        &self.z
    }

    pub fn ell(&self) -> &[BigInt] {
        &self.ell
    }

    pub fn h(&self) -> &[BigInt] {
        &self.h
    }

    pub fn q(&self) -> &IntMatrix {
        &self.q
    }

    pub fn p(&self) -> &IntMatrix {
        &self.p
    }

    pub fn apply(&self, x: &FatfElement) -> FatfElement {
        assert_eq!((x.m(), x.n()), (self.m(), self.n()), "ambient mismatch");
        let ab = x.word.abelianize();
        let vec = vec_add(&self.q.left_mul_vec(x.vec()), &self.p.left_mul_vec(&ab));
        let k = dot(x.vec(), &self.ell) + dot(&ab, &self.h);
        let k = i64::try_from(&k).expect("stable-letter exponent fits in i64");
        FatfElement {
            vec,
            word: self.z.pow(k),
        }
    }
}

/// Either class of endomorphism of `Z^m x F_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endomorphism {
    I(TypeIEndo),
    II(TypeIIEndo),
}

impl Endomorphism {
    pub fn identity(m: usize, n: usize) -> Self {
        Endomorphism::I(TypeIEndo::identity(m, n))
    }

    pub fn m(&self) -> usize {
        match self {
            Endomorphism::I(e) => e.m(),
            Endomorphism::II(e) => e.m(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Endomorphism::I(e) => e.n(),
            Endomorphism::II(e) => e.n(),
        }
    }

    pub fn apply(&self, x: &FatfElement) -> FatfElement {
        match self {
            Endomorphism::I(e) => e.apply(x),
            Endomorphism::II(e) => e.apply(x),
        }
    }
}

/// Outer product `col^T * row` as a matrix.
fn outer(col: &[BigInt], row: &[BigInt]) -> IntMatrix {
    let mut out = IntMatrix::zeros(col.len(), row.len());
    for (i, c) in col.iter().enumerate() {
        for (j, r) in row.iter().enumerate() {
            out.set(i, j, c * r);
        }
    }
    out
}

/// Free-part endomorphism sending letter `i` to `z^{exps[i]}`.
fn power_images(n: usize, z: &Word, exps: &[BigInt]) -> Vec<Word> {
    assert_eq!(exps.len(), n);
    exps.iter()
        .map(|e| z.pow(i64::try_from(e).expect("letter-image exponent fits in i64")))
        .collect()
}

/// Composition "apply `e1`, then `e2`".
///
/// The class of the composite is tracked exactly: a stable-letter factor
/// degenerates into the first class when its exponent functional vanishes on
/// the whole group or the stable letter dies under the second map.
pub fn compose(e1: &Endomorphism, e2: &Endomorphism) -> Endomorphism {
    assert_eq!((e1.m(), e1.n()), (e2.m(), e2.n()), "ambient mismatch");
    let n = e1.n();
    match (e1, e2) {
        (Endomorphism::I(a), Endomorphism::I(b)) => {
            let phi = a.phi.iter().map(|w| w.substitute(&b.phi)).collect();
            let q = a.q.mul(&b.q);
            let p = a.p.mul(&b.q).add(&a.phi_abelianized().mul(&b.p));
            Endomorphism::I(TypeIEndo { phi, q, p })
        }
        (Endomorphism::I(a), Endomorphism::II(b)) => {
            let mphi = a.phi_abelianized();
            let q = a.q.mul(&b.q);
            let p = a.p.mul(&b.q).add(&mphi.mul(&b.p));
            let ell = a.q.mul_col(&b.ell);
            let h: Vec<BigInt> =
                a.p.mul_col(&b.ell)
                    .into_iter()
                    .zip(mphi.mul_col(&b.h))
                    .map(|(x, y)| x + y)
                    .collect();
            if vec_is_zero(&ell) {
                Endomorphism::I(TypeIEndo {
                    phi: power_images(n, &b.z, &h),
                    q,
                    p,
                })
            } else {
                Endomorphism::II(TypeIIEndo {
                    z: b.z.clone(),
                    ell,
                    h,
                    q,
                    p,
                })
            }
        }
        (Endomorphism::II(a), Endomorphism::I(b)) => {
            let zp = b.p.left_mul_vec(&a.z.abelianize()); // ab(z) * p'
            let q = a.q.mul(&b.q).add(&outer(&a.ell, &zp));
            let p = a.p.mul(&b.q).add(&outer(&a.h, &zp));
            let zimg = a.z.substitute(&b.phi);
            if zimg.is_identity() {
                Endomorphism::I(TypeIEndo {
                    phi: vec![Word::identity(n); n],
                    q,
                    p,
                })
            } else {
                let root = zimg.primitive_root().expect("nontrivial word");
                let kappa = BigInt::from(root.exponent);
                let ell = a.ell.iter().map(|x| x * &kappa).collect();
                let h = a.h.iter().map(|x| x * &kappa).collect();
                Endomorphism::II(TypeIIEndo {
                    z: root.root,
                    ell,
                    h,
                    q,
                    p,
                })
            }
        }
        (Endomorphism::II(a), Endomorphism::II(b)) => {
            let zab = a.z.abelianize();
            let zp = b.p.left_mul_vec(&zab); // ab(z) * p'
            let zh = dot(&zab, &b.h); // ab(z) . h'
            let q = a.q.mul(&b.q).add(&outer(&a.ell, &zp));
            let p = a.p.mul(&b.q).add(&outer(&a.h, &zp));
            let ell: Vec<BigInt> =
                a.q.mul_col(&b.ell)
                    .into_iter()
                    .zip(&a.ell)
                    .map(|(x, l)| x + l * &zh)
                    .collect();
            let h: Vec<BigInt> =
                a.p.mul_col(&b.ell)
                    .into_iter()
                    .zip(&a.h)
                    .map(|(x, hh)| x + hh * &zh)
                    .collect();
            if vec_is_zero(&ell) {
                Endomorphism::I(TypeIEndo {
                    phi: power_images(n, &b.z, &h),
                    q,
                    p,
                })
            } else {
                Endomorphism::II(TypeIIEndo {
                    z: b.z.clone(),
                    ell,
                    h,
                    q,
                    p,
                })
            }
        }
    }
}

/// True iff every basis element of `s` is a fixed point of `e` (sufficient:
/// the basis generates and endomorphisms are homomorphisms).
pub fn fixes(e: &Endomorphism, s: &SubgroupBasis) -> bool {
    s.basis_elements().iter().all(|g| &e.apply(g) == g)
}

/// Provenance retained by [`subgroup_basis`]: enough to rewrite basis words
/// over the original generators and to exhibit lattice vectors as explicit
/// products.
#[derive(Clone, Debug)]
struct Provenance {
    generators: Vec<FatfElement>,
    /// Each generator's word expressed over the projection basis.
    coord_words: Vec<Word>,
    /// For each basis word, a word over the generators mapping onto it.
    letter_preimages: Vec<Word>,
    /// Basis (rows) of the kernel of the induced abelian map `Z^k -> Z^r`.
    kernel_basis: IntMatrix,
    /// The k x m matrix of generator vectors.
    a_matrix: IntMatrix,
}

/// Basis of a finitely generated subgroup of `Z^m x F_n`: decorated free
/// basis of the projection plus the lattice of purely abelian members.
#[derive(Clone, Debug)]
pub struct SubgroupBasis {
    m: usize,
    n: usize,
    decorated: Vec<(Vec<BigInt>, Word)>,
    lattice: Lattice,
    proj: FreeBasis,
    prov: Provenance,
}

/// Computes a basis of the subgroup generated by the given elements.
///
/// Construction: fold the projected words into a core graph and take its
/// spanning-tree basis; express each generator over that basis; the lattice
/// of abelian members is the image, under the matrix of generator vectors,
/// of the kernel of the induced abelianized coordinate map (commutators
/// lift, so nothing else lands in the kernel); finally decorate each basis
/// word with the vector of one expression of it in the generators,
/// canonicalized modulo the lattice.
pub fn subgroup_basis(m: usize, n: usize, generators: &[FatfElement]) -> SubgroupBasis {
    for g in generators {
        assert_eq!((g.m(), g.n()), (m, n), "ambient mismatch");
    }
    let words: Vec<Word> = generators.iter().map(|g| g.word().clone()).collect();
    let proj = stallings::build(n, &words);
    let r = proj.rank();
    let k = generators.len();

    let coord_words: Vec<Word> = words
        .iter()
        .map(|w| proj.express(w).expect("generators lie in their own span"))
        .collect();
    let mu = IntMatrix::from_rows(r, coord_words.iter().map(|c| c.abelianize()).collect());
    let kernel = left_kernel(&mu);
    let kernel_basis = IntMatrix::from_rows(k, kernel.basis_rows());
    let a_matrix = IntMatrix::from_rows(m, generators.iter().map(|g| g.vec().to_vec()).collect());
    let lattice = Lattice::from_generators(m, &kernel_basis.mul(&a_matrix));

    let letter_preimages = if r > 0 {
        stallings::generator_preimages(r, &coord_words)
    } else {
        Vec::new()
    };
    let decorated: Vec<(Vec<BigInt>, Word)> = letter_preimages
        .iter()
        .zip(proj.words())
        .map(|(pre, u)| {
            let vec = a_matrix.left_mul_vec(&pre.abelianize());
            (lattice.reduce(&vec), u.clone())
        })
        .collect();

    SubgroupBasis {
        m,
        n,
        decorated,
        lattice,
        proj,
        prov: Provenance {
            generators: generators.to_vec(),
            coord_words,
            letter_preimages,
            kernel_basis,
            a_matrix,
        },
    }
}

impl SubgroupBasis {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Decorated part: pairs `(a_i, u_i)` standing for `t^{a_i} u_i`.
    pub fn decorated(&self) -> &[(Vec<BigInt>, Word)] {
        &self.decorated
    }

    /// The lattice of purely abelian members.
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn projection_graph(&self) -> &CoreGraph {
        self.proj.graph()
    }

    pub fn projection_basis(&self) -> &FreeBasis {
        &self.proj
    }

    /// Rank of the projection.
    pub fn rank(&self) -> usize {
        self.decorated.len()
    }

    /// The basis as a list of group elements (decorated part first, then one
    /// `t^b` per lattice basis vector).
    pub fn basis_elements(&self) -> Vec<FatfElement> {
        let mut out: Vec<FatfElement> = self
            .decorated
            .iter()
            .map(|(a, u)| FatfElement::new(a.clone(), u.clone()))
            .collect();
        for b in self.lattice.basis_rows() {
            out.push(FatfElement::from_vec(b, self.n));
        }
        out
    }

    /// Membership: the word must lie in the projection and the vector must
    /// match the basis decorations modulo the lattice.
    pub fn member(&self, x: &FatfElement) -> bool {
        assert_eq!((x.m(), x.n()), (self.m, self.n), "ambient mismatch");
        let Some(expr) = self.proj.express(x.word()) else {
            return false;
        };
        // vectors are central: only the exponent sums of the expression matter
        let mut acc = vec![BigInt::zero(); self.m];
        for (count, (a, _)) in expr.abelianize().iter().zip(&self.decorated) {
            if !count.is_zero() {
                acc = vec_add(&acc, &a.iter().map(|x| x * count).collect::<Vec<_>>());
            }
        }
        self.lattice.contains(&vec_sub(x.vec(), &acc))
    }

    /// Equality as subgroups: mutual membership of bases plus equal lattices.
    pub fn equal(&self, other: &SubgroupBasis) -> bool {
        assert_eq!((self.m, self.n), (other.m, other.n), "ambient mismatch");
        self.lattice == other.lattice
            && self.basis_elements().iter().all(|g| other.member(g))
            && other.basis_elements().iter().all(|g| self.member(g))
    }

    /// A subgroup is abelian iff its projection is cyclic.
    pub fn is_abelian(&self) -> bool {
        self.decorated.len() <= 1
    }

    /// Exhibits a lattice vector as an explicit product of the generators:
    /// returns a word over generator indices whose evaluation is exactly
    /// `t^v`. `None` when `v` is not in the lattice.
    ///
    /// A straight-line word with the right exponent vector is corrected by
    /// substituting basis preimages into its coordinate image (which has
    /// zero exponent sums), cancelling the word part without disturbing the
    /// vector part.
    pub fn exhibit_lattice_vector(&self, v: &[BigInt]) -> Option<Word> {
        assert_eq!(v.len(), self.m);
        let k = self.prov.generators.len();
        let ka = self.prov.kernel_basis.mul(&self.prov.a_matrix);
        let sol = solve_linear(&ka, v).particular?;
        let y = self.prov.kernel_basis.left_mul_vec(&sol); // in ker of the abelian map
        let mut straight = Vec::new();
        for (i, e) in y.iter().enumerate() {
            let e = i64::try_from(e).expect("exhibit exponent fits in i64");
            let l = (i + 1) as i32;
            for _ in 0..e.unsigned_abs() {
                straight.push(if e > 0 { l } else { -l });
            }
        }
        let vy = Word::new(k, straight);
        let correction = if self.prov.letter_preimages.is_empty() {
            Word::identity(k)
        } else {
            let g = vy.substitute(&self.prov.coord_words);
            g.substitute(&self.prov.letter_preimages)
        };
        Some(vy.mul(&correction.inverse()))
    }

    /// Evaluates a word over generator indices to a group element.
    pub fn evaluate_generator_word(&self, w: &Word) -> FatfElement {
        assert_eq!(w.alphabet(), self.prov.generators.len());
        let mut out = FatfElement::identity(self.m, self.n);
        for &l in w.letters() {
            let g = &self.prov.generators[l.unsigned_abs() as usize - 1];
            out = if l > 0 {
                out.mul(g)
            } else {
                out.mul(&g.inverse())
            };
        }
        out
    }
}
