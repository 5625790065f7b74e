//! Exact integer linear algebra over arbitrary-precision integers.
//!
//! Everything downstream (subgroup lattices, fixed-point systems, closure
//! constraints) reduces to row operations here, so this module works with
//! `BigInt` entries throughout and never takes modular shortcuts: normal-form
//! certificates must reconstruct the input exactly.
//!
//! Conventions: vectors are rows, matrices act on the right (`v -> v * A`),
//! and a [`Lattice`] is the row span of an integer matrix kept in Hermite
//! normal form so equal lattices compare syntactically equal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Dense integer matrix with row-major storage.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl std::fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(r, c))?;
            }
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<BigInt>>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let nrows = rows.len();
        for r in rows {
            assert_eq!(r.len(), cols, "row length must equal column count");
            data.extend(r);
        }
        IntMatrix {
            rows: nrows,
            cols,
            data,
        }
    }

    /// Convenience constructor from machine integers (tests, examples).
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> Vec<BigInt> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn row_slice(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let add = a * other.get(k, c);
                    let cur = out.get(r, c) + add;
                    out.set(r, c, cur);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    /// Matrix times column vector: `A * v^T`, returned as a plain vector.
    pub fn mul_col(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|r| self.row_slice(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row vector times matrix: `v * A`.
    pub fn left_mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows, "vector length must equal row count");
        let mut out = vec![BigInt::zero(); self.cols];
        for (r, coeff) in v.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for c in 0..self.cols {
                out[c] += coeff * self.get(r, c);
            }
        }
        out
    }

    /// Horizontal concatenation `[A | B | ...]`.
    pub fn hstack(parts: &[&IntMatrix]) -> IntMatrix {
        assert!(!parts.is_empty());
        let rows = parts[0].rows;
        assert!(
            parts.iter().all(|p| p.rows == rows),
            "hstack needs equal row counts"
        );
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = IntMatrix::zeros(rows, cols);
        for r in 0..rows {
            let mut off = 0;
            for p in parts {
                for c in 0..p.cols {
                    out.set(r, off + c, p.get(r, c).clone());
                }
                off += p.cols;
            }
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(parts: &[&IntMatrix]) -> IntMatrix {
        assert!(!parts.is_empty());
        let cols = parts[0].cols;
        assert!(
            parts.iter().all(|p| p.cols == cols),
            "vstack needs equal column counts"
        );
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut out = IntMatrix::zeros(rows, cols);
        let mut off = 0;
        for p in parts {
            for r in 0..p.rows {
                for c in 0..cols {
                    out.set(off + r, c, p.get(r, c).clone());
                }
            }
            off += p.rows;
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for c in 0..self.cols {
            let v = -self.get(r, c);
            self.set(r, c, v);
        }
    }

    /// `row[dst] += k * row[src]`.
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let v = self.get(dst, c) + k * self.get(src, c);
            self.set(dst, c, v);
        }
    }

    /// `col[dst] += k * col[src]`.
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let v = self.get(r, dst) + k * self.get(r, src);
            self.set(r, dst, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !m.get(r, k).is_zero()) {
                    Some(r) => {
                        m.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, v);
                }
                m.set(i, k, BigInt::zero());
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1)
    }

    /// Inverse of a unimodular matrix. Returns `None` when `|det| != 1`.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        assert_eq!(self.rows, self.cols);
        let snf = smith_normal_form(self);
        if snf.d != IntMatrix::identity(self.rows) {
            return None;
        }
        // U A V = I  =>  A^{-1} = V U.
        Some(snf.v.mul(&snf.u))
    }
}

/// Smith normal form certificate: `u * a * v = d` with `u`, `v` unimodular
/// and `d` diagonal, nonnegative, with each diagonal entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
    u_inv: IntMatrix,
    v_inv: IntMatrix,
}

impl SmithDecomposition {
    pub fn u_inv(&self) -> &IntMatrix {
        &self.u_inv
    }

    pub fn v_inv(&self) -> &IntMatrix {
        &self.v_inv
    }

    /// Number of nonzero diagonal entries.
    pub fn rank(&self) -> usize {
        (0..self.d.rows().min(self.d.cols()))
            .take_while(|&i| !self.d.get(i, i).is_zero())
            .count()
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols()))
            .map(|i| self.d.get(i, i).clone())
            .collect()
    }
}

/// Smith normal form of `a`, with unimodular transforms and their inverses.
///
/// Deterministic: pivots are chosen as the smallest nonzero entry by absolute
/// value, ties broken by position.
pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut v_inv = IntMatrix::identity(cols);

    // Elementary row op on d is mirrored on u (and inverted on u_inv);
    // column ops go to v / v_inv.
    macro_rules! row_swap {
        ($i:expr, $j:expr) => {{
            d.swap_rows($i, $j);
            u.swap_rows($i, $j);
            u_inv.swap_cols($i, $j);
        }};
    }
    macro_rules! col_swap {
        ($i:expr, $j:expr) => {{
            d.swap_cols($i, $j);
            v.swap_cols($i, $j);
            v_inv.swap_rows($i, $j);
        }};
    }
    macro_rules! row_add {
        ($dst:expr, $src:expr, $k:expr) => {{
            let k: BigInt = $k;
            d.add_row_multiple($dst, $src, &k);
            u.add_row_multiple($dst, $src, &k);
            u_inv.add_col_multiple($src, $dst, &(-&k));
        }};
    }
    macro_rules! col_add {
        ($dst:expr, $src:expr, $k:expr) => {{
            let k: BigInt = $k;
            d.add_col_multiple($dst, $src, &k);
            v.add_col_multiple($dst, $src, &k);
            v_inv.add_row_multiple($src, $dst, &(-&k));
        }};
    }

    let limit = rows.min(cols);
    for t in 0..limit {
        'pivot: loop {
            // Smallest nonzero entry of the working submatrix.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if d.get(i, j).is_zero() {
                        continue;
                    }
                    match best {
                        None => best = Some((i, j)),
                        Some((bi, bj)) => {
                            if d.get(i, j).abs() < d.get(bi, bj).abs() {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break 'pivot; // submatrix is zero; done
            };
            row_swap!(t, pi);
            col_swap!(t, pj);

            // Reduce the pivot column and row.
            let mut dirty = false;
            for i in t + 1..rows {
                if !d.get(i, t).is_zero() {
                    let q = d.get(i, t) / d.get(t, t); // truncated: |rem| < |pivot|
                    row_add!(i, t, -q);
                    if !d.get(i, t).is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !d.get(t, j).is_zero() {
                    let q = d.get(t, j) / d.get(t, t);
                    col_add!(j, t, -q);
                    if !d.get(t, j).is_zero() {
                        dirty = true;
                    }
                }
            }
            if dirty {
                continue 'pivot; // remainders left; pick a smaller pivot
            }

            // Pivot divides everything in its row/column; enforce the
            // divisibility chain against the rest of the submatrix.
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(d.get(i, j) % d.get(t, t)).is_zero() {
                        row_add!(t, i, BigInt::one());
                        continue 'pivot;
                    }
                }
            }
            break 'pivot;
        }
    }

    for t in 0..limit {
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
            // inverse of a row negation is the same column negation
            for r in 0..rows {
                let x = -u_inv.get(r, t);
                u_inv.set(r, t, x);
            }
        }
    }

    SmithDecomposition {
        u,
        d,
        v,
        u_inv,
        v_inv,
    }
}

/// Row-style Hermite normal form with zero rows dropped.
///
/// Returns `(h, transform)` where `h = transform * a`, rows of `h` are the
/// canonical basis of the row lattice of `a` (echelon shape, positive pivots,
/// entries above each pivot reduced into `[0, pivot)`).
pub fn hermite_normal_form(a: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let (rows, cols) = (a.rows(), a.cols());
    let mut h = a.clone();
    let mut t = IntMatrix::identity(rows);
    let mut rank = 0usize;
    for col in 0..cols {
        // Combine all rows below `rank` until one carries the column gcd.
        loop {
            let mut nz: Vec<usize> = (rank..rows).filter(|&r| !h.get(r, col).is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            if nz.len() == 1 {
                h.swap_rows(rank, nz[0]);
                t.swap_rows(rank, nz[0]);
                break;
            }
            // Reduce everything against the smallest entry.
            nz.sort_by_key(|&x| h.get(x, col).abs());
            let min = nz[0];
            h.swap_rows(rank, min);
            t.swap_rows(rank, min);
            for &r in &nz[1..] {
                let r = if r == rank { min } else { r };
                let q = h.get(r, col) / h.get(rank, col);
                h.add_row_multiple(r, rank, &(-&q));
                t.add_row_multiple(r, rank, &(-q));
            }
        }
        if rank >= rows || h.get(rank, col).is_zero() {
            continue;
        }
        if h.get(rank, col).is_negative() {
            h.negate_row(rank);
            t.negate_row(rank);
        }
        // Canonicalize entries above the pivot into [0, pivot).
        for r in 0..rank {
            let q = h.get(r, col).div_floor(h.get(rank, col));
            h.add_row_multiple(r, rank, &(-&q));
            t.add_row_multiple(r, rank, &(-q));
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    let hh = IntMatrix::from_rows(cols, (0..rank).map(|r| h.row(r)).collect());
    let tt = IntMatrix::from_rows(rows, (0..rank).map(|r| t.row(r)).collect());
    (hh, tt)
}

/// A sublattice of `Z^d` given by the row span of a full-row-rank matrix in
/// Hermite normal form. Equal lattices have identical representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    ambient: usize,
    basis: IntMatrix,
}

impl Lattice {
    pub fn trivial(ambient: usize) -> Self {
        Lattice {
            ambient,
            basis: IntMatrix::zeros(0, ambient),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Lattice {
            ambient,
            basis: IntMatrix::identity(ambient),
        }
    }

    /// Row span of `gens` (rows may be dependent or zero).
    pub fn from_generators(ambient: usize, gens: &IntMatrix) -> Self {
        assert_eq!(
            gens.cols(),
            ambient,
            "generator length must equal ambient dimension"
        );
        let (h, _) = hermite_normal_form(gens);
        Lattice { ambient, basis: h }
    }

    pub fn from_rows(ambient: usize, rows: Vec<Vec<BigInt>>) -> Self {
        Self::from_generators(ambient, &IntMatrix::from_rows(ambient, rows))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.rows() == 0
    }

    /// Canonical (Hermite) basis; rows are independent.
    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn basis_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.basis.rows()).map(|r| self.basis.row(r)).collect()
    }

    /// Canonical representative of `v` modulo the lattice.
    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.ambient);
        let mut v = v.to_vec();
        for r in 0..self.basis.rows() {
            let pivot_col = (0..self.ambient)
                .find(|&c| !self.basis.get(r, c).is_zero())
                .expect("basis rows are nonzero");
            let q = v[pivot_col].div_floor(self.basis.get(r, pivot_col));
            if !q.is_zero() {
                for c in 0..self.ambient {
                    v[c] -= &q * self.basis.get(r, c);
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Smallest lattice containing both.
    pub fn sum(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.ambient, other.ambient);
        Lattice::from_generators(
            self.ambient,
            &IntMatrix::vstack(&[&self.basis, &other.basis]),
        )
    }
}

/// Lattice of all integer row vectors `x` with `x * a = 0`.
pub fn left_kernel(a: &IntMatrix) -> Lattice {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    let rows: Vec<Vec<BigInt>> = (rank..a.rows()).map(|r| snf.u.row(r)).collect();
    Lattice::from_rows(a.rows(), rows)
}

/// Outcome of solving `x * a = b` over the integers.
#[derive(Clone, Debug)]
pub struct LinearSolution {
    /// A particular solution, if one exists.
    pub particular: Option<Vec<BigInt>>,
    /// All homogeneous solutions.
    pub kernel: Lattice,
}

/// Solve `x * a = b` for a row vector `x`; unsolvability is a value.
pub fn solve_linear(a: &IntMatrix, b: &[BigInt]) -> LinearSolution {
    assert_eq!(
        b.len(),
        a.cols(),
        "right-hand side length must equal column count"
    );
    let snf = smith_normal_form(a);
    let kernel = {
        let rank = snf.rank();
        let rows: Vec<Vec<BigInt>> = (rank..a.rows()).map(|r| snf.u.row(r)).collect();
        Lattice::from_rows(a.rows(), rows)
    };
    // x a = b  <=>  (x u^{-1}) d = b v, entrywise on the diagonal.
    let c = snf.v.left_mul_vec(b); // b * v
    let limit = a.rows().min(a.cols());
    let mut y = vec![BigInt::zero(); a.rows()];
    for j in 0..a.cols() {
        if j < limit && !snf.d.get(j, j).is_zero() {
            let (q, r) = c[j].div_rem(snf.d.get(j, j));
            if !r.is_zero() {
                return LinearSolution {
                    particular: None,
                    kernel,
                };
            }
            y[j] = q;
        } else if !c[j].is_zero() {
            return LinearSolution {
                particular: None,
                kernel,
            };
        }
    }
    let x = snf.u.left_mul_vec(&y);
    LinearSolution {
        particular: Some(x),
        kernel,
    }
}

/// Smallest direct summand of the ambient group containing `l`.
pub fn saturation(l: &Lattice) -> Lattice {
    if l.is_trivial() {
        return l.clone();
    }
    let snf = smith_normal_form(l.basis());
    let rank = snf.rank();
    debug_assert_eq!(rank, l.rank(), "lattice bases have independent rows");
    let rows: Vec<Vec<BigInt>> = (0..rank).map(|r| snf.v_inv().row(r)).collect();
    Lattice::from_rows(l.ambient_dim(), rows)
}

/// A complement `c` with `l (+) c = Z^d`, chosen deterministically from the
/// Smith basis completion. Rejects input that is not a direct summand.
pub fn complement(l: &Lattice) -> Result<Lattice> {
    let d = l.ambient_dim();
    if l.is_trivial() {
        return Ok(Lattice::full(d));
    }
    let snf = smith_normal_form(l.basis());
    let rank = snf.rank();
    for i in 0..rank {
        if !snf.d.get(i, i).is_one() {
            return Err(Error::NotSaturated);
        }
    }
    let rows: Vec<Vec<BigInt>> = (rank..d).map(|r| snf.v_inv().row(r)).collect();
    Ok(Lattice::from_rows(d, rows))
}

/// Index of a sublattice in its ambient group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeIndex {
    Finite(BigInt),
    Infinite,
}

pub fn lattice_index(l: &Lattice) -> LatticeIndex {
    if l.rank() < l.ambient_dim() {
        return LatticeIndex::Infinite;
    }
    let snf = smith_normal_form(l.basis());
    let mut idx = BigInt::one();
    for d in snf.diagonal() {
        idx *= d;
    }
    LatticeIndex::Finite(idx)
}

/// The finite quotient `Z^d / m` as a product of cyclic groups, together
/// with a computable coordinate map.
///
/// `orders` lists the nontrivial cyclic orders (each > 1); `label` is a group
/// homomorphism onto their product whose kernel is exactly `m`.
#[derive(Clone, Debug)]
pub struct QuotientStructure {
    orders: Vec<BigInt>,
    /// Columns of the Smith `v` transform at the nontrivial positions
    /// (`d x e` where `e = orders.len()`).
    transform: IntMatrix,
}

impl QuotientStructure {
    pub fn orders(&self) -> &[BigInt] {
        &self.orders
    }

    pub fn size(&self) -> BigInt {
        let mut s = BigInt::one();
        for o in &self.orders {
            s *= o;
        }
        s
    }

    /// Canonical coset label of `v`: one residue in `[0, order)` per factor.
    pub fn label(&self, v: &[BigInt]) -> Vec<BigInt> {
        let raw = self.transform.left_mul_vec(v);
        raw.iter()
            .zip(&self.orders)
            .map(|(x, o)| x.mod_floor(o))
            .collect()
    }
}

/// Cyclic decomposition of `Z^d / m`; rejects infinite quotients.
pub fn quotient_structure(m: &Lattice) -> Result<QuotientStructure> {
    if m.rank() < m.ambient_dim() {
        return Err(Error::InfiniteIndex);
    }
    let d = m.ambient_dim();
    let snf = smith_normal_form(m.basis());
    // x in m  <=>  x * v lies in the row span of the diagonal, so x mod m is
    // determined by (x * v) modulo the diagonal entries.
    let mut orders = Vec::new();
    let mut cols: Vec<usize> = Vec::new();
    for i in 0..d {
        let o = snf.d.get(i, i).clone();
        debug_assert!(!o.is_zero());
        if !o.is_one() {
            orders.push(o);
            cols.push(i);
        }
    }
    let mut transform = IntMatrix::zeros(d, cols.len());
    for r in 0..d {
        for (k, &c) in cols.iter().enumerate() {
            transform.set(r, k, snf.v.get(r, c).clone());
        }
    }
    Ok(QuotientStructure { orders, transform })
}

/// Gcd of a vector's entries (and optionally one extra integer) with Bezout
/// coefficients certifying it: `v . coeffs + extra * extra_coeff = gcd`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BezoutCertificate {
    pub gcd: BigInt,
    pub coeffs: Vec<BigInt>,
    pub extra_coeff: Option<BigInt>,
}

/// Rejects all-zero input. When `extra` is present the returned `extra_coeff`
/// is always nonzero (the coefficient vector is adjusted by multiples of
/// `extra / gcd` when the straightforward computation would give zero);
/// downstream constructions need a nonzero coefficient there.
pub fn vector_gcd_bezout(v: &[BigInt], extra: Option<&BigInt>) -> Result<BezoutCertificate> {
    let all_zero = v.iter().all(|x| x.is_zero()) && extra.is_none_or(|e| e.is_zero());
    if all_zero {
        return Err(Error::ZeroGcdInput);
    }
    let mut g = BigInt::zero();
    let mut coeffs = vec![BigInt::zero(); v.len()];
    for (i, x) in v.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        if g.is_zero() {
            g = x.abs();
            coeffs[i] = x.signum();
            continue;
        }
        let e = g.extended_gcd(x);
        // e.gcd = e.x * g + e.y * x
        for c in coeffs.iter_mut() {
            *c *= &e.x;
        }
        coeffs[i] = e.y;
        g = e.gcd;
    }
    let extra_coeff = match extra {
        None => None,
        Some(ex) => {
            let mut rho;
            if g.is_zero() {
                g = ex.abs();
                rho = ex.signum();
            } else if (ex % &g).is_zero() {
                rho = BigInt::zero();
            } else {
                let e = g.extended_gcd(ex);
                for c in coeffs.iter_mut() {
                    *c *= &e.x;
                }
                rho = e.y;
                g = e.gcd;
            }
            if rho.is_zero() {
                // v . coeffs = g already; trade it for a nonzero extra
                // coefficient: scale coeffs by (1 - extra/g) and take rho = 1.
                let scale = BigInt::one() - ex / &g;
                for c in coeffs.iter_mut() {
                    *c *= &scale;
                }
                rho = BigInt::one();
            }
            Some(rho)
        }
    };
    debug_assert!({
        let mut s: BigInt = v.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        if let (Some(ex), Some(rho)) = (extra, &extra_coeff) {
            s += ex * rho;
        }
        s == g
    });
    Ok(BezoutCertificate {
        gcd: g,
        coeffs,
        extra_coeff,
    })
}

/// Gcd of the entries of `v` (0 for the zero vector).
pub fn content(v: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for x in v {
        g = g.gcd(x);
    }
    g
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_neg(a: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|x| -x).collect()
}

pub fn vec_scale(a: &[BigInt], k: &BigInt) -> Vec<BigInt> {
    a.iter().map(|x| x * k).collect()
}

pub fn vec_is_zero(a: &[BigInt]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn vec_from_i64(a: &[i64]) -> Vec<BigInt> {
    a.iter().map(|&x| BigInt::from(x)).collect()
}
