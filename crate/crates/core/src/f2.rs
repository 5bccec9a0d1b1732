//! Linear algebra over the two-element field.
//!
//! Vectors are packed into `u64` words. Coordinates are 0-based here; text
//! renderings meant for people (pivot sets, circuits, CLI reports) add one.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A vector in F₂ⁿ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// The standard basis vector with a single one at `i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector from bools, position 0 first.
    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Interprets `index` as a computational-basis label: coordinate 0 is the
    /// most significant of the `len` low bits.
    pub fn from_basis_index(len: usize, index: u64) -> Self {
        assert!(len <= 64, "basis index only covers up to 64 coordinates");
        let mut v = Self::zeros(len);
        for i in 0..len {
            if (index >> (len - 1 - i)) & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    /// Inverse of [`BitVec::from_basis_index`].
    pub fn basis_index(&self) -> u64 {
        assert!(
            self.len <= 64,
            "basis index only covers up to 64 coordinates"
        );
        self.ones()
            .fold(0u64, |acc, i| acc | 1 << (self.len - 1 - i))
    }

    /// Places the low bits of `bits` on `coords`: bit `t` of `bits` lands on
    /// `coords[t]`.
    pub fn embed(len: usize, coords: &[usize], bits: u64) -> Self {
        let mut v = Self::zeros(len);
        for (t, &c) in coords.iter().enumerate() {
            if (bits >> t) & 1 == 1 {
                v.set(c, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the coordinatewise product.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot product");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Positions holding a one, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Restriction to `range`, re-indexed from zero.
    pub fn slice(&self, range: std::ops::Range<usize>) -> BitVec {
        BitVec::from_bools(range.map(|i| self.get(i)))
    }

    /// Concatenation `self ‖ tail`.
    pub fn concat(&self, tail: &BitVec) -> BitVec {
        BitVec::from_bools(
            (0..self.len)
                .map(|i| self.get(i))
                .chain((0..tail.len).map(|i| tail.get(i))),
        )
    }

    /// True when every one of `self` lies in `coords`.
    pub fn supported_in(&self, coords: &[usize]) -> bool {
        self.ones().all(|i| coords.contains(&i))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVec::from_bools)
    }
}

/// A dense matrix over F₂, stored by rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMat {
    cols: usize,
    rows: Vec<BitVec>,
}

impl BitMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVec::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cols: n,
            rows: (0..n).map(|i| BitVec::unit(n, i)).collect(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVec>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    /// `row[dst] += row[src]`
    pub fn add_row(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let s = self.rows[src].clone();
        self.rows[dst].xor_assign(&s);
    }

    /// `col[dst] += col[src]`
    pub fn add_col(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        for row in &mut self.rows {
            if row.get(src) {
                row.flip(dst);
            }
        }
    }

    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols, "matrix-vector length mismatch");
        BitVec::from_bools(self.rows.iter().map(|r| r.dot(v)))
    }

    pub fn mul(&self, other: &BitMat) -> BitMat {
        assert_eq!(self.cols, other.num_rows(), "matrix product shape mismatch");
        let mut out = BitMat::zeros(self.num_rows(), other.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for k in row.ones() {
                out.rows[r].xor_assign(&other.rows[k]);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        rref(self).1.len()
    }

    /// Keeps only the listed columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> BitMat {
        BitMat {
            cols: cols.len(),
            rows: self
                .rows
                .iter()
                .map(|r| BitVec::from_bools(cols.iter().map(|&c| r.get(c))))
                .collect(),
        }
    }

    /// Gauss-Jordan inverse of a square matrix; `None` when singular.
    pub fn inverse(&self) -> Option<BitMat> {
        let n = self.num_rows();
        if n != self.cols {
            return None;
        }
        let mut a = self.clone();
        let mut inv = BitMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col))?;
            a.rows.swap(col, pivot);
            inv.rows.swap(col, pivot);
            for r in 0..n {
                if r != col && a.get(r, col) {
                    a.add_row(col, r);
                    inv.add_row(col, r);
                }
            }
        }
        Some(inv)
    }
}

impl fmt::Display for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self.rows.iter().map(ToString::to_string).collect();
        f.write_str(&text.join(","))
    }
}

impl fmt::Debug for BitMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMat[{self}]")
    }
}

/// Parses rows written as bit strings joined by commas, e.g. `"101001,011101,000010"`.
impl FromStr for BitMat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .split(',')
            .map(|r| {
                let r = r.trim();
                if r.is_empty() {
                    return Err(Error::Parse("empty row".into()));
                }
                r.parse::<BitVec>()
            })
            .collect::<Result<Vec<_>>>()?;
        let cols = rows[0].len();
        BitMat::from_rows(cols, rows).map_err(|_| Error::Parse("rows have unequal lengths".into()))
    }
}

/// Reduced row echelon form. Zero rows are dropped, so the returned matrix has
/// exactly `rank` rows; the second value lists the pivot column of each row.
pub fn rref(mat: &BitMat) -> (BitMat, Vec<usize>) {
    let mut rows = mat.rows.clone();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..mat.cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    (
        BitMat {
            cols: mat.cols,
            rows,
        },
        pivots,
    )
}

/// Number of `k`-dimensional subspaces of F₂ⁿ, computed exactly.
pub fn gaussian_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let two_pow_minus_one = |e: usize| (BigUint::one() << e) - BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for j in 0..k {
        num *= two_pow_minus_one(n - j);
        den *= two_pow_minus_one(k - j);
    }
    num / den
}

/// A subspace of F₂ⁿ kept in canonical form: its RREF generator matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    gen: BitMat,
    pivots: Vec<usize>,
    non_pivots: Vec<usize>,
}

impl Subspace {
    /// Row space of `mat`, of whatever rank it has.
    pub fn row_space(mat: &BitMat) -> Self {
        let (gen, pivots) = rref(mat);
        Self::from_rref(gen, pivots)
    }

    /// Row space of a `m × 2m` matrix of full rank: an element of G(2m, m).
    pub fn half_dimensional(mat: &BitMat) -> Result<Self> {
        let n = mat.num_cols();
        if !n.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: n,
            });
        }
        let w = Self::row_space(mat);
        if w.dim() != n / 2 {
            return Err(Error::RankDeficient {
                rank: w.dim(),
                expected: n / 2,
            });
        }
        Ok(w)
    }

    fn from_rref(gen: BitMat, pivots: Vec<usize>) -> Self {
        let non_pivots = (0..gen.num_cols())
            .filter(|c| !pivots.contains(c))
            .collect();
        Self {
            gen,
            pivots,
            non_pivots,
        }
    }

    /// The whole space F₂ⁿ.
    pub fn full(n: usize) -> Self {
        Self::from_rref(BitMat::identity(n), (0..n).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.gen.num_cols()
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Half the ambient dimension; the number of qubits each player holds.
    pub fn half(&self) -> usize {
        self.ambient_dim() / 2
    }

    pub fn generator(&self) -> &BitMat {
        &self.gen
    }

    /// Pivot columns `I`, ascending.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Non-pivot columns `Iᶜ`, ascending.
    pub fn non_pivots(&self) -> &[usize] {
        &self.non_pivots
    }

    /// `J = {(i, j) : i ∈ I, j ∈ Iᶜ, A_ij = 1}`, sorted by `(i, j)`.
    pub fn cross_pairs(&self) -> Vec<(usize, usize)> {
        self.pivots
            .iter()
            .zip(self.gen.rows())
            .flat_map(|(&i, row)| row.ones().filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    }

    /// Residual of `v` after clearing every pivot coordinate with generator rows.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.ambient_dim(), "vector length mismatch");
        let mut r = v.clone();
        for (&p, row) in self.pivots.iter().zip(self.gen.rows()) {
            if r.get(p) {
                r.xor_assign(row);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// True iff `a + b ∈ W`.
    pub fn same_coset(&self, a: &BitVec, b: &BitVec) -> bool {
        self.contains(&a.xor(b))
    }

    /// The element `Σ_t bit_t(coeffs) · row_t`.
    pub fn combination(&self, coeffs: u64) -> BitVec {
        let mut v = BitVec::zeros(self.ambient_dim());
        for (t, row) in self.gen.rows().iter().enumerate() {
            if (coeffs >> t) & 1 == 1 {
                v.xor_assign(row);
            }
        }
        v
    }

    /// All `2^dim` elements.
    pub fn elements(&self) -> impl Iterator<Item = BitVec> + '_ {
        assert!(self.dim() < 64, "subspace too large to list");
        (0..1u64 << self.dim()).map(|c| self.combination(c))
    }

    /// `W⊥` under the F₂ dot product, in canonical form.
    pub fn orthogonal_complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let basis = self
            .non_pivots
            .iter()
            .map(|&f| {
                let mut v = BitVec::unit(n, f);
                for (&p, row) in self.pivots.iter().zip(self.gen.rows()) {
                    if row.get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect();
        Subspace::row_space(&BitMat {
            cols: n,
            rows: basis,
        })
    }

    /// `dim(W ∩ span{e_i : i ∈ coords})`.
    ///
    /// Elements of `W` supported on `coords` form the kernel of the projection
    /// onto the remaining coordinates, so this is `dim W` minus that projection's rank.
    pub fn intersection_dim(&self, coords: &[usize]) -> usize {
        let rest: Vec<usize> = (0..self.ambient_dim())
            .filter(|c| !coords.contains(c))
            .collect();
        self.dim() - self.gen.select_cols(&rest).rank()
    }

    /// Canonical transversals: `CS(W) = ⟨e_i⟩_{i∈Iᶜ}` and `CS(W⊥) = ⟨e_i⟩_{i∈I}`.
    pub fn coset_reps(&self) -> CosetReps {
        CosetReps {
            x_coords: self.non_pivots.clone(),
            z_coords: self.pivots.clone(),
        }
    }

    /// Representative of `CS(W)` whose bit `t` sits on the `t`-th non-pivot.
    pub fn x_rep(&self, bits: u64) -> BitVec {
        BitVec::embed(self.ambient_dim(), &self.non_pivots, bits)
    }

    /// Representative of `CS(W⊥)` whose bit `t` sits on the `t`-th pivot.
    pub fn z_rep(&self, bits: u64) -> BitVec {
        BitVec::embed(self.ambient_dim(), &self.pivots, bits)
    }

    /// Canonical representative of the coset `W + v`: the unique element of
    /// `⟨e_i⟩_{i∈Iᶜ}` in it.
    pub fn canonical_x(&self, v: &BitVec) -> BitVec {
        self.reduce(v)
    }

    /// Canonical representative of the coset `W⊥ + v`: the unique element of
    /// `⟨e_i⟩_{i∈I}` in it.
    ///
    /// For each non-pivot `f`, `e_f + Σ_r A_{rf} e_{p_r}` lies in `W⊥`; adding
    /// it for every non-pivot one of `v` clears all non-pivot coordinates.
    pub fn canonical_z(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.ambient_dim(), "vector length mismatch");
        let mut r = v.clone();
        for &f in &self.non_pivots {
            if v.get(f) {
                r.flip(f);
                for (&p, row) in self.pivots.iter().zip(self.gen.rows()) {
                    if row.get(f) {
                        r.flip(p);
                    }
                }
            }
        }
        r
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace[{}]", self.gen)
    }
}

/// Coordinate sets spanning the canonical coset transversals of `W` and `W⊥`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetReps {
    pub x_coords: Vec<usize>,
    pub z_coords: Vec<usize>,
}

/// Streams every `k`-dimensional subspace of F₂ⁿ once.
///
/// Pivot sets come in lexicographic order. Within a pivot set the free
/// entries are read off a binary counter; free positions are ordered by
/// column then row, with the lowest column on the least significant bit.
pub fn enumerate_subspaces(n: usize, k: usize) -> SubspaceIter {
    assert!(
        k <= n,
        "subspace dimension {k} exceeds ambient dimension {n}"
    );
    let mut it = SubspaceIter {
        n,
        pivots: Some((0..k).collect()),
        free: Vec::new(),
        counter: 0,
    };
    it.load_free_positions();
    it
}

pub struct SubspaceIter {
    n: usize,
    pivots: Option<Vec<usize>>,
    free: Vec<(usize, usize)>,
    counter: u64,
}

impl SubspaceIter {
    fn load_free_positions(&mut self) {
        self.free.clear();
        self.counter = 0;
        let Some(pivots) = &self.pivots else { return };
        for col in 0..self.n {
            if pivots.contains(&col) {
                continue;
            }
            for (row, &p) in pivots.iter().enumerate() {
                if p < col {
                    self.free.push((row, col));
                }
            }
        }
        assert!(self.free.len() < 64, "too many free entries to enumerate");
    }

    fn advance_pivots(&mut self) {
        let n = self.n;
        let Some(p) = self.pivots.as_mut() else {
            return;
        };
        let k = p.len();
        let Some(i) = (0..k).rev().find(|&i| p[i] < n - k + i) else {
            self.pivots = None;
            return;
        };
        p[i] += 1;
        for j in i + 1..k {
            p[j] = p[j - 1] + 1;
        }
        self.load_free_positions();
    }
}

impl Iterator for SubspaceIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        let pivots = self.pivots.clone()?;
        let mut gen = BitMat::zeros(pivots.len(), self.n);
        for (row, &p) in pivots.iter().enumerate() {
            gen.set(row, p, true);
        }
        for (t, &(row, col)) in self.free.iter().enumerate() {
            if (self.counter >> t) & 1 == 1 {
                gen.set(row, col, true);
            }
        }
        self.counter += 1;
        if self.counter == 1u64 << self.free.len() {
            self.advance_pivots();
        }
        Some(Subspace::from_rref(gen, pivots))
    }
}
