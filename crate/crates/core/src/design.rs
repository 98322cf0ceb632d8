//! Incidence structures stored as dense bit matrices, and 2-design checks.
//!
//! Rows are blocks and columns are points: row `i` is the characteristic
//! vector of block `i`, packed into 64-bit words.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::permgroup::Permutation;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

pub(crate) fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// A `b x v` 0/1 incidence matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IncidenceStructure {
    v: usize,
    b: usize,
    words: usize,
    data: Vec<u64>,
}

/// Parameters of a 2-(v,k,λ) design with `b` blocks and replication number `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub struct DesignParams {
    pub v: usize,
    pub b: usize,
    pub r: usize,
    pub k: usize,
    pub lambda: usize,
}

impl DesignParams {
    /// Validates the replication identity, double counting and `1 < k < v-1`.
    pub fn new(v: usize, b: usize, r: usize, k: usize, lambda: usize) -> Result<Self> {
        if !(1 < k && k + 1 < v) {
            return Err(Error::InvalidStructure(format!(
                "block size {k} violates 1 < k < v-1 for v = {v}"
            )));
        }
        if r * (k - 1) != lambda * (v - 1) {
            return Err(Error::InvalidStructure(format!(
                "replication identity fails: r(k-1) = {} but λ(v-1) = {}",
                r * (k - 1),
                lambda * (v - 1)
            )));
        }
        if b * k != v * r {
            return Err(Error::InvalidStructure(format!(
                "double counting fails: bk = {} but vr = {}",
                b * k,
                v * r
            )));
        }
        Ok(Self { v, b, r, k, lambda })
    }

    /// Parameters of a symmetric (v,k,λ) design, deriving `b = v` and `r = k`.
    pub fn symmetric(v: usize, k: usize, lambda: usize) -> Result<Self> {
        Self::new(v, v, k, k, lambda)
    }

    pub fn is_symmetric(&self) -> bool {
        self.v == self.b
    }

    /// `n = k - λ`, the order of a symmetric design.
    pub fn order(&self) -> usize {
        self.k - self.lambda
    }
}

impl fmt::Display for DesignParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2-({},{},{})", self.v, self.k, self.lambda)
    }
}

/// Why a structure failed to be a 2-design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DesignDefect {
    NonUniformBlockSize { block: usize, size: usize, expected: usize },
    DegenerateBlockSize { k: usize, v: usize },
    NonUniformReplication { point: usize, count: usize, expected: usize },
    PairCount { points: (usize, usize), count: usize, expected: usize },
}

impl fmt::Display for DesignDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonUniformBlockSize { block, size, expected } => {
                write!(f, "block {block} has {size} points, block 0 has {expected}")
            }
            Self::DegenerateBlockSize { k, v } => {
                write!(f, "block size {k} violates 1 < k < v-1 for v = {v}")
            }
            Self::NonUniformReplication { point, count, expected } => {
                write!(f, "point {point} lies on {count} blocks, point 0 on {expected}")
            }
            Self::PairCount { points, count, expected } => write!(
                f,
                "points {} and {} lie on {count} common blocks, expected {expected}",
                points.0, points.1
            ),
        }
    }
}

impl IncidenceStructure {
    /// The empty `b x v` structure.
    pub fn new(v: usize, b: usize) -> Result<Self> {
        if v == 0 || b == 0 {
            return Err(Error::InvalidStructure(format!(
                "need at least one point and one block, got v = {v}, b = {b}"
            )));
        }
        let words = words_for(v);
        Ok(Self {
            v,
            b,
            words,
            data: vec![0; words * b],
        })
    }

    pub fn from_blocks<B: AsRef<[usize]>>(v: usize, blocks: &[B]) -> Result<Self> {
        let mut s = Self::new(v, blocks.len())?;
        for (i, block) in blocks.iter().enumerate() {
            for &p in block.as_ref() {
                if p >= v {
                    return Err(Error::PointOutOfRange { point: p, degree: v });
                }
                s.set(i, p, true);
            }
        }
        Ok(s)
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let v = rows.first().map_or(0, Vec::len);
        let mut s = Self::new(v, rows.len())?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != v {
                return Err(Error::InvalidStructure(format!(
                    "row {i} has length {}, expected {v}",
                    row.len()
                )));
            }
            for (p, &bit) in row.iter().enumerate() {
                if bit {
                    s.set(i, p, true);
                }
            }
        }
        Ok(s)
    }

    pub(crate) fn from_packed(v: usize, b: usize, data: Vec<u64>) -> Self {
        debug_assert_eq!(data.len(), words_for(v) * b);
        Self {
            v,
            b,
            words: words_for(v),
            data,
        }
    }

    #[inline]
    pub fn v(&self) -> usize {
        self.v
    }

    #[inline]
    pub fn b(&self) -> usize {
        self.b
    }

    /// Words per packed row.
    #[inline]
    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, block: usize) -> &[u64] {
        &self.data[block * self.words..(block + 1) * self.words]
    }

    #[inline]
    pub fn get(&self, block: usize, point: usize) -> bool {
        self.data[block * self.words + point / 64] >> (point % 64) & 1 == 1
    }

    pub fn set(&mut self, block: usize, point: usize, value: bool) {
        let w = &mut self.data[block * self.words + point / 64];
        if value {
            *w |= 1 << (point % 64);
        } else {
            *w &= !(1 << (point % 64));
        }
    }

    pub fn block_size(&self, block: usize) -> usize {
        self.row(block).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn block_points(&self, block: usize) -> Vec<usize> {
        bit_positions(self.row(block)).collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.b).map(|i| self.block_points(i)).collect()
    }

    /// Number of points two blocks share.
    pub fn intersection(&self, i: usize, j: usize) -> usize {
        popcount_and(self.row(i), self.row(j)) as usize
    }

    /// The transpose: points become blocks and blocks become points.
    pub fn dual(&self) -> Self {
        let mut d = Self::new(self.b, self.v).expect("shape is nonzero");
        for i in 0..self.b {
            for p in bit_positions(self.row(i)) {
                d.set(p, i, true);
            }
        }
        d
    }

    /// Relabels point `x` as `points(x)` and block `i` as `blocks(i)`.
    pub fn permuted(&self, points: &Permutation, blocks: &Permutation) -> Result<Self> {
        if points.degree() != self.v {
            return Err(Error::DegreeMismatch {
                expected: self.v,
                found: points.degree(),
            });
        }
        if blocks.degree() != self.b {
            return Err(Error::DegreeMismatch {
                expected: self.b,
                found: blocks.degree(),
            });
        }
        let mut out = Self::new(self.v, self.b)?;
        for i in 0..self.b {
            let target = blocks.apply(i);
            for p in bit_positions(self.row(i)) {
                out.set(target, points.apply(p), true);
            }
        }
        Ok(out)
    }

    /// Image of a point set (given as a packed row) under a point permutation.
    pub(crate) fn map_row(row: &[u64], points: &Permutation) -> Vec<u64> {
        let mut out = vec![0u64; row.len()];
        for p in bit_positions(row) {
            let q = points.apply(p);
            out[q / 64] |= 1 << (q % 64);
        }
        out
    }

    /// First pair of identical blocks, if any.
    pub fn duplicate_blocks(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<&[u64], usize> = HashMap::new();
        for i in 0..self.b {
            if let Some(&j) = seen.get(self.row(i)) {
                return Some((j, i));
            }
            seen.insert(self.row(i), i);
        }
        None
    }

    /// The permutation of blocks induced by a point permutation, if the
    /// point permutation maps the block set onto itself.
    pub fn induced_block_permutation(&self, points: &Permutation) -> Option<Permutation> {
        if points.degree() != self.v {
            return None;
        }
        let mut index: HashMap<&[u64], Vec<usize>> = HashMap::new();
        for i in 0..self.b {
            index.entry(self.row(i)).or_default().push(i);
        }
        let mut images = vec![0usize; self.b];
        let mut used: HashMap<Vec<u64>, usize> = HashMap::new();
        for (i, image) in images.iter_mut().enumerate() {
            let row = Self::map_row(self.row(i), points);
            let candidates = index.get(row.as_slice())?;
            let k = used.entry(row).or_insert(0);
            *image = *candidates.get(*k)?;
            *k += 1;
        }
        Permutation::from_images(images).ok()
    }

    /// Checks the 2-design axioms, reporting the first failure.
    pub fn check_2design(&self) -> std::result::Result<DesignParams, DesignDefect> {
        let k = self.block_size(0);
        for i in 1..self.b {
            let size = self.block_size(i);
            if size != k {
                return Err(DesignDefect::NonUniformBlockSize {
                    block: i,
                    size,
                    expected: k,
                });
            }
        }
        if !(1 < k && k + 1 < self.v) {
            return Err(DesignDefect::DegenerateBlockSize { k, v: self.v });
        }
        let columns = self.dual();
        let r = columns.block_size(0);
        for p in 1..self.v {
            let count = columns.block_size(p);
            if count != r {
                return Err(DesignDefect::NonUniformReplication {
                    point: p,
                    count,
                    expected: r,
                });
            }
        }
        let lambda = columns.intersection(0, 1);
        for p in 0..self.v {
            for q in p + 1..self.v {
                let count = columns.intersection(p, q);
                if count != lambda {
                    return Err(DesignDefect::PairCount {
                        points: (p, q),
                        count,
                        expected: lambda,
                    });
                }
            }
        }
        Ok(DesignParams::new(self.v, self.b, r, k, lambda)
            .expect("counting identities hold for any 2-design"))
    }

    /// Parameters if the structure is a 2-design.
    pub fn as_2design(&self) -> Option<DesignParams> {
        self.check_2design().ok()
    }

    /// Whether a 2-design is symmetric; when it is, also confirms that every
    /// two blocks meet in exactly λ points.
    pub fn is_symmetric(&self) -> Result<bool> {
        let params = self
            .check_2design()
            .map_err(|d| Error::ContractViolation(format!("not a 2-design: {d}")))?;
        if params.v != params.b {
            return Ok(false);
        }
        for i in 0..self.b {
            for j in i + 1..self.b {
                let m = self.intersection(i, j);
                if m != params.lambda {
                    return Err(Error::ContractViolation(format!(
                        "blocks {i} and {j} meet in {m} points, expected {}",
                        params.lambda
                    )));
                }
            }
        }
        Ok(true)
    }

    /// Params of a verified symmetric design, or a contract error.
    pub fn symmetric_params(&self) -> Result<DesignParams> {
        if !self.is_symmetric()? {
            return Err(Error::ContractViolation(format!(
                "design with v = {} and b = {} is not symmetric",
                self.v, self.b
            )));
        }
        Ok(self.as_2design().expect("checked above"))
    }

    /// Develops a base block through the cyclic group of order `modulus`:
    /// block `t` is `{(d + t) mod m : d in residues}`.
    pub fn develop_difference_set(residues: &[usize], modulus: usize) -> Result<Self> {
        if residues.is_empty() {
            return Err(Error::InvalidStructure("empty residue set".into()));
        }
        if let Some(&d) = residues.iter().find(|&&d| d >= modulus) {
            return Err(Error::PointOutOfRange {
                point: d,
                degree: modulus,
            });
        }
        let blocks: Vec<Vec<usize>> = (0..modulus)
            .map(|t| residues.iter().map(|d| (d + t) % modulus).collect())
            .collect();
        Self::from_blocks(modulus, &blocks)
    }
}

pub(crate) fn bit_positions(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(w, &word)| {
        let mut bits = word;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let t = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(w * 64 + t)
        })
    })
}

impl fmt::Debug for IncidenceStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IncidenceStructure {}x{}", self.b, self.v)?;
        for i in 0..self.b.min(32) {
            let line: String = (0..self.v)
                .map(|p| if self.get(i, p) { '1' } else { '0' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::PermGroup;

    fn fano() -> IncidenceStructure {
        IncidenceStructure::develop_difference_set(&[0, 1, 3], 7).unwrap()
    }

    fn biplane() -> IncidenceStructure {
        IncidenceStructure::develop_difference_set(&[1, 3, 4, 5, 9], 11).unwrap()
    }

    /// Pair counts by direct enumeration over blocks, independent of the packed columns.
    fn brute_pair_counts(s: &IncidenceStructure) -> Vec<usize> {
        let blocks = s.blocks();
        let mut counts = Vec::new();
        for p in 0..s.v() {
            for q in p + 1..s.v() {
                counts.push(blocks.iter().filter(|b| b.contains(&p) && b.contains(&q)).count());
            }
        }
        counts
    }

    #[test]
    fn fano_is_a_symmetric_design() {
        let f = fano();
        let counts = brute_pair_counts(&f);
        assert_eq!(counts.len(), 21);
        assert!(counts.iter().all(|&c| c == 1));
        assert_eq!(
            f.as_2design(),
            Some(DesignParams { v: 7, b: 7, r: 3, k: 3, lambda: 1 })
        );
        assert!(f.is_symmetric().unwrap());
        for i in 0..7 {
            for j in i + 1..7 {
                assert_eq!(f.intersection(i, j), 1);
            }
        }
    }

    #[test]
    fn biplane_is_symmetric_with_lambda_two() {
        let s = biplane();
        assert!(brute_pair_counts(&s).iter().all(|&c| c == 2));
        assert_eq!(s.as_2design().unwrap(), DesignParams::symmetric(11, 5, 2).unwrap());
        assert!(s.is_symmetric().unwrap());
        let mut pairs = 0;
        for i in 0..11 {
            for j in i + 1..11 {
                assert_eq!(s.intersection(i, j), 2);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 55);
    }

    #[test]
    fn deleting_a_block_breaks_replication() {
        let f = fano();
        let blocks = f.blocks();
        let s = IncidenceStructure::from_blocks(7, &blocks[1..]).unwrap();
        assert!(matches!(
            s.check_2design(),
            Err(DesignDefect::NonUniformReplication { .. })
        ));
        assert!(s.as_2design().is_none());
        assert!(matches!(s.is_symmetric(), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn singleton_blocks_are_degenerate() {
        let s = IncidenceStructure::develop_difference_set(&[0], 5).unwrap();
        assert_eq!(s.b(), 5);
        assert_eq!(
            s.check_2design(),
            Err(DesignDefect::DegenerateBlockSize { k: 1, v: 5 })
        );
        assert!(IncidenceStructure::develop_difference_set(&[], 5).is_err());
    }

    #[test]
    fn dual_is_an_involution() {
        let f = fano();
        assert_eq!(f.dual().dual(), f);
        let one = IncidenceStructure::from_blocks(3, &[vec![0, 2]]).unwrap();
        let d = one.dual();
        assert_eq!((d.v(), d.b()), (1, 3));
        assert!(d.get(0, 0) && !d.get(1, 0) && d.get(2, 0));
        assert_eq!(f.dual().as_2design(), f.as_2design());
    }

    #[test]
    fn development_is_shift_invariant() {
        for s in [fano(), biplane()] {
            let shift = PermGroup::cyclic(s.v()).generators()[0].clone();
            assert!(s.induced_block_permutation(&shift).is_some());
        }
        let swap = Permutation::from_cycles(7, &[&[0, 1]]).unwrap();
        assert!(fano().induced_block_permutation(&swap).is_none());
    }

    #[test]
    fn params_identities_are_enforced() {
        assert!(DesignParams::new(7, 7, 3, 3, 1).is_ok());
        assert!(DesignParams::new(7, 7, 3, 3, 2).is_err());
        assert!(DesignParams::new(7, 8, 3, 3, 1).is_err());
        assert!(DesignParams::new(4, 4, 3, 3, 2).is_err());
        let p = DesignParams::symmetric(176, 50, 14).unwrap();
        assert_eq!(p.r * (p.k - 1), p.lambda * (p.v - 1));
        assert_eq!(p.to_string(), "2-(176,50,14)");
    }

    #[test]
    fn relabeling_moves_rows_and_columns() {
        let f = fano();
        let pts = Permutation::from_cycles(7, &[&[0, 1, 2, 3, 4, 5, 6]]).unwrap();
        let blk = Permutation::identity(7);
        let g = f.permuted(&pts, &blk).unwrap();
        for i in 0..7 {
            for p in 0..7 {
                assert_eq!(f.get(i, p), g.get(i, pts.apply(p)));
            }
        }
        assert_eq!(f.duplicate_blocks(), None);
        let dup = IncidenceStructure::from_blocks(3, &[vec![0, 1], vec![1, 2], vec![0, 1]]).unwrap();
        assert_eq!(dup.duplicate_blocks(), Some((0, 2)));
    }
}
