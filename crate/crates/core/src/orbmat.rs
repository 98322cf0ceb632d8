//! Orbit matrices (tactical decompositions) of symmetric designs.
//!
//! For a group acting on a symmetric (v,k,λ) design with point orbit sizes
//! `ω[j]` and block orbit sizes `Ω[i]`, the entry `a[i][j]` counts the points
//! of orbit `j` on a fixed block of orbit `i`. Valid matrices satisfy
//!
//! * `Σ_j a[i][j] = k` for every block orbit `i`,
//! * `Σ_i (Ω[i]/ω[j]) a[i][j] = r` for every point orbit `j`,
//! * `Σ_i (Ω[i]/ω[j]) a[i][j] a[i][j'] = λ ω[j'] + δ(j,j') (r - λ)`.
//!
//! All three are evaluated in exact rationals.

use std::fmt;

use num_rational::Ratio;

use crate::design::{bit_positions, DesignParams, IncidenceStructure};
use crate::error::{Error, Result};
use crate::permgroup::{PermGroup, Permutation};

type Q = Ratio<i128>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitMatrix {
    pub params: DesignParams,
    pub point_orbit_sizes: Vec<usize>,
    pub block_orbit_sizes: Vec<usize>,
    /// `entries[i][j]`: points of point orbit `j` on a block of block orbit `i`.
    pub entries: Vec<Vec<usize>>,
}

impl OrbitMatrix {
    /// Checks only the shape: positive orbit sizes summing to `v` and `b`, and
    /// an `m x n` entry table. The counting equations are checked by
    /// [`check_orbit_matrix`].
    pub fn new(
        params: DesignParams,
        point_orbit_sizes: Vec<usize>,
        block_orbit_sizes: Vec<usize>,
        entries: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let shape = |msg: String| Err(Error::InvalidStructure(msg));
        if point_orbit_sizes.contains(&0) || block_orbit_sizes.contains(&0) {
            return shape("orbit sizes must be positive".into());
        }
        if point_orbit_sizes.iter().sum::<usize>() != params.v {
            return shape(format!("point orbit sizes do not sum to v = {}", params.v));
        }
        if block_orbit_sizes.iter().sum::<usize>() != params.b {
            return shape(format!("block orbit sizes do not sum to b = {}", params.b));
        }
        if entries.len() != block_orbit_sizes.len() {
            return shape(format!(
                "{} rows for {} block orbits",
                entries.len(),
                block_orbit_sizes.len()
            ));
        }
        if let Some(i) = entries.iter().position(|r| r.len() != point_orbit_sizes.len()) {
            return shape(format!(
                "row {i} has {} entries for {} point orbits",
                entries[i].len(),
                point_orbit_sizes.len()
            ));
        }
        Ok(Self {
            params,
            point_orbit_sizes,
            block_orbit_sizes,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.block_orbit_sizes.len()
    }

    pub fn cols(&self) -> usize {
        self.point_orbit_sizes.len()
    }

    /// The same matrix with rows and columns reordered: new row `i` is old
    /// row `rows[i]`, new column `j` is old column `cols[j]`.
    pub fn reordered(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self {
            params: self.params,
            point_orbit_sizes: cols.iter().map(|&j| self.point_orbit_sizes[j]).collect(),
            block_orbit_sizes: rows.iter().map(|&i| self.block_orbit_sizes[i]).collect(),
            entries: rows
                .iter()
                .map(|&i| cols.iter().map(|&j| self.entries[i][j]).collect())
                .collect(),
        }
    }
}

impl fmt::Display for OrbitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .flatten()
            .map(|e| e.to_string().len())
            .max()
            .unwrap_or(1);
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|e| format!("{e:>width$}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// The first counting equation an orbit matrix violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitMatrixViolation {
    EntryExceedsOrbit { row: usize, col: usize, entry: usize, orbit_size: usize },
    RowSum { row: usize, sum: usize, k: usize },
    ColumnSum { col: usize, value: Q, r: usize },
    PairCount { col: usize, other: usize, value: Q, expected: Q },
}

impl fmt::Display for OrbitMatrixViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EntryExceedsOrbit { row, col, entry, orbit_size } => write!(
                f,
                "entry ({row},{col}) = {entry} exceeds point orbit size {orbit_size}"
            ),
            Self::RowSum { row, sum, k } => write!(f, "row {row} sums to {sum}, expected k = {k}"),
            Self::ColumnSum { col, value, r } => {
                write!(f, "weighted sum of column {col} is {value}, expected r = {r}")
            }
            Self::PairCount { col, other, value, expected } => write!(
                f,
                "pair equation for columns ({col},{other}) gives {value}, expected {expected}"
            ),
        }
    }
}

/// Verifies the three families of decomposition equations exactly.
pub fn check_orbit_matrix(om: &OrbitMatrix) -> std::result::Result<(), OrbitMatrixViolation> {
    let p = om.params;
    for (i, row) in om.entries.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if a > om.point_orbit_sizes[j] {
                return Err(OrbitMatrixViolation::EntryExceedsOrbit {
                    row: i,
                    col: j,
                    entry: a,
                    orbit_size: om.point_orbit_sizes[j],
                });
            }
        }
        let sum: usize = row.iter().sum();
        if sum != p.k {
            return Err(OrbitMatrixViolation::RowSum { row: i, sum, k: p.k });
        }
    }
    let q = |x: usize| Q::from_integer(x as i128);
    let weight = |i: usize, j: usize| Q::new(om.block_orbit_sizes[i] as i128, om.point_orbit_sizes[j] as i128);
    for j in 0..om.cols() {
        let value = (0..om.rows()).fold(Q::from_integer(0), |acc, i| acc + weight(i, j) * q(om.entries[i][j]));
        if value != q(p.r) {
            return Err(OrbitMatrixViolation::ColumnSum { col: j, value, r: p.r });
        }
    }
    for j in 0..om.cols() {
        for jj in 0..om.cols() {
            let value = (0..om.rows()).fold(Q::from_integer(0), |acc, i| {
                acc + weight(i, j) * q(om.entries[i][j] * om.entries[i][jj])
            });
            let mut expected = q(p.lambda * om.point_orbit_sizes[jj]);
            if j == jj {
                expected += q(p.r - p.lambda);
            }
            if value != expected {
                return Err(OrbitMatrixViolation::PairCount { col: j, other: jj, value, expected });
            }
        }
    }
    Ok(())
}

/// Result of decomposing a design under a group of automorphisms.
#[derive(Clone, Debug)]
pub struct TacticalDecomposition {
    /// Point orbits, ordered by (size, smallest point); matrix column order.
    pub point_orbits: Vec<Vec<usize>>,
    /// Block orbits, ordered by (size, smallest block); matrix row order.
    pub block_orbits: Vec<Vec<usize>>,
    /// The induced action on blocks, one permutation per group generator.
    pub block_group: PermGroup,
    pub matrix: OrbitMatrix,
}

fn sorted_orbits(group: &PermGroup) -> Vec<Vec<usize>> {
    let mut orbits = group.orbits();
    orbits.sort_by_key(|o| (o.len(), o[0]));
    orbits
}

/// Block permutations induced by each generator; errors name the first
/// generator that does not map blocks to blocks.
pub fn induced_block_action(s: &IncidenceStructure, group: &PermGroup) -> Result<PermGroup> {
    if group.degree() != s.v() {
        return Err(Error::DegreeMismatch {
            expected: s.v(),
            found: group.degree(),
        });
    }
    let gens = group
        .generators()
        .iter()
        .enumerate()
        .map(|(idx, g)| {
            s.induced_block_permutation(g)
                .ok_or(Error::NotPreserved { generator: idx })
        })
        .collect::<Result<Vec<Permutation>>>()?;
    PermGroup::new(s.b(), gens)
}

/// Tactical decomposition of a symmetric design under a point group that
/// preserves it.
pub fn tactical_decomposition(s: &IncidenceStructure, group: &PermGroup) -> Result<TacticalDecomposition> {
    let params = s.symmetric_params()?;
    let block_group = induced_block_action(s, group)?;
    let point_orbits = sorted_orbits(group);
    let block_orbits = sorted_orbits(&block_group);
    let mut orbit_of = vec![0usize; s.v()];
    for (j, o) in point_orbits.iter().enumerate() {
        for &x in o {
            orbit_of[x] = j;
        }
    }
    let count = |block: usize| {
        let mut row = vec![0usize; point_orbits.len()];
        for x in bit_positions(s.row(block)) {
            row[orbit_of[x]] += 1;
        }
        row
    };
    let mut entries = Vec::with_capacity(block_orbits.len());
    for orbit in &block_orbits {
        let row = count(orbit[0]);
        if let Some(&bad) = orbit[1..].iter().find(|&&blk| count(blk) != row) {
            return Err(Error::ContractViolation(format!(
                "blocks {} and {bad} of one orbit meet the point orbits differently",
                orbit[0]
            )));
        }
        entries.push(row);
    }
    let matrix = OrbitMatrix::new(
        params,
        point_orbits.iter().map(Vec::len).collect(),
        block_orbits.iter().map(Vec::len).collect(),
        entries,
    )?;
    Ok(TacticalDecomposition {
        point_orbits,
        block_orbits,
        block_group,
        matrix,
    })
}

/// Searches for row and column reorderings (respecting orbit sizes) taking
/// `a` to `b`; returns `(rows, cols)` with `a.reordered(rows, cols) == b`.
pub fn equivalent_up_to_ordering(a: &OrbitMatrix, b: &OrbitMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    if a.params != b.params || a.rows() != b.rows() || a.cols() != b.cols() {
        return None;
    }
    let mut sa = a.point_orbit_sizes.clone();
    let mut sb = b.point_orbit_sizes.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }
    let mut cols = Vec::with_capacity(a.cols());
    let mut used = vec![false; a.cols()];
    if !assign_columns(a, b, &mut cols, &mut used) {
        return None;
    }
    // rows: match each row of b to an unused row of a with equal size and content
    let mut taken = vec![false; a.rows()];
    let mut rows = Vec::with_capacity(a.rows());
    for i in 0..b.rows() {
        let found = (0..a.rows()).find(|&ia| {
            !taken[ia]
                && a.block_orbit_sizes[ia] == b.block_orbit_sizes[i]
                && cols.iter().enumerate().all(|(j, &ja)| a.entries[ia][ja] == b.entries[i][j])
        })?;
        taken[found] = true;
        rows.push(found);
    }
    Some((rows, cols))
}

/// Multisets of (row size, row prefix) must agree for the columns placed so far.
fn prefix_compatible(a: &OrbitMatrix, b: &OrbitMatrix, cols: &[usize]) -> bool {
    let mut ra: Vec<(usize, Vec<usize>)> = (0..a.rows())
        .map(|i| (a.block_orbit_sizes[i], cols.iter().map(|&j| a.entries[i][j]).collect()))
        .collect();
    let mut rb: Vec<(usize, Vec<usize>)> = (0..b.rows())
        .map(|i| (b.block_orbit_sizes[i], b.entries[i][..cols.len()].to_vec()))
        .collect();
    ra.sort();
    rb.sort();
    ra == rb
}

fn assign_columns(a: &OrbitMatrix, b: &OrbitMatrix, cols: &mut Vec<usize>, used: &mut [bool]) -> bool {
    if cols.len() == b.cols() {
        return true;
    }
    let target = b.point_orbit_sizes[cols.len()];
    for ja in 0..a.cols() {
        if used[ja] || a.point_orbit_sizes[ja] != target {
            continue;
        }
        cols.push(ja);
        used[ja] = true;
        if prefix_compatible(a, b, cols) && assign_columns(a, b, cols, used) {
            return true;
        }
        used[ja] = false;
        cols.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon;

    fn params() -> DesignParams {
        DesignParams::symmetric(176, 50, 14).unwrap()
    }

    fn m1() -> OrbitMatrix {
        OrbitMatrix::new(params(), vec![80, 96], vec![80, 96], vec![vec![26, 24], vec![20, 30]]).unwrap()
    }

    fn m2() -> OrbitMatrix {
        OrbitMatrix::new(
            params(),
            vec![1, 70, 105],
            vec![15, 35, 126],
            vec![vec![1, 28, 21], vec![1, 16, 33], vec![0, 20, 30]],
        )
        .unwrap()
    }

    #[test]
    fn m1_hand_arithmetic() {
        // column 0: (80/80)*26 + (96/80)*20 = 50
        assert_eq!(Q::from_integer(26) + Q::new(96, 80) * Q::from_integer(20), Q::from_integer(50));
        // quadratic (0,0): 26^2 + (96/80)*20^2 = 1156 = 14*80 + 36
        let v = Q::from_integer(26 * 26) + Q::new(96, 80) * Q::from_integer(400);
        assert_eq!(v, Q::from_integer(1156));
        assert_eq!(1156, 14 * 80 + 36);
        assert_eq!(check_orbit_matrix(&m1()), Ok(()));
    }

    #[test]
    fn m2_hand_arithmetic() {
        // quadratic (1,2): (15/70)*28*21 + (35/70)*16*33 + (126/70)*20*30 = 1470 = 14*105
        let v = Q::new(15, 70) * Q::from_integer(28 * 21)
            + Q::new(35, 70) * Q::from_integer(16 * 33)
            + Q::new(126, 70) * Q::from_integer(20 * 30);
        assert_eq!(v, Q::from_integer(1470));
        assert_eq!(check_orbit_matrix(&m2()), Ok(()));
    }

    #[test]
    fn perturbed_entry_is_rejected() {
        let mut bad = m1();
        bad.entries[0][0] = 27;
        assert_eq!(
            check_orbit_matrix(&bad),
            Err(OrbitMatrixViolation::RowSum { row: 0, sum: 51, k: 50 })
        );
    }

    #[test]
    fn shape_is_checked() {
        assert!(OrbitMatrix::new(params(), vec![80, 95], vec![80, 96], vec![vec![26, 24], vec![20, 30]]).is_err());
        assert!(OrbitMatrix::new(params(), vec![80, 96], vec![80, 96], vec![vec![26, 24]]).is_err());
    }

    #[test]
    fn trivial_group_gives_incidence_matrix() {
        let f = IncidenceStructure::develop_difference_set(&[0, 1, 3], 7).unwrap();
        let td = tactical_decomposition(&f, &PermGroup::trivial(7)).unwrap();
        assert!(td.matrix.point_orbit_sizes.iter().all(|&w| w == 1));
        assert!(td.matrix.block_orbit_sizes.iter().all(|&w| w == 1));
        for i in 0..7 {
            for p in 0..7 {
                assert_eq!(td.matrix.entries[i][p], f.get(i, p) as usize);
            }
        }
        assert_eq!(check_orbit_matrix(&td.matrix), Ok(()));
    }

    #[test]
    fn cyclic_subgroups_give_valid_matrices() {
        let f = IncidenceStructure::develop_difference_set(&[1, 3, 4, 5, 9], 11).unwrap();
        let cf = canon::canonical_form(&f).unwrap();
        for a in &cf.aut_generators {
            let g = PermGroup::new(11, vec![a.points.clone()]).unwrap();
            let td = tactical_decomposition(&f, &g).unwrap();
            assert_eq!(check_orbit_matrix(&td.matrix), Ok(()));
            // Σ_i Ω[i] a[i][j] = r ω[j]
            let om = &td.matrix;
            for j in 0..om.cols() {
                let lhs: usize = (0..om.rows()).map(|i| om.block_orbit_sizes[i] * om.entries[i][j]).sum();
                assert_eq!(lhs, om.params.r * om.point_orbit_sizes[j]);
            }
        }
    }

    #[test]
    fn non_automorphisms_are_named() {
        let f = IncidenceStructure::develop_difference_set(&[0, 1, 3], 7).unwrap();
        let g = PermGroup::new(
            7,
            vec![
                PermGroup::cyclic(7).generators()[0].clone(),
                Permutation::from_cycles(7, &[&[0, 1]]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(
            tactical_decomposition(&f, &g).unwrap_err(),
            Error::NotPreserved { generator: 1 }
        );
    }

    #[test]
    fn reorderings_are_found() {
        let m = m2();
        let shuffled = m.reordered(&[2, 0, 1], &[1, 2, 0]);
        let (rows, cols) = equivalent_up_to_ordering(&shuffled, &m).unwrap();
        assert_eq!(shuffled.reordered(&rows, &cols), m);
        let mut other = m.clone();
        other.entries[0][1] = 27;
        assert!(equivalent_up_to_ordering(&other, &m).is_none());
    }
}
