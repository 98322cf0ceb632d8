//! Classical objects used to build the 176-point designs from scratch:
//! the extended binary Golay code, the Steiner system S(5,8,24), and the
//! Higman symmetric 2-(176,50,14) design.
//!
//! Fix two coordinates `a = 0` and `b = 1`. Points are the octads through `a`
//! missing `b`, blocks are the octads through `b` missing `a`, and a point is
//! on a block when the two octads meet in 0 or 4 coordinates.

use crate::design::IncidenceStructure;
use crate::error::{Error, Result};
use crate::permgroup::Permutation;

/// Adjacency of the icosahedron: apex 0, upper ring 1..=5, lower ring 6..=10, apex 11.
fn icosahedron() -> [[bool; 12]; 12] {
    let mut adj = [[false; 12]; 12];
    let mut edge = |a: usize, b: usize| {
        adj[a][b] = true;
        adj[b][a] = true;
    };
    for i in 0..5 {
        edge(0, 1 + i);
        edge(11, 6 + i);
        edge(1 + i, 1 + (i + 1) % 5);
        edge(6 + i, 6 + (i + 1) % 5);
        edge(1 + i, 6 + i);
        edge(1 + i, 6 + (i + 1) % 5);
    }
    adj
}

/// The 4096 codewords of the [24,12,8] Golay code as 24-bit masks, generated
/// by `[I | J - A]` with `A` the icosahedron adjacency matrix.
pub fn golay_code() -> Vec<u32> {
    let adj = icosahedron();
    let rows: Vec<u32> = (0..12)
        .map(|i| {
            let mut w = 1u32 << i;
            for j in 0..12 {
                if !adj[i][j] {
                    w |= 1 << (12 + j);
                }
            }
            w
        })
        .collect();
    (0..1u32 << 12)
        .map(|m| {
            rows.iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .fold(0, |acc, (_, r)| acc ^ r)
        })
        .collect()
}

/// The 759 weight-8 codewords, sorted.
pub fn octads() -> Vec<u32> {
    let mut o: Vec<u32> = golay_code()
        .into_iter()
        .filter(|w| w.count_ones() == 8)
        .collect();
    o.sort_unstable();
    o
}

/// S(5,8,24) as a 759 x 24 incidence structure.
pub fn steiner_system_5_8_24() -> IncidenceStructure {
    let blocks: Vec<Vec<usize>> = octads()
        .into_iter()
        .map(|o| (0..24).filter(|&x| o >> x & 1 == 1).collect())
        .collect();
    IncidenceStructure::from_blocks(24, &blocks).expect("octads live on 24 points")
}

/// The Higman design together with the octads labeling its points and blocks.
#[derive(Clone, Debug)]
pub struct HigmanConstruction {
    pub design: IncidenceStructure,
    /// Octad of each point (contains coordinate 0, not 1).
    pub point_octads: Vec<u32>,
    /// Octad of each block (contains coordinate 1, not 0).
    pub block_octads: Vec<u32>,
}

impl HigmanConstruction {
    pub fn new() -> Self {
        let all = octads();
        let point_octads: Vec<u32> = all.iter().copied().filter(|o| o & 1 == 1 && o & 2 == 0).collect();
        let block_octads: Vec<u32> = all.iter().copied().filter(|o| o & 2 == 2 && o & 1 == 0).collect();
        let blocks: Vec<Vec<usize>> = block_octads
            .iter()
            .map(|&b| {
                point_octads
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| matches!((p & b).count_ones(), 0 | 4))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        let design = IncidenceStructure::from_blocks(point_octads.len(), &blocks)
            .expect("176 points");
        Self {
            design,
            point_octads,
            block_octads,
        }
    }

    /// Action on the 176 points of a coordinate permutation fixing 0 and 1.
    pub fn point_action(&self, coords: &Permutation) -> Result<Permutation> {
        induced_on_octads(&self.point_octads, coords)
    }

    /// Action on the 176 blocks of a coordinate permutation fixing 0 and 1.
    pub fn block_action(&self, coords: &Permutation) -> Result<Permutation> {
        induced_on_octads(&self.block_octads, coords)
    }
}

impl Default for HigmanConstruction {
    fn default() -> Self {
        Self::new()
    }
}

/// The Higman symmetric 2-(176,50,14) design.
pub fn higman_design() -> IncidenceStructure {
    HigmanConstruction::new().design
}

/// Permutation of a list of octads induced by a permutation of the 24 coordinates.
pub fn induced_on_octads(octads: &[u32], coords: &Permutation) -> Result<Permutation> {
    if coords.degree() != 24 {
        return Err(Error::DegreeMismatch {
            expected: 24,
            found: coords.degree(),
        });
    }
    let index: std::collections::HashMap<u32, usize> =
        octads.iter().enumerate().map(|(i, &o)| (o, i)).collect();
    let images = octads
        .iter()
        .map(|&o| {
            let image = (0..24)
                .filter(|&x| o >> x & 1 == 1)
                .fold(0u32, |acc, x| acc | 1 << coords.apply(x));
            index.get(&image).copied().ok_or_else(|| {
                Error::ContractViolation(format!("octad {o:#08x} is not mapped into the list"))
            })
        })
        .collect::<Result<Vec<usize>>>()?;
    Permutation::from_images(images)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golay_weights() {
        let code = golay_code();
        let mut dist = [0usize; 25];
        for w in &code {
            dist[w.count_ones() as usize] += 1;
        }
        assert_eq!(dist[0], 1);
        assert_eq!(dist[8], 759);
        assert_eq!(dist[12], 2576);
        assert_eq!(dist[16], 759);
        assert_eq!(dist[24], 1);
        assert_eq!(dist.iter().sum::<usize>(), 4096);
    }

    #[test]
    fn octads_form_a_steiner_system() {
        let o = octads();
        // every 5-set lies in exactly one octad; check all 5-sets through 0,1,2,3
        for x in 4..24 {
            let mask = 0b1111u32 | 1 << x;
            assert_eq!(o.iter().filter(|&&w| w & mask == mask).count(), 1);
        }
    }

    #[test]
    fn higman_is_a_symmetric_design() {
        let h = higman_design();
        assert_eq!((h.v(), h.b()), (176, 176));
        let p = h.as_2design().unwrap();
        assert_eq!((p.v, p.k, p.lambda), (176, 50, 14));
        assert!(h.is_symmetric().unwrap());
    }
}
