//! Rank of 0/1 incidence matrices over prime fields.

use crate::design::IncidenceStructure;
use crate::error::{Error, Result};

/// The field of integers modulo a prime `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    /// Accepts any prime below 2^16, checked by trial division.
    pub fn new(p: u32) -> Result<Self> {
        if !(2..1 << 16).contains(&p) || (2..).take_while(|d| d * d <= p).any(|d| p.is_multiple_of(d)) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    fn inv(&self, a: u32) -> u32 {
        // a^(p-2) mod p
        let (mut base, mut e, mut acc) = (a as u64, self.p as u64 - 2, 1u64);
        let p = self.p as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc as u32
    }
}

/// Rank of the `b x v` incidence matrix over GF(p).
pub fn p_rank(s: &IncidenceStructure, field: PrimeField) -> usize {
    if field.p == 2 {
        rank_gf2(s)
    } else {
        rank_gfp(s, field)
    }
}

fn rank_gf2(s: &IncidenceStructure) -> usize {
    let words = s.words();
    let mut rows: Vec<Vec<u64>> = (0..s.b()).map(|i| s.row(i).to_vec()).collect();
    let mut rank = 0;
    for col in 0..s.v() {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let (top, rest) = rows.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            if row[w] & bit != 0 {
                for k in w..words {
                    row[k] ^= pivot_row[k];
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn rank_gfp(s: &IncidenceStructure, field: PrimeField) -> usize {
    let p = field.p;
    let mut rows: Vec<Vec<u32>> = (0..s.b())
        .map(|i| (0..s.v()).map(|c| s.get(i, c) as u32).collect())
        .collect();
    let mut rank = 0;
    for col in 0..s.v() {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = field.inv(rows[rank][col]);
        for x in rows[rank][col..].iter_mut() {
            *x = *x * inv % p;
        }
        let (top, rest) = rows.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            let f = row[col];
            if f != 0 {
                for (x, &y) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = (*x + (p - f) * y) % p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// For a symmetric design: if `p` does not divide `k - λ`, the p-rank must
/// be `v - 1` or `v`. Returns whether that holds (vacuously true when `p`
/// divides the order).
pub fn hamada_bound_check(s: &IncidenceStructure, field: PrimeField) -> Result<bool> {
    let params = s.symmetric_params()?;
    if params.order() % field.p as usize == 0 {
        return Ok(true);
    }
    let rank = p_rank(s, field);
    Ok(rank + 1 >= params.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::Permutation;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    /// Plain integer elimination modulo p, one entry at a time.
    fn naive_rank(m: &[Vec<i64>], p: i64) -> usize {
        let mut m: Vec<Vec<i64>> = m.to_vec();
        let (rows, cols) = (m.len(), m.first().map_or(0, Vec::len));
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..rows).find(|&i| m[i][c].rem_euclid(p) != 0) else { continue };
            m.swap(r, piv);
            let a = m[r][c].rem_euclid(p);
            let inv = (1..p).find(|x| a * x % p == 1).unwrap();
            for i in 0..rows {
                if i != r {
                    let f = m[i][c] * inv % p;
                    for j in 0..cols {
                        m[i][j] = (m[i][j] - f * m[r][j]).rem_euclid(p);
                    }
                }
            }
            r += 1;
        }
        r
    }

    fn to_ints(s: &IncidenceStructure) -> Vec<Vec<i64>> {
        (0..s.b()).map(|i| (0..s.v()).map(|c| s.get(i, c) as i64).collect()).collect()
    }

    fn fano() -> IncidenceStructure {
        IncidenceStructure::develop_difference_set(&[0, 1, 3], 7).unwrap()
    }

    #[test]
    fn identity_has_full_rank() {
        let id = IncidenceStructure::from_blocks(5, &(0..5).map(|i| vec![i]).collect::<Vec<_>>()).unwrap();
        for p in [2, 3, 5] {
            assert_eq!(p_rank(&id, PrimeField::new(p).unwrap()), 5);
        }
    }

    #[test]
    fn non_primes_are_rejected() {
        for p in [0, 1, 4, 9, 15] {
            assert_eq!(PrimeField::new(p), Err(Error::NotPrime(p)));
        }
        assert!(PrimeField::new(7).is_ok());
    }

    #[test]
    fn fano_ranks_match_oracle() {
        let f = fano();
        for p in [2, 3, 5, 7] {
            let expected = naive_rank(&to_ints(&f), p as i64);
            assert_eq!(p_rank(&f, PrimeField::new(p).unwrap()), expected, "p = {p}");
        }
        // the binary Hamming code has dimension 4
        assert_eq!(p_rank(&f, PrimeField::new(2).unwrap()), 4);
    }

    #[test]
    fn hamada_on_fano() {
        let f = fano();
        let five = PrimeField::new(5).unwrap();
        assert!([6, 7].contains(&p_rank(&f, five)));
        assert!(hamada_bound_check(&f, five).unwrap());
        assert!(hamada_bound_check(&f, PrimeField::new(2).unwrap()).unwrap());
        let broken = IncidenceStructure::from_blocks(7, &f.blocks()[1..]).unwrap();
        assert!(hamada_bound_check(&broken, five).is_err());
    }

    #[test]
    fn gf2_matches_naive_on_random_matrices() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let density = rng.gen_range(0.05..0.6);
            let rows: Vec<Vec<bool>> = (0..20)
                .map(|_| (0..20).map(|_| rng.gen_bool(density)).collect())
                .collect();
            let s = IncidenceStructure::from_rows(&rows).unwrap();
            let expected = naive_rank(&to_ints(&s), 2);
            assert_eq!(p_rank(&s, PrimeField::new(2).unwrap()), expected);
            assert_eq!(p_rank(&s.dual(), PrimeField::new(2).unwrap()), expected);
            let expected3 = naive_rank(&to_ints(&s), 3);
            assert_eq!(p_rank(&s, PrimeField::new(3).unwrap()), expected3);
        }
    }

    #[test]
    fn rank_is_invariant_under_relabeling() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let s = IncidenceStructure::develop_difference_set(&[1, 3, 4, 5, 9], 11).unwrap();
        for p in [2, 3, 5] {
            let field = PrimeField::new(p).unwrap();
            let base = p_rank(&s, field);
            for _ in 0..10 {
                let mut a: Vec<usize> = (0..11).collect();
                let mut b: Vec<usize> = (0..11).collect();
                a.shuffle(&mut rng);
                b.shuffle(&mut rng);
                let t = s
                    .permuted(&Permutation::from_images(a).unwrap(), &Permutation::from_images(b).unwrap())
                    .unwrap();
                assert_eq!(p_rank(&t, field), base);
            }
        }
    }
}
