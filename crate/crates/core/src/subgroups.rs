//! Conjugacy classes of subgroups of a given order, for groups small enough
//! to list element by element.
//!
//! Cyclic extension: every subgroup `K` has a maximal subgroup `L`, and
//! `K = <L, z>` for some `z` of prime-power order outside `L`. Starting from
//! the trivial group, each class representative `L` whose order divides the
//! target is extended by every prime-power element, one per double coset
//! `L z L` (they all give the same group), and new groups are kept up to
//! conjugacy.

use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::permgroup::{PermGroup, Permutation};

/// Largest group order accepted by [`subgroup_classes`].
pub const MAX_ELEMENTS: usize = 200_000;

/// A permutation group with every element listed; elements are indices.
pub struct ElementTable {
    degree: usize,
    base: Vec<usize>,
    elems: Vec<Vec<u16>>,
    index: HashMap<u128, u32>,
    inv: Vec<u32>,
    gens: Vec<u32>,
}

impl ElementTable {
    pub fn new(group: &PermGroup) -> Result<Self> {
        let order = group
            .order()
            .to_usize()
            .filter(|&n| n <= MAX_ELEMENTS)
            .ok_or_else(|| Error::InvalidProblem(format!("group of order {} is too large to list", group.order())))?;
        let base = group.base();
        if base.len() > 8 || group.degree() > u16::MAX as usize {
            return Err(Error::InvalidProblem("base too long for element indexing".into()));
        }
        let mut table = Self {
            degree: group.degree(),
            base,
            elems: Vec::with_capacity(order),
            index: HashMap::with_capacity(order),
            inv: Vec::new(),
            gens: Vec::new(),
        };
        table.insert((0..group.degree() as u16).collect());
        let gen_images: Vec<Vec<u16>> = group
            .generators()
            .iter()
            .map(|g| g.images().map(|y| y as u16).collect())
            .collect();
        let mut head = 0;
        while head < table.elems.len() {
            for g in &gen_images {
                let img: Vec<u16> = table.elems[head].iter().map(|&y| g[y as usize]).collect();
                table.insert(img);
            }
            head += 1;
        }
        debug_assert_eq!(table.elems.len(), order);
        table.gens = gen_images.iter().map(|g| table.index[&table.key_of(g)]).collect();
        table.inv = (0..table.elems.len())
            .map(|i| {
                let mut inv = vec![0u16; table.degree];
                for (x, &y) in table.elems[i].iter().enumerate() {
                    inv[y as usize] = x as u16;
                }
                table.index[&table.key_of(&inv)]
            })
            .collect();
        Ok(table)
    }

    fn key_of(&self, images: &[u16]) -> u128 {
        self.base
            .iter()
            .fold(0u128, |acc, &b| acc << 16 | images[b] as u128)
    }

    fn insert(&mut self, images: Vec<u16>) {
        let key = self.key_of(&images);
        if !self.index.contains_key(&key) {
            self.index.insert(key, self.elems.len() as u32);
            self.elems.push(images);
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    /// `a` followed by `b`.
    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let (ea, eb) = (&self.elems[a as usize], &self.elems[b as usize]);
        let key = self
            .base
            .iter()
            .fold(0u128, |acc, &x| acc << 16 | eb[ea[x] as usize] as u128);
        self.index[&key]
    }

    /// `g^-1 x g`.
    #[inline]
    pub fn conj(&self, x: u32, g: u32) -> u32 {
        self.mul(self.mul(self.inv[g as usize], x), g)
    }

    pub fn permutation(&self, i: u32) -> Permutation {
        Permutation::from_images(self.elems[i as usize].iter().map(|&y| y as usize).collect())
            .expect("listed elements are permutations")
    }

    fn element_order(&self, x: u32) -> usize {
        let mut y = x;
        let mut n = 1;
        while y != 0 {
            y = self.mul(y, x);
            n += 1;
        }
        n
    }

    /// Conjugacy class index of every element.
    fn classes(&self) -> Vec<u32> {
        let mut class = vec![u32::MAX; self.len()];
        let mut next = 0;
        for x in 0..self.len() as u32 {
            if class[x as usize] != u32::MAX {
                continue;
            }
            class[x as usize] = next;
            let mut stack = vec![x];
            while let Some(y) = stack.pop() {
                for &g in &self.gens {
                    let z = self.conj(y, g);
                    if class[z as usize] == u32::MAX {
                        class[z as usize] = next;
                        stack.push(z);
                    }
                }
            }
            next += 1;
        }
        class
    }
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Self(vec![0; n.div_ceil(64)])
    }
    #[inline]
    fn get(&self, i: u32) -> bool {
        self.0[i as usize / 64] >> (i % 64) & 1 == 1
    }
    #[inline]
    fn set(&mut self, i: u32) {
        self.0[i as usize / 64] |= 1 << (i % 64);
    }
}

struct Subgroup {
    gens: Vec<u32>,
    elems: Vec<u32>,
    bits: Bits,
}

/// Closure of `gens`; `None` once it exceeds `limit` elements.
fn closure(t: &ElementTable, gens: &[u32], limit: usize) -> Option<Subgroup> {
    let mut bits = Bits::new(t.len());
    let mut elems = vec![0u32];
    bits.set(0);
    let mut head = 0;
    while head < elems.len() {
        let x = elems[head];
        head += 1;
        for &g in gens {
            let y = t.mul(x, g);
            if !bits.get(y) {
                if elems.len() == limit {
                    return None;
                }
                bits.set(y);
                elems.push(y);
            }
        }
    }
    Some(Subgroup {
        gens: gens.to_vec(),
        elems,
        bits,
    })
}

fn conjugate(t: &ElementTable, a: &Subgroup, b: &Subgroup) -> bool {
    (0..t.len() as u32).any(|g| a.gens.iter().all(|&x| b.bits.get(t.conj(x, g))))
}

/// Representatives of the conjugacy classes of subgroups of order `order`.
pub fn subgroup_classes(group: &PermGroup, order: usize) -> Result<Vec<PermGroup>> {
    let t = ElementTable::new(group)?;
    if order == 0 || t.len() % order != 0 {
        return Ok(Vec::new());
    }
    let class = t.classes();
    let prime_power: Vec<u32> = (1..t.len() as u32)
        .filter(|&x| is_prime_power(t.element_order(x)))
        .collect();

    let invariant = |s: &Subgroup| {
        let mut h: Vec<u32> = s.elems.iter().map(|&x| class[x as usize]).collect();
        h.sort_unstable();
        h
    };
    let mut reps: Vec<Subgroup> = vec![closure(&t, &[], 1).expect("trivial group")];
    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    buckets.entry(invariant(&reps[0])).or_default().push(0);

    let mut i = 0;
    while i < reps.len() {
        if reps[i].elems.len() < order {
            let mut done = Bits::new(t.len());
            for &x in &reps[i].elems {
                done.set(x);
            }
            for &z in &prime_power {
                if done.get(z) {
                    continue;
                }
                // every element of L z L gives the same extension
                for &l1 in &reps[i].elems {
                    let lz = t.mul(l1, z);
                    for &l2 in &reps[i].elems {
                        done.set(t.mul(lz, l2));
                    }
                }
                let mut gens = reps[i].gens.clone();
                gens.push(z);
                let Some(k) = closure(&t, &gens, order) else { continue };
                if !order.is_multiple_of(k.elems.len()) {
                    continue;
                }
                let key = invariant(&k);
                let bucket = buckets.entry(key).or_default();
                if bucket.iter().any(|&j| conjugate(&t, &k, &reps[j])) {
                    continue;
                }
                bucket.push(reps.len());
                reps.push(k);
            }
        }
        i += 1;
    }
    reps.into_iter()
        .filter(|s| s.elems.len() == order)
        .map(|s| PermGroup::new(t.degree, s.gens.iter().map(|&g| t.permutation(g)).collect()))
        .collect()
}

fn is_prime_power(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let p = (2..=n).find(|d| n.is_multiple_of(*d)).unwrap();
    let mut m = n;
    while m.is_multiple_of(p) {
        m /= p;
    }
    m == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn s4() -> PermGroup {
        PermGroup::symmetric(4)
    }

    fn a5() -> PermGroup {
        PermGroup::new(
            5,
            vec![
                Permutation::from_cycles(5, &[&[0, 1, 2]]).unwrap(),
                Permutation::from_cycles(5, &[&[0, 1, 2, 3, 4]]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn s4_class_counts() {
        // 1, C2 (two classes), C3, C4, V4 (two classes), S3, D8, A4, S4
        let expected = [(1, 1), (2, 2), (3, 1), (4, 3), (6, 1), (8, 1), (12, 1), (24, 1)];
        for (order, count) in expected {
            let classes = subgroup_classes(&s4(), order).unwrap();
            assert_eq!(classes.len(), count, "order {order}");
            for k in &classes {
                assert_eq!(k.order(), BigUint::from(order));
                assert!(s4().contains_group(k).unwrap());
            }
        }
        assert!(subgroup_classes(&s4(), 5).unwrap().is_empty());
    }

    #[test]
    fn a5_class_counts() {
        let expected = [(1, 1), (2, 1), (3, 1), (4, 1), (5, 1), (6, 1), (10, 1), (12, 1), (60, 1)];
        let total: usize = expected
            .iter()
            .map(|&(order, count)| {
                let n = subgroup_classes(&a5(), order).unwrap().len();
                assert_eq!(n, count, "order {order}");
                n
            })
            .sum();
        assert_eq!(total, 9);
        assert!(subgroup_classes(&a5(), 15).unwrap().is_empty());
        assert!(subgroup_classes(&a5(), 20).unwrap().is_empty());
    }

    #[test]
    fn a7_has_two_classes_of_order_168() {
        let a7 = PermGroup::new(
            7,
            vec![
                Permutation::from_cycles(7, &[&[0, 1, 2]]).unwrap(),
                Permutation::from_cycles(7, &[&[0, 1, 2, 3, 4, 5, 6]]).unwrap(),
            ],
        )
        .unwrap();
        assert_eq!(a7.order(), BigUint::from(2520u32));
        assert_eq!(subgroup_classes(&a7, 168).unwrap().len(), 2);
    }
}
