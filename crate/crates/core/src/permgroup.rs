//! Permutations on `{0..n-1}` and finitely generated permutation groups.
//!
//! Group order, membership and stabilizers go through a base and strong
//! generating set built by the deterministic Schreier-Sims algorithm. The
//! chain is computed on first use and cached on the group.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;

use crate::error::{Error, Result};

/// A bijection of `{0..n-1}` stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Self {
            images: (0..degree as u32).collect(),
        }
    }

    /// Builds a permutation from its image list, checking that it is a bijection.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (x, &y) in images.iter().enumerate() {
            if y >= n {
                return Err(Error::InvalidPermutation(format!(
                    "image {y} of {x} is out of range for degree {n}"
                )));
            }
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::InvalidPermutation(format!("{y} appears twice")));
            }
        }
        Ok(Self {
            images: images.into_iter().map(|y| y as u32).collect(),
        })
    }

    /// Builds a permutation of the given degree from disjoint cycles.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= degree {
                    return Err(Error::PointOutOfRange { point: x, degree });
                }
                if std::mem::replace(&mut touched[x], true) {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} occurs in more than one cycle"
                    )));
                }
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Self::from_images(images)
    }

    pub(crate) fn from_raw(images: Vec<u32>) -> Self {
        debug_assert!(Self::from_images(images.iter().map(|&y| y as usize).collect()).is_ok());
        Self { images }
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.images
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.images.iter().map(|&y| y as usize)
    }

    /// `self` followed by `other`: `x -> other(self(x))`.
    pub fn then(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Self {
            images: self
                .images
                .iter()
                .map(|&y| other.images[y as usize])
                .collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u32; self.images.len()];
        for (x, &y) in self.images.iter().enumerate() {
            images[y as usize] = x as u32;
        }
        Self { images }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Self::identity(self.degree());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(x, &y)| x as u32 == y)
    }

    #[inline]
    pub fn fixes(&self, x: usize) -> bool {
        self.images[x] as usize == x
    }

    pub fn first_moved(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|(x, &y)| *x as u32 != y)
            .map(|(x, _)| x)
    }

    /// Nontrivial cycles, each starting at its smallest point, ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree()];
        let mut out = Vec::new();
        for start in 0..self.degree() {
            if seen[start] || self.fixes(start) {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    /// Element order, the lcm of the cycle lengths.
    pub fn order(&self) -> BigUint {
        let mut lengths: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lengths.sort_unstable();
        lengths.dedup();
        lengths.into_iter().fold(BigUint::one(), |acc, l| {
            let l = BigUint::from(l);
            let g = gcd(&acc, &l);
            acc * l / g
        })
    }
}

fn gcd(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    while b != BigUint::from(0u32) {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "(")?;
            for (i, x) in c.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{self}")
    }
}

#[derive(Clone, Debug)]
struct Level {
    base: usize,
    orbit: Vec<u32>,
    // transversal[y] maps the base point to y
    transversal: Vec<Option<Permutation>>,
    inverse: Vec<Option<Permutation>>,
}

/// Stabilizer chain: base points with fundamental orbits and transversals.
#[derive(Clone, Debug)]
struct StabChain {
    degree: usize,
    strong: Vec<Permutation>,
    levels: Vec<Level>,
}

impl StabChain {
    fn build(degree: usize, generators: &[Permutation], prefix: &[usize]) -> Self {
        let mut strong: Vec<Permutation> = Vec::new();
        for g in generators {
            if !g.is_identity() && !strong.contains(g) {
                strong.push(g.clone());
            }
        }
        let mut base: Vec<usize> = Vec::new();
        for &b in prefix {
            if !base.contains(&b) {
                base.push(b);
            }
        }
        for g in &strong {
            if base.iter().all(|&b| g.fixes(b)) {
                base.push(g.first_moved().expect("non-identity"));
            }
        }
        let mut chain = StabChain {
            degree,
            strong,
            levels: base
                .into_iter()
                .map(|b| Level {
                    base: b,
                    orbit: Vec::new(),
                    transversal: Vec::new(),
                    inverse: Vec::new(),
                })
                .collect(),
        };
        for l in 0..chain.levels.len() {
            chain.recompute(l);
        }
        let mut i = chain.levels.len() as isize - 1;
        while i >= 0 {
            let level = i as usize;
            match chain.schreier_residue(level) {
                Some((h, j)) => {
                    if j == chain.levels.len() {
                        let b = h.first_moved().expect("non-identity residue");
                        chain.levels.push(Level {
                            base: b,
                            orbit: Vec::new(),
                            transversal: Vec::new(),
                            inverse: Vec::new(),
                        });
                    }
                    chain.strong.push(h);
                    for l in level + 1..=j {
                        chain.recompute(l);
                    }
                    i = j as isize;
                }
                None => i -= 1,
            }
        }
        chain
    }

    fn level_generators(&self, level: usize) -> impl Iterator<Item = &Permutation> {
        let prefix: Vec<usize> = self.levels[..level].iter().map(|l| l.base).collect();
        self.strong
            .iter()
            .filter(move |g| prefix.iter().all(|&b| g.fixes(b)))
    }

    fn recompute(&mut self, level: usize) {
        let n = self.degree;
        let gens: Vec<Permutation> = self.level_generators(level).cloned().collect();
        let b = self.levels[level].base;
        let mut transversal: Vec<Option<Permutation>> = vec![None; n];
        let mut inverse: Vec<Option<Permutation>> = vec![None; n];
        let mut orbit = vec![b as u32];
        transversal[b] = Some(Permutation::identity(n));
        inverse[b] = Some(Permutation::identity(n));
        let mut head = 0;
        while head < orbit.len() {
            let y = orbit[head] as usize;
            head += 1;
            for s in &gens {
                let z = s.apply(y);
                if transversal[z].is_none() {
                    let t = transversal[y].as_ref().unwrap().then(s);
                    inverse[z] = Some(t.inverse());
                    transversal[z] = Some(t);
                    orbit.push(z as u32);
                }
            }
        }
        let lvl = &mut self.levels[level];
        lvl.orbit = orbit;
        lvl.transversal = transversal;
        lvl.inverse = inverse;
    }

    /// Sifts `g` through levels `from..`; returns the residue and the level
    /// where sifting stopped (`levels.len()` if it went all the way through).
    fn strip(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for (l, level) in self.levels.iter().enumerate().skip(from) {
            let y = g.apply(level.base);
            match &level.inverse[y] {
                Some(u) => g = g.then(u),
                None => return (g, l),
            }
        }
        let depth = self.levels.len();
        (g, depth)
    }

    fn schreier_residue(&self, level: usize) -> Option<(Permutation, usize)> {
        let gens: Vec<&Permutation> = self.level_generators(level).collect();
        let lvl = &self.levels[level];
        for &y in &lvl.orbit {
            let uy = lvl.transversal[y as usize].as_ref().unwrap();
            for s in &gens {
                let z = s.apply(y as usize);
                let step = uy.then(s);
                if Some(&step) == lvl.transversal[z].as_ref() {
                    continue;
                }
                let sg = step.then(lvl.inverse[z].as_ref().unwrap());
                let (h, j) = self.strip(sg, level + 1);
                if j < self.levels.len() || !h.is_identity() {
                    return Some((h, j));
                }
            }
        }
        None
    }

    fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// The chain of the pointwise stabilizer of the first `depth` base points.
    fn tail(&self, depth: usize) -> StabChain {
        let prefix: Vec<usize> = self.levels[..depth].iter().map(|l| l.base).collect();
        StabChain {
            degree: self.degree,
            strong: self
                .strong
                .iter()
                .filter(|g| prefix.iter().all(|&b| g.fixes(b)))
                .cloned()
                .collect(),
            levels: self.levels[depth..].to_vec(),
        }
    }
}

/// A permutation group given by generators.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    chain: OnceLock<StabChain>,
}

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.degree() != degree) {
            return Err(Error::DegreeMismatch {
                expected: degree,
                found: g.degree(),
            });
        }
        Ok(Self {
            degree,
            generators,
            chain: OnceLock::new(),
        })
    }

    pub fn trivial(degree: usize) -> Self {
        Self {
            degree,
            generators: Vec::new(),
            chain: OnceLock::new(),
        }
    }

    /// The cyclic group generated by `x -> x + 1 mod n`.
    pub fn cyclic(degree: usize) -> Self {
        let shift = Permutation::from_raw((0..degree as u32).map(|x| (x + 1) % degree as u32).collect());
        Self {
            degree,
            generators: vec![shift],
            chain: OnceLock::new(),
        }
    }

    /// The full symmetric group, generated by a transposition and an n-cycle.
    pub fn symmetric(degree: usize) -> Self {
        let mut group = Self::cyclic(degree);
        if degree >= 2 {
            let mut swap: Vec<u32> = (0..degree as u32).collect();
            swap.swap(0, 1);
            group.generators.insert(0, Permutation::from_raw(swap));
        }
        group
    }

    fn with_chain(chain: StabChain) -> Self {
        Self {
            degree: chain.degree,
            generators: chain.strong.clone(),
            chain: OnceLock::from(chain),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    fn chain(&self) -> &StabChain {
        self.chain
            .get_or_init(|| StabChain::build(self.degree, &self.generators, &[]))
    }

    /// Orbit partition, cells sorted internally and ordered by smallest point.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for x in 0..self.degree {
            if !seen[x] {
                let mut orbit = self.orbit_from(x, &mut seen);
                orbit.sort_unstable();
                out.push(orbit);
            }
        }
        out
    }

    pub fn orbit(&self, x: usize) -> Result<Vec<usize>> {
        self.check_point(x)?;
        let mut seen = vec![false; self.degree];
        let mut orbit = self.orbit_from(x, &mut seen);
        orbit.sort_unstable();
        Ok(orbit)
    }

    fn orbit_from(&self, x: usize, seen: &mut [bool]) -> Vec<usize> {
        seen[x] = true;
        let mut orbit = vec![x];
        let mut head = 0;
        while head < orbit.len() {
            let y = orbit[head];
            head += 1;
            for g in &self.generators {
                let z = g.apply(y);
                if !seen[z] {
                    seen[z] = true;
                    orbit.push(z);
                }
            }
        }
        orbit
    }

    /// Group order from the stabilizer chain.
    pub fn order(&self) -> BigUint {
        self.chain().order()
    }

    pub fn base(&self) -> Vec<usize> {
        self.chain().levels.iter().map(|l| l.base).collect()
    }

    pub fn strong_generators(&self) -> &[Permutation] {
        &self.chain().strong
    }

    /// Lengths of the fundamental orbits along the base.
    pub fn fundamental_orbit_lengths(&self) -> Vec<usize> {
        self.chain().levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Membership test by sifting through the stabilizer chain.
    pub fn contains(&self, p: &Permutation) -> Result<bool> {
        if p.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: p.degree(),
            });
        }
        let chain = self.chain();
        let (h, j) = chain.strip(p.clone(), 0);
        Ok(j == chain.levels.len() && h.is_identity())
    }

    pub fn point_stabilizer(&self, x: usize) -> Result<PermGroup> {
        self.pointwise_stabilizer(&[x])
    }

    /// Pointwise stabilizer of a sequence of points, with its chain precomputed.
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> Result<PermGroup> {
        for &x in points {
            self.check_point(x)?;
        }
        let chain = StabChain::build(self.degree, self.strong_generators(), points);
        let depth = {
            let mut seen = Vec::new();
            for &x in points {
                if !seen.contains(&x) {
                    seen.push(x);
                }
            }
            seen.len()
        };
        // build() only appends to the prefix, so the first `depth` levels are the requested points
        Ok(Self::with_chain(chain.tail(depth)))
    }

    /// Orbit of a point set under the induced action on subsets.
    pub fn set_orbit(&self, set: &[usize]) -> Result<Vec<Vec<usize>>> {
        for &x in set {
            self.check_point(x)?;
        }
        let mut start = set.to_vec();
        start.sort_unstable();
        start.dedup();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut out = vec![start.clone()];
        seen.insert(start);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &self.generators {
                let mut image: Vec<usize> = out[i].iter().map(|&x| g.apply(x)).collect();
                image.sort_unstable();
                if seen.insert(image.clone()) {
                    out.push(image);
                    queue.push_back(out.len() - 1);
                }
            }
        }
        Ok(out)
    }

    /// A uniformly random element, as a product of random coset representatives.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let chain = self.chain();
        let mut g = Permutation::identity(self.degree);
        for level in chain.levels.iter().rev() {
            let y = level.orbit[rng.gen_range(0..level.orbit.len())] as usize;
            g = g.then(level.transversal[y].as_ref().unwrap());
        }
        g
    }

    /// Whether every generator of `other` lies in `self`.
    pub fn contains_group(&self, other: &PermGroup) -> Result<bool> {
        for g in other.generators() {
            if !self.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_point(&self, x: usize) -> Result<()> {
        if x >= self.degree {
            return Err(Error::PointOutOfRange {
                point: x,
                degree: self.degree,
            });
        }
        Ok(())
    }
}
