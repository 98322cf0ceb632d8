//! Expansion of an orbit matrix into incidence matrices of symmetric designs
//! admitting a prescribed point group.
//!
//! For every block orbit (row of the orbit matrix) a representative block is
//! chosen that meets point orbit `j` in `a[i][j]` points and whose orbit under
//! the group has exactly `Ω[i]` blocks. Each representative is developed by the
//! group; developed orbits must meet each other, and themselves, in exactly λ
//! points. Complete solutions are verified and deduplicated up to isomorphism
//! by canonical form.
//!
//! Representatives come from one of two generators:
//!
//! * unrestricted: every subset with the right orbit intersections, keeping
//!   only the lexicographically smallest set of each set-orbit;
//! * with block stabilizers `K_i`: unions of `K_i`-orbits, one per set-orbit.
//!   The stabilizers are either prescribed (the group acts on blocks as it
//!   does on a reference design) or range over every conjugacy class of
//!   subgroups of index `Ω[i]`, which again covers every block.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::canon::{self, SearchLimits};
use crate::design::{popcount_and, words_for, IncidenceStructure};
use crate::error::{Error, Result};
use crate::orbmat::{check_orbit_matrix, equivalent_up_to_ordering, tactical_decomposition, OrbitMatrix};
use crate::permgroup::{PermGroup, Permutation};
use crate::subgroups;

#[derive(Clone, Copy, Debug)]
pub struct ExpansionLimits {
    pub max_nodes: u64,
    /// Stop after this many complete solutions (before deduplication).
    pub max_solutions: Option<u64>,
    pub max_seconds: Option<f64>,
    /// Limits for each canonical-form computation at the leaves.
    pub canon: SearchLimits,
}

impl Default for ExpansionLimits {
    fn default() -> Self {
        Self {
            max_nodes: 1_000_000_000,
            max_solutions: None,
            max_seconds: None,
            canon: SearchLimits::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionProblem {
    pub orbit_matrix: OrbitMatrix,
    pub group: PermGroup,
    pub block_action: BlockAction,
    pub limits: ExpansionLimits,
}

/// How representative blocks are generated.
#[derive(Clone, Debug, Default)]
pub enum BlockAction {
    /// Plain subset enumeration.
    Unrestricted,
    /// Unions of orbits of each class of subgroups of index `Ω[i]`.
    #[default]
    AnyStabilizer,
    /// One subgroup per orbit-matrix row: the stabilizer of that row's
    /// representative block.
    Prescribed(Vec<PermGroup>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpansionStats {
    pub nodes: u64,
    pub leaves: u64,
    pub dedup_hits: u64,
    /// Developed candidate orbits per row, summed over column matchings.
    pub candidates: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ExpansionResult {
    /// Pairwise non-isomorphic designs, sorted by canonical matrix.
    pub designs: Vec<IncidenceStructure>,
    /// True when the search ran to completion.
    pub exhausted: bool,
    pub stats: ExpansionStats,
}

impl ExpansionProblem {
    pub fn new(orbit_matrix: OrbitMatrix, group: PermGroup) -> Self {
        Self {
            orbit_matrix,
            group,
            block_action: BlockAction::default(),
            limits: ExpansionLimits::default(),
        }
    }

    /// Prescribes the block action of `group` on `reference`: each row's
    /// block stabilizer is the stabilizer of a block of the matching orbit of
    /// the reference design. The reference decomposition must equal the orbit
    /// matrix up to size-respecting reordering.
    pub fn with_reference_design(
        orbit_matrix: OrbitMatrix,
        group: PermGroup,
        reference: &IncidenceStructure,
    ) -> Result<Self> {
        let td = tactical_decomposition(reference, &group)?;
        let (rows, _cols) = equivalent_up_to_ordering(&td.matrix, &orbit_matrix).ok_or_else(|| {
            Error::InvalidProblem(
                "the reference design does not decompose into the given orbit matrix".into(),
            )
        })?;
        let reps: Vec<usize> = rows.iter().map(|&i| td.block_orbits[i][0]).collect();
        let stabilizers = block_stabilizers(reference, &group, &reps)?;
        Ok(Self {
            orbit_matrix,
            group,
            block_action: BlockAction::Prescribed(stabilizers),
            limits: ExpansionLimits::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let om = &self.orbit_matrix;
        if let Err(v) = check_orbit_matrix(om) {
            return Err(Error::InvalidProblem(format!("orbit matrix is invalid: {v}")));
        }
        if self.group.degree() != om.params.v {
            return Err(Error::InvalidProblem(format!(
                "group degree {} differs from v = {}",
                self.group.degree(),
                om.params.v
            )));
        }
        let mut sizes: Vec<usize> = self.group.orbits().iter().map(Vec::len).collect();
        let mut expected = om.point_orbit_sizes.clone();
        sizes.sort_unstable();
        expected.sort_unstable();
        if sizes != expected {
            return Err(Error::InvalidProblem(format!(
                "group orbit sizes {sizes:?} do not match {expected:?}"
            )));
        }
        if let BlockAction::Prescribed(stabs) = &self.block_action {
            if stabs.len() != om.rows() {
                return Err(Error::InvalidProblem(format!(
                    "{} block stabilizers for {} rows",
                    stabs.len(),
                    om.rows()
                )));
            }
            let order = self.group.order();
            for (i, k) in stabs.iter().enumerate() {
                if !self.group.contains_group(k)? {
                    return Err(Error::InvalidProblem(format!(
                        "stabilizer of row {i} is not a subgroup"
                    )));
                }
                if order != (k.order() * BigUint::from(om.block_orbit_sizes[i])) {
                    return Err(Error::InvalidProblem(format!(
                        "stabilizer of row {i} has index different from {}",
                        om.block_orbit_sizes[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Stabilizers in `group` of the given blocks of `design`, restricted to points.
pub fn block_stabilizers(
    design: &IncidenceStructure,
    group: &PermGroup,
    blocks: &[usize],
) -> Result<Vec<PermGroup>> {
    let (v, b) = (design.v(), design.b());
    let block_group = crate::orbmat::induced_block_action(design, group)?;
    let joint: Vec<Permutation> = group
        .generators()
        .iter()
        .zip(block_group.generators())
        .map(|(p, q)| {
            let images: Vec<usize> = p.images().chain(q.images().map(|y| y + v)).collect();
            Permutation::from_images(images)
        })
        .collect::<Result<_>>()?;
    let joint = PermGroup::new(v + b, joint)?;
    blocks
        .iter()
        .map(|&blk| {
            let st = joint.point_stabilizer(v + blk)?;
            let gens = st
                .generators()
                .iter()
                .map(|g| Permutation::from_images(g.images().take(v).collect()))
                .collect::<Result<Vec<_>>>()?;
            PermGroup::new(v, gens)
        })
        .collect()
}

fn to_bits(set: &[usize], v: usize) -> Vec<u64> {
    let mut row = vec![0u64; words_for(v)];
    for &x in set {
        row[x / 64] |= 1 << (x % 64);
    }
    row
}

/// Orbit of a packed point set under the group, in discovery order.
fn develop(group: &PermGroup, rep: &[u64]) -> Vec<Vec<u64>> {
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    seen.insert(rep.to_vec());
    let mut orbit = vec![rep.to_vec()];
    let mut head = 0;
    while head < orbit.len() {
        for g in group.generators() {
            let image = IncidenceStructure::map_row(&orbit[head], g);
            if seen.insert(image.clone()) {
                orbit.push(image);
            }
        }
        head += 1;
    }
    orbit
}

/// Subsets meeting `point_orbits[j]` in `row[j]` points whose set-orbit has
/// exactly `required_orbit_len` members; only the lexicographically smallest
/// (as a sorted list) member of each set-orbit is yielded.
pub fn candidate_blocks<'a>(
    group: &'a PermGroup,
    point_orbits: &'a [Vec<usize>],
    row: &'a [usize],
    required_orbit_len: usize,
) -> Box<dyn Iterator<Item = Vec<usize>> + 'a> {
    if row.len() != point_orbits.len() || row.iter().zip(point_orbits).any(|(&a, o)| a > o.len()) {
        return Box::new(std::iter::empty());
    }
    let parts = point_orbits
        .iter()
        .zip(row)
        .map(|(o, &a)| o.iter().copied().combinations(a).collect::<Vec<_>>())
        .multi_cartesian_product();
    let raw: Box<dyn Iterator<Item = Vec<Vec<usize>>>> = if point_orbits.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(parts)
    };
    Box::new(raw.filter_map(move |pieces| {
        let mut set: Vec<usize> = pieces.into_iter().flatten().collect();
        set.sort_unstable();
        let orbit = group.set_orbit(&set).ok()?;
        (orbit.len() == required_orbit_len && orbit.iter().all(|img| *img >= set)).then_some(set)
    }))
}

/// Unions of `stabilizer`-orbits meeting `point_orbits[j]` in `row[j]`
/// points whose orbit under `group` has exactly `required_orbit_len` members,
/// one per set-orbit of `group`.
pub fn stabilized_candidate_blocks(
    group: &PermGroup,
    stabilizer: &PermGroup,
    point_orbits: &[Vec<usize>],
    row: &[usize],
    required_orbit_len: usize,
) -> Vec<Vec<usize>> {
    let v = group.degree();
    let mut orbit_of = vec![usize::MAX; v];
    for (j, o) in point_orbits.iter().enumerate() {
        for &x in o {
            orbit_of[x] = j;
        }
    }
    let pieces = stabilizer.orbits();
    // per point orbit: every selection of stabilizer orbits with the right total
    let per_orbit: Vec<Vec<Vec<usize>>> = (0..point_orbits.len())
        .map(|j| {
            let inside: Vec<&Vec<usize>> = pieces.iter().filter(|p| orbit_of[p[0]] == j).collect();
            let mut out = Vec::new();
            subset_sums(&inside, 0, row[j], &mut Vec::new(), &mut out);
            out
        })
        .collect();
    if per_orbit.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut seen: HashSet<Vec<Vec<u64>>> = HashSet::new();
    let mut out = Vec::new();
    for combo in per_orbit.into_iter().multi_cartesian_product() {
        let mut set: Vec<usize> = combo.into_iter().flatten().collect();
        set.sort_unstable();
        let mut orbit = develop(group, &to_bits(&set, v));
        if orbit.len() != required_orbit_len {
            continue;
        }
        orbit.sort_unstable();
        if seen.insert(orbit) {
            out.push(set);
        }
    }
    out
}

fn subset_sums(
    pieces: &[&Vec<usize>],
    from: usize,
    target: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if target == 0 {
        out.push(current.clone());
        return;
    }
    for i in from..pieces.len() {
        let p = pieces[i];
        if p.len() <= target {
            let mark = current.len();
            current.extend_from_slice(p);
            subset_sums(pieces, i + 1, target - p.len(), current, out);
            current.truncate(mark);
        }
    }
}

/// A developed block orbit.
struct Candidate {
    rep: Vec<u64>,
    orbit: Vec<Vec<u64>>,
}

struct Shared<'a> {
    limits: ExpansionLimits,
    lambda: u32,
    nodes: AtomicU64,
    leaves: AtomicU64,
    stop: AtomicBool,
    started: Instant,
    solutions: Mutex<Vec<Vec<usize>>>,
    layers: &'a [Vec<Candidate>],
}

impl Shared<'_> {
    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if n > self.limits.max_nodes {
            self.stop.store(true, Ordering::Relaxed);
        }
        if let Some(secs) = self.limits.max_seconds {
            if n.is_multiple_of(1024) && self.started.elapsed().as_secs_f64() > secs {
                self.stop.store(true, Ordering::Relaxed);
            }
        }
        !self.stop.load(Ordering::Relaxed)
    }

    fn compatible(&self, layer: usize, cand: usize, chosen: &[usize]) -> bool {
        let c = &self.layers[layer][cand];
        chosen.iter().enumerate().all(|(l, &k)| {
            self.layers[l][k]
                .orbit
                .iter()
                .all(|blk| popcount_and(&c.rep, blk) == self.lambda)
        })
    }

    fn search(&self, chosen: &mut Vec<usize>) {
        let layer = chosen.len();
        if layer == self.layers.len() {
            let n = self.leaves.fetch_add(1, Ordering::Relaxed) + 1;
            self.solutions.lock().unwrap().push(chosen.clone());
            if self.limits.max_solutions.is_some_and(|cap| n >= cap) {
                self.stop.store(true, Ordering::Relaxed);
            }
            return;
        }
        for cand in 0..self.layers[layer].len() {
            if !self.tick() {
                return;
            }
            if self.compatible(layer, cand, chosen) {
                chosen.push(cand);
                self.search(chosen);
                chosen.pop();
            }
        }
    }
}

/// Size-respecting bijections from orbit-matrix columns to group orbits.
fn column_matchings(sizes: &[usize], orbits: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; orbits.len()];
    fn rec(
        sizes: &[usize],
        orbits: &[Vec<usize>],
        current: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == sizes.len() {
            out.push(current.clone());
            return;
        }
        for k in 0..orbits.len() {
            if !used[k] && orbits[k].len() == sizes[current.len()] {
                used[k] = true;
                current.push(k);
                rec(sizes, orbits, current, used, out);
                current.pop();
                used[k] = false;
            }
        }
    }
    rec(sizes, orbits, &mut current, &mut used, &mut out);
    out
}

/// Runs the expansion search.
pub fn expand(problem: &ExpansionProblem) -> Result<ExpansionResult> {
    problem.validate()?;
    let om = &problem.orbit_matrix;
    let v = om.params.v;
    let group = &problem.group;
    let started = Instant::now();
    let orbits = group.orbits();
    let mut order: Vec<usize> = (0..om.rows()).collect();
    order.sort_by_key(|&i| om.block_orbit_sizes[i]);

    let mut stats = ExpansionStats {
        candidates: vec![0; om.rows()],
        ..Default::default()
    };
    let mut complete = true;
    let found: Mutex<BTreeMap<IncidenceStructure, IncidenceStructure>> = Mutex::new(BTreeMap::new());
    let mut nodes_used = 0u64;
    let mut class_cache: HashMap<usize, Vec<PermGroup>> = HashMap::new();
    if matches!(problem.block_action, BlockAction::AnyStabilizer) {
        let group_order = group
            .order()
            .to_usize()
            .ok_or_else(|| Error::InvalidProblem("group too large for subgroup classes".into()))?;
        for &want in &om.block_orbit_sizes {
            if let std::collections::hash_map::Entry::Vacant(e) = class_cache.entry(want) {
                let classes = if group_order % want == 0 {
                    subgroups::subgroup_classes(group, group_order / want)?
                } else {
                    Vec::new()
                };
                e.insert(classes);
            }
        }
    }

    for matching in column_matchings(&om.point_orbit_sizes, &orbits) {
        let point_orbits: Vec<Vec<usize>> = matching.iter().map(|&k| orbits[k].clone()).collect();
        let mut layers: Vec<Vec<Candidate>> = Vec::with_capacity(om.rows());
        let mut budget_hit = false;
        for &i in &order {
            let row = &om.entries[i];
            let want = om.block_orbit_sizes[i];
            let sets: Vec<Vec<usize>> = match &problem.block_action {
                BlockAction::Prescribed(stabs) => {
                    stabilized_candidate_blocks(group, &stabs[i], &point_orbits, row, want)
                }
                BlockAction::AnyStabilizer => {
                    let classes = &class_cache[&want];
                    let mut seen = HashSet::new();
                    let mut out = Vec::new();
                    for k in classes {
                        for set in stabilized_candidate_blocks(group, k, &point_orbits, row, want) {
                            let mut orbit = develop(group, &to_bits(&set, v));
                            orbit.sort_unstable();
                            if seen.insert(orbit) {
                                out.push(set);
                            }
                        }
                    }
                    out
                }
                BlockAction::Unrestricted => {
                    let mut out = Vec::new();
                    let mut raw_seen = 0u64;
                    for set in candidate_blocks(group, &point_orbits, row, want) {
                        out.push(set);
                        raw_seen += 1;
                        if nodes_used + raw_seen > problem.limits.max_nodes {
                            budget_hit = true;
                            break;
                        }
                    }
                    nodes_used += raw_seen;
                    out
                }
            };
            let layer: Vec<Candidate> = sets
                .into_iter()
                .map(|set| {
                    let rep = to_bits(&set, v);
                    let orbit = develop(group, &rep);
                    Candidate { rep, orbit }
                })
                .filter(|c| {
                    c.orbit
                        .iter()
                        .skip(1)
                        .all(|blk| popcount_and(&c.rep, blk) as usize == om.params.lambda)
                })
                .collect();
            stats.candidates[i] += layer.len();
            layers.push(layer);
            if budget_hit {
                break;
            }
        }
        if budget_hit {
            complete = false;
            break;
        }

        let shared = Shared {
            limits: ExpansionLimits {
                max_nodes: problem.limits.max_nodes.saturating_sub(nodes_used),
                ..problem.limits
            },
            lambda: om.params.lambda as u32,
            nodes: AtomicU64::new(0),
            leaves: AtomicU64::new(0),
            stop: AtomicBool::new(false),
            started,
            solutions: Mutex::new(Vec::new()),
            layers: &layers,
        };
        if let Some(first) = layers.first() {
            (0..first.len()).into_par_iter().for_each(|c| {
                if shared.tick() {
                    shared.search(&mut vec![c]);
                }
            });
        }
        let stopped = shared.stop.load(Ordering::Relaxed);
        nodes_used += shared.nodes.load(Ordering::Relaxed);
        stats.leaves += shared.leaves.load(Ordering::Relaxed);
        let mut solutions = shared.solutions.into_inner().unwrap();
        solutions.sort();

        let designs: Vec<IncidenceStructure> = solutions
            .iter()
            .map(|choice| assemble(om, &order, &layers, choice))
            .collect::<Result<_>>()?;
        let forms: Vec<Result<IncidenceStructure>> = designs
            .par_iter()
            .map(|d| {
                verify_solution(d, om, group)?;
                Ok(canon::canonical_form_with(d, problem.limits.canon)?.canonical_matrix)
            })
            .collect();
        let mut map = found.lock().unwrap();
        for (d, form) in designs.into_iter().zip(forms) {
            match map.entry(form?) {
                std::collections::btree_map::Entry::Occupied(_) => stats.dedup_hits += 1,
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(d);
                }
            }
        }
        if stopped {
            complete = false;
            break;
        }
    }
    stats.nodes = nodes_used;
    Ok(ExpansionResult {
        designs: found.into_inner().unwrap().into_values().collect(),
        exhausted: complete,
        stats,
    })
}

/// Blocks of the developed orbits, in orbit-matrix row order.
fn assemble(
    om: &OrbitMatrix,
    order: &[usize],
    layers: &[Vec<Candidate>],
    choice: &[usize],
) -> Result<IncidenceStructure> {
    let v = om.params.v;
    let mut data = Vec::with_capacity(om.params.b * words_for(v));
    for i in 0..om.rows() {
        let layer = order.iter().position(|&r| r == i).expect("every row is ordered");
        for blk in &layers[layer][choice[layer]].orbit {
            data.extend_from_slice(blk);
        }
    }
    Ok(IncidenceStructure::from_packed(v, om.params.b, data))
}

fn verify_solution(d: &IncidenceStructure, om: &OrbitMatrix, group: &PermGroup) -> Result<()> {
    let params = d.symmetric_params()?;
    if params != om.params {
        return Err(Error::ContractViolation(format!(
            "expansion produced {params} instead of {}",
            om.params
        )));
    }
    let td = tactical_decomposition(d, group)?;
    if equivalent_up_to_ordering(&td.matrix, om).is_none() {
        return Err(Error::ContractViolation(
            "expanded design does not reproduce the orbit matrix".into(),
        ));
    }
    Ok(())
}
