//! Canonical labeling, automorphism groups and isomorphism tests for
//! incidence structures.
//!
//! The structure is viewed as a bipartite graph whose first `v` vertices are
//! points and last `b` vertices are blocks. The search is the usual
//! individualization-refinement tree: equitable refinement of an ordered
//! partition that starts with points and blocks as separate cells, target
//! cell = first smallest non-singleton cell, leaves compared by their
//! refinement trace and then by the relabeled incidence matrix. Automorphisms
//! found at leaf collisions prune sibling subtrees.
//!
//! Equitable refinement alone cannot separate the points of a 2-design once a
//! single point is fixed, so non-discrete nodes are further split by a
//! triple-intersection invariant (see `Refiner::split_by_triples`).

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::time::Instant;

use num_bigint::BigUint;

use crate::design::{bit_positions, IncidenceStructure};
use crate::error::{Error, Result};
use crate::permgroup::{PermGroup, Permutation};

/// Resource limits for one canonical search.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub max_seconds: Option<f64>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_nodes: 100_000_000,
            max_seconds: None,
        }
    }
}

/// A point permutation paired with a block permutation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Relabeling {
    pub points: Permutation,
    pub blocks: Permutation,
}

impl Relabeling {
    pub fn apply(&self, s: &IncidenceStructure) -> Result<IncidenceStructure> {
        s.permuted(&self.points, &self.blocks)
    }
}

/// Canonical matrix of a structure together with its automorphism group.
#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub canonical_matrix: IncidenceStructure,
    /// Original point `x` becomes canonical column `point_relabeling(x)`.
    pub point_relabeling: Permutation,
    /// Original block `i` becomes canonical row `block_relabeling(i)`.
    pub block_relabeling: Permutation,
    pub aut_generators: Vec<Relabeling>,
    pub aut_order: BigUint,
    /// Search tree nodes visited.
    pub nodes: u64,
}

impl CanonicalForm {
    /// The automorphism group acting on points.
    pub fn point_group(&self) -> PermGroup {
        PermGroup::new(
            self.canonical_matrix.v(),
            self.aut_generators.iter().map(|a| a.points.clone()).collect(),
        )
        .expect("generators have the point degree")
    }

    pub fn relabeling(&self) -> Relabeling {
        Relabeling {
            points: self.point_relabeling.clone(),
            blocks: self.block_relabeling.clone(),
        }
    }
}

struct Graph {
    v: usize,
    b: usize,
    words: usize,
    adj: Vec<Vec<u32>>,
    /// neighbourhood of each vertex as a bitset over the other side
    nbits: Vec<Vec<u64>>,
}

impl Graph {
    fn new(s: &IncidenceStructure) -> Self {
        let (v, b) = (s.v(), s.b());
        let mut adj = vec![Vec::new(); v + b];
        for i in 0..b {
            for p in bit_positions(s.row(i)) {
                adj[v + i].push(p as u32);
                adj[p].push((v + i) as u32);
            }
        }
        let bwords = b.div_ceil(64);
        let mut nbits: Vec<Vec<u64>> = (0..v).map(|_| vec![0; bwords]).collect();
        for (p, bits) in nbits.iter_mut().enumerate() {
            for &blk in &adj[p] {
                let i = blk as usize - v;
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        nbits.extend((0..b).map(|i| s.row(i).to_vec()));
        Self {
            v,
            b,
            words: s.words(),
            adj,
            nbits,
        }
    }

    fn n(&self) -> usize {
        self.v + self.b
    }
}

/// Ordered partition of the vertices; a cell is a run of positions in `lab`.
#[derive(Clone)]
struct Partition {
    lab: Vec<u32>,
    pos: Vec<u32>,
    /// vertex -> start position of its cell
    cell: Vec<u32>,
    /// start position -> end position (exclusive); meaningful at cell starts
    end: Vec<u32>,
    ncells: u32,
}

impl Partition {
    fn initial(v: usize, b: usize) -> Self {
        let n = v + b;
        let mut cell = vec![0u32; n];
        let mut end = vec![0u32; n];
        end[0] = v as u32;
        for x in v..n {
            cell[x] = v as u32;
        }
        let ncells = if b > 0 {
            end[v] = n as u32;
            2
        } else {
            1
        };
        Self {
            lab: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
            cell,
            end,
            ncells,
        }
    }

    fn is_discrete(&self) -> bool {
        self.ncells as usize == self.lab.len()
    }

    fn target_cell(&self) -> Option<u32> {
        let mut best: Option<(u32, u32)> = None;
        let mut start = 0u32;
        while (start as usize) < self.lab.len() {
            let size = self.end[start as usize] - start;
            if size > 1 && best.is_none_or(|(_, s)| size < s) {
                best = Some((start, size));
            }
            start = self.end[start as usize];
        }
        best.map(|(s, _)| s)
    }

    /// Splits `{x}` off the front of its cell; returns the cell start.
    fn individualize(&mut self, x: u32) -> u32 {
        let c = self.cell[x as usize];
        let e = self.end[c as usize];
        let p = self.pos[x as usize];
        let y = self.lab[c as usize];
        self.lab[c as usize] = x;
        self.lab[p as usize] = y;
        self.pos[x as usize] = c;
        self.pos[y as usize] = p;
        self.end[c as usize] = c + 1;
        self.end[c as usize + 1] = e;
        for q in c + 1..e {
            self.cell[self.lab[q as usize] as usize] = c + 1;
        }
        self.ncells += 1;
        c
    }
}

fn mix(h: u64, x: u64) -> u64 {
    // splitmix64 finalizer over the running hash
    let mut z = h ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Refiner {
    count: Vec<u32>,
    touched: Vec<u32>,
    /// (cell, count, vertex) packed, sorted once per splitter
    keys: Vec<u64>,
    in_queue: Vec<bool>,
    queue: VecDeque<u32>,
    runs: Vec<(u32, u32)>,
}

impl Refiner {
    fn new(n: usize) -> Self {
        Self {
            count: vec![0; n],
            touched: Vec::new(),
            keys: Vec::new(),
            in_queue: vec![false; n],
            queue: VecDeque::new(),
            runs: Vec::new(),
        }
    }

    /// Refines to the coarsest equitable partition finer than `part`, starting
    /// from the given splitter cells. Returns a hash of the refinement trace.
    fn refine(&mut self, g: &Graph, part: &mut Partition, splitters: &[u32]) -> u64 {
        let mut h = 0x243f_6a88_85a3_08d3u64;
        for &s in splitters {
            if !self.in_queue[s as usize] {
                self.in_queue[s as usize] = true;
                self.queue.push_back(s);
            }
        }
        while let Some(w) = self.queue.pop_front() {
            self.in_queue[w as usize] = false;
            if part.is_discrete() {
                continue;
            }
            let wend = part.end[w as usize];
            h = mix(h, (w as u64) << 32 | (wend - w) as u64);
            for p in w..wend {
                let x = part.lab[p as usize] as usize;
                for &y in &g.adj[x] {
                    if self.count[y as usize] == 0 {
                        self.touched.push(y);
                    }
                    self.count[y as usize] += 1;
                }
            }
            self.keys.clear();
            for &y in &self.touched {
                let c = part.cell[y as usize];
                if part.end[c as usize] - c > 1 {
                    self.keys.push((c as u64) << 42 | (self.count[y as usize] as u64) << 21 | y as u64);
                }
            }
            self.keys.sort_unstable();
            let mut i = 0;
            while i < self.keys.len() {
                let c = (self.keys[i] >> 42) as u32;
                let mut j = i;
                while j < self.keys.len() && (self.keys[j] >> 42) as u32 == c {
                    j += 1;
                }
                self.split_cell(part, c, i, j, &mut h);
                i = j;
            }
            for &y in &self.touched {
                self.count[y as usize] = 0;
            }
            self.touched.clear();
        }
        mix(h, part.ncells as u64)
    }

    /// Refinement followed by the triple-intersection invariant until stable.
    fn refine_node(&mut self, g: &Graph, part: &mut Partition, splitters: &[u32]) -> u64 {
        let mut h = self.refine(g, part, splitters);
        let mut new_cells = Vec::new();
        while !part.is_discrete() {
            let ih = self.split_by_triples(g, part, &mut new_cells);
            if new_cells.is_empty() {
                break;
            }
            h = mix(h, ih);
            h = mix(h, self.refine(g, part, &new_cells));
            new_cells.clear();
        }
        h
    }

    /// For a vertex y in a non-singleton cell, sums over the first two
    /// singleton cells x on the same side and every z on that side a hash of
    /// (x's rank, z's cell, |N(x) & N(y) & N(z)|). Cells are split by this
    /// value; new cell starts go to `new_cells`.
    fn split_by_triples(&mut self, g: &Graph, part: &mut Partition, new_cells: &mut Vec<u32>) -> u64 {
        let mut h = 0;
        for (lo, hi) in [(0, g.v as u32), (g.v as u32, g.n() as u32)] {
            let mut anchors = Vec::new();
            let mut c = lo;
            while c < hi && anchors.len() < 2 {
                if part.end[c as usize] == c + 1 {
                    anchors.push(part.lab[c as usize] as usize);
                }
                c = part.end[c as usize];
            }
            if anchors.is_empty() {
                continue;
            }
            let words = g.nbits[lo as usize].len();
            let mut both = vec![0u64; words];
            let mut c = lo;
            while c < hi {
                let e = part.end[c as usize];
                if e - c > 1 {
                    self.keys.clear();
                    for q in c..e {
                        let y = part.lab[q as usize] as usize;
                        let mut val = 0u64;
                        for (rank, &x) in anchors.iter().enumerate() {
                            for (w, (a, b)) in both.iter_mut().zip(g.nbits[x].iter().zip(&g.nbits[y])) {
                                *w = a & b;
                            }
                            for z in lo as usize..hi as usize {
                                if z == x || z == y {
                                    continue;
                                }
                                let t: u32 = both.iter().zip(&g.nbits[z]).map(|(a, b)| (a & b).count_ones()).sum();
                                let key = (rank as u64) << 48 | (part.cell[z] as u64) << 16 | t as u64;
                                val = val.wrapping_add(mix(0, key));
                            }
                        }
                        self.keys.push(val);
                    }
                    // keys[i] belongs to lab[c + i]; sort positions by value
                    let mut order: Vec<u32> = (0..e - c).collect();
                    order.sort_unstable_by_key(|&i| (self.keys[i as usize], part.lab[(c + i) as usize]));
                    let members: Vec<u32> = order.iter().map(|&i| part.lab[(c + i) as usize]).collect();
                    let vals: Vec<u64> = order.iter().map(|&i| self.keys[i as usize]).collect();
                    if vals[0] != vals[vals.len() - 1] {
                        let mut s = c;
                        for q in c..=e {
                            if q == e || vals[(q - c) as usize] != vals[(s - c) as usize] {
                                h = mix(h, (s as u64) << 32 | (q - s) as u64);
                                h = mix(h, vals[(s - c) as usize]);
                                part.end[s as usize] = q;
                                for p in s..q {
                                    let y = members[(p - c) as usize];
                                    part.lab[p as usize] = y;
                                    part.pos[y as usize] = p;
                                    part.cell[y as usize] = s;
                                }
                                new_cells.push(s);
                                part.ncells += 1;
                                s = q;
                            }
                        }
                        part.ncells -= 1;
                    }
                }
                c = e;
            }
        }
        h
    }

    /// Splits cell `c` by count; `keys[i..j]` are its touched members in
    /// increasing count order, everything else in the cell has count 0.
    fn split_cell(&mut self, part: &mut Partition, c: u32, i: usize, j: usize, h: &mut u64) {
        let vertex = |k: u64| (k & ((1 << 21) - 1)) as u32;
        let count = |k: u64| ((k >> 21) & ((1 << 21) - 1)) as u32;
        let e = part.end[c as usize];
        let t = (j - i) as u32;
        let (lo, hi) = (count(self.keys[i]), count(self.keys[j - 1]));
        if t == e - c && lo == hi {
            *h = mix(*h, (c as u64) << 32 | lo as u64);
            return;
        }
        // move touched members to the tail, untouched ones to the head
        let tail = e - t;
        let mut q = tail;
        for k in i..j {
            let y = vertex(self.keys[k]);
            let p = part.pos[y as usize];
            if p < tail {
                while self.count[part.lab[q as usize] as usize] != 0 {
                    q += 1;
                }
                let z = part.lab[q as usize];
                part.lab[p as usize] = z;
                part.pos[z as usize] = p;
                part.lab[q as usize] = y;
                part.pos[y as usize] = q;
                q += 1;
            }
        }
        for (k, p) in (i..j).zip(tail..e) {
            let y = vertex(self.keys[k]);
            part.lab[p as usize] = y;
            part.pos[y as usize] = p;
        }
        self.runs.clear();
        if tail > c {
            self.runs.push((c, tail));
        }
        let mut s = tail;
        for p in tail + 1..=e {
            if p == e || count(self.keys[i + (p - tail) as usize]) != count(self.keys[i + (s - tail) as usize]) {
                self.runs.push((s, p));
                s = p;
            }
        }
        for &(s, t) in &self.runs {
            let k = if s < tail { 0 } else { count(self.keys[i + (s - tail) as usize]) };
            *h = mix(*h, (s as u64) << 40 | (t as u64) << 20 | k as u64);
            part.end[s as usize] = t;
            if s >= tail {
                for q in s..t {
                    part.cell[part.lab[q as usize] as usize] = s;
                }
            }
        }
        part.ncells += self.runs.len() as u32 - 1;
        if self.in_queue[c as usize] {
            for &(s, _) in &self.runs[1..] {
                self.in_queue[s as usize] = true;
                self.queue.push_back(s);
            }
        } else {
            let largest = self
                .runs
                .iter()
                .enumerate()
                .max_by(|a, b| (a.1 .1 - a.1 .0).cmp(&(b.1 .1 - b.1 .0)).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap();
            for (i, &(s, _)) in self.runs.iter().enumerate() {
                if i != largest {
                    self.in_queue[s as usize] = true;
                    self.queue.push_back(s);
                }
            }
        }
    }
}

/// Per-level node invariant: number of cells and refinement trace hash.
type TraceEntry = (u32, u64);

struct Leaf {
    lab: Vec<u32>,
    cert: Vec<u64>,
    path: Vec<u32>,
    trace: Vec<TraceEntry>,
}

struct Searcher<'a> {
    g: &'a Graph,
    refiner: Refiner,
    first: Option<Leaf>,
    best: Option<Leaf>,
    autos: Vec<Vec<u32>>,
    nodes: u64,
    limits: SearchLimits,
    started: Instant,
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

fn compare_prefix(trace: &[TraceEntry], other: &[TraceEntry]) -> Ordering {
    for (a, b) in trace.iter().zip(other) {
        match a.cmp(b) {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    Ordering::Equal
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

impl<'a> Searcher<'a> {
    fn certificate(&self, part: &Partition) -> Vec<u64> {
        let g = self.g;
        let mut cert = vec![0u64; g.b * g.words];
        for i in 0..g.b {
            let blk = part.lab[g.v + i] as usize;
            for &pt in &g.adj[blk] {
                let col = part.pos[pt as usize] as usize;
                cert[i * g.words + col / 64] |= 1 << (col % 64);
            }
        }
        cert
    }

    fn record_automorphism(&mut self, from: &[u32], to: &[u32]) {
        let mut gamma = vec![0u32; from.len()];
        for (a, b) in from.iter().zip(to) {
            gamma[*a as usize] = *b;
        }
        if !gamma.iter().enumerate().all(|(i, &x)| i as u32 == x) {
            self.autos.push(gamma);
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::BudgetExceeded { nodes: self.nodes });
        }
        if let Some(secs) = self.limits.max_seconds {
            if self.nodes.is_multiple_of(256) && self.started.elapsed().as_secs_f64() > secs {
                return Err(Error::BudgetExceeded { nodes: self.nodes });
            }
        }
        Ok(())
    }

    /// Explores the subtree at `part`. Returns `Some(level)` to abandon
    /// everything below the node at depth `level`.
    fn visit(
        &mut self,
        part: &Partition,
        path: &mut Vec<u32>,
        trace: &mut Vec<TraceEntry>,
    ) -> Result<Option<usize>> {
        self.tick()?;
        let depth = path.len();
        if part.is_discrete() {
            return Ok(self.leaf(part, path, trace));
        }
        let target = part.target_cell().expect("non-discrete partition has a target");
        let mut children: Vec<u32> =
            part.lab[target as usize..part.end[target as usize] as usize].to_vec();
        children.sort_unstable();

        let n = self.g.n();
        let mut explored: Vec<u32> = Vec::new();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        let mut autos_seen = 0usize;
        for &x in &children {
            if !explored.is_empty() {
                // fold in automorphisms that fix the current path pointwise
                while autos_seen < self.autos.len() {
                    let gamma = &self.autos[autos_seen];
                    autos_seen += 1;
                    if path.iter().all(|&p| gamma[p as usize] == p) {
                        for (i, &y) in gamma.iter().enumerate() {
                            let (a, b) = (find(&mut parent, i as u32), find(&mut parent, y));
                            if a != b {
                                parent[a.max(b) as usize] = a.min(b);
                            }
                        }
                    }
                }
                let rx = find(&mut parent, x);
                if explored.iter().any(|&y| find(&mut parent, y) == rx) {
                    continue;
                }
            }
            let mut child = part.clone();
            let c = child.individualize(x);
            let h = self.refiner.refine_node(self.g, &mut child, &[c]);
            trace.push((child.ncells, mix(h, c as u64)));
            path.push(x);

            let first = self.first.as_ref().map(|l| &l.trace[..]);
            let eq_first = first.is_none_or(|t| compare_prefix(trace, t) == Ordering::Equal);
            let vs_best = self
                .best
                .as_ref()
                .map_or(Ordering::Equal, |l| compare_prefix(trace, &l.trace));
            let result = if eq_first || vs_best != Ordering::Less {
                self.visit(&child, path, trace)
            } else {
                Ok(None)
            };
            path.pop();
            trace.pop();
            explored.push(x);
            match result? {
                Some(level) if level < depth => return Ok(Some(level)),
                _ => {}
            }
        }
        Ok(None)
    }

    fn leaf(&mut self, part: &Partition, path: &[u32], trace: &[TraceEntry]) -> Option<usize> {
        let cert = self.certificate(part);
        let make = |cert: Vec<u64>| Leaf {
            lab: part.lab.clone(),
            cert,
            path: path.to_vec(),
            trace: trace.to_vec(),
        };
        let Some(first) = &self.first else {
            self.first = Some(make(cert.clone()));
            self.best = Some(make(cert));
            return None;
        };
        if compare_prefix(trace, &first.trace) == Ordering::Equal && cert == first.cert {
            let (from, level) = (first.lab.clone(), common_prefix(path, &first.path));
            self.record_automorphism(&from, &part.lab);
            return Some(level);
        }
        let best = self.best.as_ref().expect("set with first leaf");
        let ord = compare_prefix(trace, &best.trace).then_with(|| cert.cmp(&best.cert));
        match ord {
            Ordering::Greater => {
                self.best = Some(make(cert));
                None
            }
            Ordering::Equal => {
                let (from, level) = (best.lab.clone(), common_prefix(path, &best.path));
                self.record_automorphism(&from, &part.lab);
                Some(level)
            }
            Ordering::Less => None,
        }
    }
}

/// Computes the canonical form with default limits.
pub fn canonical_form(s: &IncidenceStructure) -> Result<CanonicalForm> {
    canonical_form_with(s, SearchLimits::default())
}

pub fn canonical_form_with(s: &IncidenceStructure, limits: SearchLimits) -> Result<CanonicalForm> {
    if let Some((first, second)) = s.duplicate_blocks() {
        return Err(Error::DuplicateBlocks { first, second });
    }
    let g = Graph::new(s);
    let (v, b) = (g.v, g.b);
    let mut searcher = Searcher {
        g: &g,
        refiner: Refiner::new(g.n()),
        first: None,
        best: None,
        autos: Vec::new(),
        nodes: 0,
        limits,
        started: Instant::now(),
    };
    let mut root = Partition::initial(v, b);
    let h = searcher.refiner.refine_node(&g, &mut root, &[0, v as u32]);
    let mut trace = vec![(root.ncells, h)];
    searcher.visit(&root, &mut Vec::new(), &mut trace)?;

    let best = searcher.best.take().expect("search reaches at least one leaf");
    let mut point_images = vec![0usize; v];
    let mut block_images = vec![0usize; b];
    for (position, &x) in best.lab.iter().enumerate() {
        let x = x as usize;
        if x < v {
            point_images[x] = position;
        } else {
            block_images[x - v] = position - v;
        }
    }
    let relabel = Relabeling {
        points: Permutation::from_images(point_images)?,
        blocks: Permutation::from_images(block_images)?,
    };
    let canonical_matrix = IncidenceStructure::from_packed(v, b, best.cert);
    if relabel.apply(s)? != canonical_matrix {
        return Err(Error::ContractViolation(
            "canonical relabeling does not reproduce the canonical matrix".into(),
        ));
    }

    let mut aut_generators = Vec::with_capacity(searcher.autos.len());
    for gamma in &searcher.autos {
        let points = Permutation::from_images(gamma[..v].iter().map(|&x| x as usize).collect())?;
        let blocks =
            Permutation::from_images(gamma[v..].iter().map(|&x| x as usize - v).collect())?;
        let a = Relabeling { points, blocks };
        if a.apply(s)? != *s {
            return Err(Error::ContractViolation(
                "leaf collision produced a map that is not an automorphism".into(),
            ));
        }
        aut_generators.push(a);
    }
    let group = PermGroup::new(v, aut_generators.iter().map(|a| a.points.clone()).collect())?;
    Ok(CanonicalForm {
        canonical_matrix,
        point_relabeling: relabel.points,
        block_relabeling: relabel.blocks,
        aut_order: group.order(),
        aut_generators,
        nodes: searcher.nodes,
    })
}

/// The full automorphism group on points, with its order.
pub fn automorphism_group(s: &IncidenceStructure) -> Result<(PermGroup, BigUint)> {
    let cf = canonical_form(s)?;
    Ok((cf.point_group(), cf.aut_order))
}

/// An isomorphism `s1 -> s2` when one exists, checked by application.
pub fn are_isomorphic(s1: &IncidenceStructure, s2: &IncidenceStructure) -> Result<Option<Relabeling>> {
    are_isomorphic_with(s1, s2, SearchLimits::default())
}

pub fn are_isomorphic_with(
    s1: &IncidenceStructure,
    s2: &IncidenceStructure,
    limits: SearchLimits,
) -> Result<Option<Relabeling>> {
    if s1.v() != s2.v() || s1.b() != s2.b() {
        return Ok(None);
    }
    let c1 = canonical_form_with(s1, limits)?;
    let c2 = canonical_form_with(s2, limits)?;
    isomorphism_from_forms(s1, &c1, s2, &c2)
}

/// Composes two canonical relabelings into an isomorphism, if the forms agree.
pub fn isomorphism_from_forms(
    s1: &IncidenceStructure,
    c1: &CanonicalForm,
    s2: &IncidenceStructure,
    c2: &CanonicalForm,
) -> Result<Option<Relabeling>> {
    if c1.canonical_matrix != c2.canonical_matrix {
        return Ok(None);
    }
    let witness = Relabeling {
        points: c1.point_relabeling.then(&c2.point_relabeling.inverse()),
        blocks: c1.block_relabeling.then(&c2.block_relabeling.inverse()),
    };
    if witness.apply(s1)? != *s2 {
        return Err(Error::ContractViolation(
            "equal canonical forms but the composed map is not an isomorphism".into(),
        ));
    }
    Ok(Some(witness))
}

/// Whether a square structure is isomorphic to its dual.
pub fn is_self_dual(s: &IncidenceStructure) -> Result<bool> {
    if s.v() != s.b() {
        return Err(Error::InvalidStructure(format!(
            "self-duality needs a square structure, got {} blocks on {} points",
            s.b(),
            s.v()
        )));
    }
    Ok(are_isomorphic(s, &s.dual())?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn fano() -> IncidenceStructure {
        IncidenceStructure::develop_difference_set(&[0, 1, 3], 7).unwrap()
    }

    fn shuffled(s: &IncidenceStructure, rng: &mut impl rand::Rng) -> IncidenceStructure {
        let mut p: Vec<usize> = (0..s.v()).collect();
        let mut b: Vec<usize> = (0..s.b()).collect();
        p.shuffle(rng);
        b.shuffle(rng);
        s.permuted(
            &Permutation::from_images(p).unwrap(),
            &Permutation::from_images(b).unwrap(),
        )
        .unwrap()
    }

    /// Counts point permutations mapping the block set onto itself.
    fn brute_aut_count(s: &IncidenceStructure) -> usize {
        let mut blocks: Vec<Vec<usize>> = s.blocks();
        blocks.sort();
        let mut perm: Vec<usize> = (0..s.v()).collect();
        let mut count = 0;
        loop {
            let mut image: Vec<Vec<usize>> = blocks
                .iter()
                .map(|b| {
                    let mut c: Vec<usize> = b.iter().map(|&x| perm[x]).collect();
                    c.sort_unstable();
                    c
                })
                .collect();
            image.sort();
            if image == blocks {
                count += 1;
            }
            // next lexicographic permutation
            let Some(i) = (0..perm.len().saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
                break;
            };
            let j = (i + 1..perm.len()).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        count
    }

    #[test]
    fn fano_automorphisms() {
        let f = fano();
        assert_eq!(brute_aut_count(&f), 168);
        let cf = canonical_form(&f).unwrap();
        assert_eq!(cf.aut_order, BigUint::from(168u32));
        for a in &cf.aut_generators {
            assert_eq!(a.apply(&f).unwrap(), f);
        }
    }

    #[test]
    fn relabeled_fano_has_same_form() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let f = fano();
        let base = canonical_form(&f).unwrap().canonical_matrix;
        for _ in 0..20 {
            let g = shuffled(&f, &mut rng);
            assert_eq!(canonical_form(&g).unwrap().canonical_matrix, base);
            let w = are_isomorphic(&f, &g).unwrap().expect("isomorphic");
            assert_eq!(w.apply(&f).unwrap(), g);
        }
        assert_eq!(canonical_form(&base).unwrap().canonical_matrix, base);
    }

    #[test]
    fn different_parameters_are_not_isomorphic() {
        let biplane = IncidenceStructure::develop_difference_set(&[1, 3, 4, 5, 9], 11).unwrap();
        assert!(are_isomorphic(&fano(), &biplane).unwrap().is_none());
    }

    #[test]
    fn self_duality() {
        assert!(is_self_dual(&fano()).unwrap());
        let rect = IncidenceStructure::from_blocks(3, &[vec![0, 1]]).unwrap();
        assert!(is_self_dual(&rect).is_err());
    }

    #[test]
    fn duplicate_blocks_are_rejected() {
        let s = IncidenceStructure::from_blocks(3, &[vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(
            canonical_form(&s).unwrap_err(),
            Error::DuplicateBlocks { first: 0, second: 1 }
        );
    }

    #[test]
    fn tiny_budget_is_reported() {
        let limits = SearchLimits { max_nodes: 2, max_seconds: None };
        assert!(matches!(
            canonical_form_with(&fano(), limits),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn small_structures_match_brute_force() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        use rand::Rng;
        for _ in 0..60 {
            let v = rng.gen_range(2..=7);
            let b = rng.gen_range(1..=8);
            let mut rows: Vec<Vec<bool>> = Vec::new();
            while rows.len() < b {
                let row: Vec<bool> = (0..v).map(|_| rng.gen_bool(0.45)).collect();
                if !rows.contains(&row) {
                    rows.push(row);
                }
                if rows.len() >= 1 << v {
                    break;
                }
            }
            let s = IncidenceStructure::from_rows(&rows).unwrap();
            let cf = canonical_form(&s).unwrap();
            assert_eq!(cf.aut_order, BigUint::from(brute_aut_count(&s)), "{s:?}");
            let t = shuffled(&s, &mut rng);
            assert_eq!(canonical_form(&t).unwrap().canonical_matrix, cf.canonical_matrix);
        }
    }
}
