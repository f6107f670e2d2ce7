//! Distance graphs over `Z_n^m` and an exact maximum-clique solver.
//!
//! Cliques of the distance graph are exactly the integral point sets, so
//! `I(n, m)` is a maximum-clique problem. Three constructions are offered:
//! the full graph on `Z_n^m`, the graph rooted at the origin, and the
//! anchored family `G_i` in which the pair of minimal edge class is fixed.
//! The anchored construction is generic over the class function; besides
//! the Lee-reduced classes it also runs over orbits of the linear symmetry
//! group of the integrality relation.
//!
//! The solver is a bit-parallel branch and bound with greedy colouring
//! bounds (in the style of MCQ/BBMC) over a degeneracy ordering. Top-level
//! branches are distributed over a rayon pool; the incumbent only grows, so
//! the reported size does not depend on scheduling.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::error::{Error, Result};
use crate::geometry::{Point, Space};
use crate::modring::{self, Zn};
use crate::reductions;

/// Default cap on the vertex count of a constructed graph.
pub const DEFAULT_MAX_VERTICES: u64 = 1 << 15;

/// Which construction produced a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Full,
    Rooted,
    /// Member `index` of the Lee-class family.
    DeltaClass { index: usize },
    /// Member `index` of the symmetry-orbit family.
    Orbit { index: usize },
    /// `H_{2n}^m` graph over `Z_n^m` for the even-modulus reduction.
    EvenReduction,
    /// Hamming formulation of `Z_3^m`.
    Hamming,
    /// Graph given explicitly (tests, imports).
    Explicit,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Rooted => "rooted",
            Variant::DeltaClass { .. } => "delta-family",
            Variant::Orbit { .. } => "orbit-family",
            Variant::EvenReduction => "even-reduction",
            Variant::Hamming => "hamming",
            Variant::Explicit => "explicit",
        }
    }
}

/// An undirected simple graph with bit-vector adjacency.
///
/// Vertex labels are row-major point indices of `Z_n^m`; `anchors` are the
/// points every clique of this graph is implicitly joined with (the origin
/// for the rooted graph, the anchor pair for family members).
#[derive(Clone, Debug)]
pub struct DistanceGraph {
    n: u32,
    m: usize,
    variant: Variant,
    labels: Vec<u64>,
    anchors: Vec<u64>,
    adj: Vec<BitSet>,
}

impl DistanceGraph {
    /// Builds a graph on `labels`; `edge(a, b)` is only queried for `a != b`.
    pub fn from_predicate(
        n: u32,
        m: usize,
        variant: Variant,
        labels: Vec<u64>,
        anchors: Vec<u64>,
        mut edge: impl FnMut(u64, u64) -> bool,
    ) -> Self {
        let v = labels.len();
        let mut adj = vec![BitSet::new(v); v];
        for i in 0..v {
            for j in i + 1..v {
                if edge(labels[i], labels[j]) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        DistanceGraph {
            n,
            m,
            variant,
            labels,
            anchors,
            adj,
        }
    }

    /// A graph on vertices `0..v` with the given edges (either orientation).
    pub fn from_edges(v: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![BitSet::new(v); v];
        for &(a, b) in edges {
            if a >= v || b >= v {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range")));
            }
            if a != b {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        Ok(DistanceGraph {
            n: 0,
            m: 0,
            variant: Variant::Explicit,
            labels: (0..v as u64).collect(),
            anchors: Vec::new(),
            adj,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BitSet::count).sum::<usize>() / 2
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn anchors(&self) -> &[u64] {
        &self.anchors
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count()
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |i| {
            self.adj[i].iter().filter(move |&j| j > i).map(move |j| (i, j))
        })
    }

    /// Decodes a vertex label as a point of `Z_n^m`.
    pub fn point(&self, label: u64) -> Option<Point> {
        (self.m > 0)
            .then(|| Space::new(self.n, self.m).ok())
            .flatten()
            .map(|s| s.decode(label))
    }

    /// Subgraph induced on `keep` (indices into this graph).
    pub fn induced(&self, keep: &[usize]) -> DistanceGraph {
        let labels = keep.iter().map(|&i| self.labels[i]).collect();
        let mut adj = vec![BitSet::new(keep.len()); keep.len()];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                if self.adj[i].contains(j) {
                    adj[a].insert(b);
                }
            }
        }
        DistanceGraph {
            n: self.n,
            m: self.m,
            variant: self.variant,
            labels,
            anchors: self.anchors.clone(),
            adj,
        }
    }
}

fn space_checked(n: u32, m: usize, max_vertices: u64) -> Result<Space> {
    let space = Space::new(n, m)?;
    match space.size() {
        Some(v) if v <= max_vertices => Ok(space),
        _ => Err(Error::ResourceLimit(format!(
            "Z_{n}^{m} has more than {max_vertices} points"
        ))),
    }
}

/// Integrality of every difference vector, indexed by encoded point.
fn integral_differences(space: &Space) -> Vec<bool> {
    let size = space.size().expect("checked size") as usize;
    (0..size as u64)
        .map(|d| space.is_integral_index(0, d))
        .collect()
}

/// Encoded `a - b` in `Z_n^m`.
#[inline]
fn diff_index(a: u64, b: u64, n: u64, m: usize) -> u64 {
    let (mut a, mut b) = (a, b);
    let mut out = 0u64;
    let mut scale = 1u64;
    for _ in 0..m {
        let d = (a % n + n - b % n) % n;
        out += d * scale;
        scale *= n;
        a /= n;
        b /= n;
    }
    out
}

/// Every point of `Z_n^m` is a vertex; edges join integral pairs.
pub fn build_full(n: u32, m: usize) -> Result<DistanceGraph> {
    build_full_limited(n, m, DEFAULT_MAX_VERTICES)
}

pub fn build_full_limited(n: u32, m: usize, max_vertices: u64) -> Result<DistanceGraph> {
    let space = space_checked(n, m, max_vertices)?;
    let integral = integral_differences(&space);
    let size = space.size().unwrap();
    Ok(DistanceGraph::from_predicate(
        n,
        m,
        Variant::Full,
        (0..size).collect(),
        Vec::new(),
        |a, b| integral[diff_index(a, b, n as u64, m) as usize],
    ))
}

/// Nonzero points at integral distance to the origin; `I(n, m) = 1 + omega`.
pub fn build_rooted(n: u32, m: usize) -> Result<DistanceGraph> {
    build_rooted_limited(n, m, DEFAULT_MAX_VERTICES)
}

pub fn build_rooted_limited(n: u32, m: usize, max_vertices: u64) -> Result<DistanceGraph> {
    let space = space_checked(n, m, max_vertices)?;
    let integral = integral_differences(&space);
    let labels: Vec<u64> = (1..space.size().unwrap())
        .filter(|&d| integral[d as usize])
        .collect();
    Ok(DistanceGraph::from_predicate(
        n,
        m,
        Variant::Rooted,
        labels,
        vec![0],
        |a, b| integral[diff_index(a, b, n as u64, m) as usize],
    ))
}

/// How the edge classes of the anchored family are numbered.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClassOrdering {
    /// Ascending number of common integral neighbours of the anchor pair,
    /// ties broken by the class representative.
    #[default]
    RarestFirst,
    /// By class representative.
    Lexicographic,
}

/// A partition of the integral nonzero difference vectors into classes that
/// are invariant under negation of the difference; the basis of the anchored
/// family.
struct ClassMap {
    /// Class of each encoded difference vector; `NONE` for zero or non-integral.
    class_of: Vec<u32>,
    /// Representative difference vector of each class.
    reps: Vec<u64>,
}

const NONE: u32 = u32::MAX;

impl ClassMap {
    /// Lee-reduced classes: `d` and `d'` share a class iff they agree
    /// coordinatewise up to sign.
    fn lee(space: &Space, integral: &[bool]) -> Self {
        let n = space.modulus();
        let size = integral.len();
        let mut class_of = vec![NONE; size];
        let mut reps = Vec::new();
        let mut index_of_rep = std::collections::HashMap::new();
        for d in 1..size as u64 {
            if !integral[d as usize] {
                continue;
            }
            let p = space.decode(d);
            let reduced = Point::from_reduced(p.coords().iter().map(|&c| c.min(n - c)).collect());
            let key = space.encode(&reduced);
            let id = *index_of_rep.entry(key).or_insert_with(|| {
                reps.push(key);
                reps.len() as u32 - 1
            });
            class_of[d as usize] = id;
        }
        ClassMap { class_of, reps }
    }

    /// Orbits under linear maps that preserve integrality in both directions.
    ///
    /// For `m = 2` these are the similitudes `[[a, -b], [b, a]]` and
    /// `[[a, b], [b, -a]]` with `a^2 + b^2` the square of a unit; for other
    /// dimensions, signed permutation matrices times unit scalars.
    fn orbits(space: &Space, integral: &[bool]) -> Self {
        let n = space.modulus();
        let m = space.dim();
        let maps = linear_symmetries(n, m);
        let size = integral.len();
        let mut class_of = vec![NONE; size];
        let mut reps = Vec::new();
        for d in 1..size as u64 {
            if !integral[d as usize] || class_of[d as usize] != NONE {
                continue;
            }
            let id = reps.len() as u32;
            reps.push(d);
            let p = space.decode(d);
            for map in &maps {
                let image = space.encode(&apply_linear(map, &p, n));
                debug_assert!(integral[image as usize]);
                class_of[image as usize] = id;
            }
        }
        ClassMap { class_of, reps }
    }

    fn class_count(&self) -> usize {
        self.reps.len()
    }
}

/// A linear map of `Z_n^m` as a row-major `m x m` matrix.
type Linear = Vec<u32>;

fn apply_linear(map: &Linear, p: &Point, n: u32) -> Point {
    let m = p.dim();
    let c = p.coords();
    Point::from_reduced(
        (0..m)
            .map(|i| {
                ((0..m).map(|j| map[i * m + j] as u64 * c[j] as u64).sum::<u64>() % n as u64) as u32
            })
            .collect(),
    )
}

fn linear_symmetries(n: u32, m: usize) -> Vec<Linear> {
    let z = Zn::new(n).expect("valid modulus");
    let units: Vec<u32> = (1..=n)
        .map(|u| u % n)
        .filter(|&u| modring::gcd(u as u64, n as u64) == 1)
        .collect();
    let unit_squares: std::collections::BTreeSet<u32> =
        units.iter().map(|&u| (u as u64 * u as u64 % n as u64) as u32).collect();
    let mut maps = Vec::new();
    if m == 2 {
        for a in 0..n {
            for b in 0..n {
                let norm = ((a as u64 * a as u64 + b as u64 * b as u64) % n as u64) as u32;
                if !unit_squares.contains(&norm) {
                    continue;
                }
                let nb = z.neg(z.residue(b)).value();
                let na = z.neg(z.residue(a)).value();
                maps.push(vec![a, nb, b, a]);
                maps.push(vec![a, b, b, na]);
            }
        }
    } else {
        for perm in permutations(m) {
            for signs in 0u32..(1 << m) {
                for &u in &units {
                    let mut map = vec![0u32; m * m];
                    for (i, &j) in perm.iter().enumerate() {
                        let v = if signs >> i & 1 == 1 { z.neg(z.residue(u)).value() } else { u };
                        map[i * m + j] = v;
                    }
                    maps.push(map);
                }
            }
        }
    }
    maps.sort();
    maps.dedup();
    maps
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, m - 1);
            out.push(q);
        }
    }
    out
}

/// Anchored family over an arbitrary class map.
fn build_family(
    space: &Space,
    integral: &[bool],
    classes: &ClassMap,
    ordering: ClassOrdering,
    variant: impl Fn(usize) -> Variant,
) -> Vec<DistanceGraph> {
    let n = space.modulus();
    let m = space.dim();
    let n64 = n as u64;
    let size = integral.len() as u64;
    let common = |rep: u64| -> usize {
        (1..size)
            .filter(|&x| x != rep && integral[x as usize] && integral[diff_index(x, rep, n64, m) as usize])
            .count()
    };
    let mut order: Vec<usize> = (0..classes.class_count()).collect();
    match ordering {
        ClassOrdering::Lexicographic => {
            order.sort_by_key(|&c| space.decode(classes.reps[c]));
        }
        ClassOrdering::RarestFirst => {
            let counts: Vec<usize> = (0..classes.class_count()).map(|c| common(classes.reps[c])).collect();
            order.sort_by_key(|&c| (counts[c], space.decode(classes.reps[c])));
        }
    }
    // rank of each class in the chosen numbering
    let mut rank = vec![0u32; classes.class_count()];
    for (i, &c) in order.iter().enumerate() {
        rank[c] = i as u32;
    }
    let rank_of = |d: u64| -> Option<u32> {
        let c = classes.class_of[d as usize];
        (c != NONE).then(|| rank[c as usize])
    };
    order
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let anchor = classes.reps[c];
            let i32_ = i as u32;
            let labels: Vec<u64> = (1..size)
                .filter(|&x| x != anchor)
                .filter(|&x| {
                    rank_of(x).is_some_and(|r| r >= i32_)
                        && rank_of(diff_index(x, anchor, n64, m)).is_some_and(|r| r >= i32_)
                })
                .collect();
            DistanceGraph::from_predicate(n, m, variant(i), labels, vec![0, anchor], |a, b| {
                rank_of(diff_index(a, b, n64, m)).is_some_and(|r| r >= i32_)
            })
        })
        .collect()
}

/// The family `G_i`, one member per integral Lee class `e_i` (nonzero).
///
/// Member `i` is anchored at `{0, e_i}`; its vertices are the points whose
/// classes to both anchors are numbered at least `i`, and its edges the
/// pairs whose class is numbered at least `i`. Then
/// `I(n, m) = max(2, 2 + max_i omega(G_i))` when some class exists.
pub fn build_delta_family(n: u32, m: usize, ordering: ClassOrdering) -> Result<Vec<DistanceGraph>> {
    build_delta_family_limited(n, m, ordering, DEFAULT_MAX_VERTICES)
}

pub fn build_delta_family_limited(
    n: u32,
    m: usize,
    ordering: ClassOrdering,
    max_vertices: u64,
) -> Result<Vec<DistanceGraph>> {
    let space = space_checked(n, m, max_vertices)?;
    let integral = integral_differences(&space);
    let classes = ClassMap::lee(&space, &integral);
    Ok(build_family(&space, &integral, &classes, ordering, |index| {
        Variant::DeltaClass { index }
    }))
}

/// Like [`build_delta_family`], with classes merged into orbits of the
/// linear symmetry group. Far fewer members, each at least as constrained.
pub fn build_orbit_family(n: u32, m: usize, ordering: ClassOrdering) -> Result<Vec<DistanceGraph>> {
    build_orbit_family_limited(n, m, ordering, DEFAULT_MAX_VERTICES)
}

pub fn build_orbit_family_limited(
    n: u32,
    m: usize,
    ordering: ClassOrdering,
    max_vertices: u64,
) -> Result<Vec<DistanceGraph>> {
    let space = space_checked(n, m, max_vertices)?;
    let integral = integral_differences(&space);
    let classes = ClassMap::orbits(&space, &integral);
    Ok(build_family(&space, &integral, &classes, ordering, |index| {
        Variant::Orbit { index }
    }))
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

/// Search limits and parallelism for [`max_clique`].
#[derive(Clone, Debug, Default)]
pub struct SolverOptions {
    /// Worker threads; `0` uses the ambient rayon pool.
    pub threads: usize,
    /// Wall-clock limit for this call.
    pub budget: Option<Duration>,
    /// A clique of at least this size is known to exist. Speeds up pruning;
    /// if no such clique is found the search is repeated without the hint.
    pub known_lower: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueResult {
    pub size: usize,
    /// Vertex indices of one maximum clique.
    pub vertices: Vec<usize>,
    /// Labels of `vertices`.
    pub witness: Vec<u64>,
    pub nodes_explored: u64,
    pub elapsed: Duration,
    /// `false` when the budget ran out; `size` is then only a lower bound.
    pub exact: bool,
}

struct Shared {
    best: AtomicUsize,
    witness: Mutex<Vec<usize>>,
    nodes: AtomicU64,
    abort: AtomicBool,
    deadline: Option<Instant>,
}

impl Shared {
    fn offer(&self, clique: &[usize]) {
        let mut w = self.witness.lock().expect("witness lock");
        if clique.len() > w.len() {
            *w = clique.to_vec();
            self.best.fetch_max(clique.len(), Ordering::SeqCst);
        }
    }
}

/// Graph renumbered into solver order.
struct Ordered {
    adj: Vec<BitSet>,
    /// original index of each solver vertex
    original: Vec<usize>,
}

impl Ordered {
    /// Degeneracy (smallest-last) ordering; high-core vertices get the
    /// smallest indices and are coloured first.
    fn new(g: &DistanceGraph) -> Self {
        let v = g.vertex_count();
        let mut degree: Vec<usize> = (0..v).map(|i| g.degree(i)).collect();
        let mut removed = vec![false; v];
        let mut order = Vec::with_capacity(v);
        // bucket queue over degrees
        let max_deg = degree.iter().copied().max().unwrap_or(0);
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_deg + 1];
        for i in 0..v {
            buckets[degree[i]].push(i);
        }
        let mut low = 0;
        while order.len() < v {
            while buckets[low].is_empty() {
                low += 1;
            }
            let x = buckets[low].pop().unwrap();
            if removed[x] || degree[x] != low {
                continue;
            }
            removed[x] = true;
            order.push(x);
            for y in g.neighbors(x).iter() {
                if !removed[y] {
                    degree[y] -= 1;
                    buckets[degree[y]].push(y);
                    if degree[y] < low {
                        low = degree[y];
                    }
                }
            }
        }
        order.reverse();
        let mut position = vec![0usize; v];
        for (p, &x) in order.iter().enumerate() {
            position[x] = p;
        }
        let mut adj = vec![BitSet::new(v); v];
        for (p, &x) in order.iter().enumerate() {
            for y in g.neighbors(x).iter() {
                adj[p].insert(position[y]);
            }
        }
        Ordered {
            adj,
            original: order,
        }
    }

    fn len(&self) -> usize {
        self.original.len()
    }

    /// Greedy clique: repeatedly add the candidate with most candidate neighbours.
    fn greedy(&self) -> Vec<usize> {
        let v = self.len();
        let mut best = Vec::new();
        // a few starting points keep this cheap but not blind
        for start in (0..v).take(32) {
            let mut clique = vec![start];
            let mut cand = self.adj[start].clone();
            while !cand.is_empty() {
                let pick = cand
                    .iter()
                    .max_by_key(|&x| (self.adj[x].intersection_count(&cand), std::cmp::Reverse(x)))
                    .unwrap();
                clique.push(pick);
                cand.intersect_with(&self.adj[pick]);
            }
            if clique.len() > best.len() {
                best = clique;
            }
        }
        best
    }
}

/// Greedy sequential colouring of `cand`. Returns vertices whose colour is
/// at least `min_color`, in non-decreasing colour order, with their colours.
fn color_sort(
    adj: &[BitSet],
    cand: &BitSet,
    min_color: usize,
    scratch_u: &mut BitSet,
    scratch_q: &mut BitSet,
    out: &mut Vec<(usize, usize)>,
) {
    out.clear();
    scratch_u.copy_from(cand);
    let mut color = 0;
    while !scratch_u.is_empty() {
        color += 1;
        scratch_q.copy_from(scratch_u);
        while let Some(v) = scratch_q.first() {
            scratch_u.remove(v);
            scratch_q.remove(v);
            scratch_q.difference_with(&adj[v]);
            if color >= min_color {
                out.push((v, color));
            }
        }
    }
}

struct Worker<'a> {
    adj: &'a [BitSet],
    shared: &'a Shared,
    clique: Vec<usize>,
    local_nodes: u64,
    // per-depth buffers
    cands: Vec<BitSet>,
    orders: Vec<Vec<(usize, usize)>>,
    scratch_u: BitSet,
    scratch_q: BitSet,
}

impl<'a> Worker<'a> {
    fn new(adj: &'a [BitSet], shared: &'a Shared) -> Self {
        let v = adj.len();
        Worker {
            adj,
            shared,
            clique: Vec::new(),
            local_nodes: 0,
            cands: Vec::new(),
            orders: Vec::new(),
            scratch_u: BitSet::new(v),
            scratch_q: BitSet::new(v),
        }
    }

    fn tick(&mut self) -> bool {
        self.local_nodes += 1;
        if self.local_nodes % 4096 == 0 {
            if let Some(deadline) = self.shared.deadline {
                if Instant::now() >= deadline {
                    self.shared.abort.store(true, Ordering::Relaxed);
                }
            }
        }
        self.shared.abort.load(Ordering::Relaxed)
    }

    /// Explores cliques extending `self.clique` with vertices of `cands[depth]`.
    fn expand(&mut self, depth: usize) {
        if self.tick() {
            return;
        }
        let v = self.adj.len();
        while self.cands.len() <= depth + 1 {
            self.cands.push(BitSet::new(v));
            self.orders.push(Vec::new());
        }
        let best = self.shared.best.load(Ordering::Relaxed);
        let size = self.clique.len();
        let min_color = (best + 1).saturating_sub(size);
        let mut order = std::mem::take(&mut self.orders[depth]);
        color_sort(
            self.adj,
            &self.cands[depth],
            min_color,
            &mut self.scratch_u,
            &mut self.scratch_q,
            &mut order,
        );
        for idx in (0..order.len()).rev() {
            let (x, color) = order[idx];
            if size + color <= self.shared.best.load(Ordering::Relaxed) {
                break;
            }
            self.clique.push(x);
            let (lo, hi) = self.cands.split_at_mut(depth + 1);
            hi[0].assign_and(&lo[depth], &self.adj[x]);
            if hi[0].is_empty() {
                if self.clique.len() > self.shared.best.load(Ordering::Relaxed) {
                    self.shared.offer(&self.clique);
                }
            } else {
                self.expand(depth + 1);
            }
            self.clique.pop();
            self.cands[depth].remove(x);
            if self.shared.abort.load(Ordering::Relaxed) {
                break;
            }
        }
        self.orders[depth] = order;
    }
}

fn run_search(ordered: &Ordered, floor: usize, deadline: Option<Instant>) -> (Vec<usize>, u64, bool) {
    let v = ordered.len();
    let shared = Shared {
        best: AtomicUsize::new(floor),
        witness: Mutex::new(Vec::new()),
        nodes: AtomicU64::new(0),
        abort: AtomicBool::new(false),
        deadline,
    };
    if v > 0 {
        // Root colouring, then one task per root branch.
        let root = BitSet::full(v);
        let mut order = Vec::new();
        color_sort(
            &ordered.adj,
            &root,
            floor + 1,
            &mut BitSet::new(v),
            &mut BitSet::new(v),
            &mut order,
        );
        let mut remaining = root;
        let mut tasks = Vec::with_capacity(order.len());
        for &(x, color) in order.iter().rev() {
            let mut cand = remaining.clone();
            cand.intersect_with(&ordered.adj[x]);
            tasks.push((x, color, cand));
            remaining.remove(x);
        }
        tasks.into_par_iter().for_each(|(x, color, cand)| {
            if shared.abort.load(Ordering::Relaxed) || color <= shared.best.load(Ordering::Relaxed) {
                return;
            }
            let mut worker = Worker::new(&ordered.adj, &shared);
            worker.clique.push(x);
            if cand.is_empty() {
                shared.offer(&worker.clique);
            } else {
                worker.cands.push(cand);
                worker.orders.push(Vec::new());
                worker.expand(0);
            }
            shared.nodes.fetch_add(worker.local_nodes, Ordering::Relaxed);
        });
    }
    let witness = shared.witness.into_inner().expect("witness lock");
    (
        witness,
        shared.nodes.load(Ordering::Relaxed),
        !shared.abort.load(Ordering::Relaxed),
    )
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

/// Exact maximum clique of `g`.
///
/// With a budget, an interrupted search returns the best clique found with
/// `exact == false`.
pub fn max_clique(g: &DistanceGraph, opts: &SolverOptions) -> CliqueResult {
    let start = Instant::now();
    let deadline = opts.budget.map(|b| start + b);
    let ordered = Ordered::new(g);
    let greedy = ordered.greedy();
    let hint = opts.known_lower.min(g.vertex_count());
    let floor = greedy.len().max(hint.saturating_sub(1));
    let (found, mut nodes, mut exact) = in_pool(opts.threads, || run_search(&ordered, floor, deadline));
    let mut best = if found.len() > greedy.len() { found } else { greedy.clone() };
    if best.len() < hint && exact {
        // the hint was not attainable: search again from the greedy bound
        let (again, more, ok) = in_pool(opts.threads, || run_search(&ordered, greedy.len(), deadline));
        nodes += more;
        exact = ok;
        if again.len() > best.len() {
            best = again;
        }
    }
    let mut vertices: Vec<usize> = best.iter().map(|&x| ordered.original[x]).collect();
    vertices.sort_unstable();
    let witness = vertices.iter().map(|&i| g.labels[i]).collect();
    CliqueResult {
        size: vertices.len(),
        vertices,
        witness,
        nodes_explored: nodes,
        elapsed: start.elapsed(),
        exact,
    }
}

/// Largest clique strictly larger than `floor`, if any.
pub(crate) fn clique_above(
    g: &DistanceGraph,
    floor: usize,
    threads: usize,
    deadline: Option<Instant>,
) -> (Option<Vec<usize>>, u64, bool) {
    let ordered = Ordered::new(g);
    let greedy = ordered.greedy();
    let start_floor = floor.max(greedy.len());
    let (found, nodes, exact) = in_pool(threads, || run_search(&ordered, start_floor, deadline));
    let best = if found.len() > greedy.len() { found } else { greedy };
    let out = (best.len() > floor).then(|| {
        let mut v: Vec<usize> = best.iter().map(|&x| ordered.original[x]).collect();
        v.sort_unstable();
        v
    });
    (out, nodes, exact)
}

// ---------------------------------------------------------------------------
// I(n, m)
// ---------------------------------------------------------------------------

/// Graph construction used for the clique-search step of [`i_of`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    Full,
    Rooted,
    DeltaFamily,
    #[default]
    OrbitFamily,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::Rooted => "rooted",
            Strategy::DeltaFamily => "delta-family",
            Strategy::OrbitFamily => "orbit-family",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Strategy::Full),
            "rooted" => Ok(Strategy::Rooted),
            "delta-family" | "delta" => Ok(Strategy::DeltaFamily),
            "orbit-family" | "orbit" => Ok(Strategy::OrbitFamily),
            other => Err(Error::InvalidInput(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValueOptions {
    pub strategy: Strategy,
    /// Split composite moduli into coprime prime powers.
    pub cartesian: bool,
    /// Use the `H_{2n}^m` reduction for even moduli.
    pub even_reduction: bool,
    pub threads: usize,
    /// Wall-clock limit for the whole computation.
    pub budget: Option<Duration>,
    pub max_vertices: u64,
}

impl Default for ValueOptions {
    fn default() -> Self {
        ValueOptions {
            strategy: Strategy::default(),
            cartesian: true,
            even_reduction: true,
            threads: 0,
            budget: None,
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

impl ValueOptions {
    /// Plain clique search with the given construction, no reductions.
    pub fn direct(strategy: Strategy) -> Self {
        ValueOptions {
            strategy,
            cartesian: false,
            even_reduction: false,
            ..ValueOptions::default()
        }
    }
}

/// `I(n, m)` with a witness point set.
#[derive(Clone, Debug)]
pub struct ValueReport {
    pub n: u32,
    pub m: usize,
    pub value: u64,
    /// `false` if a budget expired; `value` is then a lower bound.
    pub exact: bool,
    pub witness: Vec<Point>,
    /// How the value was obtained (closed form, reduction, construction).
    pub method: String,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

/// Exact `I(n, m)`: the largest integral point set in `Z_n^m`.
///
/// Closed forms first (`m = 1`, `n <= 2`), then the coprime splitting and
/// the even-modulus reduction (when enabled), then clique search.
/// An expired budget yields [`Error::Timeout`] with the best lower bound.
pub fn i_of(n: u32, m: usize, opts: &ValueOptions) -> Result<ValueReport> {
    let start = Instant::now();
    let deadline = opts.budget.map(|b| start + b);
    let report = value_inner(n, m, opts, deadline)?;
    if !report.exact {
        return Err(Error::Timeout {
            lower: report.value,
        });
    }
    Ok(ValueReport {
        elapsed: start.elapsed(),
        ..report
    })
}

/// Like [`i_of`] but returns a non-exact report instead of an error.
pub fn i_of_report(n: u32, m: usize, opts: &ValueOptions) -> Result<ValueReport> {
    let start = Instant::now();
    let deadline = opts.budget.map(|b| start + b);
    let report = value_inner(n, m, opts, deadline)?;
    Ok(ValueReport {
        elapsed: start.elapsed(),
        ..report
    })
}

fn report(n: u32, m: usize, witness: Vec<Point>, method: &str, nodes: u64, exact: bool) -> ValueReport {
    ValueReport {
        n,
        m,
        value: witness.len() as u64,
        exact,
        witness,
        method: method.to_string(),
        nodes_explored: nodes,
        elapsed: Duration::ZERO,
    }
}

fn value_inner(n: u32, m: usize, opts: &ValueOptions, deadline: Option<Instant>) -> Result<ValueReport> {
    let space = Space::new(n, m)?;
    if m == 1 || n <= 2 {
        // the whole space is integral: I(n,1) = n, I(1,m) = 1, I(2,m) = 2^m
        let size = space.size().filter(|&s| s <= opts.max_vertices.max(1 << 20)).ok_or_else(|| {
            Error::ResourceLimit(format!("Z_{n}^{m} is too large to list"))
        })?;
        let witness = (0..size).map(|i| space.decode(i)).collect();
        return Ok(report(n, m, witness, "closed form", 0, true));
    }
    let factors = modring::factorize(n);
    if opts.cartesian && !factors.is_prime_power() {
        let parts = factors.prime_powers();
        let mut acc: Option<(u32, Vec<Point>)> = None;
        let mut nodes = 0;
        let mut exact = true;
        for q in parts {
            let sub = value_inner(q, m, opts, deadline)?;
            nodes += sub.nodes_explored;
            exact &= sub.exact;
            acc = Some(match acc {
                None => (q, sub.witness),
                Some((a, pa)) => (a * q, reductions::cartesian_compose(&pa, a, &sub.witness, q)?),
            });
        }
        let (_, witness) = acc.expect("at least two prime powers");
        return Ok(report(n, m, witness, "coprime product", nodes, exact));
    }
    if opts.even_reduction && n % 2 == 0 {
        let half = n / 2;
        let g = reductions::even_reduction_graph_limited(n, m, opts.max_vertices)?;
        let (clique, nodes, exact) = solve_graph(&g, opts, deadline);
        let s: Vec<Point> = clique.iter().map(|&v| Space::new(half, m).unwrap().decode(g.labels[v])).collect();
        let witness = reductions::even_preimage(&s, n);
        return Ok(report(n, m, witness, "even reduction", nodes, exact));
    }
    clique_value(&space, opts, deadline)
}

/// Max clique of a single graph including its anchors.
fn solve_graph(g: &DistanceGraph, opts: &ValueOptions, deadline: Option<Instant>) -> (Vec<usize>, u64, bool) {
    let remaining = deadline.map(|d| d.saturating_duration_since(Instant::now()));
    let res = max_clique(
        g,
        &SolverOptions {
            threads: opts.threads,
            budget: remaining,
            known_lower: 0,
        },
    );
    (res.vertices, res.nodes_explored, res.exact)
}

fn clique_value(space: &Space, opts: &ValueOptions, deadline: Option<Instant>) -> Result<ValueReport> {
    let (n, m) = (space.modulus(), space.dim());
    let limit = opts.max_vertices;
    let decode_all = |g: &DistanceGraph, vs: &[usize]| -> Vec<Point> {
        g.anchors
            .iter()
            .chain(vs.iter().map(|&v| &g.labels[v]))
            .map(|&l| space.decode(l))
            .collect()
    };
    match opts.strategy {
        Strategy::Full | Strategy::Rooted => {
            let g = if opts.strategy == Strategy::Full {
                build_full_limited(n, m, limit)?
            } else {
                build_rooted_limited(n, m, limit)?
            };
            let (clique, nodes, exact) = solve_graph(&g, opts, deadline);
            Ok(report(n, m, decode_all(&g, &clique), opts.strategy.name(), nodes, exact))
        }
        Strategy::DeltaFamily | Strategy::OrbitFamily => {
            let family = if opts.strategy == Strategy::DeltaFamily {
                build_delta_family_limited(n, m, ClassOrdering::RarestFirst, limit)?
            } else {
                build_orbit_family_limited(n, m, ClassOrdering::RarestFirst, limit)?
            };
            let (witness, nodes, exact) = solve_family(&family, opts.threads, deadline);
            let witness = match witness {
                Some((gi, vs)) => decode_all(&family[gi], &vs),
                // no integral nonzero class: single points only
                None => vec![space.decode(0)],
            };
            Ok(report(n, m, witness, opts.strategy.name(), nodes, exact))
        }
    }
}

/// Maximises `2 + omega(G_i)` over an anchored family. Returns the member
/// index and clique of the best member.
pub(crate) fn solve_family(
    family: &[DistanceGraph],
    threads: usize,
    deadline: Option<Instant>,
) -> (Option<(usize, Vec<usize>)>, u64, bool) {
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut best_size = 0usize;
    // cheap lower bounds first so that every member is searched against them
    for (i, g) in family.iter().enumerate() {
        let clique = Ordered::new(g).greedy();
        let size = 2 + clique.len();
        if best.is_none() || size > best_size {
            let ordered_orig = greedy_original(g, &clique);
            best = Some((i, ordered_orig));
            best_size = size;
        }
    }
    let mut nodes = 0;
    let mut exact = true;
    for (i, g) in family.iter().enumerate() {
        let (found, k, ok) = clique_above(g, best_size.saturating_sub(2), threads, deadline);
        nodes += k;
        if let Some(vs) = found {
            best_size = 2 + vs.len();
            best = Some((i, vs));
        }
        if !ok {
            exact = false;
            break;
        }
    }
    (best, nodes, exact)
}

fn greedy_original(g: &DistanceGraph, solver_clique: &[usize]) -> Vec<usize> {
    let ordered = Ordered::new(g);
    let mut v: Vec<usize> = solver_clique.iter().map(|&x| ordered.original[x]).collect();
    v.sort_unstable();
    v
}
