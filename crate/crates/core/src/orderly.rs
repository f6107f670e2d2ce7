//! Isomorph-free orderly generation of integral point sets over `Z_n^2`.
//!
//! A point set is described up to coordinatewise translation and
//! reflection by its Δ-matrix: the symmetric matrix of edge-class indices
//! into a fixed table of Lee-reduced integral difference vectors. Matrices
//! are compared by reading the upper triangle column by column; a matrix is
//! canonical when no relabelling of its points reads larger, and
//! semi-canonical when the same holds after deleting the last point.
//!
//! Level `L_r` holds every semi-canonical `r`-point matrix that satisfies
//! the position mode, each with one coordinate witness. Level `r + 1` is
//! built by gluing: for canonical `x1` and `x2 ⪯ x1` in `L_r` agreeing on
//! their first `r - 1` points, new points `q` are placed so that `x1 + q`
//! minus its second-to-last point has matrix `x2`. The canonical records of
//! a level are one per isomorphism class.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{level_circles_through, CollinearTable, Point, P2};
use crate::modring::{squares, Zn};

const NO_CLASS: u16 = u16::MAX;

/// Integral Lee-reduced difference vectors of `Z_n^2`, sorted ascending,
/// starting with `(0, 0)`.
#[derive(Clone, Debug)]
pub struct EdgeClassTable {
    n: u32,
    classes: Vec<P2>,
    /// class index of each raw difference `dx * n + dy`
    of_diff: Vec<u16>,
}

impl EdgeClassTable {
    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn classes(&self) -> &[P2] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Index of a Lee-reduced vector, if integral.
    pub fn index(&self, d: P2) -> Option<usize> {
        self.classes.binary_search(&d).ok()
    }

    /// Class of the pair `(a, b)`, `None` if not at integral distance.
    #[inline]
    pub fn class(&self, a: P2, b: P2) -> Option<u16> {
        let c = self.raw(a, b);
        (c != NO_CLASS).then_some(c)
    }

    #[inline]
    fn raw(&self, a: P2, b: P2) -> u16 {
        let n = self.n;
        let dx = (a.0 + n - b.0) % n;
        let dy = (a.1 + n - b.1) % n;
        self.of_diff[(dx * n + dy) as usize]
    }
}

/// Builds the class table for `Z_n^2`.
pub fn edge_classes(n: u32) -> Result<EdgeClassTable> {
    let z = Zn::new(n)?;
    let sq = squares(n)?;
    let half = n / 2;
    let mut classes = Vec::new();
    for x in 0..=half {
        for y in 0..=half {
            let s = (x as u64 * x as u64 + y as u64 * y as u64) % n as u64;
            if sq.is_square(s) {
                classes.push((x, y));
            }
        }
    }
    let mut of_diff = vec![NO_CLASS; (n * n) as usize];
    for dx in 0..n {
        for dy in 0..n {
            let lx = z.lee_weight(z.residue(dx));
            let ly = z.lee_weight(z.residue(dy));
            if let Ok(i) = classes.binary_search(&(lx, ly)) {
                of_diff[(dx * n + dy) as usize] = i as u16;
            }
        }
    }
    Ok(EdgeClassTable { n, classes, of_diff })
}

/// Symmetric `r x r` matrix of class indices, stored as its reading: the
/// upper triangle column by column (column `j` holds rows `0..j`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaMatrix {
    r: usize,
    reading: Vec<u16>,
}

#[inline]
fn tri(j: usize) -> usize {
    j * j.saturating_sub(1) / 2
}

impl DeltaMatrix {
    /// From a full symmetric matrix.
    pub fn from_rows(rows: &[Vec<u16>]) -> Result<Self> {
        let r = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != r {
                return Err(Error::DimensionMismatch { expected: r, actual: row.len() });
            }
            if row[i] != 0 {
                return Err(Error::InvalidInput("nonzero diagonal".into()));
            }
        }
        let mut reading = Vec::with_capacity(tri(r));
        for j in 1..r {
            for i in 0..j {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidInput("matrix is not symmetric".into()));
                }
                if rows[i][j] == 0 {
                    return Err(Error::InvalidInput("zero off-diagonal class".into()));
                }
                reading.push(rows[i][j]);
            }
        }
        Ok(DeltaMatrix { r, reading })
    }

    /// From its reading; `reading.len()` must be `r (r - 1) / 2`.
    pub fn from_reading(r: usize, reading: Vec<u16>) -> Result<Self> {
        if reading.len() != tri(r) {
            return Err(Error::DimensionMismatch { expected: tri(r), actual: reading.len() });
        }
        Ok(DeltaMatrix { r, reading })
    }

    /// Δ-matrix of a point set.
    pub fn of_points(points: &[P2], table: &EdgeClassTable) -> Result<Self> {
        let mut reading = Vec::with_capacity(tri(points.len()));
        for j in 1..points.len() {
            for i in 0..j {
                match table.class(points[i], points[j]) {
                    Some(0) => return Err(Error::InvalidInput("repeated point".into())),
                    Some(c) => reading.push(c),
                    None => return Err(Error::InvalidInput("pair not at integral distance".into())),
                }
            }
        }
        Ok(DeltaMatrix { r: points.len(), reading })
    }

    pub fn order(&self) -> usize {
        self.r
    }

    pub fn reading(&self) -> &[u16] {
        &self.reading
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u16 {
        match i.cmp(&j) {
            Ordering::Equal => 0,
            Ordering::Less => self.reading[tri(j) + i],
            Ordering::Greater => self.reading[tri(i) + j],
        }
    }

    pub fn rows(&self) -> Vec<Vec<u16>> {
        (0..self.r).map(|i| (0..self.r).map(|j| self.get(i, j)).collect()).collect()
    }

    /// The matrix with the last point removed (↓Δ).
    pub fn down(&self) -> DeltaMatrix {
        let r = self.r.saturating_sub(1);
        DeltaMatrix { r, reading: self.reading[..tri(r)].to_vec() }
    }

    /// `(π Δ)_{ij} = Δ_{π(i) π(j)}` for a sequence of distinct indices.
    pub fn relabel(&self, perm: &[usize]) -> DeltaMatrix {
        let mut reading = Vec::with_capacity(tri(perm.len()));
        for j in 1..perm.len() {
            for i in 0..j {
                reading.push(self.get(perm[i], perm[j]));
            }
        }
        DeltaMatrix { r: perm.len(), reading }
    }
}

/// Column-lexicographic comparison; greater means closer to canonical.
pub fn compare(a: &DeltaMatrix, b: &DeltaMatrix) -> Result<Ordering> {
    if a.r != b.r {
        return Err(Error::DimensionMismatch { expected: a.r, actual: b.r });
    }
    Ok(a.reading.cmp(&b.reading))
}

/// Whether some sequence of `k` distinct points of `d` reads larger than
/// the leading `k x k` block of `d`.
fn beaten(d: &DeltaMatrix, k: usize) -> bool {
    fn dfs(d: &DeltaMatrix, k: usize, seq: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let j = seq.len();
        if j == k {
            return false;
        }
        for v in 0..d.r {
            if used[v] {
                continue;
            }
            let mut order = Ordering::Equal;
            for (i, &s) in seq.iter().enumerate() {
                order = d.get(s, v).cmp(&d.get(i, j));
                if order != Ordering::Equal {
                    break;
                }
            }
            match order {
                Ordering::Greater => return true,
                Ordering::Less => continue,
                Ordering::Equal => {
                    seq.push(v);
                    used[v] = true;
                    let hit = dfs(d, k, seq, used);
                    seq.pop();
                    used[v] = false;
                    if hit {
                        return true;
                    }
                }
            }
        }
        false
    }
    if k < 2 {
        return false;
    }
    // any pair can be placed first, so entry (0,1) must be maximal
    let top = d.get(0, 1);
    if d.reading.iter().any(|&x| x > top) {
        return true;
    }
    dfs(d, k, &mut Vec::with_capacity(k), &mut vec![false; d.r])
}

/// `Δ ⪰ π(Δ)` for every permutation `π`.
pub fn is_canonical(d: &DeltaMatrix) -> bool {
    !beaten(d, d.r)
}

/// `↓Δ ⪰ ↓π(Δ)` for every permutation `π`.
pub fn is_semi_canonical(d: &DeltaMatrix) -> bool {
    d.r < 2 || !beaten(d, d.r - 1)
}

/// No restriction, no three collinear, or additionally no four concyclic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PositionMode {
    #[default]
    Any,
    SemiGeneral,
    General,
}

impl PositionMode {
    pub fn name(&self) -> &'static str {
        match self {
            PositionMode::Any => "any",
            PositionMode::SemiGeneral => "semi-general",
            PositionMode::General => "general",
        }
    }
}

impl std::str::FromStr for PositionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "any" | "I" => Ok(PositionMode::Any),
            "semi-general" | "semi" => Ok(PositionMode::SemiGeneral),
            "general" => Ok(PositionMode::General),
            other => Err(Error::InvalidInput(format!("unknown position mode {other:?}"))),
        }
    }
}

/// A Δ-matrix with one realising point sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSetRecord {
    matrix: DeltaMatrix,
    points: Vec<P2>,
    canonical: bool,
}

impl PointSetRecord {
    fn new(matrix: DeltaMatrix, points: Vec<P2>) -> Self {
        let canonical = is_canonical(&matrix);
        PointSetRecord { matrix, points, canonical }
    }

    pub fn matrix(&self) -> &DeltaMatrix {
        &self.matrix
    }

    pub fn points(&self) -> &[P2] {
        &self.points
    }

    pub fn witness(&self) -> Vec<Point> {
        self.points.iter().map(|&(x, y)| Point::from_reduced(vec![x, y])).collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn order(&self) -> usize {
        self.matrix.r
    }

    /// `r`, the reading and the witness, tab separated.
    pub fn dump_line(&self) -> String {
        let mut s = format!("{}\t", self.matrix.r);
        s.push_str(&self.matrix.reading.iter().map(u16::to_string).collect::<Vec<_>>().join(" "));
        s.push('\t');
        let pts: Vec<String> = self.points.iter().map(|(x, y)| format!("{x},{y}")).collect();
        s.push_str(&pts.join(" "));
        s
    }

    /// Inverse of [`dump_line`](Self::dump_line); re-derives the matrix from
    /// the witness and checks it against the stored reading.
    pub fn parse_line(line: &str, table: &EdgeClassTable) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("malformed level line {line:?}"));
        let mut parts = line.split('\t');
        let r: usize = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let reading: Vec<u16> = parts
            .next()
            .ok_or_else(bad)?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let points: Vec<P2> = parts
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|t| {
                let (x, y) = t.split_once(',').ok_or_else(bad)?;
                Ok((x.parse().map_err(|_| bad())?, y.parse().map_err(|_| bad())?))
            })
            .collect::<Result<_>>()?;
        let matrix = DeltaMatrix::from_reading(r, reading)?;
        if points.len() != r || DeltaMatrix::of_points(&points, table)? != matrix {
            return Err(Error::InvalidInput("witness does not realise the matrix".into()));
        }
        Ok(PointSetRecord::new(matrix, points))
    }
}

/// Shared tables for one modulus and mode.
pub struct Context {
    n: u32,
    mode: PositionMode,
    table: EdgeClassTable,
    collinear: Option<CollinearTable>,
}

impl Context {
    pub fn new(n: u32, mode: PositionMode) -> Result<Self> {
        let table = edge_classes(n)?;
        let collinear = match mode {
            PositionMode::Any => None,
            _ => Some(CollinearTable::new(n)?),
        };
        Ok(Context { n, mode, table, collinear })
    }

    pub fn table(&self) -> &EdgeClassTable {
        &self.table
    }

    pub fn mode(&self) -> PositionMode {
        self.mode
    }

    fn collinear_with(&self, pts: &[P2], q: P2) -> bool {
        let Some(t) = &self.collinear else { return false };
        for j in 1..pts.len() {
            for i in 0..j {
                if t.collinear(pts[i], pts[j], q) {
                    return true;
                }
            }
        }
        false
    }

    /// Circles through every triple of `pts`, of any squared radius.
    fn circles(&self, pts: &[P2]) -> Vec<(P2, u32)> {
        let mut out = Vec::new();
        for k in 2..pts.len() {
            for j in 1..k {
                for i in 0..j {
                    out.extend(level_circles_through(pts[i], pts[j], pts[k], self.n));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[inline]
fn on_circle(q: P2, circle: &(P2, u32), n: u32) -> bool {
    crate::geometry::norm2(q, circle.0, n) == circle.1
}

/// Every semi-canonical three-point record satisfying the mode, sorted.
pub fn seed_l3(ctx: &Context) -> Vec<PointSetRecord> {
    let n = ctx.n;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &rep in &ctx.table.classes[1..] {
        let base = [(0, 0), rep];
        for x in 0..n {
            for y in 0..n {
                let q = (x, y);
                let (Some(a), Some(b)) = (ctx.table.class(base[0], q), ctx.table.class(base[1], q)) else {
                    continue;
                };
                if a == 0 || b == 0 || ctx.collinear_with(&base, q) {
                    continue;
                }
                let m = DeltaMatrix::from_reading(3, vec![ctx.table.raw(base[0], base[1]), a, b])
                    .expect("three entries");
                if is_semi_canonical(&m) && seen.insert(m.clone()) {
                    out.push(PointSetRecord::new(m, vec![base[0], base[1], q]));
                }
            }
        }
    }
    out.sort_by(|a, b| a.matrix.cmp(&b.matrix));
    out
}

/// New points for `x1` whose distance row to its first `r - 1` points is
/// the last row of `x2` and which are integral to the last point of `x1`.
fn glue_candidates(ctx: &Context, x1: &PointSetRecord, x2: &PointSetRecord) -> Vec<P2> {
    let n = ctx.n;
    let r = x1.matrix.r;
    let pts = &x1.points;
    let row: Vec<u16> = (0..r - 1).map(|i| x2.matrix.get(i, r - 1)).collect();
    let (dx, dy) = ctx.table.classes[row[0] as usize];
    let mut cands = Vec::with_capacity(4);
    for sx in [dx, (n - dx) % n] {
        for sy in [dy, (n - dy) % n] {
            let q = ((pts[0].0 + sx) % n, (pts[0].1 + sy) % n);
            if cands.contains(&q) {
                continue;
            }
            let fits = (1..r - 1).all(|i| ctx.table.raw(pts[i], q) == row[i]);
            let last = ctx.table.raw(pts[r - 1], q);
            if fits && last != NO_CLASS && last != 0 {
                cands.push(q);
            }
        }
    }
    cands
}

fn extended(x1: &PointSetRecord, q: P2, table: &EdgeClassTable) -> DeltaMatrix {
    let r = x1.matrix.r;
    let mut reading = Vec::with_capacity(tri(r + 1));
    reading.extend_from_slice(&x1.matrix.reading);
    reading.extend(x1.points.iter().map(|&p| table.raw(p, q)));
    DeltaMatrix { r: r + 1, reading }
}

/// All `(r+1)`-point records obtained by gluing `x2` onto `x1`.
///
/// Requires `↓x1 = ↓x2` and `x2 ⪯ x1`. Placements that coincide with a point
/// of `x1` are discarded; results are unique by matrix and sorted.
pub fn gamma_glue(ctx: &Context, x1: &PointSetRecord, x2: &PointSetRecord) -> Result<Vec<PointSetRecord>> {
    let r = x1.matrix.r;
    if r < 2 || x2.matrix.r != r {
        return Err(Error::Precondition("records must share an order of at least two".into()));
    }
    if x1.matrix.down() != x2.matrix.down() || x2.matrix > x1.matrix {
        return Err(Error::Precondition("need ↓x1 = ↓x2 and x2 ⪯ x1".into()));
    }
    let mut out: Vec<PointSetRecord> = glue_candidates(ctx, x1, x2)
        .into_iter()
        .map(|q| {
            let mut pts = x1.points.clone();
            pts.push(q);
            PointSetRecord::new(extended(x1, q, &ctx.table), pts)
        })
        .collect();
    out.sort_by(|a, b| a.matrix.cmp(&b.matrix));
    out.dedup_by(|a, b| a.matrix == b.matrix);
    Ok(out)
}

/// Counters collected while building one level.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LevelStats {
    pub order: usize,
    pub records: usize,
    pub canonical: usize,
    /// Largest number of distinct matrices produced by one glue.
    pub max_glue_outputs: usize,
    /// Glues that produced more than two distinct matrices.
    pub glue_over_two: usize,
}

/// Children of the canonical record `group[i]`: every semi-canonical,
/// mode-satisfying glue of `group[i]` with some `group[j]`, `j <= i`.
///
/// `group` must be sorted and share one `↓`. The result is sorted, unique,
/// and is exactly the set of next-level records whose `↓` is `group[i]`.
fn children(ctx: &Context, group: &[PointSetRecord], i: usize) -> (Vec<PointSetRecord>, usize, usize) {
    let x1 = &group[i];
    let circles = match ctx.mode {
        PositionMode::General => ctx.circles(&x1.points),
        _ => Vec::new(),
    };
    let mut out = Vec::new();
    let mut max_outputs = 0;
    let mut over_two = 0;
    for x2 in &group[..=i] {
        let mut kept: Vec<DeltaMatrix> = Vec::new();
        for q in glue_candidates(ctx, x1, x2) {
            if ctx.collinear_with(&x1.points, q) || circles.iter().any(|c| on_circle(q, c, ctx.n)) {
                continue;
            }
            let m = extended(x1, q, &ctx.table);
            if kept.contains(&m) {
                continue;
            }
            kept.push(m.clone());
            if is_semi_canonical(&m) {
                let mut pts = x1.points.clone();
                pts.push(q);
                out.push(PointSetRecord::new(m, pts));
            }
        }
        max_outputs = max_outputs.max(kept.len());
        over_two += (kept.len() > 2) as usize;
    }
    out.sort_unstable_by(|a, b| a.matrix.cmp(&b.matrix));
    out.dedup_by(|a, b| a.matrix == b.matrix);
    (out, max_outputs, over_two)
}

/// Splits a sorted level into runs sharing `↓`.
fn groups(level: &[PointSetRecord]) -> Vec<std::ops::Range<usize>> {
    let Some(first) = level.first() else { return Vec::new() };
    let prefix = tri(first.matrix.r - 1);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=level.len() {
        if i == level.len() || level[i].matrix.reading[..prefix] != level[start].matrix.reading[..prefix] {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Builds `L_{r+1}` from a complete, sorted `L_r`.
pub fn extend_level(ctx: &Context, level: &[PointSetRecord]) -> Result<(Vec<PointSetRecord>, LevelStats)> {
    let Some(first) = level.first() else {
        return Ok((Vec::new(), LevelStats::default()));
    };
    let tasks: Vec<(std::ops::Range<usize>, usize)> = groups(level)
        .into_iter()
        .flat_map(|g| g.clone().filter(|&i| level[i].canonical).map(move |i| (g.clone(), i)))
        .collect();
    let produced: Vec<(Vec<PointSetRecord>, usize, usize)> =
        tasks.par_iter().map(|(g, i)| children(ctx, &level[g.clone()], i - g.start)).collect();
    let mut stats = LevelStats { order: first.matrix.r + 1, ..Default::default() };
    let mut next = Vec::new();
    for (kids, max_outputs, over_two) in produced {
        stats.max_glue_outputs = stats.max_glue_outputs.max(max_outputs);
        stats.glue_over_two += over_two;
        next.extend(kids);
    }
    // children of distinct parents differ in ↓, so concatenation in task
    // order is already sorted and unique
    debug_assert!(next.windows(2).all(|w| w[0].matrix < w[1].matrix));
    stats.records = next.len();
    stats.canonical = next.iter().filter(|x| x.canonical).count();
    Ok((next, stats))
}

/// Result of running the generation to completion.
#[derive(Clone, Debug, Default)]
pub struct OrderlyReport {
    pub n: u32,
    pub mode: PositionMode,
    /// Largest order with a nonempty level.
    pub value: u64,
    /// One record of the largest order, canonical when possible, when that
    /// order is at least 3.
    pub witness: Option<PointSetRecord>,
    /// Per-order totals; `max_glue_outputs` and `glue_over_two` describe the
    /// glues that build the next order.
    pub levels: Vec<LevelStats>,
    pub elapsed: Duration,
}

/// Receives groups of records: all records of one order that share `↓`,
/// sorted. Every record of every level is delivered exactly once.
pub type GroupSink = std::sync::Arc<dyn Fn(&[PointSetRecord]) + Send + Sync>;

/// Options for [`max_cardinality_with`].
#[derive(Clone, Default)]
pub struct OrderlyOptions {
    pub budget: Option<Duration>,
    pub threads: usize,
    pub on_group: Option<GroupSink>,
}

/// `I(n, 2)`, `Ī(n, 2)` or `İ(n, 2)` by orderly generation.
pub fn max_cardinality(n: u32, mode: PositionMode) -> Result<u64> {
    max_cardinality_with(n, mode, &OrderlyOptions::default()).map(|r| r.value)
}

/// Depth-first walk over the generation tree.
///
/// The records of `L_{r+1}` with `↓ = x` are exactly the children of the
/// canonical record `x`, so each group can be expanded on its own and
/// discarded afterwards. The lists visited are the same as level by level.
struct Walk<'a> {
    ctx: &'a Context,
    deadline: Option<Instant>,
    sink: Option<&'a GroupSink>,
    abort: AtomicBool,
    levels: Mutex<Vec<LevelStats>>,
    best: Mutex<Option<PointSetRecord>>,
}

impl Walk<'_> {
    fn visit(&self, group: &[PointSetRecord]) {
        let r = group[0].matrix.r;
        let canonical = group.iter().filter(|x| x.canonical).count();
        {
            let mut levels = self.levels.lock().expect("levels lock");
            while levels.len() <= r - 3 {
                let order = levels.len() + 3;
                levels.push(LevelStats { order, ..Default::default() });
            }
            levels[r - 3].records += group.len();
            levels[r - 3].canonical += canonical;
        }
        {
            let mut best = self.best.lock().expect("best lock");
            let better = match &*best {
                None => true,
                Some(b) => b.matrix.r < r || (b.matrix.r == r && !b.canonical && canonical > 0),
            };
            if better {
                *best = group.iter().find(|x| x.canonical).or(group.first()).cloned();
            }
        }
        if let Some(sink) = self.sink {
            sink(group);
        }
        group.par_iter().enumerate().filter(|(_, x)| x.canonical).for_each(|(i, _)| {
            if self.abort.load(AtomicOrdering::Relaxed) {
                return;
            }
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                self.abort.store(true, AtomicOrdering::Relaxed);
                return;
            }
            let (kids, max_outputs, over_two) = children(self.ctx, group, i);
            {
                let mut levels = self.levels.lock().expect("levels lock");
                let s = &mut levels[r - 3];
                s.max_glue_outputs = s.max_glue_outputs.max(max_outputs);
                s.glue_over_two += over_two;
            }
            if !kids.is_empty() {
                self.visit(&kids);
            }
        });
    }
}

pub fn max_cardinality_with(n: u32, mode: PositionMode, opts: &OrderlyOptions) -> Result<OrderlyReport> {
    let run = || -> Result<OrderlyReport> {
        let start = Instant::now();
        let ctx = Context::new(n, mode)?;
        let mut report = OrderlyReport { n, mode, ..Default::default() };
        if n == 1 {
            report.value = 1;
            return Ok(report);
        }
        report.value = if ctx.table.len() > 1 { 2 } else { 1 };
        let walk = Walk {
            ctx: &ctx,
            deadline: opts.budget.map(|b| start + b),
            sink: opts.on_group.as_ref(),
            abort: AtomicBool::new(false),
            levels: Mutex::new(Vec::new()),
            best: Mutex::new(None),
        };
        let l3 = seed_l3(&ctx);
        for g in groups(&l3) {
            walk.visit(&l3[g]);
        }
        let best = walk.best.into_inner().expect("best lock");
        if let Some(b) = &best {
            report.value = b.matrix.r as u64;
        }
        if walk.abort.load(AtomicOrdering::Relaxed) {
            return Err(Error::Timeout { lower: report.value });
        }
        report.witness = best;
        report.levels = walk.levels.into_inner().expect("levels lock");
        report.elapsed = start.elapsed();
        Ok(report)
    };
    if opts.threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| Error::ResourceLimit(e.to_string()))?
            .install(run)
    }
}

/// Writes a level, one record per line.
pub fn dump_level(level: &[PointSetRecord]) -> String {
    let mut s = String::new();
    for rec in level {
        let _ = writeln!(s, "{}", rec.dump_line());
    }
    s
}
