//! Points of `Z_n^m`, Lee-reduced difference vectors and position predicates.
//!
//! Two points are at integral distance when `sum (u_i - v_i)^2` is a square
//! in `Z_n`. Since `(n - x)^2 = x^2 (mod n)`, the test only depends on the
//! componentwise Lee weights of `u - v`, the [`DeltaVec`].

use crate::error::{Error, Result};
use crate::modring::{self, det_mod, solve_linear, SquareTable, Zn};

/// A point of `Z_n^m`, coordinates in `[0, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    coords: Vec<u32>,
}

impl Point {
    /// Reduces each coordinate modulo `n`.
    pub fn new(coords: &[i64], n: u32) -> Result<Self> {
        let z = Zn::new(n)?;
        Ok(Point {
            coords: coords.iter().map(|&c| z.reduce(c).value()).collect(),
        })
    }

    pub(crate) fn from_reduced(coords: Vec<u32>) -> Self {
        Point { coords }
    }

    pub fn origin(m: usize) -> Self {
        Point { coords: vec![0; m] }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Componentwise Lee weights of a difference `u - v`; entries in `[0, n/2]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeltaVec(pub Vec<u32>);

impl DeltaVec {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }
}

/// `Z_n^m` together with its square table; the context for bulk predicates.
#[derive(Clone, Debug)]
pub struct Space {
    n: u32,
    m: usize,
    squares: SquareTable,
}

impl Space {
    pub fn new(n: u32, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        Ok(Space {
            n,
            m,
            squares: modring::squares(n)?,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn squares(&self) -> &SquareTable {
        &self.squares
    }

    /// `n^m`, or `None` on overflow.
    pub fn size(&self) -> Option<u64> {
        (self.n as u64).checked_pow(self.m as u32)
    }

    /// Row-major index `sum u_i * n^(m-1-i)`.
    pub fn encode(&self, p: &Point) -> u64 {
        p.coords
            .iter()
            .fold(0u64, |acc, &c| acc * self.n as u64 + c as u64)
    }

    pub fn decode(&self, mut index: u64) -> Point {
        let mut coords = vec![0u32; self.m];
        for slot in coords.iter_mut().rev() {
            *slot = (index % self.n as u64) as u32;
            index /= self.n as u64;
        }
        Point { coords }
    }

    fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                actual: p.dim(),
            });
        }
        if p.coords.iter().any(|&c| c >= self.n) {
            return Err(Error::InvalidInput(format!(
                "point {p} has a coordinate outside Z_{}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn delta(&self, u: &Point, v: &Point) -> Result<DeltaVec> {
        self.check(u)?;
        self.check(v)?;
        Ok(DeltaVec(
            u.coords
                .iter()
                .zip(&v.coords)
                .map(|(&a, &b)| lee(a, b, self.n))
                .collect(),
        ))
    }

    pub fn is_integral_delta(&self, d: &DeltaVec) -> bool {
        let q: u64 = d.0.iter().map(|&x| x as u64 * x as u64).sum();
        self.squares.is_square(q)
    }

    pub fn is_integral(&self, u: &Point, v: &Point) -> Result<bool> {
        Ok(self.is_integral_delta(&self.delta(u, v)?))
    }

    /// Integrality of two encoded points, without validation.
    #[inline]
    pub fn is_integral_index(&self, a: u64, b: u64) -> bool {
        let n = self.n as u64;
        let (mut a, mut b) = (a, b);
        let mut q = 0u64;
        for _ in 0..self.m {
            let d = lee((a % n) as u32, (b % n) as u32, self.n) as u64;
            q += d * d;
            a /= n;
            b /= n;
        }
        self.squares.is_square(q)
    }

    /// Sum of squared coordinate differences, reduced mod `n`.
    pub fn squared_distance(&self, u: &Point, v: &Point) -> Result<u32> {
        let d = self.delta(u, v)?;
        Ok((d.0.iter().map(|&x| x as u64 * x as u64).sum::<u64>() % self.n as u64) as u32)
    }

    /// All points of the space, in index order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.size().unwrap_or(0)).map(move |i| self.decode(i))
    }
}

#[inline]
pub(crate) fn lee(a: u32, b: u32, n: u32) -> u32 {
    let d = a.abs_diff(b);
    d.min(n - d)
}

pub fn delta(u: &Point, v: &Point, n: u32) -> Result<DeltaVec> {
    Space::new(n, u.dim().max(1))?.delta(u, v)
}

pub fn is_integral_delta(d: &DeltaVec, n: u32) -> Result<bool> {
    Ok(Space::new(n, d.0.len().max(1))?.is_integral_delta(d))
}

pub fn is_integral(u: &Point, v: &Point, n: u32) -> Result<bool> {
    Space::new(n, u.dim().max(1))?.is_integral(u, v)
}

/// `true` iff every pair of `points` is at integral distance.
pub fn is_integral_set(points: &[Point], n: u32) -> Result<bool> {
    let Some(first) = points.first() else {
        return Ok(true);
    };
    let space = Space::new(n, first.dim())?;
    for (i, u) in points.iter().enumerate() {
        for v in &points[i + 1..] {
            if !space.is_integral(u, v)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Plane predicates (m = 2)
// ---------------------------------------------------------------------------

/// A point of `Z_n^2` as a bare coordinate pair.
pub type P2 = (u32, u32);

fn plane(p: &Point, n: u32) -> Result<P2> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: p.dim(),
        });
    }
    if p.coords.iter().any(|&c| c >= n) {
        return Err(Error::InvalidInput(format!("point {p} is not in Z_{n}^2")));
    }
    Ok((p.coords[0], p.coords[1]))
}

#[inline]
fn sub2(a: P2, b: P2, n: u32) -> P2 {
    ((a.0 + n - b.0) % n, (a.1 + n - b.1) % n)
}

/// `x^2 + y^2 mod n` of the difference `a - b`.
#[inline]
pub(crate) fn norm2(a: P2, b: P2, n: u32) -> u32 {
    let dx = lee(a.0, b.0, n) as u64;
    let dy = lee(a.1, b.1, n) as u64;
    ((dx * dx + dy * dy) % n as u64) as u32
}

/// Whether `{0, q, r}` lies on a cyclic line `{w * t : w in Z_n}` for some `t`.
fn on_common_line(q: P2, r: P2, n: u32) -> bool {
    let n64 = n as u64;
    for t0 in 0..n {
        for t1 in 0..n {
            let (mut hit_q, mut hit_r) = (false, false);
            for w in 0..n64 {
                let p = (
                    (w * t0 as u64 % n64) as u32,
                    (w * t1 as u64 % n64) as u32,
                );
                hit_q |= p == q;
                hit_r |= p == r;
                if hit_q && hit_r {
                    return true;
                }
            }
        }
    }
    false
}

/// Exact collinearity over `Z_n^2`: there are `a, b, t1, t2, w_i` with
/// `(a + w_i t1, b + w_i t2) = p_i`. Triples with repeated points are collinear.
///
/// This direct form costs `O(n^3)`; use [`CollinearTable`] for bulk queries.
pub fn is_collinear(p1: &Point, p2: &Point, p3: &Point, n: u32) -> Result<bool> {
    Zn::new(n)?;
    let (a, b, c) = (plane(p1, n)?, plane(p2, n)?, plane(p3, n)?);
    Ok(on_common_line(sub2(b, a, n), sub2(c, a, n), n))
}

/// Vanishing of the 3x3 determinant with rows `(u_i, v_i, 1)` modulo `n`.
/// Equivalent to collinearity for prime `n`, only necessary otherwise.
pub fn collinear_det(p1: &Point, p2: &Point, p3: &Point, n: u32) -> Result<bool> {
    Zn::new(n)?;
    let rows: Vec<Vec<i64>> = [p1, p2, p3]
        .into_iter()
        .map(|p| plane(p, n).map(|(x, y)| vec![x as i64, y as i64, 1]))
        .collect::<Result<_>>()?;
    Ok(det_mod(&rows, n).value() == 0)
}

/// Precomputed exact collinearity for one modulus.
///
/// Bit `(q, r)` is set iff `{0, q, r}` is collinear; translation invariance
/// then answers any triple. Memory is `n^4` bits.
#[derive(Clone, Debug)]
pub struct CollinearTable {
    n: u32,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl CollinearTable {
    pub fn new(n: u32) -> Result<Self> {
        Zn::new(n)?;
        let size = (n as usize) * (n as usize);
        let words_per_row = size.div_ceil(64);
        let mut bits = vec![0u64; size * words_per_row];
        let mut seen_lines = std::collections::HashSet::new();
        let mut line = Vec::with_capacity(n as usize);
        for t0 in 0..n {
            for t1 in 0..n {
                line.clear();
                for w in 0..n as u64 {
                    let x = (w * t0 as u64 % n as u64) as usize;
                    let y = (w * t1 as u64 % n as u64) as usize;
                    line.push(x * n as usize + y);
                }
                line.sort_unstable();
                line.dedup();
                if !seen_lines.insert(line.clone()) {
                    continue;
                }
                for &q in &line {
                    let row = &mut bits[q * words_per_row..(q + 1) * words_per_row];
                    for &r in &line {
                        row[r / 64] |= 1 << (r % 64);
                    }
                }
            }
        }
        Ok(CollinearTable {
            n,
            words_per_row,
            bits,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    #[inline]
    fn through_origin(&self, q: P2, r: P2) -> bool {
        let qi = (q.0 * self.n + q.1) as usize;
        let ri = (r.0 * self.n + r.1) as usize;
        self.bits[qi * self.words_per_row + ri / 64] >> (ri % 64) & 1 == 1
    }

    #[inline]
    pub fn collinear(&self, a: P2, b: P2, c: P2) -> bool {
        self.through_origin(sub2(b, a, self.n), sub2(c, a, self.n))
    }

    pub fn is_collinear(&self, p1: &Point, p2: &Point, p3: &Point) -> Result<bool> {
        let n = self.n;
        Ok(self.collinear(plane(p1, n)?, plane(p2, n)?, plane(p3, n)?))
    }
}

/// Centers `c` and values `s` with `|p_i - c|^2 = s` for all three points,
/// with no condition on `s`.
pub(crate) fn level_circles_through(a: P2, b: P2, c: P2, n: u32) -> Vec<(P2, u32)> {
    centers_equidistant(a, b, n)
        .into_iter()
        .filter(|&(center, s)| norm2(c, center, n) == s)
        .collect()
}

/// Like [`level_circles_through`] but `s = r^2` for some nonzero `r`.
pub(crate) fn circles_through(a: P2, b: P2, c: P2, n: u32, squares: &SquareTable) -> Vec<(P2, u32)> {
    let mut out = level_circles_through(a, b, c, n);
    out.retain(|&(_, s)| squares.is_nonzero_square(s as u64));
    out
}

/// All `(center, |a - center|^2)` with `|a - center|^2 = |b - center|^2`.
///
/// Expanding the equality gives the linear congruence
/// `2x(bx - ax) + 2y(by - ay) = (bx^2 + by^2) - (ax^2 + ay^2)`; for each `x`
/// the admissible `y` are the solutions of a one-variable congruence.
fn centers_equidistant(a: P2, b: P2, n: u32) -> Vec<(P2, u32)> {
    let n64 = n as u64;
    let sq = |v: u32| v as u64 * v as u64 % n64;
    let k = (sq(b.0) + sq(b.1) + 2 * n64 - sq(a.0) - sq(a.1)) % n64;
    let cx = 2 * ((b.0 + n - a.0) % n) as u64 % n64;
    let cy = (2 * ((b.1 + n - a.1) % n) as u64 % n64) as u32;
    let mut out = Vec::new();
    for x in 0..n {
        let rhs = ((k + n64 - cx * x as u64 % n64) % n64) as u32;
        for y in solve_linear(cy, rhs, n) {
            let center = (x, y);
            out.push((center, norm2(a, center, n)));
        }
    }
    out
}

fn distinct4(ps: &[P2; 4]) -> Result<()> {
    for i in 0..4 {
        for j in i + 1..4 {
            if ps[i] == ps[j] {
                return Err(Error::InvalidInput(
                    "four points on a circle must be pairwise distinct".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Exact concyclicity: a center `(a, b)` and a nonzero `r` with
/// `(x_i - a)^2 + (y_i - b)^2 = r^2` for all four points.
pub fn is_concyclic(points: [&Point; 4], n: u32) -> Result<bool> {
    let squares = modring::squares(n)?;
    let ps = [
        plane(points[0], n)?,
        plane(points[1], n)?,
        plane(points[2], n)?,
        plane(points[3], n)?,
    ];
    distinct4(&ps)?;
    Ok(circles_through(ps[0], ps[1], ps[2], n, &squares)
        .into_iter()
        .any(|(c, s)| norm2(ps[3], c, n) == s))
}

/// The four points have a common center: `(x_i - a)^2 + (y_i - b)^2` takes
/// the same value for all of them, whatever that value is. Weaker than
/// [`is_concyclic`] only when the common value is not a nonzero square; this
/// is the circle notion the general-position counts are computed with.
pub fn is_concentric_quadruple(points: [&Point; 4], n: u32) -> Result<bool> {
    let ps = [
        plane(points[0], n)?,
        plane(points[1], n)?,
        plane(points[2], n)?,
        plane(points[3], n)?,
    ];
    distinct4(&ps)?;
    Ok(level_circles_through(ps[0], ps[1], ps[2], n)
        .into_iter()
        .any(|(c, s)| norm2(ps[3], c, n) == s))
}

/// Vanishing of the 4x4 determinant with rows `(x^2 + y^2, x, y, 1)`.
/// Necessary for concyclicity, not sufficient in general.
pub fn concyclic_det(points: [&Point; 4], n: u32) -> Result<bool> {
    Zn::new(n)?;
    let rows: Vec<Vec<i64>> = points
        .into_iter()
        .map(|p| {
            plane(p, n).map(|(x, y)| {
                let (x, y) = (x as i64, y as i64);
                vec![x * x + y * y, x, y, 1]
            })
        })
        .collect::<Result<_>>()?;
    Ok(det_mod(&rows, n).value() == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[i64], n: u32) -> Point {
        Point::new(c, n).unwrap()
    }

    /// The collinearity definition verbatim: search all a, b, t1, t2, w_i.
    fn collinear_bruteforce(ps: [P2; 3], n: u32) -> bool {
        for a in 0..n {
            for b in 0..n {
                for t1 in 0..n {
                    for t2 in 0..n {
                        let fits = |p: P2| (0..n).any(|w| ((a + w * t1) % n, (b + w * t2) % n) == p);
                        if ps.iter().all(|&p| fits(p)) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&pt(&[1, 6], 7), &pt(&[5, 2], 7), 7).unwrap(), DeltaVec(vec![3, 3]));
        let u = pt(&[3, 4, 5], 9);
        assert!(delta(&u, &u, 9).unwrap().is_zero());
        assert_eq!(delta(&pt(&[0, 0], 12), &pt(&[7, 5], 12), 12).unwrap(), DeltaVec(vec![5, 5]));
        assert!(matches!(
            delta(&pt(&[0, 0], 5), &pt(&[0, 0, 0], 5), 5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn integral_examples() {
        assert!(!is_integral_delta(&DeltaVec(vec![1, 1]), 3).unwrap());
        assert!(is_integral_delta(&DeltaVec(vec![0, 0, 0]), 11).unwrap());
        // omega(13) = 5: 1 + 25 = 26 = 0
        assert!(is_integral(&pt(&[0, 0], 13), &pt(&[1, 5], 13), 13).unwrap());
        assert!(!is_integral(&pt(&[0, 0], 3), &pt(&[1, 1], 3), 3).unwrap());
        let u = pt(&[2, 1], 3);
        assert!(is_integral(&u, &u, 3).unwrap());
    }

    #[test]
    fn integral_mod4_recomputed() {
        // squares mod 4 by brute force
        let sq: Vec<u32> = (0..4).map(|x| x * x % 4).collect();
        let check = |dx: u32, dy: u32| sq.contains(&((dx * dx + dy * dy) % 4));
        assert_eq!(is_integral(&pt(&[0, 0], 4), &pt(&[1, 2], 4), 4).unwrap(), check(1, 2));
        assert_eq!(is_integral(&pt(&[0, 0], 4), &pt(&[2, 2], 4), 4).unwrap(), check(2, 2));
        assert!(check(1, 2) && check(2, 2));
    }

    #[test]
    fn integrality_symmetric_and_translation_invariant() {
        for n in 1..=7u32 {
            for m in 1..=2usize {
                let s = Space::new(n, m).unwrap();
                let pts: Vec<Point> = s.points().collect();
                for u in &pts {
                    for v in &pts {
                        let base = s.is_integral(u, v).unwrap();
                        assert_eq!(base, s.is_integral(v, u).unwrap());
                        for t in &pts {
                            let shift = |p: &Point| {
                                Point::from_reduced(p.coords().iter().zip(t.coords()).map(|(a, b)| (a + b) % n).collect())
                            };
                            assert_eq!(base, s.is_integral(&shift(u), &shift(v)).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lee_reduction_preserves_sum_of_squares() {
        for n in 1..=30u32 {
            let s = Space::new(n, 2).unwrap();
            for u in s.points() {
                let v = Point::from_reduced(vec![(u.coords()[1] * 3) % n, (u.coords()[0] + 5) % n]);
                let d = s.delta(&u, &v).unwrap();
                let lhs: i64 = d.0.iter().map(|&x| (x as i64) * (x as i64)).sum();
                let rhs: i64 = u.coords().iter().zip(v.coords()).map(|(&a, &b)| (a as i64 - b as i64).pow(2)).sum();
                assert_eq!(lhs.rem_euclid(n as i64), rhs.rem_euclid(n as i64));
            }
        }
    }

    #[test]
    fn encode_decode_row_major() {
        let s = Space::new(5, 3).unwrap();
        let p = pt(&[1, 2, 3], 5);
        assert_eq!(s.encode(&p), 25 + 2 * 5 + 3);
        for i in 0..125 {
            assert_eq!(s.encode(&s.decode(i)), i);
        }
    }

    #[test]
    fn collinear_examples() {
        let z8 = [pt(&[0, 0], 8), pt(&[2, 4], 8), pt(&[4, 4], 8)];
        assert!(!is_collinear(&z8[0], &z8[1], &z8[2], 8).unwrap());
        assert!(collinear_det(&z8[0], &z8[1], &z8[2], 8).unwrap());
        for n in 3..=9 {
            assert!(is_collinear(&pt(&[0, 0], n), &pt(&[1, 1], n), &pt(&[2, 2], n), n).unwrap());
        }
        let z7 = [pt(&[0, 0], 7), pt(&[1, 2], 7), pt(&[2, 4], 7)];
        assert!(collinear_bruteforce([(0, 0), (1, 2), (2, 4)], 7));
        assert!(is_collinear(&z7[0], &z7[1], &z7[2], 7).unwrap());
        assert!(collinear_det(&z7[0], &z7[1], &z7[2], 7).unwrap());
        assert!(!collinear_det(&pt(&[0, 0], 5), &pt(&[1, 0], 5), &pt(&[0, 1], 5), 5).unwrap());
        assert!(matches!(
            is_collinear(&pt(&[0, 0, 0], 5), &pt(&[1, 0], 5), &pt(&[0, 1], 5), 5),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn z8_counterexample_against_definition() {
        assert!(!collinear_bruteforce([(0, 0), (2, 4), (4, 4)], 8));
    }

    #[test]
    fn table_matches_definition_small_n() {
        for n in 1..=4u32 {
            let t = CollinearTable::new(n).unwrap();
            let pts: Vec<P2> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
            for &a in &pts {
                for &b in &pts {
                    for &c in &pts {
                        assert_eq!(t.collinear(a, b, c), collinear_bruteforce([a, b, c], n), "n={n} {a:?} {b:?} {c:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn table_matches_direct_scan() {
        for n in [5u32, 6, 8, 9] {
            let t = CollinearTable::new(n).unwrap();
            let pts: Vec<P2> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
            for &q in &pts {
                for &r in &pts {
                    assert_eq!(t.collinear((0, 0), q, r), on_common_line(q, r, n));
                }
            }
        }
    }

    #[test]
    fn collinear_matches_det_for_primes() {
        for n in [2u32, 3, 5, 7, 11, 13] {
            let t = CollinearTable::new(n).unwrap();
            let pts: Vec<Point> = Space::new(n, 2).unwrap().points().collect();
            for a in &pts {
                for b in &pts {
                    for c in &pts {
                        assert_eq!(t.is_collinear(a, b, c).unwrap(), collinear_det(a, b, c, n).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn collinear_permutation_and_translation_invariant() {
        for n in 1..=8u32 {
            let t = CollinearTable::new(n).unwrap();
            let pts: Vec<P2> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
            let shift = |p: P2, s: P2| ((p.0 + s.0) % n, (p.1 + s.1) % n);
            for &b in &pts {
                for &c in &pts {
                    let a = (0, 0);
                    let base = t.collinear(a, b, c);
                    for (x, y, z) in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        assert_eq!(base, t.collinear(x, y, z));
                    }
                    for s in [(1, 0), (0, 1), (n / 2, n - 1)] {
                        assert_eq!(base, t.collinear(shift(a, s), shift(b, s), shift(c, s)));
                    }
                }
            }
        }
    }

    /// Center scan straight from the definition.
    fn concyclic_bruteforce(ps: [P2; 4], n: u32) -> bool {
        for a in 0..n {
            for b in 0..n {
                for r in 1..n {
                    let r2 = r * r % n;
                    if ps.iter().all(|&p| norm2(p, (a, b), n) == r2) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn concyclic_examples() {
        let c5 = [pt(&[1, 0], 5), pt(&[4, 0], 5), pt(&[0, 1], 5), pt(&[0, 4], 5)];
        let refs = [&c5[0], &c5[1], &c5[2], &c5[3]];
        assert!(is_concyclic(refs, 5).unwrap());
        assert!(concyclic_det(refs, 5).unwrap());
        let dup = [&c5[0], &c5[0], &c5[2], &c5[3]];
        assert!(matches!(is_concyclic(dup, 5), Err(Error::InvalidInput(_))));
        let sq7 = [pt(&[0, 0], 7), pt(&[1, 0], 7), pt(&[0, 1], 7), pt(&[1, 1], 7)];
        let expect = concyclic_bruteforce([(0, 0), (1, 0), (0, 1), (1, 1)], 7);
        assert_eq!(is_concyclic([&sq7[0], &sq7[1], &sq7[2], &sq7[3]], 7).unwrap(), expect);
        // center (4, 4) = (1/2, 1/2), r^2 = 1/2 = 4 = 2^2
        assert!(expect);
    }

    #[test]
    fn concentric_allows_zero_and_nonsquare_values() {
        // common value 0 around (10, 11); no nonzero r has r^2 = 0 mod 13
        let q = [pt(&[0, 0], 13), pt(&[6, 5], 13), pt(&[7, 0], 13), pt(&[9, 6], 13)];
        let refs = [&q[0], &q[1], &q[2], &q[3]];
        assert!(is_concentric_quadruple(refs, 13).unwrap());
        assert!(!is_concyclic(refs, 13).unwrap());
        for n in 1..=6u32 {
            for q in quadruples(n) {
                let ps = as_points(q, n);
                let refs = [&ps[0], &ps[1], &ps[2], &ps[3]];
                let any = (0..n * n).any(|c| {
                    let c = (c / n, c % n);
                    q.iter().all(|&p| norm2(p, c, n) == norm2(q[0], c, n))
                });
                assert_eq!(is_concentric_quadruple(refs, n).unwrap(), any);
                if is_concyclic(refs, n).unwrap() {
                    assert!(any);
                }
            }
        }
    }

    fn quadruples(n: u32) -> impl Iterator<Item = [P2; 4]> {
        let pts: Vec<P2> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        let k = pts.len();
        let mut out = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    for m in l + 1..k {
                        out.push([pts[i], pts[j], pts[l], pts[m]]);
                    }
                }
            }
        }
        out.into_iter()
    }

    fn as_points(q: [P2; 4], n: u32) -> [Point; 4] {
        q.map(|(x, y)| pt(&[x as i64, y as i64], n))
    }

    #[test]
    fn concyclic_matches_bruteforce_and_implies_det() {
        for n in 1..=6u32 {
            for q in quadruples(n) {
                let ps = as_points(q, n);
                let refs = [&ps[0], &ps[1], &ps[2], &ps[3]];
                let exact = is_concyclic(refs, n).unwrap();
                assert_eq!(exact, concyclic_bruteforce(q, n), "n={n} {q:?}");
                if exact {
                    assert!(concyclic_det(refs, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn concyclic_implies_det_n7_n8() {
        for n in [7u32, 8] {
            for q in quadruples(n).step_by(3) {
                let ps = as_points(q, n);
                let refs = [&ps[0], &ps[1], &ps[2], &ps[3]];
                if is_concyclic(refs, n).unwrap() {
                    assert!(concyclic_det(refs, n).unwrap(), "n={n} {q:?}");
                }
            }
        }
    }

    #[test]
    fn z8_det_without_circle_fixture() {
        // found by exhaustive scan over Z_8^2, first in lexicographic order
        let q = quadruples(8)
            .find(|&q| {
                let ps = as_points(q, 8);
                let refs = [&ps[0], &ps[1], &ps[2], &ps[3]];
                concyclic_det(refs, 8).unwrap() && !is_concyclic(refs, 8).unwrap()
            })
            .expect("a determinant-only quadruple exists over Z_8");
        assert_eq!(q, [(0, 0), (0, 1), (0, 2), (0, 3)]);
        assert!(!concyclic_bruteforce(q, 8));
    }
}
