//! Distance-only geometry over `Z_p`: triangle realisation, the
//! characteristic of a simplex, Cayley-Menger and sphere determinants.
//!
//! Distances are residues; only their squares enter the determinants.
//! The bordered Cayley-Menger determinant is reported with the sign
//! `(-1)^t` for `t` points, so that three points give exactly Heron's
//! product `(a+b+c)(a+b-c)(a-b+c)(-a+b+c)`.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::modring::{self, det_mod, squares, Residue, Zn};

/// Symmetric matrix of pairwise distances with zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistMatrix {
    n: u32,
    d: Vec<Vec<u32>>,
}

impl DistMatrix {
    pub fn new(rows: &[Vec<i64>], n: u32) -> Result<Self> {
        let z = Zn::new(n)?;
        let t = rows.len();
        let mut d = vec![vec![0u32; t]; t];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != t {
                return Err(Error::DimensionMismatch { expected: t, actual: row.len() });
            }
            for (j, &x) in row.iter().enumerate() {
                d[i][j] = z.reduce(x).value();
            }
        }
        for i in 0..t {
            if d[i][i] != 0 {
                return Err(Error::InvalidInput(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..i {
                if d[i][j] != d[j][i] {
                    return Err(Error::InvalidInput(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(DistMatrix { n, d })
    }

    /// Distances of a point set whose squared distances are all squares;
    /// each distance is the smallest square root.
    pub fn from_points(points: &[Point], n: u32) -> Result<Self> {
        let sq = squares(n)?;
        let t = points.len();
        let mut rows = vec![vec![0i64; t]; t];
        for i in 0..t {
            for j in 0..i {
                let s = crate::geometry::delta(&points[i], &points[j], n)?
                    .0
                    .iter()
                    .map(|&x| x as u64 * x as u64)
                    .sum::<u64>()
                    % n as u64;
                if !sq.is_square(s) {
                    return Err(Error::InvalidInput(format!(
                        "points {i} and {j} are not at integral distance"
                    )));
                }
                let root = (0..n as u64).find(|&r| r * r % n as u64 == s).expect("square has a root");
                rows[i][j] = root as i64;
                rows[j][i] = root as i64;
            }
        }
        DistMatrix::new(&rows, n)
    }

    pub fn modulus(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.d.len()
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.d[i][j]
    }

    /// Principal submatrix on `idx`.
    pub fn select(&self, idx: &[usize]) -> DistMatrix {
        DistMatrix {
            n: self.n,
            d: idx.iter().map(|&i| idx.iter().map(|&j| self.d[i][j]).collect()).collect(),
        }
    }

    fn squared(&self, i: usize, j: usize) -> i64 {
        let x = self.d[i][j] as i64;
        x * x % self.n as i64
    }
}

/// Either `1` or the least non-residue `alpha(p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Characteristic(u32);

impl Characteristic {
    pub fn value(self) -> u32 {
        self.0
    }

    /// Characteristic of a nonzero volume value `v` over `Z_p`.
    pub fn classify(v: Residue, p: u32) -> Result<Self> {
        if v.value() == 0 {
            return Err(Error::Degenerate("volume vanishes".into()));
        }
        let sq = squares(p)?;
        if sq.is_nonzero_square(v.value() as u64) {
            Ok(Characteristic(1))
        } else {
            Ok(Characteristic(modring::alpha(p)?.value()))
        }
    }
}

fn require_odd_prime(p: u32) -> Result<()> {
    if p % 2 == 0 || !modring::is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// `(a+b+c)(a+b-c)(a-b+c)(-a+b+c) mod n`.
pub fn heron_v2(a: i64, b: i64, c: i64, n: u32) -> Result<Residue> {
    let z = Zn::new(n)?;
    let f = [a + b + c, a + b - c, a - b + c, -a + b + c];
    Ok(f.iter().fold(z.residue(1), |acc, &x| z.mul(acc, z.reduce(x))))
}

/// Characteristic of a triangle with sides `a, b, c` over `Z_p`.
pub fn triangle_char(a: i64, b: i64, c: i64, p: u32) -> Result<Characteristic> {
    require_odd_prime(p)?;
    let z = Zn::new(p)?;
    if [a, b, c].iter().any(|&x| z.reduce(x).value() == 0) {
        return Err(Error::InvalidInput("zero side length".into()));
    }
    Characteristic::classify(heron_v2(a, b, c, p)?, p)
}

/// `rational + radical * sqrt(c)` over `Z_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadExt {
    pub rational: u32,
    pub radical: u32,
    pub c: u32,
    pub p: u32,
}

impl QuadExt {
    pub fn new(rational: u32, radical: u32, c: u32, p: u32) -> Self {
        QuadExt {
            rational: rational % p,
            radical: radical % p,
            c: c % p,
            p,
        }
    }

    pub fn add(self, o: QuadExt) -> QuadExt {
        QuadExt::new(self.rational + o.rational, self.radical + o.radical, self.c, self.p)
    }

    pub fn sub(self, o: QuadExt) -> QuadExt {
        QuadExt::new(
            self.rational + self.p - o.rational,
            self.radical + self.p - o.radical,
            self.c,
            self.p,
        )
    }

    /// `(a + b sqrt c)(a' + b' sqrt c) = (aa' + bb'c) + (ab' + a'b) sqrt c`.
    pub fn mul(self, o: QuadExt) -> QuadExt {
        let p = self.p as u64;
        let (a, b, x, y, c) = (
            self.rational as u64,
            self.radical as u64,
            o.rational as u64,
            o.radical as u64,
            self.c as u64,
        );
        QuadExt::new(
            ((a * x + b * y % p * c) % p) as u32,
            ((a * y + x * b) % p) as u32,
            self.c,
            self.p,
        )
    }
}

/// Coordinates `(0,0)`, `(a,0)`, `(x3, y3 sqrt(char))` of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriangleRealization {
    pub p: u32,
    pub a: u32,
    pub x3: u32,
    /// Coefficient of `sqrt(characteristic)`.
    pub y3: u32,
    pub characteristic: Characteristic,
}

impl TriangleRealization {
    /// The three vertices in extension arithmetic.
    pub fn vertices(&self) -> [(QuadExt, QuadExt); 3] {
        let c = self.characteristic.value();
        let q = |r, s| QuadExt::new(r, s, c, self.p);
        [(q(0, 0), q(0, 0)), (q(self.a, 0), q(0, 0)), (q(self.x3, 0), q(0, self.y3))]
    }

    /// Squared distance between two vertices, in extension arithmetic.
    pub fn squared_distance(&self, i: usize, j: usize) -> QuadExt {
        let v = self.vertices();
        let dx = v[i].0.sub(v[j].0);
        let dy = v[i].1.sub(v[j].1);
        dx.mul(dx).add(dy.mul(dy))
    }
}

/// Places a triangle with sides `a = |v1 v2|`, `b = |v1 v3|`, `c = |v2 v3|`.
pub fn realize_triangle(a: i64, b: i64, c: i64, p: u32) -> Result<TriangleRealization> {
    let ch = triangle_char(a, b, c, p)?;
    let z = Zn::new(p)?;
    let (ra, rb, rc) = (z.reduce(a), z.reduce(b), z.reduce(c));
    let two_a = z.mul(z.residue(2), ra);
    let inv = z.inverse(two_a).expect("2a is a unit for odd p and a != 0");
    let num = z.add(z.sub(z.square(rb), z.square(rc)), z.square(ra));
    let x3 = z.mul(num, inv);
    // y3^2 char = V^2 / (2a)^2
    let v2 = heron_v2(a, b, c, p)?;
    let target = z.mul(v2, z.square(inv));
    let inv_char = z.inverse(z.residue(ch.value())).expect("characteristic is a unit");
    let y_sq = z.mul(target, inv_char);
    let y3 = modring::sqrt_mod(y_sq, p)
        .ok_or_else(|| Error::Degenerate("no square root for the height".into()))?;
    Ok(TriangleRealization {
        p,
        a: ra.value(),
        x3: x3.value(),
        y3: y3.value(),
        characteristic: ch,
    })
}

/// `(-1)^t` times the bordered determinant of squared distances of `t` points.
pub fn cayley_menger(d: &DistMatrix) -> Residue {
    let t = d.order();
    let n = d.modulus();
    let mut m = vec![vec![1i64; t + 1]; t + 1];
    for i in 0..t {
        for j in 0..t {
            m[i][j] = d.squared(i, j);
        }
    }
    m[t][t] = 0;
    let det = det_mod(&m, n);
    if t % 2 == 1 {
        Zn::new(n).expect("valid modulus").neg(det)
    } else {
        det
    }
}

/// Plain determinant of the squared-distance matrix; vanishes for points on
/// a common sphere when the order is `m + 2`.
pub fn sphere_det(d: &DistMatrix) -> Residue {
    let t = d.order();
    let m: Vec<Vec<i64>> = (0..t).map(|i| (0..t).map(|j| d.squared(i, j)).collect()).collect();
    det_mod(&m, d.modulus())
}

/// `(x+y+z)(x+y-z)(x-y+z)(-x+y+z)` with `x = d12 d34`, `y = d13 d24`,
/// `z = d14 d23`, for distances ordered `[d12, d13, d14, d23, d24, d34]`.
/// The squared-distance determinant of the four points is its negative.
pub fn ptolemy_product(d: [i64; 6], n: u32) -> Result<Residue> {
    let zn = Zn::new(n)?;
    let r = |v: i64| zn.reduce(v);
    let [d12, d13, d14, d23, d24, d34] = d.map(r);
    let (x, y, z) = (zn.mul(d12, d34), zn.mul(d13, d24), zn.mul(d14, d23));
    let f1 = zn.add(zn.add(x, y), z);
    let f2 = zn.sub(zn.add(x, y), z);
    let f3 = zn.add(zn.sub(x, y), z);
    let f4 = zn.add(zn.sub(y, x), z);
    Ok(zn.mul(zn.mul(f1, f2), zn.mul(f3, f4)))
}

/// Characteristic of an `m`-simplex given by its `m + 1` points' distances.
pub fn simplex_char(d: &DistMatrix, p: u32) -> Result<Characteristic> {
    require_odd_prime(p)?;
    if d.modulus() != p {
        return Err(Error::InvalidInput(format!("distances are mod {}, not {p}", d.modulus())));
    }
    Characteristic::classify(cayley_menger(d), p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Consistency {
    pub consistent: bool,
    /// Characteristic of the first non-degenerate simplex.
    pub characteristic: Characteristic,
}

/// Whether every non-degenerate `(m+1)`-subset has the same characteristic.
pub fn char_consistent(d: &DistMatrix, m: usize, p: u32) -> Result<Consistency> {
    require_odd_prime(p)?;
    let mut first: Option<Characteristic> = None;
    let mut consistent = true;
    for idx in (0..d.order()).combinations(m + 1) {
        match simplex_char(&d.select(&idx), p) {
            Ok(c) => match first {
                None => first = Some(c),
                Some(f) if f != c => consistent = false,
                _ => {}
            },
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(e),
        }
    }
    first
        .map(|characteristic| Consistency {
            consistent,
            characteristic,
        })
        .ok_or_else(|| Error::Degenerate("no non-degenerate simplex".into()))
}

/// Distance-only integral point set over `E_n^m`: nonzero distances, all
/// `(m+2)`- and `(m+3)`-point Cayley-Menger values zero, and some
/// `(m+1)`-point value nonzero. Subset sizes beyond the order are vacuous.
pub fn is_valid_abstract(d: &DistMatrix, m: usize) -> Result<bool> {
    let r = d.order();
    if r < m + 1 {
        return Err(Error::InvalidInput(format!("need at least {} points, got {r}", m + 1)));
    }
    for i in 0..r {
        for j in 0..i {
            if d.get(i, j) == 0 {
                return Ok(false);
            }
        }
    }
    for t in [m + 2, m + 3] {
        for idx in (0..r).combinations(t) {
            if cayley_menger(&d.select(&idx)).value() != 0 {
                return Ok(false);
            }
        }
    }
    Ok((0..r)
        .combinations(m + 1)
        .any(|idx| cayley_menger(&d.select(&idx)).value() != 0))
}

/// Every pair satisfies `sum (x_i - y_i)^2 = d^2` for some `d` in `Z_n`,
/// checked by scanning `d`.
pub fn ring_integral_check(points: &[Point], n: u32) -> Result<bool> {
    Zn::new(n)?;
    let n64 = n as u64;
    for (i, x) in points.iter().enumerate() {
        for y in &points[..i] {
            if x.dim() != y.dim() {
                return Err(Error::DimensionMismatch { expected: x.dim(), actual: y.dim() });
            }
            let s = x
                .coords()
                .iter()
                .zip(y.coords())
                .map(|(&a, &b)| {
                    let d = (a as u64 + n64 - b as u64) % n64;
                    d * d % n64
                })
                .sum::<u64>()
                % n64;
            if !(0..n64).any(|d| d * d % n64 == s) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
