//! Arithmetic in `Z_n` and the number-theoretic helpers built on it.
//!
//! Moduli are bounded by [`MAX_MODULUS`], so every product of two residues
//! fits in a `u64` and no wide arithmetic is needed. `Z_1` (the zero ring) is
//! a legal modulus everywhere.

use crate::error::{Error, Result};

/// Largest supported modulus.
pub const MAX_MODULUS: u32 = 1 << 16;

/// An element of `Z_n`. The modulus is carried by context ([`Zn`]).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Residue(u32);

impl Residue {
    /// Canonical representative in `[0, n)`.
    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The ring `Z_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Zn {
    n: u32,
}

impl Zn {
    pub fn new(n: u32) -> Result<Self> {
        check_modulus(n)?;
        Ok(Zn { n })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.n
    }

    /// The canonical map `Z -> Z_n`.
    #[inline]
    pub fn reduce(self, x: i64) -> Residue {
        Residue(x.rem_euclid(self.n as i64) as u32)
    }

    /// The inverse map `Z_n -> {0, .., n-1}`.
    #[inline]
    pub fn lift(self, r: Residue) -> u32 {
        debug_assert!(r.0 < self.n);
        r.0
    }

    /// Builds a residue from a value already known to be in range.
    #[inline]
    pub fn residue(self, value: u32) -> Residue {
        Residue(value % self.n)
    }

    #[inline]
    pub fn add(self, a: Residue, b: Residue) -> Residue {
        Residue(((a.0 as u64 + b.0 as u64) % self.n as u64) as u32)
    }

    #[inline]
    pub fn sub(self, a: Residue, b: Residue) -> Residue {
        Residue(((a.0 as u64 + self.n as u64 - b.0 as u64) % self.n as u64) as u32)
    }

    #[inline]
    pub fn neg(self, a: Residue) -> Residue {
        Residue((self.n - a.0) % self.n)
    }

    #[inline]
    pub fn mul(self, a: Residue, b: Residue) -> Residue {
        Residue(((a.0 as u64 * b.0 as u64) % self.n as u64) as u32)
    }

    #[inline]
    pub fn square(self, a: Residue) -> Residue {
        self.mul(a, a)
    }

    /// `min(r, n - r)`: circular distance of `r` to zero.
    #[inline]
    pub fn lee_weight(self, r: Residue) -> u32 {
        r.0.min(self.n - r.0)
    }

    /// Multiplicative inverse, if `a` is a unit.
    pub fn inverse(self, a: Residue) -> Option<Residue> {
        let (g, x, _) = ext_gcd(a.0 as i64, self.n as i64);
        (g == 1).then(|| self.reduce(x))
    }

    pub fn elements(self) -> impl Iterator<Item = Residue> {
        (0..self.n).map(Residue)
    }
}

fn check_modulus(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("modulus must be at least 1".into()));
    }
    if n > MAX_MODULUS {
        return Err(Error::InvalidInput(format!(
            "modulus {n} exceeds the supported maximum {MAX_MODULUS}"
        )));
    }
    Ok(())
}

pub fn reduce(x: i64, n: u32) -> Result<Residue> {
    Ok(Zn::new(n)?.reduce(x))
}

#[inline]
pub fn lift(r: Residue) -> u32 {
    r.0
}

#[inline]
pub fn lee_weight(r: Residue, n: u32) -> u32 {
    let v = r.0 % n.max(1);
    v.min(n - v)
}

/// Membership tables for the squares of `Z_n`.
#[derive(Clone, Debug)]
pub struct SquareTable {
    n: u32,
    squares: Vec<bool>,
    nonzero_squares: Vec<bool>,
}

impl SquareTable {
    pub fn modulus(&self) -> u32 {
        self.n
    }

    /// `x` is `y^2` for some `y` in `Z_n`. Accepts unreduced input.
    #[inline]
    pub fn is_square(&self, x: u64) -> bool {
        self.squares[(x % self.n as u64) as usize]
    }

    /// `x` is `y^2` for some nonzero `y`.
    #[inline]
    pub fn is_nonzero_square(&self, x: u64) -> bool {
        self.nonzero_squares[(x % self.n as u64) as usize]
    }

    pub fn squares(&self) -> Vec<u32> {
        collect_set(&self.squares)
    }

    pub fn nonzero_squares(&self) -> Vec<u32> {
        collect_set(&self.nonzero_squares)
    }
}

fn collect_set(flags: &[bool]) -> Vec<u32> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(i, &f)| f.then_some(i as u32))
        .collect()
}

pub fn squares(n: u32) -> Result<SquareTable> {
    check_modulus(n)?;
    let mut squares = vec![false; n as usize];
    let mut nonzero_squares = vec![false; n as usize];
    for x in 0..n as u64 {
        let s = (x * x % n as u64) as usize;
        squares[s] = true;
        if x != 0 {
            nonzero_squares[s] = true;
        }
    }
    Ok(SquareTable {
        n,
        squares,
        nonzero_squares,
    })
}

/// Prime factorization as `(p, r)` pairs with strictly increasing primes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Factorization(Vec<(u32, u32)>);

impl Factorization {
    pub fn factors(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn product(&self) -> u64 {
        self.0.iter().map(|&(p, r)| (p as u64).pow(r)).product()
    }

    pub fn is_prime_power(&self) -> bool {
        self.0.len() == 1
    }

    /// The prime-power parts `p^r`.
    pub fn prime_powers(&self) -> Vec<u32> {
        self.0.iter().map(|&(p, r)| p.pow(r)).collect()
    }
}

pub fn factorize(n: u32) -> Factorization {
    let mut out = Vec::new();
    let mut rest = n;
    let mut p = 2u32;
    while rest > 1 && (p as u64) * (p as u64) <= rest as u64 {
        if rest % p == 0 {
            let mut r = 0;
            while rest % p == 0 {
                rest /= p;
                r += 1;
            }
            out.push((p, r));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        out.push((rest, 1));
    }
    Factorization(out)
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && factorize(n).factors() == [(n, 1)]
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b)`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Chinese remaindering for coprime `a`, `b`: the unique `z mod ab` with
/// `z = x mod a` and `z = y mod b`.
pub fn crt(x: u32, a: u32, y: u32, b: u32) -> Result<u32> {
    if gcd(a as u64, b as u64) != 1 {
        return Err(Error::InvalidInput(format!("{a} and {b} are not coprime")));
    }
    let (_, s, _) = ext_gcd(a as i64, b as i64);
    let ab = a as i64 * b as i64;
    // z = x + a * ((y - x) * a^{-1} mod b)
    let k = ((y as i64 - x as i64) * s).rem_euclid(b as i64);
    Ok((x as i64 + a as i64 * k).rem_euclid(ab) as u32)
}

/// The unique `w < p/2` with `w^2 = -1 (mod p)`, for primes `p = 1 (mod 4)`.
pub fn omega(p: u32) -> Result<Residue> {
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    if p % 4 != 1 {
        return Err(Error::NotApplicable(format!(
            "-1 is not a square modulo {p} (p != 1 mod 4)"
        )));
    }
    let target = p as u64 - 1;
    (1..=p / 2)
        .find(|&w| (w as u64 * w as u64) % p as u64 == target)
        .map(Residue)
        .ok_or_else(|| Error::InvalidInput(format!("no square root of -1 modulo {p}")))
}

/// Smallest quadratic non-residue modulo an odd prime.
pub fn alpha(p: u32) -> Result<Residue> {
    if p % 2 == 0 || !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not an odd prime")));
    }
    let table = squares(p)?;
    (2..p)
        .find(|&a| !table.is_square(a as u64))
        .map(Residue)
        .ok_or_else(|| Error::InvalidInput(format!("no non-residue modulo {p}")))
}

/// Smallest `y` with `y^2 = s (mod p)`, by exhaustive search.
pub fn sqrt_mod(s: Residue, p: u32) -> Option<Residue> {
    let p64 = p as u64;
    let s = s.0 as u64 % p64;
    (0..p).find(|&y| (y as u64 * y as u64) % p64 == s).map(Residue)
}


/// All `x` in `Z_n` with `c*x = rhs (mod n)`.
pub fn solve_linear(c: u32, rhs: u32, n: u32) -> Vec<u32> {
    let (c, rhs) = (c % n, rhs % n);
    let g = gcd(c as u64, n as u64) as u32;
    // c = 0 gives g = n
    if rhs % g != 0 {
        return Vec::new();
    }
    let step = n / g;
    let base = if step == 1 {
        0
    } else {
        let inv = Zn { n: step }
            .inverse(Residue(c / g % step))
            .expect("c/g is a unit modulo n/g");
        ((rhs / g) as u64 * inv.0 as u64 % step as u64) as u32
    };
    (0..g).map(|k| base + k * step).collect()
}

/// Determinant of a square integer matrix modulo `n`.
///
/// Division-free: a dynamic program over column subsets (Laplace expansion
/// row by row), so it is exact over `Z_n` for composite `n`. Cost is
/// `O(2^k * k)` for order `k`; intended for `k <= 16`.
pub fn det_mod(matrix: &[Vec<i64>], n: u32) -> Residue {
    let k = matrix.len();
    assert!(k <= 20, "det_mod is meant for small orders");
    assert!(matrix.iter().all(|row| row.len() == k), "matrix must be square");
    let n64 = n as u64;
    if k == 0 {
        return Residue((1 % n64) as u32);
    }
    let entries: Vec<Vec<u64>> = matrix
        .iter()
        .map(|row| row.iter().map(|&x| x.rem_euclid(n as i64) as u64).collect())
        .collect();
    let mut f = vec![0u64; 1 << k];
    f[0] = 1 % n64;
    for mask in 0usize..(1 << k) {
        let cur = f[mask];
        if cur == 0 {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == k {
            continue;
        }
        for col in 0..k {
            if mask & (1 << col) != 0 {
                continue;
            }
            let a = entries[row][col];
            if a == 0 {
                continue;
            }
            let above = (mask >> (col + 1)).count_ones();
            let term = cur * a % n64;
            let slot = &mut f[mask | (1 << col)];
            *slot = if above % 2 == 0 {
                (*slot + term) % n64
            } else {
                (*slot + n64 - term) % n64
            };
        }
    }
    Residue(f[(1 << k) - 1] as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(14, 12).unwrap().value(), 2);
        assert_eq!(reduce(-1, 7).unwrap().value(), 6);
        assert_eq!(reduce(5, 1).unwrap().value(), 0);
        assert!(matches!(reduce(3, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift(reduce(14, 12).unwrap()), 2);
        assert_eq!(lift(reduce(0, 5).unwrap()), 0);
        assert_eq!(lift(reduce(-3, 8).unwrap()), 5);
    }

    #[test]
    fn lee_weight_examples() {
        let z12 = Zn::new(12).unwrap();
        assert_eq!(z12.lee_weight(z12.residue(7)), 5);
        assert_eq!(z12.lee_weight(z12.residue(5)), 5);
        let z7 = Zn::new(7).unwrap();
        assert_eq!(z7.lee_weight(z7.residue(0)), 0);
    }

    #[test]
    fn square_tables() {
        let t8 = squares(8).unwrap();
        assert_eq!(t8.squares(), vec![0, 1, 4]);
        assert_eq!(t8.nonzero_squares(), vec![0, 1, 4]);
        let t5 = squares(5).unwrap();
        assert_eq!(t5.squares(), vec![0, 1, 4]);
        assert_eq!(t5.nonzero_squares(), vec![1, 4]);
        assert_eq!(squares(2).unwrap().squares(), vec![0, 1]);
        let t1 = squares(1).unwrap();
        assert_eq!(t1.squares(), vec![0]);
        assert!(t1.nonzero_squares().is_empty());
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(12).factors(), &[(2, 2), (3, 1)]);
        assert!(factorize(1).factors().is_empty());
        assert_eq!(factorize(307).factors(), &[(307, 1)]);
        // trial-division oracle for 307
        assert!((2..307).all(|d| 307 % d != 0));
        for n in 1..2000u32 {
            assert_eq!(factorize(n).product(), n as u64);
        }
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(5).unwrap().value(), 2);
        assert_eq!(omega(13).unwrap().value(), 5);
        assert!(matches!(omega(7), Err(Error::NotApplicable(_))));
        assert!(matches!(omega(21), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn omega_exhaustive_to_1000() {
        for p in (2..=1000).filter(|&p| is_prime(p) && p % 4 == 1) {
            let w = omega(p).unwrap().value() as u64;
            assert_eq!(w * w % p as u64, p as u64 - 1);
            assert!(2 * w < p as u64);
            let count = (1..p as u64).filter(|&x| 2 * x < p as u64 && x * x % p as u64 == p as u64 - 1).count();
            assert_eq!(count, 1, "omega({p}) not unique");
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(3).unwrap().value(), 2);
        assert_eq!(alpha(7).unwrap().value(), 3);
        assert_eq!(alpha(5).unwrap().value(), 2);
        assert!(alpha(2).is_err());
        assert!(alpha(9).is_err());
    }

    #[test]
    fn alpha_is_least_non_residue() {
        for p in (3..2000).filter(|&p| is_prime(p)) {
            let t = squares(p).unwrap();
            let a = alpha(p).unwrap().value();
            assert!(!t.is_square(a as u64));
            assert!((1..a).all(|x| t.is_square(x as u64)));
        }
    }

    #[test]
    fn sqrt_mod_examples() {
        assert_eq!(sqrt_mod(Residue(4), 7), Some(Residue(2)));
        assert_eq!(sqrt_mod(Residue(3), 5), None);
        assert_eq!(sqrt_mod(Residue(0), 11), Some(Residue(0)));
    }

    #[test]
    fn square_count_symmetric_in_x_and_n_minus_x() {
        for n in 1..=500u64 {
            let by_x: std::collections::BTreeSet<u64> = (0..n).map(|x| x * x % n).collect();
            let by_neg: std::collections::BTreeSet<u64> = (0..n).map(|x| (n - x) % n).map(|y| y * y % n).collect();
            assert_eq!(by_x, by_neg);
            assert_eq!(squares(n as u32).unwrap().squares().len(), by_x.len());
        }
    }

    #[test]
    fn crt_roundtrip() {
        for (a, b) in [(4u32, 3u32), (5, 7), (8, 9), (1, 13)] {
            for x in 0..a {
                for y in 0..b {
                    let z = crt(x, a, y, b).unwrap();
                    assert_eq!((z % a, z % b), (x, y));
                }
            }
        }
        assert!(crt(1, 4, 1, 6).is_err());
    }

    #[test]
    fn solve_linear_matches_scan() {
        for n in 1..40u32 {
            for c in 0..n {
                for rhs in 0..n {
                    let scan: Vec<u32> = (0..n).filter(|&x| (c * x) % n == rhs).collect();
                    assert_eq!(solve_linear(c, rhs, n), scan, "c={c} rhs={rhs} n={n}");
                }
            }
        }
    }

    fn det_permutation_oracle(m: &[Vec<i64>]) -> i64 {
        // Leibniz formula over all permutations, exact integers.
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for i in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(i, k - 1);
                    out.push(q);
                }
            }
            out
        }
        let k = m.len();
        perms(k)
            .into_iter()
            .map(|p| {
                let inv = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
                let prod: i64 = (0..k).map(|i| m[i][p[i]]).product();
                if inv % 2 == 0 { prod } else { -prod }
            })
            .sum()
    }

    #[test]
    fn det_mod_matches_leibniz() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let k = rng.gen_range(1..=5);
            let n = rng.gen_range(1..=40u32);
            let m: Vec<Vec<i64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(-9..=9)).collect()).collect();
            let expect = det_permutation_oracle(&m).rem_euclid(n as i64) as u32;
            assert_eq!(det_mod(&m, n).value(), expect);
        }
    }

    proptest! {
        #[test]
        fn reduce_lift_reduce(x in -1_000_000i64..1_000_000, n in 1u32..5000) {
            let r = reduce(x, n).unwrap();
            prop_assert_eq!(reduce(lift(r) as i64, n).unwrap(), r);
            prop_assert!(r.value() < n);
        }

        #[test]
        fn lee_weight_symmetric(v in 0u32..5000, n in 1u32..5000) {
            let z = Zn::new(n).unwrap();
            let r = z.residue(v);
            prop_assert_eq!(z.lee_weight(r), z.lee_weight(z.neg(r)));
            prop_assert!(z.lee_weight(r) <= n / 2);
        }
    }
}
