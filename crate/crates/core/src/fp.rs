//! Prime field arithmetic and dense linear algebra over F_p.

use std::fmt;

use crate::{Error, Result};

/// An element of F_p carrying its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u32,
    p: u32,
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Checks that `p` is an odd prime small enough for packed arithmetic.
pub fn check_prime(p: u32) -> Result<()> {
    if p > 2 && p < 1 << 15 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::BadPrime(p))
    }
}

impl Fp {
    pub fn new(value: i64, p: u32) -> Result<Fp> {
        check_prime(p)?;
        Ok(Fp { value: reduce(value, p), p })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Fp> {
        if self.value == 0 {
            return Err(Error::NotInvertible("0 in F_p".into()));
        }
        Ok(Fp { value: inv(self.value, self.p), p: self.p })
    }

    pub fn pow(self, e: u64) -> Fp {
        Fp { value: pow(self.value, e, self.p), p: self.p }
    }
}

impl std::ops::Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        assert_eq!(self.p, o.p, "modulus mismatch");
        Fp { value: add(self.value, o.value, self.p), p: self.p }
    }
}

impl std::ops::Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        assert_eq!(self.p, o.p, "modulus mismatch");
        Fp { value: sub(self.value, o.value, self.p), p: self.p }
    }
}

impl std::ops::Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        assert_eq!(self.p, o.p, "modulus mismatch");
        Fp { value: mul(self.value, o.value, self.p), p: self.p }
    }
}

impl std::ops::Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp { value: neg(self.value, self.p), p: self.p }
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[inline]
pub fn reduce(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

#[inline]
pub fn add(a: u32, b: u32, p: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub fn pow(mut a: u32, mut e: u64, p: u32) -> u32 {
    let mut r = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue (Fermat).
pub fn inv(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow(a, (p - 2) as u64, p)
}

/// `n!` reduced mod p (zero once n >= p).
pub fn factorial(n: u32, p: u32) -> u32 {
    (1..=n).fold(1 % p, |acc, k| mul(acc, k % p, p))
}

/// Binomial coefficient mod p via Lucas' theorem.
pub fn binomial(n: u32, k: u32, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let (mut n, mut k) = (n, k);
    let mut r = 1;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let c = mul(factorial(a, p), inv(mul(factorial(b, p), factorial(a - b, p), p), p), p);
        r = mul(r, c, p);
        n /= p;
        k /= p;
    }
    r
}

/// Dense row-major matrix over F_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u32,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u32>,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> FpMatrix {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, d: usize) -> FpMatrix {
        let mut m = FpMatrix::zeros(p, d, d);
        for i in 0..d {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<u32>]) -> FpMatrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend(r.iter().map(|&v| v % p));
        }
        FpMatrix { p, rows: rows.len(), cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u32) {
        self.data[i * self.cols + j] = v % self.p;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, o: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, o.rows);
        let p = self.p;
        let mut out = FpMatrix::zeros(p, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    let idx = i * o.cols + j;
                    out.data[idx] = add(out.data[idx], mul(a, o.get(k, j), p), p);
                }
            }
        }
        out
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(piv) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..self.cols {
                    self.data.swap(piv * self.cols + j, r * self.cols + j);
                }
            }
            let s = inv(self.get(r, c), p);
            for j in 0..self.cols {
                let v = mul(self.get(r, j), s, p);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                let f = self.get(i, c);
                if i == r || f == 0 {
                    continue;
                }
                for j in 0..self.cols {
                    let v = sub(self.get(i, j), mul(f, self.get(r, j), p), p);
                    self.data[i * self.cols + j] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    pub fn inverse(&self) -> Option<FpMatrix> {
        assert_eq!(self.rows, self.cols);
        let d = self.rows;
        let mut aug = FpMatrix::zeros(self.p, d, 2 * d);
        for i in 0..d {
            for j in 0..d {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, d + i, 1);
        }
        let piv = aug.rref();
        if piv.len() < d || piv[d - 1] != d - 1 {
            return None;
        }
        let mut out = FpMatrix::zeros(self.p, d, d);
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, aug.get(i, d + j));
            }
        }
        Some(out)
    }
}

/// Incrementally maintained row space over F_p, used for spans and spin-up.
#[derive(Clone, Debug)]
pub struct RowSpace {
    p: u32,
    dim: usize,
    // echelon rows, each normalized with leading 1 at `lead[i]`
    rows: Vec<Vec<u32>>,
    lead: Vec<usize>,
}

impl RowSpace {
    pub fn new(p: u32, dim: usize) -> RowSpace {
        RowSpace { p, dim, rows: Vec::new(), lead: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Reduces `v` against the basis; returns the residue.
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut w: Vec<u32> = v.iter().map(|&x| x % p).collect();
        for (row, &l) in self.rows.iter().zip(&self.lead) {
            let f = w[l];
            if f != 0 {
                for (a, &b) in w.iter_mut().zip(row) {
                    *a = sub(*a, mul(f, b, p), p);
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Adds `v`; returns true when the span grew.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        assert_eq!(v.len(), self.dim);
        let p = self.p;
        let mut w = self.reduce(v);
        let Some(l) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = inv(w[l], p);
        for a in w.iter_mut() {
            *a = mul(*a, s, p);
        }
        for (row, &rl) in self.rows.iter_mut().zip(&self.lead) {
            let _ = rl;
            let f = row[l];
            if f != 0 {
                for (a, &b) in row.iter_mut().zip(&w) {
                    *a = sub(*a, mul(f, b, p), p);
                }
            }
        }
        self.rows.push(w);
        self.lead.push(l);
        true
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_ops() {
        let a = Fp::new(5, 7).unwrap();
        let b = Fp::new(-3, 7).unwrap();
        assert_eq!((a + b).value(), 2);
        assert_eq!((a * b).value(), 6);
        assert_eq!((a * a.inv().unwrap()).value(), 1);
        assert!(Fp::new(1, 4).is_err());
        assert!(Fp::new(1, 2).is_err());
    }

    #[test]
    fn binomials_match_pascal() {
        for p in [3u32, 5, 7] {
            for n in 0..20u32 {
                for k in 0..=n {
                    let exact = (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128);
                    assert_eq!(binomial(n, k, p), (exact % p as u128) as u32);
                }
            }
        }
    }

    #[test]
    fn rank_and_inverse() {
        let m = FpMatrix::from_rows(5, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(), 1);
        let m = FpMatrix::from_rows(5, &[vec![1, 2], vec![3, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), FpMatrix::identity(5, 2));
    }

    #[test]
    fn row_space_spans() {
        let mut s = RowSpace::new(3, 3);
        assert!(s.insert(&[1, 1, 0]));
        assert!(s.insert(&[0, 1, 1]));
        assert!(!s.insert(&[1, 2, 1]));
        assert!(s.contains(&[2, 0, 1]));
        assert_eq!(s.rank(), 2);
    }
}
