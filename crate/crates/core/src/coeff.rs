//! Truncated coefficient rings F_p[g_1..g_k]/(g_i^{cap_i}) and h-adic
//! series and Laurent series over them.
//!
//! Monomials are packed four bits per generator into a `u64`, so a ring has
//! at most 16 generators with caps at most 16.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::fp;
use crate::{Error, Result};

const BITS: u32 = 4;
const MASK: u64 = 0xf;
pub const MAX_GENERATORS: usize = 16;

#[derive(Debug, PartialEq, Eq)]
struct RingDesc {
    p: u32,
    names: Vec<String>,
    caps: Vec<u32>,
}

/// Descriptor of a truncated polynomial ring over F_p. Cheap to clone.
#[derive(Clone, Debug)]
pub struct CoeffRing(Arc<RingDesc>);

impl PartialEq for CoeffRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for CoeffRing {}

impl CoeffRing {
    /// A ring with the given `(name, cap)` generators; `g^cap = 0`.
    pub fn new(p: u32, gens: &[(&str, u32)]) -> Result<CoeffRing> {
        fp::check_prime(p)?;
        if gens.len() > MAX_GENERATORS {
            return Err(Error::BadRing(format!("{} generators (max {MAX_GENERATORS})", gens.len())));
        }
        let mut names: Vec<String> = Vec::new();
        let mut caps = Vec::new();
        for &(name, cap) in gens {
            if !(1..=16).contains(&cap) {
                return Err(Error::BadRing(format!("cap {cap} for `{name}` outside 1..=16")));
            }
            if name.is_empty() || names.iter().any(|n| n == name) {
                return Err(Error::BadRing(format!("bad or repeated generator name `{name}`")));
            }
            names.push(name.to_string());
            caps.push(cap);
        }
        Ok(CoeffRing(Arc::new(RingDesc { p, names, caps })))
    }

    /// The prime field itself (no generators).
    pub fn field(p: u32) -> Result<CoeffRing> {
        CoeffRing::new(p, &[])
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn ngens(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn caps(&self) -> &[u32] {
        &self.0.caps
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.0
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
    }

    /// Number of elements, if it fits in a u128.
    pub fn cardinality(&self) -> Option<u128> {
        let dim: u32 = self.0.caps.iter().try_fold(1u32, |a, &c| a.checked_mul(c))?;
        (self.p() as u128).checked_pow(dim)
    }

    /// Dimension over F_p.
    pub fn dimension(&self) -> usize {
        self.0.caps.iter().map(|&c| c as usize).product()
    }

    /// Every product of this many nilpotent elements vanishes.
    pub fn nil_index(&self) -> u32 {
        self.0.caps.iter().map(|&c| c - 1).sum::<u32>() + 1
    }

    pub fn pack(&self, exps: &[u32]) -> Option<u64> {
        assert_eq!(exps.len(), self.ngens());
        let mut key = 0u64;
        for (i, (&e, &c)) in exps.iter().zip(&self.0.caps).enumerate() {
            if e >= c {
                return None;
            }
            key |= (e as u64) << (BITS * i as u32);
        }
        Some(key)
    }

    pub fn unpack(&self, key: u64) -> Vec<u32> {
        (0..self.ngens()).map(|i| ((key >> (BITS * i as u32)) & MASK) as u32).collect()
    }

    /// Product of two packed monomials, or `None` if a cap is reached.
    #[inline]
    pub fn mul_keys(&self, a: u64, b: u64) -> Option<u64> {
        let mut out = 0u64;
        for (i, &c) in self.0.caps.iter().enumerate() {
            let sh = BITS * i as u32;
            let e = ((a >> sh) & MASK) + ((b >> sh) & MASK);
            if e >= c as u64 {
                return None;
            }
            out |= e << sh;
        }
        Some(out)
    }

    pub fn key_degree(&self, key: u64) -> u32 {
        (0..self.ngens()).map(|i| ((key >> (BITS * i as u32)) & MASK) as u32).sum()
    }

    /// All packed monomials of the ring, in increasing key order.
    pub fn all_keys(&self) -> Vec<u64> {
        let mut keys = vec![0u64];
        for (i, &c) in self.0.caps.iter().enumerate() {
            let sh = BITS * i as u32;
            keys = keys
                .iter()
                .flat_map(|&k| (0..c as u64).map(move |e| k | (e << sh)))
                .collect();
        }
        keys.sort_unstable();
        keys
    }

    pub fn zero(&self) -> CRElem {
        CRElem { ring: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> CRElem {
        self.constant(1)
    }

    pub fn constant(&self, c: i64) -> CRElem {
        let mut e = self.zero();
        let v = fp::reduce(c, self.p());
        if v != 0 {
            e.terms.insert(0, v);
        }
        e
    }

    pub fn gen(&self, i: usize) -> CRElem {
        let mut exps = vec![0; self.ngens()];
        exps[i] = 1;
        self.monomial(&exps, 1)
    }

    pub fn named(&self, name: &str) -> Result<CRElem> {
        Ok(self.gen(self.index_of(name)?))
    }

    /// `c * Π g_i^{exps_i}`, zero if some exponent reaches its cap.
    pub fn monomial(&self, exps: &[u32], c: i64) -> CRElem {
        let mut e = self.zero();
        let v = fp::reduce(c, self.p());
        if let (Some(k), true) = (self.pack(exps), v != 0) {
            e.terms.insert(k, v);
        }
        e
    }

    /// Uniformly random element.
    pub fn random<R: Rng>(&self, rng: &mut R) -> CRElem {
        let p = self.p();
        let mut e = self.zero();
        for k in self.all_keys() {
            let v = rng.gen_range(0..p);
            if v != 0 {
                e.terms.insert(k, v);
            }
        }
        e
    }

    /// Random element with only a few terms; handy in big rings.
    pub fn random_sparse<R: Rng>(&self, rng: &mut R, terms: usize, max_degree: u32) -> CRElem {
        let p = self.p();
        let mut e = self.zero();
        for _ in 0..terms {
            let exps: Vec<u32> = self.caps().iter().map(|&c| rng.gen_range(0..c.min(max_degree + 1))).collect();
            if exps.iter().sum::<u32>() > max_degree {
                continue;
            }
            let c = rng.gen_range(1..p) as i64;
            e = &e + &self.monomial(&exps, c);
        }
        e
    }

    /// Random nilpotent element (zero constant term).
    pub fn random_nilpotent<R: Rng>(&self, rng: &mut R) -> CRElem {
        let mut e = self.random(rng);
        e.terms.remove(&0);
        e
    }

    /// Random unit (nonzero constant term).
    pub fn random_unit<R: Rng>(&self, rng: &mut R) -> CRElem {
        let mut e = self.random(rng);
        e.terms.insert(0, rng.gen_range(1..self.p()));
        e
    }
}

impl fmt::Display for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p())?;
        if self.ngens() > 0 {
            let gens: Vec<String> = self.names().iter().map(|n| n.to_string()).collect();
            let rels: Vec<String> = self.names().iter().zip(self.caps()).map(|(n, c)| format!("{n}^{c}")).collect();
            write!(f, "[{}]/({})", gens.join(","), rels.join(","))?;
        }
        Ok(())
    }
}

/// Element of a [`CoeffRing`]: sparse map from packed monomials to residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CRElem {
    ring: CoeffRing,
    terms: BTreeMap<u64, u32>,
}

impl CRElem {
    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0) == Some(&1)
    }

    pub fn constant_term(&self) -> u32 {
        self.terms.get(&0).copied().unwrap_or(0)
    }

    /// Units are exactly the elements with nonzero constant term.
    pub fn is_unit(&self) -> bool {
        self.constant_term() != 0
    }

    pub fn is_nilpotent(&self) -> bool {
        !self.is_unit()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&k| k == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates `(packed monomial, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn coefficient(&self, exps: &[u32]) -> u32 {
        self.ring.pack(exps).and_then(|k| self.terms.get(&k).copied()).unwrap_or(0)
    }

    pub fn from_terms(ring: &CoeffRing, terms: impl IntoIterator<Item = (u64, u32)>) -> CRElem {
        let p = ring.p();
        let mut e = ring.zero();
        for (k, v) in terms {
            e.add_term(k, v % p);
        }
        e
    }

    #[inline]
    fn add_term(&mut self, key: u64, v: u32) {
        if v == 0 {
            return;
        }
        let p = self.ring.p();
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = fp::add(*e.get(), v, p);
                if s == 0 {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check(&self, other: &CRElem) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)))
        }
    }

    pub fn checked_add(&self, other: &CRElem) -> Result<CRElem> {
        self.check(other)?;
        let mut out = self.clone();
        for (&k, &v) in &other.terms {
            out.add_term(k, v);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &CRElem) -> Result<CRElem> {
        self.check(other)?;
        let p = self.p();
        if self.is_zero() || other.is_zero() {
            return Ok(self.ring.zero());
        }
        if self.ring.ngens() == 0 {
            return Ok(self.ring.constant(fp::mul(self.constant_term(), other.constant_term(), p) as i64));
        }
        let mut out = self.ring.zero();
        for (&ka, &va) in &self.terms {
            for (&kb, &vb) in &other.terms {
                if let Some(k) = self.ring.mul_keys(ka, kb) {
                    out.add_term(k, fp::mul(va, vb, p));
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> CRElem {
        let p = self.p();
        let c = c % p;
        if c == 0 {
            return self.ring.zero();
        }
        CRElem { ring: self.ring.clone(), terms: self.terms.iter().map(|(&k, &v)| (k, fp::mul(v, c, p))).collect() }
    }

    pub fn scale_i(&self, c: i64) -> CRElem {
        self.scale(fp::reduce(c, self.p()))
    }

    pub fn pow(&self, mut e: u64) -> CRElem {
        let mut base = self.clone();
        let mut acc = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Inverse of a unit: `c^{-1} Σ (-n/c)^k` with `n` the nilpotent part.
    pub fn inv(&self) -> Result<CRElem> {
        let c = self.constant_term();
        if c == 0 {
            return Err(Error::NotInvertible(format!("{self} has zero constant term")));
        }
        let p = self.p();
        let ci = fp::inv(c, p);
        let mut n = self.clone();
        n.terms.remove(&0);
        let q = n.scale(fp::neg(ci, p));
        let mut acc = self.ring.one();
        let mut term = self.ring.one();
        loop {
            term = &term * &q;
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc.scale(ci))
    }

    /// Maps generators by name into `target`; fails on unknown names.
    pub fn embed(&self, target: &CoeffRing) -> Result<CRElem> {
        if &self.ring == target {
            return Ok(self.clone());
        }
        let idx: Vec<usize> = self.ring.names().iter().map(|n| target.index_of(n)).collect::<Result<_>>()?;
        let mut out = target.zero();
        for (&k, &v) in &self.terms {
            let src = self.ring.unpack(k);
            let mut exps = vec![0; target.ngens()];
            for (i, &e) in src.iter().enumerate() {
                exps[idx[i]] = e;
            }
            if let Some(k2) = target.pack(&exps) {
                out.add_term(k2, v);
            }
        }
        Ok(out)
    }

    /// Evaluates with generator `i` replaced by `images[i]` (all in one ring).
    pub fn subst(&self, images: &[CRElem]) -> Result<CRElem> {
        assert_eq!(images.len(), self.ring.ngens());
        let target = match images.first() {
            Some(e) => e.ring.clone(),
            None => return Ok(self.clone()),
        };
        let mut powers: Vec<Vec<CRElem>> = Vec::new();
        for (img, &cap) in images.iter().zip(self.ring.caps()) {
            if img.ring != target {
                return Err(Error::RingMismatch("substitution images".into()));
            }
            let mut pw = vec![target.one()];
            for _ in 1..cap {
                let next = pw.last().unwrap() * img;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = target.zero();
        for (&k, &v) in &self.terms {
            let mut t = target.constant(v as i64);
            for (i, e) in self.ring.unpack(k).into_iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Total degree of the lowest-degree term (None for zero).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|&k| self.ring.key_degree(k)).min()
    }

    /// Partial derivative with respect to generator `i` (as a polynomial).
    pub fn derivative(&self, i: usize) -> CRElem {
        let p = self.p();
        let mut out = self.ring.zero();
        for (&k, &v) in &self.terms {
            let mut e = self.ring.unpack(k);
            if e[i] == 0 {
                continue;
            }
            let c = fp::mul(v, e[i] % p, p);
            e[i] -= 1;
            out.add_term(self.ring.pack(&e).unwrap(), c);
        }
        out
    }
}

impl fmt::Display for CRElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (&k, &v) in &self.terms {
            let exps = self.ring.unpack(k);
            let mut factors = Vec::new();
            for (name, &e) in self.ring.names().iter().zip(&exps) {
                match e {
                    0 => {}
                    1 => factors.push(name.clone()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            if factors.is_empty() {
                parts.push(v.to_string());
            } else if v == 1 {
                parts.push(factors.join("*"));
            } else {
                parts.push(format!("{v}*{}", factors.join("*")));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

macro_rules! cr_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> std::ops::$tr<&'a CRElem> for &'a CRElem {
            type Output = CRElem;
            fn $m(self, o: &'a CRElem) -> CRElem {
                let f: fn(&CRElem, &CRElem) -> CRElem = $body;
                f(self, o)
            }
        }
        impl std::ops::$tr<CRElem> for CRElem {
            type Output = CRElem;
            fn $m(self, o: CRElem) -> CRElem {
                std::ops::$tr::$m(&self, &o)
            }
        }
        impl<'a> std::ops::$tr<&'a CRElem> for CRElem {
            type Output = CRElem;
            fn $m(self, o: &'a CRElem) -> CRElem {
                std::ops::$tr::$m(&self, o)
            }
        }
    };
}

cr_binop!(Add, add, |a, b| a.checked_add(b).expect("ring mismatch"));
cr_binop!(Sub, sub, |a, b| a.checked_add(&-b).expect("ring mismatch"));
cr_binop!(Mul, mul, |a, b| a.checked_mul(b).expect("ring mismatch"));

impl std::ops::Neg for &CRElem {
    type Output = CRElem;
    fn neg(self) -> CRElem {
        let p = self.p();
        CRElem { ring: self.ring.clone(), terms: self.terms.iter().map(|(&k, &v)| (k, fp::neg(v, p))).collect() }
    }
}

impl std::ops::Neg for CRElem {
    type Output = CRElem;
    fn neg(self) -> CRElem {
        -&self
    }
}

/// Ring arithmetic with the error surfaced instead of panicking.
pub fn cr_arith(a: &CRElem, b: &CRElem, op: ArithOp) -> Result<CRElem> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Mul => a.checked_mul(b),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
}

fn min_prec(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Power series Σ_{i<N} a_i h^i. `prec == None` marks an exact polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HSeries {
    ring: CoeffRing,
    prec: Option<usize>,
    coeffs: Vec<CRElem>,
}

impl HSeries {
    pub fn new(ring: &CoeffRing, coeffs: Vec<CRElem>, prec: Option<usize>) -> Result<HSeries> {
        if coeffs.iter().any(|c| c.ring() != ring) {
            return Err(Error::RingMismatch("series coefficients".into()));
        }
        if prec == Some(0) {
            return Err(Error::Precondition("precision must be positive".into()));
        }
        let mut s = HSeries { ring: ring.clone(), prec, coeffs };
        s.normalize();
        Ok(s)
    }

    pub fn from_constant(c: &CRElem, prec: Option<usize>) -> HSeries {
        HSeries::new(c.ring(), vec![c.clone()], prec).unwrap()
    }

    pub fn one(ring: &CoeffRing, prec: Option<usize>) -> HSeries {
        HSeries::from_constant(&ring.one(), prec)
    }

    fn normalize(&mut self) {
        if let Some(n) = self.prec {
            self.coeffs.truncate(n);
        }
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn prec(&self) -> Option<usize> {
        self.prec
    }

    pub fn coeff(&self, i: usize) -> Result<CRElem> {
        if let Some(n) = self.prec {
            if i >= n {
                return Err(Error::OutsideWindow { index: i as i32, floor: 0, prec: n as i32 });
            }
        }
        Ok(self.coeffs.get(i).cloned().unwrap_or_else(|| self.ring.zero()))
    }

    pub fn coeffs(&self) -> &[CRElem] {
        &self.coeffs
    }

    pub fn truncate(&self, n: usize) -> HSeries {
        let prec = Some(self.prec.map_or(n, |m| m.min(n)));
        HSeries::new(&self.ring, self.coeffs.clone(), prec).unwrap()
    }

    pub fn add(&self, o: &HSeries) -> Result<HSeries> {
        let len = self.coeffs.len().max(o.coeffs.len());
        let mut c = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.coeffs.get(i).cloned().unwrap_or_else(|| self.ring.zero());
            let b = o.coeffs.get(i).cloned().unwrap_or_else(|| o.ring.zero());
            c.push(a.checked_add(&b)?);
        }
        let prec = match (self.prec, o.prec) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        HSeries::new(&self.ring, c, prec)
    }

    pub fn mul(&self, o: &HSeries) -> Result<HSeries> {
        if self.ring != o.ring {
            return Err(Error::RingMismatch("series product".into()));
        }
        let prec = match (self.prec, o.prec) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        };
        let limit = prec.unwrap_or(usize::MAX);
        let len = (self.coeffs.len() + o.coeffs.len()).saturating_sub(1).min(limit);
        let mut c = vec![self.ring.zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        HSeries::new(&self.ring, c, prec)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn to_laurent(&self) -> HLaurent {
        let mut l = HLaurent::zero(&self.ring);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                l.coeffs.insert(i as i32, c.clone());
            }
        }
        l.prec = self.prec.map(|n| n as i32);
        l
    }
}

impl fmt::Display for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_laurent())
    }
}

/// Inverse of a power series whose constant coefficient is a unit, to
/// precision `min(n, prec(u))`.
pub fn hs_inv(u: &HSeries, n: usize) -> Result<HSeries> {
    let n = u.prec.map_or(n, |m| m.min(n));
    let a0 = u.coeff(0)?;
    let a0i = a0.inv().map_err(|_| Error::NotInvertible(format!("constant term {a0} of series is not a unit")))?;
    let ring = u.ring.clone();
    let mut b: Vec<CRElem> = vec![a0i.clone()];
    for k in 1..n {
        let mut s = ring.zero();
        for i in 1..=k {
            if let Some(ai) = u.coeffs.get(i) {
                s = &s + &(ai * &b[k - i]);
            }
        }
        b.push(-(&s * &a0i));
    }
    HSeries::new(&ring, b, Some(n))
}

/// Laurent series Σ_{floor ≤ i < prec} a_i h^i; coefficients below
/// `floor` are zero by construction, `prec == None` marks an exact Laurent
/// polynomial.
#[derive(Clone, Debug)]
pub struct HLaurent {
    ring: CoeffRing,
    floor: i32,
    prec: Option<i32>,
    coeffs: BTreeMap<i32, CRElem>,
}

impl PartialEq for HLaurent {
    /// Equality of values on the common window (floors are bookkeeping).
    fn eq(&self, o: &Self) -> bool {
        self.ring == o.ring && self.prec == o.prec && self.coeffs == o.coeffs
    }
}

impl Eq for HLaurent {}

impl HLaurent {
    pub fn zero(ring: &CoeffRing) -> HLaurent {
        HLaurent { ring: ring.clone(), floor: 0, prec: None, coeffs: BTreeMap::new() }
    }

    pub fn one(ring: &CoeffRing) -> HLaurent {
        HLaurent::constant(&ring.one())
    }

    pub fn constant(c: &CRElem) -> HLaurent {
        HLaurent::monomial(c, 0)
    }

    /// `c h^k`, exact.
    pub fn monomial(c: &CRElem, k: i32) -> HLaurent {
        let mut l = HLaurent::zero(c.ring());
        l.floor = k.min(0);
        if !c.is_zero() {
            l.coeffs.insert(k, c.clone());
        }
        l
    }

    pub fn h_pow(ring: &CoeffRing, k: i32) -> HLaurent {
        HLaurent::monomial(&ring.one(), k)
    }

    /// Builds from `(index, coefficient)` pairs with the given window.
    pub fn from_coeffs(ring: &CoeffRing, floor: i32, prec: Option<i32>, coeffs: impl IntoIterator<Item = (i32, CRElem)>) -> Result<HLaurent> {
        let mut l = HLaurent { ring: ring.clone(), floor: floor.min(0), prec, coeffs: BTreeMap::new() };
        for (i, c) in coeffs {
            if c.ring() != ring {
                return Err(Error::RingMismatch("Laurent coefficient".into()));
            }
            l.add_at(i, &c);
        }
        l.normalize()?;
        Ok(l)
    }

    fn add_at(&mut self, i: i32, c: &CRElem) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.get_mut(&i) {
            Some(e) => {
                *e = &*e + c;
                if e.is_zero() {
                    self.coeffs.remove(&i);
                }
            }
            None => {
                self.coeffs.insert(i, c.clone());
            }
        }
    }

    fn normalize(&mut self) -> Result<()> {
        if let Some(n) = self.prec {
            self.coeffs.retain(|&i, _| i < n);
        }
        if let Some((&lo, _)) = self.coeffs.iter().next() {
            if lo < self.floor {
                return Err(Error::PoleOverflow { order: -lo, floor: self.floor });
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn floor(&self) -> i32 {
        self.floor
    }

    pub fn prec(&self) -> Option<i32> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Zero on the known window.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    /// Coefficient of h^i; reads at or above the precision are errors.
    pub fn coeff(&self, i: i32) -> Result<CRElem> {
        if let Some(n) = self.prec {
            if i >= n {
                return Err(Error::OutsideWindow { index: i, floor: self.floor, prec: n });
            }
        }
        Ok(self.coeffs.get(&i).cloned().unwrap_or_else(|| self.ring.zero()))
    }

    /// Iterates nonzero `(index, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &CRElem)> {
        self.coeffs.iter().map(|(&i, c)| (i, c))
    }

    /// Lowest index with a nonzero coefficient in the known window.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn top_index(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Lowers or raises the declared floor; fails if a pole lies below it.
    pub fn with_floor(&self, v: i32) -> Result<HLaurent> {
        let mut l = self.clone();
        l.floor = v.min(0);
        l.normalize()?;
        Ok(l)
    }

    /// Drops everything from h^n on.
    pub fn truncate(&self, n: i32) -> HLaurent {
        let mut l = self.clone();
        l.prec = Some(l.prec.map_or(n, |m| m.min(n)));
        l.coeffs.retain(|&i, _| i < n);
        l
    }

    pub fn add(&self, o: &HLaurent) -> Result<HLaurent> {
        if self.ring != o.ring {
            return Err(Error::RingMismatch("Laurent sum".into()));
        }
        let mut l = self.clone();
        l.floor = self.floor.min(o.floor);
        l.prec = min_prec(self.prec, o.prec);
        for (&i, c) in &o.coeffs {
            l.add_at(i, c);
        }
        l.normalize()?;
        Ok(l)
    }

    pub fn neg(&self) -> HLaurent {
        let mut l = self.clone();
        for c in l.coeffs.values_mut() {
            *c = -&*c;
        }
        l
    }

    pub fn sub(&self, o: &HLaurent) -> Result<HLaurent> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &HLaurent) -> Result<HLaurent> {
        if self.ring != o.ring {
            return Err(Error::RingMismatch("Laurent product".into()));
        }
        // unknown tails of one factor only meet the other from its valuation on
        let va = self.valuation().or(self.prec);
        let vb = o.valuation().or(o.prec);
        let pa = self.prec.map(|n| n + vb.unwrap_or(0));
        let pb = o.prec.map(|n| n + va.unwrap_or(0));
        let prec = match (self.is_zero() && self.is_exact(), o.is_zero() && o.is_exact()) {
            (true, _) | (_, true) => None,
            _ => min_prec(pa, pb),
        };
        let mut l = HLaurent { ring: self.ring.clone(), floor: self.floor + o.floor, prec, coeffs: BTreeMap::new() };
        for (&i, a) in &self.coeffs {
            for (&j, b) in &o.coeffs {
                if prec.is_some_and(|n| i + j >= n) {
                    continue;
                }
                l.add_at(i + j, &(a * b));
            }
        }
        l.normalize()?;
        Ok(l)
    }

    pub fn scale(&self, c: &CRElem) -> HLaurent {
        let mut l = self.clone();
        l.coeffs = self.coeffs.iter().map(|(&i, a)| (i, a * c)).filter(|(_, a)| !a.is_zero()).collect();
        l
    }

    pub fn scale_fp(&self, c: u32) -> HLaurent {
        let mut l = self.clone();
        l.coeffs = self.coeffs.iter().map(|(&i, a)| (i, a.scale(c))).filter(|(_, a)| !a.is_zero()).collect();
        l
    }

    /// Multiplies by h^k.
    pub fn shift(&self, k: i32) -> HLaurent {
        HLaurent {
            ring: self.ring.clone(),
            floor: (self.floor + k).min(0),
            prec: self.prec.map(|n| n + k),
            coeffs: self.coeffs.iter().map(|(&i, c)| (i + k, c.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Result<HLaurent> {
        let mut acc = HLaurent::one(&self.ring);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// h ↦ -h.
    pub fn flip_h(&self) -> HLaurent {
        let mut l = self.clone();
        for (&i, c) in l.coeffs.iter_mut() {
            if i.rem_euclid(2) == 1 {
                *c = -&*c;
            }
        }
        l
    }

    /// Applies a map to every coefficient (e.g. a substitution).
    pub fn map_coeffs(&self, ring: &CoeffRing, f: impl Fn(&CRElem) -> Result<CRElem>) -> Result<HLaurent> {
        let mut out = HLaurent { ring: ring.clone(), floor: self.floor, prec: self.prec, coeffs: BTreeMap::new() };
        for (&i, c) in &self.coeffs {
            let v = f(c)?;
            out.add_at(i, &v);
        }
        Ok(out)
    }

    /// Part with negative powers of h.
    pub fn polar_part(&self) -> HLaurent {
        let mut l = self.clone();
        l.coeffs.retain(|&i, _| i < 0);
        l.prec = None;
        l
    }

    /// Part with nonnegative powers of h.
    pub fn regular_part(&self) -> HLaurent {
        let mut l = self.clone();
        l.coeffs.retain(|&i, _| i >= 0);
        l
    }

    pub fn is_unit(&self) -> Result<bool> {
        laurent_is_unit(self)
    }

    /// Inverse of a unit. Exact when the series factor of the
    /// decomposition is 1; otherwise limited by the element's precision.
    pub fn inv(&self) -> Result<HLaurent> {
        let d = laurent_unit_decompose(self)?;
        let mut out = d.w_hat_inverse()?.shift(-d.m).scale(&d.r.inv()?);
        if !d.w.is_one() {
            let n = d.w.prec().ok_or_else(|| {
                Error::Precondition("inverse of an exact Laurent polynomial with a nontrivial series factor needs a precision; truncate first".into())
            })?;
            out = out.mul(&hs_inv(&d.w, n)?.to_laurent())?;
        }
        Ok(out)
    }

    /// Truncates to precision `n` before inverting when needed.
    pub fn inv_to(&self, n: i32) -> Result<HLaurent> {
        match self.inv() {
            Err(Error::Precondition(_)) => self.truncate(n).inv(),
            r => r,
        }
    }
}

impl fmt::Display for HLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (&i, c) in &self.coeffs {
            let cs = if c.num_terms() > 1 { format!("({c})") } else { c.to_string() };
            parts.push(match i {
                0 => cs,
                1 => format!("{cs}*h"),
                _ => format!("{cs}*h^{i}"),
            });
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        if let Some(n) = self.prec {
            parts.push(format!("O(h^{n})"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Unit criterion: some coefficient is a unit and all lower ones are
/// nilpotent. Only the known window is inspected.
pub fn laurent_is_unit(u: &HLaurent) -> Result<bool> {
    // the first non-nilpotent coefficient decides
    if u.coeffs.values().any(|c| c.is_unit()) {
        return Ok(true);
    }
    match u.prec {
        None => Ok(false),
        Some(n) => Err(Error::Undecidable(format!("no unit coefficient below h^{n}"))),
    }
}

/// `u = r · w · h^m · ŵ`.
#[derive(Clone, Debug)]
pub struct UnitDecomp {
    pub r: CRElem,
    pub w: HSeries,
    pub m: i32,
    pub w_hat: HLaurent,
}

impl UnitDecomp {
    pub fn recompose(&self) -> Result<HLaurent> {
        self.w.to_laurent().shift(self.m).scale(&self.r).mul(&self.w_hat)
    }

    /// ŵ⁻¹ as a finite sum (ŵ − 1 is nilpotent).
    pub fn w_hat_inverse(&self) -> Result<HLaurent> {
        nilpotent_unit_inverse(&self.w_hat)
    }
}

/// Inverse of 1 + n for n with nilpotent coefficients and no precision loss
/// beyond what the product tracking reports.
fn nilpotent_unit_inverse(u: &HLaurent) -> Result<HLaurent> {
    let one = HLaurent::one(&u.ring);
    let n = u.sub(&one)?;
    if n.coeffs.values().any(|c| c.is_unit()) {
        return Err(Error::Precondition("expected 1 + nilpotent".into()));
    }
    let q = n.neg();
    let mut acc = one.clone();
    let mut term = one;
    for _ in 0..=u.ring.nil_index() {
        term = term.mul(&q)?;
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term)?;
    }
    Err(Error::Precondition("nilpotent part did not vanish".into()))
}

/// Decomposition of a Laurent unit into constant, series, power of h and
/// polar factors.
pub fn laurent_unit_decompose(u: &HLaurent) -> Result<UnitDecomp> {
    if !laurent_is_unit(u)? {
        return Err(Error::NotInvertible(format!("{u} is not a Laurent unit")));
    }
    let ring = u.ring.clone();
    let m = u.coeffs.iter().find(|(_, c)| c.is_unit()).map(|(&i, _)| i).unwrap();
    let x0 = u.shift(-m);
    let mut w_hat = HLaurent::one(&ring);
    let max_pole = (-x0.valuation().unwrap_or(0)).max(0) as u32;
    let bound = (max_pole + 2) * (ring.nil_index() + 2) + 8;
    for _ in 0..bound {
        let x = x0.mul(&nilpotent_unit_inverse(&w_hat)?)?;
        let polar = x.polar_part();
        let c = x.coeff(0)?;
        if polar.is_zero() {
            let ci = c.inv()?;
            let w = x.regular_part().scale(&ci);
            let series = HSeries::new(
                &ring,
                (0..=w.top_index().unwrap_or(0)).map(|i| w.coeff(i)).collect::<Result<_>>()?,
                w.prec.map(|n| n.max(1) as usize),
            )?;
            return Ok(UnitDecomp { r: c, w: series, m, w_hat });
        }
        let step = HLaurent::one(&ring).add(&polar.scale(&c.inv()?))?;
        w_hat = w_hat.mul(&step)?;
    }
    Err(Error::Precondition("unit decomposition did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eps_ring() -> CoeffRing {
        CoeffRing::new(3, &[("eps", 3)]).unwrap()
    }

    #[test]
    fn cap_reduction() {
        let r = eps_ring();
        let e = r.gen(0);
        assert!((&e * &e.pow(2)).is_zero());
        let a = &r.one() + &e;
        let b = &r.one() - &e;
        assert_eq!(&a * &b, &r.one() - &e.pow(2));
        // freshman's dream: (1+eps)^3 = 1 + eps^3 = 1
        assert_eq!(a.pow(3), r.one());
    }

    #[test]
    fn ring_mismatch_is_reported() {
        let r1 = eps_ring();
        let r2 = CoeffRing::new(3, &[("tau", 3)]).unwrap();
        assert!(matches!(cr_arith(&r1.gen(0), &r2.gen(0), ArithOp::Add), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn unit_inverse() {
        let r = CoeffRing::new(5, &[("a", 3), ("b", 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let u = r.random_unit(&mut rng);
            assert!((&u * &u.inv().unwrap()).is_one());
        }
        assert!(r.gen(0).inv().is_err());
    }

    #[test]
    fn series_inverse_geometric() {
        let r = CoeffRing::field(3).unwrap();
        let u = HSeries::new(&r, vec![r.one(), r.one()], None).unwrap();
        let inv = hs_inv(&u, 3).unwrap();
        let want: Vec<CRElem> = vec![r.one(), r.constant(2), r.one()];
        assert_eq!(inv.coeffs(), &want[..]);
        assert_eq!(inv.prec(), Some(3));
        let e = eps_ring();
        let s = HSeries::from_constant(&e.gen(0), None);
        assert!(hs_inv(&s, 3).is_err());
    }

    #[test]
    fn laurent_window_reads() {
        let r = eps_ring();
        let a = HLaurent::h_pow(&r, -1).add(&HLaurent::one(&r)).unwrap().truncate(4);
        assert!(a.coeff(3).is_ok());
        assert!(matches!(a.coeff(4), Err(Error::OutsideWindow { .. })));
        assert!(a.coeff(-5).unwrap().is_zero());
        // product precision drops by the pole order of the other factor
        let b = a.mul(&a).unwrap();
        assert_eq!(b.prec(), Some(3));
        assert!(HLaurent::h_pow(&r, -3).with_floor(-2).is_err());
    }

    #[test]
    fn unit_criterion_examples() {
        let r = eps_ring();
        let eps = r.gen(0);
        let u = HLaurent::monomial(&eps, -1).add(&HLaurent::one(&r)).unwrap();
        assert!(laurent_is_unit(&u).unwrap());
        assert!(!laurent_is_unit(&HLaurent::zero(&r)).unwrap());
        let v = HLaurent::constant(&eps).add(&HLaurent::monomial(&eps, 1)).unwrap();
        assert!(!laurent_is_unit(&v).unwrap());
        assert!(laurent_is_unit(&v.truncate(3)).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let r = eps_ring();
        let eps = r.gen(0);
        let d = laurent_unit_decompose(&HLaurent::h_pow(&r, 1)).unwrap();
        assert!(d.r.is_one() && d.w.is_one() && d.m == 1 && d.w_hat.is_one());

        let w_hat = HLaurent::one(&r).add(&HLaurent::monomial(&eps, -1)).unwrap();
        let d = laurent_unit_decompose(&w_hat).unwrap();
        assert!(d.r.is_one() && d.w.is_one() && d.m == 0);
        assert_eq!(d.w_hat, w_hat);

        let two_h = HLaurent::constant(&r.constant(2)).add(&HLaurent::h_pow(&r, 1)).unwrap();
        let u = two_h.mul(&w_hat).unwrap().shift(2);
        let d = laurent_unit_decompose(&u).unwrap();
        assert_eq!(d.r, r.constant(2));
        assert_eq!(d.m, 2);
        // 2^{-1} = 2 in F_3
        assert_eq!(d.w.coeffs(), &[r.one(), r.constant(2)][..]);
        assert_eq!(d.w_hat, w_hat);
        assert_eq!(d.recompose().unwrap(), u);
    }

    #[test]
    fn flip_h_is_involutive() {
        let r = eps_ring();
        let a = HLaurent::from_coeffs(&r, -2, None, vec![(-1, r.gen(0)), (1, r.one())]).unwrap();
        assert_eq!(a.flip_h().coeff(1).unwrap(), r.constant(2));
        assert_eq!(a.flip_h().flip_h(), a);
    }

    #[test]
    fn embedding_and_substitution() {
        let small = CoeffRing::new(5, &[("t", 5)]).unwrap();
        let big = CoeffRing::new(5, &[("s", 5), ("t", 5)]).unwrap();
        let t = small.gen(0);
        let e = (&t * &t).embed(&big).unwrap();
        assert_eq!(e, big.monomial(&[0, 2], 1));
        // t -> s + t
        let img = &big.gen(0) + &big.gen(1);
        let sq = (&t * &t).subst(&[img.clone()]).unwrap();
        assert_eq!(sq, &img * &img);
    }
}
