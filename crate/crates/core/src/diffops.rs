//! Rees algebras of differential operators D_{Y,h} over truncated
//! coordinate rings, p-curvature, central reductions, the automorphisms φ_μ
//! and the action ψ of Aut(A₀) on A_h^♭.
//!
//! An operator is stored in normal form Σ h^k f(z) (h∂)^β with functions
//! on the left. (h∂_i)·f = f·(h∂_i) + h·∂_i f.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::autgrp::AutA0;
use crate::coeff::{CRElem, CoeffRing, HLaurent};
use crate::fp;
use crate::poisson::{exactness_class, A0Elem, KForm};
use crate::weyl::{WeylAlg, WeylElem};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordMode {
    /// A₀ = k[x, y]/(x_i^p, y_i^p) on 2n coordinates.
    Frobenius,
    /// k[z₁..z_m] with every monomial of total degree ≥ K treated as overflow.
    Window(u32),
}

#[derive(Debug, PartialEq, Eq)]
struct CoordDesc {
    p: u32,
    m: usize,
    mode: CoordMode,
    ring: CoeffRing,
}

/// A truncated coordinate ring with coefficients in a [`CoeffRing`].
#[derive(Clone, Debug)]
pub struct CoordRing(Arc<CoordDesc>);

impl PartialEq for CoordRing {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0 == o.0
    }
}

impl Eq for CoordRing {}

const BITS: usize = 8;

impl CoordRing {
    /// A₀ ⊗ R in n symplectic pairs, coordinates x₁..x_n, y₁..y_n.
    pub fn frobenius(n: usize, ring: &CoeffRing) -> Result<CoordRing> {
        if n == 0 || 2 * n > 64 / BITS {
            return Err(Error::Config(format!("n = {n} unsupported")));
        }
        Ok(CoordRing(Arc::new(CoordDesc { p: ring.p(), m: 2 * n, mode: CoordMode::Frobenius, ring: ring.clone() })))
    }

    /// R[z₁..z_m] truncated at total degree K.
    pub fn window(m: usize, k: u32, ring: &CoeffRing) -> Result<CoordRing> {
        if m == 0 || m > 64 / BITS || k == 0 || k > 255 {
            return Err(Error::Config(format!("window ring with m = {m}, K = {k} unsupported")));
        }
        Ok(CoordRing(Arc::new(CoordDesc { p: ring.p(), m, mode: CoordMode::Window(k), ring: ring.clone() })))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn nvars(&self) -> usize {
        self.0.m
    }

    pub fn mode(&self) -> CoordMode {
        self.0.mode
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.0.ring
    }

    fn pack(exps: &[u32]) -> u64 {
        exps.iter().enumerate().fold(0, |k, (i, &e)| k | (e as u64) << (BITS * i))
    }

    fn unpack(&self, key: u64) -> Vec<u32> {
        (0..self.0.m).map(|i| ((key >> (BITS * i)) & 0xff) as u32).collect()
    }

    pub fn zero(&self) -> CoordElem {
        CoordElem { ring: self.clone(), terms: BTreeMap::new(), overflow: false }
    }

    pub fn one(&self) -> CoordElem {
        self.constant(&self.ring().one())
    }

    pub fn constant(&self, c: &CRElem) -> CoordElem {
        self.monomial(&vec![0; self.0.m], c)
    }

    pub fn monomial(&self, exps: &[u32], c: &CRElem) -> CoordElem {
        let mut e = self.zero();
        e.add_term(exps, c.clone());
        e
    }

    pub fn var(&self, j: usize) -> CoordElem {
        let mut e = vec![0; self.0.m];
        e[j] = 1;
        self.monomial(&e, &self.ring().one())
    }

    pub fn from_a0(&self, f: &A0Elem) -> Result<CoordElem> {
        if self.0.mode != CoordMode::Frobenius || f.n() * 2 != self.0.m {
            return Err(Error::Config("A₀ elements embed only in the Frobenius mode".into()));
        }
        let mut out = self.zero();
        for (e, c) in f.terms() {
            out.add_term(&e, c.embed(self.ring())?);
        }
        Ok(out)
    }
}

/// Element of a [`CoordRing`]. The overflow flag is sticky.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordElem {
    ring: CoordRing,
    terms: BTreeMap<u64, CRElem>,
    overflow: bool,
}

impl CoordElem {
    pub fn ring(&self) -> &CoordRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    /// Errors if some degree beyond the window was dropped.
    pub fn checked(self) -> Result<CoordElem> {
        match (self.overflow, self.ring.mode()) {
            (true, CoordMode::Window(k)) => Err(Error::Overflow(k)),
            _ => Ok(self),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &CRElem)> + '_ {
        self.terms.iter().map(|(&k, c)| (self.ring.unpack(k), c))
    }

    pub fn to_a0(&self) -> Result<A0Elem> {
        if self.ring.mode() != CoordMode::Frobenius {
            return Err(Error::Config("only Frobenius-mode elements convert to A₀".into()));
        }
        let n = self.ring.nvars() / 2;
        let mut out = A0Elem::zero(self.ring.ring(), n);
        for (e, c) in self.terms() {
            out = out.checked_add(&A0Elem::monomial(self.ring.ring(), n, &e, c))?;
        }
        Ok(out)
    }

    fn add_term(&mut self, exps: &[u32], c: CRElem) {
        if c.is_zero() {
            return;
        }
        match self.ring.mode() {
            CoordMode::Frobenius => {
                if exps.iter().any(|&e| e >= self.ring.p()) {
                    return;
                }
            }
            CoordMode::Window(k) => {
                if exps.iter().sum::<u32>() >= k {
                    self.overflow = true;
                    return;
                }
            }
        }
        let key = CoordRing::pack(exps);
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    pub fn add(&self, o: &CoordElem) -> CoordElem {
        assert_eq!(self.ring, o.ring, "coordinate ring mismatch");
        let mut out = self.clone();
        out.overflow |= o.overflow;
        for (e, c) in o.terms() {
            out.add_term(&e, c.clone());
        }
        out
    }

    pub fn neg(&self) -> CoordElem {
        CoordElem { terms: self.terms.iter().map(|(&k, c)| (k, -c)).collect(), ..self.clone() }
    }

    pub fn sub(&self, o: &CoordElem) -> CoordElem {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &CoordElem) -> CoordElem {
        assert_eq!(self.ring, o.ring, "coordinate ring mismatch");
        let mut out = self.ring.zero();
        out.overflow = self.overflow || o.overflow;
        for (ea, ca) in self.terms() {
            for (eb, cb) in o.terms() {
                let e: Vec<u32> = ea.iter().zip(&eb).map(|(a, b)| a + b).collect();
                out.add_term(&e, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &CRElem) -> CoordElem {
        let mut out = self.ring.zero();
        out.overflow = self.overflow;
        for (e, a) in self.terms() {
            out.add_term(&e, a * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> CoordElem {
        let mut acc = self.ring.one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// ∂/∂z_j.
    pub fn partial(&self, j: usize) -> CoordElem {
        let p = self.ring.p();
        let mut out = self.ring.zero();
        out.overflow = self.overflow;
        for (mut e, c) in self.terms() {
            let k = e[j];
            if k % p == 0 {
                continue;
            }
            e[j] -= 1;
            out.add_term(&e, c.scale(k % p));
        }
        out
    }
}

impl fmt::Display for CoordElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let mut s = if c.num_terms() > 1 { format!("({c})") } else { c.to_string() };
            for (j, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => s.push_str(&format!("*z{}", j + 1)),
                    _ => s.push_str(&format!("*z{}^{k}", j + 1)),
                }
            }
            parts.push(s);
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        if self.overflow {
            parts.push("<overflow>".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, PartialEq, Eq)]
struct DDesc {
    coord: CoordRing,
    // (h∂_i)^p = h^p · rel[i] in a central reduction
    relations: Option<Vec<CoordElem>>,
}

/// D_{C,h}, or its central reduction when relations are present.
#[derive(Clone, Debug)]
pub struct DAlg(Arc<DDesc>);

impl PartialEq for DAlg {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0 == o.0
    }
}

impl Eq for DAlg {}

impl DAlg {
    pub fn new(coord: &CoordRing) -> DAlg {
        DAlg(Arc::new(DDesc { coord: coord.clone(), relations: None }))
    }

    pub fn coord(&self) -> &CoordRing {
        &self.0.coord
    }

    pub fn is_reduced(&self) -> bool {
        self.0.relations.is_some()
    }

    pub fn nvars(&self) -> usize {
        self.0.coord.nvars()
    }

    pub fn zero(&self) -> DOp {
        DOp { alg: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> DOp {
        self.function(&self.0.coord.one())
    }

    pub fn function(&self, f: &CoordElem) -> DOp {
        self.term(0, &vec![0; self.nvars()], f)
    }

    pub fn constant(&self, c: &CRElem) -> DOp {
        self.function(&self.0.coord.constant(c))
    }

    /// h^k · f · (h∂)^β.
    pub fn term(&self, k: u32, beta: &[u32], f: &CoordElem) -> DOp {
        let mut out = self.zero();
        out.add_term(k, beta, f.clone());
        out
    }

    pub fn h(&self) -> DOp {
        self.term(1, &vec![0; self.nvars()], &self.0.coord.one())
    }

    /// The coordinate z_j.
    pub fn z(&self, j: usize) -> DOp {
        self.function(&self.0.coord.var(j))
    }

    /// h∂_j.
    pub fn d(&self, j: usize) -> DOp {
        let mut b = vec![0; self.nvars()];
        b[j] = 1;
        self.term(0, &b, &self.0.coord.one())
    }

    /// z₁..z_m followed by h∂₁..h∂_m.
    pub fn gens(&self) -> Vec<DOp> {
        let m = self.nvars();
        (0..m).map(|j| self.z(j)).chain((0..m).map(|j| self.d(j))).collect()
    }
}

/// Quotient of D_{C,h} by (h∂_i)^p − h^p η_i^p, η = Σ η_i dz_i.
pub fn central_reduce(coord: &CoordRing, eta: &[CoordElem]) -> Result<DAlg> {
    if eta.len() != coord.nvars() {
        return Err(Error::Config("η needs one component per coordinate".into()));
    }
    let p = coord.p();
    let rel = eta.iter().map(|e| e.pow(p).checked()).collect::<Result<Vec<_>>>()?;
    Ok(DAlg(Arc::new(DDesc { coord: coord.clone(), relations: Some(rel) })))
}

/// Differential operator in normal form Σ h^k f_{k,β} (h∂)^β.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DOp {
    alg: DAlg,
    // (packed β, h power)
    terms: BTreeMap<(u64, u32), CoordElem>,
}

impl DOp {
    pub fn alg(&self) -> &DAlg {
        &self.alg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn overflowed(&self) -> bool {
        self.terms.values().any(|f| f.overflowed())
    }

    pub fn checked(self) -> Result<DOp> {
        if let (true, CoordMode::Window(k)) = (self.overflowed(), self.alg.coord().mode()) {
            return Err(Error::Overflow(k));
        }
        Ok(self)
    }

    /// Iterates `(h power, β, coefficient function)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, Vec<u32>, &CoordElem)> + '_ {
        self.terms.iter().map(|(&(b, k), f)| (k, self.alg.coord().unpack(b), f))
    }

    fn add_term(&mut self, k: u32, beta: &[u32], f: CoordElem) {
        if f.is_zero() && !f.overflowed() {
            return;
        }
        if let Some(rel) = &self.alg.0.relations {
            let p = self.alg.coord().p();
            if let Some(i) = beta.iter().position(|&b| b >= p) {
                let mut b = beta.to_vec();
                b[i] -= p;
                let g = f.mul(&rel[i]);
                self.add_term(k + p, &b, g);
                return;
            }
        }
        let key = (CoordRing::pack(beta), k);
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v = v.add(&f);
                if v.is_zero() && !v.overflowed() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, f);
            }
        }
    }

    fn same(&self, o: &DOp) {
        assert_eq!(self.alg, o.alg, "operators from different algebras");
    }

    pub fn add(&self, o: &DOp) -> DOp {
        self.same(o);
        let mut out = self.clone();
        for (k, b, f) in o.terms() {
            out.add_term(k, &b, f.clone());
        }
        out
    }

    pub fn neg(&self) -> DOp {
        DOp { alg: self.alg.clone(), terms: self.terms.iter().map(|(&k, f)| (k, f.neg())).collect() }
    }

    pub fn sub(&self, o: &DOp) -> DOp {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CRElem) -> DOp {
        let mut out = self.alg.zero();
        for (k, b, f) in self.terms() {
            out.add_term(k, &b, f.scale(c));
        }
        out
    }

    /// Multiplies by h^k.
    pub fn shift(&self, k: u32) -> DOp {
        DOp { alg: self.alg.clone(), terms: self.terms.iter().map(|(&(b, j), f)| ((b, j + k), f.clone())).collect() }
    }

    /// Multiplies on the left by a function.
    pub fn mul_fn(&self, g: &CoordElem) -> DOp {
        let mut out = self.alg.zero();
        for (k, b, f) in self.terms() {
            out.add_term(k, &b, g.mul(f));
        }
        out
    }

    pub fn mul(&self, o: &DOp) -> DOp {
        self.same(o);
        let p = self.alg.coord().p();
        let m = self.alg.nvars();
        let mut out = self.alg.zero();
        for (k, beta, f) in self.terms() {
            for (l, gamma, g) in o.terms() {
                // (h∂)^β g = Σ_κ C(β,κ) h^{|κ|} (∂^κ g) (h∂)^{β−κ}
                let mut stack: Vec<(usize, Vec<u32>, u32, u32, CoordElem)> = vec![(0, Vec::new(), 0, 1, g.clone())];
                while let Some((i, kappa, hk, coef, dg)) = stack.pop() {
                    if i == m {
                        let b: Vec<u32> = (0..m).map(|j| beta[j] - kappa[j] + gamma[j]).collect();
                        out.add_term(k + l + hk, &b, f.mul(&dg).scale(&self.alg.coord().ring().constant(coef as i64)));
                        continue;
                    }
                    let mut cur = dg;
                    for kk in 0..=beta[i] {
                        if kk > 0 {
                            cur = cur.partial(i);
                        }
                        if cur.is_zero() && !cur.overflowed() {
                            break;
                        }
                        let c = fp::mul(coef, fp::binomial(beta[i], kk, p), p);
                        if c == 0 {
                            continue;
                        }
                        let mut kap = kappa.clone();
                        kap.push(kk);
                        stack.push((i + 1, kap, hk + kk, c, cur.clone()));
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> DOp {
        let mut acc = self.alg.one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Applies the algebra map z_j ↦ zi[j], h∂_j ↦ di[j].
    pub fn apply_hom(&self, zi: &[DOp], di: &[DOp]) -> DOp {
        let target = zi[0].alg.clone();
        let mut zpow: Vec<Vec<DOp>> = zi.iter().map(|z| vec![target.one(), z.clone()]).collect();
        let mut dpow: Vec<Vec<DOp>> = di.iter().map(|d| vec![target.one(), d.clone()]).collect();
        fn power(cache: &mut [Vec<DOp>], j: usize, e: u32) -> DOp {
            while cache[j].len() <= e as usize {
                let next = cache[j].last().unwrap().mul(&cache[j][1]);
                cache[j].push(next);
            }
            cache[j][e as usize].clone()
        }
        let mut out = target.zero();
        for (k, beta, f) in self.terms() {
            for (e, c) in f.terms() {
                let mut t = target.constant(&c.embed(target.coord().ring()).expect("coefficient ring"));
                for (j, &a) in e.iter().enumerate() {
                    if a > 0 {
                        t = t.mul(&power(&mut zpow, j, a));
                    }
                }
                for (j, &b) in beta.iter().enumerate() {
                    if b > 0 {
                        t = t.mul(&power(&mut dpow, j, b));
                    }
                }
                out = out.add(&t.shift(k));
            }
        }
        out
    }
}

impl fmt::Display for DOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, beta, g) in self.terms() {
            let mut s = format!("({g})");
            if k > 0 {
                s.push_str(&format!("*h^{k}"));
            }
            for (j, &b) in beta.iter().enumerate() {
                if b > 0 {
                    s.push_str(&format!("*D{}^{b}", j + 1));
                }
            }
            parts.push(s);
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

pub fn dop_mul(a: &DOp, b: &DOp) -> DOp {
    a.mul(b)
}

pub fn dop_commutator(a: &DOp, b: &DOp) -> DOp {
    a.mul(b).sub(&b.mul(a))
}

/// θ^{[p]} of θ = Σ a_k ∂_k, by p-fold application to coordinates.
pub fn field_restricted_power(theta: &[CoordElem]) -> Vec<CoordElem> {
    let coord = theta[0].ring().clone();
    let apply = |f: &CoordElem| -> CoordElem {
        theta.iter().enumerate().fold(coord.zero(), |acc, (k, a)| acc.add(&a.mul(&f.partial(k))))
    };
    (0..coord.nvars())
        .map(|j| {
            let mut f = coord.var(j);
            for _ in 0..coord.p() {
                f = apply(&f);
            }
            f
        })
        .collect()
}

/// hθ as an operator.
pub fn field_op(alg: &DAlg, theta: &[CoordElem]) -> DOp {
    theta.iter().enumerate().fold(alg.zero(), |acc, (k, a)| acc.add(&alg.d(k).mul_fn(a)))
}

/// (hθ)^p − h^{p−1}·hθ^{[p]}.
pub fn p_curvature(alg: &DAlg, theta: &[CoordElem]) -> Result<DOp> {
    let p = alg.coord().p();
    let ht = field_op(alg, theta);
    let tp = field_op(alg, &field_restricted_power(theta));
    ht.pow(p).sub(&tp.shift(p - 1)).checked()
}

/// f ↦ f^p.
pub fn p_curvature_fn(alg: &DAlg, f: &CoordElem) -> Result<DOp> {
    alg.function(&f.pow(alg.coord().p())).checked()
}

/// Commutes with every generator (exact; fails on overflow).
pub fn is_central(a: &DOp) -> Result<bool> {
    for g in a.alg.gens() {
        let c = dop_commutator(a, &g).checked()?;
        if !c.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An algebra endomorphism of a [`DAlg`] given on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DHom {
    pub z_images: Vec<DOp>,
    pub d_images: Vec<DOp>,
}

impl DHom {
    pub fn identity(alg: &DAlg) -> DHom {
        let m = alg.nvars();
        DHom { z_images: (0..m).map(|j| alg.z(j)).collect(), d_images: (0..m).map(|j| alg.d(j)).collect() }
    }

    pub fn apply(&self, a: &DOp) -> DOp {
        a.apply_hom(&self.z_images, &self.d_images)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &DHom) -> DHom {
        DHom {
            z_images: other.z_images.iter().map(|a| self.apply(a)).collect(),
            d_images: other.d_images.iter().map(|a| self.apply(a)).collect(),
        }
    }

    pub fn images(&self) -> Vec<DOp> {
        self.z_images.iter().chain(&self.d_images).cloned().collect()
    }

    /// Defining relations on the images: [D_i, Z_j] = hδ_ij, other pairs
    /// commute, and (in a reduction) D_i^p = h^p η_i^p. Returns failures.
    pub fn relation_failures(&self) -> Vec<String> {
        let alg = self.z_images[0].alg.clone();
        let m = alg.nvars();
        let mut bad = Vec::new();
        for i in 0..m {
            for j in 0..m {
                let want = if i == j { alg.h() } else { alg.zero() };
                if dop_commutator(&self.d_images[i], &self.z_images[j]) != want {
                    bad.push(format!("[D{}, Z{}]", i + 1, j + 1));
                }
                if !dop_commutator(&self.z_images[i], &self.z_images[j]).is_zero() {
                    bad.push(format!("[Z{}, Z{}]", i + 1, j + 1));
                }
                if !dop_commutator(&self.d_images[i], &self.d_images[j]).is_zero() {
                    bad.push(format!("[D{}, D{}]", i + 1, j + 1));
                }
            }
            if alg.is_reduced() {
                let p = alg.coord().p();
                let want = alg.d(i).pow(p);
                if self.d_images[i].pow(p) != want {
                    bad.push(format!("D{}^p", i + 1));
                }
            }
        }
        bad
    }
}

/// Components ι_{∂_i}μ of a 1-form over A₀ as coordinate functions.
fn form_components(coord: &CoordRing, mu: &KForm) -> Result<Vec<CoordElem>> {
    if mu.degree() != 1 {
        return Err(Error::Degree(format!("expected a 1-form, got degree {}", mu.degree())));
    }
    mu.components().iter().map(|f| coord.from_a0(f)).collect()
}

/// φ_μ: f ↦ f, h∂_i ↦ h∂_i + h·ι_{∂_i}μ, for exact μ over A₀.
pub fn phi_mu(alg: &DAlg, mu: &KForm) -> Result<DHom> {
    if exactness_class(mu)?.is_none() {
        return Err(Error::Precondition("μ is not exact".into()));
    }
    let comps = form_components(alg.coord(), mu)?;
    let mut hom = DHom::identity(alg);
    for (i, c) in comps.iter().enumerate() {
        hom.d_images[i] = alg.d(i).add(&alg.function(c).shift(1));
    }
    Ok(hom)
}

/// (h∂_i + h·μ_i)^p against (h∂_i)^p + h^p μ_i^p in the unreduced algebra,
/// for every i. Returns the indices where it fails.
pub fn katz_check(coord: &CoordRing, mu: &KForm) -> Result<Vec<usize>> {
    let alg = DAlg::new(coord);
    let p = coord.p();
    let comps = form_components(coord, mu)?;
    let mut bad = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        let lhs = alg.d(i).add(&alg.function(c).shift(1)).pow(p);
        let rhs = alg.d(i).pow(p).add(&alg.function(&c.pow(p)).shift(p));
        if lhs != rhs {
            bad.push(i);
        }
    }
    Ok(bad)
}

/// ψ_can,g: functions by g, h∂_j ↦ Σ_k g(∂_j g⁻¹(z_k))·h∂_k.
pub fn psi_can(alg: &DAlg, g: &AutA0) -> Result<DHom> {
    let coord = alg.coord().clone();
    let m = coord.nvars();
    let ginv = g.inverse()?;
    let mut hom = DHom::identity(alg);
    for k in 0..m {
        hom.z_images[k] = alg.function(&coord.from_a0(&g.images()[k])?);
    }
    for j in 0..m {
        let mut d = alg.zero();
        for k in 0..m {
            let a = g.apply(&ginv.images()[k].partial(j))?;
            d = d.add(&alg.d(k).mul_fn(&coord.from_a0(&a)?));
        }
        hom.d_images[j] = d;
    }
    Ok(hom)
}

/// ψ_g = φ_{g*η − η} ∘ ψ_can,g on the reduction of D_{A₀,h}.
pub fn psi_action(alg: &DAlg, g: &AutA0) -> Result<DHom> {
    let ring = alg.coord().ring().clone();
    let n = alg.nvars() / 2;
    let eta = KForm::eta(&ring, n);
    let mu = g.pullback(&eta)?.sub(&eta)?;
    let phi = phi_mu(alg, &mu)?;
    Ok(phi.compose(&psi_can(alg, g)?))
}

/// Reduction of D_{A₀,h} at η = Σ y_i dx_i (its relations agree with η = 0
/// since y_i^p = 0).
pub fn flat_reduction(n: usize, ring: &CoeffRing) -> Result<DAlg> {
    let coord = CoordRing::frobenius(n, ring)?;
    let mut eta = vec![coord.zero(); 2 * n];
    for i in 0..n {
        eta[i] = coord.var(n + i);
    }
    central_reduce(&coord, &eta)
}

/// x_i, y_i, v_i = h∂_{x_i}, u_i = h∂_{y_i}: the operator as an element of
/// the flat Weyl algebra (same normal order).
pub fn to_flat_weyl(a: &DOp, w: &WeylAlg) -> Result<WeylElem> {
    let mut out = w.zero();
    for (k, beta, f) in a.terms() {
        for (e, c) in f.terms() {
            let mut exps = e.clone();
            exps.extend(&beta);
            let coef = HLaurent::monomial(&c.embed(w.ring())?, k as i32);
            out = out.add(&w.monomial(&exps, &coef))?;
        }
    }
    Ok(out)
}

/// Checks that the generator dictionary respects all products of generator
/// pairs: returns the number of pairs checked and the failures.
pub fn flat_dictionary_check(n: usize, ring: &CoeffRing) -> Result<(usize, Vec<String>)> {
    let d = flat_reduction(n, ring)?;
    let w = WeylAlg::flat(ring.p(), n, ring)?;
    let gd = d.gens();
    let gw: Vec<WeylElem> = gd.iter().map(|g| to_flat_weyl(g, &w)).collect::<Result<_>>()?;
    let names = w.var_names();
    let mut bad = Vec::new();
    let mut count = 0;
    for (i, (a, aw)) in gd.iter().zip(&gw).enumerate() {
        if aw != &w.var(i) {
            bad.push(format!("generator {}", names[i]));
        }
        for (j, (b, bw)) in gd.iter().zip(&gw).enumerate() {
            count += 1;
            if to_flat_weyl(&a.mul(b), &w)? != aw.mul(bw)? {
                bad.push(format!("{}·{}", names[i], names[j]));
            }
        }
    }
    Ok((count, bad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leibniz_examples() {
        let r = CoeffRing::field(5).unwrap();
        let c = CoordRing::window(1, 15, &r).unwrap();
        let a = DAlg::new(&c);
        let (x, d) = (a.z(0), a.d(0));
        assert_eq!(d.mul(&x), x.mul(&d).add(&a.h()));
        let s = d.add(&x);
        let want = x.pow(2).add(&x.mul(&d).scale(&r.constant(2))).add(&d.pow(2)).add(&a.h());
        assert_eq!(s.mul(&s), want);
    }

    #[test]
    fn p_curvature_examples() {
        let r = CoeffRing::field(3).unwrap();
        let c = CoordRing::window(1, 9, &r).unwrap();
        let a = DAlg::new(&c);
        let pc = p_curvature(&a, &[c.one()]).unwrap();
        assert_eq!(pc, a.d(0).pow(3));
        assert!(is_central(&pc).unwrap());
        assert!(is_central(&p_curvature_fn(&a, &c.var(0)).unwrap()).unwrap());
        assert!(!is_central(&a.z(0).pow(2)).unwrap());
        let xd = [c.var(0)];
        assert_eq!(field_restricted_power(&xd), vec![c.var(0)]);
        assert!(is_central(&p_curvature(&a, &xd).unwrap()).unwrap());
    }

    #[test]
    fn window_overflow_is_reported() {
        let r = CoeffRing::field(3).unwrap();
        let c = CoordRing::window(1, 4, &r).unwrap();
        let a = DAlg::new(&c);
        assert!(matches!(p_curvature_fn(&a, &c.var(0).pow(2)), Err(Error::Overflow(4))));
    }

    #[test]
    fn window_relation_with_eta() {
        let r = CoeffRing::field(3).unwrap();
        let c = CoordRing::window(1, 9, &r).unwrap();
        let red = central_reduce(&c, &[c.var(0)]).unwrap();
        let want = red.function(&c.var(0).pow(3)).shift(3);
        assert_eq!(red.d(0).pow(3), want);
    }

    #[test]
    fn flat_dictionary() {
        let r = CoeffRing::field(3).unwrap();
        let (count, bad) = flat_dictionary_check(1, &r).unwrap();
        assert_eq!(count, 16);
        assert!(bad.is_empty(), "{bad:?}");
        // reduction at η = 0 has the same relations
        let coord = CoordRing::frobenius(1, &r).unwrap();
        let zero = central_reduce(&coord, &[coord.zero(), coord.zero()]).unwrap();
        let eta = flat_reduction(1, &r).unwrap();
        assert!(zero.d(0).pow(3).is_zero() && eta.d(0).pow(3).is_zero());
    }

    #[test]
    fn phi_of_d_xy() {
        let r = CoeffRing::field(5).unwrap();
        let alg = flat_reduction(1, &r).unwrap();
        let xy = A0Elem::monomial_fp(&r, 1, &[1, 1], 1);
        let mu = KForm::function(&xy).d().unwrap();
        let phi = phi_mu(&alg, &mu).unwrap();
        let c = alg.coord();
        assert_eq!(phi.d_images[0], alg.d(0).add(&alg.function(&c.var(1)).shift(1)));
        assert_eq!(phi.d_images[1], alg.d(1).add(&alg.function(&c.var(0)).shift(1)));
        assert!(phi.relation_failures().is_empty());
        assert!(katz_check(c, &mu).unwrap().is_empty());
        let x2 = A0Elem::monomial_fp(&r, 1, &[1, 0], 1);
        let not_exact = KForm::function(&x2).wedge(&KForm::dz(&r, 1, 1)).unwrap();
        assert!(phi_mu(&alg, &not_exact).is_err());
    }
}
