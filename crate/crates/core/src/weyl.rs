//! The restricted Weyl algebra A_h and the flat algebra A_h^♭ in PBW normal
//! form.
//!
//! Both are handled as m pairs (P_i, D_i) with D_i P_j − P_j D_i = δ_ij h and
//! P_i^p = D_i^p = 0. For A_h the pairs are (x_i, y_i); for A_h^♭ they are
//! (x_i, v_i) and (y_i, u_i), so the normal order is x, y, v, u. Coefficients
//! are Laurent series in h over a [`CoeffRing`]; an element lies in A_h
//! proper when no coefficient has a pole.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::coeff::{CRElem, CoeffRing, HLaurent};
use crate::fp;
use crate::poisson::{exps_to_index, A0Elem};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// A_h on x_i, y_i.
    Standard,
    /// A_h^♭ on x_i, y_i, v_i, u_i.
    Flat,
}

#[derive(Debug, PartialEq, Eq)]
struct AlgDesc {
    p: u32,
    n: usize,
    flavor: Flavor,
    ring: CoeffRing,
    floor: i32,
    // D P − P D = sign · h
    sign: i64,
}

/// Parameters of a Weyl algebra; cheap to clone.
#[derive(Clone, Debug)]
pub struct WeylAlg(Arc<AlgDesc>);

impl PartialEq for WeylAlg {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0 == o.0
    }
}

impl Eq for WeylAlg {}

/// Default Laurent floor −(2n+2)(p−1)/2 − 1.
pub fn default_floor(p: u32, n: usize) -> i32 {
    -((2 * n as i32 + 2) * (p as i32 - 1) / 2) - 1
}

impl WeylAlg {
    pub fn new(p: u32, n: usize, flavor: Flavor, ring: &CoeffRing) -> Result<WeylAlg> {
        if ring.p() != p {
            return Err(Error::RingMismatch(format!("coefficient ring over F_{} for p = {p}", ring.p())));
        }
        let m = match flavor {
            Flavor::Standard => n,
            Flavor::Flat => 2 * n,
        };
        if n == 0 || 2 * m > 16 {
            return Err(Error::Config(format!("n = {n} unsupported for {flavor:?}")));
        }
        Ok(WeylAlg(Arc::new(AlgDesc { p, n, flavor, ring: ring.clone(), floor: default_floor(p, n), sign: 1 })))
    }

    pub fn standard(p: u32, n: usize, ring: &CoeffRing) -> Result<WeylAlg> {
        WeylAlg::new(p, n, Flavor::Standard, ring)
    }

    pub fn flat(p: u32, n: usize, ring: &CoeffRing) -> Result<WeylAlg> {
        WeylAlg::new(p, n, Flavor::Flat, ring)
    }

    /// Same algebra with another pole floor.
    pub fn with_floor(&self, floor: i32) -> WeylAlg {
        WeylAlg(Arc::new(AlgDesc { floor: floor.min(0), ring: self.0.ring.clone(), ..*self.0 }))
    }

    /// Same algebra with another coefficient ring.
    pub fn with_ring(&self, ring: &CoeffRing) -> WeylAlg {
        WeylAlg(Arc::new(AlgDesc { ring: ring.clone(), ..*self.0 }))
    }

    /// The algebra with the opposite commutator convention P D − D P = h.
    pub fn opposite_convention(&self) -> WeylAlg {
        WeylAlg(Arc::new(AlgDesc { sign: -self.0.sign, ring: self.0.ring.clone(), ..*self.0 }))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn flavor(&self) -> Flavor {
        self.0.flavor
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.0.ring
    }

    pub fn floor(&self) -> i32 {
        self.0.floor
    }

    pub fn sign(&self) -> i64 {
        self.0.sign
    }

    /// Number of (P, D) pairs.
    pub fn pairs(&self) -> usize {
        match self.0.flavor {
            Flavor::Standard => self.0.n,
            Flavor::Flat => 2 * self.0.n,
        }
    }

    /// Number of generators (2 · pairs).
    pub fn nvars(&self) -> usize {
        2 * self.pairs()
    }

    /// Generator names in normal order.
    pub fn var_names(&self) -> Vec<String> {
        let n = self.0.n;
        let mut names = Vec::new();
        let letters: &[char] = match self.0.flavor {
            Flavor::Standard => &['x', 'y'],
            Flavor::Flat => &['x', 'y', 'v', 'u'],
        };
        for &c in letters {
            for i in 1..=n {
                names.push(format!("{c}{i}"));
            }
        }
        names
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.var_names().iter().position(|v| v == name).ok_or_else(|| Error::UnknownGenerator(name.into()))
    }

    fn pack(&self, exps: &[u32]) -> Option<u64> {
        let mut k = 0u64;
        for (i, &e) in exps.iter().enumerate() {
            if e >= self.0.p {
                return None;
            }
            k |= (e as u64) << (4 * i);
        }
        Some(k)
    }

    pub fn unpack(&self, key: u64) -> Vec<u32> {
        (0..self.nvars()).map(|i| ((key >> (4 * i)) & 0xf) as u32).collect()
    }

    pub fn zero(&self) -> WeylElem {
        WeylElem { alg: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(&self) -> WeylElem {
        self.scalar(&HLaurent::one(self.ring()))
    }

    pub fn scalar(&self, c: &HLaurent) -> WeylElem {
        self.monomial(&vec![0; self.nvars()], c)
    }

    pub fn constant(&self, c: &CRElem) -> WeylElem {
        self.scalar(&HLaurent::constant(c))
    }

    /// h^k.
    pub fn h_pow(&self, k: i32) -> WeylElem {
        self.scalar(&HLaurent::h_pow(self.ring(), k))
    }

    pub fn monomial(&self, exps: &[u32], c: &HLaurent) -> WeylElem {
        let mut e = self.zero();
        if let Some(k) = self.pack(exps) {
            if !c.is_zero() {
                e.terms.insert(k, c.clone());
            }
        }
        e
    }

    /// The generator with index `j` in normal order.
    pub fn var(&self, j: usize) -> WeylElem {
        let mut e = vec![0; self.nvars()];
        e[j] = 1;
        self.monomial(&e, &HLaurent::one(self.ring()))
    }

    pub fn gen(&self, name: &str) -> Result<WeylElem> {
        Ok(self.var(self.var_index(name)?))
    }

    pub fn x(&self, i: usize) -> WeylElem {
        self.var(i)
    }

    pub fn y(&self, i: usize) -> WeylElem {
        self.var(self.0.n + i)
    }

    /// v_i (flat flavor only).
    pub fn v(&self, i: usize) -> WeylElem {
        assert_eq!(self.0.flavor, Flavor::Flat);
        self.var(2 * self.0.n + i)
    }

    /// u_i (flat flavor only).
    pub fn u(&self, i: usize) -> WeylElem {
        assert_eq!(self.0.flavor, Flavor::Flat);
        self.var(3 * self.0.n + i)
    }

    pub fn gens(&self) -> Vec<WeylElem> {
        (0..self.nvars()).map(|j| self.var(j)).collect()
    }

    /// All PBW monomials with coefficient 1.
    pub fn pbw_basis(&self) -> Vec<WeylElem> {
        let total = (self.0.p as usize).pow(self.nvars() as u32);
        (0..total)
            .map(|idx| {
                let mut e = Vec::with_capacity(self.nvars());
                let mut r = idx;
                for _ in 0..self.nvars() {
                    e.push((r % self.0.p as usize) as u32);
                    r /= self.0.p as usize;
                }
                self.monomial(&e, &HLaurent::one(self.ring()))
            })
            .collect()
    }

    /// Normal-ordered lift of an A₀ element (standard flavor).
    pub fn lift(&self, f: &A0Elem) -> Result<WeylElem> {
        if self.0.flavor != Flavor::Standard || f.n() != self.0.n {
            return Err(Error::Config("lift needs the standard flavor with matching n".into()));
        }
        let mut out = self.zero();
        for (e, c) in f.terms() {
            let c = c.embed(self.ring())?;
            out = out.add(&self.monomial(&e, &HLaurent::constant(&c)))?;
        }
        Ok(out)
    }

    /// `D^β P^γ` as a list of (h-power, coefficient, P-exps, D-exps).
    fn reorder(&self, beta: &[u32], gamma: &[u32]) -> Vec<(i32, u32, Vec<u32>, Vec<u32>)> {
        let p = self.0.p;
        let sign = fp::reduce(self.0.sign, p);
        let mut acc: Vec<(i32, u32, Vec<u32>, Vec<u32>)> = vec![(0, 1, Vec::new(), Vec::new())];
        for (&b, &g) in beta.iter().zip(gamma) {
            let mut next = Vec::new();
            for (hk, c, ps, ds) in &acc {
                for k in 0..=b.min(g) {
                    // k! C(b,k) C(g,k) (sign h)^k
                    let coef = fp::mul(
                        fp::mul(fp::factorial(k, p), fp::binomial(b, k, p), p),
                        fp::mul(fp::binomial(g, k, p), fp::pow(sign, k as u64, p), p),
                        p,
                    );
                    if coef == 0 {
                        continue;
                    }
                    let mut ps = ps.clone();
                    let mut ds = ds.clone();
                    ps.push(g - k);
                    ds.push(b - k);
                    next.push((hk + k as i32, fp::mul(*c, coef, p), ps, ds));
                }
            }
            acc = next;
        }
        acc
    }
}

/// Element of A_h / A_h^♭ (possibly with h-poles) in PBW normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElem {
    alg: WeylAlg,
    terms: BTreeMap<u64, HLaurent>,
}

/// Elements with poles; same representation.
pub type WeylLaurent = WeylElem;

impl WeylElem {
    pub fn alg(&self) -> &WeylAlg {
        &self.alg
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates `(exponents in normal order, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &HLaurent)> + '_ {
        self.terms.iter().map(|(&k, c)| (self.alg.unpack(k), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> HLaurent {
        self.alg.pack(exps).and_then(|k| self.terms.get(&k).cloned()).unwrap_or_else(|| HLaurent::zero(self.alg.ring()))
    }

    /// Lowest power of h over all coefficients.
    pub fn valuation(&self) -> Option<i32> {
        self.terms.values().filter_map(|c| c.valuation()).min()
    }

    /// No negative powers of h.
    pub fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    fn same(&self, o: &WeylElem) -> Result<()> {
        if self.alg != o.alg {
            return Err(Error::RingMismatch("Weyl algebras differ".into()));
        }
        Ok(())
    }

    fn insert(&mut self, key: u64, c: HLaurent) -> Result<()> {
        if c.is_zero() && c.is_exact() {
            return Ok(());
        }
        match self.terms.get_mut(&key) {
            Some(e) => {
                *e = e.add(&c)?;
                if e.is_zero() && e.is_exact() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
        Ok(())
    }

    fn check_floor(&self) -> Result<()> {
        let floor = self.alg.floor();
        if let Some(v) = self.valuation() {
            if v < floor {
                return Err(Error::PoleOverflow { order: -v, floor });
            }
        }
        Ok(())
    }

    pub fn add(&self, o: &WeylElem) -> Result<WeylElem> {
        self.same(o)?;
        let mut out = self.clone();
        for (&k, c) in &o.terms {
            out.insert(k, c.clone())?;
        }
        out.check_floor()?;
        Ok(out)
    }

    pub fn neg(&self) -> WeylElem {
        WeylElem { alg: self.alg.clone(), terms: self.terms.iter().map(|(&k, c)| (k, c.neg())).collect() }
    }

    pub fn sub(&self, o: &WeylElem) -> Result<WeylElem> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &CRElem) -> WeylElem {
        let mut out = self.alg.zero();
        for (&k, a) in &self.terms {
            let v = a.scale(c);
            if !(v.is_zero() && v.is_exact()) {
                out.terms.insert(k, v);
            }
        }
        out
    }

    pub fn scale_laurent(&self, c: &HLaurent) -> Result<WeylElem> {
        let mut out = self.alg.zero();
        for (&k, a) in &self.terms {
            out.insert(k, a.mul(c)?)?;
        }
        out.check_floor()?;
        Ok(out)
    }

    /// Multiplies by h^k.
    pub fn shift(&self, k: i32) -> Result<WeylElem> {
        let out = WeylElem { alg: self.alg.clone(), terms: self.terms.iter().map(|(&key, c)| (key, c.shift(k))).collect() };
        out.check_floor()?;
        Ok(out)
    }

    /// Divides by h^k, requiring valuation ≥ k.
    pub fn div_h(&self, k: i32) -> Result<WeylElem> {
        if let Some(v) = self.valuation() {
            if v < k {
                return Err(Error::NotDivisible(v));
            }
        }
        self.shift(-k)
    }

    pub fn mul(&self, o: &WeylElem) -> Result<WeylElem> {
        self.same(o)?;
        let alg = &self.alg;
        let m = alg.pairs();
        let p = alg.p();
        let mut out = alg.zero();
        let mut cache: BTreeMap<(u64, u64), Vec<(i32, u32, Vec<u32>, Vec<u32>)>> = BTreeMap::new();
        for (&ka, ca) in &self.terms {
            let ea = alg.unpack(ka);
            for (&kb, cb) in &o.terms {
                let eb = alg.unpack(kb);
                let beta_key = ka >> (4 * m);
                let gamma_key = kb & ((1u64 << (4 * m)) - 1);
                let moves = cache
                    .entry((beta_key, gamma_key))
                    .or_insert_with(|| alg.reorder(&ea[m..], &eb[..m]));
                let cab = ca.mul(cb)?;
                for (hk, coef, ps, ds) in moves.iter() {
                    let mut e = vec![0u32; 2 * m];
                    let mut dead = false;
                    for i in 0..m {
                        e[i] = ea[i] + ps[i];
                        e[m + i] = ds[i] + eb[m + i];
                        if e[i] >= p || e[m + i] >= p {
                            dead = true;
                            break;
                        }
                    }
                    if dead {
                        continue;
                    }
                    let key = alg.pack(&e).unwrap();
                    out.insert(key, cab.shift(*hk).scale_fp(*coef))?;
                }
            }
        }
        out.check_floor()?;
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<WeylElem> {
        let mut acc = self.alg.one();
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// h ↦ −h on coefficients.
    pub fn flip_h(&self) -> WeylElem {
        WeylElem { alg: self.alg.clone(), terms: self.terms.iter().map(|(&k, c)| (k, c.flip_h())).collect() }
    }

    /// Coefficientwise map into another coefficient ring.
    pub fn map_coeffs(&self, alg: &WeylAlg, f: impl Fn(&CRElem) -> Result<CRElem>) -> Result<WeylElem> {
        let mut out = alg.zero();
        for (&k, c) in &self.terms {
            out.insert(k, c.map_coeffs(alg.ring(), &f)?)?;
        }
        Ok(out)
    }

    /// Moves coefficients into the ring of `alg` by generator names.
    pub fn embed(&self, alg: &WeylAlg) -> Result<WeylElem> {
        let ring = alg.ring().clone();
        self.map_coeffs(alg, |c| c.embed(&ring))
    }

    /// Applies the algebra map sending generator j to `images[j]`.
    pub fn eval_hom(&self, images: &[WeylElem]) -> Result<WeylElem> {
        assert_eq!(images.len(), self.alg.nvars());
        let target = images[0].alg.clone();
        let p = self.alg.p() as usize;
        let mut powers: Vec<Vec<WeylElem>> = Vec::new();
        for img in images {
            let mut pw = vec![target.one()];
            for _ in 1..p {
                let next = pw.last().unwrap().mul(img)?;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = target.zero();
        for (e, c) in self.terms() {
            let c = c.map_coeffs(target.ring(), |a| a.embed(target.ring()))?;
            let mut t = target.scalar(&c);
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[j][k as usize])?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Reduction mod h of an integral element of A_h, as an A₀ element.
    pub fn mod_h(&self) -> Result<A0Elem> {
        if self.alg.flavor() != Flavor::Standard {
            return Err(Error::Config("mod_h to A0 needs the standard flavor".into()));
        }
        if !self.is_integral() {
            return Err(Error::NotDivisible(self.valuation().unwrap_or(0)));
        }
        let (ring, n, p) = (self.alg.ring().clone(), self.alg.n(), self.alg.p());
        let mut coeffs = vec![ring.zero(); crate::poisson::a0_dim(p, n)];
        for (e, c) in self.terms() {
            coeffs[exps_to_index(&e, p)] = c.coeff(0)?;
        }
        Ok(A0Elem::from_coeffs(&ring, n, coeffs))
    }

    /// Truncates every coefficient at h^k.
    pub fn truncate(&self, k: i32) -> WeylElem {
        let mut out = self.alg.zero();
        for (&key, c) in &self.terms {
            let t = c.truncate(k);
            if !t.is_zero() {
                out.terms.insert(key, t.with_floor(c.floor()).unwrap_or(t));
            }
        }
        out
    }

    /// Equality after discarding everything from h^k on.
    pub fn eq_mod_h(&self, o: &WeylElem, k: i32) -> Result<bool> {
        let d = self.sub(o)?;
        Ok(d.terms.values().all(|c| c.terms().all(|(i, _)| i >= k)))
    }
}

impl fmt::Display for WeylElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.alg.var_names();
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let mut factors = Vec::new();
            for (name, &k) in names.iter().zip(&e) {
                match k {
                    0 => {}
                    1 => factors.push(name.clone()),
                    _ => factors.push(format!("{name}^{k}")),
                }
            }
            let cs = format!("[{c}]");
            parts.push(if factors.is_empty() { cs } else { format!("{cs}*{}", factors.join("*")) });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// PBW product.
pub fn w_mul(a: &WeylElem, b: &WeylElem) -> Result<WeylElem> {
    a.mul(b)
}

/// ab − ba.
pub fn w_commutator(a: &WeylElem, b: &WeylElem) -> Result<WeylElem> {
    a.mul(b)?.sub(&b.mul(a)?)
}

/// f̃^p.
pub fn w_pth_power(f: &WeylElem) -> Result<WeylElem> {
    f.pow(f.alg.p())
}

/// The anti-involution fixing every generator and sending h to −h, i.e.
/// α: A_{−h}^{op} → A_h. On a normal-ordered monomial it reverses the word.
pub fn op_involution(f: &WeylElem) -> Result<WeylElem> {
    let alg = f.alg.clone();
    let m = alg.pairs();
    let mut out = alg.zero();
    for (e, c) in f.terms() {
        let mut ds = vec![0; 2 * m];
        let mut ps = vec![0; 2 * m];
        ds[m..].copy_from_slice(&e[m..]);
        ps[..m].copy_from_slice(&e[..m]);
        let one = HLaurent::one(alg.ring());
        let rev = alg.monomial(&ds, &one).mul(&alg.monomial(&ps, &one))?;
        out = out.add(&rev.scale_laurent(&c.flip_h())?)?;
    }
    Ok(out)
}

fn exp_sum(f: &WeylElem, tau: &CRElem, top: u32) -> Result<WeylElem> {
    let alg = f.alg.clone();
    let p = alg.p();
    let tf = f.scale(&tau.embed(alg.ring())?);
    let mut out = alg.one();
    let mut power = alg.one();
    for i in 1..=top {
        power = power.mul(&tf)?;
        if power.is_zero() {
            break;
        }
        let c = fp::inv(fp::factorial(i, p), p);
        out = out.add(&power.shift(-(i as i32))?.scale(&alg.ring().constant(c as i64)))?;
    }
    Ok(out)
}

/// e^{τf/h} = Σ_{i ≤ (p−1)/2} (τf)^i / (h^i i!), for f^{(p+1)/2} = 0.
pub fn restricted_exp(f: &WeylElem, tau: &CRElem) -> Result<WeylElem> {
    let p = f.alg.p();
    if !f.pow(p.div_ceil(2))?.is_zero() {
        return Err(Error::Precondition(format!("f^{} ≠ 0", p.div_ceil(2))));
    }
    exp_sum(f, tau, (p - 1) / 2)
}

/// e^{εf/h} = Σ_{i < p} (εf)^i / (h^i i!), for a parameter with ε^p = 0
/// (points of α_p).
pub fn alpha_exp(f: &WeylElem, eps: &CRElem) -> Result<WeylElem> {
    let p = f.alg.p();
    let e = eps.embed(f.alg.ring())?;
    if !e.pow(p as u64).is_zero() {
        return Err(Error::Precondition(format!("parameter {eps} has nonzero p-th power")));
    }
    exp_sum(f, eps, p - 1)
}

/// Outcome of the Ad = e^{ad} comparison.
#[derive(Clone, Debug)]
pub struct AdReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
    pub poles: Vec<String>,
}

impl AdReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.poles.is_empty()
    }
}

/// Σ_{i<p} ad_{τf}^i(g) / (h^i i!).
pub fn exp_ad(f: &WeylElem, tau: &CRElem, g: &WeylElem) -> Result<WeylElem> {
    let alg = f.alg.clone();
    let p = alg.p();
    let tf = f.scale(&tau.embed(alg.ring())?);
    let mut out = g.clone();
    let mut term = g.clone();
    for i in 1..p {
        term = w_commutator(&tf, &term)?;
        if term.is_zero() {
            break;
        }
        let c = fp::inv(fp::factorial(i, p), p);
        out = out.add(&term.shift(-(i as i32))?.scale(&alg.ring().constant(c as i64)))?;
    }
    Ok(out)
}

/// Compares Ad_{e^{τf/h}}(g) with e^{ad_{τf/h}}(g) on `basis` (default: all
/// PBW monomials) and checks that no conjugate acquires a pole.
pub fn ad_exp_check(f: &WeylElem, tau: &CRElem, basis: Option<&[WeylElem]>) -> Result<AdReport> {
    let e = restricted_exp(f, tau)?;
    let e_inv = restricted_exp(f, &-tau)?;
    let one = f.alg.one();
    let mut report = AdReport { checked: 0, mismatches: Vec::new(), poles: Vec::new() };
    if e.mul(&e_inv)? != one {
        report.mismatches.push("e^{τf/h} e^{-τf/h} ≠ 1".into());
    }
    let all;
    let basis = match basis {
        Some(b) => b,
        None => {
            all = f.alg.pbw_basis();
            &all
        }
    };
    for g in basis {
        let lhs = e.mul(g)?.mul(&e_inv)?;
        let rhs = exp_ad(f, tau, g)?;
        report.checked += 1;
        if lhs != rhs {
            report.mismatches.push(format!("g = {g}: Ad = {lhs}, e^ad = {rhs}"));
        }
        if !lhs.is_integral() {
            report.poles.push(format!("g = {g}: {lhs}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_alg(p: u32, n: usize) -> WeylAlg {
        WeylAlg::standard(p, n, &CoeffRing::field(p).unwrap()).unwrap()
    }

    #[test]
    fn basic_relations() {
        let a = std_alg(3, 1);
        let (x, y) = (a.x(0), a.y(0));
        let yx = y.mul(&x).unwrap();
        assert_eq!(yx, x.mul(&y).unwrap().add(&a.h_pow(1)).unwrap());
        assert!(x.pow(2).unwrap().mul(&x).unwrap().is_zero());
        assert_eq!(w_commutator(&y, &x).unwrap(), a.h_pow(1));
        assert!(w_commutator(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn cube_of_xy_at_3() {
        let a = std_alg(3, 1);
        let xy = a.x(0).mul(&a.y(0)).unwrap();
        // hand normal ordering: (xy)^3 = h^2 xy
        assert_eq!(xy.pow(3).unwrap(), xy.shift(2).unwrap());
        assert_eq!(w_pth_power(&a.x(0)).unwrap(), a.zero());
    }

    #[test]
    fn flat_relations() {
        let r = CoeffRing::field(5).unwrap();
        let a = WeylAlg::flat(5, 2, &r).unwrap();
        let h = a.h_pow(1);
        for i in 0..2 {
            for j in 0..2 {
                let d = if i == j { h.clone() } else { a.zero() };
                assert_eq!(w_commutator(&a.v(i), &a.x(j)).unwrap(), d);
                assert_eq!(w_commutator(&a.u(i), &a.y(j)).unwrap(), d);
                assert!(w_commutator(&a.v(i), &a.y(j)).unwrap().is_zero());
                assert!(w_commutator(&a.u(i), &a.x(j)).unwrap().is_zero());
                assert!(w_commutator(&a.v(i), &a.u(j)).unwrap().is_zero());
                assert!(w_commutator(&a.y(i), &a.x(j)).unwrap().is_zero());
            }
            for g in [a.x(i), a.y(i), a.v(i), a.u(i)] {
                assert!(g.pow(5).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn commutator_reduces_to_bracket() {
        let a = std_alg(5, 1);
        let r = a.ring().clone();
        let f = A0Elem::monomial_fp(&r, 1, &[2, 1], 1);
        let g = A0Elem::monomial_fp(&r, 1, &[0, 2], 1);
        let pb = crate::poisson::poisson_bracket(&f, &g).unwrap();
        let c = w_commutator(&a.lift(&f).unwrap(), &a.lift(&g).unwrap()).unwrap();
        assert_eq!(c.div_h(1).unwrap().mod_h().unwrap(), -&pb);
        let b = a.opposite_convention();
        let c = w_commutator(&b.lift(&f).unwrap(), &b.lift(&g).unwrap()).unwrap();
        assert_eq!(c.div_h(1).unwrap().mod_h().unwrap(), pb);
    }

    #[test]
    fn involution_examples() {
        let a = std_alg(3, 1);
        let x = a.x(0);
        let y = a.y(0);
        assert_eq!(op_involution(&x).unwrap(), x);
        // α(xy) = yx = xy + h and α(h) = −h
        let xy = x.mul(&y).unwrap();
        assert_eq!(op_involution(&xy).unwrap(), xy.add(&a.h_pow(1)).unwrap());
        let f = xy.add(&a.h_pow(1)).unwrap();
        assert_eq!(op_involution(&f).unwrap(), xy);
        assert_eq!(op_involution(&op_involution(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn exponential_examples() {
        let r = CoeffRing::new(5, &[("eps", 5), ("tau", 5)]).unwrap();
        let a = WeylAlg::standard(5, 1, &r).unwrap();
        let eps = r.gen(0);
        assert_eq!(restricted_exp(&a.zero(), &eps).unwrap(), a.one());
        let e = alpha_exp(&a.x(0), &eps).unwrap();
        let ei = alpha_exp(&a.x(0), &-&eps).unwrap();
        assert_eq!(e.mul(&ei).unwrap(), a.one());
        let x3 = a.x(0).pow(3).unwrap();
        assert!(restricted_exp(&x3, &r.gen(1)).is_ok());
        assert!(restricted_exp(&a.x(0), &r.gen(1)).is_err());
        // Ad_{e^{τx/h}}(y) = y − τ
        let ad = exp_ad(&a.x(0), &r.gen(1), &a.y(0)).unwrap();
        assert_eq!(ad, a.y(0).sub(&a.constant(&r.gen(1))).unwrap());
        assert_eq!(exp_ad(&a.x(0), &r.gen(1), &a.x(0)).unwrap(), a.x(0));
    }

    #[test]
    fn floor_is_enforced() {
        let a = std_alg(3, 1).with_floor(-2);
        assert!(a.h_pow(-2).is_integral() == false);
        assert!(a.h_pow(-2).mul(&a.h_pow(-1)).is_err());
    }
}
