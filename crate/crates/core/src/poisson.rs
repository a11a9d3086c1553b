//! The truncated Poisson algebra A₀ = R[x_i, y_i]/(x_i^p, y_i^p), its
//! differential forms, Hamiltonian vector fields and restricted power.
//!
//! Coordinates are ordered z = (x_1..x_n, y_1..y_n). The bracket is
//! {f,g} = Σ ∂f/∂x_i ∂g/∂y_i − ∂f/∂y_i ∂g/∂x_i, so H_f(g) = {f,g},
//! ι_{H_f} ω = df for ω = Σ dy_i∧dx_i, and dη = ω for η = Σ y_i dx_i.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::{CRElem, CoeffRing};
use crate::fp;
use crate::{Error, Result};

/// Dense element of A₀ ⊗ R, indexed by exponent vectors in base p
/// (z_0 least significant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct A0Elem {
    n: usize,
    ring: CoeffRing,
    coeffs: Vec<CRElem>,
}

/// Number of monomials p^{2n}.
pub fn a0_dim(p: u32, n: usize) -> usize {
    (p as usize).pow(2 * n as u32)
}

pub fn index_to_exps(mut idx: usize, p: u32, m: usize) -> Vec<u32> {
    let mut e = Vec::with_capacity(m);
    for _ in 0..m {
        e.push((idx % p as usize) as u32);
        idx /= p as usize;
    }
    e
}

pub fn exps_to_index(exps: &[u32], p: u32) -> usize {
    exps.iter().rev().fold(0usize, |acc, &e| acc * p as usize + e as usize)
}

impl A0Elem {
    pub fn zero(ring: &CoeffRing, n: usize) -> A0Elem {
        A0Elem { n, ring: ring.clone(), coeffs: vec![ring.zero(); a0_dim(ring.p(), n)] }
    }

    pub fn constant(c: &CRElem, n: usize) -> A0Elem {
        let mut f = A0Elem::zero(c.ring(), n);
        f.coeffs[0] = c.clone();
        f
    }

    pub fn one(ring: &CoeffRing, n: usize) -> A0Elem {
        A0Elem::constant(&ring.one(), n)
    }

    /// `c · z^exps` where `exps` has length 2n (x's then y's).
    pub fn monomial(ring: &CoeffRing, n: usize, exps: &[u32], c: &CRElem) -> A0Elem {
        assert_eq!(exps.len(), 2 * n);
        let mut f = A0Elem::zero(ring, n);
        if exps.iter().all(|&e| e < ring.p()) {
            f.coeffs[exps_to_index(exps, ring.p())] = c.clone();
        }
        f
    }

    pub fn monomial_fp(ring: &CoeffRing, n: usize, exps: &[u32], c: i64) -> A0Elem {
        A0Elem::monomial(ring, n, exps, &ring.constant(c))
    }

    /// Coordinate function z_j.
    pub fn coord(ring: &CoeffRing, n: usize, j: usize) -> A0Elem {
        let mut e = vec![0; 2 * n];
        e[j] = 1;
        A0Elem::monomial_fp(ring, n, &e, 1)
    }

    /// x_i (0-based).
    pub fn x(ring: &CoeffRing, n: usize, i: usize) -> A0Elem {
        A0Elem::coord(ring, n, i)
    }

    /// y_i (0-based).
    pub fn y(ring: &CoeffRing, n: usize, i: usize) -> A0Elem {
        A0Elem::coord(ring, n, n + i)
    }

    /// u = Π x_i^{p-1} y_i^{p-1}, the socle generator.
    pub fn socle(ring: &CoeffRing, n: usize) -> A0Elem {
        A0Elem::monomial_fp(ring, n, &vec![ring.p() - 1; 2 * n], 1)
    }

    pub fn from_coeffs(ring: &CoeffRing, n: usize, coeffs: Vec<CRElem>) -> A0Elem {
        assert_eq!(coeffs.len(), a0_dim(ring.p(), n));
        A0Elem { n, ring: ring.clone(), coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[CRElem] {
        &self.coeffs
    }

    pub fn coeff(&self, exps: &[u32]) -> CRElem {
        if exps.iter().any(|&e| e >= self.p()) {
            return self.ring.zero();
        }
        self.coeffs[exps_to_index(exps, self.p())].clone()
    }

    pub fn constant_term(&self) -> &CRElem {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Iterates nonzero `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &CRElem)> + '_ {
        let (p, m) = (self.p(), 2 * self.n);
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(move |(i, c)| (index_to_exps(i, p, m), c))
    }

    fn same(&self, o: &A0Elem) -> Result<()> {
        if self.n != o.n || self.ring != o.ring {
            return Err(Error::RingMismatch(format!("A0 over {} (n={}) vs {} (n={})", self.ring, self.n, o.ring, o.n)));
        }
        Ok(())
    }

    pub fn checked_add(&self, o: &A0Elem) -> Result<A0Elem> {
        self.same(o)?;
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect();
        Ok(A0Elem { n: self.n, ring: self.ring.clone(), coeffs })
    }

    pub fn checked_mul(&self, o: &A0Elem) -> Result<A0Elem> {
        self.same(o)?;
        let (p, m) = (self.p(), 2 * self.n);
        let mut out = A0Elem::zero(&self.ring, self.n);
        let a: Vec<(Vec<u32>, &CRElem)> = self.terms().collect();
        let b: Vec<(Vec<u32>, &CRElem)> = o.terms().collect();
        let mut e = vec![0u32; m];
        for (ea, ca) in &a {
            'inner: for (eb, cb) in &b {
                for k in 0..m {
                    e[k] = ea[k] + eb[k];
                    if e[k] >= p {
                        continue 'inner;
                    }
                }
                let idx = exps_to_index(&e, p);
                out.coeffs[idx] = &out.coeffs[idx] + &(*ca * *cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &CRElem) -> A0Elem {
        A0Elem { n: self.n, ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn scale_i(&self, c: i64) -> A0Elem {
        A0Elem { n: self.n, ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|a| a.scale_i(c)).collect() }
    }

    pub fn pow(&self, e: u32) -> A0Elem {
        let mut acc = A0Elem::one(&self.ring, self.n);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// ∂/∂z_j.
    pub fn partial(&self, j: usize) -> A0Elem {
        let (p, m) = (self.p(), 2 * self.n);
        let mut out = A0Elem::zero(&self.ring, self.n);
        for (mut e, c) in self.terms() {
            if e[j] == 0 {
                continue;
            }
            let k = e[j] % p;
            e[j] -= 1;
            let _ = m;
            out.coeffs[exps_to_index(&e, p)] = c.scale(k);
        }
        out
    }

    /// Homogeneous component of total degree `l`.
    pub fn homogeneous_part(&self, l: u32) -> A0Elem {
        let mut out = A0Elem::zero(&self.ring, self.n);
        for (i, c) in self.coeffs.iter().enumerate() {
            if index_to_exps(i, self.p(), 2 * self.n).iter().sum::<u32>() == l {
                out.coeffs[i] = c.clone();
            }
        }
        out
    }

    /// Substitutes z_j ↦ images[j]; this is how automorphisms act.
    pub fn subst(&self, images: &[A0Elem]) -> Result<A0Elem> {
        assert_eq!(images.len(), 2 * self.n);
        let p = self.p() as usize;
        let target = &images[0];
        let mut powers: Vec<Vec<A0Elem>> = Vec::new();
        for img in images {
            target.same(img)?;
            let mut pw = vec![A0Elem::one(&img.ring, img.n)];
            for _ in 1..p {
                let next = pw.last().unwrap() * img;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = A0Elem::zero(&target.ring, target.n);
        for (e, c) in self.terms() {
            let mut t = A0Elem::constant(&c.embed(&target.ring)?, target.n);
            for (j, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &powers[j][k as usize];
                }
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Coefficientwise map into another coefficient ring.
    pub fn map_coeffs(&self, ring: &CoeffRing, f: impl Fn(&CRElem) -> Result<CRElem>) -> Result<A0Elem> {
        Ok(A0Elem { n: self.n, ring: ring.clone(), coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn embed(&self, ring: &CoeffRing) -> Result<A0Elem> {
        self.map_coeffs(ring, |c| c.embed(ring))
    }

    /// Coordinates over F_p when the coefficient ring is F_p.
    pub fn to_fp_vec(&self) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.constant_term()).collect()
    }

    pub fn from_fp_vec(ring: &CoeffRing, n: usize, v: &[u32]) -> A0Elem {
        A0Elem::from_coeffs(ring, n, v.iter().map(|&x| ring.constant(x as i64)).collect())
    }

    /// Coordinates over F_p of the coefficient of the R-monomial `key`.
    pub fn component(&self, key: u64) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.terms().find(|&(k, _)| k == key).map_or(0, |(_, v)| v)).collect()
    }

    /// R-monomials that occur in some coefficient.
    pub fn ring_support(&self) -> Vec<u64> {
        let mut keys: Vec<u64> = self.coeffs.iter().flat_map(|c| c.terms().map(|(k, _)| k)).collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

impl fmt::Display for A0Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let mut factors = Vec::new();
            for (j, &k) in e.iter().enumerate() {
                let name = if j < self.n { format!("x{}", j + 1) } else { format!("y{}", j - self.n + 1) };
                match k {
                    0 => {}
                    1 => factors.push(name),
                    _ => factors.push(format!("{name}^{k}")),
                }
            }
            let cs = if c.num_terms() > 1 { format!("({c})") } else { c.to_string() };
            parts.push(match (factors.is_empty(), cs.as_str()) {
                (true, _) => cs,
                (false, "1") => factors.join("*"),
                _ => format!("{cs}*{}", factors.join("*")),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

macro_rules! a0_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> std::ops::$tr<&'a A0Elem> for &'a A0Elem {
            type Output = A0Elem;
            fn $m(self, o: &'a A0Elem) -> A0Elem {
                let f: fn(&A0Elem, &A0Elem) -> A0Elem = $body;
                f(self, o)
            }
        }
        impl std::ops::$tr<A0Elem> for A0Elem {
            type Output = A0Elem;
            fn $m(self, o: A0Elem) -> A0Elem {
                std::ops::$tr::$m(&self, &o)
            }
        }
    };
}

a0_binop!(Add, add, |a, b| a.checked_add(b).expect("A0 mismatch"));
a0_binop!(Sub, sub, |a, b| a.checked_add(&-b).expect("A0 mismatch"));
a0_binop!(Mul, mul, |a, b| a.checked_mul(b).expect("A0 mismatch"));

impl std::ops::Neg for &A0Elem {
    type Output = A0Elem;
    fn neg(self) -> A0Elem {
        A0Elem { n: self.n, ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl std::ops::Neg for A0Elem {
    type Output = A0Elem;
    fn neg(self) -> A0Elem {
        -&self
    }
}

/// {f,g} = Σ ∂f/∂x_i ∂g/∂y_i − ∂f/∂y_i ∂g/∂x_i.
pub fn poisson_bracket(f: &A0Elem, g: &A0Elem) -> Result<A0Elem> {
    f.same(g)?;
    let n = f.n;
    let mut out = A0Elem::zero(&f.ring, n);
    for i in 0..n {
        let a = f.partial(i).checked_mul(&g.partial(n + i))?;
        let b = f.partial(n + i).checked_mul(&g.partial(i))?;
        out = &(&out + &a) - &b;
    }
    Ok(out)
}

/// Vector field Σ θ_j ∂/∂z_j.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VField {
    pub comps: Vec<A0Elem>,
}

impl VField {
    pub fn zero(ring: &CoeffRing, n: usize) -> VField {
        VField { comps: vec![A0Elem::zero(ring, n); 2 * n] }
    }

    /// ∂/∂z_j.
    pub fn coordinate(ring: &CoeffRing, n: usize, j: usize) -> VField {
        let mut v = VField::zero(ring, n);
        v.comps[j] = A0Elem::one(ring, n);
        v
    }

    pub fn n(&self) -> usize {
        self.comps.len() / 2
    }

    pub fn apply(&self, f: &A0Elem) -> A0Elem {
        let mut out = A0Elem::zero(&f.ring, f.n);
        for (j, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                out = &out + &(c * &f.partial(j));
            }
        }
        out
    }

    pub fn add(&self, o: &VField) -> VField {
        VField { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, c: &CRElem) -> VField {
        VField { comps: self.comps.iter().map(|a| a.scale(c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Commutator of derivations.
    pub fn lie_bracket(&self, o: &VField) -> VField {
        let comps = (0..self.comps.len())
            .map(|j| &self.apply(&o.comps[j]) - &o.apply(&self.comps[j]))
            .collect();
        VField { comps }
    }
}

impl fmt::Display for VField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n();
        let mut parts = Vec::new();
        for (j, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = if j < n { format!("d/dx{}", j + 1) } else { format!("d/dy{}", j - n + 1) };
            parts.push(format!("({c})*{d}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// H_f with H_f(g) = {f,g}: components −∂f/∂y_i on ∂/∂x_i and ∂f/∂x_i on ∂/∂y_i.
pub fn hamiltonian(f: &A0Elem) -> VField {
    let n = f.n;
    let mut comps = Vec::with_capacity(2 * n);
    for i in 0..n {
        comps.push(-f.partial(n + i));
    }
    for i in 0..n {
        comps.push(f.partial(i));
    }
    VField { comps }
}

/// θ^{[p]}: the p-fold composite of θ, read off on the coordinates.
pub fn vf_restricted_power(theta: &VField) -> VField {
    let n = theta.n();
    let ring = theta.comps[0].ring.clone();
    let p = ring.p();
    let comps = (0..2 * n)
        .map(|j| {
            let mut g = A0Elem::coord(&ring, n, j);
            for _ in 0..p {
                g = theta.apply(&g);
            }
            g
        })
        .collect();
    VField { comps }
}

/// Differential k-form: coefficients on dz_I for increasing index sets I
/// (stored as bitmasks).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KForm {
    n: usize,
    degree: usize,
    ring: CoeffRing,
    coeffs: BTreeMap<u32, A0Elem>,
}

fn sign_before(mask: u32, j: usize) -> bool {
    // odd number of indices of `mask` below j
    (mask & ((1u32 << j) - 1)).count_ones() % 2 == 1
}

impl KForm {
    pub fn zero(ring: &CoeffRing, n: usize, degree: usize) -> Result<KForm> {
        if degree > 2 * n {
            return Err(Error::Degree(format!("degree {degree} exceeds 2n = {}", 2 * n)));
        }
        Ok(KForm { n, degree, ring: ring.clone(), coeffs: BTreeMap::new() })
    }

    /// A function as a 0-form.
    pub fn function(f: &A0Elem) -> KForm {
        let mut k = KForm::zero(&f.ring, f.n, 0).unwrap();
        k.add_term(0, f);
        k
    }

    /// `f dz_{j1} ∧ … ∧ dz_{jk}` with arbitrary index order (sign applied).
    pub fn basic(f: &A0Elem, idx: &[usize]) -> Result<KForm> {
        let mut form = KForm::function(f);
        for &j in idx {
            let dz = KForm::dz(&f.ring, f.n, j);
            form = form.wedge(&dz)?;
        }
        Ok(form)
    }

    pub fn dz(ring: &CoeffRing, n: usize, j: usize) -> KForm {
        let mut k = KForm::zero(ring, n, 1).unwrap();
        k.add_term(1 << j, &A0Elem::one(ring, n));
        k
    }

    /// 1-form Σ μ_j dz_j from its components.
    pub fn one_form(comps: &[A0Elem]) -> KForm {
        let f = &comps[0];
        let mut k = KForm::zero(&f.ring, f.n, 1).unwrap();
        for (j, c) in comps.iter().enumerate() {
            k.add_term(1 << j, c);
        }
        k
    }

    /// η = Σ y_i dx_i.
    pub fn eta(ring: &CoeffRing, n: usize) -> KForm {
        let comps: Vec<A0Elem> = (0..2 * n).map(|j| if j < n { A0Elem::y(ring, n, j) } else { A0Elem::zero(ring, n) }).collect();
        KForm::one_form(&comps)
    }

    /// ω = Σ dy_i ∧ dx_i.
    pub fn omega(ring: &CoeffRing, n: usize) -> KForm {
        let one = A0Elem::one(ring, n);
        let mut w = KForm::zero(ring, n, 2).unwrap();
        for i in 0..n {
            w = w.add(&KForm::basic(&one, &[n + i, i]).unwrap()).unwrap();
        }
        w
    }

    fn add_term(&mut self, mask: u32, f: &A0Elem) {
        if f.is_zero() {
            return;
        }
        let e = self.coeffs.entry(mask).or_insert_with(|| A0Elem::zero(&f.ring, f.n));
        *e = &*e + f;
        if e.is_zero() {
            self.coeffs.remove(&mask);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of dz_I for the increasing index set `mask`.
    pub fn coeff(&self, mask: u32) -> A0Elem {
        self.coeffs.get(&mask).cloned().unwrap_or_else(|| A0Elem::zero(&self.ring, self.n))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &A0Elem)> {
        self.coeffs.iter().map(|(&m, f)| (m, f))
    }

    /// Components of a 1-form.
    pub fn components(&self) -> Vec<A0Elem> {
        (0..2 * self.n).map(|j| self.coeff(1 << j)).collect()
    }

    /// The function of a 0-form.
    pub fn as_function(&self) -> A0Elem {
        self.coeff(0)
    }

    pub fn add(&self, o: &KForm) -> Result<KForm> {
        if self.degree != o.degree || self.n != o.n {
            return Err(Error::Degree("sum of forms of different degrees".into()));
        }
        let mut out = self.clone();
        for (&m, f) in &o.coeffs {
            out.add_term(m, f);
        }
        Ok(out)
    }

    pub fn neg(&self) -> KForm {
        let mut out = self.clone();
        for f in out.coeffs.values_mut() {
            *f = -&*f;
        }
        out
    }

    pub fn sub(&self, o: &KForm) -> Result<KForm> {
        self.add(&o.neg())
    }

    pub fn scale_fn(&self, g: &A0Elem) -> KForm {
        let mut out = KForm { coeffs: BTreeMap::new(), ..self.clone() };
        for (&m, f) in &self.coeffs {
            out.add_term(m, &(f * g));
        }
        out
    }

    pub fn d(&self) -> Result<KForm> {
        let mut out = KForm::zero(&self.ring, self.n, self.degree + 1)?;
        for (&mask, f) in &self.coeffs {
            for j in 0..2 * self.n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                let df = f.partial(j);
                if df.is_zero() {
                    continue;
                }
                out.add_term(mask | (1 << j), &if sign_before(mask, j) { -df } else { df });
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, o: &KForm) -> Result<KForm> {
        let mut out = KForm::zero(&self.ring, self.n, self.degree + o.degree)?;
        for (&a, f) in &self.coeffs {
            for (&b, g) in &o.coeffs {
                if a & b != 0 {
                    continue;
                }
                // sign of moving each index of b past the larger indices of a
                let mut odd = false;
                for j in 0..2 * self.n {
                    if b & (1 << j) != 0 {
                        let larger = (a >> (j + 1)).count_ones();
                        odd ^= larger % 2 == 1;
                    }
                }
                let fg = f * g;
                out.add_term(a | b, &if odd { -fg } else { fg });
            }
        }
        Ok(out)
    }

    /// Contraction ι_θ, inserting θ into the first slot.
    pub fn iota(&self, theta: &VField) -> Result<KForm> {
        if self.degree == 0 {
            return KForm::zero(&self.ring, self.n, 0);
        }
        let mut out = KForm::zero(&self.ring, self.n, self.degree - 1)?;
        for (&mask, f) in &self.coeffs {
            for j in 0..2 * self.n {
                if mask & (1 << j) == 0 || theta.comps[j].is_zero() {
                    continue;
                }
                let t = f * &theta.comps[j];
                out.add_term(mask & !(1 << j), &if sign_before(mask, j) { -t } else { t });
            }
        }
        Ok(out)
    }

    /// Lie derivative via the Cartan formula.
    pub fn lie(&self, theta: &VField) -> Result<KForm> {
        let a = self.iota(theta)?.d()?;
        if self.degree == 2 * self.n {
            return Ok(a);
        }
        a.add(&self.d()?.iota(theta)?)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.n;
        let mut parts = Vec::new();
        for (&mask, c) in &self.coeffs {
            let ds: Vec<String> = (0..2 * n)
                .filter(|&j| mask & (1 << j) != 0)
                .map(|j| if j < n { format!("dx{}", j + 1) } else { format!("dy{}", j - n + 1) })
                .collect();
            if ds.is_empty() {
                parts.push(format!("{c}"));
            } else {
                parts.push(format!("({c})*{}", ds.join("^")));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Which operation [`forms_calculus`] performs.
pub enum FormsOp<'a> {
    D(&'a KForm),
    Wedge(&'a KForm, &'a KForm),
    Iota(&'a VField, &'a KForm),
    Lie(&'a VField, &'a KForm),
}

pub fn forms_calculus(op: FormsOp<'_>) -> Result<KForm> {
    match op {
        FormsOp::D(a) => a.d(),
        FormsOp::Wedge(a, b) => a.wedge(b),
        FormsOp::Iota(t, a) => a.iota(t),
        FormsOp::Lie(t, a) => a.lie(t),
    }
}

/// A primitive f with df = μ and zero constant term, if one exists.
///
/// d preserves the weight c of z^{c-e_j} dz_j, so each weight is solved on
/// its own: the component must be λ · d(z^c) with z^c a monomial of A₀.
pub fn exactness_class(mu: &KForm) -> Result<Option<A0Elem>> {
    if mu.degree != 1 {
        return Err(Error::Degree("exactness_class expects a 1-form".into()));
    }
    let (n, ring) = (mu.n, mu.ring.clone());
    let p = ring.p();
    let m = 2 * n;
    let comps = mu.components();
    // weight -> list of (j, coefficient of z^{c-e_j} dz_j)
    let mut by_weight: BTreeMap<Vec<u32>, Vec<(usize, CRElem)>> = BTreeMap::new();
    for (j, c) in comps.iter().enumerate() {
        for (mut e, v) in c.terms() {
            e[j] += 1;
            by_weight.entry(e).or_default().push((j, v.clone()));
        }
    }
    let mut f = A0Elem::zero(&ring, n);
    for (w, entries) in by_weight {
        if w.iter().any(|&e| e >= p) {
            return Ok(None);
        }
        let (j0, v0) = &entries[0];
        let lambda = v0.scale(fp::inv(w[*j0] % p, p));
        for j in 0..m {
            let got = entries.iter().find(|(jj, _)| *jj == j).map(|(_, v)| v.clone()).unwrap_or_else(|| ring.zero());
            if got != lambda.scale(w[j] % p) {
                return Ok(None);
            }
        }
        f = &f + &A0Elem::monomial(&ring, n, &w, &lambda);
    }
    Ok(Some(f))
}

/// Sign s with Π_i (dy_i ∧ dx_i) = s · dz_0 ∧ … ∧ dz_{2n-1}.
pub fn symplectic_orientation(n: usize) -> i64 {
    let ring = CoeffRing::field(3).unwrap();
    let one = A0Elem::one(&ring, n);
    let mut form = KForm::function(&one);
    for i in 0..n {
        form = form.wedge(&KForm::basic(&one, &[n + i, i]).unwrap()).unwrap();
    }
    let top = form.coeff((1u32 << (2 * n)) - 1);
    if top.constant_term().constant_term() == 1 {
        1
    } else {
        -1
    }
}

/// Coordinate of [ν] in H^{2n} against the class of u · Π dy_i∧dx_i.
pub fn top_derham_class(nu: &KForm) -> Result<CRElem> {
    if nu.degree != 2 * nu.n {
        return Err(Error::Degree(format!("top class needs a {}-form", 2 * nu.n)));
    }
    let full = (1u32 << (2 * nu.n)) - 1;
    let p = nu.ring.p();
    let c = nu.coeff(full).coeff(&vec![p - 1; 2 * nu.n]);
    Ok(c.scale_i(symplectic_orientation(nu.n)))
}

/// f^{[p]} = L_{H_f}^{p-1} ι_{H_f} η − ι_{H_f^{[p]}} η, for dη = ω.
pub fn restricted_power(f: &A0Elem, eta: &KForm) -> Result<A0Elem> {
    if eta.degree != 1 {
        return Err(Error::Degree("η must be a 1-form".into()));
    }
    if eta.d()? != KForm::omega(&eta.ring, eta.n) {
        return Err(Error::Precondition("dη ≠ ω".into()));
    }
    let hf = hamiltonian(f);
    let mut g = eta.iota(&hf)?.as_function();
    for _ in 0..f.p() - 1 {
        g = hf.apply(&g);
    }
    let hp = vf_restricted_power(&hf);
    Ok(&g - &eta.iota(&hp)?.as_function())
}

/// All monomials of A₀ (as exponent vectors) in index order.
pub fn monomial_basis(p: u32, n: usize) -> Vec<Vec<u32>> {
    (0..a0_dim(p, n)).map(|i| index_to_exps(i, p, 2 * n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u32) -> CoeffRing {
        CoeffRing::field(p).unwrap()
    }

    fn mono(p: u32, n: usize, e: &[u32], c: i64) -> A0Elem {
        A0Elem::monomial_fp(&ring(p), n, e, c)
    }

    #[test]
    fn bracket_bullets() {
        // n = 2, i = 1, j = 2
        let p = 5;
        let xy = mono(p, 2, &[1, 0, 1, 0], 1);
        let xx = mono(p, 2, &[1, 1, 0, 0], 1);
        assert_eq!(poisson_bracket(&xy, &xx).unwrap(), mono(p, 2, &[1, 1, 0, 0], -1));
        // {x^{a-1} y^b, x^2 y} = (a-1-2b) x^a y^b
        for a in 1..p {
            for b in 0..p {
                let f = mono(p, 1, &[a - 1, b], 1);
                let g = mono(p, 1, &[2, 1], 1);
                let want = mono(p, 1, &[a, b], a as i64 - 1 - 2 * b as i64);
                assert_eq!(poisson_bracket(&f, &g).unwrap(), want, "a={a} b={b}");
            }
        }
        let x = mono(p, 1, &[1, 0], 1);
        assert!(poisson_bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn bracket_bullet_with_socle() {
        for p in [5u32, 7] {
            // {x_i^{p-1} y_i^{p-3} x_j, y_i^2 y_j}
            let f = mono(p, 2, &[p - 1, 1, p - 3, 0], 1);
            let g = mono(p, 2, &[0, 0, 2, 1], 1);
            let want = &mono(p, 2, &[p - 1, 0, p - 1, 0], 1) + &mono(p, 2, &[p - 2, 1, p - 2, 1], 2 * (p as i64 - 1));
            assert_eq!(poisson_bracket(&f, &g).unwrap(), want);
        }
    }

    #[test]
    fn bracket_recomputed_values() {
        // {x^2, x y^2} = 4 x^2 y under the pinned convention
        let p = 7;
        let f = mono(p, 1, &[2, 0], 1);
        let g = mono(p, 1, &[1, 2], 1);
        assert_eq!(poisson_bracket(&f, &g).unwrap(), mono(p, 1, &[2, 1], 4));
        // {x^{a+1} y^{b-2}, y^3} = 3(a+1) x^a y^b
        for a in 0..p - 1 {
            for b in 2..p {
                let f = mono(p, 1, &[a + 1, b - 2], 1);
                let g = mono(p, 1, &[0, 3], 1);
                assert_eq!(poisson_bracket(&f, &g).unwrap(), mono(p, 1, &[a, b], 3 * (a as i64 + 1)));
            }
        }
    }

    #[test]
    fn forms_examples() {
        let r = ring(3);
        let eta = KForm::eta(&r, 2);
        assert_eq!(eta.d().unwrap(), KForm::omega(&r, 2));
        let one = A0Elem::one(&r, 1);
        let w = KForm::basic(&one, &[1, 0]).unwrap();
        let got = w.iota(&VField::coordinate(&r, 1, 0)).unwrap();
        assert_eq!(got, KForm::dz(&r, 1, 1).neg());
        let f = mono(3, 1, &[2, 0], 1);
        assert!(KForm::omega(&r, 1).lie(&hamiltonian(&f)).unwrap().is_zero());
        assert!(KForm::dz(&r, 1, 0).wedge(&KForm::dz(&r, 1, 0)).unwrap().is_zero());
        assert!(KForm::zero(&r, 1, 3).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let r = ring(3);
        let h = hamiltonian(&mono(3, 1, &[1, 1], 1));
        assert_eq!(h.comps[0], mono(3, 1, &[1, 0], -1));
        assert_eq!(h.comps[1], mono(3, 1, &[0, 1], 1));
        assert!(hamiltonian(&A0Elem::one(&r, 1)).is_zero());
        assert_eq!(hamiltonian(&mono(3, 1, &[1, 0], 1)), VField::coordinate(&r, 1, 1));
        // ι_{H_f} ω = df
        let f = &mono(3, 1, &[2, 1], 1) + &mono(3, 1, &[0, 2], 2);
        assert_eq!(KForm::omega(&r, 1).iota(&hamiltonian(&f)).unwrap(), KForm::function(&f).d().unwrap());
    }

    #[test]
    fn vf_power_examples() {
        let r = ring(5);
        assert!(vf_restricted_power(&VField::coordinate(&r, 1, 0)).is_zero());
        let xd = VField { comps: vec![mono(5, 1, &[1, 0], 1), A0Elem::zero(&r, 1)] };
        assert_eq!(vf_restricted_power(&xd), xd);
        let h = hamiltonian(&mono(5, 1, &[1, 1], 1));
        assert_eq!(vf_restricted_power(&h), h);
    }

    #[test]
    fn exactness_examples() {
        let r = ring(3);
        let xy = mono(3, 1, &[1, 1], 1);
        let mu = KForm::function(&xy).d().unwrap();
        assert_eq!(exactness_class(&mu).unwrap(), Some(xy));
        assert_eq!(exactness_class(&KForm::eta(&r, 1)).unwrap(), None);
        let xp = KForm::one_form(&[mono(3, 1, &[2, 0], 1), A0Elem::zero(&r, 1)]);
        assert_eq!(exactness_class(&xp).unwrap(), None);
    }

    #[test]
    fn top_class_examples() {
        for (p, n) in [(3u32, 1usize), (3, 2), (5, 1)] {
            let r = ring(p);
            let u = A0Elem::socle(&r, n);
            let one = A0Elem::one(&r, n);
            let mut vol = KForm::function(&one);
            for i in 0..n {
                vol = vol.wedge(&KForm::basic(&one, &[n + i, i]).unwrap()).unwrap();
            }
            assert!(top_derham_class(&vol.scale_fn(&u)).unwrap().is_one());
            // an exact top form
            let mut e = vec![1u32; 2 * n];
            e[0] = 0;
            let g = mono(p, n, &e, 1);
            let idx: Vec<usize> = (1..2 * n).collect();
            let exact = KForm::basic(&g, &idx).unwrap().d().unwrap();
            assert!(top_derham_class(&exact).unwrap().is_zero());
        }
    }

    #[test]
    fn restricted_power_examples() {
        let r = ring(3);
        let eta = KForm::eta(&r, 1);
        assert!(restricted_power(&mono(3, 1, &[1, 0], 1), &eta).unwrap().is_zero());
        assert!(restricted_power(&mono(3, 1, &[0, 1], 1), &eta).unwrap().is_zero());
        let xy = mono(3, 1, &[1, 1], 1);
        assert_eq!(restricted_power(&xy, &eta).unwrap(), xy);
        let bad = KForm::dz(&r, 1, 0);
        assert!(restricted_power(&xy, &bad).is_err());
    }
}
