//! Points of Aut(A₀) and G₀ over coefficient rings, the character to 𝔾_a,
//! one-parameter subgroups, the Heisenberg section and the invariant
//! connection on it.
//!
//! The identities involving restricted exponentials are checked in the
//! convention x y − y x = h unless a `WeylAlg` is passed explicitly; see
//! [`display_convention`].

use std::fmt;

use rand::Rng;

use crate::coeff::{CRElem, CoeffRing, HLaurent};
use crate::fp;
use crate::poisson::{a0_dim, exactness_class, exps_to_index, index_to_exps, poisson_bracket, top_derham_class, A0Elem, KForm};
use crate::weyl::{alpha_exp, restricted_exp, WeylAlg, WeylElem};
use crate::{Error, Result};

/// An endomorphism of A₀ ⊗ R given by the images of x₁..x_n, y₁..y_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutA0 {
    ring: CoeffRing,
    n: usize,
    images: Vec<A0Elem>,
}

impl AutA0 {
    /// Fails unless every image has vanishing p-th power, which is what makes
    /// z ↦ image a well-defined algebra map.
    pub fn new(images: Vec<A0Elem>) -> Result<AutA0> {
        let first = images.first().ok_or_else(|| Error::Config("no generator images".into()))?;
        let (ring, n) = (first.ring().clone(), first.n());
        if images.len() != 2 * n {
            return Err(Error::Config(format!("expected {} images, got {}", 2 * n, images.len())));
        }
        for (j, img) in images.iter().enumerate() {
            if img.ring() != &ring || img.n() != n {
                return Err(Error::RingMismatch(format!("image {j}")));
            }
            if !img.pow(ring.p()).is_zero() {
                return Err(Error::Precondition(format!("image of generator {j} has nonzero p-th power")));
            }
        }
        Ok(AutA0 { ring, n, images })
    }

    pub fn identity(ring: &CoeffRing, n: usize) -> AutA0 {
        AutA0 { ring: ring.clone(), n, images: (0..2 * n).map(|j| A0Elem::coord(ring, n, j)).collect() }
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.ring.p()
    }

    pub fn images(&self) -> &[A0Elem] {
        &self.images
    }

    pub fn apply(&self, f: &A0Elem) -> Result<A0Elem> {
        f.subst(&self.images)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &AutA0) -> Result<AutA0> {
        let other = other.embed(&self.ring)?;
        let images = other.images.iter().map(|z| self.apply(z)).collect::<Result<_>>()?;
        Ok(AutA0 { ring: self.ring.clone(), n: self.n, images })
    }

    pub fn embed(&self, ring: &CoeffRing) -> Result<AutA0> {
        Ok(AutA0 { ring: ring.clone(), n: self.n, images: self.images.iter().map(|z| z.embed(ring)).collect::<Result<_>>()? })
    }

    /// Substitutes into the coefficients (e.g. specializing a parameter).
    pub fn map_coeffs(&self, ring: &CoeffRing, f: impl Fn(&CRElem) -> Result<CRElem>) -> Result<AutA0> {
        Ok(AutA0 { ring: ring.clone(), n: self.n, images: self.images.iter().map(|z| z.map_coeffs(ring, &f)).collect::<Result<_>>()? })
    }

    /// Column j holds the coordinates of g(m_j) on the monomial basis.
    pub fn matrix(&self) -> Result<Vec<Vec<CRElem>>> {
        let d = a0_dim(self.p(), self.n);
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let e = index_to_exps(j, self.p(), 2 * self.n);
            let m = A0Elem::monomial(&self.ring, self.n, &e, &self.ring.one());
            cols.push(self.apply(&m)?.coeffs().to_vec());
        }
        Ok((0..d).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect())
    }

    /// R is local, so the matrix is invertible iff its residue over F_p is.
    pub fn is_invertible(&self) -> Result<bool> {
        let m = self.matrix()?;
        let rows: Vec<Vec<u32>> = m.iter().map(|r| r.iter().map(|c| c.constant_term()).collect()).collect();
        Ok(fp::FpMatrix::from_rows(self.p(), &rows).rank() == rows.len())
    }

    pub fn inverse(&self) -> Result<AutA0> {
        let d = a0_dim(self.p(), self.n);
        let m = 2 * self.n;
        let targets: Vec<usize> = (0..m)
            .map(|j| {
                let mut e = vec![0; m];
                e[j] = 1;
                exps_to_index(&e, self.p())
            })
            .collect();
        let rhs: Vec<Vec<CRElem>> = (0..d)
            .map(|i| targets.iter().map(|&t| if i == t { self.ring.one() } else { self.ring.zero() }).collect())
            .collect();
        let sol = solve(self.matrix()?, rhs)?;
        let images = (0..m)
            .map(|k| A0Elem::from_coeffs(&self.ring, self.n, (0..d).map(|i| sol[i][k].clone()).collect()))
            .collect();
        Ok(AutA0 { ring: self.ring.clone(), n: self.n, images })
    }

    /// g*(f dz_I) = g(f) · ∧_{i∈I} d(g z_i).
    pub fn pullback(&self, form: &KForm) -> Result<KForm> {
        let dimg: Vec<KForm> = self.images.iter().map(|z| KForm::function(z).d()).collect::<Result<_>>()?;
        let mut out = KForm::zero(&self.ring, self.n, form.degree())?;
        for (mask, f) in form.terms() {
            let mut t = KForm::function(&self.apply(&f.embed(&self.ring)?)?);
            for (i, di) in dimg.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    t = t.wedge(di)?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<Validation> {
        let mut v = Validation::default();
        if !self.is_invertible()? {
            v.failures.push("not invertible".into());
        }
        let om = KForm::omega(&self.ring, self.n);
        let pulled = self.pullback(&om)?;
        if pulled != om {
            v.failures.push(format!("g*ω ≠ ω: g*ω = {pulled}"));
        }
        let eta = KForm::eta(&self.ring, self.n);
        let diff = self.pullback(&eta)?.sub(&eta)?;
        match exactness_class(&diff)? {
            Some(f) => v.primitive = Some(f),
            None => v.failures.push(format!("g*η − η = {diff} is not exact")),
        }
        Ok(v)
    }
}

impl fmt::Display for AutA0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> =
            (0..self.n).map(|i| format!("x{}", i + 1)).chain((0..self.n).map(|i| format!("y{}", i + 1))).collect();
        let parts: Vec<String> = names.iter().zip(&self.images).map(|(n, z)| format!("{n} ↦ {z}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Outcome of [`AutA0::validate`]; `primitive` is f with g*η = η + df.
#[derive(Clone, Debug, Default)]
pub struct Validation {
    pub failures: Vec<String>,
    pub primitive: Option<A0Elem>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Gauss-Jordan over R with unit pivots; returns M⁻¹·B.
fn solve(mut a: Vec<Vec<CRElem>>, mut b: Vec<Vec<CRElem>>) -> Result<Vec<Vec<CRElem>>> {
    let d = a.len();
    for c in 0..d {
        let piv = (c..d).find(|&i| a[i][c].is_unit()).ok_or_else(|| Error::NotInvertible("automorphism matrix".into()))?;
        a.swap(piv, c);
        b.swap(piv, c);
        let s = a[c][c].inv()?;
        for v in a[c].iter_mut().chain(b[c].iter_mut()) {
            *v = &*v * &s;
        }
        for i in 0..d {
            if i == c || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..d {
                if !a[c][j].is_zero() {
                    a[i][j] = &a[i][j] - &(&f * &a[c][j]);
                }
            }
            for j in 0..b[c].len() {
                if !b[c][j].is_zero() {
                    b[i][j] = &b[i][j] - &(&f * &b[c][j]);
                }
            }
        }
    }
    Ok(b)
}

/// ω^n = ω ∧ ⋯ ∧ ω.
fn omega_power(ring: &CoeffRing, n: usize) -> Result<KForm> {
    let om = KForm::omega(ring, n);
    let mut acc = om.clone();
    for _ in 1..n {
        acc = acc.wedge(&om)?;
    }
    Ok(acc)
}

/// The character G₀ → 𝔾_a: the top class of f·ωⁿ where g*η = η + df.
pub fn phi_ga(g: &AutA0) -> Result<CRElem> {
    let v = g.validate()?;
    if !v.passed() {
        return Err(Error::Precondition(format!("not a point of G₀: {}", v.failures.join("; "))));
    }
    let f = v.primitive.expect("validated");
    top_derham_class(&KForm::function(&f).wedge(&omega_power(g.ring(), g.n())?)?)
}

/// u = Π x_i^{p−1} y_i^{p−1}.
pub fn socle_monomial(ring: &CoeffRing, n: usize) -> A0Elem {
    A0Elem::monomial(ring, n, &vec![ring.p() - 1; 2 * n], &ring.one())
}

/// s(t): z ↦ z − (t/2){z, u}.
pub fn section_s(ring: &CoeffRing, n: usize, t: &CRElem) -> Result<AutA0> {
    let p = ring.p();
    let u = socle_monomial(ring, n);
    let half = t.embed(ring)?.scale(fp::inv(2, p));
    let images = (0..2 * n)
        .map(|j| {
            let z = A0Elem::coord(ring, n, j);
            let b = poisson_bracket(&z, &u)?;
            z.checked_add(&-b.scale(&half))
        })
        .collect::<Result<_>>()?;
    AutA0::new(images)
}

/// λ(τ): y₁ ↦ y₁ + 3τx₁² for p > 3; x₁ ↦ x₁ + τx₁², y₁ ↦ y₁ − 2τx₁y₁ + τ²x₁²y₁
/// for p = 3 (the flow of x₁²∂_x − 2x₁y₁∂_y). The other generators are fixed.
pub fn lambda_subgroup(ring: &CoeffRing, n: usize, tau: &CRElem) -> Result<AutA0> {
    let p = ring.p();
    let t = tau.embed(ring)?;
    let mut g = AutA0::identity(ring, n);
    let mono = |exps: &[(usize, u32)], c: &CRElem| {
        let mut e = vec![0; 2 * n];
        for &(j, k) in exps {
            e[j] = k;
        }
        A0Elem::monomial(ring, n, &e, c)
    };
    if p > 3 {
        g.images[n] = g.images[n].checked_add(&mono(&[(0, 2)], &t.scale(3)))?;
    } else {
        g.images[0] = g.images[0].checked_add(&mono(&[(0, 2)], &t))?;
        let extra = mono(&[(0, 1), (n, 1)], &t.scale_i(-2)).checked_add(&mono(&[(0, 2), (n, 1)], &t.pow(2)))?;
        g.images[n] = g.images[n].checked_add(&extra)?;
    }
    AutA0::new(g.images)
}

/// x_i ↦ x_i + ε_i, y_i ↦ y_i + δ_i.
pub fn translation(ring: &CoeffRing, eps: &[CRElem], delta: &[CRElem]) -> Result<AutA0> {
    let n = eps.len();
    let mut g = AutA0::identity(ring, n);
    for i in 0..n {
        g.images[i] = g.images[i].checked_add(&A0Elem::constant(&eps[i].embed(ring)?, n))?;
        g.images[n + i] = g.images[n + i].checked_add(&A0Elem::constant(&delta[i].embed(ring)?, n))?;
    }
    AutA0::new(g.images)
}

/// The linear automorphism z_j ↦ Σ_k m[k][j] z_k for an F_p matrix m.
pub fn linear(ring: &CoeffRing, n: usize, m: &fp::FpMatrix) -> Result<AutA0> {
    let images = (0..2 * n)
        .map(|j| {
            (0..2 * n).try_fold(A0Elem::zero(ring, n), |acc, k| {
                acc.checked_add(&A0Elem::coord(ring, n, k).scale(&ring.constant(m.get(k, j) as i64)))
            })
        })
        .collect::<Result<_>>()?;
    AutA0::new(images)
}

/// A random element of Sp(2n, F_p), as a product of elementary symplectic
/// shears.
pub fn random_sp<R: Rng>(p: u32, n: usize, rng: &mut R) -> fp::FpMatrix {
    let mut m = fp::FpMatrix::identity(p, 2 * n);
    for _ in 0..6 * n {
        let mut e = fp::FpMatrix::identity(p, 2 * n);
        let a = rng.gen_range(1..p);
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        match rng.gen_range(0..4) {
            // x_i ↦ x_i + a y_i (and its partner for i ≠ j)
            0 => {
                e.set(n + j, i, a);
                e.set(n + i, j, a);
            }
            1 => {
                e.set(j, n + i, a);
                e.set(i, n + j, a);
            }
            _ if i != j => {
                // x_i ↦ x_i + a x_j, y_j ↦ y_j − a y_i
                e.set(j, i, a);
                e.set(n + i, n + j, fp::neg(a, p));
            }
            _ => {
                e.set(n + i, i, a);
            }
        }
        m = m.mul(&e);
    }
    m
}

/// The convention x y − y x = h in which the exponential identities below are
/// stated.
pub fn display_convention(p: u32, n: usize, ring: &CoeffRing) -> Result<WeylAlg> {
    Ok(wide(WeylAlg::standard(p, n, ring)?.opposite_convention()))
}

// products of several Heisenberg exponentials over universal rings go well
// below the default pole floor
fn wide(alg: WeylAlg) -> WeylAlg {
    let f = -(8 * alg.n() as i32 * alg.p() as i32);
    alg.with_floor(f)
}

/// t(ε, δ) = Π e^{ε_i x_i/h} Π e^{δ_i y_i/h}.
pub fn heisenberg_section(alg: &WeylAlg, eps: &[CRElem], delta: &[CRElem]) -> Result<WeylElem> {
    let n = alg.n();
    if eps.len() != n || delta.len() != n {
        return Err(Error::Config("one ε and one δ per pair".into()));
    }
    let mut t = alg.one();
    for i in 0..n {
        t = t.mul(&alpha_exp(&alg.x(i), &eps[i])?)?;
    }
    for i in 0..n {
        t = t.mul(&alpha_exp(&alg.y(i), &delta[i])?)?;
    }
    Ok(t)
}

/// t(ε, δ)⁻¹.
pub fn heisenberg_inverse(alg: &WeylAlg, eps: &[CRElem], delta: &[CRElem]) -> Result<WeylElem> {
    let n = alg.n();
    let mut t = alg.one();
    for i in (0..n).rev() {
        t = t.mul(&alpha_exp(&alg.y(i), &-&delta[i])?)?;
    }
    for i in (0..n).rev() {
        t = t.mul(&alpha_exp(&alg.x(i), &-&eps[i])?)?;
    }
    Ok(t)
}

/// e^{c/h} for a nilpotent scalar c.
pub fn central_exp(alg: &WeylAlg, c: &CRElem) -> Result<HLaurent> {
    let e = alpha_exp(&alg.one(), c)?;
    Ok(e.coeff(&vec![0; alg.nvars()]))
}

/// log(1 + N) = Σ_{k<p} (−1)^{k+1} N^k / k, for N^p = 0.
pub fn nilpotent_log(z: &WeylElem) -> Result<WeylElem> {
    let alg = z.alg().clone();
    let p = alg.p();
    let n = z.sub(&alg.one())?;
    let mut out = alg.zero();
    let mut power = alg.one();
    for k in 1..p {
        power = power.mul(&n)?;
        let c = fp::inv(k, p) as i64 * if k % 2 == 1 { 1 } else { -1 };
        out = out.add(&power.scale(&alg.ring().constant(c)))?;
    }
    if !power.mul(&n)?.is_zero() {
        return Err(Error::Precondition("log needs (Z − 1)^p = 0".into()));
    }
    Ok(out)
}

/// exp(X) = Σ_{k<p} X^k / k!, for X^p = 0.
pub fn nilpotent_exp(x: &WeylElem) -> Result<WeylElem> {
    let alg = x.alg().clone();
    let p = alg.p();
    let mut out = alg.one();
    let mut power = alg.one();
    for k in 1..p {
        power = power.mul(x)?;
        out = out.add(&power.scale(&alg.ring().constant(fp::inv(fp::factorial(k, p), p) as i64)))?;
    }
    if !power.mul(x)?.is_zero() {
        return Err(Error::Precondition("exp needs X^p = 0".into()));
    }
    Ok(out)
}

/// X = G/h with G integral and G mod h vanishing to second order at the
/// origin: the lifted Lie algebra of the origin-fixing subgroup.
pub fn in_origin_algebra(x: &WeylElem) -> Result<bool> {
    let g = x.shift(1)?;
    if !g.is_integral() {
        return Ok(false);
    }
    let g0 = g.mod_h()?;
    Ok(g0.homogeneous_part(0).is_zero() && g0.homogeneous_part(1).is_zero())
}

/// Splits Z = f · s with f ∈ Ŵ and s = exp(X), X in the origin algebra.
///
/// log Z = log f + X since f is central; log f is the polar scalar part of
/// log Z because X has no polar scalar terms. Needs (Z − 1)^p = 0.
pub fn split_central_factor(z: &WeylElem) -> Result<(HLaurent, WeylElem)> {
    let alg = z.alg().clone();
    let l = nilpotent_log(z)?;
    let phi = l.coeff(&vec![0; alg.nvars()]).polar_part();
    let x = l.sub(&alg.scalar(&phi))?;
    if !in_origin_algebra(&x)? {
        return Err(Error::Precondition(format!("log of the remainder leaves the origin algebra: {x}")));
    }
    let f = nilpotent_exp(&alg.scalar(&phi))?.coeff(&vec![0; alg.nvars()]);
    Ok((f, nilpotent_exp(&x)?))
}

/// Outcome of one of the exponential identities.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub name: String,
    pub failures: Vec<String>,
    pub factor: Option<HLaurent>,
}

impl IdentityReport {
    fn new(name: &str) -> IdentityReport {
        IdentityReport { name: name.into(), failures: Vec::new(), factor: None }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

/// F_p[names] with every cap equal to p.
pub fn greek_ring(p: u32, names: &[String]) -> Result<CoeffRing> {
    let gens: Vec<(&str, u32)> = names.iter().map(|s| (s.as_str(), p)).collect();
    CoeffRing::new(p, &gens)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// Conjugation by s maps every generator to an integral element whose
/// reduction mod h has no constant term.
pub fn fixes_origin(s: &WeylElem, s_inv: &WeylElem) -> Result<bool> {
    for g in s.alg().gens() {
        let c = s.mul(&g)?.mul(s_inv)?;
        if !c.is_integral() || !c.mod_h()?.constant_term().is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// t(a)·t(ε,δ) = e^{−κΣε_iδ'_i/h}·t(ε+ε', δ+δ') over the universal ring, with
/// κ = (x y − y x)/h of the given convention (κ = 1 is the displayed form).
pub fn verify_translation_identity(p: u32, n: usize, opposite: bool) -> Result<IdentityReport> {
    let all: Vec<String> = [names("e", n), names("d", n), names("a", n), names("b", n)].concat();
    let ring = greek_ring(p, &all)?;
    let base = wide(WeylAlg::standard(p, n, &ring)?);
    let alg = if opposite { base.opposite_convention() } else { base };
    let kappa = -alg.sign();
    let g = |i| ring.gen(i);
    let eps: Vec<CRElem> = (0..n).map(g).collect();
    let del: Vec<CRElem> = (n..2 * n).map(g).collect();
    let ea: Vec<CRElem> = (2 * n..3 * n).map(g).collect();
    let da: Vec<CRElem> = (3 * n..4 * n).map(g).collect();
    let mut rep = IdentityReport::new("translation");
    let lhs = heisenberg_section(&alg, &ea, &da)?.mul(&heisenberg_section(&alg, &eps, &del)?)?;
    let sum = |a: &[CRElem], b: &[CRElem]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
    let moved = heisenberg_section(&alg, &sum(&eps, &ea), &sum(&del, &da))?;
    // the truncated exponential is not additive, so the factor is the
    // product of the per-pair factors
    let mut factor = HLaurent::one(&ring);
    for i in 0..n {
        factor = factor.mul(&central_exp(&alg, &(&eps[i] * &da[i]).scale_i(-kappa))?)?;
    }
    let rhs = moved.scale_laurent(&factor)?;
    rep.expect(lhs == rhs, || format!("sides differ by {}", lhs.sub(&rhs).map(|d| d.to_string()).unwrap_or_default()));
    // the factor read off independently from Z = t(a+ε)⁻¹ t(a) t(ε)
    let z = heisenberg_inverse(&alg, &sum(&eps, &ea), &sum(&del, &da))?.mul(&lhs)?;
    let (f, s) = split_central_factor(&z)?;
    rep.expect(s == alg.one(), || format!("non-central remainder {s}"));
    rep.expect(f == factor, || format!("extracted factor {f} ≠ {factor}"));
    rep.factor = Some(f);
    Ok(rep)
}

/// Cubic identity at p > 3, n = 1:
/// e^{τx³/h} t(ε,δ) = e^{−2τδ³/h} t(ε+3τδ², δ) e^{τ(x³+3δx²)/h}.
pub fn verify_cubic_identity(p: u32) -> Result<IdentityReport> {
    if p <= 3 {
        return Err(Error::Precondition("the cubic identity needs p > 3".into()));
    }
    let ring = greek_ring(p, &["tau".into(), "e1".into(), "d1".into()])?;
    let alg = display_convention(p, 1, &ring)?;
    let (tau, e, d) = (ring.gen(0), ring.gen(1), ring.gen(2));
    let mut rep = IdentityReport::new("cubic");
    let x = alg.x(0);
    let x2 = x.mul(&x)?;
    let x3 = x2.mul(&x)?;
    let lam = restricted_exp(&x3, &tau)?;
    let lhs = lam.mul(&heisenberg_section(&alg, &[e.clone()], &[d.clone()])?)?;
    let tail_f = x3.add(&x2.scale(&d.scale(3)))?;
    let tail = restricted_exp(&tail_f, &tau)?;
    let e2 = &e + &(&tau * &d.pow(2)).scale(3);
    let factor = central_exp(&alg, &(&tau * &d.pow(3)).scale_i(-2))?;
    let rhs = heisenberg_section(&alg, &[e2.clone()], &[d.clone()])?.mul(&tail)?.scale_laurent(&factor)?;
    rep.expect(lhs == rhs, || "sides differ".into());
    let z = heisenberg_inverse(&alg, &[e2], &[d])?.mul(&lhs)?;
    let (f, s) = split_central_factor(&z)?;
    rep.expect(f == factor, || format!("extracted factor {f} ≠ {factor}"));
    rep.expect(s == tail, || "remainder is not the displayed last factor".into());
    rep.expect(fixes_origin(&tail, &restricted_exp(&tail_f, &-&tau)?)?, || "last factor moves the origin".into());
    rep.factor = Some(f);
    Ok(rep)
}

/// Z = t(ε+τδε, δ+τδ²)⁻¹ · e^{τx²y/h} · t(ε, δ) at p = 3, n = 1, split into
/// its Ŵ factor and the remainder.
pub fn char3_factor(alg: &WeylAlg, tau: &CRElem, eps: &CRElem, delta: &CRElem) -> Result<(HLaurent, WeylElem)> {
    let x = alg.x(0);
    let x2y = x.mul(&x)?.mul(&alg.y(0))?;
    let lam = restricted_exp(&x2y, tau)?;
    let (e2, d2) = char3_shift(tau, eps, delta);
    let z = heisenberg_inverse(alg, &[e2], &[d2])?.mul(&lam)?.mul(&heisenberg_section(alg, &[eps.clone()], &[delta.clone()])?)?;
    split_central_factor(&z)
}

/// The action of the x²y subgroup on α: (ε, δ) ↦ (ε, δ)/(1 − τδ), which
/// is (ε + τδε + τ²δ²ε, δ + τδ²) once δ³ = 0.
pub fn char3_shift(tau: &CRElem, eps: &CRElem, delta: &CRElem) -> (CRElem, CRElem) {
    let td = tau * delta;
    let geo = &(&eps.ring().one() + &td) + &td.pow(2);
    (eps * &geo, delta + &(tau * &delta.pow(2)))
}

/// The char-3 identity: extracted factor, its closed form, the remainder's
/// nature, the value mod τ² and the cocycle law.
pub fn verify_char3_identity() -> Result<IdentityReport> {
    let p = 3;
    let mut rep = IdentityReport::new("char3");
    let ring = greek_ring(p, &["tau".into(), "e1".into(), "d1".into()])?;
    let alg = display_convention(p, 1, &ring)?;
    let (tau, e, d) = (ring.gen(0), ring.gen(1), ring.gen(2));
    let closed = |alg: &WeylAlg, t: &CRElem, e: &CRElem, d: &CRElem| central_exp(alg, &(t * &(&d.pow(2) * e)));
    let (f, s) = char3_factor(&alg, &tau, &e, &d)?;
    let want = closed(&alg, &tau, &e, &d)?;
    rep.expect(f == want, || format!("extracted factor {f} ≠ {want}"));
    let s_inv = invert_unipotent(&s)?;
    rep.expect(fixes_origin(&s, &s_inv)?, || format!("remainder {s} moves the origin"));
    rep.factor = Some(f);

    // modulo τ²: the τ-linear part of the scalar polar term
    let r2 = CoeffRing::new(p, &[("tau", 2), ("e1", 3), ("d1", 3)])?;
    let a2 = display_convention(p, 1, &r2)?;
    let (t2, e2, d2) = (r2.gen(0), r2.gen(1), r2.gen(2));
    let (f2, _) = char3_factor(&a2, &t2, &e2, &d2)?;
    let lin = HLaurent::monomial(&(&t2 * &(&d2.pow(2) * &e2)), -1);
    let want2 = HLaurent::one(&r2).add(&lin)?;
    rep.expect(f2 == want2, || format!("mod τ²: {f2} ≠ {want2}"));

    // cocycle over F₃[τ₁, τ₂, ε, δ]
    let rc = greek_ring(p, &["t1".into(), "t2".into(), "e1".into(), "d1".into()])?;
    let ac = display_convention(p, 1, &rc)?;
    let (t1, t2, ec, dc) = (rc.gen(0), rc.gen(1), rc.gen(2), rc.gen(3));
    let (f12, _) = char3_factor(&ac, &(&t1 + &t2), &ec, &dc)?;
    let (f1, _) = char3_factor(&ac, &t1, &ec, &dc)?;
    let (es, ds) = char3_shift(&t1, &ec, &dc);
    let (f2s, _) = char3_factor(&ac, &t2, &es, &ds)?;
    rep.expect(f12 == f1.mul(&f2s)?, || "cocycle law fails for the extracted factor".into());
    let c12 = closed(&ac, &(&t1 + &t2), &ec, &dc)?;
    let c1 = closed(&ac, &t1, &ec, &dc)?;
    let c2 = closed(&ac, &t2, &es, &ds)?;
    rep.expect(c12 == c1.mul(&c2)?, || "cocycle law fails for the closed form".into());
    Ok(rep)
}

/// Inverse of an element 1 + N with N nilpotent.
pub fn invert_unipotent(a: &WeylElem) -> Result<WeylElem> {
    let alg = a.alg().clone();
    let q = alg.one().sub(a)?;
    let mut acc = alg.one();
    let mut term = alg.one();
    for _ in 0..4096 {
        term = term.mul(&q)?;
        if term.is_zero() {
            if a.mul(&acc)? != alg.one() {
                return Err(Error::NotInvertible("unipotent inverse check".into()));
            }
            return Ok(acc);
        }
        acc = acc.add(&term)?;
    }
    Err(Error::NotInvertible("not unipotent".into()))
}

/// A 1-form Σ c_k dv_k in a chosen set of ring generators v_k, with
/// coefficients in R((h)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GreekForm {
    pub coords: Vec<usize>,
    pub comps: Vec<HLaurent>,
}

impl GreekForm {
    pub fn zero(ring: &CoeffRing, coords: &[usize]) -> GreekForm {
        GreekForm { coords: coords.to_vec(), comps: vec![HLaurent::zero(ring); coords.len()] }
    }

    pub fn add(&self, o: &GreekForm) -> Result<GreekForm> {
        assert_eq!(self.coords, o.coords);
        Ok(GreekForm { coords: self.coords.clone(), comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.add(b)).collect::<Result<_>>()? })
    }

    /// dc for c ∈ R((h)).
    pub fn differential(c: &HLaurent, coords: &[usize]) -> Result<GreekForm> {
        let ring = c.ring().clone();
        let comps = coords.iter().map(|&k| c.map_coeffs(&ring, |a| Ok(a.derivative(k)))).collect::<Result<_>>()?;
        Ok(GreekForm { coords: coords.to_vec(), comps })
    }

    /// Pullback along the substitution v ↦ images[v] of all ring generators.
    pub fn pullback(&self, images: &[CRElem]) -> Result<GreekForm> {
        let ring = self.comps[0].ring().clone();
        let mut out = GreekForm::zero(&ring, &self.coords);
        for (k, c) in self.coords.iter().zip(&self.comps) {
            let c2 = c.map_coeffs(&ring, |a| a.subst(images))?;
            for (slot, &j) in self.coords.iter().enumerate() {
                let dj = images[*k].derivative(j);
                if !dj.is_zero() {
                    out.comps[slot] = out.comps[slot].add(&c2.scale(&dj))?;
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for GreekForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.comps.first().map(|c| c.ring().names().to_vec()).unwrap_or_default();
        let parts: Vec<String> = self
            .coords
            .iter()
            .zip(&self.comps)
            .filter(|(_, c)| !c.is_zero())
            .map(|(&k, c)| format!("({c}) d{}", names[k]))
            .collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

/// c·t for the Heisenberg section t in coordinates ε = ring gens `eps`,
/// δ = ring gens `delta`.
#[derive(Clone, Debug)]
pub struct TorsorSection {
    pub eps: Vec<usize>,
    pub delta: Vec<usize>,
    pub gauge: HLaurent,
}

impl TorsorSection {
    pub fn canonical(ring: &CoeffRing, eps: &[usize], delta: &[usize]) -> TorsorSection {
        TorsorSection { eps: eps.to_vec(), delta: delta.to_vec(), gauge: HLaurent::one(ring) }
    }

    pub fn coords(&self) -> Vec<usize> {
        self.eps.iter().chain(&self.delta).copied().collect()
    }

    pub fn regauge(&self, c: &HLaurent) -> Result<TorsorSection> {
        Ok(TorsorSection { gauge: self.gauge.mul(c)?, ..self.clone() })
    }

    pub fn to_weyl(&self, alg: &WeylAlg) -> Result<WeylElem> {
        let ring = alg.ring();
        let e: Vec<CRElem> = self.eps.iter().map(|&k| ring.gen(k)).collect();
        let d: Vec<CRElem> = self.delta.iter().map(|&k| ring.gen(k)).collect();
        heisenberg_section(alg, &e, &d)?.scale_laurent(&self.gauge)
    }
}

/// η/h = Σ δ_i dε_i/h.
pub fn eta_over_h(ring: &CoeffRing, eps: &[usize], delta: &[usize]) -> GreekForm {
    let coords: Vec<usize> = eps.iter().chain(delta).copied().collect();
    let mut out = GreekForm::zero(ring, &coords);
    for (slot, &d) in delta.iter().enumerate() {
        out.comps[slot] = HLaurent::monomial(&ring.gen(d), -1);
    }
    out
}

/// ∇(c·t) = η/h + c⁻¹dc.
pub fn connection_eval(s: &TorsorSection) -> Result<GreekForm> {
    let ring = s.gauge.ring().clone();
    let coords = s.coords();
    let base = eta_over_h(&ring, &s.eps, &s.delta);
    let dc = GreekForm::differential(&s.gauge, &coords)?;
    let ci = s.gauge.inv()?;
    let gauge = GreekForm { coords: coords.clone(), comps: dc.comps.iter().map(|c| c.mul(&ci)).collect::<Result<_>>()? };
    base.add(&gauge)
}

/// Both sides of an invariance computation.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub pulled_back: GreekForm,
    pub transported: GreekForm,
    pub factor: HLaurent,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.pulled_back == self.transported
    }
}

/// Invariance of ∇ under left translation by t(a): γ̄*∇(t) against
/// ∇(t(a)⁻¹·t(· + a)), the latter from the engine's central factor. n = 1.
pub fn alpha_invariance(p: u32, opposite: bool) -> Result<InvarianceReport> {
    let ring = greek_ring(p, &["e1".into(), "d1".into(), "a1".into(), "b1".into()])?;
    let base = wide(WeylAlg::standard(p, 1, &ring)?);
    let alg = if opposite { base.opposite_convention() } else { base };
    let (e, d, a, b) = (ring.gen(0), ring.gen(1), ring.gen(2), ring.gen(3));
    let (e2, d2) = (&e + &a, &d + &b);
    let z = heisenberg_inverse(&alg, &[e.clone()], &[d.clone()])?
        .mul(&heisenberg_inverse(&alg, &[a.clone()], &[b.clone()])?)?
        .mul(&heisenberg_section(&alg, &[e2.clone()], &[d2.clone()])?)?;
    let (c, s) = split_central_factor(&z)?;
    if s != alg.one() {
        return Err(Error::Precondition(format!("translation left a non-central remainder {s}")));
    }
    let section = TorsorSection::canonical(&ring, &[0], &[1]).regauge(&c)?;
    let transported = connection_eval(&section)?;
    let images = vec![e2, d2, a, b];
    let pulled_back = connection_eval(&TorsorSection::canonical(&ring, &[0], &[1]))?.pullback(&images)?;
    Ok(InvarianceReport { pulled_back, transported, factor: c })
}

/// Invariance of ∇ under the one-parameter subgroup with Hamiltonian x³ (p > 3)
/// or x²y (p = 3), n = 1, convention x y − y x = h.
pub fn lambda_invariance(p: u32) -> Result<InvarianceReport> {
    let ring = greek_ring(p, &["e1".into(), "d1".into(), "tau".into()])?;
    let alg = display_convention(p, 1, &ring)?;
    let (e, d, tau) = (ring.gen(0), ring.gen(1), ring.gen(2));
    let x = alg.x(0);
    let (ham, e2, d2) = if p > 3 {
        (x.mul(&x)?.mul(&x)?, &e + &(&tau * &d.pow(2)).scale(3), d.clone())
    } else {
        let (e2, d2) = char3_shift(&tau, &e, &d);
        (x.mul(&x)?.mul(&alg.y(0))?, e2, d2)
    };
    let lam_inv = restricted_exp(&ham, &-&tau)?;
    let z = heisenberg_inverse(&alg, &[e.clone()], &[d.clone()])?
        .mul(&lam_inv)?
        .mul(&heisenberg_section(&alg, &[e2.clone()], &[d2.clone()])?)?;
    let (c, _) = split_central_factor(&z)?;
    let transported = connection_eval(&TorsorSection::canonical(&ring, &[0], &[1]).regauge(&c)?)?;
    let pulled_back = connection_eval(&TorsorSection::canonical(&ring, &[0], &[1]))?.pullback(&[e2, d2, tau])?;
    Ok(InvarianceReport { pulled_back, transported, factor: c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::{hamiltonian, VField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fp_ring(p: u32) -> CoeffRing {
        CoeffRing::field(p).unwrap()
    }

    #[test]
    fn validate_examples() {
        let r = fp_ring(3);
        assert!(AutA0::identity(&r, 1).validate().unwrap().passed());
        let scale = AutA0::new(vec![A0Elem::x(&r, 1, 0), A0Elem::y(&r, 1, 0).scale_i(2)]).unwrap();
        let v = scale.validate().unwrap();
        assert!(!v.passed() && v.failures[0].contains("ω"));
        let re = CoeffRing::new(3, &[("e", 3)]).unwrap();
        let tr = translation(&re, &[re.gen(0)], &[re.zero()]).unwrap();
        assert!(tr.validate().unwrap().passed());
        assert!(AutA0::new(vec![A0Elem::one(&r, 1), A0Elem::y(&r, 1, 0)]).is_err());
    }

    #[test]
    fn inverse_and_compose() {
        let re = CoeffRing::new(5, &[("t", 5)]).unwrap();
        let g = lambda_subgroup(&re, 1, &re.gen(0)).unwrap();
        let gi = g.inverse().unwrap();
        assert_eq!(g.compose(&gi).unwrap(), AutA0::identity(&re, 1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_sp(5, 2, &mut rng);
        let sp = linear(&fp_ring(5), 2, &m).unwrap();
        assert!(sp.validate().unwrap().passed());
        assert_eq!(phi_ga(&sp).unwrap().constant_term(), 0);
    }

    #[test]
    fn one_parameter_subgroups() {
        for p in [3u32, 5] {
            let r = CoeffRing::new(p, &[("t", p), ("u", p)]).unwrap();
            let (t, u) = (r.gen(0), r.gen(1));
            for make in [lambda_subgroup, section_s] {
                let a = make(&r, 1, &t).unwrap();
                let b = make(&r, 1, &u).unwrap();
                let ab = make(&r, 1, &(&t + &u)).unwrap();
                assert_eq!(a.compose(&b).unwrap(), ab, "p = {p}");
                assert!(a.validate().unwrap().passed());
            }
        }
    }

    #[test]
    fn lambda_differential() {
        let r = CoeffRing::new(3, &[("t", 2)]).unwrap();
        let g = lambda_subgroup(&r, 1, &r.gen(0)).unwrap();
        let x2y = A0Elem::monomial_fp(&r, 1, &[2, 1], -1);
        let h = hamiltonian(&x2y);
        for j in 0..2 {
            let z = A0Elem::coord(&r, 1, j);
            let lin = g.images()[j].checked_add(&-z.clone()).unwrap();
            let want = h.apply(&z).scale(&r.gen(0));
            assert_eq!(lin, want);
        }
        let _ = VField::zero(&r, 1);
    }

    #[test]
    fn doubled_square_coefficient_breaks_the_group_law() {
        let r = CoeffRing::new(3, &[("t", 3), ("u", 3)]).unwrap();
        let make = |t: &CRElem| {
            let mut g = lambda_subgroup(&r, 1, t).unwrap();
            let extra = A0Elem::monomial(&r, 1, &[2, 1], &t.pow(2));
            g = AutA0::new(vec![g.images()[0].clone(), g.images()[1].checked_add(&extra).unwrap()]).unwrap();
            g
        };
        let (t, u) = (r.gen(0), r.gen(1));
        assert_ne!(make(&t).compose(&make(&u)).unwrap(), make(&(&t + &u)));
    }

    #[test]
    fn phi_on_section() {
        let r = CoeffRing::new(3, &[("t", 3)]).unwrap();
        let s = section_s(&r, 1, &r.gen(0)).unwrap();
        let c = phi_ga(&s).unwrap();
        assert!(!c.is_zero());
        assert_eq!(c, r.gen(0).scale(c.coefficient(&[1])));
    }

    #[test]
    fn heisenberg_section_moves_origin() {
        let r = CoeffRing::new(3, &[("e", 3), ("d", 3)]).unwrap();
        let alg = display_convention(3, 1, &r).unwrap();
        let (e, d) = (r.gen(0), r.gen(1));
        let t = heisenberg_section(&alg, &[e.clone()], &[d.clone()]).unwrap();
        assert_eq!(t.num_terms(), 9);
        let ti = heisenberg_inverse(&alg, &[e.clone()], &[d.clone()]).unwrap();
        assert_eq!(t.mul(&ti).unwrap(), alg.one());
        let cx = ti.mul(&alg.x(0)).unwrap().mul(&t).unwrap();
        assert_eq!(cx, alg.x(0).add(&alg.constant(&d)).unwrap());
    }

    #[test]
    fn translation_identity_small() {
        let rep = verify_translation_identity(3, 1, true).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        let pinned = verify_translation_identity(3, 1, false).unwrap();
        assert!(pinned.passed(), "{:?}", pinned.failures);
    }

    #[test]
    fn connection_gauge_law() {
        let r = CoeffRing::new(3, &[("e", 3), ("d", 3), ("c", 3)]).unwrap();
        let t = TorsorSection::canonical(&r, &[0], &[1]);
        let base = connection_eval(&t).unwrap();
        assert_eq!(base, eta_over_h(&r, &[0], &[1]));
        let alg = display_convention(3, 1, &r).unwrap();
        let constant = central_exp(&alg, &r.gen(2)).unwrap();
        assert_eq!(connection_eval(&t.regauge(&constant).unwrap()).unwrap(), base);
    }

    #[test]
    fn alpha_invariance_literal() {
        let rep = alpha_invariance(3, true).unwrap();
        assert!(rep.passed(), "{} vs {}", rep.pulled_back, rep.transported);
    }
}
