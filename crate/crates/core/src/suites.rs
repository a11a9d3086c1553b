//! Verification checks grouped by module. Every check id has the form
//! `cNN.name`, where NN is the acceptance criterion it belongs to.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::autgrp::{self, AutA0};
use crate::coeff::{laurent_is_unit, laurent_unit_decompose, CRElem, CoeffRing, HLaurent, HSeries};
use crate::diffops::{self, CoordRing, DAlg};
use crate::fp::{self, FpMatrix};
use crate::lie;
use crate::matrep::{self, Lattice, LaurentMatrix};
use crate::poisson::{a0_dim, monomial_basis, poisson_bracket, restricted_power, A0Elem, KForm, VField};
use crate::weyl::{alpha_exp, op_involution, w_commutator, WeylAlg, WeylElem};
use crate::{Error, Result};

pub const SUPPORTED_PRIMES: [u32; 3] = [3, 5, 7];
pub const MEMORY_LIMIT: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteConfig {
    pub p: u32,
    pub n: usize,
    /// h-adic precision used where a truncated inverse is needed
    pub precision: usize,
    /// pole floor override for the Weyl algebras
    pub floor: Option<i32>,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(p: u32, n: usize) -> SuiteConfig {
        SuiteConfig { p, n, precision: 2 * p as usize, floor: None, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_PRIMES.contains(&self.p) {
            return Err(Error::Config(format!("p = {} is not one of 3, 5, 7", self.p)));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        let size = (self.p as u64).checked_pow(4 * self.n as u32);
        if size.map_or(true, |s| s > MEMORY_LIMIT) {
            return Err(Error::Config(format!("p^(4n) exceeds {MEMORY_LIMIT} at p = {}, n = {}", self.p, self.n)));
        }
        if self.precision == 0 {
            return Err(Error::Config("precision must be positive".into()));
        }
        Ok(())
    }

    fn weyl(&self, ring: &CoeffRing) -> Result<WeylAlg> {
        let a = WeylAlg::standard(self.p, self.n, ring)?;
        Ok(match self.floor {
            Some(f) => a.with_floor(f),
            None => a,
        })
    }

    fn field(&self) -> Result<CoeffRing> {
        CoeffRing::field(self.p)
    }

    fn rng(&self, id: &str) -> ChaCha8Rng {
        // FNV-1a of the id keeps streams independent of execution order
        let mut hsh: u64 = 0xcbf29ce484222325;
        for b in id.bytes() {
            hsh = (hsh ^ b as u64).wrapping_mul(0x100000001b3);
        }
        ChaCha8Rng::seed_from_u64(self.seed ^ hsh)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub suite: String,
    pub check: String,
    pub criterion: u8,
    pub params: String,
    pub status: Status,
    pub witness: Option<String>,
    pub note: Option<String>,
    pub ms: u128,
}

/// What a check body returns: failures (empty = pass) and an optional
/// informational note.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub note: Option<String>,
}

impl Outcome {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn with_note(mut self, note: String) -> Outcome {
        self.note = Some(note);
        self
    }
}

type Body = fn(&SuiteConfig) -> Result<Outcome>;

pub struct Check {
    pub suite: &'static str,
    pub id: &'static str,
    pub criterion: u8,
    pub applies: fn(&SuiteConfig) -> bool,
    pub requirement: &'static str,
    body: Body,
}

impl Check {
    pub fn name(&self) -> &'static str {
        self.id.split_once('.').map_or(self.id, |(_, n)| n)
    }

    pub fn run(&self, cfg: &SuiteConfig) -> CheckResult {
        let start = Instant::now();
        let res = (self.body)(cfg);
        let ms = start.elapsed().as_millis();
        let (status, witness, note) = match res {
            Ok(o) if o.failures.is_empty() => (Status::Pass, None, o.note),
            Ok(o) => {
                let shown: Vec<String> = o.failures.iter().take(5).cloned().collect();
                let more = o.failures.len().saturating_sub(5);
                let mut w = shown.join("; ");
                if more > 0 {
                    w.push_str(&format!("; … {more} more"));
                }
                (Status::Fail, Some(w), o.note)
            }
            Err(e) => (Status::Error, Some(e.to_string()), None),
        };
        CheckResult {
            suite: self.suite.into(),
            check: self.id.into(),
            criterion: self.criterion,
            params: format!("p={} n={}", cfg.p, cfg.n),
            status,
            witness,
            note,
            ms,
        }
    }
}

fn any(_: &SuiteConfig) -> bool {
    true
}
fn n_is_1(c: &SuiteConfig) -> bool {
    c.n == 1
}
fn p3_n1(c: &SuiteConfig) -> bool {
    c.p == 3 && c.n == 1
}
fn p_gt3_n1(c: &SuiteConfig) -> bool {
    c.p > 3 && c.n == 1
}

pub fn registry() -> Vec<Check> {
    let c = |suite, id, criterion, applies, requirement, body| Check { suite, id, criterion, applies, requirement, body };
    vec![
        c("weyl", "c01.relations", 1, any as fn(&SuiteConfig) -> bool, "any", weyl_relations as Body),
        c("weyl", "c01.quantization", 1, any, "any", quantization_axiom),
        c("matrep", "c02.multiplicative", 2, any, "any", rep_multiplicative),
        c("matrep", "c02.rank", 2, any, "any", rep_rank),
        c("weyl", "c03.restricted", 3, any, "any", restricted_cross_check),
        c("diffops", "c04.centrality", 4, any, "any", centrality_sweep),
        c("diffops", "c04.katz", 4, any, "any", katz_and_cocycle),
        c("diffops", "c04.flat", 4, any, "any", flat_dictionary),
        c("diffops", "c05.psi", 5, n_is_1, "n = 1", psi_homomorphism),
        c("autgrp", "c06.translation", 6, any, "any", translation_identity),
        c("autgrp", "c06.cubic", 6, p_gt3_n1, "p > 3, n = 1", cubic_identity),
        c("autgrp", "c06.char3", 6, p3_n1, "p = 3, n = 1", char3_identity),
        c("autgrp", "c07.alpha", 7, n_is_1, "n = 1", alpha_invariance),
        c("autgrp", "c07.lambda", 7, n_is_1, "n = 1", lambda_invariance),
        c("lie", "c08.commutator", 8, any, "any", commutator_span),
        c("lie", "c08.generation", 8, any, "any", generation),
        c("lie", "c08.irreducible", 8, any, "any", irreducibility),
        c("lie", "c08.jacobson", 8, any, "any", jacobson),
        c("lie", "c08.lift", 8, any, "any", moment_lift),
        c("autgrp", "c09.phi_additive", 9, any, "any", phi_additive),
        c("autgrp", "c09.one_parameter", 9, any, "any", one_parameter),
        c("autgrp", "c09.validate", 9, any, "any", validate_witness),
        c("coeff", "c10.units", 10, any, "any", unit_decomposition),
        c("coeff", "c10.unit_criterion", 10, any, "any", unit_criterion),
        c("matrep", "c10.pairing", 10, any, "any", pairing),
        c("matrep", "c10.lattices", 10, any, "any", lattices),
        c("weyl", "c11.involution", 11, any, "any", involution),
    ]
}

pub fn suite_names() -> Vec<&'static str> {
    let mut v: Vec<&str> = registry().iter().map(|c| c.suite).collect();
    v.sort();
    v.dedup();
    v
}

/// Selector grammar: `all`, `<suite>`, `<suite>/<name>` or a check id such
/// as `c06.char3`. Explicitly naming a check that does not apply at (p, n)
/// is a configuration error; suite-level selection skips it.
pub fn select(cfg: &SuiteConfig, selector: &str) -> Result<Vec<Check>> {
    cfg.validate()?;
    let all = registry();
    let sel = selector.trim();
    let explicit = sel.contains('/') || sel.contains('.');
    let picked: Vec<Check> = all
        .into_iter()
        .filter(|c| match sel.split_once('/') {
            _ if sel == "all" => true,
            Some((s, n)) => c.suite == s && c.name() == n,
            None => c.suite == sel || c.id == sel,
        })
        .collect();
    if picked.is_empty() {
        return Err(Error::Config(format!("unknown suite or check `{selector}`")));
    }
    if explicit {
        if let Some(c) = picked.iter().find(|c| !(c.applies)(cfg)) {
            return Err(Error::Config(format!("{} requires {}", c.id, c.requirement)));
        }
    }
    Ok(picked.into_iter().filter(|c| (c.applies)(cfg)).collect())
}

/// Runs the selected checks sequentially, results sorted by suite and id.
pub fn run(cfg: &SuiteConfig, selector: &str) -> Result<Vec<CheckResult>> {
    let mut out: Vec<CheckResult> = select(cfg, selector)?.iter().map(|c| c.run(cfg)).collect();
    sort_results(&mut out);
    Ok(out)
}

pub fn sort_results(r: &mut [CheckResult]) {
    r.sort_by(|a, b| (&a.suite, &a.check, &a.params).cmp(&(&b.suite, &b.check, &b.params)));
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

impl Summary {
    pub fn of(results: &[CheckResult]) -> Summary {
        let mut s = Summary::default();
        for r in results {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Error => s.error += 1,
            }
        }
        s
    }

    pub fn ok(&self) -> bool {
        self.fail == 0 && self.error == 0
    }
}

// ---------------------------------------------------------------- helpers

fn random_a0<R: Rng>(ring: &CoeffRing, n: usize, rng: &mut R) -> A0Elem {
    let p = ring.p();
    let coeffs = (0..a0_dim(p, n)).map(|_| ring.constant(rng.gen_range(0..p) as i64)).collect();
    A0Elem::from_coeffs(ring, n, coeffs)
}

fn random_weyl<R: Rng>(alg: &WeylAlg, rng: &mut R, terms: usize) -> Result<WeylElem> {
    let p = alg.p();
    let mut out = alg.zero();
    for _ in 0..terms {
        let e: Vec<u32> = (0..alg.nvars()).map(|_| rng.gen_range(0..p)).collect();
        let c = alg.ring().constant(rng.gen_range(1..p) as i64);
        out = out.add(&alg.monomial(&e, &HLaurent::monomial(&c, rng.gen_range(0..3))))?;
    }
    Ok(out)
}

fn gen_names(alg: &WeylAlg) -> Vec<String> {
    alg.var_names()
}

// ------------------------------------------------------------------- weyl

fn weyl_relations(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let mut o = Outcome::default();
    let pinned = cfg.weyl(&ring)?;
    for alg in [pinned.clone(), pinned.opposite_convention()] {
        let s = alg.sign();
        let h = alg.h_pow(1);
        let tag = if s == 1 { "y x − x y = h" } else { "x y − y x = h" };
        for i in 0..cfg.n {
            for j in 0..cfg.n {
                let want = if i == j { h.scale(&ring.constant(s)) } else { alg.zero() };
                o.expect(w_commutator(&alg.y(i), &alg.x(j))? == want, || format!("[y{}, x{}] ({tag})", i + 1, j + 1));
                o.expect(w_commutator(&alg.x(i), &alg.x(j))?.is_zero(), || format!("[x{}, x{}]", i + 1, j + 1));
                o.expect(w_commutator(&alg.y(i), &alg.y(j))?.is_zero(), || format!("[y{}, y{}]", i + 1, j + 1));
            }
        }
        for (g, name) in alg.gens().iter().zip(gen_names(&alg)) {
            o.expect(g.pow(cfg.p)?.is_zero(), || format!("{name}^p ≠ 0 ({tag})"));
        }
    }
    let flat = WeylAlg::flat(cfg.p, cfg.n, &ring)?;
    let h = flat.h_pow(1);
    for i in 0..cfg.n {
        for j in 0..cfg.n {
            let d = if i == j { h.clone() } else { flat.zero() };
            o.expect(w_commutator(&flat.v(i), &flat.x(j))? == d, || format!("flat [v{}, x{}]", i + 1, j + 1));
            o.expect(w_commutator(&flat.u(i), &flat.y(j))? == d, || format!("flat [u{}, y{}]", i + 1, j + 1));
            for (a, b, what) in [
                (flat.v(i), flat.y(j), "v,y"),
                (flat.u(i), flat.x(j), "u,x"),
                (flat.v(i), flat.u(j), "v,u"),
                (flat.x(i), flat.y(j), "x,y"),
                (flat.x(i), flat.x(j), "x,x"),
                (flat.y(i), flat.y(j), "y,y"),
                (flat.v(i), flat.v(j), "v,v"),
                (flat.u(i), flat.u(j), "u,u"),
            ] {
                o.expect(w_commutator(&a, &b)?.is_zero(), || format!("flat [{what}] at ({}, {})", i + 1, j + 1));
            }
        }
    }
    for (g, name) in flat.gens().iter().zip(gen_names(&flat)) {
        o.expect(g.pow(cfg.p)?.is_zero(), || format!("flat {name}^p ≠ 0"));
    }
    Ok(o)
}

/// [lift f, lift g]/h ≡ {f, g} mod h in x y − y x = h, and ≡ −{f, g} in the
/// pinned convention, over all monomial pairs.
fn quantization_axiom(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let mut o = Outcome::default();
    let basis: Vec<A0Elem> = monomial_basis(cfg.p, cfg.n).iter().map(|e| A0Elem::monomial_fp(&ring, cfg.n, e, 1)).collect();
    let pinned = cfg.weyl(&ring)?;
    for alg in [pinned.opposite_convention(), pinned] {
        let lifts: Vec<WeylElem> = basis.iter().map(|f| alg.lift(f)).collect::<Result<_>>()?;
        for (f, lf) in basis.iter().zip(&lifts) {
            for (g, lg) in basis.iter().zip(&lifts) {
                let c = w_commutator(lf, lg)?.div_h(1)?.mod_h()?;
                let want = poisson_bracket(f, g)?.scale_i(-alg.sign());
                o.expect(c == want, || format!("f = {f}, g = {g}, sign {}", alg.sign()));
            }
        }
    }
    Ok(o.with_note(format!("{} pairs per convention", basis.len() * basis.len())))
}

/// lift(f)^p = h^{p−1}·g with g ≡ f^{[p]} mod h, for every nonconstant
/// monomial f.
fn restricted_cross_check(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let mut o = Outcome::default();
    let eta = KForm::eta(&ring, cfg.n);
    let pinned = cfg.weyl(&ring)?;
    for alg in [pinned.clone(), pinned.opposite_convention()] {
        // f in the maximal ideal, where f^p = 0 in A₀
        for e in monomial_basis(cfg.p, cfg.n).into_iter().skip(1) {
            let f = A0Elem::monomial_fp(&ring, cfg.n, &e, 1);
            let power = alg.lift(&f)?.pow(cfg.p)?;
            let g = match power.div_h(cfg.p as i32 - 1) {
                Ok(g) => g.mod_h()?,
                Err(_) => {
                    o.failures.push(format!("lift({f})^p not divisible by h^(p−1)"));
                    continue;
                }
            };
            let want = restricted_power(&f, &eta)?;
            o.expect(g == want, || format!("f = {f}: got {g}, expected {want} (sign {})", alg.sign()));
        }
    }
    if cfg.p == 3 {
        let xy = A0Elem::monomial_fp(&ring, cfg.n, &{
            let mut e = vec![0; 2 * cfg.n];
            e[0] = 1;
            e[cfg.n] = 1;
            e
        }, 1);
        o.expect(restricted_power(&xy, &eta)? == xy, || "(x1 y1)^[3] ≠ x1 y1".into());
    }
    Ok(o)
}

/// α∘α = Id and α(ab) = α(b)α(a) with h ↦ −h on random pairs.
fn involution(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let alg = cfg.weyl(&ring)?;
    let mut rng = cfg.rng("c11.involution");
    let mut o = Outcome::default();
    for k in 0..20 {
        let a = random_weyl(&alg, &mut rng, 4)?;
        let b = random_weyl(&alg, &mut rng, 4)?;
        o.expect(op_involution(&op_involution(&a)?)? == a, || format!("pair {k}: α∘α ≠ Id on {a}"));
        let lhs = op_involution(&a.mul(&b)?)?;
        let rhs = op_involution(&b)?.mul(&op_involution(&a)?)?;
        o.expect(lhs == rhs, || format!("pair {k}: α(ab) ≠ α(b)α(a) for a = {a}, b = {b}"));
    }
    Ok(o)
}

// ----------------------------------------------------------------- matrep

fn rep_multiplicative(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let alg = cfg.weyl(&ring)?;
    let basis = alg.pbw_basis();
    let reps: Vec<LaurentMatrix> = basis.iter().map(matrep::rep).collect::<Result<_>>()?;
    let mut o = Outcome::default();
    let check = |i: usize, j: usize, o: &mut Outcome| -> Result<()> {
        let lhs = matrep::rep(&basis[i].mul(&basis[j])?)?;
        let rhs = reps[i].mul(&reps[j])?;
        o.expect(lhs == rhs, || format!("rep({} · {})", basis[i], basis[j]));
        Ok(())
    };
    let pairs = if cfg.n == 1 {
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                check(i, j, &mut o)?;
            }
        }
        basis.len() * basis.len()
    } else {
        let mut rng = cfg.rng("c02.multiplicative");
        for _ in 0..200 {
            let (i, j) = (rng.gen_range(0..basis.len()), rng.gen_range(0..basis.len()));
            check(i, j, &mut o)?;
        }
        200
    };
    o.expect(reps[0] == LaurentMatrix::identity(&ring, (cfg.p as usize).pow(cfg.n as u32)), || "rep(1) ≠ Id".into());
    Ok(o.with_note(format!("{pairs} pairs")))
}

fn rep_rank(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let r = matrep::basis_rank_check(&cfg.weyl(&ring)?)?;
    let mut o = Outcome::default();
    o.expect(r.passed(), || format!("rank {} of {}", r.rank, r.expected));
    Ok(o.with_note(format!("rank {}", r.rank)))
}

fn pairing(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let alg = cfg.weyl(&ring)?;
    let m = matrep::heisenberg_matrix(&alg)?;
    let om = KForm::omega(&ring, cfg.n);
    let mut o = Outcome::default();
    for i in 0..2 * cfg.n {
        for j in 0..2 * cfg.n {
            let v = om.iota(&VField::coordinate(&ring, cfg.n, i))?.iota(&VField::coordinate(&ring, cfg.n, j))?;
            let want = HLaurent::monomial(v.as_function().constant_term(), -1);
            o.expect(m.get(i, j) == &want, || format!("entry ({i}, {j}): {} vs {want}", m.get(i, j)));
        }
    }
    Ok(o)
}

fn lattice_bounds_hold(l: &Lattice, ring: &CoeffRing) -> Result<bool> {
    let d = l.dim();
    let (nb, mb) = l.bounds();
    let lower = Lattice::from_generators(LaurentMatrix::diag_h(ring, &vec![nb; d]))?;
    let upper = Lattice::from_generators(LaurentMatrix::diag_h(ring, &vec![-mb; d]))?;
    Ok(l.contains_lattice(&lower)? && upper.contains_lattice(l)?)
}

fn lattices(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.p;
    let k = cfg.field()?;
    let mut o = Outcome::default();
    let id = matrep::lattice_from_universal_matrix(&LaurentMatrix::identity(&k, 2))?;
    o.expect(id.equals(&Lattice::standard(&k, 2)?)?, || "A = Id does not give V[[h]]".into());
    let l = matrep::lattice_from_universal_matrix(&LaurentMatrix::diag_h(&k, &[-1, 0]))?;
    o.expect(l.equals(&Lattice::from_generators(LaurentMatrix::diag_h(&k, &[1, 0]))?)?, || "diag(1/h, 1) lattice".into());
    o.expect(lattice_bounds_hold(&l, &k)?, || "diag(1/h, 1) bounds".into());
    // the universal α_p-translation at n = 1
    let re = CoeffRing::new(p, &[("eps", p)])?;
    let a = WeylAlg::standard(p, 1, &re)?;
    let u = matrep::rep(&alpha_exp(&a.x(0), &re.gen(0))?)?;
    let l = matrep::lattice_from_universal_matrix(&u)?;
    o.expect(lattice_bounds_hold(&l, &k)?, || "translation lattice bounds".into());
    o.expect(matrep::lattice_invariance(&u, &l)?, || "translation lattice is not invariant".into());
    let (nb, mb) = l.bounds();
    o.expect(nb > 0 || mb > 0, || "translation lattice is V[[h]]".into());
    Ok(o.with_note(format!("translation lattice bounds ({nb}, {mb})")))
}

// ------------------------------------------------------------------ coeff

fn random_decomposable<R: Rng>(ring: &CoeffRing, rng: &mut R) -> Result<(CRElem, HSeries, i32, HLaurent)> {
    let r = ring.random_unit(rng);
    let mut w = vec![ring.one()];
    for _ in 0..rng.gen_range(0..4) {
        w.push(ring.random(rng));
    }
    let w = HSeries::new(ring, w, None)?;
    let m = rng.gen_range(-2..=2);
    let mut w_hat = HLaurent::one(ring);
    for k in 1..=rng.gen_range(0..3) {
        w_hat = w_hat.add(&HLaurent::monomial(&ring.random_nilpotent(rng), -k))?;
    }
    Ok((r, w, m, w_hat))
}

fn unit_decomposition(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.p;
    let ring = CoeffRing::new(p, &[("eps", 3), ("del", 2)])?;
    let mut rng = cfg.rng("c10.units");
    let mut o = Outcome::default();
    for k in 0..100 {
        let (r, w, m, w_hat) = random_decomposable(&ring, &mut rng)?;
        let u = w.to_laurent().shift(m).scale(&r).mul(&w_hat)?;
        let d = laurent_unit_decompose(&u)?;
        o.expect(d.recompose()? == u, || format!("unit {k}: recomposition of {u}"));
        o.expect(d.r == r && d.w == w && d.m == m && d.w_hat == w_hat, || format!("unit {k}: factors of {u} not recovered"));
    }
    Ok(o)
}

/// Brute-force checks of the unit criterion on every ring with at most 81
/// elements in the catalogue for p.
fn unit_criterion(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.p;
    let rings: Vec<CoeffRing> = match p {
        3 => vec![
            CoeffRing::new(3, &[("e", 3)])?,
            CoeffRing::new(3, &[("e", 2), ("d", 2)])?,
            CoeffRing::new(3, &[("a", 4)])?,
        ],
        _ => vec![CoeffRing::new(p, &[("e", 2)])?],
    };
    let mut o = Outcome::default();
    for ring in &rings {
        let elems: Vec<CRElem> = all_elements(ring);
        for u in &elems {
            let found = elems.iter().any(|v| (u * v).is_one());
            o.expect(found == u.is_unit(), || format!("{u} in {ring}: search {found}"));
        }
        // Laurent polynomials a h^{-1} + b + c h over the smallest ring
        if ring.cardinality() == Some(p as u128 * p as u128) || rings.len() == 1 {
            for a in &elems {
                for b in &elems {
                    for c in &elems {
                        let u = HLaurent::from_coeffs(ring, -1, None, vec![(-1, a.clone()), (0, b.clone()), (1, c.clone())])?;
                        let claim = laurent_is_unit(&u)?;
                        if claim {
                            let inv = u.inv_to(cfg.precision as i32)?;
                            let prod = u.mul(&inv)?;
                            let ok = (prod.floor()..prod.prec().unwrap_or(0))
                                .all(|i| prod.coeff(i).map(|c| if i == 0 { c.is_one() } else { c.is_zero() }).unwrap_or(false));
                            o.expect(ok, || format!("{u}: claimed unit, inverse fails"));
                        } else {
                            let nil = u.pow(ring.nil_index())?.is_zero();
                            o.expect(nil, || format!("{u}: claimed non-unit but not nilpotent"));
                        }
                    }
                }
            }
        }
    }
    Ok(o)
}

fn all_elements(ring: &CoeffRing) -> Vec<CRElem> {
    let p = ring.p();
    let keys = ring.all_keys();
    let total = (p as usize).pow(keys.len() as u32);
    (0..total)
        .map(|mut idx| {
            let terms: Vec<(u64, u32)> = keys
                .iter()
                .map(|&k| {
                    let c = (idx % p as usize) as u32;
                    idx /= p as usize;
                    (k, c)
                })
                .collect();
            CRElem::from_terms(ring, terms)
        })
        .collect()
}

// ---------------------------------------------------------------- diffops

/// p-curvature of every field z^a ∂_i with |a| ≤ 2 commutes with all
/// generators, in the degree-window ring with K = 3p.
fn centrality_sweep(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let m = cfg.n;
    let coord = CoordRing::window(m, 3 * cfg.p, &ring)?;
    let alg = DAlg::new(&coord);
    let mut o = Outcome::default();
    let mut exps: Vec<Vec<u32>> = vec![vec![0; m]];
    for _ in 0..2 {
        let mut next = exps.clone();
        for e in &exps {
            for j in 0..m {
                let mut f = e.clone();
                f[j] += 1;
                next.push(f);
            }
        }
        next.sort();
        next.dedup();
        exps = next;
    }
    let mut count = 0;
    for e in &exps {
        for i in 0..m {
            let mut theta = vec![coord.zero(); m];
            theta[i] = coord.monomial(e, &ring.one());
            let pc = diffops::p_curvature(&alg, &theta)?;
            count += 1;
            o.expect(diffops::is_central(&pc)?, || format!("z^{e:?} ∂{}", i + 1));
        }
    }
    Ok(o.with_note(format!("{count} fields")))
}

/// Katz identity on 30 random exact forms; φ_{μ₁}∘φ_{μ₂} = φ_{μ₁+μ₂} and
/// relation preservation on their parts of order ≥ 2.
fn katz_and_cocycle(cfg: &SuiteConfig) -> Result<Outcome> {
    let ring = cfg.field()?;
    let alg = diffops::flat_reduction(cfg.n, &ring)?;
    let coord = CoordRing::frobenius(cfg.n, &ring)?;
    let mut rng = cfg.rng("c04.katz");
    let prims: Vec<A0Elem> = (0..30).map(|_| random_a0(&ring, cfg.n, &mut rng)).collect();
    let mut o = Outcome::default();
    for (k, f) in prims.iter().enumerate() {
        let bad = diffops::katz_check(&coord, &KForm::function(f).d()?)?;
        o.expect(bad.is_empty(), || format!("form {k}: Katz fails in directions {bad:?}"));
    }
    // φ_μ preserves the reduction at η only when μ^p = 0, i.e. f has no
    // linear part
    let forms: Vec<KForm> = prims
        .iter()
        .map(|f| KForm::function(&(2..=2 * cfg.n as u32 * (cfg.p - 1)).fold(A0Elem::zero(&ring, cfg.n), |a, l| &a + &f.homogeneous_part(l))).d())
        .collect::<Result<_>>()?;
    for (k, mu) in forms.iter().enumerate() {
        let phi = diffops::phi_mu(&alg, mu)?;
        let rel = phi.relation_failures();
        o.expect(rel.is_empty(), || format!("form {k}: φ breaks {rel:?}"));
        let nu = &forms[(k + 1) % forms.len()];
        let lhs = phi.compose(&diffops::phi_mu(&alg, nu)?);
        let rhs = diffops::phi_mu(&alg, &mu.add(nu)?)?;
        o.expect(lhs == rhs, || format!("forms {k}, {}: cocycle", (k + 1) % forms.len()));
    }
    Ok(o)
}

fn flat_dictionary(cfg: &SuiteConfig) -> Result<Outcome> {
    let (count, bad) = diffops::flat_dictionary_check(cfg.n, &cfg.field()?)?;
    Ok(Outcome { failures: bad, note: Some(format!("{count} products")) })
}

fn random_point<R: Rng>(ring: &CoeffRing, rng: &mut R) -> Result<AutA0> {
    let p = ring.p();
    let (e, d, t) = (ring.gen(0), ring.gen(1), ring.gen(2));
    let c = |rng: &mut R| rng.gen_range(1..p) as i64;
    Ok(match rng.gen_range(0..4) {
        0 => autgrp::linear(ring, 1, &autgrp::random_sp(p, 1, rng))?,
        1 => autgrp::translation(ring, &[e.scale_i(c(rng))], &[d.scale_i(c(rng))])?,
        2 => autgrp::lambda_subgroup(ring, 1, &t.scale_i(c(rng)))?,
        _ => autgrp::linear(ring, 1, &autgrp::random_sp(p, 1, rng))?
            .compose(&autgrp::translation(ring, &[e.scale_i(c(rng))], &[ring.zero()])?)?,
    })
}

fn psi_homomorphism(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.p;
    let ring = CoeffRing::new(p, &[("e", p), ("d", p), ("t", p)])?;
    let alg = diffops::flat_reduction(1, &ring)?;
    let mut rng = cfg.rng("c05.psi");
    let mut o = Outcome::default();
    for k in 0..20 {
        let a = random_point(&ring, &mut rng)?;
        let b = random_point(&ring, &mut rng)?;
        let pa = diffops::psi_action(&alg, &a)?;
        let pb = diffops::psi_action(&alg, &b)?;
        let pab = diffops::psi_action(&alg, &a.compose(&b)?)?;
        o.expect(pa.compose(&pb) == pab, || format!("pair {k}: ψ_(g₁g₂) ≠ ψ_g₁ ψ_g₂ for g₁ = {a}, g₂ = {b}"));
        let rel = pa.relation_failures();
        o.expect(rel.is_empty(), || format!("pair {k}: ψ breaks {rel:?}"));
    }
    Ok(o)
}

// ----------------------------------------------------------------- autgrp

fn report(r: autgrp::IdentityReport) -> Outcome {
    let note = r.factor.as_ref().map(|f| format!("central factor {f}"));
    Outcome { failures: r.failures, note }
}

fn translation_identity(cfg: &SuiteConfig) -> Result<Outcome> {
    Ok(report(autgrp::verify_translation_identity(cfg.p, cfg.n, true)?))
}

fn cubic_identity(cfg: &SuiteConfig) -> Result<Outcome> {
    Ok(report(autgrp::verify_cubic_identity(cfg.p)?))
}

fn char3_identity(_: &SuiteConfig) -> Result<Outcome> {
    Ok(report(autgrp::verify_char3_identity()?))
}

fn invariance(r: autgrp::InvarianceReport) -> Outcome {
    let mut o = Outcome::default();
    o.expect(r.passed(), || format!("pulled back {} vs transported {}", r.pulled_back, r.transported));
    o.with_note(format!("∇ = {}", r.pulled_back))
}

fn alpha_invariance(cfg: &SuiteConfig) -> Result<Outcome> {
    Ok(invariance(autgrp::alpha_invariance(cfg.p, true)?))
}

fn lambda_invariance(cfg: &SuiteConfig) -> Result<Outcome> {
    Ok(invariance(autgrp::lambda_invariance(cfg.p)?))
}

/// φ(g₁g₂) = φ(g₁) + φ(g₂) on products of Sp, s(t), λ(t) and translations.
fn phi_additive(cfg: &SuiteConfig) -> Result<Outcome> {
    let (p, n) = (cfg.p, cfg.n);
    let ring = CoeffRing::new(p, &[("t", p), ("u", p), ("e", 2)])?;
    let mut rng = cfg.rng("c09.phi_additive");
    let point = |rng: &mut ChaCha8Rng| -> Result<AutA0> {
        let c = |rng: &mut ChaCha8Rng| ring.constant(rng.gen_range(0..p) as i64);
        let (t, u, e) = (ring.gen(0), ring.gen(1), ring.gen(2));
        let mut g = autgrp::linear(&ring, n, &autgrp::random_sp(p, n, rng))?;
        g = g.compose(&autgrp::section_s(&ring, n, &(&(&t * &c(rng)) + &(&u * &c(rng))))?)?;
        g = g.compose(&autgrp::lambda_subgroup(&ring, n, &(&u * &c(rng)))?)?;
        let eps: Vec<CRElem> = (0..n).map(|_| &e * &c(rng)).collect();
        let del: Vec<CRElem> = (0..n).map(|_| &e * &c(rng)).collect();
        g.compose(&autgrp::translation(&ring, &eps, &del)?)
    };
    let mut o = Outcome::default();
    for k in 0..30 {
        let a = point(&mut rng)?;
        let b = point(&mut rng)?;
        let lhs = autgrp::phi_ga(&a.compose(&b)?)?;
        let rhs = &autgrp::phi_ga(&a)? + &autgrp::phi_ga(&b)?;
        o.expect(lhs == rhs, || format!("pair {k}: φ(g₁g₂) = {lhs}, φ(g₁) + φ(g₂) = {rhs}"));
    }
    let one = CoeffRing::new(p, &[("t", 2)])?;
    let c = autgrp::phi_ga(&autgrp::section_s(&one, n, &one.gen(0))?)?;
    Ok(o.with_note(format!("φ(s(t)) = {c}")))
}

fn one_parameter(cfg: &SuiteConfig) -> Result<Outcome> {
    let (p, n) = (cfg.p, cfg.n);
    let r = CoeffRing::new(p, &[("t", p), ("u", p)])?;
    let (t, u) = (r.gen(0), r.gen(1));
    let mut o = Outcome::default();
    for (name, make) in [("s", autgrp::section_s as fn(&CoeffRing, usize, &CRElem) -> Result<AutA0>), ("λ", autgrp::lambda_subgroup)] {
        let a = make(&r, n, &t)?;
        let b = make(&r, n, &u)?;
        o.expect(a.compose(&b)? == make(&r, n, &(&t + &u))?, || format!("{name}(t){name}(u) ≠ {name}(t+u)"));
        o.expect(make(&r, n, &r.zero())? == AutA0::identity(&r, n), || format!("{name}(0) ≠ Id"));
        let v = a.validate()?;
        o.expect(v.passed(), || format!("{name}(t) fails validation: {:?}", v.failures));
    }
    Ok(o)
}

fn validate_witness(cfg: &SuiteConfig) -> Result<Outcome> {
    let (p, n) = (cfg.p, cfg.n);
    let r = cfg.field()?;
    let mut images: Vec<A0Elem> = (0..2 * n).map(|j| A0Elem::coord(&r, n, j)).collect();
    images[n] = images[n].scale_i(2);
    let v = AutA0::new(images)?.validate()?;
    let mut o = Outcome::default();
    o.expect(!v.passed(), || "y1 ↦ 2 y1 accepted".into());
    o.expect(v.failures.iter().any(|f| f.contains('ω')), || format!("rejected for the wrong reason: {:?}", v.failures));
    o.expect(AutA0::identity(&r, n).validate()?.passed(), || "identity rejected".into());
    let m = autgrp::random_sp(p, n, &mut cfg.rng("c09.validate"));
    o.expect(autgrp::linear(&r, n, &m)?.validate()?.passed(), || "random symplectic map rejected".into());
    Ok(o)
}

// -------------------------------------------------------------------- lie

fn commutator_span(cfg: &SuiteConfig) -> Result<Outcome> {
    let c = lie::commutator_span(cfg.p, cfg.n)?;
    let mut o = Outcome::default();
    o.expect(c.codimension() == 1, || format!("dim {} in m² of dim {}", c.dim, c.m2_dim));
    o.expect(c.matches_graded, || "span differs from the graded description".into());
    Ok(o.with_note(format!("{}/{}", c.dim, c.m2_dim)))
}

fn generation(cfg: &SuiteConfig) -> Result<Outcome> {
    let (p, n) = (cfg.p, cfg.n);
    let r = cfg.field()?;
    let mut e = vec![0; 2 * n];
    if p == 3 {
        e[0] = 2;
        e[n] = 1;
    } else {
        e[0] = 3;
    }
    let z = A0Elem::monomial_fp(&r, n, &e, 1);
    let mut o = Outcome::default();
    o.expect(lie::generation_check(p, n, &z)?, || format!("z = {z} does not generate"));
    o.expect(!lie::generation_check(p, n, &A0Elem::zero(&r, n))?, || "m²/m³ alone generates".into());
    Ok(o.with_note(format!("z = {z}")))
}

fn irreducibility(cfg: &SuiteConfig) -> Result<Outcome> {
    let mut o = Outcome::default();
    for l in 0..2 * (cfg.p - 1) {
        o.expect(lie::irreducibility_check(cfg.p, cfg.n, l)?, || format!("degree {l} is reducible"));
    }
    Ok(o)
}

/// s_i(X, Y) vanish in central extensions of abelian algebras; sl₂ is the
/// contrast case.
fn jacobson(cfg: &SuiteConfig) -> Result<Outcome> {
    let p = cfg.p;
    let k = 2 * cfg.n;
    let mut form = FpMatrix::zeros(p, k, k);
    for i in 0..cfg.n {
        form.set(i, cfg.n + i, fp::neg(1, p));
        form.set(cfg.n + i, i, 1);
    }
    let heis = lie::StructLie::central_extension(&form);
    let mut rng = cfg.rng("c08.jacobson");
    let mut o = Outcome::default();
    for _ in 0..20 {
        let x: Vec<u32> = (0..heis.dim).map(|_| rng.gen_range(0..p)).collect();
        let y: Vec<u32> = (0..heis.dim).map(|_| rng.gen_range(0..p)).collect();
        let s = lie::jacobson_si(&heis, &x, &y);
        o.expect(s.iter().all(|v| v.iter().all(|&c| c == 0)), || format!("s_i({x:?}, {y:?}) = {s:?}"));
    }
    let sl2 = lie::StructLie::sl2(p);
    let s = lie::jacobson_si(&sl2, &[1, 0, 0], &[0, 1, 0]);
    o.expect(s.iter().any(|v| v.iter().any(|&c| c != 0)), || "s_i vanish on sl₂".into());
    Ok(o)
}

fn moment_lift(cfg: &SuiteConfig) -> Result<Outcome> {
    if cfg.n > 1 && cfg.p > 3 {
        // 4n variables would exceed the memory guard
        return Ok(Outcome::default().with_note("skipped above 4n = 4 at p > 3".into()));
    }
    let mut rng = cfg.rng("c08.lift");
    let bad = lie::moment_lift_check(cfg.p, cfg.n, 10, &mut rng)?;
    let mut o = Outcome::default();
    o.expect(bad == 0, || format!("{bad} of 10 pairs"));
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        let cfg = SuiteConfig::new(5, 1);
        assert!(matches!(select(&cfg, "autgrp/char3"), Err(Error::Config(_))));
        assert!(select(&cfg, "autgrp").unwrap().iter().all(|c| c.id != "c06.char3"));
        assert!(select(&cfg, "nope").is_err());
        assert_eq!(select(&cfg, "c08.commutator").unwrap().len(), 1);
        assert!(SuiteConfig::new(7, 2).validate().is_err());
        assert!(SuiteConfig::new(11, 1).validate().is_err());
    }

    #[test]
    fn every_criterion_has_a_check() {
        let reg = registry();
        for k in 1..=11u8 {
            assert!(reg.iter().any(|c| c.criterion == k && c.id.starts_with(&format!("c{k:02}."))));
        }
    }

    #[test]
    fn quick_suite_runs() {
        let cfg = SuiteConfig::new(3, 1);
        let res = run(&cfg, "lie").unwrap();
        assert!(res.iter().all(|r| r.status == Status::Pass), "{res:?}");
        assert!(Summary::of(&res).ok());
    }
}
