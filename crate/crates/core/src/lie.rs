//! Graded Lie algebra computations on (A₀, { , }) over F_p: the sp(2n)
//! action on m^l/m^{l+1}, the commutator subalgebra of m², Jacobson's s_i
//! in small Lie algebras and the Hamiltonian lift to 4n variables.

use rand::Rng;

use crate::coeff::CoeffRing;
use crate::fp::{self, FpMatrix, RowSpace};
use crate::poisson::{a0_dim, exps_to_index, index_to_exps, poisson_bracket, A0Elem};
use crate::{Error, Result};

/// Monomials of A₀ of total degree l.
#[derive(Clone, Debug)]
pub struct GradedPiece {
    pub p: u32,
    pub n: usize,
    pub l: u32,
    pub basis: Vec<Vec<u32>>,
}

impl GradedPiece {
    pub fn new(p: u32, n: usize, l: u32) -> GradedPiece {
        let basis = (0..a0_dim(p, n))
            .map(|i| index_to_exps(i, p, 2 * n))
            .filter(|e| e.iter().sum::<u32>() == l)
            .collect();
        GradedPiece { p, n, l, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }


    pub fn element(&self, v: &[u32]) -> A0Elem {
        let ring = CoeffRing::field(self.p).expect("prime");
        self.basis.iter().zip(v).fold(A0Elem::zero(&ring, self.n), |acc, (e, &c)| {
            &acc + &A0Elem::monomial_fp(&ring, self.n, e, c as i64)
        })
    }

    pub fn coordinates(&self, f: &A0Elem) -> Vec<u32> {
        self.basis.iter().map(|e| f.coeff(e).constant_term()).collect()
    }
}

/// {X, v} projected to degree l (for X of degree 2 this is the whole bracket).
pub fn sp_action(x: &A0Elem, v: &A0Elem, l: u32) -> Result<A0Elem> {
    Ok(poisson_bracket(x, v)?.homogeneous_part(l))
}

/// Matrices of the degree-2 monomials acting on a graded piece.
pub fn action_matrices(piece: &GradedPiece) -> Result<Vec<FpMatrix>> {
    let ring = CoeffRing::field(piece.p)?;
    let sp = GradedPiece::new(piece.p, piece.n, 2);
    let d = piece.dim();
    let mut out = Vec::new();
    for e in &sp.basis {
        let x = A0Elem::monomial_fp(&ring, piece.n, e, 1);
        let mut m = FpMatrix::zeros(piece.p, d, d);
        for (j, b) in piece.basis.iter().enumerate() {
            let img = sp_action(&x, &A0Elem::monomial_fp(&ring, piece.n, b, 1), piece.l)?;
            for (i, c) in piece.coordinates(&img).into_iter().enumerate() {
                m.set(i, j, c);
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Dimension of the unital associative algebra generated by `gens`.
pub fn envelope_dim(p: u32, d: usize, gens: &[FpMatrix]) -> usize {
    let mut span = RowSpace::new(p, d * d);
    let mut frontier = vec![FpMatrix::identity(p, d)];
    span.insert(&frontier[0].data);
    while let Some(m) = frontier.pop() {
        for g in gens {
            let prod = g.mul(&m);
            if span.insert(&prod.data) {
                frontier.push(prod);
            }
        }
        if span.rank() == d * d {
            break;
        }
    }
    span.rank()
}

/// Absolute irreducibility of m^l/m^{l+1} under sp(2n): the action matrices
/// generate the full matrix algebra.
pub fn irreducibility_check(p: u32, n: usize, l: u32) -> Result<bool> {
    if l > 2 * n as u32 * (p - 1) {
        return Err(Error::Precondition(format!("degree {l} exceeds 2n(p−1)")));
    }
    let piece = GradedPiece::new(p, n, l);
    let mats = action_matrices(&piece)?;
    let d = piece.dim();
    Ok(envelope_dim(p, d, &mats) == d * d)
}

/// {z^a, z^b} on exponent vectors: Σ_i (a_i b_{n+i} − a_{n+i} b_i) z^{a+b−e_i−e_{n+i}}.
fn monomial_bracket(p: u32, n: usize, a: &[u32], b: &[u32]) -> Vec<(Vec<u32>, u32)> {
    let mut out = Vec::new();
    for i in 0..n {
        let c = (a[i] as i64 * b[n + i] as i64 - a[n + i] as i64 * b[i] as i64).rem_euclid(p as i64) as u32;
        if c == 0 {
            continue;
        }
        let e: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        if e[i] == 0 || e[n + i] == 0 {
            continue;
        }
        let mut e = e;
        e[i] -= 1;
        e[n + i] -= 1;
        if e.iter().all(|&k| k < p) {
            out.push((e, c));
        }
    }
    out
}

fn bracket_vec(p: u32, n: usize, f: &[u32], g: &[u32]) -> Vec<u32> {
    let d = f.len();
    let mut out = vec![0; d];
    for (i, &a) in f.iter().enumerate().filter(|(_, &a)| a != 0) {
        let ea = index_to_exps(i, p, 2 * n);
        for (j, &b) in g.iter().enumerate().filter(|(_, &b)| b != 0) {
            let eb = index_to_exps(j, p, 2 * n);
            for (e, c) in monomial_bracket(p, n, &ea, &eb) {
                let k = exps_to_index(&e, p);
                out[k] = fp::add(out[k], fp::mul(c, fp::mul(a, b, p), p), p);
            }
        }
    }
    out
}

fn unit_vec(d: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; d];
    v[i] = 1;
    v
}

fn degree_of(p: u32, n: usize, i: usize) -> u32 {
    index_to_exps(i, p, 2 * n).iter().sum()
}

/// Span of {m², m²} compared with the graded description.
#[derive(Clone, Debug)]
pub struct CommutatorReport {
    pub dim: usize,
    pub m2_dim: usize,
    /// equals ⊕_{2 ≤ i < 2n(p−1)} m^i/m^{i+1}
    pub matches_graded: bool,
    pub span: RowSpace,
}

impl CommutatorReport {
    pub fn codimension(&self) -> usize {
        self.m2_dim - self.dim
    }
}

pub fn commutator_span(p: u32, n: usize) -> Result<CommutatorReport> {
    fp::check_prime(p)?;
    let d = a0_dim(p, n);
    let top = 2 * n as u32 * (p - 1);
    let m2: Vec<usize> = (0..d).filter(|&i| degree_of(p, n, i) >= 2).collect();
    let mut span = RowSpace::new(p, d);
    for (ai, &a) in m2.iter().enumerate() {
        let ea = index_to_exps(a, p, 2 * n);
        for &b in &m2[ai + 1..] {
            let eb = index_to_exps(b, p, 2 * n);
            let mut v = vec![0; d];
            for (e, c) in monomial_bracket(p, n, &ea, &eb) {
                let k = exps_to_index(&e, p);
                v[k] = fp::add(v[k], c, p);
            }
            span.insert(&v);
        }
    }
    let mut graded = RowSpace::new(p, d);
    for i in (0..d).filter(|&i| (2..top).contains(&degree_of(p, n, i))) {
        graded.insert(&unit_vec(d, i));
    }
    let matches_graded = graded.rank() == span.rank() && graded.basis().iter().all(|v| span.contains(v));
    Ok(CommutatorReport { dim: span.rank(), m2_dim: m2.len(), matches_graded, span })
}

/// Whether m²/m³ (the degree-2 monomials) together with z generate
/// {m², m²} as a Lie algebra.
pub fn generation_check(p: u32, n: usize, z: &A0Elem) -> Result<bool> {
    let d = a0_dim(p, n);
    let target = commutator_span(p, n)?;
    let zv = z.to_fp_vec();
    let mut gens: Vec<Vec<u32>> = (0..d).filter(|&i| degree_of(p, n, i) == 2).map(|i| unit_vec(d, i)).collect();
    if zv.iter().any(|&c| c != 0) {
        gens.push(zv);
    }
    let mut span = RowSpace::new(p, d);
    let mut frontier = Vec::new();
    for g in &gens {
        if span.insert(g) {
            frontier.push(g.clone());
        }
    }
    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > d + 1 {
            return Err(Error::Precondition("closure did not stabilize".into()));
        }
        let mut next = Vec::new();
        for v in &frontier {
            for g in &gens {
                let b = bracket_vec(p, n, g, v);
                if span.insert(&b) {
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    Ok(span.rank() == target.dim && target.span.basis().iter().all(|v| span.contains(v)))
}

/// Jacobi identity on random triples; returns the number of failures.
pub fn jacobi_check<R: Rng>(p: u32, n: usize, samples: usize, rng: &mut R) -> Result<usize> {
    let ring = CoeffRing::field(p)?;
    let mut bad = 0;
    for _ in 0..samples {
        let [f, g, k] = [(); 3].map(|_| {
            A0Elem::from_coeffs(&ring, n, (0..a0_dim(p, n)).map(|_| ring.constant(rng.gen_range(0..p) as i64)).collect())
        });
        let j = &(&poisson_bracket(&f, &poisson_bracket(&g, &k)?)? + &poisson_bracket(&g, &poisson_bracket(&k, &f)?)?)
            + &poisson_bracket(&k, &poisson_bracket(&f, &g)?)?;
        if !j.is_zero() {
            bad += 1;
        }
    }
    Ok(bad)
}

/// A finite-dimensional Lie algebra over F_p by structure constants:
/// [e_i, e_j] = Σ_k c[i][j][k] e_k.
#[derive(Clone, Debug)]
pub struct StructLie {
    pub p: u32,
    pub dim: usize,
    pub c: Vec<Vec<Vec<u32>>>,
}

impl StructLie {
    pub fn bracket(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p;
        let mut out = vec![0; self.dim];
        for i in 0..self.dim {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.dim {
                if b[j] == 0 {
                    continue;
                }
                let s = fp::mul(a[i], b[j], p);
                for (o, &c) in out.iter_mut().zip(&self.c[i][j]) {
                    *o = fp::add(*o, fp::mul(s, c, p), p);
                }
            }
        }
        out
    }

    /// e₀ central, [e_i, e_j] = form(i−1, j−1)·e₀ for an alternating form.
    pub fn central_extension(form: &FpMatrix) -> StructLie {
        let (p, k) = (form.p, form.rows);
        let dim = k + 1;
        let mut c = vec![vec![vec![0; dim]; dim]; dim];
        for i in 0..k {
            for j in 0..k {
                c[i + 1][j + 1][0] = form.get(i, j);
            }
        }
        StructLie { p, dim, c }
    }

    /// sl₂ with basis e, f, h.
    pub fn sl2(p: u32) -> StructLie {
        let mut c = vec![vec![vec![0; 3]; 3]; 3];
        let neg = |v: u32| fp::neg(v % p, p);
        c[0][1][2] = 1;
        c[1][0][2] = neg(1);
        c[2][0][0] = 2 % p;
        c[0][2][0] = neg(2);
        c[2][1][1] = neg(2);
        c[1][2][1] = 2 % p;
        StructLie { p, dim: 3, c }
    }
}

/// s₁..s_{p−1} with ad(tX + Y)^{p−1}(X) = Σ i·s_i(X,Y) t^{i−1}.
pub fn jacobson_si(lie: &StructLie, x: &[u32], y: &[u32]) -> Vec<Vec<u32>> {
    let p = lie.p;
    // polynomial in t with vector coefficients, degree < p
    let mut poly: Vec<Vec<u32>> = vec![vec![0; lie.dim]; p as usize];
    poly[0] = x.to_vec();
    for _ in 0..p - 1 {
        let mut next = vec![vec![0; lie.dim]; p as usize];
        for (k, v) in poly.iter().enumerate() {
            let by_y = lie.bracket(y, v);
            for (o, a) in next[k].iter_mut().zip(by_y) {
                *o = fp::add(*o, a, p);
            }
            if k + 1 < p as usize {
                let by_x = lie.bracket(x, v);
                for (o, a) in next[k + 1].iter_mut().zip(by_x) {
                    *o = fp::add(*o, a, p);
                }
            }
        }
        poly = next;
    }
    (1..p)
        .map(|i| {
            let inv = fp::inv(i, p);
            poly[(i - 1) as usize].iter().map(|&a| fp::mul(a, inv, p)).collect()
        })
        .collect()
}

/// Embeds f(x, y) in the 4n-variable ring with coordinates (x, y | v, u),
/// stored as an A₀ over 2n pairs: x_i, y_i are the first 2n "x" slots,
/// v_i, u_i the "y" slots.
fn to_phase(f: &A0Elem) -> Result<A0Elem> {
    let (n, ring) = (f.n(), f.ring().clone());
    let mut out = A0Elem::zero(&ring, 2 * n);
    for (e, c) in f.terms() {
        let mut big = vec![0; 4 * n];
        big[..2 * n].copy_from_slice(&e);
        out = out.checked_add(&A0Elem::monomial(&ring, 2 * n, &big, c))?;
    }
    Ok(out)
}

/// {a, b} on 4n variables with {x_i, v_i} = {y_i, u_i} = −1.
pub fn phase_bracket(a: &A0Elem, b: &A0Elem) -> Result<A0Elem> {
    Ok(-poisson_bracket(a, b)?)
}

/// L(f) = f + ι_{H_f}η + σ(H_f), with σ(θ) = Σ θ^{x_i} v_i + θ^{y_i} u_i.
pub fn moment_lift(f: &A0Elem) -> Result<A0Elem> {
    let (n, ring) = (f.n(), f.ring().clone());
    let coord = |j: usize| A0Elem::coord(&ring, 2 * n, j);
    let mut out = to_phase(f)?;
    for i in 0..n {
        let fx = to_phase(&f.partial(i))?;
        let fy = to_phase(&f.partial(n + i))?;
        // H_f = −f_y ∂_x + f_x ∂_y; ι_{H_f}(Σ y dx) = −Σ y f_y
        let y = coord(n + i);
        out = out.checked_add(&-y.checked_mul(&fy)?)?;
        out = out.checked_add(&-fy.checked_mul(&coord(2 * n + i))?)?;
        out = out.checked_add(&fx.checked_mul(&coord(3 * n + i))?)?;
    }
    Ok(out)
}

/// {L f, L g} − L{f, g} on random pairs; returns the number of pairs whose
/// difference is not a constant.
pub fn moment_lift_check<R: Rng>(p: u32, n: usize, samples: usize, rng: &mut R) -> Result<usize> {
    let ring = CoeffRing::field(p)?;
    let random = |rng: &mut R| {
        A0Elem::from_coeffs(&ring, n, (0..a0_dim(p, n)).map(|_| ring.constant(rng.gen_range(0..p) as i64)).collect())
    };
    let mut bad = 0;
    for _ in 0..samples {
        let (f, g) = (random(rng), random(rng));
        let lhs = phase_bracket(&moment_lift(&f)?, &moment_lift(&g)?)?;
        let rhs = moment_lift(&poisson_bracket(&f, &g)?)?;
        let diff = lhs.checked_add(&-rhs)?;
        if !diff.checked_add(&-A0Elem::constant(diff.constant_term(), 2 * n))?.is_zero() {
            bad += 1;
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sp_action_examples() {
        let r = CoeffRing::field(5).unwrap();
        let x2 = A0Elem::monomial_fp(&r, 1, &[2, 0], 1);
        let y = A0Elem::y(&r, 1, 0);
        assert_eq!(sp_action(&x2, &y, 1).unwrap(), A0Elem::x(&r, 1, 0).scale_i(2));
        assert!(sp_action(&x2, &A0Elem::one(&r, 1), 0).unwrap().is_zero());
    }

    #[test]
    fn sl2_triple() {
        // e = x²/2, f = −y²/2, h = xy: {h, e} = 2e, {h, f} = −2f, {e, f} = h
        let p = 5;
        let r = CoeffRing::field(p).unwrap();
        let half = fp::inv(2, p) as i64;
        let e = A0Elem::monomial_fp(&r, 1, &[2, 0], half);
        let f = A0Elem::monomial_fp(&r, 1, &[0, 2], -half);
        let h = A0Elem::monomial_fp(&r, 1, &[1, 1], 1);
        assert_eq!(poisson_bracket(&e, &f).unwrap(), h.scale_i(-1));
        assert_eq!(poisson_bracket(&h, &e).unwrap(), e.scale_i(-2));
        assert_eq!(poisson_bracket(&h, &f).unwrap(), f.scale_i(2));
    }

    #[test]
    fn irreducible_pieces() {
        assert!(irreducibility_check(3, 1, 0).unwrap());
        let piece = GradedPiece::new(3, 1, 1);
        assert_eq!(envelope_dim(3, 2, &action_matrices(&piece).unwrap()), 4);
        for l in 0..4 {
            assert!(irreducibility_check(3, 1, l).unwrap(), "l = {l}");
        }
        assert!(irreducibility_check(3, 1, 4).unwrap());
    }

    #[test]
    fn commutators() {
        let c = commutator_span(3, 1).unwrap();
        assert_eq!((c.dim, c.m2_dim), (5, 6));
        assert!(c.matches_graded);
        let c = commutator_span(5, 1).unwrap();
        assert_eq!((c.dim, c.m2_dim), (21, 22));
        let r = CoeffRing::field(3).unwrap();
        assert!(generation_check(3, 1, &A0Elem::monomial_fp(&r, 1, &[2, 1], 1)).unwrap());
        assert!(!generation_check(3, 1, &A0Elem::zero(&r, 1)).unwrap());
    }

    #[test]
    fn jacobson_polynomials() {
        let form = FpMatrix::from_rows(5, &[vec![0, 1], vec![4, 0]]);
        let heis = StructLie::central_extension(&form);
        let s = jacobson_si(&heis, &[1, 1, 0], &[0, 2, 3]);
        assert!(s.iter().all(|v| v.iter().all(|&c| c == 0)));
        let sl2 = StructLie::sl2(5);
        let s = jacobson_si(&sl2, &[1, 0, 0], &[0, 1, 0]);
        assert!(s.iter().any(|v| v.iter().any(|&c| c != 0)));
    }

    #[test]
    fn lift_respects_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(moment_lift_check(3, 1, 10, &mut rng).unwrap(), 0);
        let r = CoeffRing::field(3).unwrap();
        let c = A0Elem::constant(&r.constant(2), 1);
        let l = moment_lift(&c).unwrap();
        assert_eq!(l, A0Elem::constant(&r.constant(2), 2));
        assert_eq!(jacobi_check(3, 1, 5, &mut rng).unwrap(), 0);
    }
}
