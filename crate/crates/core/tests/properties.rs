use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use frobq::autgrp::{self, AutA0};
use frobq::coeff::{laurent_unit_decompose, CoeffRing, HLaurent};
use frobq::lie;
use frobq::matrep::rep;
use frobq::poisson::{a0_dim, poisson_bracket, A0Elem, KForm};
use frobq::suites::{self, SuiteConfig};
use frobq::weyl::{op_involution, w_commutator, WeylAlg, WeylElem};

fn a0(ring: &CoeffRing, n: usize, rng: &mut ChaCha8Rng) -> A0Elem {
    let p = ring.p();
    A0Elem::from_coeffs(ring, n, (0..a0_dim(p, n)).map(|_| ring.random(rng)).collect())
}

fn weyl_elem(alg: &WeylAlg, rng: &mut ChaCha8Rng) -> WeylElem {
    let p = alg.p();
    let mut out = alg.zero();
    for _ in 0..5 {
        let e: Vec<u32> = (0..alg.nvars()).map(|_| rng.gen_range(0..p)).collect();
        let c = alg.ring().random(rng);
        out = out.add(&alg.monomial(&e, &HLaurent::monomial(&c, rng.gen_range(-1..2)))).unwrap();
    }
    out
}

fn prime() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(5u32)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_and_leibniz(p in prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::new(p, &[("t", 2)]).unwrap();
        let (f, g, k) = (a0(&r, 1, &mut rng), a0(&r, 1, &mut rng), a0(&r, 1, &mut rng));
        let b = |a: &A0Elem, c: &A0Elem| poisson_bracket(a, c).unwrap();
        let jac = &(&b(&f, &b(&g, &k)) + &b(&g, &b(&k, &f))) + &b(&k, &b(&f, &g));
        prop_assert!(jac.is_zero());
        let gk = g.checked_mul(&k).unwrap();
        let leib = &b(&f, &g).checked_mul(&k).unwrap() + &g.checked_mul(&b(&f, &k)).unwrap();
        prop_assert_eq!(b(&f, &gk), leib);
    }

    #[test]
    fn d_squared_vanishes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::field(3).unwrap();
        let f = a0(&r, 2, &mut rng);
        prop_assert!(KForm::function(&f).d().unwrap().d().unwrap().is_zero());
    }

    #[test]
    fn weyl_product_is_associative(p in prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::new(p, &[("e", 2)]).unwrap();
        let alg = WeylAlg::standard(p, 1, &r).unwrap();
        let (a, b, c) = (weyl_elem(&alg, &mut rng), weyl_elem(&alg, &mut rng), weyl_elem(&alg, &mut rng));
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn commutator_quantizes_bracket(p in prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::field(p).unwrap();
        let alg = WeylAlg::standard(p, 1, &r).unwrap().opposite_convention();
        let (f, g) = (a0(&r, 1, &mut rng), a0(&r, 1, &mut rng));
        let c = w_commutator(&alg.lift(&f).unwrap(), &alg.lift(&g).unwrap()).unwrap();
        prop_assert_eq!(c.div_h(1).unwrap().mod_h().unwrap(), poisson_bracket(&f, &g).unwrap());
    }

    #[test]
    fn involution_reverses_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::field(3).unwrap();
        let alg = WeylAlg::standard(3, 2, &r).unwrap();
        let (a, b) = (weyl_elem(&alg, &mut rng), weyl_elem(&alg, &mut rng));
        let al = |x: &WeylElem| op_involution(x).unwrap();
        prop_assert_eq!(al(&al(&a)), a.clone());
        prop_assert_eq!(al(&a.mul(&b).unwrap()), al(&b).mul(&al(&a)).unwrap());
    }

    #[test]
    fn rep_is_multiplicative(p in prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::new(p, &[("e", 2)]).unwrap();
        let alg = WeylAlg::standard(p, 1, &r).unwrap();
        let (a, b) = (weyl_elem(&alg, &mut rng), weyl_elem(&alg, &mut rng));
        prop_assert_eq!(rep(&a.mul(&b).unwrap()).unwrap(), rep(&a).unwrap().mul(&rep(&b).unwrap()).unwrap());
    }

    #[test]
    fn unit_decomposition_recomposes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::new(3, &[("e", 3)]).unwrap();
        let u = HLaurent::from_coeffs(&r, -2, None, vec![
            (-2, r.random_nilpotent(&mut rng)),
            (-1, r.random_nilpotent(&mut rng)),
            (0, r.random_unit(&mut rng)),
            (1, r.random(&mut rng)),
        ]).unwrap();
        let d = laurent_unit_decompose(&u).unwrap();
        prop_assert_eq!(d.recompose().unwrap(), u);
    }

    #[test]
    fn automorphisms_invert(p in prime(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = CoeffRing::new(p, &[("t", p), ("e", 2)]).unwrap();
        let g = autgrp::linear(&r, 1, &autgrp::random_sp(p, 1, &mut rng)).unwrap()
            .compose(&autgrp::lambda_subgroup(&r, 1, &r.gen(0).scale_i(rng.gen_range(1..p as i64))).unwrap()).unwrap()
            .compose(&autgrp::translation(&r, &[r.gen(1)], &[r.gen(1).scale_i(2)]).unwrap()).unwrap();
        prop_assert_eq!(g.compose(&g.inverse().unwrap()).unwrap(), AutA0::identity(&r, 1));
        prop_assert!(g.validate().unwrap().passed());
    }

    #[test]
    fn moment_lift_is_a_lie_map(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(lie::moment_lift_check(3, 1, 2, &mut rng).unwrap(), 0);
    }
}

#[test]
fn suites_are_deterministic() {
    let cfg = SuiteConfig { seed: 7, ..SuiteConfig::new(3, 1) };
    let strip = |v: Vec<suites::CheckResult>| v.into_iter().map(|r| (r.check, r.status, r.witness, r.note)).collect::<Vec<_>>();
    let a = strip(suites::run(&cfg, "weyl").unwrap());
    let b = strip(suites::run(&cfg, "weyl").unwrap());
    assert_eq!(a, b);
}
