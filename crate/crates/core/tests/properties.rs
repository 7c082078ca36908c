use higgsalg::algebra::{minus_radicand, plus_radicand};
use higgsalg::realizations::{generic_realization_with, LadderCoefficient};
use higgsalg::similarity::s1_squared;
use higgsalg::{
    casimir, commutator_residual, conjugate, dyson_simple, hp_simple,
    s1_recurrence, AlgebraParams, Field, FockSpace, Mode, Operator, Spin, Surd,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = AlgebraParams> {
    (-6i64..=6, 1i64..=3, -3i64..=3, 1i64..=2).prop_map(|(a, b, c, d)| {
        AlgebraParams::new(
            BigRational::new(BigInt::from(a), BigInt::from(b)),
            BigRational::new(BigInt::from(c), BigInt::from(d)),
        )
    })
}

fn spin() -> impl Strategy<Value = Spin> {
    (1u32..=8).prop_map(Spin::from_twice)
}

fn q0() -> impl Strategy<Value = BigRational> {
    (1i64..=5, 1i64..=3).prop_map(|(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
}

fn restricted_eq(a: &Operator<Surd>, b: &Operator<Surd>, idx: &[usize]) -> bool {
    idx.iter().all(|&r| idx.iter().all(|&c| a.get(r, c) == b.get(r, c)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lowering_radicand_is_shifted_raising_radicand(p in params(), s in spin(), n in 0usize..12) {
        prop_assert_eq!(minus_radicand(&p, s, n), plus_radicand(&p, s, n + 1));
    }

    #[test]
    fn hp_closure_is_exact(p in params(), s in spin()) {
        let r = hp_simple::<Surd>(FockSpace::new(10).unwrap(), &p, s);
        let res = commutator_residual(&r).unwrap();
        prop_assert_eq!(res.raise_lower, 0.0);
        prop_assert_eq!(res.j3_raise, 0.0);
        prop_assert_eq!(res.j3_lower, 0.0);
    }

    #[test]
    fn derived_ladder_closes_for_every_step(p in params(), s in spin(), k in 1usize..=5) {
        for mode in [Mode::Unitary, Mode::Dyson] {
            let r = generic_realization_with::<Surd>(
                LadderCoefficient::Derived, FockSpace::new(4 * k + 4).unwrap(), k, &p, s, mode,
            ).unwrap();
            prop_assert_eq!(commutator_residual(&r).unwrap().raise_lower, 0.0);
        }
    }

    #[test]
    fn s1_conjugates_dyson_to_hp(p in params(), s in spin(), q in q0()) {
        let space = FockSpace::new(10).unwrap();
        let hp = hp_simple::<Surd>(space, &p, s);
        let dyson = dyson_simple::<Surd>(space, &p, s);
        let t = s1_recurrence::<Surd>(&p, s, &q, 9).unwrap();
        let conj = conjugate(&dyson, &t).unwrap();
        let idx: Vec<usize> = t.valid_indices().into_iter().filter(|&n| hp.admissible[n]).collect();
        prop_assert!(restricted_eq(&conj.jp, &hp.jp, &idx));
        prop_assert!(restricted_eq(&conj.jm, &hp.jm, &idx));
    }

    #[test]
    fn conjugation_is_independent_of_q0(p in params(), s in spin(), q in q0(), scale in q0()) {
        let dyson = dyson_simple::<Surd>(FockSpace::new(10).unwrap(), &p, s);
        let a = conjugate(&dyson, &s1_recurrence::<Surd>(&p, s, &q, 9).unwrap()).unwrap();
        let b = conjugate(&dyson, &s1_recurrence::<Surd>(&p, s, &(&q * &scale), 9).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn s1_entries_scale_with_q0(p in params(), s in spin(), q in q0(), scale in q0()) {
        let (a, mask_a) = s1_squared(&p, s, &q, 9).unwrap();
        let (b, mask_b) = s1_squared(&p, s, &(&q * &scale), 9).unwrap();
        prop_assert_eq!(mask_a, mask_b);
        let factor = &scale * &scale;
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(x * &factor, y.clone());
        }
    }

    #[test]
    fn dyson_and_hp_share_the_ladder_diagonal(p in params(), s in spin()) {
        // J₊J₋ is similarity-invariant on its diagonal for a diagonal transform
        let space = FockSpace::new(10).unwrap();
        let hp = hp_simple::<Surd>(space, &p, s);
        let dyson = dyson_simple::<Surd>(space, &p, s);
        let a = hp.jp.try_matmul(&hp.jm).unwrap().diagonal();
        let b = dyson.jp.try_matmul(&dyson.jm).unwrap().diagonal();
        for n in hp.check_indices() {
            prop_assert_eq!(&a[n], &b[n]);
        }
    }

    #[test]
    fn hp_casimir_is_the_eigenvalue(p in params(), s in spin()) {
        let r = hp_simple::<Surd>(FockSpace::new(12).unwrap(), &p, s);
        let c = casimir(&r).unwrap();
        let target = Surd::from_rational(&higgsalg::casimir_eigenvalue(&p, s));
        let diag = c.diagonal();
        for n in r.check_indices() {
            prop_assert_eq!(&diag[n], &target);
        }
    }

    #[test]
    fn hp_float_is_hermitian_pair(p in params(), s in spin()) {
        let r = hp_simple::<num_complex::Complex64>(FockSpace::new(16).unwrap(), &p, s);
        prop_assert!((&r.jp.adjoint() - &r.jm).max_abs() <= 1e-12 * r.jp.max_abs().max(1.0));
        prop_assert!(r.j3.hermitian_deviation() == 0.0);
    }
}
