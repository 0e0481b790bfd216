use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use spinmeter::linalg::{max_abs, sandwich};
use spinmeter::random::{random_density, random_hermitian, random_unitary, rng};
use spinmeter::symbols::{
    contravariant_symbol, covariant_symbol, operator_from_contravariant_complex,
};
use spinmeter::tomography::reconstruct;
use spinmeter::{make_completely_optimal, CoherentGrid, MeasurementModel, Povm, Spin, UnitVector};

fn unit(theta: f64, phi: f64) -> UnitVector {
    UnitVector::from_polar(theta, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coherent_ket_is_top_eigenvector(twice in 1u32..=6, theta in 0.0..PI, phi in 0.0..TAU) {
        let sys = spinmeter::SpinSystem::new(Spin::from_twice(twice).unwrap());
        let n = unit(theta, phi);
        let ket = sys.coherent(&n);
        let resid = (sys.along(&n) * &ket - ket.scale(sys.s())).norm();
        prop_assert!(resid < 1e-10);
        prop_assert!((sys.variance_sum(&ket).unwrap() - sys.s()).abs() < 1e-10);
    }

    #[test]
    fn overlap_depends_only_on_angle(twice in 1u32..=5, t1 in 0.0..PI, p1 in 0.0..TAU, t2 in 0.0..PI, p2 in 0.0..TAU) {
        let sys = spinmeter::SpinSystem::new(Spin::from_twice(twice).unwrap());
        let (a, b) = (unit(t1, p1), unit(t2, p2));
        let ov = sys.coherent(&a).dotc(&sys.coherent(&b)).norm_sqr();
        let want = ((1.0 + a.dot(&b)) / 2.0).powf(2.0 * sys.s());
        prop_assert!((ov - want).abs() < 1e-10);
    }

    #[test]
    fn symbols_round_trip(twice in 1u32..=4, seed in any::<u64>()) {
        let f = CoherentGrid::for_spin(Spin::from_twice(twice).unwrap());
        let a = random_hermitian(&mut rng(seed), f.dim());
        let cn = contravariant_symbol(&f, &a).unwrap();
        let back = operator_from_contravariant_complex(&f, cn.values()).unwrap();
        prop_assert!(max_abs(&(back - &a)) < 1e-9);
        // Tr(A B) = c ∫ A_cv B_cn.
        let b = random_hermitian(&mut rng(seed ^ 1), f.dim());
        let cv = covariant_symbol(&f, &b).unwrap();
        let pairing = f.grid().integrate_complex(
            &cv.values().iter().zip(cn.values()).map(|(x, y)| x * y).collect::<Vec<_>>(),
        ).unwrap() * f.scale();
        let direct = (&a * &b).trace();
        prop_assert!((pairing - direct).norm() < 1e-9);
    }

    #[test]
    fn random_models_bounded_and_kick_invariant(twice in 1u32..=3, seed in any::<u64>()) {
        let f = CoherentGrid::for_spin(Spin::from_twice(twice).unwrap());
        let mut r = rng(seed);
        let model = MeasurementModel::random_isometric(f.clone(), 1, &mut r);
        let rep = model.fidelity_report();
        prop_assert!(rep.eta_i <= f.s() + 1e-10);
        prop_assert!(rep.eta_f <= f.s() + 1e-10);
        prop_assert!(rep.eta_d <= f.s() * (f.s() + 1.0) + 1e-10);
        let u = random_unitary(&mut r, f.dim());
        let kicked: Vec<Vec<_>> = model.kraus().iter().map(|ts| ts.iter().map(|t| &u * t).collect()).collect();
        let kicked = MeasurementModel::new(f.clone(), kicked).unwrap();
        let a = model.povm();
        let b = kicked.povm();
        for (x, y) in a.effects().iter().zip(b.effects()) {
            prop_assert!(max_abs(&(x - y)) < 1e-10);
        }
    }

    #[test]
    fn optimal_probabilities_match_q(twice in 1u32..=4, seed in any::<u64>()) {
        let f = CoherentGrid::for_spin(Spin::from_twice(twice).unwrap());
        let rho = random_density(&mut rng(seed), f.dim());
        let model = make_completely_optimal(f.clone(), None).unwrap();
        let probs = model.povm().probabilities(&rho).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (k, p) in probs.iter().enumerate() {
            let q = f.scale() * sandwich(f.ket(k), rho.matrix(), f.ket(k)).re;
            prop_assert!((p / f.weight(k) - q).abs() < 1e-10);
        }
        let res = reconstruct(&Povm::optimal(f.clone()), &probs).unwrap();
        prop_assert!(res.estimate.trace_distance(&rho).unwrap() < 1e-8);
    }
}
