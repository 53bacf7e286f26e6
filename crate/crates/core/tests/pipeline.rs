use psl2_rigidity::detect::{find_infinite_order_elliptic, DEFAULT_IRRATIONAL_DELTA, DEFAULT_IRRATIONAL_Q};
use psl2_rigidity::fuzz::{sample_trial, trial_rng, FuzzMode};
use psl2_rigidity::psl2::DEFAULT_TOL;
use psl2_rigidity::rigidity::{
    check_rigidity, normalize_pair, rotation_spectrum_with, solve_conjugator, trace_closed_form, trace_sequence,
    RigidityParams, RigidityVerdict,
};
use psl2_rigidity::rotnum::{lift_of_element, poincare_rotation_number};
use psl2_rigidity::sampling::planted_pair;
use psl2_rigidity::{Execution, ProjectiveElement, Representation, Word};
use proptest::prelude::*;

fn params(execution: Execution) -> RigidityParams {
    RigidityParams {
        execution,
        ..Default::default()
    }
}

#[test]
fn sequential_and_parallel_pipelines_agree() {
    for mode in [FuzzMode::Planted, FuzzMode::Perturbed, FuzzMode::Reflected] {
        for i in 0..5 {
            let pair = sample_trial(21, i, mode);
            let seq = check_rigidity(&pair.rho1, &pair.rho2, &params(Execution::Sequential));
            let par = check_rigidity(&pair.rho1, &pair.rho2, &params(Execution::Parallel));
            assert_eq!(seq, par);
        }
    }
    let rho = sample_trial(21, 0, FuzzMode::Planted).rho1;
    assert_eq!(
        rotation_spectrum_with(&rho, 4, Execution::Sequential).unwrap(),
        rotation_spectrum_with(&rho, 4, Execution::Parallel).unwrap()
    );
}

#[test]
fn certificates_conjugate_every_generator() {
    for i in 0..20 {
        let pair = sample_trial(22, i, FuzzMode::Planted);
        let out = check_rigidity(&pair.rho1, &pair.rho2, &RigidityParams::default());
        let RigidityVerdict::Certificate { g, .. } = out.verdict else {
            panic!("trial {i}: {:?}", out.verdict);
        };
        assert!((g.rep().det() - 1.0).abs() < 1e-12);
        for (a, b) in pair.rho1.generators().iter().zip(pair.rho2.generators()) {
            assert!(a.conjugate_by(&g).distance(b) <= 1e-8);
        }
        // the conjugator is unique up to the centralizer, which is trivial here
        assert!(g.distance(&pair.k) <= 1e-7, "trial {i}: {g} vs {}", pair.k);
    }
}

#[test]
fn witnesses_have_separated_rotation_numbers() {
    for i in 0..20 {
        let pair = sample_trial(23, i, FuzzMode::Perturbed);
        let out = check_rigidity(&pair.rho1, &pair.rho2, &RigidityParams::default());
        match out.verdict {
            RigidityVerdict::Witness { word, rot1, rot2 } => {
                let r1 = pair.rho1.evaluate(&word).unwrap().rotation_number(DEFAULT_TOL);
                let r2 = pair.rho2.evaluate(&word).unwrap().rotation_number(DEFAULT_TOL);
                assert_eq!((r1, r2), (rot1, rot2));
                assert!(rot1.circle_distance(rot2) > 1e-8);
            }
            RigidityVerdict::Inconclusive { .. } => {}
            RigidityVerdict::Certificate { .. } => panic!("perturbed trial {i} certified"),
        }
    }
}

#[test]
fn normalized_pair_sends_gamma0_to_the_same_rotation() {
    for i in 0..20 {
        let pair = planted_pair(&mut trial_rng(24, i));
        let found =
            find_infinite_order_elliptic(&pair.rho1, 3, DEFAULT_IRRATIONAL_Q, DEFAULT_IRRATIONAL_DELTA).unwrap();
        let n = normalize_pair(&pair.rho1, &pair.rho2, &found.word, 1e-8).unwrap();
        let r = ProjectiveElement::rotation(n.theta);
        assert!(n.rho1.evaluate(&found.word).unwrap().distance(&r) <= 1e-8);
        assert!(n.rho2.evaluate(&found.word).unwrap().distance(&r) <= 1e-8);
        let s = solve_conjugator(&n.rho1, &n.rho2, 1e-8).unwrap();
        assert!(s.residual <= 1e-8);
        assert!(s.next_singular_value - s.smallest_singular_value > 1e-6);
    }
}

#[test]
fn closed_form_rotation_matches_poincare_limit_for_conjugated_quarter_rotation() {
    let r = ProjectiveElement::rotation(std::f64::consts::FRAC_PI_4);
    let h = ProjectiveElement::from_entries(1., 3., 0., 1., false).unwrap();
    let g = r.conjugate_by(&h);
    let closed = g.rotation_number(DEFAULT_TOL);
    let est = poincare_rotation_number(&lift_of_element(&g), 0.4, 100_000);
    assert!((closed.value() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!(closed.circle_distance(est.value) <= est.error_bound);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Direct matrix products against the closed form, for arbitrary unimodular
    /// gamma and rotation angle.
    #[test]
    fn trace_identity_for_arbitrary_matrices(
        (a, b, c, d) in (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_filter("det", |(a, b, c, d)| a * d - b * c > 0.3),
        theta in 0.01..3.13f64,
        n in -100i64..=100,
    ) {
        let gamma = ProjectiveElement::from_entries(a, b, c, d, true).unwrap();
        let rho = Representation::new(vec![ProjectiveElement::rotation(theta), gamma]).unwrap();
        let direct = trace_sequence(&rho, &Word::generator(1), &Word::generator(0), &[n]).unwrap()[0];
        let closed = trace_closed_form(gamma.rep(), theta, n);
        prop_assert!((direct - closed).abs() <= 1e-11);
        // (a + d)^2 + (c - b)^2 = |M|_F^2 + 2 >= 4
        let m = gamma.rep();
        prop_assert!((m.a() + m.d()).powi(2) + (m.c() - m.b()).powi(2) >= 4.0 - 1e-9);
    }

    #[test]
    fn planted_pairs_certify_for_any_seed(seed in any::<u64>()) {
        let pair = sample_trial(seed, 0, FuzzMode::Planted);
        let out = check_rigidity(&pair.rho1, &pair.rho2, &RigidityParams { corpus_radius: 3, ..Default::default() });
        prop_assert!(out.verdict.is_certificate(), "{:?}", out.verdict);
    }
}
