use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI, TAU};

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::*;

fn st(x: f64) -> Setting {
    Setting::new(x)
}

/// Independent Monte Carlo of the sign strategies, no model machinery.
fn sign_oracle(a: f64, b: f64, n: usize) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(12345);
    let sg = |x: f64| if x >= 0.0 { 1.0 } else { -1.0 };
    let mut sum = 0.0;
    for _ in 0..n {
        let h: f64 = rng.random::<f64>() * TAU;
        sum += sg((a - h).cos()) * -sg((b - h).cos());
    }
    sum / n as f64
}

/// Singlet `(|01> - |10>)/√2` measured along angles in the x-z plane.
fn singlet_state_vector(ta: f64, tb: f64) -> [f64; 4] {
    let basis = |t: f64, o: Outcome| match o {
        Outcome::Plus => [(t / 2.0).cos(), (t / 2.0).sin()],
        Outcome::Minus => [-(t / 2.0).sin(), (t / 2.0).cos()],
    };
    let psi = [0.0, 1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
    let mut out = [0.0; 4];
    for (k, (oa, ob)) in [(Outcome::Plus, Outcome::Plus), (Outcome::Plus, Outcome::Minus), (Outcome::Minus, Outcome::Plus), (Outcome::Minus, Outcome::Minus)]
        .into_iter()
        .enumerate()
    {
        let (u, v) = (basis(ta, oa), basis(tb, ob));
        let amp = u[0] * v[0] * psi[0] + u[0] * v[1] * psi[1] + u[1] * v[0] * psi[2] + u[1] * v[1] * psi[3];
        out[k] = amp * amp;
    }
    out
}

#[test]
fn setting_is_canonical() {
    assert_abs_diff_eq!(st(-FRAC_PI_2).angle(), 3.0 * FRAC_PI_2, epsilon = 1e-12);
    assert_abs_diff_eq!(st(TAU + 1.0).angle(), 1.0, epsilon = 1e-12);
    assert_eq!(st(-1e-18).angle(), 0.0);
    assert!(st(-1e-300).angle() < TAU);
}

#[test]
fn outcome_rejects_non_unit_values() {
    assert!(Outcome::try_from(0).is_err());
    assert!(Outcome::try_from(2).is_err());
    assert_eq!(Outcome::try_from(-1).unwrap(), Outcome::Minus);
}

#[test]
fn constant_model_is_perfectly_correlated() {
    let m = constant_model(Outcome::Plus, Outcome::Plus);
    assert!(m.is_deterministic());
    let s = Setting::evenly_spaced(5);
    let b = behavior_from_model(&m, &s, &s, &Integration::quadrature()).unwrap();
    for row in b.cells() {
        for c in row {
            assert_eq!(c.0, [1.0, 0.0, 0.0, 0.0]);
        }
    }
}

#[test]
fn deterministic_lhv_rejects_bad_outcomes() {
    let err = deterministic_lhv(|_, _| 0, |_, _| 1, Source::uniform_angle()).unwrap_err();
    assert!(matches!(err, Error::InvalidOutcome(0)));
    let err = deterministic_lhv(|_, _| 1, |a, _| if a.angle() > 3.0 { 2 } else { 1 }, Source::uniform_angle()).unwrap_err();
    assert!(matches!(err, Error::InvalidOutcome(2)));
}

#[test]
fn local_model_rejects_out_of_range_responses() {
    assert!(LocalModel::new(Source::uniform_angle(), |_, _| 1.2, |_, _| 0.5).is_err());
    assert!(LocalModel::new(Source::UniformAngles { dim: 0 }, |_, _| 0.5, |_, _| 0.5).is_err());
}

#[test]
fn sign_model_matches_monte_carlo_oracle_and_closed_form() {
    let m = sign_model();
    let quad = Integration::quadrature();
    for (a, b) in [(0.0, 0.0), (0.3, 0.3 + FRAC_PI_2), (1.0, 2.0), (0.0, PI)] {
        let oracle = sign_oracle(a, b, 1_000_000);
        let closed = -1.0 + 2.0 * (a - b).abs() / PI;
        assert_abs_diff_eq!(oracle, closed, epsilon = 0.003);
        let beh = behavior_from_model(&m, &[st(a)], &[st(b)], &quad).unwrap();
        assert_abs_diff_eq!(beh.correlator(0, 0), closed, epsilon = 1e-3);
    }
    let beh = behavior_from_model(&m, &[st(0.2)], &[st(0.2)], &quad).unwrap();
    assert_abs_diff_eq!(beh.correlator(0, 0), -1.0, epsilon = 1e-12);
}

#[test]
fn sign_model_orthogonal_cells_are_uniform() {
    let est = estimate_cells(&sign_model(), &[st(0.1)], &[st(0.1 + FRAC_PI_2)], &Integration::monte_carlo(200_000, 3)).unwrap();
    let c = est.behavior.cell(0, 0);
    let se = est.correlator_stderr.unwrap()[0][0];
    assert!(c.correlator().abs() < 5.0 * se);
    for p in c.0 {
        assert_abs_diff_eq!(p, 0.25, epsilon = 0.01);
    }
}

#[test]
fn singlet_reference_cells() {
    let b = singlet_reference_behavior(&[st(0.4)], &[st(0.4), st(0.4 + FRAC_PI_2), st(0.4 + FRAC_PI_3)]).unwrap();
    assert_abs_diff_eq!(b.cell(0, 0).get(Outcome::Plus, Outcome::Plus), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(b.cell(0, 0).get(Outcome::Plus, Outcome::Minus), 0.5, epsilon = 1e-15);
    for p in b.cell(0, 1).0 {
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
    }
    assert_abs_diff_eq!(b.correlator(0, 2), -0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(b.cell(0, 2).get(Outcome::Plus, Outcome::Plus), 0.125, epsilon = 1e-15);
    assert!(singlet_reference_behavior(&[], &[st(0.0)]).is_err());
}

#[test]
fn singlet_matches_state_vector_oracle() {
    for (ta, tb) in [(0.0, FRAC_PI_3), (0.7, 2.9), (5.0, 1.0), (1.0, 1.0)] {
        let sv = singlet_state_vector(ta, tb);
        let t = singlet_table(st(ta), st(tb));
        for k in 0..4 {
            assert_abs_diff_eq!(t.0[k], sv[k], epsilon = 1e-12);
        }
    }
    let sv = singlet_state_vector(0.0, FRAC_PI_3);
    assert_abs_diff_eq!(sv[0], 0.125, epsilon = 1e-12);
}

#[test]
fn unnikrishnan_joint_probability_examples() {
    let p = |dq: f64, a, b| unnikrishnan_joint_probability(st(dq), st(0.0), 0.3, 0.3, 0.5, a, b).unwrap();
    use Outcome::{Minus, Plus};
    assert_abs_diff_eq!(p(0.0, Plus, Plus), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(p(PI, Plus, Plus), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(p(FRAC_PI_3, Plus, Plus), 0.375, epsilon = 1e-15);
    // oracle: outcomes sum to one and reproduce E = cos(π/3)
    let all = [p(FRAC_PI_3, Plus, Plus), p(FRAC_PI_3, Plus, Minus), p(FRAC_PI_3, Minus, Plus), p(FRAC_PI_3, Minus, Minus)];
    assert_abs_diff_eq!(all.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(all[0] - all[1] - all[2] + all[3], 0.5, epsilon = 1e-15);
    assert!(unnikrishnan_joint_probability(st(0.0), st(0.0), 0.0, 0.0, 0.0, Plus, Plus).is_err());
    assert!(unnikrishnan_joint_probability(st(0.0), st(0.0), 0.0, 0.0, -1.0, Plus, Plus).is_err());
}

#[test]
fn unnikrishnan_joint_is_half_cos_squared() {
    for x in [0.1, 0.7, 1.3, 2.9] {
        let q1 = st(2.0 * x);
        let pp = unnikrishnan_joint_probability(q1, st(0.0), 0.0, 0.0, 0.5, Outcome::Plus, Outcome::Plus).unwrap();
        let pm = unnikrishnan_joint_probability(q1, st(0.0), 0.0, 0.0, 0.5, Outcome::Plus, Outcome::Minus).unwrap();
        assert_abs_diff_eq!(pp, 0.5 * x.cos().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(pm, 0.5 * x.sin().powi(2), epsilon = 1e-14);
    }
}

#[test]
fn amplitude_correlation_examples() {
    let u = |q1: f64, phi1: f64| unnikrishnan_amplitude_correlation(st(q1), st(0.0), phi1, 0.0, 0.5).unwrap();
    assert_abs_diff_eq!(u(0.0, 0.0), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(u(PI, PI), -1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(u(FRAC_PI_3, FRAC_PI_3), 0.5, epsilon = 1e-15);
    // squared amplitude correlation is the (+,+) law up to the ½ normalisation
    let x = u(1.1, 0.4);
    let pp = unnikrishnan_joint_probability(st(1.1), st(0.0), 0.4, 0.0, 0.5, Outcome::Plus, Outcome::Plus).unwrap();
    assert_abs_diff_eq!(pp, 0.5 * x * x, epsilon = 1e-15);
}

#[test]
fn unnikrishnan_model_reproduces_singlet() {
    let m = unnikrishnan_model(UnnikrishnanParams::new(0.5, PI).unwrap()).unwrap();
    let quad = Integration::quadrature();
    let b = behavior_from_model(&m, &[st(0.0)], &[st(0.0), st(FRAC_PI_2), st(FRAC_PI_3)], &quad).unwrap();
    assert_abs_diff_eq!(b.cell(0, 0).get(Outcome::Plus, Outcome::Plus), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(b.cell(0, 0).get(Outcome::Plus, Outcome::Minus), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(b.correlator(0, 0), -1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(b.correlator(0, 1), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(b.correlator(0, 2), -0.5, epsilon = 1e-12);

    let same = unnikrishnan_model(UnnikrishnanParams::new(0.5, 0.0).unwrap()).unwrap();
    let b = behavior_from_model(&same, &[st(1.0)], &[st(1.0)], &quad).unwrap();
    assert_abs_diff_eq!(b.correlator(0, 0), 1.0, epsilon = 1e-12);
    assert!(UnnikrishnanParams::new(0.0, PI).is_err());
}

#[test]
fn unnikrishnan_monte_carlo_matches_closed_form() {
    let p = UnnikrishnanParams::new(0.75, 0.4).unwrap();
    let m = unnikrishnan_model(p).unwrap();
    let (q1, q2) = (1.2, 0.3);
    let b = behavior_from_model(&m, &[st(q1)], &[st(q2)], &Integration::monte_carlo(100_000, 1)).unwrap();
    let expected = (2.0 * p.s * (q1 - q2) + 2.0 * p.s * p.delta_phi).cos();
    assert_abs_diff_eq!(b.correlator(0, 0), expected, epsilon = 1e-9);
}

#[test]
fn stochastic_cos_correlator() {
    let m = stochastic_cos_model(0.8).unwrap();
    assert!(!m.is_deterministic());
    let b = behavior_from_model(&m, &[st(0.3)], &[st(1.4)], &Integration::quadrature()).unwrap();
    assert_abs_diff_eq!(b.correlator(0, 0), -0.32 * (0.3f64 - 1.4).cos(), epsilon = 1e-12);
    assert!(stochastic_cos_model(1.5).is_err());
}

#[test]
fn broken_strategy_surfaces_as_integration_failure() {
    let m = deterministic_lhv(|_, h| if h.first() > 6.2 && h.first() < 6.21 { 3 } else { 1 }, |_, _| 1, Source::uniform_angle());
    // the probe grid misses the bad window, integration must not
    let m = m.unwrap();
    let err = behavior_from_model(&m, &[st(0.0)], &[st(0.0)], &Integration::quadrature()).unwrap_err();
    assert!(matches!(err, Error::IntegrationFailure { .. }));
}

#[test]
fn quadrature_rejects_high_dimension() {
    let m = LocalModel::new(Source::UniformAngles { dim: 3 }, |_, _| 0.5, |_, _| 0.5).unwrap();
    let err = behavior_from_model(&m, &[st(0.0)], &[st(0.0)], &Integration::quadrature()).unwrap_err();
    assert!(matches!(err, Error::Dimension(3)));
    assert!(behavior_from_model(&m, &[st(0.0)], &[st(0.0)], &Integration::monte_carlo(10, 0)).is_ok());
    assert!(behavior_from_model(&m, &[st(0.0)], &[st(0.0)], &Integration::monte_carlo(0, 0)).is_err());
}

#[test]
fn monte_carlo_is_bit_reproducible() {
    let m = stochastic_cos_model(0.9).unwrap();
    let s = Setting::evenly_spaced(3);
    let i = Integration::monte_carlo(50_000, 77);
    let a = behavior_from_model(&m, &s, &s, &i).unwrap();
    let b = behavior_from_model(&m, &s, &s, &i).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn joint_tables_are_distributions(q1 in -10.0..10.0f64, q2 in -10.0..10.0f64, phi in 0.0..TAU, s in 0.05..3.0f64, dphi in -4.0..4.0f64) {
        let m = unnikrishnan_model(UnnikrishnanParams::new(s, dphi).unwrap()).unwrap();
        let t = m.joint_table(st(q1), st(q2), &HiddenSample::new(vec![phi]));
        prop_assert!(t.is_normalized(1e-12));
        let l = stochastic_cos_model(0.7).unwrap().to_joint();
        prop_assert!(l.joint_table(st(q1), st(q2), &HiddenSample::new(vec![phi])).is_normalized(1e-12));
    }

    #[test]
    fn unnikrishnan_depends_only_on_differences(q1 in 0.0..TAU, q2 in 0.0..TAU, c in -3.0..3.0f64, p1 in -3.0..3.0f64, p2 in -3.0..3.0f64) {
        // s = ½ keeps the law 2π-periodic, so canonicalisation is harmless
        for (a, b) in [(Outcome::Plus, Outcome::Plus), (Outcome::Plus, Outcome::Minus)] {
            let base = unnikrishnan_joint_probability(st(q1), st(q2), p1, p2, 0.5, a, b).unwrap();
            let shifted = unnikrishnan_joint_probability(st(q1 + c), st(q2 + c), p1, p2, 0.5, a, b).unwrap();
            prop_assert!((base - shifted).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_agrees_with_direct_evaluation(a in 0.0..TAU, b in 0.0..TAU, v in 0.0..1.0f64) {
        let m = stochastic_cos_model(v).unwrap();
        let quad = Integration::Quadrature { n: 256 };
        let direct = behavior_from_model(&m, &[st(a)], &[st(b)], &quad).unwrap();
        let embedded = behavior_from_model(&m.to_joint(), &[st(a)], &[st(b)], &quad).unwrap();
        prop_assert!((direct.correlator(0, 0) - embedded.correlator(0, 0)).abs() < 1e-12);
    }
}
