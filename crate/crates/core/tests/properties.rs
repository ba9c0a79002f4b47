//! Cross-module property tests.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stubborn_mining::hiker::{sample_hiker_path, ExitSide, HikerProblem};
use stubborn_mining::mixed::{compose, StrategySummary};
use stubborn_mining::params::bracket;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bracket_identity(n in 0u32..=64, lambda in 0.0f64..0.999) {
        let lhs = bracket(n, lambda) * (1.0 - lambda) + lambda.powi(n as i32);
        prop_assert!((lhs - 1.0).abs() < 1e-12, "n={n} lambda={lambda}: {lhs}");
    }

    #[test]
    fn hiker_paths_satisfy_step_identities(
        m in 0u32..=8,
        span in 2u32..=6,
        p in 0.55f64..0.95,
        seed: u64,
    ) {
        let big_m = m + span;
        let problem = HikerProblem::new(m, big_m, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = sample_hiker_path(&problem, &mut rng).unwrap();
        prop_assert_eq!(path.left_steps + path.right_steps, path.total_steps);
        match path.exit {
            ExitSide::Low => prop_assert_eq!(
                path.left_steps as i64 - path.right_steps as i64,
                i64::from(m)
            ),
            ExitSide::High => prop_assert_eq!(
                path.right_steps as i64 - path.left_steps as i64,
                i64::from(big_m - m)
            ),
        }
    }

    #[test]
    fn barycenter_is_permutation_invariant_and_associative(
        raw in prop::collection::vec((0.5f64..3.0, 0.0f64..1.0, 0.5f64..5.0), 3),
    ) {
        let summaries: Vec<StrategySummary> = raw
            .iter()
            .map(|&(d, gt, e)| StrategySummary::new(d, gt, e).unwrap())
            .collect();
        let (a, b, c) = (summaries[0], summaries[1], summaries[2]);
        let abc = compose(&[a, b, c]).unwrap();
        let cab = compose(&[c, a, b]).unwrap();
        prop_assert!((abc.d - cab.d).abs() < 1e-12);
        prop_assert!((abc.gamma_tilde - cab.gamma_tilde).abs() < 1e-12);
        // nesting: compose(compose(a, b), c) re-derives the same barycenter
        let ab = compose(&[a, b]).unwrap();
        let nested = compose(&[ab, c]).unwrap();
        prop_assert!((abc.d - nested.d).abs() < 1e-12, "{} vs {}", abc.d, nested.d);
        prop_assert!((abc.gamma_tilde - nested.gamma_tilde).abs() < 1e-12);
        // the composed weight is the sum of the component weights
        let mu_sum = a.mu + b.mu + c.mu;
        prop_assert!((abc.mu - mu_sum).abs() < 1e-12 * mu_sum);
    }
}
