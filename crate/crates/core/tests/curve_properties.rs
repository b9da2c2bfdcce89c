use pufbench::curve::{interpolate, normalize_steps};
use proptest::prelude::*;

proptest! {
    #[test]
    fn knots_endpoints_and_segments(acc in prop::collection::vec(0.0f64..=1.0, 2..200)) {
        let n = acc.len();
        let curve = interpolate(&acc).unwrap();
        let tau = normalize_steps(n).unwrap();
        prop_assert_eq!(curve[0], acc[0]);
        prop_assert_eq!(curve[100], acc[n - 1]);
        for (s, &v) in curve.iter().enumerate() {
            // knot lookup oracle: s lands on tau_i exactly when 100 i = s (N - 1)
            if (s * (n - 1)) % 100 == 0 {
                prop_assert_eq!(v, acc[s * (n - 1) / 100]);
            }
            if s < 100 {
                let i = tau.iter().rposition(|&t| t <= s as f64).unwrap();
                let (lo, hi) = (acc[i].min(acc[i + 1]), acc[i].max(acc[i + 1]));
                prop_assert!(lo <= v && v <= hi);
            }
        }
    }

    #[test]
    fn monotone_in_monotone_out(mut acc in prop::collection::vec(0.0f64..=1.0, 2..100)) {
        acc.sort_by(f64::total_cmp);
        let curve = interpolate(&acc).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[0] <= w[1]));
    }
}
