//! Property tests for the metric and energy invariants.

use kwc_core::energy::{kwc_energy, modica_mortola};
use kwc_core::field::GridField;
use kwc_core::potential::{PotentialSpec, WeightSpec};
use kwc_core::profile::PiecewiseProfile;
use kwc_core::setvalued::{
    graph_of_limit, hausdorff, sliced_distance, Jump1d, SampledGraph, SlicedLimit1d,
};
use proptest::prelude::*;

fn point_set(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| [x, y]), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric(a in point_set(1..30), b in point_set(1..30), c in point_set(1..30)) {
        let ga = SampledGraph::new(a, 1.0).unwrap();
        let gb = SampledGraph::new(b, 1.0).unwrap();
        let gc = SampledGraph::new(c, 1.0).unwrap();
        let dab = hausdorff(&ga, &gb).unwrap();
        let dba = hausdorff(&gb, &ga).unwrap();
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(hausdorff(&ga, &ga).unwrap(), 0.0);
        let dac = hausdorff(&ga, &gc).unwrap();
        let dcb = hausdorff(&gc, &gb).unwrap();
        prop_assert!(dab <= dac + dcb + 1e-12);
    }

    #[test]
    fn limit_graph_vertical_spacing_bounded(
        t in 0.1..0.9f64,
        xi_minus in -1.0..1.0f64,
        xi_plus in 1.0..2.5f64,
        resolution in 0.01..0.5f64,
    ) {
        let sl = SlicedLimit1d::new((0.0, 1.0), vec![Jump1d { t, xi_minus, xi_plus }]).unwrap();
        let g = graph_of_limit(&sl, resolution).unwrap();
        let mut heights: Vec<f64> = g
            .points
            .iter()
            .filter(|p| (p[0] - t).abs() < 1e-12)
            .map(|p| p[1])
            .collect();
        heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in heights.windows(2) {
            prop_assert!(w[1] - w[0] <= resolution + 1e-12);
        }
    }

    #[test]
    fn sliced_distance_vanishes_on_identical_limits(
        t in 0.1..0.9f64,
        xi_minus in -0.5..1.0f64,
    ) {
        let sl = SlicedLimit1d::new(
            (0.0, 1.0),
            vec![Jump1d { t, xi_minus, xi_plus: 1.3 }],
        ).unwrap();
        let d = sliced_distance(&sl, &sl, [1.0, 0.0], &[0.0], 0.05).unwrap();
        prop_assert_eq!(d.value, 0.0);
    }

    #[test]
    fn profile_is_continuous_and_anchored(
        eps in 1e-4..0.2f64,
        a in -0.5..1.0f64,
        b in 1.0..1.8f64,
    ) {
        let pot = PotentialSpec::quadratic();
        let prof = PiecewiseProfile::build(eps, a, b, &pot).unwrap();
        prop_assert!((prof.eval(0.0) - a).abs() <= 1e-10);
        prop_assert!((prof.eval(3.0 * eps.sqrt()) - b).abs() <= 1e-9);
        for bp in prof.breakpoints() {
            let d = 1e-9 * eps.sqrt();
            prop_assert!((prof.eval(bp - d) - prof.eval(bp + d)).abs() <= 1e-7);
        }
    }

    #[test]
    fn energy_reports_are_nonnegative_sums(
        vals in prop::collection::vec(-1.0..3.0f64, 4..40),
        eps in 0.01..1.0f64,
    ) {
        let n = vals.len();
        let v = GridField::from_values_1d(0.0, 1.0 / n as f64, vals.clone()).unwrap();
        let u = GridField::from_values_1d(0.0, 1.0 / n as f64, vals).unwrap();
        let pot = PotentialSpec::quadratic();
        let mm = modica_mortola(&v, eps, &pot).unwrap();
        prop_assert!(mm.dirichlet >= 0.0 && mm.potential >= 0.0);
        prop_assert!((mm.total() - (mm.dirichlet + mm.potential)).abs() <= 1e-12);
        let kwc = kwc_energy(&u, &v, eps, &pot, &WeightSpec::quadratic()).unwrap();
        prop_assert!(kwc.weighted_tv >= 0.0);
        prop_assert!(kwc.total() + 1e-12 >= mm.total());
    }
}
