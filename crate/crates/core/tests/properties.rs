use horoshrinker::cli::CurveFile;
use horoshrinker::geometry::{shrinker_residual, CurveFamily, CurveSample, GeneratingCurve};
use horoshrinker::grim::{
    finite_difference_jacobian, first_integral, grim_jacobian, solve_grim, z0_from_star, z0_star_map, PhasePoint,
};
use horoshrinker::ode::{EventKind, SolverConfig};
use horoshrinker::rotational::{axis_curvature, solve_bowl, solve_wing, StarterComparison};
use proptest::prelude::*;

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn first_integral_is_conserved(z0 in 0.25f64..0.98) {
        let o = solve_grim(z0, (-15.0, 15.0), &cfg()).unwrap();
        let c = first_integral(PhasePoint::new(z0, 0.0)).unwrap();
        prop_assert_eq!(o.first_integral_c, c);
        prop_assert!(o.first_integral_drift <= 1e-8 * (1.0 + c.abs()));
    }

    #[test]
    fn grim_extrema_straddle_one(z0 in 0.25f64..0.98) {
        let o = solve_grim(z0, (-15.0, 15.0), &cfg()).unwrap();
        prop_assert!(o.extrema().count() >= 2);
        for e in o.extrema() {
            match e.kind {
                EventKind::ZExtremumMax => prop_assert!(e.state[1] > 1.0),
                _ => prop_assert!(e.state[1] < 1.0),
            }
        }
    }

    #[test]
    fn partner_map_round_trips(z0 in 0.2f64..0.98) {
        let star = z0_star_map(z0, &cfg()).unwrap();
        prop_assert!(star > 1.0);
        let back = z0_from_star(star, &cfg()).unwrap();
        prop_assert!((back - z0).abs() <= 1e-7, "{} -> {} -> {}", z0, star, back);
    }

    #[test]
    fn axis_convexity_follows_height(z0 in 0.2f64..4.0) {
        prop_assume!((z0 - 1.0).abs() > 1e-3);
        let k = axis_curvature(z0).unwrap();
        prop_assert_eq!(k > 0.0, z0 < 1.0);
    }

    #[test]
    fn bowl_stays_on_one_side_of_its_axis_height(z0 in 0.3f64..3.0) {
        prop_assume!((z0 - 1.0).abs() > 1e-2);
        let b = solve_bowl(z0, 8.0, &cfg()).unwrap();
        let below = z0 < 1.0;
        for p in &b.samples {
            prop_assert!(if below { p.z >= z0 - 1e-12 } else { p.z <= z0 + 1e-12 }, "r = {}, z = {}", p.r, p.z);
        }
        for e in b.maxima() {
            prop_assert!(e.state[0] > 1.0);
        }
        for e in b.minima() {
            prop_assert!(e.state[0] < 1.0);
        }
    }

    #[test]
    fn series_and_picard_agree(z0 in 0.3f64..3.0) {
        prop_assume!((z0 - 1.0).abs() > 1e-3);
        let s = StarterComparison::compute(z0, 1e-3).unwrap();
        prop_assert!(s.z_difference <= 1e-9, "{}", s.z_difference);
        let windows_decrease = s.picard_deltas.windows(2).all(|w| w[1] < w[0]);
        prop_assert!(windows_decrease);
    }

    #[test]
    fn wing_has_only_the_waist_as_critical_point(x0 in 0.5f64..2.0, z0 in 0.6f64..3.0) {
        let w = solve_wing(x0, z0, 8.0, &cfg()).unwrap();
        prop_assert_eq!(w.x_critical_points.len(), 1);
        prop_assert_eq!(w.x_critical_points[0], 0.0);
        prop_assert!((w.min_x - x0).abs() <= 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences(z in 0.3f64..4.0, theta in -1.5f64..1.5) {
        let p = PhasePoint::new(z, theta);
        let exact = grim_jacobian(p).unwrap();
        let fd = finite_difference_jacobian(p, 1e-6).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((exact[i][j] - fd[i][j]).abs() <= 1e-6 * (1.0 + exact[i][j].abs()));
            }
        }
    }

    #[test]
    fn csv_round_trip_is_exact(rows in prop::collection::vec(prop::array::uniform4(-1e12f64..1e12), 1..40)) {
        let mut f = CurveFile::new(CurveFamily::Grim).meta_f64("z0", 0.5);
        f.rows = rows.iter().map(|r| r.to_vec()).collect();
        let mut buf = Vec::new();
        f.write(&mut buf).unwrap();
        prop_assert_eq!(CurveFile::read(buf.as_slice(), None).unwrap(), f);
    }

    #[test]
    fn horosphere_residual_is_exactly_zero(steps in prop::collection::vec(0.001f64..0.1, 3..200)) {
        let mut t = 0.0;
        let samples = steps
            .iter()
            .map(|h| {
                t += h;
                CurveSample { t, x: t, z: 1.0, theta: 0.0 }
            })
            .collect();
        let curve = GeneratingCurve::new(CurveFamily::Grim, samples);
        let r = shrinker_residual(&curve, CurveFamily::Grim.symmetry()).unwrap();
        prop_assert_eq!(r.max_residual, 0.0);
    }
}
