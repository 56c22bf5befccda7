use std::sync::OnceLock;

use crackmap::diskbg::{BoundaryTrace, SpectrumEstimate};
use crackmap::forward::{far_field_matrix, FarFieldMatrix, SolverOptions};
use crackmap::geometry::{Arc, ArtificialDisk, CrackNetwork, DirectionGrid, FmTest, Point};
use crackmap::indicators::{average_neighbors, detect_peaks, spectrum_distance, DlsmSetup, EigenCurve, FmSetup, ZRule};
use crackmap::C64;
use proptest::prelude::*;

fn crack_data() -> &'static FarFieldMatrix {
    static DATA: OnceLock<FarFieldMatrix> = OnceLock::new();
    DATA.get_or_init(|| {
        let net = CrackNetwork::new(vec![Arc::segment(Point::new(-0.1, -0.2), Point::new(0.15, 0.2))]).unwrap();
        far_field_matrix(&net, 6.0, DirectionGrid::new(16).unwrap(), &SolverOptions::default()).unwrap()
    })
}

fn dlsm_setup() -> &'static DlsmSetup {
    static SETUP: OnceLock<DlsmSetup> = OnceLock::new();
    SETUP.get_or_init(|| DlsmSetup::new(crack_data(), 0.2, 1e-3, ZRule::default()).unwrap())
}

fn spectrum(mut v: Vec<f64>) -> SpectrumEstimate {
    v.iter_mut().for_each(|x| *x = x.clamp(0.0, 100.0));
    SpectrumEstimate::new(v, (0.0, 100.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn spectrum_distance_is_symmetric_and_vanishes_on_equal_sets(
        a in prop::collection::vec(0.0f64..100.0, 1..6),
        b in prop::collection::vec(0.0f64..100.0, 1..6),
    ) {
        let (sa, sb) = (spectrum(a.clone()), spectrum(b));
        let d1 = spectrum_distance(&sa, &sb).unwrap();
        let d2 = spectrum_distance(&sb, &sa).unwrap();
        prop_assert_eq!(d1.value, d2.value);
        prop_assert!(d1.value >= 0.0 && !d1.flagged);
        prop_assert_eq!(spectrum_distance(&sa, &spectrum(a)).unwrap().value, 0.0);
    }

    #[test]
    fn neighbor_average_ignores_point_order(
        pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..5.0), 1..30),
        eta in 0.0f64..1.0,
        rotate in 0usize..30,
    ) {
        let points: Vec<Point> = pts.iter().map(|p| Point::new(p.0, p.1)).collect();
        let values: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let base = average_neighbors(&points, &values, eta);
        let r = rotate % points.len();
        let mut p2 = points.clone();
        let mut v2 = values.clone();
        p2.rotate_left(r);
        v2.rotate_left(r);
        p2.reverse();
        v2.reverse();
        let moved = average_neighbors(&p2, &v2, eta);
        for (i, m) in moved.iter().enumerate() {
            let orig = (points.len() - 1 - i + r) % points.len();
            prop_assert_eq!(m.to_bits(), base[orig].to_bits());
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        prop_assert!(base.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }

    #[test]
    fn sobolev_norm_grows_with_index_and_splits_into_parts(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8usize).prop_filter("odd", |c| c.len() % 2 == 1),
        s in -1.0f64..1.0,
    ) {
        let disk = ArtificialDisk::new(Point::zeros(), 0.3).unwrap();
        let tr = BoundaryTrace::new(disk, coeffs.iter().map(|c| C64::new(c.0, c.1)).collect()).unwrap();
        prop_assert!(tr.sobolev_norm(s) <= tr.sobolev_norm(s + 0.25) * (1.0 + 1e-12));
        let split = tr.real_part().sobolev_norm_squared(s) + tr.imag_part().sobolev_norm_squared(s);
        let whole = tr.sobolev_norm_squared(s);
        prop_assert!((split - whole).abs() <= 1e-12 * whole.max(1e-300));
    }

    #[test]
    fn isolated_bump_is_found_near_its_center(center in 5.3f64..6.7, width in 0.05f64..0.2) {
        let samples: Vec<(f64, f64)> = (0..101)
            .map(|i| {
                let k = 5.0 + 0.02 * i as f64;
                (k, 1.0 + 10.0 * (-((k - center) / width).powi(2)).exp())
            })
            .collect();
        let curve = EigenCurve::new(Point::zeros(), samples).unwrap();
        let found = detect_peaks(&curve, 1.0).unwrap();
        prop_assert_eq!(found.len(), 1);
        prop_assert!((found.values()[0].sqrt() - center).abs() < 0.02);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn imaginary_indicator_never_exceeds_full_indicator(x in -0.6f64..0.6, y in -0.6f64..0.6) {
        let v = dlsm_setup().values(Point::new(x, y)).unwrap();
        prop_assert!(v.j.is_finite() && v.j_im >= 0.0);
        prop_assert!(v.j_im <= v.j);
    }

    #[test]
    fn factorization_map_ignores_positive_scaling(c in 0.01f64..100.0) {
        let f = crack_data();
        let base = FmSetup::new(f, 1e-6, FmTest::Dipole, 4).unwrap();
        let scaled = FmSetup::new(&f.scaled(C64::new(c, 0.0)), 1e-6, FmTest::Dipole, 4).unwrap();
        for i in 0..9 {
            let z = Point::new(-0.4 + 0.1 * i as f64, 0.05 * i as f64 - 0.2);
            let (a, b) = (base.value(z), scaled.value(z));
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{a} vs {b} at {z:?}");
        }
    }
}
