use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rmwalk::geometry::{
    class_distance, class_membership, foliation_coords, isometry_check, overlap_lattice, phase_space_overlap,
    scale_translate, surrogate_distance, tangent_orthogonality, ClassSpec,
};
use rmwalk::rng::stream;
use rmwalk::statespace::{delta_z, fs_distance, make_packet, mu_z, Grid, GridState, PacketParams, PhysicalConstants};
use rmwalk::Error;
use std::f64::consts::{E, FRAC_PI_2, PI};

const NAT: PhysicalConstants = PhysicalConstants::natural();

fn wide() -> Grid {
    Grid::new(512, 40.0, -20.0).unwrap()
}

fn packet(a: f64, sigma: f64) -> GridState {
    make_packet(PacketParams::new(a, sigma), wide(), NAT).unwrap()
}

/// Quadrature of ⟨g₁, g₂⟩ built from the textbook packet formula, independent
/// of the crate's packet constructor.
fn quadrature_overlap(grid: Grid, p1: PacketParams, p2: PacketParams) -> f64 {
    let g = |p: PacketParams, z: f64| {
        let s = p.width;
        let r = (2.0 * PI * s * s).powf(-0.25) * (-(z - p.center).powi(2) / (4.0 * s * s)).exp();
        Complex64::from_polar(r, p.momentum * z)
    };
    let c: Complex64 = grid.points().map(|z| g(p1, z).conj() * g(p2, z)).sum::<Complex64>() * grid.dx();
    c.norm_sqr()
}

#[test]
fn class_distance_examples() {
    let c = ClassSpec::new(1.0, 1.0).unwrap();
    assert_eq!(class_distance(c, c).unwrap(), 0.0);
    let d = class_distance(c, ClassSpec::new(3.0, 1.0).unwrap()).unwrap();
    assert!((d - 0.9191).abs() < 1e-4);
    let far = class_distance(c, ClassSpec::new(21.0, 1.0).unwrap()).unwrap();
    assert!((far - FRAC_PI_2).abs() < 1e-6);
    assert!(matches!(
        class_distance(c, ClassSpec::new(0.0, 2.0).unwrap()),
        Err(Error::MixedResolutions(..))
    ));
}

#[test]
fn class_distance_attained_by_gaussian_representatives() {
    for i in 0..=32 {
        let sep = 8.0 * i as f64 / 32.0;
        let (c, d) = (-sep / 2.0, sep / 2.0);
        let closed = class_distance(ClassSpec::new(c, 1.0).unwrap(), ClassSpec::new(d, 1.0).unwrap()).unwrap();
        let numeric = fs_distance(&packet(c, 1.0), &packet(d, 1.0)).unwrap();
        assert!((closed - numeric).abs() < 1e-6, "sep {sep}: {closed} vs {numeric}");
    }
}

proptest! {
    // Narrower, boosted class members never come closer than the Gaussian
    // representatives of width σ.
    #[test]
    fn class_members_no_closer_than_representatives(
        sep in 0.0f64..6.0, w1 in 0.4f64..1.0, w2 in 0.4f64..1.0, p1 in -2.0f64..2.0, p2 in -2.0f64..2.0,
    ) {
        let a = make_packet(PacketParams::new(-sep / 2.0, w1).with_momentum(p1), wide(), NAT).unwrap();
        let b = make_packet(PacketParams::new(sep / 2.0, w2).with_momentum(p2), wide(), NAT).unwrap();
        let spec_a = ClassSpec::new(-sep / 2.0, 1.0).unwrap();
        let spec_b = ClassSpec::new(sep / 2.0, 1.0).unwrap();
        prop_assert!(class_membership(&a, spec_a, 1e-6).unwrap());
        prop_assert!(class_membership(&b, spec_b, 1e-6).unwrap());
        let bound = class_distance(spec_a, spec_b).unwrap();
        prop_assert!(fs_distance(&a, &b).unwrap() >= bound - 1e-9);
    }
}

#[test]
fn overlap_examples() {
    let p = PacketParams::new(0.0, 1.0);
    assert_eq!(phase_space_overlap(p, p, NAT).unwrap(), 1.0);
    let shifted = PacketParams::new(2.0, 1.0);
    let boosted = PacketParams::new(0.0, 1.0).with_momentum(1.0);
    for q in [shifted, boosted] {
        let closed = phase_space_overlap(p, q, NAT).unwrap();
        assert!((closed - (-1.0f64).exp()).abs() < 1e-12);
        assert!((quadrature_overlap(wide(), p, q) - closed).abs() < 1e-6);
    }
    assert!(matches!(
        phase_space_overlap(p, PacketParams::new(0.0, 2.0), NAT),
        Err(Error::MixedWidths(..))
    ));
}

#[test]
fn overlap_lattice_matches_quadrature() {
    let report = overlap_lattice(wide(), 1.0, NAT, 10, 6.0, 3.0).unwrap();
    assert_eq!(report.points, 100);
    assert!(report.max_abs_error < 1e-6, "{report:?}");
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let (da, dp) = (6.0 * i as f64 / 9.0, 3.0 * j as f64 / 9.0);
            let p1 = PacketParams::new(-da / 2.0, 1.0).with_momentum(-dp / 2.0);
            let p2 = PacketParams::new(da / 2.0, 1.0).with_momentum(dp / 2.0);
            worst = worst.max((quadrature_overlap(wide(), p1, p2) - phase_space_overlap(p1, p2, NAT).unwrap()).abs());
        }
    }
    assert!(worst < 1e-6);
}

proptest! {
    #[test]
    fn overlap_factorizes(a in -3.0f64..3.0, b in -3.0f64..3.0, p in -2.0f64..2.0, q in -2.0f64..2.0, s in 0.5f64..2.0) {
        let o = |a: f64, b: f64, p: f64, q: f64| {
            phase_space_overlap(PacketParams::new(a, s).with_momentum(p), PacketParams::new(b, s).with_momentum(q), NAT).unwrap()
        };
        let full = o(a, b, p, q);
        let product = o(a, b, p, p) * o(a, a, p, q);
        // equal up to the rounding of the summed exponent
        prop_assert!((full - product).abs() <= 1e-12 * full);
    }
}

#[test]
fn scale_translate_examples() {
    let g = packet(0.0, 1.0);
    let same = scale_translate(&g, 0.0, 1.0).unwrap();
    let err = g
        .amplitudes()
        .iter()
        .zip(same.amplitudes())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-8);

    let moved = scale_translate(&g, 2.0, 1.0).unwrap();
    assert!((mu_z(&moved).unwrap() - 2.0).abs() < 2e-4);
    assert!((delta_z(&moved).unwrap() - 1.0).abs() < 1e-4);
    assert!((moved.norm() - 1.0).abs() < 1e-6);

    let squeezed = scale_translate(&g, 0.0, 2.0).unwrap();
    assert!((delta_z(&squeezed).unwrap() - 0.5).abs() < 1e-4);
    // matches the analytic narrower packet pointwise
    let exact = packet(0.0, 0.5);
    assert!(fs_distance(&squeezed, &exact).unwrap() < 1e-4);
}

#[test]
fn scale_translate_errors() {
    let g = packet(0.0, 1.0);
    assert!(matches!(scale_translate(&g, 0.0, 10.0), Err(Error::ScaledBelowResolution { .. })));
    assert!(matches!(scale_translate(&g, 17.0, 1.0), Err(Error::TranslatedOffGrid { .. })));
    assert!(scale_translate(&g, 0.0, -1.0).is_err());
}

#[test]
fn foliation_examples() {
    let f = foliation_coords(&packet(1.5, 1.0)).unwrap();
    assert!((f.tau - 1.5).abs() < 1e-8 && f.s.abs() < 1e-6);
    let big = Grid::new(1024, 80.0, -40.0).unwrap();
    let f = foliation_coords(&make_packet(PacketParams::new(0.0, E), big, NAT).unwrap()).unwrap();
    assert!(f.tau.abs() < 1e-8 && (f.s - 1.0).abs() < 1e-6);
    let spike = GridState::basis(wide(), 256).unwrap();
    assert!(matches!(foliation_coords(&spike), Err(Error::DegenerateSpread { .. })));
}

#[test]
fn foliation_composition_law() {
    // a skewed real two-peak state, so the law is not tested on Gaussians only
    let psi = GridState::superpose(&[
        (Complex64::new(0.9, 0.0), &packet(-1.0, 1.0)),
        (Complex64::new(0.4, 0.0), &packet(1.5, 0.8)),
    ])
    .unwrap();
    let f0 = foliation_coords(&psi).unwrap();
    for (tau, lambda) in [(1.0, 1.0), (-2.5, 1.3), (0.7, 0.6), (3.0, 1.8)] {
        let f1 = foliation_coords(&scale_translate(&psi, tau, lambda).unwrap()).unwrap();
        assert!((f1.tau - f0.tau - tau).abs() < 1e-4, "τ shift for ({tau},{lambda})");
        assert!((f1.s - f0.s + lambda.ln()).abs() < 1e-4, "s shift for ({tau},{lambda})");
    }
}

#[test]
fn tangents_orthogonal_for_real_states() {
    let g = packet(0.0, 1.0);
    assert!(tangent_orthogonality(&g).unwrap() < 1e-6);

    let mut rng = stream(77, 0);
    for _ in 0..5 {
        let parts: Vec<GridState> = (0..5).map(|i| packet(-10.0 + 5.0 * i as f64, 0.5)).collect();
        let terms: Vec<(Complex64, &GridState)> = parts
            .iter()
            .map(|p| (Complex64::new(rng.random_range(-1.0..1.0), 0.0), p))
            .collect();
        let psi = GridState::superpose(&terms).unwrap().with_global_phase(rng.random_range(0.0..6.0));
        let v = tangent_orthogonality(&psi).unwrap();
        assert!(v < 1e-3, "five-peak orthogonality {v}");
    }

    // outside the real-state precondition the value is only reported
    let boosted = make_packet(PacketParams::new(0.0, 1.0).with_momentum(1.0), wide(), NAT).unwrap();
    let v = tangent_orthogonality(&boosted).unwrap();
    assert!(v.is_finite() && (0.0..=1.0 + 1e-12).contains(&v));
}

#[test]
fn isometry_report() {
    let report = isometry_check(wide(), 1.0, 100, 6.0).unwrap();
    assert_eq!(report.samples, 100);
    assert_eq!(report.rows.len(), 100);
    assert!(report.max_abs_error < 1e-6, "{}", report.max_abs_error);
    assert!((0.99..=1.01).contains(&report.local_metric_ratio));
    let g = packet(0.0, 1.0);
    let c2 = fs_distance(&g, &g).unwrap().cos().powi(2);
    assert_eq!((c2 - 1.0).abs(), 0.0);

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("separation,cos2_numeric,cos2_closed_form,abs_error\n"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn membership_examples() {
    let (c, s) = (1.0, 1.0);
    let spec = ClassSpec::new(c, s).unwrap();
    assert!(class_membership(&packet(c, s / 2.0), spec, spec.default_mu_tol()).unwrap());
    assert!(!class_membership(&packet(c + 3.0 * s, s / 2.0), spec, s / 10.0).unwrap());
    let two = GridState::superpose(&[
        (Complex64::new(1.0, 0.0), &packet(c - 3.0 * s, s / 2.0)),
        (Complex64::new(1.0, 0.0), &packet(c + 3.0 * s, s / 2.0)),
    ])
    .unwrap();
    let d = delta_z(&two).unwrap();
    assert!((d - 3.0 * s * (1.0f64 + 1.0 / 36.0).sqrt()).abs() < 1e-3);
    assert!(d > s);
    assert!(!class_membership(&two, spec, spec.default_mu_tol()).unwrap());
    assert!((surrogate_distance(&packet(c + 3.0, 0.5), spec, 0.5).unwrap() - 2.5).abs() < 1e-8);
}

proptest! {
    #[test]
    fn membership_ignores_phase_and_boost(
        center in -3.0f64..3.0, width in 0.4f64..1.5, alpha in 0.0f64..6.3, p in -5.0f64..5.0,
    ) {
        let psi = packet(center, width);
        let spec = ClassSpec::new(0.0, 1.0).unwrap();
        let base = class_membership(&psi, spec, 0.5).unwrap();
        prop_assert_eq!(base, class_membership(&psi.with_global_phase(alpha), spec, 0.5).unwrap());
        prop_assert_eq!(base, class_membership(&psi.boosted(p, 1.0), spec, 0.5).unwrap());
    }
}
