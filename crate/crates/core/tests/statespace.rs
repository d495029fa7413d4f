use num_complex::Complex64;
use proptest::prelude::*;
use rmwalk::statespace::{
    delta_z, fs_distance, make_packet, mean_momentum, mu_z, Grid, GridState, PacketParams, PhysicalConstants,
};
use rmwalk::Error;
use std::f64::consts::FRAC_PI_2;

const NAT: PhysicalConstants = PhysicalConstants::natural();

fn wide() -> Grid {
    Grid::new(512, 40.0, -20.0).unwrap()
}

fn packet(a: f64, sigma: f64) -> GridState {
    make_packet(PacketParams::new(a, sigma), wide(), NAT).unwrap()
}

// Analytic Gaussian pieces used as quadrature-independent oracles.
fn overlap_same_width(a: f64, b: f64, sigma: f64) -> f64 {
    (-(a - b).powi(2) / (8.0 * sigma * sigma)).exp()
}

#[test]
fn momentum_of_boosted_packet() {
    let params = PacketParams::new(0.0, 1.0).with_momentum(3.0);
    let psi = make_packet(params, wide(), NAT).unwrap();
    // closed-form derivative φ' = (ip/ħ − (z−a)/2σ²) φ, integrated on the grid
    let dx = psi.grid().dx();
    let oracle: f64 = psi
        .grid()
        .points()
        .zip(psi.amplitudes())
        .map(|(z, a)| {
            let d = Complex64::new(-z / 2.0, 3.0) * a;
            (Complex64::new(0.0, -1.0) * a.conj() * d).re
        })
        .sum::<f64>()
        * dx;
    assert!((oracle - 3.0).abs() < 1e-4);
    let p = mean_momentum(&psi, NAT).unwrap();
    assert!((p - 3.0).abs() < 1e-4, "⟨p⟩ = {p}");
}

#[test]
fn displaced_packet_mean() {
    assert!((mu_z(&packet(2.5, 1.0)).unwrap() - 2.5).abs() < 1e-8);
}

#[test]
fn symmetric_mixture_moments() {
    let (l, r) = (packet(-3.0, 1.0), packet(3.0, 1.0));
    let half = Complex64::new(0.5f64.sqrt(), 0.0);
    let psi = GridState::superpose(&[(half, &l), (half, &r)]).unwrap();
    assert!(mu_z(&psi).unwrap().abs() < 1e-8);
    // σ² + a² with the small interference term e^{−a²/2σ²} kept
    let s = overlap_same_width(-3.0, 3.0, 1.0);
    let exact = ((10.0 + s) / (1.0 + s)).sqrt();
    let d = delta_z(&psi).unwrap();
    assert!((d - exact).abs() < 1e-6, "δ_z = {d}, oracle {exact}");
    assert!((d - 10f64.sqrt()).abs() / 10f64.sqrt() < 0.01);
}

#[test]
fn weighted_mixture_mean() {
    let (l, r) = (packet(-3.0, 1.0), packet(3.0, 1.0));
    let psi = GridState::superpose(&[(Complex64::new(0.8, 0.0), &l), (Complex64::new(0.6, 0.0), &r)]).unwrap();
    let s = overlap_same_width(-3.0, 3.0, 1.0);
    // the cross density is centred at 0, so it only renormalizes
    let exact = (0.64 * -3.0 + 0.36 * 3.0) / (1.0 + 2.0 * 0.48 * s);
    let mu = mu_z(&psi).unwrap();
    assert!((mu - exact).abs() < 1e-3, "μ_z = {mu}, oracle {exact}");
    assert!((mu + 0.84).abs() < 0.01);
}

#[test]
fn wide_packet_spread() {
    let d = delta_z(&packet(0.0, 2.0)).unwrap();
    assert!((d - 2.0).abs() < 1e-5);
}

#[test]
fn unresolvable_width() {
    let err = make_packet(PacketParams::new(0.0, 0.01), wide(), NAT).unwrap_err();
    assert!(matches!(err, Error::WidthUnresolvable { .. }));
}

#[test]
fn fs_distance_examples() {
    let phi = packet(0.0, 1.0);
    assert!(fs_distance(&phi, &phi.with_global_phase(1.3)).unwrap() < 1e-10);
    let exact = (-0.5f64).exp().acos();
    assert!((exact - 0.9191).abs() < 1e-4);
    let d = fs_distance(&phi, &packet(2.0, 1.0)).unwrap();
    assert!((d - exact).abs() < 1e-8, "ρ = {d}");
    let g = wide();
    let e1 = GridState::basis(g, 10).unwrap();
    let e2 = GridState::basis(g, 11).unwrap();
    assert!((fs_distance(&e1, &e2).unwrap() - FRAC_PI_2).abs() < 1e-10);
    let other = Grid::new(512, 40.0, -19.0).unwrap();
    assert_eq!(
        fs_distance(&e1, &GridState::basis(other, 0).unwrap()).unwrap_err(),
        Error::GridMismatch
    );
}

#[test]
fn mu_z_rejects_unnormalized() {
    let psi = GridState::from_fn(wide(), |z| Complex64::new((-z * z).exp(), 0.0));
    assert!(matches!(mu_z(&psi), Err(Error::NotNormalized { .. })));
}

fn grid64() -> Grid {
    Grid::new(64, 64.0, -32.0).unwrap()
}

fn random_state() -> impl Strategy<Value = GridState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 64).prop_filter_map("zero vector", |v| {
        let amps = v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        GridState::new(grid64(), amps).unwrap().normalized().ok()
    })
}

proptest! {
    #[test]
    fn projective_invariance(phi in random_state(), psi in random_state(), a in -7.0f64..7.0, b in -7.0f64..7.0) {
        let d0 = fs_distance(&phi, &psi).unwrap();
        let d1 = fs_distance(&phi.with_global_phase(a), &psi.with_global_phase(b)).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-10);
        prop_assert!((0.0..=FRAC_PI_2).contains(&d0));
        prop_assert!((d0 - fs_distance(&psi, &phi).unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn triangle_inequality(x in random_state(), y in random_state(), z in random_state()) {
        let xy = fs_distance(&x, &y).unwrap();
        let yz = fs_distance(&y, &z).unwrap();
        let xz = fs_distance(&x, &z).unwrap();
        prop_assert!(xz <= xy + yz + 1e-9);
    }
}

proptest! {
    #[test]
    fn packet_moments_round_trip(width in 0.32f64..2.0, frac in -0.3f64..0.3, p in -4.0f64..4.0) {
        let g = wide();
        let center = frac * (20.0 - 8.0 * width);
        let psi = make_packet(PacketParams::new(center, width).with_momentum(p), g, NAT).unwrap();
        let mu = mu_z(&psi).unwrap();
        let d = delta_z(&psi).unwrap();
        prop_assert!((mu - center).abs() < 1e-6 * width);
        prop_assert!((d / width - 1.0).abs() < 1e-6);
    }

    #[test]
    fn boost_leaves_density_alone(width in 0.5f64..2.0, center in -4.0f64..4.0, p in -10.0f64..10.0) {
        let psi = make_packet(PacketParams::new(center, width), wide(), NAT).unwrap();
        let kicked = psi.boosted(p, 1.0);
        for (a, b) in psi.density().zip(kicked.density()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((mu_z(&psi).unwrap() - mu_z(&kicked).unwrap()).abs() < 1e-12);
        prop_assert!((delta_z(&psi).unwrap() - delta_z(&kicked).unwrap()).abs() < 1e-12);
    }
}
