use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rmwalk::ensembles::{
    calibrate_step, calibrate_theta, rm_kick, sample_gue, sample_step_length, semicircle_cdf, KickConfig,
    KickMethod,
};
use rmwalk::rng::stream;
use rmwalk::statespace::{fs_distance, make_packet, make_packet_with_margin, Grid, GridState, PacketParams, PhysicalConstants};
use rmwalk::stats::{ks_one_sample, ks_two_sample};

fn grid64() -> Grid {
    Grid::new(64, 64.0, -32.0).unwrap()
}

fn gaussian64(p: f64) -> GridState {
    make_packet(PacketParams::new(0.0, 4.0).with_momentum(p), grid64(), PhysicalConstants::natural()).unwrap()
}

#[test]
fn off_diagonal_second_moment() {
    let mut rng = stream(11, 0);
    let n = 100_000;
    let scale = 0.7;
    let mut acc = 0.0;
    for _ in 0..n {
        let h = sample_gue(2, scale, &mut rng).unwrap();
        acc += h.matrix()[(0, 1)].norm_sqr();
    }
    let ratio = acc / n as f64 / (scale * scale);
    assert!((ratio - 1.0).abs() < 0.02, "E|H01|²/scale² = {ratio}");
}

#[test]
fn diagonal_variance() {
    let mut rng = stream(12, 0);
    let n = 50_000;
    let acc: f64 = (0..n)
        .map(|_| sample_gue(2, 1.0, &mut rng).unwrap().matrix()[(0, 0)].re.powi(2))
        .sum();
    assert!((acc / n as f64 - 1.0).abs() < 0.03);
}

#[test]
fn semicircle_at_n200() {
    let scale = 0.3;
    let h = sample_gue(200, scale, &mut stream(13, 0)).unwrap();
    assert_eq!(h.hermiticity_error(), 0.0);
    let radius = 2.0 * (200f64).sqrt() * scale;
    let ks = ks_one_sample(&h.eigenvalues(), |x| semicircle_cdf(x, radius));
    assert!(ks.statistic < 0.05, "Kolmogorov distance {}", ks.statistic);
}

#[test]
fn seeded_kicks_are_bit_identical() {
    let psi = gaussian64(0.5);
    for method in [KickMethod::Eigen, KickMethod::Series, KickMethod::Krylov] {
        let cfg = KickConfig::new(64, 1.0, 0.01).with_method(method);
        let a = rm_kick(&psi, &cfg, &mut stream(5, 9)).unwrap();
        let b = rm_kick(&psi, &cfg, &mut stream(5, 9)).unwrap();
        assert_eq!(a, b, "{method:?}");
    }
}

fn step_lengths(psi: &GridState, cfg: &KickConfig, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, 0);
    (0..n)
        .map(|_| fs_distance(psi, &rm_kick(psi, cfg, &mut rng).unwrap()).unwrap())
        .collect()
}

// Krylov kicks claim the same output law as materialized GUE kicks; compare
// step lengths and the weight left on a fixed probe vector.
#[test]
fn krylov_matches_eigen_in_law() {
    let psi = gaussian64(0.3);
    let probe =
        make_packet_with_margin(PacketParams::new(5.0, 4.0), grid64(), PhysicalConstants::natural(), 5.0).unwrap();
    let base = KickConfig::new(64, 1.0, 0.02);
    let eig = base.with_method(KickMethod::Eigen);
    let kry = base.with_method(KickMethod::Krylov);
    let n = 3000;
    let mut r1 = stream(21, 0);
    let mut r2 = stream(22, 0);
    let mut len_e = Vec::new();
    let mut len_k = Vec::new();
    let mut probe_e = Vec::new();
    let mut probe_k = Vec::new();
    for _ in 0..n {
        let a = rm_kick(&psi, &eig, &mut r1).unwrap();
        let b = rm_kick(&psi, &kry, &mut r2).unwrap();
        len_e.push(fs_distance(&psi, &a).unwrap());
        len_k.push(fs_distance(&psi, &b).unwrap());
        probe_e.push(probe.inner(&a).unwrap().norm_sqr());
        probe_k.push(probe.inner(&b).unwrap().norm_sqr());
    }
    let p_len = ks_two_sample(&len_e, &len_k).p_value;
    let p_probe = ks_two_sample(&probe_e, &probe_k).p_value;
    assert!(p_len > 0.001, "step-length KS p = {p_len}");
    assert!(p_probe > 0.001, "probe-overlap KS p = {p_probe}");
}

#[test]
fn exact_step_law_matches_kicks() {
    let psi = gaussian64(0.0);
    let cfg = KickConfig::new(64, 1.0, 0.01).with_method(KickMethod::Series);
    let kicked = step_lengths(&psi, &cfg, 2000, 31);
    let mut rng = stream(32, 0);
    let law: Vec<f64> = (0..2000).map(|_| sample_step_length(64, cfg.theta(), &mut rng)).collect();
    assert!(ks_two_sample(&kicked, &law).p_value > 0.001);
}

#[test]
fn calibrated_mean_step() {
    let scale = calibrate_step(64, 0.05, 1.0, &mut stream(41, 0)).unwrap();
    let cfg = KickConfig::new(64, scale, 1.0).with_method(KickMethod::Krylov);
    let lengths = step_lengths(&gaussian64(0.0), &cfg, 10_000, 42);
    let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
    assert!((mean - 0.05).abs() < 0.002, "mean step {mean}");
}

#[test]
fn calibration_is_monotone_and_scales_with_dt() {
    let s1 = calibrate_step(64, 0.02, 1.0, &mut stream(43, 0)).unwrap();
    let s2 = calibrate_step(64, 0.04, 1.0, &mut stream(43, 0)).unwrap();
    assert!(s1 < s2);
    let s_half = calibrate_step(64, 0.04, 2.0, &mut stream(44, 0)).unwrap();
    assert!((s_half / s2 - 0.5).abs() < 0.05 * 0.5);
    // small-step regime: mean length ≈ θ·E√Gamma(N−1)
    let theta = calibrate_theta(64, 0.01, 2000, &mut stream(45, 0)).unwrap();
    let approx = 0.01 / (63f64).sqrt();
    assert!((theta / approx - 1.0).abs() < 0.02);
    assert!(calibrate_step(64, 0.6, 1.0, &mut stream(46, 0)).is_err());
}

fn goe_series_kick<R: Rng>(psi: &GridState, theta: f64, rng: &mut R) -> GridState {
    let n = psi.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::SQRT_2;
        for k in j + 1..n {
            let x: f64 = rng.sample(StandardNormal);
            h[(j, k)] = x;
            h[(k, j)] = x;
        }
    }
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let x = nalgebra::DVector::from_column_slice(psi.amplitudes());
    let mut c = v.ad_mul(&x);
    for (cj, &l) in c.iter_mut().zip(eig.eigenvalues.iter()) {
        *cj *= Complex64::from_polar(1.0, -theta * l);
    }
    GridState::new(*psi.grid(), (v * c).iter().copied().collect()).unwrap()
}

// Unitary invariance makes GUE step statistics depend only on the state's
// norm; GOE kicks treat real and complex states differently.
#[test]
fn isotropy_holds_for_gue_and_fails_for_goe() {
    let phi = gaussian64(0.0);
    let psi = gaussian64(0.5);
    let n = 10_000;
    let theta = 0.01;
    let cfg = KickConfig::new(64, theta, 1.0).with_method(KickMethod::Series);
    let gue_phi = step_lengths(&phi, &cfg, n, 51);
    let gue_psi = step_lengths(&psi, &cfg, n, 52);
    let p_gue = ks_two_sample(&gue_phi, &gue_psi).p_value;
    assert!(p_gue > 0.01, "GUE isotropy KS p = {p_gue}");

    let mut r1 = stream(53, 0);
    let mut r2 = stream(54, 0);
    let goe_phi: Vec<f64> = (0..n)
        .map(|_| fs_distance(&phi, &goe_series_kick(&phi, theta, &mut r1)).unwrap())
        .collect();
    let goe_psi: Vec<f64> = (0..n)
        .map(|_| fs_distance(&psi, &goe_series_kick(&psi, theta, &mut r2)).unwrap())
        .collect();
    let p_goe = ks_two_sample(&goe_phi, &goe_psi).p_value;
    assert!(p_goe < 0.01, "GOE isotropy KS p = {p_goe}");
}
