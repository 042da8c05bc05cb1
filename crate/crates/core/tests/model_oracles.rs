mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use rand::Rng;
use spce::estimators::estimate_correlation;
use spce::geometry::{angle_between, sample_cap, sample_sphere, CapSpec, Direction};
use spce::models::contextual::{ContextualModel, RejectionModel};
use spce::models::lrhv::{quadrature_correlations, sphere_grid};
use spce::models::{
    lrhv_correlation, qt_correlation, singlet_joint_probs, smeared_correlation,
    smeared_correlation_closed_form, BellLinearModel, ModelId, Outcome,
};
use spce::rng::seeded;
use spce::simulate::{run_experiment, Analyzer, ExperimentConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn analyzer(deg: f64, eps: f64) -> Analyzer {
    Analyzer {
        cap: CapSpec::new(Direction::in_xz_plane(deg.to_radians()), eps).unwrap(),
        setting: 1,
    }
}

/// Kolmogorov–Smirnov distance of a sample from the uniform law on [0, 1].
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

// 1% critical value of sqrt(n)·D.
const KS_CRIT: f64 = 1.628;

#[test]
fn singlet_correlation_matches_cosine() {
    let mut rng = seeded(1);
    for _ in 0..1000 {
        let (a, b) = (sample_sphere(&mut rng), sample_sphere(&mut rng));
        let want = -angle_between(&a, &b).cos();
        assert!((qt_correlation(&a, &b) - want).abs() < 1e-12);
        assert_eq!(qt_correlation(&a, &b), qt_correlation(&b, &a));
        let p = singlet_joint_probs(angle_between(&a, &b));
        assert!((p.total() - 1.0).abs() < 1e-15);
        assert!((p.marginal_a_up() - 0.5).abs() < 1e-15 && (p.marginal_b_up() - 0.5).abs() < 1e-15);
        assert!((p.correlation() - want).abs() < 1e-12);
    }
}

#[test]
fn equal_settings_are_perfectly_anticorrelated() {
    let cfg = ExperimentConfig::new(ModelId::QtIdeal, analyzer(30.0, 0.0), analyzer(30.0, 0.0), 10_000, 5);
    let pairs = run_experiment(&cfg).unwrap();
    assert_eq!(pairs.len(), 10_000);
    assert!(pairs.iter().all(|p| {
        let (a, b) = p.coincidence().unwrap();
        a != b
    }));
}

#[test]
fn qt_ideal_cell_frequencies_fit_joint_table() {
    let theta = FRAC_PI_3;
    let n = 200_000;
    let cfg = ExperimentConfig::new(ModelId::QtIdeal, analyzer(0.0, 0.0), analyzer(60.0, 0.0), n, 9);
    let est = estimate_correlation(&run_experiment(&cfg).unwrap()).unwrap();
    let p = singlet_joint_probs(theta);
    let observed = [est.counts.n_pp, est.counts.n_pm, est.counts.n_mp, est.counts.n_mm];
    let expected = [p.p_pp, p.p_pm, p.p_mp, p.p_mm].map(|q| q * n as f64);
    let chi2: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, e)| (o as f64 - e).powi(2) / e)
        .sum();
    let pval = ChiSquared::new(3.0).unwrap().sf(chi2);
    assert!(pval > 0.001, "χ² = {chi2}, p = {pval}");
}

#[test]
fn efficiency_thinning() {
    let n = 1_000_000;
    let mut cfg = ExperimentConfig::new(ModelId::QtIdeal, analyzer(0.0, 0.0), analyzer(90.0, 0.0), n, 2);
    let ideal = run_experiment(&cfg).unwrap();
    assert!(ideal.iter().all(|p| p.a.is_detected() && p.b.is_detected()));
    cfg.efficiency_a = 0.5;
    cfg.efficiency_b = 0.5;
    let pairs = run_experiment(&cfg).unwrap();
    let both = pairs.iter().filter(|p| p.coincidence().is_some()).count() as f64 / n as f64;
    let sigma = (0.25 * 0.75 / n as f64).sqrt();
    assert!((both - 0.25).abs() < 4.0 * sigma, "{both}");
}

#[test]
fn smeared_closed_form_matches_quadrature() {
    for (ea, eb, theta) in [
        (0.01, 0.01, 0.0),
        (0.1, 0.01, FRAC_PI_4),
        (0.5, 0.3, 1.0),
        (1.0, 0.0, FRAC_PI_2),
        (2.0, 0.2, 2.5),
    ] {
        let a = CapSpec::new(Direction::Z, ea).unwrap();
        let b = CapSpec::new(Direction::in_xz_plane(theta), eb).unwrap();
        let oracle = common::smeared_correlation_quadrature(ea, eb, theta, 12);
        let closed = smeared_correlation_closed_form(&a, &b);
        assert!((closed - oracle).abs() < 1e-10, "{ea} {eb} {theta}: {closed} vs {oracle}");
    }
}

#[test]
fn smeared_monte_carlo_matches_quadrature() {
    let mut rng = seeded(3);
    for (ea, eb, theta) in [(0.01, 0.01, 0.0), (0.2, 0.05, 1.2), (0.6, 0.6, PI)] {
        let a = CapSpec::new(Direction::Z, ea).unwrap();
        let b = CapSpec::new(Direction::in_xz_plane(theta), eb).unwrap();
        let est = smeared_correlation(&a, &b, 200_000, &mut rng).unwrap();
        let oracle = common::smeared_correlation_quadrature(ea, eb, theta, 12);
        assert!(
            (est.estimate - oracle).abs() <= 4.0 * est.stderr,
            "{} ± {} vs {oracle}",
            est.estimate,
            est.stderr
        );
    }
    let sharp = CapSpec::sharp(Direction::Z);
    let exact = smeared_correlation(&sharp, &sharp, 0, &mut rng).unwrap();
    assert_eq!((exact.estimate, exact.stderr), (-1.0, 0.0));
    let soft = CapSpec::new(Direction::Z, 0.1).unwrap();
    assert!(smeared_correlation(&soft, &soft, 999, &mut rng).is_err());
}

#[test]
fn qt_smeared_pairs_match_quadrature() {
    let n = 400_000;
    let cfg = ExperimentConfig::new(ModelId::QtSmeared, analyzer(0.0, 0.3), analyzer(40.0, 0.1), n, 8);
    let est = estimate_correlation(&run_experiment(&cfg).unwrap()).unwrap();
    let oracle = common::smeared_correlation_quadrature(0.3, 0.1, 40f64.to_radians(), 12);
    assert!((est.e_hat - oracle).abs() <= 4.0 * est.stderr, "{} vs {oracle}", est.e_hat);
}

#[test]
fn cap_sampler_matches_rejection_sampling() {
    let center = Direction::from_spherical(1.1, 0.4);
    let eps = 0.3;
    let cap = CapSpec::new(center, eps).unwrap();
    let mut rng = seeded(21);

    // Rejection oracle: uniform sphere points that land in the cap.
    let mut accepted = Vec::new();
    let mut tries = 0u64;
    while accepted.len() < 20_000 {
        let d = sample_sphere(&mut rng);
        tries += 1;
        if 1.0 - d.dot(&center) <= eps {
            accepted.push(d);
        }
    }
    let frac = accepted.len() as f64 / tries as f64;
    let sigma = (eps / 2.0 * (1.0 - eps / 2.0) / tries as f64).sqrt();
    assert!((frac - cap.solid_angle() / (4.0 * PI)).abs() < 4.0 * sigma);

    let sampled: Vec<Direction> = (0..20_000).map(|_| sample_cap(&cap, &mut rng)).collect();
    assert!(sampled.iter().all(|d| cap.contains(d) && d.is_unit()));

    // Polar offset: 1 - cos is uniform on [0, ε] for both.
    for pts in [&accepted, &sampled] {
        let t: Vec<f64> = pts.iter().map(|d| (1.0 - d.dot(&center)) / eps).collect();
        let n = t.len() as f64;
        assert!(ks_uniform(t) * n.sqrt() < KS_CRIT);
    }
    // Azimuth about the center is uniform.
    let phi: Vec<f64> = sampled
        .iter()
        .map(|d| d.azimuth_about(&center).rem_euclid(2.0 * PI) / (2.0 * PI))
        .collect();
    assert!(ks_uniform(phi) * (20_000f64).sqrt() < KS_CRIT);

    let mean = |pts: &[Direction]| pts.iter().map(|d| d.dot(&center)).sum::<f64>() / pts.len() as f64;
    let sd = eps / 12f64.sqrt();
    assert!((mean(&sampled) - mean(&accepted)).abs() < 4.0 * sd * (2.0 / 20_000.0f64).sqrt());
    assert!((mean(&sampled) - cap.mean_projection()).abs() < 4.0 * sd / (20_000f64).sqrt());
}

#[test]
fn lrhv_quadrature_matches_closed_form() {
    let angles = [0.0, 0.3, FRAC_PI_4, 1.0, FRAC_PI_2, 2.0, 3.0 * FRAC_PI_4, PI];
    let settings: Vec<(Direction, Direction)> = angles
        .iter()
        .map(|&t| (Direction::in_xz_plane(0.2), Direction::in_xz_plane(0.2 + t)))
        .collect();
    let quad = quadrature_correlations(&BellLinearModel, &settings, 400);
    for (t, q) in angles.iter().zip(quad) {
        let closed = BellLinearModel::correlation_closed_form(*t);
        assert!((q - closed).abs() < 2e-3, "θ = {t}: {q} vs {closed}");
    }
    let w: f64 = sphere_grid(20, 40).iter().map(|(_, w)| w).sum();
    assert!((w - 1.0).abs() < 1e-12);
}

#[test]
fn lrhv_monte_carlo_matches_closed_form() {
    let mut rng = seeded(4);
    for t in [0.4, 1.3, 2.2] {
        let est = lrhv_correlation(&BellLinearModel, &Direction::Z, &Direction::in_xz_plane(t), 200_000, &mut rng).unwrap();
        let closed = BellLinearModel::correlation_closed_form(t);
        assert!((est.estimate - closed).abs() <= 4.0 * est.stderr.max(1e-12));
    }
}

#[test]
fn rejection_model_reproduces_singlet_on_coincidences() {
    let n = 1_000_000;
    let cfg = ExperimentConfig::new(ModelId::CtxRejection, analyzer(0.0, 0.0), analyzer(45.0, 0.0), n, 12);
    let pairs = run_experiment(&cfg).unwrap();
    let est = estimate_correlation(&pairs).unwrap();
    let want = -FRAC_PI_4.cos();
    assert!((est.e_hat - want).abs() <= 4.0 * est.stderr, "{} vs {want}", est.e_hat);
    // A detects with probability E|λ·a| = 1/2; B always clicks.
    let det_a = pairs.iter().filter(|p| p.a.is_detected()).count() as f64 / n as f64;
    assert!((det_a - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
    assert!(pairs.iter().all(|p| p.b.is_detected()));

    let mut rng = seeded(0);
    let caps = (CapSpec::sharp(Direction::Z), CapSpec::sharp(Direction::X));
    let (l1, _) = RejectionModel.sample_hidden_pair(&mut rng, (&caps.0, &caps.1));
    assert!(matches!(RejectionModel.response_b(&l1, &Direction::Z), Outcome::Click(_)));
}

#[test]
fn setting_lambda_model_reproduces_singlet() {
    for deg in [0.0, 30.0, 45.0, 120.0] {
        let cfg = ExperimentConfig::new(ModelId::CtxSettingLambda, analyzer(10.0, 0.0), analyzer(10.0 + deg, 0.0), 200_000, 6);
        let est = estimate_correlation(&run_experiment(&cfg).unwrap()).unwrap();
        let want = -f64::to_radians(deg).cos();
        assert!((est.e_hat - want).abs() <= 4.0 * est.stderr.max(1e-12), "{deg}: {}", est.e_hat);
    }
}

#[test]
fn qt_ideal_estimates_match_joint_table() {
    let mut rng = seeded(99);
    for _ in 0..5 {
        let theta: f64 = rng.random_range(0.0..PI);
        let cfg = ExperimentConfig::new(ModelId::QtIdeal, analyzer(0.0, 0.0), analyzer(theta.to_degrees(), 0.0), 100_000, rng.random());
        let est = estimate_correlation(&run_experiment(&cfg).unwrap()).unwrap();
        let want = singlet_joint_probs(theta).correlation();
        assert!((est.e_hat - want).abs() <= 4.0 * est.stderr, "{theta}");
    }
}
