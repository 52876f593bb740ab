//! Report-level integration checks: partition growth along scaling rays,
//! asymptotic phi branches on rays, and profile-band stability when the
//! spacing doubles along a ray.

use polypin::free_energy::{Exponent, ModelParams, ScalingPoint};
use polypin::regime::partition_asymptotics;
use polypin::renewal::{ProfileBranch, RenewalModel};

#[test]
fn partition_band_localized_ray() {
    // a > b: Z e^{-N phi} max(1, delta min(sqrt N, T)) stays within a
    // factor 4 across two decades
    let rows = partition_asymptotics(
        Exponent::Float(0.4),
        Exponent::Float(0.1),
        1.0,
        &[10_000, 100_000, 1_000_000],
    )
    .unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let band = ratios.iter().cloned().fold(f64::MIN, f64::max)
        / ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(band <= 4.0, "band {band}: {ratios:?}");
}

#[test]
fn partition_band_wide_interface_ray() {
    // a < b: Z e^{-N phi} itself is of constant order
    let rows = partition_asymptotics(
        Exponent::Float(0.3),
        Exponent::Float(0.5),
        1.0,
        &[10_000, 100_000],
    )
    .unwrap();
    let band = rows[0].ratio.max(rows[1].ratio) / rows[0].ratio.min(rows[1].ratio);
    assert!(band <= 1.5, "{rows:?}");
}

#[test]
fn partition_tends_to_one_deep_in_srw_region() {
    // a = b = 0.6: Z itself tends to 1
    let rows = partition_asymptotics(
        Exponent::Float(0.6),
        Exponent::Float(0.6),
        1.0,
        &[10_000, 100_000],
    )
    .unwrap();
    let d0 = (rows[0].log_z.exp() - 1.0).abs();
    let d1 = (rows[1].log_z.exp() - 1.0).abs();
    assert!(d1 < d0, "|Z-1| not shrinking: {d0} -> {d1}");
    // |Z-1| decays like N^{-0.1} on this ray, so the approach is slow
    assert!(d1 < 0.3, "|Z-1| = {d1}");
}

#[test]
fn profile_bands_stable_when_spacing_doubles_on_a_ray() {
    // fixed ray (a, b) = (0.4, 0.1): doubling T means N -> N 2^{1/a},
    // delta -> delta 2^{-b/a}; the per-range bands move by less than a
    // factor 2
    let (t1, d1) = (60u32, 0.12f64);
    let (t2, d2) = (120u32, 0.12 * 2f64.powf(-0.1 / 0.4));
    let m1 = RenewalModel::build(ModelParams::new(t1, d1).unwrap(), 30_000).unwrap();
    let m2 = RenewalModel::build(ModelParams::new(t2, d2).unwrap(), 120_000).unwrap();
    let r1 = m1.profile_report(ProfileBranch::ThreeRange).unwrap();
    let r2 = m2.profile_report(ProfileBranch::ThreeRange).unwrap();
    for (b1, b2) in r1.bands.iter().zip(&r2.bands) {
        assert!(b1.covered && b2.covered);
        let sup_ratio = b2.sup / b1.sup;
        let inf_ratio = b2.inf / b1.inf;
        assert!(
            (0.5..=2.0).contains(&sup_ratio) && (0.5..=2.0).contains(&inf_ratio),
            "band moved: sup {} -> {}, inf {} -> {}",
            b1.sup,
            b2.sup,
            b1.inf,
            b2.inf
        );
    }
}

#[test]
fn wide_interface_profile_band_is_finite() {
    // Tdelta <= 0.1: u against 1/min(sqrt n, T)
    let model = RenewalModel::build(ModelParams::new(60, 0.001).unwrap(), 30_000).unwrap();
    let report = model.profile_report(ProfileBranch::WideInterface).unwrap();
    for band in &report.bands {
        assert!(band.covered && band.sup.is_finite() && band.inf > 0.0);
        assert!(band.sup / band.inf < 12.0, "band {band:?}");
    }
}

#[test]
fn uncovered_ranges_are_flagged_not_skipped() {
    // horizon below T^2: the stationary range must be marked uncovered
    let model = RenewalModel::build(ModelParams::new(200, 0.05).unwrap(), 4_096).unwrap();
    let report = model.profile_report(ProfileBranch::ThreeRange).unwrap();
    assert!(report.bands[0].covered);
    assert!(!report.bands[2].covered);
    assert!(report.bands[2].sup.is_nan());
}

#[test]
fn scaling_point_parameters_follow_the_ray() {
    let p = ScalingPoint::new(Exponent::Float(0.4), Exponent::Float(0.1), 2.0, 65_536).unwrap();
    assert_eq!(p.t_n() % 2, 0);
    let expect = 2.0 * 65_536f64.powf(-0.1);
    assert!((p.delta_n() - expect).abs() < 1e-12);
}
