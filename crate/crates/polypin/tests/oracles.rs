//! Ground-truth comparisons against exhaustive path enumeration and the
//! independent transfer-matrix route.

use polypin::free_energy::{Exponent, ModelParams, ScalingPoint};
use polypin::oracle;
use polypin::polymer::PolymerInstance;
use polypin::renewal::RenewalModel;
use polypin::rng::stream;
use polypin::srw::{hitting_law, InterfaceSpec};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;

fn params(t: u32, delta: f64) -> ModelParams {
    ModelParams::new(t, delta).unwrap()
}

/// Pearson chi-square with small expected cells pooled; returns
/// (statistic, degrees of freedom).
fn chi_square(observed: &HashMap<i64, u64>, expected: &HashMap<i64, f64>, n: u64) -> (f64, usize) {
    let nf = n as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut pool_obs = 0.0;
    let mut pool_exp = 0.0;
    for (key, &p) in expected {
        let e = p * nf;
        let o = observed.get(key).copied().unwrap_or(0) as f64;
        if e < 5.0 {
            pool_obs += o;
            pool_exp += e;
        } else {
            stat += (o - e) * (o - e) / e;
            cells += 1;
        }
    }
    if pool_exp > 0.0 {
        stat += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        cells += 1;
    }
    (stat, cells.saturating_sub(1))
}

fn chi_square_passes(observed: &HashMap<i64, u64>, expected: &HashMap<i64, f64>, n: u64) -> bool {
    let (stat, df) = chi_square(observed, expected, n);
    if df == 0 {
        return true;
    }
    let crit = ChiSquared::new(df as f64).unwrap().inverse_cdf(0.99);
    stat <= crit
}

#[test]
fn hitting_law_matches_enumeration() {
    for t in [2u32, 4, 8] {
        let (q0, q1) = oracle::enumerate_hitting(t, 16).unwrap();
        let law = hitting_law(InterfaceSpec::finite(t).unwrap(), 16).unwrap();
        for m in 1..=8 {
            assert!((law.q0_at(2 * m) - q0[m]).abs() < 1e-13, "t={t} n={}", 2 * m);
            assert!((law.q1_at(2 * m) - q1[m]).abs() < 1e-13, "t={t} n={}", 2 * m);
        }
    }
}

#[test]
fn infinite_law_matches_enumeration() {
    let (q0, _) = oracle::enumerate_hitting(1 << 20, 16).unwrap();
    let law = hitting_law(InterfaceSpec::Infinite, 16).unwrap();
    for m in 1..=8 {
        assert!((law.q_at(2 * m) - q0[m]).abs() < 1e-13);
    }
}

#[test]
fn partition_and_last_contact_match_enumeration() {
    for (t, delta, n) in [
        (4u32, 0.3f64, 16usize),
        (4, 0.5, 12),
        (8, 1.0, 16),
        (2, 0.7, 10),
        (6, 0.1, 14),
    ] {
        let e = oracle::enumerate_polymer(t, delta, n).unwrap();
        let inst = PolymerInstance::build(params(t, delta), n).unwrap();
        let z = inst.partition_function().z;
        assert!(((z - e.z) / e.z).abs() < 1e-12, "Z mismatch t={t} d={delta} n={n}");
        let lc = inst.last_contact_law();
        for m in 0..=n / 2 {
            assert!(
                (lc[m] - e.last_contact[m]).abs() < 1e-12,
                "last-contact mismatch at r={} (t={t} d={delta} n={n})",
                2 * m
            );
        }
    }
}

#[test]
fn exact_statistics_match_enumeration() {
    for (t, delta, n) in [(4u32, 0.3f64, 14usize), (4, 1.0, 12), (8, 0.5, 16), (2, 0.7, 10)] {
        let e = oracle::enumerate_polymer(t, delta, n).unwrap();
        let inst = PolymerInstance::build(params(t, delta), n).unwrap();
        assert!((inst.expected_switches() - e.e_m).abs() < 1e-12, "E[m] t={t} d={delta}");
        assert!(
            (inst.prob_any_switch().unwrap() - (1.0 - e.m_law[0])).abs() < 1e-12,
            "P(m>0) t={t} d={delta}"
        );
        assert!(
            (inst.variance_endpoint() - e.e_s2).abs() < 1e-10,
            "Var t={t} d={delta}: {} vs {}",
            inst.variance_endpoint(),
            e.e_s2
        );
    }
}

#[test]
fn tilt_identity_against_path_enumeration() {
    // 4096-path oracle at T=4, delta=0.3, k=12
    let model = RenewalModel::build(params(4, 0.3), 16).unwrap();
    for k in [4usize, 8, 12] {
        let lhs = oracle::enumerate_tilt(4, 0.3, k).unwrap();
        let rhs = (model.fe.phi * k as f64).exp() * model.u_at(k);
        assert!(
            ((lhs - rhs) / rhs).abs() < 1e-10,
            "k={k}: {lhs} vs {rhs}"
        );
    }
    assert!(model.tilt_identity_check(12).unwrap() <= 1e-10);
}

#[test]
fn sampled_skeletons_match_enumeration_at_zero_delta() {
    // delta = 0 makes the polymer the plain walk; skeleton cells within
    // 4 sigma of the enumerated law
    let (t, n, samples) = (4u32, 10usize, 100_000u32);
    let e = oracle::enumerate_polymer(t, 0.0, n).unwrap();
    let inst = PolymerInstance::build(params(t, 0.0), n).unwrap();
    let mut counts: HashMap<(u32, i64), u64> = HashMap::new();
    for i in 0..samples {
        let mut rng = stream(2024, i as u64);
        let sk = inst.sample_skeleton(&mut rng);
        let level: i64 = sk.signs.iter().map(|&s| s as i64).sum();
        *counts.entry((sk.last_contact, level)).or_insert(0) += 1;
    }
    let nf = samples as f64;
    for (cell, &p) in &e.joint_skeleton {
        let obs = counts.get(cell).copied().unwrap_or(0) as f64 / nf;
        let sigma = (p * (1.0 - p) / nf).sqrt();
        assert!(
            (obs - p).abs() <= 4.0 * sigma + 1e-9,
            "cell {cell:?}: obs {obs} vs {p} (sigma {sigma})"
        );
    }
}

#[test]
fn sampled_endpoint_law_matches_enumeration() {
    // (N=12, T=4, delta=0.5): S_N law within 4 sigma per height and
    // chi-square at 1%
    let (t, delta, n, samples) = (4u32, 0.5f64, 12usize, 100_000u32);
    let e = oracle::enumerate_polymer(t, delta, n).unwrap();
    let inst = PolymerInstance::build(params(t, delta), n).unwrap();
    let stats = inst.run_samples(samples, 77);
    let mut counts: HashMap<i64, u64> = HashMap::new();
    for s in &stats {
        *counts.entry(s.s_n).or_insert(0) += 1;
    }
    let nf = samples as f64;
    for (&h, &p) in &e.endpoint {
        let obs = counts.get(&h).copied().unwrap_or(0) as f64 / nf;
        let sigma = (p * (1.0 - p) / nf).sqrt();
        assert!(
            (obs - p).abs() <= 4.0 * sigma + 1e-9,
            "height {h}: obs {obs} vs {p}"
        );
    }
    assert!(chi_square_passes(&counts, &e.endpoint, samples as u64));
}

#[test]
fn endpoint_law_is_binomial_at_zero_delta() {
    // zero penalty: S_N is the plain binomial walk
    let (t, n, samples) = (6u32, 12usize, 100_000u32);
    let inst = PolymerInstance::build(params(t, 0.0), n).unwrap();
    let stats = inst.run_samples(samples, 3);
    let mut counts: HashMap<i64, u64> = HashMap::new();
    for s in &stats {
        *counts.entry(s.s_n).or_insert(0) += 1;
    }
    let ln_choose = |n: u64, k: u64| {
        use statrs::function::gamma::ln_gamma;
        ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64)
    };
    let mut expected = HashMap::new();
    for k in 0..=n {
        let h = 2 * k as i64 - n as i64;
        let p = ln_choose(n as u64, k as u64);
        expected.insert(h, (p - (n as f64) * std::f64::consts::LN_2).exp());
    }
    assert!(chi_square_passes(&counts, &expected, samples as u64));
}

#[test]
fn transfer_matrix_cross_checks_partition() {
    for (t, delta, n) in [(4u32, 0.3f64, 2048usize), (40, 0.8, 4096), (200, 0.2, 10_000)] {
        let inst = PolymerInstance::build(params(t, delta), n).unwrap();
        let tm = PolymerInstance::transfer_log_z(params(t, delta), n).unwrap();
        assert!(
            (inst.partition_function().log_z - tm).abs() < 1e-10,
            "t={t} delta={delta} n={n}"
        );
    }
}

#[test]
fn experiment_at_zero_beta_matches_srw() {
    // measure identity: delta = 0 experiment statistics coincide with the
    // enumerated plain-walk values within MC error
    let point = ScalingPoint::new(Exponent::Float(0.4), Exponent::Float(0.3), 0.0, 14).unwrap();
    assert_eq!(point.delta_n(), 0.0);
    let report = polypin::run_experiment(&point, 50_000, 12).unwrap();
    let e = oracle::enumerate_polymer(point.t_n(), 0.0, 14).unwrap();
    let mc = report.mc.unwrap();
    assert!((mc.visited_fraction - (1.0 - e.m_law[0])).abs() < 0.01);
    assert!((mc.mean_switches - e.e_m).abs() < 0.02);
    assert!((mc.var_endpoint - (e.e_s2)).abs() / e.e_s2 < 0.03);
    assert!((report.exact.expected_switches - e.e_m).abs() < 1e-12);
}
