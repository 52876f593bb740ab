//! Phase-diagram classification of the scaling exponents, per-regime
//! predictions, and the experiment runner that measures each regime's
//! statement at desk scale with exact side-computations next to the
//! Monte Carlo estimates.

use crate::error::{Error, Result};
use crate::free_energy::{kappa, renewal_moments, Exponent, MomentMethod, ScalingPoint};
use crate::polymer::PolymerInstance;
use crate::srw::{hitting_law, visit_prob_sequence, InterfaceSpec};
use crate::util::{kahan_sum, normal_cdf};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeLabel {
    Th1Localized,
    R1Subdiffusive,
    R2Diffusive,
    R3Srw,
    Bc1Diagonal,
    Bc2Halfline,
    Bc3Critical,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeLabel::Th1Localized => "TH1_LOCALIZED",
            RegimeLabel::R1Subdiffusive => "R1_SUBDIFFUSIVE",
            RegimeLabel::R2Diffusive => "R2_DIFFUSIVE",
            RegimeLabel::R3Srw => "R3_SRW",
            RegimeLabel::Bc1Diagonal => "BC1_DIAGONAL",
            RegimeLabel::Bc2Halfline => "BC2_HALFLINE",
            RegimeLabel::Bc3Critical => "BC3_CRITICAL",
        };
        f.write_str(s)
    }
}

/// Sub-case tags for the localized family (reported, never asserted on).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Th1Subcase {
    /// `1/3 < a < 1/2`, `3a - 1 > b`
    Wedge,
    /// `a >= 1/2`, `b < 1/2`
    WeaklyDepinned,
    /// `a < 1/2`, `b >= 1/2` (classified diffusive per the diagram; the
    /// localized last-contact statement also applies here)
    RedClause,
}

/// `3a - 1` vs `b`, exact when both exponents are rational.
fn cmp_critical(a: &Exponent, b: &Exponent) -> Ordering {
    match (*a, *b) {
        (Exponent::Ratio(p1, q1), Exponent::Ratio(p2, q2)) => {
            let lhs = (3 * p1 as i128 - q1 as i128) * q2 as i128;
            let rhs = p2 as i128 * q1 as i128;
            lhs.cmp(&rhs)
        }
        _ => {
            let x = 3.0 * a.value() - 1.0;
            let y = b.value();
            if (x - y).abs() <= crate::free_energy::EXPONENT_TIE_TOL {
                Ordering::Equal
            } else if x < y {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
    }
}

/// Total classification of `(a, b)`, borders before open regions.
pub fn classify(a: Exponent, b: Exponent) -> Result<RegimeLabel> {
    if !(a.value() > 0.0) || !(b.value() >= 0.0) {
        return Err(Error::Param(format!(
            "classification needs a > 0 and b >= 0, got ({}, {})",
            a.value(),
            b.value()
        )));
    }
    let half = Exponent::Ratio(1, 2);
    let ab = a.cmp_with_tol(&b);
    let a_half = a.cmp_with_tol(&half);
    let b_half = b.cmp_with_tol(&half);
    let crit = cmp_critical(&a, &b);
    // borders first
    if ab == Ordering::Equal && b_half != Ordering::Greater {
        return Ok(RegimeLabel::Bc1Diagonal);
    }
    if b_half == Ordering::Equal && a_half == Ordering::Greater {
        return Ok(RegimeLabel::Bc2Halfline);
    }
    if b_half == Ordering::Less && crit == Ordering::Equal {
        return Ok(RegimeLabel::Bc3Critical);
    }
    Ok(match ab {
        // above the diagonal
        Ordering::Less => {
            if a_half == Ordering::Less {
                RegimeLabel::R2Diffusive
            } else {
                RegimeLabel::R3Srw
            }
        }
        // on the diagonal beyond (1/2, 1/2)
        Ordering::Equal => RegimeLabel::R3Srw,
        // below the diagonal
        Ordering::Greater => {
            if a_half == Ordering::Less {
                if crit == Ordering::Less {
                    RegimeLabel::R1Subdiffusive
                } else {
                    RegimeLabel::Th1Localized
                }
            } else if b_half == Ordering::Less {
                RegimeLabel::Th1Localized
            } else {
                RegimeLabel::R3Srw
            }
        }
    })
}

/// Tag for points where a Theorem-1-style statement applies.
pub fn th1_tag(a: Exponent, b: Exponent) -> Result<Option<Th1Subcase>> {
    let label = classify(a, b)?;
    let half = Exponent::Ratio(1, 2);
    let a_half = a.cmp_with_tol(&half);
    let b_half = b.cmp_with_tol(&half);
    Ok(match label {
        RegimeLabel::Th1Localized => {
            if a_half == Ordering::Less {
                Some(Th1Subcase::Wedge)
            } else {
                Some(Th1Subcase::WeaklyDepinned)
            }
        }
        RegimeLabel::R2Diffusive if b_half != Ordering::Less => Some(Th1Subcase::RedClause),
        _ => None,
    })
}

/// Predicted observable scales at one scaling point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Prediction {
    pub label: RegimeLabel,
    /// `v_N` with its constant folded in
    pub endpoint_scale: f64,
    /// the explicit constant when the prediction carries one
    pub endpoint_constant: Option<f64>,
    pub last_contact_scale: f64,
    /// contact-count cell of the summary table
    pub contacts_scale: f64,
    /// `N / E[tau_1]` from the solved moments (reported alongside; the two
    /// disagree by design in the sub-diffusive columns)
    pub contacts_scale_renewal: f64,
}

pub fn predicted_orders(point: &ScalingPoint) -> Result<Prediction> {
    let label = classify(point.a, point.b)?;
    let n = point.n as f64;
    let t = point.t_n() as f64;
    let delta = point.delta_n();
    let sqrt_n = n.sqrt();
    let (endpoint_scale, endpoint_constant, last_contact_scale, contacts_scale) = match label {
        RegimeLabel::Th1Localized => {
            let v = if point.b.cmp_with_tol(&Exponent::Ratio(1, 2)) == Ordering::Less {
                t
            } else {
                sqrt_n
            };
            (v, None, 1.0 / (delta * delta), 1.0 / delta)
        }
        RegimeLabel::R1Subdiffusive => (
            std::f64::consts::PI * (n / (t * delta)).sqrt(),
            Some(std::f64::consts::PI),
            n,
            t * t * t * delta * delta,
        ),
        RegimeLabel::R2Diffusive => (sqrt_n, None, n, sqrt_n.min(n / t)),
        RegimeLabel::R3Srw | RegimeLabel::Bc2Halfline => (sqrt_n, None, n, sqrt_n),
        RegimeLabel::Bc1Diagonal => {
            let k = kappa(point.beta)?;
            (k * sqrt_n, Some(k), n, sqrt_n.min(n / t))
        }
        RegimeLabel::Bc3Critical => (t, None, n, t * t * t * delta * delta),
    };
    let contacts_scale_renewal = if delta > 0.0 {
        let m = renewal_moments(point.params()?, MomentMethod::ClosedForm)?;
        n / m.mean_tau
    } else {
        f64::INFINITY
    };
    Ok(Prediction {
        label,
        endpoint_scale,
        endpoint_constant,
        last_contact_scale,
        contacts_scale,
        contacts_scale_renewal,
    })
}

/// Exact probability that the plain walk touches an interface in
/// `[(1-eps) N, N]`, for each `eps`; shares one DP across the grid.
pub fn srw_contrast_multi(t: u32, n: usize, eps_grid: &[f64]) -> Result<Vec<f64>> {
    if n % 2 != 0 || n < 2 {
        return Err(Error::Param("N must be even and >= 2".into()));
    }
    for &eps in eps_grid {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::Param(format!("eps must be in (0, 1], got {eps}")));
        }
    }
    let law = hitting_law(InterfaceSpec::finite(t)?, n)?;
    let visits = visit_prob_sequence(t, n);
    eps_grid
        .iter()
        .map(|&eps| {
            let w = ((1.0 - eps) * n as f64).ceil() as usize;
            let w = w + w % 2;
            if w == 0 {
                return Ok(1.0);
            }
            let no_contact = kahan_sum(
                (0..=(w - 2) / 2).map(|m| visits[m] * law.tail_at(n - 2 * m)),
            );
            Ok(1.0 - no_contact.min(1.0))
        })
        .collect()
}

/// Exact probability that the plain walk touches an interface in
/// `[(1-eps) N, N]`.
pub fn srw_contrast(t: u32, n: usize, eps: f64) -> Result<f64> {
    Ok(srw_contrast_multi(t, n, &[eps])?[0])
}

/// Exact expected number of interface contacts of the plain walk by time N.
pub fn srw_expected_contacts(t: u32, n: usize) -> f64 {
    let visits = visit_prob_sequence(t, n);
    kahan_sum(visits[1..].iter().copied())
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionRow {
    pub name: String,
    pub statistic: f64,
    pub op: String,
    pub threshold: f64,
    pub threshold_hi: Option<f64>,
    pub pass: bool,
}

impl CriterionRow {
    fn le(name: &str, statistic: f64, threshold: f64) -> Self {
        CriterionRow {
            name: name.into(),
            statistic,
            op: "<=".into(),
            threshold,
            threshold_hi: None,
            pass: statistic <= threshold,
        }
    }
    fn ge(name: &str, statistic: f64, threshold: f64) -> Self {
        CriterionRow {
            name: name.into(),
            statistic,
            op: ">=".into(),
            threshold,
            threshold_hi: None,
            pass: statistic >= threshold,
        }
    }
    fn band(name: &str, statistic: f64, lo: f64, hi: f64) -> Self {
        CriterionRow {
            name: name.into(),
            statistic,
            op: "in".into(),
            threshold: lo,
            threshold_hi: Some(hi),
            pass: statistic >= lo && statistic <= hi,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactStats {
    pub log_z: f64,
    pub z_minus_one: f64,
    pub expected_switches: f64,
    pub prob_any_switch: f64,
    pub variance_endpoint: f64,
    pub expected_contacts: f64,
    pub srw_expected_contacts: f64,
    /// `P(tau_L <= M / delta^2)` with M = 20
    pub prob_last_contact_le_window: Option<f64>,
    /// `P(nu/delta^2 <= tau_L <= M/delta^2)` with nu = 0.05
    pub prob_last_contact_in_window: Option<f64>,
    /// `(eps, P(contact in [(1-eps)N, N]))` under the polymer
    pub window_contact_probs: Vec<(f64, f64)>,
    /// `(eps, exact SRW probability of the same event)`
    pub srw_contrast: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct McStats {
    pub mean_endpoint: f64,
    pub var_endpoint: f64,
    pub var_ratio: f64,
    pub tail_3sigma: f64,
    pub visited_fraction: f64,
    pub frac_last_contact_le_window: f64,
    pub frac_last_contact_in_window: f64,
    pub mean_switches: f64,
    pub m_histogram: Vec<u64>,
    /// empirical `P(m >= k+1)/P(m >= k)` for k = 1, 2, 3
    pub m_tail_ratios: Vec<f64>,
    /// `(eps, fraction of samples with a contact in [(1-eps)N, N])`
    pub window_fractions: Vec<(f64, f64)>,
    /// empirical band constant against the standard normal over a fixed
    /// cell grid of `S_N / v_N`
    pub normal_band_c: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub n: u64,
    pub t_n: u32,
    pub delta_n: f64,
    pub label: RegimeLabel,
    pub th1_tag: Option<Th1Subcase>,
    pub n_samples: u32,
    pub seed: u64,
    pub prediction: Prediction,
    pub exact: ExactStats,
    pub mc: Option<McStats>,
    pub criteria: Vec<CriterionRow>,
}

impl ExperimentReport {
    /// One row per criterion: `name,statistic,threshold,verdict`.
    pub fn criteria_csv(&self) -> String {
        let mut out = String::from("name,statistic,threshold,verdict\n");
        for c in &self.criteria {
            let threshold = match c.threshold_hi {
                Some(hi) => format!("{} {}..{}", c.op, c.threshold, hi),
                None => format!("{} {}", c.op, c.threshold),
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                c.name,
                c.statistic,
                threshold,
                if c.pass { "pass" } else { "fail" }
            ));
        }
        out
    }
}

const WINDOW_NU: f64 = 0.05;
const WINDOW_M: f64 = 20.0;
const EPS_GRID: [f64; 3] = [0.05, 0.1, 0.2];
const OPS_BUDGET: u128 = 100_000_000_000;

fn estimate_ops(n: usize, t: u32, n_samples: u32) -> u128 {
    let half = (n / 2) as u128;
    let span = (2 * t as usize).min(n) as u128;
    let build = half * span; // hitting DP
    let u_cost = (half.max(2).ilog2() as u128) * half * 40; // FFT inversions
    let sweep = if n_samples > 0 { half * span } else { 0 };
    let sampling = n_samples as u128 * (half / 2 + t as u128);
    build + u_cost + sweep + sampling
}

/// Run the per-regime measurement at one scaling point.
///
/// `n_samples = 0` skips sampling and reports exact statistics only.
/// Refuses runs whose estimated cost exceeds the desk-scale budget.
pub fn run_experiment(point: &ScalingPoint, n_samples: u32, seed: u64) -> Result<ExperimentReport> {
    let label = classify(point.a, point.b)?;
    let tag = th1_tag(point.a, point.b)?;
    let t = point.t_n();
    let delta = point.delta_n();
    let n = point.n as usize;
    if point.n > 2_000_000 {
        return Err(Error::Param(format!("desk-scale guardrail: N <= 2e6, got {}", point.n)));
    }
    if n_samples > 100_000 {
        return Err(Error::Param(format!(
            "desk-scale guardrail: at most 1e5 samples per run, got {n_samples}"
        )));
    }
    if t > 4096 || (n_samples > 0 && t > 2000) {
        return Err(Error::Param(format!(
            "desk-scale guardrail: T_N = {t} too large for this run (2000 with sampling, 4096 exact)"
        )));
    }
    let estimated_ops = estimate_ops(n, t, n_samples);
    if estimated_ops > OPS_BUDGET {
        return Err(Error::Infeasible { estimated_ops, budget: OPS_BUDGET });
    }

    let params = point.params()?;
    let inst = PolymerInstance::build(params, n)?;
    let prediction = predicted_orders(point)?;
    let v = prediction.endpoint_scale;

    let localized_windows = delta > 0.0
        && (label == RegimeLabel::Th1Localized || tag == Some(Th1Subcase::RedClause));
    let (win_lo, win_hi) = if delta > 0.0 {
        (WINDOW_NU / (delta * delta), WINDOW_M / (delta * delta))
    } else {
        (0.0, f64::INFINITY)
    };

    let mut window_contact_probs = Vec::new();
    let mut contrast = Vec::new();
    if label == RegimeLabel::Bc3Critical {
        let exact_contrast = srw_contrast_multi(t, n, &EPS_GRID)?;
        for (&eps, &c) in EPS_GRID.iter().zip(&exact_contrast) {
            let w = ((1.0 - eps) * n as f64).ceil() as usize;
            window_contact_probs.push((eps, inst.prob_contact_window(w)));
            contrast.push((eps, c));
        }
    }
    let log_z = inst.partition_function().log_z;
    let exact = ExactStats {
        log_z,
        z_minus_one: log_z.exp() - 1.0,
        expected_switches: inst.expected_switches(),
        prob_any_switch: inst.prob_any_switch()?,
        variance_endpoint: inst.variance_endpoint(),
        expected_contacts: inst.expected_contacts(),
        srw_expected_contacts: srw_expected_contacts(t, n),
        prob_last_contact_le_window: localized_windows
            .then(|| inst.prob_last_contact_le(win_hi.min(n as f64) as usize)),
        prob_last_contact_in_window: localized_windows.then(|| {
            inst.prob_last_contact_le(win_hi.min(n as f64) as usize)
                - inst.prob_last_contact_le((win_lo.min(n as f64) as usize).saturating_sub(2))
        }),
        window_contact_probs,
        srw_contrast: contrast,
    };

    let mc = if n_samples > 0 {
        let samples = inst.run_samples(n_samples, seed);
        let nf = n_samples as f64;
        let mean = samples.iter().map(|s| s.s_n as f64).sum::<f64>() / nf;
        let var = samples
            .iter()
            .map(|s| {
                let d = s.s_n as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / (nf - 1.0);
        let tail3 = samples.iter().filter(|s| (s.s_n as f64 / v).abs() > 3.0).count() as f64 / nf;
        let visited = samples.iter().filter(|s| s.visited_other_interface).count() as f64 / nf;
        let le_win =
            samples.iter().filter(|s| (s.tau_last as f64) <= win_hi).count() as f64 / nf;
        let in_win = samples
            .iter()
            .filter(|s| (s.tau_last as f64) >= win_lo && (s.tau_last as f64) <= win_hi)
            .count() as f64
            / nf;
        let mean_m = samples.iter().map(|s| s.m as f64).sum::<f64>() / nf;
        let m_max = samples.iter().map(|s| s.m).max().unwrap_or(0) as usize;
        let mut m_histogram = vec![0u64; m_max + 1];
        for s in &samples {
            m_histogram[s.m as usize] += 1;
        }
        let m_ge = |k: u32| samples.iter().filter(|s| s.m >= k).count() as f64;
        let m_tail_ratios = (1..=3)
            .map(|k| {
                let d = m_ge(k);
                if d > 0.0 {
                    m_ge(k + 1) / d
                } else {
                    f64::NAN
                }
            })
            .collect();
        let window_fractions = EPS_GRID
            .iter()
            .map(|&eps| {
                let w = (1.0 - eps) * n as f64;
                (eps, samples.iter().filter(|s| s.tau_last as f64 >= w).count() as f64 / nf)
            })
            .collect();
        // fixed cell grid against the standard normal
        let edges = [-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];
        let mut c_band: f64 = 1.0;
        let mut any = false;
        for w in edges.windows(2) {
            let p = normal_cdf(w[1]) - normal_cdf(w[0]);
            if p < 0.01 {
                continue;
            }
            let emp = samples
                .iter()
                .filter(|s| {
                    let x = s.s_n as f64 / v;
                    x > w[0] && x <= w[1]
                })
                .count() as f64
                / nf;
            if emp > 0.0 {
                c_band = c_band.max(emp / p).max(p / emp);
                any = true;
            }
        }
        Some(McStats {
            mean_endpoint: mean,
            var_endpoint: var,
            var_ratio: var / (v * v),
            tail_3sigma: tail3,
            visited_fraction: visited,
            frac_last_contact_le_window: le_win,
            frac_last_contact_in_window: in_win,
            mean_switches: mean_m,
            m_histogram,
            m_tail_ratios,
            window_fractions,
            normal_band_c: any.then_some(c_band),
        })
    } else {
        None
    };

    let mut criteria = Vec::new();
    if let Some(mc) = &mc {
        match label {
            RegimeLabel::Th1Localized => {
                criteria.push(CriterionRow::le(
                    "th1_visited_fraction",
                    mc.visited_fraction,
                    0.05,
                ));
                criteria.push(CriterionRow::ge(
                    "th1_last_contact_le_20_over_delta2",
                    mc.frac_last_contact_le_window,
                    0.80,
                ));
            }
            RegimeLabel::R1Subdiffusive
            | RegimeLabel::R2Diffusive
            | RegimeLabel::Bc1Diagonal
            | RegimeLabel::Bc2Halfline => {
                criteria.push(CriterionRow::band(
                    "endpoint_variance_ratio",
                    mc.var_ratio,
                    0.6,
                    1.4,
                ));
                criteria.push(CriterionRow::le("endpoint_tail_3v", mc.tail_3sigma, 0.02));
            }
            RegimeLabel::Bc3Critical => {
                for (k, r) in mc.m_tail_ratios.iter().enumerate() {
                    criteria.push(CriterionRow::le(
                        &format!("bc3_m_tail_ratio_k{}", k + 1),
                        *r,
                        0.9,
                    ));
                }
                let ratios: Vec<f64> = mc
                    .window_fractions
                    .iter()
                    .map(|(eps, frac)| frac / eps)
                    .collect();
                let stability = ratios.iter().cloned().fold(f64::MIN, f64::max)
                    / ratios.iter().cloned().fold(f64::MAX, f64::min);
                criteria.push(CriterionRow::le("bc3_window_over_eps_stability", stability, 3.0));
                if let Some((_, c)) = exact.srw_contrast.iter().find(|(e, _)| *e == 0.2) {
                    criteria.push(CriterionRow::ge("bc3_srw_contrast_eps_0.2", *c, 0.9));
                }
            }
            RegimeLabel::R3Srw => {}
        }
    }
    if label == RegimeLabel::R3Srw {
        criteria.push(CriterionRow::le(
            "r3_abs_z_minus_one",
            exact.z_minus_one.abs(),
            0.05,
        ));
    }

    Ok(ExperimentReport {
        a: point.a.value(),
        b: point.b.value(),
        beta: point.beta,
        n: point.n,
        t_n: t,
        delta_n: delta,
        label,
        th1_tag: tag,
        n_samples,
        seed,
        prediction,
        exact,
        mc,
        criteria,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticRow {
    pub n: u64,
    pub t: u32,
    pub delta: f64,
    pub log_z: f64,
    /// `Z e^{-N phi}`
    pub z_tilde: f64,
    /// normalized per the branch: times `max(1, delta min(sqrt N, T))` when
    /// `a > b`, bare otherwise
    pub ratio: f64,
}

/// Partition-function growth along a scaling ray.
pub fn partition_asymptotics(
    a: Exponent,
    b: Exponent,
    beta: f64,
    ns: &[u64],
) -> Result<Vec<AsymptoticRow>> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let point = ScalingPoint::new(a, b, beta, n)?;
        let params = point.params()?;
        let inst = PolymerInstance::build(params, n as usize)?;
        let zt = inst.z_tilde();
        let ratio = if a.cmp_with_tol(&b) == Ordering::Greater {
            zt * (params.delta * (n as f64).sqrt().min(params.t as f64)).max(1.0)
        } else {
            zt
        };
        rows.push(AsymptoticRow {
            n,
            t: params.t,
            delta: params.delta,
            log_z: inst.partition_function().log_z,
            z_tilde: zt,
            ratio,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(x: f64) -> Exponent {
        Exponent::Float(x)
    }

    #[test]
    fn classify_spec_examples() {
        assert_eq!(classify(fx(0.4), fx(0.1)).unwrap(), RegimeLabel::Th1Localized);
        assert_eq!(classify(fx(0.45), fx(0.35)).unwrap(), RegimeLabel::Bc3Critical);
        assert_eq!(classify(fx(0.3), fx(0.3)).unwrap(), RegimeLabel::Bc1Diagonal);
        assert_eq!(classify(fx(0.6), fx(0.7)).unwrap(), RegimeLabel::R3Srw);
    }

    #[test]
    fn classify_borders_and_regions() {
        assert_eq!(classify(fx(0.5), fx(0.5)).unwrap(), RegimeLabel::Bc1Diagonal);
        assert_eq!(classify(fx(0.7), fx(0.5)).unwrap(), RegimeLabel::Bc2Halfline);
        // BC3 endpoints: (1/3, 0) on the critical line
        assert_eq!(
            classify(Exponent::Ratio(1, 3), Exponent::Ratio(0, 1)).unwrap(),
            RegimeLabel::Bc3Critical
        );
        assert_eq!(classify(fx(0.2), fx(0.1)).unwrap(), RegimeLabel::R1Subdiffusive);
        assert_eq!(classify(fx(0.25), fx(0.4)).unwrap(), RegimeLabel::R2Diffusive);
        // red clause region classifies diffusive, tags red_clause
        assert_eq!(classify(fx(0.4), fx(0.6)).unwrap(), RegimeLabel::R2Diffusive);
        assert_eq!(th1_tag(fx(0.4), fx(0.6)).unwrap(), Some(Th1Subcase::RedClause));
        // weakly depinned
        assert_eq!(classify(fx(0.7), fx(0.2)).unwrap(), RegimeLabel::Th1Localized);
        assert_eq!(th1_tag(fx(0.7), fx(0.2)).unwrap(), Some(Th1Subcase::WeaklyDepinned));
        assert_eq!(th1_tag(fx(0.4), fx(0.1)).unwrap(), Some(Th1Subcase::Wedge));
        // diagonal past the corner is the SRW region
        assert_eq!(classify(fx(0.7), fx(0.7)).unwrap(), RegimeLabel::R3Srw);
        assert_eq!(classify(fx(0.5), fx(0.2)).unwrap(), RegimeLabel::Th1Localized);
        assert_eq!(classify(fx(0.5), fx(0.7)).unwrap(), RegimeLabel::R3Srw);
    }

    #[test]
    fn classify_is_total_on_a_grid() {
        for i in 1..=60 {
            for j in 0..=60 {
                let a = fx(i as f64 / 40.0);
                let b = fx(j as f64 / 40.0);
                classify(a, b).unwrap();
            }
        }
    }

    #[test]
    fn predictions_spec_examples() {
        // R1 endpoint scale carries the explicit pi
        let p = ScalingPoint::new(fx(0.4), fx(0.3), 1.0, 1_000_000).unwrap();
        let pred = predicted_orders(&p).unwrap();
        assert_eq!(pred.label, RegimeLabel::R1Subdiffusive);
        let expect = std::f64::consts::PI
            * (1_000_000.0 / (252.0 * 1_000_000f64.powf(-0.3))).sqrt();
        assert!((pred.endpoint_scale - expect).abs() < 1e-9);
        // BC1 at beta = 1: kappa about 0.99
        let p = ScalingPoint::new(fx(0.3), fx(0.3), 1.0, 100_000).unwrap();
        let pred = predicted_orders(&p).unwrap();
        assert!((pred.endpoint_constant.unwrap() - 0.9908).abs() < 1e-3);
        // TH1 with b < 1/2: last contact scale 1/delta^2
        let p = ScalingPoint::new(fx(0.4), fx(0.1), 1.0, 1_000_000).unwrap();
        let pred = predicted_orders(&p).unwrap();
        let d = 1_000_000f64.powf(-0.1);
        assert!((pred.last_contact_scale - 1.0 / (d * d)).abs() < 1e-9);
        // both contact-count predictions are reported
        assert!(pred.contacts_scale_renewal.is_finite());
    }

    #[test]
    fn kappa_continuity_within_label() {
        // predictions vary continuously in beta on the diagonal
        let mut last = f64::NAN;
        for k in 0..20 {
            let beta = 0.5 + k as f64 * 0.05;
            let p = ScalingPoint::new(fx(0.3), fx(0.3), beta, 10_000).unwrap();
            let pred = predicted_orders(&p).unwrap();
            if !last.is_nan() {
                assert!((pred.endpoint_scale - last).abs() < 0.02 * last);
            }
            last = pred.endpoint_scale;
        }
    }

    #[test]
    fn srw_contrast_examples() {
        // eps = 1 covers everything: T=2 touches at every even time
        assert!((srw_contrast(2, 64, 1.0).unwrap() - 1.0).abs() < 1e-12);
        // grows toward 1 with N at fixed eps
        let small = srw_contrast(32, 10_000, 0.1).unwrap();
        let large = srw_contrast(32, 100_000, 0.1).unwrap();
        assert!(large > small);
        assert!(large > 0.99);
    }

    #[test]
    fn experiment_report_is_deterministic() {
        let p = ScalingPoint::new(fx(0.3), fx(0.3), 1.0, 2_000).unwrap();
        let r1 = run_experiment(&p, 500, 9).unwrap();
        let r2 = run_experiment(&p, 500, 9).unwrap();
        let j1 = serde_json::to_string(&r1).unwrap();
        let j2 = serde_json::to_string(&r2).unwrap();
        assert_eq!(j1, j2);
    }

    #[test]
    fn experiment_refuses_oversized_runs() {
        let p = ScalingPoint::new(fx(0.4), fx(0.1), 1.0, 4_000_000).unwrap();
        assert!(run_experiment(&p, 10, 0).is_err());
        let p = ScalingPoint::new(fx(0.6), fx(0.7), 1.0, 1_000_000).unwrap();
        // T_N = 3982 > 2000: sampling refused, exact-only allowed
        assert!(run_experiment(&p, 10, 0).is_err());
    }
}
