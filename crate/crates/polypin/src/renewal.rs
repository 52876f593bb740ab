//! The tilted renewal process attached to the polymer measure: gap law
//! `f(n) = e^{-delta} q_T(n) e^{-phi n}`, its mass function `u(n) = P(n in tau)`
//! by truncated power-series inversion, the three-regime profile bands, and
//! the tilt identity check.

use crate::error::{Error, Result};
use crate::fft;
use crate::free_energy::{
    free_energy, renewal_moments, FreeEnergyResult, ModelParams, MomentMethod,
};
use crate::srw::{hitting_law, HittingLaw};
use crate::util::{Kahan, kahan_sum};
use serde::Serialize;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MassMethod {
    Direct,
    Fft,
}

/// Above ~1e9 elementary convolution operations the direct renewal
/// recurrence is replaced by FFT series inversion.
const DIRECT_OPS_LIMIT: u64 = 250_000_000;

/// Tilted renewal model on the even lattice up to a horizon.
///
/// Arrays store only even indices (`index m` = time `2m`), which encodes the
/// parity invariant structurally and halves memory.
#[derive(Debug, Clone)]
pub struct RenewalModel {
    pub params: ModelParams,
    pub fe: FreeEnergyResult,
    pub horizon: usize,
    f: Vec<f64>,
    f1: Vec<f64>,
    u: Vec<f64>,
    /// effective support of `f` in time units (gaps beyond carry < 1e-15
    /// of the accumulated mass by the geometric tail at rate g+phi)
    pub support: usize,
    pub normalization_defect: f64,
    pub method: MassMethod,
    law: HittingLaw,
}

pub(crate) fn compute_u(f: &[f64], support_half: usize, half: usize, method: MassMethod) -> Result<Vec<f64>> {
    match method {
        MassMethod::Direct => {
            let mut u = vec![0.0; half + 1];
            u[0] = 1.0;
            for n in 1..=half {
                let mut acc = Kahan::default();
                for k in 1..=n.min(support_half) {
                    acc.add(f[k] * u[n - k]);
                }
                u[n] = acc.value();
            }
            Ok(u)
        }
        MassMethod::Fft => fft::invert_one_minus(&f[..=support_half.min(f.len() - 1)], half),
    }
}

impl RenewalModel {
    /// Build with an explicit horizon; the mass-function path is chosen by
    /// the operation-count rule.
    pub fn build(params: ModelParams, horizon: usize) -> Result<Self> {
        Self::build_with_method(params, horizon, None)
    }

    /// Build, forcing the mass-function path (used to cross-check the two).
    pub fn build_with_method(
        params: ModelParams,
        horizon: usize,
        method: Option<MassMethod>,
    ) -> Result<Self> {
        if horizon < 2 || horizon % 2 != 0 {
            return Err(Error::Param(format!("horizon must be even and >= 2, got {horizon}")));
        }
        let fe = free_energy(params, 1e-13)?;
        let law = hitting_law(params.spec(), horizon)?;
        let half = horizon / 2;
        let emd = (-params.delta).exp();
        let mut f = vec![0.0; half + 1];
        let mut f1 = vec![0.0; half + 1];
        for m in 1..=half {
            let w = emd * (-fe.phi * (2 * m) as f64).exp();
            f[m] = law.q_at(2 * m) * w;
            f1[m] = law.q1_at(2 * m) * w;
            debug_assert!(2.0 * f1[m] <= f[m] * (1.0 + 1e-15));
        }
        // truncate f where the geometric tail at rate g+phi drops below
        // 1e-15 of the accumulated mass
        let rho = (-2.0 * (fe.g + fe.phi)).exp();
        let geom = if rho < 1.0 { rho / (1.0 - rho) } else { f64::INFINITY };
        let mut acc = Kahan::default();
        let mut support_half = half;
        for m in 1..=half {
            acc.add(f[m]);
            if f[m] * geom < 1e-15 * acc.value() {
                support_half = m;
                break;
            }
        }
        let mass_head = kahan_sum(f[1..].iter().copied());
        let tail = emd * law.laplace_tail(fe.phi)?;
        let normalization_defect = (mass_head + tail - 1.0).abs();

        let method = method.unwrap_or({
            if (half as u64) * (support_half as u64) <= DIRECT_OPS_LIMIT {
                MassMethod::Direct
            } else {
                MassMethod::Fft
            }
        });
        let u = compute_u(&f, support_half, half, method)?;
        Ok(RenewalModel {
            params,
            fe,
            horizon,
            f,
            f1,
            u,
            support: 2 * support_half,
            normalization_defect,
            method,
            law,
        })
    }

    /// Pick the horizon from the geometric tail rate so the normalization
    /// defect meets `max_defect`, capped at `horizon_cap`.
    pub fn build_to_defect(params: ModelParams, max_defect: f64, horizon_cap: usize) -> Result<Self> {
        if !(max_defect > 0.0) {
            return Err(Error::Param("max_defect must be positive".into()));
        }
        let fe = free_energy(params, 1e-13)?;
        let rate = fe.g + fe.phi;
        let target = (-(max_defect * 0.1).ln() / rate).ceil() as usize;
        let cap = horizon_cap.max(64) & !1;
        let horizon = (target + target % 2).clamp(64, cap);
        let model = Self::build(params, horizon)?;
        if model.normalization_defect > max_defect {
            return Err(Error::HorizonTooSmall {
                achievable: model.normalization_defect,
                requested: max_defect,
            });
        }
        Ok(model)
    }

    fn half(&self) -> usize {
        self.horizon / 2
    }

    /// `P(tau_1 = n)` under the tilted law.
    pub fn f_at(&self, n: usize) -> f64 {
        if n % 2 == 1 || n / 2 > self.half() {
            0.0
        } else {
            self.f[n / 2]
        }
    }

    /// `P(tau_1 = n, eps_1 = +1)`; the -1 law is identical by symmetry.
    pub fn f1_at(&self, n: usize) -> f64 {
        if n % 2 == 1 || n / 2 > self.half() {
            0.0
        } else {
            self.f1[n / 2]
        }
    }

    /// `u(n) = P(n in tau)`.
    pub fn u_at(&self, n: usize) -> f64 {
        if n % 2 == 1 || n / 2 > self.half() {
            0.0
        } else {
            self.u[n / 2]
        }
    }

    pub fn f_slice(&self) -> &[f64] {
        &self.f
    }

    pub fn f1_slice(&self) -> &[f64] {
        &self.f1
    }

    pub fn mass_function(&self) -> &[f64] {
        &self.u
    }

    pub fn hitting(&self) -> &HittingLaw {
        &self.law
    }

    /// `2 q1(n)/q(n)`: conditional probability that a gap of length `n`
    /// switches interfaces (the tilt cancels in the ratio).
    pub fn switch_ratio_at(&self, n: usize) -> f64 {
        let q = self.law.q_at(n);
        if q == 0.0 {
            0.0
        } else {
            2.0 * self.law.q1_at(n) / q
        }
    }

    /// Gap-law moments by the closed-form route.
    pub fn moments(&self) -> Result<crate::free_energy::RenewalMoments> {
        renewal_moments(self.params, MomentMethod::ClosedForm)
    }

    /// Dump `(n, f(n), u(n))` rows as CSV with header `n,f,u`.
    pub fn dump_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "n,f,u")?;
        for m in 0..=self.half() {
            writeln!(w, "{},{},{}", 2 * m, self.f[m], self.u[m])?;
        }
        Ok(())
    }

    /// Max over even `k <= k_max` of the relative defect between the
    /// transfer-matrix value of `E[e^{-H_k} 1{k in tau^T}]` and
    /// `e^{phi k} u(k)`.
    pub fn tilt_identity_check(&self, k_max: usize) -> Result<f64> {
        if k_max > self.horizon || k_max > 4096 {
            return Err(Error::Param(format!("tilt check k_max {k_max} out of range")));
        }
        let t = self.params.t as i64;
        let pen = (-self.params.delta).exp();
        let width = 2 * k_max + 1;
        let mid = k_max as i64;
        let mut cur = vec![0.0f64; width];
        let mut nxt = vec![0.0f64; width];
        cur[k_max] = 1.0;
        let mut worst = 0.0f64;
        for step in 1..=k_max {
            for i in 0..width {
                let left = if i == 0 { 0.0 } else { cur[i - 1] };
                let right = if i + 1 == width { 0.0 } else { cur[i + 1] };
                let mut v = 0.5 * (left + right);
                if (i as i64 - mid).rem_euclid(t) == 0 {
                    v *= pen;
                }
                nxt[i] = v;
            }
            std::mem::swap(&mut cur, &mut nxt);
            if step % 2 == 0 {
                let lhs = kahan_sum(
                    cur.iter()
                        .enumerate()
                        .filter(|(i, _)| (*i as i64 - mid).rem_euclid(t) == 0)
                        .map(|(_, &v)| v),
                );
                let rhs = (self.fe.phi * step as f64).exp() * self.u_at(step);
                let defect = ((lhs - rhs) / rhs).abs();
                worst = worst.max(defect);
            }
        }
        Ok(worst)
    }

    /// Profile bands of `u` against the regime prediction.
    pub fn profile_report(&self, branch: ProfileBranch) -> Result<ProfileReport> {
        let t = self.params.t as f64;
        let delta = self.params.delta;
        let horizon = self.horizon;
        let mut bands = Vec::new();
        let mut push_band = |lo: usize, hi: usize, profile: &dyn Fn(f64) -> f64| {
            let lo = lo.max(2);
            let hi = hi.min(horizon);
            if lo > hi || lo > horizon {
                bands.push(ProfileBand { lo_n: lo, hi_n: hi, sup: f64::NAN, inf: f64::NAN, covered: false });
                return;
            }
            let mut sup = f64::NEG_INFINITY;
            let mut inf = f64::INFINITY;
            for m in lo.div_ceil(2)..=hi / 2 {
                let r = self.u[m] / profile((2 * m) as f64);
                sup = sup.max(r);
                inf = inf.min(r);
            }
            bands.push(ProfileBand { lo_n: lo, hi_n: hi, sup, inf, covered: true });
        };
        match branch {
            ProfileBranch::ThreeRange => {
                if !(delta > 0.0) {
                    return Err(Error::Param("three-range profile needs delta > 0".into()));
                }
                let n1 = (1.0 / (delta * delta)).ceil() as usize;
                let n2 = (t * t) as usize;
                push_band(2, n1, &|n| 1.0 / n.sqrt());
                push_band(n1, n2, &|n| 1.0 / (delta * delta * n.powf(1.5)));
                push_band(n2, horizon, &|_| 1.0 / (delta * delta * t * t * t));
            }
            ProfileBranch::WideInterface => {
                let n2 = (t * t) as usize;
                push_band(2, n2, &|n| 1.0 / n.sqrt());
                push_band(n2, horizon, &|_| 1.0 / t);
            }
        }
        let (mean_tau, anchor) = if delta > 0.0 {
            let mean = self.moments()?.mean_tau;
            let n_star = 2 * ((20.0 * mean / 2.0).round() as usize);
            let anchor = if n_star <= horizon {
                Some(StationaryAnchor { n_star, normalized: self.u_at(n_star) * mean / 2.0 })
            } else {
                None
            };
            (mean, anchor)
        } else {
            (f64::INFINITY, None)
        };
        Ok(ProfileReport { branch, bands, mean_tau, anchor })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileBranch {
    /// `a > b`: `1/sqrt(n)`, `1/(delta^2 n^{3/2})`, `1/(T^3 delta^2)`
    ThreeRange,
    /// `b >= a`: `1/min(sqrt(n), T)`
    WideInterface,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileBand {
    pub lo_n: usize,
    pub hi_n: usize,
    pub sup: f64,
    pub inf: f64,
    /// false when the horizon does not reach this range
    pub covered: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationaryAnchor {
    pub n_star: usize,
    /// `u(n*) E[tau_1] / 2`; tends to 1 by the span-2 renewal theorem
    pub normalized: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub branch: ProfileBranch,
    pub bands: Vec<ProfileBand>,
    pub mean_tau: f64,
    pub anchor: Option<StationaryAnchor>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::srw::{interface_visit_prob, InterfaceSpec};

    #[test]
    fn t2_renewal_is_deterministic() {
        let model = RenewalModel::build(ModelParams::new(2, 0.8).unwrap(), 64).unwrap();
        assert!((model.f_at(2) - 1.0).abs() < 1e-14);
        assert_eq!(model.f_at(4), 0.0);
        for m in 0..=32 {
            assert!((model.u_at(2 * m) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gap_law_recomputable_from_parts() {
        let params = ModelParams::new(6, 0.3).unwrap();
        let model = RenewalModel::build(params, 256).unwrap();
        let law = hitting_law(InterfaceSpec::finite(6).unwrap(), 256).unwrap();
        let fe = free_energy(params, 1e-13).unwrap();
        for n in (2..=256).step_by(2) {
            let expect = (-0.3f64).exp() * law.q_at(n) * (-fe.phi * n as f64).exp();
            assert!((model.f_at(n) - expect).abs() <= 1e-15 * (1.0 + expect));
        }
    }

    #[test]
    fn auto_horizon_meets_defect() {
        let model =
            RenewalModel::build_to_defect(ModelParams::new(20, 0.2).unwrap(), 1e-9, 1 << 22)
                .unwrap();
        assert!(model.normalization_defect < 1e-9, "defect {}", model.normalization_defect);
    }

    #[test]
    fn untilted_mass_function_matches_visit_probability() {
        // delta = 0 collapses to the plain contact process of the walk;
        // the binomial-sum route is independent of the DP+recursion route
        let model = RenewalModel::build(ModelParams::new(6, 0.0).unwrap(), 512).unwrap();
        for m in 0..=256 {
            let direct = interface_visit_prob(InterfaceSpec::finite(6).unwrap(), 2 * m);
            assert!(
                (model.u_at(2 * m) - direct).abs() < 1e-10,
                "n={}: {} vs {}",
                2 * m,
                model.u_at(2 * m),
                direct
            );
        }
    }

    #[test]
    fn mass_function_paths_agree() {
        let params = ModelParams::new(8, 0.4).unwrap();
        let a = RenewalModel::build_with_method(params, 4096, Some(MassMethod::Direct)).unwrap();
        let b = RenewalModel::build_with_method(params, 4096, Some(MassMethod::Fft)).unwrap();
        for m in 0..=2048 {
            assert!(
                (a.u[m] - b.u[m]).abs() < 1e-10,
                "m={m}: {} vs {}",
                a.u[m],
                b.u[m]
            );
        }
    }

    #[test]
    fn one_jump_bound_and_u0() {
        let model = RenewalModel::build(ModelParams::new(10, 0.25).unwrap(), 2048).unwrap();
        assert_eq!(model.u_at(0), 1.0);
        for n in (2..=2048).step_by(2) {
            assert!(model.u_at(n) >= model.f_at(n));
            assert!(model.u_at(n) >= 0.0 && model.u_at(n) <= 1.0);
        }
    }

    #[test]
    fn tilt_identity_t2_closed_form() {
        let model = RenewalModel::build(ModelParams::new(2, 0.6).unwrap(), 64).unwrap();
        // k = 4: LHS = e^{-2 delta}, RHS = e^{4 phi} u(4) with phi = -delta/2
        let defect = model.tilt_identity_check(4).unwrap();
        assert!(defect < 1e-13, "defect {defect}");
    }

    #[test]
    fn tilt_identity_transfer_matrix() {
        let model = RenewalModel::build(ModelParams::new(4, 0.3).unwrap(), 64).unwrap();
        let defect = model.tilt_identity_check(20).unwrap();
        assert!(defect <= 1e-10, "defect {defect}");
    }

    #[test]
    fn stationary_anchor_converges() {
        let model = RenewalModel::build(ModelParams::new(20, 0.2).unwrap(), 4096).unwrap();
        let report = model.profile_report(ProfileBranch::ThreeRange).unwrap();
        let anchor = report.anchor.unwrap();
        assert!(
            (anchor.normalized - 1.0).abs() < 0.02,
            "anchor {} at n*={}",
            anchor.normalized,
            anchor.n_star
        );
        for band in &report.bands {
            assert!(band.covered);
            assert!(band.sup.is_finite() && band.inf > 0.0);
        }
    }

    #[test]
    fn horizon_error_carries_achievable_defect() {
        let err = RenewalModel::build_to_defect(ModelParams::new(40, 0.05).unwrap(), 1e-30, 128)
            .unwrap_err();
        match err {
            Error::HorizonTooSmall { achievable, requested } => {
                assert!(achievable > requested);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_dump_shape() {
        let model = RenewalModel::build(ModelParams::new(4, 0.5).unwrap(), 8).unwrap();
        let mut buf = Vec::new();
        model.dump_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,f,u"));
        assert_eq!(lines.next(), Some("0,0,1"));
        assert_eq!(text.lines().count(), 2 + 4);
    }
}
