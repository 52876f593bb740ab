//! Free energy of the interface model and everything derived from it in
//! closed form: the Laplace transform `Q_T`, the auxiliary angle `gamma`,
//! `g(T)`, the fixed point `x_beta` with its diffusion constant `kappa`,
//! asymptotic branches of `phi`, and the renewal gap moments.
//!
//! The solve inverts `Qtilde_T(gamma) = 1 + tan(gamma) tan(T gamma / 2) = e^delta`
//! by bisection on `gamma in (0, pi/T)` and recovers `phi = log cos(gamma)`
//! algebraically, so no second root-find is needed.

use crate::error::{Error, Result};
use crate::srw::{hitting_law, InterfaceSpec};
use crate::util::{bisect_increasing, Kahan};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::str::FromStr;

/// One interface-model instance: spacing `T` (even) and repulsion `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub t: u32,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(t: u32, delta: f64) -> Result<Self> {
        if t < 2 || t % 2 != 0 {
            return Err(Error::Param(format!("T must be even and >= 2, got {t}")));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::Param(format!("delta must be finite and >= 0, got {delta}")));
        }
        Ok(ModelParams { t, delta })
    }

    pub fn spec(&self) -> InterfaceSpec {
        InterfaceSpec::Finite(self.t)
    }
}

/// Phase-diagram exponent; keeps exact rationals exact so border sets
/// (a = b, b = 1/2, 3a - 1 = b) classify without float fuzz.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Exponent {
    Float(f64),
    /// numerator, positive denominator
    Ratio(i64, i64),
}

/// Tie tolerance for float-valued exponents on border sets.
pub const EXPONENT_TIE_TOL: f64 = 1e-12;

impl Exponent {
    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Float(x) => x,
            Exponent::Ratio(p, q) => p as f64 / q as f64,
        }
    }

    /// Compare; exact when both sides are rationals, tie-tolerant otherwise.
    pub fn cmp_with_tol(&self, other: &Exponent) -> Ordering {
        match (*self, *other) {
            (Exponent::Ratio(p1, q1), Exponent::Ratio(p2, q2)) => {
                (p1 as i128 * q2 as i128).cmp(&(p2 as i128 * q1 as i128))
            }
            _ => {
                let (x, y) = (self.value(), other.value());
                if (x - y).abs() <= EXPONENT_TIE_TOL {
                    Ordering::Equal
                } else if x < y {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn ratio(p: i64, q: i64) -> Result<Self> {
        if q <= 0 {
            return Err(Error::Param(format!("exponent denominator must be positive: {p}/{q}")));
        }
        Ok(Exponent::Ratio(p, q))
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::Param(format!("bad rational exponent {s:?}")))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| Error::Param(format!("bad rational exponent {s:?}")))?;
            Exponent::ratio(p, q)
        } else {
            let x: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Param(format!("bad exponent {s:?}")))?;
            Ok(Exponent::Float(x))
        }
    }
}

/// Coordinate on the phase diagram: `T_N = N^a` (rounded even, min 2) and
/// `delta_N = beta N^{-b}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub a: Exponent,
    pub b: Exponent,
    pub beta: f64,
    pub n: u64,
}

impl ScalingPoint {
    pub fn new(a: Exponent, b: Exponent, beta: f64, n: u64) -> Result<Self> {
        if !(a.value() > 0.0) {
            return Err(Error::Param(format!("a must be positive, got {}", a.value())));
        }
        if !(b.value() >= 0.0) {
            return Err(Error::Param(format!("b must be >= 0, got {}", b.value())));
        }
        // beta = 0 degenerates to the untilted walk, which the identity
        // checks rely on
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::Param(format!("beta must be finite and >= 0, got {beta}")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::Param(format!("N must be even and >= 2, got {n}")));
        }
        Ok(ScalingPoint { a, b, beta, n })
    }

    /// `T_N = 2 max(1, round(N^a / 2))`.
    pub fn t_n(&self) -> u32 {
        let raw = (self.n as f64).powf(self.a.value()) / 2.0;
        2 * (raw.round().max(1.0) as u32)
    }

    /// `delta_N = beta N^{-b}`.
    pub fn delta_n(&self) -> f64 {
        self.beta * (self.n as f64).powf(-self.b.value())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.t_n(), self.delta_n())
    }
}

/// `g(T) = -log cos(pi/T)`, the untilted excursion decay rate.
pub fn g_factor(t: u32) -> f64 {
    -(std::f64::consts::PI / t as f64).cos().ln()
}

pub(crate) fn qtilde(t: u32, gamma: f64) -> f64 {
    1.0 + libm::tan(gamma) * libm::tan(t as f64 * gamma / 2.0)
}

pub(crate) fn qtilde_d1(t: u32, gamma: f64) -> f64 {
    let tf = t as f64;
    let sec2g = 1.0 / (libm::cos(gamma) * libm::cos(gamma));
    let th = libm::tan(tf * gamma / 2.0);
    let sec2h = 1.0 + th * th;
    sec2g * th + libm::tan(gamma) * (tf / 2.0) * sec2h
}

pub(crate) fn qtilde_d2(t: u32, gamma: f64) -> f64 {
    let tf = t as f64;
    let tg = libm::tan(gamma);
    let sec2g = 1.0 + tg * tg;
    let th = libm::tan(tf * gamma / 2.0);
    let sec2h = 1.0 + th * th;
    2.0 * sec2g * tg * th + tf * sec2g * sec2h + (tf * tf / 2.0) * tg * sec2h * th
}

/// Closed form of `Q_T(lambda) = E[e^{-lambda tau_1^T}]` for finite `T`.
///
/// Defined for `lambda <= 0` up to the singularity at `T gamma(lambda) = pi`,
/// i.e. `lambda > -g(T)`; beyond it the error reports the boundary.
pub fn laplace_q(t: u32, lambda: f64) -> Result<f64> {
    ModelParams::new(t, 0.0)?;
    if lambda > 0.0 {
        return Err(Error::Param(format!(
            "laplace_q requires lambda <= 0 (e^{{-2 lambda}} - 1 >= 0), got {lambda}"
        )));
    }
    if lambda == 0.0 {
        return Ok(1.0);
    }
    let boundary = -g_factor(t);
    let gamma = libm::atan(libm::expm1(-2.0 * lambda).sqrt());
    if t as f64 * gamma >= std::f64::consts::PI {
        return Err(Error::Domain { t, lambda, boundary });
    }
    Ok(qtilde(t, gamma))
}

/// Solved free energy `phi(delta, T)` with its angle and residual.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FreeEnergyResult {
    pub phi: f64,
    pub gamma: f64,
    /// `g(T)`
    pub g: f64,
    /// `|Qtilde(gamma) - e^delta|` at the returned angle
    pub residual: f64,
}

/// Invert `Q_T(phi) = e^delta` by bisection on the angle.
pub fn free_energy(params: ModelParams, tol: f64) -> Result<FreeEnergyResult> {
    let g = g_factor(params.t);
    if params.delta == 0.0 {
        return Ok(FreeEnergyResult { phi: 0.0, gamma: 0.0, g, residual: 0.0 });
    }
    let target = params.delta.exp();
    let hi = std::f64::consts::PI / params.t as f64;
    let gamma = bisect_increasing(0.0, hi, target, |x| qtilde(params.t, x));
    let residual = (qtilde(params.t, gamma) - target).abs();
    if !(residual <= tol.max(1e-9) * target) {
        return Err(Error::Solver(format!(
            "free-energy bisection residual {residual:e} above tolerance at T={}, delta={}",
            params.t, params.delta
        )));
    }
    // invert gamma(lambda) algebraically: phi = log cos gamma
    let phi = libm::cos(gamma).ln();
    Ok(FreeEnergyResult { phi, gamma, g, residual })
}

/// Unique solution of `x = beta sin(x) / (1 - cos(x))` in `(0, pi)`.
pub fn x_beta(beta: f64, _tol: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Param(format!("beta must be positive, got {beta}")));
    }
    // h(x) = beta sin x / (1 - cos x) - x decreases from +inf to -pi
    let mut lo = 1e-12f64;
    let mut hi = std::f64::consts::PI - 1e-12;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let h = beta * libm::sin(mid) / (1.0 - libm::cos(mid)) - mid;
        if h > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Diffusion constant on the diagonal border case.
pub fn kappa(beta: f64) -> Result<f64> {
    let x = x_beta(beta, 1e-13)?;
    Ok((x.powi(3) / (beta * (x + libm::sin(x)))).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PhiBranch {
    /// a < b: `phi ~ -delta_N / T_N`
    ALessB,
    /// a = b: `phi ~ -x_beta^2 / (2 T_N^2)`
    AEqualsB,
    /// a > b: `phi ~ -(pi^2 / 2 T_N^2)(1 - 4/(T_N delta_N))`
    AGreaterB,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AsymptoticPhi {
    pub branch: PhiBranch,
    pub approx: f64,
    pub exact: f64,
    pub rel_error: f64,
}

/// Regime-appropriate asymptotic value of `phi` next to the solver value.
pub fn asymptotic_phi(point: &ScalingPoint) -> Result<AsymptoticPhi> {
    let params = point.params()?;
    let t = params.t as f64;
    let delta = params.delta;
    let (branch, approx) = match point.a.cmp_with_tol(&point.b) {
        Ordering::Less => (PhiBranch::ALessB, -delta / t),
        Ordering::Equal => {
            let x = x_beta(point.beta, 1e-13)?;
            (PhiBranch::AEqualsB, -x * x / (2.0 * t * t))
        }
        Ordering::Greater => {
            let p2 = std::f64::consts::PI * std::f64::consts::PI;
            (PhiBranch::AGreaterB, -(p2 / (2.0 * t * t)) * (1.0 - 4.0 / (t * delta)))
        }
    };
    let exact = free_energy(params, 1e-13)?.phi;
    let rel_error = if exact == 0.0 { approx.abs() } else { ((approx - exact) / exact).abs() };
    Ok(AsymptoticPhi { branch, approx, exact, rel_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentMethod {
    ClosedForm,
    DirectSum,
}

/// First two moments of the tilted gap and the interface-switch probability.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RenewalMoments {
    pub mean_tau: f64,
    pub second_tau: f64,
    /// `P(eps_1^2 = 1)`
    pub switch_prob: f64,
    pub method: MomentMethod,
}

/// `E[tau_1]`, `E[tau_1^2]`, `P(eps_1^2 = 1)` under the tilted gap law,
/// either through the `Qtilde` derivative formulas or by direct tilted sums
/// with exact strip-transform tails.
pub fn renewal_moments(params: ModelParams, method: MomentMethod) -> Result<RenewalMoments> {
    if !(params.delta > 0.0) {
        return Err(Error::Param("renewal moments require delta > 0".into()));
    }
    match method {
        MomentMethod::ClosedForm => {
            let fe = free_energy(params, 1e-13)?;
            let t = params.t;
            let gamma = fe.gamma;
            let emd = (-params.delta).exp();
            let d1 = qtilde_d1(t, gamma);
            let d2 = qtilde_d2(t, gamma);
            let tan_g = libm::tan(gamma);
            let cot = 1.0 / tan_g;
            let sec2 = 1.0 + tan_g * tan_g;
            // gamma'(lambda) = -cot(gamma), gamma'' = -sec^2/tan^3
            let gpp = -sec2 / (tan_g * tan_g * tan_g);
            let mean_tau = emd * d1 * cot;
            let second_tau = emd * (gpp * d1 + cot * cot * d2);
            let switch_prob = emd * tan_g / libm::sin(t as f64 * gamma);
            Ok(RenewalMoments { mean_tau, second_tau, switch_prob, method })
        }
        MomentMethod::DirectSum => {
            let fe = free_energy(params, 1e-13)?;
            let t = params.t as usize;
            let horizon = (2 * t * t).max(1024);
            let law = hitting_law(params.spec(), horizon)?;
            let emd = (-params.delta).exp();
            let (mut s0, mut s1, mut s2, mut ssw) =
                (Kahan::default(), Kahan::default(), Kahan::default(), Kahan::default());
            for m in 1..=horizon / 2 {
                let n = (2 * m) as f64;
                let w = (-fe.phi * n).exp();
                let q = law.q_at(2 * m);
                s0.add(q * w);
                s1.add(n * q * w);
                s2.add(n * n * q * w);
                ssw.add(2.0 * law.q1_at(2 * m) * w);
            }
            let tails = law.laplace_tail_moments(fe.phi)?;
            let mass = emd * (s0.value() + tails.mass);
            let mean_tau = emd * (s1.value() + tails.first);
            let second_tau = emd * (s2.value() + tails.second);
            let switch_prob = emd * (ssw.value() + tails.switch);
            if (mass - 1.0).abs() > 1e-9 {
                return Err(Error::Numeric(format!(
                    "tilted gap law mass defect {:e} at T={}, delta={}",
                    mass - 1.0,
                    params.t,
                    params.delta
                )));
            }
            Ok(RenewalMoments { mean_tau, second_tau, switch_prob, method })
        }
    }
}
