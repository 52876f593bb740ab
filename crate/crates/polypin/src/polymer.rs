//! The polymer measure itself: exact partition function by last-contact
//! decomposition, exact skeleton + endpoint sampling through the renewal
//! representation, full-path reconstruction at small sizes, and the exact
//! observable formulas (switch count, endpoint variance) the experiments
//! cross-check against.
//!
//! Everything runs in "rebased" space: multiplying a weight at time n by
//! `e^{-phi n}` keeps every array O(1)-scaled, so plain f64 arithmetic is
//! safe at desk scale; `log Z` adds `phi N` back at the end.

use crate::error::{Error, Result};
use crate::fft::convolve_trunc;
use crate::free_energy::ModelParams;
use crate::renewal::{compute_u, MassMethod, RenewalModel};
use crate::rng::stream;
use crate::util::{kahan_sum, Kahan};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::OnceLock;

/// Contact-time skeleton of one sampled trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct ContactSkeleton {
    /// increasing even contact times `tau_1 < ... < tau_L <= N`
    pub contacts: Vec<u32>,
    /// per-contact sign: 0 same interface, +1 above, -1 below
    pub signs: Vec<i8>,
    pub last_contact: u32,
    pub l: u32,
    /// number of interface switches (`signs != 0`)
    pub m: u32,
}

impl ContactSkeleton {
    /// Structural invariants: even increasing gaps, switches only on gaps
    /// that can reach a neighboring interface, consistent counts.
    pub fn validate(&self, t: u32, n: usize) -> Result<()> {
        if self.contacts.len() != self.signs.len() {
            return Err(Error::Numeric("skeleton length mismatch".into()));
        }
        let mut prev = 0u32;
        for (&c, &s) in self.contacts.iter().zip(&self.signs) {
            let gap = c.checked_sub(prev).ok_or_else(|| Error::Numeric("non-increasing contacts".into()))?;
            if gap == 0 || gap % 2 != 0 || c as usize > n {
                return Err(Error::Numeric(format!("bad gap {gap} at contact {c}")));
            }
            if s != 0 && gap < t {
                return Err(Error::Numeric(format!("switch on gap {gap} < T={t}")));
            }
            prev = c;
        }
        if self.last_contact != prev
            || self.l as usize != self.contacts.len()
            || self.m != self.signs.iter().filter(|&&s| s != 0).count() as u32
        {
            return Err(Error::Numeric("skeleton counters inconsistent".into()));
        }
        Ok(())
    }
}

/// Per-sample observables.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryStats {
    pub s_n: i64,
    pub tau_last: u32,
    pub l: u32,
    pub m: u32,
    pub visited_other_interface: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Partition {
    pub z: f64,
    pub log_z: f64,
}

/// One polymer of length `N` under `(T, delta)`, ready for exact queries
/// and sampling. Immutable after construction and safe to share.
pub struct PolymerInstance {
    pub params: ModelParams,
    pub n: usize,
    pub renewal: RenewalModel,
    /// `P(tau_1 > 2m) e^{-phi 2m}` (rebased survival weight)
    tailr: Vec<f64>,
    /// conditional variance of the surviving-walk height at length `2m`
    sigma2: Vec<f64>,
    lc_prob: Vec<f64>,
    lc_cdf: Vec<f64>,
    z_tilde: f64,
    log_z: f64,
    z_prefix: OnceLock<Vec<f64>>,
}

impl PolymerInstance {
    pub fn build(params: ModelParams, n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Param(format!("N must be even and >= 2, got {n}")));
        }
        let renewal = RenewalModel::build(params, n)?;
        Self::from_renewal(renewal)
    }

    pub fn build_with_method(params: ModelParams, n: usize, method: MassMethod) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::Param(format!("N must be even and >= 2, got {n}")));
        }
        let renewal = RenewalModel::build_with_method(params, n, Some(method))?;
        Self::from_renewal(renewal)
    }

    fn from_renewal(renewal: RenewalModel) -> Result<Self> {
        let n = renewal.horizon;
        let half = n / 2;
        let phi = renewal.fe.phi;
        let law = renewal.hitting();
        let mut tailr = vec![0.0; half + 1];
        let mut sigma2 = vec![0.0; half + 1];
        for m in 0..=half {
            let t = law.tail_at(2 * m);
            if t > 0.0 {
                // exp(ln t - phi n) never overflows: the product decays at
                // rate g + phi > 0
                tailr[m] = (t.ln() - phi * (2 * m) as f64).exp();
                sigma2[m] = law.survivor_sq_moment(2 * m) / t;
            }
        }
        let u = renewal.mass_function();
        let mut acc = Kahan::default();
        let mut w = vec![0.0; half + 1];
        for m in 0..=half {
            w[m] = u[m] * tailr[half - m];
            acc.add(w[m]);
        }
        let z_tilde = acc.value();
        if !(z_tilde > 0.0) {
            return Err(Error::Numeric("partition weight vanished".into()));
        }
        let log_z = z_tilde.ln() + phi * n as f64;
        let mut lc_cdf = vec![0.0; half + 1];
        let mut running = Kahan::default();
        for m in 0..=half {
            w[m] /= z_tilde;
            running.add(w[m]);
            lc_cdf[m] = running.value();
        }
        lc_cdf[half] = 1.0;
        Ok(PolymerInstance {
            params: renewal.params,
            n,
            renewal,
            tailr,
            sigma2,
            lc_prob: w,
            lc_cdf,
            z_tilde,
            log_z,
            z_prefix: OnceLock::new(),
        })
    }

    pub fn partition_function(&self) -> Partition {
        Partition { z: self.log_z.exp(), log_z: self.log_z }
    }

    /// Rebased partition value `Z e^{-phi N}` (the quantity the asymptotic
    /// ratio reports are built from).
    pub fn z_tilde(&self) -> f64 {
        self.z_tilde
    }

    /// Exact law of the last contact time over even `r in [0, N]`.
    pub fn last_contact_law(&self) -> &[f64] {
        &self.lc_prob
    }

    /// `P(tau_L <= r)`.
    pub fn prob_last_contact_le(&self, r: usize) -> f64 {
        self.lc_cdf[(r / 2).min(self.n / 2)]
    }

    /// `P(tau_L >= w)` = probability of a contact in `[w, N]`.
    pub fn prob_contact_window(&self, w: usize) -> f64 {
        if w == 0 {
            return 1.0;
        }
        let idx = w.div_ceil(2);
        if idx == 0 {
            1.0
        } else {
            1.0 - self.lc_cdf[(idx - 1).min(self.n / 2)]
        }
    }

    /// Prefix partition values `Z_j e^{-phi j}` for all even `j <= N`.
    fn z_prefix(&self) -> &[f64] {
        self.z_prefix.get_or_init(|| {
            convolve_trunc(self.renewal.mass_function(), &self.tailr, self.n / 2)
        })
    }

    /// Exact expected number of interface switches `E[m]`.
    pub fn expected_switches(&self) -> f64 {
        let half = self.n / 2;
        let f1x2: Vec<f64> = self.renewal.f1_slice().iter().map(|v| 2.0 * v).collect();
        let a = convolve_trunc(self.renewal.mass_function(), &f1x2, half);
        let b = convolve_trunc(&a, self.z_prefix(), half);
        b[half] / self.z_tilde
    }

    /// Exact `P(m >= 1)` (the polymer visits an interface other than the
    /// starting one).
    pub fn prob_any_switch(&self) -> Result<f64> {
        let half = self.n / 2;
        let f0: Vec<f64> = self
            .renewal
            .f_slice()
            .iter()
            .zip(self.renewal.f1_slice())
            .map(|(f, f1)| f - 2.0 * f1)
            .collect();
        let support_half = (self.renewal.support / 2).min(half);
        let method = if (half as u64) * (support_half as u64) <= 250_000_000 {
            MassMethod::Direct
        } else {
            MassMethod::Fft
        };
        let u0 = compute_u(&f0, support_half, half, method)?;
        let mut acc = Kahan::default();
        for m in 0..=half {
            acc.add(u0[m] * self.tailr[half - m]);
        }
        Ok(1.0 - acc.value() / self.z_tilde)
    }

    /// Exact expected contact count `E[L_N]`.
    pub fn expected_contacts(&self) -> f64 {
        let half = self.n / 2;
        let c = convolve_trunc(self.renewal.mass_function(), self.z_prefix(), half);
        c[half] / self.z_tilde - 1.0
    }

    /// Exact endpoint variance `Var(S_N) = T^2 E[m] + E[offset^2]`.
    pub fn variance_endpoint(&self) -> f64 {
        let half = self.n / 2;
        let t = self.params.t as f64;
        let mut off2 = Kahan::default();
        for m in 0..=half {
            off2.add(self.lc_prob[m] * self.sigma2[half - m]);
        }
        t * t * self.expected_switches() + off2.value()
    }

    /// Draw one contact skeleton: last contact from its exact law, then the
    /// renewal bridge backwards (gap `k` from `s` with probability
    /// `f(k) u(s-k) / u(s)`), signs from the conditional gap law.
    pub fn sample_skeleton(&self, rng: &mut ChaCha8Rng) -> ContactSkeleton {
        let half = self.n / 2;
        let target: f64 = rng.random();
        let mut mr = self.lc_cdf.partition_point(|&c| c < target).min(half);
        // walk backwards from the last contact
        let mut contacts_rev: Vec<u32> = Vec::new();
        let mut signs_rev: Vec<i8> = Vec::new();
        let u = self.renewal.mass_function();
        let f = self.renewal.f_slice();
        let support_half = self.renewal.support / 2;
        while mr > 0 {
            let us = u[mr];
            let want: f64 = rng.random::<f64>() * us;
            let mut acc = 0.0f64;
            let mut gap_half = mr; // fallback: close the bridge to 0
            let k_hi = mr.min(support_half);
            for k in 1..=k_hi {
                acc += f[k] * u[mr - k];
                if acc >= want {
                    gap_half = k;
                    break;
                }
            }
            let gap = 2 * gap_half;
            let mut sign = 0i8;
            if gap >= self.params.t as usize {
                let ratio = self.renewal.switch_ratio_at(gap);
                let coin: f64 = rng.random();
                if coin < ratio {
                    sign = if coin < 0.5 * ratio { 1 } else { -1 };
                }
            }
            contacts_rev.push(2 * mr as u32);
            signs_rev.push(sign);
            mr -= gap_half;
        }
        contacts_rev.reverse();
        signs_rev.reverse();
        let l = contacts_rev.len() as u32;
        let m = signs_rev.iter().filter(|&&s| s != 0).count() as u32;
        let last_contact = contacts_rev.last().copied().unwrap_or(0);
        ContactSkeleton { contacts: contacts_rev, signs: signs_rev, last_contact, l, m }
    }

    /// Draw `n_samples` full trajectory summaries. Sample `i` consumes its
    /// own derived stream, so the result is reproducible for any thread
    /// count; the conditional endpoint tables are built once per run from
    /// the realized residual lengths.
    pub fn run_samples(&self, n_samples: u32, seed: u64) -> Vec<TrajectoryStats> {
        struct Draft {
            tau_last: u32,
            l: u32,
            m: u32,
            sum_signs: i64,
            u_end: f64,
        }
        let drafts: Vec<Draft> = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, i as u64);
                let sk = self.sample_skeleton(&mut rng);
                let u_end: f64 = rng.random();
                Draft {
                    tau_last: sk.last_contact,
                    l: sk.l,
                    m: sk.m,
                    sum_signs: sk.signs.iter().map(|&s| s as i64).sum(),
                    u_end,
                }
            })
            .collect();
        let mut lens: Vec<usize> = drafts
            .iter()
            .map(|d| self.n - d.tau_last as usize)
            .filter(|&l| l > 0)
            .collect();
        lens.sort_unstable();
        lens.dedup();
        let tables = endpoint_tables(self.params.t as usize, &lens);
        drafts
            .into_iter()
            .map(|d| {
                let residual = self.n - d.tau_last as usize;
                let offset = if residual == 0 {
                    0
                } else {
                    tables[&residual].sample(d.u_end)
                };
                TrajectoryStats {
                    s_n: self.params.t as i64 * d.sum_signs + offset,
                    tau_last: d.tau_last,
                    l: d.l,
                    m: d.m,
                    visited_other_interface: d.m > 0,
                }
            })
            .collect()
    }

    /// Reconstruct a full height path for sample `index` by excursion
    /// filling. Small sizes only (figure reproduction).
    pub fn sample_path(&self, seed: u64, index: u64) -> Result<Vec<i64>> {
        let t = self.params.t as usize;
        if self.n > 10_000 || self.n * t > 5_000_000 {
            return Err(Error::Infeasible {
                estimated_ops: (self.n * t) as u128,
                budget: 5_000_000,
            });
        }
        let mut rng = stream(seed, index);
        let sk = self.sample_skeleton(&mut rng);
        let mut path: Vec<i64> = Vec::with_capacity(self.n + 1);
        path.push(0);
        let mut base = 0i64; // interface level in units of T
        let mut prev = 0usize;
        for (&c, &s) in sk.contacts.iter().zip(&sk.signs) {
            let gap = c as usize - prev;
            fill_excursion(t, gap, s, base, &mut rng, &mut path);
            base += s as i64;
            prev = c as usize;
        }
        let residual = self.n - prev;
        if residual > 0 {
            fill_no_contact_segment(t, residual, base, &mut rng, &mut path);
        }
        debug_assert_eq!(path.len(), self.n + 1);
        Ok(path)
    }

    /// Independent route to `log Z`: transfer matrix over heights mod `T`.
    pub fn transfer_log_z(params: ModelParams, n: usize) -> Result<f64> {
        if n % 2 != 0 {
            return Err(Error::Param("N must be even".into()));
        }
        let t = params.t as usize;
        let pen = (-params.delta).exp();
        let mut cur = vec![0.0f64; t];
        let mut nxt = vec![0.0f64; t];
        cur[0] = 1.0;
        let mut log_scale = 0.0f64;
        for step in 1..=n {
            for i in 0..t {
                let left = cur[(i + t - 1) % t];
                let right = cur[(i + 1) % t];
                nxt[i] = 0.5 * (left + right);
            }
            nxt[0] *= pen;
            std::mem::swap(&mut cur, &mut nxt);
            if step % 512 == 0 {
                let s: f64 = cur.iter().sum();
                if s < 1e-100 {
                    for v in cur.iter_mut() {
                        *v /= s;
                    }
                    log_scale += s.ln();
                }
            }
        }
        Ok(kahan_sum(cur.iter().copied()).ln() + log_scale)
    }
}

/// Conditional endpoint law of a walk started on an interface and avoiding
/// all interfaces for `len` steps.
struct EndpointCdf {
    heights: Vec<i64>,
    cdf: Vec<f64>,
}

impl EndpointCdf {
    fn sample(&self, u: f64) -> i64 {
        let i = self.cdf.partition_point(|&c| c < u).min(self.heights.len() - 1);
        self.heights[i]
    }
}

/// One forward taboo-DP sweep, snapshotting the normalized endpoint law at
/// every requested length. Lengths must be sorted and even.
fn endpoint_tables(t: usize, lengths: &[usize]) -> HashMap<usize, EndpointCdf> {
    let mut out = HashMap::new();
    if lengths.is_empty() {
        return out;
    }
    let max_len = *lengths.last().unwrap();
    let width = 2 * t + 1;
    let mut cur = vec![0.0f64; width];
    let mut nxt = vec![0.0f64; width];
    cur[t] = 1.0;
    let mut want = lengths.iter().peekable();
    for step in 1..=max_len {
        let lo = t.saturating_sub(step);
        let hi = (t + step).min(2 * t);
        for (i, slot) in nxt.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let left = if i == 0 { 0.0 } else { cur[i - 1] };
            let right = if i == 2 * t { 0.0 } else { cur[i + 1] };
            *slot = 0.5 * (left + right);
        }
        nxt[t] = 0.0;
        nxt[0] = 0.0;
        nxt[2 * t] = 0.0;
        std::mem::swap(&mut cur, &mut nxt);
        // conditional law only: rescaling is free
        let total: f64 = cur.iter().sum();
        if total > 0.0 && total < 1e-250 {
            for v in cur.iter_mut() {
                *v /= total;
            }
        }
        while let Some(&&l) = want.peek() {
            if l != step {
                break;
            }
            want.next();
            let mut heights = Vec::new();
            let mut cdf = Vec::new();
            let mut acc = 0.0;
            let total: f64 = cur.iter().sum();
            for (i, &v) in cur.iter().enumerate() {
                if v > 0.0 {
                    acc += v / total;
                    heights.push(i as i64 - t as i64);
                    cdf.push(acc);
                }
            }
            if let Some(last) = cdf.last_mut() {
                *last = 1.0;
            }
            out.insert(l, EndpointCdf { heights, cdf });
        }
    }
    out
}

/// Sample a strip bridge: a walk from an interface that stays strictly
/// between neighboring interfaces and ends the gap at the prescribed one.
/// Appends `gap` absolute heights (excluding the start).
fn fill_excursion(
    t: usize,
    gap: usize,
    sign: i8,
    base: i64,
    rng: &mut ChaCha8Rng,
    path: &mut Vec<i64>,
) {
    // direction of the strip: +1 means the excursion lives in (0, T)
    let (dir, target_top) = match sign {
        0 => (if rng.random::<f64>() < 0.5 { 1i64 } else { -1 }, false),
        1 => (1, true),
        -1 => (-1, true),
        _ => unreachable!(),
    };
    // w[l][h]: probability of hitting the target boundary exactly at l from
    // interior height h, staying interior meanwhile
    let width = t + 1;
    let mut w = vec![0.0f64; gap * width];
    let target_idx = if target_top { t } else { 0 };
    w[target_idx] = 1.0; // l = 0 row
    for l in 1..gap {
        let (head, tail) = w.split_at_mut(l * width);
        let prev = &head[(l - 1) * width..];
        let row = &mut tail[..width];
        let mut peak = 0.0f64;
        for h in 1..t {
            row[h] = 0.5 * (prev[h - 1] + prev[h + 1]);
            peak = peak.max(row[h]);
        }
        // only within-row ratios matter for the bridge; rescale rows that
        // drift toward the underflow range
        if peak > 0.0 && peak < 1e-250 {
            let inv = 1.0 / peak;
            for h in 1..t {
                row[h] *= inv;
            }
        }
    }
    let mut h = 1usize; // first step is forced into the strip
    path.push(base * t as i64 + dir * h as i64);
    for l in (1..gap).rev() {
        // remaining steps after this one: l - 1
        let prev = &w[(l - 1) * width..l * width];
        let up = if h + 1 <= t { prev[h + 1] } else { 0.0 };
        let down = if h >= 1 { prev[h - 1] } else { 0.0 };
        let p_up = up / (up + down);
        if rng.random::<f64>() < p_up {
            h += 1;
        } else {
            h -= 1;
        }
        path.push(base * t as i64 + dir * h as i64);
    }
    debug_assert_eq!(h, if target_top { t } else { 0 });
}

/// Sample the final incomplete excursion: stays strictly inside the strip
/// for all `len` steps. Appends `len` absolute heights.
fn fill_no_contact_segment(
    t: usize,
    len: usize,
    base: i64,
    rng: &mut ChaCha8Rng,
    path: &mut Vec<i64>,
) {
    let dir = if rng.random::<f64>() < 0.5 { 1i64 } else { -1 };
    // v[l][h]: survival probability for l more steps from interior h
    let width = t + 1;
    let mut v = vec![0.0f64; len * width];
    for h in 1..t {
        v[h] = 1.0; // l = 0 row: already survived
    }
    for l in 1..len {
        let (head, tail) = v.split_at_mut(l * width);
        let prev = &head[(l - 1) * width..];
        let row = &mut tail[..width];
        let mut peak = 0.0f64;
        for h in 1..t {
            row[h] = 0.5 * (prev[h - 1] + prev[h + 1]);
            peak = peak.max(row[h]);
        }
        if peak > 0.0 && peak < 1e-250 {
            let inv = 1.0 / peak;
            for h in 1..t {
                row[h] *= inv;
            }
        }
    }
    let mut h = 1usize;
    path.push(base * t as i64 + dir * h as i64);
    for l in (1..len).rev() {
        let prev = &v[(l - 1) * width..l * width];
        let up = if h + 1 < t { prev[h + 1] } else { 0.0 };
        let down = if h >= 1 && h - 1 >= 1 { prev[h - 1] } else { 0.0 };
        let p_up = up / (up + down);
        if rng.random::<f64>() < p_up {
            h += 1;
        } else {
            h -= 1;
        }
        path.push(base * t as i64 + dir * h as i64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(t: u32, delta: f64, n: usize) -> PolymerInstance {
        PolymerInstance::build(ModelParams::new(t, delta).unwrap(), n).unwrap()
    }

    #[test]
    fn partition_t2_closed_form() {
        // S_2 is always on an interface for T=2
        let p = inst(2, 0.37, 2);
        assert!((p.partition_function().z - (-0.37f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn partition_n2_t4() {
        // 4 paths: contact (S_2 = 0) with probability 1/2
        let p = inst(4, (2.0f64).ln(), 2);
        assert!((p.partition_function().z - 0.75).abs() < 1e-14);
    }

    #[test]
    fn partition_matches_transfer_matrix() {
        for (t, delta, n) in [(4u32, 0.3f64, 512usize), (10, 0.8, 1024), (16, 0.05, 2048)] {
            let p = inst(t, delta, n);
            let tm = PolymerInstance::transfer_log_z(ModelParams::new(t, delta).unwrap(), n).unwrap();
            assert!(
                (p.partition_function().log_z - tm).abs() < 1e-10,
                "t={t} delta={delta} n={n}: {} vs {tm}",
                p.partition_function().log_z
            );
        }
    }

    #[test]
    fn last_contact_law_sums_to_one() {
        let p = inst(8, 0.5, 600);
        let total = kahan_sum(p.last_contact_law().iter().copied());
        assert!((total - 1.0).abs() < 1e-10);
        // T=2 puts all the mass at r = N
        let p2 = inst(2, 0.9, 64);
        assert!((p2.last_contact_law()[32] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skeleton_invariants_hold_on_samples() {
        let p = inst(4, 0.5, 120);
        for i in 0..200 {
            let mut rng = stream(11, i);
            let sk = p.sample_skeleton(&mut rng);
            sk.validate(4, 120).unwrap();
        }
    }

    #[test]
    fn samples_are_deterministic_per_seed() {
        let p = inst(6, 0.4, 300);
        let a = p.run_samples(64, 42);
        let b = p.run_samples(64, 42);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.s_n, y.s_n);
            assert_eq!(x.tau_last, y.tau_last);
        }
        let c = p.run_samples(64, 43);
        assert!(a.iter().zip(&c).any(|(x, y)| x.s_n != y.s_n));
    }

    #[test]
    fn visited_flag_matches_m() {
        let p = inst(4, 0.2, 200);
        for s in p.run_samples(500, 5) {
            assert_eq!(s.visited_other_interface, s.m > 0);
            assert_eq!(s.s_n.rem_euclid(2), 0);
            assert!(s.s_n.unsigned_abs() as usize <= 200);
        }
    }

    #[test]
    fn full_paths_reproduce_skeleton_and_endpoint() {
        let p = inst(6, 0.3, 400);
        for idx in 0..20u64 {
            let path = p.sample_path(9, idx).unwrap();
            assert_eq!(path.len(), 401);
            assert_eq!(path[0], 0);
            // steps are +-1
            for w in path.windows(2) {
                assert_eq!((w[1] - w[0]).abs(), 1);
            }
            // contacts of the path equal the skeleton of the same stream
            let mut rng = stream(9, idx);
            let sk = p.sample_skeleton(&mut rng);
            let contacts: Vec<u32> = path
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &h)| h.rem_euclid(6) == 0)
                .map(|(i, _)| i as u32)
                .collect();
            assert_eq!(contacts, sk.contacts);
            // endpoint consistency with the signs
            let sum_signs: i64 = sk.signs.iter().map(|&s| s as i64).sum();
            let base = 6 * sum_signs;
            assert!((path[400] - base).unsigned_abs() < 6);
        }
    }

    #[test]
    fn exact_switch_statistics_small_case() {
        // frozen from the 2^N enumeration oracle (see tests/oracles.rs for
        // the live comparison)
        let p = inst(4, 0.3, 14);
        assert!((p.expected_switches() - 0.733374935072).abs() < 1e-10);
        assert!((p.prob_any_switch().unwrap() - (1.0 - 0.408720332321)).abs() < 1e-10);
        assert!((p.variance_endpoint() - 14.0317690284).abs() < 1e-9);
    }

    #[test]
    fn window_and_cdf_probabilities_are_consistent() {
        let p = inst(8, 0.4, 500);
        let le = p.prob_last_contact_le(200);
        let ge = p.prob_contact_window(202);
        assert!((le + ge - 1.0).abs() < 1e-12);
        assert_eq!(p.prob_contact_window(0), 1.0);
    }
}
