//! Brute-force reference implementations by exhaustive path enumeration.
//!
//! These walk all `2^N` sign sequences and are the ground truth the fast
//! paths are tested against. They share no code with the DP/renewal routes.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Everything the polymer measure determines at small `N`, enumerated.
#[derive(Debug, Clone)]
pub struct Enumerated {
    pub z: f64,
    /// last-contact law over even `r` (index `r/2`)
    pub last_contact: Vec<f64>,
    /// joint law of `(tau_L, S_N)`
    pub joint: HashMap<(u32, i64), f64>,
    /// joint law of `(tau_L, interface level at the last contact)`
    pub joint_skeleton: HashMap<(u32, i64), f64>,
    /// endpoint law of `S_N`
    pub endpoint: HashMap<i64, f64>,
    /// law of the switch count `m`
    pub m_law: Vec<f64>,
    pub e_m: f64,
    pub e_s2: f64,
}

/// Exhaustive enumeration of the polymer measure; `n <= 24`.
pub fn enumerate_polymer(t: u32, delta: f64, n: usize) -> Result<Enumerated> {
    if n == 0 || n % 2 != 0 || n > 24 {
        return Err(Error::Param(format!("enumeration needs even 2 <= N <= 24, got {n}")));
    }
    if t < 2 || t % 2 != 0 {
        return Err(Error::Param(format!("even T required, got {t}")));
    }
    let ti = t as i64;
    // e^{-delta k} table by contact count
    let wgt: Vec<f64> = (0..=n).map(|k| (-delta * k as f64).exp()).collect();
    let norm = 0.5f64.powi(n as i32);
    let mut z = 0.0f64;
    let mut last_contact = vec![0.0f64; n / 2 + 1];
    let mut joint: HashMap<(u32, i64), f64> = HashMap::new();
    let mut joint_skeleton: HashMap<(u32, i64), f64> = HashMap::new();
    let mut endpoint: HashMap<i64, f64> = HashMap::new();
    let mut m_law = vec![0.0f64; n + 1];
    let mut e_m = 0.0f64;
    let mut e_s2 = 0.0f64;
    for bits in 0u64..(1u64 << n) {
        let mut s = 0i64;
        let mut contacts = 0usize;
        let mut tau_l = 0u32;
        let mut m = 0u32;
        let mut level = 0i64; // interface index of the previous contact
        for i in 0..n {
            s += if (bits >> i) & 1 == 1 { 1 } else { -1 };
            if s.rem_euclid(ti) == 0 {
                contacts += 1;
                tau_l = (i + 1) as u32;
                let new_level = s / ti;
                if new_level != level {
                    m += 1;
                }
                level = new_level;
            }
        }
        let w = wgt[contacts] * norm;
        z += w;
        last_contact[tau_l as usize / 2] += w;
        *joint.entry((tau_l, s)).or_insert(0.0) += w;
        *joint_skeleton.entry((tau_l, level)).or_insert(0.0) += w;
        *endpoint.entry(s).or_insert(0.0) += w;
        m_law[m as usize] += w;
        e_m += m as f64 * w;
        e_s2 += (s * s) as f64 * w;
    }
    for v in last_contact.iter_mut() {
        *v /= z;
    }
    for v in joint.values_mut() {
        *v /= z;
    }
    for v in joint_skeleton.values_mut() {
        *v /= z;
    }
    for v in endpoint.values_mut() {
        *v /= z;
    }
    for v in m_law.iter_mut() {
        *v /= z;
    }
    Ok(Enumerated {
        z,
        last_contact,
        joint,
        joint_skeleton,
        endpoint,
        m_law,
        e_m: e_m / z,
        e_s2: e_s2 / z,
    })
}

/// Enumerated hitting law of the first contact, `(q0, q1)` on even times.
pub fn enumerate_hitting(t: u32, n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_max == 0 || n_max % 2 != 0 || n_max > 24 {
        return Err(Error::Param(format!("enumeration needs even 2 <= n <= 24, got {n_max}")));
    }
    let ti = t as i64;
    let norm = 0.5f64.powi(n_max as i32);
    let mut q0 = vec![0.0; n_max / 2 + 1];
    let mut q1 = vec![0.0; n_max / 2 + 1];
    for bits in 0u64..(1u64 << n_max) {
        let mut s = 0i64;
        for i in 0..n_max {
            s += if (bits >> i) & 1 == 1 { 1 } else { -1 };
            if s.rem_euclid(ti) == 0 {
                if s == 0 {
                    q0[(i + 1) / 2] += norm;
                } else if s == ti {
                    q1[(i + 1) / 2] += norm;
                }
                break;
            }
        }
    }
    Ok((q0, q1))
}

/// Enumerated `E[e^{-H_k} 1{k in tau^T}]` (the tilt-identity left side).
pub fn enumerate_tilt(t: u32, delta: f64, k: usize) -> Result<f64> {
    if k == 0 || k % 2 != 0 || k > 24 {
        return Err(Error::Param(format!("enumeration needs even 2 <= k <= 24, got {k}")));
    }
    let ti = t as i64;
    let norm = 0.5f64.powi(k as i32);
    let mut acc = 0.0f64;
    for bits in 0u64..(1u64 << k) {
        let mut s = 0i64;
        let mut contacts = 0usize;
        for i in 0..k {
            s += if (bits >> i) & 1 == 1 { 1 } else { -1 };
            if s.rem_euclid(ti) == 0 {
                contacts += 1;
            }
        }
        if s.rem_euclid(ti) == 0 {
            acc += (-delta * contacts as f64).exp() * norm;
        }
    }
    Ok(acc)
}

/// Enumerated last-contact law of the plain walk (`delta = 0` oracle).
pub fn enumerate_srw_last_contact(t: u32, n: usize) -> Result<Vec<f64>> {
    Ok(enumerate_polymer(t, 0.0, n)?.last_contact)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_partition_values() {
        // T=2, N=2: S_2 always on an interface
        let e = enumerate_polymer(2, 0.37, 2).unwrap();
        assert!((e.z - (-0.37f64).exp()).abs() < 1e-15);
        // T=4, N=2, delta = ln 2: Z = (1/2) e^{-delta} + 1/2 = 3/4
        let e = enumerate_polymer(4, (2.0f64).ln(), 2).unwrap();
        assert!((e.z - 0.75).abs() < 1e-15);
    }

    #[test]
    fn hitting_enumeration_matches_hand_values() {
        let (q0, q1) = enumerate_hitting(4, 4).unwrap();
        assert!((q0[1] - 0.5).abs() < 1e-15);
        assert!((q0[2] - 0.125).abs() < 1e-15);
        assert!((q1[2] - 0.0625).abs() < 1e-15);
    }
}
