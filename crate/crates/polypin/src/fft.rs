//! Truncated real convolutions and power-series inversion.
//!
//! Small products run directly with compensated summation; large ones go
//! through rustfft. `invert_one_minus` is the Newton doubling iteration for
//! `u = 1/(1 - F)` used by the renewal mass function when the direct
//! recurrence would be too expensive.

use crate::error::{Error, Result};
use crate::util::Kahan;
use rustfft::{num_complex::Complex, FftPlanner};

const DIRECT_COST_LIMIT: usize = 1 << 24;

/// `(a * b)[0..=out_len]`, linear convolution truncated.
pub(crate) fn convolve_trunc(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let la = a.len().min(out_len + 1);
    let lb = b.len().min(out_len + 1);
    if la == 0 || lb == 0 {
        return vec![0.0; out_len + 1];
    }
    if la.min(lb).saturating_mul(out_len + 1) <= DIRECT_COST_LIMIT {
        convolve_direct(&a[..la], &b[..lb], out_len)
    } else {
        convolve_fft(&a[..la], &b[..lb], out_len)
    }
}

fn convolve_direct(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len + 1];
    // iterate over the shorter operand in the inner loop
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    for (n, slot) in out.iter_mut().enumerate() {
        let mut acc = Kahan::default();
        let j_lo = n.saturating_sub(long.len() - 1);
        let j_hi = n.min(short.len() - 1);
        for j in j_lo..=j_hi {
            acc.add(short[j] * long[n - j]);
        }
        *slot = acc.value();
    }
    out
}

fn convolve_fft(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let need = (a.len() + b.len() - 1).min(out_len + 1);
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = (0..size)
        .map(|i| Complex::new(a.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    let mut fb: Vec<Complex<f64>> = (0..size)
        .map(|i| Complex::new(b.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    let mut out = vec![0.0; out_len + 1];
    for (slot, v) in out.iter_mut().zip(fa.iter().take(need)) {
        *slot = v.re * scale;
    }
    out
}

/// `u = 1/(1 - F) mod x^{half+1}` where `F(x) = sum_{k>=1} f[k] x^k`.
///
/// Newton doubling on top of a direct base segment; the result is verified
/// against the renewal recurrence and tiny FFT-round-off negatives are
/// clamped, anything below -1e-13 is an error.
pub(crate) fn invert_one_minus(f: &[f64], half: usize) -> Result<Vec<f64>> {
    debug_assert!(f.is_empty() || f[0] == 0.0);
    let mut u = vec![0.0; half + 1];
    u[0] = 1.0;
    let base = half.min(4096);
    for n in 1..=base {
        let mut acc = Kahan::default();
        let k_hi = n.min(f.len().saturating_sub(1));
        for k in 1..=k_hi {
            acc.add(f[k] * u[n - k]);
        }
        u[n] = acc.value();
    }
    let mut k = base;
    while k < half {
        let k2 = (2 * k).min(half);
        let t = convolve_trunc(f, &u[..=k], k2);
        // r = 1 - (1 - F) u  (zero through x^k up to round-off)
        let mut r = vec![0.0; k2 + 1];
        r[0] = 1.0 - u[0] + t[0];
        for i in 1..=k2 {
            r[i] = t[i] - u[i];
        }
        let corr = convolve_trunc(&u[..=k], &r, k2);
        for i in (k + 1)..=k2 {
            u[i] = corr[i];
        }
        k = k2;
    }
    for v in u.iter_mut() {
        if *v < 0.0 {
            if *v >= -1e-13 {
                *v = 0.0;
            } else {
                return Err(Error::Numeric(format!(
                    "series inversion produced {v:e}, below the round-off clamp"
                )));
            }
        }
    }
    // verify the renewal recurrence u = e0 + F u
    let t = convolve_trunc(f, &u, half);
    let mut worst = (u[0] - 1.0 - t[0]).abs();
    for i in 1..=half {
        worst = worst.max((u[i] - t[i]).abs());
    }
    if worst > 1e-9 {
        return Err(Error::Numeric(format!(
            "series inversion residual {worst:e} exceeds 1e-9"
        )));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_and_fft_agree() {
        let a: Vec<f64> = (0..800).map(|i| ((i * 37 % 101) as f64) / 101.0).collect();
        let b: Vec<f64> = (0..500).map(|i| ((i * 53 % 97) as f64) / 97.0).collect();
        let d = convolve_direct(&a, &b, 1100);
        let f = convolve_fft(&a, &b, 1100);
        for (x, y) in d.iter().zip(&f) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn inversion_matches_direct_recurrence() {
        // geometric-ish gap law
        let mut f = vec![0.0; 20000];
        let mut mass = 0.0;
        for (k, slot) in f.iter_mut().enumerate().skip(1) {
            *slot = 0.1 * (0.9f64).powi(k as i32);
            mass += *slot;
        }
        assert!(mass < 1.0);
        let u = invert_one_minus(&f, 19999).unwrap();
        let mut direct = vec![0.0; 20000];
        direct[0] = 1.0;
        for n in 1..20000 {
            let mut s = Kahan::default();
            for k in 1..=n {
                s.add(f[k] * direct[n - k]);
            }
            direct[n] = s.value();
        }
        for n in 0..20000 {
            assert!(
                (u[n] - direct[n]).abs() < 1e-10,
                "n={n}: {} vs {}",
                u[n],
                direct[n]
            );
        }
    }
}
