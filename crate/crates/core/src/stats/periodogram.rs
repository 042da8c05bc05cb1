//! Periodogram and Fisher's g test for a hidden periodic component.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use statrs::function::factorial::ln_binomial;

use super::Method;
use crate::error::{Error, Result};

pub const MIN_PERIODOGRAM_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Periodogram {
    pub n: usize,
    /// Cycles per step, `k/n` for `k = 1..=n/2`.
    pub frequencies: Vec<f64>,
    /// `|X_k|² / n` of the mean-removed series.
    pub power: Vec<f64>,
    /// `None` when the spectrum is identically zero.
    pub dominant_frequency: Option<f64>,
    pub fisher_g: f64,
    pub fisher_p: f64,
    pub method: Method,
}

/// `P(G ≥ g)` for Fisher's statistic over `m` ordinates under white noise.
///
/// Uses the exact alternating series unless its leading term exceeds 5, where
/// the series cancels badly and the p-value is within 1% of one; then the
/// independent-maxima approximation is returned instead.
pub fn fisher_g_pvalue(g: f64, m: usize) -> (f64, Method) {
    if m <= 1 {
        return (1.0, Method::Exact);
    }
    if g.is_nan() || g <= 0.0 {
        return (1.0, Method::Exact);
    }
    if g >= 1.0 {
        return (0.0, Method::Exact);
    }
    let mf = m as f64;
    let lead = mf * (1.0 - g).powf(mf - 1.0);
    if lead > 5.0 {
        let tail = (mf - 1.0) * (1.0 - g).ln();
        let p = -(mf * (-tail.exp()).ln_1p()).exp_m1();
        return (p.clamp(0.0, 1.0), Method::Asymptotic);
    }
    let jmax = ((1.0 / g).floor() as usize).min(m);
    let mut p = 0.0;
    for j in 1..=jmax {
        let base = 1.0 - j as f64 * g;
        if base <= 0.0 {
            break;
        }
        let term = (ln_binomial(m as u64, j as u64) + (mf - 1.0) * base.ln()).exp();
        p += if j % 2 == 1 { term } else { -term };
    }
    (p.clamp(0.0, 1.0), Method::Exact)
}

/// Power spectrum of the mean-removed series at the positive Fourier
/// frequencies, including Nyquist for even lengths.
pub fn periodogram(series: &[f64]) -> Result<Periodogram> {
    let n = series.len();
    if n < MIN_PERIODOGRAM_LEN {
        return Err(Error::TooShort { len: n });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("series contains non-finite values".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let m = n / 2;
    let frequencies: Vec<f64> = (1..=m).map(|k| k as f64 / n as f64).collect();
    let power: Vec<f64> = buf[1..=m].iter().map(|c| c.norm_sqr() / n as f64).collect();
    let total: f64 = power.iter().sum();
    let (k_max, p_max) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, p)| if p > best.1 { (k, p) } else { best });

    // Rounding leaves ~1e-30 power on a constant series.
    let flat = total <= 1e-20 * n as f64;
    let (dominant_frequency, fisher_g) = if flat {
        (None, 0.0)
    } else {
        (Some(frequencies[k_max]), p_max / total)
    };
    let (fisher_p, method) = fisher_g_pvalue(fisher_g, m);
    Ok(Periodogram {
        n,
        frequencies,
        power,
        dominant_frequency,
        fisher_g,
        fisher_p,
        method,
    })
}
