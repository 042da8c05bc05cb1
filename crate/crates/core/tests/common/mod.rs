//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use spce::rng::seeded;
use spce::stats::CategoricalSeries;
use statrs::distribution::{ContinuousCDF, Normal};

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of `f` over [lo, hi] with an n-point Gauss–Legendre rule.
pub fn integrate(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let half = (hi - lo) / 2.0;
    let mid = (hi + lo) / 2.0;
    gauss_legendre(n).iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

fn cap_point(center_theta: f64, t: f64, phi: f64) -> [f64; 3] {
    // Point at polar offset acos(1-t) and azimuth phi about a center in the
    // x-z plane at angle center_theta from +z.
    let c = 1.0 - t;
    let s = (t * (2.0 - t)).max(0.0).sqrt();
    let local = [s * phi.cos(), s * phi.sin(), c];
    let (ct, st) = (center_theta.cos(), center_theta.sin());
    // Rotation about y taking +z to (st, 0, ct).
    [ct * local[0] + st * local[2], local[1], -st * local[0] + ct * local[2]]
}

/// `-⟨a·b⟩` over independent solid-angle-uniform caps of sizes `eps_a`,
/// `eps_b` centered in the x-z plane `theta` apart, by 4-D Gauss–Legendre.
pub fn smeared_correlation_quadrature(eps_a: f64, eps_b: f64, theta: f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let map = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        rule.iter()
            .map(|&(x, w)| ((hi + lo) / 2.0 + (hi - lo) / 2.0 * x, w * (hi - lo) / 2.0))
            .collect()
    };
    let ta = if eps_a > 0.0 { map(0.0, eps_a) } else { vec![(0.0, 1.0)] };
    let tb = if eps_b > 0.0 { map(0.0, eps_b) } else { vec![(0.0, 1.0)] };
    let phis = map(0.0, 2.0 * PI);
    let norm_a = if eps_a > 0.0 { eps_a * 2.0 * PI } else { 2.0 * PI };
    let norm_b = if eps_b > 0.0 { eps_b * 2.0 * PI } else { 2.0 * PI };
    let mut acc = 0.0;
    for &(t1, w1) in &ta {
        for &(p1, v1) in &phis {
            let a = cap_point(0.0, t1, p1);
            for &(t2, w2) in &tb {
                for &(p2, v2) in &phis {
                    let b = cap_point(theta, t2, p2);
                    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
                    acc += w1 * v1 * w2 * v2 * -dot;
                }
            }
        }
    }
    acc / (norm_a * norm_b)
}

/// Calls `f` with every `k`-subset of `0..n` as a membership mask.
pub fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[bool])) {
    fn go(i: usize, n: usize, left: usize, mask: &mut Vec<bool>, f: &mut impl FnMut(&[bool])) {
        if left == 0 {
            f(mask);
            return;
        }
        if n - i < left {
            return;
        }
        mask[i] = true;
        go(i + 1, n, left - 1, mask, f);
        mask[i] = false;
        go(i + 1, n, left, mask, f);
    }
    let mut mask = vec![false; n];
    go(0, n, k, &mut mask, f);
}

/// Mid-ranks (1-based) of the pooled values.
pub fn midranks(pooled: &[f64]) -> Vec<f64> {
    pooled
        .iter()
        .map(|&v| {
            let below = pooled.iter().filter(|&&w| w < v).count() as f64;
            let equal = pooled.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Exact two-sided WMW p-value by enumerating every relabeling of the pooled
/// sample: `2·min(P(U ≤ u), P(U ≥ u))`, capped at one.
pub fn wmw_enumeration_p(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let ranks = midranks(&pooled);
    let n1 = x.len();
    let u_of = |mask: &[bool]| -> f64 {
        let r: f64 = ranks.iter().zip(mask).filter(|(_, &m)| m).map(|(r, _)| r).sum();
        r - (n1 * (n1 + 1)) as f64 / 2.0
    };
    let observed: Vec<bool> = (0..pooled.len()).map(|i| i < n1).collect();
    let u_obs = u_of(&observed);
    let (mut le, mut ge, mut all) = (0u64, 0u64, 0u64);
    for_each_subset(pooled.len(), n1, &mut |m| {
        let u = u_of(m);
        all += 1;
        if u <= u_obs + 1e-9 {
            le += 1;
        }
        if u >= u_obs - 1e-9 {
            ge += 1;
        }
    });
    (2.0 * le.min(ge) as f64 / all as f64).min(1.0)
}

/// Exact two-sided normal-scores p-value, `P(|T − μ| ≥ |t − μ|)`, by enumeration.
pub fn normal_scores_enumeration_p(x: &[f64], y: &[f64]) -> f64 {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = pooled.len();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let scores: Vec<f64> = midranks(&pooled)
        .iter()
        .map(|r| normal.inverse_cdf(r / (n as f64 + 1.0)))
        .collect();
    let n1 = x.len();
    let mean = n1 as f64 * scores.iter().sum::<f64>() / n as f64;
    let t_of = |mask: &[bool]| -> f64 { scores.iter().zip(mask).filter(|(_, &m)| m).map(|(s, _)| s).sum() };
    let observed: Vec<bool> = (0..n).map(|i| i < n1).collect();
    let dev = (t_of(&observed) - mean).abs();
    let (mut hits, mut all) = (0u64, 0u64);
    for_each_subset(n, n1, &mut |m| {
        all += 1;
        if (t_of(m) - mean).abs() >= dev - 1e-10 {
            hits += 1;
        }
    });
    hits as f64 / all as f64
}

pub fn count_runs(seq: &[bool]) -> usize {
    if seq.is_empty() {
        0
    } else {
        1 + seq.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Lower and upper tail of the runs count over all arrangements of the
/// sequence's symbols.
pub fn runs_enumeration_tails(seq: &[bool]) -> (f64, f64) {
    let n = seq.len();
    let ones = seq.iter().filter(|&&b| b).count();
    let r_obs = count_runs(seq);
    let (mut le, mut ge, mut all) = (0u64, 0u64, 0u64);
    for_each_subset(n, ones, &mut |m| {
        let r = count_runs(m);
        all += 1;
        if r <= r_obs {
            le += 1;
        }
        if r >= r_obs {
            ge += 1;
        }
    });
    (le as f64 / all as f64, ge as f64 / all as f64)
}

/// Periodogram ordinates `|Σ x_t e^{-2πikt/n}|² / n` for `k = 1..=n/2` of the
/// mean-removed series, by direct summation.
pub fn direct_dft_power(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    (1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in series.iter().enumerate() {
                let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += (x - mean) * ang.cos();
                im += (x - mean) * ang.sin();
            }
            (re * re + im * im) / n as f64
        })
        .collect()
}

pub fn draw_category<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u32;
        }
    }
    (probs.len() - 1) as u32
}

pub fn draw_counts<R: Rng + ?Sized>(n: usize, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut c = vec![0u64; probs.len()];
    for _ in 0..n {
        c[draw_category(probs, rng) as usize] += 1;
    }
    c
}

/// Poisson-timed categorical series whose category law in event `i` is
/// `law(i)`.
pub fn timed_series(n: usize, n_categories: u32, rate_hz: f64, seed: u64, law: impl Fn(usize) -> Vec<f64>) -> CategoricalSeries {
    let mut rng = seeded(seed);
    let gap = Exp::new(rate_hz / 1e9).unwrap();
    let mut t = 0.0;
    let mut values = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    for i in 0..n {
        t += gap.sample(&mut rng);
        times.push(t as u64);
        values.push(draw_category(&law(i), &mut rng));
    }
    CategoricalSeries::with_timestamps(values, times, n_categories).unwrap()
}

/// Window width that cuts the series' time span into `k` segments.
pub fn window_for_segments(series: &CategoricalSeries, k: u64) -> u64 {
    let ts = series.timestamps().unwrap();
    let span = ts[ts.len() - 1] - ts[0];
    span / k + 1
}

pub fn alternating(n: usize) -> Vec<bool> {
    (0..n).map(|i| i % 2 == 0).collect()
}

/// Binomial standard error of a rejection rate `alpha` over `n` trials.
pub fn rate_sigma(alpha: f64, n: usize) -> f64 {
    (alpha * (1.0 - alpha) / n as f64).sqrt()
}
