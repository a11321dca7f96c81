//! Cosine sums `Σ_j c_j cos(2πnθ_j)` for all `0 ≤ n ≤ nmax` by Gaussian gridding
//! onto an oversampled grid followed by one FFT.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Half-width of the spreading stencil in grid points.
const SPREAD: i64 = 14;
/// Grid oversampling ratio.
const OVERSAMPLE: usize = 2;

/// `out[n] = Σ_j weights[j]·cos(2πn·points[j])` for `0 ≤ n ≤ nmax`.
///
/// Absolute error is about `1e-12·Σ|weights|`.
pub fn cosine_sums(points: &[f64], weights: &[f64], nmax: usize) -> Vec<f64> {
    assert_eq!(points.len(), weights.len());
    let m = 2 * (nmax + 1);
    let mr = smooth_size(OVERSAMPLE * m);
    let r = mr as f64 / m as f64;
    let tau = PI * SPREAD as f64 / ((m * m) as f64 * r * (r - 0.5));
    let h = 2.0 * PI / mr as f64;
    let mut grid = vec![Complex64::new(0.0, 0.0); mr];
    for (&t, &w) in points.iter().zip(weights) {
        let x = 2.0 * PI * (t - t.floor());
        let m0 = (x / h).floor() as i64;
        for k in m0 - SPREAD + 1..=m0 + SPREAD {
            let d = k as f64 * h - x;
            let idx = k.rem_euclid(mr as i64) as usize;
            grid[idx].re += w * (-d * d / (4.0 * tau)).exp();
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(mr).process(&mut grid);
    let scale = (PI / tau).sqrt() / mr as f64;
    (0..=nmax)
        .map(|n| {
            let nf = n as f64;
            scale * (nf * nf * tau).exp() * grid[n].re
        })
        .collect()
}

/// Smallest `2^a 3^b 5^c ≥ n`, a fast FFT length.
fn smooth_size(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1;
    while p2 < 2 * n {
        let mut p3 = p2;
        while p3 < 2 * n {
            let mut p5 = p3;
            while p5 < n {
                p5 *= 5;
            }
            best = best.min(p5);
            p3 *= 3;
        }
        p2 *= 2;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_direct_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, nmax) in [(1, 5), (37, 100), (500, 1200), (3000, 700)] {
            let pts: Vec<f64> = (0..n).map(|_| rng.random()).collect();
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.3).collect();
            let fast = cosine_sums(&pts, &w, nmax);
            let norm: f64 = w.iter().map(|v| v.abs()).sum();
            for k in [0, 1, nmax / 3, nmax / 2, nmax] {
                let direct: f64 = pts
                    .iter()
                    .zip(&w)
                    .map(|(t, c)| c * (2.0 * PI * k as f64 * t).cos())
                    .sum();
                assert!((fast[k] - direct).abs() < 1e-11 * norm, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(1), 1);
        assert_eq!(smooth_size(7), 8);
        assert_eq!(smooth_size(80_004), 81_000);
    }

    #[test]
    fn endpoints_wrap() {
        let fast = cosine_sums(&[0.0, 1.0, 0.5], &[1.0, 1.0, 1.0], 4);
        for (k, v) in fast.iter().enumerate() {
            let direct = 2.0 + if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - direct).abs() < 1e-11);
        }
    }
}
