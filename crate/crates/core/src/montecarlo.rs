//! Sampling oracles: i.i.d. Sato-Tate and uniform angle sets, and the
//! expectation and variance experiments built on them.
//!
//! Streams come from ChaCha20 seeded with the 64-bit seed; trial `t` uses
//! stream `t` of that key, so trials are independent of scheduling.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{st_density, straighten, Angle};
use crate::error::{invalid, Result};
use crate::paircorr::{r2_fast, AngleSet, PairCorrConfig};

const TABLE_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    SatoTate,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub seed: u64,
    pub model: Model,
    /// ChaCha stream index within the seed.
    pub stream: u64,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64, model: Model) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "sample size must be at least 1"));
        }
        Ok(SampleConfig {
            n,
            seed,
            model,
            stream: 0,
        })
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }
}

/// `H⁻¹` through a table on Chebyshev nodes in `u ∈ [0, 1/2]` and a safeguarded
/// Newton polish; the upper half follows from `H(1 − θ) = 1 − H(θ)`.
///
/// Newton runs on `H(θ)^{1/3}`, which is close to linear near `θ = 0` where `H`
/// itself is cubic.
#[derive(Debug)]
pub struct InverseStraightening {
    u: Vec<f64>,
    theta: Vec<f64>,
}

impl InverseStraightening {
    fn build() -> Self {
        let k = TABLE_NODES - 1;
        let u: Vec<f64> = (0..=k)
            .map(|j| 0.25 * (1.0 - (std::f64::consts::PI * j as f64 / k as f64).cos()))
            .collect();
        let theta = u.iter().map(|&v| bisect(v, 0.0, 0.5)).collect();
        InverseStraightening { u, theta }
    }

    pub fn global() -> &'static InverseStraightening {
        static TABLE: OnceLock<InverseStraightening> = OnceLock::new();
        TABLE.get_or_init(Self::build)
    }

    /// `θ ∈ [0, 1]` with `H(θ) = u`.
    pub fn invert(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if u > 0.5 {
            1.0 - self.invert_lower(1.0 - u)
        } else {
            self.invert_lower(u)
        }
    }

    fn invert_lower(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let j = self.u.partition_point(|&x| x <= u).clamp(1, self.u.len() - 1);
        let (mut lo, mut hi) = (self.theta[j - 1], self.theta[j]);
        let target = u.cbrt();
        let (c0, c1) = (self.u[j - 1].cbrt(), self.u[j].cbrt());
        let mut t = if c1 > c0 {
            lo + (hi - lo) * (target - c0) / (c1 - c0)
        } else {
            lo
        };
        for _ in 0..60 {
            let hv = h(t);
            let f = hv.cbrt() - target;
            if f == 0.0 {
                return t;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = st_density(t).unwrap_or(0.0) / (3.0 * hv.cbrt().powi(2));
            let mut next = if d.is_finite() && d > 0.0 { t - f / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * t {
                return next;
            }
            t = next;
        }
        t
    }
}

fn h(t: f64) -> f64 {
    straighten(Angle::new(t.clamp(0.0, 1.0)).expect("clamped"))
}

fn bisect(u: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Raw draws in `[0, 1]` for one sample.
pub fn sample_thetas(c: &SampleConfig) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(c.seed);
    rng.set_stream(c.stream);
    let inv = InverseStraightening::global();
    (0..c.n)
        .map(|_| {
            let u: f64 = rng.random();
            match c.model {
                Model::Uniform => u,
                Model::SatoTate => inv.invert(u),
            }
        })
        .collect()
}

/// A sample attached to the first `n` primes.
pub fn sample_angles(c: &SampleConfig) -> AngleSet {
    let label = match c.model {
        Model::SatoTate => format!("sato-tate:{}:{}", c.seed, c.stream),
        Model::Uniform => format!("uniform:{}:{}", c.seed, c.stream),
    };
    AngleSet::synthetic(label, &sample_thetas(c)).expect("draws lie in [0, 1]")
}

/// Pairwise summation, fixed by the slice order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
    /// The Poisson limit `A² ĝ(0) ∫ρ̂²`.
    pub target: f64,
    /// `T(g, ρ)/(4L)` at the sample size, the finite-size expectation scale.
    pub main_term: f64,
}

impl TrialSummary {
    /// `|mean − target| / stderr`.
    pub fn z_score(&self) -> f64 {
        if self.stderr > 0.0 {
            (self.mean - self.target).abs() / self.stderr
        } else if self.mean == self.target {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Mean of `R₂` over independent Sato-Tate samples, trial `t` on stream `t`.
///
/// Uses the gridded series route, which equals the kernel route to rounding
/// and is close to linear rather than quadratic in the sample size.
pub fn poisson_expectation_experiment(c: &PairCorrConfig, s: &SampleConfig, trials: usize) -> Result<TrialSummary> {
    if trials < 2 {
        return Err(invalid("trials", "at least 2 trials are needed for an error bar"));
    }
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let cfg = SampleConfig {
                model: Model::SatoTate,
                stream: t,
                ..*s
            };
            r2_fast(&sample_angles(&cfg), c)
        })
        .collect();
    let n = values.len() as f64;
    let mean = pairwise_sum(&values) / n;
    let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    Ok(TrialSummary {
        trials,
        mean,
        stderr: (var / n).sqrt(),
        target: c.poisson(),
        main_term: c.main_term(s.n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub size: usize,
    pub forms: usize,
    pub mean: f64,
    /// Population variance `⟨R₂²⟩ − ⟨R₂⟩²` over the synthetic family.
    pub variance: f64,
}

/// Empirical variance of `R₂` over `forms_per_size` Sato-Tate samples at each size.
/// Form `f` at size index `i` uses stream `(i << 32) | f`.
pub fn variance_trend_experiment(
    c: &PairCorrConfig,
    sizes: &[usize],
    forms_per_size: usize,
    seed: u64,
) -> Result<Vec<VariancePoint>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("sizes", "must be strictly ascending"));
    }
    if forms_per_size == 0 || sizes.first() == Some(&0) {
        return Err(invalid("forms_per_size", "sizes and family size must be positive"));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let values: Vec<f64> = (0..forms_per_size as u64)
                .into_par_iter()
                .map(|f| {
                    let cfg = SampleConfig {
                        n: size,
                        seed,
                        model: Model::SatoTate,
                        stream: ((i as u64) << 32) | f,
                    };
                    r2_fast(&sample_angles(&cfg), c)
                })
                .collect();
            let n = values.len() as f64;
            let mean = pairwise_sum(&values) / n;
            let dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
            Ok(VariancePoint {
                size,
                forms: forms_per_size,
                mean,
                variance: pairwise_sum(&dev) / n,
            })
        })
        .collect()
}

/// Kolmogorov–Smirnov distance of a sample from the uniform law on `[0, 1]`.
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SpectralTestFunction;
    use std::f64::consts::PI;

    #[test]
    fn inverse_is_accurate() {
        let inv = InverseStraightening::global();
        let mut worst: f64 = 0.0;
        for i in 0..=20_000 {
            let t = i as f64 / 20_000.0;
            let back = inv.invert(h(t));
            // Compare in u where H is flat, in θ elsewhere.
            let err = if (0.02..0.98).contains(&t) {
                (back - t).abs()
            } else {
                (h(back) - h(t)).abs()
            };
            worst = worst.max(err);
        }
        assert!(worst < 1e-10, "worst {worst}");
        assert!(inv.invert(0.0) < 1e-15);
        assert!((inv.invert(1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn samples_are_reproducible() {
        let c = SampleConfig::new(500, 42, Model::SatoTate).unwrap();
        assert_eq!(sample_thetas(&c), sample_thetas(&c));
        assert_ne!(sample_thetas(&c), sample_thetas(&c.with_stream(1)));
        assert!(SampleConfig::new(0, 1, Model::Uniform).is_err());
    }

    #[test]
    fn ks_uniformity() {
        let n = 10_000;
        let bound = 1.63 / (n as f64).sqrt();
        let u = sample_thetas(&SampleConfig::new(n, 7, Model::Uniform).unwrap());
        assert!(ks_uniform(&u) < bound);
        let st = sample_thetas(&SampleConfig::new(n, 7, Model::SatoTate).unwrap());
        let straightened: Vec<f64> = st.iter().map(|&t| h(t)).collect();
        assert!(ks_uniform(&straightened) < bound);
        // The raw Sato-Tate sample is visibly not uniform.
        assert!(ks_uniform(&st) > bound);
    }

    #[test]
    fn first_moment_vanishes() {
        let n = 10_000;
        let st = sample_thetas(&SampleConfig::new(n, 3, Model::SatoTate).unwrap());
        let within = |v: &[f64], target: f64| {
            let mean = v.iter().sum::<f64>() / n as f64;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
            (mean - target).abs() < 3.0 * sd / (n as f64).sqrt()
        };
        // a(p) = 2cos(πθ) is orthogonal to the constants under μ.
        let a1: Vec<f64> = st.iter().map(|t| 2.0 * (PI * t).cos()).collect();
        assert!(within(&a1, 0.0));
        // ∫ 2cos(2πt) μ(t) dt = −1, since 2cos(2πθ) = a(p²) − 1.
        let c2: Vec<f64> = st.iter().map(|t| 2.0 * (2.0 * PI * t).cos()).collect();
        assert!(within(&c2, -1.0));
        // a(p²) = 4cos²(πθ) − 1 has Sato-Tate mean 0.
        let a2: Vec<f64> = st.iter().map(|t| 4.0 * (PI * t).cos().powi(2) - 1.0).collect();
        let m2 = a2.iter().sum::<f64>() / n as f64;
        let sd2 = (a2.iter().map(|x| (x - m2).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!(m2.abs() < 3.0 * sd2 / (n as f64).sqrt());
    }

    #[test]
    fn zero_rho_experiment() {
        let c = PairCorrConfig::fejer(0.25, 5)
            .unwrap()
            .with_rho(SpectralTestFunction::zero());
        let s = SampleConfig::new(200, 1, Model::SatoTate).unwrap();
        let sum = poisson_expectation_experiment(&c, &s, 4).unwrap();
        assert_eq!((sum.mean, sum.target), (0.0, 0.0));
        assert!(poisson_expectation_experiment(&c, &s, 1).is_err());
    }

    #[test]
    fn single_form_has_zero_variance() {
        let c = PairCorrConfig::fejer(0.25, 5).unwrap();
        let pts = variance_trend_experiment(&c, &[50, 100], 1, 9).unwrap();
        assert!(pts.iter().all(|p| p.variance == 0.0));
        assert!(variance_trend_experiment(&c, &[100, 50], 3, 9).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-9);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
