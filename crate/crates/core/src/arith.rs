//! Sato-Tate measure, the straightening map, Hecke angles, and the
//! Chebyshev identities satisfied by normalized Hecke eigenvalues.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Rounding slack accepted above the Deligne bound before an eigenvalue is rejected.
pub const DELIGNE_SLACK: f64 = 1e-9;

/// Default tolerance for the product identities in [`check_hecke_products`].
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

/// Largest index accepted by [`check_hecke_products`].
pub const HECKE_INDEX_CAP: u32 = 200;

/// A normalized Hecke angle `θ ∈ [0, 1]` with `a(p) = 2 cos(πθ)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&theta) {
            Ok(Angle(theta))
        } else {
            Err(Error::AngleOutOfRange(theta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The reflected angle `1 − θ`.
    pub fn mirror(self) -> Angle {
        Angle(1.0 - self.0)
    }

    /// `2 cos(πθ)`, the normalized eigenvalue at the prime itself.
    pub fn eigenvalue(self) -> f64 {
        2.0 * (PI * self.0).cos()
    }
}

/// Primes `p ≤ x` coprime to the level `N`, in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeWindow {
    x: u64,
    level: u64,
    primes: Vec<u64>,
}

impl PrimeWindow {
    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `π_N(x)`.
    pub fn count(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// The first `n` primes at level 1, used to host synthetic angle sets.
    pub fn first_primes(n: usize) -> PrimeWindow {
        if n == 0 {
            return PrimeWindow {
                x: 1,
                level: 1,
                primes: Vec::new(),
            };
        }
        let x = primal::StreamingSieve::nth_prime(n) as u64;
        prime_window(x, 1)
    }

    /// Reorders the primes; used by symmetry tests that permute an angle set.
    pub(crate) fn with_primes(&self, primes: Vec<u64>) -> PrimeWindow {
        PrimeWindow {
            x: self.x,
            level: self.level,
            primes,
        }
    }
}

/// Sieve of the primes `p ≤ x` with `gcd(p, N) = 1`. Returns an empty window for `x < 2`.
pub fn prime_window(x: u64, level: u64) -> PrimeWindow {
    let level = level.max(1);
    if x < 2 {
        return PrimeWindow {
            x,
            level,
            primes: Vec::new(),
        };
    }
    let sieve = primal::Sieve::new(x as usize);
    let primes = sieve
        .primes_from(2)
        .take_while(|&p| p as u64 <= x)
        .map(|p| p as u64)
        .filter(|p| !level.is_multiple_of(*p))
        .collect();
    PrimeWindow { x, level, primes }
}

/// Sato-Tate density `μ(t) = 2 sin²(πt)` on `[0, 1]`.
pub fn st_density(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::AngleOutOfRange(t));
    }
    let s = (PI * t).sin();
    Ok(2.0 * s * s)
}

/// `H(θ) = θ − sin(2πθ)/(2π)`, the distribution function of the Sato-Tate measure.
pub fn straighten(theta: Angle) -> f64 {
    let t = theta.value();
    // Evaluating on the nearer half keeps H(1 − θ) = 1 − H(θ) tight.
    if t <= 0.5 {
        straighten_half(t)
    } else {
        1.0 - straighten_half(1.0 - t)
    }
}

fn straighten_half(t: f64) -> f64 {
    if t < 0.05 {
        // θ − sin(2πθ)/(2π) cancels badly near 0; sum the Taylor tail instead.
        let x = 2.0 * PI * t;
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut acc: f64 = 0.0;
        let mut k = 3.0;
        while term.abs() > 1e-18 * acc.abs().max(f64::MIN_POSITIVE) {
            acc += term;
            term *= -x2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        acc / (2.0 * PI)
    } else {
        t - (2.0 * PI * t).sin() / (2.0 * PI)
    }
}

/// `θ = arccos(a/2)/π`; values within [`DELIGNE_SLACK`] of `±2` are clamped.
pub fn angle_from_eigenvalue(a_p: f64) -> Result<Angle> {
    if !a_p.is_finite() || a_p.abs() > 2.0 + DELIGNE_SLACK {
        return Err(Error::DeligneBound(a_p));
    }
    let c = (a_p / 2.0).clamp(-1.0, 1.0);
    Ok(Angle(c.acos() / PI))
}

/// Normalized `a(p^m) = sin((m+1)πθ)/sin(πθ)` by the three-term recurrence.
pub fn chebyshev_eigenvalue(theta: Angle, m: usize) -> f64 {
    let c = theta.eigenvalue();
    let (mut prev, mut cur) = (1.0, c);
    if m == 0 {
        return 1.0;
    }
    for _ in 1..m {
        let next = c * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// All values `a(p^0), …, a(p^m_max)` in one pass.
pub fn chebyshev_eigenvalues(theta: Angle, m_max: usize) -> Vec<f64> {
    let c = theta.eigenvalue();
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(1.0);
    if m_max >= 1 {
        out.push(c);
    }
    for m in 2..=m_max {
        let next = c * out[m - 1] - out[m - 2];
        out.push(next);
    }
    out
}

/// Both sides of `2 cos(2πlθ) = a(p^{2l}) − a(p^{2l−2})`, with the `l = 0` case `(2, 2)`.
pub fn check_cosine_identity(theta: Angle, l: usize) -> (f64, f64) {
    if l == 0 {
        return (2.0, 2.0);
    }
    let lhs = 2.0 * (2.0 * PI * l as f64 * theta.value()).cos();
    let x = chebyshev_eigenvalues(theta, 2 * l);
    (lhs, x[2 * l] - x[2 * l - 2])
}

fn scaled_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs())
}

/// Largest scaled residual of the product identities at one angle.
///
/// Checks
/// * `a(p^i) a(p^j) = Σ_{t ≤ min(i,j)} a(p^{i+j−2t})`;
/// * the product of differences `(a(p^{2n₁}) − a(p^{2n₁−2}))(a(p^{2n₂}) − a(p^{2n₂−2}))`
///   for `n₁ = l`, `n₂ = n` when both are positive;
/// * `a(p^{2l})(a(p^{2n}) − a(p^{2n−2}))` split by `l ≥ n` and `l < n` when `n ≥ 1`.
///
/// Residuals are relative to `max(1, |lhs|, |rhs|)`.
pub fn hecke_product_residual(theta: Angle, i: u32, j: u32, l: u32, n: u32) -> Result<f64> {
    for (name, v) in [("i", i), ("j", j), ("l", l), ("n", n)] {
        if v > HECKE_INDEX_CAP {
            return Err(invalid(name, format!("index {v} exceeds the cap {HECKE_INDEX_CAP}")));
        }
    }
    let (i, j, l, n) = (i as usize, j as usize, l as usize, n as usize);
    let top = (i + j).max(4 * l.max(n)).max(2 * (l + n)) + 2;
    let x = chebyshev_eigenvalues(theta, top);
    let d = |m: usize| x[2 * m] - x[2 * m - 2];
    let mut worst: f64 = 0.0;

    let lhs = x[i] * x[j];
    let rhs: f64 = (0..=i.min(j)).map(|t| x[i + j - 2 * t]).sum();
    worst = worst.max(scaled_residual(lhs, rhs));

    if l >= 1 && n >= 1 {
        let (n1, n2) = (l, n);
        let lhs = d(n1) * d(n2);
        let rhs = if n1 == n2 {
            d(2 * n1) + 2.0
        } else {
            let gap = n1.abs_diff(n2);
            d(n1 + n2) + d(gap)
        };
        worst = worst.max(scaled_residual(lhs, rhs));
    }

    if n >= 1 {
        let lhs = x[2 * l] * d(n);
        let rhs = if l >= n {
            x[2 * l + 2 * n] + x[2 * l - 2 * n]
        } else {
            x[2 * l + 2 * n] - x[2 * n - 2 * l - 2]
        };
        worst = worst.max(scaled_residual(lhs, rhs));
    }
    Ok(worst)
}

/// Evaluates the product identities at both angles; `true` iff every residual is
/// below [`IDENTITY_TOLERANCE`]. The second angle stands in for a second prime.
pub fn check_hecke_products(theta1: Angle, theta2: Angle, i: u32, j: u32, l: u32, n: u32) -> Result<bool> {
    let r1 = hecke_product_residual(theta1, i, j, l, n)?;
    let r2 = hecke_product_residual(theta2, i, j, l, n)?;
    Ok(r1.max(r2) < IDENTITY_TOLERANCE)
}
