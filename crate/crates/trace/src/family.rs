//! Family averages over newforms, eigenvalues of small newspaces, and family
//! moments of the pair correlation statistic.

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use stpair_core::arith::{angle_from_eigenvalue, prime_window};
use stpair_core::paircorr::{klm_decomposition, r2_series, AngleSet, PairCorrConfig};

use crate::arith::{exact_sqrt, gcd, nu, sigma0};
use crate::error::{invalid, Error, Result};
use crate::formula::{normalize, trace_tn_new, validate};

/// Newspace dimension as `u64`, rejecting empty families.
pub fn family_size(level: u64, weight: u32) -> Result<u64> {
    validate(level, weight, 1)?;
    let dim = trace_tn_new(level, weight, 1)?;
    match dim.to_u64() {
        Some(0) => Err(Error::EmptyFamily { level, weight }),
        Some(d) => Ok(d),
        None => Err(Error::Engine(format!("negative newspace dimension {dim}"))),
    }
}

/// `Σ_f a_f(n)` with `a_f` normalized by `n^{(k−1)/2}`.
pub fn family_sum(level: u64, weight: u32, n: u64) -> Result<f64> {
    Ok(normalize(&trace_tn_new(level, weight, n)?, n, weight))
}

/// `⟨a_f(n)⟩ = Tr^new T_n / (n^{(k−1)/2}·|F|)`.
pub fn family_avg(level: u64, weight: u32, n: u64) -> Result<f64> {
    let dim = family_size(level, weight)?;
    Ok(family_sum(level, weight, n)? / dim as f64)
}

/// How the trace-estimate residual is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorScale {
    /// `n·σ₀(n)·√N`, valid for every level.
    #[default]
    SqrtLevel,
    /// `n·σ₀(n)·4^{ν(N)}`, the squarefree-level form.
    FourNu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEstimate {
    pub level: u64,
    pub weight: u32,
    pub n: u64,
    pub family_size: u64,
    pub sum: f64,
    /// `|F|/√n` for square `n`, else 0.
    pub main_term: f64,
    pub residual: f64,
    pub scale: f64,
    pub normalized_residual: f64,
    pub error_scale: ErrorScale,
}

pub fn check_trace_estimate(level: u64, weight: u32, n: u64, error_scale: ErrorScale) -> Result<TraceEstimate> {
    let dim = family_size(level, weight)?;
    let sum = family_sum(level, weight, n)?;
    let main_term = match exact_sqrt(n) {
        Some(m) => dim as f64 / m as f64,
        None => 0.0,
    };
    let level_factor = match error_scale {
        ErrorScale::SqrtLevel => (level as f64).sqrt(),
        ErrorScale::FourNu => 4f64.powi(nu(level) as i32),
    };
    let scale = n as f64 * sigma0(n) as f64 * level_factor;
    let residual = sum - main_term;
    Ok(TraceEstimate {
        level,
        weight,
        n,
        family_size: dim,
        sum,
        main_term,
        residual,
        scale,
        normalized_residual: residual / scale,
        error_scale,
    })
}

/// Guards on eigenvalue extraction: the trace at `p^d` (and the pairing traces at
/// `p₀²p`) grow with both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenCaps {
    pub d_max: u64,
    pub p_max: u64,
}

impl Default for EigenCaps {
    fn default() -> Self {
        EigenCaps { d_max: 3, p_max: 20 }
    }
}

impl EigenCaps {
    fn check(&self, dim: u64, p: u64) -> Result<()> {
        if dim > self.d_max {
            return Err(Error::CapExceeded {
                what: "newspace dimension",
                reason: format!(
                    "{dim} > {}; extraction needs traces up to T_{{p^{dim}}} and a degree-{dim} root solve",
                    self.d_max
                ),
            });
        }
        if p > self.p_max {
            return Err(Error::CapExceeded {
                what: "prime",
                reason: format!(
                    "{p} > {}; the trace at p^{dim} costs about 2·p^{{{dim}/2}} class-number terms",
                    self.p_max
                ),
            });
        }
        Ok(())
    }
}

fn binomial(n: u64, k: i64) -> f64 {
    if k < 0 || k as u64 > n {
        return 0.0;
    }
    let k = k as u64;
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `X_j(x)`, the Chebyshev polynomials with `X_j(2cos πθ) = sin((j+1)πθ)/sin πθ`.
fn chebyshev_values(x: f64, jmax: usize) -> Vec<f64> {
    let mut v = vec![1.0; jmax + 1];
    if jmax >= 1 {
        v[1] = x;
    }
    for j in 2..=jmax {
        v[j] = x * v[j - 1] - v[j - 2];
    }
    v
}

/// Normalized Hecke eigenvalues `a_f(p)` on the newspace, ascending.
pub fn extract_eigenvalues(level: u64, weight: u32, p: u64, caps: &EigenCaps) -> Result<Vec<f64>> {
    if !is_prime(p) {
        return Err(invalid("p", format!("{p} is not prime")));
    }
    validate(level, weight, p)?;
    let dim = family_size(level, weight)?;
    caps.check(dim, p)?;
    let d = dim as usize;
    // s_j = Σ_f X_j(a_f(p)) = Tr T_{p^j} / p^{j(k−1)/2}.
    let mut s = vec![dim as f64];
    let mut pj = 1u64;
    for _ in 1..=d {
        pj *= p;
        s.push(family_sum(level, weight, pj)?);
    }
    // Power sums: x^m = Σ_j (C(m, (m−j)/2) − C(m, (m−j)/2 − 1)) X_j(x).
    let power: Vec<f64> = (0..=d)
        .map(|m| {
            (0..=m)
                .filter(|j| (m - j) % 2 == 0)
                .map(|j| {
                    let h = ((m - j) / 2) as i64;
                    (binomial(m as u64, h) - binomial(m as u64, h - 1)) * s[j]
                })
                .sum()
        })
        .collect();
    // Newton's identities for the elementary symmetric functions.
    let mut e = vec![1.0];
    for m in 1..=d {
        let v: f64 = (1..=m)
            .map(|i| if i % 2 == 1 { 1.0 } else { -1.0 } * e[m - i] * power[i])
            .sum();
        e.push(v / m as f64);
    }
    // Monic coefficients, highest degree first.
    let coeffs: Vec<f64> = (0..=d).map(|m| if m % 2 == 0 { e[m] } else { -e[m] }).collect();
    let roots = real_roots(&coeffs)?;
    for &r in &roots {
        if r.abs() > 2.0 + stpair_core::arith::DELIGNE_SLACK {
            return Err(Error::Engine(format!(
                "eigenvalue {r} at p={p}, level {level}, weight {weight} violates the Deligne bound"
            )));
        }
    }
    let roots: Vec<f64> = roots.into_iter().map(|r| r.clamp(-2.0, 2.0)).collect();
    // Re-substitution: the roots must reproduce every trace used.
    for j in 1..=d {
        let back: f64 = roots.iter().map(|&r| chebyshev_values(r, j)[j]).sum();
        if (back - s[j]).abs() > 1e-9 * s[j].abs().max(1.0) {
            return Err(Error::Engine(format!(
                "roots at p={p} reproduce Tr T_p^{j} only to {:e}",
                (back - s[j]).abs()
            )));
        }
    }
    Ok(roots)
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Real roots of a monic polynomial (coefficients from the leading one down), via
/// companion-matrix eigenvalues, a guarded Newton polish, and merging of clusters
/// closer than `1e−7`.
fn real_roots(coeffs: &[f64]) -> Result<Vec<f64>> {
    let d = coeffs.len() - 1;
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        m[(0, j)] = -coeffs[j + 1];
    }
    for i in 1..d {
        m[(i, i - 1)] = 1.0;
    }
    let eval = |x: f64| coeffs.iter().fold(0.0, |acc, &c| acc * x + c);
    let deriv = |x: f64| {
        coeffs[..d]
            .iter()
            .enumerate()
            .fold(0.0, |acc, (i, &c)| acc * x + c * (d - i) as f64)
    };
    let mut roots = Vec::with_capacity(d);
    for z in m.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-6 * z.re.abs().max(1.0) {
            return Err(Error::Engine(format!("non-real Hecke eigenvalue {z}")));
        }
        let mut x = z.re;
        for _ in 0..8 {
            let (f, df) = (eval(x), deriv(x));
            if df == 0.0 {
                break;
            }
            let next = x - f / df;
            if eval(next).abs() >= f.abs() {
                break;
            }
            x = next;
        }
        roots.push(x);
    }
    roots.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < roots.len() {
        let mut j = i + 1;
        while j < roots.len() && roots[j] - roots[i] < 1e-7 {
            j += 1;
        }
        if j - i > 1 {
            let mean = roots[i..j].iter().sum::<f64>() / (j - i) as f64;
            roots[i..j].iter_mut().for_each(|r| *r = mean);
        }
        i = j;
    }
    Ok(roots)
}

/// Eigenvalues of every newform at several primes, aligned so that row `f` holds
/// one form's `a_f(p)` for each prime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEigenvalues {
    pub level: u64,
    pub weight: u32,
    pub primes: Vec<u64>,
    pub forms: Vec<Vec<f64>>,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut v = rest.clone();
            v.insert(pos, n - 1);
            out.push(v);
        }
    }
    out
}

/// Extracts per-prime eigenvalues and matches them to forms through the mixed
/// traces `Σ_f a_f(p₀)^i a_f(p)` (`i = 1, 2`), read off `Tr T_{p₀p}` and
/// `Tr T_{p₀²p}`. `p₀` is the first prime whose eigenvalues are pairwise distinct;
/// for dimension at most 3 the two mixed traces then determine the matching.
pub fn family_eigenvalues(level: u64, weight: u32, primes: &[u64], caps: &EigenCaps) -> Result<FamilyEigenvalues> {
    let per_prime: Vec<Vec<f64>> = primes
        .iter()
        .map(|&p| extract_eigenvalues(level, weight, p, caps))
        .collect::<Result<_>>()?;
    let dim = family_size(level, weight)? as usize;
    let mut forms = vec![Vec::with_capacity(primes.len()); dim];
    if dim == 1 {
        for v in &per_prime {
            forms[0].push(v[0]);
        }
        return Ok(FamilyEigenvalues {
            level,
            weight,
            primes: primes.to_vec(),
            forms,
        });
    }
    let separated = |v: &[f64]| v.windows(2).all(|w| w[1] - w[0] > 1e-6);
    let r = per_prime
        .iter()
        .position(|v| separated(v))
        .ok_or_else(|| Error::Engine("no prime in the window separates the newforms".into()))?;
    let p0 = primes[r];
    let base = &per_prime[r];
    let perms = permutations(dim);
    for (i, &p) in primes.iter().enumerate() {
        let vals = &per_prime[i];
        if i == r {
            for (f, row) in forms.iter_mut().enumerate() {
                row.push(vals[f]);
            }
            continue;
        }
        let m1 = family_sum(level, weight, p0 * p)?;
        let m2 = family_sum(level, weight, p0 * p0 * p)? + family_sum(level, weight, p)?;
        let scale = m1.abs().max(m2.abs()).max(1.0);
        let mut fits: Vec<(f64, Vec<f64>)> = perms
            .iter()
            .map(|perm| {
                let assigned: Vec<f64> = perm.iter().map(|&j| vals[j]).collect();
                let r1: f64 = base.iter().zip(&assigned).map(|(a, b)| a * b).sum::<f64>() - m1;
                let r2: f64 = base.iter().zip(&assigned).map(|(a, b)| a * a * b).sum::<f64>() - m2;
                (r1.abs().max(r2.abs()) / scale, assigned)
            })
            .collect();
        fits.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (best, assigned) = &fits[0];
        if *best > 1e-6 {
            return Err(Error::Engine(format!(
                "no matching of eigenvalues at p={p} to forms fits the mixed traces (residual {best:e})"
            )));
        }
        let ambiguous = fits[1..]
            .iter()
            .any(|(res, other)| *res <= 1e-6 && other.iter().zip(assigned).any(|(a, b)| (a - b).abs() > 1e-7));
        if ambiguous {
            return Err(Error::Engine(format!("ambiguous matching of eigenvalues at p={p}")));
        }
        for (f, row) in forms.iter_mut().enumerate() {
            row.push(assigned[f]);
        }
    }
    Ok(FamilyEigenvalues {
        level,
        weight,
        primes: primes.to_vec(),
        forms,
    })
}

/// Mean, second moment and variance of `R₂` over a newform family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMoment {
    pub level: u64,
    pub weight: u32,
    pub x: u64,
    pub primes: usize,
    pub psi: f64,
    pub l: usize,
    pub s: f64,
    pub rho: String,
    pub g: String,
    pub mean_r2: f64,
    pub mean_r2_sq: f64,
    pub variance: f64,
    /// `T(g, ρ)/(4L)` at `M = π_N(x)`.
    pub main_term: f64,
    pub forms_used: usize,
    pub per_form_r2: Vec<f64>,
    /// Largest `|K + 𝓛 + M − R₂²| / max(1, R₂²)` over the family.
    pub max_klm_residual: f64,
}

/// Per-form `R₂` from exact eigenvalues. The asymptotic regime behind the variance
/// decay needs `log(k√N/4^{ν(N)})/x → ∞`, far beyond what small dimensions reach,
/// so the numbers here are exact finite-family values rather than a limit check.
pub fn family_moments(level: u64, weight: u32, c: &PairCorrConfig, x: u64, caps: &EigenCaps) -> Result<FamilyMoment> {
    if x > caps.p_max {
        return Err(Error::CapExceeded {
            what: "x",
            reason: format!(
                "{x} > p_max = {}; every window prime needs eigenvalue extraction",
                caps.p_max
            ),
        });
    }
    let window = prime_window(x, level);
    if window.is_empty() {
        return Err(invalid("x", format!("no primes up to {x} coprime to {level}")));
    }
    let fam = family_eigenvalues(level, weight, window.primes(), caps)?;
    let mut r2s = Vec::with_capacity(fam.forms.len());
    let mut max_klm_residual: f64 = 0.0;
    for (i, row) in fam.forms.iter().enumerate() {
        let angles = row
            .iter()
            .map(|&a| angle_from_eigenvalue(a))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let set = AngleSet::new(format!("{level}.{weight}.{}", i + 1), window.clone(), angles)?;
        let r2 = r2_series(&set, c);
        let klm = klm_decomposition(&set, c);
        max_klm_residual = max_klm_residual.max((klm.sum() - r2 * r2).abs() / (r2 * r2).max(1.0));
        r2s.push(r2);
    }
    let n = r2s.len() as f64;
    let mean_r2 = r2s.iter().sum::<f64>() / n;
    let mean_r2_sq = r2s.iter().map(|v| v * v).sum::<f64>() / n;
    Ok(FamilyMoment {
        level,
        weight,
        x,
        primes: window.count(),
        psi: c.psi(),
        l: c.l(),
        s: c.s(),
        rho: c.rho().name().to_string(),
        g: c.g().name().to_string(),
        mean_r2,
        mean_r2_sq,
        variance: mean_r2_sq - mean_r2 * mean_r2,
        main_term: c.main_term(window.count()),
        forms_used: r2s.len(),
        per_form_r2: r2s,
        max_klm_residual,
    })
}

/// One row of the distinct-prime average check with a single prime and no
/// unconstrained slots: `(1/|F|)Σ_{p≤x} Σ_f a_f(p^{2m})` against `Σ_p p^{−m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistinctPrimeRow {
    pub m: u32,
    pub primes_used: Vec<u64>,
    pub family_average: f64,
    pub main_term: f64,
    pub residual: f64,
    /// `Σ_p √N·p^{2m}/|F|`, the error shape with exponent 1.
    pub error_shape: f64,
    /// `|residual| / error_shape`, the empirical constant.
    pub constant: f64,
}

/// Rows for `m = 1..=m_max`; primes with `p^{2m} > n_cap` are skipped (the trace at
/// index `n` needs class numbers up to `4n`).
pub fn distinct_prime_average(
    level: u64,
    weight: u32,
    m_max: u32,
    x: u64,
    n_cap: u64,
) -> Result<Vec<DistinctPrimeRow>> {
    let dim = family_size(level, weight)? as f64;
    let window = prime_window(x, level);
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let mut used = Vec::new();
        let (mut avg, mut main, mut shape) = (0.0, 0.0, 0.0);
        for &p in window.primes() {
            let Some(n) = p.checked_pow(2 * m).filter(|&n| n <= n_cap) else {
                continue;
            };
            debug_assert_eq!(gcd(n, level), 1);
            avg += family_sum(level, weight, n)? / dim;
            main += (p as f64).powi(-(m as i32));
            shape += (level as f64).sqrt() * n as f64 / dim;
            used.push(p);
        }
        let residual = avg - main;
        rows.push(DistinctPrimeRow {
            m,
            primes_used: used,
            family_average: avg,
            main_term: main,
            residual,
            error_shape: shape,
            constant: if shape > 0.0 { residual.abs() / shape } else { 0.0 },
        });
    }
    Ok(rows)
}
