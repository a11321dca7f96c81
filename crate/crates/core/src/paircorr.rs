//! Per-form statistics: the smoothed pair correlation by two routes, its second
//! moment split by prime coincidences, the counting statistic, and the
//! equidistribution statistic.
//!
//! All pair loops reduce in a fixed order (rows or fixed-size chunks summed
//! sequentially), so results do not depend on the thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{chebyshev_eigenvalues, straighten, Angle, PrimeWindow};
use crate::error::{invalid, Error, Result};
use crate::kernels::{
    make_kernel, poisson_limit, t_g_rho, validate_psi, weight_a, CoefficientTable, PeriodizedKernel,
    SpectralTestFunction,
};
use crate::nufft::cosine_sums;

/// Primes per block in the series route.
const CHUNK: usize = 256;
/// Rotation steps between exact reseeds of `cos(2πnθ)`.
const RESEED: usize = 256;
const LANES: usize = 8;

/// Largest window for which reports also evaluate the quadratic smooth route.
pub const SMOOTH_ROUTE_MAX: usize = 1000;
/// Largest window for which reports include the second-moment split.
pub const KLM_MAX: usize = 1500;
/// Largest window for which the split is computed by direct enumeration.
pub const KLM_DIRECT_MAX: usize = 64;

/// Angles of one form at the primes of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSet {
    label: String,
    window: PrimeWindow,
    angles: Vec<Angle>,
}

impl AngleSet {
    pub fn new(label: impl Into<String>, window: PrimeWindow, angles: Vec<Angle>) -> Result<Self> {
        if angles.len() != window.count() {
            return Err(Error::LengthMismatch {
                angles: angles.len(),
                primes: window.count(),
            });
        }
        Ok(AngleSet {
            label: label.into(),
            window,
            angles,
        })
    }

    pub fn from_thetas(label: impl Into<String>, window: PrimeWindow, thetas: &[f64]) -> Result<Self> {
        let angles = thetas.iter().map(|&t| Angle::new(t)).collect::<Result<_>>()?;
        Self::new(label, window, angles)
    }

    /// Angles attached to the first `thetas.len()` primes.
    pub fn synthetic(label: impl Into<String>, thetas: &[f64]) -> Result<Self> {
        Self::from_thetas(label, PrimeWindow::first_primes(thetas.len()), thetas)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn window(&self) -> &PrimeWindow {
        &self.window
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.value()).collect()
    }

    /// The same data listed in the order `order` (a permutation of indices).
    pub fn permuted(&self, order: &[usize]) -> Result<AngleSet> {
        let mut seen = vec![false; self.len()];
        for &i in order {
            if i >= self.len() || std::mem::replace(&mut seen[i], true) {
                return Err(invalid("order", "not a permutation"));
            }
        }
        if order.len() != self.len() {
            return Err(invalid("order", "not a permutation"));
        }
        let primes = order.iter().map(|&i| self.window.primes()[i]).collect();
        Ok(AngleSet {
            label: self.label.clone(),
            window: self.window.with_primes(primes),
            angles: order.iter().map(|&i| self.angles[i]).collect(),
        })
    }

    /// Every angle replaced by `1 − θ`.
    pub fn mirrored(&self) -> AngleSet {
        AngleSet {
            label: self.label.clone(),
            window: self.window.clone(),
            angles: self.angles.iter().map(|a| a.mirror()).collect(),
        }
    }
}

/// Which coordinates the counting statistic compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingVariant {
    /// Raw angle differences against `s/(2Aπ_N(x))`.
    Angle,
    /// Differences of `H(θ)` against `s/(2π_N(x))`.
    Straightened,
}

/// Parameters shared by every per-form statistic.
#[derive(Debug, Clone)]
pub struct PairCorrConfig {
    psi: f64,
    l: usize,
    rho: SpectralTestFunction,
    g: SpectralTestFunction,
    s: f64,
    n_cap: Option<usize>,
    counting: CountingVariant,
}

impl PairCorrConfig {
    pub fn new(psi: f64, l: usize, rho: SpectralTestFunction, g: SpectralTestFunction, s: f64) -> Result<Self> {
        validate_psi(psi)?;
        if l == 0 {
            return Err(invalid("L", "must be at least 1"));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("s", format!("{s} must be positive")));
        }
        Ok(PairCorrConfig {
            psi,
            l,
            rho,
            g,
            s,
            n_cap: None,
            counting: CountingVariant::Angle,
        })
    }

    /// Fejér/Fejér with `s = 1`.
    pub fn fejer(psi: f64, l: usize) -> Result<Self> {
        Self::new(
            psi,
            l,
            SpectralTestFunction::fejer(),
            SpectralTestFunction::fejer(),
            1.0,
        )
    }

    /// Truncates the `G(n)` series at `n ≤ cap`; this changes the statistic.
    pub fn with_n_cap(mut self, cap: Option<usize>) -> Self {
        self.n_cap = cap;
        self
    }

    pub fn with_counting(mut self, v: CountingVariant) -> Self {
        self.counting = v;
        self
    }

    pub fn with_rho(mut self, rho: SpectralTestFunction) -> Self {
        self.rho = rho;
        self
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn rho(&self) -> &SpectralTestFunction {
        &self.rho
    }

    pub fn g(&self) -> &SpectralTestFunction {
        &self.g
    }

    pub fn n_cap(&self) -> Option<usize> {
        self.n_cap
    }

    pub fn counting(&self) -> CountingVariant {
        self.counting
    }

    /// `A = 2 sin²(πψ)`.
    pub fn a(&self) -> f64 {
        weight_a(self.psi)
    }

    /// Coefficient table for a window of `m` primes.
    pub fn table(&self, m: usize) -> CoefficientTable {
        CoefficientTable::new(&self.rho, &self.g, self.l, self.psi, m)
            .expect("parameters were validated at construction")
    }

    /// Highest `n` used in the `G(n)` series for a window of `m` primes.
    pub fn n_max(&self, m: usize) -> usize {
        self.n_cap.map_or(m, |c| c.min(m))
    }

    /// `T(g, ρ)/(4L)` at `M = m`.
    pub fn main_term(&self, m: usize) -> f64 {
        t_g_rho(&self.table(m)) / (4.0 * self.l as f64)
    }

    pub fn poisson(&self) -> f64 {
        poisson_limit(self.psi, &self.g, &self.rho).expect("validated ψ")
    }
}

/// `Σ_l U(l) a(p^{2l})`, equal to `L·(ρ_L(θ−ψ) + ρ_L(−θ−ψ))`.
fn prime_series(theta: Angle, u: &[f64]) -> f64 {
    // Same recurrence as `chebyshev_eigenvalues`, two steps per coefficient.
    let c = theta.eigenvalue();
    // prev holds a(p^{2l−1}); a(p^{−1}) = 0.
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut acc = 0.0;
    for (l, ul) in u.iter().enumerate() {
        if l > 0 {
            let odd = c * cur - prev;
            prev = odd;
            cur = c * odd - cur;
        }
        acc += ul * cur;
    }
    acc
}

/// Per-prime weights `T_p = Σ_l U(l) a(p^{2l})`.
pub fn prime_weights(a: &AngleSet, c: &PairCorrConfig) -> Vec<f64> {
    let table = c.table(a.len());
    a.angles.iter().map(|&t| prime_series(t, table.u())).collect()
}

/// `2cos(2πnθ)` for `0 ≤ n ≤ nmax`.
pub fn double_cosines(theta: f64, nmax: usize) -> Vec<f64> {
    let w = 2.0 * PI * theta;
    let (sw, cw) = w.sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(2.0);
    for n in 1..=nmax {
        if n % RESEED == 0 {
            (s, c) = (2.0 * PI * ((n as f64 * theta) % 1.0)).sin_cos();
        } else {
            (s, c) = (s * cw + c * sw, c * cw - s * sw);
        }
        out.push(2.0 * c);
    }
    out
}

fn g_kernel(c: &PairCorrConfig, m: usize) -> PeriodizedKernel {
    let full = make_kernel(&c.g, m).expect("m ≥ 1");
    let nmax = c.n_max(m);
    let mut coeffs = full.coeffs().to_vec();
    coeffs.iter_mut().skip(nmax + 1).for_each(|v| *v = 0.0);
    PeriodizedKernel::from_coeffs(coeffs).expect("nonempty")
}

/// `(L/(8π_N(x))) Σ_{p≠q} ρ_L(±θ_p−ψ) ρ_L(±θ_q−ψ) G_x(±θ_p±θ_q)` by direct kernel evaluation.
pub fn r2_smooth(a: &AngleSet, c: &PairCorrConfig) -> f64 {
    let m = a.len();
    if m == 0 {
        log::warn!("empty prime window; pair correlation set to 0");
        return 0.0;
    }
    let rho = make_kernel(&c.rho, c.l).expect("L ≥ 1");
    let gk = g_kernel(c, m);
    let th = a.thetas();
    let r: Vec<f64> = th.iter().map(|&t| rho.eval(t - c.psi) + rho.eval(-t - c.psi)).collect();
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|p| {
            let mut acc = 0.0;
            for q in p + 1..m {
                let gsum = 2.0 * gk.eval(th[p] + th[q]) + 2.0 * gk.eval(th[p] - th[q]);
                acc += r[q] * gsum;
            }
            r[p] * acc
        })
        .collect();
    let pairs: f64 = 2.0 * rows.iter().sum::<f64>();
    c.l as f64 / (8.0 * m as f64) * pairs
}

/// `(1/(8π_N(x)²L)) Σ_{p≠q} T₁(p)T₂(q)T₃(p,q)`, evaluated in `O(π_N(x)·M)` by
/// expanding `T₃` and factoring the pair sum through per-`n` power sums.
pub fn r2_series(a: &AngleSet, c: &PairCorrConfig) -> f64 {
    let m = a.len();
    if m == 0 {
        log::warn!("empty prime window; pair correlation set to 0");
        return 0.0;
    }
    let table = c.table(m);
    let nmax = c.n_max(m);
    let gs = table.g();
    let th = a.thetas();
    let t: Vec<f64> = a.angles.iter().map(|&x| prime_series(x, table.u())).collect();

    let partials: Vec<ChunkSums> = th
        .par_chunks(CHUNK)
        .zip(t.par_chunks(CHUNK))
        .map(|(th, t)| chunk_sums(th, t, nmax))
        .collect();

    let mut s = vec![0.0; nmax + 1];
    let mut q = vec![0.0; nmax + 1];
    for part in &partials {
        for n in 0..=nmax {
            s[n] += part.s[n];
            q[n] += part.q[n];
        }
    }
    let mut total = 4.0 * gs[0] * (s[0] * s[0] - q[0]);
    for n in 1..=nmax {
        total += 2.0 * gs[n] * (s[n] * s[n] - q[n]);
    }
    total / (8.0 * (m as f64).powi(2) * c.l as f64)
}

/// The series route with the per-`n` power sums evaluated by gridded FFT
/// ([`crate::nufft`]) instead of rotation recurrences; `O(π_N(x) + M log M)`.
/// Agrees with [`r2_series`] to about `1e-10` relative.
pub fn r2_fast(a: &AngleSet, c: &PairCorrConfig) -> f64 {
    let m = a.len();
    if m == 0 {
        log::warn!("empty prime window; pair correlation set to 0");
        return 0.0;
    }
    let table = c.table(m);
    let nmax = c.n_max(m);
    let gs = table.g();
    let th = a.thetas();
    let t: Vec<f64> = a.angles.iter().map(|&x| prime_series(x, table.u())).collect();
    let t2: Vec<f64> = t.iter().map(|v| v * v).collect();
    let (sum1, sum2): (f64, f64) = (t.iter().sum(), t2.iter().sum());
    let c1 = cosine_sums(&th, &t, nmax);
    let c2 = cosine_sums(&th, &t2, 2 * nmax);
    let mut total = 4.0 * gs[0] * (sum1 * sum1 - sum2);
    for n in 1..=nmax {
        let s = 2.0 * c1[n];
        let q = 2.0 * sum2 + 2.0 * c2[2 * n];
        total += 2.0 * gs[n] * (s * s - q);
    }
    total / (8.0 * (m as f64).powi(2) * c.l as f64)
}

struct ChunkSums {
    /// `s[n] = Σ_p T_p d_n(p)`, with `s[0] = Σ T_p`.
    s: Vec<f64>,
    /// `q[n] = Σ_p T_p² d_n(p)²`, with `q[0] = Σ T_p²`.
    q: Vec<f64>,
}

fn chunk_sums(th: &[f64], t: &[f64], nmax: usize) -> ChunkSums {
    let k = th.len();
    let mut s = vec![0.0; nmax + 1];
    let mut q = vec![0.0; nmax + 1];
    s[0] = t.iter().sum();
    q[0] = t.iter().map(|v| v * v).sum();
    let t2: Vec<f64> = t.iter().map(|v| 4.0 * v * v).collect();
    let t1: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
    let mut cw = vec![0.0; k];
    let mut sw = vec![0.0; k];
    for i in 0..k {
        (sw[i], cw[i]) = (2.0 * PI * th[i]).sin_cos();
    }
    let mut cc = vec![1.0; k];
    let mut ss = vec![0.0; k];
    for n in 1..=nmax {
        if n % RESEED == 0 {
            for ((sv, cv), &t) in ss.iter_mut().zip(cc.iter_mut()).zip(th) {
                (*sv, *cv) = (2.0 * PI * ((n as f64 * t) % 1.0)).sin_cos();
            }
        } else {
            for ((sv, cv), (&a, &b)) in ss.iter_mut().zip(cc.iter_mut()).zip(cw.iter().zip(&sw)) {
                let (s0, c0) = (*sv, *cv);
                *sv = s0 * a + c0 * b;
                *cv = c0 * a - s0 * b;
            }
        }
        // Interleaved accumulators let the reduction vectorize.
        let mut a1 = [0.0; LANES];
        let mut a2 = [0.0; LANES];
        let blocks = cc
            .chunks_exact(LANES)
            .zip(t1.chunks_exact(LANES))
            .zip(t2.chunks_exact(LANES));
        for ((c, x1), x2) in blocks {
            for j in 0..LANES {
                a1[j] += x1[j] * c[j];
                a2[j] += x2[j] * c[j] * c[j];
            }
        }
        let body = k - k % LANES;
        for i in body..k {
            let v = cc[i];
            a1[i - body] += t1[i] * v;
            a2[i - body] += t2[i] * v * v;
        }
        s[n] = a1.iter().sum();
        q[n] = a2.iter().sum();
    }
    ChunkSums { s, q }
}

/// A term split `total = one + 2·two + four` by the `4G(0)` / `n ≥ 1` parts of `T₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub total: f64,
    pub one: f64,
    pub two: f64,
    pub four: f64,
}

impl Split {
    pub fn resummed(&self) -> f64 {
        self.one + 2.0 * self.two + self.four
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KlmMethod {
    Direct,
    InclusionExclusion,
}

/// `R₂² = K + 𝓛 + M` grouped by how many primes the two pairs share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Klm {
    pub k: Split,
    pub l: Split,
    pub m: Split,
    pub method: KlmMethod,
}

impl Klm {
    pub fn sum(&self) -> f64 {
        self.k.total + self.l.total + self.m.total
    }
}

/// Pieces shared by both decomposition methods.
struct PairData {
    t: Vec<f64>,
    /// `4G(0)`.
    a0: f64,
    /// `b[p][q] = Σ_{n≥1} 2G(n) d_n(p) d_n(q)`, row-major.
    b: Vec<f64>,
    scale: f64,
}

fn pair_data(a: &AngleSet, c: &PairCorrConfig) -> PairData {
    let p = a.len();
    let table = c.table(p);
    let nmax = c.n_max(p);
    let gs = table.g();
    let t: Vec<f64> = a.angles.iter().map(|&x| prime_series(x, table.u())).collect();
    let d: Vec<Vec<f64>> = a.angles.iter().map(|x| double_cosines(x.value(), nmax)).collect();
    let dw: Vec<Vec<f64>> = d
        .iter()
        .map(|row| {
            (0..=nmax)
                .map(|n| if n == 0 { 0.0 } else { 2.0 * gs[n] * row[n] })
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..p)
        .into_par_iter()
        .flat_map_iter(|i| {
            let (dw, d) = (&dw, &d);
            (0..p).map(move |j| dw[i].iter().zip(&d[j]).map(|(x, y)| x * y).sum::<f64>())
        })
        .collect();
    let (m4, l2) = ((p as f64).powi(4), (c.l as f64).powi(2));
    PairData {
        t,
        a0: 4.0 * gs.first().copied().unwrap_or(0.0),
        b,
        scale: 1.0 / (64.0 * m4 * l2),
    }
}

/// Second-moment decomposition; direct enumeration for small windows, the
/// inclusion–exclusion form otherwise.
pub fn klm_decomposition(a: &AngleSet, c: &PairCorrConfig) -> Klm {
    if a.len() <= KLM_DIRECT_MAX {
        klm_direct(a, c)
    } else {
        klm_fast(a, c)
    }
}

/// Enumerates ordered pairs, distinct triples and distinct quadruples.
pub fn klm_direct(a: &AngleSet, c: &PairCorrConfig) -> Klm {
    let n = a.len();
    let zero = Split {
        total: 0.0,
        one: 0.0,
        two: 0.0,
        four: 0.0,
    };
    if n < 2 {
        return Klm {
            k: zero,
            l: zero,
            m: zero,
            method: KlmMethod::Direct,
        };
    }
    let pd = pair_data(a, c);
    let (t, a0) = (&pd.t, pd.a0);
    let b = |i: usize, j: usize| pd.b[i * n + j];
    let x = |i: usize, j: usize| t[i] * t[j] * (a0 + b(i, j));

    let mut k = [0.0; 4];
    let mut l = [0.0; 4];
    let mut m = [0.0; 4];
    for p in 0..n {
        for q in (0..n).filter(|&q| q != p) {
            let w = (t[p] * t[q]).powi(2);
            let bpq = b(p, q);
            k[0] += w * (a0 + bpq).powi(2);
            k[1] += w * a0 * a0;
            k[2] += w * a0 * bpq;
            k[3] += w * bpq * bpq;
            for r in (0..n).filter(|&r| r != p && r != q) {
                let w = t[p] * t[p] * t[q] * t[r];
                let bpr = b(p, r);
                l[0] += w * (a0 + bpq) * (a0 + bpr);
                l[1] += w * a0 * a0;
                l[2] += w * a0 * bpq;
                l[3] += w * bpq * bpr;
                let xpq = x(p, q);
                for s in (0..n).filter(|&s| s != p && s != q && s != r) {
                    let w = t[p] * t[q] * t[r] * t[s];
                    let brs = b(r, s);
                    m[0] += xpq * x(r, s);
                    m[1] += w * a0 * a0;
                    m[2] += w * a0 * bpq;
                    m[3] += w * bpq * brs;
                }
            }
        }
    }
    let sc = pd.scale;
    let split = |v: [f64; 4], f: f64| Split {
        total: f * sc * v[0],
        one: f * sc * v[1],
        two: f * sc * v[2],
        four: f * sc * v[3],
    };
    Klm {
        k: split(k, 2.0),
        l: split(l, 4.0),
        m: split(m, 1.0),
        method: KlmMethod::Direct,
    }
}

/// Coincidence classes of `Σ Y_{pq} Z_{rs}` over ordered pairs `p≠q`, `r≠s`.
struct Classes {
    same: f64,
    one: f64,
    distinct: f64,
}

/// `same = Σ_{p≠q} Y Z`, `one = Σ_p Σ_{q≠r} Y_{pq} Z_{pr}`,
/// `distinct = (ΣY)(ΣZ) − 2·same − 4·one`, for symmetric `Y`, `Z`.
fn classes(n: usize, y: &dyn Fn(usize, usize) -> f64, z: &dyn Fn(usize, usize) -> f64) -> Classes {
    let (mut sy, mut sz, mut same, mut rows) = (0.0, 0.0, 0.0, 0.0);
    for p in 0..n {
        let (mut ry, mut rz) = (0.0, 0.0);
        for q in (0..n).filter(|&q| q != p) {
            let (yv, zv) = (y(p, q), z(p, q));
            ry += yv;
            rz += zv;
            same += yv * zv;
        }
        sy += ry;
        sz += rz;
        rows += ry * rz;
    }
    let one = rows - same;
    Classes {
        same,
        one,
        distinct: sy * sz - 2.0 * same - 4.0 * one,
    }
}

/// Inclusion–exclusion over the full pair matrix; `O(π_N(x)²)` after the matrix.
pub fn klm_fast(a: &AngleSet, c: &PairCorrConfig) -> Klm {
    let n = a.len();
    let zero = Split {
        total: 0.0,
        one: 0.0,
        two: 0.0,
        four: 0.0,
    };
    if n < 2 {
        return Klm {
            k: zero,
            l: zero,
            m: zero,
            method: KlmMethod::InclusionExclusion,
        };
    }
    let pd = pair_data(a, c);
    let (t, a0) = (&pd.t, pd.a0);
    let xa = |i: usize, j: usize| t[i] * t[j] * a0;
    let xb = |i: usize, j: usize| t[i] * t[j] * pd.b[i * n + j];
    let xf = |i: usize, j: usize| xa(i, j) + xb(i, j);
    let full = classes(n, &xf, &xf);
    let aa = classes(n, &xa, &xa);
    let ab = classes(n, &xa, &xb);
    let bb = classes(n, &xb, &xb);
    let sc = pd.scale;
    let split = |f: f64, pick: &dyn Fn(&Classes) -> f64| Split {
        total: f * sc * pick(&full),
        one: f * sc * pick(&aa),
        two: f * sc * pick(&ab),
        four: f * sc * pick(&bb),
    };
    Klm {
        k: split(2.0, &|cl| cl.same),
        l: split(4.0, &|cl| cl.one),
        m: split(1.0, &|cl| cl.distinct),
        method: KlmMethod::InclusionExclusion,
    }
}

/// Counts of angles in the localization window `[ψ − 1/(AL), ψ + 1/(AL)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCount {
    /// `#{p : θ_p ∈ I_L(ψ)}`.
    pub at_psi: usize,
    /// `#{p : θ_p ∈ I_L(1 − ψ)}`, i.e. reflected angles in `I_L(ψ)`.
    pub at_mirror: usize,
}

impl LocalCount {
    pub fn total(&self) -> usize {
        self.at_psi + self.at_mirror
    }
}

pub fn local_count(a: &AngleSet, psi: f64, l: usize) -> Result<LocalCount> {
    validate_psi(psi)?;
    if l == 0 {
        return Err(invalid("L", "must be at least 1"));
    }
    let w = 1.0 / (weight_a(psi) * l as f64);
    let inside = |center: f64| a.angles.iter().filter(|t| (t.value() - center).abs() <= w).count();
    Ok(LocalCount {
        at_psi: inside(psi),
        at_mirror: inside(1.0 - psi),
    })
}

/// Number of integers `n` with `|y + n| ≤ w`.
fn lattice_hits(y: f64, w: f64) -> u64 {
    let lo = (-w - y).ceil();
    let hi = (w - y).floor();
    if hi < lo {
        0
    } else {
        (hi - lo) as u64 + 1
    }
}

/// Counting pair correlation at window parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountingStatistic {
    /// `Σ_{p≠q} P(p)P(q)B(θ_p, θ_q, s)`: ordered pairs of localized points within the window.
    pub pairs: u64,
    pub local_count: usize,
    /// `(L/(8π_N(x))) Σ_{p≠q} P(p)P(q)·2B`, which normalizes by the asymptotic count `4π_N(x)/L`.
    pub r_lemma: f64,
    /// `pairs / local_count`, the empirical normalization.
    pub r_empirical: f64,
    pub variant: CountingVariant,
}

/// Six-shift window sum `B`: differences at offsets −1, 0, 1, −2 and sums at 0, −1.
/// The −2 offset cannot fire for angles in `[0, 1]` with windows below 1; it is kept
/// so the sum matches the full shift list.
fn shift_sum(u: f64, v: f64, w: f64) -> u64 {
    let hit = |z: f64| u64::from(z.abs() <= w);
    let d = u - v;
    let s = u + v;
    hit(d - 1.0) + hit(d) + hit(d + 1.0) + hit(s) + hit(s - 1.0) + hit(d - 2.0)
}

pub fn r_counting(a: &AngleSet, c: &PairCorrConfig) -> Result<CountingStatistic> {
    let m = a.len();
    let lc = local_count(a, c.psi, c.l)?;
    if lc.total() == 0 {
        return Err(Error::EmptyLocalWindow);
    }
    let big_a = c.a();
    let w = 1.0 / (big_a * c.l as f64);
    let (coords, win): (Vec<f64>, f64) = match c.counting {
        CountingVariant::Angle => (a.thetas(), c.s / (2.0 * big_a * m as f64)),
        CountingVariant::Straightened => (
            a.angles.iter().map(|&t| straighten(t)).collect(),
            c.s / (2.0 * m as f64),
        ),
    };
    // Only primes with a localized point contribute.
    let live: Vec<(u64, f64)> = a
        .angles
        .iter()
        .zip(&coords)
        .filter_map(|(t, &u)| {
            let t = t.value();
            let pp = lattice_hits(t - c.psi, w) + lattice_hits(-t - c.psi, w);
            (pp > 0).then_some((pp, u))
        })
        .collect();
    let mut pairs = 0u64;
    for (i, &(pi, ui)) in live.iter().enumerate() {
        for (j, &(pj, uj)) in live.iter().enumerate() {
            if i != j {
                pairs += pi * pj * shift_sum(ui, uj, win);
            }
        }
    }
    let lf = c.l as f64;
    Ok(CountingStatistic {
        pairs,
        local_count: lc.total(),
        r_lemma: lf / (8.0 * m as f64) * 2.0 * pairs as f64,
        r_empirical: pairs as f64 / lc.total() as f64,
        variant: c.counting,
    })
}

/// `N_{ρ,L,f}(x)/(2π_N(x))` by direct kernel sums and by the Hecke series, with `U(0)/(2L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NRho {
    pub direct: f64,
    pub series: f64,
    pub mean_mass: f64,
}

impl NRho {
    pub fn deviation(&self) -> f64 {
        (self.direct - self.mean_mass).abs()
    }
}

pub fn n_rho_statistic(a: &AngleSet, c: &PairCorrConfig) -> NRho {
    let m = a.len();
    let table = c.table(m.max(1));
    let lf = c.l as f64;
    let mean_mass = table.u()[0] / (2.0 * lf);
    if m == 0 {
        return NRho {
            direct: 0.0,
            series: 0.0,
            mean_mass,
        };
    }
    let rho = make_kernel(&c.rho, c.l).expect("L ≥ 1");
    let direct: f64 = a
        .angles
        .iter()
        .map(|t| rho.eval(t.value() - c.psi) + rho.eval(-t.value() - c.psi))
        .sum();
    let series: f64 = a.angles.iter().map(|&t| prime_series(t, table.u())).sum::<f64>() / lf;
    let denom = 2.0 * m as f64;
    NRho {
        direct: direct / denom,
        series: series / denom,
        mean_mass,
    }
}

/// `Σ_p a(p^{2l})` with its two trend normalizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSum {
    pub l: usize,
    pub sum: f64,
    pub per_prime: f64,
    pub per_sqrt_x_log_x: f64,
}

pub fn power_sum_diagnostic(a: &AngleSet, l: usize) -> Result<PowerSum> {
    if l == 0 {
        return Err(invalid("l", "must be at least 1"));
    }
    let sum: f64 = a.angles.iter().map(|&t| chebyshev_eigenvalues(t, 2 * l)[2 * l]).sum();
    let x = a.window.x().max(2) as f64;
    Ok(PowerSum {
        l,
        sum,
        per_prime: if a.is_empty() { 0.0 } else { sum / a.len() as f64 },
        per_sqrt_x_log_x: sum / (x.sqrt() * x.ln()),
    })
}

/// Every per-form statistic for one angle set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCorrReport {
    pub label: String,
    pub x: u64,
    pub level: u64,
    pub primes: usize,
    pub psi: f64,
    pub l: usize,
    pub s: f64,
    pub rho: String,
    pub g: String,
    pub n_cap: Option<usize>,
    /// Series route.
    pub r2: f64,
    /// Direct kernel route, present for windows up to [`SMOOTH_ROUTE_MAX`] primes.
    pub r2_smooth: Option<f64>,
    /// Present for windows up to [`KLM_MAX`] primes.
    pub klm: Option<Klm>,
    pub r2_squared: f64,
    /// Absent when no angle is localized.
    pub counting: Option<CountingStatistic>,
    pub n_rho: NRho,
    pub local_count: LocalCount,
    pub power_sums: Vec<PowerSum>,
    pub main_term: f64,
    pub poisson: f64,
}

pub fn pair_corr_report(a: &AngleSet, c: &PairCorrConfig) -> PairCorrReport {
    let m = a.len();
    let r2 = r2_series(a, c);
    let counting = match r_counting(a, c) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{e}");
            None
        }
    };
    PairCorrReport {
        label: a.label.clone(),
        x: a.window.x(),
        level: a.window.level(),
        primes: m,
        psi: c.psi,
        l: c.l,
        s: c.s,
        rho: c.rho.name().to_string(),
        g: c.g.name().to_string(),
        n_cap: c.n_cap,
        r2,
        r2_smooth: (m <= SMOOTH_ROUTE_MAX).then(|| r2_smooth(a, c)),
        klm: (m <= KLM_MAX).then(|| klm_decomposition(a, c)),
        r2_squared: r2 * r2,
        counting,
        n_rho: n_rho_statistic(a, c),
        local_count: local_count(a, c.psi, c.l).expect("validated"),
        power_sums: (1..=3).map(|l| power_sum_diagnostic(a, l).expect("l ≥ 1")).collect(),
        main_term: c.main_term(m.max(1)),
        poisson: c.poisson(),
    }
}
