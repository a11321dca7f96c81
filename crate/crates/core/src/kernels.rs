//! Fourier-side test functions, their periodizations, and the coefficient tables
//! behind the main term `T(g, ρ)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::arith::st_density;
use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How often the rotation recurrence in [`cosine_sum`] is reseeded from `cos`/`sin`.
const RESEED: usize = 32;

/// An even test function described by its Fourier transform, supported in `[−1, 1]`.
#[derive(Clone)]
pub struct SpectralTestFunction {
    name: String,
    fourier: RealFn,
    space: Option<RealFn>,
    value_at_zero: f64,
    square_integral: f64,
}

impl fmt::Debug for SpectralTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralTestFunction")
            .field("name", &self.name)
            .field("value_at_zero", &self.value_at_zero)
            .field("square_integral", &self.square_integral)
            .field("has_space_form", &self.space.is_some())
            .finish()
    }
}

impl SpectralTestFunction {
    /// Wraps `fourier` so that it is even and vanishes outside `[−1, 1]`; only
    /// its values on `[0, 1]` are consulted.
    pub fn new<F>(name: impl Into<String>, fourier: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let fourier: RealFn = Arc::new(move |t: f64| {
            let a = t.abs();
            if a > 1.0 {
                0.0
            } else {
                fourier(a)
            }
        });
        let value_at_zero = fourier(0.0);
        let sq = fourier.clone();
        let square_integral = 2.0 * integrate(|t| sq(t).powi(2), 0.0, 1.0, 1e-13);
        SpectralTestFunction {
            name: name.into(),
            fourier,
            space: None,
            value_at_zero,
            square_integral,
        }
    }

    pub fn with_space_form<G>(mut self, g: G) -> Self
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.space = Some(Arc::new(g));
        self
    }

    /// Triangle `(1 − |t|)₊`, the transform of the Fejér kernel `(sin πx / πx)²`.
    pub fn fejer() -> Self {
        Self::new("fejer", |t| 1.0 - t).with_space_form(|x| {
            if x == 0.0 {
                1.0
            } else {
                let s = (PI * x).sin() / (PI * x);
                s * s
            }
        })
    }

    /// `cos²(πt/2)` on `[−1, 1]`, with space form `sin(2πx) / (2πx(1 − 4x²))`.
    pub fn raised_cosine() -> Self {
        Self::new("raised-cosine", |t| (PI * t / 2.0).cos().powi(2)).with_space_form(|x| {
            let ax = x.abs();
            if ax < 1e-8 {
                1.0 - (2.0 * PI * PI / 3.0 - 4.0) * x * x
            } else if (ax - 0.5).abs() < 1e-8 {
                // Removable singularity; first-order expansion around x = 1/2.
                let d = ax - 0.5;
                0.5 - 1.5 * d
            } else {
                (2.0 * PI * x).sin() / (2.0 * PI * x * (1.0 - 4.0 * x * x))
            }
        })
    }

    /// The zero function.
    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0).with_space_form(|_| 0.0)
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "fejer" | "triangle" => Ok(Self::fejer()),
            "raised-cosine" | "raised_cosine" => Ok(Self::raised_cosine()),
            "zero" => Ok(Self::zero()),
            other => Err(Error::UnknownTestFunction(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fourier(&self, t: f64) -> f64 {
        (self.fourier)(t)
    }

    pub fn space(&self, x: f64) -> Option<f64> {
        self.space.as_ref().map(|g| g(x))
    }

    pub fn has_space_form(&self) -> bool {
        self.space.is_some()
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    /// `∫₋₁¹ f̂(t)² dt`.
    pub fn square_integral(&self) -> f64 {
        self.square_integral
    }
}

/// `c₀ + Σ_{l≥1} c_l 2cos(2πlθ)` with `c_l = f̂(l/scale)/scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodizedKernel {
    scale: usize,
    coeffs: Vec<f64>,
}

impl PeriodizedKernel {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(invalid("coeffs", "at least c_0 is required"));
        }
        Ok(PeriodizedKernel {
            scale: coeffs.len() - 1,
            coeffs,
        })
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, theta: f64) -> f64 {
        cosine_sum(&self.coeffs, theta)
    }
}

/// `c₀ + Σ_{l≥1} c_l 2cos(2πlθ)`, evaluated on the fractional part of `θ`.
pub fn cosine_sum(coeffs: &[f64], theta: f64) -> f64 {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return 0.0;
    };
    let t = theta - theta.floor();
    let w = 2.0 * PI * t;
    let (sw, cw) = w.sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    let mut acc = 0.0;
    for (i, &cl) in rest.iter().enumerate() {
        let l = i + 1;
        if l % RESEED == 0 {
            let phase = 2.0 * PI * ((l as f64 * t) % 1.0);
            (s, c) = phase.sin_cos();
        } else {
            (s, c) = (s * cw + c * sw, c * cw - s * sw);
        }
        acc += cl * c;
    }
    c0 + 2.0 * acc
}

pub fn make_kernel(f: &SpectralTestFunction, scale: usize) -> Result<PeriodizedKernel> {
    if scale == 0 {
        return Err(invalid("scale", "must be at least 1"));
    }
    let s = scale as f64;
    let coeffs = (0..=scale).map(|l| f.fourier(l as f64 / s) / s).collect();
    Ok(PeriodizedKernel { scale, coeffs })
}

pub fn eval_kernel(k: &PeriodizedKernel, theta: f64) -> f64 {
    k.eval(theta)
}

/// Space-side sum `Σ_{|n| ≤ terms} g(scale·(θ + n))`, accumulated from the tails inward.
pub fn lattice_sum_oracle(f: &SpectralTestFunction, scale: usize, theta: f64, terms: usize) -> Result<f64> {
    let g = f
        .space
        .as_ref()
        .ok_or_else(|| Error::MissingSpaceForm(f.name.clone()))?;
    let s = scale as f64;
    let mut acc = 0.0;
    for n in (1..=terms).rev() {
        let n = n as f64;
        acc += g(s * (theta + n)) + g(s * (theta - n));
    }
    Ok(acc + g(s * theta))
}

/// `U(l)` and `G(n)` arrays for fixed `ψ`, `L`, and `M = π_N(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    psi: f64,
    a: f64,
    l: usize,
    m: usize,
    u: Vec<f64>,
    g: Vec<f64>,
}

impl CoefficientTable {
    pub fn new(rho: &SpectralTestFunction, g: &SpectralTestFunction, l: usize, psi: f64, m: usize) -> Result<Self> {
        let u = u_table(rho, l, psi)?;
        Ok(CoefficientTable {
            psi,
            a: weight_a(psi),
            l,
            m,
            u,
            g: g_table(g, m),
        })
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// `A = 2 sin²(πψ)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `U(0), …, U(L)`.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// `G(0), …, G(M)`.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// `U(l)` with `U(l) = 0` beyond `L`.
    pub fn u_at(&self, l: usize) -> f64 {
        self.u.get(l).copied().unwrap_or(0.0)
    }
}

/// `A = 2 sin²(πψ)`.
pub fn weight_a(psi: f64) -> f64 {
    let s = (PI * psi).sin();
    2.0 * s * s
}

pub fn validate_psi(psi: f64) -> Result<()> {
    if !(psi > 0.0 && psi < 1.0) {
        return Err(invalid("psi", format!("{psi} must lie strictly between 0 and 1")));
    }
    if (psi - 0.5).abs() < 1e-12 {
        return Err(invalid("psi", "1/2 is excluded"));
    }
    Ok(())
}

/// `U(l) = ρ̂(l/L) 2cos(2πlψ) − ρ̂((l+1)/L) 2cos(2π(l+1)ψ)` for `0 ≤ l ≤ L`.
pub fn u_table(rho: &SpectralTestFunction, l: usize, psi: f64) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(invalid("L", "must be at least 1"));
    }
    validate_psi(psi)?;
    let lf = l as f64;
    let term = |j: usize| {
        let t = j as f64 / lf;
        if t > 1.0 {
            0.0
        } else {
            rho.fourier(t) * 2.0 * (2.0 * PI * j as f64 * psi).cos()
        }
    };
    Ok((0..=l).map(|j| term(j) - term(j + 1)).collect())
}

/// `G(n) = ĝ(n/M)` for `0 ≤ n ≤ M`.
pub fn g_table(g: &SpectralTestFunction, m: usize) -> Vec<f64> {
    if m == 0 {
        return vec![g.value_at_zero()];
    }
    let mf = m as f64;
    (0..=m).map(|n| g.fourier(n as f64 / mf)).collect()
}

/// `T(g, ρ) = Σ_{1 ≤ l ≤ min(L+1, M)} (U(l) − U(l−1))² ĝ(l/M)`.
pub fn t_g_rho(table: &CoefficientTable) -> f64 {
    let top = (table.l + 1).min(table.m);
    (1..=top)
        .map(|l| {
            let d = table.u_at(l) - table.u_at(l - 1);
            d * d * table.g[l]
        })
        .sum()
}

/// `A² ĝ(0) ∫₋₁¹ ρ̂²`.
pub fn poisson_limit(psi: f64, g: &SpectralTestFunction, rho: &SpectralTestFunction) -> Result<f64> {
    validate_psi(psi)?;
    let a = weight_a(psi);
    Ok(a * a * g.value_at_zero() * rho.square_integral())
}

/// `(U(0)/(2L), ∫₀¹ ρ_L(t − ψ) μ(t) dt)`.
pub fn mean_mass_identity(table: &CoefficientTable, rho_kernel: &PeriodizedKernel) -> (f64, f64) {
    let lhs = table.u[0] / (2.0 * table.l as f64);
    let psi = table.psi;
    let rhs = integrate(
        |t| rho_kernel.eval(t - psi) * st_density(t.clamp(0.0, 1.0)).unwrap_or(0.0),
        0.0,
        1.0,
        1e-12,
    );
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn builtins_are_normalized() {
        for f in [SpectralTestFunction::fejer(), SpectralTestFunction::raised_cosine()] {
            assert_eq!(f.fourier(1.5), 0.0);
            assert!(close(f.fourier(1.0), 0.0, 1e-15));
            assert!(close(f.value_at_zero(), 1.0, 1e-15));
        }
        assert!(close(SpectralTestFunction::fejer().square_integral(), 2.0 / 3.0, 1e-12));
        assert!(close(
            SpectralTestFunction::raised_cosine().square_integral(),
            0.75,
            1e-12
        ));
        assert_eq!(SpectralTestFunction::zero().square_integral(), 0.0);
        assert!(SpectralTestFunction::by_name("bogus").is_err());
    }

    #[test]
    fn square_integral_matches_independent_quadrature() {
        for f in [SpectralTestFunction::fejer(), SpectralTestFunction::raised_cosine()] {
            let q = integrate(|t| f.fourier(t).powi(2), -1.0, 1.0, 1e-13);
            assert!(close(q, f.square_integral(), 1e-10));
        }
    }

    #[test]
    fn raised_cosine_space_form_is_continuous() {
        let f = SpectralTestFunction::raised_cosine();
        for x0 in [0.0, 0.5, -0.5] {
            let v = f.space(x0).unwrap();
            for h in [1e-6, -1e-6] {
                assert!(close(f.space(x0 + h).unwrap(), v, 1e-5));
            }
        }
        assert!(close(f.space(0.5).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn kernel_coefficients() {
        let tri = SpectralTestFunction::fejer();
        assert_eq!(make_kernel(&tri, 2).unwrap().coeffs(), &[0.5, 0.25, 0.0]);
        assert_eq!(make_kernel(&tri, 1).unwrap().coeffs(), &[1.0, 0.0]);
        assert!(make_kernel(&tri, 0).is_err());
        let rc = make_kernel(&SpectralTestFunction::raised_cosine(), 4).unwrap();
        let expect = [1.0, (PI / 8.0).cos().powi(2), 0.5, (3.0 * PI / 8.0).cos().powi(2), 0.0];
        for (c, e) in rc.coeffs().iter().zip(expect) {
            assert!(close(*c, e / 4.0, 1e-15));
        }
    }

    #[test]
    fn kernel_evaluation() {
        let zero = make_kernel(&SpectralTestFunction::zero(), 7).unwrap();
        assert_eq!(zero.eval(0.3), 0.0);
        let tri = make_kernel(&SpectralTestFunction::fejer(), 2).unwrap();
        assert!(close(eval_kernel(&tri, 0.0), 1.0, 1e-15));
        let k = make_kernel(&SpectralTestFunction::fejer(), 50).unwrap();
        for i in 0..64 {
            let t = i as f64 / 64.0 - 0.375;
            assert_eq!(k.eval(t), k.eval(t + 1.0));
        }
    }

    #[test]
    fn fejer_periodization_closed_form() {
        // Σ_{|l|<S} (1 − |l|/S) e(lθ) / S = (sin πSθ / sin πθ)² / S².
        let s = 13usize;
        let k = make_kernel(&SpectralTestFunction::fejer(), s).unwrap();
        for i in 1..50 {
            let t = i as f64 / 50.0 + 0.003;
            let sf = s as f64;
            let closed = ((PI * sf * t).sin() / (PI * t).sin()).powi(2) / (sf * sf);
            assert!(close(k.eval(t), closed, 1e-13));
        }
    }

    #[test]
    fn lattice_oracle_small_cases() {
        let f = SpectralTestFunction::fejer();
        assert_eq!(lattice_sum_oracle(&f, 1, 0.0, 0).unwrap(), 1.0);
        let k5 = make_kernel(&f, 5).unwrap();
        let v = lattice_sum_oracle(&f, 5, 0.2, 10_000).unwrap();
        assert!(close(v, k5.eval(0.2), 1e-6));
        let k2 = make_kernel(&f, 2).unwrap();
        let v = lattice_sum_oracle(&f, 2, 0.5, 10_000).unwrap();
        assert!(close(v, k2.eval(0.5), 1e-6));
        let bare = SpectralTestFunction::new("bare", |t| 1.0 - t);
        assert!(matches!(
            lattice_sum_oracle(&bare, 2, 0.1, 10),
            Err(Error::MissingSpaceForm(_))
        ));
    }

    #[test]
    fn raised_cosine_lattice_matches() {
        let f = SpectralTestFunction::raised_cosine();
        for scale in [2, 10] {
            let k = make_kernel(&f, scale).unwrap();
            for i in 0..7 {
                let t = 0.013 + i as f64 * 0.131;
                let v = lattice_sum_oracle(&f, scale, t, 20_000).unwrap();
                assert!(close(v, k.eval(t), 1e-6), "scale {scale} θ {t}");
            }
        }
    }

    #[test]
    fn kernel_integral_is_constant_term() {
        for f in [SpectralTestFunction::fejer(), SpectralTestFunction::raised_cosine()] {
            let k = make_kernel(&f, 10).unwrap();
            let q = integrate(|t| k.eval(t), 0.0, 1.0, 1e-12);
            assert!(close(q, k.coeffs()[0], 1e-9));
        }
    }

    #[test]
    fn u_table_cases() {
        let tri = SpectralTestFunction::fejer();
        let u = u_table(&tri, 2, 0.25).unwrap();
        assert!(close(u[0], 2.0, 1e-15));
        assert!(close(u[2], 0.0, 1e-15));
        for bad in [0.0, 0.5, 1.0, -0.2] {
            assert!(u_table(&tri, 2, bad).is_err());
        }
        assert!(u_table(&tri, 0, 0.25).is_err());
        // Telescoping: Σ U(l) = ρ̂(0)·2 − (edge term, zero at the support boundary).
        let psi = 1e-6;
        let u = u_table(&tri, 40, psi).unwrap();
        let direct: f64 = u.iter().sum();
        assert!(close(direct, 2.0, 1e-12));
    }

    #[test]
    fn main_term_cases() {
        let tri = SpectralTestFunction::fejer();
        let t = CoefficientTable::new(&SpectralTestFunction::zero(), &tri, 5, 0.3, 100).unwrap();
        assert_eq!(t_g_rho(&t), 0.0);
        assert!(close(poisson_limit(0.25, &tri, &tri).unwrap(), 2.0 / 3.0, 1e-12));
        assert!(close(poisson_limit(1.0 / 3.0, &tri, &tri).unwrap(), 1.5, 1e-12));
        assert!(poisson_limit(0.5, &tri, &tri).is_err());
    }

    #[test]
    fn main_term_hand_sum() {
        // L = 2, ψ = 1/4, M = 10: U = (2, 0, 0); only l = 1 contributes.
        let tri = SpectralTestFunction::fejer();
        let t = CoefficientTable::new(&tri, &tri, 2, 0.25, 10).unwrap();
        let u = t.u();
        assert!(close(u[1], 0.0, 1e-15));
        let hand = 4.0 * 0.9;
        assert!(close(t_g_rho(&t), hand, 1e-12));
    }

    #[test]
    fn main_term_schedule_decreases() {
        let tri = SpectralTestFunction::fejer();
        let target = 2.0 / 3.0;
        let mut prev = f64::INFINITY;
        for (l, m) in [(50, 1_000), (100, 10_000), (200, 100_000), (400, 1_000_000)] {
            let t = CoefficientTable::new(&tri, &tri, l, 0.25, m).unwrap();
            let err = (t_g_rho(&t) / (4.0 * l as f64) - target).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 0.05 * target);
    }

    #[test]
    fn mean_mass_cases() {
        let tri = SpectralTestFunction::fejer();
        let zero = SpectralTestFunction::zero();
        let t = CoefficientTable::new(&zero, &tri, 4, 0.25, 10).unwrap();
        let (a, b) = mean_mass_identity(&t, &make_kernel(&zero, 4).unwrap());
        assert_eq!((a, b), (0.0, 0.0));
        let t = CoefficientTable::new(&tri, &tri, 2, 0.25, 10).unwrap();
        let (a, b) = mean_mass_identity(&t, &make_kernel(&tri, 2).unwrap());
        assert!(close(a, 0.5, 1e-15) && close(b, 0.5, 1e-10));
        for f in [SpectralTestFunction::fejer(), SpectralTestFunction::raised_cosine()] {
            for l in [2, 10, 50] {
                for psi in [0.1, 0.25, 0.3, 0.4] {
                    let t = CoefficientTable::new(&f, &tri, l, psi, 10).unwrap();
                    let (a, b) = mean_mass_identity(&t, &make_kernel(&f, l).unwrap());
                    assert!(close(a, b, 1e-8), "{} L={l} ψ={psi}", f.name());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn fourier_even_and_supported(t in -3.0f64..3.0) {
            for f in [SpectralTestFunction::fejer(), SpectralTestFunction::raised_cosine()] {
                prop_assert_eq!(f.fourier(t), f.fourier(-t));
                if t.abs() > 1.0 {
                    prop_assert_eq!(f.fourier(t), 0.0);
                }
            }
        }

        #[test]
        fn main_term_nonnegative(l in 1usize..80, m in 1usize..400, psi in 0.01f64..0.49) {
            for f in [SpectralTestFunction::fejer(), SpectralTestFunction::raised_cosine()] {
                let t = CoefficientTable::new(&f, &f, l, psi, m).unwrap();
                prop_assert!(t_g_rho(&t) >= 0.0);
            }
        }

        #[test]
        fn kernel_periodic(t in -2.0f64..2.0, scale in 1usize..60) {
            let k = make_kernel(&SpectralTestFunction::raised_cosine(), scale).unwrap();
            prop_assert!((k.eval(t) - k.eval(t + 1.0)).abs() < 1e-12);
        }
    }
}
