//! Eichler–Selberg trace of `T_n` on `S_k(Γ₀(N))`, trivial character, `gcd(n, N) = 1`.
//!
//! `Tr T_n = A₁ + A₂ + A₃ + A₄` (identity, elliptic, hyperbolic, parabolic terms).
//! Every term is multiplied by 24 so the whole computation stays in `BigInt`; the
//! final division by 24 is exact, and a nonzero remainder is reported as an engine bug.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, euler_phi, exact_sqrt, factorize, gcd, psi_index};
use crate::error::{invalid, Error, Result};
use crate::hurwitz::{class_number12, HurwitzCache};

/// Exact traces of one Hecke operator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceValue {
    pub level: u64,
    pub weight: u32,
    pub index: u64,
    #[serde(with = "bigint_string")]
    pub full_trace: BigInt,
    #[serde(with = "bigint_string")]
    pub new_trace: BigInt,
}

pub fn trace_value(level: u64, weight: u32, n: u64) -> Result<TraceValue> {
    Ok(TraceValue {
        level,
        weight,
        index: n,
        full_trace: trace_tn_full(level, weight, n)?,
        new_trace: trace_tn_new(level, weight, n)?,
    })
}

pub(crate) fn validate(level: u64, weight: u32, n: u64) -> Result<()> {
    if level == 0 {
        return Err(invalid("level", "must be at least 1"));
    }
    if weight < 2 || weight % 2 == 1 {
        return Err(invalid("weight", format!("{weight} must be even and at least 2")));
    }
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if gcd(n, level) != 1 {
        return Err(Error::NotCoprime { n, level });
    }
    Ok(())
}

/// `Tr T_n` on the full cusp space `S_k(Γ₀(N))`.
pub fn trace_tn_full(level: u64, weight: u32, n: u64) -> Result<BigInt> {
    validate(level, weight, n)?;
    let k = weight;
    let psi = psi_index(level);
    let mut total = BigInt::zero();

    // Identity term: n^{k/2−1}(k−1)ψ(N)/12 when n is a square.
    if let Some(m) = exact_sqrt(n) {
        total += BigInt::from(2 * (k as u64 - 1) * psi) * BigInt::from(m).pow(k - 2);
    }

    // Elliptic term: −½ Σ_t P_k(t, n) Σ_f h_w((t² − 4n)/f²) μ(t, f, n).
    HurwitzCache::global().ensure(4 * n);
    let four_n = 4 * n as i128;
    let mut t: i128 = 0;
    while t * t < four_n {
        let disc = (four_n - t * t) as u64;
        let mut inner = 0i64;
        for f in divisors(disc) {
            if !disc.is_multiple_of(f * f) {
                continue;
            }
            let d = disc / (f * f);
            if !d.is_multiple_of(4) && d % 4 != 3 {
                continue;
            }
            let mu = local_weight(level, psi, t as i64, n, f);
            if mu != 0 {
                inner += class_number12(d) * mu as i64;
            }
        }
        if inner != 0 {
            let p = elliptic_poly(t as i64, n, k);
            let mult = if t == 0 { 1 } else { 2 };
            // P_k(−t, n) = P_k(t, n) since k is even.
            total -= p * BigInt::from(inner * mult);
        }
        t += 1;
    }

    // Hyperbolic term: −½ Σ_{dd'=n} min(d, d')^{k−1} Σ_{τ|N} φ(gcd(τ, N/τ)).
    for d in divisors(n) {
        let e = n / d;
        let diff = d.abs_diff(e);
        let mut cusp = 0u64;
        for tau in divisors(level) {
            let g = gcd(tau, level / tau);
            if diff % g == 0 {
                cusp += euler_phi(g);
            }
        }
        total -= BigInt::from(12 * cusp) * BigInt::from(d.min(e)).pow(k - 1);
    }

    // Parabolic correction in weight 2.
    if k == 2 {
        total += BigInt::from(24 * divisors(n).into_iter().sum::<u64>());
    }

    let (q, r) = total.div_rem(&BigInt::from(24));
    if !r.is_zero() {
        return Err(Error::Engine(format!(
            "24·Tr T_{n} at level {level}, weight {k} is not divisible by 24"
        )));
    }
    Ok(q)
}

/// `Tr T_n` on the newspace: Möbius-type inversion `Σ_{M|N} β(N/M) Tr_M`, with
/// `β` multiplicative, `β(p) = −2`, `β(p²) = 1`, `β(p^r) = 0` for `r ≥ 3`.
pub fn trace_tn_new(level: u64, weight: u32, n: u64) -> Result<BigInt> {
    validate(level, weight, n)?;
    let mut total = BigInt::zero();
    for m in divisors(level) {
        let b = newspace_weight(level / m);
        if b != 0 {
            total += BigInt::from(b) * trace_tn_full(m, weight, n)?;
        }
    }
    Ok(total)
}

pub(crate) fn newspace_weight(n: u64) -> i64 {
    factorize(n)
        .into_iter()
        .map(|(_, e)| match e {
            1 => -2,
            2 => 1,
            _ => 0,
        })
        .product()
}

/// `P_k(t, n) = (ρ^{k−1} − ρ̄^{k−1})/(ρ − ρ̄)` for the roots of `X² − tX + n`,
/// via `u_{j+1} = t·u_j − n·u_{j−1}`, `u_0 = 0`, `u_1 = 1`.
pub fn elliptic_poly(t: i64, n: u64, k: u32) -> BigInt {
    let (t, n) = (BigInt::from(t), BigInt::from(n));
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    for _ in 1..k - 1 {
        let next = &t * &cur - &n * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `μ(t, f, n) = ψ(N)/ψ(N/N_f) · #{x mod N : x² − tx + n ≡ 0 (mod N·N_f)}`, `N_f = gcd(N, f)`.
fn local_weight(level: u64, psi: u64, t: i64, n: u64, f: u64) -> u64 {
    if level == 1 {
        return 1;
    }
    let nf = gcd(level, f);
    let modulus = (level * nf) as i128;
    let (t, n) = (t as i128, n as i128);
    let count = (0..level as i128)
        .filter(|&x| (x * x - t * x + n).rem_euclid(modulus) == 0)
        .count() as u64;
    if count == 0 {
        return 0;
    }
    psi / psi_index(level / nf) * count
}

/// `value / n^{(k−1)/2}` as `f64`: exact rational division by `n^{(k−2)/2}` (or by
/// `m^{k−1}` when `n = m²`) followed by one floating-point division by `√n`.
pub fn normalize(value: &BigInt, n: u64, k: u32) -> f64 {
    use num_rational::BigRational;
    if value.is_zero() {
        return 0.0;
    }
    match exact_sqrt(n) {
        Some(m) => BigRational::new(value.clone(), BigInt::from(m).pow(k - 1))
            .to_f64()
            .unwrap_or(f64::NAN),
        None => {
            let r = BigRational::new(value.clone(), BigInt::from(n).pow((k - 2) / 2));
            r.to_f64().unwrap_or(f64::NAN) / (n as f64).sqrt()
        }
    }
}

/// `|value|` as `f64` with its sign; values beyond `f64` range saturate.
pub fn to_f64_saturating(value: &BigInt) -> f64 {
    value.to_f64().unwrap_or(if value.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coefficients of `∏ η(d·z)^{e_d}` as a q-series (assumed to start at q¹), by
    /// dense power-series multiplication.
    pub(crate) fn eta_product(factors: &[(usize, u32)], nmax: usize) -> Vec<i64> {
        let shift: usize = factors.iter().map(|&(d, e)| d * e as usize).sum();
        assert_eq!(shift, 24, "q-order must be 1");
        let mut series = vec![0i64; nmax + 1];
        series[1] = 1;
        for &(d, e) in factors {
            for _ in 0..e {
                for m in (1..).map(|j| j * d).take_while(|&m| m <= nmax) {
                    for i in (m..=nmax).rev() {
                        series[i] -= series[i - m];
                    }
                }
            }
        }
        series
    }

    fn tau_table() -> Vec<i64> {
        eta_product(&[(1, 24)], 60)
    }

    #[test]
    fn level_one_weight_twelve_is_tau() {
        let tau = tau_table();
        assert_eq!(tau[2], -24);
        for n in 1..=50u64 {
            assert_eq!(trace_tn_full(1, 12, n).unwrap(), BigInt::from(tau[n as usize]), "n={n}");
        }
    }

    #[test]
    fn spec_examples() {
        assert_eq!(trace_tn_full(1, 12, 1).unwrap(), BigInt::from(1));
        assert_eq!(trace_tn_full(1, 2, 1).unwrap(), BigInt::zero());
        assert_eq!(trace_tn_new(11, 2, 1).unwrap(), BigInt::from(1));
        assert_eq!(trace_tn_new(11, 2, 2).unwrap(), BigInt::from(-2));
        for n in [1, 2, 7, 30] {
            assert_eq!(trace_tn_new(1, 16, n).unwrap(), trace_tn_full(1, 16, n).unwrap());
        }
        assert!(matches!(trace_tn_full(6, 4, 4), Err(Error::NotCoprime { .. })));
        assert!(trace_tn_full(1, 3, 1).is_err());
    }

    #[test]
    fn one_dimensional_eta_quotients() {
        // Each is the unique normalized cusp form of its space.
        let cases: &[(u64, u32, &[(usize, u32)])] = &[
            (2, 8, &[(1, 8), (2, 8)]),
            (3, 6, &[(1, 6), (3, 6)]),
            (4, 6, &[(2, 12)]),
            (5, 4, &[(1, 4), (5, 4)]),
            (6, 4, &[(1, 2), (2, 2), (3, 2), (6, 2)]),
            (8, 4, &[(2, 4), (4, 4)]),
            (9, 4, &[(3, 8)]),
            (11, 2, &[(1, 2), (11, 2)]),
            (14, 2, &[(1, 1), (2, 1), (7, 1), (14, 1)]),
            (20, 2, &[(2, 2), (10, 2)]),
            (32, 2, &[(4, 2), (8, 2)]),
            (36, 2, &[(6, 4)]),
        ];
        for &(level, k, factors) in cases {
            let a = eta_product(factors, 60);
            for n in (1..=60u64).filter(|&n| gcd(n, level) == 1) {
                assert_eq!(
                    trace_tn_full(level, k, n).unwrap(),
                    BigInt::from(a[n as usize]),
                    "N={level} k={k} n={n}"
                );
            }
        }
    }

    /// dim S_k(Γ₀(N)) from the genus formula: elliptic points, cusps and ψ(N).
    fn genus_dimension(level: u64, k: u32) -> i64 {
        let fac = factorize(level);
        let psi = psi_index(level) as i64;
        let legendre = |a: i64, p: u64| -> i64 {
            let a = a.rem_euclid(p as i64) as u64;
            if a == 0 {
                return 0;
            }
            (1..p).any(|x| x * x % p == a) as i64 * 2 - 1
        };
        let nu2: i64 = if level.is_multiple_of(4) {
            0
        } else {
            fac.iter()
                .map(|&(p, _)| if p == 2 { 1 } else { 1 + legendre(-1, p) })
                .product()
        };
        let nu3: i64 = if level.is_multiple_of(9) {
            0
        } else {
            fac.iter()
                .map(|&(p, _)| match p {
                    2 => 0,
                    3 => 1,
                    _ => 1 + legendre(-3, p),
                })
                .product()
        };
        let cusps: i64 = divisors(level)
            .into_iter()
            .map(|d| euler_phi(gcd(d, level / d)) as i64)
            .sum();
        let k = k as i64;
        let twelve =
            (k - 1) * psi + 12 * (k / 4) * nu2 - 3 * (k - 1) * nu2 + 12 * (k / 3) * nu3 - 4 * (k - 1) * nu3 - 6 * cusps;
        let mut dim = twelve / 12;
        assert_eq!(twelve % 12, 0, "N={level} k={k}");
        if k == 2 {
            dim += 1;
        }
        dim
    }

    #[test]
    fn dimensions_match_genus_formula() {
        for level in 1..=60u64 {
            for k in (2..=20).step_by(2) {
                assert_eq!(
                    trace_tn_full(level, k, 1).unwrap(),
                    BigInt::from(genus_dimension(level, k)),
                    "N={level} k={k}"
                );
            }
        }
    }

    #[test]
    fn newspace_dimensions_are_nonnegative() {
        for level in 1..=80u64 {
            for k in [2, 4, 12] {
                assert!(trace_tn_new(level, k, 1).unwrap() >= BigInt::zero(), "N={level} k={k}");
            }
        }
        // S_2(Γ₀(N)) newspace is zero below 11 and one-dimensional at 11, 14, 15.
        for level in 1..11 {
            assert!(trace_tn_new(level, 2, 1).unwrap().is_zero());
        }
        for level in [11, 14, 15, 17, 19, 20] {
            assert_eq!(trace_tn_new(level, 2, 1).unwrap(), BigInt::from(1), "N={level}");
        }
        assert_eq!(trace_tn_new(22, 2, 1).unwrap(), BigInt::zero());
        assert_eq!(trace_tn_new(23, 2, 1).unwrap(), BigInt::from(2));
    }

    #[test]
    fn hecke_multiplicativity_on_one_dimensional_space() {
        let a = |n| trace_tn_full(1, 12, n).unwrap();
        assert_eq!(a(6), a(2) * a(3));
        assert_eq!(a(4), a(2) * a(2) - BigInt::from(2).pow(11u32));
    }

    #[test]
    fn elliptic_polynomial_small_cases() {
        assert_eq!(elliptic_poly(5, 3, 2), BigInt::one());
        assert_eq!(elliptic_poly(5, 3, 3), BigInt::from(5));
        assert_eq!(elliptic_poly(5, 3, 4), BigInt::from(22));
        assert_eq!(elliptic_poly(0, 1, 12), BigInt::from(-1));
    }

    #[test]
    fn normalization_matches_floating_point() {
        let v = BigInt::from(-24);
        assert!((normalize(&v, 2, 12) - (-24.0 / 2f64.powf(5.5))).abs() < 1e-15);
        let v = BigInt::from(-1472);
        assert!((normalize(&v, 4, 12) - (-1472.0 / 2048.0)).abs() < 1e-15);
        let big = BigInt::from(3).pow(999u32);
        let n = normalize(&big, 9, 1000);
        assert!((n - 1.0).abs() < 1e-15);
        let v = BigInt::from(7).pow(600u32);
        let r = normalize(&v, 7, 1000);
        assert!((r.ln() - (600.0 - 499.5) * 7f64.ln()).abs() < 1e-12);
    }
}
