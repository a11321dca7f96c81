//! Unnormalized Hecke eigenvalue sequences and their Hecke angles.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use stpair_core::arith::{angle_from_eigenvalue, prime_window};
use stpair_core::paircorr::AngleSet;
use stpair_trace::normalize;

use crate::error::{Error, Result};

/// `a(n)` for `1 ≤ n ≤ n_max` of a normalized newform of weight `k`, level `N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub label: String,
    pub weight: u32,
    pub level: u64,
    /// `coeffs[n − 1] = a(n)`.
    #[serde(with = "bigint_vec")]
    coeffs: Vec<BigInt>,
}

impl CoefficientSeries {
    pub fn new(label: impl Into<String>, level: u64, weight: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        let label = label.into();
        if coeffs.first() != Some(&BigInt::one()) {
            return Err(Error::Validation {
                label,
                reason: "a(1) must be 1".into(),
            });
        }
        Ok(CoefficientSeries {
            label,
            weight,
            level,
            coeffs,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.coeffs.len() as u64
    }

    /// `a(n)`, `1 ≤ n ≤ n_max`.
    pub fn a(&self, n: u64) -> Option<&BigInt> {
        n.checked_sub(1).and_then(|i| self.coeffs.get(i as usize))
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// `a(n)/n^{(k−1)/2}`.
    pub fn normalized(&self, n: u64) -> Option<f64> {
        self.a(n).map(|v| normalize(v, n, self.weight))
    }

    /// First coprime pair `(m, n)`, `mn ≤ limit`, with `a(mn) ≠ a(m)a(n)`.
    pub fn multiplicativity_violation(&self, limit: u64) -> Option<(u64, u64)> {
        let limit = limit.min(self.n_max());
        for m in 2..=limit {
            for n in m + 1..=limit / m {
                if m.gcd(&n) == 1 && self.a(m * n) != Some(&(self.a(m)? * self.a(n)?)) {
                    return Some((m, n));
                }
            }
        }
        None
    }

    /// First `(p, j)` with `a(p^{j+1}) ≠ a(p)a(p^j) − p^{k−1}a(p^{j−1})`, for `p ≤ p_max`
    /// coprime to the level and `j ≤ j_max` inside the series.
    pub fn hecke_recursion_violation(&self, p_max: u64, j_max: u32) -> Option<(u64, u32)> {
        let pk = |p: u64| BigInt::from(p).pow(self.weight - 1);
        for p in prime_window(p_max, self.level).primes().iter().copied() {
            for j in 1..=j_max {
                let Some(next) = p.checked_pow(j + 1).filter(|&n| n <= self.n_max()) else {
                    break;
                };
                let lhs = self.a(next)?;
                let rhs = self.a(p)? * self.a(p.pow(j))? - pk(p) * self.a(p.pow(j - 1))?;
                if *lhs != rhs {
                    return Some((p, j));
                }
            }
        }
        None
    }
}

/// Δ = q∏(1 − qⁿ)²⁴ to `n_max` as eight sparse convolutions with
/// `∏(1 − qⁿ)³ = Σ_j (−1)^j (2j+1) q^{j(j+1)/2}`.
pub fn delta_series(n_max: u64) -> CoefficientSeries {
    let len = n_max as usize; // exponents 0..len−1 of ∏(1 − qⁿ)²⁴
    let cube: Vec<(usize, i128)> = (0..)
        .map(|j: usize| {
            (
                j * (j + 1) / 2,
                if j.is_multiple_of(2) { 1 } else { -1 } * (2 * j as i128 + 1),
            )
        })
        .take_while(|&(e, _)| e < len)
        .collect();
    let mut acc = vec![0i128; len];
    acc[0] = 1;
    for _ in 0..8 {
        let mut next = vec![0i128; len];
        for &(e, c) in &cube {
            for (i, &v) in acc[..len - e].iter().enumerate() {
                if v != 0 {
                    next[i + e] += c * v;
                }
            }
        }
        acc = next;
    }
    let coeffs = acc.into_iter().map(BigInt::from).collect();
    CoefficientSeries::new("delta", 1, 12, coeffs).expect("leading coefficient is 1")
}

/// Hecke angles at the primes `p ≤ x` coprime to the level.
pub fn angles_from_series(s: &CoefficientSeries, x: u64) -> Result<AngleSet> {
    if x > s.n_max() {
        return Err(Error::InvalidParameter {
            name: "x",
            reason: format!("{x} exceeds the series length {}", s.n_max()),
        });
    }
    let window = prime_window(x, s.level);
    let mut angles = Vec::with_capacity(window.count());
    for &p in window.primes() {
        let v = s.normalized(p).expect("p ≤ n_max");
        let angle = angle_from_eigenvalue(v).map_err(|_| Error::Validation {
            label: s.label.clone(),
            reason: format!("a({p})/p^((k-1)/2) = {v} violates the Deligne bound"),
        })?;
        angles.push(angle);
    }
    Ok(AngleSet::new(s.label.clone(), window, angles)?)
}

mod bigint_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}
