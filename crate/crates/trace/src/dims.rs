//! Newspace dimensions against the main term `N·B₁(N)·(k−1)/12`.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, nu};
use crate::error::{Error, Result};
use crate::formula::{trace_tn_new, validate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewspaceSummary {
    pub level: u64,
    pub weight: u32,
    pub dim: u64,
    /// `N·B₁(N)`, an integer.
    pub nb1: i64,
    /// `N·B₁(N)·(k−1)/12`.
    pub main_term: Ratio<i64>,
    /// `(7/12)·2^{ν(N)} + 1`; the full bound adds `√N/2`.
    pub bound_rational: Ratio<i64>,
    pub bound: f64,
    pub nu: u32,
    /// `|dim − main_term|`.
    pub deviation: Ratio<i64>,
}

/// `N·B₁(N) = ∏ q^r·B₁(q^r)`.
pub fn nb1(level: u64) -> i64 {
    factorize(level)
        .into_iter()
        .map(|(q, r)| {
            let q = q as i64;
            match r {
                1 => q - 1,
                2 => q * q - q - 1,
                _ => q.pow(r - 3) * (q - 1) * (q * q - 1),
            }
        })
        .product()
}

/// `B₁(N)` as an exact rational.
pub fn b1(level: u64) -> Ratio<i64> {
    Ratio::new(nb1(level), level as i64)
}

/// Whether `|dim − NB₁(N)(k−1)/12| ≤ √N/2 + (7/12)2^{ν(N)} + 1`, decided exactly.
pub fn dimension_bound_holds(level: u64, deviation: Ratio<i64>, bound_rational: Ratio<i64>) -> bool {
    let excess = deviation - bound_rational;
    if !excess.is_positive() {
        return true;
    }
    // excess ≤ √N/2  ⇔  4·excess² ≤ N
    excess * excess * 4 <= Ratio::from_integer(level as i64)
}

/// Dimension data without the bound check.
pub fn newspace_summary(level: u64, weight: u32) -> Result<NewspaceSummary> {
    validate(level, weight, 1)?;
    let dim = trace_tn_new(level, weight, 1)?;
    let dim = dim
        .to_u64()
        .ok_or_else(|| Error::Engine(format!("negative newspace dimension {dim}")))?;
    let nb1 = nb1(level);
    let main_term = Ratio::new(nb1 * (weight as i64 - 1), 12);
    let nu = nu(level);
    let bound_rational = Ratio::new(7 * (1i64 << nu), 12) + 1;
    let deviation = (Ratio::from_integer(dim as i64) - main_term).abs();
    Ok(NewspaceSummary {
        level,
        weight,
        dim,
        nb1,
        main_term,
        bound_rational,
        bound: (level as f64).sqrt() / 2.0 + bound_rational.to_f64().unwrap_or(0.0),
        nu,
        deviation,
    })
}

/// [`newspace_summary`], failing if the dimension bound does not hold.
pub fn b1_and_dims(level: u64, weight: u32) -> Result<NewspaceSummary> {
    let s = newspace_summary(level, weight)?;
    if !s.bound_holds() {
        return Err(Error::Engine(format!(
            "dimension {} at level {level}, weight {weight} violates the dimension bound",
            s.dim
        )));
    }
    Ok(s)
}

impl NewspaceSummary {
    pub fn bound_holds(&self) -> bool {
        dimension_bound_holds(self.level, self.deviation, self.bound_rational)
    }

    pub fn is_empty(&self) -> bool {
        self.dim.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b1_table() {
        assert_eq!(b1(1), Ratio::from_integer(1));
        assert_eq!(b1(4), Ratio::new(1, 4));
        assert_eq!(b1(8), Ratio::new(3, 8));
        assert_eq!(b1(12), Ratio::new(1, 4) * Ratio::new(2, 3));
        // Squarefree levels: N·B₁(N) = φ(N).
        for n in [2u64, 6, 15, 30, 77] {
            assert_eq!(nb1(n) as u64, crate::arith::euler_phi(n));
        }
    }

    #[test]
    fn spec_examples() {
        let s = b1_and_dims(1, 12).unwrap();
        assert_eq!((s.dim, s.main_term), (1, Ratio::new(11, 12)));
        let s = b1_and_dims(12, 20).unwrap();
        assert!(s.deviation.to_f64().unwrap() <= 12f64.sqrt() / 2.0 + 7.0 / 3.0 + 1.0);
        assert_eq!(b1_and_dims(2, 12).unwrap().dim, 0);
        assert_eq!(b1_and_dims(2, 8).unwrap().dim, 1);
        assert_eq!(b1_and_dims(11, 2).unwrap().dim, 1);
    }

    #[test]
    fn exact_bound_decision() {
        // deviation 3, rational part 1: holds iff 16 ≤ N.
        let (d, b) = (Ratio::from_integer(3), Ratio::from_integer(1));
        assert!(dimension_bound_holds(16, d, b));
        assert!(!dimension_bound_holds(15, d, b));
    }

    #[test]
    fn bound_holds_for_small_levels() {
        for level in 1..=40 {
            for k in (2..=24).step_by(2) {
                b1_and_dims(level, k).unwrap();
            }
        }
    }
}
