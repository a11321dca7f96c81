//! Hurwitz class numbers, stored as the integers `12·H(n)`.
//!
//! `H(0) = −1/12`, `H(n) = 0` for `n ≡ 1, 2 (mod 4)`, and otherwise `H(n)` counts
//! reduced positive definite forms of discriminant `−n`, with `x² + y²`-type forms
//! weighted 1/2 and `x² + xy + y²`-type forms weighted 1/3.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::{Arc, OnceLock, RwLock};

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Header line of the on-disk table format.
pub const HEADER: &str = "# hurwitz12 v1";

/// Largest dense table built on demand. Beyond this, values are computed one at a time.
pub const DENSE_LIMIT: u64 = 4_000_000;

/// Dense table of `12·H(n)` for `0 ≤ n ≤ max_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HurwitzTable {
    values: Vec<i64>,
}

impl HurwitzTable {
    /// Sieve over reduced forms `(a, b, c)` with `4ac − b² ≤ max_n`.
    pub fn build(max_n: u64) -> Self {
        let max = max_n as i64;
        let mut values = vec![0i64; max_n as usize + 1];
        values[0] = -1;
        let mut a = 1i64;
        while 3 * a * a <= max {
            for b in -a..=a {
                let mut c = a;
                // b < 0 requires |b| < a and a < c.
                if b < 0 {
                    if -b == a {
                        continue;
                    }
                    c = a + 1;
                }
                let b2 = b * b;
                let mut d = 4 * a * c - b2;
                while d <= max {
                    let w = if b == 0 && a == c {
                        6
                    } else if b == a && a == c {
                        4
                    } else {
                        12
                    };
                    values[d as usize] += w;
                    d += 4 * a;
                    c += 1;
                }
            }
            a += 1;
        }
        HurwitzTable { values }
    }

    pub fn max_n(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    /// `12·H(n)`, or `None` beyond the table.
    pub fn value12(&self, n: u64) -> Option<i64> {
        self.values.get(n as usize).copied()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{HEADER}")?;
        for (n, v) in self.values.iter().enumerate() {
            writeln!(w, "{n}\t{v}")?;
        }
        Ok(())
    }

    /// Parses the text format, checking ascending contiguous indices, `12H(0) = −1`,
    /// vanishing at `n ≡ 1, 2 (mod 4)` and nonnegativity.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let bad = |line: usize, reason: &str| Error::CacheFormat {
            line,
            reason: reason.to_string(),
        };
        match lines.next() {
            Some(Ok(h)) if h.trim() == HEADER => {}
            _ => return Err(bad(1, "missing header")),
        }
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| bad(i + 2, &e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let (n, v) = line
                .split_once('\t')
                .ok_or_else(|| bad(i + 2, "expected n<TAB>value"))?;
            let n: u64 = n.parse().map_err(|_| bad(i + 2, "index"))?;
            let v: i64 = v.trim().parse().map_err(|_| bad(i + 2, "value"))?;
            if n != values.len() as u64 {
                return Err(bad(i + 2, "indices not ascending and contiguous"));
            }
            let ok = match n {
                0 => v == -1,
                _ if n % 4 == 1 || n % 4 == 2 => v == 0,
                _ => v >= 0,
            };
            if !ok {
                return Err(bad(i + 2, "value violates class number invariants"));
            }
            values.push(v);
        }
        if values.is_empty() {
            return Err(bad(2, "empty table"));
        }
        Ok(HurwitzTable { values })
    }
}

/// `12·H(n)` by enumerating reduced forms of discriminant `−n` directly, O(n).
pub fn hurwitz12_isolated(n: u64) -> i64 {
    if n == 0 {
        return -1;
    }
    if n % 4 == 1 || n % 4 == 2 {
        return 0;
    }
    let mut total = 0i64;
    let mut b = n % 2;
    while 3 * b * b <= n {
        let m = (n + b * b) / 4;
        let mut a = b.max(1);
        while a * a <= m {
            if m.is_multiple_of(a) {
                let c = m / a;
                total += if b == 0 && a == c {
                    6
                } else if b == a && a == c {
                    4
                } else if b == 0 || b == a || a == c {
                    12
                } else {
                    24
                };
            }
            a += 1;
        }
        b += 2;
    }
    total
}

/// Process-wide cache: one dense table plus isolated values above it.
///
/// Readers never see partial entries: the dense table is swapped as a whole `Arc`,
/// isolated values are inserted only once computed.
#[derive(Debug, Default)]
pub struct HurwitzCache {
    dense: RwLock<Option<Arc<HurwitzTable>>>,
    isolated: RwLock<HashMap<u64, i64>>,
}

impl HurwitzCache {
    pub fn global() -> &'static HurwitzCache {
        static CACHE: OnceLock<HurwitzCache> = OnceLock::new();
        CACHE.get_or_init(HurwitzCache::default)
    }

    /// Makes sure the dense table covers `max_n` (up to [`DENSE_LIMIT`]).
    pub fn ensure(&self, max_n: u64) {
        let target = max_n.min(DENSE_LIMIT);
        if self.dense_max().is_some_and(|m| m >= target) {
            return;
        }
        // Grow geometrically so repeated small extensions stay cheap.
        let size = target.max(self.dense_max().unwrap_or(0) * 2).clamp(1024, DENSE_LIMIT);
        let table = Arc::new(HurwitzTable::build(size));
        let mut w = self.dense.write().unwrap();
        if w.as_ref().is_none_or(|t| t.max_n() < size) {
            *w = Some(table);
        }
    }

    /// Installs a preloaded table if it is larger than the current one.
    pub fn install(&self, table: HurwitzTable) {
        let mut w = self.dense.write().unwrap();
        if w.as_ref().is_none_or(|t| t.max_n() < table.max_n()) {
            *w = Some(Arc::new(table));
        }
    }

    pub fn dense_max(&self) -> Option<u64> {
        self.dense.read().unwrap().as_ref().map(|t| t.max_n())
    }

    pub fn table(&self) -> Option<Arc<HurwitzTable>> {
        self.dense.read().unwrap().clone()
    }

    pub fn value12(&self, n: u64) -> i64 {
        if let Some(v) = self.dense.read().unwrap().as_ref().and_then(|t| t.value12(n)) {
            return v;
        }
        if let Some(&v) = self.isolated.read().unwrap().get(&n) {
            return v;
        }
        let v = hurwitz12_isolated(n);
        self.isolated.write().unwrap().insert(n, v);
        v
    }
}

/// `12·H(n)` through the global cache.
pub fn hurwitz12(n: u64) -> i64 {
    HurwitzCache::global().value12(n)
}

/// `H(n)` as an exact rational.
pub fn hurwitz(n: u64) -> Ratio<i64> {
    Ratio::new(hurwitz12(n), 12)
}

/// `12·h_w(D)` for a negative discriminant `D = −n`: the weighted count of
/// primitive classes, recovered from `H` by Möbius inversion over the conductor.
pub fn class_number12(n: u64) -> i64 {
    debug_assert!(n > 0 && (n.is_multiple_of(4) || n % 4 == 3));
    let mut total = 0i64;
    let mut g = 1u64;
    while g * g <= n {
        if n.is_multiple_of(g * g) {
            let m = n / (g * g);
            if m.is_multiple_of(4) || m % 4 == 3 {
                let mu = crate::arith::moebius(g);
                if mu != 0 {
                    total += mu as i64 * hurwitz12(m);
                }
            }
        }
        g += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts SL₂(ℤ)-inequivalent forms by brute force: every form of discriminant
    /// −n is reduced to a canonical representative by the classical algorithm.
    fn brute12(n: u64) -> i64 {
        if n == 0 {
            return -1;
        }
        let n = n as i64;
        let mut seen = std::collections::HashSet::new();
        let mut total = 0;
        let bound = n;
        for a in 1..=bound {
            for b in -bound..=bound {
                let num = b * b + n;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                let r = reduce(a, b, c);
                if seen.insert(r) {
                    let (a, b, c) = r;
                    total += if b == 0 && a == c {
                        6
                    } else if a == b && b == c {
                        4
                    } else {
                        12
                    };
                }
            }
        }
        total
    }

    fn reduce(mut a: i64, mut b: i64, mut c: i64) -> (i64, i64, i64) {
        loop {
            if b > a || b <= -a {
                // Translate b into (−a, a].
                let k = (a - b).div_euclid(2 * a);
                let nb = b + 2 * a * k;
                c = (nb * nb + (4 * a * c - b * b)) / (4 * a);
                b = nb;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            if b > a || b <= -a {
                continue;
            }
            return (a, b, c);
        }
    }

    #[test]
    fn small_values() {
        assert_eq!(hurwitz(0), Ratio::new(-1, 12));
        assert_eq!(hurwitz(3), Ratio::new(1, 3));
        assert_eq!(hurwitz(4), Ratio::new(1, 2));
        assert_eq!(hurwitz(23), Ratio::from_integer(3));
        assert_eq!(hurwitz(12), Ratio::new(4, 3));
        assert_eq!(hurwitz(5), Ratio::from_integer(0));
    }

    #[test]
    fn dense_isolated_and_brute_force_agree() {
        let t = HurwitzTable::build(2000);
        for n in 0..=2000u64 {
            let v = t.value12(n).unwrap();
            assert_eq!(v, hurwitz12_isolated(n), "n={n}");
            if n <= 400 {
                assert_eq!(v, brute12(n), "n={n}");
            }
        }
    }

    #[test]
    fn class_number_relation() {
        // Σ_t H(4m − t²) = 2σ(m) − Σ_{d|m} min(d, m/d).
        let t = HurwitzTable::build(4 * 500);
        for m in 1..=500i64 {
            let lhs: i64 = (-2 * m..=2 * m)
                .filter(|s| s * s <= 4 * m)
                .map(|s| t.value12((4 * m - s * s) as u64).unwrap())
                .sum();
            let (mut sigma, mut mins) = (0, 0);
            for d in 1..=m {
                if m % d == 0 {
                    sigma += d;
                    mins += d.min(m / d);
                }
            }
            assert_eq!(lhs, 12 * (2 * sigma - mins), "m={m}");
        }
    }

    #[test]
    fn fundamental_class_numbers() {
        for (n, h) in [
            (3, 4),
            (4, 6),
            (7, 12),
            (8, 12),
            (15, 24),
            (20, 24),
            (23, 36),
            (12, 12),
            (16, 12),
        ] {
            assert_eq!(class_number12(n), h, "n={n}");
        }
        // Non-maximal order of conductor 3 in ℚ(√−3): h = 1, no extra units.
        assert_eq!(class_number12(27), 12);
    }

    #[test]
    fn text_round_trip_and_validation() {
        let t = HurwitzTable::build(300);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(HurwitzTable::read_from(&buf[..]).unwrap(), t);
        let text = String::from_utf8(buf).unwrap();
        let corrupt = text.replacen("\n5\t0\n", "\n5\t12\n", 1);
        assert!(HurwitzTable::read_from(corrupt.as_bytes()).is_err());
        let gap = text.replacen("\n7\t12\n", "\n", 1);
        assert!(HurwitzTable::read_from(gap.as_bytes()).is_err());
        assert!(HurwitzTable::read_from("0\t-1\n".as_bytes()).is_err());
    }

    #[test]
    fn cache_serves_both_paths() {
        let c = HurwitzCache::default();
        assert_eq!(c.value12(23), 36);
        c.ensure(100);
        assert!(c.dense_max().unwrap() >= 100);
        let big = c.dense_max().unwrap() + 3;
        assert_eq!(c.value12(big), hurwitz12_isolated(big));
    }
}
