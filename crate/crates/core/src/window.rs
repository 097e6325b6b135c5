use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The integers `n` with `p^c <= n < (p+1)^c - 1`, where any successor of
/// `p` in a prime chain must lie. `(p+1)^c - 1` itself is excluded: it is
/// divisible by `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    #[serde(with = "crate::serde_big")]
    pub lo: BigUint,
    #[serde(with = "crate::serde_big")]
    pub hi_exclusive: BigUint,
    #[serde(with = "crate::serde_big")]
    pub parent_prime: BigUint,
    pub exponent: u64,
}

impl Window {
    /// Builds the window after `p` for exponent `c`, refusing when `(p+1)^c`
    /// would need more than `bit_ceiling` bits.
    pub fn new(p: &BigUint, c: u64, bit_ceiling: u64) -> Result<Self> {
        let needed = (p + 1u32).bits().saturating_mul(c);
        if needed > bit_ceiling {
            return Err(Error::BitCeiling {
                needed,
                ceiling: bit_ceiling,
            });
        }
        let e = u32::try_from(c).map_err(|_| Error::BitCeiling {
            needed,
            ceiling: bit_ceiling,
        })?;
        let lo = p.pow(e);
        let hi_exclusive = (p + 1u32).pow(e) - 1u32;
        Ok(Window {
            lo,
            hi_exclusive,
            parent_prime: p.clone(),
            exponent: c,
        })
    }

    /// Number of admissible integers.
    pub fn width(&self) -> BigUint {
        if self.hi_exclusive > self.lo {
            &self.hi_exclusive - &self.lo
        } else {
            BigUint::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.hi_exclusive <= self.lo
    }

    pub fn contains(&self, n: &BigUint) -> bool {
        &self.lo <= n && n < &self.hi_exclusive
    }

    /// Largest admissible value, `(p+1)^c - 2`.
    pub fn last(&self) -> Option<BigUint> {
        (!self.is_empty()).then(|| &self.hi_exclusive - BigUint::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_window_after_two() {
        let w = Window::new(&BigUint::from(2u8), 3, 1 << 20).unwrap();
        assert_eq!(w.lo, BigUint::from(8u8));
        assert_eq!(w.hi_exclusive, BigUint::from(26u8));
        assert_eq!(w.last(), Some(BigUint::from(25u8)));
        assert!(w.contains(&BigUint::from(25u8)));
        assert!(!w.contains(&BigUint::from(26u8)));
        assert_eq!(w.width(), BigUint::from(18u8));
    }

    #[test]
    fn nonempty_for_p_and_c_at_least_two() {
        for p in 2u32..60 {
            for c in 2..8 {
                let w = Window::new(&BigUint::from(p), c, 1 << 20).unwrap();
                assert!(w.lo < w.hi_exclusive, "p={p} c={c}");
            }
        }
    }

    #[test]
    fn refuses_past_ceiling() {
        let err = Window::new(&BigUint::from(1000u32), 1000, 4096).unwrap_err();
        assert!(matches!(err, Error::BitCeiling { .. }));
    }
}
