use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// The closed interval `[lo * 10^-d, hi * 10^-d]` with exact integer mantissas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CertifiedDecimalInterval {
    #[serde(with = "crate::serde_big")]
    lo_mantissa: BigUint,
    #[serde(with = "crate::serde_big")]
    hi_mantissa: BigUint,
    digits_after_point: u64,
}

impl CertifiedDecimalInterval {
    /// Panics if `lo > hi`.
    pub fn new(lo_mantissa: BigUint, hi_mantissa: BigUint, digits_after_point: u64) -> Self {
        assert!(lo_mantissa <= hi_mantissa, "interval endpoints out of order");
        CertifiedDecimalInterval {
            lo_mantissa,
            hi_mantissa,
            digits_after_point,
        }
    }

    pub fn lo_mantissa(&self) -> &BigUint {
        &self.lo_mantissa
    }

    pub fn hi_mantissa(&self) -> &BigUint {
        &self.hi_mantissa
    }

    pub fn digits_after_point(&self) -> u64 {
        self.digits_after_point
    }

    /// `10^d`.
    pub fn scale(&self) -> BigUint {
        pow10(self.digits_after_point)
    }

    /// Width in units of `10^-d`.
    pub fn width_mantissa(&self) -> BigUint {
        &self.hi_mantissa - &self.lo_mantissa
    }

    pub fn lo_decimal(&self) -> String {
        render_decimal(&self.lo_mantissa, self.digits_after_point)
    }

    pub fn hi_decimal(&self) -> String {
        render_decimal(&self.hi_mantissa, self.digits_after_point)
    }

    pub fn width_decimal(&self) -> String {
        render_decimal(&self.width_mantissa(), self.digits_after_point)
    }

    /// The decimal expansion shared by every real in the interval, as
    /// `(digits, places after the point)`. Truncation is monotone, so the
    /// common prefix of the two endpoints is shared by everything between.
    /// `None` when even the integer parts differ.
    pub fn agreed_prefix(&self) -> Option<(String, u64)> {
        let d = self.digits_after_point;
        let (lo_int, lo_frac) = split_decimal(&self.lo_mantissa, d);
        let (hi_int, hi_frac) = split_decimal(&self.hi_mantissa, d);
        if lo_int != hi_int {
            return None;
        }
        let places = lo_frac
            .bytes()
            .zip(hi_frac.bytes())
            .take_while(|(a, b)| a == b)
            .count();
        let mut digits = lo_int;
        if places > 0 {
            digits.push('.');
            digits.push_str(&lo_frac[..places]);
        }
        Some((digits, places as u64))
    }

    /// The same enclosure at `d' <= d` places, rounding outward.
    pub fn coarsen(&self, digits_after_point: u64) -> Self {
        if digits_after_point >= self.digits_after_point {
            return self.clone();
        }
        let div = pow10(self.digits_after_point - digits_after_point);
        let lo = &self.lo_mantissa / &div;
        let (q, r) = self.hi_mantissa.div_rem(&div);
        let hi = if r.is_zero() { q } else { q + 1u32 };
        CertifiedDecimalInterval::new(lo, hi, digits_after_point)
    }

    /// Certifiably strictly left of `other` up to a shared endpoint:
    /// `self.hi <= other.lo`, compared exactly across scales.
    pub fn precedes(&self, other: &Self) -> bool {
        let (a, b) = align(
            &self.hi_mantissa,
            self.digits_after_point,
            &other.lo_mantissa,
            other.digits_after_point,
        );
        a <= b
    }

    /// Whether `self` lies inside `other`, compared exactly across scales.
    pub fn within(&self, other: &Self) -> bool {
        let (slo, olo) = align(
            &self.lo_mantissa,
            self.digits_after_point,
            &other.lo_mantissa,
            other.digits_after_point,
        );
        let (shi, ohi) = align(
            &self.hi_mantissa,
            self.digits_after_point,
            &other.hi_mantissa,
            other.digits_after_point,
        );
        olo <= slo && shi <= ohi
    }
}

pub(crate) fn pow10(d: u64) -> BigUint {
    BigUint::from(10u8).pow(u32::try_from(d).expect("decimal exponent fits in u32"))
}

fn align(a: &BigUint, da: u64, b: &BigUint, db: u64) -> (BigUint, BigUint) {
    if da >= db {
        (a.clone(), b * pow10(da - db))
    } else {
        (a * pow10(db - da), b.clone())
    }
}

fn split_decimal(m: &BigUint, d: u64) -> (String, String) {
    let text = m.to_string();
    let d = d as usize;
    let padded = if text.len() <= d {
        format!("{}{}", "0".repeat(d + 1 - text.len()), text)
    } else {
        text
    };
    let cut = padded.len() - d;
    (padded[..cut].to_string(), padded[cut..].to_string())
}

/// `m * 10^-d` as a decimal string.
pub fn render_decimal(m: &BigUint, d: u64) -> String {
    let (int, frac) = split_decimal(m, d);
    if frac.is_empty() {
        int
    } else {
        format!("{int}.{frac}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: u64, hi: u64, d: u64) -> CertifiedDecimalInterval {
        CertifiedDecimalInterval::new(BigUint::from(lo), BigUint::from(hi), d)
    }

    #[test]
    fn rendering() {
        assert_eq!(render_decimal(&BigUint::from(130529u32), 5), "1.30529");
        assert_eq!(render_decimal(&BigUint::from(5u32), 3), "0.005");
        assert_eq!(render_decimal(&BigUint::from(42u32), 0), "42");
    }

    #[test]
    fn agreed_prefix_truncates() {
        let i = iv(1305299, 1305342, 6);
        assert_eq!(i.agreed_prefix(), Some(("1.305".to_string(), 3)));
        let i = iv(1999, 2001, 3);
        assert_eq!(i.agreed_prefix(), None);
        let i = iv(15, 15, 1);
        assert_eq!(i.agreed_prefix(), Some(("1.5".to_string(), 1)));
        let i = iv(1001, 1009, 3);
        assert_eq!(i.agreed_prefix(), Some(("1.00".to_string(), 2)));
        let i = iv(1101, 1909, 3);
        assert_eq!(i.agreed_prefix(), Some(("1".to_string(), 0)));
    }

    #[test]
    fn coarsen_rounds_outward() {
        let i = iv(130529, 131839, 5).coarsen(2);
        assert_eq!(i, iv(130, 132, 2));
        let exact = iv(1500, 1500, 3).coarsen(1);
        assert_eq!(exact, iv(15, 15, 1));
    }

    #[test]
    fn ordering_across_scales() {
        assert!(iv(10, 12, 1).precedes(&iv(120, 130, 2)));
        assert!(!iv(10, 13, 1).precedes(&iv(120, 130, 2)));
        assert!(iv(121, 125, 2).within(&iv(12, 13, 1)));
        assert!(!iv(119, 125, 2).within(&iv(12, 13, 1)));
    }

    #[test]
    #[should_panic]
    fn rejects_reversed() {
        iv(2, 1, 0);
    }
}
