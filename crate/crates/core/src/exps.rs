//! Integer exponent sequences `(c_k)` and their partial products `C_k = c_1 ... c_k`.
//!
//! Sequences are written in a small spec language:
//!
//! | spec            | terms                                           |
//! |-----------------|-------------------------------------------------|
//! | `const:<c>`     | `c_k = c`                                       |
//! | `factorial`     | `c_k = k`, so `C_k = k!`                        |
//! | `powfact:<b>`   | `c_1 = b`, `c_k = b^(k! - (k-1)!)`, so `C_k = b^(k!)` |
//! | `list:<v1>,...` | the listed values, depth limited to the list    |
//!
//! Every sequence satisfies `c_1 >= 1` and `c_k >= 2` for `k >= 2`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 64;

/// Largest term or product materialised, in bits.
pub const TERM_BIT_CEILING: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SequenceKind {
    Constant(u64),
    Factorial,
    PowFactorial(u64),
    Explicit(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentSequence {
    kind: SequenceKind,
    max_depth: Option<usize>,
}

impl ExponentSequence {
    pub fn new(kind: SequenceKind) -> Result<Self> {
        let max_depth = match &kind {
            SequenceKind::Explicit(values) => Some(values.len()),
            _ => Some(DEFAULT_MAX_DEPTH),
        };
        let seq = ExponentSequence { kind, max_depth };
        seq.validate()?;
        Ok(seq)
    }

    pub fn constant(c: u64) -> Result<Self> {
        Self::new(SequenceKind::Constant(c))
    }

    pub fn factorial() -> Self {
        Self::new(SequenceKind::Factorial).expect("factorial sequence is valid")
    }

    pub fn pow_factorial(base: u64) -> Result<Self> {
        Self::new(SequenceKind::PowFactorial(base))
    }

    pub fn explicit(values: Vec<u64>) -> Result<Self> {
        Self::new(SequenceKind::Explicit(values))
    }

    /// Replace the depth limit; `None` means unbounded. Explicit lists never
    /// extend past their length.
    pub fn with_max_depth(mut self, max_depth: Option<usize>) -> Self {
        self.max_depth = match (&self.kind, max_depth) {
            (SequenceKind::Explicit(v), Some(d)) => Some(d.min(v.len())),
            (SequenceKind::Explicit(v), None) => Some(v.len()),
            (_, d) => d,
        };
        self
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.max_depth
    }

    fn validate(&self) -> Result<()> {
        let bad = |index: usize, value: u64| {
            let requirement = if index == 1 { "c_1 >= 1" } else { "c_k >= 2" };
            Error::InvalidTerm {
                index,
                value: value.to_string(),
                requirement,
            }
        };
        match &self.kind {
            SequenceKind::Constant(c) => {
                if *c < 1 {
                    return Err(bad(1, *c));
                }
                if *c < 2 {
                    return Err(bad(2, *c));
                }
            }
            SequenceKind::Factorial => {}
            SequenceKind::PowFactorial(b) => {
                if *b < 1 {
                    return Err(bad(1, *b));
                }
                // c_2 = b^(2! - 1!) = b
                if *b < 2 {
                    return Err(bad(2, *b));
                }
            }
            SequenceKind::Explicit(values) => {
                if values.is_empty() {
                    return Err(Error::MalformedSpec {
                        spec: self.to_string(),
                        reason: "empty list".into(),
                    });
                }
                for (i, &v) in values.iter().enumerate() {
                    let floor = if i == 0 { 1 } else { 2 };
                    if v < floor {
                        return Err(bad(i + 1, v));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::ZeroDepth);
        }
        match self.max_depth {
            Some(max) if k > max => Err(Error::DepthOutOfRange { requested: k, max }),
            _ => Ok(()),
        }
    }

    /// `c_k`, 1-based.
    pub fn term(&self, k: usize) -> Result<BigUint> {
        self.check_depth(k)?;
        Ok(match &self.kind {
            SequenceKind::Constant(c) => BigUint::from(*c),
            SequenceKind::Factorial => BigUint::from(k),
            SequenceKind::PowFactorial(b) => {
                // c_1 = b, then k! - (k-1)! = (k-1) * (k-1)!
                let exponent = if k == 1 {
                    BigUint::one()
                } else {
                    BigUint::from(k - 1) * factorial(k - 1)
                };
                big_pow(*b, &exponent)?
            }
            SequenceKind::Explicit(values) => BigUint::from(values[k - 1]),
        })
    }

    /// `c_k` as a machine integer, or a ceiling error when it does not fit.
    pub fn term_u64(&self, k: usize) -> Result<u64> {
        let t = self.term(k)?;
        t.to_u64().ok_or(Error::BitCeiling {
            needed: t.bits(),
            ceiling: 64,
        })
    }

    /// `C_k = c_1 ... c_k`, exactly.
    pub fn partial_product(&self, k: usize) -> Result<BigUint> {
        self.check_depth(k)?;
        Ok(match &self.kind {
            SequenceKind::Constant(c) => big_pow(*c, &BigUint::from(k))?,
            SequenceKind::Factorial => factorial(k),
            SequenceKind::PowFactorial(b) => big_pow(*b, &factorial(k))?,
            SequenceKind::Explicit(values) => values[..k].iter().map(|&v| BigUint::from(v)).product(),
        })
    }

    /// Whether `k` belongs to the index set `{k : c_{k+1} >= 3}`.
    pub fn in_theta_index_set(&self, k: usize) -> bool {
        self.term(k + 1)
            .map(|c| c >= BigUint::from(3u8))
            .unwrap_or(false)
    }

    /// Whether every term from index `k` on is at least `threshold`, as far
    /// as the sequence is defined. Used to decide which gap theorem covers
    /// the tail of a chain.
    pub fn tail_at_least(&self, k: usize, threshold: u64) -> bool {
        match &self.kind {
            SequenceKind::Constant(c) => *c >= threshold,
            SequenceKind::Factorial => k as u64 >= threshold,
            SequenceKind::PowFactorial(_) => self
                .term(k.max(1))
                .map(|t| t >= BigUint::from(threshold))
                .unwrap_or(true),
            SequenceKind::Explicit(values) => {
                values.iter().skip(k.saturating_sub(1)).all(|&v| v >= threshold)
            }
        }
    }
}

fn factorial(k: usize) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `base^exponent` with a size check before materialising.
fn big_pow(base: u64, exponent: &BigUint) -> Result<BigUint> {
    if base <= 1 {
        return Ok(BigUint::from(base));
    }
    let base_bits = 64 - u64::from(base.leading_zeros());
    let needed = exponent
        .to_u64()
        .and_then(|e| e.checked_mul(base_bits))
        .unwrap_or(u64::MAX);
    if needed > TERM_BIT_CEILING {
        return Err(Error::BitCeiling {
            needed,
            ceiling: TERM_BIT_CEILING,
        });
    }
    let e = exponent.to_u32().expect("checked against ceiling");
    Ok(BigUint::from(base).pow(e))
}

impl fmt::Display for ExponentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SequenceKind::Constant(c) => write!(f, "const:{c}"),
            SequenceKind::Factorial => f.write_str("factorial"),
            SequenceKind::PowFactorial(b) => write!(f, "powfact:{b}"),
            SequenceKind::Explicit(values) => {
                f.write_str("list:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for ExponentSequence {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let number = |s: &str| -> Result<u64> {
            s.trim()
                .parse::<u64>()
                .map_err(|_| malformed(&format!("`{s}` is not a non-negative integer")))
        };
        let spec_trimmed = spec.trim();
        if spec_trimmed == "factorial" {
            return Ok(Self::factorial());
        }
        let (head, body) = spec_trimmed
            .split_once(':')
            .ok_or_else(|| malformed("expected const:<c>, factorial, powfact:<b> or list:<v1>,..."))?;
        match head {
            "const" => Self::constant(number(body)?),
            "powfact" => Self::pow_factorial(number(body)?),
            "list" => {
                let values = body.split(',').map(number).collect::<Result<Vec<_>>>()?;
                Self::explicit(values)
            }
            other => Err(malformed(&format!("unknown sequence kind `{other}`"))),
        }
    }
}

/// Parse an exponent spec.
pub fn parse_exponent_spec(spec: &str) -> Result<ExponentSequence> {
    spec.parse()
}

impl Serialize for ExponentSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExponentSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn constant_three() {
        let s = parse_exponent_spec("const:3").unwrap();
        for k in 1..=10 {
            assert_eq!(s.term(k).unwrap(), big(3));
            assert_eq!(s.partial_product(k).unwrap(), big(3).pow(k as u32));
        }
    }

    #[test]
    fn powfact_three_terms() {
        let s = parse_exponent_spec("powfact:3").unwrap();
        assert_eq!(s.term(1).unwrap(), big(3));
        assert_eq!(s.term(2).unwrap(), big(3));
        assert_eq!(s.term(3).unwrap(), big(81));
        assert_eq!(s.term(4).unwrap(), big(3).pow(18));
        assert_eq!(s.partial_product(2).unwrap(), big(9));
        assert_eq!(s.partial_product(3).unwrap(), big(729));
    }

    #[test]
    fn powfact_products_match_direct_power() {
        for b in [2u64, 3, 5] {
            let s = ExponentSequence::pow_factorial(b).unwrap();
            let mut fact = 1u32;
            for k in 1..=6usize {
                fact *= k as u32;
                let direct = big(b).pow(fact);
                assert_eq!(s.partial_product(k).unwrap(), direct);
                if k > 1 {
                    assert_eq!(
                        s.partial_product(k).unwrap(),
                        s.partial_product(k - 1).unwrap() * s.term(k).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn factorial_products() {
        let s = parse_exponent_spec("factorial").unwrap();
        assert_eq!(s.term(4).unwrap(), big(4));
        assert_eq!(s.partial_product(6).unwrap(), big(720));
    }

    #[test]
    fn list_products_and_depth() {
        let s = parse_exponent_spec("list:3,4,5").unwrap();
        assert_eq!(s.partial_product(3).unwrap(), big(60));
        assert_eq!(
            s.partial_product(4),
            Err(Error::DepthOutOfRange { requested: 4, max: 3 })
        );
    }

    #[test]
    fn rejects_bad_terms_with_index() {
        assert!(matches!(
            parse_exponent_spec("list:0,3"),
            Err(Error::InvalidTerm { index: 1, .. })
        ));
        assert!(matches!(
            parse_exponent_spec("list:2,3,1,4"),
            Err(Error::InvalidTerm { index: 3, .. })
        ));
        assert!(matches!(
            parse_exponent_spec("const:1"),
            Err(Error::InvalidTerm { index: 2, .. })
        ));
        assert!(matches!(
            parse_exponent_spec("powfact:1"),
            Err(Error::InvalidTerm { index: 2, .. })
        ));
        assert!(parse_exponent_spec("list:1,2").is_ok());
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "const", "const:x", "powfact:-2", "cube:3", "list:", "list:3,,4"] {
            assert!(
                matches!(parse_exponent_spec(bad), Err(Error::MalformedSpec { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn depth_defaults_and_overrides() {
        let s = ExponentSequence::factorial();
        assert_eq!(s.max_depth(), Some(DEFAULT_MAX_DEPTH));
        assert!(s.term(65).is_err());
        let s = s.with_max_depth(None);
        assert!(s.term(65).is_ok());
        assert_eq!(s.term(0), Err(Error::ZeroDepth));
    }

    #[test]
    fn theta_index_set() {
        let f = ExponentSequence::factorial();
        assert!(!f.in_theta_index_set(1)); // c_2 = 2
        assert!(f.in_theta_index_set(2)); // c_3 = 3
        let c2 = ExponentSequence::constant(2).unwrap();
        assert!(!c2.in_theta_index_set(5));
    }

    #[test]
    fn oversized_powfact_is_refused() {
        let s = ExponentSequence::pow_factorial(3).unwrap();
        assert!(matches!(s.partial_product(20), Err(Error::BitCeiling { .. })));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(kind in prop_oneof![
            (2u64..1000).prop_map(SequenceKind::Constant),
            Just(SequenceKind::Factorial),
            (2u64..50).prop_map(SequenceKind::PowFactorial),
            (1u64..100, proptest::collection::vec(2u64..1000, 0..8))
                .prop_map(|(h, t)| SequenceKind::Explicit(std::iter::once(h).chain(t).collect())),
        ]) {
            let s = ExponentSequence::new(kind).unwrap();
            let text = s.to_string();
            let back: ExponentSequence = text.parse().unwrap();
            prop_assert_eq!(&back, &s);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
