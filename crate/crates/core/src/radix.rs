//! Exact integer roots and certified decimal enclosures of `p^(1/C)`.
//!
//! Everything here is integer arithmetic: an enclosure at `d` places is
//! `[floor(p^(1/C) 10^d), floor((p+1)^(1/C) 10^d) + 1]`, computed as integer
//! `C`-th roots of `p * 10^(dC)`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::PrimeChain;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::interval::{pow10, render_decimal, CertifiedDecimalInterval};

/// Default ceiling on radicand size, in bits.
pub const DEFAULT_RADICAND_BITS: u64 = 1 << 24;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadixConfig {
    pub bit_ceiling: u64,
    #[serde(skip, default)]
    pub execution: Execution,
}

impl Default for RadixConfig {
    fn default() -> Self {
        RadixConfig {
            bit_ceiling: DEFAULT_RADICAND_BITS,
            execution: Execution::default(),
        }
    }
}

/// `floor(n^(1/r))`: the unique `m` with `m^r <= n < (m+1)^r`.
///
/// Integer Newton iteration. The start point comes from a floating-point
/// estimate of `log2 n`; one unconditional step lands at or above the floor
/// root (AM-GM), after which iterates decrease strictly until they stop.
pub fn nth_root_floor(n: &BigUint, r: u32) -> BigUint {
    assert!(r >= 1, "root index must be positive");
    if r == 1 || n <= &BigUint::one() {
        return n.clone();
    }
    let bits = n.bits();
    if bits <= u64::from(r) {
        // n < 2^r
        return BigUint::one();
    }
    if r == 2 {
        return num_integer::Roots::sqrt(n);
    }
    let r_big = BigUint::from(r);
    let r_minus_1 = r - 1;
    let step = |x: &BigUint| -> BigUint {
        let denom = x.pow(r_minus_1);
        (x * r_minus_1 + n / denom) / &r_big
    };
    let mut x = step(&initial_guess(n, bits, r));
    loop {
        let y = step(&x);
        if y >= x {
            return x;
        }
        x = y;
    }
}

fn initial_guess(n: &BigUint, bits: u64, r: u32) -> BigUint {
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_u64().expect("64 bits") as f64;
    let log2_root = (shift as f64 + top.log2()) / f64::from(r);
    if log2_root < 60.0 {
        let g = log2_root.exp2().ceil() as u64;
        return BigUint::from(g.max(1));
    }
    let whole = log2_root.floor();
    let mantissa = ((log2_root - whole).exp2() * (1u64 << 52) as f64) as u64;
    BigUint::from(mantissa) << (whole as u64 - 52)
}

fn radicand_bits(p: &BigUint, root: u64, digits: u64) -> u64 {
    let decimal = (digits as f64 * root as f64 * LOG2_10).ceil() as u64;
    p.bits() + 1 + decimal
}

fn check_precision(p: &BigUint, root: u64, digits: u64, ceiling: u64) -> Result<()> {
    if radicand_bits(p, root, digits) <= ceiling {
        return Ok(());
    }
    let room = ceiling.saturating_sub(p.bits() + 1) as f64;
    let max_feasible = (room / (root as f64 * LOG2_10)).floor() as u64;
    Err(Error::PrecisionCeiling {
        digits,
        max_feasible,
    })
}

fn root_u32(root: u64) -> Result<u32> {
    u32::try_from(root).map_err(|_| Error::BitCeiling {
        needed: root,
        ceiling: u64::from(u32::MAX),
    })
}

fn scaled_root_floor(p: &BigUint, root: u32, digits: u64) -> BigUint {
    let scale = pow10(digits * u64::from(root));
    nth_root_floor(&(p * scale), root)
}

/// Enclosure of the cylinder `[p^(1/C), (p+1)^(1/C)]` at `d` places.
pub fn certified_root_enclosure(
    p: &BigUint,
    root: u64,
    digits: u64,
    config: &RadixConfig,
) -> Result<CertifiedDecimalInterval> {
    assert!(!p.is_zero(), "p must be positive");
    check_precision(&(p + 1u32), root, digits, config.bit_ceiling)?;
    let r = root_u32(root)?;
    let next = p + 1u32;
    let (lo, hi) = config.execution.join(
        || scaled_root_floor(p, r, digits),
        || scaled_root_floor(&next, r, digits) + 1u32,
    );
    Ok(CertifiedDecimalInterval::new(lo, hi, digits))
}

/// Enclosure of the single point `p^(1/C)` at `d` places: exact when the
/// root terminates, one unit wide otherwise.
pub fn point_root_enclosure(
    p: &BigUint,
    root: u64,
    digits: u64,
    config: &RadixConfig,
) -> Result<CertifiedDecimalInterval> {
    check_precision(p, root, digits, config.bit_ceiling)?;
    let r = root_u32(root)?;
    let radicand = p * pow10(digits * root);
    let lo = nth_root_floor(&radicand, r);
    let hi = if lo.pow(r) == radicand { lo.clone() } else { &lo + 1u32 };
    Ok(CertifiedDecimalInterval::new(lo, hi, digits))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitResult {
    /// Common decimal prefix of the enclosure, truncated, e.g. `"1.3052"`.
    pub digits: String,
    pub agreed_places: u64,
    pub enclosure: CertifiedDecimalInterval,
    pub chain_depth_used: usize,
}

/// Agreed digits of every constant whose chain starts with `chain`.
///
/// Precision starts a few places past the expected width of the last
/// cylinder and grows until at least three non-agreeing places follow the
/// agreed prefix, or `max_digits` is reached.
pub fn prc_digits(chain: &PrimeChain, max_digits: u64, config: &RadixConfig) -> Result<DigitResult> {
    let depth = chain.primes().len();
    let p = chain.primes().last().expect("non-empty chain");
    let c = chain.exps().partial_product(depth)?;
    let root = c.to_u64().ok_or(Error::BitCeiling {
        needed: c.bits(),
        ceiling: 64,
    })?;
    let width_places = ((p.bits() as f64 + (root as f64).log2()) / LOG2_10).floor() as u64;
    let mut d = (width_places + 4).min(max_digits);
    loop {
        let enclosure = certified_root_enclosure(p, root, d, config)?;
        let (digits, places) = enclosure.agreed_prefix().unwrap_or_default();
        if places + 3 <= d || d >= max_digits {
            return Ok(DigitResult {
                digits,
                agreed_places: places,
                enclosure,
                chain_depth_used: depth,
            });
        }
        d = (d + (d / 2).max(8)).min(max_digits);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FloorVerdict {
    /// Every real in the enclosure has `floor(x^C) = p`.
    Recovered,
    /// No real in the enclosure has `floor(x^C) = p`.
    Mismatch,
    /// The enclosure straddles a boundary `p^(1/C)` or `(p+1)^(1/C)`.
    Indeterminate,
}

/// Decides `floor(x^C) = p` for all `x` in the enclosure by comparing
/// `lo^C`, `hi^C` with `p 10^(dC)` and `(p+1) 10^(dC)`.
pub fn verify_floor_recovery(
    enclosure: &CertifiedDecimalInterval,
    power: &BigUint,
    expected: &BigUint,
    config: &RadixConfig,
) -> Result<FloorVerdict> {
    let c = power.to_u32().ok_or(Error::BitCeiling {
        needed: power.bits(),
        ceiling: 32,
    })?;
    let needed = enclosure.hi_mantissa().bits().saturating_mul(u64::from(c));
    if needed > config.bit_ceiling {
        return Err(Error::BitCeiling {
            needed,
            ceiling: config.bit_ceiling,
        });
    }
    let scale = pow10(enclosure.digits_after_point() * u64::from(c));
    let floor_lo = expected * &scale;
    let floor_hi = (expected + 1u32) * &scale;
    let (lo_pow, hi_pow) = config.execution.join(
        || enclosure.lo_mantissa().pow(c),
        || enclosure.hi_mantissa().pow(c),
    );
    Ok(if floor_lo <= lo_pow && hi_pow < floor_hi {
        FloorVerdict::Recovered
    } else if hi_pow < floor_lo || lo_pow >= floor_hi {
        FloorVerdict::Mismatch
    } else {
        FloorVerdict::Indeterminate
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactFraction {
    #[serde(with = "crate::serde_big")]
    pub numerator: BigUint,
    #[serde(with = "crate::serde_big")]
    pub denominator: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalApprox {
    #[serde(with = "crate::serde_big")]
    pub numerator: BigUint,
    pub denominator: u64,
    /// `m/n` lies in the enclosure; nothing can be certified.
    pub inside: bool,
    /// Exact lower bound on the distance from every point of the enclosure.
    pub distance_bound: Option<ExactFraction>,
    /// The same bound truncated to a short decimal (still a lower bound).
    pub distance_decimal: Option<String>,
}

/// For each `n <= max_den`, the nearest `m/n` to the enclosure midpoint and
/// a certified separation when it falls outside. Meaningful once the
/// enclosure is narrower than `10^-2`.
pub fn rational_approx_scan(enclosure: &CertifiedDecimalInterval, max_den: u64) -> Vec<RationalApprox> {
    let scale = enclosure.scale();
    let lo = enclosure.lo_mantissa();
    let hi = enclosure.hi_mantissa();
    let sum = lo + hi;
    (1..=max_den)
        .map(|n| {
            let nb = BigUint::from(n);
            // m = round(n * (lo + hi) / (2 * 10^d))
            let m = (&sum * &nb + &scale) / (&scale * 2u32);
            let m_scaled = &m * &scale;
            let lo_n = lo * &nb;
            let hi_n = hi * &nb;
            let gap = if m_scaled < lo_n {
                Some(&lo_n - &m_scaled)
            } else if m_scaled > hi_n {
                Some(&m_scaled - &hi_n)
            } else {
                None
            };
            let distance_bound = gap.map(|g| {
                let den = &nb * &scale;
                let common = g.gcd(&den);
                ExactFraction {
                    numerator: g / &common,
                    denominator: den / common,
                }
            });
            let distance_decimal = distance_bound.as_ref().map(truncated_decimal);
            RationalApprox {
                numerator: m,
                denominator: n,
                inside: distance_bound.is_none(),
                distance_bound,
                distance_decimal,
            }
        })
        .collect()
}

/// `num/den` rounded down to three significant digits.
fn truncated_decimal(f: &ExactFraction) -> String {
    let num_digits = f.numerator.to_string().len() as i64;
    let den_digits = f.denominator.to_string().len() as i64;
    let mut places = (den_digits - num_digits + 2).max(0) as u64;
    let hundred = BigUint::from(100u32);
    loop {
        let m = (&f.numerator * pow10(places)) / &f.denominator;
        if m >= hundred || f.numerator.is_zero() {
            return render_decimal(&m, places);
        }
        places += 1;
    }
}
