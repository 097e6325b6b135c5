//! Primality decisions with explicit certainty tiers, and prime search
//! inside chain windows.
//!
//! Below [`DETERMINISTIC_BOUND`] a Miller-Rabin test over the first twelve
//! prime bases is exact. Above it, a candidate must survive trial division,
//! a base-2 strong test, a strong Lucas test (together, Baillie-PSW) and the
//! configured number of extra Miller-Rabin rounds with bases drawn from a
//! generator seeded by the candidate itself. Composite verdicts are always
//! exact.

mod lucas;
mod scan;
pub mod sieve;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use lucas::strong_lucas;
pub use scan::{
    count_primes_in_range, count_primes_in_window, max_prime_in_window, min_prime_in_range,
    min_prime_in_window, FoundPrime, PrimeCount, SearchConfig, WindowSearch,
    DEFAULT_BUDGET, DEFAULT_ENUMERATION_CAP,
};

/// Smallest integer for which the twelve-base Miller-Rabin test is not
/// known to be exact (Sorenson and Webster).
pub const DETERMINISTIC_BOUND: u128 = 318_665_857_834_031_151_167_461;

const DETERMINISTIC_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub const DEFAULT_ROUNDS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Certainty {
    Deterministic,
    Probable { rounds: u32 },
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certainty::Deterministic => f.write_str("deterministic"),
            Certainty::Probable { rounds } => write!(f, "probable:{rounds}"),
        }
    }
}

impl FromStr for Certainty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "deterministic" {
            return Ok(Certainty::Deterministic);
        }
        s.strip_prefix("probable:")
            .and_then(|r| r.parse().ok())
            .map(|rounds| Certainty::Probable { rounds })
            .ok_or_else(|| format!("unknown certainty `{s}`"))
    }
}

impl Serialize for Certainty {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Certainty {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimalityConfig {
    /// Extra random-base Miller-Rabin rounds above the deterministic range.
    pub rounds: u32,
}

impl Default for PrimalityConfig {
    fn default() -> Self {
        PrimalityConfig {
            rounds: DEFAULT_ROUNDS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimalityVerdict {
    #[serde(with = "crate::serde_big")]
    pub value: BigUint,
    pub is_prime: bool,
    pub certainty: Certainty,
}

/// Certainty tier that a positive verdict for `n` carries.
pub fn certainty_for(n: &BigUint, config: &PrimalityConfig) -> Certainty {
    if fits_deterministic(n) {
        Certainty::Deterministic
    } else {
        Certainty::Probable {
            rounds: config.rounds,
        }
    }
}

fn fits_deterministic(n: &BigUint) -> bool {
    n.to_u128().is_some_and(|v| v < DETERMINISTIC_BOUND)
}

pub fn is_prime(n: &BigUint, config: &PrimalityConfig) -> PrimalityVerdict {
    let (prime, certainty) = test(n, config);
    PrimalityVerdict {
        value: n.clone(),
        is_prime: prime,
        certainty,
    }
}

/// Verdict without cloning the value.
pub fn test(n: &BigUint, config: &PrimalityConfig) -> (bool, Certainty) {
    if let Some(small) = n.to_u64() {
        return (is_prime_u64(small), Certainty::Deterministic);
    }
    let prime = if fits_deterministic(n) {
        DETERMINISTIC_BASES
            .iter()
            .all(|&b| strong_probable_prime(n, &BigUint::from(b)))
    } else {
        passes_bpsw_and_rounds(n, config.rounds)
    };
    if prime {
        (true, certainty_for(n, config))
    } else {
        (false, Certainty::Deterministic)
    }
}

fn passes_bpsw_and_rounds(n: &BigUint, rounds: u32) -> bool {
    if n.is_even() {
        return false;
    }
    for &p in &sieve::sieving_primes()[..168] {
        if (n % p).is_zero() {
            return false;
        }
    }
    if !strong_probable_prime(n, &BigUint::from(2u8)) || !strong_lucas(n) {
        return false;
    }
    let mut rng = ChaCha8Rng::from_seed(seed_from(n));
    let lo = BigUint::from(3u8);
    let hi = n - 1u32;
    (0..rounds).all(|_| strong_probable_prime(n, &rng.gen_biguint_range(&lo, &hi)))
}

fn seed_from(n: &BigUint) -> [u8; 32] {
    let mut seed = [0u8; 32];
    for (i, b) in n.to_bytes_le().into_iter().enumerate() {
        seed[i % 32] ^= b.rotate_left((i / 32) as u32 % 8);
    }
    seed
}

/// Strong probable-prime test to base `a` for odd `n > 2`.
fn strong_probable_prime(n: &BigUint, a: &BigUint) -> bool {
    let n_minus_1 = n - 1u32;
    let a = a % n;
    if a.is_zero() || a.is_one() || a == n_minus_1 {
        return true;
    }
    let s = n_minus_1.trailing_zeros().unwrap();
    let d = &n_minus_1 >> s;
    let mut x = a.modpow(&d, n);
    if x.is_one() || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
        if x.is_one() {
            return false;
        }
    }
    false
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Exact for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &DETERMINISTIC_BASES {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &DETERMINISTIC_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> PrimalityConfig {
        PrimalityConfig::default()
    }

    #[test]
    fn small_examples() {
        let v = is_prime(&BigUint::from(11u8), &cfg());
        assert!(v.is_prime);
        assert_eq!(v.certainty, Certainty::Deterministic);
        assert!(!is_prime(&BigUint::from(27u8), &cfg()).is_prime);
        assert!(!is_prime(&BigUint::zero(), &cfg()).is_prime);
        assert!(!is_prime(&BigUint::one(), &cfg()).is_prime);
        assert!(is_prime(&BigUint::from(2u8), &cfg()).is_prime);
    }

    #[test]
    fn mills_fourth_prime_matches_trial_division() {
        let n = 2_521_008_887u64;
        let trial = (2..=n.isqrt()).all(|d| !n.is_multiple_of(d));
        assert!(trial);
        let v = is_prime(&BigUint::from(n), &cfg());
        assert!(v.is_prime);
        assert_eq!(v.certainty, Certainty::Deterministic);
    }

    #[test]
    fn agrees_with_sieve_below_a_million() {
        let limit = 1_000_000u32;
        let primes = sieve::primes_below(limit);
        let mut is_p = vec![false; limit as usize];
        for &p in &primes {
            is_p[p as usize] = true;
        }
        for n in 0..limit {
            assert_eq!(is_prime_u64(u64::from(n)), is_p[n as usize], "{n}");
        }
        // the big-integer path on slices of the same range
        for n in (1000..3000).chain(999_000..limit) {
            assert_eq!(passes_bpsw_and_rounds(&BigUint::from(n), 4), is_p[n as usize], "{n}");
        }
    }

    #[test]
    fn deterministic_tier_above_u64() {
        // 2^64 + 13 is prime, 2^64 + 1 = 274177 * 67280421310721
        let two64 = BigUint::one() << 64;
        let v = is_prime(&(&two64 + 13u32), &cfg());
        assert!(v.is_prime);
        assert_eq!(v.certainty, Certainty::Deterministic);
        assert!(!is_prime(&(&two64 + 1u32), &cfg()).is_prime);
    }

    #[test]
    fn large_known_values() {
        // 2^127 - 1 is a Mersenne prime; 2^128 + 1 is composite
        let m127 = (BigUint::one() << 127) - 1u32;
        let v = is_prime(&m127, &cfg());
        assert!(v.is_prime);
        assert_eq!(v.certainty, Certainty::Probable { rounds: 32 });
        assert!(!is_prime(&((BigUint::one() << 128) + 1u32), &cfg()).is_prime);
        let p3 = BigUint::from(11u8).pow(81) + 140u32;
        assert!(is_prime(&p3, &cfg()).is_prime);
        for gap in (0u32..140).filter(|g| g % 2 == 0) {
            assert!(!is_prime(&(BigUint::from(11u8).pow(81) + gap), &cfg()).is_prime);
        }
    }

    #[test]
    fn carmichael_and_squares_rejected() {
        let big_square = BigUint::from(1_000_000_007u64).pow(2) * BigUint::from(1_000_000_009u64).pow(2);
        assert!(!is_prime(&big_square, &cfg()).is_prime);
        // Arnault's base-table strong pseudoprime is caught by Lucas
        let arnault: BigUint = "2887148238050771212671429597130393991977609459279722700926516024197432303799152733116328983144639225941977803110929349655578418949441740933805615113979999421542416933972905423711002751042080134966731755152859226962916775325475044445856101949404200039904432116776619949629539250452698719329070373564032273701278453899126120309244841494728976885406024976768122077071687938121709811322297802059565867".parse().unwrap();
        assert!(!is_prime(&arnault, &cfg()).is_prime);
    }

    #[test]
    fn certainty_text_round_trip() {
        for c in [Certainty::Deterministic, Certainty::Probable { rounds: 32 }] {
            assert_eq!(c.to_string().parse::<Certainty>().unwrap(), c);
        }
    }
}
