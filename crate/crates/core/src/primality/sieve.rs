//! Small-prime tables and a segmented sieve over arbitrary big offsets.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// Primes below `limit`, plain Eratosthenes.
pub fn primes_below(limit: u32) -> Vec<u32> {
    let limit = limit as usize;
    if limit < 3 {
        return Vec::new();
    }
    let mut composite = vec![false; limit];
    let mut primes = Vec::new();
    for i in 2..limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u32);
        let mut j = i * i;
        while j < limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Primes below 2^16 used to pre-filter candidates.
pub fn sieving_primes() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| primes_below(1 << 16))
}

/// Marks members of `[start, start + len)` that have a factor among `base`
/// without being that factor themselves. Unmarked entries still need a
/// primality test.
pub fn composite_flags(start: &BigUint, len: usize, base: &[u32]) -> Vec<bool> {
    let mut flags = vec![false; len];
    let small_start = start.to_u64();
    for &p in base {
        let p64 = u64::from(p);
        let r = (start % p).to_u64().expect("remainder below p");
        let mut j = ((p64 - r) % p64) as usize;
        // never strike p itself
        let own = small_start
            .filter(|&s| s <= p64 && p64 - s < len as u64)
            .map(|s| (p64 - s) as usize);
        while j < len {
            if Some(j) != own {
                flags[j] = true;
            }
            j += p as usize;
        }
    }
    flags
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_sizes() {
        assert_eq!(primes_below(100).len(), 25);
        assert_eq!(sieving_primes().len(), 6542);
        assert!(primes_below(2).is_empty());
    }

    #[test]
    fn flags_keep_small_primes() {
        let base = primes_below(50);
        let flags = composite_flags(&BigUint::from(0u8), 60, &base);
        let survivors: Vec<usize> = (0..60).filter(|&i| !flags[i]).collect();
        // 0 is struck (multiple of 2); 1 survives and is left to the primality test
        assert_eq!(
            survivors,
            vec![1, 2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]
        );
    }
}
