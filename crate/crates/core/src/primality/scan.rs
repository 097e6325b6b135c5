//! Prime search over integer ranges: leftmost, rightmost and full counts.
//!
//! Ranges are cut into fixed-size segments. Each segment is sieved by the
//! small-prime table and its survivors tested in order. Segments of one
//! batch may be processed concurrently; the reported prime is always the
//! global extremum, whatever the worker count.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{sieve, test, Certainty, PrimalityConfig};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::window::Window;

pub const DEFAULT_BUDGET: u64 = 1_000_000;
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub primality: PrimalityConfig,
    /// Candidates examined per window search before giving up.
    pub budget: u64,
    /// Widest window that may be enumerated in full.
    pub enumeration_cap: u64,
    #[serde(skip, default)]
    pub execution: Execution,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            primality: PrimalityConfig::default(),
            budget: DEFAULT_BUDGET,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundPrime {
    pub value: BigUint,
    pub certainty: Certainty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WindowSearch {
    Found(FoundPrime),
    /// The whole range was scanned and holds no prime.
    Empty,
    /// The budget ran out first; `scanned` candidates were ruled out.
    BudgetExhausted { scanned: u64 },
}

impl WindowSearch {
    pub fn found(&self) -> Option<&BigUint> {
        match self {
            WindowSearch::Found(p) => Some(&p.value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeCount {
    pub count: u64,
    /// Present when a listing was requested.
    pub primes: Option<Vec<BigUint>>,
}

fn segment_len(n: &BigUint) -> u64 {
    // wider segments where primes are dense and tests are cheap
    if n.bits() <= 64 {
        1 << 15
    } else {
        1 << 11
    }
}

#[derive(Debug, Clone)]
struct Segment {
    start: BigUint,
    len: usize,
}

fn base_for(end: &BigUint) -> &'static [u32] {
    let all = sieve::sieving_primes();
    match end.to_u64() {
        Some(e) => {
            let root = e.isqrt() as u32;
            let n = all.partition_point(|&p| p <= root.max(2));
            &all[..n]
        }
        None => all,
    }
}

fn primes_in_segment(
    seg: &Segment,
    base: &[u32],
    config: &PrimalityConfig,
    descending: bool,
    mut visit: impl FnMut(BigUint, Certainty) -> bool,
) {
    let flags = sieve::composite_flags(&seg.start, seg.len, base);
    let mut check = |i: usize| -> bool {
        if flags[i] {
            return true;
        }
        let n = &seg.start + i;
        let (prime, certainty) = test(&n, config);
        if prime {
            visit(n, certainty)
        } else {
            true
        }
    };
    if descending {
        for i in (0..seg.len).rev() {
            if !check(i) {
                return;
            }
        }
    } else {
        for i in 0..seg.len {
            if !check(i) {
                return;
            }
        }
    }
}

fn first_in_segment(seg: &Segment, base: &[u32], config: &PrimalityConfig, descending: bool) -> Option<FoundPrime> {
    let mut hit = None;
    primes_in_segment(seg, base, config, descending, |value, certainty| {
        hit = Some(FoundPrime { value, certainty });
        false
    });
    hit
}

fn extremal_prime(start: &BigUint, end: &BigUint, config: &SearchConfig, descending: bool) -> WindowSearch {
    if start >= end {
        return WindowSearch::Empty;
    }
    let base = base_for(end);
    let seg_len = segment_len(end);
    let width = config.execution.batch_width();
    let mut scanned = 0u64;
    // `lo`/`hi` bound the part of the range not yet scanned
    let mut lo = start.clone();
    let mut hi = end.clone();
    while lo < hi {
        let mut batch = Vec::with_capacity(width);
        while batch.len() < width && lo < hi && scanned < config.budget {
            let remaining = (&hi - &lo).to_u64().unwrap_or(u64::MAX);
            let len = seg_len.min(remaining).min(config.budget - scanned);
            scanned += len;
            if descending {
                hi -= len;
                batch.push(Segment { start: hi.clone(), len: len as usize });
            } else {
                batch.push(Segment { start: lo.clone(), len: len as usize });
                lo += len;
            }
        }
        if batch.is_empty() {
            break;
        }
        let search = |seg: &Segment| first_in_segment(seg, base, &config.primality, descending);
        if let Some(found) = config.execution.find_map_first(&batch, search) {
            return WindowSearch::Found(found);
        }
    }
    if lo < hi {
        WindowSearch::BudgetExhausted { scanned }
    } else {
        WindowSearch::Empty
    }
}

/// Least prime in `[start, end)`.
pub fn min_prime_in_range(start: &BigUint, end: &BigUint, config: &SearchConfig) -> WindowSearch {
    extremal_prime(start, end, config, false)
}

/// Least prime of the window, scanning upward from `p^c`.
pub fn min_prime_in_window(w: &Window, config: &SearchConfig) -> WindowSearch {
    extremal_prime(&w.lo, &w.hi_exclusive, config, false)
}

/// Greatest prime of the window, scanning downward from `(p+1)^c - 2`.
pub fn max_prime_in_window(w: &Window, config: &SearchConfig) -> WindowSearch {
    extremal_prime(&w.lo, &w.hi_exclusive, config, true)
}

/// Every prime in `[start, end)`, refusing ranges wider than the cap.
pub fn count_primes_in_range(
    start: &BigUint,
    end: &BigUint,
    config: &SearchConfig,
    list: bool,
) -> Result<PrimeCount> {
    if start >= end {
        return Ok(PrimeCount { count: 0, primes: list.then(Vec::new) });
    }
    let width = end - start;
    let w = match width.to_u64() {
        Some(w) if w <= config.enumeration_cap => w,
        _ => {
            return Err(Error::EnumerationCap {
                width: width.to_string(),
                cap: config.enumeration_cap,
            })
        }
    };
    let base = base_for(end);
    let seg_len = segment_len(end);
    let mut segments = Vec::new();
    let mut offset = 0u64;
    while offset < w {
        let len = seg_len.min(w - offset);
        segments.push(Segment { start: start + offset, len: len as usize });
        offset += len;
    }
    let per_segment = config.execution.map(&segments, |seg| {
        let mut found = Vec::new();
        primes_in_segment(seg, base, &config.primality, false, |n, _| {
            found.push(n);
            true
        });
        found
    });
    let count = per_segment.iter().map(|v| v.len() as u64).sum();
    let primes = list.then(|| per_segment.into_iter().flatten().collect());
    Ok(PrimeCount { count, primes })
}

pub fn count_primes_in_window(w: &Window, config: &SearchConfig, list: bool) -> Result<PrimeCount> {
    count_primes_in_range(&w.lo, &w.hi_exclusive, config, list)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(p: u64, c: u64) -> Window {
        Window::new(&BigUint::from(p), c, 1 << 20).unwrap()
    }

    fn found(s: WindowSearch) -> BigUint {
        s.found().cloned().expect("prime found")
    }

    fn configs() -> Vec<SearchConfig> {
        [Execution::Sequential, Execution::Parallel]
            .into_iter()
            .map(|execution| SearchConfig { execution, ..SearchConfig::default() })
            .collect()
    }

    #[test]
    fn min_examples() {
        for cfg in configs() {
            assert_eq!(found(min_prime_in_window(&window(2, 3), &cfg)), BigUint::from(11u8));
            assert_eq!(
                found(min_prime_in_window(&window(127, 4), &cfg)),
                BigUint::from(260_144_663u64)
            );
            let big = window(11, 81);
            assert_eq!(found(min_prime_in_window(&big, &cfg)), &big.lo + 140u32);
        }
    }

    #[test]
    fn max_examples() {
        for cfg in configs() {
            assert_eq!(found(max_prime_in_window(&window(2, 3), &cfg)), BigUint::from(23u8));
            assert_eq!(found(max_prime_in_window(&window(2, 2), &cfg)), BigUint::from(7u8));
            assert_eq!(found(max_prime_in_window(&window(3, 2), &cfg)), BigUint::from(13u8));
        }
    }

    #[test]
    fn count_examples() {
        let cfg = SearchConfig::default();
        assert_eq!(count_primes_in_window(&window(2, 3), &cfg, false).unwrap().count, 5);
        let two = count_primes_in_window(&window(2, 2), &cfg, true).unwrap();
        assert_eq!(two.primes.unwrap(), vec![BigUint::from(5u8), BigUint::from(7u8)]);
        let five = count_primes_in_window(&window(5, 2), &cfg, true).unwrap();
        assert_eq!(five.count, 2);
        assert_eq!(five.primes.unwrap(), vec![BigUint::from(29u8), BigUint::from(31u8)]);
    }

    #[test]
    fn count_refuses_wide_windows() {
        let cfg = SearchConfig { enumeration_cap: 100, ..SearchConfig::default() };
        assert!(matches!(
            count_primes_in_window(&window(100, 3), &cfg, false),
            Err(Error::EnumerationCap { cap: 100, .. })
        ));
    }

    #[test]
    fn budget_is_reported_not_truncated() {
        // no prime in [24, 29)
        let cfg = SearchConfig { budget: 3, ..SearchConfig::default() };
        let r = min_prime_in_range(&BigUint::from(24u8), &BigUint::from(40u8), &cfg);
        assert_eq!(r, WindowSearch::BudgetExhausted { scanned: 3 });
        let r = min_prime_in_range(&BigUint::from(24u8), &BigUint::from(29u8), &SearchConfig::default());
        assert_eq!(r, WindowSearch::Empty);
    }

    #[test]
    fn segment_boundaries_do_not_hide_primes() {
        // force many tiny batches across a range with known primes
        let cfg = SearchConfig { budget: 1 << 40, ..SearchConfig::default() };
        let start = BigUint::from(1_000_000u64);
        let end = BigUint::from(1_200_000u64);
        let all = count_primes_in_range(&start, &end, &cfg, true).unwrap();
        let primes = all.primes.unwrap();
        assert_eq!(found(min_prime_in_range(&start, &end, &cfg)), primes[0]);
        let last = extremal_prime(&start, &end, &cfg, true);
        assert_eq!(found(last), *primes.last().unwrap());
        let expected = (1_000_000u64..1_200_000).filter(|&n| num_prime::nt_funcs::is_prime64(n)).count();
        assert_eq!(all.count as usize, expected);
    }
}
