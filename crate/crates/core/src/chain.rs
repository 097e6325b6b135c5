//! Prime chains `p_1, p_2, ...` with `p_k^(c_{k+1}) <= p_{k+1} <= (p_k+1)^(c_{k+1}) - 2`,
//! built by taking the least (or greatest) prime of each window, plus the
//! reports that re-check them.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exps::ExponentSequence;
use crate::interval::pow10;
use crate::policy::GapPolicy;
use crate::primality::{
    self, certainty_for, max_prime_in_window, min_prime_in_range, min_prime_in_window, Certainty,
    SearchConfig, WindowSearch,
};
use crate::radix::nth_root_floor;
use crate::window::Window;

/// Default ceiling on `(p_k + 1)^(c_{k+1})`, in bits.
pub const DEFAULT_WINDOW_BITS: u64 = 1 << 20;

/// Candidates rescanned when re-checking extremality.
pub const DEFAULT_RESCAN_CAP: u64 = 10_000_000;

/// θ = 21/40.
pub const THETA_NUM: u64 = 21;
pub const THETA_DEN: u64 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Min,
    Max,
    Explicit,
}

impl std::str::FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Selection::Min),
            "max" => Ok(Selection::Max),
            "explicit" => Ok(Selection::Explicit),
            _ => Err(Error::Schema(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub search: SearchConfig,
    pub window_bits: u64,
    pub rescan_cap: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            search: SearchConfig::default(),
            window_bits: DEFAULT_WINDOW_BITS,
            rescan_cap: DEFAULT_RESCAN_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum TruncationReason {
    BitCeiling { needed: u64, ceiling: u64 },
    BudgetExhausted { scanned: u64 },
    EmptyWindow,
}

/// Marker on a chain that stopped short of the requested depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    #[serde(flatten)]
    pub reason: TruncationReason,
    pub reached_depth: usize,
    pub requested_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeChain {
    exps: ExponentSequence,
    #[serde(with = "crate::serde_big::vec")]
    primes: Vec<BigUint>,
    mode: Selection,
    gap_policy: GapPolicy,
    conditional: bool,
    certainty: Vec<Certainty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncated: Option<Truncation>,
}

impl PrimeChain {
    /// A caller-supplied chain. Certainty tiers are recomputed; nothing else
    /// is checked here (see [`verify_chain`]).
    pub fn explicit(
        exps: ExponentSequence,
        primes: Vec<BigUint>,
        gap_policy: GapPolicy,
        config: &ChainConfig,
    ) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::ZeroDepth);
        }
        let certainty = primes
            .iter()
            .map(|p| certainty_for(p, &config.search.primality))
            .collect();
        let conditional = conditional_flag(&exps, primes.len(), gap_policy);
        Ok(PrimeChain {
            exps,
            primes,
            mode: Selection::Explicit,
            gap_policy,
            conditional,
            certainty,
            truncated: None,
        })
    }

    /// Reassemble a chain from its serialized parts.
    pub fn from_parts(
        exps: ExponentSequence,
        primes: Vec<BigUint>,
        mode: Selection,
        gap_policy: GapPolicy,
        certainty: Vec<Certainty>,
        truncated: Option<Truncation>,
    ) -> Result<Self> {
        if primes.is_empty() {
            return Err(Error::Schema("chain has no primes".into()));
        }
        if certainty.len() != primes.len() {
            return Err(Error::Schema(format!(
                "{} certainty tags for {} primes",
                certainty.len(),
                primes.len()
            )));
        }
        let conditional = conditional_flag(&exps, primes.len(), gap_policy);
        Ok(PrimeChain {
            exps,
            primes,
            mode,
            gap_policy,
            conditional,
            certainty,
            truncated,
        })
    }

    pub fn exps(&self) -> &ExponentSequence {
        &self.exps
    }

    pub fn primes(&self) -> &[BigUint] {
        &self.primes
    }

    pub fn mode(&self) -> Selection {
        self.mode
    }

    pub fn gap_policy(&self) -> GapPolicy {
        self.gap_policy
    }

    /// True when the chain rests on the Riemann hypothesis.
    pub fn conditional(&self) -> bool {
        self.conditional
    }

    pub fn certainty(&self) -> &[Certainty] {
        &self.certainty
    }

    pub fn truncated(&self) -> Option<&Truncation> {
        self.truncated.as_ref()
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Window following `p_k` (1-based).
    pub fn window_after(&self, k: usize, window_bits: u64) -> Result<Window> {
        let c = self.exps.term_u64(k + 1)?;
        Window::new(&self.primes[k - 1], c, window_bits)
    }
}

/// Whether the gap theorem behind `policy` is invoked anywhere along the
/// chain or its continuation, and that theorem is conditional.
fn conditional_flag(exps: &ExponentSequence, depth: usize, policy: GapPolicy) -> bool {
    if !policy.conditional() {
        return false;
    }
    let threshold = policy.threshold();
    let in_chain = (2..=depth).any(|k| exps.term_u64(k).is_ok_and(|c| c >= threshold));
    in_chain || exps.tail_at_least(depth + 1, threshold)
}

/// Primes in `[lo, hi]`, the candidate starting points of chains.
pub fn candidate_seeds(lo: &BigUint, hi: &BigUint, config: &SearchConfig) -> Result<Vec<BigUint>> {
    let end = hi + 1u32;
    let counted = primality::count_primes_in_range(lo, &end, config, true)?;
    Ok(counted.primes.unwrap_or_default())
}

/// Chain `p_1 = seed`, `p_{k+1}` = least (or greatest) prime of the window
/// after `p_k`, up to `depth` primes.
///
/// A window search that exhausts its budget, finds no prime, or would exceed
/// the bit ceiling ends the chain early with a [`Truncation`] marker.
pub fn build_chain(
    exps: &ExponentSequence,
    seed: &BigUint,
    depth: usize,
    mode: Selection,
    policy: GapPolicy,
    config: &ChainConfig,
) -> Result<PrimeChain> {
    if depth == 0 {
        return Err(Error::ZeroDepth);
    }
    if let Some(max) = exps.max_depth() {
        if depth > max {
            return Err(Error::DepthOutOfRange { requested: depth, max });
        }
    }
    if mode == Selection::Explicit {
        return Err(Error::Schema("explicit chains are not built by search".into()));
    }
    let seed_verdict = primality::is_prime(seed, &config.search.primality);
    if !seed_verdict.is_prime {
        return Err(Error::CompositeSeed(seed.to_string()));
    }
    let mut primes = vec![seed.clone()];
    let mut certainty = vec![seed_verdict.certainty];
    let mut truncated = None;
    while primes.len() < depth {
        let k = primes.len();
        let step = exps
            .term_u64(k + 1)
            .and_then(|c| Window::new(&primes[k - 1], c, config.window_bits));
        let window = match step {
            Ok(w) => w,
            Err(Error::BitCeiling { needed, ceiling }) => {
                truncated = Some(TruncationReason::BitCeiling { needed, ceiling });
                break;
            }
            Err(e) => return Err(e),
        };
        let search = match mode {
            Selection::Min => min_prime_in_window(&window, &config.search),
            _ => max_prime_in_window(&window, &config.search),
        };
        match search {
            WindowSearch::Found(found) => {
                primes.push(found.value);
                certainty.push(found.certainty);
            }
            WindowSearch::Empty => {
                truncated = Some(TruncationReason::EmptyWindow);
                break;
            }
            WindowSearch::BudgetExhausted { scanned } => {
                truncated = Some(TruncationReason::BudgetExhausted { scanned });
                break;
            }
        }
    }
    let reached = primes.len();
    let conditional = conditional_flag(exps, reached, policy);
    Ok(PrimeChain {
        exps: exps.clone(),
        primes,
        mode,
        gap_policy: policy,
        conditional,
        certainty,
        truncated: truncated.map(|reason| Truncation {
            reason,
            reached_depth: reached,
            requested_depth: depth,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Extremality {
    NotApplicable,
    Verified,
    /// A prime beyond the claimed one in scan order lies in the window.
    Violated {
        #[serde(with = "crate::serde_big")]
        witness: BigUint,
    },
    /// The rescan would exceed the cap.
    Unverified { cap: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCheck {
    /// 1-based position of the prime in the chain.
    pub k: usize,
    #[serde(with = "crate::serde_big")]
    pub prime: BigUint,
    pub prime_ok: bool,
    pub certainty: Certainty,
    /// `None` for the seed.
    pub in_window: Option<bool>,
    pub extremality: Extremality,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StepCheck {
    pub fn passed(&self) -> bool {
        self.prime_ok
            && self.in_window != Some(false)
            && !matches!(self.extremality, Extremality::Violated { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub steps: Vec<StepCheck>,
    pub all_passed: bool,
}

/// Re-checks primality, window membership and (for min/max chains)
/// extremality of every chain element. Failures are report entries.
pub fn verify_chain(chain: &PrimeChain, config: &ChainConfig) -> ChainReport {
    let indices: Vec<usize> = (1..=chain.len()).collect();
    let steps = config
        .search
        .execution
        .map(&indices, |&k| check_step(chain, k, config));
    let all_passed = steps.iter().all(StepCheck::passed);
    ChainReport { steps, all_passed }
}

fn check_step(chain: &PrimeChain, k: usize, config: &ChainConfig) -> StepCheck {
    let prime = chain.primes[k - 1].clone();
    let verdict = primality::is_prime(&prime, &config.search.primality);
    let mut check = StepCheck {
        k,
        prime,
        prime_ok: verdict.is_prime,
        certainty: verdict.certainty,
        in_window: None,
        extremality: Extremality::NotApplicable,
        note: None,
    };
    if k == 1 {
        return check;
    }
    let window = match chain.window_after(k - 1, config.window_bits) {
        Ok(w) => w,
        Err(e) => {
            check.in_window = Some(false);
            check.note = Some(e.to_string());
            return check;
        }
    };
    let inside = window.contains(&check.prime);
    check.in_window = Some(inside);
    if !inside || chain.mode == Selection::Explicit {
        return check;
    }
    let rescan = SearchConfig {
        budget: config.rescan_cap,
        ..config.search
    };
    let result = match chain.mode {
        Selection::Min => min_prime_in_range(&window.lo, &check.prime, &rescan),
        _ => {
            let after = &check.prime + 1u32;
            let tail = Window {
                lo: after,
                ..window.clone()
            };
            max_prime_in_window(&tail, &rescan)
        }
    };
    check.extremality = match result {
        WindowSearch::Found(found) => Extremality::Violated { witness: found.value },
        WindowSearch::Empty => Extremality::Verified,
        WindowSearch::BudgetExhausted { .. } => Extremality::Unverified { cap: config.rescan_cap },
    };
    check
}

/// `p_j^(1/C_j) <= p_{j+1}^(1/C_{j+1})` and `(p_{j+1}+1)^(1/C_{j+1}) <= (p_j+1)^(1/C_j)`
/// for every consecutive pair, by cross-powering with `c_{j+1}`.
pub fn approximants_nested(chain: &PrimeChain, window_bits: u64) -> Result<bool> {
    for k in 1..chain.len() {
        let w = chain.window_after(k, window_bits)?;
        let next = &chain.primes[k];
        let upper = &w.hi_exclusive + 1u32;
        if !(&w.lo <= next && next < &upper) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `p_{k+1} <= p_k^c + p_k^(θc)`
    Left,
    /// `p_{k+1} >= (p_k+1)^c - (p_k+1)^(θc)`
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    /// Decided from bit lengths alone: `40 bits(gap) <= 21 c (bits(base) - 1)`.
    BitBound,
    /// `gap^40` and `base^(21c)` compared in full.
    ExactPower,
    /// Powers above the ceiling; nothing decided.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaRecord {
    /// Step from `p_k` to `p_{k+1}`.
    pub k: usize,
    pub side: Side,
    /// `None` when skipped.
    pub satisfied: Option<bool>,
    /// Distance of `p_{k+1}` from the window edge on `side`.
    #[serde(with = "crate::serde_big")]
    pub offset: BigUint,
    /// Bit length bounds of `offset^40` and `base^(21c)`.
    pub lhs_bits: u64,
    pub rhs_bits: u64,
    pub witness: Witness,
}

/// Descriptive only: the short-window property is asymptotic, so small-k
/// failures are expected and never treated as errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub records: Vec<ThetaRecord>,
}

/// Tests `offset^40 <= base^(21c)`, i.e. `offset <= base^(θc)`.
fn theta_compare(offset: &BigUint, base: &BigUint, c: u64, bit_ceiling: u64) -> (Option<bool>, u64, u64, Witness) {
    let lhs_bits = offset.bits() * THETA_DEN;
    let rhs_exp = c.saturating_mul(THETA_NUM);
    let rhs_bits = (base.bits() - 1).saturating_mul(rhs_exp) + 1;
    if offset.is_zero() || lhs_bits < rhs_bits {
        return (Some(true), lhs_bits, rhs_bits, Witness::BitBound);
    }
    let full_rhs_bits = base.bits().saturating_mul(rhs_exp);
    if full_rhs_bits > bit_ceiling || lhs_bits > bit_ceiling {
        return (None, lhs_bits, full_rhs_bits, Witness::Skipped);
    }
    let lhs = offset.pow(THETA_DEN as u32);
    let rhs = base.pow(rhs_exp as u32);
    (Some(lhs <= rhs), lhs.bits(), rhs.bits(), Witness::ExactPower)
}

/// θ-window membership for each step `k` with `c_{k+1} >= 3`: the left test
/// for min chains, the right test for max chains, both for explicit chains.
pub fn theta_window_report(chain: &PrimeChain, bit_ceiling: u64) -> ThetaReport {
    let sides: &[Side] = match chain.mode {
        Selection::Min => &[Side::Left],
        Selection::Max => &[Side::Right],
        Selection::Explicit => &[Side::Left, Side::Right],
    };
    let mut records = Vec::new();
    for k in 1..chain.len() {
        if !chain.exps.in_theta_index_set(k) {
            continue;
        }
        let Ok(w) = chain.window_after(k, bit_ceiling) else {
            continue;
        };
        let c = w.exponent;
        let p = &chain.primes[k - 1];
        let next = &chain.primes[k];
        for &side in sides {
            let (offset, base, in_range) = match side {
                Side::Left => (
                    if next >= &w.lo { next - &w.lo } else { BigUint::zero() },
                    p.clone(),
                    next >= &w.lo,
                ),
                Side::Right => {
                    let top = &w.hi_exclusive + 1u32;
                    (
                        if next <= &top { &top - next } else { BigUint::zero() },
                        p + 1u32,
                        next <= &top,
                    )
                }
            };
            let (satisfied, lhs_bits, rhs_bits, witness) = theta_compare(&offset, &base, c, bit_ceiling);
            records.push(ThetaRecord {
                k,
                side,
                satisfied: satisfied.map(|s| s && in_range),
                offset,
                lhs_bits,
                rhs_bits,
                witness,
            });
        }
    }
    ThetaReport { records }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVerdict {
    Holds,
    Fails,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub k: usize,
    pub verdict: BoundVerdict,
    /// Bit lengths of the scaled integer bounds that decided the verdict.
    pub lhs_bits: u64,
    pub rhs_bits: u64,
    /// Decimal places used; 0 when decided without rounding.
    pub digits: u64,
}

/// Checks the finite surrogate of the convergence-speed bound at step `k`:
///
/// `p_{k+1}^(1/C_{k+1}) - p_k^(1/C_k) <= (p_k+1)^(1/C_k) * p_1^((θ-1) C_{k+1} / c_1)`.
///
/// Every quantity is replaced by a directed integer bound at `D` decimal
/// places (floors of integer roots, plus one for upper bounds); `D` grows
/// until one side certifiably dominates.
pub fn convergence_bound_check(chain: &PrimeChain, k: usize, bit_ceiling: u64) -> Result<ConvergenceCheck> {
    if k == 0 || k + 1 > chain.len() {
        return Err(Error::DepthOutOfRange {
            requested: k + 1,
            max: chain.len(),
        });
    }
    if chain.mode == Selection::Max {
        return Err(Error::Schema("convergence bound applies to min chains".into()));
    }
    let exps = &chain.exps;
    let c1 = exps.term_u64(1)?;
    let ck = exps.partial_product(k)?.to_u64().ok_or(Error::BitCeiling { needed: 65, ceiling: 64 })?;
    let ck1 = exps
        .partial_product(k + 1)?
        .to_u64()
        .ok_or(Error::BitCeiling { needed: 65, ceiling: 64 })?;
    convergence_surrogate(
        &chain.primes[0],
        c1,
        &chain.primes[k - 1],
        ck,
        &chain.primes[k],
        ck1,
        bit_ceiling,
    )
    .map(|mut check| {
        check.k = k;
        check
    })
}

/// The surrogate comparison on raw values; see [`convergence_bound_check`].
pub fn convergence_surrogate(
    p1: &BigUint,
    c1: u64,
    pk: &BigUint,
    ck: u64,
    pk1: &BigUint,
    ck1: u64,
    bit_ceiling: u64,
) -> Result<ConvergenceCheck> {
    // exact power hit: zero difference
    let c_next = ck1 / ck;
    if c_next * ck == ck1 && u32::try_from(c_next).is_ok_and(|e| pk.bits() * u64::from(e) <= bit_ceiling && pk.pow(e) == *pk1)
    {
        return Ok(ConvergenceCheck { k: 0, verdict: BoundVerdict::Holds, lhs_bits: 0, rhs_bits: 0, digits: 0 });
    }
    let exp_num = (THETA_DEN - THETA_NUM) * ck1; // 19 C_{k+1}
    let exp_den = THETA_DEN * c1; // 40 c_1
    let decay_digits = (exp_num as f64 * (p1.bits() as f64)) / (exp_den as f64 * std::f64::consts::LOG2_10);
    let mut digits = decay_digits.ceil() as u64 + 12;
    let to_u32 = |v: u64| u32::try_from(v).map_err(|_| Error::BitCeiling { needed: v, ceiling: u64::from(u32::MAX) });
    let (ck32, ck132, den32) = (to_u32(ck)?, to_u32(ck1)?, to_u32(exp_den)?);
    let decay_base = p1.pow(to_u32(exp_num)?);
    for _ in 0..8 {
        let needed = (digits as f64 * exp_den.max(ck).max(ck1) as f64 * std::f64::consts::LOG2_10) as u64
            + pk1.bits()
            + decay_base.bits();
        if needed > bit_ceiling {
            return Err(Error::BitCeiling { needed, ceiling: bit_ceiling });
        }
        let root_at = |p: &BigUint, r: u32| nth_root_floor(&(p * pow10(digits * u64::from(r))), r);
        let y_lo = root_at(pk1, ck132);
        let y_hi = &y_lo + 1u32;
        let x_lo = root_at(pk, ck32);
        let x_hi = &x_lo + 1u32;
        let u_lo = root_at(&(pk + 1u32), ck32);
        let u_hi = &u_lo + 1u32;
        // v = p_1^(-19 C_{k+1} / (40 c_1)) * 10^D
        let scaled = pow10(digits * exp_den);
        let v_lo = nth_root_floor(&(&scaled / &decay_base), den32);
        let v_hi = nth_root_floor(&(&scaled / &decay_base + 1u32), den32) + 1u32;
        let scale = pow10(digits);
        // difference and bound, both at scale 10^(2D)
        let diff_hi = if y_hi > x_lo { (&y_hi - &x_lo) * &scale } else { BigUint::zero() };
        let bound_lo = &u_lo * &v_lo;
        if diff_hi <= bound_lo {
            return Ok(ConvergenceCheck {
                k: 0,
                verdict: BoundVerdict::Holds,
                lhs_bits: diff_hi.bits(),
                rhs_bits: bound_lo.bits(),
                digits,
            });
        }
        let diff_lo = if y_lo > x_hi { (&y_lo - &x_hi) * &scale } else { BigUint::zero() };
        let bound_hi = &u_hi * &v_hi;
        if diff_lo > bound_hi {
            return Ok(ConvergenceCheck {
                k: 0,
                verdict: BoundVerdict::Fails,
                lhs_bits: diff_lo.bits(),
                rhs_bits: bound_hi.bits(),
                digits,
            });
        }
        digits *= 2;
    }
    Err(Error::BitCeiling { needed: u64::MAX, ceiling: bit_ceiling })
}
