//! Finite-depth enumeration of the cylinder tree.
//!
//! A node at depth `k` stands for a chain prefix `p_1, ..., p_k` and the
//! half-open interval `[p_k^(1/C_k), (p_k+1)^(1/C_k))` of constants whose
//! chains start that way. Its children are the primes of the window after
//! `p_k`. Levels are counted from 0 at the roots, so level `l` holds nodes of
//! depth `l + 1`.

use std::io::Write;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::chain::DEFAULT_WINDOW_BITS;
use crate::error::{Error, Result};
use crate::exps::ExponentSequence;
use crate::interval::CertifiedDecimalInterval;
use crate::primality::{self, SearchConfig};
use crate::radix::{certified_root_enclosure, point_root_enclosure, RadixConfig};
use crate::window::Window;

/// Smallest display precision for a sibling group.
pub const MIN_DISPLAY_DIGITS: u64 = 6;
/// Largest display precision tried before giving up on certified separation.
pub const MAX_DISPLAY_DIGITS: u64 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExploreConfig {
    pub search: SearchConfig,
    pub radix: RadixConfig,
    pub window_bits: u64,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            search: SearchConfig::default(),
            radix: RadixConfig::default(),
            window_bits: DEFAULT_WINDOW_BITS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderNode {
    #[serde(with = "crate::serde_big::vec")]
    pub prefix: Vec<BigUint>,
    pub depth: usize,
    pub interval: CertifiedDecimalInterval,
    /// Primes in the window after this node; a lower bound when truncated.
    pub child_count: u64,
    pub expanded: bool,
    pub truncated: bool,
    pub children: Vec<CylinderNode>,
}

impl CylinderNode {
    pub fn prime(&self) -> &BigUint {
        self.prefix.last().expect("non-empty prefix")
    }

    fn walk<'a>(&'a self, out: &mut Vec<&'a CylinderNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Forest {
    pub exps: ExponentSequence,
    pub depth: usize,
    pub roots: Vec<CylinderNode>,
}

impl Forest {
    /// All nodes, depth first, ascending.
    pub fn nodes(&self) -> Vec<&CylinderNode> {
        let mut out = Vec::new();
        for r in &self.roots {
            r.walk(&mut out);
        }
        out
    }

    /// Nodes at `level` in ascending order.
    pub fn level(&self, level: usize) -> Vec<&CylinderNode> {
        self.nodes().into_iter().filter(|n| n.depth == level + 1).collect()
    }

    /// One CSV row per node: prefix, depth, enclosure mantissas, places,
    /// child count, truncation flag.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["prefix", "depth", "lo_mantissa", "hi_mantissa", "digits", "child_count", "truncated"])?;
        for n in self.nodes() {
            let prefix = n.prefix.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("-");
            w.write_record([
                prefix,
                n.depth.to_string(),
                n.interval.lo_mantissa().to_string(),
                n.interval.hi_mantissa().to_string(),
                n.interval.digits_after_point().to_string(),
                n.child_count.to_string(),
                n.truncated.to_string(),
            ])?;
        }
        w.flush()
    }
}

fn root_index(exps: &ExponentSequence, depth: usize) -> Result<u64> {
    let c = exps.partial_product(depth)?;
    c.to_u64().ok_or(Error::BitCeiling { needed: c.bits(), ceiling: 64 })
}

/// Enclosures for one group of sibling cylinders at a shared precision: the
/// smallest `d >= MIN_DISPLAY_DIGITS` at which every pair of non-touching
/// neighbours is certifiably separated.
fn sibling_intervals(primes: &[BigUint], root: u64, config: &RadixConfig) -> Result<Vec<CertifiedDecimalInterval>> {
    let Some(top) = primes.last() else {
        return Ok(Vec::new());
    };
    let touching = |i: usize| &primes[i] + 1u32 == primes[i + 1];
    let separated = |ivs: &[CertifiedDecimalInterval]| {
        (0..ivs.len().saturating_sub(1)).all(|i| touching(i) || ivs[i].precedes(&ivs[i + 1]))
    };
    let estimate = ((top.bits() as f64 + (root as f64).log2()) * std::f64::consts::LOG10_2).ceil() as u64 + 2;
    let mut fine_digits = estimate.max(MIN_DISPLAY_DIGITS);
    let fine = loop {
        let ivs = config
            .execution
            .map(primes, |p| certified_root_enclosure(p, root, fine_digits, config))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        if separated(&ivs) || fine_digits >= MAX_DISPLAY_DIGITS {
            break ivs;
        }
        fine_digits = (fine_digits + 4).min(MAX_DISPLAY_DIGITS);
    };
    // separation is monotone in precision, so bisect on coarsened copies
    let coarse = |d: u64| fine.iter().map(|iv| iv.coarsen(d)).collect::<Vec<_>>();
    let (mut lo, mut hi) = (MIN_DISPLAY_DIGITS.min(fine_digits), fine_digits);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if separated(&coarse(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(coarse(lo))
}

fn expand_group(
    exps: &ExponentSequence,
    prefixes: Vec<Vec<BigUint>>,
    depth: usize,
    max_depth: usize,
    config: &ExploreConfig,
) -> Result<Vec<CylinderNode>> {
    let root = root_index(exps, depth)?;
    let primes: Vec<BigUint> = prefixes.iter().map(|p| p.last().unwrap().clone()).collect();
    let intervals = sibling_intervals(&primes, root, &config.radix)?;
    let items: Vec<(Vec<BigUint>, CertifiedDecimalInterval)> = prefixes.into_iter().zip(intervals).collect();
    config
        .search
        .execution
        .map(&items, |(prefix, interval)| -> Result<CylinderNode> {
            let mut node = CylinderNode {
                prefix: prefix.clone(),
                depth,
                interval: interval.clone(),
                child_count: 0,
                expanded: false,
                truncated: false,
                children: Vec::new(),
            };
            if depth >= max_depth {
                return Ok(node);
            }
            let c = exps.term_u64(depth + 1)?;
            let window = Window::new(prefix.last().unwrap(), c, config.window_bits)?;
            let cap = config.search.enumeration_cap;
            let (children, truncated) = if window.width() > BigUint::from(cap) {
                let end = &window.lo + cap;
                let partial = primality::count_primes_in_range(&window.lo, &end, &config.search, true)?;
                (partial.primes.unwrap_or_default(), true)
            } else {
                let full = primality::count_primes_in_window(&window, &config.search, true)?;
                (full.primes.unwrap_or_default(), false)
            };
            node.child_count = children.len() as u64;
            node.expanded = true;
            node.truncated = truncated;
            let child_prefixes = children
                .into_iter()
                .map(|q| {
                    let mut p = prefix.clone();
                    p.push(q);
                    p
                })
                .collect();
            node.children = expand_group(exps, child_prefixes, depth + 1, max_depth, config)?;
            Ok(node)
        })
        .into_iter()
        .collect()
}

/// One tree per prime seed in `[seed_lo, seed_hi]`, expanded until chain
/// prefixes reach `depth` primes.
pub fn explore_tree(
    exps: &ExponentSequence,
    seed_lo: &BigUint,
    seed_hi: &BigUint,
    depth: usize,
    config: &ExploreConfig,
) -> Result<Forest> {
    if depth == 0 {
        return Err(Error::ZeroDepth);
    }
    if let Some(max) = exps.max_depth() {
        if depth > max {
            return Err(Error::DepthOutOfRange { requested: depth, max });
        }
    }
    let seeds = crate::chain::candidate_seeds(seed_lo, seed_hi, &config.search)?;
    let prefixes = seeds.into_iter().map(|s| vec![s]).collect();
    let roots = expand_group(exps, prefixes, 1, depth, config)?;
    Ok(Forest {
        exps: exps.clone(),
        depth,
        roots,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    /// `(q+1)^(1/C)` for the cylinder on the left; approximates a right
    /// sub-boundary point.
    pub left: CertifiedDecimalInterval,
    /// `q'^(1/C)` for the cylinder on the right; approximates a left
    /// sub-boundary point.
    pub right: CertifiedDecimalInterval,
    #[serde(with = "crate::serde_big::vec")]
    pub after: Vec<BigUint>,
    #[serde(with = "crate::serde_big::vec")]
    pub before: Vec<BigUint>,
}

fn ensure_complete(forest: &Forest, level: usize) -> Result<()> {
    if level + 1 > forest.depth {
        return Err(Error::DepthOutOfRange {
            requested: level + 1,
            max: forest.depth,
        });
    }
    if forest.nodes().iter().any(|n| n.depth <= level && n.truncated) {
        return Err(Error::TruncatedForest(level));
    }
    Ok(())
}

/// Open gaps between consecutive cylinders at `level`, with point
/// enclosures of both gap endpoints.
pub fn gap_intervals(forest: &Forest, level: usize, config: &RadixConfig) -> Result<Vec<Gap>> {
    ensure_complete(forest, level)?;
    let root = root_index(&forest.exps, level + 1)?;
    let nodes = forest.level(level);
    let mut gaps = Vec::new();
    for pair in nodes.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let after_a = a.prime() + 1u32;
        if &after_a == b.prime() {
            continue;
        }
        let digits = a.interval.digits_after_point().max(b.interval.digits_after_point());
        gaps.push(Gap {
            left: point_root_enclosure(&after_a, root, digits, config)?,
            right: point_root_enclosure(b.prime(), root, digits, config)?,
            after: a.prefix.clone(),
            before: b.prefix.clone(),
        });
    }
    Ok(gaps)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeftEdge {
    #[serde(with = "crate::serde_big::vec")]
    pub prefix: Vec<BigUint>,
    /// Point enclosure of `q^(1/C)` for the leftmost cylinder under the root.
    pub endpoint: CertifiedDecimalInterval,
}

/// For every root, the left endpoint of its leftmost cylinder at `level`:
/// the depth-`level + 1` approximation of the left sub-boundary point that
/// the min chain from that root converges to.
pub fn leftmost_endpoints(forest: &Forest, level: usize, digits: u64, config: &RadixConfig) -> Result<Vec<LeftEdge>> {
    ensure_complete(forest, level)?;
    let root = root_index(&forest.exps, level + 1)?;
    forest
        .roots
        .iter()
        .filter_map(|r| {
            let mut node = r;
            for _ in 0..level {
                node = node.children.first()?;
            }
            Some(node)
        })
        .map(|n| {
            Ok(LeftEdge {
                prefix: n.prefix.clone(),
                endpoint: point_root_enclosure(n.prime(), root, digits, config)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub nodes: u64,
    pub min_children: u64,
    pub max_children: u64,
    pub total_children: u64,
    /// Mean child count, truncated to three places.
    pub mean_children: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchingStats {
    pub levels: Vec<LevelStats>,
    pub leaves: u64,
    /// Expanded nodes with fewer than two children.
    pub isolation_candidates: Vec<String>,
    /// Expanded, untruncated nodes whose window holds no prime.
    pub empty_windows: Vec<String>,
    pub truncated_nodes: u64,
}

fn prefix_label(n: &CylinderNode) -> String {
    n.prefix.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("-")
}

pub fn branching_stats(forest: &Forest) -> BranchingStats {
    let nodes = forest.nodes();
    let mut levels = Vec::new();
    for level in 0..forest.depth {
        let expanded: Vec<_> = nodes.iter().filter(|n| n.depth == level + 1 && n.expanded).collect();
        if expanded.is_empty() {
            continue;
        }
        let counts: Vec<u64> = expanded.iter().map(|n| n.child_count).collect();
        let total: u64 = counts.iter().sum();
        let count = counts.len() as u64;
        let millis = total * 1000 / count;
        levels.push(LevelStats {
            level,
            nodes: count,
            min_children: *counts.iter().min().unwrap(),
            max_children: *counts.iter().max().unwrap(),
            total_children: total,
            mean_children: format!("{}.{:03}", millis / 1000, millis % 1000),
        });
    }
    BranchingStats {
        levels,
        leaves: nodes.iter().filter(|n| !n.expanded).count() as u64,
        isolation_candidates: nodes
            .iter()
            .filter(|n| n.expanded && n.child_count < 2)
            .map(|n| prefix_label(n))
            .collect(),
        empty_windows: nodes
            .iter()
            .filter(|n| n.expanded && !n.truncated && n.child_count == 0)
            .map(|n| prefix_label(n))
            .collect(),
        truncated_nodes: nodes.iter().filter(|n| n.truncated).count() as u64,
    }
}

/// Exact and certified checks of the cylinder structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestCheck {
    /// `p^c <= q` and `q + 1 <= (p+1)^c` for every parent/child pair.
    pub nested_exact: bool,
    /// Child enclosures lie inside parent enclosures.
    pub nested_certified: bool,
    /// Siblings strictly increasing, so their half-open cylinders are disjoint.
    pub disjoint_exact: bool,
    /// Non-touching sibling enclosures are certifiably ordered.
    pub disjoint_certified: bool,
    /// Every expanded, untruncated node lists all primes of its window.
    pub counts_consistent: bool,
}

pub fn check_forest(forest: &Forest, config: &ExploreConfig) -> Result<ForestCheck> {
    let mut check = ForestCheck {
        nested_exact: true,
        nested_certified: true,
        disjoint_exact: true,
        disjoint_certified: true,
        counts_consistent: true,
    };
    fn siblings(check: &mut ForestCheck, group: &[CylinderNode]) {
        for pair in group.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.prime() + 1u32 > *b.prime() {
                check.disjoint_exact = false;
            }
            let touching = a.prime() + 1u32 == *b.prime();
            if !touching && !a.interval.precedes(&b.interval) {
                check.disjoint_certified = false;
            }
        }
    }
    siblings(&mut check, &forest.roots);
    for node in forest.nodes() {
        if !node.expanded {
            continue;
        }
        siblings(&mut check, &node.children);
        if node.child_count != node.children.len() as u64 {
            check.counts_consistent = false;
        }
        let c = forest.exps.term_u64(node.depth + 1)?;
        let w = Window::new(node.prime(), c, config.window_bits)?;
        for child in &node.children {
            // (p+1)^c - 1 = hi_exclusive, and q + 1 <= (p+1)^c
            if !(w.lo <= *child.prime() && *child.prime() <= w.hi_exclusive) {
                check.nested_exact = false;
            }
            if !child.interval.within(&node.interval) {
                check.nested_certified = false;
            }
        }
    }
    Ok(check)
}
