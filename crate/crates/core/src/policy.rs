use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Which prime-gap theorem guarantees a prime in `(n^m, (n+1)^m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GapPolicy {
    /// Unconditional, `m >= 1438989`.
    Mattner,
    /// Unconditional, `m >= 180`.
    CullyHugill,
    /// Under the Riemann hypothesis, `m >= 3`.
    RhCms,
    /// No guarantee; searches may come back empty within budget.
    Empirical,
}

impl GapPolicy {
    pub const ALL: [GapPolicy; 4] = [
        GapPolicy::Mattner,
        GapPolicy::CullyHugill,
        GapPolicy::RhCms,
        GapPolicy::Empirical,
    ];

    /// Smallest exponent for which the policy guarantees a nonempty window.
    pub fn threshold(self) -> u64 {
        match self {
            GapPolicy::Mattner => 1_438_989,
            GapPolicy::CullyHugill => 180,
            GapPolicy::RhCms => 3,
            GapPolicy::Empirical => 2,
        }
    }

    pub fn conditional(self) -> bool {
        matches!(self, GapPolicy::RhCms)
    }

    /// Whether the policy proves a prime exists in the window for exponent `c`.
    pub fn guarantees(self, c: u64) -> bool {
        self != GapPolicy::Empirical && c >= self.threshold()
    }

    pub fn name(self) -> &'static str {
        match self {
            GapPolicy::Mattner => "mattner",
            GapPolicy::CullyHugill => "cully-hugill",
            GapPolicy::RhCms => "rh-cms",
            GapPolicy::Empirical => "empirical",
        }
    }
}

impl fmt::Display for GapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        GapPolicy::ALL
            .into_iter()
            .find(|p| p.name() == norm || p.name().replace('-', "") == norm)
            .ok_or_else(|| Error::Schema(format!("unknown gap policy `{s}`")))
    }
}

impl Serialize for GapPolicy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for GapPolicy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
