//! Gate selection over the unjust set.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::circuit::{Assignment, Circuit};
use crate::metrics::{Measure, StructuralProfile};

/// How the next unjustified gate is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Uniform over the unjust set.
    Rand,
    /// Uniform over the gates maximizing the measure.
    Max(Measure),
    /// Uniform over the gates minimizing the measure.
    Min(Measure),
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Heuristic::Rand => f.write_str("rand"),
            Heuristic::Max(m) => write!(f, "{m}-max"),
            Heuristic::Min(m) => write!(f, "{m}-min"),
        }
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "rand" {
            return Ok(Heuristic::Rand);
        }
        let bad = || format!("unknown heuristic {s:?} (expected rand or <measure>-max/-min)");
        let (measure, dir) = s.rsplit_once('-').ok_or_else(bad)?;
        let measure: Measure = measure.parse().map_err(|_| bad())?;
        match dir {
            "max" => Ok(Heuristic::Max(measure)),
            "min" => Ok(Heuristic::Min(measure)),
            _ => Err(bad()),
        }
    }
}

impl serde::Serialize for Heuristic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Heuristic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Uniform pick among the gates whose key is best.
fn pick_extreme<K, R>(unjust: &[u32], key: impl Fn(usize) -> K, maximize: bool, rng: &mut R) -> usize
where
    K: PartialOrd + Copy,
    R: Rng + ?Sized,
{
    let better = |a: K, b: K| if maximize { a > b } else { a < b };
    let mut best = key(unjust[0] as usize);
    let mut ties = 1usize;
    for &g in &unjust[1..] {
        let k = key(g as usize);
        if better(k, best) {
            best = k;
            ties = 1;
        } else if k == best {
            ties += 1;
        }
    }
    if ties == 1 {
        return unjust
            .iter()
            .map(|&g| g as usize)
            .find(|&g| key(g) == best)
            .unwrap();
    }
    let target = rng.random_range(0..ties);
    unjust
        .iter()
        .map(|&g| g as usize)
        .filter(|&g| key(g) == best)
        .nth(target)
        .unwrap()
}

/// Picks the gate to justify next; `None` when nothing is unjustified.
pub fn select_gate<R: Rng + ?Sized>(
    circuit: &Circuit,
    assignment: &Assignment,
    profile: &StructuralProfile,
    heuristic: Heuristic,
    rng: &mut R,
) -> Option<usize> {
    let unjust = assignment.unjust();
    if unjust.is_empty() {
        return None;
    }
    if unjust.len() == 1 {
        return Some(unjust[0] as usize);
    }
    let (measure, maximize) = match heuristic {
        Heuristic::Rand => return Some(unjust[rng.random_range(0..unjust.len())] as usize),
        Heuristic::Max(m) => (m, true),
        Heuristic::Min(m) => (m, false),
    };
    let p = profile;
    let g = match measure {
        Measure::Depth => pick_extreme(unjust, |g| p.depth(g), maximize, rng),
        Measure::Fo => pick_extreme(unjust, |g| p.fanout_size(g), maximize, rng),
        Measure::Tfo => pick_extreme(unjust, |g| p.tfo_size(circuit, g), maximize, rng),
        Measure::Tfi => pick_extreme(unjust, |g| p.tfi_size(circuit, g), maximize, rng),
        Measure::Cc => pick_extreme(unjust, |g| p.cc(g, assignment.value(g)), maximize, rng),
        Measure::Co => pick_extreme(unjust, |g| p.co(g), maximize, rng),
        Measure::Flow => pick_extreme(unjust, |g| p.flow(g), maximize, rng),
        Measure::Level => pick_extreme(unjust, |g| p.level(g), maximize, rng),
        Measure::LLevel => pick_extreme(unjust, |g| p.llevel(g), maximize, rng),
        Measure::ALevel => pick_extreme(unjust, |g| p.alevel(g), maximize, rng),
    };
    Some(g)
}
