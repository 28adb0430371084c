//! CSV emission for tries, summaries, cactus and scatter data.

use std::collections::BTreeMap;

use serde::Serialize;

use super::protocol::{InstanceSummary, TryRecord};
use super::HarnessError;
use crate::engine::Heuristic;

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn with_header<T: Serialize>(header: &str, rows: Vec<T>) -> Result<String, HarnessError> {
    if rows.is_empty() {
        Ok(format!("{header}\n"))
    } else {
        to_csv(rows)
    }
}

/// Columns: instance,heuristic,wp,seed,try,outcome,steps,wall_time.
pub fn emit_tries_csv(records: &[TryRecord]) -> Result<String, HarnessError> {
    with_header(
        "instance,heuristic,wp,seed,try,outcome,steps,wall_time",
        records.iter().collect(),
    )
}

/// Columns: instance,heuristic,best_wp,tries,successes,success_rate,
/// median_time,median_steps,solved.
pub fn emit_summaries_csv(summaries: &[InstanceSummary]) -> Result<String, HarnessError> {
    with_header(
        "instance,heuristic,best_wp,tries,successes,success_rate,median_time,median_steps,solved",
        summaries.iter().collect(),
    )
}

#[derive(Serialize)]
struct CactusRow {
    heuristic: Heuristic,
    rank: usize,
    median_time: f64,
}

/// Cactus transform. Columns: heuristic,rank,median_time. For every
/// heuristic (in order of first appearance), its solved instances sorted by
/// median time; row `k` holds the k-th smallest time.
pub fn emit_cactus_csv(summaries: &[InstanceSummary]) -> Result<String, HarnessError> {
    let mut order: Vec<Heuristic> = Vec::new();
    for s in summaries {
        if !order.contains(&s.heuristic) {
            order.push(s.heuristic);
        }
    }
    let mut rows = Vec::new();
    for h in order {
        let mut solved: Vec<&InstanceSummary> = summaries
            .iter()
            .filter(|s| s.heuristic == h && s.solved)
            .collect();
        solved.sort_by(|a, b| {
            a.median_time
                .total_cmp(&b.median_time)
                .then_with(|| a.instance.cmp(&b.instance))
        });
        rows.extend(solved.iter().enumerate().map(|(k, s)| CactusRow {
            heuristic: h,
            rank: k + 1,
            median_time: s.median_time,
        }));
    }
    with_header("heuristic,rank,median_time", rows)
}

#[derive(Serialize)]
struct ScatterRow<'a> {
    instance: &'a str,
    heuristic_a: Heuristic,
    heuristic_b: Heuristic,
    median_steps_a: u64,
    median_steps_b: u64,
}

fn by_instance(summaries: &[InstanceSummary]) -> Result<BTreeMap<&str, &InstanceSummary>, HarnessError> {
    let mut map = BTreeMap::new();
    for s in summaries {
        if map.insert(s.instance.as_str(), s).is_some() {
            return Err(HarnessError::MismatchedInstanceSets);
        }
    }
    Ok(map)
}

/// Scatter data comparing two heuristics on the same instances, sorted by
/// instance id. Columns: instance,heuristic_a,heuristic_b,median_steps_a,
/// median_steps_b. Unsolved sides are censored to 10^7 steps.
pub fn emit_scatter_csv(
    a: &[InstanceSummary],
    b: &[InstanceSummary],
) -> Result<String, HarnessError> {
    let ma = by_instance(a)?;
    let mb = by_instance(b)?;
    if !ma.keys().eq(mb.keys()) {
        return Err(HarnessError::MismatchedInstanceSets);
    }
    let rows: Vec<ScatterRow<'_>> = ma
        .iter()
        .map(|(id, sa)| {
            let sb = mb[id];
            ScatterRow {
                instance: id,
                heuristic_a: sa.heuristic,
                heuristic_b: sb.heuristic,
                median_steps_a: sa.censored_steps(),
                median_steps_b: sb.censored_steps(),
            }
        })
        .collect();
    with_header(
        "instance,heuristic_a,heuristic_b,median_steps_a,median_steps_b",
        rows,
    )
}
