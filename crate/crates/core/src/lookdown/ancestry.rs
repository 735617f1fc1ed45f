//! Tracing lookdown levels back in time and reading off the coalescent.

use alloc::format;
use alloc::vec::Vec;

use super::EventLog;
use crate::coalescent::CoalescentPath;
use crate::combinatorics::Partition;
use crate::{Error, Result};

/// Ancestor levels `N_T^j(s)` of levels `j = 1..=levels` at time `T`.
///
/// `steps[0] = (T, identity)`; `steps[k] = (τ_k, a)` means that just before
/// the event at `τ_k` (and back to the next earlier step) level `j` at time
/// `T` descends from level `a[j-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AncestryTrace {
    pub reference_time: f64,
    pub levels: usize,
    pub steps: Vec<(f64, Vec<usize>)>,
}

impl AncestryTrace {
    /// `N_T^j(s)` for `0 ≤ s ≤ T`.
    pub fn ancestor(&self, j: usize, s: f64) -> usize {
        // last step whose event time is > s
        let k = self.steps.iter().rposition(|(t, _)| *t > s).unwrap_or(0);
        self.steps[k].1[j - 1]
    }

    /// `N_T^j(s) ≤ j` everywhere.
    pub fn respects_level_bound(&self) -> bool {
        self.steps.iter().all(|(_, a)| a.iter().enumerate().all(|(j, &v)| v >= 1 && v <= j + 1))
    }
}

/// Walks the reproduction events of `log` with time `≤ t_ref` backwards,
/// mapping each ancestor level to the level it copied from. Mutations do not
/// move lineages.
pub fn trace_ancestry(log: &EventLog, t_ref: f64, levels: usize) -> Result<AncestryTrace> {
    if levels == 0 {
        return Err(Error::InvalidArgument("at least one level is required".into()));
    }
    if levels > log.levels {
        return Err(Error::IncompleteLog(format!("log has {} levels, {levels} requested", log.levels)));
    }
    if t_ref > log.horizon {
        return Err(Error::IncompleteLog(format!("log ends at {}, trace starts at {t_ref}", log.horizon)));
    }
    let mut current: Vec<usize> = (1..=levels).collect();
    let mut steps = alloc::vec![(t_ref, current.clone())];
    for ev in log.reproduction_events().rev() {
        if ev.time > t_ref {
            continue;
        }
        let top = current.iter().copied().max().unwrap_or(0);
        let src = ev.source_levels(top);
        let next: Vec<usize> = current.iter().map(|&v| src[v - 1]).collect();
        if next != current {
            current = next;
            steps.push((ev.time, current.clone()));
        }
    }
    Ok(AncestryTrace { reference_time: t_ref, levels, steps })
}

/// `Π_t`, `0 ≤ t ≤ T`: `i` and `k` share a block iff their ancestors at time
/// `T − t` sit at the same level.
pub fn embedded_coalescent(trace: &AncestryTrace, n: usize) -> Result<CoalescentPath> {
    if n == 0 || n > trace.levels {
        return Err(Error::InvalidArgument(format!("n = {n} must be in 1..={}", trace.levels)));
    }
    let mut path = CoalescentPath::new(n, 0);
    for (tau, anc) in trace.steps.iter().skip(1) {
        let state = partition_by_label(&anc[..n]);
        if state.num_blocks() < path.current().num_blocks() {
            path.push(trace.reference_time - tau, state)?;
        }
    }
    Ok(path)
}

fn partition_by_label(labels: &[usize]) -> Partition {
    let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match blocks.iter_mut().find(|(k, _)| *k == l) {
            Some((_, b)) => b.push(i + 1),
            None => blocks.push((l, alloc::vec![i + 1])),
        }
    }
    Partition::from_blocks(labels.len(), blocks.into_iter().map(|(_, b)| b).collect()).expect("labels induce a partition")
}
