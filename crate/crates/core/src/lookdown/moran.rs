//! The Moran model: families pick a uniform parent and copy its type.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::Exp1;

use super::{EventSource, LogEntry, MutationModel, ParticleState, ReproductionEvent, Symbol};
use crate::seed::{EventCoins, SimRng};
use crate::simplex::{Color, XiSpec, ZetaSampler};
use crate::{Error, Result};

/// Every member of every family takes its parent's pre-event type.
pub fn apply_moran(types: &mut [Symbol], event: &ReproductionEvent) {
    let pre: Vec<Symbol> = event.parents.iter().map(|&p| types[p - 1]).collect();
    for (fam, t) in event.families.iter().zip(pre) {
        for &i in fam {
            types[i - 1] = t;
        }
    }
}

/// Runs the Moran model on `state.len()` particles for `duration`.
///
/// Pair events fire at rate `a` per unordered pair, reproduction events at
/// the total intensity of `Ξ₀`, mutations at `mutation.rate()` per particle.
pub fn step_moran(
    state: &ParticleState,
    xi: &XiSpec,
    mutation: &MutationModel,
    rng: &mut SimRng,
    duration: f64,
) -> Result<(ParticleState, Vec<LogEntry>)> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument("duration must be > 0".into()));
    }
    state.validate(mutation.alphabet_size())?;
    let n = state.len();
    let sampler = if xi.has_no_events() { None } else { Some(ZetaSampler::new(xi)?) };
    let multi_rate = sampler.as_ref().map_or(0.0, ZetaSampler::rate);
    let pair_rate = if n >= 2 { xi.kingman_mass() * (n * (n - 1) / 2) as f64 } else { 0.0 };
    let mut_rate = mutation.rate() * n as f64;
    let total = multi_rate + pair_rate + mut_rate;
    let mut out = state.clone();
    let mut log = Vec::new();
    let end = state.time + duration;
    let mut t = state.time;
    if total > 0.0 {
        loop {
            let e: f64 = rng.sample(Exp1);
            t += e / total;
            if t > end {
                break;
            }
            let u = rng.random::<f64>() * total;
            if u < pair_rate {
                let i = rng.random_range(1..=n);
                let mut j = rng.random_range(1..n);
                if j >= i {
                    j += 1;
                }
                let parent = if rng.random::<bool>() { i } else { j };
                let ev = ReproductionEvent {
                    time: t,
                    families: vec![vec![i.min(j), i.max(j)]],
                    parents: vec![parent],
                    source: EventSource::Kingman,
                };
                apply_moran(&mut out.types, &ev);
                log.push(LogEntry::Reproduction(ev));
            } else if u < pair_rate + multi_rate {
                let zeta = sampler.as_ref().expect("positive rate").sample(rng);
                let coins = EventCoins::new(rng.random());
                let mut by_color: Vec<(usize, usize)> = Vec::new();
                for i in 1..=n {
                    if let Color::Family(c) = zeta.color(coins.coin(i)) {
                        by_color.push((c, i));
                    }
                }
                by_color.sort_unstable();
                let mut families = Vec::new();
                let mut parents = Vec::new();
                let mut k = 0;
                while k < by_color.len() {
                    let len = by_color[k..].iter().take_while(|(c, _)| *c == by_color[k].0).count();
                    let fam: Vec<usize> = by_color[k..k + len].iter().map(|(_, i)| *i).collect();
                    if fam.len() >= 2 {
                        parents.push(fam[rng.random_range(0..fam.len())]);
                        families.push(fam);
                    }
                    k += len;
                }
                let ev = ReproductionEvent { time: t, families, parents, source: EventSource::Multi { zeta, coins } };
                apply_moran(&mut out.types, &ev);
                log.push(LogEntry::Reproduction(ev));
            } else {
                let i = rng.random_range(1..=n);
                let new_type = mutation.jump(out.types[i - 1], rng.random());
                out.types[i - 1] = new_type;
                log.push(LogEntry::Mutation { time: t, level: i, new_type });
            }
        }
    }
    out.time = end;
    Ok((out, log))
}
