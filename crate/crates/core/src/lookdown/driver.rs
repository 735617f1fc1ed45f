//! The lookdown model on a finite number of levels.
//!
//! Randomness is split so that runs with different numbers of levels agree
//! on the levels they share: one stream drives the reproduction point
//! process (its coins are indexed by level), level `j` owns the pair clock
//! that makes it copy a uniform lower level, and level `v` owns its
//! mutation clock.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use rand_distr::Exp1;

use super::{EventLog, LogEntry, MutationModel, ParticleState, ReproductionEvent, Symbol};
use crate::seed::{rng_from_seed, stream_seed, EventCoins, SimRng};
use crate::simplex::{EventPoint, XiSpec, ZetaSampler};
use crate::{Error, Result};

const TAG_MULTI: u64 = 0xA1;
const TAG_PAIR: u64 = 0xA2;
const TAG_MUTATION: u64 = 0xA3;

/// Parents keep their type, members copy their parent, and the `i`-th
/// smallest level outside all families receives the pre-event type of the
/// `i`-th smallest non-parent level. Types pushed past the top are lost.
pub fn apply_lookdown(types: &mut [Symbol], event: &ReproductionEvent) {
    let src = event.source_levels(types.len());
    let pre = types.to_vec();
    for (t, s) in types.iter_mut().zip(src) {
        *t = pre[s - 1];
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Source {
    Multi,
    Pair(usize),
    Mutation(usize),
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    source: Source,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // min-heap on time
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.source.cmp(&self.source))
    }
}

/// A lookdown run in progress.
#[derive(Debug, Clone)]
pub struct LookdownSimulation {
    state: ParticleState,
    mutation: MutationModel,
    sampler: Option<ZetaSampler>,
    kingman_mass: f64,
    seed: u64,
    event_index: u64,
    multi_rng: SimRng,
    pair_rngs: Vec<SimRng>,
    mutation_rngs: Vec<SimRng>,
    heap: BinaryHeap<Scheduled>,
}

impl LookdownSimulation {
    pub fn new(xi: &XiSpec, mutation: &MutationModel, initial: Vec<Symbol>, seed: u64) -> Result<Self> {
        Self::starting_at(xi, mutation, ParticleState::new(initial), seed)
    }

    /// Starts from `state` at time `state.time`.
    pub fn starting_at(xi: &XiSpec, mutation: &MutationModel, state: ParticleState, seed: u64) -> Result<Self> {
        if state.is_empty() {
            return Err(Error::InvalidArgument("at least one level is required".into()));
        }
        state.validate(mutation.alphabet_size())?;
        let levels = state.len();
        let sampler = if xi.has_no_events() { None } else { Some(ZetaSampler::new(xi)?) };
        let kingman_mass = xi.kingman_mass();
        let mut sim = Self {
            mutation: mutation.clone(),
            kingman_mass,
            seed,
            event_index: 0,
            multi_rng: rng_from_seed(stream_seed(seed, TAG_MULTI, 0)),
            pair_rngs: Vec::new(),
            mutation_rngs: Vec::new(),
            heap: BinaryHeap::new(),
            sampler,
            state,
        };
        let t0 = sim.state.time;
        if sim.multi_rate() > 0.0 {
            let t = t0 + sim.wait(Source::Multi);
            sim.heap.push(Scheduled { time: t, source: Source::Multi });
        }
        if kingman_mass > 0.0 {
            sim.pair_rngs = (0..=levels).map(|j| rng_from_seed(stream_seed(seed, TAG_PAIR, j as u64))).collect();
            for j in 2..=levels {
                let t = t0 + sim.wait(Source::Pair(j));
                sim.heap.push(Scheduled { time: t, source: Source::Pair(j) });
            }
        }
        if mutation.rate() > 0.0 {
            sim.mutation_rngs = (0..=levels).map(|v| rng_from_seed(stream_seed(seed, TAG_MUTATION, v as u64))).collect();
            for v in 1..=levels {
                let t = t0 + sim.wait(Source::Mutation(v));
                sim.heap.push(Scheduled { time: t, source: Source::Mutation(v) });
            }
        }
        Ok(sim)
    }

    fn multi_rate(&self) -> f64 {
        self.sampler.as_ref().map_or(0.0, ZetaSampler::rate)
    }

    fn wait(&mut self, source: Source) -> f64 {
        let (rng, rate) = match source {
            Source::Multi => (&mut self.multi_rng, self.sampler.as_ref().map_or(0.0, ZetaSampler::rate)),
            Source::Pair(j) => (&mut self.pair_rngs[j], self.kingman_mass * (j - 1) as f64),
            Source::Mutation(v) => (&mut self.mutation_rngs[v], self.mutation.rate()),
        };
        let e: f64 = rng.sample(Exp1);
        e / rate
    }

    pub fn state(&self) -> &ParticleState {
        &self.state
    }

    pub fn levels(&self) -> usize {
        self.state.len()
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Time of the next event, if any is scheduled.
    pub fn next_time(&self) -> Option<f64> {
        self.heap.peek().map(|s| s.time)
    }

    /// Executes the next event if it happens no later than `until` and
    /// returns it; otherwise moves the clock to `until` and returns `None`.
    pub fn step(&mut self, until: f64) -> Option<LogEntry> {
        match self.heap.peek() {
            Some(s) if s.time <= until => {}
            _ => {
                if until > self.state.time {
                    self.state.time = until;
                }
                return None;
            }
        }
        let Scheduled { time, source } = self.heap.pop().expect("peeked");
        self.state.time = time;
        let entry = match source {
            Source::Multi => {
                let zeta = self.sampler.as_ref().expect("scheduled").sample(&mut self.multi_rng);
                let coins = EventCoins::for_event(self.seed, self.event_index);
                self.event_index += 1;
                let point = EventPoint { time, zeta, coins };
                let ev = ReproductionEvent::from_point(&point, self.levels());
                apply_lookdown(&mut self.state.types, &ev);
                LogEntry::Reproduction(ev)
            }
            Source::Pair(j) => {
                let i = self.pair_rngs[j].random_range(1..j);
                let ev = ReproductionEvent::kingman(time, i, j);
                apply_lookdown(&mut self.state.types, &ev);
                LogEntry::Reproduction(ev)
            }
            Source::Mutation(v) => {
                let u: f64 = self.mutation_rngs[v].random();
                let new_type = self.mutation.jump(self.state.types[v - 1], u);
                self.state.types[v - 1] = new_type;
                LogEntry::Mutation { time, level: v, new_type }
            }
        };
        let next = time + self.wait(source);
        self.heap.push(Scheduled { time: next, source });
        Some(entry)
    }

    /// Runs to `until`, returning the events in order.
    pub fn advance_to(&mut self, until: f64) -> Vec<LogEntry> {
        let mut out = Vec::new();
        while let Some(e) = self.step(until) {
            out.push(e);
        }
        out
    }

    /// Runs to `until` without keeping the events.
    pub fn skip_to(&mut self, until: f64) {
        while self.step(until).is_some() {}
    }
}

/// Final state and full event log of a lookdown run.
#[derive(Debug, Clone, PartialEq)]
pub struct LookdownRun {
    pub final_state: ParticleState,
    pub log: EventLog,
}

pub fn simulate_lookdown(
    xi: &XiSpec,
    mutation: &MutationModel,
    initial: Vec<Symbol>,
    horizon: f64,
    seed: u64,
) -> Result<LookdownRun> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidArgument("horizon must be >= 0".into()));
    }
    let mut sim = LookdownSimulation::new(xi, mutation, initial, seed)?;
    let entries = sim.advance_to(horizon);
    Ok(LookdownRun {
        final_state: sim.state().clone(),
        log: EventLog { levels: sim.levels(), horizon, entries },
    })
}

/// Runs the lookdown model from `state` for `duration`, drawing the run
/// seed from `rng`.
pub fn step_lookdown(
    state: &ParticleState,
    xi: &XiSpec,
    mutation: &MutationModel,
    rng: &mut SimRng,
    duration: f64,
) -> Result<(ParticleState, Vec<LogEntry>)> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument("duration must be > 0".into()));
    }
    let mut sim = LookdownSimulation::starting_at(xi, mutation, state.clone(), rng.random())?;
    let log = sim.advance_to(state.time + duration);
    Ok((sim.state().clone(), log))
}
