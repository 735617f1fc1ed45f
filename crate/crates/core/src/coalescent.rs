//! Ξ-coalescent paths on `{1..n}`: the exact jump chain, the Poisson
//! construction, the block counting path and the bottleneck time change of
//! the Kingman coalescent.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::combinatorics::{factorial, integer_partitions, BlockSizeSignature, Partition};
use crate::rates::{RateMethod, RateTable, MAX_BLOCKS};
use crate::seed::{rng_from_seed, SimRng};
use crate::simplex::{Color, XiSpec, ZetaSampler};
use crate::stats::Estimate;
use crate::{Error, Result};

/// A coalescent path: `states[i]` holds on `[times[i], times[i+1])`.
///
/// `times[0] = 0` and `states[0]` is the all-singleton partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalescentPath {
    times: Vec<f64>,
    states: Vec<Partition>,
    seed: u64,
}

impl CoalescentPath {
    pub fn new(n: usize, seed: u64) -> Self {
        Self::starting_from(Partition::singletons(n), seed)
    }

    /// A path started from an arbitrary partition.
    pub fn starting_from(initial: Partition, seed: u64) -> Self {
        Self { times: vec![0.0], states: vec![initial], seed }
    }

    /// Appends a jump. The new state must strictly coarsen the current one
    /// and the time must not go backwards.
    pub fn push(&mut self, time: f64, state: Partition) -> Result<()> {
        let last = self.current();
        if !(time >= *self.times.last().expect("nonempty")) {
            return Err(Error::InconsistentEvent(format!("jump time {time} precedes the previous jump")));
        }
        if !state.is_coarsening_of(last) || state.num_blocks() >= last.num_blocks() {
            return Err(Error::InconsistentEvent(format!("{state} does not strictly coarsen {last}")));
        }
        self.times.push(time);
        self.states.push(state);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.states[0].n()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Partition] {
        &self.states
    }

    pub fn current(&self) -> &Partition {
        self.states.last().expect("nonempty")
    }

    pub fn num_jumps(&self) -> usize {
        self.times.len() - 1
    }

    /// State at time `t ≥ 0` (right-continuous).
    pub fn state_at(&self, t: f64) -> &Partition {
        let idx = self.times.partition_point(|s| *s <= t).max(1) - 1;
        &self.states[idx]
    }

    /// Time at which a single block is reached, if within the simulation.
    pub fn tmrca(&self) -> Option<f64> {
        self.states.iter().position(|s| s.num_blocks() <= 1).map(|i| self.times[i])
    }

    /// Time of the first jump, if any.
    pub fn first_jump(&self) -> Option<(f64, &Partition)> {
        (self.times.len() > 1).then(|| (self.times[1], &self.states[1]))
    }

    /// First time `i` and `j` share a block.
    pub fn first_merge_time(&self, i: usize, j: usize) -> Option<f64> {
        self.states.iter().position(|s| s.same_block(i, j)).map(|k| self.times[k])
    }

    /// The path of the restriction to `{1..m}`: only jumps visible on the
    /// first `m` elements are kept.
    pub fn restrict(&self, m: usize) -> CoalescentPath {
        let mut out = CoalescentPath::starting_from(self.states[0].restrict(m), self.seed);
        for (t, s) in self.times.iter().zip(&self.states).skip(1) {
            let r = s.restrict(m);
            if r.num_blocks() < out.current().num_blocks() {
                out.times.push(*t);
                out.states.push(r);
            }
        }
        out
    }

    /// Relabels every state by `perm` (see [`Partition::permute`]).
    pub fn permute(&self, perm: &[usize]) -> Result<CoalescentPath> {
        let states = self.states.iter().map(|s| s.permute(perm)).collect::<Result<Vec<_>>>()?;
        Ok(CoalescentPath { times: self.times.clone(), states, seed: self.seed })
    }
}

/// The càdlàg step function `t ↦ |Π_t|`.
pub fn block_count_path(path: &CoalescentPath) -> Vec<(f64, usize)> {
    path.times.iter().zip(&path.states).map(|(t, s)| (*t, s.num_blocks())).collect()
}

/// Number of ways to choose merging groups of the given signature among
/// `b = Σ kᵢ` blocks: `b!/(∏kᵢ! · ∏ mult!)` where `mult` counts equal sizes
/// (the ones included).
pub fn pattern_count(sig: &BlockSizeSignature) -> u128 {
    let sizes = sig.sizes();
    let mut denom: u128 = sizes.iter().map(|&k| factorial(k)).product();
    let mut i = 0;
    while i < sizes.len() {
        let j = sizes[i..].iter().take_while(|&&k| k == sizes[i]).count();
        denom *= factorial(j);
        i += j;
    }
    factorial(sig.n()) / denom
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    Ok(())
}

fn exp_wait(rng: &mut SimRng, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Merges the listed groups of block indices (1-based, into
/// `state.blocks()`); unlisted blocks stay.
fn merge_groups(state: &Partition, groups: Vec<Vec<usize>>) -> Partition {
    let b = state.num_blocks();
    let mut covered = vec![false; b + 1];
    for g in &groups {
        for &k in g {
            covered[k] = true;
        }
    }
    let mut grouping = groups;
    grouping.extend((1..=b).filter(|&k| !covered[k]).map(|k| vec![k]));
    let grouping = Partition::from_blocks(b, grouping).expect("groups are disjoint block indices");
    state.merge_by(&grouping).expect("grouping is over the blocks")
}

/// Shuffles the block indices and cuts them into the merging groups of
/// `sig`: a uniform draw among the patterns of that signature.
fn random_pattern(b: usize, sig: &BlockSizeSignature, rng: &mut SimRng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (1..=b).collect();
    idx.shuffle(rng);
    let mut groups = Vec::new();
    let mut at = 0;
    for &k in sig.groups() {
        groups.push(idx[at..at + k].to_vec());
        at += k;
    }
    groups
}

/// Exact simulation of the block-level jump chain with precomputed rates.
#[derive(Debug, Clone)]
pub struct JumpChainSampler {
    n: usize,
    /// `by_blocks[b]`: signatures over `b` blocks with total pattern rate.
    by_blocks: Vec<Vec<(BlockSizeSignature, f64)>>,
    totals: Vec<f64>,
}

impl JumpChainSampler {
    pub fn new(xi: &XiSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if n > MAX_BLOCKS {
            return Err(Error::TooLarge { what: "n", value: n, max: MAX_BLOCKS });
        }
        let table = RateTable::with_method(xi.clone(), RateMethod::Auto);
        let mut by_blocks = vec![Vec::new(); n + 1];
        let mut totals = vec![0.0; n + 1];
        for b in 2..=n {
            for sig in integer_partitions(b) {
                if sig.is_trivial() {
                    continue;
                }
                let rate = table.get(&sig)? * pattern_count(&sig) as f64;
                if rate > 0.0 {
                    totals[b] += rate;
                    by_blocks[b].push((sig, rate));
                }
            }
        }
        Ok(Self { n, by_blocks, totals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total jump rate out of any state with `b` blocks.
    pub fn total_rate(&self, b: usize) -> f64 {
        self.totals.get(b).copied().unwrap_or(0.0)
    }

    /// Rate of moving from `b` to `k` blocks, summed over patterns.
    pub fn rate_to(&self, b: usize, k: usize) -> f64 {
        self.by_blocks.get(b).map_or(0.0, |v| v.iter().filter(|(s, _)| s.num_blocks() == k).map(|(_, r)| r).sum())
    }

    pub fn sample(&self, horizon: f64, seed: u64) -> Result<CoalescentPath> {
        self.sample_from(Partition::singletons(self.n), horizon, seed)
    }

    /// Runs from `initial` (a partition of `{1..n}`) until `horizon`, which
    /// may be infinite; stops early at a single block.
    pub fn sample_from(&self, initial: Partition, horizon: f64, seed: u64) -> Result<CoalescentPath> {
        check_horizon(horizon)?;
        if initial.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: initial.n() });
        }
        let mut rng = rng_from_seed(seed);
        let mut path = CoalescentPath::starting_from(initial, seed);
        let mut t = 0.0;
        loop {
            let b = path.current().num_blocks();
            let total = self.total_rate(b);
            if b <= 1 || total <= 0.0 {
                break;
            }
            t += exp_wait(&mut rng, total);
            if t > horizon {
                break;
            }
            let grouping = self.sample_grouping(b, &mut rng).expect("total rate is positive");
            let next = path.current().merge_by(&grouping)?;
            path.push(t, next)?;
        }
        Ok(path)
    }

    /// Draws which blocks merge in a jump out of a `b`-block state, as a
    /// partition of the block indices `{1..b}`. `None` if no jump is possible.
    pub fn sample_grouping(&self, b: usize, rng: &mut SimRng) -> Option<Partition> {
        let total = self.total_rate(b);
        if b < 2 || total <= 0.0 {
            return None;
        }
        let mut u = rng.random::<f64>() * total;
        let choices = &self.by_blocks[b];
        let mut pick = &choices[choices.len() - 1].0;
        for (sig, rate) in choices {
            if u < *rate {
                pick = sig;
                break;
            }
            u -= rate;
        }
        let mut groups = random_pattern(b, pick, rng);
        let mut covered = vec![false; b + 1];
        for g in &groups {
            for &k in g {
                covered[k] = true;
            }
        }
        groups.extend((1..=b).filter(|&k| !covered[k]).map(|k| vec![k]));
        Some(Partition::from_blocks(b, groups).expect("pattern is a partition of the block indices"))
    }
}

pub fn simulate_jump_chain(xi: &XiSpec, n: usize, horizon: f64, seed: u64) -> Result<CoalescentPath> {
    JumpChainSampler::new(xi, n)?.sample(horizon, seed)
}

/// Counters kept by the Poisson construction next to the path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoissonDiagnostics {
    pub kingman_events: u64,
    pub reproduction_events: u64,
    /// Reproduction events that merged nothing.
    pub null_events: u64,
}

/// Groups the current blocks by the colours of fresh coins; returns the
/// classes with at least two members.
fn color_groups(zeta: &crate::simplex::SimplexPoint, b: usize, rng: &mut SimRng) -> Vec<Vec<usize>> {
    let mut by_color: Vec<(usize, usize)> = Vec::with_capacity(b);
    for k in 1..=b {
        if let Color::Family(c) = zeta.color(rng.random()) {
            by_color.push((c, k));
        }
    }
    by_color.sort_unstable();
    let mut groups = Vec::new();
    let mut i = 0;
    while i < by_color.len() {
        let j = by_color[i..].iter().take_while(|(c, _)| *c == by_color[i].0).count();
        if j >= 2 {
            groups.push(by_color[i..i + j].iter().map(|(_, k)| *k).collect());
        }
        i += j;
    }
    groups
}

/// The construction from pairwise Kingman clocks and the point process of
/// reproduction events.
pub fn simulate_poisson_construction(
    xi: &XiSpec,
    n: usize,
    horizon: f64,
    seed: u64,
) -> Result<(CoalescentPath, PoissonDiagnostics)> {
    check_horizon(horizon)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let sampler = if xi.has_no_events() { None } else { Some(ZetaSampler::new(xi)?) };
    let event_rate = sampler.as_ref().map_or(0.0, ZetaSampler::rate);
    let a = xi.kingman_mass();
    let mut rng = rng_from_seed(seed);
    let mut path = CoalescentPath::new(n, seed);
    let mut diag = PoissonDiagnostics::default();
    let mut t = 0.0;
    loop {
        let b = path.current().num_blocks();
        if b <= 1 {
            break;
        }
        let kingman_rate = a * (b * (b - 1) / 2) as f64;
        let total = kingman_rate + event_rate;
        if total <= 0.0 {
            break;
        }
        t += exp_wait(&mut rng, total);
        if t > horizon {
            break;
        }
        if rng.random::<f64>() * total < kingman_rate {
            diag.kingman_events += 1;
            let i = rng.random_range(1..=b);
            let mut j = rng.random_range(1..b);
            if j >= i {
                j += 1;
            }
            let next = merge_groups(path.current(), vec![vec![i.min(j), i.max(j)]]);
            path.push(t, next)?;
        } else {
            diag.reproduction_events += 1;
            let zeta = sampler.as_ref().expect("event rate is positive").sample(&mut rng);
            let groups = color_groups(&zeta, b, &mut rng);
            if groups.is_empty() {
                diag.null_events += 1;
            } else {
                let next = merge_groups(path.current(), groups);
                path.push(t, next)?;
            }
        }
    }
    Ok((path, diag))
}

/// Fraction of independent reproduction events that merge none of `n`
/// singleton blocks, with its binomial standard error.
pub fn null_event_fraction(xi: &XiSpec, n: usize, events: usize, seed: u64) -> Result<Estimate> {
    if events == 0 {
        return Err(Error::InvalidArgument("at least one event is required".into()));
    }
    let sampler = ZetaSampler::new(xi)?;
    let mut rng = rng_from_seed(seed);
    let mut nulls = 0usize;
    for _ in 0..events {
        let zeta = sampler.sample(&mut rng);
        if color_groups(&zeta, n, &mut rng).is_empty() {
            nulls += 1;
        }
    }
    let p = nulls as f64 / events as f64;
    Ok(Estimate { value: p, stderr: (p * (1.0 - p) / events as f64).sqrt() })
}

/// Distribution of the extra clock advance `γ` at a bottleneck.
#[derive(Debug, Clone, PartialEq)]
pub enum SeverityLaw {
    Fixed(f64),
    Exponential { mean: f64 },
    /// `(γ, weight)` pairs; weights need not be normalised.
    Discrete(Vec<(f64, f64)>),
}

impl SeverityLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SeverityLaw::Fixed(g) => *g > 0.0 && g.is_finite(),
            SeverityLaw::Exponential { mean } => *mean > 0.0 && mean.is_finite(),
            SeverityLaw::Discrete(v) => {
                !v.is_empty()
                    && v.iter().all(|(g, w)| *g > 0.0 && g.is_finite() && *w >= 0.0 && w.is_finite())
                    && v.iter().any(|(_, w)| *w > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid severity law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            SeverityLaw::Fixed(g) => *g,
            SeverityLaw::Exponential { mean } => {
                let e: f64 = rng.sample(Exp1);
                e * mean
            }
            SeverityLaw::Discrete(v) => {
                let total: f64 = v.iter().map(|(_, w)| w).sum();
                let mut u = rng.random::<f64>() * total;
                for (g, w) in v {
                    if u < *w {
                        return *g;
                    }
                    u -= w;
                }
                v.iter().rev().find(|(_, w)| *w > 0.0).expect("positive weight").0
            }
        }
    }
}

/// Bottlenecks arrive at rate `beta`; each advances the Kingman clock by a
/// draw from `severity`.
#[derive(Debug, Clone, PartialEq)]
pub struct BottleneckSpec {
    pub beta: f64,
    pub severity: SeverityLaw,
}

impl BottleneckSpec {
    pub fn new(beta: f64, severity: SeverityLaw) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("bottleneck rate {beta} must be > 0")));
        }
        severity.validate()?;
        Ok(Self { beta, severity })
    }
}

/// Runs the unit-rate Kingman coalescent for an extra duration `gamma` at
/// once, returning the merged state.
fn instant_kingman(state: &Partition, gamma: f64, rng: &mut SimRng) -> Partition {
    let mut cur = state.clone();
    let mut elapsed = 0.0;
    loop {
        let b = cur.num_blocks();
        if b <= 1 {
            break;
        }
        elapsed += exp_wait(rng, (b * (b - 1) / 2) as f64);
        if elapsed > gamma {
            break;
        }
        let i = rng.random_range(1..=b);
        let mut j = rng.random_range(1..b);
        if j >= i {
            j += 1;
        }
        cur = merge_groups(&cur, vec![vec![i.min(j), i.max(j)]]);
    }
    cur
}

/// Kingman coalescent time-changed by `t ↦ t + Σ_{τᵢ ≤ t} γᵢ` for a given
/// list of bottlenecks `(τᵢ, γᵢ)` (sorted by time).
pub fn simulate_bottleneck_schedule(schedule: &[(f64, f64)], n: usize, horizon: f64, seed: u64) -> Result<CoalescentPath> {
    check_horizon(horizon)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if schedule.windows(2).any(|w| w[1].0 < w[0].0) || schedule.iter().any(|(t, g)| !(*t >= 0.0) || !(*g > 0.0)) {
        return Err(Error::InvalidArgument("schedule must be sorted with times >= 0 and severities > 0".into()));
    }
    let mut rng = rng_from_seed(seed);
    run_bottleneck(n, horizon, seed, &mut rng, schedule.iter().copied())
}

fn run_bottleneck<I>(n: usize, horizon: f64, seed: u64, rng: &mut SimRng, bottlenecks: I) -> Result<CoalescentPath>
where
    I: Iterator<Item = (f64, f64)>,
{
    let mut path = CoalescentPath::new(n, seed);
    let mut t = 0.0;
    let mut upcoming = bottlenecks.peekable();
    loop {
        let b = path.current().num_blocks();
        let next_bottleneck = upcoming.peek().map_or(f64::INFINITY, |(tau, _)| *tau);
        let wait = if b > 1 { exp_wait(rng, (b * (b - 1) / 2) as f64) } else { f64::INFINITY };
        if t + wait < next_bottleneck {
            t += wait;
            if t > horizon {
                break;
            }
            let i = rng.random_range(1..=b);
            let mut j = rng.random_range(1..b);
            if j >= i {
                j += 1;
            }
            let next = merge_groups(path.current(), vec![vec![i.min(j), i.max(j)]]);
            path.push(t, next)?;
        } else {
            let (tau, gamma) = match upcoming.next() {
                Some(x) => x,
                None => break,
            };
            if tau > horizon {
                break;
            }
            // the pending Kingman wait is discarded; memorylessness makes
            // redrawing after the bottleneck exact
            t = tau;
            let next = instant_kingman(path.current(), gamma, rng);
            if next.num_blocks() < b {
                path.push(t, next)?;
            }
        }
    }
    Ok(path)
}

/// Bottlenecks at the jumps of a rate-`beta` Poisson process.
pub fn simulate_bottleneck(spec: &BottleneckSpec, n: usize, horizon: f64, seed: u64) -> Result<CoalescentPath> {
    check_horizon(horizon)?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let spec = BottleneckSpec::new(spec.beta, spec.severity.clone())?;
    // arrival and severity draws use their own stream so the Kingman
    // stream is the same as with a fixed schedule
    let mut arrivals = rng_from_seed(crate::seed::stream_seed(seed, 0xB07, 0));
    let mut tau = 0.0;
    let bottlenecks = core::iter::from_fn(move || {
        tau += exp_wait(&mut arrivals, spec.beta);
        if tau > horizon {
            return None;
        }
        let gamma = spec.severity.sample(&mut arrivals);
        Some((tau, gamma))
    });
    let mut rng = rng_from_seed(seed);
    run_bottleneck(n, horizon, seed, &mut rng, bottlenecks)
}

fn ln_factorial(k: usize, table: &mut Vec<f64>) -> f64 {
    while table.len() <= k {
        let m = table.len();
        let prev = table[m - 1];
        table.push(prev + (m as f64).ln());
    }
    table[k]
}

/// `P(N_γ = j)` for `j = 1..=max_blocks`, where `N_γ` is the number of
/// lineages at time `γ` of a Kingman coalescent started with infinitely many:
///
/// `P(N_γ = j) = Σ_{k≥j} e^{−k(k−1)γ/2} (2k−1)(−1)^{k−j} (j+k−2)! / (j!(j−1)!(k−j)!)`.
///
/// The series stops once terms are decreasing and below `1e−12`. For small
/// `γ` the alternating terms grow large before they decay, and precision is
/// lost accordingly.
pub fn bottleneck_xi_weights(gamma: f64, max_blocks: usize) -> Result<Vec<(usize, f64)>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be > 0, got {gamma}")));
    }
    let mut lf = vec![0.0];
    let mut out = Vec::with_capacity(max_blocks);
    for j in 1..=max_blocks {
        let mut sum = 0.0;
        let mut prev = f64::INFINITY;
        for k in j.. {
            let log_mag = -((k * (k - 1)) as f64) * gamma / 2.0 + ((2 * k - 1) as f64).ln() + ln_factorial(j + k - 2, &mut lf)
                - ln_factorial(j, &mut lf)
                - ln_factorial(j - 1, &mut lf)
                - ln_factorial(k - j, &mut lf);
            let mag = log_mag.exp();
            sum += if (k - j) % 2 == 0 { mag } else { -mag };
            if mag < 1e-12 && mag < prev {
                break;
            }
            prev = mag;
        }
        out.push((j, sum.clamp(0.0, 1.0)));
    }
    Ok(out)
}

/// `D_t` of [`block_count_path`] evaluated at `t`.
pub fn block_count_at(path: &CoalescentPath, t: f64) -> usize {
    path.state_at(t).num_blocks()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::block_counting_rates;
    use crate::stats::MeanVar;

    #[test]
    fn pattern_counts() {
        let sig = |v: &[usize]| BlockSizeSignature::new(v.to_vec()).unwrap();
        assert_eq!(pattern_count(&sig(&[2, 1, 1])), 6);
        assert_eq!(pattern_count(&sig(&[2, 2])), 3);
        assert_eq!(pattern_count(&sig(&[3, 2])), 10);
        // all set partitions are counted once
        for n in 1..=7 {
            let total: u128 = integer_partitions(n).iter().map(pattern_count).sum();
            assert_eq!(total, crate::combinatorics::bell(n));
        }
    }

    #[test]
    fn jump_chain_rates_match_block_counting() {
        for xi in [XiSpec::uniform_atom(2).unwrap(), XiSpec::poisson_dirichlet(1.0).unwrap(), XiSpec::kingman(1.0).unwrap()] {
            let s = JumpChainSampler::new(&xi, 6).unwrap();
            for b in 2..=6 {
                let g = block_counting_rates(&xi, b).unwrap();
                assert!((s.total_rate(b) - g.total()).abs() < 1e-12);
                for k in 1..b {
                    assert!((s.rate_to(b, k) - g.rate(k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_block_never_jumps() {
        for xi in [XiSpec::uniform_atom(2).unwrap(), XiSpec::kingman(1.0).unwrap()] {
            let p = simulate_jump_chain(&xi, 1, 100.0, 1).unwrap();
            assert_eq!(p.num_jumps(), 0);
            let (q, _) = simulate_poisson_construction(&xi, 1, 100.0, 1).unwrap();
            assert_eq!(q.num_jumps(), 0);
            assert_eq!(block_count_path(&p), vec![(0.0, 1)]);
        }
        assert!(simulate_jump_chain(&XiSpec::kingman(1.0).unwrap(), 3, 0.0, 1).is_err());
    }

    #[test]
    fn kingman_pair_merges_at_rate_one() {
        let s = JumpChainSampler::new(&XiSpec::kingman(1.0).unwrap(), 2).unwrap();
        let m: MeanVar = (0..10_000).map(|i| s.sample(f64::INFINITY, i).unwrap().tmrca().unwrap()).collect();
        assert!(Estimate::from(&m).within(1.0, 3.0), "{}", m.mean());
    }

    #[test]
    fn paths_coarsen_and_absorb() {
        let xi = XiSpec::finite_atoms(0.5, vec![(0.3, vec![0.4, 0.3]), (0.2, vec![0.9])]).unwrap();
        for seed in 0..200 {
            let p = simulate_jump_chain(&xi, 7, f64::INFINITY, seed).unwrap();
            assert_eq!(p.current().num_blocks(), 1);
            let (q, _) = simulate_poisson_construction(&xi, 7, f64::INFINITY, seed).unwrap();
            assert_eq!(q.current().num_blocks(), 1);
            for path in [&p, &q] {
                assert!(path.states()[0].is_singletons());
                for w in path.states().windows(2) {
                    assert!(w[1].is_coarsening_of(&w[0]) && w[1].num_blocks() < w[0].num_blocks());
                }
                assert!(path.times().windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn uniform_two_atom_pair_rate_via_poisson_construction() {
        // event rate 1, merger probability 1/2 → mean merge time 2
        let xi = XiSpec::uniform_atom(2).unwrap();
        let m: MeanVar =
            (0..10_000).map(|i| simulate_poisson_construction(&xi, 2, f64::INFINITY, i).unwrap().0.tmrca().unwrap()).collect();
        assert!(Estimate::from(&m).within(2.0, 3.0), "{}", m.mean());
    }

    #[test]
    fn null_fraction_for_pd() {
        let e = null_event_fraction(&XiSpec::poisson_dirichlet(1.0).unwrap(), 3, 10_000, 9).unwrap();
        assert!(e.within(1.0 / 6.0, 3.0), "{e:?}");
    }

    #[test]
    fn restriction_and_block_counts() {
        let p = simulate_jump_chain(&XiSpec::kingman(1.0).unwrap(), 3, f64::INFINITY, 4).unwrap();
        let counts = block_count_path(&p);
        assert_eq!(counts.len(), 3);
        assert_eq!(counts.iter().map(|c| c.1).collect::<Vec<_>>(), vec![3, 2, 1]);
        let r = p.restrict(2);
        assert_eq!(r.current().num_blocks(), 1);
        assert_eq!(r.tmrca(), p.first_merge_time(1, 2));
    }

    #[test]
    fn series_is_normalised_and_matches_large_start() {
        for gamma in [0.5, 1.0, 3.0, 10.0] {
            let w = bottleneck_xi_weights(gamma, 60).unwrap();
            let total: f64 = w.iter().map(|x| x.1).sum();
            assert!((total - 1.0).abs() < 1e-8, "gamma={gamma}: {total}");
        }
        assert!(bottleneck_xi_weights(10.0, 5).unwrap()[0].1 > 0.99);
        assert!(bottleneck_xi_weights(0.0, 5).is_err());
        // oracle: Kingman from m = 100 lineages run to time 1
        let w = bottleneck_xi_weights(1.0, 10).unwrap();
        let reps = 10_000;
        let mut counts = [0usize; 12];
        let mut rng = rng_from_seed(77);
        for _ in 0..reps {
            let mut b = 100usize;
            let mut t = 0.0;
            loop {
                t += exp_wait(&mut rng, (b * (b - 1) / 2) as f64);
                if t > 1.0 {
                    break;
                }
                b -= 1;
            }
            counts[b.min(11)] += 1;
        }
        for j in 2..=8 {
            let p = counts[j] as f64 / reps as f64;
            let se = (w[j - 1].1 * (1.0 - w[j - 1].1) / reps as f64).sqrt();
            assert!((p - w[j - 1].1).abs() < 3.0 * se + 2e-3, "j={j}: {p} vs {}", w[j - 1].1);
        }
    }

    #[test]
    fn severe_bottleneck_collapses() {
        let p = simulate_bottleneck_schedule(&[(0.5, 1e3)], 10, 1.0, 3).unwrap();
        assert_eq!(p.state_at(0.5).num_blocks(), 1);
        let spec = BottleneckSpec::new(1e-9, SeverityLaw::Fixed(1.0)).unwrap();
        let q = simulate_bottleneck(&spec, 4, 10.0, 5).unwrap();
        let plain = simulate_bottleneck_schedule(&[], 4, 10.0, 5).unwrap();
        assert_eq!(q, plain);
        assert!(BottleneckSpec::new(0.0, SeverityLaw::Fixed(1.0)).is_err());
        assert!(SeverityLaw::Discrete(vec![]).validate().is_err());
    }
}
