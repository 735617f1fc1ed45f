//! Forward particle systems: the Moran model, the lookdown model truncated
//! at a finite number of levels, the permutation coupling between them, and
//! ancestry tracing back through a lookdown run.

mod ancestry;
mod coupling;
mod driver;
mod moran;

pub use ancestry::{embedded_coalescent, trace_ancestry, AncestryTrace};
pub use coupling::{advance_coupling, assemble_theta, run_coupled, Chi, CoupledRun, CouplingState};
pub use driver::{apply_lookdown, simulate_lookdown, step_lookdown, LookdownRun, LookdownSimulation};
pub use moran::{apply_moran, step_moran};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::SquareMatrix;
use crate::seed::{mix64, stream_seed, unit_f64, EventCoins};
use crate::simplex::{Color, EventPoint, SimplexPoint};
use crate::{Error, Result};

/// Type symbols are indices into a finite alphabet.
pub type Symbol = usize;

/// Independent mutation clocks of rate `rate` per particle; a mutating
/// particle of type `x` jumps to `y` with probability `transition[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationModel {
    rate: f64,
    transition: SquareMatrix,
}

impl MutationModel {
    pub fn new(rate: f64, transition: Vec<Vec<f64>>) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidMutation(format!("rate {rate} must be finite and >= 0")));
        }
        if transition.is_empty() {
            return Err(Error::InvalidMutation("alphabet must have at least one symbol".into()));
        }
        let m = SquareMatrix::from_rows(&transition).map_err(|_| Error::InvalidMutation("transition matrix must be square".into()))?;
        for (x, row) in transition.iter().enumerate() {
            if row.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
                return Err(Error::InvalidMutation(format!("row {x} has an entry outside [0, ∞)")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMutation(format!("row {x} sums to {s}, not 1")));
            }
        }
        Ok(Self { rate, transition: m })
    }

    /// No mutation on an alphabet of `alphabet_size` symbols.
    pub fn none(alphabet_size: usize) -> Self {
        Self { rate: 0.0, transition: SquareMatrix::identity(alphabet_size.max(1)) }
    }

    /// Jumps to a uniformly chosen other symbol.
    pub fn uniform_flip(rate: f64, alphabet_size: usize) -> Result<Self> {
        let k = alphabet_size;
        if k < 2 {
            return Err(Error::InvalidMutation("flip mutation needs at least two symbols".into()));
        }
        let rows = (0..k).map(|x| (0..k).map(|y| if x == y { 0.0 } else { 1.0 / (k - 1) as f64 }).collect()).collect();
        Self::new(rate, rows)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn alphabet_size(&self) -> usize {
        self.transition.dim()
    }

    pub fn transition(&self) -> &SquareMatrix {
        &self.transition
    }

    /// The new type for a uniform `u`, by inverse CDF over row `x`.
    pub fn jump(&self, x: Symbol, u: f64) -> Symbol {
        let row = self.transition.row(x);
        let mut acc = 0.0;
        for (y, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        row.iter().rposition(|p| *p > 0.0).unwrap_or(x)
    }

    /// `r(Q − I)`.
    pub fn generator(&self) -> SquareMatrix {
        let k = self.alphabet_size();
        self.transition.add(&SquareMatrix::identity(k).scale(-1.0)).scale(self.rate)
    }

    /// `exp(t r (Q − I))`.
    pub fn semigroup(&self, t: f64) -> Result<SquareMatrix> {
        self.generator().scale(t).expm(1e-12)
    }
}

/// Types of the particles at levels (or indices) `1..=len`, stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub time: f64,
    pub types: Vec<Symbol>,
}

impl ParticleState {
    pub fn new(types: Vec<Symbol>) -> Self {
        Self { time: 0.0, types }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// Type at 1-based level `v`.
    pub fn at(&self, v: usize) -> Symbol {
        self.types[v - 1]
    }

    pub fn validate(&self, alphabet_size: usize) -> Result<()> {
        if let Some(bad) = self.types.iter().find(|t| **t >= alphabet_size) {
            return Err(Error::InvalidArgument(format!("type {bad} outside an alphabet of {alphabet_size}")));
        }
        Ok(())
    }
}

/// Where the family structure of an event came from.
#[derive(Debug, Clone, PartialEq)]
pub enum EventSource {
    /// A pair clock.
    Kingman,
    /// A point `(t, ζ, u)` of the reproduction point process.
    Multi { zeta: SimplexPoint, coins: EventCoins },
}

/// One reproduction event: disjoint families of levels (or Moran indices),
/// each with a parent. Families may have a single member.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproductionEvent {
    pub time: f64,
    /// Sorted families, ordered by least element.
    pub families: Vec<Vec<usize>>,
    /// `parents[i] ∈ families[i]`.
    pub parents: Vec<usize>,
    pub source: EventSource,
}

impl ReproductionEvent {
    /// Families given explicitly, parent = least member.
    pub fn lookdown(time: f64, mut families: Vec<Vec<usize>>, source: EventSource) -> Result<Self> {
        let mut seen = Vec::new();
        for f in families.iter_mut() {
            if f.is_empty() {
                return Err(Error::InconsistentEvent("empty family".into()));
            }
            f.sort_unstable();
            seen.extend_from_slice(f);
        }
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) || seen.first() == Some(&0) {
            return Err(Error::InconsistentEvent("families must be disjoint sets of positive levels".into()));
        }
        families.sort_unstable_by_key(|f| f[0]);
        let parents = families.iter().map(|f| f[0]).collect();
        Ok(Self { time, families, parents, source })
    }

    /// The pair event `{i, j}` on the lookdown levels.
    pub fn kingman(time: f64, i: usize, j: usize) -> Self {
        let (i, j) = (i.min(j), i.max(j));
        Self { time, families: vec![vec![i, j]], parents: vec![i], source: EventSource::Kingman }
    }

    /// Colour classes of levels `1..=levels` under the event's coins; every
    /// finite colour present forms a family, singletons included.
    pub fn from_point(point: &EventPoint, levels: usize) -> Self {
        let mut by_color: Vec<(usize, usize)> = Vec::new();
        for v in 1..=levels {
            if let Color::Family(c) = point.color_of(v) {
                by_color.push((c, v));
            }
        }
        by_color.sort_unstable();
        let mut families: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < by_color.len() {
            let j = by_color[i..].iter().take_while(|(c, _)| *c == by_color[i].0).count();
            families.push(by_color[i..i + j].iter().map(|(_, v)| *v).collect());
            i += j;
        }
        families.sort_unstable_by_key(|f| f[0]);
        let parents = families.iter().map(|f| f[0]).collect();
        Self {
            time: point.time,
            families,
            parents,
            source: EventSource::Multi { zeta: point.zeta.clone(), coins: point.coins },
        }
    }

    /// Number of offspring `cⁱ = |φⁱ| − 1` per family.
    pub fn offspring(&self) -> Vec<usize> {
        self.families.iter().map(|f| f.len() - 1).collect()
    }

    pub fn total_offspring(&self) -> usize {
        self.families.iter().map(|f| f.len() - 1).sum()
    }

    /// No family has more than one member.
    pub fn is_null(&self) -> bool {
        self.families.iter().all(|f| f.len() <= 1)
    }

    /// Families with at least two members.
    pub fn nontrivial_families(&self) -> impl Iterator<Item = (&Vec<usize>, usize)> {
        self.families.iter().zip(self.parents.iter().copied()).filter(|(f, _)| f.len() >= 2)
    }

    pub fn max_level(&self) -> usize {
        self.families.iter().flat_map(|f| f.last().copied()).max().unwrap_or(0)
    }

    /// For lookdown events: `src[v-1]` is the level whose pre-event type
    /// level `v` holds after the event, for `v = 1..=levels`.
    pub fn source_levels(&self, levels: usize) -> Vec<usize> {
        let mut src = vec![0usize; levels];
        let mut in_family = vec![false; levels + 1];
        let mut is_parent = vec![false; levels + 1];
        for (fam, &parent) in self.families.iter().zip(&self.parents) {
            if parent <= levels {
                is_parent[parent] = true;
            }
            for &v in fam {
                if v <= levels {
                    in_family[v] = true;
                    src[v - 1] = parent;
                }
            }
        }
        // i-th smallest vacant level ← i-th smallest non-parent level
        let mut donor = 1usize;
        for v in 1..=levels {
            if in_family[v] {
                continue;
            }
            while donor <= levels && is_parent[donor] {
                donor += 1;
            }
            src[v - 1] = donor;
            donor += 1;
        }
        src
    }

    /// Families intersected with `{1..=levels}`, empty ones dropped.
    pub fn restrict(&self, levels: usize) -> Self {
        let mut families = Vec::new();
        let mut parents = Vec::new();
        for (f, &p) in self.families.iter().zip(&self.parents) {
            let g: Vec<usize> = f.iter().copied().filter(|&v| v <= levels).collect();
            if !g.is_empty() {
                // parent is the least member, so it survives whenever the family does
                parents.push(if p <= levels { p } else { g[0] });
                families.push(g);
            }
        }
        Self { time: self.time, families, parents, source: self.source.clone() }
    }
}

/// One entry of an event log.
#[derive(Debug, Clone, PartialEq)]
pub enum LogEntry {
    Reproduction(ReproductionEvent),
    Mutation { time: f64, level: usize, new_type: Symbol },
}

impl LogEntry {
    pub fn time(&self) -> f64 {
        match self {
            LogEntry::Reproduction(e) => e.time,
            LogEntry::Mutation { time, .. } => *time,
        }
    }
}

/// Events of a run on `levels` levels over `[0, horizon]`, in time order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    pub levels: usize,
    pub horizon: f64,
    pub entries: Vec<LogEntry>,
}

impl EventLog {
    pub fn reproduction_events(&self) -> impl DoubleEndedIterator<Item = &ReproductionEvent> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Reproduction(r) => Some(r),
            LogEntry::Mutation { .. } => None,
        })
    }
}

/// Normalised histogram of the types at levels `1..=first_k`.
pub fn empirical_measure(state: &ParticleState, first_k: usize, alphabet_size: usize) -> Result<Vec<f64>> {
    if first_k == 0 || first_k > state.len() {
        return Err(Error::InvalidArgument(format!("first_k = {first_k} must be in 1..={}", state.len())));
    }
    let mut counts = vec![0.0; alphabet_size];
    for &t in &state.types[..first_k] {
        if t >= alphabet_size {
            return Err(Error::InvalidArgument(format!("type {t} outside an alphabet of {alphabet_size}")));
        }
        counts[t] += 1.0;
    }
    for c in counts.iter_mut() {
        *c /= first_k as f64;
    }
    Ok(counts)
}

/// Counts of each type among levels `1..=first_k`.
pub fn type_counts(types: &[Symbol], alphabet_size: usize) -> Vec<usize> {
    let mut counts = vec![0usize; alphabet_size];
    for &t in types {
        counts[t] += 1;
    }
    counts
}

/// I.i.d. types with law `dist`; level `v` uses its own counter coin, so
/// the first `l` levels do not depend on how many are drawn.
pub fn iid_initial(levels: usize, dist: &[f64], seed: u64) -> Result<Vec<Symbol>> {
    let total: f64 = dist.iter().sum();
    if dist.is_empty() || dist.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("initial law must be a probability vector".into()));
    }
    let key = stream_seed(seed, 0x1D, 0);
    Ok((1..=levels)
        .map(|v| {
            let u = unit_f64(mix64(key.wrapping_add(v as u64).wrapping_mul(0xD134_2543_DE82_EF95)));
            let mut acc = 0.0;
            for (x, p) in dist.iter().enumerate() {
                acc += p;
                if u < acc {
                    return x;
                }
            }
            dist.iter().rposition(|p| *p > 0.0).unwrap_or(0)
        })
        .collect())
}
