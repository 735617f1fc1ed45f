//! The permutation `θ` from Moran indices to lookdown levels, updated event
//! by event so that `Y_i = X_{θ(i)}` holds at all times.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::moran::apply_moran;
use super::{EventSource, LogEntry, MutationModel, ReproductionEvent, Symbol};
use crate::lookdown::LookdownSimulation;
use crate::seed::{rng_from_seed, stream_seed, SimRng};
use crate::simplex::XiSpec;
use crate::{Error, Result};

/// Combinatorial record of one event: the Moran parents `νⁱ`, the offspring
/// sets `ψⁱ` (ascending) and the permutations `σⁱ` of `{1..cⁱ+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chi {
    pub nu: Vec<usize>,
    pub psi: Vec<Vec<usize>>,
    pub sigma: Vec<Vec<usize>>,
}

impl Chi {
    /// The Moran event: family `{νⁱ} ∪ ψⁱ` with parent `νⁱ`.
    pub fn moran_event(&self, time: f64, source: EventSource) -> ReproductionEvent {
        let mut families = Vec::with_capacity(self.nu.len());
        for (nu, psi) in self.nu.iter().zip(&self.psi) {
            let mut f = psi.clone();
            f.push(*nu);
            f.sort_unstable();
            families.push(f);
        }
        ReproductionEvent { time, families, parents: self.nu.clone(), source }
    }
}

/// The current permutation (`theta[i-1]` is the level of Moran index `i`)
/// and the records of all events so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingState {
    pub theta: Vec<usize>,
    pub chi_log: Vec<Chi>,
}

fn check_permutation(theta: &[usize]) -> Result<()> {
    let n = theta.len();
    let mut seen = vec![false; n + 1];
    for &v in theta {
        if v == 0 || v > n || seen[v] {
            return Err(Error::InconsistentEvent(format!("{theta:?} is not a permutation of 1..={n}")));
        }
        seen[v] = true;
    }
    Ok(())
}

fn inverse(theta: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; theta.len() + 1];
    for (i, &v) in theta.iter().enumerate() {
        inv[v] = i + 1;
    }
    inv
}

impl CouplingState {
    pub fn new(theta: Vec<usize>) -> Result<Self> {
        check_permutation(&theta)?;
        Ok(Self { theta, chi_log: Vec::new() })
    }

    pub fn identity(n: usize) -> Self {
        Self { theta: (1..=n).collect(), chi_log: Vec::new() }
    }

    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut theta: Vec<usize> = (1..=n).collect();
        theta.shuffle(rng);
        Self { theta, chi_log: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// `θ(i)` for a 1-based Moran index.
    pub fn level_of(&self, i: usize) -> usize {
        self.theta[i - 1]
    }

    /// `θ⁻¹(v)`: the Moran index sitting at level `v`.
    pub fn index_at(&self, v: usize) -> usize {
        self.theta.iter().position(|&x| x == v).expect("theta is a permutation") + 1
    }

    /// Moves to `θ_m` for a lookdown event, drawing the split of `ψ` and the
    /// `σⁱ` from `rng`. Returns the corresponding Moran event.
    pub fn advance<R: Rng + ?Sized>(&mut self, event: &ReproductionEvent, rng: &mut R) -> Result<ReproductionEvent> {
        let n = self.n();
        if event.max_level() > n {
            return Err(Error::InconsistentEvent(format!("event uses level {} beyond N = {n}", event.max_level())));
        }
        let mut psi = offspring_indices(&self.theta, &event.families)?;
        psi.shuffle(rng);
        let mut split = Vec::with_capacity(event.families.len());
        let mut sigma = Vec::with_capacity(event.families.len());
        let mut at = 0;
        for fam in &event.families {
            let c = fam.len() - 1;
            let mut part = psi[at..at + c].to_vec();
            part.sort_unstable();
            split.push(part);
            at += c;
            let mut s: Vec<usize> = (1..=c + 1).collect();
            s.shuffle(rng);
            sigma.push(s);
        }
        let theta = assemble_theta(&self.theta, &event.families, &split, &sigma)?;
        let inv = inverse(&self.theta);
        let nu: Vec<usize> = event.families.iter().map(|f| inv[f[0]]).collect();
        let chi = Chi { nu, psi: split, sigma };
        let moran = chi.moran_event(event.time, event.source.clone());
        self.theta = theta;
        self.chi_log.push(chi);
        Ok(moran)
    }
}

/// `ψ = θ⁻¹(Δ)` where `Δ` holds the highest `c = Σ cⁱ` levels outside the
/// parental levels, ascending.
fn offspring_indices(theta: &[usize], families: &[Vec<usize>]) -> Result<Vec<usize>> {
    let n = theta.len();
    let mut is_parent = vec![false; n + 1];
    let mut c = 0;
    for f in families {
        if f.is_empty() || f[f.len() - 1] > n {
            return Err(Error::InconsistentEvent("family outside 1..=N".into()));
        }
        is_parent[f[0]] = true;
        c += f.len() - 1;
    }
    let free: Vec<usize> = (1..=n).filter(|&v| !is_parent[v]).collect();
    if c > free.len() {
        return Err(Error::InconsistentEvent(format!("{c} offspring do not fit into {} free levels", free.len())));
    }
    let inv = inverse(theta);
    let mut psi: Vec<usize> = free[free.len() - c..].iter().map(|&v| inv[v]).collect();
    psi.sort_unstable();
    Ok(psi)
}

/// `θ_m` from `θ_{m−1}`, the families `φⁱ` (sorted, parent first), the split
/// `ψⁱ` and permutations `σⁱ`:
///
/// * `θ_m(νⁱ) = φⁱ(σⁱ(1))` and `θ_m(ψⁱ(j)) = φⁱ(σⁱ(j+1))`, sets indexed in
///   ascending order;
/// * all other indices are sent onto the levels outside the families,
///   keeping their order under `θ_{m−1}`.
pub fn assemble_theta(prev: &[usize], families: &[Vec<usize>], split: &[Vec<usize>], sigma: &[Vec<usize>]) -> Result<Vec<usize>> {
    check_permutation(prev)?;
    let n = prev.len();
    if split.len() != families.len() || sigma.len() != families.len() {
        return Err(Error::LengthMismatch { expected: families.len(), got: split.len().min(sigma.len()) });
    }
    let mut expected = offspring_indices(prev, families)?;
    let mut given: Vec<usize> = split.iter().flatten().copied().collect();
    given.sort_unstable();
    expected.sort_unstable();
    if given != expected {
        return Err(Error::InconsistentEvent(format!("split {split:?} is not a partition of ψ = {expected:?}")));
    }
    let inv = inverse(prev);
    let mut theta = vec![0usize; n];
    let mut used_index = vec![false; n + 1];
    let mut used_level = vec![false; n + 1];
    for ((fam, part), s) in families.iter().zip(split).zip(sigma) {
        if part.len() + 1 != fam.len() {
            return Err(Error::InconsistentEvent(format!("family {fam:?} needs {} offspring, got {part:?}", fam.len() - 1)));
        }
        let mut check: Vec<usize> = s.clone();
        check.sort_unstable();
        if check != (1..=fam.len()).collect::<Vec<_>>() {
            return Err(Error::InconsistentEvent(format!("{s:?} is not a permutation of 1..={}", fam.len())));
        }
        let mut psi = part.clone();
        psi.sort_unstable();
        let nu = inv[fam[0]];
        theta[nu - 1] = fam[s[0] - 1];
        used_index[nu] = true;
        for (j, &idx) in psi.iter().enumerate() {
            theta[idx - 1] = fam[s[j + 1] - 1];
            used_index[idx] = true;
        }
        for &v in fam {
            used_level[v] = true;
        }
    }
    let mut rest: Vec<usize> = (1..=n).filter(|&i| !used_index[i]).collect();
    rest.sort_unstable_by_key(|&i| prev[i - 1]);
    let targets = (1..=n).filter(|&v| !used_level[v]);
    for (i, v) in rest.into_iter().zip(targets) {
        theta[i - 1] = v;
    }
    check_permutation(&theta)?;
    Ok(theta)
}

/// Functional form of [`CouplingState::advance`].
pub fn advance_coupling<R: Rng + ?Sized>(c: &CouplingState, event: &ReproductionEvent, rng: &mut R) -> Result<CouplingState> {
    let mut next = c.clone();
    next.advance(event, rng)?;
    Ok(next)
}

/// Lookdown and Moran paths driven by one lookdown run and the coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    /// `times[0] = 0`, then every event time.
    pub times: Vec<f64>,
    pub lookdown: Vec<Vec<Symbol>>,
    pub moran: Vec<Vec<Symbol>>,
    pub thetas: Vec<Vec<usize>>,
    pub coupling: CouplingState,
    pub log: Vec<LogEntry>,
    pub moran_log: Vec<LogEntry>,
}

impl CoupledRun {
    /// `Y_i = X_{θ(i)}` at every recorded time.
    pub fn identity_holds(&self) -> bool {
        self.moran
            .iter()
            .zip(&self.lookdown)
            .zip(&self.thetas)
            .all(|((y, x), theta)| y.iter().zip(theta).all(|(yi, &v)| *yi == x[v - 1]))
    }

    /// The two type vectors agree as multisets at every recorded time.
    pub fn empirical_measures_agree(&self) -> bool {
        self.moran.iter().zip(&self.lookdown).all(|(y, x)| {
            let mut a = y.clone();
            let mut b = x.clone();
            a.sort_unstable();
            b.sort_unstable();
            a == b
        })
    }
}

/// Runs the lookdown model on `initial.len()` levels with seed `seed`,
/// draws `θ₀` uniformly from an independent stream and derives the Moran
/// model through the coupling. `Y(0) = X(0) ∘ θ₀`.
pub fn run_coupled(xi: &XiSpec, mutation: &MutationModel, initial: Vec<Symbol>, horizon: f64, seed: u64) -> Result<CoupledRun> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidArgument("horizon must be >= 0".into()));
    }
    let mut coupling_rng: SimRng = rng_from_seed(stream_seed(seed, 0xC0, 0));
    let n = initial.len();
    let mut coupling = CouplingState::uniform(n, &mut coupling_rng);
    let mut sim = LookdownSimulation::new(xi, mutation, initial, seed)?;
    let x0 = sim.state().types.clone();
    let mut y: Vec<Symbol> = coupling.theta.iter().map(|&v| x0[v - 1]).collect();
    let mut run = CoupledRun {
        times: vec![0.0],
        lookdown: vec![x0],
        moran: vec![y.clone()],
        thetas: vec![coupling.theta.clone()],
        coupling: coupling.clone(),
        log: Vec::new(),
        moran_log: Vec::new(),
    };
    while let Some(entry) = sim.step(horizon) {
        match &entry {
            LogEntry::Reproduction(ev) => {
                let moran = coupling.advance(ev, &mut coupling_rng)?;
                apply_moran(&mut y, &moran);
                run.moran_log.push(LogEntry::Reproduction(moran));
            }
            LogEntry::Mutation { time, level, new_type } => {
                let i = coupling.index_at(*level);
                y[i - 1] = *new_type;
                run.moran_log.push(LogEntry::Mutation { time: *time, level: i, new_type: *new_type });
            }
        }
        run.times.push(entry.time());
        run.lookdown.push(sim.state().types.clone());
        run.moran.push(y.clone());
        run.thetas.push(coupling.theta.clone());
        run.log.push(entry);
    }
    run.coupling = coupling;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lookdown::iid_initial;
    use crate::seed::rng_from_seed;

    /// A `θ_{m−1}` consistent with `4 → 3`, `1 → 2`,
    /// `{3,5,7} → {6,7,8}`; the remaining indices `{2,6,8}` get `{1,4,5}`.
    fn example_prev() -> Vec<usize> {
        // index:   1  2  3  4  5  6  7  8
        alloc::vec![2, 1, 6, 3, 7, 4, 8, 5]
    }

    #[test]
    fn worked_permutation_example() {
        let families = alloc::vec![alloc::vec![2, 5], alloc::vec![3, 6, 8]];
        let split = alloc::vec![alloc::vec![5], alloc::vec![3, 7]];
        let sigma = alloc::vec![alloc::vec![2, 1], alloc::vec![3, 1, 2]];
        let theta = assemble_theta(&example_prev(), &families, &split, &sigma).unwrap();
        assert_eq!(theta[4 - 1], 8);
        assert_eq!(theta[1 - 1], 5);
        assert_eq!(theta[3 - 1], 3);
        assert_eq!(theta[7 - 1], 6);
        assert_eq!(theta[5 - 1], 2);
        // {2,6,8} onto {1,4,7} in the order of θ_{m−1}
        assert_eq!((theta[1], theta[5], theta[7]), (1, 4, 7));
    }

    #[test]
    fn trivial_event_keeps_theta() {
        let prev = alloc::vec![3, 1, 4, 2];
        let families = alloc::vec![alloc::vec![2]];
        let theta = assemble_theta(&prev, &families, &[alloc::vec![]], &[alloc::vec![1]]).unwrap();
        assert_eq!(theta, prev);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let prev = example_prev();
        let families = alloc::vec![alloc::vec![2, 5], alloc::vec![3, 6, 8]];
        let sigma = alloc::vec![alloc::vec![2, 1], alloc::vec![3, 1, 2]];
        assert!(assemble_theta(&prev, &families, &[alloc::vec![3, 7], alloc::vec![5]], &sigma).is_err());
        assert!(assemble_theta(&prev, &families, &[alloc::vec![5], alloc::vec![3, 6]], &sigma).is_err());
        let mut c = CouplingState::identity(3);
        let ev = ReproductionEvent::kingman(0.0, 2, 5);
        assert!(c.advance(&ev, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn coupling_identity_on_random_runs() {
        let xi = XiSpec::finite_atoms(0.5, alloc::vec![(0.3, alloc::vec![0.4, 0.3]), (0.2, alloc::vec![0.8])]).unwrap();
        let m = MutationModel::uniform_flip(0.4, 3).unwrap();
        for seed in 0..30 {
            let init = iid_initial(15, &[0.5, 0.3, 0.2], seed).unwrap();
            let run = run_coupled(&xi, &m, init, 3.0, seed).unwrap();
            assert!(run.times.len() > 1);
            assert!(run.identity_holds());
            assert!(run.empirical_measures_agree());
        }
    }

    #[test]
    fn no_events_keep_everything_constant() {
        let xi = XiSpec::kingman(0.0).unwrap();
        let run = run_coupled(&xi, &MutationModel::none(2), alloc::vec![0, 1, 1], 4.0, 3).unwrap();
        assert_eq!(run.times, alloc::vec![0.0]);
        assert_eq!(run.coupling.theta, run.thetas[0]);
        assert!(run.identity_holds());
    }
}
