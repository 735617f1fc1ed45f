//! Generators of the measure-valued process on a finite type space, the
//! two-type frequency process, the function-valued dual and Monte Carlo
//! checks of the duality identities.
//!
//! Sampling functionals `⟨f, Z^{⊗n}⟩` of a lookdown state are estimated by
//! the U-statistic over the first `l` levels (sampling without
//! replacement). By exchangeability its expectation equals the expectation
//! of `f(X_1,…,X_n)`, so it carries no finite-`l` bias.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::coalescent::JumpChainSampler;
use crate::combinatorics::{enumerate_partitions, relabel, Partition};
use crate::lookdown::{iid_initial, type_counts, LookdownSimulation, MutationModel, Symbol};
use crate::matrix::SquareMatrix;
use crate::rates::{RateMethod, RateTable, ENUMERATION_GUARD};
use crate::seed::{derive_seed, rng_from_seed, stream_seed, ReplicateRunner, SimRng};
use crate::simplex::{XiBody, XiSpec, ZetaSampler};
use crate::stats::{DualityReport, Estimate, MeanVar};
use crate::{Error, Result};

/// Largest arity of a [`MomentFunction`].
pub const MAX_ARITY: usize = 6;

/// Fewest paths per side accepted by [`moment_duality_check`].
pub const MIN_DUALITY_PATHS: usize = 10_000;

/// Euler-Maruyama step for the diffusive part of the frequency process.
pub const EULER_STEP: f64 = 1e-3;

const TAG_LEFT: u64 = 0xD1;
const TAG_RIGHT: u64 = 0xD2;

/// A function `f(x₁,…,x_n)` on `Eⁿ`, `E = {0,…,k−1}`, stored as a full
/// table with `x₁` as the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunction {
    n: usize,
    alphabet: usize,
    values: Vec<f64>,
}

fn table_len(n: usize, k: usize) -> usize {
    k.pow(n as u32)
}

fn decode(mut idx: usize, n: usize, k: usize, out: &mut [Symbol]) {
    for i in (0..n).rev() {
        out[i] = idx % k;
        idx /= k;
    }
}

fn encode(x: &[Symbol], k: usize) -> usize {
    x.iter().fold(0, |acc, &s| acc * k + s)
}

fn check_measure(mu: &[f64], k: usize) -> Result<()> {
    if mu.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: mu.len() });
    }
    let total: f64 = mu.iter().sum();
    if mu.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("{mu:?} is not a probability vector")));
    }
    Ok(())
}

impl MomentFunction {
    pub fn new(n: usize, alphabet: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("arity must be at least 1".into()));
        }
        if n > MAX_ARITY {
            return Err(Error::TooLarge { what: "arity", value: n, max: MAX_ARITY });
        }
        if alphabet == 0 {
            return Err(Error::InvalidArgument("alphabet must have at least one symbol".into()));
        }
        let len = table_len(n, alphabet);
        if values.len() != len {
            return Err(Error::LengthMismatch { expected: len, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("table entries must be finite".into()));
        }
        Ok(Self { n, alphabet, values })
    }

    /// Tabulates `f` over `Eⁿ`.
    pub fn from_fn<F: FnMut(&[Symbol]) -> f64>(n: usize, alphabet: usize, mut f: F) -> Result<Self> {
        if n == 0 || n > MAX_ARITY || alphabet == 0 {
            return Self::new(n, alphabet, Vec::new());
        }
        let mut x = vec![0; n];
        let values = (0..table_len(n, alphabet))
            .map(|idx| {
                decode(idx, n, alphabet, &mut x);
                f(&x)
            })
            .collect();
        Self::new(n, alphabet, values)
    }

    pub fn constant(n: usize, alphabet: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, alphabet, |_| c)
    }

    /// `∏ᵢ 1{xᵢ = y}`, so that `G_f(μ) = μ(y)ⁿ`.
    pub fn indicator_product(n: usize, alphabet: usize, y: Symbol) -> Result<Self> {
        Self::from_fn(n, alphabet, |x| if x.iter().all(|&s| s == y) { 1.0 } else { 0.0 })
    }

    /// `1{x₁ = … = x_n}`.
    pub fn all_equal(n: usize, alphabet: usize) -> Result<Self> {
        Self::from_fn(n, alphabet, |x| if x.iter().all(|&s| s == x[0]) { 1.0 } else { 0.0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, x: &[Symbol]) -> f64 {
        self.values[encode(x, self.alphabet)]
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `G_f(μ) = ∫ f dμ^{⊗n}`.
    pub fn integrate(&self, mu: &[f64]) -> Result<f64> {
        check_measure(mu, self.alphabet)?;
        Ok(self.integrate_unchecked(mu))
    }

    fn integrate_unchecked(&self, mu: &[f64]) -> f64 {
        let k = self.alphabet;
        let mut v = self.values.clone();
        while v.len() > 1 {
            v = v.chunks_exact(k).map(|c| c.iter().zip(mu).map(|(a, p)| a * p).sum()).collect();
        }
        v[0]
    }

    /// `x ↦ f(x[π])`, same arity.
    pub fn relabel(&self, pi: &Partition) -> Result<Self> {
        if pi.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: pi.n() });
        }
        Self::from_fn(self.n, self.alphabet, |x| self.value(&relabel(x, pi).expect("lengths match")))
    }

    /// The function of one variable per block of `π`: `h(y) = f(x)` with
    /// `xᵢ = y_b` for `i` in the `b`-th block. `∫ h dμ^{⊗p} = ∫ f(x[π]) dμ^{⊗n}`.
    pub fn contract(&self, pi: &Partition) -> Result<Self> {
        if pi.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: pi.n() });
        }
        let labels = pi.labels();
        let mut x = vec![0; self.n];
        Self::from_fn(pi.num_blocks(), self.alphabet, |y| {
            for (xi, &b) in x.iter_mut().zip(&labels) {
                *xi = y[b];
            }
            self.value(&x)
        })
    }

    /// Applies `m` to coordinate `axis` (0-based):
    /// `g(x) = Σ_y m(x_axis, y) f(x with x_axis = y)`.
    fn apply_on_axis(&self, axis: usize, m: &SquareMatrix) -> Vec<f64> {
        let k = self.alphabet;
        let stride = table_len(self.n - 1 - axis, k);
        let mut out = vec![0.0; self.values.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let digit = (idx / stride) % k;
            let base = idx - digit * stride;
            *o = (0..k).map(|y| m.get(digit, y) * self.values[base + y * stride]).sum();
        }
        out
    }

    /// `m^{⊗n} f`, one coordinate at a time.
    pub fn apply_kernel(&self, m: &SquareMatrix) -> Result<Self> {
        if m.dim() != self.alphabet {
            return Err(Error::LengthMismatch { expected: self.alphabet, got: m.dim() });
        }
        let mut g = self.clone();
        for axis in 0..self.n {
            g.values = g.apply_on_axis(axis, m);
        }
        Ok(g)
    }

    /// `Σᵢ Bᵢ f`, with `B` acting on coordinate `i`.
    pub fn mutation_term(&self, mutation: &MutationModel) -> Result<Self> {
        if mutation.alphabet_size() != self.alphabet {
            return Err(Error::LengthMismatch { expected: self.alphabet, got: mutation.alphabet_size() });
        }
        let b = mutation.generator();
        let mut values = vec![0.0; self.values.len()];
        for axis in 0..self.n {
            for (acc, v) in values.iter_mut().zip(self.apply_on_axis(axis, &b)) {
                *acc += v;
            }
        }
        Self::new(self.n, self.alphabet, values)
    }

    /// Unbiased estimate of `∫ f dZ^{⊗n}` from the type counts of `l ≥ n`
    /// exchangeable particles: `Σ_x f(x) ∏_y (c_y)_{m_y(x)} / (l)_n`.
    pub fn u_statistic(&self, counts: &[usize]) -> Result<f64> {
        if counts.len() != self.alphabet {
            return Err(Error::LengthMismatch { expected: self.alphabet, got: counts.len() });
        }
        let l: usize = counts.iter().sum();
        if l < self.n {
            return Err(Error::InvalidArgument(format!("{l} particles cannot carry a sample of {}", self.n)));
        }
        let k = self.alphabet;
        let mut x = vec![0; self.n];
        let mut used = vec![0usize; k];
        let mut total = 0.0;
        for (idx, &f) in self.values.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            decode(idx, self.n, k, &mut x);
            used.iter_mut().for_each(|u| *u = 0);
            let mut w = 1.0;
            for &s in &x {
                w *= counts[s].saturating_sub(used[s]) as f64;
                used[s] += 1;
            }
            total += f * w;
        }
        let denom: f64 = (0..self.n).map(|i| (l - i) as f64).product();
        Ok(total / denom)
    }
}

/// Optional parts of the generator beyond `L^{Ξ₀}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GeneratorTerms {
    /// Add the pair term `a Σ_{i<j} ∫ (f∘Φ_{ij} − f) dμ^{⊗n}`.
    pub kingman: bool,
    /// Add `Σᵢ ∫ Bᵢ f dμ^{⊗n}`.
    pub mutation: Option<MutationModel>,
}

impl GeneratorTerms {
    /// Only the multiple-merger part.
    pub fn multiple_mergers() -> Self {
        Self::default()
    }

    /// The full generator, with mutation if given.
    pub fn full(mutation: Option<MutationModel>) -> Self {
        Self { kingman: true, mutation }
    }
}

fn is_pair(pi: &Partition) -> bool {
    pi.num_blocks() + 1 == pi.n()
}

/// `(Lf)(x) = Σ_π λ_π (f(x[π]) − f(x)) [+ Σᵢ Bᵢ f(x)]`, summed over the
/// partitions of `{1..n}` other than singletons. `λ_π` is the collision
/// rate of the block sizes of `π`; the Kingman share of pair partitions is
/// dropped unless `terms.kingman` is set. `∫ Lf dμ^{⊗n}` is the generator
/// applied to `G_f` at `μ`.
pub fn generator_table(xi: &XiSpec, f: &MomentFunction, terms: &GeneratorTerms) -> Result<MomentFunction> {
    let table = RateTable::with_method(xi.clone(), RateMethod::Auto);
    let a = xi.kingman_mass();
    let mut values = vec![0.0; f.values.len()];
    for pi in enumerate_partitions(f.n)? {
        if pi.is_singletons() {
            continue;
        }
        let mut rate = table.lambda(&pi.block_sizes())?;
        if is_pair(&pi) && !terms.kingman {
            rate -= a;
        }
        if rate == 0.0 {
            continue;
        }
        let g = f.relabel(&pi)?;
        for ((acc, gv), fv) in values.iter_mut().zip(&g.values).zip(&f.values) {
            *acc += rate * (gv - fv);
        }
    }
    if let Some(m) = &terms.mutation {
        for (acc, v) in values.iter_mut().zip(f.mutation_term(m)?.values) {
            *acc += v;
        }
    }
    MomentFunction::new(f.n, f.alphabet, values)
}

/// The generator at `μ` as a sum over partitions with collision rates.
/// Works for every `Ξ`.
pub fn generator_partition_form(xi: &XiSpec, f: &MomentFunction, mu: &[f64], terms: &GeneratorTerms) -> Result<f64> {
    check_measure(mu, f.alphabet)?;
    generator_table(xi, f, terms)?.integrate(mu)
}

/// The generator at `μ` from its integral form: for each atom `ζ` with `m`
/// nonzero masses, the average of `G_f((1−|ζ|)μ + Σζᵢδ_{xᵢ}) − G_f(μ)` over
/// `x ~ μ^{⊗m}`, weighted by `w/(ζ,ζ)`. Needs finitely many atoms.
pub fn generator_integral_form(xi: &XiSpec, f: &MomentFunction, mu: &[f64], terms: &GeneratorTerms) -> Result<f64> {
    check_measure(mu, f.alphabet)?;
    let atoms = match xi.body() {
        XiBody::FiniteAtoms(atoms) => atoms,
        XiBody::PoissonDirichlet { .. } => return Err(Error::RequiresFiniteAtoms),
    };
    let k = f.alphabet;
    let base = f.integrate_unchecked(mu);
    let mut total = 0.0;
    for atom in atoms {
        let zeta: Vec<f64> = atom.point.masses().iter().copied().filter(|z| *z > 0.0).collect();
        if zeta.is_empty() {
            continue;
        }
        let m = zeta.len();
        let terms_needed = (k as u128).saturating_pow(m as u32).saturating_mul((k as u128).pow(f.n as u32));
        if terms_needed > ENUMERATION_GUARD as u128 {
            return Err(Error::EnumerationGuard { terms: terms_needed, guard: ENUMERATION_GUARD as u128 });
        }
        let dust = 1.0 - zeta.iter().sum::<f64>();
        let mut x = vec![0; m];
        let mut nu = vec![0.0; k];
        let mut acc = 0.0;
        for idx in 0..table_len(m, k) {
            decode(idx, m, k, &mut x);
            let w: f64 = x.iter().map(|&s| mu[s]).product();
            if w == 0.0 {
                continue;
            }
            for (n, p) in nu.iter_mut().zip(mu) {
                *n = dust * p;
            }
            for (&s, z) in x.iter().zip(&zeta) {
                nu[s] += z;
            }
            acc += w * (f.integrate_unchecked(&nu) - base);
        }
        total += atom.weight / atom.point.sq_norm() * acc;
    }
    if terms.kingman && xi.kingman_mass() > 0.0 {
        let mut pair_sum = 0.0;
        for i in 1..=f.n {
            for j in i + 1..=f.n {
                let mut blocks: Vec<Vec<usize>> = (1..=f.n).filter(|&e| e != i && e != j).map(|e| vec![e]).collect();
                blocks.push(vec![i, j]);
                let pi = Partition::from_blocks(f.n, blocks)?;
                pair_sum += f.relabel(&pi)?.integrate_unchecked(mu) - base;
            }
        }
        total += xi.kingman_mass() * pair_sum;
    }
    if let Some(mutation) = &terms.mutation {
        total += f.mutation_term(mutation)?.integrate_unchecked(mu);
    }
    Ok(total)
}

/// A path of the two-type frequency process: `values[i]` holds from
/// `times[i]` on. Jumps and Euler steps are recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct WfPath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl WfPath {
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|s| *s <= t).max(1) - 1;
        self.values[idx]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }

    /// Time the path first sits at 0 or 1, if it does.
    pub fn absorption_time(&self) -> Option<f64> {
        self.values.iter().position(|&x| x == 0.0 || x == 1.0).map(|i| self.times[i])
    }
}

/// Simulator of `Y_t`, the frequency of type 1 in a two-type population.
#[derive(Debug, Clone)]
pub struct WfSimulator {
    sampler: Option<ZetaSampler>,
    kingman_mass: f64,
}

impl WfSimulator {
    pub fn new(xi: &XiSpec) -> Result<Self> {
        let sampler = if xi.has_no_events() { None } else { Some(ZetaSampler::new(xi)?) };
        Ok(Self { sampler, kingman_mass: xi.kingman_mass() })
    }

    fn next_wait(&self, rng: &mut SimRng) -> f64 {
        match &self.sampler {
            Some(s) if s.rate() > 0.0 => {
                let e: f64 = rng.sample(Exp1);
                e / s.rate()
            }
            _ => f64::INFINITY,
        }
    }

    fn run<F: FnMut(f64, f64)>(&self, y0: f64, horizon: f64, rng: &mut SimRng, mut record: F) -> Result<f64> {
        if !(0.0..=1.0).contains(&y0) {
            return Err(Error::InvalidArgument(format!("y0 = {y0} must lie in [0, 1]")));
        }
        if !(horizon >= 0.0) {
            return Err(Error::InvalidArgument("horizon must be >= 0".into()));
        }
        let a = self.kingman_mass;
        let mut x = y0;
        let mut t = 0.0;
        let mut next_jump = self.next_wait(rng);
        while x > 0.0 && x < 1.0 && t < horizon {
            let target = next_jump.min(horizon);
            if a > 0.0 {
                while t < target && x > 0.0 && x < 1.0 {
                    let dt = if target - t <= EULER_STEP { target - t } else { EULER_STEP };
                    let z: f64 = rng.sample(StandardNormal);
                    x += (a * x * (1.0 - x) * dt).sqrt() * z;
                    x = x.clamp(0.0, 1.0);
                    t = if dt == target - t { target } else { t + dt };
                    record(t, x);
                }
                if !(x > 0.0 && x < 1.0) {
                    break;
                }
            } else {
                t = target;
            }
            if next_jump > horizon {
                break;
            }
            let zeta = self.sampler.as_ref().expect("a jump was scheduled").sample(rng);
            let mut next = (1.0 - zeta.total()) * x;
            for z in zeta.masses() {
                if rng.random::<f64>() < x {
                    next += z;
                }
            }
            x = next.clamp(0.0, 1.0);
            record(t, x);
            next_jump += self.next_wait(rng);
        }
        Ok(x)
    }

    /// `Y_horizon` started from `y0`.
    pub fn endpoint(&self, y0: f64, horizon: f64, rng: &mut SimRng) -> Result<f64> {
        self.run(y0, horizon, rng, |_, _| {})
    }

    pub fn path(&self, y0: f64, horizon: f64, rng: &mut SimRng) -> Result<WfPath> {
        let mut path = WfPath { times: vec![0.0], values: vec![y0] };
        self.run(y0, horizon, rng, |t, x| {
            path.times.push(t);
            path.values.push(x);
        })?;
        Ok(path)
    }
}

/// One path of the frequency process on `[0, horizon]`. Jumps follow the
/// reproduction events (type-1 marks are Bernoulli(`x`) per family); the
/// Kingman part is integrated with step [`EULER_STEP`]. 0 and 1 absorb.
pub fn simulate_wf_jump(xi: &XiSpec, y0: f64, horizon: f64, seed: u64) -> Result<WfPath> {
    WfSimulator::new(xi)?.path(y0, horizon, &mut rng_from_seed(seed))
}

fn side_seed(seed: u64, tag: u64, replicate: usize) -> u64 {
    derive_seed(stream_seed(seed, tag, 0), replicate as u64)
}

fn estimate(values: impl IntoIterator<Item = f64>) -> Estimate {
    let mv: MeanVar = values.into_iter().collect();
    Estimate::from(&mv)
}

fn collect_results(results: Vec<Result<f64>>) -> Result<Estimate> {
    let values = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(estimate(values))
}

/// `E[Y_tⁿ]` from frequency paths started at `y0` against `E[y0^{D_t}]`
/// from block counts of coalescent paths started with `n` blocks.
pub fn moment_duality_check<R: ReplicateRunner>(
    xi: &XiSpec,
    n: usize,
    y0: f64,
    t: f64,
    paths: usize,
    seed: u64,
    runner: &R,
) -> Result<DualityReport> {
    if n == 0 || n > 8 {
        return Err(Error::InvalidArgument(format!("n = {n} must be in 1..=8")));
    }
    if paths < MIN_DUALITY_PATHS {
        return Err(Error::InvalidArgument(format!("at least {MIN_DUALITY_PATHS} paths are required, got {paths}")));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be > 0".into()));
    }
    let wf = WfSimulator::new(xi)?;
    let left = runner.run(paths, |i| {
        let mut rng = rng_from_seed(side_seed(seed, TAG_LEFT, i));
        wf.endpoint(y0, t, &mut rng).map(|y| y.powi(n as i32))
    });
    let sampler = JumpChainSampler::new(xi, n)?;
    let right = runner.run(paths, |i| {
        sampler.sample(t, side_seed(seed, TAG_RIGHT, i)).map(|p| y0.powi(p.current().num_blocks() as i32))
    });
    Ok(DualityReport::new(collect_results(left)?, collect_results(right)?))
}

/// The function-valued dual at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFunctionState {
    pub time: f64,
    pub rho: MomentFunction,
}

/// `states[0]` is the start; each later entry is the state just after a
/// jump. `final_state` is the state at the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDualPath {
    pub states: Vec<DualFunctionState>,
    pub final_state: DualFunctionState,
}

/// Simulator of the function-valued dual: `ρ` jumps to `x ↦ ρ(x[π])` at
/// the collision rate of `π` (which contains the Kingman mass for pair
/// partitions) and follows the mutation semigroup coordinatewise between
/// jumps.
#[derive(Debug, Clone)]
pub struct FunctionDualSampler {
    chain: JumpChainSampler,
    mutation: MutationModel,
}

impl FunctionDualSampler {
    pub fn new(xi: &XiSpec, mutation: &MutationModel, max_arity: usize) -> Result<Self> {
        if max_arity == 0 || max_arity > MAX_ARITY {
            return Err(Error::TooLarge { what: "arity", value: max_arity, max: MAX_ARITY });
        }
        Ok(Self { chain: JumpChainSampler::new(xi, max_arity)?, mutation: mutation.clone() })
    }

    fn flow(&self, rho: MomentFunction, duration: f64) -> Result<MomentFunction> {
        if self.mutation.rate() == 0.0 || duration <= 0.0 {
            return Ok(rho);
        }
        let p = self.mutation.generator().scale(duration).expm(1e-10)?;
        rho.apply_kernel(&p)
    }

    pub fn sample(&self, f0: &MomentFunction, horizon: f64, seed: u64) -> Result<FunctionDualPath> {
        if f0.n > self.chain.n() {
            return Err(Error::TooLarge { what: "arity", value: f0.n, max: self.chain.n() });
        }
        if f0.alphabet != self.mutation.alphabet_size() {
            return Err(Error::LengthMismatch { expected: self.mutation.alphabet_size(), got: f0.alphabet });
        }
        if !(horizon >= 0.0) {
            return Err(Error::InvalidArgument("horizon must be >= 0".into()));
        }
        let mut rng = rng_from_seed(seed);
        let mut rho = f0.clone();
        let mut t = 0.0;
        let mut states = vec![DualFunctionState { time: 0.0, rho: rho.clone() }];
        loop {
            let rate = self.chain.total_rate(rho.n);
            let wait = if rate > 0.0 {
                let e: f64 = rng.sample(Exp1);
                e / rate
            } else {
                f64::INFINITY
            };
            if t + wait > horizon {
                rho = self.flow(rho, horizon - t)?;
                break;
            }
            rho = self.flow(rho, wait)?;
            t += wait;
            let pi = self.chain.sample_grouping(rho.n, &mut rng).expect("rate is positive");
            rho = rho.contract(&pi)?;
            states.push(DualFunctionState { time: t, rho: rho.clone() });
        }
        Ok(FunctionDualPath { states, final_state: DualFunctionState { time: horizon, rho } })
    }
}

pub fn simulate_function_dual(
    xi: &XiSpec,
    mutation: &MutationModel,
    f0: &MomentFunction,
    horizon: f64,
    seed: u64,
) -> Result<FunctionDualPath> {
    FunctionDualSampler::new(xi, mutation, f0.n)?.sample(f0, horizon, seed)
}

/// U-statistic of `f` over the lookdown levels at time `t`, started from
/// i.i.d. `μ` types.
fn lookdown_u_statistic(
    xi: &XiSpec,
    mutation: &MutationModel,
    fs: &[&MomentFunction],
    times: &[f64],
    mu: &[f64],
    levels: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let initial = iid_initial(levels, mu, stream_seed(seed, 0x1A, 0))?;
    let mut sim = LookdownSimulation::new(xi, mutation, initial, seed)?;
    let mut out = Vec::with_capacity(fs.len());
    for (f, &t) in fs.iter().zip(times) {
        sim.skip_to(t);
        out.push(f.u_statistic(&type_counts(&sim.state().types, mu.len()))?);
    }
    Ok(out)
}

fn check_levels(levels: usize, n: usize) -> Result<()> {
    if levels < n {
        return Err(Error::InvalidArgument(format!("{levels} levels cannot carry a sample of {n}")));
    }
    Ok(())
}

/// `E⟨ρ₀, Z_t^{⊗n}⟩` from the lookdown model with `levels` levels against
/// `E⟨ρ_t, μ^{⊗n}⟩` from the function-valued dual, `Z₀ = μ`.
#[allow(clippy::too_many_arguments)]
pub fn function_duality_check<R: ReplicateRunner>(
    xi: &XiSpec,
    mutation: &MutationModel,
    f0: &MomentFunction,
    mu: &[f64],
    t: f64,
    levels: usize,
    paths: usize,
    seed: u64,
    runner: &R,
) -> Result<DualityReport> {
    check_measure(mu, f0.alphabet)?;
    check_levels(levels, f0.n)?;
    let left = runner.run(paths, |i| {
        lookdown_u_statistic(xi, mutation, &[f0], &[t], mu, levels, side_seed(seed, TAG_LEFT, i)).map(|v| v[0])
    });
    let dual = FunctionDualSampler::new(xi, mutation, f0.n)?;
    let right = runner.run(paths, |i| {
        dual.sample(f0, t, side_seed(seed, TAG_RIGHT, i)).and_then(|p| p.final_state.rho.integrate(mu))
    });
    Ok(DualityReport::new(collect_results(left)?, collect_results(right)?))
}

/// `E^μ ∫ f(x[π₀]) Z_t^{⊗n}` from the lookdown model (no mutation) against
/// `E^{π₀} ∫ f(x[Π_t]) μ^{⊗n}` from the coalescent started at `π₀`. At
/// `t = 0` both sides are the exact value with zero error.
#[allow(clippy::too_many_arguments)]
pub fn distributional_duality_check<R: ReplicateRunner>(
    xi: &XiSpec,
    f: &MomentFunction,
    pi0: &Partition,
    mu: &[f64],
    t: f64,
    levels: usize,
    paths: usize,
    seed: u64,
    runner: &R,
) -> Result<DualityReport> {
    if f.n > 5 {
        return Err(Error::TooLarge { what: "arity", value: f.n, max: 5 });
    }
    check_measure(mu, f.alphabet)?;
    check_levels(levels, f.n)?;
    let g = f.relabel(pi0)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument("t must be >= 0".into()));
    }
    if t == 0.0 {
        let exact = Estimate { value: g.integrate(mu)?, stderr: 0.0 };
        return Ok(DualityReport::new(exact, exact));
    }
    let none = MutationModel::none(f.alphabet);
    let left = runner.run(paths, |i| {
        lookdown_u_statistic(xi, &none, &[&g], &[t], mu, levels, side_seed(seed, TAG_LEFT, i)).map(|v| v[0])
    });
    let sampler = JumpChainSampler::new(xi, f.n)?;
    let right = runner.run(paths, |i| {
        let path = sampler.sample_from(pi0.clone(), t, side_seed(seed, TAG_RIGHT, i))?;
        f.relabel(path.current())?.integrate(mu)
    });
    Ok(DualityReport::new(collect_results(left)?, collect_results(right)?))
}

/// `(E G_f(Z_{t+h}) − E G_f(Z_t))/h` against `E LG_f(Z_t)`, both from
/// lookdown runs started at i.i.d. `μ` types but with independent seeds.
#[allow(clippy::too_many_arguments)]
pub fn generator_martingale_check<R: ReplicateRunner>(
    xi: &XiSpec,
    mutation: &MutationModel,
    f: &MomentFunction,
    mu: &[f64],
    t: f64,
    h: f64,
    levels: usize,
    paths: usize,
    seed: u64,
    runner: &R,
) -> Result<DualityReport> {
    check_measure(mu, f.alphabet)?;
    check_levels(levels, f.n)?;
    if !(t >= 0.0 && h > 0.0) {
        return Err(Error::InvalidArgument("need t >= 0 and h > 0".into()));
    }
    let terms = GeneratorTerms::full((mutation.rate() > 0.0).then(|| mutation.clone()));
    let lf = generator_table(xi, f, &terms)?;
    let left = runner.run(paths, |i| {
        lookdown_u_statistic(xi, mutation, &[f, f], &[t, t + h], mu, levels, side_seed(seed, TAG_LEFT, i)).map(|v| (v[1] - v[0]) / h)
    });
    let right = runner.run(paths, |i| {
        lookdown_u_statistic(xi, mutation, &[&lf], &[t], mu, levels, side_seed(seed, TAG_RIGHT, i)).map(|v| v[0])
    });
    Ok(DualityReport::new(collect_results(left)?, collect_results(right)?))
}
