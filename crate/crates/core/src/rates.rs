//! Collision rates `λ_{b;k₁,…,k_r;s}` and block counting rates `g_{nk}`.
//!
//! Rates are keyed by padded signatures `(k₁,…,k_p)` with `kᵢ ≥ 1`: the
//! groups of size at least two merge, the ones stay put. Three routes exist:
//!
//! * exact enumeration of distinct index tuples for finite atoms,
//! * the closed form for Poisson-Dirichlet,
//! * Monte Carlo integration over `ζ ~ Ξ₀(dζ)/(ζ,ζ)`, evaluating the tuple
//!   sums through power sums.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::combinatorics::{binomial, compositions, factorial, rising, BlockSizeSignature};
use crate::simplex::{intensity_total_mass, SimplexPoint, XiBody, XiSpec, ZetaSampler};
use crate::stats::{Estimate, MeanVar};
use crate::{Error, Result};

/// Largest number of index tuples the exact finite-atom route will visit
/// for a single atom.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

/// Largest ground set for rate computations.
pub const MAX_BLOCKS: usize = 10;

/// Minimum number of Monte Carlo samples accepted.
pub const MIN_MC_SAMPLES: usize = 1000;

/// A collision among `b` blocks: groups of sizes `k₁ ≥ … ≥ k_r ≥ 2` merge
/// and `s = b − Σkᵢ` blocks stay.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RateQuery {
    b: usize,
    merge_sizes: BlockSizeSignature,
}

impl RateQuery {
    pub fn new(b: usize, groups: &[usize]) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidQuery("at least one merging group is required".into()));
        }
        let merged: usize = groups.iter().sum();
        if merged > b {
            return Err(Error::InvalidQuery(format!("groups cover {merged} blocks but only {b} exist")));
        }
        let merge_sizes = BlockSizeSignature::from_groups(groups, b - merged)?;
        Ok(Self { b, merge_sizes })
    }

    /// A padded signature; it must contain at least one entry `≥ 2`.
    pub fn from_signature(sig: BlockSizeSignature) -> Result<Self> {
        if sig.is_trivial() {
            return Err(Error::InvalidQuery(format!("signature {sig} has no merging group")));
        }
        Ok(Self { b: sig.n(), merge_sizes: sig })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn signature(&self) -> &BlockSizeSignature {
        &self.merge_sizes
    }

    pub fn groups(&self) -> &[usize] {
        self.merge_sizes.groups()
    }

    pub fn singletons(&self) -> usize {
        self.merge_sizes.singletons()
    }

    /// Number of blocks after the collision, `r + s`.
    pub fn resulting_blocks(&self) -> usize {
        self.merge_sizes.num_blocks()
    }
}

fn kingman_term(xi: &XiSpec, q: &RateQuery) -> f64 {
    if q.merge_sizes.is_binary() {
        xi.kingman_mass()
    } else {
        0.0
    }
}

fn check_blocks(b: usize) -> Result<()> {
    if b > MAX_BLOCKS {
        return Err(Error::TooLarge { what: "block count", value: b, max: MAX_BLOCKS });
    }
    Ok(())
}

/// The rate at which the collision `q` happens.
///
/// Fails with [`Error::EnumerationGuard`] if some atom would need more than
/// [`ENUMERATION_GUARD`] index tuples; [`collision_rate_power_sums`] covers
/// those cases.
pub fn collision_rate(xi: &XiSpec, q: &RateQuery) -> Result<f64> {
    check_blocks(q.b)?;
    let body = match xi.body() {
        XiBody::FiniteAtoms(atoms) => {
            let mut total = 0.0;
            for atom in atoms {
                total += atom.weight / atom.point.sq_norm() * enumerated_integrand(&atom.point, q.groups(), q.singletons())?;
            }
            total
        }
        XiBody::PoissonDirichlet { theta } => pd_closed_form(*theta, q.signature().sizes()),
    };
    Ok(kingman_term(xi, q) + body)
}

/// `λ(k₁,…,k_p)` for sizes in any order; all-ones signatures have rate 0.
pub fn lambda(xi: &XiSpec, sizes: &[usize]) -> Result<f64> {
    let sig = BlockSizeSignature::new(sizes.to_vec())?;
    if sig.is_trivial() {
        return Ok(0.0);
    }
    collision_rate(xi, &RateQuery::from_signature(sig)?)
}

/// Same as [`collision_rate`] but evaluates the tuple sums through power
/// sums, so the cost does not grow with the atom support.
pub fn collision_rate_power_sums(xi: &XiSpec, q: &RateQuery) -> Result<f64> {
    check_blocks(q.b)?;
    let body = match xi.body() {
        XiBody::FiniteAtoms(atoms) => {
            let integrand = SignatureIntegrand::new(q.groups(), q.singletons());
            atoms.iter().map(|a| a.weight / a.point.sq_norm() * integrand.eval(&a.point)).sum()
        }
        XiBody::PoissonDirichlet { theta } => pd_closed_form(*theta, q.signature().sizes()),
    };
    Ok(kingman_term(xi, q) + body)
}

/// `θ^p ∏(kᵢ − 1)! / [θ]_n`.
pub fn pd_closed_form(theta: f64, sizes: &[usize]) -> f64 {
    let n: usize = sizes.iter().sum();
    let p = sizes.len() as i32;
    let prod: f64 = sizes.iter().map(|&k| factorial(k - 1) as f64).product();
    theta.powi(p) * prod / rising(theta, n as u64)
}

/// `Σ_{l=0}^{s} C(s,l)(1−|ζ|)^{s−l} Σ_{distinct} ζ_{i₁}^{k₁}⋯ζ_{i_r}^{k_r} ζ_{i_{r+1}}⋯ζ_{i_{r+l}}`
/// by visiting every tuple of distinct nonzero coordinates.
fn enumerated_integrand(zeta: &SimplexPoint, groups: &[usize], s: usize) -> Result<f64> {
    let m = zeta.support() as u128;
    let r = groups.len();
    let mut terms = 0u128;
    for l in 0..=s {
        let len = (r + l) as u128;
        if len <= m {
            terms = terms.saturating_add((0..len).fold(1u128, |acc, i| acc.saturating_mul(m - i)));
        }
    }
    if terms > ENUMERATION_GUARD {
        return Err(Error::EnumerationGuard { terms, guard: ENUMERATION_GUARD });
    }
    let dust = 1.0 - zeta.total();
    let masses = zeta.masses();
    let mut used = vec![false; masses.len()];
    let mut total = 0.0;
    for l in 0..=s {
        let mut exps: Vec<i32> = groups.iter().map(|&k| k as i32).collect();
        exps.resize(r + l, 1);
        if exps.len() > masses.len() {
            continue;
        }
        let sum = distinct_tuple_sum(masses, &exps, &mut used, 1.0);
        total += binomial(s, l) as f64 * dust.powi((s - l) as i32) * sum;
    }
    Ok(total)
}

fn distinct_tuple_sum(masses: &[f64], exps: &[i32], used: &mut [bool], acc: f64) -> f64 {
    let Some((&e, rest)) = exps.split_first() else {
        return acc;
    };
    let mut total = 0.0;
    for i in 0..masses.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        total += distinct_tuple_sum(masses, rest, used, acc * masses[i].powi(e));
        used[i] = false;
    }
    total
}

/// `Σ_{distinct i₁,…,i_q} ∏ ζ_{iₜ}^{eₜ}` written as a signed combination of
/// products of power sums `p_e = Σᵢ ζᵢ^e` (Möbius inversion over the
/// partition lattice of tuple positions).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSumExpansion {
    terms: Vec<(f64, Vec<u32>)>,
}

impl PowerSumExpansion {
    pub fn new(exps: &[u32]) -> Self {
        let mut acc: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
        let mut sums = Vec::with_capacity(exps.len());
        let mut sizes = Vec::with_capacity(exps.len());
        expand(exps, 0, &mut sums, &mut sizes, &mut acc);
        let terms = acc.into_iter().filter(|(_, c)| *c != 0).map(|(k, c)| (c as f64, k)).collect();
        Self { terms }
    }

    /// Largest power-sum exponent needed.
    pub fn max_exponent(&self) -> u32 {
        self.terms.iter().flat_map(|(_, k)| k.iter().copied()).max().unwrap_or(0)
    }

    /// Evaluates with `p[e]` holding `p_e` (index 0 unused).
    pub fn eval_with(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|(c, key)| c * key.iter().map(|&e| p[e as usize]).product::<f64>()).sum()
    }

    pub fn eval(&self, zeta: &SimplexPoint) -> f64 {
        let p = power_sums(zeta, self.max_exponent());
        self.eval_with(&p)
    }
}

fn expand(exps: &[u32], pos: usize, sums: &mut Vec<u32>, sizes: &mut Vec<usize>, acc: &mut BTreeMap<Vec<u32>, i128>) {
    if pos == exps.len() {
        let mut coeff: i128 = 1;
        for &size in sizes.iter() {
            let sign = if size % 2 == 1 { 1 } else { -1 };
            coeff *= sign * factorial(size - 1) as i128;
        }
        let mut key = sums.clone();
        key.sort_unstable();
        *acc.entry(key).or_insert(0) += coeff;
        return;
    }
    let e = exps[pos];
    for b in 0..sums.len() {
        sums[b] += e;
        sizes[b] += 1;
        expand(exps, pos + 1, sums, sizes, acc);
        sums[b] -= e;
        sizes[b] -= 1;
    }
    sums.push(e);
    sizes.push(1);
    expand(exps, pos + 1, sums, sizes, acc);
    sums.pop();
    sizes.pop();
}

/// `[0, p₁, …, p_max]`.
pub fn power_sums(zeta: &SimplexPoint, max: u32) -> Vec<f64> {
    let mut p = vec![0.0; max as usize + 1];
    for &z in zeta.masses() {
        let mut pow = 1.0;
        for slot in p.iter_mut().skip(1) {
            pow *= z;
            *slot += pow;
        }
    }
    p
}

/// The integrand of a collision rate as a function of `ζ`, before the
/// `1/(ζ,ζ)` weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureIntegrand {
    /// `(C(s,l), s − l, expansion)` for `l = 0..=s`.
    parts: Vec<(f64, i32, PowerSumExpansion)>,
    max_exponent: u32,
}

impl SignatureIntegrand {
    pub fn new(groups: &[usize], s: usize) -> Self {
        let parts: Vec<_> = (0..=s)
            .map(|l| {
                let mut exps: Vec<u32> = groups.iter().map(|&k| k as u32).collect();
                exps.resize(groups.len() + l, 1);
                (binomial(s, l) as f64, (s - l) as i32, PowerSumExpansion::new(&exps))
            })
            .collect();
        let max_exponent = parts.iter().map(|(_, _, e)| e.max_exponent()).max().unwrap_or(0);
        Self { parts, max_exponent }
    }

    pub fn for_signature(sig: &BlockSizeSignature) -> Self {
        Self::new(sig.groups(), sig.singletons())
    }

    pub fn max_exponent(&self) -> u32 {
        self.max_exponent
    }

    pub fn eval_with(&self, p: &[f64], dust: f64) -> f64 {
        self.parts.iter().map(|(c, d, e)| c * dust.powi(*d) * e.eval_with(p)).sum()
    }

    pub fn eval(&self, zeta: &SimplexPoint) -> f64 {
        self.eval_with(&power_sums(zeta, self.max_exponent), 1.0 - zeta.total())
    }
}

/// Averages `f(ζ)` over `ζ ~ Ξ₀(dζ)/(ζ,ζ)` (normalised) and scales by the
/// event rate, coordinate by coordinate. Returns `None` when `Ξ₀ = 0`.
pub fn mc_integrate<R, F>(xi: &XiSpec, samples: usize, dim: usize, rng: &mut R, mut f: F) -> Result<Option<Vec<Estimate>>>
where
    R: Rng + ?Sized,
    F: FnMut(&SimplexPoint, &mut [f64]),
{
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!("at least {MIN_MC_SAMPLES} samples are required, got {samples}")));
    }
    if xi.has_no_events() {
        return Ok(None);
    }
    let sampler = ZetaSampler::new(xi)?;
    let total = sampler.rate();
    let mut acc = vec![MeanVar::default(); dim];
    let mut buf = vec![0.0; dim];
    for _ in 0..samples {
        let zeta = sampler.sample(rng);
        f(&zeta, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            a.push(total * v);
        }
    }
    Ok(Some(acc.iter().map(Estimate::from).collect()))
}

/// Monte Carlo estimate of [`collision_rate`].
pub fn collision_rate_mc<R: Rng + ?Sized>(xi: &XiSpec, q: &RateQuery, samples: usize, rng: &mut R) -> Result<Estimate> {
    check_blocks(q.b)?;
    let integrand = SignatureIntegrand::new(q.groups(), q.singletons());
    let est = mc_integrate(xi, samples, 1, rng, |zeta, out| out[0] = integrand.eval(zeta))?;
    let a = kingman_term(xi, q);
    Ok(match est {
        Some(e) => Estimate { value: a + e[0].value, stderr: e[0].stderr },
        None => Estimate { value: a, stderr: 0.0 },
    })
}

/// Rates `g_{nk}` of the block counting chain from `n` blocks to `k < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCountingRates {
    n: usize,
    /// `to[k]` for `k = 0..n`; entry 0 and `n` are unused and zero.
    to: Vec<f64>,
}

impl BlockCountingRates {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `g_{nk}`; zero for `k = 0` or `k ≥ n`.
    pub fn rate(&self, k: usize) -> f64 {
        self.to.get(k).copied().filter(|_| k < self.n).unwrap_or(0.0)
    }

    /// `g_n = Σ_{k<n} g_{nk}`.
    pub fn total(&self) -> f64 {
        self.to.iter().take(self.n).sum()
    }

    /// `(k, g_{nk})` for `k = 1..n−1`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (1..self.n).map(move |k| (k, self.to[k]))
    }
}

fn check_counting_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("block counting rates need n >= 2, got {n}")));
    }
    check_blocks(n)
}

/// `g_{nk} = n!/k! Σ_{m₁+…+m_k=n} λ(m₁,…,m_k)/(m₁!⋯m_k!)` with `λ` supplied
/// by the caller.
pub fn block_counting_rates_with<F>(n: usize, mut lambda_of: F) -> Result<BlockCountingRates>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    check_counting_n(n)?;
    let mut to = vec![0.0; n + 1];
    let n_fact = factorial(n) as f64;
    for (k, slot) in to.iter_mut().enumerate().take(n).skip(1) {
        let mut sum = 0.0;
        for comp in compositions(n, k) {
            let denom: f64 = comp.iter().map(|&m| factorial(m) as f64).product();
            sum += lambda_of(&comp)? / denom;
        }
        *slot = n_fact / factorial(k) as f64 * sum;
    }
    Ok(BlockCountingRates { n, to })
}

pub fn block_counting_rates(xi: &XiSpec, n: usize) -> Result<BlockCountingRates> {
    let table = RateTable::new(xi.clone());
    block_counting_rates_with(n, |m| table.lambda(m))
}

/// Block counting rates from the power-sum route, for supports too large to
/// enumerate.
pub fn block_counting_rates_power_sums(xi: &XiSpec, n: usize) -> Result<BlockCountingRates> {
    let table = RateTable::with_power_sums(xi.clone());
    block_counting_rates_with(n, |m| table.lambda(m))
}

/// Monte Carlo block counting rates: one integrand per target `k`, all
/// evaluated on the same draws of `ζ`. Index `k` of the result holds the
/// estimate of `g_{nk}`; index 0 is unused.
pub fn block_counting_rates_mc<R: Rng + ?Sized>(xi: &XiSpec, n: usize, samples: usize, rng: &mut R) -> Result<Vec<Estimate>> {
    check_counting_n(n)?;
    // integrands per signature, with the weight each contributes to g_{nk}
    let mut keys: Vec<BlockSizeSignature> = Vec::new();
    for k in 1..n {
        for comp in compositions(n, k) {
            keys.push(BlockSizeSignature::new(comp)?);
        }
    }
    keys.sort();
    keys.dedup();
    let n_fact = factorial(n) as f64;
    let mut weights: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for k in 1..n {
        for comp in compositions(n, k) {
            let sig = BlockSizeSignature::new(comp.clone())?;
            let idx = keys.binary_search(&sig).expect("signature was collected");
            let denom: f64 = comp.iter().map(|&m| factorial(m) as f64).product();
            weights[k].push((idx, n_fact / factorial(k) as f64 / denom));
        }
    }
    let integrands: Vec<SignatureIntegrand> = keys.iter().map(SignatureIntegrand::for_signature).collect();
    let max_e = integrands.iter().map(SignatureIntegrand::max_exponent).max().unwrap_or(1);
    let mut values = vec![0.0; keys.len()];
    let est = mc_integrate(xi, samples, n, rng, |zeta, out| {
        let p = power_sums(zeta, max_e);
        let dust = 1.0 - zeta.total();
        for (v, f) in values.iter_mut().zip(&integrands) {
            *v = f.eval_with(&p, dust);
        }
        out[0] = 0.0;
        for k in 1..n {
            out[k] = weights[k].iter().map(|(i, w)| w * values[*i]).sum();
        }
    })?;
    let mut out = est.unwrap_or_else(|| vec![Estimate { value: 0.0, stderr: 0.0 }; n]);
    // binary mergers from the Kingman part: C(n,2) a, always into n − 1 blocks
    out[n - 1].value += binomial(n, 2) as f64 * xi.kingman_mass();
    Ok(out)
}

/// Memoised `λ(k₁,…,k_p)` for one measure.
///
/// Interior mutability through `RefCell` keeps a table on one thread; clone
/// it (or build one per worker) to share across threads.
#[derive(Debug, Clone)]
pub struct RateTable {
    xi: XiSpec,
    method: RateMethod,
    cache: RefCell<BTreeMap<BlockSizeSignature, f64>>,
}

/// How a [`RateTable`] evaluates rates it has not cached yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    /// [`collision_rate`]; fails past the enumeration guard.
    Enumerate,
    /// [`collision_rate_power_sums`].
    PowerSums,
    /// Enumeration, falling back to power sums past the guard.
    Auto,
}

impl RateTable {
    /// Uses [`collision_rate`].
    pub fn new(xi: XiSpec) -> Self {
        Self::with_method(xi, RateMethod::Enumerate)
    }

    /// Uses [`collision_rate_power_sums`].
    pub fn with_power_sums(xi: XiSpec) -> Self {
        Self::with_method(xi, RateMethod::PowerSums)
    }

    pub fn with_method(xi: XiSpec, method: RateMethod) -> Self {
        Self { xi, method, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn xi(&self) -> &XiSpec {
        &self.xi
    }

    pub fn get(&self, sig: &BlockSizeSignature) -> Result<f64> {
        if sig.is_trivial() {
            return Ok(0.0);
        }
        if let Some(v) = self.cache.borrow().get(sig) {
            return Ok(*v);
        }
        let q = RateQuery::from_signature(sig.clone())?;
        let v = match self.method {
            RateMethod::Enumerate => collision_rate(&self.xi, &q)?,
            RateMethod::PowerSums => collision_rate_power_sums(&self.xi, &q)?,
            RateMethod::Auto => match collision_rate(&self.xi, &q) {
                Err(Error::EnumerationGuard { .. }) => collision_rate_power_sums(&self.xi, &q)?,
                other => other?,
            },
        };
        self.cache.borrow_mut().insert(sig.clone(), v);
        Ok(v)
    }

    /// Sizes in any order.
    pub fn lambda(&self, sizes: &[usize]) -> Result<f64> {
        self.get(&BlockSizeSignature::new(sizes.to_vec())?)
    }

    pub fn cached(&self) -> usize {
        self.cache.borrow().len()
    }
}

/// Event rate `∫ Ξ₀(dζ)/(ζ,ζ)`, re-exported for callers that only use this
/// module.
pub fn event_rate(xi: &XiSpec) -> Result<f64> {
    intensity_total_mass(xi)
}

/// Monte Carlo value of `∫ ζ₁^{k₁−2}⋯ζ_j^{k_j−2} θ^j ζ₁⋯ζ_j (1−Σζᵢ)^{θ−1} dζ`
/// over the `j`-simplex, for `kᵢ ≥ 2`. With `ζ ~ Dirichlet(2,…,2,θ)` the
/// integral equals `θ^j/[θ]_{2j} · E[∏ ζᵢ^{kᵢ−2}]`.
pub fn pd_density_integral_mc<R: Rng + ?Sized>(theta: f64, ks: &[usize], samples: usize, rng: &mut R) -> Result<Estimate> {
    if ks.is_empty() || ks.iter().any(|&k| k < 2) {
        return Err(Error::InvalidQuery("density integral needs k_i >= 2".into()));
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::InvalidXi(format!("theta {theta} must be > 0")));
    }
    if samples < MIN_MC_SAMPLES {
        return Err(Error::InvalidArgument(format!("at least {MIN_MC_SAMPLES} samples are required, got {samples}")));
    }
    let j = ks.len();
    let two = Gamma::new(2.0, 1.0).expect("valid shape");
    let last = Gamma::new(theta, 1.0).map_err(|e| Error::InvalidXi(format!("{e}")))?;
    let scale = theta.powi(j as i32) / rising(theta, 2 * j as u64);
    let mut acc = MeanVar::default();
    let mut g = vec![0.0; j];
    for _ in 0..samples {
        let mut sum = last.sample(rng);
        for gi in g.iter_mut() {
            *gi = two.sample(rng);
            sum += *gi;
        }
        let v: f64 = g.iter().zip(ks).map(|(gi, &k)| (gi / sum).powi(k as i32 - 2)).product();
        acc.push(scale * v);
    }
    Ok(Estimate::from(&acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{falling, stirling1_abs, stirling2};
    use crate::seed::rng_from_seed;

    fn uniform_oracle(l: u64, sizes: &[usize]) -> f64 {
        let n: usize = sizes.iter().sum();
        falling(l, sizes.len() as u64) as f64 / (l as f64).powi(n as i32)
    }

    #[test]
    fn kingman_rate() {
        let xi = XiSpec::kingman(1.0).unwrap();
        let q = RateQuery::new(5, &[2]).unwrap();
        assert_eq!(q.singletons(), 3);
        assert_eq!(collision_rate(&xi, &q).unwrap(), 1.0);
        assert_eq!(collision_rate(&xi, &RateQuery::new(5, &[3]).unwrap()).unwrap(), 0.0);
        assert_eq!(collision_rate(&xi, &RateQuery::new(5, &[2, 2]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn uniform_atom_rates() {
        let xi = XiSpec::uniform_atom(2).unwrap();
        assert!((lambda(&xi, &[2]).unwrap() - 0.5).abs() < 1e-15);
        assert!((lambda(&xi, &[2, 1]).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(lambda(&xi, &[2, 1, 1, 1]).unwrap(), 0.0);
        for l in 1..=5u64 {
            let xi = XiSpec::uniform_atom(l as usize).unwrap();
            for n in 2..=7 {
                for sig in crate::combinatorics::integer_partitions(n) {
                    if sig.is_trivial() {
                        continue;
                    }
                    let v = lambda(&xi, sig.sizes()).unwrap();
                    assert!((v - uniform_oracle(l, sig.sizes())).abs() < 1e-12, "l={l} {sig}: {v}");
                }
            }
        }
    }

    #[test]
    fn pd_closed_form_values() {
        let xi = XiSpec::poisson_dirichlet(1.0).unwrap();
        assert!((lambda(&xi, &[2, 2]).unwrap() - 1.0 / 24.0).abs() < 1e-15);
        let xi2 = XiSpec::poisson_dirichlet(2.0).unwrap();
        assert!((lambda(&xi2, &[3]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        // λ(2) is the total mass of Ξ₀
        for theta in [0.5, 1.0, 2.0] {
            let xi = XiSpec::poisson_dirichlet(theta).unwrap();
            assert!((lambda(&xi, &[2]).unwrap() - xi.total_mass()).abs() < 1e-15);
        }
    }

    #[test]
    fn power_sum_expansion_matches_enumeration() {
        let zeta = SimplexPoint::new(vec![0.4, 0.25, 0.15, 0.1, 0.05]).unwrap();
        for exps in [vec![2u32], vec![2, 1], vec![3, 2, 1], vec![2, 2, 1, 1], vec![1, 1, 1, 1, 1], vec![4, 1, 1, 1, 1, 1]] {
            let mut used = vec![false; zeta.support()];
            let iexps: Vec<i32> = exps.iter().map(|&e| e as i32).collect();
            let direct = distinct_tuple_sum(zeta.masses(), &iexps, &mut used, 1.0);
            let via = PowerSumExpansion::new(&exps).eval(&zeta);
            assert!((direct - via).abs() < 1e-14, "{exps:?}: {direct} vs {via}");
        }
    }

    #[test]
    fn enumeration_guard_trips() {
        let xi = XiSpec::uniform_atom(500).unwrap();
        let q = RateQuery::new(10, &[2]).unwrap();
        assert!(matches!(collision_rate(&xi, &q), Err(Error::EnumerationGuard { .. })));
        let v = collision_rate_power_sums(&xi, &q).unwrap();
        let mut sizes = vec![1; 9];
        sizes[0] = 2;
        assert!((v - uniform_oracle(500, &sizes)).abs() < 1e-12);
        assert!(collision_rate(&xi, &RateQuery::new(11, &[2]).unwrap()).is_err());
    }

    #[test]
    fn rates_are_symmetric_in_argument_order() {
        let xi = XiSpec::finite_atoms(0.3, vec![(0.2, vec![0.5, 0.3, 0.1]), (0.1, vec![0.9])]).unwrap();
        let a = lambda(&xi, &[3, 1, 2]).unwrap();
        let b = lambda(&xi, &[1, 2, 3]).unwrap();
        let c = lambda(&xi, &[2, 3, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn block_counting_examples() {
        let g = block_counting_rates(&XiSpec::uniform_atom(2).unwrap(), 3).unwrap();
        assert!((g.rate(2) - 0.75).abs() < 1e-15);
        assert!((g.rate(1) - 0.25).abs() < 1e-15);
        assert!((g.total() - 1.0).abs() < 1e-15);
        let g = block_counting_rates(&XiSpec::poisson_dirichlet(1.0).unwrap(), 3).unwrap();
        assert!((g.rate(1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.rate(2) - 0.5).abs() < 1e-15);
        assert!((g.total() - 5.0 / 6.0).abs() < 1e-15);
        let g = block_counting_rates(&XiSpec::kingman(1.0).unwrap(), 4).unwrap();
        assert_eq!(g.rate(3), 6.0);
        assert_eq!(g.rate(2), 0.0);
        assert_eq!(g.rate(1), 0.0);
        assert!(block_counting_rates(&XiSpec::kingman(1.0).unwrap(), 11).is_err());
        assert!(block_counting_rates(&XiSpec::kingman(1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn block_counting_identities() {
        for l in 1..=5u64 {
            let xi = XiSpec::uniform_atom(l as usize).unwrap();
            for n in 2..=8usize {
                let g = block_counting_rates(&xi, n).unwrap();
                for p in 1..n {
                    let want = stirling2(n, p) as f64 * falling(l, p as u64) as f64 / (l as f64).powi(n as i32);
                    assert!((g.rate(p) - want).abs() < 1e-12, "l={l} n={n} p={p}");
                }
                let total = 1.0 - falling(l, n as u64) as f64 / (l as f64).powi(n as i32);
                assert!((g.total() - total).abs() < 1e-12);
            }
        }
        for theta in [0.5, 1.0, 2.0] {
            let xi = XiSpec::poisson_dirichlet(theta).unwrap();
            for n in 2..=8usize {
                let g = block_counting_rates(&xi, n).unwrap();
                let r = rising(theta, n as u64);
                for k in 1..n {
                    let want = theta.powi(k as i32) * stirling1_abs(n, k) as f64 / r;
                    assert!((g.rate(k) - want).abs() < 1e-12);
                }
                assert!((g.total() - (1.0 - theta.powi(n as i32) / r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mc_examples() {
        let mut rng = rng_from_seed(21);
        let pd1 = XiSpec::poisson_dirichlet(1.0).unwrap();
        let e = collision_rate_mc(&pd1, &RateQuery::new(2, &[2]).unwrap(), 100_000, &mut rng).unwrap();
        assert!(e.within(0.5, 3.0), "{e:?}");
        let atom = XiSpec::uniform_atom(2).unwrap();
        let e = collision_rate_mc(&atom, &RateQuery::new(2, &[2]).unwrap(), 1000, &mut rng).unwrap();
        assert!((e.value - 0.5).abs() < 1e-15 && e.stderr == 0.0);
        let pd2 = XiSpec::poisson_dirichlet(2.0).unwrap();
        let e = collision_rate_mc(&pd2, &RateQuery::new(3, &[3]).unwrap(), 100_000, &mut rng).unwrap();
        assert!(e.within(1.0 / 6.0, 3.0), "{e:?}");
        assert!(collision_rate_mc(&pd2, &RateQuery::new(3, &[3]).unwrap(), 10, &mut rng).is_err());
    }

    #[test]
    fn mc_block_counting_matches_exact() {
        let mut rng = rng_from_seed(22);
        let xi = XiSpec::poisson_dirichlet(1.0).unwrap();
        let est = block_counting_rates_mc(&xi, 4, 50_000, &mut rng).unwrap();
        let exact = block_counting_rates(&xi, 4).unwrap();
        for k in 1..4 {
            assert!(est[k].within(exact.rate(k), 3.5), "k={k}: {:?} vs {}", est[k], exact.rate(k));
        }
        let king = block_counting_rates_mc(&XiSpec::kingman(2.0).unwrap(), 3, 1000, &mut rng).unwrap();
        assert_eq!(king[2].value, 6.0);
    }

    #[test]
    fn density_integral_matches_closed_form() {
        let mut rng = rng_from_seed(23);
        for theta in [0.5, 1.0, 2.0] {
            for ks in [vec![2usize], vec![3], vec![2, 2], vec![3, 2]] {
                let e = pd_density_integral_mc(theta, &ks, 50_000, &mut rng).unwrap();
                let want = pd_closed_form(theta, &ks);
                assert!(e.within(want, 3.5), "theta={theta} {ks:?}: {e:?} vs {want}");
            }
        }
        assert!(pd_density_integral_mc(1.0, &[1, 2], 1000, &mut rng).is_err());
    }

    #[test]
    fn table_caches_fresh_values() {
        let xi = XiSpec::finite_atoms(0.5, vec![(0.3, vec![0.6, 0.2])]).unwrap();
        let t = RateTable::new(xi.clone());
        let first = t.lambda(&[2, 1, 1]).unwrap();
        assert_eq!(t.cached(), 1);
        assert_eq!(t.lambda(&[1, 2, 1]).unwrap(), first);
        assert_eq!(t.cached(), 1);
        assert_eq!(first, lambda(&xi, &[2, 1, 1]).unwrap());
        assert_eq!(t.lambda(&[1, 1]).unwrap(), 0.0);
    }

    proptest::proptest! {
        #[test]
        fn enumeration_equals_power_sums(
            masses in proptest::collection::vec(0.0f64..1.0, 1..5),
            groups in proptest::collection::vec(2usize..4, 1..3),
            s in 0usize..3,
        ) {
            let total: f64 = masses.iter().sum();
            let masses: Vec<f64> = masses.iter().map(|m| m / total.max(1.0) * 0.95).collect();
            proptest::prop_assume!(masses.iter().any(|m| *m > 0.0));
            let b: usize = groups.iter().sum::<usize>() + s;
            proptest::prop_assume!(b <= MAX_BLOCKS);
            let xi = XiSpec::finite_atoms(0.0, vec![(0.7, masses)]).unwrap();
            let q = RateQuery::new(b, &groups).unwrap();
            let a = collision_rate(&xi, &q).unwrap();
            let c = collision_rate_power_sums(&xi, &q).unwrap();
            proptest::prop_assert!((a - c).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
