//! Points of the infinite simplex and the reproduction measure `Ξ`.

use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::seed::EventCoins;
use crate::{Error, Result};

/// Sums above one by at most this much are treated as rounding error.
pub const SUM_SLACK: f64 = 1e-12;

/// Stick-breaking stops once the unbroken remainder falls below this.
pub const TAIL_EPSILON: f64 = 1e-8;

/// A point `ζ = (ζ₁ ≥ ζ₂ ≥ … ≥ 0)` with `|ζ| ≤ 1`.
///
/// Only the nonzero prefix is stored; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    masses: Vec<f64>,
    prefix: Vec<f64>,
}

impl SimplexPoint {
    /// Builds a point from arbitrary nonnegative masses. Entries are
    /// size-ordered and zeros dropped.
    pub fn new(mut masses: Vec<f64>) -> Result<Self> {
        if let Some(bad) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidSimplexPoint(format!("entry {bad} is not a finite nonnegative number")));
        }
        masses.retain(|m| *m > 0.0);
        masses.sort_unstable_by(|a, b| b.total_cmp(a));
        let total: f64 = masses.iter().sum();
        if total > 1.0 + SUM_SLACK {
            return Err(Error::InvalidSimplexPoint(format!("entries sum to {total} > 1")));
        }
        if total > 1.0 {
            for m in masses.iter_mut() {
                *m /= total;
            }
        }
        let mut prefix = Vec::with_capacity(masses.len());
        let mut acc = 0.0;
        for m in &masses {
            acc += m;
            prefix.push(acc);
        }
        if let Some(last) = prefix.last_mut() {
            if *last > 1.0 {
                *last = 1.0;
            }
        }
        Ok(Self { masses, prefix })
    }

    pub fn zero() -> Self {
        Self { masses: Vec::new(), prefix: Vec::new() }
    }

    /// `l` equal masses `1/l`.
    pub fn uniform(l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidSimplexPoint("uniform point needs l >= 1".into()));
        }
        Self::new(alloc::vec![1.0 / l as f64; l])
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Number of nonzero entries.
    pub fn support(&self) -> usize {
        self.masses.len()
    }

    pub fn is_zero(&self) -> bool {
        self.masses.is_empty()
    }

    /// `|ζ|`
    pub fn total(&self) -> f64 {
        self.prefix.last().copied().unwrap_or(0.0)
    }

    /// `(ζ, ζ)`
    pub fn sq_norm(&self) -> f64 {
        self.masses.iter().map(|m| m * m).sum()
    }

    /// Power sum `Σ ζᵢ^e`.
    pub fn power_sum(&self, e: u32) -> f64 {
        self.masses.iter().map(|m| m.powi(e as i32)).sum()
    }

    /// The colour `g(ζ, u)` of a coin.
    pub fn color(&self, u: f64) -> Color {
        color(self, u)
    }
}

/// Result of the colouring function: a family index or "not participating".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    /// 1-based family index.
    Family(usize),
    Infinite,
}

impl Color {
    pub fn is_finite(self) -> bool {
        matches!(self, Color::Family(_))
    }
}

/// `g(ζ, u) = min{j : ζ₁ + … + ζⱼ ≥ u}` if `u ≤ |ζ|`, else infinity.
///
/// Ties at partial-sum boundaries go to the smaller index.
pub fn color(zeta: &SimplexPoint, u: f64) -> Color {
    if zeta.is_zero() || u > zeta.total() {
        return Color::Infinite;
    }
    // first index with prefix >= u
    let j = zeta.prefix.partition_point(|p| *p < u);
    Color::Family(j + 1)
}

/// A weighted atom of `Ξ₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub point: SimplexPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub enum XiBody {
    /// `Ξ₀ = Σ wⱼ δ_{ζⱼ}`; may be empty (pure Kingman).
    FiniteAtoms(Vec<Atom>),
    /// `Ξ₀` with density `(ζ, ζ)` with respect to `PD_θ`.
    PoissonDirichlet { theta: f64 },
}

/// The finite measure `Ξ = a δ₀ + Ξ₀` on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSpec {
    kingman_mass: f64,
    body: XiBody,
}

impl XiSpec {
    pub fn new(kingman_mass: f64, body: XiBody) -> Result<Self> {
        if !kingman_mass.is_finite() || kingman_mass < 0.0 {
            return Err(Error::InvalidXi(format!("kingman mass {kingman_mass} must be finite and >= 0")));
        }
        match &body {
            XiBody::FiniteAtoms(atoms) => {
                for atom in atoms {
                    if !atom.weight.is_finite() || atom.weight <= 0.0 {
                        return Err(Error::InvalidXi(format!("atom weight {} must be > 0", atom.weight)));
                    }
                    if atom.point.is_zero() {
                        return Err(Error::ZeroAtom);
                    }
                }
            }
            XiBody::PoissonDirichlet { theta } => {
                if !theta.is_finite() || *theta <= 0.0 {
                    return Err(Error::InvalidXi(format!("theta {theta} must be > 0")));
                }
            }
        }
        Ok(Self { kingman_mass, body })
    }

    /// `Ξ = a δ₀`.
    pub fn kingman(a: f64) -> Result<Self> {
        Self::new(a, XiBody::FiniteAtoms(Vec::new()))
    }

    /// Mass `1/l` at `(1/l, …, 1/l)`.
    pub fn uniform_atom(l: usize) -> Result<Self> {
        let point = SimplexPoint::uniform(l)?;
        Self::new(0.0, XiBody::FiniteAtoms(alloc::vec![Atom { weight: 1.0 / l as f64, point }]))
    }

    pub fn poisson_dirichlet(theta: f64) -> Result<Self> {
        Self::new(0.0, XiBody::PoissonDirichlet { theta })
    }

    pub fn finite_atoms(kingman_mass: f64, atoms: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(weight, masses)| Ok(Atom { weight, point: SimplexPoint::new(masses)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(kingman_mass, XiBody::FiniteAtoms(atoms))
    }

    pub fn kingman_mass(&self) -> f64 {
        self.kingman_mass
    }

    pub fn body(&self) -> &XiBody {
        &self.body
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.body {
            XiBody::FiniteAtoms(atoms) => Some(atoms),
            XiBody::PoissonDirichlet { .. } => None,
        }
    }

    /// Whether `Ξ₀` is the zero measure.
    pub fn has_no_events(&self) -> bool {
        matches!(&self.body, XiBody::FiniteAtoms(a) if a.is_empty())
    }

    /// `Ξ(Δ)`; for Poisson-Dirichlet, `E[(ζ,ζ)] = 1/(1+θ)` under `PD_θ`.
    pub fn total_mass(&self) -> f64 {
        self.kingman_mass
            + match &self.body {
                XiBody::FiniteAtoms(atoms) => atoms.iter().map(|a| a.weight).sum(),
                XiBody::PoissonDirichlet { theta } => 1.0 / (1.0 + theta),
            }
    }
}

/// Total rate `∫ Ξ₀(dζ)/(ζ,ζ)` of reproduction events.
pub fn intensity_total_mass(xi: &XiSpec) -> Result<f64> {
    match &xi.body {
        XiBody::FiniteAtoms(atoms) => atoms
            .iter()
            .map(|a| {
                let q = a.point.sq_norm();
                if q > 0.0 {
                    Ok(a.weight / q)
                } else {
                    Err(Error::ZeroAtom)
                }
            })
            .sum(),
        XiBody::PoissonDirichlet { .. } => Ok(1.0),
    }
}

/// Draws mass vectors from the normalised intensity `Ξ₀(dζ)/(ζ,ζ)`.
#[derive(Debug, Clone)]
pub struct ZetaSampler {
    kind: SamplerKind,
    total: f64,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Atoms { points: Vec<SimplexPoint>, cumulative: Vec<f64> },
    Gem { theta: f64 },
}

impl ZetaSampler {
    pub fn new(xi: &XiSpec) -> Result<Self> {
        let total = intensity_total_mass(xi)?;
        let kind = match &xi.body {
            XiBody::FiniteAtoms(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidXi("no reproduction atoms to sample from".into()));
                }
                let mut acc = 0.0;
                let cumulative = atoms
                    .iter()
                    .map(|a| {
                        acc += a.weight / a.point.sq_norm();
                        acc
                    })
                    .collect();
                SamplerKind::Atoms { points: atoms.iter().map(|a| a.point.clone()).collect(), cumulative }
            }
            XiBody::PoissonDirichlet { theta } => SamplerKind::Gem { theta: *theta },
        };
        Ok(Self { kind, total })
    }

    /// Total event rate, as [`intensity_total_mass`].
    pub fn rate(&self) -> f64 {
        self.total
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SimplexPoint {
        match &self.kind {
            SamplerKind::Atoms { points, cumulative } => {
                if points.len() == 1 {
                    return points[0].clone();
                }
                let u = rng.random::<f64>() * self.total;
                let idx = cumulative.partition_point(|c| *c <= u).min(points.len() - 1);
                points[idx].clone()
            }
            SamplerKind::Gem { theta } => sample_gem(*theta, TAIL_EPSILON, rng),
        }
    }
}

/// Size-ordered GEM(θ) stick-breaking, truncated once the remainder is below
/// `tail_epsilon`; the remainder is discarded.
pub fn sample_gem<R: Rng + ?Sized>(theta: f64, tail_epsilon: f64, rng: &mut R) -> SimplexPoint {
    let mut sticks = Vec::new();
    let mut remaining = 1.0f64;
    let inv_theta = 1.0 / theta;
    while remaining >= tail_epsilon {
        // Beta(1, θ) by inversion
        let u: f64 = rng.random();
        let v = 1.0 - (1.0 - u).powf(inv_theta);
        let stick = remaining * v;
        sticks.push(stick);
        remaining -= stick;
    }
    SimplexPoint::new(sticks).expect("stick-breaking produces a valid simplex point")
}

/// One-shot draw from `Ξ₀(dζ)/(ζ,ζ)`, normalised.
pub fn sample_event_zeta<R: Rng + ?Sized>(xi: &XiSpec, rng: &mut R) -> Result<SimplexPoint> {
    Ok(ZetaSampler::new(xi)?.sample(rng))
}

/// A point `(t, ζ, u)` of the driving Poisson point process.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPoint {
    pub time: f64,
    pub zeta: SimplexPoint,
    pub coins: EventCoins,
}

impl EventPoint {
    pub fn color_of(&self, j: usize) -> Color {
        self.zeta.color(self.coins.coin(j))
    }
}
