//! Analytic wavefunction catalog.
//!
//! Every model carries closed-form per-particle gradients and Laplacians, an
//! analytic time derivative, and the potential `U` it solves the Schrödinger
//! equation for. Units are atomic (ħ = mₑ = 1, Coulomb constant 1) unless a
//! model is built with explicit [`Units`].

mod catalog;
mod hermite;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::{Error, Result};

pub use catalog::{
    make_free_gaussian_packet, make_free_gaussian_packet_in, make_harmonic_oscillator_1d,
    make_harmonic_oscillator_1d_in, make_hookes_atom, make_hydrogenlike, make_hydrogenlike_in,
    make_product_state, make_superposition, Orbital, HOOKE_OMEGA, MAX_HERMITE_ORDER,
};
pub use hermite::hermite_functions;

/// Distance below which a particle is considered to sit on a point singularity.
pub const SINGULAR_RADIUS: f64 = 1e-12;

/// Spin label. Carried through configurations but never read by the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    pub fn value(self) -> i8 {
        match self {
            Spin::Down => -1,
            Spin::Up => 1,
        }
    }

    pub fn from_value(value: i8) -> Result<Self> {
        match value {
            -1 => Ok(Spin::Down),
            1 => Ok(Spin::Up),
            other => Err(Error::Domain(format!("spin label must be ±1, got {other}"))),
        }
    }
}

/// Positions of `n` particles in `dim` dimensions plus their spin labels.
///
/// Coordinates are stored particle-major: particle `i` occupies
/// `coords[i*dim .. (i+1)*dim]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParticleConfig {
    dim: usize,
    coords: Vec<f64>,
    spins: Vec<Spin>,
}

impl ParticleConfig {
    /// Builds a configuration from one position vector per particle, all spins up.
    pub fn new(positions: &[Vec<f64>]) -> Result<Self> {
        let dim = positions.first().map_or(0, Vec::len);
        if positions.iter().any(|p| p.len() != dim) {
            return Err(Error::Domain("all positions must share one dimension".into()));
        }
        Self::from_flat(dim, positions.concat())
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::Domain(format!(
                "{} coordinates do not split into particles of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {bad}")));
        }
        let n = coords.len() / dim;
        Ok(Self {
            dim,
            coords,
            spins: vec![Spin::Up; n],
        })
    }

    pub fn with_spins(mut self, spins: Vec<Spin>) -> Result<Self> {
        if spins.len() != self.n() {
            return Err(Error::Domain(format!(
                "{} spin labels for {} particles",
                spins.len(),
                self.n()
            )));
        }
        self.spins = spins;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }
}

/// One-body external potential `V(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OneBodyPotential {
    Free,
    /// `V = ½ k |r|²`.
    Harmonic { stiffness: f64 },
    /// `V = -Z/|r|`, singular at the origin.
    Coulomb { charge: f64 },
}

impl OneBodyPotential {
    pub fn value(&self, r: &[f64]) -> f64 {
        match *self {
            OneBodyPotential::Free => 0.0,
            OneBodyPotential::Harmonic { stiffness } => 0.5 * stiffness * norm_sqr(r),
            OneBodyPotential::Coulomb { charge } => -charge / norm_sqr(r).sqrt(),
        }
    }

    fn is_singular_at(&self, r: &[f64]) -> bool {
        matches!(self, OneBodyPotential::Coulomb { .. }) && norm_sqr(r).sqrt() < SINGULAR_RADIUS
    }
}

/// The potential `U = Σ_i V_i(r_i) + ½ Σ_{i≠j} |r_i - r_j|⁻¹`.
///
/// `external` holds one entry per particle; catalog states use the same `V`
/// for every particle, product states may mix them. The pair sum counts each
/// pair once.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub external: Vec<OneBodyPotential>,
    pub pair_interaction: bool,
    pub description: String,
}

impl PotentialSpec {
    pub fn uniform(n: usize, v: OneBodyPotential, pair_interaction: bool, description: &str) -> Self {
        Self {
            external: vec![v; n],
            pair_interaction,
            description: description.to_string(),
        }
    }

    /// Names the first singular feature touched by `coords`, if any.
    pub fn singularity(&self, dim: usize, coords: &[f64]) -> Option<String> {
        let n = coords.len() / dim;
        for (i, v) in self.external.iter().enumerate().take(n) {
            if v.is_singular_at(&coords[i * dim..(i + 1) * dim]) {
                return Some(format!("particle {i} at the Coulomb center"));
            }
        }
        if self.pair_interaction {
            for i in 0..n {
                for j in i + 1..n {
                    if pair_distance(dim, coords, i, j) < SINGULAR_RADIUS {
                        return Some(format!("particles {i} and {j} coincide"));
                    }
                }
            }
        }
        None
    }

    /// Distance from `coords` to the nearest singular feature, infinite when
    /// the potential has none.
    pub fn clearance(&self, dim: usize, coords: &[f64]) -> f64 {
        let n = coords.len() / dim;
        let mut d = f64::INFINITY;
        for (i, v) in self.external.iter().enumerate().take(n) {
            if matches!(v, OneBodyPotential::Coulomb { .. }) {
                d = d.min(norm_sqr(&coords[i * dim..(i + 1) * dim]).sqrt());
            }
        }
        if self.pair_interaction {
            for i in 0..n {
                for j in i + 1..n {
                    d = d.min(pair_distance(dim, coords, i, j));
                }
            }
        }
        d
    }

    pub fn evaluate(&self, dim: usize, coords: &[f64]) -> Result<f64> {
        if let Some(reason) = self.singularity(dim, coords) {
            return Err(Error::Singularity(reason));
        }
        let n = coords.len() / dim;
        let mut u: f64 = self
            .external
            .iter()
            .enumerate()
            .take(n)
            .map(|(i, v)| v.value(&coords[i * dim..(i + 1) * dim]))
            .sum();
        if self.pair_interaction {
            for i in 0..n {
                for j in i + 1..n {
                    u += 1.0 / pair_distance(dim, coords, i, j);
                }
            }
        }
        Ok(u)
    }
}

/// Action and mass units of a model. Atomic units by default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Units {
    pub mass: f64,
    pub hbar: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self {
            mass: 1.0,
            hbar: 1.0,
        }
    }
}

impl Units {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.hbar > 0.0 && self.mass.is_finite() && self.hbar.is_finite()) {
            return Err(Error::Domain(format!(
                "mass and hbar must be positive, got mass={} hbar={}",
                self.mass, self.hbar
            )));
        }
        Ok(())
    }
}

/// All derivatives of Ψ at one point.
///
/// The wavefunction is `Ψ = phase · value`, where `phase` is a unit-modulus
/// factor independent of position (the `e^{-iEt/ħ}` of a stationary state, or
/// 1). Spatial derivatives are stored without the phase so that ratios such
/// as `∇Ψ/Ψ` and the modulus stay exactly time independent for eigenstates.
/// `time_derivative` is the full `∂Ψ/∂t`, phase included.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub phase: Complex64,
    pub value: Complex64,
    /// Particle-major `n·dim` components.
    pub gradient: Vec<Complex64>,
    /// One Laplacian per particle.
    pub laplacian: Vec<Complex64>,
    pub time_derivative: Complex64,
}

impl Jet {
    pub fn psi(&self) -> Complex64 {
        self.phase * self.value
    }

    pub fn density(&self) -> f64 {
        self.value.norm_sqr()
    }

    pub fn gradient_of(&self, dim: usize, i: usize) -> &[Complex64] {
        &self.gradient[i * dim..(i + 1) * dim]
    }
}

/// Closed-form evaluator behind a [`WavefunctionModel`].
pub trait Wavefunction: Send + Sync + fmt::Debug {
    /// Full Ψ(x, t), phase included.
    fn value(&self, x: &[f64], t: f64) -> Complex64;

    fn jet(&self, x: &[f64], t: f64) -> Jet;
}

/// An analytic n-particle wavefunction with its potential and metadata.
///
/// Immutable after construction; cheap to clone.
#[derive(Clone)]
pub struct WavefunctionModel {
    label: String,
    n: usize,
    dim: usize,
    units: Units,
    energy: Option<f64>,
    real_valued: bool,
    normalizable: bool,
    potential: PotentialSpec,
    evaluator: Arc<dyn Wavefunction>,
}

impl fmt::Debug for WavefunctionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WavefunctionModel")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("dim", &self.dim)
            .field("units", &self.units)
            .field("energy", &self.energy)
            .field("potential", &self.potential.description)
            .finish()
    }
}

impl WavefunctionModel {
    /// Wraps an arbitrary evaluator. The model starts non-stationary,
    /// complex-valued and normalizable; adjust with the builder methods.
    pub fn custom(
        label: impl Into<String>,
        n: usize,
        dim: usize,
        units: Units,
        potential: PotentialSpec,
        evaluator: Arc<dyn Wavefunction>,
    ) -> Result<Self> {
        units.validate()?;
        if n == 0 || !(dim == 1 || dim == 3) {
            return Err(Error::Domain(format!("unsupported shape n={n}, dim={dim}")));
        }
        if potential.external.len() != n {
            return Err(Error::Domain(format!(
                "potential lists {} one-body terms for {n} particles",
                potential.external.len()
            )));
        }
        Ok(Self {
            label: label.into(),
            n,
            dim,
            units,
            energy: None,
            real_valued: false,
            normalizable: true,
            potential,
            evaluator,
        })
    }

    /// Marks the model as an eigenstate with exact energy `energy`.
    pub fn stationary(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }

    /// Declares that the spatial part of the jet is purely real.
    pub fn real_valued(mut self, real: bool) -> Self {
        self.real_valued = real;
        self
    }

    pub fn normalizable(mut self, normalizable: bool) -> Self {
        self.normalizable = normalizable;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Same model with a different potential. Used for test fixtures such as
    /// products of hydrogen orbitals without electron repulsion.
    pub fn with_potential(mut self, potential: PotentialSpec) -> Result<Self> {
        if potential.external.len() != self.n {
            return Err(Error::Domain("potential does not match particle count".into()));
        }
        self.potential = potential;
        Ok(self)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of coordinates, `n·dim`.
    pub fn coordinate_count(&self) -> usize {
        self.n * self.dim
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn mass(&self) -> f64 {
        self.units.mass
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    pub fn is_stationary(&self) -> bool {
        self.energy.is_some()
    }

    pub fn energy(&self) -> Option<f64> {
        self.energy
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    pub fn is_normalizable(&self) -> bool {
        self.normalizable
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    /// Ψ(x, t) on flat particle-major coordinates.
    pub fn value(&self, x: &[f64], t: f64) -> Complex64 {
        self.evaluator.value(x, t)
    }

    pub fn jet(&self, x: &[f64], t: f64) -> Jet {
        self.evaluator.jet(x, t)
    }

    /// ∇_i Ψ, phase included.
    pub fn gradient(&self, x: &[f64], t: f64, i: usize) -> Vec<Complex64> {
        let jet = self.jet(x, t);
        jet.gradient_of(self.dim, i).iter().map(|g| jet.phase * g).collect()
    }

    /// ∇_i² Ψ, phase included.
    pub fn laplacian(&self, x: &[f64], t: f64, i: usize) -> Complex64 {
        let jet = self.jet(x, t);
        jet.phase * jet.laplacian[i]
    }

    pub fn time_derivative(&self, x: &[f64], t: f64) -> Complex64 {
        self.jet(x, t).time_derivative
    }

    /// Checks shape compatibility of `config` with this model.
    pub fn check_config(&self, config: &ParticleConfig) -> Result<()> {
        if config.n() != self.n || config.dim() != self.dim {
            return Err(Error::Usage(format!(
                "configuration has {} particles in {}D, model {} expects {} in {}D",
                config.n(),
                config.dim(),
                self.label,
                self.n,
                self.dim
            )));
        }
        Ok(())
    }

    /// Errors when `x` lies on the model's singular set.
    pub fn check_regular(&self, x: &[f64]) -> Result<()> {
        match self.potential.singularity(self.dim, x) {
            Some(reason) => Err(Error::Singularity(reason)),
            None => Ok(()),
        }
    }
}

/// `U(x)` for a configuration; fails on Coulomb centers and pair coalescence.
pub fn potential_energy(model: &WavefunctionModel, config: &ParticleConfig) -> Result<f64> {
    model.check_config(config)?;
    model.potential().evaluate(model.dim(), config.coords())
}

pub(crate) fn norm_sqr(r: &[f64]) -> f64 {
    r.iter().map(|c| c * c).sum()
}

fn pair_distance(dim: usize, coords: &[f64], i: usize, j: usize) -> f64 {
    (0..dim)
        .map(|k| {
            let d = coords[i * dim + k] - coords[j * dim + k];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn config_rejects_ragged_and_nonfinite() {
        assert!(ParticleConfig::new(&[vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(ParticleConfig::from_flat(1, vec![f64::NAN]).is_err());
        assert!(ParticleConfig::from_flat(3, vec![0.0; 4]).is_err());
        let c = ParticleConfig::new(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.position(1), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn spins_are_checked() {
        let c = ParticleConfig::from_flat(1, vec![0.0, 1.0]).unwrap();
        assert!(c.clone().with_spins(vec![Spin::Up]).is_err());
        let c = c.with_spins(vec![Spin::Up, Spin::Down]).unwrap();
        assert_eq!(c.spins()[1].value(), -1);
        assert!(Spin::from_value(0).is_err());
    }

    #[test]
    fn potential_examples() {
        let h = make_hydrogenlike(Orbital::S1, 1.0).unwrap();
        let c = ParticleConfig::from_flat(3, vec![0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(potential_energy(&h, &c).unwrap(), -1.0);

        let ho = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let c = ParticleConfig::from_flat(1, vec![2.0]).unwrap();
        assert_relative_eq!(potential_energy(&ho, &c).unwrap(), 2.0);

        // ½ω²r² with ω = ½ gives r²/8, plus one pair term.
        let hooke = make_hookes_atom();
        let c = ParticleConfig::new(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        assert_relative_eq!(potential_energy(&hooke, &c).unwrap(), 0.125 + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_points_are_named() {
        let h = make_hydrogenlike(Orbital::S1, 1.0).unwrap();
        let c = ParticleConfig::from_flat(3, vec![0.0; 3]).unwrap();
        match potential_energy(&h, &c) {
            Err(Error::Singularity(msg)) => assert!(msg.contains("particle 0")),
            other => panic!("expected singularity, got {other:?}"),
        }
        let hooke = make_hookes_atom();
        let c = ParticleConfig::new(&[vec![0.5, 0.0, 0.0], vec![0.5, 0.0, 0.0]]).unwrap();
        match potential_energy(&hooke, &c) {
            Err(Error::Singularity(msg)) => assert!(msg.contains("0 and 1")),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_is_usage_error() {
        let ho = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let c = ParticleConfig::from_flat(3, vec![0.0; 3]).unwrap();
        assert!(matches!(potential_energy(&ho, &c), Err(Error::Usage(_))));
    }
}
