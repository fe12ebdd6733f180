//! Pointwise field quantities of developed Bohmian mechanics.
//!
//! With `Ψ = R e^{iS/ħ}` and `Υ = |Ψ|²`:
//!
//! | quantity | definition | evaluated as |
//! |---|---|---|
//! | Bohm velocity | `v_i = ∇_i S / m` | `(ħ/m) Im(∇_iΨ/Ψ)` |
//! | osmotic velocity | `u_i± = ±(ħ/2m) ∇_iΥ/Υ` | `±(ħ/m) Re(∇_iΨ/Ψ)` |
//! | pressure | `P_i = -(ħ²/4m) ∇_i²Υ` | `-(ħ²/4m)(2Re(Ψ*∇_i²Ψ) + 2|∇_iΨ|²)` |
//! | quantum potential | `Q = -(ħ²/2m) Σ_i ∇_i²R / R` | from `R = |Ψ|` derivatives |
//! | phase rate | `∂S/∂t` | `ħ Im(Ψ̇/Ψ)` |
//!
//! `S` itself is never formed; only its derivatives, which are single valued
//! away from nodes. Quantities carrying `Υ⁻¹` return [`Error::Node`] when the
//! density drops below the evaluator's `node_epsilon`.

mod fd;

use num_complex::Complex64;
use serde::Serialize;

use crate::states::{potential_energy, Jet, ParticleConfig, WavefunctionModel};
use crate::{Error, Result};

pub use fd::{derivative_mismatch, fd_gradient, fd_laplacian, fd_time_derivative, FdEstimate};

pub const DEFAULT_NODE_EPSILON: f64 = 1e-10;

/// Step of the flux finite differences in [`FieldEvaluator::continuity_residual`].
pub const DEFAULT_FLUX_STEP: f64 = 1e-3;

/// Which of the two osmotic branches `u±` to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Term-by-term energy balance
/// `Σ½mv² + Σ½mu² + Υ⁻¹ΣP + U = -∂S/∂t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyBudget {
    pub kinetic_v: f64,
    pub kinetic_u: f64,
    pub compression: f64,
    pub potential_u: f64,
    pub minus_ds_dt: f64,
    /// `(kinetic_v + kinetic_u + compression + potential_u) - minus_ds_dt`.
    pub residual: f64,
}

impl EnergyBudget {
    fn new(kinetic_v: f64, kinetic_u: f64, compression: f64, potential_u: f64, minus_ds_dt: f64) -> Self {
        let total = kinetic_v + kinetic_u + compression + potential_u;
        Self {
            kinetic_v,
            kinetic_u,
            compression,
            potential_u,
            minus_ds_dt,
            residual: total - minus_ds_dt,
        }
    }

    /// Left-hand side: the Hamiltonian-like total.
    pub fn total(&self) -> f64 {
        self.kinetic_v + self.kinetic_u + self.compression + self.potential_u
    }

    /// Sum of term magnitudes, the scale for relative residual bounds.
    pub fn magnitude(&self) -> f64 {
        self.kinetic_v.abs()
            + self.kinetic_u.abs()
            + self.compression.abs()
            + self.potential_u.abs()
            + self.minus_ds_dt.abs()
    }
}

/// Every field quantity at one configuration and time.
///
/// Vectors are indexed by particle. When `node_flag` is set all `Υ⁻¹`-bearing
/// entries are `None`; the pressure needs no division and is always present.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub config: ParticleConfig,
    pub t: f64,
    pub upsilon: f64,
    pub grad_s: Option<Vec<Vec<f64>>>,
    pub ds_dt: Option<f64>,
    pub v: Option<Vec<Vec<f64>>>,
    pub u_plus: Option<Vec<Vec<f64>>>,
    pub u_minus: Option<Vec<Vec<f64>>>,
    pub pressure: Vec<f64>,
    pub q: Option<f64>,
    pub kinetic_u: Option<f64>,
    pub compression: Option<f64>,
    pub budget: Option<EnergyBudget>,
    pub node_flag: bool,
}

/// Field evaluation with a configurable node threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldEvaluator {
    pub node_epsilon: f64,
    pub flux_step: f64,
}

impl Default for FieldEvaluator {
    fn default() -> Self {
        Self {
            node_epsilon: DEFAULT_NODE_EPSILON,
            flux_step: DEFAULT_FLUX_STEP,
        }
    }
}

/// `∇_iφ/φ` for particle `i`, computed as `∇φ·φ*/|φ|²` so that real φ gives an
/// exactly real result.
fn log_gradient(jet: &Jet, dim: usize, i: usize) -> impl Iterator<Item = Complex64> + '_ {
    let rho = jet.density();
    let conj = jet.value.conj();
    jet.gradient_of(dim, i).iter().map(move |g| g * conj / rho)
}

impl FieldEvaluator {
    pub fn with_node_epsilon(node_epsilon: f64) -> Self {
        Self {
            node_epsilon,
            ..Self::default()
        }
    }

    fn jet(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<Jet> {
        model.check_config(config)?;
        model.check_regular(config.coords())?;
        Ok(model.jet(config.coords(), t))
    }

    fn guard(&self, jet: &Jet) -> Result<()> {
        let density = jet.density();
        if density < self.node_epsilon || density.is_nan() {
            return Err(Error::Node {
                density,
                epsilon: self.node_epsilon,
            });
        }
        Ok(())
    }

    fn check_particle(model: &WavefunctionModel, i: usize) -> Result<()> {
        if i >= model.n() {
            return Err(Error::Usage(format!("particle index {i} out of range for n={}", model.n())));
        }
        Ok(())
    }

    /// Υ = |Ψ|². Zero is a legal value.
    pub fn density(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<f64> {
        model.check_config(config)?;
        Ok(model.value(config.coords(), t).norm_sqr())
    }

    pub fn osmotic_velocity(
        &self,
        model: &WavefunctionModel,
        config: &ParticleConfig,
        t: f64,
        i: usize,
        branch: Branch,
    ) -> Result<Vec<f64>> {
        Self::check_particle(model, i)?;
        let jet = self.jet(model, config, t)?;
        self.guard(&jet)?;
        Ok(osmotic_of(model, &jet, i, branch))
    }

    pub fn bohm_velocity(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64, i: usize) -> Result<Vec<f64>> {
        Self::check_particle(model, i)?;
        let jet = self.jet(model, config, t)?;
        self.guard(&jet)?;
        Ok(bohm_of(model, &jet, i))
    }

    /// `P_i`; defined at nodes as well.
    pub fn pressure(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64, i: usize) -> Result<f64> {
        Self::check_particle(model, i)?;
        let jet = self.jet(model, config, t)?;
        Ok(pressure_of(model, &jet, i))
    }

    /// Bohm quantum potential summed over particles, from the derivatives of `R = |Ψ|`.
    pub fn quantum_potential(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<f64> {
        let jet = self.jet(model, config, t)?;
        self.guard(&jet)?;
        Ok(quantum_potential_of(model, &jet))
    }

    /// `(Σ_i ½m u_i², Υ⁻¹ Σ_i P_i)`, computed from the osmotic velocity and the
    /// pressure without reference to [`Self::quantum_potential`].
    pub fn quantum_potential_decomposed(
        &self,
        model: &WavefunctionModel,
        config: &ParticleConfig,
        t: f64,
    ) -> Result<(f64, f64)> {
        let jet = self.jet(model, config, t)?;
        self.guard(&jet)?;
        Ok(decomposed_of(model, &jet))
    }

    pub fn energy_budget(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<EnergyBudget> {
        let jet = self.jet(model, config, t)?;
        self.guard(&jet)?;
        let u = potential_energy(model, config)?;
        let (kinetic_u, compression) = decomposed_of(model, &jet);
        Ok(EnergyBudget::new(
            kinetic_v_of(model, &jet),
            kinetic_u,
            compression,
            u,
            -ds_dt_of(model, &jet),
        ))
    }

    /// Budget against the exact eigenvalue instead of `-∂S/∂t`.
    pub fn stationary_budget(&self, model: &WavefunctionModel, config: &ParticleConfig) -> Result<EnergyBudget> {
        let energy = model
            .energy()
            .ok_or_else(|| Error::Usage(format!("{} is not a stationary state", model.label())))?;
        let b = self.energy_budget(model, config, 0.0)?;
        Ok(EnergyBudget::new(b.kinetic_v, b.kinetic_u, b.compression, b.potential_u, energy))
    }

    /// `∂Υ/∂t + Σ_i ∇_i·(Υ v_i)`.
    ///
    /// `∂Υ/∂t = 2Re(Ψ*Ψ̇)` is analytic. The flux `Υv_i = (ħ/m) Im(Ψ*∇_iΨ)` is
    /// analytic and division-free; its divergence uses the fourth-order
    /// central stencil with step `flux_step`.
    pub fn continuity_residual(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<f64> {
        let jet = self.jet(model, config, t)?;
        let psi = jet.psi();
        let d_upsilon_dt = 2.0 * (psi.conj() * jet.time_derivative).re;
        let dim = model.dim();
        let h = self.flux_step;
        let mut x = config.coords().to_vec();
        let mut divergence = 0.0;
        for c in 0..x.len() {
            let (i, k) = (c / dim, c % dim);
            let x0 = x[c];
            let mut flux_at = |offset: f64| -> Result<f64> {
                x[c] = x0 + offset;
                model.check_regular(&x)?;
                let j = model.jet(&x, t);
                Ok(model.hbar() / model.mass() * (j.value.conj() * j.gradient[i * dim + k]).im)
            };
            let (f_m2, f_m1, f_p1, f_p2) = (flux_at(-2.0 * h)?, flux_at(-h)?, flux_at(h)?, flux_at(2.0 * h)?);
            x[c] = x0;
            divergence += (f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2) / (12.0 * h);
        }
        Ok(d_upsilon_dt + divergence)
    }

    /// All quantities at once. Only singular configurations error; nodes are
    /// reported through `node_flag`.
    pub fn sample(&self, model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<FieldSample> {
        let jet = self.jet(model, config, t)?;
        let n = model.n();
        let pressure: Vec<f64> = (0..n).map(|i| pressure_of(model, &jet, i)).collect();
        let upsilon = jet.density();
        let node_flag = self.guard(&jet).is_err();
        let mut sample = FieldSample {
            config: config.clone(),
            t,
            upsilon,
            grad_s: None,
            ds_dt: None,
            v: None,
            u_plus: None,
            u_minus: None,
            pressure,
            q: None,
            kinetic_u: None,
            compression: None,
            budget: None,
            node_flag,
        };
        if node_flag {
            return Ok(sample);
        }
        let v: Vec<Vec<f64>> = (0..n).map(|i| bohm_of(model, &jet, i)).collect();
        let u_plus: Vec<Vec<f64>> = (0..n).map(|i| osmotic_of(model, &jet, i, Branch::Plus)).collect();
        sample.u_minus = Some(u_plus.iter().map(|u| u.iter().map(|c| -c).collect()).collect());
        sample.grad_s = Some(v.iter().map(|vi| vi.iter().map(|c| c * model.mass()).collect()).collect());
        sample.ds_dt = Some(ds_dt_of(model, &jet));
        sample.q = Some(quantum_potential_of(model, &jet));
        let (ku, comp) = decomposed_of(model, &jet);
        sample.kinetic_u = Some(ku);
        sample.compression = Some(comp);
        let u = potential_energy(model, config)?;
        sample.budget = Some(EnergyBudget::new(kinetic_v_of(model, &jet), ku, comp, u, -ds_dt_of(model, &jet)));
        sample.v = Some(v);
        sample.u_plus = Some(u_plus);
        Ok(sample)
    }
}

pub(crate) fn bohm_of(model: &WavefunctionModel, jet: &Jet, i: usize) -> Vec<f64> {
    let scale = model.hbar() / model.mass();
    log_gradient(jet, model.dim(), i).map(|g| scale * g.im).collect()
}

pub(crate) fn osmotic_of(model: &WavefunctionModel, jet: &Jet, i: usize, branch: Branch) -> Vec<f64> {
    let scale = branch.sign() * model.hbar() / model.mass();
    log_gradient(jet, model.dim(), i).map(|g| scale * g.re).collect()
}

pub(crate) fn pressure_of(model: &WavefunctionModel, jet: &Jet, i: usize) -> f64 {
    let grad_sq: f64 = jet.gradient_of(model.dim(), i).iter().map(|g| g.norm_sqr()).sum();
    let lap_upsilon = 2.0 * (jet.value.conj() * jet.laplacian[i]).re + 2.0 * grad_sq;
    -model.hbar() * model.hbar() / (4.0 * model.mass()) * lap_upsilon
}

/// `-(ħ²/2m) Σ_i R∇_i²R / R²`, with
/// `R∇²R = Re(Ψ*∇²Ψ) + |∇Ψ|² - (Re(Ψ*∇Ψ))²/|Ψ|²`.
pub(crate) fn quantum_potential_of(model: &WavefunctionModel, jet: &Jet) -> f64 {
    let rho = jet.density();
    let dim = model.dim();
    let conj = jet.value.conj();
    let mut sum = 0.0;
    for i in 0..model.n() {
        let grad = jet.gradient_of(dim, i);
        let grad_sq: f64 = grad.iter().map(|g| g.norm_sqr()).sum();
        let grad_r_sq: f64 = grad.iter().map(|g| (conj * g).re.powi(2)).sum::<f64>() / rho;
        let r_lap_r = (conj * jet.laplacian[i]).re + grad_sq - grad_r_sq;
        sum += r_lap_r / rho;
    }
    -model.hbar() * model.hbar() / (2.0 * model.mass()) * sum
}

pub(crate) fn kinetic_v_of(model: &WavefunctionModel, jet: &Jet) -> f64 {
    (0..model.n())
        .map(|i| 0.5 * model.mass() * bohm_of(model, jet, i).iter().map(|c| c * c).sum::<f64>())
        .sum()
}

pub(crate) fn decomposed_of(model: &WavefunctionModel, jet: &Jet) -> (f64, f64) {
    let rho = jet.density();
    let mut kinetic_u = 0.0;
    let mut pressure_sum = 0.0;
    for i in 0..model.n() {
        let u = osmotic_of(model, jet, i, Branch::Plus);
        kinetic_u += 0.5 * model.mass() * u.iter().map(|c| c * c).sum::<f64>();
        pressure_sum += pressure_of(model, jet, i);
    }
    (kinetic_u, pressure_sum / rho)
}

pub(crate) fn ds_dt_of(model: &WavefunctionModel, jet: &Jet) -> f64 {
    let psi = jet.psi();
    model.hbar() * (jet.time_derivative * psi.conj()).im / psi.norm_sqr()
}

fn default_eval() -> FieldEvaluator {
    FieldEvaluator::default()
}

pub fn density(model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<f64> {
    default_eval().density(model, config, t)
}

pub fn osmotic_velocity(
    model: &WavefunctionModel,
    config: &ParticleConfig,
    t: f64,
    i: usize,
    branch: Branch,
) -> Result<Vec<f64>> {
    default_eval().osmotic_velocity(model, config, t, i, branch)
}

pub fn bohm_velocity(model: &WavefunctionModel, config: &ParticleConfig, t: f64, i: usize) -> Result<Vec<f64>> {
    default_eval().bohm_velocity(model, config, t, i)
}

pub fn pressure(model: &WavefunctionModel, config: &ParticleConfig, t: f64, i: usize) -> Result<f64> {
    default_eval().pressure(model, config, t, i)
}

pub fn quantum_potential(model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<f64> {
    default_eval().quantum_potential(model, config, t)
}

pub fn quantum_potential_decomposed(model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<(f64, f64)> {
    default_eval().quantum_potential_decomposed(model, config, t)
}

pub fn energy_budget(model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<EnergyBudget> {
    default_eval().energy_budget(model, config, t)
}

pub fn stationary_budget(model: &WavefunctionModel, config: &ParticleConfig) -> Result<EnergyBudget> {
    default_eval().stationary_budget(model, config)
}

pub fn continuity_residual(model: &WavefunctionModel, config: &ParticleConfig, t: f64) -> Result<f64> {
    default_eval().continuity_residual(model, config, t)
}

#[cfg(test)]
mod tests;
