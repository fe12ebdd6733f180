use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::hermite::hermite_functions;
use super::{norm_sqr, Jet, OneBodyPotential, PotentialSpec, Units, Wavefunction, WavefunctionModel};
use crate::ensemble::quadrature::composite_gauss_legendre;
use crate::{Error, Result};

/// Highest oscillator level accepted by [`make_harmonic_oscillator_1d`].
pub const MAX_HERMITE_ORDER: usize = 12;

/// Trap frequency of the Hooke's-atom state with a closed-form ground state.
pub const HOOKE_OMEGA: f64 = 0.5;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn stationary_phase(energy: f64, hbar: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, -energy * t / hbar)
}

fn stationary_jet(energy: f64, hbar: f64, t: f64, value: f64, gradient: Vec<Complex64>, laplacian: Vec<Complex64>) -> Jet {
    let phase = stationary_phase(energy, hbar, t);
    let psi = phase * value;
    Jet {
        phase,
        value: real(value),
        gradient,
        laplacian,
        time_derivative: -I * (energy / hbar) * psi,
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn unit_suffix(units: Units) -> String {
    if units == Units::default() {
        String::new()
    } else {
        format!(",mass={},hbar={}", units.mass, units.hbar)
    }
}

// ---------------------------------------------------------------------------
// Harmonic oscillator

#[derive(Debug)]
struct HarmonicOscillator {
    level: usize,
    /// Inverse squared length scale mω/ħ.
    alpha: f64,
    sqrt_alpha: f64,
    /// Normalization `α^{1/4}`.
    scale: f64,
    energy: f64,
    hbar: f64,
}

impl HarmonicOscillator {
    fn spatial(&self, x: f64) -> (f64, f64, f64) {
        let sqrt_alpha = self.sqrt_alpha;
        let xi = sqrt_alpha * x;
        let psi = hermite_functions(self.level, xi);
        let scale = self.scale;
        let n = self.level;
        let value = scale * psi[n];
        let below = if n == 0 { 0.0 } else { (2.0 * n as f64).sqrt() * psi[n - 1] };
        let gradient = scale * sqrt_alpha * (below - xi * psi[n]);
        let laplacian = self.alpha * (xi * xi - (2 * n + 1) as f64) * value;
        (value, gradient, laplacian)
    }
}

impl Wavefunction for HarmonicOscillator {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        let psi = hermite_functions(self.level, self.sqrt_alpha * x[0]);
        stationary_phase(self.energy, self.hbar, t) * (self.scale * psi[self.level])
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let (value, gradient, laplacian) = self.spatial(x[0]);
        stationary_jet(self.energy, self.hbar, t, value, vec![real(gradient)], vec![real(laplacian)])
    }
}

/// One-dimensional oscillator eigenstate `level` in `V = ½mω²x²`, atomic units.
pub fn make_harmonic_oscillator_1d(level: usize, omega: f64) -> Result<WavefunctionModel> {
    make_harmonic_oscillator_1d_in(level, omega, Units::default())
}

pub fn make_harmonic_oscillator_1d_in(level: usize, omega: f64, units: Units) -> Result<WavefunctionModel> {
    if level > MAX_HERMITE_ORDER {
        return Err(Error::Domain(format!(
            "oscillator level {level} exceeds supported maximum {MAX_HERMITE_ORDER}"
        )));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    units.validate()?;
    let energy = (level as f64 + 0.5) * units.hbar * omega;
    let alpha = units.mass * omega / units.hbar;
    let evaluator = HarmonicOscillator {
        level,
        alpha,
        sqrt_alpha: alpha.sqrt(),
        scale: alpha.powf(0.25),
        energy,
        hbar: units.hbar,
    };
    let potential = PotentialSpec::uniform(
        1,
        OneBodyPotential::Harmonic {
            stiffness: units.mass * omega * omega,
        },
        false,
        &format!("harmonic trap, omega={}", fmt_num(omega)),
    );
    let label = format!("ho1d:n={level},omega={}{}", fmt_num(omega), unit_suffix(units));
    Ok(WavefunctionModel::custom(label, 1, 1, units, potential, Arc::new(evaluator))?
        .stationary(energy)
        .real_valued(true))
}

// ---------------------------------------------------------------------------
// Hydrogen-like orbitals

/// Hydrogen-like orbitals available in the catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orbital {
    #[serde(rename = "1s")]
    S1,
    #[serde(rename = "2s")]
    S2,
    #[serde(rename = "2pz")]
    Pz2,
}

impl Orbital {
    pub fn principal(self) -> u32 {
        match self {
            Orbital::S1 => 1,
            Orbital::S2 | Orbital::Pz2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Orbital::S1 => "1s",
            Orbital::S2 => "2s",
            Orbital::Pz2 => "2pz",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "1s" => Some(Orbital::S1),
            "2s" => Some(Orbital::S2),
            "2pz" => Some(Orbital::Pz2),
            _ => None,
        }
    }
}

#[derive(Debug)]
struct Hydrogenic {
    orbital: Orbital,
    /// Inverse Bohr radius scaled by the nuclear charge, mZ/ħ².
    b: f64,
    norm: f64,
    energy: f64,
    hbar: f64,
}

impl Hydrogenic {
    fn spatial_value(&self, x: &[f64]) -> f64 {
        let r = norm_sqr(x).sqrt();
        let b = self.b;
        match self.orbital {
            Orbital::S1 => self.norm * (-b * r).exp(),
            Orbital::S2 => self.norm * (2.0 - b * r) * (-0.5 * b * r).exp(),
            Orbital::Pz2 => self.norm * b * x[2] * (-0.5 * b * r).exp(),
        }
    }
}

impl Wavefunction for Hydrogenic {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        stationary_phase(self.energy, self.hbar, t) * self.spatial_value(x)
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let r = norm_sqr(x).sqrt();
        let b = self.b;
        let c = self.norm;
        let (value, gradient, laplacian) = match self.orbital {
            Orbital::S1 => {
                let f = c * (-b * r).exp();
                let df = -b * f;
                let d2f = b * b * f;
                let g: Vec<f64> = x.iter().map(|xi| df * xi / r).collect();
                (f, g, d2f + 2.0 * df / r)
            }
            Orbital::S2 => {
                let e = (-0.5 * b * r).exp();
                let f = c * (2.0 - b * r) * e;
                let df = c * e * (-2.0 * b + 0.5 * b * b * r);
                let d2f = c * e * (1.5 * b * b - 0.25 * b * b * b * r);
                let g: Vec<f64> = x.iter().map(|xi| df * xi / r).collect();
                (f, g, d2f + 2.0 * df / r)
            }
            Orbital::Pz2 => {
                // ψ = z·g(r) with g = C b e^{-br/2}.
                let g = c * b * (-0.5 * b * r).exp();
                let dg = -0.5 * b * g;
                let z = x[2];
                let grad: Vec<f64> = (0..3)
                    .map(|k| {
                        let radial = z * dg * x[k] / r;
                        if k == 2 {
                            g + radial
                        } else {
                            radial
                        }
                    })
                    .collect();
                let value = z * g;
                (value, grad, value * (0.25 * b * b - 2.0 * b / r))
            }
        };
        stationary_jet(
            self.energy,
            self.hbar,
            t,
            value,
            gradient.into_iter().map(real).collect(),
            vec![real(laplacian)],
        )
    }
}

/// Hydrogen-like orbital for nuclear charge `z` in `V = -Z/|r|`, atomic units.
pub fn make_hydrogenlike(orbital: Orbital, z: f64) -> Result<WavefunctionModel> {
    make_hydrogenlike_in(orbital, z, Units::default())
}

pub fn make_hydrogenlike_in(orbital: Orbital, z: f64, units: Units) -> Result<WavefunctionModel> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("nuclear charge must be positive, got {z}")));
    }
    units.validate()?;
    let b = units.mass * z / (units.hbar * units.hbar);
    let n = orbital.principal() as f64;
    let energy = -units.hbar * units.hbar * b * b / (2.0 * units.mass * n * n);
    let norm = match orbital {
        Orbital::S1 => (b.powi(3) / PI).sqrt(),
        Orbital::S2 | Orbital::Pz2 => (b.powi(3) / (32.0 * PI)).sqrt(),
    };
    let evaluator = Hydrogenic {
        orbital,
        b,
        norm,
        energy,
        hbar: units.hbar,
    };
    let potential = PotentialSpec::uniform(
        1,
        OneBodyPotential::Coulomb { charge: z },
        false,
        &format!("Coulomb center, Z={}", fmt_num(z)),
    );
    let label = format!("hydrogen:{},Z={}{}", orbital.name(), fmt_num(z), unit_suffix(units));
    Ok(WavefunctionModel::custom(label, 1, 3, units, potential, Arc::new(evaluator))?
        .stationary(energy)
        .real_valued(true))
}

// ---------------------------------------------------------------------------
// Free Gaussian packet

#[derive(Debug)]
struct FreeGaussian {
    sigma0: f64,
    k0: f64,
    hbar: f64,
    mass: f64,
}

impl FreeGaussian {
    /// Returns (Ψ, ∂_x ln Ψ, ∂_t ln Ψ, width factor α).
    fn parts(&self, x: f64, t: f64) -> (Complex64, Complex64, Complex64, Complex64) {
        let s2 = self.sigma0 * self.sigma0;
        let group = self.hbar * self.k0 / self.mass;
        let alpha_dot = I * (self.hbar / (2.0 * self.mass * s2));
        let alpha = 1.0 + alpha_dot * t;
        let w = x - group * t;
        let exponent = -w * w / (4.0 * s2 * alpha) + I * self.k0 * x
            - I * (self.hbar * self.k0 * self.k0 * t / (2.0 * self.mass));
        let prefactor = (2.0 * PI * s2).powf(-0.25) / alpha.sqrt();
        let psi = prefactor * exponent.exp();
        let dlog_x = -w / (2.0 * s2 * alpha) + I * self.k0;
        let dlog_t = -0.5 * alpha_dot / alpha + w * group / (2.0 * s2 * alpha)
            + w * w * alpha_dot / (4.0 * s2 * alpha * alpha)
            - I * (self.hbar * self.k0 * self.k0 / (2.0 * self.mass));
        (psi, dlog_x, dlog_t, alpha)
    }
}

impl Wavefunction for FreeGaussian {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        self.parts(x[0], t).0
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let (psi, dlog_x, dlog_t, alpha) = self.parts(x[0], t);
        let s2 = self.sigma0 * self.sigma0;
        let d2log_x = -1.0 / (2.0 * s2 * alpha);
        Jet {
            phase: Complex64::new(1.0, 0.0),
            value: psi,
            gradient: vec![dlog_x * psi],
            laplacian: vec![(dlog_x * dlog_x + d2log_x) * psi],
            time_derivative: dlog_t * psi,
        }
    }
}

/// Freely spreading Gaussian with initial width `sigma0` and mean momentum ħk₀.
pub fn make_free_gaussian_packet(sigma0: f64, k0: f64) -> Result<WavefunctionModel> {
    make_free_gaussian_packet_in(sigma0, k0, Units::default())
}

pub fn make_free_gaussian_packet_in(sigma0: f64, k0: f64, units: Units) -> Result<WavefunctionModel> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::Domain(format!("sigma0 must be positive, got {sigma0}")));
    }
    if !k0.is_finite() {
        return Err(Error::Domain(format!("k0 must be finite, got {k0}")));
    }
    units.validate()?;
    let evaluator = FreeGaussian {
        sigma0,
        k0,
        hbar: units.hbar,
        mass: units.mass,
    };
    let potential = PotentialSpec::uniform(1, OneBodyPotential::Free, false, "free particle");
    let label = format!("gauss:sigma={},k={}{}", fmt_num(sigma0), fmt_num(k0), unit_suffix(units));
    WavefunctionModel::custom(label, 1, 1, units, potential, Arc::new(evaluator))
}

// ---------------------------------------------------------------------------
// Hooke's atom

#[derive(Debug)]
struct HookesAtom {
    norm: f64,
    energy: f64,
}

impl HookesAtom {
    fn spatial_value(&self, x: &[f64]) -> f64 {
        let r12 = distance(&x[0..3], &x[3..6]);
        let rho = norm_sqr(x);
        self.norm * (1.0 + 0.5 * r12) * (-0.25 * rho).exp()
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

impl Wavefunction for HookesAtom {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        stationary_phase(self.energy, 1.0, t) * self.spatial_value(x)
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let (r1, r2) = (&x[0..3], &x[3..6]);
        let r12 = distance(r1, r2);
        let unit: Vec<f64> = (0..3).map(|k| (r1[k] - r2[k]) / r12).collect();
        let g = self.norm * (-0.25 * norm_sqr(x)).exp();
        let f = 1.0 + 0.5 * r12;
        let mut gradient = Vec::with_capacity(6);
        for k in 0..3 {
            gradient.push(real(g * (0.5 * unit[k] - 0.5 * f * r1[k])));
        }
        for k in 0..3 {
            gradient.push(real(g * (-0.5 * unit[k] - 0.5 * f * r2[k])));
        }
        let u_dot_r1: f64 = (0..3).map(|k| unit[k] * r1[k]).sum();
        let u_dot_r2: f64 = (0..3).map(|k| unit[k] * r2[k]).sum();
        let lap1 = g * (1.0 / r12 - 0.5 * u_dot_r1 + f * (0.25 * norm_sqr(r1) - 1.5));
        let lap2 = g * (1.0 / r12 + 0.5 * u_dot_r2 + f * (0.25 * norm_sqr(r2) - 1.5));
        stationary_jet(self.energy, 1.0, t, g * f, gradient, vec![real(lap1), real(lap2)])
    }
}

/// Inverse square of the Hooke's-atom normalization constant.
///
/// In centre-of-mass and relative coordinates the density separates into
/// `e^{-R²}` times `(1 + r/2)² e^{-r²/4}`; the relative radial integral is
/// evaluated by Gauss–Legendre quadrature.
fn hooke_norm_integral() -> f64 {
    let rule = composite_gauss_legendre(0.0, 40.0, 32, 8);
    let radial: f64 = rule
        .iter()
        .map(|&(r, w)| {
            let f = 1.0 + 0.5 * r;
            w * r * r * f * f * (-0.25 * r * r).exp()
        })
        .sum();
    PI.powf(1.5) * 4.0 * PI * radial
}

/// Two electrons in a harmonic well with ω = ½ and Coulomb repulsion:
/// `Ψ ∝ (1 + r₁₂/2) e^{-(r₁² + r₂²)/4}`, E = 2 hartree.
pub fn make_hookes_atom() -> WavefunctionModel {
    let energy = 2.0;
    let evaluator = HookesAtom {
        norm: hooke_norm_integral().sqrt().recip(),
        energy,
    };
    let potential = PotentialSpec::uniform(
        2,
        OneBodyPotential::Harmonic {
            stiffness: HOOKE_OMEGA * HOOKE_OMEGA,
        },
        true,
        "harmonic trap omega=1/2 with pair repulsion",
    );
    WavefunctionModel::custom("hooke", 2, 3, Units::default(), potential, Arc::new(evaluator))
        .expect("fixed Hooke's atom parameters are valid")
        .stationary(energy)
        .real_valued(true)
}

// ---------------------------------------------------------------------------
// Superpositions

#[derive(Debug)]
struct Superposition {
    terms: Vec<(Complex64, WavefunctionModel)>,
}

impl Wavefunction for Superposition {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        self.terms.iter().map(|(c, m)| c * m.value(x, t)).sum()
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let mut acc: Option<Jet> = None;
        for (c, model) in &self.terms {
            let jet = model.jet(x, t);
            let scale = c * jet.phase;
            match acc.as_mut() {
                None => {
                    acc = Some(Jet {
                        phase: Complex64::new(1.0, 0.0),
                        value: scale * jet.value,
                        gradient: jet.gradient.iter().map(|g| scale * g).collect(),
                        laplacian: jet.laplacian.iter().map(|l| scale * l).collect(),
                        time_derivative: c * jet.time_derivative,
                    })
                }
                Some(a) => {
                    a.value += scale * jet.value;
                    for (dst, g) in a.gradient.iter_mut().zip(&jet.gradient) {
                        *dst += scale * g;
                    }
                    for (dst, l) in a.laplacian.iter_mut().zip(&jet.laplacian) {
                        *dst += scale * l;
                    }
                    a.time_derivative += c * jet.time_derivative;
                }
            }
        }
        acc.expect("superposition has at least one term")
    }
}

/// A single rescaled term; keeps the base phase so eigenstate ratios stay exact.
#[derive(Debug)]
struct Scaled {
    coefficient: Complex64,
    base: WavefunctionModel,
}

impl Wavefunction for Scaled {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        self.coefficient * self.base.value(x, t)
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let c = self.coefficient;
        let jet = self.base.jet(x, t);
        Jet {
            phase: jet.phase,
            value: c * jet.value,
            gradient: jet.gradient.iter().map(|g| c * g).collect(),
            laplacian: jet.laplacian.iter().map(|l| c * l).collect(),
            time_derivative: c * jet.time_derivative,
        }
    }
}

/// `Ψ = Σ c_k Ψ_k(x, t)` over stationary bases, coefficients renormalized to
/// `Σ|c_k|² = 1` (the bases are assumed orthonormal).
pub fn make_superposition(base: Vec<(Complex64, WavefunctionModel)>) -> Result<WavefunctionModel> {
    let Some((_, first)) = base.first() else {
        return Err(Error::Domain("superposition needs at least one term".into()));
    };
    let first = first.clone();
    for (c, m) in &base {
        if !m.is_stationary() {
            return Err(Error::Domain(format!("superposition term {} is not stationary", m.label())));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Domain("non-finite superposition coefficient".into()));
        }
        if m.n() != first.n() || m.dim() != first.dim() || m.units() != first.units() {
            return Err(Error::Domain("superposition terms differ in shape or units".into()));
        }
        if m.potential() != first.potential() {
            return Err(Error::Domain(format!(
                "superposition mixes potentials '{}' and '{}'",
                first.potential().description,
                m.potential().description
            )));
        }
    }
    let total: f64 = base.iter().map(|(c, _)| c.norm_sqr()).sum();
    if total == 0.0 {
        return Err(Error::Domain("all superposition coefficients are zero".into()));
    }
    let scale = total.sqrt().recip();
    let label = format!(
        "super:{}",
        base.iter().map(|(_, m)| m.label().to_string()).collect::<Vec<_>>().join("+")
    );
    let (n, dim, units, potential) = (first.n(), first.dim(), first.units(), first.potential().clone());
    if base.len() == 1 {
        let (c, m) = base.into_iter().next().expect("one term");
        let coefficient = c * scale;
        let real = m.is_real_valued() && coefficient.im == 0.0;
        let energy = m.energy().expect("checked stationary");
        let evaluator = Scaled { coefficient, base: m };
        return Ok(WavefunctionModel::custom(label, n, dim, units, potential, Arc::new(evaluator))?
            .stationary(energy)
            .real_valued(real));
    }
    let terms = base.into_iter().map(|(c, m)| (c * scale, m)).collect();
    WavefunctionModel::custom(label, n, dim, units, potential, Arc::new(Superposition { terms }))
}

// ---------------------------------------------------------------------------
// Product states

#[derive(Debug)]
struct Product {
    factors: Vec<WavefunctionModel>,
    dim: usize,
}

impl Wavefunction for Product {
    fn value(&self, x: &[f64], t: f64) -> Complex64 {
        self.factors
            .iter()
            .enumerate()
            .map(|(k, m)| m.value(&x[k * self.dim..(k + 1) * self.dim], t))
            .product()
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let d = self.dim;
        let jets: Vec<Jet> = self
            .factors
            .iter()
            .enumerate()
            .map(|(k, m)| m.jet(&x[k * d..(k + 1) * d], t))
            .collect();
        let n = jets.len();
        let one = Complex64::new(1.0, 0.0);
        // Products of the other factors, built without division so nodes are safe.
        let others = |get: &dyn Fn(&Jet) -> Complex64| -> Vec<Complex64> {
            let mut prefix = vec![one; n + 1];
            for k in 0..n {
                prefix[k + 1] = prefix[k] * get(&jets[k]);
            }
            let mut suffix = vec![one; n + 1];
            for k in (0..n).rev() {
                suffix[k] = suffix[k + 1] * get(&jets[k]);
            }
            (0..n).map(|k| prefix[k] * suffix[k + 1]).collect()
        };
        let spatial_others = others(&|j| j.value);
        let full_others = others(&|j| j.psi());
        let mut gradient = Vec::with_capacity(n * d);
        let mut laplacian = Vec::with_capacity(n);
        let mut time_derivative = Complex64::new(0.0, 0.0);
        for (k, jet) in jets.iter().enumerate() {
            gradient.extend(jet.gradient.iter().map(|g| g * spatial_others[k]));
            laplacian.push(jet.laplacian[0] * spatial_others[k]);
            time_derivative += jet.time_derivative * full_others[k];
        }
        Jet {
            phase: jets.iter().map(|j| j.phase).product(),
            value: jets.iter().map(|j| j.value).product(),
            gradient,
            laplacian,
            time_derivative,
        }
    }
}

/// `Ψ(x, t) = Π_k Ψ_k(x_k, t)` from one-particle models, without interaction.
pub fn make_product_state(models: Vec<WavefunctionModel>) -> Result<WavefunctionModel> {
    let Some(first) = models.first() else {
        return Err(Error::Domain("product needs at least one factor".into()));
    };
    let (dim, units) = (first.dim(), first.units());
    for m in &models {
        if m.n() != 1 {
            return Err(Error::Domain(format!("product factor {} is not a one-particle model", m.label())));
        }
        if m.dim() != dim {
            return Err(Error::Domain("product factors have different dimensions".into()));
        }
        if m.units() != units {
            return Err(Error::Domain("product factors have different units".into()));
        }
    }
    let n = models.len();
    let stationary = models.iter().all(WavefunctionModel::is_stationary);
    let real = models.iter().all(WavefunctionModel::is_real_valued);
    let normalizable = models.iter().all(WavefunctionModel::is_normalizable);
    let energy: f64 = models.iter().filter_map(WavefunctionModel::energy).sum();
    let potential = PotentialSpec {
        external: models.iter().map(|m| m.potential().external[0]).collect(),
        pair_interaction: false,
        description: models
            .iter()
            .map(|m| m.potential().description.clone())
            .collect::<Vec<_>>()
            .join(" x "),
    };
    let label = format!(
        "product:{}",
        models.iter().map(|m| m.label().to_string()).collect::<Vec<_>>().join("*")
    );
    if n == 1 {
        let only = models.into_iter().next().expect("one factor");
        return Ok(only);
    }
    let model = WavefunctionModel::custom(label, n, dim, units, potential, Arc::new(Product { factors: models, dim }))?
        .real_valued(real)
        .normalizable(normalizable);
    Ok(if stationary { model.stationary(energy) } else { model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn oscillator_energies_and_domain() {
        assert_relative_eq!(make_harmonic_oscillator_1d(0, 1.0).unwrap().energy().unwrap(), 0.5);
        assert_relative_eq!(make_harmonic_oscillator_1d(2, 1.0).unwrap().energy().unwrap(), 2.5);
        assert!(matches!(make_harmonic_oscillator_1d(13, 1.0), Err(Error::Domain(_))));
        assert!(matches!(make_harmonic_oscillator_1d(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(make_harmonic_oscillator_1d(0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn oscillator_ground_state_ratio() {
        let ho = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let ratio = ho.value(&[1.0], 0.0).re / ho.value(&[0.0], 0.0).re;
        assert_relative_eq!(ratio, (-0.5f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn oscillator_with_units() {
        let units = Units { mass: 2.0, hbar: 0.5 };
        let ho = make_harmonic_oscillator_1d_in(1, 3.0, units).unwrap();
        assert_relative_eq!(ho.energy().unwrap(), 1.5 * 0.5 * 3.0);
        assert!(ho.label().contains("mass=2"));
    }

    #[test]
    fn hydrogen_energies() {
        let e = |o, z| make_hydrogenlike(o, z).unwrap().energy().unwrap();
        assert_relative_eq!(e(Orbital::S1, 1.0), -0.5);
        assert_relative_eq!(e(Orbital::S2, 1.0), -0.125);
        assert_relative_eq!(e(Orbital::Pz2, 1.0), -0.125);
        assert_relative_eq!(e(Orbital::S1, 2.0), -2.0);
        assert!(matches!(make_hydrogenlike(Orbital::S1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gaussian_domain() {
        assert!(matches!(make_free_gaussian_packet(0.0, 1.0), Err(Error::Domain(_))));
        let g = make_free_gaussian_packet(1.0, 2.0).unwrap();
        assert!(!g.is_stationary());
        assert!(g.energy().is_none());
    }

    #[test]
    fn hooke_normalization_matches_closed_form() {
        // ∫ e^{-R²} d³R · 4π ∫ r²(1 + r/2)² e^{-r²/4} dr = 4π^{5/2}(5√π + 8).
        let closed = 4.0 * PI.powf(2.5) * (5.0 * PI.sqrt() + 8.0);
        assert_relative_eq!(hooke_norm_integral(), closed, max_relative = 1e-12);
    }

    #[test]
    fn hooke_is_exchange_symmetric() {
        let h = make_hookes_atom();
        let a = [0.3, -0.1, 0.4, -0.2, 0.5, 0.0];
        let b = [-0.2, 0.5, 0.0, 0.3, -0.1, 0.4];
        assert_eq!(h.value(&a, 0.0), h.value(&b, 0.0));
    }

    #[test]
    fn superposition_examples() {
        let ho0 = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let ho1 = make_harmonic_oscillator_1d(1, 1.0).unwrap();
        let single = make_superposition(vec![(c(1.0), ho0.clone())]).unwrap();
        assert!(single.is_stationary());
        assert_relative_eq!(single.energy().unwrap(), 0.5);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sup = make_superposition(vec![(c(s), ho0.clone()), (c(s), ho1.clone())]).unwrap();
        assert!(!sup.is_stationary());
        let v = sup.value(&[0.0], 0.0);
        assert_relative_eq!(v.re, s * ho0.value(&[0.0], 0.0).re, max_relative = 1e-15);
        assert_eq!(v.im, 0.0);
        // Beat period 2π/ω.
        let period = 2.0 * PI;
        for &t in &[0.1, 0.9, 2.3] {
            let a = sup.value(&[0.5], t).norm_sqr();
            let b = sup.value(&[0.5], t + period).norm_sqr();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        // Unnormalized coefficients are rescaled.
        let sup2 = make_superposition(vec![(c(3.0), ho0.clone()), (c(3.0), ho1.clone())]).unwrap();
        assert_relative_eq!(sup2.value(&[0.3], 0.4).re, sup.value(&[0.3], 0.4).re, max_relative = 1e-14);
    }

    #[test]
    fn superposition_errors() {
        assert!(make_superposition(vec![]).is_err());
        let ho0 = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let other = make_harmonic_oscillator_1d(0, 2.0).unwrap();
        assert!(make_superposition(vec![(c(1.0), ho0.clone()), (c(1.0), other)]).is_err());
        assert!(make_superposition(vec![(c(0.0), ho0.clone())]).is_err());
        let g = make_free_gaussian_packet(1.0, 0.0).unwrap();
        assert!(make_superposition(vec![(c(1.0), g)]).is_err());
    }

    #[test]
    fn single_term_modulus_is_bitwise_identical() {
        let base = make_hydrogenlike(Orbital::S2, 1.0).unwrap();
        let single = make_superposition(vec![(c(1.0), base.clone())]).unwrap();
        for &(x, t) in &[([0.3, -1.2, 2.0], 0.0), ([4.0, 0.1, -0.2], 1.7)] {
            assert_eq!(single.value(&x, t).norm(), base.value(&x, t).norm());
            assert_eq!(single.jet(&x, t).density(), base.jet(&x, t).density());
        }
    }

    #[test]
    fn product_examples() {
        let ho0 = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let p = make_product_state(vec![ho0.clone(), ho0.clone()]).unwrap();
        assert_eq!(p.n(), 2);
        assert_relative_eq!(p.energy().unwrap(), 1.0);
        let same = make_product_state(vec![ho0.clone()]).unwrap();
        assert_eq!(same.label(), ho0.label());
        let h = make_hydrogenlike(Orbital::S1, 1.0).unwrap();
        let hh = make_product_state(vec![h.clone(), h.clone()]).unwrap();
        assert!(!hh.potential().pair_interaction);
        assert_relative_eq!(hh.energy().unwrap(), -1.0);
        assert!(make_product_state(vec![ho0, h]).is_err());
        let x = [0.2, 0.1, -0.3, 1.0, -0.5, 0.4];
        let expected = hh.value(&x[..], 0.3);
        let manual = make_hydrogenlike(Orbital::S1, 1.0).unwrap();
        let direct = manual.value(&x[0..3], 0.3) * manual.value(&x[3..6], 0.3);
        assert_relative_eq!(expected.re, direct.re, max_relative = 1e-14);
    }
}
