use num_complex::Complex64;

use crate::states::{Jet, WavefunctionModel};
use crate::{Error, Result};

use super::quadrature::{integrate, virial_kinetic, QuadratureSpec};
use super::{EnsembleReport, PassFlag};

pub const KINETIC_TOLERANCE: f64 = 1e-6;
pub const PRESSURE_TOLERANCE: f64 = 1e-8;
pub const NORM_TOLERANCE: f64 = 1e-8;

/// `Re(Ψ̄∇²Ψ) + |∇Ψ|² - (Re Ψ̄∇Ψ)²/|Ψ|²` for particle `i`, i.e. `R∇²R`.
fn r_laplacian_r(jet: &Jet, dim: usize, i: usize) -> f64 {
    let v = jet.value;
    let grad = jet.gradient_of(dim, i);
    let base = (v.conj() * jet.laplacian[i]).re;
    let modulus = v.norm_sqr();
    if modulus == 0.0 {
        // Real wavefunctions: R = |ψ| and R∇²R = ψ∇²ψ away from the node.
        return base;
    }
    let g2: f64 = grad.iter().map(Complex64::norm_sqr).sum();
    let radial: f64 = grad.iter().map(|g| (v.conj() * g).re.powi(2)).sum();
    base + g2 - radial / modulus
}

/// `Υ u_i²` without dividing by `Υ`: `(Re Ψ̄∇Ψ)²/|Ψ|²`, with the nodal limit `|∇Ψ|²`.
fn density_times_u2(jet: &Jet, dim: usize, i: usize) -> f64 {
    let v = jet.value;
    let grad = jet.gradient_of(dim, i);
    let modulus = v.norm_sqr();
    if modulus == 0.0 {
        return grad.iter().map(Complex64::norm_sqr).sum();
    }
    grad.iter().map(|g| (v.conj() * g).re.powi(2)).sum::<f64>() / modulus
}

fn normalization_flag(report: &mut EnsembleReport, model: &WavefunctionModel, norm: f64) {
    report.value("norm", norm);
    if model.is_normalizable() {
        report.flag("normalization", PassFlag::at_most((norm - 1.0).abs(), NORM_TOLERANCE));
    }
}

/// Compares `-(ħ²/2m) Σ_i ∫R∇_i²R` with `Σ_i ½m ∫Υu_i²` on one grid.
///
/// Reports both sides, their relative difference and, where the virial
/// theorem gives it, the exact `⟨T⟩`.
pub fn kinetic_expectation_check(model: &WavefunctionModel, quad: &QuadratureSpec) -> Result<EnsembleReport> {
    if !(model.is_stationary() && model.is_real_valued()) {
        return Err(Error::Usage(format!(
            "kinetic check needs a real stationary state, {} is not",
            model.label()
        )));
    }
    let (n, dim) = (model.n(), model.dim());
    let (m, hbar) = (model.mass(), model.hbar());
    let sums = integrate(quad, model, 3, |x, out| {
        let jet = model.jet(x, 0.0);
        out[0] = jet.density();
        for i in 0..n {
            out[1] += r_laplacian_r(&jet, dim, i);
            out[2] += density_times_u2(&jet, dim, i);
        }
    })?;
    let lhs = -hbar * hbar / (2.0 * m) * sums[1];
    let rhs = 0.5 * hbar * hbar / m * sums[2];
    let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    let mut report = EnsembleReport::new("kinetic", model.label());
    report.value("lhs", lhs);
    report.value("rhs", rhs);
    report.value("relative_difference", rel);
    normalization_flag(&mut report, model, sums[0]);
    report.flag("equality", PassFlag::at_most(rel, KINETIC_TOLERANCE));
    if let Some(exact) = virial_kinetic(model) {
        let err = (rhs - exact).abs() / exact.abs();
        report.value("analytic", exact);
        report.flag("analytic", PassFlag::at_most(err, KINETIC_TOLERANCE));
    }
    Ok(report)
}

/// `|∫P_i|` against `1e-8 · ∫|P_i|` for particle `i`.
pub fn pressure_integral_check(model: &WavefunctionModel, quad: &QuadratureSpec, i: usize) -> Result<EnsembleReport> {
    if !model.is_stationary() {
        return Err(Error::Usage(format!("pressure check needs a stationary state, {} is not", model.label())));
    }
    if i >= model.n() {
        return Err(Error::Usage(format!("particle index {i} out of range")));
    }
    let sums = integrate(quad, model, 3, |x, out| {
        let jet = model.jet(x, 0.0);
        let p = crate::fields::pressure_of(model, &jet, i);
        out[0] = jet.density();
        out[1] = p;
        out[2] = p.abs();
    })?;
    let (integral, scale) = (sums[1], sums[2]);
    let mut report = EnsembleReport::new("pressure", model.label());
    report.value("particle", i as f64);
    report.value("integral", integral);
    report.value("absolute_integral", scale);
    normalization_flag(&mut report, model, sums[0]);
    report.flag(
        "vanishing_integral",
        PassFlag {
            passed: integral.abs() <= PRESSURE_TOLERANCE * scale,
            value: integral.abs(),
            tolerance: PRESSURE_TOLERANCE * scale,
        },
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::*;
    use approx::assert_relative_eq;

    fn kinetic(model: &WavefunctionModel) -> EnsembleReport {
        let spec = QuadratureSpec::auto(model, 0.0).unwrap();
        kinetic_expectation_check(model, &spec).unwrap()
    }

    #[test]
    fn oscillator_kinetic_energy() {
        let r = kinetic(&make_harmonic_oscillator_1d(0, 1.0).unwrap());
        assert!(r.passed(), "{r:?}");
        assert_relative_eq!(r.values["lhs"], 0.25, max_relative = 1e-10);
        assert_relative_eq!(r.values["rhs"], 0.25, max_relative = 1e-10);
        assert!(r.values["relative_difference"] <= 1e-8);
        let r = kinetic(&make_harmonic_oscillator_1d(2, 1.0).unwrap());
        assert!(r.passed(), "{r:?}");
        assert_relative_eq!(r.values["rhs"], 1.25, max_relative = 1e-8);
    }

    #[test]
    fn hydrogen_kinetic_energy() {
        for (orbital, z) in [(Orbital::S1, 1.0), (Orbital::S2, 1.0), (Orbital::Pz2, 2.0)] {
            let h = make_hydrogenlike(orbital, z).unwrap();
            let r = kinetic(&h);
            assert!(r.passed(), "{r:?}");
            assert_relative_eq!(r.values["rhs"], -h.energy().unwrap(), max_relative = 1e-6);
        }
    }

    #[test]
    fn hooke_kinetic_equality() {
        let r = kinetic(&make_hookes_atom());
        assert!(r.passed(), "{r:?}");
        assert!(!r.values.contains_key("analytic"));
    }

    #[test]
    fn kinetic_rejects_complex_states() {
        let g = make_free_gaussian_packet(1.0, 2.0).unwrap();
        let spec = QuadratureSpec::auto(&g, 0.0).unwrap();
        assert!(matches!(kinetic_expectation_check(&g, &spec), Err(Error::Usage(_))));
    }

    #[test]
    fn pressure_integrals_vanish() {
        let models = vec![
            make_harmonic_oscillator_1d(0, 1.0).unwrap(),
            make_harmonic_oscillator_1d(1, 1.0).unwrap(),
            make_hydrogenlike(Orbital::S1, 1.0).unwrap(),
            make_hydrogenlike(Orbital::Pz2, 1.0).unwrap(),
            make_hookes_atom(),
        ];
        for model in &models {
            let spec = QuadratureSpec::auto(model, 0.0).unwrap();
            for i in 0..model.n() {
                let r = pressure_integral_check(model, &spec, i).unwrap();
                assert!(r.passed(), "{r:?}");
                assert!(r.values["absolute_integral"] > 0.1);
            }
        }
    }

    #[test]
    fn pressure_argument_checks() {
        let ho = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let spec = QuadratureSpec::auto(&ho, 0.0).unwrap();
        assert!(pressure_integral_check(&ho, &spec, 1).is_err());
        let g = make_free_gaussian_packet(1.0, 0.0).unwrap();
        let spec = QuadratureSpec::auto(&g, 0.0).unwrap();
        assert!(pressure_integral_check(&g, &spec, 0).is_err());
    }
}
