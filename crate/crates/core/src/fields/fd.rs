//! Central finite differences of Ψ, the oracle for the analytic derivatives.

use num_complex::Complex64;

use crate::states::{ParticleConfig, WavefunctionModel};
use crate::{Error, Result};

/// A central-difference estimate at step `h`, the same estimate at `h/2`,
/// and their Richardson combination `(4·D(h/2) - D(h))/3`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdEstimate<T> {
    pub value: T,
    pub half_step: T,
    pub richardson: T,
    /// Largest component of `|D(h) - D(h/2)|·4/3`, the leading error of `value`.
    pub error_estimate: f64,
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Usage(format!("finite-difference step must be positive, got {h}")));
    }
    Ok(())
}

fn prepare(model: &WavefunctionModel, config: &ParticleConfig, i: usize, h: f64) -> Result<()> {
    check_step(h)?;
    model.check_config(config)?;
    if i >= model.n() {
        return Err(Error::Usage(format!("particle index {i} out of range")));
    }
    Ok(())
}

fn gradient_at(model: &WavefunctionModel, x: &mut [f64], t: f64, i: usize, h: f64) -> Vec<Complex64> {
    let d = model.dim();
    (0..d)
        .map(|k| {
            let c = i * d + k;
            let x0 = x[c];
            x[c] = x0 + h;
            let plus = model.value(x, t);
            x[c] = x0 - h;
            let minus = model.value(x, t);
            x[c] = x0;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

fn laplacian_at(model: &WavefunctionModel, x: &mut [f64], t: f64, i: usize, h: f64) -> Complex64 {
    let d = model.dim();
    let center = model.value(x, t);
    (0..d)
        .map(|k| {
            let c = i * d + k;
            let x0 = x[c];
            x[c] = x0 + h;
            let plus = model.value(x, t);
            x[c] = x0 - h;
            let minus = model.value(x, t);
            x[c] = x0;
            (plus - 2.0 * center + minus) / (h * h)
        })
        .sum()
}

/// `∇_iΨ` by second-order central differences.
pub fn fd_gradient(
    model: &WavefunctionModel,
    config: &ParticleConfig,
    t: f64,
    i: usize,
    h: f64,
) -> Result<FdEstimate<Vec<Complex64>>> {
    prepare(model, config, i, h)?;
    let mut x = config.coords().to_vec();
    let value = gradient_at(model, &mut x, t, i, h);
    let half_step = gradient_at(model, &mut x, t, i, 0.5 * h);
    let richardson: Vec<Complex64> = value
        .iter()
        .zip(&half_step)
        .map(|(a, b)| (4.0 * b - a) / 3.0)
        .collect();
    let error_estimate = value
        .iter()
        .zip(&half_step)
        .map(|(a, b)| (a - b).norm() * 4.0 / 3.0)
        .fold(0.0, f64::max);
    Ok(FdEstimate {
        value,
        half_step,
        richardson,
        error_estimate,
    })
}

/// `∇_i²Ψ` by the three-point stencil in each of the particle's coordinates.
pub fn fd_laplacian(
    model: &WavefunctionModel,
    config: &ParticleConfig,
    t: f64,
    i: usize,
    h: f64,
) -> Result<FdEstimate<Complex64>> {
    prepare(model, config, i, h)?;
    let mut x = config.coords().to_vec();
    let value = laplacian_at(model, &mut x, t, i, h);
    let half_step = laplacian_at(model, &mut x, t, i, 0.5 * h);
    Ok(FdEstimate {
        value,
        half_step,
        richardson: (4.0 * half_step - value) / 3.0,
        error_estimate: (value - half_step).norm() * 4.0 / 3.0,
    })
}

/// `∂Ψ/∂t` by central differences in time.
pub fn fd_time_derivative(
    model: &WavefunctionModel,
    config: &ParticleConfig,
    t: f64,
    h: f64,
) -> Result<FdEstimate<Complex64>> {
    check_step(h)?;
    model.check_config(config)?;
    let x = config.coords();
    let at = |step: f64| (model.value(x, t + step) - model.value(x, t - step)) / (2.0 * step);
    let value = at(h);
    let half_step = at(0.5 * h);
    Ok(FdEstimate {
        value,
        half_step,
        richardson: (4.0 * half_step - value) / 3.0,
        error_estimate: (value - half_step).norm() * 4.0 / 3.0,
    })
}

/// Largest relative disagreement between the analytic `∇_iΨ`, `∇_i²Ψ` and
/// their central differences at step `h`, over all particles.
///
/// Each component is normalized by `max(|analytic|, |Ψ|)` so that points
/// where a derivative crosses zero do not inflate the ratio.
pub fn derivative_mismatch(model: &WavefunctionModel, config: &ParticleConfig, t: f64, h: f64) -> Result<f64> {
    check_step(h)?;
    model.check_config(config)?;
    model.check_regular(config.coords())?;
    let x = config.coords();
    let psi = model.value(x, t).norm();
    let mut worst: f64 = 0.0;
    let mut scratch = x.to_vec();
    for i in 0..model.n() {
        let analytic = model.gradient(x, t, i);
        let fd = gradient_at(model, &mut scratch, t, i, h);
        for (a, f) in analytic.iter().zip(&fd) {
            worst = worst.max((a - f).norm() / a.norm().max(psi));
        }
        let analytic = model.laplacian(x, t, i);
        let fd = laplacian_at(model, &mut scratch, t, i, h);
        worst = worst.max((analytic - fd).norm() / analytic.norm().max(psi));
    }
    Ok(worst)
}
