//! Metropolis random walk targeting `Υ(·, t)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::qmc::Halton;
use crate::states::{ParticleConfig, WavefunctionModel};
use crate::{Error, Result};

use super::quadrature::{axis_extent, DEFAULT_TAIL_THRESHOLD};

const START_CANDIDATES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplerSettings {
    pub n_samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    /// Standard deviation of the Gaussian proposal step, in bohr.
    pub proposal_sigma: f64,
    pub seed: u64,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            n_samples: 10_000,
            burn_in: 2_000,
            thinning: 10,
            proposal_sigma: 0.5,
            seed: 0,
        }
    }
}

impl SamplerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 || self.thinning == 0 {
            return Err(Error::Usage("n_samples and thinning must be positive".into()));
        }
        if !(self.proposal_sigma > 0.0 && self.proposal_sigma.is_finite()) {
            return Err(Error::Usage(format!(
                "proposal_sigma must be positive, got {}",
                self.proposal_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<ParticleConfig>,
    /// Fraction of accepted proposals after burn-in.
    pub acceptance_rate: f64,
}

impl SampleSet {
    /// Column `k` of the flattened configurations.
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s.coords()[k]).collect()
    }
}

fn density(model: &WavefunctionModel, x: &[f64], t: f64) -> f64 {
    let v = model.jet(x, t).density();
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Draws `n_samples` configurations from `Υ(·, t)`.
///
/// The chain starts at the densest of 256 Halton points in the automatic box,
/// discards `burn_in` steps and then keeps every `thinning`-th state. The
/// generator is ChaCha8 seeded from `settings.seed`, so equal inputs give
/// identical samples.
pub fn sample_density(model: &WavefunctionModel, t: f64, settings: &SamplerSettings) -> Result<SampleSet> {
    settings.validate()?;
    if !model.is_normalizable() {
        return Err(Error::Usage(format!("{} is not normalizable", model.label())));
    }
    let (lower, upper) = axis_extent(model, t, DEFAULT_TAIL_THRESHOLD);
    let mut halton = Halton::new(lower.len());
    let mut x = halton.next_in(&lower, &upper);
    let mut px = density(model, &x, t);
    for _ in 1..START_CANDIDATES {
        let y = halton.next_in(&lower, &upper);
        let py = density(model, &y, t);
        if py > px {
            x = y;
            px = py;
        }
    }
    if !(px > 0.0) {
        return Err(Error::Domain(format!("no point of positive density found for {}", model.label())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut proposal = x.clone();
    let mut accepted = 0usize;
    let mut proposed = 0usize;
    let mut step = |x: &mut Vec<f64>, px: &mut f64, rng: &mut ChaCha8Rng| -> bool {
        for (p, c) in proposal.iter_mut().zip(x.iter()) {
            let z: f64 = rng.sample(StandardNormal);
            *p = c + settings.proposal_sigma * z;
        }
        let pp = density(model, &proposal, t);
        let u: f64 = rng.random();
        if u * *px < pp {
            x.copy_from_slice(&proposal);
            *px = pp;
            true
        } else {
            false
        }
    };
    for _ in 0..settings.burn_in {
        step(&mut x, &mut px, &mut rng);
    }
    let dim = model.dim();
    let mut samples = Vec::with_capacity(settings.n_samples);
    for _ in 0..settings.n_samples {
        for _ in 0..settings.thinning {
            proposed += 1;
            if step(&mut x, &mut px, &mut rng) {
                accepted += 1;
            }
        }
        samples.push(ParticleConfig::from_flat(dim, x.clone())?);
    }
    Ok(SampleSet {
        samples,
        acceptance_rate: accepted as f64 / proposed as f64,
    })
}
