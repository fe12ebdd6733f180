use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{propagate, IntegratorSettings, Termination, VelocityMode};
use crate::fields::Branch;
use crate::states::{ParticleConfig, WavefunctionModel};
use crate::{Error, Result};

use super::sampler::{sample_density, SamplerSettings};
use super::stats::{histogram_l1, ks_statistic, percentile, MarginalCdf};
use super::{EnsembleReport, PassFlag};

/// Number of i.i.d. control samples calibrating the KS threshold.
pub const CONTROL_SEEDS: u64 = 20;
/// Node-abort fraction above which the report carries a warning.
pub const NODE_ABORT_WARNING: f64 = 0.01;
const CONTROL_PERCENTILE: f64 = 0.95;

/// Seed of the `j`-th control sample, decorrelated from the sampler seed.
fn control_seed(seed: u64, j: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(j + 1)
}

struct Transport {
    finals: Vec<f64>,
    aborted: usize,
}

fn transport(
    model: &WavefunctionModel,
    starts: &[ParticleConfig],
    t0: f64,
    t1: f64,
    mode: VelocityMode,
    integrator: &IntegratorSettings,
) -> Result<Transport> {
    let ends: Vec<Result<Option<f64>>> = starts
        .par_iter()
        .map(|x0| {
            let (end, termination) = propagate(model, x0, t0, t1, mode, integrator)?;
            Ok(match termination {
                Termination::Completed => Some(end.coords()[0]),
                _ => None,
            })
        })
        .collect();
    let mut finals = Vec::with_capacity(starts.len());
    let mut aborted = 0;
    for end in ends {
        match end? {
            Some(x) => finals.push(x),
            None => aborted += 1,
        }
    }
    Ok(Transport { finals, aborted })
}

/// Samples `Υ(·, t0)`, transports every sample with the Bohm flow to `t1` and
/// compares the result with `Υ(·, t1)`.
///
/// The pass threshold for the KS statistic is the 95th percentile of the KS
/// statistics of 20 i.i.d. samples of the same size drawn from `Υ(·, t1)`.
/// The augmented flows are run through the same pipeline and only reported.
/// Restricted to models with a single coordinate.
pub fn equivariance_check(
    model: &WavefunctionModel,
    t0: f64,
    t1: f64,
    settings: &SamplerSettings,
    integrator: &IntegratorSettings,
) -> Result<EnsembleReport> {
    if model.coordinate_count() != 1 {
        return Err(Error::Usage(format!(
            "equivariance check supports one-coordinate models, {} has {}",
            model.label(),
            model.coordinate_count()
        )));
    }
    if !(t1 > t0) {
        return Err(Error::Usage(format!("t1 ({t1}) must exceed t0 ({t0})")));
    }
    integrator.validate()?;
    let start_table = MarginalCdf::new(model, t0)?;
    let end_table = MarginalCdf::new(model, t1)?;
    let set = sample_density(model, t0, settings)?;
    let starts = set.coordinate(0);
    let n = starts.len();

    let mut report = EnsembleReport::new("equivariance", model.label());
    report.seed = Some(settings.seed);
    report.acceptance_rate = Some(set.acceptance_rate);
    report.value("t0", t0);
    report.value("t1", t1);
    report.value("n_samples", n as f64);
    report.value("dt", integrator.dt);

    let ks_start = ks_statistic(&starts, |x| start_table.cdf(x));
    report.distance("ks_t0_self", ks_start);

    let bohm = transport(model, &set.samples, t0, t1, VelocityMode::Bohm, integrator)?;
    let abort_fraction = bohm.aborted as f64 / n as f64;
    report.value("node_abort_fraction", abort_fraction);
    if abort_fraction > NODE_ABORT_WARNING {
        report.warnings.push(format!(
            "{:.2}% of Bohm trajectories ended at a node",
            100.0 * abort_fraction
        ));
    }
    let ks = ks_statistic(&bohm.finals, |x| end_table.cdf(x));
    let hist = histogram_l1(&bohm.finals, &end_table);
    report.distance("ks", ks);
    report.distance("histogram_l1", hist.l1);
    report.value("histogram_bin_width", hist.bin_width);
    report.value("histogram_bins", hist.bins as f64);

    let control: Vec<f64> = (0..CONTROL_SEEDS)
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(control_seed(settings.seed, j));
            let draw: Vec<f64> = (0..n).map(|_| end_table.quantile(rng.random::<f64>())).collect();
            ks_statistic(&draw, |x| end_table.cdf(x))
        })
        .collect();
    let threshold = percentile(&control, CONTROL_PERCENTILE);
    report.distance("control_ks_median", percentile(&control, 0.5));
    report.distance("control_ks_p95", threshold);
    report.flag("ks", PassFlag::at_most(ks, threshold));

    for branch in [Branch::Plus, Branch::Minus] {
        let mode = VelocityMode::Augmented(branch);
        let run = transport(model, &set.samples, t0, t1, mode, integrator)?;
        let name = mode.name();
        report.value(&format!("node_abort_fraction_{name}"), run.aborted as f64 / n as f64);
        if run.finals.len() >= 2 {
            report.distance(&format!("ks_{name}"), ks_statistic(&run.finals, |x| end_table.cdf(x)));
            report.distance(&format!("histogram_l1_{name}"), histogram_l1(&run.finals, &end_table).l1);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::*;
    use num_complex::Complex64;

    fn small(seed: u64) -> SamplerSettings {
        SamplerSettings {
            n_samples: 2000,
            burn_in: 1000,
            thinning: 20,
            proposal_sigma: 1.0,
            seed,
        }
    }

    #[test]
    fn frozen_ensemble_reproduces_the_self_test() {
        let ho = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let r = equivariance_check(&ho, 0.0, 1.0, &small(3), &IntegratorSettings::with_dt(0.05)).unwrap();
        assert_eq!(r.distances["ks"], r.distances["ks_t0_self"]);
        assert_eq!(r.values["node_abort_fraction"], 0.0);
        assert!(r.pass_flags["ks"].tolerance > 0.0);
    }

    #[test]
    fn gaussian_ensemble_is_transported() {
        let g = make_free_gaussian_packet(1.0, 2.0).unwrap();
        let r = equivariance_check(&g, 0.0, 1.0, &small(5), &IntegratorSettings::with_dt(0.02)).unwrap();
        // Monotone 1D flows carry quantiles to quantiles.
        assert!((r.distances["ks"] - r.distances["ks_t0_self"]).abs() < 2e-3, "{r:?}");
        assert!(r.distances.contains_key("ks_augmented+"));
    }

    #[test]
    fn reports_are_reproducible() {
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let sup = make_superposition(vec![
            (c, make_harmonic_oscillator_1d(0, 1.0).unwrap()),
            (c, make_harmonic_oscillator_1d(1, 1.0).unwrap()),
        ])
        .unwrap();
        let s = SamplerSettings {
            n_samples: 500,
            ..small(9)
        };
        let i = IntegratorSettings::with_dt(0.05);
        let a = equivariance_check(&sup, 0.0, 1.0, &s, &i).unwrap();
        let b = equivariance_check(&sup, 0.0, 1.0, &s, &i).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn rejects_multi_coordinate_models() {
        let h = make_hydrogenlike(Orbital::S1, 1.0).unwrap();
        assert!(matches!(
            equivariance_check(&h, 0.0, 1.0, &small(1), &IntegratorSettings::default()),
            Err(Error::Usage(_))
        ));
    }
}
