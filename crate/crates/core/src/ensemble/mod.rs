//! Sampling, quadrature and the integral-level checks: kinetic-energy
//! equality, vanishing pressure integrals and equivariance of ensembles.

use std::collections::BTreeMap;

use serde::Serialize;

mod checks;
mod equivariance;
pub mod quadrature;
pub mod sampler;
pub mod stats;

pub use checks::{kinetic_expectation_check, pressure_integral_check, KINETIC_TOLERANCE, PRESSURE_TOLERANCE};
pub use equivariance::{equivariance_check, CONTROL_SEEDS, NODE_ABORT_WARNING};
pub use quadrature::{Frame, QuadratureSpec, Rule};
pub use sampler::{sample_density, SampleSet, SamplerSettings};

/// A pass/fail outcome together with the tolerance it was judged against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PassFlag {
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl PassFlag {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(value: f64, tolerance: f64) -> Self {
        Self {
            passed: value <= tolerance,
            value,
            tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleReport {
    pub check: String,
    pub model: String,
    pub seed: Option<u64>,
    pub acceptance_rate: Option<f64>,
    pub values: BTreeMap<String, f64>,
    pub distances: BTreeMap<String, f64>,
    pub pass_flags: BTreeMap<String, PassFlag>,
    pub warnings: Vec<String>,
}

impl EnsembleReport {
    pub fn new(check: &str, model: &str) -> Self {
        Self {
            check: check.into(),
            model: model.into(),
            seed: None,
            acceptance_rate: None,
            values: BTreeMap::new(),
            distances: BTreeMap::new(),
            pass_flags: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    pub fn value(&mut self, key: &str, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub fn distance(&mut self, key: &str, v: f64) {
        self.distances.insert(key.into(), v);
    }

    pub fn flag(&mut self, key: &str, flag: PassFlag) {
        self.pass_flags.insert(key.into(), flag);
    }

    /// True when every pass flag passed.
    pub fn passed(&self) -> bool {
        self.pass_flags.values().all(|f| f.passed)
    }
}
