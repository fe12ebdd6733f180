//! Halton low-discrepancy points for deterministic probing of fields.

use crate::ensemble::quadrature::axis_extent;
use crate::fields::DEFAULT_NODE_EPSILON;
use crate::states::{ParticleConfig, WavefunctionModel};

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// Halton sequence in `[0,1)^dims`, skipping index 0 (the origin).
#[derive(Clone, Debug)]
pub struct Halton {
    dims: usize,
    next: u64,
}

impl Halton {
    pub fn new(dims: usize) -> Self {
        assert!(dims <= PRIMES.len(), "Halton supports at most {} dimensions", PRIMES.len());
        Self { dims, next: 1 }
    }

    /// Point mapped into the box `[lower, upper]`.
    pub fn next_in(&mut self, lower: &[f64], upper: &[f64]) -> Vec<f64> {
        let p = self.next().expect("infinite sequence");
        p.iter()
            .zip(lower.iter().zip(upper))
            .map(|(u, (lo, hi))| lo + u * (hi - lo))
            .collect()
    }
}

impl Iterator for Halton {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        let idx = self.next;
        self.next += 1;
        Some(PRIMES[..self.dims].iter().map(|&b| radical_inverse(idx, b)).collect())
    }
}

/// Relative density that bounds the probe box.
const PROBE_BOX_THRESHOLD: f64 = 1e-6;
/// Probes closer than this to a Coulomb center or a pair coalescence are skipped.
pub const PROBE_CLEARANCE: f64 = 0.05;
const PROBE_ATTEMPTS: usize = 1000;

/// Deterministic `(configuration, t)` probes for pointwise identity checks.
///
/// Coordinates fill the box where `Υ(·, 0) ≥ 1e-6·max Υ`, times fill
/// `[t_range.0, t_range.1]`. Points with `Υ < relative_floor · Υ_peak` (the
/// peak taken over the first 512 Halton points) or within
/// [`PROBE_CLEARANCE`] of a singular feature are skipped, as are nodes in the
/// sense of the default `node_epsilon`. May return fewer
/// than `count` points if rejections dominate.
pub fn probe_points(
    model: &WavefunctionModel,
    count: usize,
    t_range: (f64, f64),
    relative_floor: f64,
) -> Vec<(ParticleConfig, f64)> {
    let (mut lower, mut upper) = axis_extent(model, 0.0, PROBE_BOX_THRESHOLD);
    lower.push(t_range.0);
    upper.push(t_range.1);
    let k = model.coordinate_count();
    let peak = Halton::new(k + 1)
        .take(512)
        .map(|u| {
            let p: Vec<f64> = u.iter().zip(lower.iter().zip(&upper)).map(|(u, (a, b))| a + u * (b - a)).collect();
            model.jet(&p[..k], p[k]).density()
        })
        .fold(0.0, f64::max);
    let floor = (relative_floor * peak).max(DEFAULT_NODE_EPSILON);
    let mut halton = Halton::new(k + 1);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count.saturating_mul(PROBE_ATTEMPTS) {
        if out.len() == count {
            break;
        }
        let mut p = halton.next_in(&lower, &upper);
        let t = p.pop().expect("time coordinate");
        if model.potential().clearance(model.dim(), &p) < PROBE_CLEARANCE || model.jet(&p, t).density() < floor {
            continue;
        }
        let config = ParticleConfig::from_flat(model.dim(), p).expect("shape follows the model");
        out.push((config, t));
    }
    out
}
