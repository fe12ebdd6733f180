//! Tensor-product quadrature over truncated configuration space.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::states::{OneBodyPotential, WavefunctionModel};
use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z_old = z;
            z = z_old - p1 / dp;
            if (z - z_old).abs() <= 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `points`-node Gauss–Legendre on each of `panels` equal sub-intervals of `[a, b]`.
pub fn composite_gauss_legendre(a: f64, b: f64, points: usize, panels: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(points);
    let width = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * width;
            nodes
                .iter()
                .zip(&weights)
                .map(move |(x, w)| (lo + 0.5 * width * (x + 1.0), 0.5 * width * w))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Trapezoid rule with `points` equally spaced nodes, endpoints included.
pub fn trapezoid(a: f64, b: f64, points: usize) -> Vec<(f64, f64)> {
    assert!(points >= 2, "trapezoid rule needs two nodes");
    let h = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|k| {
            let w = if k == 0 || k == points - 1 { 0.5 * h } else { h };
            (a + k as f64 * h, w)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    GaussLegendre,
    Trapezoid,
}

/// Coordinates the tensor grid is laid out in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// One axis per configuration coordinate.
    Cartesian,
    /// One particle in 3D: radius on `[lower[0], upper[0]]`, Gauss–Legendre
    /// in cos θ and the midpoint rule in φ.
    Spherical,
    /// Two particles in 3D, written as centre `R = (r₁+r₂)/2` and separation
    /// `r = r₁-r₂`. Axes are `|R|`, `|r|` and the cosine of their angle, so
    /// the integrand must be invariant under joint rotations of both
    /// particles (true for any scalar built from an s-wave state).
    PairRelative,
}

/// A tensor-product rule over a box in the chosen frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub frame: Frame,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Nodes per panel (Gauss–Legendre) or in total (trapezoid).
    pub points_per_dim: usize,
    pub panels: usize,
    /// Gauss–Legendre nodes in cos θ for the spherical frames.
    pub angular_points: usize,
    pub rule: Rule,
    /// Relative density below which the automatic box stops.
    pub tail_threshold: f64,
}

pub const DEFAULT_TAIL_THRESHOLD: f64 = 1e-12;
const SCAN_LIMIT: f64 = 100.0;
const SCAN_STEP: f64 = 0.025;
const PAD: f64 = 0.2;

fn upsilon(model: &WavefunctionModel, x: &[f64], t: f64) -> f64 {
    model.jet(x, t).density()
}

/// Per-coordinate extent where `Υ ≥ threshold · max Υ`, scanned along each
/// axis through two base points (the origin and all coordinates at ½) and
/// padded by 20% of the half-width on each side.
pub fn axis_extent(model: &WavefunctionModel, t: f64, threshold: f64) -> (Vec<f64>, Vec<f64>) {
    let m = model.coordinate_count();
    let steps = (2.0 * SCAN_LIMIT / SCAN_STEP).round() as usize;
    let mut scans = Vec::with_capacity(m);
    let mut peak: f64 = 0.0;
    for axis in 0..m {
        let mut rows = Vec::with_capacity(2);
        for base in [0.0, 0.5] {
            let mut x = vec![base; m];
            let row: Vec<(f64, f64)> = (0..=steps)
                .map(|k| {
                    let s = -SCAN_LIMIT + k as f64 * SCAN_STEP;
                    x[axis] = s;
                    (s, upsilon(model, &x, t))
                })
                .collect();
            peak = row.iter().fold(peak, |acc, &(_, v)| if v.is_finite() { acc.max(v) } else { acc });
            rows.push(row);
        }
        scans.push(rows);
    }
    let cut = threshold * peak;
    let mut lower = Vec::with_capacity(m);
    let mut upper = Vec::with_capacity(m);
    for rows in &scans {
        let above = rows.iter().flatten().filter(|&&(_, v)| v >= cut).map(|&(s, _)| s);
        let (lo, hi) = above.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-1.0, 1.0) };
        let pad = PAD * 0.5 * (hi - lo).max(SCAN_STEP);
        lower.push(lo - pad);
        upper.push(hi + pad);
    }
    (lower, upper)
}

/// Largest radius along `directions` where `Υ ≥ threshold · max Υ`, padded by 20%.
fn radial_extent(threshold: f64, directions: usize, mut density: impl FnMut(usize, f64) -> f64) -> f64 {
    let steps = (SCAN_LIMIT / SCAN_STEP).round() as usize;
    let mut rows = Vec::new();
    let mut peak: f64 = 0.0;
    for d in 0..directions {
        let row: Vec<(f64, f64)> = (0..steps)
            .map(|k| {
                let r = (k as f64 + 0.5) * SCAN_STEP;
                (r, density(d, r))
            })
            .collect();
        peak = row.iter().fold(peak, |acc, &(_, v)| if v.is_finite() { acc.max(v) } else { acc });
        rows.push(row);
    }
    let cut = threshold * peak;
    let reach = rows
        .iter()
        .flatten()
        .filter(|&&(_, v)| v >= cut)
        .map(|&(r, _)| r)
        .fold(SCAN_STEP, f64::max);
    reach * (1.0 + PAD)
}

const RAYS: [[f64; 3]; 7] = [
    [1.0, 0.0, 0.0],
    [-1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, -1.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0],
    [0.577_350_269_189_625_8, 0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
];

impl QuadratureSpec {
    /// Picks a frame and box for `model` at time `t`.
    ///
    /// One-dimensional systems with up to three coordinates get a Cartesian
    /// grid, a single 3D particle a spherical grid, and a 3D pair with a pair
    /// interaction the centre/separation grid. Other shapes are rejected.
    pub fn auto(model: &WavefunctionModel, t: f64) -> Result<Self> {
        let threshold = DEFAULT_TAIL_THRESHOLD;
        let (n, dim) = (model.n(), model.dim());
        let spec = match (n, dim) {
            (_, 1) if n <= 3 => {
                let (lower, upper) = axis_extent(model, t, threshold);
                let (points, panels) = match n {
                    1 => (32, 4),
                    2 => (24, 2),
                    _ => (16, 2),
                };
                QuadratureSpec {
                    frame: Frame::Cartesian,
                    lower,
                    upper,
                    points_per_dim: points,
                    panels,
                    angular_points: 0,
                    rule: Rule::GaussLegendre,
                    tail_threshold: threshold,
                }
            }
            (1, 3) => {
                let rmax = radial_extent(threshold, RAYS.len(), |d, r| {
                    let x: Vec<f64> = RAYS[d].iter().map(|c| c * r).collect();
                    upsilon(model, &x, t)
                });
                QuadratureSpec {
                    frame: Frame::Spherical,
                    lower: vec![0.0],
                    upper: vec![rmax],
                    points_per_dim: 32,
                    panels: 4,
                    angular_points: 12,
                    rule: Rule::GaussLegendre,
                    tail_threshold: threshold,
                }
            }
            (2, 3) if model.potential().pair_interaction => {
                // Centre of mass along one ray (separation zero), separation
                // along one ray (centre at the origin).
                let centre = radial_extent(threshold, 1, |_, r| upsilon(model, &[0.0, 0.0, r, 0.0, 0.0, r], t));
                let separation = radial_extent(threshold, 1, |_, r| {
                    upsilon(model, &[0.0, 0.0, 0.5 * r, 0.0, 0.0, -0.5 * r], t)
                });
                QuadratureSpec {
                    frame: Frame::PairRelative,
                    lower: vec![0.0, 0.0],
                    upper: vec![centre, separation],
                    points_per_dim: 24,
                    panels: 2,
                    angular_points: 16,
                    rule: Rule::GaussLegendre,
                    tail_threshold: threshold,
                }
            }
            _ => {
                return Err(Error::Usage(format!(
                    "no automatic quadrature for {} ({n} particles in {dim}D)",
                    model.label()
                )))
            }
        };
        spec.validate(model)?;
        Ok(spec)
    }

    /// Number of box axes the frame expects for `model`.
    fn axis_count(&self, model: &WavefunctionModel) -> Result<usize> {
        match self.frame {
            Frame::Cartesian => Ok(model.coordinate_count()),
            Frame::Spherical if model.n() == 1 && model.dim() == 3 => Ok(1),
            Frame::PairRelative if model.n() == 2 && model.dim() == 3 => Ok(2),
            frame => Err(Error::Usage(format!(
                "{frame:?} frame does not fit {} particles in {}D",
                model.n(),
                model.dim()
            ))),
        }
    }

    pub fn validate(&self, model: &WavefunctionModel) -> Result<()> {
        let axes = self.axis_count(model)?;
        if self.lower.len() != axes || self.upper.len() != axes {
            return Err(Error::Usage(format!("quadrature box needs {axes} bounds")));
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Usage(format!("invalid quadrature bounds [{lo}, {hi}]")));
            }
        }
        if self.frame != Frame::Cartesian && self.lower.iter().any(|&r| r < 0.0) {
            return Err(Error::Usage("radial bounds must be non-negative".into()));
        }
        match self.rule {
            Rule::GaussLegendre if self.points_per_dim < 8 => {
                return Err(Error::Usage("gauss_legendre needs points_per_dim >= 8".into()))
            }
            Rule::Trapezoid if self.points_per_dim < 2 => {
                return Err(Error::Usage("trapezoid needs points_per_dim >= 2".into()))
            }
            _ => {}
        }
        if self.panels == 0 {
            return Err(Error::Usage("panels must be at least 1".into()));
        }
        if self.frame != Frame::Cartesian && self.angular_points < 2 {
            return Err(Error::Usage("angular_points must be at least 2".into()));
        }
        if !(self.tail_threshold > 0.0 && self.tail_threshold < 1.0) {
            return Err(Error::Usage("tail_threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn axis_rule(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        match self.rule {
            Rule::GaussLegendre => composite_gauss_legendre(lo, hi, self.points_per_dim, self.panels),
            Rule::Trapezoid => trapezoid(lo, hi, self.points_per_dim),
        }
    }

    fn axes(&self) -> Vec<Vec<(f64, f64)>> {
        let mut axes: Vec<Vec<(f64, f64)>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| self.axis_rule(lo, hi))
            .collect();
        match self.frame {
            Frame::Cartesian => {}
            Frame::Spherical => {
                axes.push(composite_gauss_legendre(-1.0, 1.0, self.angular_points, 1));
                let m = 2 * self.angular_points;
                let dphi = 2.0 * PI / m as f64;
                axes.push((0..m).map(|k| ((k as f64 + 0.5) * dphi, dphi)).collect());
            }
            Frame::PairRelative => axes.push(composite_gauss_legendre(-1.0, 1.0, self.angular_points, 1)),
        }
        axes
    }

    /// Total number of integrand evaluations.
    pub fn node_count(&self) -> usize {
        self.axes().iter().map(Vec::len).product()
    }
}

/// Maps grid parameters to a configuration, returning the Jacobian.
fn place(frame: Frame, u: &[f64], x: &mut [f64]) -> f64 {
    match frame {
        Frame::Cartesian => {
            x.copy_from_slice(u);
            1.0
        }
        Frame::Spherical => {
            let (r, mu, phi) = (u[0], u[1], u[2]);
            let s = (1.0 - mu * mu).max(0.0).sqrt();
            x[0] = r * s * phi.cos();
            x[1] = r * s * phi.sin();
            x[2] = r * mu;
            r * r
        }
        Frame::PairRelative => {
            let (big, small, mu) = (u[0], u[1], u[2]);
            let s = (1.0 - mu * mu).max(0.0).sqrt();
            let rel = [small * s, 0.0, small * mu];
            for k in 0..3 {
                let centre = if k == 2 { big } else { 0.0 };
                x[k] = centre + 0.5 * rel[k];
                x[3 + k] = centre - 0.5 * rel[k];
            }
            // Solid angle of the centre direction times the azimuth of the
            // separation about it.
            8.0 * PI * PI * big * big * small * small
        }
    }
}

/// Integrates `outputs` functions at once. `f(x, out)` receives a flat
/// configuration and adds nothing itself: it writes the integrand values into
/// `out`, which the caller weights and accumulates.
///
/// Grid tiles along the first axis are evaluated in parallel and their
/// partial sums added in a fixed order, so results do not depend on the
/// number of threads.
pub fn integrate<F>(spec: &QuadratureSpec, model: &WavefunctionModel, outputs: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    spec.validate(model)?;
    let axes = spec.axes();
    let coords = model.coordinate_count();
    let frame = spec.frame;
    let partials: Vec<Vec<f64>> = axes[0]
        .par_iter()
        .map(|&(u0, w0)| {
            let mut sum = vec![0.0; outputs];
            let mut out = vec![0.0; outputs];
            let mut u = vec![0.0; axes.len()];
            let mut x = vec![0.0; coords];
            let mut index = vec![0usize; axes.len()];
            u[0] = u0;
            loop {
                let mut w = w0;
                for a in 1..axes.len() {
                    let (node, weight) = axes[a][index[a]];
                    u[a] = node;
                    w *= weight;
                }
                let jac = place(frame, &u, &mut x);
                out.iter_mut().for_each(|o| *o = 0.0);
                f(&x, &mut out);
                for (s, o) in sum.iter_mut().zip(&out) {
                    *s += w * jac * o;
                }
                // Odometer over the remaining axes.
                let mut a = axes.len();
                loop {
                    a -= 1;
                    if a == 0 {
                        return sum;
                    }
                    index[a] += 1;
                    if index[a] < axes[a].len() {
                        break;
                    }
                    index[a] = 0;
                }
            }
        })
        .collect();
    let mut total = vec![0.0; outputs];
    for p in &partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total)
}

/// `∫Υ` over the box.
pub fn norm(spec: &QuadratureSpec, model: &WavefunctionModel, t: f64) -> Result<f64> {
    Ok(integrate(spec, model, 1, |x, out| out[0] = upsilon(model, x, t))?[0])
}

/// Exact `⟨T⟩` from the virial theorem when every potential term is a pure
/// power law of one kind: `Ē/2` for harmonic wells, `-Ē` for Coulomb centres.
pub fn virial_kinetic(model: &WavefunctionModel) -> Option<f64> {
    let energy = model.energy()?;
    let potential = model.potential();
    if potential.pair_interaction || !model.is_normalizable() {
        return None;
    }
    let all = |pred: fn(&OneBodyPotential) -> bool| potential.external.iter().all(pred);
    if all(|v| matches!(v, OneBodyPotential::Harmonic { .. })) {
        Some(0.5 * energy)
    } else if all(|v| matches!(v, OneBodyPotential::Coulomb { .. })) {
        Some(-energy)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::*;
    use num_complex::Complex64;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 13, 32] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for degree in 0..2 * n {
                let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(degree as i32)).sum();
                let exact = if degree % 2 == 1 { 0.0 } else { 2.0 / (degree as f64 + 1.0) };
                assert!((quad - exact).abs() < 1e-14, "n={n} degree={degree}: {quad} vs {exact}");
            }
        }
    }

    #[test]
    fn composite_rules_integrate_exponential() {
        let exact = 1.0 - (-3.0f64).exp();
        let gl: f64 = composite_gauss_legendre(0.0, 3.0, 8, 3).iter().map(|(x, w)| w * (-x).exp()).sum();
        assert_relative_eq!(gl, exact, max_relative = 1e-14);
        let tr: f64 = trapezoid(0.0, 3.0, 2001).iter().map(|(x, w)| w * (-x).exp()).sum();
        assert_relative_eq!(tr, exact, max_relative = 1e-6);
    }

    #[test]
    fn auto_boxes_normalize_the_catalog() {
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let models = vec![
            make_harmonic_oscillator_1d(0, 1.0).unwrap(),
            make_harmonic_oscillator_1d(3, 2.0).unwrap(),
            make_hydrogenlike(Orbital::S1, 1.0).unwrap(),
            make_hydrogenlike(Orbital::S2, 1.0).unwrap(),
            make_hydrogenlike(Orbital::Pz2, 2.0).unwrap(),
            make_free_gaussian_packet(1.0, 2.0).unwrap(),
            make_hookes_atom(),
            make_superposition(vec![
                (c, make_harmonic_oscillator_1d(0, 1.0).unwrap()),
                (c, make_harmonic_oscillator_1d(1, 1.0).unwrap()),
            ])
            .unwrap(),
            make_product_state(vec![
                make_harmonic_oscillator_1d(0, 1.0).unwrap(),
                make_harmonic_oscillator_1d(1, 1.0).unwrap(),
            ])
            .unwrap(),
        ];
        for model in &models {
            for t in [0.0, 1.3] {
                let spec = QuadratureSpec::auto(model, t).unwrap();
                let n = norm(&spec, model, t).unwrap();
                assert!((n - 1.0).abs() <= 1e-8, "{}: ∫Υ = {n}", model.label());
            }
        }
    }

    #[test]
    fn free_gaussian_box_follows_the_packet() {
        let g = make_free_gaussian_packet(1.0, 2.0).unwrap();
        let spec = QuadratureSpec::auto(&g, 3.0).unwrap();
        let centre = 0.5 * (spec.lower[0] + spec.upper[0]);
        assert!((centre - 6.0).abs() < 0.1, "centre {centre}");
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let h = make_hydrogenlike(Orbital::S2, 1.0).unwrap();
        let spec = QuadratureSpec::auto(&h, 0.0).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| norm(&spec, &h, 0.0).unwrap());
        let b = four.install(|| norm(&spec, &h, 0.0).unwrap());
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn spec_validation() {
        let ho = make_harmonic_oscillator_1d(0, 1.0).unwrap();
        let mut spec = QuadratureSpec::auto(&ho, 0.0).unwrap();
        spec.points_per_dim = 6;
        assert!(matches!(spec.validate(&ho), Err(Error::Usage(_))));
        spec.points_per_dim = 16;
        spec.lower[0] = spec.upper[0];
        assert!(spec.validate(&ho).is_err());
        spec.lower[0] = -5.0;
        spec.frame = Frame::Spherical;
        assert!(spec.validate(&ho).is_err());
        let planar = make_product_state(vec![
            make_harmonic_oscillator_1d(0, 1.0).unwrap(),
            make_harmonic_oscillator_1d(0, 1.0).unwrap(),
            make_harmonic_oscillator_1d(0, 1.0).unwrap(),
            make_harmonic_oscillator_1d(0, 1.0).unwrap(),
        ])
        .unwrap();
        assert!(QuadratureSpec::auto(&planar, 0.0).is_err());
    }

    #[test]
    fn trapezoid_rule_is_accepted() {
        let ho = make_harmonic_oscillator_1d(1, 1.0).unwrap();
        let mut spec = QuadratureSpec::auto(&ho, 0.0).unwrap();
        spec.rule = Rule::Trapezoid;
        spec.points_per_dim = 801;
        assert_relative_eq!(norm(&spec, &ho, 0.0).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn virial_values() {
        assert_eq!(virial_kinetic(&make_harmonic_oscillator_1d(2, 1.0).unwrap()), Some(1.25));
        assert_eq!(virial_kinetic(&make_hydrogenlike(Orbital::S1, 1.0).unwrap()), Some(0.5));
        assert_eq!(virial_kinetic(&make_hookes_atom()), None);
        assert_eq!(virial_kinetic(&make_free_gaussian_packet(1.0, 0.0).unwrap()), None);
    }
}
