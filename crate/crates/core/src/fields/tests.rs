use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::sync::Arc;

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::qmc::Halton;
use crate::states::*;

fn ho(n: usize) -> WavefunctionModel {
    make_harmonic_oscillator_1d(n, 1.0).unwrap()
}

fn h1s() -> WavefunctionModel {
    make_hydrogenlike(Orbital::S1, 1.0).unwrap()
}

fn x1(x: f64) -> ParticleConfig {
    ParticleConfig::from_flat(1, vec![x]).unwrap()
}

fn x3(x: f64, y: f64, z: f64) -> ParticleConfig {
    ParticleConfig::from_flat(3, vec![x, y, z]).unwrap()
}

fn ho01() -> WavefunctionModel {
    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    make_superposition(vec![(c, ho(0)), (c, ho(1))]).unwrap()
}

fn gauss() -> WavefunctionModel {
    make_free_gaussian_packet(1.0, 2.0).unwrap()
}

#[test]
fn density_examples() {
    assert_relative_eq!(density(&ho(0), &x1(0.0), 0.0).unwrap(), PI.powf(-0.5), max_relative = 1e-14);
    assert_eq!(density(&ho(1), &x1(0.0), 0.0).unwrap(), 0.0);
    assert_relative_eq!(
        density(&h1s(), &x3(0.0, 1.0, 0.0), 0.0).unwrap(),
        (-2.0f64).exp() / PI,
        max_relative = 1e-14
    );
}

#[test]
fn osmotic_examples() {
    let u = osmotic_velocity(&ho(0), &x1(0.7), 0.0, 0, Branch::Plus).unwrap();
    assert_relative_eq!(u[0], -0.7, max_relative = 1e-14);

    let r: [f64; 3] = [0.3, -1.1, 2.0];
    let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    let u = osmotic_velocity(&h1s(), &x3(r[0], r[1], r[2]), 0.4, 0, Branch::Minus).unwrap();
    for k in 0..3 {
        assert_relative_eq!(u[k], r[k] / norm, max_relative = 1e-14);
    }

    // Packet centre moves with the group velocity ħk₀/m = 2.
    let t = 0.8;
    let u = osmotic_velocity(&gauss(), &x1(2.0 * t), t, 0, Branch::Plus).unwrap();
    assert!(u[0].abs() < 1e-15);
}

#[test]
fn osmotic_matches_density_gradient_form() {
    // u₊ = (ħ/2m)∇Υ/Υ with ∇Υ from central differences of |Ψ|².
    let model = ho01();
    let h = 1e-5;
    for &(x, t) in &[(0.3, 0.2), (-1.1, 1.7), (0.9, 3.0)] {
        let up = |x: f64| model.value(&[x], t).norm_sqr();
        let grad = (up(x + h) - up(x - h)) / (2.0 * h);
        let u = osmotic_velocity(&model, &x1(x), t, 0, Branch::Plus).unwrap();
        assert_relative_eq!(u[0], 0.5 * grad / up(x), max_relative = 1e-8);
    }
}

#[test]
fn bohm_examples() {
    let v = bohm_velocity(&h1s(), &x3(0.4, 0.2, -0.9), 3.3, 0).unwrap();
    assert_eq!(v, vec![0.0, 0.0, 0.0]);

    let v = bohm_velocity(&gauss(), &x1(0.0), 0.0, 0).unwrap();
    assert_relative_eq!(v[0], 2.0, max_relative = 1e-14);

    // Ψ'/Ψ = (-x + √2(1-x²)e^{-iωt}) / (1 + √2 x e^{-iωt}); at x=0, ωt=π/2 this is -i√2.
    let v = bohm_velocity(&ho01(), &x1(0.0), PI / 2.0, 0).unwrap();
    assert_relative_eq!(v[0], -SQRT_2, max_relative = 1e-14);
}

#[test]
fn pressure_examples() {
    assert_relative_eq!(
        pressure(&ho(0), &x1(0.0), 0.0, 0).unwrap(),
        0.5 * PI.powf(-0.5),
        max_relative = 1e-14
    );
    assert!(pressure(&ho(0), &x1(FRAC_1_SQRT_2), 0.0, 0).unwrap().abs() < 1e-16);
    assert!(pressure(&h1s(), &x3(0.0, 0.0, 1.0), 0.0, 0).unwrap().abs() < 1e-16);
    // Pressure is defined at nodes.
    assert!(pressure(&ho(1), &x1(0.0), 0.0, 0).unwrap().is_finite());
}

#[test]
fn quantum_potential_examples() {
    // Q = Ē - U for real eigenstates.
    assert_relative_eq!(quantum_potential(&ho(0), &x1(0.5), 0.0).unwrap(), 0.375, max_relative = 1e-14);
    assert_relative_eq!(quantum_potential(&ho(0), &x1(0.0), 0.0).unwrap(), 0.5, max_relative = 1e-14);
    assert!(quantum_potential(&h1s(), &x3(2.0, 0.0, 0.0), 0.0).unwrap().abs() < 1e-15);
}

#[test]
fn decomposition_examples() {
    let (ku, comp) = quantum_potential_decomposed(&ho(0), &x1(0.5), 0.0).unwrap();
    assert_relative_eq!(ku, 0.125, max_relative = 1e-14);
    assert_relative_eq!(comp, 0.25, max_relative = 1e-14);

    let (ku, comp) = quantum_potential_decomposed(&h1s(), &x3(0.0, 2.0, 0.0), 0.0).unwrap();
    assert_relative_eq!(ku, 0.5, max_relative = 1e-14);
    assert_relative_eq!(comp, -0.5, max_relative = 1e-14);

    let g = gauss();
    let (ku, comp) = quantum_potential_decomposed(&g, &x1(0.0), 0.0).unwrap();
    assert_eq!(ku, 0.0);
    assert!(comp > 0.0);
    assert_relative_eq!(ku + comp, quantum_potential(&g, &x1(0.0), 0.0).unwrap(), max_relative = 1e-14);
}

#[test]
fn budget_examples() {
    let b = energy_budget(&ho(0), &x1(0.8), 0.0).unwrap();
    assert_eq!(b.kinetic_v, 0.0);
    assert_relative_eq!(b.kinetic_u, 0.32, max_relative = 1e-14);
    assert_relative_eq!(b.compression, -0.14, max_relative = 1e-13);
    assert_relative_eq!(b.potential_u, 0.32, max_relative = 1e-14);
    assert_relative_eq!(b.minus_ds_dt, 0.5, max_relative = 1e-15);
    assert!(b.residual.abs() < 1e-15);

    let b = energy_budget(&h1s(), &x3(1.0, 0.0, 0.0), 0.0).unwrap();
    assert_eq!(b.kinetic_v, 0.0);
    assert_relative_eq!(b.kinetic_u, 0.5, max_relative = 1e-14);
    assert!(b.compression.abs() < 1e-15);
    assert_relative_eq!(b.potential_u, -1.0);
    assert_relative_eq!(b.minus_ds_dt, -0.5, max_relative = 1e-15);
    assert!(b.residual.abs() < 1e-15);
}

#[test]
fn superposition_budget_residuals() {
    let model = ho01();
    let mut halton = Halton::new(2);
    for _ in 0..50 {
        let p = halton.next_in(&[-3.0, 0.0], &[3.0, 2.0 * PI]);
        let b = match energy_budget(&model, &x1(p[0]), p[1]) {
            Ok(b) => b,
            Err(Error::Node { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        assert!(b.kinetic_v > 0.0 || p[1] == 0.0);
        assert!(b.residual.abs() <= 1e-9 * b.magnitude(), "{b:?}");
    }
}

#[test]
fn stationary_budget_examples() {
    let hooke = make_hookes_atom();
    let c = ParticleConfig::new(&[vec![0.3, 0.0, 0.0], vec![-0.2, 0.1, 0.0]]).unwrap();
    let b = stationary_budget(&hooke, &c).unwrap();
    assert_eq!(b.minus_ds_dt, 2.0);
    assert!(b.residual.abs() <= 1e-8, "{b:?}");

    let s2 = make_hydrogenlike(Orbital::S2, 1.0).unwrap();
    let b = stationary_budget(&s2, &x3(3.0, 0.0, 0.0)).unwrap();
    assert!(b.residual.abs() <= 1e-8);

    let b = stationary_budget(&ho(2), &x1(1.3)).unwrap();
    assert!(b.residual.abs() <= 1e-10);

    assert!(matches!(stationary_budget(&gauss(), &x1(0.0)), Err(Error::Usage(_))));
}

#[test]
fn hooke_schrodinger_residual() {
    // -½Σ∇²Ψ + UΨ - EΨ from the analytic Laplacians.
    let hooke = make_hookes_atom();
    let mut halton = Halton::new(6);
    let mut checked = 0;
    for _ in 0..200 {
        let x = halton.next_in(&[-2.5; 6], &[2.5; 6]);
        let jet = hooke.jet(&x, 0.0);
        if jet.value.norm() <= 1e-8 {
            continue;
        }
        let u = hooke.potential().evaluate(3, &x).unwrap();
        let h_psi = -0.5 * (jet.laplacian[0] + jet.laplacian[1]) + u * jet.value;
        let residual = (h_psi - 2.0 * jet.value).norm();
        assert!(residual <= 1e-9 * jet.value.norm(), "residual {residual} at {x:?}");
        checked += 1;
    }
    assert!(checked > 150);
}

#[test]
fn continuity_examples() {
    let eval = FieldEvaluator::default();
    for model in [ho(0), ho(3), h1s(), make_hookes_atom()] {
        let x = vec![0.41; model.coordinate_count()];
        let mut x = x;
        if model.n() == 2 {
            x[3] = -0.2;
        }
        let c = ParticleConfig::from_flat(model.dim(), x).unwrap();
        assert!(eval.continuity_residual(&model, &c, 0.7).unwrap().abs() < 1e-14);
    }
    for model in [gauss(), ho01()] {
        let mut halton = Halton::new(2);
        for _ in 0..20 {
            let p = halton.next_in(&[-2.5, 0.0], &[2.5, 3.0]);
            let c = x1(p[0]);
            let psi = model.jet(&[p[0]], p[1]);
            let d_upsilon = 2.0 * (psi.psi().conj() * psi.time_derivative).re;
            let r = continuity_residual(&model, &c, p[1]).unwrap();
            let scale = 1e-6 * d_upsilon.abs() + 1e-9 * psi.density();
            assert!(r.abs() <= scale, "{r} vs {d_upsilon} at {p:?}");
        }
    }
}

#[test]
fn fd_gradient_matches_analytic() {
    let model = ho(0);
    let c = x1(0.4);
    let fd = fd_gradient(&model, &c, 0.0, 0, 1e-4).unwrap();
    let an = model.gradient(&[0.4], 0.0, 0);
    assert!((fd.value[0] - an[0]).norm() <= 1e-7 * an[0].norm());
    assert!(fd.error_estimate < 1e-8);
    assert!((fd.richardson[0] - an[0]).norm() <= (fd.value[0] - an[0]).norm());
    assert!(matches!(fd_gradient(&model, &c, 0.0, 0, 0.0), Err(Error::Usage(_))));
}

#[derive(Debug)]
struct PlaneWave {
    k: f64,
}

impl Wavefunction for PlaneWave {
    fn value(&self, x: &[f64], _t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.k * x[0])
    }

    fn jet(&self, x: &[f64], t: f64) -> Jet {
        let psi = self.value(x, t);
        let ik = Complex64::new(0.0, self.k);
        Jet {
            phase: Complex64::new(1.0, 0.0),
            value: psi,
            gradient: vec![ik * psi],
            laplacian: vec![-self.k * self.k * psi],
            time_derivative: Complex64::new(0.0, -0.5 * self.k * self.k) * psi,
        }
    }
}

#[test]
fn fd_on_synthetic_plane_wave() {
    let potential = PotentialSpec::uniform(1, OneBodyPotential::Free, false, "free");
    let model = WavefunctionModel::custom("plane", 1, 1, Units::default(), potential, Arc::new(PlaneWave { k: 1.3 }))
        .unwrap()
        .normalizable(false);
    let c = x1(0.37);
    let h = 1e-3;
    let fd = fd_gradient(&model, &c, 0.0, 0, h).unwrap();
    let exact = Complex64::new(0.0, 1.3) * model.value(&[0.37], 0.0);
    // Central difference of e^{ikx} is exactly sin(kh)/(kh) times ikΨ.
    let leading = (1.3f64 * h).powi(2) / 6.0;
    assert!((fd.value[0] - exact).norm() <= 1.01 * leading * exact.norm());
    let v = bohm_velocity(&model, &c, 0.0, 0).unwrap();
    assert_relative_eq!(v[0], 1.3, max_relative = 1e-14);
}

#[test]
fn fd_laplacian_hydrogen() {
    let model = h1s();
    // Off the r = 2 sphere, where ∇²ψ vanishes.
    let c = x3(0.5, 0.6, 0.9);
    let fd = fd_laplacian(&model, &c, 0.0, 0, 1e-4).unwrap();
    let an = model.laplacian(&[0.5, 0.6, 0.9], 0.0, 0);
    assert!((fd.value - an).norm() <= 1e-6 * an.norm(), "{:?} vs {an}", fd.value);
}

#[test]
fn node_guard_on_first_excited_oscillator() {
    let model = ho(1);
    let eval = FieldEvaluator::default();
    for k in -40..=40 {
        let x = k as f64 * 1e-6;
        let c = x1(x);
        let rho = eval.density(&model, &c, 0.0).unwrap();
        let q = eval.quantum_potential(&model, &c, 0.0);
        let u = eval.osmotic_velocity(&model, &c, 0.0, 0, Branch::Plus);
        let b = eval.energy_budget(&model, &c, 0.0);
        if rho < eval.node_epsilon {
            assert!(matches!(q, Err(Error::Node { .. })));
            assert!(matches!(u, Err(Error::Node { .. })));
            assert!(matches!(b, Err(Error::Node { .. })));
        } else {
            assert!(q.unwrap().is_finite());
            assert!(u.unwrap()[0].is_finite());
            assert!(b.unwrap().residual.is_finite());
        }
        let s = eval.sample(&model, &c, 0.0).unwrap();
        assert_eq!(s.node_flag, rho < eval.node_epsilon);
        assert_eq!(s.q.is_none(), s.node_flag);
        assert!(s.pressure[0].is_finite());
    }
}

#[test]
fn singular_points_raise() {
    let c = x3(0.0, 0.0, 0.0);
    assert!(matches!(quantum_potential(&h1s(), &c, 0.0), Err(Error::Singularity(_))));
    assert!(matches!(pressure(&h1s(), &c, 0.0, 0), Err(Error::Singularity(_))));
    assert!(density(&h1s(), &c, 0.0).unwrap() > 0.0);
}

#[test]
fn sample_invariants() {
    let eval = FieldEvaluator::default();
    let hooke = make_hookes_atom();
    let c = ParticleConfig::new(&[vec![0.5, -0.3, 0.2], vec![-0.4, 0.6, 0.1]]).unwrap();
    let s = eval.sample(&hooke, &c, 1.2).unwrap();
    let (up, um) = (s.u_plus.unwrap(), s.u_minus.unwrap());
    for (a, b) in up.iter().flatten().zip(um.iter().flatten()) {
        assert_eq!(*a, -*b);
    }
    let g = gauss();
    let s = eval.sample(&g, &x1(0.3), 0.6).unwrap();
    assert_eq!(s.v.as_ref().unwrap()[0][0], s.grad_s.as_ref().unwrap()[0][0] / g.mass());
    assert!(s.budget.unwrap().residual.abs() < 1e-12);
}

#[test]
fn budgets_hold_in_non_atomic_units() {
    let units = Units { mass: 2.0, hbar: 0.5 };
    let models = [
        make_harmonic_oscillator_1d_in(2, 1.5, units).unwrap(),
        make_free_gaussian_packet_in(0.8, 1.1, units).unwrap(),
    ];
    for model in &models {
        for &(x, t) in &[(0.3, 0.0), (-0.7, 0.9), (1.2, 2.2)] {
            let b = energy_budget(model, &x1(x), t).unwrap();
            assert!(b.residual.abs() <= 1e-12 * b.magnitude(), "{} {b:?}", model.label());
            let q = quantum_potential(model, &x1(x), t).unwrap();
            assert_relative_eq!(q, b.kinetic_u + b.compression, max_relative = 1e-12);
        }
    }
    let h = make_hydrogenlike_in(Orbital::S2, 1.5, units).unwrap();
    let b = stationary_budget(&h, &x3(0.9, -2.0, 1.4)).unwrap();
    assert!(b.residual.abs() <= 1e-12 * b.magnitude(), "{b:?}");
}

proptest! {
    #[test]
    fn decomposition_identity_for_oscillators(level in 0usize..=12, x in -4.0f64..4.0, t in 0.0f64..10.0) {
        let model = ho(level);
        let c = x1(x);
        prop_assume!(density(&model, &c, t).unwrap() >= 1e-8);
        let q = quantum_potential(&model, &c, t).unwrap();
        let (ku, comp) = quantum_potential_decomposed(&model, &c, t).unwrap();
        prop_assert!((q - (ku + comp)).abs() <= 1e-9 * (1.0 + q.abs()));
        let b = stationary_budget(&model, &c).unwrap();
        prop_assert!(b.residual.abs() <= 1e-9 * b.magnitude());
    }

    #[test]
    fn stationary_modulus_is_time_independent(x in -3.0f64..3.0, y in -3.0f64..3.0, z in 0.1f64..3.0) {
        let model = make_hydrogenlike(Orbital::Pz2, 1.0).unwrap();
        let a = model.value(&[x, y, z], 0.0).norm();
        let b = model.value(&[x, y, z], 0.7).norm();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }
}
