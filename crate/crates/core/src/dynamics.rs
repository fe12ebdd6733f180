//! Particle trajectories under the Bohm velocity `v_i` or the augmented
//! velocity `v_i + u_i±`.
//!
//! Integration is fixed-step classical RK4. A nominal step is split by
//! halving (at most [`MAX_HALVINGS`] times) whenever a stage velocity exceeds
//! `speed_ceiling`, a stage moves a particle farther than `max_displacement`,
//! or a stage lands where the density is below `node_epsilon`. If halving
//! cannot produce an acceptable step the trajectory ends with
//! [`Termination::NodeAbort`]: in the catalog models unbounded velocities only
//! occur next to nodes of Υ.

use serde::Serialize;

use crate::fields::{bohm_of, osmotic_of, Branch, EnergyBudget, FieldEvaluator};
use crate::states::{ParticleConfig, WavefunctionModel};
use crate::{Error, Result};

pub const MAX_HALVINGS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VelocityMode {
    /// `v_i = ∇_iS/m`.
    Bohm,
    /// `v_i + u_i±` for the chosen branch.
    Augmented(Branch),
}

impl VelocityMode {
    pub fn name(self) -> &'static str {
        match self {
            VelocityMode::Bohm => "bohm",
            VelocityMode::Augmented(Branch::Plus) => "augmented+",
            VelocityMode::Augmented(Branch::Minus) => "augmented-",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bohm" => Some(VelocityMode::Bohm),
            "augmented+" => Some(VelocityMode::Augmented(Branch::Plus)),
            "augmented-" => Some(VelocityMode::Augmented(Branch::Minus)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub scheme: Scheme,
    pub node_epsilon: f64,
    pub max_steps: usize,
    pub speed_ceiling: f64,
    /// Largest per-stage displacement of any coordinate, in bohr.
    pub max_displacement: f64,
    /// Store an energy budget every this many steps; 0 stores none.
    pub store_every: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            scheme: Scheme::Rk4,
            node_epsilon: crate::fields::DEFAULT_NODE_EPSILON,
            max_steps: 10_000_000,
            speed_ceiling: 1e3,
            max_displacement: 0.1,
            store_every: 0,
        }
    }
}

impl IntegratorSettings {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.dt) {
            return Err(Error::Usage(format!("dt must be positive, got {}", self.dt)));
        }
        if self.max_steps == 0 {
            return Err(Error::Usage("max_steps must be at least 1".into()));
        }
        if !positive(self.speed_ceiling) || !positive(self.max_displacement) {
            return Err(Error::Usage("speed_ceiling and max_displacement must be positive".into()));
        }
        if !(self.node_epsilon >= 0.0) {
            return Err(Error::Usage("node_epsilon must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    NodeAbort,
    StepLimit,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::NodeAbort => "node_abort",
            Termination::StepLimit => "step_limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub config: ParticleConfig,
    /// Velocity of each particle at `(config, t)`.
    pub velocity: Vec<Vec<f64>>,
    pub budget: Option<EnergyBudget>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub mode: VelocityMode,
    pub points: Vec<TrajectoryPoint>,
    pub termination: Termination,
    /// The model's exact energy, when stationary.
    pub reference_energy: Option<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory holds its initial point")
    }
}

/// Flat velocity field (`n·dim` components) of the chosen mode.
pub(crate) fn velocity_flat(
    model: &WavefunctionModel,
    node_epsilon: f64,
    x: &[f64],
    t: f64,
    mode: VelocityMode,
) -> Result<Vec<f64>> {
    model.check_regular(x)?;
    let jet = model.jet(x, t);
    let density = jet.density();
    if density < node_epsilon || density.is_nan() {
        return Err(Error::Node {
            density,
            epsilon: node_epsilon,
        });
    }
    let mut out = Vec::with_capacity(x.len());
    for i in 0..model.n() {
        let v = bohm_of(model, &jet, i);
        match mode {
            VelocityMode::Bohm => out.extend(v),
            VelocityMode::Augmented(branch) => {
                let u = osmotic_of(model, &jet, i, branch);
                out.extend(v.iter().zip(&u).map(|(a, b)| a + b));
            }
        }
    }
    Ok(out)
}

fn split(flat: &[f64], dim: usize) -> Vec<Vec<f64>> {
    flat.chunks(dim).map(<[f64]>::to_vec).collect()
}

/// Velocity of every particle: `v_i` in Bohm mode, `v_i + u_i±` when augmented.
pub fn total_velocity(
    model: &WavefunctionModel,
    config: &ParticleConfig,
    t: f64,
    mode: VelocityMode,
) -> Result<Vec<Vec<f64>>> {
    model.check_config(config)?;
    let flat = velocity_flat(model, crate::fields::DEFAULT_NODE_EPSILON, config.coords(), t, mode)?;
    Ok(split(&flat, model.dim()))
}

enum StepFailure {
    TooFast,
    Node,
}

struct Rk4<'a> {
    model: &'a WavefunctionModel,
    mode: VelocityMode,
    settings: &'a IntegratorSettings,
}

impl Rk4<'_> {
    fn field(&self, x: &[f64], t: f64) -> std::result::Result<Vec<f64>, StepFailure> {
        match velocity_flat(self.model, self.settings.node_epsilon, x, t, self.mode) {
            Ok(v) => {
                let dim = self.model.dim();
                let too_fast = v
                    .chunks(dim)
                    .any(|p| p.iter().map(|c| c * c).sum::<f64>().sqrt() > self.settings.speed_ceiling);
                if too_fast || v.iter().any(|c| !c.is_finite()) {
                    Err(StepFailure::TooFast)
                } else {
                    Ok(v)
                }
            }
            Err(_) => Err(StepFailure::Node),
        }
    }

    fn stage(&self, x: &[f64], k: &[f64], scale: f64) -> std::result::Result<Vec<f64>, StepFailure> {
        let limit = self.settings.max_displacement;
        if k.iter().any(|c| (c * scale).abs() > limit) {
            return Err(StepFailure::TooFast);
        }
        Ok(x.iter().zip(k).map(|(a, b)| a + scale * b).collect())
    }

    /// One RK4 step from `(x, t)` with `k1` the velocity there. Returns the
    /// new point and the velocity at it, which must itself be acceptable.
    fn step(
        &self,
        x: &[f64],
        k1: &[f64],
        t: f64,
        h: f64,
    ) -> std::result::Result<(Vec<f64>, Vec<f64>), StepFailure> {
        let k2 = self.field(&self.stage(x, k1, 0.5 * h)?, t + 0.5 * h)?;
        let k3 = self.field(&self.stage(x, &k2, 0.5 * h)?, t + 0.5 * h)?;
        let k4 = self.field(&self.stage(x, &k3, h)?, t + h)?;
        let incr: Vec<f64> = (0..x.len())
            .map(|c| (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]) / 6.0)
            .collect();
        let next = self.stage(x, &incr, h)?;
        let v = self.field(&next, t + h)?;
        Ok((next, v))
    }
}

/// Runs the stepping loop, calling `visit(step, x, t, v)` after every
/// nominal step. Returns the final state, its velocity and the termination.
fn advance(
    model: &WavefunctionModel,
    x0: &[f64],
    t0: f64,
    t1: f64,
    mode: VelocityMode,
    settings: &IntegratorSettings,
    initial_velocity: Vec<f64>,
    mut visit: impl FnMut(usize, &[f64], f64, &[f64]) -> Result<()>,
) -> Result<(Vec<f64>, Termination)> {
    let rk4 = Rk4 { model, mode, settings };
    let n_steps = (((t1 - t0) / settings.dt) - 1e-9).ceil().max(1.0) as usize;
    let mut x = x0.to_vec();
    let mut v = initial_velocity;
    let mut t = t0;
    for step in 1..=n_steps {
        if step > settings.max_steps {
            return Ok((x, Termination::StepLimit));
        }
        let target = if step == n_steps { t1 } else { t0 + step as f64 * settings.dt };
        let mut h = target - t;
        let mut halvings = 0;
        while t < target {
            let remaining = target - t;
            let landing = h >= remaining;
            let h_try = if landing { remaining } else { h };
            match rk4.step(&x, &v, t, h_try) {
                Ok((next, v_next)) => {
                    x = next;
                    v = v_next;
                    t = if landing { target } else { t + h_try };
                }
                // Halving cannot tame the velocity: the particle sits next to a node.
                Err(StepFailure::Node | StepFailure::TooFast) if halvings == MAX_HALVINGS => {
                    return Ok((x, Termination::NodeAbort));
                }
                Err(_) => {
                    halvings += 1;
                    h = 0.5 * h_try;
                }
            }
        }
        visit(step, &x, t, &v)?;
    }
    Ok((x, Termination::Completed))
}

fn prepare(
    model: &WavefunctionModel,
    x0: &ParticleConfig,
    t0: f64,
    t1: f64,
    mode: VelocityMode,
    settings: &IntegratorSettings,
) -> Result<Vec<f64>> {
    settings.validate()?;
    model.check_config(x0)?;
    if !(t1 > t0) {
        return Err(Error::Usage(format!("t1 ({t1}) must exceed t0 ({t0})")));
    }
    velocity_flat(model, settings.node_epsilon, x0.coords(), t0, mode)
}

/// Integrates `dx/dt = total_velocity(x, t)` from `t0` to `t1`.
///
/// Points are recorded at `t0` and after every nominal step of `dt`; the last
/// step is shortened so the final time is exactly `t1`.
pub fn integrate_trajectory(
    model: &WavefunctionModel,
    x0: &ParticleConfig,
    t0: f64,
    t1: f64,
    mode: VelocityMode,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    let initial = prepare(model, x0, t0, t1, mode, settings)?;
    let evaluator = FieldEvaluator::with_node_epsilon(settings.node_epsilon);
    let dim = model.dim();
    let record = |x: &[f64], t: f64, v: &[f64], step: usize| -> Result<TrajectoryPoint> {
        let config = ParticleConfig::from_flat(dim, x.to_vec())?.with_spins(x0.spins().to_vec())?;
        let store = settings.store_every > 0 && step.is_multiple_of(settings.store_every);
        let budget = if store {
            evaluator.energy_budget(model, &config, t).ok()
        } else {
            None
        };
        Ok(TrajectoryPoint {
            t,
            config,
            velocity: split(v, dim),
            budget,
        })
    };
    let mut points = vec![record(x0.coords(), t0, &initial, 0)?];
    let (_, termination) = advance(model, x0.coords(), t0, t1, mode, settings, initial, |step, x, t, v| {
        points.push(record(x, t, v, step)?);
        Ok(())
    })?;
    Ok(Trajectory {
        mode,
        points,
        termination,
        reference_energy: model.energy(),
    })
}

/// Final configuration and termination of a trajectory, without storing
/// intermediate points. Matches the last point of [`integrate_trajectory`].
pub fn propagate(
    model: &WavefunctionModel,
    x0: &ParticleConfig,
    t0: f64,
    t1: f64,
    mode: VelocityMode,
    settings: &IntegratorSettings,
) -> Result<(ParticleConfig, Termination)> {
    let initial = prepare(model, x0, t0, t1, mode, settings)?;
    let (x, termination) = advance(model, x0.coords(), t0, t1, mode, settings, initial, |_, _, _, _| Ok(()))?;
    Ok((ParticleConfig::from_flat(model.dim(), x)?.with_spins(x0.spins().to_vec())?, termination))
}

/// Largest deviation of the stored budget totals from the exact energy.
pub fn budget_drift(trajectory: &Trajectory) -> Result<f64> {
    let energy = trajectory
        .reference_energy
        .ok_or_else(|| Error::Usage("budget drift needs a stationary model".into()))?;
    let mut stored = trajectory.points.iter().filter_map(|p| p.budget.as_ref()).peekable();
    if stored.peek().is_none() {
        return Err(Error::Usage("trajectory carries no energy budgets".into()));
    }
    Ok(stored.map(|b| (b.total() - energy).abs()).fold(0.0, f64::max))
}
