use std::path::{Path, PathBuf};

use serde::Serialize;

use bohmdyn::dynamics::{integrate_trajectory, IntegratorSettings};
use bohmdyn::ensemble::{
    equivariance_check, kinetic_expectation_check, pressure_integral_check, quadrature::axis_extent, sample_density,
    EnsembleReport, QuadratureSpec, SamplerSettings,
};
use bohmdyn::fields::{derivative_mismatch, FieldEvaluator};
use bohmdyn::qmc::probe_points;
use bohmdyn::states::{ParticleConfig, WavefunctionModel};
use bohmdyn::Error;

use crate::config::{EnsembleCheck, QuadratureConfig, RunConfig};
use crate::output::{num, opt, to_json, write_atomic, Csv, SCHEMA_VERSION};
use crate::state_id::{parse_state, CATALOG};
use crate::CliError;

/// Fraction of node-flagged grid rows above which a field grid is degenerate.
pub const NODE_DOMINATED: f64 = 0.9;
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-9;
pub const STATIONARY_BUDGET_TOLERANCE: f64 = 1e-8;
pub const DYNAMIC_BUDGET_TOLERANCE: f64 = 1e-8;
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;
pub const CONTINUITY_TOLERANCE: f64 = 1e-6;
/// Probe points below this fraction of the peak density are skipped.
const PROBE_FLOOR: f64 = 1e-6;

/// Output of a command: what to print and the exit status it earned.
pub struct Outcome {
    pub stdout: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, passed: true }
    }
}

fn config_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

fn model_for(state: Option<&str>, config: &RunConfig) -> Result<WavefunctionModel, CliError> {
    let id = state
        .or(config.state.as_deref())
        .ok_or_else(|| CliError::Config("no state given (argument or 'state' in the config)".into()))?;
    parse_state(id).map_err(CliError::Config)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn axis_names(dim: usize) -> &'static [&'static str] {
    match dim {
        1 => &["x"],
        2 => &["x", "y"],
        _ => &["x", "y", "z"],
    }
}

/// `p{i}_{axis}` names of every configuration coordinate, with a prefix.
fn coordinate_columns(model: &WavefunctionModel, prefix: &str) -> Vec<String> {
    (0..model.n())
        .flat_map(|i| axis_names(model.dim()).iter().map(move |a| format!("{prefix}p{i}_{a}")))
        .collect()
}

#[derive(Serialize)]
struct CatalogEntry {
    id: &'static str,
    n: usize,
    dim: usize,
    stationary: bool,
    energy: Option<f64>,
}

pub fn catalog(json: bool) -> Result<Outcome, CliError> {
    let mut entries = Vec::new();
    for id in CATALOG {
        let m = parse_state(id).map_err(CliError::Config)?;
        entries.push(CatalogEntry {
            id,
            n: m.n(),
            dim: m.dim(),
            stationary: m.is_stationary(),
            energy: m.energy(),
        });
    }
    if json {
        return Ok(Outcome::ok(to_json(&entries) + "\n"));
    }
    let mut out = String::new();
    for e in &entries {
        let energy = e.energy.map(|v| format!("E={v:?}")).unwrap_or_else(|| "E=-".into());
        let kind = if e.stationary { "stationary" } else { "time-dependent" };
        out.push_str(&format!("{:<20} n={} d={} {kind:<14} {energy}\n", e.id, e.n, e.dim));
    }
    Ok(Outcome::ok(out))
}

fn grid_points(model: &WavefunctionModel, config: &RunConfig) -> Result<Vec<Vec<f64>>, CliError> {
    let k = model.coordinate_count();
    let f = &config.fields;
    if let Some((from, to, count)) = &f.line {
        if from.len() != k {
            return Err(CliError::Config(format!("line endpoints need {k} coordinates, got {}", from.len())));
        }
        let count = *count;
        return Ok((0..count)
            .map(|j| {
                let s = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.0 };
                from.iter().zip(to).map(|(a, b)| a + s * (b - a)).collect()
            })
            .collect());
    }
    let axes: Vec<(f64, f64, usize)> = match &f.grid {
        Some(grid) if grid.len() == k => grid.iter().map(|a| (a.lower, a.upper, a.count)).collect(),
        Some(grid) => {
            return Err(CliError::Config(format!("grid has {} axes, {} needs {k}", grid.len(), model.label())))
        }
        None => {
            // Even counts keep symmetric grids off the origin.
            let count = match k {
                1 => 200,
                2 => 50,
                3 => 20,
                _ => {
                    return Err(CliError::Config(format!(
                        "{} has {k} coordinates; give [fields] grid or a line",
                        model.label()
                    )))
                }
            };
            let (lo, hi) = axis_extent(model, f.t, 1e-6);
            lo.into_iter().zip(hi).map(|(a, b)| (a, b, count)).collect()
        }
    };
    let total: usize = axes.iter().map(|a| a.2).product();
    if total > 10_000_000 {
        return Err(CliError::Config(format!("grid of {total} points is too large")));
    }
    let mut points = Vec::with_capacity(total);
    for mut index in 0..total {
        let mut p = vec![0.0; k];
        for (c, &(lo, hi, count)) in axes.iter().enumerate().rev() {
            let j = index % count;
            index /= count;
            p[c] = if count > 1 { lo + (hi - lo) * j as f64 / (count - 1) as f64 } else { lo };
        }
        points.push(p);
    }
    Ok(points)
}

pub fn fields(state: Option<&str>, config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let model = model_for(state, config)?;
    let points = grid_points(&model, config)?;
    let t = config.fields.t;
    let evaluator = FieldEvaluator::with_node_epsilon(config.fields.node_epsilon);
    let n = model.n();

    let mut columns = vec!["t".to_string()];
    columns.extend(coordinate_columns(&model, ""));
    columns.push("upsilon".into());
    columns.extend(coordinate_columns(&model, "v_"));
    columns.extend(coordinate_columns(&model, "u_plus_"));
    columns.extend((0..n).map(|i| format!("u_norm_p{i}")));
    columns.extend((0..n).map(|i| format!("P_p{i}")));
    for c in [
        "Q",
        "kinetic_u",
        "compression",
        "kinetic_v",
        "potential_u",
        "minus_ds_dt",
        "budget_total",
        "residual",
        "node_flag",
    ] {
        columns.push(c.into());
    }
    let mut csv = Csv::new("fields");
    csv.comment(&format!("state = {}", model.label()));
    csv.comment(&format!("t = {}", num(t)));
    csv.comment(&format!("node_epsilon = {}", num(evaluator.node_epsilon)));
    csv.comment("u_plus = -u_minus; residual = budget_total - minus_ds_dt; inverse-density columns are blank at nodes");
    csv.header(&columns);

    let mut nodes = 0;
    for p in &points {
        let config = ParticleConfig::from_flat(model.dim(), p.clone()).map_err(config_error)?;
        let s = evaluator.sample(&model, &config, t).map_err(|e| match e {
            Error::Singularity(_) => CliError::Degenerate(format!("grid point {p:?}: {e}")),
            other => config_error(other),
        })?;
        nodes += usize::from(s.node_flag);
        let mut row = vec![num(t)];
        row.extend(p.iter().map(|&c| num(c)));
        row.push(num(s.upsilon));
        let flat = |v: &Option<Vec<Vec<f64>>>| -> Vec<String> {
            match v {
                Some(v) => v.iter().flatten().map(|&c| num(c)).collect(),
                None => vec![String::new(); n * model.dim()],
            }
        };
        row.extend(flat(&s.v));
        row.extend(flat(&s.u_plus));
        match &s.u_plus {
            Some(u) => row.extend(u.iter().map(|ui| num(ui.iter().map(|c| c * c).sum::<f64>().sqrt()))),
            None => row.extend(vec![String::new(); n]),
        }
        row.extend(s.pressure.iter().map(|&v| num(v)));
        let b = s.budget.as_ref();
        row.push(opt(s.q));
        row.push(opt(s.kinetic_u));
        row.push(opt(s.compression));
        row.push(opt(b.map(|b| b.kinetic_v)));
        row.push(opt(b.map(|b| b.potential_u)));
        row.push(opt(b.map(|b| b.minus_ds_dt)));
        row.push(opt(b.map(|b| b.total())));
        row.push(opt(b.map(|b| b.residual)));
        row.push(s.node_flag.to_string());
        csv.row(&row);
    }
    let path = out.join("fields.csv");
    let rows = csv.rows();
    write(&path, &csv.finish())?;
    if nodes as f64 > NODE_DOMINATED * rows as f64 {
        return Err(CliError::Degenerate(format!(
            "{nodes} of {rows} grid points are nodes; the grid is node-dominated"
        )));
    }
    Ok(Outcome::ok(format!("wrote {} ({rows} rows, {nodes} nodes)\n", path.display())))
}

pub fn integrator_settings(config: &RunConfig) -> IntegratorSettings {
    let t = &config.traj;
    let mut s = IntegratorSettings::with_dt(t.dt);
    s.store_every = t.store_every;
    if let Some(v) = t.max_steps {
        s.max_steps = v;
    }
    if let Some(v) = t.speed_ceiling {
        s.speed_ceiling = v;
    }
    if let Some(v) = t.max_displacement {
        s.max_displacement = v;
    }
    if let Some(v) = t.node_epsilon {
        s.node_epsilon = v;
    }
    s
}

pub fn traj(state: Option<&str>, config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let model = model_for(state, config)?;
    let tc = &config.traj;
    let t1 = tc.t1.ok_or_else(|| CliError::Config("[traj] t1 is required".into()))?;
    if tc.initial.is_empty() {
        return Err(CliError::Config("[traj] needs at least one 'initial' line".into()));
    }
    let settings = integrator_settings(config);
    settings.validate().map_err(config_error)?;
    let k = model.coordinate_count();
    let mut summary = String::new();
    for (j, x0) in tc.initial.iter().enumerate() {
        if x0.len() != k {
            return Err(CliError::Config(format!(
                "initial #{j} has {} coordinates, {} needs {k}",
                x0.len(),
                model.label()
            )));
        }
        let start = ParticleConfig::from_flat(model.dim(), x0.clone()).map_err(config_error)?;
        let trajectory = integrate_trajectory(&model, &start, tc.t0, t1, tc.mode, &settings).map_err(|e| match e {
            Error::Singularity(_) | Error::Node { .. } => CliError::Degenerate(format!("initial #{j}: {e}")),
            other => config_error(other),
        })?;

        let mut columns = vec!["t".to_string()];
        columns.extend(coordinate_columns(&model, ""));
        columns.extend(coordinate_columns(&model, "vel_"));
        columns.push("budget_total".into());
        let mut csv = Csv::new("traj");
        csv.comment(&format!("state = {}", model.label()));
        csv.comment(&format!("mode = {}", tc.mode.name()));
        csv.comment(&format!("dt = {}", num(settings.dt)));
        csv.comment(&format!("initial = {}", x0.iter().map(|&c| num(c)).collect::<Vec<_>>().join(" ")));
        if let Some(e) = model.energy() {
            csv.comment(&format!("reference_energy = {}", num(e)));
        }
        csv.header(&columns);
        for p in &trajectory.points {
            let mut row = vec![num(p.t)];
            row.extend(p.config.coords().iter().map(|&c| num(c)));
            row.extend(p.velocity.iter().flatten().map(|&c| num(c)));
            row.push(opt(p.budget.map(|b| b.total())));
            csv.row(&row);
        }
        csv.comment(&format!("termination = {}", trajectory.termination.name()));
        let path = out.join(format!("traj_{j:03}.csv"));
        write(&path, &csv.finish())?;
        summary.push_str(&format!(
            "wrote {} ({} points, {})\n",
            path.display(),
            trajectory.points.len(),
            trajectory.termination.name()
        ));
    }
    Ok(Outcome::ok(summary))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: std::collections::BTreeMap<String, f64>,
    pub note: String,
}

impl CheckResult {
    fn judged(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            status: if value <= tolerance { Status::Pass } else { Status::Fail },
            value: Some(value),
            tolerance: Some(tolerance),
            detail: Default::default(),
            note: String::new(),
        }
    }

    fn not_applicable(name: &'static str, note: &str) -> Self {
        Self {
            name,
            status: Status::NotApplicable,
            value: None,
            tolerance: None,
            detail: Default::default(),
            note: note.into(),
        }
    }

    fn failed(name: &'static str, note: String) -> Self {
        Self {
            status: Status::Fail,
            note,
            ..Self::not_applicable(name, "")
        }
    }

    fn from_reports(name: &'static str, reports: &[EnsembleReport], key: &str) -> Self {
        let mut worst: Option<(f64, f64)> = None;
        let mut detail = std::collections::BTreeMap::new();
        for (j, r) in reports.iter().enumerate() {
            let suffix = if reports.len() > 1 { format!("_p{j}") } else { String::new() };
            for (k, v) in &r.values {
                detail.insert(format!("{k}{suffix}"), *v);
            }
            if let Some(f) = r.pass_flags.get(key) {
                if worst.is_none_or(|(v, t)| f.value / f.tolerance > v / t) {
                    worst = Some((f.value, f.tolerance));
                }
            }
        }
        let (value, tolerance) = worst.unwrap_or((f64::NAN, f64::NAN));
        let passed = reports.iter().all(EnsembleReport::passed);
        Self {
            name,
            status: if passed { Status::Pass } else { Status::Fail },
            value: Some(value),
            tolerance: Some(tolerance),
            detail,
            note: String::new(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StateVerification {
    pub state: String,
    pub n: usize,
    pub dim: usize,
    pub stationary: bool,
    pub energy: Option<f64>,
    pub probes: usize,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    schema_version: &'static str,
    command: &'static str,
    passed: bool,
    states: &'a [StateVerification],
}

fn quadrature_for(model: &WavefunctionModel, q: &QuadratureConfig) -> Result<QuadratureSpec, CliError> {
    let mut spec = QuadratureSpec::auto(model, 0.0).map_err(config_error)?;
    if let Some(v) = q.rule {
        spec.rule = v;
    }
    if let Some(v) = q.points_per_dim {
        spec.points_per_dim = v;
    }
    if let Some(v) = q.panels {
        spec.panels = v;
    }
    if let Some(v) = q.angular_points {
        spec.angular_points = v;
    }
    if let Some(v) = &q.lower {
        spec.lower = v.clone();
    }
    if let Some(v) = &q.upper {
        spec.upper = v.clone();
    }
    spec.validate(model).map_err(config_error)?;
    Ok(spec)
}

/// Largest value of `f` over the probes, skipping probes where `f` reports a
/// node. Other errors are returned.
fn worst_over<F>(probes: &[(ParticleConfig, f64)], mut f: F) -> Result<f64, Error>
where
    F: FnMut(&ParticleConfig, f64) -> Result<f64, Error>,
{
    let mut worst: f64 = 0.0;
    for (c, t) in probes {
        match f(c, *t) {
            Ok(v) => worst = worst.max(v),
            Err(Error::Node { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(worst)
}

fn pointwise(name: &'static str, tolerance: f64, value: Result<f64, Error>) -> CheckResult {
    match value {
        Ok(v) => CheckResult::judged(name, v, tolerance),
        Err(e) => CheckResult::failed(name, e.to_string()),
    }
}

/// Runs every identity check that applies to `model`.
pub fn verify_state(model: &WavefunctionModel, config: &RunConfig) -> Result<StateVerification, CliError> {
    let vc = &config.verify;
    let stationary = model.is_stationary();
    let t_range = if stationary { (0.0, 0.0) } else { (0.0, vc.t_max) };
    let probes = probe_points(model, vc.points, t_range, PROBE_FLOOR);
    let ev = FieldEvaluator::default();
    let mut checks = Vec::new();

    checks.push(pointwise(
        "derivative_oracle",
        DERIVATIVE_TOLERANCE,
        worst_over(&probes, |c, t| derivative_mismatch(model, c, t, vc.fd_step)),
    ));
    checks.push(pointwise(
        "decomposition",
        DECOMPOSITION_TOLERANCE,
        worst_over(&probes, |c, t| {
            let q = ev.quantum_potential(model, c, t)?;
            let (ku, comp) = ev.quantum_potential_decomposed(model, c, t)?;
            Ok((q - (ku + comp)).abs() / (1.0 + q.abs()))
        }),
    ));
    let stationary_note = "stationary states only";
    checks.push(match model.energy() {
        Some(e) => pointwise(
            "stationary_budget",
            STATIONARY_BUDGET_TOLERANCE,
            worst_over(&probes, |c, _| Ok(ev.stationary_budget(model, c)?.residual.abs() / (1.0 + e.abs()))),
        ),
        None => CheckResult::not_applicable("stationary_budget", stationary_note),
    });
    checks.push(pointwise(
        "dynamic_budget",
        DYNAMIC_BUDGET_TOLERANCE,
        worst_over(&probes, |c, t| {
            let b = ev.energy_budget(model, c, t)?;
            Ok(b.residual.abs() / b.magnitude().max(f64::MIN_POSITIVE))
        }),
    ));
    checks.push(pointwise(
        "continuity",
        CONTINUITY_TOLERANCE,
        worst_over(&probes, |c, t| {
            let upsilon = ev.density(model, c, t)?;
            Ok(ev.continuity_residual(model, c, t)?.abs() / upsilon)
        }),
    ));
    checks.push(if stationary && model.is_real_valued() {
        pointwise(
            "zero_bohm_velocity",
            0.0,
            worst_over(&probes, |c, t| {
                let mut m: f64 = 0.0;
                for i in 0..model.n() {
                    m = ev.bohm_velocity(model, c, t, i)?.iter().fold(m, |m, v| m.max(v.abs()));
                }
                Ok(m)
            }),
        )
    } else {
        CheckResult::not_applicable("zero_bohm_velocity", "real stationary states only")
    });

    if stationary && model.is_normalizable() {
        let quad = quadrature_for(model, &config.quadrature)?;
        checks.push(match (model.is_real_valued(), kinetic_expectation_check(model, &quad)) {
            (true, Ok(r)) => CheckResult::from_reports("kinetic", &[r], "equality"),
            (true, Err(e)) => CheckResult::failed("kinetic", e.to_string()),
            (false, _) => CheckResult::not_applicable("kinetic", "real stationary states only"),
        });
        let reports: Result<Vec<_>, _> = (0..model.n()).map(|i| pressure_integral_check(model, &quad, i)).collect();
        checks.push(match reports {
            Ok(r) => CheckResult::from_reports("pressure", &r, "vanishing_integral"),
            Err(e) => CheckResult::failed("pressure", e.to_string()),
        });
    } else {
        checks.push(CheckResult::not_applicable("kinetic", stationary_note));
        checks.push(CheckResult::not_applicable("pressure", stationary_note));
    }

    if probes.len() < vc.points {
        checks.push(CheckResult::failed(
            "probe_coverage",
            format!("only {} of {} probe points found", probes.len(), vc.points),
        ));
    }
    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(StateVerification {
        state: model.label().to_string(),
        n: model.n(),
        dim: model.dim(),
        stationary,
        energy: model.energy(),
        probes: probes.len(),
        passed,
        checks,
    })
}

pub fn verify(
    state: Option<&str>,
    all: bool,
    config: &RunConfig,
    out: Option<&Path>,
    json: bool,
) -> Result<Outcome, CliError> {
    let models = if all {
        if state.is_some() {
            return Err(CliError::Config("give either a state or --all".into()));
        }
        CATALOG
            .iter()
            .map(|id| parse_state(id).map_err(CliError::Config))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        vec![model_for(state, config)?]
    };
    let states = models
        .iter()
        .map(|m| verify_state(m, config))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = states.iter().all(|s| s.passed);
    let doc = to_json(&VerifyDocument {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        passed,
        states: &states,
    }) + "\n";
    if let Some(dir) = out {
        write(&dir.join("verify.json"), &doc)?;
    }
    let stdout = if json {
        doc
    } else {
        let mut s = String::new();
        for st in &states {
            for c in &st.checks {
                let status = match c.status {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::NotApplicable => "n/a",
                };
                let detail = match (c.value, c.tolerance) {
                    (Some(v), Some(t)) => format!("{v:.3e} <= {t:.1e}"),
                    _ => c.note.clone(),
                };
                s.push_str(&format!("{:<20} {:<20} {status:<5} {detail}\n", st.state, c.name));
            }
        }
        s.push_str(if passed { "all checks passed\n" } else { "some checks FAILED\n" });
        s
    };
    Ok(Outcome { stdout, passed })
}

#[derive(Serialize)]
struct EnsembleDocument<'a> {
    schema_version: &'static str,
    command: &'static str,
    state: &'a str,
    check: &'static str,
    seed: u64,
    passed: bool,
    reports: &'a [EnsembleReport],
}

pub fn sampler_settings(config: &RunConfig, seed: u64) -> SamplerSettings {
    let e = &config.ensemble;
    SamplerSettings {
        n_samples: e.n_samples,
        burn_in: e.burn_in,
        thinning: e.thinning,
        proposal_sigma: e.proposal_sigma,
        seed,
    }
}

pub fn ensemble(
    state: Option<&str>,
    config: &RunConfig,
    seed: u64,
    out: &Path,
    json: bool,
) -> Result<Outcome, CliError> {
    let model = model_for(state, config)?;
    let e = &config.ensemble;
    let sampler = sampler_settings(config, seed);
    let mut samples_csv = None;
    let reports = match e.check {
        EnsembleCheck::Sample => {
            let set = sample_density(&model, e.t, &sampler).map_err(config_error)?;
            let mut r = EnsembleReport::new("sample", model.label());
            r.seed = Some(seed);
            r.acceptance_rate = Some(set.acceptance_rate);
            r.value("t", e.t);
            r.value("n_samples", set.samples.len() as f64);
            let names = coordinate_columns(&model, "");
            for (k, name) in names.iter().enumerate() {
                let col = set.coordinate(k);
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / col.len() as f64;
                r.value(&format!("mean_{name}"), mean);
                r.value(&format!("variance_{name}"), var);
            }
            if e.write_samples {
                let mut csv = Csv::new("samples");
                csv.comment(&format!("state = {}", model.label()));
                csv.comment(&format!("t = {}", num(e.t)));
                csv.comment(&format!("seed = {seed}"));
                csv.header(&names);
                for s in &set.samples {
                    csv.row(&s.coords().iter().map(|&c| num(c)).collect::<Vec<_>>());
                }
                samples_csv = Some(csv);
            }
            vec![r]
        }
        EnsembleCheck::Equivariance => {
            let mut integrator = IntegratorSettings::with_dt(e.dt);
            let tc = &config.traj;
            if let Some(v) = tc.node_epsilon {
                integrator.node_epsilon = v;
            }
            if let Some(v) = tc.max_displacement {
                integrator.max_displacement = v;
            }
            let t1 = e.t1.unwrap_or(e.t0 + std::f64::consts::PI);
            vec![equivariance_check(&model, e.t0, t1, &sampler, &integrator).map_err(config_error)?]
        }
        EnsembleCheck::Kinetic => {
            let quad = quadrature_for(&model, &config.quadrature)?;
            vec![kinetic_expectation_check(&model, &quad).map_err(config_error)?]
        }
        EnsembleCheck::Pressure => {
            let quad = quadrature_for(&model, &config.quadrature)?;
            let particles: Vec<usize> = match e.particle {
                Some(i) => vec![i],
                None => (0..model.n()).collect(),
            };
            particles
                .into_iter()
                .map(|i| pressure_integral_check(&model, &quad, i).map_err(config_error))
                .collect::<Result<_, _>>()?
        }
    };
    let passed = reports.iter().all(EnsembleReport::passed);
    let doc = to_json(&EnsembleDocument {
        schema_version: SCHEMA_VERSION,
        command: "ensemble",
        state: model.label(),
        check: e.check.name(),
        seed,
        passed,
        reports: &reports,
    }) + "\n";
    let json_path = out.join("ensemble.json");
    write(&json_path, &doc)?;
    let mut written: Vec<PathBuf> = vec![json_path];
    if let Some(csv) = samples_csv {
        let path = out.join("samples.csv");
        write(&path, &csv.finish())?;
        written.push(path);
    }
    let stdout = if json {
        doc
    } else {
        let mut s = String::new();
        for r in &reports {
            for (k, f) in &r.pass_flags {
                let status = if f.passed { "pass" } else { "FAIL" };
                s.push_str(&format!("{} {k}: {status} ({:.6e} <= {:.6e})\n", r.check, f.value, f.tolerance));
            }
            for w in &r.warnings {
                s.push_str(&format!("warning: {w}\n"));
            }
        }
        for p in written {
            s.push_str(&format!("wrote {}\n", p.display()));
        }
        s
    };
    Ok(Outcome { stdout, passed })
}
