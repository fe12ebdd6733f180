//! Run configuration: a line-oriented `key = value` file with `[section]`
//! headers. `#` starts a comment. Unknown sections and keys are rejected.
//!
//! ```text
//! format_version = 1
//! state = ho1d:n=0,omega=1
//! seed = 7
//! output_dir = out
//!
//! [fields]
//! t = 0
//! grid = -3:3:61            # lower:upper:count per coordinate, ';'-separated
//! # or: line_from = 0.1,0,0 / line_to = 5,0,0 / points = 100
//!
//! [traj]
//! t1 = 1
//! dt = 1e-3
//! mode = augmented+         # bohm | augmented+ | augmented-
//! initial = 1.0             # flat coordinates; repeat for more trajectories
//!
//! [ensemble]
//! check = equivariance      # sample | equivariance | kinetic | pressure
//!
//! [quadrature]
//! points_per_dim = 32
//!
//! [verify]
//! points = 100
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use bohmdyn::dynamics::VelocityMode;
use bohmdyn::ensemble::Rule;

pub const FORMAT_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldsConfig {
    pub t: f64,
    pub grid: Option<Vec<Axis>>,
    /// Straight line between two configurations with a number of points.
    pub line: Option<(Vec<f64>, Vec<f64>, usize)>,
    pub node_epsilon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajConfig {
    pub t0: f64,
    pub t1: Option<f64>,
    pub dt: f64,
    pub mode: VelocityMode,
    pub initial: Vec<Vec<f64>>,
    pub store_every: usize,
    pub max_steps: Option<usize>,
    pub speed_ceiling: Option<f64>,
    pub max_displacement: Option<f64>,
    pub node_epsilon: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleCheck {
    Sample,
    Equivariance,
    Kinetic,
    Pressure,
}

impl EnsembleCheck {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleCheck::Sample => "sample",
            EnsembleCheck::Equivariance => "equivariance",
            EnsembleCheck::Kinetic => "kinetic",
            EnsembleCheck::Pressure => "pressure",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub check: EnsembleCheck,
    pub t: f64,
    pub t0: f64,
    pub t1: Option<f64>,
    pub n_samples: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub proposal_sigma: f64,
    pub dt: f64,
    pub write_samples: bool,
    pub particle: Option<usize>,
}

/// Overrides applied on top of the automatic quadrature.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadratureConfig {
    pub rule: Option<Rule>,
    pub points_per_dim: Option<usize>,
    pub panels: Option<usize>,
    pub angular_points: Option<usize>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub points: usize,
    pub fd_step: f64,
    pub t_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub state: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub fields: FieldsConfig,
    pub traj: TrajConfig,
    pub ensemble: EnsembleConfig,
    pub quadrature: QuadratureConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            state: None,
            seed: None,
            output_dir: None,
            fields: FieldsConfig {
                t: 0.0,
                grid: None,
                line: None,
                node_epsilon: bohmdyn::fields::DEFAULT_NODE_EPSILON,
            },
            traj: TrajConfig {
                t0: 0.0,
                t1: None,
                dt: 1e-3,
                mode: VelocityMode::Bohm,
                initial: Vec::new(),
                store_every: 1,
                max_steps: None,
                speed_ceiling: None,
                max_displacement: None,
                node_epsilon: None,
            },
            ensemble: EnsembleConfig {
                check: EnsembleCheck::Sample,
                t: 0.0,
                t0: 0.0,
                t1: None,
                n_samples: 10_000,
                burn_in: 5_000,
                thinning: 20,
                proposal_sigma: 0.5,
                dt: 0.02,
                write_samples: false,
                particle: None,
            },
            quadrature: QuadratureConfig::default(),
            verify: VerifyConfig {
                points: 100,
                fd_step: 1e-4,
                t_max: 2.0,
            },
        }
    }
}

type Entries<'a> = BTreeMap<(&'a str, &'a str), Vec<(usize, &'a str)>>;

const KEYS: &[(&str, &[&str])] = &[
    ("", &["format_version", "state", "seed", "output_dir"]),
    ("fields", &["t", "grid", "line_from", "line_to", "points", "node_epsilon"]),
    (
        "traj",
        &[
            "t0",
            "t1",
            "dt",
            "mode",
            "initial",
            "store_every",
            "max_steps",
            "speed_ceiling",
            "max_displacement",
            "node_epsilon",
        ],
    ),
    (
        "ensemble",
        &[
            "check",
            "t",
            "t0",
            "t1",
            "n_samples",
            "burn_in",
            "thinning",
            "proposal_sigma",
            "dt",
            "write_samples",
            "particle",
        ],
    ),
    ("quadrature", &["rule", "points_per_dim", "panels", "angular_points", "lower", "upper"]),
    ("verify", &["points", "fd_step", "t_max"]),
];

struct Reader<'a> {
    entries: Entries<'a>,
}

impl<'a> Reader<'a> {
    fn take(&mut self, section: &'a str, key: &'a str) -> Result<Option<(usize, &'a str)>, String> {
        match self.entries.remove(&(section, key)) {
            None => Ok(None),
            Some(v) if v.len() == 1 => Ok(Some(v[0])),
            Some(v) => Err(format!("line {}: key '{key}' repeated", v[1].0)),
        }
    }

    fn take_all(&mut self, section: &'a str, key: &'a str) -> Vec<(usize, &'a str)> {
        self.entries.remove(&(section, key)).unwrap_or_default()
    }

    fn get<T>(
        &mut self,
        section: &'a str,
        key: &'a str,
        parse: impl Fn(&str) -> Result<T, String>,
    ) -> Result<Option<T>, String> {
        self.take(section, key)?
            .map(|(line, v)| parse(v).map_err(|e| format!("line {line}: {key}: {e}")))
            .transpose()
    }
}

fn real(v: &str) -> Result<f64, String> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a real number, got '{v}'"))
}

fn positive(v: &str) -> Result<f64, String> {
    real(v).and_then(|x| if x > 0.0 { Ok(x) } else { Err(format!("must be positive, got {x}")) })
}

fn count(v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got '{v}'"))
}

fn positive_count(v: &str) -> Result<usize, String> {
    count(v).and_then(|n| if n > 0 { Ok(n) } else { Err("must be at least 1".into()) })
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| real(s.trim())).collect()
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

fn axis(v: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("grid axis must be lower:upper:count, got '{v}'"));
    }
    let axis = Axis {
        lower: real(parts[0])?,
        upper: real(parts[1])?,
        count: positive_count(parts[2])?,
    };
    if axis.upper < axis.lower || (axis.upper == axis.lower && axis.count > 1) {
        return Err(format!("grid axis '{v}' is empty"));
    }
    Ok(axis)
}

pub fn parse_mode(v: &str) -> Result<VelocityMode, String> {
    VelocityMode::parse(v).ok_or_else(|| format!("mode must be bohm, augmented+ or augmented-, got '{v}'"))
}

fn check(v: &str) -> Result<EnsembleCheck, String> {
    match v {
        "sample" => Ok(EnsembleCheck::Sample),
        "equivariance" => Ok(EnsembleCheck::Equivariance),
        "kinetic" => Ok(EnsembleCheck::Kinetic),
        "pressure" => Ok(EnsembleCheck::Pressure),
        _ => Err(format!("check must be sample, equivariance, kinetic or pressure, got '{v}'")),
    }
}

fn rule(v: &str) -> Result<Rule, String> {
    match v {
        "gauss_legendre" => Ok(Rule::GaussLegendre),
        "trapezoid" => Ok(Rule::Trapezoid),
        _ => Err(format!("rule must be gauss_legendre or trapezoid, got '{v}'")),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries: Entries = BTreeMap::new();
        let mut section = "";
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| format!("line {line_no}: malformed section header"))?
                    .trim();
                let known = KEYS.iter().find(|(s, _)| *s == name && !name.is_empty());
                section = known.ok_or_else(|| format!("line {line_no}: unknown section [{name}]"))?.0;
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {line_no}: expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let allowed = KEYS.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            let key = allowed.iter().find(|k| **k == key).ok_or_else(|| {
                let place = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
                format!("line {line_no}: unknown key '{key}' at {place}")
            })?;
            entries.entry((section, key)).or_default().push((line_no, value));
        }

        let mut r = Reader { entries };
        match r.take("", "format_version")? {
            Some((_, v)) if v == FORMAT_VERSION => {}
            Some((line, v)) => {
                return Err(format!("line {line}: format_version {v} is not supported (expected {FORMAT_VERSION})"))
            }
            None => return Err(format!("missing format_version (expected {FORMAT_VERSION})")),
        }
        let mut c = RunConfig::default();
        c.state = r.get("", "state", |v| Ok(v.to_string()))?;
        c.seed = r.get("", "seed", |v| v.parse::<u64>().map_err(|_| format!("expected an integer, got '{v}'")))?;
        c.output_dir = r.get("", "output_dir", |v| Ok(PathBuf::from(v)))?;

        let f = &mut c.fields;
        f.t = r.get("fields", "t", real)?.unwrap_or(f.t);
        f.grid = r.get("fields", "grid", |v| v.split(';').map(|a| axis(a.trim())).collect())?;
        let from = r.get("fields", "line_from", list)?;
        let to = r.get("fields", "line_to", list)?;
        let points = r.get("fields", "points", positive_count)?;
        f.line = match (from, to, points) {
            (None, None, None) => None,
            (Some(a), Some(b), Some(n)) if a.len() == b.len() => Some((a, b, n)),
            (Some(_), Some(_), Some(_)) => return Err("line_from and line_to differ in length".into()),
            _ => return Err("a line needs line_from, line_to and points".into()),
        };
        if f.grid.is_some() && f.line.is_some() {
            return Err("[fields] takes either grid or a line, not both".into());
        }
        f.node_epsilon = r.get("fields", "node_epsilon", real)?.unwrap_or(f.node_epsilon);

        let t = &mut c.traj;
        t.t0 = r.get("traj", "t0", real)?.unwrap_or(t.t0);
        t.t1 = r.get("traj", "t1", real)?;
        t.dt = r.get("traj", "dt", positive)?.unwrap_or(t.dt);
        t.mode = r.get("traj", "mode", parse_mode)?.unwrap_or(t.mode);
        for (line, v) in r.take_all("traj", "initial") {
            t.initial.push(list(v).map_err(|e| format!("line {line}: initial: {e}"))?);
        }
        t.store_every = r.get("traj", "store_every", count)?.unwrap_or(t.store_every);
        t.max_steps = r.get("traj", "max_steps", positive_count)?;
        t.speed_ceiling = r.get("traj", "speed_ceiling", positive)?;
        t.max_displacement = r.get("traj", "max_displacement", positive)?;
        t.node_epsilon = r.get("traj", "node_epsilon", real)?;

        let e = &mut c.ensemble;
        e.check = r.get("ensemble", "check", check)?.unwrap_or(e.check);
        e.t = r.get("ensemble", "t", real)?.unwrap_or(e.t);
        e.t0 = r.get("ensemble", "t0", real)?.unwrap_or(e.t0);
        e.t1 = r.get("ensemble", "t1", real)?;
        e.n_samples = r.get("ensemble", "n_samples", positive_count)?.unwrap_or(e.n_samples);
        e.burn_in = r.get("ensemble", "burn_in", count)?.unwrap_or(e.burn_in);
        e.thinning = r.get("ensemble", "thinning", positive_count)?.unwrap_or(e.thinning);
        e.proposal_sigma = r.get("ensemble", "proposal_sigma", positive)?.unwrap_or(e.proposal_sigma);
        e.dt = r.get("ensemble", "dt", positive)?.unwrap_or(e.dt);
        e.write_samples = r.get("ensemble", "write_samples", boolean)?.unwrap_or(e.write_samples);
        e.particle = r.get("ensemble", "particle", count)?;

        let q = &mut c.quadrature;
        q.rule = r.get("quadrature", "rule", rule)?;
        q.points_per_dim = r.get("quadrature", "points_per_dim", positive_count)?;
        q.panels = r.get("quadrature", "panels", positive_count)?;
        q.angular_points = r.get("quadrature", "angular_points", positive_count)?;
        q.lower = r.get("quadrature", "lower", list)?;
        q.upper = r.get("quadrature", "upper", list)?;

        let v = &mut c.verify;
        v.points = r.get("verify", "points", positive_count)?.unwrap_or(v.points);
        v.fd_step = r.get("verify", "fd_step", positive)?.unwrap_or(v.fd_step);
        v.t_max = r.get("verify", "t_max", positive)?.unwrap_or(v.t_max);

        debug_assert!(r.entries.is_empty(), "unconsumed keys {:?}", r.entries.keys());
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bohmdyn::fields::Branch;

    #[test]
    fn parses_every_section() {
        let text = "\
format_version = 1
state = hooke   # trailing comment
seed = 99
output_dir = results

[fields]
t = 0.5
grid = -3:3:61; -1:1:5

[traj]
t1 = 2
mode = augmented-
initial = 0.4,-0.2,0.3,-0.5,0.1,0.6
initial = 1,0,0,0,1,0
store_every = 10

[ensemble]
check = equivariance
t1 = 3.14159
write_samples = true

[quadrature]
rule = trapezoid
points_per_dim = 401

[verify]
points = 20
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.state.as_deref(), Some("hooke"));
        assert_eq!(c.seed, Some(99));
        assert_eq!(c.fields.grid.as_ref().unwrap().len(), 2);
        assert_eq!(c.traj.mode, VelocityMode::Augmented(Branch::Minus));
        assert_eq!(c.traj.initial.len(), 2);
        assert_eq!(c.ensemble.check, EnsembleCheck::Equivariance);
        assert!(c.ensemble.write_samples);
        assert_eq!(c.quadrature.rule, Some(Rule::Trapezoid));
        assert_eq!(c.verify.points, 20);
    }

    #[test]
    fn strictness() {
        for (text, needle) in [
            ("state = hooke\n", "format_version"),
            ("format_version = 2\n", "not supported"),
            ("format_version = 1\ncolour = red\n", "unknown key 'colour'"),
            ("format_version = 1\n[fields]\nseed = 3\n", "unknown key 'seed' at [fields]"),
            ("format_version = 1\n[plots]\n", "unknown section"),
            ("format_version = 1\nseed = 1\nseed = 2\n", "repeated"),
            ("format_version = 1\n[traj]\ndt = -1\n", "positive"),
            ("format_version = 1\n[traj]\nmode = sideways\n", "mode"),
            ("format_version = 1\n[fields]\ngrid = 3:-3:10\n", "empty"),
            ("format_version = 1\n[fields]\nline_from = 0\n", "line needs"),
            ("format_version = 1\njust words\n", "key = value"),
        ] {
            let err = RunConfig::parse(text).unwrap_err();
            assert!(err.contains(needle), "{text:?} -> {err}");
        }
    }
}
