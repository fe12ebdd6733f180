//! State ids: `name[:key=value[,key=value]*]`.
//!
//! ```text
//! ho1d[:n=<level>][,omega=<ω>]          1D oscillator eigenstate (defaults n=0, omega=1)
//! hydrogen[:<1s|2s|2pz>][,Z=<charge>]   hydrogen-like orbital (defaults 1s, Z=1)
//! gauss[:sigma=<σ0>][,k=<k0>]           free Gaussian packet (defaults sigma=1, k=0)
//! hooke                                 Hooke's atom, two electrons, E = 2
//! super:<term>+<term>...[,omega=][,Z=]  equal-weight superposition
//! product:<term>*<term>...[,omega=][,Z=] product state, one particle per factor
//! ```
//!
//! Terms are `ho<n>`, `h1s`, `h2s` or `h2pz`; `omega` and `Z` apply to every
//! term of that kind.

use std::collections::BTreeMap;

use bohmdyn::states::{
    make_free_gaussian_packet, make_harmonic_oscillator_1d, make_hookes_atom, make_hydrogenlike, make_product_state,
    make_superposition, Orbital, WavefunctionModel,
};
use bohmdyn::Complex64;

/// Ids listed by `catalog` and checked by `verify --all`.
pub const CATALOG: &[&str] = &[
    "ho1d:n=0,omega=1",
    "ho1d:n=1,omega=1",
    "ho1d:n=2,omega=1",
    "ho1d:n=3,omega=1",
    "hydrogen:1s,Z=1",
    "hydrogen:2s,Z=1",
    "hydrogen:2pz,Z=1",
    "gauss:sigma=1,k=2",
    "super:ho0+ho1",
    "hooke",
    "product:ho0*ho0",
];

struct Args<'a> {
    name: &'a str,
    positional: Option<&'a str>,
    keys: BTreeMap<&'a str, &'a str>,
}

impl<'a> Args<'a> {
    fn parse(id: &'a str) -> Result<Self, String> {
        let (name, rest) = match id.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (id.trim(), None),
        };
        let mut positional = None;
        let mut keys = BTreeMap::new();
        for item in rest.into_iter().flat_map(|r| r.split(',')) {
            let item = item.trim();
            if item.is_empty() {
                return Err(format!("empty field in state id '{id}'"));
            }
            match item.split_once('=') {
                Some((k, v)) => {
                    if keys.insert(k.trim(), v.trim()).is_some() {
                        return Err(format!("key '{}' repeated in '{id}'", k.trim()));
                    }
                }
                None if positional.is_none() => positional = Some(item),
                None => return Err(format!("unexpected field '{item}' in '{id}'")),
            }
        }
        Ok(Self { name, positional, keys })
    }

    fn allow(&self, allowed: &[&str], positional: bool) -> Result<(), String> {
        if let Some(bad) = self.keys.keys().find(|k| !allowed.contains(k)) {
            return Err(format!("unknown key '{bad}' for state '{}'", self.name));
        }
        if !positional {
            if let Some(p) = self.positional {
                return Err(format!("unexpected field '{p}' for state '{}'", self.name));
            }
        }
        Ok(())
    }

    fn real(&self, key: &str, default: f64) -> Result<f64, String> {
        match self.keys.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("'{key}' must be a real number, got '{v}'")),
        }
    }

    fn level(&self, key: &str, default: usize) -> Result<usize, String> {
        match self.keys.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| format!("'{key}' must be a non-negative integer, got '{v}'")),
        }
    }
}

fn term(token: &str, omega: f64, z: f64) -> Result<WavefunctionModel, String> {
    let model = match token {
        "h1s" => make_hydrogenlike(Orbital::S1, z),
        "h2s" => make_hydrogenlike(Orbital::S2, z),
        "h2pz" => make_hydrogenlike(Orbital::Pz2, z),
        _ => {
            let level = token
                .strip_prefix("ho")
                .and_then(|n| n.parse::<usize>().ok())
                .ok_or_else(|| format!("unknown term '{token}' (expected ho<n>, h1s, h2s or h2pz)"))?;
            make_harmonic_oscillator_1d(level, omega)
        }
    };
    model.map_err(|e| e.to_string())
}

fn terms(args: &Args, separator: char) -> Result<Vec<WavefunctionModel>, String> {
    args.allow(&["omega", "Z"], true)?;
    let expr = args
        .positional
        .ok_or_else(|| format!("'{}' needs terms, e.g. {}:ho0{separator}ho1", args.name, args.name))?;
    let omega = args.real("omega", 1.0)?;
    let z = args.real("Z", 1.0)?;
    expr.split(separator).map(|t| term(t.trim(), omega, z)).collect()
}

/// Builds the model named by `id`, labelled with `id` itself.
pub fn parse_state(id: &str) -> Result<WavefunctionModel, String> {
    let args = Args::parse(id)?;
    let model = match args.name {
        "ho1d" => {
            args.allow(&["n", "omega"], false)?;
            make_harmonic_oscillator_1d(args.level("n", 0)?, args.real("omega", 1.0)?)
        }
        "hydrogen" => {
            args.allow(&["Z"], true)?;
            let orbital = match args.positional {
                None => Orbital::S1,
                Some(p) => Orbital::parse(p).ok_or_else(|| format!("unknown orbital '{p}' (1s, 2s or 2pz)"))?,
            };
            make_hydrogenlike(orbital, args.real("Z", 1.0)?)
        }
        "gauss" => {
            args.allow(&["sigma", "k"], false)?;
            make_free_gaussian_packet(args.real("sigma", 1.0)?, args.real("k", 0.0)?)
        }
        "hooke" => {
            args.allow(&[], false)?;
            Ok(make_hookes_atom())
        }
        "super" => {
            let parts = terms(&args, '+')?;
            let c = Complex64::new((parts.len() as f64).sqrt().recip(), 0.0);
            make_superposition(parts.into_iter().map(|m| (c, m)).collect())
        }
        "product" => make_product_state(terms(&args, '*')?),
        other => return Err(format!("unknown state '{other}'")),
    };
    Ok(model.map_err(|e| e.to_string())?.with_label(id.trim()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_ids_parse() {
        for id in CATALOG {
            let m = parse_state(id).unwrap();
            assert_eq!(m.label(), *id);
        }
        assert_eq!(parse_state("hooke").unwrap().energy(), Some(2.0));
        assert_eq!(parse_state("hydrogen:1s,Z=2").unwrap().energy(), Some(-2.0));
        assert_eq!(parse_state("ho1d:n=2,omega=1").unwrap().energy(), Some(2.5));
        assert_eq!(parse_state("product:ho0*ho0").unwrap().energy(), Some(1.0));
        assert_eq!(parse_state("product:h1s*h1s").unwrap().energy(), Some(-1.0));
        assert!(!parse_state("super:ho0+ho1").unwrap().is_stationary());
        assert!(parse_state("super:ho0+ho1,omega=2").is_ok());
    }

    #[test]
    fn defaults() {
        assert_eq!(parse_state("ho1d").unwrap().energy(), Some(0.5));
        assert_eq!(parse_state("hydrogen").unwrap().energy(), Some(-0.5));
        assert_eq!(parse_state("hydrogen:2s").unwrap().energy(), Some(-0.125));
    }

    #[test]
    fn rejects_bad_ids() {
        for bad in [
            "ho1d:n=0,omega=1,mass=2",
            "ho1d:n=-1",
            "ho1d:omega=0",
            "ho1d:n=0,n=1",
            "hydrogen:3d",
            "hydrogen:1s,Z=-1",
            "gauss:sigma=0",
            "gauss:1s",
            "hooke:omega=1",
            "super",
            "super:ho0+hx",
            "product:ho0*h1s",
            "helium",
            "ho1d:n=1,,omega=1",
            "ho1d:n=13",
        ] {
            assert!(parse_state(bad).is_err(), "{bad} parsed");
        }
    }
}
