//! `Ξ` and mutation models from presets or JSON.
//!
//! A `Ξ` argument is one of
//!
//! * `kingman` or `kingman:<a>`: `a δ₀` (default `a = 1`);
//! * `uniform_l:<l>`: a unit atom at `(1/l, …, 1/l)`;
//! * `pd:<theta>`: the Poisson-Dirichlet coalescent;
//! * inline JSON starting with `{`, or a path to a JSON file.
//!
//! The JSON form is
//!
//! ```json
//! {"kingman_mass": 0.5, "atoms": [{"weight": 1.0, "masses": [0.5, 0.25]}]}
//! {"kingman_mass": 0.0, "poisson_dirichlet": 2.0}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xifv_core::lookdown::MutationModel;
use xifv_core::simplex::{XiBody, XiSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub weight: f64,
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiJson {
    #[serde(default)]
    pub kingman_mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poisson_dirichlet: Option<f64>,
}

impl XiJson {
    pub fn to_spec(&self) -> Result<XiSpec, String> {
        match (&self.atoms, self.poisson_dirichlet) {
            (Some(_), Some(_)) => Err("give either atoms or poisson_dirichlet, not both".into()),
            (_, Some(theta)) => {
                let pd = XiSpec::poisson_dirichlet(theta).map_err(|e| e.to_string())?;
                XiSpec::new(self.kingman_mass, pd.body().clone()).map_err(|e| e.to_string())
            }
            (atoms, None) => {
                let atoms = atoms.iter().flatten().map(|a| (a.weight, a.masses.clone())).collect();
                XiSpec::finite_atoms(self.kingman_mass, atoms).map_err(|e| e.to_string())
            }
        }
    }

    pub fn from_spec(xi: &XiSpec) -> Self {
        match xi.body() {
            XiBody::FiniteAtoms(atoms) => Self {
                kingman_mass: xi.kingman_mass(),
                atoms: Some(atoms.iter().map(|a| AtomJson { weight: a.weight, masses: a.point.masses().to_vec() }).collect()),
                poisson_dirichlet: None,
            },
            XiBody::PoissonDirichlet { theta } => {
                Self { kingman_mass: xi.kingman_mass(), atoms: None, poisson_dirichlet: Some(*theta) }
            }
        }
    }
}

fn parse_number<T: std::str::FromStr>(what: &str, s: &str) -> Result<T, String> {
    s.trim().parse().map_err(|_| format!("cannot read {what} from {s:?}"))
}

fn read_json_arg(arg: &str) -> Result<String, String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(Path::new(arg)).map_err(|e| format!("cannot read {arg}: {e}"))
    }
}

/// Expands a preset or reads a JSON description.
pub fn parse_xi(arg: &str) -> Result<XiSpec, String> {
    let (name, param) = match arg.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (arg, None),
    };
    let spec = match (name, param) {
        ("kingman", None) => XiSpec::kingman(1.0),
        ("kingman", Some(a)) => XiSpec::kingman(parse_number("kingman mass", a)?),
        ("uniform_l", Some(l)) => XiSpec::uniform_atom(parse_number("l", l)?),
        ("pd", Some(theta)) => XiSpec::poisson_dirichlet(parse_number("theta", theta)?),
        ("uniform_l" | "pd", None) => return Err(format!("preset {name} needs a parameter, e.g. {name}:2")),
        _ => {
            let text = read_json_arg(arg)?;
            let json: XiJson = serde_json::from_str(&text).map_err(|e| format!("invalid xi JSON: {e}"))?;
            return json.to_spec();
        }
    };
    spec.map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationJson {
    pub rate: f64,
    pub transition: Vec<Vec<f64>>,
}

/// `none`, `flip:<rate>` (jump to a uniform other type), inline JSON or a
/// JSON file with `rate` and `transition`.
pub fn parse_mutation(arg: &str, alphabet: usize) -> Result<MutationModel, String> {
    let model = if arg == "none" {
        Ok(MutationModel::none(alphabet))
    } else if let Some(rate) = arg.strip_prefix("flip:") {
        MutationModel::uniform_flip(parse_number("mutation rate", rate)?, alphabet)
    } else {
        let text = read_json_arg(arg)?;
        let json: MutationJson = serde_json::from_str(&text).map_err(|e| format!("invalid mutation JSON: {e}"))?;
        MutationModel::new(json.rate, json.transition)
    };
    let model = model.map_err(|e| e.to_string())?;
    if model.alphabet_size() != alphabet {
        return Err(format!("mutation model has {} types, expected {alphabet}", model.alphabet_size()));
    }
    Ok(model)
}

/// Comma-separated probabilities, or `uniform`.
pub fn parse_distribution(arg: &str, alphabet: usize) -> Result<Vec<f64>, String> {
    if arg == "uniform" {
        return Ok(vec![1.0 / alphabet as f64; alphabet]);
    }
    let dist: Vec<f64> = arg.split(',').map(|s| parse_number("probability", s)).collect::<Result<_, _>>()?;
    if dist.len() != alphabet {
        return Err(format!("distribution has {} entries, expected {alphabet}", dist.len()));
    }
    let total: f64 = dist.iter().sum();
    if dist.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(format!("{arg:?} is not a probability vector"));
    }
    Ok(dist)
}

/// `τ:γ,τ:γ,…`, sorted by time.
pub fn parse_schedule(arg: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    for item in arg.split(',').filter(|s| !s.trim().is_empty()) {
        let (t, g) = item.split_once(':').ok_or_else(|| format!("schedule entry {item:?} is not time:severity"))?;
        out.push((parse_number("time", t)?, parse_number("severity", g)?));
    }
    if out.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err("schedule times must be nondecreasing".into());
    }
    Ok(out)
}
