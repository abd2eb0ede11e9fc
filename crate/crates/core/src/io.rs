//! JSON form of measures.
//!
//! ```json
//! {"basis": [{"name": "gamma", "value": 0.5772156649015329}],
//!  "atoms": [{"angle": {"turns": "1/2", "coeffs": {"gamma": 1}}, "re": 0.5, "im": 0.0}],
//!  "ac": [{"k": 1, "re": 1.0, "im": 0.0}]}
//! ```
//!
//! `turns` is written as `"p/q"` and read as `"p/q"` or `"p"`. Generators
//! with coefficient zero are omitted from `coeffs`. Atoms at the same
//! position and repeated `k` entries are summed on input.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::angle::{format_turns, parse_turns, Angle, Generator, GeneratorBasis};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, MixedMeasure, TrigPolyDensity, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorJson {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleJson {
    pub turns: String,
    #[serde(default)]
    pub coeffs: BTreeMap<String, i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomJson {
    pub angle: AngleJson,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffJson {
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    #[serde(default)]
    pub basis: Vec<GeneratorJson>,
    #[serde(default)]
    pub atoms: Vec<AtomJson>,
    #[serde(default)]
    pub ac: Vec<CoeffJson>,
}

pub fn angle_to_json(angle: &Angle, basis: &GeneratorBasis) -> AngleJson {
    AngleJson {
        turns: format_turns(angle.turns()),
        coeffs: basis
            .generators()
            .iter()
            .zip(angle.coeffs())
            .filter(|(_, c)| **c != 0)
            .map(|(g, c)| (g.name.clone(), *c))
            .collect(),
    }
}

pub fn angle_from_json(json: &AngleJson, basis: &GeneratorBasis) -> Result<Angle> {
    let turns = parse_turns(&json.turns)?;
    let mut coeffs = vec![0i64; basis.len()];
    for (name, c) in &json.coeffs {
        let i = basis
            .index_of(name)
            .ok_or_else(|| Error::Parse(format!("unknown generator {name:?}")))?;
        coeffs[i] = *c;
    }
    Ok(Angle::new(turns, coeffs))
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse(format!("non-finite {what}")))
    }
}

impl From<&MixedMeasure> for MeasureJson {
    fn from(mu: &MixedMeasure) -> Self {
        let basis = mu.basis();
        Self {
            basis: basis
                .generators()
                .iter()
                .map(|g| GeneratorJson {
                    name: g.name.clone(),
                    value: g.value,
                })
                .collect(),
            atoms: mu
                .disc
                .atoms()
                .iter()
                .map(|(a, w)| AtomJson {
                    angle: angle_to_json(a, basis),
                    re: w.re,
                    im: w.im,
                })
                .collect(),
            ac: mu
                .ac
                .coeffs()
                .iter()
                .map(|(k, c)| CoeffJson {
                    k: *k,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<&MeasureJson> for MixedMeasure {
    type Error = Error;

    fn try_from(json: &MeasureJson) -> Result<Self> {
        let basis = Arc::new(GeneratorBasis::new(
            json.basis
                .iter()
                .map(|g| Generator::new(g.name.clone(), g.value))
                .collect(),
        )?);
        let atoms = json
            .atoms
            .iter()
            .map(|a| {
                let w = C64::new(finite(a.re, "atom weight")?, finite(a.im, "atom weight")?);
                Ok((angle_from_json(&a.angle, &basis)?, w))
            })
            .collect::<Result<Vec<_>>>()?;
        let ac = json
            .ac
            .iter()
            .map(|c| {
                Ok((
                    c.k,
                    C64::new(finite(c.re, "coefficient")?, finite(c.im, "coefficient")?),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MixedMeasure::new(
            DiscreteMeasure::from_atoms(basis, atoms)?,
            TrigPolyDensity::from_coeffs(ac),
        ))
    }
}

pub fn measure_to_json(mu: &MixedMeasure) -> String {
    serde_json::to_string_pretty(&MeasureJson::from(mu)).expect("measure JSON is plain data")
}

pub fn measure_from_json(text: &str) -> Result<MixedMeasure> {
    let json: MeasureJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    MixedMeasure::try_from(&json)
}

pub fn read_measure(path: &Path) -> Result<MixedMeasure> {
    measure_from_json(&fs::read_to_string(path)?)
}

pub fn write_measure(path: &Path, mu: &MixedMeasure) -> Result<()> {
    let mut text = measure_to_json(mu);
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
