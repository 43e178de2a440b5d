//! Curve-and-lattice definition files and the two shipped examples.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{ChargeLattice, LiftedPath, Polynomial, SpectralCurve, Tolerances};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

const PENTAGON_JSON: &str = include_str!("../data/pentagon.json");
const HEXAGON_JSON: &str = include_str!("../data/hexagon.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Pentagon,
    Hexagon,
}

impl Example {
    pub fn definition(self) -> CurveDefinition {
        let text = match self {
            Example::Pentagon => PENTAGON_JSON,
            Example::Hexagon => HEXAGON_JSON,
        };
        serde_json::from_str(text).expect("shipped example definitions are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            Example::Pentagon => "pentagon",
            Example::Hexagon => "hexagon",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pentagon" => Ok(Example::Pentagon),
            "hexagon" => Ok(Example::Hexagon),
            other => Err(Error::InvalidInput(format!("unknown example '{other}'"))),
        }
    }
}

/// One basis contour as stored on disk.
///
/// The starting sheet is given either as an explicit x-value or as an index into
/// the sheets over the first waypoint (ordered by continuation from the basepoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub waypoints: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_sheet_value: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_sheet_index: Option<usize>,
}

/// JSON document describing `P0`, the basepoint, the pairing and the basis contours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDefinition {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    /// Coefficients lowest degree first, each `[re, im]`.
    pub polynomial: Vec<Complex64>,
    #[serde(default)]
    pub basepoint: Option<Complex64>,
    pub pairing: Vec<Vec<i64>>,
    pub contours: Vec<ContourSpec>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

impl CurveDefinition {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let def: CurveDefinition =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad curve file: {e}")))?;
        if def.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported schema_version {}",
                def.schema_version
            )));
        }
        Ok(def)
    }

    pub fn build(&self) -> Result<(SpectralCurve, ChargeLattice)> {
        let poly = Polynomial::new(self.polynomial.clone())?;
        let curve = SpectralCurve::with_options(poly, self.basepoint, self.tolerances.unwrap_or_default())?;
        let contours = self
            .contours
            .iter()
            .map(|c| {
                let first = *c
                    .waypoints
                    .first()
                    .ok_or_else(|| Error::InvalidInput("empty contour".into()))?;
                let start = match (c.start_sheet_value, c.start_sheet_index) {
                    (Some(v), _) => v,
                    (None, Some(k)) if k < 3 => curve.sheets_at(first)?[k],
                    _ => {
                        return Err(Error::InvalidInput(
                            "contour needs start_sheet_value or start_sheet_index in 0..3".into(),
                        ))
                    }
                };
                Ok(LiftedPath::new(c.waypoints.clone(), start))
            })
            .collect::<Result<Vec<_>>>()?;
        let lattice = ChargeLattice::new(self.pairing.clone(), contours)?;
        let n = curve.degree();
        if n >= 1 && lattice.rank() != 2 * n - 2 {
            return Err(Error::InvalidInput(format!(
                "lattice rank {} does not equal 2n-2 = {}",
                lattice.rank(),
                2 * n - 2
            )));
        }
        Ok((curve, lattice))
    }

    /// Same definition with every starting sheet written out as an explicit value.
    pub fn resolved(&self) -> Result<Self> {
        let (_, lattice) = self.build()?;
        let mut out = self.clone();
        for (spec, path) in out.contours.iter_mut().zip(lattice.basis_contours()) {
            spec.start_sheet_value = Some(path.starting_sheet_value);
            spec.start_sheet_index = None;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_examples_build() {
        for ex in [Example::Pentagon, Example::Hexagon] {
            let (curve, lattice) = ex.definition().build().unwrap();
            assert_eq!(lattice.rank(), 2 * curve.degree() - 2);
        }
    }

    #[test]
    fn resolved_definition_round_trips() {
        let def = Example::Pentagon.definition().resolved().unwrap();
        let text = serde_json::to_string(&def).unwrap();
        let back = CurveDefinition::from_json(&text).unwrap();
        assert_eq!(back, def);
        let (_, a) = back.build().unwrap();
        let (_, b) = Example::Pentagon.definition().build().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let mut def = Example::Pentagon.definition();
        def.schema_version = 7;
        let text = serde_json::to_string(&def).unwrap();
        assert!(CurveDefinition::from_json(&text).is_err());
    }

    #[test]
    fn example_names_parse() {
        assert_eq!("Hexagon".parse::<Example>().unwrap(), Example::Hexagon);
        assert!("heptagon".parse::<Example>().is_err());
    }
}
