use std::fs;
use std::path::Path;

use cubic_tba::bps::BpsSpectrum;
use cubic_tba::curve::{ChargeLattice, Periods, SpectralCurve};
use cubic_tba::model::{CurveDefinition, Example};
use serde_json::json;

use crate::output::CliError;
use crate::Source;

pub struct Loaded {
    pub name: String,
    pub example: Option<Example>,
    pub definition: CurveDefinition,
    pub curve: SpectralCurve,
    pub lattice: ChargeLattice,
}

impl Loaded {
    pub fn periods(&self) -> Result<Periods, CliError> {
        Ok(Periods::compute(&self.curve, &self.lattice)?)
    }
}

pub fn load(source: &Source) -> Result<Loaded, CliError> {
    let (definition, example) = match (&source.example, &source.curve) {
        (Some(ex), None) => (ex.definition(), Some(*ex)),
        (None, Some(path)) => (CurveDefinition::load(path)?, None),
        _ => return Err(CliError::Usage("give exactly one of --example or --curve".into())),
    };
    let (curve, lattice) = definition.build()?;
    let name = match (example, &definition.name) {
        (Some(ex), _) => ex.name().to_string(),
        (None, Some(n)) => n.clone(),
        (None, None) => "custom".to_string(),
    };
    Ok(Loaded {
        name,
        example,
        definition,
        curve,
        lattice,
    })
}

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// The spectrum file if given, otherwise the example's built-in one.
///
/// Files are validated on load; a failing report aborts.
pub fn spectrum(loaded: &Loaded, file: Option<&Path>) -> Result<BpsSpectrum, CliError> {
    let s = match (file, loaded.example) {
        (Some(path), _) => {
            let (s, report) = BpsSpectrum::from_json(&read(path)?)?;
            if !report.is_valid() {
                return Err(CliError::Validation(
                    format!("spectrum {} failed validation", path.display()),
                    json!(report),
                ));
            }
            s
        }
        (None, Some(ex)) => BpsSpectrum::builtin(ex),
        (None, None) => return Err(CliError::Usage("a custom curve needs --spectrum".into())),
    };
    if s.rank() != loaded.lattice.rank() && !s.is_empty() {
        return Err(CliError::Usage(format!(
            "spectrum rank {} does not match lattice rank {}",
            s.rank(),
            loaded.lattice.rank()
        )));
    }
    Ok(s)
}
