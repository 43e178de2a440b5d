//! BPS spectra `γ ↦ Ω(γ)` and the rays they activate.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{Charge, ChargeLattice, Periods};
use crate::error::{Error, Result};
use crate::model::{Example, SCHEMA_VERSION};
use crate::network::FiniteWeb;

/// Rays closer than this in phase count as coinciding.
pub const RAY_COLLISION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BpsEntry {
    pub charge: Charge,
    pub omega: i64,
}

/// A finite map from charges to nonzero BPS counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpsSpectrum {
    rank: usize,
    entries: BTreeMap<Charge, i64>,
    /// Optional matrix of the ℤ/3 action on the lattice, acting on column vectors.
    z3_action: Option<Vec<Vec<i64>>>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumFile {
    schema_version: u32,
    entries: Vec<BpsEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z3_action: Option<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "violations", rename_all = "snake_case")]
pub enum Z3Check {
    NotChecked,
    Passed,
    Failed(Vec<Charge>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Charges `γ` with `Ω(γ) ≠ Ω(-γ)`.
    pub symmetry_violations: Vec<Charge>,
    pub z3: Z3Check,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.symmetry_violations.is_empty() && !matches!(self.z3, Z3Check::Failed(_))
    }
}

/// One active ray `Z_μ ℝ₋` in the ζ-plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveRay {
    pub charge: Charge,
    pub omega: i64,
    /// `α_μ = -Z_μ / |Z_μ|`.
    pub alpha: Complex64,
    /// `arg α_μ` in `(-π, π]`.
    pub phase: f64,
    pub abs_z: f64,
}

impl BpsSpectrum {
    pub fn new(rank: usize, entries: impl IntoIterator<Item = (Charge, i64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (c, omega) in entries {
            if c.rank() != rank {
                return Err(Error::InvalidInput(format!("charge {c} does not have rank {rank}")));
            }
            if c.is_zero() {
                return Err(Error::InvalidInput("the zero charge cannot carry a BPS count".into()));
            }
            if omega == 0 {
                return Err(Error::InvalidInput(format!("charge {c} listed with Ω = 0")));
            }
            if map.insert(c.clone(), omega).is_some() {
                return Err(Error::InvalidInput(format!("charge {c} listed twice")));
            }
        }
        Ok(BpsSpectrum {
            rank,
            entries: map,
            z3_action: None,
        })
    }

    pub fn with_z3_action(mut self, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if matrix.len() != self.rank || matrix.iter().any(|r| r.len() != self.rank) {
            return Err(Error::InvalidInput(format!("ℤ/3 action must be {0}×{0}", self.rank)));
        }
        self.z3_action = Some(matrix);
        Ok(self)
    }

    pub fn empty(rank: usize) -> Self {
        BpsSpectrum {
            rank,
            entries: BTreeMap::new(),
            z3_action: None,
        }
    }

    /// The published spectra, every listed count equal to 1.
    pub fn builtin(example: Example) -> Self {
        let listed: &[&[i64]] = match example {
            Example::Pentagon => &[&[1, 0], &[0, 1], &[1, 1]],
            Example::Hexagon => &[
                &[1, 0, 0, 0],
                &[0, -1, -1, -1],
                &[-1, 1, 1, 1],
                &[0, 1, 0, 0],
                &[1, -1, -1, 0],
                &[-1, 0, 1, 0],
                &[0, -1, -1, 0],
                &[1, 0, -1, -1],
                &[-1, 1, 2, 1],
                &[1, 1, 0, 0],
                &[1, -2, -2, -1],
                &[-2, 1, 2, 1],
            ],
        };
        let rank = listed[0].len();
        let entries = listed
            .iter()
            .flat_map(|v| [Charge(v.to_vec()), -Charge(v.to_vec())])
            .map(|c| (c, 1));
        BpsSpectrum::new(rank, entries).expect("built-in spectra are well formed")
    }

    /// Counts each harvested web once per charge.
    pub fn from_webs(rank: usize, webs: &[FiniteWeb]) -> Result<Self> {
        let mut counts: BTreeMap<Charge, i64> = BTreeMap::new();
        for w in webs {
            *counts.entry(w.charge.clone()).or_default() += 1;
        }
        BpsSpectrum::new(rank, counts)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Ω(γ)`, zero for unlisted charges.
    pub fn omega(&self, gamma: &Charge) -> i64 {
        self.entries.get(gamma).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Charge, i64)> {
        self.entries.iter().map(|(c, &o)| (c, o))
    }

    pub fn z3_action(&self) -> Option<&[Vec<i64>]> {
        self.z3_action.as_deref()
    }

    pub fn validate(&self) -> ValidationReport {
        let symmetry_violations = self
            .entries
            .iter()
            .filter(|(c, &o)| self.omega(&-(*c).clone()) != o)
            .map(|(c, _)| -c.clone())
            .collect();
        let z3 = match &self.z3_action {
            None => Z3Check::NotChecked,
            Some(m) => {
                let bad: Vec<Charge> = self
                    .entries
                    .iter()
                    .filter(|(c, &o)| {
                        let image = Charge(
                            m.iter()
                                .map(|row| row.iter().zip(c.components()).map(|(a, b)| a * b).sum())
                                .collect(),
                        );
                        self.omega(&image) != o
                    })
                    .map(|(c, _)| c.clone())
                    .collect();
                if bad.is_empty() {
                    Z3Check::Passed
                } else {
                    Z3Check::Failed(bad)
                }
            }
        };
        ValidationReport {
            symmetry_violations,
            z3,
        }
    }

    /// One ray per entry, sorted by phase.
    ///
    /// Fails with [`Error::RayCollision`] when two charges with nonzero pairing
    /// have rays within [`RAY_COLLISION_TOL`] of each other.
    pub fn active_rays(&self, periods: &Periods, lattice: &ChargeLattice) -> Result<Vec<ActiveRay>> {
        if periods.rank() != self.rank || lattice.rank() != self.rank {
            return Err(Error::InvalidInput(format!(
                "spectrum rank {} does not match lattice rank {}",
                self.rank,
                lattice.rank()
            )));
        }
        let mut rays: Vec<ActiveRay> = self
            .entries
            .iter()
            .map(|(c, &omega)| {
                let z = periods.central_charge(c);
                let alpha = -z / z.norm();
                ActiveRay {
                    charge: c.clone(),
                    omega,
                    alpha,
                    phase: alpha.arg(),
                    abs_z: z.norm(),
                }
            })
            .collect();
        if let Some(r) = rays.iter().find(|r| !(r.abs_z > 0.0)) {
            return Err(Error::InvalidInput(format!("charge {} has vanishing central charge", r.charge)));
        }
        rays.sort_by(|a, b| a.phase.partial_cmp(&b.phase).unwrap().then(a.charge.cmp(&b.charge)));
        for (i, a) in rays.iter().enumerate() {
            for b in &rays[i + 1..] {
                let d = (a.phase - b.phase).rem_euclid(2.0 * PI);
                let d = d.min(2.0 * PI - d);
                if d < RAY_COLLISION_TOL && lattice.pairing(&a.charge, &b.charge) != 0 {
                    return Err(Error::RayCollision(a.charge.to_string(), b.charge.to_string()));
                }
            }
        }
        Ok(rays)
    }

    pub fn to_json(&self) -> String {
        let file = SpectrumFile {
            schema_version: SCHEMA_VERSION,
            entries: self
                .entries
                .iter()
                .map(|(c, &omega)| BpsEntry {
                    charge: c.clone(),
                    omega,
                })
                .collect(),
            z3_action: self.z3_action.clone(),
        };
        serde_json::to_string_pretty(&file).expect("spectrum serializes")
    }

    /// Parses a spectrum file and validates it.
    pub fn from_json(text: &str) -> Result<(Self, ValidationReport)> {
        let file: SpectrumFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("spectrum file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported spectrum schema version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        let rank = file
            .entries
            .first()
            .map(|e| e.charge.rank())
            .or_else(|| file.z3_action.as_ref().map(|m| m.len()))
            .unwrap_or(0);
        let mut s = BpsSpectrum::new(rank, file.entries.into_iter().map(|e| (e.charge, e.omega)))?;
        if let Some(m) = file.z3_action {
            s = s.with_z3_action(m)?;
        }
        let report = s.validate();
        Ok((s, report))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_sizes() {
        assert_eq!(BpsSpectrum::builtin(Example::Pentagon).len(), 6);
        let hex = BpsSpectrum::builtin(Example::Hexagon);
        assert_eq!(hex.len(), 24);
        assert_eq!(hex.omega(&Charge(vec![1, 0, 0, 0])), 1);
        assert_eq!(hex.omega(&Charge(vec![-2, 1, 2, 1])), 1);
        assert_eq!(hex.omega(&Charge(vec![2, 0, 0, 0])), 0);
    }

    #[test]
    fn lone_charge_violates_symmetry() {
        let s = BpsSpectrum::new(2, [(Charge(vec![1, 0]), 1)]).unwrap();
        let r = s.validate();
        assert_eq!(r.symmetry_violations, vec![Charge(vec![-1, 0])]);
        assert_eq!(r.z3, Z3Check::NotChecked);
        assert!(!r.is_valid());
    }

    #[test]
    fn rejects_zero_counts_and_duplicates() {
        assert!(BpsSpectrum::new(2, [(Charge(vec![1, 0]), 0)]).is_err());
        assert!(BpsSpectrum::new(2, [(Charge(vec![1, 0]), 1), (Charge(vec![1, 0]), 2)]).is_err());
        assert!(BpsSpectrum::new(2, [(Charge(vec![1, 0, 0]), 1)]).is_err());
    }

    #[test]
    fn z3_action_is_checked_when_supplied() {
        // cyclic permutation of three charges and their negatives
        let s = BpsSpectrum::new(
            3,
            [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
                .iter()
                .flat_map(|v| [(Charge(v.to_vec()), 1), (-Charge(v.to_vec()), 1)]),
        )
        .unwrap();
        let rot = vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]];
        assert_eq!(s.clone().with_z3_action(rot).unwrap().validate().z3, Z3Check::Passed);
        let swap = vec![vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        assert!(matches!(s.with_z3_action(swap).unwrap().validate().z3, Z3Check::Failed(_)));
    }

    #[test]
    fn json_round_trip() {
        let s = BpsSpectrum::builtin(Example::Hexagon);
        let (back, report) = BpsSpectrum::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(report.is_valid());
        assert!(BpsSpectrum::from_json(&s.to_json().replace("\"schema_version\": 1", "\"schema_version\": 7")).is_err());
    }
}
