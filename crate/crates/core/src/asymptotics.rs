//! Exact and large-R predictions for `log X_γ`, and the remainder left after them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bps::{BpsSpectrum, RAY_COLLISION_TOL};
use crate::curve::{Charge, ChargeLattice, Periods};
use crate::error::{Error, Result};
use crate::tba::TbaSolution;

/// Relative tolerance for grouping corrections into one rate.
const RATE_TOL: f64 = 1e-9;

/// One term `c_μ R^{-1/2} e^{-rate R}` of the correction sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub charge: Charge,
    pub coefficient: Complex64,
    /// `2|Z_μ|`.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub charge: Charge,
    pub theta: f64,
    pub a: f64,
    pub corrections: Vec<Correction>,
    /// Smallest `|Z_μ|` among contributing charges; infinite for kernel charges.
    pub rho: f64,
    /// Sum of the coefficients sharing the leading rate `2ρ`.
    pub leading_coefficient: Complex64,
}

/// `a_γ = 2 Re(e^{-iϑ} Z_γ)`.
pub fn linear_coefficient(gamma: &Charge, theta: f64, periods: &Periods) -> f64 {
    2.0 * (Complex64::from_polar(1.0, -theta) * periods.central_charge(gamma)).re
}

pub fn build_prediction(
    gamma: &Charge,
    theta: f64,
    spectrum: &BpsSpectrum,
    periods: &Periods,
    lattice: &ChargeLattice,
) -> Result<AsymptoticPrediction> {
    lattice.check_rank(gamma)?;
    let e = Complex64::from_polar(1.0, theta);
    let mut corrections = Vec::new();
    for (mu, omega) in spectrum.entries() {
        let p = lattice.pairing(gamma, mu);
        if p == 0 {
            continue;
        }
        let z = periods.central_charge(mu);
        let alpha = -z / z.norm();
        let gap = (theta - alpha.arg()).rem_euclid(2.0 * PI);
        if gap.min(2.0 * PI - gap) < RAY_COLLISION_TOL {
            return Err(Error::OnRayTheta(theta, mu.to_string()));
        }
        let prefactor = (omega * p) as f64 / (4.0 * PI) * Complex64::new(0.0, -1.0);
        corrections.push(Correction {
            charge: mu.clone(),
            coefficient: prefactor * (alpha + e) / (alpha - e) * (PI / z.norm()).sqrt(),
            rate: 2.0 * z.norm(),
        });
    }
    let rho = corrections.iter().map(|c| 0.5 * c.rate).fold(f64::INFINITY, f64::min);
    let leading_coefficient = corrections
        .iter()
        .filter(|c| (0.5 * c.rate - rho).abs() <= RATE_TOL * rho)
        .map(|c| c.coefficient)
        .sum();
    Ok(AsymptoticPrediction {
        charge: gamma.clone(),
        theta,
        a: linear_coefficient(gamma, theta, periods),
        corrections,
        rho,
        leading_coefficient,
    })
}

impl AsymptoticPrediction {
    pub fn is_exact(&self) -> bool {
        self.corrections.is_empty()
    }

    /// `Σ c_μ R^{-1/2} e^{-2|Z_μ|R}`, real part.
    pub fn correction(&self, r: f64) -> f64 {
        self.corrections
            .iter()
            .map(|c| c.coefficient * ((-c.rate * r).exp() / r.sqrt()))
            .sum::<Complex64>()
            .re
    }

    /// `a R` plus the full correction sum.
    pub fn predict(&self, r: f64) -> f64 {
        self.a * r + self.correction(r)
    }

    /// `|δ| √R e^{2ρR}`; for exact predictions just `|δ|`.
    pub fn scaled_remainder(&self, delta: f64, r: f64) -> f64 {
        if self.is_exact() {
            delta.abs()
        } else {
            delta.abs() * r.sqrt() * (2.0 * self.rho * r).exp()
        }
    }
}

/// `δ = log X_γ − a_γ R − Σ c_μ R^{-1/2} e^{-2|Z_μ|R}` at the solution's own `R` and `ϑ`.
pub fn remainder(solution: &TbaSolution, prediction: &AsymptoticPrediction) -> Result<f64> {
    if (solution.theta - prediction.theta).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "solution at ϑ = {} but prediction at ϑ = {}",
            solution.theta, prediction.theta
        )));
    }
    let log_x = solution
        .evaluate_log(&prediction.charge, Complex64::from_polar(1.0, solution.theta))?
        .re;
    Ok(log_x - prediction.predict(solution.r))
}
