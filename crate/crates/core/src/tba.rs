//! The integral iteration for `𝒳_γ(ζ)` along the active BPS rays.
//!
//! On each ray `ζ' = α_μ e^s` the stored unknown is `F_μ(s) = log(1 - σ_μ 𝒳_μ(ζ'))`
//! (with the default `σ = -1`, `log(1 + 𝒳_μ)`), sampled on a uniform grid in `s`
//! and integrated with the trapezoid rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bps::{ActiveRay, BpsSpectrum, RAY_COLLISION_TOL};
use crate::curve::{Charge, ChargeLattice, Periods};
use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weights;

/// Largest real part of `log 𝒳` accepted before declaring divergence.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: f64,
    /// Half-width of the s-grid; `None` picks `cosh L = 1 + 20/(R min|Z|)`.
    #[serde(rename = "L")]
    pub l: Option<f64>,
    /// Samples per ray, odd.
    #[serde(rename = "N")]
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Under-relaxation factor in `(0, 1]`; 1 disables it.
    pub relaxation: f64,
    /// `σ` in `log(1 - σ 𝒳)` for unlisted charges.
    pub default_sigma: f64,
    /// Per-charge overrides of `σ`.
    pub sigma: Vec<(Charge, f64)>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r: 1.0,
            theta: 0.0,
            l: None,
            n: 257,
            tol: 1e-10,
            max_iter: 100,
            relaxation: 1.0,
            default_sigma: -1.0,
            sigma: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn new(r: f64, theta: f64) -> Self {
        SolverConfig {
            r,
            theta,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::InvalidInput(format!("R must be positive, got {}", self.r)));
        }
        if self.n < 3 || self.n % 2 == 0 {
            return Err(Error::InvalidInput(format!("N must be odd and at least 3, got {}", self.n)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tol must be positive".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
            return Err(Error::InvalidInput("relaxation must lie in (0, 1]".into()));
        }
        if let Some(l) = self.l {
            if !(l > 0.0) {
                return Err(Error::InvalidInput("L must be positive".into()));
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::InvalidInput("theta must be finite".into()));
        }
        Ok(())
    }

    fn sigma_for(&self, c: &Charge) -> f64 {
        self.sigma
            .iter()
            .find(|(k, _)| k == c)
            .map(|(_, s)| *s)
            .unwrap_or(self.default_sigma)
    }

    fn half_width(&self, min_abs_z: f64) -> f64 {
        self.l.unwrap_or_else(|| (1.0 + 20.0 / (self.r * min_abs_z)).acosh())
    }
}

/// Samples of `F_μ` on one active ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayGrid {
    pub charge: Charge,
    pub omega: i64,
    pub alpha: Complex64,
    pub abs_z: f64,
    pub sigma: f64,
    /// `F_μ(s_k)` for `s_k = -L + 2kL/(N-1)`.
    pub samples: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TbaSolution {
    #[serde(rename = "R")]
    pub r: f64,
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// Basis central charges.
    pub central_charges: Vec<Complex64>,
    pub pairing: Vec<Vec<i64>>,
    pub ray_grids: Vec<RayGrid>,
    pub iterations_used: usize,
    pub final_delta: f64,
    /// Sup-norm change after each iteration.
    pub delta_history: Vec<f64>,
}

/// `exp(R(ζ⁻¹ Z_γ + ζ conj(Z_γ)))`.
pub fn semiflat(gamma: &Charge, zeta: Complex64, r: f64, periods: &Periods) -> Complex64 {
    semiflat_log(periods.central_charge(gamma), zeta, r).exp()
}

fn semiflat_log(z: Complex64, zeta: Complex64, r: f64) -> Complex64 {
    (z / zeta + zeta * z.conj()) * r
}

fn pairing_with(pairing: &[Vec<i64>], a: &Charge, b: &Charge) -> i64 {
    let mut s = 0;
    for (i, &ai) in a.components().iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.components().iter().enumerate() {
            s += ai * pairing[i][j] * bj;
        }
    }
    s
}

fn log_one_minus(sigma: f64, log_x: Complex64) -> Complex64 {
    if sigma == -1.0 && log_x.re > 30.0 {
        // log(1 + X) = log X + log(1 + 1/X) without overflow
        log_x + (1.0 + (-log_x).exp()).ln()
    } else {
        (Complex64::new(1.0, 0.0) - log_x.exp() * sigma).ln()
    }
}

/// Cauchy-kernel table for a pair of rays: entry `d + N - 1` holds
/// `(β e^{d h} + 1)/(β e^{d h} - 1)` with `β = α_source / α_target`.
fn kernel_table(alpha_target: Complex64, alpha_source: Complex64, n: usize, h: f64) -> Vec<Complex64> {
    let beta = alpha_source / alpha_target;
    (0..2 * n - 1)
        .map(|m| {
            let d = m as f64 - (n as f64 - 1.0);
            let b = beta * (d * h).exp();
            (b + 1.0) / (b - 1.0)
        })
        .collect()
}

struct Interaction {
    source: usize,
    /// `Ω(μ) ⟨ν, μ⟩ / (4πi)` times the trapezoid step.
    coefficient: Complex64,
    table: Vec<Complex64>,
}

/// The discretized problem: rays, grid, driving terms and kernel tables.
pub struct TbaProblem {
    config: SolverConfig,
    rays: Vec<ActiveRay>,
    sigmas: Vec<f64>,
    central_charges: Vec<Complex64>,
    pairing: Vec<Vec<i64>>,
    l: f64,
    weights: Vec<f64>,
    driving: Vec<Vec<Complex64>>,
    interactions: Vec<Vec<Interaction>>,
}

impl TbaProblem {
    pub fn new(config: &SolverConfig, spectrum: &BpsSpectrum, periods: &Periods, lattice: &ChargeLattice) -> Result<Self> {
        config.validate()?;
        let rays = spectrum.active_rays(periods, lattice)?;
        let min_abs = rays.iter().map(|r| r.abs_z).fold(f64::INFINITY, f64::min);
        let l = if rays.is_empty() { 1.0 } else { config.half_width(min_abs) };
        let n = config.n;
        let h = 2.0 * l / (n as f64 - 1.0);
        let weights = trapezoid_weights(n, 1.0);
        let s: Vec<f64> = (0..n).map(|k| -l + k as f64 * h).collect();
        let r = config.r;
        let driving = rays
            .iter()
            .map(|ray| {
                let z = periods.central_charge(&ray.charge);
                s.iter().map(|&sk| semiflat_log(z, ray.alpha * sk.exp(), r)).collect()
            })
            .collect();
        let pairing = lattice.pairing_matrix().to_vec();
        let interactions = rays
            .iter()
            .map(|target| {
                rays.iter()
                    .enumerate()
                    .filter_map(|(m, source)| {
                        let p = pairing_with(&pairing, &target.charge, &source.charge);
                        if p == 0 {
                            return None;
                        }
                        Some(Interaction {
                            source: m,
                            coefficient: Complex64::new(0.0, -1.0) * ((source.omega * p) as f64 * h / (4.0 * PI)),
                            table: kernel_table(target.alpha, source.alpha, n, h),
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(TbaProblem {
            sigmas: rays.iter().map(|r| config.sigma_for(&r.charge)).collect(),
            config: config.clone(),
            rays,
            central_charges: periods.basis().to_vec(),
            pairing,
            l,
            weights,
            driving,
            interactions,
        })
    }

    pub fn rays(&self) -> &[ActiveRay] {
        &self.rays
    }

    /// `𝒳^{(0)} = 0`, i.e. every `F` vanishes.
    pub fn initial_state(&self) -> Vec<Vec<Complex64>> {
        vec![vec![Complex64::default(); self.config.n]; self.rays.len()]
    }

    /// One application of the iteration map to the sampled `F`, before relaxation.
    ///
    /// `iteration` is only used for error reporting.
    pub fn iterate_once(&self, state: &[Vec<Complex64>], iteration: usize) -> Result<Vec<Vec<Complex64>>> {
        let n = self.config.n;
        (0..self.rays.len())
            .into_par_iter()
            .map(|nu| {
                let mut log_x = self.driving[nu].clone();
                for inter in &self.interactions[nu] {
                    let f = &state[inter.source];
                    for (k, lx) in log_x.iter_mut().enumerate() {
                        let mut acc = Complex64::default();
                        let base = n - 1 - k;
                        for l in 0..n {
                            acc += inter.table[base + l] * f[l] * self.weights[l];
                        }
                        *lx += inter.coefficient * acc;
                    }
                }
                let sigma = self.sigmas[nu];
                log_x
                    .into_iter()
                    .map(|lx| {
                        if lx.re > MAX_EXPONENT || !lx.re.is_finite() {
                            Err(Error::NumericOverflow(iteration, lx.re))
                        } else {
                            Ok(log_one_minus(sigma, lx))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn solve(&self) -> Result<TbaSolution> {
        let mut state = self.initial_state();
        let mut history = Vec::new();
        let mut delta = f64::INFINITY;
        let mut used = 0;
        let w = self.config.relaxation;
        for it in 1..=self.config.max_iter {
            let next = self.iterate_once(&state, it)?;
            delta = 0.0;
            for (old, new) in state.iter_mut().zip(next) {
                for (o, nv) in old.iter_mut().zip(new) {
                    let updated = *o * (1.0 - w) + nv * w;
                    delta = delta.max((updated - *o).norm());
                    *o = updated;
                }
            }
            history.push(delta);
            used = it;
            if delta < self.config.tol {
                break;
            }
        }
        if !(delta < self.config.tol) {
            return Err(Error::NoConvergence(used, delta));
        }
        Ok(self.snapshot(state, history))
    }

    /// Packages a sampled state (for instance an intermediate iterate) as a solution.
    pub fn snapshot(&self, state: Vec<Vec<Complex64>>, delta_history: Vec<f64>) -> TbaSolution {
        TbaSolution {
            r: self.config.r,
            theta: self.config.theta,
            l: self.l,
            n: self.config.n,
            central_charges: self.central_charges.clone(),
            pairing: self.pairing.clone(),
            ray_grids: self
                .rays
                .iter()
                .zip(state)
                .zip(&self.sigmas)
                .map(|((r, samples), &sigma)| RayGrid {
                    charge: r.charge.clone(),
                    omega: r.omega,
                    alpha: r.alpha,
                    abs_z: r.abs_z,
                    sigma,
                    samples,
                })
                .collect(),
            iterations_used: delta_history.len(),
            final_delta: delta_history.last().copied().unwrap_or(f64::INFINITY),
            delta_history,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn evaluate_log_with<'a>(
    central_charges: &[Complex64],
    pairing: &[Vec<i64>],
    rays: impl Iterator<Item = (&'a Charge, i64, Complex64, &'a [Complex64])>,
    r: f64,
    l: f64,
    h: f64,
    gamma: &Charge,
    zeta: Complex64,
) -> Complex64 {
    let z: Complex64 = gamma
        .components()
        .iter()
        .zip(central_charges)
        .map(|(&g, z)| z * g as f64)
        .sum();
    let mut out = semiflat_log(z, zeta, r);
    for (charge, omega, alpha, f) in rays {
        let p = pairing_with(pairing, gamma, charge);
        if p == 0 {
            continue;
        }
        let n = f.len();
        let w = trapezoid_weights(n, h);
        let mut acc = Complex64::default();
        for (k, fk) in f.iter().enumerate() {
            let zp = alpha * (-l + k as f64 * h).exp();
            acc += (zp + zeta) / (zp - zeta) * fk * w[k];
        }
        out += Complex64::new(0.0, -1.0) * ((omega * p) as f64 / (4.0 * PI)) * acc;
    }
    out
}

/// Builds the discretized problem and iterates to convergence.
pub fn solve(config: &SolverConfig, spectrum: &BpsSpectrum, periods: &Periods, lattice: &ChargeLattice) -> Result<TbaSolution> {
    TbaProblem::new(config, spectrum, periods, lattice)?.solve()
}

impl TbaSolution {
    fn h(&self) -> f64 {
        2.0 * self.l / (self.n as f64 - 1.0)
    }

    fn check_off_rays(&self, zeta: Complex64) -> Result<()> {
        if zeta.norm() == 0.0 || !zeta.re.is_finite() || !zeta.im.is_finite() {
            return Err(Error::InvalidInput(format!("cannot evaluate at ζ = {zeta}")));
        }
        for g in &self.ray_grids {
            let d = (zeta.arg() - g.alpha.arg()).rem_euclid(2.0 * PI);
            if d.min(2.0 * PI - d) < RAY_COLLISION_TOL {
                return Err(Error::OnRayEvaluation(zeta, g.charge.to_string()));
            }
        }
        Ok(())
    }

    /// `log 𝒳_γ(ζ)`, the driving term plus quadrature against the stored ray data.
    pub fn evaluate_log(&self, gamma: &Charge, zeta: Complex64) -> Result<Complex64> {
        if gamma.rank() != self.central_charges.len() {
            return Err(Error::InvalidInput(format!("charge {gamma} has the wrong rank")));
        }
        self.check_off_rays(zeta)?;
        Ok(evaluate_log_with(
            &self.central_charges,
            &self.pairing,
            self.ray_grids
                .iter()
                .map(|g| (&g.charge, g.omega, g.alpha, g.samples.as_slice())),
            self.r,
            self.l,
            self.h(),
            gamma,
            zeta,
        ))
    }

    pub fn evaluate(&self, gamma: &Charge, zeta: Complex64) -> Result<Complex64> {
        Ok(self.evaluate_log(gamma, zeta)?.exp())
    }

    /// `X_γ = 𝒳_γ(e^{iϑ})`.
    pub fn spectral_coordinate(&self, gamma: &Charge) -> Result<f64> {
        Ok(self.evaluate(gamma, Complex64::from_polar(1.0, self.theta))?.re)
    }

    /// Largest `|𝒳_μ|` over all ray samples.
    pub fn max_ray_modulus(&self) -> f64 {
        self.ray_grids
            .iter()
            .flat_map(|g| {
                g.samples
                    .iter()
                    .map(move |f| ((f.exp() - 1.0) / -g.sigma).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Evaluates `X_γ` directly.
pub fn evaluate(sol: &TbaSolution, gamma: &Charge, zeta: Complex64) -> Result<Complex64> {
    sol.evaluate(gamma, zeta)
}
