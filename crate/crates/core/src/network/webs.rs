use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grow::{classify_crossing, find_crossings, Event};
use super::trace::{seed_critical, trace, NetworkConfig, Origin, Status, Trajectory};
use crate::curve::{Charge, ChargeLattice, Periods, SpectralCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WebTopology {
    SingleString,
    ThreeStringJunction,
}

/// A finite web found at a BPS-ful phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteWeb {
    /// Constituent strings, each cut at the junction or zero it ends on.
    pub strings: Vec<Vec<Complex64>>,
    pub topology: WebTopology,
    pub charge: Charge,
    pub theta_star: f64,
    /// `∮ x dz` over the lifted web.
    pub period: Complex64,
}

/// Settings for scanning ϑ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanConfig {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub theta_tol: f64,
    /// Brackets are only refined when the miss is below this at both ends.
    pub max_miss: f64,
    /// Largest allowed perpendicular miss after refinement.
    pub max_final_distance: f64,
    /// Relative residual allowed when rounding a period to a lattice charge.
    pub charge_residual: f64,
    /// Allowed `|arg Z_γ - ϑ*|`.
    pub phase_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        // the small offset keeps grid points off phases that are rational multiples of π
        let offset = 0.37 * PI / 300.0;
        ScanConfig {
            start: -PI + offset,
            end: PI + offset,
            step: PI / 300.0,
            theta_tol: 1e-6,
            max_miss: 0.25,
            max_final_distance: 1e-4,
            charge_residual: 1e-4,
            phase_tol: 1e-4,
        }
    }
}

/// Identity of a trajectory that persists as ϑ varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Critical(usize, usize),
    /// Parents' critical keys and the index among their births.
    Child((usize, usize), (usize, usize), usize),
}

fn critical_key(o: &Origin) -> (usize, usize) {
    match *o {
        Origin::Critical { zero, ray } => (zero, ray),
        Origin::Junction { .. } => unreachable!("first-generation parents are critical"),
    }
}

struct Traced {
    key: Key,
    traj: Trajectory,
    /// For children: `(parent, segment, parameter)` of both parents at the junction.
    junction: Option<[(usize, usize, f64); 2]>,
}

/// Critical trajectories plus the children of crossings between them.
fn first_generation(curve: &SpectralCurve, theta: f64, cfg: &NetworkConfig, only: Option<Key>) -> Result<Vec<Traced>> {
    let seeds = seed_critical(curve, theta, cfg);
    // sorted, so that crossings between two parents are enumerated in the same order
    let needed: Vec<usize> = match only {
        Some(Key::Critical(z, r)) => vec![z * 8 + r],
        Some(Key::Child(a, b, _)) => {
            let (i, j) = (a.0 * 8 + a.1, b.0 * 8 + b.1);
            vec![i.min(j), i.max(j)]
        }
        None => (0..seeds.len()).collect(),
    };
    let traced: Vec<Trajectory> = needed
        .par_iter()
        .map(|&i| trace(curve, theta, &seeds[i], cfg))
        .collect::<Result<_>>()?;
    let mut out: Vec<Traced> = traced
        .into_iter()
        .map(|t| {
            let (z, r) = critical_key(&t.origin);
            Traced {
                key: Key::Critical(z, r),
                traj: t,
                junction: None,
            }
        })
        .collect();
    if matches!(only, Some(Key::Critical(..))) {
        return Ok(out);
    }
    let trajs: Vec<Trajectory> = out.iter().map(|t| t.traj.clone()).collect();
    let mut child_seeds = Vec::new();
    let mut counts = std::collections::HashMap::new();
    for c in find_crossings(&trajs, 0) {
        if let Event::Birth(parents, seed) = classify_crossing(curve, &trajs, &c, cfg) {
            let ka = critical_key(&trajs[parents[0]].origin);
            let kb = critical_key(&trajs[parents[1]].origin);
            let n = counts.entry((ka, kb)).or_insert(0usize);
            let key = Key::Child(ka, kb, *n);
            *n += 1;
            if only.is_some_and(|k| k != key) {
                continue;
            }
            let at = |p: usize| {
                if p == c.traj[0] {
                    (p, c.seg[0], c.t[0])
                } else {
                    (p, c.seg[1], c.t[1])
                }
            };
            child_seeds.push((key, [at(parents[0]), at(parents[1])], seed));
        }
    }
    let children: Vec<Traced> = child_seeds
        .par_iter()
        .map(|(key, j, seed)| {
            Ok(Traced {
                key: *key,
                traj: trace(curve, theta, seed, cfg)?,
                junction: Some(*j),
            })
        })
        .collect::<Result<_>>()?;
    out.extend(children);
    Ok(out)
}

/// Closest approach of a trajectory to every zero it may end on.
fn misses(curve: &SpectralCurve, t: &Traced) -> Vec<(usize, f64, f64)> {
    let zeros = curve.ramification_points();
    zeros
        .iter()
        .enumerate()
        .filter(|(i, _)| !matches!(t.key, Key::Critical(z, _) if z == *i))
        .map(|(i, &z)| {
            let (d, s, _) = t.traj.closest_approach(z);
            (i, d, s)
        })
        .collect()
}

type Sample = Vec<(Key, usize, f64, f64)>;

fn sample(curve: &SpectralCurve, theta: f64, cfg: &NetworkConfig) -> Result<Sample> {
    let gen = first_generation(curve, theta, cfg, None)?;
    let mut out = Vec::new();
    for t in &gen {
        for (zi, d, s) in misses(curve, t) {
            out.push((t.key, zi, d, s));
        }
    }
    out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    Ok(out)
}

fn signed_miss(curve: &SpectralCurve, theta: f64, key: Key, zero: usize, cfg: &NetworkConfig) -> Result<Option<(f64, f64)>> {
    let gen = first_generation(curve, theta, cfg, Some(key))?;
    Ok(gen
        .iter()
        .find(|t| t.key == key)
        .map(|t| {
            let (d, s, _) = t.traj.closest_approach(curve.ramification_points()[zero]);
            (d, s)
        }))
}

/// Integer charge whose periods of every configured form match `chain`.
///
/// Solves the real least-squares problem over the basis periods, rounds, and
/// requires the `x dz` residual to be below `rel_tol · |chain[0]|`.
pub fn identify_charge(periods: &Periods, chain: &[Complex64], rel_tol: f64) -> Result<Charge> {
    let r = periods.rank();
    let nf = periods.forms.len().min(chain.len());
    let mut a = DMatrix::<f64>::zeros(2 * nf, r);
    let mut b = DVector::<f64>::zeros(2 * nf);
    for f in 0..nf {
        let scale = 1.0 / chain[f].norm().max(1e-300);
        for k in 0..r {
            a[(2 * f, k)] = periods.values[f][k].re * scale;
            a[(2 * f + 1, k)] = periods.values[f][k].im * scale;
        }
        b[2 * f] = chain[f].re * scale;
        b[2 * f + 1] = chain[f].im * scale;
    }
    let svd = a.svd(true, true);
    let m = svd
        .solve(&b, 1e-12)
        .map_err(|_| Error::ChargeIdentificationFailed(chain[0], f64::INFINITY))?;
    let charge = Charge(m.iter().map(|v| v.round() as i64).collect());
    let z = periods.central_charge(&charge);
    let residual = (z - chain[0]).norm() / chain[0].norm();
    if residual >= rel_tol || charge.is_zero() {
        return Err(Error::ChargeIdentificationFailed(chain[0], residual));
    }
    Ok(charge)
}

fn assemble(curve: &SpectralCurve, periods: &Periods, theta: f64, key: Key, zero: usize, cfg: &NetworkConfig, scan: &ScanConfig) -> Result<Option<FiniteWeb>> {
    let gen = first_generation(curve, theta, cfg, Some(key))?;
    let Some(t) = gen.iter().find(|t| t.key == key) else {
        return Ok(None);
    };
    if t.traj.status != Status::HitZero(zero) {
        return Ok(None);
    }
    let charge = identify_charge(periods, &t.traj.final_chain, scan.charge_residual)?;
    let period = periods.central_charge(&charge);
    let end = curve.ramification_points()[zero];
    let mut tail = t.traj.points.clone();
    tail.push(end);
    let (strings, topology) = match t.junction {
        None => (vec![tail], WebTopology::SingleString),
        Some(j) => {
            let cut = |(p, k, s): (usize, usize, f64)| {
                let pts = &gen[p].traj.points;
                let mut v: Vec<Complex64> = pts[..=k].to_vec();
                v.push(pts[k] + (pts[k + 1] - pts[k]) * s);
                v
            };
            (vec![cut(j[0]), cut(j[1]), tail], WebTopology::ThreeStringJunction)
        }
    };
    Ok(Some(FiniteWeb {
        strings,
        topology,
        charge,
        theta_star: theta,
        period,
    }))
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Scans ϑ for trajectories of the first two generations that run into a
/// zero, refines each sign change of the signed miss by bisection, and
/// assembles and identifies the resulting finite webs.
///
/// Webs are deduplicated by charge and phase; each is checked against
/// `arg Z_γ = ϑ*`.
pub fn detect_bps(
    curve: &SpectralCurve,
    lattice: &ChargeLattice,
    cfg: &NetworkConfig,
    scan: &ScanConfig,
) -> Result<Vec<FiniteWeb>> {
    if !(scan.step > 0.0) || !(scan.end > scan.start) {
        return Err(Error::InvalidInput("scan needs step > 0 and end > start".into()));
    }
    let periods = Periods {
        forms: cfg.forms.clone(),
        values: lattice.basis_periods(curve, &cfg.forms)?,
    };
    let steps = ((scan.end - scan.start) / scan.step).ceil() as usize;
    let thetas: Vec<f64> = (0..=steps).map(|k| (scan.start + k as f64 * scan.step).min(scan.end)).collect();
    let samples: Vec<Sample> = thetas.par_iter().map(|&t| sample(curve, t, cfg)).collect::<Result<_>>()?;

    let mut brackets = Vec::new();
    for k in 0..thetas.len() - 1 {
        let (a, b) = (&samples[k], &samples[k + 1]);
        for e in a {
            if let Ok(i) = b.binary_search_by(|x| (x.0, x.1).cmp(&(e.0, e.1))) {
                let f = &b[i];
                if e.2 < scan.max_miss && f.2 < scan.max_miss && e.3.signum() != f.3.signum() {
                    brackets.push((thetas[k], thetas[k + 1], e.0, e.1, e.3));
                }
            }
        }
    }

    let refined: Vec<Option<FiniteWeb>> = brackets
        .par_iter()
        .map(|&(lo, hi, key, zero, s_lo)| -> Result<Option<FiniteWeb>> {
            let (mut lo, mut hi) = (lo, hi);
            while hi - lo > scan.theta_tol {
                let mid = 0.5 * (lo + hi);
                match signed_miss(curve, mid, key, zero, cfg)? {
                    Some((_, s)) if s.signum() == s_lo.signum() => lo = mid,
                    Some(_) => hi = mid,
                    None => return Ok(None),
                }
            }
            let mid = 0.5 * (lo + hi);
            match signed_miss(curve, mid, key, zero, cfg)? {
                Some((_, s)) if s.abs() < scan.max_final_distance => {}
                _ => return Ok(None),
            }
            assemble(curve, &periods, mid, key, zero, cfg, scan)
        })
        .collect::<Result<_>>()?;

    let mut webs: Vec<FiniteWeb> = Vec::new();
    for w in refined.into_iter().flatten() {
        let phase_err = wrap(w.period.arg() - w.theta_star).abs();
        if phase_err > scan.phase_tol {
            return Err(Error::ChargeIdentificationFailed(w.period, phase_err));
        }
        let dup = webs
            .iter()
            .any(|v| v.charge == w.charge && wrap(v.theta_star - w.theta_star).abs() < 1e3 * scan.theta_tol);
        if !dup {
            webs.push(w);
        }
    }
    webs.sort_by(|a, b| a.theta_star.partial_cmp(&b.theta_star).unwrap().then(a.charge.cmp(&b.charge)));
    Ok(webs)
}
