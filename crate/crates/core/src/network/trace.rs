use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve::{cube_roots, nearest_root, segment_distance, Form, SpectralCurve};
use crate::error::{Error, Result};

/// Numerical settings for tracing and growing spectral networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    /// Distance from a zero at which critical trajectories are seeded.
    pub seed_offset: f64,
    /// A trajectory closer than this to a zero has run into it.
    pub hit_radius: f64,
    /// Defaults to `4 max|zero| + 10`.
    pub escape_radius: Option<f64>,
    /// Consecutive outward steps beyond the escape radius before stopping.
    pub escape_steps: usize,
    pub max_arclength: f64,
    pub max_steps: usize,
    /// Local error target per unit arclength.
    pub step_tol: f64,
    pub max_step: f64,
    pub dedup_radius: f64,
    pub max_generations: usize,
    /// Angular tolerance for head-on collisions.
    pub headon_tolerance: f64,
    /// Forms integrated along each trajectory (the first must be `x dz`).
    pub forms: Vec<Form>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            seed_offset: 1e-4,
            hit_radius: 1e-3,
            escape_radius: None,
            escape_steps: 20,
            max_arclength: 400.0,
            max_steps: 200_000,
            step_tol: 1e-9,
            max_step: 0.05,
            dedup_radius: 1e-4,
            max_generations: 10,
            headon_tolerance: 1e-3,
            forms: crate::curve::default_forms(),
        }
    }
}

impl NetworkConfig {
    pub fn escape_radius_for(&self, curve: &SpectralCurve) -> f64 {
        self.escape_radius.unwrap_or_else(|| {
            let m = curve
                .ramification_points()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            4.0 * m + 10.0
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Critical { zero: usize, ray: usize },
    Junction { parents: [usize; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "zero", rename_all = "snake_case")]
pub enum Status {
    Escaped,
    HitZero(usize),
    Truncated,
}

/// Where a trajectory starts: point, ordered sheet pair, and the form integrals
/// already accumulated before the first point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySeed {
    pub origin: Origin,
    pub point: Complex64,
    pub pair: [Complex64; 2],
    pub initial_chain: Vec<Complex64>,
    /// Zero the trajectory emanates from, excluded from hit tests until it has moved away.
    pub origin_zero: Option<usize>,
}

/// A traced WKB trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub origin: Origin,
    pub points: Vec<Complex64>,
    /// Tracked `(x_i, x_j)` at each point.
    pub pairs: Vec<[Complex64; 2]>,
    pub status: Status,
    pub arclength: f64,
    /// Cumulative `∫ (f(x_i) - f(x_j)) dz` for each configured form, per point.
    #[serde(skip)]
    pub chains: Vec<Vec<Complex64>>,
    /// Chain value with the endpoint correction into a hit zero.
    #[serde(skip)]
    pub final_chain: Vec<Complex64>,
}

impl Trajectory {
    pub fn start(&self) -> Complex64 {
        self.points[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.points.last().unwrap()
    }

    pub fn end_pair(&self) -> [Complex64; 2] {
        *self.pairs.last().unwrap()
    }

    /// Unit tangent of segment `k` (from point k to k+1).
    pub fn segment_tangent(&self, k: usize) -> Complex64 {
        let d = self.points[k + 1] - self.points[k];
        d / d.norm()
    }

    /// Closest approach to `target`: distance, signed perpendicular offset of
    /// `target` from the tangent line there, and the segment index.
    ///
    /// The sign is positive when the target lies to the left of the direction of travel.
    pub fn closest_approach(&self, target: Complex64) -> (f64, f64, usize) {
        let mut best = (f64::INFINITY, 0.0, 0usize);
        for k in 0..self.points.len().saturating_sub(1) {
            let d = segment_distance(self.points[k], self.points[k + 1], target);
            if d < best.0 {
                let t = self.segment_tangent(k);
                let p = self.points[k];
                let signed = (t.conj() * (target - p)).im;
                best = (d, signed, k);
            }
        }
        best
    }

    /// Chain integrals from the start up to parameter `t` on segment `k`.
    pub fn chain_at(&self, k: usize, t: f64) -> Vec<Complex64> {
        self.chains[k]
            .iter()
            .zip(&self.chains[k + 1])
            .map(|(a, b)| a + (b - a) * t)
            .collect()
    }
}

fn unit_direction(theta: Complex64, d: Complex64) -> Complex64 {
    theta * d.conj() / d.norm()
}

/// The eight critical seeds at every zero of `P0`.
///
/// Near a simple zero `x ≈ c (z - z0)^{1/3}` with `c³ = -P0'(z0)`, so outgoing
/// critical directions sit at `3/4 (ϑ - arg c + π/6) + kπ/4`; each is then
/// refined against the exact direction field at radius `seed_offset`.
pub fn seed_critical(curve: &SpectralCurve, theta: f64, cfg: &NetworkConfig) -> Vec<TrajectorySeed> {
    let e_theta = Complex64::from_polar(1.0, theta);
    let mut seeds = Vec::new();
    for (zi, &z0) in curve.ramification_points().iter().enumerate() {
        let c = (-curve.polynomial().eval_derivative(z0)).cbrt();
        let beta = c.arg() - PI / 6.0;
        let base = 0.75 * (theta - beta);
        for ray in 0..8 {
            let mut phi = base + ray as f64 * PI / 4.0;
            let point = z0 + Complex64::from_polar(cfg.seed_offset, phi);
            let roots = curve.fibre(point);
            let mut best = (f64::NEG_INFINITY, 0, 1);
            for a in 0..3 {
                for b in 0..3 {
                    if a == b {
                        continue;
                    }
                    let u = unit_direction(e_theta, roots[a] - roots[b]);
                    let cosine = (u * Complex64::from_polar(1.0, -phi)).re;
                    if cosine > best.0 {
                        best = (cosine, a, b);
                    }
                }
            }
            let mut pair = [roots[best.1], roots[best.2]];
            // secant refinement of the angle so the field points radially outward
            let mismatch = |phi: f64, pair: &mut [Complex64; 2]| -> f64 {
                let p = z0 + Complex64::from_polar(cfg.seed_offset, phi);
                let r = curve.fibre(p);
                pair[0] = r[nearest_root(&r, pair[0]).0];
                pair[1] = r[nearest_root(&r, pair[1]).0];
                let u = unit_direction(e_theta, pair[0] - pair[1]);
                (u * Complex64::from_polar(1.0, -phi)).im
            };
            let mut p0 = phi;
            let mut f0 = mismatch(p0, &mut pair);
            let mut p1 = phi + 1e-3;
            let mut f1 = mismatch(p1, &mut pair.clone());
            for _ in 0..20 {
                if (f1 - f0).abs() < 1e-300 {
                    break;
                }
                let p2 = p1 - f1 * (p1 - p0) / (f1 - f0);
                p0 = p1;
                f0 = f1;
                p1 = p2;
                f1 = mismatch(p1, &mut pair);
                if f1.abs() < 1e-14 {
                    break;
                }
            }
            if (p1 - phi).abs() < 0.2 {
                phi = p1;
            }
            let point = z0 + Complex64::from_polar(cfg.seed_offset, phi);
            let r = curve.fibre(point);
            let pair = [r[nearest_root(&r, pair[0]).0], r[nearest_root(&r, pair[1]).0]];
            let initial_chain = cfg
                .forms
                .iter()
                .map(|f| (f.eval(point, pair[0]) - f.eval(point, pair[1])) * (point - z0) * f.local_factor())
                .collect();
            seeds.push(TrajectorySeed {
                origin: Origin::Critical { zero: zi, ray },
                point,
                pair,
                initial_chain,
                origin_zero: Some(zi),
            });
        }
    }
    seeds
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Field<'a> {
    curve: &'a SpectralCurve,
    e_theta: Complex64,
    forms: &'a [Form],
}

impl Field<'_> {
    /// Sheet pair at `z`, continued from `(z0, pair0)`; `None` when ambiguous.
    fn pair_at(&self, z0: Complex64, pair0: [Complex64; 2], z: Complex64) -> Option<[Complex64; 2]> {
        let roots = cube_roots(-self.curve.polynomial().eval(z));
        let mut out = [Complex64::default(); 2];
        let mut idx = [0usize; 2];
        for s in 0..2 {
            let predicted = pair0[s] + self.curve.slope(z0, pair0[s]) * (z - z0);
            let (k, ratio) = nearest_root(&roots, predicted);
            if ratio > 0.3 {
                return None;
            }
            idx[s] = k;
            out[s] = roots[k];
        }
        if idx[0] == idx[1] {
            return None;
        }
        Some(out)
    }

    fn rhs(&self, z: Complex64, pair: [Complex64; 2], out: &mut [Complex64]) {
        let d = pair[0] - pair[1];
        let u = unit_direction(self.e_theta, d);
        out[0] = u;
        for (f, o) in self.forms.iter().zip(out[1..].iter_mut()) {
            *o = (f.eval(z, pair[0]) - f.eval(z, pair[1])) * u;
        }
    }
}

/// Integrates `(x_i - x_j) dz/dt = e^{iϑ}` from `seed` in arclength with adaptive
/// Dormand–Prince steps, re-tracking the sheet pair at every stage.
pub fn trace(curve: &SpectralCurve, theta: f64, seed: &TrajectorySeed, cfg: &NetworkConfig) -> Result<Trajectory> {
    let field = Field {
        curve,
        e_theta: Complex64::from_polar(1.0, theta),
        forms: &cfg.forms,
    };
    let zeros = curve.ramification_points();
    let escape_radius = cfg.escape_radius_for(curve);
    let dim = 1 + cfg.forms.len();

    let mut z = seed.point;
    let mut pair = seed.pair;
    let mut chain = seed.initial_chain.clone();
    let mut points = vec![z];
    let mut pairs = vec![pair];
    let mut chains = vec![chain.clone()];
    let mut arclength = 0.0;
    let mut outward_steps = 0usize;
    let mut left_origin = seed.origin_zero.is_none();
    let mut status = Status::Truncated;

    let nearest_zero_dist = |z: Complex64| zeros.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min);
    let mut h = (0.1 * nearest_zero_dist(z)).min(cfg.max_step);

    let mut k = vec![vec![Complex64::default(); dim]; 7];
    let mut stage_pairs = [[Complex64::default(); 2]; 7];

    for _ in 0..cfg.max_steps {
        let cap = (cfg.max_step * (1.0 + z.norm() / 4.0)).min(0.1 * nearest_zero_dist(z));
        h = h.min(cap);
        if h < 1e-14 {
            return Err(Error::SheetAmbiguity(z));
        }

        // stages
        let mut ok = true;
        stage_pairs[0] = pair;
        field.rhs(z, pair, &mut k[0]);
        let mut y5 = vec![Complex64::default(); dim];
        for s in 1..7 {
            let mut zs = z;
            let mut incr = vec![Complex64::default(); dim];
            for j in 0..s {
                let a = A[s][j];
                if a != 0.0 {
                    for c in 0..dim {
                        incr[c] += k[j][c] * (a * h);
                    }
                }
            }
            zs += incr[0];
            match field.pair_at(z, pair, zs) {
                Some(p) => stage_pairs[s] = p,
                None => {
                    ok = false;
                    break;
                }
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            field.rhs(zs, stage_pairs[s], &mut tail[0]);
            if s == 6 {
                y5 = incr;
            }
        }
        if !ok {
            h *= 0.25;
            continue;
        }
        let mut err = 0.0f64;
        {
            let mut e = Complex64::default();
            for s in 0..7 {
                e += k[s][0] * ((B5[s] - B4[s]) * h);
            }
            err = err.max(e.norm());
        }
        let allowed = cfg.step_tol * h;
        if err > allowed && h > 1e-12 {
            let factor = 0.9 * (allowed / err).powf(0.25);
            h *= factor.clamp(0.1, 0.5);
            continue;
        }

        let z_new = z + y5[0];
        let new_pair = match field.pair_at(z, pair, z_new) {
            Some(p) => p,
            None => {
                h *= 0.25;
                continue;
            }
        };
        for c in 0..cfg.forms.len() {
            chain[c] += y5[c + 1];
        }
        arclength += h;
        let u_new = unit_direction(field.e_theta, new_pair[0] - new_pair[1]);
        z = z_new;
        pair = new_pair;
        points.push(z);
        pairs.push(pair);
        chains.push(chain.clone());

        let growth = if err > 0.0 {
            (0.9 * (allowed / err).powf(0.25)).clamp(1.0, 4.0)
        } else {
            4.0
        };
        h *= growth;

        // zero hits
        if !left_origin {
            if let Some(o) = seed.origin_zero {
                if (z - zeros[o]).norm() > 4.0 * cfg.hit_radius.max(cfg.seed_offset) {
                    left_origin = true;
                }
            }
        }
        let mut hit = None;
        for (i, r) in zeros.iter().enumerate() {
            if !left_origin && seed.origin_zero == Some(i) {
                continue;
            }
            if (r - z).norm() < cfg.hit_radius {
                hit = Some(i);
                break;
            }
        }
        if let Some(i) = hit {
            status = Status::HitZero(i);
            break;
        }

        if z.norm() > escape_radius && (z.conj() * u_new).re > 0.0 {
            outward_steps += 1;
            if outward_steps >= cfg.escape_steps {
                status = Status::Escaped;
                break;
            }
        } else {
            outward_steps = 0;
        }
        if arclength > cfg.max_arclength {
            break;
        }
    }

    let mut final_chain = chain.clone();
    if let Status::HitZero(i) = status {
        let r = zeros[i];
        for (c, f) in cfg.forms.iter().enumerate() {
            final_chain[c] += (f.eval(z, pair[0]) - f.eval(z, pair[1])) * (r - z) * f.local_factor();
        }
    }

    Ok(Trajectory {
        origin: seed.origin,
        points,
        pairs,
        status,
        arclength,
        chains,
        final_chain,
    })
}
