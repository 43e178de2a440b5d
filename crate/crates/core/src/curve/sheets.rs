use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polynomial::{Polynomial, DEFAULT_ROOT_EPS};
use crate::error::{Error, Result};

/// Default exclusion radius around ramification points.
pub const DEFAULT_RAM_EPS: f64 = 1e-6;

pub fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

/// The three solutions of `x^3 = w`, principal root first, then multiplied by ω and ω².
pub fn cube_roots(w: Complex64) -> [Complex64; 3] {
    let r = w.cbrt();
    let om = omega();
    [r, r * om, r * om * om]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub root_eps: f64,
    pub ram_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root_eps: DEFAULT_ROOT_EPS,
            ram_eps: DEFAULT_RAM_EPS,
        }
    }
}

/// Picks the root in `roots` nearest to `target`; returns its index and the ratio
/// nearest/second-nearest distance.
pub(crate) fn nearest_root(roots: &[Complex64; 3], target: Complex64) -> (usize, f64) {
    let mut d = [0.0; 3];
    for k in 0..3 {
        d[k] = (roots[k] - target).norm();
    }
    let mut best = 0;
    for k in 1..3 {
        if d[k] < d[best] {
            best = k;
        }
    }
    let second = (0..3).filter(|&k| k != best).map(|k| d[k]).fold(f64::INFINITY, f64::min);
    (best, if second > 0.0 { d[best] / second } else { 1.0 })
}

fn min_separation(roots: &[Complex64; 3]) -> f64 {
    (roots[0] - roots[1])
        .norm()
        .min((roots[1] - roots[2]).norm())
        .min((roots[0] - roots[2]).norm())
}

/// The three-sheeted cover `x^3 + P0(z) = 0`.
#[derive(Debug, Clone)]
pub struct SpectralCurve {
    polynomial: Polynomial,
    ramification: Vec<Complex64>,
    basepoint: Complex64,
    base_sheets: [Complex64; 3],
    tol: Tolerances,
}

impl SpectralCurve {
    pub fn new(polynomial: Polynomial) -> Result<Self> {
        Self::with_options(polynomial, None, Tolerances::default())
    }

    pub fn with_options(
        polynomial: Polynomial,
        basepoint: Option<Complex64>,
        tol: Tolerances,
    ) -> Result<Self> {
        let ramification = polynomial.roots(tol.root_eps)?;
        let basepoint = match basepoint {
            Some(b) => b,
            None => default_basepoint(&ramification),
        };
        if let Some(r) = ramification.iter().find(|r| (*r - basepoint).norm() < tol.ram_eps) {
            return Err(Error::AtRamificationPoint(*r, tol.ram_eps));
        }
        let base_sheets = cube_roots(-polynomial.eval(basepoint));
        Ok(SpectralCurve {
            polynomial,
            ramification,
            basepoint,
            base_sheets,
            tol,
        })
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.polynomial
    }

    pub fn degree(&self) -> usize {
        self.polynomial.degree()
    }

    pub fn ramification_points(&self) -> &[Complex64] {
        &self.ramification
    }

    pub fn basepoint(&self) -> Complex64 {
        self.basepoint
    }

    pub fn base_sheets(&self) -> [Complex64; 3] {
        self.base_sheets
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    /// Unordered fibre over `z`.
    pub fn fibre(&self, z: Complex64) -> [Complex64; 3] {
        cube_roots(-self.polynomial.eval(z))
    }

    /// dx/dz on the sheet through `(z, x)`.
    pub fn slope(&self, z: Complex64, x: Complex64) -> Complex64 {
        -self.polynomial.eval_derivative(z) / (3.0 * x * x)
    }

    pub fn nearest_ramification(&self, z: Complex64) -> Option<(usize, f64)> {
        self.ramification
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (r - z).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }

    /// Follows the sheet through `(a, x_a)` along the straight segment to `b`.
    ///
    /// Steps are refined until the change in x is below a third of the sheet
    /// separation and the nearest root is unambiguous.
    pub fn continue_segment(&self, a: Complex64, b: Complex64, x_a: Complex64) -> Result<Complex64> {
        let dz_total = b - a;
        if dz_total.norm() == 0.0 {
            return Ok(x_a);
        }
        let mut t = 0.0f64;
        let mut x = x_a;
        let mut dt = 0.125f64;
        let min_dt = 1e-13;
        while t < 1.0 {
            let step = dt.min(1.0 - t);
            let z = a + dz_total * t;
            let z_new = a + dz_total * (t + step);
            let predicted = x + self.slope(z, x) * (z_new - z);
            let roots = self.fibre(z_new);
            let (k, ratio) = nearest_root(&roots, predicted);
            let sep = min_separation(&roots);
            let change = (roots[k] - x).norm();
            if ratio < 0.25 && 3.0 * change < sep {
                x = roots[k];
                t += step;
                if ratio < 0.05 {
                    dt = (dt * 1.5).min(0.25);
                }
            } else {
                dt = step * 0.5;
                if dt < min_dt {
                    return Err(Error::SheetAmbiguity(z_new));
                }
            }
        }
        Ok(x)
    }

    /// Sheet values over `z`, ordered by continuation of `base_sheets` from the basepoint.
    ///
    /// The path is the straight segment; where it passes within `10 * ram_eps` of a
    /// ramification point it detours counterclockwise along a circle of that radius.
    pub fn sheets_at(&self, z: Complex64) -> Result<[Complex64; 3]> {
        if let Some((i, d)) = self.nearest_ramification(z) {
            if d < self.tol.ram_eps {
                return Err(Error::AtRamificationPoint(self.ramification[i], self.tol.ram_eps));
            }
        }
        let path = self.default_path(self.basepoint, z);
        let mut out = self.base_sheets;
        for x in out.iter_mut() {
            let mut cur = *x;
            for w in path.windows(2) {
                cur = self.continue_segment(w[0], w[1], cur)?;
            }
            *x = cur;
        }
        Ok(out)
    }

    fn default_path(&self, a: Complex64, b: Complex64) -> Vec<Complex64> {
        let radius = 10.0 * self.tol.ram_eps;
        let d = b - a;
        let len2 = d.norm_sqr();
        let mut detours: Vec<(f64, Complex64)> = Vec::new();
        if len2 > 0.0 {
            for &r in &self.ramification {
                let t = ((r - a) * d.conj()).re / len2;
                let closest = a + d * t.clamp(0.0, 1.0);
                let dist = (r - closest).norm();
                if dist >= radius || t <= 0.0 || t >= 1.0 {
                    continue;
                }
                let half = (radius * radius - dist * dist).sqrt() / len2.sqrt();
                let t_in = t - half;
                if t_in <= 0.0 || t + half >= 1.0 {
                    continue;
                }
                detours.push((t_in, r));
            }
        }
        detours.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let mut path = vec![a];
        for (t_in, r) in detours {
            let entry = a + d * t_in;
            // exit is the mirror image of the entry across the perpendicular through r
            let t_c = ((r - a) * d.conj()).re / len2;
            let exit = a + d * (2.0 * t_c - t_in);
            let a0 = (entry - r).arg();
            let mut a1 = (exit - r).arg();
            while a1 <= a0 {
                a1 += 2.0 * std::f64::consts::PI;
            }
            path.push(entry);
            let pieces = 24;
            for k in 1..pieces {
                let ang = a0 + (a1 - a0) * k as f64 / pieces as f64;
                path.push(r + Complex64::from_polar(radius, ang));
            }
            path.push(exit);
        }
        path.push(b);
        path
    }

    /// Checks that `x` lies on the fibre over `z`.
    pub fn on_curve(&self, z: Complex64, x: Complex64, tol: f64) -> bool {
        let scale = 1.0 + self.polynomial.eval(z).norm();
        (x * x * x + self.polynomial.eval(z)).norm() < tol * scale
    }
}

fn default_basepoint(ramification: &[Complex64]) -> Complex64 {
    if ramification.is_empty() {
        return Complex64::new(0.0, 0.5);
    }
    let centroid: Complex64 = ramification.iter().sum::<Complex64>() / ramification.len() as f64;
    let min_dist = |z: Complex64| {
        ramification
            .iter()
            .map(|r| (r - z).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let mut t = 0.5;
    loop {
        let z = centroid + Complex64::new(0.0, t);
        if min_dist(z) >= 0.25 {
            return z;
        }
        t += 0.25;
    }
}

/// A piecewise-linear path in the z-plane together with the sheet it starts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedPath {
    pub waypoints: Vec<Complex64>,
    pub starting_sheet_value: Complex64,
}

impl LiftedPath {
    pub fn new(waypoints: Vec<Complex64>, starting_sheet_value: Complex64) -> Self {
        LiftedPath {
            waypoints,
            starting_sheet_value,
        }
    }

    pub fn is_closed_in_base(&self) -> bool {
        match (self.waypoints.first(), self.waypoints.last()) {
            (Some(a), Some(b)) => (a - b).norm() <= 1e-12 * (1.0 + a.norm()),
            _ => false,
        }
    }

    /// Checks the path invariants against `curve`.
    pub fn validate(&self, curve: &SpectralCurve) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::InvalidInput("lifted path needs at least two waypoints".into()));
        }
        let z0 = self.waypoints[0];
        if !curve.on_curve(z0, self.starting_sheet_value, 1e-8) {
            return Err(Error::InvalidInput(format!(
                "starting sheet value {} does not lie over {}",
                self.starting_sheet_value, z0
            )));
        }
        let eps = curve.tolerances().ram_eps;
        for w in self.waypoints.windows(2) {
            for &r in curve.ramification_points() {
                if segment_distance(w[0], w[1], r) < eps {
                    return Err(Error::AtRamificationPoint(r, eps));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Endpoint sheet value obtained by continuous tracking along `path`.
pub fn continue_sheet(curve: &SpectralCurve, path: &LiftedPath) -> Result<Complex64> {
    path.validate(curve)?;
    let mut x = path.starting_sheet_value;
    for w in path.waypoints.windows(2) {
        x = curve.continue_segment(w[0], w[1], x)?;
    }
    Ok(x)
}
