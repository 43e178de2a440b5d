use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sheets::{LiftedPath, SpectralCurve};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// An element of the charge lattice, written in the chosen basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Charge(pub Vec<i64>);

impl Charge {
    pub fn zero(rank: usize) -> Self {
        Charge(vec![0; rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Charge(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl std::str::FromStr for Charge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let comps = trimmed
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad charge '{s}': {e}")))?;
        Ok(Charge(comps))
    }
}

impl Add for &Charge {
    type Output = Charge;
    fn add(self, rhs: &Charge) -> Charge {
        assert_eq!(self.rank(), rhs.rank());
        Charge(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Add for Charge {
    type Output = Charge;
    fn add(self, rhs: Charge) -> Charge {
        &self + &rhs
    }
}

impl Sub for &Charge {
    type Output = Charge;
    fn sub(self, rhs: &Charge) -> Charge {
        self + &(-rhs)
    }
}

impl Neg for &Charge {
    type Output = Charge;
    fn neg(self) -> Charge {
        Charge(self.0.iter().map(|a| -a).collect())
    }
}

impl Neg for Charge {
    type Output = Charge;
    fn neg(self) -> Charge {
        -&self
    }
}

impl Mul<i64> for &Charge {
    type Output = Charge;
    fn mul(self, k: i64) -> Charge {
        Charge(self.0.iter().map(|a| a * k).collect())
    }
}

/// A holomorphic one-form `z^z_power x^x_power dz` on the spectral curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Form {
    pub z_power: u32,
    pub x_power: u32,
}

impl Form {
    /// The Liouville form `x dz`, whose periods are the central charges.
    pub const LIOUVILLE: Form = Form { z_power: 0, x_power: 1 };

    pub fn eval(&self, z: Complex64, x: Complex64) -> Complex64 {
        z.powu(self.z_power) * x.powu(self.x_power)
    }

    /// Near a simple zero the integrand scales like `(z - z0)^(x_power/3)`; this is
    /// the factor in `∫_0^u s^p ds = u^(p+1) / (p+1)` relative to `u * integrand(u)`.
    pub fn local_factor(&self) -> f64 {
        3.0 / (3.0 + self.x_power as f64)
    }
}

/// Forms used by default when identifying charges: `x dz` and `x^2 dz`.
pub fn default_forms() -> Vec<Form> {
    vec![Form::LIOUVILLE, Form { z_power: 0, x_power: 2 }]
}

/// Integrates each form along a lifted path, tracking the sheet continuously.
///
/// Each segment is split into `m` panels with a 10-point Gauss rule, `m` doubled
/// until the relative change drops below `rel_tol`. Returns the integrals and the
/// sheet value at the end of the path.
pub fn integrate_path(
    curve: &SpectralCurve,
    path: &LiftedPath,
    forms: &[Form],
    rel_tol: f64,
) -> Result<(Vec<Complex64>, Complex64)> {
    path.validate(curve)?;
    let gauss = GaussLegendre::new(10);
    let mut totals = vec![Complex64::new(0.0, 0.0); forms.len()];
    let mut x = path.starting_sheet_value;
    for w in path.waypoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut panels = 1usize;
        let mut prev = segment_integral(curve, a, b, x, forms, panels, &gauss)?;
        loop {
            panels *= 2;
            let next = segment_integral(curve, a, b, x, forms, panels, &gauss)?;
            let converged = prev.0.iter().zip(&next.0).all(|(p, n)| {
                (p - n).norm() <= rel_tol * n.norm().max(1e-300) || (p - n).norm() < 1e-15
            });
            prev = next;
            if converged || panels >= 1 << 14 {
                break;
            }
        }
        for (t, v) in totals.iter_mut().zip(&prev.0) {
            *t += v;
        }
        x = prev.1;
    }
    Ok((totals, x))
}

fn segment_integral(
    curve: &SpectralCurve,
    a: Complex64,
    b: Complex64,
    x_a: Complex64,
    forms: &[Form],
    panels: usize,
    gauss: &GaussLegendre,
) -> Result<(Vec<Complex64>, Complex64)> {
    let d = b - a;
    let mut sums = vec![Complex64::new(0.0, 0.0); forms.len()];
    let mut z_prev = a;
    let mut x_prev = x_a;
    for p in 0..panels {
        let t0 = p as f64 / panels as f64;
        let t1 = (p + 1) as f64 / panels as f64;
        let half = 0.5 * (t1 - t0);
        for (xi, wt) in gauss.nodes.iter().zip(&gauss.weights) {
            let z = a + d * (t0 + half * (1.0 + xi));
            let x = curve.continue_segment(z_prev, z, x_prev)?;
            for (s, f) in sums.iter_mut().zip(forms) {
                *s += f.eval(z, x) * (wt * half);
            }
            z_prev = z;
            x_prev = x;
        }
        let z_end = a + d * t1;
        x_prev = curve.continue_segment(z_prev, z_end, x_prev)?;
        z_prev = z_end;
    }
    for s in sums.iter_mut() {
        *s *= d;
    }
    Ok((sums, x_prev))
}

/// The charge lattice with its pairing matrix and one closed contour per basis element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeLattice {
    pairing: Vec<Vec<i64>>,
    basis_contours: Vec<LiftedPath>,
}

impl ChargeLattice {
    pub fn new(pairing: Vec<Vec<i64>>, basis_contours: Vec<LiftedPath>) -> Result<Self> {
        let rank = pairing.len();
        if pairing.iter().any(|row| row.len() != rank) {
            return Err(Error::InvalidInput("pairing matrix is not square".into()));
        }
        for i in 0..rank {
            if pairing[i][i] != 0 {
                return Err(Error::InvalidInput(format!("pairing[{i}][{i}] is nonzero")));
            }
            for j in 0..rank {
                if pairing[i][j] != -pairing[j][i] {
                    return Err(Error::InvalidInput("pairing matrix is not antisymmetric".into()));
                }
            }
        }
        if basis_contours.len() != rank {
            return Err(Error::InvalidInput(format!(
                "expected {rank} basis contours, got {}",
                basis_contours.len()
            )));
        }
        Ok(ChargeLattice {
            pairing,
            basis_contours,
        })
    }

    pub fn rank(&self) -> usize {
        self.pairing.len()
    }

    pub fn pairing_matrix(&self) -> &[Vec<i64>] {
        &self.pairing
    }

    pub fn basis_contours(&self) -> &[LiftedPath] {
        &self.basis_contours
    }

    /// `γᵀ M μ`.
    pub fn pairing(&self, gamma: &Charge, mu: &Charge) -> i64 {
        debug_assert_eq!(gamma.rank(), self.rank());
        debug_assert_eq!(mu.rank(), self.rank());
        let mut acc = 0;
        for (i, gi) in gamma.0.iter().enumerate() {
            if *gi == 0 {
                continue;
            }
            for (j, mj) in mu.0.iter().enumerate() {
                acc += gi * self.pairing[i][j] * mj;
            }
        }
        acc
    }

    pub fn in_kernel(&self, gamma: &Charge) -> bool {
        (0..self.rank()).all(|i| self.pairing(gamma, &Charge::basis(self.rank(), i)) == 0)
    }

    pub fn check_rank(&self, gamma: &Charge) -> Result<()> {
        if gamma.rank() != self.rank() {
            return Err(Error::InvalidInput(format!(
                "charge {gamma} has {} components, lattice rank is {}",
                gamma.rank(),
                self.rank()
            )));
        }
        Ok(())
    }

    /// Periods of each form over each basis contour, as `[form][basis]`.
    ///
    /// Basis integrals run in parallel. Fails with [`Error::OpenContour`] if a
    /// contour does not return to its starting sheet.
    pub fn basis_periods(&self, curve: &SpectralCurve, forms: &[Form]) -> Result<Vec<Vec<Complex64>>> {
        let per_contour: Vec<Vec<Complex64>> = self
            .basis_contours
            .par_iter()
            .enumerate()
            .map(|(i, path)| {
                if !path.is_closed_in_base() {
                    let first = path.waypoints.first().copied().unwrap_or_default();
                    let last = path.waypoints.last().copied().unwrap_or_default();
                    return Err(Error::OpenContour(i, (first - last).norm()));
                }
                let (vals, end) = integrate_path(curve, path, forms, 1e-11)?;
                let mismatch = (end - path.starting_sheet_value).norm();
                if mismatch > 1e-8 * (1.0 + end.norm()) {
                    return Err(Error::OpenContour(i, mismatch));
                }
                Ok(vals)
            })
            .collect::<Result<_>>()?;
        Ok((0..forms.len())
            .map(|f| per_contour.iter().map(|v| v[f]).collect())
            .collect())
    }
}

/// Central charges `Z_γ` of the basis, plus periods of auxiliary forms used for
/// charge identification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periods {
    pub forms: Vec<Form>,
    /// `[form][basis]`; `values[0]` is always the `x dz` period.
    pub values: Vec<Vec<Complex64>>,
}

impl Periods {
    pub fn compute(curve: &SpectralCurve, lattice: &ChargeLattice) -> Result<Self> {
        let forms = default_forms();
        let values = lattice.basis_periods(curve, &forms)?;
        Ok(Periods { forms, values })
    }

    /// Periods of the Liouville form only, e.g. taken from published values.
    pub fn from_central_charges(z: Vec<Complex64>) -> Self {
        Periods {
            forms: vec![Form::LIOUVILLE],
            values: vec![z],
        }
    }

    pub fn rank(&self) -> usize {
        self.values[0].len()
    }

    pub fn basis(&self) -> &[Complex64] {
        &self.values[0]
    }

    /// `Z_γ = Σ γ_i Z_{γ_i}`.
    pub fn central_charge(&self, gamma: &Charge) -> Complex64 {
        self.form_period(0, gamma)
    }

    pub fn form_period(&self, form: usize, gamma: &Charge) -> Complex64 {
        gamma
            .0
            .iter()
            .zip(&self.values[form])
            .map(|(&g, z)| z * g as f64)
            .sum()
    }
}

/// The period `∮_γ x dz` computed from the lattice contours.
pub fn period(curve: &SpectralCurve, lattice: &ChargeLattice, gamma: &Charge) -> Result<Complex64> {
    lattice.check_rank(gamma)?;
    let z = lattice.basis_periods(curve, &[Form::LIOUVILLE])?;
    Ok(gamma.0.iter().zip(&z[0]).map(|(&g, z)| z * g as f64).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charge_arithmetic() {
        let a = Charge(vec![1, 0, -2]);
        let b = Charge(vec![0, 3, 1]);
        assert_eq!(&a + &b, Charge(vec![1, 3, -1]));
        assert_eq!(-&a, Charge(vec![-1, 0, 2]));
        assert_eq!(&a - &a, Charge::zero(3));
        assert_eq!(&b * 2, Charge(vec![0, 6, 2]));
        assert_eq!("(1,-1, 0)".parse::<Charge>().unwrap(), Charge(vec![1, -1, 0]));
        assert_eq!(a.to_string(), "(1,0,-2)");
    }

    #[test]
    fn pairing_rejects_non_antisymmetric_matrix() {
        let err = ChargeLattice::new(vec![vec![0, 1], vec![1, 0]], vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let err = ChargeLattice::new(vec![vec![1, 0], vec![0, 0]], vec![]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn form_local_factor() {
        assert_eq!(Form::LIOUVILLE.local_factor(), 0.75);
        assert_eq!(Form { z_power: 0, x_power: 2 }.local_factor(), 0.6);
    }
}
