use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default minimum separation between two roots before they count as colliding.
pub const DEFAULT_ROOT_EPS: f64 = 1e-8;

/// A polynomial in one complex variable, coefficients stored lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::InvalidInput("polynomial is identically zero".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * k as f64;
        }
        acc
    }

    /// Bound on the rounding error of [`Polynomial::eval`] at `z`.
    fn rounding_bound(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let size = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
        8.0 * (self.coeffs.len() as f64) * f64::EPSILON * size
    }

    /// Value and derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// All roots, from companion-matrix eigenvalues polished by Newton steps.
    ///
    /// Roots are sorted by real part, then imaginary part, so that zero indices are
    /// reproducible. Fails with [`Error::NonSimpleRoots`] if two roots are closer
    /// than `root_eps`, or if the polynomial vanishes to rounding accuracy midway
    /// between two of them, since such a pair cannot be told apart from a multiple root.
    pub fn roots(&self, root_eps: f64) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.leading();
        let mut roots: Vec<Complex64> = if n == 1 {
            vec![-self.coeffs[0] / lead]
        } else {
            let mut m = DMatrix::<Complex64>::zeros(n, n);
            for i in 1..n {
                m[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            for i in 0..n {
                m[(i, n - 1)] = -self.coeffs[i] / lead;
            }
            let schur = nalgebra::linalg::Schur::try_new(m, 1e-15, 10_000)
                .ok_or_else(|| Error::InvalidInput("companion eigenvalue iteration failed".into()))?;
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        };

        for r in roots.iter_mut() {
            for _ in 0..8 {
                let (p, dp) = self.eval_with_derivative(*r);
                // below the rounding floor the step is noise, which near a multiple root is huge
                if dp.norm() == 0.0 || p.norm() <= self.rounding_bound(*r) {
                    break;
                }
                let step = p / dp;
                let next = *r - step;
                if self.eval(next).norm() >= p.norm() {
                    break;
                }
                *r = next;
                if step.norm() <= 1e-16 * (1.0 + r.norm()) {
                    break;
                }
            }
        }

        roots.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                let mid = (roots[i] + roots[j]) * 0.5;
                if (roots[i] - roots[j]).norm() < root_eps || self.eval(mid).norm() <= self.rounding_bound(mid) {
                    return Err(Error::NonSimpleRoots(roots[i], roots[j], root_eps));
                }
            }
        }
        Ok(roots)
    }
}

impl TryFrom<Vec<Complex64>> for Polynomial {
    type Error = Error;

    fn try_from(value: Vec<Complex64>) -> Result<Self> {
        Polynomial::new(value)
    }
}

impl From<Polynomial> for Vec<Complex64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}
