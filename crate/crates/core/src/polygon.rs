//! Plücker coordinates, the hexapod invariant, and monomials in them.
//!
//! Vertices are homogeneous 3-vectors indexed from 1 in the order of the
//! directions `ℓ_r` counterclockwise.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Example;

/// Below this a determinant counts as zero, relative to the product of vertex norms.
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 3]>", into = "Vec<[f64; 3]>")]
pub struct ProjectivePolygon {
    vertices: Vec<Vector3<f64>>,
}

impl ProjectivePolygon {
    /// Rejects zero vertices and degenerate consecutive triples.
    pub fn new(vertices: Vec<[f64; 3]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput(format!("a polygon needs at least 3 vertices, got {}", vertices.len())));
        }
        let vertices: Vec<Vector3<f64>> = vertices.into_iter().map(Vector3::from).collect();
        for (k, v) in vertices.iter().enumerate() {
            if !v.iter().all(|x| x.is_finite()) || v.norm() == 0.0 {
                return Err(Error::DegenerateConfiguration(format!("vertex {} is zero or not finite", k + 1)));
            }
        }
        let poly = ProjectivePolygon { vertices };
        let m = poly.len();
        for k in 0..m {
            let (a, b, c) = (k + 1, (k + 1) % m + 1, (k + 2) % m + 1);
            if poly.is_degenerate(a, b, c) {
                return Err(Error::DegenerateConfiguration(format!("vertices {a}, {b}, {c} are collinear")));
            }
        }
        Ok(poly)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, index: usize) -> [f64; 3] {
        self.v(index).into()
    }

    fn v(&self, index: usize) -> Vector3<f64> {
        self.vertices[index - 1]
    }

    fn check(&self, indices: &[usize]) -> Result<()> {
        match indices.iter().find(|&&i| i == 0 || i > self.len()) {
            Some(i) => Err(Error::InvalidInput(format!(
                "vertex index {i} out of range 1..={}",
                self.len()
            ))),
            None => Ok(()),
        }
    }

    fn is_degenerate(&self, a: usize, b: usize, c: usize) -> bool {
        let scale = self.v(a).norm() * self.v(b).norm() * self.v(c).norm();
        det3(self.v(a), self.v(b), self.v(c)).abs() <= DEGENERACY_TOL * scale
    }

    /// Applies `m` to every vertex.
    pub fn transformed(&self, m: &[[f64; 3]; 3]) -> Self {
        let m = Matrix3::from_row_slice(&m.concat());
        ProjectivePolygon {
            vertices: self.vertices.iter().map(|v| m * v).collect(),
        }
    }

    /// Rescales vertex `k` by `factors[k]`.
    pub fn rescaled(&self, factors: &[f64]) -> Self {
        ProjectivePolygon {
            vertices: self.vertices.iter().zip(factors).map(|(v, s)| v * *s).collect(),
        }
    }

    /// Reasons to doubt convex position; convexity is never enforced.
    ///
    /// Only checked when all vertices lie in one affine chart `z ≠ 0` with the same sign.
    pub fn convexity_warnings(&self) -> Vec<String> {
        let sign = self.vertices[0].z.signum();
        if self.vertices.iter().any(|v| v.z == 0.0 || v.z.signum() != sign) {
            return vec!["vertices do not share an affine chart; convexity not checked".into()];
        }
        let m = self.len();
        let orient: Vec<f64> = (0..m)
            .map(|k| {
                let (a, b, c) = (k + 1, (k + 1) % m + 1, (k + 2) % m + 1);
                let scale = self.v(a).z * self.v(b).z * self.v(c).z;
                (det3(self.v(a), self.v(b), self.v(c)) / scale).signum()
            })
            .collect();
        let mut out = Vec::new();
        if orient.iter().any(|&s| s != orient[0]) {
            out.push("consecutive triples change orientation".into());
        }
        if orient[0] < 0.0 && out.is_empty() {
            out.push("vertices run clockwise".into());
        }
        out
    }
}

impl TryFrom<Vec<[f64; 3]>> for ProjectivePolygon {
    type Error = Error;
    fn try_from(v: Vec<[f64; 3]>) -> Result<Self> {
        ProjectivePolygon::new(v)
    }
}

impl From<ProjectivePolygon> for Vec<[f64; 3]> {
    fn from(p: ProjectivePolygon) -> Self {
        p.vertices.into_iter().map(Into::into).collect()
    }
}

fn det3(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> f64 {
    Matrix3::from_columns(&[a, b, c]).determinant()
}

/// `p(a,b,c) = det(v_a, v_b, v_c)`.
pub fn plucker(poly: &ProjectivePolygon, a: usize, b: usize, c: usize) -> Result<f64> {
    poly.check(&[a, b, c])?;
    Ok(det3(poly.v(a), poly.v(b), poly.v(c)))
}

/// `q(a,b,c,d,e,f) = det(v_a × v_b, v_c × v_d, v_e × v_f)`.
pub fn hexapod(poly: &ProjectivePolygon, idx: [usize; 6]) -> Result<f64> {
    poly.check(&idx)?;
    let [a, b, c, d, e, f] = idx.map(|i| poly.v(i));
    Ok(det3(a.cross(&b), c.cross(&d), e.cross(&f)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "indices")]
pub enum Factor {
    Plucker([usize; 3]),
    Hexapod([usize; 6]),
}

impl Factor {
    fn indices(&self) -> &[usize] {
        match self {
            Factor::Plucker(i) => i,
            Factor::Hexapod(i) => i,
        }
    }

    pub fn eval(&self, poly: &ProjectivePolygon) -> Result<f64> {
        match *self {
            Factor::Plucker([a, b, c]) => plucker(poly, a, b, c),
            Factor::Hexapod(i) => hexapod(poly, i),
        }
    }

    fn degenerate(&self, poly: &ProjectivePolygon, value: f64) -> bool {
        let scale: f64 = self.indices().iter().map(|&i| poly.v(i).norm()).product();
        value.abs() <= DEGENERACY_TOL * scale
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, idx) = match self {
            Factor::Plucker(i) => ("p", &i[..]),
            Factor::Hexapod(i) => ("q", &i[..]),
        };
        let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        write!(f, "{name}({})", parts.join(","))
    }
}

/// A monomial `Π F_m^{w_m}` in Plücker and hexapod factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Factor, i64)>", into = "Vec<(Factor, i64)>")]
pub struct InvariantExpression {
    factors: Vec<(Factor, i64)>,
}

impl InvariantExpression {
    /// Checks that every vertex carries total weight zero.
    pub fn new(factors: Vec<(Factor, i64)>) -> Result<Self> {
        let mut weight: BTreeMap<usize, i64> = BTreeMap::new();
        for (f, w) in &factors {
            if f.indices().contains(&0) {
                return Err(Error::InvalidInput("vertex indices start at 1".into()));
            }
            for &i in f.indices() {
                *weight.entry(i).or_default() += w;
            }
        }
        if let Some((&i, &w)) = weight.iter().find(|(_, &w)| w != 0) {
            return Err(Error::UnbalancedExpression(i, w));
        }
        Ok(InvariantExpression { factors })
    }

    pub fn factors(&self) -> &[(Factor, i64)] {
        &self.factors
    }

    /// The expression with every exponent negated.
    pub fn inverse(&self) -> Self {
        InvariantExpression {
            factors: self.factors.iter().map(|(f, w)| (*f, -w)).collect(),
        }
    }

    pub fn product(&self, other: &Self) -> Self {
        InvariantExpression {
            factors: self.factors.iter().chain(&other.factors).copied().collect(),
        }
    }

    /// The coordinate formulas for the shipped examples, by name like `pentagon:gamma1`.
    pub fn builtin(name: &str) -> Result<Self> {
        use Factor::{Hexapod as Q, Plucker as P};
        let factors = match name {
            "pentagon:gamma1" => vec![(P([1, 2, 3]), 1), (P([3, 4, 5]), 1), (P([1, 3, 5]), -1), (P([2, 3, 4]), -1)],
            "pentagon:gamma2" => vec![
                (P([1, 3, 5]), 1),
                (P([2, 3, 4]), 1),
                (P([1, 2, 5]), 1),
                (P([1, 2, 3]), -1),
                (P([2, 3, 5]), -1),
                (P([1, 4, 5]), -1),
            ],
            "hexagon:gamma1" => vec![(Q([2, 3, 4, 5, 6, 1]), 1), (P([1, 5, 6]), -1), (P([2, 3, 4]), -1)],
            "hexagon:gamma2" => vec![
                (P([1, 5, 6]), 1),
                (P([2, 3, 6]), 1),
                (P([1, 4, 6]), 1),
                (P([1, 2, 6]), -1),
                (P([1, 3, 6]), -1),
                (P([4, 5, 6]), -1),
            ],
            "hexagon:gamma3" => vec![(P([1, 2, 3]), 1), (P([4, 5, 6]), 1), (P([2, 3, 4]), -1), (P([1, 5, 6]), -1)],
            "hexagon:gamma4" => vec![(P([1, 2, 6]), 1), (P([3, 4, 5]), 1), (P([1, 2, 3]), -1), (P([4, 5, 6]), -1)],
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown expression {name}; known: {}",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        };
        InvariantExpression::new(factors)
    }

    /// Built-in coordinate expressions of one example, in basis order.
    pub fn builtins_for(example: Example) -> Vec<(String, Self)> {
        BUILTIN_NAMES
            .iter()
            .filter(|n| n.starts_with(example.name()))
            .map(|n| (n.to_string(), InvariantExpression::builtin(n).unwrap()))
            .collect()
    }
}

pub const BUILTIN_NAMES: [&str; 6] = [
    "pentagon:gamma1",
    "pentagon:gamma2",
    "hexagon:gamma1",
    "hexagon:gamma2",
    "hexagon:gamma3",
    "hexagon:gamma4",
];

impl TryFrom<Vec<(Factor, i64)>> for InvariantExpression {
    type Error = Error;
    fn try_from(v: Vec<(Factor, i64)>) -> Result<Self> {
        InvariantExpression::new(v)
    }
}

impl From<InvariantExpression> for Vec<(Factor, i64)> {
    fn from(e: InvariantExpression) -> Self {
        e.factors
    }
}

impl fmt::Display for InvariantExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|(fac, w)| if *w == 1 { fac.to_string() } else { format!("{fac}^{w}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parses `p(1,2,3) p(3,4,5) p(1,3,5)^-1 ...`, or a built-in name.
impl FromStr for InvariantExpression {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if BUILTIN_NAMES.contains(&s.trim()) {
            return InvariantExpression::builtin(s.trim());
        }
        let bad = || Error::InvalidInput(format!("cannot parse expression {s:?}"));
        let mut factors = Vec::new();
        for tok in s.split_whitespace() {
            let (head, exp) = match tok.split_once(")^") {
                Some((h, e)) => (h, e.parse::<i64>().map_err(|_| bad())?),
                None => (tok.strip_suffix(')').ok_or_else(bad)?, 1),
            };
            let (kind, args) = head.split_once('(').ok_or_else(bad)?;
            let idx: Vec<usize> = args
                .split(',')
                .map(|a| a.trim().parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let factor = match (kind, idx.len()) {
                ("p", 3) => Factor::Plucker([idx[0], idx[1], idx[2]]),
                ("q", 6) => Factor::Hexapod([idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]]),
                _ => return Err(bad()),
            };
            factors.push((factor, exp));
        }
        if factors.is_empty() {
            return Err(bad());
        }
        InvariantExpression::new(factors)
    }
}

/// Evaluates the monomial on the polygon.
pub fn cross_ratio(poly: &ProjectivePolygon, expr: &InvariantExpression) -> Result<f64> {
    let mut numerator = 1.0;
    let mut denominator = 1.0;
    for (f, w) in &expr.factors {
        let value = f.eval(poly)?;
        if f.degenerate(poly, value) {
            if *w < 0 {
                return Err(Error::DegenerateConfiguration(format!("denominator factor {f} vanishes")));
            }
            return Ok(0.0);
        }
        if *w >= 0 {
            numerator *= value.powi(*w as i32);
        } else {
            denominator *= value.powi(-*w as i32);
        }
    }
    Ok(numerator / denominator)
}
