use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grow::SpectralNetwork;
use super::trace::Status;
use crate::curve::{cube_roots, nearest_root, SpectralCurve};
use crate::error::{Error, Result};

/// An asymptotic direction on the circle at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    /// Predicted asymptotic angle in `[0, 2π)`.
    pub angle: f64,
    /// Sheet indices `(i, j)` in the frame continued counterclockwise from the first mark.
    pub label: [usize; 2],
    /// Trajectories asymptotic to this direction.
    pub trajectories: Vec<usize>,
}

/// An arc between consecutive marks sharing their final label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalArc {
    pub marks: [usize; 2],
    /// Midpoint angle, one of the directions `ℓ_r`.
    pub direction: f64,
    pub fading_sheet: usize,
}

/// The `2n+6` angles where `∫ (x_i - x_j) dz ∝ z^{(n+3)/3}` has phase `ϑ` mod π/3.
pub fn asymptotic_directions(curve: &SpectralCurve, theta: f64) -> Vec<f64> {
    let n = curve.degree();
    let lead = curve.polynomial().leading();
    let kappa = (Complex64::new(1.0, 0.0) - crate::curve::omega()) * (-lead).cbrt() * (3.0 / (n as f64 + 3.0));
    let m = 2 * n + 6;
    let mut out: Vec<f64> = (0..m)
        .map(|k| (3.0 * (theta - kappa.arg() + k as f64 * PI / 3.0) / (n as f64 + 3.0)).rem_euclid(2.0 * PI))
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn follow_arc(curve: &SpectralCurve, radius: f64, from: f64, to: f64, x: Complex64) -> Result<Complex64> {
    let pieces = (((to - from).abs() / 0.05).ceil() as usize).max(1);
    let mut cur = x;
    for k in 0..pieces {
        let a = from + (to - from) * k as f64 / pieces as f64;
        let b = from + (to - from) * (k + 1) as f64 / pieces as f64;
        cur = curve.continue_segment(Complex64::from_polar(radius, a), Complex64::from_polar(radius, b), cur)?;
    }
    Ok(cur)
}

fn index_of(frame: &[Complex64; 3], x: Complex64) -> usize {
    nearest_root(frame, x).0
}

/// Groups escaped trajectories by asymptotic direction and labels each mark.
///
/// Labels are read in one frame of sheets, continued counterclockwise along
/// the escape circle from the first mark, then checked against the
/// alternating pattern `ij, ik, jk, ji, ki, kj, ...` (including the wrap past
/// the first mark, with the monodromy at infinity applied).
pub fn classify_infinity(curve: &SpectralCurve, net: &SpectralNetwork) -> Result<Vec<MarkedPoint>> {
    if let Some((i, t)) = net.trajectories.iter().enumerate().find(|(_, t)| t.status != Status::Escaped) {
        return Err(Error::PatternViolation(format!(
            "trajectory {i} did not escape ({:?})",
            t.status
        )));
    }
    let directions = asymptotic_directions(curve, net.theta);
    let spacing = 2.0 * PI / directions.len() as f64;
    let radius = net
        .trajectories
        .iter()
        .map(|t| t.end().norm())
        .fold(f64::INFINITY, f64::min)
        .min(curve.ramification_points().iter().map(|z| z.norm()).fold(0.0, f64::max) * 2.0 + 5.0)
        .max(curve.ramification_points().iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0);

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); directions.len()];
    for (ti, t) in net.trajectories.iter().enumerate() {
        let psi = t.end().arg();
        let (k, d) = directions
            .iter()
            .enumerate()
            .map(|(k, &a)| (k, angular_distance(a, psi)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if d > 0.25 * spacing {
            return Err(Error::PatternViolation(format!(
                "trajectory {ti} escapes at angle {psi:.4}, {d:.3} rad from the nearest asymptotic direction"
            )));
        }
        members[k].push(ti);
    }
    if let Some(k) = members.iter().position(|m| m.is_empty()) {
        return Err(Error::PatternViolation(format!(
            "no trajectory approaches asymptotic direction {:.4}",
            directions[k]
        )));
    }

    let a0 = directions[0];
    let frame0 = cube_roots(-curve.polynomial().eval(Complex64::from_polar(radius, a0)));
    let mut marks = Vec::with_capacity(directions.len());
    for (k, &angle) in directions.iter().enumerate() {
        let mut frame = frame0;
        for x in frame.iter_mut() {
            *x = follow_arc(curve, radius, a0, angle, *x)?;
        }
        let mut label: Option<[usize; 2]> = None;
        for &ti in &members[k] {
            let t = &net.trajectories[ti];
            let end = t.end();
            let psi = angle + (end.arg() - angle + PI).rem_euclid(2.0 * PI) - PI;
            let mut pair = t.end_pair();
            let foot = Complex64::from_polar(radius, psi);
            for x in pair.iter_mut() {
                *x = curve.continue_segment(end, foot, *x)?;
                *x = follow_arc(curve, radius, psi, angle, *x)?;
            }
            let l = [index_of(&frame, pair[0]), index_of(&frame, pair[1])];
            match label {
                None => label = Some(l),
                Some(prev) if prev != l => {
                    return Err(Error::PatternViolation(format!(
                        "trajectories at direction {angle:.4} carry labels {prev:?} and {l:?}"
                    )))
                }
                _ => {}
            }
        }
        marks.push(MarkedPoint {
            angle,
            label: label.unwrap(),
            trajectories: members[k].clone(),
        });
    }

    // frame after a full turn, to compare the last mark with the first
    let mut wrapped = frame0;
    for x in wrapped.iter_mut() {
        *x = follow_arc(curve, radius, a0, a0 + 2.0 * PI, *x)?;
    }
    let last_frame_of_first: [usize; 2] = {
        let l = marks[0].label;
        [index_of(&wrapped, frame0[l[0]]), index_of(&wrapped, frame0[l[1]])]
    };
    check_alternation(&marks, last_frame_of_first)?;
    Ok(marks)
}

fn check_alternation(marks: &[MarkedPoint], wrapped_first: [usize; 2]) -> Result<()> {
    let m = marks.len();
    let mut shared = Vec::with_capacity(m);
    for k in 0..m {
        let a = marks[k].label;
        let b = if k + 1 == m { wrapped_first } else { marks[k + 1].label };
        let s = match (a[0] == b[0], a[1] == b[1]) {
            (true, false) => 0,
            (false, true) => 1,
            _ => {
                return Err(Error::PatternViolation(format!(
                    "consecutive labels {a:?} and {b:?} must share exactly one sheet in the same position"
                )))
            }
        };
        shared.push(s);
    }
    for k in 0..m {
        if shared[k] == shared[(k + 1) % m] {
            return Err(Error::PatternViolation(format!(
                "shared sheet position does not alternate at mark {}",
                (k + 1) % m
            )));
        }
    }
    Ok(())
}

/// Arcs whose two boundary marks share the final label, with the fading sheet.
pub fn final_arcs(marks: &[MarkedPoint]) -> Vec<FinalArc> {
    let m = marks.len();
    let mut out = Vec::new();
    for k in 0..m {
        let next = (k + 1) % m;
        let (a, b) = (marks[k].label, marks[next].label);
        // labels of the last and first mark live in different frames; the
        // wrap arc is final exactly when the arc before it is initial
        let is_final = if next == 0 {
            m >= 2 && marks[m - 2].label[1] != marks[m - 1].label[1]
        } else {
            a[1] == b[1]
        };
        if is_final {
            let end = if next == 0 { marks[0].angle + 2.0 * PI } else { marks[next].angle };
            out.push(FinalArc {
                marks: [k, next],
                direction: (0.5 * (marks[k].angle + end)).rem_euclid(2.0 * PI),
                fading_sheet: a[1],
            });
        }
    }
    out
}
