use std::fmt::Write;

use num_complex::Complex64;

use super::grow::SpectralNetwork;
use super::webs::FiniteWeb;

fn push_polyline(out: &mut String, pts: &[Complex64]) {
    for p in pts {
        let _ = writeln!(out, "{} {}", p.re, p.im);
    }
    out.push('\n');
}

/// Plain-text polylines, one `x y` pair per line, one blank line after each trajectory.
pub fn network_polylines(net: &SpectralNetwork) -> String {
    let mut out = String::new();
    for t in &net.trajectories {
        push_polyline(&mut out, &t.points);
    }
    out
}

/// The strings of each web in the same format as [`network_polylines`].
pub fn web_polylines(webs: &[FiniteWeb]) -> String {
    let mut out = String::new();
    for w in webs {
        for s in &w.strings {
            push_polyline(&mut out, s);
        }
    }
    out
}
