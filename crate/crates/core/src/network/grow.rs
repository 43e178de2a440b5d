use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::infinity::{classify_infinity, MarkedPoint};
use super::trace::{seed_critical, trace, NetworkConfig, Origin, Status, Trajectory, TrajectorySeed};
use crate::curve::{nearest_root, SpectralCurve};
use crate::error::{Error, Result};

const GRID_CELL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JunctionKind {
    Birth,
    HeadOn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    pub point: Complex64,
    /// `parents[0]` carries `(i, j)` and `parents[1]` carries `(j, k)`.
    pub parents: [usize; 2],
    pub child: Option<usize>,
    pub kind: JunctionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralNetwork {
    pub theta: f64,
    pub trajectories: Vec<Trajectory>,
    pub junctions: Vec<Junction>,
    /// Empty unless every trajectory escaped.
    pub infinity_marks: Vec<MarkedPoint>,
    pub bps_ful: bool,
    pub generations: usize,
}

impl SpectralNetwork {
    pub fn critical_count(&self) -> usize {
        self.trajectories
            .iter()
            .filter(|t| matches!(t.origin, Origin::Critical { .. }))
            .count()
    }

    pub fn born_count(&self) -> usize {
        self.trajectories.len() - self.critical_count()
    }

    pub fn all_escaped(&self) -> bool {
        self.trajectories.iter().all(|t| t.status == Status::Escaped)
    }
}

/// A transversal crossing of segment `seg[0]` of trajectory `traj[0]` with
/// segment `seg[1]` of `traj[1]`, at parameters `t` along each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Crossing {
    pub traj: [usize; 2],
    pub seg: [usize; 2],
    pub t: [f64; 2],
    pub point: Complex64,
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segment_intersection(p0: Complex64, p1: Complex64, q0: Complex64, q1: Complex64) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = cross(r, s);
    if denom.abs() < 1e-300 {
        return None;
    }
    let d = q0 - p0;
    let t = cross(d, s) / denom;
    let u = cross(d, r) / denom;
    // half-open so that a crossing through a shared vertex is reported once
    if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

fn cells(a: Complex64, b: Complex64) -> impl Iterator<Item = (i64, i64)> {
    let x0 = (a.re.min(b.re) / GRID_CELL).floor() as i64;
    let x1 = (a.re.max(b.re) / GRID_CELL).floor() as i64;
    let y0 = (a.im.min(b.im) / GRID_CELL).floor() as i64;
    let y1 = (a.im.max(b.im) / GRID_CELL).floor() as i64;
    (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
}

/// All crossings between distinct trajectories where at least one index is `>= new_from`.
///
/// Results are sorted so that growth is deterministic.
pub(crate) fn find_crossings(trajs: &[Trajectory], new_from: usize) -> Vec<Crossing> {
    let mut grid: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
    for (ti, t) in trajs.iter().enumerate() {
        for k in 0..t.points.len().saturating_sub(1) {
            for c in cells(t.points[k], t.points[k + 1]) {
                grid.entry(c).or_default().push((ti, k));
            }
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut keys: Vec<_> = grid.keys().copied().collect();
    keys.sort_unstable();
    for key in keys {
        let bucket = &grid[&key];
        for (m, &(a, ka)) in bucket.iter().enumerate() {
            for &(b, kb) in &bucket[m + 1..] {
                if a == b || (a < new_from && b < new_from) {
                    continue;
                }
                let (a, ka, b, kb) = if a < b { (a, ka, b, kb) } else { (b, kb, a, ka) };
                if !seen.insert((a, ka, b, kb)) {
                    continue;
                }
                let ta = &trajs[a].points;
                let tb = &trajs[b].points;
                if let Some((s, u)) = segment_intersection(ta[ka], ta[ka + 1], tb[kb], tb[kb + 1]) {
                    out.push(Crossing {
                        traj: [a, b],
                        seg: [ka, kb],
                        t: [s, u],
                        point: ta[ka] + (ta[ka + 1] - ta[ka]) * s,
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| (x.traj, x.seg).cmp(&(y.traj, y.seg)));
    out
}

/// Root indices of the tracked pair of `traj` at a point on segment `k`.
pub(crate) fn labels_at(curve: &SpectralCurve, traj: &Trajectory, k: usize, point: Complex64) -> [usize; 2] {
    let roots = curve.fibre(point);
    let pair = traj.pairs[k];
    [nearest_root(&roots, pair[0]).0, nearest_root(&roots, pair[1]).0]
}

/// Radius around a trajectory's start inside which crossings are ignored.
fn origin_exclusion(traj: &Trajectory, cfg: &NetworkConfig) -> f64 {
    match traj.origin {
        Origin::Critical { .. } => cfg.dedup_radius.max(2.0 * cfg.seed_offset),
        Origin::Junction { .. } => cfg.dedup_radius,
    }
}

pub(crate) enum Event {
    /// Parents ordered as `(i, j)`, `(j, k)`; the child seed carries `(i, k)`.
    Birth([usize; 2], TrajectorySeed),
    HeadOn([usize; 2]),
    None,
}

pub(crate) fn classify_crossing(
    curve: &SpectralCurve,
    trajs: &[Trajectory],
    c: &Crossing,
    cfg: &NetworkConfig,
) -> Event {
    let [a, b] = c.traj;
    let (ta, tb) = (&trajs[a], &trajs[b]);
    if (c.point - ta.start()).norm() < origin_exclusion(ta, cfg)
        || (c.point - tb.start()).norm() < origin_exclusion(tb, cfg)
    {
        return Event::None;
    }
    let la = labels_at(curve, ta, c.seg[0], c.point);
    let lb = labels_at(curve, tb, c.seg[1], c.point);
    if la[0] == lb[1] && la[1] == lb[0] {
        let ua = ta.segment_tangent(c.seg[0]);
        let ub = tb.segment_tangent(c.seg[1]);
        let angle = (ua * ub.conj()).arg().abs();
        if (std::f64::consts::PI - angle) < cfg.headon_tolerance {
            return Event::HeadOn([a, b]);
        }
        return Event::None;
    }
    let (first, second, l1, l2) = if la[1] == lb[0] && la[0] != lb[1] {
        (a, b, la, lb)
    } else if lb[1] == la[0] && lb[0] != la[1] {
        (b, a, lb, la)
    } else {
        return Event::None;
    };
    let roots = curve.fibre(c.point);
    let seg_of = |t: usize| if t == a { (c.seg[0], c.t[0]) } else { (c.seg[1], c.t[1]) };
    let (k1, t1) = seg_of(first);
    let (k2, t2) = seg_of(second);
    let chain1 = trajs[first].chain_at(k1, t1);
    let chain2 = trajs[second].chain_at(k2, t2);
    let initial_chain = chain1.iter().zip(&chain2).map(|(x, y)| x + y).collect();
    Event::Birth(
        [first, second],
        TrajectorySeed {
            origin: Origin::Junction {
                parents: [first, second],
            },
            point: c.point,
            pair: [roots[l1[0]], roots[l2[1]]],
            initial_chain,
            origin_zero: None,
        },
    )
}

fn trace_all(curve: &SpectralCurve, theta: f64, seeds: &[TrajectorySeed], cfg: &NetworkConfig) -> Result<Vec<Trajectory>> {
    seeds.par_iter().map(|s| trace(curve, theta, s, cfg)).collect()
}

/// Traces the critical trajectories and adds children at `(i,j)`/`(j,k)`
/// crossings until no new crossings appear.
///
/// When `classify` is set and every trajectory escapes, the circle at infinity
/// is classified as well.
pub fn grow_network(curve: &SpectralCurve, theta: f64, cfg: &NetworkConfig) -> Result<SpectralNetwork> {
    let mut net = grow_generations(curve, theta, cfg, cfg.max_generations)?;
    if net.all_escaped() && !net.bps_ful {
        net.infinity_marks = classify_infinity(curve, &net)?;
    }
    Ok(net)
}

/// Growth limited to `generations` rounds of births.
///
/// Unlike [`grow_network`] this is not an error when the limit is reached
/// with pending births; `GenerationCapExceeded` is only raised when the
/// limit equals the configured cap.
pub fn grow_generations(
    curve: &SpectralCurve,
    theta: f64,
    cfg: &NetworkConfig,
    generations: usize,
) -> Result<SpectralNetwork> {
    let seeds = seed_critical(curve, theta, cfg);
    let mut trajectories = trace_all(curve, theta, &seeds, cfg)?;
    let mut junctions: Vec<Junction> = Vec::new();
    let mut bps_ful = false;
    let mut new_from = 0;
    let mut gen = 0;
    loop {
        let crossings = find_crossings(&trajectories, new_from);
        let mut seeds = Vec::new();
        let mut pending = Vec::new();
        for c in &crossings {
            match classify_crossing(curve, &trajectories, c, cfg) {
                Event::HeadOn(parents) => {
                    bps_ful = true;
                    junctions.push(Junction {
                        point: c.point,
                        parents,
                        child: None,
                        kind: JunctionKind::HeadOn,
                    });
                }
                Event::Birth(parents, seed) => {
                    let duplicate = junctions.iter().any(|j| {
                        j.kind == JunctionKind::Birth
                            && j.parents == parents
                            && (j.point - seed.point).norm() < cfg.dedup_radius
                    });
                    if duplicate {
                        continue;
                    }
                    pending.push(junctions.len());
                    junctions.push(Junction {
                        point: seed.point,
                        parents,
                        child: None,
                        kind: JunctionKind::Birth,
                    });
                    seeds.push(seed);
                }
                Event::None => {}
            }
        }
        if seeds.is_empty() {
            break;
        }
        if gen == generations {
            if generations == cfg.max_generations {
                return Err(Error::GenerationCapExceeded(cfg.max_generations));
            }
            // drop the births that were not traced
            junctions.retain(|j| j.kind == JunctionKind::HeadOn || j.child.is_some());
            break;
        }
        new_from = trajectories.len();
        let children = trace_all(curve, theta, &seeds, cfg)?;
        for (n, j) in pending.into_iter().enumerate() {
            junctions[j].child = Some(new_from + n);
        }
        trajectories.extend(children);
        gen += 1;
    }
    if trajectories.iter().any(|t| matches!(t.status, Status::HitZero(_))) {
        bps_ful = true;
    }
    Ok(SpectralNetwork {
        theta,
        trajectories,
        junctions,
        infinity_marks: Vec::new(),
        bps_ful,
        generations: gen,
    })
}
