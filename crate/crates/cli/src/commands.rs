use std::f64::consts::PI;
use std::path::PathBuf;

use cubic_tba::asymptotics::{build_prediction, remainder, AsymptoticPrediction};
use cubic_tba::bps::{BpsSpectrum, ValidationReport};
use cubic_tba::curve::Charge;
use cubic_tba::model::Example;
use cubic_tba::network::{
    detect_bps, final_arcs, grow_generations, grow_network, network_polylines, web_polylines, FinalArc, FiniteWeb,
    NetworkConfig, ScanConfig, SpectralNetwork,
};
use cubic_tba::polygon::{cross_ratio, InvariantExpression, ProjectivePolygon};
use cubic_tba::tba::{solve, SolverConfig, TbaSolution};
use cubic_tba::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::input::{load, read, spectrum, Loaded};
use crate::output::{emit, write_text, CliError};
use crate::{CheckArgs, EvalArgs, PeriodsArgs, PolygonArgs, PredictArgs, ScanArgs, SolveArgs, SolverArgs, SweepArgs, TraceArgs};

#[derive(Serialize)]
struct PeriodEntry {
    charge: Charge,
    #[serde(rename = "Z")]
    z: Complex64,
    abs: f64,
    arg: f64,
}

fn period_entry(periods: &cubic_tba::curve::Periods, charge: Charge) -> PeriodEntry {
    let z = periods.central_charge(&charge);
    PeriodEntry {
        charge,
        z,
        abs: z.norm(),
        arg: z.arg(),
    }
}

pub fn periods(a: PeriodsArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let periods = l.periods()?;
    let rank = l.lattice.rank();
    for c in &a.charges {
        l.lattice.check_rank(c)?;
    }
    let entries: Vec<PeriodEntry> = (0..rank)
        .map(|i| Charge::basis(rank, i))
        .chain(a.charges.iter().cloned())
        .map(|c| period_entry(&periods, c))
        .collect();
    if let Some(path) = &a.definition_out {
        emit(Some(path), &l.definition.resolved()?)?;
    }
    emit(
        a.out.as_deref(),
        &json!({
            "curve": l.name,
            "degree": l.curve.degree(),
            "polynomial": l.curve.polynomial().coefficients(),
            "roots": l.curve.ramification_points(),
            "basepoint": l.curve.basepoint(),
            "base_sheets": l.curve.base_sheets(),
            "pairing": l.lattice.pairing_matrix(),
            "periods": entries,
        }),
    )
}

#[derive(Serialize)]
struct TraceReport<'a> {
    curve: &'a str,
    theta: f64,
    trajectories: usize,
    critical: usize,
    born: usize,
    final_arcs: Vec<FinalArc>,
    network: &'a SpectralNetwork,
}

pub fn network_trace(a: TraceArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let cfg = NetworkConfig::default();
    let net = match a.generations {
        Some(g) => grow_generations(&l.curve, a.theta, &cfg, g)?,
        None => grow_network(&l.curve, a.theta, &cfg)?,
    };
    if let Some(path) = &a.polylines {
        write_text(Some(path), &network_polylines(&net))?;
    }
    emit(
        a.out.as_deref(),
        &TraceReport {
            curve: &l.name,
            theta: a.theta,
            trajectories: net.trajectories.len(),
            critical: net.critical_count(),
            born: net.born_count(),
            final_arcs: final_arcs(&net.infinity_marks),
            network: &net,
        },
    )
}

#[derive(Serialize)]
struct Frame {
    frame: usize,
    theta: f64,
    file: Option<String>,
    trajectories: usize,
    bps_ful: bool,
    marks: usize,
    error: Option<String>,
}

/// One polyline file per phase; frames whose network fails are listed with the error.
pub fn network_sweep(a: SweepArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let cfg = NetworkConfig::default();
    let step = a.step.unwrap_or(PI / 300.0);
    std::fs::create_dir_all(&a.out_dir)?;
    let mut frames = Vec::with_capacity(a.frames);
    for k in 0..a.frames {
        let theta = a.start + k as f64 * step;
        let frame = match grow_network(&l.curve, theta, &cfg) {
            Ok(net) => {
                let name = format!("frame_{k:04}.txt");
                write_text(Some(&a.out_dir.join(&name)), &network_polylines(&net))?;
                Frame {
                    frame: k,
                    theta,
                    file: Some(name),
                    trajectories: net.trajectories.len(),
                    bps_ful: net.bps_ful,
                    marks: net.infinity_marks.len(),
                    error: None,
                }
            }
            Err(e) => Frame {
                frame: k,
                theta,
                file: None,
                trajectories: 0,
                bps_ful: false,
                marks: 0,
                error: Some(e.to_string()),
            },
        };
        frames.push(frame);
    }
    emit(
        Some(&a.out_dir.join("index.json")),
        &json!({ "curve": l.name, "step": step, "frames": frames }),
    )
}

#[derive(Serialize)]
struct ScanReport<'a> {
    curve: &'a str,
    scan: &'a ScanConfig,
    webs: &'a [FiniteWeb],
    spectrum: Vec<cubic_tba::bps::BpsEntry>,
}

fn entries(s: &BpsSpectrum) -> Vec<cubic_tba::bps::BpsEntry> {
    s.entries()
        .map(|(c, omega)| cubic_tba::bps::BpsEntry {
            charge: c.clone(),
            omega,
        })
        .collect()
}

pub fn network_bps(a: ScanArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let mut scan = ScanConfig::default();
    if let Some(v) = a.start {
        scan.start = v;
    }
    if let Some(v) = a.end {
        scan.end = v;
    }
    if let Some(v) = a.step {
        scan.step = v;
    }
    if !(scan.step > 0.0 && scan.end > scan.start) {
        return Err(CliError::Usage("scan needs step > 0 and end > start".into()));
    }
    let webs = detect_bps(&l.curve, &l.lattice, &NetworkConfig::default(), &scan)?;
    let harvested = BpsSpectrum::from_webs(l.lattice.rank(), &webs)?;
    if let Some(path) = &a.spectrum_out {
        write_text(Some(path), &(harvested.to_json() + "\n"))?;
    }
    if let Some(path) = &a.polylines {
        write_text(Some(path), &web_polylines(&webs))?;
    }
    emit(
        a.out.as_deref(),
        &ScanReport {
            curve: &l.name,
            scan: &scan,
            webs: &webs,
            spectrum: entries(&harvested),
        },
    )
}

pub fn bps_dump(example: Example, out: Option<PathBuf>) -> Result<(), CliError> {
    write_text(out.as_deref(), &(BpsSpectrum::builtin(example).to_json() + "\n"))
}

pub fn bps_validate(path: PathBuf, out: Option<PathBuf>) -> Result<(), CliError> {
    let (s, report) = BpsSpectrum::from_json(&read(&path)?)?;
    #[derive(Serialize)]
    struct Body<'a> {
        entries: usize,
        valid: bool,
        report: &'a ValidationReport,
    }
    emit(
        out.as_deref(),
        &Body {
            entries: s.len(),
            valid: report.is_valid(),
            report: &report,
        },
    )?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} failed validation", path.display()), json!(report)))
    }
}

fn solver_config(r: f64, theta: f64, s: &SolverArgs) -> SolverConfig {
    SolverConfig {
        r,
        theta,
        l: s.l,
        n: s.n,
        tol: s.tol,
        max_iter: s.max_iter,
        relaxation: s.relaxation,
        ..SolverConfig::default()
    }
}

#[derive(Serialize)]
struct Coordinate {
    charge: Charge,
    #[serde(rename = "X")]
    x: f64,
    #[serde(rename = "log_X")]
    log_x: Complex64,
}

fn coordinates(sol: &TbaSolution, charges: impl Iterator<Item = Charge>, zeta: Complex64) -> Result<Vec<Coordinate>, CliError> {
    charges
        .map(|c| {
            let log_x = sol.evaluate_log(&c, zeta)?;
            Ok(Coordinate {
                charge: c,
                x: log_x.exp().re,
                log_x,
            })
        })
        .collect()
}

fn solve_with(l: &Loaded, cfg: &SolverConfig, spectrum_file: Option<&std::path::Path>) -> Result<TbaSolution, CliError> {
    let s = spectrum(l, spectrum_file)?;
    Ok(solve(cfg, &s, &l.periods()?, &l.lattice)?)
}

pub fn tba_solve(a: SolveArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let cfg = solver_config(a.r, a.theta, &a.solver);
    let sol = solve_with(&l, &cfg, a.solver.spectrum.as_deref())?;
    let rank = l.lattice.rank();
    let coords = coordinates(&sol, (0..rank).map(|i| Charge::basis(rank, i)), Complex64::from_polar(1.0, a.theta))?;
    emit(
        a.out.as_deref(),
        &json!({
            "curve": l.name,
            "config": cfg,
            "iterations_used": sol.iterations_used,
            "final_delta": sol.final_delta,
            "max_ray_modulus": sol.max_ray_modulus(),
            "coordinates": coords,
            "solution": sol,
        }),
    )
}

pub fn tba_eval(a: EvalArgs) -> Result<(), CliError> {
    let doc: serde_json::Value =
        serde_json::from_str(&read(&a.solution)?).map_err(|e| CliError::Usage(format!("solution file: {e}")))?;
    let body = doc.get("solution").cloned().unwrap_or(doc);
    let sol: TbaSolution = serde_json::from_value(body).map_err(|e| CliError::Usage(format!("solution file: {e}")))?;
    let zeta = Complex64::from_polar(a.zeta_abs, a.zeta_arg.unwrap_or(sol.theta));
    let coords = coordinates(&sol, a.charges.into_iter(), zeta)?;
    emit(a.out.as_deref(), &json!({ "zeta": zeta, "coordinates": coords }))
}

fn prediction(l: &Loaded, charge: &Charge, theta: f64, spectrum_file: Option<&std::path::Path>) -> Result<AsymptoticPrediction, CliError> {
    let s = spectrum(l, spectrum_file)?;
    Ok(build_prediction(charge, theta, &s, &l.periods()?, &l.lattice)?)
}

pub fn asym_predict(a: PredictArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let p = prediction(&l, &a.charge, a.theta, a.spectrum.as_deref())?;
    emit(a.out.as_deref(), &json!({ "curve": l.name, "prediction": p, "exact": p.is_exact() }))
}

pub fn asym_check(a: CheckArgs) -> Result<(), CliError> {
    let l = load(&a.source)?;
    let p = prediction(&l, &a.charge, a.theta, a.solver.spectrum.as_deref())?;
    let s = spectrum(&l, a.solver.spectrum.as_deref())?;
    let periods = l.periods()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["R", "logX", "prediction", "delta", "scaled"])
        .map_err(|e| CliError::Io(e.to_string()))?;
    for &r in &a.r_grid {
        let sol = solve(&solver_config(r, a.theta, &a.solver), &s, &periods, &l.lattice)?;
        let delta = remainder(&sol, &p)?;
        let log_x = sol.evaluate_log(&a.charge, Complex64::from_polar(1.0, a.theta))?.re;
        w.write_record(&[
            r.to_string(),
            format!("{log_x:.15e}"),
            format!("{:.15e}", p.predict(r)),
            format!("{delta:.15e}"),
            format!("{:.15e}", p.scaled_remainder(delta, r)),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_text(a.out.as_deref(), &String::from_utf8(bytes).unwrap())
}

pub fn polygon_eval(a: PolygonArgs) -> Result<(), CliError> {
    let expr: InvariantExpression = a.expr.parse()?;
    let poly: ProjectivePolygon =
        serde_json::from_str(&read(&a.vertices)?).map_err(|e| CliError::Usage(format!("vertex file: {e}")))?;
    let value = cross_ratio(&poly, &expr)?;
    emit(
        a.out.as_deref(),
        &json!({
            "expression": expr.to_string(),
            "vertices": poly.len(),
            "value": value,
            "warnings": poly.convexity_warnings(),
        }),
    )
}
