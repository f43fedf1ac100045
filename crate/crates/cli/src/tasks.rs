//! Task execution: builds models per sweep point, solves, measures, writes reports.

use rayon::prelude::*;
use serde_json::{json, Value};

use schwinger_core::basis::Basis;
use schwinger_core::effective::{penalty_scan, strong_coupling_heisenberg};
use schwinger_core::fit::{extrapolate, FitModel, FitResult};
use schwinger_core::lattice::{GaugeRep, LatticeSpec};
use schwinger_core::models::{
    build_gauge_integrated, build_penalty_model, build_schwinger_boson_model, build_spin_hamiltonian, jw_twist,
    CoulombGasModel, Model, WilsonModel,
};
use schwinger_core::observables::{chiral_condensate, mass_gap};
use schwinger_core::scan::qlm_scan;
use schwinger_core::{solve_lowest, Error, Filling};

use crate::config::{ExperimentConfig, ModelKind, Task};
use crate::output::{fmt, Table};

pub struct Built {
    pub model: Box<dyn Model>,
    pub spec: LatticeSpec,
}

fn bad(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Config {
        field,
        reason: reason.into(),
    }
}

pub fn build_model(cfg: &ExperimentConfig) -> Result<Built, Error> {
    let spec = cfg.spec()?;
    let couplings = cfg.couplings()?;
    let rep = cfg.rep()?;
    let filling = cfg.filling(&spec);
    let projected = cfg.sector.gauge_projected.unwrap_or(cfg.model != ModelKind::Penalty);
    let link_basis = |rep: &GaugeRep| {
        if projected {
            Basis::gauge_sector(&spec, rep, filling.clone())
        } else {
            Basis::enumerate(&spec, rep, filling.clone())
        }
    };
    let model: Box<dyn Model> = match cfg.model {
        ModelKind::Wilson => Box::new(WilsonModel::new(
            &spec,
            &couplings,
            &rep,
            link_basis(&rep)?,
            cfg.normalization(),
        )?),
        ModelKind::CoulombGas => {
            let zm = cfg.zero_mode();
            let basis = CoulombGasModel::basis_for(&spec, zm, filling)?;
            Box::new(build_gauge_integrated(&spec, &couplings, &rep, zm, basis)?)
        }
        ModelKind::Spin => {
            let up = match filling {
                Filling::PerFlavor(ref p) if p.len() == 1 => p[0],
                Filling::Total(n) => n,
                _ => return Err(bad("sector", "the spin chain needs a fixed magnetization")),
            };
            let theta = cfg.gauge.theta + jw_twist(spec.n_sites, up);
            Box::new(build_spin_hamiltonian(
                &spec,
                &couplings,
                theta,
                Basis::spins(spec.n_sites, Some(up))?,
            )?)
        }
        ModelKind::SchwingerBoson => {
            let GaugeRep::SchwingerBoson { two_s } = rep else {
                return Err(bad(
                    "gauge.rep",
                    "the schwinger-boson model needs schwinger-boson links",
                ));
            };
            let mut matched = couplings.matched_boson(&spec, two_s);
            if let Some(r) = cfg.gauge.boson_rescale {
                if !(r.is_finite() && r > 0.0) {
                    return Err(bad("gauge.boson_rescale", "must be positive and finite"));
                }
                matched.t = couplings.t * r;
            }
            Box::new(build_schwinger_boson_model(&spec, &matched, &rep, link_basis(&rep)?)?)
        }
        ModelKind::Penalty => {
            if projected {
                return Err(bad(
                    "sector.gauge_projected",
                    "the penalty model lives on the full space",
                ));
            }
            Box::new(build_penalty_model(
                &spec,
                &couplings,
                &rep,
                Basis::enumerate(&spec, &rep, filling)?,
            )?)
        }
    };
    Ok(Built { model, spec })
}

/// Rows plus anything worth recording in the summary.
pub struct TaskOutput {
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
}

fn sweep_columns(point: &ExperimentConfig) -> (String, String) {
    match point.sweep_value() {
        Some((name, v)) => (name, fmt(v)),
        None => ("none".into(), String::new()),
    }
}

fn fit_json(f: &FitResult) -> Value {
    json!({
        "model": format!("{:?}", f.model),
        "intercept": f.intercept,
        "intercept_err": f.intercept_err,
        "slope": f.slope,
        "slope_err": f.slope_err,
        "residual_norm": f.residual_norm,
    })
}

fn no_sweep(cfg: &ExperimentConfig, task: Task) -> Result<(), Error> {
    if cfg.sweep.is_some() {
        return Err(bad("sweep", format!("{} does not take a sweep", task.name())));
    }
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, task: Task) -> Result<TaskOutput, Error> {
    cfg.validate(task)?;
    match task {
        Task::Spectrum => spectrum(cfg),
        Task::Gap => gap(cfg),
        Task::Condensate => condensate(cfg),
        Task::PenaltyScan => penalty(cfg),
        Task::QlmScan => qlm(cfg),
        Task::StrongCoupling => strong_coupling(cfg),
    }
}

fn spectrum(cfg: &ExperimentConfig) -> Result<TaskOutput, Error> {
    let points = cfg.points()?;
    let results = points
        .par_iter()
        .map(|p| -> Result<_, Error> {
            let b = build_model(p)?;
            let s = solve_lowest(b.model.as_ref(), p.solver.k, &p.solver())?;
            Ok((b.model.descriptor(), s))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "point",
        "parameter",
        "value",
        "level",
        "eigenvalue",
        "residual",
        "descriptor",
    ]);
    for (i, (p, (descriptor, s))) in points.iter().zip(&results).enumerate() {
        let (name, value) = sweep_columns(p);
        for (level, (e, r)) in s.eigenvalues.iter().zip(&s.residual_norms).enumerate() {
            table.push(vec![
                i.to_string(),
                name.clone(),
                value.clone(),
                level.to_string(),
                fmt(*e),
                fmt(*r),
                descriptor.clone(),
            ]);
        }
    }
    Ok(TaskOutput {
        tables: vec![("spectrum.csv".into(), table)],
        summary: json!({ "points": points.len() }),
    })
}

fn gap(cfg: &ExperimentConfig) -> Result<TaskOutput, Error> {
    if cfg.solver.k < 2 {
        return Err(bad("solver.k", "a gap needs at least 2 levels"));
    }
    let points = cfg.points()?;
    let results = points
        .par_iter()
        .map(|p| -> Result<_, Error> {
            let b = build_model(p)?;
            let s = solve_lowest(b.model.as_ref(), p.solver.k, &p.solver())?;
            let g = mass_gap(&s, 100.0 * p.solver.tol)?;
            Ok((b.model.descriptor(), s.eigenvalues[0], g, b.spec.n_sites))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["point", "parameter", "value", "ground_energy", "gap", "descriptor"]);
    for (i, (p, (d, e0, g, _))) in points.iter().zip(&results).enumerate() {
        let (name, value) = sweep_columns(p);
        table.push(vec![i.to_string(), name, value, fmt(*e0), fmt(*g), d.clone()]);
    }
    let mut summary = json!({ "points": points.len() });
    if cfg.sweep.as_ref().is_some_and(|s| s.parameter == "n_sites") && results.len() >= 3 {
        let pts: Vec<(f64, f64)> = results.iter().map(|r| (r.3 as f64, r.2)).collect();
        summary["fit"] = fit_json(&extrapolate(&pts, FitModel::LinearInInverseN)?);
    }
    Ok(TaskOutput {
        tables: vec![("gap.csv".into(), table)],
        summary,
    })
}

fn condensate(cfg: &ExperimentConfig) -> Result<TaskOutput, Error> {
    if !matches!(cfg.model, ModelKind::Spin | ModelKind::CoulombGas) || cfg.lattice.flavors != 1 {
        return Err(bad(
            "model",
            "the condensate needs a one-flavor spin or Coulomb-gas model",
        ));
    }
    let points = cfg.points()?;
    let results = points
        .par_iter()
        .map(|p| -> Result<_, Error> {
            let b = build_model(p)?;
            let s = solve_lowest(b.model.as_ref(), 1, &p.solver())?;
            let v = s
                .ground_state()
                .ok_or_else(|| Error::Unsupported("solver returned no vector".into()))?;
            let chi = chiral_condensate(v, b.model.basis(), &b.spec)?;
            Ok((b.model.descriptor(), s.eigenvalues[0], chi))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "point",
        "parameter",
        "value",
        "ground_energy",
        "condensate",
        "descriptor",
    ]);
    let mut pts = Vec::new();
    for (i, (p, (d, e0, chi))) in points.iter().zip(&results).enumerate() {
        let (name, value) = sweep_columns(p);
        if let Some((_, v)) = p.sweep_value() {
            pts.push((v, *chi));
        }
        table.push(vec![i.to_string(), name, value, fmt(*e0), fmt(*chi), d.clone()]);
    }
    let mut summary = json!({ "points": points.len() });
    let model = match cfg.sweep.as_ref().map(|s| s.parameter.as_str()) {
        Some("m") => Some(FitModel::LinearInMass),
        Some("n_sites") => Some(FitModel::LinearInInverseN),
        _ => None,
    };
    if let (Some(model), true) = (model, pts.len() >= 3) {
        summary["fit"] = fit_json(&extrapolate(&pts, model)?);
    }
    Ok(TaskOutput {
        tables: vec![("condensate.csv".into(), table)],
        summary,
    })
}

fn penalty(cfg: &ExperimentConfig) -> Result<TaskOutput, Error> {
    no_sweep(cfg, Task::PenaltyScan)?;
    if cfg.model != ModelKind::Penalty {
        return Err(bad("model", "penalty-scan needs the penalty model"));
    }
    let spec = cfg.spec()?;
    let report = penalty_scan(
        &spec,
        &cfg.couplings()?,
        &cfg.rep()?,
        &cfg.scan.gammas,
        cfg.solver.k,
        &cfg.solver(),
    )?;
    let mut table = Table::new(&[
        "gamma",
        "level",
        "full",
        "projected",
        "effective",
        "violation",
        "descriptor",
    ]);
    for row in &report.rows {
        for level in 0..row.full.len() {
            let at = |v: &Vec<f64>| v.get(level).copied().map(fmt).unwrap_or_default();
            table.push(vec![
                fmt(row.gamma),
                level.to_string(),
                at(&row.full),
                at(&row.projected),
                at(&row.effective),
                fmt(row.violation),
                format!("{};gamma={}", report.descriptor, row.gamma),
            ]);
        }
    }
    let summary = json!({
        "points": report.rows.len(),
        "energy_exponent": report.energy_exponent.as_ref().map(fit_json),
        "violation_exponent": report.violation_exponent.as_ref().map(fit_json),
    });
    Ok(TaskOutput {
        tables: vec![("penalty_scan.csv".into(), table)],
        summary,
    })
}

fn qlm(cfg: &ExperimentConfig) -> Result<TaskOutput, Error> {
    no_sweep(cfg, Task::QlmScan)?;
    if cfg.model != ModelKind::Wilson {
        return Err(bad("model", "qlm-scan needs the wilson model"));
    }
    let mut two_s = Vec::new();
    for &s in &cfg.scan.spins {
        let t = 2.0 * s;
        if !(t.is_finite() && t >= 1.0 && t.fract() == 0.0) {
            return Err(bad("scan.spins", format!("{s} is not a positive half-integer")));
        }
        two_s.push(t as u32);
    }
    let spec = cfg.spec()?;
    let report = qlm_scan(
        &spec,
        &cfg.couplings()?,
        &two_s,
        cfg.scan.reference_cutoff,
        cfg.solver.k,
        cfg.normalization(),
        &cfg.solver(),
    )?;
    let mut table = Table::new(&["spin", "level", "eigenvalue", "reference", "deviation", "descriptor"]);
    for (i, r) in report.reference.iter().enumerate() {
        table.comment(format!("reference[{i}] = {}", fmt(*r)));
    }
    table.comment(format!("reference_descriptor = {}", report.reference_descriptor));
    for row in &report.rows {
        for (level, (e, d)) in row.eigenvalues.iter().zip(&row.deviations).enumerate() {
            table.push(vec![
                fmt(row.two_s as f64 / 2.0),
                level.to_string(),
                fmt(*e),
                fmt(report.reference[level]),
                fmt(*d),
                row.descriptor.clone(),
            ]);
        }
    }
    let summary = json!({
        "points": report.rows.len(),
        "ground_deviation_monotone": report.is_monotone_decreasing(),
    });
    Ok(TaskOutput {
        tables: vec![("qlm_scan.csv".into(), table)],
        summary,
    })
}

fn strong_coupling(cfg: &ExperimentConfig) -> Result<TaskOutput, Error> {
    if cfg.model != ModelKind::CoulombGas || cfg.lattice.flavors != 2 {
        return Err(bad("model", "strong-coupling needs the two-flavor coulomb-gas model"));
    }
    let points = cfg.points()?;
    let results = points
        .par_iter()
        .map(|p| -> Result<_, Error> {
            let b = build_model(p)?;
            let (m, _) = strong_coupling_heisenberg(&b.spec, &p.couplings()?)?;
            Ok((b.model.descriptor(), m))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&[
        "point",
        "parameter",
        "value",
        "j",
        "constant",
        "max_relative_deviation",
        "unperturbed_gap",
        "manifold_dim",
        "descriptor",
    ]);
    for (i, (p, (d, m))) in points.iter().zip(&results).enumerate() {
        let (name, value) = sweep_columns(p);
        table.push(vec![
            i.to_string(),
            name,
            value,
            fmt(m.j),
            fmt(m.constant),
            fmt(m.max_relative_deviation),
            fmt(m.unperturbed_gap),
            m.manifold_dim.to_string(),
            d.clone(),
        ]);
    }
    Ok(TaskOutput {
        tables: vec![("strong_coupling.csv".into(), table)],
        summary: json!({ "points": points.len() }),
    })
}
