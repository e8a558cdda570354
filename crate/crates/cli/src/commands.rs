use std::path::{Path, PathBuf};

use nrmhd::experiments::io::{write_csv, write_json};
use nrmhd::experiments::*;
use nrmhd::families::make_family;
use nrmhd::lp::{besov_norm, FilterBank, NormReport};
use nrmhd::solver::solve;
use nrmhd::spectral::mhdf::{read_fields, write_fields};
use nrmhd::verify::{self, C0_CHANGE, CONTRACTION, CONTROL_TOL, RESIDUAL_SLOPE, SLOPE_TOL_2D, SLOPE_TOL_3D};
use nrmhd::{Error, VecField};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Named assertion attached to every experiment report.
#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub criterion: String,
    pub passed: bool,
}

fn assertion(criterion: impl Into<String>, passed: bool) -> Assertion {
    Assertion {
        criterion: criterion.into(),
        passed,
    }
}

pub enum Failure {
    Config(String),
    Lib(Error),
    /// Assertions failed; outputs were still written.
    Checks(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

fn require(config: &RunConfig, ns: &[u32], dynamic: bool, extra: Vec<String>) -> Outcome {
    let mut problems = config.problems(ns, dynamic);
    problems.extend(extra);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Config(problems.join("\n")))
    }
}

fn out_dir(config: &RunConfig) -> Result<PathBuf, Error> {
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_fields_of(path: &Path, v: &VecField<f64>) -> Result<(), Error> {
    write_fields(path, v.components())
}

fn read_vec(path: &Path) -> Result<VecField<f64>, Error> {
    let (_, fields) = read_fields::<f64>(path)?;
    VecField::new(fields)
}

pub fn generate(config: &RunConfig) -> Outcome {
    require(config, &[config.family.n], false, Vec::new())?;
    let params = config.family_params();
    let grid = config.make_grid()?;
    let data = make_family(&params, &grid)?;
    let dir = out_dir(config)?;
    write_fields_of(&dir.join("u0.mhdf"), &data.u0)?;
    write_fields_of(&dir.join("b0.mhdf"), &data.b0)?;
    write_json(&dir.join("family.json"), &json!({ "params": params, "grid": config.grid }))?;
    Ok(())
}

pub fn simulate(config: &RunConfig, u0: Option<&Path>, b0: Option<&Path>) -> Outcome {
    let (u, b) = match (u0, b0) {
        (Some(u), Some(b)) => {
            let problems = config.solve.problems().into_iter().map(|p| format!("solve: {p}")).collect::<Vec<_>>();
            if !problems.is_empty() {
                return Err(Failure::Config(problems.join("\n")));
            }
            (read_vec(u)?, read_vec(b)?)
        }
        (None, None) => {
            require(config, &[config.family.n], true, Vec::new())?;
            let data = make_family(&config.family_params(), &config.make_grid()?)?;
            (data.u0, data.b0)
        }
        _ => return Err(Failure::Config("--u0 and --b0 go together".into())),
    };
    let dir = out_dir(config)?;
    let traj = match solve(&u, &b, &config.solve) {
        Ok(t) => t,
        Err(Error::BlowUp(report)) => {
            write_json(&dir.join("blowup.json"), &report)?;
            return Err(Error::BlowUp(report).into());
        }
        Err(e) => return Err(e.into()),
    };
    traj.write_csv(&dir.join("series.csv"))?;
    write_fields_of(&dir.join("u_final.mhdf"), &traj.final_state.u)?;
    write_fields_of(&dir.join("b_final.mhdf"), &traj.final_state.b)?;
    for (k, st) in traj.states.iter().enumerate() {
        write_fields_of(&dir.join(format!("u_{k:04}.mhdf")), &st.u)?;
        write_fields_of(&dir.join(format!("b_{k:04}.mhdf")), &st.b)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Hs,
    Besov,
    L2,
    Linf,
}

pub fn norm(path: &Path, kind: Kind, s: f64, r: f64) -> Result<NormReport, Failure> {
    let v = read_vec(path)?;
    Ok(match kind {
        Kind::Hs => NormReport::sobolev(&v, s),
        Kind::L2 => NormReport::l2(&v),
        Kind::Linf => NormReport::linf(&v),
        Kind::Besov => {
            if !(r >= 1.0) {
                return Err(Failure::Config(format!("besov index r = {r} must be ≥ 1")));
            }
            besov_norm(&v, s, r, &FilterBank::new(v.grid()))?
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Asymptotics,
    Residuals,
    Duhamel,
    Nonuniform,
    Continuity,
    Gronwall,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::Asymptotics => "asymptotics",
            Experiment::Residuals => "residuals",
            Experiment::Duhamel => "duhamel",
            Experiment::Nonuniform => "nonuniform",
            Experiment::Continuity => "continuity",
            Experiment::Gronwall => "gronwall",
        }
    }

    fn default_ns(self) -> Vec<u32> {
        match self {
            Experiment::Asymptotics => vec![32, 64, 128, 256],
            Experiment::Residuals | Experiment::Duhamel => vec![4, 8, 16],
            Experiment::Nonuniform | Experiment::Gronwall => vec![8, 16],
            Experiment::Continuity => Vec::new(),
        }
    }
}

fn step_problems(label: &str, times: &[f64], dt: f64) -> Vec<String> {
    let mut out = Vec::new();
    if times.is_empty() {
        out.push(format!("{label}: empty"));
    }
    for &t in times {
        let k = (t / dt).round();
        if !(t > 0.0) || (k * dt - t).abs() > 1e-9 * t.max(1.0) {
            out.push(format!("{label}: {t} is not a positive multiple of solve.dt = {dt}"));
        }
    }
    out
}

fn list_problems(label: &str, len: usize, min: usize) -> Vec<String> {
    if len < min {
        vec![format!("{label}: need at least {min} values, got {len}")]
    } else {
        Vec::new()
    }
}

/// Run one experiment, write `<name>.csv` and `<name>.json`; `Checks` if any assertion fails.
pub fn experiment(config: &RunConfig, which: Experiment) -> Outcome {
    let base = config.family_params();
    let ns = config.experiment.n_list.clone().unwrap_or_else(|| which.default_ns());
    let ex = &config.experiment;
    let name = which.name();
    let (report, checks): (Value, Vec<Assertion>) = match which {
        Experiment::Asymptotics => {
            let extra = [
                list_problems("experiment.n_list", ns.len(), 2),
                list_problems("experiment.alpha_list", ex.alpha_list.len(), 1),
            ]
            .concat();
            require(config, &[], false, extra)?;
            let dir = out_dir(config)?;
            let rep = exp_asymptotics(&ns, base.delta, base.s, &ex.alpha_list)?;
            write_csv(&dir.join(format!("{name}.csv")), &rep.rows)?;
            let mut checks = Vec::new();
            for &alpha in &ex.alpha_list {
                let rows = rep.at_alpha(alpha);
                let errs: Vec<[f64; 3]> = rows
                    .iter()
                    .map(|r| [(r.plain_ratio - 1.0).abs(), (r.cos_ratio - 1.0).abs(), (r.sin_ratio - 1.0).abs()])
                    .collect();
                let last = errs.last().copied().unwrap_or([f64::INFINITY; 3]);
                checks.push(assertion(
                    format!("alpha {alpha}: ratios within {} at the largest n", verify::ASYMPTOTIC_TOL),
                    last.iter().all(|e| *e <= verify::ASYMPTOTIC_TOL),
                ));
                checks.push(assertion(
                    format!("alpha {alpha}: errors decrease in n"),
                    (0..3).all(|q| errs.windows(2).all(|w| w[1][q] < w[0][q])),
                ));
            }
            (serde_json::to_value(&rep)?, checks)
        }
        Experiment::Residuals => {
            let extra = [list_problems("experiment.n_list", ns.len(), 2), step_problems("experiment.times", &ex.times, config.solve.dt)].concat();
            require(config, &ns, true, extra)?;
            let dir = out_dir(config)?;
            let (rep, runs) = exp_residuals(&base, &ns, &config.make_grid()?, &config.solve, &ex.times)?;
            let rows: Vec<ResidualSample> = runs.iter().flat_map(|r| r.residuals.iter().copied()).collect();
            write_csv(&dir.join(format!("{name}.csv")), &rows)?;
            let mut checks = Vec::new();
            for (label, fits) in [("E", &rep.e_fits), ("F", &rep.f_fits)] {
                for tf in fits {
                    checks.push(assertion(
                        format!("{label} slope at t = {} is <= {RESIDUAL_SLOPE}", tf.t),
                        tf.fit.slope <= RESIDUAL_SLOPE,
                    ));
                }
            }
            checks.push(assertion("every fit has r2 >= 0.9", rep.conclusive));
            (serde_json::to_value(&rep)?, checks)
        }
        Experiment::Duhamel => {
            let extra = [list_problems("experiment.n_list", ns.len(), 2), step_problems("experiment.drift_t", &[ex.drift_t], config.solve.dt)].concat();
            require(config, &ns, true, extra)?;
            let dir = out_dir(config)?;
            let grid = config.make_grid()?;
            let mut drift = Vec::new();
            for &n in &ns {
                let run = run_approximate(&base.with_n(n), &grid, &config.solve, &[ex.drift_t])?;
                drift.extend(run.drift);
            }
            write_csv(&dir.join(format!("{name}.csv")), &drift)?;
            let rep = duhamel_report(&drift, base.delta, ex.drift_t)?;
            let checks = vec![
                assertion(
                    format!("drift slope at t = {} is <= {:.4}", ex.drift_t, rep.exponent + 0.2),
                    rep.fit.slope <= rep.exponent + 0.2,
                ),
                assertion("drift is nondecreasing in t", rep.monotone.iter().all(|(_, m)| *m)),
            ];
            (serde_json::to_value(&rep)?, checks)
        }
        Experiment::Nonuniform => {
            let mut all: Vec<u32> = ns.iter().chain(&ex.static_n).copied().collect();
            all.sort_unstable();
            all.dedup();
            let extra = [list_problems("experiment.n_list", ns.len(), 1), list_problems("experiment.static_n", ex.static_n.len(), 2)].concat();
            require(config, &all, true, extra)?;
            let dir = out_dir(config)?;
            let (rep, runs) = exp_nonuniform(&base, &ns, &ex.static_n, &config.make_grid()?, &config.solve)?;
            let rows: Vec<PairSample> = runs.iter().flat_map(|r| r.samples.iter().copied()).collect();
            write_csv(&dir.join(format!("{name}.csv")), &rows)?;
            let target = -(1.0 - base.delta);
            let tol = if base.d == 2 { SLOPE_TOL_2D } else { SLOPE_TOL_3D };
            let mut checks = vec![
                assertion(
                    format!("D0 slope within {tol} of {target}"),
                    rep.d0_fit.as_ref().is_some_and(|f| (f.slope - target).abs() <= tol),
                ),
                assertion("c0 > 0", rep.c0 > 0.0),
                assertion(
                    format!("c0 changes by at most {:.0}% between the two largest n", 100.0 * C0_CHANGE),
                    rep.c0_change.is_some_and(|c| c <= C0_CHANGE),
                ),
            ];
            for e in &rep.entries {
                checks.push(assertion(format!("n = {}: completed", e.n), e.completed));
                checks.push(assertion(format!("n = {}: triangle bound", e.n), e.triangle_ok));
            }
            (serde_json::to_value(&rep)?, checks)
        }
        Experiment::Continuity => {
            let cc = config.continuity();
            let extra = cc.problems().into_iter().map(|p| format!("experiment: {p}")).collect();
            require(config, &[cc.base_n], true, extra)?;
            let dir = out_dir(config)?;
            let (rep, series) = exp_continuity(&base, &cc, &config.make_grid()?, &config.solve)?;
            write_csv(&dir.join(format!("{name}.csv")), &series)?;
            let checks = vec![
                assertion("completed", rep.completed),
                assertion("solution distance decreases with eps", rep.sol_dist_decreasing),
                assertion(format!("contraction <= {CONTRACTION}"), rep.contraction <= CONTRACTION),
                assertion(format!("control distance <= {CONTROL_TOL:e}"), rep.control_sol_dist <= CONTROL_TOL),
            ];
            (serde_json::to_value(&rep)?, checks)
        }
        Experiment::Gronwall => {
            require(config, &ns, true, list_problems("experiment.n_list", ns.len(), 1))?;
            let dir = out_dir(config)?;
            let grid = config.make_grid()?;
            let c = ex.c.unwrap_or(LOCKED_C);
            let mut rows = Vec::new();
            let mut diagnostics = Vec::new();
            let mut checks = Vec::new();
            for &n in &ns {
                let run = run_pair(&base, n, &grid, &config.solve)?;
                let d = difference_diagnostics(&run.samples, c)?;
                checks.push(assertion(format!("n = {n}: completed"), run.completed));
                checks.push(assertion(format!("n = {n}: lhs <= rhs at every sample"), d.holds));
                rows.extend(run.samples);
                diagnostics.push(d);
            }
            write_csv(&dir.join(format!("{name}.csv")), &rows)?;
            (json!({ "c": c, "diagnostics": diagnostics }), checks)
        }
    };
    finish(config, name, report, checks)
}

fn finish(config: &RunConfig, name: &str, report: Value, checks: Vec<Assertion>) -> Outcome {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.criterion.clone()).collect();
    let mut doc = match report {
        Value::Object(m) => m,
        other => {
            let mut m = serde_json::Map::new();
            m.insert("report".into(), other);
            m
        }
    };
    doc.insert("experiment".into(), json!(name));
    doc.insert("checks".into(), serde_json::to_value(&checks)?);
    doc.insert("passed".into(), json!(failed.is_empty()));
    write_json(&config.output_dir.join(format!("{name}.json")), &Value::Object(doc))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}

/// Every acceptance check; writes `verify.json`.
pub fn verify(config: &RunConfig) -> Outcome {
    let dir = out_dir(config)?;
    let checks = verify::run_all(config.experiment.profile, |c| println!("{}", c.line()))?;
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("criterion {}: {}", c.id, c.name))
        .collect();
    write_json(
        &dir.join("verify.json"),
        &json!({ "profile": config.experiment.profile, "checks": checks, "passed": failed.is_empty() }),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}
