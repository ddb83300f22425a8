//! Command implementations. Every command produces its artifacts in memory
//! so the driver can either write them (with a manifest) or verify them
//! against an existing manifest.

use std::path::Path;

use anyhow::Result;

use wams_core::bilevel::{self, PartitionSpec};
use wams_core::energy::{at_energy, ms_energy, EnergyReport, Normalization};
use wams_core::fields::{Grid, ScalarField};
use wams_core::gammalab::{gamma_sweep, Scenario, SweepPlan};
use wams_core::io;
use wams_core::profiles::{
    distance_field, optimal_profile, recovery_pair_jump, recovery_v_multi_d,
};
use wams_core::solver::{alternate, RelocationPolicy, SolverConfig};
use wams_core::weights::WeightField;
use wams_core::CoreError;

use crate::config::RunConfig;

#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: &str, body: String) -> Artifact {
        Artifact {
            name: name.to_string(),
            bytes: body.into_bytes(),
        }
    }
}

/// Failed run: exit code, message, and any artifacts completed before the
/// failure (written without a manifest).
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub partial: Vec<Artifact>,
}

pub type RunResult = std::result::Result<Vec<Artifact>, Failure>;

fn fail(code: i32, message: String) -> Failure {
    Failure {
        code,
        message,
        partial: vec![],
    }
}

fn code_of(e: &CoreError) -> i32 {
    match e {
        CoreError::SolverDiverged { .. } | CoreError::Singular(_) => 3,
        _ => 2,
    }
}

fn core_fail(e: CoreError) -> Failure {
    fail(code_of(&e), e.to_string())
}

fn cfg_fail(e: anyhow::Error) -> Failure {
    fail(2, format!("{e:#}"))
}

// ---------------------------------------------------------------------------
// shared readers
// ---------------------------------------------------------------------------

fn read_field(path: &Path) -> Result<ScalarField, Failure> {
    let r = if path.extension().map(|e| e == "pgm").unwrap_or(false) {
        io::read_field_pgm(path)
    } else {
        io::read_field_csv(path)
    };
    r.map_err(core_fail)
}

fn read_weight(cfg: &RunConfig) -> Result<WeightField, Failure> {
    let path = cfg.path("weight").map_err(cfg_fail)?;
    io::read_weight_file(&path).map_err(core_fail)
}

fn normalization(cfg: &RunConfig) -> Result<Normalization, Failure> {
    match cfg.get("normalization") {
        None => Ok(Normalization::default()),
        Some(s) => Normalization::parse(s).map_err(core_fail),
    }
}

fn solver_config(cfg: &RunConfig, eps: f64) -> Result<SolverConfig, Failure> {
    let mut sc = SolverConfig::with_eps(eps);
    sc.normalization = normalization(cfg)?;
    sc.lambda = cfg.f64_or("lambda", 1.0).map_err(cfg_fail)?;
    sc.v_floor = cfg.f64_or("v_floor", 0.0).map_err(cfg_fail)?;
    sc.tol_linear = cfg.f64_or("tol_linear", 1e-8).map_err(cfg_fail)?;
    sc.tol_energy = cfg.f64_or("tol_energy", 1e-7).map_err(cfg_fail)?;
    sc.max_outer_iterations = cfg.usize_or("max_outer", 200).map_err(cfg_fail)?;
    sc.max_linear_iterations = cfg.usize_or("max_linear", 200_000).map_err(cfg_fail)?;
    sc.relocation = match cfg.get("relocation") {
        None | Some("trench-shift") => RelocationPolicy::TrenchShift,
        Some("off") => RelocationPolicy::Off,
        Some(other) => {
            return Err(fail(
                2,
                format!("config key `relocation` has unknown value `{other}` (trench-shift|off)"),
            ))
        }
    };
    sc.validate().map_err(core_fail)?;
    Ok(sc)
}

fn energy_csv(rows: &[EnergyReport]) -> String {
    let mut out = String::from(EnergyReport::csv_header());
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn field_artifacts(name: &str, f: &ScalarField) -> Result<Vec<Artifact>, Failure> {
    let mut out = vec![Artifact::text(&format!("{name}.csv"), io::field_to_csv(f))];
    if f.grid().dim() == 2 {
        let (pgm, sidecar) = io::field_to_pgm(f).map_err(core_fail)?;
        out.push(Artifact::text(&format!("{name}.pgm"), pgm));
        out.push(Artifact::text(&format!("{name}.pgm.txt"), sidecar));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// energy
// ---------------------------------------------------------------------------

const ENERGY_KEYS: &[&str] = &[
    "out",
    "weight",
    "u",
    "v",
    "u0",
    "piecewise",
    "eps",
    "lambda",
    "normalization",
];

pub fn run_energy(cfg: &RunConfig) -> RunResult {
    cfg.check_keys(ENERGY_KEYS).map_err(cfg_fail)?;
    let w = read_weight(cfg)?;
    let report = if cfg.get("piecewise").is_some() {
        let p = io::read_piecewise_file(&cfg.path("piecewise").map_err(cfg_fail)?)
            .map_err(core_fail)?;
        ms_energy(&p, &w).map_err(core_fail)?
    } else {
        let u = read_field(&cfg.path("u").map_err(cfg_fail)?)?;
        let v = match cfg.path_opt("v").map_err(cfg_fail)? {
            Some(p) => read_field(&p)?,
            None => ScalarField::constant(u.grid().clone(), 1.0).map_err(core_fail)?,
        };
        let eps = cfg.f64_required("eps").map_err(cfg_fail)?;
        let lambda = cfg.f64_or("lambda", 0.0).map_err(cfg_fail)?;
        let u0 = match cfg.path_opt("u0").map_err(cfg_fail)? {
            Some(p) => Some(read_field(&p)?),
            None => None,
        };
        at_energy(&u, &v, &w, eps, normalization(cfg)?, lambda, u0.as_ref()).map_err(core_fail)?
    };
    Ok(vec![Artifact::text("energy.csv", energy_csv(&[report]))])
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

const SOLVE_KEYS: &[&str] = &[
    "out",
    "u0",
    "weight",
    "eps",
    "lambda",
    "normalization",
    "v_floor",
    "tol_linear",
    "tol_energy",
    "max_outer",
    "max_linear",
    "relocation",
];

pub fn run_solve(cfg: &RunConfig) -> RunResult {
    cfg.check_keys(SOLVE_KEYS).map_err(cfg_fail)?;
    let u0 = read_field(&cfg.path("u0").map_err(cfg_fail)?)?;
    let w = read_weight(cfg)?;
    let eps = cfg.f64_required("eps").map_err(cfg_fail)?;
    let sc = solver_config(cfg, eps)?;
    let res = alternate(&u0, &w, &sc).map_err(core_fail)?;
    let mut artifacts = Vec::new();
    artifacts.extend(field_artifacts("u", &res.u)?);
    artifacts.extend(field_artifacts("v", &res.v)?);
    let mut trace = format!("step,{}\n", EnergyReport::csv_header());
    trace.push_str(&format!("0,{}\n", res.initial.csv_row()));
    for (i, r) in res.trace.iter().enumerate() {
        trace.push_str(&format!("{},{}\n", i + 1, r.csv_row()));
    }
    artifacts.push(Artifact::text("trace.csv", trace));
    artifacts.push(Artifact::text(
        "solve_summary.txt",
        format!(
            "converged {}\nouter_iterations {}\nfinal_total {}\n",
            res.converged,
            res.iterations,
            res.trace
                .last()
                .map(|r| r.total)
                .unwrap_or(res.initial.total)
        ),
    ));
    Ok(artifacts)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

const SWEEP_KEYS: &[&str] = &[
    "out",
    "scenario",
    "piecewise",
    "weight",
    "lambda",
    "eta",
    "eps_list",
    "grid_divisor",
    "normalization",
];

pub fn run_sweep(cfg: &RunConfig) -> RunResult {
    cfg.check_keys(SWEEP_KEYS).map_err(cfg_fail)?;
    let piecewise =
        io::read_piecewise_file(&cfg.path("piecewise").map_err(cfg_fail)?).map_err(core_fail)?;
    let weight = read_weight(cfg)?;
    let scenario = match cfg.get("scenario").unwrap_or("solve") {
        "solve" => Scenario::Solve {
            u0: piecewise,
            weight,
            lambda: cfg.f64_or("lambda", 1.0).map_err(cfg_fail)?,
        },
        "recovery" => Scenario::Recovery {
            u: piecewise,
            weight,
            eta: cfg.f64_or("eta", 0.1).map_err(cfg_fail)?,
        },
        other => {
            return Err(fail(
                2,
                format!("config key `scenario` has unknown value `{other}` (solve|recovery)"),
            ))
        }
    };
    let mut plan = SweepPlan::new(scenario);
    plan.normalization = normalization(cfg)?;
    if let Some(list) = cfg.f64_list("eps_list").map_err(cfg_fail)? {
        plan.epsilons = list;
    }
    plan.grid_divisor = cfg.f64_or("grid_divisor", 20.0).map_err(cfg_fail)?;
    match gamma_sweep(&plan) {
        Ok(report) => Ok(vec![
            Artifact::text("sweep.csv", report.to_csv()),
            Artifact::text("verdict.txt", report.verdict_text()),
        ]),
        Err(abort) => Err(Failure {
            code: code_of(&abort.cause),
            message: abort.to_string(),
            partial: vec![
                Artifact::text("sweep.csv", abort.partial.to_csv()),
                Artifact::text("verdict.txt", abort.partial.verdict_text()),
            ],
        }),
    }
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

const RECOVER_KEYS: &[&str] = &[
    "out",
    "piecewise",
    "weight",
    "jumps",
    "eps",
    "eta",
    "grid_divisor",
    "domain",
    "cells",
];

pub fn run_recover(cfg: &RunConfig) -> RunResult {
    cfg.check_keys(RECOVER_KEYS).map_err(cfg_fail)?;
    let eps = cfg.f64_required("eps").map_err(cfg_fail)?;
    match (cfg.get("piecewise"), cfg.get("jumps")) {
        (Some(_), None) => {
            let u = io::read_piecewise_file(&cfg.path("piecewise").map_err(cfg_fail)?)
                .map_err(core_fail)?;
            let w = read_weight(cfg)?;
            let divisor = cfg.f64_or("grid_divisor", 20.0).map_err(cfg_fail)?;
            let (lo, hi) = (u.domain()[0].0, u.domain()[0].1);
            let cells = (((hi - lo) / (eps / divisor)).round() as usize).max(2);
            let grid = Grid::line(lo, hi, cells).map_err(core_fail)?;
            let profile =
                optimal_profile(cfg.f64_or("eta", 0.1).map_err(cfg_fail)?).map_err(core_fail)?;
            let pair = recovery_pair_jump(&u, &w, &grid, eps, &profile).map_err(core_fail)?;
            let report = at_energy(
                &pair.u,
                &pair.v,
                &w,
                eps,
                Normalization::Symmetric,
                0.0,
                None,
            )
            .map_err(core_fail)?;
            let mut artifacts = Vec::new();
            artifacts.extend(field_artifacts("u_eps", &pair.u)?);
            artifacts.extend(field_artifacts("v_eps", &pair.v)?);
            artifacts.push(Artifact::text("pair_energy.csv", energy_csv(&[report])));
            Ok(artifacts)
        }
        (None, Some(_)) => {
            let js =
                io::read_jumpset_file(&cfg.path("jumps").map_err(cfg_fail)?).map_err(core_fail)?;
            let domain = cfg
                .f64_list("domain")
                .map_err(cfg_fail)?
                .ok_or_else(|| fail(2, "missing required config key `domain`".into()))?;
            let cells = cfg
                .f64_list("cells")
                .map_err(cfg_fail)?
                .ok_or_else(|| fail(2, "missing required config key `cells`".into()))?;
            let grid = match (domain.len(), cells.len()) {
                (2, 1) => Grid::line(domain[0], domain[1], cells[0] as usize),
                (4, 2) => Grid::rect(
                    (domain[0], domain[1], cells[0] as usize),
                    (domain[2], domain[3], cells[1] as usize),
                ),
                _ => {
                    return Err(fail(
                        2,
                        "config keys `domain`/`cells` must describe a 1D or 2D grid".into(),
                    ))
                }
            }
            .map_err(core_fail)?;
            let dist = distance_field(&js, &grid).map_err(core_fail)?;
            let v = recovery_v_multi_d(&js, &grid, eps).map_err(core_fail)?;
            let mut artifacts = Vec::new();
            artifacts.extend(field_artifacts("distance", &dist)?);
            artifacts.extend(field_artifacts("v_eps", &v)?);
            Ok(artifacts)
        }
        (Some(_), Some(_)) => Err(fail(
            2,
            "config keys `piecewise` and `jumps` are mutually exclusive".into(),
        )),
        (None, None) => Err(fail(
            2,
            "recover needs either `piecewise` (1D pair) or `jumps` (profile field)".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// bilevel
// ---------------------------------------------------------------------------

const BILEVEL_KEYS: &[&str] = &[
    "out",
    "u0",
    "ug",
    "alpha_grid",
    "partitions",
    "eps",
    "lambda",
    "normalization",
    "tol_linear",
    "tol_energy",
    "max_outer",
    "max_linear",
    "relocation",
];

pub fn run_bilevel(cfg: &RunConfig) -> RunResult {
    cfg.check_keys(BILEVEL_KEYS).map_err(cfg_fail)?;
    let u0 = read_field(&cfg.path("u0").map_err(cfg_fail)?)?;
    let ug = read_field(&cfg.path("ug").map_err(cfg_fail)?)?;
    let alphas = match cfg.f64_list("alpha_grid").map_err(cfg_fail)? {
        Some(list) => list,
        None => bilevel::default_alpha_grid(),
    };
    let ks = cfg
        .u32_list("partitions")
        .map_err(cfg_fail)?
        .unwrap_or_else(|| vec![0, 1]);
    if ks.is_empty() {
        return Err(fail(
            2,
            "config key `partitions` lists no candidates".into(),
        ));
    }
    let domain = u0.grid().bounds();
    let mut candidates = Vec::new();
    for k in ks {
        candidates.push(PartitionSpec::dyadic(&domain, k).map_err(core_fail)?);
    }
    let eps = cfg.f64_or("eps", 0.02).map_err(cfg_fail)?;
    let mut sc = solver_config(cfg, eps)?;
    if cfg.get("relocation").is_none() {
        // fidelity-dominated subproblems; restarts add nothing measurable
        sc.relocation = RelocationPolicy::Off;
    }
    let result = bilevel::train(&u0, &ug, &candidates, &alphas, &sc).map_err(core_fail)?;
    let best = result.best();
    let mut artifacts = vec![
        Artifact::text("scores.csv", result.score_table_csv()),
        Artifact::text("weight_best.txt", io::weight_to_text(&best.weight)),
        Artifact::text(
            "bilevel_summary.txt",
            format!(
                "chosen_k {}\nchosen_score {}\ncube_alphas {}\n",
                best.spec.k,
                best.score,
                best.cubes
                    .iter()
                    .map(|c| c.alpha.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            ),
        ),
    ];
    artifacts.extend(field_artifacts("u_best", &best.u)?);
    Ok(artifacts)
}

pub fn run_command(command: &str, cfg: &RunConfig) -> RunResult {
    match command {
        "energy" => run_energy(cfg),
        "solve" => run_solve(cfg),
        "sweep" => run_sweep(cfg),
        "recover" => run_recover(cfg),
        "bilevel" => run_bilevel(cfg),
        other => Err(fail(2, format!("unknown command `{other}`"))),
    }
}
