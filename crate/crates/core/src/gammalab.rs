//! Verification harness for the scale limit: eps sweeps with the grid tied
//! to eps, a localized jump-cost probe standing in for the sharp jump
//! energy, and comparison against the sharp lower-trace reference.

use crate::energy::{at_energy, ms_energy, phase_contributions, EnergyReport, Normalization};
use crate::error::{CoreError, Result};
use crate::fields::{sample, Grid, JumpSet, PiecewiseField, ScalarField};
use crate::parallel::map_indexed;
use crate::profiles::{optimal_profile, recovery_pair_jump};
use crate::solver::{alternate, SolverConfig};
use crate::sum::pairwise_sum;
use crate::weights::WeightField;

/// What a sweep evaluates at each eps.
#[derive(Debug, Clone)]
pub enum Scenario {
    /// Full alternating solve from sampled data.
    Solve {
        u0: PiecewiseField,
        weight: WeightField,
        lambda: f64,
    },
    /// Fixed recovery pair built by the explicit construction.
    Recovery {
        u: PiecewiseField,
        weight: WeightField,
        eta: f64,
    },
}

impl Scenario {
    fn weight(&self) -> &WeightField {
        match self {
            Scenario::Solve { weight, .. } => weight,
            Scenario::Recovery { weight, .. } => weight,
        }
    }

    fn reference_field(&self) -> &PiecewiseField {
        match self {
            Scenario::Solve { u0, .. } => u0,
            Scenario::Recovery { u, .. } => u,
        }
    }
}

/// Sweep description: strictly decreasing eps values, the grid rule
/// h = eps / grid_divisor, and the probe radius rho(eps) = sqrt(eps) +
/// 2 eps^2 covering the transition zone.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub epsilons: Vec<f64>,
    pub grid_divisor: f64,
    pub normalization: Normalization,
    pub scenario: Scenario,
}

impl SweepPlan {
    /// Geometric halving from 0.1, five steps.
    pub fn default_epsilons() -> Vec<f64> {
        (0..5).map(|k| 0.1 / (1u32 << k) as f64).collect()
    }

    pub fn probe_radius(eps: f64) -> f64 {
        eps.sqrt() + 2.0 * eps * eps
    }

    pub fn new(scenario: Scenario) -> SweepPlan {
        SweepPlan {
            epsilons: SweepPlan::default_epsilons(),
            grid_divisor: 20.0,
            normalization: Normalization::default(),
            scenario,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(CoreError::Validation("sweep has no eps values".into()));
        }
        for w in self.epsilons.windows(2) {
            if !(w[1] < w[0]) {
                return Err(CoreError::Validation(
                    "eps sequence must be strictly decreasing".into(),
                ));
            }
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(CoreError::Validation("eps values must be positive".into()));
        }
        if !(self.grid_divisor >= 1.0) {
            return Err(CoreError::Validation(
                "grid divisor must be at least 1".into(),
            ));
        }
        Ok(())
    }

    fn grid_for(&self, eps: f64) -> Result<Grid> {
        let h = eps / self.grid_divisor;
        let domain = self.scenario.reference_field().domain();
        let mut axes = Vec::new();
        for &(lo, hi) in domain {
            let cells = (((hi - lo) / h).round() as usize).max(2);
            axes.push(crate::fields::Axis { lo, hi, cells });
        }
        Grid::new(axes)
    }
}

/// One sweep step: the energy report of the state reached at this eps and
/// the localized jump-cost probe.
#[derive(Debug, Clone)]
pub struct SweepStep {
    pub eps: f64,
    pub cells: usize,
    pub report: EnergyReport,
    pub probe: f64,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub steps: Vec<SweepStep>,
    pub sharp_reference: EnergyReport,
    pub verdicts: Vec<Verdict>,
}

impl SweepReport {
    pub fn csv_header() -> &'static str {
        "eps,cells,grad,phase,jump,fidelity,total,probe,normalization"
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::csv_header());
        out.push('\n');
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                s.eps,
                s.cells,
                s.report.grad_term,
                s.report.phase_term,
                s.report.jump_term,
                s.report.fidelity,
                s.report.total,
                s.probe,
                s.report.normalization.map(|n| n.tag()).unwrap_or_default(),
            ));
        }
        out
    }

    pub fn verdict_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "sharp_reference_total = {}\nsharp_reference_jump = {}\n",
            self.sharp_reference.total, self.sharp_reference.jump_term
        ));
        for v in &self.verdicts {
            out.push_str(&format!(
                "{} {}: {}\n",
                if v.pass { "PASS" } else { "FAIL" },
                v.name,
                v.detail
            ));
        }
        out
    }
}

/// Sweep abort: the failing cause plus the steps that did complete.
#[derive(Debug)]
pub struct SweepAbort {
    pub partial: SweepReport,
    pub cause: CoreError,
}

impl std::fmt::Display for SweepAbort {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "sweep aborted after {} steps: {}",
            self.partial.steps.len(),
            self.cause
        )
    }
}

impl std::error::Error for SweepAbort {}

/// Transition energy restricted to cells within distance `rho` of the jump
/// set: the discrete stand-in for the sharp lower-trace jump cost.
pub fn jump_cost_probe(
    v: &ScalarField,
    w: &WeightField,
    eps: f64,
    norm: Normalization,
    jumps: &JumpSet,
    rho: f64,
) -> Result<f64> {
    if rho < 2.0 * v.grid().max_spacing() {
        return Err(CoreError::Resolution(format!(
            "probe radius {rho} is below two grid spacings {}",
            2.0 * v.grid().max_spacing()
        )));
    }
    let contributions = phase_contributions(v, w, eps, norm)?;
    let g = v.grid();
    let masked: Vec<f64> = contributions
        .iter()
        .enumerate()
        .map(|(idx, &c)| {
            let center = g.center(idx);
            let p = &center[..g.dim()];
            if jumps.distance(p) <= rho {
                c
            } else {
                0.0
            }
        })
        .collect();
    Ok(pairwise_sum(&masked))
}

fn run_step(plan: &SweepPlan, eps: f64) -> Result<SweepStep> {
    let grid = plan.grid_for(eps)?;
    let jumps = plan.scenario.reference_field().jump_set();
    let rho = SweepPlan::probe_radius(eps);
    let (report, v) = match &plan.scenario {
        Scenario::Solve { u0, weight, lambda } => {
            let u0s = sample(u0, &grid)?;
            let mut cfg = SolverConfig::with_eps(eps);
            cfg.normalization = plan.normalization;
            cfg.lambda = *lambda;
            let res = alternate(&u0s, weight, &cfg)?;
            let report = res
                .trace
                .last()
                .cloned()
                .unwrap_or_else(|| res.initial.clone());
            (report, res.v)
        }
        Scenario::Recovery { u, weight, eta } => {
            let profile = optimal_profile(*eta)?;
            let pair = recovery_pair_jump(u, weight, &grid, eps, &profile)?;
            let report = at_energy(&pair.u, &pair.v, weight, eps, plan.normalization, 0.0, None)?;
            (report, pair.v)
        }
    };
    let probe = jump_cost_probe(
        &v,
        plan.scenario.weight(),
        eps,
        plan.normalization,
        &jumps,
        rho,
    )?;
    Ok(SweepStep {
        eps,
        cells: grid.total_cells(),
        report,
        probe,
    })
}

fn build_verdicts(plan: &SweepPlan, steps: &[SweepStep], sharp: &EnergyReport) -> Vec<Verdict> {
    let mut verdicts = Vec::new();
    let le_phase = steps.iter().all(|s| s.probe <= s.report.phase_term + 1e-12);
    verdicts.push(Verdict {
        name: "probe_le_phase".into(),
        pass: le_phase,
        detail: "probe never exceeds the full transition term".into(),
    });
    let probes: Vec<f64> = steps.iter().map(|s| s.probe).collect();
    match &plan.scenario {
        Scenario::Solve { .. } => {
            // trend measured as convergence toward the sharp lower-trace
            // jump cost (the probe can approach it from either side)
            let devs: Vec<f64> = probes.iter().map(|p| (p - sharp.jump_term).abs()).collect();
            let deltas = devs.windows(2).filter(|w| w[1] <= w[0] + 1e-12).count();
            let needed = devs.len().saturating_sub(2);
            verdicts.push(Verdict {
                name: "probe_trend".into(),
                pass: deltas >= needed,
                detail: format!(
                    "{deltas}/{} steps shrink |probe - sharp jump| (one wobble allowed), probes {:?}, reference {}",
                    devs.len().saturating_sub(1),
                    probes,
                    sharp.jump_term
                ),
            });
        }
        Scenario::Recovery { eta, .. } => {
            // transition budget plus the plug-zone slack used throughout
            let budget = (1.0 + eta) * sharp.jump_term + 0.05;
            let pass = probes.iter().all(|&p| p <= budget);
            verdicts.push(Verdict {
                name: "probe_budget".into(),
                pass,
                detail: format!("probes {:?} within budget {budget}", probes),
            });
        }
    }
    verdicts
}

/// Runs the sweep. Steps are independent and run on the worker pool; a
/// failing step aborts the sweep but reports the completed steps.
pub fn gamma_sweep(plan: &SweepPlan) -> std::result::Result<SweepReport, Box<SweepAbort>> {
    if let Err(e) = plan.validate() {
        return Err(Box::new(SweepAbort {
            partial: SweepReport {
                steps: vec![],
                sharp_reference: EnergyReport {
                    grad_term: 0.0,
                    phase_term: 0.0,
                    jump_term: 0.0,
                    fidelity: 0.0,
                    epsilon: None,
                    normalization: None,
                    total: 0.0,
                },
                verdicts: vec![],
            },
            cause: e,
        }));
    }
    let sharp = match ms_energy(plan.scenario.reference_field(), plan.scenario.weight()) {
        Ok(r) => r,
        Err(e) => {
            return Err(Box::new(SweepAbort {
                partial: SweepReport {
                    steps: vec![],
                    sharp_reference: EnergyReport {
                        grad_term: 0.0,
                        phase_term: 0.0,
                        jump_term: 0.0,
                        fidelity: 0.0,
                        epsilon: None,
                        normalization: None,
                        total: 0.0,
                    },
                    verdicts: vec![],
                },
                cause: e,
            }))
        }
    };
    let results = map_indexed(plan.epsilons.len(), |i| run_step(plan, plan.epsilons[i]));
    let mut steps = Vec::new();
    let mut cause = None;
    for r in results {
        match r {
            Ok(s) if cause.is_none() => steps.push(s),
            Ok(_) => {}
            Err(e) if cause.is_none() => cause = Some(e),
            Err(_) => {}
        }
    }
    let verdicts = build_verdicts(plan, &steps, &sharp);
    let report = SweepReport {
        steps,
        sharp_reference: sharp,
        verdicts,
    };
    match cause {
        None => Ok(report),
        Some(c) => Err(Box::new(SweepAbort {
            partial: report,
            cause: c,
        })),
    }
}
