//! Alternating minimization of the discretized weighted phase-field energy
//! with fidelity. Each block (u with v fixed, v with u fixed) is a convex
//! quadratic solved matrix-free by Jacobi-preconditioned conjugate
//! gradients; warm starts make every half-step a descent step.
//!
//! Block-coordinate descent alone can stall in a symmetric local minimum
//! when the weight jumps across the discontinuity of the data: the
//! transition trench then straddles the weight jump instead of migrating to
//! the cheaper side. `alternate` therefore re-runs the descent from
//! deterministic trench-relocation seeds (the trench translated by the
//! recovery-construction shift to either side) and returns the lowest-energy
//! result. Set `RelocationPolicy::Off` for the plain single-start scheme.

use crate::energy::{at_energy, EnergyReport, Normalization};
use crate::error::{CoreError, Result};
use crate::fields::{gradient, Grid, ScalarField};
use crate::sum::{dot, norm2};
use crate::weights::WeightField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelocationPolicy {
    /// Plain block-coordinate descent from u = u0, v = 1.
    Off,
    /// Descent plus translated-trench restarts, lowest energy wins.
    TrenchShift,
}

/// Discretization and stopping parameters of the alternating solver.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub eps: f64,
    pub normalization: Normalization,
    /// Fidelity weight; must be positive for the u-step to be well posed.
    pub lambda: f64,
    /// Optional floor added to v^2 in the u-step only.
    pub v_floor: f64,
    /// Relative residual tolerance of the conjugate-gradient solves.
    pub tol_linear: f64,
    pub max_linear_iterations: usize,
    pub max_outer_iterations: usize,
    /// Outer stop: relative energy decrease per outer iteration below this.
    pub tol_energy: f64,
    pub relocation: RelocationPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 0.02,
            normalization: Normalization::default(),
            lambda: 1.0,
            v_floor: 0.0,
            tol_linear: 1e-8,
            max_linear_iterations: 200_000,
            max_outer_iterations: 200,
            tol_energy: 1e-7,
            relocation: RelocationPolicy::TrenchShift,
        }
    }
}

impl SolverConfig {
    pub fn with_eps(eps: f64) -> SolverConfig {
        SolverConfig {
            eps,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(CoreError::Validation(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(CoreError::Validation(format!(
                "lambda must be nonnegative, got {}",
                self.lambda
            )));
        }
        if self.v_floor < 0.0 {
            return Err(CoreError::Validation(format!(
                "v floor must be nonnegative, got {}",
                self.v_floor
            )));
        }
        if !(self.tol_linear > 0.0) || !(self.tol_energy > 0.0) {
            return Err(CoreError::Validation(
                "solver tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Output of the alternating solver. The energy trace holds one report per
/// half-step; `initial` is the energy at the starting pair.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: ScalarField,
    pub v: ScalarField,
    pub initial: EnergyReport,
    pub trace: Vec<EnergyReport>,
    pub iterations: usize,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// Matrix-free operators
// ---------------------------------------------------------------------------

struct AxisOp {
    h: f64,
    n: usize,
    lines: Vec<(usize, usize)>,
}

fn axis_ops(g: &Grid) -> Vec<AxisOp> {
    (0..g.dim())
        .map(|a| AxisOp {
            h: g.axis(a).spacing(),
            n: g.axis(a).cells,
            lines: g.lines(a),
        })
        .collect()
}

/// y += sum_axes D^T diag(m) D x for the forward-difference operator with a
/// one-sided top row.
fn add_stiffness_apply(ops: &[AxisOp], m: &[f64], x: &[f64], y: &mut [f64]) {
    for op in ops {
        let inv_h = 1.0 / op.h;
        for &(offset, stride) in &op.lines {
            for i in 0..op.n {
                let (lo, hi) = if i < op.n - 1 {
                    (i, i + 1)
                } else {
                    (op.n - 2, op.n - 1)
                };
                let ilo = offset + lo * stride;
                let ihi = offset + hi * stride;
                let cell = offset + i * stride;
                let d = (x[ihi] - x[ilo]) * inv_h;
                let q = m[cell] * d * inv_h;
                y[ihi] += q;
                y[ilo] -= q;
            }
        }
    }
}

fn add_stiffness_diag(ops: &[AxisOp], m: &[f64], diag: &mut [f64]) {
    for op in ops {
        let inv_h2 = 1.0 / (op.h * op.h);
        for &(offset, stride) in &op.lines {
            for i in 0..op.n {
                let (lo, hi) = if i < op.n - 1 {
                    (i, i + 1)
                } else {
                    (op.n - 2, op.n - 1)
                };
                let w = m[offset + i * stride] * inv_h2;
                diag[offset + hi * stride] += w;
                diag[offset + lo * stride] += w;
            }
        }
    }
}

/// Jacobi-preconditioned conjugate gradients for an SPD operator given as a
/// closure. Starts from `x0`, stops at ||r|| <= tol ||b||.
fn pcg(
    apply: &dyn Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x0: &[f64],
    tol: f64,
    cap: usize,
    context: &str,
) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = x0.to_vec();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect();
    let mut rnorm = norm2(&r);
    if rnorm <= tol * bnorm {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(&ri, &di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for it in 0..cap {
        q.iter_mut().for_each(|v| *v = 0.0);
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(CoreError::SolverDiverged {
                residual: rnorm / bnorm,
                iterations: it,
                context: format!("{context}: operator lost positive definiteness"),
            });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rnorm = norm2(&r);
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CoreError::SolverDiverged {
        residual: rnorm / bnorm,
        iterations: cap,
        context: context.to_string(),
    })
}

fn check_common_grid(fields: &[&ScalarField]) -> Result<()> {
    for pair in fields.windows(2) {
        if pair[0].grid() != pair[1].grid() {
            return Err(CoreError::Domain(
                "solver fields live on different grids".into(),
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Block solves
// ---------------------------------------------------------------------------

fn solve_u_from(
    v: &ScalarField,
    w_samples: &[f64],
    u0: &ScalarField,
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    if cfg.lambda == 0.0 {
        return Err(CoreError::Singular(
            "the u-step needs lambda > 0 for a unique minimizer".into(),
        ));
    }
    let g = u0.grid();
    let n = g.total_cells();
    let ops = axis_ops(g);
    let m: Vec<f64> = v
        .samples()
        .iter()
        .zip(w_samples)
        .map(|(&vi, &wi)| (vi * vi + cfg.v_floor) * wi)
        .collect();
    let mut diag = vec![cfg.lambda; n];
    add_stiffness_diag(&ops, &m, &mut diag);
    let b: Vec<f64> = u0.samples().iter().map(|&x| cfg.lambda * x).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..x.len() {
            y[i] += cfg.lambda * x[i];
        }
        add_stiffness_apply(&ops, &m, x, y);
    };
    let sol = pcg(
        &apply,
        &diag,
        &b,
        start,
        cfg.tol_linear,
        cfg.max_linear_iterations,
        "u-step",
    )?;
    ScalarField::new(g.clone(), sol)
}

fn solve_v_from(
    u: &ScalarField,
    w_samples: &[f64],
    start: &[f64],
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    let g = u.grid();
    let n = g.total_cells();
    let ops = axis_ops(g);
    let (a, b_coef) = cfg.normalization.coefficients();
    let grads = gradient(u);
    let mut gsq = vec![0.0; n];
    for comp in &grads {
        for (gi, &ci) in gsq.iter_mut().zip(comp.samples()) {
            *gi += ci * ci;
        }
    }
    // A = diag(g w) + a eps D^T diag(w) D + (b/eps) diag(w)
    let aw: Vec<f64> = w_samples.iter().map(|&wi| a * cfg.eps * wi).collect();
    let mut diag: Vec<f64> = gsq
        .iter()
        .zip(w_samples)
        .map(|(&gi, &wi)| gi * wi + b_coef / cfg.eps * wi)
        .collect();
    add_stiffness_diag(&ops, &aw, &mut diag);
    let rhs: Vec<f64> = w_samples.iter().map(|&wi| b_coef / cfg.eps * wi).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for i in 0..x.len() {
            y[i] += (gsq[i] * w_samples[i] + b_coef / cfg.eps * w_samples[i]) * x[i];
        }
        add_stiffness_apply(&ops, &aw, x, y);
    };
    let mut sol = pcg(
        &apply,
        &diag,
        &rhs,
        start,
        cfg.tol_linear,
        cfg.max_linear_iterations,
        "v-step",
    )?;
    // no-op in exact arithmetic: the unconstrained minimizer lies in [0, 1]
    for vi in sol.iter_mut() {
        *vi = vi.clamp(0.0, 1.0);
    }
    ScalarField::new(g.clone(), sol)
}

/// Minimizer of the u-block: sum (v^2 + k) |grad u|^2 w h^N +
/// lambda sum (u - u0)^2 h^N, solved to the configured tolerance.
pub fn solve_u(
    v: &ScalarField,
    w: &WeightField,
    u0: &ScalarField,
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    cfg.validate()?;
    check_common_grid(&[v, u0])?;
    let ws = w.sample_on(u0.grid())?;
    solve_u_from(v, ws.samples(), u0, u0.samples(), cfg)
}

/// Minimizer of the v-block: sum v^2 |grad u|^2 w h^N + transition term,
/// clamped to [0, 1] afterwards.
pub fn solve_v(u: &ScalarField, w: &WeightField, cfg: &SolverConfig) -> Result<ScalarField> {
    cfg.validate()?;
    let ws = w.sample_on(u.grid())?;
    let ones = vec![1.0; u.grid().total_cells()];
    solve_v_from(u, ws.samples(), &ones, cfg)
}

// ---------------------------------------------------------------------------
// Alternation
// ---------------------------------------------------------------------------

struct DescentRun {
    u: ScalarField,
    v: ScalarField,
    initial: EnergyReport,
    trace: Vec<EnergyReport>,
    iterations: usize,
    converged: bool,
}

fn final_total(run: &DescentRun) -> f64 {
    run.trace
        .last()
        .map(|r| r.total)
        .unwrap_or(run.initial.total)
}

/// Block-coordinate descent from the given pair. When `u_first` is set the
/// run opens with a u-step (used by the relocation restarts, whose seed is a
/// v field).
fn descend(
    u_init: &ScalarField,
    v_init: &ScalarField,
    w: &WeightField,
    w_samples: &[f64],
    u0: &ScalarField,
    cfg: &SolverConfig,
    u_first: bool,
) -> Result<DescentRun> {
    let mut u = u_init.clone();
    let mut v = v_init.clone();
    let initial = at_energy(&u, &v, w, cfg.eps, cfg.normalization, cfg.lambda, Some(u0))?;
    let mut trace = Vec::new();
    if u_first {
        u = solve_u_from(&v, w_samples, u0, u.samples(), cfg)?;
        trace.push(at_energy(
            &u,
            &v,
            w,
            cfg.eps,
            cfg.normalization,
            cfg.lambda,
            Some(u0),
        )?);
    }
    let mut prev_outer = initial.total;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..cfg.max_outer_iterations {
        v = solve_v_from(&u, w_samples, v.samples(), cfg)?;
        trace.push(at_energy(
            &u,
            &v,
            w,
            cfg.eps,
            cfg.normalization,
            cfg.lambda,
            Some(u0),
        )?);
        u = solve_u_from(&v, w_samples, u0, u.samples(), cfg)?;
        let rep = at_energy(&u, &v, w, cfg.eps, cfg.normalization, cfg.lambda, Some(u0))?;
        let total = rep.total;
        trace.push(rep);
        iterations += 1;
        if (prev_outer - total).abs() <= cfg.tol_energy * prev_outer.abs().max(1.0) {
            converged = true;
            break;
        }
        prev_outer = total;
    }
    Ok(DescentRun {
        u,
        v,
        initial,
        trace,
        iterations,
        converged,
    })
}

/// Connected components of {v < 0.5} as index bounding boxes
/// (ix_lo..=ix_hi, iy_lo..=iy_hi), deepest trench first.
fn trench_components(v: &ScalarField) -> Vec<(usize, usize, usize, usize, f64)> {
    let g = v.grid();
    let (nx, ny) = match g.dim() {
        1 => (g.axis(0).cells, 1),
        _ => (g.axis(0).cells, g.axis(1).cells),
    };
    let mask: Vec<bool> = v.samples().iter().map(|&x| x < 0.5).collect();
    let mut seen = vec![false; mask.len()];
    let mut comps = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (nx, 0usize, ny, 0usize);
        let mut depth = f64::INFINITY;
        while let Some(idx) = stack.pop() {
            let (ix, iy) = (idx % nx, idx / nx);
            xlo = xlo.min(ix);
            xhi = xhi.max(ix);
            ylo = ylo.min(iy);
            yhi = yhi.max(iy);
            depth = depth.min(v.samples()[idx]);
            let mut push = |jx: isize, jy: isize| {
                if jx >= 0 && (jx as usize) < nx && jy >= 0 && (jy as usize) < ny {
                    let j = jy as usize * nx + jx as usize;
                    if mask[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            };
            push(ix as isize - 1, iy as isize);
            push(ix as isize + 1, iy as isize);
            push(ix as isize, iy as isize - 1);
            push(ix as isize, iy as isize + 1);
        }
        comps.push((xlo, xhi, ylo, yhi, depth));
    }
    comps.sort_by(|a, b| a.4.partial_cmp(&b.4).unwrap());
    comps
}

/// Proposal distance of the trench relocation restarts: the shift of the
/// reflected recovery construction, 2 eps^2 + eps T with T = 2 ln 20.
fn relocation_shift(eps: f64) -> f64 {
    2.0 * eps * eps + eps * 2.0 * 20.0_f64.ln()
}

const MAX_RELOCATION_SEEDS: usize = 8;

/// Translated-trench seeds derived from a converged v field.
fn relocation_seeds(v: &ScalarField, eps: f64) -> Vec<ScalarField> {
    let g = v.grid();
    let (nx, ny) = match g.dim() {
        1 => (g.axis(0).cells, 1),
        _ => (g.axis(0).cells, g.axis(1).cells),
    };
    let comps = trench_components(v);
    let mut seeds = Vec::new();
    for (xlo, xhi, ylo, yhi, _) in comps {
        let mut axes: Vec<(usize, usize)> = Vec::new(); // (axis, shift cells)
        for axis in 0..g.dim() {
            let k = (relocation_shift(eps) / g.axis(axis).spacing()).round() as usize;
            if k > 0 {
                axes.push((axis, k));
            }
        }
        for (axis, k) in axes {
            let margin = (5.0 * eps / g.axis(axis).spacing()).round() as usize;
            let (mut bx_lo, mut bx_hi, mut by_lo, mut by_hi) = (xlo, xhi, ylo, yhi);
            if axis == 0 {
                bx_lo = bx_lo.saturating_sub(margin);
                bx_hi = (bx_hi + margin).min(nx - 1);
            } else {
                by_lo = by_lo.saturating_sub(margin);
                by_hi = (by_hi + margin).min(ny - 1);
            }
            for sign in [-1isize, 1isize] {
                if seeds.len() >= MAX_RELOCATION_SEEDS {
                    return seeds;
                }
                let shift = sign * k as isize;
                // destination window must stay inside the grid
                let fits = if axis == 0 {
                    bx_lo as isize + shift >= 0 && bx_hi as isize + shift < nx as isize
                } else {
                    by_lo as isize + shift >= 0 && by_hi as isize + shift < ny as isize
                };
                if !fits {
                    continue;
                }
                let mut seed = v.samples().to_vec();
                for iy in by_lo..=by_hi {
                    for ix in bx_lo..=bx_hi {
                        seed[iy * nx + ix] = 1.0;
                    }
                }
                for iy in by_lo..=by_hi {
                    for ix in bx_lo..=bx_hi {
                        let (jx, jy) = if axis == 0 {
                            ((ix as isize + shift) as usize, iy)
                        } else {
                            (ix, (iy as isize + shift) as usize)
                        };
                        let dst = jy * nx + jx;
                        let src = v.samples()[iy * nx + ix];
                        if src < seed[dst] {
                            seed[dst] = src;
                        }
                    }
                }
                seeds.push(ScalarField::new(g.clone(), seed).expect("seed stays finite"));
            }
        }
    }
    seeds
}

/// Alternating minimization: v-step then u-step from u = u0, v = 1 until the
/// relative energy decrease falls below the outer tolerance, followed by
/// trench-relocation restarts when enabled. The returned trace is the
/// winning run's and is nonincreasing half-step by half-step.
pub fn alternate(u0: &ScalarField, w: &WeightField, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let ws = w.sample_on(u0.grid())?;
    let ones = ScalarField::constant(u0.grid().clone(), 1.0)?;
    let mut best = descend(u0, &ones, w, ws.samples(), u0, cfg, false)?;
    if cfg.relocation == RelocationPolicy::TrenchShift {
        for seed in relocation_seeds(&best.v, cfg.eps) {
            let run = descend(u0, &seed, w, ws.samples(), u0, cfg, true)?;
            if final_total(&run) < final_total(&best) {
                best = run;
            }
        }
    }
    Ok(SolveResult {
        u: best.u,
        v: best.v,
        initial: best.initial,
        trace: best.trace,
        iterations: best.iterations,
        converged: best.converged,
    })
}
