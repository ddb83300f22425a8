//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured quantities. Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the pass lines of succeeding criteria).

mod common;

use common::{dense_argmin, field_from, max_abs_diff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use wams_core::bilevel::{scheme_b, train, PartitionSpec};
use wams_core::energy::{
    at_energy, hausdorff_interval, ms_energy, slicing_lower_bound_check, Normalization,
};
use wams_core::fields::{sample, Grid, JumpSet, PiecewiseField, ScalarField, Segment};
use wams_core::gammalab::{jump_cost_probe, SweepPlan};
use wams_core::profiles::{optimal_profile, recovery_pair_jump, tilde_v};
use wams_core::solver::{alternate, solve_u, solve_v, RelocationPolicy, SolverConfig};
use wams_core::weights::{build_partition_weight, WeightBox, WeightField};

fn step_grid(eps: f64) -> Grid {
    let h = eps / 20.0;
    let n = (2.0 / h).round() as usize;
    Grid::line(-1.0, 1.0, n).unwrap()
}

fn unit_step() -> PiecewiseField {
    PiecewiseField::step_1d((-1.0, 1.0), 0.0, 0.0, 1.0).unwrap()
}

/// Criterion 1: unit jump cost, unweighted. Fixed unit step, v-only
/// minimization at eps in {0.04, 0.02, 0.01}, h = eps/20. The probe must be
/// within 10% of 1 at the final eps and converge to the unit cost step by
/// step (the raw probe approaches 1 from below under this discretization,
/// so convergence is asserted on |probe - 1|).
#[test]
fn criterion_01_unit_jump_cost_unweighted() {
    let w = WeightField::constant_1d((-1.0, 1.0), 1.0).unwrap();
    let js = JumpSet::points(vec![0.0]).unwrap();
    let mut probes = Vec::new();
    for &eps in &[0.04, 0.02, 0.01] {
        let g = step_grid(eps);
        let u = sample(&unit_step(), &g).unwrap();
        let mut cfg = SolverConfig::with_eps(eps);
        cfg.normalization = Normalization::Symmetric;
        let v = solve_v(&u, &w, &cfg).unwrap();
        let rho = SweepPlan::probe_radius(eps);
        let p = jump_cost_probe(&v, &w, eps, Normalization::Symmetric, &js, rho).unwrap();
        probes.push(p);
    }
    assert!(
        (probes[2] - 1.0).abs() <= 0.10,
        "final probe {} not within 10% of 1",
        probes[2]
    );
    for k in 0..2 {
        assert!(
            (probes[k + 1] - 1.0).abs() < (probes[k] - 1.0).abs(),
            "probe deviation did not shrink: {probes:?}"
        );
    }
    println!(
        "[PASS] criterion 1: unit jump cost, probes {:?} -> 1 (|probe-1| {:.2e} -> {:.2e} -> {:.2e})",
        probes,
        (probes[0] - 1.0).abs(),
        (probes[1] - 1.0).abs(),
        (probes[2] - 1.0).abs()
    );
}

/// Criterion 2: the lower trace is selected at a weight jump. Full
/// alternating solve with omega = (1, 3), lambda = 10: the final probe must
/// drop below 1.5 (strictly under the mean trace 2) and below the previous
/// step's probe; the recovery-pair oracle at the same eps stays within
/// 1.1 * omega_minus + 0.05.
#[test]
fn criterion_02_lower_trace_selection() {
    let w = WeightField::step_1d((-1.0, 1.0), 0.0, 1.0, 3.0).unwrap();
    let js = JumpSet::points(vec![0.0]).unwrap();
    let step = unit_step();
    let mut probes = Vec::new();
    for &eps in &[0.04, 0.02, 0.01] {
        let g = step_grid(eps);
        let u0 = sample(&step, &g).unwrap();
        let mut cfg = SolverConfig::with_eps(eps);
        cfg.normalization = Normalization::Symmetric;
        cfg.lambda = 10.0;
        let res = alternate(&u0, &w, &cfg).unwrap();
        let rho = SweepPlan::probe_radius(eps);
        let p = jump_cost_probe(&res.v, &w, eps, Normalization::Symmetric, &js, rho).unwrap();
        probes.push(p);
    }
    assert!(probes[2] < 1.5, "final probe {} not below 1.5", probes[2]);
    assert!(
        probes[2] < probes[1],
        "final probe {} not below previous {}",
        probes[2],
        probes[1]
    );
    // recovery-pair oracle at the final eps
    let eps = 0.01;
    let g = step_grid(eps);
    let profile = optimal_profile(0.1).unwrap();
    let pair = recovery_pair_jump(&step, &w, &g, eps, &profile).unwrap();
    let rho = SweepPlan::probe_radius(eps);
    let oracle = jump_cost_probe(&pair.v, &w, eps, Normalization::Symmetric, &js, rho).unwrap();
    assert!(
        oracle <= 1.1 * 1.0 + 0.05,
        "recovery oracle probe {oracle} beyond 1.1 * omega_minus + 0.05"
    );
    println!(
        "[PASS] criterion 2: lower-trace selection, solver probes {:?}, recovery oracle {:.4}",
        probes, oracle
    );
}

/// Criterion 3: the multi-D profile solves its defining ODE to 1e-8
/// (five-point finite-difference residual at 100 interior samples) and hits
/// the breakpoint values to 1e-12.
#[test]
fn criterion_03_multi_d_profile_exactness() {
    let mut worst = 0.0f64;
    for &eps in &[1e-2f64, 1e-3] {
        let inner = eps * eps;
        let span = eps.sqrt();
        let hfd = eps / 200.0;
        for i in 0..100 {
            let t = inner + (i as f64 + 1.0) / 101.0 * span;
            let d = (-tilde_v(eps, t + 2.0 * hfd).unwrap() + 8.0 * tilde_v(eps, t + hfd).unwrap()
                - 8.0 * tilde_v(eps, t - hfd).unwrap()
                + tilde_v(eps, t - 2.0 * hfd).unwrap())
                / (12.0 * hfd);
            let rhs = (1.0 - tilde_v(eps, t).unwrap()) / (2.0 * eps);
            worst = worst.max((d - rhs).abs());
        }
        assert!(
            worst <= 1e-8,
            "ODE residual {worst} beyond 1e-8 at eps {eps}"
        );
        assert_eq!(tilde_v(eps, inner).unwrap(), 0.0);
        let plateau = 1.0 - (-1.0 / (2.0 * eps.sqrt())).exp();
        assert!((tilde_v(eps, span + inner).unwrap() - plateau).abs() <= 1e-12);
        assert!((tilde_v(eps, 1.0).unwrap() - plateau).abs() <= 1e-12);
    }
    println!("[PASS] criterion 3: tilde_v ODE residual {worst:.2e} <= 1e-8, breakpoints exact");
}

/// Criterion 4: transition profile budget, checked by an adaptive Simpson
/// oracle built in this test (independent of the profile's own energy
/// routine).
#[test]
fn criterion_04_profile_budget() {
    fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
        (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi))
    }
    fn adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (lo + hi);
        let l = simpson(f, lo, mid);
        let r = simpson(f, mid, hi);
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            return l + r + (l + r - whole) / 15.0;
        }
        adaptive(f, lo, mid, l, 0.5 * tol, depth - 1)
            + adaptive(f, mid, hi, r, 0.5 * tol, depth - 1)
    }
    let mut budgets = Vec::new();
    for &eta in &[0.5, 0.1, 0.02] {
        let p = optimal_profile(eta).unwrap();
        let f = |t: f64| {
            let w = 1.0 - p.value(t);
            let d = p.derivative(t);
            w * w + d * d
        };
        let whole = simpson(&f, 0.0, p.t_len());
        let energy = adaptive(&f, 0.0, p.t_len(), whole, 1e-13, 50);
        assert!(
            energy >= 1.0 && energy <= 1.0 + eta,
            "eta {eta}: quadrature energy {energy} outside [1, {}]",
            1.0 + eta
        );
        budgets.push(energy);
    }
    println!("[PASS] criterion 4: profile budgets {budgets:?} within [1, 1+eta]");
}

/// Criterion 5: both block solves match the dense oracle on random small
/// instances to 1e-8, and the alternation trace never increases (1e-10
/// slack).
#[test]
fn criterion_05_solver_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    // 20 random 1D instances (<= 8 cells) and 5 random 2D (<= 4x4)
    for trial in 0..25 {
        let (grid, w) = if trial < 20 {
            let n = rng.gen_range(4..=8);
            let g = Grid::line(-1.0, 1.0, n).unwrap();
            let w = WeightField::step_1d(
                (-1.0, 1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..3.0),
            )
            .unwrap();
            (g, w)
        } else {
            let nx = rng.gen_range(3..=4);
            let ny = rng.gen_range(2..=4);
            let g = Grid::rect((-1.0, 1.0, nx), (-1.0, 1.0, ny)).unwrap();
            let w = WeightField::vertical_split_2d(
                [(-1.0, 1.0), (-1.0, 1.0)],
                rng.gen_range(-0.4..0.4),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..3.0),
            )
            .unwrap();
            (g, w)
        };
        let n = grid.total_cells();
        let v = field_from(&grid, (0..n).map(|_| rng.gen_range(0.0..1.0)).collect());
        let u0 = field_from(&grid, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let uf = field_from(&grid, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let mut cfg = SolverConfig::with_eps(rng.gen_range(0.02..0.2));
        cfg.lambda = rng.gen_range(0.5..4.0);
        cfg.tol_linear = 1e-12;

        let u_fast = solve_u(&v, &w, &u0, &cfg).unwrap();
        let (gg, vv, ww, uu0, cc) = (grid.clone(), v.clone(), w.clone(), u0.clone(), cfg.clone());
        let u_dense = dense_argmin(
            &move |x: &[f64]| {
                let f = field_from(&gg, x.to_vec());
                at_energy(
                    &f,
                    &vv,
                    &ww,
                    cc.eps,
                    cc.normalization,
                    cc.lambda,
                    Some(&uu0),
                )
                .unwrap()
                .total
            },
            n,
        );
        let du = max_abs_diff(u_fast.samples(), &u_dense);
        assert!(
            du <= 1e-8,
            "trial {trial}: u-step differs from dense by {du}"
        );

        let v_fast = solve_v(&uf, &w, &cfg).unwrap();
        let (gg, ww, cc, uff) = (grid.clone(), w.clone(), cfg.clone(), uf.clone());
        let v_dense = dense_argmin(
            &move |x: &[f64]| {
                let f = field_from(&gg, x.to_vec());
                at_energy(&uff, &f, &ww, cc.eps, cc.normalization, 0.0, None)
                    .unwrap()
                    .total
            },
            n,
        );
        let dv = max_abs_diff(v_fast.samples(), &v_dense);
        assert!(
            dv <= 1e-8,
            "trial {trial}: v-step differs from dense by {dv}"
        );
        checked += 1;
    }
    // 20 random alternation instances: nonincreasing trace
    for trial in 0..20 {
        let n = rng.gen_range(20..60);
        let g = Grid::line(-1.0, 1.0, n).unwrap();
        let u0 = field_from(&g, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let w = WeightField::step_1d(
            (-1.0, 1.0),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..3.0),
        )
        .unwrap();
        let mut cfg = SolverConfig::with_eps(rng.gen_range(0.03..0.15));
        cfg.lambda = rng.gen_range(1.0..8.0);
        let res = alternate(&u0, &w, &cfg).unwrap();
        let mut prev = res.initial.total;
        for rep in &res.trace {
            assert!(
                rep.total <= prev + 1e-10,
                "trial {trial}: energy rose {prev} -> {}",
                rep.total
            );
            prev = rep.total;
        }
    }
    println!("[PASS] criterion 5: {checked} dense-oracle matches to 1e-8, 20 descent traces nonincreasing");
}

/// Criterion 6: slicing inequality on 100 random 2D instances for both axis
/// directions, with equality when grad u is parallel to the direction.
#[test]
fn criterion_06_slicing_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let nx = rng.gen_range(6..14);
        let ny = rng.gen_range(6..14);
        let g = Grid::rect((-1.0, 1.0, nx), (-1.0, 1.0, ny)).unwrap();
        let (a, b, c, d) = (
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..3.0),
        );
        let u = ScalarField::from_fn_2d(g.clone(), |x, y| {
            a * x + b * y + c * x * y + d * (2.0 * x).sin() * y
        })
        .unwrap();
        let v =
            ScalarField::from_fn_2d(g.clone(), |x, y| 0.5 + 0.5 / (1.0 + x * x + y * y)).unwrap();
        let split = rng.gen_range(-0.5..0.5);
        let w = WeightField::vertical_split_2d(
            [(-1.0, 1.0), (-1.0, 1.0)],
            split,
            rng.gen_range(1.0..2.0),
            rng.gen_range(1.0..4.0),
        )
        .unwrap();
        for axis in [0usize, 1] {
            let chk = slicing_lower_bound_check(&u, &v, &w, axis).unwrap();
            assert!(
                chk.holds,
                "trial {trial} axis {axis}: lhs {} < rhs {}",
                chk.lhs, chk.rhs
            );
        }
    }
    // equality when grad u is parallel to nu
    let g = Grid::rect((-1.0, 1.0, 24), (-1.0, 1.0, 24)).unwrap();
    let u = ScalarField::from_fn_2d(g.clone(), |x, _| (3.0 * x).sin()).unwrap();
    let v = ScalarField::constant(g, 0.8).unwrap();
    let w = WeightField::constant_2d([(-1.0, 1.0), (-1.0, 1.0)], 2.0).unwrap();
    let chk = slicing_lower_bound_check(&u, &v, &w, 0).unwrap();
    assert!(chk.holds);
    assert!(
        (chk.lhs - chk.rhs).abs() <= 1e-10 * chk.lhs.max(1.0),
        "parallel case not tight: {} vs {}",
        chk.lhs,
        chk.rhs
    );
    println!(
        "[PASS] criterion 6: slicing bound holds on 100 random instances, tight when parallel"
    );
}

/// Criterion 7: the interval Hausdorff formula matches the delta-grid
/// neighborhood-inclusion oracle to 2e-4 on 1000 random pairs, cap cases
/// included.
#[test]
fn criterion_07_hausdorff_formula_vs_oracle() {
    const DELTA: f64 = 1e-4;
    // smallest delta on the grid with mutual delta-neighborhood inclusion
    fn oracle(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
        let mut k = 0u32;
        loop {
            let d = k as f64 * DELTA;
            let incl12 = a2 - d <= a1 && b1 <= b2 + d;
            let incl21 = a1 - d <= a2 && b2 <= b1 + d;
            if incl12 && incl21 {
                return d.min(1.0);
            }
            if d > 1.0 {
                return 1.0;
            }
            k += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut caps = 0;
    for _ in 0..1000 {
        let mut p = [0.0f64; 4];
        for v in p.iter_mut() {
            *v = rng.gen_range(0.0..3.0);
        }
        let (a1, b1) = (p[0].min(p[1]), p[0].max(p[1]));
        let (a2, b2) = (p[2].min(p[3]), p[2].max(p[3]));
        let formula = hausdorff_interval(a1, b1, a2, b2).unwrap();
        let brute = oracle(a1, b1, a2, b2);
        assert!(
            (formula - brute).abs() <= 2.0 * DELTA,
            "formula {formula} vs oracle {brute} for [{a1},{b1}] [{a2},{b2}]"
        );
        if formula == 1.0 {
            caps += 1;
        }
    }
    assert!(caps > 0, "no cap-at-1 cases sampled");
    println!("[PASS] criterion 7: Hausdorff formula matches delta-grid oracle on 1000 pairs ({caps} capped)");
}

/// Criterion 8: 2D lower-trace line test on a 256x256 grid, omega 1 | 3,
/// eps = 0.02, full alternating solve (lambda = 5); the probe per unit jump
/// length must sit in (0.7, 1.6) - bounded away from the upper trace 3 and
/// the mean 2.
#[test]
fn criterion_08_two_d_lower_trace_line() {
    let dom = [(-1.0, 1.0), (-1.0, 1.0)];
    let eps = 0.02;
    let g = Grid::rect((-1.0, 1.0, 256), (-1.0, 1.0, 256)).unwrap();
    let step = PiecewiseField::vertical_step_2d(dom, 0.0, 0.0, 1.0).unwrap();
    let u0 = sample(&step, &g).unwrap();
    let w = WeightField::vertical_split_2d(dom, 0.0, 1.0, 3.0).unwrap();
    let mut cfg = SolverConfig::with_eps(eps);
    cfg.normalization = Normalization::Classic;
    cfg.lambda = 5.0;
    let res = alternate(&u0, &w, &cfg).unwrap();
    let js = JumpSet::segments(vec![Segment {
        a: [0.0, -1.0],
        b: [0.0, 1.0],
        normal: [1.0, 0.0],
    }])
    .unwrap();
    let rho = SweepPlan::probe_radius(eps);
    let probe = jump_cost_probe(&res.v, &w, eps, Normalization::Classic, &js, rho).unwrap();
    let per_len = probe / 2.0;
    assert!(
        per_len > 0.7 && per_len < 1.6,
        "probe per unit length {per_len} outside (0.7, 1.6)"
    );
    println!("[PASS] criterion 8: 2D line probe per unit length {per_len:.4} in (0.7, 1.6)");
}

/// Criterion 9: bilevel superset-optimality on the two-noise synthetic, and
/// the K = 0 path reproduces the single-parameter scheme bit-identically.
#[test]
fn criterion_09_bilevel_superset_optimality() {
    let n = 512;
    let g = Grid::line(-1.0, 1.0, n).unwrap();
    let ug = ScalarField::from_fn_1d(g.clone(), |x| {
        let left_box = (x > -0.8 && x < -0.25) as i32 as f64;
        let right_boxes =
            ((x > 0.1 && x < 0.3) || (x > 0.45 && x < 0.6) || (x > 0.75 && x < 0.9)) as i32 as f64;
        left_box + right_boxes
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let gauss = Normal::new(0.0, 1.0).unwrap();
    let noisy: Vec<f64> = ug
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = g.axis(0).center(i);
            let sigma = if x < 0.0 { 0.4 } else { 0.05 };
            v + sigma * gauss.sample(&mut rng)
        })
        .collect();
    let u0 = field_from(&g, noisy);
    let alphas = wams_core::bilevel::default_alpha_grid();
    let mut cfg = SolverConfig::with_eps(0.02);
    cfg.lambda = 1.0;
    cfg.relocation = RelocationPolicy::Off;

    let p0 = PartitionSpec::whole_domain(&g.bounds());
    let p1 = PartitionSpec::dyadic(&g.bounds(), 1).unwrap();
    let only_k0 = train(&u0, &ug, &[p0.clone()], &alphas, &cfg).unwrap();
    let both = train(&u0, &ug, &[p0, p1], &alphas, &cfg).unwrap();
    assert!(
        both.best().score <= only_k0.best().score,
        "superset made the score worse: {} vs {}",
        both.best().score,
        only_k0.best().score
    );
    // the two-noise synthetic rewards the split partition
    assert_eq!(both.best().spec.k, 1, "split partition should win");
    assert!(both.candidates[1].score <= both.candidates[0].score);

    // K = 0 path == scheme (B), bit for bit
    let b = scheme_b(&u0, &ug, &alphas, &cfg).unwrap();
    let k0 = &only_k0.candidates[0];
    assert_eq!(k0.score.to_bits(), b.score.to_bits());
    assert_eq!(k0.cubes[0].alpha.to_bits(), b.cubes[0].alpha.to_bits());
    for (x, y) in k0.u.samples().iter().zip(b.u.samples()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    println!(
        "[PASS] criterion 9: scores K0 {:.6e} vs K0+K1 {:.6e} (K=1 alphas {:?}), scheme-B bit-identical",
        only_k0.best().score,
        both.best().score,
        both.best().cubes.iter().map(|c| c.alpha).collect::<Vec<_>>()
    );
}

/// Criterion 10: the sharp jump term depends only on the lower trace -
/// raising the upper-trace side of every jump leaves it bit-identical, on 50
/// randomized piecewise scenarios.
#[test]
fn criterion_10_ms_energy_lower_trace_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for trial in 0..50 {
        if trial % 2 == 0 {
            // 1D: weights alternate 1, X_i > 1; u jumps at a random subset of cuts
            let m = rng.gen_range(2..6);
            let mut cuts: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-0.9..0.9)).collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let mut edges = vec![-1.0];
            edges.extend(cuts.iter().copied());
            edges.push(1.0);
            let mut boxes = Vec::new();
            let mut raised = Vec::new();
            for i in 0..edges.len() - 1 {
                let value = if i % 2 == 0 {
                    1.0
                } else {
                    rng.gen_range(2.0..5.0)
                };
                boxes.push(WeightBox::interval(edges[i], edges[i + 1], value));
                raised.push(if i % 2 == 0 {
                    value
                } else {
                    value + rng.gen_range(0.5..3.0)
                });
            }
            let w = build_partition_weight(boxes.clone(), &[(-1.0, 1.0)]).unwrap();
            let boxes2: Vec<WeightBox> = boxes
                .iter()
                .zip(&raised)
                .map(|(b, &v)| WeightBox::interval(b.lo[0], b.hi[0], v))
                .collect();
            let w2 = build_partition_weight(boxes2, &[(-1.0, 1.0)]).unwrap();
            // u jumps at every interior cut (heights alternate so limits differ)
            let jumps: Vec<f64> = edges[1..edges.len() - 1].to_vec();
            if jumps.is_empty() {
                continue;
            }
            let pieces = (0..=jumps.len())
                .map(|i| wams_core::fields::Poly1::constant(i as f64))
                .collect();
            let u = PiecewiseField::intervals((-1.0, 1.0), jumps, pieces).unwrap();
            let r1 = ms_energy(&u, &w).unwrap();
            let r2 = ms_energy(&u, &w2).unwrap();
            assert_eq!(
                r1.jump_term.to_bits(),
                r2.jump_term.to_bits(),
                "trial {trial}: jump term changed with the upper trace"
            );
            assert!(r1.jump_term > 0.0);
        } else {
            // 2D: four boxes, value 1 on one diagonal, X/Y > 1 on the other
            let dom = [(-1.0, 1.0), (-1.0, 1.0)];
            let cx = rng.gen_range(-0.5..0.5);
            let cy = rng.gen_range(-0.5..0.5);
            let xval = rng.gen_range(2.0..4.0);
            let yval = rng.gen_range(2.0..4.0);
            let mk = |xv: f64, yv: f64| {
                vec![
                    WeightBox::rect((-1.0, cx), (-1.0, cy), 1.0),
                    WeightBox::rect((cx, 1.0), (-1.0, cy), xv),
                    WeightBox::rect((-1.0, cx), (cy, 1.0), yv),
                    WeightBox::rect((cx, 1.0), (cy, 1.0), 1.0),
                ]
            };
            let w = build_partition_weight(mk(xval, yval), &dom).unwrap();
            let w2 = build_partition_weight(
                mk(
                    xval + rng.gen_range(0.5..2.0),
                    yval + rng.gen_range(0.5..2.0),
                ),
                &dom,
            )
            .unwrap();
            // u jumps across the full vertical line x = cx
            let u = PiecewiseField::vertical_step_2d(dom, cx, 0.0, 1.0).unwrap();
            let r1 = ms_energy(&u, &w).unwrap();
            let r2 = ms_energy(&u, &w2).unwrap();
            assert_eq!(
                r1.jump_term.to_bits(),
                r2.jump_term.to_bits(),
                "trial {trial}: 2D jump term changed with the upper trace"
            );
            assert!((r1.jump_term - 2.0).abs() < 1e-12);
        }
    }
    println!(
        "[PASS] criterion 10: jump term bit-identical under upper-trace mutation (50 scenarios)"
    );
}
