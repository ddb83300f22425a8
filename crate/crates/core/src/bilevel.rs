//! Bilevel weight learning: per-cube selection of the regularization
//! strength against a clean reference, assembly into a piecewise-constant
//! weight, a global weighted solve, and selection over candidate
//! partitions. With the single whole-domain candidate the procedure
//! degenerates to the classical single-parameter scheme.

use crate::error::{CoreError, Result};
use crate::fields::{Axis, Grid, ScalarField};
use crate::parallel::map_indexed;
use crate::solver::{alternate, SolverConfig};
use crate::sum::pairwise_sum;
use crate::weights::{build_partition_weight, WeightBox, WeightField};

/// Axis-aligned cube of a partition (an interval in 1D).
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Cube {
    fn side_min(&self, dim: usize) -> f64 {
        (0..dim)
            .map(|a| self.hi[a] - self.lo[a])
            .fold(f64::MAX, f64::min)
    }
}

/// Scale-K cube partition of the domain; K = 0 is the whole domain, K >= 1
/// uses cubes of side at least 1/K.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    pub k: u32,
    pub cubes: Vec<Cube>,
}

impl PartitionSpec {
    pub fn whole_domain(domain: &[(f64, f64)]) -> PartitionSpec {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for (a, &(l, h)) in domain.iter().enumerate() {
            lo[a] = l;
            hi[a] = h;
        }
        PartitionSpec {
            k: 0,
            cubes: vec![Cube { lo, hi }],
        }
    }

    /// Uniform partition with per-axis count floor(extent * k), so every
    /// side is at least 1/k.
    pub fn dyadic(domain: &[(f64, f64)], k: u32) -> Result<PartitionSpec> {
        if k == 0 {
            return Ok(PartitionSpec::whole_domain(domain));
        }
        let dim = domain.len();
        let mut counts = [1usize; 2];
        for (a, &(lo, hi)) in domain.iter().enumerate() {
            counts[a] = (((hi - lo) * k as f64).floor() as usize).max(1);
        }
        let mut cubes = Vec::new();
        let edge = |a: usize, i: usize| {
            let (lo, hi) = domain[a];
            lo + (hi - lo) * i as f64 / counts[a] as f64
        };
        match dim {
            1 => {
                for i in 0..counts[0] {
                    cubes.push(Cube {
                        lo: [edge(0, i), 0.0],
                        hi: [edge(0, i + 1), 0.0],
                    });
                }
            }
            _ => {
                for j in 0..counts[1] {
                    for i in 0..counts[0] {
                        cubes.push(Cube {
                            lo: [edge(0, i), edge(1, j)],
                            hi: [edge(0, i + 1), edge(1, j + 1)],
                        });
                    }
                }
            }
        }
        let spec = PartitionSpec { k, cubes };
        spec.validate(domain)?;
        Ok(spec)
    }

    pub fn validate(&self, domain: &[(f64, f64)]) -> Result<()> {
        let dim = domain.len();
        if self.cubes.is_empty() {
            return Err(CoreError::Validation("partition has no cubes".into()));
        }
        for c in &self.cubes {
            for a in 0..dim {
                if !(c.lo[a] < c.hi[a]) {
                    return Err(CoreError::Partition("degenerate cube".into()));
                }
            }
            if self.k >= 1 && c.side_min(dim) < 1.0 / self.k as f64 - 1e-12 {
                return Err(CoreError::Partition(format!(
                    "cube side {} below 1/K = {}",
                    c.side_min(dim),
                    1.0 / self.k as f64
                )));
            }
        }
        for i in 0..self.cubes.len() {
            for j in i + 1..self.cubes.len() {
                let overlap = (0..dim).all(|a| {
                    self.cubes[i].lo[a] < self.cubes[j].hi[a]
                        && self.cubes[j].lo[a] < self.cubes[i].hi[a]
                });
                if overlap {
                    return Err(CoreError::Partition(format!("cubes {i} and {j} overlap")));
                }
            }
        }
        let vol: f64 = self
            .cubes
            .iter()
            .map(|c| (0..dim).map(|a| c.hi[a] - c.lo[a]).product::<f64>())
            .sum();
        let dom_vol: f64 = domain.iter().map(|&(lo, hi)| hi - lo).product();
        if (vol - dom_vol).abs() > 1e-9 * dom_vol {
            return Err(CoreError::Partition(format!(
                "cubes cover volume {vol}, domain volume is {dom_vol}"
            )));
        }
        Ok(())
    }
}

/// Default level-2 grid: 17 logarithmic points from 1e-2 to 1e2.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..17)
        .map(|k| 10f64.powf(-2.0 + 0.25 * k as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaScore {
    pub alpha: f64,
    pub score: f64,
}

/// Per-cube outcome: the scanned score table and the selected alpha.
#[derive(Debug, Clone)]
pub struct CubeResult {
    pub cube: Cube,
    pub table: Vec<AlphaScore>,
    pub alpha: f64,
}

/// One candidate partition after level-2 selection and the global solve.
#[derive(Debug, Clone)]
pub struct CandidateResult {
    pub spec: PartitionSpec,
    pub cubes: Vec<CubeResult>,
    pub weight: WeightField,
    pub u: ScalarField,
    pub score: f64,
}

/// Full training outcome; `chosen` indexes the minimal-score candidate.
#[derive(Debug, Clone)]
pub struct BilevelResult {
    pub chosen: usize,
    pub candidates: Vec<CandidateResult>,
}

impl BilevelResult {
    pub fn best(&self) -> &CandidateResult {
        &self.candidates[self.chosen]
    }

    pub fn score_table_csv(&self) -> String {
        let mut out = String::from("candidate,k,cube,alpha,score\n");
        for (ci, cand) in self.candidates.iter().enumerate() {
            for (qi, cube) in cand.cubes.iter().enumerate() {
                for row in &cube.table {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        ci, cand.spec.k, qi, row.alpha, row.score
                    ));
                }
            }
            out.push_str(&format!("{},{},global,,{}\n", ci, cand.spec.k, cand.score));
        }
        out
    }
}

fn l2_distance_sq(a: &ScalarField, b: &ScalarField) -> f64 {
    let ha = a.grid().cell_volume();
    let terms: Vec<f64> = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| (x - y).powi(2) * ha)
        .collect();
    pairwise_sum(&terms)
}

/// Cells of `g` whose centers fall in [lo, hi) per axis; returns the index
/// window and the sub-grid (same spacing, bounds on grid lines).
fn restrict_grid(g: &Grid, cube: &Cube) -> Result<(Vec<std::ops::Range<usize>>, Grid)> {
    let mut ranges = Vec::new();
    let mut axes = Vec::new();
    for a in 0..g.dim() {
        let ax = g.axis(a);
        let h = ax.spacing();
        let mut i_lo = ax.cells;
        let mut i_hi = 0;
        for i in 0..ax.cells {
            let c = ax.center(i);
            if c >= cube.lo[a] && c < cube.hi[a] {
                i_lo = i_lo.min(i);
                i_hi = i_hi.max(i + 1);
            }
        }
        if i_lo >= i_hi {
            return Err(CoreError::Geometry(format!(
                "cube [{}, {}] contains no cell centers on axis {a}",
                cube.lo[a], cube.hi[a]
            )));
        }
        if i_hi - i_lo < 2 {
            return Err(CoreError::Resolution(format!(
                "cube [{}, {}] covers fewer than 2 cells on axis {a}",
                cube.lo[a], cube.hi[a]
            )));
        }
        axes.push(Axis {
            lo: ax.lo + i_lo as f64 * h,
            hi: ax.lo + i_hi as f64 * h,
            cells: i_hi - i_lo,
        });
        ranges.push(i_lo..i_hi);
    }
    Ok((ranges, Grid::new(axes)?))
}

fn extract(f: &ScalarField, ranges: &[std::ops::Range<usize>], sub: &Grid) -> Result<ScalarField> {
    let g = f.grid();
    let mut samples = Vec::with_capacity(sub.total_cells());
    match g.dim() {
        1 => {
            for i in ranges[0].clone() {
                samples.push(f.samples()[i]);
            }
        }
        _ => {
            let nx = g.axis(0).cells;
            for iy in ranges[1].clone() {
                for ix in ranges[0].clone() {
                    samples.push(f.samples()[iy * nx + ix]);
                }
            }
        }
    }
    ScalarField::new(sub.clone(), samples)
}

/// Level-2 scan: for each alpha solve the constant-weight problem on the
/// cube and return the alpha minimizing the distance to the reference,
/// ties broken toward the smaller alpha.
pub fn level2_alpha(
    u0: &ScalarField,
    ug: &ScalarField,
    cube: &Cube,
    alphas: &[f64],
    cfg: &SolverConfig,
) -> Result<(f64, Vec<AlphaScore>)> {
    if u0.grid() != ug.grid() {
        return Err(CoreError::Domain(
            "u0 and ug live on different grids".into(),
        ));
    }
    if alphas.is_empty() {
        return Err(CoreError::Validation("alpha grid is empty".into()));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.as_slice() != alphas || alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(CoreError::Validation(
            "alpha grid must be positive and sorted ascending".into(),
        ));
    }
    let (ranges, sub) = restrict_grid(u0.grid(), cube)?;
    let sub_u0 = extract(u0, &ranges, &sub)?;
    let sub_ug = extract(ug, &ranges, &sub)?;
    let domain = sub.bounds();
    let scores = map_indexed(alphas.len(), |i| -> Result<AlphaScore> {
        let w = build_partition_weight(
            vec![match sub.dim() {
                1 => WeightBox::interval(domain[0].0, domain[0].1, alphas[i]),
                _ => WeightBox::rect(domain[0], domain[1], alphas[i]),
            }],
            &domain,
        )?;
        let res = alternate(&sub_u0, &w, cfg)?;
        Ok(AlphaScore {
            alpha: alphas[i],
            score: l2_distance_sq(&res.u, &sub_ug),
        })
    });
    let mut table = Vec::with_capacity(alphas.len());
    for s in scores {
        table.push(s?);
    }
    let mut best = table[0];
    for row in &table[1..] {
        if row.score < best.score - 1e-12 {
            best = *row;
        }
    }
    Ok((best.alpha, table))
}

fn run_candidate(
    u0: &ScalarField,
    ug: &ScalarField,
    spec: &PartitionSpec,
    alphas: &[f64],
    cfg: &SolverConfig,
) -> Result<CandidateResult> {
    let domain = u0.grid().bounds();
    spec.validate(&domain)?;
    // cubes run sequentially: the alpha scan inside each cube is already
    // parallel, and nesting the pool would oversubscribe it
    let mut cubes = Vec::with_capacity(spec.cubes.len());
    let mut boxes = Vec::with_capacity(spec.cubes.len());
    for cube in &spec.cubes {
        let (alpha, table) = level2_alpha(u0, ug, cube, alphas, cfg)?;
        cubes.push(CubeResult {
            cube: cube.clone(),
            table,
            alpha,
        });
        boxes.push(WeightBox {
            lo: cube.lo,
            hi: cube.hi,
            value: alpha,
        });
    }
    let weight = build_partition_weight(boxes, &domain)?;
    let res = alternate(u0, &weight, cfg)?;
    let score = l2_distance_sq(&res.u, ug);
    Ok(CandidateResult {
        spec: spec.clone(),
        cubes,
        weight,
        u: res.u,
        score,
    })
}

/// The classical single-parameter scheme: exactly the K = 0 candidate path.
pub fn scheme_b(
    u0: &ScalarField,
    ug: &ScalarField,
    alphas: &[f64],
    cfg: &SolverConfig,
) -> Result<CandidateResult> {
    let spec = PartitionSpec::whole_domain(&u0.grid().bounds());
    run_candidate(u0, ug, &spec, alphas, cfg)
}

/// Trains over the candidate partitions and returns every candidate's
/// table with the argmin marked. Adding a candidate can only improve
/// (or keep) the chosen score.
pub fn train(
    u0: &ScalarField,
    ug: &ScalarField,
    candidates: &[PartitionSpec],
    alphas: &[f64],
    cfg: &SolverConfig,
) -> Result<BilevelResult> {
    if candidates.is_empty() {
        return Err(CoreError::Validation("no candidate partitions".into()));
    }
    if u0.grid() != ug.grid() {
        return Err(CoreError::Domain(
            "u0 and ug live on different grids".into(),
        ));
    }
    let mut results = Vec::with_capacity(candidates.len());
    for spec in candidates {
        results.push(run_candidate(u0, ug, spec, alphas, cfg)?);
    }
    let mut chosen = 0;
    for (i, c) in results.iter().enumerate() {
        if c.score < results[chosen].score {
            chosen = i;
        }
    }
    Ok(BilevelResult {
        chosen,
        candidates: results,
    })
}
