//! Energy evaluation: the diffuse (phase-field) energies, the sharp
//! weighted Mumford-Shah energy with the lower-trace jump cost, slicing
//! restrictions, and the interval Hausdorff distance.

use crate::error::{CoreError, Result};
use crate::fields::{gradient, PieceLayout, PiecewiseField, Poly2, ScalarField, Segment};
use crate::sum::pairwise_sum;
use crate::weights::WeightField;

/// Coefficient pair (a, b) of the transition term a eps |grad v|^2 +
/// (b / eps)(1 - v)^2. Both allowed pairs give unit sharp jump cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// (1/2, 1/2): the one-dimensional convention.
    Symmetric,
    /// (1, 1/4): the N-dimensional convention; the default.
    #[default]
    Classic,
}

impl Normalization {
    pub fn coefficients(&self) -> (f64, f64) {
        match self {
            Normalization::Symmetric => (0.5, 0.5),
            Normalization::Classic => (1.0, 0.25),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Normalization::Symmetric => "symmetric",
            Normalization::Classic => "classic",
        }
    }

    pub fn parse(s: &str) -> Result<Normalization> {
        match s.trim() {
            "symmetric" => Ok(Normalization::Symmetric),
            "classic" => Ok(Normalization::Classic),
            other => Err(CoreError::Parse(format!(
                "unknown normalization `{other}` (expected `symmetric` or `classic`)"
            ))),
        }
    }
}

/// Decomposed energy record. `total` is always the sum of the four
/// component terms; `epsilon`/`normalization` are present only for diffuse
/// evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub grad_term: f64,
    pub phase_term: f64,
    pub jump_term: f64,
    pub fidelity: f64,
    pub epsilon: Option<f64>,
    pub normalization: Option<Normalization>,
    pub total: f64,
}

impl EnergyReport {
    fn assemble(
        grad_term: f64,
        phase_term: f64,
        jump_term: f64,
        fidelity: f64,
        epsilon: Option<f64>,
        normalization: Option<Normalization>,
    ) -> EnergyReport {
        EnergyReport {
            grad_term,
            phase_term,
            jump_term,
            fidelity,
            epsilon,
            normalization,
            total: grad_term + phase_term + jump_term + fidelity,
        }
    }

    pub fn csv_header() -> &'static str {
        "eps,grad,phase,jump,fidelity,total,normalization"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.epsilon.map(|e| e.to_string()).unwrap_or_default(),
            self.grad_term,
            self.phase_term,
            self.jump_term,
            self.fidelity,
            self.total,
            self.normalization.map(|n| n.tag()).unwrap_or_default(),
        )
    }
}

fn check_pair_grids(u: &ScalarField, v: &ScalarField) -> Result<()> {
    if u.grid() != v.grid() {
        return Err(CoreError::Domain("u and v live on different grids".into()));
    }
    Ok(())
}

/// Per-cell squared gradient magnitude.
fn grad_sq(f: &ScalarField) -> Vec<f64> {
    let comps = gradient(f);
    let mut g = vec![0.0; f.samples().len()];
    for comp in &comps {
        for (gi, &ci) in g.iter_mut().zip(comp.samples()) {
            *gi += ci * ci;
        }
    }
    g
}

/// Per-cell contributions of the transition term
/// [a eps |grad v|^2 + (b/eps)(1 - v)^2] w h^N at cell centers.
pub(crate) fn phase_contributions(
    v: &ScalarField,
    w: &WeightField,
    eps: f64,
    norm: Normalization,
) -> Result<Vec<f64>> {
    let (a, b) = norm.coefficients();
    let ha = v.grid().cell_volume();
    let wv = w.sample_on(v.grid())?;
    let gv = grad_sq(v);
    Ok(v.samples()
        .iter()
        .zip(gv.iter())
        .zip(wv.samples())
        .map(|((&vi, &gvi), &wi)| (a * eps * gvi + b / eps * (1.0 - vi).powi(2)) * wi * ha)
        .collect())
}

/// Diffuse weighted energy at one eps:
/// grad = sum v^2 |grad u|^2 w h^N, phase = sum [a eps |grad v|^2 +
/// (b/eps)(1-v)^2] w h^N, fidelity = lambda sum (u - u0)^2 h^N.
/// Midpoint quadrature with the weight at cell centers.
pub fn at_energy(
    u: &ScalarField,
    v: &ScalarField,
    w: &WeightField,
    eps: f64,
    norm: Normalization,
    lambda: f64,
    u0: Option<&ScalarField>,
) -> Result<EnergyReport> {
    check_pair_grids(u, v)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CoreError::Validation(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if lambda < 0.0 || !lambda.is_finite() {
        return Err(CoreError::Validation(format!(
            "fidelity weight must be nonnegative, got {lambda}"
        )));
    }
    if lambda > 0.0 && u0.is_none() {
        return Err(CoreError::Validation(
            "fidelity weight is positive but no reference field u0 was given".into(),
        ));
    }
    let ha = u.grid().cell_volume();
    let wv = w.sample_on(u.grid())?;
    let gu = grad_sq(u);
    let grad_terms: Vec<f64> = u
        .samples()
        .iter()
        .zip(v.samples())
        .zip(gu.iter())
        .zip(wv.samples())
        .map(|(((_, &vi), &gui), &wi)| vi * vi * gui * wi * ha)
        .collect();
    let grad_term = pairwise_sum(&grad_terms);
    let phase_term = pairwise_sum(&phase_contributions(v, w, eps, norm)?);
    let fidelity = match u0 {
        Some(f0) if lambda > 0.0 => {
            check_pair_grids(u, f0)?;
            let terms: Vec<f64> = u
                .samples()
                .iter()
                .zip(f0.samples())
                .map(|(&ui, &gi)| lambda * (ui - gi).powi(2) * ha)
                .collect();
            pairwise_sum(&terms)
        }
        _ => 0.0,
    };
    Ok(EnergyReport::assemble(
        grad_term,
        phase_term,
        0.0,
        fidelity,
        Some(eps),
        Some(norm),
    ))
}

/// Unweighted diffuse energy, written as an independent code path (no
/// weight machinery) for cross-checking `at_energy` with w = 1.
pub fn at_energy_unweighted(
    u: &ScalarField,
    v: &ScalarField,
    eps: f64,
    norm: Normalization,
    lambda: f64,
    u0: Option<&ScalarField>,
) -> Result<EnergyReport> {
    check_pair_grids(u, v)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(CoreError::Validation(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if lambda > 0.0 && u0.is_none() {
        return Err(CoreError::Validation(
            "fidelity weight is positive but no reference field u0 was given".into(),
        ));
    }
    let (a, b) = norm.coefficients();
    let ha = u.grid().cell_volume();
    let gu = grad_sq(u);
    let gv = grad_sq(v);
    let grad_terms: Vec<f64> = v
        .samples()
        .iter()
        .zip(gu.iter())
        .map(|(&vi, &gui)| vi * vi * gui * 1.0 * ha)
        .collect();
    let phase_terms: Vec<f64> = v
        .samples()
        .iter()
        .zip(gv.iter())
        .map(|(&vi, &gvi)| (a * eps * gvi + b / eps * (1.0 - vi).powi(2)) * 1.0 * ha)
        .collect();
    let fidelity = match u0 {
        Some(f0) if lambda > 0.0 => {
            check_pair_grids(u, f0)?;
            let terms: Vec<f64> = u
                .samples()
                .iter()
                .zip(f0.samples())
                .map(|(&ui, &gi)| lambda * (ui - gi).powi(2) * ha)
                .collect();
            pairwise_sum(&terms)
        }
        _ => 0.0,
    };
    Ok(EnergyReport::assemble(
        pairwise_sum(&grad_terms),
        pairwise_sum(&phase_terms),
        0.0,
        fidelity,
        Some(eps),
        Some(norm),
    ))
}

// ---------------------------------------------------------------------------
// Sharp energy
// ---------------------------------------------------------------------------

/// 3-point Gauss-Legendre nodes/weights on [-1, 1]; exact through degree 5.
const GAUSS3: [(f64, f64); 3] = [
    (-0.7745966692414834, 0.5555555555555556),
    (0.0, 0.8888888888888889),
    (0.7745966692414834, 0.5555555555555556),
];

fn gauss_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    GAUSS3
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn gauss_rect(f: impl Fn(f64, f64) -> f64, x: (f64, f64), y: (f64, f64)) -> f64 {
    let mx = 0.5 * (x.0 + x.1);
    let hx = 0.5 * (x.1 - x.0);
    let my = 0.5 * (y.0 + y.1);
    let hy = 0.5 * (y.1 - y.0);
    let mut acc = 0.0;
    for &(xi, wx) in &GAUSS3 {
        for &(yj, wy) in &GAUSS3 {
            acc += wx * wy * f(mx + hx * xi, my + hy * yj);
        }
    }
    acc * hx * hy
}

fn sorted_breaks(mut v: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    v.retain(|&x| x > lo && x < hi);
    v.push(lo);
    v.push(hi);
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// Sharp weighted Mumford-Shah energy of a piecewise field:
/// the weighted Dirichlet integral over the pieces plus the lower-trace jump
/// cost (sum of omega_minus over 1D jump points; arc-length integral of
/// omega_minus over 2D segments).
pub fn ms_energy(u: &PiecewiseField, w: &WeightField) -> Result<EnergyReport> {
    if u.dim() != w.dim() || u.domain() != w.domain() {
        return Err(CoreError::Domain(format!(
            "field domain {:?} does not match weight domain {:?}",
            u.domain(),
            w.domain()
        )));
    }
    let grad_term = match u.layout() {
        PieceLayout::Intervals { jumps, pieces } => {
            let (lo, hi) = u.domain()[0];
            let mut cuts: Vec<f64> = jumps.clone();
            for b in w.boxes() {
                cuts.push(b.lo[0]);
                cuts.push(b.hi[0]);
            }
            let cuts = sorted_breaks(cuts, lo, hi);
            let mut acc = Vec::new();
            for win in cuts.windows(2) {
                let (a, b) = (win[0], win[1]);
                let mid = 0.5 * (a + b);
                let k = jumps.partition_point(|&j| j < mid);
                let dp = pieces[k].derivative();
                let wval = w.evaluate(&[mid])?;
                acc.push(gauss_interval(|x| dp.eval(x) * dp.eval(x) * wval, a, b));
            }
            pairwise_sum(&acc)
        }
        PieceLayout::HalfPlane2 {
            point,
            normal,
            neg,
            pos,
        } => {
            let axis_aligned = normal[0].abs() < 1e-12 || normal[1].abs() < 1e-12;
            if axis_aligned {
                grad_2d_axis_aligned(u, w, *point, *normal, neg, pos)?
            } else {
                grad_2d_midpoint(u, w)?
            }
        }
        PieceLayout::Regions { .. } => grad_2d_midpoint(u, w)?,
    };

    let jump_term = match u.layout() {
        PieceLayout::Intervals { jumps, .. } => {
            let mut acc = Vec::new();
            for &x in jumps {
                let plus = w.value_on_side(&[x], &[1.0])?;
                let minus = w.value_on_side(&[x], &[-1.0])?;
                acc.push(plus.min(minus));
            }
            pairwise_sum(&acc)
        }
        _ => {
            let segs = match u.jump_set() {
                crate::fields::JumpSet::Segments(s) => s,
                crate::fields::JumpSet::Points(_) => unreachable!("2D layout"),
            };
            let mut acc = Vec::new();
            for seg in &segs {
                acc.push(segment_lower_trace_integral(seg, w)?);
            }
            pairwise_sum(&acc)
        }
    };

    Ok(EnergyReport::assemble(
        grad_term, 0.0, jump_term, 0.0, None, None,
    ))
}

/// Exact Dirichlet integral for axis-aligned two-piece geometry: split the
/// rectangle at the dividing line and every box bound, tensor-Gauss on each
/// sub-rectangle (the weight is constant there, the integrand polynomial).
fn grad_2d_axis_aligned(
    u: &PiecewiseField,
    w: &WeightField,
    point: [f64; 2],
    normal: [f64; 2],
    neg: &Poly2,
    pos: &Poly2,
) -> Result<f64> {
    let (dx, dy) = (u.domain()[0], u.domain()[1]);
    let mut xcuts: Vec<f64> = Vec::new();
    let mut ycuts: Vec<f64> = Vec::new();
    for b in w.boxes() {
        xcuts.extend([b.lo[0], b.hi[0]]);
        ycuts.extend([b.lo[1], b.hi[1]]);
    }
    if normal[1].abs() < 1e-12 {
        xcuts.push(point[0]);
    } else {
        ycuts.push(point[1]);
    }
    let xcuts = sorted_breaks(xcuts, dx.0, dx.1);
    let ycuts = sorted_breaks(ycuts, dy.0, dy.1);
    let mut acc = Vec::new();
    for wx in xcuts.windows(2) {
        for wy in ycuts.windows(2) {
            let mid = [0.5 * (wx[0] + wx[1]), 0.5 * (wy[0] + wy[1])];
            let s = (mid[0] - point[0]) * normal[0] + (mid[1] - point[1]) * normal[1];
            let p = if s >= 0.0 { pos } else { neg };
            let (px, py) = (p.partial_x(), p.partial_y());
            let wval = w.evaluate(&mid)?;
            acc.push(gauss_rect(
                |x, y| {
                    let gx = px.eval(x, y);
                    let gy = py.eval(x, y);
                    (gx * gx + gy * gy) * wval
                },
                (wx[0], wx[1]),
                (wy[0], wy[1]),
            ));
        }
    }
    Ok(pairwise_sum(&acc))
}

/// Midpoint quadrature fallback for oblique or multi-region geometry.
fn grad_2d_midpoint(u: &PiecewiseField, w: &WeightField) -> Result<f64> {
    const CELLS: usize = 1024;
    let (dx, dy) = (u.domain()[0], u.domain()[1]);
    let hx = (dx.1 - dx.0) / CELLS as f64;
    let hy = (dy.1 - dy.0) / CELLS as f64;
    let mut acc = Vec::with_capacity(CELLS);
    for iy in 0..CELLS {
        let y = dy.0 + (iy as f64 + 0.5) * hy;
        let mut row = 0.0;
        for ix in 0..CELLS {
            let x = dx.0 + (ix as f64 + 0.5) * hx;
            let g2 = piece_grad_sq_at(u, [x, y]);
            if g2 != 0.0 {
                row += g2 * w.evaluate(&[x, y])? * hx * hy;
            }
        }
        acc.push(row);
    }
    Ok(pairwise_sum(&acc))
}

fn piece_grad_sq_at(u: &PiecewiseField, p: [f64; 2]) -> f64 {
    match u.layout() {
        PieceLayout::HalfPlane2 {
            point,
            normal,
            neg,
            pos,
        } => {
            let s = (p[0] - point[0]) * normal[0] + (p[1] - point[1]) * normal[1];
            let poly = if s >= 0.0 { pos } else { neg };
            let gx = poly.partial_x().eval(p[0], p[1]);
            let gy = poly.partial_y().eval(p[0], p[1]);
            gx * gx + gy * gy
        }
        PieceLayout::Regions { pieces, .. } => {
            let mut best: Option<(f64, &Poly2)> = None;
            for piece in pieces {
                let m = piece.margin(p);
                if best.map(|(bm, _)| m > bm).unwrap_or(true) {
                    best = Some((m, &piece.poly));
                }
            }
            match best {
                Some((m, poly)) if m >= 0.0 => {
                    let gx = poly.partial_x().eval(p[0], p[1]);
                    let gy = poly.partial_y().eval(p[0], p[1]);
                    gx * gx + gy * gy
                }
                _ => 0.0,
            }
        }
        PieceLayout::Intervals { .. } => 0.0,
    }
}

/// Arc-length integral of the lower trace along one jump segment: split at
/// every crossing with a box boundary line, take min of the two adjacent
/// values on each sub-segment.
fn segment_lower_trace_integral(seg: &Segment, w: &WeightField) -> Result<f64> {
    let dir = [seg.b[0] - seg.a[0], seg.b[1] - seg.a[1]];
    let mut ts = vec![0.0, 1.0];
    for b in w.boxes() {
        for axis in 0..2 {
            for bound in [b.lo[axis], b.hi[axis]] {
                if dir[axis].abs() > 0.0 {
                    let t = (bound - seg.a[axis]) / dir[axis];
                    if t > 0.0 && t < 1.0 {
                        ts.push(t);
                    }
                }
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let len = seg.length();
    let neg_normal = [-seg.normal[0], -seg.normal[1]];
    let mut acc = Vec::new();
    for win in ts.windows(2) {
        let mid = seg.point_at(0.5 * (win[0] + win[1]));
        let plus = w.value_on_side(&mid, &seg.normal)?;
        let minus = w.value_on_side(&mid, &neg_normal)?;
        acc.push((win[1] - win[0]) * len * plus.min(minus));
    }
    Ok(pairwise_sum(&acc))
}

// ---------------------------------------------------------------------------
// Slicing
// ---------------------------------------------------------------------------

/// Grid-representable slicing directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceDirection {
    /// e1: rows, indexed by iy.
    XAxis,
    /// e2: columns, indexed by ix.
    YAxis,
    /// (1, 1)/sqrt(2): anti-diagonals, index 0..nx+ny-1.
    DiagUp,
    /// (1, -1)/sqrt(2): diagonals of constant ix+iy, same index range.
    DiagDown,
}

/// Restriction of a 2D field to one grid line in direction `nu`:
/// returns the samples along the line and their spacing.
pub fn slice_restrict(
    f: &ScalarField,
    nu: SliceDirection,
    index: usize,
) -> Result<(Vec<f64>, f64)> {
    let g = f.grid();
    if g.dim() != 2 {
        return Err(CoreError::UnsupportedDirection(
            "slicing needs a 2D field".into(),
        ));
    }
    let (nx, ny) = (g.axis(0).cells, g.axis(1).cells);
    let (hx, hy) = (g.axis(0).spacing(), g.axis(1).spacing());
    match nu {
        SliceDirection::XAxis => {
            if index >= ny {
                return Err(CoreError::Validation(format!("row {index} out of range")));
            }
            let row = f.samples()[index * nx..(index + 1) * nx].to_vec();
            Ok((row, hx))
        }
        SliceDirection::YAxis => {
            if index >= nx {
                return Err(CoreError::Validation(format!(
                    "column {index} out of range"
                )));
            }
            let col = (0..ny).map(|iy| f.samples()[iy * nx + index]).collect();
            Ok((col, hy))
        }
        SliceDirection::DiagUp | SliceDirection::DiagDown => {
            if (hx - hy).abs() > 1e-12 * hx.max(hy) {
                return Err(CoreError::UnsupportedDirection(
                    "diagonal slicing needs equal spacings on both axes".into(),
                ));
            }
            let count = nx + ny - 1;
            if index >= count {
                return Err(CoreError::Validation(format!(
                    "diagonal {index} out of range (0..{count})"
                )));
            }
            let mut out = Vec::new();
            match nu {
                SliceDirection::DiagUp => {
                    // lines of constant d = iy - ix, d in -(nx-1)..=(ny-1)
                    let d = index as isize - (nx as isize - 1);
                    let ix0 = 0.max(-d) as usize;
                    let ix1 = (nx as isize - 1).min(ny as isize - 1 - d) as usize;
                    for ix in ix0..=ix1 {
                        let iy = (ix as isize + d) as usize;
                        out.push(f.samples()[iy * nx + ix]);
                    }
                }
                SliceDirection::DiagDown => {
                    // lines of constant s = ix + iy
                    let s = index as isize;
                    let ix0 = 0.max(s - (ny as isize - 1)) as usize;
                    let ix1 = (nx as isize - 1).min(s) as usize;
                    for ix in ix0..=ix1 {
                        let iy = (s - ix as isize) as usize;
                        out.push(f.samples()[iy * nx + ix]);
                    }
                }
                _ => unreachable!(),
            }
            Ok((out, hx * std::f64::consts::SQRT_2))
        }
    }
}

/// Result of the slicing lower-bound check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlicingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the full weighted gradient energy against the Fubini sum of
/// sliced directional energies along axis `axis` (0 for e1, 1 for e2):
/// lhs = sum v^2 |grad u|^2 w h^N >= rhs = sum over lines of the sliced
/// 1D energies. Equality holds (up to quadrature rounding) when grad u is
/// parallel to the slicing direction.
pub fn slicing_lower_bound_check(
    u: &ScalarField,
    v: &ScalarField,
    w: &WeightField,
    axis: usize,
) -> Result<SlicingCheck> {
    check_pair_grids(u, v)?;
    if u.grid().dim() != 2 {
        return Err(CoreError::UnsupportedDirection(
            "the slicing check needs 2D fields".into(),
        ));
    }
    if axis > 1 {
        return Err(CoreError::UnsupportedDirection(format!(
            "slicing axis must be 0 or 1, got {axis}"
        )));
    }
    let g = u.grid();
    let ha = g.cell_volume();
    let wv = w.sample_on(g)?;
    let gu = grad_sq(u);
    let lhs_terms: Vec<f64> = v
        .samples()
        .iter()
        .zip(gu.iter())
        .zip(wv.samples())
        .map(|((&vi, &gui), &wi)| vi * vi * gui * wi * ha)
        .collect();
    let lhs = pairwise_sum(&lhs_terms);

    let dir = if axis == 0 {
        SliceDirection::XAxis
    } else {
        SliceDirection::YAxis
    };
    let line_count = if axis == 0 {
        g.axis(1).cells
    } else {
        g.axis(0).cells
    };
    let transverse_h = if axis == 0 {
        g.axis(1).spacing()
    } else {
        g.axis(0).spacing()
    };
    let mut line_sums = Vec::with_capacity(line_count);
    for line in 0..line_count {
        let (su, h) = slice_restrict(u, dir, line)?;
        let (sv, _) = slice_restrict(v, dir, line)?;
        let (sw, _) = slice_restrict(&wv, dir, line)?;
        let n = su.len();
        let mut acc = 0.0;
        for i in 0..n {
            let (lo, hi) = if i < n - 1 {
                (i, i + 1)
            } else {
                (n - 2, n - 1)
            };
            let d = (su[hi] - su[lo]) / h;
            acc += d * d * sv[i] * sv[i] * sw[i] * h;
        }
        line_sums.push(acc * transverse_h);
    }
    let rhs = pairwise_sum(&line_sums);
    Ok(SlicingCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-10,
    })
}

// ---------------------------------------------------------------------------
// Interval Hausdorff distance
// ---------------------------------------------------------------------------

/// Hausdorff distance between [a1, b1] and [a2, b2], capped at 1:
/// min(1, max(|a1 - a2|, |b1 - b2|)).
pub fn hausdorff_interval(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<f64> {
    if !(a1 <= b1) || !(a2 <= b2) {
        return Err(CoreError::Validation(format!(
            "inverted interval: [{a1}, {b1}] vs [{a2}, {b2}]"
        )));
    }
    Ok(1.0_f64.min((a1 - a2).abs().max((b1 - b2).abs())))
}
