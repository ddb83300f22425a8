//! Grids, grid-sampled scalar fields, jump-set geometry, and piecewise
//! polynomial field descriptions.
//!
//! Everything here is immutable after construction; the operations are pure
//! functions and safe to call from multiple threads.

use crate::error::{CoreError, Result};

/// Hard cap on the total cell count of a grid.
pub const MAX_TOTAL_CELLS: usize = 1 << 24;

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// One axis of a cell-centered uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }

    /// Center of cell `i` on this axis.
    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.spacing()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    fn validate(&self) -> Result<()> {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo >= self.hi {
            return Err(CoreError::Validation(format!(
                "axis bounds must be finite with lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        if self.cells < 2 {
            return Err(CoreError::Validation(format!(
                "axis needs at least 2 cells, got {}",
                self.cells
            )));
        }
        Ok(())
    }
}

/// Cell-centered uniform grid over a 1D interval or 2D rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn line(lo: f64, hi: f64, cells: usize) -> Result<Grid> {
        Grid::new(vec![Axis { lo, hi, cells }])
    }

    pub fn rect(x: (f64, f64, usize), y: (f64, f64, usize)) -> Result<Grid> {
        Grid::new(vec![
            Axis {
                lo: x.0,
                hi: x.1,
                cells: x.2,
            },
            Axis {
                lo: y.0,
                hi: y.1,
                cells: y.2,
            },
        ])
    }

    pub fn new(axes: Vec<Axis>) -> Result<Grid> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(CoreError::Validation(format!(
                "grid dimension must be 1 or 2, got {}",
                axes.len()
            )));
        }
        let mut total: usize = 1;
        for ax in &axes {
            ax.validate()?;
            total = total
                .checked_mul(ax.cells)
                .ok_or_else(|| CoreError::Validation("grid cell count overflows".into()))?;
        }
        if total > MAX_TOTAL_CELLS {
            return Err(CoreError::Validation(format!(
                "grid has {} cells, cap is {}",
                total, MAX_TOTAL_CELLS
            )));
        }
        Ok(Grid { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn total_cells(&self) -> usize {
        self.axes.iter().map(|a| a.cells).product()
    }

    /// Domain bounds, one `(lo, hi)` pair per axis.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.lo, a.hi)).collect()
    }

    /// Cell volume h^N.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing()).product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.spacing())
            .fold(f64::MIN, f64::max)
    }

    /// Flat index of a cell, row-major in 2D (`iy * nx + ix`).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        match self.dim() {
            1 => ix,
            _ => iy * self.axes[0].cells + ix,
        }
    }

    /// Cell center as `[x, y]`; the second entry is 0 in 1D.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        match self.dim() {
            1 => [self.axes[0].center(idx), 0.0],
            _ => {
                let nx = self.axes[0].cells;
                [self.axes[0].center(idx % nx), self.axes[1].center(idx / nx)]
            }
        }
    }

    /// Start offsets and strides of all grid lines parallel to `axis`.
    /// Each line has `axis(axis).cells` entries spaced by the stride.
    pub fn lines(&self, axis: usize) -> Vec<(usize, usize)> {
        match (self.dim(), axis) {
            (1, 0) => vec![(0, 1)],
            (2, 0) => {
                let nx = self.axes[0].cells;
                (0..self.axes[1].cells).map(|iy| (iy * nx, 1)).collect()
            }
            (2, 1) => {
                let nx = self.axes[0].cells;
                (0..nx).map(|ix| (ix, nx)).collect()
            }
            _ => vec![],
        }
    }
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

/// Grid-sampled real-valued function; one sample per cell, row-major in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    samples: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, samples: Vec<f64>) -> Result<ScalarField> {
        if samples.len() != grid.total_cells() {
            return Err(CoreError::Validation(format!(
                "sample count {} does not match grid cell count {}",
                samples.len(),
                grid.total_cells()
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(CoreError::Validation(format!(
                "non-finite sample {bad} in scalar field"
            )));
        }
        Ok(ScalarField { grid, samples })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<ScalarField> {
        let n = grid.total_cells();
        ScalarField::new(grid, vec![c; n])
    }

    pub fn from_fn_1d(grid: Grid, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        debug_assert_eq!(grid.dim(), 1);
        let samples = grid.axis(0).centers().iter().map(|&x| f(x)).collect();
        ScalarField::new(grid, samples)
    }

    pub fn from_fn_2d(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        debug_assert_eq!(grid.dim(), 2);
        let xs = grid.axis(0).centers();
        let ys = grid.axis(1).centers();
        let mut samples = Vec::with_capacity(grid.total_cells());
        for &y in &ys {
            for &x in &xs {
                samples.push(f(x, y));
            }
        }
        ScalarField::new(grid, samples)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_parts(self) -> (Grid, Vec<f64>) {
        (self.grid, self.samples)
    }
}

/// Forward differences in the interior, one-sided at the upper boundary.
/// Returns one component field per axis; exact for affine fields.
pub fn gradient(f: &ScalarField) -> Vec<ScalarField> {
    let g = f.grid();
    let mut out = Vec::with_capacity(g.dim());
    for axis in 0..g.dim() {
        let h = g.axis(axis).spacing();
        let n = g.axis(axis).cells;
        let mut comp = vec![0.0; f.samples().len()];
        for (offset, stride) in g.lines(axis) {
            for i in 0..n {
                let (lo, hi) = if i < n - 1 {
                    (i, i + 1)
                } else {
                    (n - 2, n - 1)
                };
                let a = f.samples()[offset + lo * stride];
                let b = f.samples()[offset + hi * stride];
                comp[offset + i * stride] = (b - a) / h;
            }
        }
        out.push(ScalarField {
            grid: g.clone(),
            samples: comp,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// JumpSet
// ---------------------------------------------------------------------------

/// Oriented 2D segment with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub normal: [f64; 2],
}

impl Segment {
    pub fn length(&self) -> f64 {
        ((self.b[0] - self.a[0]).powi(2) + (self.b[1] - self.a[1]).powi(2)).sqrt()
    }

    pub fn midpoint(&self) -> [f64; 2] {
        [0.5 * (self.a[0] + self.b[0]), 0.5 * (self.a[1] + self.b[1])]
    }

    /// Point at parameter `t` in [0, 1].
    pub fn point_at(&self, t: f64) -> [f64; 2] {
        [
            self.a[0] + t * (self.b[0] - self.a[0]),
            self.a[1] + t * (self.b[1] - self.a[1]),
        ]
    }

    fn validate(&self) -> Result<()> {
        let len = self.length();
        if !len.is_finite() || len == 0.0 {
            return Err(CoreError::Validation(
                "segment endpoints must be distinct and finite".into(),
            ));
        }
        let nn = (self.normal[0].powi(2) + self.normal[1].powi(2)).sqrt();
        if (nn - 1.0).abs() > 1e-12 {
            return Err(CoreError::Validation(format!(
                "segment normal has length {nn}, must be unit within 1e-12"
            )));
        }
        let dir = [(self.b[0] - self.a[0]) / len, (self.b[1] - self.a[1]) / len];
        let tangential = dir[0] * self.normal[0] + dir[1] * self.normal[1];
        if tangential.abs() > 1e-9 {
            return Err(CoreError::Validation(format!(
                "segment normal is not perpendicular to the segment (dot {tangential:.2e})"
            )));
        }
        Ok(())
    }
}

/// Explicit discontinuity description: points in 1D, oriented segments in 2D.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpSet {
    Points(Vec<f64>),
    Segments(Vec<Segment>),
}

impl JumpSet {
    pub fn points(mut pts: Vec<f64>) -> Result<JumpSet> {
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in pts.windows(2) {
            if w[0] == w[1] {
                return Err(CoreError::Validation(format!(
                    "duplicate jump coordinate {}",
                    w[0]
                )));
            }
        }
        if pts.iter().any(|p| !p.is_finite()) {
            return Err(CoreError::Validation("non-finite jump coordinate".into()));
        }
        Ok(JumpSet::Points(pts))
    }

    pub fn segments(segs: Vec<Segment>) -> Result<JumpSet> {
        for s in &segs {
            s.validate()?;
        }
        Ok(JumpSet::Segments(segs))
    }

    pub fn dim(&self) -> usize {
        match self {
            JumpSet::Points(_) => 1,
            JumpSet::Segments(_) => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            JumpSet::Points(p) => p.is_empty(),
            JumpSet::Segments(s) => s.is_empty(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            JumpSet::Points(p) => p.len(),
            JumpSet::Segments(s) => s.len(),
        }
    }

    /// Euclidean distance from `p` to the set (brute force over elements).
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self {
            JumpSet::Points(pts) => pts
                .iter()
                .map(|&x| (p[0] - x).abs())
                .fold(f64::INFINITY, f64::min),
            JumpSet::Segments(segs) => segs
                .iter()
                .map(|s| point_segment_distance(p, s))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

fn point_segment_distance(p: &[f64], s: &Segment) -> f64 {
    let dx = s.b[0] - s.a[0];
    let dy = s.b[1] - s.a[1];
    let len2 = dx * dx + dy * dy;
    let t = (((p[0] - s.a[0]) * dx + (p[1] - s.a[1]) * dy) / len2).clamp(0.0, 1.0);
    let cx = s.a[0] + t * dx;
    let cy = s.a[1] + t * dy;
    ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt()
}

// ---------------------------------------------------------------------------
// Polynomials (piece descriptors, degree <= 3)
// ---------------------------------------------------------------------------

pub const MAX_PIECE_DEGREE: usize = 3;

/// Univariate polynomial c0 + c1 x + c2 x^2 + c3 x^3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly1 {
    pub c: [f64; 4],
}

impl Poly1 {
    pub fn constant(v: f64) -> Poly1 {
        Poly1 {
            c: [v, 0.0, 0.0, 0.0],
        }
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Result<Poly1> {
        if coeffs.is_empty() || coeffs.len() > 4 {
            return Err(CoreError::Validation(format!(
                "piece polynomial needs 1..=4 coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::Validation(
                "non-finite polynomial coefficient".into(),
            ));
        }
        let mut c = [0.0; 4];
        c[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Poly1 { c })
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.c[3] * x + self.c[2]) * x + self.c[1]) * x + self.c[0]
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1 {
            c: [self.c[1], 2.0 * self.c[2], 3.0 * self.c[3], 0.0],
        }
    }
}

/// Bivariate polynomial, coefficients `c[i][j]` of x^i y^j with i + j <= 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly2 {
    pub c: [[f64; 4]; 4],
}

impl Poly2 {
    pub fn zero() -> Poly2 {
        Poly2 { c: [[0.0; 4]; 4] }
    }

    pub fn constant(v: f64) -> Poly2 {
        let mut p = Poly2::zero();
        p.c[0][0] = v;
        p
    }

    /// x^i y^j term.
    pub fn monomial(i: usize, j: usize, coeff: f64) -> Result<Poly2> {
        if i + j > MAX_PIECE_DEGREE {
            return Err(CoreError::Validation(format!(
                "monomial degree {} exceeds cap {}",
                i + j,
                MAX_PIECE_DEGREE
            )));
        }
        let mut p = Poly2::zero();
        p.c[i][j] = coeff;
        Ok(p)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let xs = [1.0, x, x * x, x * x * x];
        let ys = [1.0, y, y * y, y * y * y];
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 - i {
                if self.c[i][j] != 0.0 {
                    acc += self.c[i][j] * xs[i] * ys[j];
                }
            }
        }
        acc
    }

    pub fn degree(&self) -> usize {
        let mut d = 0;
        for i in 0..4 {
            for j in 0..4 - i {
                if self.c[i][j] != 0.0 {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for i in 0..4 {
            for j in 0..4 {
                out.c[i][j] = self.c[i][j] + other.c[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        let mut out = *self;
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Product; the total degree of the result must stay within the cap.
    pub fn mul(&self, other: &Poly2) -> Result<Poly2> {
        if self.degree() + other.degree() > MAX_PIECE_DEGREE {
            return Err(CoreError::Validation(
                "polynomial product exceeds the degree cap".into(),
            ));
        }
        let mut out = Poly2::zero();
        for i in 0..4 {
            for j in 0..4 - i {
                if self.c[i][j] == 0.0 {
                    continue;
                }
                for k in 0..4 {
                    for l in 0..4 - k {
                        if other.c[k][l] == 0.0 {
                            continue;
                        }
                        out.c[i + k][j + l] += self.c[i][j] * other.c[k][l];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn partial_x(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for i in 1..4 {
            for j in 0..4 - i {
                out.c[i - 1][j] = self.c[i][j] * i as f64;
            }
        }
        out
    }

    pub fn partial_y(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for i in 0..4 {
            for j in 1..4 - i {
                out.c[i][j - 1] = self.c[i][j] * j as f64;
            }
        }
        out
    }

    /// Composition with the affine map (x, y) -> (m00 x + m01 y + t0,
    /// m10 x + m11 y + t1). Affine substitution preserves the total degree.
    pub fn compose_affine(&self, m: [[f64; 2]; 2], t: [f64; 2]) -> Poly2 {
        let lin_x = {
            let mut p = Poly2::zero();
            p.c[0][0] = t[0];
            p.c[1][0] = m[0][0];
            p.c[0][1] = m[0][1];
            p
        };
        let lin_y = {
            let mut p = Poly2::zero();
            p.c[0][0] = t[1];
            p.c[1][0] = m[1][0];
            p.c[0][1] = m[1][1];
            p
        };
        // powers of the two linear forms, built within the degree cap
        let mut xp = [Poly2::constant(1.0); 4];
        let mut yp = [Poly2::constant(1.0); 4];
        for k in 1..4 {
            xp[k] = xp[k - 1].mul(&lin_x).unwrap_or(Poly2::zero());
            yp[k] = yp[k - 1].mul(&lin_y).unwrap_or(Poly2::zero());
        }
        let mut out = Poly2::zero();
        for i in 0..4 {
            for j in 0..4 - i {
                if self.c[i][j] == 0.0 {
                    continue;
                }
                let term = xp[i].mul(&yp[j]).expect("degree preserved by affine map");
                out = out.add(&term.scale(self.c[i][j]));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// PiecewiseField
// ---------------------------------------------------------------------------

/// Closed half-plane `x . normal >= offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl HalfPlane {
    pub fn signed(&self, p: [f64; 2]) -> f64 {
        p[0] * self.normal[0] + p[1] * self.normal[1] - self.offset
    }
}

/// Convex region (intersection of half-planes) carrying one polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece2 {
    pub constraints: Vec<HalfPlane>,
    pub poly: Poly2,
}

impl Piece2 {
    /// Smallest signed constraint value; >= 0 means the point is inside.
    pub fn margin(&self, p: [f64; 2]) -> f64 {
        self.constraints
            .iter()
            .map(|h| h.signed(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PieceLayout {
    /// 1D: `pieces.len() == jumps.len() + 1`, jumps sorted strictly interior.
    Intervals { jumps: Vec<f64>, pieces: Vec<Poly1> },
    /// 2D: two global pieces split by the line through `point` normal to
    /// `normal`; `neg` on the side with (x - point) . normal < 0.
    HalfPlane2 {
        point: [f64; 2],
        normal: [f64; 2],
        neg: Poly2,
        pos: Poly2,
    },
    /// 2D: general convex-region partition with an explicit jump list.
    Regions {
        pieces: Vec<Piece2>,
        jumps: Vec<Segment>,
    },
}

/// Piecewise-smooth function with an explicit jump set; pieces are
/// polynomials up to degree 3, so one-sided limits are exact.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField {
    domain: Vec<(f64, f64)>,
    layout: PieceLayout,
}

impl PiecewiseField {
    pub fn constant_1d(domain: (f64, f64), value: f64) -> Result<PiecewiseField> {
        PiecewiseField::intervals(domain, vec![], vec![Poly1::constant(value)])
    }

    /// Step with `left` on (lo, x0) and `right` on (x0, hi).
    pub fn step_1d(domain: (f64, f64), x0: f64, left: f64, right: f64) -> Result<PiecewiseField> {
        PiecewiseField::intervals(
            domain,
            vec![x0],
            vec![Poly1::constant(left), Poly1::constant(right)],
        )
    }

    pub fn intervals(
        domain: (f64, f64),
        jumps: Vec<f64>,
        pieces: Vec<Poly1>,
    ) -> Result<PiecewiseField> {
        validate_domain_1d(domain)?;
        let mut sorted = jumps.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted != jumps {
            return Err(CoreError::Validation(
                "jump coordinates must be sorted".into(),
            ));
        }
        for w in jumps.windows(2) {
            if w[0] == w[1] {
                return Err(CoreError::Validation(format!("duplicate jump at {}", w[0])));
            }
        }
        for &j in &jumps {
            if !(domain.0 < j && j < domain.1) {
                return Err(CoreError::Validation(format!(
                    "jump {} is not strictly interior to ({}, {})",
                    j, domain.0, domain.1
                )));
            }
        }
        if pieces.len() != jumps.len() + 1 {
            return Err(CoreError::Validation(format!(
                "{} pieces do not partition around {} jumps",
                pieces.len(),
                jumps.len()
            )));
        }
        for (k, &j) in jumps.iter().enumerate() {
            if pieces[k].eval(j) == pieces[k + 1].eval(j) {
                return Err(CoreError::Validation(format!(
                    "declared jump at {} has equal one-sided limits",
                    j
                )));
            }
        }
        Ok(PiecewiseField {
            domain: vec![domain],
            layout: PieceLayout::Intervals { jumps, pieces },
        })
    }

    pub fn constant_2d(domain: [(f64, f64); 2], value: f64) -> Result<PiecewiseField> {
        validate_domain_2d(domain)?;
        Ok(PiecewiseField {
            domain: domain.to_vec(),
            layout: PieceLayout::Regions {
                pieces: vec![Piece2 {
                    constraints: vec![],
                    poly: Poly2::constant(value),
                }],
                jumps: vec![],
            },
        })
    }

    /// Two pieces split by the line through `point` with unit normal
    /// `normal`; `neg` where (x - point) . normal < 0.
    pub fn half_plane_2d(
        domain: [(f64, f64); 2],
        point: [f64; 2],
        normal: [f64; 2],
        neg: Poly2,
        pos: Poly2,
    ) -> Result<PiecewiseField> {
        validate_domain_2d(domain)?;
        let nn = (normal[0].powi(2) + normal[1].powi(2)).sqrt();
        if (nn - 1.0).abs() > 1e-12 {
            return Err(CoreError::Validation(format!(
                "split normal has length {nn}, must be unit within 1e-12"
            )));
        }
        if neg == pos {
            return Err(CoreError::Validation(
                "the two half-plane pieces are identical; no jump".into(),
            ));
        }
        if clip_line_to_rect(point, normal, domain).is_none() {
            return Err(CoreError::Validation(
                "split line does not cross the domain interior".into(),
            ));
        }
        Ok(PiecewiseField {
            domain: domain.to_vec(),
            layout: PieceLayout::HalfPlane2 {
                point,
                normal,
                neg,
                pos,
            },
        })
    }

    /// Vertical step: `left` for x < x0, `right` for x > x0.
    pub fn vertical_step_2d(
        domain: [(f64, f64); 2],
        x0: f64,
        left: f64,
        right: f64,
    ) -> Result<PiecewiseField> {
        PiecewiseField::half_plane_2d(
            domain,
            [x0, 0.5 * (domain[1].0 + domain[1].1)],
            [1.0, 0.0],
            Poly2::constant(left),
            Poly2::constant(right),
        )
    }

    pub(crate) fn from_regions(
        domain: [(f64, f64); 2],
        pieces: Vec<Piece2>,
        jumps: Vec<Segment>,
    ) -> Result<PiecewiseField> {
        validate_domain_2d(domain)?;
        if pieces.is_empty() {
            return Err(CoreError::Validation(
                "region layout needs at least one piece".into(),
            ));
        }
        Ok(PiecewiseField {
            domain: domain.to_vec(),
            layout: PieceLayout::Regions { pieces, jumps },
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn layout(&self) -> &PieceLayout {
        &self.layout
    }

    /// Explicit jump set of the field.
    pub fn jump_set(&self) -> JumpSet {
        match &self.layout {
            PieceLayout::Intervals { jumps, .. } => JumpSet::Points(jumps.clone()),
            PieceLayout::HalfPlane2 { point, normal, .. } => {
                let dom = [self.domain[0], self.domain[1]];
                match clip_line_to_rect(*point, *normal, dom) {
                    Some((a, b)) => JumpSet::Segments(vec![Segment {
                        a,
                        b,
                        normal: *normal,
                    }]),
                    None => JumpSet::Segments(vec![]),
                }
            }
            PieceLayout::Regions { jumps, .. } => JumpSet::Segments(jumps.clone()),
        }
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.domain
            .iter()
            .zip(p.iter())
            .all(|(&(lo, hi), &x)| lo <= x && x <= hi)
    }

    /// One-sided value of a 1D field: the limit from the right (`side > 0`)
    /// or from the left (`side < 0`). Equals `value` away from the jumps.
    pub fn value_side(&self, x: f64, side: i8) -> Result<f64> {
        if self.dim() != 1 {
            return Err(CoreError::Validation(
                "one-sided evaluation is defined for 1D fields".into(),
            ));
        }
        if !self.contains(&[x]) {
            return Err(CoreError::Domain(format!(
                "point {x} lies outside the field domain {:?}",
                self.domain
            )));
        }
        match &self.layout {
            PieceLayout::Intervals { jumps, pieces } => {
                if let Ok(k) = jumps.binary_search_by(|j| j.partial_cmp(&x).unwrap()) {
                    let idx = if side > 0 { k + 1 } else { k };
                    return Ok(pieces[idx].eval(x));
                }
                let k = jumps.partition_point(|&j| j < x);
                Ok(pieces[k].eval(x))
            }
            _ => unreachable!("1D fields use the interval layout"),
        }
    }

    /// Pointwise value; exactly on a jump this is the average of the
    /// one-sided limits (the approximate representative).
    pub fn value(&self, p: &[f64]) -> Result<f64> {
        if !self.contains(p) {
            return Err(CoreError::Domain(format!(
                "point {:?} lies outside the field domain {:?}",
                p, self.domain
            )));
        }
        match &self.layout {
            PieceLayout::Intervals { jumps, pieces } => {
                let x = p[0];
                if let Ok(k) = jumps.binary_search_by(|j| j.partial_cmp(&x).unwrap()) {
                    return Ok(0.5 * (pieces[k].eval(x) + pieces[k + 1].eval(x)));
                }
                let k = jumps.partition_point(|&j| j < x);
                Ok(pieces[k].eval(x))
            }
            PieceLayout::HalfPlane2 {
                point,
                normal,
                neg,
                pos,
            } => {
                let s = (p[0] - point[0]) * normal[0] + (p[1] - point[1]) * normal[1];
                if s > 0.0 {
                    Ok(pos.eval(p[0], p[1]))
                } else if s < 0.0 {
                    Ok(neg.eval(p[0], p[1]))
                } else {
                    Ok(0.5 * (neg.eval(p[0], p[1]) + pos.eval(p[0], p[1])))
                }
            }
            PieceLayout::Regions { pieces, .. } => {
                let q = [p[0], p[1]];
                let mut on_boundary: Vec<&Piece2> = Vec::new();
                for piece in pieces {
                    let m = piece.margin(q);
                    if m > 0.0 {
                        return Ok(piece.poly.eval(q[0], q[1]));
                    }
                    if m == 0.0 {
                        on_boundary.push(piece);
                    }
                }
                if on_boundary.is_empty() {
                    return Err(CoreError::Domain(format!(
                        "point {:?} is not covered by any piece",
                        p
                    )));
                }
                let sum: f64 = on_boundary.iter().map(|pc| pc.poly.eval(q[0], q[1])).sum();
                Ok(sum / on_boundary.len() as f64)
            }
        }
    }
}

fn validate_domain_1d(domain: (f64, f64)) -> Result<()> {
    if !domain.0.is_finite() || !domain.1.is_finite() || domain.0 >= domain.1 {
        return Err(CoreError::Validation(format!(
            "domain bounds must be finite with lo < hi, got ({}, {})",
            domain.0, domain.1
        )));
    }
    Ok(())
}

fn validate_domain_2d(domain: [(f64, f64); 2]) -> Result<()> {
    for &(lo, hi) in &domain {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(CoreError::Validation(format!(
                "domain bounds must be finite with lo < hi, got ({lo}, {hi})"
            )));
        }
    }
    Ok(())
}

/// Clips the line `{x : (x - point) . normal = 0}` to a rectangle; returns
/// the chord endpoints, or None when the chord is empty.
pub fn clip_line_to_rect(
    point: [f64; 2],
    normal: [f64; 2],
    rect: [(f64, f64); 2],
) -> Option<([f64; 2], [f64; 2])> {
    let dir = [-normal[1], normal[0]];
    let mut tmin = f64::NEG_INFINITY;
    let mut tmax = f64::INFINITY;
    for axis in 0..2 {
        let (lo, hi) = rect[axis];
        if dir[axis].abs() < 1e-300 {
            if point[axis] < lo || point[axis] > hi {
                return None;
            }
        } else {
            let t0 = (lo - point[axis]) / dir[axis];
            let t1 = (hi - point[axis]) / dir[axis];
            let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            tmin = tmin.max(t0);
            tmax = tmax.min(t1);
        }
    }
    if tmin >= tmax {
        return None;
    }
    Some((
        [point[0] + tmin * dir[0], point[1] + tmin * dir[1]],
        [point[0] + tmax * dir[0], point[1] + tmax * dir[1]],
    ))
}

/// Cell-centered samples of a piecewise field. A center that lands exactly
/// on a jump gets the average of the two one-sided limits.
pub fn sample(p: &PiecewiseField, g: &Grid) -> Result<ScalarField> {
    if p.dim() != g.dim() || p.domain() != g.bounds().as_slice() {
        return Err(CoreError::Domain(format!(
            "grid domain {:?} does not match field domain {:?}",
            g.bounds(),
            p.domain()
        )));
    }
    match g.dim() {
        1 => {
            let mut samples = Vec::with_capacity(g.total_cells());
            for x in g.axis(0).centers() {
                samples.push(p.value(&[x])?);
            }
            ScalarField::new(g.clone(), samples)
        }
        _ => {
            let xs = g.axis(0).centers();
            let ys = g.axis(1).centers();
            let mut samples = Vec::with_capacity(g.total_cells());
            for &y in &ys {
                for &x in &xs {
                    samples.push(p.value(&[x, y])?);
                }
            }
            ScalarField::new(g.clone(), samples)
        }
    }
}
