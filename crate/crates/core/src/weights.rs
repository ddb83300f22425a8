//! Piecewise-constant SBV weights over axis-aligned box partitions:
//! evaluation through the approximate representative, one-sided traces, and
//! partition assembly for the bilevel scheme.

use crate::error::{CoreError, Result};
use crate::fields::{Grid, JumpSet, ScalarField, Segment};
use crate::sum::pairwise_sum;

/// Axis-aligned box with a positive constant weight value. In 1D only the
/// first axis interval is meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightBox {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub value: f64,
}

impl WeightBox {
    pub fn interval(lo: f64, hi: f64, value: f64) -> WeightBox {
        WeightBox {
            lo: [lo, 0.0],
            hi: [hi, 0.0],
            value,
        }
    }

    pub fn rect(x: (f64, f64), y: (f64, f64), value: f64) -> WeightBox {
        WeightBox {
            lo: [x.0, y.0],
            hi: [x.1, y.1],
            value,
        }
    }

    fn volume(&self, dim: usize) -> f64 {
        (0..dim).map(|a| self.hi[a] - self.lo[a]).product()
    }

    fn contains_closed(&self, p: &[f64], dim: usize) -> bool {
        (0..dim).all(|a| self.lo[a] <= p[a] && p[a] <= self.hi[a])
    }
}

/// Piecewise-constant weight with positive lower bound `l` and an explicit
/// derived jump set (shared faces between boxes of differing value).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    dim: usize,
    domain: Vec<(f64, f64)>,
    boxes: Vec<WeightBox>,
    jumps: JumpSet,
    lower: f64,
}

impl WeightField {
    /// Constant weight over the whole domain.
    pub fn constant_1d(domain: (f64, f64), value: f64) -> Result<WeightField> {
        build_partition_weight(
            vec![WeightBox::interval(domain.0, domain.1, value)],
            &[domain],
        )
    }

    pub fn constant_2d(domain: [(f64, f64); 2], value: f64) -> Result<WeightField> {
        build_partition_weight(vec![WeightBox::rect(domain[0], domain[1], value)], &domain)
    }

    /// 1D step weight: `left` on (lo, x0), `right` on (x0, hi).
    pub fn step_1d(domain: (f64, f64), x0: f64, left: f64, right: f64) -> Result<WeightField> {
        build_partition_weight(
            vec![
                WeightBox::interval(domain.0, x0, left),
                WeightBox::interval(x0, domain.1, right),
            ],
            &[domain],
        )
    }

    /// 2D weight split by the vertical line x = x0.
    pub fn vertical_split_2d(
        domain: [(f64, f64); 2],
        x0: f64,
        left: f64,
        right: f64,
    ) -> Result<WeightField> {
        build_partition_weight(
            vec![
                WeightBox::rect((domain[0].0, x0), domain[1], left),
                WeightBox::rect((x0, domain[0].1), domain[1], right),
            ],
            &domain,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn boxes(&self) -> &[WeightBox] {
        &self.boxes
    }

    pub fn jump_set(&self) -> &JumpSet {
        &self.jumps
    }

    /// Positive lower bound l = min over box values.
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// New weight with every value multiplied by `c > 0`; the jump set is
    /// unchanged.
    pub fn scaled(&self, c: f64) -> Result<WeightField> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(CoreError::Validation(format!(
                "weight scale factor must be positive and finite, got {c}"
            )));
        }
        let boxes = self
            .boxes
            .iter()
            .map(|b| WeightBox {
                lo: b.lo,
                hi: b.hi,
                value: b.value * c,
            })
            .collect();
        let domain: Vec<(f64, f64)> = self.domain.clone();
        build_partition_weight(boxes, &domain)
    }

    fn contains(&self, p: &[f64]) -> bool {
        self.domain
            .iter()
            .zip(p.iter())
            .all(|(&(lo, hi), &x)| lo <= x && x <= hi)
    }

    /// Value of the approximate representative: the box value in a box
    /// interior, the average of adjacent box values on a shared face.
    pub fn evaluate(&self, p: &[f64]) -> Result<f64> {
        if p.len() < self.dim || !self.contains(p) {
            return Err(CoreError::Domain(format!(
                "point {:?} lies outside the weight domain {:?}",
                p, self.domain
            )));
        }
        let hits: Vec<f64> = self
            .boxes
            .iter()
            .filter(|b| b.contains_closed(p, self.dim))
            .map(|b| b.value)
            .collect();
        if hits.is_empty() {
            return Err(CoreError::Partition(format!(
                "point {:?} is not covered by any weight box",
                p
            )));
        }
        Ok(pairwise_sum(&hits) / hits.len() as f64)
    }

    /// Box value strictly on the `dir` side of `p`: the unique box whose
    /// interior absorbs `p + t dir` for all small `t > 0`.
    pub fn value_on_side(&self, p: &[f64], dir: &[f64]) -> Result<f64> {
        if !self.contains(p) {
            return Err(CoreError::Domain(format!(
                "point {:?} lies outside the weight domain {:?}",
                p, self.domain
            )));
        }
        let mut found: Option<f64> = None;
        'boxes: for b in &self.boxes {
            if !b.contains_closed(p, self.dim) {
                continue;
            }
            for a in 0..self.dim {
                let on_lo = p[a] == b.lo[a];
                let on_hi = p[a] == b.hi[a];
                if (on_lo && dir[a] <= 0.0) || (on_hi && dir[a] >= 0.0) {
                    // moving along dir stays on (or exits through) this face
                    continue 'boxes;
                }
            }
            if found.is_some() {
                return Err(CoreError::Partition(
                    "overlapping boxes on one side of a face".into(),
                ));
            }
            found = Some(b.value);
        }
        found.ok_or_else(|| {
            CoreError::DegenerateGeometry(format!(
                "no box interior on side {:?} of {:?}: the direction is tangent to the jump set",
                dir, p
            ))
        })
    }

    /// One-sided traces at a jump point, ordered so that the first value is
    /// the lower trace: returns (omega_minus, omega_plus) = (min, max) of the
    /// two adjacent box values.
    pub fn traces(&self, p: &[f64], normal: &[f64]) -> Result<(f64, f64)> {
        let neg_dir: Vec<f64> = normal.iter().map(|v| -v).collect();
        let plus = self.value_on_side(p, normal)?;
        let minus = self.value_on_side(p, &neg_dir)?;
        if plus == minus {
            return Err(CoreError::Domain(format!(
                "point {:?} is not on the weight jump set (both sides = {plus})",
                p
            )));
        }
        Ok((plus.min(minus), plus.max(minus)))
    }

    /// Weight sampled at the cell centers of `g` (quadrature helper).
    pub fn sample_on(&self, g: &Grid) -> Result<ScalarField> {
        if g.dim() != self.dim || g.bounds().as_slice() != self.domain.as_slice() {
            return Err(CoreError::Domain(format!(
                "grid domain {:?} does not match weight domain {:?}",
                g.bounds(),
                self.domain
            )));
        }
        let mut samples = Vec::with_capacity(g.total_cells());
        match self.dim {
            1 => {
                for x in g.axis(0).centers() {
                    samples.push(self.evaluate(&[x])?);
                }
            }
            _ => {
                let xs = g.axis(0).centers();
                let ys = g.axis(1).centers();
                for &y in &ys {
                    for &x in &xs {
                        samples.push(self.evaluate(&[x, y])?);
                    }
                }
            }
        }
        ScalarField::new(g.clone(), samples)
    }
}

/// Assembles a weight field from a box partition of `domain`. Boxes must be
/// mutually disjoint, cover the domain, and carry positive values; the jump
/// set collects shared faces between boxes of differing value.
pub fn build_partition_weight(boxes: Vec<WeightBox>, domain: &[(f64, f64)]) -> Result<WeightField> {
    let dim = domain.len();
    if dim == 0 || dim > 2 {
        return Err(CoreError::Validation(format!(
            "weight domain dimension must be 1 or 2, got {dim}"
        )));
    }
    for &(lo, hi) in domain {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(CoreError::Validation(format!(
                "weight domain bounds must be finite with lo < hi, got ({lo}, {hi})"
            )));
        }
    }
    if boxes.is_empty() {
        return Err(CoreError::Partition("weight partition has no boxes".into()));
    }
    for b in &boxes {
        if !(b.value > 0.0) || !b.value.is_finite() {
            return Err(CoreError::Validation(format!(
                "weight value {} violates the positive lower bound",
                b.value
            )));
        }
        for a in 0..dim {
            if !(b.lo[a] < b.hi[a]) {
                return Err(CoreError::Partition(format!(
                    "degenerate box extent [{}, {}] on axis {a}",
                    b.lo[a], b.hi[a]
                )));
            }
            if b.lo[a] < domain[a].0 - 1e-12 || b.hi[a] > domain[a].1 + 1e-12 {
                return Err(CoreError::Partition(format!(
                    "box [{}, {}] leaves the domain on axis {a}",
                    b.lo[a], b.hi[a]
                )));
            }
        }
    }
    // pairwise interior disjointness
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let overlap = (0..dim)
                .all(|a| boxes[i].lo[a] < boxes[j].hi[a] && boxes[j].lo[a] < boxes[i].hi[a]);
            if overlap {
                return Err(CoreError::Partition(format!(
                    "boxes {i} and {j} have overlapping interiors"
                )));
            }
        }
    }
    // coverage by volume
    let dom_vol: f64 = domain.iter().map(|&(lo, hi)| hi - lo).product();
    let box_vol: f64 = boxes.iter().map(|b| b.volume(dim)).sum();
    if (box_vol - dom_vol).abs() > 1e-9 * dom_vol {
        return Err(CoreError::Partition(format!(
            "boxes cover volume {box_vol}, domain volume is {dom_vol} (gap or spill)"
        )));
    }
    let lower = boxes.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
    let jumps = derive_jump_set(&boxes, dim)?;
    Ok(WeightField {
        dim,
        domain: domain.to_vec(),
        boxes,
        jumps,
        lower,
    })
}

fn derive_jump_set(boxes: &[WeightBox], dim: usize) -> Result<JumpSet> {
    if dim == 1 {
        let mut pts = Vec::new();
        for i in 0..boxes.len() {
            for j in 0..boxes.len() {
                if i != j && boxes[i].hi[0] == boxes[j].lo[0] && boxes[i].value != boxes[j].value {
                    pts.push(boxes[i].hi[0]);
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        return Ok(JumpSet::Points(pts));
    }
    let mut segs: Vec<Segment> = Vec::new();
    for i in 0..boxes.len() {
        for j in 0..boxes.len() {
            if i == j || boxes[i].value == boxes[j].value {
                continue;
            }
            // face normal to x: i touching j on its right
            if boxes[i].hi[0] == boxes[j].lo[0] {
                let lo = boxes[i].lo[1].max(boxes[j].lo[1]);
                let hi = boxes[i].hi[1].min(boxes[j].hi[1]);
                if lo < hi {
                    segs.push(Segment {
                        a: [boxes[i].hi[0], lo],
                        b: [boxes[i].hi[0], hi],
                        normal: [1.0, 0.0],
                    });
                }
            }
            // face normal to y: i touching j above
            if boxes[i].hi[1] == boxes[j].lo[1] {
                let lo = boxes[i].lo[0].max(boxes[j].lo[0]);
                let hi = boxes[i].hi[0].min(boxes[j].hi[0]);
                if lo < hi {
                    segs.push(Segment {
                        a: [lo, boxes[i].hi[1]],
                        b: [hi, boxes[i].hi[1]],
                        normal: [0.0, 1.0],
                    });
                }
            }
        }
    }
    // deterministic order
    segs.sort_by(|p, q| {
        p.a.partial_cmp(&q.a)
            .unwrap()
            .then(p.b.partial_cmp(&q.b).unwrap())
    });
    JumpSet::segments(segs)
}

/// Discrete weighted L2 inner product <f, g>_w = sum f g w h^N over cells.
pub fn weighted_inner_product(f: &ScalarField, g: &ScalarField, w: &WeightField) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(CoreError::Domain("fields live on different grids".into()));
    }
    let wf = w.sample_on(f.grid())?;
    let ha = f.grid().cell_volume();
    let terms: Vec<f64> = f
        .samples()
        .iter()
        .zip(g.samples())
        .zip(wf.samples())
        .map(|((&a, &b), &ww)| a * b * ww * ha)
        .collect();
    Ok(pairwise_sum(&terms))
}
