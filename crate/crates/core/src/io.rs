//! Text artifacts: scalar-field CSV, 2D PGM (P2) with a min-max sidecar,
//! weight description files, piecewise-field files, and jump-set files.

use std::fs;
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::fields::{Axis, Grid, JumpSet, PiecewiseField, Poly1, Poly2, ScalarField, Segment};
use crate::weights::{build_partition_weight, WeightBox, WeightField};

fn parse_f64(tok: &str, what: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| CoreError::Parse(format!("bad number `{tok}` in {what}")))
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

// ---------------------------------------------------------------------------
// Scalar field CSV
// ---------------------------------------------------------------------------

/// Header: `grid:<dim>:<counts>:<bounds>`, counts joined by `x`, bounds
/// comma-separated; then one sample per line.
pub fn field_to_csv(f: &ScalarField) -> String {
    let g = f.grid();
    let counts = (0..g.dim())
        .map(|a| g.axis(a).cells.to_string())
        .collect::<Vec<_>>()
        .join("x");
    let bounds = g
        .bounds()
        .iter()
        .flat_map(|&(lo, hi)| [lo.to_string(), hi.to_string()])
        .collect::<Vec<_>>()
        .join(",");
    let mut out = format!("grid:{}:{}:{}\n", g.dim(), counts, bounds);
    for s in f.samples() {
        out.push_str(&s.to_string());
        out.push('\n');
    }
    out
}

pub fn field_from_csv(text: &str) -> Result<ScalarField> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse("empty field CSV".into()))?;
    let parts: Vec<&str> = header.trim().split(':').collect();
    if parts.len() != 4 || parts[0] != "grid" {
        return Err(CoreError::Parse(format!(
            "bad field header `{header}`, expected grid:<dim>:<counts>:<bounds>"
        )));
    }
    let dim: usize = parts[1]
        .parse()
        .map_err(|_| CoreError::Parse(format!("bad dimension `{}`", parts[1])))?;
    let counts: Vec<usize> = parts[2]
        .split('x')
        .map(|t| {
            t.parse()
                .map_err(|_| CoreError::Parse(format!("bad cell count `{t}`")))
        })
        .collect::<Result<_>>()?;
    let bounds: Vec<f64> = parts[3]
        .split(',')
        .map(|t| parse_f64(t, "field header bounds"))
        .collect::<Result<_>>()?;
    if counts.len() != dim || bounds.len() != 2 * dim {
        return Err(CoreError::Parse(format!(
            "header `{header}` has {} counts and {} bounds for dimension {dim}",
            counts.len(),
            bounds.len()
        )));
    }
    let axes: Vec<Axis> = (0..dim)
        .map(|a| Axis {
            lo: bounds[2 * a],
            hi: bounds[2 * a + 1],
            cells: counts[a],
        })
        .collect();
    let grid = Grid::new(axes)?;
    let mut samples = Vec::with_capacity(grid.total_cells());
    for line in lines {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        samples.push(parse_f64(t, "field sample")?);
    }
    ScalarField::new(grid, samples)
}

pub fn write_field_csv(f: &ScalarField, path: &Path) -> Result<()> {
    fs::write(path, field_to_csv(f))?;
    Ok(())
}

pub fn read_field_csv(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::Parse(format!("cannot read field file {}: {e}", path.display())))?;
    field_from_csv(&text)
}

// ---------------------------------------------------------------------------
// PGM (P2) with sidecar
// ---------------------------------------------------------------------------

const PGM_MAXVAL: u32 = 65535;

/// Renders a 2D field as ASCII PGM with linear min-max scaling; returns the
/// image text and the sidecar text recording the scaling and grid bounds.
/// Image rows run top to bottom (highest y first).
pub fn field_to_pgm(f: &ScalarField) -> Result<(String, String)> {
    let g = f.grid();
    if g.dim() != 2 {
        return Err(CoreError::Validation("PGM output needs a 2D field".into()));
    }
    let (nx, ny) = (g.axis(0).cells, g.axis(1).cells);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &s in f.samples() {
        lo = lo.min(s);
        hi = hi.max(s);
    }
    let span = hi - lo;
    let mut out = format!("P2\n# wams scalar field\n{nx} {ny}\n{PGM_MAXVAL}\n");
    for iy in (0..ny).rev() {
        let mut row = Vec::with_capacity(nx);
        for ix in 0..nx {
            let s = f.samples()[iy * nx + ix];
            let q = if span == 0.0 {
                0
            } else {
                ((s - lo) / span * PGM_MAXVAL as f64).round() as u32
            };
            row.push(q.min(PGM_MAXVAL).to_string());
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    let b = g.bounds();
    let sidecar = format!(
        "min {lo}\nmax {hi}\nmaxval {PGM_MAXVAL}\ndomain {} {} {} {}\nrow_order top_to_bottom\n",
        b[0].0, b[0].1, b[1].0, b[1].1
    );
    Ok((out, sidecar))
}

/// Writes the PGM and its sidecar (`<path>.txt`) to disk.
pub fn write_field_pgm(f: &ScalarField, path: &Path) -> Result<()> {
    let (pgm, sidecar) = field_to_pgm(f)?;
    fs::write(path, pgm)?;
    fs::write(path.with_extension("pgm.txt"), sidecar)?;
    Ok(())
}

/// Reads a P2 PGM written by `write_field_pgm`, undoing the scaling via the
/// sidecar.
pub fn read_field_pgm(path: &Path) -> Result<ScalarField> {
    let text = fs::read_to_string(path)
        .map_err(|e| CoreError::Parse(format!("cannot read PGM {}: {e}", path.display())))?;
    let sidecar_path = path.with_extension("pgm.txt");
    let sidecar = fs::read_to_string(&sidecar_path).map_err(|e| {
        CoreError::Parse(format!(
            "cannot read sidecar {}: {e}",
            sidecar_path.display()
        ))
    })?;
    let mut lo = None;
    let mut hi = None;
    let mut domain = None;
    for line in content_lines(&sidecar) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["min", v] => lo = Some(parse_f64(v, "sidecar min")?),
            ["max", v] => hi = Some(parse_f64(v, "sidecar max")?),
            ["domain", a, b, c, d] => {
                domain = Some([
                    (parse_f64(a, "domain")?, parse_f64(b, "domain")?),
                    (parse_f64(c, "domain")?, parse_f64(d, "domain")?),
                ])
            }
            _ => {}
        }
    }
    let (lo, hi, domain) = match (lo, hi, domain) {
        (Some(a), Some(b), Some(d)) => (a, b, d),
        _ => {
            return Err(CoreError::Parse(format!(
                "sidecar {} lacks min/max/domain",
                sidecar_path.display()
            )))
        }
    };
    // comments run to end of line
    let cleaned: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ");
    let mut toks = cleaned.split_whitespace();
    let magic = toks.next().unwrap_or("");
    if magic != "P2" {
        return Err(CoreError::Parse(format!(
            "not an ASCII PGM: magic `{magic}`"
        )));
    }
    let nx: usize = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CoreError::Parse("bad PGM width".into()))?;
    let ny: usize = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CoreError::Parse("bad PGM height".into()))?;
    let maxval: f64 = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| CoreError::Parse("bad PGM maxval".into()))?;
    let grid = Grid::rect(
        (domain[0].0, domain[0].1, nx),
        (domain[1].0, domain[1].1, ny),
    )?;
    let mut samples = vec![0.0; nx * ny];
    for iy_img in 0..ny {
        for ix in 0..nx {
            let q: f64 = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| CoreError::Parse("PGM pixel data truncated".into()))?;
            let iy = ny - 1 - iy_img;
            samples[iy * nx + ix] = if hi == lo {
                lo
            } else {
                lo + q / maxval * (hi - lo)
            };
        }
    }
    ScalarField::new(grid, samples)
}

// ---------------------------------------------------------------------------
// Weight file
// ---------------------------------------------------------------------------

/// One box per line: `x0 x1 alpha` (1D) or `x0 x1 y0 y1 alpha` (2D);
/// `#` starts a comment. The domain is the bounding box of the boxes.
pub fn weight_from_text(text: &str) -> Result<WeightField> {
    let mut boxes_1d: Vec<WeightBox> = Vec::new();
    let mut boxes_2d: Vec<WeightBox> = Vec::new();
    for line in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.len() {
            3 => boxes_1d.push(WeightBox::interval(
                parse_f64(toks[0], "weight box")?,
                parse_f64(toks[1], "weight box")?,
                parse_f64(toks[2], "weight box")?,
            )),
            5 => boxes_2d.push(WeightBox::rect(
                (
                    parse_f64(toks[0], "weight box")?,
                    parse_f64(toks[1], "weight box")?,
                ),
                (
                    parse_f64(toks[2], "weight box")?,
                    parse_f64(toks[3], "weight box")?,
                ),
                parse_f64(toks[4], "weight box")?,
            )),
            n => {
                return Err(CoreError::Parse(format!(
                    "weight line `{line}` has {n} fields, expected 3 (1D) or 5 (2D)"
                )))
            }
        }
    }
    if !boxes_1d.is_empty() && !boxes_2d.is_empty() {
        return Err(CoreError::Parse("weight file mixes 1D and 2D boxes".into()));
    }
    if !boxes_1d.is_empty() {
        let lo = boxes_1d
            .iter()
            .map(|b| b.lo[0])
            .fold(f64::INFINITY, f64::min);
        let hi = boxes_1d
            .iter()
            .map(|b| b.hi[0])
            .fold(f64::NEG_INFINITY, f64::max);
        build_partition_weight(boxes_1d, &[(lo, hi)])
    } else if !boxes_2d.is_empty() {
        let lx = boxes_2d
            .iter()
            .map(|b| b.lo[0])
            .fold(f64::INFINITY, f64::min);
        let hx = boxes_2d
            .iter()
            .map(|b| b.hi[0])
            .fold(f64::NEG_INFINITY, f64::max);
        let ly = boxes_2d
            .iter()
            .map(|b| b.lo[1])
            .fold(f64::INFINITY, f64::min);
        let hy = boxes_2d
            .iter()
            .map(|b| b.hi[1])
            .fold(f64::NEG_INFINITY, f64::max);
        build_partition_weight(boxes_2d, &[(lx, hx), (ly, hy)])
    } else {
        Err(CoreError::Parse("weight file has no boxes".into()))
    }
}

pub fn weight_to_text(w: &WeightField) -> String {
    let mut out = String::from("# wams weight field: one box per line\n");
    for b in w.boxes() {
        if w.dim() == 1 {
            out.push_str(&format!("{} {} {}\n", b.lo[0], b.hi[0], b.value));
        } else {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                b.lo[0], b.hi[0], b.lo[1], b.hi[1], b.value
            ));
        }
    }
    out
}

pub fn read_weight_file(path: &Path) -> Result<WeightField> {
    let text = fs::read_to_string(path).map_err(|e| {
        CoreError::Parse(format!("cannot read weight file {}: {e}", path.display()))
    })?;
    weight_from_text(&text)
}

pub fn write_weight_file(w: &WeightField, path: &Path) -> Result<()> {
    fs::write(path, weight_to_text(w))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Piecewise field file
// ---------------------------------------------------------------------------

/// 1D:
/// ```text
/// dim 1
/// domain -1 1
/// jump 0
/// piece 0
/// piece 1
/// ```
/// 2D (two pieces split by one segment; constants only):
/// ```text
/// dim 2
/// domain -1 1 -1 1
/// segment 0 -1 0 1 1 0
/// piece 0
/// piece 1
/// ```
pub fn piecewise_from_text(text: &str) -> Result<PiecewiseField> {
    let mut dim = None;
    let mut domain: Vec<f64> = Vec::new();
    let mut jumps: Vec<f64> = Vec::new();
    let mut segment: Option<Segment> = None;
    let mut pieces: Vec<Vec<f64>> = Vec::new();
    for line in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "dim" => {
                dim = Some(
                    toks.get(1)
                        .and_then(|t| t.parse::<usize>().ok())
                        .ok_or_else(|| CoreError::Parse(format!("bad dim line `{line}`")))?,
                )
            }
            "domain" => {
                domain = toks[1..]
                    .iter()
                    .map(|t| parse_f64(t, "piecewise domain"))
                    .collect::<Result<_>>()?
            }
            "jump" => jumps.push(parse_f64(
                toks.get(1)
                    .ok_or_else(|| CoreError::Parse("jump line without coordinate".into()))?,
                "jump",
            )?),
            "segment" => {
                if toks.len() != 7 {
                    return Err(CoreError::Parse(format!(
                        "segment line `{line}` needs 6 numbers"
                    )));
                }
                let v: Vec<f64> = toks[1..]
                    .iter()
                    .map(|t| parse_f64(t, "segment"))
                    .collect::<Result<_>>()?;
                segment = Some(Segment {
                    a: [v[0], v[1]],
                    b: [v[2], v[3]],
                    normal: [v[4], v[5]],
                });
            }
            "piece" => pieces.push(
                toks[1..]
                    .iter()
                    .map(|t| parse_f64(t, "piece"))
                    .collect::<Result<_>>()?,
            ),
            other => {
                return Err(CoreError::Parse(format!(
                    "unknown piecewise directive `{other}`"
                )))
            }
        }
    }
    match dim {
        Some(1) => {
            if domain.len() != 2 {
                return Err(CoreError::Parse("1D piecewise needs `domain lo hi`".into()));
            }
            let polys: Vec<Poly1> = pieces
                .iter()
                .map(|c| Poly1::from_coeffs(c))
                .collect::<Result<_>>()?;
            PiecewiseField::intervals((domain[0], domain[1]), jumps, polys)
        }
        Some(2) => {
            if domain.len() != 4 {
                return Err(CoreError::Parse(
                    "2D piecewise needs `domain x0 x1 y0 y1`".into(),
                ));
            }
            let dom = [(domain[0], domain[1]), (domain[2], domain[3])];
            if pieces.len() == 1 && segment.is_none() {
                if pieces[0].len() != 1 {
                    return Err(CoreError::Parse(
                        "constant 2D piece takes a single coefficient".into(),
                    ));
                }
                return PiecewiseField::constant_2d(dom, pieces[0][0]);
            }
            let seg = segment
                .ok_or_else(|| CoreError::Parse("2D piecewise needs a `segment` line".into()))?;
            if pieces.len() != 2 {
                return Err(CoreError::Parse(format!(
                    "2D piecewise needs 2 pieces, got {}",
                    pieces.len()
                )));
            }
            let to_poly = |c: &[f64]| -> Result<Poly2> {
                if c.len() != 1 {
                    return Err(CoreError::Parse(
                        "2D pieces support constant coefficients only".into(),
                    ));
                }
                Ok(Poly2::constant(c[0]))
            };
            PiecewiseField::half_plane_2d(
                dom,
                seg.midpoint(),
                seg.normal,
                to_poly(&pieces[0])?,
                to_poly(&pieces[1])?,
            )
        }
        _ => Err(CoreError::Parse("piecewise file lacks a `dim` line".into())),
    }
}

pub fn read_piecewise_file(path: &Path) -> Result<PiecewiseField> {
    let text = fs::read_to_string(path).map_err(|e| {
        CoreError::Parse(format!(
            "cannot read piecewise file {}: {e}",
            path.display()
        ))
    })?;
    piecewise_from_text(&text)
}

// ---------------------------------------------------------------------------
// Jump-set file
// ---------------------------------------------------------------------------

/// Lines with one number are 1D jump points; lines with six numbers are 2D
/// segments `ax ay bx by nx ny`.
pub fn jumpset_from_text(text: &str) -> Result<JumpSet> {
    let mut points = Vec::new();
    let mut segments = Vec::new();
    for line in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.len() {
            1 => points.push(parse_f64(toks[0], "jump point")?),
            6 => {
                let v: Vec<f64> = toks
                    .iter()
                    .map(|t| parse_f64(t, "segment"))
                    .collect::<Result<_>>()?;
                segments.push(Segment {
                    a: [v[0], v[1]],
                    b: [v[2], v[3]],
                    normal: [v[4], v[5]],
                });
            }
            n => {
                return Err(CoreError::Parse(format!(
                    "jump-set line `{line}` has {n} fields, expected 1 or 6"
                )))
            }
        }
    }
    if !points.is_empty() && !segments.is_empty() {
        return Err(CoreError::Parse(
            "jump-set file mixes points and segments".into(),
        ));
    }
    if !segments.is_empty() {
        JumpSet::segments(segments)
    } else {
        JumpSet::points(points)
    }
}

pub fn read_jumpset_file(path: &Path) -> Result<JumpSet> {
    let text = fs::read_to_string(path).map_err(|e| {
        CoreError::Parse(format!("cannot read jump-set file {}: {e}", path.display()))
    })?;
    jumpset_from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_csv_roundtrip_exact_1d() {
        let g = Grid::line(-1.0, 1.0, 9).unwrap();
        let f = ScalarField::from_fn_1d(g, |x| (x * 7.3).sin() / 3.0).unwrap();
        let back = field_from_csv(&field_to_csv(&f)).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn field_csv_roundtrip_exact_2d() {
        let g = Grid::rect((-2.0, 1.5, 6), (0.0, 1.0, 4)).unwrap();
        let f = ScalarField::from_fn_2d(g, |x, y| x * y + 0.123456789012345).unwrap();
        let back = field_from_csv(&field_to_csv(&f)).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn pgm_roundtrip_within_quantization() {
        let dir = std::env::temp_dir().join("wams_io_test_pgm");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.pgm");
        let g = Grid::rect((-1.0, 1.0, 8), (-1.0, 1.0, 5)).unwrap();
        let f = ScalarField::from_fn_2d(g, |x, y| x + 2.0 * y).unwrap();
        write_field_pgm(&f, &path).unwrap();
        let back = read_field_pgm(&path).unwrap();
        assert_eq!(back.grid(), f.grid());
        let span = 6.0;
        for (a, b) in f.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() <= span / PGM_MAXVAL as f64);
        }
    }

    #[test]
    fn weight_text_roundtrip() {
        let w = WeightField::step_1d((-1.0, 1.0), 0.0, 1.0, 3.0).unwrap();
        let back = weight_from_text(&weight_to_text(&w)).unwrap();
        assert_eq!(w, back);
        let w2 =
            WeightField::vertical_split_2d([(-1.0, 1.0), (-1.0, 1.0)], 0.25, 2.0, 5.0).unwrap();
        let back2 = weight_from_text(&weight_to_text(&w2)).unwrap();
        assert_eq!(w2, back2);
    }

    #[test]
    fn weight_text_rejects_garbage() {
        assert!(weight_from_text("1 2\n").is_err());
        assert!(weight_from_text("a b c\n").is_err());
        assert!(weight_from_text("").is_err());
    }

    #[test]
    fn piecewise_text_1d_step() {
        let p = piecewise_from_text("dim 1\ndomain -1 1\njump 0\npiece 0\npiece 1\n").unwrap();
        assert_eq!(p.value(&[-0.5]).unwrap(), 0.0);
        assert_eq!(p.value(&[0.5]).unwrap(), 1.0);
    }

    #[test]
    fn piecewise_text_2d_segment() {
        let p = piecewise_from_text(
            "dim 2\ndomain -1 1 -1 1\nsegment 0 -1 0 1 1 0\npiece 0\npiece 1\n",
        )
        .unwrap();
        assert_eq!(p.value(&[-0.5, 0.0]).unwrap(), 0.0);
        assert_eq!(p.value(&[0.5, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn jumpset_text_points_and_segments() {
        let js = jumpset_from_text("0.25\n-0.5\n").unwrap();
        assert_eq!(js.len(), 2);
        let js2 = jumpset_from_text("0 -1 0 1 1 0\n").unwrap();
        assert_eq!(js2.dim(), 2);
        assert!(jumpset_from_text("1 2 3\n").is_err());
    }
}
