//! Explicit near-optimal recovery constructions: the 1D transition profile,
//! recovery pairs for continuous and jumping weights, the multi-D profile
//! composed with a distance field, and the single-cube reflection primitive.

use crate::error::{CoreError, Result};
use crate::fields::{
    clip_line_to_rect, Grid, HalfPlane, JumpSet, Piece2, PieceLayout, PiecewiseField, ScalarField,
    Segment,
};

// ---------------------------------------------------------------------------
// Transition profile
// ---------------------------------------------------------------------------

/// Transition profile v0 on [0, T] with v0(0) = 0, v0(T) = 1 whose
/// (1-v)^2 + |v'|^2 integral stays within 1 + eta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProfile {
    t_len: f64,
    eta: f64,
}

impl TransitionProfile {
    pub fn t_len(&self) -> f64 {
        self.t_len
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// v0(t) = (1 - e^-t) / (1 - e^-T), clamped to the endpoint values
    /// outside [0, T].
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= self.t_len {
            1.0
        } else {
            (1.0 - (-t).exp()) / (1.0 - (-self.t_len).exp())
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= self.t_len {
            0.0
        } else {
            (-t).exp() / (1.0 - (-self.t_len).exp())
        }
    }

    /// Adaptive-quadrature value of the profile energy
    /// int_0^T (1 - v0)^2 + |v0'|^2 dt.
    pub fn quadrature_energy(&self, tol: f64) -> f64 {
        adaptive_simpson(
            &|t| {
                let w = 1.0 - self.value(t);
                let d = self.derivative(t);
                w * w + d * d
            },
            0.0,
            self.t_len,
            tol,
        )
    }
}

/// Exponential transition profile with T(eta) = 2 ln(2 / eta). The budget
/// (1 + eta) is verified by quadrature before the profile is accepted.
pub fn optimal_profile(eta: f64) -> Result<TransitionProfile> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CoreError::Validation(format!(
            "profile budget eta must lie in (0, 1), got {eta}"
        )));
    }
    let profile = TransitionProfile {
        t_len: 2.0 * (2.0 / eta).ln(),
        eta,
    };
    let energy = profile.quadrature_energy(1e-12);
    if !(energy >= 1.0 - 1e-9 && energy <= 1.0 + eta) {
        return Err(CoreError::Validation(format!(
            "transition profile misses its budget: energy {energy}, allowed [1, {}]",
            1.0 + eta
        )));
    }
    Ok(profile)
}

fn simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi))
}

fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let mid = 0.5 * (lo + hi);
    let left = simpson(f, lo, mid);
    let right = simpson(f, mid, hi);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson_rec(f, lo, mid, left, 0.5 * tol, depth - 1)
        + adaptive_simpson_rec(f, mid, hi, right, 0.5 * tol, depth - 1)
}

pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    if lo == hi {
        return 0.0;
    }
    adaptive_simpson_rec(f, lo, hi, simpson(f, lo, hi), tol, 48)
}

// ---------------------------------------------------------------------------
// Recovery pairs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryTag {
    Continuous,
    JumpShifted,
    MultiDistance,
}

/// Explicit pair (u_eps, v_eps) achieving the limsup bound at one eps.
#[derive(Debug, Clone)]
pub struct RecoveryPair {
    pub u: ScalarField,
    pub v: ScalarField,
    pub eps: f64,
    pub xi: f64,
    pub tag: RecoveryTag,
}

fn single_jump_location(u: &PiecewiseField) -> Result<f64> {
    match u.layout() {
        PieceLayout::Intervals { jumps, .. } if jumps.len() == 1 => Ok(jumps[0]),
        PieceLayout::Intervals { jumps, .. } => Err(CoreError::Validation(format!(
            "recovery pair needs exactly one jump, field has {}",
            jumps.len()
        ))),
        _ => Err(CoreError::Validation(
            "recovery pairs are built from 1D piecewise fields".into(),
        )),
    }
}

fn check_recovery_grid(u: &PiecewiseField, g: &Grid) -> Result<()> {
    if g.dim() != 1 || g.bounds().as_slice() != u.domain() {
        return Err(CoreError::Domain(format!(
            "grid domain {:?} does not match field domain {:?}",
            g.bounds(),
            u.domain()
        )));
    }
    Ok(())
}

/// Symmetric transition window centered at 0: zero for |y| <= xi, the
/// profile ramp on xi < |y| < xi + eps T, one outside.
fn window_value(profile: &TransitionProfile, eps: f64, xi: f64, y: f64) -> f64 {
    let a = y.abs();
    if a <= xi {
        0.0
    } else {
        profile.value((a - xi) / eps)
    }
}

/// Recovery pair for a single jump where the weight is continuous:
/// v_eps vanishes on a |x - x0| <= xi plug (xi = eps^2), ramps to 1 across
/// eps-scaled windows, and u_eps bridges the jump affinely on |x - x0| <
/// xi / 2.
pub fn recovery_pair_continuous(
    u: &PiecewiseField,
    g: &Grid,
    eps: f64,
    profile: &TransitionProfile,
) -> Result<RecoveryPair> {
    check_recovery_grid(u, g)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::Validation(format!(
            "eps must lie in (0,1), got {eps}"
        )));
    }
    let x0 = single_jump_location(u)?;
    let xi = eps * eps;
    let reach = xi + eps * profile.t_len();
    let (lo, hi) = (u.domain()[0].0, u.domain()[0].1);
    if x0 - reach < lo || x0 + reach > hi {
        return Err(CoreError::Geometry(format!(
            "transition window [{}, {}] leaves the domain ({lo}, {hi})",
            x0 - reach,
            x0 + reach
        )));
    }
    let u_left = u.value(&[x0 - 0.5 * xi])?;
    let u_right = u.value(&[x0 + 0.5 * xi])?;
    let v = ScalarField::from_fn_1d(g.clone(), |x| window_value(profile, eps, xi, x - x0))?;
    let u_field = ScalarField::from_fn_1d(g.clone(), |x| {
        if (x - x0).abs() >= 0.5 * xi {
            u.value(&[x]).expect("sample inside domain")
        } else {
            u_left + (x - (x0 - 0.5 * xi)) / xi * (u_right - u_left)
        }
    })?;
    Ok(RecoveryPair {
        u: u_field,
        v,
        eps,
        xi,
        tag: RecoveryTag::Continuous,
    })
}

/// Recovery pair for a jump of u sitting on a jump of the weight: the
/// transition window is translated by 2 xi + eps T onto the side with the
/// lower trace, and u is reflected across the jump so that its transition
/// happens inside the translated trench. Falls back to the continuous
/// construction when the jump of u is not on the weight's jump set.
pub fn recovery_pair_jump(
    u: &PiecewiseField,
    w: &crate::weights::WeightField,
    g: &Grid,
    eps: f64,
    profile: &TransitionProfile,
) -> Result<RecoveryPair> {
    check_recovery_grid(u, g)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::Validation(format!(
            "eps must lie in (0,1), got {eps}"
        )));
    }
    let x0 = single_jump_location(u)?;
    let on_weight_jump = match w.jump_set() {
        JumpSet::Points(pts) => pts.iter().any(|&p| (p - x0).abs() <= 1e-12),
        _ => false,
    };
    if !on_weight_jump {
        return recovery_pair_continuous(u, g, eps, profile);
    }
    let left = w.value_on_side(&[x0], &[-1.0])?;
    let right = w.value_on_side(&[x0], &[1.0])?;
    // sign = -1 shifts the trench to the left of the jump
    let sign: f64 = if left <= right { -1.0 } else { 1.0 };
    let xi = eps * eps;
    let shift = 2.0 * xi + eps * profile.t_len();
    let trench_center = x0 + sign * shift;
    let (lo, hi) = (u.domain()[0].0, u.domain()[0].1);
    let outer = shift + xi + eps * profile.t_len();
    if x0 + sign * outer < lo || x0 + sign * outer > hi {
        return Err(CoreError::Geometry(format!(
            "translated window reaches {}, leaving the domain ({lo}, {hi})",
            x0 + sign * outer
        )));
    }
    // the reflection reads u from the far side of the jump
    if x0 - sign * shift < lo || x0 - sign * shift > hi {
        return Err(CoreError::Geometry(format!(
            "reflection band reaches {}, leaving the domain ({lo}, {hi})",
            x0 - sign * shift
        )));
    }
    let v = ScalarField::from_fn_1d(g.clone(), |x| {
        window_value(profile, eps, xi, x - trench_center)
    })?;
    // reflected u: on the band between the jump and the trench, u takes its
    // values from the other side of the jump, so it is continuous at x0
    let reflected = |x: f64| -> f64 {
        // distance from the jump, measured into the lower-trace side
        let band = sign * (x - x0);
        if band >= 0.0 && band <= shift {
            let xr = 2.0 * x0 - x;
            let side = if sign < 0.0 { 1 } else { -1 };
            u.value_side(xr, side)
                .expect("reflected point inside domain")
        } else {
            u.value(&[x]).expect("sample inside domain")
        }
    };
    let patch_inner = x0 + sign * (1.5 * xi + eps * profile.t_len());
    let patch_outer = x0 + sign * (2.5 * xi + eps * profile.t_len());
    let (patch_lo, patch_hi) = if sign < 0.0 {
        (patch_outer, patch_inner)
    } else {
        (patch_inner, patch_outer)
    };
    let f_lo = reflected(patch_lo);
    let f_hi = reflected(patch_hi);
    let u_field = ScalarField::from_fn_1d(g.clone(), |x| {
        if x >= patch_lo && x <= patch_hi {
            f_lo + (x - patch_lo) / (patch_hi - patch_lo) * (f_hi - f_lo)
        } else {
            reflected(x)
        }
    })?;
    Ok(RecoveryPair {
        u: u_field,
        v,
        eps,
        xi,
        tag: RecoveryTag::JumpShifted,
    })
}

// ---------------------------------------------------------------------------
// Multi-dimensional profile
// ---------------------------------------------------------------------------

/// The explicit multi-D transition profile: 0 up to eps^2, the solution of
/// v' = (1 - v) / (2 eps) across the transition zone, then the plateau
/// 1 - exp(-1 / (2 sqrt(eps))).
pub fn tilde_v(eps: f64, t: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(CoreError::Validation(format!(
            "tilde_v needs eps in (0, 1), got {eps}"
        )));
    }
    let inner = eps * eps;
    let outer = eps.sqrt() + inner;
    Ok(if t <= inner {
        0.0
    } else if t <= outer {
        1.0 - (-(t - inner) / (2.0 * eps)).exp()
    } else {
        1.0 - (-1.0 / (2.0 * eps.sqrt())).exp()
    })
}

/// Distance from every cell center to the jump set (exact brute force).
pub fn distance_field(js: &JumpSet, g: &Grid) -> Result<ScalarField> {
    if js.is_empty() {
        return Err(CoreError::Validation(
            "distance field needs a nonempty jump set".into(),
        ));
    }
    if js.dim() != g.dim() {
        return Err(CoreError::Domain(format!(
            "jump set dimension {} does not match grid dimension {}",
            js.dim(),
            g.dim()
        )));
    }
    match g.dim() {
        1 => ScalarField::from_fn_1d(g.clone(), |x| js.distance(&[x])),
        _ => ScalarField::from_fn_2d(g.clone(), |x, y| js.distance(&[x, y])),
    }
}

/// Pointwise composition tilde_v(eps, dist(x, jump set)).
pub fn recovery_v_multi_d(js: &JumpSet, g: &Grid, eps: f64) -> Result<ScalarField> {
    let d = distance_field(js, g)?;
    let (grid, samples) = d.into_parts();
    let mut out = Vec::with_capacity(samples.len());
    for t in samples {
        out.push(tilde_v(eps, t)?);
    }
    ScalarField::new(grid, out)
}

// ---------------------------------------------------------------------------
// Single-cube reflection
// ---------------------------------------------------------------------------

/// Reflects `u` across the plane at signed offset `t` (along `normal`) inside
/// the cube with the given center and side: points between the offset planes
/// at +/-t evaluate u at their mirror image beyond the +t plane, so the jump
/// of the output sits on the plane at offset -t.
///
/// `u` must be a two-piece field split by a line through the cube center with
/// the same normal.
pub fn reflect_construction_2d(
    u: &PiecewiseField,
    center: [f64; 2],
    side: f64,
    normal: [f64; 2],
    t: f64,
) -> Result<PiecewiseField> {
    if u.dim() != 2 {
        return Err(CoreError::Validation("reflection needs a 2D field".into()));
    }
    let (point, u_normal, neg, pos) = match u.layout() {
        PieceLayout::HalfPlane2 {
            point,
            normal,
            neg,
            pos,
        } => (*point, *normal, *neg, *pos),
        _ => {
            return Err(CoreError::Validation(
                "reflection needs a two-piece half-plane field".into(),
            ))
        }
    };
    let nn = (normal[0].powi(2) + normal[1].powi(2)).sqrt();
    if (nn - 1.0).abs() > 1e-12 {
        return Err(CoreError::Validation(format!(
            "reflection normal has length {nn}, must be unit"
        )));
    }
    let align = normal[0] * u_normal[0] + normal[1] * u_normal[1];
    if (align.abs() - 1.0).abs() > 1e-9 {
        return Err(CoreError::Geometry(
            "reflection normal is not aligned with the jump normal".into(),
        ));
    }
    // pieces oriented along the caller's normal
    let (p_neg, p_pos) = if align > 0.0 { (neg, pos) } else { (pos, neg) };
    let off_center = (center[0] - point[0]) * u_normal[0] + (center[1] - point[1]) * u_normal[1];
    if off_center.abs() > 1e-12 {
        return Err(CoreError::Geometry(format!(
            "cube center lies {off_center:.3e} away from the jump plane"
        )));
    }
    if !(t.abs() < 0.5 * side) || t == 0.0 {
        return Err(CoreError::Geometry(format!(
            "slab offset {t} must satisfy 0 < |t| < side/2 = {}",
            0.5 * side
        )));
    }
    let domain = [u.domain()[0], u.domain()[1]];
    let tangent = [-normal[1], normal[0]];
    let half = 0.5 * side;
    // all four cube corners must stay in the domain
    for &(sa, sb) in &[(half, half), (half, -half), (-half, half), (-half, -half)] {
        let corner = [
            center[0] + sa * normal[0] + sb * tangent[0],
            center[1] + sa * normal[1] + sb * tangent[1],
        ];
        if corner[0] < domain[0].0
            || corner[0] > domain[0].1
            || corner[1] < domain[1].0
            || corner[1] > domain[1].1
        {
            return Err(CoreError::Geometry(format!(
                "cube corner {corner:?} leaves the domain"
            )));
        }
    }

    let cs = center[0] * normal[0] + center[1] * normal[1];
    let cq = center[0] * tangent[0] + center[1] * tangent[1];
    // reflection about the plane s = t (s measured from the cube center):
    // x -> (I - 2 n n^T) x + 2 (t + cs) n
    let m = [
        [
            1.0 - 2.0 * normal[0] * normal[0],
            -2.0 * normal[0] * normal[1],
        ],
        [
            -2.0 * normal[0] * normal[1],
            1.0 - 2.0 * normal[1] * normal[1],
        ],
    ];
    let tr = [2.0 * (t + cs) * normal[0], 2.0 * (t + cs) * normal[1]];
    let reflected_src = if t > 0.0 { p_pos } else { p_neg };
    let p_slab = reflected_src.compose_affine(m, tr);

    let t_lo = -t.abs();
    let t_hi = t.abs();
    let ge_s = |s0: f64| HalfPlane {
        normal,
        offset: cs + s0,
    };
    let le_s = |s0: f64| HalfPlane {
        normal: [-normal[0], -normal[1]],
        offset: -(cs + s0),
    };
    let ge_q = |q0: f64| HalfPlane {
        normal: tangent,
        offset: cq + q0,
    };
    let le_q = |q0: f64| HalfPlane {
        normal: [-tangent[0], -tangent[1]],
        offset: -(cq + q0),
    };
    let in_cube_q = [ge_q(-half), le_q(half)];
    let in_cube_s = [ge_s(-half), le_s(half)];

    let mut pieces: Vec<Piece2> = Vec::new();
    // inside the cube: below the slab, the slab (reflected), above the slab
    pieces.push(Piece2 {
        constraints: vec![in_cube_q[0], in_cube_q[1], in_cube_s[0], le_s(t_lo)],
        poly: p_neg,
    });
    pieces.push(Piece2 {
        constraints: vec![in_cube_q[0], in_cube_q[1], ge_s(t_lo), le_s(t_hi)],
        poly: p_slab,
    });
    pieces.push(Piece2 {
        constraints: vec![in_cube_q[0], in_cube_q[1], ge_s(t_hi), in_cube_s[1]],
        poly: p_pos,
    });
    // outside the cube along the normal
    pieces.push(Piece2 {
        constraints: vec![le_s(-half)],
        poly: p_neg,
    });
    pieces.push(Piece2 {
        constraints: vec![ge_s(half)],
        poly: p_pos,
    });
    // lateral flaps, split by the original jump line s = 0
    for (qlo, qhi) in [(None, Some(-half)), (Some(half), None)] {
        let mut base = vec![in_cube_s[0], in_cube_s[1]];
        if let Some(q) = qlo {
            base.push(ge_q(q));
        }
        if let Some(q) = qhi {
            base.push(le_q(q));
        }
        let mut low = base.clone();
        low.push(le_s(0.0));
        pieces.push(Piece2 {
            constraints: low,
            poly: p_neg,
        });
        let mut high = base;
        high.push(ge_s(0.0));
        pieces.push(Piece2 {
            constraints: high,
            poly: p_pos,
        });
    }

    // jump set: relocated plane at offset -t inside the cube
    let mut jumps: Vec<Segment> = Vec::new();
    let plane_point = |s0: f64, q0: f64| {
        [
            center[0] + s0 * normal[0] + q0 * tangent[0],
            center[1] + s0 * normal[1] + q0 * tangent[1],
        ]
    };
    jumps.push(Segment {
        a: plane_point(-t, -half),
        b: plane_point(-t, half),
        normal,
    });
    // original jump line outside the cube (clipped to the domain)
    if let Some((a, b)) = clip_line_to_rect(point, u_normal, domain) {
        let qa = (a[0] - center[0]) * tangent[0] + (a[1] - center[1]) * tangent[1];
        let qb = (b[0] - center[0]) * tangent[0] + (b[1] - center[1]) * tangent[1];
        let (qmin, qmax) = (qa.min(qb), qa.max(qb));
        if qmin < -half {
            jumps.push(Segment {
                a: plane_point(0.0, qmin),
                b: plane_point(0.0, -half),
                normal,
            });
        }
        if qmax > half {
            jumps.push(Segment {
                a: plane_point(0.0, half),
                b: plane_point(0.0, qmax),
                normal,
            });
        }
    }
    // lateral slab boundaries where the reflected values disagree with the
    // outside field; split at s = 0 and keep sub-segments with a real jump
    for q0 in [-half, half] {
        for (s_a, s_b, outside) in [(t_lo, 0.0, &p_neg), (0.0, t_hi, &p_pos)] {
            if s_b <= s_a {
                continue;
            }
            let mid = plane_point(0.5 * (s_a + s_b), q0);
            if (p_slab.eval(mid[0], mid[1]) - outside.eval(mid[0], mid[1])).abs() > 1e-12 {
                jumps.push(Segment {
                    a: plane_point(s_a, q0),
                    b: plane_point(s_b, q0),
                    normal: tangent,
                });
            }
        }
    }
    PiecewiseField::from_regions(domain, pieces, jumps)
}
