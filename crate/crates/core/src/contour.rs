//! Level curves `Gamma_r = { z : Re phi(z) = r/2 }` around the origin.
//!
//! A curve is traced clockwise from its crossing `x_r < 0` of the negative
//! axis by a predictor–corrector: a step along the level tangent
//! `i conj(psi)/|psi|` (`psi = phi'`), then Newton on `Re phi` along the
//! gradient `conj(psi)`. `Re phi` at a trial point is the value at the last
//! vertex plus the quadrature of `psi` over the segment. For `r = 0` the
//! curve has a corner at `beta1`, which is inserted as a vertex.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::landscape::{phi_eval, BoundarySide, PotentialContext};
use crate::quadrature::integrate_segment;

const MAX_TURN: f64 = 0.1;
const MIN_STEP: f64 = 1e-8;
const NEWTON_ITERS: usize = 12;

/// Step and level tolerances for tracing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub max_step: f64,
    pub level_tol: f64,
    pub max_steps: usize,
}

impl TraceOptions {
    pub fn for_context(ctx: &PotentialContext) -> Self {
        TraceOptions {
            max_step: ctx.width() / 400.0,
            level_tol: 1e-9,
            max_steps: 400_000,
        }
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }
}

/// A closed polyline approximating `Gamma_r`. The closing segment from the
/// last point back to `points[0]` is implicit.
#[derive(Clone, Debug)]
pub struct ContourPolyline {
    pub r: f64,
    pub points: Vec<Complex64>,
    /// Cumulative arclength at each vertex; `arclengths[0] = 0`.
    pub arclengths: Vec<f64>,
    pub max_step: f64,
    pub level_tol: f64,
    /// Winding number about the origin (`-1` for clockwise).
    pub winding: i32,
    /// Index of the vertex exactly at `beta1` (only for `r = 0`).
    pub beta1_index: Option<usize>,
    pub warning: Option<String>,
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

impl ContourPolyline {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segments `(points[k], points[k+1])`, including the closing one.
    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let m = self.points.len();
        (0..m).map(move |k| (self.points[k], self.points[(k + 1) % m]))
    }

    /// Total length including the closing segment.
    pub fn perimeter(&self) -> f64 {
        let m = self.points.len();
        self.arclengths[m - 1] + (self.points[0] - self.points[m - 1]).norm()
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.segments()
            .map(|(a, b)| segment_distance(z, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest point on the polyline, as `(segment index, parameter in [0, 1])`.
    pub fn nearest(&self, z: Complex64) -> (usize, f64) {
        let mut best = (0, 0.0, f64::INFINITY);
        for (k, (a, b)) in self.segments().enumerate() {
            let d = b - a;
            let len2 = d.norm_sqr();
            let t = if len2 == 0.0 {
                0.0
            } else {
                (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0)
            };
            let dist = (z - (a + d * t)).norm();
            if dist < best.2 {
                best = (k, t, dist);
            }
        }
        (best.0, best.1)
    }

    /// Winding number of the polyline about `z`.
    pub fn winding_about(&self, z: Complex64) -> i32 {
        let total: f64 = self.segments().map(|(a, b)| ((b - z) / (a - z)).arg()).sum();
        (total / (2.0 * PI)).round() as i32
    }

    /// Whether `z` lies in the bounded component cut out by the loop.
    pub fn contains(&self, z: Complex64) -> bool {
        self.winding_about(z) != 0
    }

    /// True when no two non-adjacent segments intersect.
    pub fn is_simple(&self) -> bool {
        let segs: Vec<_> = self.segments().collect();
        let m = segs.len();
        for i in 0..m {
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                if segments_cross(segs[i], segs[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Writes `re,im,arclength`, repeating the first vertex as the last row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "arclength"])?;
        for (p, s) in self.points.iter().zip(&self.arclengths) {
            w.write_record([fmt(p.re), fmt(p.im), fmt(*s)])?;
        }
        let first = self.points[0];
        w.write_record([fmt(first.re), fmt(first.im), fmt(self.perimeter())])?;
        w.flush()?;
        Ok(())
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segments_cross((p1, p2): (Complex64, Complex64), (q1, q2): (Complex64, Complex64)) -> bool {
    let d1 = cross(p2 - p1, q1 - p1);
    let d2 = cross(p2 - p1, q2 - p1);
    let d3 = cross(q2 - q1, p1 - q1);
    let d4 = cross(q2 - q1, p2 - q1);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn re_phi_axis(ctx: &PotentialContext, x: f64) -> Result<f64> {
    Ok(phi_eval(ctx, Complex64::new(x, 0.0), BoundarySide::Above)?.re)
}

/// The crossing `x_r < 0` of `Gamma_r` with the negative axis, where
/// `Re phi` increases monotonically from `-inf` to `+inf`.
pub fn axis_crossing(ctx: &PotentialContext, r: f64) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("level r = {r} must be finite and non-negative")));
    }
    let target = 0.5 * r;
    let f = |x: f64| re_phi_axis(ctx, x).map(|v| v - target);
    let mut hi = -0.5;
    let mut f_hi = f(hi)?;
    while f_hi <= 0.0 {
        hi *= 0.5;
        if hi > -1e-300 {
            return Err(Error::Bracket(format!("no crossing above the origin for r = {r}")));
        }
        f_hi = f(hi)?;
    }
    let mut lo = -1.0;
    let mut f_lo = f(lo)?;
    while f_lo >= 0.0 {
        lo *= 2.0;
        if lo < -1e12 {
            return Err(Error::Bracket(format!("no crossing below for r = {r}")));
        }
        f_lo = f(lo)?;
    }
    // safeguarded Newton; d/dx Re phi = R(x) / (2x) on the negative axis
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x)?;
        if fx.abs() <= 1e-15 * target.abs().max(1.0) {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = ctx.phi_derivative(Complex64::new(x, 0.0)).re;
        let newton = x - fx / slope;
        x = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(x);
        }
    }
    Ok(x)
}

fn tangent(ctx: &PotentialContext, z: Complex64) -> Complex64 {
    let psi = ctx.phi_derivative(z);
    Complex64::i() * psi.conj() / psi.norm()
}

struct Tracer<'a> {
    ctx: &'a PotentialContext,
    target: f64,
    level_tol: f64,
}

impl Tracer<'_> {
    fn increment(&self, from: Complex64, to: Complex64) -> Result<f64> {
        let est = integrate_segment(|s| self.ctx.phi_derivative(s), from, to, 1e-14)?;
        Ok(est.value.re)
    }

    /// Newton-corrects `w` onto the level, measuring `Re phi` from the vertex
    /// `z` whose value is `val_z`. Returns the corrected point and its value.
    fn correct(&self, z: Complex64, val_z: f64, mut w: Complex64) -> Result<Option<(Complex64, f64)>> {
        for _ in 0..NEWTON_ITERS {
            let val = val_z + self.increment(z, w)?;
            let f = val - self.target;
            if f.abs() <= 0.05 * self.level_tol {
                return Ok(Some((w, val)));
            }
            let psi = self.ctx.phi_derivative(w);
            let n2 = psi.norm_sqr();
            if n2 == 0.0 || !n2.is_finite() {
                return Ok(None);
            }
            w -= f * psi.conj() / n2;
        }
        Ok(None)
    }
}

/// Traces `Gamma_r` clockwise, starting at [`axis_crossing`].
pub fn trace_gamma(ctx: &PotentialContext, r: f64, opts: &TraceOptions) -> Result<ContourPolyline> {
    let start_x = axis_crossing(ctx, r)?;
    let start = Complex64::new(start_x, 0.0);
    let tracer = Tracer {
        ctx,
        target: 0.5 * r,
        level_tol: opts.level_tol,
    };
    let beta1 = Complex64::new(ctx.beta1, 0.0);
    let corner_radius = 10.0 * opts.max_step;

    let mut points = vec![start];
    let mut z = start;
    let mut val = re_phi_axis(ctx, start_x)?;
    let mut h = opts.max_step.min(0.1 * start_x.abs());
    let mut beta1_index = None;
    let mut been_below = false;
    let mut steps = 0usize;

    loop {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Closure { steps });
        }
        if been_below && (z - start).norm() <= 1.5 * h.max(opts.max_step.min(0.1 * start_x.abs())) && z.im < 0.0 {
            break;
        }
        if r == 0.0 && beta1_index.is_none() && (z - beta1).norm() < corner_radius {
            let rho = (z - beta1).norm();
            beta1_index = Some(points.len());
            points.push(beta1);
            let guess = beta1 + Complex64::from_polar(rho, -2.0 * PI / 3.0);
            let guess_val = phi_eval(ctx, guess, BoundarySide::OffAxis)?.re;
            let (w, v) = tracer
                .correct(guess, guess_val, guess)?
                .ok_or_else(|| Error::StepCollapse {
                    step: rho,
                    at: format!("{guess}"),
                })?;
            points.push(w);
            z = w;
            val = v;
            been_below = true;
            continue;
        }
        let t = tangent(ctx, z);
        let mut accepted = None;
        while h >= MIN_STEP * z.norm().min(1.0) {
            let predicted = z + t * h;
            if let Some((w, v)) = tracer.correct(z, val, predicted)? {
                let turn = (tangent(ctx, w) / t).arg().abs();
                let chord = (w - z).norm();
                if turn <= MAX_TURN && chord <= 1.5 * h && w != Complex64::new(0.0, 0.0) {
                    accepted = Some((w, v, turn));
                    break;
                }
            }
            h *= 0.5;
        }
        let (w, v, turn) = accepted.ok_or_else(|| Error::StepCollapse {
            step: h,
            at: format!("{z}"),
        })?;
        if been_below && z.im < 0.0 && w.im >= 0.0 {
            break;
        }
        been_below = been_below || w.im < 0.0;
        points.push(w);
        z = w;
        val = v;
        if turn < 0.5 * MAX_TURN {
            h = (1.5 * h).min(opts.max_step);
        }
    }
    // keep the implicit closing segment no longer than a step
    let last = *points.last().expect("non-empty");
    let gap = (start - last).norm();
    let pieces = (gap / opts.max_step).ceil() as usize;
    for j in 1..pieces {
        let chord = last + (start - last) * (j as f64 / pieces as f64);
        if let Some((w, v)) = tracer.correct(z, val, chord)? {
            if w.im < 0.0 {
                points.push(w);
                z = w;
                val = v;
            }
        }
    }

    let mut arclengths = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    arclengths.push(0.0);
    for w in points.windows(2) {
        acc += (w[1] - w[0]).norm();
        arclengths.push(acc);
    }
    let mut poly = ContourPolyline {
        r,
        points,
        arclengths,
        max_step: opts.max_step,
        level_tol: opts.level_tol,
        winding: 0,
        beta1_index,
        warning: None,
    };
    poly.winding = poly.winding_about(Complex64::new(0.0, 0.0));
    if poly.winding != -1 {
        return Err(Error::Closure { steps });
    }
    if r > 30.0 {
        poly.warning = Some(format!(
            "r = {r}: curve of radius {:.3e} near the origin",
            start_x.abs()
        ));
    } else if r > 0.0 {
        let gap = poly
            .points
            .iter()
            .map(|p| interval_distance(ctx, *p))
            .fold(f64::INFINITY, f64::min);
        if gap < 2.0 * opts.max_step {
            poly.warning = Some(format!("contour passes within {gap:.3e} of [beta1, beta2]"));
        }
    }
    Ok(poly)
}

/// Distance from `z` to the segment `[beta1, beta2]`.
pub fn interval_distance(ctx: &PotentialContext, z: Complex64) -> f64 {
    segment_distance(z, Complex64::new(ctx.beta1, 0.0), Complex64::new(ctx.beta2, 0.0))
}

/// Distance to the limit support: `[beta1, beta2]` together with `Gamma_r`
/// (given as a polyline) or with the origin when `gamma` is `None`.
pub fn limit_set_distance(ctx: &PotentialContext, gamma: Option<&ContourPolyline>, z: Complex64) -> f64 {
    let to_loop = match gamma {
        Some(g) => g.distance_to(z),
        None => z.norm(),
    };
    to_loop.min(interval_distance(ctx, z))
}

/// Whether `z` lies inside the loop `Gamma_r`.
pub fn point_in_loop(gamma: &ContourPolyline, z: Complex64) -> Result<bool> {
    if gamma.distance_to(z) <= gamma.level_tol {
        return Err(Error::OnBoundary(format!("{z}")));
    }
    Ok(gamma.contains(z))
}
