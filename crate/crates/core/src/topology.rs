//! Field-line tracing at `T = 0`, torus winding counts and Gauss linking numbers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{field_unit, initial_fields};
use crate::params::{KnotIndices, PhysicalScales, Point4};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Ordered polyline; when `closed`, the segment from the last point back to the first is implied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve<T> {
    pub points: Vec<Vec3<T>>,
    pub closed: bool,
    pub arc_length: T,
}

impl<T: Real> Curve<T> {
    pub fn new(points: Vec<Vec3<T>>, closed: bool) -> Self {
        let mut c = Self {
            points,
            closed,
            arc_length: T::zero(),
        };
        c.arc_length = c.segments().map(|(a, b)| (b - a).norm()).fold(T::zero(), |x, y| x + y);
        c
    }

    /// Closed polyline through `f(2π i / n)` for `i < n`.
    pub fn closed_from_fn(n: usize, f: impl Fn(T) -> Vec3<T>) -> Self {
        let step = T::lit(2.0) * T::PI() / T::lit(n as f64);
        Self::new((0..n).map(|i| f(step * T::lit(i as f64))).collect(), true)
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3<T>, Vec3<T>)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Cumulative arc length at each vertex.
    pub fn arc_parameters(&self) -> Vec<T> {
        let mut s = Vec::with_capacity(self.points.len());
        let mut acc = T::zero();
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                acc = acc + (*p - self.points[i - 1]).norm();
            }
            s.push(acc);
        }
        s
    }

    /// `n` points equally spaced in arc length along the polyline.
    pub fn resampled(&self, n: usize) -> Self {
        let total = self.arc_length;
        if self.points.len() < 2 || n < 2 || total == T::zero() {
            return self.clone();
        }
        let mut verts = self.points.clone();
        if self.closed {
            verts.push(self.points[0]);
        }
        let denom = if self.closed { n } else { n - 1 };
        let ds = total / T::lit(denom as f64);
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        let mut seg_start = T::zero();
        for i in 0..n {
            let target = ds * T::lit(i as f64);
            loop {
                let len = (verts[seg + 1] - verts[seg]).norm();
                if seg_start + len >= target || seg + 2 >= verts.len() {
                    let f = if len > T::zero() { ((target - seg_start) / len).min(T::one()) } else { T::zero() };
                    out.push(verts[seg] + (verts[seg + 1] - verts[seg]) * f);
                    break;
                }
                seg_start = seg_start + len;
                seg += 1;
            }
        }
        Self::new(out, self.closed)
    }

    pub fn rigidly_moved(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        Self::new(self.points.iter().map(|&p| f(p)).collect(), self.closed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FieldKind {
    Electric,
    Magnetic,
}

impl std::str::FromStr for FieldKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "e" | "electric" => Ok(FieldKind::Electric),
            "b" | "magnetic" => Ok(FieldKind::Magnetic),
            other => Err(format!("unknown field kind '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_step: T,
    pub max_arc_length: T,
    pub closure_tol: T,
    /// Arc length that must be covered before a return to the seed counts as closure.
    pub min_arc_length: T,
    /// Null threshold relative to `√a/(πL0²)` (times `c` for the electric field).
    pub null_threshold: T,
}

impl<T: Real> Default for TraceOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-9),
            abs_tol: T::lit(1e-12),
            max_step: T::lit(0.02),
            max_arc_length: T::lit(1e3),
            closure_tol: T::lit(1e-4),
            min_arc_length: T::one(),
            null_threshold: T::lit(1e-10),
        }
    }
}

struct Direction<'a, T> {
    which: FieldKind,
    k: &'a KnotIndices,
    s: &'a PhysicalScales<T>,
    threshold: T,
}

impl<T: Real> Direction<'_, T> {
    fn eval(&self, x: Vec3<T>) -> Result<Vec3<T>> {
        let f = initial_fields(&Point4::at(x, T::zero()), self.k, self.s)?;
        let v = match self.which {
            FieldKind::Electric => f.e,
            FieldKind::Magnetic => f.b,
        };
        let m = v.norm();
        if !(m > self.threshold) {
            return Err(Error::NullFieldRegion {
                magnitude: m.to_f64_lossy(),
                threshold: self.threshold.to_f64_lossy(),
                x: x.x.to_f64_lossy(),
                y: x.y.to_f64_lossy(),
                z: x.z.to_f64_lossy(),
            });
        }
        Ok(v / m)
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One embedded step: returns `(x_new, error_vector)`.
fn dp_step<T: Real>(dir: &Direction<'_, T>, x: Vec3<T>, k1: Vec3<T>, h: T) -> Result<(Vec3<T>, Vec3<T>)> {
    let mut ks = [Vec3::zero(); 7];
    ks[0] = k1;
    for i in 1..7 {
        let mut y = x;
        for (j, kj) in ks.iter().enumerate().take(i) {
            let a = A[i][j];
            if a != 0.0 {
                y = y + *kj * (h * T::lit(a));
            }
        }
        ks[i] = dir.eval(y)?;
    }
    let mut x5 = x;
    let mut err = Vec3::zero();
    for i in 0..7 {
        x5 = x5 + ks[i] * (h * T::lit(B5[i]));
        err = err + ks[i] * (h * T::lit(B5[i] - B4[i]));
    }
    Ok((x5, err))
}

/// Integrates `dX/ds = F/|F|` from `seed` until the line returns to the seed or the
/// arc-length budget runs out.
pub fn trace_fieldline<T: Real>(
    which: FieldKind,
    seed: Vec3<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    opts: &TraceOptions<T>,
) -> Result<Curve<T>> {
    let scale = field_unit(s)
        * match which {
            FieldKind::Electric => s.c(),
            FieldKind::Magnetic => T::one(),
        };
    let dir = Direction {
        which,
        k,
        s,
        threshold: opts.null_threshold * scale,
    };
    let t0 = dir.eval(seed)?;
    let plane = |x: Vec3<T>| (x - seed).dot(t0);

    let mut points = vec![seed];
    let mut x = seed;
    let mut tangent = t0;
    let mut arc = T::zero();
    let mut h = opts.max_step;
    let fifth = T::lit(0.2);
    let safety = T::lit(0.9);
    let min_h = T::lit(1e-12);

    while arc < opts.max_arc_length {
        h = h.min(opts.max_step).min(opts.max_arc_length - arc);
        let (xn, err) = dp_step(&dir, x, tangent, h)?;
        let tol = opts.abs_tol + opts.rel_tol * x.max_abs().max(xn.max_abs()).max(T::one());
        let en = err.max_abs() / tol;
        if en > T::one() && h > min_h {
            h = h * (safety * en.powf(-fifth)).max(T::lit(0.2));
            continue;
        }
        let before = plane(x);
        let after = plane(xn);
        let arc_new = arc + h;
        if arc_new >= opts.min_arc_length && before < T::zero() && after >= T::zero() {
            // bisect the step length for the plane crossing
            let (mut lo, mut hi) = (T::zero(), h);
            let mut crossing = xn;
            for _ in 0..60 {
                let mid = (lo + hi) / T::lit(2.0);
                let (xm, _) = dp_step(&dir, x, tangent, mid)?;
                if plane(xm) < T::zero() {
                    lo = mid;
                } else {
                    hi = mid;
                    crossing = xm;
                }
                if hi - lo < T::lit(1e-14) {
                    break;
                }
            }
            let gap = (crossing - seed).norm();
            let aligned = dir.eval(crossing)?.dot(t0) > T::lit(0.99);
            if gap < opts.closure_tol && aligned {
                // drop the duplicate of the seed; the closing segment is implicit
                let mut curve = Curve::new(points, true);
                curve.arc_length = arc + hi;
                return Ok(curve);
            }
        }
        x = xn;
        arc = arc_new;
        points.push(x);
        tangent = dir.eval(x)?;
        let grow = if en > T::zero() { safety * en.powf(-fifth) } else { T::lit(5.0) };
        h = h * grow.min(T::lit(5.0)).max(T::lit(0.2));
    }
    let mut curve = Curve::new(points, false);
    curve.arc_length = arc;
    Ok(curve)
}

/// Torus frame: a symmetry axis through the origin and a core circle of the given radius
/// in the plane orthogonal to it. The default is the `Z` axis with the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusFrame<T> {
    pub core_radius: T,
    pub axis: Vec3<T>,
}

impl<T: Real> Default for TorusFrame<T> {
    fn default() -> Self {
        Self {
            core_radius: T::one(),
            axis: Vec3::unit_z(),
        }
    }
}

impl<T: Real> TorusFrame<T> {
    pub fn about(axis: Vec3<T>, core_radius: T) -> Self {
        Self { core_radius, axis }
    }

    /// Coordinates `(u, v, w)` with `w` along the axis.
    fn local(&self, p: Vec3<T>) -> Vec3<T> {
        let w = self.axis.normalized().unwrap_or(Vec3::unit_z());
        let trial = if w.x.abs() < T::lit(0.9) { Vec3::unit_x() } else { Vec3::unit_y() };
        let u = (trial - w * trial.dot(w)).normalized().unwrap_or(Vec3::unit_x());
        let v = w.cross(u);
        Vec3::new(p.dot(u), p.dot(v), p.dot(w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Windings<T> {
    /// Turns around the `Z` axis.
    pub toroidal: i64,
    /// Turns around the core circle.
    pub poloidal: i64,
    /// Distance of the accumulated turns from the nearest integer.
    pub residual: T,
}

fn wrap<T: Real>(a: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    let mut d = a % two_pi;
    if d > T::PI() {
        d = d - two_pi;
    } else if d <= -T::PI() {
        d = d + two_pi;
    }
    d
}

pub fn winding_numbers<T: Real>(c: &Curve<T>, frame: &TorusFrame<T>) -> Result<Windings<T>> {
    if !c.closed {
        return Err(Error::NotClosed);
    }
    let tor_angle = |p: Vec3<T>| p.y.atan2(p.x);
    let pol_angle = |p: Vec3<T>| p.z.atan2((p.x * p.x + p.y * p.y).sqrt() - frame.core_radius);
    let mut tor = T::zero();
    let mut pol = T::zero();
    let mut largest = T::zero();
    for (a, b) in c.segments() {
        let (a, b) = (frame.local(a), frame.local(b));
        let dt = wrap(tor_angle(b) - tor_angle(a));
        let dp = wrap(pol_angle(b) - pol_angle(a));
        largest = largest.max(dt.abs()).max(dp.abs());
        tor = tor + dt;
        pol = pol + dp;
    }
    let two_pi = T::lit(2.0) * T::PI();
    let (wt, wp) = (tor / two_pi, pol / two_pi);
    let residual = (wt - wt.round()).abs().max((wp - wp.round()).abs());
    if residual > T::lit(0.1) {
        return Err(Error::AmbiguousWinding(residual.to_f64_lossy()));
    }
    // a segment sweeping a quarter turn or more leaves the sense of rotation undetermined
    if largest / two_pi >= T::lit(0.25) {
        return Err(Error::AmbiguousWinding((largest / two_pi).to_f64_lossy()));
    }
    Ok(Windings {
        toroidal: wt.round().to_i64().unwrap_or(0),
        poloidal: wp.round().to_i64().unwrap_or(0),
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Linking<T> {
    pub value: i64,
    pub raw: T,
    pub residual: T,
}

pub const MIN_CURVE_DISTANCE: f64 = 1e-3;
pub const MAX_LINKING_RESIDUAL: f64 = 0.05;

/// Gauss double integral by the midpoint rule over the two closed polylines.
pub fn linking_number<T: Real>(c1: &Curve<T>, c2: &Curve<T>) -> Result<Linking<T>> {
    if !c1.closed || !c2.closed {
        return Err(Error::NotClosed);
    }
    let seg = |c: &Curve<T>| -> Vec<(Vec3<T>, Vec3<T>)> {
        c.segments()
            .map(|(a, b)| ((a + b) * T::lit(0.5), b - a))
            .collect()
    };
    let s1 = seg(c1);
    let s2 = seg(c2);
    let rows: Vec<(T, T)> = s1
        .par_iter()
        .map(|&(m1, d1)| {
            let mut acc = T::zero();
            let mut dmin = T::infinity();
            for &(m2, d2) in &s2 {
                let r = m1 - m2;
                let dist = r.norm();
                dmin = dmin.min(dist);
                acc = acc + r.dot(d1.cross(d2)) / (dist * dist * dist);
            }
            (acc, dmin)
        })
        .collect();
    let mut total = T::zero();
    let mut dmin = T::infinity();
    for (a, d) in rows {
        total = total + a;
        dmin = dmin.min(d);
    }
    if dmin < T::lit(MIN_CURVE_DISTANCE) {
        return Err(Error::CurvesTooClose(dmin.to_f64_lossy()));
    }
    let raw = total / (T::lit(4.0) * T::PI());
    let residual = (raw - raw.round()).abs();
    if residual > T::lit(MAX_LINKING_RESIDUAL) {
        return Err(Error::AmbiguousLinking {
            raw: raw.to_f64_lossy(),
            residual: residual.to_f64_lossy(),
        });
    }
    Ok(Linking {
        value: raw.round().to_i64().unwrap_or(0),
        raw,
        residual,
    })
}
