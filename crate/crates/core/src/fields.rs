//! Closed-form knotted electromagnetic fields and local diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{KnotIndices, PhysicalScales, Point4};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Auxiliary scalars of the time-dependent solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Apq<T> {
    pub a: T,
    pub p: T,
    pub q: T,
}

/// `A = (R² − T² + 1)/2`, `P = T(T² − 3A²)`, `Q = A(A² − 3T²)`.
pub fn apq<T: Real>(r2: T, t: T) -> Apq<T> {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let a = (r2 - t * t + T::one()) / two;
    let p = t * (t * t - three * a * a);
    let q = a * (a * a - three * t * t);
    Apq { a, p, q }
}

/// The four polynomial vectors `H1..H4` at `p`.
pub fn h_vectors<T: Real>(p: &Point4<T>, k: &KnotIndices) -> [Vec3<T>; 4] {
    let (n, m, l, s) = k.as_real::<T>();
    let (x, y, z, t) = (p.x, p.y, p.z, p.t);
    let half = T::lit(0.5);
    let one = T::one();
    let (x2, y2, z2, t2) = (x * x, y * y, z * z, t * t);
    // shared quadratic forms
    let q_minus = (x2 + y2 - z2 - one + t2) * half;
    let q_plus = (one + x2 - y2 - z2 - t2) * half;

    let h1 = Vec3::new(
        -n * x * z + m * y + s * t,
        -n * y * z - m * x - l * t * z,
        n * q_minus + l * t * y,
    );
    let h2 = Vec3::new(
        s * q_plus - m * t * y,
        s * x * y - l * z + m * t * x,
        s * x * z + l * y + n * t,
    );
    let h3 = Vec3::new(
        -m * x * z + n * y + l * t,
        -m * y * z - n * x - s * t * z,
        m * q_minus + s * t * y,
    );
    let h4 = Vec3::new(
        l * q_plus - n * t * y,
        l * x * y - s * z + n * t * x,
        l * x * z + s * y + m * t,
    );
    [h1, h2, h3, h4]
}

/// Electric and magnetic field at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSample<T> {
    pub e: Vec3<T>,
    pub b: Vec3<T>,
    pub at: Point4<T>,
}

fn overflow<T: Real>(p: &Point4<T>) -> Error {
    Error::NumericOverflow {
        r2: p.r2().to_f64_lossy(),
        t: p.t.to_f64_lossy(),
    }
}

/// Field amplitude unit `√a / (π L0²)`.
pub fn field_unit<T: Real>(s: &PhysicalScales<T>) -> T {
    s.a().sqrt() / (T::PI() * s.l0() * s.l0())
}

/// Evaluates `E` and `B` at an arbitrary spacetime point.
pub fn field_at<T: Real>(p: &Point4<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<FieldSample<T>> {
    let Apq { a, p: pp, q } = apq(p.r2(), p.t);
    let d = a * a + p.t * p.t;
    let d3 = d * d * d;
    if !(d3 > T::zero()) || !d3.is_finite() {
        return Err(overflow(p));
    }
    let [h1, h2, h3, h4] = h_vectors(p, k);
    let unit = field_unit(s);
    let e = (h4 * q - h3 * pp) * (unit * s.c() / d3);
    let b = (h1 * q + h2 * pp) * (unit / d3);
    if !e.is_finite() || !b.is_finite() {
        return Err(overflow(p));
    }
    Ok(FieldSample { e, b, at: *p })
}

/// Evaluates the `T = 0` fields from their dedicated initial-data form.
pub fn initial_fields<T: Real>(p: &Point4<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<FieldSample<T>> {
    if p.t != T::zero() {
        return Err(Error::NotInitialTime(p.t.to_f64_lossy()));
    }
    let (n, m, l, sv) = k.as_real::<T>();
    let (x, y, z) = (p.x, p.y, p.z);
    let one = T::one();
    let half = T::lit(0.5);
    let d = one + p.r2();
    let d3 = d * d * d;
    if !d3.is_finite() {
        return Err(overflow(p));
    }
    let pref = T::lit(8.0) * field_unit(s) / d3;
    let e = Vec3::new(
        l * (x * x - y * y - z * z + one) * half,
        l * x * y - sv * z,
        l * x * z + sv * y,
    ) * (pref * s.c());
    let b = Vec3::new(
        m * y - n * x * z,
        -m * x - n * y * z,
        n * (x * x + y * y - z * z - one) * half,
    ) * pref;
    if !e.is_finite() || !b.is_finite() {
        return Err(overflow(p));
    }
    Ok(FieldSample { e, b, at: *p })
}

/// `(ε0/2)|E|² + |B|²/(2μ0)`
pub fn energy_density<T: Real>(fs: &FieldSample<T>, s: &PhysicalScales<T>) -> T {
    let half = T::lit(0.5);
    half * s.eps0() * fs.e.norm_sq() + half * fs.b.norm_sq() / s.mu0()
}

/// `(1/μ0) E × B`
pub fn poynting_classical<T: Real>(fs: &FieldSample<T>, s: &PhysicalScales<T>) -> Vec3<T> {
    fs.e.cross(fs.b) / s.mu0()
}

/// Finite-difference Maxwell residuals, with derivatives taken in dimensionless `(X, Y, Z, T)`.
///
/// Electric quantities are divided by `c` so all four residuals share the units of `B / L0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxwellResidual<T> {
    pub div_e: T,
    pub div_b: T,
    pub faraday: Vec3<T>,
    pub ampere: Vec3<T>,
    /// Largest of `|E|/c`, `|B|` and the Frobenius norms of their spacetime Jacobians.
    pub field_scale: T,
}

impl<T: Real> MaxwellResidual<T> {
    pub fn max_abs(&self) -> T {
        self.div_e
            .abs()
            .max(self.div_b.abs())
            .max(self.faraday.max_abs())
            .max(self.ampere.max_abs())
    }

    /// Largest residual relative to the local field scale; zero for a vanishing field.
    pub fn relative(&self) -> T {
        if self.field_scale == T::zero() {
            self.max_abs()
        } else {
            self.max_abs() / self.field_scale
        }
    }
}

/// Default step `1e-4 · max(1, |p|)`.
pub fn default_step<T: Real>(p: &Point4<T>) -> T {
    T::lit(1e-4) * T::one().max(p.magnitude())
}

fn step_floor<T: Real>(p: &Point4<T>) -> T {
    T::lit(1e3) * T::epsilon() * T::one().max(p.magnitude())
}

/// Central differences with one Richardson level.
pub fn maxwell_residual<T: Real>(
    p: &Point4<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    h: T,
) -> Result<MaxwellResidual<T>> {
    let floor = step_floor(p);
    if !(h >= floor) {
        return Err(Error::StepTooSmall {
            h: h.to_f64_lossy(),
            floor: floor.to_f64_lossy(),
        });
    }
    let c = s.c();
    let two = T::lit(2.0);
    let shifted = |axis: usize, d: T| -> Point4<T> {
        let mut q = *p;
        match axis {
            0 => q.x = q.x + d,
            1 => q.y = q.y + d,
            2 => q.z = q.z + d,
            _ => q.t = q.t + d,
        }
        q
    };
    let central = |axis: usize, step: T| -> Result<(Vec3<T>, Vec3<T>)> {
        let fp = field_at(&shifted(axis, step), k, s)?;
        let fm = field_at(&shifted(axis, -step), k, s)?;
        Ok(((fp.e - fm.e) / (two * step * c), (fp.b - fm.b) / (two * step)))
    };
    // d[axis] = (∂E/c, ∂B) along X, Y, Z, T
    let mut de = [Vec3::zero(); 4];
    let mut db = [Vec3::zero(); 4];
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    for axis in 0..4 {
        let (e1, b1) = central(axis, h)?;
        let (e2, b2) = central(axis, h / two)?;
        de[axis] = (e2 * four - e1) / three;
        db[axis] = (b2 * four - b1) / three;
    }
    let here = field_at(p, k, s)?;
    let curl = |d: &[Vec3<T>; 4]| Vec3::new(d[1].z - d[2].y, d[2].x - d[0].z, d[0].y - d[1].x);
    let div = |d: &[Vec3<T>; 4]| d[0].x + d[1].y + d[2].z;
    let frob = |d: &[Vec3<T>; 4]| d.iter().map(|v| v.norm_sq()).fold(T::zero(), |a, b| a + b).sqrt();

    let field_scale = (here.e.norm() / c)
        .max(here.b.norm())
        .max(frob(&de))
        .max(frob(&db));
    Ok(MaxwellResidual {
        div_e: div(&de),
        div_b: div(&db),
        faraday: curl(&de) + db[3],
        ampere: curl(&db) - de[3],
        field_scale,
    })
}
