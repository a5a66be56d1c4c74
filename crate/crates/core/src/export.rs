//! Plain-text writers for grids, curves, spectra and correlation scans.
//!
//! Every float is written with 17 significant digits so repeated runs are byte-identical.

use std::io::{self, Write};

use num_complex::Complex;

use crate::fft::GridFields;
use crate::fields::{energy_density, poynting_classical, FieldSample};
use crate::params::{KnotIndices, PhysicalScales, Point4};
use crate::quantumstate::CorrelationPoint;
use crate::scalar::Real;
use crate::spectral::{alpha, w_vector, Helicity, WaveVec};
use crate::topology::Curve;
use crate::vector::Vec3;

pub const VTK_HEADER: &str = "# vtk DataFile Version 3.0";

struct F(f64);

impl std::fmt::Display for F {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

fn fx<T: Real>(v: T) -> F {
    F(v.to_f64_lossy())
}

fn derived<T: Real>(g: &GridFields<T>, s: &PhysicalScales<T>, idx: usize) -> (T, Vec3<T>) {
    let fs = FieldSample {
        e: g.e[idx],
        b: g.b[idx],
        at: Point4::at(g.grid.position(idx), g.t),
    };
    (energy_density(&fs, s), poynting_classical(&fs, s))
}

/// `x,y,z,t,Ex,Ey,Ez,Bx,By,Bz,u,Sx,Sy,Sz`, one row per node in grid index order.
pub fn write_grid_csv<T: Real, W: Write>(out: &mut W, g: &GridFields<T>, s: &PhysicalScales<T>) -> io::Result<()> {
    writeln!(out, "x,y,z,t,Ex,Ey,Ez,Bx,By,Bz,u,Sx,Sy,Sz")?;
    for idx in 0..g.grid.len() {
        let p = g.grid.position(idx);
        let (e, b) = (g.e[idx], g.b[idx]);
        let (u, sv) = derived(g, s, idx);
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fx(p.x), fx(p.y), fx(p.z), fx(g.t),
            fx(e.x), fx(e.y), fx(e.z), fx(b.x), fx(b.y), fx(b.z),
            fx(u), fx(sv.x), fx(sv.y), fx(sv.z)
        )?;
    }
    Ok(())
}

fn vtk_vectors<T: Real, W: Write>(out: &mut W, name: &str, values: impl Iterator<Item = Vec3<T>>) -> io::Result<()> {
    writeln!(out, "VECTORS {name} double")?;
    for v in values {
        writeln!(out, "{} {} {}", fx(v.x), fx(v.y), fx(v.z))?;
    }
    Ok(())
}

/// Legacy ASCII structured points with vectors `E`, `B`, `S` and scalar `u`.
pub fn write_grid_vtk<T: Real, W: Write>(out: &mut W, g: &GridFields<T>, s: &PhysicalScales<T>) -> io::Result<()> {
    let n = g.grid.points;
    let o = g.grid.coord(0);
    let d = g.grid.spacing();
    writeln!(out, "{VTK_HEADER}")?;
    writeln!(out, "knotfield fields T={}", fx(g.t))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {n} {n} {n}")?;
    writeln!(out, "ORIGIN {} {} {}", fx(o), fx(o), fx(o))?;
    writeln!(out, "SPACING {} {} {}", fx(d), fx(d), fx(d))?;
    writeln!(out, "POINT_DATA {}", n * n * n)?;
    // VTK runs x fastest; the grid stores z fastest
    let order = || (0..n).flat_map(move |k| (0..n).flat_map(move |j| (0..n).map(move |i| (i, j, k))));
    let idx = |(i, j, k)| g.grid.index(i, j, k);
    vtk_vectors(out, "E", order().map(|c| g.e[idx(c)]))?;
    vtk_vectors(out, "B", order().map(|c| g.b[idx(c)]))?;
    vtk_vectors(out, "S", order().map(|c| derived(g, s, idx(c)).1))?;
    writeln!(out, "SCALARS u double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for c in order() {
        writeln!(out, "{}", fx(derived(g, s, idx(c)).0))?;
    }
    Ok(())
}

/// `s,X,Y,Z` with `s` the cumulative arc length.
pub fn write_curve_csv<T: Real, W: Write>(out: &mut W, c: &Curve<T>) -> io::Result<()> {
    writeln!(out, "s,X,Y,Z")?;
    let mut arc = T::zero();
    let mut prev = c.points.first().copied();
    for p in &c.points {
        if let Some(q) = prev {
            arc = arc + (*p - q).norm();
        }
        prev = Some(*p);
        writeln!(out, "{},{},{},{}", fx(arc), fx(p.x), fx(p.y), fx(p.z))?;
    }
    Ok(())
}

/// Legacy ASCII polydata holding the curve as one polyline.
pub fn write_curve_vtk<T: Real, W: Write>(out: &mut W, c: &Curve<T>) -> io::Result<()> {
    let n = c.points.len();
    writeln!(out, "{VTK_HEADER}")?;
    writeln!(out, "knotfield field line closed={}", c.closed)?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET POLYDATA")?;
    writeln!(out, "POINTS {n} double")?;
    for p in &c.points {
        writeln!(out, "{} {} {}", fx(p.x), fx(p.y), fx(p.z))?;
    }
    let len = if c.closed && n > 0 { n + 1 } else { n };
    writeln!(out, "LINES 1 {}", len + 1)?;
    write!(out, "{len}")?;
    for i in 0..len {
        write!(out, " {}", i % n.max(1))?;
    }
    writeln!(out)
}

/// `Kx,Ky,Kz`, real and imaginary parts of `W`, then `|α₊|²` and `|α₋|²`.
pub fn write_spectral_csv<T: Real, W: Write>(
    out: &mut W,
    wave_vectors: &[Vec3<T>],
    k: &KnotIndices,
    s: &PhysicalScales<T>,
) -> io::Result<()> {
    writeln!(out, "Kx,Ky,Kz,ReWx,ImWx,ReWy,ImWy,ReWz,ImWz,abs_alpha_plus_sq,abs_alpha_minus_sq")?;
    for &kv in wave_vectors {
        let wv = WaveVec::new(kv);
        let w = w_vector(&wv, k);
        let a = |h| alpha(&wv, h, k, s).map(|z: Complex<T>| z.norm_sqr()).unwrap_or(T::zero());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fx(kv.x), fx(kv.y), fx(kv.z),
            fx(w.x.re), fx(w.x.im), fx(w.y.re), fx(w.y.im), fx(w.z.re), fx(w.z.im),
            fx(a(Helicity::Plus)), fx(a(Helicity::Minus))
        )?;
    }
    Ok(())
}

/// One row of a correlation scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationRow<T> {
    pub x: CorrelationPoint<T>,
    pub y: CorrelationPoint<T>,
    pub g1: Complex<T>,
    pub g2: T,
}

pub fn write_correlation_csv<T: Real, W: Write>(out: &mut W, rows: &[CorrelationRow<T>]) -> io::Result<()> {
    writeln!(out, "x1,y1,z1,t1,x2,y2,z2,t2,re_g1,im_g1,abs_g1,g2")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            fx(r.x.x.x), fx(r.x.x.y), fx(r.x.x.z), fx(r.x.t),
            fx(r.y.x.x), fx(r.y.x.y), fx(r.y.x.z), fx(r.y.t),
            fx(r.g1.re), fx(r.g1.im), fx(r.g1.norm()), fx(r.g2)
        )?;
    }
    Ok(())
}
