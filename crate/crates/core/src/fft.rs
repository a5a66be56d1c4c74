//! Cubic sampling grids, 3D FFTs and the Fourier transform of the initial fields.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{field_at, field_unit, initial_fields};
use crate::params::{KnotIndices, PhysicalScales, Point4};
use crate::scalar::Real;
use crate::vector::{CVec3, Vec3};

/// Cube `[-half_width, half_width)³` sampled with `points` nodes per axis (periodic layout).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FftGrid<T> {
    pub points: usize,
    pub half_width: T,
}

impl<T: Real> FftGrid<T> {
    pub fn new(points: usize, half_width: T) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!("points per axis {points} < 2")));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        Ok(Self { points, half_width })
    }

    pub fn len(&self) -> usize {
        self.points * self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    pub fn spacing(&self) -> T {
        T::lit(2.0) * self.half_width / T::lit(self.points as f64)
    }

    pub fn coord(&self, i: usize) -> T {
        -self.half_width + self.spacing() * T::lit(i as f64)
    }

    /// Angular wavenumber of FFT bin `i` in standard ordering.
    pub fn wavenumber(&self, i: usize) -> T {
        let n = self.points as i64;
        let j = if (i as i64) < (n + 1) / 2 { i as i64 } else { i as i64 - n };
        T::lit(j as f64) * self.dk()
    }

    pub fn dk(&self) -> T {
        T::PI() / self.half_width
    }

    pub fn nyquist(&self) -> T {
        T::PI() / self.spacing()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.points + j) * self.points + k
    }

    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.points;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    pub fn position(&self, idx: usize) -> Vec3<T> {
        let (i, j, k) = self.unindex(idx);
        Vec3::new(self.coord(i), self.coord(j), self.coord(k))
    }

    pub fn wave_vector(&self, idx: usize) -> Vec3<T> {
        let (i, j, k) = self.unindex(idx);
        Vec3::new(self.wavenumber(i), self.wavenumber(j), self.wavenumber(k))
    }

    /// FFT bin of a wave vector lying on this grid's lattice.
    pub fn bin_of(&self, kv: Vec3<T>) -> usize {
        let n = self.points as i64;
        let b = |c: T| -> usize {
            let j = (c / self.dk()).round().to_i64().unwrap_or(0);
            j.rem_euclid(n) as usize
        };
        self.index(b(kv.x), b(kv.y), b(kv.z))
    }
}

/// In-place unnormalized 3D transform of an `n³` array in `(x, y, z)` row-major order.
///
/// `Forward` computes `Σ_j f_j e^{-2πi jk/n}`, `Inverse` the same with `e^{+…}`.
pub fn fft3<T: Real>(data: &mut [Complex<T>], n: usize, direction: FftDirection) {
    assert_eq!(data.len(), n * n * n, "fft3 buffer size");
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft(n, direction);

    // z: contiguous lines
    data.par_chunks_mut(n).for_each(|line| fft.process(line));

    // y: within each x-slab
    data.par_chunks_mut(n * n).for_each(|slab| {
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        for k in 0..n {
            for j in 0..n {
                line[j] = slab[j * n + k];
            }
            fft.process(&mut line);
            for j in 0..n {
                slab[j * n + k] = line[j];
            }
        }
    });

    // x: gather strided lines one y-row at a time
    let mut block = vec![Complex::new(T::zero(), T::zero()); n * n];
    for j in 0..n {
        for i in 0..n {
            let src = (i * n + j) * n;
            for k in 0..n {
                block[k * n + i] = data[src + k];
            }
        }
        block.par_chunks_mut(n).for_each(|line| fft.process(line));
        for i in 0..n {
            let dst = (i * n + j) * n;
            for k in 0..n {
                data[dst + k] = block[k * n + i];
            }
        }
    }
}

/// Discrete `F(K) = (2π)^{-3/2} ∫ e^{iK·X} (B + iE/c) d³X` on the grid's wave vectors.
#[derive(Debug, Clone)]
pub struct SpectralGrid<T> {
    pub grid: FftGrid<T>,
    pub components: [Vec<Complex<T>>; 3],
}

impl<T: Real> SpectralGrid<T> {
    pub fn at(&self, idx: usize) -> CVec3<T> {
        CVec3::new(self.components[0][idx], self.components[1][idx], self.components[2][idx])
    }

    /// Largest `|K·F(K)| / (|K||F(K)|)` over bins with `|K| ≤ k_max` and non-negligible `|F|`.
    pub fn max_longitudinal_fraction(&self, k_max: T) -> T {
        let peak = (0..self.grid.len())
            .map(|i| self.at(i).norm())
            .fold(T::zero(), T::max);
        let floor = peak * T::lit(1e-8);
        (0..self.grid.len())
            .filter_map(|i| {
                let kv = self.grid.wave_vector(i);
                let km = kv.norm();
                let f = self.at(i);
                (km > T::zero() && km <= k_max && f.norm() > floor).then(|| f.dot_real(kv).norm() / (km * f.norm()))
            })
            .fold(T::zero(), T::max)
    }
}

pub const MIN_NYQUIST: f64 = 8.0;
pub const TRUNCATION_TOLERANCE: f64 = 1e-4;

/// Ratio of the largest field magnitude on the cube's boundary faces to the global peak.
pub fn boundary_fraction<T: Real>(samples: &[Vec3<T>], grid: &FftGrid<T>) -> T {
    let n = grid.points;
    let mut peak = T::zero();
    let mut edge = T::zero();
    for (idx, v) in samples.iter().enumerate() {
        let m = v.norm();
        peak = peak.max(m);
        let (i, j, k) = grid.unindex(idx);
        if [i, j, k].iter().any(|&c| c == 0 || c == n - 1) {
            edge = edge.max(m);
        }
    }
    if peak == T::zero() {
        T::zero()
    } else {
        edge / peak
    }
}

pub fn fft_initial_oracle<T: Real>(
    grid: &FftGrid<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
) -> Result<SpectralGrid<T>> {
    if grid.nyquist() < T::lit(MIN_NYQUIST) {
        return Err(Error::GridTooCoarse {
            nyquist: grid.nyquist().to_f64_lossy(),
            required: MIN_NYQUIST,
        });
    }
    let sampled = GridFields::sample_initial(grid, k, s)?;
    let c = s.c();
    let unit = field_unit(s);
    let scale_free: Vec<Vec3<T>> = if unit > T::zero() {
        sampled
            .b
            .iter()
            .zip(&sampled.e)
            .map(|(b, e)| Vec3::new(b.norm(), e.norm() / c, T::zero()))
            .collect()
    } else {
        vec![Vec3::zero(); grid.len()]
    };
    let est = boundary_fraction(&scale_free, grid);
    if est > T::lit(TRUNCATION_TOLERANCE) {
        return Err(Error::DomainTooSmall {
            half_width: grid.half_width.to_f64_lossy(),
            estimate: est.to_f64_lossy(),
            tolerance: TRUNCATION_TOLERANCE,
        });
    }

    let n = grid.points;
    let dx = grid.spacing();
    let norm = dx * dx * dx / (T::lit(2.0) * T::PI()).powf(T::lit(1.5));
    let h = grid.half_width;
    let mut components: [Vec<Complex<T>>; 3] = Default::default();
    for (axis, out) in components.iter_mut().enumerate() {
        let mut buf: Vec<Complex<T>> = sampled
            .b
            .iter()
            .zip(&sampled.e)
            .map(|(b, e)| Complex::new(b[axis], e[axis] / c))
            .collect();
        fft3(&mut buf, n, FftDirection::Inverse);
        // Σ_j e^{iK·x_j} with x_j = -H + j dx picks up e^{-iK·(H,H,H)}
        buf.par_iter_mut().enumerate().for_each(|(idx, v)| {
            let kv = grid.wave_vector(idx);
            let phase = -(kv.x + kv.y + kv.z) * h;
            *v = *v * Complex::from_polar(norm, phase);
        });
        *out = buf;
    }
    Ok(SpectralGrid { grid: *grid, components })
}

/// `E` and `B` sampled on every node of a grid at one time.
#[derive(Debug, Clone)]
pub struct GridFields<T> {
    pub grid: FftGrid<T>,
    pub t: T,
    pub e: Vec<Vec3<T>>,
    pub b: Vec<Vec3<T>>,
}

impl<T: Real> GridFields<T> {
    pub fn sample(grid: &FftGrid<T>, t: T, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<Self> {
        let pairs: Result<Vec<(Vec3<T>, Vec3<T>)>> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = Point4::at(grid.position(idx), t);
                field_at(&p, k, s).map(|f| (f.e, f.b))
            })
            .collect();
        let (e, b) = pairs?.into_iter().unzip();
        Ok(Self { grid: *grid, t, e, b })
    }

    pub fn sample_initial(grid: &FftGrid<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<Self> {
        let pairs: Result<Vec<(Vec3<T>, Vec3<T>)>> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let p = Point4::at(grid.position(idx), T::zero());
                initial_fields(&p, k, s).map(|f| (f.e, f.b))
            })
            .collect();
        let (e, b) = pairs?.into_iter().unzip();
        Ok(Self { grid: *grid, t: T::zero(), e, b })
    }

    /// The central `m³` block, returned on its own grid description.
    pub fn central(&self, m: usize) -> Result<Self> {
        let n = self.grid.points;
        if m > n || (n - m) % 2 != 0 {
            return Err(Error::InvalidGrid(format!("cannot take a central {m}³ block of {n}³")));
        }
        let lo = (n - m) / 2;
        let mut e = Vec::with_capacity(m * m * m);
        let mut b = Vec::with_capacity(m * m * m);
        for i in lo..lo + m {
            for j in lo..lo + m {
                for k in lo..lo + m {
                    let idx = self.grid.index(i, j, k);
                    e.push(self.e[idx]);
                    b.push(self.b[idx]);
                }
            }
        }
        let hw = self.grid.spacing() * T::lit(m as f64) / T::lit(2.0);
        Ok(Self {
            grid: FftGrid::new(m, hw)?,
            t: self.t,
            e,
            b,
        })
    }
}

/// Least-squares global constant `κ` minimizing `‖reference − κ·model‖` over `E/c` and `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationFit<T> {
    pub constant: T,
    pub rel_l2_error: T,
}

pub fn fit_normalization<T: Real>(model: &GridFields<T>, reference: &GridFields<T>, c: T) -> NormalizationFit<T> {
    let mut num = T::zero();
    let mut den = T::zero();
    for i in 0..model.e.len() {
        num = num + model.e[i].dot(reference.e[i]) / (c * c) + model.b[i].dot(reference.b[i]);
        den = den + model.e[i].norm_sq() / (c * c) + model.b[i].norm_sq();
    }
    let constant = if den > T::zero() { num / den } else { T::zero() };
    NormalizationFit {
        constant,
        rel_l2_error: relative_l2_error(model, reference, constant, c),
    }
}

/// `‖reference − κ·model‖ / ‖reference‖` over `E/c` and `B` jointly.
pub fn relative_l2_error<T: Real>(model: &GridFields<T>, reference: &GridFields<T>, kappa: T, c: T) -> T {
    let mut diff = T::zero();
    let mut total = T::zero();
    for i in 0..model.e.len() {
        diff = diff + (reference.e[i] - model.e[i] * kappa).norm_sq() / (c * c)
            + (reference.b[i] - model.b[i] * kappa).norm_sq();
        total = total + reference.e[i].norm_sq() / (c * c) + reference.b[i].norm_sq();
    }
    if total > T::zero() {
        (diff / total).sqrt()
    } else {
        diff.sqrt()
    }
}
