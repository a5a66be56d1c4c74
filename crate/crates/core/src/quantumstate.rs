//! The coherent state as an amplitude function on a discrete set of modes.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::{fft3, FftGrid, GridFields};
use crate::params::{KnotIndices, PhysicalScales};
use crate::quadrature::{gauss_legendre, k3_rule, QuadratureSpec};
use crate::scalar::Real;
use crate::spectral::{alpha_in_basis, amplitude_vector, polarization_basis, Helicity, WaveVec};
use crate::vector::{CVec3, Vec3};

/// Dimensionless spacetime point at which field correlations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationPoint<T> {
    pub x: Vec3<T>,
    pub t: T,
}

impl<T: Real> CorrelationPoint<T> {
    pub fn new(x: Vec3<T>, t: T) -> Self {
        Self { x, t }
    }
}

fn orthonormal_frame<T: Real>(axis: Vec3<T>) -> (Vec3<T>, Vec3<T>, Vec3<T>) {
    let ez = axis.normalized().unwrap_or(Vec3::unit_z());
    let trial = if ez.x.abs() < T::lit(0.9) { Vec3::unit_x() } else { Vec3::unit_y() };
    let ea = (trial - ez * trial.dot(ez)).normalized().unwrap_or(Vec3::unit_x());
    let eb = ez.cross(ea);
    (ea, eb, ez)
}

/// `∫ dΩ U(K̂) · 6 / (1 − i(K̂·X − T))⁴`, the radial integral done exactly.
fn angular_positive_frequency<T: Real>(x: Vec3<T>, t: T, k: &KnotIndices, n_polar: usize, n_azimuth: usize) -> CVec3<T> {
    let (ea, eb, ez) = orthonormal_frame(x);
    let r = x.norm();
    let gl = gauss_legendre(n_polar);
    let dphi = T::lit(2.0 * std::f64::consts::PI / n_azimuth as f64);
    let six = T::lit(6.0);
    let one = Complex::new(T::one(), T::zero());
    let terms: Vec<CVec3<T>> = gl
        .nodes
        .par_iter()
        .zip(gl.weights.par_iter())
        .map(|(&u, &wu)| {
            let u = T::lit(u);
            let st = (T::one() - u * u).max(T::zero()).sqrt();
            let c = r * u - t;
            let denom = (one - Complex::new(T::zero(), c)).powi(4);
            let radial = Complex::new(six, T::zero()) / denom;
            let mut acc = CVec3::zero();
            for j in 0..n_azimuth {
                let phi = dphi * T::lit(j as f64);
                let (sp, cp) = phi.sin_cos();
                let khat = ea * (st * cp) + eb * (st * sp) + ez * u;
                if let Ok(v) = amplitude_vector(&WaveVec::new(khat), k) {
                    acc += v;
                }
            }
            acc.scale(radial).scale_re(T::lit(wu) * dphi)
        })
        .collect();
    terms.into_iter().fold(CVec3::zero(), |a, b| a + b)
}

/// `∫ dφ U` on the circle of polar cosine `u` about `ez`; exact for the quadratic `U`.
fn azimuthal_integral<T: Real>(u: T, frame: (Vec3<T>, Vec3<T>, Vec3<T>), k: &KnotIndices) -> CVec3<T> {
    const N: usize = 8;
    let (ea, eb, ez) = frame;
    let st = (T::one() - u * u).max(T::zero()).sqrt();
    let dphi = T::lit(2.0 * std::f64::consts::PI / N as f64);
    let mut acc = CVec3::zero();
    for j in 0..N {
        let (sp, cp) = (dphi * T::lit(j as f64)).sin_cos();
        let khat = ea * (st * cp) + eb * (st * sp) + ez * u;
        if let Ok(v) = amplitude_vector(&WaveVec::new(khat), k) {
            acc += v;
        }
    }
    acc.scale_re(dphi)
}

/// Same integral as [`angular_positive_frequency`] with the polar integral done in closed form.
///
/// The azimuthal integral is a quadratic `c0 + c1 u + c2 u²`, and each
/// `∫₋₁¹ uʲ · 6/(α + βu)⁴ du` is elementary. Requires `|X| > 0`.
fn exact_positive_frequency<T: Real>(x: Vec3<T>, t: T, k: &KnotIndices) -> CVec3<T> {
    let frame = orthonormal_frame(x);
    let r = x.norm();
    let fm = azimuthal_integral(-T::one(), frame, k);
    let f0 = azimuthal_integral(T::zero(), frame, k);
    let fp = azimuthal_integral(T::one(), frame, k);
    let half = T::lit(0.5);
    let c = [f0, (fp - fm).scale_re(half), (fp + fm).scale_re(half) - f0];

    let alpha = Complex::new(T::one(), t);
    let beta = Complex::new(T::zero(), -r);
    // ∫ D^{q} du with D = α + βu, q ∈ {−4, −3, −2}
    let power = |q: i32| {
        let at = |u: T| (alpha + beta * u).powi(q + 1) / (beta * T::lit((q + 1) as f64));
        at(T::one()) - at(-T::one())
    };
    let binom = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [1.0, 2.0, 1.0]];
    let mut total = CVec3::zero();
    for (j, cj) in c.iter().enumerate() {
        // uʲ = β⁻ʲ (D − α)ʲ
        let mut ij = Complex::new(T::zero(), T::zero());
        for (q, &b) in binom[j].iter().enumerate().take(j + 1) {
            ij = ij + (-alpha).powi((j - q) as i32) * T::lit(b) * power(q as i32 - 4);
        }
        ij = ij * T::lit(6.0) / beta.powi(j as i32);
        total += cj.scale(ij);
    }
    total
}

/// Positive-frequency electric field `E⁽⁺⁾` from the mode integral.
///
/// Normalized so that `2 Re E⁽⁺⁾` times the mode normalization constant equals the closed-form `E`.
pub fn e_plus<T: Real>(
    p: &CorrelationPoint<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<CVec3<T>> {
    spec.validate()?;
    let r = p.x.norm();
    let raw = if r >= T::one() {
        exact_positive_frequency(p.x, p.t, k)
    } else {
        polar_quadrature(p, k, spec)?
    };
    let pi = T::PI();
    let l0 = s.l0();
    let pref = s.c() * s.a().sqrt() / (l0 * l0)
        / (T::lit(2.0) * T::lit(2.0) * T::SQRT_2() * pi * pi * T::lit(8.0) * pi.powi(3));
    Ok(raw.scale(Complex::new(T::zero(), pref)))
}

fn polar_quadrature<T: Real>(p: &CorrelationPoint<T>, k: &KnotIndices, spec: &QuadratureSpec<T>) -> Result<CVec3<T>> {
    let r = p.x.norm();
    let n_polar = (spec.angular_order + 1)
        .div_ceil(2)
        .max(24 + (T::lit(20.0) * r).ceil().to_usize().unwrap_or(usize::MAX / 2));
    let n_azimuth = (spec.angular_order + 1).max(8);
    let low = angular_positive_frequency(p.x, p.t, k, n_polar, n_azimuth);
    let high = angular_positive_frequency(p.x, p.t, k, n_polar + 8, n_azimuth);
    let err = (high - low).norm();
    if err > spec.abs_tol.max(spec.rel_tol * high.norm()) {
        return Err(Error::NoConvergence {
            estimate: err.to_f64_lossy(),
            radial_order: 0,
            angular_order: n_polar + 8,
        });
    }
    Ok(high)
}

/// `g⁽¹⁾` from two positive-frequency fields.
pub fn first_order_coherence<T: Real>(ex: CVec3<T>, ey: CVec3<T>) -> Result<Complex<T>> {
    let ix = ex.norm_sq();
    let iy = ey.norm_sq();
    if !(ix > T::zero()) || !(iy > T::zero()) {
        return Err(Error::ZeroIntensity);
    }
    Ok(ex.hdot(ey) / (ix * iy).sqrt())
}

/// `g⁽²⁾` from two positive-frequency fields.
pub fn second_order_coherence<T: Real>(ex: CVec3<T>, ey: CVec3<T>) -> Result<T> {
    let ix = ex.norm_sq();
    let iy = ey.norm_sq();
    if !(ix > T::zero()) || !(iy > T::zero()) {
        return Err(Error::ZeroIntensity);
    }
    // ⟨:I(x)I(y):⟩ factorizes in a coherent state
    let joint = ix * iy;
    Ok(joint / (ix * iy))
}

pub fn g1<T: Real>(
    x: &CorrelationPoint<T>,
    y: &CorrelationPoint<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<Complex<T>> {
    first_order_coherence(e_plus(x, k, s, spec)?, e_plus(y, k, s, spec)?)
}

pub fn g2<T: Real>(
    x: &CorrelationPoint<T>,
    y: &CorrelationPoint<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<T> {
    second_order_coherence(e_plus(x, k, s, spec)?, e_plus(y, k, s, spec)?)
}

/// One plane-wave mode with its measure weight and coherent amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode<T> {
    pub k: Vec3<T>,
    pub helicity: Helicity,
    pub weight: T,
    /// Angular frequency in units of `c/L0`.
    pub omega: T,
    pub amplitude: Complex<T>,
}

/// Discretized mode continuum; `grid` is set when the modes sit on an FFT lattice.
#[derive(Debug, Clone)]
pub struct ModeSet<T> {
    pub modes: Vec<Mode<T>>,
    pub scales: PhysicalScales<T>,
    pub grid: Option<FftGrid<T>>,
    /// Dimensionless time `T` the amplitudes refer to.
    pub time: T,
}

fn mode_pair<T: Real>(kv: Vec3<T>, weight: T, k: &KnotIndices, s: &PhysicalScales<T>) -> Option<[Mode<T>; 2]> {
    let wv = WaveVec::new(kv);
    let basis = polarization_basis(&wv).ok()?;
    let make = |h| -> Option<Mode<T>> {
        Some(Mode {
            k: kv,
            helicity: h,
            weight,
            omega: wv.kmag,
            amplitude: alpha_in_basis(&wv, h, &basis, k, s).ok()?,
        })
    };
    Some([make(Helicity::Plus)?, make(Helicity::Minus)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeTotals<T> {
    pub photon_number: T,
    pub energy: T,
}

impl<T: Real> ModeSet<T> {
    /// Modes on the nodes of the `e^{-2K}` product rule used for the observables.
    pub fn from_quadrature(k: &KnotIndices, s: &PhysicalScales<T>, spec: &QuadratureSpec<T>) -> Result<Self> {
        spec.validate()?;
        let rule = k3_rule::<T>(spec.radial_order, spec.angular_order, T::lit(2.0));
        let measure = measure(s);
        let modes = rule
            .nodes
            .par_iter()
            .filter_map(|&(kv, w)| mode_pair(kv, w * measure, k, s))
            .flatten_iter()
            .collect();
        Ok(Self {
            modes,
            scales: *s,
            grid: None,
            time: T::zero(),
        })
    }

    /// Modes on every nonzero wave vector of an FFT lattice.
    pub fn on_grid(grid: &FftGrid<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<Self> {
        let dk = grid.dk();
        let weight = dk * dk * dk * measure(s);
        let modes = (1..grid.len())
            .into_par_iter()
            .filter_map(|idx| mode_pair(grid.wave_vector(idx), weight, k, s))
            .flatten_iter()
            .collect();
        Ok(Self {
            modes,
            scales: *s,
            grid: Some(*grid),
            time: T::zero(),
        })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, index: usize) -> Result<&Mode<T>> {
        self.modes.get(index).ok_or(Error::ModeOutOfRange {
            index,
            len: self.modes.len(),
        })
    }

    /// Index of the mode with the largest `|α|²`.
    pub fn brightest(&self) -> Option<usize> {
        self.modes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.amplitude.norm_sqr().partial_cmp(&b.1.amplitude.norm_sqr()).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
    }

    /// `Σ w |α|²` and `Σ w ħω |α|²` with `ω = c K / L0`.
    pub fn totals(&self) -> ModeTotals<T> {
        let mut n = T::zero();
        let mut e = T::zero();
        for m in &self.modes {
            let p = m.weight * m.amplitude.norm_sqr();
            n = n + p;
            e = e + p * m.omega;
        }
        let s = &self.scales;
        ModeTotals {
            photon_number: n,
            energy: e * s.hbar() * s.c() / s.l0(),
        }
    }

    /// Mode expansion of `E` and `B` on the set's FFT lattice (without the global normalization).
    pub fn reconstruct_fields(&self) -> Result<GridFields<T>> {
        let grid = self
            .grid
            .ok_or_else(|| Error::InvalidGrid("mode set is not defined on an FFT lattice".into()))?;
        let n = grid.points;
        let len = grid.len();
        let zero = Complex::new(T::zero(), T::zero());
        let half = T::lit(0.5);
        let h = grid.half_width;
        let mut out_e = vec![Vec3::zero(); len];
        let mut out_b = vec![Vec3::zero(); len];
        for magnetic in [false, true] {
            let mut comps = [vec![zero; len], vec![zero; len], vec![zero; len]];
            for m in &self.modes {
                let wv = WaveVec::new(m.k);
                let basis = polarization_basis(&wv)?;
                let eps = basis.vector(m.helicity);
                let pol = if magnetic {
                    CVec3::real_cross(wv.direction()?, eps)
                } else {
                    eps
                };
                // i √(ω/2) α w, shifted for the grid origin at -H
                let coeff = Complex::new(T::zero(), (m.omega * half).sqrt() * m.weight) * m.amplitude;
                let phase = Complex::from_polar(T::one(), -(m.k.x + m.k.y + m.k.z) * h);
                let v = pol.scale(coeff * phase);
                let bin = grid.bin_of(m.k);
                comps[0][bin] = comps[0][bin] + v.x;
                comps[1][bin] = comps[1][bin] + v.y;
                comps[2][bin] = comps[2][bin] + v.z;
            }
            for c in comps.iter_mut() {
                fft3(c, n, FftDirection::Inverse);
            }
            let two = T::lit(2.0);
            let target = if magnetic { &mut out_b } else { &mut out_e };
            target.par_iter_mut().enumerate().for_each(|(i, v)| {
                *v = Vec3::new(comps[0][i].re, comps[1][i].re, comps[2][i].re) * two;
            });
        }
        Ok(GridFields {
            grid,
            t: self.time,
            e: out_e,
            b: out_b,
        })
    }
}

fn measure<T: Real>(s: &PhysicalScales<T>) -> T {
    let l0 = s.l0();
    T::one() / ((T::lit(2.0) * T::PI()).powi(3) * l0 * l0 * l0)
}

/// Every amplitude multiplied by `e^{-iωt}`, `t` in units of `L0/c`.
pub fn evolve<T: Real>(ms: &ModeSet<T>, t: T) -> ModeSet<T> {
    let modes = ms
        .modes
        .par_iter()
        .map(|m| Mode {
            amplitude: m.amplitude * Complex::from_polar(T::one(), -m.omega * t),
            ..*m
        })
        .collect();
    ModeSet {
        modes,
        scales: ms.scales,
        grid: ms.grid,
        time: ms.time + t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhotonStatistics<T> {
    pub mean: T,
    pub variance: T,
    pub fano: T,
}

/// Poisson moments of the photon number in one mode.
pub fn mode_statistics<T: Real>(ms: &ModeSet<T>, index: usize) -> Result<PhotonStatistics<T>> {
    let mean = ms.mode(index)?.amplitude.norm_sqr();
    Ok(poisson_statistics(mean))
}

pub fn poisson_statistics<T: Real>(mean: T) -> PhotonStatistics<T> {
    let variance = mean;
    let fano = if mean > T::zero() { variance / mean } else { T::zero() };
    PhotonStatistics { mean, variance, fano }
}

/// Seeded Monte-Carlo photon counts for one mode.
pub fn sample_photon_counts<T: Real>(ms: &ModeSet<T>, index: usize, draws: usize, seed: u64) -> Result<Vec<u64>> {
    let mean = ms.mode(index)?.amplitude.norm_sqr().to_f64_lossy();
    Ok(sample_poisson(mean, draws, seed))
}

pub fn sample_poisson(mean: f64, draws: usize, seed: u64) -> Vec<u64> {
    if !(mean > 0.0) {
        return vec![0; draws];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Poisson::new(mean).expect("positive finite mean");
    (0..draws).map(|_| dist.sample(&mut rng) as u64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureMoments<T> {
    pub mean_x: T,
    pub mean_p: T,
    pub var_x: T,
    pub var_p: T,
    /// `ΔX · ΔP`
    pub product: T,
}

/// Field-quadrature moments with `X = (a + a†)/√2`, `P = (a − a†)/(i√2)`, `ħ = 1`.
pub fn quadrature_moments<T: Real>(alpha: Complex<T>) -> QuadratureMoments<T> {
    let half = T::lit(0.5);
    let mean_x = T::SQRT_2() * alpha.re;
    let mean_p = T::SQRT_2() * alpha.im;
    // normally ordered second moments factorize: ⟨:X²:⟩ = ⟨X⟩²
    let normal_x2 = mean_x * mean_x;
    let normal_p2 = mean_p * mean_p;
    let var_x = half + (normal_x2 - mean_x * mean_x);
    let var_p = half + (normal_p2 - mean_p * mean_p);
    QuadratureMoments {
        mean_x,
        mean_p,
        var_x,
        var_p,
        product: (var_x * var_p).sqrt(),
    }
}

pub fn quadrature_uncertainties<T: Real>(ms: &ModeSet<T>, index: usize) -> Result<QuadratureMoments<T>> {
    Ok(quadrature_moments(ms.mode(index)?.amplitude))
}
