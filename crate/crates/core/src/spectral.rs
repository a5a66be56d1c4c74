//! Wave-vector space: the amplitude vector `W(K)`, circular polarization bases and the
//! coherent-state mode amplitudes.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{KnotIndices, PhysicalScales};
use crate::scalar::Real;
use crate::vector::{CVec3, Vec3};

/// Dimensionless wave vector `K = L0 k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveVec<T> {
    pub k: Vec3<T>,
    pub kmag: T,
}

impl<T: Real> WaveVec<T> {
    pub fn new(k: Vec3<T>) -> Self {
        Self { k, kmag: k.norm() }
    }

    pub fn from_xyz(x: T, y: T, z: T) -> Self {
        Self::new(Vec3::new(x, y, z))
    }

    pub fn direction(&self) -> Result<Vec3<T>> {
        if self.kmag > T::zero() {
            Ok(self.k / self.kmag)
        } else {
            Err(Error::ZeroWaveVector)
        }
    }
}

/// The complex amplitude vector `W(K)`; zero at the origin.
pub fn w_vector<T: Real>(kv: &WaveVec<T>, k: &KnotIndices) -> CVec3<T> {
    let kk = kv.kmag;
    if kk == T::zero() {
        return CVec3::zero();
    }
    let (n, m, l, s) = k.as_real::<T>();
    let Vec3 { x, y, z } = kv.k;
    let c = |re: T, im: T| Complex::new(re, im);
    CVec3::new(
        c(n * x * z / kk, m * y + l * (kk - x * x / kk)),
        c(n * y * z / kk + s * z, -m * x - l * x * y / kk),
        c(n * (-kk + z * z / kk) - s * y, -l * x * z / kk),
    )
}

/// `|W(K)|²` in closed form.
pub fn w_norm_sq<T: Real>(kv: &WaveVec<T>, k: &KnotIndices) -> T {
    let (n, m, l, s) = k.as_real::<T>();
    let Vec3 { x, y, z } = kv.k;
    let kk = kv.kmag;
    let k2 = kk * kk;
    let two = T::lit(2.0);
    n * n * (k2 - z * z)
        + m * m * (x * x + y * y)
        + l * l * (k2 - x * x)
        + s * s * (y * y + z * z)
        + two * (n * s + m * l) * kk * y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub const BOTH: [Helicity; 2] = [Helicity::Plus, Helicity::Minus];

    pub fn sign<T: Real>(self) -> T {
        match self {
            Helicity::Plus => T::one(),
            Helicity::Minus => -T::one(),
        }
    }
}

/// Right-handed triad `(e1, e2, K̂)` and the circular vectors `ε± = (e1 ± i e2)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationBasis<T> {
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub eplus: CVec3<T>,
    pub eminus: CVec3<T>,
}

impl<T: Real> PolarizationBasis<T> {
    fn from_pair(e1: Vec3<T>, e2: Vec3<T>) -> Self {
        let r = T::FRAC_1_SQRT_2();
        Self {
            e1,
            e2,
            eplus: CVec3::from_parts(e1 * r, e2 * r),
            eminus: CVec3::from_parts(e1 * r, -e2 * r),
        }
    }

    pub fn vector(&self, h: Helicity) -> CVec3<T> {
        match h {
            Helicity::Plus => self.eplus,
            Helicity::Minus => self.eminus,
        }
    }

    /// The same triad with `(e1, e2)` rotated by `psi` about `K̂`.
    pub fn rotated(&self, psi: T) -> Self {
        let (sn, cs) = psi.sin_cos();
        Self::from_pair(self.e1 * cs + self.e2 * sn, self.e2 * cs - self.e1 * sn)
    }
}

pub fn polarization_basis<T: Real>(kv: &WaveVec<T>) -> Result<PolarizationBasis<T>> {
    let khat = kv.direction()?;
    let zc = Vec3::unit_z().cross(khat);
    let e1 = if zc.norm() > T::lit(1e-8) {
        zc / zc.norm()
    } else {
        Vec3::unit_x()
    };
    let e2 = khat.cross(e1);
    Ok(PolarizationBasis::from_pair(e1, e2))
}

/// Field-consistent amplitude vector `U = i K̂ × conj(W)`.
///
/// With this vector the mode expansion of `A`, `E` and `B` reproduces the closed-form fields
/// up to one global constant ([`mode_normalization`]).
pub fn amplitude_vector<T: Real>(kv: &WaveVec<T>, k: &KnotIndices) -> Result<CVec3<T>> {
    let khat = kv.direction()?;
    let cross = CVec3::real_cross(khat, w_vector(kv, k).conj());
    Ok(cross.scale(Complex::new(T::zero(), T::one())))
}

/// `√a L0 / (2^{3/2} π² √(2 ω_K)) · e^{-K}` with `ω_K = |K|`.
pub fn alpha_envelope<T: Real>(kmag: T, s: &PhysicalScales<T>) -> T {
    let two = T::lit(2.0);
    let pref = s.a().sqrt() * s.l0() / (two * T::SQRT_2() * T::PI() * T::PI());
    pref / (two * kmag).sqrt() * (-kmag).exp()
}

/// Coherent-state amplitude `α(K, λ)` projected onto an explicit basis.
pub fn alpha_in_basis<T: Real>(
    kv: &WaveVec<T>,
    h: Helicity,
    basis: &PolarizationBasis<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
) -> Result<Complex<T>> {
    let u = amplitude_vector(kv, k)?;
    Ok(basis.vector(h).hdot(u) * alpha_envelope(kv.kmag, s))
}

/// Coherent-state amplitude `α(K, λ) = envelope · conj(ε_λ) · U(K)`.
pub fn alpha<T: Real>(kv: &WaveVec<T>, h: Helicity, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<Complex<T>> {
    let basis = polarization_basis(kv)?;
    alpha_in_basis(kv, h, &basis, k, s)
}

/// The amplitude with `W` itself in place of `U`; kept for comparison.
pub fn alpha_printed<T: Real>(
    kv: &WaveVec<T>,
    h: Helicity,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
) -> Result<Complex<T>> {
    let basis = polarization_basis(kv)?;
    Ok(basis.vector(h).hdot(w_vector(kv, k)) * alpha_envelope(kv.kmag, s))
}

/// `|α₊|² − |α₋|²`
pub fn helicity_density<T: Real>(kv: &WaveVec<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> Result<T> {
    let basis = polarization_basis(kv)?;
    helicity_density_in_basis(kv, &basis, k, s)
}

pub fn helicity_density_in_basis<T: Real>(
    kv: &WaveVec<T>,
    basis: &PolarizationBasis<T>,
    k: &KnotIndices,
    s: &PhysicalScales<T>,
) -> Result<T> {
    let ap = alpha_in_basis(kv, Helicity::Plus, basis, k, s)?;
    let am = alpha_in_basis(kv, Helicity::Minus, basis, k, s)?;
    Ok(ap.norm_sqr() - am.norm_sqr())
}

/// Global constant relating the mode expansion built from `α` to the closed-form fields
/// (`E_closed = κ · E_modes`), valid for `L0 = c = 1`: `κ = 2^{5/2} π³`.
pub fn mode_normalization<T: Real>() -> T {
    T::lit(2f64.powf(2.5) * std::f64::consts::PI.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_indices;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn cclose(a: CVec3<f64>, b: CVec3<f64>) -> bool {
        (a - b).norm() < 1e-14 * (1.0 + b.norm())
    }

    #[test]
    fn w_vector_examples() {
        let k = validate_indices(2, 3, 5, 7).unwrap();
        let k0 = 1.7;
        let w = w_vector(&WaveVec::<f64>::from_xyz(0.0, 0.0, k0), &k);
        assert!(cclose(w, CVec3::new(c(0.0, 5.0 * k0), c(7.0 * k0, 0.0), c(0.0, 0.0))));
        let w = w_vector(&WaveVec::<f64>::from_xyz(k0, 0.0, 0.0), &k);
        assert!(cclose(w, CVec3::new(c(0.0, 0.0), c(0.0, -3.0 * k0), c(-2.0 * k0, 0.0))));
        assert_eq!(w_vector(&WaveVec::<f64>::from_xyz(0.0, 0.0, 0.0), &k), CVec3::zero());
    }

    #[test]
    fn w_norm_sq_examples() {
        let h = KnotIndices::HOPFION;
        // componentwise |(i, 1, 0)|² = 2
        let kz = WaveVec::<f64>::from_xyz(0.0, 0.0, 1.0);
        assert!((w_norm_sq(&kz, &h) - 2.0).abs() < 1e-15);
        assert!((w_vector(&kz, &h).norm_sq() - 2.0).abs() < 1e-15);
        let kx = WaveVec::<f64>::from_xyz(1.0, 0.0, 0.0);
        assert!((w_norm_sq(&kx, &h) - 2.0).abs() < 1e-15);
        let k1 = WaveVec::<f64>::from_xyz(0.3, -0.4, 0.5);
        let k2 = WaveVec::<f64>::from_xyz(0.6, -0.8, 1.0);
        assert!((w_norm_sq(&k2, &h) - 4.0 * w_norm_sq(&k1, &h)).abs() < 1e-14);
    }

    #[test]
    fn polarization_basis_examples() {
        let b = polarization_basis(&WaveVec::<f64>::from_xyz(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(b.e1, Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(b.e2, Vec3::new(0.0, 1.0, 0.0));
        let kv = WaveVec::<f64>::from_xyz(1.0, 0.0, 0.0);
        let b = polarization_basis(&kv).unwrap();
        assert!(b.e1.dot(kv.k).abs() < 1e-15 && b.e2.dot(kv.k).abs() < 1e-15);
        assert!((b.e1.norm() - 1.0).abs() < 1e-15 && (b.e2.norm() - 1.0).abs() < 1e-15);
        assert_eq!(polarization_basis(&WaveVec::<f64>::from_xyz(0.0, 0.0, 0.0)), Err(Error::ZeroWaveVector));
    }

    #[test]
    fn printed_alpha_on_z_axis() {
        let sc = PhysicalScales::<f64>::unit();
        let h = KnotIndices::HOPFION;
        let kv = WaveVec::<f64>::from_xyz(0.0, 0.0, 0.8);
        assert!(alpha_printed(&kv, Helicity::Plus, &h, &sc).unwrap().norm() < 1e-16);
        let am = alpha_printed(&kv, Helicity::Minus, &h, &sc).unwrap();
        // |conj(ε₋)·W|² = K₀²(l+s)²/2
        let expected = alpha_envelope(0.8, &sc).powi(2) * 0.64 * 4.0 / 2.0;
        assert!((am.norm_sqr() - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn field_consistent_alpha_swaps_helicities() {
        let sc = PhysicalScales::<f64>::unit();
        let k = validate_indices(2, 3, 1, 2).unwrap();
        for kv in [WaveVec::<f64>::from_xyz(0.3, -0.7, 0.2), WaveVec::<f64>::from_xyz(-1.1, 0.4, 0.9)] {
            for (a, b) in [(Helicity::Plus, Helicity::Minus), (Helicity::Minus, Helicity::Plus)] {
                let x = alpha(&kv, a, &k, &sc).unwrap().norm();
                let y = alpha_printed(&kv, b, &k, &sc).unwrap().norm();
                assert!((x - y).abs() < 1e-14 * y.max(1e-300));
            }
        }
    }

    #[test]
    fn helicity_density_on_z_axis_exposes_ls() {
        let sc = PhysicalScales::<f64>::unit();
        let k = validate_indices(1, 1, 2, 3).unwrap();
        let k0 = 0.6;
        let kv = WaveVec::<f64>::from_xyz(0.0, 0.0, k0);
        let env = alpha_envelope(k0, &sc);
        // (|l+s|² − |l−s|²)/2 · K₀² = 2 l s K₀²
        let expected = env * env * 2.0 * 6.0 * k0 * k0;
        let got = helicity_density(&kv, &k, &sc).unwrap();
        assert!((got - expected).abs() < 1e-14 * expected, "{got} vs {expected}");
    }

    #[test]
    fn zero_field_has_zero_helicity() {
        let sc = PhysicalScales::<f64>::unit().with_vanishing_intensity();
        let kv = WaveVec::<f64>::from_xyz(0.2, 0.5, -0.3);
        assert_eq!(helicity_density(&kv, &KnotIndices::HOPFION, &sc).unwrap(), 0.0);
    }

    #[test]
    fn alpha_decays_exponentially() {
        let sc = PhysicalScales::<f64>::unit();
        let dir = Vec3::new(0.36, 0.48, 0.8);
        let a = |r: f64| alpha(&WaveVec::new(dir * r), Helicity::Minus, &KnotIndices::HOPFION, &sc).unwrap().norm();
        assert!(a(40.0) / a(1.0) < 40f64.powi(10) * (-39f64).exp());
    }

    #[test]
    fn alpha_requires_nonzero_k() {
        let sc = PhysicalScales::<f64>::unit();
        let r = alpha(&WaveVec::<f64>::from_xyz(0.0, 0.0, 0.0), Helicity::Plus, &KnotIndices::HOPFION, &sc);
        assert_eq!(r, Err(Error::ZeroWaveVector));
    }

    fn arb_k() -> impl Strategy<Value = Vec3<f64>> {
        (-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0)
            .prop_filter("nonzero", |(x, y, z)| x * x + y * y + z * z > 1e-6)
            .prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    fn arb_indices() -> impl Strategy<Value = KnotIndices> {
        (1i64..=5, 1i64..=5, 1i64..=5, 1i64..=5)
            .prop_filter_map("coprime", |(n, m, l, s)| validate_indices(n, m, l, s).ok())
    }

    proptest! {
        #[test]
        fn transversality(k in arb_k(), idx in arb_indices()) {
            let kv = WaveVec::new(k);
            let w = w_vector(&kv, &idx);
            prop_assert!(w.dot_real(k).norm() <= 1e-13 * kv.kmag * w.norm());
        }

        #[test]
        fn closed_form_norm_matches_components(k in arb_k(), idx in arb_indices()) {
            let kv = WaveVec::new(k);
            let a = w_norm_sq(&kv, &idx);
            let b = w_vector(&kv, &idx).norm_sq();
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn homogeneity(k in arb_k(), idx in arb_indices(), c in 0.01f64..10.0) {
            let a = w_vector(&WaveVec::new(k * c), &idx);
            let b = w_vector(&WaveVec::new(k), &idx).scale_re(c);
            prop_assert!((a - b).norm() <= 1e-13 * b.norm());
        }

        #[test]
        fn index_linearity(k in arb_k(), which in 0usize..4, p in 0u32..5, q in 0u32..5) {
            let make = |v: u32| {
                let mut a = [0u32; 4];
                a[which] = v;
                KnotIndices::unchecked(a[0], a[1], a[2], a[3])
            };
            let kv = WaveVec::new(k);
            let sum = w_vector(&kv, &make(p)) + w_vector(&kv, &make(q));
            let direct = w_vector(&kv, &make(p + q));
            prop_assert!((sum - direct).norm() <= 1e-13 * (1.0 + direct.norm()));
        }

        #[test]
        fn basis_is_orthonormal_and_transverse(k in arb_k()) {
            let kv = WaveVec::new(k);
            let b = polarization_basis(&kv).unwrap();
            let khat = kv.direction().unwrap();
            prop_assert!((b.e1.norm() - 1.0).abs() < 1e-14);
            prop_assert!((b.e2.norm() - 1.0).abs() < 1e-14);
            prop_assert!(b.e1.dot(b.e2).abs() < 1e-14);
            prop_assert!((b.e1.cross(b.e2) - khat).norm() < 1e-14);
            prop_assert!(b.eplus.hdot(b.eminus).norm() < 1e-14);
            prop_assert!((b.eplus.hdot(b.eplus).re - 1.0).abs() < 1e-14);
            prop_assert!(b.eplus.dot_real(k).norm() < 1e-14 * kv.kmag);
        }

        #[test]
        fn polarization_sum_is_complete(k in arb_k(), idx in arb_indices()) {
            let kv = WaveVec::new(k);
            let b = polarization_basis(&kv).unwrap();
            let w = w_vector(&kv, &idx);
            let sum = b.eplus.hdot(w).norm_sqr() + b.eminus.hdot(w).norm_sqr();
            prop_assert!((sum - w.norm_sq()).abs() <= 1e-12 * w.norm_sq());
        }

        #[test]
        fn basis_gauge_invariance(k in arb_k(), idx in arb_indices(), psi in 0.0f64..6.3) {
            let sc = PhysicalScales::<f64>::unit();
            let kv = WaveVec::new(k);
            let b = polarization_basis(&kv).unwrap();
            let r = b.rotated(psi);
            let norms = |basis: &PolarizationBasis<f64>| Helicity::BOTH.map(|h| alpha_in_basis(&kv, h, basis, &idx, &sc).unwrap().norm());
            let (n0, n1) = (norms(&b), norms(&r));
            let total = n0[0].hypot(n0[1]);
            for (a0, a1) in n0.into_iter().zip(n1) {
                prop_assert!((a0 - a1).abs() <= 1e-12 * total.max(1e-300));
            }
            let h0 = helicity_density_in_basis(&kv, &b, &idx, &sc).unwrap();
            let h1 = helicity_density_in_basis(&kv, &r, &idx, &sc).unwrap();
            let scale = alpha_envelope(kv.kmag, &sc).powi(2) * w_norm_sq(&kv, &idx);
            prop_assert!((h0 - h1).abs() <= 1e-12 * scale);
        }
    }
}
