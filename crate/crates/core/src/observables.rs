//! Normally ordered expectation values in the knotted coherent state.

use serde::Serialize;

use crate::error::Result;
use crate::params::{KnotIndices, PhysicalScales, Point4, UnitSystem};
use crate::quadrature::{integrate_k3, QuadResult, QuadratureSpec};
use crate::scalar::Real;
use crate::spectral::{alpha_in_basis, polarization_basis, Helicity, WaveVec};
use crate::vector::Vec3;

/// Human-readable statement of the conventions behind every number in a report.
pub const CONVENTIONS: &str = "\
natural units internally with X = x/L0, T = ct/L0 and K = L0 k; \
alpha(K,lambda) = sqrt(a) L0 / (2^(3/2) pi^2 sqrt(2 K)) e^(-K) conj(eps_lambda).U(K) with U = i Khat x conj(W); \
eps_plus = (e1 + i e2)/sqrt(2) with e1 = normalize(zhat x Khat) (xhat on the z axis) and e2 = Khat x e1; \
mode measure d^3k/(2 pi)^3 = d^3K/((2 pi)^3 L0^3); \
photon number = sum_lambda int |alpha|^2; energy weight hbar omega with omega = c K / L0; \
spin helicity = int (|alpha_plus|^2 - |alpha_minus|^2); magnetic helicity weight 1/omega relative to spin helicity; \
printed-integrand values use a/(8 pi^4 L0^2) int d^3K/(2 pi)^3 K e^(-2K) |W|^2 (and the same divided by c for the photon number)";

struct ModeWeights<T> {
    number: T,
    helicity: T,
}

fn mode_weights<T: Real>(kv: Vec3<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> ModeWeights<T> {
    let wv = WaveVec::new(kv);
    let Ok(basis) = polarization_basis(&wv) else {
        return ModeWeights { number: T::zero(), helicity: T::zero() };
    };
    let ap = alpha_in_basis(&wv, Helicity::Plus, &basis, k, s).map(|a| a.norm_sqr()).unwrap_or(T::zero());
    let am = alpha_in_basis(&wv, Helicity::Minus, &basis, k, s).map(|a| a.norm_sqr()).unwrap_or(T::zero());
    ModeWeights {
        number: ap + am,
        helicity: ap - am,
    }
}

fn measure<T: Real>(s: &PhysicalScales<T>) -> T {
    let l0 = s.l0();
    T::one() / ((T::lit(2.0) * T::PI()).powi(3) * l0 * l0 * l0)
}

fn integrate<T: Real>(f: impl Fn(Vec3<T>) -> T + Sync, factor: T, spec: &QuadratureSpec<T>) -> Result<QuadResult<T>> {
    let r = integrate_k3(f, &spec.with_decay_rate(T::lit(2.0)))?;
    Ok(QuadResult {
        value: r.value * factor,
        error_estimate: r.error_estimate * factor.abs().to_f64_lossy(),
        nodes_used: r.nodes_used,
    })
}

/// `⟨:N:⟩ = Σ_λ ∫ d³k/(2π)³ |α|²`
pub fn photon_number_expectation<T: Real>(
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<QuadResult<T>> {
    integrate(|kv| mode_weights(kv, k, s).number, measure(s), spec)
}

/// `⟨:H:⟩ = Σ_λ ∫ d³k/(2π)³ ħω |α|²`
pub fn energy_expectation<T: Real>(
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<QuadResult<T>> {
    let factor = measure(s) * s.hbar() * s.c() / s.l0();
    integrate(|kv| kv.norm() * mode_weights(kv, k, s).number, factor, spec)
}

/// `Λ = ∫ d³k/(2π)³ (|α₊|² − |α₋|²)`
pub fn spin_helicity_expectation<T: Real>(
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<QuadResult<T>> {
    integrate(|kv| mode_weights(kv, k, s).helicity, measure(s), spec)
}

/// `Hm = ∫ d³k/(2π)³ (|α₊|² − |α₋|²)/ω`
pub fn magnetic_helicity_expectation<T: Real>(
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<QuadResult<T>> {
    let factor = measure(s) * s.l0() / s.c();
    integrate(
        |kv| {
            let km = kv.norm();
            if km > T::zero() {
                mode_weights(kv, k, s).helicity / km
            } else {
                T::zero()
            }
        },
        factor,
        spec,
    )
}

/// Quadrature of the energy integrand exactly as printed: `a/(8π⁴L0²) ∫ d³K/(2π)³ K e^{-2K} Σ_λ|ε*·W|²`.
pub fn energy_printed_integrand<T: Real>(
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<QuadResult<T>> {
    let pi = T::PI();
    let factor = s.a() / (T::lit(8.0) * pi.powi(4) * s.l0() * s.l0()) / (T::lit(2.0) * pi).powi(3);
    integrate(
        |kv| {
            let wv = WaveVec::new(kv);
            let Ok(b) = polarization_basis(&wv) else { return T::zero() };
            let w = crate::spectral::w_vector(&wv, k);
            let sum = b.eplus.hdot(w).norm_sqr() + b.eminus.hdot(w).norm_sqr();
            wv.kmag * (-T::lit(2.0) * wv.kmag).exp() * sum
        },
        factor,
        spec,
    )
}

/// Closed forms obtained by Γ-function reduction of the mode-space definitions above.
pub mod derived {
    use super::*;

    fn pi6<T: Real>() -> T {
        T::PI().powi(6)
    }

    pub fn photon_number<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.a() * T::lit(k.sum_squares() as f64) / (T::lit(128.0) * pi6::<T>() * s.l0())
    }

    pub fn energy<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.hbar() * s.c() * s.a() * T::lit(k.sum_squares() as f64) / (T::lit(64.0) * pi6::<T>() * s.l0() * s.l0())
    }

    pub fn spin_helicity<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.a() * T::lit(k.mn_plus_ls() as f64) / (T::lit(64.0) * pi6::<T>() * s.l0())
    }

    pub fn magnetic_helicity<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.a() * T::lit(k.mn_plus_ls() as f64) / (T::lit(96.0) * pi6::<T>() * s.c())
    }

    /// `∫ K e^{-2K} |W|² d³K = 5π (n² + m² + l² + s²)`
    pub fn weighted_w_moment<T: Real>(k: &KnotIndices) -> T {
        T::lit(5.0) * T::PI() * T::lit(k.sum_squares() as f64)
    }

    /// The printed energy integrand reduces to `5aΣ/(64π⁶L0²)`.
    pub fn energy_printed_integrand<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        T::lit(5.0) * s.a() * T::lit(k.sum_squares() as f64) / (T::lit(64.0) * pi6::<T>() * s.l0() * s.l0())
    }
}

/// Closed forms as printed for the general family.
pub mod published {
    use super::*;

    fn pi6<T: Real>() -> T {
        T::PI().powi(6)
    }

    pub fn energy<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.hbar() * s.c() * s.a() * T::lit(k.sum_squares() as f64) / (T::lit(32.0) * pi6::<T>())
    }

    pub fn photon_number<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.a() * T::lit(k.sum_squares() as f64) / (T::lit(64.0) * pi6::<T>())
    }

    pub fn spin_helicity<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.a() * T::lit(k.mn_plus_ls() as f64) / (T::lit(32.0) * pi6::<T>() * s.l0() * s.l0())
    }

    pub fn magnetic_helicity<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>) -> T {
        s.a() * T::lit(k.mn_plus_ls() as f64) / (T::lit(160.0) * pi6::<T>() * s.l0())
    }
}

/// Closed-form expectation of the Poynting vector.
pub fn poynting_expectation<T: Real>(p: &Point4<T>, k: &KnotIndices, s: &PhysicalScales<T>) -> Vec3<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let r2 = p.r2();
    let t = p.t;
    let l0 = s.l0();
    let d = one + r2 + t * t;
    let pref = two * s.a() * s.c() * T::lit(k.sum_squares() as f64)
        / (s.mu0() * T::PI() * T::PI() * l0.powi(4) * d.powi(4));
    Vec3::new(t * p.x, t * p.y, t * p.z - (one + r2 - t * t) / two) * pref
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservableEntry {
    pub quadrature_value: f64,
    pub error_estimate: f64,
    pub closed_form_derived: f64,
    pub closed_form_published: f64,
    /// `|quadrature − derived| / |derived|`
    pub rel_deviation: f64,
    /// `|quadrature − published| / |published|`, documented only.
    pub published_rel_deviation: f64,
}

impl ObservableEntry {
    fn new(q: QuadResult<f64>, derived: f64, published: f64) -> Self {
        let rel = |a: f64, b: f64| if b != 0.0 { (a - b).abs() / b.abs() } else { (a - b).abs() };
        Self {
            quadrature_value: q.value,
            error_estimate: q.error_estimate,
            closed_form_derived: derived,
            closed_form_published: published,
            rel_deviation: rel(q.value, derived),
            published_rel_deviation: rel(q.value, published),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrintedIntegrandAudit {
    pub energy_quadrature: f64,
    pub energy_closed_form: f64,
    pub photon_number_closed_form: f64,
    pub energy_published: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableReport {
    pub indices: KnotIndices,
    pub a: f64,
    pub l0: f64,
    pub units: UnitSystem,
    pub energy: ObservableEntry,
    pub photon_number: ObservableEntry,
    pub spin_helicity: ObservableEntry,
    pub magnetic_helicity: ObservableEntry,
    pub energy_ratio_vs_hopfion: f64,
    pub photon_number_ratio_vs_hopfion: f64,
    pub helicity_ratio_vs_hopfion: f64,
    pub magnetic_helicity_ratio_vs_hopfion: f64,
    pub energy_per_photon: f64,
    pub spin_to_magnetic_helicity: f64,
    pub printed_integrand: PrintedIntegrandAudit,
    pub conventions: String,
}

#[derive(Clone, Copy)]
struct Values {
    energy: QuadResult<f64>,
    number: QuadResult<f64>,
    spin: QuadResult<f64>,
    magnetic: QuadResult<f64>,
}

fn to_f64(r: QuadResult<impl Real>) -> QuadResult<f64> {
    QuadResult {
        value: r.value.to_f64_lossy(),
        error_estimate: r.error_estimate,
        nodes_used: r.nodes_used,
    }
}

fn compute<T: Real>(k: &KnotIndices, s: &PhysicalScales<T>, spec: &QuadratureSpec<T>) -> Result<Values> {
    let (energy, rest) = rayon::join(
        || energy_expectation(k, s, spec),
        || {
            rayon::join(
                || photon_number_expectation(k, s, spec),
                || rayon::join(|| spin_helicity_expectation(k, s, spec), || magnetic_helicity_expectation(k, s, spec)),
            )
        },
    );
    let (number, (spin, magnetic)) = rest;
    Ok(Values {
        energy: to_f64(energy?),
        number: to_f64(number?),
        spin: to_f64(spin?),
        magnetic: to_f64(magnetic?),
    })
}

/// Report with quadrature values, both sets of closed forms and ratios against the Hopfion.
pub fn observables_report<T: Real>(
    k: &KnotIndices,
    s: &PhysicalScales<T>,
    spec: &QuadratureSpec<T>,
) -> Result<ObservableReport> {
    let v = compute(k, s, spec)?;
    let h = if *k == KnotIndices::HOPFION {
        v
    } else {
        compute(&KnotIndices::HOPFION, s, spec)?
    };
    let f = |x: T| x.to_f64_lossy();
    let printed = to_f64(energy_printed_integrand(k, s, spec)?);
    let ratio = |a: f64, b: f64| a / b;
    Ok(ObservableReport {
        indices: *k,
        a: f(s.a()),
        l0: f(s.l0()),
        units: s.units(),
        energy: ObservableEntry::new(v.energy, f(derived::energy(k, s)), f(published::energy(k, s))),
        photon_number: ObservableEntry::new(v.number, f(derived::photon_number(k, s)), f(published::photon_number(k, s))),
        spin_helicity: ObservableEntry::new(v.spin, f(derived::spin_helicity(k, s)), f(published::spin_helicity(k, s))),
        magnetic_helicity: ObservableEntry::new(
            v.magnetic,
            f(derived::magnetic_helicity(k, s)),
            f(published::magnetic_helicity(k, s)),
        ),
        energy_ratio_vs_hopfion: ratio(v.energy.value, h.energy.value),
        photon_number_ratio_vs_hopfion: ratio(v.number.value, h.number.value),
        helicity_ratio_vs_hopfion: ratio(v.spin.value, h.spin.value),
        magnetic_helicity_ratio_vs_hopfion: ratio(v.magnetic.value, h.magnetic.value),
        energy_per_photon: ratio(v.energy.value, v.number.value),
        spin_to_magnetic_helicity: ratio(v.spin.value, v.magnetic.value),
        printed_integrand: PrintedIntegrandAudit {
            energy_quadrature: printed.value,
            energy_closed_form: f(derived::energy_printed_integrand(k, s)),
            photon_number_closed_form: f(derived::energy_printed_integrand(k, s) / s.c()),
            energy_published: f(published::energy(k, s)),
        },
        conventions: CONVENTIONS.to_string(),
    })
}

pub fn hopfion_report<T: Real>(s: &PhysicalScales<T>, spec: &QuadratureSpec<T>) -> Result<ObservableReport> {
    observables_report(&KnotIndices::HOPFION, s, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::validate_indices;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec<f64> {
        QuadratureSpec::default()
    }

    fn unit() -> PhysicalScales<f64> {
        PhysicalScales::unit()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn weighted_w_moment_hopfion_is_20pi() {
        let h = KnotIndices::HOPFION;
        let r = integrate_k3(
            |kv: Vec3<f64>| {
                let w = WaveVec::new(kv);
                w.kmag * (-2.0 * w.kmag).exp() * crate::spectral::w_norm_sq(&w, &h)
            },
            &spec(),
        )
        .unwrap();
        assert!(rel(r.value, 20.0 * PI) < 1e-12);
        assert!((derived::weighted_w_moment::<f64>(&h) - 62.831_853_071_8).abs() < 1e-9);
    }

    #[test]
    fn quadrature_matches_derived_closed_forms() {
        let s = PhysicalScales::new(2.5, 0.7, UnitSystem::Natural).unwrap();
        let k = validate_indices(2, 3, 1, 2).unwrap();
        let e = energy_expectation(&k, &s, &spec()).unwrap().value;
        let n = photon_number_expectation(&k, &s, &spec()).unwrap().value;
        let l = spin_helicity_expectation(&k, &s, &spec()).unwrap().value;
        let m = magnetic_helicity_expectation(&k, &s, &spec()).unwrap().value;
        assert!(rel(e, derived::energy(&k, &s)) < 1e-10);
        assert!(rel(n, derived::photon_number(&k, &s)) < 1e-10);
        assert!(rel(l, derived::spin_helicity(&k, &s)) < 1e-10);
        assert!(rel(m, derived::magnetic_helicity(&k, &s)) < 1e-10);
        let p = energy_printed_integrand(&k, &s, &spec()).unwrap().value;
        assert!(rel(p, derived::energy_printed_integrand(&k, &s)) < 1e-10);
    }

    #[test]
    fn trefoil_ratios() {
        let k = validate_indices(2, 3, 1, 1).unwrap();
        let r = observables_report(&k, &unit(), &spec()).unwrap();
        assert!(rel(r.energy_ratio_vs_hopfion, 3.75) < 1e-10);
        assert!(rel(r.photon_number_ratio_vs_hopfion, 3.75) < 1e-10);
        assert!(rel(r.helicity_ratio_vs_hopfion, 3.5) < 1e-10);
        assert!(rel(r.magnetic_helicity_ratio_vs_hopfion, 3.5) < 1e-10);
    }

    #[test]
    fn energy_linear_in_a_and_swap_symmetric() {
        let k = validate_indices(2, 3, 1, 4).unwrap();
        let s1 = unit();
        let s3 = PhysicalScales::new(3.0, 1.0, UnitSystem::Natural).unwrap();
        let e1 = energy_expectation(&k, &s1, &spec()).unwrap().value;
        let e3 = energy_expectation(&k, &s3, &spec()).unwrap().value;
        assert!(rel(e3, 3.0 * e1) < 1e-12);
        for f in [energy_expectation::<f64>, photon_number_expectation, spin_helicity_expectation, magnetic_helicity_expectation] {
            let a = f(&k, &s1, &spec()).unwrap().value;
            let b = f(&k.swapped(), &s1, &spec()).unwrap().value;
            assert!(rel(a, b) < 1e-10);
        }
    }

    #[test]
    fn photon_number_positive_and_energy_per_photon() {
        let s = PhysicalScales::new(1.0, 2.0, UnitSystem::Natural).unwrap();
        let n = photon_number_expectation(&KnotIndices::HOPFION, &s, &spec()).unwrap().value;
        let e = energy_expectation(&KnotIndices::HOPFION, &s, &spec()).unwrap().value;
        assert!(n > 0.0);
        // mean frequency 2c/L0
        assert!(rel(e / n, 2.0 / 2.0) < 1e-10);
    }

    #[test]
    fn helicity_sign_flips_with_basis_labels() {
        let k = validate_indices(2, 3, 1, 1).unwrap();
        let s = unit();
        let sp = QuadratureSpec { abs_tol: 1e-30, ..spec() };
        let plus_first = spin_helicity_expectation(&k, &s, &sp).unwrap().value;
        let minus_first = integrate_k3(
            |kv: Vec3<f64>| {
                let wv = WaveVec::new(kv);
                let b = polarization_basis(&wv).unwrap();
                let ap = alpha_in_basis(&wv, Helicity::Plus, &b, &k, &s).unwrap().norm_sqr();
                let am = alpha_in_basis(&wv, Helicity::Minus, &b, &k, &s).unwrap().norm_sqr();
                am - ap
            },
            &sp.with_decay_rate(2.0),
        )
        .unwrap()
        .value
            * measure(&s);
        assert!(plus_first > 0.0);
        assert!(rel(minus_first, -plus_first) < 1e-12);
    }

    #[test]
    fn poynting_expectation_origin_example() {
        let s = unit();
        let v = poynting_expectation(&Point4::new(0.0, 0.0, 0.0, 0.0), &KnotIndices::HOPFION, &s);
        assert!((v - Vec3::new(0.0, 0.0, -4.0 / (PI * PI))).norm() < 1e-15);
    }

    #[test]
    fn poynting_expectation_has_no_transverse_part_at_t0() {
        let s = unit();
        let k = validate_indices(2, 3, 1, 1).unwrap();
        for p in [Point4::new(0.3, -1.2, 0.5, 0.0), Point4::new(-2.0, 0.1, 0.0, 0.0)] {
            let v = poynting_expectation(&p, &k, &s);
            assert_eq!(v.x, 0.0);
            assert_eq!(v.y, 0.0);
        }
    }

    #[test]
    fn hopfion_report_contents() {
        let r = hopfion_report(&unit(), &spec()).unwrap();
        let pi6 = PI.powi(6);
        assert!(rel(r.energy.closed_form_published, 1.0 / (8.0 * pi6)) < 1e-15);
        assert!(rel(r.spin_helicity.closed_form_published, 1.0 / (16.0 * pi6)) < 1e-15);
        assert!(rel(r.magnetic_helicity.closed_form_published, 1.0 / (80.0 * pi6)) < 1e-15);
        assert!(rel(r.spin_helicity.closed_form_published / r.magnetic_helicity.closed_form_published, 5.0) < 1e-14);
        assert!(rel(r.energy.closed_form_published / r.photon_number.closed_form_published, 2.0) < 1e-14);
        assert_eq!(r.energy_ratio_vs_hopfion, 1.0);
        assert!(r.energy.rel_deviation < 1e-8);
        assert!(r.conventions.contains("eps_plus"));
        assert!(r.energy.error_estimate >= 0.0);
    }
}
