//! Product Gauss rules for integrals over ℝ³ with an exponential radial envelope.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::{CVec3, Vec3};

/// Nodes and weights of a one-dimensional rule, stored in `f64`.
#[derive(Debug, Clone)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type Cache = Mutex<HashMap<usize, Arc<Rule1d>>>;

fn cached(cache: &'static OnceLock<Cache>, n: usize, build: fn(usize) -> Rule1d) -> Arc<Rule1d> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(build(n))).clone()
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Arc<Rule1d> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_legendre)
}

fn build_legendre(n: usize) -> Rule1d {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 - 1.0) * z * p2 - (j as f64 - 1.0) * p3) / j as f64;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule1d { nodes, weights }
}

/// Gauss-Laguerre rule for weight `e^{-u}` on `[0, ∞)`.
///
/// The returned weights are pre-multiplied by `e^{u}` so that integrands carry their own envelope.
pub fn gauss_laguerre_scaled(n: usize) -> Arc<Rule1d> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    cached(&CACHE, n, build_laguerre_scaled)
}

fn build_laguerre_scaled(n: usize) -> Rule1d {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
            }
        };
        let mut pp = 1.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j as f64 - 1.0 - z) * p2 - (j as f64 - 1.0) * p3) / j as f64;
            }
            pp = (nf * p1 - nf * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        nodes[i] = z;
        weights[i] = -1.0 / (pp * nf * p2) * z.exp();
    }
    Rule1d { nodes, weights }
}

/// Unit-sphere product rule exact for spherical harmonics through degree `order`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub directions: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

pub fn sphere_rule(order: usize) -> SphereRule {
    let n_theta = (order + 1).div_ceil(2).max(1);
    let n_phi = order + 1;
    let gl = gauss_legendre(n_theta);
    let mut directions = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
    for (&ct, &w) in gl.nodes.iter().zip(&gl.weights) {
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..n_phi {
            let phi = dphi * j as f64;
            directions.push([st * phi.cos(), st * phi.sin(), ct]);
            weights.push(w * dphi);
        }
    }
    SphereRule { directions, weights }
}

/// Rule orders and tolerances for [`integrate_k3`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec<T> {
    /// Gauss-Laguerre nodes in `u = decay_rate · K`.
    pub radial_order: usize,
    /// Spherical-harmonic degree integrated exactly.
    pub angular_order: usize,
    pub rel_tol: T,
    pub abs_tol: T,
    /// Exponential rate of the integrand envelope `e^{-decay_rate·K}`.
    pub decay_rate: T,
}

pub const MAX_RADIAL_ORDER: usize = 96;
pub const MAX_ANGULAR_ORDER: usize = 96;

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            radial_order: 16,
            angular_order: 12,
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-300).max(T::min_positive_value()),
            decay_rate: T::lit(2.0),
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidQuadrature(m));
        if self.radial_order < 8 || self.radial_order > MAX_RADIAL_ORDER {
            return bad(format!("radial_order {} outside 8..={MAX_RADIAL_ORDER}", self.radial_order));
        }
        if self.angular_order < 4 || self.angular_order > MAX_ANGULAR_ORDER {
            return bad(format!("angular_order {} outside 4..={MAX_ANGULAR_ORDER}", self.angular_order));
        }
        if !(self.rel_tol >= T::zero()) || !self.rel_tol.is_finite() {
            return bad(format!("rel_tol {} must be finite and non-negative", self.rel_tol));
        }
        if !(self.abs_tol >= T::zero()) || !self.abs_tol.is_finite() {
            return bad(format!("abs_tol {} must be finite and non-negative", self.abs_tol));
        }
        if !(self.decay_rate > T::zero()) || !self.decay_rate.is_finite() {
            return bad(format!("decay_rate {} must be positive", self.decay_rate));
        }
        Ok(())
    }

    pub fn with_decay_rate(self, decay_rate: T) -> Self {
        Self { decay_rate, ..self }
    }
}

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue<T: Real>: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, w: T) -> Self;
    fn magnitude(self) -> T;
    fn distance(self, other: Self) -> T;
}

impl<T: Real> QuadValue<T> for T {
    fn zero() -> Self {
        T::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, w: T) -> Self {
        self * w
    }
    fn magnitude(self) -> T {
        self.abs()
    }
    fn distance(self, o: Self) -> T {
        (self - o).abs()
    }
}

impl<T: Real> QuadValue<T> for Complex<T> {
    fn zero() -> Self {
        Complex::new(T::zero(), T::zero())
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, w: T) -> Self {
        self * w
    }
    fn magnitude(self) -> T {
        self.norm()
    }
    fn distance(self, o: Self) -> T {
        (self - o).norm()
    }
}

impl<T: Real> QuadValue<T> for Vec3<T> {
    fn zero() -> Self {
        Vec3::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, w: T) -> Self {
        self * w
    }
    fn magnitude(self) -> T {
        self.norm()
    }
    fn distance(self, o: Self) -> T {
        (self - o).norm()
    }
}

impl<T: Real> QuadValue<T> for CVec3<T> {
    fn zero() -> Self {
        CVec3::zero()
    }
    fn add(self, o: Self) -> Self {
        self + o
    }
    fn scale(self, w: T) -> Self {
        self.scale_re(w)
    }
    fn magnitude(self) -> T {
        self.norm()
    }
    fn distance(self, o: Self) -> T {
        (self - o).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult<V> {
    pub value: V,
    pub error_estimate: f64,
    pub nodes_used: usize,
}

/// A full set of `(K, weight)` nodes for `∫ d³K`, weights including `K²` and `e^{rate·K}`.
#[derive(Debug, Clone)]
pub struct K3Rule<T> {
    pub nodes: Vec<(Vec3<T>, T)>,
}

pub fn k3_rule<T: Real>(radial_order: usize, angular_order: usize, decay_rate: T) -> K3Rule<T> {
    let radial = gauss_laguerre_scaled(radial_order);
    let sphere = sphere_rule(angular_order);
    let rate = decay_rate.to_f64_lossy();
    let mut nodes = Vec::with_capacity(radial.nodes.len() * sphere.weights.len());
    for (&u, &wu) in radial.nodes.iter().zip(&radial.weights) {
        let kmag = u / rate;
        let wr = wu * kmag * kmag / rate;
        for (d, &wa) in sphere.directions.iter().zip(&sphere.weights) {
            let k = Vec3::new(T::lit(kmag * d[0]), T::lit(kmag * d[1]), T::lit(kmag * d[2]));
            nodes.push((k, T::lit(wr * wa)));
        }
    }
    K3Rule { nodes }
}

impl<T: Real> K3Rule<T> {
    pub fn apply<V: QuadValue<T>>(&self, f: &(impl Fn(Vec3<T>) -> V + Sync)) -> V {
        // values are collected in order and summed sequentially for reproducible rounding
        let terms: Vec<V> = self.nodes.par_iter().map(|&(k, w)| f(k).scale(w)).collect();
        terms.into_iter().fold(V::zero(), V::add)
    }
}

/// `∫_{ℝ³} f(K) d³K` for integrands carrying an `e^{-decay_rate·K}` envelope.
///
/// The estimate compares the rule at orders `(p, q)` and `(p + 4, q + 4)`; orders grow until
/// the estimate meets the tolerance.
pub fn integrate_k3<T: Real, V: QuadValue<T>>(
    f: impl Fn(Vec3<T>) -> V + Sync,
    spec: &QuadratureSpec<T>,
) -> Result<QuadResult<V>> {
    spec.validate()?;
    let (mut r, mut a) = (spec.radial_order, spec.angular_order);
    let mut low_rule = k3_rule(r, a, spec.decay_rate);
    let mut low = low_rule.apply(&f);
    loop {
        let high_rule = k3_rule(r + 4, a + 4, spec.decay_rate);
        let high = high_rule.apply(&f);
        let err = high.distance(low);
        let tol = spec.abs_tol.max(spec.rel_tol * high.magnitude());
        if err <= tol {
            return Ok(QuadResult {
                value: high,
                error_estimate: err.to_f64_lossy(),
                nodes_used: low_rule.nodes.len() + high_rule.nodes.len(),
            });
        }
        if r + 8 > MAX_RADIAL_ORDER || a + 8 > MAX_ANGULAR_ORDER {
            return Err(Error::NoConvergence {
                estimate: err.to_f64_lossy(),
                radial_order: r + 4,
                angular_order: a + 4,
            });
        }
        r += 4;
        a += 4;
        low = high;
        low_rule = high_rule;
    }
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Exact `∫_{S²} K̂x^i K̂y^j K̂z^k dΩ` for total degree at most 8.
pub fn angular_moment<T: Real>(i: u32, j: u32, k: u32) -> Result<T> {
    let deg = i + j + k;
    if deg > 8 {
        return Err(Error::UnsupportedDegree(deg));
    }
    if i % 2 == 1 || j % 2 == 1 || k % 2 == 1 {
        return Ok(T::zero());
    }
    let num = double_factorial(i as i64 - 1) * double_factorial(j as i64 - 1) * double_factorial(k as i64 - 1);
    let den = double_factorial(deg as i64 + 1);
    Ok(T::lit(4.0 * std::f64::consts::PI * num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(10);
        for deg in 0..20 {
            let num: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((num - exact).abs() < 1e-14, "deg {deg}: {num} vs {exact}");
        }
    }

    #[test]
    fn laguerre_integrates_moments() {
        let r = gauss_laguerre_scaled(16);
        for deg in 0..31 {
            let num: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * (-x).exp() * x.powi(deg))
                .sum();
            let exact = factorial(deg as u32);
            assert!((num / exact - 1.0).abs() < 1e-12, "deg {deg}: {num} vs {exact}");
        }
    }

    #[test]
    fn gamma_oracle_examples() {
        let spec = QuadratureSpec::<f64>::default();
        let r = integrate_k3(|k: Vec3<f64>| (-2.0 * k.norm()).exp(), &spec).unwrap();
        assert!((r.value - PI).abs() < 1e-13 * PI);
        let r = integrate_k3(|k: Vec3<f64>| k.norm() * (-2.0 * k.norm()).exp(), &spec).unwrap();
        assert!((r.value - 1.5 * PI).abs() < 1e-13 * PI);
        assert!(r.error_estimate >= 0.0 && r.nodes_used > 0);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let spec = QuadratureSpec::<f64> { abs_tol: 1e-14, ..Default::default() };
        let r = integrate_k3(|k: Vec3<f64>| k.y * (1.0 + k.x * k.x) * (-2.0 * k.norm()).exp(), &spec).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn angular_moment_examples() {
        assert!((angular_moment::<f64>(0, 0, 0).unwrap() - 4.0 * PI).abs() < 1e-15);
        assert!((angular_moment::<f64>(0, 0, 2).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(angular_moment::<f64>(0, 1, 0).unwrap(), 0.0);
        assert_eq!(angular_moment::<f64>(4, 4, 2), Err(Error::UnsupportedDegree(10)));
    }

    #[test]
    fn angular_moment_matches_sphere_rule() {
        let rule = sphere_rule(8);
        for i in 0..=4u32 {
            for j in 0..=(4 - i) {
                for k in 0..=(8 - i - j).min(4) {
                    let num: f64 = rule
                        .directions
                        .iter()
                        .zip(&rule.weights)
                        .map(|(d, w)| w * d[0].powi(i as i32) * d[1].powi(j as i32) * d[2].powi(k as i32))
                        .sum();
                    let exact: f64 = angular_moment(i, j, k).unwrap();
                    assert!((num - exact).abs() < 1e-13, "({i},{j},{k})");
                }
            }
        }
    }

    #[test]
    fn spec_validation() {
        let ok = QuadratureSpec::<f64>::default();
        assert!(ok.validate().is_ok());
        assert!(QuadratureSpec { radial_order: 4, ..ok }.validate().is_err());
        assert!(QuadratureSpec { angular_order: 2, ..ok }.validate().is_err());
        assert!(QuadratureSpec { rel_tol: -1.0, ..ok }.validate().is_err());
        assert!(QuadratureSpec { decay_rate: 0.0, ..ok }.validate().is_err());
    }

    #[test]
    fn no_convergence_is_reported() {
        // A slowly decaying integrand cannot meet a 1e-15 tolerance with an e^{-2K} rule.
        let spec = QuadratureSpec::<f64> { rel_tol: 1e-15, abs_tol: 0.0, ..Default::default() };
        let r = integrate_k3(|k: Vec3<f64>| 1.0 / (1.0 + k.norm_sq()).powi(3), &spec);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn f32_rule_is_usable() {
        let spec = QuadratureSpec::<f32> { rel_tol: 1e-5, ..Default::default() };
        let r = integrate_k3(|k: Vec3<f32>| (-2.0 * k.norm()).exp(), &spec).unwrap();
        assert!((r.value - std::f32::consts::PI).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn exact_for_polynomial_times_envelope(p in 0u32..=10, i in 0u32..=2, j in 0u32..=2, k in 0u32..=2) {
            // ∫ K^p K̂^α e^{-2K} d³K = Γ(p + 3)/2^{p+3} · ∫ K̂^α dΩ
            let spec = QuadratureSpec::<f64>::default();
            let f = |v: Vec3<f64>| {
                let r = v.norm();
                let h = v / r;
                r.powi(p as i32) * h.x.powi(i as i32) * h.y.powi(j as i32) * h.z.powi(k as i32) * (-2.0 * r).exp()
            };
            let scale = factorial(p + 2) / 2f64.powi(p as i32 + 3) * 4.0 * std::f64::consts::PI;
            let num = integrate_k3(f, &QuadratureSpec { abs_tol: 1e-13 * scale, ..spec }).unwrap().value;
            let exact = factorial(p + 2) / 2f64.powi(p as i32 + 3) * angular_moment::<f64>(i, j, k).unwrap();
            prop_assert!((num - exact).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
