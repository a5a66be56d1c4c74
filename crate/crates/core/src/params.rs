//! Knot indices, physical scales and the dimensionless coordinate map.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vector::Vec3;

/// The four positive integers `(n, m, l, s)` selecting a member of the torus-knot family.
///
/// Magnetic lines at `T = 0` are `(n, m)` torus knots, electric lines `(l, s)` torus knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KnotIndices {
    n: u32,
    m: u32,
    l: u32,
    s: u32,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Validates `(n, m, l, s)`: every index strictly positive, `(n, m)` and `(l, s)` coprime.
pub fn validate_indices(n: i64, m: i64, l: i64, s: i64) -> Result<KnotIndices> {
    for (name, value) in [("n", n), ("m", m), ("l", l), ("s", s)] {
        if value <= 0 || value > i64::from(u32::MAX) {
            return Err(Error::NonPositive { name, value });
        }
    }
    if gcd(n as u64, m as u64) != 1 {
        return Err(Error::NotCoprime(n, m));
    }
    if gcd(l as u64, s as u64) != 1 {
        return Err(Error::NotCoprime(l, s));
    }
    Ok(KnotIndices {
        n: n as u32,
        m: m as u32,
        l: l as u32,
        s: s as u32,
    })
}

impl KnotIndices {
    pub const HOPFION: KnotIndices = KnotIndices {
        n: 1,
        m: 1,
        l: 1,
        s: 1,
    };

    /// Unvalidated constructor; zero entries are allowed so linearity in each index can be tested.
    #[doc(hidden)]
    pub const fn unchecked(n: u32, m: u32, l: u32, s: u32) -> Self {
        Self { n, m, l, s }
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn as_real<T: Real>(&self) -> (T, T, T, T) {
        (
            T::lit(self.n as f64),
            T::lit(self.m as f64),
            T::lit(self.l as f64),
            T::lit(self.s as f64),
        )
    }

    /// `n² + m² + l² + s²`
    pub fn sum_squares(&self) -> u64 {
        [self.n, self.m, self.l, self.s]
            .iter()
            .map(|&v| u64::from(v) * u64::from(v))
            .sum()
    }

    /// `mn + ls`
    pub fn mn_plus_ls(&self) -> u64 {
        u64::from(self.m) * u64::from(self.n) + u64::from(self.l) * u64::from(self.s)
    }

    /// `(n, m, l, s) → (m, n, s, l)`
    pub fn swapped(&self) -> Self {
        Self {
            n: self.m,
            m: self.n,
            l: self.s,
            s: self.l,
        }
    }

    /// All valid tuples with every entry in `1..=max`.
    pub fn all_up_to(max: u32) -> Vec<KnotIndices> {
        let mut out = Vec::new();
        for n in 1..=max {
            for m in 1..=max {
                for l in 1..=max {
                    for s in 1..=max {
                        if let Ok(k) = validate_indices(n.into(), m.into(), l.into(), s.into()) {
                            out.push(k);
                        }
                    }
                }
            }
        }
        out
    }
}

impl std::fmt::Display for KnotIndices {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.n, self.m, self.l, self.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum UnitSystem {
    Natural,
    SI,
}

pub mod si {
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const MU0: f64 = 1.256_637_062_12e-6;
    pub const EPS0: f64 = 8.854_187_812_8e-12;
}

impl UnitSystem {
    pub fn c<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::one(),
            UnitSystem::SI => T::lit(si::SPEED_OF_LIGHT),
        }
    }
    pub fn hbar<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::one(),
            UnitSystem::SI => T::lit(si::HBAR),
        }
    }
    pub fn mu0<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::one(),
            UnitSystem::SI => T::lit(si::MU0),
        }
    }
    pub fn eps0<T: Real>(self) -> T {
        match self {
            UnitSystem::Natural => T::one(),
            UnitSystem::SI => T::lit(si::EPS0),
        }
    }
}

impl std::str::FromStr for UnitSystem {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "natural" => Ok(UnitSystem::Natural),
            "si" => Ok(UnitSystem::SI),
            other => Err(format!("unknown unit system '{other}'")),
        }
    }
}

impl std::fmt::Display for UnitSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            UnitSystem::Natural => "natural",
            UnitSystem::SI => "si",
        })
    }
}

/// Field-intensity constant `a`, length scale `L0` and the active unit system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalScales<T> {
    a: T,
    l0: T,
    units: UnitSystem,
}

impl<T: Real> PhysicalScales<T> {
    pub fn new(a: T, l0: T, units: UnitSystem) -> Result<Self> {
        if !(a > T::zero() && a.is_finite()) {
            return Err(Error::InvalidScales(format!("a = {a} must be positive and finite")));
        }
        if !(l0 > T::zero() && l0.is_finite()) {
            return Err(Error::InvalidScales(format!("L0 = {l0} must be positive and finite")));
        }
        Ok(Self { a, l0, units })
    }

    /// `a = 1`, `L0 = 1`, natural units.
    pub fn unit() -> Self {
        Self {
            a: T::one(),
            l0: T::one(),
            units: UnitSystem::Natural,
        }
    }

    /// The same scales with `a = 0`, i.e. the identically vanishing field.
    pub fn with_vanishing_intensity(self) -> Self {
        Self { a: T::zero(), ..self }
    }

    pub fn a(&self) -> T {
        self.a
    }
    pub fn l0(&self) -> T {
        self.l0
    }
    pub fn units(&self) -> UnitSystem {
        self.units
    }
    pub fn c(&self) -> T {
        self.units.c()
    }
    pub fn hbar(&self) -> T {
        self.units.hbar()
    }
    pub fn mu0(&self) -> T {
        self.units.mu0()
    }
    pub fn eps0(&self) -> T {
        self.units.eps0()
    }
}

/// Dimensionless spacetime point `(X, Y, Z, T) = (x, y, z, ct) / L0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point4<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub t: T,
}

impl<T: Real> Point4<T> {
    pub fn new(x: T, y: T, z: T, t: T) -> Self {
        Self { x, y, z, t }
    }

    pub fn at(r: Vec3<T>, t: T) -> Self {
        Self::new(r.x, r.y, r.z, t)
    }

    pub fn spatial(&self) -> Vec3<T> {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn r2(&self) -> T {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Euclidean size of all four coordinates.
    pub fn magnitude(&self) -> T {
        (self.r2() + self.t * self.t).sqrt()
    }
}

pub fn to_dimensionless<T: Real>(x_si: Vec3<T>, t_si: T, scales: &PhysicalScales<T>) -> Point4<T> {
    let l0 = scales.l0();
    Point4::new(x_si.x / l0, x_si.y / l0, x_si.z / l0, scales.c() * t_si / l0)
}

pub fn from_dimensionless<T: Real>(p: &Point4<T>, scales: &PhysicalScales<T>) -> (Vec3<T>, T) {
    let l0 = scales.l0();
    (p.spatial() * l0, p.t * l0 / scales.c())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hopfion_and_trefoil_indices_validate() {
        assert_eq!(validate_indices(1, 1, 1, 1).unwrap(), KnotIndices::HOPFION);
        assert!(validate_indices(2, 3, 1, 1).is_ok());
    }

    #[test]
    fn non_coprime_pair_is_rejected() {
        assert_eq!(validate_indices(2, 4, 1, 1), Err(Error::NotCoprime(2, 4)));
        assert_eq!(validate_indices(1, 1, 3, 6), Err(Error::NotCoprime(3, 6)));
    }

    #[test]
    fn non_positive_index_is_rejected() {
        assert!(matches!(
            validate_indices(1, 0, 1, 1),
            Err(Error::NonPositive { name: "m", value: 0 })
        ));
        assert!(matches!(
            validate_indices(1, 1, 1, -3),
            Err(Error::NonPositive { name: "s", value: -3 })
        ));
    }

    #[test]
    fn dimensionless_examples() {
        let sc = PhysicalScales::new(2.0, 0.5, UnitSystem::SI).unwrap();
        let l0 = sc.l0();
        let p = to_dimensionless(Vec3::new(l0, 0.0, 0.0), 0.0, &sc);
        assert_eq!(p, Point4::new(1.0, 0.0, 0.0, 0.0));
        let p = to_dimensionless(Vec3::zero(), l0 / si::SPEED_OF_LIGHT, &sc);
        assert!((p.t - 1.0).abs() < 1e-15);
        let p = to_dimensionless(Vec3::new(3.0 * l0, 4.0 * l0, 0.0), 0.0, &sc);
        assert_eq!(p.r2(), 25.0);
    }

    #[test]
    fn invalid_scales_rejected() {
        assert!(PhysicalScales::new(0.0, 1.0, UnitSystem::Natural).is_err());
        assert!(PhysicalScales::new(1.0, -1.0, UnitSystem::Natural).is_err());
        assert!(PhysicalScales::new(f64::NAN, 1.0, UnitSystem::Natural).is_err());
    }

    #[test]
    fn enumerated_tuples_are_valid() {
        let all = KnotIndices::all_up_to(4);
        assert!(all.contains(&KnotIndices::HOPFION));
        assert!(!all.iter().any(|k| k.n() == 2 && k.m() == 4));
        // 11 coprime ordered pairs in 1..=4 per side
        assert_eq!(all.len(), 11 * 11);
    }

    proptest! {
        #[test]
        fn validation_is_deterministic(n in -3i64..8, m in -3i64..8, l in -3i64..8, s in -3i64..8) {
            prop_assert_eq!(validate_indices(n, m, l, s), validate_indices(n, m, l, s));
        }

        #[test]
        fn dimensionless_round_trip(x in -1e3f64..1e3, y in -1e3f64..1e3, z in -1e3f64..1e3,
                                    t in -1e-5f64..1e-5, l0 in 1e-3f64..1e3, si_units: bool) {
            let units = if si_units { UnitSystem::SI } else { UnitSystem::Natural };
            let sc = PhysicalScales::new(1.0, l0, units).unwrap();
            let r = Vec3::new(x, y, z);
            let p = to_dimensionless(r, t, &sc);
            let (r2, t2) = from_dimensionless(&p, &sc);
            let tol = |a: f64, b: f64| (a - b).abs() <= 1e-15 * a.abs().max(1e-300) * 4.0;
            prop_assert!(tol(r.x, r2.x) && tol(r.y, r2.y) && tol(r.z, r2.z));
            prop_assert!(tol(t, t2));
        }
    }
}
