//! Small fixed-size real and complex 3-vectors.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex;
use serde::Serialize;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        // hypot-style scaling keeps huge/tiny components from overflowing
        let m = self.x.abs().max(self.y.abs()).max(self.z.abs());
        if m == T::zero() || !m.is_finite() {
            return m;
        }
        let s = self / m;
        m * s.norm_sq().sqrt()
    }

    /// Unit vector along `self`; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn to_complex(self) -> CVec3<T> {
        CVec3::new(
            Complex::new(self.x, T::zero()),
            Complex::new(self.y, T::zero()),
            Complex::new(self.z, T::zero()),
        )
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> std::ops::Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Complex 3-vector. `dot` is the bilinear product; `hdot` conjugates the left factor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CVec3<T> {
    pub x: Complex<T>,
    pub y: Complex<T>,
    pub z: Complex<T>,
}

impl<T: Real> CVec3<T> {
    #[inline]
    pub const fn new(x: Complex<T>, y: Complex<T>, z: Complex<T>) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(z, z, z)
    }

    pub fn from_parts(re: Vec3<T>, im: Vec3<T>) -> Self {
        Self::new(
            Complex::new(re.x, im.x),
            Complex::new(re.y, im.y),
            Complex::new(re.z, im.z),
        )
    }

    pub fn re(self) -> Vec3<T> {
        Vec3::new(self.x.re, self.y.re, self.z.re)
    }

    pub fn im(self) -> Vec3<T> {
        Vec3::new(self.x.im, self.y.im, self.z.im)
    }

    pub fn conj(self) -> Self {
        Self::new(self.x.conj(), self.y.conj(), self.z.conj())
    }

    #[inline]
    pub fn dot(self, o: Self) -> Complex<T> {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// `conj(self) · o`
    #[inline]
    pub fn hdot(self, o: Self) -> Complex<T> {
        self.x.conj() * o.x + self.y.conj() * o.y + self.z.conj() * o.z
    }

    pub fn dot_real(self, v: Vec3<T>) -> Complex<T> {
        self.x * v.x + self.y * v.y + self.z * v.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    /// `v × self` for a real left factor.
    pub fn real_cross(v: Vec3<T>, c: Self) -> Self {
        Self::from_parts(v.cross(c.re()), v.cross(c.im()))
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.x.norm_sqr() + self.y.norm_sqr() + self.z.norm_sqr()
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: Complex<T>) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn scale_re(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        [self.x, self.y, self.z].iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl<T: Real> Add for CVec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for CVec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for CVec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for CVec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Index<usize> for CVec3<T> {
    type Output = Complex<T>;
    fn index(&self, i: usize) -> &Complex<T> {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("CVec3 index {i} out of range"),
        }
    }
}
