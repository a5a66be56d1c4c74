//! Torus-knot solutions of the vacuum Maxwell equations and the coherent photon states that carry them.
//!
//! Everything is generic over the scalar type through [`Real`]; the crate root re-exports `f64`
//! aliases and [`mod@f32`] mirrors them in single precision.

pub mod error;
pub mod export;
pub mod fft;
pub mod fields;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod quantumstate;
pub mod scalar;
pub mod spectral;
pub mod topology;
pub mod vector;

pub use error::{Error, Result};
pub use fields::{energy_density, field_at, initial_fields, maxwell_residual, poynting_classical};
pub use observables::{hopfion_report, observables_report, ObservableReport};
pub use params::{validate_indices, KnotIndices, UnitSystem};
pub use quantumstate::{e_plus, g1, g2};
pub use scalar::Real;
pub use spectral::{alpha, w_vector, Helicity};
pub use topology::{linking_number, trace_fieldline, winding_numbers, FieldKind};

pub type Vec3R = vector::Vec3<f64>;
pub type CVec3R = vector::CVec3<f64>;
pub type Scales = params::PhysicalScales<f64>;
pub type Point = params::Point4<f64>;
pub type Sample = fields::FieldSample<f64>;
pub type Spec = quadrature::QuadratureSpec<f64>;
pub type Grid = fft::FftGrid<f64>;
pub type Fields = fft::GridFields<f64>;
pub type Curve = topology::Curve<f64>;
pub type Modes = quantumstate::ModeSet<f64>;

/// Single-precision counterparts of the root aliases.
pub mod f32 {
    pub type Vec3R = crate::vector::Vec3<f32>;
    pub type CVec3R = crate::vector::CVec3<f32>;
    pub type Scales = crate::params::PhysicalScales<f32>;
    pub type Point = crate::params::Point4<f32>;
    pub type Sample = crate::fields::FieldSample<f32>;
    pub type Spec = crate::quadrature::QuadratureSpec<f32>;
    pub type Grid = crate::fft::FftGrid<f32>;
    pub type Fields = crate::fft::GridFields<f32>;
    pub type Curve = crate::topology::Curve<f32>;
    pub type Modes = crate::quantumstate::ModeSet<f32>;
}
