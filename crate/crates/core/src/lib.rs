//! Numerical toolkit for quaternionic observers.
//!
//! The crate is organised bottom-up:
//!
//! * [`algebra`]: quaternions, general real algebras given by structure
//!   tensors, canonical bases and classification of algebras.
//! * [`qhilbert`]: finite-dimensional left quaternionic Hilbert spaces and
//!   left-linear operators.
//! * [`hyperkahler`]: realification, the hyperkähler structure of a
//!   quaternionic space, regular maps and hyperhamiltonian fields.
//! * [`dynamics`]: evolution fields, RK4 flows, worlds, proper states,
//!   propensity and measurements.
//! * [`cosmology`]: the quaternionic FLRW cosmology and its vistas.
//! * [`semantics`]: finite monoid actions, existence/presence modes.
//! * [`export`]: CSV and JSON writers used by the command-line tool.

pub mod algebra;
pub mod cosmology;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod hyperkahler;
pub mod numdiff;
pub mod qhilbert;
pub mod semantics;

pub use algebra::{AlgebraElement, CanonicalFrame, Quaternion, StructureTensor};
pub use error::{Error, Result};
pub use qhilbert::{QuaternionMatrix, QuaternionTuple};
