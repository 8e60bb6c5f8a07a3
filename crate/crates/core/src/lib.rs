//! Fixed-point-free Hölder constructions on sequence spaces, and a harness
//! that measures their constants.
//!
//! Vectors are eventually constant sequences ([`SeqVec`]). Maps live in
//! [`catalog`], the sets they act on in [`domain`], and [`verify`] estimates
//! Hölder ratios, displacements and invariance from seeded samples.

pub mod catalog;
pub mod domain;
pub mod experiment;
pub mod retraction;
pub mod rng;
pub mod scalar;
pub mod seq;
pub mod verify;

pub use catalog::{ClaimProfile, FixedPointSet, MapInstance};
pub use domain::{DomainKind, DomainSpec};
pub use scalar::Scalar;
pub use seq::{NormKind, SeqError, SeqVec};

pub type Seq = SeqVec<f64>;
pub type Seq32 = SeqVec<f32>;
pub type Norm = NormKind<f64>;
pub type Domain = DomainSpec<f64>;
pub type Domain32 = DomainSpec<f32>;
pub type Map = MapInstance<f64>;
pub type Map32 = MapInstance<f32>;
pub type Claims = ClaimProfile<f64>;
