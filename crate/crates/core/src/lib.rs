//! Detection and recovery of burst-like forcing terms `f(t) = Σ f_j δ(t − t_j)`
//! in evolution equations `u̇ = Au + f + η` from space-time samples.
//!
//! The numerical core is generic over the real scalar type (`f32` or `f64`);
//! the aliases at the bottom of this file fix it to `f64`, which is what the
//! harness uses.

pub mod bounds;
pub mod detect_direct;
pub mod detect_prony;
pub mod dynamics;
pub mod error;
pub mod forcing;
pub mod harness;
pub mod hilbert;
pub mod reconstruct;
pub mod scalar;
pub mod sensing;

pub use detect_direct::{DetectionEvent, DirectDetectorParams, DirectRule};
pub use detect_prony::{Parity, PronyDetectorParams, PronyEvent, ThresholdRule};
pub use dynamics::{Semigroup, SemigroupKind};
pub use error::{Error, Result};
pub use forcing::{BackgroundSource, Burst, BurstTrain, LipschitzReport};
pub use hilbert::{axpy, inner_product, norm, pointwise_mul, GridFunction, SpatialGrid};
pub use num_complex::Complex;
pub use reconstruct::ShapeSpace;
pub use scalar::Real;
pub use sensing::{
    direct_measurements, direct_measurements_split, fourier_measurements, fourier_measurements_split,
    DirectMeasurements, FourierMeasurements, Scenario, Side, Split,
};

pub type Complex64 = Complex<f64>;
pub type SpatialGrid64 = SpatialGrid<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type Semigroup64 = Semigroup<f64>;
pub type BurstTrain64 = BurstTrain<f64>;
pub type BackgroundSource64 = BackgroundSource<f64>;
pub type Scenario64 = Scenario<f64>;
pub type ShapeSpace64 = ShapeSpace<f64>;

pub type SpatialGrid32 = SpatialGrid<f32>;
pub type GridFunction32 = GridFunction<f32>;
pub type Semigroup32 = Semigroup<f32>;
pub type Scenario32 = Scenario<f32>;
