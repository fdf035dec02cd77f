//! Spectral statistics of random and clustered networks.
//!
//! Adjacency ensembles ([`ensemble`]) are diagonalized ([`spectral`]), mapped
//! to unit mean spacing ([`unfolding`]) and compared with random-matrix
//! predictions ([`stats`], [`theory`]). [`pipeline`] ties the stages together.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision.

pub mod ensemble;
pub mod error;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod stats;
pub mod theory;
pub mod unfolding;

pub use ensemble::{AdjacencyMatrix, EnsembleSpec};
pub use error::{Error, Result, Stage};
pub use scalar::Scalar;
pub use spectral::{DensityHistogram, Spectrum};
pub use stats::{CurveKind, SpacingHistogram, StatCurve};
pub use theory::TheoryCurve;
pub use unfolding::{UnfoldedSpectrum, UnfoldingMethod};

pub type Spectrum64 = Spectrum<f64>;
pub type Spectrum32 = Spectrum<f32>;
pub type UnfoldedSpectrum64 = UnfoldedSpectrum<f64>;
pub type UnfoldedSpectrum32 = UnfoldedSpectrum<f32>;
pub type UnfoldingMethod64 = UnfoldingMethod<f64>;
pub type StatCurve64 = StatCurve<f64>;
pub type StatCurve32 = StatCurve<f32>;
pub type DensityHistogram64 = DensityHistogram<f64>;
pub type SpacingHistogram64 = SpacingHistogram<f64>;
