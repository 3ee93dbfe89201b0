//! Zeros of Gaussian analytic functions on the sphere, the flat torus and the
//! plane.
//!
//! The crate samples the three classical Gaussian ensembles (SU(2) random
//! polynomials, random theta sections, the Gaussian entire function), locates
//! their zeros, extracts the process of rescaled near pairs, and evaluates
//! zero correlation functions through a Kac-Rice engine. Everything here is
//! pure computation: no IO and no global state, so the crate builds with
//! `no_std` + `alloc`. Experiment orchestration and file formats live in the
//! `gafzeros` companion crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ensembles;
pub mod error;
pub mod extremes;
pub mod geometry;
pub mod kacrice;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod rootfind;
pub mod stats;

pub use num_complex::Complex64;

pub use ensembles::{EnsembleSpec, KernelJet, Model, RandomSection};
pub use error::{Error, Result};
pub use extremes::{PairEvent, TrialConfig, TrialRecord};
pub use geometry::{Chart, Region, SurfacePoint};
pub use kacrice::CorrelationResult;
pub use rng::{trial_stream, TrialStream};
pub use rootfind::ZeroSet;
pub use stats::GofReport;
