//! Downlink coverage analysis for multi-tier integrated satellite-terrestrial
//! networks.
//!
//! Base stations of each tier live on a sphere concentric with the Earth;
//! the visible portion of every shell is a spherical cap whose Poisson
//! process displaces exactly onto a planar annulus. On top of that geometry
//! the crate provides:
//!
//! - [`geometry`]: shells, caps, the cap-to-annulus displacement, and
//!   Poisson-process samplers in both representations;
//! - [`fading`]: shadowed-Rician and Nakagami-m power laws with samplers,
//!   Gamma-mixture CCDF series, and closed-form tilt-MGF derivatives;
//! - [`analytics`]: association probabilities, interference Laplace
//!   transforms and their high-order derivatives, and the exact,
//!   approximated, and closed-form coverage probability expressions;
//! - [`simulator`]: a deterministic, parallel Monte-Carlo snapshot engine,
//!   plus a Walker-star grid baseline;
//! - [`experiments`]: config-driven sweeps, figure recipes, and CSV /
//!   plot-data emission behind the `istn` command-line tool.

pub mod analytics;
pub mod experiments;
pub mod fading;
pub mod geometry;
pub mod quadrature;
pub mod simulator;
pub mod stats;

pub use analytics::{CoverageCurve, CoveragePoint, KappaPolicy, Method, TierConfig};
pub use fading::{FadingLaw, NakagamiParams, ShadowedRicianParams};
pub use geometry::{AnnulusGeometry, SphereShell, VisibleCap};
