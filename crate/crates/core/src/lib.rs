//! Integral transforms over the family of confocal paraboloids
//! `|x| - <x, ω> = 2p` and their filtered-back-projection inversion.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: incidence function θ, surface parametrization, sphere rules.
//! * [`phantom`]: compactly supported bump phantoms.
//! * [`transforms`]: forward transforms `R`, `M`, `M_b` and a Monte-Carlo slab oracle.
//! * [`inversion`]: profile filters, interpolation and back-projection.
//! * [`framework`]: probes of the generating-function machinery behind the inversion.
//! * [`verify`]: independent oracles and verification suites.
//! * [`interface`]: PSG1/PBI1 containers, CSV export and provenance.

pub mod error;
pub mod framework;
pub mod geometry;
pub mod interface;
pub mod inversion;
pub mod phantom;
pub mod quadrature;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
