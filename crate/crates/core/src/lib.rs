//! Margin-invariant measures of occupational (or sectoral) gender
//! segregation.
//!
//! A k-category occupation-by-sex table is collapsed into a 2×2 basic
//! segregation table ([`classify`]), whose index of dissimilarity is the
//! crude ID. Standardizing that table to common target marginals with
//! iterative proportional fitting ([`ipf`]) removes the influence of the
//! workforce's sex composition and of category sizes while keeping the odds
//! ratio, giving the standardized ID ([`metrics`]). The [`pipeline`] module
//! runs the whole chain from person-level records to cross-country
//! regressions.
//!
//! ```
//! use occseg::classify::OccupationTable;
//! use occseg::ipf::{IpfSettings, TargetMarginals};
//! use occseg::metrics::{crude_id, standardized_id};
//!
//! let t = OccupationTable::from_triples([("f", 400.0, 385.0), ("m", 45.0, 170.0)])?;
//! let targets = TargetMarginals::from_shares(0.43, 0.42)?;
//! let sid = standardized_id(&t, &targets, &IpfSettings::default())?;
//! assert!((crude_id(&t) - 0.205).abs() < 1e-3);
//! assert!((sid.value - 0.326).abs() < 1e-3);
//! # Ok::<(), occseg::Error>(())
//! ```

pub mod classify;
pub mod error;
pub mod fmt;
pub mod ipf;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod tables;

pub use error::{Error, Result};
pub use par::Execution;
