//! Necessary security conditions for practical BB84 quantum key distribution.
//!
//! The crate answers one question for a given source and detector: how much
//! channel transmission (and therefore how much fiber) can a BB84 link tolerate
//! before an eavesdropper running a photon-number-splitting attack, or a plain
//! intercept-resend attack hidden behind dark counts, obtains the whole key?
//!
//! * [`photon_statistics`] builds per-pulse photon-number distributions for
//!   ideal single photons, weak coherent pulses and heralded downconversion.
//! * [`link_model`] turns fiber and detector parameters into per-slot click and
//!   error probabilities.
//! * [`security_bounds`] evaluates the necessary conditions and derives minimum
//!   transmissions, optimal intensities and maximum distances, both in closed
//!   form and by exact numerical solving.
//! * [`pns_simulator`] is a seeded Monte Carlo model of the protocol under
//!   attack, used to check the analytic bounds.
//! * [`cli`] and [`report`] back the `qkd-limits` binary.
//!
//! ```
//! use qkd_limits::link_model::DetectorParams;
//! use qkd_limits::security_bounds::optimal_wcp_mu;
//!
//! let bob = DetectorParams::new(0.11, 1e-5).unwrap();
//! let bound = optimal_wcp_mu(&bob).unwrap();
//! let reach = bound.reach_for_fiber(0.38, 5.0);
//! assert!((bound.f_min - 0.0407).abs() < 1e-3);
//! assert!((reach.km().unwrap() - 23.4).abs() < 0.1);
//! ```

pub mod cli;
pub mod error;
pub mod link_model;
pub mod numeric;
pub mod photon_statistics;
pub mod pns_simulator;
pub mod report;
pub mod security_bounds;

pub use error::{Error, Result};
