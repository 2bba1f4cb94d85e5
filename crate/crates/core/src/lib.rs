//! Random hard instances for nonsmooth nonconvex first-order optimization.
//!
//! The one-dimensional profile lives in [`hard1d`], its `d`-dimensional
//! embedding in [`embed`], and everything an experiment needs on top (oracle,
//! algorithms, certification) in [`oracle`], [`algorithms`] and [`verify`].
//! All numeric code is generic over [`Real`]; the aliases below fix the
//! common precisions.

pub mod algorithms;
pub mod embed;
pub mod error;
pub mod hard1d;
pub mod intervals;
pub mod io;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod schedule;
pub mod verify;

pub use error::{HardError, Result};
pub use scalar::{Field, Quad, Real};

pub type Schedule = schedule::AngleSchedule<f64>;
pub type Profile = hard1d::HardProfile<f64>;
pub type Instance = embed::HardInstance<f64>;
pub type ExtendedSchedule = schedule::AngleSchedule<Quad>;
pub type ExtendedProfile = hard1d::HardProfile<Quad>;
pub type ExtendedInstance = embed::HardInstance<Quad>;
