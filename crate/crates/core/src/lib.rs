//! Gauge orbit types of lattice connections over compact structure groups.
//!
//! The crate is organised bottom-up: [`group`] provides the structure groups
//! and centralizers, [`howe`] the poset of orbit types, [`path`] graphs and
//! reduced words, [`connection`] connections with their holonomies and gauge
//! action. On top sit [`construct`] (raising the type of a connection by
//! adding loops), [`census`] (stratum measures) and [`slice`] (orbit
//! projections in `G^n`).

pub mod census;
pub mod connection;
pub mod construct;
pub mod error;
pub mod group;
pub mod howe;
pub mod io;
pub mod path;
pub mod slice;
pub mod verify;

pub use error::{Error, Result};
