//! Oscillator coupled to two spin-1/2 particles, simulated in three
//! regimes: fully quantum (QQ), classical oscillator with spin
//! backreaction (SC), and spins on a fixed classical oscillator
//! background (CB).

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod output;
pub mod quantum;
pub mod scenarios;
pub mod selfcheck;
pub mod statics;

pub use error::{Error, Result};
