//! Coset-guessing game: F₂ linear algebra, coset states, the localized
//! quantum strategy, the closed-form bound and a Monte Carlo referee.

pub mod bound;
pub mod cosets;
pub mod error;
pub mod f2;
pub mod game;
pub mod qstate;
pub mod strategy;
pub mod verify;

pub use error::{Error, Result};
