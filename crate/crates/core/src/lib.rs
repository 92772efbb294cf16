//! Double Deep Q-Network trading engine for a single asset.
//!
//! The crate is organised along the pipeline:
//!
//! - [`market_data`]: CSV ingestion, log returns, EWMA volatility scaling and
//!   per-model feature frames, plus a seeded synthetic price generator.
//! - [`env`]: the daily long/neutral/short trading simulator with trading and
//!   time costs.
//! - [`nn`]: a small multilayer perceptron with hand-written backpropagation,
//!   inverted dropout, L2 activity regularization and Adam.
//! - [`agent`]: replay memory, the ε schedule and the double-Q learner.
//! - [`training`]: the episode loop with early stopping and checkpoints.
//! - [`evaluation`]: out-of-sample backtests, annualized metrics, the
//!   hindsight-optimal action oracle and report emission.
//! - [`cli`]: configuration files and the command implementations behind the
//!   `ddqn-trader` binary.
//!
//! The guide in `book/` walks through each of these; its code listings are
//! compiled and run as doctests of this crate.

pub mod agent;
pub mod cli;
pub mod env;
mod error;
pub mod evaluation;
pub mod market_data;
pub mod nn;
pub mod rng;
pub mod training;

#[cfg(doctest)]
mod book;

pub use error::{Error, Result};
