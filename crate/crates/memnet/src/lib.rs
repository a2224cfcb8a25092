//! Hierarchical resistive threshold-logic memory networks.
//!
//! A memory network is a tree of cells. Each cell is a resistive voltage
//! divider (one binary-state device per input plus one reference device to
//! ground) followed by an inverting threshold element. Device states are the
//! trainable weights; they are fixed by staged genetic optimization against a
//! labeled dataset.
//!
//! The crate is organized around that pipeline:
//!
//! - [`model`] — cells, tree topologies, and digital/analog forward evaluation
//! - [`sizing`] — inverter and memory-bit accounting, capacity extrapolation
//! - [`trainer`] — chromosome encoding, staged genetic training, brute-force oracle
//! - [`robustness`] — conductance perturbation, stability bounds, fault injection
//! - [`bank`] — one-network-per-class multiclass classification with codewords
//!
//! All evaluation is pure over immutable values and all randomness flows from
//! explicit seeds, so results are reproducible bit-for-bit regardless of the
//! `parallel` feature or thread count.

pub mod bank;
pub mod exec;
pub mod model;
pub mod robustness;
pub mod seeds;
pub mod sizing;
pub mod trainer;
