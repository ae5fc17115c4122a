//! Library for simulating distributed parameter and power-spectrum estimation
//! over diffusion sensor networks.
//!
//! Each node in a partially connected network runs an LMS-type adaptive filter
//! and exchanges intermediate estimates with its neighbors (adapt-then-combine
//! protocol). The main algorithm alternates a continuous weight update with a
//! discrete tap-selector update, which lets the network identify and exploit
//! the sparsity of the unknown parameter vector. Standard, oracle, and
//! sparsity-penalized diffusion LMS baselines are included, along with a
//! Monte-Carlo experiment harness and a spectrum-sensing scenario generator.

pub mod algorithms;
pub mod config;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod presets;
pub mod scalar;
pub mod spectrum;
