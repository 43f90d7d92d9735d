pub mod cli;
pub mod config;
pub mod expr;
pub mod generator;
pub mod metrics;
pub mod network;
pub mod sampling;
pub mod similarity;
