pub mod cli;
pub mod config;
pub mod encoder;
pub mod evaluator;
pub mod graph;
pub mod llm;
pub mod memory;
pub mod reasoner;
pub mod retry;
pub mod rng;
pub mod sample;
pub mod synthetic;
pub mod transport;
