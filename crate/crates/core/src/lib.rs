pub mod corepoint;
pub mod engine;
pub mod exact;
pub mod group;
pub mod solve;
pub mod spectral;
pub mod synth;
