pub mod algebra;
pub mod automaton;
pub mod certificate;
pub mod decomposition;
pub mod formula;
pub mod sdp;
pub mod config;
pub mod engine;
pub mod montecarlo;
