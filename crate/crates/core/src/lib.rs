pub mod algebraic;
pub mod exhaustion;
pub mod graph;
pub mod invariants;
pub mod magnetic;
pub mod operator;
pub mod par;
pub mod spectral;
