//! Satisfiability for the multi-modal logic K_m through a labeled
//! propositional encoding.

pub mod benchgen;
pub mod encoder;
pub mod formula;
pub mod pipeline;
pub mod satsolver;
pub mod semantics;
