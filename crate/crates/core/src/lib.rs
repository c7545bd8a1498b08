//! Fuzzy answer set programming toolkit: parsing, grounding, structural analysis,
//! rewriting, SMT translation, solver driving and stable-model verification.

pub mod analysis;
pub mod benchgen;
pub mod cli;
pub mod degree;
pub mod frontend;
pub mod program;
pub mod rewrite;
pub mod semantics;
pub mod smtclient;
pub mod translate;
pub mod verify;
