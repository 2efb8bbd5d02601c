//! Verification of FIFO machines along bounded-language runs.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod automata;
pub mod bounded;
pub mod model;
pub mod normalize;
pub mod relation;
pub mod counterize;
pub mod engine;
pub mod corpus;
