//! GNSS tracking-loop laboratory: scalar (STL), vector delay/frequency-lock
//! (VDFLL) and ultra-tight adaptive loop filter (UT-ALFA) receivers over a
//! shared synthetic signal and navigation chain.

pub mod channel;
pub mod consts;
pub mod earth;
pub mod error;
pub mod harness;
pub mod loops;
pub mod navfilter;
pub mod scenario;
pub mod signal;

pub use error::{Error, Result};
