//! Property A witnesses on finite metric spaces.
//!
//! The crate builds integer graph metrics ([`spaces`]), covers and their
//! statistics ([`covers`]), the averaged ℓ1 witness functions with an exact
//! audit of their variation bound ([`witness`]), finite-scale dimension
//! estimates and bound curves ([`dimension`]), and a batch command line
//! front end ([`cli`]).

pub mod covers;
pub mod spaces;
pub mod witness;
pub mod dimension;
pub mod io;
pub mod cli;
