//! Numerical toolkit for inhomogeneous steady states of the Hamiltonian
//! mean-field (HMF) model and their nonlinear stability.

// `!(x > 0.0)` is the house idiom for rejecting NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod cli;
pub mod config;
pub mod criterion;
pub mod error;
pub mod profiles;
pub mod quad;
pub mod rearrange;
pub mod reduced_energy;
pub mod roots;
pub mod spline;
pub mod steady_state;
pub mod vlasov_sim;

pub use error::{HmfError, Result};
