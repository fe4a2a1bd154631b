//! Numerical core: Airy functions, the Ermakov-type similarity solution of
//! `u_t + u_xxx + λ(t+a)⁻²u⁻⁴u_x = 0`, its Stefan problem, and the reciprocal
//! and involutory transformations that map it to related equations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod dd;
pub mod ermakov;
pub mod error;
pub mod involutory;
pub mod ode;
pub mod quadrature;
pub mod reciprocal;
pub mod report;
pub mod roots;
pub mod similarity;
pub mod specialfn;
pub mod stefan;

pub use error::{Error, Result};
