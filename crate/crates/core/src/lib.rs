//! Tail-probability bounds built on the operational view of expectation:
//! `E[f(z + Z)]` is the differential operator `P(-q)` applied to `f` at `z`.
//!
//! The crate computes and cross-checks four families of upper bounds on
//! `Pr[Z >= x]` for continuous laws:
//!
//! * Markov, `E[Z+] / x`;
//! * classical Chernoff, `min_t M(t) e^{-tx}`;
//! * fractional-moment, `min_a m_a+ / x^a`;
//! * operational, `E[f(z + Z)] / f(x + z)` for a non-decreasing shift
//!   function `f`, optimized over the shift point `z`.
//!
//! It also provides the truncated operator-series machinery used to check
//! the ordering "moment bound <= any bound from a strictly absolutely
//! monotonic `f`" numerically.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; all operations are pure functions of their inputs.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod bounds;
pub mod distributions;
mod error;
pub mod extended;
pub mod operational;
pub mod optimize;
pub mod quadrature;
pub mod shift;
pub mod special;

pub use bounds::{BoundMethod, BoundReport, BoundStatus, Comparison};
pub use distributions::{ContinuousDistribution, Distribution, MgfDomain, PositiveRestriction};
pub use error::Error;
pub use extended::Extended;
pub use operational::{OperatorSeries, SamReport};
pub use optimize::{ScalarMinimum, SearchInterval};
pub use quadrature::{QuadratureResult, Tolerance};
pub use shift::ShiftFunction;
