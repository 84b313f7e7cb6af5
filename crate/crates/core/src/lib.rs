//! Pointwise-exact curvature engine for almost paracontact metric manifolds.
//!
//! A manifold is described by a pseudo-orthonormal frame whose coordinate
//! components are scalar expressions ([`dsl`]). At each point the frame is
//! evaluated as second-order [`jets`], from which the structure tensors
//! ([`model`]), the Levi-Civita connection ([`connection`]), curvature
//! ([`curvature`]), the paracontact invariants ([`paracontact`]) and the
//! derived curvature tensors ([`curvfamily`]) are assembled. [`verify`]
//! turns the trans-para-Sasakian identities and theorems into residual
//! checks over seeded sample points.
//!
//! The crate is `no_std` and only needs `alloc`.

// Negated comparisons are deliberate: they treat NaN residuals as failures.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tensor contractions read best as explicit index loops.
#![allow(clippy::needless_range_loop)]
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod connection;
pub mod curvature;
pub mod curvfamily;
pub mod dsl;
pub mod jets;
pub mod model;
pub mod paracontact;
pub mod sampling;
pub mod verify;
