//! Numerical laboratory for quasiperiodic cocycles on 𝕋×SU(2): continued
//! fractions, the KAM reduction scheme, its normal form and parameter
//! ledger, and harmonic analysis of the associated Koopman operator.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod arithmetic;
pub mod cocycle;
pub mod error;
pub mod fourier;
pub mod harmonics;
pub mod kam;
pub mod linalg;
pub mod normal_form;
pub mod real;
pub mod su2;

pub use error::{Error, Result};
pub use real::{Cx, Real};
