//! Exact p-adic wavelet calculus and a simulator for the free Dirac equation
//! on `Q_p^3`.
//!
//! The crate is layered bottom-up:
//!
//! * [`padic`]: terminating p-adic numbers, balls, polydiscs, Haar measure.
//! * [`wavelet`]: Kozyrev wavelets, the Taibleson–Vladimirov operator,
//!   ball-indicator expansions and exact integration of locally constant
//!   functions.
//! * [`spinor`]: the 4×4 Dirac symbol and everything derived from it.
//! * [`state`]: finite wavelet-spinor expansions and the operators acting on
//!   them.
//! * [`causality`]: the transition-probability experiment between distant
//!   balls.
//! * [`verify`]: seeded invariant suites used by the CLI and the tests.
//!
//! Heavy loops go through [`exec`], which uses rayon when the `parallel`
//! feature is enabled and falls back to sequential iteration otherwise.

pub mod causality;
pub mod error;
pub mod exec;
pub mod padic;
pub mod spinor;
pub mod state;
pub mod verify;
pub mod wavelet;

pub use error::{Error, Result};
pub use exec::Execution;
