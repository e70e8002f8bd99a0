//! Exact symbolic engine for the Koszul-Tate resolution of the constrained
//! phase space of the N=1 spinning particle.
//!
//! The crate is organised bottom-up:
//!
//! * [`grading`]: supercommutative polynomials with Koszul signs.
//! * [`linalg`]: exact rank, kernel and solve over the rationals.
//! * [`repring`]: the virtual representation ring of `so(d)`.
//! * [`pseries`]: truncated bigraded power series, plethystic `Exp`/`Log`.
//! * [`lightcone`]: the refined partition function of `Sym(p, theta)/<T, U>`.
//! * [`tate`]: ghost spectra, sheets, the `d = 1` resolution, Witt counts.
//! * [`ktcomplex`]: explicit low stages of the Koszul-Tate differential.
//! * [`bvjet`]: worldline BV antibracket, master equation and cocycles.
//! * [`table`]: grid and JSON emitters plus golden-file comparison.

pub mod bvjet;
pub mod error;
pub mod grading;
pub mod ktcomplex;
pub mod lightcone;
pub mod linalg;
pub mod pseries;
pub mod repring;
pub mod table;
pub mod tate;

pub use error::{Error, Result};
