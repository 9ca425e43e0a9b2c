//! Blind estimation of AWGN decoding-metric parameters for probabilistically
//! shaped QAM.
//!
//! The receiver model is `Y = Δ·X + N` with `N ~ CN(0, σ²)` and `X` drawn from
//! a (possibly shaped) distribution over a square QAM grid. The [`estimation`]
//! module learns `(Δ, σ², p)` from channel outputs alone by expectation
//! maximization; [`metrics`] scores a parameter set by bit-metric decoding
//! rates against known transmitted data.

pub mod channel;
pub mod constellation;
pub mod error;
pub mod estimation;
pub mod io;
mod kernel;
pub mod metrics;
pub mod modes;
pub mod search;
pub mod sweep;

pub use channel::{ChannelParams, SampleBatch};
pub use constellation::{fit_mb_nu, Constellation, SymbolDistribution};
pub use error::{Error, Result};
pub use num_complex::Complex64;
