//! Electron tunnelling through a rectangular barrier whose height oscillates
//! in time, `V(t) = V0 + V1 sin(omega t)`.
//!
//! Units: `hbar = 1`, `2m = 1`, so `k^2 = E` and the modulation quantum
//! `alpha = hbar omega` equals `omega`.

// `!(x > y)` is used on purpose so NaN falls into the rejection branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barrier;
pub mod bessel;
pub mod cli;
pub mod error;
pub mod spectrum;
pub mod tdse;
pub mod tien_gordon;
pub mod transmission;
pub mod traversal;

pub use barrier::{match_static, transmission_opaque, transmission_static, BarrierConfig, StaticSolution};
pub use error::{Error, Result};
pub use spectrum::{build_spectrum, Branch, Channel, ChannelSpectrum, Classification};
pub use tdse::{propagate, transmitted_fraction, DrivenBarrier, GaussianPacket, GridSpec, WavePacketState};
pub use tien_gordon::{tg_sidebands, SidebandTable};
pub use transmission::{transmission_channel, transmission_total, TransmissionResult};
pub use traversal::{traversal_exact, traversal_high, traversal_low, TraversalSolution};
