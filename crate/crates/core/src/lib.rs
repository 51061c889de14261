//! Recovery of bandlimited signals from modulo (folded) samples.
//!
//! A modulo ADC folds its input into `[-λ, λ)` before digitization, which
//! preserves amplitudes far beyond the converter range as wrapped values.
//! This crate implements the difference-based recovery family for such
//! samples: unwrap the N-th forward difference of the folded stream, then
//! anti-difference back with integer `2λ` alignment at every stage.
//!
//! What is here:
//!
//! * [`signals`] — bandlimited test-signal synthesis (sinc mixtures, tones,
//!   tabulated traces) on uniform or jittered sample grids.
//! * [`channel`] — the fold nonlinearity, mid-rise quantization and additive
//!   noise with both pre-fold and post-fold insertion.
//! * [`diffcalc`] — forward differences, anti-differences and `2λ`-lattice
//!   rounding, the algebra underneath every recovery routine.
//! * [`recovery`] — the fixed-order unwrapping algorithm (second order is
//!   the practical default), the jitter-aware second-order pipeline, global
//!   alignment, and sinc / non-uniform least-squares reconstruction.
//! * [`bounds`] — closed-form minimum difference orders and sufficient
//!   oversampling factors, including noise-, quantization- and jitter-aware
//!   variants.
//! * [`metrics`] — reconstruction SNR, PSNR, single-tone SINAD and ENOB.
//! * [`harness`] — deterministic single trials, Monte-Carlo sweeps with
//!   reproducible per-cell seeding, and trace-file ingestion.
//!
//! Core numerics are generic over the floating-point scalar through
//! [`Scalar`]; concrete `f64` aliases are exported at the crate root and the
//! harness is pinned to `f64`.

pub mod bounds;
pub mod channel;
pub mod diffcalc;
mod error;
pub mod harness;
pub mod metrics;
pub mod recovery;
pub mod signals;
pub mod trace;

pub use error::{Error, Result};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the numeric kernels are generic over: `f32` or
/// `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + core::iter::Sum<Self>
    + core::fmt::Debug
    + core::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy cast from `f64`; exact for every constant used in this crate.
    #[inline]
    fn cast(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// π in the scalar type.
    #[inline]
    fn pi() -> Self {
        Self::cast(core::f64::consts::PI)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Double-precision aliases for the main domain types.
pub type Sequence64 = diffcalc::Sequence<f64>;
pub type Sequence32 = diffcalc::Sequence<f32>;
pub type Signal64 = signals::Signal<f64>;
pub type SignalSpec64 = signals::SignalSpec<f64>;
pub type SamplingGrid64 = signals::SamplingGrid<f64>;
pub type SampledSignal64 = signals::SampledSignal<f64>;
pub type ChannelConfig64 = channel::ChannelConfig<f64>;
pub type RecoveryConfig64 = recovery::RecoveryConfig<f64>;
pub type RecoveryResult64 = recovery::RecoveryResult<f64>;
pub type MetricsReport64 = metrics::MetricsReport<f64>;
