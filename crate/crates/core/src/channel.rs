//! The modulo measurement channel: folding, quantization and additive noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::signals::SampledSignal;
use crate::{Error, Result, Scalar};

/// Centered modulo: `fold(x, λ) = x − 2λ⌊(x+λ)/(2λ)⌋`, with values returned
/// in `[-λ, λ)`. The boundary `x = (2k+1)λ` maps to `−λ` by the floor
/// definition; no epsilon nudging is applied. Non-finite inputs propagate —
/// the vector entry points reject them up front.
#[inline]
pub fn fold<F: Scalar>(x: F, lambda: F) -> F {
    let two_l = lambda + lambda;
    x - two_l * ((x + lambda) / two_l).floor()
}

fn quantizer_step<F: Scalar>(lambda: F, bits: u32) -> F {
    (lambda + lambda) / F::cast((1u64 << bits) as f64)
}

/// Snap `y` to the nearest mid-rise level `{−λ + q/2 + iq : 0 ≤ i < 2^b}`
/// with `q = 2λ/2^b`, saturating at the end levels. The quantization error
/// of in-range inputs never exceeds `q/2 = λ2^{−b}`.
pub fn quantize_clamped<F: Scalar>(y: F, lambda: F, bits: u32) -> F {
    let q = quantizer_step(lambda, bits);
    let max_index = F::cast(((1u64 << bits) - 1) as f64);
    let idx = ((y + lambda) / q)
        .floor()
        .max(F::zero())
        .min(max_index);
    -lambda + q * (idx + F::cast(0.5))
}

/// Strict-range mid-rise quantizer; rejects inputs outside `[-λ, λ)`.
pub fn quantize<F: Scalar>(y: F, lambda: F, bits: u32) -> Result<F> {
    if bits == 0 {
        return Err(Error::config("quantizer needs at least 1 bit"));
    }
    if !(y >= -lambda && y < lambda) {
        return Err(Error::config(format!(
            "quantizer input {y} outside fold range [-{lambda}, {lambda})"
        )));
    }
    Ok(quantize_clamped(y, lambda, bits))
}

/// Additive noise model for the modulo measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel<F> {
    None,
    /// Uniform on `(−ρ_η λ, ρ_η λ)`, so the realized sup-norm is strictly
    /// below `ρ_η λ`.
    UniformBounded { rho_eta: F },
    Gaussian { sigma: F },
}

/// Where the additive noise enters relative to the fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseInsertion {
    /// `y_η = fold(γ) + η`: noise lands on the already-folded samples.
    PostFold,
    /// `y_η = fold(γ + η)`: noise enters before the fold, the jitter-pipeline
    /// measurement model.
    PreFold,
}

/// Modulo ADC description. `oversampling` (relative to Nyquist) and
/// `jitter_nu` describe the acquisition clock and are consumed by the
/// harness when it builds sample grids; `transmit` itself is a pure
/// sample-domain map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig<F> {
    pub lambda: F,
    /// Mid-rise quantizer resolution; `None` leaves samples unquantized.
    #[serde(default)]
    pub bits: Option<u32>,
    pub noise: NoiseModel<F>,
    pub insertion: NoiseInsertion,
    /// Sampling rate relative to Nyquist, `f_s / (2B)`.
    pub oversampling: F,
    /// Timing-jitter level ν: offsets are bounded by `ν·T`. Zero means a
    /// uniform grid.
    #[serde(default)]
    pub jitter_nu: F,
    pub seed: u64,
}

impl<F: Scalar> ChannelConfig<F> {
    /// Noiseless, unquantized, uniformly sampled channel.
    pub fn ideal(lambda: F, oversampling: F, seed: u64) -> Self {
        Self {
            lambda,
            bits: None,
            noise: NoiseModel::None,
            insertion: NoiseInsertion::PostFold,
            oversampling,
            jitter_nu: F::zero(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > F::zero()) {
            return Err(Error::config("channel lambda must be positive"));
        }
        if let Some(b) = self.bits {
            if b == 0 || b > 32 {
                return Err(Error::config("quantizer bits must be in 1..=32"));
            }
        }
        match self.noise {
            NoiseModel::None => {}
            NoiseModel::UniformBounded { rho_eta } => {
                if rho_eta < F::zero() {
                    return Err(Error::config("rho_eta must be nonnegative"));
                }
            }
            NoiseModel::Gaussian { sigma } => {
                if sigma < F::zero() {
                    return Err(Error::config("sigma must be nonnegative"));
                }
            }
        }
        if !(self.oversampling > F::zero()) {
            return Err(Error::config("oversampling must be positive"));
        }
        if self.jitter_nu < F::zero() || self.jitter_nu >= F::cast(0.5) {
            return Err(Error::config("jitter level must lie in [0, 1/2)"));
        }
        Ok(())
    }
}

/// Noisy modulo measurements together with the noise that was actually
/// realized, so the exact recovery contract `γ̃ = γ + η + 2mλ` stays
/// checkable downstream. `eta` absorbs quantization error and any saturation
/// applied to noisy post-fold samples: in post-fold mode `η = y_η − fold(γ)`,
/// in pre-fold mode `η = η_raw + (y_η − fold(γ + η_raw))`.
#[derive(Debug, Clone)]
pub struct ChannelOutput<F> {
    pub y: Vec<F>,
    pub eta: Vec<F>,
}

impl<F: Scalar> ChannelOutput<F> {
    pub fn eta_sup(&self) -> F {
        self.eta
            .iter()
            .fold(F::zero(), |m, &v| if v.abs() > m { v.abs() } else { m })
    }
}

/// Apply the configured channel to clean samples. Noise draws come from a
/// counter-based generator seeded by `cfg.seed`; the raw stream is always
/// generated in `f64` and narrowed afterwards, so a configuration is
/// reproducible bit-for-bit regardless of platform.
pub fn transmit<F: Scalar>(
    samples: &SampledSignal<F>,
    cfg: &ChannelConfig<F>,
) -> Result<ChannelOutput<F>> {
    cfg.validate()?;
    let gamma = samples.values();
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("non-finite sample fed to channel"));
    }
    let lambda = cfg.lambda;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let raw: Vec<F> = match cfg.noise {
        NoiseModel::None => vec![F::zero(); gamma.len()],
        NoiseModel::UniformBounded { rho_eta } => {
            let a = rho_eta.to_f64().unwrap() * lambda.to_f64().unwrap();
            (0..gamma.len())
                .map(|_| {
                    if a == 0.0 {
                        F::zero()
                    } else {
                        F::cast(rng.random_range(-a..a))
                    }
                })
                .collect()
        }
        NoiseModel::Gaussian { sigma } => {
            let s = sigma.to_f64().unwrap();
            if s == 0.0 {
                vec![F::zero(); gamma.len()]
            } else {
                let normal = Normal::new(0.0, s).expect("validated sigma");
                (0..gamma.len()).map(|_| F::cast(normal.sample(&mut rng))).collect()
            }
        }
    };

    let mut y = Vec::with_capacity(gamma.len());
    let mut eta = Vec::with_capacity(gamma.len());
    match cfg.insertion {
        NoiseInsertion::PostFold => {
            for (&g, &e) in gamma.iter().zip(&raw) {
                let base = fold(g, lambda);
                let mut out = base + e;
                if let Some(b) = cfg.bits {
                    out = quantize_clamped(out, lambda, b);
                }
                y.push(out);
                eta.push(out - base);
            }
        }
        NoiseInsertion::PreFold => {
            for (&g, &e) in gamma.iter().zip(&raw) {
                let base = fold(g + e, lambda);
                let mut out = base;
                if let Some(b) = cfg.bits {
                    out = quantize_clamped(out, lambda, b);
                }
                y.push(out);
                eta.push(e + (out - base));
            }
        }
    }
    Ok(ChannelOutput { y, eta })
}
